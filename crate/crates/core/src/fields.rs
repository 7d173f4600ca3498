//! Upper and lower point fields of a monotone map.
//!
//! The upper field is the set of distinct end positions (the survivors). The
//! lower field marks the boundaries between the start intervals ("basins")
//! that share an end.

use std::fmt;

use crate::coalesce::MonotoneMap;

/// Boundary points dropped from each end of a field by default.
pub const DEFAULT_TRIM: usize = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("map has too few distinct ends to form a point field")]
    DegenerateMap,
    #[error("cannot trim {per_end} points from each end of a field of {len}")]
    TooFewPoints { len: usize, per_end: usize },
    #[error("field is already rescaled")]
    AlreadyRescaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Upper,
    Lower,
}

impl FieldKind {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Upper => "U",
            Self::Lower => "L",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        match s {
            "U" => Some(Self::Upper),
            "L" => Some(Self::Lower),
            _ => None,
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Upper => "upper",
            Self::Lower => "lower",
        })
    }
}

/// Where a basin boundary is placed between two adjacent starts `s < s'`
/// with different ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LowerPlacement {
    /// `(s + s') / 2`
    #[default]
    Midpoint,
    /// `s`, the last start of the left basin.
    LastStart,
}

impl LowerPlacement {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Midpoint => "midpoint",
            Self::LastStart => "last-start",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "midpoint" => Some(Self::Midpoint),
            "last-start" => Some(Self::LastStart),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointField {
    positions: Vec<f64>,
    kind: FieldKind,
    n: usize,
    rescaled: bool,
}

impl PointField {
    /// Wraps already-sorted positions; used when reading data banks back.
    pub fn from_positions(positions: Vec<f64>, kind: FieldKind, n: usize, rescaled: bool) -> Self {
        debug_assert!(positions.windows(2).all(|w| w[0] < w[1]));
        Self { positions, kind, n, rescaled }
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn horizon(&self) -> usize {
        self.n
    }

    pub fn is_rescaled(&self) -> bool {
        self.rescaled
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Consecutive differences.
    pub fn gaps(&self) -> Vec<f64> {
        self.positions.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Drops `per_end` points from each end.
    pub fn trim(mut self, per_end: usize) -> Result<Self, FieldError> {
        let len = self.positions.len();
        if len <= 2 * per_end {
            return Err(FieldError::TooFewPoints { len, per_end });
        }
        self.positions.truncate(len - per_end);
        self.positions.drain(..per_end);
        Ok(self)
    }

    /// Divides positions by `n^{2/3}`.
    pub fn rescale(mut self) -> Result<Self, FieldError> {
        if self.rescaled {
            return Err(FieldError::AlreadyRescaled);
        }
        let scale = (self.n as f64).powf(2.0 / 3.0);
        for x in &mut self.positions {
            *x /= scale;
        }
        self.rescaled = true;
        Ok(self)
    }
}

/// Distinct end values of `map`, in increasing order.
pub fn upper_field(map: &MonotoneMap, n: usize) -> Result<PointField, FieldError> {
    let mut positions: Vec<f64> = map.entries().iter().map(|e| e.1).collect();
    positions.dedup();
    if positions.len() < 2 {
        return Err(FieldError::DegenerateMap);
    }
    Ok(PointField { positions, kind: FieldKind::Upper, n, rescaled: false })
}

/// Basin boundaries of `map`: one point per adjacent start pair whose ends differ.
pub fn lower_field(map: &MonotoneMap, n: usize, placement: LowerPlacement) -> Result<PointField, FieldError> {
    let positions: Vec<f64> = map
        .entries()
        .windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| match placement {
            LowerPlacement::Midpoint => 0.5 * (w[0].0 + w[1].0),
            LowerPlacement::LastStart => w[0].0,
        })
        .collect();
    if positions.is_empty() {
        return Err(FieldError::DegenerateMap);
    }
    Ok(PointField { positions, kind: FieldKind::Lower, n, rescaled: false })
}
