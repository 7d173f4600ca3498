use std::fmt::{self, Write as _};

use super::{DataBank, HarnessError};
use crate::fields::FieldKind;
use crate::stats::{delta0, jump_k_ratios, ks_test, GapPool, KsResult};

/// Jump distances tabulated by [`symmetry_table`].
pub const SYMMETRY_JUMPS: std::ops::RangeInclusive<usize> = 1..=6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Delta0,
    Jump(usize),
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Self::Delta0 => "delta0",
            Self::Jump(_) => "jump",
        }
    }

    pub fn k(self) -> Option<usize> {
        match self {
            Self::Delta0 => None,
            Self::Jump(k) => Some(k),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Delta0 => f.write_str("Distance"),
            Self::Jump(k) => write!(f, "Jump-{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSelection {
    Upper,
    Lower,
    /// Upper field above the diagonal, lower field below.
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableCell {
    pub row: usize,
    pub col: usize,
    pub row_model: String,
    pub col_model: String,
    /// `U`, `L`, or `U-L` for an upper-versus-lower comparison.
    pub field: String,
    pub statistic: Statistic,
    pub result: KsResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PValueTable {
    pub title: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub cells: Vec<TableCell>,
}

fn format_p(p: f64) -> String {
    if p < 0.01 {
        "<0.01".to_string()
    } else {
        format!("{p:.2}")
    }
}

impl PValueTable {
    pub fn cell(&self, row: usize, col: usize) -> Option<&TableCell> {
        self.cells.iter().find(|c| c.row == row && c.col == col)
    }

    pub fn p(&self, row: usize, col: usize) -> Option<f64> {
        self.cell(row, col).map(|c| c.result.p)
    }

    /// Aligned plain-text matrix.
    pub fn render_text(&self) -> String {
        let prefix = self.cells.iter().any(|c| c.field != self.cells[0].field);
        let grid: Vec<Vec<String>> = (0..self.row_labels.len())
            .map(|r| {
                (0..self.col_labels.len())
                    .map(|c| match self.cell(r, c) {
                        Some(cell) if prefix => format!("{}: {}", cell.field, format_p(cell.result.p)),
                        Some(cell) => format_p(cell.result.p),
                        None => String::new(),
                    })
                    .collect()
            })
            .collect();
        let first = self.row_labels.iter().map(String::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..self.col_labels.len())
            .map(|c| grid.iter().map(|row| row[c].len()).chain([self.col_labels[c].len()]).max().unwrap_or(0))
            .collect();

        let mut out = String::new();
        let _ = writeln!(out, "{}", self.title);
        let _ = write!(out, "{:first$}", "");
        for (label, w) in self.col_labels.iter().zip(&widths) {
            let _ = write!(out, "  {label:>w$}");
        }
        out.push('\n');
        for (label, row) in self.row_labels.iter().zip(&grid) {
            let _ = write!(out, "{label:first$}");
            for (cell, w) in row.iter().zip(&widths) {
                let _ = write!(out, "  {cell:>w$}");
            }
            out.push('\n');
        }
        out
    }

    /// Machine-readable rows `row_model,col_model,field,statistic,k,d,p,n1,n2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row_model,col_model,field,statistic,k,d,p,n1,n2\n");
        for c in &self.cells {
            let k = c.statistic.k().map_or_else(String::new, |k| k.to_string());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.17e},{:.17e},{},{}",
                c.row_model,
                c.col_model,
                c.field,
                c.statistic.name(),
                k,
                c.result.d,
                c.result.p,
                c.result.n1,
                c.result.n2
            );
        }
        out
    }
}

/// δ₀ or jump-k sample of one field kind, pooled over a bank's replicas.
pub fn pooled_statistic(bank: &DataBank, statistic: Statistic, kind: FieldKind) -> Result<Vec<f64>, HarnessError> {
    let pool = GapPool::from_fields(&bank.fields(kind));
    Ok(match statistic {
        Statistic::Delta0 => delta0(&pool)?,
        Statistic::Jump(k) => jump_k_ratios(&pool, k)?,
    })
}

fn check_conventions(banks: &[DataBank]) -> Result<(), HarnessError> {
    let first = banks.first().ok_or(HarnessError::NoBanks)?.header().conventions();
    for bank in &banks[1..] {
        for ((key, a), (_, b)) in first.iter().zip(bank.header().conventions()) {
            if *a != b {
                return Err(HarnessError::ConventionMismatch(format!("{key} ({a} vs {b})")));
            }
        }
    }
    Ok(())
}

fn labels(banks: &[DataBank]) -> Vec<String> {
    let raw: Vec<String> = banks.iter().map(|b| b.header().label()).collect();
    raw.iter()
        .enumerate()
        .map(|(i, l)| if raw.iter().filter(|o| *o == l).count() > 1 { format!("{l}#{}", i + 1) } else { l.clone() })
        .collect()
}

/// Pairwise K-S p-values of a pooled statistic between banks.
pub fn compare(banks: &[DataBank], statistic: Statistic, field: FieldSelection) -> Result<PValueTable, HarnessError> {
    check_conventions(banks)?;
    let names = labels(banks);
    let kinds: &[FieldKind] = match field {
        FieldSelection::Upper => &[FieldKind::Upper],
        FieldSelection::Lower => &[FieldKind::Lower],
        FieldSelection::Both => &[FieldKind::Upper, FieldKind::Lower],
    };
    let mut samples = Vec::new();
    for bank in banks {
        let per_kind = kinds.iter().map(|&k| pooled_statistic(bank, statistic, k)).collect::<Result<Vec<_>, _>>()?;
        samples.push(per_kind);
    }

    let mut cells = Vec::new();
    for row in 0..banks.len() {
        for col in 0..banks.len() {
            let slot = match field {
                FieldSelection::Both if row == col => continue,
                FieldSelection::Both if row < col => 0,
                FieldSelection::Both => 1,
                _ => 0,
            };
            let kind = kinds[slot];
            let result = ks_test(&samples[row][slot], &samples[col][slot])?;
            cells.push(TableCell {
                row,
                col,
                row_model: names[row].clone(),
                col_model: names[col].clone(),
                field: kind.tag().to_string(),
                statistic,
                result,
            });
        }
    }
    let which = match field {
        FieldSelection::Upper => "upper fields",
        FieldSelection::Lower => "lower fields",
        FieldSelection::Both => "upper (U, above diagonal) and lower (L, below diagonal) fields",
    };
    Ok(PValueTable {
        title: format!("K-S p-values of {statistic} between models, {which}"),
        row_labels: names.clone(),
        col_labels: names,
        cells,
    })
}

/// Upper-versus-lower K-S p-values of δ₀ and r₁..r₆ for each bank.
pub fn symmetry_table(banks: &[DataBank]) -> Result<PValueTable, HarnessError> {
    check_conventions(banks)?;
    let names = labels(banks);
    let stats: Vec<Statistic> = std::iter::once(Statistic::Delta0).chain(SYMMETRY_JUMPS.map(Statistic::Jump)).collect();
    let mut cells = Vec::new();
    for (col, bank) in banks.iter().enumerate() {
        for (row, &statistic) in stats.iter().enumerate() {
            let upper = pooled_statistic(bank, statistic, FieldKind::Upper)?;
            let lower = pooled_statistic(bank, statistic, FieldKind::Lower)?;
            cells.push(TableCell {
                row,
                col,
                row_model: names[col].clone(),
                col_model: names[col].clone(),
                field: "U-L".to_string(),
                statistic,
                result: ks_test(&upper, &lower)?,
            });
        }
    }
    Ok(PValueTable {
        title: "K-S p-values between upper and lower fields of each model".to_string(),
        row_labels: stats.iter().map(ToString::to_string).collect(),
        col_labels: names,
        cells,
    })
}
