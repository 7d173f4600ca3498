//! Exponential corner growth: last-passage times and their geodesic forest.
//!
//! Lattice points are `(i, j)` with `i, j ≥ 0`, `i` the row, and `i + j` plays
//! the role of time. The passage time satisfies
//! `g(i,j) = w(i,j) + max(g(i−1,j), g(i,j−1))`. Geodesics are traced backwards
//! from a terminal anti-diagonal through argmax parents. Positions are
//! reported in the rotated coordinate `x = i − j`.
//!
//! Under [`Geometry::Anchored`] each followed terminal point is mapped to the
//! position of its geodesic `n` anti-diagonals earlier; under
//! [`Geometry::AxisRoots`] to the axis point where the geodesic ends.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::coalesce::{default_half_width, MonotoneMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Axis weights are Exp(1) like the bulk.
    None,
    /// Weights on the `j`-axis (`i = 0`) are Exp(1 − rho), on the `i`-axis
    /// (`j = 0`) Exp(rho); the corner carries weight 0.
    Stationary { rho: f64 },
}

impl Default for Boundary {
    fn default() -> Self {
        Self::Stationary { rho: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LppError {
    #[error("stationary density must lie in (0, 1), got {0}")]
    InvalidDensity(f64),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("terminal half-width must be at least 1")]
    ZeroHalfWidth,
}

/// Which terminal points are followed and where their geodesics are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Geometry {
    /// The `2k + 1` central points of a late anti-diagonal, each mapped to its
    /// geodesic's position `n` anti-diagonals earlier. Every point sees the
    /// same elapsed time.
    #[default]
    Anchored,
    /// Every point of `i + j = n` on the square `{0..n}²`, mapped to the axis
    /// point where its geodesic enters the boundary.
    AxisRoots,
}

impl Geometry {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Anchored => "anchored",
            Self::AxisRoots => "axis-roots",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "anchored" => Some(Self::Anchored),
            "axis-roots" => Some(Self::AxisRoots),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LppConfig {
    /// Elapsed time between the terminal and anchor anti-diagonals.
    pub n: usize,
    /// Terminal half-width for [`Geometry::Anchored`]; `None` means `20·round(n^{2/3})`.
    pub k: Option<usize>,
    pub geometry: Geometry,
    pub boundary: Boundary,
    pub seed: u64,
}

impl LppConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        Self { n, k: None, geometry: Geometry::default(), boundary: Boundary::default(), seed }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_geometry(mut self, geometry: Geometry) -> Self {
        self.geometry = geometry;
        self
    }

    pub fn with_half_width(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn validate(&self) -> Result<(), LppError> {
        if self.n == 0 {
            return Err(LppError::ZeroHorizon);
        }
        if self.k == Some(0) && self.geometry == Geometry::Anchored {
            return Err(LppError::ZeroHalfWidth);
        }
        match self.boundary {
            Boundary::Stationary { rho } if !(rho > 0.0 && rho < 1.0) => Err(LppError::InvalidDensity(rho)),
            _ => Ok(()),
        }
    }

    pub fn half_width(&self) -> usize {
        self.k.unwrap_or_else(|| default_half_width(self.n).max(1))
    }

    /// Anti-diagonal on which anchored geodesics are read. It clears the
    /// terminal window by `4·round(n^{2/3})` on each side so that geodesics
    /// reach it before meeting an axis, and has the parity that centres the
    /// window on `x = 0`. Zero for [`Geometry::AxisRoots`].
    pub fn anchor_time(&self) -> usize {
        match self.geometry {
            Geometry::AxisRoots => 0,
            Geometry::Anchored => {
                let margin = 4 * (default_half_width(self.n) / 20).max(1);
                let s = 2 * self.half_width() + margin;
                s + (s + self.n) % 2
            }
        }
    }

    /// Anti-diagonal `i + j` holding the terminal points.
    pub fn terminal_time(&self) -> usize {
        self.anchor_time() + self.n
    }

    /// Rows `i` of the followed terminal points `(i, terminal_time − i)`.
    pub fn terminal_window(&self) -> RangeInclusive<usize> {
        let t = self.terminal_time();
        match self.geometry {
            Geometry::AxisRoots => 0..=t,
            Geometry::Anchored => {
                let k = self.half_width();
                t / 2 - k..=t / 2 + k
            }
        }
    }

    /// Length of lattice row `i`. Anchored lattices stop at the terminal
    /// anti-diagonal; axis-root lattices are square.
    fn row_len(&self, i: usize) -> usize {
        match self.geometry {
            Geometry::AxisRoots => self.n + 1,
            Geometry::Anchored => self.terminal_time() - i + 1,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Draws the weight at `(i, j)`. Callers visit points in row-major order so
/// that every route over the same stream sees the same lattice.
fn draw_weight<R: Rng + ?Sized>(boundary: Boundary, i: usize, j: usize, rng: &mut R) -> f64 {
    let e: f64 = rng.sample(Exp1);
    match boundary {
        Boundary::None => e,
        Boundary::Stationary { rho } => match (i, j) {
            (0, 0) => 0.0,
            (0, _) => e / (1.0 - rho),
            (_, 0) => e / rho,
            _ => e,
        },
    }
}

/// Square lattice of weights, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    side: usize,
    values: Vec<f64>,
}

impl Weights {
    /// `rows[i][j]` is the weight at `(i, j)`. Rows must form a square.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let side = rows.len();
        assert!(rows.iter().all(|r| r.len() == side), "weights must be square");
        Self { side, values: rows.concat() }
    }

    /// Draws the lattice of `cfg` row by row. Cells past the terminal
    /// anti-diagonal of an anchored lattice are not drawn and hold 0.
    pub fn sample<R: Rng + ?Sized>(cfg: &LppConfig, rng: &mut R) -> Self {
        let side = cfg.terminal_time() + 1;
        let mut values = vec![0.0; side * side];
        for i in 0..side {
            for j in 0..cfg.row_len(i) {
                values[i * side + j] = draw_weight(cfg.boundary, i, j, rng);
            }
        }
        Self { side, values }
    }

    /// Largest index `n`; the lattice is `(n+1) × (n+1)`.
    pub fn horizon(&self) -> usize {
        self.side - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.side + j]
    }
}

/// Last-passage times to every lattice point.
#[derive(Debug, Clone, PartialEq)]
pub struct PassageField {
    side: usize,
    g: Vec<f64>,
}

impl PassageField {
    pub fn from_weights(w: &Weights) -> Self {
        let side = w.side;
        let mut g = vec![0.0f64; side * side];
        for i in 0..side {
            for j in 0..side {
                let best = match (i, j) {
                    (0, 0) => 0.0,
                    (0, _) => g[j - 1],
                    (_, 0) => g[(i - 1) * side],
                    _ => g[(i - 1) * side + j].max(g[i * side + j - 1]),
                };
                g[i * side + j] = w.get(i, j) + best;
            }
        }
        Self { side, g }
    }

    pub fn horizon(&self) -> usize {
        self.side - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.side + j]
    }
}

/// Samples weights for `cfg` and fills the passage-time field.
pub fn fill_passage<R: Rng + ?Sized>(cfg: &LppConfig, rng: &mut R) -> PassageField {
    PassageField::from_weights(&Weights::sample(cfg, rng))
}

/// Predecessor of an interior point on its geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parent {
    /// `(i − 1, j)`
    Up,
    /// `(i, j − 1)`; wins ties.
    Left,
}

fn choose_parent(from_up: f64, from_left: f64) -> Parent {
    if from_up > from_left {
        Parent::Up
    } else {
        Parent::Left
    }
}

/// Rotated spatial coordinate of a lattice point.
pub fn rotated_x(i: usize, j: usize) -> i64 {
    i as i64 - j as i64
}

/// Backtracking pointers plus the root of every terminal point.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicForest {
    side: usize,
    /// One bit per lattice point; set means [`Parent::Up`]. Meaningless on axes.
    up_bits: Vec<u64>,
    /// Root of the terminal point `(i, n − i)`, indexed by `i`.
    roots: Vec<(usize, usize)>,
}

impl GeodesicForest {
    pub fn horizon(&self) -> usize {
        self.side - 1
    }

    /// `None` on the axes, where geodesics end.
    pub fn parent(&self, i: usize, j: usize) -> Option<Parent> {
        if i == 0 || j == 0 {
            return None;
        }
        let bit = i * self.side + j;
        Some(if self.up_bits[bit / 64] >> (bit % 64) & 1 == 1 { Parent::Up } else { Parent::Left })
    }

    /// Roots of the terminal anti-diagonal, ordered by increasing `i`.
    pub fn roots(&self) -> &[(usize, usize)] {
        &self.roots
    }

    /// Backtracked path from `(i, j)` down to its root, inclusive.
    pub fn path(&self, mut i: usize, mut j: usize) -> Vec<(usize, usize)> {
        let mut out = vec![(i, j)];
        while let Some(p) = self.parent(i, j) {
            match p {
                Parent::Up => i -= 1,
                Parent::Left => j -= 1,
            }
            out.push((i, j));
        }
        out
    }
}

/// Records argmax parents for every interior point and follows them from each
/// point of the anti-diagonal `i + j = n` to an axis.
pub fn backtrack_forest(field: &PassageField) -> GeodesicForest {
    let side = field.side;
    let mut up_bits = vec![0u64; (side * side).div_ceil(64)];
    for i in 1..side {
        for j in 1..side {
            if choose_parent(field.get(i - 1, j), field.get(i, j - 1)) == Parent::Up {
                let bit = i * side + j;
                up_bits[bit / 64] |= 1 << (bit % 64);
            }
        }
    }
    let mut forest = GeodesicForest { side, up_bits, roots: Vec::with_capacity(side) };
    let n = side - 1;
    forest.roots = (0..=n).map(|i| *forest.path(i, n - i).last().expect("path holds its start")).collect();
    forest
}

/// The map of [`lpp_monotone_map`] recomputed by walking `forest`, which must
/// come from the lattice of `cfg`.
pub fn forest_map(forest: &GeodesicForest, cfg: &LppConfig) -> MonotoneMap {
    let t = cfg.terminal_time();
    assert_eq!(forest.horizon(), t, "forest does not match the configuration");
    let entries = cfg
        .terminal_window()
        .filter_map(|i| {
            let path = forest.path(i, t - i);
            let end = match cfg.geometry {
                Geometry::AxisRoots => path.last().copied(),
                Geometry::Anchored => path.into_iter().find(|&(a, b)| a + b == cfg.anchor_time()),
            }?;
            Some((rotated_x(i, t - i) as f64, rotated_x(end.0, end.1) as f64))
        })
        .collect();
    MonotoneMap::new(entries).expect("planar geodesics give a monotone map")
}

const NO_ANCHOR: i64 = i64::MIN;

/// Samples a lattice and returns the map from the followed terminal points to
/// their geodesics' positions, both as `x = i − j`.
///
/// Streams row by row, keeping one row of passage times and one row of
/// inherited positions, so memory is linear in the lattice side. Draws the
/// same weights as [`Weights::sample`] and agrees with [`forest_map`].
/// Anchored terminal points whose geodesic meets an axis before the anchor
/// line are left out; they can only sit at the ends of the window.
pub fn lpp_monotone_map<R: Rng + ?Sized>(cfg: &LppConfig, rng: &mut R) -> Result<MonotoneMap, LppError> {
    cfg.validate()?;
    let t_end = cfg.terminal_time();
    let s = cfg.anchor_time();
    let window = cfg.terminal_window();
    let width = cfg.row_len(0);
    let mut g = vec![0.0f64; width];
    let mut pos = vec![NO_ANCHOR; width];
    let mut entries = Vec::with_capacity(window.end() - window.start() + 1);

    for i in 0..=t_end {
        for j in 0..cfg.row_len(i) {
            let w = draw_weight(cfg.boundary, i, j, rng);
            let on_axis = i == 0 || j == 0;
            let inherited = if on_axis {
                g[j] = w + match (i, j) {
                    (0, 0) => 0.0,
                    (0, _) => g[j - 1],
                    _ => g[0],
                };
                NO_ANCHOR
            } else {
                // g[j] still holds row i−1; g[j−1] already holds row i
                let (up, left) = (g[j], g[j - 1]);
                match choose_parent(up, left) {
                    Parent::Up => {
                        g[j] = w + up;
                        pos[j]
                    }
                    Parent::Left => {
                        g[j] = w + left;
                        pos[j - 1]
                    }
                }
            };
            let x = rotated_x(i, j);
            pos[j] = match cfg.geometry {
                Geometry::AxisRoots if on_axis => x,
                Geometry::AxisRoots => inherited,
                Geometry::Anchored if i + j == s => x,
                Geometry::Anchored if i + j < s => NO_ANCHOR,
                Geometry::Anchored => inherited,
            };
            if i + j == t_end && window.contains(&i) && pos[j] != NO_ANCHOR {
                entries.push((x as f64, pos[j] as f64));
            }
        }
    }
    Ok(MonotoneMap::new(entries).expect("planar geodesics give a monotone map"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square(n: usize, seed: u64) -> LppConfig {
        LppConfig::new(n, seed).with_geometry(Geometry::AxisRoots)
    }

    /// Maximum weight over every up-right path from the corner to `(i, j)`.
    fn brute_force_best(w: &Weights, i: usize, j: usize) -> f64 {
        fn walk(w: &Weights, i: usize, j: usize, ti: usize, tj: usize, acc: f64, best: &mut f64) {
            let acc = acc + w.get(i, j);
            if i == ti && j == tj {
                *best = best.max(acc);
                return;
            }
            if i < ti {
                walk(w, i + 1, j, ti, tj, acc, best);
            }
            if j < tj {
                walk(w, i, j + 1, ti, tj, acc, best);
            }
        }
        let mut best = f64::NEG_INFINITY;
        walk(w, 0, 0, i, j, 0.0, &mut best);
        best
    }

    #[test]
    fn single_site() {
        let w = Weights::from_rows(&[vec![2.5]]);
        assert_eq!(PassageField::from_weights(&w).get(0, 0), 2.5);
    }

    #[test]
    fn two_by_two() {
        let w = Weights::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let g = PassageField::from_weights(&w);
        assert_eq!(g.get(1, 1), 8.0);
        assert_eq!(brute_force_best(&w, 1, 1), 8.0);
        let forest = backtrack_forest(&g);
        assert_eq!(forest.path(1, 1), vec![(1, 1), (1, 0)]);
        // terminal anti-diagonal i + j = 1 consists of axis points only
        assert_eq!(forest.roots(), &[(0, 1), (1, 0)]);
    }

    #[test]
    fn ties_prefer_left_parent() {
        let w = Weights::from_rows(&[vec![0.0, 1.0], vec![1.0, 1.0]]);
        let forest = backtrack_forest(&PassageField::from_weights(&w));
        assert_eq!(forest.parent(1, 1), Some(Parent::Left));
    }

    #[test]
    fn dp_matches_enumeration_5x5() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let cfg = square(4, 0).with_boundary(Boundary::None);
            let w = Weights::sample(&cfg, &mut rng);
            let g = PassageField::from_weights(&w);
            assert_eq!(g.get(4, 4), brute_force_best(&w, 4, 4));
        }
    }

    #[test]
    fn stationary_corner_and_axes() {
        let cfg = square(200, 1).with_boundary(Boundary::Stationary { rho: 0.25 });
        let w = Weights::sample(&cfg, &mut cfg.rng());
        assert_eq!(w.get(0, 0), 0.0);
        let mean = |f: &dyn Fn(usize) -> f64| (1..=200).map(f).sum::<f64>() / 200.0;
        // Exp(0.75) on i = 0 (mean 4/3), Exp(0.25) on j = 0 (mean 4)
        assert!((mean(&|j| w.get(0, j)) - 4.0 / 3.0).abs() < 0.4);
        assert!((mean(&|i| w.get(i, 0)) - 4.0).abs() < 1.2);
    }

    #[test]
    fn config_validation() {
        assert_eq!(LppConfig::new(0, 0).validate(), Err(LppError::ZeroHorizon));
        let bad = LppConfig::new(4, 0).with_boundary(Boundary::Stationary { rho: 1.0 });
        assert_eq!(bad.validate(), Err(LppError::InvalidDensity(1.0)));
    }

    #[test]
    fn horizon_one() {
        let cfg = square(1, 5);
        let map = lpp_monotone_map(&cfg, &mut cfg.rng()).unwrap();
        assert_eq!(map.entries(), &[(-1.0, -1.0), (1.0, 1.0)]);
    }

    #[test]
    fn roots_lie_on_axes_and_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for rep in 0..100 {
            let boundary = if rep % 2 == 0 { Boundary::None } else { Boundary::default() };
            let cfg = square(32, 0).with_boundary(boundary);
            let forest = backtrack_forest(&fill_passage(&cfg, &mut rng));
            for &(i, j) in forest.roots() {
                assert!(i == 0 || j == 0);
            }
            let xs: Vec<i64> = forest.roots().iter().map(|&(i, j)| rotated_x(i, j)).collect();
            for a in 0..xs.len() {
                for b in a + 1..xs.len() {
                    assert!(xs[a] <= xs[b]);
                }
            }
        }
    }

    #[test]
    fn streaming_matches_forest() {
        for (seed, boundary) in [(1, Boundary::None), (2, Boundary::default()), (3, Boundary::Stationary { rho: 0.3 })]
        {
            for cfg in [square(60, seed), LppConfig::new(16, seed).with_half_width(12)] {
                let cfg = cfg.with_boundary(boundary);
                let streamed = lpp_monotone_map(&cfg, &mut cfg.rng()).unwrap();
                let forest = backtrack_forest(&fill_passage(&cfg, &mut cfg.rng()));
                assert_eq!(streamed, forest_map(&forest, &cfg));
            }
        }
    }

    #[test]
    fn anchored_layout() {
        let cfg = LppConfig::new(64, 0);
        assert_eq!(cfg.half_width(), 320);
        assert_eq!(cfg.anchor_time(), 640 + 64);
        assert_eq!(cfg.terminal_time(), 640 + 64 + 64);
        assert_eq!(cfg.terminal_window(), 384 - 320..=384 + 320);
        let odd = LppConfig::new(5, 0).with_half_width(3);
        // margin 4·round(5^{2/3}) = 12, plus one for parity
        assert_eq!(odd.anchor_time(), 6 + 12 + 1);
        assert_eq!(odd.terminal_time() % 2, 0);
        assert_eq!(LppConfig::new(4, 0).with_half_width(0).validate(), Err(LppError::ZeroHalfWidth));
    }

    #[test]
    fn anchored_draws_stop_at_terminal_line() {
        let cfg = LppConfig::new(3, 9).with_half_width(2).with_boundary(Boundary::None);
        let w = Weights::sample(&cfg, &mut cfg.rng());
        let t = cfg.terminal_time();
        assert_eq!(w.horizon(), t);
        for i in 0..=t {
            for j in 0..=t {
                assert_eq!(w.get(i, j) > 0.0, i + j <= t, "({i}, {j})");
            }
        }
    }

    #[test]
    fn anchored_map_reads_the_anchor_line() {
        for seed in 0..20 {
            let cfg = LppConfig::new(32, seed);
            let map = lpp_monotone_map(&cfg, &mut cfg.rng()).unwrap();
            let s = cfg.anchor_time() as f64;
            let k = cfg.half_width() as f64;
            // the margin is wide enough that no geodesic is lost
            assert_eq!(map.entries().len(), 2 * cfg.half_width() + 1);
            for &(x, end) in map.entries() {
                assert!(x.abs() <= 2.0 * k && x % 2.0 == 0.0);
                assert!(end.abs() <= s && (end - s) % 2.0 == 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn dp_optimal_and_geodesics_consistent(seed in any::<u64>(), n in 1usize..6, stationary in any::<bool>()) {
            let boundary = if stationary { Boundary::default() } else { Boundary::None };
            let cfg = square(n, seed).with_boundary(boundary);
            let w = Weights::sample(&cfg, &mut cfg.rng());
            let g = PassageField::from_weights(&w);
            for i in 0..=n {
                for j in 0..=n {
                    prop_assert_eq!(g.get(i, j), brute_force_best(&w, i, j));
                    if i > 0 { prop_assert!(g.get(i, j) >= g.get(i - 1, j)); }
                    if j > 0 { prop_assert!(g.get(i, j) >= g.get(i, j - 1)); }
                }
            }
            let forest = backtrack_forest(&g);
            for i in 0..=n {
                let path = forest.path(i, n - i);
                let root = *path.last().unwrap();
                // below the root the geodesic runs straight along its axis from the corner
                let mut full: Vec<(usize, usize)> = if root.0 == 0 {
                    (0..root.1).map(|j| (0, j)).collect()
                } else {
                    (0..root.0).map(|i| (i, 0)).collect()
                };
                full.extend(path.iter().rev());
                // summed in the DP's order, so equality is exact
                let total = full.iter().fold(0.0, |acc, &(a, b)| w.get(a, b) + acc);
                prop_assert_eq!(total, g.get(i, n - i));
                for step in path.windows(2) {
                    let (a, b) = (step[0], step[1]);
                    prop_assert_eq!((a.0 - b.0) + (a.1 - b.1), 1);
                }
            }
        }
    }
}
