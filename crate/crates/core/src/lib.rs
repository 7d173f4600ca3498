//! Point fields of coalescing fractional Brownian motions (cfBM) and of
//! exponential last-passage percolation (LPP), and the gap statistics used to
//! compare them.
//!
//! The pipeline, one module per stage:
//!
//! 1. [`fgn`] draws exact fractional Gaussian noise by circulant embedding.
//! 2. [`coalesce`] runs particles started on `−k..=k` under a coalescence
//!    rule; [`lpp`] traces geodesics of the corner growth model back a fixed
//!    number of anti-diagonals. Both produce a [`MonotoneMap`].
//! 3. [`fields`] extracts the upper field (distinct ends) and lower field
//!    (basin boundaries), trims the edges and rescales by `n^{2/3}`.
//! 4. [`stats`] pools gaps into δ₀ and jump-k ratio samples and runs the
//!    two-sample Kolmogorov-Smirnov test.
//! 5. [`harness`] fans replicas out over threads, persists data banks and
//!    builds p-value tables.
//!
//! ```
//! use kpzpf::coalesce::{self, CoalescenceRule, SystemConfig};
//! use kpzpf::fgn::HurstIndex;
//! use kpzpf::fields::{upper_field, lower_field, LowerPlacement};
//!
//! let cfg = SystemConfig::new(64, HurstIndex::kpz(), CoalescenceRule::CoinFlip, 7);
//! let map = coalesce::run(&cfg, &mut cfg.rng()).unwrap();
//! let upper = upper_field(&map, cfg.n).unwrap();
//! let lower = lower_field(&map, cfg.n, LowerPlacement::Midpoint).unwrap();
//! assert_eq!(upper.len(), lower.len() + 1);
//! ```

pub mod coalesce;
pub mod fgn;
pub mod fields;
pub mod harness;
pub mod lpp;
pub mod stats;

pub use coalesce::MonotoneMap;
