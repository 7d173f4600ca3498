//! Replica orchestration: seeded parallel runs, data banks, p-value tables.

mod bank;
mod plot;
mod table;

pub use bank::{BankHeader, DataBank, ReplicaOutcome, BANK_FORMAT_VERSION};
pub use plot::{emit_plot_data, PlotKind, GAP_HISTOGRAM_BINS, GAP_HISTOGRAM_MAX};
pub use table::{compare, pooled_statistic, symmetry_table, FieldSelection, PValueTable, Statistic, TableCell};

use rayon::prelude::*;

use crate::coalesce::{self, CoalesceError, CoalescenceRule, SpawnPoint, SystemConfig};
use crate::fgn::HurstIndex;
use crate::fields::{self, FieldError, LowerPlacement, PointField, DEFAULT_TRIM};
use crate::lpp::{self, Boundary, Geometry, LppConfig, LppError};
use crate::stats::StatsError;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "KPZPF_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error("banks disagree on {0}")]
    ConventionMismatch(String),
    #[error("no banks given")]
    NoBanks,
    #[error("data bank line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

impl From<CoalesceError> for HarnessError {
    fn from(e: CoalesceError) -> Self {
        Self::InvalidSpec(e.to_string())
    }
}

impl From<LppError> for HarnessError {
    fn from(e: LppError) -> Self {
        Self::InvalidSpec(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    CfBm { rule: CoalescenceRule, hurst: HurstIndex, spawn: SpawnPoint },
    Lpp { boundary: Boundary, geometry: Geometry },
}

impl Model {
    pub fn cfbm(rule: CoalescenceRule, hurst: HurstIndex) -> Self {
        Self::CfBm { rule, hurst, spawn: SpawnPoint::default() }
    }

    pub fn lpp() -> Self {
        Self::Lpp { boundary: Boundary::default(), geometry: Geometry::default() }
    }

    /// Short name used in tables.
    pub fn label(&self) -> String {
        match self {
            Self::CfBm { rule, hurst, .. } if (hurst.value() - 2.0 / 3.0).abs() < 1e-12 => rule.to_string(),
            Self::CfBm { rule, hurst, .. } => format!("{rule} H={hurst}"),
            Self::Lpp { geometry: Geometry::Anchored, .. } => "lpp".to_string(),
            Self::Lpp { geometry, .. } => format!("lpp {}", geometry.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub model: Model,
    pub n: usize,
    /// Start half-width for cfBM, terminal half-width for anchored LPP;
    /// `None` means `20·round(n^{2/3})`.
    pub k: Option<usize>,
    pub replicas: usize,
    pub root_seed: u64,
    pub trim_per_end: usize,
    pub lower_placement: LowerPlacement,
}

impl ExperimentSpec {
    pub fn new(model: Model, n: usize, replicas: usize, root_seed: u64) -> Self {
        Self {
            model,
            n,
            k: None,
            replicas,
            root_seed,
            trim_per_end: DEFAULT_TRIM,
            lower_placement: LowerPlacement::default(),
        }
    }

    pub fn half_width(&self) -> Option<usize> {
        match self.model {
            Model::CfBm { .. } => Some(self.k.unwrap_or_else(|| coalesce::default_half_width(self.n).max(1))),
            Model::Lpp { geometry: Geometry::Anchored, .. } => Some(self.lpp_config(0).half_width()),
            Model::Lpp { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.replicas == 0 {
            return Err(HarnessError::InvalidSpec("replicas must be positive".into()));
        }
        if self.n == 0 {
            return Err(HarnessError::InvalidSpec("horizon n must be positive".into()));
        }
        match &self.model {
            Model::CfBm { .. } => self.system_config(0).validate()?,
            Model::Lpp { .. } => self.lpp_config(0).validate()?,
        }
        Ok(())
    }

    fn system_config(&self, seed: u64) -> SystemConfig {
        let Model::CfBm { rule, hurst, spawn } = self.model else { unreachable!("system_config on an LPP spec") };
        SystemConfig::new(self.n, hurst, rule, seed)
            .with_half_width(self.half_width().expect("cfBM has a half-width"))
            .with_spawn(spawn)
    }

    fn lpp_config(&self, seed: u64) -> LppConfig {
        let Model::Lpp { boundary, geometry } = self.model else { unreachable!("lpp_config on a cfBM spec") };
        let cfg = LppConfig::new(self.n, seed).with_boundary(boundary).with_geometry(geometry);
        match self.k {
            Some(k) => cfg.with_half_width(k),
            None => cfg,
        }
    }
}

/// SplitMix64 output function; a bijection on `u64`.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Seed of replica `r`: `splitmix64(root + γ·(r + 1))` with γ the odd
/// golden-ratio increment. Both steps are injective, so distinct replicas of
/// one root never share a seed.
pub fn derive_seed(root_seed: u64, replica: u64) -> u64 {
    splitmix64(root_seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(replica.wrapping_add(1))))
}

/// Worker count from [`THREADS_ENV`], else the available parallelism.
pub fn worker_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Survivor counts kept in a bank: `t = 0`, powers of two, and `t = n`.
fn survivor_samples(survivors: &[usize]) -> Vec<(usize, usize)> {
    let n = survivors.len() - 1;
    let mut times = vec![0];
    let mut t = 1;
    while t < n {
        times.push(t);
        t *= 2;
    }
    if n > 0 {
        times.push(n);
    }
    times.into_iter().map(|t| (t, survivors[t])).collect()
}

fn finish_field(field: Result<PointField, FieldError>, trim: usize) -> Result<Vec<f64>, FieldError> {
    Ok(field?.trim(trim)?.rescale()?.positions().to_vec())
}

fn run_replica(spec: &ExperimentSpec, replica: usize, seed: u64) -> ReplicaOutcome {
    let (map, survivors) = match spec.model {
        Model::CfBm { .. } => {
            let cfg = spec.system_config(seed);
            let out = coalesce::simulate(&cfg, &mut cfg.rng()).expect("spec validated before running");
            (out.map, Some(survivor_samples(&out.survivors)))
        }
        Model::Lpp { .. } => {
            let cfg = spec.lpp_config(seed);
            (lpp::lpp_monotone_map(&cfg, &mut cfg.rng()).expect("spec validated before running"), None)
        }
    };
    let upper = finish_field(fields::upper_field(&map, spec.n), spec.trim_per_end);
    let lower = finish_field(fields::lower_field(&map, spec.n, spec.lower_placement), spec.trim_per_end);
    match (upper, lower) {
        (Ok(upper), Ok(lower)) => ReplicaOutcome::Completed { replica, upper, lower, survivors },
        (Err(e), _) | (_, Err(e)) => ReplicaOutcome::Skipped { replica, reason: skip_reason(&e) },
    }
}

fn skip_reason(e: &FieldError) -> String {
    match e {
        FieldError::DegenerateMap => "degenerate-map".into(),
        FieldError::TooFewPoints { .. } => "too-few-points".into(),
        FieldError::AlreadyRescaled => "already-rescaled".into(),
    }
}

/// Runs every replica of `spec` on a pool of [`worker_threads`] workers.
/// Records come back in replica order whatever the completion order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<DataBank, HarnessError> {
    run_experiment_with_threads(spec, worker_threads())
}

pub fn run_experiment_with_threads(spec: &ExperimentSpec, threads: usize) -> Result<DataBank, HarnessError> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| HarnessError::InvalidSpec(format!("thread pool: {e}")))?;
    let records: Vec<ReplicaOutcome> = pool.install(|| {
        (0..spec.replicas)
            .into_par_iter()
            .map(|r| run_replica(spec, r, derive_seed(spec.root_seed, r as u64)))
            .collect()
    });
    Ok(DataBank::new(BankHeader::for_spec(spec), records))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
