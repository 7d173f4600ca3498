//! Coalescing fractional Brownian motions started from the integers `−k..=k`.
//!
//! Particles advance synchronously one unit time step at a time. After each
//! step adjacent particles that touch or have crossed are merged according to
//! a [`CoalescenceRule`]. Particles are kept in start order, and because
//! coalescence on the line preserves order, each live particle owns a
//! contiguous block of start indices.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fgn::{FgnError, FgnPlan, HurstIndex};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoalesceError {
    #[error("Pólya index must be a nonnegative number or +inf, got {0}")]
    InvalidAlpha(f64),
    #[error("start half-width k must be at least 1")]
    ZeroHalfWidth,
    #[error("monotone map entries must have increasing starts and non-decreasing ends")]
    NotMonotone,
    #[error(transparent)]
    Fgn(#[from] FgnError),
}

/// What happens when two particles meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoalescenceRule {
    /// A fair coin picks the survivor, which keeps its own path.
    CoinFlip,
    /// Both die; a fresh independent fBM particle starts where they met.
    Regenerate,
    /// The left particle survives with probability `w₁^α / (w₁^α + w₂^α)`.
    /// `α = +∞` lets the strictly heavier particle win.
    PolyaUrn(f64),
}

impl CoalescenceRule {
    pub fn polya(alpha: f64) -> Result<Self, CoalesceError> {
        if alpha >= 0.0 {
            Ok(Self::PolyaUrn(alpha))
        } else {
            Err(CoalesceError::InvalidAlpha(alpha))
        }
    }

    fn validate(self) -> Result<(), CoalesceError> {
        match self {
            Self::PolyaUrn(alpha) if alpha.is_nan() || alpha < 0.0 => Err(CoalesceError::InvalidAlpha(alpha)),
            _ => Ok(()),
        }
    }

    /// Probability that the left particle of a colliding pair survives.
    /// `None` for [`CoalescenceRule::Regenerate`], where nobody survives.
    pub fn left_win_probability(self, left_weight: u64, right_weight: u64) -> Option<f64> {
        match self {
            Self::CoinFlip => Some(0.5),
            Self::Regenerate => None,
            Self::PolyaUrn(alpha) if alpha.is_infinite() => Some(match left_weight.cmp(&right_weight) {
                std::cmp::Ordering::Greater => 1.0,
                std::cmp::Ordering::Less => 0.0,
                std::cmp::Ordering::Equal => 0.5,
            }),
            Self::PolyaUrn(alpha) => {
                // w₁^α/(w₁^α + w₂^α) written as a ratio so large weights don't overflow.
                let ratio = (right_weight as f64 / left_weight as f64).powf(alpha);
                Some(1.0 / (1.0 + ratio))
            }
        }
    }
}

impl fmt::Display for CoalescenceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::CoinFlip => write!(f, "coin-flip"),
            Self::Regenerate => write!(f, "regenerate"),
            Self::PolyaUrn(alpha) if alpha.is_infinite() => write!(f, "polya(inf)"),
            Self::PolyaUrn(alpha) => write!(f, "polya({alpha})"),
        }
    }
}

/// Where a regenerated particle is placed relative to the colliding pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpawnPoint {
    #[default]
    Midpoint,
    Left,
    Right,
}

impl SpawnPoint {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Midpoint => "midpoint",
            Self::Left => "left",
            Self::Right => "right",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "midpoint" => Some(Self::Midpoint),
            "left" => Some(Self::Left),
            "right" => Some(Self::Right),
            _ => None,
        }
    }

    fn place(self, left: f64, right: f64) -> f64 {
        match self {
            Self::Midpoint => 0.5 * (left + right),
            Self::Left => left,
            Self::Right => right,
        }
    }
}

/// Start half-width used when none is given: `20 · round(n^{2/3})`.
pub fn default_half_width(n: usize) -> usize {
    20 * (n as f64).powf(2.0 / 3.0).round() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n: usize,
    pub hurst: HurstIndex,
    /// Starts are the integers `−k..=k`.
    pub k: usize,
    pub rule: CoalescenceRule,
    pub spawn: SpawnPoint,
    pub seed: u64,
}

impl SystemConfig {
    pub fn new(n: usize, hurst: HurstIndex, rule: CoalescenceRule, seed: u64) -> Self {
        Self { n, hurst, k: default_half_width(n).max(1), rule, spawn: SpawnPoint::default(), seed }
    }

    pub fn with_half_width(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_spawn(mut self, spawn: SpawnPoint) -> Self {
        self.spawn = spawn;
        self
    }

    pub fn validate(&self) -> Result<(), CoalesceError> {
        if self.k == 0 {
            return Err(CoalesceError::ZeroHalfWidth);
        }
        self.rule.validate()
    }

    pub fn particle_count(&self) -> usize {
        2 * self.k + 1
    }

    /// The random stream a replica with this config runs on.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Supplies increment sequences for new particles.
pub trait IncrementSource {
    fn draw<R: Rng + ?Sized>(&mut self, len: usize, rng: &mut R) -> Vec<f64>;
}

/// Exact fGN increments, with one plan per padded length.
#[derive(Debug, Clone)]
pub struct FbmSource {
    hurst: HurstIndex,
    plans: HashMap<usize, FgnPlan>,
}

impl FbmSource {
    pub fn new(hurst: HurstIndex) -> Self {
        Self { hurst, plans: HashMap::new() }
    }
}

impl IncrementSource for FbmSource {
    fn draw<R: Rng + ?Sized>(&mut self, len: usize, rng: &mut R) -> Vec<f64> {
        if len == 0 {
            return Vec::new();
        }
        let padded = len.next_power_of_two();
        let hurst = self.hurst;
        let plan = self.plans.entry(padded).or_insert_with(|| {
            FgnPlan::new(padded, hurst).expect("fGN circulant embedding is nonnegative for H in (0,1)")
        });
        let mut increments = plan.sample_fgn(rng);
        increments.truncate(len);
        increments
    }
}

/// Replays fixed increment sequences in order; a sequence shorter than the
/// requested length is padded with zeros. Once exhausted it yields zeros.
#[derive(Debug, Clone, Default)]
pub struct ScriptedSource {
    paths: VecDeque<Vec<f64>>,
}

impl ScriptedSource {
    pub fn new<I: IntoIterator<Item = Vec<f64>>>(paths: I) -> Self {
        Self { paths: paths.into_iter().collect() }
    }
}

impl IncrementSource for ScriptedSource {
    fn draw<R: Rng + ?Sized>(&mut self, len: usize, _rng: &mut R) -> Vec<f64> {
        let mut path = self.paths.pop_front().unwrap_or_default();
        path.resize(len, 0.0);
        path
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub id: u64,
    /// First and last absorbed start index (into `0..2k+1`).
    pub origin: (usize, usize),
    pub weight: u64,
    pub increments: Vec<f64>,
    pub cursor: usize,
    pub pos: f64,
}

impl Particle {
    fn advance(&mut self) {
        self.pos += self.increments[self.cursor];
        self.cursor += 1;
    }
}

/// Start → final position map, sorted by start.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneMap {
    entries: Vec<(f64, f64)>,
}

impl MonotoneMap {
    /// Checks strictly increasing starts and non-decreasing ends.
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self, CoalesceError> {
        let ok = entries.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1);
        if ok {
            Ok(Self { entries })
        } else {
            Err(CoalesceError::NotMonotone)
        }
    }

    pub fn identity<I: IntoIterator<Item = f64>>(starts: I) -> Self {
        Self { entries: starts.into_iter().map(|s| (s, s)).collect() }
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn distinct_ends(&self) -> usize {
        if self.entries.is_empty() {
            return 0;
        }
        1 + self.entries.windows(2).filter(|w| w[0].1 != w[1].1).count()
    }
}

/// Final map plus the live-particle count after every step (`t = 0..=n`).
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub map: MonotoneMap,
    pub survivors: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ParticleSystem<S> {
    cfg: SystemConfig,
    source: S,
    particles: Vec<Particle>,
    time: usize,
    next_id: u64,
    survivors: Vec<usize>,
}

impl ParticleSystem<FbmSource> {
    pub fn new<R: Rng + ?Sized>(cfg: SystemConfig, rng: &mut R) -> Result<Self, CoalesceError> {
        let source = FbmSource::new(cfg.hurst);
        Self::with_source(cfg, source, rng)
    }
}

impl<S: IncrementSource> ParticleSystem<S> {
    /// Places `2k+1` unit-weight particles on `−k..=k`, each with its own
    /// full-length path drawn from `source` in left-to-right order.
    pub fn with_source<R: Rng + ?Sized>(cfg: SystemConfig, mut source: S, rng: &mut R) -> Result<Self, CoalesceError> {
        cfg.validate()?;
        let k = cfg.k as i64;
        let particles: Vec<Particle> = (0..cfg.particle_count())
            .map(|idx| Particle {
                id: idx as u64,
                origin: (idx, idx),
                weight: 1,
                increments: source.draw(cfg.n, rng),
                cursor: 0,
                pos: (idx as i64 - k) as f64,
            })
            .collect();
        let survivors = vec![particles.len()];
        let next_id = particles.len() as u64;
        Ok(Self { cfg, source, particles, time: 0, next_id, survivors })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn is_finished(&self) -> bool {
        self.time >= self.cfg.n
    }

    pub fn survivors(&self) -> &[usize] {
        &self.survivors
    }

    pub fn total_weight(&self) -> u64 {
        self.particles.iter().map(|p| p.weight).sum()
    }

    /// Advances every particle by one increment, then merges collisions.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        assert!(!self.is_finished(), "system already ran {} steps", self.cfg.n);
        for p in &mut self.particles {
            p.advance();
        }
        self.time += 1;
        self.resolve_collisions(rng);
        self.survivors.push(self.particles.len());
    }

    /// Left-to-right sweep merging adjacent pairs with `pos_left ≥ pos_right`.
    /// After a merge the sweep steps back one place, since the merged particle
    /// may now sit at or left of its left neighbour.
    pub fn resolve_collisions<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        loop {
            let mut i = 0;
            while i + 1 < self.particles.len() {
                if self.particles[i].pos >= self.particles[i + 1].pos {
                    let right = self.particles.remove(i + 1);
                    let left = std::mem::replace(&mut self.particles[i], placeholder());
                    self.particles[i] = self.merge(left, right, rng);
                    i = i.saturating_sub(1);
                } else {
                    i += 1;
                }
            }
            if self.particles.windows(2).all(|w| w[0].pos < w[1].pos) {
                break;
            }
        }
    }

    fn merge<R: Rng + ?Sized>(&mut self, left: Particle, right: Particle, rng: &mut R) -> Particle {
        let origin = (left.origin.0, right.origin.1);
        let weight = left.weight + right.weight;
        match self.cfg.rule.left_win_probability(left.weight, right.weight) {
            Some(p_left) => {
                let left_wins = rng.random::<f64>() < p_left;
                let winner = if left_wins { left } else { right };
                Particle { origin, weight, ..winner }
            }
            None => {
                let remaining = self.cfg.n - self.time;
                let id = self.next_id;
                self.next_id += 1;
                Particle {
                    id,
                    origin,
                    weight,
                    increments: self.source.draw(remaining, rng),
                    cursor: 0,
                    pos: self.cfg.spawn.place(left.pos, right.pos),
                }
            }
        }
    }

    /// Current start → position map.
    pub fn monotone_map(&self) -> MonotoneMap {
        let k = self.cfg.k as f64;
        let entries =
            self.particles.iter().flat_map(|p| (p.origin.0..=p.origin.1).map(move |s| (s as f64 - k, p.pos))).collect();
        MonotoneMap { entries }
    }

    pub fn run_to_end<R: Rng + ?Sized>(mut self, rng: &mut R) -> RunOutcome {
        while !self.is_finished() {
            self.step(rng);
        }
        RunOutcome { map: self.monotone_map(), survivors: self.survivors }
    }
}

fn placeholder() -> Particle {
    Particle { id: u64::MAX, origin: (0, 0), weight: 0, increments: Vec::new(), cursor: 0, pos: f64::NAN }
}

/// Runs `cfg.n` steps of the fBM system and returns the survivor curve as well.
pub fn simulate<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<RunOutcome, CoalesceError> {
    Ok(ParticleSystem::new(cfg.clone(), rng)?.run_to_end(rng))
}

/// Runs `cfg.n` steps and returns the start → end map.
pub fn run<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<MonotoneMap, CoalesceError> {
    simulate(cfg, rng).map(|o| o.map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(n: usize, k: usize, rule: CoalescenceRule) -> SystemConfig {
        SystemConfig::new(n, HurstIndex::kpz(), rule, 0).with_half_width(k)
    }

    fn scripted(cfg: SystemConfig, paths: Vec<Vec<f64>>) -> (ParticleSystem<ScriptedSource>, ChaCha8Rng) {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sys = ParticleSystem::with_source(cfg, ScriptedSource::new(paths), &mut rng).unwrap();
        (sys, rng)
    }

    #[test]
    fn default_half_width_formula() {
        assert_eq!(default_half_width(1024), 2040);
        assert_eq!(SystemConfig::new(1024, HurstIndex::kpz(), CoalescenceRule::CoinFlip, 0).particle_count(), 4081);
        assert_eq!(default_half_width(256), 800);
    }

    #[test]
    fn init_places_unit_weights_on_integers() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sys = ParticleSystem::new(cfg(4, 1, CoalescenceRule::CoinFlip), &mut rng).unwrap();
        let pos: Vec<f64> = sys.particles().iter().map(|p| p.pos).collect();
        assert_eq!(pos, vec![-1.0, 0.0, 1.0]);
        assert!(sys.particles().iter().all(|p| p.weight == 1 && p.cursor == 0 && p.increments.len() == 4));
    }

    #[test]
    fn invalid_configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            ParticleSystem::new(cfg(4, 0, CoalescenceRule::CoinFlip), &mut rng).unwrap_err(),
            CoalesceError::ZeroHalfWidth
        );
        assert!(CoalescenceRule::polya(-1.0).is_err());
        assert!(CoalescenceRule::polya(f64::NAN).is_err());
        assert!(CoalescenceRule::polya(f64::INFINITY).is_ok());
    }

    #[test]
    fn win_probabilities() {
        assert_eq!(CoalescenceRule::PolyaUrn(1.0).left_win_probability(1, 3), Some(0.25));
        assert_eq!(CoalescenceRule::PolyaUrn(0.0).left_win_probability(1, 30), Some(0.5));
        assert_eq!(CoalescenceRule::PolyaUrn(f64::INFINITY).left_win_probability(2, 5), Some(0.0));
        assert_eq!(CoalescenceRule::PolyaUrn(f64::INFINITY).left_win_probability(5, 2), Some(1.0));
        assert_eq!(CoalescenceRule::PolyaUrn(f64::INFINITY).left_win_probability(4, 4), Some(0.5));
        assert_eq!(CoalescenceRule::CoinFlip.left_win_probability(1, 9), Some(0.5));
        assert_eq!(CoalescenceRule::Regenerate.left_win_probability(1, 1), None);
        // huge exponents must not produce NaN
        let p = CoalescenceRule::PolyaUrn(1e6).left_win_probability(1000, 999).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn polya_left_win_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trials = 40_000;
        let mut left = 0;
        for _ in 0..trials {
            let (mut sys, _) =
                scripted(cfg(1, 1, CoalescenceRule::PolyaUrn(1.0)), vec![vec![0.0], vec![0.0], vec![0.0]]);
            sys.particles[0].weight = 1;
            sys.particles[1].weight = 3;
            sys.particles.truncate(2);
            sys.particles[1].pos = sys.particles[0].pos;
            sys.resolve_collisions(&mut rng);
            if sys.particles[0].id == 0 {
                left += 1;
            }
        }
        let freq = left as f64 / trials as f64;
        assert!((freq - 0.25).abs() < 0.01, "{freq}");
    }

    #[test]
    fn single_particle_moves_freely() {
        let (mut sys, mut rng) =
            scripted(cfg(2, 1, CoalescenceRule::CoinFlip), vec![vec![-0.25, 0.5], vec![0.1, 0.1], vec![0.3, -0.2]]);
        sys.step(&mut rng);
        let pos: Vec<f64> = sys.particles().iter().map(|p| p.pos).collect();
        assert_eq!(pos, vec![-1.25, 0.1, 1.3]);
        assert_eq!(sys.particles().len(), 3);
    }

    #[test]
    fn crossing_pair_merges() {
        for rule in [CoalescenceRule::CoinFlip, CoalescenceRule::PolyaUrn(1.0)] {
            // particle 1 jumps past particle 2; particle 0 stays out of reach
            let (mut sys, mut rng) = scripted(cfg(1, 1, rule), vec![vec![-5.0], vec![1.5], vec![0.0]]);
            sys.step(&mut rng);
            assert_eq!(sys.particles().len(), 2);
            assert_eq!(sys.particles()[1].weight, 2);
            assert_eq!(sys.particles()[1].origin, (1, 2));
            assert!([1.5, 1.0].contains(&sys.particles()[1].pos));
        }
    }

    #[test]
    fn triple_crossing_merges_to_one() {
        // -1 → 3, 0 → 1, 1 → -2: every adjacent pair is inverted
        for rule in [CoalescenceRule::CoinFlip, CoalescenceRule::Regenerate, CoalescenceRule::PolyaUrn(f64::INFINITY)] {
            let (mut sys, mut rng) = scripted(cfg(1, 1, rule), vec![vec![4.0], vec![1.0], vec![-3.0]]);
            sys.step(&mut rng);
            assert_eq!(sys.particles().len(), 1);
            assert_eq!(sys.particles()[0].weight, 3);
            assert_eq!(sys.particles()[0].origin, (0, 2));
        }
    }

    #[test]
    fn touching_counts_as_collision() {
        let (mut sys, mut rng) = scripted(cfg(1, 1, CoalescenceRule::CoinFlip), vec![vec![0.0], vec![0.5], vec![-0.5]]);
        sys.step(&mut rng);
        assert_eq!(sys.particles().len(), 2);
    }

    #[test]
    fn regenerate_spawns_fresh_path_at_midpoint() {
        // n = 3; particles 1 and 2 cross at step 1; the fourth scripted path is the regenerated one
        let paths = vec![vec![-9.0, 0.0, 0.0], vec![2.0, 0.0, 0.0], vec![-0.5, 0.0, 0.0], vec![7.0, 0.25]];
        let (mut sys, mut rng) = scripted(cfg(3, 1, CoalescenceRule::Regenerate), paths);
        sys.step(&mut rng);
        let merged = &sys.particles()[1];
        assert_eq!(merged.pos, 0.5 * (2.0 + 0.5));
        assert_eq!(merged.increments, vec![7.0, 0.25]);
        assert_eq!(merged.weight, 2);
        assert_eq!(merged.id, 3);
        sys.step(&mut rng);
        sys.step(&mut rng);
        assert_eq!(sys.particles()[1].pos, 1.25 + 7.25);
        assert!(sys.is_finished());
    }

    #[test]
    fn spawn_conventions() {
        for (spawn, expected) in [(SpawnPoint::Left, 2.0), (SpawnPoint::Right, 0.5)] {
            let paths = vec![vec![-9.0], vec![2.0], vec![-0.5]];
            let (mut sys, mut rng) = scripted(cfg(1, 1, CoalescenceRule::Regenerate).with_spawn(spawn), paths);
            sys.step(&mut rng);
            assert_eq!(sys.particles()[1].pos, expected);
            assert!(sys.particles()[1].increments.is_empty());
        }
    }

    #[test]
    fn winner_keeps_its_path() {
        let paths = vec![vec![-9.0, 0.0], vec![2.0, 10.0], vec![-0.5, 20.0]];
        let (mut sys, mut rng) = scripted(cfg(2, 1, CoalescenceRule::CoinFlip), paths);
        sys.step(&mut rng);
        let before = sys.particles()[1].clone();
        sys.step(&mut rng);
        let after = &sys.particles()[1];
        let expected_step = if before.id == 1 { 10.0 } else { 20.0 };
        assert_eq!(after.pos, before.pos + expected_step);
        assert_eq!(after.cursor, 2);
    }

    #[test]
    fn zero_steps_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let map = run(&cfg(0, 3, CoalescenceRule::CoinFlip), &mut rng).unwrap();
        assert_eq!(map, MonotoneMap::identity((-3..=3).map(f64::from)));
    }

    #[test]
    fn no_collisions_gives_displacement_map() {
        let paths = vec![vec![0.1, 0.1], vec![0.2, 0.2], vec![0.3, 0.3]];
        let (sys, mut rng) = scripted(cfg(2, 1, CoalescenceRule::CoinFlip), paths);
        let out = sys.run_to_end(&mut rng);
        assert_eq!(out.map.distinct_ends(), 3);
        let ends: Vec<f64> = out.map.entries().iter().map(|e| e.1).collect();
        assert!((ends[0] + 0.8).abs() < 1e-12 && (ends[1] - 0.4).abs() < 1e-12 && (ends[2] - 1.6).abs() < 1e-12);
        assert_eq!(out.survivors, vec![3, 3, 3]);
    }

    #[test]
    fn monotone_map_validation() {
        assert!(MonotoneMap::new(vec![(0.0, 1.0), (1.0, 1.0), (2.0, 3.0)]).is_ok());
        assert_eq!(MonotoneMap::new(vec![(0.0, 1.0), (1.0, 0.5)]).unwrap_err(), CoalesceError::NotMonotone);
        assert_eq!(MonotoneMap::new(vec![(0.0, 1.0), (0.0, 2.0)]).unwrap_err(), CoalesceError::NotMonotone);
    }

    #[test]
    fn deterministic_runs() {
        for rule in [CoalescenceRule::CoinFlip, CoalescenceRule::Regenerate, CoalescenceRule::PolyaUrn(2.0)] {
            let c = SystemConfig::new(64, HurstIndex::kpz(), rule, 99);
            let a = simulate(&c, &mut c.rng()).unwrap();
            let b = simulate(&c, &mut c.rng()).unwrap();
            assert_eq!(a, b);
        }
    }

    fn rule_strategy() -> impl Strategy<Value = CoalescenceRule> {
        prop_oneof![
            Just(CoalescenceRule::CoinFlip),
            Just(CoalescenceRule::Regenerate),
            (0.0f64..5.0).prop_map(CoalescenceRule::PolyaUrn),
            Just(CoalescenceRule::PolyaUrn(f64::INFINITY)),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn mass_and_order_preserved(seed in any::<u64>(), rule in rule_strategy(), n in 1usize..40, k in 1usize..30, h in 0.2f64..0.9) {
            let c = SystemConfig::new(n, HurstIndex::new(h).unwrap(), rule, seed).with_half_width(k);
            let mut rng = c.rng();
            let mut sys = ParticleSystem::new(c.clone(), &mut rng).unwrap();
            while !sys.is_finished() {
                sys.step(&mut rng);
                prop_assert_eq!(sys.total_weight(), c.particle_count() as u64);
                let ps = sys.particles();
                prop_assert_eq!(ps[0].origin.0, 0);
                prop_assert_eq!(ps[ps.len() - 1].origin.1, 2 * k);
                for w in ps.windows(2) {
                    prop_assert!(w[0].pos < w[1].pos);
                    prop_assert_eq!(w[0].origin.1 + 1, w[1].origin.0);
                }
                for p in ps {
                    prop_assert_eq!(p.weight as usize, p.origin.1 - p.origin.0 + 1);
                }
            }
            let map = sys.monotone_map();
            prop_assert!(MonotoneMap::new(map.entries().to_vec()).is_ok());
            prop_assert_eq!(map.distinct_ends(), sys.particles().len());
            prop_assert_eq!(map.len(), c.particle_count());
        }
    }
}
