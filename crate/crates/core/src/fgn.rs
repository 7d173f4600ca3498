//! Exact fractional Gaussian noise by circulant embedding (Davies-Harte).
//!
//! The autocovariance of unit-step fGN,
//!
//! ```text
//! γ(k) = ½ (|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H}),
//! ```
//!
//! is embedded as the first row of a symmetric circulant matrix of size `2m`,
//! where `m` is the requested length rounded up to a power of two. The
//! eigenvalues of that circulant are the DFT of its first row; for fGN with
//! `H ∈ (0, 1)` they are all nonnegative, so a Gaussian vector with exactly
//! the Toeplitz covariance `γ(|i − j|)` is obtained by colouring white noise
//! in the frequency domain and transforming back.
//!
//! An [`FgnPlan`] holds that spectrum for a fixed `(n, H)` and can be shared
//! across threads; every sampling call brings its own [`NormalSource`].

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

/// Negative eigenvalues above `-EIGEN_CLAMP` are floating-point noise and are
/// clamped to zero. Anything below is a hard error.
pub const EIGEN_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FgnError {
    #[error("Hurst index must lie in the open interval (0, 1), got {0}")]
    InvalidHurst(f64),
    #[error("fGN length must be at least 1")]
    EmptyPlan,
    #[error("circulant embedding has eigenvalue {value} at frequency {index}")]
    NonEmbeddable { index: usize, value: f64 },
}

/// Hurst index `H`, strictly between 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HurstIndex(f64);

impl HurstIndex {
    pub fn new(h: f64) -> Result<Self, FgnError> {
        if h > 0.0 && h < 1.0 {
            Ok(Self(h))
        } else {
            Err(FgnError::InvalidHurst(h))
        }
    }

    /// Brownian motion, `H = 1/2`.
    pub fn brownian() -> Self {
        Self(0.5)
    }

    /// `H = 2/3`, the KPZ transversal exponent.
    pub fn kpz() -> Self {
        Self(2.0 / 3.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for HurstIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Source of independent standard normal variates.
///
/// Every [`Rng`] is one. Tests substitute deterministic sources to force
/// particular increments.
pub trait NormalSource {
    fn next_normal(&mut self) -> f64;
}

impl<R: Rng + ?Sized> NormalSource for R {
    fn next_normal(&mut self) -> f64 {
        self.sample(StandardNormal)
    }
}

/// Autocovariance of unit-variance fGN at the given lag.
pub fn autocovariance(h: HurstIndex, lag: u64) -> f64 {
    if lag == 0 {
        return 1.0;
    }
    let two_h = 2.0 * h.value();
    let k = lag as f64;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).powf(two_h))
}

/// Precomputed circulant spectrum for sampling fGN of a fixed length.
#[derive(Clone)]
pub struct FgnPlan {
    n: usize,
    half: usize,
    hurst: HurstIndex,
    spectrum: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FgnPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FgnPlan")
            .field("n", &self.n)
            .field("embedding", &(2 * self.half))
            .field("hurst", &self.hurst)
            .finish_non_exhaustive()
    }
}

/// First row of the circulant embedding: `γ(0), …, γ(m), γ(m−1), …, γ(1)`.
pub fn circulant_row(h: HurstIndex, half: usize) -> Vec<f64> {
    let size = 2 * half;
    (0..size)
        .map(|j| {
            let lag = if j <= half { j } else { size - j };
            autocovariance(h, lag as u64)
        })
        .collect()
}

impl FgnPlan {
    /// Builds the plan for `n` samples. The embedding uses the next power of
    /// two at or above `n`; surplus samples are discarded.
    pub fn new(n: usize, h: HurstIndex) -> Result<Self, FgnError> {
        if n == 0 {
            return Err(FgnError::EmptyPlan);
        }
        let half = n.next_power_of_two();
        let size = 2 * half;
        let fft = FftPlanner::new().plan_fft_forward(size);

        let mut buf: Vec<Complex<f64>> = circulant_row(h, half).into_iter().map(|c| Complex::new(c, 0.0)).collect();
        fft.process(&mut buf);

        let mut spectrum = Vec::with_capacity(size);
        for (index, z) in buf.iter().enumerate() {
            debug_assert!(z.im.abs() < 1e-9 * size as f64, "imaginary residue {}", z.im);
            let value = z.re;
            if value < -EIGEN_CLAMP {
                return Err(FgnError::NonEmbeddable { index, value });
            }
            spectrum.push(value.max(0.0));
        }

        Ok(Self { n, half, hurst: h, spectrum, fft })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn hurst(&self) -> HurstIndex {
        self.hurst
    }

    /// Size of the circulant, `2m` with `m` the padded length.
    pub fn embedding_size(&self) -> usize {
        2 * self.half
    }

    /// Circulant eigenvalues, already clamped to be nonnegative.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// Draws one fGN vector of length `n`.
    pub fn sample_fgn<S: NormalSource + ?Sized>(&self, normals: &mut S) -> Vec<f64> {
        let mut out = self.sample_embedding(normals);
        out.truncate(self.n);
        out
    }

    /// Draws an fBM path of `n` steps starting at `start_pos`.
    pub fn sample_path<S: NormalSource + ?Sized>(&self, start_pos: f64, normals: &mut S) -> FbmPath {
        FbmPath::from_increments(start_pos, self.sample_fgn(normals))
    }

    /// Full padded sample of length `m`.
    fn sample_embedding<S: NormalSource + ?Sized>(&self, normals: &mut S) -> Vec<f64> {
        let half = self.half;
        let size = 2 * half;
        let scale = size as f64;
        let mut buf = vec![Complex::new(0.0, 0.0); size];

        buf[0] = Complex::new((self.spectrum[0] / scale).sqrt() * normals.next_normal(), 0.0);
        buf[half] = Complex::new((self.spectrum[half] / scale).sqrt() * normals.next_normal(), 0.0);
        for k in 1..half {
            let amp = (self.spectrum[k] / (2.0 * scale)).sqrt();
            let re = normals.next_normal();
            let im = normals.next_normal();
            let w = Complex::new(amp * re, amp * im);
            buf[k] = w;
            buf[size - k] = w.conj();
        }

        self.fft.process(&mut buf);
        buf[..half].iter().map(|z| z.re).collect()
    }
}

/// One fBM trajectory on the integer time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmPath {
    pub start_pos: f64,
    pub increments: Vec<f64>,
    pub positions: Vec<f64>,
}

impl FbmPath {
    pub fn from_increments(start_pos: f64, increments: Vec<f64>) -> Self {
        let mut positions = Vec::with_capacity(increments.len() + 1);
        let mut x = start_pos;
        positions.push(x);
        for dx in &increments {
            x += dx;
            positions.push(x);
        }
        Self { start_pos, increments, positions }
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    pub fn end(&self) -> f64 {
        *self.positions.last().expect("positions always holds the start")
    }
}
