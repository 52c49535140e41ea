//! Sample-path generation: Brownian motion on `[0,1]`, the moving-window
//! process `W_t = (B_t - B_{t-p})/sqrt(p)` on `[p,1]`, and an exact
//! covariance-factorization sampler kept alongside as a cross-check.
//!
//! Reproducibility contract: a path is a pure function of
//! `(grid, seed, stream id)`. Concurrent workers use disjoint stream ids,
//! so results never depend on the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, SlepianError};
use crate::grid::{SampledPath, Support, TimeGrid};
use crate::oracle::CovMatrix;

/// A counter-based random stream: `(seed, stream_id)` fully determines the
/// output, independent of any other stream in flight.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Instantiates the generator for this stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Standard Brownian path on `[0,1]`: `b(0) = 0`, independent centered
/// Gaussian increments with variance `step` over each cell.
pub fn bm_path(grid: TimeGrid, stream: RngStream) -> SampledPath {
    let mut rng = stream.rng();
    let sd = grid.step().sqrt();
    let mut nodes = Vec::with_capacity(grid.m() + 1);
    let mut acc = 0.0;
    nodes.push(0.0);
    for _ in 0..grid.m() {
        let z: f64 = StandardNormal.sample(&mut rng);
        acc += sd * z;
        nodes.push(acc);
    }
    SampledPath::new(grid, Support::Unit, nodes).expect("length by construction")
}

/// The scaled lag difference `w(t) = (b(t) - b(t-p))/sqrt(p)` on `[p,1]`.
pub fn slepian_from_bm(b: &SampledPath) -> Result<SampledPath> {
    let diff = b.lag_difference()?;
    let scale = 1.0 / b.grid().p().sqrt();
    let values = diff.values().iter().map(|v| v * scale).collect();
    SampledPath::new(*b.grid(), Support::Window, values)
}

/// Stationary covariance of the window process: `C(s,t) = (1 - (t-s)/p)^+`
/// for `p <= s <= t <= 1`.
pub fn slepian_cov(s: f64, t: f64, p: f64) -> Result<f64> {
    if !(s <= t && p - 1e-12 <= s && t <= 1.0 + 1e-12) || !(0.0 < p && p <= 1.0) {
        return Err(SlepianError::BadCovArgs { s, t, p });
    }
    Ok((1.0 - (t - s) / p).max(0.0))
}

/// Samples the window process exactly in distribution by factorizing the
/// node covariance matrix once and reusing it across paths.
#[derive(Debug)]
pub struct ExactSampler {
    cov: CovMatrix,
}

impl ExactSampler {
    pub fn new(grid: TimeGrid) -> Result<Self> {
        Ok(Self {
            cov: CovMatrix::new(grid)?,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        self.cov.grid()
    }

    pub fn sample(&self, stream: RngStream) -> SampledPath {
        let mut rng = stream.rng();
        let values = self.cov.sample_with(&mut rng);
        SampledPath::new(*self.cov.grid(), Support::Window, values)
            .expect("length by construction")
    }
}

/// One-off exact sample. Factorizes the covariance on every call; use
/// [`ExactSampler`] for batches.
pub fn exact_gaussian_slepian(grid: TimeGrid, stream: RngStream) -> Result<SampledPath> {
    Ok(ExactSampler::new(grid)?.sample(stream))
}

/// Which path generator to use for Monte Carlo.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerKind {
    /// Differenced Brownian increments (default).
    Diff,
    /// Covariance factorization.
    Exact,
}

impl std::str::FromStr for SamplerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "diff" => Ok(SamplerKind::Diff),
            "exact" => Ok(SamplerKind::Exact),
            other => Err(format!("unknown sampler '{other}', expected diff|exact")),
        }
    }
}

/// A ready-to-run path sampler for a fixed grid.
#[derive(Debug)]
pub enum Sampler {
    Differenced(TimeGrid),
    ExactCovariance(ExactSampler),
}

impl Sampler {
    pub fn new(kind: SamplerKind, grid: TimeGrid) -> Result<Self> {
        match kind {
            SamplerKind::Diff => Ok(Sampler::Differenced(grid)),
            SamplerKind::Exact => Ok(Sampler::ExactCovariance(ExactSampler::new(grid)?)),
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        match self {
            Sampler::Differenced(grid) => grid,
            Sampler::ExactCovariance(s) => s.grid(),
        }
    }

    /// One window path for the given stream.
    pub fn sample(&self, stream: RngStream) -> SampledPath {
        match self {
            Sampler::Differenced(grid) => {
                slepian_from_bm(&bm_path(*grid, stream)).expect("grid-consistent by construction")
            }
            Sampler::ExactCovariance(s) => s.sample(stream),
        }
    }
}

/// A unit-lag moving-window path `X_u = B_u - B_{u-1}` on `[1,b]`, sampled
/// at nodes `1 + i/k`. The companion [`scale_slepian`] maps it onto the
/// window `[1/b, 1]` of the unit-interval grid.
#[derive(Clone, Debug)]
pub struct UnitLagPath {
    lag_steps: usize,
    values: Vec<f64>,
}

impl UnitLagPath {
    /// Wraps raw node values; `values[i] = X(1 + i/lag_steps)`.
    pub fn new(lag_steps: usize, values: Vec<f64>) -> Self {
        Self { lag_steps, values }
    }

    /// Right endpoint `b` of the time interval `[1,b]`.
    pub fn b(&self) -> f64 {
        1.0 + (self.values.len() - 1) as f64 / self.lag_steps as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Samples `X_u = B_u - B_{u-1}` at the nodes `1 + i/k` matching the
    /// window nodes of `grid` under `u = t * m/k`.
    pub fn sample(grid: TimeGrid, stream: RngStream) -> Self {
        let m = grid.m();
        let k = grid.lag_cells();
        let mut rng = stream.rng();
        let sd = (1.0 / k as f64).sqrt();
        // Brownian motion on [0, b] with m steps of width 1/k.
        let mut b = Vec::with_capacity(m + 1);
        let mut acc = 0.0;
        b.push(0.0);
        for _ in 0..m {
            let z: f64 = StandardNormal.sample(&mut rng);
            acc += sd * z;
            b.push(acc);
        }
        let values = (k..=m).map(|i| b[i] - b[i - k]).collect();
        Self {
            lag_steps: k,
            values,
        }
    }
}

/// Time-scales a unit-lag path on `[1,b]` into a normalized window path on
/// `[1/b, 1]`. Requires `b` in `(1,2]` so that `p = 1/b` lies in `[1/2, 1)`.
///
/// Compressing time by `b` shrinks the unit lag to `p = 1/b` and scales the
/// raw lag difference by `1/sqrt(b)`; the window process then multiplies by
/// `1/sqrt(p) = sqrt(b)`, so the node values carry over unchanged and the
/// output has unit variance and covariance `(1 - lag/p)^+`.
pub fn scale_slepian(x: &UnitLagPath) -> Result<SampledPath> {
    let b = x.b();
    let m = x.lag_steps + x.values.len() - 1;
    let p = x.lag_steps as f64 / m as f64;
    let grid = TimeGrid::new(m, p).map_err(|_| SlepianError::BadTimeScale { b })?;
    SampledPath::new(grid, Support::Window, x.values.clone())
}
