//! Independent ground truth: finite-dimensional Gaussian quadratic forms and
//! likelihood ratios built from the covariance matrix alone, an
//! equality-constrained QP for the minimal-generator norm, and deterministic
//! Monte Carlo estimators.
//!
//! Nothing here reuses the closed-form norm or representer constants, so
//! agreement between the two routes is evidence, not tautology.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SlepianError};
use crate::grid::{SampledFunction, SampledPath, Support, TimeGrid};
use crate::rkhs::{KernelElement, SourceFunction, Variant};
use crate::simulate::{slepian_cov, RngStream, Sampler};

/// Paths per Monte Carlo block. Blocks are accumulated in index order, so
/// estimates are bitwise identical for any worker count.
const MC_BLOCK: usize = 4096;

/// Covariance matrix of the window process at the window nodes, with its
/// Cholesky factor. Immutable after construction; the factorization is
/// reused across paths and the inverse is never formed.
#[derive(Debug)]
pub struct CovMatrix {
    grid: TimeGrid,
    sigma: DMatrix<f64>,
    lower: DMatrix<f64>,
    upper: DMatrix<f64>,
}

impl CovMatrix {
    pub fn new(grid: TimeGrid) -> Result<Self> {
        let n = grid.window_node_count();
        let p = grid.p();
        let sigma = DMatrix::from_fn(n, n, |i, j| {
            let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
            slepian_cov(grid.window_node(lo), grid.window_node(hi), p)
                .expect("window nodes are ordered and inside [p,1]")
        });
        let chol = nalgebra::Cholesky::new(sigma.clone())
            .ok_or(SlepianError::NotPositiveDefinite)?;
        let lower = chol.unpack();
        let upper = lower.transpose();
        Ok(Self {
            grid,
            sigma,
            lower,
            upper,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    fn forward(&self, v: &[f64]) -> DVector<f64> {
        let rhs = DVector::from_column_slice(v);
        self.lower
            .solve_lower_triangular(&rhs)
            .expect("factor is nonsingular")
    }

    /// `h^T Sigma^-1 h` via one triangular solve.
    pub fn quad_form(&self, h: &[f64]) -> f64 {
        self.forward(h).norm_squared()
    }

    /// Exact log likelihood ratio of `N(h, Sigma)` against `N(0, Sigma)` at
    /// the node vector `w`: `h^T Sigma^-1 w - h^T Sigma^-1 h / 2`.
    pub fn log_lr(&self, h: &[f64], w: &[f64]) -> f64 {
        let yh = self.forward(h);
        let yw = self.forward(w);
        yh.dot(&yw) - 0.5 * yh.norm_squared()
    }

    /// `Sigma^-1 v` through both triangular solves.
    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        let y = self.forward(v);
        self.upper
            .solve_upper_triangular(&y)
            .expect("factor is nonsingular")
            .iter()
            .copied()
            .collect()
    }

    /// One exact Gaussian draw `L xi` with `xi` standard normal.
    pub fn sample_with<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.sigma.nrows();
        let xi = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
        (&self.lower * xi).iter().copied().collect()
    }
}

/// Samples a shift onto the window nodes of `grid`, which must carry the
/// same window length `p` (typically a dyadic refinement).
fn shift_on_grid(h: &KernelElement, grid: &TimeGrid) -> Result<Vec<f64>> {
    if h.grid() == grid {
        return Ok(h.node_values());
    }
    if !h.grid().same_lag(grid) {
        return Err(SlepianError::GridMismatch);
    }
    Ok((0..grid.window_node_count())
        .map(|i| h.value_at(grid.window_node(i)))
        .collect())
}

/// Finite-dimensional squared norm `h^T Sigma^-1 h` of a shift sampled at
/// the window nodes of `grid`. Nondecreasing under grid refinement and
/// equal to the kernel norm whenever the grid resolves `h`.
pub fn fd_norm_sq(h: &KernelElement, grid: &TimeGrid) -> Result<f64> {
    let cov = CovMatrix::new(*grid)?;
    Ok(cov.quad_form(&shift_on_grid(h, grid)?))
}

/// Finite-dimensional log likelihood ratio of the shifted against the base
/// node law, evaluated at `w`.
pub fn fd_log_lr(h: &KernelElement, w: &SampledPath, grid: &TimeGrid) -> Result<f64> {
    if w.grid() != grid {
        return Err(SlepianError::GridMismatch);
    }
    let cov = CovMatrix::new(*grid)?;
    Ok(cov.log_lr(&shift_on_grid(h, grid)?, w.values()))
}

/// Solution of the minimal-generator problem.
#[derive(Clone, Debug)]
pub struct QpSolution {
    /// Minimizer on `[0,1]`.
    pub g_star: SampledFunction,
    /// Its squared L² norm (the attained infimum).
    pub value: f64,
}

/// Minimizes `|g|^2_{L2[0,1]}` over generators with the prescribed integral
/// over `[0,p]` and the prescribed lag difference on every window cell.
///
/// Each window cell ties `g` to its lag-shifted cell, so the stationarity
/// conditions reduce to one scalar equation for the multiplier of the
/// integral constraint; this solves the discrete KKT system exactly.
pub fn qp_min_norm(f: &SourceFunction) -> Result<QpSolution> {
    let grid = *f.grid();
    let m = grid.m();
    let k = grid.lag_cells();
    let n1 = m - k;
    let n2 = 2 * k - m;
    let step = grid.step();
    let d = f.lag_diff().cells();

    let sum_d: f64 = d.iter().sum();
    // step * (n1/4 + n2/2) * lambda = s_f(p) + step * sum(d)/2
    let denom = step * (n1 as f64 / 4.0 + n2 as f64 / 2.0);
    if denom == 0.0 {
        return Err(SlepianError::SingularKkt);
    }
    let lambda = (f.sfp() + 0.5 * step * sum_d) / denom;

    let mut cells = vec![0.0; m];
    for j in 0..n1 {
        cells[j] = 0.25 * lambda - 0.5 * d[j];
    }
    for slot in &mut cells[n1..k] {
        *slot = 0.5 * lambda;
    }
    for j in k..m {
        cells[j] = cells[j - k] + d[j - k];
    }
    let g_star = SampledFunction::new(grid, Support::Unit, cells)?;
    let value = g_star.l2_norm_sq();
    Ok(QpSolution { g_star, value })
}

/// Same problem solved through the dense bordered KKT system
/// `[[2*step*I, A^T], [A, 0]]` with a generic LU factorization. Fallback
/// and cross-check for [`qp_min_norm`].
pub fn qp_min_norm_kkt(f: &SourceFunction) -> Result<QpSolution> {
    let grid = *f.grid();
    let m = grid.m();
    let k = grid.lag_cells();
    let n3 = m - k;
    let step = grid.step();
    let d = f.lag_diff().cells();

    let nc = 1 + n3;
    let dim = m + nc;
    let mut kkt = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);
    for j in 0..m {
        kkt[(j, j)] = 2.0 * step;
    }
    // integral constraint: step * sum(g[0..k]) = s_f(p)
    for j in 0..k {
        kkt[(m, j)] = step;
        kkt[(j, m)] = step;
    }
    rhs[m] = f.sfp();
    // lag-difference constraints: g[k+i] - g[i] = d[i]
    for i in 0..n3 {
        let row = m + 1 + i;
        kkt[(row, k + i)] = 1.0;
        kkt[(row, i)] = -1.0;
        kkt[(k + i, row)] = 1.0;
        kkt[(i, row)] = -1.0;
        rhs[row] = d[i];
    }

    let sol = kkt.lu().solve(&rhs).ok_or(SlepianError::SingularKkt)?;
    let cells: Vec<f64> = sol.iter().take(m).copied().collect();
    let g_star = SampledFunction::new(grid, Support::Unit, cells)?;
    let value = g_star.l2_norm_sq();
    Ok(QpSolution { g_star, value })
}

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
    pub seed: u64,
}

impl McEstimate {
    fn from_sums(sum: f64, sum_sq: f64, n: usize, seed: u64) -> Self {
        let mean = sum / n as f64;
        let var = ((sum_sq - n as f64 * mean * mean) / (n as f64 - 1.0)).max(0.0);
        Self {
            mean,
            std_error: (var / n as f64).sqrt(),
            n,
            seed,
        }
    }

    /// True when every sample hit the same value, e.g. a rare event that was
    /// never observed; the standard error is then uninformative.
    pub fn is_degenerate(&self) -> bool {
        self.n > 1 && self.std_error == 0.0
    }
}

/// Runs `per_path` over paths `0..n` in fixed-size blocks, possibly in
/// parallel, and merges block accumulators in index order. The result is a
/// pure function of the inputs, whatever the worker count.
pub(crate) fn accumulate_paths<A, F>(n: usize, init: impl Fn() -> A + Sync, per_path: F) -> A
where
    A: Send + Merge,
    F: Fn(&mut A, usize) + Sync,
{
    let n_blocks = n.div_ceil(MC_BLOCK);
    let blocks: Vec<A> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = init();
            let lo = b * MC_BLOCK;
            let hi = ((b + 1) * MC_BLOCK).min(n);
            for j in lo..hi {
                per_path(&mut acc, j);
            }
            acc
        })
        .collect();
    let mut total = init();
    for block in blocks {
        total.merge(block);
    }
    total
}

pub(crate) trait Merge {
    fn merge(&mut self, other: Self);
}

#[derive(Clone, Copy, Default)]
pub(crate) struct ScalarSums {
    pub sum: f64,
    pub sum_sq: f64,
}

impl Merge for ScalarSums {
    fn merge(&mut self, other: Self) {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }
}

impl ScalarSums {
    pub fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }
}

pub(crate) struct VecSums {
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
}

impl VecSums {
    fn new(dim: usize) -> Self {
        Self {
            sum: vec![0.0; dim],
            sum_sq: vec![0.0; dim],
        }
    }
}

impl Merge for VecSums {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.sum.iter_mut().zip(other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(other.sum_sq) {
            *a += b;
        }
    }
}

/// Mean and standard error of a path functional over `n` window paths.
/// Path `j` always uses stream `stream_base + j`, so estimates are
/// reproducible for any worker partitioning.
pub fn mc_expectation_from<F>(
    sampler: &Sampler,
    functional: F,
    n: usize,
    seed: u64,
    stream_base: u64,
) -> Result<McEstimate>
where
    F: Fn(&SampledPath) -> f64 + Sync,
{
    if n < 2 {
        return Err(SlepianError::TooFewSamples { n, min: 2 });
    }
    let sums = accumulate_paths(n, ScalarSums::default, |acc, j| {
        let w = sampler.sample(RngStream::new(seed, stream_base + j as u64));
        acc.push(functional(&w));
    });
    Ok(McEstimate::from_sums(sums.sum, sums.sum_sq, n, seed))
}

/// [`mc_expectation_from`] with stream ids starting at zero.
pub fn mc_expectation<F>(sampler: &Sampler, functional: F, n: usize, seed: u64) -> Result<McEstimate>
where
    F: Fn(&SampledPath) -> f64 + Sync,
{
    mc_expectation_from(sampler, functional, n, seed, 0)
}

/// Per-node estimates of `E[W_t z(h, W)] - h(t)` over the window.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConditionAReport {
    /// Window node times.
    pub nodes: Vec<f64>,
    /// Residual estimate at each node.
    pub residuals: Vec<McEstimate>,
    pub variant: Variant,
}

impl ConditionAReport {
    /// Largest absolute residual mean.
    pub fn max_abs_residual(&self) -> f64 {
        self.residuals
            .iter()
            .fold(0.0f64, |acc, e| acc.max(e.mean.abs()))
    }

    /// Average residual mean over the nodes (the constant offset, if any).
    pub fn mean_residual(&self) -> f64 {
        self.residuals.iter().map(|e| e.mean).sum::<f64>() / self.residuals.len() as f64
    }

    /// True if each node residual lies within `k` of its standard error.
    pub fn all_within(&self, k: f64) -> bool {
        self.residuals
            .iter()
            .all(|e| e.mean.abs() <= k * e.std_error)
    }

    /// Largest standard error across nodes.
    pub fn max_std_error(&self) -> f64 {
        self.residuals
            .iter()
            .fold(0.0f64, |acc, e| acc.max(e.std_error))
    }
}

/// Estimates the defining identity of the representer at every window node.
pub fn condition_a_residual(
    h: &KernelElement,
    variant: Variant,
    n: usize,
    seed: u64,
    sampler: &Sampler,
) -> Result<ConditionAReport> {
    if n < 10_000 {
        return Err(SlepianError::TooFewSamples { n, min: 10_000 });
    }
    if sampler.grid() != h.grid() {
        return Err(SlepianError::GridMismatch);
    }
    let grid = *h.grid();
    let dim = grid.window_node_count();
    let h_nodes = h.node_values();

    let sums = accumulate_paths(n, || VecSums::new(dim), |acc, j| {
        let w = sampler.sample(RngStream::new(seed, j as u64));
        let z = h.z(&w, variant).expect("sampler shares the shift grid");
        for (i, wv) in w.values().iter().enumerate() {
            let x = wv * z;
            acc.sum[i] += x;
            acc.sum_sq[i] += x * x;
        }
    });

    let residuals = (0..dim)
        .map(|i| {
            let mut e = McEstimate::from_sums(sums.sum[i], sums.sum_sq[i], n, seed);
            e.mean -= h_nodes[i];
            e
        })
        .collect();
    Ok(ConditionAReport {
        nodes: grid.window_nodes(),
        residuals,
        variant,
    })
}

/// Empirical covariance matrix of the window process over `n` paths,
/// deterministic for the usual `(seed, stream)` contract.
pub fn empirical_covariance(sampler: &Sampler, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(SlepianError::TooFewSamples { n, min: 2 });
    }
    let dim = sampler.grid().window_node_count();

    struct Outer(DMatrix<f64>);
    impl Merge for Outer {
        fn merge(&mut self, other: Self) {
            self.0 += other.0;
        }
    }

    let acc = accumulate_paths(
        n,
        || Outer(DMatrix::zeros(dim, dim)),
        |acc, j| {
            let w = sampler.sample(RngStream::new(seed, j as u64));
            let v = DVector::from_column_slice(w.values());
            acc.0.ger(1.0, &v, &v, 1.0);
        },
    );
    Ok(acc.0 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::SamplerKind;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn grid(m: usize, p: f64) -> TimeGrid {
        TimeGrid::new(m, p).unwrap()
    }

    #[test]
    fn covariance_factor_reproduces_sigma() {
        for (m, p) in [(16, 0.5), (20, 0.6), (16, 0.75)] {
            let cov = CovMatrix::new(grid(m, p)).unwrap();
            let rebuilt = cov.lower() * cov.lower().transpose();
            let err = (&rebuilt - cov.sigma()).abs().max();
            assert!(err <= 1e-10, "factor error {err} at m={m}, p={p}");
        }
    }

    #[test]
    fn quad_form_zero_shift() {
        let g = grid(16, 0.5);
        let h = KernelElement::zero(g);
        assert_abs_diff_eq!(fd_norm_sq(&h, &g).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn quad_form_constant_shift_all_resolutions() {
        for m in [16, 64, 128] {
            let g = grid(m, 0.5);
            let h = KernelElement::constant(g, 1.0);
            assert_relative_eq!(fd_norm_sq(&h, &g).unwrap(), 2.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn quad_form_matches_closed_norm_for_generated_shift() {
        // The closed corrected norm and the quadratic form meet at 0.9 for
        // the constant source at p = 0.6, on any grid that resolves it.
        for m in [20, 100, 400] {
            let g = grid(m, 0.6);
            let src =
                SourceFunction::new(SampledFunction::constant(g, Support::Unit, 1.0)).unwrap();
            let h = src.to_kernel();
            assert_relative_eq!(fd_norm_sq(&h, &g).unwrap(), 0.9, max_relative = 1e-9);
        }
    }

    #[test]
    fn log_lr_identities() {
        let g = grid(24, 0.75);
        let cov = CovMatrix::new(g).unwrap();
        let h = KernelElement::constant(g, 0.8).node_values();
        let w = vec![0.0; h.len()];
        assert_abs_diff_eq!(cov.log_lr(&h, &w), -0.5 * cov.quad_form(&h), epsilon = 1e-12);
        assert_abs_diff_eq!(cov.log_lr(&h, &h), 0.5 * cov.quad_form(&h), epsilon = 1e-12);
        let zero = vec![0.0; h.len()];
        assert_abs_diff_eq!(cov.log_lr(&zero, &h), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fd_log_lr_matches_closed_density_for_resolved_shifts() {
        // For shifts the grid resolves, the finite-dimensional ratio and the
        // closed-form corrected density are the same linear functional.
        let coarse = grid(16, 0.5);
        let gfun = SampledFunction::constant(coarse, Support::Window, 0.8);
        let h = KernelElement::new(coarse, 1.0, gfun).unwrap();

        for m in [16usize, 64] {
            let fine = grid(m, 0.5);
            let sampler = Sampler::new(crate::simulate::SamplerKind::Diff, fine).unwrap();
            for j in 0..20u64 {
                let w = sampler.sample(RngStream::new(77, j));
                let fd = fd_log_lr(&h, &w, &fine).unwrap();
                let h_fine =
                    KernelElement::from_node_values(fine, &super::shift_on_grid(&h, &fine).unwrap())
                        .unwrap();
                let closed = h_fine
                    .log_density(&w, Variant::Corrected)
                    .unwrap()
                    .log_density;
                assert_abs_diff_eq!(fd, closed, epsilon = 1e-9);
            }
        }

        // mismatched window lengths are rejected
        let other = grid(20, 0.6);
        let w = Sampler::new(crate::simulate::SamplerKind::Diff, other)
            .unwrap()
            .sample(RngStream::new(1, 1));
        assert!(fd_log_lr(&h, &w, &other).is_err());
    }

    #[test]
    fn qp_zero_source() {
        let g = grid(10, 0.6);
        let src = SourceFunction::new(SampledFunction::zero(g, Support::Unit)).unwrap();
        let sol = qp_min_norm(&src).unwrap();
        assert_eq!(sol.value, 0.0);
        assert!(sol.g_star.cells().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn qp_constant_source_branch_values() {
        let g = grid(10, 0.6);
        let src =
            SourceFunction::new(SampledFunction::constant(g, Support::Unit, 1.0)).unwrap();
        let sol = qp_min_norm(&src).unwrap();
        assert_abs_diff_eq!(sol.value, 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.g_star.cells()[0], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.g_star.cells()[4], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.g_star.cells()[9], 0.75, epsilon = 1e-12);
    }

    #[test]
    fn qp_elimination_matches_dense_kkt() {
        for (m, p) in [(20, 0.5), (20, 0.6), (24, 0.75)] {
            let g = grid(m, p);
            let f = SampledFunction::from_midpoints(g, Support::Unit, |t| (11.0 * t).sin() + t);
            let src = SourceFunction::new(f).unwrap();
            let a = qp_min_norm(&src).unwrap();
            let b = qp_min_norm_kkt(&src).unwrap();
            assert_relative_eq!(a.value, b.value, max_relative = 1e-9);
            for (x, y) in a.g_star.cells().iter().zip(b.g_star.cells()) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn qp_solution_is_feasible_and_no_worse_than_f() {
        let g = grid(36, 0.75);
        let f = SampledFunction::from_midpoints(g, Support::Unit, |t| t * t - 0.4 * (8.0 * t).cos());
        let src = SourceFunction::new(f.clone()).unwrap();
        let sol = qp_min_norm(&src).unwrap();
        let star = SourceFunction::new(sol.g_star.clone()).unwrap();
        assert_abs_diff_eq!(star.sfp(), src.sfp(), epsilon = 1e-10);
        for (a, b) in star.lag_diff().cells().iter().zip(src.lag_diff().cells()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
        assert!(sol.value <= f.l2_norm_sq() + 1e-12);
    }

    #[test]
    fn monotone_under_refinement_for_unresolved_shift() {
        // A smooth non-polygonal shift: the quadratic form strictly grows.
        let coarse = grid(8, 0.5);
        let smooth = |t: f64| (3.0 * t).sin() + 0.5;
        let mut prev = 0.0;
        for m in [8, 16, 32, 64] {
            let g = grid(m, 0.5);
            let values: Vec<f64> = (0..g.window_node_count())
                .map(|i| smooth(g.window_node(i)))
                .collect();
            let cov = CovMatrix::new(g).unwrap();
            let q = cov.quad_form(&values);
            assert!(
                q >= prev - 1e-9,
                "quad form decreased under refinement: {prev} -> {q}"
            );
            prev = q;
        }
        let _ = coarse;
    }

    #[test]
    fn mc_constant_functional() {
        let g = grid(8, 0.5);
        let sampler = Sampler::new(SamplerKind::Diff, g).unwrap();
        let est = mc_expectation(&sampler, |_| 1.0, 100, 3).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_error, 0.0);
        assert!(est.is_degenerate());
        assert!(mc_expectation(&sampler, |_| 1.0, 1, 3).is_err());
    }

    #[test]
    fn mc_is_independent_of_worker_count() {
        let g = grid(16, 0.5);
        let sampler = Sampler::new(SamplerKind::Diff, g).unwrap();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_expectation(&sampler, |w| w.last() * w.last(), 9001, 5).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn condition_a_zero_shift() {
        let g = grid(10, 0.6);
        let sampler = Sampler::new(SamplerKind::Diff, g).unwrap();
        let h = KernelElement::zero(g);
        let report = condition_a_residual(&h, Variant::Corrected, 10_000, 1, &sampler).unwrap();
        assert_eq!(report.max_abs_residual(), 0.0);
        assert!(condition_a_residual(&h, Variant::Corrected, 100, 1, &sampler).is_err());
    }
}
