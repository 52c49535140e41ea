//! Uniform time discretization of `[0,1]` and the sampled function/path
//! representations everything else is built on.
//!
//! Functions are piecewise constant on the grid cells, so integrals and L²
//! norms reduce to exact sums. Paths are sampled at the grid nodes. The
//! window length `p` is required to sit on the grid (`p*m` integral), which
//! makes the lag-`p` shift an exact index shift with no interpolation.

use std::fmt;

use crate::error::{Result, SlepianError};

/// Tolerance for deciding that a real time coordinate hits a grid node.
pub const NODE_EPS: f64 = 1e-9;

/// Uniform grid on `[0,1]` with `m` cells and an on-grid window length `p`.
///
/// Nodes are `t_i = i/m` for `i = 0..=m`; the window `[p,1]` spans nodes
/// `t_k..=t_m` where `k = p*m`. Immutable after construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TimeGrid {
    m: usize,
    lag_cells: usize,
}

impl TimeGrid {
    /// Builds a grid with `m` cells and window length `p in [1/2, 1)`.
    ///
    /// Rejects `p` that does not land on a node: an off-grid `p` signals a
    /// misconfigured run, not something to interpolate around.
    pub fn new(m: usize, p: f64) -> Result<Self> {
        if m < 2 {
            return Err(SlepianError::TooFewCells { m });
        }
        if !(0.5..1.0).contains(&p) {
            return Err(SlepianError::LagOutOfRange { p });
        }
        let pm = p * m as f64;
        let k = pm.round();
        if (pm - k).abs() >= 1e-12 {
            return Err(SlepianError::OffGridLag { m, p, pm });
        }
        let lag_cells = k as usize;
        debug_assert!(lag_cells >= m - lag_cells && lag_cells < m);
        Ok(Self { m, lag_cells })
    }

    /// Number of cells of `[0,1]`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Cell width `1/m`.
    pub fn step(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// Window length `p = k/m`.
    pub fn p(&self) -> f64 {
        self.lag_cells as f64 / self.m as f64
    }

    /// Number of cells in the lag `p` (the node index of `t = p`).
    pub fn lag_cells(&self) -> usize {
        self.lag_cells
    }

    /// Number of cells in the window `[p,1]`.
    pub fn window_cells(&self) -> usize {
        self.m - self.lag_cells
    }

    /// Number of nodes in the window `[p,1]`.
    pub fn window_node_count(&self) -> usize {
        self.m - self.lag_cells + 1
    }

    /// Node coordinate `t_i = i/m`.
    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.m as f64
    }

    /// Window node coordinate `t_{k+i}`.
    pub fn window_node(&self, i: usize) -> f64 {
        self.node(self.lag_cells + i)
    }

    /// All window node coordinates `p, p+1/m, ..., 1`.
    pub fn window_nodes(&self) -> Vec<f64> {
        (0..self.window_node_count())
            .map(|i| self.window_node(i))
            .collect()
    }

    /// All node coordinates `0, 1/m, ..., 1`.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.m).map(|i| self.node(i)).collect()
    }

    /// True if the two grids share the same window length `p` (as exact
    /// rationals), e.g. a dyadic refinement of the other.
    pub fn same_lag(&self, other: &TimeGrid) -> bool {
        self.lag_cells * other.m == other.lag_cells * self.m
    }

    /// Maps a time coordinate to its node index, if it is one.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        let x = t * self.m as f64;
        let i = x.round();
        if (x - i).abs() < NODE_EPS * self.m as f64 && (0.0..=self.m as f64).contains(&i) {
            Some(i as usize)
        } else {
            None
        }
    }
}

/// Supports on which sampled functions and paths live.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Support {
    /// The whole interval `[0,1]`.
    Unit,
    /// The window `[p,1]`.
    Window,
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Support::Unit => write!(f, "[0,1]"),
            Support::Window => write!(f, "[p,1]"),
        }
    }
}

impl Support {
    fn cell_count(&self, grid: &TimeGrid) -> usize {
        match self {
            Support::Unit => grid.m(),
            Support::Window => grid.window_cells(),
        }
    }

    fn node_count(&self, grid: &TimeGrid) -> usize {
        self.cell_count(grid) + 1
    }

    /// Global index of the first node of the support.
    fn first_node(&self, grid: &TimeGrid) -> usize {
        match self {
            Support::Unit => 0,
            Support::Window => grid.lag_cells(),
        }
    }
}

/// An L² function, constant on each grid cell of its support.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    grid: TimeGrid,
    support: Support,
    cells: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: TimeGrid, support: Support, cells: Vec<f64>) -> Result<Self> {
        let expected = support.cell_count(&grid);
        if cells.len() != expected {
            return Err(SlepianError::LengthMismatch {
                what: "cell values",
                expected,
                got: cells.len(),
            });
        }
        Ok(Self {
            grid,
            support,
            cells,
        })
    }

    pub fn constant(grid: TimeGrid, support: Support, value: f64) -> Self {
        let n = support.cell_count(&grid);
        Self {
            grid,
            support,
            cells: vec![value; n],
        }
    }

    pub fn zero(grid: TimeGrid, support: Support) -> Self {
        Self::constant(grid, support, 0.0)
    }

    /// Samples a pointwise function at cell midpoints. For affine functions
    /// this makes the cellwise integrals exact.
    pub fn from_midpoints<F: Fn(f64) -> f64>(grid: TimeGrid, support: Support, f: F) -> Self {
        let first = support.first_node(&grid);
        let step = grid.step();
        let cells = (0..support.cell_count(&grid))
            .map(|j| f(grid.node(first + j) + 0.5 * step))
            .collect();
        Self {
            grid,
            support,
            cells,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    /// Left endpoint of cell `j`.
    pub fn cell_left(&self, j: usize) -> f64 {
        self.grid.node(self.support.first_node(&self.grid) + j)
    }

    fn require_same_layout(&self, other: &SampledFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(SlepianError::GridMismatch);
        }
        if self.support != other.support {
            return Err(SlepianError::SupportMismatch {
                expected: self.support,
                got: other.support,
            });
        }
        Ok(())
    }

    /// Exact integral of the step function over `[a,b]`; `a`, `b` must be
    /// grid nodes inside the support.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        let bad = || SlepianError::BadInterval { a, b };
        let ia = self.grid.node_index(a).ok_or_else(bad)?;
        let ib = self.grid.node_index(b).ok_or_else(bad)?;
        let first = self.support.first_node(&self.grid);
        let last = first + self.cells.len();
        if ia > ib || ia < first || ib > last {
            return Err(bad());
        }
        let sum: f64 = self.cells[(ia - first)..(ib - first)].iter().sum();
        Ok(sum * self.grid.step())
    }

    /// Integral over the whole support.
    pub fn integral(&self) -> f64 {
        self.cells.iter().sum::<f64>() * self.grid.step()
    }

    /// Exact squared L² norm, `step * sum of squared cell values`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.cells.iter().map(|v| v * v).sum::<f64>() * self.grid.step()
    }

    /// Exact L² inner product with another function on the same layout.
    pub fn inner(&self, other: &SampledFunction) -> Result<f64> {
        self.require_same_layout(other)?;
        let dot: f64 = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| a * b)
            .sum();
        Ok(dot * self.grid.step())
    }

    /// Cumulative integral `s_f(t) = int_0^t f`, as a path on `[0,1]`.
    pub fn cumulative(&self) -> Result<SampledPath> {
        if self.support != Support::Unit {
            return Err(SlepianError::SupportMismatch {
                expected: Support::Unit,
                got: self.support,
            });
        }
        let step = self.grid.step();
        let mut nodes = Vec::with_capacity(self.cells.len() + 1);
        let mut acc = 0.0;
        nodes.push(0.0);
        for v in &self.cells {
            acc += v * step;
            nodes.push(acc);
        }
        SampledPath::new(self.grid, Support::Unit, nodes)
    }

    /// Splits `f` on `[0,1]` into interval means and centered fluctuations
    /// over `[0,1-p]`, `(1-p,p)`, `[p,1]`. The six parts are pairwise
    /// orthogonal in L² and recompose to `f` cellwise.
    pub fn decompose(&self) -> Result<CanonicalDecomposition> {
        if self.support != Support::Unit {
            return Err(SlepianError::SupportMismatch {
                expected: Support::Unit,
                got: self.support,
            });
        }
        let grid = self.grid;
        let m = grid.m();
        let k = grid.lag_cells();
        let n1 = m - k; // cells of [0, 1-p]
        let n2 = 2 * k - m; // cells of (1-p, p); empty when p = 1/2
        let step = grid.step();

        let len1 = n1 as f64 * step;
        let len2 = n2 as f64 * step;

        let sum1: f64 = self.cells[..n1].iter().sum();
        let sum2: f64 = self.cells[n1..k].iter().sum();
        let sum3: f64 = self.cells[k..].iter().sum();

        let alpha = sum1 * step / len1;
        let beta = if n2 == 0 { 0.0 } else { sum2 * step / len2 };
        let gamma = sum3 * step / len1;

        let mut a = vec![0.0; m];
        let mut b = vec![0.0; m];
        let mut c = vec![0.0; m];
        for (j, v) in self.cells.iter().enumerate() {
            if j < n1 {
                a[j] = v - alpha;
            } else if j < k {
                b[j] = v - beta;
            } else {
                c[j] = v - gamma;
            }
        }

        Ok(CanonicalDecomposition {
            grid,
            alpha,
            beta,
            gamma,
            a: SampledFunction::new(grid, Support::Unit, a)?,
            b: SampledFunction::new(grid, Support::Unit, b)?,
            c: SampledFunction::new(grid, Support::Unit, c)?,
        })
    }
}

/// Interval means and centered fluctuations of an `[0,1]` function over the
/// three lag intervals. Fluctuations are stored on `[0,1]`, zero outside
/// their interval, so plain L² inner products apply.
#[derive(Clone, Debug)]
pub struct CanonicalDecomposition {
    grid: TimeGrid,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a: SampledFunction,
    pub b: SampledFunction,
    pub c: SampledFunction,
}

impl CanonicalDecomposition {
    /// The six summands as functions on `[0,1]`:
    /// `alpha*1, a, beta*1, b, gamma*1, c` over their intervals.
    pub fn parts(&self) -> [SampledFunction; 6] {
        let m = self.grid.m();
        let k = self.grid.lag_cells();
        let n1 = m - k;
        let indicator = |lo: usize, hi: usize, v: f64| {
            let mut cells = vec![0.0; m];
            for cell in &mut cells[lo..hi] {
                *cell = v;
            }
            SampledFunction::new(self.grid, Support::Unit, cells).expect("length by construction")
        };
        [
            indicator(0, n1, self.alpha),
            self.a.clone(),
            indicator(n1, k, self.beta),
            self.b.clone(),
            indicator(k, m, self.gamma),
            self.c.clone(),
        ]
    }

    /// Cellwise sum of the six parts.
    pub fn recompose(&self) -> SampledFunction {
        let parts = self.parts();
        let mut cells = vec![0.0; self.grid.m()];
        for part in &parts {
            for (acc, v) in cells.iter_mut().zip(part.cells()) {
                *acc += v;
            }
        }
        SampledFunction::new(self.grid, Support::Unit, cells).expect("length by construction")
    }
}

/// A path sampled at the grid nodes of its support.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPath {
    grid: TimeGrid,
    support: Support,
    nodes: Vec<f64>,
}

impl SampledPath {
    pub fn new(grid: TimeGrid, support: Support, nodes: Vec<f64>) -> Result<Self> {
        let expected = support.node_count(&grid);
        if nodes.len() != expected {
            return Err(SlepianError::LengthMismatch {
                what: "node values",
                expected,
                got: nodes.len(),
            });
        }
        Ok(Self {
            grid,
            support,
            nodes,
        })
    }

    pub fn zero(grid: TimeGrid, support: Support) -> Self {
        let n = support.node_count(&grid);
        Self {
            grid,
            support,
            nodes: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.nodes
    }

    pub fn value(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Time coordinate of node `i` of this path.
    pub fn node_time(&self, i: usize) -> f64 {
        self.grid.node(self.support.first_node(&self.grid) + i)
    }

    /// Value at the first node of the support (`t = 0` or `t = p`).
    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    /// Value at `t = 1`.
    pub fn last(&self) -> f64 {
        *self.nodes.last().expect("paths have at least one node")
    }

    /// Largest node value.
    pub fn max_value(&self) -> f64 {
        self.nodes.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest absolute node value.
    pub fn sup_abs(&self) -> f64 {
        self.nodes.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Backward difference with lag `p`: the path `t -> F(t) - F(t-p)` on
    /// the window `[p,1]`. Exact, since the lag is an index shift.
    pub fn lag_difference(&self) -> Result<SampledPath> {
        if self.support != Support::Unit {
            return Err(SlepianError::SupportMismatch {
                expected: Support::Unit,
                got: self.support,
            });
        }
        let k = self.grid.lag_cells();
        let values = (k..self.nodes.len())
            .map(|i| self.nodes[i] - self.nodes[i - k])
            .collect();
        SampledPath::new(self.grid, Support::Window, values)
    }

    /// Adds another path on the same layout.
    pub fn add(&self, other: &SampledPath) -> Result<SampledPath> {
        if self.grid != other.grid {
            return Err(SlepianError::GridMismatch);
        }
        if self.support != other.support {
            return Err(SlepianError::SupportMismatch {
                expected: self.support,
                got: other.support,
            });
        }
        let nodes = self
            .nodes
            .iter()
            .zip(&other.nodes)
            .map(|(a, b)| a + b)
            .collect();
        SampledPath::new(self.grid, self.support, nodes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(m: usize, p: f64) -> TimeGrid {
        TimeGrid::new(m, p).unwrap()
    }

    #[test]
    fn grid_construction() {
        let g = grid(10, 0.6);
        assert_eq!(g.lag_cells(), 6);
        assert_abs_diff_eq!(g.step(), 0.1);
        assert_eq!(grid(8, 0.5).lag_cells(), 4);
    }

    #[test]
    fn grid_rejects_off_grid_lag() {
        assert!(matches!(
            TimeGrid::new(10, 0.55),
            Err(SlepianError::OffGridLag { .. })
        ));
    }

    #[test]
    fn grid_rejects_out_of_range_lag() {
        assert!(matches!(
            TimeGrid::new(10, 0.4),
            Err(SlepianError::LagOutOfRange { .. })
        ));
        assert!(matches!(
            TimeGrid::new(10, 1.0),
            Err(SlepianError::LagOutOfRange { .. })
        ));
        assert!(matches!(
            TimeGrid::new(1, 0.5),
            Err(SlepianError::TooFewCells { .. })
        ));
    }

    #[test]
    fn integrate_examples() {
        let g = grid(10, 0.6);
        let one = SampledFunction::constant(g, Support::Unit, 1.0);
        assert_abs_diff_eq!(one.integrate(0.0, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(one.integrate(0.0, 0.6).unwrap(), 0.6);
        let zero = SampledFunction::zero(g, Support::Unit);
        assert_abs_diff_eq!(zero.integrate(0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn integrate_rejects_bad_intervals() {
        let g = grid(10, 0.6);
        let w = SampledFunction::constant(g, Support::Window, 1.0);
        assert!(w.integrate(0.0, 1.0).is_err()); // outside [p,1]
        assert!(w.integrate(0.65, 0.9).is_err()); // off-node endpoint
        assert!(w.integrate(0.9, 0.7).is_err()); // reversed
    }

    #[test]
    fn cumulative_examples() {
        let g = grid(10, 0.6);
        let one = SampledFunction::constant(g, Support::Unit, 1.0);
        let s = one.cumulative().unwrap();
        for i in 0..=10 {
            assert_abs_diff_eq!(s.value(i), g.node(i), epsilon = 1e-15);
        }

        // f = 1 on [0, 0.5), 0 elsewhere
        let mut cells = vec![0.0; 10];
        for cell in &mut cells[..5] {
            *cell = 1.0;
        }
        let f = SampledFunction::new(g, Support::Unit, cells).unwrap();
        let s = f.cumulative().unwrap();
        assert_abs_diff_eq!(s.last(), 0.5, epsilon = 1e-15);
        assert_eq!(s.value(0), 0.0);
    }

    #[test]
    fn lag_difference_examples() {
        let g = grid(10, 0.6);
        let sq = SampledPath::new(g, Support::Unit, (0..=10).map(|i| (i as f64 / 10.0).powi(2)).collect()).unwrap();
        let d = sq.lag_difference().unwrap();
        // node t = 0.8 is window node index 2
        assert_abs_diff_eq!(d.value(2), 0.64 - 0.04, epsilon = 1e-15);

        let constant = SampledPath::new(g, Support::Unit, vec![3.5; 11]).unwrap();
        assert!(constant.lag_difference().unwrap().values().iter().all(|v| *v == 0.0));

        let linear = SampledPath::new(g, Support::Unit, (0..=10).map(|i| i as f64 / 10.0).collect()).unwrap();
        for v in linear.lag_difference().unwrap().values() {
            assert_abs_diff_eq!(*v, 0.6, epsilon = 1e-15);
        }
    }

    #[test]
    fn decompose_constant() {
        let g = grid(10, 0.6);
        let one = SampledFunction::constant(g, Support::Unit, 1.0);
        let d = one.decompose().unwrap();
        assert_abs_diff_eq!(d.alpha, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.beta, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.gamma, 1.0, epsilon = 1e-15);
        assert!(d.a.cells().iter().all(|v| v.abs() < 1e-15));
        assert!(d.b.cells().iter().all(|v| v.abs() < 1e-15));
        assert!(d.c.cells().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn decompose_front_indicator() {
        // f = 1 on [0, 0.4], p = 0.6: only the alpha part survives.
        let g = grid(10, 0.6);
        let mut cells = vec![0.0; 10];
        for cell in &mut cells[..4] {
            *cell = 1.0;
        }
        let f = SampledFunction::new(g, Support::Unit, cells).unwrap();
        let d = f.decompose().unwrap();
        assert_abs_diff_eq!(d.alpha, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.beta, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.gamma, 0.0, epsilon = 1e-15);
        for part in [&d.a, &d.b, &d.c] {
            assert!(part.cells().iter().all(|v| v.abs() < 1e-15));
        }
    }

    #[test]
    fn decompose_half_lag_has_empty_middle() {
        let g = grid(8, 0.5);
        let f = SampledFunction::new(g, Support::Unit, (0..8).map(|j| j as f64).collect()).unwrap();
        let d = f.decompose().unwrap();
        assert_eq!(d.beta, 0.0);
        assert!(d.b.cells().iter().all(|v| *v == 0.0));
        let r = d.recompose();
        for (x, y) in r.cells().iter().zip(f.cells()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn telescoping_identity() {
        // nabla_p(s_f)(t) = s_f(p) + int_p^t (f(s) - f(s-p)) ds at every node.
        let g = grid(20, 0.75);
        let f = SampledFunction::from_midpoints(g, Support::Unit, |t| (7.3 * t).sin() + 0.4 * t);
        let s = f.cumulative().unwrap();
        let lhs = s.lag_difference().unwrap();
        let sfp = f.integrate(0.0, g.p()).unwrap();
        let k = g.lag_cells();
        let step = g.step();
        let mut rhs = sfp;
        assert_abs_diff_eq!(lhs.value(0), rhs, epsilon = 1e-12);
        for i in 1..g.window_node_count() {
            let j = k + i - 1; // cell entering the integral
            rhs += (f.cells()[j] - f.cells()[j - k]) * step;
            assert_abs_diff_eq!(lhs.value(i), rhs, epsilon = 1e-12);
        }
    }
}
