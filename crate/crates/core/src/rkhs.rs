//! Kernel geometry of the moving-window process: the shift space
//! `{h(t) = c + int_p^t g, c real, g in L2[p,1]}`, its norm, the minimal-norm
//! generator, the representer functional `z`, and the log density of the
//! shifted law against the base law.
//!
//! Two constant conventions are kept side by side (see [`Variant`]). The
//! `Corrected` constants satisfy the two defining identities of the
//! representer (`E[W_t z] = h(t)` and `E[z^2] = |h|^2`); the `Paper`
//! constants carry a `1/p` factor on the squared norm and a `3*s_f(p)`
//! coefficient in `z`, and are retained so the discrepancy stays observable
//! rather than silently patched.

use serde::Serialize;

use crate::error::{Result, SlepianError};
use crate::grid::{SampledFunction, SampledPath, Support, TimeGrid};

/// Constant convention used for the norm and the representer coefficient.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `1/p` prefactor on the squared norm and a `3*s_f(p)` term in the
    /// representer coefficient.
    Paper,
    /// Constants consistent with `E[W_t z] = h(t)` and `E[z^2] = |h|^2`.
    #[default]
    Corrected,
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "paper" => Ok(Variant::Paper),
            "corrected" => Ok(Variant::Corrected),
            other => Err(format!("unknown variant '{other}', expected paper|corrected")),
        }
    }
}

/// A shift in the kernel of the window process, in `(c, g)` coordinates:
/// `h(t) = c + int_p^t g` for `t in [p,1]`, with `g` constant on grid cells.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelElement {
    grid: TimeGrid,
    c: f64,
    g: SampledFunction,
    sg: f64,
}

impl KernelElement {
    pub fn new(grid: TimeGrid, c: f64, g: SampledFunction) -> Result<Self> {
        if g.grid() != &grid {
            return Err(SlepianError::GridMismatch);
        }
        if g.support() != Support::Window {
            return Err(SlepianError::SupportMismatch {
                expected: Support::Window,
                got: g.support(),
            });
        }
        let sg = g.integral();
        Ok(Self { grid, c, g, sg })
    }

    /// The zero shift.
    pub fn zero(grid: TimeGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// A constant shift `h = c` (no absolutely continuous part).
    pub fn constant(grid: TimeGrid, c: f64) -> Self {
        Self {
            grid,
            c,
            g: SampledFunction::zero(grid, Support::Window),
            sg: 0.0,
        }
    }

    /// Recovers `(c, g)` from node samples of `h` on `[p,1]`: `c = h(p)` and
    /// `g` by cellwise finite differences. Exact when `h` is piecewise
    /// linear between nodes, which is the only shape a node-sampled shift
    /// can represent anyway.
    pub fn from_node_values(grid: TimeGrid, values: &[f64]) -> Result<Self> {
        if values.len() != grid.window_node_count() {
            return Err(SlepianError::LengthMismatch {
                what: "shift node values",
                expected: grid.window_node_count(),
                got: values.len(),
            });
        }
        let step = grid.step();
        let cells = values.windows(2).map(|w| (w[1] - w[0]) / step).collect();
        let g = SampledFunction::new(grid, Support::Window, cells)?;
        Self::new(grid, values[0], g)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Constant part `c = h(p)`.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Density of the absolutely continuous part on `[p,1]`.
    pub fn g(&self) -> &SampledFunction {
        &self.g
    }

    /// Cached `int_p^1 g`.
    pub fn sg(&self) -> f64 {
        self.sg
    }

    /// Recomputes `int_p^1 g` from the cells (consistency check).
    pub fn recompute_sg(&self) -> f64 {
        self.g.integral()
    }

    /// `h` sampled at the window nodes.
    pub fn node_values(&self) -> Vec<f64> {
        let step = self.grid.step();
        let mut out = Vec::with_capacity(self.grid.window_node_count());
        let mut acc = self.c;
        out.push(acc);
        for v in self.g.cells() {
            acc += v * step;
            out.push(acc);
        }
        out
    }

    /// `h(t)` for any `t in [p,1]` using the piecewise-constant `g`; exact
    /// for node times of any grid sharing the same `p`.
    pub fn value_at(&self, t: f64) -> f64 {
        let step = self.grid.step();
        let x = ((t - self.grid.p()) / step).clamp(0.0, self.g.cells().len() as f64);
        let j = (x.floor() as usize).min(self.g.cells().len());
        let full: f64 = self.g.cells()[..j].iter().sum();
        let frac = x - j as f64;
        let partial = if j < self.g.cells().len() {
            frac * self.g.cells()[j]
        } else {
            0.0
        };
        self.c + step * (full + partial)
    }

    /// Squared kernel norm of the shift under the given constants.
    ///
    /// `Corrected` returns
    /// `V = p * ((2c + S_g)^2 / (2(3p-1)) + |g|^2 / 2)`,
    /// the infimum of `|g~|^2` over generators with the same lag difference;
    /// `Paper` returns `V / p`.
    pub fn norm_sq(&self, variant: Variant) -> f64 {
        let p = self.grid.p();
        let s = 2.0 * self.c + self.sg;
        let v = p * (s * s / (2.0 * (3.0 * p - 1.0)) + 0.5 * self.g.l2_norm_sq());
        match variant {
            Variant::Corrected => v,
            Variant::Paper => v / p,
        }
    }

    /// The representer functional evaluated on an observed window path:
    /// `z = p * k * (w(p) + w(1)) / (2(3p-1)) + (p/2) int_p^1 g dw`,
    /// with `k = 2c + S_g` (`Corrected`) or `3c + S_g` (`Paper`).
    pub fn z(&self, w: &SampledPath, variant: Variant) -> Result<f64> {
        self.check_path(w)?;
        let p = self.grid.p();
        let knum = match variant {
            Variant::Paper => 3.0 * self.c + self.sg,
            Variant::Corrected => 2.0 * self.c + self.sg,
        };
        let boundary = p * knum * (w.first() + w.last()) / (2.0 * (3.0 * p - 1.0));
        let integral = wiener_integral(&self.g, w)?;
        Ok(boundary + 0.5 * p * integral)
    }

    /// Log of the density of the shifted law against the base law at `w`:
    /// quadratic part `-norm_sq/2` plus the linear part `z(w)`.
    pub fn log_density(&self, w: &SampledPath, variant: Variant) -> Result<LogDensityResult> {
        let quadratic = -0.5 * self.norm_sq(variant);
        let linear = self.z(w, variant)?;
        Ok(LogDensityResult {
            quadratic,
            linear,
            log_density: quadratic + linear,
            variant,
        })
    }

    /// The shifted path `t -> w(t) + h(t)` at the window nodes.
    pub fn shift(&self, w: &SampledPath) -> Result<SampledPath> {
        self.check_path(w)?;
        let values = self
            .node_values()
            .iter()
            .zip(w.values())
            .map(|(h, v)| h + v)
            .collect();
        SampledPath::new(self.grid, Support::Window, values)
    }

    fn check_path(&self, w: &SampledPath) -> Result<()> {
        if w.grid() != &self.grid {
            return Err(SlepianError::GridMismatch);
        }
        if w.support() != Support::Window {
            return Err(SlepianError::SupportMismatch {
                expected: Support::Window,
                got: w.support(),
            });
        }
        Ok(())
    }
}

/// Density evaluation split into its quadratic and linear terms.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LogDensityResult {
    pub quadratic: f64,
    pub linear: f64,
    pub log_density: f64,
    pub variant: Variant,
}

/// The integral `int_p^1 g dw` of a cellwise-constant integrand against the
/// node increments of `w` - exact for step functions.
pub fn wiener_integral(g: &SampledFunction, w: &SampledPath) -> Result<f64> {
    if g.grid() != w.grid() {
        return Err(SlepianError::GridMismatch);
    }
    if g.support() != Support::Window || w.support() != Support::Window {
        return Err(SlepianError::SupportMismatch {
            expected: Support::Window,
            got: if g.support() != Support::Window {
                g.support()
            } else {
                w.support()
            },
        });
    }
    let vals = w.values();
    Ok(g.cells()
        .iter()
        .enumerate()
        .map(|(i, gi)| gi * (vals[i + 1] - vals[i]))
        .sum())
}

/// A generator `f in L2[0,1]` of a shift, with the scalars the norm and
/// representer formulas are built from.
#[derive(Clone, Debug)]
pub struct SourceFunction {
    f: SampledFunction,
    sfp: f64,
    s_lag_diff_1: f64,
    delta: f64,
    lag_diff: SampledFunction,
}

impl SourceFunction {
    pub fn new(f: SampledFunction) -> Result<Self> {
        if f.support() != Support::Unit {
            return Err(SlepianError::SupportMismatch {
                expected: Support::Unit,
                got: f.support(),
            });
        }
        let grid = *f.grid();
        let m = grid.m();
        let k = grid.lag_cells();
        let step = grid.step();
        let cells = f.cells();

        let sfp = cells[..k].iter().sum::<f64>() * step;
        let sf1 = cells.iter().sum::<f64>() * step;
        let sf1mp = cells[..m - k].iter().sum::<f64>() * step;
        let diff_cells: Vec<f64> = (k..m).map(|j| cells[j] - cells[j - k]).collect();
        let s_lag_diff_1 = diff_cells.iter().sum::<f64>() * step;
        let one_minus_p = grid.window_cells() as f64 * step;
        // delta from the three integrals; s_{lag diff}(1) = delta*(1-p) is a
        // telescoping identity on the grid, checked in tests rather than
        // used as a definition.
        let delta = (sf1 - sfp - sf1mp) / one_minus_p;
        let lag_diff = SampledFunction::new(grid, Support::Window, diff_cells)?;

        Ok(Self {
            f,
            sfp,
            s_lag_diff_1,
            delta,
            lag_diff,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        self.f.grid()
    }

    pub fn f(&self) -> &SampledFunction {
        &self.f
    }

    /// `s_f(p) = int_0^p f`.
    pub fn sfp(&self) -> f64 {
        self.sfp
    }

    /// Mean lag difference `delta = (s_f(1) - s_f(p) - s_f(1-p)) / (1-p)`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The lag difference `t -> f(t) - f(t-p)` on `[p,1]`.
    pub fn lag_diff(&self) -> &SampledFunction {
        &self.lag_diff
    }

    /// `s_{lag diff}(1) = int_p^1 (f(s) - f(s-p)) ds`, equal to
    /// `delta * (1-p)` up to float reordering.
    pub fn s_lag_diff_1(&self) -> f64 {
        self.s_lag_diff_1
    }

    /// The shift generated by `f`: `c = s_f(p)/sqrt(p)`,
    /// `g = (f(.) - f(.-p))/sqrt(p)`.
    pub fn to_kernel(&self) -> KernelElement {
        let grid = *self.grid();
        let scale = 1.0 / grid.p().sqrt();
        let cells = self.lag_diff.cells().iter().map(|v| v * scale).collect();
        let g = SampledFunction::new(grid, Support::Window, cells)
            .expect("window layout by construction");
        KernelElement::new(grid, self.sfp * scale, g).expect("grid-consistent by construction")
    }

    /// Squared kernel norm computed directly in `f` coordinates:
    /// `V = (2 s_f(p) + delta (1-p))^2 / (2(3p-1)) + |f(.)-f(.-p)|^2 / 2`,
    /// divided by `p` under [`Variant::Paper`].
    pub fn norm_sq(&self, variant: Variant) -> f64 {
        let p = self.grid().p();
        let s = 2.0 * self.sfp + self.s_lag_diff_1;
        let v = s * s / (2.0 * (3.0 * p - 1.0)) + 0.5 * self.lag_diff.l2_norm_sq();
        match variant {
            Variant::Corrected => v,
            Variant::Paper => v / p,
        }
    }

    /// Representer functional in `f` coordinates; agrees with
    /// [`KernelElement::z`] on the generated shift.
    pub fn z(&self, w: &SampledPath, variant: Variant) -> Result<f64> {
        let grid = self.grid();
        let p = grid.p();
        let knum = match variant {
            Variant::Paper => 3.0 * self.sfp + self.s_lag_diff_1,
            Variant::Corrected => 2.0 * self.sfp + self.s_lag_diff_1,
        };
        let sqrt_p = p.sqrt();
        let boundary = sqrt_p * knum * (w.first() + w.last()) / (2.0 * (3.0 * p - 1.0));
        let integral = wiener_integral(&self.lag_diff, w)?;
        Ok(boundary + 0.5 * sqrt_p * integral)
    }

    /// The generator of minimal L² norm with the same lag difference and
    /// `s_f(p)` as `f`. Its squared norm is the corrected [`Self::norm_sq`].
    ///
    /// On the window branch the fluctuation is `(f(t) - f(t-p))/2`, the
    /// mirror image of the front branch; both are centered on their
    /// intervals by the definition of `delta`.
    pub fn min_norm_generator(&self) -> SampledFunction {
        let grid = *self.grid();
        let m = grid.m();
        let k = grid.lag_cells();
        let n1 = m - k;
        let p = grid.p();
        let cells = self.f.cells();

        let three_p = 3.0 * p - 1.0;
        let front = (self.sfp + 0.5 * (1.0 - p) * self.delta) / three_p;
        let alpha_star = (self.sfp - (2.0 * p - 1.0) * self.delta) / three_p;

        let mut out = vec![0.0; m];
        for j in 0..n1 {
            out[j] = front - 0.5 * (cells[j + k] - cells[j]);
        }
        if n1 < k {
            let middle = (self.sfp - (1.0 - p) * alpha_star) / (2.0 * p - 1.0);
            for slot in &mut out[n1..k] {
                *slot = middle;
            }
        }
        for j in k..m {
            out[j] = front + 0.5 * (cells[j] - cells[j - k]);
        }
        SampledFunction::new(grid, Support::Unit, out).expect("length by construction")
    }
}
