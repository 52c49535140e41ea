//! Simulation and change-of-measure tools for the moving-window Gaussian
//! process `W_t = (B_t - B_{t-p})/sqrt(p)` on `[p,1]`, `1/2 <= p < 1`.
//!
//! The crate provides:
//! - exact path sampling at grid nodes, by differenced Brownian increments
//!   or by covariance factorization ([`simulate`]);
//! - the kernel of admissible shifts in `(c, g)` coordinates, its norm, the
//!   minimal-norm generator, the representer functional, and the log
//!   density of the shifted law ([`rkhs`]);
//! - independent oracles: finite-dimensional Gaussian quadratic forms and
//!   likelihood ratios, an equality-constrained QP for the minimal norm,
//!   and seeded Monte Carlo with standard errors ([`oracle`]);
//! - boundary-crossing probabilities and shift-test power via importance
//!   sampling and reweighting ([`apps`]).
//!
//! All estimators are deterministic given `(seed, stream)` and independent
//! of the worker count.

pub mod apps;
pub mod error;
pub mod grid;
pub mod io;
pub mod oracle;
pub mod rkhs;
pub mod simulate;

pub use error::{Result, SlepianError};
pub use grid::{CanonicalDecomposition, SampledFunction, SampledPath, Support, TimeGrid};
pub use oracle::{CovMatrix, McEstimate};
pub use rkhs::{KernelElement, LogDensityResult, SourceFunction, Variant};
pub use simulate::{RngStream, Sampler, SamplerKind};
