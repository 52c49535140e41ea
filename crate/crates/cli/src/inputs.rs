//! Shift/source/path inputs: the shorthand grammar `const:<v>` and
//! `linear:<slope>`, or a CSV file path.

use std::fs::File;
use std::path::Path;

use anyhow::{Context, Result};

use slepian_core::grid::{SampledFunction, SampledPath, Support, TimeGrid};
use slepian_core::io;
use slepian_core::rkhs::{KernelElement, SourceFunction};

fn parse_value(spec: &str, what: &str) -> Result<f64> {
    spec.parse::<f64>()
        .with_context(|| format!("bad {what} value '{spec}'"))
}

/// A shift on `[p,1]`: `const:<c>` is the constant shift `h = c`,
/// `linear:<slope>` is `h(t) = slope * (t - p)`, anything else is read as a
/// path CSV over the window nodes.
pub fn parse_shift(grid: TimeGrid, spec: &str) -> Result<KernelElement> {
    if let Some(v) = spec.strip_prefix("const:") {
        return Ok(KernelElement::constant(grid, parse_value(v, "shift")?));
    }
    if let Some(v) = spec.strip_prefix("linear:") {
        let slope = parse_value(v, "shift slope")?;
        let g = SampledFunction::constant(grid, Support::Window, slope);
        return Ok(KernelElement::new(grid, 0.0, g)?);
    }
    let file = File::open(spec).with_context(|| format!("cannot open shift file '{spec}'"))?;
    let (times, values) = io::read_series(file)?;
    let path = io::path_from_series(grid, Support::Window, &times, &values)?;
    Ok(KernelElement::from_node_values(grid, path.values())?)
}

/// A generator on `[0,1]`: `const:<v>`, `linear:<slope>` (sampled at cell
/// midpoints, so affine integrals stay exact), or a function CSV with one
/// row per cell left endpoint.
pub fn parse_source(grid: TimeGrid, spec: &str) -> Result<SourceFunction> {
    let f = if let Some(v) = spec.strip_prefix("const:") {
        SampledFunction::constant(grid, Support::Unit, parse_value(v, "source")?)
    } else if let Some(v) = spec.strip_prefix("linear:") {
        let slope = parse_value(v, "source slope")?;
        SampledFunction::from_midpoints(grid, Support::Unit, |t| slope * t)
    } else {
        let file =
            File::open(spec).with_context(|| format!("cannot open source file '{spec}'"))?;
        let (times, values) = io::read_series(file)?;
        io::function_from_series(grid, Support::Unit, &times, &values)?
    };
    Ok(SourceFunction::new(f)?)
}

/// Reads an observed window path from a series CSV.
pub fn read_window_path(grid: TimeGrid, path: &Path) -> Result<SampledPath> {
    let file = File::open(path)
        .with_context(|| format!("cannot open path file '{}'", path.display()))?;
    let (times, values) = io::read_series(file)?;
    Ok(io::path_from_series(grid, Support::Window, &times, &values)?)
}
