//! CSV exchange formats.
//!
//! Series files have a `t,value` header and one row per node (paths) or per
//! cell left endpoint (functions). Multi-path files use `t,path_0,...`.
//! Lines starting with `#` are metadata and skipped on read. Values are
//! written with 17 significant digits, so a write/read round trip is
//! bit-exact for f64.

use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Result, SlepianError};
use crate::grid::{SampledFunction, SampledPath, Support, TimeGrid};

/// Formats an `f64` with 17 significant digits (exact round trip).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| SlepianError::Csv {
        line,
        msg: format!("bad number '{s}': {e}"),
    })
}

/// Writes a two-column series with optional `#` metadata lines.
pub fn write_series<W: Write>(
    out: &mut W,
    meta: &[String],
    times: &[f64],
    values: &[f64],
) -> Result<()> {
    for m in meta {
        writeln!(out, "# {m}")?;
    }
    writeln!(out, "t,value")?;
    for (t, v) in times.iter().zip(values) {
        writeln!(out, "{},{}", fmt_f64(*t), fmt_f64(*v))?;
    }
    Ok(())
}

/// Reads a two-column series, skipping `#` lines and the header.
pub fn read_series<R: Read>(input: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let reader = BufReader::new(input);
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !saw_header {
            if !trimmed.starts_with('t') {
                return Err(SlepianError::Csv {
                    line: lineno,
                    msg: "expected header row starting with 't'".into(),
                });
            }
            saw_header = true;
            continue;
        }
        let mut parts = trimmed.split(',');
        let (t, v) = match (parts.next(), parts.next(), parts.next()) {
            (Some(t), Some(v), None) => (t, v),
            _ => {
                return Err(SlepianError::Csv {
                    line: lineno,
                    msg: "expected exactly two columns".into(),
                })
            }
        };
        times.push(parse_f64(t, lineno)?);
        values.push(parse_f64(v, lineno)?);
    }
    if !saw_header {
        return Err(SlepianError::Csv {
            line: 0,
            msg: "missing header row".into(),
        });
    }
    Ok((times, values))
}

/// Writes several paths over shared times: header `t,path_0,...`.
pub fn write_paths<W: Write>(
    out: &mut W,
    meta: &[String],
    times: &[f64],
    paths: &[Vec<f64>],
) -> Result<()> {
    for m in meta {
        writeln!(out, "# {m}")?;
    }
    let mut header = String::from("t");
    for j in 0..paths.len() {
        header.push_str(&format!(",path_{j}"));
    }
    writeln!(out, "{header}")?;
    for (i, t) in times.iter().enumerate() {
        let mut row = fmt_f64(*t);
        for path in paths {
            row.push(',');
            row.push_str(&fmt_f64(path[i]));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// Reads a multi-path file back into `(times, paths)`.
pub fn read_paths<R: Read>(input: R) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let reader = BufReader::new(input);
    let mut times = Vec::new();
    let mut paths: Vec<Vec<f64>> = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !saw_header {
            let cols = trimmed.split(',').count();
            if cols < 2 {
                return Err(SlepianError::Csv {
                    line: lineno,
                    msg: "expected at least two columns".into(),
                });
            }
            paths = vec![Vec::new(); cols - 1];
            saw_header = true;
            continue;
        }
        let mut parts = trimmed.split(',');
        let t = parts.next().ok_or_else(|| SlepianError::Csv {
            line: lineno,
            msg: "empty row".into(),
        })?;
        times.push(parse_f64(t, lineno)?);
        let mut count = 0;
        for (j, cell) in parts.enumerate() {
            if j >= paths.len() {
                return Err(SlepianError::Csv {
                    line: lineno,
                    msg: "row wider than header".into(),
                });
            }
            paths[j].push(parse_f64(cell, lineno)?);
            count += 1;
        }
        if count != paths.len() {
            return Err(SlepianError::Csv {
                line: lineno,
                msg: "row narrower than header".into(),
            });
        }
    }
    if !saw_header {
        return Err(SlepianError::Csv {
            line: 0,
            msg: "missing header row".into(),
        });
    }
    Ok((times, paths))
}

/// Interprets a series as a path on the given support: times must hit the
/// support nodes in order.
pub fn path_from_series(
    grid: TimeGrid,
    support: Support,
    times: &[f64],
    values: &[f64],
) -> Result<SampledPath> {
    let expected: Vec<f64> = match support {
        Support::Unit => grid.nodes(),
        Support::Window => grid.window_nodes(),
    };
    check_times(&expected, times)?;
    SampledPath::new(grid, support, values.to_vec())
}

/// Interprets a series as a function on the given support: times are the
/// cell left endpoints in order.
pub fn function_from_series(
    grid: TimeGrid,
    support: Support,
    times: &[f64],
    values: &[f64],
) -> Result<SampledFunction> {
    let expected: Vec<f64> = match support {
        Support::Unit => (0..grid.m()).map(|i| grid.node(i)).collect(),
        Support::Window => (0..grid.window_cells())
            .map(|i| grid.window_node(i))
            .collect(),
    };
    check_times(&expected, times)?;
    SampledFunction::new(grid, support, values.to_vec())
}

fn check_times(expected: &[f64], got: &[f64]) -> Result<()> {
    if expected.len() != got.len() {
        return Err(SlepianError::LengthMismatch {
            what: "time column",
            expected: expected.len(),
            got: got.len(),
        });
    }
    for (i, (e, g)) in expected.iter().zip(got).enumerate() {
        if (e - g).abs() > 1e-9 {
            return Err(SlepianError::Csv {
                line: i + 2,
                msg: format!("time {g} does not match grid node {e}"),
            });
        }
    }
    Ok(())
}
