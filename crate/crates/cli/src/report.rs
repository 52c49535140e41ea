//! JSON/CSV output conventions: every run embeds `(version, command, seed)`;
//! JSON additionally carries a timestamp, which comparisons should ignore.

use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

use slepian_core::grid::TimeGrid;
use slepian_core::oracle::McEstimate;

pub fn meta(seed: u64) -> Value {
    let command: Vec<String> = std::env::args().collect();
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command.join(" "),
        "seed": seed,
        "timestamp": timestamp,
    })
}

/// Metadata lines for CSV headers (no timestamp: path files must round-trip
/// byte-identically under reruns).
pub fn csv_meta(seed: u64) -> Vec<String> {
    let command: Vec<String> = std::env::args().collect();
    vec![
        format!("slepian {}", env!("CARGO_PKG_VERSION")),
        format!("command: {}", command.join(" ")),
        format!("seed: {seed}"),
    ]
}

pub fn grid_json(grid: &TimeGrid) -> Value {
    json!({ "m": grid.m(), "p": grid.p() })
}

pub fn estimate_json(est: &McEstimate) -> Value {
    json!({
        "value": est.mean,
        "se": est.std_error,
        "n": est.n,
    })
}

/// Prints a JSON object to stdout (sorted keys, so byte-identical for
/// identical content).
pub fn emit(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}
