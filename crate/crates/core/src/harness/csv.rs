use std::path::Path;

use super::{Method, SweepParam, TrialResult};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "trial,method,r_used,error_l2,excess_risk,qualifier_count,fallback_used,runtime_ms,seed,stream_id";

/// 17 significant digits.
fn real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub fn render_csv(results: &[TrialResult]) -> String {
    let mut out = String::with_capacity(64 * (results.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in results {
        out.push_str(&render_row(r));
        out.push('\n');
    }
    out
}

pub(crate) fn render_row(r: &TrialResult) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.trial,
        r.method,
        real(r.r_used),
        real(r.error_l2),
        real(r.excess_risk),
        r.qualifier_count.map(|q| q.to_string()).unwrap_or_default(),
        u8::from(r.fallback_used),
        real(r.runtime_ms),
        r.seed,
        r.stream_id
    )
}

/// Sweep output: `sweep_param,sweep_value` followed by the usual columns.
pub fn render_sweep_csv(param: SweepParam, runs: &[(f64, Vec<TrialResult>)]) -> String {
    let mut out = format!("sweep_param,sweep_value,{CSV_HEADER}\n");
    for (value, rows) in runs {
        for r in rows {
            out.push_str(&format!("{param},{},{}\n", real(*value), render_row(r)));
        }
    }
    out
}

pub fn emit_csv(results: &[TrialResult], path: &Path) -> Result<()> {
    std::fs::write(path, render_csv(results)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses CSV written by [`render_csv`]. Columns are located by header name,
/// so extra leading columns (as written by sweeps) are ignored.
pub fn parse_csv(text: &str) -> Result<Vec<TrialResult>> {
    let mut lines = text.lines().enumerate();
    let header: Vec<&str> = match lines.next() {
        Some((_, h)) => h.trim().split(',').collect(),
        None => return Ok(Vec::new()),
    };
    let names: Vec<&str> = CSV_HEADER.split(',').collect();
    let cols = names
        .iter()
        .map(|n| {
            header.iter().position(|h| h == n).ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing column {n:?}"),
            })
        })
        .collect::<Result<Vec<usize>>>()?;
    let mut out = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = lineno + 1;
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != header.len() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {} fields, found {}", header.len(), fields.len()),
            });
        }
        let get = |k: usize| fields[cols[k]];
        let err = |what: &str, v: &str| Error::Parse {
            line: line_no,
            message: format!("bad {what} {v:?}"),
        };
        let u64_at = |k: usize, what: &str| get(k).parse::<u64>().map_err(|_| err(what, get(k)));
        let f64_at = |k: usize, what: &str| get(k).parse::<f64>().map_err(|_| err(what, get(k)));
        out.push(TrialResult {
            trial: u64_at(0, "trial")?,
            method: get(1).parse::<Method>().map_err(|_| err("method", get(1)))?,
            r_used: f64_at(2, "r_used")?,
            error_l2: f64_at(3, "error_l2")?,
            excess_risk: f64_at(4, "excess_risk")?,
            qualifier_count: match get(5) {
                "" => None,
                v => Some(v.parse().map_err(|_| err("qualifier_count", v))?),
            },
            fallback_used: match get(6) {
                "0" => false,
                "1" => true,
                v => return Err(err("fallback_used", v)),
            },
            runtime_ms: f64_at(7, "runtime_ms")?,
            seed: u64_at(8, "seed")?,
            stream_id: u64_at(9, "stream_id")?,
        });
    }
    Ok(out)
}
