//! Trace-file ingestion and emission.
//!
//! Traces are UTF-8, LF-terminated CSV with header `time_s,input_v,folded_v`
//! (the `input_v` column is optional). The modulo threshold and nominal
//! sample rate ride in a sidecar JSON (`{"lambda": ..., "fs": ...}`) next to
//! the trace, or arrive via CLI flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::signals::{SampledSignal, SamplingGrid};
use crate::{Error, Result};

/// Fraction of `λ` by which folded trace values may stray outside
/// `[-λ, λ)` before ingestion rejects them; absorbs measurement noise on
/// captured hardware traces.
pub const FOLD_RANGE_SLACK: f64 = 0.02;

/// Sidecar metadata for a trace file.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceMeta {
    pub lambda: f64,
    pub fs: f64,
}

impl TraceMeta {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::config("trace lambda must be positive"));
        }
        if !(self.fs > 0.0) {
            return Err(Error::config("trace sample rate must be positive"));
        }
        Ok(())
    }
}

/// Conventional sidecar location: the trace path with its extension
/// replaced by `json`.
pub fn sidecar_path(trace: &Path) -> PathBuf {
    trace.with_extension("json")
}

pub fn read_sidecar(trace: &Path) -> Result<TraceMeta> {
    let p = sidecar_path(trace);
    let text = std::fs::read_to_string(&p).map_err(|e| {
        Error::config(format!("cannot read sidecar {}: {e}", p.display()))
    })?;
    let meta: TraceMeta = serde_json::from_str(&text)
        .map_err(|e| Error::config(format!("bad sidecar {}: {e}", p.display())))?;
    meta.validate()?;
    Ok(meta)
}

/// Parsed trace columns, still unvalidated against channel metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceData {
    pub times: Vec<f64>,
    pub input: Option<Vec<f64>>,
    pub folded: Vec<f64>,
}

fn parse_field(tok: &str, line: usize, what: &str) -> Result<f64> {
    tok.trim().parse::<f64>().map_err(|_| Error::Trace {
        line,
        msg: format!("cannot parse {what} value {tok:?}"),
    })
}

/// Parse trace CSV text. `line` numbers in errors are 1-based and include
/// the header line.
pub fn parse_trace(text: &str) -> Result<TraceData> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or(Error::Trace { line: 1, msg: "empty trace file".into() })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let with_input = match cols.as_slice() {
        ["time_s", "input_v", "folded_v"] => true,
        ["time_s", "folded_v"] => false,
        _ => {
            return Err(Error::Trace {
                line: 1,
                msg: format!(
                    "header must be `time_s,input_v,folded_v` or `time_s,folded_v`, got {header:?}"
                ),
            })
        }
    };
    let mut times = Vec::new();
    let mut input = if with_input { Some(Vec::new()) } else { None };
    let mut folded = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = raw.split(',').collect();
        let expect = if with_input { 3 } else { 2 };
        if toks.len() != expect {
            return Err(Error::Trace {
                line,
                msg: format!("expected {expect} fields, got {}", toks.len()),
            });
        }
        times.push(parse_field(toks[0], line, "time_s")?);
        if with_input {
            input.as_mut().unwrap().push(parse_field(toks[1], line, "input_v")?);
        }
        folded.push(parse_field(toks[toks.len() - 1], line, "folded_v")?);
    }
    if times.is_empty() {
        return Err(Error::Trace { line: 2, msg: "trace has no data rows".into() });
    }
    Ok(TraceData { times, input, folded })
}

pub fn read_trace(path: &Path) -> Result<TraceData> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read trace {}: {e}", path.display())))?;
    parse_trace(&text)
}

/// Render trace columns as CSV. `emit_trace` followed by [`parse_trace`]
/// round-trips values exactly (shortest round-trip float formatting).
pub fn emit_trace(times: &[f64], input: Option<&[f64]>, folded: &[f64]) -> String {
    let mut out = String::new();
    match input {
        Some(inp) => {
            out.push_str("time_s,input_v,folded_v\n");
            for ((t, x), y) in times.iter().zip(inp).zip(folded) {
                out.push_str(&format!("{t},{x},{y}\n"));
            }
        }
        None => {
            out.push_str("time_s,folded_v\n");
            for (t, y) in times.iter().zip(folded) {
                out.push_str(&format!("{t},{y}\n"));
            }
        }
    }
    out
}

fn grid_from_times(times: &[f64], fs: f64) -> Result<SamplingGrid<f64>> {
    let period = 1.0 / fs;
    let t0 = times[0];
    let mut offsets = Vec::with_capacity(times.len());
    let mut max_off: f64 = 0.0;
    for (k, &t) in times.iter().enumerate() {
        if k > 0 && t <= times[k - 1] {
            return Err(Error::Trace {
                line: k + 2,
                msg: format!("time regression: {} after {}", t, times[k - 1]),
            });
        }
        let off = t - (t0 + k as f64 * period);
        max_off = max_off.max(off.abs());
        offsets.push(off);
    }
    if max_off <= 1e-9 * period {
        Ok(SamplingGrid::uniform(t0, period, times.len()))
    } else {
        let nu = (max_off / period) * (1.0 + 1e-12);
        if nu >= 0.5 {
            return Err(Error::Trace {
                line: 1,
                msg: format!(
                    "instants deviate from the nominal rate by {nu:.3}·T; jitter must stay below T/2"
                ),
            });
        }
        SamplingGrid::from_offsets(t0, period, offsets, nu)
    }
}

/// Validate a trace against its metadata and lift it into sampled-signal
/// form: the folded channel, plus the clean input channel when present.
pub fn ingest_trace(
    path: &Path,
    meta: &TraceMeta,
) -> Result<(SampledSignal<f64>, Option<SampledSignal<f64>>)> {
    meta.validate()?;
    let data = read_trace(path)?;
    ingest_parsed(&data, meta)
}

/// [`ingest_trace`] on already-parsed columns.
pub fn ingest_parsed(
    data: &TraceData,
    meta: &TraceMeta,
) -> Result<(SampledSignal<f64>, Option<SampledSignal<f64>>)> {
    meta.validate()?;
    let slack = FOLD_RANGE_SLACK * meta.lambda;
    for (k, &y) in data.folded.iter().enumerate() {
        if !y.is_finite() || y < -meta.lambda - slack || y >= meta.lambda + slack {
            return Err(Error::Trace {
                line: k + 2,
                msg: format!(
                    "folded value {y} outside [-{l} - {slack}, {l} + {slack})",
                    l = meta.lambda
                ),
            });
        }
    }
    let grid = grid_from_times(&data.times, meta.fs)?;
    let folded = SampledSignal::new(data.folded.clone(), grid.clone(), None, Some(meta.lambda));
    let reference = data
        .input
        .as_ref()
        .map(|inp| SampledSignal::new(inp.clone(), grid, None, Some(meta.lambda)));
    Ok((folded, reference))
}
