//! Trace, sweep and peak-list files.
//!
//! Traces are stored either as CSV (`index,volts,monitor_volts`) or as raw
//! little-endian `f32` (all samples, then all monitor values). Either form may
//! carry a JSON sidecar at `<file>.json` with the sample rate and metadata;
//! binary traces require it. Every write goes to a temporary file first and
//! is renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calibration::{PowerSweepPoint, SweepBranch};
use crate::error::{Error, Result};
use crate::sideband::{PeakKind, SpectralPeak};
use crate::synth::{RawTrace, TraceMeta};

const TRACE_HEADER: [&str; 3] = ["index", "volts", "monitor_volts"];
const SWEEP_HEADER: [&str; 3] = ["p_w_watts", "level_db", "branch"];
const PEAK_HEADER: [&str; 3] = ["freq_hz", "power_dbm", "kind"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceFormat {
    Csv,
    F32,
}

impl TraceFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TraceFormat::Csv => "csv",
            TraceFormat::F32 => "f32",
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Ok(TraceFormat::Csv),
            Some("f32") | Some("bin") => Ok(TraceFormat::F32),
            _ => Err(format_error(
                path,
                "unknown trace extension; expected .csv or .f32",
            )),
        }
    }
}

/// Contents of a trace sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSidecar {
    pub format: TraceFormat,
    pub sample_rate: f64,
    pub n_samples: usize,
    pub meta: TraceMeta,
}

fn format_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Writes `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = dir.join(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io_error(path, e));
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| format_error(path, e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| format_error(path, format!("line {}, column {}: {e}", e.line(), e.column())))
}

/// Renders a trace as CSV text.
pub fn trace_csv(trace: &RawTrace) -> String {
    let mut out = String::with_capacity(trace.len() * 40);
    out.push_str(&TRACE_HEADER.join(","));
    out.push('\n');
    for (i, v) in trace.samples.iter().enumerate() {
        let m = trace.monitor.get(i).copied().unwrap_or(0.0);
        out.push_str(&format!("{i},{v},{m}\n"));
    }
    out
}

fn trace_f32(trace: &RawTrace) -> Vec<u8> {
    let mut out = Vec::with_capacity(trace.len() * 8);
    for v in trace.samples.iter().chain(&trace.monitor) {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

/// Writes a trace and its sidecar; the format follows the extension.
pub fn write_trace(path: &Path, trace: &RawTrace) -> Result<()> {
    if !trace.monitor.is_empty() && trace.monitor.len() != trace.samples.len() {
        return Err(Error::DimensionMismatch {
            expected: trace.samples.len(),
            found: trace.monitor.len(),
        });
    }
    let format = TraceFormat::from_path(path)?;
    match format {
        TraceFormat::Csv => write_atomic(path, trace_csv(trace).as_bytes())?,
        TraceFormat::F32 => write_atomic(path, &trace_f32(trace))?,
    }
    let sidecar = TraceSidecar {
        format,
        sample_rate: trace.sample_rate,
        n_samples: trace.len(),
        meta: trace.meta.clone(),
    };
    write_json(&sidecar_path(path), &sidecar)
}

fn parse_field<T: std::str::FromStr>(path: &Path, row: u64, column: &str, raw: Option<&str>) -> Result<T> {
    let raw = raw.ok_or_else(|| format_error(path, format!("row {row}: missing column {column}")))?;
    raw.trim()
        .parse()
        .map_err(|_| format_error(path, format!("row {row}: cannot parse {column} value {raw:?}")))
}

/// Opens a headered CSV and checks its columns.
fn csv_records(path: &Path, header: &[&str]) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| io_error(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let found: Vec<String> = rdr
        .headers()
        .map_err(|e| format_error(path, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if found != header {
        return Err(format_error(
            path,
            format!("row 1: header {found:?}, expected {header:?}"),
        ));
    }
    Ok(rdr)
}

/// Iterates the data rows with 1-based file row numbers (header is row 1).
fn for_each_row(
    path: &Path,
    rdr: &mut csv::Reader<fs::File>,
    mut f: impl FnMut(u64, &csv::StringRecord) -> Result<()>,
) -> Result<()> {
    for (i, rec) in rdr.records().enumerate() {
        let row = i as u64 + 2;
        let rec = rec.map_err(|e| format_error(path, format!("row {row}: {e}")))?;
        f(row, &rec)?;
    }
    Ok(())
}

fn read_trace_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv_records(path, &TRACE_HEADER)?;
    let (mut samples, mut monitor) = (Vec::new(), Vec::new());
    for_each_row(path, &mut rdr, |row, rec| {
        let index: usize = parse_field(path, row, "index", rec.get(0))?;
        if index != samples.len() {
            return Err(format_error(
                path,
                format!("row {row}: index {index}, expected {}", samples.len()),
            ));
        }
        samples.push(parse_field(path, row, "volts", rec.get(1))?);
        monitor.push(parse_field(path, row, "monitor_volts", rec.get(2))?);
        Ok(())
    })?;
    Ok((samples, monitor))
}

fn read_trace_f32(path: &Path, n_samples: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    if bytes.len() % 4 != 0 {
        return Err(format_error(
            path,
            format!("length {} is not a multiple of 4", bytes.len()),
        ));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    match values.len() {
        n if n == 2 * n_samples => Ok((values[..n_samples].to_vec(), values[n_samples..].to_vec())),
        n if n == n_samples => Ok((values, Vec::new())),
        n => Err(format_error(
            path,
            format!("{n} values do not match {n_samples} samples from the sidecar"),
        )),
    }
}

/// Reads a trace. The sidecar supplies the sample rate when present;
/// otherwise `sample_rate` must be given (CSV only).
pub fn read_trace(path: &Path, sample_rate: Option<f64>) -> Result<RawTrace> {
    let format = TraceFormat::from_path(path)?;
    let side = sidecar_path(path);
    let sidecar: Option<TraceSidecar> = if side.exists() {
        Some(read_json(&side)?)
    } else {
        None
    };
    let (samples, monitor) = match (format, &sidecar) {
        (TraceFormat::Csv, _) => read_trace_csv(path)?,
        (TraceFormat::F32, Some(s)) => read_trace_f32(path, s.n_samples)?,
        (TraceFormat::F32, None) => {
            return Err(format_error(path, "binary trace has no sidecar"));
        }
    };
    let (rate, meta) = match (sidecar, sample_rate) {
        (_, Some(rate)) => (rate, TraceMeta::Measured),
        (Some(s), None) => (s.sample_rate, s.meta),
        (None, None) => {
            return Err(format_error(path, "no sidecar; a sample rate must be supplied"));
        }
    };
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(format_error(path, format!("sample rate {rate} must be positive")));
    }
    if samples.is_empty() {
        return Err(format_error(path, "trace has no samples"));
    }
    Ok(RawTrace {
        samples,
        sample_rate: rate,
        monitor,
        meta,
    })
}

fn branch_name(b: SweepBranch) -> &'static str {
    match b {
        SweepBranch::Squeezed => "squeezed",
        SweepBranch::Antisqueezed => "antisqueezed",
    }
}

pub fn sweep_csv(points: &[PowerSweepPoint]) -> String {
    let mut out = SWEEP_HEADER.join(",") + "\n";
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.p_w, p.level_db, branch_name(p.branch)));
    }
    out
}

pub fn write_sweep(path: &Path, points: &[PowerSweepPoint]) -> Result<()> {
    write_atomic(path, sweep_csv(points).as_bytes())
}

pub fn read_sweep(path: &Path) -> Result<Vec<PowerSweepPoint>> {
    let mut rdr = csv_records(path, &SWEEP_HEADER)?;
    let mut points = Vec::new();
    for_each_row(path, &mut rdr, |row, rec| {
        let p_w: f64 = parse_field(path, row, "p_w_watts", rec.get(0))?;
        let level_db: f64 = parse_field(path, row, "level_db", rec.get(1))?;
        let branch = match rec.get(2).map(str::trim) {
            Some("squeezed") => SweepBranch::Squeezed,
            Some("antisqueezed") => SweepBranch::Antisqueezed,
            other => {
                return Err(format_error(
                    path,
                    format!("row {row}: branch {other:?} is not squeezed or antisqueezed"),
                ))
            }
        };
        if !(p_w.is_finite() && p_w >= 0.0 && level_db.is_finite()) {
            return Err(format_error(
                path,
                format!("row {row}: values must be finite with p_w >= 0"),
            ));
        }
        points.push(PowerSweepPoint {
            p_w,
            level_db,
            branch,
        });
        Ok(())
    })?;
    Ok(points)
}

fn kind_name(k: PeakKind) -> &'static str {
    match k {
        PeakKind::Fundamental => "fundamental",
        PeakKind::Harmonic => "harmonic",
        PeakKind::Spur => "spur",
    }
}

pub fn peaks_csv(peaks: &[SpectralPeak]) -> String {
    let mut out = PEAK_HEADER.join(",") + "\n";
    for p in peaks {
        out.push_str(&format!("{},{},{}\n", p.freq_hz, p.power_dbm, kind_name(p.kind)));
    }
    out
}

pub fn read_peaks(path: &Path) -> Result<Vec<SpectralPeak>> {
    let mut rdr = csv_records(path, &PEAK_HEADER)?;
    let mut peaks = Vec::new();
    for_each_row(path, &mut rdr, |row, rec| {
        let freq_hz: f64 = parse_field(path, row, "freq_hz", rec.get(0))?;
        let power_dbm: f64 = parse_field(path, row, "power_dbm", rec.get(1))?;
        let kind = match rec.get(2).map(str::trim) {
            Some("fundamental") => PeakKind::Fundamental,
            Some("harmonic") => PeakKind::Harmonic,
            Some("spur") => PeakKind::Spur,
            other => {
                return Err(format_error(
                    path,
                    format!("row {row}: kind {other:?} is not fundamental, harmonic or spur"),
                ))
            }
        };
        if !(freq_hz.is_finite() && power_dbm.is_finite()) {
            return Err(format_error(path, format!("row {row}: values must be finite")));
        }
        peaks.push(SpectralPeak::new(freq_hz, power_dbm, kind));
        Ok(())
    })?;
    Ok(peaks)
}
