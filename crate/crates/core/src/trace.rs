//! Trace CSV format.
//!
//! Header `k,phi_x,phi_y,norm_d,lambda,backtracks,inner_iters,elapsed_ms`;
//! reals are written with 17 significant digits so every value reparses to
//! the same `f64`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::solver::TraceRecord;

pub const TRACE_HEADER: [&str; 8] = [
    "k",
    "phi_x",
    "phi_y",
    "norm_d",
    "lambda",
    "backtracks",
    "inner_iters",
    "elapsed_ms",
];

#[derive(Debug, Error)]
pub enum TraceIoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {reason}")]
    Format { line: u64, reason: String },
}

/// 17 significant digits in scientific notation.
pub fn fmt_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn write_trace<W: Write>(records: &[TraceRecord], out: W) -> Result<(), TraceIoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in records {
        w.write_record([
            r.k.to_string(),
            fmt_real(r.phi_x),
            fmt_real(r.phi_y),
            fmt_real(r.norm_d),
            fmt_real(r.lambda),
            r.backtracks.to_string(),
            r.inner_iters.to_string(),
            fmt_real(r.elapsed_ms),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRecord>, TraceIoError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(TraceIoError::Format {
            line: 1,
            reason: format!("expected header {}", TRACE_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<&str, TraceIoError> {
            row.get(i).ok_or_else(|| TraceIoError::Format {
                line,
                reason: format!("missing column {}", TRACE_HEADER[i]),
            })
        };
        let real = |i: usize| -> Result<f64, TraceIoError> {
            field(i)?.trim().parse::<f64>().map_err(|e| TraceIoError::Format {
                line,
                reason: format!("{}: {e}", TRACE_HEADER[i]),
            })
        };
        let int = |i: usize| -> Result<usize, TraceIoError> {
            field(i)?.trim().parse::<usize>().map_err(|e| TraceIoError::Format {
                line,
                reason: format!("{}: {e}", TRACE_HEADER[i]),
            })
        };
        out.push(TraceRecord {
            k: int(0)?,
            phi_x: real(1)?,
            phi_y: real(2)?,
            norm_d: real(3)?,
            lambda: real(4)?,
            backtracks: int(5)?,
            inner_iters: int(6)?,
            elapsed_ms: real(7)?,
            slope: None,
        });
    }
    Ok(out)
}

pub fn save_trace(records: &[TraceRecord], path: &Path) -> Result<(), TraceIoError> {
    let file = File::create(path).map_err(|source| TraceIoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_trace(records, file)
}

pub fn load_trace(path: &Path) -> Result<Vec<TraceRecord>, TraceIoError> {
    let file = File::open(path).map_err(|source| TraceIoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_trace(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(k: usize, a: f64, b: f64, c: f64, l: f64) -> TraceRecord {
        TraceRecord {
            k,
            phi_x: a,
            phi_y: b,
            norm_d: c,
            lambda: l,
            backtracks: k % 3,
            inner_iters: 4,
            elapsed_ms: 0.125 * k as f64,
            slope: None,
        }
    }

    #[test]
    fn header_and_digits() {
        let mut buf = Vec::new();
        write_trace(&[record(0, 1.0 / 3.0, 0.25, 0.5, 0.0)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "k,phi_x,phi_y,norm_d,lambda,backtracks,inner_iters,elapsed_ms");
        let row = lines.next().unwrap();
        assert!(row.starts_with("0,3.3333333333333331e-1,"), "{row}");
    }

    #[test]
    fn rejects_foreign_header() {
        let err = read_trace("a,b\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TraceIoError::Format { line: 1, .. }));
    }

    proptest! {
        #[test]
        fn round_trip_is_lossless(vals in prop::collection::vec((any::<f64>(), -1e300f64..1e300, 0f64..1e10, -1f64..1e3), 1..20)) {
            let recs: Vec<_> = vals.iter().enumerate()
                .filter(|(_, v)| v.0.is_finite())
                .map(|(k, v)| record(k, v.0, v.1, v.2, v.3)).collect();
            let mut buf = Vec::new();
            write_trace(&recs, &mut buf).unwrap();
            let back = read_trace(buf.as_slice()).unwrap();
            prop_assert_eq!(back, recs);
        }
    }
}
