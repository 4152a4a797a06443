//! Diagnostics time series as comma-separated text.

use std::io::{self, BufRead, Write};

use emacfem::diagnostics::{DiagnosticsRecord, Invariants};
use thiserror::Error;

pub const HEADER: [&str; 10] = [
    "step", "t", "energy", "mom_x", "mom_y", "ang_mom", "div_norm", "l2_err", "h1_err", "slack",
];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("header mismatch: expected {expected:?}, got {found:?}")]
    Header { expected: String, found: String },
    #[error("line {line}: {reason}")]
    Row { line: usize, reason: String },
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Write the header and one row per record. Floats use the shortest
/// representation that parses back to the same value; absent values are
/// `NaN`.
pub fn write_diagnostics(w: &mut impl Write, records: &[DiagnosticsRecord]) -> io::Result<()> {
    writeln!(w, "{}", HEADER.join(","))?;
    for r in records {
        let i = &r.invariants;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.step,
            r.t,
            i.energy,
            i.momentum[0],
            i.momentum[1],
            i.angular_momentum,
            i.div_norm,
            opt(r.l2_error),
            opt(r.h1_error),
            opt(r.slack),
        )?;
    }
    Ok(())
}

/// Parse a diagnostics file, rejecting any change to the column set or
/// order.
pub fn read_diagnostics(r: impl BufRead) -> Result<Vec<DiagnosticsRecord>, CsvError> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    let expected = HEADER.join(",");
    if header.trim_end() != expected {
        return Err(CsvError::Header {
            expected,
            found: header,
        });
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        let row = |reason: String| CsvError::Row { line: k + 2, reason };
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != HEADER.len() {
            return Err(row(format!("{} fields, expected {}", fields.len(), HEADER.len())));
        }
        let step = fields[0].parse().map_err(|e| row(format!("step: {e}")))?;
        let mut v = [0.0; 9];
        for (slot, (text, name)) in v.iter_mut().zip(fields[1..].iter().zip(&HEADER[1..])) {
            *slot = text.parse().map_err(|e| row(format!("{name}: {e}")))?;
        }
        let some = |x: f64| (!x.is_nan()).then_some(x);
        out.push(DiagnosticsRecord {
            step,
            t: v[0],
            invariants: Invariants {
                energy: v[1],
                momentum: [v[2], v[3]],
                angular_momentum: v[4],
                div_norm: v[5],
            },
            l2_error: some(v[6]),
            h1_error: some(v[7]),
            slack: some(v[8]),
        });
    }
    Ok(out)
}

/// `t,mass` rows for the transported scalar.
pub fn write_scalar_mass(w: &mut impl Write, series: &[(f64, f64)]) -> io::Result<()> {
    writeln!(w, "t,mass")?;
    for (t, m) in series {
        writeln!(w, "{t},{m}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(step: usize) -> DiagnosticsRecord {
        DiagnosticsRecord {
            step,
            t: 0.1 * step as f64,
            invariants: Invariants {
                energy: 1.0 / 3.0,
                momentum: [-0.0, 1e-300],
                angular_momentum: -2.5e-17,
                div_norm: 0.125,
            },
            l2_error: None,
            h1_error: Some(std::f64::consts::PI),
            slack: (step > 0).then_some(-1e-18),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let recs: Vec<_> = (0..3).map(record).collect();
        let mut buf = Vec::new();
        write_diagnostics(&mut buf, &recs).unwrap();
        let back = read_diagnostics(&buf[..]).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in recs.iter().zip(&back) {
            assert_eq!(a.invariants, b.invariants);
            assert_eq!((a.step, a.t, a.l2_error, a.h1_error, a.slack), (b.step, b.t, b.l2_error, b.h1_error, b.slack));
        }
    }

    #[test]
    fn missing_values_are_nan() {
        let mut buf = Vec::new();
        write_diagnostics(&mut buf, &[record(0)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let row = text.lines().nth(1).unwrap();
        assert!(row.starts_with("0,0,"));
        assert!(row.ends_with(",NaN,3.141592653589793,NaN"), "{row}");
    }

    #[test]
    fn drifted_header_is_rejected() {
        let text = "step,t,energy,mom_x,mom_y,ang_mom,div_norm,l2_err,slack,h1_err\n";
        assert!(matches!(read_diagnostics(text.as_bytes()), Err(CsvError::Header { .. })));
        let text = format!("{}\n1,2,3\n", HEADER.join(","));
        assert!(matches!(read_diagnostics(text.as_bytes()), Err(CsvError::Row { line: 2, .. })));
    }
}
