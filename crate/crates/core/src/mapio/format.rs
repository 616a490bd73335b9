//! Text map format.
//!
//! ```text
//! nx ny nz
//! sx sy sz
//! ox oy oz
//! periodic | aperiodic
//! v v v ...      (nx*ny*nz reals, x fastest, then y, then z)
//! ```
//!
//! Values are written with the shortest representation that parses back to
//! the same `f64`, so a write/parse cycle is bit-exact.

use std::fmt::Write as _;

use super::{DensityMap, MapError};

fn format_err(line: usize, msg: impl Into<String>) -> MapError {
    MapError::Format { line, msg: msg.into() }
}

fn parse_triple<T: std::str::FromStr>(line_no: usize, line: Option<&str>, what: &str) -> Result<[T; 3], MapError> {
    let line = line.ok_or_else(|| format_err(line_no, format!("missing {what} line")))?;
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(format_err(line_no, format!("expected 3 {what} fields, found {}", toks.len())));
    }
    let mut out = Vec::with_capacity(3);
    for t in toks {
        out.push(
            t.parse::<T>()
                .map_err(|_| format_err(line_no, format!("cannot parse {what} field {t:?}")))?,
        );
    }
    let mut it = out.into_iter();
    Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
}

pub fn parse_density_map(bytes: &[u8]) -> Result<DensityMap, MapError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        format_err(line, "input is not valid UTF-8")
    })?;
    let mut lines = text.lines();
    let dims: [usize; 3] = parse_triple(1, lines.next(), "dimension")?;
    let spacing: [f64; 3] = parse_triple(2, lines.next(), "spacing")?;
    let origin: [f64; 3] = parse_triple(3, lines.next(), "origin")?;
    let periodic = match lines.next().map(str::trim) {
        Some("periodic") => true,
        Some("aperiodic") => false,
        Some(other) => return Err(format_err(4, format!("expected periodic|aperiodic, found {other:?}"))),
        None => return Err(format_err(4, "missing periodicity line")),
    };
    if dims.contains(&0) {
        return Err(format_err(1, "dimensions must be positive"));
    }
    if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(format_err(2, "spacing must be positive"));
    }
    let expected = dims[0] * dims[1] * dims[2];
    let mut values = Vec::with_capacity(expected);
    for (offset, line) in lines.enumerate() {
        let line_no = offset + 5;
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| format_err(line_no, format!("cannot parse value {tok:?}")))?;
            if !v.is_finite() {
                return Err(format_err(line_no, format!("non-finite value {tok:?}")));
            }
            if v < 0.0 {
                return Err(MapError::NegativeValue { line: line_no, value: v });
            }
            values.push(v);
        }
    }
    if values.len() != expected {
        return Err(MapError::ValueCount { expected, found: values.len() });
    }
    DensityMap::new(dims, spacing, origin, periodic, values)
}

pub fn write_density_map(map: &DensityMap) -> Vec<u8> {
    let [nx, ny, nz] = map.dims();
    let s = map.spacing();
    let o = map.origin();
    let mut out = String::with_capacity(16 * nx * ny * nz + 128);
    let _ = writeln!(out, "{nx} {ny} {nz}");
    let _ = writeln!(out, "{:?} {:?} {:?}", s[0], s[1], s[2]);
    let _ = writeln!(out, "{:?} {:?} {:?}", o[0], o[1], o[2]);
    out.push_str(if map.periodic() { "periodic\n" } else { "aperiodic\n" });
    for row in map.values().chunks(nx) {
        let mut first = true;
        for v in row {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{v:?}");
        }
        out.push('\n');
    }
    out.into_bytes()
}
