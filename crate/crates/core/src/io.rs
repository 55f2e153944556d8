//! File formats.
//!
//! Point sets (version 1): a `d n` line, then `n` lines of `d` decimal reals
//! separated by single spaces. Lines starting with `#` are comments. The file
//! ends with a newline. Coordinates are written in shortest round-trip form,
//! so reading a written file reproduces every bit.
//!
//! Nets (version 1): JSON lines. A header object
//! `{"format", "version", "d", "eps", "gamma", "delta0", "delta", "kind", "count"}`
//! is followed by one `{"anchor", "sides", "periodic", "source", "k"}` object
//! per element. Reals carry 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::nets::{ApproximationNet, NetKind, NetParams};

pub const NET_FORMAT: &str = "dispkit-net";
pub const NET_VERSION: u32 = 1;

/// Formats `x` like C's `%.17g`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses the point-set format.
pub fn parse_points(text: &str) -> Result<PointSet> {
    if !text.is_empty() && !text.ends_with('\n') {
        return Err(parse_err(text.lines().count(), "file does not end with a newline"));
    }
    let mut header: Option<(usize, usize, usize)> = None;
    let mut coords = Vec::new();
    let mut rows = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match header {
            None => {
                if fields.len() != 2 {
                    return Err(parse_err(line_no, "expected header `d n`"));
                }
                let d: usize = fields[0]
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad dimension '{}'", fields[0])))?;
                let n: usize = fields[1]
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad point count '{}'", fields[1])))?;
                if d == 0 {
                    return Err(parse_err(line_no, "dimension must be at least 1"));
                }
                header = Some((d, n, line_no));
                coords.reserve(d.saturating_mul(n).min(1 << 24));
            }
            Some((d, n, _)) => {
                if rows == n {
                    return Err(parse_err(line_no, format!("more than {n} points")));
                }
                if fields.len() != d {
                    return Err(parse_err(line_no, format!("expected {d} coordinates, found {}", fields.len())));
                }
                for f in fields {
                    let v: f64 = f
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("bad coordinate '{f}'")))?;
                    if !(0.0..=1.0).contains(&v) {
                        return Err(parse_err(line_no, format!("coordinate {v} outside [0, 1]")));
                    }
                    coords.push(v);
                }
                rows += 1;
            }
        }
    }
    let Some((d, n, header_line)) = header else {
        return Err(parse_err(1, "missing header `d n`"));
    };
    if rows != n {
        return Err(parse_err(header_line, format!("header declares {n} points, found {rows}")));
    }
    PointSet::new(d, coords)
}

pub fn read_points(path: &Path) -> Result<PointSet> {
    parse_points(&std::fs::read_to_string(path)?)
}

/// Writes the point-set format, with optional leading comment lines.
pub fn format_points(points: &PointSet, comments: &[&str]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "{} {}", points.dim(), points.len());
    for p in points.iter() {
        let row: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_points(path: &Path, points: &PointSet, comments: &[&str]) -> Result<()> {
    std::fs::write(path, format_points(points, comments))?;
    Ok(())
}

fn json_reals(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&v| fmt_g17(v)).collect();
    format!("[{}]", items.join(","))
}

/// Serializes a net as JSON lines.
pub fn format_net(net: &ApproximationNet) -> String {
    let p = &net.params;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{{\"format\":\"{NET_FORMAT}\",\"version\":{NET_VERSION},\"d\":{},\"eps\":{},\"gamma\":{},\"delta0\":{},\"delta\":{},\"kind\":\"{}\",\"count\":{}}}",
        p.d,
        fmt_g17(p.eps),
        fmt_g17(p.gamma),
        fmt_g17(p.delta0),
        fmt_g17(p.delta),
        net.kind.name(),
        net.len()
    );
    let periodic = net.kind.is_periodic();
    for e in net.elements() {
        let k: Vec<String> = e.index.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(
            out,
            "{{\"anchor\":{},\"sides\":{},\"periodic\":{periodic},\"source\":{},\"k\":[{}]}}",
            json_reals(e.anchor),
            json_reals(e.sides),
            e.source,
            k.join(",")
        );
    }
    out
}

pub fn write_net(path: &Path, net: &ApproximationNet) -> Result<()> {
    std::fs::write(path, format_net(net))?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NetHeader {
    format: String,
    version: u32,
    d: usize,
    eps: f64,
    gamma: f64,
    delta0: f64,
    delta: f64,
    kind: String,
    count: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NetRecord {
    anchor: Vec<f64>,
    sides: Vec<f64>,
    periodic: bool,
    source: u32,
    k: Vec<u32>,
}

/// Parses a net written by [`format_net`].
pub fn parse_net(text: &str) -> Result<ApproximationNet> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| parse_err(1, "empty net file"))?;
    let h: NetHeader = serde_json::from_str(first).map_err(|e| parse_err(1, e.to_string()))?;
    if h.format != NET_FORMAT || h.version != NET_VERSION {
        return Err(parse_err(1, format!("unsupported format {} version {}", h.format, h.version)));
    }
    let kind = NetKind::parse(&h.kind).ok_or_else(|| parse_err(1, format!("unknown kind '{}'", h.kind)))?;
    if h.d < 2 {
        return Err(parse_err(1, "dimension must be at least 2"));
    }
    let params = NetParams {
        d: h.d,
        eps: h.eps,
        gamma: h.gamma,
        delta0: h.delta0,
        delta: h.delta,
        c_d: 1.0 - 1.0 / h.d as f64,
    };
    let mut anchors = Vec::with_capacity(h.count.min(1 << 22) * h.d);
    let mut sides = Vec::with_capacity(h.count.min(1 << 22) * h.d);
    let mut sources = Vec::with_capacity(h.count.min(1 << 22));
    let mut index = Vec::with_capacity(h.count.min(1 << 22) * h.d);
    for (i, line) in lines {
        let line_no = i + 1;
        let r: NetRecord = serde_json::from_str(line).map_err(|e| parse_err(line_no, e.to_string()))?;
        if r.anchor.len() != h.d || r.sides.len() != h.d || r.k.len() != h.d {
            return Err(parse_err(line_no, format!("record does not have {} coordinates", h.d)));
        }
        if r.periodic != kind.is_periodic() {
            return Err(parse_err(line_no, "periodic flag disagrees with the net kind"));
        }
        anchors.extend(r.anchor);
        sides.extend(r.sides);
        sources.push(r.source);
        index.extend(r.k);
    }
    if sources.len() != h.count {
        return Err(parse_err(1, format!("header declares {} boxes, found {}", h.count, sources.len())));
    }
    ApproximationNet::from_parts(params, kind, anchors, sides, sources, index)
}

pub fn read_net(path: &Path) -> Result<ApproximationNet> {
    parse_net(&std::fs::read_to_string(path)?)
}
