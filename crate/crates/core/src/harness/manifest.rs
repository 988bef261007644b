//! Run manifests and report rows, with deterministic byte-exact emission.
//!
//! JSON is written by a small canonical emitter (sorted keys, floats at 17
//! significant digits) so that identical runs produce identical bytes;
//! loading goes through a matching parser. Wall-clock timings are kept out
//! of the manifest and written to a sidecar to preserve determinism.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowStatus {
    Pass,
    Fail,
    Info,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Pass => "pass",
            RowStatus::Fail => "fail",
            RowStatus::Info => "info",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "pass" => Ok(RowStatus::Pass),
            "fail" => Ok(RowStatus::Fail),
            "info" => Ok(RowStatus::Info),
            other => Err(Error::Config(format!("unknown status {other}"))),
        }
    }
}

/// One check: an identifier, its inputs, the measured value, the target
/// or bound it is compared against, and the outcome.
#[derive(Clone, Debug)]
pub struct ReportRow {
    pub id: String,
    pub inputs: String,
    pub measured: f64,
    pub target: String,
    pub status: RowStatus,
}

impl ReportRow {
    pub fn check(id: &str, inputs: &str, measured: f64, target: &str, ok: bool) -> Self {
        ReportRow {
            id: id.into(),
            inputs: inputs.into(),
            measured,
            target: target.into(),
            status: if ok { RowStatus::Pass } else { RowStatus::Fail },
        }
    }

    pub fn info(id: &str, inputs: &str, measured: f64, note: &str) -> Self {
        ReportRow {
            id: id.into(),
            inputs: inputs.into(),
            measured,
            target: note.into(),
            status: RowStatus::Info,
        }
    }
}

/// Full experiment record: configuration snapshot, versions, and each check
/// exactly once.
#[derive(Clone, Debug, Default)]
pub struct RunManifest {
    pub tool_version: String,
    pub seed: u64,
    pub grid_orders: Vec<u64>,
    pub suites: Vec<String>,
    pub config_snapshot: Vec<(String, String)>,
    pub rows: Vec<ReportRow>,
}

impl RunManifest {
    pub fn new(seed: u64, grid_orders: Vec<u64>, suites: Vec<String>) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            grid_orders,
            suites,
            config_snapshot: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| r.status == RowStatus::Fail)
    }

    pub fn sort_rows(&mut self) {
        self.rows.sort_by(|a, b| a.id.cmp(&b.id).then(a.inputs.cmp(&b.inputs)));
    }
}

/// 17-significant-digit float formatting (exact f64 round trip).
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

fn parse_f64(s: &str) -> Result<f64> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s
            .parse::<f64>()
            .map_err(|e| Error::Config(format!("bad float {s}: {e}"))),
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

/// Canonical JSON text of the manifest (stable key order, one row per line).
pub fn manifest_to_json(m: &RunManifest) -> String {
    let mut s = String::new();
    s.push_str("{\n");
    let _ = writeln!(s, "  \"config\": {{");
    for (i, (k, v)) in m.config_snapshot.iter().enumerate() {
        let comma = if i + 1 == m.config_snapshot.len() { "" } else { "," };
        let _ = writeln!(s, "    \"{}\": \"{}\"{comma}", json_escape(k), json_escape(v));
    }
    let _ = writeln!(s, "  }},");
    let _ = writeln!(
        s,
        "  \"grid_orders\": [{}],",
        m.grid_orders.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(", ")
    );
    let _ = writeln!(s, "  \"rows\": [");
    for (i, r) in m.rows.iter().enumerate() {
        let comma = if i + 1 == m.rows.len() { "" } else { "," };
        let _ = writeln!(
            s,
            "    {{\"id\": \"{}\", \"inputs\": \"{}\", \"measured\": \"{}\", \"target\": \"{}\", \"status\": \"{}\"}}{comma}",
            json_escape(&r.id),
            json_escape(&r.inputs),
            fmt_f64(r.measured),
            json_escape(&r.target),
            r.status.as_str()
        );
    }
    let _ = writeln!(s, "  ],");
    let _ = writeln!(s, "  \"seed\": {},", m.seed);
    let _ = writeln!(
        s,
        "  \"suites\": [{}],",
        m.suites
            .iter()
            .map(|v| format!("\"{}\"", json_escape(v)))
            .collect::<Vec<_>>()
            .join(", ")
    );
    let _ = writeln!(s, "  \"tool_version\": \"{}\"", json_escape(&m.tool_version));
    s.push_str("}\n");
    s
}

// -- minimal parser for the canonical manifest subset ------------------------

struct P<'a> {
    b: &'a [u8],
    i: usize,
}

impl<'a> P<'a> {
    fn ws(&mut self) {
        while self.i < self.b.len() && (self.b[self.i] as char).is_whitespace() {
            self.i += 1;
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.ws();
        if self.i < self.b.len() && self.b[self.i] == c {
            self.i += 1;
            Ok(())
        } else {
            Err(Error::Config(format!(
                "manifest parse error at byte {} (expected '{}')",
                self.i, c as char
            )))
        }
    }

    fn peek(&mut self) -> u8 {
        self.ws();
        if self.i < self.b.len() {
            self.b[self.i]
        } else {
            0
        }
    }

    fn string(&mut self) -> Result<String> {
        self.expect(b'"')?;
        let mut out = String::new();
        while self.i < self.b.len() {
            let c = self.b[self.i];
            self.i += 1;
            match c {
                b'"' => return Ok(out),
                b'\\' => {
                    let e = self.b[self.i];
                    self.i += 1;
                    match e {
                        b'"' => out.push('"'),
                        b'\\' => out.push('\\'),
                        b'n' => out.push('\n'),
                        b'r' => out.push('\r'),
                        b't' => out.push('\t'),
                        b'u' => {
                            let hex = std::str::from_utf8(&self.b[self.i..self.i + 4])
                                .map_err(|_| Error::Config("bad unicode escape".into()))?;
                            let v = u32::from_str_radix(hex, 16)
                                .map_err(|_| Error::Config("bad unicode escape".into()))?;
                            out.push(char::from_u32(v).unwrap_or('?'));
                            self.i += 4;
                        }
                        _ => return Err(Error::Config("bad escape".into())),
                    }
                }
                _ => out.push(c as char),
            }
        }
        Err(Error::Config("unterminated string".into()))
    }

    fn number(&mut self) -> Result<u64> {
        self.ws();
        let start = self.i;
        while self.i < self.b.len() && (self.b[self.i] as char).is_ascii_digit() {
            self.i += 1;
        }
        std::str::from_utf8(&self.b[start..self.i])
            .unwrap()
            .parse()
            .map_err(|e| Error::Config(format!("bad integer: {e}")))
    }
}

/// Parse a manifest previously written by `manifest_to_json`.
pub fn manifest_from_json(text: &str) -> Result<RunManifest> {
    let mut p = P { b: text.as_bytes(), i: 0 };
    let mut m = RunManifest::default();
    p.expect(b'{')?;
    loop {
        let key = p.string()?;
        p.expect(b':')?;
        match key.as_str() {
            "config" => {
                p.expect(b'{')?;
                if p.peek() != b'}' {
                    loop {
                        let k = p.string()?;
                        p.expect(b':')?;
                        let v = p.string()?;
                        m.config_snapshot.push((k, v));
                        if p.peek() == b',' {
                            p.expect(b',')?;
                        } else {
                            break;
                        }
                    }
                }
                p.expect(b'}')?;
            }
            "grid_orders" => {
                p.expect(b'[')?;
                if p.peek() != b']' {
                    loop {
                        m.grid_orders.push(p.number()?);
                        if p.peek() == b',' {
                            p.expect(b',')?;
                        } else {
                            break;
                        }
                    }
                }
                p.expect(b']')?;
            }
            "rows" => {
                p.expect(b'[')?;
                if p.peek() != b']' {
                    loop {
                        p.expect(b'{')?;
                        let mut row = ReportRow {
                            id: String::new(),
                            inputs: String::new(),
                            measured: f64::NAN,
                            target: String::new(),
                            status: RowStatus::Info,
                        };
                        loop {
                            let k = p.string()?;
                            p.expect(b':')?;
                            let v = p.string()?;
                            match k.as_str() {
                                "id" => row.id = v,
                                "inputs" => row.inputs = v,
                                "measured" => row.measured = parse_f64(&v)?,
                                "target" => row.target = v,
                                "status" => row.status = RowStatus::parse(&v)?,
                                _ => return Err(Error::Config(format!("unknown row key {k}"))),
                            }
                            if p.peek() == b',' {
                                p.expect(b',')?;
                            } else {
                                break;
                            }
                        }
                        p.expect(b'}')?;
                        m.rows.push(row);
                        if p.peek() == b',' {
                            p.expect(b',')?;
                        } else {
                            break;
                        }
                    }
                }
                p.expect(b']')?;
            }
            "seed" => m.seed = p.number()?,
            "suites" => {
                p.expect(b'[')?;
                if p.peek() != b']' {
                    loop {
                        m.suites.push(p.string()?);
                        if p.peek() == b',' {
                            p.expect(b',')?;
                        } else {
                            break;
                        }
                    }
                }
                p.expect(b']')?;
            }
            "tool_version" => m.tool_version = p.string()?,
            _ => return Err(Error::Config(format!("unknown manifest key {key}"))),
        }
        if p.peek() == b',' {
            p.expect(b',')?;
        } else {
            break;
        }
    }
    p.expect(b'}')?;
    Ok(m)
}

// -- CSV ---------------------------------------------------------------------

fn csv_quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') || s.contains('\r') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV text: header then one ReportRow per line (RFC-4180 quoting).
pub fn rows_to_csv(rows: &[ReportRow]) -> String {
    let mut s = String::from("id,inputs,measured,target,status\r\n");
    for r in rows {
        let _ = write!(
            s,
            "{},{},{},{},{}\r\n",
            csv_quote(&r.id),
            csv_quote(&r.inputs),
            csv_quote(&fmt_f64(r.measured)),
            csv_quote(&r.target),
            r.status.as_str()
        );
    }
    s
}

/// Write-then-rename so partial output never lands at the final path.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let io_err = |e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    };
    {
        let mut f = std::fs::File::create(&tmp).map_err(io_err)?;
        f.write_all(content.as_bytes()).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
    }
    std::fs::rename(&tmp, path).map_err(io_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunManifest {
        let mut m = RunManifest::new(42, vec![64, 128], vec!["spectrum-scan".into()]);
        m.config_snapshot.push(("grid-order".into(), "64".into()));
        m.rows.push(ReportRow::check("a.first", "x=1", 0.123456789012345678, "<= 1", true));
        m.rows.push(ReportRow::info("b.second", "has,comma \"q\"", f64::INFINITY, "note"));
        m.sort_rows();
        m
    }

    #[test]
    fn json_round_trip_byte_identical() {
        let m = sample();
        let j1 = manifest_to_json(&m);
        let m2 = manifest_from_json(&j1).unwrap();
        let j2 = manifest_to_json(&m2);
        assert_eq!(j1, j2);
    }

    #[test]
    fn float_format_round_trip() {
        for &x in &[1.0, -0.1, 3.0e-17, 123456.789, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            let y: f64 = s.parse().unwrap();
            assert_eq!(x, y, "{s}");
        }
    }

    #[test]
    fn csv_quoting() {
        let m = sample();
        let csv = rows_to_csv(&m.rows);
        assert!(csv.starts_with("id,inputs,measured,target,status\r\n"));
        assert!(csv.contains("\"has,comma \"\"q\"\"\""));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn atomic_write_leaves_no_tmp() {
        let dir = std::env::temp_dir().join(format!("conelab-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.json");
        write_atomic(&path, "hello").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "hello");
        assert!(!path.with_extension("tmp").exists());
        std::fs::remove_dir_all(&dir).ok();
    }
}
