//! Flat key-value configuration with one section per suite.
//!
//! Syntax: `key = value` lines, `[section]` headers, `#` comments. No
//! nesting; values are parsed on demand. Unknown suites are rejected so a
//! typo fails fast with a config error.

use crate::error::{Error, Result};
use std::collections::BTreeMap;

pub const SUITES: [&str; 6] = [
    "spectrum-scan",
    "green-verify",
    "semigroup-verify",
    "kernel-bounds",
    "osc-check",
    "stability-sweep",
];

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub grid_order: usize,
    pub parallelism: usize,
    pub out_dir: String,
    pub suites: Vec<String>,
    /// section -> key -> raw value
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 7,
            grid_order: 64,
            parallelism: 0,
            out_dir: "out".into(),
            suites: vec!["all".into()],
            sections: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].trim().to_string();
                if !SUITES.contains(&section.as_str()) {
                    return Err(Error::Config(format!(
                        "line {}: unknown suite section [{section}]",
                        lineno + 1
                    )));
                }
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if section.is_empty() {
                match k.as_str() {
                    "seed" => cfg.seed = parse_num(&k, &v)?,
                    "grid-order" => cfg.grid_order = parse_num(&k, &v)?,
                    "parallelism" => cfg.parallelism = parse_num(&k, &v)?,
                    "out" => cfg.out_dir = v,
                    "suites" => {
                        cfg.suites = v
                            .split(',')
                            .map(|s| s.trim().to_string())
                            .filter(|s| !s.is_empty())
                            .collect();
                        for s in &cfg.suites {
                            if s != "all" && !SUITES.contains(&s.as_str()) {
                                return Err(Error::Config(format!("unknown suite {s}")));
                            }
                        }
                    }
                    _ => {
                        return Err(Error::Config(format!(
                            "line {}: unknown global key {k}",
                            lineno + 1
                        )))
                    }
                }
            } else {
                cfg.sections.entry(section.clone()).or_default().insert(k, v);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.into(), msg: e.to_string() })?;
        Self::parse(&text)
    }

    pub fn get_f64(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.sections.get(section).and_then(|s| s.get(key)) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| Error::Config(format!("[{section}] {key} = {v}: {e}"))),
        }
    }

    pub fn get_f64_list(&self, section: &str, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.sections.get(section).and_then(|s| s.get(key)) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse()
                        .map_err(|e| Error::Config(format!("[{section}] {key}: {e}")))
                })
                .collect(),
        }
    }

    /// Resolved suite list with `all` expanded, order fixed, duplicates gone.
    pub fn resolved_suites(&self) -> Vec<String> {
        if self.suites.iter().any(|s| s == "all") {
            return SUITES.iter().map(|s| s.to_string()).collect();
        }
        let mut out = Vec::new();
        for s in SUITES {
            if self.suites.iter().any(|x| x == s) {
                out.push(s.to_string());
            }
        }
        out
    }

    /// Flattened snapshot for the manifest (sorted keys).
    pub fn snapshot(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("grid-order".to_string(), self.grid_order.to_string()),
            ("out".to_string(), self.out_dir.clone()),
            ("parallelism".to_string(), self.parallelism.to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("suites".to_string(), self.suites.join(",")),
        ];
        for (sec, kv) in &self.sections {
            for (k, v) in kv {
                out.push((format!("{sec}.{k}"), v.clone()));
            }
        }
        out.sort();
        out
    }
}

fn parse_num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse()
        .map_err(|e| Error::Config(format!("{k} = {v}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_globals() {
        let cfg = RunConfig::parse(
            "# comment\nseed = 11\ngrid-order = 32\nsuites = spectrum-scan, osc-check\n\
             [spectrum-scan]\nre-lo = 0.05\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.grid_order, 32);
        assert_eq!(cfg.resolved_suites(), vec!["spectrum-scan", "osc-check"]);
        assert_eq!(cfg.get_f64("spectrum-scan", "re-lo", 1.0).unwrap(), 0.05);
        assert_eq!(cfg.get_f64("spectrum-scan", "re-hi", 2.0).unwrap(), 2.0);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(RunConfig::parse("suites = nonsense\n").is_err());
        assert!(RunConfig::parse("[nonsense]\nx = 1\n").is_err());
        assert!(RunConfig::parse("mystery = 3\n").is_err());
    }

    #[test]
    fn empty_suites_list_allowed() {
        let cfg = RunConfig::parse("suites = \n").unwrap();
        assert!(cfg.resolved_suites().is_empty());
    }
}
