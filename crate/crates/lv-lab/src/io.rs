//! Column CSV files with `# key=value` metadata lines.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{LabError, Result};

/// 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_columns(
    path: &Path,
    meta: &[(String, String)],
    names: &[&str],
    cols: &[&[f64]],
) -> Result<()> {
    let mut s = String::new();
    for (k, v) in meta {
        let _ = writeln!(s, "# {k}={v}");
    }
    let _ = writeln!(s, "{}", names.join(","));
    let n = cols.first().map_or(0, |c| c.len());
    for i in 0..n {
        let row: Vec<String> = cols.iter().map(|c| fmt_num(c[i])).collect();
        let _ = writeln!(s, "{}", row.join(","));
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, s)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub names: Vec<String>,
    pub cols: Vec<Vec<f64>>,
}

impl Table {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn meta_f64(&self, key: &str) -> Option<f64> {
        self.meta(key).and_then(|v| v.parse().ok())
    }

    pub fn col(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.cols[i].as_slice())
    }
}

pub fn read_columns(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path)?;
    let mut meta = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        if names.is_empty() {
            names = line.split(',').map(|s| s.trim().to_string()).collect();
            cols = vec![Vec::new(); names.len()];
            continue;
        }
        for (j, f) in line.split(',').enumerate() {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| LabError::Io(format!("bad number {f:?} in {}", path.display())))?;
            if j < cols.len() {
                cols[j].push(v);
            }
        }
    }
    Ok(Table { meta, names, cols })
}

/// Flat `key = value` manifest writer.
#[derive(Debug, Default, Clone)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) {
        self.put(key, fmt_num(value));
    }

    /// One checked invariant: `check.<name> = PASS|FAIL measured=... anchor=...`.
    pub fn check(&mut self, name: &str, pass: bool, measured: &str, anchor: &str) {
        self.put(
            format!("check.{name}"),
            format!(
                "{} measured={measured} anchor={anchor}",
                if pass { "PASS" } else { "FAIL" }
            ),
        );
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.render())?;
        Ok(())
    }

    pub fn all_pass(&self) -> bool {
        !self
            .entries
            .iter()
            .any(|(k, v)| k.starts_with("check.") && v.starts_with("FAIL"))
    }
}
