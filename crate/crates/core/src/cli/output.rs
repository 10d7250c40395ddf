//! Artifact directory and CSV formatting.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Environment variable naming the artifact directory.
pub const OUT_ENV: &str = "BLACKWELL_OUT";
pub const DEFAULT_OUT: &str = "blackwell-out";

#[derive(Clone, Debug)]
pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Output { dir: dir.into() }
    }

    /// `explicit`, else `$BLACKWELL_OUT`, else `./blackwell-out`.
    pub fn resolve(explicit: Option<&Path>) -> Self {
        match explicit {
            Some(p) => Output::new(p),
            None => Output::new(
                std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT), PathBuf::from),
            ),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(name);
        std::fs::write(&path, contents)?;
        Ok(path)
    }
}

/// File-name-safe form of a scenario name or path.
pub fn slug(name: &str) -> String {
    let stem = Path::new(name)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(name);
    stem.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '-'
            }
        })
        .collect()
}

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Minimal CSV builder; fields are numbers or bare identifiers, so no quoting.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[String]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.buf, "{}", fields.join(","));
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// `prefix_0, …, prefix_{d−1}`
pub fn indexed(prefix: &str, d: usize) -> impl Iterator<Item = String> + '_ {
    (0..d).map(move |i| format!("{prefix}_{i}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slug_and_numbers() {
        assert_eq!(slug("appendixA-S0"), "appendixA-S0");
        assert_eq!(slug("/tmp/my scenario.json"), "my-scenario");
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(f64::INFINITY), "inf");
        let mut c = Csv::new(&["t".into(), "x".into()]);
        c.row(&["1".into(), num(0.25)]);
        assert_eq!(c.finish(), "t,x\n1,0.25\n");
    }
}
