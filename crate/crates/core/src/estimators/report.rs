use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Fitted value with its one-sigma standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Outcome of a fit, serializable as a flat `key = value` block.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub kind: String,
    /// Parameters in the order the fit defines them.
    pub parameters: Vec<(String, Estimate)>,
    pub residual_rms: f64,
    pub iterations: usize,
    pub converged: bool,
    pub points_used: usize,
    pub flags: Vec<String>,
}

impl FitReport {
    pub fn new(kind: impl Into<String>) -> Self {
        Self {
            kind: kind.into(),
            parameters: Vec::new(),
            residual_rms: f64::NAN,
            iterations: 0,
            converged: false,
            points_used: 0,
            flags: Vec::new(),
        }
    }

    pub fn get(&self, name: &str) -> Option<Estimate> {
        self.parameters
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, e)| *e)
    }

    pub fn value(&self, name: &str) -> Result<f64> {
        self.get(name)
            .map(|e| e.value)
            .ok_or_else(|| Error::InvalidModel(format!("fit report has no parameter '{name}'")))
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    pub fn push(&mut self, name: &str, value: f64, std_error: f64) {
        self.parameters
            .push((name.to_string(), Estimate { value, std_error }));
    }

    /// Inverse of the `Display` form.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            message: format!("line {line}: {message}"),
        };
        let mut report = FitReport::new("");
        let mut pending: Option<(String, f64)> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| bad(i + 1, format!("expected 'key = value', got '{line}'")))?;
            let number = || value.parse::<f64>().map_err(|e| bad(i + 1, e.to_string()));
            match key {
                "kind" => report.kind = value.to_string(),
                "converged" => {
                    report.converged = value
                        .parse()
                        .map_err(|_| bad(i + 1, format!("bad boolean '{value}'")))?
                }
                "iterations" => {
                    report.iterations = value
                        .parse()
                        .map_err(|_| bad(i + 1, format!("bad count '{value}'")))?
                }
                "points_used" => {
                    report.points_used = value
                        .parse()
                        .map_err(|_| bad(i + 1, format!("bad count '{value}'")))?
                }
                "residual_rms" => report.residual_rms = number()?,
                "flag" => report.flags.push(value.to_string()),
                _ => {
                    if let Some(name) = key
                        .strip_suffix(".stderr")
                        .and_then(|k| k.strip_prefix("param."))
                    {
                        match pending.take() {
                            Some((p, v)) if p == name => report.push(name, v, number()?),
                            _ => {
                                return Err(bad(
                                    i + 1,
                                    format!("stderr for '{name}' without its value"),
                                ))
                            }
                        }
                    } else if let Some(name) = key.strip_prefix("param.") {
                        if let Some((p, _)) = &pending {
                            return Err(bad(i + 1, format!("'{p}' has no stderr line")));
                        }
                        pending = Some((name.to_string(), number()?));
                    } else {
                        return Err(bad(i + 1, format!("unknown key '{key}'")));
                    }
                }
            }
        }
        if let Some((p, _)) = pending {
            return Err(bad(0, format!("'{p}' has no stderr line")));
        }
        if report.kind.is_empty() {
            return Err(bad(0, "missing 'kind'".into()));
        }
        Ok(report)
    }
}

impl fmt::Display for FitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kind = {}", self.kind)?;
        writeln!(f, "converged = {}", self.converged)?;
        writeln!(f, "iterations = {}", self.iterations)?;
        writeln!(f, "points_used = {}", self.points_used)?;
        writeln!(f, "residual_rms = {}", self.residual_rms)?;
        for (name, e) in &self.parameters {
            writeln!(f, "param.{name} = {}", e.value)?;
            writeln!(f, "param.{name}.stderr = {}", e.std_error)?;
        }
        for flag in &self.flags {
            writeln!(f, "flag = {flag}")?;
        }
        Ok(())
    }
}
