//! Command results in human and JSON form.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::OpsError;
use crate::matcore::ToleranceConfig;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub verdicts: BTreeMap<String, Verdict>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub artifacts: BTreeMap<String, serde_json::Value>,
    pub tolerances: ToleranceConfig,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: impl Into<String>, tolerances: ToleranceConfig) -> Self {
        Report {
            command: command.into(),
            verdicts: BTreeMap::new(),
            artifacts: BTreeMap::new(),
            tolerances,
            exit_code: EXIT_PASS,
            notes: Vec::new(),
        }
    }

    pub fn verdict(&mut self, name: impl Into<String>, pass: bool, residual: f64) -> &mut Self {
        self.verdicts.insert(name.into(), Verdict { pass, residual });
        self.exit_code = if self.all_pass() { EXIT_PASS } else { EXIT_FAIL };
        self
    }

    pub fn artifact(&mut self, name: impl Into<String>, value: impl Serialize) -> &mut Self {
        let value = serde_json::to_value(value).expect("artifacts serialize");
        self.artifacts.insert(name.into(), value);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| v.pass)
    }

    /// A report for a command that could not run: exit 2 for bad input,
    /// 1 for a failed operation.
    pub fn from_error(command: impl Into<String>, tolerances: ToleranceConfig, err: &OpsError) -> Self {
        let mut r = Report::new(command, tolerances);
        r.exit_code = if err.is_input_error() { EXIT_INPUT } else { EXIT_FAIL };
        r.notes.push(format!("error: {err}"));
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_human(&self) -> String {
        let mut out = String::new();
        let status = match self.exit_code {
            EXIT_PASS => "PASS",
            EXIT_FAIL => "FAIL",
            _ => "INPUT ERROR",
        };
        let _ = writeln!(out, "{}: {status}", self.command);
        let width = self.verdicts.keys().map(|k| k.len()).max().unwrap_or(0);
        for (name, v) in &self.verdicts {
            let mark = if v.pass { "pass" } else { "FAIL" };
            let _ = writeln!(out, "  {name:<width$}  {mark}  residual {:.3e}", v.residual);
        }
        for (name, value) in &self.artifacts {
            let _ = writeln!(out, "  {name}: {value}");
        }
        for note in &self.notes {
            let _ = writeln!(out, "  {note}");
        }
        let _ = writeln!(out, "  tolerances: abs {:e}, rel {:e}", self.tolerances.abs_tol, self.tolerances.rel_tol);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_tracks_verdicts() {
        let mut r = Report::new("check", ToleranceConfig::default());
        r.verdict("a", true, 0.0);
        assert_eq!(r.exit_code, EXIT_PASS);
        r.verdict("b", false, 1.0);
        assert_eq!(r.exit_code, EXIT_FAIL);
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["verdicts"]["b"]["pass"], false);
        assert_eq!(json["tolerances"]["rel_tol"], 1e-8);
        assert!(r.to_human().contains("FAIL"));
    }

    #[test]
    fn errors_map_to_exit_codes() {
        let tol = ToleranceConfig::default();
        let input = Report::from_error("x", tol, &OpsError::InvalidArgument("bad".into()));
        assert_eq!(input.exit_code, EXIT_INPUT);
        let op = Report::from_error("x", tol, &OpsError::Singular);
        assert_eq!(op.exit_code, EXIT_FAIL);
    }
}
