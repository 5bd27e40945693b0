//! Deterministic run reports: the same input and flags always produce the
//! same bytes (timing appears only on the human-readable stream).

use std::collections::BTreeMap;

use serde::Serialize;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub flags: BTreeMap<String, String>,
    pub checks: Vec<CheckResult>,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub artifact: Option<String>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            schema: SCHEMA,
            command: command.to_string(),
            flags: BTreeMap::new(),
            checks: Vec::new(),
            verdict: String::new(),
            artifact: None,
        }
    }

    pub fn flag(&mut self, key: &str, value: impl ToString) {
        self.flags.insert(key.to_string(), value.to_string());
    }

    pub fn push(&mut self, name: &str, pass: bool, witnesses: Vec<String>) {
        self.checks.push(CheckResult { name: name.to_string(), pass, witnesses });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn finalize(&mut self) {
        self.verdict = if self.all_pass() { "pass" } else { "fail" }.to_string();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", self.command));
        for (k, v) in &self.flags {
            out.push_str(&format!("  {k}: {v}\n"));
        }
        for c in &self.checks {
            out.push_str(&format!(
                "check {}: {}\n",
                c.name,
                if c.pass { "pass" } else { "FAIL" }
            ));
            for w in &c.witnesses {
                out.push_str(&format!("  witness: {w}\n"));
            }
        }
        if let Some(a) = &self.artifact {
            out.push_str(&format!("artifact: {a}\n"));
        }
        out.push_str(&format!("verdict: {}\n", self.verdict));
        out
    }
}
