use serde::Serialize;

/// Outcome of one named check, with optional witness data.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
}

/// Machine- and human-readable run report. Exit status is 0 exactly when
/// every check passed, 1 otherwise; input errors exit 2 before a report
/// exists.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub checks: Vec<Check>,
    pub summary: Summary,
    pub exit_status: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub results: Option<serde_json::Value>,
}

impl Report {
    pub fn new(command: String) -> Self {
        Report {
            command,
            checks: Vec::new(),
            summary: Summary {
                passed: 0,
                failed: 0,
            },
            exit_status: 0,
            results: None,
        }
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool, witness: Option<String>) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            witness,
        });
        if pass {
            self.summary.passed += 1;
        } else {
            self.summary.failed += 1;
        }
        self.exit_status = if self.summary.failed == 0 { 0 } else { 1 };
    }

    pub fn attach_results<T: Serialize>(&mut self, results: &T) {
        self.results = Some(serde_json::to_value(results).expect("serializable results"));
    }

    pub fn to_json_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("serializable report");
        s.push('\n');
        s
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", self.command));
        for check in &self.checks {
            let status = if check.pass { "PASS" } else { "FAIL" };
            match &check.witness {
                Some(w) => out.push_str(&format!("{status} {} ({w})\n", check.name)),
                None => out.push_str(&format!("{status} {}\n", check.name)),
            }
        }
        out.push_str(&format!(
            "summary: {} passed, {} failed\n",
            self.summary.passed, self.summary.failed
        ));
        out
    }
}
