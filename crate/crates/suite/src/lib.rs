//! Runner for the acceptance checks: each check reports one line and the
//! process fails if any check does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

/// Ok carries a short summary, Err the reason for failing.
pub type CheckResult = Result<String, String>;

pub struct Suite {
    results: Vec<(usize, &'static str, bool)>,
}

impl Default for Suite {
    fn default() -> Self {
        Self::new()
    }
}

impl Suite {
    pub fn new() -> Self {
        Suite { results: Vec::new() }
    }

    pub fn check<F: FnOnce() -> CheckResult>(&mut self, id: usize, title: &'static str, f: F) {
        let start = Instant::now();
        let res = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => r,
            Err(p) => Err(match p.downcast_ref::<String>() {
                Some(s) => format!("panicked: {s}"),
                None => match p.downcast_ref::<&str>() {
                    Some(s) => format!("panicked: {s}"),
                    None => "panicked".to_string(),
                },
            }),
        };
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &res {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {id:>2} {tag} [{secs:>6.1}s] {title}: {detail}");
        self.results.push((id, title, res.is_ok()));
    }

    /// Prints the tally and returns the process exit status.
    pub fn finish(self) -> std::process::ExitCode {
        let failed: Vec<String> = self
            .results
            .iter()
            .filter(|r| !r.2)
            .map(|r| r.0.to_string())
            .collect();
        println!(
            "acceptance: {} of {} criteria pass",
            self.results.len() - failed.len(),
            self.results.len()
        );
        if failed.is_empty() {
            std::process::ExitCode::SUCCESS
        } else {
            println!("failing criteria: {}", failed.join(", "));
            std::process::ExitCode::FAILURE
        }
    }
}

/// Collects mismatches; `ok` turns them into a [`CheckResult`].
#[derive(Default)]
pub struct Findings {
    problems: Vec<String>,
}

impl Findings {
    pub fn expect(&mut self, cond: bool, what: impl FnOnce() -> String) {
        if !cond {
            self.problems.push(what());
        }
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn ok(self, summary: impl Into<String>) -> CheckResult {
        if self.problems.is_empty() {
            Ok(summary.into())
        } else {
            Err(self.problems.join("; "))
        }
    }
}
