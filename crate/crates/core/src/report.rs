//! Machine-readable verification reports.

use serde::Serialize;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LevelCheck {
    pub n: usize,
    pub max_deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub levels: Vec<LevelCheck>,
    /// Human-readable description of each failing item.
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: true,
            max_deviation: 0.0,
            levels: Vec::new(),
            failures: Vec::new(),
        }
    }

    /// Records one item checked at level `n`.
    pub fn record(
        &mut self,
        n: usize,
        deviation: f64,
        ok: bool,
        describe: impl FnOnce() -> String,
    ) {
        let deviation = if deviation.is_nan() {
            f64::INFINITY
        } else {
            deviation
        };
        let slot = match self.levels.iter().position(|l| l.n == n) {
            Some(i) => i,
            None => {
                self.levels.push(LevelCheck {
                    n,
                    max_deviation: 0.0,
                    passed: true,
                });
                self.levels.len() - 1
            }
        };
        let level = &mut self.levels[slot];
        level.max_deviation = level.max_deviation.max(deviation);
        self.max_deviation = self.max_deviation.max(deviation);
        if !ok {
            level.passed = false;
            self.passed = false;
            self.failures.push(describe());
        }
    }

    pub fn first_failing_level(&self) -> Option<usize> {
        self.levels.iter().filter(|l| !l.passed).map(|l| l.n).min()
    }

    pub fn summary_line(&self) -> String {
        match self.first_failing_level() {
            None => format!(
                "{}: pass (max deviation {:e})",
                self.name, self.max_deviation
            ),
            Some(n) => format!(
                "{}: FAIL at level {n} (max deviation {:e})",
                self.name, self.max_deviation
            ),
        }
    }
}

/// Tolerance scale for comparing two quantities of magnitude up to `magnitude`.
pub(crate) fn scaled(tol: f64, magnitude: f64) -> f64 {
    tol * magnitude.max(1.0)
}
