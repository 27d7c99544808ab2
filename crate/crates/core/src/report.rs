use serde::Serialize;

/// One verified assertion: what was checked, the threshold, and the value seen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub assertion: String,
    pub tolerance: f64,
    pub observed: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub name: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(name: impl Into<String>) -> Self {
        Report { name: name.into(), checks: Vec::new() }
    }

    /// Passes when `observed <= tolerance`. NaN never passes.
    pub fn check_le(&mut self, assertion: impl Into<String>, observed: f64, tolerance: f64) -> bool {
        let passed = observed <= tolerance;
        self.checks.push(Check { assertion: assertion.into(), tolerance, observed, passed });
        passed
    }

    /// Exact integer equality, recorded as `|a - b| <= 0`.
    pub fn check_eq(&mut self, assertion: impl Into<String>, a: usize, b: usize) -> bool {
        self.check_le(assertion, (a as f64 - b as f64).abs(), 0.0)
    }

    pub fn check_true(&mut self, assertion: impl Into<String>, ok: bool) -> bool {
        self.checks.push(Check {
            assertion: assertion.into(),
            tolerance: 0.0,
            observed: if ok { 0.0 } else { 1.0 },
            passed: ok,
        });
        ok
    }

    pub fn absorb(&mut self, other: Report) {
        let prefix = other.name;
        self.checks.extend(other.checks.into_iter().map(|mut c| {
            c.assertion = format!("{prefix}: {}", c.assertion);
            c
        }));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Largest observed value among checks whose assertion contains `needle`.
    pub fn max_observed(&self, needle: &str) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.assertion.contains(needle))
            .map(|c| c.observed)
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_fails() {
        let mut r = Report::new("t");
        assert!(!r.check_le("nan", f64::NAN, 1.0));
        assert!(!r.passed());
    }

    #[test]
    fn absorb_prefixes() {
        let mut a = Report::new("a");
        let mut b = Report::new("b");
        b.check_true("x", true);
        a.absorb(b);
        assert_eq!(a.checks[0].assertion, "b: x");
        assert!(a.passed());
    }
}
