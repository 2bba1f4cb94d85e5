use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// Outcome of one invariant check. `measured` is the extreme value observed
/// (a minimum or maximum depending on the property), compared to `bound`
/// with slack `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// The property being certified, in words.
    pub property: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub samples: u64,
}

impl Check {
    /// Passes iff `measured ≥ bound − tolerance`.
    pub fn at_least(name: &str, property: &str, measured: f64, bound: f64, tolerance: f64, samples: u64) -> Self {
        Check {
            name: name.to_string(),
            property: property.to_string(),
            passed: measured >= bound - tolerance,
            measured,
            bound,
            tolerance,
            samples,
        }
    }

    /// Passes iff `measured ≤ bound + tolerance`.
    pub fn at_most(name: &str, property: &str, measured: f64, bound: f64, tolerance: f64, samples: u64) -> Self {
        Check {
            name: name.to_string(),
            property: property.to_string(),
            passed: measured <= bound + tolerance,
            measured,
            bound,
            tolerance,
            samples,
        }
    }

    /// Forces failure, e.g. when a side condition of the check is violated.
    pub fn and(mut self, ok: bool) -> Self {
        self.passed &= ok;
        self
    }
}

/// Ordered collection of checks.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CertificateReport {
    pub checks: Vec<Check>,
}

impl CertificateReport {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// One JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for c in &self.checks {
            serde_json::to_writer(&mut out, c)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    /// Columns `name,property,passed,measured,bound,tolerance,samples`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for c in &self.checks {
            w.serialize(c)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons_and_serialization() {
        let mut r = CertificateReport::default();
        r.push(Check::at_least("a", "x ≥ 1", 1.0 - 1e-13, 1.0, 1e-12, 3));
        r.push(Check::at_most("b", "y ≤ 0", 0.5, 0.0, 0.0, 1));
        assert!(r.checks[0].passed && !r.checks[1].passed);
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
        let mut buf = Vec::new();
        r.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("\"name\":\"a\""));
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("name,property,passed,measured,bound,tolerance,samples\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
