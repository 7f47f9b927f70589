use serde::Serialize;

/// Outcome of one verified claim.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Report {
    pub claim: String,
    pub passed: bool,
    pub details: Vec<String>,
}

impl Report {
    pub fn new(claim: impl Into<String>) -> Self {
        Report { claim: claim.into(), passed: true, details: Vec::new() }
    }

    pub fn fail(&mut self, msg: impl Into<String>) {
        self.passed = false;
        if self.details.len() < 20 {
            self.details.push(msg.into());
        }
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.details.push(msg.into());
    }

    pub fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.fail(msg());
        }
    }

    pub fn absorb(&mut self, other: &Report) {
        if !other.passed {
            self.passed = false;
            for d in &other.details {
                self.fail(format!("{}: {}", other.claim, d));
            }
        }
    }
}
