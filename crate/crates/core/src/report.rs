//! Machine-readable results of the exact verification suites.

use serde::{Deserialize, Serialize};

/// One checked identity instance with both sides rendered exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityEntry {
    /// Which identity, e.g. "green-diag-sum" or "martin-kernel".
    pub identity: String,
    /// Vertex/leaf ids (or function indices) locating the instance.
    pub location: Vec<usize>,
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
}

/// Aggregate over one suite: how many instances were checked, every
/// failure in full, and a bounded sample of passing entries so reports stay
/// readable on large trees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub theorem: String,
    pub instances: usize,
    pub failures: Vec<IdentityEntry>,
    pub samples: Vec<IdentityEntry>,
}

const SAMPLE_LIMIT: usize = 5;

impl CheckReport {
    pub fn new(theorem: impl Into<String>) -> CheckReport {
        CheckReport { theorem: theorem.into(), instances: 0, failures: Vec::new(), samples: Vec::new() }
    }

    pub fn record(&mut self, entry: IdentityEntry) {
        self.instances += 1;
        if !entry.pass {
            self.failures.push(entry);
        } else if self.samples.len() < SAMPLE_LIMIT {
            self.samples.push(entry);
        }
    }

    /// Record an outcome, building the (string-heavy) entry only when it
    /// will actually be stored. Bulk exact checkers run millions of
    /// comparisons; rendering every passing value would dominate them.
    pub fn record_with(&mut self, pass: bool, make: impl FnOnce() -> IdentityEntry) {
        self.instances += 1;
        if !pass {
            let mut entry = make();
            entry.pass = false;
            self.failures.push(entry);
        } else if self.samples.len() < SAMPLE_LIMIT {
            let mut entry = make();
            entry.pass = true;
            self.samples.push(entry);
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Fold another report of the same suite into this one.
    pub fn absorb(&mut self, other: CheckReport) {
        self.instances += other.instances;
        self.failures.extend(other.failures);
        for s in other.samples {
            if self.samples.len() < SAMPLE_LIMIT {
                self.samples.push(s);
            }
        }
    }
}
