//! The ten acceptance criteria, each with its own oracle, tolerance and time budget.
//! Shared by the `acceptance` test target and `qpfe selftest`.

mod channels;
mod misc;
mod scheme2;

use std::fmt;
use std::time::{Duration, Instant};

use crate::error::Result;

#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<26} {:>8.2}s / {:>4}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

/// What a criterion found: pass flag and a one-line summary of the measured numbers.
pub(crate) struct Finding {
    pub passed: bool,
    pub detail: String,
}

impl Finding {
    pub fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

type Check = fn() -> Result<Finding>;

const CRITERIA: [(u8, &str, u64, Check); 10] = [
    (1, "choi-identity", 1, channels::choi_identity),
    (2, "choi-round-trip", 10, channels::choi_round_trip),
    (3, "post-selection-rate", 30, channels::post_selection_rate),
    (4, "scheme2-correctness", 300, scheme2::correctness),
    (5, "one-time-pad-privacy", 60, scheme2::otp_privacy),
    (6, "hybrid-ladders", 600, scheme2::hybrid_ladders),
    (7, "experiment", 30, misc::experiment),
    (8, "qcp-loop", 60, misc::qcp_loop),
    (9, "clifford-sampler", 60, misc::clifford_sampler),
    (10, "determinism", 120, misc::determinism),
];

pub fn criterion_count() -> usize {
    CRITERIA.len()
}

/// Runs criterion `id` (1-based). A criterion that errors, or overruns its
/// budget, fails.
pub fn run_criterion(id: u8) -> Option<CriterionOutcome> {
    let &(id, title, budget, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let found = check();
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget);
    let (passed, detail) = match found {
        Ok(f) => (f.passed && elapsed < budget, f.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let detail = if elapsed >= budget {
        format!("{detail}; over time budget")
    } else {
        detail
    };
    Some(CriterionOutcome {
        id,
        title,
        passed,
        detail,
        elapsed,
        budget,
    })
}

/// Runs every criterion in order, handing each outcome to `report` as it finishes.
pub fn run_all(mut report: impl FnMut(&CriterionOutcome)) -> Vec<CriterionOutcome> {
    CRITERIA
        .iter()
        .filter_map(|c| {
            let out = run_criterion(c.0)?;
            report(&out);
            Some(out)
        })
        .collect()
}
