//! Executable checks of the quantitative claims behind the algorithms and
//! the lower-bound constructions.
//!
//! Exact checks compare finite computations with a `1e-12` rounding slack.
//! Statistical checks allow three binomial standard errors above the
//! claimed probability and always report their sample size and seed.

mod elimination;
mod sampling;
mod tables;

pub use elimination::{check_elimination, EliminationCheck};
pub use sampling::{
    check_alpha_sample, check_er_independence, check_expected_observed, check_sequence_alpha,
    check_turan, er_alpha_bound, AlphaSampleCheck, ErIndependenceCheck, ExpectedObservedCheck,
    GraphFamily, SequenceAlphaCheck, TuranCheck, SEQUENCE_ALPHA_CAP,
};
pub use tables::{
    check_fig1, check_fig2, fig1_joint, fig1_view, fig2_joint, fig2_view, Fig1Check, Fig2Check,
    ViewTriple,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::seed::derive_seed;

/// Slack allowed on exact computations.
pub const EXACT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("unknown check {0:?}; known checks: {known}", known = CHECK_NAMES.join(", "))]
    UnknownCheck(String),
    #[error("invalid check input: {0}")]
    Input(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// The property being checked, in words.
    pub property: String,
    pub status: Status,
    pub measured: Value,
    pub bound: Value,
    pub tolerance: f64,
    pub sample_size: u64,
    pub seed: u64,
    /// Everything needed to rerun the check.
    pub config: Value,
    pub detail: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

pub(crate) fn status(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

/// `p + 3 sqrt(p (1 - p) / n)`.
pub fn binomial_allowance(p: f64, n: u64) -> f64 {
    p + 3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

pub const CHECK_NAMES: [&str; 8] = [
    "fig1",
    "fig2",
    "expected_observed",
    "turan",
    "alpha_sample",
    "er_independence",
    "sequence_alpha",
    "elimination",
];

/// Runs one named check with its default parameters.
pub fn run_check(name: &str, seed: u64) -> Result<CheckResult, VerifyError> {
    match name {
        "fig1" => Ok(check_fig1(&Fig1Check::default(), seed)),
        "fig2" => Ok(check_fig2(&Fig2Check::default(), seed)),
        "expected_observed" => check_expected_observed(&ExpectedObservedCheck::default(), seed),
        "turan" => Ok(check_turan(&TuranCheck::default(), seed)),
        "alpha_sample" => check_alpha_sample(&AlphaSampleCheck::default(), seed),
        "er_independence" => check_er_independence(&ErIndependenceCheck::default(), seed),
        "sequence_alpha" => check_sequence_alpha(&SequenceAlphaCheck::default(), seed),
        "elimination" => check_elimination(&EliminationCheck::default(), seed),
        other => Err(VerifyError::UnknownCheck(other.to_string())),
    }
}

/// Runs the checks named in `only` (all of them when empty) in suite order.
/// Check `i` of the suite gets seed `derive_seed(master_seed, i)` whether or
/// not the others run.
pub fn run_suite(only: &[String], master_seed: u64) -> Result<Vec<CheckResult>, VerifyError> {
    if let Some(bad) = only.iter().find(|n| !CHECK_NAMES.contains(&n.as_str())) {
        return Err(VerifyError::UnknownCheck(bad.clone()));
    }
    let selected: Vec<(usize, &str)> = CHECK_NAMES
        .iter()
        .enumerate()
        .filter(|(_, n)| only.is_empty() || only.iter().any(|o| o == *n))
        .map(|(i, n)| (i, *n))
        .collect();
    selected
        .into_par_iter()
        .map(|(i, name)| run_check(name, derive_seed(master_seed, i as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_names_are_rejected() {
        assert!(matches!(
            run_suite(&["nope".into()], 0),
            Err(VerifyError::UnknownCheck(_))
        ));
    }

    #[test]
    fn allowance() {
        assert!((binomial_allowance(0.1, 10_000) - 0.109).abs() < 1e-12);
        assert_eq!(binomial_allowance(0.0, 10), 0.0);
    }

    #[test]
    fn subset_keeps_suite_seeds() {
        let a = run_suite(&["fig1".into(), "fig2".into()], 3).unwrap();
        let b = run_suite(&["fig2".into()], 3).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[1], b[0]);
        assert!(a.iter().all(CheckResult::passed), "{a:#?}");
    }
}
