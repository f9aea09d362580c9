//! Instrumented elimination runs: survivor gaps per phase and phase counts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{binomial_allowance, status, CheckResult, VerifyError};
use crate::env::{make_stochastic_env, GraphSource, LossModel};
use crate::graph::FeedbackGraph;
use crate::harness::run_episode;
use crate::learners::{max_phases_bound, EliminationLearner, SamplerVariant};
use crate::seed::{derive_seed, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationCheck {
    /// Bernoulli means, one per action.
    pub means: Vec<f64>,
    pub graph: FeedbackGraph,
    pub t: usize,
    pub trials: usize,
}

impl Default for EliminationCheck {
    fn default() -> Self {
        EliminationCheck {
            means: vec![0.25, 0.75],
            graph: FeedbackGraph::complete(2).expect("k > 0"),
            t: 10_000,
            trials: 200,
        }
    }
}

struct Run {
    /// Per completed phase: some survivor has gap > 4 eps_r.
    violations: Vec<bool>,
    /// Completed phases; a phase cut off by the horizon does not count.
    phases: usize,
}

/// After phase `r` every survivor has gap at most `4 eps_r` except with
/// probability `1/T`; the number of phases is at most
/// `1/2 log2(3T / (32 ln 2KT) + 1)`.
pub fn check_elimination(cfg: &EliminationCheck, seed: u64) -> Result<CheckResult, VerifyError> {
    let k = cfg.means.len();
    if cfg.graph.num_actions() != k {
        return Err(VerifyError::Input(format!(
            "graph has {} actions, means have {k}",
            cfg.graph.num_actions()
        )));
    }
    if cfg.trials == 0 || cfg.t == 0 {
        return Err(VerifyError::Input("t and trials must be positive".into()));
    }
    let model = LossModel::bernoulli(&cfg.means).map_err(|e| VerifyError::Input(e.to_string()))?;
    let gaps = model.gaps();
    let runs: Vec<Run> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, i as u64);
            let env = make_stochastic_env(model.clone(), GraphSource::Fixed(cfg.graph.clone()), cfg.t, s)
                .map_err(|e| VerifyError::Input(e.to_string()))?;
            let mut learner =
                EliminationLearner::new(k, cfg.t, SamplerVariant::Base, derive_seed(s, stream::LEARNER))
                    .map_err(|e| VerifyError::Input(e.to_string()))?;
            let ep = run_episode(env, &mut learner).map_err(|e| VerifyError::Input(e.to_string()))?;
            let log = ep.trace.phase_log.unwrap_or_default();
            let violations = log
                .iter()
                .map(|p| p.surviving.iter().any(|&v| gaps[v] > 4.0 * p.eps))
                .collect();
            Ok(Run {
                violations,
                phases: log.len(),
            })
        })
        .collect::<Result<_, VerifyError>>()?;

    let claimed = 1.0 / cfg.t as f64;
    let max_phase = runs.iter().map(|r| r.violations.len()).max().unwrap_or(0);
    let mut per_phase = Vec::new();
    let mut ok = true;
    let mut failures = Vec::new();
    for r in 0..max_phase {
        let reached: Vec<bool> = runs.iter().filter_map(|run| run.violations.get(r).copied()).collect();
        let n = reached.len() as u64;
        let bad = reached.iter().filter(|&&b| b).count();
        let freq = bad as f64 / n as f64;
        let allowed = binomial_allowance(claimed, n);
        if freq > allowed {
            ok = false;
            failures.push(format!("phase {}: violation frequency {freq} > {allowed}", r + 1));
        }
        per_phase.push(json!({"phase": r + 1, "runs": n, "violations": bad, "frequency": freq, "allowed": allowed}));
    }
    let r_bar = max_phases_bound(k, cfg.t);
    let max_phases = runs.iter().map(|r| r.phases).max().unwrap_or(0);
    if max_phases as f64 > r_bar {
        ok = false;
        failures.push(format!("{max_phases} phases > bound {r_bar}"));
    }
    Ok(CheckResult {
        name: "elimination".into(),
        property: "after phase r every surviving action has gap <= 4 eps_r w.p. >= 1 - 1/T; \
                   the number of phases R <= 1/2 log2(3T / (32 ln 2KT) + 1)"
            .into(),
        status: status(ok),
        measured: json!({"per_phase": per_phase, "max_phases": max_phases}),
        bound: json!({"violation_probability": claimed, "phase_bound": r_bar}),
        tolerance: 3.0,
        sample_size: cfg.trials as u64,
        seed,
        config: serde_json::to_value(cfg).expect("serializable"),
        detail: if failures.is_empty() {
            "no violations".into()
        } else {
            failures.join("; ")
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gap_never_violates() {
        let cfg = EliminationCheck {
            means: vec![0.5, 0.5, 0.5],
            graph: FeedbackGraph::complete(3).unwrap(),
            t: 3000,
            trials: 20,
        };
        let r = check_elimination(&cfg, 0).unwrap();
        assert!(r.passed(), "{r:#?}");
    }
}
