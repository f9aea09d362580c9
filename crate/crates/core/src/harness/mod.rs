//! Episode execution, regret accounting and Monte Carlo replication.

mod sweep;

pub use sweep::{
    parse_config, run_sweep, set_pointer, SummaryRow, SweepAxis, SweepCell, SweepConfig, SweepError,
    SweepResult,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::env::{EnvConfig, EnvError, EnvOracle, Environment, RoundRecord, StepSession};
use crate::learners::{Learner, LearnerConfig, LearnerError, PhaseRecord};
use crate::seed::{derive_seed, stream};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("round {round}: learner chose action {action}, but there are only {k} actions")]
    Protocol { round: usize, action: usize, k: usize },
    #[error("trace and oracle do not belong to the same episode: {0}")]
    OracleMismatch(String),
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error("replicate {replicate}: {source}")]
    Replicate {
        replicate: usize,
        source: Box<HarnessError>,
    },
}

/// What happened in one episode, as seen from outside the environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub episode_seed: u64,
    pub horizon: usize,
    pub rounds: Vec<RoundRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_log: Option<Vec<PhaseRecord>>,
}

#[derive(Debug, Clone)]
pub struct Episode {
    pub trace: EpisodeTrace,
    /// Oracle view at the end of the episode; its own `trace` is left empty.
    pub oracle: EnvOracle,
}

/// Alternates choose, step and observe until the horizon is used up.
pub fn run_episode(mut env: Environment, learner: &mut dyn Learner) -> Result<Episode, HarnessError> {
    let k = env.num_actions();
    if learner.num_actions() != k {
        return Err(HarnessError::Config(format!(
            "learner has {} actions, environment has {k}",
            learner.num_actions()
        )));
    }
    while !env.is_exhausted() {
        let action = learner.choose();
        if action >= k {
            return Err(HarnessError::Protocol {
                round: env.rounds_elapsed() + 1,
                action,
                k,
            });
        }
        let obs = env.step(action)?;
        learner.observe(&obs);
    }
    let mut oracle = env.into_oracle();
    let rounds = std::mem::take(&mut oracle.trace);
    Ok(Episode {
        trace: EpisodeTrace {
            episode_seed: oracle.episode_seed,
            horizon: oracle.horizon,
            rounds,
            phase_log: learner.phase_log().map(<[_]>::to_vec),
        },
        oracle,
    })
}

fn check_match(trace: &EpisodeTrace, oracle: &EnvOracle) -> Result<(), HarnessError> {
    if trace.episode_seed != oracle.episode_seed {
        return Err(HarnessError::OracleMismatch(format!(
            "episode seeds {} and {}",
            trace.episode_seed, oracle.episode_seed
        )));
    }
    if trace.horizon != oracle.horizon || trace.rounds.len() > oracle.horizon {
        return Err(HarnessError::OracleMismatch(format!(
            "trace has {} of {} rounds, oracle horizon is {}",
            trace.rounds.len(),
            trace.horizon,
            oracle.horizon
        )));
    }
    if let Some(r) = trace.rounds.iter().find(|r| r.played >= oracle.gaps.len()) {
        return Err(HarnessError::OracleMismatch(format!(
            "round {} played action {} outside the oracle's {} actions",
            r.round,
            r.played,
            oracle.gaps.len()
        )));
    }
    Ok(())
}

/// `sum_t gap(v_t)`: the regret conditioned on the action sequence.
pub fn pseudo_regret(trace: &EpisodeTrace, oracle: &EnvOracle) -> Result<f64, HarnessError> {
    check_match(trace, oracle)?;
    Ok(trace.rounds.iter().map(|r| oracle.gaps[r.played]).sum())
}

/// `sum_t loss_t(v_t) - loss_t(v*)` with `v*` the oracle's best action.
/// Unbiased for the pseudo-regret.
pub fn realized_regret(trace: &EpisodeTrace, oracle: &EnvOracle) -> Result<f64, HarnessError> {
    check_match(trace, oracle)?;
    Ok(trace
        .rounds
        .iter()
        .map(|r| r.incurred_loss - r.comparator_loss)
        .sum())
}

/// Regret against the best fixed action in hindsight over the whole
/// episode.
pub fn hindsight_regret(trace: &EpisodeTrace, oracle: &EnvOracle) -> Result<f64, HarnessError> {
    check_match(trace, oracle)?;
    let incurred: f64 = trace.rounds.iter().map(|r| r.incurred_loss).sum();
    let best = oracle
        .cumulative_losses
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(incurred - best)
}

/// Rounds at which cumulative regret is recorded. The final round is
/// always included.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointSchedule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub every: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub at: Vec<usize>,
}

impl CheckpointSchedule {
    pub fn rounds(&self, horizon: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.at.iter().copied().filter(|&r| r >= 1 && r <= horizon).collect();
        if let Some(every) = self.every.filter(|&e| e > 0) {
            out.extend((every..=horizon).step_by(every));
        }
        out.push(horizon);
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    pub learner: LearnerConfig,
    pub t: usize,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<CheckpointSchedule>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.t == 0 {
            return Err(HarnessError::Config("t must be at least 1".into()));
        }
        if self.replicates == 0 {
            return Err(HarnessError::Config("replicates must be at least 1".into()));
        }
        if let Some(CheckpointSchedule { every: Some(0), .. }) = self.checkpoints {
            return Err(HarnessError::Config("checkpoints.every must be at least 1".into()));
        }
        self.env.validate(self.t)?;
        self.learner.build(self.env.num_actions(), self.t, 0)?;
        Ok(())
    }

    /// Hex SHA-256 of the config's compact JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        let hash = Sha256::digest(&json);
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn replicate_seed(&self, replicate: usize) -> u64 {
        derive_seed(self.seed, replicate as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Standard error of the mean, `sd / sqrt(n)` with the `n - 1`
    /// variance; 0 for a single replicate.
    pub se: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

impl Summary {
    /// Sums in slice order, so the result does not depend on scheduling.
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let se = if values.len() > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Summary {
            mean,
            se,
            ci95_low: mean - 1.96 * se,
            ci95_high: mean + 1.96 * se,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub replicate: usize,
    pub seed: u64,
    pub pseudo_regret: f64,
    pub realized_regret: f64,
    pub hindsight_regret: f64,
    pub rounds: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<PhaseRecord>>,
}

/// One row of the checkpoint CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRow {
    pub replicate: usize,
    pub round: usize,
    pub cum_pseudo_regret: f64,
    pub cum_realized_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub config_digest: String,
    pub master_seed: u64,
    pub learner: String,
    pub horizon: usize,
    pub replicates: usize,
    pub pseudo_regret: Summary,
    pub realized_regret: Summary,
    pub per_replicate: Vec<ReplicateResult>,
    #[serde(skip)]
    pub checkpoints: Vec<CheckpointRow>,
}

struct ReplicateOutput {
    result: ReplicateResult,
    checkpoints: Vec<CheckpointRow>,
}

fn run_replicate(
    config: &ExperimentConfig,
    replicate: usize,
    checkpoint_rounds: &[usize],
) -> Result<ReplicateOutput, HarnessError> {
    let seed = config.replicate_seed(replicate);
    let env = config.env.build(config.t, seed)?;
    let mut learner = config
        .learner
        .build(config.env.num_actions(), config.t, derive_seed(seed, stream::LEARNER))?;
    let episode = run_episode(env, learner.as_mut())?;
    let (trace, oracle) = (&episode.trace, &episode.oracle);

    let mut checkpoints = Vec::with_capacity(checkpoint_rounds.len());
    let mut next = checkpoint_rounds.iter().peekable();
    let (mut pseudo, mut realized) = (0.0, 0.0);
    for r in &trace.rounds {
        pseudo += oracle.gaps[r.played];
        realized += r.incurred_loss - r.comparator_loss;
        if next.peek() == Some(&&r.round) {
            next.next();
            checkpoints.push(CheckpointRow {
                replicate,
                round: r.round,
                cum_pseudo_regret: pseudo,
                cum_realized_regret: realized,
            });
        }
    }
    Ok(ReplicateOutput {
        result: ReplicateResult {
            replicate,
            seed,
            pseudo_regret: pseudo_regret(trace, oracle)?,
            realized_regret: realized_regret(trace, oracle)?,
            hindsight_regret: hindsight_regret(trace, oracle)?,
            rounds: trace.rounds.len(),
            phases: episode.trace.phase_log,
        },
        checkpoints,
    })
}

/// Runs the replicates in parallel on the current rayon pool. The report is
/// a function of the config alone.
pub fn monte_carlo(config: &ExperimentConfig) -> Result<RegretReport, HarnessError> {
    config.validate()?;
    let checkpoint_rounds = config
        .checkpoints
        .as_ref()
        .map(|c| c.rounds(config.t))
        .unwrap_or_default();
    let outputs: Vec<ReplicateOutput> = (0..config.replicates)
        .into_par_iter()
        .map(|i| {
            run_replicate(config, i, &checkpoint_rounds).map_err(|e| HarnessError::Replicate {
                replicate: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<_, _>>()?;

    let pseudo: Vec<f64> = outputs.iter().map(|o| o.result.pseudo_regret).collect();
    let realized: Vec<f64> = outputs.iter().map(|o| o.result.realized_regret).collect();
    let mut checkpoints = Vec::new();
    let mut per_replicate = Vec::with_capacity(outputs.len());
    for o in outputs {
        checkpoints.extend(o.checkpoints);
        per_replicate.push(o.result);
    }
    Ok(RegretReport {
        config_digest: config.digest(),
        master_seed: config.seed,
        learner: config.learner.name().to_string(),
        horizon: config.t,
        replicates: config.replicates,
        pseudo_regret: Summary::of(&pseudo),
        realized_regret: Summary::of(&realized),
        per_replicate,
        checkpoints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{make_stochastic_env, GraphSource, LossModel};
    use crate::graph::FeedbackGraph;
    use crate::learners::{EliminationLearner, SamplerVariant, Ucb1};

    struct Scripted {
        k: usize,
        actions: Vec<usize>,
        i: usize,
    }

    impl Learner for Scripted {
        fn num_actions(&self) -> usize {
            self.k
        }
        fn choose(&mut self) -> usize {
            let a = self.actions[self.i % self.actions.len()];
            self.i += 1;
            a
        }
        fn observe(&mut self, _: &crate::env::Observation) {}
    }

    fn const_env(values: &[f64], t: usize, seed: u64) -> Environment {
        let g = GraphSource::Fixed(FeedbackGraph::self_loops_only(values.len()).unwrap());
        make_stochastic_env(LossModel::constant(values).unwrap(), g, t, seed).unwrap()
    }

    #[test]
    fn pseudo_regret_sums_gaps() {
        let env = const_env(&[0.25, 0.65], 4, 0);
        let mut l = Scripted {
            k: 2,
            actions: vec![1, 1, 0, 0],
            i: 0,
        };
        let ep = run_episode(env, &mut l).unwrap();
        let r = pseudo_regret(&ep.trace, &ep.oracle).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
        assert!((realized_regret(&ep.trace, &ep.oracle).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(ep.trace.rounds.len(), 4);
        assert!(ep.trace.rounds.iter().all(|r| r.incurred_loss == [0.25, 0.65][r.played]));
    }

    #[test]
    fn adversarial_pseudo_regret_counts_target_plays() {
        let env = crate::env::make_adversarial_lb_env(16, 1024, false, 11).unwrap();
        let target = env.oracle().best_action;
        let other = (target + 1) % 16;
        let mut l = Scripted {
            k: 16,
            actions: vec![target, other],
            i: 0,
        };
        let ep = run_episode(env, &mut l).unwrap();
        assert_eq!(pseudo_regret(&ep.trace, &ep.oracle).unwrap(), 8.0);
    }

    #[test]
    fn invalid_action_names_the_round() {
        let env = const_env(&[0.1, 0.2], 10, 0);
        let mut l = Scripted {
            k: 2,
            actions: vec![0, 1, 0, 5],
            i: 0,
        };
        assert_eq!(
            run_episode(env, &mut l).unwrap_err(),
            HarnessError::Protocol {
                round: 4,
                action: 5,
                k: 2
            }
        );
    }

    #[test]
    fn mismatched_oracle_is_rejected() {
        let mut l = Ucb1::new(2).unwrap();
        let a = run_episode(const_env(&[0.1, 0.2], 10, 0), &mut l).unwrap();
        let mut l = Ucb1::new(2).unwrap();
        let b = run_episode(const_env(&[0.1, 0.2], 10, 1), &mut l).unwrap();
        assert!(pseudo_regret(&a.trace, &b.oracle).is_err());
        let mut short = a.trace.clone();
        short.horizon = 5;
        assert!(pseudo_regret(&short, &a.oracle).is_err());
    }

    #[test]
    fn phase_log_accounts_for_all_rounds_until_commit() {
        let losses = LossModel::bernoulli(&[0.2, 0.8]).unwrap();
        let g = GraphSource::Fixed(FeedbackGraph::complete(2).unwrap());
        let t = 20_000;
        let env = make_stochastic_env(losses, g, t, 5).unwrap();
        let mut l = EliminationLearner::new(2, t, SamplerVariant::Base, 5).unwrap();
        let ep = run_episode(env, &mut l).unwrap();
        let phases = ep.trace.phase_log.unwrap();
        assert_eq!(phases.last().unwrap().surviving, vec![0]);
        // On a clique each sampling call takes one round.
        let spent: usize = phases.iter().map(|p| p.rounds_spent).sum();
        assert_eq!(spent, phases.iter().map(|p| p.n).sum::<usize>());
        assert!(spent <= ep.trace.rounds.len());
    }

    #[test]
    fn summary_conventions() {
        let s = Summary::of(&[3.0]);
        assert_eq!((s.mean, s.se, s.ci95_low), (3.0, 0.0, 3.0));
        let s = Summary::of(&[1.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.se - 1.0).abs() < 1e-15);
    }

    #[test]
    fn checkpoint_rounds() {
        let c = CheckpointSchedule {
            every: Some(4),
            at: vec![1, 5, 100],
        };
        assert_eq!(c.rounds(10), vec![1, 4, 5, 8, 10]);
        assert_eq!(CheckpointSchedule::default().rounds(7), vec![7]);
    }

    fn config(json: &str) -> ExperimentConfig {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn monte_carlo_is_reproducible_and_zero_gap_is_zero() {
        let c = config(
            r#"{"env":{"type":"stochastic","k":3,
                 "losses":{"bernoulli":[0.4,0.4,0.4]},
                 "graphs":{"type":"iid_erdos_renyi","p":0.3}},
                "learner":{"type":"elimination"},"t":3000,"replicates":6,"seed":9,
                "checkpoints":{"every":1000}}"#,
        );
        let a = monte_carlo(&c).unwrap();
        let b = monte_carlo(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.checkpoints, b.checkpoints);
        assert_eq!(a.pseudo_regret.mean, 0.0);
        assert_eq!(a.checkpoints.len(), 18);
        assert_eq!(a.config_digest.len(), 64);
    }

    #[test]
    fn single_replicate_has_zero_se() {
        let c = config(
            r#"{"env":{"type":"strongly_obs_lb","chi":1},
                "learner":{"type":"ucb"},"t":200}"#,
        );
        let r = monte_carlo(&c).unwrap();
        assert_eq!(r.replicates, 1);
        assert_eq!(r.pseudo_regret.se, 0.0);
        assert_eq!(r.pseudo_regret.mean, r.per_replicate[0].pseudo_regret);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut c = config(
            r#"{"env":{"type":"strongly_obs_lb"},"learner":{"type":"ucb"},"t":10}"#,
        );
        c.replicates = 0;
        assert!(matches!(monte_carlo(&c), Err(HarnessError::Config(_))));
        c.replicates = 1;
        c.t = 0;
        assert!(monte_carlo(&c).is_err());
    }
}
