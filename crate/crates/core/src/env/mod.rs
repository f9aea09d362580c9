//! Sealed environments.
//!
//! Learners interact with an [`Environment`] only through [`StepSession`],
//! which hands back an [`Observation`]: the played action plus the losses of
//! its out-neighbourhood in the hidden graph. The graph itself, the loss
//! vector and the optimal action stay inside the environment and are
//! reachable only through [`Environment::oracle`], which the harness uses
//! for regret accounting.

mod loss;
mod lower_bound;
mod source;

pub use loss::{LossDist, LossModel, LossSpec};
pub use lower_bound::{
    strongly_obs_pattern_probability, strongly_obs_v_mean, AdversarialLbParams,
    AdversarialLbProcess, Chi, EdgePattern, StronglyObsLbProcess, ACTION_U, ACTION_V,
    CONDITIONED_ALPHA_CAP,
};
pub use source::{two_action_pattern_cycle, GraphSource, GraphSourceSpec};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Action, FeedbackGraph, GraphError};
use crate::seed::{derive_seed, rng_from_seed, stream};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{what} describe {found} actions but the environment has {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("action {action} is not one of the {k} actions")]
    InvalidAction { action: usize, k: usize },
    #[error("horizon of {horizon} rounds exhausted")]
    Exhausted { horizon: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// What the learner sees after one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// 1-based round index.
    pub round: usize,
    pub played: Action,
    /// `(w, loss of w)` for every `w` with `played -> w` in the hidden graph,
    /// in increasing action order.
    pub feedback: Vec<(Action, f64)>,
}

impl Observation {
    pub fn from_graph(round: usize, played: Action, graph: &FeedbackGraph, losses: &[f64]) -> Self {
        let feedback = graph
            .out_neighborhood(played)
            .expect("played action validated")
            .iter()
            .map(|w| (w, losses[w]))
            .collect();
        Observation {
            round,
            played,
            feedback,
        }
    }

    pub fn loss_of(&self, a: Action) -> Option<f64> {
        self.feedback.iter().find(|(w, _)| *w == a).map(|&(_, l)| l)
    }

    /// Present iff the played action had a self-loop this round.
    pub fn own_loss(&self) -> Option<f64> {
        self.loss_of(self.played)
    }
}

/// The learner-facing interface.
pub trait StepSession {
    fn num_actions(&self) -> usize;
    fn step(&mut self, action: Action) -> Result<Observation, EnvError>;
}

/// One row of the oracle trace (and of the per-round CSV export).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub played: Action,
    pub incurred_loss: f64,
    pub observed_count: usize,
    pub comparator_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HiddenParams {
    Stochastic,
    AdversarialLb {
        target: Action,
        epsilon: f64,
        conditioned: bool,
        rejected_draws: u64,
    },
    StronglyObsLb {
        chi: Chi,
    },
}

/// Harness-only view of an environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvOracle {
    pub episode_seed: u64,
    pub horizon: usize,
    pub best_action: Action,
    pub means: Vec<f64>,
    pub gaps: Vec<f64>,
    pub hidden: HiddenParams,
    pub trace: Vec<RoundRecord>,
    /// Sum of realized losses per action over the rounds played so far.
    pub cumulative_losses: Vec<f64>,
    /// Full loss vectors, one per round, when recording was enabled.
    pub loss_matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone)]
enum Process {
    Stochastic { losses: LossModel, graphs: GraphSource },
    AdversarialLb(AdversarialLbProcess),
    StronglyObsLb(StronglyObsLbProcess),
}

#[derive(Debug, Clone)]
pub struct Environment {
    k: usize,
    horizon: usize,
    round: usize,
    episode_seed: u64,
    process: Process,
    loss_rng: ChaCha8Rng,
    graph_rng: ChaCha8Rng,
    losses: Vec<f64>,
    trace: Vec<RoundRecord>,
    cumulative: Vec<f64>,
    loss_matrix: Option<Vec<Vec<f64>>>,
}

/// Stochastic environment: `losses` i.i.d. per round, `graphs` from their
/// own source. Losses and graphs use separate random streams derived from
/// `seed`, so they are independent by construction.
pub fn make_stochastic_env(
    losses: LossModel,
    graphs: GraphSource,
    horizon: usize,
    seed: u64,
) -> Result<Environment, EnvError> {
    if losses.num_actions() != graphs.num_actions() {
        return Err(EnvError::DimensionMismatch {
            what: "graphs",
            expected: losses.num_actions(),
            found: graphs.num_actions(),
        });
    }
    Environment::new(
        losses.num_actions(),
        horizon,
        seed,
        Process::Stochastic { losses, graphs },
    )
}

/// Hidden-target construction with `epsilon = sqrt(k / horizon) / 8`; the
/// target is drawn uniformly from the setup stream of `seed`.
pub fn make_adversarial_lb_env(
    k: usize,
    horizon: usize,
    condition_alpha_9: bool,
    seed: u64,
) -> Result<Environment, EnvError> {
    let params = AdversarialLbParams::for_horizon(k, horizon)?;
    let target = rng_from_seed(derive_seed(seed, stream::SETUP)).random_range(0..k);
    let process = AdversarialLbProcess::new(params, target, condition_alpha_9)?;
    Environment::from_adversarial_process(process, horizon, seed)
}

/// Two-action construction; `chi = None` draws it uniformly from the setup
/// stream of `seed`.
pub fn make_strongly_obs_lb_env(
    chi: Option<Chi>,
    horizon: usize,
    seed: u64,
) -> Result<Environment, EnvError> {
    let chi = chi.unwrap_or_else(|| {
        if rng_from_seed(derive_seed(seed, stream::SETUP)).random_bool(0.5) {
            Chi::One
        } else {
            Chi::Two
        }
    });
    Environment::new(
        2,
        horizon,
        seed,
        Process::StronglyObsLb(StronglyObsLbProcess::new(chi)),
    )
}

impl Environment {
    fn new(k: usize, horizon: usize, seed: u64, process: Process) -> Result<Self, EnvError> {
        if horizon == 0 {
            return Err(EnvError::Input("horizon must be at least 1".into()));
        }
        Ok(Environment {
            k,
            horizon,
            round: 0,
            episode_seed: seed,
            process,
            loss_rng: rng_from_seed(derive_seed(seed, stream::LOSSES)),
            graph_rng: rng_from_seed(derive_seed(seed, stream::GRAPHS)),
            losses: vec![0.0; k],
            trace: Vec::with_capacity(horizon.min(1 << 20)),
            cumulative: vec![0.0; k],
            loss_matrix: None,
        })
    }

    /// Wraps an explicitly parameterized hidden-target process, e.g. one
    /// with a custom `epsilon`.
    pub fn from_adversarial_process(
        process: AdversarialLbProcess,
        horizon: usize,
        seed: u64,
    ) -> Result<Self, EnvError> {
        Self::new(process.params().k, horizon, seed, Process::AdversarialLb(process))
    }

    /// Keep every realized loss vector in the oracle (memory `O(k * horizon)`).
    pub fn record_loss_matrix(mut self) -> Self {
        self.loss_matrix = Some(Vec::new());
        self
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn rounds_elapsed(&self) -> usize {
        self.round
    }

    pub fn is_exhausted(&self) -> bool {
        self.round >= self.horizon
    }

    fn comparator(&self) -> Action {
        match &self.process {
            Process::Stochastic { losses, .. } => losses.best_action(),
            Process::AdversarialLb(p) => p.target(),
            Process::StronglyObsLb(p) => {
                if strongly_obs_v_mean(p.chi()) < 0.5 {
                    ACTION_V
                } else {
                    ACTION_U
                }
            }
        }
    }

    fn means(&self) -> Vec<f64> {
        match &self.process {
            Process::Stochastic { losses, .. } => losses.means(),
            Process::AdversarialLb(p) => {
                let t = p.target();
                (0..self.k).map(|v| p.params().loss_mean(v == t)).collect()
            }
            Process::StronglyObsLb(p) => vec![0.5, strongly_obs_v_mean(p.chi())],
        }
    }

    pub fn oracle(&self) -> EnvOracle {
        let means = self.means();
        let best_action = self.comparator();
        let gaps = means.iter().map(|m| m - means[best_action]).collect();
        let hidden = match &self.process {
            Process::Stochastic { .. } => HiddenParams::Stochastic,
            Process::AdversarialLb(p) => HiddenParams::AdversarialLb {
                target: p.target(),
                epsilon: p.params().epsilon,
                conditioned: p.is_conditioned(),
                rejected_draws: p.rejected_draws(),
            },
            Process::StronglyObsLb(p) => HiddenParams::StronglyObsLb { chi: p.chi() },
        };
        EnvOracle {
            episode_seed: self.episode_seed,
            horizon: self.horizon,
            best_action,
            means,
            gaps,
            hidden,
            trace: self.trace.clone(),
            cumulative_losses: self.cumulative.clone(),
            loss_matrix: self.loss_matrix.clone(),
        }
    }

    pub fn into_oracle(self) -> EnvOracle {
        let mut oracle = self.oracle();
        oracle.trace = self.trace;
        oracle
    }

    pub fn episode_seed(&self) -> u64 {
        self.episode_seed
    }
}

impl StepSession for Environment {
    fn num_actions(&self) -> usize {
        self.k
    }

    fn step(&mut self, action: Action) -> Result<Observation, EnvError> {
        if self.round >= self.horizon {
            return Err(EnvError::Exhausted {
                horizon: self.horizon,
            });
        }
        if action >= self.k {
            return Err(EnvError::InvalidAction { action, k: self.k });
        }
        let comparator = self.comparator();
        self.round += 1;
        let graph = match &mut self.process {
            Process::Stochastic { losses, graphs } => {
                losses.sample_into(&mut self.loss_rng, &mut self.losses);
                graphs.next_graph(&mut self.graph_rng)
            }
            Process::AdversarialLb(p) => {
                p.next_round(&mut self.loss_rng, &mut self.graph_rng, &mut self.losses)
            }
            Process::StronglyObsLb(p) => {
                p.next_round(&mut self.loss_rng, &mut self.graph_rng, &mut self.losses)
            }
        };
        let obs = Observation::from_graph(self.round, action, graph, &self.losses);
        self.trace.push(RoundRecord {
            round: self.round,
            played: action,
            incurred_loss: self.losses[action],
            observed_count: obs.feedback.len(),
            comparator_loss: self.losses[comparator],
        });
        for (c, l) in self.cumulative.iter_mut().zip(&self.losses) {
            *c += l;
        }
        if let Some(m) = &mut self.loss_matrix {
            m.push(self.losses.clone());
        }
        Ok(obs)
    }
}

/// `chi` in configs: `1`, `2` or `"random"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ChiRepr", into = "ChiRepr")]
pub enum ChiSpec {
    Fixed(Chi),
    Random,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ChiRepr {
    Index(u8),
    Word(String),
}

impl TryFrom<ChiRepr> for ChiSpec {
    type Error = String;

    fn try_from(r: ChiRepr) -> Result<Self, Self::Error> {
        match r {
            ChiRepr::Index(i) => Chi::from_index(i).map(ChiSpec::Fixed).map_err(|e| e.to_string()),
            ChiRepr::Word(w) if w == "random" => Ok(ChiSpec::Random),
            ChiRepr::Word(w) => Err(format!("chi must be 1, 2 or \"random\", got {w:?}")),
        }
    }
}

impl From<ChiSpec> for ChiRepr {
    fn from(c: ChiSpec) -> Self {
        match c {
            ChiSpec::Fixed(chi) => ChiRepr::Index(chi.index()),
            ChiSpec::Random => ChiRepr::Word("random".into()),
        }
    }
}

fn default_chi() -> ChiSpec {
    ChiSpec::Random
}

/// Environment section of an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EnvConfig {
    Stochastic {
        k: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t: Option<usize>,
        losses: LossSpec,
        graphs: GraphSourceSpec,
    },
    AdversarialLb {
        k: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t: Option<usize>,
        #[serde(default)]
        condition_alpha_9: bool,
    },
    StronglyObsLb {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t: Option<usize>,
        #[serde(default = "default_chi")]
        chi: ChiSpec,
    },
}

impl EnvConfig {
    pub fn num_actions(&self) -> usize {
        match self {
            EnvConfig::Stochastic { k, .. } | EnvConfig::AdversarialLb { k, .. } => *k,
            EnvConfig::StronglyObsLb { k, .. } => k.unwrap_or(2),
        }
    }

    pub fn horizon(&self) -> Option<usize> {
        match self {
            EnvConfig::Stochastic { t, .. }
            | EnvConfig::AdversarialLb { t, .. }
            | EnvConfig::StronglyObsLb { t, .. } => *t,
        }
    }

    /// Checks internal consistency without drawing anything.
    pub fn validate(&self, horizon: usize) -> Result<(), EnvError> {
        if let Some(t) = self.horizon() {
            if t != horizon {
                return Err(EnvError::Input(format!(
                    "environment t = {t} disagrees with experiment t = {horizon}"
                )));
            }
        }
        match self {
            EnvConfig::Stochastic {
                k, losses, graphs, ..
            } => {
                losses.build(*k)?;
                graphs.build(*k)?;
            }
            EnvConfig::AdversarialLb {
                k,
                condition_alpha_9,
                ..
            } => {
                let params = AdversarialLbParams::for_horizon(*k, horizon)?;
                AdversarialLbProcess::new(params, 0, *condition_alpha_9)?;
            }
            EnvConfig::StronglyObsLb { k, .. } => {
                if k.unwrap_or(2) != 2 {
                    return Err(EnvError::Input("strongly_obs_lb has exactly 2 actions".into()));
                }
            }
        }
        Ok(())
    }

    pub fn build(&self, horizon: usize, seed: u64) -> Result<Environment, EnvError> {
        self.validate(horizon)?;
        match self {
            EnvConfig::Stochastic {
                k, losses, graphs, ..
            } => make_stochastic_env(losses.build(*k)?, graphs.build(*k)?, horizon, seed),
            EnvConfig::AdversarialLb {
                k,
                condition_alpha_9,
                ..
            } => make_adversarial_lb_env(*k, horizon, *condition_alpha_9, seed),
            EnvConfig::StronglyObsLb { chi, .. } => {
                let chi = match chi {
                    ChiSpec::Fixed(c) => Some(*c),
                    ChiSpec::Random => None,
                };
                make_strongly_obs_lb_env(chi, horizon, seed)
            }
        }
    }
}
