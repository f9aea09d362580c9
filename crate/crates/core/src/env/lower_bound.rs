//! The two randomized adversarial constructions.
//!
//! Both couple the hidden graph with the realized losses, which is exactly
//! what the stochastic setting forbids. Their parameter functions are public
//! so the exact distribution tables in `verify` are computed from the same
//! numbers the samplers use.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::EnvError;
use crate::graph::{Action, FeedbackGraph, EXACT_ALPHA_MAX_K};

/// Parameters of the hidden-target construction over `k` actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdversarialLbParams {
    pub k: usize,
    pub epsilon: f64,
}

impl AdversarialLbParams {
    /// `epsilon = sqrt(k / t) / 8`; requires `k >= 2` and `t >= k^2`.
    pub fn for_horizon(k: usize, t: usize) -> Result<Self, EnvError> {
        if k < 2 {
            return Err(EnvError::Input(format!("adversarial_lb needs k >= 2, got {k}")));
        }
        if t < k * k {
            return Err(EnvError::Input(format!(
                "adversarial_lb needs t >= k^2 = {}, got {t}",
                k * k
            )));
        }
        Self::with_epsilon(k, (k as f64 / t as f64).sqrt() / 8.0)
    }

    pub fn with_epsilon(k: usize, epsilon: f64) -> Result<Self, EnvError> {
        if k < 2 || !(0.0..=0.5).contains(&epsilon) {
            return Err(EnvError::Input(format!(
                "adversarial_lb needs k >= 2 and 0 <= epsilon <= 1/2 (k = {k}, epsilon = {epsilon})"
            )));
        }
        Ok(AdversarialLbParams { k, epsilon })
    }

    /// Mean loss: `1/2 - epsilon` for the target, `1/2` otherwise.
    pub fn loss_mean(&self, is_target: bool) -> f64 {
        if is_target {
            0.5 - self.epsilon
        } else {
            0.5
        }
    }

    /// Probability of a non-loop edge `u -> w`. Edges into the target depend
    /// on the target's loss this round; all other edges do not.
    pub fn edge_probability(&self, into_target: bool, target_loss: u8) -> f64 {
        let e2 = 2.0 * self.epsilon;
        match (into_target, target_loss) {
            (false, _) => 1.0 - e2,
            (true, 1) => 1.0,
            (true, _) => (1.0 - e2) / (1.0 + e2),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdversarialLbProcess {
    params: AdversarialLbParams,
    target: Action,
    alpha_cap: Option<usize>,
    graph: FeedbackGraph,
    rejected: u64,
}

/// Independence-number cap used when conditioning the construction.
pub const CONDITIONED_ALPHA_CAP: usize = 9;

impl AdversarialLbProcess {
    pub fn new(
        params: AdversarialLbParams,
        target: Action,
        condition_alpha: bool,
    ) -> Result<Self, EnvError> {
        if target >= params.k {
            return Err(EnvError::InvalidAction {
                action: target,
                k: params.k,
            });
        }
        if condition_alpha && params.k > EXACT_ALPHA_MAX_K {
            return Err(EnvError::Input(format!(
                "condition_alpha_9 needs exact alpha, so k <= {EXACT_ALPHA_MAX_K}"
            )));
        }
        Ok(AdversarialLbProcess {
            params,
            target,
            alpha_cap: condition_alpha.then_some(CONDITIONED_ALPHA_CAP),
            graph: FeedbackGraph::empty(params.k)?,
            rejected: 0,
        })
    }

    pub fn params(&self) -> AdversarialLbParams {
        self.params
    }

    pub fn target(&self) -> Action {
        self.target
    }

    pub fn is_conditioned(&self) -> bool {
        self.alpha_cap.is_some()
    }

    /// Joint draws discarded by the conditioning so far.
    pub fn rejected_draws(&self) -> u64 {
        self.rejected
    }

    pub fn next_round<R1, R2>(
        &mut self,
        loss_rng: &mut R1,
        graph_rng: &mut R2,
        losses: &mut [f64],
    ) -> &FeedbackGraph
    where
        R1: Rng + ?Sized,
        R2: Rng + ?Sized,
    {
        let target = self.target;
        for (v, slot) in losses.iter_mut().enumerate() {
            let mean = self.params.loss_mean(v == target);
            *slot = if loss_rng.random_bool(mean) { 1.0 } else { 0.0 };
        }
        loop {
            self.fill_graph(losses[target] as u8, graph_rng);
            match self.alpha_cap {
                None => break,
                Some(cap) => {
                    let alpha = self
                        .graph
                        .independence_number_exact()
                        .expect("size checked at construction");
                    if alpha <= cap {
                        break;
                    }
                    self.rejected += 1;
                    let mean = self.params.loss_mean(true);
                    losses[target] = if loss_rng.random_bool(mean) { 1.0 } else { 0.0 };
                }
            }
        }
        &self.graph
    }

    fn fill_graph<R: Rng + ?Sized>(&mut self, target_loss: u8, rng: &mut R) {
        let k = self.params.k;
        let p_other = self.params.edge_probability(false, target_loss);
        let p_target = self.params.edge_probability(true, target_loss);
        self.graph.clear_all();
        for u in 0..k {
            self.graph.set_edge(u, u);
            for w in 0..k {
                if w == u {
                    continue;
                }
                let p = if w == self.target { p_target } else { p_other };
                if rng.random_bool(p) {
                    self.graph.set_edge(u, w);
                }
            }
        }
    }
}

/// Which of the two hidden distributions the two-action construction uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chi {
    One,
    Two,
}

impl Chi {
    pub fn index(self) -> u8 {
        match self {
            Chi::One => 1,
            Chi::Two => 2,
        }
    }

    pub fn from_index(i: u8) -> Result<Self, EnvError> {
        match i {
            1 => Ok(Chi::One),
            2 => Ok(Chi::Two),
            _ => Err(EnvError::Input(format!("chi must be 1 or 2, got {i}"))),
        }
    }
}

/// Edge patterns at `v` in the two-action construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgePattern {
    /// `u -> v` present, `v -> v` absent.
    OnlyEdge,
    /// `v -> v` present, `u -> v` absent.
    OnlyLoop,
    Both,
}

impl EdgePattern {
    pub const ALL: [EdgePattern; 3] = [EdgePattern::OnlyEdge, EdgePattern::OnlyLoop, EdgePattern::Both];

    pub fn has_edge_from_u(self) -> bool {
        !matches!(self, EdgePattern::OnlyLoop)
    }

    pub fn has_self_loop(self) -> bool {
        !matches!(self, EdgePattern::OnlyEdge)
    }
}

/// Action `u`: constant loss 1/2, always self-looped.
pub const ACTION_U: Action = 0;
/// Action `v`: Bernoulli loss whose mean depends on `chi`.
pub const ACTION_V: Action = 1;

pub fn strongly_obs_v_mean(chi: Chi) -> f64 {
    match chi {
        Chi::One => 3.0 / 8.0,
        Chi::Two => 5.0 / 8.0,
    }
}

/// `P[pattern | chi, loss of v]`. One loss value forces both edges; the
/// other splits 2/5, 2/5, 1/5 between only-edge, only-loop and both.
pub fn strongly_obs_pattern_probability(chi: Chi, v_loss: u8, pattern: EdgePattern) -> f64 {
    let forcing_loss = match chi {
        Chi::One => 1,
        Chi::Two => 0,
    };
    if v_loss == forcing_loss {
        if pattern == EdgePattern::Both {
            1.0
        } else {
            0.0
        }
    } else {
        match pattern {
            EdgePattern::OnlyEdge | EdgePattern::OnlyLoop => 2.0 / 5.0,
            EdgePattern::Both => 1.0 / 5.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StronglyObsLbProcess {
    chi: Chi,
    graph: FeedbackGraph,
}

impl StronglyObsLbProcess {
    pub fn new(chi: Chi) -> Self {
        StronglyObsLbProcess {
            chi,
            graph: FeedbackGraph::empty(2).expect("two actions"),
        }
    }

    pub fn chi(&self) -> Chi {
        self.chi
    }

    pub fn next_round<R1, R2>(
        &mut self,
        loss_rng: &mut R1,
        graph_rng: &mut R2,
        losses: &mut [f64],
    ) -> &FeedbackGraph
    where
        R1: Rng + ?Sized,
        R2: Rng + ?Sized,
    {
        let v_loss = u8::from(loss_rng.random_bool(strongly_obs_v_mean(self.chi)));
        losses[ACTION_U] = 0.5;
        losses[ACTION_V] = f64::from(v_loss);

        let x: f64 = graph_rng.random();
        let mut acc = 0.0;
        let mut pattern = EdgePattern::Both;
        for p in EdgePattern::ALL {
            acc += strongly_obs_pattern_probability(self.chi, v_loss, p);
            if x < acc {
                pattern = p;
                break;
            }
        }
        self.graph.clear_all();
        self.graph.set_edge(ACTION_U, ACTION_U);
        if pattern.has_edge_from_u() {
            self.graph.set_edge(ACTION_U, ACTION_V);
        }
        if pattern.has_self_loop() {
            self.graph.set_edge(ACTION_V, ACTION_V);
        }
        &self.graph
    }
}
