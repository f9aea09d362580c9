use rand::Rng;
use serde::{Deserialize, Serialize};

use super::EnvError;
use crate::graph::{check_probability, FeedbackGraph, EXACT_ALPHA_MAX_K};

/// Config-level description of a graph sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GraphSourceSpec {
    Fixed {
        graph: FeedbackGraph,
    },
    IidErdosRenyi {
        p: f64,
        #[serde(default = "yes")]
        self_loops: bool,
    },
    CyclicList {
        graphs: Vec<FeedbackGraph>,
    },
    DisjointCliques {
        alpha: usize,
    },
    BoundedAlphaRejection {
        p: f64,
        alpha_max: usize,
    },
}

fn yes() -> bool {
    true
}

impl GraphSourceSpec {
    pub fn build(&self, k: usize) -> Result<GraphSource, EnvError> {
        let source = match self {
            GraphSourceSpec::Fixed { graph } => GraphSource::Fixed(graph.clone()),
            GraphSourceSpec::IidErdosRenyi { p, self_loops } => {
                check_probability(*p)?;
                GraphSource::IidErdosRenyi {
                    p: *p,
                    self_loops: *self_loops,
                    current: FeedbackGraph::empty(k)?,
                }
            }
            GraphSourceSpec::CyclicList { graphs } => {
                if graphs.is_empty() {
                    return Err(EnvError::Input("cyclic_list needs at least one graph".into()));
                }
                GraphSource::CyclicList {
                    graphs: graphs.clone(),
                    next: 0,
                }
            }
            GraphSourceSpec::DisjointCliques { alpha } => {
                GraphSource::DisjointCliquesFixed {
                    alpha: *alpha,
                    graph: FeedbackGraph::disjoint_cliques(k, *alpha)?,
                }
            }
            GraphSourceSpec::BoundedAlphaRejection { p, alpha_max } => {
                check_probability(*p)?;
                if k > EXACT_ALPHA_MAX_K {
                    return Err(EnvError::Input(format!(
                        "bounded_alpha_rejection needs exact alpha, so k <= {EXACT_ALPHA_MAX_K}"
                    )));
                }
                if *alpha_max == 0 {
                    return Err(EnvError::Input("alpha_max must be at least 1".into()));
                }
                GraphSource::BoundedAlphaRejection {
                    p: *p,
                    alpha_max: *alpha_max,
                    current: FeedbackGraph::empty(k)?,
                }
            }
        };
        if source.num_actions() != k {
            return Err(EnvError::DimensionMismatch {
                what: "graphs",
                expected: k,
                found: source.num_actions(),
            });
        }
        if let GraphSource::CyclicList { graphs, .. } = &source {
            if let Some(g) = graphs.iter().find(|g| g.num_actions() != k) {
                return Err(EnvError::DimensionMismatch {
                    what: "graphs",
                    expected: k,
                    found: g.num_actions(),
                });
            }
        }
        Ok(source)
    }
}

/// Produces the hidden graph of each round. Sources never look at losses.
#[derive(Debug, Clone)]
pub enum GraphSource {
    Fixed(FeedbackGraph),
    IidErdosRenyi {
        p: f64,
        self_loops: bool,
        current: FeedbackGraph,
    },
    CyclicList {
        graphs: Vec<FeedbackGraph>,
        next: usize,
    },
    DisjointCliquesFixed {
        alpha: usize,
        graph: FeedbackGraph,
    },
    /// Self-looped Erdős–Rényi draws, resampled until the exact
    /// independence number is at most `alpha_max`.
    BoundedAlphaRejection {
        p: f64,
        alpha_max: usize,
        current: FeedbackGraph,
    },
}

impl GraphSource {
    pub fn num_actions(&self) -> usize {
        match self {
            GraphSource::Fixed(g) => g.num_actions(),
            GraphSource::IidErdosRenyi { current, .. } => current.num_actions(),
            GraphSource::CyclicList { graphs, .. } => graphs[0].num_actions(),
            GraphSource::DisjointCliquesFixed { graph, .. } => graph.num_actions(),
            GraphSource::BoundedAlphaRejection { current, .. } => current.num_actions(),
        }
    }

    /// Graph for the next round, drawn from `rng` when random.
    pub fn next_graph<R: Rng + ?Sized>(&mut self, rng: &mut R) -> &FeedbackGraph {
        match self {
            GraphSource::Fixed(g) => g,
            GraphSource::DisjointCliquesFixed { graph, .. } => graph,
            GraphSource::IidErdosRenyi {
                p,
                self_loops,
                current,
            } => {
                current.fill_erdos_renyi(*p, *self_loops, rng);
                current
            }
            GraphSource::CyclicList { graphs, next } => {
                let g = &graphs[*next];
                *next = (*next + 1) % graphs.len();
                g
            }
            GraphSource::BoundedAlphaRejection {
                p,
                alpha_max,
                current,
            } => {
                loop {
                    current.fill_erdos_renyi(*p, true, rng);
                    let alpha = current
                        .independence_number_exact()
                        .expect("size checked at construction");
                    if alpha <= *alpha_max {
                        break;
                    }
                }
                current
            }
        }
    }
}

/// Two actions `u = 0`, `v = 1` cycling through the three strongly
/// observable edge patterns with weights 1/4, 1/2, 1/4: only `u -> v`,
/// both `u -> v` and `v -> v`, only `v -> v`. `u` always has its self-loop.
/// The graphs follow a fixed schedule, so they carry no information about
/// the losses.
pub fn two_action_pattern_cycle() -> GraphSourceSpec {
    let only_edge = FeedbackGraph::from_edges(2, [(0, 0), (0, 1)]).expect("valid");
    let both = FeedbackGraph::from_edges(2, [(0, 0), (0, 1), (1, 1)]).expect("valid");
    let only_loop = FeedbackGraph::from_edges(2, [(0, 0), (1, 1)]).expect("valid");
    GraphSourceSpec::CyclicList {
        graphs: vec![only_edge, both.clone(), both, only_loop],
    }
}
