//! Directed feedback graphs over the action set.
//!
//! A [`FeedbackGraph`] stores one bitset row per action: bit `w` of row `u`
//! is set iff playing `u` reveals the loss of `w`. The diagonal holds the
//! self-loops. Actions are 0-based in the API and 1-based in the JSON form.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of an action, `0..k`.
pub type Action = usize;

/// Largest graph accepted by the exact independence-number search.
pub const EXACT_ALPHA_MAX_K: usize = 32;

/// Restarts used by [`FeedbackGraph::independence_number_greedy_bound`].
pub const DEFAULT_GREEDY_RESTARTS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least one action")]
    Empty,
    #[error("action {action} out of range for a graph over {k} actions")]
    ActionOutOfRange { action: usize, k: usize },
    #[error(
        "exact independence number is limited to k <= {max} (got k = {k}); \
         use independence_number_greedy_bound instead"
    )]
    ExactBudget { k: usize, max: usize },
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("alpha = {alpha} must satisfy 1 <= alpha <= k = {k}")]
    AlphaOutOfRange { alpha: usize, k: usize },
}

fn words_for(k: usize) -> usize {
    k.div_ceil(64)
}

/// A set of actions stored as a bitset over a fixed universe `0..universe`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionSet {
    universe: usize,
    words: Vec<u64>,
}

impl ActionSet {
    pub fn empty(universe: usize) -> Self {
        ActionSet {
            universe,
            words: vec![0; words_for(universe)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for v in 0..universe {
            s.insert(v);
        }
        s
    }

    pub fn from_actions<I: IntoIterator<Item = Action>>(universe: usize, actions: I) -> Self {
        let mut s = Self::empty(universe);
        for a in actions {
            s.insert(a);
        }
        s
    }

    fn from_words(universe: usize, words: &[u64]) -> Self {
        ActionSet {
            universe,
            words: words.to_vec(),
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn insert(&mut self, a: Action) {
        assert!(a < self.universe, "action {a} outside universe {}", self.universe);
        self.words[a / 64] |= 1 << (a % 64);
    }

    pub fn remove(&mut self, a: Action) {
        if a < self.universe {
            self.words[a / 64] &= !(1 << (a % 64));
        }
    }

    pub fn contains(&self, a: Action) -> bool {
        a < self.universe && self.words[a / 64] >> (a % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = Action> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(i * 64 + b)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<Action> {
        self.iter().collect()
    }

    pub fn intersection_len(&self, other: &ActionSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// The `n`-th smallest member (0-based), if any.
    pub fn nth(&self, mut n: usize) -> Option<Action> {
        for (i, &w) in self.words.iter().enumerate() {
            let c = w.count_ones() as usize;
            if n < c {
                let mut rest = w;
                for _ in 0..n {
                    rest &= rest - 1;
                }
                return Some(i * 64 + rest.trailing_zeros() as usize);
            }
            n -= c;
        }
        None
    }

    fn difference_with_words(&mut self, other: &[u64]) {
        for (a, b) in self.words.iter_mut().zip(other) {
            *a &= !b;
        }
    }
}

/// Directed graph over `k` actions with explicit self-loop flags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct FeedbackGraph {
    k: usize,
    words: usize,
    bits: Vec<u64>,
}

impl FeedbackGraph {
    /// Graph over `k` actions with no edges at all (not even self-loops).
    pub fn empty(k: usize) -> Result<Self, GraphError> {
        if k == 0 {
            return Err(GraphError::Empty);
        }
        let words = words_for(k);
        Ok(FeedbackGraph {
            k,
            words,
            bits: vec![0; k * words],
        })
    }

    /// Bandit feedback: every action observes only itself.
    pub fn self_loops_only(k: usize) -> Result<Self, GraphError> {
        let mut g = Self::empty(k)?;
        for v in 0..k {
            g.set_edge(v, v);
        }
        Ok(g)
    }

    /// Full information: every action observes every action.
    pub fn complete(k: usize) -> Result<Self, GraphError> {
        let mut g = Self::empty(k)?;
        for u in 0..k {
            for w in 0..k {
                g.set_edge(u, w);
            }
        }
        Ok(g)
    }

    pub fn from_edges<I>(k: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (Action, Action)>,
    {
        let mut g = Self::empty(k)?;
        for (u, w) in edges {
            g.add_edge(u, w)?;
        }
        Ok(g)
    }

    pub fn num_actions(&self) -> usize {
        self.k
    }

    fn check(&self, v: Action) -> Result<(), GraphError> {
        if v < self.k {
            Ok(())
        } else {
            Err(GraphError::ActionOutOfRange {
                action: v,
                k: self.k,
            })
        }
    }

    #[inline]
    pub(crate) fn set_edge(&mut self, u: Action, w: Action) {
        self.bits[u * self.words + w / 64] |= 1 << (w % 64);
    }

    #[inline]
    pub(crate) fn clear_edge(&mut self, u: Action, w: Action) {
        self.bits[u * self.words + w / 64] &= !(1 << (w % 64));
    }

    pub(crate) fn clear_all(&mut self) {
        self.bits.iter_mut().for_each(|b| *b = 0);
    }

    pub fn add_edge(&mut self, u: Action, w: Action) -> Result<(), GraphError> {
        self.check(u)?;
        self.check(w)?;
        self.set_edge(u, w);
        Ok(())
    }

    pub fn remove_edge(&mut self, u: Action, w: Action) -> Result<(), GraphError> {
        self.check(u)?;
        self.check(w)?;
        self.clear_edge(u, w);
        Ok(())
    }

    #[inline]
    pub fn has_edge(&self, u: Action, w: Action) -> bool {
        u < self.k && w < self.k && self.bits[u * self.words + w / 64] >> (w % 64) & 1 == 1
    }

    pub fn has_self_loop(&self, v: Action) -> bool {
        self.has_edge(v, v)
    }

    pub fn has_all_self_loops(&self) -> bool {
        (0..self.k).all(|v| self.has_self_loop(v))
    }

    #[inline]
    pub(crate) fn row(&self, u: Action) -> &[u64] {
        &self.bits[u * self.words..(u + 1) * self.words]
    }

    /// Actions revealed by playing `v`; contains `v` iff `v` has a self-loop.
    pub fn out_neighborhood(&self, v: Action) -> Result<ActionSet, GraphError> {
        self.check(v)?;
        Ok(ActionSet::from_words(self.k, self.row(v)))
    }

    /// All edges `(u, w)` in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (Action, Action)> + '_ {
        (0..self.k).flat_map(move |u| {
            ActionSet::from_words(self.k, self.row(u))
                .to_vec()
                .into_iter()
                .map(move |w| (u, w))
        })
    }

    /// Number of directed non-loop edges with both endpoints in `subset`.
    pub fn induced_edge_count(&self, subset: &ActionSet) -> usize {
        subset
            .iter()
            .map(|u| {
                let row = ActionSet::from_words(self.k, self.row(u));
                row.intersection_len(subset) - usize::from(self.has_self_loop(u))
            })
            .sum()
    }

    /// Subgraph induced on `subset`, relabelled to `0..subset.len()` in
    /// increasing action order.
    pub fn induced_subgraph(&self, subset: &ActionSet) -> Result<FeedbackGraph, GraphError> {
        let members = subset.to_vec();
        let mut sub = FeedbackGraph::empty(members.len())?;
        for (i, &u) in members.iter().enumerate() {
            for (j, &w) in members.iter().enumerate() {
                if self.has_edge(u, w) {
                    sub.set_edge(i, j);
                }
            }
        }
        Ok(sub)
    }

    /// `{u, w}` is an edge iff `u -> w` or `w -> u`; self-loops are dropped.
    pub fn undirected_underlying(&self) -> UndirectedGraph {
        let mut g = UndirectedGraph::empty(self.k);
        for u in 0..self.k {
            for w in (u + 1)..self.k {
                if self.has_edge(u, w) || self.has_edge(w, u) {
                    g.add_edge(u, w);
                }
            }
        }
        g
    }

    pub fn independence_number_exact(&self) -> Result<usize, GraphError> {
        self.undirected_underlying().independence_number_exact()
    }

    pub fn independence_number_greedy_bound<R: Rng + ?Sized>(&self, rng: &mut R) -> GreedyBound {
        self.undirected_underlying()
            .independence_number_greedy_bound(rng, DEFAULT_GREEDY_RESTARTS)
    }

    pub fn turan_lower_bound(&self) -> TuranBound {
        self.undirected_underlying().turan_lower_bound()
    }

    pub fn classify_observability(&self) -> ObservabilityReport {
        let per_vertex: Vec<VertexObservability> = (0..self.k)
            .map(|v| {
                let incoming = (0..self.k).filter(|&u| self.has_edge(u, v)).count();
                let from_all_others = (0..self.k).filter(|&u| u != v).all(|u| self.has_edge(u, v));
                if incoming == 0 {
                    VertexObservability::Unobservable
                } else if self.has_self_loop(v) || from_all_others {
                    VertexObservability::StronglyObservable
                } else {
                    VertexObservability::WeaklyObservable
                }
            })
            .collect();
        let graph_class = if per_vertex.contains(&VertexObservability::Unobservable) {
            VertexObservability::Unobservable
        } else if per_vertex
            .iter()
            .all(|&c| c == VertexObservability::StronglyObservable)
        {
            VertexObservability::StronglyObservable
        } else {
            VertexObservability::WeaklyObservable
        };
        ObservabilityReport {
            per_vertex,
            graph_class,
        }
    }

    /// Directed Erdős–Rényi graph: each off-diagonal edge independently with
    /// probability `p`; the diagonal is all-or-nothing per `self_loops`.
    pub fn sample_erdos_renyi<R: Rng + ?Sized>(
        k: usize,
        p: f64,
        self_loops: bool,
        rng: &mut R,
    ) -> Result<Self, GraphError> {
        check_probability(p)?;
        let mut g = Self::empty(k)?;
        g.fill_erdos_renyi(p, self_loops, rng);
        Ok(g)
    }

    pub(crate) fn fill_erdos_renyi<R: Rng + ?Sized>(&mut self, p: f64, self_loops: bool, rng: &mut R) {
        self.clear_all();
        for u in 0..self.k {
            for w in 0..self.k {
                if u == w {
                    if self_loops {
                        self.set_edge(u, u);
                    }
                } else if rng.random_bool(p) {
                    self.set_edge(u, w);
                }
            }
        }
    }

    /// `alpha` near-equal contiguous groups, each a clique with self-loops
    /// and no edges between groups.
    pub fn disjoint_cliques(k: usize, alpha: usize) -> Result<Self, GraphError> {
        if alpha == 0 || alpha > k {
            return Err(GraphError::AlphaOutOfRange { alpha, k });
        }
        let group = |v: usize| v * alpha / k;
        let mut g = Self::empty(k)?;
        for u in 0..k {
            for w in 0..k {
                if group(u) == group(w) {
                    g.set_edge(u, w);
                }
            }
        }
        Ok(g)
    }
}

pub(crate) fn check_probability(p: f64) -> Result<(), GraphError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(GraphError::InvalidProbability(p))
    }
}

/// Wire format: `{ "k": K, "edges": [[u, w], ...] }` with 1-based actions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub k: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<FeedbackGraph> for GraphJson {
    fn from(g: FeedbackGraph) -> Self {
        GraphJson {
            k: g.k,
            edges: g.edges().map(|(u, w)| [u + 1, w + 1]).collect(),
        }
    }
}

impl TryFrom<GraphJson> for FeedbackGraph {
    type Error = GraphError;

    fn try_from(j: GraphJson) -> Result<Self, Self::Error> {
        let mut g = FeedbackGraph::empty(j.k)?;
        for [u, w] in j.edges {
            if u == 0 || w == 0 {
                return Err(GraphError::ActionOutOfRange {
                    action: 0,
                    k: j.k,
                });
            }
            g.add_edge(u - 1, w - 1)?;
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexObservability {
    StronglyObservable,
    WeaklyObservable,
    Unobservable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservabilityReport {
    pub per_vertex: Vec<VertexObservability>,
    pub graph_class: VertexObservability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    RandomizedGreedy { restarts: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyBound {
    pub lower: usize,
    pub method: BoundMethod,
}

/// `|V| / (1 + 2|E|/|V|)`, kept as the exact fraction `|V|^2 / (|V| + 2|E|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TuranBound {
    pub vertices: usize,
    pub edges: usize,
}

impl TuranBound {
    pub fn numerator(&self) -> u64 {
        (self.vertices * self.vertices) as u64
    }

    pub fn denominator(&self) -> u64 {
        (self.vertices + 2 * self.edges) as u64
    }

    pub fn value(&self) -> f64 {
        self.numerator() as f64 / self.denominator() as f64
    }

    /// Exact test of `bound <= x`.
    pub fn at_most(&self, x: usize) -> bool {
        self.numerator() <= x as u64 * self.denominator()
    }
}

/// Simple undirected graph (symmetric, loop-free).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    n: usize,
    adj: Vec<ActionSet>,
}

impl UndirectedGraph {
    pub fn empty(n: usize) -> Self {
        UndirectedGraph {
            n,
            adj: vec![ActionSet::empty(n); n],
        }
    }

    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Self {
        let mut g = Self::empty(n);
        for (u, w) in edges {
            g.add_edge(u, w);
        }
        g
    }

    /// Undirected G(n, p).
    pub fn sample_erdos_renyi<R: Rng + ?Sized>(
        n: usize,
        p: f64,
        rng: &mut R,
    ) -> Result<Self, GraphError> {
        check_probability(p)?;
        let mut g = Self::empty(n);
        for u in 0..n {
            for w in (u + 1)..n {
                if rng.random_bool(p) {
                    g.add_edge(u, w);
                }
            }
        }
        Ok(g)
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    /// Adds `{u, w}`; loops are ignored.
    pub fn add_edge(&mut self, u: usize, w: usize) {
        if u != w {
            self.adj[u].insert(w);
            self.adj[w].insert(u);
        }
    }

    pub fn has_edge(&self, u: usize, w: usize) -> bool {
        self.adj[u].contains(w)
    }

    pub fn neighbors(&self, v: usize) -> &ActionSet {
        &self.adj[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(ActionSet::len).sum::<usize>() / 2
    }

    pub fn is_independent(&self, set: &ActionSet) -> bool {
        set.iter().all(|v| self.adj[v].intersection_len(set) == 0)
    }

    /// Exact maximum independent set size by branch and bound, pruning with
    /// a greedy clique cover of the candidate set.
    pub fn independence_number_exact(&self) -> Result<usize, GraphError> {
        if self.n > EXACT_ALPHA_MAX_K {
            return Err(GraphError::ExactBudget {
                k: self.n,
                max: EXACT_ALPHA_MAX_K,
            });
        }
        if self.n == 0 {
            return Ok(0);
        }
        let adj: Vec<u64> = self.adj.iter().map(|s| s.words[0]).collect();
        let all = (1u64 << self.n) - 1;
        let mut best = 0;
        mis_expand(&adj, all, 0, &mut best);
        Ok(best)
    }

    pub fn independence_number_greedy_bound<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        restarts: usize,
    ) -> GreedyBound {
        let restarts = restarts.max(1);
        let mut lower = 0;
        for _ in 0..restarts {
            let mut remaining = ActionSet::full(self.n);
            let mut picked = 0;
            while !remaining.is_empty() {
                let idx = rng.random_range(0..remaining.len());
                let v = remaining.nth(idx).expect("index within set size");
                picked += 1;
                remaining.remove(v);
                remaining.difference_with_words(&self.adj[v].words);
            }
            lower = lower.max(picked);
        }
        GreedyBound {
            lower,
            method: BoundMethod::RandomizedGreedy { restarts },
        }
    }

    pub fn turan_lower_bound(&self) -> TuranBound {
        TuranBound {
            vertices: self.n,
            edges: self.edge_count(),
        }
    }
}

fn mis_expand(adj: &[u64], mut cand: u64, size: usize, best: &mut usize) {
    if cand == 0 {
        *best = (*best).max(size);
        return;
    }
    let mut order = [0u8; 64];
    let mut bound = [0u8; 64];
    let len = clique_cover(adj, cand, &mut order, &mut bound);
    for i in (0..len).rev() {
        if size + bound[i] as usize <= *best {
            return;
        }
        let v = order[i] as usize;
        mis_expand(adj, cand & !adj[v] & !(1u64 << v), size + 1, best);
        cand &= !(1u64 << v);
    }
}

/// Greedily partitions `cand` into cliques. `bound[i]` is the number of
/// cliques needed to cover `order[..=i]`, an upper bound on any independent
/// set drawn from those vertices.
fn clique_cover(adj: &[u64], cand: u64, order: &mut [u8; 64], bound: &mut [u8; 64]) -> usize {
    let mut uncovered = cand;
    let mut cliques = 0u8;
    let mut len = 0;
    while uncovered != 0 {
        cliques += 1;
        let mut q = uncovered;
        while q != 0 {
            let v = q.trailing_zeros() as usize;
            order[len] = v as u8;
            bound[len] = cliques;
            len += 1;
            uncovered &= !(1u64 << v);
            q &= adj[v] & !(1u64 << v);
        }
    }
    len
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(v: &[usize], k: usize) -> ActionSet {
        ActionSet::from_actions(k, v.iter().copied())
    }

    /// Brute force over all subsets; test-only oracle.
    fn brute_alpha(g: &UndirectedGraph) -> usize {
        let n = g.num_vertices();
        (0u32..(1 << n))
            .filter(|mask| {
                (0..n).all(|u| {
                    mask >> u & 1 == 0 || (0..n).all(|w| mask >> w & 1 == 0 || !g.has_edge(u, w))
                })
            })
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap()
    }

    fn c5() -> UndirectedGraph {
        UndirectedGraph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5)))
    }

    #[test]
    fn out_neighborhood_examples() {
        let g = FeedbackGraph::complete(4).unwrap();
        assert_eq!(g.out_neighborhood(1).unwrap().to_vec(), vec![0, 1, 2, 3]);
        let g = FeedbackGraph::self_loops_only(5).unwrap();
        assert_eq!(g.out_neighborhood(2).unwrap().to_vec(), vec![2]);
        let g = FeedbackGraph::from_edges(3, [(0, 0), (1, 1), (2, 2), (0, 2)]).unwrap();
        assert_eq!(g.out_neighborhood(0).unwrap().to_vec(), vec![0, 2]);
        assert!(matches!(
            g.out_neighborhood(3),
            Err(GraphError::ActionOutOfRange { action: 3, k: 3 })
        ));
    }

    #[test]
    fn undirected_examples() {
        let cyc = FeedbackGraph::from_edges(3, [(0, 1), (1, 2), (2, 0), (0, 0), (1, 1), (2, 2)])
            .unwrap()
            .undirected_underlying();
        assert_eq!(cyc.edge_count(), 3);
        assert!(cyc.has_edge(0, 2));
        assert_eq!(
            FeedbackGraph::self_loops_only(4)
                .unwrap()
                .undirected_underlying()
                .edge_count(),
            0
        );
        let u = FeedbackGraph::from_edges(3, [(0, 1), (1, 0), (0, 2)])
            .unwrap()
            .undirected_underlying();
        assert_eq!(u.edge_count(), 2);
        assert!(u.has_edge(0, 1) && u.has_edge(2, 0) && !u.has_edge(1, 2));
    }

    #[test]
    fn exact_alpha_examples() {
        assert_eq!(FeedbackGraph::complete(6).unwrap().independence_number_exact(), Ok(1));
        assert_eq!(
            FeedbackGraph::self_loops_only(7).unwrap().independence_number_exact(),
            Ok(7)
        );
        assert_eq!(brute_alpha(&c5()), 2);
        assert_eq!(c5().independence_number_exact(), Ok(2));
        assert!(matches!(
            FeedbackGraph::self_loops_only(33).unwrap().independence_number_exact(),
            Err(GraphError::ExactBudget { k: 33, .. })
        ));
        assert_eq!(
            FeedbackGraph::self_loops_only(32).unwrap().independence_number_exact(),
            Ok(32)
        );
    }

    #[test]
    fn exact_alpha_matches_brute_force_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=14 {
            for &p in &[0.1, 0.3, 0.5, 0.8] {
                let g = UndirectedGraph::sample_erdos_renyi(n, p, &mut rng).unwrap();
                assert_eq!(g.independence_number_exact().unwrap(), brute_alpha(&g));
            }
        }
    }

    #[test]
    fn greedy_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = FeedbackGraph::complete(9).unwrap().independence_number_greedy_bound(&mut rng);
        assert_eq!(b.lower, 1);
        assert_eq!(b.method, BoundMethod::RandomizedGreedy { restarts: 16 });
        let b = FeedbackGraph::self_loops_only(10)
            .unwrap()
            .independence_number_greedy_bound(&mut rng);
        assert_eq!(b.lower, 10);
        // Exhaustive: on C5 every first pick leaves a path of two vertices
        // with one non-adjacent pair, so 2 is reached whenever a second pick
        // happens, i.e. always.
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            assert_eq!(c5().independence_number_greedy_bound(&mut rng, 16).lower, 2);
        }
    }

    #[test]
    fn turan_examples() {
        let t = FeedbackGraph::complete(4).unwrap().turan_lower_bound();
        assert_eq!(t.edges, 6);
        assert_eq!(t.value(), 1.0);
        let t = FeedbackGraph::self_loops_only(7).unwrap().turan_lower_bound();
        assert_eq!(t.value(), 7.0);
        let t = c5().turan_lower_bound();
        assert!((t.value() - 5.0 / 3.0).abs() < 1e-15);
        assert!(t.at_most(brute_alpha(&c5())));
        assert!(!t.at_most(1));
    }

    #[test]
    fn observability_examples() {
        let g = FeedbackGraph::self_loops_only(4).unwrap();
        assert_eq!(
            g.classify_observability().graph_class,
            VertexObservability::StronglyObservable
        );

        let g = FeedbackGraph::from_edges(2, [(0, 0), (0, 1)]).unwrap();
        let r = g.classify_observability();
        assert_eq!(r.per_vertex, vec![VertexObservability::StronglyObservable; 2]);

        // Vertex 2 gets a single incoming edge from 0 and no self-loop.
        let g = FeedbackGraph::from_edges(3, [(0, 0), (1, 1), (0, 2)]).unwrap();
        let r = g.classify_observability();
        assert_eq!(r.per_vertex[2], VertexObservability::WeaklyObservable);
        assert_eq!(r.graph_class, VertexObservability::WeaklyObservable);

        let g = FeedbackGraph::from_edges(2, [(0, 0)]).unwrap();
        assert_eq!(
            g.classify_observability().graph_class,
            VertexObservability::Unobservable
        );
        // A lone vertex without a self-loop sees nothing.
        let g = FeedbackGraph::empty(1).unwrap();
        assert_eq!(
            g.classify_observability().graph_class,
            VertexObservability::Unobservable
        );
    }

    #[test]
    fn erdos_renyi_extremes_and_edge_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let full = FeedbackGraph::sample_erdos_renyi(6, 1.0, true, &mut rng).unwrap();
        assert_eq!(full, FeedbackGraph::complete(6).unwrap());
        let none = FeedbackGraph::sample_erdos_renyi(6, 0.0, true, &mut rng).unwrap();
        assert_eq!(none, FeedbackGraph::self_loops_only(6).unwrap());
        assert!(FeedbackGraph::sample_erdos_renyi(3, 1.5, true, &mut rng).is_err());

        // Closed form: an undirected pair is joined unless both directed
        // edges are missing, so E|E| = (1 - (1-p)^2) * C(16, 2).
        let p = 0.94;
        let draws = 10_000;
        let total: usize = (0..draws)
            .map(|_| {
                FeedbackGraph::sample_erdos_renyi(16, p, true, &mut rng)
                    .unwrap()
                    .undirected_underlying()
                    .edge_count()
            })
            .sum();
        let mean = total as f64 / draws as f64;
        let expected = (1.0 - (1.0 - p) * (1.0 - p)) * 120.0;
        assert!((mean - expected).abs() / expected < 0.01, "{mean} vs {expected}");
    }

    #[test]
    fn disjoint_cliques_examples() {
        assert_eq!(
            FeedbackGraph::disjoint_cliques(6, 1).unwrap(),
            FeedbackGraph::complete(6).unwrap()
        );
        assert_eq!(
            FeedbackGraph::disjoint_cliques(6, 6).unwrap(),
            FeedbackGraph::self_loops_only(6).unwrap()
        );
        let g = FeedbackGraph::disjoint_cliques(6, 2).unwrap();
        assert_eq!(brute_alpha(&g.undirected_underlying()), 2);
        assert_eq!(g.independence_number_exact(), Ok(2));
        assert_eq!(g.undirected_underlying().edge_count(), 6);
        assert!(matches!(
            FeedbackGraph::disjoint_cliques(3, 4),
            Err(GraphError::AlphaOutOfRange { .. })
        ));
    }

    #[test]
    fn disjoint_cliques_alpha_is_exact_up_to_20() {
        for k in 1..=20 {
            for alpha in 1..=k {
                let g = FeedbackGraph::disjoint_cliques(k, alpha).unwrap();
                assert_eq!(g.independence_number_exact().unwrap(), alpha, "k={k} alpha={alpha}");
            }
        }
    }

    #[test]
    fn json_round_trip_is_one_based() {
        let g = FeedbackGraph::from_edges(3, [(0, 0), (0, 2)]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"k":3,"edges":[[1,1],[1,3]]}"#);
        let back: FeedbackGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<FeedbackGraph>(r#"{"k":2,"edges":[[0,1]]}"#).is_err());
        assert!(serde_json::from_str::<FeedbackGraph>(r#"{"k":2,"edges":[[1,3]]}"#).is_err());
    }

    #[test]
    fn action_set_basics() {
        let s = set(&[1, 65, 3], 70);
        assert_eq!(s.to_vec(), vec![1, 3, 65]);
        assert_eq!(s.nth(2), Some(65));
        assert_eq!(s.nth(3), None);
        assert_eq!(s.len(), 3);
        let big = FeedbackGraph::complete(70).unwrap();
        assert_eq!(big.out_neighborhood(69).unwrap().len(), 70);
        assert_eq!(big.induced_edge_count(&s), 6);
    }
}
