//! Interaction graph, its triangles (cliques) and the desired formation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{distance, equilateral_area, signed_area, Position};

/// One-based agent label, as used in scenario files and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub usize);

impl AgentId {
    /// Zero-based slot in a position slice.
    #[inline]
    pub fn index(self) -> usize {
        self.0 - 1
    }

    pub fn from_index(i: usize) -> Self {
        AgentId(i + 1)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Unordered edge, stored with the smaller label first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(AgentId, AgentId);

impl Edge {
    pub fn new(a: AgentId, b: AgentId) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn endpoints(self) -> (AgentId, AgentId) {
        (self.0, self.1)
    }
}

/// An oriented triangle `(i, j, k)`. The order fixes which sign of the signed
/// area counts as correct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Clique {
    pub i: AgentId,
    pub j: AgentId,
    pub k: AgentId,
}

impl Clique {
    pub fn new(i: usize, j: usize, k: usize) -> Self {
        Clique {
            i: AgentId(i),
            j: AgentId(j),
            k: AgentId(k),
        }
    }

    pub fn agents(self) -> [AgentId; 3] {
        [self.i, self.j, self.k]
    }

    fn sorted(self) -> [AgentId; 3] {
        let mut a = self.agents();
        a.sort();
        a
    }

    pub fn contains(self, a: AgentId) -> bool {
        self.agents().contains(&a)
    }

    /// +1 if `(a, b, c)` is a cyclic rotation of this clique's order, -1 if it
    /// is a rotation of the reversed order. `None` when the agents differ.
    pub fn parity_of(self, a: AgentId, b: AgentId, c: AgentId) -> Option<i8> {
        let fwd = [self.i, self.j, self.k];
        for r in 0..3 {
            if [fwd[r], fwd[(r + 1) % 3], fwd[(r + 2) % 3]] == [a, b, c] {
                return Some(1);
            }
            if [fwd[r], fwd[(r + 2) % 3], fwd[(r + 1) % 3]] == [a, b, c] {
                return Some(-1);
            }
        }
        None
    }

    pub fn signed_area(self, positions: &[Position]) -> f64 {
        signed_area(
            positions[self.i.index()],
            positions[self.j.index()],
            positions[self.k.index()],
        )
    }
}

impl fmt::Display for Clique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.i, self.j, self.k)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("formation needs at least two agents, got {0}")]
    TooFewAgents(usize),
    #[error("agent {agent} out of range 1..={n}")]
    AgentOutOfRange { agent: usize, n: usize },
    #[error("self-loop on agent {0}")]
    SelfLoop(AgentId),
    #[error("edge ({0},{1}) listed twice")]
    DuplicateEdge(AgentId, AgentId),
    #[error("clique {clique} uses missing edge ({a},{b})")]
    CliqueEdgeMissing {
        clique: Clique,
        a: AgentId,
        b: AgentId,
    },
    #[error("clique {0} listed more than once")]
    DuplicateClique(Clique),
    #[error("triangle ({0},{1},{2}) of the graph is not in the clique list")]
    MissingClique(AgentId, AgentId, AgentId),
    #[error("clique {0} has repeated agents")]
    DegenerateClique(Clique),
    #[error("desired distance must be finite and positive, got {0}")]
    BadDistance(f64),
    #[error("orientation list has {got} entries for {expected} cliques")]
    OrientationCount { expected: usize, got: usize },
    #[error("graph is not triangulated: agent {agent} cannot be attached ({reason})")]
    NotTriangulated { agent: AgentId, reason: String },
}

/// Undirected interaction graph with its complete, oriented triangle list.
#[derive(Debug, Clone, PartialEq)]
pub struct FormationGraph {
    n: usize,
    edges: BTreeSet<Edge>,
    cliques: Vec<Clique>,
    adjacency: Vec<BTreeSet<AgentId>>,
}

impl FormationGraph {
    /// Build and validate a graph. The clique list must name every triangle
    /// of the edge set exactly once.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        cliques: impl IntoIterator<Item = Clique>,
    ) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewAgents(n));
        }
        let check = |a: usize| {
            if a == 0 || a > n {
                Err(GraphError::AgentOutOfRange { agent: a, n })
            } else {
                Ok(AgentId(a))
            }
        };
        let mut edge_set = BTreeSet::new();
        let mut adjacency = vec![BTreeSet::new(); n];
        for (a, b) in edges {
            let (a, b) = (check(a)?, check(b)?);
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let e = Edge::new(a, b);
            if !edge_set.insert(e) {
                return Err(GraphError::DuplicateEdge(e.0, e.1));
            }
            adjacency[a.index()].insert(b);
            adjacency[b.index()].insert(a);
        }

        let mut listed = BTreeMap::new();
        let mut clique_list = Vec::new();
        for c in cliques {
            for a in c.agents() {
                check(a.0)?;
            }
            let [a, b, d] = c.sorted();
            if a == b || b == d {
                return Err(GraphError::DegenerateClique(c));
            }
            for (x, y) in [(c.i, c.j), (c.j, c.k), (c.k, c.i)] {
                if !edge_set.contains(&Edge::new(x, y)) {
                    return Err(GraphError::CliqueEdgeMissing {
                        clique: c,
                        a: x,
                        b: y,
                    });
                }
            }
            if listed.insert(c.sorted(), c).is_some() {
                return Err(GraphError::DuplicateClique(c));
            }
            clique_list.push(c);
        }

        let graph = FormationGraph {
            n,
            edges: edge_set,
            cliques: clique_list,
            adjacency,
        };
        for tri in graph.enumerate_triangles() {
            if !listed.contains_key(&tri) {
                return Err(GraphError::MissingClique(tri[0], tri[1], tri[2]));
            }
        }
        Ok(graph)
    }

    /// Build from edges alone, listing every triangle in ascending label order.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let edges: Vec<_> = edges.into_iter().collect();
        let bare = FormationGraph::new(n, edges.iter().copied(), []).or_else(|e| match e {
            GraphError::MissingClique(..) => Ok(FormationGraph::unchecked(n, &edges)),
            other => Err(other),
        })?;
        let cliques: Vec<_> = bare
            .enumerate_triangles()
            .into_iter()
            .map(|[a, b, c]| Clique { i: a, j: b, k: c })
            .collect();
        FormationGraph::new(n, edges, cliques)
    }

    fn unchecked(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![BTreeSet::new(); n];
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            set.insert(Edge::new(AgentId(a), AgentId(b)));
            adjacency[a - 1].insert(AgentId(b));
            adjacency[b - 1].insert(AgentId(a));
        }
        FormationGraph {
            n,
            edges: set,
            cliques: Vec::new(),
            adjacency,
        }
    }

    pub fn agent_count(&self) -> usize {
        self.n
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        (1..=self.n).map(AgentId)
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn cliques(&self) -> &[Clique] {
        &self.cliques
    }

    pub fn has_edge(&self, a: AgentId, b: AgentId) -> bool {
        self.edges.contains(&Edge::new(a, b))
    }

    pub fn neighbors(&self, a: AgentId) -> impl Iterator<Item = AgentId> + '_ {
        self.adjacency[a.index()].iter().copied()
    }

    /// The stored clique over the given three agents, in any order.
    pub fn clique_of(&self, a: AgentId, b: AgentId, c: AgentId) -> Option<(usize, Clique)> {
        let mut key = [a, b, c];
        key.sort();
        self.cliques
            .iter()
            .copied()
            .enumerate()
            .find(|(_, q)| q.sorted() == key)
    }

    /// Every triangle of the edge set, as ascending triples.
    pub fn enumerate_triangles(&self) -> Vec<[AgentId; 3]> {
        let mut out = Vec::new();
        for e in &self.edges {
            let (a, b) = e.endpoints();
            for &c in self.adjacency[b.index()].range(AgentId(b.0 + 1)..) {
                if self.adjacency[a.index()].contains(&c) {
                    out.push([a, b, c]);
                }
            }
        }
        out.sort();
        out
    }

    /// The ten-agent, nine-triangle graph used throughout the reproduction
    /// scenarios. Cliques carry the counterclockwise orientations of the
    /// hierarchical assignment, so every desired signed area is positive.
    pub fn example_ten_agent() -> Self {
        let cliques = [
            Clique::new(1, 2, 3),
            Clique::new(3, 2, 5),
            Clique::new(5, 2, 4),
            Clique::new(3, 5, 6),
            Clique::new(5, 4, 8),
            Clique::new(6, 5, 9),
            Clique::new(8, 4, 7),
            Clique::new(6, 9, 10),
            Clique::new(5, 8, 9),
        ];
        let mut edges = BTreeSet::new();
        for c in cliques {
            for (a, b) in [(c.i, c.j), (c.j, c.k), (c.k, c.i)] {
                let e = Edge::new(a, b);
                edges.insert((e.0 .0, e.1 .0));
            }
        }
        FormationGraph::new(10, edges, cliques).expect("example graph is well formed")
    }

    /// A single triangle (1,2,3), counterclockwise.
    pub fn single_triangle() -> Self {
        FormationGraph::new(3, [(1, 2), (2, 3), (1, 3)], [Clique::new(1, 2, 3)])
            .expect("triangle is well formed")
    }

    /// Two agents joined by one edge.
    pub fn single_pair() -> Self {
        FormationGraph::new(2, [(1, 2)], []).expect("pair is well formed")
    }
}

/// One attachment step of a type-1 Henneberg construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Attachment {
    pub agent: AgentId,
    pub bases: (AgentId, AgentId),
}

/// Result of a successful triangulated-Laman check.
#[derive(Debug, Clone, PartialEq)]
pub struct HennebergOrdering {
    /// Vertex order; the first two share an edge.
    pub order: Vec<AgentId>,
    /// Base pair used for each vertex from the third on.
    pub attachments: Vec<Attachment>,
    /// Edges not used by the construction. Empty iff the graph is exactly a
    /// triangulated Laman graph with `2n - 3` edges.
    pub extra_edges: Vec<Edge>,
}

impl HennebergOrdering {
    pub fn is_minimally_rigid(&self) -> bool {
        self.extra_edges.is_empty()
    }
}

/// Search for an ordering in which every vertex after the first two closes a
/// triangle with two earlier, mutually adjacent vertices.
///
/// Greedy lowest-index-first attachment, retried from every starting edge.
/// Edges beyond the `2n - 3` used by the construction are
/// reported in [`HennebergOrdering::extra_edges`] rather than rejected, so
/// braced triangulations (like the ten-agent example, whose edge (8,9) closes
/// a ninth triangle) are accepted.
pub fn validate_triangulated_laman(
    graph: &FormationGraph,
) -> Result<HennebergOrdering, GraphError> {
    let n = graph.agent_count();
    let mut best_failure: Option<(usize, AgentId)> = None;

    for e in graph.edges() {
        let (a, b) = e.endpoints();
        let mut placed = vec![false; n];
        placed[a.index()] = true;
        placed[b.index()] = true;
        let mut order = vec![a, b];
        let mut attachments = Vec::new();
        if extend(
            graph,
            &mut placed,
            &mut order,
            &mut attachments,
            &mut best_failure,
        ) {
            let used: BTreeSet<Edge> = std::iter::once(Edge::new(a, b))
                .chain(attachments.iter().flat_map(|at| {
                    [
                        Edge::new(at.agent, at.bases.0),
                        Edge::new(at.agent, at.bases.1),
                    ]
                }))
                .collect();
            let extra_edges = graph.edges().filter(|e| !used.contains(e)).collect();
            return Ok(HennebergOrdering {
                order,
                attachments,
                extra_edges,
            });
        }
    }

    let agent = match best_failure {
        Some((_, agent)) => agent,
        None => graph.agents().next().unwrap_or(AgentId(1)),
    };
    let reason = if graph.edge_count() == 0 {
        "graph has no edges".to_string()
    } else {
        format!(
            "no two adjacent, already-placed neighbours among {:?}",
            graph.neighbors(agent).map(|a| a.0).collect::<Vec<_>>()
        )
    };
    Err(GraphError::NotTriangulated { agent, reason })
}

fn base_pair(graph: &FormationGraph, placed: &[bool], v: AgentId) -> Option<(AgentId, AgentId)> {
    let earlier: Vec<AgentId> = graph.neighbors(v).filter(|u| placed[u.index()]).collect();
    for (x, &p) in earlier.iter().enumerate() {
        for &q in &earlier[x + 1..] {
            if graph.has_edge(p, q) {
                return Some((p, q));
            }
        }
    }
    None
}

fn extend(
    graph: &FormationGraph,
    placed: &mut [bool],
    order: &mut Vec<AgentId>,
    attachments: &mut Vec<Attachment>,
    best_failure: &mut Option<(usize, AgentId)>,
) -> bool {
    if order.len() == placed.len() {
        return true;
    }
    let candidate = graph
        .agents()
        .filter(|v| !placed[v.index()])
        .find_map(|v| base_pair(graph, placed, v).map(|bases| (v, bases)));
    let Some((v, bases)) = candidate else {
        let stuck = graph
            .agents()
            .find(|v| !placed[v.index()])
            .expect("unplaced agent exists");
        if best_failure.is_none_or(|(depth, _)| order.len() > depth) {
            *best_failure = Some((order.len(), stuck));
        }
        return false;
    };
    // Attachability only grows as vertices are placed, so the first candidate
    // is as good as any other: no need to branch at this depth.
    placed[v.index()] = true;
    order.push(v);
    attachments.push(Attachment { agent: v, bases });
    if extend(graph, placed, order, attachments, best_failure) {
        return true;
    }
    placed[v.index()] = false;
    order.pop();
    attachments.pop();
    false
}

/// Graph plus desired edge length and per-clique orientation sign.
#[derive(Debug, Clone, PartialEq)]
pub struct DesiredFormation {
    graph: FormationGraph,
    d_star: f64,
    orientation: Vec<i8>,
}

impl DesiredFormation {
    /// All cliques positively oriented.
    pub fn new(graph: FormationGraph, d_star: f64) -> Result<Self, GraphError> {
        let m = graph.cliques().len();
        Self::with_orientation(graph, d_star, vec![1; m])
    }

    pub fn with_orientation(
        graph: FormationGraph,
        d_star: f64,
        orientation: Vec<i8>,
    ) -> Result<Self, GraphError> {
        if !(d_star.is_finite() && d_star > 0.0) {
            return Err(GraphError::BadDistance(d_star));
        }
        if orientation.len() != graph.cliques().len() {
            return Err(GraphError::OrientationCount {
                expected: graph.cliques().len(),
                got: orientation.len(),
            });
        }
        let orientation = orientation
            .into_iter()
            .map(|s| if s < 0 { -1 } else { 1 })
            .collect();
        Ok(DesiredFormation {
            graph,
            d_star,
            orientation,
        })
    }

    pub fn graph(&self) -> &FormationGraph {
        &self.graph
    }

    pub fn d_star(&self) -> f64 {
        self.d_star
    }

    pub fn orientation(&self) -> &[i8] {
        &self.orientation
    }

    /// Magnitude of every desired signed area, `(sqrt(3)/4) d*^2`.
    pub fn area_magnitude(&self) -> f64 {
        equilateral_area(self.d_star)
    }

    /// Desired signed area of the `idx`-th clique in its stored order.
    pub fn desired_area(&self, idx: usize) -> f64 {
        f64::from(self.orientation[idx]) * self.area_magnitude()
    }
}

/// Worst edge-length and signed-area errors of a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormationErrors {
    pub max_distance_error: f64,
    pub max_area_error: f64,
}

impl FormationErrors {
    pub fn within(&self, tol: f64) -> bool {
        self.max_distance_error < tol && self.max_area_error < tol
    }
}

/// Max over edges of `| |p_i - p_j| - d* |` and max over cliques of `|Z - Z*|`.
pub fn formation_errors(df: &DesiredFormation, positions: &[Position]) -> FormationErrors {
    assert_eq!(
        positions.len(),
        df.graph.agent_count(),
        "one position per agent"
    );
    let max_distance_error = df
        .graph
        .edges()
        .map(|e| {
            let (a, b) = e.endpoints();
            (distance(positions[a.index()], positions[b.index()]) - df.d_star).abs()
        })
        .fold(0.0, f64::max);
    let max_area_error = df
        .graph
        .cliques()
        .iter()
        .enumerate()
        .map(|(idx, c)| (c.signed_area(positions) - df.desired_area(idx)).abs())
        .fold(0.0, f64::max);
    FormationErrors {
        max_distance_error,
        max_area_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn four_cycle() -> FormationGraph {
        FormationGraph::new(4, [(1, 2), (2, 3), (3, 4), (4, 1)], []).unwrap()
    }

    #[test]
    fn example_graph_shape() {
        let g = FormationGraph::example_ten_agent();
        assert_eq!(g.agent_count(), 10);
        assert_eq!(g.cliques().len(), 9);
        assert!(g.clique_of(AgentId(1), AgentId(2), AgentId(3)).is_some());
        assert!(g.clique_of(AgentId(6), AgentId(9), AgentId(10)).is_some());
        for c in g.cliques() {
            assert!(g.has_edge(c.i, c.j) && g.has_edge(c.j, c.k) && g.has_edge(c.k, c.i));
        }
        assert_eq!(g.enumerate_triangles().len(), 9);
        assert_eq!(g.edge_count(), 18);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(
            FormationGraph::new(3, [(1, 1)], []),
            Err(GraphError::SelfLoop(AgentId(1)))
        );
        assert!(matches!(
            FormationGraph::new(3, [(1, 4)], []),
            Err(GraphError::AgentOutOfRange { .. })
        ));
        assert!(matches!(
            FormationGraph::new(3, [(1, 2), (2, 1)], []),
            Err(GraphError::DuplicateEdge(..))
        ));
        assert!(matches!(
            FormationGraph::new(3, [(1, 2), (2, 3), (1, 3)], []),
            Err(GraphError::MissingClique(..))
        ));
        assert!(matches!(
            FormationGraph::new(3, [(1, 2), (2, 3)], [Clique::new(1, 2, 3)]),
            Err(GraphError::CliqueEdgeMissing { .. })
        ));
        assert!(matches!(
            FormationGraph::new(
                3,
                [(1, 2), (2, 3), (1, 3)],
                [Clique::new(1, 2, 3), Clique::new(3, 2, 1)]
            ),
            Err(GraphError::DuplicateClique(..))
        ));
    }

    #[test]
    fn from_edges_lists_triangles() {
        let g = FormationGraph::from_edges(4, [(1, 2), (2, 3), (1, 3), (2, 4), (3, 4)]).unwrap();
        assert_eq!(g.cliques(), &[Clique::new(1, 2, 3), Clique::new(2, 3, 4)]);
    }

    #[test]
    fn parity() {
        let c = Clique::new(3, 2, 5);
        let (a, b, d) = (AgentId(3), AgentId(2), AgentId(5));
        assert_eq!(c.parity_of(a, b, d), Some(1));
        assert_eq!(c.parity_of(b, d, a), Some(1));
        assert_eq!(c.parity_of(b, a, d), Some(-1));
        assert_eq!(c.parity_of(a, b, AgentId(9)), None);
    }

    /// Independent oracle: try every vertex permutation (up to n = 8) and every
    /// attachment choice.
    fn brute_force_triangulated(g: &FormationGraph) -> bool {
        fn rec(g: &FormationGraph, placed: &mut Vec<AgentId>, left: &mut Vec<AgentId>) -> bool {
            if left.is_empty() {
                return true;
            }
            for idx in 0..left.len() {
                let v = left[idx];
                let ok = if placed.len() < 2 {
                    placed.is_empty() || g.has_edge(placed[0], v)
                } else {
                    placed.iter().enumerate().any(|(x, &p)| {
                        placed[x + 1..]
                            .iter()
                            .any(|&q| g.has_edge(p, v) && g.has_edge(q, v) && g.has_edge(p, q))
                    })
                };
                if ok {
                    left.remove(idx);
                    placed.push(v);
                    if rec(g, placed, left) {
                        return true;
                    }
                    placed.pop();
                    left.insert(idx, v);
                }
            }
            false
        }
        rec(g, &mut Vec::new(), &mut g.agents().collect())
    }

    #[test]
    fn example_graph_is_triangulated() {
        let g = FormationGraph::example_ten_agent();
        let ord = validate_triangulated_laman(&g).unwrap();
        assert_eq!(ord.order.len(), 10);
        assert_eq!(ord.extra_edges.len(), 1);
        assert!(!ord.is_minimally_rigid());
        check_ordering(&g, &ord);
    }

    #[test]
    fn small_graphs_agree_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.random_range(3..=7);
            let mut edges = Vec::new();
            for a in 1..=n {
                for b in a + 1..=n {
                    if rng.random_bool(0.55) {
                        edges.push((a, b));
                    }
                }
            }
            let Ok(g) = FormationGraph::from_edges(n, edges) else {
                continue;
            };
            let fast = validate_triangulated_laman(&g);
            assert_eq!(fast.is_ok(), brute_force_triangulated(&g), "{g:?}");
            if let Ok(ord) = fast {
                check_ordering(&g, &ord);
            }
        }
    }

    fn check_ordering(g: &FormationGraph, ord: &HennebergOrdering) {
        assert!(g.has_edge(ord.order[0], ord.order[1]));
        for (pos, at) in ord.attachments.iter().enumerate() {
            assert_eq!(ord.order[pos + 2], at.agent);
            let earlier = &ord.order[..pos + 2];
            assert!(earlier.contains(&at.bases.0) && earlier.contains(&at.bases.1));
            assert!(g.has_edge(at.bases.0, at.bases.1));
            assert!(g.has_edge(at.agent, at.bases.0) && g.has_edge(at.agent, at.bases.1));
        }
    }

    #[test]
    fn triangle_and_cycle() {
        assert!(
            validate_triangulated_laman(&FormationGraph::single_triangle())
                .unwrap()
                .is_minimally_rigid()
        );
        let err = validate_triangulated_laman(&four_cycle()).unwrap_err();
        assert!(matches!(err, GraphError::NotTriangulated { .. }));
    }

    pub(crate) fn random_henneberg(n: usize, seed: u64) -> FormationGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = vec![(1, 2)];
        for v in 3..=n {
            let (a, b) = edges[rng.random_range(0..edges.len())];
            edges.push((a, v));
            edges.push((b, v));
        }
        // Relabel so construction order is not the label order.
        let mut perm: Vec<usize> = (1..=n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let edges = edges.into_iter().map(|(a, b)| (perm[a - 1], perm[b - 1]));
        FormationGraph::from_edges(n, edges).unwrap()
    }

    proptest! {
        #[test]
        fn henneberg_growth_accepted(n in 3usize..=30, seed in any::<u64>()) {
            let g = random_henneberg(n, seed);
            let ord = validate_triangulated_laman(&g);
            prop_assert!(ord.is_ok());
            let ord = ord.unwrap();
            check_ordering(&g, &ord);
            prop_assert!(ord.is_minimally_rigid());
            prop_assert_eq!(g.edge_count(), 2 * n - 3);
        }
    }

    fn lattice_positions(d: f64) -> Vec<Position> {
        let h = 3f64.sqrt() / 2.0 * d;
        let raw = [
            (0.0, 0.0),
            (1.0, 0.0),
            (0.5, 1.0),
            (2.0, 0.0),
            (1.5, 1.0),
            (1.0, 2.0),
            (3.0, 0.0),
            (2.5, 1.0),
            (2.0, 2.0),
            (1.5, 3.0),
        ];
        raw.iter()
            .map(|&(x, r)| Position::new(x * d, r * h))
            .collect()
    }

    #[test]
    fn lattice_has_zero_error() {
        let df = DesiredFormation::new(FormationGraph::example_ten_agent(), 1.5).unwrap();
        let e = formation_errors(&df, &lattice_positions(1.5));
        assert!(
            e.max_distance_error < 1e-14 && e.max_area_error < 1e-14,
            "{e:?}"
        );
    }

    #[test]
    fn flipped_apex_reports_double_area() {
        let d = 2.0;
        let df = DesiredFormation::new(FormationGraph::example_ten_agent(), d).unwrap();
        let mut p = lattice_positions(d);
        // Agent 10 only belongs to (6,9,10); mirror it across 6-9.
        p[9] = p[9].reflected_across(p[5], p[8]);
        let e = formation_errors(&df, &p);
        assert!(e.max_distance_error < 1e-14);
        assert!((e.max_area_error - 2.0 * equilateral_area(d)).abs() < 1e-12);
    }

    #[test]
    fn errors_match_brute_force() {
        let g = FormationGraph::example_ten_agent();
        let df = DesiredFormation::new(g.clone(), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let p: Vec<Position> = (0..10)
                .map(|_| Position::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
                .collect();
            let mut md = 0.0f64;
            for a in 1..=10 {
                for b in a + 1..=10 {
                    if g.has_edge(AgentId(a), AgentId(b)) {
                        let (pa, pb) = (p[a - 1], p[b - 1]);
                        let d = ((pa.x() - pb.x()).powi(2) + (pa.y() - pb.y()).powi(2)).sqrt();
                        md = md.max((d - 1.0).abs());
                    }
                }
            }
            let mut ma = 0.0f64;
            for c in g.cliques() {
                let (a, b, k) = (p[c.i.index()], p[c.j.index()], p[c.k.index()]);
                let z =
                    0.5 * ((b.x() - a.x()) * (k.y() - a.y()) - (k.x() - a.x()) * (b.y() - a.y()));
                ma = ma.max((z - 3f64.sqrt() / 4.0).abs());
            }
            let e = formation_errors(&df, &p);
            assert_eq!(e.max_distance_error, md);
            assert!((e.max_area_error - ma).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn errors_rigid_motion_invariant(seed in any::<u64>(), th in 0.0..std::f64::consts::TAU,
                                         tx in -50.0..50.0f64, ty in -50.0..50.0f64) {
            let df = DesiredFormation::new(FormationGraph::example_ten_agent(), 1.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p: Vec<Position> =
                (0..10).map(|_| Position::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0))).collect();
            let q: Vec<Position> = p.iter().map(|&x| {
                let r = x.rotated(th);
                Position::new(r.x() + tx, r.y() + ty)
            }).collect();
            let (e1, e2) = (formation_errors(&df, &p), formation_errors(&df, &q));
            prop_assert!((e1.max_distance_error - e2.max_distance_error).abs() < 1e-9);
            prop_assert!((e1.max_area_error - e2.max_area_error).abs() < 1e-9);
        }
    }
}
