//! Layered assignment of one potential per agent, and the resulting control
//! field `u_i = -kappa * dV_i/dp_i`.
//!
//! The root agent never moves, the second root agent holds a fixed distance
//! to it, and every other agent closes one equilateral triangle with two
//! agents assigned before it. An agent's input therefore only depends on
//! agents that come earlier in the processing order, which is what makes the
//! closed loop a cascade.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::geometry::{PlanarVector, Position};
use crate::graph::{validate_triangulated_laman, AgentId, DesiredFormation, GraphError};
use crate::potentials::{
    pair_gradient, pair_potential, triangle_gradient, triangle_potential, PairAgent,
    PairPotentialSpec, PotentialError, TriangleAgent, TrianglePotentialSpec,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HierarchyError {
    #[error("root edge ({0},{1}) is not an edge of the graph")]
    RootNotEdge(AgentId, AgentId),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("agent {0} has no base pair reachable from the root edge")]
    Unreachable(AgentId),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("rate gain kappa must be finite and positive, got {0}")]
    BadKappa(f64),
}

/// Which potential an agent descends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    /// `V_i = 0`; the agent never moves.
    Stationary,
    /// `V_i = V_(anchor, i)`.
    Pair { anchor: AgentId },
    /// `V_i = V_(base.0, base.1, i)`, ordered so the desired signed area of
    /// `(base.0, base.1, i)` is positive. `clique` indexes the graph's clique
    /// list.
    Triangle {
        base: (AgentId, AgentId),
        clique: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PotentialAssignment {
    pub agent: AgentId,
    pub kind: PotentialKind,
    /// Cosmetic layer label, 1 for the root. Bases never sit in a later layer
    /// than the agents that use them.
    pub layer: u32,
}

impl PotentialAssignment {
    /// Agents whose positions enter this agent's potential.
    pub fn dependencies(&self) -> Vec<AgentId> {
        match self.kind {
            PotentialKind::Stationary => vec![],
            PotentialKind::Pair { anchor } => vec![anchor],
            PotentialKind::Triangle { base, .. } => vec![base.0, base.1],
        }
    }
}

impl fmt::Display for PotentialAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = self.agent;
        match self.kind {
            PotentialKind::Stationary => write!(f, "V_{i} = 0"),
            PotentialKind::Pair { anchor } => write!(f, "V_{i} = V_({anchor},{i})"),
            PotentialKind::Triangle { base, .. } => {
                write!(f, "V_{i} = V_({},{},{i})", base.0, base.1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyPlan {
    /// Indexed by `AgentId::index`.
    assignments: Vec<PotentialAssignment>,
    /// Every agent appears after all of its dependencies.
    order: Vec<AgentId>,
}

impl HierarchyPlan {
    pub fn assignment(&self, agent: AgentId) -> &PotentialAssignment {
        &self.assignments[agent.index()]
    }

    pub fn assignments(&self) -> &[PotentialAssignment] {
        &self.assignments
    }

    pub fn processing_order(&self) -> &[AgentId] {
        &self.order
    }

    pub fn agent_count(&self) -> usize {
        self.assignments.len()
    }

    /// Agents grouped by layer label, ascending.
    pub fn layers(&self) -> Vec<Vec<AgentId>> {
        let max = self.assignments.iter().map(|a| a.layer).max().unwrap_or(0);
        (1..=max)
            .map(|l| {
                self.assignments
                    .iter()
                    .filter(|a| a.layer == l)
                    .map(|a| a.agent)
                    .collect()
            })
            .filter(|v: &Vec<AgentId>| !v.is_empty())
            .collect()
    }

    pub fn stationary_agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.assignments
            .iter()
            .filter(|a| a.kind == PotentialKind::Stationary)
            .map(|a| a.agent)
    }

    /// A configuration achieving every assigned potential's minimum, with the
    /// root at `origin` and the second root agent along `+x`.
    pub fn target_positions(&self, df: &DesiredFormation, origin: Position) -> Vec<Position> {
        let d = df.d_star();
        let height = 3f64.sqrt() / 2.0 * d;
        let mut out = vec![origin; self.agent_count()];
        for &agent in &self.order {
            let a = self.assignment(agent);
            out[agent.index()] = match a.kind {
                PotentialKind::Stationary => origin,
                PotentialKind::Pair { anchor } => out[anchor.index()] + PlanarVector::new(d, 0.0),
                PotentialKind::Triangle { base, .. } => {
                    let (p, q) = (out[base.0.index()], out[base.1.index()]);
                    let side = q - p;
                    let mid = p + side * 0.5;
                    mid + side.perp() * (height / side.norm())
                }
            };
        }
        out
    }
}

/// Assign a potential and layer to every agent, starting from `root_edge`.
///
/// Among agents that can be attached next, the one whose base pair has the
/// smallest `(layer, label)` keys goes first; each agent takes the smallest
/// such base pair available when it is attached. The layer label is
/// `max(hops from the root agent + 2, layers of both bases)`.
pub fn build_hierarchy(
    df: &DesiredFormation,
    root_edge: (AgentId, AgentId),
) -> Result<HierarchyPlan, HierarchyError> {
    let graph = df.graph();
    let (r0, r1) = root_edge;
    if r0.0 == 0
        || r1.0 == 0
        || r0.0 > graph.agent_count()
        || r1.0 > graph.agent_count()
        || !graph.has_edge(r0, r1)
    {
        return Err(HierarchyError::RootNotEdge(r0, r1));
    }
    validate_triangulated_laman(graph)?;

    let n = graph.agent_count();
    let hops = hop_distances(df, r0);
    let mut slot: Vec<Option<PotentialAssignment>> = vec![None; n];
    slot[r0.index()] = Some(PotentialAssignment {
        agent: r0,
        kind: PotentialKind::Stationary,
        layer: 1,
    });
    slot[r1.index()] = Some(PotentialAssignment {
        agent: r1,
        kind: PotentialKind::Pair { anchor: r0 },
        layer: 2,
    });
    let mut order = vec![r0, r1];

    type Key = [(u32, AgentId); 2];
    while order.len() < n {
        let mut best: Option<(Key, AgentId, (AgentId, AgentId))> = None;
        for v in graph.agents().filter(|v| slot[v.index()].is_none()) {
            let placed: Vec<AgentId> = graph
                .neighbors(v)
                .filter(|u| slot[u.index()].is_some())
                .collect();
            for (x, &p) in placed.iter().enumerate() {
                for &q in &placed[x + 1..] {
                    if !graph.has_edge(p, q) {
                        continue;
                    }
                    let mut key = [(layer_of(&slot, p), p), (layer_of(&slot, q), q)];
                    key.sort();
                    let better = match &best {
                        None => true,
                        Some((bk, bv, _)) => (key, v) < (*bk, *bv),
                    };
                    if better {
                        best = Some((key, v, (p, q)));
                    }
                }
            }
        }
        let Some((_, v, (p, q))) = best else {
            let stuck = graph
                .agents()
                .find(|v| slot[v.index()].is_none())
                .expect("unassigned agent");
            return Err(HierarchyError::Unreachable(stuck));
        };
        let (clique, c) = graph
            .clique_of(p, q, v)
            .expect("every triangle is a listed clique");
        let parity = c.parity_of(p, q, v).expect("same agents");
        let sign = parity * df.orientation()[clique];
        let base = if sign > 0 { (p, q) } else { (q, p) };
        let layer = (hops[v.index()] + 2)
            .max(layer_of(&slot, p))
            .max(layer_of(&slot, q));
        slot[v.index()] = Some(PotentialAssignment {
            agent: v,
            kind: PotentialKind::Triangle { base, clique },
            layer,
        });
        order.push(v);
    }

    Ok(HierarchyPlan {
        assignments: slot.into_iter().map(|a| a.expect("all assigned")).collect(),
        order,
    })
}

fn layer_of(slot: &[Option<PotentialAssignment>], a: AgentId) -> u32 {
    slot[a.index()].map(|s| s.layer).expect("assigned")
}

fn hop_distances(df: &DesiredFormation, root: AgentId) -> Vec<u32> {
    let graph = df.graph();
    let mut dist = vec![u32::MAX; graph.agent_count()];
    dist[root.index()] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(a) = queue.pop_front() {
        for b in graph.neighbors(a) {
            if dist[b.index()] == u32::MAX {
                dist[b.index()] = dist[a.index()] + 1;
                queue.push_back(b);
            }
        }
    }
    dist
}

/// Signed-area gain `K` and overall rate gain `kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlGains {
    pub k_gain: f64,
    pub kappa: f64,
}

impl ControlGains {
    pub fn new(k_gain: f64) -> Self {
        ControlGains { k_gain, kappa: 1.0 }
    }
}

/// A plan bound to a desired formation and gains.
#[derive(Debug, Clone)]
pub struct ControlLaw {
    plan: HierarchyPlan,
    formation: DesiredFormation,
    gains: ControlGains,
    pair: PairPotentialSpec,
    triangle: TrianglePotentialSpec,
}

impl ControlLaw {
    pub fn new(
        plan: HierarchyPlan,
        formation: DesiredFormation,
        gains: ControlGains,
    ) -> Result<Self, HierarchyError> {
        if !(gains.kappa.is_finite() && gains.kappa > 0.0) {
            return Err(HierarchyError::BadKappa(gains.kappa));
        }
        let pair = PairPotentialSpec::new(formation.d_star())?;
        let triangle = TrianglePotentialSpec::new(
            formation.d_star(),
            formation.area_magnitude(),
            gains.k_gain,
        )?;
        Ok(ControlLaw {
            plan,
            formation,
            gains,
            pair,
            triangle,
        })
    }

    pub fn plan(&self) -> &HierarchyPlan {
        &self.plan
    }

    pub fn formation(&self) -> &DesiredFormation {
        &self.formation
    }

    pub fn gains(&self) -> ControlGains {
        self.gains
    }

    pub fn agent_count(&self) -> usize {
        self.plan.agent_count()
    }

    /// `V_i` at the given configuration.
    pub fn agent_potential(&self, agent: AgentId, positions: &[Position]) -> f64 {
        let me = positions[agent.index()];
        match self.plan.assignment(agent).kind {
            PotentialKind::Stationary => 0.0,
            PotentialKind::Pair { anchor } => {
                pair_potential(&self.pair, positions[anchor.index()], me)
            }
            PotentialKind::Triangle { base, .. } => triangle_potential(
                &self.triangle,
                positions[base.0.index()],
                positions[base.1.index()],
                me,
            ),
        }
    }

    /// `sum_i V_i`.
    pub fn total_potential(&self, positions: &[Position]) -> f64 {
        self.plan
            .assignments
            .iter()
            .map(|a| self.agent_potential(a.agent, positions))
            .sum()
    }

    /// Input of a single agent.
    pub fn agent_input(&self, agent: AgentId, positions: &[Position]) -> PlanarVector {
        let me = positions[agent.index()];
        let grad = match self.plan.assignment(agent).kind {
            PotentialKind::Stationary => return PlanarVector::ZERO,
            PotentialKind::Pair { anchor } => {
                pair_gradient(&self.pair, positions[anchor.index()], me, PairAgent::J)
            }
            PotentialKind::Triangle { base, .. } => triangle_gradient(
                &self.triangle,
                positions[base.0.index()],
                positions[base.1.index()],
                me,
                TriangleAgent::K,
            ),
        };
        grad * -self.gains.kappa
    }

    /// `u_i = -kappa dV_i/dp_i` for every agent, indexed by `AgentId::index`.
    pub fn control_field(&self, positions: &[Position]) -> Vec<PlanarVector> {
        assert_eq!(
            positions.len(),
            self.agent_count(),
            "one position per agent"
        );
        self.plan
            .assignments
            .iter()
            .map(|a| self.agent_input(a.agent, positions))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::FormationGraph;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn id(i: usize) -> AgentId {
        AgentId(i)
    }

    fn example() -> (DesiredFormation, HierarchyPlan) {
        let df = DesiredFormation::new(FormationGraph::example_ten_agent(), 1.0).unwrap();
        let plan = build_hierarchy(&df, (id(1), id(2))).unwrap();
        (df, plan)
    }

    #[test]
    fn example_reproduces_assignment_table() {
        let (_, plan) = example();
        let table: Vec<String> = (1..=10)
            .map(|i| plan.assignment(id(i)).to_string())
            .collect();
        assert_eq!(
            table,
            [
                "V_1 = 0",
                "V_2 = V_(1,2)",
                "V_3 = V_(1,2,3)",
                "V_4 = V_(5,2,4)",
                "V_5 = V_(3,2,5)",
                "V_6 = V_(3,5,6)",
                "V_7 = V_(8,4,7)",
                "V_8 = V_(5,4,8)",
                "V_9 = V_(6,5,9)",
                "V_10 = V_(6,9,10)",
            ]
        );
        let layers: Vec<Vec<usize>> = plan
            .layers()
            .iter()
            .map(|l| l.iter().map(|a| a.0).collect())
            .collect();
        assert_eq!(
            layers,
            vec![vec![1], vec![2], vec![3], vec![4, 5, 6], vec![7, 8, 9, 10]]
        );
    }

    #[test]
    fn order_respects_dependencies() {
        let (_, plan) = example();
        let order = plan.processing_order();
        for a in plan.assignments() {
            let pos = order.iter().position(|&x| x == a.agent).unwrap();
            for d in a.dependencies() {
                assert!(order.iter().position(|&x| x == d).unwrap() < pos);
                assert!(plan.assignment(d).layer <= a.layer);
            }
        }
    }

    #[test]
    fn single_triangle_and_bad_graphs() {
        let df = DesiredFormation::new(FormationGraph::single_triangle(), 2.0).unwrap();
        let plan = build_hierarchy(&df, (id(1), id(2))).unwrap();
        assert_eq!(
            plan.assignment(id(3)).kind,
            PotentialKind::Triangle {
                base: (id(1), id(2)),
                clique: 0
            }
        );

        let cyc = FormationGraph::new(4, [(1, 2), (2, 3), (3, 4), (4, 1)], []).unwrap();
        let df = DesiredFormation::new(cyc, 1.0).unwrap();
        assert!(matches!(
            build_hierarchy(&df, (id(1), id(2))),
            Err(HierarchyError::Graph(_))
        ));

        let df = DesiredFormation::new(FormationGraph::single_triangle(), 2.0).unwrap();
        assert!(matches!(
            build_hierarchy(&df, (id(1), id(7))),
            Err(HierarchyError::RootNotEdge(..))
        ));
    }

    #[test]
    fn negative_orientation_swaps_base() {
        let df =
            DesiredFormation::with_orientation(FormationGraph::single_triangle(), 2.0, vec![-1])
                .unwrap();
        let plan = build_hierarchy(&df, (id(1), id(2))).unwrap();
        assert_eq!(
            plan.assignment(id(3)).kind,
            PotentialKind::Triangle {
                base: (id(2), id(1)),
                clique: 0
            }
        );
        let target = plan.target_positions(&df, Position::ORIGIN);
        let e = crate::graph::formation_errors(&df, &target);
        assert!(e.within(1e-12), "{e:?}");
    }

    #[test]
    fn deterministic() {
        let (df, plan) = example();
        for _ in 0..3 {
            assert_eq!(build_hierarchy(&df, (id(1), id(2))).unwrap(), plan);
        }
    }

    fn law(k: f64) -> ControlLaw {
        let (df, plan) = example();
        ControlLaw::new(plan, df, ControlGains::new(k)).unwrap()
    }

    #[test]
    fn target_is_fixed_point() {
        let law = law(20.0);
        let target = law
            .plan()
            .target_positions(law.formation(), Position::new(3.0, -1.0));
        let e = crate::graph::formation_errors(law.formation(), &target);
        assert!(e.within(1e-12));
        for u in law.control_field(&target) {
            assert!(u.norm() < 1e-12);
        }
    }

    #[test]
    fn perturbation_sparsity() {
        let law = law(20.0);
        let target = law
            .plan()
            .target_positions(law.formation(), Position::ORIGIN);

        // Agent 10 is nobody's base: only its own input changes.
        let mut p = target.clone();
        p[9] = p[9] + PlanarVector::new(0.1, -0.05);
        let moving: Vec<usize> = law
            .control_field(&p)
            .iter()
            .enumerate()
            .filter(|(_, u)| u.norm() > 1e-12)
            .map(|(i, _)| i + 1)
            .collect();
        assert_eq!(moving, vec![10]);

        // Agent 3 is a base for 5 and 6.
        let mut p = target.clone();
        p[2] = p[2] + PlanarVector::new(0.1, -0.05);
        let moving: Vec<usize> = law
            .control_field(&p)
            .iter()
            .enumerate()
            .filter(|(_, u)| u.norm() > 1e-12)
            .map(|(i, _)| i + 1)
            .collect();
        assert_eq!(moving, vec![3, 5, 6]);
    }

    #[test]
    fn pinned_triangle_matches_closed_loop_field() {
        let s3 = 3f64.sqrt();
        let df = DesiredFormation::new(FormationGraph::single_triangle(), 2.0).unwrap();
        let plan = build_hierarchy(&df, (id(1), id(2))).unwrap();
        let k = 0.6;
        let law = ControlLaw::new(plan, df, ControlGains::new(k)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let (x, y) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let expect = (
                -2.0 * x * (x * x + y * y - 1.0),
                -2.0 * y * (x * x + y * y - 3.0) + k * (s3 - y),
            );
            // Canonical frame.
            let p = [
                Position::new(-1.0, 0.0),
                Position::new(1.0, 0.0),
                Position::new(x, y),
            ];
            let u = law.control_field(&p);
            assert_eq!(u[0], PlanarVector::ZERO);
            assert_eq!(u[1], PlanarVector::ZERO);
            assert!((u[2].dx() - expect.0).abs() < 1e-12 * (1.0 + expect.0.abs()));
            assert!((u[2].dy() - expect.1).abs() < 1e-12 * (1.0 + expect.1.abs()));

            // Same configuration in a rotated, shifted frame, mapped back.
            let th = rng.random_range(0.0..std::f64::consts::TAU);
            let t = PlanarVector::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let q: Vec<Position> = p.iter().map(|&pt| pt.rotated(th) + t).collect();
            let back = law.control_field(&q)[2].rotated(-th);
            assert!((back.dx() - expect.0).abs() < 1e-9 * (1.0 + expect.0.abs()));
            assert!((back.dy() - expect.1).abs() < 1e-9 * (1.0 + expect.1.abs()));
        }
    }

    #[test]
    fn kappa_scales_field() {
        let (df, plan) = example();
        let base = ControlLaw::new(plan.clone(), df.clone(), ControlGains::new(20.0)).unwrap();
        let fast = ControlLaw::new(
            plan.clone(),
            df.clone(),
            ControlGains {
                k_gain: 20.0,
                kappa: 2.5,
            },
        )
        .unwrap();
        assert!(ControlLaw::new(
            plan,
            df,
            ControlGains {
                k_gain: 20.0,
                kappa: 0.0
            }
        )
        .is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p: Vec<Position> = (0..10)
            .map(|_| Position::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
            .collect();
        for (a, b) in base.control_field(&p).iter().zip(fast.control_field(&p)) {
            assert!((*a * 2.5 - b).norm() < 1e-12 * (1.0 + b.norm()));
        }
    }

    fn random_positions(seed: u64, n: usize) -> Vec<Position> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Position::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
            .collect()
    }

    proptest! {
        #[test]
        fn layer_causality(seed in any::<u64>(), dx in -3.0..3.0f64, dy in -3.0..3.0f64) {
            let law = law(20.0);
            let p = random_positions(seed, 10);
            let u = law.control_field(&p);
            for moved in law.plan().assignments() {
                let mut q = p.clone();
                q[moved.agent.index()] = q[moved.agent.index()] + PlanarVector::new(dx, dy);
                let uq = law.control_field(&q);
                for a in law.plan().assignments() {
                    if moved.layer > a.layer {
                        prop_assert_eq!(u[a.agent.index()], uq[a.agent.index()]);
                    }
                }
            }
        }

        #[test]
        fn field_translation_invariant(seed in any::<u64>(), tx in -20.0..20.0f64, ty in -20.0..20.0f64) {
            let law = law(20.0);
            let p = random_positions(seed, 10);
            let t = PlanarVector::new(tx, ty);
            let q: Vec<Position> = p.iter().map(|&x| x + t).collect();
            for (a, b) in law.control_field(&p).iter().zip(law.control_field(&q)) {
                prop_assert!((*a - b).norm() < 1e-10 * (1.0 + a.norm()));
            }
        }

        #[test]
        fn field_rotation_equivariant(seed in any::<u64>(), th in 0.0..std::f64::consts::TAU) {
            let law = law(20.0);
            let p = random_positions(seed, 10);
            let q: Vec<Position> = p.iter().map(|&x| x.rotated(th)).collect();
            for (a, b) in law.control_field(&p).iter().zip(law.control_field(&q)) {
                prop_assert!((a.rotated(th) - b).norm() < 1e-9 * (1.0 + a.norm()));
            }
        }
    }
}
