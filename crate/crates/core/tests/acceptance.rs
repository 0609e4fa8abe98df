//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails unexpectedly.
//!
//! `KNOWN_FAILURES` lists criteria that are reported honestly as failing
//! because the property does not hold for the system as defined; see the
//! README. A known failure that starts passing is also treated as an error,
//! so the list cannot go stale.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use formation::analysis::{
    below_axis_curvature, classify_gain, critical_gain, enumerate_triangle_equilibria,
    find_equilibria_numeric, same_point_set, EquilibriumFamily, NewtonSettings, Regime, SeedGrid,
    Stability,
};
use formation::dynamics::{
    basin_probe, fraction_correct, simulate, BasinGrid, BasinLabel, IntegratorConfig, Termination,
    Trajectory,
};
use formation::geometry::{distance, PlanarVector, Position};
use formation::graph::{AgentId, DesiredFormation, FormationGraph};
use formation::hierarchy::{build_hierarchy, ControlGains, ControlLaw};
use formation::potentials::{
    pinned_triangle_hessian, triangle_gradient, triangle_potential, TriangleAgent,
    TrianglePotentialSpec,
};
use formation::runner::config::{random_layout, two_columns};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Criterion 6's energy clause fails on the ten-agent cascade: the summed
/// potential is not a Lyapunov function there.
const KNOWN_FAILURES: &[u32] = &[6];

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn law(graph: FormationGraph, d_star: f64, k: f64) -> ControlLaw {
    let df = DesiredFormation::new(graph, d_star).unwrap();
    let plan = build_hierarchy(&df, (AgentId(1), AgentId(2))).unwrap();
    ControlLaw::new(plan, df, ControlGains::new(k)).unwrap()
}

/// Largest one-sample rise of the summed potential along a trajectory.
fn max_energy_rise(law: &ControlLaw, t: &Trajectory) -> f64 {
    let v: Vec<f64> = t.states().iter().map(|s| law.total_potential(s)).collect();
    v.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Trajectories kept for the energy clause of criterion 6.
#[derive(Default)]
struct EnergyLog {
    pinned_worst: f64,
    pinned_runs: usize,
    cascade_worst: f64,
    cascade_runs: usize,
}

fn criterion_1(energy: &mut EnergyLog) -> (bool, String) {
    let l = law(FormationGraph::single_pair(), 2.0, 1.0);
    let cfg = IntegratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut all_converged = true;
    for _ in 0..100 {
        let p = loop {
            let p = Position::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            if p.to_vector().norm() > 1e-3 {
                break p;
            }
        };
        let run = simulate(&l, &[Position::ORIGIN, p], &cfg).unwrap();
        all_converged &= run.termination == Termination::Converged;
        let s = run.trajectory.final_state();
        worst = worst.max((distance(s[0], s[1]) - 2.0).abs());
        energy.pinned_worst = energy
            .pinned_worst
            .max(max_energy_rise(&l, &run.trajectory));
        energy.pinned_runs += 1;
    }
    let origin = simulate(&l, &[Position::ORIGIN, Position::ORIGIN], &cfg).unwrap();
    let stays = origin.trajectory.final_state()[1] == Position::ORIGIN;
    (
        all_converged && worst < 1e-6 && stays,
        format!("100 runs converged={all_converged}, max | |p_j - p_i| - 2 | = {worst:.2e}, origin stays = {stays}"),
    )
}

fn expected_stability(regime: Regime, family: EquilibriumFamily) -> Stability {
    use EquilibriumFamily::*;
    match (regime, family) {
        (_, ApexCorrect) => Stability::Stable,
        (Regime::Bistable, BelowAxis) => Stability::Stable,
        (Regime::Critical, BelowAxis) => Stability::Degenerate,
        _ => Stability::Unstable,
    }
}

fn criterion_2() -> (bool, String) {
    let kc = critical_gain();
    let mut ok = true;
    let mut notes = Vec::new();
    for (k, want) in [
        (0.6, Some(5)),
        (1.0, None),
        (kc, None),
        (1.5, Some(3)),
        (2.0, None),
        (20.0, Some(1)),
    ] {
        let eqs = enumerate_triangle_equilibria(1.0, k).unwrap();
        let closed: Vec<Position> = eqs.iter().map(|e| e.position).collect();
        let numeric = find_equilibria_numeric(
            1.0,
            k,
            &SeedGrid::for_half_base(1.0),
            &NewtonSettings::default(),
        )
        .unwrap();
        let sets = same_point_set(&closed, &numeric, 1e-6);
        let regime = classify_gain(k).unwrap().regime;
        let classes = eqs
            .iter()
            .all(|e| e.stability == expected_stability(regime, e.family));
        let count: u32 = eqs.iter().map(|e| e.multiplicity).sum();
        let count_ok = want.is_none_or(|w| w == count);
        ok &= sets && classes && count_ok;
        notes.push(format!(
            "K={k:.4}:{count}{}",
            if sets && classes && count_ok { "" } else { "!" }
        ));
    }
    (
        ok,
        format!(
            "closed form = Newton oracle within 1e-6, classes per regime; counts {}",
            notes.join(" ")
        ),
    )
}

fn criterion_3() -> (bool, String) {
    let spec = TrianglePotentialSpec::new(2.0, SQRT_3, 20.0).unwrap();
    let (lo, hi) = pinned_triangle_hessian(&spec, Position::new(0.0, SQRT_3)).eigenvalues();
    let eig = (lo - 4.0).abs() <= 1e-10 && (hi - 32.0).abs() <= 1e-10;
    let h0 = below_axis_curvature(0.0).unwrap();
    let h15 = below_axis_curvature(1.5).unwrap();
    let hc = below_axis_curvature(critical_gain()).unwrap();
    let ok = eig && h0 == 2.0 && h15 == -0.25 && hc.abs() <= 1e-12;
    (
        ok,
        format!("eigenvalues ({lo}, {hi}); h(0) = {h0}, h(3/2) = {h15}, h(Kc) = {hc:.1e}"),
    )
}

fn criterion_4() -> (bool, String) {
    let grid = BasinGrid::square(9, 3.0);
    let cfg = IntegratorConfig::default();
    let high = basin_probe(
        &law(FormationGraph::single_triangle(), 2.0, 20.0),
        &grid,
        &cfg,
    )
    .unwrap();
    let low = basin_probe(
        &law(FormationGraph::single_triangle(), 2.0, 0.6),
        &grid,
        &cfg,
    )
    .unwrap();
    let (fh, fl) = (fraction_correct(&high), fraction_correct(&low));
    // p_b* straight from its closed form, a = 1.
    let pb = Position::new(0.0, -(0.75f64 - 0.3).sqrt() - SQRT_3 / 2.0);
    let incorrect: Vec<_> = low
        .iter()
        .filter(|c| c.label == BasinLabel::Incorrect)
        .collect();
    let worst = incorrect
        .iter()
        .map(|c| distance(c.end.unwrap(), pb))
        .fold(0.0, f64::max);
    let unresolved = low
        .iter()
        .chain(&high)
        .filter(|c| c.label == BasinLabel::Unresolved)
        .count();
    let ok = fh == 1.0 && fl < 1.0 && !incorrect.is_empty() && worst <= 1e-4;
    (
        ok,
        format!(
            "K=20 fraction {fh}, K=0.6 fraction {fl:.4} ({} incorrect, max distance to p_b* {worst:.1e}, {unresolved} unresolved)",
            incorrect.len()
        ),
    )
}

fn criterion_5(energy: &mut EnergyLog) -> (bool, String) {
    let d = 1.0;
    let l = law(FormationGraph::example_ten_agent(), d, 20.0);
    let mut inits = vec![two_columns(10, d)];
    inits.extend((0..20).map(|seed| random_layout(10, seed, [0.0, 0.0], [10.0, 10.0])));
    let cfg = IntegratorConfig {
        record_stride: 10,
        ..Default::default()
    };
    let results: Vec<_> = inits
        .par_iter()
        .map(|init| {
            let run = simulate(&l, init, &cfg).unwrap();
            let m = run.trajectory.final_metrics().unwrap();
            let fin = run.trajectory.final_state();
            let positive = l
                .formation()
                .graph()
                .cliques()
                .iter()
                .all(|c| c.signed_area(fin) > 0.0);
            let rise = max_energy_rise(&l, &run.trajectory);
            (
                run.termination == Termination::Converged,
                m.max_distance_error,
                m.max_area_error,
                positive,
                rise,
            )
        })
        .collect();
    let converged = results.iter().filter(|r| r.0).count();
    let dist = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let area = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let positive = results.iter().filter(|r| r.3).count();
    for r in &results {
        energy.cascade_worst = energy.cascade_worst.max(r.4);
        energy.cascade_runs += 1;
    }
    let n = results.len();
    let ok = converged == n && dist < 1e-4 && area < 1e-4 && positive == n;
    (
        ok,
        format!("{converged}/{n} converged, max distance error {dist:.1e}, max area error {area:.1e}, {positive}/{n} with all nine orientations positive"),
    )
}

fn criterion_6(energy: &EnergyLog) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    // Analytic triangle gradients against central differences, step 1e-6.
    let h = 1e-6;
    let mut worst_fd: f64 = 0.0;
    for _ in 0..1000 {
        let spec = TrianglePotentialSpec::new(
            rng.random_range(0.2..4.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(0.05..30.0),
        )
        .unwrap();
        let mut pts =
            [0; 3].map(|_| Position::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)));
        let which = rng.random_range(0..3usize);
        let agent = [TriangleAgent::I, TriangleAgent::J, TriangleAgent::K][which];
        let g = triangle_gradient(&spec, pts[0], pts[1], pts[2], agent);
        let mut fd = [0.0; 2];
        for (axis, slot) in fd.iter_mut().enumerate() {
            let base = pts[which];
            let step = if axis == 0 {
                PlanarVector::new(h, 0.0)
            } else {
                PlanarVector::new(0.0, h)
            };
            pts[which] = base + step;
            let up = triangle_potential(&spec, pts[0], pts[1], pts[2]);
            pts[which] = base - step;
            let down = triangle_potential(&spec, pts[0], pts[1], pts[2]);
            pts[which] = base;
            *slot = (up - down) / (2.0 * h);
        }
        let err = (g.dx() - fd[0]).hypot(g.dy() - fd[1]) / g.norm().max(1.0);
        worst_fd = worst_fd.max(err);
    }
    let fd_ok = worst_fd < 1e-6;

    // Control-field invariances and layer causality on the ten-agent law.
    let l = law(FormationGraph::example_ten_agent(), 1.0, 20.0);
    let mut worst_tr: f64 = 0.0;
    let mut worst_rot: f64 = 0.0;
    let mut causal = true;
    for _ in 0..200 {
        let p: Vec<Position> = (0..10)
            .map(|_| Position::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
            .collect();
        let u = l.control_field(&p);
        let t = PlanarVector::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
        let th = rng.random_range(0.0..std::f64::consts::TAU);
        let ut = l.control_field(&p.iter().map(|q| *q + t).collect::<Vec<_>>());
        let ur = l.control_field(&p.iter().map(|q| q.rotated(th)).collect::<Vec<_>>());
        for i in 0..10 {
            let scale = 1.0 + u[i].norm();
            worst_tr = worst_tr.max((ut[i] - u[i]).norm() / scale);
            worst_rot = worst_rot.max((ur[i] - u[i].rotated(th)).norm() / scale);
        }
        let plan = l.plan();
        let moved = rng.random_range(0..10usize);
        let mut q = p.clone();
        q[moved] = Position::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let uq = l.control_field(&q);
        let layer_of = |i: usize| plan.assignment(AgentId::from_index(i)).layer;
        for i in 0..10 {
            if layer_of(moved) > layer_of(i) {
                causal &= uq[i] == u[i];
            }
        }
    }
    let inv_ok = worst_tr <= 1e-9 && worst_rot <= 1e-9;

    let pinned_ok = energy.pinned_worst <= 1e-9;
    let cascade_ok = energy.cascade_worst <= 1e-9;
    let ok = fd_ok && inv_ok && causal && pinned_ok && cascade_ok;
    (
        ok,
        format!(
            "finite differences {worst_fd:.1e}; translation {worst_tr:.1e}, rotation {worst_rot:.1e}; causality exact = {causal}; \
             summed potential max rise: pinned pair/triangle {:.1e} over {} runs, ten-agent cascade {:.1e} over {} runs",
            energy.pinned_worst, energy.pinned_runs, energy.cascade_worst, energy.cascade_runs
        ),
    )
}

fn pinned_triangle_energy(energy: &mut EnergyLog) {
    let cfg = IntegratorConfig::default();
    for k in [0.6, 20.0] {
        let l = law(FormationGraph::single_triangle(), 2.0, k);
        let grid = BasinGrid::square(9, 3.0);
        for i in 0..grid.len() {
            let init = [
                Position::new(-1.0, 0.0),
                Position::new(1.0, 0.0),
                grid.point(i),
            ];
            let run = simulate(&l, &init, &cfg).unwrap();
            energy.pinned_worst = energy
                .pinned_worst
                .max(max_energy_rise(&l, &run.trajectory));
            energy.pinned_runs += 1;
        }
    }
}

fn criterion_7() -> (bool, String) {
    let kc = critical_gain();
    let seeds = SeedGrid::for_half_base(1.0);
    let off_axis = |k: f64| {
        find_equilibria_numeric(1.0, k, &seeds, &NewtonSettings::default())
            .unwrap()
            .into_iter()
            .filter(|p| p.x().abs() > 1e-6)
            .collect::<Vec<_>>()
    };
    let below = off_axis(kc - 1e-3);
    let above = off_axis(kc + 1e-3);
    // Circle roots from their own closed form: y = sqrt(3) K a / (K - 4).
    let k = kc - 1e-3;
    let y = SQRT_3 * k / (k - 4.0);
    let x = (1.0 - y * y).sqrt();
    let expected = [Position::new(-x, y), Position::new(x, y)];
    let ok = same_point_set(&below, &expected, 1e-6) && above.is_empty();
    (
        ok,
        format!(
            "off-axis roots: {} at Kc - 1e-3 (|x| = {x:.4}), {} at Kc + 1e-3",
            below.len(),
            above.len()
        ),
    )
}

fn timed(
    id: u32,
    title: &'static str,
    limit: Option<Duration>,
    f: impl FnOnce() -> (bool, String),
) -> Outcome {
    let start = Instant::now();
    let (pass, mut detail) = f();
    let elapsed = start.elapsed();
    let mut pass = pass;
    if let Some(limit) = limit {
        let in_time = elapsed < limit;
        pass &= in_time;
        detail.push_str(&format!(
            "; {:.2} s (limit {} s)",
            elapsed.as_secs_f64(),
            limit.as_secs()
        ));
    }
    Outcome {
        id,
        title,
        pass,
        detail,
        elapsed,
    }
}

fn main() -> ExitCode {
    let mut energy = EnergyLog::default();
    let secs = Duration::from_secs;
    let mut outcomes = vec![timed(
        1,
        "pinned pair converges to d*",
        Some(secs(5)),
        || criterion_1(&mut energy),
    )];
    outcomes.push(timed(
        2,
        "equilibrium table vs Newton oracle",
        None,
        criterion_2,
    ));
    outcomes.push(timed(
        3,
        "Hessian and curvature checkpoints",
        None,
        criterion_3,
    ));
    outcomes.push(timed(
        4,
        "basin map, K = 20 and K = 0.6",
        Some(secs(60)),
        criterion_4,
    ));
    outcomes.push(timed(
        5,
        "ten-agent formation, K = 20",
        Some(secs(120)),
        || criterion_5(&mut energy),
    ));
    pinned_triangle_energy(&mut energy);
    outcomes.push(timed(6, "property suites", None, || criterion_6(&energy)));
    outcomes.push(timed(7, "circle equilibria around Kc", None, criterion_7));

    let mut unexpected = 0;
    for o in &outcomes {
        let known = KNOWN_FAILURES.contains(&o.id);
        let tag = match (o.pass, known) {
            (true, false) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
            (true, true) => "PASS (listed as known failure)",
        };
        if o.pass == known {
            unexpected += 1;
        }
        println!(
            "criterion {}: {tag}: {} [{:.2} s] {}",
            o.id,
            o.title,
            o.elapsed.as_secs_f64(),
            o.detail
        );
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criterion result(s) differ from expectations");
        ExitCode::FAILURE
    }
}
