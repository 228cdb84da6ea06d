mod common;

use proptest::prelude::*;
use rayon::prelude::*;

use wsls_core::dynamics::{run_to_cooperation, Action, Configuration, Mode, Simulation, Transition};
use wsls_core::graph::{build_caterpillar, build_complete, build_cycle, Graph};
use wsls_core::rng::{mix64, seeded};
use wsls_core::stats::Estimate;

/// Random connected graph: a random tree plus random extra edges.
fn arb_connected() -> impl Strategy<Value = Graph> {
    (2usize..=10).prop_flat_map(|n| {
        let parents = (1..n).map(|v| 0..v).collect::<Vec<_>>();
        let extra = proptest::collection::vec((0..n, 0..n), 0..n);
        (Just(n), parents, extra).prop_map(|(n, parents, extra)| {
            let mut edges: Vec<(usize, usize)> = parents.iter().enumerate().map(|(i, &p)| (p, i + 1)).collect();
            for (u, v) in extra {
                let e = (u.min(v), u.max(v));
                if u != v && !edges.iter().any(|&(a, b)| (a.min(b), a.max(b)) == e) {
                    edges.push(e);
                }
            }
            Graph::from_edges(n, edges).unwrap()
        })
    })
}

fn brute_active(g: &Graph, c: &Configuration) -> usize {
    g.edges()
        .iter()
        .filter(|&&(u, v)| c.get(u) == Action::D || c.get(v) == Action::D)
        .count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spedup_steps_keep_counts_consistent(g in arb_connected(), mask in any::<u64>(), seed in any::<u64>()) {
        let n = g.node_count();
        let start = Configuration::from_mask(n, mask & ((1 << n) - 1));
        let mut sim = Simulation::new(&g, start, seeded(seed)).unwrap();
        for _ in 0..300 {
            if sim.configuration().is_all_cooperate() {
                break;
            }
            let before = sim.configuration().defector_count() as i64;
            prop_assert_eq!(sim.active_edge_count(), brute_active(&g, sim.configuration()));
            let ev = sim.step_spedup().unwrap();
            prop_assert!(ev.transition != Transition::Stay);
            let after = sim.configuration().defector_count() as i64;
            prop_assert_eq!(after - before, ev.transition.defector_delta());
            prop_assert_eq!(sim.configuration().recount() as i64, after);
        }
    }

    #[test]
    fn continuous_clock_advances(g in arb_connected(), seed in any::<u64>()) {
        let mut sim = Simulation::all_defect(&g, seed);
        let mut last = 0.0;
        for k in 1..=200u64 {
            let ev = sim.step_continuous().unwrap();
            prop_assert!(ev.dt > 0.0);
            let (u, v) = g.edge(ev.edge);
            prop_assert!(g.find_edge(u, v).is_some());
            prop_assert!(sim.state().time > last);
            prop_assert_eq!(sim.state().steps, k);
            last = sim.state().time;
            prop_assert_eq!(sim.configuration().defector_count(), sim.configuration().recount());
        }
    }

    #[test]
    fn runs_are_reproducible(g in arb_connected(), seed in any::<u64>(), spedup in any::<bool>()) {
        let mode = if spedup { Mode::SpedUp } else { Mode::Continuous };
        let a = run_to_cooperation(&g, mode, 500.0, seed, None).unwrap();
        let b = run_to_cooperation(&g, mode, 500.0, seed, None).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.converged, a.final_defectors == 0);
        prop_assert_eq!(a.censored_at.is_some(), !a.converged);
    }

    #[test]
    fn all_cooperate_never_moves(g in arb_connected(), seed in any::<u64>()) {
        let n = g.node_count();
        let mut sim = Simulation::new(&g, Configuration::all_cooperate(n), seeded(seed)).unwrap();
        for _ in 0..50 {
            let ev = sim.step_continuous().unwrap();
            prop_assert_eq!(ev.transition, Transition::Stay);
        }
        prop_assert!(sim.step_spedup().is_err());
    }
}

fn mc_steps(g: &Graph, reps: u64, seed: u64) -> Estimate {
    let steps: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|i| run_to_cooperation(g, Mode::SpedUp, 1e9, mix64(seed, i), None).unwrap().steps as f64)
        .collect();
    Estimate::from_samples(&steps)
}

#[test]
fn spedup_mean_matches_exact_chain() {
    let path = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
    let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
    let graphs = [path, star, build_cycle(5).unwrap(), build_complete(3).unwrap(), build_complete(5).unwrap()];
    for g in &graphs {
        let exact = common::spedup_absorption_steps(g.node_count(), g.edges());
        assert!(exact.is_finite(), "singular chain");
        let est = mc_steps(g, 40_000, 7);
        assert!(est.agrees_with(exact, 4.0), "{:?}: {est:?} vs {exact}", g.edges());
    }
}

#[test]
fn single_edge_oracle_is_one() {
    assert!((common::spedup_absorption_steps(2, &[(0, 1)]) - 1.0).abs() < 1e-12);
}

#[test]
fn censored_runs_report_the_cap() {
    let (g, _) = build_caterpillar(5, 16).unwrap();
    let r = run_to_cooperation(&g, Mode::Continuous, 50.0, 3, None).unwrap();
    assert!(!r.converged);
    assert_eq!(r.hitting_time, None);
    assert_eq!(r.censored_at, Some(50.0));
    assert!(r.final_defectors > 0);

    let k = build_complete(14).unwrap();
    let r = run_to_cooperation(&k, Mode::SpedUp, 100.0, 3, None).unwrap();
    assert!(!r.converged);
    assert_eq!(r.steps, 100);
}

#[test]
fn trace_starts_full_and_ends_empty() {
    let g = build_cycle(12).unwrap();
    let r = run_to_cooperation(&g, Mode::Continuous, 1e4, 11, Some(0.5)).unwrap();
    assert!(r.converged);
    let trace = r.trace.unwrap();
    assert_eq!(trace.len(), 20_001);
    assert_eq!(trace[0].defectors, 12);
    let t = r.hitting_time.unwrap();
    for p in &trace {
        if p.clock > t {
            assert_eq!(p.defectors, 0);
        }
    }
}

#[test]
fn cycle_hitting_time_is_short() {
    let g = build_cycle(3).unwrap();
    for seed in 0..100 {
        let r = run_to_cooperation(&g, Mode::Continuous, 1e4, seed, None).unwrap();
        assert!(r.converged);
    }
}
