use ea_core::disorder::{perturb, sample_disorder, PerturbationKind, PerturbationSpec, Stream};
use ea_core::lattice::{LatticeGraph, Topology, VertexSet};
use ea_core::observables::{droplet, interface_energy, site_overlap, valley_upper_bound};
use ea_core::solver::{
    canonicalize, energy, solve_anneal, solve_exact, AnnealOptions, BoundaryCondition, ExactMethod, ExactOptions,
    SolverPolicy,
};
use proptest::prelude::*;

fn cube(d: usize, l: usize) -> LatticeGraph {
    LatticeGraph::cube(Topology::OpenCube { d, l }).unwrap()
}

#[test]
fn perturbed_ground_states_satisfy_the_droplet_identities() {
    let g = cube(2, 4);
    let bc = BoundaryCondition::all_plus(&g).unwrap();
    for k in 0..30 {
        let j = sample_disorder(&g, k, &Stream::new("J"));
        let fresh = sample_disorder(&g, k, &Stream::new("J'"));
        let kind = if k % 2 == 0 { PerturbationKind::GaussianRotation } else { PerturbationKind::Resample };
        let env = perturb(&j, &fresh, PerturbationSpec::new(kind, 0.3).unwrap(), k).unwrap();
        let a = solve_exact(&g, &env.original, &bc, &ExactOptions::default()).unwrap();
        let b = solve_exact(&g, &env.perturbed, &bc, &ExactOptions::default()).unwrap();
        let overlap = site_overlap(&g, &a.config, &b.config).unwrap();
        assert!(overlap.identity_holds());
        let d = droplet(&g, &env.original, &bc, &a.config, &b.config).unwrap();
        assert_eq!(d.size, overlap.droplet_size);
        assert!(d.delta >= -1e-9);
        // flipping the droplet turns the first ground state into the second
        let flipped = ea_core::observables::flip_region(&g, &bc, &a.config, &d.region).unwrap();
        assert_eq!(flipped, b.config);
    }
}

#[test]
fn torus_droplets_use_squared_overlap() {
    let g = LatticeGraph::cube(Topology::Torus { d: 2, l: 4 }).unwrap();
    let bc = BoundaryCondition::Free;
    let j = sample_disorder(&g, 5, &Stream::new("J"));
    let a = solve_exact(&g, &j, &bc, &ExactOptions::default()).unwrap();
    let b = a.config.negated();
    let overlap = site_overlap(&g, &a.config, &b).unwrap();
    assert_eq!(overlap.r_squared, 1.0);
    let d = droplet(&g, &j, &bc, &a.config, &b).unwrap();
    assert!(d.region.is_empty());
}

#[test]
fn anneal_and_branch_bound_agree_beyond_the_exhaustive_cap() {
    let g = cube(2, 6);
    let bc = BoundaryCondition::all_plus(&g).unwrap();
    for k in 0..5 {
        let j = sample_disorder(&g, k, &Stream::new("J"));
        let exact = solve_exact(&g, &j, &bc, &ExactOptions::with_method(ExactMethod::BranchBound)).unwrap();
        let heuristic = solve_anneal(&g, &j, &bc, &AnnealOptions::default(), k).unwrap();
        assert_eq!(exact.free_spin_count, 25);
        assert!((exact.energy - heuristic.energy).abs() < 1e-9);
        assert_eq!(exact.config, heuristic.config);
    }
}

#[test]
fn valley_bound_on_a_chain() {
    let g = cube(1, 10);
    let bc = BoundaryCondition::all_plus(&g).unwrap();
    for k in 0..50 {
        let j = sample_disorder(&g, k, &Stream::new("J"));
        let fresh = sample_disorder(&g, k, &Stream::new("J'"));
        let spec = PerturbationSpec::new(PerturbationKind::GaussianRotation, 0.2).unwrap();
        let env = perturb(&j, &fresh, spec, 0).unwrap();
        let v = valley_upper_bound(&g, &env, &bc, &SolverPolicy::default(), 0).unwrap();
        assert!(v.bound_ok);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_ground_state_beats_every_single_region_flip(seed in any::<u64>(), l in 2usize..5, mask in any::<u64>()) {
        let g = cube(2, l);
        let bc = BoundaryCondition::all_plus(&g).unwrap();
        let j = sample_disorder(&g, seed, &Stream::new("J"));
        let ground = solve_exact(&g, &j, &bc, &ExactOptions::default()).unwrap();
        let interior = g.interior().as_slice();
        let region = VertexSet::new(interior.iter().enumerate().filter(|(k, _)| mask >> (k % 64) & 1 == 1).map(|(_, &v)| v).collect());
        let delta = interface_energy(&g, &j, &bc, &ground.config, &region).unwrap();
        prop_assert!(delta >= -1e-9);
        prop_assert!((ground.energy - energy(&g, &j, &ground.config).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn free_boundary_results_are_canonical(seed in any::<u64>()) {
        let g = LatticeGraph::cube(Topology::Torus { d: 2, l: 3 }).unwrap();
        let j = sample_disorder(&g, seed, &Stream::new("J"));
        let r = solve_exact(&g, &j, &BoundaryCondition::Free, &ExactOptions::default()).unwrap();
        prop_assert_eq!(canonicalize(&g, &BoundaryCondition::Free, &r.config), r.config.clone());
        prop_assert_eq!(r.config.get(0), 1);
    }
}
