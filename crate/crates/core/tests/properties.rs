use proptest::prelude::*;

use qdisorder::dynamics::{subset_rdm_closed_form, subset_rdm_statevector, IsingModel};
use qdisorder::entanglement::{log_negativity, Bipartition};
use qdisorder::hopfield::{energy, hebbian_couplings, recall, stability_check, NetworkState, PatternSet};
use qdisorder::lattice::{build_lattice, LatticeKind};
use qdisorder::CouplingMatrix;

fn spins(n: usize) -> impl Strategy<Value = Vec<i8>> {
    prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1i8 } else { -1 }), n)
}

/// Random all-to-all couplings on `n` sites, with some bonds zeroed.
fn couplings(n: usize) -> impl Strategy<Value = CouplingMatrix<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), -2.0..2.0f64], n * (n - 1) / 2).prop_map(move |v| {
        let mut c = CouplingMatrix::zeros(n);
        let mut it = v.into_iter();
        for i in 0..n {
            for j in i + 1..n {
                c.set(i, j, it.next().unwrap()).unwrap();
            }
        }
        c
    })
}

fn model_and_subset() -> impl Strategy<Value = (CouplingMatrix<f64>, Vec<usize>)> {
    (3usize..=7).prop_flat_map(|n| {
        (couplings(n), prop::sample::subsequence((0..n).collect::<Vec<_>>(), 2..=3.min(n)))
    })
}

fn hebbian() -> impl Strategy<Value = PatternSet> {
    (4usize..=12, 1usize..=4).prop_flat_map(|(n, p)| {
        prop::collection::vec(spins(n), p).prop_map(|ps| PatternSet::new(ps).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn periodic_lattices_are_regular(kind in prop::sample::select(vec![
        LatticeKind::Chain1d, LatticeKind::Honeycomb2d, LatticeKind::Square2d, LatticeKind::Cubic3d,
    ]), a in 4usize..7, b in 4usize..7, c in 4usize..6) {
        let dims = [a, b, c];
        let mut dims = dims[..kind.rank()].to_vec();
        if kind == LatticeKind::Honeycomb2d {
            // two sublattices: even extents keep the tiling bipartite
            dims = dims.iter().map(|d| d + d % 2).collect();
        }
        let g = build_lattice(kind, &dims, true).unwrap();
        let z = kind.coordination().unwrap();
        for s in 0..g.sites() {
            prop_assert_eq!(g.degree(s), z);
        }
        prop_assert_eq!(g.edges().len(), g.sites() * z / 2);
        let (i, j) = g.edges()[0];
        prop_assert_eq!(g.exterior_neighbors(i, j).unwrap().len(), 2 * (z - 1));
    }

    #[test]
    fn closed_form_matches_statevector((c, subset) in model_and_subset(), h in -1.0..1.0f64, t in 0.0..5.0f64) {
        let model = IsingModel::new(c, h);
        let fast = subset_rdm_closed_form(&model, &subset, t).unwrap();
        let slow = subset_rdm_statevector(&model, &subset, t).unwrap();
        prop_assert!(fast.max_abs_diff(&slow) < 1e-12);
        prop_assert!(fast.check_invariants().unwrap().holds());
    }

    #[test]
    fn log_negativity_is_nonnegative_and_field_blind(
        (c, subset) in model_and_subset(), h in -3.0..3.0f64, t in 0.0..5.0f64,
    ) {
        let cut = Bipartition::first_vs_rest(&subset).unwrap();
        let bare = subset_rdm_closed_form(&IsingModel::new(c.clone(), 0.0), &subset, t).unwrap();
        let biased = subset_rdm_closed_form(&IsingModel::new(c, h), &subset, t).unwrap();
        let e0 = log_negativity(&bare, &cut).unwrap();
        let e1 = log_negativity(&biased, &cut).unwrap();
        prop_assert!(e0 >= 0.0);
        prop_assert!((e0 - e1).abs() < 1e-10);
    }

    #[test]
    fn recall_descends_to_a_stable_state(ps in hebbian(), seed in any::<u64>(), start_seed in any::<u64>()) {
        let j = hebbian_couplings::<f64>(&ps);
        let start = NetworkState::random(ps.n(), &mut qdisorder::rng::substream(start_seed, 0, 0));
        let out = recall(&j, &start, seed).unwrap();
        for w in out.trajectory_energies.windows(2) {
            prop_assert!(w[1] < w[0]);
        }
        let last = *out.trajectory_energies.last().unwrap();
        prop_assert!((last - energy(&j, &out.fixed_point).unwrap()).abs() < 1e-9);
        // a fixed point of the dynamics has no strictly improving single flip
        for i in 0..ps.n() {
            let mut s = out.fixed_point.clone();
            s.flip(i);
            prop_assert!(energy(&j, &s).unwrap() >= last - 1e-9);
        }
    }

    #[test]
    fn recall_commutes_with_global_flip(ps in hebbian(), seed in any::<u64>(), start in spins(12)) {
        let j = hebbian_couplings::<f64>(&ps);
        let start = NetworkState::new(start[..ps.n()].to_vec()).unwrap();
        let up = recall(&j, &start, seed).unwrap();
        let down = recall(&j, &start.reversed(), seed).unwrap();
        prop_assert_eq!(down.fixed_point, up.fixed_point.reversed());
        prop_assert_eq!(up.trajectory_energies, down.trajectory_energies);
    }

    #[test]
    fn stability_matches_single_flip_energies(ps in hebbian(), mu in any::<prop::sample::Index>()) {
        let j = hebbian_couplings::<f64>(&ps);
        let state = ps.states()[mu.index(ps.len())].clone();
        let e = energy(&j, &state).unwrap();
        let every_flip_costs = (0..ps.n()).all(|i| {
            let mut s = state.clone();
            s.flip(i);
            energy(&j, &s).unwrap() - e > 1e-9
        });
        prop_assert_eq!(stability_check(&j, &state).unwrap(), every_flip_costs);
    }
}
