//! Randomized structural invariants, driven by proptest over (seed, dim).

use proptest::prelude::*;

use quasiwork_core::rng::{random_hermitian, random_state_vector, random_unitary};
use quasiwork_core::{
    backward_pq, dephase, exp_i_hermitian, forward_events, heisenberg, hermitian_eig,
    max_weight_defect, pq_distribution, quasiprob_v, reverse, thermal_state, ComplexMatrix,
    DensityMatrix, Effect, EventSequence, HamiltonianProcess, SplitMix64,
};

const MERGE: f64 = 1e-9;

fn random_process(seed: u64, dim: usize) -> HamiltonianProcess {
    let mut rng = SplitMix64::new(seed);
    let h0 = random_hermitian(&mut rng, dim);
    let h1 = random_hermitian(&mut rng, dim);
    let u = random_unitary(&mut rng, dim);
    let rho = if rng.uniform() < 0.5 {
        DensityMatrix::from_pure(&random_state_vector(&mut rng, dim)).unwrap()
    } else {
        thermal_state(&h0, rng.uniform_in(0.2, 2.0)).unwrap()
    };
    HamiltonianProcess::new(h0, h1, u, rho).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectral_decomposition_invariants(seed in any::<u64>(), dim in 2usize..=8) {
        let mut rng = SplitMix64::new(seed);
        let h = random_hermitian(&mut rng, dim);
        let eig = hermitian_eig(&h, 1e-9).unwrap();

        let mut sum = ComplexMatrix::zeros(dim);
        for p in eig.projectors() {
            sum = &sum + p.matrix();
        }
        prop_assert!(sum.max_abs_diff(&ComplexMatrix::identity(dim)) <= 1e-10);

        for (j, pj) in eig.projectors().iter().enumerate() {
            for (k, pk) in eig.projectors().iter().enumerate() {
                let prod = pj.matrix() * pk.matrix();
                let target = if j == k { pj.matrix().clone() } else { ComplexMatrix::zeros(dim) };
                prop_assert!(prod.max_abs_diff(&target) <= 1e-10);
            }
        }
        prop_assert!(eig.reconstruct().max_abs_diff(h.matrix()) <= 1e-9);
        prop_assert!(eig.eigenvalues().windows(2).all(|w| w[1] - w[0] > 1e-9));
    }

    #[test]
    fn exponential_group_law(seed in any::<u64>(), dim in 2usize..=6,
                             t1 in -3.0f64..3.0, t2 in -3.0f64..3.0) {
        let mut rng = SplitMix64::new(seed);
        let h = random_hermitian(&mut rng, dim);
        let lhs = exp_i_hermitian(&h, t1).unwrap().matrix()
            * exp_i_hermitian(&h, t2).unwrap().matrix();
        let rhs = exp_i_hermitian(&h, t1 + t2).unwrap();
        prop_assert!(lhs.max_abs_diff(rhs.matrix()) <= 1e-9);
    }

    #[test]
    fn heisenberg_picture_preserves_the_spectrum(seed in any::<u64>(), dim in 2usize..=6) {
        let mut rng = SplitMix64::new(seed);
        let a = random_hermitian(&mut rng, dim);
        let u = random_unitary(&mut rng, dim);
        let moved = heisenberg(&a, &u).unwrap();
        let before = hermitian_eig(&a, 1e-9).unwrap();
        let after = hermitian_eig(&moved, 1e-9).unwrap();
        prop_assert_eq!(before.len(), after.len());
        for (x, y) in before.eigenvalues().iter().zip(after.eigenvalues()) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn ordered_quasiprobability_agrees_with_conjugate_route(seed in any::<u64>(), dim in 2usize..=5) {
        let mut rng = SplitMix64::new(seed);
        let e = Effect::new(quasiwork_core::rng::random_effect_matrix(&mut rng, dim)).unwrap();
        let f = Effect::new(quasiwork_core::rng::random_effect_matrix(&mut rng, dim)).unwrap();
        let rho = DensityMatrix::from_pure(&random_state_vector(&mut rng, dim)).unwrap();
        let seq = EventSequence::new(vec![e.clone(), f.clone()]).unwrap();
        let direct = quasiprob_v(&seq, &rho).unwrap();
        let product = &(e.matrix() * f.matrix()) * rho.matrix();
        let conjugate_route = product.adjoint().trace().re;
        prop_assert!((direct - conjugate_route).abs() <= 1e-12);
    }

    #[test]
    fn dephasing_is_idempotent_and_trace_preserving(seed in any::<u64>(), dim in 2usize..=6) {
        let mut rng = SplitMix64::new(seed);
        let rho = DensityMatrix::from_pure(&random_state_vector(&mut rng, dim)).unwrap();
        let family = hermitian_eig(&random_hermitian(&mut rng, dim), 1e-9).unwrap();
        let once = dephase(&rho, family.projectors()).unwrap();
        let twice = dephase(&once, family.projectors()).unwrap();
        prop_assert!((once.matrix().trace().re - 1.0).abs() <= 1e-12);
        prop_assert!(once.matrix().max_abs_diff(twice.matrix()) <= 1e-12);
    }

    #[test]
    fn distributions_normalize_and_mirror(seed in any::<u64>(), dim in 2usize..=5,
                                          q in 0.0f64..=1.0) {
        let proc = random_process(seed, dim);
        let ev = forward_events(&proc).unwrap();
        let b = reverse(&proc, &ev).unwrap();
        let forward = pq_distribution(&proc, &ev, q, MERGE).unwrap();
        let backward = backward_pq(&b, q, MERGE).unwrap();
        prop_assert!((forward.total_weight() - 1.0).abs() <= 1e-9);
        prop_assert!(max_weight_defect(&backward, &forward.negate_support()) <= 1e-10);
    }

    #[test]
    fn char_function_has_conjugate_symmetry(seed in any::<u64>(), dim in 2usize..=5,
                                            u in 0.0f64..4.0) {
        let proc = random_process(seed, dim);
        let ev = forward_events(&proc).unwrap();
        let d = pq_distribution(&proc, &ev, 0.5, MERGE).unwrap();
        let plus = d.char_function_direct(u);
        let minus = d.char_function_direct(-u);
        prop_assert!((plus - minus.conj()).norm() <= 1e-10);
        prop_assert!((d.char_function_direct(0.0).re - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn negate_support_is_an_involution(seed in any::<u64>(), dim in 2usize..=5) {
        let proc = random_process(seed, dim);
        let ev = forward_events(&proc).unwrap();
        let d = pq_distribution(&proc, &ev, 0.25, MERGE).unwrap();
        let back = d.negate_support().negate_support();
        prop_assert_eq!(d.atoms().len(), back.atoms().len());
        for (a, b) in d.atoms().iter().zip(back.atoms()) {
            prop_assert_eq!(a.w, b.w);
            prop_assert_eq!(a.weight, b.weight);
        }
    }

    #[test]
    fn effect_sums_stay_below_identity(seed in any::<u64>(), dim in 2usize..=5) {
        // The generator contract behind the axiom decompositions.
        let mut rng = SplitMix64::new(seed);
        let e = quasiwork_core::rng::random_effect_matrix(&mut rng, dim);
        let eig = hermitian_eig(&e, 0.0).unwrap();
        prop_assert!(eig.eigenvalues()[0] >= -1e-12);
        prop_assert!(*eig.eigenvalues().last().unwrap() <= 1.0 + 1e-12);
    }
}
