use proptest::prelude::*;

use zerocap::matcore::{
    hermitian_spectrum, kron_perm, partial_trace_general, permute_subsystems, real, HermitianMatrix,
};
use zerocap::model::{matrix_from_json, matrix_to_json, Channel, GraphSpec};
use zerocap::nosig::{check_ns, compose, compose_link, NsCorrelation};
use zerocap::random;

fn hermitian(seed: u64, d: usize) -> HermitianMatrix {
    let mut rng = random::rng(seed);
    let g = random::gaussian_matrix(&mut rng, d, d);
    HermitianMatrix::new((&g + g.adjoint()) * real(0.5)).unwrap()
}

fn inverse(order: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; order.len()];
    for (k, &o) in order.iter().enumerate() {
        inv[o] = k;
    }
    inv
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigen_reconstruction(seed in any::<u64>(), d in 1usize..9) {
        let h = hermitian(seed, d);
        let spec = hermitian_spectrum(h.matrix());
        let back = spec.reconstruct_with(|x| x);
        prop_assert!((back - h.matrix()).norm() <= 1e-10 * (1.0 + h.frobenius_norm()));
        prop_assert!(spec.values.windows(2).all(|w| w[0] <= w[1] + 1e-12));
    }

    #[test]
    fn partial_traces_compose(seed in any::<u64>(), a in 1usize..4, b in 1usize..4, c in 1usize..4) {
        let h = hermitian(seed, a * b * c);
        let dims = [a, b, c];
        let stepwise = partial_trace_general(&partial_trace_general(h.matrix(), &dims, &[0, 1]).unwrap(), &[a, b], &[0]).unwrap();
        let direct = partial_trace_general(h.matrix(), &dims, &[0]).unwrap();
        prop_assert!((stepwise - direct).norm() <= 1e-10);
        let total = partial_trace_general(h.matrix(), &dims, &[1]).unwrap().trace();
        prop_assert!((total - h.matrix().trace()).norm() <= 1e-10);
    }

    #[test]
    fn support_projector_is_idempotent(seed in any::<u64>(), d in 1usize..7, rank in 1usize..7) {
        let rank = rank.min(d);
        let mut rng = random::rng(seed);
        let rho = random::state(&mut rng, d, rank);
        let p = rho.support_projector(None).unwrap();
        prop_assert!(p.projector_residual() <= 1e-10);
        prop_assert_eq!(p.rank(None), rank);
        prop_assert!((p.matrix() * rho.matrix() - rho.matrix()).norm() <= 1e-10);
    }

    #[test]
    fn permutation_inverse_restores(seed in any::<u64>(), perm in Just(vec![0usize, 1, 2]).prop_shuffle()) {
        let dims = [2usize, 3, 2];
        let h = hermitian(seed, 12);
        let moved = permute_subsystems(h.matrix(), &dims, &perm).unwrap();
        let moved_dims: Vec<usize> = perm.iter().map(|&k| dims[k]).collect();
        let back = permute_subsystems(&moved, &moved_dims, &inverse(&perm)).unwrap();
        prop_assert!((back - h.matrix()).norm() <= 1e-14);

        let x = hermitian(seed ^ 1, 2);
        let y = hermitian(seed ^ 2, 3);
        let z = hermitian(seed ^ 3, 2);
        let ops = [&x, &y, &z];
        let permuted = kron_perm(&ops, &perm).unwrap();
        let reordered: Vec<&HermitianMatrix> = perm.iter().map(|&k| ops[k]).collect();
        let direct = reordered[0].kron(reordered[1]).kron(reordered[2]);
        prop_assert!((permuted.matrix() - direct.matrix()).norm() <= 1e-12);
    }

    #[test]
    fn random_channels_are_trace_preserving(seed in any::<u64>(), d_in in 1usize..4, d_out in 1usize..4, k in 1usize..4) {
        prop_assume!(d_out * k >= d_in);
        let mut rng = random::rng(seed);
        let ch = random::channel(&mut rng, d_in, d_out, k);
        prop_assert!(ch.trace_preserving);
        let back = Channel::from_choi(ch.choi.matrix(), d_in, d_out).unwrap();
        prop_assert!(back.trace_preserving);
        let rho = random::state(&mut rng, d_in, d_in);
        prop_assert!((back.apply(rho.matrix()) - ch.apply(rho.matrix())).norm() <= 1e-10);
    }

    #[test]
    fn graph_tensor_is_projector(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let g1 = random::channel(&mut rng, 2, 2, 2).graph();
        let g2 = random::channel(&mut rng, 2, 3, 1).graph();
        let g = g1.tensor(&g2).unwrap();
        prop_assert!(g.p.projector_residual() <= 1e-10);
        prop_assert_eq!(g.rank(), g1.rank() * g2.rank());
    }

    #[test]
    fn product_correlations_compose_consistently(seed in any::<u64>(), lambda in 0.0f64..1.0) {
        let mut rng = random::rng(seed);
        let c1 = NsCorrelation::product(&random::channel(&mut rng, 2, 2, 2), &random::channel(&mut rng, 3, 2, 2)).unwrap();
        let c2 = NsCorrelation::product(&random::channel(&mut rng, 2, 2, 1), &random::channel(&mut rng, 3, 2, 3)).unwrap();
        let mix = c1.omega.matrix() * real(lambda) + c2.omega.matrix() * real(1.0 - lambda);
        let c = NsCorrelation::new(c1.dims, mix).unwrap();
        prop_assert!(check_ns(&c).unwrap().passes());
        let n = random::channel(&mut rng, 2, 3, 2);
        let m = compose(&c, &n).unwrap();
        prop_assert!(m.trace_preserving);
        prop_assert!((m.choi.matrix() - compose_link(&c, &n).unwrap().choi.matrix()).norm() <= 1e-10);
    }

    #[test]
    fn spec_json_round_trips_exactly(seed in any::<u64>(), d_in in 1usize..4, d_out in 1usize..4, power in 1usize..3) {
        let mut rng = random::rng(seed);
        let ch = random::channel(&mut rng, d_in, d_out, 3);
        let kraus = GraphSpec::Kraus { kraus: ch.kraus.iter().map(matrix_to_json).collect() };
        let spec = GraphSpec::Tensor { factors: vec![kraus, GraphSpec::TwoState { alpha: None, alpha_sq: Some(0.75) }], power: Some(power) };
        let back = GraphSpec::from_json(&spec.to_json()).unwrap();
        prop_assert_eq!(&back, &spec);
        let GraphSpec::Tensor { factors, .. } = back else { unreachable!() };
        let GraphSpec::Kraus { kraus } = &factors[0] else { unreachable!() };
        for (m, e) in kraus.iter().zip(&ch.kraus) {
            prop_assert_eq!(&matrix_from_json(m).unwrap(), e);
        }
    }
}
