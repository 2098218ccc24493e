use approx::assert_abs_diff_eq;

use super::*;
use crate::matcore::{max_abs, HermitianMatrix};
use crate::model::{Channel, NCGraph};
use crate::random;

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn compose_channels(first: &Channel, second: &Channel) -> Channel {
    let mut kraus = Vec::new();
    for f in &second.kraus {
        for e in &first.kraus {
            kraus.push(f * e);
        }
    }
    Channel::from_kraus(kraus, first.d_in, second.d_out).unwrap()
}

fn pr_box() -> Vec<Vec<Vec<Vec<f64>>>> {
    (0..2)
        .map(|x| {
            (0..2)
                .map(|y| (0..2).map(|a| (0..2).map(|b| if (a ^ b) == (x & y) { 0.5 } else { 0.0 }).collect()).collect())
                .collect()
        })
        .collect()
}

#[test]
fn product_passes_and_composes() {
    let mut rng = random::rng(1);
    let alice = random::channel(&mut rng, 2, 3, 2);
    let bob = random::channel(&mut rng, 2, 2, 3);
    let n = random::channel(&mut rng, 3, 2, 2);
    let c = NsCorrelation::product(&alice, &bob).unwrap();
    assert!(check_ns(&c).unwrap().passes());
    let direct = compose_channels(&compose_channels(&alice, &n), &bob);
    let composed = compose(&c, &n).unwrap();
    assert!(max_abs(&(composed.choi.matrix() - direct.choi.matrix())) < 1e-12);
    let linked = compose_link(&c, &n).unwrap();
    assert!(max_abs(&(linked.choi.matrix() - direct.choi.matrix())) < 1e-12);
}

#[test]
fn forwarding_fails_a_to_b_only() {
    // A_i → B_o identity, A_o fixed to |0⟩, B_i discarded
    let d = 2;
    let mut kraus = Vec::new();
    for b in 0..d {
        let mut k = CMatrix::zeros(d * d, d * d);
        for ai in 0..d {
            k[(ai, ai * d + b)] = C64::new(1.0, 0.0);
        }
        kraus.push(k);
    }
    let ch = Channel::from_kraus(kraus, d * d, d * d).unwrap();
    let c = NsCorrelation::from_joint_channel(&ch, (d, d, d, d)).unwrap();
    let r = check_ns(&c).unwrap();
    assert!(r.cp_ok() && r.tp_ok() && r.b_to_a_ok());
    assert!(!r.a_to_b_ok(), "{r:?}");
}

#[test]
fn classical_boxes_agree() {
    let pr = pr_box();
    assert_eq!(classical_box_residual(&pr).unwrap(), 0.0);
    assert!(check_ns(&NsCorrelation::from_classical_box(&pr).unwrap()).unwrap().passes());

    // Bob outputs Alice's input
    let leak: Vec<Vec<Vec<Vec<f64>>>> = (0..2)
        .map(|x| {
            (0..2)
                .map(|_| (0..2).map(|a| (0..2).map(|b| if a == 0 && b == x { 1.0 } else { 0.0 }).collect()).collect())
                .collect()
        })
        .collect();
    assert!(classical_box_residual(&leak).unwrap() > 0.5);
    let r = check_ns(&NsCorrelation::from_classical_box(&leak).unwrap()).unwrap();
    assert!(!r.a_to_b_ok() && r.b_to_a_ok());
}

#[test]
fn classical_composition_formula() {
    let pr = pr_box();
    let n = vec![vec![0.7, 0.3], vec![0.2, 0.8]];
    let c = NsCorrelation::from_classical_box(&pr).unwrap();
    let m = compose(&c, &Channel::classical(&n).unwrap()).unwrap();
    for x in 0..2 {
        for b in 0..2 {
            let expected: f64 =
                (0..2).flat_map(|y| (0..2).map(move |a| (a, y))).map(|(a, y)| pr[x][y][a][b] * n[a][y]).sum();
            assert_abs_diff_eq!(m.choi.entry(x * 2 + b, x * 2 + b).re, expected, epsilon = 1e-12);
        }
    }
    assert!(m.trace_preserving);
}

#[test]
fn capacity_noiseless_bit() {
    let k = NCGraph::noiseless_classical(2).unwrap();
    let c = build_capacity_ns(&k, 2, &opts()).unwrap();
    assert!(check_ns(&c).unwrap().max_residual() <= BUILD_NS_TOL);
    let m = compose(&c, &noiseless_bits(2).unwrap()).unwrap();
    assert!(max_abs(&(m.choi.matrix() - noiseless_bits(2).unwrap().choi.matrix())) < 1e-6);
}

#[test]
fn capacity_qubit_dense_coding() {
    let k = NCGraph::noiseless_quantum(2).unwrap();
    let c = build_capacity_ns(&k, 4, &opts()).unwrap();
    let r = check_ns(&c).unwrap();
    assert!(r.max_residual() <= BUILD_NS_TOL, "{r:?}");
    let m = compose(&c, &Channel::identity(2)).unwrap();
    assert!(max_abs(&(m.choi.matrix() - noiseless_bits(4).unwrap().choi.matrix())) < 1e-6);
    assert!(matches!(build_capacity_ns(&k, 5, &opts()), Err(Error::Infeasible(_))));
}

#[test]
fn capacity_trivial_at_one() {
    let k = NCGraph::two_state(0.75f64.sqrt()).unwrap();
    let c = build_capacity_ns(&k, 1, &opts()).unwrap();
    assert!(c.trivial && !c.notes.is_empty());
    assert!(check_ns(&c).unwrap().passes());
    assert!(matches!(build_capacity_ns(&k, 2, &opts()), Err(Error::Infeasible(_))));
}

#[test]
fn simulation_identity_qubit() {
    let id = Channel::identity(2);
    let r = verify_simulation(&id, 4, &opts()).unwrap();
    assert!(r.passed(), "{r:?}");
    assert!(r.choi_distance.unwrap() < 1e-6);
    assert!(r.compose_crosscheck < 1e-10);
    assert!(matches!(build_simulation_ns(&id, 3, &opts()), Err(Error::Infeasible(_))));
}

#[test]
fn simulation_constant_channel() {
    let sigma = HermitianMatrix::from_diagonal(&[0.3, 0.7]);
    let n = Channel::constant(&sigma, 3).unwrap();
    let r = verify_simulation(&n, 1, &opts()).unwrap();
    assert!(r.trivial && r.passed(), "{r:?}");
}

#[test]
fn simulation_two_state() {
    let n = Channel::two_state(0.75f64.sqrt()).unwrap();
    let r = verify_simulation(&n, 2, &opts()).unwrap();
    assert!(r.passed(), "{r:?}");
    assert!(matches!(build_simulation_ns(&n, 1, &opts()), Err(Error::Infeasible(_))));
}

#[test]
fn code_examples() {
    let k = NCGraph::noiseless_classical(3).unwrap();
    let r = verify_code(&k, &noiseless_bits(3).unwrap(), 3, &opts()).unwrap();
    assert!(r.passed(), "{r:?}");
    assert!(r.ns.max_residual() <= 1e-8 && r.max_off_diagonal.unwrap() <= 1e-8 && r.orthogonality.unwrap() <= 1e-8);

    let r = verify_code(&NCGraph::noiseless_quantum(2).unwrap(), &Channel::identity(2), 4, &opts()).unwrap();
    assert!(r.passed(), "{r:?}");
}

#[test]
fn code_random_isometry_complex_entries() {
    // complex Kraus operators make the conjugation in the face matter
    let mut rng = random::rng(7);
    let n = random::channel(&mut rng, 2, 3, 1);
    let k = n.graph();
    let r = verify_code(&k, &n, 2, &opts()).unwrap();
    assert!(r.passed(), "{r:?}");
}

#[test]
fn composition_is_linear() {
    let mut rng = random::rng(3);
    let n = random::channel(&mut rng, 2, 2, 2);
    let c1 = build_capacity_ns(&NCGraph::noiseless_quantum(2).unwrap(), 4, &opts()).unwrap();
    let a = random::channel(&mut rng, 4, 2, 2);
    let b = random::channel(&mut rng, 2, 4, 2);
    let c2 = NsCorrelation::product(&a, &b).unwrap();
    let lambda = 0.3;
    let mix = c1.omega.matrix() * real(lambda) + c2.omega.matrix() * real(1.0 - lambda);
    let c = NsCorrelation::new(c1.dims, mix).unwrap();
    let lhs = compose(&c, &n).unwrap();
    let rhs = compose(&c1, &n).unwrap().choi.matrix() * real(lambda)
        + compose(&c2, &n).unwrap().choi.matrix() * real(1.0 - lambda);
    assert!(max_abs(&(lhs.choi.matrix() - rhs)) < 1e-10);
}

#[test]
fn non_signalling_compositions_are_cptp() {
    let mut rng = random::rng(11);
    let c = build_simulation_ns(&Channel::identity(2), 4, &opts()).unwrap();
    for _ in 0..5 {
        let n = random::channel(&mut rng, 4, 4, 3);
        let m = compose(&c, &n).unwrap();
        assert!(trace_deviation(&m) < 1e-8);
        assert!(m.choi.min_eigenvalue() > -1e-8);
        let l = compose_link(&c, &n).unwrap();
        assert!(max_abs(&(l.choi.matrix() - m.choi.matrix())) < 1e-10);
    }
}

#[test]
fn signalling_correlation_breaks_trace() {
    // Π forwards B_i to A_o and A_i to B_o
    let d = 2;
    let swap = Channel::from_kraus(
        vec![CMatrix::from_fn(d * d, d * d, |r, c| {
            let (ao, bo) = (r / d, r % d);
            let (ai, bi) = (c / d, c % d);
            C64::new(if ao == bi && bo == ai { 1.0 } else { 0.0 }, 0.0)
        })],
        d * d,
        d * d,
    )
    .unwrap();
    let c = NsCorrelation::from_joint_channel(&swap, (d, d, d, d)).unwrap();
    assert!(!check_ns(&c).unwrap().b_to_a_ok());
    assert!(signalling_witness(&c).unwrap() >= 1e-3);

    let good = build_simulation_ns(&Channel::identity(2), 4, &opts()).unwrap();
    assert!(signalling_witness(&good).unwrap() < 1e-8);
}

#[test]
fn capacity_form_is_permutation_covariant() {
    let c = build_capacity_ns(&NCGraph::noiseless_quantum(2).unwrap(), 4, &opts()).unwrap();
    let perm = [2usize, 0, 3, 1];
    let tau = CMatrix::from_fn(4, 4, |r, s| C64::new(if perm[s] == r { 1.0 } else { 0.0 }, 0.0));
    let twirled = c.conjugate_by([&tau, &identity(2), &identity(2), &tau]).unwrap();
    assert!(max_abs(&(twirled - c.omega.matrix())) < 1e-12);
}

#[test]
fn dimension_errors() {
    let c = NsCorrelation::product(&Channel::identity(2), &Channel::identity(2)).unwrap();
    assert!(matches!(compose(&c, &Channel::identity(3)), Err(Error::Dimension(_))));
    assert!(NsCorrelation::new((2, 2, 2, 2), CMatrix::zeros(8, 8)).is_err());
}
