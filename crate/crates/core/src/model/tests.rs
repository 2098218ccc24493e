use approx::assert_abs_diff_eq;

use super::*;
use crate::matcore::kron_perm;
use crate::random;

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && (a - b).norm() <= tol
}

#[test]
fn identity_choi_is_max_entangled() {
    let ch = Channel::identity(2);
    assert!(close(ch.choi.matrix(), HermitianMatrix::max_entangled(2).matrix(), 1e-15));
    assert_abs_diff_eq!(ch.choi.trace(), 2.0, epsilon = 1e-15);
}

#[test]
fn amplitude_damping_choi() {
    let ch = Channel::amplitude_damping(0.5).unwrap();
    assert!(ch.trace_preserving);
    assert_eq!(ch.choi.rank(None), 2);
    let ta = ch.choi.partial_trace(&[0]).unwrap();
    assert!(close(ta.matrix(), &identity(2), 1e-12));
}

#[test]
fn classical_choi_is_diagonal() {
    let p = vec![vec![0.25, 0.75], vec![1.0, 0.0]];
    let ch = Channel::classical(&p).unwrap();
    let j = ch.choi.matrix();
    for r in 0..4 {
        for c in 0..4 {
            let expect = if r == c { p[r / 2][r % 2] } else { 0.0 };
            assert_abs_diff_eq!(j[(r, c)].re, expect, epsilon = 1e-14);
            assert_abs_diff_eq!(j[(r, c)].im, 0.0, epsilon = 1e-14);
        }
    }
}

#[test]
fn amplitude_damping_support_projector() {
    let ch = Channel::amplitude_damping(0.5).unwrap();
    let p = ch.choi.support_projector(None).unwrap();
    assert_eq!(p.rank(None), 2);
    // hand-computed Kraus vectors |00> + sqrt(1/2)|11> and |10>
    let s = 0.5f64.sqrt();
    let v0 = DVector::from_vec(vec![real(1.0), real(0.0), real(0.0), real(s)]);
    let v1 = DVector::from_vec(vec![real(0.0), real(0.0), real(1.0), real(0.0)]);
    let expected = &v0 * v0.adjoint() / real(1.5) + &v1 * v1.adjoint();
    assert!(close(p.matrix(), &expected, 1e-10));
    let k = NCGraph::amplitude_damping(0.5).unwrap();
    assert!(close(k.p.matrix(), &expected, 1e-10));
}

#[test]
fn amplitude_damping_output_marginal() {
    for r in [0.2, 0.5, 0.8] {
        let k = NCGraph::amplitude_damping(r).unwrap();
        let m = k.output_marginal();
        let d0 = (3.0 - r) / (2.0 - r);
        let d1 = (1.0 - r) / (2.0 - r);
        let expected = HermitianMatrix::from_diagonal(&[d0, d1]);
        assert!(close(m.matrix(), expected.matrix(), 1e-12), "r = {r}");
    }
    let m = NCGraph::amplitude_damping(0.5).unwrap().output_marginal();
    assert_abs_diff_eq!(m.entry(0, 0).re, 5.0 / 3.0, epsilon = 1e-12);
    assert_abs_diff_eq!(m.entry(1, 1).re, 1.0 / 3.0, epsilon = 1e-12);
}

#[test]
fn tensor_projector_matches_product_kraus() {
    let a = NCGraph::amplitude_damping(0.5).unwrap();
    let b = NCGraph::two_state(0.75f64.sqrt()).unwrap();
    let via_perm = kron_perm(&[&a.p, &b.p], &[0, 2, 1, 3]).unwrap();
    let ka = Channel::amplitude_damping(0.5).unwrap().kraus;
    let kb = Channel::two_state(0.75f64.sqrt()).unwrap().kraus;
    let mut prods = Vec::new();
    for e in &ka {
        for f in &kb {
            prods.push(kron(e, f));
        }
    }
    let direct = NCGraph::from_kraus(&prods, 4, 4).unwrap();
    assert!(close(via_perm.matrix(), direct.p.matrix(), 1e-10));
    let t = a.tensor(&b).unwrap();
    assert!(close(t.p.matrix(), direct.p.matrix(), 1e-10));
}

#[test]
fn noiseless_classical_graph() {
    let k = NCGraph::noiseless_classical(2).unwrap();
    assert_eq!(k.rank(), 2);
    let expected = HermitianMatrix::from_diagonal(&[1.0, 0.0, 0.0, 1.0]);
    assert!(close(k.p.matrix(), expected.matrix(), 1e-15));
}

#[test]
fn two_state_overlap() {
    let k = GraphSpec::TwoState { alpha: None, alpha_sq: Some(0.75) }.to_graph().unwrap();
    let cq = k.cq.as_ref().unwrap();
    let vecs = two_state_vectors(0.75f64.sqrt()).unwrap();
    assert_abs_diff_eq!(vecs[0].dotc(&vecs[1]).norm(), 0.5, epsilon = 1e-14);
    assert_abs_diff_eq!(operator_norm(&(cq[0].matrix() * cq[1].matrix())), 0.5, epsilon = 1e-12);
}

#[test]
fn spec_errors() {
    assert!(GraphSpec::Kraus { kraus: vec![] }.to_graph().is_err());
    assert!(GraphSpec::TwoState { alpha: Some(1.5), alpha_sq: None }.to_graph().is_err());
    assert!(GraphSpec::TwoState { alpha: Some(0.0), alpha_sq: None }.to_graph().is_err());
    let bad = vec![vec![vec![CEntry::Real(1.0), CEntry::Real(1.0)], vec![CEntry::Real(0.0), CEntry::Real(1.0)]]];
    let err = GraphSpec::Cq { projectors: Some(bad), states: None, vectors: None }.to_graph();
    assert!(err.is_err());
}

#[test]
fn spec_json_round_trip() {
    let specs = vec![
        GraphSpec::TwoState { alpha: None, alpha_sq: Some(0.75) },
        GraphSpec::AmplitudeDamping { r: 0.5 },
        GraphSpec::Tensor { factors: vec![GraphSpec::NoiselessClassical { l: 2 }], power: Some(2) },
        GraphSpec::Kraus { kraus: vec![spec::matrix_to_json(&identity(2))] },
        GraphSpec::Graph { n: 5, edges: vec![[0, 1], [1, 2]], representation: None },
    ];
    for s in specs {
        let text = s.to_json();
        let back = GraphSpec::from_json(&text).unwrap();
        assert_eq!(back, s);
    }
    let parsed = GraphSpec::from_json(r#"{"type":"kraus","kraus":[[[1,0],[0,[0,1]]]]}"#).unwrap();
    let k = parsed.to_channel().unwrap().unwrap();
    assert_eq!(k.kraus[0][(1, 1)], c64(0.0, 1.0));
}

#[test]
fn kraus_validity_examples() {
    let one = validate_kraus_space(&[identity(1)], &opts()).unwrap();
    assert!(one.valid);
    let r = one.witness.unwrap();
    assert_abs_diff_eq!(r[(0, 0)].re, 1.0, epsilon = 1e-6);

    let mut e01 = CMatrix::zeros(2, 2);
    e01[(0, 1)] = real(1.0);
    let bad = validate_kraus_space(&[identity(2), e01], &opts()).unwrap();
    assert!(!bad.valid);
    assert!(bad.margin.abs() < 1e-6);
    let cert = bad.certificate.expect("dual certificate");
    assert!(cert.trace().re < KRAUS_MARGIN);

    let ad = Channel::amplitude_damping(0.5).unwrap();
    let good = validate_kraus_space(&ad.kraus, &opts()).unwrap();
    assert!(good.valid);
    assert!(good.margin > 1e-3);
}

#[test]
fn kraus_validity_unsolvable_equality() {
    // span{|0><1|}: E†E = |1><1| can never sum to the identity
    let mut e01 = CMatrix::zeros(2, 2);
    e01[(0, 1)] = real(1.0);
    let v = validate_kraus_space(&[e01], &opts()).unwrap();
    assert!(!v.valid);
}

#[test]
fn tensor_examples() {
    let d2 = NCGraph::noiseless_classical(2).unwrap();
    let d4 = NCGraph::noiseless_classical(4).unwrap();
    let t = d2.tensor(&d2).unwrap();
    assert!(close(t.p.matrix(), d4.p.matrix(), 1e-14));
    assert_eq!(t.cq.as_ref().unwrap().len(), 4);

    let ts = NCGraph::two_state(0.75f64.sqrt()).unwrap().power(2).unwrap();
    assert_eq!((ts.d_a, ts.d_b), (4, 4));
    assert_eq!(ts.cq.as_ref().unwrap().len(), 4);

    let ad = NCGraph::amplitude_damping(0.5).unwrap();
    assert_eq!(ad.tensor(&ad).unwrap().p.rank(None), ad.rank() * ad.rank());
}

#[test]
fn tensor_dimension_guard() {
    let k = NCGraph::noiseless_quantum(8).unwrap();
    assert!(matches!(k.power(3), Err(Error::TooLarge { .. })));
}

#[test]
fn tensor_is_associative() {
    let mut rng = random::rng(7);
    let a = random::channel(&mut rng, 2, 2, 2).graph();
    let b = NCGraph::two_state(0.8).unwrap();
    let c = NCGraph::amplitude_damping(0.3).unwrap();
    let left = a.tensor(&b).unwrap().tensor(&c).unwrap();
    let right = a.tensor(&b.tensor(&c).unwrap()).unwrap();
    assert!(close(left.p.matrix(), right.p.matrix(), 1e-12));
}

#[test]
fn confusability_examples() {
    let orth = NCGraph::noiseless_classical(2).unwrap();
    assert_eq!(confusability_graph(&orth).unwrap(), Graph::empty(2));
    let ts = NCGraph::two_state(0.8).unwrap();
    assert_eq!(confusability_graph(&ts).unwrap(), Graph::complete(2));
    let c5 = NCGraph::umbrella_c5();
    assert_eq!(confusability_graph(&c5).unwrap(), Graph::cycle(5));
    assert!(confusability_graph(&NCGraph::amplitude_damping(0.5).unwrap()).is_err());
}

#[test]
fn confusability_of_square_is_strong_product() {
    for k in [NCGraph::two_state(0.8).unwrap(), NCGraph::umbrella_c5()] {
        let g = confusability_graph(&k).unwrap();
        let g2 = confusability_graph(&k.power(2).unwrap()).unwrap();
        assert_eq!(g2, g.strong_product(&g));
    }
}

#[test]
fn graph_from_kraus_equals_choi_support() {
    let channels = vec![
        Channel::identity(2),
        Channel::amplitude_damping(0.5).unwrap(),
        Channel::two_state(0.75f64.sqrt()).unwrap(),
        Channel::classical(&[vec![0.5, 0.5, 0.0], vec![0.0, 0.2, 0.8]]).unwrap(),
        random::channel(&mut random::rng(3), 3, 2, 2),
    ];
    for ch in channels {
        assert!(ch.trace_preserving);
        let tb = ch.choi.partial_trace(&[0]).unwrap();
        assert!(close(tb.matrix(), &identity(ch.d_in), 1e-9));
        let sp = ch.choi.support_projector(None).unwrap();
        assert!(close(ch.graph().p.matrix(), sp.matrix(), 1e-9));
    }
}

#[test]
fn cq_graph_matches_channel_graph() {
    let ch = Channel::two_state(0.9).unwrap();
    let k = NCGraph::two_state(0.9).unwrap();
    assert!(close(ch.graph().p.matrix(), k.p.matrix(), 1e-12));
}

#[test]
fn projector_graph_recovers_kraus_basis() {
    let k = NCGraph::amplitude_damping(0.4).unwrap();
    let again = NCGraph::from_projector(k.p.clone(), 2, 2).unwrap();
    let rebuilt = NCGraph::from_kraus(&again.kraus_basis, 2, 2).unwrap();
    assert!(close(rebuilt.p.matrix(), k.p.matrix(), 1e-10));
    let ch = k.some_channel().unwrap();
    assert!(ch.trace_preserving);
}
