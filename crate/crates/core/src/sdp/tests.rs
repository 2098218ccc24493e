use approx::assert_abs_diff_eq;

use super::model::{value_of, vector_of};
use super::*;
use crate::matcore::{identity, CMatrix, HermitianMatrix};

fn opts() -> SolveOptions {
    SolveOptions::default()
}

#[test]
fn min_trace_above_identity() {
    let mut m = Model::new(Sense::Minimize);
    let x = m.psd("X", 2);
    m.add_objective(&x.trace());
    let mut e = HExpr::zeros(2);
    e.add_var(1.0, &x);
    m.psd_ge("slack", &e, &identity(2));
    let sol = solve(&m.build(), &opts()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert_abs_diff_eq!(sol.primal_value, 2.0, epsilon = 1e-7);
    assert_abs_diff_eq!(sol.dual_value, 2.0, epsilon = 1e-7);
    let xv = value_of(&sol, &x);
    assert!((xv - identity(2)).norm() < 1e-6);
}

#[test]
fn one_dim_hermitian_block_keeps_value() {
    let mut m = Model::new(Sense::Minimize);
    let x = m.psd("x", 1);
    m.add_objective(&x.trace());
    m.equal_scalar(&x.trace(), 3.5);
    let problem = m.build();
    let cp = compile(&problem).unwrap();
    assert_eq!(cp.psd_dims, vec![2]);
    let sol = solve(&problem, &opts()).unwrap();
    assert_abs_diff_eq!(sol.primal_value, 3.5, epsilon = 1e-7);
}

#[test]
fn diagonal_only_problem_is_plain_lp() {
    // max x0 + x1 s.t. x0 + 2 x1 <= 4, 3 x0 + x1 <= 6
    let mut m = Model::new(Sense::Maximize);
    let x = m.nonneg("x", 2);
    let mut obj = x.scalar(0);
    obj.extend(x.scalar(1));
    m.add_objective(&obj);
    let mut r1 = x.scalar(0);
    r1.extend(model::scale_terms(&x.scalar(1), C64::new(2.0, 0.0)));
    m.le_scalar("s1", &r1, 4.0);
    let mut r2 = model::scale_terms(&x.scalar(0), C64::new(3.0, 0.0));
    r2.extend(x.scalar(1));
    m.le_scalar("s2", &r2, 6.0);
    let problem = m.build();
    let cp = compile(&problem).unwrap();
    assert!(cp.psd_dims.is_empty());
    let sol = solve(&problem, &opts()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    // vertex (8/5, 6/5)
    assert_abs_diff_eq!(sol.primal_value, 2.8, epsilon = 1e-7);
    let xv = vector_of(&sol, &x);
    assert_abs_diff_eq!(xv[0], 1.6, epsilon = 1e-6);
}

fn max_entangled_bound(m: &mut Model) -> MatVar {
    let t = m.psd("T", 2);
    m.add_objective(&t.trace());
    let mut e = HExpr::zeros(4);
    e.add_identity_kron(1.0, 2, &t);
    let phi = HermitianMatrix::max_entangled(2).into_matrix();
    m.psd_ge("G", &e, &phi);
    t
}

#[test]
fn max_entangled_min_entropy_program() {
    let mut m = Model::new(Sense::Minimize);
    let t = max_entangled_bound(&mut m);
    let sol = solve(&m.build(), &opts()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert_abs_diff_eq!(sol.primal_value, 4.0, epsilon = 1e-6);
    assert!((value_of(&sol, &t) - identity(2) * C64::new(2.0, 0.0)).norm() < 1e-5);

    // independent dual: max tr(Φ Z) s.t. tr_A Z = 1_B, Z ⪰ 0
    let mut d = Model::new(Sense::Maximize);
    let z = d.psd("Z", 4);
    let phi = HermitianMatrix::max_entangled(2).into_matrix();
    let mut obj = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            if phi[(j, i)].norm() > 0.0 {
                obj.extend(model::scale_terms(&z.entry(i, j), phi[(j, i)]));
            }
        }
    }
    d.add_objective(&obj);
    let mut e = HExpr::zeros(2);
    e.add_partial_trace(1.0, &z, &[2, 2], &[1]);
    d.equal(&e, &identity(2));
    let sol = solve(&d.build(), &opts()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert_abs_diff_eq!(sol.primal_value, 4.0, epsilon = 1e-6);
}

#[test]
fn complex_coefficients_are_respected() {
    // min tr X s.t. X ⪰ |v><v| with complex v: value ‖v‖²
    let v = nalgebra::DVector::from_vec(vec![C64::new(1.0, 1.0), C64::new(0.0, -2.0)]);
    let target: CMatrix = &v * v.adjoint();
    let mut m = Model::new(Sense::Minimize);
    let x = m.psd("X", 2);
    m.add_objective(&x.trace());
    let mut e = HExpr::zeros(2);
    e.add_var(1.0, &x);
    m.psd_ge("slack", &e, &target);
    let sol = solve(&m.build(), &opts()).unwrap();
    assert_abs_diff_eq!(sol.primal_value, 6.0, epsilon = 1e-6);
    let xv = value_of(&sol, &x);
    assert!((xv - target).norm() < 1e-4);
}

#[test]
fn free_hermitian_variable() {
    // min tr Y s.t. Y ⪰ diag(1, -3) + off-diagonal i: Y free, slack PSD
    let mut target = CMatrix::zeros(2, 2);
    target[(0, 0)] = C64::new(1.0, 0.0);
    target[(1, 1)] = C64::new(-3.0, 0.0);
    target[(0, 1)] = C64::new(0.0, 1.0);
    target[(1, 0)] = C64::new(0.0, -1.0);
    let mut m = Model::new(Sense::Minimize);
    let y = m.free_hermitian("Y", 2);
    m.add_objective(&y.trace());
    let mut e = HExpr::zeros(2);
    e.add_var(1.0, &y);
    m.psd_ge("slack", &e, &target);
    let sol = solve(&m.build(), &opts()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert_abs_diff_eq!(sol.primal_value, -2.0, epsilon = 1e-6);
}

#[test]
fn detects_primal_infeasibility() {
    // X ⪰ 0, tr X = -1
    let mut m = Model::new(Sense::Minimize);
    let x = m.psd("X", 2);
    m.add_objective(&x.trace());
    m.equal_scalar(&x.trace(), -1.0);
    let sol = solve(&m.build(), &opts()).unwrap();
    assert_eq!(sol.status, SolveStatus::Infeasible);
}

#[test]
fn detects_unboundedness() {
    // min -x0 with x0 - x1 = 0, x >= 0
    let mut m = Model::new(Sense::Minimize);
    let x = m.nonneg("x", 2);
    m.add_objective(&model::scale_terms(&x.scalar(0), C64::new(-1.0, 0.0)));
    let mut r = x.scalar(0);
    r.extend(model::scale_terms(&x.scalar(1), C64::new(-1.0, 0.0)));
    m.equal_scalar(&r, 0.0);
    let sol = solve(&m.build(), &opts()).unwrap();
    assert_eq!(sol.status, SolveStatus::Unbounded);
}

#[test]
fn redundant_rows_are_tolerated() {
    let mut m = Model::new(Sense::Minimize);
    let x = m.psd("X", 2);
    m.add_objective(&x.entry(0, 0));
    m.equal_scalar(&x.trace(), 1.0);
    m.equal_scalar(&model::scale_terms(&x.trace(), C64::new(2.0, 0.0)), 2.0);
    let sol = solve(&m.build(), &opts()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert_abs_diff_eq!(sol.primal_value, 0.0, epsilon = 1e-7);
    assert_eq!(sol.y.len(), 2);
}

#[test]
fn inconsistent_rows_are_infeasible() {
    let mut m = Model::new(Sense::Minimize);
    let x = m.psd("X", 2);
    m.add_objective(&x.trace());
    m.equal_scalar(&x.trace(), 1.0);
    m.equal_scalar(&x.trace(), 2.0);
    let sol = solve(&m.build(), &opts()).unwrap();
    assert_eq!(sol.status, SolveStatus::Infeasible);
}

#[test]
fn deterministic_repeat() {
    let build = || {
        let mut m = Model::new(Sense::Minimize);
        max_entangled_bound(&mut m);
        m.build()
    };
    let a = solve(&build(), &opts()).unwrap();
    let b = solve(&build(), &opts()).unwrap();
    assert!((a.primal_value - b.primal_value).abs() < 1e-9);
}

#[test]
fn integer_tags() {
    assert_eq!(integer_tag(2.0000004), Some(2));
    assert_eq!(integer_tag(1.9999996), Some(2));
    assert_eq!(integer_tag(1.5), None);
}

#[test]
fn dump_lists_nonzeros() {
    let mut m = Model::new(Sense::Minimize);
    let x = m.psd("X", 1);
    m.add_objective(&x.trace());
    m.equal_scalar(&x.trace(), 1.0);
    let cp = compile(&m.build()).unwrap();
    let dump = cp.dump();
    let lines: Vec<&str> = dump.lines().filter(|l| !l.starts_with('#')).collect();
    // objective: two diagonal entries of the embedded block; one row with two; one rhs
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().any(|l| l.starts_with("rhs 1")));
}
