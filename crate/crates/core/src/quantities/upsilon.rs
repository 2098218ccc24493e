use super::{assemble, diag, solve_pair, QuantityResult, Rounding, Witness};
use crate::matcore::{identity, range_isometry, CMatrix, HermitianMatrix};
use crate::model::NCGraph;
use crate::sdp::{self, value_of, vector_of, HExpr, MatVar, Model, Sense, SolveOptions};
use crate::{Error, Result};

/// The primal program for `Υ` on a projector `P` (factors `d_a, d_b`), with
/// the face `tr P(S⊗1 − E) = 0` written as `S⊗1 − E = U_Q Z U_Q†`.
pub struct UpsilonModel {
    pub model: Model,
    pub s: MatVar,
    pub e: MatVar,
}

/// Builds the `Υ` primal. With `fixed_trace = Some(m)` the objective is
/// dropped and `tr S = m` is imposed instead.
pub fn upsilon_primal_model(p: &CMatrix, d_a: usize, d_b: usize, fixed_trace: Option<f64>) -> UpsilonModel {
    let d = d_a * d_b;
    let mut m = Model::new(Sense::Maximize);
    let s = m.psd("S", d_a);
    let e = m.psd("E", d);
    let uq = range_isometry(&(identity(d) - p), 0.5);

    let mut face = HExpr::zeros(d);
    face.add_kron_identity(1.0, &s, d_b).add_var(-1.0, &e);
    if uq.ncols() > 0 {
        let z = m.psd("Z", uq.ncols());
        face.add_congruence(-1.0, &uq, &z);
    }
    m.equal(&face, &CMatrix::zeros(d, d));

    let mut marg = HExpr::zeros(d_b);
    marg.add_partial_trace(1.0, &e, &[d_a, d_b], &[1]);
    m.equal(&marg, &identity(d_b));

    match fixed_trace {
        Some(t) => m.equal_scalar(&s.trace(), t),
        None => m.add_objective(&s.trace()),
    }
    UpsilonModel { model: m, s, e }
}

/// `Υ(K)`, through the cq reduction whenever a cq decomposition is known.
pub fn upsilon(k: &NCGraph, opts: &SolveOptions) -> Result<QuantityResult> {
    match &k.cq {
        Some(ps) => upsilon_cq(ps, opts),
        None => upsilon_full(k, opts),
    }
}

/// `Υ(K)` from the full projector `P`.
pub fn upsilon_full(k: &NCGraph, opts: &SolveOptions) -> Result<QuantityResult> {
    let (d_a, d_b) = (k.d_a, k.d_b);
    let d = d_a * d_b;
    let p = k.p.matrix();

    let um = upsilon_primal_model(p, d_a, d_b, None);
    let primal_problem = um.model.build();

    // Lagrangian dual of the face-reduced primal:
    // min tr T  s.t.  X ⪯ 1⊗T, tr_B X ⪰ 1_A, U_Q† X U_Q ⪯ 0
    let mut dm = Model::new(Sense::Minimize);
    let t = dm.free_hermitian("T", d_b);
    let x = dm.free_hermitian("X", d);
    dm.add_objective(&t.trace());
    let mut ineq = HExpr::zeros(d);
    ineq.add_identity_kron(1.0, d_a, &t).add_var(-1.0, &x);
    dm.psd_ge("1⊗T−X", &ineq, &CMatrix::zeros(d, d));
    let mut marg = HExpr::zeros(d_a);
    marg.add_partial_trace(1.0, &x, &[d_a, d_b], &[0]);
    dm.psd_ge("trB X−1", &marg, &identity(d_a));
    let uq = range_isometry(&(identity(d) - p), 0.5);
    if uq.ncols() > 0 {
        let mut face = HExpr::zeros(uq.ncols());
        face.add_congruence(-1.0, &uq.adjoint(), &x);
        dm.psd_ge("−Q X Q", &face, &CMatrix::zeros(uq.ncols(), uq.ncols()));
    }
    let dual_problem = dm.build();
    let (primal, dual) = solve_pair(&primal_problem, &dual_problem, opts)?;

    Ok(assemble(
        "upsilon",
        Rounding::Floor,
        &primal,
        &dual,
        vec![Witness::new("S", value_of(&primal, &um.s)), Witness::new("E", value_of(&primal, &um.e))],
        vec![Witness::new("T", value_of(&dual, &t)), Witness::new("X", value_of(&dual, &x))],
    ))
}

/// `Υ` of the cq-graph `P = Σ_i |i⟩⟨i| ⊗ P_i`:
/// `max Σ s_i  s.t.  0 ⪯ R_i ⪯ s_i(1 − P_i), Σ_i (s_i P_i + R_i) = 1`.
pub fn upsilon_cq(projectors: &[HermitianMatrix], opts: &SolveOptions) -> Result<QuantityResult> {
    let n = projectors.len();
    let d = projectors.first().ok_or_else(|| Error::spec("empty projector list"))?.dim();
    let isos: Vec<CMatrix> = projectors.iter().map(|pi| range_isometry(&(identity(d) - pi.matrix()), 0.5)).collect();

    let mut m = Model::new(Sense::Maximize);
    let s = m.nonneg("s", n);
    m.add_objective(&s.trace());
    let mut norm = HExpr::zeros(d);
    let mut rs = Vec::with_capacity(n);
    for (i, pi) in projectors.iter().enumerate() {
        norm.add_scaled_matrix(&s.scalar(i), pi.matrix());
        let q = isos[i].ncols();
        if q == 0 {
            rs.push(None);
            continue;
        }
        // R_i = U_i R'_i U_i†, R'_i ⪯ s_i·1
        let r = m.psd(&format!("R{i}"), q);
        let mut cap = HExpr::zeros(q);
        cap.add_scaled_identity(&s.scalar(i), 1.0).add_var(-1.0, &r);
        m.psd_ge(&format!("s{i}−R{i}"), &cap, &CMatrix::zeros(q, q));
        norm.add_congruence(1.0, &isos[i], &r);
        rs.push(Some(r));
    }
    m.equal(&norm, &identity(d));
    let primal_problem = m.build();

    // min tr T  s.t.  Y_i ⪰ 0, tr(T P_i) − tr Y_i ≥ 1, U_i†TU_i + Y_i ⪰ 0
    let mut dm = Model::new(Sense::Minimize);
    let t = dm.free_hermitian("T", d);
    dm.add_objective(&t.trace());
    for (i, pi) in projectors.iter().enumerate() {
        let mut lin = Vec::new();
        for a in 0..d {
            for b in 0..d {
                let w = pi.entry(b, a);
                if w.norm() > 0.0 {
                    lin.extend(sdp::scale_terms(&t.entry(a, b), w));
                }
            }
        }
        let q = isos[i].ncols();
        if q > 0 {
            let y = dm.psd(&format!("Y{i}"), q);
            lin.extend(sdp::scale_terms(&y.trace(), (-1.0).into()));
            let mut blk = HExpr::zeros(q);
            blk.add_congruence(1.0, &isos[i].adjoint(), &t).add_var(1.0, &y);
            dm.psd_ge(&format!("U{i}†TU{i}+Y{i}"), &blk, &CMatrix::zeros(q, q));
        }
        dm.ge_scalar(&format!("tr TP{i}"), &lin, 1.0);
    }
    let dual_problem = dm.build();
    let (primal, dual) = solve_pair(&primal_problem, &dual_problem, opts)?;

    // lift to the full witnesses S = diag(s), E = Σ_i |i⟩⟨i| ⊗ (s_i P_i + R_i)
    let sv = vector_of(&primal, &s);
    let mut e_full = CMatrix::zeros(n * d, n * d);
    let mut pw = vec![Witness::new("s", diag(&sv))];
    for (i, pi) in projectors.iter().enumerate() {
        let mut blk = pi.matrix() * crate::matcore::real(sv[i]);
        if let Some(r) = &rs[i] {
            let rv = &isos[i] * value_of(&primal, r) * isos[i].adjoint();
            blk += &rv;
            pw.push(Witness::new(&format!("R{i}"), rv));
        }
        e_full.view_mut((i * d, i * d), (d, d)).copy_from(&blk);
    }
    pw.push(Witness::new("S", diag(&sv)));
    pw.push(Witness::new("E", e_full));

    Ok(assemble("upsilon", Rounding::Floor, &primal, &dual, pw, vec![Witness::new("T", value_of(&dual, &t))]))
}
