use super::{assemble, diag, solve_pair, QuantityResult, Rounding, Witness};
use crate::matcore::{identity, range_isometry, CMatrix, HermitianMatrix};
use crate::model::{Channel, NCGraph};
use crate::sdp::{self, value_of, vector_of, HExpr, Model, Sense, SolveOptions};
use crate::{Error, Result};

/// `2^{−Hmin(A|B)}` of the Choi matrix: `min tr T s.t. J ⪯ 1⊗T`, with the dual
/// `max tr(J Z) s.t. Z ⪰ 0, tr_A Z = 1_B` solved separately.
pub fn sigma_channel(ch: &Channel, opts: &SolveOptions) -> Result<QuantityResult> {
    if !ch.trace_preserving {
        return Err(Error::spec("sigma_channel needs a trace-preserving channel"));
    }
    let (d_a, d_b) = (ch.d_in, ch.d_out);
    let d = d_a * d_b;
    let j = ch.choi.matrix();

    let mut m = Model::new(Sense::Minimize);
    let t = m.psd("T", d_b);
    m.add_objective(&t.trace());
    let mut ineq = HExpr::zeros(d);
    ineq.add_identity_kron(1.0, d_a, &t);
    m.psd_ge("1⊗T−J", &ineq, j);
    let primal_problem = m.build();

    let mut dm = Model::new(Sense::Maximize);
    let z = dm.psd("Z", d);
    let mut obj = Vec::new();
    for a in 0..d {
        for b in 0..d {
            let w = j[(b, a)];
            if w.norm() > 0.0 {
                obj.extend(sdp::scale_terms(&z.entry(a, b), w));
            }
        }
    }
    dm.add_objective(&obj);
    let mut marg = HExpr::zeros(d_b);
    marg.add_partial_trace(1.0, &z, &[d_a, d_b], &[1]);
    dm.equal(&marg, &identity(d_b));
    let dual_problem = dm.build();
    let (primal, dual) = solve_pair(&primal_problem, &dual_problem, opts)?;

    let mut r = assemble(
        "sigma_channel",
        Rounding::Ceil,
        &primal,
        &dual,
        vec![Witness::new("T", value_of(&primal, &t))],
        vec![Witness::new("Z", value_of(&dual, &z))],
    );
    r.notes.push(format!("Hmin(A|B) = {}", -r.value.log2()));
    Ok(r)
}

/// `Σ(K)`, through the cq reduction whenever a cq decomposition is known.
pub fn sigma_graph(k: &NCGraph, opts: &SolveOptions) -> Result<QuantityResult> {
    match &k.cq {
        Some(ps) => sigma_graph_cq(ps, opts),
        None => sigma_graph_full(k, opts),
    }
}

/// `Σ(K) = min tr T s.t. 0 ⪯ F ⪯ 1⊗T, tr_B F = 1_A, tr(1 − P)F = 0`, with
/// `F = U_P F' U_P†`; the dual `max tr S s.t. E ⪰ 0, tr_A E = 1_B,
/// P(S⊗1 − E)P ⪯ 0` is solved separately.
pub fn sigma_graph_full(k: &NCGraph, opts: &SolveOptions) -> Result<QuantityResult> {
    let (d_a, d_b) = (k.d_a, k.d_b);
    let d = d_a * d_b;
    let up = range_isometry(k.p.matrix(), 0.5);
    let r = up.ncols();

    let mut m = Model::new(Sense::Minimize);
    let t = m.psd("T", d_b);
    let f = m.psd("F'", r);
    m.add_objective(&t.trace());
    let mut ineq = HExpr::zeros(d);
    ineq.add_identity_kron(1.0, d_a, &t).add_congruence(-1.0, &up, &f);
    m.psd_ge("1⊗T−F", &ineq, &CMatrix::zeros(d, d));
    let mut marg = HExpr::zeros(d_a);
    let upc = up.clone();
    marg.add_map(1.0, &f, move |u| {
        crate::matcore::partial_trace_general(&(&upc * u * upc.adjoint()), &[d_a, d_b], &[0]).expect("dims")
    });
    m.equal(&marg, &identity(d_a));
    let primal_problem = m.build();

    let mut dm = Model::new(Sense::Maximize);
    let s = dm.free_hermitian("S", d_a);
    let e = dm.psd("E", d);
    dm.add_objective(&s.trace());
    let mut em = HExpr::zeros(d_b);
    em.add_partial_trace(1.0, &e, &[d_a, d_b], &[1]);
    dm.equal(&em, &identity(d_b));
    let mut face = HExpr::zeros(r);
    let upa = up.adjoint();
    face.add_congruence(1.0, &upa, &e);
    let (u1, u2) = (upa.clone(), up.clone());
    face.add_map(-1.0, &s, move |u| &u1 * crate::matcore::kron(u, &identity(d_b)) * &u2);
    dm.psd_ge("P(E−S⊗1)P", &face, &CMatrix::zeros(r, r));
    let dual_problem = dm.build();
    let (primal, dual) = solve_pair(&primal_problem, &dual_problem, opts)?;

    let f_full = &up * value_of(&primal, &f) * up.adjoint();
    Ok(assemble(
        "sigma",
        Rounding::Ceil,
        &primal,
        &dual,
        vec![Witness::new("T", value_of(&primal, &t)), Witness::new("F", f_full)],
        vec![Witness::new("S", value_of(&dual, &s)), Witness::new("E", value_of(&dual, &e))],
    ))
}

/// `Σ` of a cq-graph: `min tr T s.t. T ⪰ F_i, F_i ⪰ 0 supported on P_i, tr F_i = 1`,
/// dual `max Σ s_i s.t. s_i P_i ⪯ P_i E_i P_i, E_i ⪰ 0, Σ E_i = 1`.
pub fn sigma_graph_cq(projectors: &[HermitianMatrix], opts: &SolveOptions) -> Result<QuantityResult> {
    let n = projectors.len();
    let d = projectors.first().ok_or_else(|| Error::spec("empty projector list"))?.dim();
    let isos: Vec<CMatrix> = projectors.iter().map(|pi| range_isometry(pi.matrix(), 0.5)).collect();

    let mut m = Model::new(Sense::Minimize);
    let t = m.psd("T", d);
    m.add_objective(&t.trace());
    let mut fs = Vec::with_capacity(n);
    for (i, u) in isos.iter().enumerate() {
        let f = m.psd(&format!("F{i}"), u.ncols());
        m.equal_scalar(&f.trace(), 1.0);
        let mut gap = HExpr::zeros(d);
        gap.add_var(1.0, &t).add_congruence(-1.0, u, &f);
        m.psd_ge(&format!("T−F{i}"), &gap, &CMatrix::zeros(d, d));
        fs.push(f);
    }
    let primal_problem = m.build();

    let mut dm = Model::new(Sense::Maximize);
    let s = dm.free("s", n);
    dm.add_objective(&s.trace());
    let mut total = HExpr::zeros(d);
    let mut es = Vec::with_capacity(n);
    for (i, u) in isos.iter().enumerate() {
        let e = dm.psd(&format!("E{i}"), d);
        total.add_var(1.0, &e);
        let r = u.ncols();
        let mut blk = HExpr::zeros(r);
        blk.add_congruence(1.0, &u.adjoint(), &e)
            .add_scaled_identity(&sdp::scale_terms(&s.scalar(i), (-1.0).into()), 1.0);
        dm.psd_ge(&format!("P{i}E{i}P{i}−s{i}"), &blk, &CMatrix::zeros(r, r));
        es.push(e);
    }
    dm.equal(&total, &identity(d));
    let dual_problem = dm.build();
    let (primal, dual) = solve_pair(&primal_problem, &dual_problem, opts)?;

    // F = Σ_i |i⟩⟨i| ⊗ F_i on the full space
    let mut f_full = CMatrix::zeros(n * d, n * d);
    let mut pw = vec![Witness::new("T", value_of(&primal, &t))];
    for (i, f) in fs.iter().enumerate() {
        let fi = &isos[i] * value_of(&primal, f) * isos[i].adjoint();
        f_full.view_mut((i * d, i * d), (d, d)).copy_from(&fi);
        pw.push(Witness::new(&format!("F{i}"), fi));
    }
    pw.push(Witness::new("F", f_full));
    let mut dw = vec![Witness::new("s", diag(&vector_of(&dual, &s)))];
    for (i, e) in es.iter().enumerate() {
        dw.push(Witness::new(&format!("E{i}"), value_of(&dual, e)));
    }
    Ok(assemble("sigma", Rounding::Ceil, &primal, &dual, pw, dw))
}
