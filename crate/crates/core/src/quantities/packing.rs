use super::{assemble, diag, solve_pair, QuantityResult, Rounding, Witness};
use crate::matcore::{identity, kron, partial_trace_general, CMatrix, HermitianMatrix, C64};
use crate::model::NCGraph;
use crate::sdp::{self, value_of, vector_of, HExpr, Model, Sense, SolveOptions, SolveStatus, Terms};
use crate::{Error, Result};

/// `Re tr(T M)` as terms in the entries of `T`.
fn trace_against(t: &crate::sdp::MatVar, m: &CMatrix) -> Terms {
    let d = t.dim();
    let mut out = Vec::new();
    for a in 0..d {
        for b in 0..d {
            let w = m[(b, a)];
            if w.norm() > 0.0 {
                out.extend(sdp::scale_terms(&t.entry(a, b), w));
            }
        }
    }
    out
}

/// `A(K)`, through the cq reduction whenever a cq decomposition is known.
pub fn aram(k: &NCGraph, opts: &SolveOptions) -> Result<QuantityResult> {
    match &k.cq {
        Some(ps) => aram_cq(ps, opts),
        None => aram_full(k, opts),
    }
}

/// `A(K) = max tr S s.t. S ⪰ 0, tr_A P(S⊗1) ⪯ 1_B`, dual
/// `min tr T s.t. T ⪰ 0, tr_B P(1⊗T) ⪰ 1_A`.
pub fn aram_full(k: &NCGraph, opts: &SolveOptions) -> Result<QuantityResult> {
    packing_pair(k, false, "aram", opts)
}

/// `Ã(K)`: as [`aram_full`] with `P(·)P` sandwiched.
pub fn aram_tilde(k: &NCGraph, opts: &SolveOptions) -> Result<QuantityResult> {
    packing_pair(k, true, "aram_tilde", opts)
}

fn packing_pair(k: &NCGraph, sandwich: bool, name: &str, opts: &SolveOptions) -> Result<QuantityResult> {
    let (d_a, d_b) = (k.d_a, k.d_b);
    let p = k.p.matrix().clone();

    let mut m = Model::new(Sense::Maximize);
    let s = m.psd("S", d_a);
    m.add_objective(&s.trace());
    let mut load = HExpr::zeros(d_b);
    let pc = p.clone();
    load.add_map(-1.0, &s, move |u| {
        let mut x = &pc * kron(u, &identity(d_b));
        if sandwich {
            x = &x * &pc;
        }
        partial_trace_general(&x, &[d_a, d_b], &[1]).expect("dims")
    });
    m.psd_ge("1−trA P(S⊗1)", &load, &(-identity(d_b)));
    let primal_problem = m.build();

    let mut dm = Model::new(Sense::Minimize);
    let t = dm.psd("T", d_b);
    dm.add_objective(&t.trace());
    let mut cover = HExpr::zeros(d_a);
    let pc = p;
    cover.add_map(1.0, &t, move |u| {
        let mut x = &pc * kron(&identity(d_a), u);
        if sandwich {
            x = &x * &pc;
        }
        partial_trace_general(&x, &[d_a, d_b], &[0]).expect("dims")
    });
    dm.psd_ge("trB P(1⊗T)−1", &cover, &identity(d_a));
    let dual_problem = dm.build();
    let (primal, dual) = solve_pair(&primal_problem, &dual_problem, opts)?;

    Ok(assemble(
        name,
        Rounding::Floor,
        &primal,
        &dual,
        vec![Witness::new("S", value_of(&primal, &s))],
        vec![Witness::new("T", value_of(&dual, &t))],
    ))
}

/// `A` of a cq-graph: `max Σ s_i s.t. s_i ≥ 0, Σ s_i P_i ⪯ 1`, dual
/// `min tr T s.t. T ⪰ 0, tr(T P_i) ≥ 1`.
pub fn aram_cq(projectors: &[HermitianMatrix], opts: &SolveOptions) -> Result<QuantityResult> {
    let n = projectors.len();
    let d = projectors.first().ok_or_else(|| Error::spec("empty projector list"))?.dim();

    let mut m = Model::new(Sense::Maximize);
    let s = m.nonneg("s", n);
    m.add_objective(&s.trace());
    let mut load = HExpr::zeros(d);
    for (i, pi) in projectors.iter().enumerate() {
        load.add_scaled_matrix(&sdp::scale_terms(&s.scalar(i), C64::new(-1.0, 0.0)), pi.matrix());
    }
    m.psd_ge("1−Σ s_i P_i", &load, &(-identity(d)));
    let primal_problem = m.build();

    let mut dm = Model::new(Sense::Minimize);
    let t = dm.psd("T", d);
    dm.add_objective(&t.trace());
    for (i, pi) in projectors.iter().enumerate() {
        dm.ge_scalar(&format!("tr TP{i}"), &trace_against(&t, pi.matrix()), 1.0);
    }
    let dual_problem = dm.build();
    let (primal, dual) = solve_pair(&primal_problem, &dual_problem, opts)?;

    Ok(assemble(
        "aram",
        Rounding::Floor,
        &primal,
        &dual,
        vec![Witness::new("s", diag(&vector_of(&primal, &s)))],
        vec![Witness::new("T", value_of(&dual, &t))],
    ))
}

/// `Â(K) = min_ρ λ_max(Σ_k E_k ρ E_k†)` over the orthonormal Kraus basis of `K`,
/// as `min t s.t. N(ρ) ⪯ t·1, tr ρ = 1`; the dual
/// `max u s.t. N†(σ) ⪰ u·1, tr σ = 1` is solved separately.
pub fn aram_hat(k: &NCGraph, opts: &SolveOptions) -> Result<QuantityResult> {
    let (d_a, d_b) = (k.d_a, k.d_b);
    let basis = k.kraus_basis.clone();
    if basis.is_empty() {
        return Err(Error::Missing("aram_hat needs Kraus operators".into()));
    }

    let mut m = Model::new(Sense::Minimize);
    let t = m.free("t", 1);
    let rho = m.psd("rho", d_a);
    m.add_objective(&t.scalar(0));
    m.equal_scalar(&rho.trace(), 1.0);
    let mut out = HExpr::zeros(d_b);
    let b1 = basis.clone();
    out.add_scaled_identity(&t.scalar(0), 1.0)
        .add_map(-1.0, &rho, move |u| b1.iter().fold(CMatrix::zeros(d_b, d_b), |acc, e| acc + e * u * e.adjoint()));
    m.psd_ge("t−N(rho)", &out, &CMatrix::zeros(d_b, d_b));
    let primal_problem = m.build();

    let mut dm = Model::new(Sense::Maximize);
    let u = dm.free("u", 1);
    let sigma = dm.psd("sigma", d_b);
    dm.add_objective(&u.scalar(0));
    dm.equal_scalar(&sigma.trace(), 1.0);
    let mut back = HExpr::zeros(d_a);
    let b2 = basis;
    back.add_map(1.0, &sigma, move |x| b2.iter().fold(CMatrix::zeros(d_a, d_a), |acc, e| acc + e.adjoint() * x * e))
        .add_scaled_identity(&sdp::scale_terms(&u.scalar(0), C64::new(-1.0, 0.0)), 1.0);
    dm.psd_ge("N†(sigma)−u", &back, &CMatrix::zeros(d_a, d_a));
    let dual_problem = dm.build();
    let (primal, dual) = solve_pair(&primal_problem, &dual_problem, opts)?;

    Ok(assemble(
        "aram_hat",
        Rounding::Floor,
        &primal,
        &dual,
        vec![Witness::new("rho", value_of(&primal, &rho))],
        vec![Witness::new("sigma", value_of(&dual, &sigma))],
    ))
}

/// Handle value `η({P_i})` of an orthogonal representation, computed as `Â`
/// of the cq-graph of the projectors.
pub fn eta(projectors: Vec<HermitianMatrix>, opts: &SolveOptions) -> Result<QuantityResult> {
    let k = NCGraph::from_cq_projectors(projectors)?;
    let mut r = aram_hat(&k, opts)?;
    r.name = "eta".into();
    Ok(r)
}

/// 0/1 adjacency `Γ(y|x)` of a transition matrix (`p(y|x) > 0`).
pub fn support_indicator(p: &[Vec<f64>]) -> Vec<Vec<f64>> {
    p.iter().map(|row| row.iter().map(|&q| if q > 0.0 { 1.0 } else { 0.0 }).collect()).collect()
}

/// Fractional packing number `α*(Γ)`: the packing LP
/// `max Σ p_x s.t. Σ_x p_x Γ(y|x) ≤ 1, 0 ≤ p_x ≤ 1` and the covering LP
/// `min Σ q_y s.t. Σ_y q_y Γ(y|x) ≥ 1, q_y ≥ 0`, solved separately.
/// Nonzero entries of `gamma` are treated as edges.
pub fn fractional_packing(gamma: &[Vec<f64>], opts: &SolveOptions) -> Result<QuantityResult> {
    let nx = gamma.len();
    let ny = gamma.first().map_or(0, Vec::len);
    if nx == 0 || ny == 0 || gamma.iter().any(|r| r.len() != ny) {
        return Err(Error::spec("bipartite graph needs a non-empty rectangular adjacency"));
    }
    let edge = |x: usize, y: usize| gamma[x][y] != 0.0;
    if let Some(x) = (0..nx).find(|&x| (0..ny).all(|y| !edge(x, y))) {
        return Err(Error::spec(format!("input {x} has no edge")));
    }

    let mut m = Model::new(Sense::Maximize);
    let p = m.nonneg("p", nx);
    m.add_objective(&p.trace());
    for y in 0..ny {
        let terms: Terms = (0..nx).filter(|&x| edge(x, y)).flat_map(|x| p.scalar(x)).collect();
        if !terms.is_empty() {
            m.le_scalar(&format!("y{y}"), &terms, 1.0);
        }
    }
    for x in 0..nx {
        m.le_scalar(&format!("p{x}≤1"), &p.scalar(x), 1.0);
    }
    let primal_problem = m.build();

    let mut dm = Model::new(Sense::Minimize);
    let q = dm.nonneg("q", ny);
    dm.add_objective(&q.trace());
    for x in 0..nx {
        let terms: Terms = (0..ny).filter(|&y| edge(x, y)).flat_map(|y| q.scalar(y)).collect();
        dm.ge_scalar(&format!("x{x}"), &terms, 1.0);
    }
    let dual_problem = dm.build();
    let (primal, dual) = solve_pair(&primal_problem, &dual_problem, opts)?;

    let mut r = assemble(
        "alpha_star",
        Rounding::Floor,
        &primal,
        &dual,
        vec![Witness::new("p", diag(&vector_of(&primal, &p)))],
        vec![Witness::new("q", diag(&vector_of(&dual, &q)))],
    );
    if r.status == SolveStatus::Optimal && r.crosscheck_gap > LP_TOL * (1.0 + r.value.abs()) {
        r.notes.push(format!("packing and covering differ by {:.3e}", r.crosscheck_gap));
        r.status = SolveStatus::Numerical;
    }
    Ok(r)
}

/// Agreement required between the packing and covering LPs.
pub const LP_TOL: f64 = 1e-7;
