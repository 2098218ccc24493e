use nalgebra::DVector;

use super::{aram, assemble, diag, solve_pair, QuantityResult, Rounding, Witness};
use crate::matcore::{CMatrix, C64};
use crate::model::{confusability_graph, Graph, NCGraph};
use crate::sdp::{self, value_of, vector_of, HExpr, Model, Sense, SolveOptions};
use crate::{Error, Result};

/// Lovász number `ϑ(G) = max tr(J X) s.t. X ⪰ 0, tr X = 1, X_ij = 0 on edges`,
/// with the dual `min t s.t. t·1 + Σ_{ij∈E} y_ij (e_ie_j' + e_je_i') ⪰ J`.
pub fn lovasz_theta(g: &Graph, opts: &SolveOptions) -> Result<QuantityResult> {
    let n = g.n;
    if n == 0 {
        return Err(Error::spec("graph has no vertices"));
    }
    let edges: Vec<(usize, usize)> = g.edges.iter().copied().collect();
    let one = C64::new(1.0, 0.0);

    let mut m = Model::new(Sense::Maximize);
    let x = m.psd("X", n);
    let all: Vec<_> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).flat_map(|(i, j)| x.entry(i, j)).collect();
    m.add_objective(&all);
    m.equal_scalar(&x.trace(), 1.0);
    for &(i, j) in &edges {
        m.equal_scalar(&x.entry(i, j), 0.0);
        m.equal_scalar(&sdp::scale_terms(&x.entry(i, j), C64::new(0.0, -1.0)), 0.0);
    }
    let primal_problem = m.build();

    let mut dm = Model::new(Sense::Minimize);
    let t = dm.free("t", 1);
    dm.add_objective(&t.scalar(0));
    let mut lhs = HExpr::zeros(n);
    lhs.add_scaled_identity(&t.scalar(0), 1.0);
    let y = (!edges.is_empty()).then(|| dm.free("y", edges.len()));
    if let Some(y) = &y {
        for (k, &(i, j)) in edges.iter().enumerate() {
            let mut e = CMatrix::zeros(n, n);
            e[(i, j)] = one;
            e[(j, i)] = one;
            lhs.add_scaled_matrix(&y.scalar(k), &e);
        }
    }
    dm.psd_ge("t+Y−J", &lhs, &CMatrix::from_element(n, n, one));
    let dual_problem = dm.build();
    let (primal, dual) = solve_pair(&primal_problem, &dual_problem, opts)?;

    let mut dw = Vec::new();
    if let Some(y) = &y {
        dw.push(Witness::new("y", diag(&vector_of(&dual, y))));
    }
    Ok(assemble("theta", Rounding::Floor, &primal, &dual, vec![Witness::new("X", value_of(&primal, &x))], dw))
}

/// `ϑ(G)` next to `A(K)` of the cq-graph of an orthogonal representation of `G`.
#[derive(Clone, Debug)]
pub struct ThetaCrosscheck {
    pub theta: QuantityResult,
    pub aram: QuantityResult,
    /// `A(K) − ϑ(G)`; nonnegative up to solver accuracy, zero for optimal representations.
    pub excess: f64,
}

/// Solves `ϑ(G)` and `A` of the representation's cq-graph, after checking that
/// the vectors are orthogonal exactly on the non-adjacent pairs.
pub fn theta_with_representation(g: &Graph, vectors: &[DVector<C64>], opts: &SolveOptions) -> Result<ThetaCrosscheck> {
    if vectors.len() != g.n {
        return Err(Error::spec(format!("{} vectors for {} vertices", vectors.len(), g.n)));
    }
    let k = NCGraph::from_cq_vectors(vectors)?;
    if confusability_graph(&k)? != *g {
        return Err(Error::spec("vectors are not an orthogonal representation of the graph"));
    }
    let theta = lovasz_theta(g, opts)?;
    let aram = aram(&k, opts)?;
    let excess = aram.value - theta.value;
    Ok(ThetaCrosscheck { theta, aram, excess })
}
