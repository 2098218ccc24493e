//! Channels, Kraus operator spaces and non-commutative bipartite graphs.

mod spec;

pub use spec::{matrix_from_json, matrix_to_json, CEntry, GraphSpec, JsonMatrix};

use std::collections::BTreeSet;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{c64, identity, kron, operator_norm, real, CMatrix, HermitianMatrix, C64};
use crate::sdp::{self, HExpr, Model, Sense, SolveOptions, SolveStatus};

/// Largest total state space (`d_A · d_B`) accepted for a graph.
pub const MAX_JOINT_DIM: usize = 4096;
const TP_TOL: f64 = 1e-9;
const GS_TOL: f64 = 1e-10;

/// `(1 ⊗ E)|Φ⟩` for a `d_out × d_in` operator: component `(i, b)` is `E[b, i]`.
pub fn kraus_vector(e: &CMatrix) -> DVector<C64> {
    let (d_out, d_in) = e.shape();
    DVector::from_fn(d_in * d_out, |k, _| e[(k % d_out, k / d_out)])
}

/// Inverse of [`kraus_vector`].
pub fn kraus_from_vector(v: &DVector<C64>, d_in: usize, d_out: usize) -> CMatrix {
    CMatrix::from_fn(d_out, d_in, |b, a| v[a * d_out + b])
}

/// Hilbert–Schmidt Gram–Schmidt; drops operators dependent on earlier ones.
pub fn orthonormalize(ops: &[CMatrix]) -> Vec<CMatrix> {
    let scale = ops.iter().map(|e| e.norm()).fold(0.0_f64, f64::max);
    let mut basis: Vec<CMatrix> = Vec::new();
    for e in ops {
        let mut v = e.clone();
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dotc(&v);
                v -= b * overlap;
            }
        }
        let n = v.norm();
        if n > GS_TOL * scale.max(1e-300) {
            basis.push(v / real(n));
        }
    }
    basis
}

/// A completely positive map given by Kraus operators, with its Choi matrix.
#[derive(Clone, Debug)]
pub struct Channel {
    pub d_in: usize,
    pub d_out: usize,
    pub kraus: Vec<CMatrix>,
    /// `Σ_ij |i⟩⟨j| ⊗ N(|i⟩⟨j|)` on `A ⊗ B`.
    pub choi: HermitianMatrix,
    pub trace_preserving: bool,
}

impl Channel {
    pub fn from_kraus(kraus: Vec<CMatrix>, d_in: usize, d_out: usize) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::spec("empty Kraus list"));
        }
        for (k, e) in kraus.iter().enumerate() {
            if e.shape() != (d_out, d_in) {
                return Err(Error::dim(format!(
                    "Kraus operator {k} is {}x{}, expected {d_out}x{d_in}",
                    e.nrows(),
                    e.ncols()
                )));
            }
        }
        let n = d_in * d_out;
        let mut j = CMatrix::zeros(n, n);
        let mut tp = CMatrix::zeros(d_in, d_in);
        for e in &kraus {
            let v = kraus_vector(e);
            j += &v * v.adjoint();
            tp += e.adjoint() * e;
        }
        let deviation = (tp - identity(d_in)).norm();
        let trace_preserving = deviation <= TP_TOL;
        if !trace_preserving {
            log::warn!("Kraus operators are not trace preserving (deviation {deviation:.3e})");
        }
        let choi = HermitianMatrix::from_hermitian_unchecked(j, vec![d_in, d_out]);
        Ok(Self { d_in, d_out, kraus, choi, trace_preserving })
    }

    /// Channel with the given Choi matrix on `A ⊗ B`. Kraus operators come from
    /// the eigendecomposition; eigenvalues below `1e-12` are dropped, more
    /// negative ones than `-1e-8` are rejected. The Choi matrix is kept as given.
    pub fn from_choi(choi: &CMatrix, d_in: usize, d_out: usize) -> Result<Self> {
        let n = d_in * d_out;
        if choi.shape() != (n, n) {
            return Err(Error::dim(format!("Choi matrix is {}x{}, expected {n}x{n}", choi.nrows(), choi.ncols())));
        }
        let herm = HermitianMatrix::with_factors((choi + choi.adjoint()) * real(0.5), vec![d_in, d_out])?;
        let spec = herm.spectrum();
        if spec.min() < -1e-8 {
            return Err(Error::NotPsd { eigenvalue: spec.min() });
        }
        let mut kraus: Vec<CMatrix> = (0..n)
            .filter(|&k| spec.values[k] > 1e-12)
            .map(|k| kraus_from_vector(&(spec.vectors.column(k) * real(spec.values[k].sqrt())), d_in, d_out))
            .collect();
        if kraus.is_empty() {
            kraus.push(CMatrix::zeros(d_out, d_in));
        }
        let marg = herm.partial_trace(&[0])?;
        let trace_preserving = (marg.matrix() - identity(d_in)).norm() <= TP_TOL.max(1e-8);
        Ok(Self { d_in, d_out, kraus, choi: herm, trace_preserving })
    }

    pub fn identity(d: usize) -> Self {
        Self::from_kraus(vec![identity(d)], d, d).expect("identity channel")
    }

    /// Qubit amplitude damping: `E0 = diag(1, √(1−r))`, `E1 = √r |0⟩⟨1|`.
    pub fn amplitude_damping(r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::spec(format!("damping parameter {r} outside [0, 1]")));
        }
        let mut e0 = CMatrix::zeros(2, 2);
        e0[(0, 0)] = real(1.0);
        e0[(1, 1)] = real((1.0 - r).sqrt());
        let mut e1 = CMatrix::zeros(2, 2);
        e1[(0, 1)] = real(r.sqrt());
        let kraus = if r == 0.0 { vec![e0] } else { vec![e0, e1] };
        Self::from_kraus(kraus, 2, 2)
    }

    /// Classical channel with `p[x][y] = p(y|x)`, Kraus `√p(y|x) |y⟩⟨x|`.
    pub fn classical(p: &[Vec<f64>]) -> Result<Self> {
        let (nx, ny) = check_transition(p)?;
        let mut kraus = Vec::new();
        for (x, row) in p.iter().enumerate() {
            for (y, &q) in row.iter().enumerate() {
                if q > 0.0 {
                    let mut e = CMatrix::zeros(ny, nx);
                    e[(y, x)] = real(q.sqrt());
                    kraus.push(e);
                }
            }
        }
        Self::from_kraus(kraus, nx, ny)
    }

    /// Classical-quantum channel `i ↦ ρ_i` (input dephased).
    pub fn cq(states: &[HermitianMatrix]) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::spec("empty state list"));
        }
        let d = states[0].dim();
        let mut kraus = Vec::new();
        for (i, rho) in states.iter().enumerate() {
            if rho.dim() != d {
                return Err(Error::dim(format!("state {i} has dimension {}, expected {d}", rho.dim())));
            }
            if (rho.trace() - 1.0).abs() > 1e-8 {
                return Err(Error::spec(format!("state {i} has trace {}", rho.trace())));
            }
            let spec = rho.spectrum();
            if spec.min() < -1e-9 {
                return Err(Error::NotPsd { eigenvalue: spec.min() });
            }
            for (k, &lam) in spec.values.iter().enumerate() {
                if lam > 1e-12 {
                    let v = spec.vectors.column(k) * real(lam.sqrt());
                    let mut e = CMatrix::zeros(d, n);
                    e.set_column(i, &v);
                    kraus.push(e);
                }
            }
        }
        Self::from_kraus(kraus, n, d)
    }

    /// Pure-state cq channel `i ↦ |ψ_i⟩⟨ψ_i|` (vectors are normalized).
    pub fn cq_pure(vectors: &[DVector<C64>]) -> Result<Self> {
        let states: Vec<HermitianMatrix> =
            vectors.iter().map(|v| HermitianMatrix::outer(&(v / real(v.norm())))).collect();
        Self::cq(&states)
    }

    /// Two-state cq channel `i ↦ ψ_i`, `ψ_0 = α|0⟩ + β|1⟩`, `ψ_1 = α|0⟩ − β|1⟩`.
    pub fn two_state(alpha: f64) -> Result<Self> {
        Self::cq_pure(&two_state_vectors(alpha)?)
    }

    /// Replacement channel `ρ ↦ tr(ρ) σ`.
    pub fn constant(sigma: &HermitianMatrix, d_in: usize) -> Result<Self> {
        let states = vec![sigma.clone(); 1];
        let d = sigma.dim();
        let base = Self::cq(&states)?;
        let mut kraus = Vec::new();
        for e in &base.kraus {
            for a in 0..d_in {
                let mut f = CMatrix::zeros(d, d_in);
                f.set_column(a, &e.column(0));
                kraus.push(f);
            }
        }
        Self::from_kraus(kraus, d_in, d)
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.d_out, self.d_out);
        for e in &self.kraus {
            out += e * rho * e.adjoint();
        }
        out
    }

    /// Heisenberg picture `N†(σ) = Σ E_k† σ E_k`.
    pub fn adjoint_apply(&self, sigma: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.d_in, self.d_in);
        for e in &self.kraus {
            out += e.adjoint() * sigma * e;
        }
        out
    }

    pub fn tensor(&self, other: &Channel) -> Result<Channel> {
        guard_dim(self.d_in * other.d_in * self.d_out * other.d_out)?;
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for e in &self.kraus {
            for f in &other.kraus {
                kraus.push(kron(e, f));
            }
        }
        Channel::from_kraus(kraus, self.d_in * other.d_in, self.d_out * other.d_out)
    }

    /// The non-commutative graph spanned by the Kraus operators.
    pub fn graph(&self) -> NCGraph {
        NCGraph::from_kraus(&self.kraus, self.d_in, self.d_out).expect("channel Kraus operators are consistent")
    }

    /// Choi-matrix distance `‖J − J'‖_F`.
    pub fn choi_distance(&self, other: &Channel) -> f64 {
        if self.choi.dim() != other.choi.dim() {
            return f64::INFINITY;
        }
        (self.choi.matrix() - other.choi.matrix()).norm()
    }
}

fn check_transition(p: &[Vec<f64>]) -> Result<(usize, usize)> {
    let nx = p.len();
    if nx == 0 {
        return Err(Error::spec("empty transition matrix"));
    }
    let ny = p[0].len();
    if ny == 0 {
        return Err(Error::spec("transition matrix has no outputs"));
    }
    for (x, row) in p.iter().enumerate() {
        if row.len() != ny {
            return Err(Error::dim(format!("transition row {x} has {} entries, expected {ny}", row.len())));
        }
        if row.iter().any(|&q| q < 0.0 || !q.is_finite()) {
            return Err(Error::spec(format!("transition row {x} has a negative or non-finite entry")));
        }
        if row.iter().all(|&q| q == 0.0) {
            return Err(Error::spec(format!("input {x} has no reachable output")));
        }
    }
    Ok((nx, ny))
}

pub fn two_state_vectors(alpha: f64) -> Result<Vec<DVector<C64>>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::spec(format!("two_state alpha {alpha} outside (0, 1]")));
    }
    let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
    Ok(vec![DVector::from_vec(vec![real(alpha), real(beta)]), DVector::from_vec(vec![real(alpha), real(-beta)])])
}

/// Lovász umbrella vectors for the pentagon: `u_k = (sinθ cos φ_k, sinθ sin φ_k, cosθ)`,
/// `φ_k = 2πk/5`, `cos²θ = 1/√5`. Non-adjacent vectors are orthogonal.
pub fn umbrella_vectors() -> Vec<DVector<C64>> {
    let cos2 = 1.0 / 5f64.sqrt();
    let (c, s) = (cos2.sqrt(), (1.0 - cos2).sqrt());
    (0..5)
        .map(|k| {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / 5.0;
            DVector::from_vec(vec![real(s * phi.cos()), real(s * phi.sin()), real(c)])
        })
        .collect()
}

fn guard_dim(d: usize) -> Result<()> {
    if d > MAX_JOINT_DIM {
        Err(Error::TooLarge { dim: d, limit: MAX_JOINT_DIM })
    } else {
        Ok(())
    }
}

/// A non-commutative bipartite graph: the projector `P` onto the
/// Choi–Jamiołkowski support of a Kraus operator space.
#[derive(Clone, Debug)]
pub struct NCGraph {
    pub d_a: usize,
    pub d_b: usize,
    /// Projector on `A ⊗ B` with factors `[d_a, d_b]`.
    pub p: HermitianMatrix,
    /// Output projectors `P_i` when `P = Σ_i |i⟩⟨i| ⊗ P_i`.
    pub cq: Option<Vec<HermitianMatrix>>,
    /// Hilbert–Schmidt orthonormal Kraus basis.
    pub kraus_basis: Vec<CMatrix>,
}

impl NCGraph {
    pub fn from_kraus(kraus: &[CMatrix], d_in: usize, d_out: usize) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::spec("empty Kraus list"));
        }
        guard_dim(d_in * d_out)?;
        for (k, e) in kraus.iter().enumerate() {
            if e.shape() != (d_out, d_in) {
                return Err(Error::dim(format!(
                    "Kraus operator {k} has shape {:?}, expected ({d_out}, {d_in})",
                    e.shape()
                )));
            }
        }
        let basis = orthonormalize(kraus);
        if basis.is_empty() {
            return Err(Error::spec("Kraus operators span the zero space"));
        }
        let n = d_in * d_out;
        let mut p = CMatrix::zeros(n, n);
        for e in &basis {
            let v = kraus_vector(e);
            p += &v * v.adjoint();
        }
        let p = HermitianMatrix::from_hermitian_unchecked(p, vec![d_in, d_out]);
        Ok(Self { d_a: d_in, d_b: d_out, p, cq: None, kraus_basis: basis })
    }

    /// Graph from a projector on `A ⊗ B`; a Kraus basis is read off its eigenvectors.
    pub fn from_projector(p: HermitianMatrix, d_a: usize, d_b: usize) -> Result<Self> {
        if p.dim() != d_a * d_b {
            return Err(Error::dim(format!("projector dim {} != {d_a}·{d_b}", p.dim())));
        }
        let residual = p.projector_residual();
        if residual > 1e-9 {
            return Err(Error::NotProjector { residual });
        }
        let p = p.with_signature(vec![d_a, d_b])?;
        let spec = p.spectrum();
        let basis: Vec<CMatrix> = (0..spec.values.len())
            .filter(|&k| spec.values[k] > 0.5)
            .map(|k| kraus_from_vector(&spec.vectors.column(k).into_owned(), d_a, d_b))
            .collect();
        if basis.is_empty() {
            return Err(Error::spec("zero projector"));
        }
        Ok(Self { d_a, d_b, p, cq: None, kraus_basis: basis })
    }

    /// cq-graph from output projectors `P_i`.
    pub fn from_cq_projectors(projectors: Vec<HermitianMatrix>) -> Result<Self> {
        let n = projectors.len();
        if n == 0 {
            return Err(Error::spec("empty projector list"));
        }
        let d = projectors[0].dim();
        guard_dim(n * d)?;
        let mut basis = Vec::new();
        let mut p = CMatrix::zeros(n * d, n * d);
        for (i, pi) in projectors.iter().enumerate() {
            if pi.dim() != d {
                return Err(Error::dim(format!("projector {i} has dim {}, expected {d}", pi.dim())));
            }
            let residual = pi.projector_residual();
            if residual > 1e-9 {
                return Err(Error::NotProjector { residual });
            }
            if pi.trace() < 0.5 {
                return Err(Error::spec(format!("projector {i} is zero")));
            }
            for a in 0..d {
                for b in 0..d {
                    p[(i * d + a, i * d + b)] = pi.entry(a, b);
                }
            }
            let spec = pi.spectrum();
            for k in 0..d {
                if spec.values[k] > 0.5 {
                    let mut e = CMatrix::zeros(d, n);
                    e.set_column(i, &spec.vectors.column(k));
                    basis.push(e);
                }
            }
        }
        let p = HermitianMatrix::from_hermitian_unchecked(p, vec![n, d]);
        let cq = projectors.into_iter().map(|q| q.with_signature(vec![d]).expect("dim")).collect();
        Ok(Self { d_a: n, d_b: d, p, cq: Some(cq), kraus_basis: basis })
    }

    /// cq-graph of the supports of states `ρ_i`.
    pub fn from_cq_states(states: &[HermitianMatrix]) -> Result<Self> {
        let projectors = states.iter().map(|s| s.support_projector(None)).collect::<Result<Vec<_>>>()?;
        Self::from_cq_projectors(projectors)
    }

    pub fn from_cq_vectors(vectors: &[DVector<C64>]) -> Result<Self> {
        let projectors = vectors
            .iter()
            .map(|v| {
                let n = v.norm();
                if n == 0.0 {
                    return Err(Error::spec("zero state vector"));
                }
                Ok(HermitianMatrix::outer(&(v / real(n))))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_cq_projectors(projectors)
    }

    /// Bipartite graph of a classical channel: `P_x = Σ_{y: p(y|x)>0} |y⟩⟨y|`.
    pub fn from_classical(p: &[Vec<f64>]) -> Result<Self> {
        let (_, ny) = check_transition(p)?;
        let projectors = p
            .iter()
            .map(|row| {
                HermitianMatrix::from_diagonal(
                    &row.iter().map(|&q| if q > 0.0 { 1.0 } else { 0.0 }).collect::<Vec<_>>(),
                )
            })
            .collect();
        let _ = ny;
        Self::from_cq_projectors(projectors)
    }

    /// `Δ_ℓ`: the noiseless classical channel on `ℓ` symbols.
    pub fn noiseless_classical(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::spec("noiseless_classical needs l >= 1"));
        }
        let projectors = (0..l)
            .map(|i| {
                let mut d = vec![0.0; l];
                d[i] = 1.0;
                HermitianMatrix::from_diagonal(&d)
            })
            .collect();
        Self::from_cq_projectors(projectors)
    }

    /// `ℂ1` on `ℓ` dimensions: the graph of the noiseless quantum channel.
    pub fn noiseless_quantum(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::spec("noiseless_quantum needs l >= 1"));
        }
        Self::from_kraus(&[identity(l)], l, l)
    }

    pub fn two_state(alpha: f64) -> Result<Self> {
        Self::from_cq_vectors(&two_state_vectors(alpha)?)
    }

    pub fn amplitude_damping(r: f64) -> Result<Self> {
        Ok(Channel::amplitude_damping(r)?.graph())
    }

    /// cq-graph of the pentagon umbrella representation.
    pub fn umbrella_c5() -> Self {
        Self::from_cq_vectors(&umbrella_vectors()).expect("umbrella vectors")
    }

    pub fn is_cq(&self) -> bool {
        self.cq.is_some()
    }

    pub fn joint_dim(&self) -> usize {
        self.d_a * self.d_b
    }

    pub fn rank(&self) -> usize {
        self.kraus_basis.len()
    }

    /// `Q = 1 − P`.
    pub fn complement(&self) -> HermitianMatrix {
        HermitianMatrix::identity(self.joint_dim())
            .with_signature(vec![self.d_a, self.d_b])
            .expect("dims")
            .sub(&self.p)
            .expect("dims")
    }

    /// Graph of `K1 ⊗ K2` on `A1A2 : B1B2`.
    pub fn tensor(&self, other: &NCGraph) -> Result<NCGraph> {
        let d_a = self.d_a * other.d_a;
        let d_b = self.d_b * other.d_b;
        guard_dim(d_a * d_b)?;
        let p = crate::matcore::kron_perm(&[&self.p, &other.p], &[0, 2, 1, 3])?;
        let p = p.with_signature(vec![d_a, d_b])?;
        let mut basis = Vec::with_capacity(self.rank() * other.rank());
        for e in &self.kraus_basis {
            for f in &other.kraus_basis {
                basis.push(kron(e, f));
            }
        }
        let cq = match (&self.cq, &other.cq) {
            (Some(a), Some(b)) => {
                let mut out = Vec::with_capacity(a.len() * b.len());
                for pi in a {
                    for qj in b {
                        let t = pi.kron(qj);
                        let d = t.dim();
                        out.push(t.with_signature(vec![d])?);
                    }
                }
                Some(out)
            }
            _ => None,
        };
        Ok(NCGraph { d_a, d_b, p, cq, kraus_basis: basis })
    }

    /// `K^{⊗n}`.
    pub fn power(&self, n: usize) -> Result<NCGraph> {
        if n == 0 {
            return Err(Error::spec("power needs n >= 1"));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.tensor(self)?;
        }
        Ok(acc)
    }

    /// A channel whose Kraus space is this graph: `ρ ↦ Σ E_k ρ E_k†` normalized
    /// by `(Σ E_k†E_k)^{-1/2}` when that is invertible.
    pub fn some_channel(&self) -> Result<Channel> {
        let mut s = CMatrix::zeros(self.d_a, self.d_a);
        for e in &self.kraus_basis {
            s += e.adjoint() * e;
        }
        let h = HermitianMatrix::new(s)?;
        let spec = h.spectrum();
        if spec.min() <= 1e-10 * spec.max() {
            return Err(Error::spec("Kraus basis has a common kernel; no trace-preserving representative"));
        }
        let inv_sqrt = spec.reconstruct_with(|l| 1.0 / l.sqrt());
        let kraus = self.kraus_basis.iter().map(|e| e * &inv_sqrt).collect();
        Channel::from_kraus(kraus, self.d_a, self.d_b)
    }

    /// Partial trace `tr_A P` on `B`.
    pub fn output_marginal(&self) -> HermitianMatrix {
        self.p.partial_trace(&[1]).expect("two factors")
    }
}

/// A simple undirected graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub n: usize,
    pub edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::spec(format!("self-loop at vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::spec(format!("edge ({a}, {b}) outside 0..{n}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self { n, edges: set })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, edges: BTreeSet::new() }
    }

    pub fn complete(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)))).expect("valid")
    }

    pub fn cycle(n: usize) -> Self {
        Self::new(n, (0..n).map(|a| (a, (a + 1) % n))).expect("valid")
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Strong product: `(a,b) ~ (a',b')` iff each coordinate is equal or adjacent, and not both equal.
    pub fn strong_product(&self, other: &Graph) -> Graph {
        let n = self.n * other.n;
        let close = |g: &Graph, x: usize, y: usize| x == y || g.has_edge(x, y);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                let (a, b) = (u / other.n, u % other.n);
                let (c, d) = (v / other.n, v % other.n);
                if close(self, a, c) && close(other, b, d) {
                    edges.push((u, v));
                }
            }
        }
        Graph::new(n, edges).expect("valid")
    }
}

/// Confusability graph of a cq-graph: `{i, j}` is an edge iff `‖P_i P_j‖ > 1e-9`.
pub fn confusability_graph(k: &NCGraph) -> Result<Graph> {
    let cq = k.cq.as_ref().ok_or_else(|| Error::Missing("cq decomposition".into()))?;
    let mut edges = Vec::new();
    for i in 0..cq.len() {
        for j in i + 1..cq.len() {
            if operator_norm(&(cq[i].matrix() * cq[j].matrix())) > 1e-9 {
                edges.push((i, j));
            }
        }
    }
    Graph::new(cq.len(), edges)
}

/// Outcome of [`validate_kraus_space`].
#[derive(Clone, Debug)]
pub struct KrausValidity {
    pub valid: bool,
    /// Optimal margin `t*` in `max t s.t. R ⪰ t·1, Σ R_kl E_k†E_l = 1`.
    pub margin: f64,
    /// `R` in the orthonormal Kraus basis (present when the equality is solvable).
    pub witness: Option<CMatrix>,
    /// Dual certificate `Y` (min tr Y s.t. [tr(Y E_k†E_l)] ⪰ 0, tr(Y Σ E_k†E_k) = 1)
    /// whose value is below the margin threshold when the space is invalid.
    pub certificate: Option<CMatrix>,
    pub status: SolveStatus,
}

/// Threshold on the margin above which a Kraus space is declared valid.
pub const KRAUS_MARGIN: f64 = 1e-6;

/// Decides whether the span of `kraus` is the Kraus space of some CPTP map,
/// i.e. whether a positive definite `R` with `Σ R_kl E_k†E_l = 1` exists.
pub fn validate_kraus_space(kraus: &[CMatrix], opts: &SolveOptions) -> Result<KrausValidity> {
    let first = kraus.first().ok_or_else(|| Error::spec("empty Kraus list"))?;
    let (d_out, d_in) = first.shape();
    let basis = NCGraph::from_kraus(kraus, d_in, d_out)?.kraus_basis;
    let n = basis.len();
    let gram = |k: usize, l: usize| basis[k].adjoint() * &basis[l];
    let mut total = CMatrix::zeros(d_in, d_in);
    for e in &basis {
        total += e.adjoint() * e;
    }

    let mut m = Model::new(Sense::Maximize);
    let rp = m.psd("R-t1", n);
    let t = m.free("t", 1);
    m.add_objective(&t.scalar(0));
    let mut e = HExpr::zeros(d_in);
    e.add_map(1.0, &rp, |unit| {
        let mut acc = CMatrix::zeros(d_in, d_in);
        for k in 0..n {
            for l in 0..n {
                let c = unit[(k, l)];
                if c != C64::new(0.0, 0.0) {
                    acc += gram(k, l) * c;
                }
            }
        }
        acc
    });
    e.add_scaled_matrix(&t.scalar(0), &total);
    m.equal(&e, &identity(d_in));
    let sol = sdp::solve(&m.build(), opts)?;

    // independent dual
    let mut dm = Model::new(Sense::Minimize);
    let y = dm.free_hermitian("Y", d_in);
    dm.add_objective(&y.trace());
    let mut ge = HExpr::zeros(n);
    ge.add_map(1.0, &y, |ym| {
        CMatrix::from_fn(n, n, |k, l| {
            // entry (k, l) of the Gram operator is tr(Y E_l†E_k) so that it is the adjoint map
            (ym * gram(l, k)).trace()
        })
    });
    dm.psd_ge("G", &ge, &CMatrix::zeros(n, n));
    let mut tr_terms = Vec::new();
    for a in 0..d_in {
        for b in 0..d_in {
            let w = total[(b, a)];
            if w.norm() > 0.0 {
                tr_terms.extend(crate::sdp::scale_terms(&y.entry(a, b), w));
            }
        }
    }
    dm.equal_scalar(&tr_terms, 1.0);
    let dsol = sdp::solve(&dm.build(), opts)?;

    let status = sol.status;
    match status {
        SolveStatus::Optimal => {
            let margin = sol.primal_value;
            let tval = sdp::vector_of(&sol, &t)[0];
            let mut r = sdp::value_of(&sol, &rp);
            for k in 0..n {
                r[(k, k)] += c64(tval, 0.0);
            }
            let valid = margin >= KRAUS_MARGIN;
            let certificate = (!valid && dsol.is_optimal()).then(|| sdp::value_of(&dsol, &y));
            Ok(KrausValidity { valid, margin, witness: Some(r), certificate, status })
        }
        SolveStatus::Infeasible => {
            Ok(KrausValidity { valid: false, margin: f64::NEG_INFINITY, witness: None, certificate: None, status })
        }
        other => Err(Error::Solver { what: "Kraus space validity".into(), status: other }),
    }
}

#[cfg(test)]
mod tests;
