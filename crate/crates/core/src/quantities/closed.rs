use nalgebra::DVector;

use crate::matcore::{hermitian_spectrum, identity, operator_norm, real, CMatrix, HermitianMatrix, C64};
use crate::model::NCGraph;
use crate::{Error, Result};

/// Binary entropy in bits, `H2(0) = H2(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let h = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    h(p) + h(1.0 - p)
}

/// `C_minE` of the two-state cq-graph: `H(α², β²)`.
pub fn cmin_e_two_state(alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::spec(format!("alpha {alpha} outside [0, 1]")));
    }
    Ok(binary_entropy(alpha * alpha))
}

/// `C_minE` of the amplitude damping graph:
/// `max_{p∈[0,1]} H2(p) + H2(rp) − H2((1−r)p)` by golden-section search.
pub fn cmin_e_amplitude_damping(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::spec(format!("damping parameter {r} outside [0, 1]")));
    }
    let f = |p: f64| binary_entropy(p) + binary_entropy(r * p) - binary_entropy((1.0 - r) * p);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-9 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let best = [0.0, 1.0, 0.5 * (a + b)].into_iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuperdenseBound {
    /// `d_A / ‖tr_A P‖_∞`.
    pub value: f64,
    /// `log2(value)` when the value exceeds 1.
    pub bits: Option<f64>,
}

/// Lower bound on `A(K)` from super-dense coding.
pub fn superdense_bound(k: &NCGraph) -> SuperdenseBound {
    let norm = k.output_marginal().op_norm();
    let value = k.d_a as f64 / norm;
    SuperdenseBound { value, bits: (value > 1.0 + 1e-12).then(|| value.log2()) }
}

/// Maximal fidelity `‖P0 P1‖_∞` between the supports of two projectors.
pub fn f_max(p0: &HermitianMatrix, p1: &HermitianMatrix) -> Result<f64> {
    if p0.dim() != p1.dim() {
        return Err(Error::dim(format!("projectors of dims {} and {}", p0.dim(), p1.dim())));
    }
    for p in [p0, p1] {
        let residual = p.projector_residual();
        if residual > 1e-9 {
            return Err(Error::NotProjector { residual });
        }
    }
    Ok(operator_norm(&(p0.matrix() * p1.matrix())))
}

#[derive(Clone, Debug)]
pub enum FeasibilityCertificate {
    /// A unit vector in every output support (zero capacity).
    CommonSupport(DVector<C64>),
    /// `λ_min(tr_A(1 − P))` of the general test.
    EigenvalueGap(f64),
}

#[derive(Clone, Debug)]
pub struct Feasibility {
    pub positive_capacity: bool,
    /// `λ_min(tr_A(1 − P))`.
    pub min_eigenvalue: f64,
    /// Dimension of the common support of the `P_i` (cq-graphs only).
    pub common_support_dim: Option<usize>,
    pub certificate: FeasibilityCertificate,
    /// Whether the cq and general tests agree (always true for non-cq graphs).
    pub paths_agree: bool,
}

const FEAS_TOL: f64 = 1e-9;

/// Whether assisted zero-error communication is possible at all.
pub fn feasibility(k: &NCGraph) -> Feasibility {
    let q = k.complement().partial_trace(&[1]).expect("two factors");
    let min_eigenvalue = q.min_eigenvalue();
    let general = min_eigenvalue > FEAS_TOL;

    let Some(ps) = &k.cq else {
        return Feasibility {
            positive_capacity: general,
            min_eigenvalue,
            common_support_dim: None,
            certificate: FeasibilityCertificate::EigenvalueGap(min_eigenvalue),
            paths_agree: true,
        };
    };
    let d = k.d_b;
    let mut avg = CMatrix::zeros(d, d);
    for p in ps {
        avg += p.matrix();
    }
    avg /= real(ps.len() as f64);
    let spec = hermitian_spectrum(&avg);
    let common: Vec<usize> = (0..d).filter(|&i| spec.values[i] > 1.0 - FEAS_TOL).collect();
    let cq_positive = common.is_empty();
    let certificate = match common.first() {
        Some(&i) => FeasibilityCertificate::CommonSupport(spec.vectors.column(i).into_owned()),
        None => FeasibilityCertificate::EigenvalueGap(min_eigenvalue),
    };
    Feasibility {
        positive_capacity: cq_positive,
        min_eigenvalue,
        common_support_dim: Some(common.len()),
        certificate,
        paths_agree: cq_positive == general,
    }
}

/// Largest `n` for which [`two_state_report`] materializes the ansatz.
pub const MAX_ANSATZ_COPIES: usize = 8;
/// Tolerance of the numerical ansatz verification.
pub const ANSATZ_TOL: f64 = 1e-8;

/// Numerical check of the `n`-copy ansatz `R_{0^n}`.
#[derive(Clone, Debug)]
pub struct AnsatzCheck {
    pub r0: CMatrix,
    /// `λ_min(R_{0^n})`.
    pub positivity: f64,
    /// `λ_min(s(1 − P_{0^n}) − R_{0^n})`.
    pub upper: f64,
    /// `max |Σ Z(sP + R)Z − 1|`.
    pub normalization: f64,
    /// `max |P_{0^n} R_{0^n}|`.
    pub orthogonality: f64,
    pub feasible: bool,
}

/// Closed forms of the two pure-state cq-graph and the `n`-copy ansatz bound.
#[derive(Clone, Debug)]
pub struct TwoStateReport {
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    pub overlap: f64,
    pub upsilon: f64,
    pub aram: f64,
    pub sigma: f64,
    pub cmin_e: f64,
    /// `α^n − β^n`.
    pub condition_lhs: f64,
    /// `√((n−1)/n)`.
    pub condition_rhs: f64,
    pub condition_holds: bool,
    pub s: f64,
    /// `c_w` for `w = 1, …, n−1`.
    pub c: Vec<f64>,
    pub ansatz: Option<AnsatzCheck>,
    /// `(α^{2n} + β^{2n})^{-1}` when the ansatz is feasible.
    pub lower_bound: Option<f64>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Two-state report for `α ∈ (1/√2, 1)` and `n ≥ 1` copies.
pub fn two_state_report(alpha: f64, n: usize) -> Result<TwoStateReport> {
    let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
    if !(alpha - beta > 1e-12 && beta > 1e-12) {
        return Err(Error::spec(format!("two_state_report needs alpha > beta > 0, got alpha = {alpha}")));
    }
    if n == 0 || n > MAX_ANSATZ_COPIES {
        return Err(Error::spec(format!("copies must be in 1..={MAX_ANSATZ_COPIES}, got {n}")));
    }
    let (a2, b2) = (alpha * alpha, beta * beta);
    let ni = n as i32;
    let total = a2.powi(ni) + b2.powi(ni);
    let s = 2f64.powi(-ni) / total;
    let c: Vec<f64> = (1..n)
        .map(|w| {
            let wi = w as i32;
            let cross = a2.powi(wi) * b2.powi(ni - wi) + a2.powi(ni - wi) * b2.powi(wi);
            s * (total - cross) / (1.0 - 1.0 / binomial(n, w))
        })
        .collect();
    let condition_lhs = alpha.powi(ni) - beta.powi(ni);
    let condition_rhs = ((n as f64 - 1.0) / n as f64).sqrt();
    let condition_holds = n == 1 || condition_lhs <= condition_rhs + 1e-12;

    let ansatz = condition_holds.then(|| check_ansatz(alpha, beta, n, s, &c));
    let lower_bound = ansatz.as_ref().filter(|a| a.feasible).map(|_| 1.0 / total);
    Ok(TwoStateReport {
        alpha,
        beta,
        n,
        overlap: a2 - b2,
        upsilon: 1.0,
        aram: 1.0 / a2,
        sigma: 1.0 + 2.0 * alpha * beta,
        cmin_e: binary_entropy(a2),
        condition_lhs,
        condition_rhs,
        condition_holds,
        s,
        c,
        ansatz,
        lower_bound,
    })
}

fn check_ansatz(alpha: f64, beta: f64, n: usize, s: f64, c: &[f64]) -> AnsatzCheck {
    let dim = 1usize << n;
    let psi = DVector::from_vec(vec![real(alpha), real(beta)]);
    let perp = DVector::from_vec(vec![real(beta), real(-alpha)]);
    let mut psi_n = DVector::from_element(1, real(1.0));
    let mut perp_n = DVector::from_element(1, real(1.0));
    for _ in 0..n {
        psi_n = psi_n.kronecker(&psi);
        perp_n = perp_n.kronecker(&perp);
    }
    let p0 = &psi_n * psi_n.adjoint();
    let mut r0 = &perp_n * perp_n.adjoint() * real(s);
    for w in 1..n {
        // Q_w = P_w − |Φ_w⟩⟨Φ_w|
        let members: Vec<usize> = (0..dim).filter(|x| x.count_ones() as usize == w).collect();
        let norm = (members.len() as f64).sqrt();
        let mut phi = DVector::zeros(dim);
        for &x in &members {
            phi[x] = real(1.0 / norm);
        }
        let mut q = -(&phi * phi.adjoint());
        for &x in &members {
            q[(x, x)] += real(1.0);
        }
        r0 += q * real(c[w - 1]);
    }

    let positivity = hermitian_spectrum(&r0).min();
    let upper = hermitian_spectrum(&((identity(dim) - &p0) * real(s) - &r0)).min();
    let base = &p0 * real(s) + &r0;
    // Σ_{i^n} Z^{i^n} M Z^{i^n}: entry (x, y) picks up (−1)^{|(x⊕y)∧i|}
    let mut sum = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for x in 0..dim {
            for y in 0..dim {
                let sign = if ((x ^ y) & i).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                sum[(x, y)] += base[(x, y)] * sign;
            }
        }
    }
    let normalization = (sum - identity(dim)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let orthogonality = (&p0 * &r0).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let feasible =
        positivity >= -ANSATZ_TOL && upper >= -ANSATZ_TOL && normalization <= ANSATZ_TOL && orthogonality <= ANSATZ_TOL;
    AnsatzCheck { r0, positivity, upper, normalization, orthogonality, feasible }
}
