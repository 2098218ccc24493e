//! Zero-error quantities of non-commutative bipartite graphs and channels.
//!
//! Every SDP-valued quantity is computed by solving a primal and a dual
//! program independently; the gap between the two optimal values is part of
//! the result.

mod closed;
mod lovasz;
mod packing;
mod sigma;
mod upsilon;

pub use closed::{
    binary_entropy, cmin_e_amplitude_damping, cmin_e_two_state, f_max, feasibility, superdense_bound, two_state_report,
    AnsatzCheck, Feasibility, FeasibilityCertificate, SuperdenseBound, TwoStateReport, ANSATZ_TOL, MAX_ANSATZ_COPIES,
};
pub use lovasz::{lovasz_theta, theta_with_representation, ThetaCrosscheck};
pub use packing::{aram, aram_cq, aram_full, aram_hat, aram_tilde, eta, fractional_packing, support_indicator};
pub use sigma::{sigma_channel, sigma_graph, sigma_graph_cq, sigma_graph_full};
pub use upsilon::{upsilon, upsilon_cq, upsilon_full, upsilon_primal_model, UpsilonModel};

use crate::matcore::CMatrix;
use crate::sdp::{self, integer_tag, SdpProblem, SdpSolution, SolveOptions, SolveStatus};
use crate::{Error, Result};

/// Relative tolerance on `|primal − dual|` between the two independent solves.
pub const CROSSCHECK_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    Floor,
    Ceil,
}

/// Integer part of `v`, snapping to an integer within `1e-6` first.
pub fn integer_part(v: f64, rounding: Rounding) -> i64 {
    if let Some(k) = integer_tag(v) {
        return k;
    }
    match rounding {
        Rounding::Floor => v.floor() as i64,
        Rounding::Ceil => v.ceil() as i64,
    }
}

/// A labelled Hermitian witness matrix (vectors are stored as diagonal matrices).
#[derive(Clone, Debug)]
pub struct Witness {
    pub label: String,
    pub matrix: CMatrix,
}

impl Witness {
    pub fn new(label: &str, matrix: CMatrix) -> Self {
        Self { label: label.to_string(), matrix }
    }
}

#[derive(Clone, Debug)]
pub struct QuantityResult {
    pub name: String,
    pub value: f64,
    pub integer_part: i64,
    /// Optimal value of the primal program.
    pub primal_value: f64,
    /// Optimal value of the independently solved dual program.
    pub dual_value: f64,
    pub crosscheck_gap: f64,
    pub status: SolveStatus,
    pub primal_witnesses: Vec<Witness>,
    pub dual_witnesses: Vec<Witness>,
    pub iterations: usize,
    pub notes: Vec<String>,
}

impl QuantityResult {
    pub fn ok(&self) -> bool {
        self.status == SolveStatus::Optimal && self.crosscheck_gap <= CROSSCHECK_TOL * (1.0 + self.value.abs())
    }

    pub fn bits(&self) -> f64 {
        self.value.log2()
    }

    /// First witness with the given label, primal side first.
    pub fn witness(&self, label: &str) -> Option<&CMatrix> {
        self.primal_witnesses.iter().chain(&self.dual_witnesses).find(|w| w.label == label).map(|w| &w.matrix)
    }

    /// Errors unless [`QuantityResult::ok`].
    pub fn require(self) -> Result<Self> {
        if self.ok() {
            Ok(self)
        } else {
            let status = if self.status == SolveStatus::Optimal { SolveStatus::Numerical } else { self.status };
            Err(Error::Solver { what: self.name, status })
        }
    }

    /// Result for a quantity that is exact (no solver involved).
    pub fn exact(name: &str, value: f64, rounding: Rounding) -> Self {
        Self {
            name: name.to_string(),
            value,
            integer_part: integer_part(value, rounding),
            primal_value: value,
            dual_value: value,
            crosscheck_gap: 0.0,
            status: SolveStatus::Optimal,
            primal_witnesses: Vec::new(),
            dual_witnesses: Vec::new(),
            iterations: 0,
            notes: Vec::new(),
        }
    }
}

/// Combines the two independent solves into one result.
/// Tightening factors tried when the two independent solves disagree.
const REFINE_FACTORS: [f64; 2] = [10.0, 100.0];

/// Solves a primal and a dual program. When both are optimal but their values
/// differ by more than a tenth of [`CROSSCHECK_TOL`], both are re-solved with
/// tighter tolerances and the first agreeing pair is kept.
pub(crate) fn solve_pair(
    primal: &SdpProblem,
    dual: &SdpProblem,
    opts: &SolveOptions,
) -> Result<(SdpSolution, SdpSolution)> {
    let p = sdp::solve(primal, opts)?;
    let d = sdp::solve(dual, opts)?;
    let agree = |p: &SdpSolution, d: &SdpSolution| (p.value() - d.value()).abs() <= 0.1 * CROSSCHECK_TOL;
    if !(p.is_optimal() && d.is_optimal()) || agree(&p, &d) {
        return Ok((p, d));
    }
    for f in REFINE_FACTORS {
        let tight = SolveOptions { gap_tol: opts.gap_tol / f, feas_tol: opts.feas_tol / f, ..*opts };
        let (p2, d2) = (sdp::solve(primal, &tight)?, sdp::solve(dual, &tight)?);
        if p2.is_optimal() && d2.is_optimal() && agree(&p2, &d2) {
            log::debug!("cross-check agreed after tightening tolerances by {f}");
            return Ok((p2, d2));
        }
    }
    Ok((p, d))
}

pub(crate) fn assemble(
    name: &str,
    rounding: Rounding,
    primal: &SdpSolution,
    dual: &SdpSolution,
    primal_witnesses: Vec<Witness>,
    dual_witnesses: Vec<Witness>,
) -> QuantityResult {
    let (pv, dv) = (primal.value(), dual.value());
    let mut notes = Vec::new();
    let (status, value) = match (primal.status, dual.status) {
        (SolveStatus::Optimal, SolveStatus::Optimal) => (SolveStatus::Optimal, 0.5 * (pv + dv)),
        (SolveStatus::Optimal, s) => {
            notes.push(format!("dual program ended with status {s}"));
            (s, pv)
        }
        (s, SolveStatus::Optimal) => {
            notes.push(format!("primal program ended with status {s}"));
            (s, dv)
        }
        (s, t) => {
            notes.push(format!("primal status {s}, dual status {t}"));
            (s, f64::NAN)
        }
    };
    let gap = (pv - dv).abs();
    let mut status = status;
    if status == SolveStatus::Optimal && gap > CROSSCHECK_TOL * (1.0 + value.abs()) {
        notes.push(format!("primal {pv} and dual {dv} differ by {gap:.3e}"));
        status = SolveStatus::Numerical;
    }
    QuantityResult {
        name: name.to_string(),
        value,
        integer_part: if value.is_finite() { integer_part(value, rounding) } else { 0 },
        primal_value: pv,
        dual_value: dv,
        crosscheck_gap: gap,
        status,
        primal_witnesses,
        dual_witnesses,
        iterations: primal.iterations + dual.iterations,
        notes,
    }
}

/// Diagonal matrix from a real vector.
pub(crate) fn diag(v: &[f64]) -> CMatrix {
    let mut m = CMatrix::zeros(v.len(), v.len());
    for (k, &x) in v.iter().enumerate() {
        m[(k, k)] = crate::matcore::real(x);
    }
    m
}
