//! Block-diagonal Hermitian semidefinite programs in standard form.
//!
//! A problem is `min/max Re Σ_b tr(C_b X_b)` subject to real equalities
//! `Re Σ_b tr(A_{k,b} X_b) = b_k`, where every block is a Hermitian PSD matrix,
//! a nonnegative vector (the LP path) or an unconstrained real vector.
//! [`compile`] turns this into a real symmetric problem and [`solve`] runs the
//! embedded homogeneous self-dual interior-point method on it.

mod compile;
mod ipm;
mod model;

pub use compile::{compile, Compiled};
pub use model::{scale_terms, slack_of, value_of, vector_of, Atom, HExpr, MatVar, Model, Terms};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    /// Hermitian positive semidefinite matrix.
    Hermitian,
    /// Nonnegative real vector (a diagonal PSD block).
    Diagonal,
    /// Unconstrained real vector.
    Free,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub label: String,
    pub dim: usize,
    pub kind: BlockKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

/// One nonzero of a Hermitian coefficient matrix: `A[i,j] = value` and, for
/// `i < j`, `A[j,i] = conj(value)`. For vector blocks only `i` is used and the
/// real part of `value` is the coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coef {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: C64,
}

/// A linear functional `Re Σ tr(A_b X_b)` in sparse form, entries with `i ≤ j`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Functional {
    pub coefs: Vec<Coef>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equality {
    pub lhs: Functional,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<Block>,
    pub sense: Sense,
    pub objective: Functional,
    pub equalities: Vec<Equality>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-7, feas_tol: 1e-8, max_iter: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
    Numerical,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::Numerical => "numerical",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

/// Value of one block: a Hermitian matrix or a real vector.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockValue {
    Matrix(CMatrix),
    Vector(Vec<f64>),
}

impl BlockValue {
    pub fn matrix(&self) -> Option<&CMatrix> {
        match self {
            BlockValue::Matrix(m) => Some(m),
            BlockValue::Vector(_) => None,
        }
    }

    pub fn vector(&self) -> Option<&[f64]> {
        match self {
            BlockValue::Vector(v) => Some(v),
            BlockValue::Matrix(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SolveStatus,
    /// Objective of the primal iterate, in the problem's own sense.
    pub primal_value: f64,
    /// Dual objective `b'y` mapped to the problem's own sense.
    pub dual_value: f64,
    /// Primal witnesses, one per block.
    pub x: Vec<BlockValue>,
    /// Dual slack `C − Σ y_k A_k` per block (sign-adjusted for maximization).
    pub s: Vec<BlockValue>,
    /// Multipliers of the original equalities (zero for rows dropped as redundant).
    pub y: Vec<f64>,
    pub residuals: Residuals,
    pub iterations: usize,
}

impl SdpSolution {
    /// Midpoint of the primal and dual objective values.
    pub fn value(&self) -> f64 {
        0.5 * (self.primal_value + self.dual_value)
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn block_matrix(&self, block: usize) -> Option<&CMatrix> {
        self.x.get(block).and_then(BlockValue::matrix)
    }

    /// Errors unless the status is optimal.
    pub fn require_optimal(self, what: &str) -> Result<Self> {
        if self.is_optimal() {
            Ok(self)
        } else {
            Err(Error::Solver { what: what.to_string(), status: self.status })
        }
    }
}

/// Integer within `1e-6` of `v`, if any.
pub fn integer_tag(v: f64) -> Option<i64> {
    let r = v.round();
    if (v - r).abs() <= 1e-6 && r.is_finite() {
        Some(r as i64)
    } else {
        None
    }
}

/// Seam for substituting another conic solver.
pub trait SdpBackend {
    fn name(&self) -> &str;
    fn solve(&self, problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution>;
}

/// The built-in dense interior-point method.
#[derive(Clone, Copy, Debug, Default)]
pub struct NativeBackend;

impl SdpBackend for NativeBackend {
    fn name(&self) -> &str {
        "native-hsd"
    }

    fn solve(&self, problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
        solve(problem, opts)
    }
}

/// Compiles and solves with the built-in method.
pub fn solve(problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
    let compiled = compile(problem)?;
    Ok(ipm::solve_compiled(problem, &compiled, opts))
}

impl SdpProblem {
    /// Checks index ranges of every coefficient.
    pub fn validate(&self) -> Result<()> {
        let check = |f: &Functional, what: &str| -> Result<()> {
            for c in &f.coefs {
                let blk = self
                    .blocks
                    .get(c.block)
                    .ok_or_else(|| Error::dim(format!("{what}: block {} does not exist", c.block)))?;
                if c.i >= blk.dim || c.j >= blk.dim || c.i > c.j {
                    return Err(Error::dim(format!(
                        "{what}: entry ({}, {}) invalid for block '{}' of dim {}",
                        c.i, c.j, blk.label, blk.dim
                    )));
                }
                if blk.kind != BlockKind::Hermitian && c.i != c.j {
                    return Err(Error::dim(format!("{what}: off-diagonal entry in vector block '{}'", blk.label)));
                }
                if !(c.value.re.is_finite() && c.value.im.is_finite()) {
                    return Err(Error::Numerical(format!("{what}: non-finite coefficient")));
                }
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for (k, eq) in self.equalities.iter().enumerate() {
            check(&eq.lhs, &format!("equality {k}"))?;
            if !eq.rhs.is_finite() {
                return Err(Error::Numerical(format!("equality {k}: non-finite rhs")));
            }
        }
        Ok(())
    }

    /// Evaluates a functional at block values.
    pub fn evaluate(&self, f: &Functional, x: &[BlockValue]) -> f64 {
        let mut acc = 0.0;
        for c in &f.coefs {
            match &x[c.block] {
                BlockValue::Matrix(m) => {
                    if c.i == c.j {
                        acc += c.value.re * m[(c.i, c.i)].re;
                    } else {
                        acc += 2.0 * (c.value.conj() * m[(c.i, c.j)]).re;
                    }
                }
                BlockValue::Vector(v) => acc += c.value.re * v[c.i],
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests;
