//! JSON description of channels and graphs.
//!
//! Complex entries are `[re, im]` pairs (a bare number is read as a real
//! entry) and matrices are row-major nested arrays.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{confusability_graph, Channel, Graph, NCGraph};
use crate::error::{Error, Result};
use crate::matcore::{CMatrix, HermitianMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CEntry {
    Pair([f64; 2]),
    Real(f64),
}

impl CEntry {
    pub fn value(self) -> C64 {
        match self {
            CEntry::Pair([re, im]) => C64::new(re, im),
            CEntry::Real(re) => C64::new(re, 0.0),
        }
    }

    pub fn from_value(z: C64) -> Self {
        CEntry::Pair([z.re, z.im])
    }
}

pub type JsonMatrix = Vec<Vec<CEntry>>;

pub fn matrix_from_json(m: &JsonMatrix) -> Result<CMatrix> {
    let rows = m.len();
    if rows == 0 {
        return Err(Error::spec("empty matrix"));
    }
    let cols = m[0].len();
    if cols == 0 || m.iter().any(|r| r.len() != cols) {
        return Err(Error::spec("ragged or empty matrix rows"));
    }
    Ok(CMatrix::from_fn(rows, cols, |r, c| m[r][c].value()))
}

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| CEntry::from_value(m[(r, c)])).collect()).collect()
}

fn vector_from_json(v: &[CEntry]) -> Result<DVector<C64>> {
    if v.is_empty() {
        return Err(Error::spec("empty vector"));
    }
    Ok(DVector::from_iterator(v.len(), v.iter().map(|e| e.value())))
}

/// A channel or graph description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GraphSpec {
    /// Kraus operators (`d_out × d_in` each).
    Kraus {
        kraus: Vec<JsonMatrix>,
    },
    /// Classical-quantum graph or channel. Exactly one payload is given:
    /// output projectors, density matrices, or pure state vectors.
    Cq {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        projectors: Option<Vec<JsonMatrix>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        states: Option<Vec<JsonMatrix>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vectors: Option<Vec<Vec<CEntry>>>,
    },
    /// Transition matrix, `matrix[x][y] = p(y|x)`.
    Classical {
        matrix: Vec<Vec<f64>>,
    },
    /// Simple graph, optionally with an orthogonal representation (one vector per vertex).
    Graph {
        n: usize,
        edges: Vec<[usize; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        representation: Option<Vec<Vec<CEntry>>>,
    },
    /// `ψ_0 = α|0⟩ + β|1⟩`, `ψ_1 = α|0⟩ − β|1⟩`; give `alpha` or `alpha_sq`.
    TwoState {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha_sq: Option<f64>,
    },
    AmplitudeDamping {
        r: f64,
    },
    NoiselessClassical {
        l: usize,
    },
    NoiselessQuantum {
        l: usize,
    },
    /// Tensor product of the factors, then optionally raised to `power`.
    Tensor {
        factors: Vec<GraphSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        power: Option<usize>,
    },
}

impl GraphSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::spec(format!("JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    fn alpha(alpha: Option<f64>, alpha_sq: Option<f64>) -> Result<f64> {
        match (alpha, alpha_sq) {
            (Some(a), None) => Ok(a),
            (None, Some(a2)) if a2 >= 0.0 => Ok(a2.sqrt()),
            (None, Some(a2)) => Err(Error::spec(format!("alpha_sq {a2} is negative"))),
            _ => Err(Error::spec("two_state needs exactly one of alpha, alpha_sq")),
        }
    }

    fn cq_payload(
        projectors: &Option<Vec<JsonMatrix>>,
        states: &Option<Vec<JsonMatrix>>,
        vectors: &Option<Vec<Vec<CEntry>>>,
    ) -> Result<CqPayload> {
        match (projectors, states, vectors) {
            (Some(p), None, None) => Ok(CqPayload::Projectors(
                p.iter().map(|m| HermitianMatrix::new(matrix_from_json(m)?)).collect::<Result<Vec<_>>>()?,
            )),
            (None, Some(s), None) => Ok(CqPayload::States(
                s.iter().map(|m| HermitianMatrix::new(matrix_from_json(m)?)).collect::<Result<Vec<_>>>()?,
            )),
            (None, None, Some(v)) => {
                Ok(CqPayload::Vectors(v.iter().map(|x| vector_from_json(x)).collect::<Result<Vec<_>>>()?))
            }
            _ => Err(Error::spec("cq needs exactly one of projectors, states, vectors")),
        }
    }

    /// The non-commutative graph described by the spec.
    pub fn to_graph(&self) -> Result<NCGraph> {
        match self {
            GraphSpec::Kraus { kraus } => {
                let ops = kraus.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
                let first = ops.first().ok_or_else(|| Error::spec("empty Kraus list"))?;
                let (d_out, d_in) = first.shape();
                NCGraph::from_kraus(&ops, d_in, d_out)
            }
            GraphSpec::Cq { projectors, states, vectors } => match Self::cq_payload(projectors, states, vectors)? {
                CqPayload::Projectors(p) => NCGraph::from_cq_projectors(p),
                CqPayload::States(s) => NCGraph::from_cq_states(&s),
                CqPayload::Vectors(v) => NCGraph::from_cq_vectors(&v),
            },
            GraphSpec::Classical { matrix } => NCGraph::from_classical(matrix),
            GraphSpec::Graph { representation, n, .. } => {
                let rep = representation
                    .as_ref()
                    .ok_or_else(|| Error::Missing("graph spec has no orthogonal representation".into()))?;
                if rep.len() != *n {
                    return Err(Error::spec(format!("representation has {} vectors for {n} vertices", rep.len())));
                }
                let vecs = rep.iter().map(|x| vector_from_json(x)).collect::<Result<Vec<_>>>()?;
                let k = NCGraph::from_cq_vectors(&vecs)?;
                let g = self.to_simple_graph()?;
                if confusability_graph(&k)? != g {
                    return Err(Error::spec("representation is not orthogonal on non-adjacent pairs"));
                }
                Ok(k)
            }
            GraphSpec::TwoState { alpha, alpha_sq } => NCGraph::two_state(Self::alpha(*alpha, *alpha_sq)?),
            GraphSpec::AmplitudeDamping { r } => NCGraph::amplitude_damping(*r),
            GraphSpec::NoiselessClassical { l } => NCGraph::noiseless_classical(*l),
            GraphSpec::NoiselessQuantum { l } => NCGraph::noiseless_quantum(*l),
            GraphSpec::Tensor { factors, power } => {
                let mut it = factors.iter();
                let first = it.next().ok_or_else(|| Error::spec("tensor needs at least one factor"))?;
                let mut acc = first.to_graph()?;
                for f in it {
                    acc = acc.tensor(&f.to_graph()?)?;
                }
                acc.power(power.unwrap_or(1))
            }
        }
    }

    /// The channel determined by the spec, when there is one.
    pub fn to_channel(&self) -> Result<Option<Channel>> {
        Ok(match self {
            GraphSpec::Kraus { kraus } => {
                let ops = kraus.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
                let first = ops.first().ok_or_else(|| Error::spec("empty Kraus list"))?;
                let (d_out, d_in) = first.shape();
                Some(Channel::from_kraus(ops, d_in, d_out)?)
            }
            GraphSpec::Cq { projectors, states, vectors } => match Self::cq_payload(projectors, states, vectors)? {
                CqPayload::Projectors(_) => None,
                CqPayload::States(s) => Some(Channel::cq(&s)?),
                CqPayload::Vectors(v) => Some(Channel::cq_pure(&v)?),
            },
            GraphSpec::Classical { matrix } => Some(Channel::classical(matrix)?),
            GraphSpec::Graph { .. } => None,
            GraphSpec::TwoState { alpha, alpha_sq } => Some(Channel::two_state(Self::alpha(*alpha, *alpha_sq)?)?),
            GraphSpec::AmplitudeDamping { r } => Some(Channel::amplitude_damping(*r)?),
            GraphSpec::NoiselessClassical { l } => Some(Channel::classical(
                &(0..*l).map(|i| (0..*l).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect::<Vec<_>>(),
            )?),
            GraphSpec::NoiselessQuantum { l } => Some(Channel::identity(*l)),
            GraphSpec::Tensor { factors, power } => {
                let mut acc: Option<Channel> = None;
                for f in factors {
                    let Some(c) = f.to_channel()? else { return Ok(None) };
                    acc = Some(match acc {
                        None => c,
                        Some(a) => a.tensor(&c)?,
                    });
                }
                let Some(base) = acc else { return Err(Error::spec("tensor needs at least one factor")) };
                let mut out = base.clone();
                for _ in 1..power.unwrap_or(1) {
                    out = out.tensor(&base)?;
                }
                Some(out)
            }
        })
    }

    /// A simple graph: the `graph` type directly, otherwise the confusability graph.
    pub fn to_simple_graph(&self) -> Result<Graph> {
        match self {
            GraphSpec::Graph { n, edges, .. } => Graph::new(*n, edges.iter().map(|e| (e[0], e[1]))),
            other => confusability_graph(&other.to_graph()?),
        }
    }

    /// Transition support of a classical spec (`true` where `p(y|x) > 0`).
    pub fn transition(&self) -> Result<Vec<Vec<f64>>> {
        match self {
            GraphSpec::Classical { matrix } => Ok(matrix.clone()),
            GraphSpec::NoiselessClassical { l } => {
                Ok((0..*l).map(|i| (0..*l).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect())
            }
            _ => Err(Error::spec("a classical transition matrix is required")),
        }
    }
}

enum CqPayload {
    Projectors(Vec<HermitianMatrix>),
    States(Vec<HermitianMatrix>),
    Vectors(Vec<DVector<C64>>),
}
