use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use zerocap::model::{matrix_to_json, JsonMatrix};
use zerocap::nosig::NsCorrelation;
use zerocap::quantities::{QuantityResult, Witness, CROSSCHECK_TOL};

pub const CSV_HEADER: &str = "quantity,value,integer_part,bits,gap,status,seconds";

/// One reported quantity. Optional fields are omitted rather than written as
/// non-finite numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub quantity: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integer_part: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<f64>,
    pub gap: f64,
    pub status: String,
    pub seconds: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub residuals: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_file: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn bits(value: f64) -> Option<f64> {
    (value > 0.0).then(|| value.log2()).and_then(finite)
}

impl Row {
    pub fn exact(quantity: &str, value: f64, integer_part: Option<i64>, seconds: f64) -> Self {
        Self {
            quantity: quantity.to_string(),
            value: finite(value).unwrap_or(0.0),
            integer_part,
            bits: bits(value),
            gap: 0.0,
            status: "exact".into(),
            seconds,
            residuals: BTreeMap::new(),
            witness_file: None,
            notes: Vec::new(),
        }
    }

    pub fn from_result(r: &QuantityResult, seconds: f64) -> Self {
        let status = if r.ok() {
            "optimal".to_string()
        } else if r.status.as_str() == "optimal" {
            "crosscheck_failed".to_string()
        } else {
            r.status.as_str().to_string()
        };
        let mut residuals = BTreeMap::new();
        residuals.insert("primal_value".to_string(), r.primal_value);
        residuals.insert("dual_value".to_string(), r.dual_value);
        residuals.insert("crosscheck_tol".to_string(), CROSSCHECK_TOL * (1.0 + r.value.abs()));
        residuals.retain(|_, v| v.is_finite());
        Self {
            quantity: r.name.clone(),
            value: finite(r.value).unwrap_or(0.0),
            integer_part: Some(r.integer_part),
            bits: bits(r.value),
            gap: finite(r.crosscheck_gap).unwrap_or(f64::MAX),
            status,
            seconds,
            residuals,
            witness_file: None,
            notes: r.notes.clone(),
        }
    }

    pub fn failed(&self) -> bool {
        !matches!(self.status.as_str(), "optimal" | "exact" | "passed")
    }

    fn residual(mut self, key: &str, value: f64) -> Self {
        if value.is_finite() {
            self.residuals.insert(key.to_string(), value);
        }
        self
    }

    pub fn with_residuals<'a>(self, items: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        items.into_iter().fold(self, |row, (k, v)| row.residual(k, v))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
    pub rows: Vec<Row>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.3}",
                csv_field(&r.quantity),
                r.value,
                opt(r.integer_part),
                opt(r.bits),
                r.gap,
                r.status,
                r.seconds
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<22} {:>16} {:>8} {:>12} {:>10} {:<18} {:>8}",
            "quantity", "value", "integer", "bits", "gap", "status", "seconds"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<22} {:>16.10} {:>8} {:>12} {:>10.2e} {:<18} {:>8.3}",
                r.quantity,
                r.value,
                opt(r.integer_part),
                r.bits.map(|b| format!("{b:.6}")).unwrap_or_default(),
                r.gap,
                r.status,
                r.seconds
            );
            for (k, v) in &r.residuals {
                let _ = writeln!(out, "    {k} = {v:.6e}");
            }
            for n in &r.notes {
                let _ = writeln!(out, "    note: {n}");
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelledMatrix {
    pub label: String,
    pub matrix: JsonMatrix,
}

impl From<&Witness> for LabelledMatrix {
    fn from(w: &Witness) -> Self {
        Self { label: w.label.clone(), matrix: matrix_to_json(&w.matrix) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantityDump {
    pub quantity: String,
    pub value: f64,
    pub primal: Vec<LabelledMatrix>,
    pub dual: Vec<LabelledMatrix>,
}

impl From<&QuantityResult> for QuantityDump {
    fn from(r: &QuantityResult) -> Self {
        Self {
            quantity: r.name.clone(),
            value: r.value,
            primal: r.primal_witnesses.iter().map(Into::into).collect(),
            dual: r.dual_witnesses.iter().map(Into::into).collect(),
        }
    }
}

/// A no-signalling correlation on `A_i ⊗ A_o ⊗ B_i ⊗ B_o`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationDump {
    pub dims: [usize; 4],
    pub classical_ports: [bool; 4],
    pub trivial: bool,
    pub omega: JsonMatrix,
}

impl From<&NsCorrelation> for CorrelationDump {
    fn from(c: &NsCorrelation) -> Self {
        let (a, b, x, y) = c.dims;
        Self {
            dims: [a, b, x, y],
            classical_ports: c.classical_ports,
            trivial: c.trivial,
            omega: matrix_to_json(c.omega.matrix()),
        }
    }
}

/// Contents of a `--dump-witness` file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WitnessDump {
    pub command: String,
    #[serde(default)]
    pub quantities: Vec<QuantityDump>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<CorrelationDump>,
}
