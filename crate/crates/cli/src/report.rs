//! JSON shapes shared by the commands.

use std::collections::BTreeMap;

use equitile::analysis::DeviationReport;
use equitile::linalg;
use equitile::{CMatrix, C64};
use serde::Serialize;

use crate::inputs::PartitionFile;

/// `[re, im]`.
pub type ComplexJson = [f64; 2];

pub fn complex(z: C64) -> ComplexJson {
    [z.re, z.im]
}

/// Eigenvalues sorted by real then imaginary part.
pub fn spectrum(values: &[C64]) -> Vec<ComplexJson> {
    let mut v = values.to_vec();
    v.sort_by(linalg::cmp_complex);
    v.into_iter().map(complex).collect()
}

/// Row-major nested arrays of `[re, im]`.
pub fn matrix(m: &CMatrix) -> Vec<Vec<ComplexJson>> {
    m.row_iter().map(|row| row.iter().map(|&z| complex(z)).collect()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientJson {
    pub alpha: f64,
    pub entries: Vec<Vec<ComplexJson>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeviationJson {
    pub front: DeviationReport,
    pub rear: DeviationReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitJson {
    #[serde(rename = "eigs_E")]
    pub eigs_e: Vec<ComplexJson>,
    #[serde(rename = "eigs_F")]
    pub eigs_f: Vec<ComplexJson>,
    /// `‖D⁻‖₂`.
    pub tau_spec: f64,
    /// Present only for Hermitian input.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weyl_holds: Option<bool>,
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

/// Report printed by `transform` and `rect`. Everything except `timing` is a
/// function of the inputs and flags.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs: BTreeMap<String, InputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionFile>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub quotients: Vec<QuotientJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<DeviationJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SplitJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
    /// Files written to the output directory.
    pub outputs: Vec<String>,
    pub timing: Timing,
}
