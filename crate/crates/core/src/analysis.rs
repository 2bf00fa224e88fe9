//! Deviation norms, quotient minimality and the Weyl eigenvalue bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::partition::{a_adjoint_times_w, a_times_w, ensure_square, Side, WeightedIndicator};
use crate::triangularize::{DeviationMatrix, TriangularizationResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Frobenius,
    Spectral,
    Nuclear,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::Frobenius, NormKind::Spectral, NormKind::Nuclear];
}

/// Schatten norm of `m` selected by `kind`, computed from singular values.
pub fn matrix_norm(m: &CMatrix, kind: NormKind) -> f64 {
    let s = linalg::singular_values(m);
    match kind {
        NormKind::Frobenius => s.iter().map(|x| x * x).sum::<f64>().sqrt(),
        NormKind::Spectral => s.first().copied().unwrap_or(0.0),
        NormKind::Nuclear => s.iter().sum(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationReport {
    pub frobenius: f64,
    pub spectral: f64,
    pub nuclear: f64,
    /// Columns of the assembled deviation matrix with norm above
    /// `1e-13·‖T‖_F`. An upper bound on its rank.
    pub nonzero_columns: usize,
    /// `‖t_ij‖` on the k×k grid.
    #[serde(rename = "per_block")]
    pub per_block_norms: Vec<Vec<f64>>,
}

pub fn deviation_report(t: &DeviationMatrix) -> DeviationReport {
    let m = &t.assembled;
    let s = linalg::singular_values(m);
    let frobenius = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = 1e-13 * m.norm();
    let nonzero_columns = m.column_iter().filter(|c| c.norm() > threshold).count();
    DeviationReport {
        frobenius,
        spectral: s.first().copied().unwrap_or(0.0),
        nuclear: s.iter().sum(),
        nonzero_columns,
        per_block_norms: t.blocks.iter().map(|row| row.iter().map(|b| b.norm()).collect()).collect(),
    }
}

/// `‖T_Θ‖` with `T⁻_Θ = (AW − WΘ)N⁻¹` on the front side and
/// `T⁺_Θ = (A′W − WΘ′)N⁻¹` on the rear side, `N = (W′W)^{1/2}`.
///
/// `Θ = E⁻` (front) or `Θ = E⁺` (rear) recovers the deviation matrix, which
/// minimizes the residual over all `Θ`.
pub fn theta_residual(a: &CMatrix, wi: &WeightedIndicator, theta: &CMatrix, side: Side, norm: NormKind) -> Result<f64> {
    let p = wi.partition();
    ensure_square(a, p.n())?;
    wi.ensure_admissible()?;
    let k = p.k();
    if theta.shape() != (k, k) {
        return Err(Error::DimensionMismatch(format!(
            "Θ is {}x{}, expected {k}x{k}",
            theta.nrows(),
            theta.ncols()
        )));
    }
    let norms = wi.block_norms();
    let labels = p.labels();
    let w = wi.weights();
    let t = match side {
        Side::Front => {
            let aw = a_times_w(a, wi);
            CMatrix::from_fn(p.n(), k, |u, j| (aw[(u, j)] - w[u] * theta[(labels[u], j)]) / norms[j])
        }
        Side::Rear => {
            let ahw = a_adjoint_times_w(a, wi);
            CMatrix::from_fn(p.n(), k, |v, i| (ahw[(v, i)] - w[v] * theta[(i, labels[v])].conj()) / norms[i])
        }
    };
    Ok(matrix_norm(&t, norm))
}

/// Outcome of comparing `σ(A)` with `σ(E) ∪ σ(F)` for Hermitian `A`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationCheck {
    /// `μ`: sorted eigenvalues of `diag(E, F)`.
    pub joint_spectrum: Vec<f64>,
    /// `λ`: sorted eigenvalues of `A`.
    pub reference: Vec<f64>,
    /// `τ_spec = ‖D⁻‖₂`.
    pub tau_spec: f64,
    pub max_gap: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Checks `|μ_i − λ_i| ≤ τ_spec` with slack `1e-10·‖A‖_F`.
///
/// Dropping the off-diagonal blocks of `Â` is a Hermitian perturbation of
/// spectral norm `‖D⁻‖₂`, so the bound follows from Weyl's inequalities.
pub fn weyl_check(a: &CMatrix, r: &TriangularizationResult) -> Result<PerturbationCheck> {
    if !a.is_square() || a.nrows() != r.n() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix against a triangularization of size {}",
            a.nrows(),
            a.ncols(),
            r.n()
        )));
    }
    let defect = linalg::hermitian_defect(a);
    if defect > 1e-12 * a.norm() {
        return Err(Error::NotHermitian(defect));
    }
    let reference = linalg::hermitian_eigenvalues(a);
    let mut joint_spectrum = linalg::hermitian_eigenvalues(&r.e);
    joint_spectrum.extend(linalg::hermitian_eigenvalues(&r.f));
    joint_spectrum.sort_by(f64::total_cmp);
    let tau_spec = linalg::spectral_norm(&r.d_minus);
    let max_gap = linalg::sorted_gap(&joint_spectrum, &reference);
    let slack = 1e-10 * a.norm();
    Ok(PerturbationCheck { joint_spectrum, reference, tau_spec, max_gap, slack, holds: max_gap <= tau_spec + slack })
}
