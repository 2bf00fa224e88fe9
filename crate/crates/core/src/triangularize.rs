//! Generalized quotients, deviation matrices and the unitary block
//! triangularization `Â = Ω′ H̃′ P′ A P H̃ Ω`.
//!
//! `P` is the suitable-indexing permutation of the partition, `H̃ = H(W, V)`
//! the block-diagonal elementary unitary built from the weight blocks and
//! phases, and `Ω` gathers the first coordinate of every cell into the
//! leading `k` positions. The result splits as
//!
//! ```text
//!     Â = | E    D⁺′ |      E  (k×k)    unitarily similar to E⁰
//!         | D⁻   F   |      D± share singular values with T±
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::partition::{
    a_adjoint_times_w, a_times_w, ensure_square, suitable_indexing_permutation, w_adjoint_times, Partition, Side,
    WeightedIndicator,
};
use crate::permutation::Permutation;
use crate::reflector::{beta0, build_reflector, ElementaryUnitary, Phase};

/// Phase selection for the per-cell reflectors.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Phases {
    /// `β_i = β₀(w_i)`.
    #[default]
    Auto,
    /// One phase per cell, in the partition's cell order.
    Explicit(Vec<Phase>),
}

/// `H(W, V) = diag(H(w_1, β_1), …, H(w_k, β_k))` in suitably indexed
/// coordinates.
///
/// `w_i` is the weight block of cell `i` taken in the order the
/// suitable-indexing permutation lays the cell out.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockReflector {
    partition: Partition,
    layout: Permutation,
    offsets: Vec<usize>,
    reflectors: Vec<ElementaryUnitary>,
    phases: Vec<Phase>,
}

pub fn build_block_reflector(wi: &WeightedIndicator, phases: &Phases) -> Result<BlockReflector> {
    wi.ensure_admissible()?;
    let p = wi.partition();
    let k = p.k();
    if let Phases::Explicit(v) = phases {
        if v.len() != k {
            return Err(Error::PhaseCount { expected: k, got: v.len() });
        }
    }
    let layout = suitable_indexing_permutation(p);
    let order = layout.order();
    let mut offsets = Vec::with_capacity(k);
    let mut reflectors = Vec::with_capacity(k);
    let mut chosen = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let n_i = p.cell(i).len();
        let block: Vec<C64> = order[start..start + n_i].iter().map(|&v| wi.weights()[v]).collect();
        let beta = match phases {
            Phases::Auto => beta0(&block),
            Phases::Explicit(v) => v[i],
        };
        reflectors.push(build_reflector(&block, beta)?);
        chosen.push(beta);
        offsets.push(start);
        start += n_i;
    }
    Ok(BlockReflector { partition: p.clone(), layout, offsets, reflectors, phases: chosen })
}

impl BlockReflector {
    pub fn dim(&self) -> usize {
        self.partition.n()
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// The suitable-indexing permutation the block layout refers to.
    pub fn layout(&self) -> &Permutation {
        &self.layout
    }

    pub fn reflectors(&self) -> &[ElementaryUnitary] {
        &self.reflectors
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.reflectors.iter().map(ElementaryUnitary::dim).collect()
    }

    fn check_rows(&self, rows: usize) -> Result<()> {
        if rows != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "block reflector of size {} applied to {} rows",
                self.dim(),
                rows
            )));
        }
        Ok(())
    }

    /// `M ← H̃′ M`.
    pub fn apply_adjoint_left_in_place(&self, m: &mut CMatrix) -> Result<()> {
        self.check_rows(m.nrows())?;
        for (h, &off) in self.reflectors.iter().zip(&self.offsets) {
            h.adjoint_rows_in_place(m, off);
        }
        Ok(())
    }

    /// `M ← H̃ M`.
    pub fn apply_left_in_place(&self, m: &mut CMatrix) -> Result<()> {
        self.check_rows(m.nrows())?;
        for (h, &off) in self.reflectors.iter().zip(&self.offsets) {
            h.rows_in_place(m, off);
        }
        Ok(())
    }

    /// `M ← M H̃`.
    pub fn apply_right_in_place(&self, m: &mut CMatrix) -> Result<()> {
        self.check_rows(m.ncols())?;
        for (h, &off) in self.reflectors.iter().zip(&self.offsets) {
            h.cols_in_place(m, off);
        }
        Ok(())
    }

    /// `H̃′ A H̃` for `A` given in suitably indexed coordinates.
    pub fn transform(&self, a: &CMatrix) -> Result<CMatrix> {
        let mut out = a.clone();
        self.apply_adjoint_left_in_place(&mut out)?;
        self.apply_right_in_place(&mut out)?;
        Ok(out)
    }

    /// `H̃ v`.
    pub fn apply(&self, v: &[C64]) -> Result<CVector> {
        let mut m = CMatrix::from_column_slice(v.len(), 1, v);
        self.apply_left_in_place(&mut m)?;
        Ok(m.column(0).into_owned())
    }

    /// Dense `N×N` block-diagonal form.
    pub fn dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for (h, &off) in self.reflectors.iter().zip(&self.offsets) {
            let n = h.dim();
            m.view_mut((off, off), (n, n)).copy_from(&h.dense());
        }
        m
    }
}

/// `E^α = (W′W)^{-(1-α)/2} W′AW (W′W)^{-(1+α)/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientMatrix {
    pub alpha: f64,
    pub entries: CMatrix,
}

pub fn generalized_quotient(a: &CMatrix, wi: &WeightedIndicator, alpha: f64) -> Result<QuotientMatrix> {
    ensure_square(a, wi.partition().n())?;
    wi.ensure_admissible()?;
    let norms = wi.block_norms();
    let g = w_adjoint_times(wi, &a_times_w(a, wi));
    let entries = CMatrix::from_fn(g.nrows(), g.ncols(), |i, j| {
        g[(i, j)] * norms[i].powf(-(1.0 - alpha)) * norms[j].powf(-(1.0 + alpha))
    });
    Ok(QuotientMatrix { alpha, entries })
}

/// Front or rear deviation matrix.
///
/// `blocks[i][j]` is `t_ij`: for the front side a vector over cell `i`, for
/// the rear side a vector over cell `j`. `assembled` is the `N×k` matrix
/// `T⁻ = (AW − WE⁻)(W′W)^{-1/2}` or `T⁺ = (A′W − W E⁺′)(W′W)^{-1/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviationMatrix {
    pub side: Side,
    pub blocks: Vec<Vec<CVector>>,
    pub assembled: CMatrix,
}

impl DeviationMatrix {
    pub fn is_zero(&self, tol: f64) -> bool {
        self.assembled.iter().all(|z| z.norm() <= tol)
    }
}

pub fn deviation_matrices(a: &CMatrix, wi: &WeightedIndicator) -> Result<(DeviationMatrix, DeviationMatrix)> {
    ensure_square(a, wi.partition().n())?;
    wi.ensure_admissible()?;
    let p = wi.partition();
    let k = p.k();
    let w = wi.weights();
    let norms = wi.block_norms();
    let labels = p.labels();
    // summed directly so that integer weights give exact quotients
    let squared: Vec<f64> = (0..k).map(|i| p.cell(i).iter().map(|&v| w[v].norm_sqr()).sum()).collect();

    let aw = a_times_w(a, wi);
    let g = w_adjoint_times(wi, &aw);
    // e⁻_ij = g_ij/‖w_i‖², e⁺_ij = g_ij/‖w_j‖²
    let front = CMatrix::from_fn(p.n(), k, |u, j| {
        let e = g[(labels[u], j)] / squared[labels[u]];
        (aw[(u, j)] - w[u] * e) / norms[j]
    });
    let ahw = a_adjoint_times_w(a, wi);
    let rear = CMatrix::from_fn(p.n(), k, |v, i| {
        let e = g[(i, labels[v])] / squared[labels[v]];
        (ahw[(v, i)] - w[v] * e.conj()) / norms[i]
    });

    let gather = |m: &CMatrix, rows: &[usize], col: usize| CVector::from_iterator(rows.len(), rows.iter().map(|&u| m[(u, col)]));
    let front_blocks = (0..k).map(|i| (0..k).map(|j| gather(&front, p.cell(i), j)).collect()).collect();
    let rear_blocks = (0..k).map(|i| (0..k).map(|j| gather(&rear, p.cell(j), i)).collect()).collect();
    Ok((
        DeviationMatrix { side: Side::Front, blocks: front_blocks, assembled: front },
        DeviationMatrix { side: Side::Rear, blocks: rear_blocks, assembled: rear },
    ))
}

/// The gathering permutation for cell sizes `n`: the first position of cell
/// `i` (in block-contiguous layout) goes to `i`, all other positions keep
/// their relative order behind the first `k`.
pub fn omega_permutation(sizes: &[usize]) -> Result<Permutation> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidPartition(format!("cell sizes {sizes:?} must be non-empty and positive")));
    }
    let k = sizes.len();
    let mut map = Vec::with_capacity(sizes.iter().sum());
    let mut tail = k;
    for (i, &n_i) in sizes.iter().enumerate() {
        map.push(i);
        for _ in 1..n_i {
            map.push(tail);
            tail += 1;
        }
    }
    Permutation::from_map(map)
}

/// `Â = Ω′ H̃′ P′ A P H̃ Ω` split into its 2×2 blocks, together with the
/// transforms that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangularizationResult {
    pub e: CMatrix,
    pub d_minus: CMatrix,
    /// The upper right block `(D⁺)′`.
    pub d_plus_conj: CMatrix,
    pub f: CMatrix,
    pub reflector: BlockReflector,
    pub omega: Permutation,
    pub pre_permutation: Permutation,
}

impl TriangularizationResult {
    pub fn k(&self) -> usize {
        self.e.nrows()
    }

    pub fn n(&self) -> usize {
        self.e.nrows() + self.f.nrows()
    }

    /// `Â`.
    pub fn assembled(&self) -> CMatrix {
        let (k, n) = (self.k(), self.n());
        let mut m = CMatrix::zeros(n, n);
        m.view_mut((0, 0), (k, k)).copy_from(&self.e);
        m.view_mut((k, 0), (n - k, k)).copy_from(&self.d_minus);
        m.view_mut((0, k), (k, n - k)).copy_from(&self.d_plus_conj);
        m.view_mut((k, k), (n - k, n - k)).copy_from(&self.f);
        m
    }

    /// `Ã = Ω Â Ω′`, the transformed matrix before gathering.
    pub fn transformed(&self) -> CMatrix {
        self.omega.inverse().permute_symmetric(&self.assembled())
    }

    /// `D⁺`, the conjugate transpose of the upper right block.
    pub fn d_plus(&self) -> CMatrix {
        self.d_plus_conj.adjoint()
    }
}

pub fn block_triangularize(a: &CMatrix, wi: &WeightedIndicator, phases: &Phases) -> Result<TriangularizationResult> {
    ensure_square(a, wi.partition().n())?;
    let reflector = build_block_reflector(wi, phases)?;
    let pre_permutation = reflector.layout().clone();
    let tilde = reflector.transform(&pre_permutation.permute_symmetric(a))?;
    let omega = omega_permutation(&reflector.sizes())?;
    let hat = omega.permute_symmetric(&tilde);
    let n = a.nrows();
    let k = wi.partition().k();
    Ok(TriangularizationResult {
        e: hat.view((0, 0), (k, k)).into_owned(),
        d_minus: hat.view((k, 0), (n - k, k)).into_owned(),
        d_plus_conj: hat.view((0, k), (k, n - k)).into_owned(),
        f: hat.view((k, k), (n - k, n - k)).into_owned(),
        reflector,
        omega,
        pre_permutation,
    })
}

/// `z = P H̃ Ω ẑ`: maps an eigenvector of `Â` back to one of `A`.
pub fn recover_eigenvector(r: &TriangularizationResult, z_hat: &[C64]) -> Result<CVector> {
    if z_hat.len() != r.n() {
        return Err(Error::DimensionMismatch(format!("vector of length {} for N = {}", z_hat.len(), r.n())));
    }
    let z_tilde = r.omega.unpermute_vector(z_hat);
    let z_layout = r.reflector.apply(&z_tilde)?;
    Ok(CVector::from_vec(r.pre_permutation.unpermute_vector(z_layout.as_slice())))
}

/// Eigenvalues of the diagonal blocks of `Â`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumSplit {
    pub eigs_e: Vec<C64>,
    pub eigs_f: Vec<C64>,
    /// One off-diagonal block vanishes (Frobenius norm within the tolerance),
    /// so `Â` is block triangular and `σ(A) = σ(E) ∪ σ(F)`.
    pub exact: bool,
}

impl SpectrumSplit {
    pub fn joint(&self) -> Vec<C64> {
        let mut all = self.eigs_e.clone();
        all.extend_from_slice(&self.eigs_f);
        all.sort_by(linalg::cmp_complex);
        all
    }
}

pub fn spectrum_split(r: &TriangularizationResult, tol: f64) -> Result<SpectrumSplit> {
    let eigs_e = linalg::eigenvalues(&r.e)?;
    let eigs_f = linalg::eigenvalues(&r.f)?;
    let exact = r.d_minus.norm().min(r.d_plus_conj.norm()) <= tol;
    Ok(SpectrumSplit { eigs_e, eigs_f, exact })
}
