//! Approximate block triangularization of rectangular matrices driven by
//! per-block SVDs of two block-diagonal side matrices `W⁻` (rows) and `W⁺`
//! (columns).
//!
//! With `W⁻ = U⁻(I N⁻)V⁻′` and `W⁺ = U⁺(I N⁺)V⁺′` the two-sided transform
//! `Â = Ω⁻′ U⁻′ A U⁺ Ω⁺` splits as `[[E, D⁺′], [D⁻, F]]`. It preserves the
//! singular values of `A` but not its spectrum.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::permutation::Permutation;
use crate::reflector::Phase;

/// The `n×r` matrix `(I_r; 0)`, or its block-diagonal variant
/// `diag(I_{n_1}^{r_1}, …, I_{n_k}^{r_k})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaddedIdentity {
    n_sizes: Vec<usize>,
    r_sizes: Vec<usize>,
}

impl PaddedIdentity {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        Self::blocks(vec![r], vec![n])
    }

    pub fn blocks(r_sizes: Vec<usize>, n_sizes: Vec<usize>) -> Result<Self> {
        check_sizes(&r_sizes, &n_sizes)?;
        Ok(Self { n_sizes, r_sizes })
    }

    pub fn rows(&self) -> usize {
        self.n_sizes.iter().sum()
    }

    pub fn cols(&self) -> usize {
        self.r_sizes.iter().sum()
    }

    pub fn dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.rows(), self.cols());
        let (mut row, mut col) = (0, 0);
        for (&n, &r) in self.n_sizes.iter().zip(&self.r_sizes) {
            for s in 0..r {
                m[(row + s, col + s)] = C64::new(1.0, 0.0);
            }
            row += n;
            col += r;
        }
        m
    }
}

fn check_sizes(r_sizes: &[usize], n_sizes: &[usize]) -> Result<()> {
    if r_sizes.len() != n_sizes.len() || r_sizes.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "block sizes r = {r_sizes:?} and n = {n_sizes:?} must be non-empty and of equal length"
        )));
    }
    for (i, (&r, &n)) in r_sizes.iter().zip(n_sizes).enumerate() {
        if r == 0 || r > n {
            return Err(Error::DimensionMismatch(format!("block {i}: need 0 < r_i ≤ n_i, got r_i = {r}, n_i = {n}")));
        }
    }
    Ok(())
}

/// Gathers the first `r_i` positions of every block into the leading `r`
/// positions (in block order); the remaining positions keep their order
/// behind them.
pub fn omega_nr_permutation(r_sizes: &[usize], n_sizes: &[usize]) -> Result<Permutation> {
    check_sizes(r_sizes, n_sizes)?;
    let r: usize = r_sizes.iter().sum();
    let mut map = Vec::with_capacity(n_sizes.iter().sum());
    let (mut head, mut tail) = (0, r);
    for (&r_i, &n_i) in r_sizes.iter().zip(n_sizes) {
        for s in 0..n_i {
            if s < r_i {
                map.push(head);
                head += 1;
            } else {
                map.push(tail);
                tail += 1;
            }
        }
    }
    Permutation::from_map(map)
}

/// A block-diagonal matrix kept as its list of diagonal blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDiagonal {
    blocks: Vec<CMatrix>,
}

impl BlockDiagonal {
    pub fn new(blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::DimensionMismatch("block-diagonal matrix needs at least one block".into()));
        }
        if let Some(i) = blocks.iter().position(|b| b.nrows() == 0 || b.ncols() == 0) {
            return Err(Error::DimensionMismatch(format!("block {i} is empty")));
        }
        Ok(Self { blocks })
    }

    /// Cuts a dense matrix along the given row and column sizes. Entries off
    /// the diagonal blocks must be at most `tol` in modulus.
    pub fn from_dense(m: &CMatrix, row_sizes: &[usize], col_sizes: &[usize], tol: f64) -> Result<Self> {
        if row_sizes.len() != col_sizes.len()
            || row_sizes.iter().sum::<usize>() != m.nrows()
            || col_sizes.iter().sum::<usize>() != m.ncols()
        {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix cut into rows {row_sizes:?} and columns {col_sizes:?}",
                m.nrows(),
                m.ncols()
            )));
        }
        let row_block = block_labels(row_sizes);
        let col_block = block_labels(col_sizes);
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if row_block[i] != col_block[j] && m[(i, j)].norm() > tol {
                    return Err(Error::DimensionMismatch(format!("entry ({i}, {j}) lies off the diagonal blocks")));
                }
            }
        }
        let (mut row, mut col) = (0, 0);
        let mut blocks = Vec::with_capacity(row_sizes.len());
        for (&r, &c) in row_sizes.iter().zip(col_sizes) {
            blocks.push(m.view((row, col), (r, c)).into_owned());
            row += r;
            col += c;
        }
        Self::new(blocks)
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn row_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    pub fn col_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.ncols()).collect()
    }

    pub fn nrows(&self) -> usize {
        self.blocks.iter().map(|b| b.nrows()).sum()
    }

    pub fn ncols(&self) -> usize {
        self.blocks.iter().map(|b| b.ncols()).sum()
    }

    pub fn dense(&self) -> CMatrix {
        assemble_diagonal(self.blocks.iter())
    }
}

fn block_labels(sizes: &[usize]) -> Vec<usize> {
    sizes.iter().enumerate().flat_map(|(i, &s)| std::iter::repeat_n(i, s)).collect()
}

fn assemble_diagonal<'a>(blocks: impl Iterator<Item = &'a CMatrix> + Clone) -> CMatrix {
    let rows = blocks.clone().map(|b| b.nrows()).sum();
    let cols = blocks.clone().map(|b| b.ncols()).sum();
    let mut m = CMatrix::zeros(rows, cols);
    let (mut row, mut col) = (0, 0);
    for b in blocks {
        m.view_mut((row, col), b.shape()).copy_from(b);
        row += b.nrows();
        col += b.ncols();
    }
    m
}

/// Full SVD `W_i = U_i (I N_i) V_i′` of one `m_i×q_i` block of rank `q_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdBlock {
    /// `m_i×m_i` unitary.
    pub u: CMatrix,
    /// Diagonal of `N_i`, descending and positive.
    pub singular_values: Vec<f64>,
    /// `q_i×q_i` unitary.
    pub v: CMatrix,
}

impl SvdBlock {
    pub fn rows(&self) -> usize {
        self.u.nrows()
    }

    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `U_i I V_i′`, the isometric factor of the block.
    pub fn isometry(&self) -> CMatrix {
        self.u.columns(0, self.rank()) * self.v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let mut us = self.u.columns(0, self.rank()).into_owned();
        for (j, &s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * self.v.adjoint()
    }

    /// Replaces `U_i ↦ U_i Φ` on the leading `q_i` columns and `V_i ↦ V_i Φ`
    /// for a diagonal phase matrix `Φ`. The result is again an SVD of the
    /// same block.
    pub fn twisted(&self, phases: &[Phase]) -> Result<SvdBlock> {
        if phases.len() != self.rank() {
            return Err(Error::PhaseCount { expected: self.rank(), got: phases.len() });
        }
        let mut out = self.clone();
        for (j, p) in phases.iter().enumerate() {
            out.u.column_mut(j).iter_mut().for_each(|z| *z *= p.value());
            out.v.column_mut(j).iter_mut().for_each(|z| *z *= p.value());
        }
        Ok(out)
    }
}

/// Per-block SVDs of a block-diagonal side matrix together with the
/// gathering permutation `Ω_m^q`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSvd {
    pub blocks: Vec<SvdBlock>,
    pub omega: Permutation,
    pub source: BlockDiagonal,
}

impl BlockSvd {
    pub fn from_blocks(source: BlockDiagonal, blocks: Vec<SvdBlock>) -> Result<Self> {
        if blocks.len() != source.blocks().len()
            || blocks.iter().zip(source.blocks()).any(|(f, b)| f.rows() != b.nrows() || f.rank() != b.ncols())
        {
            return Err(Error::DimensionMismatch("SVD factors do not match the source blocks".into()));
        }
        let omega = omega_nr_permutation(&source.col_sizes(), &source.row_sizes())?;
        Ok(Self { blocks, omega, source })
    }

    pub fn rows(&self) -> usize {
        self.source.nrows()
    }

    pub fn rank(&self) -> usize {
        self.source.ncols()
    }

    /// Block-diagonal `U`.
    pub fn u(&self) -> CMatrix {
        assemble_diagonal(self.blocks.iter().map(|b| &b.u))
    }

    /// Block-diagonal `V`.
    pub fn v(&self) -> CMatrix {
        assemble_diagonal(self.blocks.iter().map(|b| &b.v))
    }

    /// `U I V′`, block diagonal.
    pub fn isometry(&self) -> CMatrix {
        let parts: Vec<CMatrix> = self.blocks.iter().map(SvdBlock::isometry).collect();
        assemble_diagonal(parts.iter())
    }

    /// `U (I_m^q N) V′` assembled through `Ω`; equals the source matrix.
    pub fn reconstruct(&self) -> CMatrix {
        let s: Vec<f64> = self.blocks.iter().flat_map(|b| b.singular_values.iter().copied()).collect();
        let mut padded = PaddedIdentity::new(self.rows(), self.rank()).expect("rank ≤ rows").dense();
        for (j, &sj) in s.iter().enumerate() {
            padded[(j, j)] = C64::new(sj, 0.0);
        }
        // Ω I_m^q N = S, the block-diagonal singular value matrix
        let s_block = self.omega.inverse().permute_rows(&padded);
        self.u() * s_block * self.v().adjoint()
    }

    pub fn twisted(&self, phases: &[Vec<Phase>]) -> Result<BlockSvd> {
        if phases.len() != self.blocks.len() {
            return Err(Error::PhaseCount { expected: self.blocks.len(), got: phases.len() });
        }
        let blocks = self.blocks.iter().zip(phases).map(|(b, p)| b.twisted(p)).collect::<Result<_>>()?;
        Ok(Self { blocks, omega: self.omega.clone(), source: self.source.clone() })
    }
}

/// Full SVD of each block, singular values descending. A block whose
/// smallest singular value is at most `1e-10` times its largest is rejected.
pub fn block_svd(w: &BlockDiagonal) -> Result<BlockSvd> {
    let mut blocks = Vec::with_capacity(w.blocks().len());
    for (i, b) in w.blocks().iter().enumerate() {
        let (m, q) = b.shape();
        if q > m {
            return Err(Error::RankDeficient { block: i, ratio: 0.0 });
        }
        let svd = b.clone().svd(true, true);
        let (u_thin, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
        let mut order: Vec<usize> = (0..q).collect();
        order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
        let s: Vec<f64> = order.iter().map(|&j| svd.singular_values[j]).collect();
        let ratio = if s[0] > 0.0 { s[q - 1] / s[0] } else { 0.0 };
        if ratio <= 1e-10 {
            return Err(Error::RankDeficient { block: i, ratio });
        }
        let u_sorted = CMatrix::from_fn(m, q, |r, c| u_thin[(r, order[c])]);
        let v = CMatrix::from_fn(q, q, |r, c| v_t[(order[c], r)].conj());
        blocks.push(SvdBlock { u: complete_unitary(&u_sorted), singular_values: s, v });
    }
    BlockSvd::from_blocks(w.clone(), blocks)
}

/// Extends orthonormal columns to a square unitary by orthogonalizing
/// standard basis vectors (twice) against the current basis, always taking
/// the candidate with the largest remaining component.
fn complete_unitary(u: &CMatrix) -> CMatrix {
    let (m, q) = u.shape();
    let mut out = CMatrix::zeros(m, m);
    out.columns_mut(0, q).copy_from(u);
    for filled in q..m {
        let basis = out.columns(0, filled).into_owned();
        let project = |mut x: CMatrix| {
            for _ in 0..2 {
                let coeffs = basis.adjoint() * &x;
                x -= &basis * coeffs;
            }
            x
        };
        let best = (0..m)
            .map(|e| {
                let mut x = CMatrix::zeros(m, 1);
                x[(e, 0)] = C64::new(1.0, 0.0);
                project(x)
            })
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("m > filled ≥ 0");
        let nrm = best.norm();
        out.column_mut(filled).copy_from(&best.column(0).unscale(nrm));
    }
    out
}

fn check_grid(a: &CMatrix, w_minus: &BlockDiagonal, w_plus: &BlockDiagonal) -> Result<()> {
    if a.nrows() != w_minus.nrows() || a.ncols() != w_plus.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, side matrices cover {} rows and {} columns",
            a.nrows(),
            a.ncols(),
            w_minus.nrows(),
            w_plus.nrows()
        )));
    }
    Ok(())
}

/// Rejects blocks whose Gram matrix `W_i′W_i` has an eigenvalue at or below
/// `1e-12·λ_max`.
fn check_gram_rank(w: &CMatrix, block: usize) -> Result<()> {
    let g = w.adjoint() * w;
    let eig = SymmetricEigen::new((&g + g.adjoint()).scale(0.5));
    let lmax = eig.eigenvalues.max();
    let lmin = eig.eigenvalues.min();
    if lmax <= 0.0 || lmin <= 1e-12 * lmax {
        let ratio = if lmax > 0.0 { (lmin.max(0.0) / lmax).sqrt() } else { 0.0 };
        return Err(Error::RankDeficient { block, ratio });
    }
    Ok(())
}

/// Unitary polar factor `R (R′R)^{-1/2}` of an invertible square `R` by the
/// scaled Newton iteration `X ← (ζX + ζ⁻¹X^{-′})/2`.
fn polar_factor(r: &CMatrix, block: usize) -> Result<CMatrix> {
    let singular = || Error::RankDeficient { block, ratio: 0.0 };
    let mut x = r.clone();
    for iter in 0..100 {
        let inv_h = x.clone().try_inverse().ok_or_else(singular)?.adjoint();
        // Frobenius-norm scaling speeds up the early steps; drop it near convergence
        let zeta = if iter < 10 { (inv_h.norm() / x.norm()).sqrt() } else { 1.0 };
        let next = (x.scale(zeta) + inv_h.unscale(zeta)).scale(0.5);
        let step = (&next - &x).norm();
        x = next;
        if step <= 4.0 * f64::EPSILON * x.norm() {
            break;
        }
    }
    Ok(x)
}

/// `W (W′W)^{-1/2}` blockwise. Evaluated as `Q·polar(R)` from a thin QR
/// factorization `W = QR`, which avoids squaring the condition number.
fn closed_form_isometry(w: &BlockDiagonal) -> Result<CMatrix> {
    let parts = w
        .blocks()
        .iter()
        .enumerate()
        .map(|(i, b)| {
            check_gram_rank(b, i)?;
            let qr = b.clone().qr();
            Ok(qr.q() * polar_factor(&qr.r(), i)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_diagonal(parts.iter()))
}

/// `E⁰ = (W⁻′W⁻)^{-1/2} W⁻′ A W⁺ (W⁺′W⁺)^{-1/2}`.
pub fn rayleigh_quotient_rect(a: &CMatrix, w_minus: &BlockDiagonal, w_plus: &BlockDiagonal) -> Result<CMatrix> {
    check_grid(a, w_minus, w_plus)?;
    let qm = closed_form_isometry(w_minus)?;
    let qp = closed_form_isometry(w_plus)?;
    Ok(qm.adjoint() * a * qp)
}

/// `T⁻ = A Q⁺ − Q⁻ E⁰` and `T⁺ = A′ Q⁻ − Q⁺ E⁰′` with `Q± = W±(W±′W±)^{-1/2}`.
pub fn deviation_rect(a: &CMatrix, w_minus: &BlockDiagonal, w_plus: &BlockDiagonal) -> Result<(CMatrix, CMatrix)> {
    check_grid(a, w_minus, w_plus)?;
    let qm = closed_form_isometry(w_minus)?;
    let qp = closed_form_isometry(w_plus)?;
    Ok(deviations_from_isometries(a, &qm, &qp))
}

fn deviations_from_isometries(a: &CMatrix, qm: &CMatrix, qp: &CMatrix) -> (CMatrix, CMatrix) {
    let e0 = qm.adjoint() * a * qp;
    let t_minus = a * qp - qm * &e0;
    let t_plus = a.adjoint() * qm - qp * e0.adjoint();
    (t_minus, t_plus)
}

fn check_factors(a: &CMatrix, left: &BlockSvd, right: &BlockSvd) -> Result<()> {
    check_grid(a, &left.source, &right.source)
}

/// `E⁰` assembled blockwise from the SVD factors, `V⁻ I′ U⁻′ A U⁺ I V⁺′`.
pub fn rayleigh_quotient_svd(a: &CMatrix, left: &BlockSvd, right: &BlockSvd) -> Result<CMatrix> {
    check_factors(a, left, right)?;
    Ok(left.isometry().adjoint() * a * right.isometry())
}

/// `T±` assembled from the SVD factors.
pub fn deviation_svd(a: &CMatrix, left: &BlockSvd, right: &BlockSvd) -> Result<(CMatrix, CMatrix)> {
    check_factors(a, left, right)?;
    Ok(deviations_from_isometries(a, &left.isometry(), &right.isometry()))
}

/// `Â = Ω⁻′ U⁻′ A U⁺ Ω⁺` split into its 2×2 blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct RectResult {
    /// `q×r`.
    pub e: CMatrix,
    pub d_minus: CMatrix,
    pub d_plus_conj: CMatrix,
    pub f: CMatrix,
    pub left: BlockSvd,
    pub right: BlockSvd,
}

impl RectResult {
    pub fn assembled(&self) -> CMatrix {
        let (q, r) = self.e.shape();
        let m = q + self.d_minus.nrows();
        let n = r + self.d_plus_conj.ncols();
        let mut out = CMatrix::zeros(m, n);
        out.view_mut((0, 0), (q, r)).copy_from(&self.e);
        out.view_mut((q, 0), (m - q, r)).copy_from(&self.d_minus);
        out.view_mut((0, r), (q, n - r)).copy_from(&self.d_plus_conj);
        out.view_mut((q, r), (m - q, n - r)).copy_from(&self.f);
        out
    }

    /// `E⁰ = V⁻ E V⁺′`.
    pub fn e0(&self) -> CMatrix {
        self.left.v() * &self.e * self.right.v().adjoint()
    }

    pub fn d_plus(&self) -> CMatrix {
        self.d_plus_conj.adjoint()
    }
}

pub fn rect_transform(a: &CMatrix, left: &BlockSvd, right: &BlockSvd) -> Result<RectResult> {
    check_factors(a, left, right)?;
    let tilde = left.u().adjoint() * a * right.u();
    let hat = right.omega.permute_cols(&left.omega.permute_rows(&tilde));
    let (m, n) = a.shape();
    let (q, r) = (left.rank(), right.rank());
    Ok(RectResult {
        e: hat.view((0, 0), (q, r)).into_owned(),
        d_minus: hat.view((q, 0), (m - q, r)).into_owned(),
        d_plus_conj: hat.view((0, r), (q, n - r)).into_owned(),
        f: hat.view((q, r), (m - q, n - r)).into_owned(),
        left: left.clone(),
        right: right.clone(),
    })
}

/// Largest gap between the sorted singular values of `a` and `b`.
pub fn singular_value_gap(a: &CMatrix, b: &CMatrix) -> f64 {
    let (sa, sb) = (linalg::singular_values(a), linalg::singular_values(b));
    let len = sa.len().max(sb.len());
    let pad = |mut s: Vec<f64>| {
        s.resize(len, 0.0);
        s
    };
    linalg::sorted_gap(&pad(sa), &pad(sb))
}
