//! Complex elementary unitary matrices `H(x, β)`.
//!
//! `H(x, β)` maps the first basis vector `f` onto the direction of `x`:
//! `H f = (β/‖x‖) x` and `H′ x = (‖x‖/β) f`. The free unit-modulus parameter
//! `β` fixes the phase of the image. With `β = β₀(x)` (see [`beta0`]) the
//! matrix is Hermitian and, for real `x`, a classical Householder reflector.
//!
//! Matrices are stored as `I + c·y·y′` with `‖y‖ = 1`, so storage is `O(n)`
//! and applying `H` to an `n×m` matrix costs `O(nm)`.

use std::cell::Cell;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix, CVector, C64};

thread_local! {
    static OPS: Cell<u64> = const { Cell::new(0) };
}

/// Scalar multiply-adds performed by reflector kernels on this thread since
/// the last [`reset_op_count`].
pub fn op_count() -> u64 {
    OPS.with(Cell::get)
}

pub fn reset_op_count() {
    OPS.with(|c| c.set(0));
}

fn add_ops(n: u64) {
    OPS.with(|c| c.set(c.get() + n));
}

/// A complex number of unit modulus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Phase(C64);

impl Phase {
    pub const ONE: Phase = Phase(C64::new(1.0, 0.0));
    pub const MINUS_ONE: Phase = Phase(C64::new(-1.0, 0.0));

    /// Accepts `z` when `||z| - 1| ≤ 1e-12`.
    pub fn new(z: C64) -> Result<Self> {
        let r = z.norm();
        if (r - 1.0).abs() > 1e-12 || !r.is_finite() {
            return Err(Error::InvalidPhase(r));
        }
        Ok(Phase(z))
    }

    /// `z/|z|`, or `None` for zero.
    pub fn normalize(z: C64) -> Option<Self> {
        let r = z.norm();
        (r > 0.0 && r.is_finite()).then(|| Phase(z / r))
    }

    pub fn from_angle(theta: f64) -> Self {
        Phase(C64::from_polar(1.0, theta))
    }

    #[inline]
    pub fn value(self) -> C64 {
        self.0
    }

    pub fn conj(self) -> Phase {
        Phase(self.0.conj())
    }
}

impl Default for Phase {
    fn default() -> Self {
        Phase::ONE
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase(self.0 * rhs.0)
    }
}

fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// `γ(x, β) = (‖x‖ − Re(βx¹))† · Im(βx¹)`, with `c† = 0` for `c = 0`.
pub fn gamma(x: &[C64], beta: Phase) -> Result<f64> {
    let nrm = norm2(x);
    if nrm == 0.0 || !nrm.is_finite() {
        return Err(Error::ZeroVector);
    }
    let bx = beta.value() * x[0];
    let a = nrm - bx.re;
    let pinv = if a == 0.0 { 0.0 } else { 1.0 / a };
    Ok(pinv * bx.im)
}

/// The recommended phase `β₀(x) = −conj(x¹)/|x¹|`, or `1` when `x¹ = 0`.
pub fn beta0(x: &[C64]) -> Phase {
    match x.first() {
        Some(&x1) if x1 != C64::new(0.0, 0.0) => Phase(-x1.conj() / x1.norm()),
        _ => Phase::ONE,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReflectorKind {
    Identity,
    RankOne,
}

#[derive(Clone, Debug, PartialEq)]
struct RankOne {
    y: CVector,
    coeff: C64,
}

/// `H = I + c·y·y′`, or the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementaryUnitary {
    dim: usize,
    update: Option<RankOne>,
}

/// Builds `H(x, β)`.
///
/// The identity branch is taken when `x − ‖x‖β̄f` vanishes to within
/// `1e-14·‖x‖` in every entry.
pub fn build_reflector(x: &[C64], beta: Phase) -> Result<ElementaryUnitary> {
    let nrm = norm2(x);
    if x.is_empty() || nrm == 0.0 || !nrm.is_finite() {
        return Err(Error::ZeroVector);
    }
    let mut y = x.to_vec();
    y[0] -= beta.conj().value() * nrm;
    let tol = 1e-14 * nrm;
    if y.iter().all(|v| v.norm() <= tol) {
        return Ok(ElementaryUnitary::identity(x.len()));
    }
    let ynorm_sq: f64 = y.iter().map(|v| v.norm_sqr()).sum();
    // ‖y‖² = 2‖x‖(‖x‖ − Re βx¹), computed without cancellation in the difference
    let a = ynorm_sq / (2.0 * nrm);
    let b = (beta.value() * x[0]).im;
    let coeff = c64(-2.0, 0.0) / c64(1.0, b / a);
    let ynorm = ynorm_sq.sqrt();
    let y = CVector::from_iterator(x.len(), y.into_iter().map(|v| v / ynorm));
    Ok(ElementaryUnitary { dim: x.len(), update: Some(RankOne { y, coeff }) })
}

impl ElementaryUnitary {
    pub fn identity(dim: usize) -> Self {
        Self { dim, update: None }
    }

    /// `H(x, β₀(x))`.
    pub fn from_vector(x: &[C64]) -> Result<Self> {
        build_reflector(x, beta0(x))
    }

    /// The general elementary unitary `U(γ, y) = I − 2/(1+iγ)·(y′y)†·y y′`.
    /// Only the direction of `y` matters; `y = 0` gives the identity.
    pub fn from_update(gamma: f64, y: &[C64]) -> Self {
        let nrm = norm2(y);
        if nrm == 0.0 {
            return Self::identity(y.len());
        }
        let coeff = c64(-2.0, 0.0) / c64(1.0, gamma);
        let y = CVector::from_iterator(y.len(), y.iter().map(|v| v / nrm));
        Self { dim: y.len(), update: Some(RankOne { y, coeff }) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ReflectorKind {
        match self.update {
            None => ReflectorKind::Identity,
            Some(_) => ReflectorKind::RankOne,
        }
    }

    /// Unit update direction `y`, if rank one.
    pub fn direction(&self) -> Option<&CVector> {
        self.update.as_ref().map(|u| &u.y)
    }

    /// The scalar `c` in `I + c·y·y′` (zero for the identity).
    pub fn coeff(&self) -> C64 {
        self.update.as_ref().map_or(C64::new(0.0, 0.0), |u| u.coeff)
    }

    pub fn dense(&self) -> CMatrix {
        let mut m = CMatrix::identity(self.dim, self.dim);
        if let Some(u) = &self.update {
            m += (&u.y * u.y.adjoint()) * u.coeff;
        }
        m
    }

    /// `H′ M`.
    pub fn apply_left(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.nrows() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "reflector of size {} applied to {} rows",
                self.dim,
                m.nrows()
            )));
        }
        let mut out = m.clone();
        self.adjoint_rows_in_place(&mut out, 0);
        Ok(out)
    }

    /// `M H`.
    pub fn apply_right(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.ncols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "reflector of size {} applied to {} columns",
                self.dim,
                m.ncols()
            )));
        }
        let mut out = m.clone();
        self.cols_in_place(&mut out, 0);
        Ok(out)
    }

    /// `H v`.
    pub fn apply(&self, v: &[C64]) -> Result<CVector> {
        self.apply_vector(v, false)
    }

    /// `H′ v`.
    pub fn apply_adjoint(&self, v: &[C64]) -> Result<CVector> {
        self.apply_vector(v, true)
    }

    fn apply_vector(&self, v: &[C64], adjoint: bool) -> Result<CVector> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "reflector of size {} applied to a vector of length {}",
                self.dim,
                v.len()
            )));
        }
        let mut m = CMatrix::from_column_slice(v.len(), 1, v);
        if adjoint {
            self.adjoint_rows_in_place(&mut m, 0);
        } else {
            self.rows_in_place(&mut m, 0);
        }
        Ok(m.column(0).into_owned())
    }

    /// Rows `offset..offset+dim` of `m` are replaced by `H′` times themselves.
    pub(crate) fn adjoint_rows_in_place(&self, m: &mut CMatrix, offset: usize) {
        if let Some(u) = &self.update {
            rows_update(m, offset, &u.y, u.coeff.conj());
        }
    }

    /// Rows `offset..offset+dim` of `m` are replaced by `H` times themselves.
    pub(crate) fn rows_in_place(&self, m: &mut CMatrix, offset: usize) {
        if let Some(u) = &self.update {
            rows_update(m, offset, &u.y, u.coeff);
        }
    }

    /// Columns `offset..offset+dim` of `m` are replaced by themselves times `H`.
    pub(crate) fn cols_in_place(&self, m: &mut CMatrix, offset: usize) {
        if let Some(u) = &self.update {
            cols_update(m, offset, &u.y, u.coeff);
        }
    }
}

/// `M_r ← M_r + c·y·(y′M_r)` on the row range `r = offset..offset+len(y)`.
fn rows_update(m: &mut CMatrix, offset: usize, y: &CVector, c: C64) {
    let nrows = m.nrows();
    let ncols = m.ncols();
    let dim = y.len();
    let y = y.as_slice();
    let data = m.as_mut_slice();
    let mut ops = 0u64;
    for j in 0..ncols {
        let col = &mut data[j * nrows + offset..j * nrows + offset + dim];
        let mut s = C64::new(0.0, 0.0);
        for (yr, mr) in y.iter().zip(col.iter()) {
            s += yr.conj() * mr;
        }
        let t = c * s;
        for (yr, mr) in y.iter().zip(col.iter_mut()) {
            *mr += yr * t;
        }
        ops += 2 * dim as u64;
    }
    add_ops(ops);
}

/// `M_c ← M_c + c·(M_c y)·y′` on the column range `offset..offset+len(y)`.
fn cols_update(m: &mut CMatrix, offset: usize, y: &CVector, c: C64) {
    let nrows = m.nrows();
    let y = y.as_slice();
    let data = m.as_mut_slice();
    let mut s = vec![C64::new(0.0, 0.0); nrows];
    let mut ops = 0u64;
    for (r, yr) in y.iter().enumerate() {
        let col = &data[(offset + r) * nrows..(offset + r + 1) * nrows];
        for (si, mi) in s.iter_mut().zip(col) {
            *si += mi * yr;
        }
        ops += nrows as u64;
    }
    for (r, yr) in y.iter().enumerate() {
        let t = c * yr.conj();
        let col = &mut data[(offset + r) * nrows..(offset + r + 1) * nrows];
        for (si, mi) in s.iter().zip(col.iter_mut()) {
            *mi += si * t;
        }
        ops += nrows as u64;
    }
    add_ops(ops);
}
