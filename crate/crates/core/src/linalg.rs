//! Dense complex helpers shared by the decomposition modules.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};

use crate::error::{Error, Result};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Lifts a real matrix into the complex field.
pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

/// Singular values in descending order. Empty matrices have none.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value, zero for empty matrices.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// `max |m_ij - conj(m_ji)|`, or infinity for non-square input.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    hermitian_defect(m) <= tol
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Ascending eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Lexicographic order on (re, im), total over all floats.
pub fn cmp_complex(a: &C64, b: &C64) -> Ordering {
    a.re.total_cmp(&b.re).then_with(|| a.im.total_cmp(&b.im))
}

fn schur(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = m.nrows();
    Schur::try_new(m.clone(), f64::EPSILON, 1000 * n.max(10))
        .map(Schur::unpack)
        .ok_or_else(|| Error::Eigensolver(format!("Schur iteration did not converge for n = {n}")))
}

/// Eigenvalues of a general complex square matrix, sorted by (re, im).
///
/// Hermitian input (defect below `1e-14·‖m‖_F`) takes the symmetric route.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    if hermitian_defect(m) <= 1e-14 * m.norm() {
        return Ok(hermitian_eigenvalues(m).into_iter().map(|x| c64(x, 0.0)).collect());
    }
    let (_, t) = schur(m)?;
    let mut vals: Vec<C64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    vals.sort_by(cmp_complex);
    Ok(vals)
}

/// Eigenpairs of a general complex square matrix.
///
/// Eigenvectors are unit-norm columns, obtained by back substitution on the
/// Schur factor. For defective matrices the returned vectors for a repeated
/// eigenvalue are (nearly) parallel.
pub fn eigen_decomposition(m: &CMatrix) -> Result<(Vec<C64>, CMatrix)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigen decomposition of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    if hermitian_defect(m) <= 1e-14 * m.norm() {
        let eig = SymmetricEigen::new(hermitian_part(m));
        let vals = eig.eigenvalues.iter().map(|&x| c64(x, 0.0)).collect();
        return Ok((vals, eig.eigenvectors));
    }
    let (q, t) = schur(m)?;
    let small = f64::EPSILON * t.norm().max(f64::MIN_POSITIVE);
    let mut x = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        x[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                s += t[(i, j)] * x[(j, k)];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < small {
                d = C64::new(small, 0.0);
            }
            x[(i, k)] = -s / d;
        }
        let nrm = x.column(k).norm();
        x.column_mut(k).unscale_mut(nrm);
    }
    let vals = (0..n).map(|i| t[(i, i)]).collect();
    let mut v = q * x;
    for k in 0..n {
        let nrm = v.column(k).norm();
        v.column_mut(k).unscale_mut(nrm);
    }
    Ok((vals, v))
}

/// Greedy multiset matching: walks `a` in (re, im) order and pairs each value
/// with the nearest unused value of `b`. Returns the largest paired distance,
/// or infinity when the multisets differ in size.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut a = a.to_vec();
    a.sort_by(cmp_complex);
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in &a {
        let mut best: Option<(usize, f64)> = None;
        for (j, y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (x - y).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.expect("sizes agree");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Largest entrywise gap between two equal-length sorted real sequences.
pub fn sorted_gap(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
