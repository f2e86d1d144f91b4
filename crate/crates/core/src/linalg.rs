//! Small dense complex linear algebra on top of `nalgebra`.
//!
//! Inner products are antilinear in the first slot:
//! `<a|b> = sum_k conj(a_k) b_k`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real_vector(entries: &[f64]) -> CVector {
    CVector::from_iterator(entries.len(), entries.iter().map(|&x| c(x, 0.0)))
}

/// `<a|b>`.
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}

/// `|a><b|`.
pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

pub fn basis_vector(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = ONE;
    v
}

/// Projector onto the span of the computational basis vectors `range`.
pub fn coordinate_projector(dim: usize, range: std::ops::Range<usize>) -> CMatrix {
    let mut p = CMatrix::zeros(dim, dim);
    for k in range {
        p[(k, k)] = ONE;
    }
    p
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Unit vector obtained by one Gram-Schmidt step of the first computational
/// basis direction that is not (nearly) parallel to the unit vector `v`.
pub fn orthogonal_complement_direction(v: &CVector) -> Option<CVector> {
    let dim = v.len();
    (0..dim).find_map(|k| {
        let e = basis_vector(dim, k);
        let r = &e - v * inner(v, &e);
        let norm = r.norm();
        (norm >= 0.5).then(|| r / c(norm, 0.0))
    })
}

/// Unitary `U` with `U from = to` for unit vectors `from`, `to`.
///
/// Built as a phase times a single Householder reflector, so it is unitary up
/// to rounding. Returns the identity when the vectors already agree.
pub fn unitary_mapping(from: &CVector, to: &CVector, tol: f64) -> CMatrix {
    let dim = from.len();
    let overlap = inner(from, to);
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    // to = phase * aligned, with <from|aligned> real and non-negative.
    let aligned = to * phase.conj();
    let w = from - &aligned;
    let w_norm_sq = w.norm_squared();
    let reflector = if w_norm_sq.sqrt() <= tol {
        CMatrix::identity(dim, dim)
    } else {
        CMatrix::identity(dim, dim) - outer(&w, &w) * c(2.0 / w_norm_sq, 0.0)
    };
    reflector * phase
}
