//! Small dense linear-algebra helpers shared by the models.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::numeric::POLICY;
use crate::{CMat, CVec, C64};

/// Eigenvalues of a Hermitian matrix, sorted descending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)].re];
    }
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Eigen-decomposition of a Hermitian matrix: eigenvalues with eigenvectors as columns.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let e = m.clone().symmetric_eigen();
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

/// Eigenvalues of a real symmetric matrix, sorted descending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `-Σ λ ln λ` over eigenvalues above the clipping threshold.
pub fn entropy_of_spectrum(eigs: &[f64]) -> f64 {
    eigs.iter()
        .filter(|&&l| l > POLICY.eig_clip)
        .map(|&l| -l * l.ln())
        .sum()
}

/// Von Neumann entropy of a Hermitian, unit-trace matrix.
pub fn matrix_entropy(m: &CMat) -> f64 {
    entropy_of_spectrum(&hermitian_eigenvalues(m))
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of vectors.
pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Deviation of `u` from unitarity, `max |u†u - 1|`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &CMat::identity(n, n))
}

/// Deviation of `m` from Hermiticity.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Positive square root of a Hermitian PSD matrix (negative modes clipped).
pub fn sqrt_psd(m: &CMat) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let d = CMat::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&l| C64::new(l.max(0.0).sqrt(), 0.0)),
    ));
    &vecs * d * vecs.adjoint()
}

/// Haar-random unit vector of dimension `dim`.
pub fn haar_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVec {
    let mut v = CVec::from_fn(dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let n = v.norm();
    v /= C64::new(n, 0.0);
    v
}

/// Haar-random unitary of dimension `dim` (QR of a Ginibre matrix with phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut out = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            out[(i, j)] *= ph;
        }
    }
    out
}

/// Outer product `|a⟩⟨b|`.
pub fn outer(a: &CVec, b: &CVec) -> CMat {
    a * b.adjoint()
}

/// Pauli matrices.
pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)],
    )
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

/// Hadamard gate.
pub fn hadamard() -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[c(s), c(s), c(s), c(-s)])
}

/// Two-qubit c-not with the first qubit as control.
pub fn cnot() -> CMat {
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = c(1.0);
    m[(1, 1)] = c(1.0);
    m[(2, 3)] = c(1.0);
    m[(3, 2)] = c(1.0);
    m
}

/// Real number as a complex scalar.
pub fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Computational basis vector `|i⟩` in dimension `dim`.
pub fn basis(dim: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    v[i] = c(1.0);
    v
}

/// Qubit state with Bloch angles `(theta, phi)`.
pub fn bloch_state(theta: f64, phi: f64) -> CVec {
    CVec::from_vec(vec![
        c((theta / 2.0).cos()),
        C64::from_polar((theta / 2.0).sin(), phi),
    ])
}
