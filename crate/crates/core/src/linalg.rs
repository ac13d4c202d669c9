//! Small dense complex linear algebra used throughout the simulator.
//!
//! Manifold dimensions are tiny (8 for `I = 3/2`), so everything here is
//! dense `nalgebra` with no attempt at sparsity.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns, in
/// the same order as the eigenvalues.
pub fn hermitian_eigen(h: &DMatrix<C64>) -> (DVector<f64>, DMatrix<C64>) {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Largest absolute deviation from Hermiticity, `max |H - H†|`.
pub fn hermiticity_residual(h: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest absolute deviation of `U U† ` from the identity.
pub fn unitarity_residual(u: &DMatrix<C64>) -> f64 {
    let prod = u * u.adjoint();
    let n = u.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((prod[(i, j)] - expect).norm());
        }
    }
    worst
}

fn one_norm(a: &DMatrix<C64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

// scaling threshold for the diagonal Pade(3,3) approximant; the
// truncation error ~ |x|^7 / 100800 is below f64 epsilon here
const PADE_THETA: f64 = 0.05;

/// Matrix exponential of an anti-Hermitian matrix, `exp(A)` with `A† = -A`.
///
/// Uses the diagonal Padé(3,3) approximant with scaling and squaring. For
/// anti-Hermitian arguments the diagonal approximant is exactly unitary,
/// so repeated application cannot leak norm (only f64 roundoff remains).
pub fn expm_antihermitian(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = one_norm(a);
    let s = if norm > PADE_THETA {
        (norm / PADE_THETA).log2().ceil() as u32
    } else {
        0
    };
    let scale = C64::new(1.0 / (1u64 << s) as f64, 0.0);
    let a1 = a * scale;
    let a2 = &a1 * &a1;
    let a3 = &a2 * &a1;

    let eye = DMatrix::<C64>::identity(n, n);
    let half = C64::new(0.5, 0.0);
    let tenth = C64::new(0.1, 0.0);
    let c3 = C64::new(1.0 / 120.0, 0.0);
    let odd = &a1 * half + &a3 * c3;
    let even = &eye + &a2 * tenth;
    let num = &even + &odd;
    let den = &even - &odd;

    let mut u = den
        .lu()
        .solve(&num)
        .expect("Pade denominator is nonsingular for anti-Hermitian input");
    for _ in 0..s {
        u = &u * &u;
    }
    u
}
