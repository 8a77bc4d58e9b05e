//! Dense complex matrix helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Kronecker product with the left factor's index varying slowest.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

/// `|a⟩⟨b|`
pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

pub fn basis_vector(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = ONE;
    v
}

pub fn trace(m: &CMatrix) -> C64 {
    m.trace()
}

/// Frobenius norm.
pub fn norm(m: &CMatrix) -> f64 {
    m.norm()
}

pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn unitarity_residual(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (u.adjoint() * u - identity(u.nrows())).norm()
}

/// Eigenvalues (ascending) and matching eigenvector columns of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// Orthogonalises `candidate` against `basis` (two passes) and returns the
/// normalised remainder if its norm exceeds `threshold`.
pub fn orthogonalize(basis: &[CVector], candidate: &CVector, threshold: f64) -> Option<CVector> {
    let mut v = candidate.clone();
    for _ in 0..2 {
        for b in basis {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
    }
    let n = v.norm();
    (n > threshold).then(|| v.unscale(n))
}

/// Extends an orthonormal list to a full orthonormal basis of `dim`
/// by Gram–Schmidt over the supplied candidates, in order.
pub fn complete_basis<I>(mut basis: Vec<CVector>, dim: usize, candidates: I) -> Vec<CVector>
where
    I: IntoIterator<Item = CVector>,
{
    for cand in candidates {
        if basis.len() >= dim {
            break;
        }
        if let Some(v) = orthogonalize(&basis, &cand, 1e-6) {
            basis.push(v);
        }
    }
    basis
}

/// Completes with canonical basis vectors `e_0, e_1, …`.
pub fn complete_canonical(basis: Vec<CVector>, dim: usize) -> Vec<CVector> {
    complete_basis(basis, dim, (0..dim).map(|i| basis_vector(dim, i)))
}

/// Largest Frobenius deviation of the Gram matrix from the identity.
pub fn orthonormality_residual(vectors: &[CVector]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let expected = if i == j { ONE } else { ZERO };
            worst = worst.max((a.dotc(b) - expected).norm());
        }
    }
    worst
}

/// Trace distance `½‖a − b‖₁` between two Hermitian matrices.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(&(a - b));
    0.5 * values.iter().map(|v| v.abs()).sum::<f64>()
}

pub fn purity(rho: &CMatrix) -> f64 {
    (rho * rho).trace().re
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_puts_left_factor_slowest() {
        let a = basis_vector(2, 1);
        let b = basis_vector(3, 2);
        let ab = kron_vec(&a, &b);
        assert_eq!(ab[3 + 2], ONE);
        assert!((ab.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn canonical_completion_is_orthonormal() {
        let v = CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8), ZERO]);
        let basis = complete_canonical(vec![v.clone()], 3);
        assert_eq!(basis.len(), 3);
        assert!(orthonormality_residual(&basis) < 1e-14);
        assert_eq!(basis[0], v);
    }

    #[test]
    fn eigen_is_sorted() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(3.0, 0.0), c(-1.0, 0.0), c(0.5, 0.0)]));
        let (vals, vecs) = hermitian_eigen(&m);
        assert_eq!(vals.len(), 3);
        assert!(vals[0] < vals[1] && vals[1] < vals[2]);
        assert!((vecs.column(0)[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_of_orthogonal_pure_states_is_one() {
        let a = outer(&basis_vector(2, 0), &basis_vector(2, 0));
        let b = outer(&basis_vector(2, 1), &basis_vector(2, 1));
        assert!((trace_distance(&a, &b) - 1.0).abs() < 1e-12);
    }
}
