//! Seeded random states, unitaries and operators.
//!
//! Everything is drawn from [`ChaCha8Rng`] so that a seed pins down every
//! sample on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{hermitian_eigen, outer, CMatrix, CVector, C64};

pub type SimRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed (SplitMix64 step).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_vector(rng: &mut impl Rng, dim: usize) -> CVector {
    CVector::from_fn(dim, |_, _| gaussian(rng))
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random unit vector.
pub fn unit_vector(rng: &mut impl Rng, dim: usize) -> CVector {
    loop {
        let v = gaussian_vector(rng, dim);
        let n = v.norm();
        if n > 1e-8 {
            return v.unscale(n);
        }
    }
}

/// Haar-random unitary (QR of a Ginibre matrix with phase-fixed R).
pub fn unitary(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let z = gaussian_matrix(rng, dim, dim);
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn hermitian(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let g = gaussian_matrix(rng, dim, dim);
    (&g + g.adjoint()).scale(0.5)
}

/// Random density matrix of the given rank (Wishart construction).
pub fn density_matrix(rng: &mut impl Rng, dim: usize, rank: usize) -> CMatrix {
    let g = gaussian_matrix(rng, dim, rank.max(1));
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho.unscale(tr)
}

/// Random orthogonal projector of rank `rank` in dimension `dim`.
pub fn projector(rng: &mut impl Rng, dim: usize, rank: usize) -> CMatrix {
    let u = unitary(rng, dim);
    let mut p = CMatrix::zeros(dim, dim);
    for j in 0..rank.min(dim) {
        let col = u.column(j).into_owned();
        p += outer(&col, &col);
    }
    p
}

/// Splits `dim` into `blocks` random orthogonal projectors summing to the identity.
/// Each block gets at least rank one.
pub fn decomposition_of_identity(rng: &mut impl Rng, dim: usize, blocks: usize) -> Vec<CMatrix> {
    let blocks = blocks.clamp(1, dim);
    let mut ranks = vec![1usize; blocks];
    for _ in blocks..dim {
        let k = rng.random_range(0..blocks);
        ranks[k] += 1;
    }
    let u = unitary(rng, dim);
    let mut out = Vec::with_capacity(blocks);
    let mut col = 0;
    for r in ranks {
        let mut p = CMatrix::zeros(dim, dim);
        for _ in 0..r {
            let v = u.column(col).into_owned();
            p += outer(&v, &v);
            col += 1;
        }
        out.push(p);
    }
    out
}

/// Random Hermitian matrix with exactly `distinct` distinct eigenvalues
/// (integers 0..distinct, so spectral branches are well separated).
pub fn degenerate_hermitian(rng: &mut impl Rng, dim: usize, distinct: usize) -> CMatrix {
    let blocks = decomposition_of_identity(rng, dim, distinct);
    let mut h = CMatrix::zeros(dim, dim);
    for (k, p) in blocks.iter().enumerate() {
        h += p.scale(k as f64);
    }
    h
}

/// Unitary acting as `u` inside `range(p)` and as the identity outside,
/// for a projector `p`.
pub fn unitary_within(rng: &mut impl Rng, p: &CMatrix) -> CMatrix {
    let dim = p.nrows();
    let (values, vectors) = hermitian_eigen(p);
    let range: Vec<CVector> = values
        .iter()
        .zip(vectors.column_iter())
        .filter(|(v, _)| **v > 0.5)
        .map(|(_, c)| c.into_owned())
        .collect();
    let r = range.len();
    let local = unitary(rng, r);
    let mut w = CMatrix::identity(dim, dim) - p;
    for i in 0..r {
        for j in 0..r {
            w += outer(&range[i], &range[j]) * local[(i, j)];
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_residual;

    #[test]
    fn random_unitary_is_unitary() {
        let mut r = rng(7);
        for d in 1..6 {
            assert!(unitarity_residual(&unitary(&mut r, d)) < 1e-12);
        }
    }

    #[test]
    fn decomposition_sums_to_identity() {
        let mut r = rng(3);
        let ps = decomposition_of_identity(&mut r, 5, 3);
        let sum = ps.iter().fold(CMatrix::zeros(5, 5), |acc, p| acc + p);
        assert!((sum - CMatrix::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn unitary_within_preserves_range() {
        let mut r = rng(11);
        let p = projector(&mut r, 4, 2);
        let w = unitary_within(&mut r, &p);
        assert!(unitarity_residual(&w) < 1e-12);
        let leak = (CMatrix::identity(4, 4) - &p) * &w * &p;
        assert!(leak.norm() < 1e-12);
    }

    #[test]
    fn same_seed_same_draws() {
        let a = unit_vector(&mut rng(5), 4);
        let b = unit_vector(&mut rng(5), 4);
        assert_eq!(a, b);
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
    }
}
