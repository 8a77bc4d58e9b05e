/// Numerical tolerances shared by validation and branch bookkeeping.
///
/// Defaults give double-precision headroom for total dimensions up to a few
/// hundred.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Unit-norm and unit-trace tolerance.
    pub norm: f64,
    /// Hermiticity tolerance (Frobenius norm of `M - M†`).
    pub herm: f64,
    /// Orthonormality tolerance for bases and unitaries.
    pub orth: f64,
    /// Most negative eigenvalue accepted for a density operator.
    pub psd: f64,
    /// Eigenvalues closer than this are merged into one spectral branch.
    pub eig: f64,
    /// Branch weights at or below this are dropped.
    pub weight: f64,
    /// Idempotency / orthogonality / completeness tolerance for projectors.
    pub projector: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            norm: 1e-10,
            herm: 1e-10,
            orth: 1e-10,
            psd: 1e-9,
            eig: 1e-8,
            weight: 1e-12,
            projector: 1e-9,
        }
    }
}
