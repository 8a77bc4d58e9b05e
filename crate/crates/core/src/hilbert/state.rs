use crate::error::{Error, Result};
use crate::hilbert::layout::SubsystemLayout;
use crate::linalg::{self, basis_vector, CMatrix, CVector, C64};
use crate::tolerance::Tolerances;

/// Pure state, or an unnormalised expansion coefficient when `normalized` is false.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: SubsystemLayout,
    amplitudes: CVector,
    normalized: bool,
}

impl StateVector {
    pub fn new(layout: SubsystemLayout, amplitudes: CVector) -> Result<Self> {
        Self::with_tolerances(layout, amplitudes, &Tolerances::default())
    }

    pub fn with_tolerances(layout: SubsystemLayout, amplitudes: CVector, tol: &Tolerances) -> Result<Self> {
        check_len(&layout, amplitudes.len())?;
        let n = amplitudes.norm();
        if (n - 1.0).abs() > tol.norm {
            return Err(Error::NotNormalized(n));
        }
        Ok(StateVector {
            layout,
            amplitudes,
            normalized: true,
        })
    }

    pub fn from_amplitudes(layout: SubsystemLayout, amplitudes: Vec<C64>) -> Result<Self> {
        Self::new(layout, CVector::from_vec(amplitudes))
    }

    /// Vector flagged as not necessarily of unit norm.
    pub fn unnormalized(layout: SubsystemLayout, amplitudes: CVector) -> Result<Self> {
        check_len(&layout, amplitudes.len())?;
        Ok(StateVector {
            layout,
            amplitudes,
            normalized: false,
        })
    }

    pub fn basis(layout: SubsystemLayout, index: usize) -> Result<Self> {
        let dim = layout.total_dim();
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        Ok(StateVector {
            layout,
            amplitudes: basis_vector(dim, index),
            normalized: true,
        })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Rescales to unit norm; fails on a vector of norm ≤ `threshold`.
    pub fn normalize(&self, threshold: f64) -> Result<Self> {
        let n = self.norm();
        if n <= threshold {
            return Err(Error::VanishingOverlap(n));
        }
        Ok(StateVector {
            layout: self.layout.clone(),
            amplitudes: self.amplitudes.unscale(n),
            normalized: true,
        })
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.layout != other.layout {
            return Err(Error::dim(self.dim(), other.dim(), "inner product layouts differ"));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|ψ⟩⟨ψ|` without normalisation.
    pub fn outer(&self) -> CMatrix {
        linalg::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn density(&self) -> Result<DensityOperator> {
        DensityOperator::from_pure(self)
    }

    /// Applies an operator on the full space; the normalisation flag is kept
    /// only when `op` is unitary within the default tolerance.
    pub fn apply(&self, op: &CMatrix) -> Result<Self> {
        if op.ncols() != self.dim() || op.nrows() != self.dim() {
            return Err(Error::dim(self.dim(), op.ncols(), "operator size"));
        }
        let amplitudes = op * &self.amplitudes;
        let normalized = self.normalized && (amplitudes.norm() - 1.0).abs() <= Tolerances::default().norm;
        Ok(StateVector {
            layout: self.layout.clone(),
            amplitudes,
            normalized,
        })
    }

    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        Ok(StateVector {
            layout: self.layout.concat(&other.layout)?,
            amplitudes: linalg::kron_vec(&self.amplitudes, &other.amplitudes),
            normalized: self.normalized && other.normalized,
        })
    }

    /// Reorders tensor factors to `order` (a permutation of the labels).
    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        let (layout, map) = permutation(&self.layout, order)?;
        let mut amplitudes = CVector::zeros(self.dim());
        for (old, &new) in map.iter().enumerate() {
            amplitudes[new] = self.amplitudes[old];
        }
        Ok(StateVector {
            layout,
            amplitudes,
            normalized: self.normalized,
        })
    }

    /// Projector comparison `‖ |a⟩⟨a| − |b⟩⟨b| ‖_F`, insensitive to global phase.
    pub fn projector_distance(&self, other: &StateVector) -> Result<f64> {
        if self.layout.dims() != other.layout.dims() {
            return Err(Error::dim(self.dim(), other.dim(), "projector comparison"));
        }
        Ok((self.outer() - other.outer()).norm())
    }
}

/// Mixed state: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    layout: SubsystemLayout,
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(layout: SubsystemLayout, matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(layout, matrix, &Tolerances::default())
    }

    pub fn with_tolerances(layout: SubsystemLayout, matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::dim(matrix.nrows(), matrix.ncols(), "density matrix must be square"));
        }
        check_len(&layout, matrix.nrows())?;
        let herm = linalg::hermiticity_residual(&matrix);
        if herm > tol.herm {
            return Err(Error::NotHermitian(herm));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol.norm || tr.im.abs() > tol.norm {
            return Err(Error::NotNormalized(tr.re));
        }
        let min = linalg::min_eigenvalue(&matrix);
        if min < -tol.psd {
            return Err(Error::NotPositive(min));
        }
        Ok(DensityOperator { layout, matrix })
    }

    pub fn from_pure(state: &StateVector) -> Result<Self> {
        if !state.is_normalized() {
            return Err(Error::NotNormalized(state.norm()));
        }
        Ok(DensityOperator {
            layout: state.layout.clone(),
            matrix: state.outer(),
        })
    }

    /// `Σ w_k |ψ_k⟩⟨ψ_k|` for a proper mixture.
    pub fn from_mixture<'a>(members: impl IntoIterator<Item = (f64, &'a StateVector)>) -> Result<Self> {
        let mut layout: Option<SubsystemLayout> = None;
        let mut matrix: Option<CMatrix> = None;
        for (w, s) in members {
            match &layout {
                None => layout = Some(s.layout.clone()),
                Some(l) if l != s.layout() => {
                    return Err(Error::InvalidEnsemble("members have different layouts".into()))
                }
                _ => {}
            }
            let term = s.outer().scale(w);
            matrix = Some(match matrix {
                None => term,
                Some(m) => m + term,
            });
        }
        match (layout, matrix) {
            (Some(l), Some(m)) => Self::new(l, m),
            _ => Err(Error::InvalidEnsemble("mixture has no members".into())),
        }
    }

    pub fn maximally_mixed(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        DensityOperator {
            layout,
            matrix: CMatrix::identity(d, d).unscale(d as f64),
        }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        linalg::purity(&self.matrix)
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<Self> {
        Ok(DensityOperator {
            layout: self.layout.concat(&other.layout)?,
            matrix: linalg::kron(&self.matrix, &other.matrix),
        })
    }

    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        let (layout, map) = permutation(&self.layout, order)?;
        let d = self.dim();
        let mut matrix = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                matrix[(map[i], map[j])] = self.matrix[(i, j)];
            }
        }
        Ok(DensityOperator { layout, matrix })
    }

    pub fn trace_distance(&self, other: &DensityOperator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::dim(self.dim(), other.dim(), "trace distance"));
        }
        Ok(linalg::trace_distance(&self.matrix, &other.matrix))
    }

    /// Expectation `tr(ρ op)` of an operator on the full space.
    pub fn expectation(&self, op: &CMatrix) -> Result<C64> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(Error::dim(self.dim(), op.nrows(), "operator size"));
        }
        Ok((&self.matrix * op).trace())
    }
}

fn check_len(layout: &SubsystemLayout, len: usize) -> Result<()> {
    let d = layout.total_dim();
    if d != len {
        return Err(Error::dim(d, len, format!("layout {layout}")));
    }
    Ok(())
}

/// New layout plus the old→new composite-index map.
fn permutation<S: AsRef<str>>(layout: &SubsystemLayout, order: &[S]) -> Result<(SubsystemLayout, Vec<usize>)> {
    if order.len() != layout.len() {
        return Err(Error::InvalidArgument(format!(
            "permutation lists {} labels, layout has {}",
            order.len(),
            layout.len()
        )));
    }
    let positions = layout.positions(order)?;
    let new_layout = layout.select(order)?;
    let split = layout.split(&positions);
    // group = all subsystems in the new order, so the group index is the new composite index
    let mut map = vec![0; layout.total_dim()];
    for new in 0..split.group_dim {
        map[split.full(new, 0)] = new;
    }
    Ok((new_layout, map))
}
