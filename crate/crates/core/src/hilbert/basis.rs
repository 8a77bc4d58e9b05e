use crate::error::{Error, Result};
use crate::linalg::{self, CVector};
use crate::tolerance::Tolerances;

/// Orthonormal (sub-)basis of one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemBasis {
    subsystem: String,
    dim: usize,
    vectors: Vec<CVector>,
}

impl SubsystemBasis {
    pub fn new(subsystem: impl Into<String>, dim: usize, vectors: Vec<CVector>) -> Result<Self> {
        Self::with_tolerances(subsystem, dim, vectors, &Tolerances::default())
    }

    pub fn with_tolerances(
        subsystem: impl Into<String>,
        dim: usize,
        vectors: Vec<CVector>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if vectors.len() > dim {
            return Err(Error::InvalidArgument(format!(
                "{} basis vectors exceed dimension {dim}",
                vectors.len()
            )));
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::dim(dim, v.len(), "basis vector length"));
            }
        }
        let residual = linalg::orthonormality_residual(&vectors);
        if residual > tol.orth {
            return Err(Error::NotOrthonormal(residual));
        }
        Ok(SubsystemBasis {
            subsystem: subsystem.into(),
            dim,
            vectors,
        })
    }

    pub fn canonical(subsystem: impl Into<String>, dim: usize) -> Self {
        SubsystemBasis {
            subsystem: subsystem.into(),
            dim,
            vectors: (0..dim).map(|i| linalg::basis_vector(dim, i)).collect(),
        }
    }

    pub fn subsystem(&self) -> &str {
        &self.subsystem
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.vectors.len() == self.dim
    }

    /// Extends to a complete basis by Gram–Schmidt over `e_0, e_1, …`.
    /// The given vectors keep their indices; added vectors follow.
    pub fn completed(&self) -> Self {
        SubsystemBasis {
            subsystem: self.subsystem.clone(),
            dim: self.dim,
            vectors: linalg::complete_canonical(self.vectors.clone(), self.dim),
        }
    }
}
