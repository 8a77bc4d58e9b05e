use crate::error::Result;
use crate::hilbert::{DensityOperator, StateVector, SubsystemLayout};
use crate::linalg::{self, CMatrix};

#[derive(Debug, Clone, PartialEq)]
pub enum BranchComponent {
    Pure(StateVector),
    Mixed(DensityOperator),
}

impl BranchComponent {
    pub fn layout(&self) -> &SubsystemLayout {
        match self {
            BranchComponent::Pure(s) => s.layout(),
            BranchComponent::Mixed(r) => r.layout(),
        }
    }

    pub fn density_matrix(&self) -> CMatrix {
        match self {
            BranchComponent::Pure(s) => s.outer(),
            BranchComponent::Mixed(r) => r.matrix().clone(),
        }
    }

    pub fn as_pure(&self) -> Option<&StateVector> {
        match self {
            BranchComponent::Pure(s) => Some(s),
            BranchComponent::Mixed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub index: usize,
    pub weight: f64,
    pub component: BranchComponent,
}

/// Weighted, normalised components labelled by the branch index of a
/// pointer observable or decomposition of the identity. Weight that fell
/// below the drop threshold is kept in `dropped_weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchDecomposition {
    pub pointer_subsystem: String,
    pub branches: Vec<Branch>,
    pub dropped_weight: f64,
}

impl BranchDecomposition {
    pub fn new(pointer_subsystem: String, branches: Vec<Branch>, dropped_weight: f64) -> Self {
        BranchDecomposition {
            pointer_subsystem,
            branches,
            dropped_weight,
        }
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.weight).collect()
    }

    /// Kept weights plus dropped weight.
    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(|b| b.weight).sum::<f64>() + self.dropped_weight
    }

    pub fn branch(&self, index: usize) -> Option<&Branch> {
        self.branches.iter().find(|b| b.index == index)
    }

    /// `Σ_k w_k ρ_k`
    pub fn resum(&self) -> Option<CMatrix> {
        let first = self.branches.first()?;
        let d = first.component.layout().total_dim();
        Some(
            self.branches
                .iter()
                .fold(CMatrix::zeros(d, d), |acc, b| acc + b.component.density_matrix().scale(b.weight)),
        )
    }

    /// The proper mixture of the branch components, renormalised over the
    /// kept weight.
    pub fn proper_mixture(&self) -> Result<DensityOperator> {
        let m = self
            .resum()
            .ok_or_else(|| crate::Error::InvalidEnsemble("decomposition has no branches".into()))?;
        let kept: f64 = self.branches.iter().map(|b| b.weight).sum();
        DensityOperator::new(self.branches[0].component.layout().clone(), m.unscale(kept))
    }

    /// Smallest and largest trace distance between two distinct components.
    /// `None` with fewer than two branches.
    pub fn pairwise_trace_distance_range(&self) -> Option<(f64, f64)> {
        if self.branches.len() < 2 {
            return None;
        }
        let mats: Vec<CMatrix> = self.branches.iter().map(|b| b.component.density_matrix()).collect();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 0..mats.len() {
            for j in i + 1..mats.len() {
                let d = linalg::trace_distance(&mats[i], &mats[j]);
                lo = lo.min(d);
                hi = hi.max(d);
            }
        }
        Some((lo, hi))
    }
}
