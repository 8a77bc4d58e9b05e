use crate::error::{Error, Result};
use crate::hilbert::{
    expand_in_basis, partial_scalar_product, partial_trace_operator, DensityOperator, StateRef,
    StateVector, SubsystemBasis,
};
use crate::linalg::{CMatrix, CVector};
use crate::observables::Projector;
use crate::tolerance::Tolerances;

/// Which of the two equivalent conditional-state formulas to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionalForm {
    /// `tr_S(ρ P) / tr(ρ P)`
    Plain,
    /// `tr_S(P ρ P) / tr(P ρ P)`
    Sandwich,
}

/// State of the opposite subsystems conditioned on (relative to) the event
/// `p` on its support.
pub fn conditional_state<'a>(
    state: impl Into<StateRef<'a>>,
    p: &Projector,
    form: ConditionalForm,
    tol: &Tolerances,
) -> Result<DensityOperator> {
    let state = state.into();
    let layout = state.layout();
    let rho = state.density_matrix();
    let pe = p.embed_into(layout)?;
    let traced = p.support().labels();
    let op = match form {
        ConditionalForm::Plain => &rho * &pe,
        ConditionalForm::Sandwich => &pe * &rho * &pe,
    };
    let w = op.trace().re;
    if w <= tol.weight {
        return Err(Error::UndefinedConditional(w));
    }
    let (reduced, remaining) = partial_trace_operator(&op, layout, &traced)?;
    DensityOperator::new(remaining, reduced.unscale(w))
}

/// Normalised partial scalar product `⟨φ|_S Ψ⟩ / ‖⟨φ|_S Ψ⟩‖`.
pub fn relative_state(psi: &StateVector, label: &str, subject: &CVector, tol: &Tolerances) -> Result<StateVector> {
    check_unit(subject)?;
    let overlap = partial_scalar_product(subject, label, psi)?;
    let n = overlap.norm();
    if n <= tol.weight {
        return Err(Error::VanishingOverlap(n));
    }
    overlap.normalize(0.0)
}

/// The relative state of `Ψ` with respect to `|φ⟩_S` computed three ways.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeStateForms {
    /// Normalised coefficient of `|φ⟩` in an expansion over a basis containing it.
    pub basis_expansion: StateVector,
    /// Normalised partial scalar product.
    pub partial_scalar_product: StateVector,
    /// `tr_S(|Ψ⟩⟨Ψ| |φ⟩⟨φ|) / tr(…)`
    pub partial_trace: DensityOperator,
}

impl RelativeStateForms {
    /// Largest pairwise Frobenius distance between the three forms, compared
    /// as projectors.
    pub fn max_disagreement(&self) -> f64 {
        let a = self.basis_expansion.outer();
        let b = self.partial_scalar_product.outer();
        let c: &CMatrix = self.partial_trace.matrix();
        (&a - &b).norm().max((&a - c).norm()).max((&b - c).norm())
    }
}

pub fn relative_state_forms(
    psi: &StateVector,
    label: &str,
    subject: &CVector,
    tol: &Tolerances,
) -> Result<RelativeStateForms> {
    check_unit(subject)?;
    let dim = psi.layout().dim_of(label)?;
    let basis = SubsystemBasis::with_tolerances(label, dim, vec![subject.clone()], tol)?.completed();
    let coefficients = expand_in_basis(psi, &basis)?;
    let first = &coefficients[0].1;
    if first.norm() <= tol.weight {
        return Err(Error::VanishingOverlap(first.norm()));
    }
    let basis_expansion = first.normalize(0.0)?;
    let partial_scalar_product = relative_state(psi, label, subject, tol)?;
    let support = psi.layout().select(&[label])?;
    let p = Projector::rank_one(support, subject)?;
    let partial_trace = conditional_state(psi, &p, ConditionalForm::Plain, tol)?;
    Ok(RelativeStateForms {
        basis_expansion,
        partial_scalar_product,
        partial_trace,
    })
}

fn check_unit(v: &CVector) -> Result<()> {
    let n = v.norm();
    if (n - 1.0).abs() > Tolerances::default().norm {
        return Err(Error::NotNormalized(n));
    }
    Ok(())
}
