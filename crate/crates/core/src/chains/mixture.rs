use crate::chains::branches::{Branch, BranchComponent, BranchDecomposition};
use crate::chains::relative::{conditional_state, ConditionalForm};
use crate::error::{Error, Result};
use crate::hilbert::{
    embed_operator_on, partial_trace, partial_trace_operator, DensityOperator, StateRef, StateVector,
};
use crate::linalg::CMatrix;
use crate::observables::{DecompositionOfIdentity, Projector, SpectralObservable};
use crate::premeasurement::Premeasurement;
use crate::tolerance::Tolerances;

/// Runs `pm1` on `|φ⟩` and then `pm2`, whose measured observable must be
/// `pm1`'s pointer observable (on the instrument alone or lifted to
/// object+instrument). Returns the intermediate state on `pm1`'s layout and
/// the final state on `pm1.layout ⊗ pm2.instrument`.
pub fn run_two_link_chain(
    pm1: &Premeasurement,
    pm2: &Premeasurement,
    object_state: &StateVector,
) -> Result<(StateVector, StateVector)> {
    let tol = Tolerances::default();
    let intermediate = pm1.evolve(object_state)?;
    let first = pm1.layout();
    let second_object = pm2.object().labels();
    for s in pm2.object().subsystems() {
        if first.dim_of(&s.label).ok() != Some(s.dim) {
            return Err(Error::ObservableMismatch(format!(
                "second link measures `{}`, which is not part of the first link",
                s.label
            )));
        }
    }
    if pm2.measured().len() != pm1.pointer().len() {
        return Err(Error::ObservableMismatch(format!(
            "second link measures {} branches, first pointer has {}",
            pm2.measured().len(),
            pm1.pointer().len()
        )));
    }
    let pointer: Vec<CMatrix> = pm1
        .pointer()
        .branches()
        .iter()
        .map(|b| b.projector.embed_into(first))
        .collect::<Result<_>>()?;
    for b in pm2.measured().branches() {
        let lifted = embed_operator_on(b.projector.matrix(), &second_object, first)?;
        if !pointer.iter().any(|f| (f - &lifted).norm() <= tol.projector) {
            return Err(Error::ObservableMismatch(format!(
                "measured branch {} of the second link is not a pointer position of the first",
                b.index
            )));
        }
    }
    let with_ready = intermediate.tensor(pm2.ready_state())?;
    let full = with_ready.layout().clone();
    let u = embed_operator_on(pm2.unitary(), &pm2.layout().labels(), &full)?;
    let final_state = StateVector::new(full, u * with_ready.amplitudes())?;
    Ok((intermediate, final_state))
}

/// Decomposes the reduced state of the non-subject subsystems along a
/// decomposition of the identity on the subject subsystems:
/// `w_n = tr(ρ P_n)`, `ρ^n = tr_S(ρ P_n) / w_n`.
pub fn improper_mixture<'a>(
    state: impl Into<StateRef<'a>>,
    d: &DecompositionOfIdentity,
    tol: &Tolerances,
) -> Result<BranchDecomposition> {
    d.validate(tol)?;
    let state = state.into();
    let layout = state.layout();
    let rho = state.density_matrix();
    let subject = d.support().labels();
    for s in d.support().subsystems() {
        let dim = layout.dim_of(&s.label)?;
        if dim != s.dim {
            return Err(Error::dim(s.dim, dim, format!("subsystem `{}`", s.label)));
        }
    }
    let mut branches = Vec::new();
    let mut dropped = 0.0;
    for (n, p) in d.projectors().iter().enumerate() {
        let pe = embed_operator_on(p, &subject, layout)?;
        let op = &rho * pe;
        let w = op.trace().re;
        if w > tol.weight {
            let (reduced, remaining) = partial_trace_operator(&op, layout, &subject)?;
            let component = DensityOperator::with_tolerances(remaining, reduced.unscale(w), tol)?;
            branches.push(Branch {
                index: n,
                weight: w,
                component: BranchComponent::Mixed(component),
            });
        } else {
            dropped += w.max(0.0);
        }
    }
    Ok(BranchDecomposition::new(d.support().joined_label(), branches, dropped))
}

/// Relative states of everything outside the pointer's support, one per
/// pointer position with positive weight. Branch indices are the pointer's.
pub fn world_branches(state: &StateVector, pointer: &SpectralObservable, tol: &Tolerances) -> Result<BranchDecomposition> {
    let mut decomposition = improper_mixture(state, &pointer.decomposition(), tol)?;
    for b in &mut decomposition.branches {
        b.index = pointer.branches()[b.index].index;
    }
    Ok(decomposition)
}

/// The conditional state of the remaining subsystem computed twice: tracing
/// the event's support and `extra` at once, and first reducing away `extra`.
pub fn tripartite_conditional_consistency<S: AsRef<str>>(
    rho: &DensityOperator,
    p: &Projector,
    extra: &[S],
    tol: &Tolerances,
) -> Result<(DensityOperator, DensityOperator)> {
    let layout = rho.layout();
    let pe = p.embed_into(layout)?;
    let op = rho.matrix() * pe;
    let w = op.trace().re;
    if w <= tol.weight {
        return Err(Error::UndefinedConditional(w));
    }
    let mut traced: Vec<String> = p.support().labels().iter().map(|s| s.to_string()).collect();
    traced.extend(extra.iter().map(|s| s.as_ref().to_string()));
    let (reduced, remaining) = partial_trace_operator(&op, layout, &traced)?;
    let via_all = DensityOperator::new(remaining, reduced.unscale(w))?;
    let rho_ab = partial_trace(rho, extra)?;
    let via_reduced = conditional_state(&rho_ab, p, ConditionalForm::Plain, tol)?;
    Ok((via_all, via_reduced))
}

/// Largest Frobenius norm of an off-diagonal block `F^j ρ F^k` (`j ≠ k`) of a
/// state on `layout` with respect to an observable on part of it.
pub fn max_off_diagonal_block(rho: &DensityOperator, observable: &SpectralObservable) -> Result<f64> {
    let f: Vec<CMatrix> = observable
        .branches()
        .iter()
        .map(|b| b.projector.embed_into(rho.layout()))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for (j, fj) in f.iter().enumerate() {
        for (k, fk) in f.iter().enumerate() {
            if j != k {
                worst = worst.max((fj * rho.matrix() * fk).norm());
            }
        }
    }
    Ok(worst)
}
