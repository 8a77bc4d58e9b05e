use crate::error::{Error, Result};
use crate::hilbert::basis::SubsystemBasis;
use crate::hilbert::layout::SubsystemLayout;
use crate::hilbert::state::{DensityOperator, StateVector};
use crate::linalg::{CMatrix, CVector, C64};

/// Borrowed pure or mixed state.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityOperator),
}

impl<'a> From<&'a StateVector> for StateRef<'a> {
    fn from(s: &'a StateVector) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a> From<&'a DensityOperator> for StateRef<'a> {
    fn from(s: &'a DensityOperator) -> Self {
        StateRef::Mixed(s)
    }
}

impl StateRef<'_> {
    pub fn layout(&self) -> &SubsystemLayout {
        match self {
            StateRef::Pure(s) => s.layout(),
            StateRef::Mixed(r) => r.layout(),
        }
    }

    pub fn density_matrix(&self) -> CMatrix {
        match self {
            StateRef::Pure(s) => s.outer(),
            StateRef::Mixed(r) => r.matrix().clone(),
        }
    }
}

/// Partial trace of an arbitrary operator; returns the reduced operator and
/// the layout of the remaining subsystems (in layout order).
pub fn partial_trace_operator<S: AsRef<str>>(
    op: &CMatrix,
    layout: &SubsystemLayout,
    traced: &[S],
) -> Result<(CMatrix, SubsystemLayout)> {
    let d = layout.total_dim();
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::dim(d, op.nrows(), "operator size for partial trace"));
    }
    let remaining = layout.without(traced)?;
    let kept = layout.positions(&remaining.labels())?;
    let split = layout.split(&kept);
    let mut out = CMatrix::zeros(split.group_dim, split.group_dim);
    for a in 0..split.group_dim {
        for b in 0..split.group_dim {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..split.rest_dim {
                acc += op[(split.full(a, r), split.full(b, r))];
            }
            out[(a, b)] = acc;
        }
    }
    Ok((out, remaining))
}

/// Reduced density operator on the subsystems not listed in `traced`.
pub fn partial_trace<'a, S: AsRef<str>>(state: impl Into<StateRef<'a>>, traced: &[S]) -> Result<DensityOperator> {
    match state.into() {
        StateRef::Mixed(rho) => {
            let (m, layout) = partial_trace_operator(rho.matrix(), rho.layout(), traced)?;
            DensityOperator::new(layout, m)
        }
        StateRef::Pure(psi) => {
            if !psi.is_normalized() {
                return Err(Error::NotNormalized(psi.norm()));
            }
            let layout = psi.layout();
            let remaining = layout.without(traced)?;
            let kept = layout.positions(&remaining.labels())?;
            let split = layout.split(&kept);
            let amps = psi.amplitudes();
            // reduced = M M† with M[a, r] = ψ[(a, r)]
            let m = CMatrix::from_fn(split.group_dim, split.rest_dim, |a, r| amps[split.full(a, r)]);
            DensityOperator::new(remaining, &m * m.adjoint())
        }
    }
}

/// `⟨bra|_S |ψ⟩` for a vector on subsystem `label`; the result lives on the
/// remaining subsystems and is flagged unnormalised.
pub fn partial_scalar_product(bra: &CVector, label: &str, state: &StateVector) -> Result<StateVector> {
    partial_scalar_product_on(bra, &[label], state)
}

/// Same as [`partial_scalar_product`] for a bra on a group of subsystems
/// (group digits in the order given).
pub fn partial_scalar_product_on<S: AsRef<str>>(
    bra: &CVector,
    labels: &[S],
    state: &StateVector,
) -> Result<StateVector> {
    let layout = state.layout();
    let positions = layout.positions(labels)?;
    let remaining = layout.without(labels)?;
    let split = layout.split(&positions);
    if bra.len() != split.group_dim {
        return Err(Error::dim(split.group_dim, bra.len(), "bra dimension"));
    }
    let amps = state.amplitudes();
    let out = CVector::from_fn(split.rest_dim, |r, _| {
        (0..split.group_dim)
            .map(|s| bra[s].conj() * amps[split.full(s, r)])
            .sum()
    });
    StateVector::unnormalized(remaining, out)
}

/// Coefficients `c_n = ⟨n|_S ψ` of `|ψ⟩ = Σ_n c_n ⊗ |n⟩_S` over the completed basis.
/// Coefficients are unnormalised and live on the opposite subsystems.
pub fn expand_in_basis(state: &StateVector, basis: &SubsystemBasis) -> Result<Vec<(usize, StateVector)>> {
    let dim = state.layout().dim_of(basis.subsystem())?;
    if dim != basis.dim() {
        return Err(Error::dim(dim, basis.dim(), "basis dimension"));
    }
    let full = if basis.is_complete() { basis.clone() } else { basis.completed() };
    full.vectors()
        .iter()
        .enumerate()
        .map(|(n, v)| Ok((n, partial_scalar_product(v, basis.subsystem(), state)?)))
        .collect()
}

/// Reassembles `Σ_n c_n ⊗ |n⟩_S` in the original layout order.
pub fn resum_expansion(
    layout: &SubsystemLayout,
    basis: &SubsystemBasis,
    coefficients: &[(usize, StateVector)],
) -> Result<CVector> {
    let full = if basis.is_complete() { basis.clone() } else { basis.completed() };
    let pos = layout.position(basis.subsystem())?;
    let split = layout.split(&[pos]);
    let mut out = CVector::zeros(layout.total_dim());
    for (n, coeff) in coefficients {
        let v = &full.vectors()[*n];
        let c = coeff.amplitudes();
        for s in 0..split.group_dim {
            for r in 0..split.rest_dim {
                out[split.full(s, r)] += v[s] * c[r];
            }
        }
    }
    Ok(out)
}

/// `I ⊗ … ⊗ op_S ⊗ … ⊗ I` for an operator on subsystem `label`.
pub fn embed_operator(op: &CMatrix, label: &str, layout: &SubsystemLayout) -> Result<CMatrix> {
    embed_operator_on(op, &[label], layout)
}

/// Embeds an operator acting on a group of subsystems (group index in the
/// order given, leftmost slowest); the group need not be contiguous.
pub fn embed_operator_on<S: AsRef<str>>(op: &CMatrix, labels: &[S], layout: &SubsystemLayout) -> Result<CMatrix> {
    let positions = layout.positions(labels)?;
    let split = layout.split(&positions);
    if op.nrows() != split.group_dim || op.ncols() != split.group_dim {
        return Err(Error::dim(split.group_dim, op.nrows(), "embedded operator size"));
    }
    let d = layout.total_dim();
    let mut out = CMatrix::zeros(d, d);
    for g1 in 0..split.group_dim {
        for g2 in 0..split.group_dim {
            let v = op[(g1, g2)];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            for r in 0..split.rest_dim {
                out[(split.full(g1, r), split.full(g2, r))] = v;
            }
        }
    }
    Ok(out)
}
