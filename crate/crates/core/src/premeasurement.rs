//! Premeasurement unitaries and the numerical checks of their defining
//! conditions.
//!
//! An ideal premeasurement of `O_A = Σ_k o_k E^k` with pointer states
//! `|φ^k⟩_B` and ready state `|r⟩_B` acts on the initial sector as
//! `U(|φ⟩ ⊗ |r⟩) = Σ_k E^k|φ⟩ ⊗ |φ^k⟩`. Outside that sector the unitary is
//! fixed by a deterministic Gram–Schmidt completion ([`Completion`]); no
//! physical quantity computed here depends on that choice.

use rand::Rng;

use crate::chains::{Branch, BranchComponent, BranchDecomposition};
use crate::error::{Error, Result};
use crate::hilbert::{DensityOperator, StateVector, SubsystemBasis, SubsystemLayout};
use crate::linalg::{self, basis_vector, kron, kron_vec, outer, CMatrix, CVector, C64};
use crate::observables::SpectralObservable;
use crate::random;
use crate::tolerance::Tolerances;

/// Default pass threshold of the condition checks.
pub const CHECK_TOLERANCE: f64 = 1e-9;

/// How the unitary is completed outside the initial sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Completion {
    /// Gram–Schmidt over canonical basis vectors.
    #[default]
    Canonical,
    /// Gram–Schmidt over Gaussian random vectors drawn from the seed.
    Seeded(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PremeasurementKind {
    Ideal,
    Exact,
    /// Unitary supplied by the caller; the defining conditions are not implied.
    Custom,
}

/// Per-branch dressing `V_A^k ⊗ W_B^k` applied after an ideal premeasurement.
/// `W_B^k` must map the range of its pointer projector into itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Dressing {
    pub object: CMatrix,
    pub instrument: CMatrix,
}

impl Dressing {
    pub fn identity(object_dim: usize, instrument_dim: usize) -> Self {
        Dressing {
            object: linalg::identity(object_dim),
            instrument: linalg::identity(instrument_dim),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub condition: String,
    pub max_residual: f64,
    pub samples: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl ConditionReport {
    fn new(condition: &str, max_residual: f64, samples: usize) -> Self {
        ConditionReport {
            condition: condition.to_string(),
            max_residual,
            samples,
            tolerance: CHECK_TOLERANCE,
            pass: max_residual <= CHECK_TOLERANCE,
        }
    }

    /// Re-judges the same residual against another tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.pass = self.max_residual <= tolerance;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Premeasurement {
    object: SubsystemLayout,
    instrument: SubsystemLayout,
    layout: SubsystemLayout,
    measured: SpectralObservable,
    pointer: SpectralObservable,
    pointer_states: Vec<CVector>,
    ready: StateVector,
    unitary: CMatrix,
    index_map: Vec<usize>,
    kind: PremeasurementKind,
}

impl Premeasurement {
    /// Ideal premeasurement with measured branch `k` registered by pointer branch `k`.
    pub fn ideal(
        measured: SpectralObservable,
        pointer: SpectralObservable,
        pointer_states: &SubsystemBasis,
        ready: StateVector,
    ) -> Result<Self> {
        let map = (0..measured.len()).collect();
        Self::ideal_with(measured, pointer, pointer_states, ready, map, Completion::Canonical)
    }

    /// Ideal premeasurement with an explicit measured→pointer branch map.
    /// `pointer_states.vectors()[k]` is the pointer state of measured branch `k`
    /// and must lie in the range of pointer projector `index_map[k]`.
    pub fn ideal_with(
        measured: SpectralObservable,
        pointer: SpectralObservable,
        pointer_states: &SubsystemBasis,
        ready: StateVector,
        index_map: Vec<usize>,
        completion: Completion,
    ) -> Result<Self> {
        let tol = Tolerances::default();
        let object = measured.support().clone();
        let instrument = pointer.support().clone();
        if instrument.len() != 1 || instrument.labels()[0] != pointer_states.subsystem() {
            return Err(Error::InvalidArgument(format!(
                "pointer states live on `{}` but the pointer observable acts on {}",
                pointer_states.subsystem(),
                instrument
            )));
        }
        let layout = object.concat(&instrument)?;
        let d_obj = object.total_dim();
        let d_ins = instrument.total_dim();
        let branches = measured.len();
        if d_ins < branches {
            return Err(Error::InstrumentTooSmall {
                instrument: d_ins,
                branches,
            });
        }
        if pointer_states.dim() != d_ins {
            return Err(Error::dim(d_ins, pointer_states.dim(), "pointer state dimension"));
        }
        if pointer_states.len() != branches {
            return Err(Error::InvalidArgument(format!(
                "{} pointer states for {} measured branches",
                pointer_states.len(),
                branches
            )));
        }
        validate_index_map(&index_map, branches, pointer.len())?;
        for (k, v) in pointer_states.vectors().iter().enumerate() {
            let f = pointer.projector(index_map[k]).matrix();
            let residual = (f * v - v).norm();
            if residual > tol.projector {
                return Err(Error::PointerStateOutsideRange { index: k, residual });
            }
        }
        check_ready(&ready, &instrument)?;

        // domain: |i⟩ ⊗ |b_m⟩ with b_0 = ready
        let instrument_basis = linalg::complete_canonical(vec![ready.amplitudes().clone()], d_ins);
        let mut images: Vec<CVector> = (0..d_obj)
            .map(|i| {
                let e_i = basis_vector(d_obj, i);
                measured
                    .branches()
                    .iter()
                    .zip(pointer_states.vectors())
                    .fold(CVector::zeros(d_obj * d_ins), |acc, (b, phi)| {
                        acc + kron_vec(&(b.projector.matrix() * &e_i), phi)
                    })
            })
            .collect();
        let total = d_obj * d_ins;
        images = match completion {
            Completion::Canonical => linalg::complete_canonical(images, total),
            Completion::Seeded(seed) => {
                let mut rng = random::rng(seed);
                let mut basis = images;
                while basis.len() < total {
                    let cand = random::gaussian_vector(&mut rng, total);
                    if let Some(v) = linalg::orthogonalize(&basis, &cand, 1e-6) {
                        basis.push(v);
                    }
                }
                basis
            }
        };
        let mut domain: Vec<CVector> = (0..d_obj)
            .map(|i| kron_vec(&basis_vector(d_obj, i), &instrument_basis[0]))
            .collect();
        for b in &instrument_basis[1..] {
            for i in 0..d_obj {
                domain.push(kron_vec(&basis_vector(d_obj, i), b));
            }
        }
        let unitary = images
            .iter()
            .zip(&domain)
            .fold(CMatrix::zeros(total, total), |acc, (out, inp)| acc + outer(out, inp));
        let residual = linalg::unitarity_residual(&unitary);
        if residual > tol.orth {
            return Err(Error::NotUnitary(residual));
        }
        Ok(Premeasurement {
            object,
            instrument,
            layout,
            measured,
            pointer,
            pointer_states: pointer_states.vectors().to_vec(),
            ready,
            unitary,
            index_map,
            kind: PremeasurementKind::Ideal,
        })
    }

    /// General exact premeasurement `(Σ_j V^j ⊗ W^j F^j) ∘ U_ideal`; `dressings[k]`
    /// belongs to measured branch `k`, pointer branches outside the index map
    /// are left undressed.
    pub fn exact(ideal: &Premeasurement, dressings: &[Dressing]) -> Result<Self> {
        let tol = Tolerances::default();
        if dressings.len() != ideal.measured.len() {
            return Err(Error::InvalidArgument(format!(
                "{} dressings for {} measured branches",
                dressings.len(),
                ideal.measured.len()
            )));
        }
        let d_obj = ideal.object.total_dim();
        let d_ins = ideal.instrument.total_dim();
        let mut per_pointer: Vec<Option<&Dressing>> = vec![None; ideal.pointer.len()];
        for (k, d) in dressings.iter().enumerate() {
            if d.object.shape() != (d_obj, d_obj) {
                return Err(Error::dim(d_obj, d.object.nrows(), "object dressing size"));
            }
            if d.instrument.shape() != (d_ins, d_ins) {
                return Err(Error::dim(d_ins, d.instrument.nrows(), "instrument dressing size"));
            }
            let r = linalg::unitarity_residual(&d.object).max(linalg::unitarity_residual(&d.instrument));
            if r > tol.orth {
                return Err(Error::NotUnitary(r));
            }
            let f = ideal.pointer.projector(ideal.index_map[k]).matrix();
            let leak = ((linalg::identity(d_ins) - f) * &d.instrument * f).norm();
            if leak > tol.projector {
                return Err(Error::DressingLeak { index: k, residual: leak });
            }
            per_pointer[ideal.index_map[k]] = Some(d);
        }
        let identity = Dressing::identity(d_obj, d_ins);
        let total = d_obj * d_ins;
        let dressing = per_pointer
            .iter()
            .enumerate()
            .fold(CMatrix::zeros(total, total), |acc, (j, d)| {
                let d = d.unwrap_or(&identity);
                let f = ideal.pointer.projector(j).matrix();
                acc + kron(&d.object, &(&d.instrument * f))
            });
        let unitary = dressing * &ideal.unitary;
        let residual = linalg::unitarity_residual(&unitary);
        if residual > tol.orth {
            return Err(Error::NotUnitary(residual));
        }
        Ok(Premeasurement {
            unitary,
            kind: PremeasurementKind::Exact,
            ..ideal.clone()
        })
    }

    /// Same observables and ready state with a caller-supplied unitary.
    pub fn with_unitary(&self, unitary: CMatrix) -> Result<Self> {
        let total = self.layout.total_dim();
        if unitary.shape() != (total, total) {
            return Err(Error::dim(total, unitary.nrows(), "unitary size"));
        }
        let residual = linalg::unitarity_residual(&unitary);
        if residual > Tolerances::default().orth {
            return Err(Error::NotUnitary(residual));
        }
        Ok(Premeasurement {
            unitary,
            kind: PremeasurementKind::Custom,
            ..self.clone()
        })
    }

    /// Fault injection: swaps the image of `|0⟩⊗|r⟩` with that of `|0⟩⊗|r^⊥⟩`
    /// (times `i`), moving one initial-sector column out of its sector.
    pub fn phase_swapped(&self) -> Result<Self> {
        let d_obj = self.object.total_dim();
        let d_ins = self.instrument.total_dim();
        if d_ins < 2 {
            return Err(Error::InvalidArgument("phase swap needs an instrument of dimension ≥ 2".into()));
        }
        let basis = linalg::complete_canonical(vec![self.ready.amplitudes().clone()], d_ins);
        let a = kron_vec(&basis_vector(d_obj, 0), &basis[0]);
        let b = kron_vec(&basis_vector(d_obj, 0), &basis[1]);
        let i = C64::new(0.0, 1.0);
        let swap = linalg::identity(d_obj * d_ins) - outer(&a, &a) - outer(&b, &b)
            + (outer(&a, &b) + outer(&b, &a)) * i;
        self.with_unitary(&self.unitary * swap)
    }

    pub fn object(&self) -> &SubsystemLayout {
        &self.object
    }

    pub fn instrument(&self) -> &SubsystemLayout {
        &self.instrument
    }

    pub fn object_label(&self) -> String {
        self.object.joined_label()
    }

    pub fn instrument_label(&self) -> String {
        self.instrument.joined_label()
    }

    /// `object ⊗ instrument`
    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn measured(&self) -> &SpectralObservable {
        &self.measured
    }

    pub fn pointer(&self) -> &SpectralObservable {
        &self.pointer
    }

    pub fn pointer_states(&self) -> &[CVector] {
        &self.pointer_states
    }

    pub fn ready_state(&self) -> &StateVector {
        &self.ready
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn index_map(&self) -> &[usize] {
        &self.index_map
    }

    pub fn kind(&self) -> PremeasurementKind {
        self.kind
    }

    /// `|φ⟩ ⊗ |r⟩`
    pub fn initial_state(&self, object_state: &StateVector) -> Result<StateVector> {
        if object_state.layout() != &self.object {
            return Err(Error::dim(
                self.object.total_dim(),
                object_state.dim(),
                format!("object state layout {} vs {}", object_state.layout(), self.object),
            ));
        }
        object_state.tensor(&self.ready)
    }

    /// `U(|φ⟩ ⊗ |r⟩)`
    pub fn evolve(&self, object_state: &StateVector) -> Result<StateVector> {
        if !object_state.is_normalized() {
            return Err(Error::NotNormalized(object_state.norm()));
        }
        let initial = self.initial_state(object_state)?;
        StateVector::new(self.layout.clone(), &self.unitary * initial.amplitudes())
    }

    fn embedded_pointer(&self) -> Vec<CMatrix> {
        self.pointer
            .branches()
            .iter()
            .map(|b| b.projector.embed_into(&self.layout).expect("pointer acts on the instrument"))
            .collect()
    }

    fn evolve_raw(&self, phi: &CVector) -> CVector {
        &self.unitary * kron_vec(phi, self.ready.amplitudes())
    }

    /// Sharp measured value in ⇒ sharp pointer value out, over random sharp states.
    pub fn check_calibration(&self, trials: usize, seed: u64) -> ConditionReport {
        let mut rng = random::rng(seed);
        let f = self.embedded_pointer();
        let d = self.object.total_dim();
        let mut worst: f64 = 0.0;
        let mut samples = 0;
        for _ in 0..trials {
            for (k, branch) in self.measured.branches().iter().enumerate() {
                let sharp = random_sharp(&mut rng, branch.projector.matrix(), d);
                let out = self.evolve_raw(&sharp);
                let fk = &f[self.index_map[k]];
                worst = worst.max((fk * &out - &out).norm());
                samples += 1;
            }
        }
        ConditionReport::new("calibration", worst, samples)
    }

    /// `⟨φ|E^k|φ⟩ = ⟨Φ|F^k|Φ⟩` for random `|φ⟩`; unmapped pointer branches
    /// must carry zero probability.
    pub fn check_probability_reproduction(&self, trials: usize, seed: u64) -> ConditionReport {
        let mut rng = random::rng(seed);
        let f = self.embedded_pointer();
        let d = self.object.total_dim();
        let mut worst: f64 = 0.0;
        let mut samples = 0;
        for _ in 0..trials {
            let phi = random::unit_vector(&mut rng, d);
            let out = self.evolve_raw(&phi);
            let mut mapped = vec![false; f.len()];
            for (k, branch) in self.measured.branches().iter().enumerate() {
                let born = phi.dotc(&(branch.projector.matrix() * &phi)).re;
                let j = self.index_map[k];
                mapped[j] = true;
                let pointer = out.dotc(&(&f[j] * &out)).re;
                worst = worst.max((born - pointer).abs());
            }
            for (fj, _) in f.iter().zip(&mapped).filter(|(_, m)| !**m) {
                worst = worst.max(out.dotc(&(fj * &out)).re.abs());
            }
            samples += 1;
        }
        ConditionReport::new("probability_reproduction", worst, samples)
    }

    /// `F^k U(|φ⟩⊗|r⟩) = U(E^k|φ⟩⊗|r⟩)` for random `|φ⟩`.
    pub fn check_dynamical(&self, trials: usize, seed: u64) -> ConditionReport {
        let mut rng = random::rng(seed);
        let f = self.embedded_pointer();
        let d = self.object.total_dim();
        let mut worst: f64 = 0.0;
        let mut samples = 0;
        for _ in 0..trials {
            let phi = random::unit_vector(&mut rng, d);
            let out = self.evolve_raw(&phi);
            for (k, branch) in self.measured.branches().iter().enumerate() {
                let lhs = &f[self.index_map[k]] * &out;
                let rhs = self.evolve_raw(&(branch.projector.matrix() * &phi));
                worst = worst.max((lhs - rhs).norm());
            }
            samples += 1;
        }
        ConditionReport::new("dynamical", worst, samples)
    }

    /// All three defining conditions, each on its own derived seed.
    pub fn check_all(&self, trials: usize, seed: u64) -> [ConditionReport; 3] {
        [
            self.check_calibration(trials, random::derive_seed(seed, 0)),
            self.check_probability_reproduction(trials, random::derive_seed(seed, 1)),
            self.check_dynamical(trials, random::derive_seed(seed, 2)),
        ]
    }

    /// Random ideal premeasurement on `A` (dim `object_dim`) by `B`
    /// (dim `instrument_dim`) with a random degenerate measured observable,
    /// random pointer states and a random ready state.
    pub fn random_ideal(rng: &mut impl Rng, object_dim: usize, instrument_dim: usize) -> Result<Self> {
        let max_branches = object_dim.min(instrument_dim);
        let branches = if max_branches >= 2 { rng.random_range(2..=max_branches) } else { 1 };
        let object = SubsystemLayout::single("A", object_dim)?;
        let instrument = SubsystemLayout::single("B", instrument_dim)?;
        let h = random::degenerate_hermitian(rng, object_dim, branches);
        let measured = crate::observables::observable_from_matrix(object, &h, Tolerances::default().eig)?;
        let u = random::unitary(rng, instrument_dim);
        let states: Vec<CVector> = (0..branches).map(|k| u.column(k).into_owned()).collect();
        let pointer = SpectralObservable::pointer_for_states(instrument.clone(), &states)?;
        let basis = SubsystemBasis::new("B", instrument_dim, states)?;
        let ready = StateVector::new(instrument, random::unit_vector(rng, instrument_dim))?;
        Self::ideal(measured, pointer, &basis, ready)
    }

    /// Random per-branch dressings: Haar unitaries on the object and
    /// unitaries acting only inside each pointer projector's range.
    pub fn random_dressings(&self, rng: &mut impl Rng) -> Vec<Dressing> {
        let d_obj = self.object.total_dim();
        self.index_map
            .iter()
            .map(|&j| Dressing {
                object: random::unitary(rng, d_obj),
                instrument: random::unitary_within(rng, self.pointer.projector(j).matrix()),
            })
            .collect()
    }
}

fn validate_index_map(map: &[usize], branches: usize, pointer_branches: usize) -> Result<()> {
    if map.len() != branches {
        return Err(Error::InvalidArgument(format!(
            "index map has {} entries for {} measured branches",
            map.len(),
            branches
        )));
    }
    let mut seen = vec![false; pointer_branches];
    for &j in map {
        if j >= pointer_branches || seen[j] {
            return Err(Error::InvalidArgument(format!(
                "index map is not injective into {pointer_branches} pointer branches"
            )));
        }
        seen[j] = true;
    }
    Ok(())
}

fn check_ready(ready: &StateVector, instrument: &SubsystemLayout) -> Result<()> {
    if ready.layout() != instrument {
        return Err(Error::dim(instrument.total_dim(), ready.dim(), "ready state layout"));
    }
    if !ready.is_normalized() {
        return Err(Error::NotNormalized(ready.norm()));
    }
    Ok(())
}

fn random_sharp(rng: &mut impl Rng, projector: &CMatrix, dim: usize) -> CVector {
    loop {
        let v = projector * random::gaussian_vector(rng, dim);
        let n = v.norm();
        if n > 1e-6 {
            return v.unscale(n);
        }
    }
}

/// Non-selective post-measurement object state `Σ_k E^k|φ⟩⟨φ|E^k`.
pub fn luders_state(object_state: &StateVector, measured: &SpectralObservable) -> Result<DensityOperator> {
    if object_state.layout().dims() != measured.support().dims() {
        return Err(Error::dim(measured.dim(), object_state.dim(), "object state vs observable"));
    }
    if !object_state.is_normalized() {
        return Err(Error::NotNormalized(object_state.norm()));
    }
    let d = measured.dim();
    let phi = object_state.amplitudes();
    let m = measured.branches().iter().fold(CMatrix::zeros(d, d), |acc, b| {
        let v = b.projector.matrix() * phi;
        acc + outer(&v, &v)
    });
    DensityOperator::new(object_state.layout().clone(), m)
}

/// Complete-measurement components `F^k|Φ⟩/‖F^k|Φ⟩‖` with weights
/// `‖F^k|Φ⟩‖²`; branches of weight ≤ `tol.weight` are dropped and their
/// weight recorded.
pub fn branch_decomposition(
    final_state: &StateVector,
    pointer: &SpectralObservable,
    tol: &Tolerances,
) -> Result<BranchDecomposition> {
    if !final_state.is_normalized() {
        return Err(Error::NotNormalized(final_state.norm()));
    }
    let mut branches = Vec::new();
    let mut dropped = 0.0;
    for b in pointer.branches() {
        let f = b.projector.embed_into(final_state.layout())?;
        let v = f * final_state.amplitudes();
        let w = v.norm_squared();
        if w > tol.weight {
            let component = StateVector::unnormalized(final_state.layout().clone(), v)?.normalize(0.0)?;
            branches.push(Branch {
                index: b.index,
                weight: w,
                component: BranchComponent::Pure(component),
            });
        } else {
            dropped += w;
        }
    }
    Ok(BranchDecomposition::new(pointer.support().joined_label(), branches, dropped))
}

#[cfg(test)]
mod tests;
