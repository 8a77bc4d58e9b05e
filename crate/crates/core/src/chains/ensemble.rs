use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{partial_trace_operator, DensityOperator, StateVector};
use crate::linalg::{hermitian_eigen, CMatrix, CVector};
use crate::observables::Projector;
use crate::random;
use crate::tolerance::Tolerances;

/// Proper mixture `Σ_k w_k |Ψ^k⟩⟨Ψ^k|` given by its preparation.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEnsemble {
    members: Vec<(f64, StateVector)>,
}

impl WeightedEnsemble {
    pub fn new(members: Vec<(f64, StateVector)>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidEnsemble("no members".into()))?;
        let layout = first.1.layout().clone();
        let mut total = 0.0;
        for (w, s) in &members {
            if *w <= 0.0 || !w.is_finite() {
                return Err(Error::InvalidEnsemble(format!("weight {w} is not positive")));
            }
            if s.layout() != &layout {
                return Err(Error::InvalidEnsemble("members have different layouts".into()));
            }
            if !s.is_normalized() {
                return Err(Error::NotNormalized(s.norm()));
            }
            total += w;
        }
        if (total - 1.0).abs() > Tolerances::default().norm {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total}")));
        }
        Ok(WeightedEnsemble { members })
    }

    /// Eigen-ensemble of a density operator (eigenvalues above `tol.weight`).
    pub fn from_density(rho: &DensityOperator, tol: &Tolerances) -> Result<Self> {
        let (values, vectors) = hermitian_eigen(rho.matrix());
        let mut members: Vec<(f64, StateVector)> = Vec::new();
        for (i, &v) in values.iter().enumerate().rev() {
            if v > tol.weight {
                let col = vectors.column(i).into_owned();
                members.push((v, StateVector::new(rho.layout().clone(), col)?));
            }
        }
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        for m in &mut members {
            m.0 /= total;
        }
        Self::new(members)
    }

    /// Another pure-state decomposition of the same density operator:
    /// `√w'_i |Ψ'_i⟩ = Σ_k u_ik √w_k |Ψ_k⟩` for a unitary `u` on member indices.
    pub fn remix(&self, u: &CMatrix, tol: &Tolerances) -> Result<Self> {
        let k = self.members.len();
        if u.shape() != (k, k) {
            return Err(Error::dim(k, u.nrows(), "remixing unitary size"));
        }
        let layout = self.layout().clone();
        let d = layout.total_dim();
        let mut members = Vec::new();
        for i in 0..k {
            let v = self
                .members
                .iter()
                .enumerate()
                .fold(CVector::zeros(d), |acc, (j, (w, s))| acc + s.amplitudes() * (u[(i, j)] * w.sqrt()));
            let w = v.norm_squared();
            if w > tol.weight {
                members.push((w, StateVector::new(layout.clone(), v.unscale(w.sqrt()))?));
            }
        }
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        for m in &mut members {
            m.0 /= total;
        }
        Self::new(members)
    }

    pub fn members(&self) -> &[(f64, StateVector)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn layout(&self) -> &crate::hilbert::SubsystemLayout {
        self.members[0].1.layout()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.members.iter().map(|(w, _)| *w).collect()
    }

    pub fn density(&self) -> Result<DensityOperator> {
        DensityOperator::from_mixture(self.members.iter().map(|(w, s)| (*w, s)))
    }

    /// `⟨Ψ^k|P|Ψ^k⟩` for every member.
    pub fn occurrence_probabilities(&self, p: &Projector) -> Result<Vec<f64>> {
        let pe = p.embed_into(self.layout())?;
        Ok(self
            .members
            .iter()
            .map(|(_, s)| s.amplitudes().dotc(&(&pe * s.amplitudes())).re)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdatedMember {
    pub index: usize,
    pub prior_weight: f64,
    pub occurrence_probability: f64,
    pub weight: f64,
    /// `tr_B(P|Ψ⟩⟨Ψ|P) / ⟨Ψ|P|Ψ⟩`
    pub conditional: DensityOperator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleUpdateResult {
    pub members: Vec<UpdatedMember>,
    /// Indices of members on which the event cannot occur.
    pub dropped: Vec<usize>,
    /// `Σ_k w'_k (ρ'_A)^k`
    pub aggregate: DensityOperator,
    /// `tr(ρ_AB P_B)`
    pub occurrence_probability: f64,
}

impl EnsembleUpdateResult {
    /// Updated weight of original member `index` (zero when dropped).
    pub fn weight_of(&self, index: usize) -> f64 {
        self.members
            .iter()
            .find(|m| m.index == index)
            .map_or(0.0, |m| m.weight)
    }

    pub fn new_weights(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.weight).collect()
    }
}

/// Re-weights a proper mixture on the occurrence of event `p`:
/// `w'_k = w_k ⟨Ψ^k|P|Ψ^k⟩ / tr(ρ P)`.
pub fn ensemble_update(ens: &WeightedEnsemble, p: &Projector, tol: &Tolerances) -> Result<EnsembleUpdateResult> {
    let layout = ens.layout();
    let pe = p.embed_into(layout)?;
    let traced = p.support().labels();
    let probabilities = ens.occurrence_probabilities(p)?;
    let total: f64 = ens
        .members()
        .iter()
        .zip(&probabilities)
        .map(|((w, _), q)| w * q)
        .sum();
    if total <= tol.weight {
        return Err(Error::UndefinedConditional(total));
    }
    let mut members = Vec::new();
    let mut dropped = Vec::new();
    let mut aggregate: Option<CMatrix> = None;
    let mut remaining_layout = None;
    for (index, ((w, psi), &q)) in ens.members().iter().zip(&probabilities).enumerate() {
        if q <= tol.weight {
            dropped.push(index);
            continue;
        }
        let projected = &pe * psi.amplitudes();
        let op = &projected * projected.adjoint();
        let (reduced, remaining) = partial_trace_operator(&op, layout, &traced)?;
        let conditional = DensityOperator::new(remaining.clone(), reduced.unscale(q))?;
        let weight = w * q / total;
        let term = conditional.matrix().scale(weight);
        aggregate = Some(match aggregate {
            None => term,
            Some(a) => a + term,
        });
        remaining_layout = Some(remaining);
        members.push(UpdatedMember {
            index,
            prior_weight: *w,
            occurrence_probability: q,
            weight,
            conditional,
        });
    }
    let (Some(aggregate), Some(layout)) = (aggregate, remaining_layout) else {
        return Err(Error::UndefinedConditional(total));
    };
    Ok(EnsembleUpdateResult {
        members,
        dropped,
        aggregate: DensityOperator::new(layout, aggregate)?,
        occurrence_probability: total,
    })
}

/// Frequencies from a finite simulated preparation.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloUpdate {
    pub n_samples: u64,
    /// `N_k`: systems prepared in member `k`.
    pub prepared: Vec<u64>,
    /// `N'_k`: of those, systems on which the event occurred.
    pub accepted: Vec<u64>,
}

impl MonteCarloUpdate {
    pub fn n_accepted(&self) -> u64 {
        self.accepted.iter().sum()
    }

    /// `N'_k / Σ N'_k'`
    pub fn weights(&self) -> Vec<f64> {
        let n = self.n_accepted() as f64;
        self.accepted.iter().map(|&a| a as f64 / n).collect()
    }

    fn merge(mut self, other: MonteCarloUpdate) -> Self {
        self.n_samples += other.n_samples;
        for (a, b) in self.prepared.iter_mut().zip(other.prepared) {
            *a += b;
        }
        for (a, b) in self.accepted.iter_mut().zip(other.accepted) {
            *a += b;
        }
        self
    }
}

fn sample_counts(weights: &[f64], probabilities: &[f64], n: u64, rng: &mut impl Rng) -> MonteCarloUpdate {
    let k = weights.len();
    let mut cumulative = Vec::with_capacity(k);
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cumulative.push(acc);
    }
    let mut prepared = vec![0u64; k];
    let mut accepted = vec![0u64; k];
    for _ in 0..n {
        // member first, then the occurrence coin
        let u: f64 = rng.random::<f64>() * acc;
        let member = cumulative.iter().position(|&c| u < c).unwrap_or(k - 1);
        prepared[member] += 1;
        let coin: f64 = rng.random();
        if coin < probabilities[member] {
            accepted[member] += 1;
        }
    }
    MonteCarloUpdate {
        n_samples: n,
        prepared,
        accepted,
    }
}

/// Simulates `n_samples` preparations from the ensemble, each followed by a
/// test of the event, with a single [`random::SimRng`] stream seeded by `seed`.
pub fn monte_carlo_update(ens: &WeightedEnsemble, p: &Projector, n_samples: u64, seed: u64) -> Result<MonteCarloUpdate> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let probabilities = ens.occurrence_probabilities(p)?;
    let out = sample_counts(&ens.weights(), &probabilities, n_samples, &mut random::rng(seed));
    if out.n_accepted() == 0 {
        return Err(Error::NoAcceptedSamples(n_samples as usize));
    }
    Ok(out)
}

/// Same as [`monte_carlo_update`] split into `shards` independent streams
/// (seeds derived from `seed` and the shard number) run in parallel; counts
/// are summed, so the result does not depend on scheduling.
pub fn monte_carlo_update_sharded(
    ens: &WeightedEnsemble,
    p: &Projector,
    n_samples: u64,
    seed: u64,
    shards: usize,
) -> Result<MonteCarloUpdate> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let shards = shards.max(1) as u64;
    let probabilities = ens.occurrence_probabilities(p)?;
    let weights = ens.weights();
    let base = n_samples / shards;
    let extra = n_samples % shards;
    let out = (0..shards)
        .into_par_iter()
        .map(|s| {
            let n = base + u64::from(s < extra);
            let mut rng = random::rng(random::derive_seed(seed, s));
            sample_counts(&weights, &probabilities, n, &mut rng)
        })
        .reduce(
            || MonteCarloUpdate {
                n_samples: 0,
                prepared: vec![0; weights.len()],
                accepted: vec![0; weights.len()],
            },
            MonteCarloUpdate::merge,
        );
    if out.n_accepted() == 0 {
        return Err(Error::NoAcceptedSamples(n_samples as usize));
    }
    Ok(out)
}
