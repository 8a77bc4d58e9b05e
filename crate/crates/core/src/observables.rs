//! Observables in unique spectral form and decompositions of the identity.

use crate::error::{Error, Result};
use crate::hilbert::{embed_operator_on, SubsystemLayout};
use crate::linalg::{self, hermitian_eigen, outer, CMatrix, CVector};
use crate::tolerance::Tolerances;

/// Orthogonal projector on the subsystems of `support`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    support: SubsystemLayout,
    matrix: CMatrix,
}

impl Projector {
    pub fn new(support: SubsystemLayout, matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(support, matrix, &Tolerances::default())
    }

    pub fn with_tolerances(support: SubsystemLayout, matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        let d = support.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::dim(d, matrix.nrows(), "projector size"));
        }
        let herm = linalg::hermiticity_residual(&matrix);
        let idem = (&matrix * &matrix - &matrix).norm();
        let residual = herm.max(idem);
        if residual > tol.projector {
            return Err(Error::NotProjector(residual));
        }
        Ok(Projector { support, matrix })
    }

    /// `|v⟩⟨v|` for a unit vector `v`.
    pub fn rank_one(support: SubsystemLayout, v: &CVector) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > Tolerances::default().norm {
            return Err(Error::NotNormalized(n));
        }
        Self::new(support, outer(v, v))
    }

    pub fn identity(support: SubsystemLayout) -> Self {
        let d = support.total_dim();
        Projector {
            support,
            matrix: CMatrix::identity(d, d),
        }
    }

    pub fn zero(support: SubsystemLayout) -> Self {
        let d = support.total_dim();
        Projector {
            support,
            matrix: CMatrix::zeros(d, d),
        }
    }

    pub fn support(&self) -> &SubsystemLayout {
        &self.support
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.matrix.trace().re.round().max(0.0) as usize
    }

    pub fn complement(&self) -> Projector {
        event_complement(self)
    }

    /// `I ⊗ P` on a layout containing every label of the support.
    pub fn embed_into(&self, layout: &SubsystemLayout) -> Result<CMatrix> {
        check_support_dims(&self.support, layout)?;
        embed_operator_on(&self.matrix, &self.support.labels(), layout)
    }
}

/// `I − P`: the complementary event.
pub fn event_complement(p: &Projector) -> Projector {
    let d = p.support.total_dim();
    Projector {
        support: p.support.clone(),
        matrix: CMatrix::identity(d, d) - &p.matrix,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBranch {
    pub index: usize,
    pub eigenvalue: f64,
    pub projector: Projector,
}

/// `O = Σ_k o_k E^k` with pairwise distinct eigenvalues, nonzero mutually
/// orthogonal eigenprojectors and `Σ_k E^k = I`. Branch `k` is the k-th
/// smallest eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralObservable {
    support: SubsystemLayout,
    branches: Vec<SpectralBranch>,
}

impl SpectralObservable {
    /// Builds from explicit `(eigenvalue, projector)` pairs; branches are
    /// re-indexed by ascending eigenvalue.
    pub fn from_branches(support: SubsystemLayout, mut pairs: Vec<(f64, CMatrix)>) -> Result<Self> {
        let tol = Tolerances::default();
        if pairs.is_empty() {
            return Err(Error::InvalidDecomposition("observable has no branches".into()));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in pairs.windows(2) {
            if (w[1].0 - w[0].0).abs() <= tol.eig {
                return Err(Error::InvalidDecomposition(format!(
                    "eigenvalues {} and {} are not distinct",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some((v, _)) = pairs.iter().find(|(_, p)| p.norm() <= tol.projector) {
            return Err(Error::InvalidDecomposition(format!("branch with eigenvalue {v} has a zero projector")));
        }
        let decomposition = DecompositionOfIdentity::new(
            support.clone(),
            pairs.iter().map(|(_, p)| p.clone()).collect(),
        )?;
        decomposition.validate(&tol)?;
        let branches = pairs
            .into_iter()
            .enumerate()
            .map(|(index, (eigenvalue, m))| {
                Ok(SpectralBranch {
                    index,
                    eigenvalue,
                    projector: Projector::new(support.clone(), m)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralObservable { support, branches })
    }

    /// Pointer observable for an orthonormal list of pointer states:
    /// `F^k = |φ^k⟩⟨φ^k|` for all but the last state, whose branch also
    /// absorbs the orthogonal complement. Eigenvalues are `0, 1, …`.
    pub fn pointer_for_states(support: SubsystemLayout, states: &[CVector]) -> Result<Self> {
        let d = support.total_dim();
        if states.is_empty() {
            return Err(Error::InvalidArgument("no pointer states".into()));
        }
        let residual = linalg::orthonormality_residual(states);
        if residual > Tolerances::default().orth {
            return Err(Error::NotOrthonormal(residual));
        }
        let mut pairs = Vec::with_capacity(states.len());
        let mut rest = CMatrix::identity(d, d);
        for (k, v) in states.iter().enumerate() {
            if v.len() != d {
                return Err(Error::dim(d, v.len(), "pointer state length"));
            }
            if k + 1 < states.len() {
                let p = outer(v, v);
                rest -= &p;
                pairs.push((k as f64, p));
            } else {
                pairs.push((k as f64, rest.clone()));
            }
        }
        Self::from_branches(support, pairs)
    }

    /// Observable that is diagonal in the canonical basis with the given eigenvalues
    /// (repeated values merge into one branch).
    pub fn diagonal(support: SubsystemLayout, eigenvalues: &[f64]) -> Result<Self> {
        let d = support.total_dim();
        if eigenvalues.len() != d {
            return Err(Error::dim(d, eigenvalues.len(), "diagonal eigenvalue count"));
        }
        let h = CMatrix::from_diagonal(&CVector::from_iterator(
            d,
            eigenvalues.iter().map(|&v| linalg::c(v, 0.0)),
        ));
        observable_from_matrix(support, &h, Tolerances::default().eig)
    }

    pub fn support(&self) -> &SubsystemLayout {
        &self.support
    }

    pub fn dim(&self) -> usize {
        self.support.total_dim()
    }

    pub fn branches(&self) -> &[SpectralBranch] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn projector(&self, k: usize) -> &Projector {
        &self.branches[k].projector
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.eigenvalue).collect()
    }

    /// `Σ_k o_k E^k`
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.dim();
        self.branches
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, b| acc + b.projector.matrix().scale(b.eigenvalue))
    }

    pub fn decomposition(&self) -> DecompositionOfIdentity {
        DecompositionOfIdentity {
            support: self.support.clone(),
            projectors: self.branches.iter().map(|b| b.projector.matrix().clone()).collect(),
        }
    }

    /// The same observable lifted to a larger layout (`I ⊗ O`), keeping
    /// branch indices and eigenvalues.
    pub fn embed_into(&self, layout: &SubsystemLayout) -> Result<Self> {
        let branches = self
            .branches
            .iter()
            .map(|b| {
                Ok(SpectralBranch {
                    index: b.index,
                    eigenvalue: b.eigenvalue,
                    projector: Projector {
                        support: layout.clone(),
                        matrix: b.projector.embed_into(layout)?,
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralObservable {
            support: layout.clone(),
            branches,
        })
    }
}

/// Unique spectral form of a Hermitian matrix. Eigenvalues within
/// `merge_tol` of their neighbour are merged into a single branch whose
/// eigenvalue is the group mean and whose projector sums the eigenprojectors.
pub fn observable_from_matrix(support: SubsystemLayout, h: &CMatrix, merge_tol: f64) -> Result<SpectralObservable> {
    let d = support.total_dim();
    if h.nrows() != d || h.ncols() != d {
        return Err(Error::dim(d, h.nrows(), "observable matrix size"));
    }
    let herm = linalg::hermiticity_residual(h);
    if herm > Tolerances::default().herm {
        return Err(Error::NotHermitian(herm));
    }
    let (values, vectors) = hermitian_eigen(h);
    let mut groups: Vec<(Vec<f64>, CMatrix)> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        let col = vectors.column(i).into_owned();
        let p = outer(&col, &col);
        match groups.last_mut() {
            Some((vals, proj)) if v - vals[vals.len() - 1] <= merge_tol => {
                vals.push(v);
                *proj += p;
            }
            _ => groups.push((vec![v], p)),
        }
    }
    let branches = groups
        .into_iter()
        .enumerate()
        .map(|(index, (vals, proj))| SpectralBranch {
            index,
            eigenvalue: vals.iter().sum::<f64>() / vals.len() as f64,
            projector: Projector {
                support: support.clone(),
                matrix: proj,
            },
        })
        .collect();
    Ok(SpectralObservable { support, branches })
}

/// Ordered list of operators meant to be orthogonal projectors summing to
/// the identity. Construction only checks shapes; see [`check_decomposition`].
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionOfIdentity {
    support: SubsystemLayout,
    projectors: Vec<CMatrix>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionReport {
    pub idempotency: f64,
    pub hermiticity: f64,
    pub orthogonality: f64,
    pub completeness: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl DecompositionOfIdentity {
    pub fn new(support: SubsystemLayout, projectors: Vec<CMatrix>) -> Result<Self> {
        let d = support.total_dim();
        if projectors.is_empty() {
            return Err(Error::InvalidDecomposition("no projectors".into()));
        }
        for p in &projectors {
            if p.nrows() != d || p.ncols() != d {
                return Err(Error::dim(d, p.nrows(), "decomposition projector size"));
            }
        }
        Ok(DecompositionOfIdentity { support, projectors })
    }

    pub fn from_projectors(projectors: &[Projector]) -> Result<Self> {
        let support = projectors
            .first()
            .ok_or_else(|| Error::InvalidDecomposition("no projectors".into()))?
            .support
            .clone();
        if projectors.iter().any(|p| p.support != support) {
            return Err(Error::InvalidDecomposition("projectors act on different subsystems".into()));
        }
        Self::new(support, projectors.iter().map(|p| p.matrix.clone()).collect())
    }

    /// `{P, I − P}`
    pub fn binary(p: &Projector) -> Self {
        DecompositionOfIdentity {
            support: p.support.clone(),
            projectors: vec![p.matrix.clone(), event_complement(p).matrix],
        }
    }

    pub fn support(&self) -> &SubsystemLayout {
        &self.support
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn report(&self, tol: &Tolerances) -> DecompositionReport {
        let d = self.support.total_dim();
        let mut idempotency: f64 = 0.0;
        let mut hermiticity: f64 = 0.0;
        let mut orthogonality: f64 = 0.0;
        let mut sum = CMatrix::zeros(d, d);
        for (j, p) in self.projectors.iter().enumerate() {
            idempotency = idempotency.max((p * p - p).norm());
            hermiticity = hermiticity.max(linalg::hermiticity_residual(p));
            for q in &self.projectors[j + 1..] {
                orthogonality = orthogonality.max((p * q).norm());
            }
            sum += p;
        }
        let completeness = (sum - CMatrix::identity(d, d)).norm();
        let tolerance = tol.projector;
        let pass = idempotency <= tolerance
            && hermiticity <= tolerance
            && orthogonality <= tolerance
            && completeness <= tolerance;
        DecompositionReport {
            idempotency,
            hermiticity,
            orthogonality,
            completeness,
            tolerance,
            pass,
        }
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let r = self.report(tol);
        if r.pass {
            Ok(())
        } else {
            Err(Error::InvalidDecomposition(format!(
                "idempotency {:.2e}, hermiticity {:.2e}, orthogonality {:.2e}, completeness {:.2e}",
                r.idempotency, r.hermiticity, r.orthogonality, r.completeness
            )))
        }
    }
}

/// Residual report for a decomposition of the identity at default tolerances.
pub fn check_decomposition(d: &DecompositionOfIdentity) -> DecompositionReport {
    d.report(&Tolerances::default())
}

fn check_support_dims(support: &SubsystemLayout, layout: &SubsystemLayout) -> Result<()> {
    for s in support.subsystems() {
        let d = layout.dim_of(&s.label)?;
        if d != s.dim {
            return Err(Error::dim(s.dim, d, format!("subsystem `{}`", s.label)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, c};
    use crate::random;

    fn support(d: usize) -> SubsystemLayout {
        SubsystemLayout::single("A", d).unwrap()
    }

    fn pauli_z() -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]))
    }

    #[test]
    fn pauli_z_spectral_form() {
        let o = observable_from_matrix(support(2), &pauli_z(), 1e-8).unwrap();
        assert_eq!(o.len(), 2);
        assert!((o.branches()[0].eigenvalue + 1.0).abs() < 1e-12);
        assert!((o.branches()[1].eigenvalue - 1.0).abs() < 1e-12);
        let p1 = outer(&basis_vector(2, 1), &basis_vector(2, 1));
        let p0 = outer(&basis_vector(2, 0), &basis_vector(2, 0));
        assert!((o.projector(0).matrix() - p1).norm() < 1e-12);
        assert!((o.projector(1).matrix() - p0).norm() < 1e-12);
    }

    #[test]
    fn identity_collapses_to_one_branch() {
        let o = observable_from_matrix(support(3), &CMatrix::identity(3, 3), 1e-8).unwrap();
        assert_eq!(o.len(), 1);
        assert!((o.branches()[0].eigenvalue - 1.0).abs() < 1e-12);
        assert!((o.projector(0).matrix() - CMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut r = random::rng(1);
        for _ in 0..20 {
            let h = random::hermitian(&mut r, 4);
            let o = observable_from_matrix(support(4), &h, 1e-8).unwrap();
            assert!((o.reconstruct() - &h).norm() < 1e-9);
            assert!(o.len() <= 4);
            assert!(check_decomposition(&o.decomposition()).pass);
        }
    }

    #[test]
    fn rebuilding_is_idempotent() {
        let mut r = random::rng(2);
        for distinct in 1..=4 {
            let h = random::degenerate_hermitian(&mut r, 4, distinct);
            let o = observable_from_matrix(support(4), &h, 1e-8).unwrap();
            assert_eq!(o.len(), distinct);
            let again = observable_from_matrix(support(4), &o.reconstruct(), 1e-8).unwrap();
            assert_eq!(again.len(), o.len());
            for (a, b) in o.branches().iter().zip(again.branches()) {
                assert!((a.eigenvalue - b.eigenvalue).abs() < 1e-8);
                assert!((a.projector.matrix() - b.projector.matrix()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(observable_from_matrix(support(2), &m, 1e-8), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn decomposition_reports() {
        let p0 = outer(&basis_vector(2, 0), &basis_vector(2, 0));
        let p1 = outer(&basis_vector(2, 1), &basis_vector(2, 1));
        let good = DecompositionOfIdentity::new(support(2), vec![p0.clone(), p1]).unwrap();
        let r = check_decomposition(&good);
        assert!(r.pass);
        assert!(r.completeness < 1e-15 && r.orthogonality < 1e-15 && r.idempotency < 1e-15);

        let bad = DecompositionOfIdentity::new(support(2), vec![p0.clone(), p0]).unwrap();
        let r = check_decomposition(&bad);
        assert!(!r.pass);
        assert!(r.completeness > 0.5 && r.orthogonality > 0.5);
    }

    #[test]
    fn conjugated_decomposition_still_passes() {
        let mut r = random::rng(3);
        for _ in 0..10 {
            let ps = random::decomposition_of_identity(&mut r, 5, 3);
            let u = random::unitary(&mut r, 5);
            let conj = ps.iter().map(|p| &u * p * u.adjoint()).collect();
            let d = DecompositionOfIdentity::new(support(5), conj).unwrap();
            assert!(check_decomposition(&d).pass);
        }
    }

    #[test]
    fn complements() {
        let z = Projector::zero(support(3));
        assert_eq!(event_complement(&z).matrix(), &CMatrix::identity(3, 3));
        let i = Projector::identity(support(3));
        assert!(event_complement(&i).matrix().norm() < 1e-15);
        let mut r = random::rng(4);
        for d in 2..6 {
            for rank in 0..=d {
                let p = Projector::new(support(d), random::projector(&mut r, d, rank)).unwrap();
                let c = event_complement(&p);
                // rank by counting eigenvalues near 1
                let (vals, _) = hermitian_eigen(c.matrix());
                let count = vals.iter().filter(|v| **v > 0.5).count();
                assert_eq!(count, d - rank);
                assert!(check_decomposition(&DecompositionOfIdentity::binary(&p)).pass);
            }
        }
    }

    #[test]
    fn non_projector_rejected() {
        let m = CMatrix::identity(2, 2).scale(0.5);
        assert!(matches!(Projector::new(support(2), m), Err(Error::NotProjector(_))));
    }

    #[test]
    fn pointer_for_partial_states_absorbs_complement() {
        let o = SpectralObservable::pointer_for_states(support(4), &[basis_vector(4, 2), basis_vector(4, 0)]).unwrap();
        assert_eq!(o.len(), 2);
        assert_eq!(o.projector(0).rank(), 1);
        assert_eq!(o.projector(1).rank(), 3);
        assert!(check_decomposition(&o.decomposition()).pass);
    }

    #[test]
    fn from_branches_rejects_repeated_eigenvalues_and_empty_blocks() {
        let p0 = outer(&basis_vector(2, 0), &basis_vector(2, 0));
        let p1 = outer(&basis_vector(2, 1), &basis_vector(2, 1));
        assert!(SpectralObservable::from_branches(support(2), vec![(1.0, p0.clone()), (1.0, p1.clone())]).is_err());
        assert!(SpectralObservable::from_branches(
            support(2),
            vec![(0.0, CMatrix::identity(2, 2)), (1.0, CMatrix::zeros(2, 2))]
        )
        .is_err());
        let o = SpectralObservable::from_branches(support(2), vec![(5.0, p0), (-1.0, p1.clone())]).unwrap();
        assert_eq!(o.projector(0).matrix(), &p1);
    }
}
