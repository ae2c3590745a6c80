//! POVMs, Born-rule sampling, the Pretty Good Measurement and the overlap
//! matrix `K_ij = Tr(E_i ρ_j)`.
//!
//! A [`Povm`] may carry an explicit completion effect. It is always the last
//! outcome, so the overlap matrix stores its row last as well.

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::channel::MixedUnitaryChannel;
use crate::error::{Error, Result};
use crate::linalg::{
    extend_with_identity, hermitian_eigenvalues, hermiticity_residual, hermitize, identity, max_entangled_state,
    psd_support, standard_complex_normal, symmetric_eigenvalues, tol, trace_of_product, ComplexMatrix, DensityOperator,
    RealMatrix,
};

/// Imaginary residue of `Tr(E ρ)` above which an overlap is rejected.
pub const OVERLAP_IMAG_TOL: f64 = 1e-8;
/// Born probabilities may miss unit total by this much before erroring.
pub const BORN_TOTAL_TOL: f64 = 1e-6;
/// Negative Born / overlap residues down to this are clamped to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Povm {
    dim: usize,
    effects: Vec<ComplexMatrix>,
    completion: Option<ComplexMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>, completion: Option<ComplexMatrix>) -> Result<Self> {
        let dim = effects
            .first()
            .or(completion.as_ref())
            .map(|e| e.nrows())
            .ok_or(Error::InvalidDimension { what: "POVM outcomes", value: 0 })?;
        let mut total = ComplexMatrix::zeros(dim, dim);
        for e in effects.iter().chain(completion.iter()) {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::DimensionMismatch { context: "POVM effect", expected: dim, found: e.nrows() });
            }
            let residual = hermiticity_residual(e);
            if residual > tol::HERMITICITY {
                return Err(Error::NotHermitian { residual });
            }
            let min_eigenvalue = hermitian_eigenvalues(e)[0];
            if min_eigenvalue < tol::PSD_FLOOR {
                return Err(Error::NotPositive { min_eigenvalue });
            }
            total += e;
        }
        let residual = (total - identity(dim)).norm();
        if residual > tol::COMPLETENESS {
            return Err(Error::IncompletePovm { residual });
        }
        Ok(Self { dim, effects, completion })
    }

    /// Rank-one projectors onto the columns of a unitary basis.
    pub fn projective(basis: &ComplexMatrix) -> Result<Self> {
        let effects = basis.column_iter().map(|c| c * c.adjoint()).collect();
        Self::new(effects, None)
    }

    pub fn computational(dim: usize) -> Result<Self> {
        Self::projective(&identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn completion(&self) -> Option<&ComplexMatrix> {
        self.completion.as_ref()
    }

    pub fn num_outcomes(&self) -> usize {
        self.effects.len() + usize::from(self.completion.is_some())
    }

    /// All effects, completion last.
    pub fn all_effects(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.effects.iter().chain(self.completion.iter())
    }

    pub fn completeness_residual(&self) -> f64 {
        let mut total = ComplexMatrix::zeros(self.dim, self.dim);
        for e in self.all_effects() {
            total += e;
        }
        (total - identity(self.dim)).norm()
    }
}

/// `n` outcomes `S^{-1/2} G_i S^{-1/2}` from Ginibre-generated `G_i = A_i A_i†`
/// of random rank; a kernel completion is added if `S` is rank deficient.
pub fn random_povm<R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Result<Povm> {
    if dim == 0 || outcomes == 0 {
        return Err(Error::InvalidDimension { what: "random_povm", value: dim.min(outcomes) });
    }
    let seeds: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let rank = rng.random_range(1..=dim);
            let a = ComplexMatrix::from_fn(dim, rank, |_, _| standard_complex_normal(rng));
            &a * a.adjoint()
        })
        .collect();
    let mut total = ComplexMatrix::zeros(dim, dim);
    for g in &seeds {
        total += g;
    }
    let support = psd_support(&total, None)?;
    let effects: Vec<ComplexMatrix> =
        seeds.iter().map(|g| hermitize(&support.inv_sqrt * g * &support.inv_sqrt)).collect();
    let completion = (support.rank < dim).then(|| identity(dim) - &support.projector);
    Povm::new(effects, completion)
}

#[derive(Clone, Debug)]
pub struct Ensemble {
    states: Vec<DensityOperator>,
}

impl Ensemble {
    pub fn new(states: Vec<DensityOperator>) -> Result<Self> {
        let dim = states
            .first()
            .map(DensityOperator::dim)
            .ok_or(Error::InvalidDimension { what: "ensemble size", value: 0 })?;
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch { context: "ensemble states", expected: dim, found: s.dim() });
        }
        Ok(Self { states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    /// Uniform mixture `σ = (1/r) Σ ρ_i`.
    pub fn average(&self) -> ComplexMatrix {
        let mut sigma = ComplexMatrix::zeros(self.dim(), self.dim());
        for s in &self.states {
            sigma += s.matrix();
        }
        sigma.unscale(self.len() as f64)
    }
}

/// `{(U_a ⊗ I) ρ (U_a ⊗ I)†}` for an arbitrary probe `ρ` whose dimension is a
/// multiple of `d_channel`.
pub fn orbit_ensemble(channel: &MixedUnitaryChannel, probe: &DensityOperator) -> Result<Ensemble> {
    let d = channel.d_channel();
    if !probe.dim().is_multiple_of(d) {
        return Err(Error::DimensionMismatch { context: "orbit probe", expected: d, found: probe.dim() });
    }
    let ancilla = probe.dim() / d;
    let states =
        channel.unitaries().iter().map(|u| probe.conjugate(&extend_with_identity(u.matrix(), ancilla))).collect();
    Ensemble::new(states)
}

/// Orbit of the maximally entangled probe: `ρ_a = (U_a ⊗ I)|ψ⟩⟨ψ|(U_a ⊗ I)†`.
pub fn unitary_orbit_ensemble(channel: &MixedUnitaryChannel) -> Result<Ensemble> {
    let d = channel.d_channel();
    let psi = max_entangled_state(d)?;
    let states =
        channel.unitaries().iter().map(|u| psi.evolve(&extend_with_identity(u.matrix(), d)).density()).collect();
    Ensemble::new(states)
}

/// Pretty Good Measurement of the uniform mixture:
/// `E_i = σ^{-1/2}(ρ_i/r)σ^{-1/2}` plus the kernel projector of `σ` as the
/// completion outcome (zero when `σ` has full rank).
pub fn pgm(ensemble: &Ensemble) -> Result<Povm> {
    pgm_with_cutoff(ensemble, None)
}

pub fn pgm_with_cutoff(ensemble: &Ensemble, cutoff: Option<f64>) -> Result<Povm> {
    let r = ensemble.len() as f64;
    let dim = ensemble.dim();
    let support = psd_support(&ensemble.average(), cutoff)?;
    let s = &support.inv_sqrt;
    let effects = ensemble.states().iter().map(|rho| hermitize(s * rho.matrix() * s).unscale(r)).collect();
    let completion = hermitize(identity(dim) - &support.projector);
    Povm::new(effects, Some(completion))
}

/// Real `s × r` matrix of outcome probabilities per ensemble member.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapMatrix(RealMatrix);

/// Lower bound on overlap entries accepted by [`OverlapMatrix::new`].
pub const OVERLAP_FLOOR: f64 = -1e-12;
/// Column-sum slack accepted by [`OverlapMatrix::new`].
pub const COLUMN_SUM_TOL: f64 = 1e-8;

impl OverlapMatrix {
    pub fn new(matrix: RealMatrix) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::InvalidOverlap { reason: "empty matrix".into() });
        }
        if let Some(x) = matrix.iter().find(|x| !x.is_finite() || **x < OVERLAP_FLOOR) {
            return Err(Error::InvalidOverlap { reason: format!("entry {x} outside [0, 1]") });
        }
        for (j, col) in matrix.column_iter().enumerate() {
            let sum = col.sum();
            if sum > 1.0 + COLUMN_SUM_TOL {
                return Err(Error::InvalidOverlap { reason: format!("column {j} sums to {sum}") });
            }
        }
        Ok(Self(matrix))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let s = rows.len();
        let r = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != r) {
            return Err(Error::Ragged);
        }
        Self::new(DMatrix::from_fn(s, r, |i, j| rows[i][j]))
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.0
    }

    /// Number of outcomes `s`.
    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    /// Number of ensemble members `r`.
    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        self.0.row(i).norm()
    }

    /// Drops rows whose norm is at most `tol`, returning the kept row indices.
    pub fn drop_zero_rows(&self, tol: f64) -> (OverlapMatrix, Vec<usize>) {
        let kept: Vec<usize> = (0..self.nrows()).filter(|&i| self.row_norm(i) > tol).collect();
        let m = DMatrix::from_fn(kept.len(), self.ncols(), |i, j| self.0[(kept[i], j)]);
        (OverlapMatrix(m), kept)
    }

    /// `Σ_i max_j K_ij`, bounded by the probe dimension for any POVM.
    pub fn row_max_sum(&self) -> f64 {
        self.0.row_iter().map(|row| row.max()).sum()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.0.column_iter().map(|c| c.sum()).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.0.row_iter().map(|r| r.sum()).collect()
    }

    /// Diagonal of the leading square block.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows().min(self.ncols())).map(|i| self.0[(i, i)]).collect()
    }

    /// Largest entry of `K − K⊤` over the leading square block.
    pub fn asymmetry(&self) -> f64 {
        let n = self.nrows().min(self.ncols());
        let block = self.0.view((0, 0), (n, n));
        (block - block.transpose()).amax()
    }

    /// Smallest eigenvalue of the symmetrised leading square block.
    pub fn lambda_min(&self) -> f64 {
        let n = self.nrows().min(self.ncols());
        let block = self.0.view((0, 0), (n, n)).into_owned();
        let sym = (&block + block.transpose()).scale(0.5);
        symmetric_eigenvalues(&sym)[0]
    }
}

/// `K_ij = Tr(E_i ρ_j)`; the completion effect, if any, is the last row.
pub fn overlap_matrix(povm: &Povm, ensemble: &Ensemble) -> Result<OverlapMatrix> {
    if povm.dim() != ensemble.dim() {
        return Err(Error::DimensionMismatch {
            context: "overlap matrix",
            expected: povm.dim(),
            found: ensemble.dim(),
        });
    }
    let s = povm.num_outcomes();
    let r = ensemble.len();
    let mut k = RealMatrix::zeros(s, r);
    for (i, e) in povm.all_effects().enumerate() {
        for (j, rho) in ensemble.states().iter().enumerate() {
            let z = trace_of_product(e, rho.matrix());
            if z.im.abs() > OVERLAP_IMAG_TOL {
                return Err(Error::ComplexOverlap { row: i, col: j, residual: z.im.abs() });
            }
            if z.re < -NEGATIVE_CLAMP {
                return Err(Error::InvalidOverlap { reason: format!("K[{i},{j}] = {}", z.re) });
            }
            k[(i, j)] = z.re.max(0.0);
        }
    }
    OverlapMatrix::new(k)
}

/// Born probabilities `Tr(E_i ρ)` over all outcomes, completion last.
pub fn born_probabilities(rho: &DensityOperator, povm: &Povm) -> Result<Vec<f64>> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch { context: "born rule", expected: povm.dim(), found: rho.dim() });
    }
    let mut probs = Vec::with_capacity(povm.num_outcomes());
    for (i, e) in povm.all_effects().enumerate() {
        let z = trace_of_product(e, rho.matrix());
        if z.im.abs() > OVERLAP_IMAG_TOL {
            return Err(Error::ComplexOverlap { row: i, col: 0, residual: z.im.abs() });
        }
        if z.re < -NEGATIVE_CLAMP {
            return Err(Error::InconsistentPovm { total: z.re });
        }
        probs.push(z.re.max(0.0));
    }
    normalize_probabilities(probs)
}

fn normalize_probabilities(mut probs: Vec<f64>) -> Result<Vec<f64>> {
    let total: f64 = probs.iter().sum();
    if !total.is_finite() || (total - 1.0).abs() > BORN_TOTAL_TOL {
        return Err(Error::InconsistentPovm { total });
    }
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(probs)
}

/// One Born-rule outcome for `ρ` measured with `povm`.
pub fn born_sample<R: Rng + ?Sized>(rho: &DensityOperator, povm: &Povm, rng: &mut R) -> Result<usize> {
    let probs = born_probabilities(rho, povm)?;
    Ok(CategoricalSampler::new(probs)?.sample(rng))
}

/// Repeated draws from a fixed outcome distribution.
#[derive(Clone, Debug)]
pub struct CategoricalSampler {
    probs: Vec<f64>,
    index: WeightedIndex<f64>,
}

impl CategoricalSampler {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let probs = normalize_probabilities(
            probs.into_iter().map(|p| if (-NEGATIVE_CLAMP..0.0).contains(&p) { 0.0 } else { p }).collect(),
        )?;
        let index = WeightedIndex::new(&probs).map_err(|e| Error::InvalidProbability { reason: e.to_string() })?;
        Ok(Self { probs, index })
    }

    /// Precomputes the Born distribution of `ρ` under `povm`.
    pub fn born(rho: &DensityOperator, povm: &Povm) -> Result<Self> {
        Self::new(born_probabilities(rho, povm)?)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng)
    }

    /// Outcome counts of `n` independent draws.
    pub fn counts<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> Vec<u64> {
        let mut counts = vec![0u64; self.probs.len()];
        for _ in 0..n {
            counts[self.index.sample(rng)] += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ProbabilityVector;
    use crate::linalg::{pauli_x, pauli_z, PureState, UnitaryMatrix};
    use nalgebra::dvector;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn basis_state(dim: usize, i: usize) -> DensityOperator {
        let mut v = nalgebra::DVector::from_element(dim, c(0.0));
        v[i] = c(1.0);
        PureState::new(v).unwrap().density()
    }

    fn haar_channel(d: usize, r: usize, rng: &mut ChaCha8Rng) -> MixedUnitaryChannel {
        MixedUnitaryChannel::haar(d, ProbabilityVector::uniform(r).unwrap(), rng).unwrap()
    }

    #[test]
    fn povm_rejects_incomplete_and_non_psd() {
        let half = identity(2).scale(0.5);
        assert!(matches!(Povm::new(vec![half.clone()], None), Err(Error::IncompletePovm { .. })));
        let mut bad = identity(2);
        bad[(1, 1)] = c(-1.0);
        let fix = identity(2) - &bad;
        assert!(matches!(Povm::new(vec![bad, fix], None), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn pgm_of_orthogonal_pure_states_is_projective() {
        let s0 = PureState::new(dvector![c(1.0), c(1.0), c(0.0)].unscale(2f64.sqrt())).unwrap();
        let s1 = PureState::new(dvector![c(1.0), c(-1.0), c(0.0)].unscale(2f64.sqrt())).unwrap();
        let ens = Ensemble::new(vec![s0.density(), s1.density()]).unwrap();
        let m = pgm(&ens).unwrap();
        for (e, s) in m.effects().iter().zip([&s0, &s1]) {
            assert!((e - s.density().matrix()).norm() < 1e-12);
        }
        let k = overlap_matrix(&m, &ens).unwrap();
        assert_eq!(k.nrows(), 3);
        let expected = RealMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!((k.matrix() - expected).amax() < 1e-12);
    }

    #[test]
    fn pgm_of_identical_states_splits_the_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rho = crate::linalg::random_density(4, 2, &mut rng).unwrap();
        let ens = Ensemble::new(vec![rho.clone(); 3]).unwrap();
        let m = pgm(&ens).unwrap();
        let proj = psd_support(rho.matrix(), None).unwrap().projector;
        for e in m.effects() {
            assert!((e - proj.unscale(3.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn projective_on_orthogonal_ensemble_gives_identity_overlap() {
        let ens = Ensemble::new(vec![basis_state(3, 0), basis_state(3, 1)]).unwrap();
        let effects = vec![basis_state(3, 0).matrix().clone(), basis_state(3, 1).matrix().clone()];
        let completion = basis_state(3, 2).matrix().clone();
        let m = Povm::new(effects, Some(completion)).unwrap();
        let k = overlap_matrix(&m, &ens).unwrap();
        let expected = RealMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(k.matrix(), &expected);
    }

    #[test]
    fn pgm_on_haar_orbit_is_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let ens = unitary_orbit_ensemble(&haar_channel(8, 16, &mut rng)).unwrap();
        let m = pgm(&ens).unwrap();
        assert!(m.completeness_residual() < tol::COMPLETENESS);
        assert_eq!(m.num_outcomes(), 17);
    }

    #[test]
    fn orbit_ensemble_single_identity() {
        let ch =
            MixedUnitaryChannel::new(vec![UnitaryMatrix::identity(2)], ProbabilityVector::uniform(1).unwrap()).unwrap();
        let ens = unitary_orbit_ensemble(&ch).unwrap();
        assert_eq!(ens.len(), 1);
        let psi = max_entangled_state(2).unwrap().density();
        assert!((ens.states()[0].matrix() - psi.matrix()).norm() < 1e-15);
    }

    #[test]
    fn orbit_overlaps_follow_trace_formula() {
        // Tr(ρ_i ρ_j) = |Tr(U_i† U_j)|² / d².
        let z = UnitaryMatrix::new(pauli_z()).unwrap();
        let ch = MixedUnitaryChannel::new(vec![UnitaryMatrix::identity(2), z], ProbabilityVector::uniform(2).unwrap())
            .unwrap();
        let ens = unitary_orbit_ensemble(&ch).unwrap();
        let overlap = trace_of_product(ens.states()[0].matrix(), ens.states()[1].matrix());
        assert!(overlap.norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let ch = haar_channel(3, 5, &mut rng);
        let ens = unitary_orbit_ensemble(&ch).unwrap();
        for i in 0..5 {
            assert!((ens.states()[i].purity() - 1.0).abs() < 1e-10);
            for j in 0..5 {
                let ui = ch.unitaries()[i].matrix();
                let uj = ch.unitaries()[j].matrix();
                let oracle = (ui.adjoint() * uj).trace().norm_sqr() / 9.0;
                let got = trace_of_product(ens.states()[i].matrix(), ens.states()[j].matrix()).re;
                assert!((got - oracle).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pgm_overlap_is_symmetric_doubly_stochastic() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for (d, r) in [(2, 3), (3, 9), (4, 5)] {
            let ens = unitary_orbit_ensemble(&haar_channel(d, r, &mut rng)).unwrap();
            let k = overlap_matrix(&pgm(&ens).unwrap(), &ens).unwrap();
            let (block, kept) = k.drop_zero_rows(1e-12);
            assert_eq!(kept, (0..r).collect::<Vec<_>>());
            assert!(block.asymmetry() < 1e-9);
            for s in block.row_sums().into_iter().chain(block.column_sums()) {
                assert!((s - 1.0).abs() < 1e-8);
            }
            assert!(k.row_max_sum() <= (d * d) as f64 + 1e-6);
        }
    }

    #[test]
    fn overlap_dimension_mismatch() {
        let ens = Ensemble::new(vec![basis_state(3, 0)]).unwrap();
        let m = Povm::computational(2).unwrap();
        assert!(matches!(overlap_matrix(&m, &ens), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn born_sample_pure_zero_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let z = Povm::computational(2).unwrap();
        let rho = basis_state(2, 0);
        assert!((0..1000).all(|_| born_sample(&rho, &z, &mut rng).unwrap() == 0));
    }

    #[test]
    fn born_sample_maximally_mixed_is_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = Povm::computational(2).unwrap();
        let rho = DensityOperator::maximally_mixed(2).unwrap();
        let sampler = CategoricalSampler::born(&rho, &z).unwrap();
        let counts = sampler.counts(100_000, &mut rng);
        let freq = counts[0] as f64 / 100_000.0;
        assert!((freq - 0.5).abs() < 0.01, "{freq}");
    }

    #[test]
    fn born_rejects_inconsistent_povm() {
        // Bypass validation to build an effect set summing to 2·I.
        let bad = Povm { dim: 2, effects: vec![identity(2), identity(2)], completion: None };
        let rho = DensityOperator::maximally_mixed(2).unwrap();
        assert!(matches!(born_probabilities(&rho, &bad), Err(Error::InconsistentPovm { .. })));
    }

    #[test]
    fn random_povm_is_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (dim, s) in [(2, 1), (3, 2), (4, 7), (8, 3)] {
            let m = random_povm(dim, s, &mut rng).unwrap();
            assert!(m.completeness_residual() < tol::COMPLETENESS);
        }
    }

    #[test]
    fn bit_flip_orbit_is_orthogonal() {
        let x = UnitaryMatrix::new(pauli_x()).unwrap();
        let ch = MixedUnitaryChannel::new(
            vec![UnitaryMatrix::identity(2), x],
            ProbabilityVector::new(vec![0.3, 0.7]).unwrap(),
        )
        .unwrap();
        let ens = unitary_orbit_ensemble(&ch).unwrap();
        let k = overlap_matrix(&pgm(&ens).unwrap(), &ens).unwrap();
        let (block, _) = k.drop_zero_rows(1e-12);
        assert!((block.matrix() - RealMatrix::identity(2, 2)).amax() < 1e-12);
    }
}
