//! Dense complex linear algebra: states, unitaries, Haar sampling and PSD
//! matrix functions.
//!
//! Everything here is backed by `nalgebra` dense matrices. The newtypes
//! ([`UnitaryMatrix`], [`PureState`], [`DensityOperator`]) validate their
//! invariants on construction and are immutable afterwards, so they can be
//! shared read-only between worker threads.
//!
//! | quantity                         | tolerance |
//! |----------------------------------|-----------|
//! | unitarity, `‖U†U − I‖_F`         | 1e-10     |
//! | hermiticity, `‖A − A†‖_F`        | 1e-10     |
//! | trace / norm                     | 1e-10     |
//! | eigenvalue floor for PSD         | −1e-10    |
//! | POVM completeness                | 1e-8      |
//! | support projector identity       | 1e-8      |

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;
pub type RealMatrix = DMatrix<f64>;

pub mod tol {
    pub const UNITARITY: f64 = 1e-10;
    pub const HERMITICITY: f64 = 1e-10;
    pub const TRACE: f64 = 1e-10;
    pub const NORM: f64 = 1e-10;
    pub const PSD_FLOOR: f64 = -1e-10;
    pub const COMPLETENESS: f64 = 1e-8;
    pub const SUPPORT_PROJECTOR: f64 = 1e-8;
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// `‖A − A†‖_F`.
pub fn hermiticity_residual(a: &ComplexMatrix) -> f64 {
    (a - a.adjoint()).norm()
}

pub fn is_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `Tr(A B)` without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `U ⊗ I_m`, with the first factor most significant in the flat index.
pub fn extend_with_identity(u: &ComplexMatrix, ancilla_dim: usize) -> ComplexMatrix {
    if ancilla_dim == 1 {
        return u.clone();
    }
    u.kronecker(&identity(ancilla_dim))
}

fn require_square(a: &ComplexMatrix, what: &'static str) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare { what, rows: a.nrows(), cols: a.ncols() });
    }
    Ok(a.nrows())
}

/// A square matrix with `U†U = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(ComplexMatrix);

impl UnitaryMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let dim = require_square(&matrix, "unitary")?;
        if dim == 0 {
            return Err(Error::InvalidDimension { what: "unitary", value: 0 });
        }
        if !is_finite(&matrix) {
            return Err(Error::NonFinite { what: "unitary" });
        }
        let residual = (matrix.adjoint() * &matrix - identity(dim)).norm();
        if residual > tol::UNITARITY {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self(matrix))
    }

    pub fn identity(dim: usize) -> Self {
        Self(identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `self · other`. Products of unitaries stay unitary up to rounding, so
    /// no re-validation happens here.
    pub fn compose(&self, other: &UnitaryMatrix) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn unitarity_residual(&self) -> f64 {
        (self.0.adjoint() * &self.0 - identity(self.dim())).norm()
    }
}

/// Samples a Haar-distributed unitary of size `dim`.
///
/// A Ginibre matrix (i.i.d. standard complex Gaussians) is QR-factorised and
/// column `j` of `Q` is multiplied by the phase of `R_jj`. Without that phase
/// fix the output of a QR routine is not Haar distributed.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension { what: "haar_unitary", value: 0 });
    }
    let ginibre = ComplexMatrix::from_fn(dim, dim, |_, _| standard_complex_normal(rng));
    let qr = ginibre.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let diag = r[(j, j)];
        let norm = diag.norm();
        let phase = if norm > 0.0 { diag / norm } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Ok(UnitaryMatrix(q))
}

/// `(x + iy)/√2` with `x, y ~ N(0, 1)`, so `E|z|² = 1`.
pub fn standard_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// A normalised state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState(ComplexVector);

impl PureState {
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension { what: "pure state", value: 0 });
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { what: "pure state" });
        }
        let norm_sq = amplitudes.norm_squared();
        if (norm_sq - 1.0).abs() > tol::NORM {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self(amplitudes))
    }

    /// Normalises `amplitudes` first. Fails only for the zero vector.
    pub fn normalized(amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm_sq: norm * norm });
        }
        Self::new(amplitudes.unscale(norm))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.0
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator(&self.0 * self.0.adjoint())
    }

    pub fn evolve(&self, u: &ComplexMatrix) -> PureState {
        PureState(u * &self.0)
    }
}

/// `|ψ⟩ = d^{-1/2} Σ_j |j⟩⊗|j⟩` on `C^d ⊗ C^d`.
pub fn max_entangled_state(d_channel: usize) -> Result<PureState> {
    if d_channel == 0 {
        return Err(Error::InvalidDimension { what: "max_entangled_state", value: 0 });
    }
    let amp = Complex64::new(1.0 / (d_channel as f64).sqrt(), 0.0);
    let mut v = ComplexVector::zeros(d_channel * d_channel);
    for j in 0..d_channel {
        v[j * d_channel + j] = amp;
    }
    Ok(PureState(v))
}

/// Haar-random pure state in dimension `dim`.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PureState> {
    if dim == 0 {
        return Err(Error::InvalidDimension { what: "random_pure_state", value: 0 });
    }
    let v = ComplexVector::from_fn(dim, |_, _| standard_complex_normal(rng));
    PureState::normalized(v)
}

/// Hermitian, PSD, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator(ComplexMatrix);

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let dim = require_square(&matrix, "density operator")?;
        if dim == 0 {
            return Err(Error::InvalidDimension { what: "density operator", value: 0 });
        }
        if !is_finite(&matrix) {
            return Err(Error::NonFinite { what: "density operator" });
        }
        let residual = hermiticity_residual(&matrix);
        if residual > tol::HERMITICITY {
            return Err(Error::NotHermitian { residual });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol::TRACE || trace.im.abs() > tol::TRACE {
            return Err(Error::BadTrace { trace: trace.re });
        }
        let min_eig = hermitian_eigenvalues(&matrix).iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < tol::PSD_FLOOR {
            return Err(Error::NotPositive { min_eigenvalue: min_eig });
        }
        Ok(Self(matrix))
    }

    /// Trusted constructor for outputs of trace- and positivity-preserving
    /// maps applied to valid inputs.
    pub(crate) fn from_valid(matrix: ComplexMatrix) -> Self {
        debug_assert!(hermiticity_residual(&matrix) < 1e-8);
        Self(matrix)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension { what: "maximally_mixed", value: 0 });
        }
        Ok(Self(identity(dim).unscale(dim as f64)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn purity(&self) -> f64 {
        trace_of_product(&self.0, &self.0).re
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> DensityOperator {
        DensityOperator(u * &self.0 * u.adjoint())
    }
}

/// Random mixed state `G G† / Tr(G G†)` with `G` a `dim × rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<DensityOperator> {
    if dim == 0 || rank == 0 {
        return Err(Error::InvalidDimension { what: "random_density", value: dim.min(rank) });
    }
    let g = ComplexMatrix::from_fn(dim, rank, |_, _| standard_complex_normal(rng));
    let mut m = &g * g.adjoint();
    let tr = m.trace().re;
    m.unscale_mut(tr);
    Ok(DensityOperator(hermitize(m)))
}

/// `(A + A†)/2`.
pub fn hermitize(a: ComplexMatrix) -> ComplexMatrix {
    let adj = a.adjoint();
    (a + adj).scale(0.5)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().cloned().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Eigenvalues of a real symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(a: &RealMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().cloned().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Spectral functions of a Hermitian PSD matrix restricted to its support.
#[derive(Clone, Debug)]
pub struct PsdSupport {
    /// `A^{-1/2}` on the support, zero on the kernel.
    pub inv_sqrt: ComplexMatrix,
    /// Orthogonal projector onto the support.
    pub projector: ComplexMatrix,
    pub rank: usize,
}

/// Default rank-decision cutoff relative to `λ_max`: `dim · ε_machine`.
pub fn default_cutoff(dim: usize) -> f64 {
    dim as f64 * f64::EPSILON
}

pub fn psd_support(a: &ComplexMatrix, cutoff: Option<f64>) -> Result<PsdSupport> {
    let dim = require_square(a, "psd matrix")?;
    if dim == 0 {
        return Err(Error::InvalidDimension { what: "psd matrix", value: 0 });
    }
    if !is_finite(a) {
        return Err(Error::NonFinite { what: "psd matrix" });
    }
    let residual = hermiticity_residual(a);
    if residual > tol::HERMITICITY * a.norm().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    let cutoff = cutoff.unwrap_or_else(|| default_cutoff(dim));
    let eig = SymmetricEigen::new(hermitize(a.clone()));
    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let threshold = cutoff * lambda_max;

    let mut inv_sqrt = ComplexMatrix::zeros(dim, dim);
    let mut projector = ComplexMatrix::zeros(dim, dim);
    let mut rank = 0;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda_max <= 0.0 || lambda <= threshold {
            continue;
        }
        rank += 1;
        let v = eig.eigenvectors.column(k);
        let outer = v * v.adjoint();
        inv_sqrt += outer.scale(1.0 / lambda.sqrt());
        projector += outer;
    }
    Ok(PsdSupport { inv_sqrt, projector, rank })
}

/// Pseudo-inverse square root: `V f(Λ) V†` with `f(λ) = λ^{-1/2}` for
/// `λ > cutoff · λ_max` and zero otherwise.
pub fn inv_sqrt_psd(a: &ComplexMatrix, cutoff: Option<f64>) -> Result<ComplexMatrix> {
    psd_support(a, cutoff).map(|s| s.inv_sqrt)
}

/// Traces out the second factor of a state on `C^{d_a} ⊗ C^{d_b}`.
pub fn partial_trace_second(rho: &ComplexMatrix, d_a: usize, d_b: usize) -> ComplexMatrix {
    assert_eq!(rho.nrows(), d_a * d_b);
    ComplexMatrix::from_fn(d_a, d_a, |i, j| (0..d_b).map(|k| rho[(i * d_b + k, j * d_b + k)]).sum())
}

/// Traces out the first factor of a state on `C^{d_a} ⊗ C^{d_b}`.
pub fn partial_trace_first(rho: &ComplexMatrix, d_a: usize, d_b: usize) -> ComplexMatrix {
    assert_eq!(rho.nrows(), d_a * d_b);
    ComplexMatrix::from_fn(d_b, d_b, |i, j| (0..d_a).map(|k| rho[(k * d_b + i, k * d_b + j)]).sum())
}

/// Builds a complex matrix from `[[re, im], ...]` rows.
pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Ragged);
    }
    Ok(ComplexMatrix::from_fn(n, m, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> ComplexMatrix {
    let i = Complex64::new(0.0, 1.0);
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(values: &[f64]) -> ComplexMatrix {
        let n = values.len();
        ComplexMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(values[i], 0.0) } else { ZERO })
    }

    #[test]
    fn haar_dim_one_is_a_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary(1, &mut rng).unwrap();
        assert_abs_diff_eq!(u.matrix()[(0, 0)].norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn haar_zero_dim_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(haar_unitary(0, &mut rng), Err(Error::InvalidDimension { .. })));
    }

    #[test]
    fn haar_is_unitary_and_deterministic() {
        for dim in 1..=9 {
            let a = haar_unitary(dim, &mut ChaCha8Rng::seed_from_u64(dim as u64)).unwrap();
            let b = haar_unitary(dim, &mut ChaCha8Rng::seed_from_u64(dim as u64)).unwrap();
            assert!(a.unitarity_residual() <= tol::UNITARITY);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn haar_second_moment_of_trace() {
        // ∫ |Tr U|² dU = 1 over U(d).
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples = 10_000;
        let mean: f64 =
            (0..samples).map(|_| haar_unitary(4, &mut rng).unwrap().matrix().trace().norm_sqr()).sum::<f64>()
                / samples as f64;
        assert!((mean - 1.0).abs() <= 0.05, "mean |Tr U|^2 = {mean}");
    }

    #[test]
    fn max_entangled_examples() {
        let s = max_entangled_state(2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [h, 0.0, 0.0, h];
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!(a.re, e, epsilon = 1e-15);
            assert_abs_diff_eq!(a.im, 0.0);
        }
        let one = max_entangled_state(1).unwrap();
        assert_eq!(one.dim(), 1);
        assert_abs_diff_eq!(one.amplitudes()[0].re, 1.0);
        assert!(max_entangled_state(0).is_err());
    }

    #[test]
    fn max_entangled_reduced_states_are_maximally_mixed() {
        for d in 1..=5 {
            let rho = max_entangled_state(d).unwrap().density();
            let target = identity(d).unscale(d as f64);
            assert!((partial_trace_second(rho.matrix(), d, d) - &target).norm() < 1e-14);
            assert!((partial_trace_first(rho.matrix(), d, d) - &target).norm() < 1e-14);
        }
    }

    #[test]
    fn inv_sqrt_examples() {
        let i3 = identity(3);
        assert!((inv_sqrt_psd(&i3, None).unwrap() - &i3).norm() < 1e-14);

        let got = inv_sqrt_psd(&diag(&[4.0, 1.0]), None).unwrap();
        assert!((got - diag(&[0.5, 1.0])).norm() < 1e-14);

        let got = inv_sqrt_psd(&diag(&[1.0, 0.0]), Some(1e-12)).unwrap();
        assert!((got - diag(&[1.0, 0.0])).norm() < 1e-14);
    }

    #[test]
    fn inv_sqrt_rejects_non_hermitian() {
        let mut a = identity(2);
        a[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(inv_sqrt_psd(&a, None), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn inv_sqrt_sandwich_is_support_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (dim, rank) in [(4, 4), (6, 2), (9, 5)] {
            let a = random_density(dim, rank, &mut rng).unwrap();
            let s = psd_support(a.matrix(), None).unwrap();
            assert_eq!(s.rank, rank);
            let sandwich = &s.inv_sqrt * a.matrix() * &s.inv_sqrt;
            assert!((sandwich - &s.projector).norm() < tol::SUPPORT_PROJECTOR);
        }
    }

    #[test]
    fn density_validation() {
        assert!(DensityOperator::new(identity(2)).is_err());
        assert!(DensityOperator::new(diag(&[1.5, -0.5])).is_err());
        assert!(DensityOperator::new(diag(&[0.25, 0.75])).is_ok());
    }

    #[test]
    fn unitary_validation() {
        assert!(UnitaryMatrix::new(pauli_x()).is_ok());
        assert!(UnitaryMatrix::new(diag(&[1.0, 2.0])).is_err());
    }
}
