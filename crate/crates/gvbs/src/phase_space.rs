//! Symplectic phase-space algebra for Gaussian states.
//!
//! A zero-mean Gaussian state of `N` modes is fully described by its real
//! symmetric `2N x 2N` covariance matrix in the interleaved quadrature
//! ordering `(q_1, p_1, ..., q_N, p_N)`. The vacuum covariance matrix is the
//! identity; the symplectic form is `Ω = ω^{⊕N}` with `ω = [[0,1],[-1,0]]`.
//! Gaussian unitaries act by congruence, `γ ↦ S γ Sᵀ`, where `S` satisfies
//! `S Ω Sᵀ = Ω`.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tolerances::Tolerances;

/// Errors raised by phase-space operations.
#[derive(Debug, Error)]
pub enum PhaseSpaceError {
    #[error("mode index {index} invalid for {n_modes} modes (indices must be distinct and in range)")]
    IndexError { index: usize, n_modes: usize },
    #[error("dimension mismatch: {expected} vs {found}")]
    DimensionError { expected: usize, found: usize },
    #[error("transposed mode set must be a nonempty proper subset of 0..{n_modes}")]
    PartitionError { n_modes: usize },
    #[error("matrix is not symmetric: |γ_ij - γ_ji| = {asymmetry:.3e} exceeds {tolerance:.3e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },
    #[error("matrix dimension {dim} is not an even positive number")]
    OddDimension { dim: usize },
    #[error("numerical failure: {0}")]
    NumericalError(String),
    #[error("matrix is not symplectic: {0}")]
    NotSymplectic(String),
    #[error("parameter must be finite, got {0}")]
    NonFinite(f64),
}

/// The symplectic form `Ω = ω^{⊕N}` encoding the canonical commutators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm {
    n_modes: usize,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Self {
        assert!(n_modes > 0, "mode count must be positive");
        SymplecticForm { n_modes }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Dense `2N x 2N` matrix of the form.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(2 * self.n_modes, 2 * self.n_modes);
        for i in 0..self.n_modes {
            m[(2 * i, 2 * i + 1)] = 1.0;
            m[(2 * i + 1, 2 * i)] = -1.0;
        }
        m
    }
}

/// Outcome of a physicality check: the uncertainty-principle margin
/// `min_i ν_i - 1` and its classification against the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Physicality {
    pub physical: bool,
    pub margin: f64,
}

/// Williamson symplectic spectrum: the moduli of the eigenvalues of `iΩγ`,
/// one per mode, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    values: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    /// All eigenvalues at least `1 - tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.min() >= 1.0 - tol
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn check_distinct_in_range(modes: &[usize], n_modes: usize) -> Result<(), PhaseSpaceError> {
    for (pos, &m) in modes.iter().enumerate() {
        if m >= n_modes || modes[..pos].contains(&m) {
            return Err(PhaseSpaceError::IndexError { index: m, n_modes });
        }
    }
    Ok(())
}

/// Covariance matrix of an `N`-mode Gaussian state, vacuum-normalized so the
/// vacuum has `γ = 1`. Construction validates symmetry; the stored matrix is
/// the symmetrized input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CmRepr", into = "CmRepr")]
pub struct CovarianceMatrix {
    n_modes: usize,
    data: DMatrix<f64>,
}

/// Wire format: `{"n_modes": N, "data": [row-major 2N·2N reals]}`.
#[derive(Serialize, Deserialize)]
struct CmRepr {
    n_modes: usize,
    data: Vec<f64>,
}

impl TryFrom<CmRepr> for CovarianceMatrix {
    type Error = PhaseSpaceError;

    fn try_from(repr: CmRepr) -> Result<Self, Self::Error> {
        let dim = 2 * repr.n_modes;
        if repr.data.len() != dim * dim {
            return Err(PhaseSpaceError::DimensionError {
                expected: dim * dim,
                found: repr.data.len(),
            });
        }
        CovarianceMatrix::new(DMatrix::from_row_slice(dim, dim, &repr.data))
    }
}

impl From<CovarianceMatrix> for CmRepr {
    fn from(cm: CovarianceMatrix) -> Self {
        let mut data = Vec::with_capacity(4 * cm.n_modes * cm.n_modes);
        for i in 0..2 * cm.n_modes {
            for j in 0..2 * cm.n_modes {
                data.push(cm.data[(i, j)]);
            }
        }
        CmRepr {
            n_modes: cm.n_modes,
            data,
        }
    }
}

impl CovarianceMatrix {
    /// Validate and wrap a `2N x 2N` symmetric matrix (default tolerances).
    pub fn new(data: DMatrix<f64>) -> Result<Self, PhaseSpaceError> {
        Self::with_tolerances(data, &Tolerances::default())
    }

    pub fn with_tolerances(
        mut data: DMatrix<f64>,
        tol: &Tolerances,
    ) -> Result<Self, PhaseSpaceError> {
        let dim = data.nrows();
        if dim == 0 || dim % 2 != 0 || data.ncols() != dim {
            return Err(PhaseSpaceError::OddDimension { dim });
        }
        let asym = max_asymmetry(&data);
        if asym > tol.sym {
            return Err(PhaseSpaceError::NotSymmetric {
                asymmetry: asym,
                tolerance: tol.sym,
            });
        }
        symmetrize(&mut data);
        Ok(CovarianceMatrix {
            n_modes: dim / 2,
            data,
        })
    }

    /// Wrap a matrix that is symmetric by construction (internal fast path).
    pub(crate) fn from_symmetric_unchecked(mut data: DMatrix<f64>) -> Self {
        debug_assert!(data.nrows() == data.ncols() && data.nrows() % 2 == 0);
        symmetrize(&mut data);
        CovarianceMatrix {
            n_modes: data.nrows() / 2,
            data,
        }
    }

    /// Vacuum state: the identity matrix.
    pub fn vacuum(n_modes: usize) -> Self {
        assert!(n_modes > 0, "mode count must be positive");
        CovarianceMatrix {
            n_modes,
            data: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn determinant(&self) -> f64 {
        self.data.determinant()
    }

    /// `det γ = 1` within the relative purity tolerance.
    pub fn is_pure(&self, tol: &Tolerances) -> bool {
        (self.determinant() - 1.0).abs() <= tol.pure_rel
    }

    /// Purity `μ = (det γ)^{-1/2}`.
    ///
    /// A determinant below one beyond tolerance signals an unphysical input
    /// and is rejected.
    pub fn purity(&self) -> Result<f64, PhaseSpaceError> {
        self.purity_with(&Tolerances::default())
    }

    pub fn purity_with(&self, tol: &Tolerances) -> Result<f64, PhaseSpaceError> {
        let det = self.determinant();
        if det < 1.0 - tol.pure_rel {
            return Err(PhaseSpaceError::NumericalError(format!(
                "det γ = {det} < 1: covariance matrix is unphysical"
            )));
        }
        Ok(det.powf(-0.5))
    }

    /// Williamson spectrum from the eigenvalues of `iΩγ`.
    ///
    /// The moduli must occur with even multiplicity (one conjugate pair per
    /// mode); a pairing failure beyond tolerance reports numerical
    /// degradation of the input.
    pub fn symplectic_spectrum(&self) -> Result<SymplecticSpectrum, PhaseSpaceError> {
        self.symplectic_spectrum_with(&Tolerances::default())
    }

    pub fn symplectic_spectrum_with(
        &self,
        tol: &Tolerances,
    ) -> Result<SymplecticSpectrum, PhaseSpaceError> {
        let omega = SymplecticForm::new(self.n_modes).matrix();
        let prod = &omega * &self.data;
        let eigen = prod.complex_eigenvalues();
        let mut moduli: Vec<f64> = eigen.iter().map(Complex::norm).collect();
        moduli.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalue moduli are finite"));
        let mut values = Vec::with_capacity(self.n_modes);
        for k in 0..self.n_modes {
            let (a, b) = (moduli[2 * k], moduli[2 * k + 1]);
            if (a - b).abs() > tol.pairing {
                return Err(PhaseSpaceError::NumericalError(format!(
                    "symplectic eigenvalue pairing failure: |{a} - {b}| > {}",
                    tol.pairing
                )));
            }
            values.push(0.5 * (a + b));
        }
        Ok(SymplecticSpectrum { values })
    }

    /// Bona fide check `γ + iΩ ≥ 0`, evaluated on the symplectic spectrum.
    pub fn is_physical(&self) -> Result<Physicality, PhaseSpaceError> {
        self.is_physical_with(&Tolerances::default())
    }

    pub fn is_physical_with(&self, tol: &Tolerances) -> Result<Physicality, PhaseSpaceError> {
        let spectrum = self.symplectic_spectrum_with(tol)?;
        let margin = spectrum.min() - 1.0;
        Ok(Physicality {
            physical: margin >= -tol.phys,
            margin,
        })
    }

    /// Partial transposition: mirror reflection `p_m ↦ -p_m` of every listed
    /// mode. The set must be a nonempty proper subset of the modes.
    pub fn partial_transpose(&self, modes: &[usize]) -> Result<Self, PhaseSpaceError> {
        if modes.is_empty() || modes.len() >= self.n_modes {
            return Err(PhaseSpaceError::PartitionError {
                n_modes: self.n_modes,
            });
        }
        check_distinct_in_range(modes, self.n_modes)?;
        let mut data = self.data.clone();
        for &m in modes {
            let row = 2 * m + 1;
            for j in 0..2 * self.n_modes {
                data[(row, j)] = -data[(row, j)];
                data[(j, row)] = -data[(j, row)];
            }
        }
        Ok(CovarianceMatrix {
            n_modes: self.n_modes,
            data,
        })
    }

    /// Reduced state on the selected modes: the principal submatrix, in the
    /// order given.
    pub fn reduced(&self, modes: &[usize]) -> Result<Self, PhaseSpaceError> {
        if modes.is_empty() {
            return Err(PhaseSpaceError::IndexError {
                index: 0,
                n_modes: self.n_modes,
            });
        }
        check_distinct_in_range(modes, self.n_modes)?;
        let k = modes.len();
        let mut data = DMatrix::zeros(2 * k, 2 * k);
        for (a, &ma) in modes.iter().enumerate() {
            for (b, &mb) in modes.iter().enumerate() {
                for qa in 0..2 {
                    for qb in 0..2 {
                        data[(2 * a + qa, 2 * b + qb)] = self.data[(2 * ma + qa, 2 * mb + qb)];
                    }
                }
            }
        }
        Ok(CovarianceMatrix { n_modes: k, data })
    }
}

/// A real linear transformation preserving the symplectic form,
/// `S Ω Sᵀ = Ω`. Acts on covariance matrices by congruence.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    n_modes: usize,
    data: DMatrix<f64>,
}

/// Embed a 4x4 two-mode block acting on modes `(i, j)` into the identity.
fn embed_two_mode(
    n_modes: usize,
    block: &[[f64; 4]; 4],
    modes: (usize, usize),
) -> Result<DMatrix<f64>, PhaseSpaceError> {
    let (i, j) = modes;
    check_distinct_in_range(&[i, j], n_modes)?;
    let rows = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1];
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for a in 0..4 {
        for b in 0..4 {
            m[(rows[a], rows[b])] = block[a][b];
        }
    }
    Ok(m)
}

impl SymplecticTransform {
    pub fn identity(n_modes: usize) -> Self {
        assert!(n_modes > 0, "mode count must be positive");
        SymplecticTransform {
            n_modes,
            data: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Phase-free two-mode squeezer `diag{e^r, e^-r, e^-r, e^r}` on the
    /// ordered pair, identity elsewhere.
    pub fn two_mode_squeezer(
        n_modes: usize,
        r: f64,
        modes: (usize, usize),
    ) -> Result<Self, PhaseSpaceError> {
        if !r.is_finite() {
            return Err(PhaseSpaceError::NonFinite(r));
        }
        let (ep, em) = (r.exp(), (-r).exp());
        let block = [
            [ep, 0.0, 0.0, 0.0],
            [0.0, em, 0.0, 0.0],
            [0.0, 0.0, em, 0.0],
            [0.0, 0.0, 0.0, ep],
        ];
        Ok(SymplecticTransform {
            n_modes,
            data: embed_two_mode(n_modes, &block, modes)?,
        })
    }

    /// Phase-free beam splitter: a phase-space rotation with transmittivity
    /// `τ = cos²θ`. A 50:50 splitter is `θ = π/4`.
    pub fn beam_splitter(
        n_modes: usize,
        theta: f64,
        modes: (usize, usize),
    ) -> Result<Self, PhaseSpaceError> {
        if !theta.is_finite() {
            return Err(PhaseSpaceError::NonFinite(theta));
        }
        let (c, s) = (theta.cos(), theta.sin());
        let block = [
            [c, 0.0, s, 0.0],
            [0.0, c, 0.0, s],
            [s, 0.0, -c, 0.0],
            [0.0, s, 0.0, -c],
        ];
        Ok(SymplecticTransform {
            n_modes,
            data: embed_two_mode(n_modes, &block, modes)?,
        })
    }

    /// Entangling twin-beam transformation `T(r) = B(π/4) · S(r)`: a two-mode
    /// squeezer followed by a balanced beam splitter. On two vacua it
    /// produces the two-mode squeezed state with entries `cosh 2r`,
    /// `± sinh 2r`.
    pub fn twin_beam(
        n_modes: usize,
        r: f64,
        modes: (usize, usize),
    ) -> Result<Self, PhaseSpaceError> {
        let bs = Self::beam_splitter(n_modes, std::f64::consts::FRAC_PI_4, modes)?;
        let sq = Self::two_mode_squeezer(n_modes, r, modes)?;
        Ok(SymplecticTransform {
            n_modes,
            data: bs.data * sq.data,
        })
    }

    /// Embed a single-mode symplectic 2x2 block on one mode. The block must
    /// have unit determinant.
    pub fn single_mode(
        n_modes: usize,
        mode: usize,
        block: [[f64; 2]; 2],
    ) -> Result<Self, PhaseSpaceError> {
        check_distinct_in_range(&[mode], n_modes)?;
        let det = block[0][0] * block[1][1] - block[0][1] * block[1][0];
        if (det - 1.0).abs() > 1e-8 {
            return Err(PhaseSpaceError::NotSymplectic(format!(
                "2x2 block determinant {det} != 1"
            )));
        }
        let mut data = DMatrix::identity(2 * n_modes, 2 * n_modes);
        for a in 0..2 {
            for b in 0..2 {
                data[(2 * mode + a, 2 * mode + b)] = block[a][b];
            }
        }
        Ok(SymplecticTransform { n_modes, data })
    }

    /// Validate an arbitrary matrix as symplectic (`S Ω Sᵀ = Ω` within 1e-10,
    /// `det S = 1` within 1e-8) and wrap it.
    pub fn from_matrix(data: DMatrix<f64>) -> Result<Self, PhaseSpaceError> {
        let dim = data.nrows();
        if dim == 0 || dim % 2 != 0 || data.ncols() != dim {
            return Err(PhaseSpaceError::OddDimension { dim });
        }
        let n_modes = dim / 2;
        let omega = SymplecticForm::new(n_modes).matrix();
        let residual = &data * &omega * data.transpose() - &omega;
        let worst = residual.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if worst > 1e-10 {
            return Err(PhaseSpaceError::NotSymplectic(format!(
                "S Ω Sᵀ deviates from Ω by {worst:.3e}"
            )));
        }
        let det = data.determinant();
        if (det - 1.0).abs() > 1e-8 {
            return Err(PhaseSpaceError::NotSymplectic(format!(
                "det S = {det} != 1"
            )));
        }
        Ok(SymplecticTransform { n_modes, data })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// Composition `self ∘ rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Self) -> Result<Self, PhaseSpaceError> {
        if self.n_modes != rhs.n_modes {
            return Err(PhaseSpaceError::DimensionError {
                expected: self.n_modes,
                found: rhs.n_modes,
            });
        }
        Ok(SymplecticTransform {
            n_modes: self.n_modes,
            data: &self.data * &rhs.data,
        })
    }

    /// Congruence action `γ ↦ S γ Sᵀ`, symmetrized to kill roundoff
    /// asymmetry.
    pub fn apply(&self, gamma: &CovarianceMatrix) -> Result<CovarianceMatrix, PhaseSpaceError> {
        if self.n_modes != gamma.n_modes() {
            return Err(PhaseSpaceError::DimensionError {
                expected: self.n_modes,
                found: gamma.n_modes(),
            });
        }
        let out = &self.data * gamma.matrix() * self.data.transpose();
        Ok(CovarianceMatrix::from_symmetric_unchecked(out))
    }
}

/// Covariance matrix of the two-mode squeezed state produced by the
/// twin-beam transformation on vacuum.
pub fn two_mode_squeezed_cm(r: f64) -> CovarianceMatrix {
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let data = DMatrix::from_row_slice(
        4,
        4,
        &[
            c, 0.0, s, 0.0, //
            0.0, c, 0.0, -s, //
            s, 0.0, c, 0.0, //
            0.0, -s, 0.0, c,
        ],
    );
    CovarianceMatrix {
        n_modes: 2,
        data,
    }
}
