//! The bisymmetric three-mode building block.
//!
//! The block is a pure three-mode Gaussian state whose first two modes (the
//! input port, each with reduced covariance `s`) are consumed by the valence
//! bond projections, while the third mode (the output port, covariance `x`)
//! survives into the ring state. In standard form the 6x6 covariance matrix
//! is assembled from the 2x2 blocks
//!
//! ```text
//!   γ_s = diag{s, s}     γ_x  = diag{x, x}
//!   ε_ss = diag{t₊, t₋}  ε_sx = diag{u₊, u₋}
//! ```
//!
//! with `t±` and `u±` fixed algebraic functions of `(x, s)`. The same state
//! can be prepared optically, up to local single-mode operations, by two
//! sequential twin-beam transformations with squeezing degrees `(r₁₃, r₁₂)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phase_space::{CovarianceMatrix, PhaseSpaceError, SymplecticTransform};

/// Maximum accepted squeezing degree; `cosh 2r` overflows usefulness long
/// before `f64` does.
pub const MAX_SQUEEZING: f64 = 20.0;

#[derive(Debug, Error)]
pub enum BuildingBlockError {
    #[error("unphysical standard-form parameters: {violated} (x = {x}, s = {s})")]
    PhysicalityError { x: f64, s: f64, violated: String },
    #[error("squeezing parameter {value} outside [0, {MAX_SQUEEZING}]")]
    SqueezingOutOfRange { value: f64 },
    #[error("optical conversion failed: {0}")]
    ConversionError(String),
    #[error("expected a three-mode covariance matrix, got {n_modes} modes")]
    DimensionError { n_modes: usize },
    #[error(transparent)]
    PhaseSpace(#[from] PhaseSpaceError),
}

/// Standard-form parameters `(x, s)` of the building block.
///
/// `x ≥ 1` is the output-port covariance and `s ≥ (x+1)/2` the input-port
/// covariance; outside those bounds the block is not a physical state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StandardFormRepr", into = "StandardFormRepr")]
pub struct StandardFormParams {
    x: f64,
    s: f64,
}

#[derive(Serialize, Deserialize)]
struct StandardFormRepr {
    x: f64,
    s: f64,
}

impl TryFrom<StandardFormRepr> for StandardFormParams {
    type Error = BuildingBlockError;
    fn try_from(r: StandardFormRepr) -> Result<Self, Self::Error> {
        StandardFormParams::new(r.x, r.s)
    }
}

impl From<StandardFormParams> for StandardFormRepr {
    fn from(p: StandardFormParams) -> Self {
        StandardFormRepr { x: p.x, s: p.s }
    }
}

impl StandardFormParams {
    /// Validate the physicality bounds `x ≥ 1`, `s ≥ s_min = (x+1)/2`.
    pub fn new(x: f64, s: f64) -> Result<Self, BuildingBlockError> {
        if !x.is_finite() || x < 1.0 {
            return Err(BuildingBlockError::PhysicalityError {
                x,
                s,
                violated: "x >= 1".to_owned(),
            });
        }
        let s_min = Self::s_min(x);
        if !s.is_finite() || s < s_min {
            return Err(BuildingBlockError::PhysicalityError {
                x,
                s,
                violated: format!("s >= (x+1)/2 = {s_min}"),
            });
        }
        Ok(StandardFormParams { x, s })
    }

    /// Smallest admissible input-port covariance at a given `x`.
    pub fn s_min(x: f64) -> f64 {
        0.5 * (x + 1.0)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Input-port correlations `t± = [x² - 1 ± √(16s⁴ - 8(x²+1)s² + (x²-1)²)] / 4s`.
    ///
    /// The discriminant vanishes at `s = s_min` and is clamped at zero
    /// against roundoff on the boundary.
    pub fn t_pair(&self) -> (f64, f64) {
        let (x, s) = (self.x, self.s);
        let disc = 16.0 * s.powi(4) - 8.0 * (x * x + 1.0) * s * s + (x * x - 1.0).powi(2);
        let root = disc.max(0.0).sqrt();
        let base = x * x - 1.0;
        ((base + root) / (4.0 * s), (base - root) / (4.0 * s))
    }

    /// Input-output correlations
    /// `u± = ¼ √((x²-1)/(sx)) [√((x-2s)²-1) ± √((x+2s)²-1)]`.
    pub fn u_pair(&self) -> (f64, f64) {
        let (x, s) = (self.x, self.s);
        let prefactor = 0.25 * ((x * x - 1.0) / (s * x)).max(0.0).sqrt();
        let a = ((x - 2.0 * s).powi(2) - 1.0).max(0.0).sqrt();
        let b = ((x + 2.0 * s).powi(2) - 1.0).max(0.0).sqrt();
        (prefactor * (a + b), prefactor * (a - b))
    }
}

/// Squeezing degrees `(r₁₃, r₁₂)` of the two twin-beam boxes in the optical
/// preparation circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OpticalRepr", into = "OpticalRepr")]
pub struct OpticalParams {
    r13: f64,
    r12: f64,
}

#[derive(Serialize, Deserialize)]
struct OpticalRepr {
    r13: f64,
    r12: f64,
}

impl TryFrom<OpticalRepr> for OpticalParams {
    type Error = BuildingBlockError;
    fn try_from(r: OpticalRepr) -> Result<Self, Self::Error> {
        OpticalParams::new(r.r13, r.r12)
    }
}

impl From<OpticalParams> for OpticalRepr {
    fn from(p: OpticalParams) -> Self {
        OpticalRepr {
            r13: p.r13,
            r12: p.r12,
        }
    }
}

impl OpticalParams {
    pub fn new(r13: f64, r12: f64) -> Result<Self, BuildingBlockError> {
        for value in [r13, r12] {
            if !value.is_finite() || !(0.0..=MAX_SQUEEZING).contains(&value) {
                return Err(BuildingBlockError::SqueezingOutOfRange { value });
            }
        }
        Ok(OpticalParams { r13, r12 })
    }

    pub fn r13(&self) -> f64 {
        self.r13
    }

    pub fn r12(&self) -> f64 {
        self.r12
    }
}

/// Block parametrization as it appears in configuration files: either the
/// standard-form pair or the optical pair. Round-trips preserve which
/// parametrization was given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BlockParams {
    Standard(StandardFormParams),
    Optical(OpticalParams),
}

/// Assemble the standard-form 6x6 covariance matrix. Bisymmetric under the
/// swap of modes 1 and 2 by construction, and pure at every admissible
/// parameter point.
pub fn standard_form_cm(params: &StandardFormParams) -> CovarianceMatrix {
    let (x, s) = (params.x(), params.s());
    let (tp, tm) = params.t_pair();
    let (up, um) = params.u_pair();
    let mut g = DMatrix::zeros(6, 6);
    for (i, v) in [(0, s), (1, s), (2, s), (3, s), (4, x), (5, x)] {
        g[(i, i)] = v;
    }
    // ε_ss between modes 1 and 2, ε_sx between each input mode and mode 3
    for (i, j, v) in [
        (0, 2, tp),
        (1, 3, tm),
        (0, 4, up),
        (1, 5, um),
        (2, 4, up),
        (3, 5, um),
    ] {
        g[(i, j)] = v;
        g[(j, i)] = v;
    }
    CovarianceMatrix::from_symmetric_unchecked(g)
}

/// Run three vacuum modes through the twin-beam circuit: `T₁₃(r₁₃)` on modes
/// 1 and 3, then `T₁₂(r₁₂)` on modes 1 and 2.
pub fn optical_cm(params: &OpticalParams) -> CovarianceMatrix {
    let t13 = SymplecticTransform::twin_beam(3, params.r13(), (0, 2))
        .expect("fixed mode pair is valid");
    let t12 = SymplecticTransform::twin_beam(3, params.r12(), (0, 1))
        .expect("fixed mode pair is valid");
    let circuit = t12.compose(&t13).expect("matching dimensions");
    circuit
        .apply(&CovarianceMatrix::vacuum(3))
        .expect("matching dimensions")
}

/// Local-symplectic invariants of a three-mode state: the determinants of
/// every single-mode and two-mode reduction plus the global determinant.
/// Two states are locally equivalent for this module's purposes when their
/// tuples agree within tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalInvariants {
    pub det1: f64,
    pub det2: f64,
    pub det3: f64,
    pub det12: f64,
    pub det13: f64,
    pub det23: f64,
    pub det_full: f64,
}

impl LocalInvariants {
    pub fn max_abs_diff(&self, other: &LocalInvariants) -> f64 {
        [
            self.det1 - other.det1,
            self.det2 - other.det2,
            self.det3 - other.det3,
            self.det12 - other.det12,
            self.det13 - other.det13,
            self.det23 - other.det23,
            self.det_full - other.det_full,
        ]
        .iter()
        .fold(0.0f64, |acc, d| acc.max(d.abs()))
    }
}

pub fn local_invariants(gamma: &CovarianceMatrix) -> Result<LocalInvariants, BuildingBlockError> {
    if gamma.n_modes() != 3 {
        return Err(BuildingBlockError::DimensionError {
            n_modes: gamma.n_modes(),
        });
    }
    let det = |modes: &[usize]| -> Result<f64, BuildingBlockError> {
        Ok(gamma.reduced(modes)?.determinant())
    };
    Ok(LocalInvariants {
        det1: det(&[0])?,
        det2: det(&[1])?,
        det3: det(&[2])?,
        det12: det(&[0, 1])?,
        det13: det(&[0, 2])?,
        det23: det(&[1, 2])?,
        det_full: gamma.determinant(),
    })
}

/// Product of the two diagonal entries of the reduced mode-1 block of the
/// optical circuit output, i.e. `det γ_s` as a function of `r₁₂` at fixed
/// `cosh 2r₁₃ = x`. Monotonically increasing in `r₁₂`, with value `s_min²`
/// at `r₁₂ = 0`.
fn optical_det_gamma_s(x: f64, r12: f64) -> f64 {
    let u = (4.0 * r12).exp();
    0.25 * (x * x + u * x + x / u + 1.0)
}

/// Squeezing degrees that prepare a state locally equivalent to the
/// standard-form block.
///
/// `r₁₃` follows from `cosh 2r₁₃ = x`; `r₁₂` is found by a bisection that
/// matches the single-mode invariant `det γ_s = s²`, and the full invariant
/// tuple is verified before the result is accepted.
pub fn optical_from_standard(
    params: &StandardFormParams,
) -> Result<OpticalParams, BuildingBlockError> {
    let (x, s) = (params.x(), params.s());
    let r13 = 0.5 * x.acosh();
    let target = s * s;

    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while optical_det_gamma_s(x, hi) < target {
        hi *= 2.0;
        if hi > MAX_SQUEEZING {
            return Err(BuildingBlockError::ConversionError(format!(
                "no r12 <= {MAX_SQUEEZING} reaches det γ_s = {target}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if optical_det_gamma_s(x, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r12 = 0.5 * (lo + hi);
    let optical = OpticalParams::new(r13, r12)?;

    let inv_optical = local_invariants(&optical_cm(&optical))?;
    let inv_standard = local_invariants(&standard_form_cm(params))?;
    let mismatch = inv_optical.max_abs_diff(&inv_standard);
    if mismatch > 1e-8 {
        return Err(BuildingBlockError::ConversionError(format!(
            "local invariants disagree by {mismatch:.3e} after solve"
        )));
    }
    Ok(optical)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use nalgebra::DMatrix;

    /// Closed-form covariance blocks of the optical circuit output, used as
    /// an independent oracle for the circuit route.
    fn optical_cm_closed_form(r13: f64, r12: f64) -> DMatrix<f64> {
        let c13 = (2.0 * r13).cosh();
        let em2 = (-2.0 * r12).exp();
        let e4 = (4.0 * r12).exp();
        let gs = [
            0.5 * em2 * (e4 * c13 + 1.0),
            0.5 * em2 * (c13 + e4),
        ];
        let ess = [
            0.5 * em2 * (e4 * c13 - 1.0),
            0.5 * em2 * (c13 - e4),
        ];
        let esx = [
            2.0f64.sqrt() * r12.exp() * r13.cosh() * r13.sinh(),
            -(2.0f64.sqrt()) * (-r12).exp() * r13.cosh() * r13.sinh(),
        ];
        let mut g = DMatrix::zeros(6, 6);
        g[(0, 0)] = gs[0];
        g[(1, 1)] = gs[1];
        g[(2, 2)] = gs[0];
        g[(3, 3)] = gs[1];
        g[(4, 4)] = c13;
        g[(5, 5)] = c13;
        for (i, j, v) in [
            (0, 2, ess[0]),
            (1, 3, ess[1]),
            (0, 4, esx[0]),
            (1, 5, esx[1]),
            (2, 4, esx[0]),
            (3, 5, esx[1]),
        ] {
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
        g
    }

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    #[test]
    fn standard_form_values_at_reference_point() {
        // direct substitution at (x, s) = (2, 1.5): the t discriminant is 0
        let p = StandardFormParams::new(2.0, 1.5).unwrap();
        let (tp, tm) = p.t_pair();
        let (up, um) = p.u_pair();
        assert_relative_eq!(tp, 0.5, epsilon = 1e-12);
        assert_relative_eq!(tm, 0.5, epsilon = 1e-12);
        assert_relative_eq!(up, 24.0f64.sqrt() / 4.0, epsilon = 1e-12);
        assert_relative_eq!(um, -(24.0f64.sqrt()) / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn standard_form_is_pure() {
        for (x, s) in [(2.0, 1.5), (2.0, 3.0), (1.3, 2.7), (3.5, 9.0)] {
            let p = StandardFormParams::new(x, s).unwrap();
            let g = standard_form_cm(&p);
            assert_relative_eq!(g.determinant(), 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn standard_form_is_bisymmetric() {
        let p = StandardFormParams::new(2.4, 2.2).unwrap();
        let g = standard_form_cm(&p);
        // swap modes 1 and 2
        let swapped = g.reduced(&[1, 0, 2]).unwrap();
        assert_eq!(swapped.matrix(), g.matrix());
    }

    #[test]
    fn x_equal_one_decouples_output_port() {
        let p = StandardFormParams::new(1.0, 1.7).unwrap();
        let (up, um) = p.u_pair();
        assert_eq!(up, 0.0);
        assert_eq!(um, 0.0);
        let g = standard_form_cm(&p);
        let out_mode = g.reduced(&[2]).unwrap();
        assert_eq!(out_mode.matrix(), CovarianceMatrix::vacuum(1).matrix());
    }

    #[test]
    fn boundary_acceptance_and_rejection() {
        let x = 2.0;
        let s_min = StandardFormParams::s_min(x);
        let p = StandardFormParams::new(x, s_min).unwrap();
        let (up, um) = p.u_pair();
        // (x - 2s)² - 1 = 0 at the boundary, so u₊ = -u₋
        assert_relative_eq!(up, -um, epsilon = 1e-12);
        assert!(StandardFormParams::new(x, s_min - 1e-9).is_err());
        assert!(StandardFormParams::new(0.99, 2.0).is_err());
    }

    #[test]
    fn physicality_of_block_at_reference_point() {
        let p = StandardFormParams::new(2.0, 1.5).unwrap();
        let phys = standard_form_cm(&p).is_physical().unwrap();
        assert!(phys.physical, "margin {}", phys.margin);
    }

    #[test]
    fn optical_circuit_matches_closed_form() {
        for (r13, r12) in [(0.3, 0.2), (0.0, 0.0), (0.9, 0.1), (0.2, 1.1)] {
            let p = OpticalParams::new(r13, r12).unwrap();
            let circuit = optical_cm(&p);
            let closed = optical_cm_closed_form(r13, r12);
            assert!(
                max_abs_diff(circuit.matrix(), &closed) < 1e-10,
                "mismatch at r13={r13} r12={r12}"
            );
        }
    }

    #[test]
    fn optical_output_port_block() {
        let p = OpticalParams::new(0.7, 0.4).unwrap();
        let g = optical_cm(&p);
        let c13 = (2.0f64 * 0.7).cosh();
        assert_relative_eq!(g.matrix()[(4, 4)], c13, epsilon = 1e-12);
        assert_relative_eq!(g.matrix()[(5, 5)], c13, epsilon = 1e-12);
    }

    #[test]
    fn optical_at_zero_is_vacuum() {
        let p = OpticalParams::new(0.0, 0.0).unwrap();
        let g = optical_cm(&p);
        assert!(max_abs_diff(g.matrix(), CovarianceMatrix::vacuum(3).matrix()) < 1e-14);
    }

    #[test]
    fn conversion_trivial_case() {
        let p = StandardFormParams::new(1.0, 1.0).unwrap();
        let o = optical_from_standard(&p).unwrap();
        assert_abs_diff_eq!(o.r13(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(o.r12(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn conversion_fixes_r13_from_output_covariance() {
        let p = StandardFormParams::new(2.0, 3.0).unwrap();
        let o = optical_from_standard(&p).unwrap();
        assert_relative_eq!((2.0 * o.r13()).cosh(), 2.0, epsilon = 1e-12);
        assert_relative_eq!(o.r13(), 0.5 * 2.0f64.acosh(), epsilon = 1e-12);
    }

    #[test]
    fn conversion_matches_local_invariants() {
        for (x, s) in [(2.0, 3.0), (1.5, 1.4), (3.0, 2.5), (1.2, 4.0)] {
            let p = StandardFormParams::new(x, s).unwrap();
            let o = optical_from_standard(&p).unwrap();
            let li_o = local_invariants(&optical_cm(&o)).unwrap();
            let li_s = local_invariants(&standard_form_cm(&p)).unwrap();
            assert!(
                li_o.max_abs_diff(&li_s) < 1e-8,
                "invariants differ at ({x}, {s})"
            );
        }
    }

    #[test]
    fn local_invariants_of_standard_form() {
        let p = StandardFormParams::new(2.0, 1.5).unwrap();
        let li = local_invariants(&standard_form_cm(&p)).unwrap();
        assert_relative_eq!(li.det1, 2.25, epsilon = 1e-12);
        assert_relative_eq!(li.det2, 2.25, epsilon = 1e-12);
        assert_relative_eq!(li.det3, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn local_invariants_unchanged_by_single_mode_symplectics() {
        let p = StandardFormParams::new(2.0, 2.5).unwrap();
        let g = standard_form_cm(&p);
        let before = local_invariants(&g).unwrap();
        // rotation ⊕ squeezer ⊕ rotation, one per mode
        let angle: f64 = 0.61;
        let rot = [
            [angle.cos(), angle.sin()],
            [-angle.sin(), angle.cos()],
        ];
        let sq = [[1.4, 0.0], [0.0, 1.0 / 1.4]];
        let s0 = SymplecticTransform::single_mode(3, 0, rot).unwrap();
        let s1 = SymplecticTransform::single_mode(3, 1, sq).unwrap();
        let s2 = SymplecticTransform::single_mode(3, 2, rot).unwrap();
        let local = s0.compose(&s1).unwrap().compose(&s2).unwrap();
        let after = local_invariants(&local.apply(&g).unwrap()).unwrap();
        assert!(before.max_abs_diff(&after) < 1e-10);
    }

    #[test]
    fn local_invariants_reject_wrong_mode_count() {
        let vac = CovarianceMatrix::vacuum(2);
        assert!(matches!(
            local_invariants(&vac),
            Err(BuildingBlockError::DimensionError { .. })
        ));
    }

    #[test]
    fn block_params_round_trip_preserves_parametrization() {
        let std_params =
            BlockParams::Standard(StandardFormParams::new(2.0, 3.0).unwrap());
        let text = serde_json::to_string(&std_params).unwrap();
        assert!(text.contains("\"x\""));
        let back: BlockParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, std_params);

        let opt_params = BlockParams::Optical(OpticalParams::new(0.3, 0.2).unwrap());
        let text = serde_json::to_string(&opt_params).unwrap();
        assert!(text.contains("\"r13\""));
        let back: BlockParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, opt_params);
    }
}
