use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Numerical tolerances used across the crate.
///
/// One record centralizes every comparison threshold so callers (and the CLI
/// `--tol-override` flag) can loosen or tighten checks consistently. All
/// checks accept a `&Tolerances`; `Tolerances::default()` is used by the
/// convenience methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Entrywise symmetry tolerance for covariance matrices.
    pub sym: f64,
    /// Physicality margin: a state is physical iff every symplectic
    /// eigenvalue is at least `1 - phys`. Also the separability margin for
    /// partial-transpose eigenvalues.
    pub phys: f64,
    /// Relative tolerance on `det γ = 1` for purity checks.
    pub pure_rel: f64,
    /// Absolute tolerance for the even-multiplicity pairing of symplectic
    /// eigenvalue moduli.
    pub pairing: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            sym: 1e-10,
            phys: 1e-9,
            pure_rel: 1e-8,
            pairing: 1e-8,
        }
    }
}

/// Raised when an override key does not name a known tolerance.
#[derive(Debug, Error)]
#[error("unknown tolerance key `{key}` (expected one of tau_sym, tau_phys, tau_pure, tau_pair)")]
pub struct UnknownToleranceKey {
    pub key: String,
}

impl Tolerances {
    /// Set a tolerance by its CLI key (`tau_sym`, `tau_phys`, `tau_pure`,
    /// `tau_pair`).
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), UnknownToleranceKey> {
        match key {
            "tau_sym" => self.sym = value,
            "tau_phys" => self.phys = value,
            "tau_pure" => self.pure_rel = value,
            "tau_pair" => self.pairing = value,
            _ => {
                return Err(UnknownToleranceKey {
                    key: key.to_owned(),
                })
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let t = Tolerances::default();
        assert_eq!(t.sym, 1e-10);
        assert_eq!(t.phys, 1e-9);
        assert_eq!(t.pure_rel, 1e-8);
        assert_eq!(t.pairing, 1e-8);
    }

    #[test]
    fn set_by_key() {
        let mut t = Tolerances::default();
        t.set("tau_phys", 1.0).unwrap();
        assert_eq!(t.phys, 1.0);
        assert!(t.set("tau_bogus", 0.0).is_err());
    }
}
