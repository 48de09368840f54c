use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::operator::HermitianOperator;
use crate::error::{Error, Result};
use crate::numerics::log_sum_exp;

const DEGENERACY_GAP: f64 = 1e-12;

/// Inverse temperature, with zero temperature as an explicit sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Finite(f64),
    GroundState,
}

impl Beta {
    pub fn finite(self) -> Option<f64> {
        match self {
            Beta::Finite(b) => Some(b),
            Beta::GroundState => None,
        }
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            Beta::Finite(b) if !(b >= 0.0 && b.is_finite()) => Err(Error::invalid(format!(
                "beta must be finite and non-negative, got {b}"
            ))),
            other => Ok(other),
        }
    }
}

/// Serialized as a number, or the string `"inf"` for the ground state.
impl Serialize for Beta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Beta::Finite(b) => s.serialize_f64(*b),
            Beta::GroundState => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(b) if b >= 0.0 && b.is_finite() => Ok(Beta::Finite(b)),
            Raw::Number(b) => Err(serde::de::Error::custom(format!(
                "beta must be non-negative, got {b}"
            ))),
            Raw::Text(t) if t == "inf" => Ok(Beta::GroundState),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "beta must be a number or \"inf\", got \"{t}\""
            ))),
        }
    }
}

/// Canonical ensemble `ρ_G = e^{-βH}/Z` in the eigenbasis of `H`.
#[derive(Debug, Clone)]
pub struct GibbsEnsemble {
    pub beta: Beta,
    /// `p_n`, aligned with the ascending eigenvalues.
    pub weights: Vec<f64>,
    /// `ln Z`; absent at zero temperature.
    pub ln_partition: Option<f64>,
    /// `-ln Z / β`, or the ground energy at zero temperature.
    pub free_energy: f64,
    /// Set when the zero-temperature ground state is degenerate and the
    /// ensemble is a uniform mixture over the ground manifold.
    pub degenerate_ground: bool,
}

impl GibbsEnsemble {
    pub fn partition(&self) -> Option<f64> {
        self.ln_partition.map(f64::exp)
    }
}

pub fn gibbs_state(h: &HermitianOperator, beta: Beta) -> Result<GibbsEnsemble> {
    let beta = beta.validate()?;
    let energies = h.eigenvalues();
    let e0 = energies[0];
    match beta {
        Beta::GroundState => {
            let degenerate = energies
                .iter()
                .take_while(|e| **e - e0 < DEGENERACY_GAP)
                .count();
            let mut weights = vec![0.0; energies.len()];
            for w in weights.iter_mut().take(degenerate) {
                *w = 1.0 / degenerate as f64;
            }
            Ok(GibbsEnsemble {
                beta,
                weights,
                ln_partition: None,
                free_energy: e0,
                degenerate_ground: degenerate > 1,
            })
        }
        Beta::Finite(b) => {
            // Shift by the ground energy so the largest exponent is zero.
            let logs: Vec<f64> = energies.iter().map(|e| -b * (e - e0)).collect();
            let ln_shifted = log_sum_exp(&logs);
            let weights: Vec<f64> = logs.iter().map(|l| (l - ln_shifted).exp()).collect();
            let ln_z = ln_shifted - b * e0;
            let free_energy = if b > 0.0 { -ln_z / b } else { f64::NEG_INFINITY };
            Ok(GibbsEnsemble {
                beta,
                weights,
                ln_partition: Some(ln_z),
                free_energy,
                degenerate_ground: false,
            })
        }
    }
}

/// `ΔF = F_β(final) - F_β(initial)`; `Δε₀` at zero temperature.
pub fn free_energy_difference(
    h0: &HermitianOperator,
    hf: &HermitianOperator,
    beta: Beta,
) -> Result<f64> {
    match beta.validate()? {
        Beta::GroundState => Ok(hf.ground_energy() - h0.ground_energy()),
        Beta::Finite(b) if b > 0.0 => {
            let ln_z = |h: &HermitianOperator| {
                let e0 = h.ground_energy();
                let logs: Vec<f64> = h.eigenvalues().iter().map(|e| -b * (e - e0)).collect();
                log_sum_exp(&logs) - b * e0
            };
            Ok(-(ln_z(hf) - ln_z(h0)) / b)
        }
        Beta::Finite(_) => Err(Error::invalid(
            "free energy difference is undefined at beta = 0",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level() -> HermitianOperator {
        HermitianOperator::from_real_diagonal(&[-1.0, 1.0]).unwrap()
    }

    #[test]
    fn infinite_temperature_is_uniform() {
        let g = gibbs_state(&two_level(), Beta::Finite(0.0)).unwrap();
        assert_eq!(g.weights, vec![0.5, 0.5]);
        assert!((g.partition().unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn two_level_closed_form() {
        let g = gibbs_state(&two_level(), Beta::Finite(1.0)).unwrap();
        let e = std::f64::consts::E;
        let z = e + 1.0 / e;
        assert!((g.weights[0] - e / z).abs() < 1e-15);
        assert!((g.weights[1] - 1.0 / (e * z)).abs() < 1e-15);
        assert!((g.free_energy + z.ln()).abs() < 1e-14);
        assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_temperature_projects_on_ground() {
        let g = gibbs_state(&two_level(), Beta::GroundState).unwrap();
        assert_eq!(g.weights, vec![1.0, 0.0]);
        assert!(!g.degenerate_ground);
        let deg = HermitianOperator::from_real_diagonal(&[0.0, 0.0, 1.0]).unwrap();
        let g = gibbs_state(&deg, Beta::GroundState).unwrap();
        assert_eq!(g.weights, vec![0.5, 0.5, 0.0]);
        assert!(g.degenerate_ground);
    }

    #[test]
    fn huge_beta_does_not_overflow() {
        let g = gibbs_state(&two_level(), Beta::Finite(1e6)).unwrap();
        assert_eq!(g.weights[0], 1.0);
        assert!(g.free_energy.is_finite());
    }

    #[test]
    fn free_energy_of_sigma_z_family() {
        let h0 = HermitianOperator::from_real_diagonal(&[1.0, -1.0]).unwrap();
        let hf = HermitianOperator::from_real_diagonal(&[1.2, -1.2]).unwrap();
        let df = free_energy_difference(&h0, &hf, Beta::Finite(1.0)).unwrap();
        let exact = (1f64.cosh() / 1.2f64.cosh()).ln();
        assert!((df - exact).abs() < 1e-14);
        assert!((df + 0.1599).abs() < 1e-4);
        assert_eq!(free_energy_difference(&h0, &h0, Beta::Finite(1.0)).unwrap(), 0.0);
        let gs = free_energy_difference(&h0, &hf, Beta::GroundState).unwrap();
        assert!((gs + 0.2).abs() < 1e-14);
    }

    #[test]
    fn beta_json_forms() {
        let b: Beta = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(b, Beta::GroundState);
        let b: Beta = serde_json::from_str("0.5").unwrap();
        assert_eq!(b, Beta::Finite(0.5));
        assert!(serde_json::from_str::<Beta>("-1").is_err());
        assert_eq!(serde_json::to_string(&Beta::GroundState).unwrap(), "\"inf\"");
    }
}
