use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::clifford::ExtendedCliffordSet;
use crate::{Error, Result};

use super::{infidelity_comp_exact, unitary_error, Channel};

/// Which error channel follows each gate.
#[derive(Clone, Debug, PartialEq)]
pub enum GateErrors {
    /// One channel after every gate, including the inverter.
    Independent(Channel),
    /// `per_clifford[id]` follows Clifford element `id` (for every phase
    /// mask); `inverter` follows the final inverting gate.
    Dependent {
        per_clifford: Vec<Channel>,
        inverter: Channel,
    },
}

/// State preparation and measurement errors.
#[derive(Clone, Debug, PartialEq)]
pub struct Spam {
    pub prep: Channel,
    pub meas: Channel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorModel {
    gates: GateErrors,
    spam: Option<Spam>,
}

impl ErrorModel {
    pub fn gate_independent(ch: Channel) -> Self {
        Self {
            gates: GateErrors::Independent(ch),
            spam: None,
        }
    }

    pub fn error_free(dim: usize) -> Self {
        Self::gate_independent(Channel::identity(dim))
    }

    pub fn gate_dependent(per_clifford: Vec<Channel>, inverter: Channel) -> Result<Self> {
        let dim = inverter.dim();
        if let Some(bad) = per_clifford.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        if per_clifford.is_empty() {
            return Err(Error::InvalidArgument(
                "no per-gate channels supplied".into(),
            ));
        }
        Ok(Self {
            gates: GateErrors::Dependent {
                per_clifford,
                inverter,
            },
            spam: None,
        })
    }

    pub fn with_spam(mut self, prep: Channel, meas: Channel) -> Result<Self> {
        for c in [&prep, &meas] {
            if c.dim() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: c.dim(),
                });
            }
        }
        self.spam = Some(Spam { prep, meas });
        Ok(self)
    }

    pub fn gates(&self) -> &GateErrors {
        &self.gates
    }

    pub fn spam(&self) -> Option<&Spam> {
        self.spam.as_ref()
    }

    pub fn dim(&self) -> usize {
        match &self.gates {
            GateErrors::Independent(c) => c.dim(),
            GateErrors::Dependent { inverter, .. } => inverter.dim(),
        }
    }

    /// Channel following Clifford element `id`.
    pub fn gate_channel(&self, id: usize) -> &Channel {
        match &self.gates {
            GateErrors::Independent(c) => c,
            GateErrors::Dependent { per_clifford, .. } => &per_clifford[id],
        }
    }

    pub fn inverter_channel(&self) -> &Channel {
        match &self.gates {
            GateErrors::Independent(c) => c,
            GateErrors::Dependent { inverter, .. } => inverter,
        }
    }

    /// Checks that every element of `set` has a channel of the right size.
    pub fn check_covers(&self, set: &ExtendedCliffordSet) -> Result<()> {
        if self.dim() != set.dim() {
            return Err(Error::DimensionMismatch {
                expected: set.dim(),
                found: self.dim(),
            });
        }
        if let GateErrors::Dependent { per_clifford, .. } = &self.gates {
            if per_clifford.len() != set.cliffords().len() {
                return Err(Error::Integrity(format!(
                    "gate-dependent model has {} channels for {} Clifford elements",
                    per_clifford.len(),
                    set.cliffords().len()
                )));
            }
        }
        Ok(())
    }

    /// Computational-subspace infidelity averaged over the gate channels.
    pub fn mean_gate_infidelity(&self) -> f64 {
        match &self.gates {
            GateErrors::Independent(c) => infidelity_comp_exact(c),
            GateErrors::Dependent { per_clifford, .. } => {
                per_clifford.iter().map(infidelity_comp_exact).sum::<f64>()
                    / per_clifford.len() as f64
            }
        }
    }
}

/// `count` channels `U_j o base`, each `U_j` an independent
/// [`unitary_error`] of strength `spread`.
pub fn perturbed_channels<R: Rng + ?Sized>(
    base: &Channel,
    count: usize,
    spread: f64,
    rng: &mut R,
) -> Result<Vec<Channel>> {
    (0..count)
        .map(|j| {
            let u = unitary_error(base.dim(), spread, rng)?;
            Ok(u.after(base).with_label(format!("gate{j}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{channel_distance, depolarizing_comp};
    use crate::clifford::{build_extended_set, EntanglerVariant, LeakagePolicy};

    #[test]
    fn coverage_is_checked() {
        let set =
            build_extended_set(1, LeakagePolicy::Identity, EntanglerVariant::Diagonal).unwrap();
        let base = depolarizing_comp(1, 0.01).unwrap();
        let mut rng = crate::rng_from_seed(1);
        let chans = perturbed_channels(&base, 24, 1e-3, &mut rng).unwrap();
        let model = ErrorModel::gate_dependent(chans.clone(), base.clone()).unwrap();
        assert!(model.check_covers(&set).is_ok());
        let short = ErrorModel::gate_dependent(chans[..23].to_vec(), base).unwrap();
        assert!(matches!(short.check_covers(&set), Err(Error::Integrity(_))));
    }

    #[test]
    fn perturbations_stay_close() {
        let base = depolarizing_comp(1, 0.01).unwrap();
        let mut rng = crate::rng_from_seed(2);
        for ch in perturbed_channels(&base, 10, 1e-3, &mut rng).unwrap() {
            assert!(channel_distance(&ch, &base).unwrap() < 5e-3);
        }
    }

    #[test]
    fn spam_dimension_is_checked() {
        let m = ErrorModel::error_free(3);
        assert!(m
            .clone()
            .with_spam(Channel::identity(9), Channel::identity(3))
            .is_err());
        assert!(m
            .with_spam(Channel::identity(3), Channel::identity(3))
            .is_ok());
    }
}
