//! Two-qubit-gate noise: depolarizing Pauli faults and heralded erasures.
//!
//! Each two-qubit gate suffers at most one fault, with total probability `p`.
//! A fault is an erasure with probability `p_e = p·R_e` and a Pauli fault with
//! probability `p_p = p·(1 − R_e)`. Equivalently, erasure is sampled first and
//! the Pauli branch fires with `p_p / (1 − p_e)` when no erasure occurred.
//! Erasures always raise the gate's herald, even when the conditional Pauli
//! is the identity. Preparation, measurement, single-qubit gates and idling
//! are noiseless.
//!
//! Two-qubit Paulis are encoded as 4-bit masks: bit 0 is `X` on the control,
//! bit 1 `Z` on the control, bit 2 `X` on the target and bit 3 `Z` on the
//! target.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{AnnotatedCircuit, GateSite};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErasureKind {
    /// Reload into the maximally mixed state: each of the 16 two-qubit Paulis with probability 1/16.
    Unbiased,
    /// Reload into a dephased state: each of `{I, Z}⊗²` with probability 1/4.
    Biased,
}

impl fmt::Display for ErasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErasureKind::Unbiased => "unbiased",
            ErasureKind::Biased => "biased",
        })
    }
}

impl std::str::FromStr for ErasureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unbiased" => Ok(Self::Unbiased),
            "biased" => Ok(Self::Biased),
            _ => Err(Error::Parse(format!(
                "erasure kind must be \"unbiased\" or \"biased\", got {s:?}"
            ))),
        }
    }
}

const UNBIASED_OUTCOMES: [u8; 16] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15];
const BIASED_OUTCOMES: [u8; 4] = [0, 2, 8, 10];

impl ErasureKind {
    /// Equiprobable two-qubit Paulis an erasure reloads into, identity included.
    pub fn outcomes(self) -> &'static [u8] {
        match self {
            ErasureKind::Unbiased => &UNBIASED_OUTCOMES,
            ErasureKind::Biased => &BIASED_OUTCOMES,
        }
    }

    /// Probability of each outcome given that the erasure fired.
    pub fn conditional_probability(self) -> f64 {
        1.0 / self.outcomes().len() as f64
    }

    /// Default min-sum scaling factor for this erasure kind.
    pub fn default_scaling(self) -> f64 {
        match self {
            ErasureKind::Unbiased => 0.625,
            ErasureKind::Biased => 0.35,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub p: f64,
    pub erasure_fraction: f64,
    pub erasure_kind: ErasureKind,
}

impl NoiseSpec {
    pub fn new(p: f64, erasure_fraction: f64, erasure_kind: ErasureKind) -> Result<Self> {
        let spec = Self {
            p,
            erasure_fraction,
            erasure_kind,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParameter(format!("p = {} outside [0, 1]", self.p)));
        }
        if !(0.0..=1.0).contains(&self.erasure_fraction) {
            return Err(Error::InvalidParameter(format!(
                "erasure fraction {} outside [0, 1]",
                self.erasure_fraction
            )));
        }
        Ok(())
    }

    /// `p_p = p·(1 − R_e)`.
    pub fn p_pauli(&self) -> f64 {
        self.p * (1.0 - self.erasure_fraction)
    }

    /// `p_e = p·R_e`.
    pub fn p_erasure(&self) -> f64 {
        self.p * self.erasure_fraction
    }

    /// Pauli-branch probability conditioned on no erasure.
    pub fn p_pauli_given_no_erasure(&self) -> f64 {
        let pe = self.p_erasure();
        if pe >= 1.0 {
            0.0
        } else {
            self.p_pauli() / (1.0 - pe)
        }
    }

    /// `p_e + (1 − p_e)·p_p'`, which equals `p`.
    pub fn marginal_fault_probability(&self) -> f64 {
        let pe = self.p_erasure();
        pe + (1.0 - pe) * self.p_pauli_given_no_erasure()
    }

    /// Fraction of faults that are erasures.
    pub fn erasure_share(&self) -> f64 {
        if self.p == 0.0 {
            0.0
        } else {
            self.p_erasure() / self.p
        }
    }

    /// Stable 64-bit digest of the spec, embedded in shot dumps.
    pub fn hash64(&self) -> u64 {
        let mut h = Sha256::new();
        h.update(self.p.to_bits().to_le_bytes());
        h.update(self.erasure_fraction.to_bits().to_le_bytes());
        h.update(self.erasure_kind.to_string().as_bytes());
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
    }
}

/// A circuit with one noise site (Pauli plus heralded erasure) after every
/// two-qubit gate. Herald `h` belongs to the `h`-th two-qubit gate.
#[derive(Clone, Debug)]
pub struct NoisyCircuit {
    circuit: AnnotatedCircuit,
    spec: NoiseSpec,
    sites: Vec<GateSite>,
}

pub fn attach(circuit: AnnotatedCircuit, spec: NoiseSpec) -> Result<NoisyCircuit> {
    spec.validate()?;
    let sites = circuit.gate_sites();
    Ok(NoisyCircuit { circuit, spec, sites })
}

impl NoisyCircuit {
    pub fn circuit(&self) -> &AnnotatedCircuit {
        &self.circuit
    }

    pub fn spec(&self) -> &NoiseSpec {
        &self.spec
    }

    /// Noise sites in gate order; index = herald index.
    pub fn sites(&self) -> &[GateSite] {
        &self.sites
    }

    pub fn num_heralds(&self) -> usize {
        self.sites.len()
    }

    /// Same circuit under a different noise spec.
    pub fn with_spec(&self, spec: NoiseSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            circuit: self.circuit.clone(),
            spec,
            sites: self.sites.clone(),
        })
    }
}

/// Where each herald bit comes from.
pub fn herald_layout(noisy: &NoisyCircuit) -> &[GateSite] {
    noisy.sites()
}
