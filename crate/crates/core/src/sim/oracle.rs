use std::collections::HashMap;

use crate::circuit::{AnnotatedCircuit, Basis, GateKind, Instruction};
use crate::error::{Error, Result};
use crate::noise::NoisyCircuit;

/// Largest number of noise sites [`exact_oracle`] will enumerate.
pub const ORACLE_SITE_CAP: usize = 12;

/// Exact joint distribution over detector, observable and herald bits.
///
/// Outcomes are packed into a `u128` key: detectors in bits `0..D`,
/// observables in `D..D+K`, heralds in `D+K..D+K+H`.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub num_heralds: usize,
    /// `(key, probability)`, sorted by key; probabilities sum to one.
    pub atoms: Vec<(u128, f64)>,
}

impl ExactDistribution {
    pub fn detector_bit(&self, i: usize) -> usize {
        i
    }

    pub fn observable_bit(&self, k: usize) -> usize {
        self.num_detectors + k
    }

    pub fn herald_bit(&self, h: usize) -> usize {
        self.num_detectors + self.num_observables + h
    }

    pub fn probability(&self, key: u128) -> f64 {
        self.atoms
            .binary_search_by_key(&key, |a| a.0)
            .map_or(0.0, |i| self.atoms[i].1)
    }

    /// `P(bit = 1)`.
    pub fn marginal(&self, bit: usize) -> f64 {
        self.atoms.iter().filter(|a| a.0 >> bit & 1 == 1).map(|a| a.1).sum()
    }

    /// `P(bit a = 1 and bit b = 1)`.
    pub fn joint(&self, a: usize, b: usize) -> f64 {
        self.atoms
            .iter()
            .filter(|x| x.0 >> a & 1 == 1 && x.0 >> b & 1 == 1)
            .map(|x| x.1)
            .sum()
    }

    /// Marginal over the bits selected by `mask`.
    pub fn project(&self, mask: u128) -> HashMap<u128, f64> {
        let mut out = HashMap::new();
        for &(k, p) in &self.atoms {
            *out.entry(k & mask).or_insert(0.0) += p;
        }
        out
    }
}

/// Single-fault effect on measurement outcomes, propagated one Pauli at a
/// time by direct conjugation through the instruction list.
fn propagate_single(circuit: &AnnotatedCircuit, start: usize, paulis: &[(usize, bool, bool)]) -> Vec<bool> {
    let n = circuit.num_qubits();
    let (mut x, mut z) = (vec![false; n], vec![false; n]);
    for &(q, px, pz) in paulis {
        x[q] ^= px;
        z[q] ^= pz;
    }
    let mut flips = vec![false; circuit.num_measurements()];
    for ins in &circuit.instructions()[start + 1..] {
        match *ins {
            Instruction::Prep { qubit, .. } => {
                x[qubit] = false;
                z[qubit] = false;
            }
            Instruction::H { qubit } => {
                let t = x[qubit];
                x[qubit] = z[qubit];
                z[qubit] = t;
            }
            Instruction::Gate {
                kind: GateKind::CX,
                control,
                target,
            } => {
                // X on the control spreads to the target; Z on the target spreads back.
                if x[control] {
                    x[target] = !x[target];
                }
                if z[target] {
                    z[control] = !z[control];
                }
            }
            Instruction::Gate {
                kind: GateKind::CZ,
                control,
                target,
            } => {
                let (xc, xt) = (x[control], x[target]);
                z[target] ^= xc;
                z[control] ^= xt;
            }
            Instruction::Measure { qubit, basis, index } => {
                flips[index] = match basis {
                    Basis::Z => x[qubit],
                    Basis::X => z[qubit],
                };
            }
            Instruction::Tick => {}
        }
    }
    flips
}

/// Exact outcome distribution of a small noisy circuit.
///
/// Each site independently contributes one of: no fault (`1 − p`), an erasure
/// with conditional Pauli `P` (`p_e / |outcomes|` each, herald raised), or a
/// Pauli fault (`p_p / 15` each). Because outcome bits are linear in the
/// injected Paulis, the joint law is the XOR-convolution of the per-site laws.
///
/// Refuses circuits with more than [`ORACLE_SITE_CAP`] sites or more than 128
/// outcome bits.
pub fn exact_oracle(noisy: &NoisyCircuit) -> Result<ExactDistribution> {
    let circuit = noisy.circuit();
    let sites = noisy.sites();
    if sites.len() > ORACLE_SITE_CAP {
        return Err(Error::Budget(format!(
            "{} noise sites exceed the exact-oracle cap of {ORACLE_SITE_CAP}",
            sites.len()
        )));
    }
    let (nd, nk, nh) = (circuit.num_detectors(), circuit.num_observables(), sites.len());
    if nd + nk + nh > 128 {
        return Err(Error::Budget(format!(
            "{} outcome bits exceed the 128-bit oracle key",
            nd + nk + nh
        )));
    }
    let key_of = |flips: &[bool]| -> u128 {
        let mut key = 0u128;
        for (i, d) in circuit.detectors().iter().enumerate() {
            if d.iter().filter(|&&m| flips[m]).count() % 2 == 1 {
                key |= 1 << i;
            }
        }
        for (k, o) in circuit.observables().iter().enumerate() {
            if o.iter().filter(|&&m| flips[m]).count() % 2 == 1 {
                key |= 1 << (nd + k);
            }
        }
        key
    };
    let spec = noisy.spec();
    let outcomes = spec.erasure_kind.outcomes();
    let pe_each = spec.p_erasure() / outcomes.len() as f64;
    let pp_each = spec.p_pauli() / 15.0;

    let mut dist: HashMap<u128, f64> = HashMap::from([(0, 1.0)]);
    for (h, site) in sites.iter().enumerate() {
        let (c, t) = (site.control, site.target);
        let mask_key = |mask: u8| -> u128 {
            let paulis = [(c, mask & 1 != 0, mask & 2 != 0), (t, mask & 4 != 0, mask & 8 != 0)];
            key_of(&propagate_single(circuit, site.instruction, &paulis))
        };
        let herald = 1u128 << (nd + nk + h);
        let mut local: Vec<(u128, f64)> = vec![(0, 1.0 - spec.p)];
        for mask in 1..16u8 {
            local.push((mask_key(mask), pp_each));
        }
        for &mask in outcomes {
            local.push((mask_key(mask) | herald, pe_each));
        }
        let mut next: HashMap<u128, f64> = HashMap::with_capacity(dist.len() * 2);
        for (&k, &p) in &dist {
            for &(lk, lp) in &local {
                if lp > 0.0 {
                    *next.entry(k ^ lk).or_insert(0.0) += p * lp;
                }
            }
        }
        dist = next;
    }
    let mut atoms: Vec<(u128, f64)> = dist.into_iter().filter(|a| a.1 > 0.0).collect();
    atoms.sort_unstable_by_key(|a| a.0);
    Ok(ExactDistribution {
        num_detectors: nd,
        num_observables: nk,
        num_heralds: nh,
        atoms,
    })
}
