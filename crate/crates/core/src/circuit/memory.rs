use super::{schedule_extraction, AnnotatedCircuit, Basis, GateKind, Instruction};
use crate::codes::{Pauli, StabilizerCode};
use crate::error::{Error, Result};

/// Bookkeeping of a memory circuit.
///
/// Ancilla of stabilizer `s` is qubit `num_data + s`. Its round-`r`
/// measurement has index `r·num_stabilizers + s`; the final measurement of
/// data qubit `q` has index `rounds·num_stabilizers + q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoryLayout {
    pub num_data: usize,
    pub num_stabilizers: usize,
    pub rounds: usize,
    pub memory_basis: Basis,
    /// Preparation and final-measurement basis of each data qubit.
    pub data_basis: Vec<Basis>,
    pub layers_per_round: usize,
    /// Stabilizers diagonal in the data basis: anchored in the first round and
    /// reconstructed from the final data measurements.
    pub diagonal: Vec<usize>,
}

impl MemoryLayout {
    pub fn ancilla_measurement(&self, round: usize, stabilizer: usize) -> usize {
        round * self.num_stabilizers + stabilizer
    }

    pub fn data_measurement(&self, qubit: usize) -> usize {
        self.rounds * self.num_stabilizers + qubit
    }

    /// `anchored + (rounds − 1)·S + reconstructed`.
    pub fn expected_detectors(&self) -> usize {
        2 * self.diagonal.len() + (self.rounds - 1) * self.num_stabilizers
    }
}

/// Builds a `rounds`-round memory experiment protecting every logical of type
/// `memory_basis` (`Z` tracks the logical `Z` operators).
///
/// Each data qubit is prepared and finally measured in one basis, chosen per
/// sector so that every tracked logical is a product of measured operators
/// and as many stabilizers as possible are diagonal. Ancillas start in `|+⟩`,
/// act on data through native `CZ` gates in the order given by
/// [`schedule_extraction`], and are measured in the X basis. An X leg is a
/// `CX` compiled as `H·CZ·H` on the data qubit, so gate noise lands between
/// the Hadamards and a `Z` fault on the data leaves the gate as an `X`.
///
/// ```
/// use erasure_qldpc::circuit::{build_memory, verify_deterministic, Basis};
/// use erasure_qldpc::codes::surface_code;
///
/// let code = surface_code(3, false).unwrap();
/// let circuit = build_memory(&code, 3, Basis::Z).unwrap();
/// assert_eq!(circuit.num_qubits(), 13 + 12);
/// assert!(verify_deterministic(&circuit).passed());
/// ```
pub fn build_memory(code: &StabilizerCode, rounds: usize, memory_basis: Basis) -> Result<AnnotatedCircuit> {
    if rounds == 0 {
        return Err(Error::InvalidParameter("a memory needs at least one round".into()));
    }
    let n = code.n();
    let s = code.num_stabilizers();
    let stabs = code.stabilizers();
    if let Some(i) = stabs.iter().position(|st| (0..n).any(|q| st.pauli_at(q) == Pauli::Y)) {
        return Err(Error::InvalidParameter(format!(
            "stabilizer {i} contains a Y factor; only X and Z legs are supported"
        )));
    }
    let tracked = match memory_basis {
        Basis::Z => code.logical_z(),
        Basis::X => code.logical_x(),
    };

    let sectors: Vec<std::ops::Range<usize>> = match code.sector_sizes() {
        (a, b) if b > 0 && a + b == n => vec![0..a, a..n],
        _ => vec![0..n],
    };
    let mut best: Option<(usize, Vec<Basis>)> = None;
    for mask in 0..(1usize << sectors.len()) {
        let mut basis = vec![Basis::Z; n];
        for (i, range) in sectors.iter().enumerate() {
            if mask >> i & 1 == 1 {
                basis[range.clone()].fill(Basis::X);
            }
        }
        let diagonal = |p: Pauli, b: Basis| matches!((p, b), (Pauli::X, Basis::X) | (Pauli::Z, Basis::Z));
        let ok = tracked
            .iter()
            .all(|l| l.support().into_iter().all(|q| diagonal(l.pauli_at(q), basis[q])));
        if !ok {
            continue;
        }
        let score = stabs
            .iter()
            .filter(|st| st.support().into_iter().all(|q| diagonal(st.pauli_at(q), basis[q])))
            .count();
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((score, basis));
        }
    }
    let Some((_, data_basis)) = best else {
        return Err(Error::InvalidParameter(format!(
            "no per-sector basis makes every logical {memory_basis} a product of single-qubit measurements"
        )));
    };
    let diagonal: Vec<usize> = (0..s)
        .filter(|&i| {
            stabs[i].support().into_iter().all(|q| {
                matches!(
                    (stabs[i].pauli_at(q), data_basis[q]),
                    (Pauli::X, Basis::X) | (Pauli::Z, Basis::Z)
                )
            })
        })
        .collect();

    let schedule = schedule_extraction(code);
    let mut ins = Vec::new();
    for (q, &b) in data_basis.iter().enumerate() {
        ins.push(Instruction::Prep {
            qubit: q,
            basis: Basis::Z,
        });
        if b == Basis::X {
            ins.push(Instruction::H { qubit: q });
        }
    }
    let mut index = 0;
    for _ in 0..rounds {
        for a in 0..s {
            ins.push(Instruction::Prep {
                qubit: n + a,
                basis: Basis::X,
            });
        }
        for layer in &schedule.layers {
            let x_legs: Vec<usize> = layer
                .iter()
                .filter(|&&(st, q)| stabs[st].pauli_at(q) == Pauli::X)
                .map(|&(_, q)| q)
                .collect();
            ins.extend(x_legs.iter().map(|&q| Instruction::H { qubit: q }));
            for &(st, q) in layer {
                ins.push(Instruction::Gate {
                    kind: GateKind::CZ,
                    control: n + st,
                    target: q,
                });
            }
            ins.extend(x_legs.iter().map(|&q| Instruction::H { qubit: q }));
            ins.push(Instruction::Tick);
        }
        for a in 0..s {
            ins.push(Instruction::Measure {
                qubit: n + a,
                basis: Basis::X,
                index,
            });
            index += 1;
        }
    }
    for (q, &basis) in data_basis.iter().enumerate() {
        ins.push(Instruction::Measure { qubit: q, basis, index });
        index += 1;
    }

    let layout = MemoryLayout {
        num_data: n,
        num_stabilizers: s,
        rounds,
        memory_basis,
        data_basis,
        layers_per_round: schedule.depth(),
        diagonal,
    };
    let mut detectors = Vec::with_capacity(layout.expected_detectors());
    for &st in &layout.diagonal {
        detectors.push(vec![layout.ancilla_measurement(0, st)]);
    }
    for r in 1..rounds {
        for st in 0..s {
            detectors.push(vec![
                layout.ancilla_measurement(r - 1, st),
                layout.ancilla_measurement(r, st),
            ]);
        }
    }
    for &st in &layout.diagonal {
        let mut d = vec![layout.ancilla_measurement(rounds - 1, st)];
        d.extend(stabs[st].support().into_iter().map(|q| layout.data_measurement(q)));
        detectors.push(d);
    }
    let observables = tracked
        .iter()
        .map(|l| l.support().into_iter().map(|q| layout.data_measurement(q)).collect())
        .collect();
    debug_assert_eq!(detectors.len(), layout.expected_detectors());
    Ok(AnnotatedCircuit::new(n + s, ins, detectors, observables)?.with_layout(layout))
}
