//! Annotated memory-experiment circuits.
//!
//! A circuit is a flat instruction list over data qubits `0..N` and one
//! ancilla per stabilizer, plus detectors and observables given as sets of
//! measurement indices. Two-qubit gates between consecutive `TICK`s form one
//! layer and act on disjoint qubits.

mod memory;
mod schedule;
mod tableau;

use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub use memory::{build_memory, MemoryLayout};
pub use schedule::{schedule_extraction, Schedule};
pub use tableau::{verify_deterministic, DeterminismReport, SymbolicTableau};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    X,
    Z,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::X => "X",
            Basis::Z => "Z",
        })
    }
}

impl std::str::FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(Basis::X),
            "Z" | "z" => Ok(Basis::Z),
            _ => Err(Error::Parse(format!("unknown basis {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    CX,
    CZ,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Instruction {
    Prep {
        qubit: usize,
        basis: Basis,
    },
    H {
        qubit: usize,
    },
    Gate {
        kind: GateKind,
        control: usize,
        target: usize,
    },
    Measure {
        qubit: usize,
        basis: Basis,
        index: usize,
    },
    Tick,
}

/// Location of one two-qubit gate: instruction index, layer (number of
/// preceding `TICK`s) and round (number of completed measurement blocks).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GateSite {
    pub instruction: usize,
    pub layer: usize,
    pub round: usize,
    pub kind: GateKind,
    pub control: usize,
    pub target: usize,
}

#[derive(Clone, Debug)]
pub struct AnnotatedCircuit {
    num_qubits: usize,
    instructions: Vec<Instruction>,
    num_measurements: usize,
    detectors: Vec<Vec<usize>>,
    observables: Vec<Vec<usize>>,
    layout: Option<MemoryLayout>,
}

impl AnnotatedCircuit {
    /// Validates measurement numbering, index ranges and layer disjointness.
    pub fn new(
        num_qubits: usize,
        instructions: Vec<Instruction>,
        detectors: Vec<Vec<usize>>,
        observables: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let mut next = 0;
        let mut busy = vec![usize::MAX; num_qubits];
        let mut layer = 0;
        for (i, ins) in instructions.iter().enumerate() {
            let check = |q: usize| {
                if q < num_qubits {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "instruction {i} touches qubit {q} >= {num_qubits}"
                    )))
                }
            };
            match *ins {
                Instruction::Prep { qubit, .. } | Instruction::H { qubit } => check(qubit)?,
                Instruction::Gate { control, target, .. } => {
                    check(control)?;
                    check(target)?;
                    if control == target {
                        return Err(Error::InvalidParameter(format!(
                            "instruction {i} is a two-qubit gate on one qubit"
                        )));
                    }
                    for q in [control, target] {
                        if busy[q] == layer {
                            return Err(Error::InvalidParameter(format!(
                                "qubit {q} used twice in layer {layer}"
                            )));
                        }
                        busy[q] = layer;
                    }
                }
                Instruction::Measure { qubit, index, .. } => {
                    check(qubit)?;
                    if index != next {
                        return Err(Error::InvalidParameter(format!(
                            "measurement index {index} out of order (expected {next})"
                        )));
                    }
                    next += 1;
                }
                Instruction::Tick => layer += 1,
            }
        }
        for (kind, sets) in [("detector", &detectors), ("observable", &observables)] {
            for (j, set) in sets.iter().enumerate() {
                if let Some(&m) = set.iter().find(|&&m| m >= next) {
                    return Err(Error::InvalidParameter(format!(
                        "{kind} {j} refers to measurement {m} of {next}"
                    )));
                }
            }
        }
        Ok(Self {
            num_qubits,
            instructions,
            num_measurements: next,
            detectors,
            observables,
            layout: None,
        })
    }

    pub(crate) fn with_layout(mut self, layout: MemoryLayout) -> Self {
        self.layout = Some(layout);
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn num_measurements(&self) -> usize {
        self.num_measurements
    }

    pub fn detectors(&self) -> &[Vec<usize>] {
        &self.detectors
    }

    pub fn observables(&self) -> &[Vec<usize>] {
        &self.observables
    }

    pub fn num_detectors(&self) -> usize {
        self.detectors.len()
    }

    pub fn num_observables(&self) -> usize {
        self.observables.len()
    }

    /// Builder bookkeeping, present for circuits made by [`build_memory`].
    pub fn layout(&self) -> Option<&MemoryLayout> {
        self.layout.as_ref()
    }

    /// Every two-qubit gate in instruction order.
    pub fn gate_sites(&self) -> Vec<GateSite> {
        let mut out = Vec::new();
        let (mut layer, mut round) = (0, 0);
        let mut in_measure_block = false;
        for (i, ins) in self.instructions.iter().enumerate() {
            match *ins {
                Instruction::Tick => layer += 1,
                Instruction::Measure { .. } => in_measure_block = true,
                _ => {
                    if in_measure_block {
                        round += 1;
                        in_measure_block = false;
                    }
                }
            }
            if let Instruction::Gate { kind, control, target } = *ins {
                out.push(GateSite {
                    instruction: i,
                    layer,
                    round,
                    kind,
                    control,
                    target,
                });
            }
        }
        out
    }

    pub fn num_two_qubit_gates(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| matches!(i, Instruction::Gate { .. }))
            .count()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for ins in &self.instructions {
            let _ = match *ins {
                Instruction::Prep { qubit, basis } => writeln!(out, "PREP {qubit} {basis}"),
                Instruction::H { qubit } => writeln!(out, "H {qubit}"),
                Instruction::Gate { kind, control, target } => {
                    let name = match kind {
                        GateKind::CX => "CX",
                        GateKind::CZ => "CZ",
                    };
                    writeln!(out, "{name} {control} {target}")
                }
                Instruction::Measure { qubit, basis, index } => {
                    writeln!(out, "M {qubit} {basis} {index}")
                }
                Instruction::Tick => writeln!(out, "TICK"),
            };
        }
        for d in &self.detectors {
            out.push_str("DETECTOR");
            for m in d {
                let _ = write!(out, " {m}");
            }
            out.push('\n');
        }
        for (k, o) in self.observables.iter().enumerate() {
            let _ = write!(out, "OBSERVABLE {k}");
            for m in o {
                let _ = write!(out, " {m}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text form. The qubit count is one more than the largest
    /// qubit index mentioned.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut instructions = Vec::new();
        let mut detectors = Vec::new();
        let mut observables: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut max_qubit = None::<usize>;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let t: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("line {}: cannot parse {line:?}", ln + 1));
            let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
            let arity = |n: usize| if t.len() == n { Ok(()) } else { Err(bad()) };
            let mut touch = |q: usize| max_qubit = Some(max_qubit.map_or(q, |m| m.max(q)));
            match t[0] {
                "PREP" => {
                    arity(3)?;
                    let qubit = num(t[1])?;
                    touch(qubit);
                    instructions.push(Instruction::Prep {
                        qubit,
                        basis: t[2].parse()?,
                    });
                }
                "H" => {
                    arity(2)?;
                    let qubit = num(t[1])?;
                    touch(qubit);
                    instructions.push(Instruction::H { qubit });
                }
                "CX" | "CZ" => {
                    arity(3)?;
                    let (control, target) = (num(t[1])?, num(t[2])?);
                    touch(control);
                    touch(target);
                    let kind = if t[0] == "CX" { GateKind::CX } else { GateKind::CZ };
                    instructions.push(Instruction::Gate { kind, control, target });
                }
                "M" => {
                    arity(4)?;
                    let qubit = num(t[1])?;
                    touch(qubit);
                    instructions.push(Instruction::Measure {
                        qubit,
                        basis: t[2].parse()?,
                        index: num(t[3])?,
                    });
                }
                "TICK" => {
                    arity(1)?;
                    instructions.push(Instruction::Tick);
                }
                "DETECTOR" => {
                    detectors.push(t[1..].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?);
                }
                "OBSERVABLE" => {
                    if t.len() < 2 {
                        return Err(bad());
                    }
                    let k = num(t[1])?;
                    observables.push((k, t[2..].iter().map(|s| num(s)).collect::<Result<_>>()?));
                }
                _ => return Err(bad()),
            }
        }
        observables.sort_by_key(|(k, _)| *k);
        if observables.iter().enumerate().any(|(i, (k, _))| i != *k) {
            return Err(Error::Parse("observables must be numbered 0..K without gaps".into()));
        }
        Self::new(
            max_qubit.map_or(0, |m| m + 1),
            instructions,
            detectors,
            observables.into_iter().map(|(_, o)| o).collect(),
        )
    }
}
