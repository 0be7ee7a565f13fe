use crate::circuit::{AnnotatedCircuit, Basis, GateKind, Instruction};

#[derive(Clone, Copy, Debug)]
pub(crate) enum Op {
    /// Preparation in either basis clears the frame.
    Reset(u32),
    H(u32),
    /// Two-qubit gate followed by noise site `gate`.
    Cx(u32, u32, u32),
    Cz(u32, u32, u32),
    /// Records the frame bit that anticommutes with the measured basis.
    MeasZ(u32, u32),
    MeasX(u32, u32),
}

/// Circuit lowered to a flat op list for word-parallel frame propagation.
#[derive(Clone, Debug)]
pub(crate) struct Program {
    pub num_qubits: usize,
    pub num_gates: usize,
    pub num_measurements: usize,
    pub ops: Vec<Op>,
}

impl Program {
    pub fn compile(circuit: &AnnotatedCircuit) -> Self {
        let mut ops = Vec::with_capacity(circuit.instructions().len());
        let mut num_gates = 0u32;
        for ins in circuit.instructions() {
            match *ins {
                Instruction::Prep { qubit, .. } => ops.push(Op::Reset(qubit as u32)),
                Instruction::H { qubit } => ops.push(Op::H(qubit as u32)),
                Instruction::Gate { kind, control, target } => {
                    let g = num_gates;
                    num_gates += 1;
                    ops.push(match kind {
                        GateKind::CX => Op::Cx(control as u32, target as u32, g),
                        GateKind::CZ => Op::Cz(control as u32, target as u32, g),
                    });
                }
                Instruction::Measure { qubit, basis, index } => ops.push(match basis {
                    Basis::Z => Op::MeasZ(qubit as u32, index as u32),
                    Basis::X => Op::MeasX(qubit as u32, index as u32),
                }),
                Instruction::Tick => {}
            }
        }
        Self {
            num_qubits: circuit.num_qubits(),
            num_gates: num_gates as usize,
            num_measurements: circuit.num_measurements(),
            ops,
        }
    }
}

/// A Pauli injected right after gate `gate` on lane `lane`, as a 4-bit
/// two-qubit mask (see [`crate::noise`]).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Injection {
    pub gate: u32,
    pub lane: u32,
    pub mask: u8,
}

/// Word-parallel Pauli frames: lane `i` of every word is one independent frame.
pub(crate) struct Frames {
    x: Vec<u64>,
    z: Vec<u64>,
    pub meas: Vec<u64>,
}

impl Frames {
    pub fn new(program: &Program) -> Self {
        Self {
            x: vec![0; program.num_qubits],
            z: vec![0; program.num_qubits],
            meas: vec![0; program.num_measurements],
        }
    }

    /// Propagates from a clean frame, applying `injections` (sorted by gate)
    /// right after their gates.
    pub fn run(&mut self, program: &Program, injections: &[Injection]) {
        self.x.fill(0);
        self.z.fill(0);
        let mut next = 0;
        for op in &program.ops {
            match *op {
                Op::Reset(q) => {
                    self.x[q as usize] = 0;
                    self.z[q as usize] = 0;
                }
                Op::H(q) => {
                    let q = q as usize;
                    std::mem::swap(&mut self.x[q], &mut self.z[q]);
                }
                Op::Cx(c, t, g) => {
                    let (c, t) = (c as usize, t as usize);
                    self.x[t] ^= self.x[c];
                    self.z[c] ^= self.z[t];
                    next = self.inject(injections, next, g, c, t);
                }
                Op::Cz(c, t, g) => {
                    let (c, t) = (c as usize, t as usize);
                    self.z[t] ^= self.x[c];
                    self.z[c] ^= self.x[t];
                    next = self.inject(injections, next, g, c, t);
                }
                Op::MeasZ(q, m) => self.meas[m as usize] = self.x[q as usize],
                Op::MeasX(q, m) => self.meas[m as usize] = self.z[q as usize],
            }
        }
        debug_assert_eq!(next, injections.len(), "injections must be sorted by gate");
    }

    #[inline]
    fn inject(&mut self, injections: &[Injection], mut next: usize, g: u32, c: usize, t: usize) -> usize {
        while let Some(inj) = injections.get(next) {
            if inj.gate != g {
                break;
            }
            let bit = 1u64 << inj.lane;
            if inj.mask & 1 != 0 {
                self.x[c] ^= bit;
            }
            if inj.mask & 2 != 0 {
                self.z[c] ^= bit;
            }
            if inj.mask & 4 != 0 {
                self.x[t] ^= bit;
            }
            if inj.mask & 8 != 0 {
                self.z[t] ^= bit;
            }
            next += 1;
        }
        next
    }

    /// XOR of measurement words over each index set.
    pub fn parities(&self, sets: &[Vec<usize>]) -> Vec<u64> {
        sets.iter()
            .map(|s| s.iter().fold(0u64, |acc, &m| acc ^ self.meas[m]))
            .collect()
    }
}
