//! Stabilizer tableau with symbolic signs.
//!
//! Each sign is an affine function over GF(2) of the random measurement
//! outcomes seen so far: bit 0 of a sign vector is the constant term and bit
//! `i + 1` the coefficient of random outcome `i`. A measurement outcome is
//! then itself such an expression, and a parity of outcomes is deterministic
//! exactly when its variable part vanishes.

use super::{AnnotatedCircuit, Basis, GateKind, Instruction};

/// Tableau over `n` qubits: rows `0..n` are destabilizers, `n..2n` stabilizers.
pub struct SymbolicTableau {
    n: usize,
    qw: usize,
    sw: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    sign: Vec<u64>,
    vars: usize,
    scratch_x: Vec<u64>,
    scratch_z: Vec<u64>,
    scratch_sign: Vec<u64>,
}

#[inline]
fn bit(v: &[u64], i: usize) -> bool {
    v[i / 64] >> (i % 64) & 1 == 1
}

impl SymbolicTableau {
    /// `|0…0⟩` on `n` qubits, with room for `max_vars` random outcomes.
    pub fn new(n: usize, max_vars: usize) -> Self {
        let qw = n.div_ceil(64).max(1);
        let sw = (max_vars + 1).div_ceil(64);
        let mut t = Self {
            n,
            qw,
            sw,
            x: vec![0; 2 * n * qw],
            z: vec![0; 2 * n * qw],
            sign: vec![0; 2 * n * sw],
            vars: 0,
            scratch_x: vec![0; qw],
            scratch_z: vec![0; qw],
            scratch_sign: vec![0; sw],
        };
        for q in 0..n {
            t.x[q * qw + q / 64] |= 1 << (q % 64);
            t.z[(n + q) * qw + q / 64] |= 1 << (q % 64);
        }
        t
    }

    fn xr(&self, r: usize) -> &[u64] {
        &self.x[r * self.qw..(r + 1) * self.qw]
    }

    fn zr(&self, r: usize) -> &[u64] {
        &self.z[r * self.qw..(r + 1) * self.qw]
    }

    fn flip_sign(&mut self, r: usize, expr: &[u64]) {
        for (s, e) in self.sign[r * self.sw..(r + 1) * self.sw].iter_mut().zip(expr) {
            *s ^= e;
        }
    }

    fn flip_const(&mut self, r: usize) {
        self.sign[r * self.sw] ^= 1;
    }

    pub fn h(&mut self, a: usize) {
        let (w, m) = (a / 64, 1u64 << (a % 64));
        for r in 0..2 * self.n {
            let i = r * self.qw + w;
            let (xb, zb) = (self.x[i] & m, self.z[i] & m);
            if xb != 0 && zb != 0 {
                self.flip_const(r);
            }
            self.x[i] = (self.x[i] & !m) | zb;
            self.z[i] = (self.z[i] & !m) | xb;
        }
    }

    pub fn cx(&mut self, a: usize, b: usize) {
        for r in 0..2 * self.n {
            let (xa, za) = (bit(self.xr(r), a), bit(self.zr(r), a));
            let (xb, zb) = (bit(self.xr(r), b), bit(self.zr(r), b));
            if xa && zb && (xb == za) {
                self.flip_const(r);
            }
            if xa {
                self.x[r * self.qw + b / 64] ^= 1 << (b % 64);
            }
            if zb {
                self.z[r * self.qw + a / 64] ^= 1 << (a % 64);
            }
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cx(a, b);
        self.h(b);
    }

    /// Phase exponent contribution (mod 4) of multiplying row-`i` Paulis into
    /// the Paulis `(x2, z2)`.
    fn phase(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> u32 {
        let mut plus = 0u32;
        let mut minus = 0u32;
        for w in 0..x1.len() {
            let (a, b, c, d) = (x1[w], z1[w], x2[w], z2[w]);
            let y = a & b;
            let xo = a & !b;
            let zo = !a & b;
            plus += ((y & d & !c) | (xo & d & c) | (zo & c & !d)).count_ones();
            minus += ((y & c & !d) | (xo & d & !c) | (zo & c & d)).count_ones();
        }
        (plus + 4 * x1.len() as u32 * 64 - minus) % 4
    }

    /// Row `h` ← row `h` · row `i`.
    fn rowsum(&mut self, h: usize, i: usize) {
        let qw = self.qw;
        let g = Self::phase(self.xr(i), self.zr(i), self.xr(h), self.zr(h));
        // Destabilizer rows may anticommute with the pivot; their signs are never read.
        debug_assert!(h < self.n || g % 2 == 0, "rowsum of anticommuting rows");
        let (sh, si) = (h * self.sw, i * self.sw);
        for w in 0..self.sw {
            let v = self.sign[si + w];
            self.sign[sh + w] ^= v;
        }
        if g == 2 {
            self.flip_const(h);
        }
        for w in 0..qw {
            let (xi, zi) = (self.x[i * qw + w], self.z[i * qw + w]);
            self.x[h * qw + w] ^= xi;
            self.z[h * qw + w] ^= zi;
        }
    }

    fn scratch_rowsum(&mut self, i: usize) {
        let g = Self::phase(self.xr(i), self.zr(i), &self.scratch_x, &self.scratch_z);
        for w in 0..self.sw {
            self.scratch_sign[w] ^= self.sign[i * self.sw + w];
        }
        if g == 2 {
            self.scratch_sign[0] ^= 1;
        }
        for w in 0..self.qw {
            self.scratch_x[w] ^= self.x[i * self.qw + w];
            self.scratch_z[w] ^= self.z[i * self.qw + w];
        }
    }

    /// Measures `Z` on qubit `a` and returns the outcome expression.
    pub fn measure_z(&mut self, a: usize) -> Vec<u64> {
        let n = self.n;
        let p = (n..2 * n).find(|&r| bit(self.xr(r), a));
        match p {
            Some(p) => {
                for r in 0..2 * n {
                    if r != p && bit(self.xr(r), a) {
                        self.rowsum(r, p);
                    }
                }
                let qw = self.qw;
                let d = p - n;
                self.x.copy_within(p * qw..(p + 1) * qw, d * qw);
                self.z.copy_within(p * qw..(p + 1) * qw, d * qw);
                self.sign.copy_within(p * self.sw..(p + 1) * self.sw, d * self.sw);
                self.x[p * qw..(p + 1) * qw].fill(0);
                self.z[p * qw..(p + 1) * qw].fill(0);
                self.z[p * qw + a / 64] |= 1 << (a % 64);
                assert!(self.vars + 1 < self.sw * 64, "variable capacity exhausted");
                self.vars += 1;
                let mut e = vec![0u64; self.sw];
                e[self.vars / 64] |= 1 << (self.vars % 64);
                self.sign[p * self.sw..(p + 1) * self.sw].copy_from_slice(&e);
                e
            }
            None => {
                self.scratch_x.fill(0);
                self.scratch_z.fill(0);
                self.scratch_sign.fill(0);
                for r in 0..n {
                    if bit(self.xr(r), a) {
                        self.scratch_rowsum(r + n);
                    }
                }
                self.scratch_sign.clone()
            }
        }
    }

    pub fn measure(&mut self, a: usize, basis: Basis) -> Vec<u64> {
        match basis {
            Basis::Z => self.measure_z(a),
            Basis::X => {
                self.h(a);
                let e = self.measure_z(a);
                self.h(a);
                e
            }
        }
    }

    /// Resets qubit `a` to `|0⟩` (basis `Z`) or `|+⟩` (basis `X`).
    pub fn reset(&mut self, a: usize, basis: Basis) {
        let e = self.measure_z(a);
        // Apply X^e: flips the sign of every row with a Z on `a`.
        for r in 0..2 * self.n {
            if bit(self.zr(r), a) {
                self.flip_sign(r, &e);
            }
        }
        if basis == Basis::X {
            self.h(a);
        }
    }

    /// Runs `circuit` noiselessly and returns one outcome expression per
    /// measurement.
    pub fn run(circuit: &AnnotatedCircuit) -> Vec<Vec<u64>> {
        let resets = circuit
            .instructions()
            .iter()
            .filter(|i| matches!(i, Instruction::Prep { .. }))
            .count();
        let mut t = Self::new(circuit.num_qubits(), circuit.num_measurements() + resets);
        let mut out = Vec::with_capacity(circuit.num_measurements());
        for ins in circuit.instructions() {
            match *ins {
                Instruction::Prep { qubit, basis } => t.reset(qubit, basis),
                Instruction::H { qubit } => t.h(qubit),
                Instruction::Gate {
                    kind: GateKind::CX,
                    control,
                    target,
                } => t.cx(control, target),
                Instruction::Gate {
                    kind: GateKind::CZ,
                    control,
                    target,
                } => t.cz(control, target),
                Instruction::Measure { qubit, basis, .. } => out.push(t.measure(qubit, basis)),
                Instruction::Tick => {}
            }
        }
        out
    }
}

/// XOR of the outcome expressions of `set`.
pub fn parity_expression(exprs: &[Vec<u64>], set: &[usize]) -> Vec<u64> {
    let mut acc = vec![0u64; exprs.first().map_or(1, Vec::len)];
    for &m in set {
        for (a, e) in acc.iter_mut().zip(&exprs[m]) {
            *a ^= e;
        }
    }
    acc
}

/// Deterministic constant of an expression, or `None` if it depends on a
/// random outcome.
pub fn constant_value(expr: &[u64]) -> Option<bool> {
    let random = expr.iter().enumerate().any(|(w, &v)| {
        let v = if w == 0 { v & !1 } else { v };
        v != 0
    });
    (!random).then(|| expr[0] & 1 == 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterminismReport {
    /// Detectors whose noiseless parity is random or equal to one.
    pub failing_detectors: Vec<usize>,
    /// Observables whose noiseless parity is random.
    pub random_observables: Vec<usize>,
    /// Noiseless value of each deterministic observable.
    pub observable_values: Vec<Option<bool>>,
}

impl DeterminismReport {
    pub fn passed(&self) -> bool {
        self.failing_detectors.is_empty() && self.random_observables.is_empty()
    }
}

/// Propagates the noiseless circuit once, symbolically, and checks that every
/// detector has parity 0 and every observable has a well-defined parity.
pub fn verify_deterministic(circuit: &AnnotatedCircuit) -> DeterminismReport {
    let exprs = SymbolicTableau::run(circuit);
    let failing_detectors = circuit
        .detectors()
        .iter()
        .enumerate()
        .filter(|(_, d)| constant_value(&parity_expression(&exprs, d)) != Some(false))
        .map(|(i, _)| i)
        .collect();
    let observable_values: Vec<Option<bool>> = circuit
        .observables()
        .iter()
        .map(|o| constant_value(&parity_expression(&exprs, o)))
        .collect();
    let random_observables = observable_values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_none())
        .map(|(i, _)| i)
        .collect();
    DeterminismReport {
        failing_detectors,
        random_observables,
        observable_values,
    }
}
