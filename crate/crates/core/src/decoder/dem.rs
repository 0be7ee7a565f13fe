use std::collections::HashMap;
use std::fmt::Write as _;

use crate::codes::StabilizerCode;
use crate::error::{Error, Result};
use crate::noise::NoisyCircuit;
use crate::sim::{Frames, Injection, Program};

/// Lower and upper clamp applied to every prior handed to the decoder.
pub const PRIOR_FLOOR: f64 = 1e-12;
pub const PRIOR_CEIL: f64 = 1.0 - 1e-12;

pub fn clamp_prior(p: f64) -> f64 {
    p.clamp(PRIOR_FLOOR, PRIOR_CEIL)
}

/// `q₁(1−q₂) + q₂(1−q₁)`: probability that exactly one of two independent
/// mechanisms fires, i.e. that their common signature is flipped.
pub fn xor_combine(q1: f64, q2: f64) -> f64 {
    q1 * (1.0 - q2) + q2 * (1.0 - q1)
}

/// Erasure linkage of a mechanism.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeraldLink {
    pub herald: usize,
    /// Probability of this mechanism given that the herald fired.
    pub conditional: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mechanism {
    /// Static prior, unconditioned on heralds.
    pub prior: f64,
    /// Sorted detector indices.
    pub detectors: Vec<usize>,
    /// Sorted observable indices.
    pub observables: Vec<usize>,
    pub herald: Option<HeraldLink>,
}

/// Detector error model: independent mechanisms with their detector and
/// observable signatures.
///
/// Unlinked mechanisms have pairwise distinct signatures. Herald-linked
/// mechanisms are distinct per herald; the same signature may recur under
/// different heralds or as an unlinked mechanism.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorErrorModel {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub num_heralds: usize,
    pub mechanisms: Vec<Mechanism>,
}

/// Signature packed as sorted indices: detectors first, then observables
/// offset by the detector count.
type Signature = Vec<u32>;

fn xor_sorted(a: &[u32], b: &[u32]) -> Signature {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Accumulates mechanisms site by site and merges them.
struct DemBuilder {
    num_detectors: usize,
    num_observables: usize,
    num_heralds: usize,
    unlinked: Vec<(Signature, f64)>,
    unlinked_index: HashMap<Signature, usize>,
    linked: Vec<(Signature, f64, HeraldLink)>,
}

impl DemBuilder {
    fn new(num_detectors: usize, num_observables: usize, num_heralds: usize) -> Self {
        Self {
            num_detectors,
            num_observables,
            num_heralds,
            unlinked: Vec::new(),
            unlinked_index: HashMap::new(),
            linked: Vec::new(),
        }
    }

    /// Adds one site's mutually exclusive outcomes. Outcomes sharing a
    /// signature within the site are summed; unlinked signatures are then
    /// XOR-combined with earlier sites.
    fn add_site(&mut self, pauli: &[(Signature, f64)], erasure: &[(Signature, f64, f64)], herald: usize) -> Result<()> {
        let nd = self.num_detectors as u32;
        let check = |sig: &Signature| -> Result<()> {
            if !sig.is_empty() && sig[0] >= nd {
                return Err(Error::Invariant(format!(
                    "a fault flips observables {:?} without triggering any detector",
                    sig.iter().map(|&o| o - nd).collect::<Vec<_>>()
                )));
            }
            Ok(())
        };
        let mut local: Vec<(Signature, f64)> = Vec::new();
        for (sig, p) in pauli {
            if sig.is_empty() || *p <= 0.0 {
                continue;
            }
            check(sig)?;
            match local.iter_mut().find(|e| e.0 == *sig) {
                Some(e) => e.1 += p,
                None => local.push((sig.clone(), *p)),
            }
        }
        for (sig, p) in local {
            match self.unlinked_index.get(&sig) {
                Some(&i) => {
                    let e = &mut self.unlinked[i].1;
                    *e = xor_combine(*e, p);
                }
                None => {
                    self.unlinked_index.insert(sig.clone(), self.unlinked.len());
                    self.unlinked.push((sig, p));
                }
            }
        }
        let mut local: Vec<(Signature, f64, f64)> = Vec::new();
        for (sig, p, q) in erasure {
            if sig.is_empty() || *p <= 0.0 {
                continue;
            }
            check(sig)?;
            match local.iter_mut().find(|e| e.0 == *sig) {
                Some(e) => {
                    e.1 += p;
                    e.2 += q;
                }
                None => local.push((sig.clone(), *p, *q)),
            }
        }
        for (sig, p, q) in local {
            self.linked.push((sig, p, HeraldLink { herald, conditional: q }));
        }
        Ok(())
    }

    fn finish(self) -> DetectorErrorModel {
        let nd = self.num_detectors;
        let split = |sig: &Signature| -> (Vec<usize>, Vec<usize>) {
            let cut = sig.partition_point(|&i| (i as usize) < nd);
            (
                sig[..cut].iter().map(|&i| i as usize).collect(),
                sig[cut..].iter().map(|&i| i as usize - nd).collect(),
            )
        };
        let mut mechanisms = Vec::with_capacity(self.unlinked.len() + self.linked.len());
        for (sig, p) in &self.unlinked {
            let (detectors, observables) = split(sig);
            mechanisms.push(Mechanism {
                prior: *p,
                detectors,
                observables,
                herald: None,
            });
        }
        for (sig, p, link) in &self.linked {
            let (detectors, observables) = split(sig);
            mechanisms.push(Mechanism {
                prior: *p,
                detectors,
                observables,
                herald: Some(*link),
            });
        }
        DetectorErrorModel {
            num_detectors: self.num_detectors,
            num_observables: self.num_observables,
            num_heralds: self.num_heralds,
            mechanisms,
        }
    }
}

/// Detector error model of a noisy memory circuit.
///
/// The four single-qubit Paulis `X_c, Z_c, X_t, Z_t` after every gate are
/// propagated in 64-lane batches; every two-qubit outcome's signature is the
/// XOR of its components. Pauli outcomes carry prior `p_p/15` and no herald
/// link. Erasure outcomes carry static prior `p_e/|outcomes|`, are linked to
/// the gate's herald with conditional probability `1/|outcomes|`, and are
/// never merged across gates.
///
/// Fails if some fault flips an observable without triggering a detector.
pub fn build_dem(noisy: &NoisyCircuit) -> Result<DetectorErrorModel> {
    let circuit = noisy.circuit();
    let program = Program::compile(circuit);
    let (nd, nk) = (circuit.num_detectors(), circuit.num_observables());
    let gates = program.num_gates;
    let basis = basis_signatures(circuit, &program);

    let spec = noisy.spec();
    let outcomes = spec.erasure_kind.outcomes();
    let q_cond = spec.erasure_kind.conditional_probability();
    let pp = spec.p_pauli() / 15.0;
    let pe = spec.p_erasure() * q_cond;
    let mut builder = DemBuilder::new(nd, nk, gates);
    for g in 0..gates {
        let b = &basis[4 * g..4 * g + 4];
        let sig = |mask: u8| -> Signature {
            (0..4)
                .filter(|i| mask >> i & 1 == 1)
                .fold(Vec::new(), |acc, i| xor_sorted(&acc, &b[i]))
        };
        let pauli: Vec<_> = (1..16u8).map(|m| (sig(m), pp)).collect();
        let erasure: Vec<_> = outcomes.iter().map(|&m| (sig(m), pe, q_cond)).collect();
        builder.add_site(&pauli, &erasure, g)?;
    }
    Ok(builder.finish())
}

/// Signatures of `X_c, Z_c, X_t, Z_t` after each gate, four per gate.
fn basis_signatures(circuit: &crate::circuit::AnnotatedCircuit, program: &Program) -> Vec<Signature> {
    let nd = circuit.num_detectors() as u32;
    let total = 4 * program.num_gates;
    let mut frames = Frames::new(program);
    let mut out = Vec::with_capacity(total);
    let mut injections = Vec::with_capacity(64);
    for start in (0..total).step_by(64) {
        injections.clear();
        for (lane, f) in (start..(start + 64).min(total)).enumerate() {
            injections.push(Injection {
                gate: (f / 4) as u32,
                lane: lane as u32,
                mask: 1 << (f % 4),
            });
        }
        frames.run(program, &injections);
        let dw = frames.parities(circuit.detectors());
        let ow = frames.parities(circuit.observables());
        for lane in 0..injections.len() {
            let mut sig = Vec::new();
            for (i, w) in dw.iter().enumerate() {
                if w >> lane & 1 == 1 {
                    sig.push(i as u32);
                }
            }
            for (k, w) in ow.iter().enumerate() {
                if w >> lane & 1 == 1 {
                    sig.push(nd + k as u32);
                }
            }
            out.push(sig);
        }
    }
    out
}

/// Code-capacity erasure model: every qubit is erased independently with
/// probability `p_erasure` and reloaded into a uniformly random Pauli
/// (identity included). Detectors are the code's stabilizers. Observables are
/// the `2K` logicals: index `k` flags anticommutation with `logical_z[k]`
/// (an `X`-type logical error), index `K + k` with `logical_x[k]`.
pub fn code_capacity_dem(code: &StabilizerCode, p_erasure: f64) -> Result<DetectorErrorModel> {
    let n = code.n();
    let k = code.k();
    let stabs = code.stabilizers();
    let nd = stabs.len() as u32;
    let mut builder = DemBuilder::new(stabs.len(), 2 * k, n);
    for q in 0..n {
        let sig = |x: bool, z: bool| -> Signature {
            let mut s = Vec::new();
            let anti = |p: &crate::codes::PauliString| (p.x.get(q) && z) ^ (p.z.get(q) && x);
            for (i, st) in stabs.iter().enumerate() {
                if anti(st) {
                    s.push(i as u32);
                }
            }
            for (j, l) in code.logical_z().iter().chain(code.logical_x()).enumerate() {
                if anti(l) {
                    s.push(nd + j as u32);
                }
            }
            s
        };
        let erasure: Vec<_> = [(true, false), (true, true), (false, true)]
            .into_iter()
            .map(|(x, z)| (sig(x, z), p_erasure / 4.0, 0.25))
            .collect();
        builder.add_site(&[], &erasure, q)?;
    }
    Ok(builder.finish())
}

/// Per-shot mechanism priors.
///
/// A linked mechanism takes its conditional probability when its herald
/// fired and drops to the clamp floor otherwise. Unlinked mechanisms keep
/// their static prior. All values are clamped.
pub fn apply_heralds(dem: &DetectorErrorModel, heralds: &[bool]) -> Result<Vec<f64>> {
    if heralds.len() != dem.num_heralds {
        return Err(Error::Dimension(format!(
            "{} herald bits for a model with {} heralds",
            heralds.len(),
            dem.num_heralds
        )));
    }
    Ok(dem
        .mechanisms
        .iter()
        .map(|m| match m.herald {
            None => clamp_prior(m.prior),
            Some(l) if heralds[l.herald] => clamp_prior(l.conditional),
            Some(_) => PRIOR_FLOOR,
        })
        .collect())
}

impl DetectorErrorModel {
    /// Mechanism indices linked to each herald.
    pub fn herald_links(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_heralds];
        for (i, m) in self.mechanisms.iter().enumerate() {
            if let Some(l) = m.herald {
                out[l.herald].push(i);
            }
        }
        out
    }

    /// Text form: header lines `DETECTORS n`, `OBSERVABLES k`, `HERALDS h`,
    /// then one line per mechanism,
    /// `ERR p D<i>... L<k>... [HERALD h q]`, floats in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "DETECTORS {}\nOBSERVABLES {}\nHERALDS {}\n",
            self.num_detectors, self.num_observables, self.num_heralds
        );
        for m in &self.mechanisms {
            let _ = write!(out, "ERR {:?}", m.prior);
            for d in &m.detectors {
                let _ = write!(out, " D{d}");
            }
            for o in &m.observables {
                let _ = write!(out, " L{o}");
            }
            if let Some(l) = m.herald {
                let _ = write!(out, " HERALD {} {:?}", l.herald, l.conditional);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut header = |key: &str| -> Result<usize> {
            let (i, l) = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing {key} header")))?;
            let t: Vec<&str> = l.split_whitespace().collect();
            match t.as_slice() {
                [k, v] if *k == key => v
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad count {v:?}", i + 1))),
                _ => Err(Error::Parse(format!("line {}: expected {key} header", i + 1))),
            }
        };
        let num_detectors = header("DETECTORS")?;
        let num_observables = header("OBSERVABLES")?;
        let num_heralds = header("HERALDS")?;
        let mut mechanisms = Vec::new();
        for (i, l) in lines {
            let bad = |what: &str| Error::Parse(format!("line {}: {what}", i + 1));
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() < 2 || t[0] != "ERR" {
                return Err(bad("expected ERR"));
            }
            let prior: f64 = t[1].parse().map_err(|_| bad("bad prior"))?;
            let (mut detectors, mut observables, mut herald) = (Vec::new(), Vec::new(), None);
            let mut j = 2;
            while j < t.len() {
                let tok = t[j];
                if let Some(d) = tok.strip_prefix('D') {
                    let d: usize = d.parse().map_err(|_| bad("bad detector"))?;
                    if d >= num_detectors {
                        return Err(bad("detector out of range"));
                    }
                    detectors.push(d);
                } else if let Some(o) = tok.strip_prefix('L') {
                    let o: usize = o.parse().map_err(|_| bad("bad observable"))?;
                    if o >= num_observables {
                        return Err(bad("observable out of range"));
                    }
                    observables.push(o);
                } else if tok == "HERALD" && j + 3 == t.len() {
                    let h: usize = t[j + 1].parse().map_err(|_| bad("bad herald"))?;
                    let q: f64 = t[j + 2].parse().map_err(|_| bad("bad conditional"))?;
                    if h >= num_heralds {
                        return Err(bad("herald out of range"));
                    }
                    herald = Some(HeraldLink {
                        herald: h,
                        conditional: q,
                    });
                    j += 2;
                } else {
                    return Err(bad(&format!("unexpected token {tok:?}")));
                }
                j += 1;
            }
            detectors.sort_unstable();
            observables.sort_unstable();
            mechanisms.push(Mechanism {
                prior,
                detectors,
                observables,
                herald,
            });
        }
        Ok(Self {
            num_detectors,
            num_observables,
            num_heralds,
            mechanisms,
        })
    }
}
