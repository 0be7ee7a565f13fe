//! Stabilizer codes: hypergraph products and their Clifford deformation,
//! La-cross codes, Bivariate Bicycle codes and unrotated surface codes.
//!
//! A code is stored in symplectic form: stabilizer `i` acts as `X` on the ones
//! of `hx` row `i` and as `Z` on the ones of `hz` row `i` (both means `Y`).
//! Every constructor checks commutation of all stabilizer pairs, the logical
//! pairing, and `K = N − rank([hx | hz])` before returning.

mod bb;
mod distance;
mod export;
mod hgp;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVector, RowSpan};

pub use bb::{bivariate_bicycle, parse_trinomial, Monomial, STANDARD_A, STANDARD_B};
pub use distance::distance_bruteforce;
pub use export::{CodeDescription, PauliSupport};
pub use hgp::{classical_distance, clifford_deform, hypergraph_product, lacross, surface_code};

/// Default number of candidate operators a brute-force distance search may visit.
pub const DEFAULT_DISTANCE_BUDGET: u64 = 50_000_000;

/// Single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }
}

/// A Pauli operator on `n` qubits, up to phase.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub x: BitVector,
    pub z: BitVector,
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.num_qubits() {
            let c = match self.pauli_at(q) {
                Pauli::I => '_',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitVector::zeros(n),
            z: BitVector::zeros(n),
        }
    }

    pub fn new(x: BitVector, z: BitVector) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::Dimension("X and Z parts differ in length".into()));
        }
        Ok(Self { x, z })
    }

    pub fn x_type(x: BitVector) -> Self {
        let n = x.len();
        Self {
            x,
            z: BitVector::zeros(n),
        }
    }

    pub fn z_type(z: BitVector) -> Self {
        let n = z.len();
        Self {
            x: BitVector::zeros(n),
            z,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn pauli_at(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x.get(q), self.z.get(q))
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.num_qubits())
            .filter(|&q| self.x.get(q) || self.z.get(q))
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.support().len()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.x.dot(&other.z) == self.z.dot(&other.x)
    }

    pub fn mul_assign(&mut self, other: &PauliString) {
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    /// Conjugation by Hadamard on every qubit in `qubits`.
    pub fn hadamard_on(&self, qubits: std::ops::Range<usize>) -> PauliString {
        let mut out = self.clone();
        for q in qubits {
            out.x.set(q, self.z.get(q));
            out.z.set(q, self.x.get(q));
        }
        out
    }

    /// Symplectic vector `[x | z]`.
    pub fn symplectic(&self) -> BitVector {
        self.x.concat(&self.z)
    }
}

/// How a code's distance was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceProvenance {
    /// Exhaustive search found a logical operator of this weight and none lighter.
    BruteForced,
    /// Taken from a published table; not recomputed here.
    PaperAsserted,
    /// A proven lower bound; the true distance may be larger.
    LowerBound,
}

impl fmt::Display for DistanceProvenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceProvenance::BruteForced => "brute-forced",
            DistanceProvenance::PaperAsserted => "paper-asserted",
            DistanceProvenance::LowerBound => "lower-bound",
        })
    }
}

impl std::str::FromStr for DistanceProvenance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute-forced" => Ok(Self::BruteForced),
            "paper-asserted" => Ok(Self::PaperAsserted),
            "lower-bound" => Ok(Self::LowerBound),
            _ => Err(Error::Parse(format!("unknown distance provenance {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Distance {
    pub value: usize,
    pub provenance: DistanceProvenance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        })
    }
}

/// Which constructor produced a code, with its parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CodeFamily {
    HypergraphProduct,
    LaCross {
        n: usize,
        k: usize,
    },
    BivariateBicycle {
        l: usize,
        m: usize,
        a: [Monomial; 3],
        b: [Monomial; 3],
    },
    Surface {
        d: usize,
    },
    /// Read back from a text description.
    Imported {
        name: String,
    },
}

impl fmt::Display for CodeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeFamily::HypergraphProduct => write!(f, "hgp"),
            CodeFamily::LaCross { n, k } => write!(f, "lacross n={n} k={k}"),
            CodeFamily::BivariateBicycle { l, m, a, b } => {
                let terms = |t: &[Monomial; 3]| {
                    t.iter()
                        .map(|mo| format!("x{}y{}", mo.x, mo.y))
                        .collect::<Vec<_>>()
                        .join("+")
                };
                write!(f, "bb l={l} m={m} a={} b={}", terms(a), terms(b))
            }
            CodeFamily::Surface { d } => write!(f, "surface d={d}"),
            CodeFamily::Imported { name } => write!(f, "{name}"),
        }
    }
}

/// Role of one stabilizer–qubit incidence in a two-block code.
///
/// Hypergraph products and Bivariate Bicycle codes share the same structure:
/// an `X`-check touches the first block through one classical matrix and the
/// second block through another, and a `Z`-check does the reverse. Tagging
/// each incidence with its role and an edge color is enough to build a
/// depth-optimal extraction schedule in which every pair of overlapping checks
/// is ordered consistently (see [`crate::circuit::schedule_extraction`]).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LegClass {
    XFirst,
    XSecond,
    ZFirst,
    ZSecond,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleHint {
    /// Palette size for `XFirst` / `ZSecond` legs.
    pub colors_a: usize,
    /// Palette size for `XSecond` / `ZFirst` legs.
    pub colors_b: usize,
    /// Per stabilizer: `(qubit, class, color)`.
    pub legs: Vec<Vec<(usize, LegClass, usize)>>,
}

/// A stabilizer code with declared parameters `[[N, K, D]]`.
#[derive(Clone, Debug)]
pub struct StabilizerCode {
    n: usize,
    k: usize,
    distance: Distance,
    hx: BinaryMatrix,
    hz: BinaryMatrix,
    logical_x: Vec<PauliString>,
    logical_z: Vec<PauliString>,
    sector_sizes: (usize, usize),
    /// Number of leading stabilizer rows that are `X`-type in the undeformed code.
    x_check_count: Option<usize>,
    boundary: Boundary,
    family: CodeFamily,
    deformed: bool,
    schedule_hint: Option<ScheduleHint>,
    notes: Vec<String>,
}

pub(crate) struct CodeParts {
    pub hx: BinaryMatrix,
    pub hz: BinaryMatrix,
    pub logical_x: Vec<PauliString>,
    pub logical_z: Vec<PauliString>,
    pub distance: Distance,
    pub sector_sizes: (usize, usize),
    pub x_check_count: Option<usize>,
    pub boundary: Boundary,
    pub family: CodeFamily,
    pub deformed: bool,
    pub schedule_hint: Option<ScheduleHint>,
    pub notes: Vec<String>,
}

impl StabilizerCode {
    /// Assembles a code and checks every structural invariant.
    pub(crate) fn from_parts(parts: CodeParts) -> Result<Self> {
        let n = parts.hx.cols();
        if parts.hz.cols() != n || parts.hz.rows() != parts.hx.rows() {
            return Err(Error::Dimension("hx and hz must have identical shapes".into()));
        }
        let code = Self {
            n,
            k: parts.logical_x.len(),
            distance: parts.distance,
            hx: parts.hx,
            hz: parts.hz,
            logical_x: parts.logical_x,
            logical_z: parts.logical_z,
            sector_sizes: parts.sector_sizes,
            x_check_count: parts.x_check_count,
            boundary: parts.boundary,
            family: parts.family,
            deformed: parts.deformed,
            schedule_hint: parts.schedule_hint,
            notes: parts.notes,
        };
        code.validate()?;
        Ok(code)
    }

    /// Checks commutation, logical pairing and the rank identity for `K`.
    pub fn validate(&self) -> Result<()> {
        let stabs = self.stabilizers();
        for (i, a) in stabs.iter().enumerate() {
            for (j, b) in stabs.iter().enumerate().skip(i + 1) {
                if !a.commutes_with(b) {
                    return Err(Error::Invariant(format!("stabilizers {i} and {j} anticommute")));
                }
            }
        }
        if self.logical_x.len() != self.logical_z.len() {
            return Err(Error::Invariant("unpaired logical operators".into()));
        }
        let logicals: Vec<&PauliString> = self.logical_x.iter().chain(&self.logical_z).collect();
        for (li, l) in logicals.iter().enumerate() {
            if l.num_qubits() != self.n {
                return Err(Error::Dimension(format!("logical {li} has wrong length")));
            }
            if let Some(si) = stabs.iter().position(|s| !s.commutes_with(l)) {
                return Err(Error::Invariant(format!(
                    "logical {li} anticommutes with stabilizer {si}"
                )));
            }
        }
        for (i, lx) in self.logical_x.iter().enumerate() {
            for (j, lz) in self.logical_z.iter().enumerate() {
                if lx.commutes_with(lz) == (i == j) {
                    return Err(Error::Invariant(format!("logical X{i} / Z{j} pairing is wrong")));
                }
            }
            for (j, other) in self.logical_x.iter().enumerate().skip(i + 1) {
                if !lx.commutes_with(other) {
                    return Err(Error::Invariant(format!("logical X{i} and X{j} anticommute")));
                }
            }
        }
        for (i, lz) in self.logical_z.iter().enumerate() {
            for (j, other) in self.logical_z.iter().enumerate().skip(i + 1) {
                if !lz.commutes_with(other) {
                    return Err(Error::Invariant(format!("logical Z{i} and Z{j} anticommute")));
                }
            }
        }
        let rank = self.hx.hstack(&self.hz)?.rank();
        if self.n - rank != self.k {
            return Err(Error::Invariant(format!(
                "K = {} but N - rank(H) = {}",
                self.k,
                self.n - rank
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn distance(&self) -> Distance {
        self.distance
    }

    pub fn hx(&self) -> &BinaryMatrix {
        &self.hx
    }

    pub fn hz(&self) -> &BinaryMatrix {
        &self.hz
    }

    pub fn logical_x(&self) -> &[PauliString] {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &[PauliString] {
        &self.logical_z
    }

    pub fn sector_sizes(&self) -> (usize, usize) {
        self.sector_sizes
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn family(&self) -> &CodeFamily {
        &self.family
    }

    pub fn is_deformed(&self) -> bool {
        self.deformed
    }

    pub fn schedule_hint(&self) -> Option<&ScheduleHint> {
        self.schedule_hint.as_ref()
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn num_stabilizers(&self) -> usize {
        self.hx.rows()
    }

    /// `(x-type, z-type)` check counts of the undeformed code, when known.
    pub fn css_check_counts(&self) -> Option<(usize, usize)> {
        self.x_check_count.map(|x| (x, self.num_stabilizers() - x))
    }

    pub fn stabilizer(&self, i: usize) -> PauliString {
        PauliString {
            x: self.hx.row_vector(i),
            z: self.hz.row_vector(i),
        }
    }

    pub fn stabilizers(&self) -> Vec<PauliString> {
        (0..self.num_stabilizers()).map(|i| self.stabilizer(i)).collect()
    }

    /// True when every stabilizer is purely `X` or purely `Z`.
    pub fn is_css(&self) -> bool {
        (0..self.num_stabilizers()).all(|i| self.hx.row(i).is_empty() || self.hz.row(i).is_empty())
    }

    pub fn max_stabilizer_weight(&self) -> usize {
        (0..self.num_stabilizers())
            .map(|i| self.stabilizer(i).weight())
            .max()
            .unwrap_or(0)
    }

    /// Sum of stabilizer weights; one two-qubit gate per unit per round.
    pub fn total_stabilizer_weight(&self) -> usize {
        (0..self.num_stabilizers()).map(|i| self.stabilizer(i).weight()).sum()
    }

    pub fn parameters(&self) -> (usize, usize, usize) {
        (self.n, self.k, self.distance.value)
    }

    /// True when `op` commutes with every stabilizer but is not in the
    /// stabilizer group.
    pub fn is_nontrivial_logical(&self, op: &PauliString) -> bool {
        self.stabilizers().iter().all(|s| s.commutes_with(op))
            && self
                .logical_x
                .iter()
                .chain(&self.logical_z)
                .any(|l| !l.commutes_with(op))
    }

    /// Replaces the distance after an exhaustive search, when one is feasible
    /// within `budget` candidate operators.
    ///
    /// A search that finds a lighter logical than the declared lower bound is
    /// an invariant violation. A search that exhausts `w_max` without finding
    /// one raises the lower bound instead.
    pub fn with_bruteforce_distance(mut self, w_max: usize, budget: u64) -> Result<Self> {
        match distance_bruteforce(&self, w_max, budget)? {
            Some(d) => {
                if self.distance.provenance != DistanceProvenance::PaperAsserted && d < self.distance.value {
                    return Err(Error::Invariant(format!(
                        "found a weight-{d} logical below the lower bound {}",
                        self.distance.value
                    )));
                }
                if self.distance.provenance == DistanceProvenance::PaperAsserted && d != self.distance.value {
                    return Err(Error::Invariant(format!(
                        "brute-forced distance {d} disagrees with the asserted {}",
                        self.distance.value
                    )));
                }
                self.distance = Distance {
                    value: d,
                    provenance: DistanceProvenance::BruteForced,
                };
            }
            None => {
                if self.distance.provenance == DistanceProvenance::LowerBound {
                    self.distance.value = self.distance.value.max(w_max + 1);
                }
            }
        }
        Ok(self)
    }

    /// Summary line: `[[N,K,D]] (distance: provenance)`.
    pub fn summary(&self) -> String {
        format!(
            "[[{},{},{}]] (distance: {})",
            self.n, self.k, self.distance.value, self.distance.provenance
        )
    }
}

/// CSS logical operators from kernel-modulo-image quotients, paired into
/// anticommuting `(X_i, Z_i)` couples by symplectic Gram–Schmidt.
pub(crate) fn css_logicals(hx: &BinaryMatrix, hz: &BinaryMatrix) -> Result<(Vec<PauliString>, Vec<PauliString>)> {
    let n = hx.cols();
    // Z-type logicals commute with the X checks and are not generated by Z checks.
    let quotient = |commute_with: &BinaryMatrix, modulo: &BinaryMatrix| {
        let mut span = RowSpan::new(n);
        for r in modulo.dense_rows() {
            span.insert(&r);
        }
        commute_with
            .kernel_basis()
            .into_iter()
            .filter(|v| span.insert(v))
            .collect::<Vec<_>>()
    };
    let zs = quotient(hx, hz);
    let xs = quotient(hz, hx);
    if zs.len() != xs.len() {
        return Err(Error::Invariant("X and Z logical counts differ".into()));
    }
    let (xs, zs) = symplectic_pairing(
        xs.into_iter().map(PauliString::x_type).collect(),
        zs.into_iter().map(PauliString::z_type).collect(),
    )?;
    Ok((xs, zs))
}

/// Symplectic Gram–Schmidt: returns `(X_i, Z_i)` with `X_i` anticommuting
/// exactly with `Z_i` and commuting with every other operator in the output.
pub(crate) fn symplectic_pairing(
    mut xs: Vec<PauliString>,
    mut zs: Vec<PauliString>,
) -> Result<(Vec<PauliString>, Vec<PauliString>)> {
    let mut out_x = Vec::new();
    let mut out_z = Vec::new();
    while let Some(x) = xs.pop() {
        let Some(pos) = zs.iter().position(|z| !z.commutes_with(&x)) else {
            return Err(Error::Invariant(
                "logical operator without an anticommuting partner".into(),
            ));
        };
        let z = zs.swap_remove(pos);
        for other in xs.iter_mut() {
            if !other.commutes_with(&z) {
                other.mul_assign(&x);
            }
        }
        for other in zs.iter_mut() {
            if !other.commutes_with(&x) {
                other.mul_assign(&z);
            }
        }
        out_x.push(x);
        out_z.push(z);
    }
    if !zs.is_empty() {
        return Err(Error::Invariant("unpaired Z logicals".into()));
    }
    out_x.reverse();
    out_z.reverse();
    Ok((out_x, out_z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_commutation() {
        let xx = PauliString::x_type(BitVector::from_ones(2, [0, 1]));
        let zz = PauliString::z_type(BitVector::from_ones(2, [0, 1]));
        let zi = PauliString::z_type(BitVector::from_ones(2, [0]));
        assert!(xx.commutes_with(&zz));
        assert!(!xx.commutes_with(&zi));
        assert_eq!(format!("{:?}", xx), "XX");
    }

    #[test]
    fn provenance_round_trip() {
        for p in [
            DistanceProvenance::BruteForced,
            DistanceProvenance::PaperAsserted,
            DistanceProvenance::LowerBound,
        ] {
            assert_eq!(p.to_string().parse::<DistanceProvenance>().unwrap(), p);
        }
    }
}
