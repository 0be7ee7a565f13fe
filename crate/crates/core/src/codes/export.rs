//! Plain-text code descriptions.
//!
//! ```text
//! # stabilizer code
//! family surface d=2
//! deformed false
//! boundary open
//! parameters 5 1 2 lower-bound
//! sectors 4 1
//! stabilizers 4
//! S x 0 2 4 z
//! ...
//! logicals 1
//! LX x 0 1 z
//! LZ x z 0 2
//! ```
//!
//! Qubit indices are zero-based. Each `S`, `LX` and `LZ` line lists the
//! X-support after `x` and the Z-support after `z`; a qubit in both acts as `Y`.

use std::fmt::Write as _;

use super::{Boundary, CodeFamily, CodeParts, Distance, DistanceProvenance, PauliString, StabilizerCode};
use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVector};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliSupport {
    pub x: Vec<usize>,
    pub z: Vec<usize>,
}

impl PauliSupport {
    fn of(p: &PauliString) -> Self {
        Self {
            x: p.x.ones(),
            z: p.z.ones(),
        }
    }

    fn to_pauli(&self, n: usize) -> Result<PauliString> {
        if let Some(&q) = self.x.iter().chain(&self.z).find(|&&q| q >= n) {
            return Err(Error::Parse(format!("qubit {q} out of range for N = {n}")));
        }
        PauliString::new(
            BitVector::from_ones(n, self.x.iter().copied()),
            BitVector::from_ones(n, self.z.iter().copied()),
        )
    }

    fn write(&self, out: &mut String, tag: &str) {
        out.push_str(tag);
        out.push_str(" x");
        for q in &self.x {
            let _ = write!(out, " {q}");
        }
        out.push_str(" z");
        for q in &self.z {
            let _ = write!(out, " {q}");
        }
        out.push('\n');
    }

    fn parse(tokens: &[&str]) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed support line {:?}", tokens.join(" ")));
        if tokens.first() != Some(&"x") {
            return Err(bad());
        }
        let zpos = tokens.iter().position(|&t| t == "z").ok_or_else(bad)?;
        let nums =
            |ts: &[&str]| -> Result<Vec<usize>> { ts.iter().map(|t| t.parse::<usize>().map_err(|_| bad())).collect() };
        Ok(Self {
            x: nums(&tokens[1..zpos])?,
            z: nums(&tokens[zpos + 1..])?,
        })
    }
}

/// Structured description of a code, independent of how it was built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeDescription {
    pub family: String,
    pub deformed: bool,
    pub boundary: Boundary,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub provenance: DistanceProvenance,
    pub sector_sizes: (usize, usize),
    pub stabilizers: Vec<PauliSupport>,
    pub logical_x: Vec<PauliSupport>,
    pub logical_z: Vec<PauliSupport>,
}

impl CodeDescription {
    pub fn to_text(&self) -> String {
        let mut out = String::from("# stabilizer code\n");
        let _ = writeln!(out, "family {}", self.family);
        let _ = writeln!(out, "deformed {}", self.deformed);
        let _ = writeln!(out, "boundary {}", self.boundary);
        let _ = writeln!(out, "parameters {} {} {} {}", self.n, self.k, self.d, self.provenance);
        let _ = writeln!(out, "sectors {} {}", self.sector_sizes.0, self.sector_sizes.1);
        let _ = writeln!(out, "stabilizers {}", self.stabilizers.len());
        for s in &self.stabilizers {
            s.write(&mut out, "S");
        }
        let _ = writeln!(out, "logicals {}", self.logical_x.len());
        for (lx, lz) in self.logical_x.iter().zip(&self.logical_z) {
            lx.write(&mut out, "LX");
            lz.write(&mut out, "LZ");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut field = |key: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing {key:?} line")))?;
            line.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix(' ').or(Some(rest).filter(|r| r.is_empty())))
                .map(str::to_string)
                .ok_or_else(|| Error::Parse(format!("expected {key:?}, found {line:?}")))
        };
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("expected an integer, found {s:?}")))
        };
        let family = field("family")?;
        let deformed = match field("deformed")?.as_str() {
            "true" => true,
            "false" => false,
            other => return Err(Error::Parse(format!("bad deformed flag {other:?}"))),
        };
        let boundary = match field("boundary")?.as_str() {
            "open" => Boundary::Open,
            "periodic" => Boundary::Periodic,
            other => return Err(Error::Parse(format!("bad boundary {other:?}"))),
        };
        let params = field("parameters")?;
        let p: Vec<&str> = params.split_whitespace().collect();
        if p.len() != 4 {
            return Err(Error::Parse(format!("bad parameters line {params:?}")));
        }
        let (n, k, d) = (num(p[0])?, num(p[1])?, num(p[2])?);
        let provenance = p[3].parse()?;
        let sectors = field("sectors")?;
        let s: Vec<&str> = sectors.split_whitespace().collect();
        if s.len() != 2 {
            return Err(Error::Parse(format!("bad sectors line {sectors:?}")));
        }
        let sector_sizes = (num(s[0])?, num(s[1])?);
        let count = num(&field("stabilizers")?)?;
        let mut stabilizers = Vec::with_capacity(count);
        for _ in 0..count {
            let line = field("S")?;
            stabilizers.push(PauliSupport::parse(&line.split_whitespace().collect::<Vec<_>>())?);
        }
        let kk = num(&field("logicals")?)?;
        let mut logical_x = Vec::with_capacity(kk);
        let mut logical_z = Vec::with_capacity(kk);
        for _ in 0..kk {
            let lx = field("LX")?;
            logical_x.push(PauliSupport::parse(&lx.split_whitespace().collect::<Vec<_>>())?);
            let lz = field("LZ")?;
            logical_z.push(PauliSupport::parse(&lz.split_whitespace().collect::<Vec<_>>())?);
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("trailing content {extra:?}")));
        }
        Ok(Self {
            family,
            deformed,
            boundary,
            n,
            k,
            d,
            provenance,
            sector_sizes,
            stabilizers,
            logical_x,
            logical_z,
        })
    }
}

impl StabilizerCode {
    pub fn describe(&self) -> CodeDescription {
        CodeDescription {
            family: self.family().to_string(),
            deformed: self.is_deformed(),
            boundary: self.boundary(),
            n: self.n(),
            k: self.k(),
            d: self.distance().value,
            provenance: self.distance().provenance,
            sector_sizes: self.sector_sizes(),
            stabilizers: self.stabilizers().iter().map(PauliSupport::of).collect(),
            logical_x: self.logical_x().iter().map(PauliSupport::of).collect(),
            logical_z: self.logical_z().iter().map(PauliSupport::of).collect(),
        }
    }

    /// Rebuilds a code from a description, re-verifying every invariant.
    ///
    /// The result carries no schedule hint, so circuits built from it use the
    /// generic scheduler.
    pub fn from_description(desc: &CodeDescription) -> Result<Self> {
        let n = desc.n;
        let stabs = desc
            .stabilizers
            .iter()
            .map(|s| s.to_pauli(n))
            .collect::<Result<Vec<_>>>()?;
        let rows = |f: fn(&PauliString) -> &BitVector| -> Result<BinaryMatrix> {
            BinaryMatrix::from_rows(stabs.len(), n, stabs.iter().map(|s| f(s).ones()).collect())
        };
        let hx = rows(|s| &s.x)?;
        let hz = rows(|s| &s.z)?;
        let to_paulis = |v: &[PauliSupport]| v.iter().map(|s| s.to_pauli(n)).collect::<Result<Vec<_>>>();
        let code = Self::from_parts(CodeParts {
            hx,
            hz,
            logical_x: to_paulis(&desc.logical_x)?,
            logical_z: to_paulis(&desc.logical_z)?,
            distance: Distance {
                value: desc.d,
                provenance: desc.provenance,
            },
            sector_sizes: desc.sector_sizes,
            x_check_count: None,
            boundary: desc.boundary,
            family: CodeFamily::Imported {
                name: desc.family.clone(),
            },
            deformed: desc.deformed,
            schedule_hint: None,
            notes: Vec::new(),
        })?;
        if code.k() != desc.k {
            return Err(Error::Parse(format!(
                "declared K = {} but the description has {} logical pairs",
                desc.k,
                code.k()
            )));
        }
        Ok(code)
    }
}
