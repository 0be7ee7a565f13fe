//! Bit-parallel Pauli-frame sampling and an exact enumeration oracle.
//!
//! The sampler tracks only flips relative to the noiseless reference: every
//! detector and observable of a verified circuit is deterministic, so its
//! noisy value is the parity of the frame bits at its measurements. Shots are
//! packed 64 to a word and processed in blocks; block `b` draws from
//! `ChaCha8(seed)` on stream `b`, so a batch is bit-identical for any thread
//! count.

pub(crate) mod frame;
mod oracle;

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::{ErasureKind, NoiseSpec, NoisyCircuit};

pub(crate) use frame::{Frames, Injection, Program};
pub use oracle::{exact_oracle, ExactDistribution, ORACLE_SITE_CAP};

/// Row-major bit matrix, one row per shot, LSB-first within each word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitTable {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitTable {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = cols.div_ceil(64);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.stride + c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.stride + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        self.row(r).iter().all(|&w| w == 0)
    }

    /// Indices of set bits in row `r`.
    pub fn row_ones(&self, r: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (wi, &w) in self.row(r).iter().enumerate() {
            let mut w = w;
            while w != 0 {
                out.push(wi * 64 + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        out
    }

    /// Number of set bits in column `c`.
    pub fn column_count(&self, c: usize) -> usize {
        (0..self.rows).filter(|&r| self.get(r, c)).count()
    }

    /// Writes `words[j]` lane `l` to row `first_row + l`, column `j`.
    fn scatter(chunk: &mut [u64], stride: usize, lanes: usize, words: &[u64]) {
        for (j, &w) in words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let l = w.trailing_zeros() as usize;
                debug_assert!(l < lanes);
                chunk[l * stride + j / 64] |= 1 << (j % 64);
                w &= w - 1;
            }
        }
    }

    fn write_bytes<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let nbytes = self.cols.div_ceil(8);
        let mut buf = vec![0u8; nbytes];
        for r in 0..self.rows {
            let row = self.row(r);
            for (i, b) in buf.iter_mut().enumerate() {
                *b = (row[i / 8] >> (8 * (i % 8))) as u8;
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    fn read_bytes<R: Read>(mut r: R, rows: usize, cols: usize) -> std::io::Result<Self> {
        let mut t = Self::zeros(rows, cols);
        let nbytes = cols.div_ceil(8);
        let mut buf = vec![0u8; nbytes];
        for row in 0..rows {
            r.read_exact(&mut buf)?;
            for (i, &b) in buf.iter().enumerate() {
                t.data[row * t.stride + i / 8] |= (b as u64) << (8 * (i % 8));
            }
        }
        Ok(t)
    }
}

/// Sampled shots: detector flips, herald bits and true observable flips.
#[derive(Clone, Debug, PartialEq)]
pub struct ShotBatch {
    pub shots: usize,
    pub seed: u64,
    pub spec: NoiseSpec,
    pub detectors: BitTable,
    pub heralds: BitTable,
    pub observables: BitTable,
}

const MAGIC: &[u8; 8] = b"EQSHOTS1";
const HEADER_WORDS: usize = 10;

impl ShotBatch {
    /// Binary dump: the 8-byte magic `EQSHOTS1`; ten little-endian `u64`
    /// words (shots, detector, herald and observable counts, seed, the bits of
    /// `p` and `R_e` as `f64`, erasure kind `0` unbiased or `1` biased, spec
    /// hash, reserved zero); then the
    /// detector, herald and observable tables, each row-major with
    /// `ceil(cols/8)` bytes per shot, bit `j` of a row in byte `j/8` at
    /// position `j%8`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        for v in [
            self.shots as u64,
            self.detectors.cols() as u64,
            self.heralds.cols() as u64,
            self.observables.cols() as u64,
            self.seed,
            self.spec.p.to_bits(),
            self.spec.erasure_fraction.to_bits(),
            (self.spec.erasure_kind == ErasureKind::Biased) as u64,
            self.spec.hash64(),
            0,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        self.detectors.write_bytes(&mut w)?;
        self.heralds.write_bytes(&mut w)?;
        self.observables.write_bytes(&mut w)
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parse("not a shot-batch dump".into()));
        }
        let mut head = [0u64; HEADER_WORDS];
        for h in head.iter_mut() {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            *h = u64::from_le_bytes(b);
        }
        let [shots, d, h, o, seed, p, re, kind, hash, _] = head;
        let kind = match kind {
            0 => ErasureKind::Unbiased,
            1 => ErasureKind::Biased,
            k => return Err(Error::Parse(format!("unknown erasure kind code {k}"))),
        };
        let spec = NoiseSpec::new(f64::from_bits(p), f64::from_bits(re), kind)?;
        if spec.hash64() != hash {
            return Err(Error::Parse("noise spec hash mismatch".into()));
        }
        let (shots, d, h, o) = (shots as usize, d as usize, h as usize, o as usize);
        Ok(Self {
            shots,
            seed,
            spec,
            detectors: BitTable::read_bytes(&mut r, shots, d)?,
            heralds: BitTable::read_bytes(&mut r, shots, h)?,
            observables: BitTable::read_bytes(&mut r, shots, o)?,
        })
    }

    /// Shots in which observable `k` flipped, for every `k`.
    pub fn observable_flip_counts(&self) -> Vec<usize> {
        (0..self.observables.cols())
            .map(|k| self.observables.column_count(k))
            .collect()
    }

    pub fn text_summary(&self) -> String {
        let mut out = format!(
            "shots {}\nseed {}\np {}\nerasure_fraction {}\nerasure_kind {}\nspec_hash {:016x}\ndetectors {}\nheralds {}\nobservables {}\n",
            self.shots,
            self.seed,
            self.spec.p,
            self.spec.erasure_fraction,
            self.spec.erasure_kind,
            self.spec.hash64(),
            self.detectors.cols(),
            self.heralds.cols(),
            self.observables.cols()
        );
        let any = (0..self.shots).filter(|&s| !self.observables.row_is_zero(s)).count();
        for (k, c) in self.observable_flip_counts().iter().enumerate() {
            out.push_str(&format!("observable {k} flips {c}\n"));
        }
        out.push_str(&format!("any_observable flips {any}\n"));
        out
    }
}

/// Samples `shots` noisy executions of `noisy`.
///
/// Per gate, a fault occurs with probability `p`; fault positions over
/// `(gate, lane)` are drawn by geometric skipping. A fault is an erasure with
/// probability `p_e / p`, in which case the herald is set and a conditional
/// Pauli is drawn uniformly from the erasure kind's outcomes; otherwise one of
/// the 15 non-identity two-qubit Paulis is applied uniformly.
pub fn sample(noisy: &NoisyCircuit, shots: usize, seed: u64) -> ShotBatch {
    let circuit = noisy.circuit();
    let program = Program::compile(circuit);
    let spec = *noisy.spec();
    let (nd, nh, no) = (circuit.num_detectors(), noisy.num_heralds(), circuit.num_observables());
    let mut detectors = BitTable::zeros(shots, nd);
    let mut heralds = BitTable::zeros(shots, nh);
    let mut observables = BitTable::zeros(shots, no);
    let (sd, sh, so) = (detectors.stride, heralds.stride, observables.stride);
    let blocks = shots.div_ceil(64);

    let work: Vec<_> = block_chunks(&mut detectors, blocks)
        .into_iter()
        .zip(block_chunks(&mut heralds, blocks))
        .zip(block_chunks(&mut observables, blocks))
        .enumerate()
        .collect();

    work.into_par_iter().for_each_init(
        || (Frames::new(&program), Vec::new(), vec![0u64; nh]),
        |(frames, events, herald_words), (b, ((dc, hc), oc))| {
            let lanes = (shots - b * 64).min(64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            herald_words.fill(0);
            draw_events(&mut rng, &spec, program.num_gates, lanes, events, herald_words);
            frames.run(&program, events);
            let dw = frames.parities(circuit.detectors());
            let ow = frames.parities(circuit.observables());
            BitTable::scatter(dc, sd, lanes, &dw);
            BitTable::scatter(hc, sh, lanes, herald_words);
            BitTable::scatter(oc, so, lanes, &ow);
        },
    );

    ShotBatch {
        shots,
        seed,
        spec,
        detectors,
        heralds,
        observables,
    }
}

/// Splits a table into per-64-shot slices; zero-width tables yield empty slices.
fn block_chunks(t: &mut BitTable, blocks: usize) -> Vec<&mut [u64]> {
    if t.stride == 0 {
        (0..blocks).map(|_| <&mut [u64]>::default()).collect()
    } else {
        t.data.chunks_mut(64 * t.stride).collect()
    }
}

fn draw_events(
    rng: &mut ChaCha8Rng,
    spec: &crate::noise::NoiseSpec,
    gates: usize,
    lanes: usize,
    events: &mut Vec<Injection>,
    herald_words: &mut [u64],
) {
    events.clear();
    let p = spec.p;
    if p <= 0.0 || gates == 0 {
        return;
    }
    let total = (gates * lanes) as u64;
    let erasure_share = spec.erasure_share();
    let outcomes = spec.erasure_kind.outcomes();
    let log_q = (1.0 - p).ln();
    let mut pos: u64 = 0;
    loop {
        if p < 1.0 {
            let u: f64 = 1.0 - rng.random::<f64>();
            let gap = (u.ln() / log_q).floor();
            if gap >= (total - pos) as f64 {
                break;
            }
            pos += gap as u64;
        }
        if pos >= total {
            break;
        }
        let gate = (pos / lanes as u64) as u32;
        let lane = (pos % lanes as u64) as u32;
        let mask = if rng.random::<f64>() < erasure_share {
            herald_words[gate as usize] |= 1 << lane;
            outcomes[rng.random_range(0..outcomes.len())]
        } else {
            rng.random_range(1..16u8)
        };
        if mask != 0 {
            events.push(Injection { gate, lane, mask });
        }
        pos += 1;
    }
}
