//! Detector error models and erasure-aware BP+OSD decoding.
//!
//! [`build_dem`] turns a noisy circuit into independent mechanisms. A
//! [`DecodingGraph`] groups mechanisms by signature into columns; per shot,
//! fired heralds raise the priors of their linked columns and the
//! syndrome is decoded by min-sum BP followed, if BP fails to reproduce it,
//! by ordered-statistics post-processing.

mod bp;
mod dem;
mod osd;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVector};
use crate::noise::ErasureKind;
use crate::sim::ShotBatch;

pub use bp::{bp_minsum, bp_minsum_with, prior_llr, BpOutput, BpWorkspace};
pub use dem::{
    apply_heralds, build_dem, clamp_prior, code_capacity_dem, xor_combine, DetectorErrorModel, HeraldLink, Mechanism,
    PRIOR_CEIL, PRIOR_FLOOR,
};
pub use osd::{osd, OsdOrder};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderSettings {
    pub max_iters: usize,
    /// Min-sum message scaling `s ∈ (0, 1]`.
    pub scaling: f64,
    pub osd_order: OsdOrder,
    /// Whether herald bits reach the decoder.
    pub use_heralds: bool,
}

impl DecoderSettings {
    /// Ten iterations, the erasure kind's default scaling, order-1 OSD, heralds on.
    pub fn for_kind(kind: ErasureKind) -> Self {
        Self {
            max_iters: 10,
            scaling: kind.default_scaling(),
            osd_order: OsdOrder::One,
            use_heralds: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.scaling > 0.0 && self.scaling <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "min-sum scaling {} outside (0, 1]",
                self.scaling
            )));
        }
        Ok(())
    }
}

/// Column view of a detector error model: one column per distinct
/// `(detectors, observables)` signature.
#[derive(Clone, Debug)]
pub struct DecodingGraph {
    num_detectors: usize,
    num_observables: usize,
    num_heralds: usize,
    pub(crate) col_ptr: Vec<usize>,
    pub(crate) col_rows: Vec<usize>,
    pub(crate) row_ptr: Vec<usize>,
    /// Row-order position of each edge.
    pub(crate) edge_slot: Vec<u32>,
    /// Column of each row entry.
    row_cols: Vec<usize>,
    col_obs: Vec<Vec<usize>>,
    mechanism_column: Vec<usize>,
    /// Column priors from unlinked mechanisms only.
    static_prior: Vec<f64>,
    /// Column priors with every mechanism at its static prior.
    blind_prior: Vec<f64>,
    /// `(column, conditional)` pairs raised by each herald.
    herald_columns: Vec<Vec<(usize, f64)>>,
    rank: usize,
}

impl DecodingGraph {
    pub fn new(dem: &DetectorErrorModel) -> Self {
        let mut index: HashMap<(&[usize], &[usize]), usize> = HashMap::new();
        let mut cols: Vec<(&[usize], &[usize])> = Vec::new();
        let mut mechanism_column = Vec::with_capacity(dem.mechanisms.len());
        for m in &dem.mechanisms {
            let key = (m.detectors.as_slice(), m.observables.as_slice());
            let c = *index.entry(key).or_insert_with(|| {
                cols.push(key);
                cols.len() - 1
            });
            mechanism_column.push(c);
        }
        let n = cols.len();
        let mut static_prior = vec![0.0; n];
        let mut blind_prior = vec![0.0; n];
        let mut herald_columns = vec![Vec::new(); dem.num_heralds];
        for (m, &c) in dem.mechanisms.iter().zip(&mechanism_column) {
            blind_prior[c] = xor_combine(blind_prior[c], m.prior);
            match m.herald {
                None => static_prior[c] = xor_combine(static_prior[c], m.prior),
                Some(l) => herald_columns[l.herald].push((c, l.conditional)),
            }
        }
        let mut col_ptr = vec![0];
        let mut col_rows = Vec::new();
        for (d, _) in &cols {
            col_rows.extend_from_slice(d);
            col_ptr.push(col_rows.len());
        }
        let mut row_count = vec![0usize; dem.num_detectors + 1];
        for &r in &col_rows {
            row_count[r + 1] += 1;
        }
        let mut row_ptr = row_count;
        for i in 0..dem.num_detectors {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut fill = row_ptr.clone();
        let mut row_edges = vec![0; col_rows.len()];
        for (e, &r) in col_rows.iter().enumerate() {
            row_edges[fill[r]] = e;
            fill[r] += 1;
        }
        let mut edge_slot = vec![0u32; row_edges.len()];
        for (k, &e) in row_edges.iter().enumerate() {
            edge_slot[e] = k as u32;
        }
        let row_cols: Vec<usize> = row_edges.iter().map(|&e| edge_col(&col_ptr, e)).collect();
        let h = BinaryMatrix::from_rows(
            dem.num_detectors,
            n,
            (0..dem.num_detectors)
                .map(|r| row_cols[row_ptr[r]..row_ptr[r + 1]].to_vec())
                .collect(),
        )
        .expect("column indices are in range");
        Self {
            num_detectors: dem.num_detectors,
            num_observables: dem.num_observables,
            num_heralds: dem.num_heralds,
            rank: h.rank(),
            col_obs: cols.iter().map(|(_, o)| o.to_vec()).collect(),
            col_ptr,
            col_rows,
            row_ptr,
            edge_slot,
            row_cols,
            mechanism_column,
            static_prior,
            blind_prior,
            herald_columns,
        }
    }

    pub fn num_columns(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn num_detectors(&self) -> usize {
        self.num_detectors
    }

    pub fn num_observables(&self) -> usize {
        self.num_observables
    }

    pub fn num_heralds(&self) -> usize {
        self.num_heralds
    }

    /// GF(2) rank of the detector–column matrix.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn column_detectors(&self, c: usize) -> &[usize] {
        &self.col_rows[self.col_ptr[c]..self.col_ptr[c + 1]]
    }

    pub fn column_observables(&self, c: usize) -> &[usize] {
        &self.col_obs[c]
    }

    /// Column holding mechanism `m`.
    pub fn mechanism_column(&self, m: usize) -> usize {
        self.mechanism_column[m]
    }

    /// Detector parities of a column selection.
    pub fn syndrome_of(&self, cols: &[bool]) -> Vec<bool> {
        let mut s = vec![false; self.num_detectors];
        for (c, _) in cols.iter().enumerate().filter(|x| *x.1) {
            for &d in self.column_detectors(c) {
                s[d] ^= true;
            }
        }
        s
    }

    pub fn satisfies(&self, cols: &[bool], syndrome: &[bool]) -> bool {
        (0..self.num_detectors).all(|d| {
            let parity = self.row_cols[self.row_ptr[d]..self.row_ptr[d + 1]]
                .iter()
                .filter(|&&c| cols[c])
                .count()
                % 2
                == 1;
            parity == syndrome[d]
        })
    }

    /// Observable flips implied by a column selection.
    pub fn observables_of(&self, cols: &[bool]) -> Vec<bool> {
        let mut o = vec![false; self.num_observables];
        for (c, _) in cols.iter().enumerate().filter(|x| *x.1) {
            for &k in &self.col_obs[c] {
                o[k] ^= true;
            }
        }
        o
    }

    /// Column priors from per-mechanism priors, XOR-combined within each
    /// column and clamped.
    pub fn column_priors(&self, mechanism_priors: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_columns()];
        for (m, &p) in mechanism_priors.iter().enumerate() {
            let c = self.mechanism_column[m];
            out[c] = xor_combine(out[c], p);
        }
        out.into_iter().map(clamp_prior).collect()
    }

    /// Per-shot column priors. With `Some(heralds)`, linked mechanisms take
    /// their conditional probability when their herald fired and vanish
    /// otherwise; with `None`, every mechanism keeps its static prior.
    pub fn shot_priors(&self, heralds: Option<&[bool]>) -> Vec<f64> {
        match heralds {
            None => self.blind_prior.iter().map(|&p| clamp_prior(p)).collect(),
            Some(h) => {
                let mut out = self.static_prior.clone();
                for (hi, _) in h.iter().enumerate().filter(|x| *x.1) {
                    for &(c, q) in &self.herald_columns[hi] {
                        out[c] = xor_combine(out[c], q);
                    }
                }
                out.into_iter().map(clamp_prior).collect()
            }
        }
    }
}

/// Column owning edge `e` (binary search over column offsets).
fn edge_col(col_ptr: &[usize], e: usize) -> usize {
    col_ptr.partition_point(|&p| p <= e) - 1
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    /// Predicted observable flips.
    pub predicted: Vec<bool>,
    /// BP reproduced the syndrome before any post-processing.
    pub converged: bool,
    pub iterations: usize,
    pub osd_invoked: bool,
}

/// Decodes one shot: BP on the given column priors, then OSD if BP did not
/// reproduce the syndrome. A zero syndrome short-circuits to no correction.
pub fn decode(
    graph: &DecodingGraph,
    syndrome: &[bool],
    priors: &[f64],
    settings: &DecoderSettings,
    ws: &mut BpWorkspace,
) -> Result<DecodeResult> {
    if syndrome.iter().all(|&b| !b) {
        return Ok(DecodeResult {
            predicted: vec![false; graph.num_observables()],
            converged: true,
            iterations: 0,
            osd_invoked: false,
        });
    }
    let bp = bp_minsum_with(graph, syndrome, priors, settings.max_iters, settings.scaling, ws);
    let (correction, osd_invoked) = if bp.converged {
        (bp.hard, false)
    } else {
        // Columns at the prior floor are ruled out by the heralds, but BP can
        // still drag their posteriors below those of erased columns through
        // short cycles. Ranking them last keeps OSD off them.
        let reliability: Vec<f64> = bp
            .posterior
            .iter()
            .zip(priors)
            .map(|(&l, &p)| if p <= PRIOR_FLOOR { f64::INFINITY } else { l })
            .collect();
        (osd(graph, syndrome, &reliability, settings.osd_order)?, true)
    };
    debug_assert!(graph.satisfies(&correction, syndrome), "correction misses the syndrome");
    Ok(DecodeResult {
        predicted: graph.observables_of(&correction),
        converged: bp.converged,
        iterations: bp.iterations,
        osd_invoked,
    })
}

#[derive(Clone, Debug)]
pub struct BatchOutcome {
    pub results: Vec<DecodeResult>,
    /// Shots whose prediction differs from the true flips on any observable.
    pub failures: usize,
}

fn row_bits(words: &[u64], len: usize) -> Vec<bool> {
    (0..len).map(|i| words[i / 64] >> (i % 64) & 1 == 1).collect()
}

/// Decodes every shot of `batch` in parallel.
pub fn decode_batch(graph: &DecodingGraph, batch: &ShotBatch, settings: &DecoderSettings) -> Result<BatchOutcome> {
    settings.validate()?;
    let dims = (batch.detectors.cols(), batch.heralds.cols(), batch.observables.cols());
    if dims != (graph.num_detectors(), graph.num_heralds(), graph.num_observables()) {
        return Err(Error::Dimension(format!(
            "batch has (detectors, heralds, observables) = {dims:?}, model has ({}, {}, {})",
            graph.num_detectors(),
            graph.num_heralds(),
            graph.num_observables()
        )));
    }
    let blind = (!settings.use_heralds).then(|| graph.shot_priors(None));
    let results: Vec<Result<DecodeResult>> = (0..batch.shots)
        .into_par_iter()
        .map_init(BpWorkspace::default, |ws, s| {
            let syndrome = row_bits(batch.detectors.row(s), graph.num_detectors());
            let priors = match &blind {
                Some(p) => p.clone(),
                None => {
                    let h = row_bits(batch.heralds.row(s), graph.num_heralds());
                    graph.shot_priors(Some(&h))
                }
            };
            decode(graph, &syndrome, &priors, settings, ws)
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let failures = results
        .iter()
        .enumerate()
        .filter(|(s, r)| row_bits(batch.observables.row(*s), graph.num_observables()) != r.predicted)
        .count();
    Ok(BatchOutcome { results, failures })
}

/// Dense detector × column matrix, for tests and inspection.
pub fn check_matrix(graph: &DecodingGraph) -> BinaryMatrix {
    let rows: Vec<BitVector> = (0..graph.num_detectors())
        .map(|d| {
            BitVector::from_ones(
                graph.num_columns(),
                graph.row_cols[graph.row_ptr[d]..graph.row_ptr[d + 1]].iter().copied(),
            )
        })
        .collect();
    BinaryMatrix::from_bit_rows(graph.num_columns(), &rows)
}
