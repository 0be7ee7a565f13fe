use super::DecodingGraph;
use crate::error::{Error, Result};

/// Ordered-statistics order: `0` solves on the information set only, `1`
/// also tries every single non-pivot column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum OsdOrder {
    Zero,
    One,
}

impl TryFrom<u8> for OsdOrder {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            0 => Ok(Self::Zero),
            1 => Ok(Self::One),
            _ => Err(format!("OSD order must be 0 or 1, got {v}")),
        }
    }
}

impl From<OsdOrder> for u8 {
    fn from(o: OsdOrder) -> u8 {
        match o {
            OsdOrder::Zero => 0,
            OsdOrder::One => 1,
        }
    }
}

/// Incremental basis over detector space in reduced row-echelon form: each
/// basis vector owns a pivot bit that no other vector has. Vector `k`
/// remembers which selected columns (by slot) sum to it.
struct Echelon {
    words: usize,
    slot_words: usize,
    vecs: Vec<Vec<u64>>,
    combos: Vec<Vec<u64>>,
    /// Basis vector owning each detector bit as its pivot.
    owner: Vec<Option<usize>>,
    /// Column selected into each slot.
    slot_col: Vec<usize>,
}

impl Echelon {
    fn new(rows: usize, max_rank: usize) -> Self {
        Self {
            words: rows.div_ceil(64),
            slot_words: max_rank.div_ceil(64).max(1),
            vecs: Vec::new(),
            combos: Vec::new(),
            owner: vec![None; rows],
            slot_col: Vec::new(),
        }
    }

    /// Slot combination of the basis vectors owning the set bits of `bits`.
    /// Because pivots are exclusive, this is the representation of any
    /// vector in the span, and the residual of any other vector is free of
    /// pivot bits.
    fn represent(&self, bits: &[usize], combo: &mut [u64]) {
        combo.fill(0);
        for &d in bits {
            if let Some(k) = self.owner[d] {
                for (a, x) in combo.iter_mut().zip(&self.combos[k]) {
                    *a ^= x;
                }
            }
        }
    }

    /// Inserts column `col` with detector support `bits`; returns whether it was independent.
    fn insert(&mut self, col: usize, bits: &[usize]) -> bool {
        let mut v = vec![0u64; self.words];
        for &d in bits {
            v[d / 64] ^= 1 << (d % 64);
        }
        let mut combo = vec![0u64; self.slot_words];
        for &d in bits {
            if let Some(k) = self.owner[d] {
                for (a, x) in v.iter_mut().zip(&self.vecs[k]) {
                    *a ^= x;
                }
                for (a, x) in combo.iter_mut().zip(&self.combos[k]) {
                    *a ^= x;
                }
            }
        }
        let Some(b) = first_bit(&v) else { return false };
        let slot = self.slot_col.len();
        combo[slot / 64] ^= 1 << (slot % 64);
        for k in 0..self.vecs.len() {
            if self.vecs[k][b / 64] >> (b % 64) & 1 == 1 {
                for (a, x) in self.vecs[k].iter_mut().zip(&v) {
                    *a ^= x;
                }
                for (a, x) in self.combos[k].iter_mut().zip(&combo) {
                    *a ^= x;
                }
            }
        }
        self.owner[b] = Some(self.vecs.len());
        self.vecs.push(v);
        self.combos.push(combo);
        self.slot_col.push(col);
        true
    }
}

fn first_bit(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, &w)| i * 64 + w.trailing_zeros() as usize)
}

fn ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(i, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(i * 64 + b)
        })
    })
}

/// Ordered-statistics decoding.
///
/// Returns the hard decision `posterior < 0` unchanged when it already reproduces the
/// syndrome. Otherwise columns are ranked by posterior LLR (ascending, ties by
/// index) and greedily admitted into an information set; the syndrome is
/// solved on it (order 0). Order 1 then tries every single non-pivot column
/// and keeps the solution of least soft weight `Σ posterior`, with ties
/// keeping the earlier candidate.
///
/// Errors if the syndrome lies outside the column span, which a model built
/// from a deterministic circuit never produces.
pub fn osd(graph: &DecodingGraph, syndrome: &[bool], posterior: &[f64], order: OsdOrder) -> Result<Vec<bool>> {
    let hard: Vec<bool> = posterior.iter().map(|&l| l < 0.0).collect();
    if graph.satisfies(&hard, syndrome) {
        return Ok(hard);
    }
    let ncols = graph.num_columns();
    let rank = graph.rank();
    let mut ordered: Vec<usize> = (0..ncols).collect();
    ordered.sort_unstable_by(|&a, &b| posterior[a].total_cmp(&posterior[b]).then(a.cmp(&b)));

    let mut ech = Echelon::new(graph.num_detectors(), rank);
    let mut is_pivot = vec![false; ncols];
    for &c in &ordered {
        if ech.slot_col.len() == rank {
            break;
        }
        if ech.insert(c, graph.column_detectors(c)) {
            is_pivot[c] = true;
        }
    }

    let flagged: Vec<usize> = (0..syndrome.len()).filter(|&d| syndrome[d]).collect();
    let mut base = vec![0u64; ech.slot_words];
    ech.represent(&flagged, &mut base);
    let mut check = vec![false; syndrome.len()];
    for slot in ones(&base) {
        for &d in graph.column_detectors(ech.slot_col[slot]) {
            check[d] ^= true;
        }
    }
    if check != syndrome {
        return Err(Error::Invariant("syndrome outside the span of the error model".into()));
    }
    let slot_cost = |slot: usize| posterior[ech.slot_col[slot]];
    let mut best_cost: f64 = ones(&base).map(slot_cost).sum();
    let mut best_flip: Option<(usize, Vec<u64>)> = None;

    if order == OsdOrder::One {
        let neg_floor: f64 = (0..ech.slot_col.len()).map(|k| slot_cost(k).min(0.0)).sum();
        let mut combo = vec![0u64; ech.slot_words];
        for &c in &ordered {
            if is_pivot[c] {
                continue;
            }
            // Any candidate with column c costs at least L_c + Σ min(L_pivot, 0).
            if posterior[c] + neg_floor >= best_cost {
                break;
            }
            ech.represent(graph.column_detectors(c), &mut combo);
            let mut cost = pivot_cost(&base, &combo, &slot_cost) + posterior[c];
            if cost.is_nan() {
                cost = f64::INFINITY;
            }
            if cost < best_cost {
                best_cost = cost;
                best_flip = Some((c, combo.clone()));
            }
        }
    }

    let mut out = vec![false; ncols];
    let final_combo = match &best_flip {
        Some((c, combo)) => {
            out[*c] = true;
            base.iter().zip(combo).map(|(a, b)| a ^ b).collect()
        }
        None => base,
    };
    for slot in ones(&final_combo) {
        out[ech.slot_col[slot]] = true;
    }
    Ok(out)
}

/// Soft weight of the pivot part `base ⊕ combo`.
fn pivot_cost(base: &[u64], combo: &[u64], slot_cost: &impl Fn(usize) -> f64) -> f64 {
    let mut total = 0.0;
    for (i, (a, b)) in base.iter().zip(combo).enumerate() {
        let mut w = a ^ b;
        while w != 0 {
            total += slot_cost(i * 64 + w.trailing_zeros() as usize);
            w &= w - 1;
        }
    }
    total
}
