use std::collections::HashMap;

use super::StabilizerCode;
use crate::error::{Error, Result};

/// Syndrome-plus-logical signature of single-qubit Paulis, packed as words.
///
/// The first `stab_words` words hold the stabilizer syndrome, the rest hold
/// anticommutation with every logical operator.
struct Signatures {
    stab_words: usize,
    words: usize,
    /// `table[q][p]` for `p` in the allowed Pauli set.
    table: Vec<Vec<Vec<u64>>>,
}

impl Signatures {
    fn new(code: &StabilizerCode, paulis: &[(bool, bool)]) -> Self {
        let s = code.num_stabilizers();
        let logicals: Vec<_> = code.logical_x().iter().chain(code.logical_z()).collect();
        let stab_words = s.div_ceil(64).max(1);
        let words = stab_words + logicals.len().div_ceil(64).max(1);
        let stabs = code.stabilizers();
        let table = (0..code.n())
            .map(|q| {
                paulis
                    .iter()
                    .map(|&(px, pz)| {
                        let mut w = vec![0u64; words];
                        // A single-qubit Pauli anticommutes with P iff px·P.z + pz·P.x = 1.
                        for (i, st) in stabs.iter().enumerate() {
                            if (px && st.z.get(q)) ^ (pz && st.x.get(q)) {
                                w[i / 64] ^= 1 << (i % 64);
                            }
                        }
                        for (i, l) in logicals.iter().enumerate() {
                            if (px && l.z.get(q)) ^ (pz && l.x.get(q)) {
                                w[stab_words + i / 64] ^= 1 << (i % 64);
                            }
                        }
                        w
                    })
                    .collect()
            })
            .collect();
        Self {
            stab_words,
            words,
            table,
        }
    }
}

/// Minimum weight of a nontrivial logical operator, searching weights
/// `1..=w_max` in order.
///
/// Returns `Ok(None)` when no logical of weight at most `w_max` exists. The
/// search counts candidate operators and refuses with [`Error::Budget`] once
/// it would visit more than `budget`, so a result is never a guess. CSS codes
/// are searched with pure `X` and pure `Z` errors only, which is exact because
/// either part of a mixed logical is itself a logical of no larger weight.
pub fn distance_bruteforce(code: &StabilizerCode, w_max: usize, budget: u64) -> Result<Option<usize>> {
    let sets: Vec<Vec<(bool, bool)>> = if code.is_css() {
        vec![vec![(true, false)], vec![(false, true)]]
    } else {
        vec![vec![(true, false), (true, true), (false, true)]]
    };
    let searches: Vec<Signatures> = sets.iter().map(|p| Signatures::new(code, p)).collect();
    let mut spent = 0u64;
    for w in 1..=w_max.min(code.n()) {
        for sig in &searches {
            if search_weight(sig, code.n(), w, budget, &mut spent)? {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

/// Looks for a weight-`w` operator with zero syndrome and nonzero logical part.
///
/// The first `w − 1` qubits are enumerated; the last one is found by hash
/// lookup on the residual syndrome. Lighter logicals have already been ruled
/// out, so any hit uses `w` distinct qubits.
fn search_weight(sig: &Signatures, n: usize, w: usize, budget: u64, spent: &mut u64) -> Result<bool> {
    let sw = sig.stab_words;
    let mut index: HashMap<&[u64], Vec<&[u64]>> = HashMap::new();
    for q in 0..n {
        for s in &sig.table[q] {
            index.entry(&s[..sw]).or_default().push(&s[sw..]);
        }
    }
    let zero = vec![0u64; sig.words];
    let mut stack = vec![zero; w];
    let mut chosen = vec![0usize; w];
    let hit = |acc: &[u64]| -> bool {
        index.get(&acc[..sw]).is_some_and(|cands| {
            cands
                .iter()
                .any(|logical| logical.iter().zip(&acc[sw..]).any(|(a, b)| a != b))
        })
    };
    if w == 1 {
        *spent += 1;
        return Ok(hit(&stack[0]));
    }
    // Depth-first over qubit combinations q_0 < q_1 < ... < q_{w-2}.
    let mut depth = 0;
    chosen[0] = 0;
    let mut choice = vec![0usize; w];
    loop {
        if chosen[depth] >= n {
            if depth == 0 {
                return Ok(false);
            }
            depth -= 1;
            advance(sig, &mut chosen, &mut choice, depth);
            continue;
        }
        let (before, after) = stack.split_at_mut(depth + 1);
        let next = &mut after[0];
        let prev = &before[depth];
        let s = &sig.table[chosen[depth]][choice[depth]];
        for ((o, a), b) in next.iter_mut().zip(prev).zip(s) {
            *o = a ^ b;
        }
        if depth + 2 == w {
            *spent += 1;
            if *spent > budget {
                return Err(Error::Budget(format!(
                    "distance search exceeded {budget} candidates at weight {w}"
                )));
            }
            if hit(&stack[depth + 1]) {
                return Ok(true);
            }
            advance(sig, &mut chosen, &mut choice, depth);
        } else {
            depth += 1;
            chosen[depth] = chosen[depth - 1] + 1;
            choice[depth] = 0;
        }
    }
}

fn advance(sig: &Signatures, chosen: &mut [usize], choice: &mut [usize], depth: usize) {
    choice[depth] += 1;
    if choice[depth] == sig.table[0].len() {
        choice[depth] = 0;
        chosen[depth] += 1;
    }
}
