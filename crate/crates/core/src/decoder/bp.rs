use super::DecodingGraph;

/// Output of [`bp_minsum`].
#[derive(Clone, Debug)]
pub struct BpOutput {
    /// Posterior log-likelihood ratios `ln P(0)/P(1)` per column.
    pub posterior: Vec<f64>,
    pub hard: Vec<bool>,
    pub converged: bool,
    pub iterations: usize,
}

/// Magnitude cap; a detector with a single column sends this certainty.
const MAX_MESSAGE: f32 = 100.0;

/// `ln((1−p)/p)`.
pub fn prior_llr(p: f64) -> f64 {
    ((1.0 - p) / p).ln()
}

/// Reusable message buffers. Messages are single precision and stored in
/// detector-major edge order so the check update streams through memory.
#[derive(Default, Clone, Debug)]
pub struct BpWorkspace {
    v2c: Vec<f32>,
    c2v: Vec<f32>,
    /// Per-detector parity of the current hard decision XOR the syndrome.
    mismatch: Vec<bool>,
}

/// Normalized min-sum belief propagation on the column–detector graph.
///
/// Flooding schedule. Check-to-variable messages are the minimum incoming
/// magnitude scaled by `s`, with sign from the other inputs and the syndrome
/// bit. Stops as soon as the hard decision reproduces the syndrome.
pub fn bp_minsum(graph: &DecodingGraph, syndrome: &[bool], priors: &[f64], max_iters: usize, s: f64) -> BpOutput {
    let mut ws = BpWorkspace::default();
    bp_minsum_with(graph, syndrome, priors, max_iters, s, &mut ws)
}

pub fn bp_minsum_with(
    graph: &DecodingGraph,
    syndrome: &[bool],
    priors: &[f64],
    max_iters: usize,
    s: f64,
    ws: &mut BpWorkspace,
) -> BpOutput {
    assert!(max_iters >= 1, "BP needs at least one iteration");
    let ncols = graph.num_columns();
    let edges = graph.col_rows.len();
    let slot = &graph.edge_slot;
    let llr: Vec<f64> = priors.iter().map(|&p| prior_llr(p)).collect();
    ws.v2c.clear();
    ws.v2c.resize(edges, 0.0);
    ws.c2v.clear();
    ws.c2v.resize(edges, 0.0);
    for c in 0..ncols {
        for e in graph.col_ptr[c]..graph.col_ptr[c + 1] {
            ws.v2c[slot[e] as usize] = llr[c] as f32;
        }
    }
    let sf = s as f32;
    let mut posterior = vec![0.0; ncols];
    let mut hard = vec![false; ncols];
    ws.mismatch.clear();
    ws.mismatch.extend_from_slice(syndrome);
    let mut unsatisfied = syndrome.iter().filter(|&&b| b).count();
    for it in 1..=max_iters {
        for (d, &bit) in syndrome.iter().enumerate() {
            let (lo, hi) = (graph.row_ptr[d], graph.row_ptr[d + 1]);
            let msgs = &ws.v2c[lo..hi];
            let mut sign = bit;
            let (mut min1, mut min2, mut arg) = (MAX_MESSAGE, MAX_MESSAGE, usize::MAX);
            for (k, &m) in msgs.iter().enumerate() {
                sign ^= m < 0.0;
                let a = m.abs();
                if a < min1 {
                    min2 = min1;
                    min1 = a;
                    arg = k;
                } else if a < min2 {
                    min2 = a;
                }
            }
            let (m1, m2) = (sf * min1, sf * min2);
            for (k, (out, &m)) in ws.c2v[lo..hi].iter_mut().zip(msgs).enumerate() {
                let mag = if k == arg { m2 } else { m1 };
                *out = if sign ^ (m < 0.0) { -mag } else { mag };
            }
        }
        for c in 0..ncols {
            let (lo, hi) = (graph.col_ptr[c], graph.col_ptr[c + 1]);
            let mut sum = 0.0f32;
            for &k in &slot[lo..hi] {
                sum += ws.c2v[k as usize];
            }
            let total = llr[c] + sum as f64;
            posterior[c] = total;
            if hard[c] != (total < 0.0) {
                hard[c] = !hard[c];
                for &d in &graph.col_rows[lo..hi] {
                    let m = &mut ws.mismatch[d];
                    *m = !*m;
                    if *m {
                        unsatisfied += 1;
                    } else {
                        unsatisfied -= 1;
                    }
                }
            }
            let tf = total as f32;
            for &k in &slot[lo..hi] {
                let k = k as usize;
                ws.v2c[k] = tf - ws.c2v[k];
            }
        }
        if unsatisfied == 0 {
            return BpOutput {
                posterior,
                hard,
                converged: true,
                iterations: it,
            };
        }
    }
    BpOutput {
        posterior,
        hard,
        converged: false,
        iterations: max_iters,
    }
}
