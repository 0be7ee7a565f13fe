use crate::codes::{LegClass, ScheduleHint, StabilizerCode};

/// Layered syndrome-extraction schedule: `layers[t]` lists the
/// `(stabilizer, qubit)` interactions performed in time step `t`.
///
/// Every ancilla and every data qubit appears at most once per layer, and any
/// two stabilizers that act on a shared qubit with anticommuting Paulis meet
/// in the same relative order on an even number of such qubits, which is what
/// keeps the measured operators equal to the stabilizers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub layers: Vec<Vec<(usize, usize)>>,
}

impl Schedule {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Time step of each `(stabilizer, qubit)` leg, per stabilizer.
    pub fn leg_times(&self, num_stabilizers: usize) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); num_stabilizers];
        for (t, layer) in self.layers.iter().enumerate() {
            for &(s, q) in layer {
                out[s].push((q, t));
            }
        }
        out
    }
}

/// Builds the extraction schedule of `code`.
///
/// Codes carrying a two-block [`ScheduleHint`] (hypergraph products and
/// Bivariate Bicycle codes) get a slot table indexed by leg class and edge
/// color that needs `2Δa + Δb − 2` layers: 4 for the surface code and 7 for
/// weight-6 checks. Other codes are colored greedily with qubits visited in
/// ascending order within each stabilizer; if that coloring misorders a pair
/// of overlapping stabilizers, stabilizers are measured one after another.
///
/// ```
/// use erasure_qldpc::circuit::schedule_extraction;
/// use erasure_qldpc::codes::surface_code;
///
/// assert_eq!(schedule_extraction(&surface_code(3, false).unwrap()).depth(), 4);
/// ```
pub fn schedule_extraction(code: &StabilizerCode) -> Schedule {
    if let Some(hint) = code.schedule_hint() {
        if let Some(s) = hinted(code, hint) {
            return s;
        }
    }
    let greedy = greedy(code);
    if consistent(code, &greedy) {
        greedy
    } else {
        sequential(code)
    }
}

fn hinted(code: &StabilizerCode, hint: &ScheduleHint) -> Option<Schedule> {
    let (da, db) = (hint.colors_a, hint.colors_b);
    if da == 0 || db == 0 {
        return None;
    }
    let slot: Box<dyn Fn(LegClass, usize) -> usize> = if da >= 2 {
        let m = da - 1;
        Box::new(move |class, c| match class {
            LegClass::XFirst if c < da - 1 => c,
            LegClass::XFirst => m + db,
            LegClass::XSecond | LegClass::ZFirst => m + c,
            LegClass::ZSecond if c < da - 1 => m + db + c,
            LegClass::ZSecond => 0,
        })
    } else {
        Box::new(move |class, c| match class {
            LegClass::XFirst => c,
            LegClass::XSecond | LegClass::ZFirst => da + c,
            LegClass::ZSecond => da + db + c,
        })
    };
    let depth = if da >= 2 { 2 * da + db - 2 } else { 2 * da + db };
    let mut layers = vec![Vec::new(); depth];
    for (s, legs) in hint.legs.iter().enumerate() {
        for &(q, class, color) in legs {
            layers[slot(class, color)].push((s, q));
        }
    }
    for layer in layers.iter_mut() {
        layer.sort_unstable();
    }
    let schedule = Schedule { layers };
    (proper(code, &schedule) && consistent(code, &schedule)).then_some(schedule)
}

fn greedy(code: &StabilizerCode) -> Schedule {
    let n = code.n();
    let s = code.num_stabilizers();
    let mut qubit_busy: Vec<Vec<bool>> = vec![Vec::new(); n];
    let mut stab_busy: Vec<Vec<bool>> = vec![Vec::new(); s];
    let mut layers: Vec<Vec<(usize, usize)>> = Vec::new();
    let free = |v: &Vec<bool>, t: usize| !v.get(t).copied().unwrap_or(false);
    for st in 0..s {
        for q in code.stabilizer(st).support() {
            let t = (0..)
                .find(|&t| free(&stab_busy[st], t) && free(&qubit_busy[q], t))
                .expect("unbounded search");
            for v in [&mut stab_busy[st], &mut qubit_busy[q]] {
                if v.len() <= t {
                    v.resize(t + 1, false);
                }
                v[t] = true;
            }
            if layers.len() <= t {
                layers.resize(t + 1, Vec::new());
            }
            layers[t].push((st, q));
        }
    }
    Schedule { layers }
}

fn sequential(code: &StabilizerCode) -> Schedule {
    let mut layers = Vec::new();
    for st in 0..code.num_stabilizers() {
        for q in code.stabilizer(st).support() {
            layers.push(vec![(st, q)]);
        }
    }
    Schedule { layers }
}

/// Each ancilla and data qubit at most once per layer, every leg exactly once.
fn proper(code: &StabilizerCode, schedule: &Schedule) -> bool {
    let mut seen = vec![Vec::new(); code.num_stabilizers()];
    for layer in &schedule.layers {
        let mut qs: Vec<usize> = layer.iter().map(|&(_, q)| q).collect();
        let mut ss: Vec<usize> = layer.iter().map(|&(s, _)| s).collect();
        qs.sort_unstable();
        ss.sort_unstable();
        if qs.windows(2).any(|w| w[0] == w[1]) || ss.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
        for &(s, q) in layer {
            seen[s].push(q);
        }
    }
    seen.iter_mut().enumerate().all(|(s, qs)| {
        qs.sort_unstable();
        *qs == code.stabilizer(s).support()
    })
}

/// For each overlapping pair, the number of anticommuting shared qubits on
/// which the first stabilizer acts earlier must be even.
pub(crate) fn consistent(code: &StabilizerCode, schedule: &Schedule) -> bool {
    let s = code.num_stabilizers();
    let times = schedule.leg_times(s);
    let stabs = code.stabilizers();
    let mut at_qubit: Vec<Vec<(usize, usize)>> = vec![Vec::new(); code.n()];
    for (st, legs) in times.iter().enumerate() {
        for &(q, t) in legs {
            at_qubit[q].push((st, t));
        }
    }
    let mut parity = std::collections::HashMap::<(usize, usize), bool>::new();
    for (q, entries) in at_qubit.iter().enumerate() {
        for (i, &(a, ta)) in entries.iter().enumerate() {
            for &(b, tb) in &entries[i + 1..] {
                let pa = stabs[a].pauli_at(q);
                let pb = stabs[b].pauli_at(q);
                if pa != pb {
                    let key = (a.min(b), a.max(b));
                    let first_earlier = if a < b { ta < tb } else { tb < ta };
                    *parity.entry(key).or_default() ^= first_earlier;
                }
            }
        }
    }
    parity.values().all(|&odd| !odd)
}
