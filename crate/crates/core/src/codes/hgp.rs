use super::{
    Boundary, CodeFamily, CodeParts, Distance, DistanceProvenance, LegClass, PauliString, ScheduleHint, StabilizerCode,
};
use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVector};

/// Largest classical dimension for which codewords are enumerated.
const MAX_ENUMERATED_DIMENSION: usize = 24;

/// Hypergraph product of two classical parity-check matrices.
///
/// With `H1: r1×n1` and `H2: r2×n2`,
/// `hx = [H1⊗I_{n2} | I_{r1}⊗H2ᵀ]` and `hz = [I_{n1}⊗H2 | H1ᵀ⊗I_{r2}]`.
/// Qubit `(a, b)` of the first sector has index `a·n2 + b`; qubit `(c, d)`
/// of the second sector has index `n1·n2 + c·r2 + d`.
///
/// ```
/// use erasure_qldpc::codes::hypergraph_product;
/// use erasure_qldpc::gf2::BinaryMatrix;
///
/// let rep = BinaryMatrix::from_rows(2, 3, vec![vec![0, 1], vec![1, 2]]).unwrap();
/// let code = hypergraph_product(&rep, &rep).unwrap();
/// assert_eq!((code.n(), code.k()), (13, 1));
/// ```
pub fn hypergraph_product(h1: &BinaryMatrix, h2: &BinaryMatrix) -> Result<StabilizerCode> {
    build_hgp(h1, h2, CodeFamily::HypergraphProduct, Vec::new())
}

/// La-cross code: hypergraph product of two copies of the `(n−k)×n` seed with
/// generating polynomial `1 + x + x^k`, optionally Clifford-deformed.
///
/// ```
/// use erasure_qldpc::codes::lacross;
///
/// let code = lacross(5, 2, true).unwrap();
/// assert_eq!(code.parameters(), (34, 4, 3));
/// assert!(!code.is_css());
/// ```
pub fn lacross(n: usize, k: usize, deformed: bool) -> Result<StabilizerCode> {
    let seed = BinaryMatrix::circulant_rectangular(n, k)?;
    let mut notes = Vec::new();
    if k == 1 {
        notes.push("k=1 seed: 1+x+x^k degenerates to the two terms {0,1}".to_string());
    }
    let code = build_hgp(&seed, &seed, CodeFamily::LaCross { n, k }, notes)?;
    let expected_n = (n - k) * (n - k) + n * n;
    if code.n() != expected_n || code.k() != k * k {
        return Err(Error::Invariant(format!(
            "La-cross ({n},{k}) gave [[{},{}]], expected [[{expected_n},{}]]",
            code.n(),
            code.k(),
            k * k
        )));
    }
    if deformed {
        clifford_deform(&code)
    } else {
        Ok(code)
    }
}

/// Unrotated distance-`d` surface code `[[d² + (d−1)², 1, d]]`, the hypergraph
/// product of two length-`d` repetition codes. `deformed` yields the XZZX
/// variant.
pub fn surface_code(d: usize, deformed: bool) -> Result<StabilizerCode> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "surface code distance must be at least 2, got {d}"
        )));
    }
    let rep = BinaryMatrix::circulant_rectangular(d, 1)?;
    let code = build_hgp(&rep, &rep, CodeFamily::Surface { d }, Vec::new())?;
    if deformed {
        clifford_deform(&code)
    } else {
        Ok(code)
    }
}

/// Conjugates every first-sector qubit by Hadamard.
///
/// Applying it twice returns the original code.
pub fn clifford_deform(code: &StabilizerCode) -> Result<StabilizerCode> {
    let (s1, s2) = code.sector_sizes();
    if s2 == 0 || s1 + s2 != code.n() {
        return Err(Error::InvalidParameter(
            "Clifford deformation needs a two-sector hypergraph product code".into(),
        ));
    }
    let swap = |hx: &BinaryMatrix, hz: &BinaryMatrix| -> Result<BinaryMatrix> {
        let rows = (0..hx.rows())
            .map(|r| {
                hz.row(r)
                    .iter()
                    .copied()
                    .filter(|&c| c < s1)
                    .chain(hx.row(r).iter().copied().filter(|&c| c >= s1))
                    .collect()
            })
            .collect();
        BinaryMatrix::from_rows(hx.rows(), hx.cols(), rows)
    };
    StabilizerCode::from_parts(CodeParts {
        hx: swap(code.hx(), code.hz())?,
        hz: swap(code.hz(), code.hx())?,
        logical_x: code.logical_x().iter().map(|l| l.hadamard_on(0..s1)).collect(),
        logical_z: code.logical_z().iter().map(|l| l.hadamard_on(0..s1)).collect(),
        distance: code.distance(),
        sector_sizes: code.sector_sizes(),
        x_check_count: code.x_check_count,
        boundary: code.boundary(),
        family: code.family().clone(),
        deformed: !code.is_deformed(),
        schedule_hint: code.schedule_hint().cloned(),
        notes: code.notes().to_vec(),
    })
}

/// Minimum weight of a nonzero codeword of `ker h`, or `None` when the kernel
/// is trivial. Enumerates all `2^k` codewords.
pub fn classical_distance(h: &BinaryMatrix) -> Result<Option<usize>> {
    let basis = h.kernel_basis();
    if basis.len() > MAX_ENUMERATED_DIMENSION {
        return Err(Error::Budget(format!(
            "classical code dimension {} exceeds enumeration limit {MAX_ENUMERATED_DIMENSION}",
            basis.len()
        )));
    }
    Ok(codewords(&basis, h.cols())
        .into_iter()
        .skip(1)
        .map(|v| v.weight())
        .min())
}

/// All `2^k` combinations of `basis`, in Gray-code order starting at zero.
fn codewords(basis: &[BitVector], n: usize) -> Vec<BitVector> {
    let mut out = Vec::with_capacity(1 << basis.len());
    let mut cur = BitVector::zeros(n);
    out.push(cur.clone());
    for i in 1u64..(1u64 << basis.len()) {
        cur.xor_assign(&basis[i.trailing_zeros() as usize]);
        out.push(cur.clone());
    }
    out
}

/// Kernel basis made of lightest-first independent codewords when the
/// dimension is small enough to enumerate.
fn light_kernel_basis(h: &BinaryMatrix) -> Vec<BitVector> {
    let basis = h.kernel_basis();
    if basis.len() > 16 {
        return basis;
    }
    let mut words = codewords(&basis, h.cols());
    words.remove(0);
    words.sort_by_key(|w| (w.weight(), w.ones()));
    let mut span = crate::gf2::RowSpan::new(h.cols());
    words.into_iter().filter(|w| span.insert(w)).collect()
}

/// Vectors `r_j` with `kernel[i]·r_j = δ_ij`, preferring unit vectors.
fn dual_representatives(kernel: &[BitVector], n: usize) -> Result<Vec<BitVector>> {
    let k = kernel.len();
    let rows: Vec<Vec<usize>> = kernel.iter().map(|v| v.ones()).collect();
    let m = BinaryMatrix::from_rows(k, n, rows)?;
    let mt = m.transpose();
    (0..k)
        .map(|j| {
            let unit = (0..n).find(|&c| mt.row(c) == [j]);
            match unit {
                Some(c) => Ok(BitVector::from_ones(n, [c])),
                None => m
                    .solve_in_span(&BitVector::from_ones(k, [j]))?
                    .ok_or_else(|| Error::Invariant("kernel basis is not independent".into())),
            }
        })
        .collect()
}

fn tensor(a: &BitVector, b: &BitVector, offset: usize, n: usize) -> BitVector {
    let mut out = BitVector::zeros(n);
    for i in a.iter_ones() {
        for j in b.iter_ones() {
            out.set(offset + i * b.len() + j, true);
        }
    }
    out
}

/// Proper edge coloring of the Tanner graph of `h`, as one color per entry of
/// each row (aligned with `h.row(r)`), plus the palette size.
///
/// Matrices whose rows are all shifts of one offset pattern get the
/// translation-invariant coloring "color = position of the term"; everything
/// else falls back to the bipartite alternating-path construction, which
/// always uses exactly the maximum degree.
pub(crate) fn edge_coloring(h: &BinaryMatrix) -> (Vec<Vec<usize>>, usize) {
    if let Some(c) = shift_coloring(h) {
        return c;
    }
    konig_coloring(h)
}

fn shift_coloring(h: &BinaryMatrix) -> Option<(Vec<Vec<usize>>, usize)> {
    let offsets = |r: usize| -> Option<Vec<usize>> { h.row(r).iter().map(|&c| c.checked_sub(r)).collect() };
    let first = offsets(0)?;
    for r in 1..h.rows() {
        if offsets(r)? != first {
            return None;
        }
    }
    let palette = first.len();
    Some(((0..h.rows()).map(|_| (0..palette).collect()).collect(), palette))
}

fn konig_coloring(h: &BinaryMatrix) -> (Vec<Vec<usize>>, usize) {
    let r = h.rows();
    let delta = h
        .max_row_weight()
        .max(h.column_weights().into_iter().max().unwrap_or(0));
    // Node ids: checks 0..r, bits r..r+n. at[node][color] = neighbor.
    let mut at: Vec<Vec<Option<usize>>> = vec![vec![None; delta]; r + h.cols()];
    for check in 0..r {
        for &bit in h.row(check) {
            let (u, v) = (check, r + bit);
            let a = (0..delta).find(|&c| at[u][c].is_none()).expect("free color at check");
            let b = (0..delta).find(|&c| at[v][c].is_none()).expect("free color at bit");
            if at[v][a].is_some() {
                // Swap a/b along the alternating path starting at v with color a.
                let mut path = vec![v];
                let mut node = v;
                let mut color = a;
                while let Some(next) = at[node][color] {
                    path.push(next);
                    node = next;
                    color = if color == a { b } else { a };
                }
                let mut color = a;
                for w in path.windows(2) {
                    let other = if color == a { b } else { a };
                    at[w[0]][color] = None;
                    at[w[1]][color] = None;
                    color = other;
                }
                let mut color = a;
                for w in path.windows(2) {
                    let other = if color == a { b } else { a };
                    at[w[0]][other] = Some(w[1]);
                    at[w[1]][other] = Some(w[0]);
                    color = other;
                }
            }
            debug_assert!(at[u][a].is_none() && at[v][a].is_none());
            at[u][a] = Some(v);
            at[v][a] = Some(u);
        }
    }
    let colors = (0..r)
        .map(|check| {
            h.row(check)
                .iter()
                .map(|&bit| {
                    (0..delta)
                        .find(|&c| at[check][c] == Some(r + bit))
                        .expect("every edge is colored")
                })
                .collect()
        })
        .collect();
    (colors, delta)
}

fn build_hgp(h1: &BinaryMatrix, h2: &BinaryMatrix, family: CodeFamily, notes: Vec<String>) -> Result<StabilizerCode> {
    if h1.is_zero() || h2.is_zero() {
        return Err(Error::InvalidParameter(
            "hypergraph product seeds must be nonzero".into(),
        ));
    }
    let (r1, n1) = (h1.rows(), h1.cols());
    let (r2, n2) = (h2.rows(), h2.cols());
    let (h1t, h2t) = (h1.transpose(), h2.transpose());
    let hx = h1
        .kronecker(&BinaryMatrix::identity(n2))
        .hstack(&BinaryMatrix::identity(r1).kronecker(&h2t))?;
    let hz = BinaryMatrix::identity(n1)
        .kronecker(h2)
        .hstack(&h1t.kronecker(&BinaryMatrix::identity(r2)))?;
    let hz = BinaryMatrix::zeros(r1 * n2, hz.cols()).vstack(&hz)?;
    let hx = hx.vstack(&BinaryMatrix::zeros(n1 * r2, hx.cols()))?;
    let n = n1 * n2 + r1 * r2;
    let s1 = n1 * n2;

    let ker1 = light_kernel_basis(h1);
    let ker2 = light_kernel_basis(h2);
    let ker1t = light_kernel_basis(&h1t);
    let ker2t = light_kernel_basis(&h2t);
    if ker1.len() * ker2.len() + ker1t.len() * ker2t.len() == 0 {
        return Err(Error::InvalidParameter(
            "hypergraph product encodes no logical qubits".into(),
        ));
    }
    let rep1 = dual_representatives(&ker1, n1)?;
    let rep2 = dual_representatives(&ker2, n2)?;
    let rep1t = dual_representatives(&ker1t, r1)?;
    let rep2t = dual_representatives(&ker2t, r2)?;

    let mut logical_x = Vec::new();
    let mut logical_z = Vec::new();
    for i in 0..ker1.len() {
        for j in 0..ker2.len() {
            logical_z.push(PauliString::z_type(tensor(&ker1[i], &rep2[j], 0, n)));
            logical_x.push(PauliString::x_type(tensor(&rep1[i], &ker2[j], 0, n)));
        }
    }
    for i in 0..ker1t.len() {
        for j in 0..ker2t.len() {
            logical_z.push(PauliString::z_type(tensor(&rep1t[i], &ker2t[j], s1, n)));
            logical_x.push(PauliString::x_type(tensor(&ker1t[i], &rep2t[j], s1, n)));
        }
    }

    let mut bound = usize::MAX;
    for h in [h1, h2, &h1t, &h2t] {
        if let Some(d) = classical_distance(h)? {
            bound = bound.min(d);
        }
    }

    let hint = hgp_schedule_hint(h1, h2);
    StabilizerCode::from_parts(CodeParts {
        hx,
        hz,
        logical_x,
        logical_z,
        distance: Distance {
            value: bound,
            provenance: DistanceProvenance::LowerBound,
        },
        sector_sizes: (s1, r1 * r2),
        x_check_count: Some(r1 * n2),
        boundary: Boundary::Open,
        family,
        deformed: false,
        schedule_hint: Some(hint),
        notes,
    })
}

fn hgp_schedule_hint(h1: &BinaryMatrix, h2: &BinaryMatrix) -> ScheduleHint {
    let (r1, n1) = (h1.rows(), h1.cols());
    let (r2, n2) = (h2.rows(), h2.cols());
    let s1 = n1 * n2;
    let (col1, p1) = edge_coloring(h1);
    let (col2, p2) = edge_coloring(h2);
    let color1 = |c: usize, a: usize| col1[c][h1.row(c).iter().position(|&x| x == a).unwrap()];
    let color2 = |d: usize, b: usize| col2[d][h2.row(d).iter().position(|&x| x == b).unwrap()];
    let h1t = h1.transpose();
    let h2t = h2.transpose();
    let mut legs = Vec::with_capacity(r1 * n2 + n1 * r2);
    for c in 0..r1 {
        for b in 0..n2 {
            let mut l = Vec::new();
            for &a in h1.row(c) {
                l.push((a * n2 + b, LegClass::XFirst, color1(c, a)));
            }
            for &d in h2t.row(b) {
                l.push((s1 + c * r2 + d, LegClass::XSecond, color2(d, b)));
            }
            legs.push(l);
        }
    }
    for a in 0..n1 {
        for d in 0..r2 {
            let mut l = Vec::new();
            for &b in h2.row(d) {
                l.push((a * n2 + b, LegClass::ZFirst, color2(d, b)));
            }
            for &c in h1t.row(a) {
                l.push((s1 + c * r2 + d, LegClass::ZSecond, color1(c, a)));
            }
            legs.push(l);
        }
    }
    ScheduleHint {
        colors_a: p1,
        colors_b: p2,
        legs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{distance_bruteforce, Pauli};
    use proptest::prelude::*;

    fn rep(n: usize) -> BinaryMatrix {
        BinaryMatrix::circulant_rectangular(n, 1).unwrap()
    }

    #[test]
    fn surface_code_parameters() {
        for (d, n) in [(2, 5), (3, 13), (4, 25), (5, 41)] {
            let code = surface_code(d, false).unwrap();
            assert_eq!((code.n(), code.k(), code.distance().value), (n, 1, d));
            assert_eq!(code.distance().provenance, DistanceProvenance::LowerBound);
        }
    }

    #[test]
    fn toy_product_of_single_checks() {
        let h = BinaryMatrix::from_rows(1, 2, vec![vec![0, 1]]).unwrap();
        let code = hypergraph_product(&h, &h).unwrap();
        assert_eq!((code.n(), code.k()), (5, 1));
        assert_eq!(distance_bruteforce(&code, 3, 1_000_000).unwrap(), Some(2));
    }

    #[test]
    fn rejects_zero_dimension_product() {
        let h = BinaryMatrix::identity(3);
        assert!(matches!(hypergraph_product(&h, &h), Err(Error::InvalidParameter(_))));
        let z = BinaryMatrix::zeros(2, 3);
        assert!(hypergraph_product(&z, &rep(3)).is_err());
    }

    #[test]
    fn lacross_closed_forms() {
        let table = [
            (5, 2, 34, 4, 3),
            (6, 2, 52, 4, 4),
            (8, 2, 100, 4, 5),
            (9, 2, 130, 4, 6),
            (6, 3, 45, 9, 3),
            (7, 3, 65, 9, 4),
            (10, 3, 149, 9, 5),
            (12, 3, 225, 9, 6),
            (8, 4, 80, 16, 3),
            (9, 4, 106, 16, 3),
            (10, 4, 136, 16, 4),
            (12, 4, 208, 16, 5),
        ];
        for (n, k, nn, kk, d) in table {
            let code = lacross(n, k, false).unwrap();
            assert_eq!(code.parameters(), (nn, kk, d), "lacross({n},{k})");
            assert_eq!(code.css_check_counts(), Some((n * (n - k), n * (n - k))));
            assert!(code.max_stabilizer_weight() <= 6);
        }
    }

    #[test]
    fn seed_distance_matches_enumeration() {
        // Codewords of 1+x+x^2 seeds: minimum weights from direct enumeration.
        for (n, d) in [(5, 3), (6, 4), (8, 5), (9, 6)] {
            let h = BinaryMatrix::circulant_rectangular(n, 2).unwrap();
            assert_eq!(classical_distance(&h).unwrap(), Some(d));
        }
        assert_eq!(classical_distance(&BinaryMatrix::identity(3)).unwrap(), None);
    }

    #[test]
    fn deformation_is_an_involution() {
        let code = lacross(5, 2, false).unwrap();
        let once = clifford_deform(&code).unwrap();
        let twice = clifford_deform(&once).unwrap();
        assert!(!once.is_css());
        assert_eq!(twice.hx(), code.hx());
        assert_eq!(twice.hz(), code.hz());
        assert_eq!(twice.logical_x(), code.logical_x());
        assert!(code.is_css() && !twice.is_deformed());
    }

    #[test]
    fn deformation_matches_block_structure() {
        // Original X checks act by Z on sector 1 and by X on sector 2, and
        // the reverse for Z checks.
        let code = lacross(6, 3, true).unwrap();
        let (s1, _) = code.sector_sizes();
        let (nx, _) = code.css_check_counts().unwrap();
        for i in 0..code.num_stabilizers() {
            let s = code.stabilizer(i);
            for q in s.support() {
                let p = s.pauli_at(q);
                let expect = match (i < nx, q < s1) {
                    (true, true) | (false, false) => Pauli::Z,
                    _ => Pauli::X,
                };
                assert_eq!(p, expect, "stabilizer {i} qubit {q}");
            }
        }
    }

    #[test]
    fn xzzx_bulk_stabilizers() {
        let code = surface_code(3, true).unwrap();
        for i in 0..code.num_stabilizers() {
            let s = code.stabilizer(i);
            if s.weight() == 4 {
                assert_eq!(s.x.weight(), 2);
                assert_eq!(s.z.weight(), 2);
            }
        }
    }

    #[test]
    fn deformed_logicals_are_uniform_single_sector() {
        for (n, k) in [(5, 2), (6, 3), (8, 4)] {
            let code = lacross(n, k, true).unwrap();
            let (s1, _) = code.sector_sizes();
            for l in code.logical_x().iter().chain(code.logical_z()) {
                let sup = l.support();
                let in_first = sup.iter().all(|&q| q < s1);
                let in_second = sup.iter().all(|&q| q >= s1);
                assert!(in_first || in_second);
                let all_x = l.z.is_zero();
                let all_z = l.x.is_zero();
                assert!(all_x || all_z);
            }
        }
    }

    #[test]
    fn degree_four_seeds_have_light_codewords() {
        // 1+x+x^4 truncated seeds: explicit codewords bounding the distance from above.
        for (n, word) in [(9, vec![3, 6, 7]), (10, vec![0, 4, 7, 8]), (12, vec![0, 4, 7, 8, 10])] {
            let h = BinaryMatrix::circulant_rectangular(n, 4).unwrap();
            let v = BitVector::from_ones(n, word.iter().copied());
            assert!(h.mul_vec(&v).unwrap().is_zero());
            let code = lacross(n, 4, false).unwrap();
            let mut z = BitVector::zeros(code.n());
            for &a in &word {
                z.set(a * n, true);
            }
            assert!(code.is_nontrivial_logical(&PauliString::z_type(z)));
        }
    }

    #[test]
    fn logical_weights_equal_distance() {
        let code = lacross(6, 2, false).unwrap();
        for l in code.logical_x().iter().chain(code.logical_z()) {
            assert_eq!(l.weight(), 4);
        }
    }

    #[test]
    fn edge_colorings_are_proper() {
        let irregular = BinaryMatrix::from_rows(3, 5, vec![vec![0, 1, 4], vec![1, 2], vec![0, 2, 3, 4]]).unwrap();
        for h in [
            BinaryMatrix::circulant_rectangular(7, 3).unwrap(),
            irregular,
            BinaryMatrix::cyclic_shift(5)
                .unwrap()
                .add(&BinaryMatrix::identity(5))
                .unwrap(),
        ] {
            let (colors, palette) = edge_coloring(&h);
            let mut per_bit = vec![Vec::new(); h.cols()];
            for r in 0..h.rows() {
                let mut seen = colors[r].clone();
                seen.sort();
                seen.dedup();
                assert_eq!(seen.len(), colors[r].len());
                for (i, &c) in h.row(r).iter().enumerate() {
                    assert!(colors[r][i] < palette);
                    per_bit[c].push(colors[r][i]);
                }
            }
            for mut cs in per_bit {
                let len = cs.len();
                cs.sort();
                cs.dedup();
                assert_eq!(cs.len(), len);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn random_products_satisfy_invariants(
            e1 in proptest::collection::vec(proptest::collection::vec(0usize..5, 1..4), 1..4),
            e2 in proptest::collection::vec(proptest::collection::vec(0usize..4, 1..4), 1..3),
        ) {
            let h1 = BinaryMatrix::from_rows(e1.len(), 5, e1).unwrap();
            let h2 = BinaryMatrix::from_rows(e2.len(), 4, e2).unwrap();
            match hypergraph_product(&h1, &h2) {
                Ok(code) => {
                    let (k1, k2) = (5 - h1.rank(), 4 - h2.rank());
                    let (k1t, k2t) = (h1.rows() - h1.rank(), h2.rows() - h2.rank());
                    prop_assert_eq!(code.k(), k1 * k2 + k1t * k2t);
                    prop_assert_eq!(code.n(), 20 + h1.rows() * h2.rows());
                    let deformed = clifford_deform(&code).unwrap();
                    prop_assert_eq!(deformed.k(), code.k());
                }
                Err(Error::InvalidParameter(_)) => {
                    let k = (5 - h1.rank()) * (4 - h2.rank())
                        + (h1.rows() - h1.rank()) * (h2.rows() - h2.rank());
                    prop_assert!(h1.is_zero() || h2.is_zero() || k == 0);
                }
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }
    }
}
