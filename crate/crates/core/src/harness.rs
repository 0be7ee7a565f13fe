//! Experiment orchestration and statistics: end-to-end points, per-round
//! normalization, threshold crossings and scaling exponents.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::{build_memory, verify_deterministic, Basis};
use crate::codes::StabilizerCode;
use crate::decoder::{build_dem, decode_batch, DecoderSettings, DecodingGraph};
use crate::error::{Error, Result};
use crate::noise::{attach, ErasureKind, NoiseSpec, NoisyCircuit};
use crate::sim::sample;

/// Version of the CSV/JSON result schema.
pub const SCHEMA_VERSION: u32 = 1;

/// `P_L = 1 − (1 − p_L)^{1/rounds}`.
pub fn normalize_per_round(p_l_cum: f64, rounds: usize) -> f64 {
    assert!(rounds >= 1, "rounds must be positive");
    if p_l_cum <= 0.0 {
        return 0.0;
    }
    // 1 − exp(ln(1 − p)/R), evaluated without cancellation for small p.
    -((-p_l_cum).ln_1p() / rounds as f64).exp_m1()
}

/// Inverse of [`normalize_per_round`]: `1 − (1 − P_L)^rounds`.
pub fn cumulative_from_round(p_l_round: f64, rounds: usize) -> f64 {
    -((-p_l_round).ln_1p() * rounds as f64).exp_m1()
}

/// `P_L^K = 1 − (1 − P_L)^K`: failure probability of `K` independent copies.
pub fn surface_family_failure(p_l_single: f64, k: usize) -> f64 {
    assert!(k >= 1, "K must be positive");
    -((-p_l_single).ln_1p() * k as f64).exp_m1()
}

/// One measured point of a logical-error curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub code_id: String,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub rounds: usize,
    pub p: f64,
    pub erasure_fraction: f64,
    pub erasure_kind: ErasureKind,
    pub shots: usize,
    pub failures: usize,
    pub p_l_cum: f64,
    pub p_l_round: f64,
    pub stderr_cum: f64,
    pub stderr_round: f64,
    pub max_iters: usize,
    pub scaling: f64,
    pub osd_order: u8,
    pub use_heralds: bool,
    pub seed: u64,
}

impl CurvePoint {
    /// Fills the derived columns from `failures / shots`.
    ///
    /// The cumulative error is binomial, `sqrt(p(1−p)/shots)`, and is carried
    /// through the normalization by the delta method,
    /// `σ_round = σ_cum · (1 − p)^{1/R − 1} / R`. A point with no failures
    /// reports `3/shots` (rule of three) for both.
    pub fn finish(&mut self) {
        let n = self.shots as f64;
        self.p_l_cum = self.failures as f64 / n;
        self.p_l_round = normalize_per_round(self.p_l_cum, self.rounds);
        if self.failures == 0 {
            self.stderr_cum = 3.0 / n;
            self.stderr_round = 3.0 / n;
        } else if self.failures == self.shots {
            self.stderr_cum = 0.0;
            self.stderr_round = 0.0;
        } else {
            let p = self.p_l_cum;
            let r = self.rounds as f64;
            self.stderr_cum = (p * (1.0 - p) / n).sqrt();
            self.stderr_round = self.stderr_cum * (1.0 - p).powf(1.0 / r - 1.0) / r;
        }
    }

    /// `(P, σ)` in the requested convention.
    pub fn value(&self, normalized: bool) -> (f64, f64) {
        if normalized {
            (self.p_l_round, self.stderr_round)
        } else {
            (self.p_l_cum, self.stderr_cum)
        }
    }
}

/// A noisy memory experiment with its decoding graph, reusable across seeds.
pub struct PreparedPoint {
    pub noisy: NoisyCircuit,
    pub graph: DecodingGraph,
    pub code_id: String,
    pub parameters: (usize, usize, usize),
    pub rounds: usize,
}

/// Builds and verifies the memory circuit, attaches noise and derives the DEM.
pub fn prepare_point(
    code: &StabilizerCode,
    code_id: &str,
    rounds: usize,
    basis: Basis,
    spec: NoiseSpec,
) -> Result<PreparedPoint> {
    let circuit = build_memory(code, rounds, basis)?;
    let report = verify_deterministic(&circuit);
    if !report.passed() {
        return Err(Error::Invariant(format!(
            "memory circuit for {code_id} is not deterministic: detectors {:?}, observables {:?}",
            report.failing_detectors, report.random_observables
        )));
    }
    let noisy = attach(circuit, spec)?;
    let graph = DecodingGraph::new(&build_dem(&noisy)?);
    Ok(PreparedPoint {
        noisy,
        graph,
        code_id: code_id.to_string(),
        parameters: code.parameters(),
        rounds,
    })
}

impl PreparedPoint {
    /// Samples and decodes `shots` shots.
    pub fn run(&self, shots: usize, seed: u64, settings: &DecoderSettings) -> Result<CurvePoint> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shots must be at least 1".into()));
        }
        let batch = sample(&self.noisy, shots, seed);
        let outcome = decode_batch(&self.graph, &batch, settings)?;
        let spec = self.noisy.spec();
        let (n, k, d) = self.parameters;
        let mut point = CurvePoint {
            code_id: self.code_id.clone(),
            n,
            k,
            d,
            rounds: self.rounds,
            p: spec.p,
            erasure_fraction: spec.erasure_fraction,
            erasure_kind: spec.erasure_kind,
            shots,
            failures: outcome.failures,
            p_l_cum: 0.0,
            p_l_round: 0.0,
            stderr_cum: 0.0,
            stderr_round: 0.0,
            max_iters: settings.max_iters,
            scaling: settings.scaling,
            osd_order: settings.osd_order.into(),
            use_heralds: settings.use_heralds,
            seed,
        };
        point.finish();
        Ok(point)
    }
}

/// End to end: memory circuit, noise, sampling, decoding, counting. Memory
/// is in the `Z` basis.
pub fn run_point(
    code: &StabilizerCode,
    code_id: &str,
    rounds: usize,
    spec: NoiseSpec,
    shots: usize,
    seed: u64,
    settings: &DecoderSettings,
) -> Result<CurvePoint> {
    settings.validate()?;
    prepare_point(code, code_id, rounds, Basis::Z, spec)?.run(shots, seed, settings)
}

/// Crossing of two curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub pair: (String, String),
    pub normalized: bool,
    /// `None` when the curves do not cross inside the shared range.
    pub p_th: Option<f64>,
    /// 16th and 84th percentiles of the bootstrap crossings.
    pub band: Option<(f64, f64)>,
    /// Fraction of bootstrap replicas that crossed.
    pub bootstrap_crossed: f64,
    pub method: String,
}

const THRESHOLD_METHOD: &str = "log-log interpolation, binomial bootstrap";

/// `(ln p, ln P)` knots of a curve, skipping zero-failure points.
fn knots(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut k: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|&(p, v)| (p.ln(), v.ln()))
        .collect();
    k.sort_by(|a, b| a.0.total_cmp(&b.0));
    k.dedup_by(|a, b| a.0 == b.0);
    k
}

fn interpolate(knots: &[(f64, f64)], x: f64) -> f64 {
    let i = knots.partition_point(|k| k.0 < x);
    if i == 0 {
        return knots[0].1;
    }
    if i == knots.len() {
        return knots[i - 1].1;
    }
    let (a, b) = (knots[i - 1], knots[i]);
    if b.0 == a.0 {
        return b.1;
    }
    a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
}

/// First point where the larger code's curve rises from below the smaller
/// code's to above it, on the union of both grids inside the shared range.
fn crossing(small: &[(f64, f64)], large: &[(f64, f64)]) -> Option<f64> {
    let (ks, kl) = (knots(small), knots(large));
    if ks.len() < 2 || kl.len() < 2 {
        return None;
    }
    let lo = ks[0].0.max(kl[0].0);
    let hi = ks[ks.len() - 1].0.min(kl[kl.len() - 1].0);
    if lo >= hi {
        return None;
    }
    let mut xs: Vec<f64> = ks
        .iter()
        .chain(&kl)
        .map(|k| k.0)
        .filter(|&x| x >= lo && x <= hi)
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let diff = |x: f64| interpolate(&kl, x) - interpolate(&ks, x);
    for w in xs.windows(2) {
        let (d0, d1) = (diff(w[0]), diff(w[1]));
        if d0 < 0.0 && d1 > 0.0 {
            let t = d0 / (d0 - d1);
            return Some((w[0] + t * (w[1] - w[0])).exp());
        }
        if d0 < 0.0 && d1 == 0.0 {
            return Some(w[1].exp());
        }
    }
    None
}

/// Threshold from the crossing of `small` (lower distance) and `large`.
///
/// Each curve is interpolated linearly in `(ln p, ln P)` over its points with
/// nonzero failures; the threshold is where the larger code stops
/// outperforming the smaller one. The band comes from `replicas` binomial
/// resamples of every point.
pub fn estimate_threshold(
    small: &[CurvePoint],
    large: &[CurvePoint],
    normalized: bool,
    replicas: usize,
    seed: u64,
) -> ThresholdEstimate {
    let curve = |c: &[CurvePoint], f: &dyn Fn(&CurvePoint) -> f64| -> Vec<(f64, f64)> {
        c.iter().map(|pt| (pt.p, f(pt))).collect()
    };
    let observed = |pt: &CurvePoint| pt.value(normalized).0;
    let p_th = crossing(&curve(small, &observed), &curve(large, &observed));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(replicas);
    for _ in 0..replicas {
        let mut resample = |c: &[CurvePoint]| -> Vec<(f64, f64)> {
            c.iter()
                .map(|pt| {
                    let f = Binomial::new(pt.shots as u64, pt.p_l_cum.clamp(0.0, 1.0))
                        .expect("valid binomial")
                        .sample(&mut rng);
                    let cum = f as f64 / pt.shots as f64;
                    let v = if normalized {
                        normalize_per_round(cum, pt.rounds)
                    } else {
                        cum
                    };
                    (pt.p, v)
                })
                .collect()
        };
        let (a, b) = (resample(small), resample(large));
        if let Some(x) = crossing(&a, &b) {
            draws.push(x);
        }
    }
    draws.sort_by(f64::total_cmp);
    let band = (!draws.is_empty()).then(|| {
        let q = |f: f64| draws[((draws.len() - 1) as f64 * f).round() as usize];
        (q(0.16), q(0.84))
    });
    let id = |c: &[CurvePoint]| c.first().map(|p| p.code_id.clone()).unwrap_or_default();
    ThresholdEstimate {
        pair: (id(small), id(large)),
        normalized,
        p_th,
        band,
        bootstrap_crossed: if replicas == 0 {
            0.0
        } else {
            draws.len() as f64 / replicas as f64
        },
        method: THRESHOLD_METHOD.into(),
    }
}

/// Fitted slope of `ln P` against `ln p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub alpha: f64,
    pub stderr: f64,
    pub points: usize,
}

/// Weighted least-squares slope of `ln P_L` versus `ln p` over points with
/// `p` in `[lo, hi]` and at least one failure. Weights are the inverse
/// variances of `ln P`, `(P/σ)²`.
pub fn scaling_exponent(points: &[CurvePoint], window: (f64, f64), normalized: bool) -> Result<ScalingFit> {
    let data: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|pt| pt.p >= window.0 && pt.p <= window.1 && pt.failures > 0)
        .map(|pt| {
            let (v, s) = pt.value(normalized);
            let w = if s > 0.0 { (v / s).powi(2) } else { 1.0 };
            (pt.p.ln(), v.ln(), w)
        })
        .collect();
    fit_slope(&data)
}

/// Weighted least-squares slope through `(x, y, weight)` triples.
pub fn fit_slope(data: &[(f64, f64, f64)]) -> Result<ScalingFit> {
    if data.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "insufficient data: {} usable points, need 3",
            data.len()
        )));
    }
    let sw: f64 = data.iter().map(|d| d.2).sum();
    let mx = data.iter().map(|d| d.2 * d.0).sum::<f64>() / sw;
    let my = data.iter().map(|d| d.2 * d.1).sum::<f64>() / sw;
    let sxx: f64 = data.iter().map(|d| d.2 * (d.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidParameter(
            "insufficient data: all points share one p".into(),
        ));
    }
    let sxy: f64 = data.iter().map(|d| d.2 * (d.0 - mx) * (d.1 - my)).sum();
    Ok(ScalingFit {
        alpha: sxy / sxx,
        stderr: (1.0 / sxx).sqrt(),
        points: data.len(),
    })
}

/// Groups points into curves by code id, each sorted by `p`.
pub fn curves(points: &[CurvePoint]) -> Vec<Vec<CurvePoint>> {
    let mut out: Vec<Vec<CurvePoint>> = Vec::new();
    for pt in points {
        match out.iter_mut().find(|c| c[0].code_id == pt.code_id) {
            Some(c) => c.push(pt.clone()),
            None => out.push(vec![pt.clone()]),
        }
    }
    for c in &mut out {
        c.sort_by(|a, b| a.p.total_cmp(&b.p));
    }
    out
}

/// Results file contents: schema version, config hash and points, plus the
/// producing tool's version and the resolved config text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub schema_version: u32,
    pub generator: String,
    pub config_hash: String,
    /// Resolved config, one `key = value` line per setting.
    pub config: String,
    pub points: Vec<CurvePoint>,
}

/// Version stamp written into every results file.
pub fn generator_stamp() -> String {
    format!("erasure-qldpc {}", env!("CARGO_PKG_VERSION"))
}

/// CSV columns after `schema_version` and `config_hash`, in field order.
pub const CURVE_POINT_COLUMNS: [&str; 19] = [
    "code_id",
    "n",
    "k",
    "d",
    "rounds",
    "p",
    "erasure_fraction",
    "erasure_kind",
    "shots",
    "failures",
    "p_l_cum",
    "p_l_round",
    "stderr_cum",
    "stderr_round",
    "max_iters",
    "scaling",
    "osd_order",
    "use_heralds",
    "seed",
];

impl ResultSet {
    pub fn new(config_hash: String, config: String, points: Vec<CurvePoint>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            generator: generator_stamp(),
            config_hash,
            config,
            points,
        }
    }

    /// `#` comment lines carrying the generator and config, then one row per
    /// point; columns are the [`CurvePoint`] fields preceded by
    /// `schema_version` and `config_hash`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# generator: {}", self.generator)?;
        for line in self.config.lines() {
            writeln!(w, "# {line}")?;
        }
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        let header = ["schema_version", "config_hash"].into_iter().chain(CURVE_POINT_COLUMNS);
        wr.write_record(header).map_err(csv_error)?;
        for p in &self.points {
            wr.serialize((self.schema_version, &self.config_hash, p))
                .map_err(csv_error)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(mut r: R) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let mut out = Self::new(String::new(), String::new(), Vec::new());
        out.generator.clear();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let body = line.trim_start_matches('#').trim_start();
            match body.strip_prefix("generator: ") {
                Some(g) => out.generator = g.to_string(),
                None => {
                    out.config.push_str(body);
                    out.config.push('\n');
                }
            }
        }
        let mut rd = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let names = csv::StringRecord::from(CURVE_POINT_COLUMNS.to_vec());
        for row in rd.records() {
            let row = row.map_err(csv_error)?;
            let version: u32 = row
                .get(0)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Parse("missing schema_version".into()))?;
            if version != SCHEMA_VERSION {
                return Err(Error::Parse(format!("unsupported schema version {version}")));
            }
            out.config_hash = row.get(1).unwrap_or_default().to_string();
            let rest: csv::StringRecord = row.iter().skip(2).collect();
            out.points.push(rest.deserialize(Some(&names)).map_err(csv_error)?);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}
