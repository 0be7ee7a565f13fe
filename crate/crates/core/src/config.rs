//! Experiment configs: flat `section.key = value` text, validated up front
//! and expanded into a deterministic plan of points.
//!
//! ```
//! use erasure_qldpc::config::ExperimentConfig;
//!
//! let cfg = ExperimentConfig::parse(
//!     r#"
//! code.family = "surface"
//! code.d = [3, 5]
//! noise.p_grid = [0.01, 0.02]
//! noise.erasure_fraction = 1.0
//! run.shots = 100
//! "#,
//! )
//! .unwrap();
//! assert_eq!(cfg.decoder.s, Some(0.625));
//! assert_eq!(cfg.plan().unwrap().len(), 4);
//! assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::Basis;
use crate::codes::{bivariate_bicycle, clifford_deform, lacross, parse_trinomial, surface_code, StabilizerCode};
use crate::decoder::{DecoderSettings, OsdOrder};
use crate::error::{Error, Result};
use crate::harness::{prepare_point, CurvePoint, ResultSet};
use crate::noise::{ErasureKind, NoiseSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Lacross,
    Surface,
    Bb,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundsPolicy {
    /// As many rounds as the code distance.
    Distance,
    /// `rounds.count` rounds for every code.
    Fixed,
}

/// Which codes to build. Only the keys of the chosen family may be set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSection {
    pub family: Family,
    /// La-cross seed lengths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    /// La-cross polynomial degree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Surface-code distances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<usize>>,
    /// Bivariate Bicycle `(ℓ, m)` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lm: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(default)]
    pub deformed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundsSection {
    pub policy: RoundsPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

impl Default for RoundsSection {
    fn default() -> Self {
        Self {
            policy: RoundsPolicy::Distance,
            count: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub p_grid: Vec<f64>,
    pub erasure_fraction: f64,
    #[serde(default = "default_kind")]
    pub erasure_kind: ErasureKind,
}

fn default_kind() -> ErasureKind {
    ErasureKind::Unbiased
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub shots: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderSection {
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    /// Min-sum scaling; resolved from the erasure kind when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default = "default_order")]
    pub osd_order: u8,
    #[serde(default = "yes")]
    pub use_heralds: bool,
}

fn default_iters() -> usize {
    10
}

fn default_order() -> u8 {
    1
}

fn yes() -> bool {
    true
}

impl Default for DecoderSection {
    fn default() -> Self {
        Self {
            max_iters: 10,
            s: None,
            osd_order: 1,
            use_heralds: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: String,
    pub format: OutputFormat,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            path: "results.csv".into(),
            format: OutputFormat::Csv,
        }
    }
}

/// A sweep over codes and physical error rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub code: CodeSection,
    #[serde(default)]
    pub rounds: RoundsSection,
    pub noise: NoiseSection,
    pub run: RunSection,
    #[serde(default)]
    pub decoder: DecoderSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// One point of a sweep.
#[derive(Clone, Debug)]
pub struct PlannedPoint {
    pub code_index: usize,
    pub code_id: String,
    pub rounds: usize,
    pub spec: NoiseSpec,
    pub seed: u64,
}

/// A code built from the config.
#[derive(Clone, Debug)]
pub struct PlannedCode {
    pub id: String,
    pub code: StabilizerCode,
}

fn bad(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// Parses, validates and fills defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            Error::Parse(match e.span() {
                Some(span) => format!("{msg} (at byte {})", span.start),
                None => msg,
            })
        })?;
        cfg.resolve()?;
        Ok(cfg)
    }

    /// Validates every setting and fills the scaling default.
    pub fn resolve(&mut self) -> Result<()> {
        let c = &self.code;
        let allowed: &[&str] = match c.family {
            Family::Lacross => &["n", "k"],
            Family::Surface => &["d"],
            Family::Bb => &["lm", "a", "b"],
        };
        let present = [
            ("n", c.n.is_some()),
            ("k", c.k.is_some()),
            ("d", c.d.is_some()),
            ("lm", c.lm.is_some()),
            ("a", c.a.is_some()),
            ("b", c.b.is_some()),
        ];
        for (key, set) in present {
            if set && !allowed.contains(&key) {
                return Err(bad(
                    &format!("code.{key}"),
                    format!("not used by family {:?}", c.family),
                ));
            }
        }
        let nonempty = |key: &str, v: &Option<Vec<usize>>| -> Result<()> {
            match v {
                Some(v) if !v.is_empty() => Ok(()),
                _ => Err(bad(key, "needs at least one value")),
            }
        };
        match c.family {
            Family::Lacross => {
                nonempty("code.n", &c.n)?;
                let k = c.k.ok_or_else(|| bad("code.k", "required for lacross"))?;
                if k == 0 {
                    return Err(bad("code.k", "must be at least 1"));
                }
            }
            Family::Surface => nonempty("code.d", &c.d)?,
            Family::Bb => {
                if c.lm.as_ref().is_none_or(|v| v.is_empty()) {
                    return Err(bad("code.lm", "needs at least one [l, m] pair"));
                }
                for key in ["a", "b"] {
                    let v = if key == "a" { &c.a } else { &c.b };
                    if let Some(t) = v {
                        parse_trinomial(t).map_err(|e| bad(&format!("code.{key}"), e.to_string()))?;
                    }
                }
            }
        }
        match (self.rounds.policy, self.rounds.count) {
            (RoundsPolicy::Fixed, None) => return Err(bad("rounds.count", "required when rounds.policy = \"fixed\"")),
            (RoundsPolicy::Fixed, Some(0)) => return Err(bad("rounds.count", "must be at least 1")),
            (RoundsPolicy::Distance, Some(_)) => {
                return Err(bad("rounds.count", "only used when rounds.policy = \"fixed\""))
            }
            _ => {}
        }
        let n = &self.noise;
        if n.p_grid.is_empty() {
            return Err(bad("noise.p_grid", "needs at least one value"));
        }
        for &p in &n.p_grid {
            if !(0.0..=1.0).contains(&p) {
                return Err(bad("noise.p_grid", format!("{p} outside [0, 1]")));
            }
        }
        if !(0.0..=1.0).contains(&n.erasure_fraction) {
            return Err(bad(
                "noise.erasure_fraction",
                format!("{} outside [0, 1]", n.erasure_fraction),
            ));
        }
        if self.run.shots == 0 {
            return Err(bad("run.shots", "must be at least 1"));
        }
        // TOML integers are signed 64-bit.
        if i64::try_from(self.run.seed).is_err() {
            return Err(bad("run.seed", "must fit in a signed 64-bit integer"));
        }
        let d = &mut self.decoder;
        if d.max_iters == 0 {
            return Err(bad("decoder.max_iters", "must be at least 1"));
        }
        let s = *d.s.get_or_insert(n.erasure_kind.default_scaling());
        if !(s > 0.0 && s <= 1.0) {
            return Err(bad("decoder.s", format!("{s} outside (0, 1]")));
        }
        OsdOrder::try_from(d.osd_order).map_err(|m| bad("decoder.osd_order", m))?;
        if self.output.path.is_empty() {
            return Err(bad("output.path", "must not be empty"));
        }
        Ok(())
    }

    /// Flat `section.key = value` lines in a fixed order; parsing the result
    /// gives back the same config.
    pub fn to_text(&self) -> String {
        let value = toml::Value::try_from(self).expect("config serializes");
        let mut out = String::new();
        for section in ["code", "rounds", "noise", "run", "decoder", "output"] {
            let Some(toml::Value::Table(t)) = value.get(section) else {
                continue;
            };
            let sorted: BTreeMap<_, _> = t.iter().collect();
            for (k, v) in sorted {
                writeln!(out, "{section}.{k} = {v}").expect("write to string");
            }
        }
        out
    }

    /// Hex SHA-256 prefix of [`to_text`](Self::to_text).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn settings(&self) -> DecoderSettings {
        DecoderSettings {
            max_iters: self.decoder.max_iters,
            scaling: self.decoder.s.unwrap_or(self.noise.erasure_kind.default_scaling()),
            osd_order: OsdOrder::try_from(self.decoder.osd_order).unwrap_or(OsdOrder::One),
            use_heralds: self.decoder.use_heralds,
        }
    }

    /// Builds every code of the sweep.
    pub fn codes(&self) -> Result<Vec<PlannedCode>> {
        let c = &self.code;
        let suffix = if c.deformed { "-deformed" } else { "" };
        let mut out = Vec::new();
        match c.family {
            Family::Lacross => {
                let k = c.k.unwrap_or_default();
                for &n in c.n.iter().flatten() {
                    let code = lacross(n, k, c.deformed).map_err(|e| bad("code.n", e.to_string()))?;
                    out.push(PlannedCode {
                        id: format!("lacross-n{n}-k{k}{suffix}"),
                        code,
                    });
                }
            }
            Family::Surface => {
                for &d in c.d.iter().flatten() {
                    let code = surface_code(d, c.deformed).map_err(|e| bad("code.d", e.to_string()))?;
                    out.push(PlannedCode {
                        id: format!("surface-d{d}{suffix}"),
                        code,
                    });
                }
            }
            Family::Bb => {
                let poly = |key: &str, v: &Option<String>, default| match v {
                    Some(t) => parse_trinomial(t).map_err(|e| bad(key, e.to_string())),
                    None => Ok(default),
                };
                let a = poly("code.a", &c.a, crate::codes::STANDARD_A)?;
                let b = poly("code.b", &c.b, crate::codes::STANDARD_B)?;
                for &[l, m] in c.lm.iter().flatten() {
                    let mut code = bivariate_bicycle(l, m, a, b).map_err(|e| bad("code.lm", e.to_string()))?;
                    if c.deformed {
                        code = clifford_deform(&code).map_err(|e| bad("code.deformed", e.to_string()))?;
                    }
                    out.push(PlannedCode {
                        id: format!("bb-{l}x{m}{suffix}"),
                        code,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Points in execution order, codes outermost. Point `i` uses seed
    /// `run.seed + i`.
    pub fn plan(&self) -> Result<Vec<PlannedPoint>> {
        let codes = self.codes()?;
        let mut out = Vec::new();
        for (ci, pc) in codes.iter().enumerate() {
            let rounds = match self.rounds.policy {
                RoundsPolicy::Distance => pc.code.distance().value,
                RoundsPolicy::Fixed => self.rounds.count.unwrap_or(1),
            };
            for &p in &self.noise.p_grid {
                let spec = NoiseSpec::new(p, self.noise.erasure_fraction, self.noise.erasure_kind)
                    .map_err(|e| bad("noise.p_grid", e.to_string()))?;
                out.push(PlannedPoint {
                    code_index: ci,
                    code_id: pc.id.clone(),
                    rounds,
                    spec,
                    seed: self.run.seed.wrapping_add(out.len() as u64),
                });
            }
        }
        Ok(out)
    }

    /// Runs the whole sweep. `progress` sees each finished point.
    pub fn run(&self, mut progress: impl FnMut(&CurvePoint)) -> Result<ResultSet> {
        let codes = self.codes()?;
        let settings = self.settings();
        settings.validate()?;
        let mut points = Vec::new();
        for pp in self.plan()? {
            let code = &codes[pp.code_index].code;
            let prepared = prepare_point(code, &pp.code_id, pp.rounds, Basis::Z, pp.spec)?;
            let point = prepared.run(self.run.shots, pp.seed, &settings)?;
            progress(&point);
            points.push(point);
        }
        Ok(ResultSet::new(self.hash(), self.to_text(), points))
    }
}
