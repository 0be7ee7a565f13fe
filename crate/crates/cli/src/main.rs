//! `eqldpc`: build and inspect codes, run sweeps from config files, and
//! extract thresholds and scaling exponents from results.
//!
//! Exit codes: 0 success, 2 config or usage error, 3 runtime error,
//! 4 resource budget refused.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use erasure_qldpc::codes::{
    bivariate_bicycle, distance_bruteforce, lacross, parse_trinomial, surface_code, DistanceProvenance, StabilizerCode,
    STANDARD_A, STANDARD_B,
};
use erasure_qldpc::config::{ExperimentConfig, OutputFormat};
use erasure_qldpc::harness::{curves, estimate_threshold, scaling_exponent, CurvePoint, ResultSet};
use erasure_qldpc::Error;

#[derive(Parser)]
#[command(name = "eqldpc", version, about = "Erasure-aware quantum LDPC memory simulations")]
struct Cli {
    /// Worker threads for sampling and decoding (default: all cores).
    #[arg(long, global = true, env = "EQLDPC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect or export a code.
    #[command(subcommand)]
    Code(CodeCommand),
    /// Run the sweep described by a config file.
    Run {
        config: PathBuf,
        /// Validate and print the plan without running it.
        #[arg(long)]
        dry_run: bool,
        /// Override `output.path`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Threshold from the crossing of two curves in a results file.
    Threshold {
        results: PathBuf,
        /// Code ids of the pair, smaller code first (default: the two largest codes).
        #[arg(long, value_delimiter = ',')]
        pair: Option<Vec<String>>,
        #[arg(long, default_value_t = 200)]
        replicas: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fitted exponent of `P_L ∝ p^α` for one curve.
    Scaling {
        results: PathBuf,
        /// Code id (default: the only curve in the file).
        #[arg(long)]
        code: Option<String>,
        #[arg(long)]
        p_min: f64,
        #[arg(long)]
        p_max: f64,
        /// Fit the cumulative rather than the per-round error.
        #[arg(long)]
        unnormalized: bool,
    },
}

#[derive(Subcommand)]
enum CodeCommand {
    /// Print parameters, distance provenance, stabilizer counts and sector sizes.
    Info {
        #[command(flatten)]
        family: FamilyArgs,
        /// Largest weight the distance search tries.
        #[arg(long, default_value_t = 6)]
        w_max: usize,
        /// Maximum number of candidate operators the distance search may visit.
        #[arg(long, default_value_t = 200_000_000)]
        budget: u64,
    },
    /// Write the stabilizers and logicals in the plain-text code format.
    Export {
        #[command(flatten)]
        family: FamilyArgs,
        /// Output file (default: stdout).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyKind {
    Lacross,
    Surface,
    Bb,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: FamilyKind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Trinomial `A`, e.g. "x^3 + y + y^2".
    #[arg(long)]
    a: Option<String>,
    /// Trinomial `B`.
    #[arg(long)]
    b: Option<String>,
    /// Apply the Clifford deformation.
    #[arg(long)]
    deform: bool,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(error: anyhow::Error) -> Self {
        Self { code: 2, error }
    }
}

/// Config and parse problems are the user's to fix (2), refused budgets get
/// their own code (4), anything else is a runtime failure (3).
impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(Error::Config { .. } | Error::Parse(_) | Error::InvalidParameter(_)) => 2,
            Some(Error::Budget(_)) => 4,
            _ => 3,
        };
        Self { code, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::from(3);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Code(CodeCommand::Info { family, w_max, budget }) => code_info(&family, w_max, budget),
        Command::Code(CodeCommand::Export { family, output }) => {
            let text = build_code(&family)?.describe().to_text();
            match output {
                Some(path) => write_atomic(&path, text.as_bytes())?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Run {
            config,
            dry_run,
            output,
        } => cmd_run(&config, dry_run, output),
        Command::Threshold {
            results,
            pair,
            replicas,
            seed,
        } => cmd_threshold(&results, pair, replicas, seed),
        Command::Scaling {
            results,
            code,
            p_min,
            p_max,
            unnormalized,
        } => cmd_scaling(&results, code, (p_min, p_max), !unnormalized),
    }
}

fn need(v: Option<usize>, flag: &str) -> Result<usize, Failure> {
    v.ok_or_else(|| Failure::usage(anyhow!("--{flag} is required for this family")))
}

fn build_code(f: &FamilyArgs) -> Result<StabilizerCode, Failure> {
    let code = match f.family {
        FamilyKind::Lacross => lacross(need(f.n, "n")?, need(f.k, "k")?, f.deform)?,
        FamilyKind::Surface => surface_code(need(f.d, "d")?, f.deform)?,
        FamilyKind::Bb => {
            let a = f.a.as_deref().map(parse_trinomial).transpose()?.unwrap_or(STANDARD_A);
            let b = f.b.as_deref().map(parse_trinomial).transpose()?.unwrap_or(STANDARD_B);
            let code = bivariate_bicycle(need(f.l, "l")?, need(f.m, "m")?, a, b)?;
            if f.deform {
                erasure_qldpc::codes::clifford_deform(&code)?
            } else {
                code
            }
        }
    };
    Ok(code)
}

fn code_info(f: &FamilyArgs, w_max: usize, budget: u64) -> Result<(), Failure> {
    let code = build_code(f)?;
    let declared = code.distance();
    let (d, provenance) = match declared.provenance {
        DistanceProvenance::PaperAsserted => (declared.value.to_string(), declared.provenance.to_string()),
        _ => match distance_bruteforce(&code, w_max, budget)? {
            Some(d) => (d.to_string(), DistanceProvenance::BruteForced.to_string()),
            None => (format!(">{w_max}"), "lower bound from search".to_string()),
        },
    };
    println!("[[{},{},{}]] (distance: {provenance})", code.n(), code.k(), d);
    println!("stabilizers: {}", code.num_stabilizers());
    if let Some((x, z)) = code.css_check_counts() {
        println!("x-type checks: {x}, z-type checks: {z}");
    }
    let (s1, s2) = code.sector_sizes();
    println!("sectors: {s1} + {s2}");
    println!("max stabilizer weight: {}", code.max_stabilizer_weight());
    println!("deformed: {}", code.is_deformed());
    Ok(())
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))
        .map_err(Failure::usage)?;
    let cfg = ExperimentConfig::parse(&text)
        .map_err(|e| Failure::from(anyhow::Error::from(e).context(format!("config {}", path.display()))))?;
    Ok(cfg)
}

fn cmd_run(path: &Path, dry_run: bool, output: Option<PathBuf>) -> Result<(), Failure> {
    let mut cfg = load_config(path)?;
    if let Some(o) = output {
        cfg.output.path = o.display().to_string();
    }
    let codes = cfg.codes()?;
    let plan = cfg.plan()?;
    if dry_run {
        println!("config {} (hash {})", path.display(), cfg.hash());
        for c in &codes {
            let (n, k, d) = c.code.parameters();
            println!("code {}: [[{n},{k},{d}]]", c.id);
        }
        println!(
            "{:<28} {:>6} {:>10} {:>10} {:>20}",
            "code", "rounds", "p", "shots", "seed"
        );
        for pp in &plan {
            println!(
                "{:<28} {:>6} {:>10} {:>10} {:>20}",
                pp.code_id, pp.rounds, pp.spec.p, cfg.run.shots, pp.seed
            );
        }
        println!(
            "{} points, output {} ({:?}); nothing run",
            plan.len(),
            cfg.output.path,
            cfg.output.format
        );
        return Ok(());
    }
    println!(
        "{:<28} {:>6} {:>10} {:>10} {:>9} {:>12} {:>12} {:>12}",
        "code", "rounds", "p", "shots", "failures", "p_L_cum", "P_L_round", "stderr"
    );
    let results = cfg.run(|pt| {
        println!(
            "{:<28} {:>6} {:>10} {:>10} {:>9} {:>12.4e} {:>12.4e} {:>12.2e}",
            pt.code_id, pt.rounds, pt.p, pt.shots, pt.failures, pt.p_l_cum, pt.p_l_round, pt.stderr_round
        );
    })?;
    let bytes = match cfg.output.format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            results.write_csv(&mut buf)?;
            buf
        }
        OutputFormat::Json => results.to_json().into_bytes(),
    };
    write_atomic(Path::new(&cfg.output.path), &bytes)?;
    println!("wrote {} points to {}", results.points.len(), cfg.output.path);
    Ok(())
}

/// Writes to a sibling temporary file and renames it over `path`.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let name = path
        .file_name()
        .ok_or_else(|| Failure::usage(anyhow!("output path {} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Failure {
            code: 3,
            error: anyhow::Error::from(e).context(format!("writing {}", path.display())),
        }
    })
}

fn load_results(path: &Path) -> Result<ResultSet, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading results {}", path.display()))
        .map_err(Failure::usage)?;
    let rs = if text.trim_start().starts_with('{') {
        ResultSet::from_json(&text)?
    } else {
        ResultSet::read_csv(text.as_bytes())?
    };
    Ok(rs)
}

fn size_key(c: &[CurvePoint]) -> (usize, usize) {
    (c[0].d, c[0].n)
}

fn cmd_threshold(path: &Path, pair: Option<Vec<String>>, replicas: usize, seed: u64) -> Result<(), Failure> {
    let rs = load_results(path)?;
    let mut all = curves(&rs.points);
    if all.len() < 2 {
        return Err(Failure::usage(anyhow!(
            "threshold needs at least two curves, {} has {}",
            path.display(),
            all.len()
        )));
    }
    let (small, large) = match pair {
        Some(ids) if ids.len() != 2 => {
            return Err(Failure::usage(anyhow!("--pair takes two code ids, got {}", ids.len())))
        }
        Some(ids) => {
            let find = |id: &str| {
                all.iter()
                    .find(|c| c[0].code_id == id)
                    .cloned()
                    .ok_or_else(|| Failure::usage(anyhow!("no curve named {id:?} in {}", path.display())))
            };
            (find(&ids[0])?, find(&ids[1])?)
        }
        None => {
            all.sort_by_key(|c| size_key(c));
            let large = all.pop().expect("two curves");
            (all.pop().expect("two curves"), large)
        }
    };
    println!("pair: {} vs {}", small[0].code_id, large[0].code_id);
    for normalized in [true, false] {
        let est = estimate_threshold(&small, &large, normalized, replicas, seed);
        let label = if normalized {
            "per-round normalized"
        } else {
            "unnormalized"
        };
        match (est.p_th, est.band) {
            (Some(p), Some((lo, hi))) => println!(
                "{label}: p_th = {:.3}% (band {:.3}% to {:.3}%, {:.0}% of resamples cross)",
                100.0 * p,
                100.0 * lo,
                100.0 * hi,
                100.0 * est.bootstrap_crossed
            ),
            (Some(p), None) => println!("{label}: p_th = {:.3}% (no resample crossed)", 100.0 * p),
            (None, _) => println!("{label}: no crossing in range"),
        }
    }
    Ok(())
}

fn cmd_scaling(path: &Path, code: Option<String>, window: (f64, f64), normalized: bool) -> Result<(), Failure> {
    let rs = load_results(path)?;
    let all = curves(&rs.points);
    let curve = match code {
        Some(id) => all
            .into_iter()
            .find(|c| c[0].code_id == id)
            .ok_or_else(|| Failure::usage(anyhow!("no curve named {id:?} in {}", path.display())))?,
        None if all.len() == 1 => all.into_iter().next().expect("one curve"),
        None => {
            return Err(Failure::usage(anyhow!(
                "{} has {} curves; pick one with --code",
                path.display(),
                all.len()
            )))
        }
    };
    let fit = scaling_exponent(&curve, window, normalized).map_err(|e| Failure {
        code: 3,
        error: e.into(),
    })?;
    println!(
        "{}: alpha = {:.3} ± {:.3} from {} points in [{}, {}]",
        curve[0].code_id, fit.alpha, fit.stderr, fit.points, window.0, window.1
    );
    Ok(())
}
