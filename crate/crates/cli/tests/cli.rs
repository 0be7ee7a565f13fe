use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn eqldpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eqldpc"))
        .args(args)
        .env("EQLDPC_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let out = dir.join("results.csv");
    let text = format!(
        "{body}output.path = {:?}\noutput.format = \"csv\"\n",
        out.display().to_string()
    );
    let path = dir.join("sweep.toml");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

const SURFACE: &str = r#"
code.family = "surface"
code.d = [3, 5]
noise.p_grid = [0.0, 0.03, 0.07]
noise.erasure_fraction = 1.0
run.shots = 300
run.seed = 5
"#;

#[test]
fn code_info_reports() {
    let o = eqldpc(&[
        "code", "info", "--family", "lacross", "--n", "5", "--k", "2", "--deform",
    ]);
    assert!(o.status.success());
    assert!(
        stdout(&o).starts_with("[[34,4,3]] (distance: brute-forced)"),
        "{}",
        stdout(&o)
    );

    let o = eqldpc(&[
        "code",
        "info",
        "--family",
        "bb",
        "--l",
        "12",
        "--m",
        "6",
        "--a",
        "x^3+y+y^2",
        "--b",
        "y^3+x+x^2",
    ]);
    assert!(stdout(&o).starts_with("[[144,12,12]] (distance: paper-asserted)"));

    let o = eqldpc(&["code", "info", "--family", "surface", "--d", "3"]);
    assert!(stdout(&o).starts_with("[[13,1,3]]"));
}

#[test]
fn exit_codes() {
    assert_eq!(eqldpc(&["code", "info", "--family", "surface"]).status.code(), Some(2));
    assert_eq!(
        eqldpc(&["code", "info", "--family", "surface", "--d", "1"])
            .status
            .code(),
        Some(2)
    );
    let o = eqldpc(&[
        "code", "info", "--family", "lacross", "--n", "12", "--k", "4", "--budget", "100",
    ]);
    assert_eq!(o.status.code(), Some(4));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SURFACE.replace("run.shots = 300", "run.shots = 0"));
    let o = eqldpc(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.shots"));
    assert_eq!(eqldpc(&["run", "/nonexistent/config.toml"]).status.code(), Some(2));
}

#[test]
fn export_round_trips_through_the_text_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("code.txt");
    let o = eqldpc(&[
        "code",
        "export",
        "--family",
        "lacross",
        "--n",
        "5",
        "--k",
        "2",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(out).unwrap();
    let desc = erasure_qldpc::codes::CodeDescription::from_text(&text).unwrap();
    assert_eq!((desc.n, desc.k, desc.d), (34, 4, 3));
}

#[test]
fn dry_run_plans_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SURFACE);
    let o = eqldpc(&["run", &cfg, "--dry-run"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("6 points"), "{text}");
    assert!(!dir.path().join("results.csv").exists());
}

#[test]
fn run_is_reproducible_and_feeds_threshold_and_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SURFACE);
    let results = dir.path().join("results.csv");
    assert!(eqldpc(&["run", &cfg]).status.success());
    let first = fs::read(&results).unwrap();
    assert!(eqldpc(&["run", &cfg]).status.success());
    assert_eq!(fs::read(&results).unwrap(), first);

    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("# generator: erasure-qldpc "));
    assert!(text.contains("# run.shots = 300"));
    let rs = erasure_qldpc::harness::ResultSet::read_csv(text.as_bytes()).unwrap();
    assert_eq!(rs.points.len(), 6);
    assert_eq!(rs.points[0].failures, 0);

    let o = eqldpc(&["threshold", results.to_str().unwrap(), "--replicas", "20"]);
    assert!(o.status.success());
    let report = stdout(&o);
    assert!(report.contains("pair: surface-d3 vs surface-d5"), "{report}");
    assert!(
        report.contains("per-round normalized:") && report.contains("unnormalized:"),
        "{report}"
    );

    // Two nonzero points is too few for a fit.
    let o = eqldpc(&[
        "scaling",
        results.to_str().unwrap(),
        "--code",
        "surface-d3",
        "--p-min",
        "0.01",
        "--p-max",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

fn synthetic_results(dir: &Path, ids: &[(&str, i32)]) -> String {
    let mut points = Vec::new();
    for &(id, d) in ids {
        for p in [0.02, 0.03, 0.04, 0.06, 0.08] {
            let shots = 1_000_000usize;
            let failures = ((p / 0.05f64).powi(d) * 0.01 * shots as f64).round() as usize;
            let mut pt = erasure_qldpc::harness::CurvePoint {
                code_id: id.into(),
                n: 0,
                k: 1,
                d: d as usize,
                rounds: 1,
                p,
                erasure_fraction: 1.0,
                erasure_kind: erasure_qldpc::noise::ErasureKind::Unbiased,
                shots,
                failures,
                p_l_cum: 0.0,
                p_l_round: 0.0,
                stderr_cum: 0.0,
                stderr_round: 0.0,
                max_iters: 10,
                scaling: 0.625,
                osd_order: 1,
                use_heralds: true,
                seed: 0,
            };
            pt.finish();
            points.push(pt);
        }
    }
    let rs = erasure_qldpc::harness::ResultSet::new("synthetic".into(), String::new(), points);
    let path = dir.join("synthetic.json");
    fs::write(&path, rs.to_json()).unwrap();
    path.display().to_string()
}

#[test]
fn threshold_on_analytic_curves() {
    let dir = tempfile::tempdir().unwrap();
    let path = synthetic_results(dir.path(), &[("a", 3), ("b", 5)]);
    let o = eqldpc(&["threshold", &path, "--pair", "a,b", "--replicas", "10"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("p_th = 5.000%"), "{}", stdout(&o));

    // Identical curves never cross; reported as data.
    let path = synthetic_results(dir.path(), &[("a", 3), ("b", 3)]);
    let o = eqldpc(&["threshold", &path]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("no crossing in range"));

    let path = synthetic_results(dir.path(), &[("a", 3)]);
    assert_eq!(eqldpc(&["threshold", &path]).status.code(), Some(2));

    let o = eqldpc(&["scaling", &path, "--p-min", "0.01", "--p-max", "0.1", "--unnormalized"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("alpha = 3.000"), "{}", stdout(&o));
}
