use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cqe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqe"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("cqe runs")
}

fn summary_value(dir: &Path, key: &str) -> String {
    let text = fs::read_to_string(dir.join("out/summary.toml")).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing from summary:\n{text}"))
        .trim_matches('"')
        .to_string()
}

#[test]
fn solve_in_m0_region_matches_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = cqe(dir.path(), &["solve", "--g-c", "0.5"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let err: f64 = summary_value(dir.path(), "abs_err").parse().unwrap();
    assert!(err <= 1e-6, "abs_err = {err}");
    let trace = fs::read_to_string(dir.path().join("out/trace.csv")).unwrap();
    assert!(trace.starts_with("n,energy,"));
}

#[test]
fn single_site_uncoupled_converges_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = cqe(dir.path(), &["solve", "--n-sites", "1", "--g-c", "0"]);
    assert!(out.status.success());
    let e: f64 = summary_value(dir.path(), "e_cqe").parse().unwrap();
    let iters: usize = summary_value(dir.path(), "iterations").parse().unwrap();
    assert!(e.abs() <= 1e-6, "E = {e}");
    assert!(iters <= 20, "{iters} iterations");
    assert!(summary_value(dir.path(), "verdict").starts_with("converged"));
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = cqe(dir.path(), &["solve", "--n-max", "0", "--g-c", "0.3"]);
    assert_eq!(out.status.code(), Some(1));

    fs::write(dir.path().join("bad.toml"), "[model]\nnsites = 3\n").unwrap();
    let out = cqe(dir.path(), &["solve", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(1));

    fs::write(dir.path().join("bad.toml"), "[backend]\nmode = \"noisy\"\n").unwrap();
    let out = cqe(dir.path(), &["sweep", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(1));

    let out = cqe(dir.path(), &["sweep", "--points", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn single_site_crossing_at_resonance() {
    let dir = tempfile::tempdir().unwrap();
    let out = cqe(
        dir.path(),
        &[
            "crossings",
            "--n-sites",
            "1",
            "--g-lo",
            "0.5",
            "--g-hi",
            "1.5",
        ],
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("out/crossings.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(csv.lines().next(), Some("g_star,sector_below,sector_above"));
    assert_eq!(rows.len(), 1, "{csv}");
    let fields: Vec<&str> = rows[0].split(',').collect();
    let g: f64 = fields[0].parse().unwrap();
    assert!((g - 1.0).abs() <= 1e-6, "g* = {g}");
    assert_eq!(&fields[1..], ["0", "1"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("g* = 1.000000"));
}

#[test]
fn empty_bracket_reports_no_crossings() {
    let dir = tempfile::tempdir().unwrap();
    let out = cqe(dir.path(), &["crossings", "--g-lo", "0", "--g-hi", "0.3"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("no crossings"));
    let csv = fs::read_to_string(dir.path().join("out/crossings.csv")).unwrap();
    assert_eq!(csv.trim_end(), "g_star,sector_below,sector_above");
}

#[test]
fn sampled_sweep_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--n-sites",
        "1",
        "--backend",
        "sampled",
        "--shots",
        "1000",
        "--seed",
        "7",
        "--points",
        "3",
        "--max-iters",
        "30",
    ];
    let first = cqe(dir.path(), &args);
    assert!(
        first.status.success(),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let a = fs::read(dir.path().join("out/sweep.csv")).unwrap();
    let second = cqe(dir.path(), &args);
    assert!(second.status.success());
    let b = fs::read(dir.path().join("out/sweep.csv")).unwrap();
    assert_eq!(a, b);

    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("g_c,E_exact,E_cqe,abs_err,pop_exact,pop_cqe,sector_M,iters,verdict,seed")
    );
    assert_eq!(lines.count(), 3);

    let other = cqe(
        dir.path(),
        &[&args[..8], &["8", "--points", "3", "--max-iters", "30"]].concat(),
    );
    assert!(other.status.success());
    assert_ne!(fs::read(dir.path().join("out/sweep.csv")).unwrap(), b);
}

#[test]
fn golden_bless_then_match() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "truncation-check",
        "--n-sites",
        "1",
        "--g-c",
        "0.7",
        "--levels",
        "2,3,4",
    ];
    let out = cqe(dir.path(), &[&args[..], &["--bless"]].concat());
    assert!(out.status.success());
    let golden = dir
        .path()
        .join("goldens/truncation_n1_wb2_wf0.5_nmax4_g0.7_levels2-3-4.csv");
    assert!(golden.exists());

    let out = cqe(dir.path(), &args);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("golden matched"));

    // perturb one energy beyond the tolerance
    let text = fs::read_to_string(&golden).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    let mut fields: Vec<String> = lines[1].split(',').map(str::to_owned).collect();
    let e: f64 = fields[2].parse().unwrap();
    fields[2] = format!("{:.16e}", e + 1e-3);
    lines[1] = fields.join(",");
    fs::write(&golden, lines.join("\n") + "\n").unwrap();
    let out = cqe(dir.path(), &args);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn truncation_check_is_flat_for_single_site() {
    let dir = tempfile::tempdir().unwrap();
    let out = cqe(
        dir.path(),
        &[
            "truncation-check",
            "--n-sites",
            "1",
            "--g-c",
            "0.7",
            "--levels",
            "1,2,3",
        ],
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("out/truncation.csv")).unwrap();
    // the first row has no predecessor and reports NaN
    for row in csv.lines().skip(2) {
        let delta: f64 = row.split(',').next_back().unwrap().parse().unwrap();
        assert!(delta.abs() <= 1e-12, "{row}");
    }
}

#[test]
fn solves_hamiltonian_from_term_file() {
    let dir = tempfile::tempdir().unwrap();
    let terms = "\
# two fermionic modes, one boson mode
0.5 0 | create_f: 0 | annih_f: 0 | create_b: | annih_b:
1.0 0 | create_f: 1 | annih_f: 1 | create_b: | annih_b:
1.5 0 | create_f: | annih_f: | create_b: 0 | annih_b: 0
0.3 0 | create_f: 1 | annih_f: 0 | create_b: | annih_b: 0
0.3 0 | create_f: 0 | annih_f: 1 | create_b: 0 | annih_b:
0.2 0 | create_f: 1 | annih_f: 0 | create_b: | annih_b:
0.2 0 | create_f: 0 | annih_f: 1 | create_b: | annih_b:
";
    fs::write(dir.path().join("h.txt"), terms).unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "[model]\nhamiltonian_file = \"h.txt\"\nfermion_modes = 2\nn_max = 3\nfilter = \"particles:1\"\n",
    )
    .unwrap();
    let out = cqe(dir.path(), &["solve", "--config", "run.toml"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let e_cqe: f64 = summary_value(dir.path(), "e_cqe").parse().unwrap();
    let e_exact: f64 = summary_value(dir.path(), "e_exact").parse().unwrap();
    let err: f64 = summary_value(dir.path(), "abs_err").parse().unwrap();
    assert_eq!(err, (e_cqe - e_exact).abs());
    assert!(e_cqe >= e_exact - 1e-12);
    // the hopping ground state converges algebraically; 500 iterations land near 3e-6
    assert!(err <= 1e-5, "abs_err = {err}");

    fs::write(dir.path().join("h.txt"), "1.0 0 | create_f: 0\n").unwrap();
    let out = cqe(dir.path(), &["solve", "--config", "run.toml"]);
    assert_eq!(out.status.code(), Some(1));
}
