use std::fs;
use std::path::{Path, PathBuf};

use cqe_core::exact::diagonalize;
use cqe_core::experiment::{
    calibrate_shots, calibration_csv, crossings, crossings_csv, solve_tc, summarize, sweep_csv,
    sweep_rows, trace_document, truncation_check, truncation_csv, RowStatus,
};
use cqe_core::hamiltonian::parse_terms;
use cqe_core::{solve, FockBasis, Hamiltonian, OccupationFilter};
use serde::Serialize;

use crate::config::RunConfig;
use crate::golden::{self, GoldenOutcome};
use crate::{BackendArg, CliError, Command, Common, Range};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Solve {
            common,
            g_c,
            hamiltonian,
            fermion_modes,
        } => {
            let mut cfg = load(&common)?;
            if let Some(g) = g_c {
                cfg.model.g_c = g;
            }
            if hamiltonian.is_some() {
                cfg.model.hamiltonian_file = hamiltonian;
            }
            if fermion_modes.is_some() {
                cfg.model.fermion_modes = fermion_modes;
            }
            cmd_solve(&cfg)
        }
        Command::Sweep { common, range } => {
            let cfg = with_range(load(&common)?, &range);
            cmd_sweep(&cfg, common.bless)
        }
        Command::Crossings { common, range } => {
            let cfg = with_range(load(&common)?, &range);
            cmd_crossings(&cfg, common.bless)
        }
        Command::TruncationCheck {
            common,
            g_c,
            levels,
        } => {
            let mut cfg = load(&common)?;
            if let Some(g) = g_c {
                cfg.model.g_c = g;
            }
            if let Some(l) = levels {
                cfg.truncation.levels = l;
            }
            cmd_truncation(&cfg, common.bless)
        }
        Command::CalibrateShots {
            common,
            range,
            grid,
            target,
        } => {
            let mut cfg = with_range(load(&common)?, &range);
            if let Some(g) = grid {
                cfg.calibration.shots = g;
            }
            if let Some(t) = target {
                cfg.calibration.target = t;
            }
            cmd_calibrate(&cfg)
        }
    }
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.run.out = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.run.seed = seed;
    }
    if let Some(b) = common.backend {
        cfg.backend.mode = match b {
            BackendArg::Exact => "exact",
            BackendArg::Sampled => "sampled",
        }
        .into();
    }
    if let Some(shots) = common.shots {
        cfg.backend.shots = shots;
    }
    if let Some(dir) = &common.golden_dir {
        cfg.run.golden_dir = dir.clone();
    }
    if let Some(n) = common.n_sites {
        cfg.model.n_sites = n;
    }
    if let Some(w) = common.omega_b {
        cfg.model.omega_b = w;
    }
    if let Some(w) = common.omega_f {
        cfg.model.omega_f = w;
    }
    if let Some(n) = common.n_max {
        cfg.model.n_max = n;
    }
    if let Some(n) = common.max_iters {
        cfg.solver.max_iters = n;
    }
    Ok(cfg)
}

fn with_range(mut cfg: RunConfig, range: &Range) -> RunConfig {
    if let Some(g) = range.g_lo {
        cfg.sweep.g_lo = g;
    }
    if let Some(g) = range.g_hi {
        cfg.sweep.g_hi = g;
    }
    if let Some(p) = range.points {
        cfg.sweep.points = p;
    }
    cfg
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, text)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn report_golden(cfg: &RunConfig, name: &str, text: &str, bless: bool) -> Result<(), CliError> {
    match golden::check(&cfg.run.golden_dir, name, text, bless)? {
        GoldenOutcome::Blessed => eprintln!(
            "golden written: {}",
            cfg.run.golden_dir.join(name).display()
        ),
        GoldenOutcome::Matched => eprintln!(
            "golden matched: {}",
            cfg.run.golden_dir.join(name).display()
        ),
        GoldenOutcome::Missing => {}
    }
    Ok(())
}

/// Golden file name keyed by the parameters that determine the output.
fn golden_name(kind: &str, cfg: &RunConfig, extra: &str) -> String {
    let m = &cfg.model;
    format!(
        "{kind}_n{}_wb{}_wf{}_nmax{}{extra}.csv",
        m.n_sites, m.omega_b, m.omega_f, m.n_max
    )
}

fn range_tag(cfg: &RunConfig) -> String {
    format!("_g{}-{}", cfg.sweep.g_lo, cfg.sweep.g_hi)
}

fn to_toml<T: Serialize>(value: &T) -> Result<String, CliError> {
    toml::to_string(value)
        .map_err(|e| CliError::Numerical(format!("cannot serialize summary: {e}")))
}

#[derive(Serialize)]
struct GenericSummary {
    e_cqe: f64,
    e_exact: f64,
    abs_err: f64,
    iterations: usize,
    verdict: String,
    backend_evaluations: u64,
    seed: u64,
}

fn parse_filter(spec: &str, fermion_modes: usize) -> Result<OccupationFilter, CliError> {
    match spec {
        "all" => Ok(OccupationFilter::All),
        "one_per_pair" => Ok(OccupationFilter::OnePerPair {
            n_sites: fermion_modes / 2,
        }),
        other => match other.strip_prefix("particles:").map(str::parse::<usize>) {
            Some(Ok(k)) => Ok(OccupationFilter::ParticleNumber(k)),
            _ => Err(CliError::Validation(format!("unknown filter {other:?}"))),
        },
    }
}

fn cmd_solve(cfg: &RunConfig) -> Result<(), CliError> {
    let config = cfg.cqe_config()?;
    let seed = cfg.run.seed;
    let (trace, summary) = if let Some(file) = &cfg.model.hamiltonian_file {
        let text = fs::read_to_string(file)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", file.display())))?;
        let terms = parse_terms(&text)?;
        let f = cfg
            .model
            .fermion_modes
            .ok_or_else(|| CliError::Validation("a Hamiltonian file needs fermion_modes".into()))?;
        let basis = FockBasis::builder(f)
            .boson_modes(cfg.model.boson_modes)
            .n_max(cfg.model.n_max)
            .filter(parse_filter(&cfg.model.filter, f)?)
            .build()?;
        let h = Hamiltonian::new(&basis, terms)?;
        let trace = solve(&h, &config)?;
        let e_exact = diagonalize(&h, 1)?.ground_energy();
        let summary = GenericSummary {
            e_cqe: trace.final_energy(),
            e_exact,
            abs_err: (trace.final_energy() - e_exact).abs(),
            iterations: trace.iterations(),
            verdict: trace.verdict.to_string(),
            backend_evaluations: trace.backend_evaluations,
            seed,
        };
        let text = to_toml(&summary)?;
        (trace, text)
    } else {
        let params = cfg.tc_params();
        params.validate()?;
        let trace = solve_tc(&params, &config, seed)?;
        let text = to_toml(&summarize(&params, &trace, seed)?)?;
        (trace, text)
    };
    write(&cfg.run.out, "trace.csv", &trace_document(&trace))?;
    let path = write(&cfg.run.out, "summary.toml", &summary)?;
    print!("{summary}");
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, bless: bool) -> Result<(), CliError> {
    let params = cfg.tc_params();
    let rows = sweep_rows(&params, &cfg.sweep, &cfg.cqe_config()?, cfg.run.seed)?;
    let csv = sweep_csv(&rows);
    let path = write(&cfg.run.out, "sweep.csv", &csv)?;
    eprintln!("wrote {}", path.display());
    let failed = rows
        .iter()
        .filter(|r| r.status == RowStatus::Failed)
        .count();
    if failed > 0 {
        return Err(CliError::Numerical(format!(
            "{failed} of {} grid points failed",
            rows.len()
        )));
    }
    let worst = rows.iter().map(|r| r.abs_err).fold(0.0, f64::max);
    println!("points = {}\nmax_abs_err = {worst:.3e}", rows.len());
    let backend = match cfg.backend.mode.as_str() {
        "sampled" => format!("_sampled{}_seed{}", cfg.backend.shots, cfg.run.seed),
        _ => "_exact".to_string(),
    };
    let extra = format!("{}x{}{backend}", range_tag(cfg), cfg.sweep.points);
    report_golden(cfg, &golden_name("sweep", cfg, &extra), &csv, bless)
}

fn cmd_crossings(cfg: &RunConfig, bless: bool) -> Result<(), CliError> {
    let found = crossings(&cfg.tc_params(), &cfg.sweep)?;
    let csv = crossings_csv(&found);
    let path = write(&cfg.run.out, "crossings.csv", &csv)?;
    eprintln!("wrote {}", path.display());
    for c in &found {
        println!(
            "g* = {:.6}  M {} -> {}",
            c.g, c.sector_below, c.sector_above
        );
    }
    if found.is_empty() {
        println!("no crossings");
    }
    report_golden(
        cfg,
        &golden_name("crossings", cfg, &range_tag(cfg)),
        &csv,
        bless,
    )
}

fn cmd_truncation(cfg: &RunConfig, bless: bool) -> Result<(), CliError> {
    if cfg.truncation.levels.is_empty() {
        return Err(CliError::Validation("no truncation levels given".into()));
    }
    let rows = truncation_check(&cfg.tc_params(), &cfg.truncation.levels)?;
    let csv = truncation_csv(&rows);
    let path = write(&cfg.run.out, "truncation.csv", &csv)?;
    eprintln!("wrote {}", path.display());
    print!("{csv}");
    let levels: Vec<String> = cfg
        .truncation
        .levels
        .iter()
        .map(|l| l.to_string())
        .collect();
    let extra = format!("_g{}_levels{}", cfg.model.g_c, levels.join("-"));
    report_golden(cfg, &golden_name("truncation", cfg, &extra), &csv, bless)
}

fn cmd_calibrate(cfg: &RunConfig) -> Result<(), CliError> {
    let c = calibrate_shots(
        &cfg.tc_params(),
        &cfg.sweep,
        &cfg.cqe_config()?,
        cfg.run.seed,
        &cfg.calibration.shots,
        cfg.calibration.target,
    )?;
    let csv = calibration_csv(&c);
    let path = write(&cfg.run.out, "calibration.csv", &csv)?;
    eprintln!("wrote {}", path.display());
    print!("{csv}");
    Ok(())
}
