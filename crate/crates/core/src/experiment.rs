//! Sweeps, reports and calibration runs over the Tavis-Cummings model.
//!
//! Every grid point is an independent solve. Sampled backends get their seed
//! from [`derive_seed`] with the grid index, so results do not depend on the
//! order in which rayon schedules the points.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cqe::{solve, CqeConfig, CqeTrace, Verdict};
use crate::error::{Error, Result};
use crate::exact::{
    diagonalize, find_crossings, ground_populations, mean_excitation, site_populations, Crossing,
};
use crate::hamiltonian::{build_tavis_cummings, excitation_labels, TcParams};
use crate::measurement::{derive_seed, BackendSpec};

pub const CSV_HEADER: &str =
    "g_c,E_exact,E_cqe,abs_err,pop_exact,pop_cqe,sector_M,iters,verdict,seed";
pub const TRACE_HEADER: &str =
    "n,energy,energy_measured,variance,norm_a,norm_b,eta_a,eta_b,unitary_sector_drift,symmetrized,sector_weights";

/// Output of `calibrate_shots` on the default N = 3 sweep with root seed 2024
/// and `DEFAULT_SHOT_GRID`. The fitted errors stay above the 7e-3 target on
/// that grid, so this is the grid point with the smallest miss.
pub const CALIBRATED_SHOTS: u64 = 1_000_000;
pub const CALIBRATION_TARGET: f64 = 7e-3;
pub const CALIBRATION_SEED: u64 = 2024;
pub const MAX_CALIBRATED_SHOTS: u64 = 1_000_000_000;
pub const DEFAULT_SHOT_GRID: [u64; 4] = [1_000, 10_000, 100_000, 1_000_000];

/// Bracket and tolerance for crossing searches.
pub const CROSSING_TOL: f64 = 1e-6;
pub const CROSSING_SCAN_POINTS: usize = 200;

/// Formats a real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub g_lo: f64,
    pub g_hi: f64,
    pub points: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            g_lo: 0.0,
            g_hi: 2.0,
            points: 21,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::Config("sweep needs at least one point".into()));
        }
        if !self.g_lo.is_finite() || !self.g_hi.is_finite() || self.g_lo > self.g_hi {
            return Err(Error::Config(format!(
                "invalid sweep range [{}, {}]",
                self.g_lo, self.g_hi
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.g_lo];
        }
        let step = (self.g_hi - self.g_lo) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.g_hi
                } else {
                    self.g_lo + step * i as f64
                }
            })
            .collect()
    }
}

/// Outcome column of a sweep row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Solved(Verdict),
    Failed,
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowStatus::Solved(v) => v.fmt(f),
            RowStatus::Failed => f.write_str("failed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub g_c: f64,
    pub e_exact: f64,
    /// Exact energy of the final CQE state.
    pub e_cqe: f64,
    pub abs_err: f64,
    /// Mean lower-level population per site.
    pub pop_exact: f64,
    pub pop_cqe: f64,
    /// Rounded `<M>` of the exact ground state.
    pub sector_m: usize,
    pub iters: usize,
    pub status: RowStatus,
    pub seed: u64,
    pub degenerate: bool,
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_real(self.g_c),
            fmt_real(self.e_exact),
            fmt_real(self.e_cqe),
            fmt_real(self.abs_err),
            fmt_real(self.pop_exact),
            fmt_real(self.pop_cqe),
            self.sector_m,
            self.iters,
            self.status,
            self.seed
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

/// Exact reference data at one coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub energy: f64,
    pub population: f64,
    pub sector: usize,
    pub degenerate: bool,
}

pub fn reference(params: &TcParams) -> Result<Reference> {
    let h = build_tavis_cummings(params)?;
    let s = diagonalize(&h, 1)?;
    let pops = ground_populations(&s, params.n_sites);
    Ok(Reference {
        energy: s.ground_energy(),
        population: pops.mean(),
        sector: mean_excitation(s.ground_state(), params.n_sites).round() as usize,
        degenerate: pops.degenerate,
    })
}

/// Reseeds a sampled backend; exact backends pass through.
pub fn with_seed(backend: BackendSpec, seed: u64) -> BackendSpec {
    match backend {
        BackendSpec::Exact => BackendSpec::Exact,
        BackendSpec::Sampled { shots, .. } => BackendSpec::Sampled { shots, seed },
    }
}

/// CQE solve on the TC model with sector labels attached.
pub fn solve_tc(params: &TcParams, config: &CqeConfig, seed: u64) -> Result<CqeTrace> {
    let h = build_tavis_cummings(params)?;
    let config = CqeConfig {
        sectors: Some(excitation_labels(h.basis(), params.n_sites)),
        backend: with_seed(config.backend, seed),
        ..config.clone()
    };
    solve(&h, &config)
}

#[derive(Debug, Clone)]
pub struct PointResult {
    pub row: SweepRow,
    pub trace: Option<CqeTrace>,
}

/// Solves one grid point. Numerical failures of the solve become a
/// `failed` row; an invalid model is an error.
pub fn solve_point(params: &TcParams, config: &CqeConfig, seed: u64) -> Result<PointResult> {
    params.validate()?;
    let r = reference(params)?;
    let mut row = SweepRow {
        g_c: params.g_c,
        e_exact: r.energy,
        e_cqe: f64::NAN,
        abs_err: f64::NAN,
        pop_exact: r.population,
        pop_cqe: f64::NAN,
        sector_m: r.sector,
        iters: 0,
        status: RowStatus::Failed,
        seed,
        degenerate: r.degenerate,
    };
    match solve_tc(params, config, seed) {
        Ok(trace) => {
            let pops = site_populations(&trace.final_state, params.n_sites);
            row.e_cqe = trace.final_energy();
            row.abs_err = (row.e_cqe - row.e_exact).abs();
            row.pop_cqe = pops.iter().sum::<f64>() / pops.len() as f64;
            row.iters = trace.iterations();
            row.status = RowStatus::Solved(trace.verdict);
            Ok(PointResult {
                row,
                trace: Some(trace),
            })
        }
        Err(Error::Config(msg)) => Err(Error::Config(msg)),
        Err(_) => Ok(PointResult { row, trace: None }),
    }
}

/// Runs the grid in parallel; rows come back in grid order.
pub fn sweep(
    params: &TcParams,
    spec: &SweepSpec,
    config: &CqeConfig,
    root_seed: u64,
) -> Result<Vec<PointResult>> {
    spec.validate()?;
    params.validate()?;
    config.validate()?;
    spec.grid()
        .into_par_iter()
        .enumerate()
        .map(|(i, g)| {
            solve_point(
                &params.with_coupling(g),
                config,
                derive_seed(root_seed, i as u64),
            )
        })
        .collect()
}

pub fn sweep_rows(
    params: &TcParams,
    spec: &SweepSpec,
    config: &CqeConfig,
    root_seed: u64,
) -> Result<Vec<SweepRow>> {
    Ok(sweep(params, spec, config, root_seed)?
        .into_iter()
        .map(|p| p.row)
        .collect())
}

pub fn trace_document(trace: &CqeTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in &trace.records {
        let weights: Vec<String> = r.sector_weights.iter().map(|&w| fmt_real(w)).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            fmt_real(r.energy),
            fmt_real(r.energy_measured),
            fmt_real(r.variance),
            fmt_real(r.norm_a),
            fmt_real(r.norm_b),
            fmt_real(r.eta_a),
            fmt_real(r.eta_b),
            fmt_real(r.unitary_sector_drift),
            r.symmetrized,
            weights.join(";")
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub g_c: f64,
    pub e_cqe: f64,
    pub e_exact: f64,
    pub abs_err: f64,
    pub pop_exact: Vec<f64>,
    pub pop_cqe: Vec<f64>,
    pub degenerate: bool,
    pub iterations: usize,
    pub verdict: String,
    pub backend_evaluations: u64,
    pub seed: u64,
}

pub fn summarize(params: &TcParams, trace: &CqeTrace, seed: u64) -> Result<Summary> {
    let h = build_tavis_cummings(params)?;
    let s = diagonalize(&h, 1)?;
    let pops = ground_populations(&s, params.n_sites);
    let e_cqe = trace.final_energy();
    Ok(Summary {
        g_c: params.g_c,
        e_cqe,
        e_exact: s.ground_energy(),
        abs_err: (e_cqe - s.ground_energy()).abs(),
        pop_exact: pops.per_site,
        pop_cqe: site_populations(&trace.final_state, params.n_sites),
        degenerate: pops.degenerate,
        iterations: trace.iterations(),
        verdict: trace.verdict.to_string(),
        backend_evaluations: trace.backend_evaluations,
        seed,
    })
}

pub fn crossings(params: &TcParams, spec: &SweepSpec) -> Result<Vec<Crossing>> {
    spec.validate()?;
    find_crossings(
        params,
        spec.g_lo,
        spec.g_hi,
        CROSSING_SCAN_POINTS,
        CROSSING_TOL,
    )
}

pub const CROSSINGS_HEADER: &str = "g_star,sector_below,sector_above";

pub fn crossings_csv(found: &[Crossing]) -> String {
    let mut out = String::from(CROSSINGS_HEADER);
    out.push('\n');
    for c in found {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_real(c.g),
            c.sector_below,
            c.sector_above
        );
    }
    out
}

/// Parses a crossing report written by [`crossings_csv`].
pub fn parse_crossings_csv(text: &str) -> Result<Vec<Crossing>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::Parse {
            line: i + 1,
            msg: msg.to_string(),
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(bad("expected 3 fields"));
        }
        out.push(Crossing {
            g: f[0].trim().parse().map_err(|_| bad("bad g_star"))?,
            sector_below: f[1].trim().parse().map_err(|_| bad("bad sector_below"))?,
            sector_above: f[2].trim().parse().map_err(|_| bad("bad sector_above"))?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationRow {
    pub n_max: usize,
    pub dim: usize,
    pub energy: f64,
    pub population: f64,
    /// Energy change against the previous row.
    pub delta: f64,
}

/// Ground energy and population at each truncation level.
pub fn truncation_check(params: &TcParams, n_max_values: &[usize]) -> Result<Vec<TruncationRow>> {
    let mut rows: Vec<TruncationRow> = Vec::new();
    for &n_max in n_max_values {
        let p = TcParams { n_max, ..*params };
        p.validate()?;
        let h = build_tavis_cummings(&p)?;
        let s = diagonalize(&h, 1)?;
        let energy = s.ground_energy();
        let delta = rows.last().map_or(f64::NAN, |r| (energy - r.energy).abs());
        rows.push(TruncationRow {
            n_max,
            dim: h.basis().dim(),
            energy,
            population: ground_populations(&s, p.n_sites).mean(),
            delta,
        });
    }
    Ok(rows)
}

pub fn truncation_csv(rows: &[TruncationRow]) -> String {
    let mut out = String::from("n_max,dim,E_ground,pop_ground,delta_E\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.n_max,
            r.dim,
            fmt_real(r.energy),
            fmt_real(r.population),
            fmt_real(r.delta)
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationPoint {
    pub shots: u64,
    pub mean_abs_err: f64,
    pub std_abs_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub points: Vec<CalibrationPoint>,
    /// Least-squares slope of `ln(mean_abs_err)` against `ln(shots)`.
    pub slope: f64,
    pub intercept: f64,
    /// Shot count the fit places at the target error, rounded to 2 significant
    /// digits. When the fit cannot reach the target inside `MAX_CALIBRATED_SHOTS`
    /// (flat or rising errors), the grid point closest to the target in log error.
    pub recommended_shots: u64,
    pub extrapolated: bool,
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (mx, _) = mean_std(x);
    let (my, _) = mean_std(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn round_sig2(x: f64) -> u64 {
    if !(x >= 1.0) {
        return 1;
    }
    let scale = 10f64.powi(x.log10().floor() as i32 - 1);
    ((x / scale).round() * scale) as u64
}

/// Sweeps at each shot count and fits the error against shots on a log-log scale.
pub fn calibrate_shots(
    params: &TcParams,
    spec: &SweepSpec,
    config: &CqeConfig,
    root_seed: u64,
    shot_grid: &[u64],
    target: f64,
) -> Result<Calibration> {
    if shot_grid.len() < 2 || shot_grid.contains(&0) {
        return Err(Error::Config(
            "calibration needs at least two nonzero shot counts".into(),
        ));
    }
    if !(target > 0.0) {
        return Err(Error::Config("calibration target must be positive".into()));
    }
    let mut points = Vec::new();
    for &shots in shot_grid {
        let config = CqeConfig {
            backend: BackendSpec::Sampled { shots, seed: 0 },
            ..config.clone()
        };
        let rows = sweep_rows(params, spec, &config, root_seed)?;
        let errs: Vec<f64> = rows.iter().map(|r| r.abs_err).collect();
        if errs.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite(format!("failed solve at {shots} shots")));
        }
        let (mean_abs_err, std_abs_err) = mean_std(&errs);
        points.push(CalibrationPoint {
            shots,
            mean_abs_err,
            std_abs_err,
        });
    }
    let x: Vec<f64> = points.iter().map(|p| (p.shots as f64).ln()).collect();
    let y: Vec<f64> = points
        .iter()
        .map(|p| p.mean_abs_err.max(f64::MIN_POSITIVE).ln())
        .collect();
    let (slope, intercept) = linear_fit(&x, &y);
    let fitted = ((target.ln() - intercept) / slope).exp();
    let extrapolated = slope < 0.0 && fitted.is_finite() && fitted <= MAX_CALIBRATED_SHOTS as f64;
    let recommended_shots = if extrapolated {
        round_sig2(fitted)
    } else {
        let miss = |p: &CalibrationPoint| (p.mean_abs_err.ln() - target.ln()).abs();
        points
            .iter()
            .min_by(|a, b| miss(a).total_cmp(&miss(b)))
            .map_or(shot_grid[0], |p| p.shots)
    };
    Ok(Calibration {
        points,
        slope,
        extrapolated,
        intercept,
        recommended_shots,
    })
}

pub fn calibration_csv(c: &Calibration) -> String {
    let mut out = String::from("shots,mean_abs_err,std_abs_err\n");
    for p in &c.points {
        let _ = writeln!(
            out,
            "{},{},{}",
            p.shots,
            fmt_real(p.mean_abs_err),
            fmt_real(p.std_abs_err)
        );
    }
    let _ = writeln!(out, "# slope = {}", fmt_real(c.slope));
    let _ = writeln!(out, "# recommended_shots = {}", c.recommended_shots);
    let _ = writeln!(out, "# from_fit = {}", c.extrapolated);
    out
}
