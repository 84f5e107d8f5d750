//! The five subcommands. Each produces named output blobs and a manifest;
//! writing them to disk is left to [`write_run`].

use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

use fmflow_core::dynamics::{evolve, growth_rate_experiment, GrowthSpec, Outcome};
use fmflow_core::math;
use fmflow_core::symbols::{
    classify_disordered_with_tol, classify_ordered_with_tol, critical_wavenumbers, dispersion_disordered,
};
use fmflow_core::{ModelParams, SpectralMeasure, StabilityVerdict};
use rayon::prelude::*;

use crate::config::Config;
use crate::formats::{self, Cell, Table, TableFormat};
use crate::manifest::{RunManifest, Timings};
use crate::verify::{self, Check, Suite};
use crate::{grid, seedgen, CliError, EXIT_ATOM_CAP, EXIT_NUMERIC, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Classify,
    Dispersion,
    Growth,
    Evolve,
    Verify(Suite),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Dispersion => "dispersion",
            Command::Growth => "growth",
            Command::Evolve => "evolve",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub threads: usize,
    pub format: TableFormat,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: None, threads: 1, format: TableFormat::Csv }
    }
}

#[derive(Debug, Clone)]
pub struct Output {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub manifest: RunManifest,
    pub outputs: Vec<Output>,
    /// Human-readable summary for stdout.
    pub report: String,
    pub exit_code: i32,
}

struct Ctx<'a> {
    cfg: &'a Config,
    hash: String,
    format: TableFormat,
    outputs: Vec<Output>,
}

impl Ctx<'_> {
    fn table(&mut self, stem: &str, t: &Table) -> Result<(), CliError> {
        let mut bytes = Vec::new();
        t.write(&mut bytes, self.format, &self.hash)?;
        self.outputs.push(Output { name: format!("{stem}.{}", self.format.extension()), bytes });
        Ok(())
    }
}

/// Runs `cmd` on a parsed config. `out_dir` is only read (for the verify
/// preflight), never written.
pub fn run(cmd: Command, cfg: Config, opts: &RunOptions, out_dir: Option<&Path>) -> Result<RunResult, CliError> {
    let mut cfg = cfg;
    if let Some(s) = opts.seed {
        cfg.seed.value = s;
    }
    let cfg = cfg.resolve()?;
    let mut manifest = RunManifest::new(cmd.name(), &cfg, opts.threads);
    let mut ctx = Ctx { cfg: &cfg, hash: manifest.config_hash.clone(), format: opts.format, outputs: Vec::new() };
    let start = Instant::now();
    let (report, outcome, steps, exit_code) = match cmd {
        Command::Classify => classify(&mut ctx)?,
        Command::Dispersion => dispersion(&mut ctx)?,
        Command::Growth => growth(&mut ctx)?,
        Command::Evolve => run_evolve(&mut ctx)?,
        Command::Verify(suite) => run_verify(&mut ctx, suite, out_dir)?,
    };
    manifest.timings = Timings::new(start.elapsed(), steps);
    manifest.outcome = outcome;
    manifest.outputs = ctx.outputs.iter().map(|o| o.name.clone()).collect();
    Ok(RunResult { manifest, outputs: ctx.outputs, report, exit_code })
}

/// Writes every output and the manifest into `dir`, creating it if needed.
pub fn write_run(res: &RunResult, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for o in &res.outputs {
        std::fs::write(dir.join(&o.name), &o.bytes)?;
    }
    res.manifest.write(dir)?;
    Ok(())
}

type Done = (String, String, usize, i32);

fn nan_or(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

fn k_star(p: &ModelParams) -> f64 {
    (p.gamma0.min(0.0).abs() / (2.0 * p.gamma2)).sqrt()
}

fn verdict_row(p: &ModelParams, speed: f64, kind: &str, v: &StabilityVerdict) -> Vec<Cell> {
    let band = v.critical_band;
    vec![
        Cell::Num(p.gamma0),
        Cell::Num(p.alpha),
        Cell::Num(p.gamma2),
        Cell::Num(p.beta),
        Cell::Num(speed),
        Cell::Text(kind.into()),
        Cell::Text(v.class.as_str().into()),
        Cell::Num(v.spectral_bound),
        Cell::Num(k_star(p)),
        Cell::Num(nan_or(band.map(|b| b.0))),
        Cell::Num(nan_or(band.map(|b| b.1))),
    ]
}

pub const PHASE_COLUMNS: [&str; 11] = [
    "gamma0",
    "alpha",
    "gamma2",
    "beta",
    "V_norm",
    "state_kind",
    "class",
    "spectral_bound",
    "k_star",
    "s_minus_sq",
    "s_plus_sq",
];

/// Phase diagram over the configured sweep. Rows are ordered by Γ₂, β, Γ₀,
/// α; an ordered-state row follows each disordered row with α < 0.
pub fn phase_diagram(cfg: &Config) -> Result<Table, CliError> {
    let c = &cfg.classify;
    let n = cfg.model.n;
    for &g2 in &c.gamma2 {
        for &b in &c.beta {
            ModelParams::new(g2, 0.0, 0.0, b, n).validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
    }
    let (g0s, alphas) = (c.gamma0.values(), c.alpha.values());
    let mut points = Vec::new();
    for &g2 in &c.gamma2 {
        for &b in &c.beta {
            for &g0 in &g0s {
                for &a in &alphas {
                    points.push(ModelParams::new(g2, g0, a, b, n));
                }
            }
        }
    }
    let tol = c.tie_tol;
    let rows: Vec<Result<Vec<Vec<Cell>>, CliError>> = points
        .par_iter()
        .map(|p| {
            let mut rows = vec![verdict_row(p, 0.0, "disordered", &classify_disordered_with_tol(p, tol))];
            if p.alpha < 0.0 {
                let speed = (-p.alpha / p.beta).sqrt();
                let mut v = vec![0.0; n];
                v[0] = speed;
                let verdict = classify_ordered_with_tol(p, &v, tol)?;
                rows.push(verdict_row(p, speed, "ordered", &verdict));
            }
            Ok(rows)
        })
        .collect();
    let mut t = Table::new(PHASE_COLUMNS.to_vec());
    for r in rows {
        t.rows.extend(r?);
    }
    Ok(t)
}

fn classify(ctx: &mut Ctx) -> Result<Done, CliError> {
    let t = phase_diagram(ctx.cfg)?;
    let mut counts = [0usize; 3];
    for r in &t.rows {
        if let Cell::Text(class) = &r[6] {
            let i = ["exp_stable", "asym_stable", "exp_unstable"].iter().position(|c| c == class).unwrap_or(0);
            counts[i] += 1;
        }
    }
    let report = format!(
        "classify: {} rows (exp_stable {}, asym_stable {}, exp_unstable {})",
        t.rows.len(),
        counts[0],
        counts[1],
        counts[2]
    );
    ctx.table("phase_diagram", &t)?;
    Ok((report, "completed".into(), t.rows.len(), EXIT_OK))
}

/// `(k, σ(k))` on the configured range, plus one marked row at each
/// positive zero crossing `k = s±`.
pub fn dispersion_table(cfg: &Config) -> Result<Table, CliError> {
    let p = cfg.params()?;
    let range = cfg.dispersion.k;
    let mut rows: Vec<(f64, &str)> = range.values().into_iter().map(|k| (k, "")).collect();
    if let Some((lo, hi)) = critical_wavenumbers(&p).band {
        let (kmin, kmax) = (range.min.min(range.max), range.min.max(range.max));
        // with α ≤ 0 the lower root is not positive (or was clipped to 0)
        for (s, name) in [(lo, "s_minus"), (hi, "s_plus")] {
            let k = s.sqrt();
            if s > 0.0 && (name == "s_plus" || p.alpha > 0.0) && k >= kmin && k <= kmax {
                rows.push((k, name));
            }
        }
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut t = Table::new(vec!["k", "sigma", "crossing"]);
    for (k, m) in rows {
        t.rows.push(vec![Cell::Num(k), Cell::Num(dispersion_disordered(k, &p)), Cell::Text(m.into())]);
    }
    Ok(t)
}

fn dispersion(ctx: &mut Ctx) -> Result<Done, CliError> {
    let t = dispersion_table(ctx.cfg)?;
    let marks: Vec<String> = t
        .rows
        .iter()
        .filter_map(|r| match (&r[0], &r[2]) {
            (Cell::Num(k), Cell::Text(m)) if !m.is_empty() => Some(format!("{m} at k={k:.12}")),
            _ => None,
        })
        .collect();
    let report = if marks.is_empty() {
        format!("dispersion: {} rows, no zero crossings", t.rows.len())
    } else {
        format!("dispersion: {} rows, crossings: {}", t.rows.len(), marks.join(", "))
    };
    ctx.table("dispersion", &t)?;
    Ok((report, "completed".into(), t.rows.len(), EXIT_OK))
}

fn growth(ctx: &mut Ctx) -> Result<Done, CliError> {
    let cfg = ctx.cfg;
    let p = cfg.params()?;
    let state = cfg.steady_state()?;
    let g = &cfg.growth;
    let mut spec = GrowthSpec::new(&g.k_seed, g.amplitude, g.horizon, g.dt);
    spec.direction = g.direction.as_ref().map(|d| math::rvec(d));
    spec.nonlinear = g.nonlinear;
    spec.stepper = cfg.stepper()?;
    spec.k_max_factor = g.k_max_factor;
    let r = growth_rate_experiment(&p, &state, &spec)?;
    let k = math::norm(&spec.k_seed);
    let mut t = Table::new(vec![
        "k",
        "measured_rate",
        "predicted_rate",
        "rel_error",
        "window_start",
        "window_end",
        "points",
        "outcome",
    ]);
    t.rows.push(vec![
        Cell::Num(k),
        Cell::Num(r.measured),
        Cell::Num(r.predicted),
        Cell::Num(r.rel_error()),
        Cell::Num(r.window.0),
        Cell::Num(r.window.1),
        Cell::Int(r.points as u64),
        Cell::Text(r.outcome.as_str().into()),
    ]);
    let mut series = Table::new(vec!["t", "fm_norm"]);
    for (tt, norm) in &r.series {
        series.rows.push(vec![Cell::Num(*tt), Cell::Num(*norm)]);
    }
    ctx.table("growth", &t)?;
    ctx.table("growth_series", &series)?;
    let report = format!(
        "growth: k={k:.6} measured={:.9e} predicted={:.9e} rel_error={:.3e} outcome={}",
        r.measured,
        r.predicted,
        r.rel_error(),
        r.outcome.as_str()
    );
    Ok((report, r.outcome.as_str().into(), r.series.len(), EXIT_OK))
}

fn initial_data(cfg: &Config) -> Result<SpectralMeasure, CliError> {
    match &cfg.init.file {
        Some(path) => {
            let f = std::fs::File::open(path)
                .map_err(|e| std::io::Error::new(e.kind(), format!("init.file {path}: {e}")))?;
            let mut blocks = formats::read_snapshots(BufReader::new(f))?;
            blocks.pop().map(|b| b.1).ok_or_else(|| CliError::Config(format!("init.file {path} has no snapshot")))
        }
        None => seedgen::random_field(&cfg.seed, cfg.seed.value, &cfg.truncation_policy()?),
    }
}

fn run_evolve(ctx: &mut Ctx) -> Result<Done, CliError> {
    let cfg = ctx.cfg;
    let sim = cfg.sim_config()?;
    let u0 = initial_data(cfg)?;
    let traj = evolve(&u0, &sim, None)?;
    ctx.table("diagnostics", &formats::diagnostics_table(&traj.diagnostics, &traj.outcome))?;
    let mut snaps = Vec::new();
    for (t, m) in &traj.snapshots {
        formats::write_snapshot(&mut snaps, m, *t, &cfg.truncation.origin_policy, &ctx.hash)?;
    }
    ctx.outputs.push(formats_output("snapshots.jsonl", snaps));
    let (outcome, exit) = match traj.outcome {
        Outcome::Completed => ("completed".to_string(), EXIT_OK),
        Outcome::BlowUp(t) => (format!("blow_up at t={t}"), EXIT_OK),
        Outcome::AtomCapExceeded(t) => (format!("atom_cap_exceeded at t={t}"), EXIT_ATOM_CAP),
    };
    let last = traj.diagnostics.last().expect("initial record");
    let report = format!(
        "evolve: {} steps to t={} outcome={} fm_norm={:.6e} atoms={}",
        traj.steps, traj.final_time, outcome, last.fm_norm, last.atom_count
    );
    Ok((report, outcome, traj.steps, exit))
}

fn formats_output(name: &str, bytes: Vec<u8>) -> Output {
    Output { name: name.into(), bytes }
}

fn run_verify(ctx: &mut Ctx, suite: Suite, out_dir: Option<&Path>) -> Result<Done, CliError> {
    let seed = ctx.cfg.seed.value;
    let mut checks: Vec<Check> = Vec::new();
    let mut lines = Vec::new();
    let want = |s: Suite| suite == s || suite == Suite::All;
    if want(Suite::Oracle) {
        let (bad, names) = match out_dir {
            Some(d) => verify::preflight(d)?,
            None => (0, Vec::new()),
        };
        if bad > 0 {
            lines.push(format!("outputs without a matching manifest: {}", names.join(", ")));
        }
        checks.push(Check::upper("oracle", "manifest_preflight", bad as f64, 0.0));
    }
    if want(Suite::Algebra) {
        checks.extend(verify::algebra_suite(seed));
    }
    if want(Suite::Symbols) {
        checks.extend(verify::symbols_suite(seed));
    }
    if want(Suite::Maxreg) {
        checks.extend(verify::maxreg_suite());
    }
    if want(Suite::Oracle) {
        let (c, g) = verify::oracle_suite(ctx.cfg)?;
        checks.extend(c);
        if let Some(g) = g {
            let mut bytes = Vec::new();
            grid::write_snapshot(&mut bytes, &g, &ctx.hash)?;
            ctx.outputs.push(formats_output("oracle_grid.bin", bytes));
        }
    }
    let mut t = Table::new(vec!["suite", "check", "status", "value", "limit", "margin"]);
    for c in &checks {
        lines.push(c.line());
        t.rows.push(vec![
            Cell::Text(c.suite.into()),
            Cell::Text(c.name.into()),
            Cell::Text(if c.pass { "PASS" } else { "FAIL" }.into()),
            Cell::Num(c.value),
            Cell::Num(c.limit),
            Cell::Num(c.margin()),
        ]);
    }
    ctx.table("verify_report", &t)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    lines.push(format!("verify {}: {} checks, {} failed", suite.as_str(), checks.len(), failed));
    let exit = if failed == 0 { EXIT_OK } else { EXIT_NUMERIC };
    let outcome = if failed == 0 { "pass".to_string() } else { format!("{failed} failed") };
    Ok((lines.join("\n"), outcome, checks.len(), exit))
}
