//! Acceptance run. Prints one PASS/FAIL line per criterion and exits
//! nonzero if an enforced criterion fails.
//!
//! The strict product inequality is reported but not enforced: see the
//! README section on floating-point equality cases.

use std::time::{Duration, Instant};

use fmflow::config::Config;
use fmflow::grid::{Dealias, GridSpec};
use fmflow::seedgen::random_field;
use fmflow::verify::{dual_path, oracle_box_len};
use fmflow_core::dynamics::{
    evolve, growth_rate_experiment, manufactured_forcing, GrowthSpec, Lattice, ModalTrajectory, Outcome, Profile,
    SimConfig, TruncationPolicy,
};
use fmflow_core::math::{self, C64, ZERO};
use fmflow_core::symbols::{
    classify_disordered, classify_ordered, critical_wavenumbers, dispersion_disordered, maxreg_constant_check,
    StabilityClass,
};
use fmflow_core::{Atom, ModelParams, ProductKind, SpectralMeasure, SteadyState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    enforced: bool,
    detail: String,
}

impl Verdict {
    fn enforced(pass: bool, detail: String) -> Self {
        Verdict { pass, enforced: true, detail }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

// ---- dispersion ----------------------------------------------------------

fn horner_sigma(k: f64, g2: f64, g0: f64, a: f64) -> f64 {
    let s = k * k;
    let mut acc = g2;
    acc = acc * s + g0;
    acc = acc * s + a;
    -acc
}

/// Roots of `g2 s² + g0 s + a`, sorted, by the textbook formula with the
/// cancellation-free companion root.
fn quadratic_roots(g2: f64, g0: f64, a: f64) -> Option<(f64, f64)> {
    let d = g0 * g0 - 4.0 * g2 * a;
    if d < 0.0 {
        return None;
    }
    let big = (-g0 - g0.signum() * d.sqrt()) / (2.0 * g2);
    let small = if big == 0.0 { 0.0 } else { a / (g2 * big) };
    Some((big.min(small), big.max(small)))
}

fn dispersion_exactness() -> Verdict {
    const VALUE_TOL: f64 = 1e-14;
    const ROOT_TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst_value, mut worst_root, mut roots_checked) = (0.0f64, 0.0f64, 0usize);
    for _ in 0..1000 {
        let g2 = rng.gen_range(0.1..3.0);
        let g0 = rng.gen_range(-3.0..3.0);
        let a = rng.gen_range(-2.0..2.0);
        let k = rng.gen_range(0.0..3.0);
        let p = ModelParams::new(g2, g0, a, 1.0, 2);
        worst_value = worst_value.max(rel(dispersion_disordered(k, &p), horner_sigma(k, g2, g0, a)));
        let band = critical_wavenumbers(&p).band;
        match (quadratic_roots(g2, g0, a), band) {
            (Some((lo, hi)), Some((blo, bhi))) if hi > 0.0 => {
                roots_checked += 1;
                worst_root = worst_root.max(rel(bhi, hi));
                // a negative lower root is reported clipped to zero
                if lo > 0.0 {
                    worst_root = worst_root.max(rel(blo, lo));
                } else if blo != 0.0 {
                    worst_root = f64::INFINITY;
                }
            }
            (Some((_, hi)), None) if hi <= 0.0 => {}
            (None, None) => {}
            _ => worst_root = f64::INFINITY,
        }
    }
    Verdict::enforced(
        worst_value <= VALUE_TOL && worst_root <= ROOT_TOL && roots_checked > 100,
        format!("value_rel={worst_value:.2e} (tol {VALUE_TOL:.0e}) root_rel={worst_root:.2e} (tol {ROOT_TOL:.0e}) roots_checked={roots_checked}"),
    )
}

// ---- trichotomy ----------------------------------------------------------

/// Class from integer arithmetic on the sweep indices: `Γ₀ = (i−50)/25`,
/// `α = (3j−100)/100`, `Γ₂ = 1`.
fn integer_class(i: i64, j: i64) -> StabilityClass {
    use std::cmp::Ordering::*;
    let m = i - 50;
    let (lhs, rhs) = if m < 0 { (75 * j - 2500, m * m) } else { (3 * j - 100, 0) };
    match lhs.cmp(&rhs) {
        Greater => StabilityClass::ExponentiallyStable,
        Equal => StabilityClass::AsymptoticallyStable,
        Less => StabilityClass::ExponentiallyUnstable,
    }
}

fn classification_trichotomy() -> Verdict {
    let sweep = Config::default().classify;
    let g0s = sweep.gamma0.values();
    let alphas = sweep.alpha.values();
    let mut mismatches = 0usize;
    for (i, &g0) in g0s.iter().enumerate() {
        for (j, &a) in alphas.iter().enumerate() {
            let v = classify_disordered(&ModelParams::new(1.0, g0, a, 1.0, 2));
            if v.class != integer_class(i as i64, j as i64) {
                mismatches += 1;
            }
        }
    }
    // the sweep never lands on the boundary, so probe it directly
    let mut boundary = 0usize;
    let mut boundary_bad = 0usize;
    for &g0 in &g0s {
        let a = if g0 < 0.0 { g0 * g0 / 4.0 } else { 0.0 };
        boundary += 1;
        if classify_disordered(&ModelParams::new(1.0, g0, a, 1.0, 2)).class != StabilityClass::AsymptoticallyStable {
            boundary_bad += 1;
        }
    }
    Verdict::enforced(
        mismatches == 0 && boundary_bad == 0 && g0s.len() * alphas.len() == 101 * 101,
        format!(
            "grid={}x{} mismatches={mismatches} boundary_points={boundary} boundary_mismatches={boundary_bad}",
            g0s.len(),
            alphas.len()
        ),
    )
}

// ---- linear growth -------------------------------------------------------

fn linear_growth() -> Verdict {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    while runs < 20 {
        let p = ModelParams::new(rng.gen_range(0.5..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-0.5..1.0), 1.0, 2);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let k = rng.gen_range(0.3..1.2);
        let sigma = dispersion_disordered(k, &p);
        if sigma.abs() < 0.05 {
            continue;
        }
        runs += 1;
        let horizon = if sigma > 0.0 { (5.0 * 10f64.ln() / sigma).min(10.0) } else { 10.0 };
        let mut spec = GrowthSpec::new(&[k * angle.cos(), k * angle.sin()], 1e-3, horizon, horizon / 200.0);
        spec.nonlinear = false;
        let s = SteadyState::disordered(&p);
        match growth_rate_experiment(&p, &s, &spec) {
            Ok(r) => worst = worst.max(rel(r.measured, sigma)),
            Err(_) => worst = f64::INFINITY,
        }
    }
    Verdict::enforced(worst < TOL, format!("runs={runs} worst_rate_rel={worst:.2e} (tol {TOL:.0e})"))
}

// ---- nonlinear instability of the disordered state -----------------------

fn disordered_instability() -> Verdict {
    const TOL: f64 = 1e-3;
    let seed = [0.5f64.sqrt(), 0.0];
    let unstable = ModelParams::new(1.0, -1.0, 3.0 / 16.0, 1.0, 2).with_lambda0(1.0);
    let spec = GrowthSpec::new(&seed, 1e-6, 30.0, 0.01);
    let r = growth_rate_experiment(&unstable, &SteadyState::disordered(&unstable), &spec);
    let stable = ModelParams::new(1.0, 1.0, 1.0, 1.0, 2).with_lambda0(1.0);
    let d = growth_rate_experiment(&stable, &SteadyState::disordered(&stable), &spec);
    match (r, d) {
        (Ok(r), Ok(d)) => {
            let err = rel(r.measured, 1.0 / 16.0);
            let decays = d.measured < 0.0 && d.series.last().unwrap().1 < d.series[0].1;
            Verdict::enforced(
                err < TOL && decays,
                format!(
                    "rate={:.10} rel_err={err:.2e} (tol {TOL:.0e}) window=[{:.1},{:.1}] stable_rate={:.4} decays={decays}",
                    r.measured, r.window.0, r.window.1, d.measured
                ),
            )
        }
        (r, d) => Verdict::enforced(false, format!("experiment failed: {:?} {:?}", r.err(), d.err())),
    }
}

// ---- ordered-state witness -----------------------------------------------

fn ordered_witness() -> Verdict {
    const FORM_TOL: f64 = 1e-12;
    const RATE_TOL: f64 = 1e-2;
    let p = ModelParams::new(1.0, -1.0, -1.0, 1.0, 3).with_lambda0(1.0);
    let v = [1.0, 0.0, 0.0];
    let w = match classify_ordered(&p, &v) {
        Ok(verdict) => verdict.witness,
        Err(e) => return Verdict::enforced(false, format!("classify_ordered: {e}")),
    };
    let Some(w) = w else {
        return Verdict::enforced(false, "no witness".into());
    };
    let k2 = math::dot(&w.xi, &w.xi);
    let perp = math::dot(&w.xi, &v).abs() < 1e-12 && math::dot(&w.direction, &v).abs() < 1e-12;
    let form_err = rel(w.quadratic_form, -0.25).max(rel(k2, 0.5));
    let state = match SteadyState::ordered_with_velocity(&p, &v) {
        Ok(s) => s,
        Err(e) => return Verdict::enforced(false, format!("steady state: {e}")),
    };
    let mut spec = GrowthSpec::new(&w.xi, 1e-6, 20.0, 0.01);
    spec.direction = Some(w.direction);
    match growth_rate_experiment(&p, &state, &spec) {
        Ok(r) => {
            let err = rel(r.measured, 0.25);
            Verdict::enforced(
                perp && form_err < FORM_TOL && err < RATE_TOL,
                format!(
                    "form={:.15} |xi|^2={k2:.15} perpendicular={perp} rate={:.6} rel_err={err:.2e} (tol {RATE_TOL:.0e})",
                    w.quadratic_form, r.measured
                ),
            )
        }
        Err(e) => Verdict::enforced(false, format!("growth run: {e}")),
    }
}

// ---- product inequality --------------------------------------------------

fn scalar_field(rng: &mut ChaCha8Rng, dim: usize, integer: bool) -> SpectralMeasure {
    let atoms: Vec<Atom> = (0..rng.gen_range(1..=6))
        .map(|_| {
            let xi: Vec<f64> = (0..dim)
                .map(|_| if integer { rng.gen_range(-2i32..=2) as f64 } else { rng.gen_range(-3.0..3.0) })
                .collect();
            Atom::new(&xi, &[c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))]).unwrap()
        })
        .collect();
    SpectralMeasure::from_atoms_in(dim, 1, atoms).unwrap()
}

fn sums_distinct(u: &SpectralMeasure, v: &SpectralMeasure) -> bool {
    let mut sums: Vec<[f64; 3]> =
        u.atoms().iter().flat_map(|a| v.atoms().iter().map(move |b| math::add(a.xi3(), b.xi3()))).collect();
    sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sums.windows(2).all(|w| math::norm(&[w[0][0] - w[1][0], w[0][1] - w[1][1], w[0][2] - w[1][2]]) > 1e-6)
}

fn algebra_constant() -> Verdict {
    const EQ_TOL: f64 = 1e-13;
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut violations, mut worst_ulps, mut beyond_rounding) = (0usize, 0.0f64, 0usize);
    let (mut eq_cases, mut eq_worst) = (0usize, 0.0f64);
    for i in 0..10_000 {
        let dim = 2 + i % 2;
        let integer = i % 4 >= 2;
        let u = scalar_field(&mut rng, dim, integer);
        let v = scalar_field(&mut rng, dim, integer);
        let lhs = u.multiply(&v, ProductKind::Componentwise, 1 << 16).unwrap().fm_norm(0.0);
        let rhs = u.fm_norm(0.0) * v.fm_norm(0.0) / math::two_pi_half_pow(dim);
        if lhs > rhs {
            violations += 1;
            worst_ulps = worst_ulps.max((lhs - rhs) / (rhs * f64::EPSILON));
            // summation of up to 36 rounded terms on either side
            if lhs > rhs * (1.0 + ((u.len() * v.len()) as f64 + 8.0) * f64::EPSILON) {
                beyond_rounding += 1;
            }
        }
        if sums_distinct(&u, &v) {
            eq_cases += 1;
            eq_worst = eq_worst.max(rel(lhs, rhs));
        }
    }
    let strict = violations == 0;
    Verdict {
        pass: strict && eq_cases > 0 && eq_worst <= EQ_TOL,
        // only the rounding-aware parts are enforced
        enforced: false,
        detail: format!(
            "strict_violations={violations}/10000 max_excess={worst_ulps:.2}ulp beyond_rounding_bound={beyond_rounding} \
             equality_cases={eq_cases} equality_rel={eq_worst:.2e} (tol {EQ_TOL:.0e}) [reported, not enforced]"
        ),
    }
    .also_require(beyond_rounding == 0 && eq_cases > 0 && eq_worst <= EQ_TOL)
}

impl Verdict {
    /// For a reported-only verdict, the parts that must still hold.
    fn also_require(self, ok: bool) -> Self {
        if ok {
            self
        } else {
            Verdict { pass: false, enforced: true, detail: self.detail }
        }
    }
}

// ---- maximal regularity --------------------------------------------------

fn maxreg_constant() -> Verdict {
    const TOL: f64 = 1e-8;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for p in [1.0, 2.0, 4.0] {
        for g2 in [0.5, 1.0, 2.0] {
            for k in [0.5, 1.0, 2.0] {
                count += 1;
                match maxreg_constant_check(g2, k, p, None) {
                    Ok(r) => worst = worst.max(rel(r.numeric, r.bound)),
                    Err(_) => worst = f64::INFINITY,
                }
            }
        }
    }
    Verdict::enforced(worst < TOL && count == 27, format!("combinations={count} worst_rel={worst:.2e} (tol {TOL:.0e})"))
}

// ---- dual path -----------------------------------------------------------

fn dual_path_equivalence() -> Verdict {
    const ONE_STEP: f64 = 1e-10;
    const HUNDRED: f64 = 1e-6;
    let spec = GridSpec::new(2, 64, oracle_box_len()).unwrap().with_dealias(Dealias::StrictCubic);
    let lattice = Lattice::cubic(2, spec.spacing()).unwrap();
    let policy = TruncationPolicy::new(lattice, spec.k_max());
    let mut seed = Config::default().seed;
    seed.fm_norm = 4.0;
    seed.max_index = 3;
    let u0 = random_field(&seed, 0, &policy).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, p) in
        [("stable", ModelParams::new(1.0, 1.0, 1.0, 1.0, 2)), ("unstable", ModelParams::new(1.0, -1.0, 0.1875, 1.0, 2))]
    {
        match dual_path(&p, &SteadyState::disordered(&p), &spec, &u0, 0.05, 100) {
            Ok(r) => {
                ok &= r.first_step <= ONE_STEP && r.last_step <= HUNDRED;
                parts.push(format!(
                    "{name}: 1step={:.2e} 100steps={:.2e} nonlinear_effect={:.2e}",
                    r.first_step, r.last_step, r.nonlinear_effect
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    Verdict::enforced(ok, format!("{} (tol {ONE_STEP:.0e}/{HUNDRED:.0e})", parts.join("; ")))
}

// ---- manufactured solution -----------------------------------------------

fn mms_error(dt: f64) -> f64 {
    let p = ModelParams::new(1.0, -1.0, 3.0 / 16.0, 1.0, 2).with_lambda0(1.0);
    let s = SteadyState::disordered(&p);
    let policy = TruncationPolicy::new(Lattice::cubic(2, 0.5).unwrap(), 1.6);
    let mut traj = ModalTrajectory::new(2).unwrap();
    traj.add_hermitian_pair(&[0.5, 0.0], &[ZERO, c(0.3, 0.1)], Profile::Exp { rate: -0.1 }).unwrap();
    traj.add_hermitian_pair(&[0.5, 0.5], &[c(0.2, 0.0), c(-0.2, 0.0)], Profile::Cos { omega: 0.2, phase: 0.3 })
        .unwrap();
    let f = manufactured_forcing(traj.clone(), &p, &s, &policy).unwrap();
    let mut cfg = SimConfig::new(p, s, policy, dt, 1.0);
    cfg.sample.per_axis = 0;
    cfg.diagnostics_stride = usize::MAX;
    let out = evolve(&traj.field(0.0).unwrap(), &cfg, Some(&f)).unwrap();
    let exact = traj.field(1.0).unwrap();
    out.final_state.axpy(c(-1.0, 0.0), &exact).unwrap().fm_norm(0.0) / exact.fm_norm(0.0)
}

fn manufactured_solution() -> Verdict {
    const DRIFT: f64 = 1e-8;
    const ORDER_TOL: f64 = 0.1;
    let drift = mms_error(1e-3);
    let errs: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&dt| mms_error(dt)).collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let order_ok = orders.iter().all(|o| (o - 2.0).abs() <= ORDER_TOL);
    Verdict::enforced(
        drift < DRIFT && order_ok,
        format!("drift(dt=1e-3)={drift:.2e} (tol {DRIFT:.0e}) orders={orders:.3?} (2±{ORDER_TOL})"),
    )
}

// ---- small-data decay ----------------------------------------------------

fn small_data_decay() -> Verdict {
    let mut cfg = Config::default();
    cfg.model.gamma0 = 1.0;
    cfg.model.gamma2 = 1.0;
    cfg.model.alpha = 1.0;
    cfg.model.beta = 1.0;
    cfg.sim.t_end = 5.0;
    cfg.sim.dt = 0.01;
    cfg.sim.diagnostics_stride = 10;
    let cfg = cfg.resolve().unwrap();
    let limit = -0.9 * cfg.model.alpha;
    let policy = cfg.truncation_policy().unwrap();
    let sim = cfg.sim_config().unwrap();
    let (mut worst, mut blowups) = (f64::NEG_INFINITY, 0usize);
    for seed in 0..10 {
        let u0 = random_field(&cfg.seed, seed, &policy).unwrap();
        let traj = evolve(&u0, &sim, None).unwrap();
        if !matches!(traj.outcome, Outcome::Completed) {
            blowups += 1;
        }
        let pts: Vec<(f64, f64)> = traj.diagnostics.iter().map(|r| (r.t, r.fm_norm.ln())).collect();
        let m = pts.len() as f64;
        let tb = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let yb = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - tb) * (p.1 - yb)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - tb) * (p.0 - tb)).sum();
        worst = worst.max(sxy / sxx);
    }
    Verdict::enforced(
        worst <= limit && blowups == 0,
        format!(
            "fields=10 fm_norm={} worst_exponent={worst:.4} (limit {limit}) non_completed={blowups}",
            cfg.seed.fm_norm
        ),
    )
}

// --------------------------------------------------------------------------

fn main() {
    let criteria: [(&str, Duration, fn() -> Verdict); 10] = [
        ("dispersion_exactness", Duration::from_secs(1), dispersion_exactness),
        ("classification_trichotomy", Duration::from_secs(1), classification_trichotomy),
        ("linear_growth_rate", Duration::from_secs(5), linear_growth),
        ("disordered_nonlinear_instability", Duration::from_secs(30), disordered_instability),
        ("ordered_witness_instability", Duration::from_secs(30), ordered_witness),
        ("algebra_constant_strict", Duration::from_secs(5), algebra_constant),
        ("maxreg_constant", Duration::from_secs(1), maxreg_constant),
        ("dual_path_equivalence", Duration::from_secs(60), dual_path_equivalence),
        ("manufactured_solution", Duration::from_secs(60), manufactured_solution),
        ("small_data_decay", Duration::from_secs(60), small_data_decay),
    ];
    let mut enforced_failures = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = f();
        let took = start.elapsed();
        let in_time = took <= *budget;
        let pass = v.pass && in_time;
        if !pass && v.enforced {
            enforced_failures += 1;
        }
        println!(
            "{} {:02} {name}: {} time={:.2}s (budget {}s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    if enforced_failures > 0 {
        eprintln!("{enforced_failures} enforced criteria failed");
        std::process::exit(1);
    }
}
