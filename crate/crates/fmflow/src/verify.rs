//! Built-in verification suites. Each check reports the measured quantity,
//! its limit and the margin between them.

use std::path::Path;

use fmflow_core::dynamics::{Integrator, Lattice, LatticeField, Stepper, TruncationPolicy};
use fmflow_core::math::{self, C64};
use fmflow_core::symbols::{
    classify_disordered, classify_ordered, critical_wavenumbers, dispersion_disordered, maxreg_constant_check,
    propagator, sectoriality_scan, SamplingSpec,
};
use fmflow_core::{Atom, ModelParams, ProductKind, SpectralMeasure, StabilityClass, SteadyState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::formats::referenced_manifest;
use crate::grid::{brute_force_product, lift, Dealias, GridField, GridSpec, GridStepper};
use crate::seedgen::random_field;
use crate::{config, manifest, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Algebra,
    Symbols,
    Maxreg,
    Oracle,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "algebra" => Suite::Algebra,
            "symbols" => Suite::Symbols,
            "maxreg" => Suite::Maxreg,
            "oracle" => Suite::Oracle,
            "all" => Suite::All,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Symbols => "symbols",
            Suite::Maxreg => "maxreg",
            Suite::Oracle => "oracle",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub pass: bool,
    pub value: f64,
    pub limit: f64,
    /// `limit` is a lower bound instead of an upper one.
    pub at_least: bool,
}

impl Check {
    pub fn upper(suite: &'static str, name: &'static str, value: f64, limit: f64) -> Self {
        Check { suite, name, pass: value <= limit, value, limit, at_least: false }
    }

    pub fn lower(suite: &'static str, name: &'static str, value: f64, limit: f64) -> Self {
        Check { suite, name, pass: value >= limit, value, limit, at_least: true }
    }

    pub fn margin(&self) -> f64 {
        if self.at_least {
            self.value - self.limit
        } else {
            self.limit - self.value
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}.{} value={:.3e} limit={:.3e} margin={:.3e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.value,
            self.limit,
            self.margin()
        )
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

fn random_atoms(rng: &mut ChaCha8Rng, dim: usize, count: usize, integer: bool) -> SpectralMeasure {
    let atoms = (0..count)
        .map(|_| {
            let xi: Vec<f64> = (0..dim)
                .map(|_| if integer { rng.gen_range(-2i32..=2) as f64 } else { rng.gen_range(-3.0..3.0) })
                .collect();
            let c = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            Atom::new(&xi, &[c]).expect("finite atom")
        })
        .collect();
    SpectralMeasure::from_atoms_in(dim, 1, atoms).expect("consistent atoms")
}

fn sums_distinct(u: &SpectralMeasure, v: &SpectralMeasure) -> bool {
    let mut sums: Vec<[f64; 3]> =
        u.atoms().iter().flat_map(|a| v.atoms().iter().map(move |b| math::add(a.xi3(), b.xi3()))).collect();
    sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sums.windows(2).all(|w| {
        let d = [w[0][0] - w[1][0], w[0][1] - w[1][1], w[0][2] - w[1][2]];
        math::norm(&d) > 1e-6
    })
}

/// Random scalar atom pairs for the product inequality, half of them with
/// integer wavevectors so that output atoms collide.
pub fn product_cases(seed: u64, count: usize) -> Vec<(SpectralMeasure, SpectralMeasure)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let dim = 2 + (i % 2);
            let integer = i % 4 >= 2;
            let (na, nb) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
            (random_atoms(&mut rng, dim, na, integer), random_atoms(&mut rng, dim, nb, integer))
        })
        .collect()
}

pub fn algebra_suite(seed: u64) -> Vec<Check> {
    const S: &str = "algebra";
    let cases = product_cases(seed, 4000);
    let stats: Vec<(f64, Option<f64>)> = cases
        .par_iter()
        .map(|(u, v)| {
            let lhs = u.multiply(v, ProductKind::Componentwise, 1 << 16).expect("small product").fm_norm(0.0);
            let rhs = u.fm_norm(0.0) * v.fm_norm(0.0) / math::two_pi_half_pow(u.dim());
            let eval_bound = rhs * (1.0 + ((u.len() * v.len()) as f64 + 8.0) * f64::EPSILON);
            let eq = sums_distinct(u, v).then(|| rel(lhs, rhs));
            (lhs / eval_bound - 1.0, eq)
        })
        .collect();
    let worst = stats.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let eq_err = stats.iter().filter_map(|s| s.1).fold(0.0, f64::max);
    let eq_cases = stats.iter().filter(|s| s.1.is_some()).count();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut restrict_err: f64 = 0.0;
    let mut proj_err: f64 = 0.0;
    let mut mult_gap: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.gen_range(2..=3);
        let atoms: Vec<Atom> = (0..rng.gen_range(1..8))
            .map(|_| {
                let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let c: Vec<C64> =
                    (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
                Atom::new(&xi, &c).unwrap()
            })
            .collect();
        let u = SpectralMeasure::from_atoms_in(n, n, atoms).unwrap();
        // (μ⌊ψ)⌊φ = μ⌊(φψ) for two scalar symbols
        let psi = |x: &[f64]| 1.0 / (1.0 + x.iter().map(|y| y * y).sum::<f64>());
        let phi = |x: &[f64]| x.iter().map(|y| y.cos()).sum::<f64>();
        let scal = fmflow_core::measure::SymbolMatrix::real_scalar;
        let a = u.restrict(|x| Some(scal(psi(x)))).unwrap().restrict(|x| Some(scal(phi(x)))).unwrap();
        let b = u.restrict(|x| Some(scal(phi(x) * psi(x)))).unwrap();
        let d = a.axpy(C64::new(-1.0, 0.0), &b).unwrap();
        restrict_err = restrict_err.max(d.mass() / u.mass().max(1e-300));
        // Helmholtz projection is idempotent and lands in divergence-free fields
        let p = fmflow_core::symbols::project_solenoidal(&u, fmflow_core::symbols::OriginPolicy::Keep).unwrap();
        let pp = fmflow_core::symbols::project_solenoidal(&p, fmflow_core::symbols::OriginPolicy::Keep).unwrap();
        let d = pp.axpy(C64::new(-1.0, 0.0), &p).unwrap();
        proj_err = proj_err.max(d.mass() / u.mass().max(1e-300)).max(p.max_divergence_ratio());
        // multiplier norm: ‖μ⌊ψ‖ ≤ sup|ψ| ‖μ‖
        let r = u.restrict(|x| Some(scal(phi(x)))).unwrap();
        let sup = u.atoms().iter().map(|a| phi(a.xi()).abs()).fold(0.0, f64::max);
        mult_gap = mult_gap.max(r.mass() - sup * u.mass() * (1.0 + 1e-15));
    }
    vec![
        Check::upper(S, "product_bound_eval", worst, 0.0),
        Check::upper(S, "product_equality_distinct", eq_err, 1e-13),
        Check::lower(S, "equality_cases_found", eq_cases as f64, 1.0),
        Check::upper(S, "restriction_composition", restrict_err, 1e-14),
        Check::upper(S, "helmholtz_idempotent_solenoidal", proj_err, 1e-14),
        Check::upper(S, "multiplier_norm_bound", mult_gap, 0.0),
    ]
}

/// Expected class from the closed-form conditions, on grid indices of the
/// default sweep: `Γ₀ = (i−50)/25`, `α = (3j−100)/100`, `Γ₂ = 1`. Works in
/// integers so that no rounding is involved.
pub fn grid_class_oracle(i: i64, j: i64) -> StabilityClass {
    let m = i - 50;
    let four_alpha = 75 * j - 2500; // 625·4α
    let g0_sq = m * m; // 625·Γ₀²
    if m < 0 {
        match four_alpha.cmp(&g0_sq) {
            std::cmp::Ordering::Greater => StabilityClass::ExponentiallyStable,
            std::cmp::Ordering::Equal => StabilityClass::AsymptoticallyStable,
            std::cmp::Ordering::Less => StabilityClass::ExponentiallyUnstable,
        }
    } else {
        match (3 * j - 100).cmp(&0) {
            std::cmp::Ordering::Greater => StabilityClass::ExponentiallyStable,
            std::cmp::Ordering::Equal => StabilityClass::AsymptoticallyStable,
            std::cmp::Ordering::Less => StabilityClass::ExponentiallyUnstable,
        }
    }
}

pub fn symbols_suite(seed: u64) -> Vec<Check> {
    const S: &str = "symbols";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disp_err: f64 = 0.0;
    let mut root_err: f64 = 0.0;
    let mut witness_err: f64 = 0.0;
    for _ in 0..1000 {
        let g2 = rng.gen_range(0.1..3.0);
        let g0 = rng.gen_range(-3.0..3.0);
        let a = rng.gen_range(-2.0..2.0);
        let k: f64 = rng.gen_range(0.0..3.0);
        let p = ModelParams::new(g2, g0, a, 1.0, 2);
        let s = k * k;
        let oracle = -(a + s * (g0 + s * g2));
        disp_err = disp_err.max(rel(dispersion_disordered(k, &p), oracle));
        let disc = g0 * g0 - 4.0 * a * g2;
        if let (Some((lo, hi)), true) = (critical_wavenumbers(&p).band, disc > 0.0) {
            let r1 = (-g0 - disc.sqrt()) / (2.0 * g2);
            let r2 = (-g0 + disc.sqrt()) / (2.0 * g2);
            let scale = r2.abs().max(1.0);
            root_err = root_err.max((hi - r2).abs() / scale).max((lo - r1.max(0.0)).abs() / scale);
        }
        if g0 < 0.0 {
            let po = ModelParams::new(g2, g0, -a.abs() - 0.1, 1.0, 2);
            let v = [(a.abs() + 0.1).sqrt(), 0.0];
            let w = classify_ordered(&po, &v).unwrap().witness.unwrap();
            witness_err = witness_err.max(rel(w.quadratic_form, -g0 * g0 / (4.0 * g2)));
        }
    }

    let mut mismatches = 0usize;
    for i in 0..=100i64 {
        for j in 0..=100i64 {
            let g0 = -2.0 + 4.0 * i as f64 / 100.0;
            let a = -1.0 + 3.0 * j as f64 / 100.0;
            let v = classify_disordered(&ModelParams::new(1.0, g0, a, 1.0, 2));
            mismatches += (v.class != grid_class_oracle(i, j)) as usize;
        }
    }
    let boundary = [(-1.0, 0.25), (-2.0, 1.0), (-0.5, 0.0625), (0.0, 0.0), (1.0, 0.0)];
    let bad_boundary = boundary
        .iter()
        .filter(|(g0, a)| {
            classify_disordered(&ModelParams::new(1.0, *g0, *a, 1.0, 2)).class != StabilityClass::AsymptoticallyStable
        })
        .count();

    let params = ModelParams::new(1.0, -1.0, -1.0, 1.0, 3).with_lambda0(0.7);
    let state = SteadyState::ordered(&params, &[0.3, 0.4, 0.5]).unwrap();
    let mut semigroup: f64 = 0.0;
    for _ in 0..100 {
        let xi = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let h = rng.gen_range(0.01..0.5);
        let one = propagator(&xi, h, &params, &state).unwrap();
        let two = propagator(&xi, 2.0 * h, &params, &state).unwrap();
        let sq = one.compose(&one);
        let mut d = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                d += (sq.data[r][c] - two.data[r][c]).norm_sqr();
            }
        }
        semigroup = semigroup.max(d.sqrt() / two.frobenius().max(1e-300));
    }

    let stable = ModelParams::new(1.0, 1.0, 1.0, 1.0, 2);
    let sector = sectoriality_scan(&stable, &SteadyState::disordered(&stable), &SamplingSpec::default());

    vec![
        Check::upper(S, "dispersion_vs_horner", disp_err, 1e-14),
        Check::upper(S, "crossings_vs_quadratic_roots", root_err, 1e-12),
        Check::upper(S, "trichotomy_grid_mismatches", mismatches as f64, 0.0),
        Check::upper(S, "boundary_asym_stable", bad_boundary as f64, 0.0),
        Check::upper(S, "ordered_witness_form", witness_err, 1e-14),
        Check::upper(S, "propagator_semigroup", semigroup, 1e-12),
        Check::upper(S, "sectorial_shift", sector.omega.unwrap_or(f64::INFINITY), SamplingSpec::default().omega_max),
    ]
}

pub fn maxreg_suite() -> Vec<Check> {
    const S: &str = "maxreg";
    let mut worst: f64 = 0.0;
    for p in [1.0, 2.0, 4.0] {
        for g2 in [0.5, 1.0, 2.0] {
            for k in [0.5, 1.0, 2.0] {
                let c = maxreg_constant_check(g2, k, p, None).expect("valid arguments");
                worst = worst.max(rel(c.numeric, c.bound));
            }
        }
    }
    let eq = maxreg_constant_check(1.0, 1.0, 1.0, None).expect("valid arguments");
    let finite = maxreg_constant_check(1.0, 1.0, 1.0, Some(3.0)).expect("valid arguments");
    vec![
        Check::upper(S, "closed_form_27_cases", worst, 1e-8),
        Check::upper(S, "p1_equality_infinite_horizon", rel(eq.numeric, eq.bound), 1e-12),
        Check::upper(S, "finite_horizon_below_bound", finite.numeric - finite.bound, 0.0),
    ]
}

/// Result of running the atom-lattice and grid paths side by side.
#[derive(Debug, Clone)]
pub struct DualPath {
    /// Relative sup-norm difference after the first step.
    pub first_step: f64,
    /// Relative sup-norm difference after the last step.
    pub last_step: f64,
    pub steps: usize,
    pub atoms: usize,
    /// Relative sup-norm distance between the nonlinear and the linearized
    /// grid trajectories, i.e. how much the nonlinear terms mattered.
    pub nonlinear_effect: f64,
    pub grid: GridField,
}

/// Box whose lattice spacing `2π/L` is `1/(2√2)`, the default truncation
/// lattice, so that `k² = 1/2` sits on index 2.
pub fn oracle_box_len() -> f64 {
    2.0 * math::PI * 2.0 * std::f64::consts::SQRT_2
}

fn rel_sup_diff(a: &GridField, b: &GridField, fft: &crate::grid::GridFft) -> f64 {
    let mut d = a.clone();
    for (x, y) in d.data.iter_mut().zip(&b.data) {
        for (p, q) in x.iter_mut().zip(y) {
            *p -= q;
        }
    }
    d.sup_norm(fft) / a.sup_norm(fft).max(1e-300)
}

/// Integrates `u0` with ETD2RK on both paths. The atom path uses the grid
/// lattice and the grid's dealias radius as its truncation ball.
pub fn dual_path(
    params: &ModelParams,
    state: &SteadyState,
    spec: &GridSpec,
    u0: &SpectralMeasure,
    dt: f64,
    steps: usize,
) -> Result<DualPath, CliError> {
    let lattice = Lattice::cubic(spec.dim, spec.spacing())?;
    let mut policy = TruncationPolicy::new(lattice, spec.k_max());
    policy.origin_policy = spec.origin_policy;
    let mut integ = Integrator::new(*params, *state, policy, Stepper::Etd2Rk, true)?;
    let mut gs = GridStepper::new(spec, *params, *state, Stepper::Etd2Rk, true);
    let mut gl = GridStepper::new(spec, *params, *state, Stepper::Etd2Rk, false);

    let mut ua = LatticeField::from_measure(u0, lattice)?;
    ua.truncate(&policy)?;
    let mut ug = lift(&ua.to_measure(), spec)?;
    let mut ul = ug.clone();
    let (mut first, mut last) = (0.0, 0.0);
    let mut t = 0.0;
    for s in 1..=steps {
        ua = integ.step(&ua, t, dt, None)?;
        ug = gs.step(&ug, dt, None)?;
        ul = gl.step(&ul, dt, None)?;
        t += dt;
        if s == 1 || s == steps {
            let la = lift(&ua.to_measure(), spec)?;
            let e = rel_sup_diff(&ug, &la, gs.fft());
            if s == 1 {
                first = e;
            }
            last = e;
        }
    }
    let nonlinear_effect = rel_sup_diff(&ug, &ul, gs.fft());
    Ok(DualPath { first_step: first, last_step: last, steps, atoms: ua.keys().len(), nonlinear_effect, grid: ug })
}

/// Every file in `dir` other than the manifests must reference the hash of
/// one of the manifests present. Returns the number of offending files.
pub fn preflight(dir: &Path) -> Result<(usize, Vec<String>), CliError> {
    if !dir.exists() {
        return Ok((0, Vec::new()));
    }
    let mut hashes = Vec::new();
    let mut files = Vec::new();
    for e in std::fs::read_dir(dir)? {
        let e = e?;
        if !e.file_type()?.is_file() {
            continue;
        }
        let name = e.file_name().to_string_lossy().into_owned();
        if manifest::is_manifest_name(&name) {
            if let Some(h) = manifest::read_hash(&e.path()) {
                hashes.push(h);
            }
        } else {
            files.push(e.path());
        }
    }
    files.sort();
    let mut bad = Vec::new();
    for f in files {
        let mut head = vec![0u8; 4096];
        let n = {
            use std::io::Read;
            std::fs::File::open(&f)?.read(&mut head)?
        };
        let text = String::from_utf8_lossy(&head[..n]);
        match referenced_manifest(&text) {
            Some(h) if hashes.contains(&h) => {}
            _ => bad.push(f.file_name().unwrap().to_string_lossy().into_owned()),
        }
    }
    Ok((bad.len(), bad))
}

/// Cross-checks of the grid oracle against the atom path, on the
/// configured seed.
pub fn oracle_suite(cfg: &config::Config) -> Result<(Vec<Check>, Option<GridField>), CliError> {
    const S: &str = "oracle";
    let seed = cfg.seed.value;
    let spec = GridSpec::new(2, 64, oracle_box_len())?.with_dealias(Dealias::StrictCubic);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // lift then sample vs direct evaluation
    let small = GridSpec::new(2, 16, oracle_box_len())?;
    let mut atoms = Vec::new();
    for _ in 0..10 {
        let m = [rng.gen_range(-3i32..=3), rng.gen_range(-3i32..=3)];
        let xi = [m[0] as f64 * small.spacing(), m[1] as f64 * small.spacing()];
        let c = [C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))];
        if m != [0, 0] {
            atoms.push(Atom::new(&xi, &c)?);
        }
    }
    let u = SpectralMeasure::from_atoms_in(2, 1, atoms)?;
    let g = lift(&u, &small)?;
    let fft = crate::grid::GridFft::new(&small);
    let phys = g.sample(&fft);
    let pts: Vec<[f64; 3]> = (0..small.len()).map(|j| small.point(j)).collect();
    let refs: Vec<&[f64]> = pts.iter().map(|p| &p[..2]).collect();
    let direct = u.evaluate(&refs)?;
    let lift_err =
        (0..small.len()).map(|j| (phys[0][j] - direct.value(j)[0]).norm()).fold(0.0, f64::max) / direct.sup_norm();

    // brute-force product vs multiply
    let v = u.clone();
    let bf = brute_force_product(&u, &v, &small)?;
    let prod = u.multiply(&v, ProductKind::Componentwise, 1 << 16)?;
    let lifted = lift_unchecked(&prod, &small)?;
    let prod_err = bf.data[0].iter().zip(&lifted.data[0]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
        / prod.max_amplitude().max(1e-300);

    let mut checks = vec![
        Check::upper(S, "lift_vs_evaluate", lift_err, 1e-12),
        Check::upper(S, "brute_force_product", prod_err, 1e-12),
    ];
    let mut last_grid = None;
    let mut seed_cfg = cfg.seed.clone();
    seed_cfg.fm_norm = 4.0;
    seed_cfg.max_index = 3;
    let lattice = Lattice::cubic(2, spec.spacing())?;
    let policy = TruncationPolicy::new(lattice, spec.k_max());
    let u0 = random_field(&seed_cfg, seed, &policy)?;
    for (names, p) in [
        (
            ["dual_path_stable_1_step", "dual_path_stable_100_steps", "dual_path_stable_nonlinear_effect"],
            ModelParams::new(1.0, 1.0, 1.0, 1.0, 2),
        ),
        (
            ["dual_path_unstable_1_step", "dual_path_unstable_100_steps", "dual_path_unstable_nonlinear_effect"],
            ModelParams::new(1.0, -1.0, 0.1875, 1.0, 2),
        ),
    ] {
        let state = SteadyState::disordered(&p);
        let r = dual_path(&p, &state, &spec, &u0, 0.05, 100)?;
        checks.push(Check::upper(S, names[0], r.first_step, 1e-10));
        checks.push(Check::upper(S, names[1], r.last_step, 1e-6));
        checks.push(Check::lower(S, names[2], r.nonlinear_effect, 1e-2));
        last_grid = Some(r.grid);
    }
    Ok((checks, last_grid))
}

fn lift_unchecked(u: &SpectralMeasure, spec: &GridSpec) -> Result<GridField, CliError> {
    let mut s = *spec;
    s.dealias = Dealias::IndexRadius(spec.n as f64);
    s.origin_policy = fmflow_core::symbols::OriginPolicy::Keep;
    Ok(lift(u, &s)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_oracle_matches_float_formula_away_from_ties() {
        assert_eq!(grid_class_oracle(25, 100), StabilityClass::ExponentiallyStable);
        assert_eq!(grid_class_oracle(0, 0), StabilityClass::ExponentiallyUnstable);
        assert_eq!(grid_class_oracle(75, 50), StabilityClass::ExponentiallyStable);
    }

    #[test]
    fn fast_suites_pass() {
        for c in algebra_suite(0).into_iter().chain(maxreg_suite()) {
            assert!(c.pass, "{}", c.line());
        }
    }

    #[test]
    fn symbols_suite_passes() {
        for c in symbols_suite(1) {
            assert!(c.pass, "{}", c.line());
        }
    }
}
