//! Periodic-box pseudospectral solver for the transformed system, used as an
//! independent oracle for the atom-lattice path.
//!
//! A grid field stores the coefficients `c_m` of `u(x) = Σ_m c_m e^{iξ_m·x}`
//! with `ξ_m = (2π/L)m`, `m ∈ [−N/2, N/2)ⁿ`. Nonlinear terms are formed in
//! physical space, transformed back, dealiased and projected.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::Arc;

use fmflow_core::dynamics::{Forcing, Stepper};
use fmflow_core::etd::{StepFn, StructuredFn};
use fmflow_core::math::{self, CVec, RMat, RVec, C64, ZERO};
use fmflow_core::symbols::{LinearPart, OriginPolicy};
use fmflow_core::{Atom, ModelParams, SpectralMeasure, SteadyState, SteadyStateKind};
use rustfft::{Fft, FftPlanner};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GridError {
    #[error("atom at xi={xi:?} is not on the grid lattice")]
    OffGrid { xi: Vec<f64> },
    #[error("atom at xi={xi:?} lies outside the dealias radius")]
    OutsideDealias { xi: Vec<f64> },
    #[error("product range exceeds the grid (aliasing)")]
    Aliasing,
    #[error("invalid grid: {0}")]
    Invalid(&'static str),
    #[error(transparent)]
    Core(#[from] fmflow_core::Error),
}

pub type GridResult<T> = Result<T, GridError>;

/// Which modes survive a nonlinear evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dealias {
    /// `|m| ≤ N/3`: exact for quadratic terms, aliased for cubic ones.
    TwoThirds,
    /// `|m| < N/4`: exact for cubic terms.
    StrictCubic,
    /// Explicit Euclidean index radius.
    IndexRadius(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dim: usize,
    /// Points per axis, a power of two.
    pub n: usize,
    /// Box length per axis.
    pub box_len: f64,
    pub dealias: Dealias,
    pub origin_policy: OriginPolicy,
}

impl GridSpec {
    pub fn new(dim: usize, n: usize, box_len: f64) -> GridResult<Self> {
        let spec = GridSpec { dim, n, box_len, dealias: Dealias::TwoThirds, origin_policy: OriginPolicy::Drop };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_dealias(mut self, d: Dealias) -> Self {
        self.dealias = d;
        self
    }

    pub fn validate(&self) -> GridResult<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(GridError::Invalid("dimension must be 2 or 3"));
        }
        if self.n < 4 || !self.n.is_power_of_two() {
            return Err(GridError::Invalid("resolution must be a power of two ≥ 4"));
        }
        if !(self.box_len > 0.0 && self.box_len.is_finite()) {
            return Err(GridError::Invalid("box length must be positive"));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * math::PI / self.box_len
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `|m|² ≤ K²` test for the dealias radius.
    pub fn keeps(&self, m: &[i64; 3]) -> bool {
        let r2 = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64;
        if r2 == 0.0 && self.origin_policy == OriginPolicy::Drop {
            return false;
        }
        let n = self.n as f64;
        match self.dealias {
            Dealias::TwoThirds => 9.0 * r2 <= n * n,
            Dealias::StrictCubic => 16.0 * r2 < n * n,
            Dealias::IndexRadius(k) => r2 <= k * k,
        }
    }

    /// Largest wavenumber kept by the dealias rule.
    pub fn k_max(&self) -> f64 {
        let n = self.n as f64;
        let k = match self.dealias {
            Dealias::TwoThirds => n / 3.0,
            // integer |m|² is kept iff it is at most N²/16 − 1
            Dealias::StrictCubic => (n * n / 16.0 - 0.5).sqrt(),
            Dealias::IndexRadius(k) => k,
        };
        k * self.spacing()
    }

    pub fn mode(&self, flat: usize) -> [i64; 3] {
        let mut m = [0i64; 3];
        let mut r = flat;
        for d in (0..self.dim).rev() {
            let i = (r % self.n) as i64;
            r /= self.n;
            m[d] = if i < (self.n / 2) as i64 { i } else { i - self.n as i64 };
        }
        m
    }

    pub fn flat(&self, m: &[i64; 3]) -> Option<usize> {
        let half = (self.n / 2) as i64;
        let mut idx = 0usize;
        for &mi in m.iter().take(self.dim) {
            if mi < -half || mi >= half {
                return None;
            }
            let i = if mi < 0 { mi + self.n as i64 } else { mi };
            idx = idx * self.n + i as usize;
        }
        Some(idx)
    }

    pub fn wavevector(&self, m: &[i64; 3]) -> RVec {
        let s = self.spacing();
        [m[0] as f64 * s, m[1] as f64 * s, m[2] as f64 * s]
    }

    /// Grid point coordinates `x_j = L j / N`.
    pub fn point(&self, flat: usize) -> RVec {
        let mut x = [0.0; 3];
        let mut r = flat;
        for d in (0..self.dim).rev() {
            x[d] = self.box_len * (r % self.n) as f64 / self.n as f64;
            r /= self.n;
        }
        x
    }

    fn locate(&self, xi: &[f64]) -> GridResult<[i64; 3]> {
        let s = self.spacing();
        let mut m = [0i64; 3];
        for (d, &x) in xi.iter().enumerate() {
            let c = x / s;
            let r = c.round();
            if (c - r).abs() > 1e-12 * (1.0 + r.abs()) {
                return Err(GridError::OffGrid { xi: xi.to_vec() });
            }
            m[d] = r as i64;
        }
        Ok(m)
    }
}

/// n-dimensional FFT over a cubic grid, one axis at a time.
#[derive(Clone)]
pub struct GridFft {
    dim: usize,
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for GridFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GridFft({}^{})", self.n, self.dim)
    }
}

impl GridFft {
    pub fn new(spec: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        GridFft {
            dim: spec.dim,
            n: spec.n,
            fwd: planner.plan_fft_forward(spec.n),
            inv: planner.plan_fft_inverse(spec.n),
        }
    }

    fn run(&self, data: &mut [C64], inverse: bool) {
        let plan = if inverse { &self.inv } else { &self.fwd };
        let n = self.n;
        let mut line = vec![ZERO; n];
        let mut scratch = vec![ZERO; plan.get_inplace_scratch_len()];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let block = stride * n;
            for base in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    for (i, z) in line.iter_mut().enumerate() {
                        *z = data[base + off + i * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (i, z) in line.iter().enumerate() {
                        data[base + off + i * stride] = *z;
                    }
                }
            }
        }
    }

    /// Coefficients → physical values (unnormalized inverse DFT).
    pub fn to_physical(&self, coeffs: &[C64]) -> Vec<C64> {
        let mut d = coeffs.to_vec();
        self.run(&mut d, true);
        d
    }

    /// Physical values → coefficients.
    pub fn to_spectral(&self, values: &[C64]) -> Vec<C64> {
        let mut d = values.to_vec();
        self.run(&mut d, false);
        let scale = 1.0 / d.len() as f64;
        for z in d.iter_mut() {
            *z *= scale;
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub spec: GridSpec,
    pub components: usize,
    /// One coefficient array per component, in FFT order.
    pub data: Vec<Vec<C64>>,
    pub t: f64,
}

impl GridField {
    pub fn zeros(spec: GridSpec, components: usize) -> Self {
        GridField { spec, components, data: vec![vec![ZERO; spec.len()]; components], t: 0.0 }
    }

    /// Coefficient vector at mode index `flat`.
    pub fn coeff(&self, flat: usize) -> CVec {
        let mut c = [ZERO; 3];
        for (k, comp) in self.data.iter().enumerate() {
            c[k] = comp[flat];
        }
        c
    }

    fn set(&mut self, flat: usize, c: &CVec) {
        for (k, comp) in self.data.iter_mut().enumerate() {
            comp[flat] = c[k];
        }
    }

    /// Physical-space values of every component at the grid points.
    pub fn sample(&self, fft: &GridFft) -> Vec<Vec<C64>> {
        self.data.iter().map(|c| fft.to_physical(c)).collect()
    }

    pub fn sup_norm(&self, fft: &GridFft) -> f64 {
        let phys = self.sample(fft);
        (0..self.spec.len()).map(|j| phys.iter().map(|p| p[j].norm_sqr()).sum::<f64>().sqrt()).fold(0.0, f64::max)
    }

    /// Mean of `|u|²` over the box (Parseval).
    pub fn energy(&self) -> f64 {
        self.data.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn fm_norm(&self) -> f64 {
        let mass: f64 = (0..self.spec.len()).map(|j| math::cnorm(&self.coeff(j))).sum();
        math::two_pi_half_pow(self.spec.dim) * mass
    }

    /// Nonzero bins as a measure.
    pub fn to_measure(&self) -> GridResult<SpectralMeasure> {
        let n = self.spec.dim;
        let mut atoms = Vec::new();
        for j in 0..self.spec.len() {
            let c = self.coeff(j);
            if math::cnorm(&c) == 0.0 {
                continue;
            }
            let xi = self.spec.wavevector(&self.spec.mode(j));
            atoms.push(Atom::new(&xi[..n], &c[..self.components])?);
        }
        Ok(SpectralMeasure::from_atoms_in(n, self.components, atoms)?)
    }

    /// Zeroes every mode outside the dealias radius.
    pub fn dealias(&mut self) {
        let spec = self.spec;
        for j in 0..spec.len() {
            if !spec.keeps(&spec.mode(j)) {
                self.set(j, &[ZERO; 3]);
            }
        }
    }

    /// Largest coefficient norm outside the dealias radius.
    pub fn max_outside(&self) -> f64 {
        (0..self.spec.len())
            .filter(|&j| !self.spec.keeps(&self.spec.mode(j)))
            .map(|j| math::cnorm(&self.coeff(j)))
            .fold(0.0, f64::max)
    }
}

fn bin(u: &SpectralMeasure, spec: &GridSpec, check_radius: bool) -> GridResult<GridField> {
    spec.validate()?;
    if u.dim() != spec.dim {
        return Err(fmflow_core::Error::DimensionMismatch { expected: spec.dim, found: u.dim() }.into());
    }
    let mut g = GridField::zeros(*spec, u.components());
    for a in u.atoms() {
        let m = spec.locate(a.xi())?;
        if check_radius && !spec.keeps(&m) && !(m == [0, 0, 0] && spec.origin_policy == OriginPolicy::Drop) {
            return Err(GridError::OutsideDealias { xi: a.xi().to_vec() });
        }
        let j = spec.flat(&m).ok_or_else(|| GridError::OutsideDealias { xi: a.xi().to_vec() })?;
        let c = math::cvec(a.coeff());
        let prev = g.coeff(j);
        g.set(j, &math::cadd(&prev, &c));
    }
    Ok(g)
}

/// Places each atom in its grid bin. Atoms must be on the grid lattice and
/// inside the dealias radius (origin atoms are dropped under `Drop`).
pub fn lift(u: &SpectralMeasure, spec: &GridSpec) -> GridResult<GridField> {
    let mut g = bin(u, spec, true)?;
    if spec.origin_policy == OriginPolicy::Drop {
        g.set(0, &[ZERO; 3]);
    }
    Ok(g)
}

/// Pointwise product computed in physical space. Requires every pairwise
/// index sum to stay inside `[−N/2, N/2)` so that nothing aliases.
pub fn brute_force_product(u: &SpectralMeasure, v: &SpectralMeasure, spec: &GridSpec) -> GridResult<GridField> {
    let gu = bin(u, spec, false)?;
    let gv = bin(v, spec, false)?;
    let half = (spec.n / 2) as i64;
    let reach = |g: &GridField| {
        let mut r = [0i64; 3];
        for j in 0..spec.len() {
            if math::cnorm(&g.coeff(j)) != 0.0 {
                let m = spec.mode(j);
                for d in 0..3 {
                    r[d] = r[d].max(m[d].abs());
                }
            }
        }
        r
    };
    let (ru, rv) = (reach(&gu), reach(&gv));
    if (0..3).any(|d| ru[d] + rv[d] >= half) {
        return Err(GridError::Aliasing);
    }
    let comps = match (u.components(), v.components()) {
        (a, b) if a == b => a,
        (1, b) => b,
        (a, 1) => a,
        (a, b) => return Err(fmflow_core::Error::ComponentMismatch { expected: a, found: b }.into()),
    };
    let fft = GridFft::new(spec);
    let pu = gu.sample(&fft);
    let pv = gv.sample(&fft);
    let mut out = GridField::zeros(*spec, comps);
    for k in 0..comps {
        let a = &pu[if u.components() == 1 { 0 } else { k }];
        let b = &pv[if v.components() == 1 { 0 } else { k }];
        let prod: Vec<C64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
        out.data[k] = fft.to_spectral(&prod);
    }
    Ok(out)
}

fn project_mode(spec: &GridSpec, m: &[i64; 3], c: &CVec) -> CVec {
    let xi = spec.wavevector(m);
    let k2 = math::dot(&xi, &xi);
    if k2 == 0.0 {
        return *c;
    }
    let p = math::rcdot(&xi, c) / k2;
    [c[0] - p * xi[0], c[1] - p * xi[1], c[2] - p * xi[2]]
}

/// Physical-space bracket `β|u|²u + λ₀(u·∇)u − N(u)` at every grid point.
fn physical_bracket(u: &GridField, params: &ModelParams, state: &SteadyState, fft: &GridFft) -> Vec<Vec<C64>> {
    let spec = u.spec;
    let n = spec.dim;
    let len = spec.len();
    let phys = u.sample(fft);
    let mut s = vec![ZERO; len];
    for p in &phys {
        for (sj, x) in s.iter_mut().zip(p) {
            *sj += x * x;
        }
    }
    let mut out: Vec<Vec<C64>> =
        phys.iter().map(|p| p.iter().zip(&s).map(|(x, sj)| x * sj * params.beta).collect()).collect();
    if params.lambda0 != 0.0 {
        for l in 0..n {
            for i in 0..n {
                let d: Vec<C64> =
                    (0..len).map(|j| u.data[i][j] * C64::new(0.0, spec.wavevector(&spec.mode(j))[l])).collect();
                let dp = fft.to_physical(&d);
                for j in 0..len {
                    out[i][j] += phys[l][j] * dp[j] * params.lambda0;
                }
            }
        }
    }
    if state.kind == SteadyStateKind::Ordered {
        let v = state.v;
        let b = state.beta;
        for j in 0..len {
            let w: C64 = (0..n).map(|i| phys[i][j] * v[i]).sum();
            for i in 0..n {
                out[i][j] += s[j] * (b * v[i]) + w * phys[i][j] * (2.0 * b);
            }
        }
    }
    out
}

/// `H(u)` evaluated pseudospectrally, dealiased and projected.
pub fn grid_nonlinearity(u: &GridField, params: &ModelParams, state: &SteadyState, fft: &GridFft) -> GridField {
    let spec = u.spec;
    let bracket = physical_bracket(u, params, state, fft);
    let mut h = GridField::zeros(spec, u.components);
    for (k, b) in bracket.iter().enumerate() {
        h.data[k] = fft.to_spectral(b);
    }
    for j in 0..spec.len() {
        let m = spec.mode(j);
        let c = if spec.keeps(&m) { project_mode(&spec, &m, &h.coeff(j)) } else { [ZERO; 3] };
        h.set(j, &c);
    }
    h
}

/// Gradient part `∇q` of the momentum balance and `q`, by a Poisson solve
/// on the box.
pub fn grid_pressure(
    u: &GridField,
    params: &ModelParams,
    state: &SteadyState,
    fft: &GridFft,
) -> (GridField, GridField) {
    let spec = u.spec;
    let n = spec.dim;
    let mut bracket = physical_bracket(u, params, state, fft);
    // −(bracket + Mu) → N − λ₀(u·∇)u − Mu − β|u|²u
    let phys = u.sample(fft);
    for j in 0..spec.len() {
        for i in 0..n {
            let mu: C64 = (0..n).map(|k| phys[k][j] * state.m[i][k]).sum();
            bracket[i][j] = -(bracket[i][j] + mu);
        }
    }
    let mut grad = GridField::zeros(spec, n);
    let mut q = GridField::zeros(spec, 1);
    let spectral: Vec<Vec<C64>> = bracket.iter().map(|b| fft.to_spectral(b)).collect();
    for j in 1..spec.len() {
        let xi = spec.wavevector(&spec.mode(j));
        let k2 = math::dot(&xi, &xi);
        let c: CVec = std::array::from_fn(|i| if i < n { spectral[i][j] } else { ZERO });
        let p = math::rcdot(&xi, &c) / k2;
        for i in 0..n {
            grad.data[i][j] = p * xi[i];
        }
        q.data[0][j] = C64::new(0.0, -1.0) * p;
    }
    (grad, q)
}

#[derive(Debug, Clone, Copy)]
struct ModeCoeffs {
    r: RMat,
    e: StructuredFn,
    p1: StructuredFn,
    p2: StructuredFn,
}

fn apply(f: &StructuredFn, r: &RMat, c: &CVec) -> CVec {
    let rc = math::rmat_apply(r, c);
    let mut out = math::cscale(c, f.diag);
    math::axpy(&mut out, f.coupling, &rc);
    out
}

/// Exponential stepper on the grid, mirroring the atom-lattice stepper.
pub struct GridStepper {
    pub params: ModelParams,
    pub state: SteadyState,
    pub stepper: Stepper,
    pub nonlinear: bool,
    fft: GridFft,
    cache: Option<(u64, Vec<ModeCoeffs>)>,
}

impl GridStepper {
    pub fn new(spec: &GridSpec, params: ModelParams, state: SteadyState, stepper: Stepper, nonlinear: bool) -> Self {
        GridStepper { params, state, stepper, nonlinear, fft: GridFft::new(spec), cache: None }
    }

    pub fn fft(&self) -> &GridFft {
        &self.fft
    }

    fn coeffs(&mut self, spec: &GridSpec, h: f64) -> &[ModeCoeffs] {
        if self.cache.as_ref().map(|c| c.0) != Some(h.to_bits()) {
            let table = (0..spec.len())
                .map(|j| {
                    let lp = LinearPart::at(&spec.wavevector(&spec.mode(j)), &self.params, &self.state);
                    ModeCoeffs {
                        r: lp.r,
                        e: lp.function(StepFn::Exp, h),
                        p1: lp.function(StepFn::Phi1, h),
                        p2: lp.function(StepFn::Phi2, h),
                    }
                })
                .collect();
            self.cache = Some((h.to_bits(), table));
        }
        &self.cache.as_ref().unwrap().1
    }

    fn rhs(&self, u: &GridField, t: f64, forcing: Option<&dyn Forcing>) -> GridResult<GridField> {
        let mut out = if self.nonlinear {
            let mut h = grid_nonlinearity(u, &self.params, &self.state, &self.fft);
            for comp in h.data.iter_mut() {
                for z in comp.iter_mut() {
                    *z = -*z;
                }
            }
            h
        } else {
            GridField::zeros(u.spec, u.components)
        };
        if let Some(f) = forcing {
            let mut fl = bin(&f.at(t)?, &u.spec, false)?;
            fl.dealias();
            for (o, x) in out.data.iter_mut().zip(&fl.data) {
                for (a, b) in o.iter_mut().zip(x) {
                    *a += b;
                }
            }
        }
        Ok(out)
    }

    /// One step of size `h`.
    pub fn step(&mut self, u: &GridField, h: f64, forcing: Option<&dyn Forcing>) -> GridResult<GridField> {
        let spec = u.spec;
        let t = u.t;
        let n0 = self.rhs(u, t, forcing)?;
        let table = self.coeffs(&spec, h).to_vec();
        let mut a = GridField::zeros(spec, u.components);
        for (j, kc) in table.iter().enumerate() {
            let c = math::cadd(&apply(&kc.e, &kc.r, &u.coeff(j)), &apply(&kc.p1, &kc.r, &n0.coeff(j)));
            a.set(j, &c);
        }
        a.dealias();
        a.t = t + h;
        if self.stepper == Stepper::ExpEuler {
            return Ok(a);
        }
        let n1 = self.rhs(&a, t + h, forcing)?;
        let mut out = a.clone();
        for (j, kc) in table.iter().enumerate() {
            let dn = math::csub(&n1.coeff(j), &n0.coeff(j));
            out.set(j, &math::cadd(&a.coeff(j), &apply(&kc.p2, &kc.r, &dn)));
        }
        out.dealias();
        Ok(out)
    }
}

/// One grid step (convenience wrapper that plans a fresh FFT).
pub fn grid_step(
    v: &GridField,
    h: f64,
    params: &ModelParams,
    state: &SteadyState,
    stepper: Stepper,
) -> GridResult<GridField> {
    GridStepper::new(&v.spec, *params, *state, stepper, true).step(v, h, None)
}

/// Writes a binary snapshot: a text header terminated by an empty line,
/// then little-endian `f64` (re, im) pairs, component-major in FFT order.
pub fn write_snapshot<W: Write>(mut w: W, f: &GridField, manifest: &str) -> std::io::Result<()> {
    let s = &f.spec;
    let dims: Vec<String> = (0..s.dim).map(|_| s.n.to_string()).collect();
    writeln!(w, "fmflow-grid 1")?;
    writeln!(w, "dims={}", dims.join(","))?;
    writeln!(w, "L={:e}", s.box_len)?;
    writeln!(w, "t={:e}", f.t)?;
    writeln!(w, "components={}", f.components)?;
    writeln!(w, "endianness=little")?;
    writeln!(w, "manifest={manifest}")?;
    writeln!(w)?;
    for comp in &f.data {
        for z in comp {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a snapshot written by [`write_snapshot`]; returns the field and the
/// manifest hash from its header.
pub fn read_snapshot<R: Read>(r: R, dealias: Dealias) -> std::io::Result<(GridField, String)> {
    let bad = |m: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, m.to_string());
    let mut r = BufReader::new(r);
    let mut line = String::new();
    let (mut dims, mut l, mut t, mut comps, mut manifest) = (Vec::new(), 0.0, 0.0, 0usize, String::new());
    r.read_line(&mut line)?;
    if line.trim() != "fmflow-grid 1" {
        return Err(bad("not a grid snapshot"));
    }
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(bad("truncated header"));
        }
        let s = line.trim();
        if s.is_empty() {
            break;
        }
        let (k, v) = s.split_once('=').ok_or_else(|| bad("malformed header line"))?;
        match k {
            "dims" => {
                dims = v.split(',').map(|x| x.parse::<usize>()).collect::<Result<_, _>>().map_err(|_| bad("dims"))?
            }
            "L" => l = v.parse().map_err(|_| bad("L"))?,
            "t" => t = v.parse().map_err(|_| bad("t"))?,
            "components" => comps = v.parse().map_err(|_| bad("components"))?,
            "endianness" if v != "little" => return Err(bad("unsupported endianness")),
            "manifest" => manifest = v.to_string(),
            _ => {}
        }
    }
    if dims.is_empty() || dims.iter().any(|d| *d != dims[0]) {
        return Err(bad("grid must be cubic"));
    }
    let mut spec = GridSpec::new(dims.len(), dims[0], l).map_err(|e| bad(&e.to_string()))?;
    spec.dealias = dealias;
    let mut f = GridField::zeros(spec, comps);
    f.t = t;
    let mut buf = [0u8; 8];
    for comp in f.data.iter_mut() {
        for z in comp.iter_mut() {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf);
            r.read_exact(&mut buf)?;
            *z = C64::new(re, f64::from_le_bytes(buf));
        }
    }
    Ok((f, manifest))
}

pub fn save_snapshot(path: &Path, f: &GridField, manifest: &str) -> std::io::Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_snapshot(file, f, manifest)
}
