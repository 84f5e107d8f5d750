//! Fields as finite Dirac-atom measures in Fourier space.
//!
//! A [`SpectralMeasure`] stores `u(x) = Σ_j c_j e^{iξ_j·x}` as a list of
//! [`Atom`]s keyed by the plane-wave wavevector. The underlying Radon measure
//! is `(2π)^{n/2} Σ_j c_j δ_{-ξ_j}`; the reflection does not affect any norm
//! or product, so it is never materialised.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::math::{self, C64, ZERO};
use crate::{Error, Result};

/// Maximum number of coefficient components (an n×n outer product in n = 3).
pub const MAX_COMPONENTS: usize = 9;

pub const DEFAULT_MERGE_TOL: f64 = 1e-9;

/// One plane wave `c e^{iξ·x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    xi: [f64; 3],
    c: [C64; MAX_COMPONENTS],
    dim: u8,
    comps: u8,
}

impl Atom {
    /// Builds an atom from a wavevector (length n ∈ {1, 2, 3}) and a
    /// coefficient with 1..=9 components.
    pub fn new(xi: &[f64], c: &[C64]) -> Result<Self> {
        if xi.is_empty() || xi.len() > 3 {
            return Err(Error::UnsupportedDimension(xi.len()));
        }
        if c.is_empty() || c.len() > MAX_COMPONENTS {
            return Err(Error::ComponentMismatch { expected: xi.len(), found: c.len() });
        }
        if xi.iter().any(|x| !x.is_finite()) || c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut a = Atom { xi: [0.0; 3], c: [ZERO; MAX_COMPONENTS], dim: xi.len() as u8, comps: c.len() as u8 };
        a.xi[..xi.len()].copy_from_slice(xi);
        a.c[..c.len()].copy_from_slice(c);
        Ok(a)
    }

    /// Real-coefficient convenience constructor.
    pub fn real(xi: &[f64], c: &[f64]) -> Result<Self> {
        let mut buf = [ZERO; MAX_COMPONENTS];
        for (b, &x) in buf.iter_mut().zip(c) {
            *b = C64::new(x, 0.0);
        }
        Atom::new(xi, &buf[..c.len()])
    }

    pub(crate) fn from_parts(xi: [f64; 3], c: [C64; MAX_COMPONENTS], dim: usize, comps: usize) -> Self {
        Atom { xi, c, dim: dim as u8, comps: comps as u8 }
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi[..self.dim as usize]
    }

    pub fn xi3(&self) -> &[f64; 3] {
        &self.xi
    }

    pub fn coeff(&self) -> &[C64] {
        &self.c[..self.comps as usize]
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn components(&self) -> usize {
        self.comps as usize
    }

    /// Euclidean norm of the coefficient on ℂᵐ.
    pub fn coeff_norm(&self) -> f64 {
        math::sqrt(self.coeff().iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn wavenumber(&self) -> f64 {
        math::norm(&self.xi)
    }

    fn cmp_xi(&self, other: &Atom) -> Ordering {
        for k in 0..3 {
            match self.xi[k].total_cmp(&other.xi[k]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

/// Claimed structural properties of a measure; see [`SpectralMeasure::check_flags`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    /// Hermitian pairing: `(ξ, c)` present ⇒ `(−ξ, conj c)` present.
    pub real_field: bool,
    /// No atom at ξ = 0 (membership in FM₀).
    pub zero_free: bool,
    /// Every atom satisfies `|ξ·c| ≤ div_tol |ξ||c|` (membership in FM₀,σ).
    pub solenoidal: bool,
}

/// Bilinear coefficient combination used by [`SpectralMeasure::multiply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductKind {
    /// Component-wise product of equal-length coefficients; a 1-component
    /// factor broadcasts against the other side.
    Componentwise,
    /// Bilinear dot product `Σ_i a_i b_i`, giving a scalar measure.
    Dot,
    /// Outer product `a bᵀ`, flattened row-major.
    Outer,
}

/// A finite atomic spectral measure; see the module docs.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    dim: usize,
    components: usize,
    atoms: Vec<Atom>,
    merge_tol: f64,
    pub flags: Flags,
}

pub const DEFAULT_DIV_TOL: f64 = 1e-12;

impl SpectralMeasure {
    pub fn zero(dim: usize, components: usize) -> Self {
        SpectralMeasure {
            dim,
            components,
            atoms: Vec::new(),
            merge_tol: DEFAULT_MERGE_TOL,
            flags: Flags { real_field: true, zero_free: true, solenoidal: components == dim },
        }
    }

    /// Coalesces atoms whose wavevectors are within `merge_tol` of each
    /// other (coefficients add), then removes atoms with `|c| < drop_tol`.
    /// Exactly-zero atoms are always removed. The result is sorted by
    /// wavevector.
    pub fn normalize(raw: Vec<Atom>, merge_tol: f64, drop_tol: f64) -> Result<Self> {
        let (dim, comps) = match raw.first() {
            Some(a) => (a.dim(), a.components()),
            None => return Ok(Self::zero(2, 2)),
        };
        for a in &raw {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: a.dim() });
            }
            if a.components() != comps {
                return Err(Error::ComponentMismatch { expected: comps, found: a.components() });
            }
        }
        Ok(Self::normalize_unchecked(raw, dim, comps, merge_tol, drop_tol))
    }

    pub(crate) fn normalize_unchecked(
        mut raw: Vec<Atom>,
        dim: usize,
        comps: usize,
        merge_tol: f64,
        drop_tol: f64,
    ) -> Self {
        raw.sort_by(|a, b| a.cmp_xi(b));
        let mut reps: Vec<Atom> = Vec::with_capacity(raw.len());
        for a in raw {
            // Representatives are appended in increasing ξ₀, so only a
            // trailing window can be within merge_tol.
            let mut target = None;
            for (idx, r) in reps.iter().enumerate().rev() {
                if a.xi[0] - r.xi[0] > merge_tol {
                    break;
                }
                let d = [a.xi[0] - r.xi[0], a.xi[1] - r.xi[1], a.xi[2] - r.xi[2]];
                if math::norm(&d) <= merge_tol {
                    target = Some(idx);
                    break;
                }
            }
            match target {
                Some(idx) => {
                    let r = &mut reps[idx];
                    for k in 0..comps {
                        r.c[k] += a.c[k];
                    }
                }
                None => reps.push(a),
            }
        }
        reps.retain(|a| {
            let m = a.coeff_norm();
            m > 0.0 && m >= drop_tol
        });
        reps.sort_by(|a, b| a.cmp_xi(b));
        let mut out = SpectralMeasure { dim, components: comps, atoms: reps, merge_tol, flags: Flags::default() };
        out.flags = out.detect_flags(DEFAULT_DIV_TOL);
        out
    }

    /// Convenience: normalize with default tolerances (merge 1e−9, no dropping).
    pub fn from_atoms(raw: Vec<Atom>) -> Result<Self> {
        Self::normalize(raw, DEFAULT_MERGE_TOL, 0.0)
    }

    /// Like [`from_atoms`](Self::from_atoms) but keeps the stated dimension
    /// and component count for an empty atom list.
    pub fn from_atoms_in(dim: usize, components: usize, raw: Vec<Atom>) -> Result<Self> {
        if raw.is_empty() {
            return Ok(Self::zero(dim, components));
        }
        let m = Self::from_atoms(raw)?;
        if m.dim != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: m.dim });
        }
        if m.components != components {
            return Err(Error::ComponentMismatch { expected: components, found: m.components });
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn merge_tol(&self) -> f64 {
        self.merge_tol
    }

    /// Coefficient at (or within `merge_tol` of) `xi`.
    pub fn coefficient_at(&self, xi: &[f64]) -> Option<&[C64]> {
        let x = math::rvec(xi);
        self.atoms
            .iter()
            .find(|a| math::norm(&[a.xi[0] - x[0], a.xi[1] - x[1], a.xi[2] - x[2]]) <= self.merge_tol)
            .map(|a| a.coeff())
    }

    /// `(2π)^{n/2} Σ_j |ξ_j|^s |c_j|₂`: the FM norm for `s = 0`, the FM^s
    /// seminorm otherwise. An atom at the origin carries zero weight for s > 0.
    pub fn fm_norm(&self, s: f64) -> f64 {
        let mass: f64 = self
            .atoms
            .iter()
            .map(|a| {
                let w = if s == 0.0 {
                    1.0
                } else {
                    let k = a.wavenumber();
                    if k == 0.0 {
                        0.0
                    } else {
                        math::pow(k, s)
                    }
                };
                w * a.coeff_norm()
            })
            .sum();
        math::two_pi_half_pow(self.dim) * mass
    }

    /// Total variation `Σ_j |c_j|₂` without the `(2π)^{n/2}` factor.
    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.coeff_norm()).sum()
    }

    pub fn max_amplitude(&self) -> f64 {
        self.atoms.iter().map(|a| a.coeff_norm()).fold(0.0, f64::max)
    }

    /// Pointwise product of the two fields: `{(ξ_j + η_k, c_j ⊛ d_k)}` over
    /// all atom pairs, normalized. Fails if the number of raw pairs exceeds
    /// `atom_cap`.
    pub fn multiply(&self, other: &Self, kind: ProductKind, atom_cap: usize) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let (ca, cb) = (self.components, other.components);
        let out_comps = match kind {
            ProductKind::Componentwise => {
                if ca == cb || cb == 1 {
                    ca
                } else if ca == 1 {
                    cb
                } else {
                    return Err(Error::ComponentMismatch { expected: ca, found: cb });
                }
            }
            ProductKind::Dot => {
                if ca != cb {
                    return Err(Error::ComponentMismatch { expected: ca, found: cb });
                }
                1
            }
            ProductKind::Outer => {
                if ca * cb > MAX_COMPONENTS {
                    return Err(Error::ComponentMismatch { expected: MAX_COMPONENTS, found: ca * cb });
                }
                ca * cb
            }
        };
        let count = self.atoms.len() * other.atoms.len();
        if count > atom_cap {
            return Err(Error::AtomCap { count, cap: atom_cap });
        }
        let mut raw = Vec::with_capacity(count);
        for a in &self.atoms {
            for b in &other.atoms {
                let xi = math::add(&a.xi, &b.xi);
                let mut c = [ZERO; MAX_COMPONENTS];
                match kind {
                    ProductKind::Componentwise => {
                        for (k, ck) in c.iter_mut().enumerate().take(out_comps) {
                            let x = if ca == 1 { a.c[0] } else { a.c[k] };
                            let y = if cb == 1 { b.c[0] } else { b.c[k] };
                            *ck = x * y;
                        }
                    }
                    ProductKind::Dot => {
                        c[0] = (0..ca).map(|k| a.c[k] * b.c[k]).sum();
                    }
                    ProductKind::Outer => {
                        for i in 0..ca {
                            for j in 0..cb {
                                c[i * cb + j] = a.c[i] * b.c[j];
                            }
                        }
                    }
                }
                raw.push(Atom::from_parts(xi, c, self.dim, out_comps));
            }
        }
        Ok(Self::normalize_unchecked(raw, self.dim, out_comps, self.merge_tol, 0.0))
    }

    /// The measure operation `μ⌊ψ`: every atom `(ξ, c)` becomes `(ξ, ψ(ξ)c)`.
    ///
    /// `psi` returns `None` where the symbol is undefined, which is reported
    /// as [`Error::SingularSymbol`]. A 1×1 symbol scales all components.
    pub fn restrict<F>(&self, psi: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Option<SymbolMatrix>,
    {
        let mut out_comps = None;
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let m = psi(a.xi()).ok_or(Error::SingularSymbol { xi: a.xi })?;
            let c = m.apply(a.coeff())?;
            let comps = if m.is_scalar() { self.components } else { m.rows };
            match out_comps {
                None => out_comps = Some(comps),
                Some(k) if k != comps => return Err(Error::ComponentMismatch { expected: k, found: comps }),
                _ => {}
            }
            atoms.push(Atom::from_parts(a.xi, c, self.dim, comps));
        }
        let comps = out_comps.unwrap_or(self.components);
        Ok(Self::normalize_unchecked(atoms, self.dim, comps, self.merge_tol, 0.0))
    }

    /// Samples `Σ_j c_j e^{iξ_j·x}` at each point.
    pub fn evaluate(&self, points: &[&[f64]]) -> Result<Sampled> {
        let mut values = Vec::with_capacity(points.len());
        let mut max_imag: f64 = 0.0;
        for p in points {
            if p.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: p.len() });
            }
            let x = math::rvec(p);
            let mut acc = [ZERO; MAX_COMPONENTS];
            for a in &self.atoms {
                let ph = math::dot(&a.xi, &x);
                let e = C64::new(math::cos(ph), math::sin(ph));
                for k in 0..self.components {
                    acc[k] += a.c[k] * e;
                }
            }
            for z in &acc[..self.components] {
                max_imag = max_imag.max(z.im.abs());
            }
            values.push(acc);
        }
        Ok(Sampled { components: self.components, values, max_imag })
    }

    /// Recomputes which [`Flags`] actually hold.
    pub fn detect_flags(&self, div_tol: f64) -> Flags {
        let zero_free = self.atoms.iter().all(|a| a.wavenumber() > self.merge_tol);
        let solenoidal = self.components == self.dim
            && self.atoms.iter().all(|a| {
                let k = a.wavenumber();
                k <= self.merge_tol || divergence_ratio(a) <= div_tol
            });
        let real_field = self.is_hermitian(1e-12);
        Flags { real_field, zero_free, solenoidal }
    }

    /// Verifies that every claimed flag holds.
    pub fn check_flags(&self) -> bool {
        let actual = self.detect_flags(DEFAULT_DIV_TOL);
        (!self.flags.real_field || actual.real_field)
            && (!self.flags.zero_free || actual.zero_free)
            && (!self.flags.solenoidal || actual.solenoidal)
    }

    /// True if atoms come in Hermitian pairs, with coefficient mismatch at
    /// most `tol` relative to the largest amplitude.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = self.max_amplitude().max(f64::MIN_POSITIVE);
        self.atoms.iter().all(|a| {
            let neg = [-a.xi[0], -a.xi[1], -a.xi[2]];
            match self.coefficient_at(&neg[..self.dim]) {
                None => false,
                Some(c) => c.iter().zip(a.coeff()).all(|(x, y)| (*x - y.conj()).norm() <= tol * scale),
            }
        })
    }

    /// Largest `|ξ·c| / (|ξ||c|)` over atoms off the origin.
    pub fn max_divergence_ratio(&self) -> f64 {
        self.atoms.iter().filter(|a| a.wavenumber() > self.merge_tol).map(divergence_ratio).fold(0.0, f64::max)
    }

    /// Linear combination `self + s·other` (same dimension and components).
    pub fn axpy(&self, s: C64, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        if self.components != other.components {
            return Err(Error::ComponentMismatch { expected: self.components, found: other.components });
        }
        let mut raw = self.atoms.clone();
        raw.extend(other.atoms.iter().map(|a| {
            let mut b = *a;
            for k in 0..other.components {
                b.c[k] *= s;
            }
            b
        }));
        Ok(Self::normalize_unchecked(raw, self.dim, self.components, self.merge_tol, 0.0))
    }

    /// Drops atoms with `|ξ| > k_max`.
    pub fn truncate(&self, k_max: f64) -> Self {
        let mut out = self.clone();
        out.atoms.retain(|a| a.wavenumber() <= k_max);
        out
    }

    pub fn map_atoms<F: FnMut(&Atom) -> Atom>(&self, f: F) -> Self {
        let atoms = self.atoms.iter().map(f).collect();
        Self::normalize_unchecked(atoms, self.dim, self.components, self.merge_tol, 0.0)
    }
}

fn divergence_ratio(a: &Atom) -> f64 {
    let k = a.wavenumber();
    let cn = a.coeff_norm();
    if k == 0.0 || cn == 0.0 {
        return 0.0;
    }
    let d: C64 = (0..a.dim()).map(|i| a.c[i] * a.xi[i]).sum();
    d.norm() / (k * cn)
}

/// Result of [`SpectralMeasure::evaluate`].
#[derive(Debug, Clone)]
pub struct Sampled {
    pub components: usize,
    pub values: Vec<[C64; MAX_COMPONENTS]>,
    /// Largest imaginary part seen; should be roundoff-sized for real fields.
    pub max_imag: f64,
}

impl Sampled {
    pub fn value(&self, i: usize) -> &[C64] {
        &self.values[i][..self.components]
    }

    /// Max over points of the Euclidean norm of the sampled vector.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| math::sqrt(v[..self.components].iter().map(|z| z.norm_sqr()).sum()))
            .fold(0.0, f64::max)
    }
}

/// Complex matrix symbol value `ψ(ξ)` of size `rows × cols` (≤ 3×3 or 1×1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: [[C64; 3]; 3],
}

impl SymbolMatrix {
    pub fn scalar(s: C64) -> Self {
        let mut data = [[ZERO; 3]; 3];
        data[0][0] = s;
        SymbolMatrix { rows: 1, cols: 1, data }
    }

    pub fn real_scalar(s: f64) -> Self {
        Self::scalar(C64::new(s, 0.0))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_real(n, &math::rmat_identity(n))
    }

    pub fn from_real(n: usize, m: &[[f64; 3]; 3]) -> Self {
        let mut data = [[ZERO; 3]; 3];
        for i in 0..n {
            for j in 0..n {
                data[i][j] = C64::new(m[i][j], 0.0);
            }
        }
        SymbolMatrix { rows: n, cols: n, data }
    }

    pub fn from_complex(n: usize, m: &[[C64; 3]; 3]) -> Self {
        SymbolMatrix { rows: n, cols: n, data: *m }
    }

    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Self) -> Self {
        if self.is_scalar() {
            let mut o = *other;
            for row in o.data.iter_mut() {
                for z in row.iter_mut() {
                    *z *= self.data[0][0];
                }
            }
            return o;
        }
        if other.is_scalar() {
            return other.compose(self);
        }
        SymbolMatrix { rows: self.rows, cols: other.cols, data: math::cmat_mul(&self.data, &other.data) }
    }

    /// Largest singular value bound used for contraction checks: the
    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        math::sqrt(self.data.iter().flatten().map(|z| z.norm_sqr()).sum())
    }

    fn apply(&self, c: &[C64]) -> Result<[C64; MAX_COMPONENTS]> {
        let mut out = [ZERO; MAX_COMPONENTS];
        if self.is_scalar() {
            for (o, x) in out.iter_mut().zip(c) {
                *o = self.data[0][0] * x;
            }
            return Ok(out);
        }
        if c.len() != self.cols {
            return Err(Error::ComponentMismatch { expected: self.cols, found: c.len() });
        }
        for (i, o) in out.iter_mut().enumerate().take(self.rows) {
            *o = (0..self.cols).map(|j| self.data[i][j] * c[j]).sum();
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use std::vec::Vec as StdVec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn normalize_coalesces_coincident_atoms() {
        let m = SpectralMeasure::from_atoms(vec![
            Atom::real(&[1.0, 0.0], &[0.0, 1.0]).unwrap(),
            Atom::real(&[1.0, 0.0], &[0.0, 2.0]).unwrap(),
        ])
        .unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.atoms()[0].coeff(), &[c(0.0, 0.0), c(3.0, 0.0)]);
    }

    #[test]
    fn normalize_drops_small_atoms() {
        let m = SpectralMeasure::normalize(vec![Atom::real(&[1.0, 0.0], &[0.0, 1e-18]).unwrap()], 1e-9, 1e-14).unwrap();
        assert!(m.is_empty());
    }

    #[test]
    fn normalize_keeps_distinct_wavevectors() {
        let m = SpectralMeasure::from_atoms(vec![
            Atom::real(&[1.0, 0.0], &[0.0, 1.0]).unwrap(),
            Atom::real(&[0.0, 1.0], &[1.0, 0.0]).unwrap(),
        ])
        .unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.coefficient_at(&[1.0, 0.0]).unwrap(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(m.coefficient_at(&[0.0, 1.0]).unwrap(), &[c(1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn normalize_rejects_mixed_dimensions() {
        let err = SpectralMeasure::from_atoms(vec![
            Atom::real(&[1.0, 0.0], &[0.0, 1.0]).unwrap(),
            Atom::real(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap(),
        ])
        .unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, found: 3 });
    }

    #[test]
    fn normalize_merges_within_tolerance() {
        let m = SpectralMeasure::from_atoms(vec![
            Atom::real(&[1.0, 0.0], &[1.0, 0.0]).unwrap(),
            Atom::real(&[1.0 + 1e-12, 1e-12], &[1.0, 0.0]).unwrap(),
            Atom::real(&[1.0 + 1e-3, 0.0], &[1.0, 0.0]).unwrap(),
        ])
        .unwrap();
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn single_atom_norm_is_plane_wave_constant() {
        for n in [2usize, 3] {
            let mut xi = [0.0; 3];
            xi[0] = 1.5;
            let mut cc = [ZERO; 3];
            cc[1] = c(0.6, 0.8);
            let m = SpectralMeasure::from_atoms(vec![Atom::new(&xi[..n], &cc[..n]).unwrap()]).unwrap();
            let expected = math::pow(2.0 * math::PI, n as f64 / 2.0);
            assert!((m.fm_norm(0.0) - expected).abs() < 1e-13 * expected);
        }
    }

    #[test]
    fn empty_norm_is_zero() {
        let m = SpectralMeasure::zero(2, 2);
        assert_eq!(m.fm_norm(0.0), 0.0);
        assert_eq!(m.fm_norm(4.0), 0.0);
    }

    #[test]
    fn weighted_norm_two_atoms() {
        // Oracle: 2π (1⁴·2 + 2⁴·1) summed independently.
        let m = SpectralMeasure::from_atoms(vec![
            Atom::real(&[1.0, 0.0], &[0.0, 2.0]).unwrap(),
            Atom::real(&[0.0, 2.0], &[1.0, 0.0]).unwrap(),
        ])
        .unwrap();
        let oracle = 2.0 * math::PI * (1.0 * 2.0 + 16.0 * 1.0);
        assert!((m.fm_norm(4.0) - oracle).abs() < 1e-12 * oracle);
        assert!((oracle - 36.0 * math::PI).abs() < 1e-12);
    }

    #[test]
    fn product_of_plane_waves_adds_exponents() {
        let u = SpectralMeasure::from_atoms(vec![Atom::new(&[1.0, 2.0], &[c(2.0, 1.0)]).unwrap()]).unwrap();
        let v = SpectralMeasure::from_atoms(vec![Atom::new(&[-0.5, 1.0], &[c(0.0, 3.0)]).unwrap()]).unwrap();
        let w = u.multiply(&v, ProductKind::Componentwise, 100).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w.atoms()[0].xi(), &[0.5, 3.0]);
        assert_eq!(w.atoms()[0].coeff(), &[c(2.0, 1.0) * c(0.0, 3.0)]);
    }

    #[test]
    fn cosine_square_binomial() {
        let k = [0.7, -0.2];
        let u = SpectralMeasure::from_atoms(vec![
            Atom::real(&k, &[1.0]).unwrap(),
            Atom::real(&[-k[0], -k[1]], &[1.0]).unwrap(),
        ])
        .unwrap();
        let w = u.multiply(&u, ProductKind::Componentwise, 100).unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(w.coefficient_at(&[2.0 * k[0], 2.0 * k[1]]).unwrap(), &[c(1.0, 0.0)]);
        assert_eq!(w.coefficient_at(&[0.0, 0.0]).unwrap(), &[c(2.0, 0.0)]);
        assert_eq!(w.coefficient_at(&[-2.0 * k[0], -2.0 * k[1]]).unwrap(), &[c(1.0, 0.0)]);
    }

    #[test]
    fn product_cap_reports_would_be_count() {
        let u = SpectralMeasure::from_atoms(vec![
            Atom::real(&[1.0, 0.0], &[1.0]).unwrap(),
            Atom::real(&[2.0, 0.0], &[1.0]).unwrap(),
        ])
        .unwrap();
        assert_eq!(u.multiply(&u, ProductKind::Componentwise, 3).unwrap_err(), Error::AtomCap { count: 4, cap: 3 });
    }

    #[test]
    fn dot_and_outer_products() {
        let u = SpectralMeasure::from_atoms(vec![Atom::real(&[1.0, 0.0], &[1.0, 2.0]).unwrap()]).unwrap();
        let v = SpectralMeasure::from_atoms(vec![Atom::real(&[0.0, 1.0], &[3.0, -1.0]).unwrap()]).unwrap();
        let d = u.multiply(&v, ProductKind::Dot, 10).unwrap();
        assert_eq!(d.components(), 1);
        assert_eq!(d.atoms()[0].coeff(), &[c(1.0, 0.0)]);
        let o = u.multiply(&v, ProductKind::Outer, 10).unwrap();
        assert_eq!(o.components(), 4);
        assert_eq!(o.atoms()[0].coeff(), &[c(3.0, 0.0), c(-1.0, 0.0), c(6.0, 0.0), c(-2.0, 0.0)]);
        assert!(u.multiply(&d, ProductKind::Dot, 10).is_err());
    }

    #[test]
    fn identity_restriction_is_noop() {
        let u = SpectralMeasure::from_atoms(vec![
            Atom::new(&[1.0, 0.0], &[c(0.0, 1.0), c(2.0, -1.0)]).unwrap(),
            Atom::new(&[0.0, -1.0], &[c(1.0, 1.0), c(0.0, 0.5)]).unwrap(),
        ])
        .unwrap();
        let r = u.restrict(|_| Some(SymbolMatrix::identity(2))).unwrap();
        assert_eq!(r, u);
    }

    #[test]
    fn scalar_weight_restriction() {
        let u = SpectralMeasure::from_atoms(vec![
            Atom::real(&[1.0, 0.0], &[1.0, 0.0]).unwrap(),
            Atom::real(&[0.0, 2.0], &[1.0, 0.0]).unwrap(),
        ])
        .unwrap();
        let r = u.restrict(|xi| Some(SymbolMatrix::real_scalar(xi[0] * xi[0] + xi[1] * xi[1]))).unwrap();
        assert_eq!(r.coefficient_at(&[1.0, 0.0]).unwrap()[0], c(1.0, 0.0));
        assert_eq!(r.coefficient_at(&[0.0, 2.0]).unwrap()[0], c(4.0, 0.0));
    }

    #[test]
    fn restriction_reports_singular_atom() {
        let u = SpectralMeasure::from_atoms(vec![Atom::real(&[0.0, 0.0], &[1.0, 0.0]).unwrap()]).unwrap();
        let err = u
            .restrict(|xi| if xi.iter().all(|&x| x == 0.0) { None } else { Some(SymbolMatrix::identity(2)) })
            .unwrap_err();
        assert_eq!(err, Error::SingularSymbol { xi: [0.0; 3] });
    }

    #[test]
    fn evaluation_at_origin_returns_coefficient() {
        let u =
            SpectralMeasure::from_atoms(vec![Atom::new(&[0.3, 1.0], &[c(1.0, 2.0), c(-1.0, 0.5)]).unwrap()]).unwrap();
        let s = u.evaluate(&[&[0.0, 0.0]]).unwrap();
        assert_eq!(s.value(0), &[c(1.0, 2.0), c(-1.0, 0.5)]);
    }

    #[test]
    fn hermitian_pair_evaluates_real() {
        let cc = [c(0.3, -1.2), c(2.0, 0.7)];
        let u = SpectralMeasure::from_atoms(vec![
            Atom::new(&[1.0, 2.0], &cc).unwrap(),
            Atom::new(&[-1.0, -2.0], &[cc[0].conj(), cc[1].conj()]).unwrap(),
        ])
        .unwrap();
        assert!(u.flags.real_field);
        let pts: StdVec<[f64; 2]> = (0..50).map(|i| [0.13 * i as f64, -0.07 * i as f64]).collect();
        let refs: StdVec<&[f64]> = pts.iter().map(|p| &p[..]).collect();
        let s = u.evaluate(&refs).unwrap();
        assert!(s.max_imag < 1e-14);
    }

    #[test]
    fn flags_detected() {
        let u = SpectralMeasure::from_atoms(vec![
            Atom::real(&[1.0, 0.0], &[0.0, 1.0]).unwrap(),
            Atom::real(&[-1.0, 0.0], &[0.0, 1.0]).unwrap(),
        ])
        .unwrap();
        assert_eq!(u.flags, Flags { real_field: true, zero_free: true, solenoidal: true });
        let v = SpectralMeasure::from_atoms(vec![Atom::real(&[1.0, 0.0], &[1.0, 1.0]).unwrap()]).unwrap();
        assert_eq!(v.flags, Flags { real_field: false, zero_free: true, solenoidal: false });
        let w = u.multiply(&u, ProductKind::Dot, 10).unwrap();
        assert!(!w.flags.zero_free);
    }
}
