//! Fields restricted to an integer lattice of wavevectors.
//!
//! Lattice keys make coalescing exact, and convolutions accumulate into a
//! dense scratch box over the reachable keys, which keeps the nonlinear
//! products at O(A²) with a fixed, sorted accumulation order.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{self, CVec, RMat, RVec, CZERO3};
use crate::measure::{Atom, SpectralMeasure};
use crate::symbols::OriginPolicy;
use crate::{Error, Result};

pub type Key = [i32; 3];

/// Generators `b_1..b_n` of the wavevector lattice `{Σ k_i b_i : k ∈ ℤⁿ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    dim: usize,
    basis: RMat,
    inv: RMat,
}

impl Lattice {
    /// `basis` holds n generator vectors of length n.
    pub fn new(basis: &[RVec], dim: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if basis.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: basis.len() });
        }
        let mut b = [[0.0; 3]; 3];
        for (row, v) in b.iter_mut().zip(basis) {
            row[..dim].copy_from_slice(&v[..dim]);
        }
        // Padding so the 3×3 inverse exists in 2D.
        if dim == 2 {
            b[2][2] = 1.0;
        }
        let inv = invert3(&b).ok_or(Error::InvalidParams("lattice basis is singular"))?;
        if dim == 2 {
            b[2][2] = 0.0;
        }
        Ok(Lattice { dim, basis: b, inv })
    }

    /// Square/cubic lattice with the given spacing.
    pub fn cubic(dim: usize, spacing: f64) -> Result<Self> {
        let mut basis = [[0.0; 3]; 3];
        for (i, row) in basis.iter_mut().enumerate().take(dim) {
            row[i] = spacing;
        }
        Self::new(&basis[..dim], dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &RMat {
        &self.basis
    }

    pub fn wavevector(&self, key: &Key) -> RVec {
        let mut xi = [0.0; 3];
        for i in 0..self.dim {
            for (d, x) in xi.iter_mut().enumerate() {
                *x += key[i] as f64 * self.basis[i][d];
            }
        }
        xi
    }

    /// Integer coordinates of `xi`, or [`Error::OffLattice`].
    pub fn key_of(&self, xi: &RVec) -> Result<Key> {
        // ξ = Bᵀk  ⇒  k = B⁻ᵀξ
        let mut key = [0i32; 3];
        for i in 0..self.dim {
            let c: f64 = (0..3).map(|d| self.inv[d][i] * xi[d]).sum();
            let r = libm::round(c);
            if (c - r).abs() > 1e-9 * (1.0 + r.abs()) {
                return Err(Error::OffLattice { xi: *xi });
            }
            key[i] = r as i32;
        }
        let back = self.wavevector(&key);
        let err = math::norm(&[back[0] - xi[0], back[1] - xi[1], back[2] - xi[2]]);
        if err > 1e-9 * (1.0 + math::norm(xi)) {
            return Err(Error::OffLattice { xi: *xi });
        }
        Ok(key)
    }
}

fn invert3(m: &RMat) -> Option<RMat> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    Some(inv)
}

/// Galerkin truncation applied after every nonlinear evaluation and stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub lattice: Lattice,
    /// Atoms with `|ξ| > k_max` are dropped.
    pub k_max: f64,
    /// Atoms whose FM mass `(2π)^{n/2}|c|` is below this are dropped.
    pub drop_tol: f64,
    pub atom_cap: usize,
    pub origin_policy: OriginPolicy,
}

impl TruncationPolicy {
    pub fn new(lattice: Lattice, k_max: f64) -> Self {
        TruncationPolicy { lattice, k_max, drop_tol: 0.0, atom_cap: 1 << 20, origin_policy: OriginPolicy::Drop }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_max > 0.0) {
            return Err(Error::InvalidParams("k_max must be positive"));
        }
        if !(self.drop_tol >= 0.0) {
            return Err(Error::InvalidParams("drop_tol must be non-negative"));
        }
        if self.atom_cap == 0 {
            return Err(Error::InvalidParams("atom_cap must be at least 1"));
        }
        Ok(())
    }

    pub(crate) fn keeps(&self, xi: &RVec) -> bool {
        let k2 = math::dot(xi, xi);
        if k2 == 0.0 && self.origin_policy == OriginPolicy::Drop {
            return false;
        }
        k2 <= self.k_max * self.k_max * (1.0 + 1e-12)
    }
}

/// A field whose atoms sit on a [`Lattice`], sorted by key.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    lattice: Lattice,
    components: usize,
    keys: Vec<Key>,
    coeffs: Vec<CVec>,
}

impl LatticeField {
    pub fn zero(lattice: Lattice, components: usize) -> Self {
        LatticeField { lattice, components, keys: Vec::new(), coeffs: Vec::new() }
    }

    /// Builds from unsorted `(key, coefficient)` pairs, summing duplicates
    /// and dropping exact zeros.
    pub fn from_pairs(lattice: Lattice, components: usize, mut pairs: Vec<(Key, CVec)>) -> Self {
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut keys: Vec<Key> = Vec::with_capacity(pairs.len());
        let mut coeffs: Vec<CVec> = Vec::with_capacity(pairs.len());
        for (k, c) in pairs {
            if keys.last() == Some(&k) {
                let last = coeffs.last_mut().unwrap();
                *last = math::cadd(last, &c);
            } else {
                keys.push(k);
                coeffs.push(c);
            }
        }
        let mut f = LatticeField { lattice, components, keys, coeffs };
        f.retain(|_, c| math::cnorm(c) > 0.0);
        f
    }

    pub fn from_measure(u: &SpectralMeasure, lattice: Lattice) -> Result<Self> {
        if u.dim() != lattice.dim {
            return Err(Error::DimensionMismatch { expected: lattice.dim, found: u.dim() });
        }
        if u.components() > 3 {
            return Err(Error::ComponentMismatch { expected: u.dim(), found: u.components() });
        }
        let mut pairs = Vec::with_capacity(u.len());
        for a in u.atoms() {
            let key = lattice.key_of(a.xi3())?;
            pairs.push((key, math::cvec(a.coeff())));
        }
        Ok(Self::from_pairs(lattice, u.components(), pairs))
    }

    pub fn to_measure(&self) -> SpectralMeasure {
        let n = self.lattice.dim;
        let atoms: Vec<Atom> = self
            .iter()
            .map(|(k, c)| Atom::new(&self.lattice.wavevector(k)[..n], &c[..self.components]).unwrap())
            .collect();
        // Lattice keys are already distinct, so merging cannot coalesce.
        SpectralMeasure::from_atoms_in(n, self.components, atoms).unwrap()
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[Key] {
        &self.keys
    }

    pub fn coeffs(&self) -> &[CVec] {
        &self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Key, &CVec)> {
        self.keys.iter().zip(self.coeffs.iter())
    }

    pub fn get(&self, key: &Key) -> Option<&CVec> {
        self.keys.binary_search(key).ok().map(|i| &self.coeffs[i])
    }

    pub fn fm_norm(&self, s: f64) -> f64 {
        let mass: f64 = self
            .iter()
            .map(|(k, c)| {
                let w = if s == 0.0 {
                    1.0
                } else {
                    let kk = math::norm(&self.lattice.wavevector(k));
                    if kk == 0.0 {
                        0.0
                    } else {
                        math::pow(kk, s)
                    }
                };
                w * math::cnorm(c)
            })
            .sum();
        math::two_pi_half_pow(self.dim()) * mass
    }

    pub fn max_amplitude(&self) -> f64 {
        self.coeffs.iter().map(math::cnorm).fold(0.0, f64::max)
    }

    pub fn retain<F: FnMut(&Key, &CVec) -> bool>(&mut self, mut keep: F) {
        let mut w = 0;
        for r in 0..self.keys.len() {
            if keep(&self.keys[r], &self.coeffs[r]) {
                self.keys[w] = self.keys[r];
                self.coeffs[w] = self.coeffs[r];
                w += 1;
            }
        }
        self.keys.truncate(w);
        self.coeffs.truncate(w);
    }

    /// Applies the truncation policy in place; fails on atom-cap overflow.
    pub fn truncate(&mut self, policy: &TruncationPolicy) -> Result<()> {
        let lattice = self.lattice;
        let drop = policy.drop_tol / math::two_pi_half_pow(self.dim());
        self.retain(|k, c| {
            let m = math::cnorm(c);
            m > 0.0 && m >= drop && policy.keeps(&lattice.wavevector(k))
        });
        if self.len() > policy.atom_cap {
            return Err(Error::AtomCap { count: self.len(), cap: policy.atom_cap });
        }
        Ok(())
    }

    /// Maps every coefficient (keys unchanged).
    pub fn map<F: FnMut(&Key, &CVec) -> CVec>(&self, mut f: F) -> Self {
        let coeffs = self.iter().map(|(k, c)| f(k, c)).collect();
        let mut out =
            LatticeField { lattice: self.lattice, components: self.components, keys: self.keys.clone(), coeffs };
        out.retain(|_, c| math::cnorm(c) > 0.0);
        out
    }

    /// `Σ_i s_i · f_i` over fields on the same lattice, merged by key.
    pub fn linear_combination(terms: &[(math::C64, &LatticeField)]) -> Self {
        let first = terms[0].1;
        let mut pairs = Vec::new();
        for (s, f) in terms {
            pairs.extend(f.iter().map(|(k, c)| (*k, math::cscale(c, *s))));
        }
        Self::from_pairs(first.lattice, first.components, pairs)
    }

    fn bounds(&self) -> [i32; 3] {
        let mut b = [0; 3];
        for k in &self.keys {
            for i in 0..3 {
                b[i] = b[i].max(k[i].abs());
            }
        }
        b
    }
}

/// Pairwise convolution `Σ_{j,k} f(ξ_j, c_j, η_k, d_k)` placed at `ξ_j + η_k`.
///
/// If `radius` is given, output wavevectors outside it are skipped.
pub fn convolve<F>(
    a: &LatticeField,
    b: &LatticeField,
    components: usize,
    radius: Option<(f64, OriginPolicy)>,
    mut f: F,
) -> LatticeField
where
    F: FnMut(&RVec, &CVec, &RVec, &CVec) -> CVec,
{
    let lattice = a.lattice;
    if a.is_empty() || b.is_empty() {
        return LatticeField::zero(lattice, components);
    }
    let n = lattice.dim;
    let (ba, bb) = (a.bounds(), b.bounds());
    let mut half = [0i32; 3];
    let mut size = [1usize; 3];
    for i in 0..n {
        half[i] = ba[i] + bb[i];
        size[i] = (2 * half[i] + 1) as usize;
    }
    let stride = [size[1] * size[2], size[2], 1];
    let total = size[0] * size[1] * size[2];
    let mut acc = vec![CZERO3; total];
    let mut used = vec![false; total];

    let xa: Vec<RVec> = a.keys.iter().map(|k| lattice.wavevector(k)).collect();
    let xb: Vec<RVec> = b.keys.iter().map(|k| lattice.wavevector(k)).collect();
    let r2 = radius.map(|(r, _)| r * r * (1.0 + 1e-12));
    let drop_origin = matches!(radius, Some((_, OriginPolicy::Drop)));

    for (i, ka) in a.keys.iter().enumerate() {
        for (j, kb) in b.keys.iter().enumerate() {
            let xi = math::add(&xa[i], &xb[j]);
            if let Some(r2) = r2 {
                let k2 = math::dot(&xi, &xi);
                if k2 > r2 {
                    continue;
                }
                if drop_origin && ka[0] + kb[0] == 0 && ka[1] + kb[1] == 0 && ka[2] + kb[2] == 0 {
                    continue;
                }
            }
            let c = f(&xa[i], &a.coeffs[i], &xb[j], &b.coeffs[j]);
            let idx = (0..3).map(|d| ((ka[d] + kb[d] + half[d]) as usize) * stride[d]).sum::<usize>();
            let slot = &mut acc[idx];
            slot[0] += c[0];
            slot[1] += c[1];
            slot[2] += c[2];
            used[idx] = true;
        }
    }

    let mut keys = Vec::new();
    let mut coeffs = Vec::new();
    for idx in 0..total {
        if !used[idx] || math::cnorm(&acc[idx]) == 0.0 {
            continue;
        }
        let mut key = [0i32; 3];
        let mut rem = idx;
        for d in 0..3 {
            key[d] = (rem / stride[d]) as i32 - half[d];
            rem %= stride[d];
        }
        keys.push(key);
        coeffs.push(acc[idx]);
    }
    LatticeField { lattice, components, keys, coeffs }
}
