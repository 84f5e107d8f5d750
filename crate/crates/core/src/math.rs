//! Small fixed-size real/complex vector helpers and `libm` shims.
//!
//! Vectors are stored as `[T; 3]` regardless of the space dimension; the
//! unused trailing components are kept at zero so every helper can work on
//! all three slots.

use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type RVec = [f64; 3];
pub type CVec = [C64; 3];
pub type RMat = [[f64; 3]; 3];
pub type CMat3 = [[C64; 3]; 3];

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const CZERO3: CVec = [ZERO; 3];
pub const PI: f64 = core::f64::consts::PI;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn cexp(z: C64) -> C64 {
    let m = exp(z.re);
    C64::new(m * cos(z.im), m * sin(z.im))
}

#[inline]
pub fn cabs(z: C64) -> f64 {
    libm::hypot(z.re, z.im)
}

/// `(2π)^{n/2}`, the plane-wave normalisation of the FM norm.
pub fn two_pi_half_pow(n: usize) -> f64 {
    match n {
        1 => sqrt(2.0 * PI),
        2 => 2.0 * PI,
        3 => 2.0 * PI * sqrt(2.0 * PI),
        _ => pow(2.0 * PI, n as f64 / 2.0),
    }
}

pub fn rvec(xs: &[f64]) -> RVec {
    let mut v = [0.0; 3];
    v[..xs.len()].copy_from_slice(xs);
    v
}

pub fn cvec(xs: &[C64]) -> CVec {
    let mut v = CZERO3;
    v[..xs.len()].copy_from_slice(xs);
    v
}

#[inline]
pub fn dot(a: &RVec, b: &RVec) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &RVec) -> f64 {
    sqrt(dot(a, a))
}

#[inline]
pub fn add(a: &RVec, b: &RVec) -> RVec {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: &RVec, s: f64) -> RVec {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Bilinear (non-conjugating) dot product of two complex vectors.
#[inline]
pub fn cdot(a: &CVec, b: &CVec) -> C64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `ξ·c` with real ξ.
#[inline]
pub fn rcdot(a: &RVec, c: &CVec) -> C64 {
    c[0] * a[0] + c[1] * a[1] + c[2] * a[2]
}

#[inline]
pub fn cnorm(c: &CVec) -> f64 {
    sqrt(c[0].norm_sqr() + c[1].norm_sqr() + c[2].norm_sqr())
}

#[inline]
pub fn cadd(a: &CVec, b: &CVec) -> CVec {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn csub(a: &CVec, b: &CVec) -> CVec {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn cscale(a: &CVec, s: C64) -> CVec {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn cscale_re(a: &CVec, s: f64) -> CVec {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn cconj(a: &CVec) -> CVec {
    [a[0].conj(), a[1].conj(), a[2].conj()]
}

#[inline]
pub fn axpy(y: &mut CVec, s: C64, x: &CVec) {
    y[0] += s * x[0];
    y[1] += s * x[1];
    y[2] += s * x[2];
}

#[inline]
pub fn rmat_apply(m: &RMat, c: &CVec) -> CVec {
    let mut out = CZERO3;
    for (o, row) in out.iter_mut().zip(m) {
        *o = c[0] * row[0] + c[1] * row[1] + c[2] * row[2];
    }
    out
}

pub fn rmat_identity(n: usize) -> RMat {
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate().take(n) {
        row[i] = 1.0;
    }
    m
}

pub fn rmat_mul(a: &RMat, b: &RMat) -> RMat {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

pub fn cmat_mul(a: &CMat3, b: &CMat3) -> CMat3 {
    let mut m = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    m
}

pub fn cmat_apply(m: &CMat3, c: &CVec) -> CVec {
    let mut out = CZERO3;
    for (o, row) in out.iter_mut().zip(m) {
        *o = row[0] * c[0] + row[1] * c[1] + row[2] * c[2];
    }
    out
}

/// Orthonormal basis of the orthogonal complement of a nonzero `v` in ℝⁿ
/// (n − 1 vectors), built by Gram–Schmidt against the coordinate axes.
pub fn orthonormal_complement(v: &RVec, n: usize) -> ([RVec; 2], usize) {
    let vn = norm(v);
    let u = scale(v, 1.0 / vn);
    let mut basis: [RVec; 3] = [u, [0.0; 3], [0.0; 3]];
    let mut count = 1;
    // Try axes in order of least alignment with v.
    let mut axes = [0usize, 1, 2];
    axes[..n].sort_by(|&a, &b| libm::fabs(u[a]).total_cmp(&libm::fabs(u[b])));
    for &ax in axes.iter().take(n) {
        if count == n {
            break;
        }
        let mut e = [0.0; 3];
        e[ax] = 1.0;
        for b in basis.iter().take(count) {
            let p = dot(&e, b);
            e = [e[0] - p * b[0], e[1] - p * b[1], e[2] - p * b[2]];
        }
        let en = norm(&e);
        if en > 1e-8 {
            basis[count] = scale(&e, 1.0 / en);
            count += 1;
        }
    }
    ([basis[1], basis[2]], n - 1)
}
