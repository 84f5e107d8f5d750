use fmflow_core::dynamics::{nonlinearity, Lattice, TruncationPolicy};
use fmflow_core::math::{self, C64};
use fmflow_core::measure::SymbolMatrix;
use fmflow_core::symbols::{
    classify_ordered, disordered_symbol, dispersion_disordered, helmholtz_symbol, linearized_symbol, propagator,
};
use fmflow_core::{Atom, ModelParams, ProductKind, SpectralMeasure, SteadyState};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn scalar_atoms(dim: usize, max: usize) -> impl Strategy<Value = Vec<Atom>> {
    prop::collection::vec((prop::collection::vec(-3.0..3.0f64, dim), coeff()), 1..max)
        .prop_map(|v| v.into_iter().map(|(xi, c)| Atom::new(&xi, &[c]).unwrap()).collect())
}

fn hermitian(dim: usize, max: usize) -> impl Strategy<Value = SpectralMeasure> {
    scalar_atoms(dim, max).prop_map(|atoms| {
        let mut all = atoms.clone();
        for a in &atoms {
            let neg: Vec<f64> = a.xi().iter().map(|x| -x).collect();
            all.push(Atom::new(&neg, &[a.coeff()[0].conj()]).unwrap());
        }
        SpectralMeasure::from_atoms(all).unwrap()
    })
}

fn distinct_sums(u: &SpectralMeasure, v: &SpectralMeasure) -> bool {
    let mut sums: Vec<[f64; 3]> = Vec::new();
    for a in u.atoms() {
        for b in v.atoms() {
            sums.push(math::add(a.xi3(), b.xi3()));
        }
    }
    for i in 0..sums.len() {
        for j in 0..i {
            let d = [sums[i][0] - sums[j][0], sums[i][1] - sums[j][1], sums[i][2] - sums[j][2]];
            if math::norm(&d) < 1e-6 {
                return false;
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn algebra_inequality(dim in 2usize..=3, a in scalar_atoms(3, 6), b in scalar_atoms(3, 6)) {
        let cut = |v: &Vec<Atom>| {
            v.iter().map(|x| Atom::new(&x.xi()[..dim], x.coeff()).unwrap()).collect::<Vec<_>>()
        };
        let u = SpectralMeasure::from_atoms(cut(&a)).unwrap();
        let v = SpectralMeasure::from_atoms(cut(&b)).unwrap();
        let uv = u.multiply(&v, ProductKind::Componentwise, 1000).unwrap();
        let lhs = uv.fm_norm(0.0);
        let rhs = u.fm_norm(0.0) * v.fm_norm(0.0) / math::two_pi_half_pow(dim);
        // Floating-point evaluation bound: complex products, hypot, sums of
        // the pair terms and the three scalings.
        let pairs = (u.len() * v.len()) as f64;
        prop_assert!(lhs <= rhs * (1.0 + (pairs + 8.0) * f64::EPSILON));
        if distinct_sums(&u, &v) {
            prop_assert!((lhs - rhs).abs() <= 1e-13 * rhs);
        }
    }

    #[test]
    fn normalize_idempotent(a in scalar_atoms(2, 12)) {
        let m = SpectralMeasure::normalize(a, 0.5, 0.1).unwrap();
        let again = SpectralMeasure::normalize(m.atoms().to_vec(), 0.5, 0.1).unwrap();
        prop_assert_eq!(m.atoms(), again.atoms());
    }

    #[test]
    fn reorder_and_split_invariance(a in scalar_atoms(2, 10), seed in 0usize..1000, frac in 0.1..0.9f64) {
        let base = SpectralMeasure::from_atoms(a.clone()).unwrap().fm_norm(0.0);
        let mut r = a.clone();
        let len = r.len();
        r.rotate_left(seed % len);
        r.reverse();
        prop_assert!((SpectralMeasure::from_atoms(r.clone()).unwrap().fm_norm(0.0) - base).abs() <= 1e-13 * base);
        let victim = r.remove(seed % len);
        let c = victim.coeff()[0];
        r.push(Atom::new(victim.xi(), &[c * frac]).unwrap());
        r.push(Atom::new(victim.xi(), &[c * (1.0 - frac)]).unwrap());
        let split = SpectralMeasure::from_atoms(r).unwrap().fm_norm(0.0);
        prop_assert!((split - base).abs() <= 1e-13 * base);
    }

    #[test]
    fn hermitian_closure(u in hermitian(2, 5), v in hermitian(2, 5)) {
        prop_assume!(u.is_hermitian(1e-14) && v.is_hermitian(1e-14));
        let uv = u.multiply(&v, ProductKind::Componentwise, 10_000).unwrap();
        prop_assert!(uv.is_hermitian(1e-12));
        prop_assert!(uv.detect_flags(1e-12).real_field);
    }

    #[test]
    fn restrict_contraction(a in scalar_atoms(2, 10), w in 0.1..3.0f64, ph in 0.0..6.3f64) {
        let u = SpectralMeasure::from_atoms(a).unwrap();
        // |ψ| ≤ 1 everywhere
        let r = u.restrict(|xi| {
            let m = 1.0 / (1.0 + w * (xi[0] * xi[0] + xi[1] * xi[1]));
            Some(SymbolMatrix::scalar(C64::new(m * math::cos(ph * xi[0]), m * math::sin(ph * xi[0]))))
        }).unwrap();
        prop_assert!(r.fm_norm(0.0) <= u.fm_norm(0.0) * (1.0 + 1e-15));
    }

    #[test]
    fn multiplier_norm_attained(xi in prop::collection::vec(-3.0..3.0f64, 2), c in coeff()) {
        prop_assume!(c.norm() > 1e-3);
        let u = SpectralMeasure::from_atoms(vec![Atom::new(&xi, &[c]).unwrap()]).unwrap();
        let sigma = |x: &[f64]| 1.0 + x[0] * x[0] + x[1] * x[1];
        let r = u.restrict(|x| Some(SymbolMatrix::real_scalar(sigma(x)))).unwrap();
        let want = sigma(&xi) * u.fm_norm(0.0);
        prop_assert!((r.fm_norm(0.0) - want).abs() <= 1e-14 * want);
    }

    #[test]
    fn helmholtz_properties(dim in 2usize..=3, xi in prop::collection::vec(-5.0..5.0f64, 3)) {
        let x = &xi[..dim];
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 1e-6);
        let p = helmholtz_symbol(x).unwrap();
        let p2 = math::rmat_mul(&p, &p);
        let mut tr = 0.0;
        for i in 0..dim {
            tr += p[i][i];
            let px: f64 = (0..dim).map(|j| p[i][j] * x[j]).sum();
            prop_assert!(px.abs() < 1e-14 * (1.0 + math::norm(&math::rvec(x))));
            for j in 0..dim {
                prop_assert!((p2[i][j] - p[i][j]).abs() < 1e-14);
                prop_assert!((p[i][j] - p[j][i]).abs() == 0.0);
            }
        }
        prop_assert!((tr - (dim as f64 - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn dispersion_two_paths(g2 in 0.01..5.0f64, g0 in -5.0..5.0f64, al in -5.0..5.0f64, k in 0.0..5.0f64) {
        let p = ModelParams::new(g2, g0, al, 1.0, 2);
        let a = dispersion_disordered(k, &p);
        let b = -disordered_symbol(k, &p);
        prop_assert_eq!(a, b);
        // The matrix symbol on a solenoidal direction gives the same number.
        if k > 0.0 {
            let s = SteadyState::disordered(&p);
            let m = linearized_symbol(&[k, 0.0], &p, &s).unwrap();
            let yy = m.data[1][1].re;
            let s2 = k * k;
            let scale = al.abs() + g0.abs() * s2 + g2 * s2 * s2;
            prop_assert!((yy + a).abs() <= 1e-14 * scale);
        }
    }

    #[test]
    fn propagator_semigroup_and_expm(
        dim in 2usize..=3,
        ordered in any::<bool>(),
        xi in prop::collection::vec(-2.0..2.0f64, 3),
        h1 in 0.001..1.0f64,
        h2 in 0.001..1.0f64,
        g0 in -2.0..2.0f64,
        lam in -1.0..1.0f64,
    ) {
        let x = &xi[..dim];
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 1e-4);
        let (p, s) = if ordered {
            let p = ModelParams::new(1.0, g0, -1.0, 1.5, dim).with_lambda0(lam);
            let dir = [0.3, -0.7, 0.2];
            (p, SteadyState::ordered(&p, &dir[..dim]).unwrap())
        } else {
            let p = ModelParams::new(1.0, g0, 0.4, 1.0, dim);
            (p, SteadyState::disordered(&p))
        };
        let a = propagator(x, h1, &p, &s).unwrap();
        let b = propagator(x, h2, &p, &s).unwrap();
        let ab = propagator(x, h1 + h2, &p, &s).unwrap();
        let prod = a.compose(&b);
        let scale = ab.frobenius().max(1.0);
        for i in 0..dim {
            for j in 0..dim {
                prop_assert!((prod.data[i][j] - ab.data[i][j]).norm() <= 1e-12 * scale);
            }
        }
        let sym = linearized_symbol(x, &p, &s).unwrap();
        let oracle = expm(&sym.data, -h1, dim);
        let sa = a.frobenius().max(1.0);
        for i in 0..dim {
            for j in 0..dim {
                prop_assert!((a.data[i][j] - oracle[i][j]).norm() <= 1e-12 * sa);
            }
        }
    }

    #[test]
    fn ordered_witness_quadratic_form(g0 in -3.0..-0.01f64, g2 in 0.1..3.0f64, dim in 2usize..=3) {
        let p = ModelParams::new(g2, g0, -1.0, 1.0, dim);
        let dir = [1.0, 0.5, -0.25];
        let s = SteadyState::ordered(&p, &dir[..dim]).unwrap();
        let v = classify_ordered(&p, &s.v[..dim]).unwrap();
        let w = v.witness.unwrap();
        let x = math::rvec(&w.direction[..dim]);
        let xi = math::rvec(&w.xi[..dim]);
        prop_assert!(math::dot(&x, &xi).abs() < 1e-12);
        let m = linearized_symbol(&xi[..dim], &p, &s).unwrap();
        let mut q = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                q += x[i] * m.data[i][j].re * x[j];
            }
        }
        let k2 = math::dot(&xi, &xi);
        let want = g2 * k2 * k2 + g0 * k2;
        prop_assert!(want < 0.0);
        prop_assert!((q - want).abs() <= 1e-12 * want.abs());
        prop_assert!((w.quadratic_form - want).abs() <= 1e-12 * want.abs());
    }
}

/// Dense `exp(t·M)` by scaling and squaring with a 30-term Taylor series.
fn expm(m: &[[C64; 3]; 3], t: f64, n: usize) -> [[C64; 3]; 3] {
    let norm: f64 = m.iter().flatten().map(|z| z.norm()).sum::<f64>() * t.abs();
    let mut sq = 0;
    while norm / f64::from(1u32 << sq) > 0.5 {
        sq += 1;
    }
    let s = t / f64::from(1u32 << sq);
    let mut a = [[C64::new(0.0, 0.0); 3]; 3];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = m[i][j] * s;
        }
    }
    let mut out = [[C64::new(0.0, 0.0); 3]; 3];
    let mut term = out;
    for i in 0..n {
        out[i][i] = C64::new(1.0, 0.0);
        term[i][i] = C64::new(1.0, 0.0);
    }
    for k in 1..30 {
        term = math::cmat_mul(&term, &a);
        for row in term.iter_mut() {
            for z in row.iter_mut() {
                *z /= k as f64;
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..sq {
        out = math::cmat_mul(&out, &out);
    }
    out
}

#[test]
fn quadratic_cubic_bound_has_uniform_constant() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let p = ModelParams::new(1.0, -1.0, -1.0, 1.0, 2).with_lambda0(1.0);
    let s = SteadyState::ordered(&p, &[1.0, 0.0]).unwrap();
    let kmin = 0.5;
    let lattice = Lattice::cubic(2, kmin).unwrap();
    let policy = TruncationPolicy::new(lattice, 4.0);
    let c = 1.0 / math::two_pi_half_pow(2);
    let bound =
        c * p.lambda0 / kmin + p.beta * c * c / (kmin * kmin * kmin) + 3.0 * p.beta * s.speed() * c / (kmin * kmin);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let mut atoms = Vec::new();
        for _ in 0..rng.gen_range(1..5) {
            let key = [rng.gen_range(-4..=4) as f64, rng.gen_range(-4..=4) as f64];
            if key == [0.0, 0.0] {
                continue;
            }
            let xi = [key[0] * kmin, key[1] * kmin];
            let perp = [-xi[1], xi[0]];
            let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            atoms.push(Atom::new(&xi, &[z * perp[0], z * perp[1]]).unwrap());
            atoms.push(Atom::new(&[-xi[0], -xi[1]], &[z.conj() * perp[0], z.conj() * perp[1]]).unwrap());
        }
        if atoms.is_empty() {
            continue;
        }
        let u = SpectralMeasure::from_atoms(atoms).unwrap();
        // Scale so the FM^1 norm is at most 1.
        let scale = rng.gen_range(0.01..1.0) / u.fm_norm(1.0);
        let u = u.map_atoms(|a| {
            let c: Vec<C64> = a.coeff().iter().map(|z| z * scale).collect();
            Atom::new(a.xi(), &c).unwrap()
        });
        let h = nonlinearity(&u, &p, &s, &policy).unwrap();
        let ratio = h.fm_norm(0.0) / (u.fm_norm(1.0) * u.fm_norm(1.0));
        worst = worst.max(ratio);
        assert!(ratio <= bound, "{ratio} > {bound}");
    }
    println!("quadratic-cubic constant: max observed {worst:.4}, analytic bound {bound:.4}");
}
