//! The nonlinear operator `H(u) = P[β|u|²u + λ₀(u·∇)u − N(u)]` on lattice
//! fields, truncated to the Galerkin ball.
//!
//! Intermediate products such as `|u|²` are kept in full; only the final
//! terms entering `H` are restricted to `|ξ| ≤ k_max`.

use crate::math::{self, C64, CZERO3, I, ZERO};
use crate::symbols::{helmholtz_symbol, ModelParams, OriginPolicy, SteadyState, SteadyStateKind};
use crate::Result;

use super::lattice::{convolve, LatticeField, TruncationPolicy};

fn radius(policy: &TruncationPolicy) -> Option<(f64, OriginPolicy)> {
    Some((policy.k_max, policy.origin_policy))
}

/// `|u|² = u·u` (bilinear), untruncated scalar field.
pub fn square_norm(u: &LatticeField) -> LatticeField {
    convolve(u, u, 1, None, |_, c, _, d| [math::cdot(c, d), ZERO, ZERO])
}

/// `(u·∇)u`, truncated.
pub fn advection_term(u: &LatticeField, policy: &TruncationPolicy) -> LatticeField {
    convolve(u, u, u.components(), radius(policy), |_, c, eta, d| math::cscale(d, I * math::rcdot(eta, c)))
}

/// `|u|²u`, truncated.
pub fn cubic_term(u: &LatticeField, policy: &TruncationPolicy) -> LatticeField {
    let s = square_norm(u);
    convolve(&s, u, u.components(), radius(policy), |_, s, _, d| math::cscale(d, s[0]))
}

/// `N(u) = −β|u|²V − 2β(u·V)u`, truncated; zero for the disordered state.
pub fn steady_coupling(u: &LatticeField, state: &SteadyState, policy: &TruncationPolicy) -> LatticeField {
    if state.kind == SteadyStateKind::Disordered {
        return LatticeField::zero(*u.lattice(), u.components());
    }
    let v = state.v;
    let b = state.beta;
    let lattice = *u.lattice();
    let mut s = square_norm(u);
    s.retain(|k, _| policy.keeps(&lattice.wavevector(k)));
    let sv = s.map(|_, c| {
        let z = c[0] * (-b);
        [z * v[0], z * v[1], z * v[2]]
    });
    let w = u.map(|_, c| [math::rcdot(&v, c), ZERO, ZERO]);
    let wu = convolve(&w, u, u.components(), radius(policy), |_, w, _, d| math::cscale(d, w[0] * (-2.0 * b)));
    LatticeField::linear_combination(&[(math::ONE, &sv), (math::ONE, &wu)])
}

/// Applies `σ_P(ξ)` per key; origin atoms follow the policy.
pub fn project(f: &LatticeField, policy: OriginPolicy) -> LatticeField {
    let lattice = *f.lattice();
    let n = f.dim();
    let mut out = f.map(|k, c| {
        let xi = lattice.wavevector(k);
        if math::dot(&xi, &xi) == 0.0 {
            return if policy == OriginPolicy::Keep { *c } else { CZERO3 };
        }
        math::rmat_apply(&helmholtz_symbol(&xi[..n]).unwrap(), c)
    });
    out.retain(|_, c| math::cnorm(c) > 0.0);
    out
}

/// `H(u)` on the lattice. Fails only on atom-cap overflow.
pub fn nonlinearity_lattice(
    u: &LatticeField,
    params: &ModelParams,
    state: &SteadyState,
    policy: &TruncationPolicy,
) -> Result<LatticeField> {
    let mut terms: alloc::vec::Vec<(C64, LatticeField)> = alloc::vec::Vec::with_capacity(3);
    terms.push((C64::new(params.beta, 0.0), cubic_term(u, policy)));
    if params.lambda0 != 0.0 {
        terms.push((C64::new(params.lambda0, 0.0), advection_term(u, policy)));
    }
    if state.kind == SteadyStateKind::Ordered {
        terms.push((C64::new(-1.0, 0.0), steady_coupling(u, state, policy)));
    }
    let refs: alloc::vec::Vec<(C64, &LatticeField)> = terms.iter().map(|(s, f)| (*s, f)).collect();
    let sum = LatticeField::linear_combination(&refs);
    let mut h = project(&sum, policy.origin_policy);
    h.truncate(policy)?;
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::lattice::Lattice;
    use crate::math::CVec;
    use crate::measure::{Atom, ProductKind, SpectralMeasure};
    use alloc::vec;
    use alloc::vec::Vec;

    fn shear_pair(l: &Lattice) -> LatticeField {
        // u = 2 cos(x/2) e_y on the lattice with spacing 1/2.
        let one = C64::new(1.0, 0.0);
        LatticeField::from_pairs(*l, 2, vec![([1, 0, 0], [ZERO, one, ZERO]), ([-1, 0, 0], [ZERO, one, ZERO])])
    }

    #[test]
    fn shear_flow_has_no_advection() {
        let l = Lattice::cubic(2, 0.5).unwrap();
        let u = shear_pair(&l);
        let p = TruncationPolicy::new(l, 10.0);
        assert!(advection_term(&u, &p).is_empty());
    }

    #[test]
    fn cubic_term_of_cosine() {
        // (2cos x)³ = 2cos 3x + 6cos x: coefficients 1 at ±3, 3 at ±1.
        let l = Lattice::cubic(2, 1.0).unwrap();
        let u = shear_pair(&l);
        let p = TruncationPolicy::new(l, 10.0);
        let c = cubic_term(&u, &p);
        let vals: Vec<(i32, f64)> = c.iter().map(|(k, c)| (k[0], c[1].re)).collect();
        assert_eq!(vals, vec![(-3, 1.0), (-1, 3.0), (1, 3.0), (3, 1.0)]);
        let cut = cubic_term(&u, &TruncationPolicy::new(l, 2.0));
        assert_eq!(cut.len(), 2);
    }

    #[test]
    fn advection_matches_measure_products() {
        let l = Lattice::cubic(2, 1.0).unwrap();
        let u = LatticeField::from_pairs(
            l,
            2,
            vec![
                ([1, 1, 0], [C64::new(0.3, 0.1), C64::new(-0.3, -0.1), ZERO]),
                ([-1, -1, 0], [C64::new(0.3, -0.1), C64::new(-0.3, 0.1), ZERO]),
                ([2, 0, 0], [ZERO, C64::new(0.0, 0.7), ZERO]),
                ([-2, 0, 0], [ZERO, C64::new(0.0, -0.7), ZERO]),
            ],
        );
        let p = TruncationPolicy { origin_policy: OriginPolicy::Keep, ..TruncationPolicy::new(l, 100.0) };
        let adv = advection_term(&u, &p);

        // Σ_l u_l ∂_l u through measure products.
        let um = u.to_measure();
        let mut acc = SpectralMeasure::zero(2, 2);
        for comp in 0..2 {
            let pick = |_: &[f64]| {
                let mut data = [[ZERO; 3]; 3];
                data[0][comp] = math::ONE;
                Some(crate::measure::SymbolMatrix { rows: 1, cols: 2, data })
            };
            let ul = um.restrict(pick).unwrap();
            let dl = um.restrict(|xi| Some(crate::measure::SymbolMatrix::scalar(I * xi[comp]))).unwrap();
            let prod = ul.multiply(&dl, ProductKind::Componentwise, 1000).unwrap();
            acc = acc.axpy(math::ONE, &prod).unwrap();
        }
        let want = LatticeField::from_measure(&acc, l).unwrap();
        assert_eq!(adv.keys(), want.keys());
        for (a, b) in adv.coeffs().iter().zip(want.coeffs()) {
            assert!(math::cnorm(&math::csub(a, b)) < 1e-14);
        }
    }

    #[test]
    fn coupling_matches_quadratic_coefficients() {
        let params = ModelParams::new(1.0, -1.0, -0.5, 2.0, 3);
        let state = SteadyState::ordered(&params, &[0.2, -1.0, 0.4]).unwrap();
        let a = state.quadratic_coefficients();
        let l = Lattice::cubic(3, 1.0).unwrap();
        let c1 = [C64::new(0.4, 0.2), C64::new(-0.1, 0.3), C64::new(0.25, 0.0)];
        let c2 = [C64::new(-0.2, 0.0), C64::new(0.5, -0.1), C64::new(0.0, 0.6)];
        let u = LatticeField::from_pairs(l, 3, vec![([1, 0, 0], c1), ([0, 2, 0], c2)]);
        let p = TruncationPolicy::new(l, 100.0);
        let n = steady_coupling(&u, &state, &p);
        // Oracle: N = Σ_{j,k} a_{jk} u^j u^k, summed pairwise over atoms.
        let atoms = [([1, 0, 0], c1), ([0, 2, 0], c2)];
        let mut want: Vec<([i32; 3], CVec)> = Vec::new();
        for (ka, ca) in &atoms {
            for (kb, cb) in &atoms {
                let key = [ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]];
                let mut out = CZERO3;
                for j in 0..3 {
                    for k in 0..3 {
                        for i in 0..3 {
                            out[i] += ca[j] * cb[k] * a[j][k][i];
                        }
                    }
                }
                want.push((key, out));
            }
        }
        let want = LatticeField::from_pairs(l, 3, want);
        assert_eq!(n.keys(), want.keys());
        for (x, y) in n.coeffs().iter().zip(want.coeffs()) {
            assert!(math::cnorm(&math::csub(x, y)) < 1e-14);
        }
    }

    #[test]
    fn h_is_solenoidal_and_truncated() {
        let params = ModelParams::new(1.0, -1.0, -0.5, 2.0, 2).with_lambda0(0.8);
        let state = SteadyState::ordered(&params, &[1.0, 0.0]).unwrap();
        let l = Lattice::cubic(2, 0.5).unwrap();
        let raw = vec![
            Atom::new(&[0.5, 0.5], &[C64::new(0.3, 0.2), C64::new(-0.3, -0.2)]).unwrap(),
            Atom::new(&[-0.5, -0.5], &[C64::new(0.3, -0.2), C64::new(-0.3, 0.2)]).unwrap(),
            Atom::new(&[0.0, 1.0], &[C64::new(0.1, 0.0), ZERO]).unwrap(),
            Atom::new(&[0.0, -1.0], &[C64::new(0.1, 0.0), ZERO]).unwrap(),
        ];
        let u = LatticeField::from_measure(&SpectralMeasure::from_atoms(raw).unwrap(), l).unwrap();
        let p = TruncationPolicy::new(l, 1.2);
        let h = nonlinearity_lattice(&u, &params, &state, &p).unwrap();
        assert!(!h.is_empty());
        let hm = h.to_measure();
        assert!(hm.max_divergence_ratio() < 1e-14);
        assert!(hm.atoms().iter().all(|a| a.wavenumber() <= 1.2 && a.wavenumber() > 0.0));
        assert!(hm.is_hermitian(1e-13));
    }
}
