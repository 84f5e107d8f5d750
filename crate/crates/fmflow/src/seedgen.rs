//! Seeded random initial data: real, divergence-free, zero-free fields on
//! the truncation lattice.

use fmflow_core::dynamics::{Key, TruncationPolicy};
use fmflow_core::{Atom, SpectralMeasure, C64};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Seed;
use crate::CliError;

/// Keys in the half-space "first nonzero entry positive" inside the ball.
fn candidate_keys(policy: &TruncationPolicy, max_index: i32) -> Vec<Key> {
    let n = policy.lattice.dim();
    let r = max_index;
    let z = if n == 3 { r } else { 0 };
    let mut keys = Vec::new();
    for i in -r..=r {
        for j in -r..=r {
            for k in -z..=z {
                let key = [i, j, k];
                let first = key.iter().copied().find(|&x| x != 0);
                if !matches!(first, Some(x) if x > 0) {
                    continue;
                }
                let xi = policy.lattice.wavevector(&key);
                let k2: f64 = xi.iter().map(|x| x * x).sum();
                if k2 <= policy.k_max * policy.k_max {
                    keys.push(key);
                }
            }
        }
    }
    keys
}

/// `seed.modes` Hermitian pairs with random solenoidal amplitudes, scaled so
/// that `‖u‖_FM = seed.fm_norm`.
pub fn random_field(seed: &Seed, seed_value: u64, policy: &TruncationPolicy) -> Result<SpectralMeasure, CliError> {
    let n = policy.lattice.dim();
    let mut keys = candidate_keys(policy, seed.max_index);
    if seed.modes == 0 || seed.modes > keys.len() {
        return Err(CliError::Config(format!(
            "seed.modes must be in 1..={} for this lattice, k_max and max_index",
            keys.len()
        )));
    }
    if !(seed.fm_norm > 0.0 && seed.fm_norm.is_finite()) {
        return Err(CliError::Config("seed.fm_norm must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed_value);
    keys.shuffle(&mut rng);
    keys.truncate(seed.modes);
    keys.sort();

    let mut atoms = Vec::with_capacity(2 * keys.len());
    for key in &keys {
        let xi = policy.lattice.wavevector(key);
        let k2: f64 = xi[..n].iter().map(|x| x * x).sum();
        let mut c = [C64::new(0.0, 0.0); 3];
        for z in c.iter_mut().take(n) {
            *z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        // second pass removes the roundoff left when c was nearly parallel to ξ
        for _ in 0..2 {
            let dot: C64 = (0..n).map(|i| c[i] * xi[i]).sum();
            for i in 0..n {
                c[i] -= dot * (xi[i] / k2);
            }
        }
        let minus: Vec<f64> = xi[..n].iter().map(|x| -x).collect();
        let conj: Vec<C64> = c[..n].iter().map(|z| z.conj()).collect();
        atoms.push(Atom::new(&xi[..n], &c[..n])?);
        atoms.push(Atom::new(&minus, &conj)?);
    }
    let u = SpectralMeasure::from_atoms_in(n, n, atoms)?;
    let norm = u.fm_norm(0.0);
    if norm == 0.0 {
        return Err(CliError::Config("random field degenerated to zero".into()));
    }
    let s = seed.fm_norm / norm;
    let scaled = u
        .atoms()
        .iter()
        .map(|a| Atom::new(a.xi(), &a.coeff().iter().map(|z| z * s).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SpectralMeasure::from_atoms_in(n, n, scaled)?)
}
