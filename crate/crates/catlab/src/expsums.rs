//! Gauss sums, twisted quadratic sums, and their normalization to real
//! values in [-2, 2] whose rescaled halves equidistribute under the
//! semicircle measure.

use num_complex::Complex64;

use crate::eigenfunctions::DirichletCharacter;
use crate::error::{Error, Result};
use crate::kernels::SumKernel;
use crate::ringmod::{is_prime, legendre, root_table, ModInt};

/// `G(R, chi) = sum_x chi(x) e_p(R x)`; modulus sqrt(p) for nontrivial
/// chi, and -1 for the principal character (chi(0) = 0 drops one term of
/// a full geometric sum).
pub fn gauss_sum(chi: &DirichletCharacter, r: u64) -> Result<Complex64> {
    let p = chi.modulus();
    let r = r % p;
    if r == 0 {
        return Err(Error::ZeroTwist(p));
    }
    let table = root_table(p);
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 1..p {
        acc += chi.value(x) * table[(r as u128 * x as u128 % p as u128) as usize];
    }
    Ok(acc)
}

/// `H_p(chi, R)(t) = sum_y e_p(R (y^2 + t y)) chi(y)` with chi(0) = 0.
pub fn h_sum(chi: &DirichletCharacter, r: u64, t: u64) -> Complex64 {
    let p = chi.modulus();
    let table = root_table(p);
    let rm = ModInt::new(r, p);
    let tm = ModInt::new(t, p);
    let mut acc = Complex64::new(0.0, 0.0);
    for y in 1..p {
        let ym = ModInt::new(y, p);
        let e = rm.mul(ym.mul(ym).add(tm.mul(ym)));
        acc += chi.value(y) * table[e.value() as usize];
    }
    acc
}

/// The complete quadratic sum `sum_{y mod p} e_p(a y^2 + b y)` for a != 0;
/// its modulus is exactly sqrt(p).
pub fn complete_quadratic_sum(p: u64, a: u64, b: u64) -> Result<Complex64> {
    if !is_prime(p) || p == 2 {
        return Err(Error::CompositeModulus(p));
    }
    if a % p == 0 {
        return Err(Error::ZeroTwist(p));
    }
    let table = root_table(p);
    let am = ModInt::new(a, p);
    let bm = ModInt::new(b, p);
    let mut acc = Complex64::new(0.0, 0.0);
    for y in 0..p {
        let ym = ModInt::new(y, p);
        let e = am.mul(ym).mul(ym).add(bm.mul(ym));
        acc += table[e.value() as usize];
    }
    Ok(acc)
}

/// A normalized sum profile: all p values of `F_p(chi, R)`, real within
/// floating-point noise and bounded by 2 in absolute value.
pub struct SumProfile {
    pub p: u64,
    pub character_index: u64,
    pub twist: u64,
    /// The square root chosen by the principal branch; flipping it negates
    /// the whole profile.
    pub branch: Complex64,
    pub values: Vec<Complex64>,
    pub max_imag: f64,
    pub max_abs: f64,
}

impl SumProfile {
    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }
}

/// Principal square root: the result argument lies in (-pi/2, pi/2].
fn principal_sqrt(z: Complex64) -> Complex64 {
    let (r, theta) = z.to_polar();
    Complex64::from_polar(r.sqrt(), theta / 2.0)
}

/// Katz normalization of the twisted quadratic sums, evaluated for all
/// t mod p:
/// `F(t) = - e_p(R t^2 / 8) / sqrt(chi(-1/2) G(R,chi) G(R,Lambda)) * H(t)`.
pub fn f_normalized(
    chi: &DirichletCharacter,
    r: u64,
    kernel: &dyn SumKernel,
) -> Result<SumProfile> {
    let p = chi.modulus();
    if p == 2 {
        return Err(Error::EvenPrime);
    }
    if chi.is_trivial() {
        return Err(Error::NontrivialRequired);
    }
    let r = r % p;
    if r == 0 {
        return Err(Error::ZeroTwist(p));
    }

    let table = root_table(p);
    let quad = quadratic_character_values(p);
    let g_chi = gauss_sum(chi, r)?;
    let g_quad = {
        let mut acc = Complex64::new(0.0, 0.0);
        for x in 1..p {
            acc += quad[x as usize] * table[(r as u128 * x as u128 % p as u128) as usize];
        }
        acc
    };
    let minus_half = ModInt::new(2, p).inv()?.neg();
    let branch = principal_sqrt(chi.value(minus_half.value()) * g_chi * g_quad);

    // All H(t) at once: a = R, linear multiplier b = R.
    let h_values = kernel.twisted_rows(p, r, r, &chi.values());

    let inv8 = ModInt::new(8, p).inv()?;
    let rm = ModInt::new(r, p);
    let mut values = Vec::with_capacity(p as usize);
    let mut max_imag = 0.0f64;
    let mut max_abs = 0.0f64;
    for t in 0..p {
        let tm = ModInt::new(t, p);
        let phase = table[rm.mul(tm).mul(tm).mul(inv8).value() as usize];
        let f = -phase / branch * h_values[t as usize];
        max_imag = max_imag.max(f.im.abs());
        max_abs = max_abs.max(f.norm());
        values.push(f);
    }

    let profile = SumProfile {
        p,
        character_index: chi.index(),
        twist: r,
        branch,
        values,
        max_imag,
        max_abs,
    };
    // Contract checks baked into the type. The reality tolerance scales
    // with sqrt(p) to cover accumulation at large moduli.
    let reality_tol = 1e-8 * (p as f64).sqrt().max(1.0);
    if profile.max_imag >= reality_tol {
        return Err(Error::Invalid(format!(
            "profile not real: max |Im F| = {:.3e} at p={p}",
            profile.max_imag
        )));
    }
    if profile.max_abs > 2.0 + 1e-8 {
        return Err(Error::Invalid(format!(
            "profile out of range: max |F| = {} at p={p}",
            profile.max_abs
        )));
    }
    Ok(profile)
}

fn quadratic_character_values(p: u64) -> Vec<Complex64> {
    (0..p)
        .map(|x| Complex64::new(legendre(ModInt::new(x, p)).unwrap_or(0) as f64, 0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenfunctions::CharacterTable;
    use crate::kernels::{DirectKernel, FftKernel};

    #[test]
    fn gauss_sum_examples() {
        let table = CharacterTable::new(7).unwrap();
        let chi0 = DirichletCharacter::new(&table, 0);
        let g = gauss_sum(&chi0, 1).unwrap();
        assert!((g - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        let chi1 = DirichletCharacter::new(&table, 1);
        let g = gauss_sum(&chi1, 1).unwrap();
        assert!((g.norm() - 7.0f64.sqrt()).abs() < 1e-9);
        assert!(gauss_sum(&chi1, 0).is_err());
    }

    #[test]
    fn gauss_sum_twist_covariance_for_quadratic() {
        // G(R, Lambda) = Lambda(R) G(1, Lambda).
        for p in [7u64, 11, 13] {
            let table = CharacterTable::new(p).unwrap();
            let quad = DirichletCharacter::new(&table, (p - 1) / 2);
            let base = gauss_sum(&quad, 1).unwrap();
            for r in 2..p {
                let got = gauss_sum(&quad, r).unwrap();
                let sign = legendre(ModInt::new(r, p)).unwrap() as f64;
                assert!((got - base * sign).norm() < 1e-9, "p={p} r={r}");
            }
        }
    }

    #[test]
    fn h_sum_weil_bound() {
        for p in [7u64, 31, 101] {
            let table = CharacterTable::new(p).unwrap();
            let bound = 2.0 * (p as f64).sqrt();
            for k in [1u64, 2, (p - 1) / 2] {
                if k == 0 {
                    continue;
                }
                let chi = DirichletCharacter::new(&table, k);
                for t in 0..p {
                    let h = h_sum(&chi, 1, t).norm();
                    assert!(h <= bound + 1e-9, "p={p} k={k} t={t} |H|={h}");
                }
            }
        }
    }

    #[test]
    fn trivial_character_h_sum_interval() {
        // The principal-character sum is a complete quadratic sum minus
        // its y=0 term, so its modulus sits in [sqrt(p)-1, sqrt(p)+1].
        for p in [7u64, 11, 31] {
            let table = CharacterTable::new(p).unwrap();
            let chi0 = DirichletCharacter::new(&table, 0);
            let s = (p as f64).sqrt();
            for t in 0..p {
                let h = h_sum(&chi0, 1, t);
                assert!(h.norm() >= s - 1.0 - 1e-9 && h.norm() <= s + 1.0 + 1e-9);
                let complete = complete_quadratic_sum(p, 1, t).unwrap();
                assert!((complete - h - Complex64::new(1.0, 0.0)).norm() < 1e-10);
                assert!((complete.norm() - s).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn quadratic_character_h_at_zero_shift() {
        // H(Lambda, R)(0) = sum_y Lambda(y) e_p(R y^2). The +-y terms pair
        // up: they cancel when Lambda(-1) = -1 (p = 3 mod 4), and
        // otherwise combine into the two quartic-character Gauss sums
        // G(R, chi_4) + G(R, conj chi_4).
        for p in [7u64, 11, 19, 23] {
            let table = CharacterTable::new(p).unwrap();
            let quad = DirichletCharacter::new(&table, (p - 1) / 2);
            assert!(h_sum(&quad, 1, 0).norm() < 1e-9, "p={p}");
        }
        for p in [5u64, 13, 17, 29] {
            let table = CharacterTable::new(p).unwrap();
            let quad = DirichletCharacter::new(&table, (p - 1) / 2);
            let h = h_sum(&quad, 1, 0);
            let chi4 = DirichletCharacter::new(&table, (p - 1) / 4);
            let chi4c = DirichletCharacter::new(&table, 3 * (p - 1) / 4);
            let expected = gauss_sum(&chi4, 1).unwrap() + gauss_sum(&chi4c, 1).unwrap();
            assert!((h - expected).norm() < 1e-9, "p={p}");
            assert!(h.norm() <= 2.0 * (p as f64).sqrt() + 1e-9);
        }
    }

    #[test]
    fn profile_real_and_bounded() {
        let p = 101u64;
        let table = CharacterTable::new(p).unwrap();
        let chi = DirichletCharacter::new(&table, 1);
        let profile = f_normalized(&chi, 1, &DirectKernel).unwrap();
        assert!(profile.max_imag < 1e-8);
        assert!(profile.max_abs <= 2.0 + 1e-8);
        assert_eq!(profile.values.len(), 101);
    }

    #[test]
    fn profile_rejects_bad_input() {
        let table = CharacterTable::new(101).unwrap();
        let chi0 = DirichletCharacter::new(&table, 0);
        assert!(matches!(
            f_normalized(&chi0, 1, &DirectKernel),
            Err(Error::NontrivialRequired)
        ));
        let chi = DirichletCharacter::new(&table, 1);
        assert!(matches!(
            f_normalized(&chi, 0, &DirectKernel),
            Err(Error::ZeroTwist(101))
        ));
    }

    #[test]
    fn branch_flip_negates_profile() {
        // Both square-root branches satisfy the reality/range invariants;
        // the choice is a global sign.
        let p = 31u64;
        let table = CharacterTable::new(p).unwrap();
        let chi = DirichletCharacter::new(&table, 2);
        let profile = f_normalized(&chi, 3, &DirectKernel).unwrap();
        let flipped: Vec<Complex64> = profile.values.iter().map(|z| -z).collect();
        for (f, g) in profile.values.iter().zip(&flipped) {
            assert!((f + g).norm() < 1e-15);
            assert!(g.im.abs() < 1e-8 && g.norm() <= 2.0 + 1e-8);
        }
    }

    #[test]
    fn profile_ties_to_eigenfunction_amplitudes() {
        // |psi_chi(x)| = (1 - 1/p)^(-1/2) |F(2x / b2)| pointwise: the
        // cross-check linking the Bruhat data, the eigenfunctions, and
        // the normalized sums.
        use crate::classical::CatMap;
        use crate::eigenfunctions::SplitContext;
        let map = CatMap::new(3, 2, 4, 3).unwrap();
        for p in [7u64, 17, 41] {
            let ctx = SplitContext::new(&map, p).unwrap();
            let params = ctx.bruhat_params();
            let r = ModInt::new(2, p).inv().unwrap();
            let twist = r.mul(params.b2).value();
            for k in [1u64, 2] {
                let chi = ctx.character(k);
                let psi = ctx.psi_chi(&chi, &DirectKernel).unwrap();
                let profile = f_normalized(&chi, twist, &DirectKernel).unwrap();
                let b2_inv = params.b2.inv().unwrap();
                let scale = 1.0 / (1.0 - 1.0 / p as f64).sqrt();
                for x in 0..p {
                    let xm = ModInt::new(x, p);
                    let arg = ModInt::new(2, p).mul(xm).mul(b2_inv).value() as usize;
                    let lhs = psi.values()[x as usize].norm();
                    let rhs = scale * profile.values[arg].norm();
                    assert!((lhs - rhs).abs() < 1e-8, "p={p} k={k} x={x}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn kernels_agree_on_profiles() {
        let p = 499u64;
        let table = CharacterTable::new(p).unwrap();
        let chi = DirichletCharacter::new(&table, 5);
        let a = f_normalized(&chi, 7, &DirectKernel).unwrap();
        let b = f_normalized(&chi, 7, &FftKernel).unwrap();
        let max_diff = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(max_diff < 1e-9, "kernel mismatch {max_diff}");
    }
}
