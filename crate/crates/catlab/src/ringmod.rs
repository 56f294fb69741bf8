//! Exact modular arithmetic: residues, roots of unity, quadratic characters.
//!
//! Everything here is a pure function on immutable values. Intermediate
//! products go through `u128` so no operation overflows for moduli
//! below 2^63.

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::fmt;

use crate::error::{Error, Result};

/// A residue in `[0, n)` together with its modulus.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModInt {
    value: u64,
    modulus: u64,
}

impl fmt::Debug for ModInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl fmt::Display for ModInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl ModInt {
    /// Reduces `value` into `[0, n)`. Panics on `n == 0` or `n > 2^63`
    /// (arbitrary precision is out of scope).
    pub fn new(value: u64, modulus: u64) -> Self {
        assert!(modulus != 0, "zero modulus");
        assert!(modulus <= 1 << 63, "modulus exceeds 2^63");
        ModInt {
            value: value % modulus,
            modulus,
        }
    }

    /// Same as `new` but accepts signed input.
    pub fn from_signed(value: i64, modulus: u64) -> Self {
        let m = modulus as i128;
        let v = ((value as i128 % m) + m) % m;
        ModInt::new(v as u64, modulus)
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn check(self, other: ModInt) {
        assert_eq!(self.modulus, other.modulus, "modulus mismatch");
    }

    pub fn add(self, other: ModInt) -> ModInt {
        self.check(other);
        let s = self.value as u128 + other.value as u128;
        ModInt::new((s % self.modulus as u128) as u64, self.modulus)
    }

    pub fn sub(self, other: ModInt) -> ModInt {
        self.check(other);
        let s = self.value as u128 + (self.modulus - other.value) as u128;
        ModInt::new((s % self.modulus as u128) as u64, self.modulus)
    }

    pub fn mul(self, other: ModInt) -> ModInt {
        self.check(other);
        let p = self.value as u128 * other.value as u128;
        ModInt::new((p % self.modulus as u128) as u64, self.modulus)
    }

    pub fn neg(self) -> ModInt {
        if self.value == 0 {
            self
        } else {
            ModInt::new(self.modulus - self.value, self.modulus)
        }
    }

    pub fn pow(self, mut exp: u64) -> ModInt {
        let mut base = self;
        let mut acc = ModInt::new(1 % self.modulus, self.modulus);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            exp >>= 1;
        }
        acc
    }

    /// Modular inverse by extended Euclid; errors when not coprime.
    pub fn inv(self) -> Result<ModInt> {
        let (mut old_r, mut r) = (self.value as i128, self.modulus as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        if old_r != 1 {
            return Err(Error::NotInvertible {
                value: self.value,
                modulus: self.modulus,
            });
        }
        let m = self.modulus as i128;
        Ok(ModInt::new((((old_s % m) + m) % m) as u64, self.modulus))
    }
}

/// `e_n(x) = exp(2 pi i x / n)`, stored as the exact angle numerator.
///
/// Products add numerators mod `n`, so algebraic identities among phases
/// hold exactly; conversion to `Complex64` happens only at the boundary
/// to linear algebra.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct UnitRoot {
    numerator: u64,
    modulus: u64,
}

impl UnitRoot {
    pub fn new(numerator: u64, modulus: u64) -> Self {
        assert!(modulus != 0, "zero modulus");
        UnitRoot {
            numerator: numerator % modulus,
            modulus,
        }
    }

    pub fn from_signed(numerator: i64, modulus: u64) -> Self {
        let m = modulus as i128;
        let v = ((numerator as i128 % m) + m) % m;
        UnitRoot::new(v as u64, modulus)
    }

    pub fn numerator(self) -> u64 {
        self.numerator
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn mul(self, other: UnitRoot) -> UnitRoot {
        assert_eq!(self.modulus, other.modulus, "modulus mismatch");
        let s = (self.numerator as u128 + other.numerator as u128) % self.modulus as u128;
        UnitRoot::new(s as u64, self.modulus)
    }

    pub fn conj(self) -> UnitRoot {
        UnitRoot::new((self.modulus - self.numerator) % self.modulus, self.modulus)
    }

    pub fn eval(self) -> Complex64 {
        let angle = TAU * self.numerator as f64 / self.modulus as f64;
        Complex64::new(angle.cos(), angle.sin())
    }
}

/// Table of all n-th roots of unity, indexed by angle numerator.
pub fn root_table(n: u64) -> Vec<Complex64> {
    (0..n).map(|j| UnitRoot::new(j, n).eval()).collect()
}

/// Deterministic Miller–Rabin, exact for all u64 inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = ModInt::new(a, n).pow(d).value();
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = ModInt::new(x, n).mul(ModInt::new(x, n)).value();
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn require_odd_prime(p: u64) -> Result<()> {
    if p == 2 {
        return Err(Error::EvenPrime);
    }
    if !is_prime(p) {
        return Err(Error::CompositeModulus(p));
    }
    Ok(())
}

/// Legendre symbol of `a` mod an odd prime, via Euler's criterion.
/// Returns 0 iff p divides a.
pub fn legendre(a: ModInt) -> Result<i32> {
    let p = a.modulus();
    require_odd_prime(p)?;
    if a.is_zero() {
        return Ok(0);
    }
    let e = a.pow((p - 1) / 2).value();
    Ok(if e == 1 { 1 } else { -1 })
}

/// Square root mod an odd prime (Tonelli–Shanks), or `None` when `a` is a
/// non-residue. The representative in `[0, p/2]` is chosen so results are
/// reproducible.
pub fn sqrt_mod(a: ModInt) -> Result<Option<ModInt>> {
    let p = a.modulus();
    require_odd_prime(p)?;
    if a.is_zero() {
        return Ok(Some(a));
    }
    if legendre(a)? == -1 {
        return Ok(None);
    }
    let root = if p % 4 == 3 {
        a.pow((p + 1) / 4)
    } else {
        // Tonelli-Shanks: write p-1 = q * 2^s with q odd.
        let mut q = p - 1;
        let mut s = 0u32;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        let mut z = ModInt::new(2, p);
        while legendre(z)? != -1 {
            z = ModInt::new(z.value() + 1, p);
        }
        let mut m = s;
        let mut c = z.pow(q);
        let mut t = a.pow(q);
        let mut r = a.pow((q + 1) / 2);
        while t.value() != 1 {
            let mut i = 0u32;
            let mut t2 = t;
            while t2.value() != 1 {
                t2 = t2.mul(t2);
                i += 1;
            }
            let mut b = c;
            for _ in 0..m - i - 1 {
                b = b.mul(b);
            }
            m = i;
            c = b.mul(b);
            t = t.mul(c);
            r = r.mul(b);
        }
        r
    };
    // Pick the smaller of the two roots.
    let other = root.neg();
    Ok(Some(if root.value() <= other.value() {
        root
    } else {
        other
    }))
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest positive primitive root mod an odd prime.
pub fn primitive_root(p: u64) -> Result<ModInt> {
    require_odd_prime(p)?;
    let factors = distinct_prime_factors(p - 1);
    'next: for g in 2..p {
        let g = ModInt::new(g, p);
        for &q in &factors {
            if g.pow((p - 1) / q).value() == 1 {
                continue 'next;
            }
        }
        return Ok(g);
    }
    unreachable!("every odd prime has a primitive root below p")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre(ModInt::new(1, 7)).unwrap(), 1);
        assert_eq!(legendre(ModInt::new(0, 7)).unwrap(), 0);
        assert_eq!(legendre(ModInt::new(2, 7)).unwrap(), 1);
        assert_eq!(legendre(ModInt::new(2, 5)).unwrap(), -1);
    }

    #[test]
    fn legendre_rejects_composite() {
        assert!(matches!(
            legendre(ModInt::new(2, 15)),
            Err(Error::CompositeModulus(15))
        ));
        assert!(matches!(legendre(ModInt::new(1, 2)), Err(Error::EvenPrime)));
    }

    #[test]
    fn legendre_multiplicative() {
        for p in [3u64, 5, 7, 11, 13, 101] {
            for a in 0..p {
                for b in 0..p {
                    let la = legendre(ModInt::new(a, p)).unwrap();
                    let lb = legendre(ModInt::new(b, p)).unwrap();
                    let lab = legendre(ModInt::new(a, p).mul(ModInt::new(b, p))).unwrap();
                    assert_eq!(lab, la * lb, "p={p} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn legendre_matches_exhaustive_squaring() {
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23] {
            let mut squares = vec![false; p as usize];
            for x in 0..p {
                squares[(x * x % p) as usize] = true;
            }
            for a in 1..p {
                let expected = if squares[a as usize] { 1 } else { -1 };
                assert_eq!(legendre(ModInt::new(a, p)).unwrap(), expected);
            }
        }
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(sqrt_mod(ModInt::new(0, 7)).unwrap().unwrap().value(), 0);
        assert_eq!(sqrt_mod(ModInt::new(2, 7)).unwrap().unwrap().value(), 3);
        assert!(sqrt_mod(ModInt::new(2, 5)).unwrap().is_none());
    }

    #[test]
    fn sqrt_roundtrip_and_count() {
        for p in [3u64, 5, 7, 11, 13, 17, 97, 101, 257, 65537] {
            let mut with_root = 0;
            for a in 1..p.min(400) {
                if let Some(r) = sqrt_mod(ModInt::new(a, p)).unwrap() {
                    assert_eq!(r.mul(r).value(), a % p);
                    assert!(r.value() <= p / 2, "root {} not canonical mod {}", r, p);
                    with_root += 1;
                }
            }
            if p < 400 {
                assert_eq!(with_root, (p - 1) / 2);
            }
        }
    }

    #[test]
    fn primitive_root_examples() {
        assert_eq!(primitive_root(3).unwrap().value(), 2);
        assert_eq!(primitive_root(5).unwrap().value(), 2);
        assert_eq!(primitive_root(7).unwrap().value(), 3);
        assert!(primitive_root(9).is_err());
    }

    #[test]
    fn primitive_root_has_full_order() {
        // Exhaustive powering for every odd prime below 10^4.
        for p in (3..10_000u64).filter(|&n| is_prime(n)) {
            let g = primitive_root(p).unwrap();
            let mut x = ModInt::new(1, p);
            for k in 1..p - 1 {
                x = x.mul(g);
                assert_ne!(x.value(), 1, "g={} has order {} < {}", g, k, p - 1);
            }
            assert_eq!(x.mul(g).value(), 1);
        }
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let limit = 20_000usize;
        let mut sieve = vec![true; limit];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..limit {
            if sieve[i] {
                for j in (i * i..limit).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        for n in 0..limit {
            assert_eq!(is_prime(n as u64), sieve[n], "n={n}");
        }
    }

    proptest! {
        #[test]
        fn unit_root_product_law(a in 0u64..10_000, b in 0u64..10_000, n in 1u64..10_000) {
            let x = UnitRoot::new(a, n);
            let y = UnitRoot::new(b, n);
            let prod = x.mul(y);
            prop_assert_eq!(prod.numerator(), (a % n + b % n) % n);
            let direct = x.eval() * y.eval();
            prop_assert!((direct - prod.eval()).norm() < 1e-12);
            prop_assert!((x.eval().norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn modint_field_laws(a in 0u64..1_000_000, b in 0u64..1_000_000, p_idx in 0usize..6) {
            let p = [3u64, 5, 7, 101, 65537, 1_000_003][p_idx];
            let x = ModInt::new(a, p);
            let y = ModInt::new(b, p);
            prop_assert_eq!(x.add(y).value(), (a % p + b % p) % p);
            prop_assert_eq!(x.mul(y).sub(y.mul(x)).value(), 0);
            if !x.is_zero() {
                let inv = x.inv().unwrap();
                prop_assert_eq!(x.mul(inv).value(), 1);
            }
        }
    }
}
