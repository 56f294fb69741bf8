//! The classical side: the hyperbolic map, its prime classification, the
//! norm-one torus in Z[alpha], the torus generator at split primes, and the
//! diagonalizing matrix with its Bruhat parameters.

use crate::error::{Error, Result};
use crate::ringmod::{legendre, primitive_root, sqrt_mod, ModInt};

/// A hyperbolic element of SL(2, Z), congruent to the identity mod 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CatMap {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl CatMap {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = a
            .checked_mul(d)
            .zip(b.checked_mul(c))
            .and_then(|(ad, bc)| ad.checked_sub(bc))
            .ok_or_else(|| Error::InvalidMap("entry overflow".into()))?;
        if det != 1 {
            return Err(Error::InvalidMap(format!("determinant {det} != 1")));
        }
        let t = a + d;
        if t.abs() <= 2 {
            return Err(Error::InvalidMap(format!("trace {t} not hyperbolic")));
        }
        if a.rem_euclid(2) != 1 || d.rem_euclid(2) != 1 || b.rem_euclid(2) != 0 || c.rem_euclid(2) != 0
        {
            return Err(Error::InvalidMap("not congruent to identity mod 2".into()));
        }
        Ok(CatMap { a, b, c, d })
    }

    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    pub fn discriminant(&self) -> i64 {
        self.trace() * self.trace() - 4
    }

    pub fn entries(&self) -> [i64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn reduce(&self, n: u64) -> Mat2 {
        Mat2::new(
            n,
            [
                ModInt::from_signed(self.a, n),
                ModInt::from_signed(self.b, n),
                ModInt::from_signed(self.c, n),
                ModInt::from_signed(self.d, n),
            ],
        )
    }

    /// Row-vector action `n -> n A` over the integers, used for exact
    /// observable transport.
    pub fn act_row(&self, n1: i64, n2: i64) -> (i64, i64) {
        (n1 * self.a + n2 * self.c, n1 * self.b + n2 * self.d)
    }
}

/// Behaviour of an odd prime relative to the map's eigenvalue field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimeClass {
    Split,
    Inert,
    Ramified,
    /// Split, but the map is triangular mod p (an off-diagonal entry
    /// vanishes), so the explicit eigenfunction construction degenerates.
    BadTriangular,
}

impl PrimeClass {
    pub fn label(&self) -> &'static str {
        match self {
            PrimeClass::Split => "split",
            PrimeClass::Inert => "inert",
            PrimeClass::Ramified => "ramified",
            PrimeClass::BadTriangular => "bad-triangular",
        }
    }
}

/// Classifies an odd prime by the Legendre symbol of the discriminant.
pub fn classify_prime(map: &CatMap, p: u64) -> Result<PrimeClass> {
    if p == 2 {
        return Err(Error::EvenPrime);
    }
    let disc = ModInt::from_signed(map.discriminant(), p);
    Ok(match legendre(disc)? {
        0 => PrimeClass::Ramified,
        -1 => PrimeClass::Inert,
        _ => {
            if map.b.rem_euclid(p as i64) == 0 || map.c.rem_euclid(p as i64) == 0 {
                PrimeClass::BadTriangular
            } else {
                PrimeClass::Split
            }
        }
    })
}

/// An element x + y*alpha of the norm-one torus mod n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TorusElement {
    pub x: ModInt,
    pub y: ModInt,
}

impl TorusElement {
    pub fn coords(&self) -> (u64, u64) {
        (self.x.value(), self.y.value())
    }
}

/// The norm-one torus `x^2 + t x y + y^2 = 1 mod n` attached to a map with
/// trace `t`. Multiplication comes from `alpha^2 = t alpha - 1`.
#[derive(Clone, Copy, Debug)]
pub struct Torus {
    n: u64,
    t: ModInt,
}

impl Torus {
    pub fn new(map: &CatMap, n: u64) -> Self {
        Torus {
            n,
            t: ModInt::from_signed(map.trace(), n),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn norm(&self, x: ModInt, y: ModInt) -> ModInt {
        x.mul(x).add(self.t.mul(x).mul(y)).add(y.mul(y))
    }

    pub fn contains(&self, e: &TorusElement) -> bool {
        self.norm(e.x, e.y).value() == 1 % self.n
    }

    pub fn identity(&self) -> TorusElement {
        TorusElement {
            x: ModInt::new(1 % self.n, self.n),
            y: ModInt::new(0, self.n),
        }
    }

    pub fn mul(&self, a: &TorusElement, b: &TorusElement) -> TorusElement {
        let x = a.x.mul(b.x).sub(a.y.mul(b.y));
        let y = a
            .x
            .mul(b.y)
            .add(b.x.mul(a.y))
            .add(self.t.mul(a.y).mul(b.y));
        TorusElement { x, y }
    }

    /// Inverse of x + y*alpha is (x + t y) - y*alpha (the Galois conjugate).
    pub fn inv(&self, a: &TorusElement) -> TorusElement {
        TorusElement {
            x: a.x.add(self.t.mul(a.y)),
            y: a.y.neg(),
        }
    }

    pub fn pow(&self, a: &TorusElement, mut k: u64) -> TorusElement {
        let mut base = *a;
        let mut acc = self.identity();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            k >>= 1;
        }
        acc
    }

    /// All norm-one points in lexicographic (x, y) order.
    pub fn points(&self) -> Vec<TorusElement> {
        let mut out = Vec::new();
        for x in 0..self.n {
            for y in 0..self.n {
                let e = TorusElement {
                    x: ModInt::new(x, self.n),
                    y: ModInt::new(y, self.n),
                };
                if self.contains(&e) {
                    out.push(e);
                }
            }
        }
        out
    }
}

/// Enumerates the norm-one torus mod n in lexicographic order.
pub fn torus_points(map: &CatMap, n: u64) -> Vec<TorusElement> {
    Torus::new(map, n).points()
}

/// The deterministically chosen eigenvalue `(t + sqrt(disc)) / 2 mod p`.
/// Its Galois conjugate is the inverse.
pub fn split_eigenvalue(map: &CatMap, p: u64) -> Result<(ModInt, ModInt)> {
    match classify_prime(map, p)? {
        PrimeClass::Split | PrimeClass::BadTriangular => {}
        _ => return Err(Error::NotSplit(p)),
    }
    let disc = ModInt::from_signed(map.discriminant(), p);
    let s = sqrt_mod(disc)?.expect("split prime has square discriminant");
    let t = ModInt::from_signed(map.trace(), p);
    let half = ModInt::new(2, p).inv()?;
    let alpha = t.add(s).mul(half);
    let conj = t.sub(s).mul(half);
    Ok((alpha, conj))
}

/// The generator of the (cyclic, order p-1) torus at a split prime: the
/// element whose chosen eigenvalue equals the smallest primitive root.
pub fn torus_generator(map: &CatMap, p: u64) -> Result<TorusElement> {
    match classify_prime(map, p)? {
        PrimeClass::Split | PrimeClass::BadTriangular => {}
        _ => return Err(Error::NotSplit(p)),
    }
    let (alpha, conj) = split_eigenvalue(map, p)?;
    let g = primitive_root(p)?;
    let g_inv = g.inv()?;
    // Solve x + y*alpha = g, x + y*conj = g^-1.
    let denom = alpha.sub(conj).inv()?;
    let y = g.sub(g_inv).mul(denom);
    let x = g.sub(y.mul(alpha));
    let beta = TorusElement { x, y };
    debug_assert!(Torus::new(map, p).contains(&beta));
    Ok(beta)
}

/// A 2x2 matrix over Z/nZ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mat2 {
    n: u64,
    // Row major: [m11, m12, m21, m22].
    e: [ModInt; 4],
}

impl Mat2 {
    pub fn new(n: u64, e: [ModInt; 4]) -> Self {
        for m in &e {
            assert_eq!(m.modulus(), n);
        }
        Mat2 { n, e }
    }

    pub fn from_values(n: u64, vals: [i64; 4]) -> Self {
        Mat2::new(n, vals.map(|v| ModInt::from_signed(v, n)))
    }

    pub fn identity(n: u64) -> Self {
        Mat2::from_values(n, [1, 0, 0, 1])
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> ModInt {
        self.e[2 * i + j]
    }

    pub fn entries(&self) -> [ModInt; 4] {
        self.e
    }

    pub fn det(&self) -> ModInt {
        self.e[0].mul(self.e[3]).sub(self.e[1].mul(self.e[2]))
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        assert_eq!(self.n, o.n);
        Mat2::new(
            self.n,
            [
                self.e[0].mul(o.e[0]).add(self.e[1].mul(o.e[2])),
                self.e[0].mul(o.e[1]).add(self.e[1].mul(o.e[3])),
                self.e[2].mul(o.e[0]).add(self.e[3].mul(o.e[2])),
                self.e[2].mul(o.e[1]).add(self.e[3].mul(o.e[3])),
            ],
        )
    }

    pub fn scale_mul(&self, c: ModInt) -> Mat2 {
        Mat2::new(self.n, self.e.map(|m| m.mul(c)))
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        assert_eq!(self.n, o.n);
        Mat2::new(
            self.n,
            [
                self.e[0].add(o.e[0]),
                self.e[1].add(o.e[1]),
                self.e[2].add(o.e[2]),
                self.e[3].add(o.e[3]),
            ],
        )
    }

    /// Inverse of a determinant-one matrix.
    pub fn inv_unimodular(&self) -> Mat2 {
        debug_assert_eq!(self.det().value(), 1 % self.n);
        Mat2::new(
            self.n,
            [self.e[3], self.e[1].neg(), self.e[2].neg(), self.e[0]],
        )
    }
}

/// The ring embedding `x + y*alpha -> x I + y A` reduced mod n. Its
/// determinant is the norm form, so torus elements land in SL2.
pub fn iota(map: &CatMap, e: &TorusElement) -> Mat2 {
    let n = e.x.modulus();
    let a = map.reduce(n);
    Mat2::identity(n).scale_mul(e.x).add(&a.scale_mul(e.y))
}

/// Big-cell Bruhat data for a matrix M with nonzero lower-left entry:
/// M = [[1,b1],[0,1]] [[0,1],[-1,0]] [[1,b2],[0,1]] [[t,0],[0,1/t]].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruhatParams {
    pub b1: ModInt,
    pub b2: ModInt,
    pub t: ModInt,
}

impl BruhatParams {
    /// Multiplies the four factors back together.
    pub fn recompose(&self) -> Mat2 {
        let n = self.t.modulus();
        let u1 = Mat2::new(
            n,
            [
                ModInt::new(1, n),
                self.b1,
                ModInt::new(0, n),
                ModInt::new(1, n),
            ],
        );
        let w = Mat2::from_values(n, [0, 1, -1, 0]);
        let u2 = Mat2::new(
            n,
            [
                ModInt::new(1, n),
                self.b2,
                ModInt::new(0, n),
                ModInt::new(1, n),
            ],
        );
        let d = Mat2::new(
            n,
            [
                self.t,
                ModInt::new(0, n),
                ModInt::new(0, n),
                self.t.inv().expect("t invertible"),
            ],
        );
        u1.mul(&w).mul(&u2).mul(&d)
    }
}

/// Bruhat decomposition of a det-1 matrix with nonzero lower-left entry:
/// t = -m21, b1 = m11/m21, b2 = m22*m21.
pub fn bruhat(m: &Mat2) -> Result<BruhatParams> {
    let n = m.modulus();
    if m.det().value() != 1 % n {
        return Err(Error::NotSpecialLinear(n));
    }
    let m21 = m.entry(1, 0);
    if m21.is_zero() {
        return Err(Error::TriangularMatrix);
    }
    let params = BruhatParams {
        b1: m.entry(0, 0).mul(m21.inv()?),
        b2: m.entry(1, 1).mul(m21),
        t: m21.neg(),
    };
    debug_assert_eq!(params.recompose(), *m);
    Ok(params)
}

/// The diagonalizing matrix M mod p: columns are the eigenvectors for the
/// chosen eigenvalue and its conjugate, each scaled to second coordinate 1,
/// then the first column rescaled to force det M = 1. M^-1 A M is then
/// diag(alpha, conj).
pub fn diagonalizer(map: &CatMap, p: u64) -> Result<Mat2> {
    match classify_prime(map, p)? {
        PrimeClass::Split => {}
        PrimeClass::BadTriangular => return Err(Error::Triangular(p)),
        _ => return Err(Error::NotSplit(p)),
    }
    let (alpha, conj) = split_eigenvalue(map, p)?;
    // (A - lambda I) (u, 1)^T = 0 with b != 0 mod p gives u = b / (lambda - a).
    let a = ModInt::from_signed(map.a, p);
    let b = ModInt::from_signed(map.b, p);
    let u1 = b.mul(alpha.sub(a).inv()?);
    let u2 = b.mul(conj.sub(a).inv()?);
    let f = u1.sub(u2).inv()?;
    let m = Mat2::new(p, [u1.mul(f), u2, f, ModInt::new(1, p)]);
    debug_assert_eq!(m.det().value(), 1);
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard_map() -> CatMap {
        CatMap::new(3, 2, 4, 3).unwrap()
    }

    #[test]
    fn map_validation() {
        assert!(CatMap::new(1, 1, 1, 1).is_err()); // det 0
        assert!(CatMap::new(2, 1, 1, 1).is_err()); // not I mod 2
        assert!(CatMap::new(1, 0, 0, 1).is_err()); // trace 2 not hyperbolic
        assert!(CatMap::new(3, 2, 4, 3).is_ok());
        assert!(CatMap::new(7, 2, 10, 3).is_ok());
    }

    #[test]
    fn classification_examples() {
        let a = standard_map();
        assert_eq!(classify_prime(&a, 7).unwrap(), PrimeClass::Split);
        assert_eq!(classify_prime(&a, 5).unwrap(), PrimeClass::Inert);
        let ramified = CatMap::new(7, 2, 10, 3).unwrap();
        assert_eq!(classify_prime(&ramified, 3).unwrap(), PrimeClass::Ramified);
        // Split with p dividing an off-diagonal entry.
        let triangular = CatMap::new(3, 10, 2, 7).unwrap();
        assert_eq!(
            classify_prime(&triangular, 5).unwrap(),
            PrimeClass::BadTriangular
        );
        assert!(matches!(classify_prime(&a, 2), Err(Error::EvenPrime)));
    }

    #[test]
    fn torus_counts() {
        let a = standard_map();
        let pts7 = torus_points(&a, 7);
        assert_eq!(pts7.len(), 6);
        assert!(pts7.iter().any(|e| e.coords() == (1, 0)));
        let pts5 = torus_points(&a, 5);
        assert_eq!(pts5.len(), 6);
        for n in 2..30 {
            assert!(torus_points(&a, n)
                .iter()
                .any(|e| e.coords() == (1 % n, 0)));
        }
    }

    #[test]
    fn torus_cardinality_matches_legendre() {
        let a = standard_map();
        for p in (3..200u64).filter(|&p| crate::ringmod::is_prime(p)) {
            if a.discriminant() % p as i64 == 0 {
                continue;
            }
            let sym = legendre(ModInt::from_signed(a.discriminant(), p)).unwrap();
            let expected = (p as i64 - sym as i64) as usize;
            assert_eq!(torus_points(&a, p).len(), expected, "p={p}");
        }
    }

    #[test]
    fn torus_group_laws() {
        let a = standard_map();
        for n in [7u64, 9, 12, 25] {
            let torus = Torus::new(&a, n);
            let pts = torus.points();
            for e in &pts {
                let inv = torus.inv(e);
                assert!(torus.contains(&inv));
                assert_eq!(torus.mul(e, &inv), torus.identity());
                for f in &pts {
                    assert!(torus.contains(&torus.mul(e, f)));
                }
            }
        }
    }

    #[test]
    fn generator_example() {
        let a = standard_map();
        let beta = torus_generator(&a, 7).unwrap();
        assert_eq!(beta.coords(), (0, 6));
        // Powers of beta enumerate the whole torus.
        let torus = Torus::new(&a, 7);
        let mut seen = std::collections::HashSet::new();
        let mut cur = torus.identity();
        for _ in 0..6 {
            cur = torus.mul(&cur, &beta);
            seen.insert(cur.coords());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(cur, torus.identity());
        assert_eq!(torus.mul(&torus.identity(), &beta), beta);
    }

    #[test]
    fn generator_spans_torus_at_many_primes() {
        let a = standard_map();
        for p in (3..120u64).filter(|&p| crate::ringmod::is_prime(p)) {
            if !matches!(classify_prime(&a, p).unwrap(), PrimeClass::Split) {
                continue;
            }
            let beta = torus_generator(&a, p).unwrap();
            let torus = Torus::new(&a, p);
            let mut cur = beta;
            let mut order = 1;
            while cur != torus.identity() {
                cur = torus.mul(&cur, &beta);
                order += 1;
                assert!(order <= p);
            }
            assert_eq!(order, p - 1, "p={p}");
        }
    }

    #[test]
    fn generator_rejects_inert() {
        let a = standard_map();
        assert!(matches!(torus_generator(&a, 5), Err(Error::NotSplit(5))));
    }

    #[test]
    fn iota_is_a_homomorphism() {
        let a = standard_map();
        for n in [7u64, 12, 25] {
            let torus = Torus::new(&a, n);
            let pts = torus.points();
            for e in pts.iter().take(8) {
                assert_eq!(iota(&a, e).det().value(), 1 % n);
                for f in pts.iter().take(8) {
                    let lhs = iota(&a, e).mul(&iota(&a, f));
                    let rhs = iota(&a, &torus.mul(e, f));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn diagonalizer_diagonalizes() {
        let a = standard_map();
        for p in (3..200u64).filter(|&p| crate::ringmod::is_prime(p)) {
            if !matches!(classify_prime(&a, p).unwrap(), PrimeClass::Split) {
                continue;
            }
            let m = diagonalizer(&a, p).unwrap();
            assert_eq!(m.det().value(), 1);
            let (alpha, conj) = split_eigenvalue(&a, p).unwrap();
            let dm = m.inv_unimodular().mul(&a.reduce(p)).mul(&m);
            assert_eq!(dm.entry(0, 0), alpha);
            assert_eq!(dm.entry(1, 1), conj);
            assert!(dm.entry(0, 1).is_zero());
            assert!(dm.entry(1, 0).is_zero());
        }
    }

    #[test]
    fn diagonalizer_example_p7() {
        // alpha = (6 + sqrt(32 mod 7)) / 2 = (6 + 2) / 2 = 4 mod 7,
        // eigenvectors (2,1) for 4 and (5,1) for 2; det fix scales the
        // first column by 2.
        let a = standard_map();
        let (alpha, conj) = split_eigenvalue(&a, 7).unwrap();
        assert_eq!((alpha.value(), conj.value()), (4, 2));
        let m = diagonalizer(&a, 7).unwrap();
        let vals: Vec<u64> = m.entries().iter().map(|e| e.value()).collect();
        assert_eq!(vals, vec![4, 5, 2, 1]);
    }

    #[test]
    fn bruhat_examples() {
        let weyl = Mat2::from_values(7, [0, 1, -1, 0]);
        let p = bruhat(&weyl).unwrap();
        assert_eq!(
            (p.b1.value(), p.b2.value(), p.t.value()),
            (0, 0, 1),
            "weyl element"
        );
        let m = Mat2::from_values(7, [4, 2, 5, 1]);
        let p = bruhat(&m).unwrap();
        assert_eq!((p.b1.value(), p.b2.value(), p.t.value()), (5, 5, 2));
        assert_eq!(p.recompose(), m);
    }

    #[test]
    fn bruhat_rejects_triangular() {
        let m = Mat2::from_values(7, [1, 3, 0, 1]);
        assert!(matches!(bruhat(&m), Err(Error::TriangularMatrix)));
    }

    #[test]
    fn bruhat_recomposition_random() {
        // All det-1 matrices with m21 != 0 over a couple of small primes.
        for p in [5u64, 7, 11] {
            for m11 in 0..p {
                for m21 in 1..p {
                    for m22 in 0..p {
                        // m12 forced by det: m11 m22 - m12 m21 = 1.
                        let m11m = ModInt::new(m11, p);
                        let m21m = ModInt::new(m21, p);
                        let m22m = ModInt::new(m22, p);
                        let m12 = m11m
                            .mul(m22m)
                            .sub(ModInt::new(1, p))
                            .mul(m21m.inv().unwrap());
                        let m = Mat2::new(p, [m11m, m12, m21m, m22m]);
                        let params = bruhat(&m).unwrap();
                        assert_eq!(params.recompose(), m);
                        assert!(!params.t.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn diagonalizer_bruhat_b2_nonzero() {
        let a = standard_map();
        for p in (3..300u64).filter(|&p| crate::ringmod::is_prime(p)) {
            if !matches!(classify_prime(&a, p).unwrap(), PrimeClass::Split) {
                continue;
            }
            let params = bruhat(&diagonalizer(&a, p).unwrap()).unwrap();
            assert!(!params.b2.is_zero(), "p={p}");
        }
    }
}
