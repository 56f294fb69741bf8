//! The quantum side: state vectors on Z/NZ with the 1/N-weighted inner
//! product, phase-space translations, quantized observables, and the
//! quantized map built from Bruhat generator formulas.

use num_complex::Complex64;

use crate::classical::{bruhat, CatMap, Mat2};
use crate::error::{Error, Result};
use crate::linalg::{operator_norm_of, CMatrix};
use crate::ringmod::{is_prime, legendre, root_table, ModInt, UnitRoot};

/// An element of L^2(Z/NZ). Norms and inner products carry the 1/N weight.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    values: Vec<Complex64>,
}

impl StateVector {
    pub fn new(values: Vec<Complex64>) -> Self {
        StateVector { values }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> Complex64) -> Self {
        StateVector {
            values: (0..n).map(f).collect(),
        }
    }

    /// The point mass at 0.
    pub fn delta(n: usize) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); n];
        values[0] = Complex64::new(1.0, 0.0);
        StateVector { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.dim() as f64).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> StateVector {
        StateVector {
            values: self.values.iter().map(|z| z * c).collect(),
        }
    }

    pub fn sub(&self, other: &StateVector) -> StateVector {
        StateVector {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// `<phi, psi> = (1/N) sum phi(Q) conj(psi(Q))`.
pub fn inner(phi: &StateVector, psi: &StateVector) -> Result<Complex64> {
    if phi.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(phi.dim(), psi.dim()));
    }
    let s: Complex64 = phi
        .values
        .iter()
        .zip(&psi.values)
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(s / phi.dim() as f64)
}

/// A dense operator on L^2(Z/NZ). Construction sites guarantee unitarity;
/// `unitarity_defect` measures it.
#[derive(Clone, Debug)]
pub struct UnitaryOp {
    matrix: CMatrix,
}

impl UnitaryOp {
    pub fn from_matrix(matrix: CMatrix) -> Self {
        UnitaryOp { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, psi: &StateVector) -> StateVector {
        StateVector::new(self.matrix.apply(psi.values()))
    }

    pub fn apply_adjoint(&self, psi: &StateVector) -> StateVector {
        StateVector::new(self.matrix.apply_adjoint(psi.values()))
    }

    /// `|| U U* - I ||` in operator norm, via matrix-free power iteration.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let op = |v: &[Complex64]| {
            let w = self.matrix.apply_adjoint(v);
            let mut u = self.matrix.apply(&w);
            for (a, b) in u.iter_mut().zip(v) {
                *a -= b;
            }
            u
        };
        // U U* - I is Hermitian, so the map is its own adjoint.
        operator_norm_of(n, op, op)
    }
}

fn phase_table_2n(n: usize) -> Vec<Complex64> {
    root_table(2 * n as u64)
}

/// Phase of the translation operator at row `q`:
/// `exp(i pi n1 n2 / N) e(n2 q / N)` as an exact 2N-th root of unity.
fn translation_phase(n: usize, n1: i64, n2: i64, q: usize, table: &[Complex64]) -> Complex64 {
    let two_n = 2 * n as i128;
    let num = (n1 as i128 * n2 as i128 + 2 * n2 as i128 * q as i128).rem_euclid(two_n);
    table[num as usize]
}

/// The basic observable `T_N(n1, n2)`:
/// `(T psi)(Q) = exp(i pi n1 n2 / N) e(n2 Q / N) psi(Q + n1)`.
pub fn translation_op(n: usize, n1: i64, n2: i64) -> UnitaryOp {
    let table = phase_table_2n(n);
    let shift = n1.rem_euclid(n as i64) as usize;
    let mut m = CMatrix::zeros(n);
    for q in 0..n {
        let col = (q + shift) % n;
        m[(q, col)] = translation_phase(n, n1, n2, q, &table);
    }
    UnitaryOp::from_matrix(m)
}

/// `T(n) M` without a full matrix product: permute rows and scale.
fn translate_left(n: usize, n1: i64, n2: i64, m: &CMatrix) -> CMatrix {
    let table = phase_table_2n(n);
    let shift = n1.rem_euclid(n as i64) as usize;
    CMatrix::from_fn(n, |q, z| {
        translation_phase(n, n1, n2, q, &table) * m[((q + shift) % n, z)]
    })
}

/// `M T(n)` without a full matrix product: permute columns and scale.
fn translate_right(n: usize, n1: i64, n2: i64, m: &CMatrix) -> CMatrix {
    let table = phase_table_2n(n);
    let shift = n1.rem_euclid(n as i64) as usize;
    CMatrix::from_fn(n, |q, z| {
        let w = (z + n - shift) % n;
        m[(q, w)] * translation_phase(n, n1, n2, w, &table)
    })
}

/// Quantization of a trigonometric polynomial with the given Fourier
/// coefficients: `sum f_hat(n) T_N(n)`. Not unitary in general.
pub fn observable_op(n: usize, coefficients: &[((i64, i64), Complex64)]) -> CMatrix {
    let mut out = CMatrix::zeros(n);
    for &((n1, n2), c) in coefficients {
        out.add_assign_scaled(translation_op(n, n1, n2).matrix(), c);
    }
    out
}

/// The quantized map attached to an SL(2, Z/pZ) matrix at an odd prime,
/// built from its Bruhat parameters. For a matrix with nonzero lower-left
/// entry the kernel is
/// `(U psi)(x) = L(t) e_p(r b1 x^2) / sqrt(p) * sum_y e_p(r (b2 y^2 + 2 x y)) psi(t y)`
/// with `r = 1/2 mod p` and `L` the quadratic character; upper-triangular
/// matrices compose the diagonal and unipotent generator actions.
pub fn weil_op(m: &Mat2) -> Result<UnitaryOp> {
    let p = m.modulus();
    if p == 2 {
        return Err(Error::EvenPrime);
    }
    if !is_prime(p) {
        return Err(Error::CompositeModulus(p));
    }
    if m.det().value() != 1 {
        return Err(Error::NotSpecialLinear(p));
    }
    let n = p as usize;
    let table = root_table(p);
    let r = ModInt::new(2, p).inv()?;
    let matrix = if !m.entry(1, 0).is_zero() {
        let params = bruhat(m)?;
        let lam = legendre(params.t)? as f64;
        let t_inv = params.t.inv()?;
        let scale = lam / (p as f64).sqrt();
        let b1r = params.b1.mul(r);
        let b2r = params.b2.mul(r);
        let two_r = ModInt::new(2, p).mul(r); // = 1
        CMatrix::from_fn(n, |x, z| {
            let xm = ModInt::new(x as u64, p);
            let ym = t_inv.mul(ModInt::new(z as u64, p));
            let exponent = b1r
                .mul(xm)
                .mul(xm)
                .add(b2r.mul(ym).mul(ym))
                .add(two_r.mul(xm).mul(ym));
            table[exponent.value() as usize] * scale
        })
    } else {
        // [[a, b], [0, 1/a]] acts as the unipotent e_p(r a b x^2) after the
        // diagonal L(a) psi(a x).
        let a = m.entry(0, 0);
        let b = m.entry(0, 1);
        let lam = legendre(a)? as f64;
        let ab_r = a.mul(b).mul(r);
        let mut out = CMatrix::zeros(n);
        for x in 0..n {
            let xm = ModInt::new(x as u64, p);
            let col = a.mul(xm).value() as usize;
            let exponent = ab_r.mul(xm).mul(xm);
            out[(x, col)] = table[exponent.value() as usize] * lam;
        }
        out
    };
    Ok(UnitaryOp::from_matrix(matrix))
}

/// Convenience: the quantized map of the cat map itself at p.
pub fn weil_op_of_map(map: &CatMap, p: u64) -> Result<UnitaryOp> {
    weil_op(&map.reduce(p))
}

/// Exact-Egorov residual `|| U^-1 T_p(n) U - T_p(n A) ||` in operator norm.
/// The observable index transforms as a row vector over the integers, so
/// the half-integer phase in T is matched exactly; the global phase of U
/// cancels in the conjugation.
pub fn egorov_residual(map: &CatMap, p: u64, n: (i64, i64)) -> Result<f64> {
    let u = weil_op_of_map(map, p)?;
    let (m1, m2) = map.act_row(n.0, n.1);
    let dim = p as usize;
    // || U* T U - T' || equals || T U - U T' || up to the unitarity defect.
    let lhs = translate_left(dim, n.0, n.1, u.matrix());
    let rhs = translate_right(dim, m1, m2, u.matrix());
    Ok(lhs.sub(&rhs).operator_norm())
}

/// Egorov residuals for every observable index in an axis-aligned grid,
/// building the quantized map once.
pub fn egorov_residuals_grid(
    map: &CatMap,
    p: u64,
    grid: i64,
) -> Result<Vec<((i64, i64), f64)>> {
    let u = weil_op_of_map(map, p)?;
    let dim = p as usize;
    let mut out = Vec::with_capacity((grid * grid) as usize);
    for n1 in 0..grid {
        for n2 in 0..grid {
            let (m1, m2) = map.act_row(n1, n2);
            let lhs = translate_left(dim, n1, n2, u.matrix());
            let rhs = translate_right(dim, m1, m2, u.matrix());
            out.push(((n1, n2), lhs.sub(&rhs).operator_norm()));
        }
    }
    Ok(out)
}

/// `|| A B - B A ||` in operator norm via matrix-free power iteration.
pub fn commutator_norm(a: &UnitaryOp, b: &UnitaryOp) -> f64 {
    let n = a.dim();
    assert_eq!(n, b.dim());
    let am = a.matrix();
    let bm = b.matrix();
    let apply = |v: &[Complex64]| {
        let mut x = am.apply(&bm.apply(v));
        let y = bm.apply(&am.apply(v));
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi -= yi;
        }
        x
    };
    let apply_adj = |v: &[Complex64]| {
        let mut x = bm.apply_adjoint(&am.apply_adjoint(v));
        let y = am.apply_adjoint(&bm.apply_adjoint(v));
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi -= yi;
        }
        x
    };
    operator_norm_of(n, apply, apply_adj)
}

/// Multiplicativity defect of the quantization: the unimodular scalar
/// `lambda` nearest to `U(AB) = lambda U(A) U(B)` and the residual after
/// removing it.
pub fn multiplicativity_scalar(m1: &Mat2, m2: &Mat2) -> Result<(Complex64, f64)> {
    let u1 = weil_op(m1)?;
    let u2 = weil_op(m2)?;
    let u12 = weil_op(&m1.mul(m2))?;
    let prod = u1.matrix().mul(u2.matrix());
    let n = prod.dim();
    // tr(U12 prod*) = lambda * n when U12 = lambda * prod.
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            tr += u12.matrix()[(i, j)] * prod[(i, j)].conj();
        }
    }
    let lambda = tr / n as f64;
    let residual = u12.matrix().sub(&prod.scale(lambda)).operator_norm();
    Ok((lambda, residual))
}

/// Assembles the translation phase as an exact root of unity; exposed for
/// tests that check the composition law at the numerator level.
pub fn translation_phase_root(n: usize, n1: i64, n2: i64, q: usize) -> UnitRoot {
    let two_n = 2 * n as i128;
    let num = (n1 as i128 * n2 as i128 + 2 * n2 as i128 * q as i128).rem_euclid(two_n);
    UnitRoot::new(num as u64, 2 * n as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{classify_prime, iota, torus_points, PrimeClass, Torus};

    fn standard_map() -> CatMap {
        CatMap::new(3, 2, 4, 3).unwrap()
    }

    fn assert_close(a: Complex64, b: Complex64, tol: f64) {
        assert!((a - b).norm() < tol, "{a} vs {b}");
    }

    #[test]
    fn inner_product_examples() {
        let delta = StateVector::delta(7);
        assert_close(
            inner(&delta, &delta).unwrap(),
            Complex64::new(1.0 / 7.0, 0.0),
            1e-15,
        );
        // A character-like vector: zero at 0, unimodular elsewhere.
        let chi = StateVector::from_fn(7, |q| {
            if q == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar(1.0, q as f64)
            }
        });
        assert_close(inner(&chi, &delta).unwrap(), Complex64::new(0.0, 0.0), 1e-15);
        assert_close(
            inner(&chi, &chi).unwrap(),
            Complex64::new(6.0 / 7.0, 0.0),
            1e-15,
        );
        assert!(inner(&delta, &StateVector::delta(5)).is_err());
    }

    #[test]
    fn translation_identity_and_diagonal() {
        let t = translation_op(7, 0, 0);
        assert!(t.matrix().sub(&CMatrix::identity(7)).max_abs() < 1e-15);
        let t = translation_op(7, 0, 3);
        for q in 0..7 {
            for z in 0..7 {
                let expected = if q == z {
                    UnitRoot::new((3 * q as u64) % 7, 7).eval()
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert_close(t.matrix()[(q, z)], expected, 1e-14);
            }
        }
    }

    #[test]
    fn translation_composition_phase() {
        // T(n) T(m) = exp(i pi (n1 m2 - n2 m1)/N) T(n+m), checked at
        // N=5, n=(1,2), m=(3,1).
        let n = 5;
        let t1 = translation_op(n, 1, 2);
        let t2 = translation_op(n, 3, 1);
        let sum = translation_op(n, 4, 3);
        let prod = t1.matrix().mul(t2.matrix());
        let phase = UnitRoot::from_signed(1 * 1 - 2 * 3, 2 * n as u64).eval();
        assert!(prod.sub(&sum.matrix().scale(phase)).max_abs() < 1e-13);
    }

    #[test]
    fn translations_are_unitary() {
        for (n1, n2) in [(0i64, 1i64), (2, 3), (-1, 4), (6, -2)] {
            assert!(translation_op(11, n1, n2).unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn observable_examples() {
        assert!(observable_op(7, &[]).max_abs() == 0.0);
        let single = observable_op(7, &[((1, 2), Complex64::new(1.0, 0.0))]);
        assert!(single.sub(translation_op(7, 1, 2).matrix()).max_abs() < 1e-15);
        // Real observable: conjugate-symmetric coefficients give a
        // self-adjoint matrix.
        let c = Complex64::new(0.4, -0.7);
        let op = observable_op(
            7,
            &[((1, 2), c), ((-1, -2), c.conj()), ((0, 0), Complex64::new(2.0, 0.0))],
        );
        assert!(op.sub(&op.adjoint()).max_abs() < 1e-13);
    }

    #[test]
    fn weil_identity_is_identity() {
        let u = weil_op(&Mat2::identity(7)).unwrap();
        assert!(u.matrix().sub(&CMatrix::identity(7)).max_abs() == 0.0);
    }

    #[test]
    fn weil_diagonal_action() {
        // diag(t, 1/t) sends psi to L(t) psi(t x).
        let p = 7u64;
        for t in 1..p {
            let tm = ModInt::new(t, p);
            let m = Mat2::new(
                p,
                [
                    tm,
                    ModInt::new(0, p),
                    ModInt::new(0, p),
                    tm.inv().unwrap(),
                ],
            );
            let u = weil_op(&m).unwrap();
            let lam = legendre(tm).unwrap() as f64;
            for x in 0..p as usize {
                for z in 0..p as usize {
                    let expected = if z == (t as usize * x) % p as usize {
                        Complex64::new(lam, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    assert_close(u.matrix()[(x, z)], expected, 1e-14);
                }
            }
        }
    }

    #[test]
    fn weil_weyl_is_fourier_kernel() {
        let p = 7u64;
        let w = Mat2::from_values(p, [0, 1, -1, 0]);
        let u = weil_op(&w).unwrap();
        let scale = 1.0 / (p as f64).sqrt();
        for x in 0..7usize {
            for y in 0..7usize {
                let expected = UnitRoot::new((x * y) as u64 % p, p).eval() * scale;
                assert_close(u.matrix()[(x, y)], expected, 1e-14);
            }
        }
    }

    #[test]
    fn weil_rejects_bad_input() {
        assert!(weil_op(&Mat2::from_values(9, [1, 0, 0, 1])).is_err());
        assert!(weil_op(&Mat2::from_values(7, [2, 0, 0, 2])).is_err());
    }

    #[test]
    fn weil_unitary_across_classes() {
        let map = standard_map();
        for p in (3..62u64).filter(|&p| is_prime(p)) {
            let u = weil_op_of_map(&map, p).unwrap();
            assert!(
                u.unitarity_defect() < 1e-10,
                "p={p} defect {}",
                u.unitarity_defect()
            );
        }
    }

    #[test]
    fn egorov_zero_mode() {
        assert!(egorov_residual(&standard_map(), 7, (0, 0)).unwrap() < 1e-15);
    }

    #[test]
    fn egorov_full_grid_p7() {
        let map = standard_map();
        for n1 in 0..7 {
            for n2 in 0..7 {
                let r = egorov_residual(&map, 7, (n1, n2)).unwrap();
                assert!(r < 1e-9, "n=({n1},{n2}) residual {r}");
            }
        }
    }

    #[test]
    fn hecke_operators_commute_p7() {
        let map = standard_map();
        let p = 7u64;
        let ops: Vec<UnitaryOp> = torus_points(&map, p)
            .iter()
            .map(|e| weil_op(&iota(&map, e)).unwrap())
            .collect();
        for (i, a) in ops.iter().enumerate() {
            for b in ops.iter().skip(i + 1) {
                assert!(commutator_norm(a, b) < 1e-9);
            }
        }
    }

    #[test]
    fn multiplicative_up_to_scalar() {
        let map = standard_map();
        let p = 11u64;
        assert_eq!(classify_prime(&map, p).unwrap(), PrimeClass::Inert);
        let torus = Torus::new(&map, p);
        let pts = torus.points();
        let mut checked = 0;
        for a in pts.iter().take(6) {
            for b in pts.iter().take(6) {
                let m1 = iota(&map, a);
                let m2 = iota(&map, b);
                if m1.entry(1, 0).is_zero()
                    || m2.entry(1, 0).is_zero()
                    || m1.mul(&m2).entry(1, 0).is_zero()
                {
                    continue;
                }
                let (lambda, residual) = multiplicativity_scalar(&m1, &m2).unwrap();
                assert!((lambda.norm() - 1.0).abs() < 1e-9, "lambda {lambda}");
                assert!(residual < 1e-9, "residual {residual}");
                checked += 1;
            }
        }
        assert!(checked > 10);
    }
}
