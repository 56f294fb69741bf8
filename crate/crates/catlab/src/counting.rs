//! Arithmetic counting quantities: torus quadruple counts, gcd sums, and
//! the fourth moment of diagonal matrix elements over the Hecke basis.

use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::Arc;

use crate::classical::{CatMap, Torus, TorusElement};
use crate::error::{Error, Result};
use crate::kernels::SumKernel;
use crate::ringmod::{root_table, ModInt};

/// An element u + v*alpha of the order Z[alpha] reduced mod N, with
/// multiplication from `alpha^2 = t alpha - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OrderElement {
    pub u: ModInt,
    pub v: ModInt,
}

impl OrderElement {
    pub fn new(u: ModInt, v: ModInt) -> Self {
        assert_eq!(u.modulus(), v.modulus());
        OrderElement { u, v }
    }

    pub fn from_values(u: i64, v: i64, n: u64) -> Self {
        OrderElement {
            u: ModInt::from_signed(u, n),
            v: ModInt::from_signed(v, n),
        }
    }

    pub fn one(n: u64) -> Self {
        OrderElement::from_values(1, 0, n)
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    pub fn coords(&self) -> (u64, u64) {
        (self.u.value(), self.v.value())
    }
}

/// The quotient ring Z[alpha]/N for a map with the given trace.
#[derive(Clone, Copy, Debug)]
pub struct OrderRing {
    n: u64,
    t: ModInt,
}

impl OrderRing {
    pub fn new(map: &CatMap, n: u64) -> Self {
        OrderRing {
            n,
            t: ModInt::from_signed(map.trace(), n),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn mul(&self, a: &OrderElement, b: &OrderElement) -> OrderElement {
        let u = a.u.mul(b.u).sub(a.v.mul(b.v));
        let v = a
            .u
            .mul(b.v)
            .add(b.u.mul(a.v))
            .add(self.t.mul(a.v).mul(b.v));
        OrderElement { u, v }
    }

    pub fn sub(&self, a: &OrderElement, b: &OrderElement) -> OrderElement {
        OrderElement {
            u: a.u.sub(b.u),
            v: a.v.sub(b.v),
        }
    }

    pub fn add(&self, a: &OrderElement, b: &OrderElement) -> OrderElement {
        OrderElement {
            u: a.u.add(b.u),
            v: a.v.add(b.v),
        }
    }

    pub fn neg(&self, a: &OrderElement) -> OrderElement {
        OrderElement {
            u: a.u.neg(),
            v: a.v.neg(),
        }
    }
}

/// The order element corresponding to the standard-basis vector (0, 1):
/// `omega = alpha - a`. The observable index (0, n) maps to `n * omega`.
pub fn omega(map: &CatMap, n: u64) -> OrderElement {
    OrderElement::from_values(-map.a, 1, n)
}

fn torus_as_order(e: &TorusElement) -> OrderElement {
    OrderElement { u: e.x, v: e.y }
}

/// Result of a quadruple count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolCount {
    pub count: u64,
    pub torus_size: usize,
}

/// Counting algorithm behind `sol_count`, selected by name. Both count
/// quadruples (b1, b2, b3, b4) on the norm-one torus mod N with
/// `nu (b1 - b2 + b3 - b4) = 0`.
pub trait SolCounter: Send + Sync {
    fn name(&self) -> &'static str;
    fn limit(&self) -> u64;
    fn count(&self, map: &CatMap, n: u64, nu: &OrderElement) -> Result<SolCount>;
}

/// Histogram convolution: bucket the differences b1 - b2 over the ring,
/// regroup by the value of `nu * z`, and pair complementary cosets.
pub struct ConvolutionCounter {
    pub limit: u64,
}

impl Default for ConvolutionCounter {
    fn default() -> Self {
        ConvolutionCounter { limit: 400 }
    }
}

impl SolCounter for ConvolutionCounter {
    fn name(&self) -> &'static str {
        "convolution"
    }

    fn limit(&self) -> u64 {
        self.limit
    }

    fn count(&self, map: &CatMap, n: u64, nu: &OrderElement) -> Result<SolCount> {
        if n > self.limit {
            return Err(Error::AboveLimit(n, self.limit));
        }
        let ring = OrderRing::new(map, n);
        let points = Torus::new(map, n).points();
        let size = points.len();
        // h[z] = #{(b1, b2) : b1 - b2 = z}, indexed by u * n + v.
        let mut h = vec![0u64; (n * n) as usize];
        for b1 in &points {
            for b2 in &points {
                let z = ring.sub(&torus_as_order(b1), &torus_as_order(b2));
                h[(z.u.value() * n + z.v.value()) as usize] += 1;
            }
        }
        // g[c] = total h-mass with nu * z = c.
        let mut g: HashMap<(u64, u64), u64> = HashMap::new();
        for u in 0..n {
            for v in 0..n {
                let mass = h[(u * n + v) as usize];
                if mass == 0 {
                    continue;
                }
                let c = ring.mul(nu, &OrderElement::from_values(u as i64, v as i64, n));
                *g.entry(c.coords()).or_insert(0) += mass;
            }
        }
        // Pair z1 with every z2 satisfying nu z2 = -nu z1.
        let mut count = 0u64;
        for u in 0..n {
            for v in 0..n {
                let mass = h[(u * n + v) as usize];
                if mass == 0 {
                    continue;
                }
                let c = ring.mul(nu, &OrderElement::from_values(u as i64, v as i64, n));
                let want = ring.neg(&c).coords();
                if let Some(&m) = g.get(&want) {
                    count += mass * m;
                }
            }
        }
        Ok(SolCount {
            count,
            torus_size: size,
        })
    }
}

/// O(|T|^4) enumeration; the oracle the convolution is tested against.
pub struct BruteForceCounter {
    pub limit: u64,
}

impl Default for BruteForceCounter {
    fn default() -> Self {
        BruteForceCounter { limit: 60 }
    }
}

impl SolCounter for BruteForceCounter {
    fn name(&self) -> &'static str {
        "brute-force"
    }

    fn limit(&self) -> u64 {
        self.limit
    }

    fn count(&self, map: &CatMap, n: u64, nu: &OrderElement) -> Result<SolCount> {
        if n > self.limit {
            return Err(Error::AboveLimit(n, self.limit));
        }
        // Raw u64 arithmetic in the quadruple loop; the torus at smooth
        // even moduli has a few hundred points, so the loop body count
        // reaches 10^9.
        let points: Vec<(u64, u64)> = Torus::new(map, n)
            .points()
            .iter()
            .map(|e| e.coords())
            .collect();
        let t = map.trace().rem_euclid(n as i64) as u64;
        let (nu_u, nu_v) = nu.coords();
        let is_null = move |wu: u64, wv: u64| -> bool {
            // nu * w = (nu_u wu - nu_v wv) + (nu_u wv + nu_v wu + t nu_v wv) alpha
            if (nu_u * wu + n * n - nu_v * wv) % n != 0 {
                return false;
            }
            (nu_u * wv + nu_v * wu + t * nu_v % n * wv) % n == 0
        };
        use rayon::prelude::*;
        let count: u64 = points
            .par_iter()
            .map(|&(u1, v1)| {
                let mut local = 0u64;
                for &(u2, v2) in &points {
                    let du = (u1 + n - u2) % n;
                    let dv = (v1 + n - v2) % n;
                    for &(u3, v3) in &points {
                        let su = (du + u3) % n;
                        let sv = (dv + v3) % n;
                        for &(u4, v4) in &points {
                            let wu = (su + n - u4) % n;
                            let wv = (sv + n - v4) % n;
                            if is_null(wu, wv) {
                                local += 1;
                            }
                        }
                    }
                }
                local
            })
            .sum();
        Ok(SolCount {
            count,
            torus_size: points.len(),
        })
    }
}

/// Looks up a counting strategy by registry name.
pub fn sol_counter(name: &str) -> Result<Arc<dyn SolCounter>> {
    match name {
        "convolution" => Ok(Arc::new(ConvolutionCounter::default())),
        "brute-force" => Ok(Arc::new(BruteForceCounter::default())),
        other => Err(Error::UnknownStrategy(other.to_string())),
    }
}

pub fn sol_counter_names() -> &'static [&'static str] {
    &["convolution", "brute-force"]
}

/// Exact `sum_{n=0}^{N-1} gcd(n, N)^(1/2)` by direct loop (gcd(0,N) = N).
pub fn gcd_sum(n: u64) -> f64 {
    (0..n).map(|k| (gcd(k, n) as f64).sqrt()).sum()
}

/// The same sum through the divisor identity
/// `sum_{d | N} sqrt(d) phi(N/d)`.
pub fn gcd_sum_via_divisors(n: u64) -> f64 {
    divisors(n)
        .into_iter()
        .map(|d| (d as f64).sqrt() * euler_phi(n / d) as f64)
        .sum()
}

/// The comparison value `N * sum_{d|N} d^(-1/2)` that dominates the sum.
pub fn gcd_sum_upper_bound(n: u64) -> f64 {
    n as f64
        * divisors(n)
            .into_iter()
            .map(|d| 1.0 / (d as f64).sqrt())
            .sum::<f64>()
}

pub fn divisor_count(n: u64) -> u64 {
    divisors(n).len() as u64
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if a == 0 {
        b
    } else {
        gcd(b % a, a)
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Fourth moment of the diagonal matrix elements of `T_p(0, n)` over the
/// Hecke basis, with the comparison value `gcd(n, p)^2 / p`.
#[derive(Clone, Copy, Debug)]
pub struct FourthMoment {
    pub p: u64,
    pub n: i64,
    pub sum: f64,
    pub comparison: f64,
}

/// `sum_j |<T_p(0,n) psi_j, psi_j>|^4` for each requested n, building the
/// basis once; the matrix element is the n-th Fourier coefficient of the
/// amplitude profile `|psi_j|^2`.
pub fn fourth_moments(
    map: &CatMap,
    p: u64,
    ns: &[i64],
    kernel: &dyn SumKernel,
) -> Result<Vec<FourthMoment>> {
    let ctx = crate::eigenfunctions::SplitContext::new(map, p)?;
    let basis = ctx.basis(kernel);
    let table = root_table(p);
    let profiles: Vec<Vec<f64>> = basis
        .vectors()
        .iter()
        .map(|psi| psi.values().iter().map(|z| z.norm_sqr()).collect())
        .collect();
    Ok(ns
        .iter()
        .map(|&n| {
            let n_red = (n as i128).rem_euclid(p as i128) as u64;
            let mut sum = 0.0f64;
            for profile in &profiles {
                let mut coeff = Complex64::new(0.0, 0.0);
                let mut idx = 0u64;
                for w in profile {
                    coeff += w * table[idx as usize];
                    idx += n_red;
                    if idx >= p {
                        idx -= p;
                    }
                }
                sum += (coeff.norm() / p as f64).powi(4);
            }
            let g = gcd(n.unsigned_abs() % p, p) as f64;
            FourthMoment {
                p,
                n,
                sum,
                comparison: g * g / p as f64,
            }
        })
        .collect())
}

pub fn fourth_moment(
    map: &CatMap,
    p: u64,
    n: i64,
    kernel: &dyn SumKernel,
) -> Result<FourthMoment> {
    Ok(fourth_moments(map, p, &[n], kernel)?.remove(0))
}
