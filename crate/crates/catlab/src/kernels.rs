//! Interchangeable evaluation kernels behind runtime-selectable names.
//!
//! Every batch computation with more than one reasonable algorithm lives
//! behind a trait here: twisted quadratic character sums (direct summation
//! vs one FFT per character) and the torus quadruple count (difference
//! histogram convolution vs brute force). Kernels are registered by name
//! and picked via config/CLI; equality across kernels is part of the test
//! suite, so swapping them never changes results.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ringmod::{root_table, ModInt};

/// Batch evaluator for the twisted quadratic sums
/// `S(x) = sum_y e_p(a y^2 + b x y) chi(y)`, returned for all x mod p.
///
/// `chi` is an arbitrary weight vector indexed by y (character values in
/// practice, but also the constant-one and delta weights).
pub trait SumKernel: Send + Sync {
    fn name(&self) -> &'static str;

    /// `values[x] = sum_y chi[y] e_p(a y^2 + b x y)`.
    fn twisted_rows(&self, p: u64, a: u64, b: u64, chi: &[Complex64]) -> Vec<Complex64>;
}

/// Direct O(p^2) summation; the defining formula and the reference for
/// every other kernel.
pub struct DirectKernel;

impl SumKernel for DirectKernel {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn twisted_rows(&self, p: u64, a: u64, b: u64, chi: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(chi.len(), p as usize);
        let table = root_table(p);
        let am = ModInt::new(a, p);
        let bm = ModInt::new(b, p);
        // Precompute the quadratic part once.
        let quad: Vec<usize> = (0..p)
            .map(|y| {
                let ym = ModInt::new(y, p);
                am.mul(ym).mul(ym).value() as usize
            })
            .collect();
        (0..p)
            .map(|x| {
                let bx = bm.mul(ModInt::new(x, p));
                let mut acc = Complex64::new(0.0, 0.0);
                let mut lin = 0u64;
                for y in 0..p as usize {
                    let w = chi[y];
                    if w.re != 0.0 || w.im != 0.0 {
                        let e = (quad[y] as u64 + lin) % p;
                        acc += w * table[e as usize];
                    }
                    lin += bx.value();
                    if lin >= p {
                        lin -= p;
                    }
                }
                acc
            })
            .collect()
    }
}

/// One length-p FFT per character: `S(x)` is the DFT of
/// `h(y) = chi(y) e_p(a y^2)` read at frequency `-b x mod p`. Prime sizes
/// go through Bluestein inside rustfft.
pub struct FftKernel;

impl SumKernel for FftKernel {
    fn name(&self) -> &'static str {
        "fft"
    }

    fn twisted_rows(&self, p: u64, a: u64, b: u64, chi: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(chi.len(), p as usize);
        let table = root_table(p);
        let am = ModInt::new(a, p);
        let mut buf: Vec<Complex64> = (0..p)
            .map(|y| {
                let ym = ModInt::new(y, p);
                chi[y as usize] * table[am.mul(ym).mul(ym).value() as usize]
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(p as usize);
        fft.process(&mut buf);
        // FFT gives X[k] = sum_y h(y) e_p(-k y); we want frequency b x.
        let bm = ModInt::new(b, p);
        (0..p)
            .map(|x| {
                let k = bm.mul(ModInt::new(x, p)).neg().value() as usize;
                buf[k]
            })
            .collect()
    }
}

/// Picks the kernel by name. "auto" selects FFT above a crossover size
/// where the O(p^2) direct path starts to dominate.
pub fn sum_kernel(name: &str) -> Result<Arc<dyn SumKernel>> {
    match name {
        "direct" => Ok(Arc::new(DirectKernel)),
        "fft" => Ok(Arc::new(FftKernel)),
        "auto" => Ok(Arc::new(AutoKernel)),
        other => Err(Error::UnknownKernel(other.to_string())),
    }
}

/// Size-based dispatch between the two real kernels.
pub struct AutoKernel;

const AUTO_CROSSOVER: u64 = 257;

impl SumKernel for AutoKernel {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn twisted_rows(&self, p: u64, a: u64, b: u64, chi: &[Complex64]) -> Vec<Complex64> {
        if p < AUTO_CROSSOVER {
            DirectKernel.twisted_rows(p, a, b, chi)
        } else {
            FftKernel.twisted_rows(p, a, b, chi)
        }
    }
}

pub fn sum_kernel_names() -> &'static [&'static str] {
    &["direct", "fft", "auto"]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ringmod::is_prime;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_weights(p: u64, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..p)
            .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect()
    }

    #[test]
    fn fft_matches_direct() {
        for p in [3u64, 7, 31, 101, 499] {
            assert!(is_prime(p));
            let chi = random_weights(p, p);
            for (a, b) in [(1u64, 1u64), (2, 3), (p - 1, 2)] {
                let d = DirectKernel.twisted_rows(p, a, b, &chi);
                let f = FftKernel.twisted_rows(p, a, b, &chi);
                let max_diff = d
                    .iter()
                    .zip(&f)
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max);
                assert!(max_diff < 1e-9, "p={p} a={a} b={b} diff={max_diff}");
            }
        }
    }

    #[test]
    fn direct_matches_naive_loop() {
        let p = 13u64;
        let chi = random_weights(p, 42);
        let got = DirectKernel.twisted_rows(p, 5, 2, &chi);
        let table = root_table(p);
        for x in 0..p {
            let mut expected = Complex64::new(0.0, 0.0);
            for y in 0..p {
                let e = (5 * y % p * y + 2 * x % p * y) % p;
                expected += chi[y as usize] * table[e as usize];
            }
            assert!((got[x as usize] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn registry_lookup() {
        assert_eq!(sum_kernel("direct").unwrap().name(), "direct");
        assert_eq!(sum_kernel("fft").unwrap().name(), "fft");
        assert_eq!(sum_kernel("auto").unwrap().name(), "auto");
        assert!(matches!(
            sum_kernel("nope"),
            Err(Error::UnknownKernel(_))
        ));
    }
}
