//! Empirical distribution tests: Kolmogorov-Smirnov distance to the
//! semicircle law, anchored-box joint discrepancy, and sup-norm scans
//! across split primes.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

use crate::classical::{classify_prime, CatMap, PrimeClass};
use crate::eigenfunctions::SplitContext;
use crate::error::{Error, Result};
use crate::kernels::SumKernel;
use crate::quantum::StateVector;

/// CDF of the semicircle measure with density `(4/pi) sqrt(1-u^2)` on
/// [0, 1]: `C(u) = (2/pi)(u sqrt(1-u^2) + asin u)`.
pub fn semicircle_cdf(u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::SampleOutOfRange(u));
    }
    Ok((2.0 / std::f64::consts::PI) * (u * (1.0 - u * u).sqrt() + u.asin()))
}

/// Inverse CDF by bisection; exact to ~1e-14.
pub fn semicircle_quantile(q: f64) -> f64 {
    let q = q.clamp(0.0, 1.0);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if semicircle_cdf(mid).expect("in range") < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sorted samples in [0, 1]. Values in (1, 1 + 1e-8] are clamped to 1
/// (floating-point spill); anything beyond is rejected.
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySamples);
        }
        for s in samples.iter_mut() {
            if !(0.0..=1.0 + 1e-8).contains(s) {
                return Err(Error::SampleOutOfRange(*s));
            }
            if *s > 1.0 {
                *s = 1.0;
            }
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(EmpiricalDistribution { samples })
    }

    /// Amplitude samples `|psi(t)|/2` rescaled by `sqrt(1 - 1/N)`, which
    /// maps the exact sup-norm range `[0, 2 sqrt(N/(N-1))]` onto [0, 2]
    /// and hence the halves onto [0, 1]. The rescaling perturbs the
    /// Kolmogorov-Smirnov distance by at most `2(1 - sqrt(1-1/N)) + 2/N`.
    pub fn from_amplitude_halves(psi: &StateVector) -> Result<Self> {
        let n = psi.dim() as f64;
        let theta = (1.0 - 1.0 / n).sqrt();
        EmpiricalDistribution::new(psi.values().iter().map(|z| z.norm() * theta / 2.0).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

/// Two-sided Kolmogorov-Smirnov distance to the semicircle CDF.
pub fn ks_distance(dist: &EmpiricalDistribution) -> f64 {
    let n = dist.samples.len() as f64;
    let mut sup = 0.0f64;
    for (i, &u) in dist.samples.iter().enumerate() {
        let c = semicircle_cdf(u).expect("samples validated");
        sup = sup.max(c - i as f64 / n).max((i + 1) as f64 / n - c);
    }
    sup
}

/// KS summary for one character's amplitude profile.
#[derive(Clone, Debug)]
pub struct KsReport {
    pub p: u64,
    pub character_index: u64,
    pub sample_count: usize,
    pub ks: f64,
    pub max_abs: f64,
    pub runtime_secs: f64,
}

/// Builds the eigenfunction for one character and measures its amplitude
/// distribution against the semicircle law.
pub fn value_distribution_report(
    ctx: &SplitContext,
    k: u64,
    kernel: &dyn SumKernel,
) -> Result<KsReport> {
    let start = Instant::now();
    let chi = ctx.character(k);
    let psi = ctx.psi_chi(&chi, kernel)?;
    let dist = EmpiricalDistribution::from_amplitude_halves(&psi)?;
    let ks = ks_distance(&dist);
    Ok(KsReport {
        p: ctx.p(),
        character_index: k,
        sample_count: dist.len(),
        ks,
        max_abs: psi.sup_norm(),
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

/// Deterministic sample of distinct nontrivial character indices in
/// [1, p-2], seeded so runs are reproducible.
pub fn sample_character_indices(p: u64, count: usize, seed: u64) -> Vec<u64> {
    let available = (p - 2) as usize;
    let count = count.min(available);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = std::collections::BTreeSet::new();
    while picked.len() < count {
        picked.insert(rng.gen_range(1..=p - 2));
    }
    picked.into_iter().collect()
}

/// Anchored-box star discrepancy on an m-grid: the maximum over boxes
/// `[0, j1/m] x ... x [0, jr/m]` of |empirical mass - product of
/// semicircle CDFs|.
pub fn joint_discrepancy(samples: &[Vec<f64>], m: usize) -> Result<f64> {
    let r = samples.first().map_or(0, Vec::len);
    if r < 2 || m < 2 {
        return Err(Error::Invalid(format!(
            "need dimension >= 2 and grid >= 2, got r={r} m={m}"
        )));
    }
    let boxes = m.pow(r as u32);
    if samples.len() < boxes {
        return Err(Error::TooFewSamples {
            needed: boxes,
            got: samples.len(),
        });
    }
    for s in samples {
        if s.len() != r {
            return Err(Error::Invalid("ragged sample tuples".into()));
        }
        for &u in s {
            if !(0.0..=1.0 + 1e-8).contains(&u) {
                return Err(Error::SampleOutOfRange(u));
            }
        }
    }
    let n = samples.len() as f64;
    let cdf_grid: Vec<f64> = (1..=m)
        .map(|j| semicircle_cdf(j as f64 / m as f64).expect("grid in range"))
        .collect();
    let mut worst = 0.0f64;
    let mut idx = vec![1usize; r];
    loop {
        let bounds: Vec<f64> = idx.iter().map(|&j| j as f64 / m as f64).collect();
        let count = samples
            .iter()
            .filter(|s| s.iter().zip(&bounds) .all(|(u, a)| *u <= a + 1e-12))
            .count();
        let product: f64 = idx.iter().map(|&j| cdf_grid[j - 1]).product();
        worst = worst.max((count as f64 / n - product).abs());
        // Advance the multi-index.
        let mut dim = 0;
        loop {
            if dim == r {
                return Ok(worst);
            }
            idx[dim] += 1;
            if idx[dim] <= m {
                break;
            }
            idx[dim] = 1;
            dim += 1;
        }
    }
}

/// One prime's row in the sup-norm scan.
#[derive(Clone, Debug)]
pub struct SupnormRow {
    pub p: u64,
    pub max_sup: f64,
    pub bound: f64,
    pub ratio: f64,
    /// Whether the stronger printed bound `2 sqrt(1 - 1/p)` also holds.
    pub stronger_bound_holds: bool,
}

#[derive(Debug)]
pub struct SupnormScan {
    pub rows: Vec<SupnormRow>,
    pub skipped: Vec<(u64, &'static str)>,
    /// Least-squares slope of log(max_sup) against log(p).
    pub slope: f64,
}

/// Max sup-norm over the whole Hecke basis per split prime, with the
/// provable bound, plus a log-log slope across the scan. Non-split or
/// triangular primes are skipped with a warning record.
pub fn supnorm_scan(map: &CatMap, primes: &[u64], kernel: &dyn SumKernel) -> Result<SupnormScan> {
    let mut skipped = Vec::new();
    let mut eligible = Vec::new();
    for &p in primes {
        match classify_prime(map, p)? {
            PrimeClass::Split => eligible.push(p),
            other => skipped.push((p, other.label())),
        }
    }
    let rows: Vec<SupnormRow> = eligible
        .par_iter()
        .map(|&p| {
            let ctx = SplitContext::new(map, p)?;
            let basis = ctx.basis(kernel);
            let max_sup = basis
                .vectors()
                .iter()
                .map(StateVector::sup_norm)
                .fold(0.0, f64::max);
            let pf = p as f64;
            let bound = 2.0 * (pf / (pf - 1.0)).sqrt();
            let stronger = 2.0 * (1.0 - 1.0 / pf).sqrt();
            Ok(SupnormRow {
                p,
                max_sup,
                bound,
                ratio: max_sup / bound,
                stronger_bound_holds: max_sup <= stronger + 1e-9,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SupnormScan {
        slope: log_log_slope(&rows),
        rows,
        skipped,
    })
}

fn log_log_slope(rows: &[SupnormRow]) -> f64 {
    if rows.len() < 2 {
        return 0.0;
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.p as f64).ln(), r.max_sup.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
