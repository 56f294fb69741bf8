//! Declared tolerance budgets. Defaults are the contract the acceptance
//! suite asserts; a plain key=value config file can override them for
//! exploration so thresholds stay auditable without code edits.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Budgets {
    /// Exact-Egorov residual ceiling.
    pub egorov_tol: f64,
    /// Hecke commutator ceiling in operator norm.
    pub commutator_tol: f64,
    /// `|| U U* - I ||` ceiling.
    pub unitarity_tol: f64,
    /// `|| Gram - I ||` ceiling for the eigenbasis.
    pub gram_tol: f64,
    /// Eigenvector residual ceiling against the quantized map.
    pub eigen_residual_tol: f64,
    /// Additive slack on exact amplitude identities.
    pub amplitude_tol: f64,
    /// Ceiling on |Im F| over a normalized profile.
    pub profile_imag_tol: f64,
    /// Additive slack on the |F| <= 2 range.
    pub profile_range_tol: f64,
    /// Pointwise slack for the amplitude/profile relation.
    pub relation_tol: f64,
    /// KS budget at p = 4001.
    pub ks_mid: f64,
    /// KS budget at p = 10007.
    pub ks_large: f64,
    /// Fraction of sampled characters that must meet the KS budget.
    pub ks_pass_fraction: f64,
    /// Number of characters sampled for distribution tests.
    pub ks_sample_size: usize,
    /// Joint discrepancy budget at p = 4001.
    pub joint_tol: f64,
    /// Anchored-box grid resolution.
    pub joint_grid: usize,
    /// Number of character pairs for the joint test.
    pub joint_pairs: usize,
    /// Oracle overlap deviation ceiling |1 - |overlap||.
    pub oracle_overlap_tol: f64,
    /// Sine ceiling for trivial-sector principal angles.
    pub oracle_angle_tol: f64,
    /// Constant standing in for N^epsilon in the fourth-moment bound.
    pub moment_budget: f64,
    /// Ceiling on sol_count(p, 1) / p^2.
    pub solcount_ratio: f64,
    /// Modulus ceiling for the convolution counter.
    pub solcount_limit: u64,
    /// Ceiling on the fitted log-log sup-norm slope.
    pub slope_max: f64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            egorov_tol: 1e-9,
            commutator_tol: 1e-9,
            unitarity_tol: 1e-10,
            gram_tol: 1e-8,
            eigen_residual_tol: 1e-8,
            amplitude_tol: 1e-9,
            profile_imag_tol: 1e-7,
            profile_range_tol: 1e-7,
            relation_tol: 1e-8,
            ks_mid: 0.05,
            ks_large: 0.03,
            ks_pass_fraction: 0.9,
            ks_sample_size: 20,
            joint_tol: 0.05,
            joint_grid: 8,
            joint_pairs: 10,
            oracle_overlap_tol: 1e-7,
            oracle_angle_tol: 1e-6,
            moment_budget: 100.0,
            solcount_ratio: 10.0,
            solcount_limit: 400,
            slope_max: 0.05,
        }
    }
}

impl Budgets {
    /// Applies `key = value` lines; '#' starts a comment, blank lines are
    /// ignored. Unknown keys are an error so typos cannot silently relax
    /// a tolerance.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("config line {}: missing '='", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            let parse_f = || -> Result<f64> {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::Invalid(format!("config key {key}: bad number {value}")))
            };
            let parse_u = || -> Result<u64> {
                value
                    .parse::<u64>()
                    .map_err(|_| Error::Invalid(format!("config key {key}: bad integer {value}")))
            };
            match key {
                "egorov_tol" => self.egorov_tol = parse_f()?,
                "commutator_tol" => self.commutator_tol = parse_f()?,
                "unitarity_tol" => self.unitarity_tol = parse_f()?,
                "gram_tol" => self.gram_tol = parse_f()?,
                "eigen_residual_tol" => self.eigen_residual_tol = parse_f()?,
                "amplitude_tol" => self.amplitude_tol = parse_f()?,
                "profile_imag_tol" => self.profile_imag_tol = parse_f()?,
                "profile_range_tol" => self.profile_range_tol = parse_f()?,
                "relation_tol" => self.relation_tol = parse_f()?,
                "ks_mid" => self.ks_mid = parse_f()?,
                "ks_large" => self.ks_large = parse_f()?,
                "ks_pass_fraction" => self.ks_pass_fraction = parse_f()?,
                "ks_sample_size" => self.ks_sample_size = parse_u()? as usize,
                "joint_tol" => self.joint_tol = parse_f()?,
                "joint_grid" => self.joint_grid = parse_u()? as usize,
                "joint_pairs" => self.joint_pairs = parse_u()? as usize,
                "oracle_overlap_tol" => self.oracle_overlap_tol = parse_f()?,
                "oracle_angle_tol" => self.oracle_angle_tol = parse_f()?,
                "moment_budget" => self.moment_budget = parse_f()?,
                "solcount_ratio" => self.solcount_ratio = parse_f()?,
                "solcount_limit" => self.solcount_limit = parse_u()?,
                "slope_max" => self.slope_max = parse_f()?,
                other => {
                    return Err(Error::Invalid(format!("unknown config key '{other}'")));
                }
            }
        }
        Ok(())
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut b = Budgets::default();
        b.apply_kv(text)?;
        Ok(b)
    }

    /// Serializes in the same key=value format `apply_kv` accepts.
    pub fn to_kv(&self) -> String {
        format!(
            "egorov_tol = {}\ncommutator_tol = {}\nunitarity_tol = {}\ngram_tol = {}\n\
             eigen_residual_tol = {}\namplitude_tol = {}\nprofile_imag_tol = {}\n\
             profile_range_tol = {}\nrelation_tol = {}\nks_mid = {}\nks_large = {}\n\
             ks_pass_fraction = {}\nks_sample_size = {}\njoint_tol = {}\njoint_grid = {}\n\
             joint_pairs = {}\noracle_overlap_tol = {}\noracle_angle_tol = {}\n\
             moment_budget = {}\nsolcount_ratio = {}\nsolcount_limit = {}\nslope_max = {}\n",
            self.egorov_tol,
            self.commutator_tol,
            self.unitarity_tol,
            self.gram_tol,
            self.eigen_residual_tol,
            self.amplitude_tol,
            self.profile_imag_tol,
            self.profile_range_tol,
            self.relation_tol,
            self.ks_mid,
            self.ks_large,
            self.ks_pass_fraction,
            self.ks_sample_size,
            self.joint_tol,
            self.joint_grid,
            self.joint_pairs,
            self.oracle_overlap_tol,
            self.oracle_angle_tol,
            self.moment_budget,
            self.solcount_ratio,
            self.solcount_limit,
            self.slope_max,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_roundtrip() {
        let b = Budgets::default();
        let parsed = Budgets::from_kv(&b.to_kv()).unwrap();
        assert_eq!(b, parsed);
    }

    #[test]
    fn kv_overrides_and_rejects_unknown() {
        let mut b = Budgets::default();
        b.apply_kv("ks_mid = 0.04 # tighter\n\n# comment only\njoint_grid = 10\n")
            .unwrap();
        assert_eq!(b.ks_mid, 0.04);
        assert_eq!(b.joint_grid, 10);
        assert!(b.apply_kv("no_such_key = 1").is_err());
        assert!(b.apply_kv("ks_mid 0.04").is_err());
    }
}
