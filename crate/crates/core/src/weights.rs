//! Ordered penalty-weight sequences.
//!
//! * SLOPE Benjamini–Hochberg weights `v_i = Phi^{-1}(1 - q i / (2p))`.
//! * gSLOPE group weights built from chi quantiles, in "mean" and "max" form.
//! * SGS variable/group weights calibrated for simultaneous variable and group
//!   FDR control, in "mean" and "max" form.
//! * OSCAR linear-decay weights for gOSCAR and SGO.

use serde::{Deserialize, Serialize};

use crate::dist::{chi_cdf, folded_normal_cdf, inverse_cdf_widening, normal_cdf};
use crate::error::{invalid, Error, Result};
use crate::groups::GroupStructure;
use crate::sort::is_nonincreasing;

/// Weight-sequence family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    SlopeBh,
    GslopeMean,
    GslopeMax,
    SgsMean,
    SgsMax,
    Oscar,
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "slope_bh" | "slope" => Scheme::SlopeBh,
            "gslope_mean" => Scheme::GslopeMean,
            "gslope_max" => Scheme::GslopeMax,
            "sgs_mean" => Scheme::SgsMean,
            "sgs_max" => Scheme::SgsMax,
            "oscar" => Scheme::Oscar,
            other => return Err(format!("unknown weight scheme '{other}'")),
        })
    }
}

/// CDF used for the variable quantiles of the SGS sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableCdf {
    /// Standard Gaussian; with `alpha -> 1` the sequence tends to the
    /// Benjamini–Hochberg SLOPE weights.
    #[default]
    Gaussian,
    /// Distribution of `|Z|`.
    FoldedGaussian,
}

/// Divisor in the target probability `1 - q_g i / d` of the SGS mean group
/// sequence when it is computed from the SGS formula itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupDivisor {
    #[default]
    Variables,
    Groups,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub q_v: f64,
    pub q_g: f64,
    pub alpha: f64,
    pub scheme: Scheme,
    /// OSCAR base level; the decay slopes are derived from it.
    pub oscar_sigma1: f64,
    pub variable_cdf: VariableCdf,
    pub group_divisor: GroupDivisor,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            q_v: 0.05,
            q_g: 0.05,
            alpha: 0.95,
            scheme: Scheme::SgsMean,
            oscar_sigma1: 1.0,
            variable_cdf: VariableCdf::Gaussian,
            group_divisor: GroupDivisor::Variables,
        }
    }
}

impl WeightConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.q_v > 0.0 && self.q_v < 1.0) || !(self.q_g > 0.0 && self.q_g < 1.0) {
            return invalid("FDR targets must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return invalid("alpha must lie in [0, 1]");
        }
        if !(self.oscar_sigma1 > 0.0) {
            return invalid("OSCAR sigma1 must be positive");
        }
        Ok(())
    }
}

/// Variable weights `v` (length p) and group weights `w` (length m).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

const ORDER_TOL: f64 = 1e-12;

impl PenaltyWeights {
    pub fn new(v: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        let weights = Self { v, w };
        weights.check()?;
        Ok(weights)
    }

    /// Asserts both sequences are nonincreasing and nonnegative.
    pub fn check(&self) -> Result<()> {
        for (name, seq) in [("v", &self.v), ("w", &self.w)] {
            if seq.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return invalid(format!("{name} must be finite and nonnegative"));
            }
            if !is_nonincreasing(seq, ORDER_TOL) {
                return invalid(format!("{name} must be nonincreasing"));
            }
        }
        Ok(())
    }
}

/// Builds the weights selected by `config.scheme`.
///
/// `slope_bh` fills only `v` (with `w` all ones) and the gSLOPE schemes fill
/// only `w` (with `v` all ones); the unused side is ignored by the matching
/// penalty.
pub fn generate(groups: &GroupStructure, config: &WeightConfig) -> Result<PenaltyWeights> {
    config.validate()?;
    let (p, m) = (groups.num_vars(), groups.num_groups());
    match config.scheme {
        Scheme::SlopeBh => PenaltyWeights::new(slope_bh_weights(p, config.q_v)?, vec![1.0; m]),
        Scheme::GslopeMean => PenaltyWeights::new(vec![1.0; p], gslope_mean_weights(groups, config.q_g)?),
        Scheme::GslopeMax => PenaltyWeights::new(vec![1.0; p], gslope_max_weights(groups, config.q_g)?),
        Scheme::SgsMean => sgs_mean_weights(groups, config),
        Scheme::SgsMax => sgs_max_weights(groups, config),
        Scheme::Oscar => oscar_weights(p, m, config.oscar_sigma1),
    }
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        invalid(format!("FDR target {q} outside (0, 1)"))
    }
}

/// `v_i = Phi^{-1}(1 - q i / (2p))`.
pub fn slope_bh_weights(p: usize, q: f64) -> Result<Vec<f64>> {
    check_q(q)?;
    (1..=p)
        .map(|i| {
            let target = 1.0 - q * i as f64 / (2.0 * p as f64);
            inverse_cdf_widening(normal_cdf, target, 0.0, 10.0)
        })
        .collect()
}

/// Distinct group sizes with their multiplicities.
fn size_counts(groups: &GroupStructure) -> Vec<(usize, usize)> {
    let mut sizes = groups.sizes().to_vec();
    sizes.sort_unstable();
    let mut out: Vec<(usize, usize)> = Vec::new();
    for s in sizes {
        match out.last_mut() {
            Some((last, count)) if *last == s => *count += 1,
            _ => out.push((s, 1)),
        }
    }
    out
}

/// Group weights from the size-averaged chi CDF
/// `Fbar(x) = (1/m) sum_j F_chi(p_j)(sqrt(p_j) x)`, `w_i = Fbar^{-1}(1 - q i / m)`.
pub fn gslope_mean_weights(groups: &GroupStructure, q_g: f64) -> Result<Vec<f64>> {
    check_q(q_g)?;
    let m = groups.num_groups();
    if m == 0 {
        return invalid("no groups");
    }
    let counts = size_counts(groups);
    let cdf = |x: f64| {
        counts
            .iter()
            .map(|&(s, c)| c as f64 * chi_cdf((s as f64).sqrt() * x, s as f64))
            .sum::<f64>()
            / m as f64
    };
    (1..=m)
        .map(|i| inverse_cdf_widening(cdf, 1.0 - q_g * i as f64 / m as f64, 0.0, 10.0))
        .collect()
}

/// `w_i = max_j p_j^{-1/2} F_chi(p_j)^{-1}(1 - q i / m)`.
pub fn gslope_max_weights(groups: &GroupStructure, q_g: f64) -> Result<Vec<f64>> {
    check_q(q_g)?;
    let m = groups.num_groups();
    if m == 0 {
        return invalid("no groups");
    }
    let counts = size_counts(groups);
    (1..=m)
        .map(|i| {
            let target = 1.0 - q_g * i as f64 / m as f64;
            counts.iter().try_fold(0.0f64, |best, &(s, _)| {
                let k = s as f64;
                let x = inverse_cdf_widening(|x| chi_cdf(x, k), target, 0.0, 10.0)?;
                Ok::<f64, Error>(best.max(x / k.sqrt()))
            })
        })
        .collect()
}

fn variable_cdf(kind: VariableCdf) -> fn(f64) -> f64 {
    match kind {
        VariableCdf::Gaussian => normal_cdf,
        VariableCdf::FoldedGaussian => folded_normal_cdf,
    }
}

fn check_sgs_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        invalid("SGS weights need alpha strictly inside (0, 1); use the SLOPE or gSLOPE schemes at the endpoints")
    }
}

/// `a_j = floor(alpha p_j)`.
pub fn sgs_group_counts(groups: &GroupStructure, alpha: f64) -> Vec<f64> {
    groups
        .sizes()
        .iter()
        .map(|&s| (alpha * s as f64).floor())
        .collect()
}

/// SGS mean weights: `w` from the gSLOPE mean sequence, then
/// `v_i = Fbar^{-1}(1 - q_v i / (2p))` with
/// `Fbar(x) = (1/m) sum_j F(alpha x + (1 - alpha) a_j w_j / 3)`.
pub fn sgs_mean_weights(groups: &GroupStructure, config: &WeightConfig) -> Result<PenaltyWeights> {
    config.validate()?;
    check_sgs_alpha(config.alpha)?;
    let alpha = config.alpha;
    let (p, m) = (groups.num_vars(), groups.num_groups());
    let w = gslope_mean_weights(groups, config.q_g)?;
    let a = sgs_group_counts(groups, alpha);
    let shifts: Vec<f64> = a
        .iter()
        .zip(&w)
        .map(|(aj, wj)| (1.0 - alpha) * aj * wj / 3.0)
        .collect();
    let f = variable_cdf(config.variable_cdf);
    let cdf = |x: f64| shifts.iter().map(|s| f(alpha * x + s)).sum::<f64>() / m as f64;
    let lo = -shifts.iter().cloned().fold(0.0, f64::max) / alpha - 50.0;
    let v = (1..=p)
        .map(|i| {
            let target = 1.0 - config.q_v * i as f64 / (2.0 * p as f64);
            inverse_cdf_widening(cdf, target, lo, 10.0).map(|x| x.max(0.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    PenaltyWeights::new(v, w)
}

/// The SGS mean group sequence computed from its own formula,
/// `w_i = Fbar^{-1}(1 - q_g i / d)` with
/// `Fbar(x) = (1/m) sum_j F_FN((1 - alpha) p_j x + alpha sum_{k in G_j} v_k)`,
/// using the standard folded normal for `F_FN`. Not used by [`generate`],
/// which pairs the SGS variable weights with the gSLOPE group weights.
pub fn sgs_mean_group_weights(
    groups: &GroupStructure,
    v: &[f64],
    config: &WeightConfig,
) -> Result<Vec<f64>> {
    check_sgs_alpha(config.alpha)?;
    let alpha = config.alpha;
    let (p, m) = (groups.num_vars(), groups.num_groups());
    let offsets: Vec<f64> = (0..m)
        .map(|g| alpha * groups.members(g).iter().map(|&k| v[k]).sum::<f64>())
        .collect();
    let cdf = |x: f64| {
        (0..m)
            .map(|g| folded_normal_cdf((1.0 - alpha) * groups.sizes()[g] as f64 * x + offsets[g]))
            .sum::<f64>()
            / m as f64
    };
    let divisor = match config.group_divisor {
        GroupDivisor::Variables => p as f64,
        GroupDivisor::Groups => m as f64,
    };
    let lo = -offsets.iter().cloned().fold(0.0, f64::max) / (1.0 - alpha) - 50.0;
    (1..=m)
        .map(|i| {
            let target = 1.0 - config.q_g * i as f64 / divisor;
            inverse_cdf_widening(cdf, target, lo, 10.0).map(|x| x.max(0.0))
        })
        .collect()
}

/// SGS max weights.
///
/// The two max formulas reference each other; `w` is seeded with the gSLOPE
/// max sequence, `v` is computed from it, and `w` is then recomputed from `v`.
/// Both are clipped at zero.
pub fn sgs_max_weights(groups: &GroupStructure, config: &WeightConfig) -> Result<PenaltyWeights> {
    config.validate()?;
    check_sgs_alpha(config.alpha)?;
    let alpha = config.alpha;
    let (p, m) = (groups.num_vars(), groups.num_groups());
    let w_seed = gslope_max_weights(groups, config.q_g)?;
    let a = sgs_group_counts(groups, alpha);
    let min_shift = a
        .iter()
        .zip(&w_seed)
        .map(|(aj, wj)| (1.0 - alpha) * aj * wj / (3.0 * alpha))
        .fold(f64::INFINITY, f64::min);
    let f = variable_cdf(config.variable_cdf);
    let v = (1..=p)
        .map(|i| {
            let target = 1.0 - config.q_v * i as f64 / (2.0 * p as f64);
            let q = inverse_cdf_widening(f, target, -50.0, 10.0)?;
            Ok((q / alpha - min_shift).max(0.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    let group_sums: Vec<f64> = (0..m)
        .map(|g| groups.members(g).iter().map(|&k| v[k]).sum::<f64>())
        .collect();
    let w = (1..=m)
        .map(|i| {
            let target = 1.0 - config.q_g * i as f64 / m as f64;
            let q = inverse_cdf_widening(folded_normal_cdf, target, 0.0, 10.0)?;
            let best = (0..m)
                .map(|j| (q - alpha * group_sums[j]) / ((1.0 - alpha) * groups.sizes()[j] as f64))
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(best.max(0.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    PenaltyWeights::new(v, w)
}

/// OSCAR linear decay: `v_i = s1 + (s1/p)(p - i)`, `w_g = s1 + (s1/m)(m - g)`.
pub fn oscar_weights(p: usize, m: usize, sigma1: f64) -> Result<PenaltyWeights> {
    if !(sigma1 > 0.0 && sigma1.is_finite()) {
        return invalid("OSCAR sigma1 must be positive");
    }
    PenaltyWeights::new(linear_decay(p, sigma1), linear_decay(m, sigma1))
}

/// `step * (2 len - i)` for `i = 1..=len` with `step ~ sigma1 / len`.
///
/// The step is rounded to a mantissa short enough that every multiple used is
/// exact, so the sequence is exactly affine in floating point (the base level
/// moves by at most ~2^-40 relative).
fn linear_decay(len: usize, sigma1: f64) -> Vec<f64> {
    let step = sigma1 / len as f64;
    let spare = (2.0 * len as f64).log2().ceil() as i32;
    let quantum = 2f64.powi(step.log2().floor() as i32 - (52 - spare));
    let step = (step / quantum).round() * quantum;
    (1..=len).map(|i| step * (2 * len - i) as f64).collect()
}

/// Default OSCAR level `e^{-2} ||X^T y||_inf`.
pub fn oscar_default_sigma1(xty_inf: f64) -> f64 {
    (-2.0f64).exp() * xty_inf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::normal_quantile;
    use proptest::prelude::*;

    /// Independent chi quantile: bisection on the chi-square CDF from statrs.
    fn chi_quantile_oracle(k: f64, prob: f64) -> f64 {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let d = ChiSquared::new(k).unwrap();
        let (mut lo, mut hi) = (0.0f64, 20.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if d.cdf(mid * mid) < prob {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    fn random_sizes(seed: u64, m: usize) -> Vec<usize> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..m).map(|_| rng.gen_range(3..=25)).collect()
    }

    #[test]
    fn gslope_mean_singletons_are_half_normal_quantiles() {
        let g = GroupStructure::singletons(2);
        let w = gslope_mean_weights(&g, 0.05).unwrap();
        for (i, wi) in w.iter().enumerate() {
            let expected = chi_quantile_oracle(1.0, 1.0 - 0.05 * (i + 1) as f64 / 2.0);
            assert!((wi - expected).abs() < 1e-9, "{wi} vs {expected}");
        }
        // Frozen: half-normal quantiles of 0.975 and 0.95.
        assert!((w[0] - 2.241_402_727_604_947).abs() < 1e-9);
        assert!((w[1] - 1.959_963_984_540_054).abs() < 1e-9);
    }

    #[test]
    fn gslope_mean_single_group() {
        let g = GroupStructure::from_sizes(&[5]).unwrap();
        let w = gslope_mean_weights(&g, 0.1).unwrap();
        assert_eq!(w.len(), 1);
        let expected = chi_quantile_oracle(5.0, 0.9) / 5f64.sqrt();
        assert!((w[0] - expected).abs() < 1e-9);
    }

    #[test]
    fn gslope_mean_monotone_mixed_sizes() {
        let g = GroupStructure::from_sizes(&random_sizes(1, 20)).unwrap();
        let w = gslope_mean_weights(&g, 0.05).unwrap();
        assert!(is_nonincreasing(&w, 0.0));
        assert!(w.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn gslope_max_equals_mean_for_equal_sizes() {
        let g = GroupStructure::from_sizes(&[4, 4, 4]).unwrap();
        let a = gslope_max_weights(&g, 0.05).unwrap();
        let b = gslope_mean_weights(&g, 0.05).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn gslope_max_two_sizes() {
        let g = GroupStructure::from_sizes(&[1, 4]).unwrap();
        let w = gslope_max_weights(&g, 0.1).unwrap();
        for (i, wi) in w.iter().enumerate() {
            let prob = 1.0 - 0.1 * (i + 1) as f64 / 2.0;
            let expected = chi_quantile_oracle(1.0, prob).max(chi_quantile_oracle(4.0, prob) / 2.0);
            assert!((wi - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn sgs_mean_alpha_near_one_is_bh() {
        let g = GroupStructure::singletons(10);
        let cfg = WeightConfig {
            alpha: 1.0 - 1e-9,
            ..WeightConfig::default()
        };
        let pw = sgs_mean_weights(&g, &cfg).unwrap();
        for (i, vi) in pw.v.iter().enumerate() {
            let expected = normal_quantile(1.0 - 0.05 * (i + 1) as f64 / 20.0);
            assert!((vi - expected).abs() < 1e-6, "{vi} vs {expected}");
        }
    }

    #[test]
    fn sgs_mean_reference_configuration() {
        let sizes = random_sizes(7, 100);
        let total: usize = sizes.iter().sum();
        // Trim to p = 500 as in the reference configuration.
        let mut trimmed = Vec::new();
        let mut acc = 0;
        for s in sizes {
            if acc >= 500 {
                break;
            }
            let s = s.min(500 - acc);
            trimmed.push(s);
            acc += s;
        }
        assert!(total >= 500);
        let g = GroupStructure::from_sizes(&trimmed).unwrap();
        let pw = sgs_mean_weights(&g, &WeightConfig::default()).unwrap();
        assert_eq!(pw.v.len(), 500);
        assert!(pw.v.iter().all(|&x| x > 0.0));
        assert!(is_nonincreasing(&pw.v, 0.0));
    }

    #[test]
    fn group_counts_floor() {
        let g = GroupStructure::from_sizes(&[3]).unwrap();
        assert_eq!(sgs_group_counts(&g, 0.95), vec![2.0]);
    }

    #[test]
    fn sgs_alpha_endpoints_rejected() {
        let g = GroupStructure::singletons(3);
        for alpha in [0.0, 1.0] {
            let cfg = WeightConfig { alpha, ..WeightConfig::default() };
            assert!(sgs_mean_weights(&g, &cfg).is_err());
            assert!(sgs_max_weights(&g, &cfg).is_err());
        }
    }

    #[test]
    fn sgs_max_equal_sizes_single_term() {
        let g = GroupStructure::from_sizes(&[3, 3, 3]).unwrap();
        let cfg = WeightConfig { alpha: 0.5, ..WeightConfig::default() };
        let pw = sgs_max_weights(&g, &cfg).unwrap();
        let w_seed = gslope_max_weights(&g, cfg.q_g).unwrap();
        // Equal sizes: the max over j picks the smallest seeded group weight.
        let shift = 0.5 * 1.0 * w_seed[2] / (3.0 * 0.5);
        for (i, vi) in pw.v.iter().enumerate() {
            let q = normal_quantile(1.0 - 0.05 * (i + 1) as f64 / 18.0);
            assert!((vi - (q / 0.5 - shift).max(0.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn sgs_max_group_formula() {
        let g = GroupStructure::from_sizes(&[2, 4, 3]).unwrap();
        let cfg = WeightConfig { alpha: 0.3, ..WeightConfig::default() };
        let pw = sgs_max_weights(&g, &cfg).unwrap();
        let sums = [pw.v[0] + pw.v[1], pw.v[2..6].iter().sum::<f64>(), pw.v[6..].iter().sum::<f64>()];
        for (i, wi) in pw.w.iter().enumerate() {
            let prob = 1.0 - cfg.q_g * (i + 1) as f64 / 3.0;
            let q = chi_quantile_oracle(1.0, prob);
            let best = [2.0, 4.0, 3.0]
                .iter()
                .zip(&sums)
                .map(|(pj, s)| (q - 0.3 * s) / (0.7 * pj))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((wi - best.max(0.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn oscar_examples() {
        let pw = oscar_weights(4, 2, 1.0).unwrap();
        assert_eq!(pw.v, vec![1.75, 1.5, 1.25, 1.0]);
        assert_eq!(pw.w, vec![1.5, 1.0]);
        let pw = oscar_weights(7, 3, 0.3).unwrap();
        assert!((pw.v.last().unwrap() - 0.3).abs() < 1e-12);
        assert!(pw.v.windows(3).all(|t| t[0] - 2.0 * t[1] + t[2] == 0.0));
        assert!(oscar_weights(3, 1, 0.0).is_err());
    }

    #[test]
    fn sgs_mean_group_formula_is_monotone() {
        let g = GroupStructure::from_sizes(&[3, 5, 4, 6]).unwrap();
        let cfg = WeightConfig { alpha: 0.5, ..WeightConfig::default() };
        let pw = sgs_mean_weights(&g, &cfg).unwrap();
        for divisor in [GroupDivisor::Variables, GroupDivisor::Groups] {
            let cfg = WeightConfig { group_divisor: divisor, ..cfg.clone() };
            let w = sgs_mean_group_weights(&g, &pw.v, &cfg).unwrap();
            assert!(is_nonincreasing(&w, 0.0));
            assert!(w.iter().all(|&x| x >= 0.0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn every_scheme_is_ordered(
            seed in 0u64..1000,
            m in 1usize..12,
            alpha in 0.05f64..0.95,
            q in 0.01f64..0.3,
        ) {
            let g = GroupStructure::from_sizes(&random_sizes(seed, m)).unwrap();
            for scheme in [Scheme::SlopeBh, Scheme::GslopeMean, Scheme::GslopeMax,
                           Scheme::SgsMean, Scheme::SgsMax, Scheme::Oscar] {
                let cfg = WeightConfig { q_v: q, q_g: q, alpha, scheme, ..WeightConfig::default() };
                let pw = generate(&g, &cfg).unwrap();
                prop_assert!(pw.check().is_ok(), "{:?}", scheme);
            }
        }

        #[test]
        fn max_dominates_mean(seed in 0u64..1000, m in 1usize..15, q in 0.01f64..0.5) {
            let g = GroupStructure::from_sizes(&random_sizes(seed, m)).unwrap();
            let mean = gslope_mean_weights(&g, q).unwrap();
            let max = gslope_max_weights(&g, q).unwrap();
            for (a, b) in max.iter().zip(&mean) {
                prop_assert!(a + 1e-9 >= *b);
            }
        }

        #[test]
        fn oscar_second_differences_vanish(p in 2usize..200, m in 2usize..50, s in 0.01f64..10.0) {
            let pw = oscar_weights(p, m, s).unwrap();
            for seq in [&pw.v, &pw.w] {
                for win in seq.windows(3) {
                    prop_assert!((win[0] - 2.0 * win[1] + win[2]).abs() <= 1e-12 * s);
                }
            }
        }
    }
}
