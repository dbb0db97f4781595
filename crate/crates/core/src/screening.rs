//! Strong screening rules and path-start values.
//!
//! Every rule reduces to the same kernel: walk a sorted statistic `c` against
//! a nonincreasing threshold `phi`, buffering indices until the buffer's
//! surplus `sum(c - phi)` becomes nonnegative, then keep the whole buffer.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::groups::{group_reduce_unchecked, GroupStructure};
use crate::penalty::{gslope_dual_norm, shrink, slope_dual_norm};
use crate::sort::{argsort_abs_desc, is_nonincreasing, sort_desc_with_index};

/// Coefficients with magnitude above this are treated as active.
pub const ACTIVE_THRESHOLD: f64 = 1e-6;

/// When a buffer of candidate indices is released into the screened set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlushRule {
    /// The total surplus of the buffer is nonnegative.
    #[default]
    Total,
    /// Every prefix of the buffer has nonnegative surplus.
    StrictPrefix,
}

/// Index sets tracked at one path point.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScreenSets {
    pub screened_groups: Vec<usize>,
    pub screened_vars: Vec<usize>,
    pub active_groups: Vec<usize>,
    pub active_vars: Vec<usize>,
    pub fitting_vars: Vec<usize>,
    pub fitting_groups: Vec<usize>,
    pub kkt_vars: Vec<usize>,
    pub kkt_groups: Vec<usize>,
}

/// A sorted screening statistic, its thresholds and the map back to ids.
#[derive(Debug, Clone)]
pub struct ScreenCandidates {
    pub c: Vec<f64>,
    pub phi: Vec<f64>,
    pub perm: Vec<usize>,
}

impl ScreenCandidates {
    pub fn new(c: Vec<f64>, phi: Vec<f64>, perm: Vec<usize>) -> Result<Self> {
        if c.len() != phi.len() || c.len() != perm.len() {
            return invalid("screening statistic, thresholds and permutation differ in length");
        }
        if !is_nonincreasing(&phi, 1e-12) {
            return invalid("screening thresholds must be nonincreasing");
        }
        Ok(Self { c, phi, perm })
    }

    /// Screened ids, sorted.
    pub fn screen(&self, rule: FlushRule) -> Vec<usize> {
        let mut ids: Vec<usize> = cumsum_screen_with(&self.c, &self.phi, rule)
            .into_iter()
            .map(|k| self.perm[k])
            .collect();
        ids.sort_unstable();
        ids
    }
}

/// Positions (0-based, in the sorted order of `c`) kept by the cumsum rule.
pub fn cumsum_screen(c: &[f64], phi: &[f64]) -> Vec<usize> {
    cumsum_screen_with(c, phi, FlushRule::Total)
}

pub fn cumsum_screen_with(c: &[f64], phi: &[f64], rule: FlushRule) -> Vec<usize> {
    cumsum_select(c, phi, rule, |s| s >= 0.0).0
}

/// Shared buffer walk. Returns the released positions and the largest
/// buffer surplus seen.
pub(crate) fn cumsum_select(
    c: &[f64],
    phi: &[f64],
    rule: FlushRule,
    release: impl Fn(f64) -> bool,
) -> (Vec<usize>, f64) {
    assert_eq!(c.len(), phi.len(), "cumsum_screen length mismatch");
    let mut out = Vec::new();
    let mut start = 0;
    let mut total = 0.0;
    let mut min_prefix = f64::INFINITY;
    let mut max_surplus = f64::NEG_INFINITY;
    for i in 0..c.len() {
        total += c[i] - phi[i];
        min_prefix = min_prefix.min(total);
        max_surplus = max_surplus.max(total);
        let ok = match rule {
            FlushRule::Total => release(total),
            FlushRule::StrictPrefix => release(min_prefix),
        };
        if ok {
            out.extend(start..=i);
            start = i + 1;
            total = 0.0;
            min_prefix = f64::INFINITY;
        }
    }
    (out, max_surplus)
}

fn check_lambdas(lambda_k: f64, lambda_next: f64) -> Result<()> {
    if !(lambda_k >= 0.0 && lambda_next >= 0.0) {
        return invalid("path values must be nonnegative");
    }
    if lambda_next > lambda_k {
        return invalid("screening needs lambda_next <= lambda_k");
    }
    Ok(())
}

/// Variable thresholds `scale * v` assigned by the rank of `|x|`.
pub(crate) fn rank_aligned(x: &[f64], v: &[f64], scale: f64) -> Vec<f64> {
    let mut t = vec![0.0; x.len()];
    for (r, i) in argsort_abs_desc(x).into_iter().enumerate() {
        t[i] = scale * v[r];
    }
    t
}

const TIE_TOL: f64 = 1e-9;

/// Thresholds `scale * v` matched to a fit: active variables by `|beta|` rank,
/// each tie block taking its last weight, then zero variables by `|grad|` rank.
pub(crate) fn subgradient_aligned(beta: &[f64], grad: &[f64], v: &[f64], scale: f64) -> Vec<f64> {
    let mut active = Vec::new();
    let mut zero = Vec::new();
    for i in argsort_abs_desc(beta) {
        if beta[i].abs() > ACTIVE_THRESHOLD {
            active.push(i);
        }
    }
    for i in argsort_abs_desc(grad) {
        if beta[i].abs() <= ACTIVE_THRESHOLD {
            zero.push(i);
        }
    }
    let mut t = vec![0.0; beta.len()];
    let mut start = 0;
    while start < active.len() {
        let lead = beta[active[start]].abs();
        let mut end = start;
        while end + 1 < active.len() && lead - beta[active[end + 1]].abs() <= TIE_TOL * lead.max(1.0) {
            end += 1;
        }
        for &i in &active[start..=end] {
            t[i] = scale * v[end];
        }
        start = end + 1;
    }
    for (r, &i) in zero.iter().enumerate() {
        t[i] = scale * v[active.len() + r];
    }
    t
}

/// Strong group rule for gSLOPE.
///
/// `h_prev` is the per-group statistic `p_g^{-1/2} ||grad_g||` at `lambda_k`,
/// indexed by group id; it is sorted here.
pub fn gslope_screen(
    h_prev: &[f64],
    w: &[f64],
    lambda_k: f64,
    lambda_next: f64,
    groups: &GroupStructure,
) -> Result<Vec<usize>> {
    check_lambdas(lambda_k, lambda_next)?;
    let m = groups.num_groups();
    if h_prev.len() != m || w.len() != m {
        return invalid("group statistic and weights need one entry per group");
    }
    let (h, perm) = sort_desc_with_index(h_prev);
    let gap = lambda_k - lambda_next;
    let c = h.iter().zip(w).map(|(h, w)| h + gap * w).collect();
    let phi = w.iter().map(|w| lambda_next * w).collect();
    Ok(ScreenCandidates::new(c, phi, perm)?.screen(FlushRule::Total))
}

/// Strong group rule for SGS.
///
/// `beta_prev` is the fit the gradient was taken at. The soft-threshold levels
/// stand in for the SLOPE subgradient there: active variables take the weight
/// at the end of their `|beta|` tie block (a lower bound on their subgradient
/// magnitude), zero variables take the remaining weights by `|grad|` rank.
/// The levels are scaled by `lambda_next`, which is known exactly, so only
/// the gradient is extrapolated by the weight-gap term.
#[allow(clippy::too_many_arguments)]
pub fn sgs_group_screen(
    grad_prev: &[f64],
    beta_prev: &[f64],
    v: &[f64],
    w: &[f64],
    alpha: f64,
    lambda_k: f64,
    lambda_next: f64,
    groups: &GroupStructure,
) -> Result<Vec<usize>> {
    check_lambdas(lambda_k, lambda_next)?;
    if alpha >= 1.0 {
        return invalid("group screening is undefined for alpha = 1; use the SLOPE variable rule");
    }
    if !(alpha >= 0.0) {
        return invalid("alpha must lie in [0, 1)");
    }
    let p = groups.num_vars();
    if grad_prev.len() != p || beta_prev.len() != p || v.len() != p {
        return invalid("gradient, coefficients and variable weights need one entry per variable");
    }
    if w.len() != groups.num_groups() {
        return invalid("group weights need one entry per group");
    }
    let t = subgradient_aligned(beta_prev, grad_prev, v, lambda_next * alpha);
    let thresholded: Vec<f64> = grad_prev.iter().zip(&t).map(|(&g, &t)| shrink(g, t)).collect();
    let h = group_reduce_unchecked(&thresholded, groups, -0.5);
    let (h, perm) = sort_desc_with_index(&h);
    let share = 1.0 - alpha;
    let gap = lambda_k - lambda_next;
    let c = h.iter().zip(w).map(|(h, w)| h + gap * share * w).collect();
    let phi = w.iter().map(|w| lambda_next * share * w).collect();
    Ok(ScreenCandidates::new(c, phi, perm)?.screen(FlushRule::Total))
}

/// Strong variable rule for SGS over the variables of `candidate_groups`.
///
/// The candidates are compared against the variable weights at their rank
/// positions in the full `|grad|` order.
pub fn sgs_variable_screen(
    grad_prev: &[f64],
    v: &[f64],
    alpha: f64,
    lambda_k: f64,
    lambda_next: f64,
    candidate_groups: &[usize],
    groups: &GroupStructure,
) -> Result<Vec<usize>> {
    check_lambdas(lambda_k, lambda_next)?;
    if grad_prev.len() != groups.num_vars() || v.len() != groups.num_vars() {
        return invalid("gradient and variable weights need one entry per variable");
    }
    if candidate_groups.iter().any(|&g| g >= groups.num_groups()) {
        return invalid("candidate group id out of range");
    }
    let candidates = groups.vars_of_groups(candidate_groups);
    Ok(variable_rule(grad_prev, v, alpha, lambda_k, lambda_next, &candidates))
}

/// SLOPE strong rule on all variables.
pub fn slope_screen(grad_prev: &[f64], v: &[f64], lambda_k: f64, lambda_next: f64) -> Result<Vec<usize>> {
    check_lambdas(lambda_k, lambda_next)?;
    if grad_prev.len() != v.len() {
        return invalid("gradient and weights differ in length");
    }
    let all: Vec<usize> = (0..v.len()).collect();
    Ok(variable_rule(grad_prev, v, 1.0, lambda_k, lambda_next, &all))
}

fn variable_rule(
    grad: &[f64],
    v: &[f64],
    alpha: f64,
    lambda_k: f64,
    lambda_next: f64,
    candidates: &[usize],
) -> Vec<usize> {
    if candidates.is_empty() {
        return Vec::new();
    }
    let mut is_candidate = vec![false; grad.len()];
    for &i in candidates {
        is_candidate[i] = true;
    }
    let gap = lambda_k - lambda_next;
    let mut c = Vec::with_capacity(candidates.len());
    let mut phi = Vec::with_capacity(candidates.len());
    let mut perm = Vec::with_capacity(candidates.len());
    for (r, i) in argsort_abs_desc(grad).into_iter().enumerate() {
        if is_candidate[i] {
            c.push(grad[i].abs() + gap * alpha * v[r]);
            phi.push(lambda_next * alpha * v[r]);
            perm.push(i);
        }
    }
    ScreenCandidates { c, phi, perm }.screen(FlushRule::Total)
}

/// Smallest `lambda` at which zero solves the gSLOPE problem.
pub fn gslope_lambda_max(grad0: &[f64], w: &[f64], groups: &GroupStructure) -> Result<f64> {
    if w.first().is_none_or(|&w1| !(w1 > 0.0)) {
        return invalid("the leading group weight must be positive");
    }
    gslope_dual_norm(grad0, w, groups)
}

/// Smallest `lambda` at which zero solves the SLOPE problem.
pub fn slope_lambda_max(grad0: &[f64], v: &[f64]) -> Result<f64> {
    slope_dual_norm(grad0, v)
}

/// Largest prefix surplus of the SGS zero-solution group condition.
/// Zero passes the condition at `lambda` iff this is `<= 0`.
pub(crate) fn sgs_zero_excess(
    grad: &[f64],
    v: &[f64],
    w: &[f64],
    alpha: f64,
    lambda: f64,
    groups: &GroupStructure,
) -> f64 {
    let t = rank_aligned(grad, v, lambda * alpha);
    let thresholded: Vec<f64> = grad.iter().zip(&t).map(|(&g, &t)| shrink(g, t)).collect();
    let h = group_reduce_unchecked(&thresholded, groups, -0.5);
    let (h, _) = sort_desc_with_index(&h);
    let share = 1.0 - alpha;
    let mut acc = 0.0;
    let mut best = f64::NEG_INFINITY;
    for (h, w) in h.iter().zip(w) {
        acc += h - lambda * share * w;
        best = best.max(acc);
    }
    best
}

const MAX_DOUBLINGS: usize = 200;
const MAX_BISECTIONS: usize = 200;

/// Smallest `lambda` at which the zero vector passes the SGS group-level
/// optimality condition, found by bisection.
///
/// The surplus is nonincreasing in `lambda`, so the threshold is well defined.
/// On singleton groups it coincides with [`sgs_lambda_max_closed_form`].
pub fn sgs_lambda_max(
    grad0: &[f64],
    v: &[f64],
    w: &[f64],
    alpha: f64,
    groups: &GroupStructure,
) -> Result<f64> {
    check_sgs_inputs(grad0, v, w, alpha, groups)?;
    if grad0.iter().all(|&g| g == 0.0) {
        return Ok(0.0);
    }
    if alpha == 1.0 {
        return slope_dual_norm(grad0, v);
    }
    let passes = |lambda: f64| sgs_zero_excess(grad0, v, w, alpha, lambda, groups) <= 0.0;
    let mut hi = sgs_lambda_max_closed_form(grad0, v, w, alpha, groups)
        .unwrap_or(1.0)
        .max(f64::MIN_POSITIVE);
    let mut lo = 0.0;
    let mut doublings = 0;
    while !passes(hi) {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::Configuration(
                "zero is never optimal: the weights cannot absorb the gradient".into(),
            ));
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Closed-form path start for SGS:
/// `max_k cumsum(|grad|_desc)_k / cumsum(alpha v + (1 - alpha) sqrt(p_g) w_g)_k`,
/// with group weights assigned by the rank of the reduced group gradients and
/// expanded to the group's variables.
pub fn sgs_lambda_max_closed_form(
    grad0: &[f64],
    v: &[f64],
    w: &[f64],
    alpha: f64,
    groups: &GroupStructure,
) -> Result<f64> {
    check_sgs_inputs(grad0, v, w, alpha, groups)?;
    let reduced = group_reduce_unchecked(grad0, groups, -0.5);
    let (_, group_order) = sort_desc_with_index(&reduced);
    let mut group_weight = vec![0.0; groups.num_groups()];
    for (r, &g) in group_order.iter().enumerate() {
        group_weight[g] = w[r];
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut best = 0.0f64;
    let mut any_positive = false;
    for (r, i) in argsort_abs_desc(grad0).into_iter().enumerate() {
        let g = groups.group_of(i);
        let size = groups.scale_sizes()[g] as f64;
        num += grad0[i].abs();
        den += alpha * v[r] + (1.0 - alpha) * size.sqrt() * group_weight[g];
        if den > 0.0 {
            any_positive = true;
            best = best.max(num / den);
        }
    }
    if !any_positive {
        return Err(Error::Configuration(
            "every prefix of the path-start denominator is nonpositive; rescale the weights or change alpha".into(),
        ));
    }
    Ok(best)
}

fn check_sgs_inputs(grad0: &[f64], v: &[f64], w: &[f64], alpha: f64, groups: &GroupStructure) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return invalid("alpha must lie in [0, 1]");
    }
    if grad0.len() != groups.num_vars() || v.len() != groups.num_vars() {
        return invalid("gradient and variable weights need one entry per variable");
    }
    if w.len() != groups.num_groups() {
        return invalid("group weights need one entry per group");
    }
    Ok(())
}

/// Active variables (`|beta_i| > ACTIVE_THRESHOLD`) and the groups containing them.
pub fn active_sets(beta: &[f64], groups: &GroupStructure) -> (Vec<usize>, Vec<usize>) {
    let vars: Vec<usize> = beta
        .iter()
        .enumerate()
        .filter(|(_, b)| b.abs() > ACTIVE_THRESHOLD)
        .map(|(i, _)| i)
        .collect();
    let gs = groups.groups_of_vars(&vars);
    (vars, gs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn cumsum_examples() {
        assert_eq!(cumsum_screen(&[5.0, 0.0, 0.0], &[1.0; 3]), vec![0]);
        assert_eq!(cumsum_screen(&[0.0, 0.0], &[0.0, 0.0]), vec![0, 1]);
        assert_eq!(cumsum_screen(&[2.0, 2.0, 0.0], &[3.0, 1.0, 1.0]), vec![0, 1]);
        assert!(cumsum_screen(&[0.0, 0.0], &[1.0, 0.5]).is_empty());
    }

    #[test]
    fn strict_prefix_is_stricter() {
        let c = [2.0, 2.0, 0.0];
        let phi = [3.0, 1.0, 1.0];
        assert!(cumsum_screen_with(&c, &phi, FlushRule::StrictPrefix).is_empty());
        let c = [5.0, 0.0, 3.0];
        let phi = [1.0, 1.0, 1.0];
        assert_eq!(cumsum_screen_with(&c, &phi, FlushRule::StrictPrefix), vec![0]);
        assert_eq!(cumsum_screen_with(&c, &phi, FlushRule::Total), vec![0, 1, 2]);
    }

    #[test]
    fn gslope_scalar_traces() {
        let g = GroupStructure::from_sizes(&[3]).unwrap();
        assert_eq!(gslope_screen(&[0.8], &[1.0], 1.0, 0.9, &g).unwrap(), vec![0]);
        assert!(gslope_screen(&[0.5], &[1.0], 1.0, 0.99, &g).unwrap().is_empty());
        assert!(gslope_screen(&[0.5], &[1.0], -1.0, -2.0, &g).is_err());
    }

    #[test]
    fn gslope_zero_gap_is_exact_condition() {
        let g = GroupStructure::from_sizes(&[2, 2, 1]).unwrap();
        let h = [0.3, 1.2, 0.9];
        let w = [1.0, 0.8, 0.5];
        let s = gslope_screen(&h, &w, 1.0, 1.0, &g).unwrap();
        // sorted h = [1.2, 0.9, 0.3] vs [1.0, 0.8, 0.5]: surpluses 0.2, 0.1, -0.2
        assert_eq!(s, vec![1, 2]);
    }

    #[test]
    fn subgradient_alignment() {
        let v = [6.0, 5.0, 4.0, 3.0, 2.0, 1.0];
        let beta = [0.0, 2.0, -2.0, 0.5, 0.0, 0.0];
        let grad = [0.1, -9.0, 9.0, -3.0, 0.7, -0.3];
        // Tie block {1, 2} takes v[1]; variable 3 takes v[2]; zeros by |grad|.
        assert_eq!(subgradient_aligned(&beta, &grad, &v, 1.0), vec![1.0, 5.0, 5.0, 4.0, 3.0, 2.0]);
        assert_eq!(subgradient_aligned(&[0.0; 6], &grad, &v, 2.0), rank_aligned(&grad, &v, 2.0));
    }

    #[test]
    fn sgs_group_trace() {
        let g = GroupStructure::from_sizes(&[2]).unwrap();
        let s = sgs_group_screen(&[2.0, -2.0], &[0.0, 0.0], &[1.0, 1.0], &[2.0], 0.5, 1.0, 1.0, &g).unwrap();
        assert_eq!(s, vec![0]);
        let s = sgs_group_screen(&[0.2, -0.1], &[0.0, 0.0], &[1.0, 1.0], &[2.0], 0.5, 1.0, 1.0, &g).unwrap();
        assert!(s.is_empty());
        assert!(sgs_group_screen(&[1.0, 1.0], &[0.0, 0.0], &[1.0, 1.0], &[1.0], 1.0, 1.0, 1.0, &g).is_err());
    }

    #[test]
    fn sgs_group_at_alpha_zero_is_gslope() {
        let g = GroupStructure::from_sizes(&[2, 3, 1]).unwrap();
        let grad = [0.5, -1.5, 0.2, 0.9, -0.4, 1.1];
        let v = [6.0, 5.0, 4.0, 3.0, 2.0, 1.0];
        let w = [1.2, 0.7, 0.3];
        let h = group_reduce_unchecked(&grad, &g, -0.5);
        assert_eq!(
            sgs_group_screen(&grad, &[0.0; 6], &v, &w, 0.0, 1.1, 0.9, &g).unwrap(),
            gslope_screen(&h, &w, 1.1, 0.9, &g).unwrap()
        );
    }

    #[test]
    fn sgs_variable_trace() {
        let g = GroupStructure::from_sizes(&[2]).unwrap();
        let s = sgs_variable_screen(&[2.0, 0.1], &[1.0, 1.0], 0.5, 1.0, 0.8, &[0], &g).unwrap();
        assert_eq!(s, vec![0]);
        assert!(sgs_variable_screen(&[2.0, 0.1], &[1.0, 1.0], 0.5, 1.0, 0.8, &[], &g)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn variable_rule_at_alpha_one_is_slope_rule() {
        let g = GroupStructure::from_sizes(&[2, 2]).unwrap();
        let grad = [0.3, -1.4, 0.8, 0.1];
        let v = [1.0, 0.9, 0.6, 0.2];
        assert_eq!(
            sgs_variable_screen(&grad, &v, 1.0, 1.2, 1.0, &[0, 1], &g).unwrap(),
            slope_screen(&grad, &v, 1.2, 1.0).unwrap()
        );
    }

    #[test]
    fn gslope_lambda_max_example() {
        let g = GroupStructure::from_assignment(&[0, 0, 1]).unwrap();
        let l = gslope_lambda_max(&[3.0, 4.0, 1.0], &[1.0, 0.5], &g).unwrap();
        assert_abs_diff_eq!(l, 5.0 / 2f64.sqrt(), epsilon = 1e-12);
        assert_eq!(gslope_lambda_max(&[0.0; 3], &[1.0, 0.5], &g).unwrap(), 0.0);
    }

    #[test]
    fn sgs_lambda_max_singletons() {
        let g = GroupStructure::singletons(2);
        let (grad, v, w) = ([2.0, 1.0], [1.0, 0.5], [2.0, 1.0]);
        let closed = sgs_lambda_max_closed_form(&grad, &v, &w, 0.25, &g).unwrap();
        assert_abs_diff_eq!(closed, 8.0 / 7.0, epsilon = 1e-12);
        let exact = sgs_lambda_max(&grad, &v, &w, 0.25, &g).unwrap();
        assert_abs_diff_eq!(exact, 8.0 / 7.0, epsilon = 1e-12);
        assert_eq!(sgs_lambda_max(&[0.0, 0.0], &v, &w, 0.25, &g).unwrap(), 0.0);
    }

    #[test]
    fn sgs_lambda_max_alpha_zero_is_gslope() {
        let g = GroupStructure::singletons(3);
        let grad = [0.4, -2.0, 1.3];
        let v = [1.0, 1.0, 1.0];
        let w = [1.5, 1.0, 0.2];
        let a = sgs_lambda_max_closed_form(&grad, &v, &w, 0.0, &g).unwrap();
        let b = gslope_lambda_max(&grad, &w, &g).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        assert_abs_diff_eq!(sgs_lambda_max(&grad, &v, &w, 0.0, &g).unwrap(), b, epsilon = 1e-12);
    }

    #[test]
    fn sgs_lambda_max_group_of_two() {
        // One group of two with grad [1, 1], v = [1, 1], w = [1], alpha = 0.5:
        // zero is optimal iff sqrt(2) (1 - lambda / 2) / sqrt(2) <= lambda / 2.
        let g = GroupStructure::from_sizes(&[2]).unwrap();
        let l = sgs_lambda_max(&[1.0, 1.0], &[1.0, 1.0], &[1.0], 0.5, &g).unwrap();
        assert_abs_diff_eq!(l, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_closed_form_rejected() {
        let g = GroupStructure::singletons(2);
        let r = sgs_lambda_max_closed_form(&[1.0, 1.0], &[0.0, 0.0], &[0.0, 0.0], 0.5, &g);
        assert!(matches!(r, Err(Error::Configuration(_))));
    }

    fn brute_force(c: &[f64], phi: &[f64]) -> Vec<usize> {
        // Direct transcription of the buffer walk, kept deliberately naive.
        let mut s = Vec::new();
        let mut buffer: Vec<usize> = Vec::new();
        for i in 0..c.len() {
            buffer.push(i);
            let total: f64 = buffer.iter().map(|&j| c[j] - phi[j]).sum();
            if total >= 0.0 {
                s.append(&mut buffer);
            }
        }
        s
    }

    fn sorted_pair(len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(0.0f64..3.0, len),
            prop::collection::vec(0.0f64..3.0, len),
        )
            .prop_map(|(mut c, mut phi)| {
                c.sort_by(|a, b| b.partial_cmp(a).unwrap());
                phi.sort_by(|a, b| b.partial_cmp(a).unwrap());
                (c, phi)
            })
    }

    proptest! {
        #[test]
        fn matches_naive_walk((c, phi) in (1usize..=8).prop_flat_map(sorted_pair)) {
            prop_assert_eq!(cumsum_screen(&c, &phi), brute_force(&c, &phi));
        }

        #[test]
        fn zero_threshold_keeps_all(c in prop::collection::vec(0.0f64..3.0, 1..10)) {
            let phi = vec![0.0; c.len()];
            prop_assert_eq!(cumsum_screen(&c, &phi).len(), c.len());
        }

        #[test]
        fn zero_statistic_keeps_none(mut phi in prop::collection::vec(0.01f64..3.0, 1..10)) {
            phi.sort_by(|a, b| b.partial_cmp(a).unwrap());
            prop_assert!(cumsum_screen(&vec![0.0; phi.len()], &phi).is_empty());
        }

        #[test]
        fn enlarging_c_never_shrinks(
            (c, phi) in (1usize..=8).prop_flat_map(sorted_pair),
            bump in prop::collection::vec(0.0f64..1.0, 8),
        ) {
            let bigger: Vec<f64> = c.iter().zip(&bump).map(|(c, b)| c + b).collect();
            let small = cumsum_screen(&c, &phi);
            let large = cumsum_screen(&bigger, &phi);
            prop_assert!(small.iter().all(|i| large.contains(i)));
        }

        #[test]
        fn gslope_lambda_max_is_dual_norm(
            grad in prop::collection::vec(-4.0f64..4.0, 7),
            mut w in prop::collection::vec(0.05f64..2.0, 3),
        ) {
            w.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let g = GroupStructure::from_sizes(&[3, 1, 3]).unwrap();
            let l = gslope_lambda_max(&grad, &w, &g).unwrap();
            prop_assert!((l - gslope_dual_norm(&grad, &w, &g).unwrap()).abs() <= 1e-12);
        }
    }
}
