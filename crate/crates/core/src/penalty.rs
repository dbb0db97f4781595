//! Sorted-l1 norms, their duals, proximal operators and the zero-branch
//! subdifferential test.
//!
//! The gSLOPE norm is the SLOPE norm of the scaled group norms
//! `sqrt(p_g) ||beta_g||`, so its dual is the SLOPE dual of
//! `p_g^{-1/2} ||x_g||`. SGS is the convex combination
//! `alpha * SLOPE + (1 - alpha) * gSLOPE`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::groups::{group_reduce_unchecked, GroupStructure, Restriction};
use crate::sort::{argsort_desc, cumsum, sort_abs_desc_with_index};
use crate::weights::PenaltyWeights;

/// Tolerance for every cumsum membership test.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyKind {
    Slope,
    Gslope,
    Sgs,
}

/// A fully specified penalty `J`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    pub weights: PenaltyWeights,
    pub alpha: f64,
    pub groups: GroupStructure,
}

impl PenaltySpec {
    pub fn new(
        kind: PenaltyKind,
        weights: PenaltyWeights,
        alpha: f64,
        groups: GroupStructure,
    ) -> Result<Self> {
        weights.check()?;
        if weights.v.len() != groups.num_vars() {
            return invalid("variable weights must have one entry per variable");
        }
        if weights.w.len() != groups.num_groups() {
            return invalid("group weights must have one entry per group");
        }
        if kind == PenaltyKind::Sgs && !(0.0..=1.0).contains(&alpha) {
            return invalid("SGS mixing alpha must lie in [0, 1]");
        }
        Ok(Self {
            kind,
            weights,
            alpha,
            groups,
        })
    }

    pub fn slope(v: Vec<f64>) -> Result<Self> {
        let p = v.len();
        Self::new(
            PenaltyKind::Slope,
            PenaltyWeights::new(v, vec![0.0; p])?,
            1.0,
            GroupStructure::singletons(p),
        )
    }

    pub fn gslope(w: Vec<f64>, groups: GroupStructure) -> Result<Self> {
        let p = groups.num_vars();
        Self::new(
            PenaltyKind::Gslope,
            PenaltyWeights::new(vec![0.0; p], w)?,
            0.0,
            groups,
        )
    }

    pub fn sgs(weights: PenaltyWeights, alpha: f64, groups: GroupStructure) -> Result<Self> {
        Self::new(PenaltyKind::Sgs, weights, alpha, groups)
    }

    /// Share of the penalty carried by the variable-level SLOPE term.
    pub fn variable_share(&self) -> f64 {
        match self.kind {
            PenaltyKind::Slope => 1.0,
            PenaltyKind::Gslope => 0.0,
            PenaltyKind::Sgs => self.alpha,
        }
    }

    /// Share of the penalty carried by the group-level gSLOPE term.
    pub fn group_share(&self) -> f64 {
        1.0 - self.variable_share()
    }

    pub fn num_vars(&self) -> usize {
        self.groups.num_vars()
    }

    /// `J(beta)`.
    pub fn value(&self, beta: &[f64]) -> Result<f64> {
        if beta.len() != self.num_vars() {
            return invalid("coefficient vector length does not match the penalty");
        }
        let (a, b) = (self.variable_share(), self.group_share());
        let mut total = 0.0;
        if a > 0.0 {
            total += a * slope_norm(beta, &self.weights.v)?;
        }
        if b > 0.0 {
            total += b * gslope_norm(beta, &self.weights.w, &self.groups)?;
        }
        Ok(total)
    }

    /// The penalty on the coordinates `vars`, with the leading (largest)
    /// weights kept for the restricted dimension. On vectors that vanish
    /// outside `vars` it coincides with the full penalty.
    pub fn restrict(&self, vars: &[usize]) -> Result<(PenaltySpec, Restriction)> {
        let restriction = self.groups.restrict(vars)?;
        let v = self.weights.v[..restriction.vars.len()].to_vec();
        let w = self.weights.w[..restriction.group_ids.len()].to_vec();
        let spec = PenaltySpec {
            kind: self.kind,
            weights: PenaltyWeights { v, w },
            alpha: self.alpha,
            groups: restriction.groups.clone(),
        };
        Ok((spec, restriction))
    }
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        invalid(format!("length mismatch: {a} vs {b}"))
    }
}

/// `sum_i v_i |beta|_(i)`.
pub fn slope_norm(beta: &[f64], v: &[f64]) -> Result<f64> {
    check_len(beta.len(), v.len())?;
    let (sorted, _) = sort_abs_desc_with_index(beta);
    Ok(sorted.iter().zip(v).map(|(b, w)| b * w).sum())
}

/// SLOPE norm of the scaled group norms `sqrt(p_g) ||beta_g||`.
pub fn gslope_norm(beta: &[f64], w: &[f64], groups: &GroupStructure) -> Result<f64> {
    check_len(beta.len(), groups.num_vars())?;
    check_len(w.len(), groups.num_groups())?;
    slope_norm(&group_reduce_unchecked(beta, groups, 0.5), w)
}

/// `alpha * J_slope(beta; v) + (1 - alpha) * J_gslope(beta; w)`.
pub fn sgs_norm(beta: &[f64], spec: &PenaltySpec) -> Result<f64> {
    if spec.kind != PenaltyKind::Sgs {
        return invalid("sgs_norm needs an SGS penalty");
    }
    let a = spec.alpha;
    Ok(a * slope_norm(beta, &spec.weights.v)?
        + (1.0 - a) * gslope_norm(beta, &spec.weights.w, &spec.groups)?)
}

/// `max_k cumsum(|x|_desc)_k / cumsum(v)_k` over prefixes with positive
/// weight mass.
pub fn slope_dual_norm(x: &[f64], v: &[f64]) -> Result<f64> {
    check_len(x.len(), v.len())?;
    if !v.iter().any(|&w| w > 0.0) {
        return invalid("dual norm undefined for all-zero weights");
    }
    let (sorted, _) = sort_abs_desc_with_index(x);
    let num = cumsum(sorted);
    let den = cumsum(v.iter().copied());
    Ok(num
        .iter()
        .zip(&den)
        .filter(|(_, &d)| d > 0.0)
        .map(|(n, d)| n / d)
        .fold(0.0, f64::max))
}

/// SLOPE dual of `p_g^{-1/2} ||x_g||`.
pub fn gslope_dual_norm(x: &[f64], w: &[f64], groups: &GroupStructure) -> Result<f64> {
    check_len(x.len(), groups.num_vars())?;
    slope_dual_norm(&group_reduce_unchecked(x, groups, -0.5), w)
}

/// `sign(x) (|x| - t)_+`, elementwise.
pub fn soft_threshold(x: &[f64], t: &[f64]) -> Result<Vec<f64>> {
    check_len(x.len(), t.len())?;
    if t.iter().any(|&v| v < 0.0) {
        return invalid("soft-threshold levels must be nonnegative");
    }
    Ok(x.iter().zip(t).map(|(&x, &t)| shrink(x, t)).collect())
}

#[inline]
pub(crate) fn shrink(x: f64, t: f64) -> f64 {
    let m = x.abs() - t;
    if m > 0.0 {
        m.copysign(x)
    } else {
        0.0
    }
}

/// Weighted nonincreasing isotonic regression by pool-adjacent-violators.
fn pava_nonincreasing(target: &[f64], weight: &[f64]) -> Vec<f64> {
    // (sum of weights, weighted sum, count)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(target.len());
    for (&t, &w) in target.iter().zip(weight) {
        blocks.push((w, w * t, 1));
        while blocks.len() > 1 {
            let (w1, s1, _) = blocks[blocks.len() - 2];
            let (w2, s2, _) = blocks[blocks.len() - 1];
            if s1 * w2 <= s2 * w1 {
                let (_, _, c2) = blocks.pop().unwrap();
                let last = blocks.last_mut().unwrap();
                last.0 += w2;
                last.1 += s2;
                last.2 += c2;
            } else {
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(target.len());
    for (w, s, c) in blocks {
        let mean = s / w;
        out.extend(std::iter::repeat_n(mean, c));
    }
    out
}

const MAX_REORDERS: usize = 100;

/// Minimizes `sum_g omega_g / 2 (d_g - a_g)^2 + sum_i t_i d_(i)` over `d >= 0`
/// for `a >= 0`, `omega > 0` and nonincreasing `t >= 0`.
///
/// For a fixed ordering the problem is a weighted isotonic regression. The
/// ordering is refined until it sorts `d` decreasingly and, inside each tied
/// cluster, sorts the residuals `omega (a - d)` decreasingly; that fixed point
/// satisfies the optimality conditions. With unit `omega` the first ordering
/// (by `a`) is already the fixed point.
fn weighted_sorted_l1_prox(a: &[f64], omega: &[f64], t: &[f64]) -> Vec<f64> {
    let k = a.len();
    let mut order = argsort_desc(a);
    let mut d = vec![0.0; k];
    for _ in 0..MAX_REORDERS {
        let target: Vec<f64> = order
            .iter()
            .enumerate()
            .map(|(pos, &g)| a[g] - t[pos] / omega[g])
            .collect();
        let weight: Vec<f64> = order.iter().map(|&g| omega[g]).collect();
        let fitted = pava_nonincreasing(&target, &weight);
        for (pos, &g) in order.iter().enumerate() {
            d[g] = fitted[pos].max(0.0);
        }
        let mut next = order.clone();
        next.sort_by(|&i, &j| {
            d[j].partial_cmp(&d[i])
                .unwrap()
                .then_with(|| {
                    let ri = omega[i] * (a[i] - d[i]);
                    let rj = omega[j] * (a[j] - d[j]);
                    rj.partial_cmp(&ri).unwrap()
                })
                .then_with(|| i.cmp(&j))
        });
        if next == order {
            break;
        }
        order = next;
    }
    d
}

/// Proximal operator of `b -> sum_i tv_i |b|_(i)`.
pub fn slope_prox(y: &[f64], tv: &[f64]) -> Vec<f64> {
    assert_eq!(y.len(), tv.len(), "slope_prox length mismatch");
    let a: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    let omega = vec![1.0; y.len()];
    let d = weighted_sorted_l1_prox(&a, &omega, tv);
    y.iter()
        .zip(d)
        .map(|(&yi, di)| if di == 0.0 { 0.0 } else { di.copysign(yi) })
        .collect()
}

/// Proximal operator of `b -> sum_i tw_i (sqrt(p_g) ||b_g||)_(i)`.
///
/// Each group is shrunk radially. The radial magnitudes `c_g` solve a sorted-l1
/// problem in `d_g = sqrt(p_g) c_g` with quadratic weights `1 / p_g`.
pub fn gslope_prox(y: &[f64], tw: &[f64], groups: &GroupStructure) -> Vec<f64> {
    assert_eq!(y.len(), groups.num_vars(), "gslope_prox length mismatch");
    assert_eq!(tw.len(), groups.num_groups(), "gslope_prox weight mismatch");
    let m = groups.num_groups();
    let mut norms = Vec::with_capacity(m);
    let mut a = Vec::with_capacity(m);
    let mut omega = Vec::with_capacity(m);
    for g in 0..m {
        let members = groups.members(g);
        let e = if members.len() == 1 {
            y[members[0]].abs()
        } else {
            members.iter().map(|&i| y[i] * y[i]).sum::<f64>().sqrt()
        };
        let s = groups.scale_sizes()[g] as f64;
        norms.push(e);
        a.push(s.sqrt() * e);
        omega.push(1.0 / s);
    }
    let d = weighted_sorted_l1_prox(&a, &omega, tw);
    let mut out = vec![0.0; y.len()];
    for g in 0..m {
        let members = groups.members(g);
        let c = d[g] / (groups.scale_sizes()[g] as f64).sqrt();
        if c == 0.0 || norms[g] == 0.0 {
            continue;
        }
        if members.len() == 1 {
            let i = members[0];
            out[i] = c.copysign(y[i]);
        } else {
            let ratio = c / norms[g];
            for &i in members {
                out[i] = y[i] * ratio;
            }
        }
    }
    out
}

/// `x` lies in the SLOPE subdifferential at zero, i.e. every prefix sum of
/// `|x|_desc - v` is nonpositive (up to [`MEMBERSHIP_TOL`]).
pub fn slope_subdiff_zero_check(x: &[f64], v: &[f64]) -> bool {
    let (sorted, _) = sort_abs_desc_with_index(x);
    let mut acc = 0.0;
    for (s, w) in sorted.iter().zip(v) {
        acc += s - w;
        if acc > MEMBERSHIP_TOL {
            return false;
        }
    }
    true
}
