//! Losses and the adaptive three-operator-splitting fitter.
//!
//! The objective is `f(beta) + lambda * J(beta)` with the unnormalized losses
//! `f = 0.5 ||y - X beta||^2` and `f = sum log(1 + e^eta) - y eta`. For SGS the
//! two penalty terms are split: the SLOPE part is the forward-backward prox
//! and the gSLOPE part the second resolvent. A single penalty term makes the
//! scheme plain proximal gradient with backtracking.

use std::borrow::Cow;

use ndarray::{Array1, Array2, ArrayView1, ShapeBuilder};
use serde::{Deserialize, Serialize};

use crate::data::{Coefficients, Dataset, Loss};
use crate::error::{invalid, Error, Result};
use crate::groups::group_reduce_unchecked;
use crate::penalty::{gslope_prox, shrink, slope_prox, PenaltyKind, PenaltySpec};
use crate::sort::{argsort_abs_desc, argsort_desc, is_nonincreasing};
use crate::weights::PenaltyWeights;

/// How weights are assigned to a restricted problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRestriction {
    /// The largest `|E|` variable weights and `|groups(E)|` group weights.
    #[default]
    Leading,
    /// The weights at the positions the restricted variables (groups) hold in
    /// the gradient ranking at the starting point.
    RankPreserving,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub backtrack_factor: f64,
    pub max_backtrack: usize,
    pub tol: f64,
    /// `None` estimates `1 / L` from ten power iterations.
    pub initial_step: Option<f64>,
    pub weight_restriction: WeightRestriction,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            backtrack_factor: 0.7,
            max_backtrack: 100,
            tol: 1e-5,
            initial_step: None,
            weight_restriction: WeightRestriction::Leading,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return invalid("backtracking factor must lie in (0, 1)");
        }
        if !(self.tol > 0.0) {
            return invalid("tolerance must be positive");
        }
        if let Some(s) = self.initial_step {
            if !(s > 0.0 && s.is_finite()) {
                return invalid("initial step must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub beta: Coefficients,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
}

/// Loss value and gradient at `beta`.
pub fn loss_and_grad(dataset: &Dataset, beta: &[f64]) -> Result<(f64, Vec<f64>)> {
    if beta.len() != dataset.p() {
        return invalid("coefficient vector length does not match the design");
    }
    let smooth = Smooth::new(Cow::Borrowed(dataset.x()), dataset.y().view(), dataset.loss());
    let eta = smooth.eta(beta);
    let value = smooth.value(&eta);
    let grad = smooth.grad(&eta);
    if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NumericalFailure("loss or gradient is not finite".into()));
    }
    Ok((value, grad))
}

struct Smooth<'a> {
    x: Cow<'a, Array2<f64>>,
    y: ArrayView1<'a, f64>,
    loss: Loss,
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl<'a> Smooth<'a> {
    fn new(x: Cow<'a, Array2<f64>>, y: ArrayView1<'a, f64>, loss: Loss) -> Self {
        Self { x, y, loss }
    }

    fn eta(&self, beta: &[f64]) -> Array1<f64> {
        self.x.dot(&ArrayView1::from(beta))
    }

    fn value(&self, eta: &Array1<f64>) -> f64 {
        match self.loss {
            Loss::Linear => 0.5 * eta.iter().zip(self.y).map(|(e, y)| (y - e).powi(2)).sum::<f64>(),
            Loss::Logistic => eta.iter().zip(self.y).map(|(&e, &y)| softplus(e) - y * e).sum(),
        }
    }

    fn grad(&self, eta: &Array1<f64>) -> Vec<f64> {
        let r: Array1<f64> = match self.loss {
            Loss::Linear => eta - &self.y,
            Loss::Logistic => Array1::from_iter(eta.iter().zip(self.y).map(|(&e, &y)| sigmoid(e) - y)),
        };
        self.x.t().dot(&r).to_vec()
    }

    /// Lipschitz constant of the gradient from ten power iterations on `X^T X`.
    fn lipschitz(&self) -> f64 {
        let p = self.x.ncols();
        let mut v = Array1::from_elem(p, 1.0 / (p as f64).sqrt());
        let mut est = 0.0;
        for _ in 0..10 {
            let xv = self.x.dot(&v);
            let w = self.x.t().dot(&xv);
            let norm = w.dot(&w).sqrt();
            if norm == 0.0 {
                break;
            }
            est = norm;
            v = w / norm;
        }
        let scale = match self.loss {
            Loss::Linear => 1.0,
            Loss::Logistic => 0.25,
        };
        scale * est
    }
}

/// The penalty at a fixed `lambda`, split into its two proximable parts.
struct Split<'a> {
    spec: &'a PenaltySpec,
    lambda: f64,
}

impl Split<'_> {
    fn has_second(&self) -> bool {
        self.spec.kind == PenaltyKind::Sgs && self.spec.alpha > 0.0 && self.spec.alpha < 1.0
    }

    /// Prox of the first term: SLOPE for SLOPE and SGS, gSLOPE otherwise.
    fn prox_first(&self, y: &[f64], step: f64) -> Vec<f64> {
        let spec = self.spec;
        match spec.kind {
            PenaltyKind::Gslope => {
                let t: Vec<f64> = spec.weights.w.iter().map(|w| step * self.lambda * w).collect();
                gslope_prox(y, &t, &spec.groups)
            }
            PenaltyKind::Sgs if spec.alpha == 0.0 => {
                let t: Vec<f64> = spec.weights.w.iter().map(|w| step * self.lambda * w).collect();
                gslope_prox(y, &t, &spec.groups)
            }
            _ => {
                let a = step * self.lambda * spec.variable_share();
                let t: Vec<f64> = spec.weights.v.iter().map(|v| a * v).collect();
                slope_prox(y, &t)
            }
        }
    }

    fn prox_second(&self, y: &[f64], step: f64) -> Vec<f64> {
        let a = step * self.lambda * self.spec.group_share();
        let t: Vec<f64> = self.spec.weights.w.iter().map(|w| a * w).collect();
        gslope_prox(y, &t, &self.spec.groups)
    }

    fn value(&self, beta: &[f64]) -> f64 {
        self.lambda * self.spec.value(beta).expect("penalty dimension checked")
    }

    /// A subgradient of the second term consistent with the optimality
    /// conditions at `beta`, used to start the dual sequence.
    fn dual_start(&self, beta: &[f64], grad: &[f64]) -> Vec<f64> {
        let spec = self.spec;
        let groups = &spec.groups;
        let (a, b) = (spec.alpha, 1.0 - spec.alpha);
        let mut u = vec![0.0; beta.len()];

        let reduced = group_reduce_unchecked(beta, groups, 0.5);
        let order = argsort_desc(&reduced);
        let active = reduced.iter().filter(|r| **r > 0.0).count();
        for (r, &g) in order.iter().take(active).enumerate() {
            let members = groups.members(g);
            let norm = members.iter().map(|&i| beta[i] * beta[i]).sum::<f64>().sqrt();
            let size = groups.scale_sizes()[g] as f64;
            let coef = self.lambda * b * spec.weights.w[r] * size.sqrt() / norm;
            for &i in members {
                u[i] = coef * beta[i];
            }
        }

        let nonzero = beta.iter().filter(|x| **x != 0.0).count();
        let mut rank = 0;
        for i in argsort_abs_desc(grad) {
            if beta[i] == 0.0 {
                let g = groups.group_of(i);
                if reduced[g] == 0.0 {
                    let t = self.lambda * a * spec.weights.v[nonzero + rank];
                    u[i] = -shrink(grad[i], t);
                }
                rank += 1;
            }
        }

        // Zero blocks must satisfy the cumsum condition against the tail
        // weights; if they do not, each is pulled into its own ball, which
        // keeps u inside the subdifferential at beta.
        let zero_groups: Vec<usize> = (0..groups.num_groups()).filter(|&g| reduced[g] == 0.0).collect();
        let block_norms: Vec<f64> = zero_groups
            .iter()
            .map(|&g| {
                let n = groups.members(g).iter().map(|&i| u[i] * u[i]).sum::<f64>().sqrt();
                n / (groups.scale_sizes()[g] as f64).sqrt()
            })
            .collect();
        let order = argsort_desc(&block_norms);
        let mut surplus = 0.0;
        let mut absorbed = true;
        for (r, &k) in order.iter().enumerate() {
            surplus += block_norms[k] - self.lambda * b * spec.weights.w[active + r];
            absorbed &= surplus <= 0.0;
        }
        if absorbed {
            return u;
        }
        for (r, k) in order.into_iter().enumerate() {
            let g = zero_groups[k];
            let size = groups.scale_sizes()[g] as f64;
            let radius = self.lambda * b * spec.weights.w[active + r] * size.sqrt();
            let norm = block_norms[k] * size.sqrt();
            if norm > radius {
                let scale = if norm > 0.0 { radius / norm } else { 0.0 };
                for &i in groups.members(g) {
                    u[i] *= scale;
                }
            }
        }
        u
    }
}

/// Minimizes `f + lambda * J` over all variables.
pub fn fit(
    dataset: &Dataset,
    penalty: &PenaltySpec,
    lambda: f64,
    init: &[f64],
    config: &SolverConfig,
) -> Result<FitResult> {
    check_inputs(dataset, penalty, lambda, init, config)?;
    let smooth = Smooth::new(Cow::Borrowed(dataset.x()), dataset.y().view(), dataset.loss());
    solve(&smooth, penalty, lambda, init, config)
}

/// Minimizes `f + lambda * J` over the variables in `vars`, with every other
/// coefficient fixed at zero.
pub fn fit_restricted(
    dataset: &Dataset,
    penalty: &PenaltySpec,
    lambda: f64,
    vars: &[usize],
    init: &[f64],
    config: &SolverConfig,
) -> Result<FitResult> {
    check_inputs(dataset, penalty, lambda, init, config)?;
    let p = dataset.p();
    let mut vars = vars.to_vec();
    vars.sort_unstable();
    vars.dedup();
    if vars.last().is_some_and(|&v| v >= p) {
        return invalid("fitting set index out of range");
    }
    if vars.is_empty() {
        let smooth = Smooth::new(Cow::Borrowed(dataset.x()), dataset.y().view(), dataset.loss());
        let objective = smooth.value(&Array1::zeros(dataset.n()));
        return Ok(FitResult {
            beta: Coefficients::new(vec![0.0; p], lambda)?,
            iterations: 0,
            converged: true,
            objective,
        });
    }
    if vars.len() == p {
        return fit(dataset, penalty, lambda, init, config);
    }

    let (mut sub_spec, restriction) = penalty.restrict(&vars)?;
    if config.weight_restriction == WeightRestriction::RankPreserving {
        sub_spec.weights = rank_preserving_weights(dataset, penalty, init, &restriction.vars, &restriction.group_ids)?;
    }
    if !is_nonincreasing(&sub_spec.weights.v, 1e-12) || !is_nonincreasing(&sub_spec.weights.w, 1e-12) {
        return Err(Error::NumericalFailure("restricted weights lost their ordering".into()));
    }

    let n = dataset.n();
    let mut sub_x = Array2::<f64>::zeros((n, vars.len()).f());
    for (k, &j) in vars.iter().enumerate() {
        sub_x.column_mut(k).assign(&dataset.x().column(j));
    }
    let smooth = Smooth::new(Cow::Owned(sub_x), dataset.y().view(), dataset.loss());
    let sub_init: Vec<f64> = vars.iter().map(|&j| init[j]).collect();
    let res = solve(&smooth, &sub_spec, lambda, &sub_init, config)?;
    let mut beta = vec![0.0; p];
    for (k, &j) in vars.iter().enumerate() {
        beta[j] = res.beta.beta[k];
    }
    Ok(FitResult {
        beta: Coefficients::new(beta, lambda)?,
        ..res
    })
}

fn rank_preserving_weights(
    dataset: &Dataset,
    penalty: &PenaltySpec,
    init: &[f64],
    vars: &[usize],
    group_ids: &[usize],
) -> Result<PenaltyWeights> {
    let (_, grad) = loss_and_grad(dataset, init)?;
    let mut keep = vec![false; grad.len()];
    for &i in vars {
        keep[i] = true;
    }
    let v = argsort_abs_desc(&grad)
        .into_iter()
        .enumerate()
        .filter(|(_, i)| keep[*i])
        .map(|(r, _)| penalty.weights.v[r])
        .collect();
    let reduced = group_reduce_unchecked(&grad, &penalty.groups, -0.5);
    let mut keep_g = vec![false; reduced.len()];
    for &g in group_ids {
        keep_g[g] = true;
    }
    let w = argsort_desc(&reduced)
        .into_iter()
        .enumerate()
        .filter(|(_, g)| keep_g[*g])
        .map(|(r, _)| penalty.weights.w[r])
        .collect();
    Ok(PenaltyWeights { v, w })
}

fn check_inputs(
    dataset: &Dataset,
    penalty: &PenaltySpec,
    lambda: f64,
    init: &[f64],
    config: &SolverConfig,
) -> Result<()> {
    config.validate()?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return invalid("lambda must be finite and nonnegative");
    }
    if init.len() != dataset.p() || penalty.num_vars() != dataset.p() {
        return invalid("starting point and penalty must match the number of variables");
    }
    if init.iter().any(|b| !b.is_finite()) {
        return invalid("starting point must be finite");
    }
    Ok(())
}

const DIVERGENCE_RUN: usize = 50;

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn solve(
    smooth: &Smooth,
    spec: &PenaltySpec,
    lambda: f64,
    init: &[f64],
    config: &SolverConfig,
) -> Result<FitResult> {
    let split = Split { spec, lambda };
    let two = split.has_second();
    let mut step = match config.initial_step {
        Some(s) => s,
        None => {
            let l = smooth.lipschitz();
            if l > 0.0 {
                1.0 / l
            } else {
                1.0
            }
        }
    };

    let mut z = init.to_vec();
    let mut eta_z = smooth.eta(&z);
    let mut u = if two {
        split.dual_start(&z, &smooth.grad(&eta_z))
    } else {
        vec![0.0; z.len()]
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut prev_obj = f64::INFINITY;
    let mut rising = 0;
    let mut x = z.clone();

    for it in 1..=config.max_iter {
        let fz = smooth.value(&eta_z);
        let gz = smooth.grad(&eta_z);
        if !fz.is_finite() || gz.iter().any(|g| !g.is_finite()) {
            return Err(Error::NumericalFailure(format!("non-finite loss at iteration {it}")));
        }

        let forward = |step: f64| -> Vec<f64> {
            let y: Vec<f64> = z
                .iter()
                .zip(&u)
                .zip(&gz)
                .map(|((z, u), g)| z - step * (u + g))
                .collect();
            split.prox_first(&y, step)
        };
        x = forward(step);
        let mut incr: Vec<f64> = x.iter().zip(&z).map(|(x, z)| x - z).collect();
        let mut ni = norm2(&incr);
        let mut eta_x = smooth.eta(&x);
        let mut fx = smooth.value(&eta_x);
        if ni > 0.0 {
            for _ in 0..config.max_backtrack {
                let lin: f64 = gz.iter().zip(&incr).map(|(g, d)| g * d).sum();
                let bound = fz + lin + ni * ni / (2.0 * step);
                if fx - bound <= 4.0 * f64::EPSILON * fz.abs().max(1.0) {
                    break;
                }
                step *= config.backtrack_factor;
                x = forward(step);
                incr = x.iter().zip(&z).map(|(x, z)| x - z).collect();
                ni = norm2(&incr);
                eta_x = smooth.eta(&x);
                fx = smooth.value(&eta_x);
            }
        }

        let obj = fx + split.value(&x);
        if !obj.is_finite() {
            return Err(Error::NumericalFailure(format!("non-finite objective at iteration {it}")));
        }
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, x.clone()));
        }
        if obj > prev_obj + 1e-10 * prev_obj.abs().max(1.0) {
            rising += 1;
            if rising >= DIVERGENCE_RUN {
                return Err(Error::NumericalFailure(format!(
                    "objective increased for {DIVERGENCE_RUN} consecutive steps"
                )));
            }
        } else {
            rising = 0;
        }
        prev_obj = obj;

        if ni <= config.tol {
            return Ok(FitResult {
                objective: obj,
                beta: Coefficients::new(x, lambda)?,
                iterations: it,
                converged: true,
            });
        }

        if two {
            let y: Vec<f64> = x.iter().zip(&u).map(|(x, u)| x + step * u).collect();
            z = split.prox_second(&y, step);
            for ((u, x), z) in u.iter_mut().zip(&x).zip(&z) {
                *u += (x - z) / step;
            }
            eta_z = smooth.eta(&z);
        } else {
            z.clone_from(&x);
            eta_z = eta_x;
        }
    }

    let (objective, beta) = best.unwrap_or((f64::INFINITY, x));
    log::debug!("solver stopped at max_iter={} without converging", config.max_iter);
    Ok(FitResult {
        beta: Coefficients::new(beta, lambda)?,
        iterations: config.max_iter,
        converged: false,
        objective,
    })
}
