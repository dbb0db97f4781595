//! Regularization paths with and without screening.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::groups::{group_reduce_unchecked, GroupStructure};
use crate::kkt::{gslope_kkt_check, sgs_kkt_check, slope_kkt_check, KktReport};
use crate::penalty::{PenaltyKind, PenaltySpec};
use crate::screening::{
    active_sets, gslope_lambda_max, gslope_screen, sgs_group_screen, sgs_lambda_max,
    sgs_variable_screen, slope_lambda_max, slope_screen,
};
use crate::solver::{fit, fit_restricted, loss_and_grad, SolverConfig};
use crate::weights::{self, oscar_default_sigma1, oscar_weights, PenaltyWeights, Scheme, WeightConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Slope,
    Gslope,
    Sgs,
    Goscar,
    Sgo,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "slope" => Method::Slope,
            "gslope" => Method::Gslope,
            "sgs" => Method::Sgs,
            "goscar" => Method::Goscar,
            "sgo" => Method::Sgo,
            other => return Err(format!("unknown method '{other}'")),
        })
    }
}

impl Method {
    pub fn kind(self) -> PenaltyKind {
        match self {
            Method::Slope => PenaltyKind::Slope,
            Method::Gslope | Method::Goscar => PenaltyKind::Gslope,
            Method::Sgs | Method::Sgo => PenaltyKind::Sgs,
        }
    }
}

/// Builds the penalty a method uses on `dataset`.
///
/// FDR-calibrated methods take their weights from `config`; the OSCAR methods
/// use linear-decay weights with `sigma1` defaulting to `e^{-2} ||X^T y||_inf`.
pub fn penalty_for_method(
    method: Method,
    dataset: &Dataset,
    groups: &GroupStructure,
    config: &WeightConfig,
    sigma1: Option<f64>,
) -> Result<PenaltySpec> {
    if groups.num_vars() != dataset.p() {
        return invalid("group structure does not cover the design's columns");
    }
    let (p, m) = (groups.num_vars(), groups.num_groups());
    let oscar = || -> Result<PenaltyWeights> {
        let s1 = match sigma1 {
            Some(s) => s,
            None => {
                let (_, g0) = loss_and_grad(dataset, &vec![0.0; p])?;
                oscar_default_sigma1(g0.iter().fold(0.0f64, |a, g| a.max(g.abs())))
            }
        };
        oscar_weights(p, m, s1)
    };
    match method {
        Method::Slope => {
            let cfg = WeightConfig { scheme: Scheme::SlopeBh, ..config.clone() };
            PenaltySpec::slope(weights::generate(groups, &cfg)?.v)
        }
        Method::Gslope => {
            let scheme = match config.scheme {
                Scheme::GslopeMax => Scheme::GslopeMax,
                _ => Scheme::GslopeMean,
            };
            let cfg = WeightConfig { scheme, ..config.clone() };
            PenaltySpec::gslope(weights::generate(groups, &cfg)?.w, groups.clone())
        }
        Method::Sgs => {
            let scheme = match config.scheme {
                Scheme::SgsMax => Scheme::SgsMax,
                _ => Scheme::SgsMean,
            };
            let cfg = WeightConfig { scheme, ..config.clone() };
            PenaltySpec::sgs(weights::generate(groups, &cfg)?, config.alpha, groups.clone())
        }
        Method::Goscar => PenaltySpec::gslope(oscar()?.w, groups.clone()),
        Method::Sgo => PenaltySpec::sgs(oscar()?, config.alpha, groups.clone()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub length: usize,
    pub terminal_ratio: f64,
    pub method: Method,
    pub screen: bool,
    pub kkt_max_rounds: usize,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            length: 50,
            terminal_ratio: 0.05,
            method: Method::Sgs,
            screen: true,
            kkt_max_rounds: 10,
        }
    }
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        if self.length < 2 {
            return invalid("a path needs at least two points");
        }
        if !(self.terminal_ratio > 0.0 && self.terminal_ratio < 1.0) {
            return invalid("terminal ratio must lie in (0, 1)");
        }
        Ok(())
    }
}

/// `lambda_k = lambda1 * ratio^{(k-1)/(l-1)}`.
pub fn lambda_path(lambda1: f64, length: usize, terminal_ratio: f64) -> Result<Vec<f64>> {
    if !(lambda1 > 0.0 && lambda1.is_finite()) {
        return invalid("path start must be positive");
    }
    if length < 2 {
        return invalid("a path needs at least two points");
    }
    if !(terminal_ratio > 0.0 && terminal_ratio < 1.0) {
        return invalid("terminal ratio must lie in (0, 1)");
    }
    let last = (length - 1) as f64;
    Ok((0..length)
        .map(|k| {
            if k == 0 {
                lambda1
            } else if k == length - 1 {
                lambda1 * terminal_ratio
            } else {
                lambda1 * terminal_ratio.powf(k as f64 / last)
            }
        })
        .collect())
}

/// Per-point bookkeeping.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointMetrics {
    pub k: usize,
    pub lambda: f64,
    pub card_a_g: usize,
    pub card_s_g: usize,
    pub card_e_g: usize,
    pub card_k_g: usize,
    pub card_a_v: usize,
    pub card_s_v: usize,
    pub card_e_v: usize,
    pub card_k_v: usize,
    /// Variables in the screened groups, i.e. what group-only screening keeps.
    pub card_s_g_vars: usize,
    pub iters: usize,
    pub seconds: f64,
    pub converged: bool,
    pub kkt_rounds: usize,
    /// The KKT loop did not settle and the point was refit without screening.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub method: Method,
    pub screened: bool,
    pub lambdas: Vec<f64>,
    pub betas: Vec<Vec<f64>>,
    /// Final fitting set of each point.
    pub fitting_sets: Vec<Vec<usize>>,
    pub metrics: Vec<PointMetrics>,
}

impl PathResult {
    pub fn total_seconds(&self) -> f64 {
        self.metrics.iter().map(|m| m.seconds).sum()
    }

    pub fn total_iterations(&self) -> usize {
        self.metrics.iter().map(|m| m.iters).sum()
    }
}

/// Smallest `lambda` with an all-zero solution.
pub fn path_start(dataset: &Dataset, penalty: &PenaltySpec) -> Result<f64> {
    let (_, g0) = loss_and_grad(dataset, &vec![0.0; dataset.p()])?;
    let w = &penalty.weights;
    match penalty.kind {
        PenaltyKind::Slope => slope_lambda_max(&g0, &w.v),
        PenaltyKind::Gslope => gslope_lambda_max(&g0, &w.w, &penalty.groups),
        PenaltyKind::Sgs => sgs_lambda_max(&g0, &w.v, &w.w, penalty.alpha, &penalty.groups),
    }
}

/// Runs the screened or the unscreened path according to `config.screen`.
pub fn fit_path(
    dataset: &Dataset,
    penalty: &PenaltySpec,
    config: &PathConfig,
    solver: &SolverConfig,
) -> Result<PathResult> {
    if config.screen {
        fit_path_screened(dataset, penalty, config, solver)
    } else {
        fit_path_full(dataset, penalty, config, solver)
    }
}

fn lambdas_for(dataset: &Dataset, penalty: &PenaltySpec, config: &PathConfig) -> Result<Vec<f64>> {
    config.validate()?;
    if penalty.num_vars() != dataset.p() {
        return invalid("penalty does not match the design");
    }
    let l1 = path_start(dataset, penalty)?;
    if l1 <= 0.0 {
        return invalid("the gradient at zero vanishes; the path is degenerate");
    }
    lambda_path(l1, config.length, config.terminal_ratio)
}

fn point_metrics(k: usize, lambda: f64, beta: &[f64], groups: &GroupStructure) -> PointMetrics {
    let (av, ag) = active_sets(beta, groups);
    PointMetrics {
        k,
        lambda,
        card_a_v: av.len(),
        card_a_g: ag.len(),
        ..PointMetrics::default()
    }
}

/// Unscreened path: every point is a full fit warm-started from the previous one.
pub fn fit_path_full(
    dataset: &Dataset,
    penalty: &PenaltySpec,
    config: &PathConfig,
    solver: &SolverConfig,
) -> Result<PathResult> {
    let lambdas = lambdas_for(dataset, penalty, config)?;
    let (p, m) = (dataset.p(), penalty.groups.num_groups());
    let all: Vec<usize> = (0..p).collect();
    let mut beta = vec![0.0; p];
    let mut out = PathResult {
        method: config.method,
        screened: false,
        lambdas: lambdas.clone(),
        betas: Vec::with_capacity(lambdas.len()),
        fitting_sets: Vec::with_capacity(lambdas.len()),
        metrics: Vec::with_capacity(lambdas.len()),
    };
    for (k, &lambda) in lambdas.iter().enumerate() {
        let start = Instant::now();
        let res = fit(dataset, penalty, lambda, &beta, solver)?;
        let seconds = start.elapsed().as_secs_f64();
        beta = res.beta.beta;
        let mut met = point_metrics(k, lambda, &beta, &penalty.groups);
        met.card_s_g = m;
        met.card_e_g = m;
        met.card_s_v = p;
        met.card_e_v = p;
        met.card_s_g_vars = p;
        met.iters = res.iterations;
        met.seconds = seconds;
        met.converged = res.converged;
        log::info!("point {k}: lambda={lambda:.6e} active={} iters={}", met.card_a_v, met.iters);
        out.metrics.push(met);
        out.betas.push(beta.clone());
        out.fitting_sets.push(all.clone());
    }
    Ok(out)
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn kkt_report(penalty: &PenaltySpec, grad: &[f64], beta: &[f64], lambda: f64) -> KktReport {
    let w = &penalty.weights;
    match penalty.kind {
        PenaltyKind::Slope => slope_kkt_check(grad, beta, lambda, &w.v),
        PenaltyKind::Gslope => gslope_kkt_check(grad, beta, lambda, &w.w, &penalty.groups),
        PenaltyKind::Sgs if penalty.alpha == 1.0 => slope_kkt_check(grad, beta, lambda, &w.v),
        PenaltyKind::Sgs => {
            sgs_kkt_check(grad, beta, lambda, penalty.alpha, &w.v, &w.w, &penalty.groups)
        }
    }
}

/// Screened groups and variables for the step `lambda_k -> lambda_next`.
fn screen_step(
    penalty: &PenaltySpec,
    grad: &[f64],
    beta: &[f64],
    lambda_k: f64,
    lambda_next: f64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let groups = &penalty.groups;
    let w = &penalty.weights;
    let slope_like = penalty.kind == PenaltyKind::Slope
        || (penalty.kind == PenaltyKind::Sgs && penalty.alpha == 1.0);
    if slope_like {
        let sv = slope_screen(grad, &w.v, lambda_k, lambda_next)?;
        return Ok((groups.groups_of_vars(&sv), sv));
    }
    match penalty.kind {
        PenaltyKind::Gslope => {
            let h = group_reduce_unchecked(grad, groups, -0.5);
            let sg = gslope_screen(&h, &w.w, lambda_k, lambda_next, groups)?;
            let sv = groups.vars_of_groups(&sg);
            Ok((sg, sv))
        }
        _ => {
            let a = penalty.alpha;
            let sg = sgs_group_screen(grad, beta, &w.v, &w.w, a, lambda_k, lambda_next, groups)?;
            let sv = sgs_variable_screen(grad, &w.v, a, lambda_k, lambda_next, &sg, groups)?;
            Ok((sg, sv))
        }
    }
}

/// Screened path: strong rules pick a fitting set before each fit, and KKT
/// checks on the full problem add back any wrongly discarded variables.
pub fn fit_path_screened(
    dataset: &Dataset,
    penalty: &PenaltySpec,
    config: &PathConfig,
    solver: &SolverConfig,
) -> Result<PathResult> {
    let lambdas = lambdas_for(dataset, penalty, config)?;
    let groups = &penalty.groups;
    let (p, m) = (dataset.p(), groups.num_groups());
    let all: Vec<usize> = (0..p).collect();
    let mut out = PathResult {
        method: config.method,
        screened: true,
        lambdas: lambdas.clone(),
        betas: Vec::with_capacity(lambdas.len()),
        fitting_sets: Vec::with_capacity(lambdas.len()),
        metrics: Vec::with_capacity(lambdas.len()),
    };

    // The first point is fitted without screening.
    let start = Instant::now();
    let res = fit(dataset, penalty, lambdas[0], &vec![0.0; p], solver)?;
    let (_, mut grad) = loss_and_grad(dataset, &res.beta.beta)?;
    let mut beta = res.beta.beta;
    let mut met = point_metrics(0, lambdas[0], &beta, groups);
    met.card_s_g = m;
    met.card_e_g = m;
    met.card_s_v = p;
    met.card_e_v = p;
    met.card_s_g_vars = p;
    met.iters = res.iterations;
    met.converged = res.converged;
    met.seconds = start.elapsed().as_secs_f64();
    out.metrics.push(met);
    out.betas.push(beta.clone());
    out.fitting_sets.push(all.clone());

    for k in 1..lambdas.len() {
        let (lambda_k, lambda) = (lambdas[k - 1], lambdas[k]);
        let start = Instant::now();
        let (active_v, _) = active_sets(&beta, groups);
        let (sg, sv) = screen_step(penalty, &grad, &beta, lambda_k, lambda)?;
        let mut fitting = union(&sv, &active_v);

        let mut iters = 0;
        let mut rounds = 0;
        let mut first_k = (0, 0);
        let mut fallback = false;
        let mut next;
        loop {
            let res = fit_restricted(dataset, penalty, lambda, &fitting, &beta, solver)?;
            iters += res.iterations;
            let (_, g) = loss_and_grad(dataset, &res.beta.beta)?;
            let report = kkt_report(penalty, &g, &res.beta.beta, lambda);
            if rounds == 0 {
                first_k = (report.violating_groups.len(), report.violating_variables.len());
            }
            next = (res, g);
            if report.is_clean() {
                break;
            }
            let grown = union(&fitting, &report.violating_variables);
            rounds += 1;
            if grown.len() == fitting.len() || rounds >= config.kkt_max_rounds {
                log::warn!("point {k}: KKT loop did not settle after {rounds} rounds; refitting without screening");
                let res = fit(dataset, penalty, lambda, &beta, solver)?;
                iters += res.iterations;
                let (_, g) = loss_and_grad(dataset, &res.beta.beta)?;
                next = (res, g);
                fitting = all.clone();
                fallback = true;
                break;
            }
            log::debug!("point {k}: round {rounds} adds {} variables", grown.len() - fitting.len());
            fitting = grown;
        }
        let (res, g) = next;
        let seconds = start.elapsed().as_secs_f64();

        let mut met = point_metrics(k, lambda, &res.beta.beta, groups);
        met.card_s_g = sg.len();
        met.card_s_v = sv.len();
        met.card_s_g_vars = groups.vars_of_groups(&sg).len();
        met.card_e_v = fitting.len();
        met.card_e_g = groups.groups_of_vars(&fitting).len();
        met.card_k_g = first_k.0;
        met.card_k_v = first_k.1;
        met.iters = iters;
        met.seconds = seconds;
        met.converged = res.converged;
        met.kkt_rounds = rounds;
        met.fallback = fallback;
        log::info!(
            "point {k}: lambda={lambda:.6e} |E|={} active={} kkt_rounds={rounds}",
            met.card_e_v,
            met.card_a_v
        );
        out.metrics.push(met);
        beta = res.beta.beta;
        grad = g;
        out.betas.push(beta.clone());
        out.fitting_sets.push(fitting);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub distances: Vec<f64>,
    pub max_distance: f64,
    /// Points where the first path's fitting set misses an active variable of
    /// the second.
    pub superset_failures: usize,
    pub runtime_ratio: f64,
    pub iterations_a: usize,
    pub iterations_b: usize,
}

/// Compares two paths fitted on the same lambda sequence.
pub fn compare_paths(a: &PathResult, b: &PathResult) -> Result<ComparisonReport> {
    if a.lambdas.len() != b.lambdas.len()
        || a.lambdas
            .iter()
            .zip(&b.lambdas)
            .any(|(x, y)| (x - y).abs() > 1e-12 * x.abs().max(1.0))
    {
        return invalid("paths were fitted on different lambda sequences");
    }
    if a.betas.len() != b.betas.len() || a.betas.iter().zip(&b.betas).any(|(x, y)| x.len() != y.len()) {
        return invalid("paths have different dimensions");
    }
    let distances: Vec<f64> = a
        .betas
        .iter()
        .zip(&b.betas)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt())
        .collect();
    let max_distance = distances.iter().copied().fold(0.0, f64::max);
    let superset_failures = a
        .fitting_sets
        .iter()
        .zip(&b.betas)
        .filter(|(e, beta)| {
            beta.iter()
                .enumerate()
                .any(|(i, v)| v.abs() > crate::screening::ACTIVE_THRESHOLD && e.binary_search(&i).is_err())
        })
        .count();
    let (ta, tb) = (a.total_seconds(), b.total_seconds());
    let runtime_ratio = if ta == tb { 1.0 } else { ta / tb };
    Ok(ComparisonReport {
        distances,
        max_distance,
        superset_failures,
        runtime_ratio,
        iterations_a: a.total_iterations(),
        iterations_b: b.total_iterations(),
    })
}

/// JSON document wrapping a path result with the configuration that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathDocument {
    pub schema: u32,
    pub path_config: PathConfig,
    pub solver_config: SolverConfig,
    pub alpha: f64,
    pub result: PathResult,
}

impl PathDocument {
    pub fn new(path_config: PathConfig, solver_config: SolverConfig, alpha: f64, result: PathResult) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            path_config,
            solver_config,
            alpha,
            result,
        }
    }

    pub fn to_writer(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn from_reader(r: impl std::io::Read) -> Result<Self> {
        let doc: Self = serde_json::from_reader(r)?;
        if doc.schema != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                doc.schema
            )));
        }
        Ok(doc)
    }
}

/// Writes the per-point metrics table with a header row.
pub fn write_metrics_csv(result: &PathResult, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "k", "lambda", "card_A_g", "card_S_g", "card_E_g", "card_K_g", "card_A_v", "card_S_v",
        "card_E_v", "card_K_v", "iters", "seconds", "converged",
    ])?;
    for m in &result.metrics {
        out.write_record([
            m.k.to_string(),
            format!("{:e}", m.lambda),
            m.card_a_g.to_string(),
            m.card_s_g.to_string(),
            m.card_e_g.to_string(),
            m.card_k_g.to_string(),
            m.card_a_v.to_string(),
            m.card_s_v.to_string(),
            m.card_e_v.to_string(),
            m.card_k_v.to_string(),
            m.iters.to_string(),
            format!("{:.6}", m.seconds),
            m.converged.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Loss;
    use approx::assert_abs_diff_eq;
    use ndarray::{Array1, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn geometric_path() {
        let l = lambda_path(1.0, 3, 0.25).unwrap();
        assert_abs_diff_eq!(l[0], 1.0);
        assert_abs_diff_eq!(l[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(l[2], 0.25);
        assert_eq!(lambda_path(2.0, 2, 0.1).unwrap(), vec![2.0, 2.0 * 0.1]);
        let l = lambda_path(3.0, 50, 0.05).unwrap();
        assert_eq!(l[49], 3.0 * 0.05);
        assert!(l.windows(2).all(|w| w[1] < w[0]));
        assert!(lambda_path(0.0, 5, 0.1).is_err());
        assert!(lambda_path(1.0, 1, 0.1).is_err());
    }

    fn problem(seed: u64) -> (Dataset, GroupStructure) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, sizes) = (40, [3usize, 2, 4, 3, 2, 4]);
        let groups = GroupStructure::from_sizes(&sizes).unwrap();
        let p = groups.num_vars();
        let x = Array2::from_shape_fn((n, p), |_| rng.gen_range(-1.0..1.0));
        let beta: Vec<f64> = (0..p).map(|j| if j < 4 { 2.0 } else { 0.0 }).collect();
        let y = Array1::from_shape_fn(n, |i| {
            (0..p).map(|j| x[[i, j]] * beta[j]).sum::<f64>() + rng.gen_range(-0.5..0.5)
        });
        (Dataset::prepare(x, y, Loss::Linear, true, true).unwrap(), groups)
    }

    #[test]
    fn screened_matches_full_on_small_problem() {
        let (ds, groups) = problem(11);
        let solver = SolverConfig {
            tol: 1e-9,
            max_iter: 100_000,
            ..SolverConfig::default()
        };
        for method in [Method::Gslope, Method::Sgs, Method::Slope, Method::Goscar, Method::Sgo] {
            let cfg = PathConfig {
                length: 10,
                method,
                ..PathConfig::default()
            };
            let spec = penalty_for_method(method, &ds, &groups, &WeightConfig::default(), None).unwrap();
            let a = fit_path_screened(&ds, &spec, &cfg, &solver).unwrap();
            let b = fit_path_full(&ds, &spec, &cfg, &solver).unwrap();
            let r = compare_paths(&a, &b).unwrap();
            assert!(r.max_distance <= 1e-4, "{method:?}: {}", r.max_distance);
            assert_eq!(r.superset_failures, 0);
            assert!(b.metrics.iter().all(|m| m.card_e_v == ds.p()));
            assert!(b.betas[0].iter().all(|v| v.abs() <= 1e-6));
            for k in 1..a.betas.len() {
                let (prev, _) = active_sets(&a.betas[k - 1], &groups);
                assert!(prev.iter().all(|i| a.fitting_sets[k].contains(i)));
            }
        }
    }

    #[test]
    fn self_comparison_is_zero() {
        let (ds, groups) = problem(3);
        let spec = penalty_for_method(Method::Gslope, &ds, &groups, &WeightConfig::default(), None).unwrap();
        let cfg = PathConfig {
            length: 5,
            method: Method::Gslope,
            ..PathConfig::default()
        };
        let a = fit_path_full(&ds, &spec, &cfg, &SolverConfig::default()).unwrap();
        let r = compare_paths(&a, &a).unwrap();
        assert_eq!(r.max_distance, 0.0);
        assert_eq!(r.runtime_ratio, 1.0);

        let mut short = a.clone();
        short.lambdas.pop();
        assert!(compare_paths(&a, &short).is_err());
    }

    #[test]
    fn json_round_trip_and_csv_header() {
        let (ds, groups) = problem(5);
        let spec = penalty_for_method(Method::Sgs, &ds, &groups, &WeightConfig::default(), None).unwrap();
        let cfg = PathConfig {
            length: 4,
            ..PathConfig::default()
        };
        let res = fit_path_screened(&ds, &spec, &cfg, &SolverConfig::default()).unwrap();
        let doc = PathDocument::new(cfg, SolverConfig::default(), 0.95, res.clone());
        let mut buf = Vec::new();
        doc.to_writer(&mut buf).unwrap();
        let back = PathDocument::from_reader(buf.as_slice()).unwrap();
        assert_eq!(back.result, res);

        let mut csv = Vec::new();
        write_metrics_csv(&res, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("k,lambda,card_A_g,card_S_g,card_E_g,card_K_g,card_A_v,card_S_v,card_E_v,card_K_v,iters,seconds,converged\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
