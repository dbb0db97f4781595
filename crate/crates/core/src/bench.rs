//! Screened-versus-unscreened benchmark over a grid of dimensions and
//! correlations.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{compare_paths, fit_path_full, fit_path_screened, penalty_for_method, Method, PathConfig};
use crate::solver::SolverConfig;
use crate::synth::{generate, SynthConfig};
use crate::weights::WeightConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub ps: Vec<usize>,
    pub rhos: Vec<f64>,
    pub reps: usize,
    pub synth: SynthConfig,
    pub path: PathConfig,
    pub solver: SolverConfig,
    pub weights: WeightConfig,
    pub jobs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            methods: vec![Method::Gslope, Method::Sgs],
            ps: vec![200, 400],
            rhos: vec![0.0, 0.3, 0.6, 0.9],
            reps: 3,
            synth: SynthConfig::default(),
            path: PathConfig::default(),
            solver: SolverConfig::default(),
            weights: WeightConfig::default(),
            jobs: 1,
        }
    }
}

/// Metrics of one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepResult {
    pub method: Method,
    pub p: usize,
    pub rho: f64,
    pub seed: u64,
    pub runtime_screen: f64,
    pub runtime_no_screen: f64,
    pub card_a_g: f64,
    pub card_s_g: f64,
    pub card_e_g: f64,
    pub card_k_g: f64,
    pub card_e_v_frac: f64,
    pub iters_screen: f64,
    pub iters_no_screen: f64,
    pub l2_dist: f64,
}

/// Mean and standard error of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let se = if xs.len() > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Self { mean, se }
    }
}

pub const METRICS: [&str; 10] = [
    "runtime_screen",
    "runtime_no_screen",
    "card_A_g",
    "card_S_g",
    "card_E_g",
    "card_K_g",
    "card_E_v_frac",
    "iters_screen",
    "iters_no_screen",
    "l2_dist",
];

fn metric_values(r: &RepResult) -> [f64; 10] {
    [
        r.runtime_screen,
        r.runtime_no_screen,
        r.card_a_g,
        r.card_s_g,
        r.card_e_g,
        r.card_k_g,
        r.card_e_v_frac,
        r.iters_screen,
        r.iters_no_screen,
        r.l2_dist,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub method: Method,
    pub p: usize,
    pub rho: f64,
    pub reps: usize,
    pub metrics: Vec<MeanSe>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema: u32,
    pub config: BenchConfig,
    pub cases: Vec<CaseSummary>,
    pub reps: Vec<RepResult>,
}

fn run_rep(cfg: &BenchConfig, method: Method, p: usize, rho: f64, seed: u64) -> Result<RepResult> {
    let synth = SynthConfig { p, rho, seed, ..cfg.synth.clone() };
    let data = generate(&synth)?;
    let ds = data.dataset()?;
    let spec = penalty_for_method(method, &ds, &data.groups, &cfg.weights, None)?;
    let path = PathConfig { method, ..cfg.path.clone() };
    let screened = fit_path_screened(&ds, &spec, &path, &cfg.solver)?;
    let full = fit_path_full(&ds, &spec, &path, &cfg.solver)?;
    let cmp = compare_paths(&screened, &full)?;
    // The first point is never screened, so set sizes average over the rest.
    let rest = &screened.metrics[1..];
    let avg = |f: &dyn Fn(&crate::path::PointMetrics) -> usize| {
        rest.iter().map(|m| f(m) as f64).sum::<f64>() / rest.len() as f64
    };
    Ok(RepResult {
        method,
        p,
        rho,
        seed,
        runtime_screen: screened.total_seconds(),
        runtime_no_screen: full.total_seconds(),
        card_a_g: avg(&|m| m.card_a_g),
        card_s_g: avg(&|m| m.card_s_g),
        card_e_g: avg(&|m| m.card_e_g),
        card_k_g: avg(&|m| m.card_k_g),
        card_e_v_frac: avg(&|m| m.card_e_v) / p as f64,
        iters_screen: cmp.iterations_a as f64,
        iters_no_screen: cmp.iterations_b as f64,
        l2_dist: cmp.max_distance,
    })
}

/// Runs every (method, p, rho, repetition) cell and aggregates per case.
///
/// Repetition `r` of the `c`-th (p, rho) pair uses seed
/// `base + c * reps + r`, shared across methods. Results are merged in task
/// order, so the report does not depend on `jobs`.
pub fn run(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.reps == 0 || cfg.ps.is_empty() || cfg.rhos.is_empty() || cfg.methods.is_empty() {
        return Err(Error::InvalidArgument("benchmark grid is empty".into()));
    }
    let mut tasks = Vec::new();
    for &method in &cfg.methods {
        let mut c = 0u64;
        for &p in &cfg.ps {
            for &rho in &cfg.rhos {
                for r in 0..cfg.reps as u64 {
                    let seed = cfg.synth.seed.wrapping_add(c * cfg.reps as u64 + r);
                    tasks.push((method, p, rho, seed));
                }
                c += 1;
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::Configuration(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<RepResult>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(method, p, rho, seed)| run_rep(cfg, method, p, rho, seed))
            .collect()
    });
    let reps: Vec<RepResult> = results.into_iter().collect::<Result<_>>()?;

    let mut cases = Vec::new();
    for chunk in reps.chunks(cfg.reps) {
        let first = &chunk[0];
        let metrics = (0..METRICS.len())
            .map(|k| MeanSe::of(&chunk.iter().map(|r| metric_values(r)[k]).collect::<Vec<_>>()))
            .collect();
        cases.push(CaseSummary {
            method: first.method,
            p: first.p,
            rho: first.rho,
            reps: chunk.len(),
            metrics,
        });
    }
    Ok(BenchReport {
        schema: crate::path::SCHEMA_VERSION,
        config: cfg.clone(),
        cases,
        reps,
    })
}

/// Writes one row per case with `<metric>_mean` and `<metric>_se` columns.
pub fn write_summary_csv(report: &BenchReport, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["method".to_string(), "p".into(), "rho".into(), "reps".into()];
    for m in METRICS {
        header.push(format!("{m}_mean"));
        header.push(format!("{m}_se"));
    }
    out.write_record(&header)?;
    for c in &report.cases {
        let mut row = vec![
            serde_json::to_value(c.method)?.as_str().unwrap_or_default().to_string(),
            c.p.to_string(),
            c.rho.to_string(),
            c.reps.to_string(),
        ];
        for m in &c.metrics {
            row.push(format!("{:.6e}", m.mean));
            row.push(format!("{:.6e}", m.se));
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> BenchConfig {
        BenchConfig {
            methods: vec![Method::Gslope, Method::Sgs],
            ps: vec![40],
            rhos: vec![0.0, 0.5],
            reps: 2,
            synth: SynthConfig { n: 30, ..SynthConfig::default() },
            path: PathConfig { length: 5, ..PathConfig::default() },
            ..BenchConfig::default()
        }
    }

    #[test]
    fn mean_se() {
        let s = MeanSe::of(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.se - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(MeanSe::of(&[4.0]).se, 0.0);
    }

    #[test]
    fn merge_is_independent_of_jobs() {
        let a = run(&tiny()).unwrap();
        let b = run(&BenchConfig { jobs: 3, ..tiny() }).unwrap();
        assert_eq!(a.cases.len(), 4);
        let strip = |r: &BenchReport| -> Vec<(u64, f64, f64)> {
            r.reps.iter().map(|x| (x.seed, x.l2_dist, x.card_e_g)).collect()
        };
        assert_eq!(strip(&a), strip(&b));
        // gSLOPE and SGS share data seeds for the same case.
        assert_eq!(a.reps[0].seed, a.reps[4].seed);

        let mut buf = Vec::new();
        write_summary_csv(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("method,p,rho,reps,runtime_screen_mean,runtime_screen_se,"));
        assert_eq!(text.lines().count(), 5);
    }
}
