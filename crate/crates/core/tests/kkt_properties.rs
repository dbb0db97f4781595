//! Soundness, completeness and idempotence of the optimality checks.

use slope_screen::kkt::{gslope_kkt_check, sgs_kkt_check, KktReport};
use slope_screen::path::{path_start, penalty_for_method, Method};
use slope_screen::screening::ACTIVE_THRESHOLD;
use slope_screen::solver::{fit, fit_restricted, loss_and_grad, SolverConfig};
use slope_screen::synth::{generate, SynthConfig};
use slope_screen::weights::WeightConfig;
use slope_screen::{Dataset, Loss, PenaltyKind, PenaltySpec};

fn check(spec: &PenaltySpec, ds: &Dataset, beta: &[f64], lambda: f64) -> KktReport {
    let (_, g) = loss_and_grad(ds, beta).unwrap();
    let w = &spec.weights;
    match spec.kind {
        PenaltyKind::Gslope => gslope_kkt_check(&g, beta, lambda, &w.w, &spec.groups),
        _ => sgs_kkt_check(&g, beta, lambda, spec.alpha, &w.v, &w.w, &spec.groups),
    }
}

struct Case {
    ds: Dataset,
    spec: PenaltySpec,
    lambda: f64,
}

fn case(seed: u64) -> Case {
    let model = if seed % 3 == 2 { Loss::Logistic } else { Loss::Linear };
    let method = if seed.is_multiple_of(2) { Method::Gslope } else { Method::Sgs };
    let cfg = SynthConfig {
        n: 60,
        p: 40,
        rho: [0.0, 0.3, 0.6][(seed % 3) as usize],
        group_size_min: 2,
        group_size_max: 6,
        model,
        seed,
        ..SynthConfig::default()
    };
    let s = generate(&cfg).unwrap();
    let ds = s.dataset().unwrap();
    let spec = penalty_for_method(method, &ds, &s.groups, &WeightConfig::default(), None).unwrap();
    let start = path_start(&ds, &spec).unwrap();
    let lambda = start * [0.5, 0.3, 0.15][(seed % 3) as usize];
    Case { ds, spec, lambda }
}

fn solver(tol: f64) -> SolverConfig {
    SolverConfig { tol, max_iter: 200_000, ..SolverConfig::default() }
}

fn group_norm(beta: &[f64], members: &[usize]) -> f64 {
    members.iter().map(|&i| beta[i] * beta[i]).sum::<f64>().sqrt()
}

#[test]
fn unscreened_solutions_pass() {
    for seed in 0..60 {
        let c = case(seed);
        let res = fit(&c.ds, &c.spec, c.lambda, &vec![0.0; c.ds.p()], &solver(1e-7)).unwrap();
        assert!(res.converged, "seed {seed}: solver did not converge");
        let rep = check(&c.spec, &c.ds, &res.beta.beta, c.lambda);
        assert!(rep.is_clean(), "seed {seed}: {rep:?}");
    }
}

#[test]
fn planted_violations_are_flagged_and_corrected() {
    let mut trials = 0;
    let mut seed = 100;
    while trials < 100 {
        let c = case(seed);
        seed += 1;
        let p = c.ds.p();
        let full = fit(&c.ds, &c.spec, c.lambda, &vec![0.0; p], &solver(1e-9)).unwrap();
        let groups = &c.spec.groups;
        for g in 0..groups.num_groups() {
            if group_norm(&full.beta.beta, groups.members(g)) <= 10.0 * ACTIVE_THRESHOLD {
                continue;
            }
            trials += 1;
            let kept: Vec<usize> = (0..p).filter(|&i| groups.group_of(i) != g).collect();
            let planted = fit_restricted(&c.ds, &c.spec, c.lambda, &kept, &full.beta.beta, &solver(1e-9)).unwrap();
            let rep = check(&c.spec, &c.ds, &planted.beta.beta, c.lambda);
            assert!(!rep.is_clean(), "seed {} group {g}: planted violation missed", seed - 1);

            let mut fitting = kept.clone();
            fitting.extend(&rep.violating_variables);
            fitting.extend(groups.vars_of_groups(&rep.violating_groups));
            fitting.sort_unstable();
            fitting.dedup();
            let fixed = fit_restricted(&c.ds, &c.spec, c.lambda, &fitting, &planted.beta.beta, &solver(1e-9)).unwrap();
            let again = check(&c.spec, &c.ds, &fixed.beta.beta, c.lambda);
            assert!(again.is_clean(), "seed {} group {g}: violation survives refit: {again:?}", seed - 1);
        }
    }
}
