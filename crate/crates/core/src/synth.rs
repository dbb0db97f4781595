//! Synthetic grouped regression data.
//!
//! Groups have sizes drawn uniformly from a range; columns within a group are
//! equicorrelated through a shared factor, `x = sqrt(rho) z_g + sqrt(1 - rho) e`.
//! A fraction of groups is active, and inside each a fraction of variables
//! carries a Gaussian signal.

use ndarray::{Array1, Array2};
use rand::seq::index::sample;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Loss};
use crate::dist::normal_quantile;
use crate::error::{invalid, Result};
use crate::groups::GroupStructure;

/// How `fraction * count` is turned into an integer count (never below one).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    #[default]
    Nearest,
    Up,
    Down,
}

impl Rounding {
    fn count(self, fraction: f64, total: usize) -> usize {
        let x = fraction * total as f64;
        let r = match self {
            Rounding::Nearest => x.round(),
            Rounding::Up => x.ceil(),
            Rounding::Down => x.floor(),
        };
        (r as usize).clamp(1, total.max(1))
    }
}

/// Whether the signal parameter is a variance or a standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalScale {
    #[default]
    Variance,
    Sd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub group_size_min: usize,
    pub group_size_max: usize,
    pub active_group_fraction: f64,
    pub active_var_fraction: f64,
    pub signal: f64,
    pub signal_scale: SignalScale,
    pub rounding: Rounding,
    pub model: Loss,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n: 400,
            p: 500,
            rho: 0.6,
            group_size_min: 3,
            group_size_max: 25,
            active_group_fraction: 0.15,
            active_var_fraction: 0.30,
            signal: 5.0,
            signal_scale: SignalScale::Variance,
            rounding: Rounding::Nearest,
            model: Loss::Linear,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return invalid("need at least one observation");
        }
        if !(0.0..1.0).contains(&self.rho) {
            return invalid("rho must lie in [0, 1)");
        }
        if self.group_size_min == 0 || self.group_size_min > self.group_size_max {
            return invalid("group size range must be positive and ordered");
        }
        if self.p < self.group_size_min {
            return invalid(format!(
                "p = {} is below the minimum group size {}",
                self.p, self.group_size_min
            ));
        }
        for f in [self.active_group_fraction, self.active_var_fraction] {
            if !(0.0..=1.0).contains(&f) {
                return invalid("active fractions must lie in [0, 1]");
            }
        }
        if !(self.signal >= 0.0) {
            return invalid("signal scale must be nonnegative");
        }
        Ok(())
    }

    fn signal_sd(&self) -> f64 {
        match self.signal_scale {
            SignalScale::Variance => self.signal.sqrt(),
            SignalScale::Sd => self.signal,
        }
    }
}

/// A generated problem on the raw (unstandardized) scale.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub groups: GroupStructure,
    pub beta: Vec<f64>,
    pub model: Loss,
}

impl Synthetic {
    /// The fitting dataset: standardized columns, with an intercept for the
    /// linear model.
    pub fn dataset(&self) -> Result<Dataset> {
        let intercept = self.model == Loss::Linear;
        Dataset::prepare(self.x.clone(), self.y.clone(), self.model, intercept, true)
    }
}

/// Standard normal draws by inversion of a uniform on the open unit interval.
struct Normals(ChaCha20Rng);

impl Normals {
    fn uniform(&mut self) -> f64 {
        ((self.0.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    fn next(&mut self) -> f64 {
        normal_quantile(self.uniform())
    }
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

pub fn generate(config: &SynthConfig) -> Result<Synthetic> {
    config.validate()?;
    let mut rng = Normals(ChaCha20Rng::seed_from_u64(config.seed));
    let (n, p) = (config.n, config.p);

    let mut sizes = Vec::new();
    let mut total = 0;
    while total < p {
        let s = rng.0.gen_range(config.group_size_min..=config.group_size_max);
        let s = s.min(p - total);
        sizes.push(s);
        total += s;
    }
    let groups = GroupStructure::from_sizes(&sizes)?;
    let m = groups.num_groups();

    let (a, b) = (config.rho.sqrt(), (1.0 - config.rho).sqrt());
    let mut x = Array2::<f64>::zeros((n, p));
    for i in 0..n {
        for g in 0..m {
            let z = rng.next();
            for &j in groups.members(g) {
                x[[i, j]] = a * z + b * rng.next();
            }
        }
    }

    let mut beta = vec![0.0; p];
    let n_active = config.rounding.count(config.active_group_fraction, m);
    let mut active: Vec<usize> = sample(&mut rng.0, m, n_active).into_vec();
    active.sort_unstable();
    let sd = config.signal_sd();
    for g in active {
        let members = groups.members(g);
        let k = config.rounding.count(config.active_var_fraction, members.len());
        let mut picks: Vec<usize> = sample(&mut rng.0, members.len(), k).into_vec();
        picks.sort_unstable();
        for idx in picks {
            beta[members[idx]] = sd * rng.next();
        }
    }

    let mut y = Array1::<f64>::zeros(n);
    for i in 0..n {
        let eta: f64 = x.row(i).iter().zip(&beta).map(|(x, b)| x * b).sum::<f64>() + rng.next();
        y[i] = match config.model {
            Loss::Linear => eta,
            Loss::Logistic => f64::from(rng.uniform() < sigmoid(eta)),
        };
    }

    Ok(Synthetic {
        x,
        y,
        groups,
        beta,
        model: config.model,
    })
}
