//! Design matrices, responses and their preprocessing.

use ndarray::{Array1, Array2, ArrayView1, ShapeBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Loss family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Linear,
    Logistic,
}

impl std::str::FromStr for Loss {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Loss::Linear),
            "logistic" => Ok(Loss::Logistic),
            other => Err(format!("unknown loss '{other}'")),
        }
    }
}

const UNIT_NORM_TOL: f64 = 1e-10;

/// A regression problem: `n x p` design, response and loss.
///
/// The design is stored column-major. For the linear loss with an intercept the
/// columns and the response are centred at construction, which profiles the
/// unpenalized intercept out of the objective.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array1<f64>,
    loss: Loss,
    standardized: bool,
    col_means: Option<Vec<f64>>,
    y_mean: Option<f64>,
    col_scales: Vec<f64>,
    constant_cols: Vec<usize>,
}

impl Dataset {
    /// Wraps `x` and `y` without preprocessing.
    pub fn new(x: Array2<f64>, y: Array1<f64>, loss: Loss) -> Result<Self> {
        Self::prepare(x, y, loss, false, false)
    }

    /// Builds a dataset, optionally centring (linear loss only) and scaling
    /// every non-constant column to unit l2 norm.
    pub fn prepare(
        x: Array2<f64>,
        y: Array1<f64>,
        loss: Loss,
        intercept: bool,
        standardize: bool,
    ) -> Result<Self> {
        let (n, p) = x.dim();
        if n == 0 || p == 0 {
            return invalid("design matrix must be non-empty");
        }
        if y.len() != n {
            return invalid(format!("response has length {} but design has {n} rows", y.len()));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return invalid("design and response must be finite");
        }
        if loss == Loss::Logistic && y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return invalid("logistic responses must be 0 or 1");
        }

        let mut xf = Array2::<f64>::zeros((n, p).f());
        xf.assign(&x);
        let mut y = y;

        let centre = intercept && loss == Loss::Linear;
        let mut col_means = None;
        let mut y_mean = None;
        if centre {
            let means: Vec<f64> = xf.columns().into_iter().map(|c| c.sum() / n as f64).collect();
            for (mut col, m) in xf.columns_mut().into_iter().zip(&means) {
                col -= *m;
            }
            let ym = y.sum() / n as f64;
            y -= ym;
            col_means = Some(means);
            y_mean = Some(ym);
        }

        let mut col_scales = vec![1.0; p];
        let mut constant_cols = Vec::new();
        for (j, col) in xf.columns().into_iter().enumerate() {
            let norm = col.dot(&col).sqrt();
            let is_constant = if centre {
                norm <= 1e-12 * (n as f64).sqrt()
            } else {
                col.iter().all(|&v| v == col[0])
            };
            if is_constant {
                constant_cols.push(j);
            } else if standardize {
                col_scales[j] = norm;
            }
        }
        if standardize {
            for (mut col, &s) in xf.columns_mut().into_iter().zip(&col_scales) {
                col /= s;
            }
        }

        Ok(Self {
            x: xf,
            y,
            loss,
            standardized: standardize,
            col_means,
            y_mean,
            col_scales,
            constant_cols,
        })
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn standardized(&self) -> bool {
        self.standardized
    }

    pub fn has_intercept(&self) -> bool {
        self.y_mean.is_some()
    }

    /// Columns that were constant and therefore left unscaled.
    pub fn constant_columns(&self) -> &[usize] {
        &self.constant_cols
    }

    pub fn column_scales(&self) -> &[f64] {
        &self.col_scales
    }

    /// Checks the unit-norm invariant of standardized columns.
    pub fn columns_have_unit_norm(&self) -> bool {
        self.x
            .columns()
            .into_iter()
            .enumerate()
            .filter(|(j, _)| !self.constant_cols.contains(j))
            .all(|(_, c)| (c.dot(&c).sqrt() - 1.0).abs() <= UNIT_NORM_TOL)
    }

    /// Maps coefficients fitted on the processed design back to the original
    /// column scale.
    pub fn unscale(&self, beta: ArrayView1<f64>) -> Array1<f64> {
        Array1::from_iter(beta.iter().zip(&self.col_scales).map(|(b, s)| b / s))
    }

    /// Intercept of the original-scale model for coefficients fitted on the
    /// processed design; `None` when no intercept is modelled.
    pub fn intercept(&self, beta: ArrayView1<f64>) -> Option<f64> {
        let (means, ym) = (self.col_means.as_ref()?, self.y_mean?);
        let shift: f64 = self
            .unscale(beta)
            .iter()
            .zip(means)
            .map(|(b, m)| b * m)
            .sum();
        Some(ym - shift)
    }
}

/// A coefficient vector together with the penalty level it was fitted at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub beta: Vec<f64>,
    pub lambda: f64,
}

impl Coefficients {
    pub fn new(beta: Vec<f64>, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || beta.iter().any(|b| !b.is_finite()) {
            return invalid("coefficients must be finite with a nonnegative lambda");
        }
        Ok(Self { beta, lambda })
    }
}
