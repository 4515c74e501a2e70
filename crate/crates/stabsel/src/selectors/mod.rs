//! Base selection procedures: l1-penalised linear and logistic regression
//! fitted by pathwise coordinate descent, plus the fixed-q tuning rule used
//! as the default base procedure for stability selection.

mod cd;

pub use cd::CdControl;

use crate::cpss::SelectionProcedure;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use cd::{cd_gaussian, irls_logistic, sigmoid, standardize, Design};

/// Response family of a penalised regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Gaussian,
    Binomial,
}

impl Family {
    pub fn parse(s: &str) -> Result<Family> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "linear" => Ok(Family::Gaussian),
            "binomial" | "logistic" => Ok(Family::Binomial),
            other => Err(Error::Parse(format!("unknown family '{other}'"))),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Gaussian => write!(f, "gaussian"),
            Family::Binomial => write!(f, "binomial"),
        }
    }
}

/// One fitted point on a regularisation path, reported on the original
/// variable scale. The active set is decided on the standardized scale,
/// where soft-thresholding produces exact zeros.
#[derive(Debug, Clone)]
pub struct LassoFit {
    pub lambda: f64,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub family: Family,
    pub active_set: Vec<usize>,
}

/// Result of tuning lambda to select (at least) q variables.
#[derive(Debug, Clone)]
pub struct QSelection {
    pub indices: Vec<usize>,
    pub lambda: f64,
    /// Simultaneous entry pushed the active set beyond q.
    pub overshoot: bool,
    /// The path bottomed out before reaching q active variables.
    pub exhausted: bool,
}

/// Smallest penalty with an empty model: max_k |x_k' (y - ybar)| / n on the
/// standardized scale (for both families).
pub fn lambda_max(columns: &[Vec<f64>], y: &[f64]) -> Result<f64> {
    let design = standardize(columns)?;
    check_response(y, design.n)?;
    let ybar = y.iter().sum::<f64>() / design.n as f64;
    let n = design.n as f64;
    let mut best = 0.0_f64;
    for col in &design.cols {
        let g: f64 = col.iter().zip(y).map(|(x, yi)| x * (yi - ybar)).sum::<f64>() / n;
        best = best.max(g.abs());
    }
    Ok(best)
}

/// 100 log-spaced penalties from lambda_max down to 0.001 * lambda_max.
pub fn default_lambda_grid(lambda_max: f64) -> Vec<f64> {
    log_spaced_grid(lambda_max, 100)
}

fn log_spaced_grid(lambda_max: f64, len: usize) -> Vec<f64> {
    let ratio: f64 = 1e-3;
    (0..len)
        .map(|i| lambda_max * ratio.powf(i as f64 / (len - 1) as f64))
        .collect()
}

fn check_response(y: &[f64], n: usize) -> Result<()> {
    if y.len() != n {
        return Err(Error::domain("response length does not match the design"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite value in response"));
    }
    Ok(())
}

fn check_binomial(y: &[f64]) -> Result<()> {
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::domain("binomial response must be coded 0/1"));
    }
    let ones = y.iter().filter(|&&v| v == 1.0).count();
    if ones == 0 || ones == y.len() {
        return Err(Error::domain("binomial response is constant on this subset"));
    }
    Ok(())
}

/// Fits the lasso at every penalty in `lambdas` (descending), warm-starting
/// along the path. Coefficients come back on the original scale.
pub fn fit_path(
    columns: &[Vec<f64>],
    y: &[f64],
    family: Family,
    lambdas: &[f64],
) -> Result<Vec<LassoFit>> {
    let design = standardize(columns)?;
    check_response(y, design.n)?;
    let ctrl = CdControl::default();
    let mut state = PathState::new(&design, y, family)?;
    lambdas
        .iter()
        .map(|&lambda| state.fit_at(&design, y, lambda, &ctrl))
        .collect()
}

/// Warm-started solver state shared along a path.
struct PathState {
    beta: Vec<f64>,
    intercept: f64,
    /// Gaussian: residual y_c - X beta. Binomial: unused.
    resid: Vec<f64>,
    family: Family,
    ybar: f64,
}

impl PathState {
    fn new(design: &Design, y: &[f64], family: Family) -> Result<Self> {
        let ybar = y.iter().sum::<f64>() / design.n as f64;
        if family == Family::Binomial {
            check_binomial(y)?;
        }
        let (resid, intercept) = match family {
            Family::Gaussian => (y.iter().map(|v| v - ybar).collect(), 0.0),
            Family::Binomial => (Vec::new(), (ybar / (1.0 - ybar)).ln()),
        };
        Ok(PathState { beta: vec![0.0; design.cols.len()], intercept, resid, family, ybar })
    }

    fn fit_at(&mut self, design: &Design, y: &[f64], lambda: f64, ctrl: &CdControl) -> Result<LassoFit> {
        if !(lambda >= 0.0) {
            return Err(Error::domain("lambda must be non-negative"));
        }
        match self.family {
            Family::Gaussian => {
                cd_gaussian(design, lambda, &mut self.beta, &mut self.resid, ctrl)?;
            }
            Family::Binomial => {
                irls_logistic(design, y, lambda, &mut self.beta, &mut self.intercept, ctrl)?;
            }
        }
        let active: Vec<usize> = (0..self.beta.len()).filter(|&k| self.beta[k] != 0.0).collect();
        let mut coefficients = vec![0.0; self.beta.len()];
        let mut adjust = 0.0;
        for &k in &active {
            coefficients[k] = self.beta[k] / design.sd[k];
            adjust += coefficients[k] * design.mean[k];
        }
        let intercept = match self.family {
            Family::Gaussian => self.ybar - adjust,
            Family::Binomial => self.intercept - adjust,
        };
        Ok(LassoFit {
            lambda,
            coefficients,
            intercept,
            family: self.family,
            active_set: active,
        })
    }
}

/// Active set of the largest penalty whose active-set size reaches q,
/// refined by bisection between neighbouring path points. Simultaneous
/// entry past q returns the larger set, flagged `overshoot`; a path that
/// never reaches q returns its final active set, flagged `exhausted`.
pub fn select_q(columns: &[Vec<f64>], y: &[f64], family: Family, q: usize) -> Result<QSelection> {
    let p = columns.len();
    if q < 1 || q > p {
        return Err(Error::domain(format!("q must lie in [1, p]; got q={q}, p={p}")));
    }
    let design = standardize(columns)?;
    check_response(y, design.n)?;
    let lmax = lambda_max(columns, y)?;
    if lmax == 0.0 {
        return Ok(QSelection { indices: vec![], lambda: 0.0, overshoot: false, exhausted: true });
    }
    let grid = default_lambda_grid(lmax);
    let ctrl = CdControl::default();
    let mut state = PathState::new(&design, y, family)?;

    let mut previous_lambda = grid[0];
    let mut hit: Option<LassoFit> = None;
    for &lambda in &grid {
        let fit = state.fit_at(&design, y, lambda, &ctrl)?;
        if fit.active_set.len() >= q {
            hit = Some(fit);
            break;
        }
        previous_lambda = lambda;
    }

    let Some(mut best) = hit else {
        // pathological collinearity: report what the path bottom offers
        let fit = state.fit_at(&design, y, *grid.last().unwrap(), &ctrl)?;
        return Ok(QSelection {
            indices: fit.active_set.clone(),
            lambda: fit.lambda,
            overshoot: false,
            exhausted: true,
        });
    };

    if best.active_set.len() > q {
        // simultaneous entries: look for an intermediate penalty that hits
        // q exactly before accepting the overshoot
        let mut lo = best.lambda;
        let mut hi = previous_lambda;
        for _ in 0..60 {
            if hi - lo <= 1e-10 * lmax {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let fit = state.fit_at(&design, y, mid, &ctrl)?;
            if fit.active_set.len() >= q {
                lo = mid;
                best = fit;
                if best.active_set.len() == q {
                    break;
                }
            } else {
                hi = mid;
            }
        }
    }

    let overshoot = best.active_set.len() > q;
    Ok(QSelection {
        indices: best.active_set.clone(),
        lambda: best.lambda,
        overshoot,
        exhausted: false,
    })
}

/// Largest KKT violation of a fit, on the standardized scale the solver
/// optimises: for active k the score (1/n) x_k'(y - yhat) must equal
/// lambda * sign(beta_k); for inactive k it must not exceed lambda.
pub fn kkt_max_violation(columns: &[Vec<f64>], y: &[f64], fit: &LassoFit) -> Result<f64> {
    let design = standardize(columns)?;
    check_response(y, design.n)?;
    let n = design.n as f64;
    let mut linear = vec![fit.intercept; design.n];
    for (k, &c) in fit.coefficients.iter().enumerate() {
        if c != 0.0 {
            for (l, x) in linear.iter_mut().zip(&columns[k]) {
                *l += c * x;
            }
        }
    }
    let score_resid: Vec<f64> = match fit.family {
        Family::Gaussian => y.iter().zip(&linear).map(|(yi, li)| yi - li).collect(),
        Family::Binomial => y.iter().zip(&linear).map(|(yi, li)| yi - sigmoid(*li)).collect(),
    };
    let mut worst = 0.0_f64;
    for k in 0..design.cols.len() {
        let g: f64 = design.cols[k]
            .iter()
            .zip(&score_resid)
            .map(|(x, r)| x * r)
            .sum::<f64>()
            / n;
        let violation = if fit.coefficients[k] != 0.0 {
            (g - fit.lambda * fit.coefficients[k].signum()).abs()
        } else {
            (g.abs() - fit.lambda).max(0.0)
        };
        worst = worst.max(violation);
    }
    Ok(worst)
}

/// Lasso tuned to select q variables per evaluation: the default base
/// procedure.
#[derive(Debug, Clone)]
pub struct QLasso {
    pub family: Family,
    pub q: usize,
}

impl SelectionProcedure for QLasso {
    fn select(&self, data: &Dataset, rows: &[usize]) -> Result<Vec<usize>> {
        let (columns, y) = data.restrict(rows);
        Ok(select_q(&columns, &y, self.family, self.q)?.indices)
    }

    fn descriptor(&self) -> String {
        format!("lasso-q(family={}, q={})", self.family, self.q)
    }
}

/// Lasso at a fixed penalty, warm-started from a short path above it.
#[derive(Debug, Clone)]
pub struct FixedLambdaLasso {
    pub family: Family,
    pub lambda: f64,
}

impl SelectionProcedure for FixedLambdaLasso {
    fn select(&self, data: &Dataset, rows: &[usize]) -> Result<Vec<usize>> {
        let (columns, y) = data.restrict(rows);
        let lmax = lambda_max(&columns, &y)?;
        if self.lambda >= lmax {
            return Ok(Vec::new());
        }
        let mut lambdas: Vec<f64> = log_spaced_grid(lmax, 25)
            .into_iter()
            .filter(|&l| l > self.lambda)
            .collect();
        lambdas.push(self.lambda);
        let fits = fit_path(&columns, &y, self.family, &lambdas)?;
        Ok(fits.last().map(|f| f.active_set.clone()).unwrap_or_default())
    }

    fn descriptor(&self) -> String {
        format!("lasso-fixed(family={}, lambda={})", self.family, self.lambda)
    }
}
