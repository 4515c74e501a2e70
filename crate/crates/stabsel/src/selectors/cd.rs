//! Coordinate descent internals: standardization, the Gaussian solver, the
//! weighted solver that IRLS wraps for logistic fits.
//!
//! All solvers work on standardized columns (mean 0, population variance 1)
//! with the objective scaled by 1/(2n), so the Gaussian coordinate update
//! is a plain soft-threshold. Constant columns standardize to all-zero and
//! therefore can never enter the active set.

use crate::error::{Error, Result};

/// Standardized design: columns on the fitting scale plus what is needed
/// to map coefficients back.
pub(crate) struct Design {
    pub cols: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub n: usize,
}

pub(crate) fn standardize(columns: &[Vec<f64>]) -> Result<Design> {
    let n = columns.first().map_or(0, |c| c.len());
    if n < 2 {
        return Err(Error::domain("need at least 2 rows to fit"));
    }
    let mut cols = Vec::with_capacity(columns.len());
    let mut means = Vec::with_capacity(columns.len());
    let mut sds = Vec::with_capacity(columns.len());
    for (k, col) in columns.iter().enumerate() {
        if col.len() != n {
            return Err(Error::domain("ragged design matrix"));
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite value in column {k}")));
        }
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        if sd > 0.0 {
            cols.push(col.iter().map(|v| (v - mean) / sd).collect());
            sds.push(sd);
        } else {
            // constant column: centred to zero, never selectable
            cols.push(vec![0.0; n]);
            sds.push(1.0);
        }
        means.push(mean);
    }
    Ok(Design { cols, mean: means, sd: sds, n })
}

#[derive(Debug, Clone, Copy)]
pub struct CdControl {
    /// Sweep stops once no coefficient moves more than this.
    pub tol: f64,
    /// Hard cap on coordinate-descent sweeps per fit.
    pub max_sweeps: usize,
}

impl Default for CdControl {
    fn default() -> Self {
        CdControl { tol: 1e-8, max_sweeps: 100_000 }
    }
}

fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One Gaussian sweep over the listed coordinates; returns the largest
/// coefficient move. `resid` is kept consistent with `beta`.
fn gaussian_sweep(
    design: &Design,
    lambda: f64,
    coords: &[usize],
    beta: &mut [f64],
    resid: &mut [f64],
) -> f64 {
    let n = design.n as f64;
    let mut max_delta = 0.0_f64;
    for &k in coords {
        let xk = &design.cols[k];
        let z = beta[k] + dot(xk, resid) / n;
        let new = soft_threshold(z, lambda);
        let delta = new - beta[k];
        if delta != 0.0 {
            for (r, x) in resid.iter_mut().zip(xk) {
                *r -= delta * x;
            }
            beta[k] = new;
            max_delta = max_delta.max(delta.abs());
        }
    }
    max_delta
}

/// Gaussian lasso on standardized columns with centred response:
/// minimises (1/2n) ||yc - X beta||^2 + lambda ||beta||_1, warm-starting
/// from the given beta. `resid` must equal `yc - X beta` on entry.
pub(crate) fn cd_gaussian(
    design: &Design,
    lambda: f64,
    beta: &mut [f64],
    resid: &mut [f64],
    ctrl: &CdControl,
) -> Result<usize> {
    let p = design.cols.len();
    let all: Vec<usize> = (0..p).collect();
    let mut sweeps = 0usize;
    loop {
        // full sweep; converged when nothing moved
        sweeps += 1;
        if sweeps > ctrl.max_sweeps {
            return Err(Error::Numeric(format!(
                "coordinate descent did not converge within {} sweeps",
                ctrl.max_sweeps
            )));
        }
        let moved = gaussian_sweep(design, lambda, &all, beta, resid);
        if moved < ctrl.tol {
            return Ok(sweeps);
        }
        // iterate the active set until it stabilises, then re-check all
        loop {
            let active: Vec<usize> = (0..p).filter(|&k| beta[k] != 0.0).collect();
            sweeps += 1;
            if sweeps > ctrl.max_sweeps {
                return Err(Error::Numeric(format!(
                    "coordinate descent did not converge within {} sweeps",
                    ctrl.max_sweeps
                )));
            }
            if gaussian_sweep(design, lambda, &active, beta, resid) < ctrl.tol {
                break;
            }
        }
    }
}

pub(crate) fn gaussian_objective(design: &Design, yc: &[f64], beta: &[f64], lambda: f64) -> f64 {
    let n = design.n as f64;
    let mut resid = yc.to_vec();
    for (k, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            for (r, x) in resid.iter_mut().zip(&design.cols[k]) {
                *r -= b * x;
            }
        }
    }
    resid.iter().map(|r| r * r).sum::<f64>() / (2.0 * n) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

/// Exposed for tests that need to watch the objective across sweeps.
#[cfg(test)]
pub(crate) fn gaussian_sweep_for_tests(
    design: &Design,
    lambda: f64,
    beta: &mut [f64],
    resid: &mut [f64],
) -> f64 {
    let all: Vec<usize> = (0..design.cols.len()).collect();
    gaussian_sweep(design, lambda, &all, beta, resid)
}

/// One weighted sweep (intercept updated first). Progress is reported in
/// curvature-scaled units, sqrt(v_k) * |delta_k|, so that tiny clamped
/// weights cannot stall the stopping rule: a move below tol then always
/// means objective progress below tol^2.
fn weighted_sweep(
    design: &Design,
    lambda: f64,
    w: &[f64],
    z: &[f64],
    coords: &[usize],
    beta: &mut [f64],
    intercept: &mut f64,
    eta: &mut [f64],
) -> f64 {
    let n = design.n as f64;
    let w_mean: f64 = w.iter().sum::<f64>() / n;
    let mut max_delta = 0.0_f64;

    let shift: f64 = w
        .iter()
        .zip(z.iter().zip(eta.iter()))
        .map(|(wi, (zi, ei))| wi * (zi - ei))
        .sum::<f64>()
        / (n * w_mean);
    if shift != 0.0 {
        *intercept += shift;
        for e in eta.iter_mut() {
            *e += shift;
        }
        max_delta = shift.abs() * w_mean.sqrt();
    }

    for &k in coords {
        let xk = &design.cols[k];
        let mut grad = 0.0;
        let mut curv = 0.0;
        for i in 0..design.n {
            grad += w[i] * xk[i] * (z[i] - eta[i]);
            curv += w[i] * xk[i] * xk[i];
        }
        grad /= n;
        curv /= n;
        if curv <= 0.0 {
            continue;
        }
        let new = soft_threshold(grad + curv * beta[k], lambda) / curv;
        let delta = new - beta[k];
        if delta != 0.0 {
            for (e, x) in eta.iter_mut().zip(xk) {
                *e += delta * x;
            }
            beta[k] = new;
            max_delta = max_delta.max(delta.abs() * curv.sqrt());
        }
    }
    max_delta
}

/// Weighted lasso: minimises (1/2n) sum_i w_i (z_i - b0 - x_i beta)^2
/// + lambda ||beta||_1. `eta` must equal `b0 + X beta` on entry and is kept
/// consistent.
pub(crate) fn cd_weighted(
    design: &Design,
    lambda: f64,
    w: &[f64],
    z: &[f64],
    beta: &mut [f64],
    intercept: &mut f64,
    eta: &mut [f64],
    ctrl: &CdControl,
    sweeps_used: &mut usize,
) -> Result<()> {
    let p = design.cols.len();
    let all: Vec<usize> = (0..p).collect();
    loop {
        *sweeps_used += 1;
        if *sweeps_used > ctrl.max_sweeps {
            return Err(Error::Numeric(format!(
                "weighted coordinate descent did not converge within {} sweeps",
                ctrl.max_sweeps
            )));
        }
        let moved = weighted_sweep(design, lambda, w, z, &all, beta, intercept, eta);
        if moved < ctrl.tol {
            return Ok(());
        }
        loop {
            let active: Vec<usize> = (0..p).filter(|&k| beta[k] != 0.0).collect();
            *sweeps_used += 1;
            if *sweeps_used > ctrl.max_sweeps {
                return Err(Error::Numeric(format!(
                    "weighted coordinate descent did not converge within {} sweeps",
                    ctrl.max_sweeps
                )));
            }
            if weighted_sweep(design, lambda, w, z, &active, beta, intercept, eta) < ctrl.tol {
                break;
            }
        }
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    let x = x.clamp(-30.0, 30.0);
    1.0 / (1.0 + (-x).exp())
}

/// Penalised logistic deviance objective on the standardized scale:
/// -(1/n) log-likelihood + lambda ||beta||_1.
pub(crate) fn logistic_objective(y: &[f64], eta: &[f64], beta: &[f64], lambda: f64) -> f64 {
    let n = y.len() as f64;
    let nll: f64 = y
        .iter()
        .zip(eta)
        .map(|(&yi, &ei)| {
            let e = ei.clamp(-30.0, 30.0);
            // log(1 + exp(e)) - yi * e, computed stably
            let log1p = if e > 0.0 { e + (-e).exp().ln_1p() } else { e.exp().ln_1p() };
            log1p - yi * e
        })
        .sum();
    nll / n + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

/// Penalised logistic lasso: IRLS around the weighted solver with a
/// step-halving safeguard on the penalised objective. `beta`/`intercept`
/// are warm starts on the standardized scale.
pub(crate) fn irls_logistic(
    design: &Design,
    y: &[f64],
    lambda: f64,
    beta: &mut Vec<f64>,
    intercept: &mut f64,
    ctrl: &CdControl,
) -> Result<()> {
    const MIN_WEIGHT: f64 = 1e-5;
    const MAX_OUTER: usize = 200;
    let n = design.n;
    let mut eta = vec![*intercept; n];
    for (k, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            for (e, x) in eta.iter_mut().zip(&design.cols[k]) {
                *e += b * x;
            }
        }
    }
    let mut objective = logistic_objective(y, &eta, beta, lambda);
    let mut sweeps = 0usize;
    for _ in 0..MAX_OUTER {
        let p_hat: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
        let w: Vec<f64> = p_hat.iter().map(|&p| (p * (1.0 - p)).max(MIN_WEIGHT)).collect();
        let z: Vec<f64> = eta
            .iter()
            .zip(y.iter().zip(p_hat.iter().zip(w.iter())))
            .map(|(&e, (&yi, (&pi, &wi)))| e + (yi - pi) / wi)
            .collect();

        let old_beta = beta.clone();
        let old_intercept = *intercept;
        cd_weighted(design, lambda, &w, &z, beta, intercept, &mut eta, ctrl, &mut sweeps)?;

        // step-halving when the quadratic model overshoots
        let mut new_objective = logistic_objective(y, &eta, beta, lambda);
        let mut halvings = 0;
        while new_objective > objective + 1e-12 && halvings < 20 {
            for (bk, ob) in beta.iter_mut().zip(&old_beta) {
                *bk = 0.5 * (*bk + ob);
            }
            *intercept = 0.5 * (*intercept + old_intercept);
            recompute_eta(design, beta, *intercept, &mut eta);
            new_objective = logistic_objective(y, &eta, beta, lambda);
            halvings += 1;
        }

        let max_move = beta
            .iter()
            .zip(&old_beta)
            .map(|(b, o)| (b - o).abs())
            .fold((*intercept - old_intercept).abs(), f64::max);
        objective = new_objective;
        if max_move < ctrl.tol.max(1e-9) {
            return Ok(());
        }
    }
    Err(Error::Numeric("IRLS did not converge".into()))
}

fn recompute_eta(design: &Design, beta: &[f64], intercept: f64, eta: &mut [f64]) {
    for e in eta.iter_mut() {
        *e = intercept;
    }
    for (k, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            for (e, x) in eta.iter_mut().zip(&design.cols[k]) {
                *e += b * x;
            }
        }
    }
}
