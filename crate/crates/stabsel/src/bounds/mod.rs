//! Error-control bound calculators.
//!
//! Everything here is a deterministic pure function of its arguments: the
//! worst-case factors that need no shape assumption, the unimodal Markov
//! bound and its threshold-side factor, the r-concave extremal tail
//! maximum D(eta, t, B, r), the combined bound that drives threshold
//! selection, and the threshold chooser itself.

mod rconcave;
mod unimodal;

pub use rconcave::{r_concave_tail_max, ExtremalSolution, TailBound};
pub use unimodal::{unimodal_factor_c, unimodal_markov};

use crate::error::{Error, Result};
use crate::lattice::grid_index;
use rayon::prelude::*;

/// Which bound a request refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMethod {
    WorstCase,
    Mb,
    Unimodal,
    RConcave,
    Combined,
}

/// What the factor in a [`BoundValue`] multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundBasis {
    /// Multiplies E|S_{floor(n/2)} ∩ L_theta| (estimated by q in practice).
    TimesExpectedSelected,
    /// Multiplies |L_theta| (replaced by p in practice).
    TimesCardLtheta,
}

/// A bound query: cutoff theta, threshold tau, number of pairs B.
#[derive(Debug, Clone, Copy)]
pub struct BoundRequest {
    pub theta: f64,
    pub tau: f64,
    pub b: usize,
    pub method: BoundMethod,
}

/// A certified bound, as a factor with its basis plus the per-variable
/// selection-probability bound where one exists.
#[derive(Debug, Clone, Copy)]
pub struct BoundValue {
    pub factor: f64,
    pub per_variable_prob: Option<f64>,
    pub method: BoundMethod,
    pub basis: BoundBasis,
}

/// Factor 1/(2 tau - 1): with cutoff theta, the expected number of
/// low-selection-probability variables chosen is at most
/// theta/(2 tau - 1) times the expected number the base procedure selects
/// from that set.
pub fn worst_case_factor(tau: f64) -> Result<f64> {
    if !(tau > 0.5 && tau <= 1.0) {
        return Err(Error::domain(format!(
            "worst-case inclusion bound needs tau in (1/2, 1], got {tau} (bound vacuous)"
        )));
    }
    Ok(1.0 / (2.0 * tau - 1.0))
}

/// Exclusion-side factor (1 - theta)/(1 - 2 tau) for tau < 1/2.
pub fn worst_case_exclusion_factor(tau: f64, theta: f64) -> Result<f64> {
    if !(tau >= 0.0 && tau < 0.5) {
        return Err(Error::domain(format!(
            "worst-case exclusion bound needs tau in [0, 1/2), got {tau}"
        )));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::domain("theta must lie in (0,1)"));
    }
    Ok((1.0 - theta) / (1.0 - 2.0 * tau))
}

/// The q^2/(p (2 tau - 1)) comparison curve.
pub fn mb_bound(q: f64, p: usize, tau: f64) -> Result<f64> {
    if q < 0.0 || q > p as f64 {
        return Err(Error::domain("q must lie in [0, p]"));
    }
    if p == 0 {
        return Err(Error::domain("p must be positive"));
    }
    Ok(worst_case_factor(tau)? * q * q / p as f64)
}

/// min{ D(theta^2, 2 tau - 1, B, -1/2), D(theta, tau, 2B, -1/4) }: the
/// per-variable bound behind the threshold chooser, total on tau in
/// (theta, 1] via the D(., t, ., .) = 1 convention for t <= 0.
pub fn combined_bound(theta: f64, tau: f64, b: usize) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::domain("theta must lie in (0,1)"));
    }
    if !(tau > theta && tau <= 1.0) {
        return Err(Error::domain(format!(
            "combined bound needs tau in (theta, 1]; got tau={tau}, theta={theta}"
        )));
    }
    // tau must sit on the half-grid so both D arguments are grid points
    grid_index(tau, 2 * b)?;
    let d_tilde = r_concave_tail_max(theta * theta, 2.0 * tau - 1.0, b, -0.5)?;
    let d_hat = r_concave_tail_max(theta, tau, 2 * b, -0.25)?;
    Ok(d_tilde.value.min(d_hat.value))
}

/// Smallest grid threshold tau in {0, 1/(2B), ..., 1} with tau > theta and
/// p * combined_bound(theta, tau, B) <= l.
pub fn choose_threshold(theta: f64, b: usize, l: f64, p: usize) -> Result<f64> {
    if !(l > 0.0) {
        return Err(Error::domain("control level l must be positive"));
    }
    if p == 0 {
        return Err(Error::domain("p must be positive"));
    }
    let denom = (2 * b) as f64;
    let mut smallest = f64::INFINITY;
    for m in 0..=(2 * b) {
        let tau = m as f64 / denom;
        if tau <= theta {
            continue;
        }
        let bound = combined_bound(theta, tau, b)?;
        let total = p as f64 * bound;
        if total <= l + 1e-12 {
            return Ok(tau);
        }
        smallest = smallest.min(total);
    }
    Err(Error::InfeasibleLevel { smallest })
}

/// Evaluates one bound request. The factor/basis split mirrors how each
/// bound is applied: worst-case and unimodal scale the expected number the
/// base procedure selects from L_theta, the r-concave bounds scale
/// |L_theta| directly, and the MB curve is the worst-case per-variable
/// probability times |L_theta|.
pub fn evaluate(req: &BoundRequest) -> Result<BoundValue> {
    let BoundRequest { theta, tau, b, method } = *req;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::domain("theta must lie in (0,1)"));
    }
    let clamp = |p: f64| p.clamp(0.0, 1.0);
    match method {
        BoundMethod::WorstCase => {
            let f = worst_case_factor(tau)?;
            Ok(BoundValue {
                factor: theta * f,
                per_variable_prob: Some(clamp(theta * theta * f)),
                method,
                basis: BoundBasis::TimesExpectedSelected,
            })
        }
        BoundMethod::Mb => {
            let f = worst_case_factor(tau)?;
            Ok(BoundValue {
                factor: theta * theta * f,
                per_variable_prob: Some(clamp(theta * theta * f)),
                method,
                basis: BoundBasis::TimesCardLtheta,
            })
        }
        BoundMethod::Unimodal => {
            let c = unimodal_factor_c(tau, b, theta)?;
            Ok(BoundValue {
                factor: c * theta,
                per_variable_prob: Some(clamp(c * theta * theta)),
                method,
                basis: BoundBasis::TimesExpectedSelected,
            })
        }
        BoundMethod::RConcave => {
            let d = r_concave_tail_max(theta * theta, 2.0 * tau - 1.0, b, -0.5)?;
            Ok(BoundValue {
                factor: d.value,
                per_variable_prob: Some(d.value),
                method,
                basis: BoundBasis::TimesCardLtheta,
            })
        }
        BoundMethod::Combined => {
            let v = combined_bound(theta, tau, b)?;
            Ok(BoundValue {
                factor: v,
                per_variable_prob: Some(v),
                method,
                basis: BoundBasis::TimesCardLtheta,
            })
        }
    }
}

/// Grid of combined-bound values, rows indexed by tau, columns by theta.
/// Cells are independent, so they evaluate in parallel.
pub fn combined_bound_table(thetas: &[f64], taus: &[f64], b: usize) -> Result<Vec<Vec<f64>>> {
    taus.par_iter()
        .map(|&tau| {
            thetas
                .iter()
                .map(|&theta| combined_bound(theta, tau, b))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}
