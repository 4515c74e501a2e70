//! Markov's inequality for unimodal distributions on the grid
//! {0, 1/B, ..., 1}, and the threshold-side factor C(tau, B) derived
//! from it.

use crate::error::{Error, Result};
use crate::lattice::grid_index;

/// Largest possible P(X >= t) over unimodal distributions on
/// {0, 1/B, ..., 1} with mean at most eta. Returns 1 when t <= eta
/// (plain Markov is vacuous there).
///
/// The three regimes for eta <= 1/3 switch at min(3 eta/2 + 1/(2B), 2 eta)
/// and 1/2; for eta > 1/3 the switch point depends on
/// d(eta, B) = -2(eta - 1/2)(6 eta + 1) + (2 - 4 eta)/B + (4 eta - 1)^2/B^2.
pub fn unimodal_markov(eta: f64, t: f64, b: usize) -> Result<f64> {
    if b < 1 {
        return Err(Error::domain("B must be at least 1"));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::domain(format!("eta must lie in (0,1), got {eta}")));
    }
    let idx = grid_index(t, b)?;
    if idx < 0 {
        return Ok(1.0);
    }
    let t = idx as f64 / b as f64;
    if t <= eta {
        return Ok(1.0);
    }
    let binv = 1.0 / b as f64;
    let b1 = (2.0 * eta - t + binv) / (t + binv);
    let b3 = 2.0 * eta * (1.0 - t + binv) / (1.0 + binv);
    if eta <= 1.0 / 3.0 {
        let cut = (1.5 * eta + 0.5 * binv).min(2.0 * eta);
        if t <= cut {
            Ok(b1)
        } else if t <= 0.5 {
            Ok(eta / (2.0 * t - binv))
        } else {
            Ok(b3)
        }
    } else {
        let d = d_coefficient(eta, b);
        if d > 0.0 {
            let cut = 0.5 + (1.0 + binv - d.sqrt()) / (4.0 * eta);
            if t <= cut {
                Ok(b1)
            } else {
                Ok(b3)
            }
        } else {
            Ok(b1)
        }
    }
}

fn d_coefficient(eta: f64, b: usize) -> f64 {
    let b = b as f64;
    -2.0 * (eta - 0.5) * (6.0 * eta + 1.0) + (2.0 - 4.0 * eta) / b
        + (4.0 * eta - 1.0) * (4.0 * eta - 1.0) / (b * b)
}

/// C(tau, B): the factor such that, when the simultaneous-selection
/// frequency of every variable in L_theta is unimodal, the expected number
/// of those variables chosen at threshold tau is at most
/// C(tau, B) * theta * E|S_{floor(n/2)} ∩ L_theta|.
///
/// Only the theta <= 1/sqrt(3) expression is published; larger theta is
/// refused, as is tau below the stated validity window
/// (min(1/2 + theta^2, 1/2 + 1/(2B) + 3 theta^2/4), 1].
pub fn unimodal_factor_c(tau: f64, b: usize, theta: f64) -> Result<f64> {
    if b < 1 {
        return Err(Error::domain("B must be at least 1"));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::domain("theta must lie in (0,1)"));
    }
    if theta > 1.0 / 3f64.sqrt() {
        return Err(Error::UnsupportedRegime(format!(
            "unimodal factor is only available for theta <= 1/sqrt(3) ~= 0.5774, got {theta}"
        )));
    }
    // tau must be one of {1/2 + 1/B, 1/2 + 3/(2B), ..., 1}
    let idx = grid_index(2.0 * tau - 1.0, b)?;
    if idx < 2 {
        return Err(Error::domain(format!(
            "tau = {tau} is below the admissible grid starting at 1/2 + 1/B"
        )));
    }
    let tau = 0.5 * (1.0 + idx as f64 / b as f64);
    let bf = b as f64;
    let window = (0.5 + theta * theta).min(0.5 + 0.5 / bf + 0.75 * theta * theta);
    if tau <= window {
        return Err(Error::domain(format!(
            "tau = {tau} is below the validity window ({window:.6}, 1]"
        )));
    }
    if tau <= 0.75 {
        Ok(1.0 / (2.0 * (2.0 * tau - 1.0 - 0.5 / bf)))
    } else {
        Ok(4.0 * (1.0 - tau + 0.5 / bf) / (1.0 + 1.0 / bf))
    }
}
