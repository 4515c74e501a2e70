//! Probability mass functions on the grid {0, 1/B, ..., 1} and their shape
//! diagnostics.
//!
//! A pmf here is the carrier for the distribution of a selection frequency,
//! so B is the grid denominator and `mass[i]` is the probability of the
//! value i/B. Shape checks (unimodality, r-concavity for r < 0,
//! log-concavity) operate on the contiguous support block; zero mass maps to
//! +inf under the r-th power, which makes the convexity comparisons at the
//! block edges vacuous.

use crate::error::{Error, Result};

/// Probability mass function on {0, 1/B, ..., 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePmf {
    b: usize,
    mass: Vec<f64>,
}

/// Comparison slack for the shape checks.
///
/// A dip or convexity violation is forgiven when it is no larger than
/// `abs + rel * scale`, where `scale` is the magnitude of the values being
/// compared. The default is a pure absolute slack of 1e-10, which absorbs
/// float rounding without masking real violations; Monte Carlo pmfs want a
/// larger, explicitly chosen slack.
#[derive(Debug, Clone, Copy)]
pub struct ShapeTolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for ShapeTolerance {
    fn default() -> Self {
        ShapeTolerance { abs: 1e-10, rel: 0.0 }
    }
}

impl ShapeTolerance {
    pub fn absolute(abs: f64) -> Self {
        ShapeTolerance { abs, rel: 0.0 }
    }

    fn slack(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale.abs()
    }
}

/// Outcome of running every shape diagnostic on one pmf.
#[derive(Debug, Clone)]
pub struct ShapeVerdict {
    pub unimodal: bool,
    pub r_concave_at: Vec<(f64, bool)>,
    pub log_concave: bool,
}

impl LatticePmf {
    /// Builds a pmf from raw mass values (`mass.len() == b + 1`).
    ///
    /// Masses must be non-negative and sum to 1; sums within 1e-9 of 1 are
    /// rescaled, anything further off is rejected.
    pub fn new(b: usize, mass: Vec<f64>) -> Result<Self> {
        if b < 1 {
            return Err(Error::domain("grid denominator B must be at least 1"));
        }
        if mass.len() != b + 1 {
            return Err(Error::domain(format!(
                "mass vector has length {}, expected B + 1 = {}",
                mass.len(),
                b + 1
            )));
        }
        if mass.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::domain("masses must be finite and non-negative"));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "masses sum to {total}, more than 1e-9 away from 1"
            )));
        }
        let mass = if total == 1.0 {
            mass
        } else {
            mass.into_iter().map(|m| m / total).collect()
        };
        Ok(LatticePmf { b, mass })
    }

    /// Empirical pmf from grid-value counts (`counts.len() == b + 1`).
    pub fn from_counts(b: usize, counts: &[u64]) -> Result<Self> {
        if counts.len() != b + 1 {
            return Err(Error::domain(format!(
                "count vector has length {}, expected B + 1 = {}",
                counts.len(),
                b + 1
            )));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::domain("cannot build a pmf from zero counts"));
        }
        let mass = counts.iter().map(|&c| c as f64 / total as f64).collect();
        LatticePmf::new(b, mass)
    }

    /// Point mass at grid index `i`.
    pub fn point_mass(b: usize, i: usize) -> Result<Self> {
        if i > b {
            return Err(Error::domain(format!("index {i} exceeds B = {b}")));
        }
        let mut mass = vec![0.0; b + 1];
        mass[i] = 1.0;
        LatticePmf::new(b, mass)
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// E(f) = sum_i (i/B) f_i.
    pub fn expectation(&self) -> f64 {
        let b = self.b as f64;
        self.mass
            .iter()
            .enumerate()
            .map(|(i, m)| (i as f64 / b) * m)
            .sum()
    }

    /// T_t(f) = sum_{i >= B t} f_i for a grid point t.
    pub fn tail(&self, t: f64) -> Result<f64> {
        let idx = grid_index(t, self.b)?;
        if idx < 0 {
            return Ok(1.0);
        }
        Ok(self.tail_at_index(idx as usize))
    }

    /// Tail mass at and above grid index `i` (clamped to the grid).
    pub fn tail_at_index(&self, i: usize) -> f64 {
        self.mass.iter().skip(i).sum()
    }

    /// First and last indices carrying positive mass.
    pub fn support_range(&self) -> (usize, usize) {
        let lo = self.mass.iter().position(|&m| m > 0.0).unwrap_or(0);
        let hi = self.mass.iter().rposition(|&m| m > 0.0).unwrap_or(0);
        (lo, hi)
    }

    fn support_is_contiguous(&self) -> bool {
        let (lo, hi) = self.support_range();
        self.mass[lo..=hi].iter().all(|&m| m > 0.0)
    }

    /// True iff no indices i1 < i2 < i3 exist with
    /// `mass[i2] < min(mass[i1], mass[i3])` beyond the tolerance.
    pub fn is_unimodal(&self) -> bool {
        self.is_unimodal_with(ShapeTolerance::default())
    }

    pub fn is_unimodal_with(&self, tol: ShapeTolerance) -> bool {
        let n = self.mass.len();
        let mut prefix_max = vec![0.0_f64; n];
        let mut running = f64::NEG_INFINITY;
        for i in 0..n {
            prefix_max[i] = running;
            running = running.max(self.mass[i]);
        }
        let mut suffix_max = vec![0.0_f64; n];
        running = f64::NEG_INFINITY;
        for i in (0..n).rev() {
            suffix_max[i] = running;
            running = running.max(self.mass[i]);
        }
        for i in 1..n.saturating_sub(1) {
            let dip = prefix_max[i].min(suffix_max[i]) - self.mass[i];
            if dip > tol.slack(prefix_max[i].min(suffix_max[i])) {
                return false;
            }
        }
        true
    }

    /// True iff the sequence `mass[i]^r` is convex on the contiguous support
    /// block (r < 0; zero mass maps to +inf, so only strictly interior
    /// support points are binding). Non-contiguous support fails outright.
    pub fn is_r_concave(&self, r: f64) -> Result<bool> {
        self.is_r_concave_with(r, ShapeTolerance::default())
    }

    pub fn is_r_concave_with(&self, r: f64, tol: ShapeTolerance) -> Result<bool> {
        if !(r < 0.0) || !r.is_finite() {
            return Err(Error::domain("r-concavity check requires finite r < 0"));
        }
        if !self.support_is_contiguous() {
            return Ok(false);
        }
        let (lo, hi) = self.support_range();
        let phi: Vec<f64> = self.mass[lo..=hi].iter().map(|&m| m.powf(r)).collect();
        for j in 1..phi.len().saturating_sub(1) {
            let mid = 0.5 * (phi[j - 1] + phi[j + 1]);
            if phi[j] - mid > tol.slack(phi[j].max(mid)) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True iff `mass[i]^2 >= mass[i-1] * mass[i+1]` on the contiguous
    /// support block.
    pub fn is_log_concave(&self) -> bool {
        self.is_log_concave_with(ShapeTolerance::default())
    }

    pub fn is_log_concave_with(&self, tol: ShapeTolerance) -> bool {
        if !self.support_is_contiguous() {
            return false;
        }
        let (lo, hi) = self.support_range();
        let f = &self.mass[lo..=hi];
        for j in 1..f.len().saturating_sub(1) {
            let lhs = f[j] * f[j];
            let rhs = f[j - 1] * f[j + 1];
            if rhs - lhs > tol.slack(rhs.max(lhs)) {
                return false;
            }
        }
        true
    }

    /// Runs every diagnostic at once.
    pub fn shape_verdict(&self, rs: &[f64], tol: ShapeTolerance) -> Result<ShapeVerdict> {
        let mut r_concave_at = Vec::with_capacity(rs.len());
        for &r in rs {
            r_concave_at.push((r, self.is_r_concave_with(r, tol)?));
        }
        Ok(ShapeVerdict {
            unimodal: self.is_unimodal_with(tol),
            r_concave_at,
            log_concave: self.is_log_concave_with(tol),
        })
    }
}

/// Nearest grid index for `t` on {0, 1/b, ..., 1}; values may sit below 0
/// (the caller decides what a negative index means). Rejects anything more
/// than 1e-6 grid steps away from an integer multiple of 1/b.
pub(crate) fn grid_index(t: f64, b: usize) -> Result<i64> {
    let scaled = t * b as f64;
    let idx = scaled.round();
    if (scaled - idx).abs() > 1e-6 {
        return Err(Error::OffGrid { value: t, b });
    }
    if idx > b as f64 {
        return Err(Error::OffGrid { value: t, b });
    }
    Ok(idx as i64)
}

/// The r-th generalised mean M_r(a, b; lambda).
///
/// For r < 0 the convention M_r = 0 when a b = 0 applies (0^r = inf);
/// r = 0 is the geometric mean and r = -inf the minimum.
pub fn generalized_mean(a: f64, b: f64, lambda: f64, r: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::domain("lambda must lie strictly inside (0,1)"));
    }
    if a < 0.0 || b < 0.0 || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain("generalised mean needs non-negative finite arguments"));
    }
    if r.is_nan() || r == f64::INFINITY {
        return Err(Error::domain("r must lie in [-inf, +inf)"));
    }
    if r == f64::NEG_INFINITY {
        return Ok(a.min(b));
    }
    if r == 0.0 {
        return Ok(a.powf(1.0 - lambda) * b.powf(lambda));
    }
    if r < 0.0 && (a == 0.0 || b == 0.0) {
        return Ok(0.0);
    }
    Ok(((1.0 - lambda) * a.powf(r) + lambda * b.powf(r)).powf(1.0 / r))
}
