//! Selection-frequency aggregation over a complementary-pair plan, and the
//! selectors built on the aggregated frequencies.
//!
//! For each variable k the profile records how many of the 2B subsample
//! fits selected k (giving the selection proportion on the grid
//! {0, 1/(2B), ..., 1}) and in how many of the B pairs k was selected in
//! both halves (the simultaneous proportion on {0, 1/B, ..., 1}). Counts
//! are kept as integers so the identity
//! 1 + simultaneous - 2 * proportion >= 0 holds exactly.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::resampling::SubsamplePlan;
use rayon::prelude::*;

/// A deterministic base variable-selection procedure.
///
/// Implementations must be reentrant: `select` runs concurrently across
/// subsamples. Any internal randomness must be derived from recorded seeds.
pub trait SelectionProcedure: Sync {
    /// Applies the procedure to the listed rows of the dataset and returns
    /// the selected variable indices (any order, duplicates ignored).
    fn select(&self, data: &Dataset, rows: &[usize]) -> Result<Vec<usize>>;

    /// Name plus tuning metadata, for reports.
    fn descriptor(&self) -> String;
}

/// Per-variable selection frequencies over a plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyProfile {
    b: usize,
    names: Vec<String>,
    /// Number of the 2B fits that selected each variable.
    hat_counts: Vec<u32>,
    /// Number of the B pairs that selected each variable in both halves.
    tilde_counts: Vec<u32>,
}

impl FrequencyProfile {
    pub fn b(&self) -> usize {
        self.b
    }

    pub fn p(&self) -> usize {
        self.hat_counts.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn hat_counts(&self) -> &[u32] {
        &self.hat_counts
    }

    pub fn tilde_counts(&self) -> &[u32] {
        &self.tilde_counts
    }

    /// Selection proportion of variable k on the grid {0, 1/(2B), ..., 1}.
    pub fn pi_hat(&self, k: usize) -> f64 {
        self.hat_counts[k] as f64 / (2 * self.b) as f64
    }

    /// Simultaneous proportion of variable k on the grid {0, 1/B, ..., 1}.
    pub fn pi_tilde(&self, k: usize) -> f64 {
        self.tilde_counts[k] as f64 / self.b as f64
    }

    /// Estimated average number of variables selected per fit.
    pub fn q_hat(&self) -> f64 {
        self.hat_counts.iter().map(|&c| c as f64).sum::<f64>() / (2 * self.b) as f64
    }

    /// Integer margin of the pair identity for variable k:
    /// B * (1 + pi_tilde - 2 pi_hat) = B + tilde - hat, which is
    /// non-negative for every variable of every run.
    pub fn pair_identity_margin(&self, k: usize) -> i64 {
        self.b as i64 + self.tilde_counts[k] as i64 - self.hat_counts[k] as i64
    }

    /// Variables with selection proportion at least tau (inclusive).
    pub fn cpss_select(&self, tau: f64) -> Vec<usize> {
        threshold_select(&self.hat_counts, 2 * self.b, tau)
    }

    /// Variables with simultaneous proportion at least tau (inclusive).
    pub fn simultaneous_select(&self, tau: f64) -> Vec<usize> {
        threshold_select(&self.tilde_counts, self.b, tau)
    }

    /// CSV with one `# key=value` header line per metadata item, then
    /// `variable,pi_hat,pi_tilde` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# b={}\n# p={}\n# q_hat={:.6}\n", self.b, self.p(), self.q_hat()));
        out.push_str("variable,pi_hat,pi_tilde\n");
        for k in 0..self.p() {
            out.push_str(&format!(
                "{},{:.12},{:.12}\n",
                self.names[k],
                self.pi_hat(k),
                self.pi_tilde(k)
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut b: Option<usize> = None;
        let mut names = Vec::new();
        let mut hats = Vec::new();
        let mut tildes = Vec::new();
        let mut saw_header = false;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for token in rest.split_whitespace() {
                    if let Some(v) = token.strip_prefix("b=") {
                        b = v.parse().ok();
                    }
                }
                continue;
            }
            if !saw_header {
                if line != "variable,pi_hat,pi_tilde" {
                    return Err(Error::Parse(format!(
                        "expected profile header 'variable,pi_hat,pi_tilde', got '{line}'"
                    )));
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("bad profile row: {line}")));
            }
            let b = b.ok_or_else(|| Error::Parse("profile is missing the '# b=' header".into()))?;
            let hat: f64 = fields[1]
                .parse()
                .map_err(|_| Error::Parse(format!("bad pi_hat in row: {line}")))?;
            let tilde: f64 = fields[2]
                .parse()
                .map_err(|_| Error::Parse(format!("bad pi_tilde in row: {line}")))?;
            names.push(fields[0].to_string());
            hats.push(grid_count(hat, 2 * b)?);
            tildes.push(grid_count(tilde, b)?);
        }
        let b = b.ok_or_else(|| Error::Parse("profile is missing the '# b=' header".into()))?;
        if !saw_header {
            return Err(Error::Parse("profile is missing its column header".into()));
        }
        Ok(FrequencyProfile { b, names, hat_counts: hats, tilde_counts: tildes })
    }
}

fn grid_count(value: f64, denom: usize) -> Result<u32> {
    let scaled = value * denom as f64;
    let count = scaled.round();
    if (scaled - count).abs() > 1e-6 || !(0.0..=denom as f64).contains(&count) {
        return Err(Error::Parse(format!(
            "frequency {value} does not sit on the 1/{denom} grid"
        )));
    }
    Ok(count as u32)
}

fn threshold_select(counts: &[u32], denom: usize, tau: f64) -> Vec<usize> {
    let min_count = (tau * denom as f64 - 1e-9).ceil().max(0.0) as u32;
    counts
        .iter()
        .enumerate()
        .filter_map(|(k, &c)| (c >= min_count).then_some(k))
        .collect()
}

/// Runs the base procedure on every half of every pair (in parallel) and
/// aggregates the selection counts. A failure on any subsample aborts the
/// whole computation, reported with its pair index.
pub fn selection_frequencies(
    data: &Dataset,
    proc: &dyn SelectionProcedure,
    plan: &SubsamplePlan,
) -> Result<FrequencyProfile> {
    if plan.n() != data.n_rows() {
        return Err(Error::domain(format!(
            "plan covers {} rows but the dataset has {}",
            plan.n(),
            data.n_rows()
        )));
    }
    let p = data.n_vars();
    let outcomes: Vec<Result<(Vec<usize>, Vec<usize>)>> = plan
        .pairs()
        .par_iter()
        .enumerate()
        .map(|(j, (first, second))| {
            let mut sel1 = proc.select(data, first).map_err(|e| Error::SelectorFailed {
                pair: j + 1,
                half: 1,
                message: e.to_string(),
            })?;
            let mut sel2 = proc.select(data, second).map_err(|e| Error::SelectorFailed {
                pair: j + 1,
                half: 2,
                message: e.to_string(),
            })?;
            sel1.sort_unstable();
            sel1.dedup();
            sel2.sort_unstable();
            sel2.dedup();
            Ok((sel1, sel2))
        })
        .collect();

    let mut hat_counts = vec![0u32; p];
    let mut tilde_counts = vec![0u32; p];
    let mut in_first = vec![false; p];
    for outcome in outcomes {
        let (sel1, sel2) = outcome?;
        for &k in sel1.iter().chain(&sel2) {
            if k >= p {
                return Err(Error::domain(format!("selected index {k} out of range")));
            }
        }
        for &k in &sel1 {
            in_first[k] = true;
            hat_counts[k] += 1;
        }
        for &k in &sel2 {
            hat_counts[k] += 1;
            if in_first[k] {
                tilde_counts[k] += 1;
            }
        }
        for &k in &sel1 {
            in_first[k] = false;
        }
    }
    Ok(FrequencyProfile {
        b: plan.b(),
        names: data.names().to_vec(),
        hat_counts,
        tilde_counts,
    })
}

/// q estimated as the sum of selection proportions.
pub fn estimate_q(profile: &FrequencyProfile) -> f64 {
    profile.q_hat()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resampling::complementary_pairs;
    use approx::assert_relative_eq;

    struct SelectAll;
    impl SelectionProcedure for SelectAll {
        fn select(&self, data: &Dataset, _rows: &[usize]) -> Result<Vec<usize>> {
            Ok((0..data.n_vars()).collect())
        }
        fn descriptor(&self) -> String {
            "select-all".into()
        }
    }

    struct SelectNone;
    impl SelectionProcedure for SelectNone {
        fn select(&self, _data: &Dataset, _rows: &[usize]) -> Result<Vec<usize>> {
            Ok(Vec::new())
        }
        fn descriptor(&self) -> String {
            "select-none".into()
        }
    }

    /// Selects variable 0 iff the subsample's response values sum above the
    /// stored cut; deterministic in the subset.
    struct SumCut(f64);
    impl SelectionProcedure for SumCut {
        fn select(&self, data: &Dataset, rows: &[usize]) -> Result<Vec<usize>> {
            let s: f64 = rows.iter().map(|&i| data.response()[i]).sum();
            Ok(if s > self.0 { vec![0] } else { vec![] })
        }
        fn descriptor(&self) -> String {
            format!("sum-cut({})", self.0)
        }
    }

    fn toy_data(n: usize, p: usize) -> Dataset {
        let cols = (0..p)
            .map(|k| (0..n).map(|i| (i * (k + 1)) as f64).collect())
            .collect();
        let y = (0..n).map(|i| i as f64).collect();
        Dataset::unnamed(cols, y).unwrap()
    }

    #[test]
    fn select_all_gives_unit_frequencies_and_q_equals_p() {
        let data = toy_data(10, 4);
        let plan = complementary_pairs(10, 7, 1).unwrap();
        let prof = selection_frequencies(&data, &SelectAll, &plan).unwrap();
        for k in 0..4 {
            assert_eq!(prof.pi_hat(k), 1.0);
            assert_eq!(prof.pi_tilde(k), 1.0);
        }
        assert_relative_eq!(estimate_q(&prof), 4.0);
    }

    #[test]
    fn select_none_gives_zero_frequencies() {
        let data = toy_data(10, 4);
        let plan = complementary_pairs(10, 7, 1).unwrap();
        let prof = selection_frequencies(&data, &SelectNone, &plan).unwrap();
        assert!(prof.hat_counts().iter().all(|&c| c == 0));
        assert!(prof.tilde_counts().iter().all(|&c| c == 0));
        assert_eq!(estimate_q(&prof), 0.0);
    }

    #[test]
    fn one_pair_half_selection_gives_half_hat_and_zero_tilde() {
        // with B = 1, a variable picked in exactly one half has
        // proportion 1/2 and simultaneous proportion 0
        let data = toy_data(6, 1);
        let plan = complementary_pairs(6, 1, 0).unwrap();
        let (first, _) = &plan.pairs()[0];
        let cut: f64 = first.iter().map(|&i| i as f64).sum::<f64>() - 0.5;
        // the cut sits just below the first half's sum, so selection
        // happens in whichever halves sum above it
        let prof = selection_frequencies(&data, &SumCut(cut), &plan).unwrap();
        let halves_selected = prof.hat_counts()[0];
        if halves_selected == 1 {
            assert_eq!(prof.pi_hat(0), 0.5);
            assert_eq!(prof.pi_tilde(0), 0.0);
        } else {
            // both halves crossed the cut; identity still holds exactly
            assert!(prof.pair_identity_margin(0) >= 0);
        }
    }

    #[test]
    fn pair_identity_holds_exactly_for_random_procedures() {
        struct Parity;
        impl SelectionProcedure for Parity {
            fn select(&self, data: &Dataset, rows: &[usize]) -> Result<Vec<usize>> {
                // arbitrary but deterministic: variable k selected iff the
                // subset index-sum plus k is even
                let s: usize = rows.iter().sum();
                Ok((0..data.n_vars()).filter(|k| (s + k) % 2 == 0).collect())
            }
            fn descriptor(&self) -> String {
                "parity".into()
            }
        }
        let data = toy_data(13, 5);
        for seed in 0..20 {
            let plan = complementary_pairs(13, 25, seed).unwrap();
            let prof = selection_frequencies(&data, &Parity, &plan).unwrap();
            for k in 0..5 {
                assert!(prof.pair_identity_margin(k) >= 0);
            }
        }
    }

    #[test]
    fn selection_is_inclusive_and_monotone_in_tau() {
        let prof = FrequencyProfile {
            b: 50,
            names: vec!["a".into(), "b".into(), "c".into()],
            hat_counts: vec![70, 69, 100],
            tilde_counts: vec![45, 40, 50],
        };
        // pi_hat = 0.70 is included at tau = 0.70 (>=, not >)
        assert_eq!(prof.cpss_select(0.70), vec![0, 2]);
        assert_eq!(prof.cpss_select(0.0), vec![0, 1, 2]);
        assert_eq!(prof.cpss_select(1.0), vec![2]);
        let mut last_len = usize::MAX;
        for m in 0..=100 {
            let tau = m as f64 / 100.0;
            let sel = prof.cpss_select(tau);
            assert!(sel.len() <= last_len, "selection must shrink as tau grows");
            last_len = sel.len();
        }
        assert_eq!(prof.simultaneous_select(0.9), vec![0, 2]);
    }

    #[test]
    fn fixed_q_selector_estimates_q_exactly() {
        struct FirstQ(usize);
        impl SelectionProcedure for FirstQ {
            fn select(&self, _data: &Dataset, _rows: &[usize]) -> Result<Vec<usize>> {
                Ok((0..self.0).collect())
            }
            fn descriptor(&self) -> String {
                format!("first-{}", self.0)
            }
        }
        let data = toy_data(12, 9);
        let plan = complementary_pairs(12, 10, 2).unwrap();
        let prof = selection_frequencies(&data, &FirstQ(3), &plan).unwrap();
        assert_relative_eq!(estimate_q(&prof), 3.0);
    }

    #[test]
    fn failures_abort_with_a_pair_index() {
        struct FailOnSmallFirstIndex;
        impl SelectionProcedure for FailOnSmallFirstIndex {
            fn select(&self, _data: &Dataset, rows: &[usize]) -> Result<Vec<usize>> {
                if rows[0] == 0 {
                    Err(Error::Numeric("synthetic failure".into()))
                } else {
                    Ok(vec![0])
                }
            }
            fn descriptor(&self) -> String {
                "fails-sometimes".into()
            }
        }
        let data = toy_data(8, 2);
        let plan = complementary_pairs(8, 40, 4).unwrap();
        match selection_frequencies(&data, &FailOnSmallFirstIndex, &plan) {
            Err(Error::SelectorFailed { pair, .. }) => assert!(pair >= 1 && pair <= 40),
            other => panic!("expected SelectorFailed, got {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip_preserves_counts() {
        let prof = FrequencyProfile {
            b: 50,
            names: (1..=4).map(|k| format!("x{k}")).collect(),
            hat_counts: vec![0, 33, 97, 100],
            tilde_counts: vec![0, 11, 47, 50],
        };
        let back = FrequencyProfile::from_csv(&prof.to_csv()).unwrap();
        assert_eq!(prof, back);
    }

    /// Aggregated proportions are unbiased for the subsample selection
    /// probability, and the simultaneous proportion for its square. With 3
    /// Rademacher responses per half, the toy selector picks variable 0
    /// exactly when all three are +1, so the truth is 1/8 (and 1/64).
    #[test]
    fn monte_carlo_unbiasedness_of_both_frequencies() {
        use rand::Rng;
        use rand::SeedableRng;
        let n = 6;
        let reps = 10_000;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        let (mut hat_sum, mut tilde_sum) = (0.0, 0.0);
        let (mut hat_sq, mut tilde_sq) = (0.0, 0.0);
        for rep in 0..reps {
            let y: Vec<f64> = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
            let data = Dataset::unnamed(vec![vec![0.0; n]], y).unwrap();
            let plan = complementary_pairs(n, 2, 1_000_000 + rep).unwrap();
            let prof = selection_frequencies(&data, &SumCut(2.5), &plan).unwrap();
            let (h, t) = (prof.pi_hat(0), prof.pi_tilde(0));
            hat_sum += h;
            tilde_sum += t;
            hat_sq += h * h;
            tilde_sq += t * t;
        }
        let m = reps as f64;
        let hat_mean = hat_sum / m;
        let tilde_mean = tilde_sum / m;
        let hat_se = ((hat_sq / m - hat_mean * hat_mean) / m).sqrt();
        let tilde_se = ((tilde_sq / m - tilde_mean * tilde_mean) / m).sqrt();
        // selecting needs all three responses positive: probability 1/8
        let p = 0.125_f64;
        assert!(
            (hat_mean - p).abs() <= 3.0 * hat_se,
            "hat mean {hat_mean} vs {p} (se {hat_se})"
        );
        assert!(
            (tilde_mean - p * p).abs() <= 3.0 * tilde_se,
            "tilde mean {tilde_mean} vs {} (se {tilde_se})",
            p * p
        );
    }
}
