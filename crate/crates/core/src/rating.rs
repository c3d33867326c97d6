//! Rating engines: batch Elo with a K-factor schedule, Bradley–Terry fitting
//! by full-batch gradient ascent, and rescaling onto the reporting scale.

use crate::error::{Error, Result};
use crate::model::{MatchRecord, OracleConfig, RatingTable};
use crate::oracle::win_probability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KSchedule {
    #[default]
    Fixed,
    /// `max(k_min, k0 / (1 + games / 5))`
    Decay,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EloConfig {
    pub k_fixed: f64,
    pub k0: f64,
    pub k_min: f64,
    pub schedule: KSchedule,
    pub initial_rating: f64,
}

impl Default for EloConfig {
    fn default() -> Self {
        Self {
            k_fixed: 32.0,
            k0: 40.0,
            k_min: 10.0,
            schedule: KSchedule::Fixed,
            initial_rating: 1000.0,
        }
    }
}

impl EloConfig {
    pub fn with_schedule(mut self, schedule: KSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (key, k) in [
            ("k_fixed", self.k_fixed),
            ("k0", self.k0),
            ("k_min", self.k_min),
        ] {
            if !(k > 0.0) {
                return Err(Error::config_key(key, None, "must be > 0"));
            }
        }
        if self.k_min > self.k0 {
            return Err(Error::config_key("k_min", None, "must not exceed k0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BtFitConfig {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for BtFitConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            learning_rate: 0.01,
        }
    }
}

impl BtFitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config_key("bt_epochs", None, "must be >= 1"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::config_key("bt_learning_rate", None, "must be > 0"));
        }
        Ok(())
    }
}

pub fn k_factor(games_played: u32, cfg: &EloConfig) -> f64 {
    match cfg.schedule {
        KSchedule::Fixed => cfg.k_fixed,
        KSchedule::Decay => (cfg.k0 / (1.0 + games_played as f64 / 5.0)).max(cfg.k_min),
    }
}

/// Expected points per item for one round, from the ratings in `table`.
pub fn expected_scores(
    table: &RatingTable,
    round: &[MatchRecord],
    oracle: &OracleConfig,
) -> Result<Vec<f64>> {
    let mut expected = vec![0.0; table.len()];
    for r in round {
        table.check_record(r)?;
        let e = win_probability(table.ratings[r.a.0], table.ratings[r.b.0], oracle);
        expected[r.a.0] += e;
        expected[r.b.0] += 1.0 - e;
    }
    Ok(expected)
}

/// Applies one round of results at once: every participant moves by
/// `K(games) * (S - E)` where `E` was computed from the pre-round ratings and
/// `K` from the pre-round game count.
pub fn batch_elo_update(
    table: &mut RatingTable,
    round: &[MatchRecord],
    expected: &[f64],
    cfg: &EloConfig,
) -> Result<()> {
    if expected.len() != table.len() {
        return Err(Error::Invariant(format!(
            "expected scores for {} items, table has {}",
            expected.len(),
            table.len()
        )));
    }
    let n = table.len();
    let mut actual = vec![0.0; n];
    let mut played = vec![0u32; n];
    for r in round {
        table.check_record(r)?;
        let (sa, sb) = r.outcome.score_pair();
        actual[r.a.0] += sa;
        actual[r.b.0] += sb;
        played[r.a.0] += 1;
        played[r.b.0] += 1;
    }
    for i in 0..n {
        if played[i] == 0 {
            continue;
        }
        let k = k_factor(table.games_played[i], cfg);
        table.ratings[i] += k * (actual[i] - expected[i]);
        table.scores[i] += actual[i];
        table.games_played[i] += played[i];
    }
    Ok(())
}

/// Eq.-1 style probability on raw strengths: `e^{f_i} / (e^{f_i} + e^{f_j})`.
fn bt_probability(f_i: f64, f_j: f64) -> f64 {
    let x = f_j - f_i;
    if x >= 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

fn ln_bt_probability(f_i: f64, f_j: f64) -> f64 {
    // log(sigmoid(d)) = -log(1 + e^{-d}), evaluated without overflow.
    let d = f_i - f_j;
    if d >= 0.0 {
        -(-d).exp().ln_1p()
    } else {
        d - d.exp().ln_1p()
    }
}

pub fn bt_log_likelihood(scores: &[f64], records: &[MatchRecord]) -> f64 {
    records
        .iter()
        .map(|r| {
            let (si, sj) = r.outcome.score_pair();
            let (fi, fj) = (scores[r.a.0], scores[r.b.0]);
            si * ln_bt_probability(fi, fj) + sj * ln_bt_probability(fj, fi)
        })
        .sum()
}

/// Full-batch gradient of [`bt_log_likelihood`]: each record adds
/// `s_i - P(i > j)` to `i` and `s_j - P(j > i)` to `j`.
pub fn bt_gradient(scores: &[f64], records: &[MatchRecord]) -> Vec<f64> {
    let mut grad = vec![0.0; scores.len()];
    for r in records {
        let (si, sj) = r.outcome.score_pair();
        let p = bt_probability(scores[r.a.0], scores[r.b.0]);
        grad[r.a.0] += si - p;
        grad[r.b.0] += sj - (1.0 - p);
    }
    grad
}

/// Fits raw Bradley–Terry strengths from zero with a fixed number of
/// full-batch ascent steps. No convergence test.
pub fn fit_bradley_terry(
    records: &[MatchRecord],
    n_items: usize,
    cfg: &BtFitConfig,
) -> Result<Vec<f64>> {
    if n_items < 2 {
        return Err(Error::InvalidPopulation(format!(
            "need at least 2 items, got {n_items}"
        )));
    }
    if let Some(r) = records
        .iter()
        .find(|r| r.a.0 >= n_items || r.b.0 >= n_items)
    {
        return Err(Error::Integrity {
            item: r.a.0.max(r.b.0),
            n_items,
        });
    }
    let mut scores = vec![0.0; n_items];
    if records.is_empty() {
        return Ok(scores);
    }
    for _ in 0..cfg.epochs {
        let grad = bt_gradient(&scores, records);
        for (s, g) in scores.iter_mut().zip(&grad) {
            *s += cfg.learning_rate * g;
        }
    }
    Ok(scores)
}

/// Affine map onto sample mean `target_mu` and sample sd `target_sigma`.
/// Constant input maps to `target_mu` everywhere.
pub fn rescale(scores: &[f64], target_mu: f64, target_sigma: f64) -> Vec<f64> {
    let n = scores.len();
    if n < 2 {
        return vec![target_mu; n];
    }
    let mean = scores.iter().sum::<f64>() / n as f64;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if !(sd > 0.0) || !sd.is_finite() {
        return vec![target_mu; n];
    }
    scores
        .iter()
        .map(|s| (s - mean) / sd * target_sigma + target_mu)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KCurve {
    pub k_values: Vec<f64>,
    /// `(rating_a - rating_b, change for each K)` after `a` wins.
    pub rows: Vec<(f64, Vec<f64>)>,
}

/// Rating gained by the winner, `K * (1 - E)`, over a grid of initial gaps.
pub fn k_curve(deltas: &[f64], k_values: &[f64], oracle: &OracleConfig) -> KCurve {
    let rows = deltas
        .iter()
        .map(|&d| {
            let e = win_probability(d, 0.0, oracle);
            (d, k_values.iter().map(|k| k * (1.0 - e)).collect())
        })
        .collect();
    KCurve {
        k_values: k_values.to_vec(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ItemId, Outcome};
    use proptest::prelude::*;

    fn rec(a: usize, b: usize, outcome: Outcome) -> MatchRecord {
        MatchRecord::new(ItemId(a), ItemId(b), outcome, 0)
    }

    #[test]
    fn k_factor_schedules() {
        let fixed = EloConfig::default();
        assert_eq!(k_factor(0, &fixed), 32.0);
        assert_eq!(k_factor(1000, &fixed), 32.0);
        let decay = fixed.with_schedule(KSchedule::Decay);
        assert_eq!(k_factor(0, &decay), 40.0);
        assert_eq!(k_factor(5, &decay), 20.0);
        assert_eq!(k_factor(20, &decay), 10.0);
        assert_eq!(k_factor(200, &decay), 10.0);
        let mut prev = f64::INFINITY;
        for g in 0..100 {
            let k = k_factor(g, &decay);
            assert!(k <= prev);
            prev = k;
        }
    }

    #[test]
    fn elo_config_validation() {
        assert!(EloConfig::default().validate().is_ok());
        let bad = EloConfig {
            k_min: 50.0,
            ..EloConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn single_upset_free_win() {
        let mut t = RatingTable::new(2, 1000.0);
        let round = [rec(0, 1, Outcome::WinA)];
        let e = expected_scores(&t, &round, &OracleConfig::default()).unwrap();
        assert_eq!(e, vec![0.5, 0.5]);
        batch_elo_update(&mut t, &round, &e, &EloConfig::default()).unwrap();
        assert_eq!(t.ratings, vec![1016.0, 984.0]);
        assert_eq!(t.scores, vec![1.0, 0.0]);
        assert_eq!(t.games_played, vec![1, 1]);
    }

    #[test]
    fn zero_surprise_leaves_rating() {
        let mut t = RatingTable::new(3, 1000.0);
        let round = [rec(0, 1, Outcome::Tie)];
        let e = expected_scores(&t, &round, &OracleConfig::default()).unwrap();
        batch_elo_update(&mut t, &round, &e, &EloConfig::default()).unwrap();
        assert_eq!(t.ratings, vec![1000.0; 3]);
        // Non-participant untouched.
        assert_eq!(t.games_played, vec![1, 1, 0]);
        assert_eq!(t.scores, vec![0.5, 0.5, 0.0]);
    }

    #[test]
    fn unknown_item_is_an_integrity_error() {
        let mut t = RatingTable::new(2, 1000.0);
        let round = [rec(0, 5, Outcome::WinA)];
        let err = batch_elo_update(&mut t, &round, &[0.5, 0.5], &EloConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Integrity { item: 5, .. }));
    }

    #[test]
    fn log_likelihood_basics() {
        assert_eq!(bt_log_likelihood(&[0.0, 0.0], &[]), 0.0);
        let ll = bt_log_likelihood(&[0.0, 0.0], &[rec(0, 1, Outcome::WinA)]);
        assert!((ll - 0.5f64.ln()).abs() < 1e-12);
        assert!((ll + std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn log_likelihood_matches_direct_sum() {
        let scores: [f64; 3] = [0.3, -0.2, 1.1];
        let recs = [
            rec(0, 1, Outcome::WinA),
            rec(1, 2, Outcome::Tie),
            rec(2, 0, Outcome::WinB),
            rec(0, 2, Outcome::WinB),
        ];
        // Written out independently: P(i>j) = e^fi / (e^fi + e^fj).
        let p = |i: usize, j: usize| scores[i].exp() / (scores[i].exp() + scores[j].exp());
        let expected =
            p(0, 1).ln() + 0.5 * p(1, 2).ln() + 0.5 * p(2, 1).ln() + p(0, 2).ln() + p(2, 0).ln();
        assert!((bt_log_likelihood(&scores, &recs) - expected).abs() < 1e-12);
    }

    #[test]
    fn fit_empty_records() {
        let s = fit_bradley_terry(&[], 4, &BtFitConfig::default()).unwrap();
        assert_eq!(s, vec![0.0; 4]);
    }

    #[test]
    fn fit_orders_dominant_item_first() {
        let recs: Vec<_> = (0..50).map(|_| rec(0, 1, Outcome::WinA)).collect();
        let s = fit_bradley_terry(&recs, 2, &BtFitConfig::default()).unwrap();
        // Coarse grid over (f0, f1) with f1 = 0 pinned: the likelihood only
        // increases with f0, so the best lattice point has f0 > f1.
        let best = (-20..=20)
            .map(|i| i as f64 * 0.5)
            .max_by(|a, b| {
                bt_log_likelihood(&[*a, 0.0], &recs)
                    .partial_cmp(&bt_log_likelihood(&[*b, 0.0], &recs))
                    .unwrap()
            })
            .unwrap();
        assert!(best > 0.0);
        assert!(s[0] > s[1]);
    }

    #[test]
    fn fit_is_symmetric_on_mirrored_records() {
        let recs = [rec(0, 1, Outcome::WinA), rec(0, 1, Outcome::WinB)];
        let s = fit_bradley_terry(&recs, 2, &BtFitConfig::default()).unwrap();
        assert!((s[0] - s[1]).abs() < 1e-9);
    }

    #[test]
    fn rescale_hits_targets() {
        let out = rescale(&[1.0, 2.0, 4.0, 8.0, -3.0], 1000.0, 200.0);
        let n = out.len() as f64;
        let mean = out.iter().sum::<f64>() / n;
        let sd = (out.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((mean - 1000.0).abs() < 1e-9);
        assert!((sd - 200.0).abs() < 1e-9);
        assert_eq!(rescale(&[3.0; 5], 1000.0, 200.0), vec![1000.0; 5]);
    }

    #[test]
    fn k_curve_is_monotone_per_k() {
        let deltas: Vec<f64> = (-80..=80).map(|i| i as f64 * 10.0).collect();
        let curve = k_curve(&deltas, &[10.0, 20.0, 32.0, 40.0], &OracleConfig::default());
        assert_eq!(curve.rows.len(), deltas.len());
        for k in 0..4 {
            for w in curve.rows.windows(2) {
                assert!(w[1].1[k] < w[0].1[k]);
            }
        }
        let zero = curve.rows.iter().find(|r| r.0 == 0.0).unwrap();
        assert_eq!(zero.1, vec![5.0, 10.0, 16.0, 20.0]);
    }

    fn arb_records(n: usize) -> impl Strategy<Value = Vec<MatchRecord>> {
        prop::collection::vec((0..n, 1..n, 0..3u8), 1..60).prop_map(move |v| {
            v.into_iter()
                .map(|(a, off, o)| {
                    let b = (a + off) % n;
                    let outcome = [Outcome::WinA, Outcome::Tie, Outcome::WinB][o as usize];
                    rec(a, b, outcome)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn batch_update_conserves_total_elo(
            ratings in prop::collection::vec(600.0f64..1400.0, 10),
            outcomes in prop::collection::vec(0..3u8, 5),
            ten_base in any::<bool>(),
        ) {
            let oracle = if ten_base {
                OracleConfig::default().with_base(crate::model::EloBase::Ten)
            } else {
                OracleConfig::default()
            };
            let mut t = RatingTable::new(10, 1000.0);
            t.ratings = ratings;
            let round: Vec<_> = outcomes
                .iter()
                .enumerate()
                .map(|(i, &o)| rec(2 * i, 2 * i + 1, [Outcome::WinA, Outcome::Tie, Outcome::WinB][o as usize]))
                .collect();
            let before: f64 = t.ratings.iter().sum();
            let e = expected_scores(&t, &round, &oracle).unwrap();
            batch_elo_update(&mut t, &round, &e, &EloConfig::default()).unwrap();
            let after: f64 = t.ratings.iter().sum();
            prop_assert!((before - after).abs() < 1e-9);
        }

        #[test]
        fn rescale_is_idempotent_and_order_preserving(
            xs in prop::collection::vec(-1e3f64..1e3, 2..40),
        ) {
            let once = rescale(&xs, 1000.0, 200.0);
            let twice = rescale(&once, 1000.0, 200.0);
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            for i in 0..xs.len() {
                for j in 0..xs.len() {
                    if xs[i] < xs[j] {
                        prop_assert!(once[i] <= once[j]);
                    }
                }
            }
        }

        #[test]
        fn gradient_matches_finite_differences(
            scores in prop::collection::vec(-2.0f64..2.0, 10),
            records in arb_records(10),
        ) {
            let grad = bt_gradient(&scores, &records);
            let h = 1e-5;
            for i in 0..scores.len() {
                let mut up = scores.clone();
                let mut dn = scores.clone();
                up[i] += h;
                dn[i] -= h;
                let fd = (bt_log_likelihood(&up, &records) - bt_log_likelihood(&dn, &records)) / (2.0 * h);
                let scale = fd.abs().max(grad[i].abs()).max(1e-3);
                prop_assert!((fd - grad[i]).abs() / scale < 1e-4, "item {}: fd {} vs {}", i, fd, grad[i]);
            }
        }
    }
}
