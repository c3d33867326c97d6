//! Simulated annotator: latent values in, win/tie/loss out.

use crate::model::{ItemId, LatentPopulation, OracleConfig, Outcome, RngStream};

/// Elo-style logistic win probability of `a` over `b`:
/// `1 / (1 + base^((r_b - r_a) / scale))`.
///
/// Used both by the annotator (on latent values) and by the rating engines
/// (on estimated ratings).
pub fn win_probability(r_a: f64, r_b: f64, cfg: &OracleConfig) -> f64 {
    let x = (r_b - r_a) / cfg.elo_scale * cfg.elo_base.ln();
    // Split by sign so the exponential never overflows.
    if x >= 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Probability that the annotator declares the two items equal.
pub fn tie_probability(v_a: f64, v_b: f64, cfg: &OracleConfig) -> f64 {
    cfg.tie_coefficient * (-(v_a - v_b).abs() / cfg.tie_sigma).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeDistribution {
    pub p_a_wins: f64,
    pub p_tie: f64,
    pub p_b_wins: f64,
}

impl OutcomeDistribution {
    pub fn total(&self) -> f64 {
        self.p_a_wins + self.p_tie + self.p_b_wins
    }
}

/// Tie mass first, the remainder split by the logistic win probability.
pub fn outcome_distribution(v_a: f64, v_b: f64, cfg: &OracleConfig) -> OutcomeDistribution {
    let p_tie = tie_probability(v_a, v_b, cfg);
    let rest = 1.0 - p_tie;
    let p_a_wins = rest * win_probability(v_a, v_b, cfg);
    // Taking the complement keeps the three parts summing to one exactly
    // up to a single rounding.
    let p_b_wins = rest - p_a_wins;
    OutcomeDistribution {
        p_a_wins,
        p_tie,
        p_b_wins,
    }
}

/// One categorical draw from [`outcome_distribution`]. Consumes exactly one
/// uniform from `rng`.
pub fn sample_outcome(v_a: f64, v_b: f64, cfg: &OracleConfig, rng: &mut RngStream) -> Outcome {
    let dist = outcome_distribution(v_a, v_b, cfg);
    let u = rng.uniform();
    if u < dist.p_a_wins {
        Outcome::WinA
    } else if u < dist.p_a_wins + dist.p_tie {
        Outcome::Tie
    } else {
        Outcome::WinB
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeCurveRow {
    pub delta: f64,
    pub p_win: f64,
    pub p_tie: f64,
    pub p_loss: f64,
}

/// Outcome probabilities as a function of the value gap `delta = v_a - v_b`.
pub fn outcome_curve(deltas: &[f64], cfg: &OracleConfig) -> Vec<OutcomeCurveRow> {
    deltas
        .iter()
        .map(|&delta| {
            let d = outcome_distribution(delta, 0.0, cfg);
            OutcomeCurveRow {
                delta,
                p_win: d.p_a_wins,
                p_tie: d.p_tie,
                p_loss: d.p_b_wins,
            }
        })
        .collect()
}

/// Annotator bound to one population and one stream. Counts every call so
/// that methods can be audited against their reported budget.
#[derive(Debug)]
pub struct Annotator<'a> {
    population: &'a LatentPopulation,
    cfg: OracleConfig,
    rng: RngStream,
    calls: usize,
}

impl<'a> Annotator<'a> {
    pub fn new(population: &'a LatentPopulation, cfg: OracleConfig, rng: RngStream) -> Self {
        Self {
            population,
            cfg,
            rng,
            calls: 0,
        }
    }

    pub fn compare(&mut self, a: ItemId, b: ItemId) -> Outcome {
        self.calls += 1;
        sample_outcome(
            self.population.value(a),
            self.population.value(b),
            &self.cfg,
            &mut self.rng,
        )
    }

    pub fn calls(&self) -> usize {
        self.calls
    }

    pub fn n_items(&self) -> usize {
        self.population.n_items()
    }

    pub fn config(&self) -> &OracleConfig {
        &self.cfg
    }

    /// The stream used for scheduling decisions as well as outcomes, so a
    /// method run is a single deterministic sequence of draws.
    pub fn rng(&mut self) -> &mut RngStream {
        &mut self.rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EloBase;
    use proptest::prelude::*;

    fn natural() -> OracleConfig {
        OracleConfig::default()
    }

    fn ten() -> OracleConfig {
        OracleConfig::default().with_base(EloBase::Ten)
    }

    #[test]
    fn even_match_is_a_coin_flip() {
        assert_eq!(win_probability(1000.0, 1000.0, &natural()), 0.5);
        assert_eq!(win_probability(1000.0, 1000.0, &ten()), 0.5);
    }

    #[test]
    fn four_hundred_points_base_ten() {
        let p = win_probability(1400.0, 1000.0, &ten());
        assert!((p - 0.909).abs() < 1e-3, "{p}");
    }

    #[test]
    fn four_hundred_points_natural() {
        let p = win_probability(1400.0, 1000.0, &natural());
        assert!((p - 1.0 / (1.0 + (-1.0f64).exp())).abs() < 1e-12);
        assert!((p - 0.7311).abs() < 1e-4);
    }

    #[test]
    fn base_ten_prose_percentages() {
        // 100 and 200 point gaps in base ten.
        let p100 = win_probability(1100.0, 1000.0, &ten());
        let p200 = win_probability(1200.0, 1000.0, &ten());
        assert!((p100 - 0.64).abs() < 0.01, "{p100}");
        assert!((p200 - 0.76).abs() < 0.01, "{p200}");
    }

    #[test]
    fn extreme_gaps_do_not_overflow() {
        assert_eq!(win_probability(1e9, 0.0, &ten()), 1.0);
        assert_eq!(win_probability(0.0, 1e9, &ten()), 0.0);
    }

    #[test]
    fn tie_probability_values() {
        assert_eq!(tie_probability(1000.0, 1000.0, &natural()), 1.0 / 3.0);
        let p = tie_probability(1000.0, 1200.0, &natural());
        assert!((p - (1.0 / 3.0) * (-1.0f64).exp()).abs() < 1e-15);
        assert!((p - 0.1226).abs() < 1e-4);
        assert!(tie_probability(0.0, 1e6, &natural()) < 1e-300);
    }

    #[test]
    fn equal_values_give_thirds() {
        let d = outcome_distribution(1000.0, 1000.0, &natural());
        for p in [d.p_a_wins, d.p_tie, d.p_b_wins] {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_hundred_point_gap_base_ten() {
        // Oracle: evaluate the tie term, then split the rest logistically.
        let tie = (1.0f64 / 3.0) * (-1.0f64).exp();
        let win = 1.0 / (1.0 + 10f64.powf(-0.5));
        let d = outcome_distribution(1200.0, 1000.0, &ten());
        assert!((d.p_tie - tie).abs() < 1e-12);
        assert!((d.p_a_wins - (1.0 - tie) * win).abs() < 1e-12);
        assert!((d.p_tie - 0.1226).abs() < 1e-4);
        assert!((d.p_a_wins - 0.6666).abs() < 1e-4);
        assert!((d.p_b_wins - 0.2108).abs() < 1e-4);
    }

    #[test]
    fn lopsided_pair_is_almost_always_won() {
        let cfg = ten();
        let mut rng = RngStream::new(11);
        let wins = (0..10_000)
            .filter(|_| sample_outcome(1e6 + 1000.0, 1000.0, &cfg, &mut rng) == Outcome::WinA)
            .count();
        assert!(wins as f64 / 1e4 > 0.99);
    }

    #[test]
    fn equal_pair_frequencies() {
        let cfg = natural();
        let mut rng = RngStream::new(12);
        let mut counts = [0usize; 3];
        for _ in 0..10_000 {
            match sample_outcome(1000.0, 1000.0, &cfg, &mut rng) {
                Outcome::WinA => counts[0] += 1,
                Outcome::Tie => counts[1] += 1,
                Outcome::WinB => counts[2] += 1,
            }
        }
        for c in counts {
            assert!((c as f64 / 1e4 - 1.0 / 3.0).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn sampling_replays() {
        let cfg = natural();
        let draw = |seed| {
            let mut rng = RngStream::new(seed);
            (0..100)
                .map(|i| sample_outcome(1000.0 + i as f64, 1050.0, &cfg, &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(4), draw(4));
    }

    #[test]
    fn curve_shape() {
        let deltas: Vec<f64> = (-200..=200).map(|i| i as f64 * 10.0).collect();
        for cfg in [natural(), ten()] {
            let rows = outcome_curve(&deltas, &cfg);
            let zero = rows.iter().find(|r| r.delta == 0.0).unwrap();
            assert!((zero.p_win - 1.0 / 3.0).abs() < 1e-15);
            assert!((zero.p_tie - 1.0 / 3.0).abs() < 1e-15);
            for r in &rows {
                assert!((r.p_win + r.p_tie + r.p_loss - 1.0).abs() < 1e-12);
            }
        }
        // Base ten: the tie term decays more slowly than an upset, so past
        // roughly 1450 points a tie is likelier than a loss.
        let rows = outcome_curve(&deltas, &ten());
        let crossing: Vec<f64> = rows
            .iter()
            .filter(|r| r.p_tie > r.p_loss && r.p_win > r.p_tie && r.p_win > r.p_loss)
            .map(|r| r.delta)
            .collect();
        assert!(!crossing.is_empty());
        assert!(crossing.iter().all(|&d| d > 1400.0));
        // Oracle for the crossing point: (1/3) e^(-d/200) = 10^(-d/400).
        let d_star = 3f64.ln() / (10f64.ln() / 400.0 - 1.0 / 200.0);
        assert!(
            (crossing[0] - d_star).abs() <= 10.0,
            "{} vs {d_star}",
            crossing[0]
        );
    }

    #[test]
    fn natural_base_ties_never_beat_upsets() {
        let deltas: Vec<f64> = (1..=300).map(|i| i as f64 * 10.0).collect();
        for r in outcome_curve(&deltas, &natural()) {
            assert!(r.p_tie < r.p_loss, "{r:?}");
        }
    }

    #[test]
    fn natural_base_dip() {
        let cfg = natural();
        let at = |d: f64| outcome_distribution(d, 0.0, &cfg).p_a_wins;
        assert!(at(-40.0) > at(0.0));
        assert!(at(-200.0) < at(-40.0));
    }

    #[test]
    fn annotator_counts_calls() {
        let pop = LatentPopulation::from_values(vec![900.0, 1100.0], 1000.0, 200.0).unwrap();
        let mut ann = Annotator::new(&pop, natural(), RngStream::new(1));
        for _ in 0..7 {
            ann.compare(ItemId(0), ItemId(1));
        }
        assert_eq!(ann.calls(), 7);
    }

    proptest! {
        #[test]
        fn distribution_normalized_and_symmetric(
            va in -5000.0f64..5000.0,
            vb in -5000.0f64..5000.0,
            ten_base in any::<bool>(),
        ) {
            let cfg = if ten_base { ten() } else { natural() };
            let d = outcome_distribution(va, vb, &cfg);
            prop_assert!((d.total() - 1.0).abs() < 1e-12);
            prop_assert!(d.p_a_wins >= 0.0 && d.p_tie >= 0.0 && d.p_b_wins >= 0.0);
            let r = outcome_distribution(vb, va, &cfg);
            prop_assert!((d.p_a_wins - r.p_b_wins).abs() < 1e-12);
            prop_assert!((d.p_b_wins - r.p_a_wins).abs() < 1e-12);
            prop_assert_eq!(d.p_tie, r.p_tie);
            let sum = win_probability(va, vb, &cfg) + win_probability(vb, va, &cfg);
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }

        // Holds in base ten only: in base e the tie term rises faster than the
        // logistic term on roughly [-86, 0], see `natural_base_dip`.
        #[test]
        fn win_share_monotone_in_gap(
            d1 in -3000.0f64..3000.0,
            step in 0.0f64..500.0,
        ) {
            let cfg = ten();
            let lo = outcome_distribution(d1, 0.0, &cfg);
            let hi = outcome_distribution(d1 + step, 0.0, &cfg);
            prop_assert!(hi.p_a_wins >= lo.p_a_wins - 1e-15);
        }
    }
}
