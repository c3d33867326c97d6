//! The eight end-to-end methods: each one spends comparisons from an
//! [`Annotator`] and returns estimated values plus the comparison count.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{ItemId, LatentPopulation, MatchRecord, OracleConfig, RatingTable, RngStream};
use crate::oracle::Annotator;
use crate::rating::{
    batch_elo_update, expected_scores, fit_bradley_terry, rescale, BtFitConfig, EloConfig,
    KSchedule,
};
use crate::schedule::{
    copeland_schedule, infogain_pairing, random_pairing, swiss_pairing, PairHistory, Pairing,
};

/// Reporting scale for the non-Elo methods.
pub const REPORT_MU: f64 = 1000.0;
pub const REPORT_SIGMA: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodKind {
    BradleyTerry,
    BordaRnd,
    BordaCopeland,
    EloRnd,
    EloCopeland,
    Swiss,
    RndSwiss,
    SwissInfoGain,
}

impl MethodKind {
    pub const ALL: [MethodKind; 8] = [
        MethodKind::BradleyTerry,
        MethodKind::BordaRnd,
        MethodKind::BordaCopeland,
        MethodKind::EloRnd,
        MethodKind::EloCopeland,
        MethodKind::Swiss,
        MethodKind::RndSwiss,
        MethodKind::SwissInfoGain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::BradleyTerry => "bradley_terry",
            MethodKind::BordaRnd => "borda_rnd",
            MethodKind::BordaCopeland => "borda_copeland",
            MethodKind::EloRnd => "elo_rnd",
            MethodKind::EloCopeland => "elo_copeland",
            MethodKind::Swiss => "swiss",
            MethodKind::RndSwiss => "rnd_swiss",
            MethodKind::SwissInfoGain => "swiss_infogain",
        }
    }

    /// Stable stream tag; never renumber.
    pub fn tag(self) -> u64 {
        match self {
            MethodKind::BradleyTerry => 1,
            MethodKind::BordaRnd => 2,
            MethodKind::BordaCopeland => 3,
            MethodKind::EloRnd => 4,
            MethodKind::EloCopeland => 5,
            MethodKind::Swiss => 6,
            MethodKind::RndSwiss => 7,
            MethodKind::SwissInfoGain => 8,
        }
    }

    pub fn is_copeland(self) -> bool {
        matches!(self, MethodKind::BordaCopeland | MethodKind::EloCopeland)
    }

    /// Methods that stop on their own rather than at a requested budget.
    pub fn is_natural_budget(self) -> bool {
        matches!(self, MethodKind::Swiss | MethodKind::SwissInfoGain)
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace(['-', '+'], "_");
        MethodKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Rnd,
    Copeland,
}

/// One method with its hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodSpec {
    BradleyTerry {
        redundancy: f64,
        fit: BtFitConfig,
    },
    Borda {
        sampling: Sampling,
        /// Random rounds, or full round robins for Copeland.
        rounds: usize,
    },
    Elo {
        sampling: Sampling,
        rounds: usize,
        elo: EloConfig,
    },
    Swiss {
        r_max: usize,
        elo: EloConfig,
    },
    RndSwiss {
        r_rnd: usize,
        r_swiss: usize,
        elo: EloConfig,
    },
    SwissInfoGain {
        r_max: usize,
        elo: EloConfig,
        ig_epsilon: f64,
    },
}

impl MethodSpec {
    pub fn kind(&self) -> MethodKind {
        match self {
            MethodSpec::BradleyTerry { .. } => MethodKind::BradleyTerry,
            MethodSpec::Borda {
                sampling: Sampling::Rnd,
                ..
            } => MethodKind::BordaRnd,
            MethodSpec::Borda {
                sampling: Sampling::Copeland,
                ..
            } => MethodKind::BordaCopeland,
            MethodSpec::Elo {
                sampling: Sampling::Rnd,
                ..
            } => MethodKind::EloRnd,
            MethodSpec::Elo {
                sampling: Sampling::Copeland,
                ..
            } => MethodKind::EloCopeland,
            MethodSpec::Swiss { .. } => MethodKind::Swiss,
            MethodSpec::RndSwiss { .. } => MethodKind::RndSwiss,
            MethodSpec::SwissInfoGain { .. } => MethodKind::SwissInfoGain,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MethodSpec::BradleyTerry { redundancy, fit } => {
                if !(*redundancy > 0.0) || !redundancy.is_finite() {
                    return Err(Error::config_key("redundancy", None, "must be > 0"));
                }
                fit.validate()
            }
            MethodSpec::Borda { .. } => Ok(()),
            MethodSpec::Elo { elo, .. } | MethodSpec::RndSwiss { elo, .. } => elo.validate(),
            MethodSpec::Swiss { r_max, elo } => {
                if *r_max == 0 {
                    return Err(Error::config_key("swiss_r_max", None, "must be >= 1"));
                }
                elo.validate()
            }
            MethodSpec::SwissInfoGain {
                r_max,
                elo,
                ig_epsilon,
            } => {
                if *r_max == 0 {
                    return Err(Error::config_key("infogain_r_max", None, "must be >= 1"));
                }
                if !(0.0..0.25).contains(ig_epsilon) {
                    return Err(Error::config_key(
                        "ig_epsilon",
                        None,
                        "must lie in [0, 0.25)",
                    ));
                }
                elo.validate()
            }
        }
    }
}

/// Shared hyperparameters from which calibrated specs are built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodParams {
    /// Fixed-K Elo settings; Swiss InfoGain switches the schedule to decay.
    pub elo: EloConfig,
    pub fit: BtFitConfig,
    pub ig_epsilon: f64,
    pub swiss_r_max: usize,
    /// `None` caps Swiss InfoGain at `N / 2` rounds.
    pub infogain_r_max: Option<usize>,
}

impl Default for MethodParams {
    fn default() -> Self {
        Self {
            elo: EloConfig::default(),
            fit: BtFitConfig::default(),
            ig_epsilon: 0.05,
            swiss_r_max: 200,
            infogain_r_max: None,
        }
    }
}

/// Round-based methods: `round(budget / floor(N/2))`, at least one round.
pub fn rounds_for_budget(budget: usize, n_items: usize) -> usize {
    let per_round = (n_items / 2).max(1);
    ((budget as f64 / per_round as f64).round() as usize).max(1)
}

/// Bradley–Terry redundancy giving `budget` comparisons: `c = 2M / N`.
pub fn redundancy_for_budget(budget: usize, n_items: usize) -> f64 {
    2.0 * budget as f64 / n_items as f64
}

pub fn round_robin_size(n_items: usize) -> usize {
    n_items * (n_items - 1) / 2
}

impl MethodSpec {
    /// Spec for `kind` spending roughly `budget` comparisons on `n_items`.
    /// Copeland methods round to whole round robins; Swiss and Swiss InfoGain
    /// ignore the budget and run until they stop.
    pub fn calibrated(
        kind: MethodKind,
        budget: usize,
        n_items: usize,
        params: &MethodParams,
    ) -> Self {
        let elo = params.elo.with_schedule(KSchedule::Fixed);
        match kind {
            MethodKind::BradleyTerry => MethodSpec::BradleyTerry {
                redundancy: redundancy_for_budget(budget, n_items),
                fit: params.fit,
            },
            MethodKind::BordaRnd => MethodSpec::Borda {
                sampling: Sampling::Rnd,
                rounds: rounds_for_budget(budget, n_items),
            },
            MethodKind::BordaCopeland => MethodSpec::Borda {
                sampling: Sampling::Copeland,
                rounds: robins_for_budget(budget, n_items),
            },
            MethodKind::EloRnd => MethodSpec::Elo {
                sampling: Sampling::Rnd,
                rounds: rounds_for_budget(budget, n_items),
                elo,
            },
            MethodKind::EloCopeland => MethodSpec::Elo {
                sampling: Sampling::Copeland,
                rounds: robins_for_budget(budget, n_items),
                elo,
            },
            MethodKind::Swiss => MethodSpec::Swiss {
                r_max: params.swiss_r_max,
                elo,
            },
            MethodKind::RndSwiss => {
                let total = rounds_for_budget(budget, n_items);
                let r_rnd = total.div_ceil(2);
                MethodSpec::RndSwiss {
                    r_rnd,
                    r_swiss: total - r_rnd,
                    elo,
                }
            }
            MethodKind::SwissInfoGain => MethodSpec::SwissInfoGain {
                r_max: params.infogain_r_max.unwrap_or(n_items / 2).max(1),
                elo: params.elo.with_schedule(KSchedule::Decay),
                ig_epsilon: params.ig_epsilon,
            },
        }
    }
}

fn robins_for_budget(budget: usize, n_items: usize) -> usize {
    let per = round_robin_size(n_items).max(1);
    ((budget as f64 / per as f64).round() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub method: MethodKind,
    /// Rescaled to 1000/200 for non-Elo methods, raw ratings for Elo methods.
    pub estimated: Vec<f64>,
    pub m_comparisons: usize,
    pub rounds_run: usize,
    pub records: Vec<MatchRecord>,
    pub seed: u64,
    /// Annotator calls observed while running; always equals `m_comparisons`.
    pub oracle_calls: usize,
}

impl SimulationResult {
    fn finish(
        method: MethodKind,
        estimated: Vec<f64>,
        rounds_run: usize,
        records: Vec<MatchRecord>,
        seed: u64,
        annotator: &Annotator<'_>,
    ) -> Self {
        Self {
            method,
            estimated,
            m_comparisons: records.len(),
            rounds_run,
            records,
            seed,
            oracle_calls: annotator.calls(),
        }
    }

    /// Same comparisons in the same order with the same estimates.
    pub fn same_trace(&self, other: &SimulationResult) -> bool {
        self.records == other.records
            && self.estimated == other.estimated
            && self.m_comparisons == other.m_comparisons
            && self.rounds_run == other.rounds_run
    }
}

fn all_items(n: usize) -> Vec<ItemId> {
    (0..n).map(ItemId).collect()
}

fn annotate(pairing: &Pairing, round: usize, ann: &mut Annotator<'_>) -> Vec<MatchRecord> {
    pairing
        .pairs
        .iter()
        .map(|&(a, b)| MatchRecord::new(a, b, ann.compare(a, b), round))
        .collect()
}

/// Annotates one pairing and applies a batch Elo update from the pre-round
/// ratings.
fn play_elo_round(
    table: &mut RatingTable,
    pairing: &Pairing,
    round: usize,
    ann: &mut Annotator<'_>,
    elo: &EloConfig,
    records: &mut Vec<MatchRecord>,
) -> Result<()> {
    let played = annotate(pairing, round, ann);
    let expected = expected_scores(table, &played, ann.config())?;
    batch_elo_update(table, &played, &expected, elo)?;
    records.extend(played);
    Ok(())
}

pub fn run_bradley_terry(
    pop: &LatentPopulation,
    redundancy: f64,
    fit: &BtFitConfig,
    oracle: &OracleConfig,
    rng: RngStream,
) -> Result<SimulationResult> {
    if !(redundancy > 0.0) {
        return Err(Error::config_key("redundancy", None, "must be > 0"));
    }
    let n = pop.n_items();
    let seed = rng.seed();
    let mut ann = Annotator::new(pop, *oracle, rng);
    let budget = (redundancy * n as f64 / 2.0).round() as usize;
    let mut records = Vec::with_capacity(budget);
    for _ in 0..budget {
        let a = ann.rng().below(n);
        let mut b = ann.rng().below(n - 1);
        if b >= a {
            b += 1;
        }
        let (a, b) = (ItemId(a), ItemId(b));
        records.push(MatchRecord::new(a, b, ann.compare(a, b), 0));
    }
    let raw = fit_bradley_terry(&records, n, fit)?;
    let estimated = rescale(&raw, REPORT_MU, REPORT_SIGMA);
    Ok(SimulationResult::finish(
        MethodKind::BradleyTerry,
        estimated,
        usize::from(budget > 0),
        records,
        seed,
        &ann,
    ))
}

/// Wins (ties as half) under random matchings or full round robins.
pub fn run_borda(
    pop: &LatentPopulation,
    rounds: usize,
    sampling: Sampling,
    oracle: &OracleConfig,
    rng: RngStream,
) -> Result<SimulationResult> {
    let n = pop.n_items();
    let seed = rng.seed();
    let mut ann = Annotator::new(pop, *oracle, rng);
    let items = all_items(n);
    let robin = match sampling {
        Sampling::Copeland => copeland_schedule(n)?,
        Sampling::Rnd => Vec::new(),
    };
    let mut wins = vec![0.0; n];
    let mut records = Vec::new();
    let mut round = 0;
    for _ in 0..rounds {
        let pairings = match sampling {
            Sampling::Rnd => vec![random_pairing(&items, ann.rng())?],
            Sampling::Copeland => robin.clone(),
        };
        for pairing in &pairings {
            for r in annotate(pairing, round, &mut ann) {
                let (sa, sb) = r.outcome.score_pair();
                wins[r.a.0] += sa;
                wins[r.b.0] += sb;
                records.push(r);
            }
            round += 1;
        }
    }
    let kind = match sampling {
        Sampling::Rnd => MethodKind::BordaRnd,
        Sampling::Copeland => MethodKind::BordaCopeland,
    };
    let estimated = rescale(&wins, REPORT_MU, REPORT_SIGMA);
    Ok(SimulationResult::finish(
        kind, estimated, round, records, seed, &ann,
    ))
}

fn random_elo_rounds(
    table: &mut RatingTable,
    rounds: usize,
    ann: &mut Annotator<'_>,
    elo: &EloConfig,
    records: &mut Vec<MatchRecord>,
) -> Result<()> {
    let items = all_items(table.len());
    for round in 0..rounds {
        let pairing = random_pairing(&items, ann.rng())?;
        play_elo_round(table, &pairing, round, ann, elo, records)?;
    }
    Ok(())
}

/// Elo from 1000 with one batch update per round. For Copeland sampling each
/// of `rounds` is a full round robin, updated after every circle round.
pub fn run_elo(
    pop: &LatentPopulation,
    rounds: usize,
    sampling: Sampling,
    elo: &EloConfig,
    oracle: &OracleConfig,
    rng: RngStream,
) -> Result<SimulationResult> {
    let n = pop.n_items();
    let seed = rng.seed();
    let mut ann = Annotator::new(pop, *oracle, rng);
    let mut table = RatingTable::new(n, elo.initial_rating);
    let mut records = Vec::new();
    let (kind, rounds_run) = match sampling {
        Sampling::Rnd => {
            random_elo_rounds(&mut table, rounds, &mut ann, elo, &mut records)?;
            (MethodKind::EloRnd, rounds)
        }
        Sampling::Copeland => {
            let robin = copeland_schedule(n)?;
            let mut round = 0;
            for _ in 0..rounds {
                for pairing in &robin {
                    play_elo_round(&mut table, pairing, round, &mut ann, elo, &mut records)?;
                    round += 1;
                }
            }
            (MethodKind::EloCopeland, round)
        }
    };
    Ok(SimulationResult::finish(
        kind,
        table.ratings,
        rounds_run,
        records,
        seed,
        &ann,
    ))
}

fn has_shared_rating(table: &RatingTable) -> bool {
    let mut sorted = table.ratings.clone();
    sorted.sort_by(f64::total_cmp);
    sorted.windows(2).any(|w| w[0] == w[1])
}

/// Swiss rounds on cumulative score, at most `cap` of them. Stops early when
/// the pairing comes back empty. If the phase starts with at least two items
/// on the same rating it also stops once every rating is distinct: at that
/// point no two items are tied on the running estimate any more.
fn swiss_phase(
    table: &mut RatingTable,
    cap: usize,
    first_round: usize,
    ann: &mut Annotator<'_>,
    elo: &EloConfig,
    records: &mut Vec<MatchRecord>,
) -> Result<usize> {
    let stop_when_separated = has_shared_rating(table);
    let mut played = 0;
    while played < cap {
        if stop_when_separated && !has_shared_rating(table) {
            break;
        }
        let pairing = swiss_pairing(table, ann.rng());
        if pairing.is_empty() {
            break;
        }
        play_elo_round(table, &pairing, first_round + played, ann, elo, records)?;
        played += 1;
    }
    Ok(played)
}

pub fn run_swiss(
    pop: &LatentPopulation,
    r_max: usize,
    elo: &EloConfig,
    oracle: &OracleConfig,
    rng: RngStream,
) -> Result<SimulationResult> {
    let seed = rng.seed();
    let mut ann = Annotator::new(pop, *oracle, rng);
    let mut table = RatingTable::new(pop.n_items(), elo.initial_rating);
    let mut records = Vec::new();
    let rounds = swiss_phase(&mut table, r_max, 0, &mut ann, elo, &mut records)?;
    Ok(SimulationResult::finish(
        MethodKind::Swiss,
        table.ratings,
        rounds,
        records,
        seed,
        &ann,
    ))
}

/// `r_rnd` random Elo rounds, then up to `r_swiss` Swiss rounds keyed on the
/// score accumulated so far.
pub fn run_rnd_swiss(
    pop: &LatentPopulation,
    r_rnd: usize,
    r_swiss: usize,
    elo: &EloConfig,
    oracle: &OracleConfig,
    rng: RngStream,
) -> Result<SimulationResult> {
    let seed = rng.seed();
    let mut ann = Annotator::new(pop, *oracle, rng);
    let mut table = RatingTable::new(pop.n_items(), elo.initial_rating);
    let mut records = Vec::new();
    random_elo_rounds(&mut table, r_rnd, &mut ann, elo, &mut records)?;
    let swiss_rounds = swiss_phase(&mut table, r_swiss, r_rnd, &mut ann, elo, &mut records)?;
    Ok(SimulationResult::finish(
        MethodKind::RndSwiss,
        table.ratings,
        r_rnd + swiss_rounds,
        records,
        seed,
        &ann,
    ))
}

/// Swiss tournament with information-gain pairing. No pair is ever compared
/// twice; the first round is a uniform random matching because every rating
/// starts equal.
pub fn run_swiss_infogain(
    pop: &LatentPopulation,
    r_max: usize,
    elo: &EloConfig,
    ig_epsilon: f64,
    oracle: &OracleConfig,
    rng: RngStream,
) -> Result<SimulationResult> {
    if !(0.0..0.25).contains(&ig_epsilon) {
        return Err(Error::config_key(
            "ig_epsilon",
            None,
            "must lie in [0, 0.25)",
        ));
    }
    let seed = rng.seed();
    let mut ann = Annotator::new(pop, *oracle, rng);
    let mut table = RatingTable::new(pop.n_items(), elo.initial_rating);
    let mut history = PairHistory::new();
    let mut records = Vec::new();
    let mut rounds = 0;
    while rounds < r_max {
        let pairing = infogain_pairing(&table, &history, oracle, ig_epsilon, ann.rng());
        if pairing.is_empty() {
            break;
        }
        for &(a, b) in &pairing.pairs {
            history.insert(a, b);
        }
        play_elo_round(&mut table, &pairing, rounds, &mut ann, elo, &mut records)?;
        rounds += 1;
    }
    Ok(SimulationResult::finish(
        MethodKind::SwissInfoGain,
        table.ratings,
        rounds,
        records,
        seed,
        &ann,
    ))
}

/// Runs `spec` on a stream derived from `seed` and the method's tag.
pub fn run_method(
    spec: &MethodSpec,
    pop: &LatentPopulation,
    oracle: &OracleConfig,
    seed: u64,
) -> Result<SimulationResult> {
    spec.validate()?;
    let rng = RngStream::new(seed).child(&[spec.kind().tag()]);
    match spec {
        MethodSpec::BradleyTerry { redundancy, fit } => {
            run_bradley_terry(pop, *redundancy, fit, oracle, rng)
        }
        MethodSpec::Borda { sampling, rounds } => run_borda(pop, *rounds, *sampling, oracle, rng),
        MethodSpec::Elo {
            sampling,
            rounds,
            elo,
        } => run_elo(pop, *rounds, *sampling, elo, oracle, rng),
        MethodSpec::Swiss { r_max, elo } => run_swiss(pop, *r_max, elo, oracle, rng),
        MethodSpec::RndSwiss {
            r_rnd,
            r_swiss,
            elo,
        } => run_rnd_swiss(pop, *r_rnd, *r_swiss, elo, oracle, rng),
        MethodSpec::SwissInfoGain {
            r_max,
            elo,
            ig_epsilon,
        } => run_swiss_infogain(pop, *r_max, elo, *ig_epsilon, oracle, rng),
    }
}
