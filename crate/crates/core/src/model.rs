//! Shared domain types and the seeded random-number contract.
//!
//! Every random draw in a simulation goes through an [`RngStream`]. A stream is
//! a ChaCha8 generator keyed by a 64-bit seed; child streams are derived with
//! [`derive_seed`], which folds each component into the parent seed with the
//! SplitMix64 finalizer. The experiment runner derives one stream per
//! `(base_seed, seed_index, purpose)` so that reordering or removing a method
//! never shifts another method's draws.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Dense index of an item in `[0, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemId(pub usize);

impl ItemId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Hidden true values of the items. Never mutated after sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentPopulation {
    values: Vec<f64>,
    mu: f64,
    sigma: f64,
}

impl LatentPopulation {
    pub fn from_values(values: Vec<f64>, mu: f64, sigma: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidPopulation(format!(
                "need at least 2 items, got {}",
                values.len()
            )));
        }
        Ok(Self { values, mu, sigma })
    }

    pub fn n_items(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, item: ItemId) -> f64 {
        self.values[item.0]
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Draws `n_items` i.i.d. normal latent values.
pub fn sample_population(
    n_items: usize,
    mu: f64,
    sigma: f64,
    rng: &mut RngStream,
) -> Result<LatentPopulation> {
    if n_items < 2 {
        return Err(Error::InvalidPopulation(format!(
            "need at least 2 items, got {n_items}"
        )));
    }
    if !(sigma >= 0.0) || !mu.is_finite() || !sigma.is_finite() {
        return Err(Error::InvalidPopulation(format!(
            "need finite mu and sigma >= 0, got mu={mu}, sigma={sigma}"
        )));
    }
    let normal = Normal::new(mu, sigma).map_err(|e| Error::InvalidPopulation(e.to_string()))?;
    let values = (0..n_items).map(|_| normal.sample(rng)).collect();
    LatentPopulation::from_values(values, mu, sigma)
}

/// Three-way result of a comparison between items `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    WinA,
    Tie,
    WinB,
}

impl Outcome {
    /// Tournament points awarded to `(a, b)`.
    pub fn score_pair(self) -> (f64, f64) {
        match self {
            Outcome::WinA => (1.0, 0.0),
            Outcome::Tie => (0.5, 0.5),
            Outcome::WinB => (0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchRecord {
    pub a: ItemId,
    pub b: ItemId,
    pub outcome: Outcome,
    pub round: usize,
}

impl MatchRecord {
    pub fn new(a: ItemId, b: ItemId, outcome: Outcome, round: usize) -> Self {
        debug_assert_ne!(a, b, "an item cannot be compared with itself");
        Self {
            a,
            b,
            outcome,
            round,
        }
    }
}

/// Per-item estimate state shared by the rating engines.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingTable {
    /// Estimated value (Elo points, or a rescaled score).
    pub ratings: Vec<f64>,
    /// Cumulative tournament score: win 1, tie 0.5, loss 0.
    pub scores: Vec<f64>,
    pub games_played: Vec<u32>,
}

impl RatingTable {
    pub fn new(n_items: usize, initial_rating: f64) -> Self {
        Self {
            ratings: vec![initial_rating; n_items],
            scores: vec![0.0; n_items],
            games_played: vec![0; n_items],
        }
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }

    pub fn items(&self) -> impl Iterator<Item = ItemId> {
        (0..self.len()).map(ItemId)
    }

    pub fn check_record(&self, record: &MatchRecord) -> Result<()> {
        for item in [record.a, record.b] {
            if item.0 >= self.len() {
                return Err(Error::Integrity {
                    item: item.0,
                    n_items: self.len(),
                });
            }
        }
        if record.a == record.b {
            return Err(Error::Invariant(format!(
                "record pairs item {} with itself",
                record.a
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EloBase {
    /// `e`, as the expected-score formula is printed.
    #[default]
    Natural,
    /// `10`, the chess convention behind the usual "400 points ≈ 91%" rule.
    Ten,
}

impl EloBase {
    pub fn ln(self) -> f64 {
        match self {
            EloBase::Natural => 1.0,
            EloBase::Ten => std::f64::consts::LN_10,
        }
    }
}

impl FromStr for EloBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "natural" | "e" => Ok(EloBase::Natural),
            "ten" | "10" => Ok(EloBase::Ten),
            other => Err(Error::config(format!(
                "unknown elo base `{other}` (expected `natural` or `ten`)"
            ))),
        }
    }
}

impl fmt::Display for EloBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EloBase::Natural => "natural",
            EloBase::Ten => "ten",
        })
    }
}

/// Parameters of the simulated annotator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub elo_scale: f64,
    pub elo_base: EloBase,
    pub tie_coefficient: f64,
    pub tie_sigma: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            elo_scale: 400.0,
            elo_base: EloBase::Natural,
            tie_coefficient: 1.0 / 3.0,
            tie_sigma: 200.0,
        }
    }
}

impl OracleConfig {
    pub fn with_base(mut self, base: EloBase) -> Self {
        self.elo_base = base;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.elo_scale > 0.0) {
            return Err(Error::config_key("elo_scale", None, "must be > 0"));
        }
        if !(0.0..=1.0 / 3.0 + 1e-15).contains(&self.tie_coefficient) {
            return Err(Error::config_key(
                "tie_coefficient",
                None,
                "must lie in [0, 1/3]",
            ));
        }
        if !(self.tie_sigma > 0.0) {
            return Err(Error::config_key("tie_sigma", None, "must be > 0"));
        }
        Ok(())
    }
}

/// Splits a parent seed into a child seed, one component at a time.
///
/// Each component is added to the running state with the golden-ratio
/// increment and then passed through the SplitMix64 finalizer, so
/// `derive_seed(s, &[a, b]) != derive_seed(s, &[b, a])` in general.
pub fn derive_seed(parent: u64, components: &[u64]) -> u64 {
    components.iter().fold(parent, |state, &c| {
        splitmix64(
            state.wrapping_add(c.wrapping_mul(0x9E37_79B9_7F4A_7C15)) ^ 0xD1B5_4A32_D192_ED03,
        )
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded ChaCha8 stream. Identical seeds give identical draw sequences.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// A fresh stream keyed by this stream's seed and `components`.
    /// Does not advance `self`.
    pub fn child(&self, components: &[u64]) -> RngStream {
        RngStream::new(derive_seed(self.seed, components))
    }

    /// Uniform draw from `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform index in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        use rand::seq::SliceRandom;
        slice.shuffle(&mut self.inner);
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
