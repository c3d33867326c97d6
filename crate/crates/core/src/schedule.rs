//! Pair generation: random matching, circle-method round robin, Swiss
//! score-group pairing and greedy information-gain matching.

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::model::{ItemId, OracleConfig, RatingTable, RngStream};
use crate::oracle::win_probability;

/// One round of pairs. No item appears twice across `pairs` and `byes`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pairing {
    pub pairs: Vec<(ItemId, ItemId)>,
    pub byes: Vec<ItemId>,
}

impl Pairing {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Checks that every item is used at most once and no pair is degenerate.
    pub fn is_valid(&self) -> bool {
        let mut seen = HashSet::new();
        self.pairs
            .iter()
            .all(|&(a, b)| a != b && seen.insert(a) && seen.insert(b))
            && self.byes.iter().all(|&x| seen.insert(x))
    }
}

/// Unordered pairs already compared.
#[derive(Debug, Clone, Default)]
pub struct PairHistory {
    played: HashSet<(ItemId, ItemId)>,
}

impl PairHistory {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(a: ItemId, b: ItemId) -> (ItemId, ItemId) {
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn insert(&mut self, a: ItemId, b: ItemId) -> bool {
        self.played.insert(Self::key(a, b))
    }

    pub fn contains(&self, a: ItemId, b: ItemId) -> bool {
        self.played.contains(&Self::key(a, b))
    }

    pub fn len(&self) -> usize {
        self.played.len()
    }

    pub fn is_empty(&self) -> bool {
        self.played.is_empty()
    }
}

/// Shuffle, then pair neighbours. An odd item out gets the bye.
pub fn random_pairing(items: &[ItemId], rng: &mut RngStream) -> Result<Pairing> {
    if items.len() < 2 {
        return Err(Error::EmptyPairing(items.len()));
    }
    let mut order = items.to_vec();
    rng.shuffle(&mut order);
    let pairs = order.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    let byes = order.chunks_exact(2).remainder().to_vec();
    Ok(Pairing { pairs, byes })
}

/// Circle-method round robin. Item 0 stays fixed while the others rotate;
/// odd `n_items` gets a phantom slot whose partner sits out.
pub fn copeland_schedule(n_items: usize) -> Result<Vec<Pairing>> {
    if n_items < 2 {
        return Err(Error::EmptyPairing(n_items));
    }
    let slots = n_items + n_items % 2;
    let phantom = (n_items % 2 == 1).then_some(n_items);
    let mut ring: Vec<usize> = (0..slots).collect();
    let mut rounds = Vec::with_capacity(slots - 1);
    for _ in 0..slots - 1 {
        let mut pairing = Pairing::default();
        for i in 0..slots / 2 {
            let (a, b) = (ring[i], ring[slots - 1 - i]);
            match phantom {
                Some(p) if a == p => pairing.byes.push(ItemId(b)),
                Some(p) if b == p => pairing.byes.push(ItemId(a)),
                _ => pairing.pairs.push((ItemId(a), ItemId(b))),
            }
        }
        rounds.push(pairing);
        ring[1..].rotate_right(1);
    }
    Ok(rounds)
}

/// Swiss pairing on cumulative score.
///
/// Items are grouped by exact score and groups are visited from the highest
/// score down. Each group is shuffled and paired adjacently; an odd item out
/// floats into the next lower group and is paired first there. A leftover
/// from the lowest group gets the bye. If no two items share a score the
/// result is empty, which ends the tournament.
pub fn swiss_pairing(table: &RatingTable, rng: &mut RngStream) -> Pairing {
    // Scores are multiples of 0.5, so doubling gives an exact integer key.
    let mut groups: BTreeMap<i64, Vec<ItemId>> = BTreeMap::new();
    for item in table.items() {
        let key = (table.scores[item.0] * 2.0).round() as i64;
        groups.entry(key).or_default().push(item);
    }
    if groups.values().all(|g| g.len() < 2) {
        return Pairing::default();
    }

    let mut pairing = Pairing::default();
    let mut floater: Option<ItemId> = None;
    for (_, mut members) in groups.into_iter().rev() {
        rng.shuffle(&mut members);
        let mut queue: Vec<ItemId> = floater.take().into_iter().collect();
        queue.extend(members);
        let mut chunks = queue.chunks_exact(2);
        pairing.pairs.extend(chunks.by_ref().map(|c| (c[0], c[1])));
        floater = chunks.remainder().first().copied();
    }
    pairing.byes.extend(floater);
    pairing
}

/// `-p ln p - (1-p) ln (1-p)`, with `0 ln 0 = 0`.
pub fn bernoulli_entropy(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * q.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Second-order proxy for the information carried by a comparison whose
/// win probability is `p`.
pub fn info_gain(p: f64) -> f64 {
    p * (1.0 - p)
}

/// Greedy information-gain matching.
///
/// Every unordered pair not yet in `history` is scored with
/// `info_gain(win_probability(r_i, r_j))` on the current ratings. Pairs below
/// `ig_epsilon` are dropped. The rest are shuffled, stably sorted by gain
/// (highest first), then taken greedily so each item plays at most once.
/// Empty when nothing eligible remains.
pub fn infogain_pairing(
    table: &RatingTable,
    history: &PairHistory,
    cfg: &OracleConfig,
    ig_epsilon: f64,
    rng: &mut RngStream,
) -> Pairing {
    let n = table.len();
    let mut candidates: Vec<(f64, ItemId, ItemId)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (ItemId(i), ItemId(j));
            if history.contains(a, b) {
                continue;
            }
            let ig = info_gain(win_probability(table.ratings[i], table.ratings[j], cfg));
            if ig >= ig_epsilon {
                candidates.push((ig, a, b));
            }
        }
    }
    if candidates.is_empty() {
        return Pairing::default();
    }
    rng.shuffle(&mut candidates);
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut used = vec![false; n];
    let mut pairing = Pairing::default();
    for (_, a, b) in candidates {
        if !used[a.0] && !used[b.0] {
            used[a.0] = true;
            used[b.0] = true;
            pairing.pairs.push((a, b));
        }
    }
    pairing.byes = (0..n).filter(|&i| !used[i]).map(ItemId).collect();
    pairing
}
