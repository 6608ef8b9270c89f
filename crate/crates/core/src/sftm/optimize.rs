use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{SftmConfig, SimilarityTable};
use crate::dom::{DomTree, NodeId};
use crate::error::SftmError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedPair {
    pub left: NodeId,
    pub right: NodeId,
    pub score: f64,
}

/// Injective partial mapping from the old tree to the new one.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Matching {
    /// Sorted by `left`.
    pub pairs: Vec<MatchedPair>,
    pub unmatched_left: Vec<NodeId>,
    pub unmatched_right: Vec<NodeId>,
    pub total_score: f64,
    /// Cost charged per matched pair by the search objective.
    pub penalty: f64,
    pub config: SftmConfig,
    pub seed: u64,
    #[serde(skip)]
    by_left: Vec<Option<u32>>,
    #[serde(skip)]
    by_right: Vec<Option<u32>>,
}

impl Matching {
    fn build(
        mut pairs: Vec<MatchedPair>,
        n_left: usize,
        n_right: usize,
        penalty: f64,
        config: &SftmConfig,
    ) -> Matching {
        pairs.sort_by_key(|p| p.left);
        let mut by_left = vec![None; n_left];
        let mut by_right = vec![None; n_right];
        for (i, p) in pairs.iter().enumerate() {
            by_left[p.left.0] = Some(i as u32);
            by_right[p.right.0] = Some(i as u32);
        }
        let free = |v: &[Option<u32>]| {
            v.iter()
                .enumerate()
                .filter(|(_, m)| m.is_none())
                .map(|(i, _)| NodeId(i))
                .collect()
        };
        Matching {
            total_score: pairs.iter().map(|p| p.score).sum(),
            unmatched_left: free(&by_left),
            unmatched_right: free(&by_right),
            pairs,
            penalty,
            config: config.clone(),
            seed: config.seed,
            by_left,
            by_right,
        }
    }

    /// Counterpart of an old-tree node.
    pub fn right_of(&self, left: NodeId) -> Option<&MatchedPair> {
        let i = (*self.by_left.get(left.0)?)?;
        Some(&self.pairs[i as usize])
    }

    /// Counterpart of a new-tree node.
    pub fn left_of(&self, right: NodeId) -> Option<&MatchedPair> {
        let i = (*self.by_right.get(right.0)?)?;
        Some(&self.pairs[i as usize])
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Value of the search objective, `sum(score - penalty)`.
    pub fn objective(&self) -> f64 {
        self.pairs.iter().map(|p| p.score - self.penalty).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("matching is always serializable")
    }
}

const NONE: u32 = u32::MAX;

struct Walk<'a> {
    left: &'a [usize],
    right: &'a [usize],
    gain: &'a [f64],
    left_to: Vec<u32>,
    right_to: Vec<u32>,
}

impl Walk<'_> {
    fn delta(&self, p: usize) -> f64 {
        let (a, b) = (self.left[p], self.right[p]);
        if self.left_to[a] == p as u32 {
            return -self.gain[p];
        }
        let mut d = self.gain[p];
        if self.left_to[a] != NONE {
            d -= self.gain[self.left_to[a] as usize];
        }
        if self.right_to[b] != NONE {
            d -= self.gain[self.right_to[b] as usize];
        }
        d
    }

    /// True when no pair has a move that could be accepted at `temperature`
    /// or any lower one.
    fn frozen(&self, temperature: f64) -> bool {
        (0..self.gain.len()).all(|p| {
            let d = self.delta(p);
            d == 0.0 || (d < 0.0 && (d / temperature).exp() == 0.0)
        })
    }

    fn apply(&mut self, p: usize) {
        let (a, b) = (self.left[p], self.right[p]);
        if self.left_to[a] == p as u32 {
            self.left_to[a] = NONE;
            self.right_to[b] = NONE;
            return;
        }
        for q in [self.left_to[a], self.right_to[b]] {
            if q != NONE {
                self.left_to[self.left[q as usize]] = NONE;
                self.right_to[self.right[q as usize]] = NONE;
            }
        }
        self.left_to[a] = p as u32;
        self.right_to[b] = p as u32;
    }
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    let mid = v.len() / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

/// Searches an injective matching maximizing `sum(s(e, e') - penalty)` over
/// its pairs. Starts from the greedy matching (pairs by decreasing score, ties
/// in document order) and walks with Metropolis moves that toggle one pair
/// drawn proportionally to its score, evicting conflicting pairs. The best
/// configuration seen is returned.
pub fn optimize(s: &SimilarityTable, old: &DomTree, new: &DomTree, config: &SftmConfig) -> Result<Matching, SftmError> {
    s.check(old, new)?;
    config.validate()?;
    let penalty = config
        .penalty
        .unwrap_or_else(|| config.penalty_factor * median(s.scores()));
    let movable: Vec<usize> = (0..s.len()).filter(|i| s.scores()[*i] > penalty).collect();
    if movable.is_empty() {
        return Ok(Matching::build(Vec::new(), old.size(), new.size(), penalty, config));
    }
    let left: Vec<usize> = movable.iter().map(|i| s.pairs()[*i].0 .0).collect();
    let right: Vec<usize> = movable.iter().map(|i| s.pairs()[*i].1 .0).collect();
    let score: Vec<f64> = movable.iter().map(|i| s.scores()[*i]).collect();
    let gain: Vec<f64> = score.iter().map(|v| v - penalty).collect();

    let mut walk = Walk {
        left: &left,
        right: &right,
        gain: &gain,
        left_to: vec![NONE; old.size()],
        right_to: vec![NONE; new.size()],
    };
    let mut order: Vec<usize> = (0..movable.len()).collect();
    // Movable pairs are already in (left, right) order; the sort is stable.
    order.sort_by(|x, y| score[*y].total_cmp(&score[*x]));
    let mut current = 0.0;
    for p in order {
        if walk.left_to[left[p]] == NONE && walk.right_to[right[p]] == NONE {
            walk.apply(p);
            current += gain[p];
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pick = WeightedIndex::new(&score).expect("movable scores are positive");
    let mut temperature = match config.initial_temperature {
        Some(t) => t,
        None => {
            let deltas: Vec<f64> = (0..256)
                .map(|_| walk.delta(pick.sample(&mut rng)).abs())
                .filter(|d| *d > 0.0)
                .collect();
            let m = median(&deltas);
            if m > 0.0 {
                m / std::f64::consts::LN_2
            } else {
                f64::MIN_POSITIVE
            }
        }
    };

    let budget = (config.budget_factor * movable.len() as f64).ceil() as u64;
    let iterations = config.max_iterations.map_or(budget, |m| m.min(budget));
    let mut best = current;
    let mut best_state = walk.left_to.clone();
    let check_every = (movable.len() as u64).max(1024);
    for it in 0..iterations {
        // Once no move can ever be accepted again the remaining iterations
        // cannot change the state, so the walk stops.
        if it > 0 && it % check_every == 0 && walk.frozen(temperature) {
            break;
        }
        let p = pick.sample(&mut rng);
        let d = walk.delta(p);
        let accept = d >= 0.0 || rng.gen::<f64>() < (d / temperature).exp();
        if accept && d != 0.0 {
            walk.apply(p);
            current += d;
            if current > best + 1e-9 * (1.0 + best.abs()) {
                best = current;
                best_state.copy_from_slice(&walk.left_to);
            }
        }
        temperature *= config.cooling;
    }

    let pairs = best_state
        .iter()
        .filter(|p| **p != NONE)
        .map(|&p| MatchedPair {
            left: NodeId(left[p as usize]),
            right: NodeId(right[p as usize]),
            score: score[p as usize],
        })
        .collect();
    Ok(Matching::build(pairs, old.size(), new.size(), penalty, config))
}
