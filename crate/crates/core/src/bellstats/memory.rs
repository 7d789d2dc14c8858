//! Memory-loophole bound.
//!
//! A hidden-variable model with access to earlier trials can steer the
//! running statistic `W̃_n = Σ_trials w_k/(q_k(1-ε_k)) - n(3+ε̄)` below zero
//! early and then stop. The largest probability of `W̃_n < 0` over all loser
//! plans and all `n ≤ n_max` is the backslide bound `B`.
//!
//! Only the number of times each cell is the designated loser matters, so the
//! search runs over compositions of `n` into four loser counts. For each
//! composition the exact distribution of per-cell win counts is propagated
//! on the integer lattice, which avoids any floating-point binning of values.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::predictability::PredictabilityTable;
use super::settings::SettingProbabilities;
use crate::error::{Error, Result};

/// Upper limit on `n_max`; the lattice has `C(n+4, 4)` states.
pub const MAX_TRIALS: usize = 40;

/// Relative tolerance below which `W̃ = 0` is counted as non-negative.
pub const ZERO_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialModel {
    pub q: [f64; 4],
    pub eps: [f64; 4],
    /// `1 / (q_k (1 - ε_k))`.
    pub weight: [f64; 4],
    /// `3 + ε̄`.
    pub drift: f64,
}

impl TrialModel {
    pub fn new(probs: &SettingProbabilities, pred: &PredictabilityTable) -> Result<Self> {
        Self::from_parts(probs.q, pred.eps_ij)
    }

    pub fn from_parts(q: [f64; 4], eps: [f64; 4]) -> Result<Self> {
        for k in 0..4 {
            if !(q[k] > 0.0) || !(0.0..1.0).contains(&eps[k]) {
                return Err(Error::InvalidInput(format!("cell {k}: q = {}, ε = {}", q[k], eps[k])));
            }
        }
        Ok(TrialModel {
            q,
            eps,
            weight: std::array::from_fn(|k| 1.0 / (q[k] * (1.0 - eps[k]))),
            drift: 3.0 + eps.iter().map(|e| e / (1.0 - e)).sum::<f64>(),
        })
    }

    /// `(cell won or None, probability)` for a trial whose loser is `loser`.
    fn outcomes(&self, loser: usize) -> [(Option<usize>, f64); 5] {
        let mut out = [(None, 0.0); 5];
        for k in 0..4 {
            let p = if k == loser { self.q[k] * self.eps[k] } else { self.q[k] };
            out[k] = (Some(k), p);
        }
        out[4] = (None, self.q[loser] * (1.0 - self.eps[loser]));
        out
    }

    fn is_left(&self, wins: [u32; 4], n: usize) -> bool {
        let gain: f64 = (0..4).map(|k| wins[k] as f64 * self.weight[k]).sum();
        let target = n as f64 * self.drift;
        gain - target < -ZERO_TOLERANCE * target
    }
}

/// Graded ranking of 4-tuples of win counts: all tuples with sum `s` precede
/// those with sum `s + 1`, so the states reachable after `n` trials are a
/// prefix of length `C(n+4, 4)`.
struct Lattice {
    side: usize,
    rank: Vec<u32>,
    tuples: Vec<[u32; 4]>,
    prefix: Vec<usize>,
}

impl Lattice {
    fn new(n_max: usize) -> Self {
        let side = n_max + 1;
        let mut tuples = Vec::new();
        let mut prefix = vec![0];
        for s in 0..=n_max as u32 {
            for a in 0..=s {
                for b in 0..=s - a {
                    for c in 0..=s - a - b {
                        tuples.push([a, b, c, s - a - b - c]);
                    }
                }
            }
            prefix.push(tuples.len());
        }
        let mut rank = vec![u32::MAX; side.pow(4)];
        for (r, t) in tuples.iter().enumerate() {
            rank[Self::dense(side, *t)] = r as u32;
        }
        Lattice {
            side,
            rank,
            tuples,
            prefix,
        }
    }

    fn dense(side: usize, t: [u32; 4]) -> usize {
        ((t[0] as usize * side + t[1] as usize) * side + t[2] as usize) * side + t[3] as usize
    }

    fn rank_of(&self, t: [u32; 4]) -> usize {
        self.rank[Self::dense(self.side, t)] as usize
    }

    /// Number of states with total wins `≤ n`.
    fn len(&self, n: usize) -> usize {
        self.prefix[n + 1]
    }
}

type Composition = [u8; 4];

fn compositions(n: usize) -> Vec<Composition> {
    let n = n as u8;
    let mut v = Vec::new();
    for a in 0..=n {
        for b in 0..=n - a {
            for c in 0..=n - a - b {
                v.push([a, b, c, n - a - b - c]);
            }
        }
    }
    v
}

/// Parent composition and the loser of the trial that extends it.
fn parent(comp: Composition) -> (Composition, usize) {
    let i = comp.iter().position(|&c| c > 0).expect("nonempty composition");
    let mut p = comp;
    p[i] -= 1;
    (p, i)
}

fn advance(model: &TrialModel, lattice: &Lattice, prev: &[f64], n_prev: usize, loser: usize) -> Vec<f64> {
    let mut next = vec![0.0; lattice.len(n_prev + 1)];
    let outcomes = model.outcomes(loser);
    for (r, &p) in prev.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let t = lattice.tuples[r];
        for &(cell, pk) in &outcomes {
            match cell {
                Some(k) => {
                    let mut u = t;
                    u[k] += 1;
                    next[lattice.rank_of(u)] += p * pk;
                }
                None => next[r] += p * pk,
            }
        }
    }
    next
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryBound {
    /// `max_plans P(W̃_n < 0)` for `n = 1..=n_max`.
    pub p_left_max: Vec<f64>,
    /// Loser counts achieving each maximum.
    pub argmax: Vec<[u8; 4]>,
    pub b: f64,
    /// Trial count at which `B` is attained.
    pub n_at_max: usize,
}

/// Exact distribution of win counts after the trials in `comp`.
pub fn win_distribution(model: &TrialModel, comp: [u8; 4]) -> Vec<([u32; 4], f64)> {
    let n: usize = comp.iter().map(|&c| c as usize).sum();
    let lattice = Lattice::new(n.max(1));
    let mut dist = vec![1.0];
    let mut done = 0;
    for (loser, &count) in comp.iter().enumerate() {
        for _ in 0..count {
            dist = advance(model, &lattice, &dist, done, loser);
            done += 1;
        }
    }
    dist.into_iter()
        .enumerate()
        .filter(|(_, p)| *p > 0.0)
        .map(|(r, p)| (lattice.tuples[r], p))
        .collect()
}

/// `P(W̃_n < 0)` for one loser composition.
pub fn p_left(model: &TrialModel, comp: [u8; 4]) -> f64 {
    let n: usize = comp.iter().map(|&c| c as usize).sum();
    win_distribution(model, comp)
        .into_iter()
        .filter(|(t, _)| model.is_left(*t, n))
        .map(|(_, p)| p)
        .sum()
}

pub fn memory_bound(model: &TrialModel, n_max: usize) -> Result<MemoryBound> {
    if n_max == 0 || n_max > MAX_TRIALS {
        return Err(Error::InvalidInput(format!("n_max = {n_max} outside 1..={MAX_TRIALS}")));
    }
    let lattice = Lattice::new(n_max);
    let mut level: HashMap<Composition, Vec<f64>> = HashMap::from([([0u8; 4], vec![1.0])]);
    let mut p_left_max = Vec::with_capacity(n_max);
    let mut argmax = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let comps = compositions(n);
        let next: Vec<(Composition, Vec<f64>, f64)> = comps
            .par_iter()
            .map(|&comp| {
                let (par, loser) = parent(comp);
                let dist = advance(model, &lattice, &level[&par], n - 1, loser);
                let left: f64 = dist
                    .iter()
                    .enumerate()
                    .filter(|(r, _)| model.is_left(lattice.tuples[*r], n))
                    .map(|(_, p)| p)
                    .sum();
                (comp, dist, left)
            })
            .collect();
        // deterministic reduction: first composition in enumeration order wins ties
        let (best_comp, best) =
            next.iter().fold(
                ([0u8; 4], f64::NEG_INFINITY),
                |acc, (c, _, l)| if *l > acc.1 { (*c, *l) } else { acc },
            );
        p_left_max.push(best);
        argmax.push(best_comp);
        level = next.into_iter().map(|(c, d, _)| (c, d)).collect();
    }
    let (idx, b) = p_left_max.iter().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc },
    );
    Ok(MemoryBound {
        p_left_max,
        argmax,
        b,
        n_at_max: idx + 1,
    })
}

/// Monte Carlo estimate of `P(W̃_n < 0)` for a loser composition, with its
/// standard error.
pub fn p_left_monte_carlo(model: &TrialModel, comp: [u32; 4], samples: u64, seed: u64) -> (f64, f64) {
    let n: u64 = comp.iter().map(|&c| c as u64).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = n as f64 * model.drift;
    let mut hits = 0u64;
    for _ in 0..samples {
        let mut gain = 0.0;
        for (loser, &count) in comp.iter().enumerate() {
            let outcomes = model.outcomes(loser);
            for _ in 0..count {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(cell, p) in &outcomes {
                    acc += p;
                    if u < acc {
                        if let Some(k) = cell {
                            gain += model.weight[k];
                        }
                        break;
                    }
                }
            }
        }
        if gain - target < -ZERO_TOLERANCE * target {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}
