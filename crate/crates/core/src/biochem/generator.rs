//! Random stoichiometrically consistent networks.
//!
//! Each reaction gets 2 to 4 distinct species split into nonempty, disjoint
//! forward and reverse sets, with coefficients in `1..=3` chosen so that both
//! sides of the reaction have the same total. Every reaction therefore
//! conserves `l = 1`. Species are placed so that every row of `F` and of `R`
//! is nonempty.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::network::ReactionNetwork;
use super::sparse::SparseIntMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("need at least 2 species, got {0}")]
    TooFewSpecies(usize),
    #[error("need at least one reaction")]
    NoReactions,
    #[error("{n} reactions cannot give every one of {m} species a forward and a reverse entry")]
    TooFewSlots { m: usize, n: usize },
    #[error("could not place species {species} on the {side} side")]
    Placement { species: usize, side: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub min_species: usize,
    pub max_species: usize,
    pub max_coefficient: u32,
    /// `w` is drawn uniformly from `[-w_range, w_range]`.
    pub w_range: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            min_species: 2,
            max_species: 4,
            max_coefficient: 3,
            w_range: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
struct Reaction {
    forward: Vec<usize>,
    reverse: Vec<usize>,
}

impl Reaction {
    fn contains(&self, s: usize) -> bool {
        self.forward.contains(&s) || self.reverse.contains(&s)
    }
}

/// Draws a network with `m` species and `n` reactions from `seed`.
pub fn generate_network(m: usize, n: usize, seed: u64, cfg: &GeneratorConfig) -> Result<ReactionNetwork, GenerateError> {
    if m < 2 {
        return Err(GenerateError::TooFewSpecies(m));
    }
    if n == 0 {
        return Err(GenerateError::NoReactions);
    }
    let max_size = cfg.max_species.min(m).max(2);
    let min_size = cfg.min_species.clamp(2, max_size);
    // Each side can hold at most max_size - 1 slots per reaction.
    if n * (max_size - 1) < m || n * max_size < 2 * m {
        return Err(GenerateError::TooFewSlots { m, n });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sizes: Vec<(usize, usize)> = (0..n)
        .map(|_| {
            let k = rng.gen_range(min_size..=max_size);
            let f = rng.gen_range(1..k);
            (f, k - f)
        })
        .collect();
    boost_sizes(&mut sizes, m, max_size, &mut rng)?;

    let mut reactions: Vec<Reaction> = sizes
        .iter()
        .map(|&(f, r)| Reaction {
            forward: Vec::with_capacity(f),
            reverse: Vec::with_capacity(r),
        })
        .collect();
    fill_side(&mut reactions, &sizes, m, true, &mut rng)?;
    fill_side(&mut reactions, &sizes, m, false, &mut rng)?;
    repair_coverage(&mut reactions, m, true)?;
    repair_coverage(&mut reactions, m, false)?;

    let mut f_trip = Vec::new();
    let mut r_trip = Vec::new();
    for (j, rx) in reactions.iter().enumerate() {
        let (cf, cr) = balanced_coefficients(rx.forward.len(), rx.reverse.len(), cfg.max_coefficient, &mut rng);
        f_trip.extend(rx.forward.iter().zip(cf).map(|(&i, v)| (i, j, v)));
        r_trip.extend(rx.reverse.iter().zip(cr).map(|(&i, v)| (i, j, v)));
    }
    let w: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-cfg.w_range..=cfg.w_range)).collect();
    let net = ReactionNetwork::new(
        format!("random_m{m}_n{n}_s{seed}"),
        SparseIntMatrix::from_triplets(m, n, &f_trip),
        SparseIntMatrix::from_triplets(m, n, &r_trip),
        w,
    )
    .expect("generated shapes are consistent");
    Ok(net)
}

/// Grows reactions (or moves a slot across sides) until both sides have at
/// least `m` slots in total.
fn boost_sizes(sizes: &mut [(usize, usize)], m: usize, max_size: usize, rng: &mut ChaCha8Rng) -> Result<(), GenerateError> {
    let n = sizes.len();
    let mut order: Vec<usize> = (0..n).collect();
    loop {
        let tf: usize = sizes.iter().map(|s| s.0).sum();
        let tr: usize = sizes.iter().map(|s| s.1).sum();
        if tf >= m && tr >= m {
            return Ok(());
        }
        let need_forward = tf < m;
        order.shuffle(rng);
        let mut changed = false;
        for &j in &order {
            let (f, r) = sizes[j];
            if f + r < max_size {
                if need_forward {
                    sizes[j].0 += 1;
                } else {
                    sizes[j].1 += 1;
                }
                changed = true;
                break;
            }
            // Full reaction: shift a slot from the side with surplus.
            let (other, other_total) = if need_forward { (r, tr) } else { (f, tf) };
            if other > 1 && other_total > m {
                if need_forward {
                    sizes[j] = (f + 1, r - 1);
                } else {
                    sizes[j] = (f - 1, r + 1);
                }
                changed = true;
                break;
            }
        }
        if !changed {
            return Err(GenerateError::TooFewSlots { m, n });
        }
    }
}

/// Assigns species to one side. Slots are visited in random order; the first
/// `m` take species from a random permutation so each species appears once,
/// the rest take random species not already in the reaction.
fn fill_side(
    reactions: &mut [Reaction],
    sizes: &[(usize, usize)],
    m: usize,
    forward: bool,
    rng: &mut ChaCha8Rng,
) -> Result<(), GenerateError> {
    let side = if forward { "forward" } else { "reverse" };
    let mut slots: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(j, &(f, r))| std::iter::repeat(j).take(if forward { f } else { r }))
        .collect();
    slots.shuffle(rng);
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(rng);
    let mut pending: Vec<usize> = Vec::new();

    for (t, &j) in slots.iter().enumerate() {
        if t < m && reactions[j].contains(perm[t]) {
            if let Some(u) = (t + 1..m).find(|&u| !reactions[j].contains(perm[u])) {
                perm.swap(t, u);
            }
        }
        let candidate = if t < m { Some(perm[t]) } else { None };
        let s = match candidate {
            Some(s) if !reactions[j].contains(s) => s,
            Some(s) => {
                pending.push(s);
                pick_free(&reactions[j], m, rng).ok_or(GenerateError::Placement { species: s, side })?
            }
            None => pick_free(&reactions[j], m, rng).ok_or(GenerateError::Placement { species: 0, side })?,
        };
        push(&mut reactions[j], s, forward);
    }
    // Species displaced by a clash are placed by replacing a duplicate.
    for s in pending {
        if count_on_side(reactions, s, forward) == 0 && !place_by_swap(reactions, s, forward) {
            return Err(GenerateError::Placement { species: s, side });
        }
    }
    Ok(())
}

fn pick_free(rx: &Reaction, m: usize, rng: &mut ChaCha8Rng) -> Option<usize> {
    let free: Vec<usize> = (0..m).filter(|&s| !rx.contains(s)).collect();
    free.choose(rng).copied()
}

fn push(rx: &mut Reaction, s: usize, forward: bool) {
    if forward {
        rx.forward.push(s);
    } else {
        rx.reverse.push(s);
    }
}

fn side_of(rx: &Reaction, forward: bool) -> &Vec<usize> {
    if forward {
        &rx.forward
    } else {
        &rx.reverse
    }
}

fn count_on_side(reactions: &[Reaction], s: usize, forward: bool) -> usize {
    reactions.iter().filter(|rx| side_of(rx, forward).contains(&s)).count()
}

/// Replaces an occurrence of some species that appears at least twice on this
/// side with `s`, in a reaction that does not already contain `s`.
fn place_by_swap(reactions: &mut [Reaction], s: usize, forward: bool) -> bool {
    let mut counts = std::collections::HashMap::new();
    for rx in reactions.iter() {
        for &t in side_of(rx, forward) {
            *counts.entry(t).or_insert(0usize) += 1;
        }
    }
    for rx in reactions.iter_mut() {
        if rx.contains(s) {
            continue;
        }
        let list = if forward { &mut rx.forward } else { &mut rx.reverse };
        if let Some(slot) = list.iter_mut().find(|t| counts[*t] >= 2) {
            *slot = s;
            return true;
        }
    }
    false
}

fn repair_coverage(reactions: &mut [Reaction], m: usize, forward: bool) -> Result<(), GenerateError> {
    for s in 0..m {
        if count_on_side(reactions, s, forward) == 0 && !place_by_swap(reactions, s, forward) {
            return Err(GenerateError::Placement {
                species: s,
                side: if forward { "forward" } else { "reverse" },
            });
        }
    }
    Ok(())
}

/// Coefficients for `f` forward and `r` reverse species, each in
/// `1..=max`, with equal sums.
fn balanced_coefficients(f: usize, r: usize, max: u32, rng: &mut ChaCha8Rng) -> (Vec<u32>, Vec<u32>) {
    let lo = f.max(r) as u32;
    let hi = (f.min(r) as u32) * max;
    let total = rng.gen_range(lo..=hi);
    (split_total(f, total, max, rng), split_total(r, total, max, rng))
}

fn split_total(k: usize, total: u32, max: u32, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut out = vec![1u32; k];
    for _ in 0..(total - k as u32) {
        let open: Vec<usize> = (0..k).filter(|&i| out[i] < max).collect();
        let &i = open.choose(rng).expect("total fits within k * max");
        out[i] += 1;
    }
    out
}
