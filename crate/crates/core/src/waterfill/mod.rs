//! Water-filling: the level `γ` reached when a volume of slack is poured over
//! the responses.
//!
//! For responses `c` and volume `V = nν`, the level solves
//! `Σ_i max(0, γ − c_i) = V`. It equals the slack-constrained objective at
//! the current predictor, and the uniform distribution over the covered
//! indices is a minimax-optimal sampling distribution for supergradients.
//!
//! [`find_gamma`] works by repeated three-way partitioning around a pivot,
//! keeping running counts and sums of the part already known to be covered,
//! so no sort is needed. [`find_gamma_and_bias`] handles the two-basin
//! problem that arises with an unregularized bias.

pub mod select;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// How [`find_gamma`] chooses partition pivots.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PivotRule {
    /// Uniformly random element; expected linear time. The generator is
    /// seeded from the input length, so results are reproducible.
    #[default]
    Randomized,
    /// Median-of-medians; worst-case linear time.
    MedianOfMedians,
}

/// Result of [`find_gamma`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaterLevel {
    pub gamma: f64,
    /// Number of responses under water. With zero volume this is the size of
    /// the argmin set.
    pub covered_count: usize,
    /// Sum of the covered responses.
    pub covered_sum: f64,
}

/// Result of [`find_gamma_and_bias`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaterLevelBias {
    pub gamma: f64,
    pub bias: f64,
    /// Positive examples with `c_i + b < γ` (strictly wet).
    pub covered_pos: usize,
    /// Negative examples with `c_i − b < γ` (strictly wet).
    pub covered_neg: usize,
}

fn check_inputs(c: &[f64], volume: f64) -> Result<()> {
    if c.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(volume >= 0.0 && volume.is_finite()) {
        return Err(Error::param(format!(
            "water volume must be finite and non-negative, got {volume}"
        )));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("responses must be finite"));
    }
    Ok(())
}

/// Finds the water level with randomized pivots.
pub fn find_gamma(c: &[f64], volume: f64) -> Result<WaterLevel> {
    find_gamma_with(c, volume, PivotRule::Randomized)
}

/// Finds the water level `γ` with `Σ max(0, γ − c_i) = volume`
/// (`γ = min c` when `volume = 0`).
pub fn find_gamma_with(c: &[f64], volume: f64, rule: PivotRule) -> Result<WaterLevel> {
    check_inputs(c, volume)?;
    let mut buf = c.to_vec();
    let mut rng = match rule {
        PivotRule::Randomized => Some(ChaCha8Rng::seed_from_u64(0x5eed ^ c.len() as u64)),
        PivotRule::MedianOfMedians => None,
    };

    // buf[lo..hi] is undecided; everything to the left of lo is covered.
    let (mut lo, mut hi) = (0, buf.len());
    let mut count = 0usize;
    let mut sum = 0.0;
    let mut top = f64::NEG_INFINITY;
    while lo < hi {
        let slice = &mut buf[lo..hi];
        let pivot = match rng.as_mut() {
            Some(r) => slice[r.random_range(0..slice.len())],
            None => select::median_of_medians(slice),
        };
        let (lt, eq) = select::partition3(slice, pivot);
        let below: f64 = slice[..lt].iter().sum();
        let cand_count = count + lt + eq;
        let cand_sum = sum + below + eq as f64 * pivot;
        // Water needed to bring everything <= pivot up to the pivot.
        let needed = cand_count as f64 * pivot - cand_sum;
        if needed <= volume {
            count = cand_count;
            sum = cand_sum;
            top = pivot;
            lo += lt + eq;
        } else {
            hi = lo + lt;
        }
    }
    debug_assert!(count >= 1);
    let gamma = if volume == 0.0 {
        top
    } else {
        ((volume + sum) / count as f64).max(top)
    };
    Ok(WaterLevel {
        gamma,
        covered_count: count,
        covered_sum: sum,
    })
}

/// Slack-constrained objective value at fixed responses: the water level.
pub fn objective_value(c: &[f64], volume: f64) -> Result<f64> {
    Ok(find_gamma(c, volume)?.gamma)
}

/// Tolerance used when deciding whether a response sits at the level.
pub fn level_tolerance(gamma: f64) -> f64 {
    1e-12 * gamma.abs().max(1.0)
}

/// Indices a minimax-optimal distribution may be uniform over: those strictly
/// below `γ − tol`, or when none are, those within `tol` of the level.
/// Never empty for a level produced from `c`.
pub fn support_set(c: &[f64], level: &WaterLevel, tol: f64) -> Vec<usize> {
    support_of(c.iter().copied().enumerate(), level.gamma, tol)
}

pub(crate) fn support_of(
    items: impl Iterator<Item = (usize, f64)> + Clone,
    gamma: f64,
    tol: f64,
) -> Vec<usize> {
    let strict: Vec<usize> = items
        .clone()
        .filter(|&(_, v)| v < gamma - tol)
        .map(|(i, _)| i)
        .collect();
    if !strict.is_empty() {
        return strict;
    }
    items
        .filter(|&(_, v)| v <= gamma + tol)
        .map(|(i, _)| i)
        .collect()
}

/// Level of the shifted responses `c_i + y_i·b` at a fixed bias.
pub fn gamma_at_bias(c: &[f64], y: &[f64], volume: f64, bias: f64) -> Result<f64> {
    let shifted: Vec<f64> = c.iter().zip(y).map(|(&ci, &yi)| ci + yi * bias).collect();
    objective_value(&shifted, volume)
}

/// One basin of the two-basin problem, in its own response coordinates.
struct Basin {
    heights: Vec<f64>,
    level: f64,
    /// Heights at or below the level.
    absorbed: usize,
}

impl Basin {
    fn new(mut heights: Vec<f64>) -> Basin {
        heights.sort_unstable_by(f64::total_cmp);
        let mut b = Basin {
            level: heights[0],
            heights,
            absorbed: 0,
        };
        b.absorb();
        b
    }

    fn absorb(&mut self) {
        while self.absorbed < self.heights.len() && self.heights[self.absorbed] <= self.level {
            self.absorbed += 1;
        }
    }

    fn next_gap(&self) -> Option<f64> {
        self.heights.get(self.absorbed).map(|&h| h - self.level)
    }

    /// Raises the level by `d`, snapping to the next height when it is hit.
    fn raise(&mut self, d: f64, hit: bool) {
        if hit {
            self.level = self.heights[self.absorbed];
        } else {
            self.level += d;
        }
        self.absorb();
    }

    fn wet(&self) -> usize {
        self.heights[..self.absorbed]
            .iter()
            .filter(|&&h| h < self.level)
            .count()
    }
}

/// Finds the level `γ` and bias `b` maximizing `γ(b)`, the water level of
/// `c_i + y_i·b` under `volume`.
///
/// Positive and negative examples form two basins whose levels in response
/// coordinates are `u = γ − b` and `v = γ + b`. Maximizing `u + v` under the
/// shared volume is a separable concave problem: water always goes to the
/// basin with fewer wet columns, and both rise together when the counts tie.
/// The optimum therefore has equal wet counts away from breakpoints. Runs in
/// `O(n log n)` for the two sorts plus a linear scan.
pub fn find_gamma_and_bias(c: &[f64], y: &[f64], volume: f64) -> Result<WaterLevelBias> {
    check_inputs(c, volume)?;
    if c.len() != y.len() {
        return Err(Error::param(format!(
            "{} responses but {} labels",
            c.len(),
            y.len()
        )));
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (&ci, &yi) in c.iter().zip(y) {
        if yi > 0.0 {
            pos.push(ci);
        } else {
            neg.push(ci);
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Solver(
            "bias is unbounded: both classes must be present".into(),
        ));
    }
    let mut p = Basin::new(pos);
    let mut q = Basin::new(neg);
    let mut rem = volume;

    while rem > 0.0 {
        match p.absorbed.cmp(&q.absorbed) {
            std::cmp::Ordering::Less => pour_one(&mut p, &mut rem),
            std::cmp::Ordering::Greater => pour_one(&mut q, &mut rem),
            std::cmp::Ordering::Equal => {
                let m = p.absorbed as f64;
                let gap = match (p.next_gap(), q.next_gap()) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                };
                match gap {
                    Some(g) if 2.0 * m * g < rem => {
                        rem -= 2.0 * m * g;
                        let hit_p = p.next_gap() == Some(g);
                        let hit_q = q.next_gap() == Some(g);
                        p.raise(g, hit_p);
                        q.raise(g, hit_q);
                    }
                    _ => {
                        let d = rem / (2.0 * m);
                        p.raise(d, false);
                        q.raise(d, false);
                        rem = 0.0;
                    }
                }
            }
        }
    }

    Ok(WaterLevelBias {
        gamma: 0.5 * (p.level + q.level),
        bias: 0.5 * (q.level - p.level),
        covered_pos: p.wet(),
        covered_neg: q.wet(),
    })
}

fn pour_one(b: &mut Basin, rem: &mut f64) {
    let k = b.absorbed as f64;
    match b.next_gap() {
        Some(g) if k * g < *rem => {
            *rem -= k * g;
            b.raise(g, true);
        }
        _ => {
            b.raise(*rem / k, false);
            *rem = 0.0;
        }
    }
}
