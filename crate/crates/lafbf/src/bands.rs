//! Rational turning-band directions and minimal-cost band plans.
//!
//! Candidate directions are the reduced fractions tan(theta) = p/q plus the
//! vertical band (1, 0). A plan is an ordered subset covering the half
//! circle (-pi/2, pi/2] with every angular gap (including the pi-periodic
//! wrap) at most epsilon, chosen by dynamic programming to minimize the
//! total FBM sample count r(|p|+|q|)+1 per band.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// One rational band direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub p: i64,
    pub q: i64,
    /// atan2(p, q), in (-pi/2, pi/2].
    pub theta: f64,
    /// Angular width assigned by the plan (radians; 0 until selected).
    pub lambda: f64,
    /// FBM samples required on grid order r: r(|p|+|q|) + 1.
    pub cost: u64,
}

impl Band {
    fn new(p: i64, q: i64) -> Self {
        Self {
            p,
            q,
            theta: (p as f64).atan2(q as f64),
            lambda: 0.0,
            cost: 0,
        }
    }

    pub fn samples(&self, grid_order: usize) -> u64 {
        grid_order as u64 * (self.p.unsigned_abs() + self.q.unsigned_abs()) + 1
    }
}

/// Ordered band set covering (-pi/2, pi/2] with gaps <= epsilon.
#[derive(Debug, Clone)]
pub struct BandPlan {
    pub bands: Vec<Band>,
    pub epsilon: f64,
    pub grid_order: usize,
    pub total_cost: u64,
}

impl BandPlan {
    /// FNV-1a digest over the plan identity (bands, epsilon, grid order).
    pub fn digest(&self) -> u64 {
        let mut hash: u64 = 0xcbf29ce484222325;
        let mut eat = |v: u64| {
            for byte in v.to_le_bytes() {
                hash ^= byte as u64;
                hash = hash.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.grid_order as u64);
        eat(self.epsilon.to_bits());
        for b in &self.bands {
            eat(b.p as u64);
            eat(b.q as u64);
        }
        hash
    }

    pub fn max_gap(&self) -> f64 {
        self.bands
            .iter()
            .map(|b| b.lambda)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// All reduced directions with |p| <= q_max, 1 <= q <= q_max, plus the
/// vertical band (1, 0); sorted by angle, widths unset.
pub fn enumerate_candidates(q_max: u32) -> Vec<Band> {
    let qm = q_max as i64;
    let mut out = vec![Band::new(1, 0)];
    for q in 1..=qm {
        for p in -qm..=qm {
            if gcd(p.unsigned_abs(), q as u64) == 1 {
                out.push(Band::new(p, q));
            }
        }
    }
    out.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    out
}

fn max_candidate_gap(sorted: &[Band]) -> f64 {
    let n = sorted.len();
    let mut gap = sorted[0].theta + PI - sorted[n - 1].theta;
    for i in 1..n {
        gap = gap.max(sorted[i].theta - sorted[i - 1].theta);
    }
    gap
}

/// Minimal-cost covering subset via dynamic programming.
///
/// The first selected band must lie within epsilon of -pi/2, otherwise the
/// wrap gap to the last band (theta <= pi/2) cannot close; the DP runs a
/// sliding-window minimum forward from each admissible start. Cost ties
/// break toward the predecessor with smaller |p|+|q|, then smaller angle.
pub fn select_bands(candidates: &[Band], epsilon: f64, grid_order: usize) -> Result<BandPlan> {
    assert!(epsilon > 0.0, "epsilon must be positive");
    assert!(!candidates.is_empty(), "empty candidate set");
    debug_assert!(candidates.windows(2).all(|w| w[0].theta < w[1].theta));

    let n = candidates.len();
    let thetas: Vec<f64> = candidates.iter().map(|b| b.theta).collect();
    let costs: Vec<u64> = candidates.iter().map(|b| b.samples(grid_order)).collect();
    let spq: Vec<u64> = candidates
        .iter()
        .map(|b| b.p.unsigned_abs() + b.q.unsigned_abs())
        .collect();

    let gap = max_candidate_gap(candidates);
    if gap > epsilon {
        return Err(Error::InfeasiblePlan { gap, epsilon });
    }

    const INF: u64 = u64::MAX;
    let mut dp = vec![INF; n];
    let mut parent = vec![usize::MAX; n];
    let mut best: Option<(u64, Vec<usize>)> = None;

    // (dp, |p|+|q|, index): total order used by the window minimum.
    let key = |dp: &[u64], i: usize| (dp[i], spq[i], i);

    let starts: Vec<usize> = (0..n)
        .take_while(|&i| thetas[i] <= -FRAC_PI_2 + epsilon)
        .collect();

    for &f in &starts {
        for v in dp.iter_mut() {
            *v = INF;
        }
        dp[f] = costs[f];
        parent[f] = usize::MAX;

        let mut window: VecDeque<usize> = VecDeque::new();
        window.push_back(f);
        for i in f + 1..n {
            while let Some(&j) = window.front() {
                if thetas[i] - thetas[j] > epsilon {
                    window.pop_front();
                } else {
                    break;
                }
            }
            if let Some(&j) = window.front() {
                dp[i] = dp[j] + costs[i];
                parent[i] = j;
                while let Some(&b) = window.back() {
                    if key(&dp, b) >= key(&dp, i) {
                        window.pop_back();
                    } else {
                        break;
                    }
                }
                window.push_back(i);
            }
        }

        for l in (f..n).rev() {
            if thetas[f] + PI - thetas[l] > epsilon {
                break;
            }
            if dp[l] == INF {
                continue;
            }
            let better = match &best {
                None => true,
                Some((cost, path)) => {
                    dp[l] < *cost
                        || (dp[l] == *cost && chain(&parent, l).len() < path.len())
                }
            };
            if better {
                best = Some((dp[l], chain(&parent, l)));
            }
        }
    }

    let (total_cost, picked) = best.ok_or(Error::InfeasiblePlan { gap, epsilon })?;

    let mut bands: Vec<Band> = picked.iter().map(|&i| candidates[i].clone()).collect();
    let m = bands.len();
    for i in 0..m {
        bands[i].cost = costs[picked[i]];
        bands[i].lambda = if i + 1 < m {
            bands[i + 1].theta - bands[i].theta
        } else {
            bands[0].theta + PI - bands[i].theta
        };
    }

    Ok(BandPlan {
        bands,
        epsilon,
        grid_order,
        total_cost,
    })
}

fn chain(parent: &[usize], mut i: usize) -> Vec<usize> {
    let mut path = vec![i];
    while parent[i] != usize::MAX {
        i = parent[i];
        path.push(i);
    }
    path.reverse();
    path
}

/// Cap on the doubling search in `feasible_candidates`: ~1.2 * Q_MAX_LIMIT^2
/// candidates, the practical memory/time ceiling. Tolerances that still have
/// gaps above epsilon at the cap are rejected as infeasible.
pub const Q_MAX_LIMIT: u32 = 1 << 10;

/// Smallest feasible q_max by doubling search from ceil(2 / epsilon).
pub fn feasible_candidates(epsilon: f64) -> Result<Vec<Band>> {
    let mut q_max = ((2.0 / epsilon).ceil() as u32).clamp(1, Q_MAX_LIMIT);
    loop {
        let cands = enumerate_candidates(q_max);
        let gap = max_candidate_gap(&cands);
        if gap <= epsilon {
            return Ok(cands);
        }
        if q_max == Q_MAX_LIMIT {
            return Err(Error::InfeasiblePlan { gap, epsilon });
        }
        q_max = q_max.saturating_mul(2).min(Q_MAX_LIMIT);
    }
}

/// Plan over the default candidate set for the given tolerance.
pub fn default_plan(epsilon: f64, grid_order: usize) -> Result<BandPlan> {
    select_bands(&feasible_candidates(epsilon)?, epsilon, grid_order)
}
