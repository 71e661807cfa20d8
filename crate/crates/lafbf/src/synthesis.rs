//! Turning-band assembly of stationary elementary fields and locally
//! anisotropic fields.
//!
//! A prepared state holds the band plan and one FBM line per band; it does
//! not depend on the orientation function and is reused across syntheses.
//! Per pixel, the field is the weighted sum over active bands of rescaled
//! FBM samples at the integer projection k1*q + k2*p; the active set is a
//! contiguous circular run around the local orientation found by binary
//! search over the sorted band angles.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use crate::bands::{self, Band, BandPlan};
use crate::error::{Error, Result};
use crate::fbm::{generate_fbm_line, FbmLine, HurstIndex, RandomStream};
use crate::orientation::{angular_distance, reduce_mod_pi, AngularWeightParams, OrientationField};

/// Simulation parameters; the grid is (r+1) x (r+1) with r = 2^k - 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisParams {
    pub hurst: HurstIndex,
    pub alpha: f64,
    pub epsilon: f64,
    pub grid_order: usize,
    pub seed: u64,
    pub regularized: bool,
    pub sigma: f64,
}

impl SynthesisParams {
    pub fn new(
        hurst: HurstIndex,
        alpha: f64,
        epsilon: f64,
        grid_order: usize,
        seed: u64,
        regularized: bool,
        sigma: f64,
    ) -> Result<Self> {
        if !(grid_order + 1).is_power_of_two() || grid_order < 1 {
            return Err(Error::Config(format!(
                "size must be a power of two >= 2 (grid order r = 2^k - 1), got size {}",
                grid_order + 1
            )));
        }
        if !(alpha > 0.0 && alpha <= FRAC_PI_2) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, pi/2], got {alpha}"
            )));
        }
        if epsilon <= 0.0 || epsilon.is_nan() {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if regularized && (sigma <= 0.0 || sigma.is_nan()) {
            return Err(Error::Config(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self {
            hurst,
            alpha,
            epsilon,
            grid_order,
            seed,
            regularized,
            sigma,
        })
    }

    pub fn weight_params(&self) -> AngularWeightParams {
        if self.regularized {
            AngularWeightParams::regularized(self.alpha, self.sigma)
        } else {
            AngularWeightParams::sharp(self.alpha)
        }
    }
}

/// gamma(H) = pi / (H Gamma(2H) sin(H pi)); finite and positive on (0, 1).
pub fn gamma_factor(h: HurstIndex) -> f64 {
    let hv = h.value();
    PI / (hv * statrs::function::gamma::gamma(2.0 * hv) * (hv * PI).sin())
}

/// Integer FBM index range covering k1*q + k2*p over 0 <= k1, k2 <= r.
pub fn line_range(band: &Band, grid_order: usize) -> (i64, i64) {
    let r = grid_order as i64;
    if band.q == 0 {
        (0, r)
    } else {
        (r * band.p.min(0), r * (band.q + band.p.max(0)))
    }
}

/// Band plan plus one FBM line per band; orientation-independent.
pub struct PreparedState {
    pub plan: BandPlan,
    lines: Vec<FbmLine>,
    scales: Vec<f64>,
    thetas: Vec<f64>,
    gamma: f64,
    hurst: HurstIndex,
    seed: u64,
}

impl PreparedState {
    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Rescaled FBM sample of band `i` at pixel (k1, k2): in law, B^H
    /// evaluated at (k1/r) cos theta + (k2/r) sin theta.
    #[inline]
    pub fn band_sample(&self, i: usize, k1: usize, k2: usize) -> f64 {
        let b = &self.plan.bands[i];
        self.scales[i] * self.lines[i].value(k1 as i64 * b.q + k2 as i64 * b.p)
    }
}

/// Band plan and per-band FBM lines for the given parameters.
///
/// Line `i` draws from ChaCha substream `(seed, i)`, so the plan order fixes
/// all randomness regardless of thread scheduling.
pub fn precompute(params: &SynthesisParams) -> Result<PreparedState> {
    let plan = bands::default_plan(params.epsilon, params.grid_order)?;
    precompute_with_plan(params, plan)
}

/// As `precompute` but with a caller-supplied plan (reused across seeds).
pub fn precompute_with_plan(params: &SynthesisParams, plan: BandPlan) -> Result<PreparedState> {
    assert_eq!(plan.grid_order, params.grid_order, "plan built for a different grid");
    let r = params.grid_order;
    let h = params.hurst;

    let prepared: Result<Vec<(FbmLine, f64)>> = plan
        .bands
        .par_iter()
        .enumerate()
        .map(|(i, band)| {
            let (j_min, j_max) = line_range(band, r);
            let mut stream = RandomStream::substream(params.seed, i as u64);
            let line = generate_fbm_line(h, j_min, j_max, &mut stream)?;
            let scale = if band.q == 0 {
                (1.0 / r as f64).powf(h.value())
            } else {
                (band.theta.cos() / (r as f64 * band.q as f64)).powf(h.value())
            };
            Ok((line, scale))
        })
        .collect();

    let (lines, scales): (Vec<_>, Vec<_>) = prepared?.into_iter().unzip();
    let thetas = plan.bands.iter().map(|b| b.theta).collect();
    Ok(PreparedState {
        plan,
        lines,
        scales,
        thetas,
        gamma: gamma_factor(h),
        hurst: h,
        seed: params.seed,
    })
}

/// Circularly contiguous run of band indices within `max_dist` of `alpha0`.
///
/// Binary search locates the nearest angle, then the run widens to both
/// neighbors; returns (start index, length) in ascending-angle circular
/// order. `max_dist >= pi/2` activates every band.
pub fn active_band_range(thetas: &[f64], alpha0: f64, max_dist: f64) -> (usize, usize) {
    let n = thetas.len();
    if max_dist >= FRAC_PI_2 {
        return (0, n);
    }
    let a = reduce_mod_pi(alpha0);
    let pos = thetas.partition_point(|&t| t < a);
    let right = pos % n;
    let left = (pos + n - 1) % n;
    let start = if angular_distance(thetas[right], a) <= angular_distance(thetas[left], a) {
        right
    } else {
        left
    };
    if angular_distance(thetas[start], a) > max_dist {
        return (start, 0);
    }

    let mut lo = start;
    let mut count = 1;
    while count < n {
        let cand = (lo + n - 1) % n;
        if angular_distance(thetas[cand], a) <= max_dist {
            lo = cand;
            count += 1;
        } else {
            break;
        }
    }
    let mut hi = start;
    while count < n {
        let cand = (hi + 1) % n;
        if angular_distance(thetas[cand], a) <= max_dist {
            hi = cand;
            count += 1;
        } else {
            break;
        }
    }
    (lo, count)
}

/// Field value at one pixel for a given local orientation.
pub fn pixel_value(
    state: &PreparedState,
    weight: &AngularWeightParams,
    alpha0: f64,
    k1: usize,
    k2: usize,
) -> f64 {
    let n = state.thetas.len();
    let (lo, len) = active_band_range(&state.thetas, alpha0, weight.max_active_distance());
    let mut acc = 0.0;
    for t in 0..len {
        let i = (lo + t) % n;
        let c = weight.weight(alpha0, state.thetas[i]);
        if c <= 0.0 {
            continue;
        }
        let w = state.gamma * state.plan.bands[i].lambda * c;
        acc += w.sqrt() * state.band_sample(i, k1, k2);
    }
    acc
}

/// Synthesized (r+1) x (r+1) texture with provenance.
#[derive(Debug, Clone)]
pub struct FieldGrid {
    pub size: usize,
    /// Row-major: values[k1 * size + k2], pixel (k1, k2) at (k1/r, k2/r).
    pub values: Vec<f64>,
    pub params: SynthesisParams,
    pub orientation: String,
    pub plan_digest: u64,
}

impl FieldGrid {
    #[inline]
    pub fn value(&self, k1: usize, k2: usize) -> f64 {
        self.values[k1 * self.size + k2]
    }
}

fn synthesize_impl<F>(
    params: &SynthesisParams,
    state: &PreparedState,
    alpha0_fn: F,
    orientation: String,
) -> FieldGrid
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    assert_eq!(state.hurst, params.hurst, "state prepared for different params");
    let r = params.grid_order;
    let n = r + 1;
    let weight = params.weight_params();
    let mut values = vec![0.0; n * n];
    values
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(k1, row)| {
            let x = k1 as f64 / r as f64;
            for (k2, out) in row.iter_mut().enumerate() {
                let y = k2 as f64 / r as f64;
                *out = pixel_value(state, &weight, alpha0_fn(x, y), k1, k2);
            }
        });
    FieldGrid {
        size: n,
        values,
        params: *params,
        orientation,
        plan_digest: state.plan.digest(),
    }
}

/// Stationary elementary field with one global orientation.
pub fn synthesize_elementary(
    params: &SynthesisParams,
    alpha0: f64,
    state: &PreparedState,
) -> FieldGrid {
    let a = reduce_mod_pi(alpha0);
    synthesize_impl(params, state, move |_, _| a, format!("constant:{alpha0}"))
}

/// Locally anisotropic field: each pixel takes the value of its own tangent
/// elementary field with orientation alpha0(k1/r, k2/r).
pub fn synthesize_lafbf(
    params: &SynthesisParams,
    field: &OrientationField,
    state: &PreparedState,
) -> FieldGrid {
    synthesize_impl(
        params,
        state,
        |x, y| field.eval(x, y),
        field.describe(),
    )
}
