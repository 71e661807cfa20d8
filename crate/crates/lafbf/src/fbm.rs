//! Exact 1-D fractional Brownian motion on integer grids.
//!
//! Lines are produced by circulant embedding of the fractional Gaussian
//! noise (fGn) autocovariance followed by prefix summation outward from the
//! pinned origin, so every finite-dimensional law is exact. Normalization is
//! fixed to `Var B(t) = |t|^{2H}`, i.e. the covariance constant is 1/2.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Relative tolerance for negative circulant eigenvalues. Eigenvalues in
/// `(-tol * max_eig, 0)` are clamped to zero; anything lower aborts.
pub const EIG_TOL: f64 = 1e-9;

/// Hurst regularity index, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurstIndex(f64);

impl HurstIndex {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidHurst(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Seekable Gaussian stream: a ChaCha8 counter RNG plus a Box-Muller
/// transform on 53-bit uniforms.
///
/// The Gaussian transform is Box-Muller (not ziggurat, not inverse-CDF) and
/// is kept fixed so that a `(seed, stream index)` pair reproduces the same
/// variate sequence bit-for-bit on every platform and rand version.
pub struct RandomStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Independent substream `index` of the master `seed` (ChaCha stream id).
    pub fn substream(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { rng, spare: None }
    }

    /// Uniform on (0, 1], safe as a log argument.
    #[inline]
    fn uniform_open(&mut self) -> f64 {
        (((self.rng.next_u64() >> 11) + 1) as f64) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let radius = (-2.0 * self.uniform_open().ln()).sqrt();
        let angle = std::f64::consts::TAU * self.uniform_open();
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

/// Exact FBM samples on the integer range `j_min..=j_max`, pinned at zero.
#[derive(Debug, Clone)]
pub struct FbmLine {
    hurst: HurstIndex,
    j_min: i64,
    j_max: i64,
    values: Vec<f64>,
}

impl FbmLine {
    pub fn hurst(&self) -> HurstIndex {
        self.hurst
    }

    pub fn j_min(&self) -> i64 {
        self.j_min
    }

    pub fn j_max(&self) -> i64 {
        self.j_max
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Never true: every line contains at least the pinned origin.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn value(&self, j: i64) -> f64 {
        debug_assert!(j >= self.j_min && j <= self.j_max, "index {j} outside line range");
        self.values[(j - self.j_min) as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Covariance of pinned FBM: `(|s|^{2H} + |t|^{2H} - |s-t|^{2H}) / 2`.
pub fn fbm_covariance(h: HurstIndex, s: f64, t: f64) -> f64 {
    let hh = 2.0 * h.value();
    0.5 * (s.abs().powf(hh) + t.abs().powf(hh) - (s - t).abs().powf(hh))
}

/// Autocovariance of unit-step FBM increments at lag `k`.
pub fn fgn_autocovariance(h: HurstIndex, k: i64) -> f64 {
    let hh = 2.0 * h.value();
    let k = k.unsigned_abs() as f64;
    0.5 * ((k + 1.0).powf(hh) - 2.0 * k.powf(hh) + (k - 1.0).abs().powf(hh))
}

/// Exact-in-law FBM on `j_min..=j_max` with `value(0) == 0` exactly.
///
/// The increments over the whole span come from one circulant embedding of
/// the fGn autocovariance; the line is then accumulated outward from index 0
/// (the negative side subtracts increments leftward), which preserves the
/// joint law without re-centering.
pub fn generate_fbm_line(
    h: HurstIndex,
    j_min: i64,
    j_max: i64,
    stream: &mut RandomStream,
) -> Result<FbmLine> {
    assert!(j_min <= 0 && j_max >= 0, "range must contain 0");
    assert!(j_max - j_min >= 1, "range must contain at least one step");

    let n = (j_max - j_min) as usize;
    let increments = sample_fgn(h, n, stream)?;

    let mut values = vec![0.0; n + 1];
    let origin = (-j_min) as usize;
    for t in origin + 1..=n {
        values[t] = values[t - 1] + increments[t - 1];
    }
    for t in (0..origin).rev() {
        values[t] = values[t + 1] - increments[t];
    }

    Ok(FbmLine {
        hurst: h,
        j_min,
        j_max,
        values,
    })
}

/// `n` fGn samples by circulant embedding (Dietrich-Newsam construction).
fn sample_fgn(h: HurstIndex, n: usize, stream: &mut RandomStream) -> Result<Vec<f64>> {
    let m = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::new();

    // First row of the circulant embedding and its eigenvalues.
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|k| Complex::new(fgn_autocovariance(h, k.min(m - k) as i64), 0.0))
        .collect();
    planner.plan_fft_forward(m).process(&mut row);

    let max_eig = row.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
    let tol = EIG_TOL * max_eig;
    let mut spectrum = Vec::with_capacity(m);
    for c in &row {
        if c.re < -tol {
            return Err(Error::EmbeddingFailure {
                relative: c.re / max_eig,
                tolerance: EIG_TOL,
            });
        }
        spectrum.push(c.re.max(0.0));
    }

    // X = F* (sqrt(eig) .* z) / sqrt(m) with z complex standard normal gives
    // Re X ~ N(0, C) for the embedded circulant C; keep the real part.
    let mut buf: Vec<Complex<f64>> = spectrum
        .iter()
        .map(|&e| {
            let re = stream.standard_normal();
            let im = stream.standard_normal();
            Complex::new(re, im) * e.sqrt()
        })
        .collect();
    planner.plan_fft_inverse(m).process(&mut buf);

    let scale = 1.0 / (m as f64).sqrt();
    Ok(buf[..n].iter().map(|c| c.re * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(v: f64) -> HurstIndex {
        HurstIndex::new(v).unwrap()
    }

    #[test]
    fn hurst_bounds_enforced() {
        assert!(HurstIndex::new(0.0).is_err());
        assert!(HurstIndex::new(1.0).is_err());
        assert!(HurstIndex::new(-0.3).is_err());
        assert!(HurstIndex::new(1.5).is_err());
        assert!(HurstIndex::new(f64::NAN).is_err());
        assert!(HurstIndex::new(0.5).is_ok());
    }

    #[test]
    fn covariance_brownian_is_min() {
        // H = 1/2 reduces to Brownian motion: Cov(B(s), B(t)) = min(s, t).
        assert_eq!(fbm_covariance(h(0.5), 2.0, 3.0), 2.0);
        assert_eq!(fbm_covariance(h(0.5), 7.0, 4.0), 4.0);
    }

    #[test]
    fn covariance_pinned_at_origin() {
        for hv in [0.2, 0.5, 0.8] {
            assert_eq!(fbm_covariance(h(hv), 0.0, 5.0), 0.0);
        }
    }

    #[test]
    fn covariance_closed_form_value() {
        // (1/2)(1 + 2^0.6 - 1), frozen from high-precision evaluation.
        assert!((fbm_covariance(h(0.3), 1.0, 2.0) - 0.757858283255199).abs() < 1e-14);
    }

    #[test]
    fn fgn_white_noise_at_half() {
        assert_eq!(fgn_autocovariance(h(0.5), 0), 1.0);
        assert_eq!(fgn_autocovariance(h(0.5), 3), 0.0);
    }

    #[test]
    fn fgn_closed_form_value() {
        // (1/2)(2^1.4 - 2), frozen from high-precision evaluation.
        assert!((fgn_autocovariance(h(0.7), 1) - 0.319507910772894).abs() < 1e-14);
    }

    #[test]
    fn fgn_sums_telescope_to_variance() {
        // Sum_{j,k < n} r(j - k) = Var B(n) = n^{2H}.
        for hv in [0.2, 0.5, 0.8] {
            for n in [1i64, 4, 16, 33] {
                let mut sum = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        sum += fgn_autocovariance(h(hv), j - k);
                    }
                }
                let expect = (n as f64).powf(2.0 * hv);
                assert!(
                    (sum - expect).abs() < 1e-9 * expect.max(1.0),
                    "H={hv} n={n}: {sum} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn line_pinned_at_zero() {
        let mut s = RandomStream::new(42);
        let line = generate_fbm_line(h(0.3), -8, 8, &mut s).unwrap();
        assert_eq!(line.value(0), 0.0);
        assert_eq!(line.len(), 17);
    }

    #[test]
    fn line_deterministic_per_stream() {
        let mut a = RandomStream::substream(7, 3);
        let mut b = RandomStream::substream(7, 3);
        let la = generate_fbm_line(h(0.6), -4, 12, &mut a).unwrap();
        let lb = generate_fbm_line(h(0.6), -4, 12, &mut b).unwrap();
        assert_eq!(la.values(), lb.values());

        let mut c = RandomStream::substream(7, 4);
        let lc = generate_fbm_line(h(0.6), -4, 12, &mut c).unwrap();
        assert_ne!(la.values(), lc.values());
    }

    #[test]
    fn high_hurst_embedding_succeeds() {
        let mut s = RandomStream::new(1);
        for hv in [0.05, 0.5, 0.95, 0.99] {
            generate_fbm_line(h(hv), 0, 256, &mut s).unwrap();
        }
    }

    #[test]
    fn self_similarity_variance_ratio() {
        // Var(B(4)) / Var(B(1)) = 4^{0.6} for H = 0.3, Monte-Carlo.
        let hv = h(0.3);
        let reps = 10_000usize;
        let (mut v1, mut v4) = (0.0, 0.0);
        for i in 0..reps {
            let mut s = RandomStream::substream(99, i as u64);
            let line = generate_fbm_line(hv, -8, 8, &mut s).unwrap();
            v1 += line.value(1) * line.value(1);
            v4 += line.value(4) * line.value(4);
        }
        let ratio = v4 / v1;
        let expect = 2.29739670999407; // 4^0.6
        // Var of each estimator ~ sqrt(2/n); 3 sigma on the ratio is ~ 6%.
        assert!(
            (ratio - expect).abs() < 0.06 * expect,
            "ratio {ratio} vs {expect}"
        );
    }

    #[test]
    fn stationary_increments_variance() {
        // Var(B(j+d) - B(j)) = d^{2H} independently of j.
        let hv = h(0.7);
        let reps = 8_000usize;
        let d = 3i64;
        for j in [-6i64, -1, 0, 4] {
            let mut acc = 0.0;
            for i in 0..reps {
                let mut s = RandomStream::substream(5, i as u64);
                let line = generate_fbm_line(hv, -10, 10, &mut s).unwrap();
                let diff = line.value(j + d) - line.value(j);
                acc += diff * diff;
            }
            let var = acc / reps as f64;
            let expect = (d as f64).powf(1.4);
            assert!(
                (var - expect).abs() < 4.0 * expect * (2.0 / reps as f64).sqrt(),
                "j={j}: {var} vs {expect}"
            );
        }
    }

    proptest! {
        #[test]
        fn prop_pinned_and_deterministic(
            hv in 0.05f64..0.95,
            j_min in -24i64..=0,
            span in 1i64..48,
            seed in any::<u64>(),
        ) {
            let j_max = (j_min + span).max(1);
            let mut s1 = RandomStream::new(seed);
            let mut s2 = RandomStream::new(seed);
            let a = generate_fbm_line(h(hv), j_min, j_max, &mut s1).unwrap();
            let b = generate_fbm_line(h(hv), j_min, j_max, &mut s2).unwrap();
            prop_assert_eq!(a.value(0), 0.0);
            prop_assert_eq!(a.values(), b.values());
        }
    }
}
