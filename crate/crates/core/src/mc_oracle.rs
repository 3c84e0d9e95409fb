//! Monte-Carlo verification of the classical decoherence exponents.
//!
//! A single qubit accumulating phase from a classical noise field f(t)
//! under a pulse train with toggling sign s(t) picks up
//! Φ = ∫₀^τ f(t)·s(t) dt. Because f is Gaussian, the coherence is exactly
//! ⟨cos Φ⟩ = exp(-Var(Φ)/2), so χ⁽¹⁾ = Var(Φ)/4 matches the e^(-2χ)
//! envelope convention used everywhere else. This module samples exact
//! trajectories for the two analytic spectra and estimates χ⁽¹⁾ from the
//! phase variance, giving an integration-free cross-check of
//! `decoherence::chi_classical`.
//!
//! Reproducibility: every trial draws from a ChaCha stream addressed by
//! (master seed, trial index), the per-trial phases are collected in trial
//! order, and reductions are fixed-shape pairwise trees, so results are
//! bit-identical for a given seed regardless of thread count.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::noise::{NoiseError, NoiseSpectrum};
use crate::numeric::tree_sum;
use crate::pulse_filter::PulseSequence;

#[derive(Debug, Error)]
pub enum McError {
    #[error("{0}")]
    UnsupportedSpectrum(&'static str),
    #[error(
        "record length {record} is too short for spectral embedding; \
         need steps*dt >= {needed}"
    )]
    RecordTooShort { record: f64, needed: f64 },
    #[error(
        "circulant embedding produced a negative spectral weight ({min_eigenvalue:e}); \
         increase the record length"
    )]
    NegativeSpectralWeight { min_eigenvalue: f64 },
    #[error("time {t} lies outside the interrogation window [0, {tau}]")]
    OutsideWindow { t: f64, tau: f64 },
    #[error("variance estimation needs at least 2 trials, got {0}")]
    TooFewTrials(usize),
    #[error(
        "trajectory grid of {steps} steps exceeds the {max}-step budget; \
         shorten tau relative to tau_c"
    )]
    GridTooLarge { steps: usize, max: usize },
    #[error("{0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Monte-Carlo estimate of the per-qubit decoherence exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McChi {
    /// χ⁽¹⁾ = Var(Φ)/4.
    pub chi: f64,
    /// Bootstrap standard error of `chi`.
    pub stderr: f64,
    /// Sample mean of cos Φ; for Gaussian noise this is exp(-2χ⁽¹⁾) in
    /// distribution, so it cross-checks the variance route.
    pub mean_cos: f64,
    /// Sample variance of the accumulated phase, 4·chi.
    pub var_phase: f64,
    /// Set when stderr exceeds 20% of the estimate.
    pub low_confidence: bool,
    pub trials: usize,
    /// The timestep actually used (pulse-aligned, see `estimate_chi`).
    pub dt: f64,
}

/// Toggling sign s(t) of the pulse sequence: +1 before the first pulse,
/// flipping at each pulse instant.
pub fn toggling_sign(t: f64, seq: &PulseSequence) -> Result<f64, McError> {
    let tau = seq.tau();
    if !(0.0..=tau).contains(&t) {
        return Err(McError::OutsideWindow { t, tau });
    }
    let n = seq.n();
    if n == 0 {
        return Ok(1.0);
    }
    // Pulses sit at (m - 1/2)·τ/n; count how many lie at or before t.
    let flips = (t * f64::from(n) / tau + 0.5).floor() as u32;
    let flips = flips.min(n);
    Ok(if flips.is_multiple_of(2) { 1.0 } else { -1.0 })
}

/// Exact-discretization sampler for the Ornstein-Uhlenbeck process whose
/// spectrum is the Lorentzian form: x₀ ~ N(0, σ²), then
/// x_{k+1} = x_k·e^(-dt/τ_c) + σ·√(1 - e^(-2dt/τ_c))·ξ_k.
///
/// The sampled autocovariance is σ²·e^(-|lag|/τ_c) at every lag with no
/// discretization error.
pub fn sample_ou_path<R: Rng + ?Sized>(
    sigma: f64,
    tau_c: f64,
    dt: f64,
    steps: usize,
    rng: &mut R,
) -> Vec<f64> {
    debug_assert!(sigma >= 0.0 && tau_c > 0.0 && dt > 0.0);
    let rho = (-dt / tau_c).exp();
    let innovation = sigma * (1.0 - rho * rho).sqrt();
    let mut path = Vec::with_capacity(steps);
    let mut x = sigma * rng.sample::<f64, _>(StandardNormal);
    for _ in 0..steps {
        path.push(x);
        x = rho * x + innovation * rng.sample::<f64, _>(StandardNormal);
    }
    path
}

/// Stationary Gaussian-process sampler with autocovariance
/// σ²·exp(-t²/(2τ_c²)), built by circulant embedding: the wrapped
/// covariance ring is diagonalized by an FFT once, then each sample is one
/// FFT of spectrally weighted white noise.
pub struct GaussianSpectrumSampler {
    steps: usize,
    dt: f64,
    /// √(λ_k/M) for each ring frequency.
    weights: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for GaussianSpectrumSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaussianSpectrumSampler")
            .field("steps", &self.steps)
            .field("dt", &self.dt)
            .field("ring", &self.weights.len())
            .finish()
    }
}

impl GaussianSpectrumSampler {
    /// Prepares the embedding. Requires steps·dt ≥ 10·τ_c so the wrapped
    /// covariance is negligible at the seam; a shorter record risks
    /// negative spectral weights, reported as an error rather than clamped
    /// away silently.
    pub fn new(sigma: f64, tau_c: f64, dt: f64, steps: usize) -> Result<Self, McError> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(McError::InvalidParameter("sigma must be non-negative and finite"));
        }
        if !(tau_c > 0.0 && dt > 0.0 && steps > 0) {
            return Err(McError::InvalidParameter(
                "tau_c, dt, and steps must all be positive",
            ));
        }
        let record = steps as f64 * dt;
        let needed = 10.0 * tau_c;
        if record < needed {
            return Err(McError::RecordTooShort { record, needed });
        }
        let m = (2 * steps).next_power_of_two();
        let mut ring: Vec<Complex64> = (0..m)
            .map(|j| {
                let lag = j.min(m - j) as f64 * dt;
                Complex64::new(sigma * sigma * (-0.5 * (lag / tau_c).powi(2)).exp(), 0.0)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut ring);

        let max_eig = ring.iter().map(|c| c.re).fold(0.0f64, f64::max);
        let min_eig = ring.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        if min_eig < -1e-8 * max_eig {
            return Err(McError::NegativeSpectralWeight { min_eigenvalue: min_eig });
        }
        let weights = ring
            .iter()
            .map(|c| (c.re.max(0.0) / m as f64).sqrt())
            .collect();
        Ok(Self { steps, dt, weights, fft })
    }

    /// Draws one stationary path of length `steps`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut buf: Vec<Complex64> = self
            .weights
            .iter()
            .map(|&w| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                Complex64::new(w * a, w * b)
            })
            .collect();
        self.fft.process(&mut buf);
        buf.iter().take(self.steps).map(|c| c.re).collect()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// One-shot convenience over [`GaussianSpectrumSampler`].
pub fn sample_gaussian_spectrum_path<R: Rng + ?Sized>(
    sigma: f64,
    tau_c: f64,
    dt: f64,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<f64>, McError> {
    Ok(GaussianSpectrumSampler::new(sigma, tau_c, dt, steps)?.sample(rng))
}

/// Exact joint sampler for short Gaussian-correlation records.
///
/// The circulant route needs a ≥ 10·τ_c record, but an interrogation
/// window is often a fraction of τ_c. Here the steps×steps Toeplitz
/// covariance is Cholesky-factored once (with a 1e-12·σ² diagonal jitter
/// to absorb roundoff in the nearly rank-deficient smooth kernel) and each
/// trial is one triangular matrix-vector product.
struct CholeskySampler {
    steps: usize,
    /// Lower-triangular factor, row-packed: row k holds k+1 entries.
    factor: Vec<f64>,
}

impl CholeskySampler {
    fn new(sigma: f64, tau_c: f64, dt: f64, steps: usize) -> Result<Self, McError> {
        const MAX_STEPS: usize = 4096;
        if steps > MAX_STEPS {
            return Err(McError::GridTooLarge { steps, max: MAX_STEPS });
        }
        let cov: Vec<f64> = (0..steps)
            .map(|k| sigma * sigma * (-0.5 * (k as f64 * dt / tau_c).powi(2)).exp())
            .collect();
        let jitter = 1e-12 * sigma * sigma;
        let mut factor = vec![0.0f64; steps * (steps + 1) / 2];
        let row = |i: usize| i * (i + 1) / 2;
        for i in 0..steps {
            for j in 0..=i {
                let mut acc = cov[i - j] + if i == j { jitter } else { 0.0 };
                for k in 0..j {
                    acc -= factor[row(i) + k] * factor[row(j) + k];
                }
                if i == j {
                    if acc <= 0.0 {
                        return Err(McError::InvalidParameter(
                            "covariance factorization lost positive definiteness",
                        ));
                    }
                    factor[row(i) + j] = acc.sqrt();
                } else {
                    factor[row(i) + j] = acc / factor[row(j) + j];
                }
            }
        }
        Ok(Self { steps, factor })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let noise: Vec<f64> =
            (0..self.steps).map(|_| rng.sample(StandardNormal)).collect();
        let mut path = Vec::with_capacity(self.steps);
        let mut offset = 0;
        for i in 0..self.steps {
            let rowslice = &self.factor[offset..offset + i + 1];
            path.push(rowslice.iter().zip(&noise).map(|(l, z)| l * z).sum());
            offset += i + 1;
        }
        path
    }
}

enum PathSampler {
    Ou { sigma: f64, tau_c: f64 },
    GaussCholesky(CholeskySampler),
}

/// Pulse-aligned trajectory grid: dt divides τ so that every pulse instant
/// (odd multiple of τ/2n) is a grid boundary, and dt ≤ τ_c/50 and
/// dt ≤ τ/(50(n+1)) keep both the noise correlation and the toggling
/// pattern resolved. Sampling happens at interval midpoints, which never
/// coincide with a pulse.
fn aligned_grid(tau: f64, tau_c: f64, n: u32) -> Result<(usize, f64), McError> {
    const MAX_STEPS: usize = 1 << 20;
    let dt_max = (tau_c / 50.0).min(tau / (50.0 * f64::from(n + 1)));
    let wanted = (tau / dt_max).ceil() as usize;
    let steps = if n == 0 {
        wanted
    } else {
        let block = 2 * n as usize;
        wanted.div_ceil(block) * block
    };
    if steps > MAX_STEPS {
        return Err(McError::GridTooLarge { steps, max: MAX_STEPS });
    }
    Ok((steps, tau / steps as f64))
}

/// Estimates the per-qubit exponent χ⁽¹⁾ = Var(Φ)/4 from `trials`
/// simulated phase accumulations, with a bootstrap standard error.
///
/// Accepts the Lorentzian and Gaussian classical spectra. Multiply by N
/// for an entangled register. Deterministic for a given seed.
pub fn estimate_chi(
    spectrum: &NoiseSpectrum,
    seq: &PulseSequence,
    trials: usize,
    seed: u64,
) -> Result<McChi, McError> {
    if trials < 2 {
        return Err(McError::TooFewTrials(trials));
    }
    let tau = seq.tau();
    let n = seq.n();
    let (sigma, tau_c) = match spectrum {
        NoiseSpectrum::Lorentzian { sigma, tau_c } | NoiseSpectrum::Gaussian { sigma, tau_c } => {
            (*sigma, *tau_c)
        }
        _ => {
            return Err(McError::UnsupportedSpectrum(
                "trajectory sampling covers the lorentzian and gaussian classical spectra",
            ))
        }
    };
    if !(sigma >= 0.0 && sigma.is_finite() && tau_c > 0.0 && tau_c.is_finite()) {
        return Err(McError::InvalidParameter(
            "spectrum needs sigma >= 0 and tau_c > 0, both finite",
        ));
    }
    let (steps, dt) = aligned_grid(tau, tau_c, n)?;
    if sigma == 0.0 {
        // No noise, no phase: exactly zero without burning trajectories.
        return Ok(McChi {
            chi: 0.0,
            stderr: 0.0,
            mean_cos: 1.0,
            var_phase: 0.0,
            low_confidence: false,
            trials,
            dt,
        });
    }

    let sampler = match spectrum {
        NoiseSpectrum::Lorentzian { .. } => PathSampler::Ou { sigma, tau_c },
        NoiseSpectrum::Gaussian { .. } => {
            PathSampler::GaussCholesky(CholeskySampler::new(sigma, tau_c, dt, steps)?)
        }
        _ => unreachable!(),
    };

    let signs: Vec<f64> = (0..steps)
        .map(|i| toggling_sign((i as f64 + 0.5) * dt, seq).expect("midpoints lie inside [0, tau]"))
        .collect();

    let phases: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let path = match &sampler {
                PathSampler::Ou { sigma, tau_c } => {
                    sample_ou_path(*sigma, *tau_c, dt, steps, &mut rng)
                }
                PathSampler::GaussCholesky(chol) => chol.sample(&mut rng),
            };
            path.iter().zip(&signs).map(|(f, s)| f * s).sum::<f64>() * dt
        })
        .collect();

    let nf = trials as f64;
    let mean = tree_sum(&phases) / nf;
    let centered: Vec<f64> = phases.iter().map(|p| p - mean).collect();
    let squares: Vec<f64> = centered.iter().map(|p| p * p).collect();
    let var_phase = tree_sum(&squares) / (nf - 1.0);
    let chi = var_phase / 4.0;
    let cosines: Vec<f64> = phases.iter().map(|p| p.cos()).collect();
    let mean_cos = tree_sum(&cosines) / nf;

    // Bootstrap the variance estimator on a stream no trial can reach.
    const BOOTSTRAP_STREAM: u64 = 1 << 40;
    const RESAMPLES: usize = 128;
    let mut boot_rng = ChaCha8Rng::seed_from_u64(seed);
    boot_rng.set_stream(BOOTSTRAP_STREAM);
    let mut boot = Vec::with_capacity(RESAMPLES);
    for _ in 0..RESAMPLES {
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..trials {
            let v = centered[boot_rng.gen_range(0..trials)];
            sum += v;
            sumsq += v * v;
        }
        let m = sum / nf;
        boot.push((sumsq - nf * m * m) / ((nf - 1.0) * 4.0));
    }
    let boot_mean = tree_sum(&boot) / RESAMPLES as f64;
    let boot_dev: Vec<f64> = boot.iter().map(|b| (b - boot_mean) * (b - boot_mean)).collect();
    let stderr = (tree_sum(&boot_dev) / (RESAMPLES as f64 - 1.0)).sqrt();

    Ok(McChi {
        chi,
        stderr,
        mean_cos,
        var_phase,
        low_confidence: stderr > 0.2 * chi,
        trials,
        dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoherence::chi_classical;

    #[test]
    fn toggling_sign_reference_patterns() {
        let seq = PulseSequence::new(1, 1.0).unwrap();
        assert_eq!(toggling_sign(0.25, &seq).unwrap(), 1.0);
        assert_eq!(toggling_sign(0.75, &seq).unwrap(), -1.0);
        let seq = PulseSequence::new(2, 1.0).unwrap();
        assert_eq!(toggling_sign(0.1, &seq).unwrap(), 1.0);
        assert_eq!(toggling_sign(0.5, &seq).unwrap(), -1.0);
        assert_eq!(toggling_sign(0.9, &seq).unwrap(), 1.0);
        let seq = PulseSequence::new(0, 1.0).unwrap();
        assert_eq!(toggling_sign(0.99, &seq).unwrap(), 1.0);
        assert!(matches!(
            toggling_sign(1.5, &seq),
            Err(McError::OutsideWindow { .. })
        ));
        assert!(matches!(
            toggling_sign(-0.1, &seq),
            Err(McError::OutsideWindow { .. })
        ));
    }

    #[test]
    fn toggling_sign_flips_exactly_at_pulses() {
        let tau = 2.0;
        for n in 1..=6u32 {
            let seq = PulseSequence::new(n, tau).unwrap();
            for (m, &pulse) in seq.pulse_instants().iter().enumerate() {
                let before = toggling_sign(pulse - 1e-12, &seq).unwrap();
                let after = toggling_sign(pulse + 1e-12, &seq).unwrap();
                assert_eq!(before, -after, "n = {n}, pulse {m}");
            }
        }
    }

    #[test]
    fn balanced_sequences_integrate_to_zero() {
        for n in 1..=6u32 {
            let tau = 1.3;
            let seq = PulseSequence::new(n, tau).unwrap();
            let steps = 2 * n as usize * 100;
            let dt = tau / steps as f64;
            let total: f64 = (0..steps)
                .map(|i| toggling_sign((i as f64 + 0.5) * dt, &seq).unwrap() * dt)
                .sum();
            assert!(total.abs() < 1e-12 * tau, "n = {n}: {total}");
        }
    }

    #[test]
    fn ou_sampler_matches_target_autocovariance() {
        let sigma = 1.3f64;
        let tau_c = 0.7f64;
        let dt = 0.05 * tau_c;
        let steps = 2000;
        let paths = 200;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut lag0 = 0.0;
        let mut lag_tc = 0.0;
        let lag = (tau_c / dt).round() as usize;
        let mut count0 = 0usize;
        let mut count1 = 0usize;
        for _ in 0..paths {
            let p = sample_ou_path(sigma, tau_c, dt, steps, &mut rng);
            for i in 0..steps {
                lag0 += p[i] * p[i];
                count0 += 1;
                if i + lag < steps {
                    lag_tc += p[i] * p[i + lag];
                    count1 += 1;
                }
            }
        }
        let s2 = sigma * sigma;
        let lag0 = lag0 / count0 as f64;
        let lag_tc = lag_tc / count1 as f64;
        assert!((lag0 / s2 - 1.0).abs() < 0.05, "lag0 = {lag0}");
        assert!(
            (lag_tc / (s2 * (-1.0f64).exp()) - 1.0).abs() < 0.1,
            "lag tau_c = {lag_tc}"
        );
    }

    #[test]
    fn zero_amplitude_paths_are_identically_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = sample_ou_path(0.0, 1.0, 0.1, 50, &mut rng);
        assert!(p.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn gaussian_sampler_matches_target_autocovariance() {
        let sigma = 1.1;
        let tau_c = 1.0;
        let dt = 0.1 * tau_c;
        let steps = 120; // record 12 tau_c
        let sampler = GaussianSpectrumSampler::new(sigma, tau_c, dt, steps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let paths = 20_000;
        let lags = [0usize, 10, 20, 30]; // 0, tau_c, 2 tau_c, 3 tau_c
        let mut acc = [0.0f64; 4];
        let mut cnt = [0usize; 4];
        for _ in 0..paths {
            let p = sampler.sample(&mut rng);
            for (li, &lag) in lags.iter().enumerate() {
                for i in 0..steps - lag {
                    acc[li] += p[i] * p[i + lag];
                    cnt[li] += 1;
                }
            }
        }
        for (li, &lag) in lags.iter().enumerate() {
            let target =
                sigma * sigma * (-0.5 * (lag as f64 * dt / tau_c).powi(2)).exp();
            let got = acc[li] / cnt[li] as f64;
            assert!(
                (got - target).abs() < 0.015 * sigma * sigma,
                "lag {lag}: {got} vs {target}"
            );
        }
    }

    #[test]
    fn gaussian_sampler_rejects_short_records() {
        match GaussianSpectrumSampler::new(1.0, 1.0, 0.1, 50) {
            Err(McError::RecordTooShort { .. }) => {}
            other => panic!("expected RecordTooShort, got {other:?}"),
        }
    }

    #[test]
    fn different_streams_are_uncorrelated() {
        let sigma = 1.0;
        let tau_c = 1.0;
        let dt = 0.1;
        let steps = 150;
        let mut rng_a = ChaCha8Rng::seed_from_u64(5);
        rng_a.set_stream(1);
        let mut rng_b = ChaCha8Rng::seed_from_u64(5);
        rng_b.set_stream(2);
        let a = sample_gaussian_spectrum_path(sigma, tau_c, dt, steps, &mut rng_a).unwrap();
        let b = sample_gaussian_spectrum_path(sigma, tau_c, dt, steps, &mut rng_b).unwrap();
        let cross: f64 =
            a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / steps as f64;
        assert!(cross.abs() < 3.0 / (steps as f64).sqrt(), "cross = {cross}");
    }

    #[test]
    fn ramsey_estimate_matches_the_closed_form() {
        // Var(Φ) = 2σ²τ_c²(e^(-x) - 1 + x) for free evolution under
        // Ornstein-Uhlenbeck noise.
        let sigma = 1.0;
        let tau_c = 1.0;
        let tau = 0.3;
        let spectrum = NoiseSpectrum::Lorentzian { sigma, tau_c };
        let seq = PulseSequence::new(0, tau).unwrap();
        let mc = estimate_chi(&spectrum, &seq, 20_000, 99).unwrap();
        let x: f64 = tau / tau_c;
        let exact = 2.0 * sigma * sigma * tau_c * tau_c * ((-x).exp() - 1.0 + x) / 4.0;
        assert!(
            (mc.chi - exact).abs() < (3.0 * mc.stderr).max(0.02 * exact),
            "mc {} vs exact {exact} (stderr {})",
            mc.chi,
            mc.stderr
        );
        assert!(!mc.low_confidence);
    }

    #[test]
    fn echo_estimate_matches_quadrature_for_gaussian_noise() {
        let spectrum = NoiseSpectrum::Gaussian { sigma: 1.0, tau_c: 1.0 };
        let seq = PulseSequence::new(1, 0.4).unwrap();
        let mc = estimate_chi(&spectrum, &seq, 20_000, 123).unwrap();
        let quad = chi_classical(&spectrum, &seq, 1).unwrap().chi;
        assert!(
            (mc.chi - quad).abs() < (3.0 * mc.stderr).max(0.05 * quad),
            "mc {} vs quadrature {quad} (stderr {})",
            mc.chi,
            mc.stderr
        );
    }

    #[test]
    fn cpmg_estimate_matches_quadrature_for_lorentzian_noise() {
        let spectrum = NoiseSpectrum::Lorentzian { sigma: 1.5, tau_c: 1.0 };
        let seq = PulseSequence::new(2, 0.5).unwrap();
        let mc = estimate_chi(&spectrum, &seq, 20_000, 7).unwrap();
        let quad = chi_classical(&spectrum, &seq, 1).unwrap().chi;
        assert!(
            (mc.chi - quad).abs() < (3.0 * mc.stderr).max(0.05 * quad),
            "mc {} vs quadrature {quad} (stderr {})",
            mc.chi,
            mc.stderr
        );
    }

    #[test]
    fn estimates_are_seed_deterministic() {
        let spectrum = NoiseSpectrum::Lorentzian { sigma: 1.0, tau_c: 1.0 };
        let seq = PulseSequence::new(1, 0.3).unwrap();
        let a = estimate_chi(&spectrum, &seq, 500, 42).unwrap();
        let b = estimate_chi(&spectrum, &seq, 500, 42).unwrap();
        assert_eq!(a.chi.to_bits(), b.chi.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        assert_eq!(a.mean_cos.to_bits(), b.mean_cos.to_bits());
        let c = estimate_chi(&spectrum, &seq, 500, 43).unwrap();
        assert_ne!(a.chi.to_bits(), c.chi.to_bits());
    }

    #[test]
    fn phase_statistics_are_gaussian() {
        // ⟨cos Φ⟩ = e^(-Var/2) exactly in distribution; check the sample
        // statistics agree within a loose statistical margin.
        let spectrum = NoiseSpectrum::Lorentzian { sigma: 1.0, tau_c: 1.0 };
        let seq = PulseSequence::new(0, 0.5).unwrap();
        let mc = estimate_chi(&spectrum, &seq, 20_000, 17).unwrap();
        let predicted = (-mc.var_phase / 2.0).exp();
        assert!(
            (mc.mean_cos - predicted).abs() < 0.01,
            "mean cos {} vs e^(-Var/2) {predicted}",
            mc.mean_cos
        );
    }

    #[test]
    fn zero_noise_amplitude_gives_exactly_zero() {
        let spectrum = NoiseSpectrum::Lorentzian { sigma: 0.0, tau_c: 1.0 };
        let seq = PulseSequence::new(1, 0.3).unwrap();
        let mc = estimate_chi(&spectrum, &seq, 100, 1).unwrap();
        assert_eq!(mc.chi, 0.0);
        assert_eq!(mc.stderr, 0.0);
        assert!(!mc.low_confidence);
    }

    #[test]
    fn tiny_trial_counts_are_flagged() {
        let spectrum = NoiseSpectrum::Lorentzian { sigma: 1.0, tau_c: 1.0 };
        let seq = PulseSequence::new(1, 0.3).unwrap();
        let mc = estimate_chi(&spectrum, &seq, 20, 3).unwrap();
        assert!(mc.low_confidence, "stderr {} vs chi {}", mc.stderr, mc.chi);
        assert!(matches!(
            estimate_chi(&spectrum, &seq, 1, 3),
            Err(McError::TooFewTrials(1))
        ));
    }

    #[test]
    fn non_classical_spectra_are_rejected() {
        let seq = PulseSequence::new(1, 0.3).unwrap();
        let ohmic = NoiseSpectrum::OhmicCutoff { alpha: 0.1, omega_d: 1.0 };
        assert!(matches!(
            estimate_chi(&ohmic, &seq, 100, 1),
            Err(McError::UnsupportedSpectrum(_))
        ));
    }

    #[test]
    fn grid_alignment_places_pulses_on_boundaries() {
        let tau = 0.8;
        let tau_c = 1.0;
        for n in [1u32, 2, 4, 5] {
            let (steps, dt) = aligned_grid(tau, tau_c, n).unwrap();
            assert_eq!(steps % (2 * n as usize), 0);
            let seq = PulseSequence::new(n, tau).unwrap();
            for pulse in seq.pulse_instants() {
                let idx = pulse / dt;
                assert!(
                    (idx - idx.round()).abs() < 1e-9,
                    "n = {n}: pulse {pulse} not aligned (dt {dt})"
                );
            }
            assert!(dt <= tau_c / 50.0 + 1e-15);
            assert!(dt <= tau / (50.0 * f64::from(n + 1)) + 1e-15);
        }
    }
}
