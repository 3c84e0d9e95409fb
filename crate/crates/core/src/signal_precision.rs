//! Ramsey signal, shot-noise uncertainty, and the N-scaling of precision.
//!
//! A GHZ register of N qubits interrogated for a time τ under an n-pulse
//! sequence picks up the deterministic phase Nφ with φ = 4Δτ/π per qubit,
//! on top of the stochastic dephasing exponent χ. The parity-type signal is
//!
//!   s_n(τ) = cos(Nφ)·exp(-2χ),
//!
//! measured as the population p = (1 + s_n)/2. Operating at the
//! slope-maximizing bias Nφ ≡ π/2 (mod π) and repeating l = T_t/τ times,
//! the shot-noise uncertainty of the signal amplitude is
//!
//!   δΔ = √(p(1-p)) / (|dp/dΔ|·√l) = π·e^(2χ)/(4Nτ)·√(τ/T_t).
//!
//! Minimizing over τ for a power-law exponent χ = a·N·τ^v gives
//! τ* = (4v·a·N)^(-1/v) and δΔ* ∝ N^(-k) with k = (2v-1)/(2v), which is
//! what [`scaling_scan`] extracts numerically. Optimization happens in
//! log space (the objective is ln δΔ, linear in χ), so enormous exponents
//! at the bracket edges cannot overflow.

use thiserror::Error;

use std::f64::consts::PI;

use crate::decoherence::{
    fit_power_law, small_tau_exponent, small_tau_prefactor, ChiResult, DecoherenceError,
};
use crate::noise::NoiseSpectrum;
use crate::pulse_filter::{PulseError, PulseSequence};

#[derive(Debug, Error)]
pub enum PrecisionError {
    #[error("insensitive operating point: the signal slope vanished (chi = {chi})")]
    InsensitiveOperatingPoint { chi: f64 },
    #[error(
        "interrogation time {tau} exceeds the total budget {total_time}; \
         repetitions l = T_t/tau must be at least 1"
    )]
    RepetitionsBelowOne { tau: f64, total_time: f64 },
    #[error(
        "no interior minimum: the optimum sits at the {} edge of [{tau_lo:e}, {tau_hi:e}]",
        if *at_upper { "upper" } else { "lower" }
    )]
    NoInteriorMinimum { tau_lo: f64, tau_hi: f64, at_upper: bool },
    #[error("bracket must satisfy 0 < lo < hi, got [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("{0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Decoherence(#[from] DecoherenceError),
    #[error(transparent)]
    Pulse(#[from] PulseError),
}

/// The sensing ensemble and measurement budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub n_qubits: u32,
    /// Signal amplitude Δ (rad/s); only the reported signal column depends
    /// on it, the uncertainty is evaluated at the optimal bias.
    pub delta: f64,
    /// Total measurement duration T_t (s) shared by all repetitions.
    pub total_time: f64,
    /// Gyromagnetic ratio (rad/(s·T)) for converting between a magnetic
    /// field amplitude B and Δ = γB; optional because Δ can be used directly.
    pub gamma: Option<f64>,
}

impl EnsembleConfig {
    fn validate(&self) -> Result<(), PrecisionError> {
        if self.n_qubits == 0 {
            return Err(PrecisionError::InvalidConfig("n_qubits must be at least 1"));
        }
        if !(self.total_time > 0.0 && self.total_time.is_finite()) {
            return Err(PrecisionError::InvalidConfig("total_time must be positive and finite"));
        }
        if !self.delta.is_finite() {
            return Err(PrecisionError::InvalidConfig("delta must be finite"));
        }
        Ok(())
    }

    /// Δ = γB, when a gyromagnetic ratio was supplied.
    pub fn delta_from_field(&self, field: f64) -> Option<f64> {
        self.gamma.map(|g| g * field)
    }

    /// Converts an uncertainty in Δ to one in the field amplitude.
    pub fn field_uncertainty(&self, delta_delta: f64) -> Option<f64> {
        self.gamma.map(|g| delta_delta / g)
    }
}

/// One evaluated operating point of the interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionPoint {
    pub tau: f64,
    /// s_n(τ) at the configured Δ (not at the measurement bias).
    pub signal: f64,
    pub chi: f64,
    pub delta_delta: f64,
}

/// Result of fitting δΔ* ∝ N^(-k) across qubit counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    /// Fitted exponent, reported positive.
    pub k: f64,
    /// Standard error of k from the log-log fit.
    pub stderr: f64,
    /// Gain over the standard quantum limit, k - 1/2.
    pub enhancement_exponent: f64,
    /// The per-N optima the fit ran over.
    pub points: Vec<(u32, PrecisionPoint)>,
}

/// How the register is prepared and read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Maximally entangled probe: phase Nφ, exponent N·χ⁽¹⁾.
    Ghz,
    /// N independent single-qubit interferometers averaged together.
    Separable,
}

/// Source of the dephasing exponent χ(τ) used by the optimizer.
#[derive(Debug, Clone, PartialEq)]
pub enum DecayModel {
    /// Spin-boson bath evaluated through the quantum integral.
    Quantum { spectrum: NoiseSpectrum, temperature: f64 },
    /// Classical stationary noise evaluated through the spectral integral.
    Classical { spectrum: NoiseSpectrum },
    /// Closed-form χ = a·N·τ^v, for exercising the scaling machinery
    /// against exact exponent identities.
    SyntheticPowerLaw { a: f64, v: f64 },
}

impl DecayModel {
    /// The ensemble exponent χ = N·χ⁽¹⁾ at the given sequence.
    pub fn chi(&self, seq: &PulseSequence, n_qubits: u32) -> Result<ChiResult, DecoherenceError> {
        match self {
            Self::Quantum { spectrum, temperature } => {
                crate::decoherence::chi_quantum(spectrum, *temperature, seq, n_qubits)
            }
            Self::Classical { spectrum } => {
                crate::decoherence::chi_classical(spectrum, seq, n_qubits)
            }
            Self::SyntheticPowerLaw { a, v } => Ok(ChiResult {
                chi: a * f64::from(n_qubits) * seq.tau().powf(*v),
                abs_error_estimate: 0.0,
                integrand_evaluations: 0,
            }),
        }
    }

    /// Rejects parameterizations no χ can come from.
    pub fn validate(&self) -> Result<(), PrecisionError> {
        if let Self::SyntheticPowerLaw { a, v } = self {
            if !(*a > 0.0 && a.is_finite() && *v > 0.0 && v.is_finite()) {
                return Err(PrecisionError::InvalidConfig(
                    "synthetic power law needs positive finite a and v",
                ));
            }
        }
        Ok(())
    }
}

/// Search interval for the interrogation-time optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauBracket {
    pub lo: f64,
    pub hi: f64,
}

impl TauBracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self, PrecisionError> {
        if lo > 0.0 && lo < hi && hi.is_finite() {
            Ok(Self { lo, hi })
        } else {
            Err(PrecisionError::InvalidBracket { lo, hi })
        }
    }
}

/// Deterministic phase per qubit, φ = 4Δτ/π.
///
/// The signal transfer slope dφ/dΔ = 4τ/π is what propagates shot noise
/// into frequency uncertainty.
pub fn phase_per_qubit(delta: f64, tau: f64) -> f64 {
    4.0 * delta * tau / PI
}

/// GHZ signal s_n(τ) = cos(Nφ)·exp(-2χ) at the configured Δ.
///
/// `chi` is the ensemble exponent (already scaled by N).
pub fn signal_ghz(cfg: &EnsembleConfig, chi: f64, tau: f64) -> f64 {
    let total_phase = f64::from(cfg.n_qubits) * phase_per_qubit(cfg.delta, tau);
    total_phase.cos() * (-2.0 * chi).exp()
}

/// Shot-noise uncertainty at an arbitrary bias b (the value of Nφ modulo π),
/// carried through the binomial form δΔ = √(p(1-p))/(|dp/dΔ|·√l).
fn uncertainty_at_bias(
    cfg: &EnsembleConfig,
    tau: f64,
    chi: f64,
    bias: f64,
) -> Result<f64, PrecisionError> {
    if tau > cfg.total_time {
        return Err(PrecisionError::RepetitionsBelowOne { tau, total_time: cfg.total_time });
    }
    let envelope = (-2.0 * chi).exp();
    let s = bias.cos() * envelope;
    let p = 0.5 * (1.0 + s);
    let repetitions = cfg.total_time / tau;
    let slope_p =
        0.5 * f64::from(cfg.n_qubits) * (4.0 * tau / PI) * envelope * bias.sin().abs();
    if slope_p == 0.0 {
        return Err(PrecisionError::InsensitiveOperatingPoint { chi });
    }
    Ok((p * (1.0 - p)).sqrt() / (slope_p * repetitions.sqrt()))
}

/// Frequency uncertainty of the GHZ protocol at the slope-maximizing bias
/// Nφ ≡ π/2 (mod π), where it reduces to δΔ = π·e^(2χ)/(4Nτ)·√(τ/T_t).
pub fn uncertainty_ghz(
    cfg: &EnsembleConfig,
    seq: &PulseSequence,
    chi: &ChiResult,
) -> Result<PrecisionPoint, PrecisionError> {
    cfg.validate()?;
    let tau = seq.tau();
    let delta_delta = uncertainty_at_bias(cfg, tau, chi.chi, 0.5 * PI)?;
    Ok(PrecisionPoint { tau, signal: signal_ghz(cfg, chi.chi, tau), chi: chi.chi, delta_delta })
}

/// Frequency uncertainty of N independent single-qubit interferometers:
/// the single-qubit δΔ averaged down by √N.
///
/// `chi_single` is the per-qubit exponent χ⁽¹⁾.
pub fn uncertainty_separable(
    cfg: &EnsembleConfig,
    seq: &PulseSequence,
    chi_single: f64,
) -> Result<PrecisionPoint, PrecisionError> {
    cfg.validate()?;
    let single = EnsembleConfig { n_qubits: 1, ..*cfg };
    let tau = seq.tau();
    let one = uncertainty_at_bias(&single, tau, chi_single, 0.5 * PI)?;
    Ok(PrecisionPoint {
        tau,
        signal: signal_ghz(&single, chi_single, tau),
        chi: chi_single,
        delta_delta: one / f64::from(cfg.n_qubits).sqrt(),
    })
}

/// ln δΔ at the optimal bias, linear in χ so it never overflows.
fn log_uncertainty(cfg: &EnsembleConfig, tau: f64, chi: f64) -> f64 {
    2.0 * chi + (0.25 * PI).ln() - (f64::from(cfg.n_qubits) * tau).ln()
        + 0.5 * (tau / cfg.total_time).ln()
}

fn golden_minimum<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64, PrecisionError>
where
    F: FnMut(f64) -> Result<f64, PrecisionError>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Finds the interrogation time minimizing δΔ for the GHZ protocol.
///
/// `chi_fn` maps τ to the ensemble exponent. The search is golden-section
/// on ln τ to 1e-4 relative tolerance; a minimizer pinned to either bracket
/// edge is reported as [`PrecisionError::NoInteriorMinimum`] rather than
/// returned as if it were an optimum.
pub fn optimal_tau<F>(
    cfg: &EnsembleConfig,
    n_pulses: u32,
    mut chi_fn: F,
    bracket: TauBracket,
) -> Result<(f64, PrecisionPoint), PrecisionError>
where
    F: FnMut(f64) -> Result<ChiResult, DecoherenceError>,
{
    cfg.validate()?;
    let hi = bracket.hi.min(cfg.total_time);
    if !(bracket.lo > 0.0 && bracket.lo < hi) {
        return Err(PrecisionError::InvalidBracket { lo: bracket.lo, hi });
    }
    let (a, b) = (bracket.lo.ln(), hi.ln());
    let x_star = golden_minimum(
        |x| {
            let tau = x.exp();
            let chi = chi_fn(tau)?;
            Ok(log_uncertainty(cfg, tau, chi.chi))
        },
        a,
        b,
        1e-4,
    )?;
    // A minimizer hugging an edge means the bracket clipped the optimum.
    let margin = (0.01 * (b - a)).max(5e-4);
    if x_star - a < margin || b - x_star < margin {
        return Err(PrecisionError::NoInteriorMinimum {
            tau_lo: bracket.lo,
            tau_hi: hi,
            at_upper: b - x_star < margin,
        });
    }
    let tau_star = x_star.exp();
    let seq = PulseSequence::new(n_pulses, tau_star)?;
    let chi = chi_fn(tau_star)?;
    let point = uncertainty_ghz(cfg, &seq, &chi)?;
    Ok((tau_star, point))
}

/// Default bracket centered on the analytic small-τ optimum when one is
/// available, otherwise spanning the sub-correlation-time decades.
fn default_bracket(
    model: &DecayModel,
    n_pulses: u32,
    n_qubits: u32,
) -> Result<TauBracket, PrecisionError> {
    let around = |scale: f64| TauBracket::new(0.05 * scale, 6.0 * scale);
    match model {
        DecayModel::SyntheticPowerLaw { a, v } => {
            let scale = (4.0 * v * a * f64::from(n_qubits)).powf(-1.0 / v);
            around(scale)
        }
        DecayModel::Quantum {
            spectrum: NoiseSpectrum::OhmicCutoff { alpha, omega_d }, ..
        } => {
            let v = small_tau_exponent(n_pulses);
            let a = small_tau_prefactor(*alpha, *omega_d, n_pulses) * f64::from(n_qubits);
            around((4.0 * v * a).powf(-1.0 / v))
        }
        DecayModel::Classical {
            spectrum:
                NoiseSpectrum::Lorentzian { tau_c, .. } | NoiseSpectrum::Gaussian { tau_c, .. },
        } => TauBracket::new(1e-5 * tau_c, 0.8 * tau_c),
        _ => Err(PrecisionError::InvalidConfig(
            "no default bracket for this decay model; supply one explicitly",
        )),
    }
}

fn widen(bracket: TauBracket, at_upper: bool, cap: f64) -> Result<TauBracket, PrecisionError> {
    if at_upper {
        TauBracket::new(bracket.lo, (bracket.hi * 10.0).min(cap))
    } else {
        TauBracket::new(bracket.lo / 10.0, bracket.hi)
    }
}

/// Optimizes τ for each qubit count and fits δΔ* ∝ N^(-k).
///
/// The template's qubit count is replaced by each entry of `n_list` in
/// turn. Brackets warm-start from the previous optimum and are widened and
/// retried when an optimum lands on an edge. Passing a bracket overrides
/// the model-derived default for the first qubit count.
pub fn scaling_scan(
    template: &EnsembleConfig,
    protocol: Protocol,
    model: &DecayModel,
    n_pulses: u32,
    n_list: &[u32],
    bracket: Option<TauBracket>,
) -> Result<ScalingFit, PrecisionError> {
    template.validate()?;
    model.validate()?;
    if n_list.len() < 2 {
        return Err(PrecisionError::InvalidConfig(
            "scaling fit needs at least two qubit counts (six spanning two decades recommended)",
        ));
    }
    if n_list.contains(&0) {
        return Err(PrecisionError::InvalidConfig("qubit counts must be at least 1"));
    }

    let mut points: Vec<(u32, PrecisionPoint)> = Vec::with_capacity(n_list.len());
    let mut prev_tau: Option<f64> = None;
    for &n_qubits in n_list {
        // Separable probes optimize the single-qubit problem; the ensemble
        // only contributes the √N average afterwards.
        let opt_qubits = match protocol {
            Protocol::Ghz => n_qubits,
            Protocol::Separable => 1,
        };
        let cfg = EnsembleConfig { n_qubits: opt_qubits, ..*template };
        let mut chi_fn = |tau: f64| {
            let seq = PulseSequence::new(n_pulses, tau)
                .expect("bracketed search keeps tau positive and finite");
            model.chi(&seq, opt_qubits)
        };

        let mut current = match prev_tau {
            Some(t) => TauBracket::new(t / 50.0, t * 8.0)?,
            None => match bracket {
                Some(b) => b,
                None => default_bracket(model, n_pulses, opt_qubits)?,
            },
        };
        let mut found = None;
        for _ in 0..4 {
            match optimal_tau(&cfg, n_pulses, &mut chi_fn, current) {
                Ok(result) => {
                    found = Some(result);
                    break;
                }
                Err(PrecisionError::NoInteriorMinimum { at_upper, .. }) => {
                    current = widen(current, at_upper, template.total_time)?;
                }
                Err(other) => return Err(other),
            }
        }
        let (tau_star, mut point) =
            found.ok_or(PrecisionError::NoInteriorMinimum {
                tau_lo: current.lo,
                tau_hi: current.hi,
                at_upper: true,
            })?;
        if protocol == Protocol::Separable {
            point.delta_delta /= f64::from(n_qubits).sqrt();
        }
        points.push((n_qubits, point));
        prev_tau = Some(tau_star);
    }

    let ns: Vec<f64> = points.iter().map(|(n, _)| f64::from(*n)).collect();
    let dds: Vec<f64> = points.iter().map(|(_, p)| p.delta_delta).collect();
    let fit = fit_power_law(&ns, &dds).map_err(PrecisionError::Decoherence)?;
    let k = -fit.exponent;
    Ok(ScalingFit { k, stderr: fit.stderr, enhancement_exponent: k - 0.5, points })
}
