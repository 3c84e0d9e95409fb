//! Bath spectral densities and the thermal occupation kernel.
//!
//! Two families share one interface. Quantum baths are described by a
//! spectral density J(ω) (here Ohmic with a hard ultraviolet cutoff,
//! J = 2αω for ω ≤ ω_D, or a tabulated curve) weighted in the decoherence
//! integral by coth(ħω/2k_B T). Classical stationary dephasing noise f(t) is
//! described by the two-sided power spectrum of its autocovariance
//! g(t) = ⟨f(t')f(t'+t)⟩,
//!
//!   S(ω) = ∫ g(t) e^(-iωt) dt,   evaluated at ω ≥ 0 (S is even),
//!
//! so g(0) = σ² fixes the closure (1/π)·∫₀^∞ S(ω) dω = σ². The shipped
//! classical forms are the Ornstein-Uhlenbeck (Lorentzian) spectrum
//! S = 2σ²τ_c/(1 + ω²τ_c²) and the Gaussian-correlation spectrum
//! S = σ²τ_c√(2π)·exp(-ω²τ_c²/2).

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::constants::{HBAR, K_B};

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("spectral density is defined for omega >= 0, got {0}")]
    NegativeFrequency(f64),
    #[error("tabulated spectrum needs at least two grid points")]
    TableTooShort,
    #[error("tabulated grid must be strictly increasing at row {0}")]
    NonIncreasingGrid(usize),
    #[error("tabulated density must be non-negative at row {0}")]
    NegativeDensity(usize),
    #[error("tabulated grid must start at omega >= 0")]
    NegativeGridStart,
    #[error("row {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("failed to read spectrum file: {0}")]
    Io(#[from] std::io::Error),
}

/// A spectral density tabulated on a strictly increasing frequency grid.
///
/// Linearly interpolated between grid points, zero outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSpectrum {
    omegas: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedSpectrum {
    pub fn new(omegas: Vec<f64>, values: Vec<f64>) -> Result<Self, NoiseError> {
        if omegas.len() != values.len() {
            return Err(NoiseError::Malformed {
                line: 0,
                reason: "frequency and density columns differ in length".into(),
            });
        }
        if omegas.len() < 2 {
            return Err(NoiseError::TableTooShort);
        }
        if omegas[0] < 0.0 {
            return Err(NoiseError::NegativeGridStart);
        }
        for i in 1..omegas.len() {
            if !(omegas[i] > omegas[i - 1]) {
                return Err(NoiseError::NonIncreasingGrid(i));
            }
        }
        if let Some(i) = values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(NoiseError::NegativeDensity(i));
        }
        Ok(Self { omegas, values })
    }

    /// Parses two comma-separated columns (omega, density); one optional
    /// header line is skipped if its fields do not parse as numbers.
    pub fn from_csv_str(text: &str) -> Result<Self, NoiseError> {
        let mut omegas = Vec::new();
        let mut values = Vec::new();
        let mut saw_data = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(NoiseError::Malformed {
                    line: idx + 1,
                    reason: format!("expected 2 comma-separated fields, got {}", fields.len()),
                });
            }
            match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
                (Ok(w), Ok(v)) => {
                    omegas.push(w);
                    values.push(v);
                    saw_data = true;
                }
                _ if !saw_data => continue, // header row
                _ => {
                    return Err(NoiseError::Malformed {
                        line: idx + 1,
                        reason: "fields did not parse as numbers".into(),
                    })
                }
            }
        }
        Self::new(omegas, values)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self, NoiseError> {
        Self::from_csv_str(&fs::read_to_string(path)?)
    }

    /// Highest tabulated frequency; the density is zero beyond it.
    pub fn omega_end(&self) -> f64 {
        *self.omegas.last().unwrap()
    }

    fn interpolate(&self, omega: f64) -> f64 {
        if omega < self.omegas[0] || omega > self.omega_end() {
            return 0.0;
        }
        let i = match self.omegas.partition_point(|&w| w <= omega) {
            0 => 0,
            p => (p - 1).min(self.omegas.len() - 2),
        };
        let (w0, w1) = (self.omegas[i], self.omegas[i + 1]);
        let t = (omega - w0) / (w1 - w0);
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }
}

/// Noise spectral density: quantum bath J(ω) or classical power spectrum S(ω).
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSpectrum {
    /// J(ω) = 2αω for ω ≤ ω_D, zero above the cutoff.
    OhmicCutoff { alpha: f64, omega_d: f64 },
    /// Ornstein-Uhlenbeck noise, g(t) = σ²·exp(-|t|/τ_c):
    /// S(ω) = 2σ²τ_c/(1 + ω²τ_c²).
    Lorentzian { sigma: f64, tau_c: f64 },
    /// Gaussian-correlation noise, g(t) = σ²·exp(-t²/2τ_c²):
    /// S(ω) = σ²τ_c√(2π)·exp(-ω²τ_c²/2).
    Gaussian { sigma: f64, tau_c: f64 },
    /// Tabulated density on a frequency grid.
    Tabulated(TabulatedSpectrum),
}

impl NoiseSpectrum {
    /// Density at `omega` (rad/s). Negative frequencies are a domain error.
    pub fn density(&self, omega: f64) -> Result<f64, NoiseError> {
        if omega < 0.0 {
            return Err(NoiseError::NegativeFrequency(omega));
        }
        Ok(self.density_nonneg(omega))
    }

    /// Density evaluation with the ω ≥ 0 precondition already established.
    pub(crate) fn density_nonneg(&self, omega: f64) -> f64 {
        match self {
            Self::OhmicCutoff { alpha, omega_d } => {
                if omega <= *omega_d {
                    2.0 * alpha * omega
                } else {
                    0.0
                }
            }
            Self::Lorentzian { sigma, tau_c } => {
                let wt = omega * tau_c;
                2.0 * sigma * sigma * tau_c / (1.0 + wt * wt)
            }
            Self::Gaussian { sigma, tau_c } => {
                let wt = omega * tau_c;
                sigma * sigma * tau_c * (2.0 * std::f64::consts::PI).sqrt()
                    * (-0.5 * wt * wt).exp()
            }
            Self::Tabulated(table) => table.interpolate(omega),
        }
    }

    /// Checks parameter positivity; used once at entry points so the hot
    /// density path can skip it.
    pub fn validate(&self) -> Result<(), NoiseError> {
        let bad = |reason: &str| NoiseError::Malformed { line: 0, reason: reason.into() };
        match self {
            Self::OhmicCutoff { alpha, omega_d } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(bad("coupling alpha must be positive and finite"));
                }
                if !(*omega_d > 0.0 && omega_d.is_finite()) {
                    return Err(bad("cutoff omega_d must be positive and finite"));
                }
            }
            Self::Lorentzian { sigma, tau_c } | Self::Gaussian { sigma, tau_c } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return Err(bad("noise amplitude sigma must be positive and finite"));
                }
                if !(*tau_c > 0.0 && tau_c.is_finite()) {
                    return Err(bad("correlation time tau_c must be positive and finite"));
                }
            }
            Self::Tabulated(_) => {} // validated at construction
        }
        Ok(())
    }
}

/// Bath statistics selector for the decoherence integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BathKind {
    /// Spin-boson bath at the given temperature (kelvin, ≥ 0).
    Quantum { temperature: f64 },
    /// Classical stationary noise; the spectrum already carries the full
    /// (high-temperature) occupation, so the kernel is identity.
    ClassicalHighT,
}

/// Multiplicative thermal weight in the decoherence integrand.
///
/// For a quantum bath this is coth(x) with x = ħω/(2 k_B T): exactly 1 at
/// T = 0, the Laurent form 1/x + x/3 for x < 1e-4, and saturated to 1 for
/// x ≥ 20 where coth differs from 1 by < 1e-17. At ω = 0 with T > 0 the
/// kernel diverges and +∞ is returned. Classical noise gets weight 1.
pub fn thermal_kernel(kind: BathKind, omega: f64) -> f64 {
    debug_assert!(omega >= 0.0);
    match kind {
        BathKind::ClassicalHighT => 1.0,
        BathKind::Quantum { temperature } => {
            if temperature == 0.0 {
                return 1.0;
            }
            if omega == 0.0 {
                return f64::INFINITY;
            }
            let x = HBAR * omega / (2.0 * K_B * temperature);
            if x >= 20.0 {
                1.0
            } else if x < 1e-4 {
                1.0 / x + x / 3.0
            } else {
                1.0 / x.tanh()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
        assert!(intervals.is_multiple_of(2));
        let h = (b - a) / intervals as f64;
        let mut acc = f(a) + f(b);
        for i in 1..intervals {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn lorentzian_reference_points() {
        let s = NoiseSpectrum::Lorentzian { sigma: 1.0, tau_c: 1.0 };
        assert!((s.density(0.0).unwrap() - 2.0).abs() < 1e-15);
        // Half-maximum at ω = 1/τ_c.
        assert!((s.density(1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_reference_points() {
        let s = NoiseSpectrum::Gaussian { sigma: 2.0, tau_c: 0.5 };
        let peak = 4.0 * 0.5 * (2.0 * std::f64::consts::PI).sqrt();
        assert!((s.density(0.0).unwrap() - peak).abs() < 1e-12 * peak);
    }

    #[test]
    fn ohmic_cutoff_is_hard() {
        let s = NoiseSpectrum::OhmicCutoff { alpha: 0.1, omega_d: 1.0 };
        assert!((s.density(0.5).unwrap() - 0.1).abs() < 1e-15);
        assert!((s.density(1.0).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(s.density(1.0 + 1e-12).unwrap(), 0.0);
        assert_eq!(s.density(5.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_frequency_is_domain_error() {
        let s = NoiseSpectrum::Lorentzian { sigma: 1.0, tau_c: 1.0 };
        assert!(matches!(s.density(-0.1), Err(NoiseError::NegativeFrequency(_))));
    }

    #[test]
    fn variance_closure_for_classical_spectra() {
        // (1/π)·∫₀^∞ S dω = g(0) = σ² for both forms. Simpson plus the
        // analytic Lorentzian tail beyond the numeric window.
        let sigma = 1.3f64;
        let tau_c = 0.7f64;
        let lor = NoiseSpectrum::Lorentzian { sigma, tau_c };
        let cut = 2e4 / tau_c;
        let numeric = simpson(|w| lor.density_nonneg(w), 0.0, cut, 400_000);
        // ∫_Ω^∞ 2σ²τ_c/(ω²τ_c²) dω bounds the remainder of the ω^-2 tail.
        let tail = 2.0 * sigma * sigma / (tau_c * cut);
        let total = (numeric + tail) / std::f64::consts::PI;
        assert!(
            (total / (sigma * sigma) - 1.0).abs() < 1e-3,
            "lorentzian closure: {total}"
        );

        let gauss = NoiseSpectrum::Gaussian { sigma, tau_c };
        let numeric = simpson(|w| gauss.density_nonneg(w), 0.0, 15.0 / tau_c, 20_000);
        let total = numeric / std::f64::consts::PI;
        assert!(
            (total / (sigma * sigma) - 1.0).abs() < 1e-6,
            "gaussian closure: {total}"
        );
    }

    #[test]
    fn lorentzian_tail_and_gaussian_suppression() {
        let sigma = 2.0f64;
        let tau_c = 3.0f64;
        let lor = NoiseSpectrum::Lorentzian { sigma, tau_c };
        let gauss = NoiseSpectrum::Gaussian { sigma, tau_c };
        // ω²τ_c·S_lor → 2σ² in the high-frequency limit.
        let w = 1e3 / tau_c;
        let tail = w * w * tau_c * lor.density_nonneg(w);
        assert!((tail / (2.0 * sigma * sigma) - 1.0).abs() < 2e-6, "tail = {tail}");
        // The Gaussian spectrum is negligible against the Lorentzian one well
        // past the knee.
        let w10 = 10.0 / tau_c;
        let ratio = gauss.density_nonneg(w10) / lor.density_nonneg(w10);
        assert!(ratio < 1e-6, "ratio = {ratio}");
    }

    #[test]
    fn tabulated_interpolation_and_support() {
        let t = TabulatedSpectrum::new(vec![1.0, 2.0, 4.0], vec![0.0, 2.0, 2.0]).unwrap();
        let s = NoiseSpectrum::Tabulated(t);
        assert_eq!(s.density(0.5).unwrap(), 0.0); // below grid
        assert_eq!(s.density(4.5).unwrap(), 0.0); // above grid
        assert!((s.density(1.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((s.density(2.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((s.density(3.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((s.density(4.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn tabulated_csv_round_trip() {
        let csv = "omega,density\n0.0,1.0\n1.0,0.5\n2.0,0.0\n";
        let t = TabulatedSpectrum::from_csv_str(csv).unwrap();
        assert_eq!(t.omega_end(), 2.0);
        assert!((t.interpolate(0.5) - 0.75).abs() < 1e-15);

        assert!(matches!(
            TabulatedSpectrum::from_csv_str("0,1\n"),
            Err(NoiseError::TableTooShort)
        ));
        assert!(matches!(
            TabulatedSpectrum::from_csv_str("0,1\n0,2\n"),
            Err(NoiseError::NonIncreasingGrid(1))
        ));
        assert!(matches!(
            TabulatedSpectrum::from_csv_str("0,1\n1,-2\n"),
            Err(NoiseError::NegativeDensity(1))
        ));
        assert!(matches!(
            TabulatedSpectrum::from_csv_str("0,1\n1,2,3\n"),
            Err(NoiseError::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn thermal_kernel_limits() {
        // T = 0 is exactly 1 at any frequency.
        assert_eq!(thermal_kernel(BathKind::Quantum { temperature: 0.0 }, 1e9), 1.0);
        // ω = 0 at T > 0 diverges.
        assert_eq!(
            thermal_kernel(BathKind::Quantum { temperature: 1.0 }, 0.0),
            f64::INFINITY
        );
        assert_eq!(thermal_kernel(BathKind::ClassicalHighT, 3.0), 1.0);

        // Rayleigh-Jeans limit: coth(x) ≈ 1/x = 2k_B T/(ħω) at x = 1e-4.
        let t = 1.0;
        let omega = 1e-4 * 2.0 * K_B * t / HBAR;
        let k = thermal_kernel(BathKind::Quantum { temperature: t }, omega);
        assert!((k / 1e4 - 1.0).abs() < 1e-7, "k = {k}");

        // Low-temperature expansion coth(x) = 1 + 2e^(-2x) + O(e^(-4x)).
        let x = 5.0;
        let omega = x * 2.0 * K_B * t / HBAR;
        let k = thermal_kernel(BathKind::Quantum { temperature: t }, omega);
        let expansion = 1.0 + 2.0 * (-2.0 * x).exp();
        assert!((k - expansion).abs() < 3.0 * (-4.0 * x).exp(), "k = {k}");

        // Monotone decreasing toward 1 as ω grows at fixed T.
        let w1 = 0.3 * 2.0 * K_B * t / HBAR;
        let w2 = 3.0 * 2.0 * K_B * t / HBAR;
        let k1 = thermal_kernel(BathKind::Quantum { temperature: t }, w1);
        let k2 = thermal_kernel(BathKind::Quantum { temperature: t }, w2);
        assert!(k1 > k2 && k2 > 1.0);
    }

    #[test]
    fn validate_rejects_bad_parameters() {
        assert!(NoiseSpectrum::Lorentzian { sigma: 0.0, tau_c: 1.0 }.validate().is_err());
        assert!(NoiseSpectrum::Gaussian { sigma: 1.0, tau_c: -1.0 }.validate().is_err());
        assert!(NoiseSpectrum::OhmicCutoff { alpha: f64::NAN, omega_d: 1.0 }
            .validate()
            .is_err());
        assert!(NoiseSpectrum::OhmicCutoff { alpha: 0.1, omega_d: 1.0 }.validate().is_ok());
    }
}
