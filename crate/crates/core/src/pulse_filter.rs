//! CPMG pulse timing and sequence filter functions.
//!
//! A CPMG block of duration τ applies n instantaneous π pulses at
//! δ_m = (m - 1/2)·τ/n, m = 1..n, so the pulses sit at the midpoints of the
//! 2n half-intervals and the sequence is time-symmetric. The corresponding
//! toggling sign of the accumulated phase has Fourier transform y_n(z)/(iω)
//! at z = ωτ, with
//!
//!   y_n(z) = 1 + (-1)^(n+1) e^(iz) + 2 Σ_{j=1..n} (-1)^j e^(iz(j-1/2)/n).
//!
//! Everything downstream weighs noise through the filter function
//!
//!   F_n(z) = |y_n(z)|²,
//!
//! which has the closed trigonometric form (geometric summation of the phase
//! factors)
//!
//!   F_n(z) = 16 sin⁴(z/4n) · sin²(z/2) / cos²(z/2n)   for even n,
//!   F_n(z) = 16 sin⁴(z/4n) · cos²(z/2) / cos²(z/2n)   for odd n,
//!
//! and F_0(z) = |1 - e^(iz)|² = 4 sin²(z/2) for free (Ramsey) evolution. The
//! parity split matters: odd trains (spin echo included) keep a quartic
//! low-frequency leak, F_n ≈ z⁴/(16n⁴), while even trains filter one order
//! deeper, F_n ≈ z⁶/(64n⁴). The two forms agree at n = 1 where the closed
//! form collapses to F_1 = 16 sin⁴(z/4).
//!
//! The quotient in the closed form is 0/0 at cos(z/2n) = 0; those are
//! removable singularities of a function that is globally bounded by
//! (2n+2)². Near them the implementation falls back to the defining sum.

use num_complex::Complex64;
use thiserror::Error;

/// Width of the guard band around zeros of cos(z/2n) inside which the closed
/// form loses accuracy to cancellation and the defining sum is used instead.
const COS_GUARD: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum PulseError {
    #[error("sequence duration must be positive and finite, got {0}")]
    InvalidDuration(f64),
}

/// A CPMG block: `n` π pulses over a total evolution time `tau`.
///
/// `n = 0` is free (Ramsey) evolution. `tau` is strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSequence {
    n: u32,
    tau: f64,
}

impl PulseSequence {
    pub fn new(n: u32, tau: f64) -> Result<Self, PulseError> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(PulseError::InvalidDuration(tau));
        }
        Ok(Self { n, tau })
    }

    /// Number of π pulses.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Total evolution time in seconds.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Pulse times δ_m = (m - 1/2)·τ/n, strictly increasing in (0, τ).
    ///
    /// Empty for n = 0. The sequence is symmetric: δ_m + δ_{n+1-m} = τ.
    pub fn pulse_instants(&self) -> Vec<f64> {
        (1..=self.n)
            .map(|m| (m as f64 - 0.5) * self.tau / self.n as f64)
            .collect()
    }
}

/// A filter function sample: the dimensionless argument z = ωτ and F_n(z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterValue {
    pub z: f64,
    pub value: f64,
}

/// The phase-factor sum y_n(z) whose squared modulus is the filter function.
///
/// Defined for all n ≥ 0; y_0(z) = 1 - e^(iz). Cost O(n).
pub fn y_n(z: f64, n: u32) -> Complex64 {
    let end_sign = if n.is_multiple_of(2) { -1.0 } else { 1.0 };
    let mut acc = Complex64::new(1.0, 0.0) + end_sign * Complex64::from_polar(1.0, z);
    let mut sign = -1.0;
    for j in 1..=n {
        let frac = (2 * j - 1) as f64 / (2 * n) as f64;
        acc += 2.0 * sign * Complex64::from_polar(1.0, z * frac);
        sign = -sign;
    }
    acc
}

/// Closed-form CPMG filter F_n(z) = |y_n(z)|² for n ≥ 1.
///
/// Evaluates the parity-split trigonometric form, switching to the defining
/// sum within |cos(z/2n)| < 1e-3 of the removable singularities. Exactly zero
/// at z = 0.
pub fn filter_closed_form(z: f64, n: u32) -> FilterValue {
    assert!(n >= 1, "closed form is defined for n >= 1; use filter_ramsey for n = 0");
    FilterValue { z, value: filter_magnitude(z, n) }
}

/// Free-evolution (Ramsey) filter F_0(z) = |1 - e^(iz)|² = 4 sin²(z/2).
pub fn filter_ramsey(z: f64) -> FilterValue {
    let s = (z / 2.0).sin();
    FilterValue { z, value: 4.0 * s * s }
}

/// F_n(z) for any n ≥ 0, dispatching between the CPMG and Ramsey forms.
pub fn filter(z: f64, n: u32) -> FilterValue {
    if n == 0 {
        filter_ramsey(z)
    } else {
        filter_closed_form(z, n)
    }
}

/// Bare f64 filter evaluation used in integrand inner loops.
pub(crate) fn filter_magnitude(z: f64, n: u32) -> f64 {
    if n == 0 {
        let s = (z / 2.0).sin();
        return 4.0 * s * s;
    }
    let nf = n as f64;
    let c = (z / (2.0 * nf)).cos();
    if c.abs() < COS_GUARD {
        return y_n(z, n).norm_sqr();
    }
    let s = (z / (4.0 * nf)).sin();
    let parity = if n.is_multiple_of(2) { (z / 2.0).sin() } else { (z / 2.0).cos() };
    16.0 * s.powi(4) * parity * parity / (c * c)
}
