//! Probe states beyond GHZ: excitation statistics and uncertainty bounds.
//!
//! Any pure probe state |ψ⟩ = Σ_x a_x|x⟩ acquires its signal through the
//! collective generator h whose eigenvalue on a basis state is 2c(x) - N,
//! with c(x) the number of excited qubits. Every quantity here depends on
//! the amplitudes only through the probabilities p_x = |a_x|²:
//!
//!   ⟨h⟩   = 2 Σ_x c(x) p_x - N
//!   ⟨h²⟩  = Σ_x (2c(x) - N)² p_x
//!   κ     = Σ_{x,y} (c(x) - c(y))² p_x p_y,    with ⟨δh⟩² = 2κ
//!
//! The measured outcome probability after an interrogation picking up phase
//! φ per excitation is p = Σ_{x,y} p_x p_y cos((c(y)-c(x))φ), and fast-pulse
//! dephasing multiplies each interference term by exp(-2c(x⊕y)·α·τ⁶), the
//! XOR count being how many qubits distinguish the two branches. κ controls
//! the reachable precision: the coherent bound is √(π²/(32τ²lκ)) and its
//! decohered generalization is evaluated by [`bound_decohered`].
//!
//! Bit convention: bit j of the basis index x is qubit j, value 1 meaning
//! the excited state.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::numeric::tree_sum;

/// Densely stored amplitude vectors are capped here: every pairwise
/// operation is O(4^N), which at 12 qubits is already 16.8 million terms.
pub const DENSE_STATE_MAX_QUBITS: u32 = 12;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("a probe state needs at least one qubit")]
    ZeroQubits,
    #[error("dense states support at most {DENSE_STATE_MAX_QUBITS} qubits, got {0}")]
    TooManyQubits(u32),
    #[error("amplitude vector must have 2^N = {expected} entries, got {got}")]
    WrongAmplitudeCount { expected: usize, got: usize },
    #[error("state norm {norm} deviates from 1 by more than 1e-8")]
    NotNormalized { norm: f64 },
    #[error("basis index {index} is out of range for {n_qubits} qubits")]
    IndexOutOfRange { index: u64, n_qubits: u32 },
    #[error("basis index {0} appears more than once")]
    DuplicateIndex(u64),
    #[error("generator-insensitive state: kappa = 0, no phase sensitivity")]
    GeneratorInsensitive,
    #[error("{0}")]
    InvalidParameter(&'static str),
    #[error("row {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("failed to read state file: {0}")]
    Io(#[from] std::io::Error),
}

/// One nonzero-probability basis component.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    index: u64,
    prob: f64,
    count: u32,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// Explicit probabilities over basis states (phases drop out of every
    /// observable computed here, so only |a_x|² is kept).
    Dense { n_qubits: u32, entries: Vec<Entry> },
    /// (|0…0⟩ + |1…1⟩)/√2 handled in closed form for any qubit count.
    Ghz { n_qubits: u32 },
}

/// A pure N-qubit probe state, dense or closed-form GHZ.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeState {
    repr: Repr,
}

/// First and second moments of the collective generator, plus the pairwise
/// spread κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorMoments {
    pub mean: f64,
    pub second: f64,
    pub kappa: f64,
}

/// Number of excited qubits in the basis state `x`.
pub fn excitation_count(x: u64, n_qubits: u32) -> u32 {
    debug_assert!(n_qubits >= 64 || x < (1u64 << n_qubits));
    x.count_ones()
}

impl ProbeState {
    /// Builds a dense state from a full amplitude vector of length 2^N.
    ///
    /// The squared norm may deviate from 1 by at most 1e-8 and is then
    /// renormalized away exactly.
    pub fn dense(n_qubits: u32, amplitudes: &[Complex64]) -> Result<Self, StateError> {
        if n_qubits == 0 {
            return Err(StateError::ZeroQubits);
        }
        if n_qubits > DENSE_STATE_MAX_QUBITS {
            return Err(StateError::TooManyQubits(n_qubits));
        }
        let expected = 1usize << n_qubits;
        if amplitudes.len() != expected {
            return Err(StateError::WrongAmplitudeCount { expected, got: amplitudes.len() });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-8 {
            return Err(StateError::NotNormalized { norm });
        }
        let entries = amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, a)| Entry {
                index: i as u64,
                prob: a.norm_sqr() / norm,
                count: excitation_count(i as u64, n_qubits),
            })
            .collect();
        Ok(Self { repr: Repr::Dense { n_qubits, entries } })
    }

    /// The N-qubit GHZ state, exact at any size.
    pub fn ghz(n_qubits: u32) -> Result<Self, StateError> {
        if n_qubits == 0 {
            return Err(StateError::ZeroQubits);
        }
        Ok(Self { repr: Repr::Ghz { n_qubits } })
    }

    /// Loads a sparse dense-state description: CSV rows of
    /// `index, re, im`, unlisted indices being zero. One optional header
    /// line is skipped.
    pub fn from_csv_str(n_qubits: u32, text: &str) -> Result<Self, StateError> {
        if n_qubits == 0 {
            return Err(StateError::ZeroQubits);
        }
        if n_qubits > DENSE_STATE_MAX_QUBITS {
            return Err(StateError::TooManyQubits(n_qubits));
        }
        let size = 1usize << n_qubits;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); size];
        let mut seen = vec![false; size];
        let mut saw_data = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(StateError::Malformed {
                    line: idx + 1,
                    reason: format!("expected 3 comma-separated fields, got {}", fields.len()),
                });
            }
            let parsed = (
                fields[0].parse::<u64>(),
                fields[1].parse::<f64>(),
                fields[2].parse::<f64>(),
            );
            match parsed {
                (Ok(x), Ok(re), Ok(im)) => {
                    if x >= size as u64 {
                        return Err(StateError::IndexOutOfRange { index: x, n_qubits });
                    }
                    if seen[x as usize] {
                        return Err(StateError::DuplicateIndex(x));
                    }
                    seen[x as usize] = true;
                    amplitudes[x as usize] = Complex64::new(re, im);
                    saw_data = true;
                }
                _ if !saw_data => continue, // header row
                _ => {
                    return Err(StateError::Malformed {
                        line: idx + 1,
                        reason: "fields did not parse as index, re, im".into(),
                    })
                }
            }
        }
        Self::dense(n_qubits, &amplitudes)
    }

    pub fn from_csv_path(n_qubits: u32, path: &Path) -> Result<Self, StateError> {
        Self::from_csv_str(n_qubits, &fs::read_to_string(path)?)
    }

    pub fn n_qubits(&self) -> u32 {
        match &self.repr {
            Repr::Dense { n_qubits, .. } | Repr::Ghz { n_qubits } => *n_qubits,
        }
    }

    /// Probability weight per excitation number, w_c = Σ_{c(x)=c} p_x.
    fn count_histogram(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Dense { n_qubits, entries } => {
                let mut hist = vec![0.0; *n_qubits as usize + 1];
                for e in entries {
                    hist[e.count as usize] += e.prob;
                }
                hist
            }
            Repr::Ghz { n_qubits } => {
                let mut hist = vec![0.0; *n_qubits as usize + 1];
                hist[0] = 0.5;
                hist[*n_qubits as usize] = 0.5;
                hist
            }
        }
    }
}

/// Moments of the collective generator on the given state.
///
/// κ is accumulated from the literal pairwise sum (grouped by excitation
/// number), not from the variance identity, so the ⟨δh⟩² = 2κ relation
/// stays a genuine cross-check.
pub fn generator_moments(state: &ProbeState) -> GeneratorMoments {
    if let Repr::Ghz { n_qubits } = &state.repr {
        let n = f64::from(*n_qubits);
        return GeneratorMoments { mean: 0.0, second: n * n, kappa: 0.5 * n * n };
    }
    let n = f64::from(state.n_qubits());
    let hist = state.count_histogram();
    let mut mean = 0.0;
    let mut second = 0.0;
    for (c, w) in hist.iter().enumerate() {
        let eig = 2.0 * c as f64 - n;
        mean += eig * w;
        second += eig * eig * w;
    }
    let mut kappa = 0.0;
    for (c1, w1) in hist.iter().enumerate() {
        for (c2, w2) in hist.iter().enumerate() {
            let d = c1 as f64 - c2 as f64;
            kappa += d * d * w1 * w2;
        }
    }
    GeneratorMoments { mean, second, kappa }
}

/// Outcome probability of the interference measurement with phase φ per
/// excitation and no decoherence:
/// p = Σ_{x,y} p_x p_y cos((c(y)-c(x))·φ).
pub fn probability_coherent(state: &ProbeState, phi: f64) -> f64 {
    if let Repr::Ghz { n_qubits } = &state.repr {
        return 0.5 + 0.5 * (f64::from(*n_qubits) * phi).cos();
    }
    let hist = state.count_histogram();
    let mut p = 0.0;
    for (c1, w1) in hist.iter().enumerate() {
        for (c2, w2) in hist.iter().enumerate() {
            p += w1 * w2 * ((c2 as f64 - c1 as f64) * phi).cos();
        }
    }
    p
}

/// Outcome probability with fast-pulse dephasing: each (x, y) interference
/// term is damped by exp(-2·c(x⊕y)·alpha_rate·τ⁶), where c(x⊕y) counts the
/// qubits on which the two branches differ.
pub fn probability_decohered(
    state: &ProbeState,
    phi: f64,
    alpha_rate: f64,
    tau: f64,
) -> f64 {
    debug_assert!(alpha_rate >= 0.0 && tau >= 0.0);
    let rate = 2.0 * alpha_rate * tau.powi(6);
    match &state.repr {
        Repr::Ghz { n_qubits } => {
            let n = f64::from(*n_qubits);
            0.5 + 0.5 * (n * phi).cos() * (-n * rate).exp()
        }
        Repr::Dense { entries, .. } => {
            // Deterministic under any thread count: each x row is summed
            // sequentially, rows are collected in index order, and the
            // final reduction is a fixed-shape pairwise tree.
            let rows: Vec<f64> = entries
                .par_iter()
                .map(|ex| {
                    entries
                        .iter()
                        .map(|ey| {
                            let differing =
                                f64::from((ex.index ^ ey.index).count_ones());
                            let angle =
                                (f64::from(ey.count) - f64::from(ex.count)) * phi;
                            ex.prob * ey.prob * angle.cos() * (-differing * rate).exp()
                        })
                        .sum()
                })
                .collect();
            tree_sum(&rows)
        }
    }
}

/// Smallest frequency uncertainty reachable with a κ-sensitive state and l
/// repetitions, no decoherence: √(π²/(32·τ²·l·κ)).
pub fn bound_coherent(state: &ProbeState, tau: f64, l: f64) -> Result<f64, StateError> {
    if !(tau > 0.0 && l > 0.0) {
        return Err(StateError::InvalidParameter(
            "bound_coherent needs tau > 0 and repetitions l > 0",
        ));
    }
    let kappa = generator_moments(state).kappa;
    if kappa == 0.0 {
        return Err(StateError::GeneratorInsensitive);
    }
    Ok((PI_SQ / (32.0 * tau * tau * l * kappa)).sqrt())
}

const PI_SQ: f64 = std::f64::consts::PI * std::f64::consts::PI;

/// Uncertainty bound with fast-pulse dephasing folded in, evaluated at a
/// small bias angle θ:
///
///   δΔ ≤ √( (θ²κ/2 + ξ) / (l·θ²·κ²·(4τ/π)²) ),
///
/// where ξ = 2·α·τ⁶·Σ_{x,y} c(x⊕y)·p_x·p_y is the exact dephasing weight
/// for the state (bounded by 2αNτ⁶). At alpha_rate = 0 the θ dependence
/// cancels and the coherent bound is recovered for any θ.
pub fn bound_decohered(
    state: &ProbeState,
    tau: f64,
    l: f64,
    alpha_rate: f64,
    theta: f64,
) -> Result<f64, StateError> {
    if !(tau > 0.0 && l > 0.0) {
        return Err(StateError::InvalidParameter(
            "bound_decohered needs tau > 0 and repetitions l > 0",
        ));
    }
    if !(theta > 0.0) {
        return Err(StateError::InvalidParameter("bias angle theta must be positive"));
    }
    if !(alpha_rate >= 0.0) {
        return Err(StateError::InvalidParameter("alpha_rate must be non-negative"));
    }
    let kappa = generator_moments(state).kappa;
    if kappa == 0.0 {
        return Err(StateError::GeneratorInsensitive);
    }
    let xi = 2.0 * alpha_rate * tau.powi(6) * mean_xor_count(state);
    let slope = 4.0 * tau / std::f64::consts::PI;
    let numerator = 0.5 * theta * theta * kappa + xi;
    Ok((numerator / (l * theta * theta * kappa * kappa * slope * slope)).sqrt())
}

/// Σ_{x,y} c(x⊕y)·p_x·p_y, the average number of differing qubits between
/// two independently drawn branches.
fn mean_xor_count(state: &ProbeState) -> f64 {
    match &state.repr {
        Repr::Ghz { n_qubits } => 0.5 * f64::from(*n_qubits),
        Repr::Dense { entries, .. } => {
            let rows: Vec<f64> = entries
                .iter()
                .map(|ex| {
                    entries
                        .iter()
                        .map(|ey| {
                            ex.prob * ey.prob * f64::from((ex.index ^ ey.index).count_ones())
                        })
                        .sum()
                })
                .collect();
            tree_sum(&rows)
        }
    }
}
