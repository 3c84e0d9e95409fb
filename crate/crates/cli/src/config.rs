//! TOML run configuration: one schema for all subcommands, with documented
//! defaults, named built-in presets, and flag overrides (flags win).

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ddmetrics::{DecayModel, EnsembleConfig, NoiseSpectrum, Protocol, TabulatedSpectrum};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Master seed for every stochastic step.
    pub seed: u64,
    /// Output path; stdout when absent.
    pub out: Option<PathBuf>,
    pub spectrum: SpectrumSection,
    pub pulses: PulsesSection,
    pub ensemble: EnsembleSection,
    pub grid: GridSection,
    pub scaling: ScalingSection,
    pub mc: McSection,
    pub state: StateSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 7,
            out: None,
            spectrum: SpectrumSection::default(),
            pulses: PulsesSection::default(),
            ensemble: EnsembleSection::default(),
            grid: GridSection::default(),
            scaling: ScalingSection::default(),
            mc: McSection::default(),
            state: StateSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Lorentzian,
    Gaussian,
    Ohmic,
    Tabulated,
    /// χ = a·N·τ^v directly, bypassing any integral.
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Bath {
    /// Spectral density J(ω) weighted by the thermal kernel at `temperature`.
    Quantum,
    /// Stationary classical power spectrum S(ω); no thermal factor.
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolChoice {
    Ghz,
    Separable,
}

impl From<ProtocolChoice> for Protocol {
    fn from(p: ProtocolChoice) -> Self {
        match p {
            ProtocolChoice::Ghz => Protocol::Ghz,
            ProtocolChoice::Separable => Protocol::Separable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub kind: Kind,
    /// RMS noise amplitude (rad/s) of the classical spectra.
    pub sigma: f64,
    /// Correlation time (s) of the classical spectra.
    pub tau_c: f64,
    /// Dimensionless coupling of the Ohmic density J(ω) = 2αω.
    pub alpha: f64,
    /// Hard Ohmic cutoff (rad/s).
    pub omega_d: f64,
    pub bath: Bath,
    /// Bath temperature (K) for the quantum kernel.
    pub temperature: f64,
    /// CSV of (omega, density) rows for kind = "tabulated".
    pub table: Option<PathBuf>,
    /// Prefactor of the synthetic per-qubit exponent χ⁽¹⁾ = a·τ^v.
    pub a: f64,
    /// Power of the synthetic exponent.
    pub v: f64,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            kind: Kind::Lorentzian,
            sigma: 1.0,
            tau_c: 1.0,
            alpha: 0.1,
            omega_d: 1.0,
            bath: Bath::Classical,
            temperature: 0.0,
            table: None,
            a: 1.0,
            v: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulsesSection {
    /// Number of π pulses in the train (0 = free evolution, 1 = echo).
    pub n: u32,
}

impl Default for PulsesSection {
    fn default() -> Self {
        Self { n: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    /// Register size for single-point commands (coherence, scan).
    pub n_qubits: u32,
    /// Register sizes swept by the scaling command.
    pub n_list: Vec<u32>,
    /// Signal detuning Δ (rad/s).
    pub delta: f64,
    /// Total measurement budget T_t (s).
    pub total_time: f64,
    pub protocol: ProtocolChoice,
    /// Gyromagnetic ratio (rad/(s·T)); only needed to express Δ as a field.
    pub gamma: Option<f64>,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            n_qubits: 1,
            n_list: vec![2, 4, 8, 16, 32, 64, 128, 256, 512, 1024],
            delta: 1.0,
            total_time: 1e3,
            protocol: ProtocolChoice::Ghz,
            gamma: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Dimensionless filter argument range (filter command), sampled linearly.
    pub z_min: f64,
    pub z_max: f64,
    pub z_points: usize,
    /// Interrogation-time range (coherence and scan), sampled log-uniformly.
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            z_min: 0.0,
            z_max: 4.0 * std::f64::consts::PI,
            z_points: 1000,
            tau_min: 1e-3,
            tau_max: 1.0,
            tau_points: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSection {
    /// Target exponent for the pass/fail verdict in the JSON summary.
    pub expected_k: Option<f64>,
    /// Explicit first search bracket; derived from the model when absent.
    pub bracket_lo: Option<f64>,
    pub bracket_hi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    /// Trajectories per table cell.
    pub trials: usize,
    /// Spectra to validate (classical kinds only).
    pub kinds: Vec<Kind>,
    pub pulse_counts: Vec<u32>,
    /// Interrogation times as fractions of τ_c.
    pub tau_factors: Vec<f64>,
    pub sigma: f64,
    pub tau_c: f64,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            trials: 100_000,
            kinds: vec![Kind::Lorentzian, Kind::Gaussian],
            pulse_counts: vec![0, 1, 2, 4],
            tau_factors: vec![0.1, 0.2, 0.35, 0.5],
            sigma: 1.0,
            tau_c: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateSection {
    /// CSV of (index, re, im) amplitudes; a GHZ state of `n_qubits` when absent.
    pub amplitudes: Option<PathBuf>,
    pub n_qubits: u32,
    /// Per-qubit interferometer phase φ.
    pub phi: f64,
    /// Decoherence rate coefficient: the exponent per unit excitation
    /// distance is 2·α·τ⁶.
    pub alpha: f64,
    pub tau: f64,
    /// Bias rotation angle entering the decohered precision bound.
    pub theta: f64,
    /// Repetition count l of the bound.
    pub repetitions: f64,
}

impl Default for StateSection {
    fn default() -> Self {
        Self {
            amplitudes: None,
            n_qubits: 4,
            phi: 0.3,
            alpha: 0.1,
            tau: 0.5,
            theta: 0.1,
            repetitions: 1000.0,
        }
    }
}

/// Built-in configurations shipped with the binary. Each is a plain TOML
/// file under presets/ so a run can be reproduced or diffed by eye.
pub const PRESETS: &[(&str, &str)] = &[
    (
        "table1-lorentzian-ramsey",
        include_str!("../../../presets/table1-lorentzian-ramsey.toml"),
    ),
    (
        "table1-lorentzian-echo",
        include_str!("../../../presets/table1-lorentzian-echo.toml"),
    ),
    (
        "table1-lorentzian-cpmg2",
        include_str!("../../../presets/table1-lorentzian-cpmg2.toml"),
    ),
    (
        "table1-gaussian-ramsey",
        include_str!("../../../presets/table1-gaussian-ramsey.toml"),
    ),
    (
        "table1-gaussian-echo",
        include_str!("../../../presets/table1-gaussian-echo.toml"),
    ),
    (
        "table1-gaussian-cpmg2",
        include_str!("../../../presets/table1-gaussian-cpmg2.toml"),
    ),
    ("ohmic-T0-n1", include_str!("../../../presets/ohmic-T0-n1.toml")),
    ("ohmic-T0-n2", include_str!("../../../presets/ohmic-T0-n2.toml")),
    ("sql-baseline", include_str!("../../../presets/sql-baseline.toml")),
    ("mc-default", include_str!("../../../presets/mc-default.toml")),
];

pub fn load(path: Option<&Path>, preset: Option<&str>) -> Result<Config, CliError> {
    let parse = |text: &str, origin: &str| {
        toml::from_str::<Config>(text)
            .map_err(|e| CliError::Config(format!("{origin}: {e}")))
    };
    match (path, preset) {
        (Some(p), None) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", p.display()))
            })?;
            parse(&text, &p.display().to_string())
        }
        (None, Some(name)) => {
            let text = PRESETS
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, t)| *t)
                .ok_or_else(|| {
                    let known: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                    CliError::Config(format!(
                        "unknown preset {name:?}; available: {}",
                        known.join(", ")
                    ))
                })?;
            parse(text, &format!("preset {name}"))
        }
        (None, None) => Ok(Config::default()),
        (Some(_), Some(_)) => unreachable!("clap marks --config and --preset as conflicting"),
    }
}

/// Serializes a configuration back to TOML. `load` of the result yields an
/// equal configuration, so emitted files are exact run records.
pub fn emit(config: &Config) -> String {
    toml::to_string_pretty(config).expect("config serializes to TOML")
}

impl Config {
    /// The spectral density selected by [spectrum], for the integral paths.
    pub fn noise_spectrum(&self) -> Result<NoiseSpectrum, CliError> {
        let s = &self.spectrum;
        let spectrum = match s.kind {
            Kind::Lorentzian => NoiseSpectrum::Lorentzian { sigma: s.sigma, tau_c: s.tau_c },
            Kind::Gaussian => NoiseSpectrum::Gaussian { sigma: s.sigma, tau_c: s.tau_c },
            Kind::Ohmic => NoiseSpectrum::OhmicCutoff { alpha: s.alpha, omega_d: s.omega_d },
            Kind::Tabulated => {
                let path = s.table.as_ref().ok_or(CliError::Config(
                    "spectrum.kind = \"tabulated\" needs spectrum.table = \"<csv>\"".into(),
                ))?;
                NoiseSpectrum::Tabulated(TabulatedSpectrum::from_csv_path(path).map_err(
                    |e| CliError::Config(format!("spectrum table {}: {e}", path.display())),
                )?)
            }
            Kind::Synthetic => {
                return Err(CliError::Config(
                    "the synthetic power law has no spectral density; use it with the \
                     scan or scaling commands"
                        .into(),
                ))
            }
        };
        spectrum
            .validate()
            .map_err(|e| CliError::Config(format!("invalid spectrum: {e}")))?;
        Ok(spectrum)
    }

    /// The decay model χ(τ, N) driving scan and scaling.
    pub fn decay_model(&self) -> Result<DecayModel, CliError> {
        let s = &self.spectrum;
        if s.kind == Kind::Synthetic {
            return Ok(DecayModel::SyntheticPowerLaw { a: s.a, v: s.v });
        }
        let spectrum = self.noise_spectrum()?;
        match (s.bath, s.kind) {
            (Bath::Quantum, Kind::Ohmic | Kind::Tabulated) => Ok(DecayModel::Quantum {
                spectrum,
                temperature: s.temperature,
            }),
            (Bath::Quantum, _) => Err(CliError::Config(
                "a quantum bath needs an ohmic or tabulated spectral density".into(),
            )),
            (Bath::Classical, Kind::Lorentzian | Kind::Gaussian | Kind::Tabulated) => {
                Ok(DecayModel::Classical { spectrum })
            }
            (Bath::Classical, _) => Err(CliError::Config(
                "a classical bath needs a lorentzian, gaussian, or tabulated spectrum".into(),
            )),
        }
    }

    pub fn ensemble(&self, n_qubits: u32) -> EnsembleConfig {
        EnsembleConfig {
            n_qubits,
            delta: self.ensemble.delta,
            total_time: self.ensemble.total_time,
            gamma: self.ensemble.gamma,
        }
    }
}

/// Command-line overrides: every config key a run typically sweeps has a
/// flag of the same name, and a given flag beats the file value. Keys whose
/// physical meaning repeats across sections (sigma, tau_c, alpha, n_qubits)
/// are set everywhere they appear.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub seed: Option<u64>,
    /// Output file (stdout when absent)
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, help_heading = "Config overrides")]
    pub kind: Option<Kind>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub sigma: Option<f64>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub tau_c: Option<f64>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub alpha: Option<f64>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub omega_d: Option<f64>,
    #[arg(long, global = true, value_enum, help_heading = "Config overrides")]
    pub bath: Option<Bath>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub temperature: Option<f64>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub table: Option<PathBuf>,
    /// Synthetic power-law prefactor
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub a: Option<f64>,
    /// Synthetic power-law exponent
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub v: Option<f64>,
    /// Pulse count
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub n: Option<u32>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub n_qubits: Option<u32>,
    #[arg(long, global = true, value_delimiter = ',', help_heading = "Config overrides")]
    pub n_list: Option<Vec<u32>>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub delta: Option<f64>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub total_time: Option<f64>,
    #[arg(long, global = true, value_enum, help_heading = "Config overrides")]
    pub protocol: Option<ProtocolChoice>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub gamma: Option<f64>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub z_min: Option<f64>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub z_max: Option<f64>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub z_points: Option<usize>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub tau_min: Option<f64>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub tau_max: Option<f64>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub tau_points: Option<usize>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub expected_k: Option<f64>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub bracket_lo: Option<f64>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub bracket_hi: Option<f64>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub trials: Option<usize>,
    #[arg(long, global = true, value_enum, value_delimiter = ',', help_heading = "Config overrides")]
    pub kinds: Option<Vec<Kind>>,
    #[arg(long, global = true, value_delimiter = ',', help_heading = "Config overrides")]
    pub pulse_counts: Option<Vec<u32>>,
    #[arg(long, global = true, value_delimiter = ',', help_heading = "Config overrides")]
    pub tau_factors: Option<Vec<f64>>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub amplitudes: Option<PathBuf>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub phi: Option<f64>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub tau: Option<f64>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub theta: Option<f64>,
    #[arg(long, global = true, help_heading = "Config overrides")]
    pub repetitions: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut Config) {
        macro_rules! set {
            ($field:expr, $src:expr) => {
                if let Some(v) = &$src {
                    $field = v.clone();
                }
            };
        }
        set!(cfg.seed, self.seed);
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        set!(cfg.spectrum.kind, self.kind);
        set!(cfg.spectrum.sigma, self.sigma);
        set!(cfg.mc.sigma, self.sigma);
        set!(cfg.spectrum.tau_c, self.tau_c);
        set!(cfg.mc.tau_c, self.tau_c);
        set!(cfg.spectrum.alpha, self.alpha);
        set!(cfg.state.alpha, self.alpha);
        set!(cfg.spectrum.omega_d, self.omega_d);
        set!(cfg.spectrum.bath, self.bath);
        set!(cfg.spectrum.temperature, self.temperature);
        if self.table.is_some() {
            cfg.spectrum.table = self.table.clone();
        }
        set!(cfg.spectrum.a, self.a);
        set!(cfg.spectrum.v, self.v);
        set!(cfg.pulses.n, self.n);
        set!(cfg.ensemble.n_qubits, self.n_qubits);
        set!(cfg.state.n_qubits, self.n_qubits);
        set!(cfg.ensemble.n_list, self.n_list);
        set!(cfg.ensemble.delta, self.delta);
        set!(cfg.ensemble.total_time, self.total_time);
        set!(cfg.ensemble.protocol, self.protocol);
        if self.gamma.is_some() {
            cfg.ensemble.gamma = self.gamma;
        }
        set!(cfg.grid.z_min, self.z_min);
        set!(cfg.grid.z_max, self.z_max);
        set!(cfg.grid.z_points, self.z_points);
        set!(cfg.grid.tau_min, self.tau_min);
        set!(cfg.grid.tau_max, self.tau_max);
        set!(cfg.grid.tau_points, self.tau_points);
        if self.expected_k.is_some() {
            cfg.scaling.expected_k = self.expected_k;
        }
        if self.bracket_lo.is_some() {
            cfg.scaling.bracket_lo = self.bracket_lo;
        }
        if self.bracket_hi.is_some() {
            cfg.scaling.bracket_hi = self.bracket_hi;
        }
        set!(cfg.mc.trials, self.trials);
        set!(cfg.mc.kinds, self.kinds);
        set!(cfg.mc.pulse_counts, self.pulse_counts);
        set!(cfg.mc.tau_factors, self.tau_factors);
        if self.amplitudes.is_some() {
            cfg.state.amplitudes = self.amplitudes.clone();
        }
        set!(cfg.state.phi, self.phi);
        set!(cfg.state.tau, self.tau);
        set!(cfg.state.theta, self.theta);
        set!(cfg.state.repetitions, self.repetitions);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips() {
        let cfg = Config::default();
        let text = emit(&cfg);
        let back: Config = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn every_preset_parses_and_round_trips() {
        for (name, text) in PRESETS {
            let cfg: Config = toml::from_str(text)
                .unwrap_or_else(|e| panic!("preset {name} does not parse: {e}"));
            let back: Config = toml::from_str(&emit(&cfg)).unwrap();
            assert_eq!(cfg, back, "preset {name} does not round-trip");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<Config>("sneed = 3\n").unwrap_err();
        assert!(err.to_string().contains("sneed"));
    }

    #[test]
    fn overrides_beat_file_values() {
        let mut cfg = Config::default();
        let ov = Overrides {
            sigma: Some(42.0),
            n: Some(3),
            protocol: Some(ProtocolChoice::Separable),
            ..Default::default()
        };
        ov.apply(&mut cfg);
        assert_eq!(cfg.spectrum.sigma, 42.0);
        assert_eq!(cfg.mc.sigma, 42.0);
        assert_eq!(cfg.pulses.n, 3);
        assert_eq!(cfg.ensemble.protocol, ProtocolChoice::Separable);
    }
}
