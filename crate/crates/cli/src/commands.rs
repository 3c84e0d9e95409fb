//! One runner per subcommand. Each consumes the merged configuration,
//! produces a complete output payload in memory, and writes it once.

use ddmetrics::{
    chi_classical, chi_quantum, chi_small_tau, estimate_chi, filter, fit_power_law,
    bound_coherent, bound_decohered, generator_moments, probability_coherent,
    probability_decohered, optimal_tau, uncertainty_ghz, uncertainty_separable, ChiResult,
    DecayModel, DecoherenceError, NoiseSpectrum, PrecisionError, ProbeState, PulseSequence,
    TauBracket,
};

use crate::config::{Bath, Config, Kind, ProtocolChoice};
use crate::output::{fmt_float, write_output, Csv};
use crate::CliError;

fn lin_spaced(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

fn log_spaced(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (points - 1) as f64;
    (0..points).map(|i| (a + step * i as f64).exp()).collect()
}

fn tau_grid(cfg: &Config) -> Result<Vec<f64>, CliError> {
    let g = &cfg.grid;
    if !(g.tau_min > 0.0 && g.tau_max > g.tau_min && g.tau_max.is_finite()) {
        return Err(CliError::Config(format!(
            "tau grid needs 0 < tau_min < tau_max, got [{}, {}]",
            g.tau_min, g.tau_max
        )));
    }
    if g.tau_points < 2 {
        return Err(CliError::Config("tau grid needs at least 2 points".into()));
    }
    Ok(log_spaced(g.tau_min, g.tau_max, g.tau_points))
}

pub fn run_filter(cfg: &Config) -> Result<(), CliError> {
    let g = &cfg.grid;
    if !(g.z_min >= 0.0 && g.z_max > g.z_min && g.z_max.is_finite()) {
        return Err(CliError::Config(format!(
            "filter grid needs 0 <= z_min < z_max, got [{}, {}]",
            g.z_min, g.z_max
        )));
    }
    if g.z_points < 2 {
        return Err(CliError::Config("filter grid needs at least 2 points".into()));
    }
    let mut csv = Csv::new("z,filter");
    for z in lin_spaced(g.z_min, g.z_max, g.z_points) {
        let fv = filter(z, cfg.pulses.n);
        csv.row(&[fmt_float(fv.z), fmt_float(fv.value)]);
    }
    write_output(cfg.out.as_deref(), &csv.into_text())
}

pub fn run_coherence(cfg: &Config) -> Result<(), CliError> {
    let spectrum = cfg.noise_spectrum()?;
    let n_qubits = cfg.ensemble.n_qubits;
    let n = cfg.pulses.n;
    let mut csv = Csv::new("tau,chi,abs_error,evaluations");
    for tau in tau_grid(cfg)? {
        let seq = PulseSequence::new(n, tau)
            .map_err(|e| CliError::Config(format!("tau = {tau}: {e}")))?;
        let chi = match cfg.spectrum.bath {
            Bath::Quantum => chi_quantum(&spectrum, cfg.spectrum.temperature, &seq, n_qubits),
            Bath::Classical => chi_classical(&spectrum, &seq, n_qubits),
        }
        .map_err(|e| CliError::Numerical(format!("tau = {tau}: {e}")))?;
        csv.row(&[
            fmt_float(tau),
            fmt_float(chi.chi),
            fmt_float(chi.abs_error_estimate),
            chi.integrand_evaluations.to_string(),
        ]);
    }
    write_output(cfg.out.as_deref(), &csv.into_text())
}

pub fn run_scan(cfg: &Config) -> Result<(), CliError> {
    let model = cfg.decay_model()?;
    model
        .validate()
        .map_err(|e| CliError::Config(format!("invalid decay model: {e}")))?;
    let ens = cfg.ensemble(cfg.ensemble.n_qubits);
    let n = cfg.pulses.n;
    let mut csv = Csv::new("tau,chi,signal,delta_delta");
    let mut rows = 0usize;
    for tau in tau_grid(cfg)? {
        let seq = PulseSequence::new(n, tau)
            .map_err(|e| CliError::Config(format!("tau = {tau}: {e}")))?;
        let point = match cfg.ensemble.protocol {
            ProtocolChoice::Ghz => {
                let chi = model
                    .chi(&seq, ens.n_qubits)
                    .map_err(|e| CliError::Numerical(format!("tau = {tau}: {e}")))?;
                uncertainty_ghz(&ens, &seq, &chi)
            }
            ProtocolChoice::Separable => {
                let chi = model
                    .chi(&seq, 1)
                    .map_err(|e| CliError::Numerical(format!("tau = {tau}: {e}")))?;
                uncertainty_separable(&ens, &seq, chi.chi)
            }
        };
        match point {
            Ok(p) => {
                csv.row(&[
                    fmt_float(p.tau),
                    fmt_float(p.chi),
                    fmt_float(p.signal),
                    fmt_float(p.delta_delta),
                ]);
                rows += 1;
            }
            // Fully dephased or budget-starved grid points are reported and
            // dropped; the remaining rows still chart the useful window.
            Err(
                e @ (PrecisionError::InsensitiveOperatingPoint { .. }
                | PrecisionError::RepetitionsBelowOne { .. }),
            ) => eprintln!("skipping tau = {tau}: {e}"),
            Err(e) => return Err(CliError::Numerical(format!("tau = {tau}: {e}"))),
        }
    }
    if rows == 0 {
        return Err(CliError::Numerical(
            "no tau grid point yields a usable operating point".into(),
        ));
    }
    write_output(cfg.out.as_deref(), &csv.into_text())
}

/// First search bracket for τ* when the config does not pin one: classical
/// spectra are bracketed inside the correlation time, power-law models
/// around the closed-form optimum (4·v·a·N)^(-1/v).
fn starting_bracket(
    cfg: &Config,
    model: &DecayModel,
    n_pulses: u32,
    n_qubits: u32,
) -> Result<TauBracket, CliError> {
    if let (Some(lo), Some(hi)) = (cfg.scaling.bracket_lo, cfg.scaling.bracket_hi) {
        return TauBracket::new(lo, hi)
            .map_err(|e| CliError::Config(format!("scaling bracket: {e}")));
    }
    if cfg.scaling.bracket_lo.is_some() != cfg.scaling.bracket_hi.is_some() {
        return Err(CliError::Config(
            "set both bracket_lo and bracket_hi, or neither".into(),
        ));
    }
    let power_law_scale = |a_total: f64, v: f64| (4.0 * v * a_total).powf(-1.0 / v);
    let scale = match model {
        DecayModel::Classical { spectrum } => match spectrum {
            NoiseSpectrum::Lorentzian { tau_c, .. } | NoiseSpectrum::Gaussian { tau_c, .. } => {
                return TauBracket::new(1e-5 * tau_c, 0.8 * tau_c)
                    .map_err(|e| CliError::Config(format!("derived bracket: {e}")));
            }
            _ => None,
        },
        DecayModel::Quantum { spectrum, .. } => match spectrum {
            NoiseSpectrum::OhmicCutoff { alpha, omega_d } => {
                // Below the cutoff χ(τ) is the pure power law of the
                // sequence parity; its closed form pins the right decade.
                let v = match n_pulses {
                    0 => 2.0,
                    n if n % 2 == 1 => 4.0,
                    _ => 6.0,
                };
                let unit_seq = PulseSequence::new(n_pulses, 1.0)
                    .expect("unit interrogation time is valid");
                let a_total = chi_small_tau(*alpha, *omega_d, &unit_seq, n_qubits).chi;
                Some(power_law_scale(a_total, v))
            }
            _ => None,
        },
        DecayModel::SyntheticPowerLaw { a, v } => {
            Some(power_law_scale(a * f64::from(n_qubits), *v))
        }
    };
    match scale {
        Some(s) if s > 0.0 && s.is_finite() => TauBracket::new(0.05 * s, 6.0 * s)
            .map_err(|e| CliError::Config(format!("derived bracket: {e}"))),
        _ => Err(CliError::Config(
            "this model has no derivable search window; set bracket_lo and bracket_hi".into(),
        )),
    }
}

pub fn run_scaling(cfg: &Config) -> Result<(), CliError> {
    let model = cfg.decay_model()?;
    model
        .validate()
        .map_err(|e| CliError::Config(format!("invalid decay model: {e}")))?;
    let n_list = &cfg.ensemble.n_list;
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(CliError::Config(
            "ensemble.n_list must be non-empty with every count >= 1".into(),
        ));
    }
    let n_pulses = cfg.pulses.n;
    let separable = cfg.ensemble.protocol == ProtocolChoice::Separable;

    let mut points: Vec<(u32, f64, f64, f64)> = Vec::new();
    let mut prev_tau: Option<f64> = None;
    for &n_qubits in n_list {
        let opt_qubits = if separable { 1 } else { n_qubits };
        let ens = cfg.ensemble(opt_qubits);
        let mut chi_fn = |tau: f64| -> Result<ChiResult, DecoherenceError> {
            let seq = PulseSequence::new(n_pulses, tau)
                .expect("bracketed search keeps tau positive and finite");
            model.chi(&seq, opt_qubits)
        };
        let mut bracket = match prev_tau {
            // Warm start: optima drift down slowly in N, so the previous
            // optimum brackets the next one comfortably.
            Some(t) => TauBracket::new(t / 50.0, t * 8.0)
                .map_err(|e| CliError::Numerical(format!("N = {n_qubits}: {e}")))?,
            None => starting_bracket(cfg, &model, n_pulses, opt_qubits)?,
        };
        let mut found = None;
        let mut last_err: Option<PrecisionError> = None;
        for _ in 0..4 {
            match optimal_tau(&ens, n_pulses, &mut chi_fn, bracket) {
                Ok(r) => {
                    found = Some(r);
                    break;
                }
                Err(PrecisionError::NoInteriorMinimum { tau_lo, tau_hi, at_upper }) => {
                    last_err = Some(PrecisionError::NoInteriorMinimum {
                        tau_lo,
                        tau_hi,
                        at_upper,
                    });
                    let (lo, hi) = if at_upper {
                        (tau_lo, (tau_hi * 10.0).min(cfg.ensemble.total_time))
                    } else {
                        (tau_lo / 10.0, tau_hi)
                    };
                    match TauBracket::new(lo, hi) {
                        Ok(b) if (b.lo, b.hi) != (bracket.lo, bracket.hi) => bracket = b,
                        _ => break,
                    }
                }
                Err(e) => {
                    last_err = Some(e);
                    break;
                }
            }
        }
        match found {
            Some((tau_star, point)) => {
                let dd = if separable {
                    point.delta_delta / f64::from(n_qubits).sqrt()
                } else {
                    point.delta_delta
                };
                points.push((n_qubits, tau_star, point.chi, dd));
                prev_tau = Some(tau_star);
            }
            None => {
                let reason = last_err
                    .map(|e| e.to_string())
                    .unwrap_or_else(|| "bracket widening stalled".into());
                eprintln!("N = {n_qubits}: no optimum ({reason})");
            }
        }
    }

    if points.len() < 6 {
        return Err(CliError::Numerical(format!(
            "only {} of {} qubit counts produced an optimum; at least 6 are needed \
             for a trustworthy exponent fit",
            points.len(),
            n_list.len()
        )));
    }

    let ns: Vec<f64> = points.iter().map(|p| f64::from(p.0)).collect();
    let dds: Vec<f64> = points.iter().map(|p| p.3).collect();
    let fit = fit_power_law(&ns, &dds)
        .map_err(|e| CliError::Numerical(format!("exponent fit: {e}")))?;
    let k = -fit.exponent;

    let mut csv = Csv::new("n_qubits,tau_star,chi_at_star,delta_delta_star");
    for (n_qubits, tau_star, chi, dd) in &points {
        csv.row(&[
            n_qubits.to_string(),
            fmt_float(*tau_star),
            fmt_float(*chi),
            fmt_float(*dd),
        ]);
    }
    write_output(cfg.out.as_deref(), &csv.into_text())?;

    let expected = cfg.scaling.expected_k;
    let summary = serde_json::json!({
        "k": k,
        "stderr": fit.stderr,
        "expected_k": expected,
        "pass": expected.map(|e| (k - e).abs() <= 0.02),
    });
    println!("{summary}");
    Ok(())
}

pub fn run_state(cfg: &Config) -> Result<(), CliError> {
    let s = &cfg.state;
    let state = match &s.amplitudes {
        Some(path) => ProbeState::from_csv_path(s.n_qubits, path)
            .map_err(|e| CliError::Config(format!("amplitudes {}: {e}", path.display())))?,
        None => ProbeState::ghz(s.n_qubits)
            .map_err(|e| CliError::Config(format!("state: {e}")))?,
    };
    let moments = generator_moments(&state);
    let p_coh = probability_coherent(&state, s.phi);
    let p_dec = probability_decohered(&state, s.phi, s.alpha, s.tau);
    let numerical = |e: ddmetrics::StateError| CliError::Numerical(e.to_string());
    let b_coh = bound_coherent(&state, s.tau, s.repetitions).map_err(numerical)?;
    let b_dec =
        bound_decohered(&state, s.tau, s.repetitions, s.alpha, s.theta).map_err(numerical)?;
    let report = serde_json::json!({
        "n_qubits": state.n_qubits(),
        "mean": moments.mean,
        "second_moment": moments.second,
        "variance": moments.second - moments.mean * moments.mean,
        "kappa": moments.kappa,
        "p_coherent": p_coh,
        "p_decohered": p_dec,
        "bound_coherent": b_coh,
        "bound_decohered": b_dec,
    });
    write_output(
        cfg.out.as_deref(),
        &format!("{}\n", serde_json::to_string_pretty(&report).expect("serializable")),
    )
}

pub fn run_mc_validate(cfg: &Config) -> Result<(), CliError> {
    let mc = &cfg.mc;
    if mc.kinds.is_empty() || mc.pulse_counts.is_empty() || mc.tau_factors.is_empty() {
        return Err(CliError::Config(
            "mc.kinds, mc.pulse_counts, and mc.tau_factors must all be non-empty".into(),
        ));
    }
    if mc.tau_factors.iter().any(|&f| !(f > 0.0 && f.is_finite())) {
        return Err(CliError::Config("mc.tau_factors must be positive".into()));
    }
    let spectra: Vec<(&'static str, NoiseSpectrum)> = mc
        .kinds
        .iter()
        .map(|kind| match kind {
            Kind::Lorentzian => Ok((
                "lorentzian",
                NoiseSpectrum::Lorentzian { sigma: mc.sigma, tau_c: mc.tau_c },
            )),
            Kind::Gaussian => Ok((
                "gaussian",
                NoiseSpectrum::Gaussian { sigma: mc.sigma, tau_c: mc.tau_c },
            )),
            other => Err(CliError::Config(format!(
                "mc validation covers the classical spectra only, not {other:?}"
            ))),
        })
        .collect::<Result<_, _>>()?;

    let mut csv =
        Csv::new("spectrum,n,tau,chi_mc,stderr,chi_analytic,sigma_ratio,low_confidence,pass");
    let mut failures = 0usize;
    let mut total = 0usize;
    for (label, spectrum) in &spectra {
        for &n in &mc.pulse_counts {
            for &factor in &mc.tau_factors {
                let tau = factor * mc.tau_c;
                let seq = PulseSequence::new(n, tau)
                    .map_err(|e| CliError::Config(format!("tau = {tau}: {e}")))?;
                let est = estimate_chi(spectrum, &seq, mc.trials, cfg.seed)
                    .map_err(|e| CliError::Numerical(format!("{label} n = {n}: {e}")))?;
                let analytic = chi_classical(spectrum, &seq, 1)
                    .map_err(|e| CliError::Numerical(format!("{label} n = {n}: {e}")))?
                    .chi;
                let deviation = (est.chi - analytic).abs();
                let sigma_ratio = if est.stderr > 0.0 {
                    deviation / est.stderr
                } else if deviation == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                // A disagreement counts against the run only when it is both
                // statistically significant and physically large.
                let pass = !(deviation > 3.0 * est.stderr && deviation > 0.05 * analytic);
                total += 1;
                failures += usize::from(!pass);
                csv.row(&[
                    (*label).to_string(),
                    n.to_string(),
                    fmt_float(tau),
                    fmt_float(est.chi),
                    fmt_float(est.stderr),
                    fmt_float(analytic),
                    fmt_float(sigma_ratio),
                    est.low_confidence.to_string(),
                    pass.to_string(),
                ]);
            }
        }
    }
    write_output(cfg.out.as_deref(), &csv.into_text())?;
    if failures > 0 {
        return Err(CliError::Numerical(format!(
            "{failures} of {total} cells deviate from quadrature beyond both the \
             3-sigma and 5% margins"
        )));
    }
    Ok(())
}
