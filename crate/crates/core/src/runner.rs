// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

//! Batch runs: a JSON config plus flag overrides selects a verification
//! suite, whose JSON report embeds the resolved config.
//!
//! Exit status is [`EXIT_PASS`] when every check passes, [`EXIT_FAIL`] when
//! a check fails (the report is still written) and [`EXIT_USAGE`] for a bad
//! config or command line.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Parser;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::gates::{verify_fft_equivalence_with, EquivalenceReport, VerifyOptions};
use crate::iontrap::{
    verify_hybrid_gate, FidelityReport, PhaseConvention, ScheduleTiming, TrapParams, TrapSimulator,
    VPulseModel,
};
use crate::pulse::{
    integrate_two_level_steps, min_two_level_steps, selectivity_error, AtomState, PulseProfile,
    PulseShape, RabiCouplings,
};
use crate::register::RegisterShape;
use crate::wavepacket::{
    dispersion_fidelity, free_evolve, offset_of_digit, to_energy, wavepacket_basis_matrix,
    AmplitudeVector, RydbergSpectrum, Truncation,
};
use crate::C64;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    VerifyQft,
    Wavepacket,
    Pulse,
    Iontrap,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub n_bar: f64,
    /// Revival time, in Kepler periods.
    pub t_rev_kepler: Option<f64>,
    /// Super-revival time, in Kepler periods.
    pub t_sr_kepler: Option<f64>,
    pub truncation: Truncation,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            n_bar: 50.0,
            t_rev_kepler: Some(n_bar_revival(50.0)),
            t_sr_kepler: None,
            truncation: Truncation::KeplerOnly,
        }
    }
}

/// Hydrogenic `T_rev / T_K = 2 n_bar / 3`.
fn n_bar_revival(n_bar: f64) -> f64 {
    2.0 * n_bar / 3.0
}

impl SpectrumConfig {
    pub fn build(&self, d: usize) -> Result<RydbergSpectrum> {
        let mut s = if self.n_bar.fract() == 0.0 {
            RydbergSpectrum::new(self.n_bar, d)?
        } else {
            RydbergSpectrum::with_fractional_n_bar(self.n_bar, d)?
        };
        let tk = s.t_kepler;
        if let Some(r) = self.t_rev_kepler {
            s = s.with_revival_time(r * tk)?;
        }
        if let Some(r) = self.t_sr_kepler {
            s = s.with_super_revival_time(r * tk)?;
        }
        s.with_truncation(self.truncation)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseConfig {
    pub shape: PulseShape,
    /// Single pulse duration, atomic units. Without it the pulse suite sweeps.
    pub duration: Option<f64>,
    pub area: f64,
    /// Uniform wave-packet coupling `W_gj`.
    pub omega_gj: f64,
    pub sweep_points: usize,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            shape: PulseShape::Square,
            duration: None,
            area: PI,
            omega_gj: 1.0,
            sweep_points: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IontrapConfig {
    pub l: usize,
    pub m: usize,
    pub kepler_periods: f64,
    pub aux_multiplicity: u32,
    pub convention: PhaseConvention,
    /// Use finite `V` pulses of `pulse.duration` instead of ideal ones.
    pub finite_v: bool,
}

impl Default for IontrapConfig {
    fn default() -> Self {
        Self {
            l: 0,
            m: 1,
            kepler_periods: 1.0,
            aux_multiplicity: 1,
            convention: PhaseConvention::HybridOffsets,
            finite_v: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub d: usize,
    pub q: usize,
    pub seed: u64,
    /// Inputs sampled when the register is too large for exhaustive checks.
    pub samples: usize,
    pub out: PathBuf,
    /// Optional CSV of the selectivity sweep.
    pub csv: Option<PathBuf>,
    pub spectrum: SpectrumConfig,
    pub trap: TrapParams,
    pub pulse: PulseConfig,
    pub iontrap: IontrapConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::VerifyQft,
            d: 2,
            q: 3,
            seed: 0,
            samples: 256,
            out: PathBuf::from("quditfft-report.json"),
            csv: None,
            spectrum: SpectrumConfig::default(),
            trap: TrapParams::default(),
            pulse: PulseConfig::default(),
            iontrap: IontrapConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config!("bad config: {e}"))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config!("cannot read {}: {e}", path.display()))?;
        Self::from_json(&text)
    }

    /// Checks every field against its module's validity range.
    pub fn validate(&self) -> Result<()> {
        let shape = RegisterShape::new(self.d, self.q)?;
        if self.samples == 0 {
            return Err(config!("samples must be positive"));
        }
        if matches!(
            self.mode,
            Mode::Wavepacket | Mode::Pulse | Mode::Iontrap | Mode::Full
        ) {
            self.spectrum.build(self.d)?;
        }
        if matches!(self.mode, Mode::Pulse | Mode::Full) {
            self.profile(self.pulse.duration.unwrap_or(1.0))?;
            RabiCouplings::uniform(self.d, self.pulse.omega_gj)?;
            if self.pulse.sweep_points < 2 {
                return Err(config!("sweep needs at least 2 points"));
            }
        }
        if matches!(self.mode, Mode::Iontrap | Mode::Full) {
            self.trap.validate()?;
            let it = &self.iontrap;
            if !(it.l < it.m && it.m < shape.q()) {
                return Err(config!(
                    "iontrap needs l < m < q, got l = {}, m = {}, q = {}",
                    it.l,
                    it.m,
                    shape.q()
                ));
            }
            if !(it.kepler_periods.is_finite() && it.kepler_periods > 0.0) {
                return Err(config!("kepler_periods must be positive"));
            }
            if it.aux_multiplicity == 0 {
                return Err(config!("aux_multiplicity must be at least 1"));
            }
            if it.finite_v && self.pulse.duration.is_none() {
                return Err(config!("finite V pulses need a pulse duration"));
            }
        }
        Ok(())
    }

    fn profile(&self, duration: f64) -> Result<PulseProfile> {
        let p = match self.pulse.shape {
            PulseShape::Square => PulseProfile::square(duration, self.pulse.area),
            PulseShape::Gaussian => PulseProfile::gaussian(duration, self.pulse.area),
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavepacketReport {
    pub d: usize,
    pub basis_unitarity_err: f64,
    /// Worst deviation of `|<k=-j|A|j>|` from one.
    pub duality_err: f64,
    /// Worst error of the cyclic permutation over `m` in `[0, 2d]`.
    pub kepler_cycling_err: f64,
    /// `(t / T_K, fidelity)` of the core packet against pure Kepler cycling.
    pub dispersion: Vec<(f64, f64)>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseReport {
    pub rabi_oracle_err: f64,
    pub convergence_ratio: f64,
    /// `(duration, leakage)`, longest pulse first.
    pub selectivity: Vec<(f64, f64)>,
    pub monotone: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Suites {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify_qft: Option<EquivalenceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavepacket: Option<WavepacketReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iontrap: Option<FidelityReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub config: RunConfig,
    pub pass: bool,
    pub suites: Suites,
}

fn run_verify_qft(cfg: &RunConfig) -> Result<EquivalenceReport> {
    let shape = RegisterShape::new(cfg.d, cfg.q)?;
    let opts = VerifyOptions {
        seed: cfg.seed,
        samples: cfg.samples,
        ..VerifyOptions::default()
    };
    Ok(verify_fft_equivalence_with(shape, &opts))
}

fn run_wavepacket(cfg: &RunConfig) -> Result<WavepacketReport> {
    let d = cfg.d;
    let spectrum = cfg.spectrum.build(d)?;
    let w = wavepacket_basis_matrix(d);
    let mut basis_unitarity_err = 0.0f64;
    for a in 0..d {
        for b in 0..d {
            let z: C64 = (0..d).map(|i| w[i][a].conj() * w[i][b]).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            basis_unitarity_err = basis_unitarity_err.max((z - want).norm());
        }
    }

    // A |j>_nu in energy amplitudes is W^dagger-column j of the DFT.
    let f = crate::gates::fourier_matrix(d);
    let mut duality_err = 0.0f64;
    for j in 0..d {
        let out: Vec<C64> = (0..d).map(|b| f[b][j]).collect();
        let as_packets = crate::wavepacket::to_wave_packet(&out);
        let k = (d - j) % d;
        duality_err = duality_err.max((as_packets[k].norm() - 1.0).abs());
    }

    let kepler = spectrum.clone().with_truncation(Truncation::KeplerOnly)?;
    let mut kepler_cycling_err = 0.0f64;
    for k in 0..d {
        let v = AmplitudeVector::wave_packet(offset_of_digit(k, d), d);
        for m in 0..=2 * d {
            let out = free_evolve(&v, &kepler, m as f64 * kepler.slot_time())?;
            let slot = (k + m) % d;
            for (i, z) in out.amps.iter().enumerate() {
                let want = if i == slot { 1.0 } else { 0.0 };
                kepler_cycling_err = kepler_cycling_err.max((z - want).norm());
            }
        }
    }

    let core = AmplitudeVector::wave_packet(0, d);
    let horizon = spectrum.t_rev.unwrap_or(spectrum.t_kepler) / spectrum.t_kepler;
    let points = cfg.pulse.sweep_points.max(2);
    let dispersion = (0..points)
        .map(|i| {
            let t = (horizon * i as f64 / (points - 1) as f64).round();
            dispersion_fidelity(&core, &spectrum, t * spectrum.t_kepler).map(|f| (t, f))
        })
        .collect::<Result<Vec<_>>>()?;
    // Energy-basis check that the packet really is a uniform superposition.
    let e = to_energy(&core.amps);
    let flat = e
        .iter()
        .all(|z| (z.norm() - 1.0 / (d as f64).sqrt()).abs() < 1e-12);

    let pass =
        flat && basis_unitarity_err < 1e-12 && duality_err < 1e-12 && kepler_cycling_err < 1e-12;
    Ok(WavepacketReport {
        d,
        basis_unitarity_err,
        duality_err,
        kepler_cycling_err,
        dispersion,
        pass,
    })
}

/// Resonant square-pulse error against the closed form at `steps`.
fn rabi_error(cfg: &RunConfig, steps: usize) -> Result<f64> {
    let d = cfg.d;
    let pulse = PulseProfile::square(1.0, cfg.pulse.area);
    let couplings = RabiCouplings::uniform(d, cfg.pulse.omega_gj)?;
    let start = AtomState::in_ground(d);
    let out = integrate_two_level_steps(&start, &pulse, &couplings, steps)?;
    let (bg, b0) = pulse.square_resonant_rotation(start.b_g, start.core());
    Ok((out.b_g - bg).norm().max((out.core() - b0).norm()))
}

fn run_pulse(cfg: &RunConfig) -> Result<PulseReport> {
    let d = cfg.d;
    let spectrum = cfg.spectrum.build(d)?;
    let couplings = RabiCouplings::uniform(d, cfg.pulse.omega_gj)?;
    let base = min_two_level_steps(&PulseProfile::square(1.0, cfg.pulse.area));
    let (e1, e2) = (rabi_error(cfg, 2 * base)?, rabi_error(cfg, 4 * base)?);
    let rabi_oracle_err = e2;
    let convergence_ratio = e1 / e2;

    let durations: Vec<f64> = match cfg.pulse.duration {
        Some(t) => vec![t],
        None => {
            let (hi, lo) = (spectrum.t_kepler, spectrum.t_kepler / (4.0 * d as f64));
            let n = cfg.pulse.sweep_points;
            (0..n)
                .map(|i| hi * (lo / hi).powf(i as f64 / (n - 1) as f64))
                .collect()
        }
    };
    let selectivity = durations
        .par_iter()
        .map(|&t| selectivity_error(&spectrum, &cfg.profile(t)?, &couplings).map(|e| (t, e)))
        .collect::<Result<Vec<_>>>()?;
    let monotone = selectivity.windows(2).all(|w| w[1].1 < w[0].1);
    let pass = rabi_oracle_err < 1e-8
        && (0.8 * 16.0..=1.2 * 16.0).contains(&convergence_ratio)
        && monotone;
    Ok(PulseReport {
        rabi_oracle_err,
        convergence_ratio,
        selectivity,
        monotone,
        pass,
    })
}

fn run_iontrap(cfg: &RunConfig) -> Result<FidelityReport> {
    let shape = RegisterShape::new(cfg.d, cfg.q)?;
    let spectrum = cfg.spectrum.build(cfg.d)?;
    let mut sim = TrapSimulator::new(spectrum, cfg.trap.clone())?;
    if cfg.iontrap.finite_v {
        let duration = cfg
            .pulse
            .duration
            .ok_or_else(|| config!("finite V needs a duration"))?;
        sim = sim.with_v_model(VPulseModel::Finite {
            profile: cfg.profile(duration)?,
            couplings: RabiCouplings::uniform(cfg.d, cfg.pulse.omega_gj)?,
        })?;
    }
    let timing = ScheduleTiming {
        kepler_periods: cfg.iontrap.kepler_periods,
        aux_multiplicity: cfg.iontrap.aux_multiplicity,
        convention: cfg.iontrap.convention,
    };
    verify_hybrid_gate(&sim, shape, cfg.iontrap.l, cfg.iontrap.m, &timing)
}

/// Runs the configured suites without touching the filesystem.
pub fn execute(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let mut suites = Suites::default();
    let all = cfg.mode == Mode::Full;
    if all || cfg.mode == Mode::VerifyQft {
        suites.verify_qft = Some(run_verify_qft(cfg)?);
    }
    if all || cfg.mode == Mode::Wavepacket {
        suites.wavepacket = Some(run_wavepacket(cfg)?);
    }
    if all || cfg.mode == Mode::Pulse {
        suites.pulse = Some(run_pulse(cfg)?);
    }
    if all || cfg.mode == Mode::Iontrap {
        suites.iontrap = Some(run_iontrap(cfg)?);
    }
    let pass = suites.verify_qft.as_ref().is_none_or(|r| r.pass)
        && suites.wavepacket.as_ref().is_none_or(|r| r.pass)
        && suites.pulse.as_ref().is_none_or(|r| r.pass)
        && suites.iontrap.as_ref().is_none_or(|r| r.pass);
    Ok(RunReport {
        schema: REPORT_SCHEMA,
        config: cfg.clone(),
        pass,
        suites,
    })
}

pub fn report_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// `duration,leakage` rows of the selectivity sweep.
pub fn selectivity_csv(report: &PulseReport) -> String {
    let mut s = String::from("duration,leakage\n");
    for (t, e) in &report.selectivity {
        let _ = writeln!(s, "{t:e},{e:e}");
    }
    s
}

/// Executes `cfg` and writes its report (and CSV, if asked for). Returns the
/// process exit status.
pub fn run(cfg: &RunConfig) -> Result<i32> {
    let report = execute(cfg)?;
    std::fs::write(&cfg.out, report_json(&report))
        .map_err(|e| config!("cannot write {}: {e}", cfg.out.display()))?;
    if let (Some(path), Some(p)) = (&cfg.csv, &report.suites.pulse) {
        std::fs::write(path, selectivity_csv(p))
            .map_err(|e| config!("cannot write {}: {e}", path.display()))?;
    }
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}

/// Verification suites for the qudit FFT and its Rydberg / ion-trap
/// realization.
#[derive(Debug, Parser)]
#[command(name = "quditfft", version)]
pub struct Cli {
    /// JSON run config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = parse_truncation)]
    pub spectrum_truncation: Option<Truncation>,
    /// Pulse duration in atomic units.
    #[arg(long)]
    pub pulse_duration: Option<f64>,
    /// Also write the selectivity sweep as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn parse_truncation(s: &str) -> std::result::Result<Truncation, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|_| {
        format!("expected kepler-only, through-revival or through-super-revival, got {s}")
    })
}

impl Cli {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.mode {
            cfg.mode = v;
        }
        if let Some(v) = self.d {
            cfg.d = v;
        }
        if let Some(v) = self.q {
            cfg.q = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.spectrum_truncation {
            cfg.spectrum.truncation = v;
        }
        if let Some(v) = self.pulse_duration {
            cfg.pulse.duration = Some(v);
        }
        if let Some(v) = &self.csv {
            cfg.csv = Some(v.clone());
        }
        Ok(cfg)
    }
}

/// Parses `args` (program name first), runs, and maps every outcome onto an
/// exit status.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
        }
    };
    let outcome = cli.resolve().and_then(|cfg| {
        cfg.validate()?;
        run(&cfg)
    });
    match outcome {
        Ok(code) => code,
        Err(e @ (Error::Config(_) | Error::Domain(_))) => {
            eprintln!("quditfft: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("quditfft: {e}");
            EXIT_FAIL
        }
    }
}
