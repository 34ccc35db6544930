// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

//! Two ions and one trap mode running the hybrid-basis phase gate.
//!
//! The control ion `l` holds `d` Rydberg energy levels plus a ground state
//! `g`. The target ion `m` holds `d` wave-packet slots plus `g` and an
//! auxiliary level `e`. The centre-of-mass mode is restricted to `{|0>, |1>}`.
//!
//! Amplitudes are kept in the frame rotating at the mean Rydberg frequency,
//! so between pulses only the Rydberg manifolds evolve: level `j` of ion `l`
//! picks up `exp(-i (w_j - w_0) t)` and the wave packets of ion `m` cycle
//! through the slots. Slot `0` is the packet at the atomic core.
//!
//! Pulses are applied as instantaneous unitaries:
//!
//! - `V` on ion `m`: `exp(i theta/2 (s + s^dagger))` between slot `0` and `g`;
//!   no trap coupling.
//! - `U` on ion `l` at `w_j - nu_x`: `exp(-i theta/2 (s^dagger a + s a^dagger))`
//!   between `|j>|0>` and `|g>|1>`, carrying the laser phase
//!   `exp(-i (w_j - w_0) t)` of the pulse time.
//! - auxiliary `U` on ion `m`: a detuned sideband cycle between `|g>|1>` and
//!   `|e>|0>` that returns `|g>|1>` with phase `n pi (1 + D / W_ge)`.
//!
//! Five pulses `V_m U_l U_m' U_l V_m` give the branch `|j>_nu |k>_tau` a
//! phase `phi_jk`. Repeating them for all `d^2` pairs builds the gate.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, domain, Result};
use crate::gates::{phase_b_angle, wrap_angle};
use crate::pulse::{integrate_full, min_full_steps, AtomState, PulseProfile, RabiCouplings};
use crate::register::RegisterShape;
use crate::wavepacket::{
    digit_of, level_offsets, offset_of_digit, to_energy, to_wave_packet, AmplitudeVector, Basis,
    RydbergSpectrum, Truncation,
};
use crate::C64;

/// Largest amplitude tolerated on a state a pulse would push into `|2>`.
const TRAP_LEAK_TOL: f64 = 1e-12;

/// Above this the Lamb-Dicke expansion behind the `U` interaction is suspect.
pub const LAMB_DICKE_WARN: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapParams {
    /// Trap frequency.
    pub nu_x: f64,
    /// Lamb-Dicke parameter `k_x sqrt(hbar / (2 M nu_x))`.
    pub eta: f64,
    /// Number of ions sharing the mode.
    pub q_ions: usize,
    /// Auxiliary level frequency.
    pub omega_e: f64,
    /// Generalized Rabi frequency of the auxiliary sideband cycle.
    pub omega_ge: f64,
}

impl Default for TrapParams {
    fn default() -> Self {
        Self {
            nu_x: 1.5e-10,
            eta: 0.1,
            q_ions: 2,
            omega_e: 0.05,
            omega_ge: 1e-11,
        }
    }
}

impl TrapParams {
    /// Validates the parameters, returning warnings for values that are
    /// legal but outside the regime the interactions are derived for.
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.nu_x.is_finite() && self.nu_x > 0.0) {
            return Err(domain!(
                "trap frequency must be positive, got {}",
                self.nu_x
            ));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(domain!(
                "Lamb-Dicke parameter must be positive, got {}",
                self.eta
            ));
        }
        if self.q_ions < 2 {
            return Err(domain!(
                "the gate needs at least two ions, got {}",
                self.q_ions
            ));
        }
        if !(self.omega_ge.is_finite() && self.omega_ge > 0.0) {
            return Err(domain!("omega_ge must be positive, got {}", self.omega_ge));
        }
        let mut warnings = Vec::new();
        if self.eta > LAMB_DICKE_WARN {
            warnings.push(format!(
                "eta = {} is outside the Lamb-Dicke regime (> {LAMB_DICKE_WARN})",
                self.eta
            ));
        }
        Ok(warnings)
    }

    /// Sideband coupling relative to the carrier, `eta / sqrt(q)`.
    pub fn sideband_factor(&self) -> f64 {
        self.eta / (self.q_ions as f64).sqrt()
    }
}

/// The detuning `D` with `n pi (1 + D / W_ge) = phi (mod 2 pi)` of smallest
/// magnitude. Ties go to the positive root, so `phi = 0` gives `D = W_ge`.
pub fn solve_aux_detuning(phi_jk: f64, omega_ge: f64, multiplicity: u32) -> Result<f64> {
    if !(omega_ge.is_finite() && omega_ge > 0.0) {
        return Err(domain!("omega_ge must be positive, got {omega_ge}"));
    }
    if multiplicity == 0 {
        return Err(domain!("multiplicity must be at least 1"));
    }
    let n = multiplicity as f64;
    let spacing = 2.0 / n;
    let x0 = phi_jk / (n * PI) - 1.0;
    let mut x = x0 - spacing * (x0 / spacing - 0.5).ceil();
    // Snap rounding noise at the tie onto the positive root.
    if (x + spacing / 2.0).abs() < 1e-12 {
        x = spacing / 2.0;
    }
    Ok(x * omega_ge)
}

/// Phase of the `(j, k)` branch, `-2 pi j k / d^{m-l+1}`, with level and
/// packet offsets.
pub fn hybrid_phase(j: i64, k: i64, l: usize, m: usize, d: usize) -> f64 {
    -TAU * (j * k) as f64 / (d as f64).powi((m - l + 1) as i32)
}

/// How the target phase of each `(j, k)` branch is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseConvention {
    /// [`hybrid_phase`] on signed offsets.
    #[default]
    HybridOffsets,
    /// The register gate's phase on digits, `2 pi (j mod d)(k mod d) / d^{m-l+1}`.
    /// With the target qudit read in the wave-packet basis this is exactly
    /// the physical form of the register phase gate.
    LogicalDigits,
}

impl PhaseConvention {
    pub fn phase(self, j: i64, k: i64, l: usize, m: usize, d: usize) -> f64 {
        match self {
            Self::HybridOffsets => hybrid_phase(j, k, l, m, d),
            Self::LogicalDigits => phase_b_angle(d, l, m, digit_of(j, d), digit_of(k, d)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ion {
    L,
    M,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ControlLevel {
    Rydberg(i64),
    Ground,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetLevel {
    /// Wave-packet slot, as an offset; slot `0` is at the core.
    Packet(i64),
    Ground,
    Aux,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UTransition {
    /// `|j>|0> <-> |g>|1>` on the control ion.
    Level(i64),
    /// `|g>|1> <-> |e>|0>` on the target ion.
    Aux,
}

/// Joint amplitudes over control levels, target levels and trap occupation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointIonState {
    d: usize,
    amps: Vec<C64>,
    /// Time of the amplitudes, atomic units.
    pub t: f64,
}

impl JointIonState {
    fn dims(d: usize) -> (usize, usize) {
        (d + 1, d + 2)
    }

    pub fn zero(d: usize) -> Self {
        let (dl, dm) = Self::dims(d);
        Self {
            d,
            amps: vec![C64::new(0.0, 0.0); dl * dm * 2],
            t: 0.0,
        }
    }

    pub fn basis(d: usize, l: ControlLevel, m: TargetLevel, trap: usize) -> Self {
        let mut s = Self::zero(d);
        let idx = s.index(l, m, trap);
        s.amps[idx] = C64::new(1.0, 0.0);
        s
    }

    /// `|j>_nu |k>_tau |0>`.
    pub fn hybrid(j: i64, k: i64, d: usize) -> Self {
        Self::basis(d, ControlLevel::Rydberg(j), TargetLevel::Packet(k), 0)
    }

    /// Builds `sum c_{jk} |j, k>|0>` from `d*d` amplitudes ordered by
    /// `digit(j) * d + digit(k)`.
    pub fn from_hybrid_amps(d: usize, c: &[C64]) -> Result<Self> {
        if c.len() != d * d {
            return Err(domain!(
                "expected {} hybrid amplitudes, got {}",
                d * d,
                c.len()
            ));
        }
        let norm_sqr: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > crate::tol::EPS_STATE {
            return Err(domain!("hybrid amplitudes are not normalized: {norm_sqr}"));
        }
        let mut s = Self::zero(d);
        for jd in 0..d {
            for kd in 0..d {
                let idx = s.raw_index(jd, kd, 0);
                s.amps[idx] = c[jd * d + kd];
            }
        }
        Ok(s)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    #[inline]
    fn raw_index(&self, l: usize, m: usize, n: usize) -> usize {
        let (_, dm) = Self::dims(self.d);
        (l * dm + m) * 2 + n
    }

    fn control_index(&self, lev: ControlLevel) -> usize {
        match lev {
            ControlLevel::Rydberg(j) => digit_of(j, self.d),
            ControlLevel::Ground => self.d,
        }
    }

    fn target_index(&self, lev: TargetLevel) -> usize {
        match lev {
            TargetLevel::Packet(k) => digit_of(k, self.d),
            TargetLevel::Ground => self.d,
            TargetLevel::Aux => self.d + 1,
        }
    }

    pub fn index(&self, l: ControlLevel, m: TargetLevel, trap: usize) -> usize {
        assert!(trap < 2, "trap occupation is limited to 0 and 1");
        self.raw_index(self.control_index(l), self.target_index(m), trap)
    }

    pub fn amp(&self, l: ControlLevel, m: TargetLevel, trap: usize) -> C64 {
        self.amps[self.index(l, m, trap)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Population with one trap phonon.
    pub fn trap_excited_population(&self) -> f64 {
        self.amps
            .iter()
            .skip(1)
            .step_by(2)
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// Reduced density matrix of the trap mode, `[[r00, r01], [r10, r11]]`.
    pub fn trap_density(&self) -> [[C64; 2]; 2] {
        let mut rho = [[C64::new(0.0, 0.0); 2]; 2];
        for pair in self.amps.chunks_exact(2) {
            for a in 0..2 {
                for b in 0..2 {
                    rho[a][b] += pair[a] * pair[b].conj();
                }
            }
        }
        rho
    }

    /// The `d*d` computational amplitudes (both ions Rydberg, trap `|0>`),
    /// ordered by `digit(j) * d + digit(k)`.
    pub fn hybrid_amps(&self) -> Vec<C64> {
        let d = self.d;
        (0..d * d)
            .map(|i| self.amps[self.raw_index(i / d, i % d, 0)])
            .collect()
    }
}

/// What a pulse is tuned to, symbolically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum FrequencyTarget {
    /// Mean Rydberg frequency `w_0`.
    MeanRydberg,
    /// Red sideband of level `j`, `w_j - nu_x`.
    LevelSideband { j: i64 },
    /// Red sideband of the auxiliary level, shifted by the detuning.
    AuxSideband,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PulseKind {
    /// Broadband carrier on the target ion.
    VM,
    /// Narrow-band sideband on the control ion.
    UL,
    /// Detuned sideband to the auxiliary level on the target ion.
    UMAux,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseStep {
    pub kind: PulseKind,
    pub target: FrequencyTarget,
    /// Pulse area, radians.
    pub area: f64,
    /// Detuning above resonance; nonzero only on the auxiliary pulse.
    pub detuning: f64,
    /// Scheduled time, atomic units. Finite `V` pulses are centered here.
    pub time: f64,
}

/// Spacing of the five pulses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleTiming {
    /// Kepler periods between the two `V_m` pulses. Must be an integer for
    /// the dark packet to be back at the core.
    pub kepler_periods: f64,
    /// Repetitions of the auxiliary sideband cycle.
    pub aux_multiplicity: u32,
    pub convention: PhaseConvention,
}

impl Default for ScheduleTiming {
    fn default() -> Self {
        Self {
            kepler_periods: 1.0,
            aux_multiplicity: 1,
            convention: PhaseConvention::HybridOffsets,
        }
    }
}

impl ScheduleTiming {
    pub fn warnings(&self) -> Vec<String> {
        let p = self.kepler_periods;
        let mut w = Vec::new();
        if (p - p.round()).abs() > 1e-12 || p < 1.0 {
            w.push(format!(
                "second V pulse {p} Kepler periods after the first is not commensurate with the orbit"
            ));
        }
        w
    }
}

/// How `V` pulses are modelled.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "model")]
pub enum VPulseModel {
    /// Instantaneous rotation between slot `0` and `g`.
    #[default]
    Ideal,
    /// Finite-duration broadband pulse, integrated through the full Rydberg
    /// manifold of the target ion and centered on the scheduled time.
    Finite {
        profile: PulseProfile,
        couplings: RabiCouplings,
    },
}

/// Pulse and free-evolution engine for one spectrum and trap.
#[derive(Clone, Debug)]
pub struct TrapSimulator {
    pub spectrum: RydbergSpectrum,
    pub params: TrapParams,
    pub v_model: VPulseModel,
    /// Target-ion propagator for finite `V` pulses, `(d+1)^2` row-major over
    /// `{slots, g}`, indexed `[out][in]`.
    finite_v: Option<Vec<Vec<C64>>>,
}

impl TrapSimulator {
    pub fn new(spectrum: RydbergSpectrum, params: TrapParams) -> Result<Self> {
        spectrum.validate()?;
        params.validate()?;
        Ok(Self {
            spectrum,
            params,
            v_model: VPulseModel::Ideal,
            finite_v: None,
        })
    }

    pub fn with_v_model(mut self, v_model: VPulseModel) -> Result<Self> {
        self.finite_v = match &v_model {
            VPulseModel::Ideal => None,
            VPulseModel::Finite { profile, couplings } => {
                Some(self.finite_v_propagator(profile, couplings)?)
            }
        };
        self.v_model = v_model;
        Ok(self)
    }

    pub fn d(&self) -> usize {
        self.spectrum.d
    }

    fn check_state(&self, state: &JointIonState) -> Result<()> {
        if state.d != self.d() {
            return Err(domain!("state has d = {}, simulator {}", state.d, self.d()));
        }
        Ok(())
    }

    /// Propagator of one finite `V` pulse referenced to its center: the
    /// full-manifold evolution with the free evolution before and after the
    /// center taken out.
    fn finite_v_propagator(
        &self,
        profile: &PulseProfile,
        couplings: &RabiCouplings,
    ) -> Result<Vec<Vec<C64>>> {
        let d = self.d();
        let steps = 2 * min_full_steps(&self.spectrum, profile);
        let cols: Vec<Vec<C64>> = (0..=d)
            .into_par_iter()
            .map(|col| {
                let input = if col == d {
                    AtomState::in_ground(d)
                } else {
                    AtomState::in_wave_packet(offset_of_digit(col, d), d)
                };
                integrate_full(&input, &self.spectrum, profile, couplings, steps).map(|out| {
                    let mut v = out.wp.amps;
                    v.push(out.b_g);
                    v
                })
            })
            .collect::<Result<_>>()?;
        Ok((0..=d)
            .map(|row| (0..=d).map(|col| cols[col][row]).collect())
            .collect())
    }

    /// Target-ion free propagator over `dt` in the slot basis, `[out][in]`.
    fn packet_propagator(&self, dt: f64) -> Vec<Vec<C64>> {
        let d = self.d();
        let phases = self.spectrum.phase_factors(dt);
        let cols: Vec<Vec<C64>> = (0..d)
            .map(|k| {
                let mut unit = vec![C64::new(0.0, 0.0); d];
                unit[k] = C64::new(1.0, 0.0);
                let energy: Vec<C64> = to_energy(&unit)
                    .into_iter()
                    .zip(&phases)
                    .map(|(z, p)| z * p)
                    .collect();
                to_wave_packet(&energy)
            })
            .collect();
        (0..d)
            .map(|row| (0..d).map(|col| cols[col][row]).collect())
            .collect()
    }

    /// Free evolution by `dt`, which may be negative (used to strip the known
    /// free evolution off a result).
    pub fn free_evolve(&self, state: &mut JointIonState, dt: f64) -> Result<()> {
        self.check_state(state)?;
        if dt == 0.0 {
            return Ok(());
        }
        let d = self.d();
        let phases = self.spectrum.phase_factors(dt);
        let prop = self.packet_propagator(dt);
        let (dl, _) = JointIonState::dims(d);
        let mut slot = vec![C64::new(0.0, 0.0); d];
        for l in 0..dl {
            let lphase = if l < d { phases[l] } else { C64::new(1.0, 0.0) };
            for n in 0..2 {
                for (k, s) in slot.iter_mut().enumerate() {
                    *s = state.amps[state.raw_index(l, k, n)];
                }
                for (k, row) in prop.iter().enumerate() {
                    let v: C64 = row.iter().zip(&slot).map(|(a, b)| a * b).sum();
                    let idx = state.raw_index(l, k, n);
                    state.amps[idx] = v * lphase;
                }
                for mi in [d, d + 1] {
                    let idx = state.raw_index(l, mi, n);
                    state.amps[idx] *= lphase;
                }
            }
        }
        state.t += dt;
        Ok(())
    }

    pub fn evolve_to(&self, state: &mut JointIonState, t: f64) -> Result<()> {
        if t < state.t - 1e-9 * self.spectrum.t_kepler {
            return Err(domain!("cannot evolve from t = {} back to {t}", state.t));
        }
        self.free_evolve(state, t - state.t)
    }

    /// Rotates the pair `(a, b)` by `cos(theta/2) 1 + i s sin(theta/2) X_phi`
    /// with `X_phi = e^{i phi}|a><b| + e^{-i phi}|b><a|`.
    fn rotate_pair(state: &mut JointIonState, a: usize, b: usize, theta: f64, sign: f64, phi: f64) {
        let (s, c) = (0.5 * theta).sin_cos();
        let off = C64::new(0.0, sign * s);
        let (za, zb) = (state.amps[a], state.amps[b]);
        state.amps[a] = za * c + off * C64::from_polar(1.0, phi) * zb;
        state.amps[b] = zb * c + off * C64::from_polar(1.0, -phi) * za;
    }

    /// Carrier pulse. Only the target ion has a carrier transition here:
    /// slot `0` (the packet at the core) and `g`.
    pub fn apply_v_pulse(&self, state: &mut JointIonState, ion: Ion, area: f64) -> Result<()> {
        self.check_state(state)?;
        if ion == Ion::L {
            return Err(domain!(
                "no carrier transition is defined on the control ion"
            ));
        }
        let d = self.d();
        let (dl, _) = JointIonState::dims(d);
        match &self.finite_v {
            None => {
                for l in 0..dl {
                    for n in 0..2 {
                        let a = state.raw_index(l, 0, n);
                        let b = state.raw_index(l, d, n);
                        Self::rotate_pair(state, a, b, area, 1.0, 0.0);
                    }
                }
            }
            Some(prop) => {
                // The finite propagator is built for the configured pulse area.
                let mut v = vec![C64::new(0.0, 0.0); d + 1];
                for l in 0..dl {
                    for n in 0..2 {
                        for (i, x) in v.iter_mut().enumerate() {
                            *x = state.amps[state.raw_index(l, i, n)];
                        }
                        for (i, row) in prop.iter().enumerate() {
                            let idx = state.raw_index(l, i, n);
                            state.amps[idx] = row.iter().zip(&v).map(|(a, b)| a * b).sum();
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Sideband pulse. `area` is the resonant pulse area for
    /// [`UTransition::Level`], and the generalized area `W_ge * duration` for
    /// [`UTransition::Aux`], where `detuning` must not exceed `W_ge`.
    pub fn apply_u_pulse(
        &self,
        state: &mut JointIonState,
        ion: Ion,
        transition: UTransition,
        area: f64,
        detuning: f64,
    ) -> Result<()> {
        self.check_state(state)?;
        let d = self.d();
        let (dl, dm) = JointIonState::dims(d);
        match (ion, transition) {
            (Ion::L, UTransition::Level(j)) => {
                if detuning != 0.0 {
                    return Err(domain!("control-ion sideband pulses are resonant"));
                }
                let jd = digit_of(j, d);
                for mi in 0..dm {
                    let leak = state.amps[state.raw_index(jd, mi, 1)].norm();
                    if leak > TRAP_LEAK_TOL {
                        return Err(contract!(
                            "|j={j}>|1> holds amplitude {leak:e}; the pulse would populate |2>"
                        ));
                    }
                }
                let laser = -self.spectrum.omega_offset(offset_of_digit(jd, d)) * state.t;
                for mi in 0..dm {
                    let a = state.raw_index(jd, mi, 0);
                    let b = state.raw_index(d, mi, 1);
                    Self::rotate_pair(state, a, b, area, -1.0, laser);
                }
                Ok(())
            }
            (Ion::M, UTransition::Aux) => {
                for li in 0..dl {
                    let leak = state.amps[state.raw_index(li, d + 1, 1)].norm();
                    if leak > TRAP_LEAK_TOL {
                        return Err(contract!(
                            "|e>|1> holds amplitude {leak:e}; the pulse would populate |2>"
                        ));
                    }
                }
                let u = aux_propagator(area, detuning, self.params.omega_ge, state.t)?;
                for li in 0..dl {
                    let a = state.raw_index(li, d, 1);
                    let b = state.raw_index(li, d + 1, 0);
                    let (za, zb) = (state.amps[a], state.amps[b]);
                    state.amps[a] = u[0][0] * za + u[0][1] * zb;
                    state.amps[b] = u[1][0] * za + u[1][1] * zb;
                }
                Ok(())
            }
            _ => Err(domain!("{transition:?} is not a sideband of ion {ion:?}")),
        }
    }

    /// The five pulses for branch `(j, k)`, starting no earlier than `t_start`.
    /// The first `V` pulse waits until packet `k` (labelled at `t = 0`) is
    /// at the core.
    pub fn phase_schedule(
        &self,
        j: i64,
        k: i64,
        phi_jk: f64,
        t_start: f64,
        timing: &ScheduleTiming,
    ) -> Result<Vec<PulseStep>> {
        let d = self.d() as i64;
        let slot = self.spectrum.slot_time();
        // Slot 0 holds label k at t = s T_K / d when s = -k (mod d).
        let s_min = (t_start / slot - 1e-9).ceil() as i64;
        let s = s_min + (-k - s_min).rem_euclid(d);
        let t1 = s as f64 * slot;
        let gap = timing.kepler_periods * self.spectrum.t_kepler;
        let detuning = solve_aux_detuning(phi_jk, self.params.omega_ge, timing.aux_multiplicity)?;
        let v = |time| PulseStep {
            kind: PulseKind::VM,
            target: FrequencyTarget::MeanRydberg,
            area: PI,
            detuning: 0.0,
            time,
        };
        let u = |time| PulseStep {
            kind: PulseKind::UL,
            target: FrequencyTarget::LevelSideband { j },
            area: PI,
            detuning: 0.0,
            time,
        };
        Ok(vec![
            v(t1),
            u(t1 + 0.25 * gap),
            PulseStep {
                kind: PulseKind::UMAux,
                target: FrequencyTarget::AuxSideband,
                area: TAU * timing.aux_multiplicity as f64,
                detuning,
                time: t1 + 0.5 * gap,
            },
            u(t1 + 0.75 * gap),
            v(t1 + gap),
        ])
    }

    pub fn execute(&self, state: &mut JointIonState, steps: &[PulseStep]) -> Result<()> {
        for step in steps {
            self.evolve_to(state, step.time)?;
            match (step.kind, step.target) {
                (PulseKind::VM, _) => self.apply_v_pulse(state, Ion::M, step.area)?,
                (PulseKind::UL, FrequencyTarget::LevelSideband { j }) => {
                    self.apply_u_pulse(state, Ion::L, UTransition::Level(j), step.area, 0.0)?
                }
                (PulseKind::UMAux, _) => {
                    self.apply_u_pulse(state, Ion::M, UTransition::Aux, step.area, step.detuning)?
                }
                (PulseKind::UL, target) => {
                    return Err(domain!("control-ion pulse with target {target:?}"))
                }
            }
        }
        Ok(())
    }

    /// Runs the five-pulse protocol for one branch, starting at `state.t`.
    pub fn run_phase_gate(
        &self,
        state: &mut JointIonState,
        j: i64,
        k: i64,
        phi_jk: f64,
        timing: &ScheduleTiming,
    ) -> Result<Vec<PulseStep>> {
        let steps = self.phase_schedule(j, k, phi_jk, state.t, timing)?;
        self.execute(state, &steps)?;
        Ok(steps)
    }

    /// One five-pulse schedule per `(j, k)`, run back to back starting at
    /// `t = 0`, with target phases from `timing.convention`.
    pub fn build_b_gate_schedule(
        &self,
        l: usize,
        m: usize,
        shape: RegisterShape,
        timing: &ScheduleTiming,
    ) -> Result<Vec<Vec<PulseStep>>> {
        let d = self.d();
        if shape.d() != d {
            return Err(domain!("register has d = {}, simulator {d}", shape.d()));
        }
        if !(l < m && m < shape.q()) {
            return Err(domain!(
                "need l < m < q, got l = {l}, m = {m}, q = {}",
                shape.q()
            ));
        }
        let mut t = 0.0;
        let mut out = Vec::with_capacity(d * d);
        for j in level_offsets(d) {
            for k in level_offsets(d) {
                let phi = timing.convention.phase(j, k, l, m, d);
                let steps = self.phase_schedule(j, k, phi, t, timing)?;
                t = steps.last().map(|s| s.time).unwrap_or(t);
                out.push(steps);
            }
        }
        Ok(out)
    }
}

/// Closed-form propagator of the detuned sideband cycle on `(|g>|1>, |e>|0>)`
/// over duration `area / W_ge`, in the simulator frame, for a pulse starting
/// at `t0`. The laser sits `detuning` above resonance.
fn aux_propagator(area: f64, detuning: f64, omega_ge: f64, t0: f64) -> Result<[[C64; 2]; 2]> {
    if detuning.abs() > omega_ge * (1.0 + 1e-12) {
        return Err(domain!(
            "detuning {detuning} exceeds the generalized Rabi frequency {omega_ge}"
        ));
    }
    let bare = (omega_ge * omega_ge - detuning * detuning).max(0.0).sqrt();
    let tau = area / omega_ge;
    // Rotating frame: H = [[D/2, W/2], [W/2, -D/2]] on (g1, e0).
    let (s, c) = (0.5 * area).sin_cos();
    let i = C64::i();
    let r = [
        [
            c - i * s * (detuning / omega_ge),
            -i * s * (bare / omega_ge),
        ],
        [
            -i * s * (bare / omega_ge),
            c + i * s * (detuning / omega_ge),
        ],
    ];
    // Back to the simulator frame: c_g1 = alpha e^{+i D t/2}, c_e0 = beta e^{-i D t/2}.
    let fa = |t: f64| C64::from_polar(1.0, 0.5 * detuning * t);
    let t1 = t0 + tau;
    Ok([
        [fa(t1) * r[0][0] * fa(t0).conj(), fa(t1) * r[0][1] * fa(t0)],
        [
            fa(t1).conj() * r[1][0] * fa(t0).conj(),
            fa(t1).conj() * r[1][1] * fa(t0),
        ],
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub kepler_periods: f64,
    pub aux_multiplicity: u32,
    pub t_kepler: f64,
    pub total_time: f64,
    pub runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub d: usize,
    pub l: usize,
    pub m: usize,
    pub convention: PhaseConvention,
    pub fidelity: f64,
    /// Per branch, ordered by `digit(j) * d + digit(k)`, after removing the
    /// global phase.
    pub per_branch_phase_error: Vec<f64>,
    /// Population left outside the computational subspace, worst input.
    pub max_leakage: f64,
    /// Trap `|1>` population after the full gate, worst input.
    pub max_trap_residual: f64,
    pub timing_params: TimingReport,
    pub spectrum_truncation: Truncation,
    pub warnings: Vec<String>,
    pub pass: bool,
}

/// Fidelity threshold for the ideal-pulse gate.
pub const GATE_FIDELITY_TOL: f64 = 1e-9;
/// Trap residual threshold.
pub const TRAP_RESIDUAL_TOL: f64 = 1e-10;

/// Diagonal phases (by `digit(j) * d + digit(k)`) that the pulse pairs of one
/// run put on the branches it does not target: `-1` from the two `U_l`
/// pulses on row `j`, `-1` from the two `V_m` pulses on column `k`.
pub fn run_bookkeeping(d: usize, j: i64, k: i64) -> Vec<C64> {
    let (jd, kd) = (digit_of(j, d), digit_of(k, d));
    (0..d * d)
        .map(|i| {
            let (a, b) = (i / d, i % d);
            let flips = usize::from(a == jd) + usize::from(b == kd);
            if flips == 1 {
                C64::new(-1.0, 0.0)
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect()
}

/// Runs all `d^2` schedules on every computational basis input, strips the
/// free evolution, and compares the resulting `d^2 x d^2` map with the ideal
/// diagonal gate through `|Tr(G^dagger M)|^2 / D^2`.
pub fn verify_hybrid_gate(
    sim: &TrapSimulator,
    shape: RegisterShape,
    l: usize,
    m: usize,
    timing: &ScheduleTiming,
) -> Result<FidelityReport> {
    let d = sim.d();
    let schedules = sim.build_b_gate_schedule(l, m, shape, timing)?;
    let all: Vec<PulseStep> = schedules.iter().flatten().copied().collect();
    let t_end = all.last().map(|s| s.time).unwrap_or(0.0);
    let dim = d * d;

    let offsets = level_offsets(d);
    let target: Vec<f64> = (0..dim)
        .map(|i| {
            let (j, k) = (offset_of_digit(i / d, d), offset_of_digit(i % d, d));
            timing.convention.phase(j, k, l, m, d)
        })
        .collect();
    let mut bookkeeping = vec![C64::new(1.0, 0.0); dim];
    for &j in &offsets {
        for &k in &offsets {
            for (b, f) in bookkeeping.iter_mut().zip(run_bookkeeping(d, j, k)) {
                *b *= f;
            }
        }
    }

    let columns: Vec<(Vec<C64>, f64, f64)> = (0..dim)
        .into_par_iter()
        .map(|col| {
            let (j, k) = (offset_of_digit(col / d, d), offset_of_digit(col % d, d));
            let mut st = JointIonState::hybrid(j, k, d);
            sim.execute(&mut st, &all)?;
            let trap = st.trap_excited_population();
            let back = -st.t;
            sim.free_evolve(&mut st, back)?;
            let h = st.hybrid_amps();
            let kept: f64 = h.iter().map(|z| z.norm_sqr()).sum();
            Ok((h, trap, (1.0 - kept).max(0.0)))
        })
        .collect::<Result<_>>()?;

    // Tr(G^dagger C^dagger M) with G = diag(e^{i phi}), C = bookkeeping.
    let trace: C64 = (0..dim)
        .map(|i| columns[i].0[i] * bookkeeping[i].conj() * C64::from_polar(1.0, -target[i]))
        .sum();
    let fidelity = trace.norm_sqr() / (dim * dim) as f64;
    let global = trace.arg();
    let per_branch_phase_error = (0..dim)
        .map(|i| {
            let z = columns[i].0[i] * bookkeeping[i].conj();
            wrap_angle(z.arg() - target[i] - global)
        })
        .collect();
    let max_trap_residual = columns.iter().map(|c| c.1).fold(0.0, f64::max);
    let max_leakage = columns.iter().map(|c| c.2).fold(0.0, f64::max);

    let mut warnings = sim.params.validate()?;
    warnings.extend(timing.warnings());
    if let VPulseModel::Finite { profile, .. } = &sim.v_model {
        if !profile.is_selective(&sim.spectrum) {
            warnings.push(format!(
                "V pulse duration {} is not shorter than T_K/d = {}",
                profile.duration,
                sim.spectrum.slot_time()
            ));
        }
    }
    let pass = fidelity > 1.0 - GATE_FIDELITY_TOL && max_trap_residual < TRAP_RESIDUAL_TOL;
    Ok(FidelityReport {
        d,
        l,
        m,
        convention: timing.convention,
        fidelity,
        per_branch_phase_error,
        max_leakage,
        max_trap_residual,
        timing_params: TimingReport {
            kepler_periods: timing.kepler_periods,
            aux_multiplicity: timing.aux_multiplicity,
            t_kepler: sim.spectrum.t_kepler,
            total_time: t_end,
            runs: schedules.len(),
        },
        spectrum_truncation: sim.spectrum.truncation,
        warnings,
        pass,
    })
}

/// `AmplitudeVector` view of the target ion's packets in one sector, for
/// inspection.
pub fn target_packets(
    state: &JointIonState,
    control: ControlLevel,
    trap: usize,
) -> AmplitudeVector {
    let d = state.d;
    AmplitudeVector {
        basis: Basis::WavePacket,
        amps: (0..d)
            .map(|k| state.amp(control, TargetLevel::Packet(offset_of_digit(k, d)), trap))
            .collect(),
        t0: state.t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::rk4;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sim(d: usize) -> TrapSimulator {
        TrapSimulator::new(
            RydbergSpectrum::new(50.0, d).unwrap(),
            TrapParams::default(),
        )
        .unwrap()
    }

    fn random_hybrid(d: usize, seed: u64) -> JointIonState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c: Vec<C64> = (0..d * d)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let n = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        c.iter_mut().for_each(|z| *z /= n);
        JointIonState::from_hybrid_amps(d, &c).unwrap()
    }

    fn strip_free(s: &TrapSimulator, st: &JointIonState) -> Vec<C64> {
        let mut st = st.clone();
        let back = -st.t;
        s.free_evolve(&mut st, back).unwrap();
        st.hybrid_amps()
    }

    #[test]
    fn detuning_examples() {
        let w = 2.0;
        assert!(solve_aux_detuning(PI, w, 1).unwrap().abs() < 1e-15);
        assert!((solve_aux_detuning(1.5 * PI, w, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((solve_aux_detuning(0.0, w, 1).unwrap() - 2.0).abs() < 1e-12);
        assert!((solve_aux_detuning(TAU, w, 1).unwrap() - 2.0).abs() < 1e-12);
        assert!(solve_aux_detuning(1.0, 0.0, 1).is_err());
        assert!(solve_aux_detuning(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn hybrid_phase_example() {
        assert!((hybrid_phase(1, 1, 0, 1, 3) + TAU / 9.0).abs() < 1e-15);
        assert!((hybrid_phase(-1, 1, 1, 2, 3) - TAU / 9.0).abs() < 1e-15);
    }

    #[test]
    fn aux_pulse_phase_matches_target_and_rk4() {
        let s = sim(3);
        let w = s.params.omega_ge;
        for i in 0..16 {
            let phi = -PI + TAU * i as f64 / 16.0;
            for n in [1, 2] {
                let det = solve_aux_detuning(phi, w, n).unwrap();
                let mut st = JointIonState::zero(3);
                st.t = 0.37 * s.spectrum.t_kepler;
                let g1 = st.index(ControlLevel::Ground, TargetLevel::Ground, 1);
                st.amps[g1] = C64::new(1.0, 0.0);
                s.apply_u_pulse(&mut st, Ion::M, UTransition::Aux, TAU * n as f64, det)
                    .unwrap();
                let z = st.amps[g1];
                assert!((z.norm() - 1.0).abs() < 1e-12);
                assert!(wrap_angle(z.arg() - phi).abs() < 1e-8, "phi {phi} n {n}");

                // Same pulse integrated directly in the simulator frame.
                let bare = (w * w - det * det).max(0.0).sqrt();
                let t0 = st.t;
                let tau = TAU * n as f64 / w;
                let mut y = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
                rk4(&mut y, t0, t0 + tau, 4000, |t, y, dy| {
                    let c = C64::from_polar(0.5 * bare, det * t);
                    dy[0] = -C64::i() * c * y[1];
                    dy[1] = -C64::i() * c.conj() * y[0];
                });
                assert!((y[0] - z).norm() < 1e-8, "rk4 {:?} vs {:?}", y[0], z);
            }
        }
    }

    #[test]
    fn v_pulse_leaves_trap_untouched() {
        let s = sim(4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut st = JointIonState::zero(4);
        for z in st.amps.iter_mut() {
            *z = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        let n = st.norm_sqr().sqrt();
        st.amps.iter_mut().for_each(|z| *z /= n);
        let before = st.trap_density();
        s.apply_v_pulse(&mut st, Ion::M, PI).unwrap();
        s.apply_v_pulse(&mut st, Ion::M, 0.7).unwrap();
        let after = st.trap_density();
        for a in 0..2 {
            for b in 0..2 {
                assert!((before[a][b] - after[a][b]).norm() < 1e-12);
            }
        }
        assert!(s.apply_v_pulse(&mut st, Ion::L, PI).is_err());
    }

    #[test]
    fn undefined_transitions_rejected() {
        let s = sim(3);
        let mut st = JointIonState::hybrid(0, 0, 3);
        assert!(s
            .apply_u_pulse(&mut st, Ion::L, UTransition::Aux, PI, 0.0)
            .is_err());
        assert!(s
            .apply_u_pulse(&mut st, Ion::M, UTransition::Level(0), PI, 0.0)
            .is_err());
        let w = s.params.omega_ge;
        let err = s.apply_u_pulse(&mut st, Ion::M, UTransition::Aux, TAU, 2.0 * w);
        assert!(matches!(err, Err(crate::Error::Domain(_))));
    }

    #[test]
    fn second_phonon_is_a_contract_error() {
        let s = sim(3);
        let mut st = JointIonState::zero(3);
        let idx = st.index(ControlLevel::Rydberg(1), TargetLevel::Ground, 1);
        st.amps[idx] = C64::new(1.0, 0.0);
        let err = s.apply_u_pulse(&mut st, Ion::L, UTransition::Level(1), PI, 0.0);
        assert!(matches!(err, Err(crate::Error::Contract(_))));
        let mut st = JointIonState::zero(3);
        let idx = st.index(ControlLevel::Ground, TargetLevel::Aux, 1);
        st.amps[idx] = C64::new(1.0, 0.0);
        let err = s.apply_u_pulse(&mut st, Ion::M, UTransition::Aux, TAU, 0.0);
        assert!(matches!(err, Err(crate::Error::Contract(_))));
    }

    #[test]
    fn single_run_is_selective_and_disentangles_trap() {
        for d in 2..=4 {
            let s = sim(d);
            let timing = ScheduleTiming::default();
            for (seed, (j, k)) in [
                (1u64, (0i64, 1i64)),
                (2, (1, 0)),
                (3, (-1 + d as i64 / 2, 1)),
            ] {
                let phi = 0.83;
                let mut st = random_hybrid(d, seed);
                let before = strip_free(&s, &st);
                s.run_phase_gate(&mut st, j, k, phi, &timing).unwrap();
                assert!(st.trap_excited_population() < 1e-20);
                let after = strip_free(&s, &st);
                let book = run_bookkeeping(d, j, k);
                let target = digit_of(j, d) * d + digit_of(k, d);
                for i in 0..d * d {
                    assert!((after[i].norm() - before[i].norm()).abs() < 1e-10);
                    let want = if i == target {
                        before[i] * C64::from_polar(1.0, phi)
                    } else {
                        before[i] * book[i]
                    };
                    assert!(
                        (after[i] - want).norm() < 1e-10,
                        "d {d} ({j},{k}) branch {i}"
                    );
                }
            }
        }
    }

    #[test]
    fn phases_add_over_runs() {
        let d = 3;
        let s = sim(d);
        let timing = ScheduleTiming::default();
        let mut st = random_hybrid(d, 9);
        let before = strip_free(&s, &st);
        let runs = [((1, 1), 0.4), ((1, 1), -1.3), ((0, -1), 2.0)];
        let mut want = before.clone();
        for &((j, k), phi) in &runs {
            s.run_phase_gate(&mut st, j, k, phi, &timing).unwrap();
            let book = run_bookkeeping(d, j, k);
            let target = digit_of(j, d) * d + digit_of(k, d);
            for (i, w) in want.iter_mut().enumerate() {
                *w *= if i == target {
                    C64::from_polar(1.0, phi)
                } else {
                    book[i]
                };
            }
        }
        let after = strip_free(&s, &st);
        for i in 0..d * d {
            assert!((after[i] - want[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn schedule_shape_and_timing() {
        let d = 3;
        let s = sim(d);
        let shape = RegisterShape::new(d, 2).unwrap();
        let timing = ScheduleTiming::default();
        let all = s.build_b_gate_schedule(0, 1, shape, &timing).unwrap();
        assert_eq!(all.len(), d * d);
        let slot = s.spectrum.slot_time();
        let tk = s.spectrum.t_kepler;
        let mut last = 0.0;
        for (r, steps) in all.iter().enumerate() {
            let k = level_offsets(d)[r % d];
            assert_eq!(steps.len(), 5);
            let t1 = steps[0].time;
            assert!(t1 >= last - 1e-9 * tk);
            let sidx = (t1 / slot).round() as i64;
            assert_eq!((sidx + k).rem_euclid(d as i64), 0);
            for (i, f) in [0.0, 0.25, 0.5, 0.75, 1.0].iter().enumerate() {
                assert!((steps[i].time - t1 - f * tk).abs() < 1e-9 * tk);
            }
            last = steps[4].time;
        }
        // d = 3, (j, k) = (1, 1): phi = -2 pi / 9.
        let s11 = &all[2 * d + 2];
        let det = solve_aux_detuning(-TAU / 9.0, s.params.omega_ge, 1).unwrap();
        assert!((s11[2].detuning - det).abs() < 1e-20);
        assert!(s.build_b_gate_schedule(1, 1, shape, &timing).is_err());
        assert!(s.build_b_gate_schedule(0, 2, shape, &timing).is_err());
    }

    #[test]
    fn gate_fidelity_ideal() {
        for d in 2..=4 {
            let s = sim(d);
            let shape = RegisterShape::new(d, 2).unwrap();
            for conv in [
                PhaseConvention::HybridOffsets,
                PhaseConvention::LogicalDigits,
            ] {
                let timing = ScheduleTiming {
                    convention: conv,
                    ..Default::default()
                };
                let r = verify_hybrid_gate(&s, shape, 0, 1, &timing).unwrap();
                assert!(r.pass, "d {d} {conv:?}: {r:?}");
                assert!(r.per_branch_phase_error.iter().all(|e| e.abs() < 1e-9));
            }
        }
    }

    #[test]
    fn bookkeeping_cancels_over_full_gate() {
        for d in 2..=5 {
            let mut acc = vec![C64::new(1.0, 0.0); d * d];
            for j in level_offsets(d) {
                for k in level_offsets(d) {
                    for (a, b) in acc.iter_mut().zip(run_bookkeeping(d, j, k)) {
                        *a *= b;
                    }
                }
            }
            assert!(acc.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
        }
    }

    #[test]
    fn revival_and_fractional_timing_degrade_fidelity() {
        let d = 3;
        let shape = RegisterShape::new(d, 2).unwrap();
        let spec = RydbergSpectrum::new(50.0, d)
            .unwrap()
            .with_revival_time(40.0 * RydbergSpectrum::new(50.0, d).unwrap().t_kepler)
            .unwrap()
            .with_truncation(Truncation::ThroughRevival)
            .unwrap();
        let s = TrapSimulator::new(spec, TrapParams::default()).unwrap();
        let r = verify_hybrid_gate(&s, shape, 0, 1, &ScheduleTiming::default()).unwrap();
        assert!(r.fidelity < 1.0 - 1e-6);
        assert!(!r.pass);

        let s = sim(d);
        let timing = ScheduleTiming {
            kepler_periods: 1.1,
            ..Default::default()
        };
        let r = verify_hybrid_gate(&s, shape, 0, 1, &timing).unwrap();
        assert!(!r.warnings.is_empty());
        assert!(r.fidelity < 1.0 - 1e-6);
    }

    #[test]
    fn finite_v_pulses_approach_ideal() {
        let d = 3;
        let shape = RegisterShape::new(d, 2).unwrap();
        let s = sim(d);
        let couplings = RabiCouplings::uniform(d, 1.0).unwrap();
        let mut last = f64::INFINITY;
        for frac in [1e-2, 1e-3] {
            let profile = PulseProfile::square(frac * s.spectrum.slot_time(), PI);
            let fs = s
                .clone()
                .with_v_model(VPulseModel::Finite {
                    profile,
                    couplings: couplings.clone(),
                })
                .unwrap();
            let r = verify_hybrid_gate(&fs, shape, 0, 1, &ScheduleTiming::default()).unwrap();
            let infid = 1.0 - r.fidelity;
            assert!(infid < last);
            last = infid;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn lamb_dicke_warning() {
        let p = TrapParams {
            eta: 0.5,
            ..Default::default()
        };
        assert_eq!(p.validate().unwrap().len(), 1);
        assert!(TrapParams {
            q_ions: 1,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
