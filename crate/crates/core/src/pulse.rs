// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

//! Broadband-pulse dynamics between the ground state `|g>` and the Rydberg
//! manifold.
//!
//! A pulse short compared with `T_K / d` only sees the wave packet at the
//! core, `|0>_tau`, and the atom reduces to the two-level system
//!
//! ```text
//! db_g/dt  = (i/2) f(t) W0 exp(-i D0 t) b_0
//! db_0/dt  = (i/2) f(t) W0 exp(+i D0 t) b_g
//! ```
//!
//! with `W0 = d^{-1/2} sum_j W_gj` the collective Rabi frequency and `D0`
//! the detuning from the mean level. [`selectivity_error`] integrates the
//! full `d+1` level problem, with every level keeping its own free phase, and
//! reports how far it lands from that two-level picture.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};
use crate::ode::{rk4, rk4_observed};
use crate::wavepacket::{
    offset_of_digit, to_energy, to_wave_packet, AmplitudeVector, Basis, RydbergSpectrum,
};
use crate::C64;

/// Integration steps required per Rabi (or detuning) cycle.
pub const STEPS_PER_CYCLE: f64 = 200.0;
const MIN_STEPS: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseShape {
    #[default]
    Square,
    /// Gaussian centered in the window, `sigma = duration / 6`, truncated at
    /// the window edges.
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseProfile {
    pub shape: PulseShape,
    pub duration: f64,
    /// Target area `W0 * integral f(t) dt`, radians.
    pub area: f64,
    pub center_detuning: f64,
}

impl PulseProfile {
    pub fn square(duration: f64, area: f64) -> Self {
        Self {
            shape: PulseShape::Square,
            duration,
            area,
            center_detuning: 0.0,
        }
    }

    pub fn gaussian(duration: f64, area: f64) -> Self {
        Self {
            shape: PulseShape::Gaussian,
            ..Self::square(duration, area)
        }
    }

    pub fn with_detuning(mut self, center_detuning: f64) -> Self {
        self.center_detuning = center_detuning;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(domain!(
                "pulse duration must be positive, got {}",
                self.duration
            ));
        }
        if !self.area.is_finite() || !self.center_detuning.is_finite() {
            return Err(domain!("pulse area and detuning must be finite"));
        }
        Ok(())
    }

    /// Whether the pulse is shorter than one wave-packet slot, `T_K / d`.
    pub fn is_selective(&self, spectrum: &RydbergSpectrum) -> bool {
        self.duration < spectrum.slot_time()
    }

    /// `W0 f(t)` at pulse-local time `t in [0, duration]`: the envelope scaled
    /// so that it integrates to `area`.
    pub fn drive(&self, t: f64) -> f64 {
        let slack = 1e-12 * self.duration;
        if !(-slack..=self.duration + slack).contains(&t) {
            return 0.0;
        }
        match self.shape {
            PulseShape::Square => self.area / self.duration,
            PulseShape::Gaussian => {
                let sigma = self.duration / 6.0;
                let x = (t - 0.5 * self.duration) / sigma;
                self.area * (-0.5 * x * x).exp() / gaussian_window_integral(self.duration)
            }
        }
    }

    /// Closed-form propagator of the frozen two-level problem for a resonant
    /// square pulse, applied to `(b_g, b_0)`.
    pub fn square_resonant_rotation(&self, b_g: C64, b_0: C64) -> (C64, C64) {
        let (s, c) = (0.5 * self.area).sin_cos();
        let i = C64::i();
        (b_g * c + i * b_0 * s, b_0 * c + i * b_g * s)
    }
}

/// `integral_0^T exp(-(t - T/2)^2 / (2 sigma^2)) dt` with `sigma = T/6`,
/// by composite Simpson.
fn gaussian_window_integral(duration: f64) -> f64 {
    let n = 4000;
    let h = duration / n as f64;
    let sigma = duration / 6.0;
    let g = |t: f64| {
        let x = (t - 0.5 * duration) / sigma;
        (-0.5 * x * x).exp()
    };
    let mut s = g(0.0) + g(duration);
    for i in 1..n {
        s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RabiCouplings {
    pub omega_gj: Vec<f64>,
    pub omega_tilde_0: f64,
}

impl RabiCouplings {
    /// Couplings indexed by level digit.
    pub fn new(omega_gj: Vec<f64>) -> Result<Self> {
        if omega_gj.is_empty() {
            return Err(domain!("need at least one Rabi frequency"));
        }
        let omega_tilde_0 = collective_rabi(&omega_gj);
        if omega_tilde_0 == 0.0 {
            return Err(domain!("collective Rabi frequency vanishes"));
        }
        Ok(Self {
            omega_gj,
            omega_tilde_0,
        })
    }

    pub fn uniform(d: usize, omega: f64) -> Result<Self> {
        Self::new(vec![omega; d])
    }

    pub fn d(&self) -> usize {
        self.omega_gj.len()
    }
}

/// `d^{-1/2} sum_j W_gj`.
pub fn collective_rabi(omega_gj: &[f64]) -> f64 {
    omega_gj.iter().sum::<f64>() / (omega_gj.len() as f64).sqrt()
}

/// Ground amplitude plus the Rydberg amplitudes in the wave-packet basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomState {
    pub b_g: C64,
    pub wp: AmplitudeVector,
}

impl AtomState {
    /// All population in wave packet `k`.
    pub fn in_wave_packet(k: i64, d: usize) -> Self {
        Self {
            b_g: C64::new(0.0, 0.0),
            wp: AmplitudeVector::wave_packet(k, d),
        }
    }

    pub fn in_ground(d: usize) -> Self {
        Self {
            b_g: C64::new(1.0, 0.0),
            wp: AmplitudeVector {
                basis: Basis::WavePacket,
                amps: vec![C64::new(0.0, 0.0); d],
                t0: 0.0,
            },
        }
    }

    pub fn new(b_g: C64, wp: AmplitudeVector) -> Result<Self> {
        let wp = crate::wavepacket::change_basis(&wp, Basis::WavePacket);
        let s = Self { b_g, wp };
        if (s.norm_sqr() - 1.0).abs() > crate::tol::EPS_STATE {
            return Err(domain!("atom state is not normalized: {}", s.norm_sqr()));
        }
        Ok(s)
    }

    pub fn d(&self) -> usize {
        self.wp.d()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.b_g.norm_sqr() + self.wp.amps.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// `b_0`, the amplitude of the packet at the core.
    pub fn core(&self) -> C64 {
        self.wp.amps[0]
    }

    fn as_vec(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.d() + 1);
        v.push(self.b_g);
        v.extend_from_slice(&self.wp.amps);
        v
    }

    fn from_vec(v: &[C64], t0: f64) -> Self {
        Self {
            b_g: v[0],
            wp: AmplitudeVector {
                basis: Basis::WavePacket,
                amps: v[1..].to_vec(),
                t0,
            },
        }
    }

    pub fn inner(&self, other: &AtomState) -> C64 {
        self.as_vec()
            .iter()
            .zip(other.as_vec())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

fn steps_for_phase(total_phase: f64) -> usize {
    ((STEPS_PER_CYCLE * total_phase.abs() / TAU).ceil() as usize).max(MIN_STEPS)
}

/// Smallest step count accepted by [`integrate_two_level_steps`].
pub fn min_two_level_steps(pulse: &PulseProfile) -> usize {
    steps_for_phase(pulse.area.abs() + pulse.center_detuning.abs() * pulse.duration)
}

fn check_couplings(state_d: usize, couplings: &RabiCouplings) -> Result<()> {
    if couplings.d() != state_d {
        return Err(domain!(
            "{} couplings for a {state_d}-level atom",
            couplings.d()
        ));
    }
    Ok(())
}

/// Integrates the frozen two-level problem with twice the minimum step count.
pub fn integrate_two_level(
    state: &AtomState,
    pulse: &PulseProfile,
    couplings: &RabiCouplings,
) -> Result<AtomState> {
    integrate_two_level_steps(state, pulse, couplings, 2 * min_two_level_steps(pulse))
}

pub fn integrate_two_level_steps(
    state: &AtomState,
    pulse: &PulseProfile,
    couplings: &RabiCouplings,
    steps: usize,
) -> Result<AtomState> {
    integrate_two_level_observed(state, pulse, couplings, steps, |_, _, _| {})
}

/// As [`integrate_two_level_steps`], reporting `(t, b_g, b_0)` after every
/// step. The other wave-packet amplitudes stay frozen.
pub fn integrate_two_level_observed<O>(
    state: &AtomState,
    pulse: &PulseProfile,
    couplings: &RabiCouplings,
    steps: usize,
    mut observe: O,
) -> Result<AtomState>
where
    O: FnMut(f64, C64, C64),
{
    pulse.validate()?;
    check_couplings(state.d(), couplings)?;
    let need = min_two_level_steps(pulse);
    if steps < need {
        return Err(config!(
            "{steps} steps cannot resolve this pulse, need at least {need}"
        ));
    }
    let half_i = C64::new(0.0, 0.5);
    let det = pulse.center_detuning;
    let mut y = [state.b_g, state.core()];
    rk4_observed(
        &mut y,
        0.0,
        pulse.duration,
        steps,
        |t, y, dy| {
            let drive = pulse.drive(t);
            let ph = C64::from_polar(1.0, det * t);
            dy[0] = half_i * drive * ph.conj() * y[1];
            dy[1] = half_i * drive * ph * y[0];
        },
        |t, y| observe(t, y[0], y[1]),
    );
    let mut out = state.clone();
    out.b_g = y[0];
    out.wp.amps[0] = y[1];
    Ok(out)
}

/// Smallest step count used for the full `d+1` level problem.
pub fn min_full_steps(spectrum: &RydbergSpectrum, pulse: &PulseProfile) -> usize {
    let fastest = (0..spectrum.d)
        .map(|digit| {
            spectrum
                .omega_offset(offset_of_digit(digit, spectrum.d))
                .abs()
        })
        .fold(0.0, f64::max);
    steps_for_phase(pulse.area.abs() + (pulse.center_detuning.abs() + fastest) * pulse.duration)
}

/// Propagates `state`, given at the pulse center, through the full `d+1`
/// level problem and maps the result back to the pulse center with the free
/// Rydberg evolution. An impulsive pulse therefore reproduces the two-level
/// rotation exactly.
pub fn integrate_full(
    state: &AtomState,
    spectrum: &RydbergSpectrum,
    pulse: &PulseProfile,
    couplings: &RabiCouplings,
    steps: usize,
) -> Result<AtomState> {
    pulse.validate()?;
    spectrum.validate()?;
    check_couplings(state.d(), couplings)?;
    if spectrum.d != state.d() {
        return Err(domain!(
            "spectrum has {} levels, atom {}",
            spectrum.d,
            state.d()
        ));
    }
    let need = min_full_steps(spectrum, pulse);
    if steps < need {
        return Err(config!(
            "{steps} steps cannot resolve this pulse, need at least {need}"
        ));
    }
    let d = state.d();
    let half = 0.5 * pulse.duration;
    let omega: Vec<f64> = (0..d)
        .map(|digit| spectrum.omega_offset(offset_of_digit(digit, d)))
        .collect();
    let scale: Vec<f64> = couplings
        .omega_gj
        .iter()
        .map(|w| w / couplings.omega_tilde_0)
        .collect();

    // Back from the pulse center to the pulse start.
    let mut y = Vec::with_capacity(d + 1);
    y.push(state.b_g);
    y.extend(
        to_energy(&state.wp.amps)
            .into_iter()
            .zip(&omega)
            .map(|(e, w)| e * C64::from_polar(1.0, w * half)),
    );

    let half_i = C64::new(0.0, 0.5);
    let det = pulse.center_detuning;
    rk4(&mut y, 0.0, pulse.duration, steps, |t, y, dy| {
        let drive = pulse.drive(t);
        let ph = C64::from_polar(1.0, det * t);
        let coupled: C64 = y[1..].iter().zip(&scale).map(|(e, s)| e * s).sum();
        dy[0] = half_i * drive * ph.conj() * coupled;
        for j in 0..d {
            dy[j + 1] = C64::new(0.0, -omega[j]) * y[j + 1] + half_i * drive * scale[j] * ph * y[0];
        }
    });

    // Undo the free evolution of the second half.
    let energy: Vec<C64> = y[1..]
        .iter()
        .zip(&omega)
        .map(|(e, w)| e * C64::from_polar(1.0, w * half))
        .collect();
    let mut out = AtomState::from_vec(&y[..1], state.wp.t0);
    out.wp.amps = to_wave_packet(&energy);
    Ok(out)
}

/// Default probe for [`selectivity_error`]: all population in the packet
/// at the core.
pub fn selectivity_probe(d: usize) -> AtomState {
    AtomState::in_wave_packet(0, d)
}

/// `1 - |<ideal|full>|^2` on the default probe, where `ideal` is the frozen
/// two-level result.
pub fn selectivity_error(
    spectrum: &RydbergSpectrum,
    pulse: &PulseProfile,
    couplings: &RabiCouplings,
) -> Result<f64> {
    selectivity_error_for(&selectivity_probe(spectrum.d), spectrum, pulse, couplings)
}

pub fn selectivity_error_for(
    state: &AtomState,
    spectrum: &RydbergSpectrum,
    pulse: &PulseProfile,
    couplings: &RabiCouplings,
) -> Result<f64> {
    let ideal = integrate_two_level(state, pulse, couplings)?;
    let steps = 2 * min_full_steps(spectrum, pulse).max(min_two_level_steps(pulse));
    let full = integrate_full(state, spectrum, pulse, couplings, steps)?;
    Ok((1.0 - ideal.inner(&full).norm_sqr()).max(0.0))
}
