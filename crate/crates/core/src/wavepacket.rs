// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

//! Rydberg energy levels and their Fourier-dual wave-packet basis.
//!
//! A qudit lives on `d` levels `|j>_nu = |n_bar + j>`, with offsets
//! `j in {-d/2+1, ..., d/2}` for even `d` and `{-(d-1)/2, ..., (d-1)/2}` for
//! odd `d`. The wave-packet states
//!
//! ```text
//! |k>_tau = d^{-1/2} sum_j exp(-i 2 pi j k / d) |j>_nu
//! ```
//!
//! are localized at `d` equally spaced instants of one Kepler orbit.
//!
//! Amplitude vectors are stored by *digit*, `digit(j) = j mod d`. Every
//! exponential above depends on its indices only modulo `d`, so the digit
//! layout carries all phases exactly.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::tol;
use crate::C64;

/// Order at which the level-frequency Taylor series is cut.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Truncation {
    /// Linear term only: pure Kepler cycling.
    #[default]
    KeplerOnly,
    /// Adds the quadratic (revival) term.
    ThroughRevival,
    /// Adds the cubic (super-revival) term.
    ThroughSuperRevival,
}

/// Level frequencies relative to the mean level,
///
/// ```text
/// w_j - w_0 = 2 pi [ j/T_K - j^2/(2 T_rev) + j^3/(6 T_sr) ]
/// ```
///
/// with the Kepler period `T_K = 2 pi n_bar^3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RydbergSpectrum {
    pub n_bar: f64,
    pub d: usize,
    pub t_kepler: f64,
    pub t_rev: Option<f64>,
    pub t_sr: Option<f64>,
    pub truncation: Truncation,
}

impl RydbergSpectrum {
    /// Kepler-only spectrum around an integer `n_bar`.
    pub fn new(n_bar: f64, d: usize) -> Result<Self> {
        if n_bar.fract() != 0.0 {
            return Err(domain!(
                "n_bar = {n_bar} is not an integer; use with_fractional_n_bar"
            ));
        }
        Self::with_fractional_n_bar(n_bar, d)
    }

    pub fn with_fractional_n_bar(n_bar: f64, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(domain!("need at least two levels, got d = {d}"));
        }
        if !(n_bar.is_finite() && n_bar > 0.0) {
            return Err(domain!("n_bar must be positive, got {n_bar}"));
        }
        if (d as f64) / 2.0 >= n_bar {
            return Err(domain!("d = {d} levels do not fit below n_bar = {n_bar}"));
        }
        Ok(Self {
            n_bar,
            d,
            t_kepler: TAU * n_bar.powi(3),
            t_rev: None,
            t_sr: None,
            truncation: Truncation::KeplerOnly,
        })
    }

    pub fn with_revival_time(mut self, t_rev: f64) -> Result<Self> {
        if !(t_rev.is_finite() && t_rev > 0.0) {
            return Err(domain!("revival time must be positive, got {t_rev}"));
        }
        self.t_rev = Some(t_rev);
        Ok(self)
    }

    pub fn with_super_revival_time(mut self, t_sr: f64) -> Result<Self> {
        if !(t_sr.is_finite() && t_sr > 0.0) {
            return Err(domain!("super-revival time must be positive, got {t_sr}"));
        }
        self.t_sr = Some(t_sr);
        Ok(self)
    }

    /// Selects the truncation order; the times it needs must already be set.
    pub fn with_truncation(mut self, truncation: Truncation) -> Result<Self> {
        self.truncation = truncation;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let needs_rev = self.truncation != Truncation::KeplerOnly;
        let needs_sr = self.truncation == Truncation::ThroughSuperRevival;
        if needs_rev && self.t_rev.is_none() {
            return Err(domain!("{:?} needs a revival time", self.truncation));
        }
        if needs_sr && self.t_sr.is_none() {
            return Err(domain!("{:?} needs a super-revival time", self.truncation));
        }
        Ok(())
    }

    /// `w_j - w_0` for level offset `j`, honoring the truncation.
    pub fn omega_offset(&self, j: i64) -> f64 {
        let j = j as f64;
        let mut turns_per_time = j / self.t_kepler;
        if self.truncation != Truncation::KeplerOnly {
            if let Some(t_rev) = self.t_rev {
                turns_per_time -= j * j / (2.0 * t_rev);
            }
        }
        if self.truncation == Truncation::ThroughSuperRevival {
            if let Some(t_sr) = self.t_sr {
                turns_per_time += j * j * j / (6.0 * t_sr);
            }
        }
        TAU * turns_per_time
    }

    /// Free-evolution phase factors `exp(-i (w_j - w_0) dt)`, by digit.
    pub fn phase_factors(&self, dt: f64) -> Vec<C64> {
        (0..self.d)
            .map(|digit| {
                let j = offset_of_digit(digit, self.d);
                C64::from_polar(1.0, -self.omega_offset(j) * dt)
            })
            .collect()
    }

    /// Time for the wave packet to advance one slot, `T_K / d`.
    pub fn slot_time(&self) -> f64 {
        self.t_kepler / self.d as f64
    }
}

/// The `d` level offsets, in ascending order.
pub fn level_offsets(d: usize) -> Vec<i64> {
    let d = d as i64;
    let lo = if d % 2 == 0 { -d / 2 + 1 } else { -(d - 1) / 2 };
    (lo..lo + d).collect()
}

/// `j mod d`.
pub fn digit_of(j: i64, d: usize) -> usize {
    j.rem_euclid(d as i64) as usize
}

/// The level offset whose digit is `digit`.
pub fn offset_of_digit(digit: usize, d: usize) -> i64 {
    let offs = level_offsets(d);
    let lo = offs[0];
    let j = digit as i64;
    if j >= lo + d as i64 || j < lo {
        j - d as i64
    } else {
        j
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    Energy,
    WavePacket,
}

/// Slowly varying amplitudes of a `d`-level Rydberg state in one of the two
/// bases, indexed by digit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeVector {
    pub basis: Basis,
    pub amps: Vec<C64>,
    /// Reference time of the amplitudes.
    pub t0: f64,
}

impl AmplitudeVector {
    pub fn new(basis: Basis, amps: Vec<C64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(domain!("need at least two amplitudes"));
        }
        let norm_sqr: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > tol::EPS_STATE {
            return Err(domain!("amplitudes are not normalized: {norm_sqr}"));
        }
        Ok(Self {
            basis,
            amps,
            t0: 0.0,
        })
    }

    /// Energy eigenstate `|j>_nu`.
    pub fn energy_level(j: i64, d: usize) -> Self {
        Self::unit(Basis::Energy, digit_of(j, d), d)
    }

    /// Wave-packet state `|k>_tau`.
    pub fn wave_packet(k: i64, d: usize) -> Self {
        Self::unit(Basis::WavePacket, digit_of(k, d), d)
    }

    fn unit(basis: Basis, digit: usize, d: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); d];
        amps[digit] = C64::new(1.0, 0.0);
        Self {
            basis,
            amps,
            t0: 0.0,
        }
    }

    pub fn d(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Amplitude of offset `j` (energy) or `k` (wave packet).
    pub fn amp(&self, offset: i64) -> C64 {
        self.amps[digit_of(offset, self.d())]
    }

    pub fn inner(&self, other: &AmplitudeVector) -> C64 {
        let other = change_basis(other, self.basis);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Column `k` holds the energy amplitudes of `|k>_tau`:
/// `W[j][k] = d^{-1/2} exp(-i 2 pi j k / d)`.
pub fn wavepacket_basis_matrix(d: usize) -> Vec<Vec<C64>> {
    let w = 1.0 / (d as f64).sqrt();
    (0..d)
        .map(|j| {
            (0..d)
                .map(|k| C64::from_polar(w, -TAU * ((j * k) % d) as f64 / d as f64))
                .collect()
        })
        .collect()
}

/// Energy amplitudes from wave-packet amplitudes (`e = W b`).
pub fn to_energy(wp: &[C64]) -> Vec<C64> {
    let w = wavepacket_basis_matrix(wp.len());
    w.iter()
        .map(|row| row.iter().zip(wp).map(|(a, b)| a * b).sum())
        .collect()
}

/// Wave-packet amplitudes from energy amplitudes (`b = W^dagger e`).
pub fn to_wave_packet(energy: &[C64]) -> Vec<C64> {
    let d = energy.len();
    let w = wavepacket_basis_matrix(d);
    (0..d)
        .map(|k| (0..d).map(|j| w[j][k].conj() * energy[j]).sum())
        .collect()
}

pub fn change_basis(v: &AmplitudeVector, to: Basis) -> AmplitudeVector {
    let amps = match (v.basis, to) {
        (a, b) if a == b => v.amps.clone(),
        (Basis::WavePacket, Basis::Energy) => to_energy(&v.amps),
        (Basis::Energy, Basis::WavePacket) => to_wave_packet(&v.amps),
        _ => unreachable!(),
    };
    AmplitudeVector {
        basis: to,
        amps,
        t0: v.t0,
    }
}

/// Free evolution over `dt` in the frame rotating at the mean level
/// frequency. The result is returned in the input's basis.
pub fn free_evolve(
    v: &AmplitudeVector,
    spectrum: &RydbergSpectrum,
    dt: f64,
) -> Result<AmplitudeVector> {
    if dt < 0.0 {
        return Err(domain!("free evolution needs dt >= 0, got {dt}"));
    }
    if v.d() != spectrum.d {
        return Err(domain!(
            "vector has {} levels, spectrum {}",
            v.d(),
            spectrum.d
        ));
    }
    if dt == 0.0 {
        return Ok(v.clone());
    }
    let mut e = change_basis(v, Basis::Energy);
    for (z, ph) in e.amps.iter_mut().zip(spectrum.phase_factors(dt)) {
        *z *= ph;
    }
    e.t0 += dt;
    Ok(change_basis(&e, v.basis))
}

/// `|<v_Kepler(dt) | v_revival(dt)>|^2`: how far the quadratic term has
/// pulled the state away from pure Kepler cycling.
pub fn dispersion_fidelity(
    v: &AmplitudeVector,
    spectrum: &RydbergSpectrum,
    dt: f64,
) -> Result<f64> {
    let mut kepler = spectrum.clone();
    kepler.truncation = Truncation::KeplerOnly;
    let revival = spectrum
        .clone()
        .with_truncation(Truncation::ThroughRevival)?;
    let a = free_evolve(v, &kepler, dt)?;
    let b = free_evolve(v, &revival, dt)?;
    Ok(a.inner(&b).norm_sqr().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::fourier_matrix;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn max_unitarity_defect(w: &[Vec<C64>]) -> f64 {
        let d = w.len();
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                let dot: C64 = (0..d).map(|j| w[j][a].conj() * w[j][b]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).norm());
            }
        }
        worst
    }

    #[test]
    fn level_sets() {
        assert_eq!(level_offsets(4), vec![-1, 0, 1, 2]);
        assert_eq!(level_offsets(2), vec![0, 1]);
        assert_eq!(level_offsets(5), vec![-2, -1, 0, 1, 2]);
        for d in 2..20 {
            let offs = level_offsets(d);
            assert_eq!(offs.len(), d);
            let mut digits: Vec<_> = offs.iter().map(|&j| digit_of(j, d)).collect();
            digits.sort();
            assert_eq!(digits, (0..d).collect::<Vec<_>>());
            for &j in &offs {
                assert_eq!(offset_of_digit(digit_of(j, d), d), j);
            }
        }
    }

    #[test]
    fn basis_matrix_examples() {
        let w = wavepacket_basis_matrix(2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let want = [[s, s], [s, -s]];
        for j in 0..2 {
            for k in 0..2 {
                assert!((w[j][k] - c(want[j][k], 0.0)).norm() < 1e-15);
            }
        }
        assert!(max_unitarity_defect(&wavepacket_basis_matrix(16)) < 1e-12);
        // j = 1, k = 1, d = 4: exp(-i pi/2) / 2
        let w4 = wavepacket_basis_matrix(4);
        assert!((w4[1][1] * 2.0 - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn change_basis_examples() {
        for d in [2, 3, 8] {
            let e0 = AmplitudeVector::energy_level(0, d);
            let wp = change_basis(&e0, Basis::WavePacket);
            let w = 1.0 / (d as f64).sqrt();
            for z in &wp.amps {
                assert!((z - c(w, 0.0)).norm() < 1e-15);
            }
        }
        let amps =
            crate::QuditState::random(crate::RegisterShape::new(7, 1).unwrap(), 5).into_amps();
        let v = AmplitudeVector::new(Basis::Energy, amps).unwrap();
        let back = change_basis(&change_basis(&v, Basis::WavePacket), Basis::Energy);
        for (a, b) in v.amps.iter().zip(&back.amps) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn fourier_gate_lands_on_reflected_packet() {
        for d in 2..=16 {
            let kernel = fourier_matrix(d);
            for j in level_offsets(d) {
                let jd = digit_of(j, d);
                let out: Vec<C64> = (0..d).map(|b| kernel[b][jd]).collect();
                let wp = to_wave_packet(&out);
                let target = digit_of(-j, d);
                for (k, z) in wp.iter().enumerate() {
                    if k == target {
                        assert!((z.norm() - 1.0).abs() < 1e-12);
                        assert!((z - c(1.0, 0.0)).norm() < 1e-12);
                    } else {
                        assert!(z.norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn kepler_cycling_permutes_amplitudes() {
        let sp = RydbergSpectrum::new(40.0, 6).unwrap();
        let amps =
            crate::QuditState::random(crate::RegisterShape::new(6, 1).unwrap(), 1).into_amps();
        let v = AmplitudeVector::new(Basis::WavePacket, amps).unwrap();
        assert_eq!(free_evolve(&v, &sp, 0.0).unwrap().amps, v.amps);
        for m in 0..=12 {
            let out = free_evolve(&v, &sp, m as f64 * sp.slot_time()).unwrap();
            for k in 0..6 {
                let src = (k + 6 * 3 - m) % 6;
                assert!((out.amps[k] - v.amps[src]).norm() < 1e-12, "m={m} k={k}");
            }
        }
        let full = free_evolve(&v, &sp, sp.t_kepler).unwrap();
        for (a, b) in full.amps.iter().zip(&v.amps) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(free_evolve(&v, &sp, -1.0).is_err());
    }

    #[test]
    fn spectrum_validation() {
        assert!(RydbergSpectrum::new(40.5, 4).is_err());
        assert!(RydbergSpectrum::with_fractional_n_bar(40.5, 4).is_ok());
        assert!(RydbergSpectrum::new(40.0, 1).is_err());
        assert!(RydbergSpectrum::new(2.0, 8).is_err());
        let sp = RydbergSpectrum::new(40.0, 4).unwrap();
        assert!((sp.t_kepler - TAU * 64000.0).abs() < 1e-6);
        assert!(sp
            .clone()
            .with_truncation(Truncation::ThroughRevival)
            .is_err());
        let sp = sp.with_revival_time(1e7).unwrap();
        assert!(sp
            .clone()
            .with_truncation(Truncation::ThroughSuperRevival)
            .is_err());
        let sp = sp
            .with_super_revival_time(1e9)
            .unwrap()
            .with_truncation(Truncation::ThroughSuperRevival)
            .unwrap();
        let j = 2.0;
        let want = TAU * (j / sp.t_kepler - j * j / 2e7 + j * j * j / 6e9);
        assert!((sp.omega_offset(2) - want).abs() < 1e-18);
    }

    /// Independent closed form: both evolutions share the Kepler phase, so
    /// the overlap is `|sum_j p_j exp(i pi j^2 dt / T_rev)|^2`.
    fn dispersion_oracle(v: &AmplitudeVector, t_rev: f64, dt: f64) -> f64 {
        let e = change_basis(v, Basis::Energy);
        let d = v.d();
        let s: C64 = (0..d)
            .map(|digit| {
                let j = offset_of_digit(digit, d) as f64;
                C64::from_polar(
                    e.amps[digit].norm_sqr(),
                    std::f64::consts::PI * j * j * dt / t_rev,
                )
            })
            .sum();
        s.norm_sqr()
    }

    #[test]
    fn dispersion_fidelity_values() {
        let t_rev = 3.0e7;
        for d in [4, 5, 8] {
            let sp = RydbergSpectrum::new(40.0, d)
                .unwrap()
                .with_revival_time(t_rev)
                .unwrap();
            let v = AmplitudeVector::wave_packet(0, d);
            assert!((dispersion_fidelity(&v, &sp, 0.0).unwrap() - 1.0).abs() < 1e-14);
            // At T_rev every level picks up (-1)^j: the packet sits half an
            // orbit away from the Kepler-only one.
            let at_rev = dispersion_fidelity(&v, &sp, t_rev).unwrap();
            let want = if d % 2 == 0 {
                0.0
            } else {
                1.0 / (d * d) as f64
            };
            assert!((at_rev - want).abs() < 1e-12, "d={d} {at_rev}");
            let at_two = dispersion_fidelity(&v, &sp, 2.0 * t_rev).unwrap();
            assert!((at_two - 1.0).abs() < 1e-12);
            for i in 1..=8 {
                let dt = i as f64 * sp.t_kepler * d as f64 / 4.0;
                let got = dispersion_fidelity(&v, &sp, dt).unwrap();
                assert!((got - dispersion_oracle(&v, t_rev, dt)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dispersion_decays_over_a_few_orbits() {
        let d = 8;
        let sp = RydbergSpectrum::new(40.0, d)
            .unwrap()
            .with_revival_time(40.0 * TAU * 64000.0)
            .unwrap();
        let v = AmplitudeVector::wave_packet(0, d);
        let curve: Vec<f64> = (0..=8)
            .map(|i| dispersion_fidelity(&v, &sp, i as f64 * sp.t_kepler).unwrap())
            .collect();
        // Monotone over the first few orbits, then small and fluctuating.
        for w in curve[..7].windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{curve:?}");
        }
        assert!(curve[4..].iter().all(|&f| f < 0.15), "{curve:?}");
    }
}
