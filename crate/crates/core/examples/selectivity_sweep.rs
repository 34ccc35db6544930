// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

//! Leakage of a broadband pi pulse out of the two-level picture as the pulse
//! gets shorter than `T_K / d`.

use std::f64::consts::PI;

use quditfft::pulse::{selectivity_error, PulseProfile, RabiCouplings};
use quditfft::wavepacket::RydbergSpectrum;

fn main() -> quditfft::Result<()> {
    for d in [3, 6] {
        let spectrum = RydbergSpectrum::new(30.0, d)?;
        let couplings = RabiCouplings::uniform(d, 1.0)?;
        println!("d = {d}");
        for frac in [1.0, 0.5, 1.0 / d as f64, 0.25 / d as f64, 0.01 / d as f64] {
            let pulse = PulseProfile::gaussian(frac * spectrum.t_kepler, PI);
            let e = selectivity_error(&spectrum, &pulse, &couplings)?;
            println!("  duration {frac:.4} T_K  leakage {e:.3e}");
        }
    }
    Ok(())
}
