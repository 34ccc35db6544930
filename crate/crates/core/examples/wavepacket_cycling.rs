// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

//! A wave packet steps one slot per `T_K / d`; with the revival term on it
//! slowly spreads.

use quditfft::wavepacket::{
    dispersion_fidelity, free_evolve, AmplitudeVector, RydbergSpectrum, Truncation,
};

fn main() -> quditfft::Result<()> {
    let d = 6;
    let kepler = RydbergSpectrum::new(40.0, d)?;
    let packet = AmplitudeVector::wave_packet(0, d);
    for m in 0..=d {
        let v = free_evolve(&packet, &kepler, m as f64 * kepler.slot_time())?;
        let row: Vec<String> = v
            .amps
            .iter()
            .map(|z| format!("{:.2}", z.norm_sqr()))
            .collect();
        println!("t = {m}/{d} T_K  slots [{}]", row.join(" "));
    }

    let t_rev = 2.0 * 40.0 / 3.0 * kepler.t_kepler;
    let revival = kepler
        .clone()
        .with_revival_time(t_rev)?
        .with_truncation(Truncation::ThroughRevival)?;
    for periods in [0.0, 2.0, 5.0, 10.0, 20.0, 26.0] {
        let f = dispersion_fidelity(&packet, &revival, periods * kepler.t_kepler)?;
        println!("{periods:4} T_K  overlap with the undispersed packet {f:.4}");
    }
    Ok(())
}
