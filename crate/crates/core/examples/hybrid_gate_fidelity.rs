// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

//! Process fidelity of the full `d^2`-run phase gate, ideal and with a
//! revival term that spoils the Kepler timing.

use quditfft::iontrap::{verify_hybrid_gate, ScheduleTiming, TrapParams, TrapSimulator};
use quditfft::wavepacket::{RydbergSpectrum, Truncation};
use quditfft::RegisterShape;

fn main() -> quditfft::Result<()> {
    let timing = ScheduleTiming::default();
    for d in 2..=4 {
        let shape = RegisterShape::new(d, 2)?;
        let ideal = RydbergSpectrum::new(40.0, d)?;
        let t_rev = 200.0 * ideal.t_kepler;
        let spread = ideal
            .clone()
            .with_revival_time(t_rev)?
            .with_truncation(Truncation::ThroughRevival)?;
        for spectrum in [ideal, spread] {
            let label = format!("{:?}", spectrum.truncation);
            let sim = TrapSimulator::new(spectrum, TrapParams::default())?;
            let r = verify_hybrid_gate(&sim, shape, 0, 1, &timing)?;
            println!(
                "d={d} {label:15} fidelity {:.12} trap residual {:.1e} leakage {:.1e}",
                r.fidelity, r.max_trap_residual, r.max_leakage
            );
        }
    }
    Ok(())
}
