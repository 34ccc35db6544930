// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

//! One five-pulse run on a uniform superposition. The addressed branch
//! picks up the requested phase; the other branches on its row and column
//! pick up a sign that cancels once all `d^2` runs are done. The trap ends
//! empty.

use std::f64::consts::PI;

use quditfft::iontrap::{
    solve_aux_detuning, JointIonState, ScheduleTiming, TrapParams, TrapSimulator,
};
use quditfft::wavepacket::RydbergSpectrum;
use quditfft::C64;

fn main() -> quditfft::Result<()> {
    let d = 3;
    let sim = TrapSimulator::new(RydbergSpectrum::new(40.0, d)?, TrapParams::default())?;
    let (j, k, phi) = (1, -1, 0.6 * PI);
    println!(
        "aux detuning for phi = 0.6 pi: {:.3} omega_ge",
        solve_aux_detuning(phi, 1.0, 1)?
    );

    let amp = C64::new(1.0 / d as f64, 0.0);
    let mut state = JointIonState::from_hybrid_amps(d, &vec![amp; d * d])?;
    let steps = sim.run_phase_gate(&mut state, j, k, phi, &ScheduleTiming::default())?;
    for s in &steps {
        println!(
            "{:6?} at {:.3} T_K  area {:.3} pi",
            s.kind,
            s.time / sim.spectrum.t_kepler,
            s.area / PI
        );
    }
    let back = -state.t;
    sim.free_evolve(&mut state, back)?;
    for (i, z) in state.hybrid_amps().iter().enumerate() {
        println!(
            "branch {i}: |c| = {:.4}  arg/pi = {:+.4}",
            z.norm(),
            z.arg() / PI
        );
    }
    println!(
        "trap |1> population {:.1e}",
        state.trap_excited_population()
    );
    Ok(())
}
