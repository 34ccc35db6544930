// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

//! Integrates a resonant square pulse between the ground state and the
//! packet at the core and compares it with the closed form.

use std::f64::consts::PI;

use quditfft::pulse::{
    collective_rabi, integrate_two_level_observed, min_two_level_steps, AtomState, PulseProfile,
    RabiCouplings,
};

fn main() -> quditfft::Result<()> {
    let d = 4;
    let couplings = RabiCouplings::new(vec![0.8, 1.0, 1.2, 1.0])?;
    println!(
        "collective Rabi frequency {:.4}",
        collective_rabi(&couplings.omega_gj)
    );

    let pulse = PulseProfile::square(10.0, PI);
    let steps = 2 * min_two_level_steps(&pulse);
    let start = AtomState::in_ground(d);
    let mut trace = Vec::new();
    let end = integrate_two_level_observed(&start, &pulse, &couplings, steps, |t, bg, b0| {
        trace.push((t, bg.norm_sqr(), b0.norm_sqr()));
    })?;
    for (t, pg, p0) in trace.iter().step_by(steps / 8) {
        println!("t = {t:5.2}  |b_g|^2 = {pg:.4}  |b_0|^2 = {p0:.4}");
    }
    let (bg, b0) = pulse.square_resonant_rotation(start.b_g, start.core());
    println!(
        "end b_0 = {:.6}, closed form {:.6}, error {:.1e}",
        end.core(),
        b0,
        (end.core() - b0).norm().max((end.b_g - bg).norm())
    );
    Ok(())
}
