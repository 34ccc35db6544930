// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

//! Transforms a periodic state and samples the dit-reversed register. The
//! outcomes concentrate on multiples of N / period.

use std::collections::BTreeMap;

use quditfft::gates::build_fft_sequence;
use quditfft::register::measure_register;
use quditfft::{QuditState, RegisterShape, C64};

fn main() -> quditfft::Result<()> {
    let shape = RegisterShape::new(3, 3)?;
    let n = shape.n();
    let period = 9;
    let hits: Vec<usize> = (0..n).step_by(period).collect();
    let amp = C64::new(1.0 / (hits.len() as f64).sqrt(), 0.0);
    let mut amps = vec![C64::new(0.0, 0.0); n];
    for &a in &hits {
        amps[a] = amp;
    }
    let mut state = QuditState::from_amps(shape, amps)?;
    build_fft_sequence(shape).apply(&mut state)?;
    let out = state.dit_reversed();

    let mut counts = BTreeMap::new();
    for seed in 0..2000 {
        let s = measure_register(&out, seed)?;
        *counts.entry(s.value()).or_insert(0usize) += 1;
    }
    for (value, count) in counts {
        println!("{value:3}  {count}");
    }
    Ok(())
}
