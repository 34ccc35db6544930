// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

//! Builds the gate sequence for a few register shapes and checks it against
//! the direct DFT.

use quditfft::gates::{build_fft_sequence, verify_fft_equivalence};
use quditfft::RegisterShape;

fn main() -> quditfft::Result<()> {
    let shape = RegisterShape::new(3, 3)?;
    let seq = build_fft_sequence(shape);
    println!("d=3 q=3 sequence ({} gates): {seq}", seq.len());

    for (d, q) in [(2, 4), (3, 3), (4, 2), (5, 4)] {
        let r = verify_fft_equivalence(RegisterShape::new(d, q)?);
        println!(
            "d={d} q={q} N={:4} gates={:2} inputs={:4} max_err={:.2e} pass={}",
            r.shape.n(),
            r.gate_count,
            r.inputs_checked,
            r.max_entry_err,
            r.pass
        );
    }
    Ok(())
}
