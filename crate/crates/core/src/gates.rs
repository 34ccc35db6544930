// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

//! The multi-valued gate set and the quantum FFT built from it.
//!
//! `FourierA(m)` is the `d`-point Fourier transform on qudit `m`:
//!
//! ```text
//! |a_m>  ->  d^{-1/2} sum_b exp(i 2 pi a_m b / d) |b>
//! ```
//!
//! `PhaseB(l, m)`, `l < m`, is the diagonal conditional phase
//!
//! ```text
//! |a_l, b_m>  ->  exp(i 2 pi a_l b_m / d^{m-l+1}) |a_l, b_m>
//! ```
//!
//! Applied in pass order (`A_{q-1}`, then `B_{q-2,q-1}`, `A_{q-2}`, ...,
//! `A_0`), the `q(q+1)/2` gates reproduce the `N = d^q` point transform up to
//! a reversal of the output dits.

use std::f64::consts::TAU;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::register::{QuditState, RegisterShape};
use crate::tol;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    FourierA,
    PhaseB,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateDescriptor {
    pub kind: GateKind,
    /// Target of `FourierA`, or the second (already transformed) qudit of
    /// `PhaseB`.
    pub m: usize,
    /// First qudit of `PhaseB`; `None` for `FourierA`.
    pub l: Option<usize>,
}

impl GateDescriptor {
    pub fn fourier(m: usize) -> Self {
        Self {
            kind: GateKind::FourierA,
            m,
            l: None,
        }
    }

    pub fn phase(l: usize, m: usize) -> Self {
        Self {
            kind: GateKind::PhaseB,
            m,
            l: Some(l),
        }
    }

    pub fn validate(&self, shape: RegisterShape) -> Result<()> {
        match (self.kind, self.l) {
            (GateKind::FourierA, None) => check_qudit(shape, self.m),
            (GateKind::PhaseB, Some(l)) => check_pair(shape, l, self.m),
            _ => Err(domain!("malformed gate descriptor {self:?}")),
        }
    }

    pub fn apply(&self, state: &mut QuditState) -> Result<()> {
        match (self.kind, self.l) {
            (GateKind::FourierA, None) => apply_fourier_a(state, self.m),
            (GateKind::PhaseB, Some(l)) => apply_phase_b(state, l, self.m),
            _ => Err(domain!("malformed gate descriptor {self:?}")),
        }
    }
}

impl fmt::Display for GateDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.l {
            None => write!(f, "A{}", self.m),
            Some(l) => write!(f, "B{},{}", l, self.m),
        }
    }
}

/// Order in which the FFT gates are applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceOrder {
    /// `A_{q-1}` first and `A_0` last, each Fourier gate followed by the
    /// phase gates coupling every transformed qudit to the next untransformed
    /// one.
    #[default]
    PassOrder,
    /// The same list applied back to front (`A_0` first). Does not reproduce
    /// the transform for `q > 1`; kept so the verifier can show that.
    Reversed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSequence {
    pub shape: RegisterShape,
    pub gates: Vec<GateDescriptor>,
}

impl GateSequence {
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn apply(&self, state: &mut QuditState) -> Result<()> {
        if state.shape() != self.shape {
            return Err(domain!(
                "sequence built for {:?}, state has {:?}",
                self.shape,
                state.shape()
            ));
        }
        self.gates.iter().try_for_each(|g| g.apply(state))
    }
}

impl fmt::Display for GateSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for g in &self.gates {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

fn check_qudit(shape: RegisterShape, m: usize) -> Result<()> {
    if m >= shape.q() {
        Err(domain!("qudit {m} out of range for q = {}", shape.q()))
    } else {
        Ok(())
    }
}

fn check_pair(shape: RegisterShape, l: usize, m: usize) -> Result<()> {
    check_qudit(shape, m)?;
    if l >= m {
        Err(domain!("phase gate needs l < m, got l = {l}, m = {m}"))
    } else {
        Ok(())
    }
}

/// `exp(i 2 pi r / n)` for `r = 0..n`, indexed by the residue.
fn roots_of_unity(n: usize) -> Vec<C64> {
    (0..n)
        .map(|r| C64::from_polar(1.0, TAU * r as f64 / n as f64))
        .collect()
}

/// `d x d` Fourier kernel, `out[b][a] = d^{-1/2} exp(i 2 pi a b / d)`.
pub fn fourier_matrix(d: usize) -> Vec<Vec<C64>> {
    let roots = roots_of_unity(d);
    let w = 1.0 / (d as f64).sqrt();
    (0..d)
        .map(|b| (0..d).map(|a| roots[(a * b) % d] * w).collect())
        .collect()
}

/// Angle in turns (fraction of `2 pi`) added by `PhaseB(l, m)` to digits
/// `(a_l, b_m)`, as a reduced pair `(numerator, denominator)` with
/// `denominator = d^{m-l+1}`.
pub fn phase_b_turns(d: usize, l: usize, m: usize, a_l: usize, b_m: usize) -> (usize, usize) {
    let den = d.pow((m - l + 1) as u32);
    ((a_l * b_m) % den, den)
}

/// Phase angle in radians of `PhaseB(l, m)` on digits `(a_l, b_m)`.
pub fn phase_b_angle(d: usize, l: usize, m: usize, a_l: usize, b_m: usize) -> f64 {
    let (num, den) = phase_b_turns(d, l, m, a_l, b_m);
    TAU * num as f64 / den as f64
}

/// Applies `FourierA(m)` in place.
pub fn apply_fourier_a(state: &mut QuditState, m: usize) -> Result<()> {
    let shape = state.shape();
    check_qudit(shape, m)?;
    let d = shape.d();
    let stride = shape.stride(m);
    let kernel = fourier_matrix(d);
    state
        .amps_mut()
        .par_chunks_mut(stride * d)
        .for_each(|block| {
            let mut column = vec![C64::new(0.0, 0.0); d];
            for offset in 0..stride {
                for (a, slot) in column.iter_mut().enumerate() {
                    *slot = block[offset + a * stride];
                }
                for (b, row) in kernel.iter().enumerate() {
                    block[offset + b * stride] = row.iter().zip(&column).map(|(k, x)| k * x).sum();
                }
            }
        });
    Ok(())
}

/// Applies `PhaseB(l, m)` in place.
pub fn apply_phase_b(state: &mut QuditState, l: usize, m: usize) -> Result<()> {
    let shape = state.shape();
    check_pair(shape, l, m)?;
    let d = shape.d();
    let table: Vec<C64> = (0..d * d)
        .map(|ab| C64::from_polar(1.0, phase_b_angle(d, l, m, ab / d, ab % d)))
        .collect();
    state
        .amps_mut()
        .par_iter_mut()
        .enumerate()
        .for_each(|(idx, z)| {
            let a_l = shape.dit(idx, l);
            let b_m = shape.dit(idx, m);
            *z *= table[a_l * d + b_m];
        });
    Ok(())
}

/// The FFT gate list in pass order.
pub fn build_fft_sequence(shape: RegisterShape) -> GateSequence {
    build_fft_sequence_ordered(shape, SequenceOrder::PassOrder)
}

pub fn build_fft_sequence_ordered(shape: RegisterShape, order: SequenceOrder) -> GateSequence {
    let q = shape.q();
    let mut gates = Vec::with_capacity(q * (q + 1) / 2);
    for p in (1..q).rev() {
        gates.push(GateDescriptor::fourier(p));
        for m in (p..q).rev() {
            gates.push(GateDescriptor::phase(p - 1, m));
        }
    }
    gates.push(GateDescriptor::fourier(0));
    if order == SequenceOrder::Reversed {
        gates.reverse();
    }
    GateSequence { shape, gates }
}

/// `<c|DFT_N|a> = N^{-1/2} exp(i 2 pi a c / N)`.
pub fn dft_matrix_element(n: usize, a: usize, c: usize) -> C64 {
    let r = ((a as u128 * c as u128) % n as u128) as f64;
    C64::from_polar(1.0 / (n as f64).sqrt(), TAU * r / n as f64)
}

/// Direct `N`-point transform by the `O(N^2)` matrix-free sum.
pub fn direct_dft(state: &QuditState) -> QuditState {
    let shape = state.shape();
    let n = shape.n();
    let roots = roots_of_unity(n);
    let w = 1.0 / (n as f64).sqrt();
    let input = state.amps();
    let amps: Vec<C64> = (0..n)
        .into_par_iter()
        .map(|c| {
            let sum: C64 = input
                .iter()
                .enumerate()
                .filter(|(_, x)| x.re != 0.0 || x.im != 0.0)
                .map(|(a, x)| roots[(a * c) % n] * x)
                .sum();
            sum * w
        })
        .collect();
    QuditState::from_amps(shape, amps).expect("length preserved")
}

/// Column `a` of `DFT_N`, i.e. the transform of `|a>`.
pub fn direct_dft_of_basis(a: usize, shape: RegisterShape) -> Result<QuditState> {
    let n = shape.n();
    if a >= n {
        return Err(domain!("basis index {a} out of range for N = {n}"));
    }
    let amps = (0..n).map(|c| dft_matrix_element(n, a, c)).collect();
    QuditState::from_amps(shape, amps)
}

/// The same transform through a classical FFT, for cross-checking.
pub fn direct_dft_fft(state: &QuditState) -> QuditState {
    let shape = state.shape();
    let n = shape.n();
    let mut buf = state.amps().to_vec();
    // rustfft's inverse direction carries the `exp(+i ...)` kernel.
    FftPlanner::new()
        .plan_fft(n, FftDirection::Inverse)
        .process(&mut buf);
    let w = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= w);
    QuditState::from_amps(shape, buf).expect("length preserved")
}

/// Accumulated phase of the FFT sequence on the transition `|a> -> |b>`, in
/// turns, as the exact residue `numerator / N`:
///
/// ```text
/// sum_{l <= m} a_l b_m / d^{m-l+1}   (mod 1)
/// ```
pub fn accumulated_phase_turns(shape: RegisterShape, a: usize, b: usize) -> (usize, usize) {
    let (d, q, n) = (shape.d(), shape.q(), shape.n());
    let mut num = 0usize;
    for l in 0..q {
        let a_l = shape.dit(a, l);
        for m in l..q {
            let b_m = shape.dit(b, m);
            // a_l b_m / d^{m-l+1} = a_l b_m d^{q-(m-l+1)} / N
            num = (num + a_l * b_m * d.pow((q - (m - l + 1)) as u32)) % n;
        }
    }
    (num, n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub order: SequenceOrder,
    /// Largest `N` for which every basis input is checked.
    pub exhaustive_limit: usize,
    /// Number of distinct random inputs checked above the limit.
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            order: SequenceOrder::PassOrder,
            exhaustive_limit: 4096,
            samples: 256,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub shape: RegisterShape,
    pub order: SequenceOrder,
    pub gate_count: usize,
    pub expected_gate_count: usize,
    pub inputs_checked: usize,
    pub exhaustive: bool,
    /// Largest entrywise `|seq - dft|`.
    pub max_entry_err: f64,
    /// Largest `||seq| - |dft||`.
    pub max_mod_err: f64,
    /// Largest wrapped phase difference, radians.
    pub max_phase_err: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn verify_fft_equivalence(shape: RegisterShape) -> EquivalenceReport {
    verify_fft_equivalence_with(shape, &VerifyOptions::default())
}

/// Runs the gate sequence on basis inputs, reads the output in dit-reversed
/// order and compares it entrywise (no global phase freedom) with `DFT_N`.
pub fn verify_fft_equivalence_with(
    shape: RegisterShape,
    opts: &VerifyOptions,
) -> EquivalenceReport {
    let seq = build_fft_sequence_ordered(shape, opts.order);
    let n = shape.n();
    let exhaustive = n <= opts.exhaustive_limit;
    let inputs: Vec<usize> = if exhaustive {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut v = rand::seq::index::sample(&mut rng, n, opts.samples.min(n)).into_vec();
        v.sort_unstable();
        v
    };

    let (max_entry_err, max_mod_err, max_phase_err) = inputs
        .par_iter()
        .map(|&a| {
            let mut st = QuditState::basis(a, shape).expect("index in range");
            seq.apply(&mut st).expect("sequence matches shape");
            let out = st.dit_reversed();
            let mut errs = (0.0f64, 0.0f64, 0.0f64);
            for (c, z) in out.amps().iter().enumerate() {
                let want = dft_matrix_element(n, a, c);
                errs.0 = errs.0.max((z - want).norm());
                errs.1 = errs.1.max((z.norm() - want.norm()).abs());
                errs.2 = errs.2.max(wrap_angle(z.arg() - want.arg()).abs());
            }
            errs
        })
        .reduce(
            || (0.0, 0.0, 0.0),
            |x, y| (x.0.max(y.0), x.1.max(y.1), x.2.max(y.2)),
        );

    let q = shape.q();
    let expected_gate_count = q * (q + 1) / 2;
    let tolerance = tol::EPS_EQUIVALENCE;
    EquivalenceReport {
        shape,
        order: opts.order,
        gate_count: seq.len(),
        expected_gate_count,
        inputs_checked: inputs.len(),
        exhaustive,
        max_entry_err,
        max_mod_err,
        max_phase_err,
        tolerance,
        pass: seq.len() == expected_gate_count && max_entry_err < tolerance,
    }
}

/// Maps an angle onto `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > std::f64::consts::PI {
        y - TAU
    } else {
        y
    }
}
