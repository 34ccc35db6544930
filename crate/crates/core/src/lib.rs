// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulation of the multi-valued quantum fast Fourier transform on registers
//! of `d`-level qudits, together with the atomic pieces needed to realize it:
//!
//! - [`register`]: dense statevectors over `q` qudits with base-`d` index
//!   arithmetic, dit reversal and projective readout.
//! - [`gates`]: the single-qudit Fourier gate, the two-qudit conditional phase
//!   gate, the `q(q+1)/2`-gate FFT sequence and an equivalence verifier
//!   against the direct `N`-point transform.
//! - [`wavepacket`]: Rydberg energy levels, their Fourier-dual wave-packet
//!   basis and free evolution (Kepler cycling, dispersion, revivals).
//! - [`pulse`]: broadband-pulse Rabi dynamics between the core-localized wave
//!   packet and the ground state, and the selectivity of that approximation.
//! - [`iontrap`]: a two-ion plus trap-mode simulator running the five-pulse
//!   hybrid-basis phase gate, with a process-fidelity verifier.
//! - [`runner`]: the batch entry point behind the `quditfft` binary.
//!
//! All times and frequencies are in atomic units.

pub mod error;
pub mod gates;
pub mod iontrap;
pub mod ode;
pub mod pulse;
pub mod register;
pub mod runner;
pub mod tol;
pub mod wavepacket;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use register::{DitString, QuditState, RegisterShape};
