// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

//! Tolerance constants shared by the library, its tests and the runner.

/// Norm and matrix identities that hold exactly in exact arithmetic.
pub const EPS_UNITARY: f64 = 1e-12;

/// Normalization checks on states handed in by callers, and on states after
/// numerical integration.
pub const EPS_STATE: f64 = 1e-9;

/// Entrywise agreement between the gate sequence and the direct transform.
pub const EPS_EQUIVALENCE: f64 = 1e-10;

/// Default cap on the number of amplitudes in a register.
pub const DEFAULT_MAX_AMPS: usize = 1 << 20;

/// Environment variable overriding [`DEFAULT_MAX_AMPS`].
pub const MAX_AMPS_ENV: &str = "QUDITFFT_MAX_AMPS";
