// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation (index out of
    /// range, bad qudit pair, invalid dimension).
    #[error("domain error: {0}")]
    Domain(String),

    /// A precondition on a state was violated (unnormalized input, trap
    /// population outside the two lowest levels).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A numerical or run configuration is unusable.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(format!($($arg)*)) };
}
macro_rules! contract {
    ($($arg:tt)*) => { $crate::error::Error::Contract(format!($($arg)*)) };
}
macro_rules! config {
    ($($arg:tt)*) => { $crate::error::Error::Config(format!($($arg)*)) };
}
pub(crate) use {config, contract, domain};
