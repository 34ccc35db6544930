// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

//! Registers of `q` qudits of dimension `d` stored as dense statevectors.
//!
//! Amplitude index `a` labels the product state `|a_{q-1}, ..., a_1, a_0>`
//! with `a = sum_m a_m d^m`; `a_0` is the least significant dit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, domain, Result};
use crate::tol;
use crate::C64;

/// Dimension `d`, register size `q` and the derived Hilbert-space size `n = d^q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegisterShape {
    d: usize,
    q: usize,
    n: usize,
}

impl RegisterShape {
    /// Builds a shape, enforcing the amplitude cap (default `2^20`, overridable
    /// through the `QUDITFFT_MAX_AMPS` environment variable).
    pub fn new(d: usize, q: usize) -> Result<Self> {
        Self::with_cap(d, q, max_amps_from_env())
    }

    pub fn with_cap(d: usize, q: usize, max_amps: usize) -> Result<Self> {
        if d < 2 {
            return Err(domain!("qudit dimension must be at least 2, got {d}"));
        }
        if q < 1 {
            return Err(domain!("register needs at least one qudit"));
        }
        let n = u32::try_from(q)
            .ok()
            .and_then(|q| d.checked_pow(q))
            .filter(|&n| n <= max_amps)
            .ok_or_else(|| domain!("{d}^{q} amplitudes exceed the cap of {max_amps}"))?;
        Ok(Self { d, q, n })
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of amplitudes, `d^q`.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Equivalent number of qubits, `q log2 d`. Reported only.
    pub fn qubit_equivalent(&self) -> f64 {
        self.q as f64 * (self.d as f64).log2()
    }

    /// `d^m`, the index stride of qudit `m`.
    #[inline]
    pub fn stride(&self, m: usize) -> usize {
        self.d.pow(m as u32)
    }

    /// Dit `m` of the basis index `a`.
    #[inline]
    pub fn dit(&self, a: usize, m: usize) -> usize {
        (a / self.stride(m)) % self.d
    }

    /// Index of the dit-reversed basis state: `b_m = a_{q-1-m}`.
    pub fn reverse_index(&self, mut a: usize) -> usize {
        let mut out = 0;
        for _ in 0..self.q {
            out = out * self.d + a % self.d;
            a /= self.d;
        }
        out
    }

    fn check_index(&self, a: usize) -> Result<()> {
        if a >= self.n {
            Err(domain!("basis index {a} out of range for N = {}", self.n))
        } else {
            Ok(())
        }
    }
}

pub(crate) fn max_amps_from_env() -> usize {
    std::env::var(tol::MAX_AMPS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(tol::DEFAULT_MAX_AMPS)
}

/// Base-`d` digits of a basis label, most significant first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DitString {
    d: usize,
    digits: Vec<usize>,
}

impl DitString {
    pub fn new(d: usize, digits: Vec<usize>) -> Result<Self> {
        if d < 2 {
            return Err(domain!("qudit dimension must be at least 2, got {d}"));
        }
        if digits.is_empty() {
            return Err(domain!("dit string needs at least one digit"));
        }
        if let Some(&bad) = digits.iter().find(|&&x| x >= d) {
            return Err(domain!("digit {bad} out of range for d = {d}"));
        }
        Ok(Self { d, digits })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Digits, most significant first.
    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    /// `sum_m a_m d^m`.
    pub fn value(&self) -> usize {
        self.digits.iter().fold(0, |acc, &x| acc * self.d + x)
    }
}

/// Writes `a` as `q` base-`d` digits, most significant first.
pub fn encode_dits(a: usize, shape: RegisterShape) -> Result<DitString> {
    shape.check_index(a)?;
    let digits = (0..shape.q()).rev().map(|m| shape.dit(a, m)).collect();
    Ok(DitString {
        d: shape.d(),
        digits,
    })
}

/// Reverses the order of the dits. An involution.
pub fn dit_reverse(s: &DitString) -> DitString {
    let mut digits = s.digits.clone();
    digits.reverse();
    DitString { d: s.d, digits }
}

/// A pure state of a qudit register.
#[derive(Clone, Debug, PartialEq)]
pub struct QuditState {
    shape: RegisterShape,
    amps: Vec<C64>,
}

impl QuditState {
    pub fn from_amps(shape: RegisterShape, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != shape.n() {
            return Err(domain!(
                "expected {} amplitudes, got {}",
                shape.n(),
                amps.len()
            ));
        }
        Ok(Self { shape, amps })
    }

    pub fn zero(shape: RegisterShape) -> Self {
        Self {
            shape,
            amps: vec![C64::new(0.0, 0.0); shape.n()],
        }
    }

    /// Computational basis state `|a>`.
    pub fn basis(a: usize, shape: RegisterShape) -> Result<Self> {
        shape.check_index(a)?;
        let mut state = Self::zero(shape);
        state.amps[a] = C64::new(1.0, 0.0);
        Ok(state)
    }

    /// Equal-weight superposition of every basis state.
    pub fn uniform(shape: RegisterShape) -> Self {
        let w = 1.0 / (shape.n() as f64).sqrt();
        Self {
            shape,
            amps: vec![C64::new(w, 0.0); shape.n()],
        }
    }

    /// A normalized state with seeded random components (uniform in the unit
    /// square before normalization; not Haar distributed).
    pub fn random(shape: RegisterShape, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut amps: Vec<C64> = (0..shape.n())
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|z| *z /= norm);
        Self { shape, amps }
    }

    #[inline]
    pub fn shape(&self) -> RegisterShape {
        self.shape
    }

    #[inline]
    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    #[inline]
    pub(crate) fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QuditState) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Relabels amplitudes so that output index `c` holds the amplitude of
    /// the dit-reversed index of `c`.
    pub fn dit_reversed(&self) -> QuditState {
        let amps = (0..self.shape.n())
            .map(|c| self.amps[self.shape.reverse_index(c)])
            .collect();
        QuditState {
            shape: self.shape,
            amps,
        }
    }
}

/// Computational basis state `|a>`.
pub fn basis_state(a: usize, shape: RegisterShape) -> Result<QuditState> {
    QuditState::basis(a, shape)
}

/// Projective readout of every qudit. Deterministic for a given seed.
pub fn measure_register(state: &QuditState, rng_seed: u64) -> Result<DitString> {
    let norm_sqr: f64 = state.amps.iter().map(|z| z.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > tol::EPS_STATE {
        return Err(contract!(
            "measurement needs a normalized state, |psi|^2 = {norm_sqr}"
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let u: f64 = rng.random::<f64>() * norm_sqr;
    let mut acc = 0.0;
    let mut outcome = None;
    for (a, z) in state.amps.iter().enumerate() {
        let p = z.norm_sqr();
        if p == 0.0 {
            continue;
        }
        acc += p;
        outcome = Some(a);
        if u < acc {
            break;
        }
    }
    // `outcome` is the last populated index if rounding left `u >= acc`.
    let a = outcome.ok_or_else(|| contract!("state has no support"))?;
    encode_dits(a, state.shape)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(d: usize, q: usize) -> RegisterShape {
        RegisterShape::new(d, q).unwrap()
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode_dits(0, shape(3, 2)).unwrap().digits(), &[0, 0]);
        assert_eq!(encode_dits(5, shape(2, 3)).unwrap().digits(), &[1, 0, 1]);
        assert_eq!(encode_dits(123, shape(10, 3)).unwrap().digits(), &[1, 2, 3]);
        assert!(matches!(
            encode_dits(8, shape(2, 3)),
            Err(crate::Error::Domain(_))
        ));
    }

    #[test]
    fn reverse_examples() {
        let s = DitString::new(10, vec![1, 2, 3]).unwrap();
        assert_eq!(dit_reverse(&s).digits(), &[3, 2, 1]);
        let s = DitString::new(10, vec![7]).unwrap();
        assert_eq!(dit_reverse(&s).digits(), &[7]);
        let s = DitString::new(2, vec![0, 1]).unwrap();
        assert_eq!(dit_reverse(&s).digits(), &[1, 0]);
    }

    #[test]
    fn encode_and_reverse_exhaustive() {
        for (d, q) in [(2, 13), (3, 8), (5, 5), (10, 4), (7, 4)] {
            let sh = shape(d, q);
            assert!(sh.n() <= 10_000);
            for a in 0..sh.n() {
                let s = encode_dits(a, sh).unwrap();
                assert_eq!(s.digits().len(), q);
                assert_eq!(s.value(), a);
                let r = dit_reverse(&s);
                assert_eq!(dit_reverse(&r), s);
                assert_eq!(r.value(), sh.reverse_index(a));
            }
        }
    }

    #[test]
    fn basis_examples() {
        let sh = shape(2, 2);
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        assert_eq!(basis_state(0, sh).unwrap().amps(), &[one, zero, zero, zero]);
        assert_eq!(basis_state(3, sh).unwrap().amps(), &[zero, zero, zero, one]);
        assert!(basis_state(4, sh).is_err());
    }

    #[test]
    fn shape_validation_and_cap() {
        assert!(RegisterShape::new(1, 3).is_err());
        assert!(RegisterShape::new(0, 3).is_err());
        assert!(RegisterShape::new(2, 0).is_err());
        assert!(RegisterShape::with_cap(2, 21, 1 << 20).is_err());
        assert!(RegisterShape::with_cap(2, 20, 1 << 20).is_ok());
        assert!(RegisterShape::with_cap(10, 40, usize::MAX).is_err());
        let sh = shape(8, 2);
        assert_eq!(sh.n(), 64);
        assert!((sh.qubit_equivalent() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn measure_basis_state_is_deterministic() {
        let sh = shape(2, 3);
        let st = basis_state(5, sh).unwrap();
        for seed in 0..50 {
            assert_eq!(measure_register(&st, seed).unwrap().digits(), &[1, 0, 1]);
        }
    }

    #[test]
    fn measure_rejects_unnormalized() {
        let sh = shape(2, 1);
        let st = QuditState::from_amps(sh, vec![C64::new(1.0, 0.0), C64::new(0.1, 0.0)]).unwrap();
        assert!(matches!(
            measure_register(&st, 1),
            Err(crate::Error::Contract(_))
        ));
    }

    #[test]
    fn measure_uniform_frequencies() {
        let st = QuditState::uniform(shape(2, 2));
        let shots = 100_000u64;
        let mut counts = [0u64; 4];
        for seed in 0..shots {
            counts[measure_register(&st, seed).unwrap().value()] += 1;
        }
        let p = 0.25;
        let sigma = (shots as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!(
                (c as f64 - shots as f64 * p).abs() < 3.0 * sigma,
                "{counts:?}"
            );
        }
    }

    #[test]
    fn random_state_is_normalized_and_seeded() {
        let sh = shape(3, 3);
        let a = QuditState::random(sh, 9);
        assert!((a.norm() - 1.0).abs() < 1e-14);
        assert_eq!(a, QuditState::random(sh, 9));
        assert_ne!(a, QuditState::random(sh, 10));
    }
}
