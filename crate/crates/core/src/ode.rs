// Copyright 2026 The quditfft Authors
// SPDX-License-Identifier: Apache-2.0

//! Classic fixed-step fourth-order Runge-Kutta for complex state vectors.

use crate::C64;

/// Integrates `dy/dt = rhs(t, y)` from `t0` to `t1` in `steps` equal steps,
/// calling `observe` after every step (including the initial point).
pub fn rk4_observed<F, O>(y: &mut [C64], t0: f64, t1: f64, steps: usize, mut rhs: F, mut observe: O)
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(f64, &[C64]),
{
    assert!(steps > 0, "rk4 needs at least one step");
    let n = y.len();
    let h = (t1 - t0) / steps as f64;
    let zero = C64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut tmp = vec![zero; n];

    observe(t0, y);
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        let t_next = if s + 1 == steps {
            t1
        } else {
            t0 + (s + 1) as f64 * h
        };
        rhs(t, y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        rhs(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        rhs(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + k3[i] * h;
        }
        rhs(t_next, &tmp, &mut k4);
        for i in 0..n {
            y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
        observe(t_next, y);
    }
}

pub fn rk4<F>(y: &mut [C64], t0: f64, t1: f64, steps: usize, rhs: F)
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    rk4_observed(y, t0, t1, steps, rhs, |_, _| {});
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_phase_fourth_order() {
        // y' = i y, y(0) = 1, exact e^{it}
        let err = |steps| {
            let mut y = [C64::new(1.0, 0.0)];
            rk4(&mut y, 0.0, 2.0, steps, |_, y, dy| dy[0] = C64::i() * y[0]);
            (y[0] - C64::from_polar(1.0, 2.0)).norm()
        };
        let ratio = err(20) / err(40);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = 2t, y(0) = 0 -> y(1) = 1, exact for RK4
        let mut y = [C64::new(0.0, 0.0)];
        let mut seen = 0;
        rk4_observed(
            &mut y,
            0.0,
            1.0,
            7,
            |t, _, dy| dy[0] = C64::new(2.0 * t, 0.0),
            |_, _| seen += 1,
        );
        assert!((y[0].re - 1.0).abs() < 1e-14);
        assert_eq!(seen, 8);
    }
}
