// Copyright 2026 The om-entangle Authors
// SPDX-License-Identifier: Apache-2.0

use crate::linalg::C64;

/// Composite trapezoid rule over already-sampled equally spaced values.
pub fn trapezoid_sum(samples: &[C64], h: f64) -> C64 {
    match samples {
        [] | [_] => C64::new(0.0, 0.0),
        [first, inner @ .., last] => {
            let mid: C64 = inner.iter().sum();
            (first + last + mid * 2.0) * (h / 2.0)
        }
    }
}

/// `∫_{t0}^{t} f` with `n` equal panels.
pub fn trapezoid_integrate(f: impl Fn(f64) -> C64, t0: f64, t: f64, n: usize) -> C64 {
    let n = n.max(1);
    let h = (t - t0) / n as f64;
    let samples: Vec<C64> = (0..=n).map(|k| f(t0 + k as f64 * h)).collect();
    trapezoid_sum(&samples, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn constant_is_exact() {
        let v = trapezoid_integrate(|_| C64::new(2.5, -1.0), 1.0, 4.0, 7);
        assert_eq!(v, C64::new(7.5, -3.0));
    }

    #[test]
    fn linear_is_exact() {
        assert_eq!(trapezoid_integrate(re, 0.0, 1.0, 5), re(0.5));
    }

    #[test]
    fn exponential_closed_form() {
        // h/2 · (1 + e^{-1}) + h Σ e^{-k h} = h/2 · coth(h/2) · (1 − e^{-1})
        let got = trapezoid_integrate(|t| re((-t).exp()), 0.0, 1.0, 10).re;
        let h: f64 = 0.1;
        let want = h / 2.0 / (h / 2.0).tanh() * (1.0 - (-1.0f64).exp());
        assert!((got - want).abs() < 1e-15);
        assert!((got - 0.63265).abs() < 5e-6);
        assert!((got - (1.0 - (-1.0f64).exp()) - 5.3e-4).abs() < 1e-5);
    }

    #[test]
    fn degenerate_sample_sets() {
        assert_eq!(trapezoid_sum(&[], 1.0), re(0.0));
        assert_eq!(trapezoid_sum(&[re(3.0)], 1.0), re(0.0));
    }

    proptest! {
        #[test]
        fn affine_exact(a in -10.0f64..10.0, b in -10.0f64..10.0, t in 0.1f64..10.0, n in 1usize..40) {
            let got = trapezoid_integrate(|s| re(a + b * s), 0.0, t, n).re;
            let want = a * t + b * t * t / 2.0;
            prop_assert!((got - want).abs() <= 1e-12 * (a.abs() * t + b.abs() * t * t + 1.0));
        }
    }
}
