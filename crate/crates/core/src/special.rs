//! Special functions and numerically careful summation.
//!
//! The complementary error function is evaluated in two regimes:
//!
//! * `|x| < 2`: the everywhere-positive series
//!   `erf(x) = 2/√π · e^{-x²} · Σ 2ⁿ x^{2n+1} / (2n+1)!!`, which has no
//!   cancellation, and `erfc = 1 - erf`.
//! * `x ≥ 2`: the Laplace continued fraction
//!   `erfc(x) = e^{-x²}/√π · 1/(x + ½/(x + 1/(x + 3/2/(x + …))))`, evaluated
//!   with the modified Lentz method. Its logarithm is formed directly, so
//!   `ln erfc(x)` stays finite far beyond the point where `erfc(x)`
//!   underflows (`x ≈ 26.5`).

use std::f64::consts::{PI, SQRT_2};

const SERIES_LIMIT: f64 = 2.0;
const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;

fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term > sum * 1e-17 {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
    }
    2.0 / PI.sqrt() * (-x2).exp() * sum
}

/// `ln K(x)` where `erfc(x) = e^{-x²}/√π · K(x)`, valid for `x ≥ 2`.
fn ln_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    // K = 1 / (x + a1/(x + a2/(x + ...))), a_k = k/2
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..2000 {
        let a = k as f64 * 0.5;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    -f.ln()
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < SERIES_LIMIT {
        1.0 - erf_series(x)
    } else {
        ln_erfc(x).exp()
    }
}

/// Natural logarithm of `erfc(x)`; finite for all finite `x`.
pub fn ln_erfc(x: f64) -> f64 {
    if x < SERIES_LIMIT {
        return erfc(x).ln();
    }
    -x * x - LN_SQRT_PI + ln_continued_fraction(x)
}

/// Upper tail of the standard normal, `½ erfc(z/√2)`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// `ln(½ erfc(z/√2))`.
pub fn ln_normal_sf(z: f64) -> f64 {
    ln_erfc(z / SQRT_2) - std::f64::consts::LN_2
}

/// Inverse of [`ln_normal_sf`]: the `z` whose upper normal tail has
/// logarithm `ln_p`. Works for tail probabilities far below `f64::MIN_POSITIVE`.
pub fn normal_isf_ln(ln_p: f64) -> f64 {
    if ln_p >= 0.0 {
        return f64::NEG_INFINITY;
    }
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    while ln_normal_sf(hi) > ln_p {
        hi *= 2.0;
    }
    // ln_normal_sf is strictly decreasing
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_normal_sf(mid) > ln_p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Inverse of [`normal_sf`].
pub fn normal_isf(p: f64) -> f64 {
    normal_isf_ln(p.ln())
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of an iterator of `f64`.
pub fn csum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}
