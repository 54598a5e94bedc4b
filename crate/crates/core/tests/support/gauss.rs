//! Upper Gaussian tail from first principles: Taylor series of the error
//! function near zero, Lentz continued fraction in the tail.
#![allow(dead_code)]

use std::f64::consts::PI;

pub fn q_series(x: f64) -> f64 {
    // erf(z) = 2/sqrt(pi) Σ (-1)^k z^{2k+1} / (k! (2k+1))
    let z = x / 2f64.sqrt();
    let (mut term, mut sum) = (z, z);
    for k in 1..200 {
        term *= -z * z / k as f64;
        let add = term / (2 * k + 1) as f64;
        sum += add;
        if add.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    0.5 - sum / PI.sqrt()
}

pub fn q_fraction(x: f64) -> f64 {
    // Q(x) = φ(x) / (x + 1/(x + 2/(x + 3/(x + ...)))) for x > 0
    let tiny = 1e-300;
    let mut f = x.max(tiny);
    let (mut c, mut d) = (f, 0.0);
    for k in 1..500 {
        let a = k as f64;
        d = x + a * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = x + a / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt() / f
}

/// Q(x) for any real x.
pub fn q(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - q(-x);
    }
    if x < 3.0 {
        q_series(x)
    } else {
        q_fraction(x)
    }
}

/// Inverse by bisection on the oracle.
pub fn q_inv(gamma: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q(mid) > gamma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
