//! Numeric helpers shared by every module: log-domain conversions for
//! arbitrary-precision counts, compensated summation and the tolerance
//! conventions used when mass budgets are compared.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use std::f64::consts::LN_2;

/// Relative slack applied when a mass budget is compared against a
/// multiple of a per-sequence probability. Masses carry ~1e-16 relative
/// error, so exact ties (e.g. `3 * 0.25 >= 0.75`) must not flip.
pub const MASS_TOL: f64 = 1e-12;

/// Absolute slack for comparing rates and log-probabilities.
pub const RATE_TOL: f64 = 1e-12;

/// Natural log of an arbitrary-precision integer. Returns `-inf` for zero.
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite below 2^1000").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64-bit head");
    (top as f64).ln() + shift as f64 * LN_2
}

/// `floor(e^lnx)` as a big integer. Exact whenever the value fits in the
/// 53-bit mantissa; otherwise correct to f64 relative precision.
pub fn big_floor_exp(lnx: f64) -> BigUint {
    if lnx < 0.0 {
        return BigUint::zero();
    }
    if lnx < 36.0 {
        return BigUint::from(lnx.exp().floor() as u64);
    }
    from_log2(lnx / LN_2)
}

/// `ceil(e^lnx)` as a big integer.
pub fn big_ceil_exp(lnx: f64) -> BigUint {
    if lnx == f64::NEG_INFINITY {
        return BigUint::zero();
    }
    if lnx < 36.0 {
        return BigUint::from(lnx.exp().ceil() as u64);
    }
    from_log2(lnx / LN_2) + BigUint::one()
}

fn from_log2(log2x: f64) -> BigUint {
    let whole = log2x.floor();
    let exp = whole as u64;
    if exp <= 52 {
        return BigUint::from(2f64.powf(log2x).floor() as u64);
    }
    let mantissa = 2f64.powf(log2x - whole + 52.0).floor() as u64;
    BigUint::from(mantissa) << (exp - 52)
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `Σ_{i=1..t} K^i`: the number of nonempty strings of length at most `t`
/// over a `K`-ary alphabet.
pub fn string_budget(base: u32, t: u64) -> BigUint {
    if t == 0 {
        return BigUint::zero();
    }
    let k = BigUint::from(base);
    // (K^{t+1} - K) / (K - 1)
    let pow = num_traits::pow::pow(k.clone(), (t + 1) as usize);
    (pow - &k) / BigUint::from(base - 1)
}

/// Number of sequences of per-sequence log-probability `log_p` whose total
/// mass stays within `budget`, capped at `available`. Callers supply any
/// slack for ties.
pub fn seqs_within(budget: f64, log_p: f64, available: &BigUint) -> BigUint {
    if budget <= 0.0 {
        return BigUint::zero();
    }
    let ln_ratio = budget.ln() - log_p;
    if ln_ratio >= ln_big(available) + 1e-9 {
        return available.clone();
    }
    big_floor_exp(ln_ratio).min(available.clone())
}

/// Number of sequences of per-sequence log-probability `log_p` needed to
/// cover `need`, capped at `available`.
pub fn seqs_to_cover(need: f64, log_p: f64, available: &BigUint) -> BigUint {
    if need <= 0.0 {
        return BigUint::zero();
    }
    let ln_ratio = need.ln() - log_p - MASS_TOL;
    if ln_ratio >= ln_big(available) + 1e-9 {
        return available.clone();
    }
    big_ceil_exp(ln_ratio).min(available.clone())
}

/// Mass of `take` out of `count` equiprobable sequences whose combined mass
/// is `mass`.
pub fn fraction_mass(mass: f64, take: &BigUint, count: &BigUint) -> f64 {
    if take.is_zero() {
        return 0.0;
    }
    if take == count {
        return mass;
    }
    if count.bits() <= 1000 {
        let (t, c) = (take.to_f64().unwrap(), count.to_f64().unwrap());
        return mass * (t / c);
    }
    mass * (ln_big(take) - ln_big(count)).exp()
}

/// An error budget spent one atom at a time. The total carries a relative
/// slack of `MASS_TOL`, so a sequence that exactly exhausts the budget still
/// fits after rounding in earlier steps.
#[derive(Debug, Clone)]
pub struct MassBudget {
    total: f64,
    spent: KahanSum,
}

impl MassBudget {
    pub fn new(total: f64) -> Self {
        Self {
            total,
            spent: KahanSum::new(),
        }
    }

    pub fn remaining(&self) -> f64 {
        (self.total - self.spent.value()).max(0.0)
    }

    /// Sequences of log-probability `log_p` that fit, capped at `available`.
    pub fn fit(&self, log_p: f64, available: &BigUint) -> BigUint {
        let room = self.total * (1.0 + MASS_TOL) - self.spent.value();
        seqs_within(room, log_p, available)
    }

    pub fn spend(&mut self, mass: f64) {
        self.spent.add(mass);
    }
}

/// `a <= b` up to [`MASS_TOL`] relative slack.
pub fn le_mass(a: f64, b: f64) -> bool {
    a <= b + MASS_TOL * b.abs().max(1e-300)
}
