//! Finite-blocklength achievability and converse bounds on the overflow
//! probability, evaluated exactly over spectrum atoms.
//!
//! Near-ties in the defining inequalities are resolved conservatively: the
//! upper bound counts a sequence whose condition holds up to `RATE_TOL`, the
//! lower bound only one whose condition holds with `RATE_TOL` to spare.

use crate::codes::{code_overflow, construct_theorem2_code, optimal_tradeoff, top_prefix};
use crate::error::{check_range, Result};
use crate::numeric::{KahanSum, RATE_TOL};
use crate::source::Spectrum;

/// Achievability bound:
/// `Pr{ a_n P(X^n)/P(A_n) <= K^-eta, X^n in A_n } + a_n K`
/// with `A_n` the smallest top-probability set of mass at least `1 - eps`.
/// The raw value may exceed one.
pub fn theorem2_upper(s: &Spectrum, eps: f64, a_n: f64, eta: f64) -> Result<f64> {
    let (prob, slack) = theorem2_terms(s, eps, a_n, eta)?;
    Ok(prob + slack)
}

/// Probability term and additive slack `a_n K` of [`theorem2_upper`].
pub fn theorem2_terms(s: &Spectrum, eps: f64, a_n: f64, eta: f64) -> Result<(f64, f64)> {
    check_range("eps", eps, (0.0..1.0).contains(&eps), "0 <= eps < 1")?;
    check_range("a_n", a_n, a_n > 0.0, "a_n > 0")?;
    check_range("eta", eta, eta >= 1.0, "eta >= 1")?;
    let (set, set_mass) = top_prefix(s, 1.0 - eps);
    let ln_k = s.ln_base();
    let rhs = -eta * ln_k;
    let ln_a = a_n.ln();
    let ln_set = set_mass.ln();
    let prob: KahanSum = set
        .iter()
        .filter(|(i, _, _)| ln_a + s.atoms()[*i].log_prob - ln_set <= rhs + tol(rhs))
        .map(|&(_, _, m)| m)
        .collect();
    Ok((prob.value(), a_n * f64::from(s.base())))
}

/// Converse bound:
/// `Pr{ P(X^n)/P(D_n) <= a_n K^-eta, X^n in D_n } - a_n K P(D_n)`
/// with `D_n` the smallest top-probability set of mass at least
/// `d_mass_target`. May be negative.
pub fn theorem3_lower(s: &Spectrum, d_mass_target: f64, a_n: f64, eta: f64) -> Result<f64> {
    let (prob, slack) = theorem3_terms(s, d_mass_target, a_n, eta)?;
    Ok(prob - slack)
}

/// Probability term and subtracted slack `a_n K P(D_n)` of
/// [`theorem3_lower`].
pub fn theorem3_terms(s: &Spectrum, d_mass_target: f64, a_n: f64, eta: f64) -> Result<(f64, f64)> {
    check_range(
        "d_mass_target",
        d_mass_target,
        (0.0..=1.0).contains(&d_mass_target),
        "0 <= P(D) <= 1",
    )?;
    check_range("a_n", a_n, a_n > 0.0, "a_n > 0")?;
    check_range("eta", eta, eta >= 1.0, "eta >= 1")?;
    if d_mass_target <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let (set, set_mass) = top_prefix(s, d_mass_target);
    let ln_k = s.ln_base();
    let rhs = a_n.ln() - eta * ln_k;
    let ln_set = set_mass.ln();
    let prob: KahanSum = set
        .iter()
        .filter(|(i, _, _)| s.atoms()[*i].log_prob - ln_set <= rhs - tol(rhs))
        .map(|&(_, _, m)| m)
        .collect();
    Ok((prob.value(), a_n * f64::from(s.base()) * set_mass))
}

fn tol(x: f64) -> f64 {
    RATE_TOL * x.abs().max(1.0)
}

/// How `a_n` scales with the block length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnRule {
    /// `a_n = K^{-n gamma}`, used for first-order thresholds.
    FirstOrder { gamma: f64 },
    /// `a_n = K^{-sqrt(n) gamma}`, used for second-order thresholds.
    SecondOrder { gamma: f64 },
}

impl AnRule {
    pub fn gamma(&self) -> f64 {
        match *self {
            AnRule::FirstOrder { gamma } | AnRule::SecondOrder { gamma } => gamma,
        }
    }

    pub fn a_n(&self, n: u32, base: u32) -> f64 {
        let k = f64::from(base);
        match *self {
            AnRule::FirstOrder { gamma } => k.powf(-f64::from(n) * gamma),
            AnRule::SecondOrder { gamma } => k.powf(-f64::from(n).sqrt() * gamma),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: u32,
    pub eta: f64,
    pub eps: f64,
    pub a_n: f64,
    /// Raw achievability bound.
    pub upper: f64,
    /// Raw converse bound.
    pub lower: f64,
    /// Overflow of the achievability code at this `eta`.
    pub exact_code_overflow: f64,
    /// Exact optimum `delta*`.
    pub exact_optimal: f64,
}

impl BoundReport {
    /// `lower <= exact_code_overflow <= upper` and `exact_optimal <= upper`,
    /// with no tolerance.
    pub fn holds(&self) -> bool {
        self.lower <= self.exact_code_overflow
            && self.exact_code_overflow <= self.upper
            && self.exact_optimal <= self.upper
    }

    pub fn upper_clamped(&self) -> f64 {
        self.upper.clamp(0.0, 1.0)
    }

    pub fn lower_clamped(&self) -> f64 {
        self.lower.clamp(0.0, 1.0)
    }
}

/// One [`BoundReport`] per threshold, all sharing the achievability code
/// built at budget `eps`. The converse is evaluated on that code's decode
/// set.
pub fn sandwich_sweep(
    s: &Spectrum,
    eps: f64,
    eta_grid: &[f64],
    rule: AnRule,
) -> Result<Vec<BoundReport>> {
    check_range("gamma", rule.gamma(), rule.gamma() > 0.0, "gamma > 0")?;
    let code = construct_theorem2_code(s, eps)?;
    let a_n = rule.a_n(s.n(), s.base());
    eta_grid
        .iter()
        .map(|&eta| {
            Ok(BoundReport {
                n: s.n(),
                eta,
                eps,
                a_n,
                upper: theorem2_upper(s, eps, a_n, eta)?,
                lower: theorem3_lower(s, 1.0 - eps, a_n, eta)?,
                exact_code_overflow: code_overflow(&code, eta)?,
                exact_optimal: optimal_tradeoff(s, eta, eps)?.delta_star,
            })
        })
        .collect()
}
