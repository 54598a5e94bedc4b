//! Closed-form first- and second-order predictions for i.i.d. sources and
//! the measurement loops that compare them with exact finite-`n` values.

use crate::codes::optimal_threshold;
use crate::error::{check_range, Result};
use crate::numeric::KahanSum;
use crate::source::{iid_spectrum, switching_spectrum, Distribution, SwitchingSchedule};
use crate::spectrum::finite_n_first_order;
use rayon::prelude::*;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{PI, SQRT_2};

/// Tolerance on `R - H` below which the rate is treated as the entropy.
pub const ENTROPY_MATCH_TOL: f64 = 1e-12;

/// Entropy in base-`K` units.
pub fn entropy(d: &Distribution) -> f64 {
    let ln_k = d.ln_base();
    d.probs()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln() / ln_k)
        .collect::<KahanSum>()
        .value()
}

/// Variance of the self-information `-log_K P(X)`.
pub fn varentropy(d: &Distribution) -> f64 {
    let ln_k = d.ln_base();
    let h = entropy(d);
    d.probs()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| {
            let dev = -p.ln() / ln_k - h;
            p * dev * dev
        })
        .collect::<KahanSum>()
        .value()
}

/// Upper-tail Gaussian integral `(1/sqrt(2 pi)) ∫_x^∞ e^{-t²/2} dt`.
///
/// This is the function the second-order formulas call `Φ`; with the upper
/// tail, `√V Φ⁻¹(γ)` is positive for `γ < 1/2`.
pub fn q_upper(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Inverse of [`q_upper`] on `(0, 1)`.
pub fn q_upper_inv(gamma: f64) -> Result<f64> {
    check_range("gamma", gamma, gamma > 0.0 && gamma < 1.0, "0 < gamma < 1")?;
    let mut x = SQRT_2 * erfc_inv(2.0 * gamma);
    // Newton on the density polishes the starting guess
    for _ in 0..2 {
        let density = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        if density <= 0.0 {
            break;
        }
        x += (q_upper(x) - gamma) / density;
    }
    Ok(x)
}

/// Second-order optimum threshold `L(eps, delta, R)` of an i.i.d. source:
/// `+inf` below the entropy, `-inf` above it and `√V Q⁻¹(eps+delta)` at it.
pub fn second_order_threshold(d: &Distribution, eps: f64, delta: f64, rate: f64) -> Result<f64> {
    let gamma = eps + delta;
    check_range("eps", eps, eps >= 0.0, "eps >= 0")?;
    check_range("delta", delta, delta >= 0.0, "delta >= 0")?;
    check_range(
        "eps+delta",
        gamma,
        gamma > 0.0 && gamma < 1.0,
        "0 < eps + delta < 1",
    )?;
    let h = entropy(d);
    if rate - h > ENTROPY_MATCH_TOL {
        Ok(f64::NEG_INFINITY)
    } else if h - rate > ENTROPY_MATCH_TOL {
        Ok(f64::INFINITY)
    } else {
        Ok(varentropy(d).sqrt() * q_upper_inv(gamma)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanLengthConstants {
    /// Optimum first-order mean codeword length `(1 - eps) H`.
    pub r2: f64,
    /// Second-order mean-length constant `-√(V/2π) e^{-Q⁻¹(eps)²/2}`;
    /// defined for `eps` in `(0, 1)` only.
    pub kpv: Option<f64>,
}

pub fn mean_length_constants(d: &Distribution, eps: f64) -> Result<MeanLengthConstants> {
    check_range("eps", eps, (0.0..1.0).contains(&eps), "0 <= eps < 1")?;
    let r2 = (1.0 - eps) * entropy(d);
    let kpv = if eps > 0.0 {
        let q = q_upper_inv(eps)?;
        Some(-(varentropy(d) / (2.0 * PI)).sqrt() * (-0.5 * q * q).exp())
    } else {
        None
    };
    Ok(MeanLengthConstants { r2, kpv })
}

/// Second-order threshold around the mean-length rate `R2 = (1 - eps) H`:
/// `√V Q⁻¹(delta)` when `eps = 0`, `+inf` otherwise.
pub fn second_order_at_r2(d: &Distribution, eps: f64, delta: f64) -> Result<f64> {
    check_range("eps", eps, eps >= 0.0, "eps >= 0")?;
    check_range("delta", delta, delta >= 0.0, "delta >= 0")?;
    check_range(
        "eps+delta",
        eps + delta,
        eps + delta < 1.0,
        "eps + delta < 1",
    )?;
    if eps > 0.0 || delta == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(varentropy(d).sqrt() * q_upper_inv(delta)?)
}

/// Exact finite-`n` optimum threshold compared with the closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePoint {
    pub n: u32,
    pub eta_star: u64,
    /// `|eta*/n - H|`
    pub first_order_gap: f64,
    /// `(eta* - nH) / sqrt(n)`
    pub second_order_value: f64,
    /// `|second_order_value - L_pred|`
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub h: f64,
    pub v: f64,
    pub r1: f64,
    pub r2: f64,
    pub l_pred: f64,
    pub kpv: Option<f64>,
    pub measurements: Vec<ConvergencePoint>,
}

/// Closed-form quantities only, with `L_pred` taken at `R = H`.
pub fn asymptotic_summary(d: &Distribution, eps: f64, delta: f64) -> Result<AsymptoticReport> {
    let h = entropy(d);
    let constants = mean_length_constants(d, eps)?;
    Ok(AsymptoticReport {
        h,
        v: varentropy(d),
        r1: h,
        r2: constants.r2,
        l_pred: second_order_threshold(d, eps, delta, h)?,
        kpv: constants.kpv,
        measurements: Vec::new(),
    })
}

/// Exact `eta*_n` on every grid point against the first- and second-order
/// predictions. Grid points are evaluated in parallel; output keeps the
/// grid order.
pub fn convergence_study(
    d: &Distribution,
    eps: f64,
    delta: f64,
    n_grid: &[u32],
) -> Result<AsymptoticReport> {
    let mut report = asymptotic_summary(d, eps, delta)?;
    let (h, l_pred) = (report.h, report.l_pred);
    report.measurements = n_grid
        .par_iter()
        .map(|&n| {
            let s = iid_spectrum(d, n)?;
            let eta_star = optimal_threshold(&s, eps, delta)?;
            let nf = f64::from(n);
            let second = (eta_star as f64 - nf * h) / nf.sqrt();
            Ok(ConvergencePoint {
                n,
                eta_star,
                first_order_gap: (eta_star as f64 / nf - h).abs(),
                second_order_value: second,
                gap: (second - l_pred).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimisticPoint {
    pub n: u32,
    pub value: f64,
    pub component: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimisticReport {
    pub points: Vec<OptimisticPoint>,
    pub limsup_estimate: f64,
    pub liminf_estimate: f64,
    pub component_entropies: [f64; 2],
}

/// Default share of the grid (its last points) used for limit estimates.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;

/// Finite-`n` first-order thresholds of a switching source along a grid.
/// The limit estimates are the max and min over the last `tail_fraction`
/// of the grid.
pub fn optimistic_study(
    s: &SwitchingSchedule,
    eps: f64,
    delta: f64,
    n_grid: &[u32],
    tail_fraction: f64,
) -> Result<OptimisticReport> {
    check_range(
        "eps+delta",
        eps + delta,
        eps + delta < 1.0,
        "eps + delta < 1",
    )?;
    check_range(
        "tail_fraction",
        tail_fraction,
        tail_fraction > 0.0 && tail_fraction <= 1.0,
        "0 < tail_fraction <= 1",
    )?;
    check_range(
        "n_grid",
        n_grid.len() as f64,
        !n_grid.is_empty(),
        "nonempty grid",
    )?;
    let points = n_grid
        .par_iter()
        .map(|&n| {
            let spectrum = switching_spectrum(s, n)?;
            Ok(OptimisticPoint {
                n,
                value: finite_n_first_order(&spectrum, eps, delta)?,
                component: s.component_index(n),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tail_len = ((points.len() as f64 * tail_fraction).ceil() as usize).clamp(1, points.len());
    let tail = &points[points.len() - tail_len..];
    let limsup = tail
        .iter()
        .map(|p| p.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let liminf = tail.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    let [a, b] = s.components();
    Ok(OptimisticReport {
        points,
        limsup_estimate: limsup,
        liminf_estimate: liminf,
        component_entropies: [entropy(a), entropy(b)],
    })
}
