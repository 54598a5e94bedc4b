//! Information-spectrum functionals evaluated exactly on a [`Spectrum`].
//!
//! Rates are self-information per symbol in base-`K` units:
//! `rate(x) = -log_K P(x) / n`. Atoms are stored most-probable first, so
//! rates increase with the atom index and every "rate above R" region is a
//! suffix of the atom list.

use crate::error::{check_range, Result};
use crate::numeric::{
    fraction_mass, ln_big, seqs_to_cover, KahanSum, MassBudget, MASS_TOL, RATE_TOL,
};
use crate::source::Spectrum;
use num_bigint::BigUint;
use num_traits::Zero;

/// Which inequality selects the tail `{rate ? R}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    /// `rate > R`
    Strict,
    /// `rate >= R`
    NonStrict,
}

impl Comparator {
    pub fn holds(self, rate: f64, threshold: f64) -> bool {
        match self {
            Comparator::Strict => rate > threshold + RATE_TOL,
            Comparator::NonStrict => rate >= threshold - RATE_TOL,
        }
    }
}

/// An atom split at sequence granularity.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySplit {
    pub atom: usize,
    /// Sequences of the atom placed on the budgeted side of the split.
    pub taken: BigUint,
}

/// Optimizer of `inf { Pr{rate ? R, X^n in A} : P(A) >= 1 - eps }`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedTailResult {
    pub value: f64,
    /// `P(A)` of the optimizing set.
    pub set_mass: f64,
    /// First tail atom that is only partially removed from `A`.
    pub boundary_split: Option<BoundarySplit>,
}

/// Index of the first atom in the tail `{rate cmp R}`.
fn tail_start(s: &Spectrum, rate: f64, cmp: Comparator) -> usize {
    let ln_k = s.ln_base();
    let n = s.n();
    s.atoms()
        .partition_point(|a| !cmp.holds(a.rate(n, ln_k), rate))
}

/// `Pr{ rate(X^n) cmp R }`.
pub fn tail_mass(s: &Spectrum, rate: f64, cmp: Comparator) -> f64 {
    let start = tail_start(s, rate, cmp);
    s.atoms()[start..]
        .iter()
        .map(|a| a.mass)
        .collect::<KahanSum>()
        .value()
}

/// Size of the smallest set of sequences with mass at least `1 - gamma`.
pub fn smooth_max_count(s: &Spectrum, gamma: f64) -> Result<BigUint> {
    check_range(
        "gamma",
        gamma,
        (0.0..1.0).contains(&gamma),
        "0 <= gamma < 1",
    )?;
    if gamma == 0.0 {
        return Ok(s.total_count());
    }
    let target = 1.0 - gamma;
    let mut covered = KahanSum::new();
    let mut count = BigUint::zero();
    for atom in s.atoms() {
        let need = target - covered.value();
        if need <= MASS_TOL * target {
            break;
        }
        if atom.mass < need * (1.0 - MASS_TOL) {
            covered.add(atom.mass);
            count += &atom.count;
            continue;
        }
        count += seqs_to_cover(need, atom.log_prob, &atom.count);
        break;
    }
    Ok(count)
}

/// Smooth max entropy `log_K` of [`smooth_max_count`].
pub fn smooth_max_entropy(s: &Spectrum, gamma: f64) -> Result<f64> {
    let count = smooth_max_count(s, gamma)?;
    Ok(ln_big(&count) / s.ln_base())
}

/// Exact restricted infimum at sequence granularity.
///
/// Sequences outside the tail cost nothing, so `A` keeps all of them. The
/// error budget `eps` is spent removing tail sequences from `A`, heaviest
/// first, skipping any sequence that no longer fits the remaining budget.
pub fn restricted_tail_inf(
    s: &Spectrum,
    eps: f64,
    rate: f64,
    cmp: Comparator,
) -> Result<RestrictedTailResult> {
    check_range("eps", eps, (0.0..1.0).contains(&eps), "0 <= eps < 1")?;
    let start = tail_start(s, rate, cmp);
    let mut budget = MassBudget::new(eps);
    let mut removed = KahanSum::new();
    let mut kept = KahanSum::new();
    let mut boundary_split = None;
    for (i, atom) in s.atoms().iter().enumerate().skip(start) {
        let take = budget.fit(atom.log_prob, &atom.count);
        let out = fraction_mass(atom.mass, &take, &atom.count);
        let rest = &atom.count - &take;
        if !take.is_zero() && !rest.is_zero() && boundary_split.is_none() {
            boundary_split = Some(BoundarySplit {
                atom: i,
                taken: take,
            });
        }
        removed.add(out);
        kept.add(fraction_mass(atom.mass, &rest, &atom.count));
        budget.spend(out);
    }
    Ok(RestrictedTailResult {
        value: kept.value().max(0.0),
        set_mass: 1.0 - removed.value(),
        boundary_split,
    })
}

fn check_budgets(eps: f64, delta: f64) -> Result<()> {
    check_range("eps", eps, eps >= 0.0, "eps >= 0")?;
    check_range("delta", delta, delta >= 0.0, "delta >= 0")?;
    check_range(
        "eps+delta",
        eps + delta,
        eps + delta < 1.0,
        "eps + delta < 1",
    )
}

/// Smallest atom rate `r` with `Pr{rate > r} <= eps + delta`: the finite-`n`
/// counterpart of the optimum first-order threshold, in base-`K` units.
pub fn finite_n_first_order(s: &Spectrum, eps: f64, delta: f64) -> Result<f64> {
    check_budgets(eps, delta)?;
    Ok(s.rate(quantile_atom(s, eps + delta)))
}

/// Index of the atom holding the upper `gamma`-quantile rate.
pub fn quantile_atom(s: &Spectrum, gamma: f64) -> usize {
    let atoms = s.atoms();
    let mut above = KahanSum::new();
    // walk from the largest rate down while the mass above stays within gamma
    let mut j = atoms.len() - 1;
    while j > 0 {
        let next = above.value() + atoms[j].mass;
        if next <= gamma + MASS_TOL * gamma.max(1e-300) {
            above.add(atoms[j].mass);
            j -= 1;
        } else {
            break;
        }
    }
    j
}

/// Smallest atom rate `r` at which the restricted infimum with strict tail
/// `{rate > r}` is within `delta`. Never below [`finite_n_first_order`]; the
/// two differ only through sequence granularity of the error budget.
pub fn restricted_first_order(s: &Spectrum, eps: f64, delta: f64) -> Result<f64> {
    check_budgets(eps, delta)?;
    let atoms = s.atoms();
    let (mut lo, mut hi) = (0usize, atoms.len() - 1);
    // value(rate_j) is nonincreasing in j and zero at the last atom
    while lo < hi {
        let mid = (lo + hi) / 2;
        let v = restricted_tail_inf(s, eps, s.rate(mid), Comparator::Strict)?.value;
        if v <= delta + MASS_TOL * delta.max(1e-300) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(s.rate(lo))
}

/// `sqrt(n) * (finite_n_first_order - R)`: the second-order offset placing
/// `R + L/sqrt(n)` at the `(eps+delta)` quantile.
pub fn finite_n_second_order(s: &Spectrum, eps: f64, delta: f64, rate: f64) -> Result<f64> {
    let first = finite_n_first_order(s, eps, delta)?;
    Ok(f64::from(s.n()).sqrt() * (first - rate))
}
