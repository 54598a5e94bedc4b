//! Variable-length codes at type granularity.
//!
//! A code is described by which sequences of each spectrum atom are decoded
//! correctly and the codeword length they receive. Everything else is mapped
//! to the one-symbol junk codeword and counts as a decoding error.
//!
//! Codes are not required to be prefix-free. The only structural constraint
//! is the string-counting condition: at most `Σ_{i=1..t} K^i` correctly
//! decoded sequences may have codewords of length `<= t`, because that is
//! the number of distinct nonempty strings of length at most `t`.

use crate::error::{check_range, Error, Result};
use crate::numeric::{
    fraction_mass, le_mass, ln_big, seqs_to_cover, string_budget, KahanSum, MassBudget, MASS_TOL,
};
use crate::source::{type_of, Spectrum};
use num_bigint::BigUint;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Largest integer threshold accepted by [`optimal_tradeoff`]; the string
/// budget `K^t` is held exactly.
pub const MAX_THRESHOLD: f64 = 1.0e7;

/// Decoded sequences of one atom sharing a codeword length.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub atom: usize,
    pub count: BigUint,
    pub length: u64,
    /// Probability mass of the assigned sequences.
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpec {
    pub n: u32,
    pub base: u32,
    pub decode_set_mass: f64,
    pub error_mass: f64,
    pub assignments: Vec<Assignment>,
    pub junk_length: u64,
}

impl CodeSpec {
    /// Builds a code from explicit assignments. Sequences not covered by an
    /// assignment are junk.
    pub fn from_assignments(n: u32, base: u32, assignments: Vec<Assignment>) -> Self {
        let decode: f64 = assignments
            .iter()
            .map(|a| a.mass)
            .collect::<KahanSum>()
            .value();
        Self {
            n,
            base,
            decode_set_mass: decode,
            error_mass: (1.0 - decode).max(0.0),
            assignments,
            junk_length: 1,
        }
    }

    /// Number of correctly decoded sequences.
    pub fn decoded_count(&self) -> BigUint {
        self.assignments.iter().map(|a| &a.count).sum()
    }

    /// Checks the assignments against the atoms of `s`: every atom assigned
    /// at most once and never more sequences than it holds.
    pub fn fits(&self, s: &Spectrum) -> bool {
        let mut used: BTreeMap<usize, BigUint> = BTreeMap::new();
        for a in &self.assignments {
            *used.entry(a.atom).or_default() += &a.count;
        }
        used.iter()
            .all(|(&i, c)| i < s.atoms().len() && c <= &s.atoms()[i].count)
    }
}

/// Top-probability prefix of the spectrum with mass at least `target`,
/// splitting the boundary atom. Returns per-atom counts and the set mass.
pub(crate) fn top_prefix(s: &Spectrum, target: f64) -> (Vec<(usize, BigUint, f64)>, f64) {
    if target >= 1.0 {
        let all = s
            .atoms()
            .iter()
            .enumerate()
            .map(|(i, a)| (i, a.count.clone(), a.mass));
        return (all.collect(), s.total_mass());
    }
    let mut taken = Vec::new();
    let mut covered = KahanSum::new();
    for (i, atom) in s.atoms().iter().enumerate() {
        let need = target - covered.value();
        if need <= MASS_TOL * target.max(1e-300) {
            break;
        }
        if atom.mass < need * (1.0 - MASS_TOL) {
            covered.add(atom.mass);
            taken.push((i, atom.count.clone(), atom.mass));
            continue;
        }
        let k = seqs_to_cover(need, atom.log_prob, &atom.count);
        let m = fraction_mass(atom.mass, &k, &atom.count);
        covered.add(m);
        taken.push((i, k, m));
        break;
    }
    (taken, covered.value())
}

/// `ceil(-log_K(ratio))` for a log-ratio `ln_ratio <= 0`, at least 1.
fn codeword_length(ln_ratio: f64, ln_base: f64) -> u64 {
    let v = -ln_ratio / ln_base;
    let len = (v - 1e-12 * v.abs().max(1.0)).ceil();
    len.max(1.0) as u64
}

/// The achievability code: decode the smallest top-probability set `A` with
/// `P(A) >= 1 - eps` and give `x in A` a codeword of length
/// `ceil(-log_K(P(x) / P(A)))`.
pub fn construct_theorem2_code(s: &Spectrum, eps: f64) -> Result<CodeSpec> {
    check_range("eps", eps, (0.0..1.0).contains(&eps), "0 <= eps < 1")?;
    let (prefix, set_mass) = top_prefix(s, 1.0 - eps);
    let ln_set = set_mass.ln();
    let ln_k = s.ln_base();
    let assignments: Vec<Assignment> = prefix
        .into_iter()
        .map(|(i, count, mass)| Assignment {
            atom: i,
            count,
            length: codeword_length(s.atoms()[i].log_prob - ln_set, ln_k),
            mass,
        })
        .collect();
    let mut code = CodeSpec::from_assignments(s.n(), s.base(), assignments);
    code.decode_set_mass = set_mass;
    code.error_mass = leftover_mass(s, &code);
    Ok(code)
}

fn leftover_mass(s: &Spectrum, code: &CodeSpec) -> f64 {
    let mut used: BTreeMap<usize, BigUint> = BTreeMap::new();
    for a in &code.assignments {
        *used.entry(a.atom).or_default() += &a.count;
    }
    s.atoms()
        .iter()
        .enumerate()
        .map(|(i, atom)| match used.get(&i) {
            Some(c) => fraction_mass(atom.mass, &(&atom.count - c), &atom.count),
            None => atom.mass,
        })
        .collect::<KahanSum>()
        .value()
}

/// `Pr{ l(phi(X^n)) > eta }`. Junk sequences have length 1 and never
/// overflow.
pub fn code_overflow(c: &CodeSpec, eta: f64) -> Result<f64> {
    check_range("eta", eta, eta >= 1.0, "eta >= 1")?;
    Ok(c.assignments
        .iter()
        .filter(|a| a.length as f64 > eta)
        .map(|a| a.mass)
        .collect::<KahanSum>()
        .value())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingViolation {
    pub threshold: u64,
    pub decoded: BigUint,
    pub budget: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingReport {
    pub holds: bool,
    /// Distinct codeword lengths checked.
    pub thresholds_checked: usize,
    pub first_violation: Option<CountingViolation>,
}

/// Exact check of `|{decoded x : l(x) <= t}| <= Σ_{i=1..t} K^i` at every
/// distinct codeword length `t`.
pub fn validate_counting_condition(c: &CodeSpec) -> CountingReport {
    let mut by_length: BTreeMap<u64, BigUint> = BTreeMap::new();
    for a in &c.assignments {
        *by_length.entry(a.length).or_default() += &a.count;
    }
    let mut cumulative = BigUint::zero();
    for (&t, count) in &by_length {
        cumulative += count;
        let budget = string_budget(c.base, t);
        if cumulative > budget {
            return CountingReport {
                holds: false,
                thresholds_checked: by_length.len(),
                first_violation: Some(CountingViolation {
                    threshold: t,
                    decoded: cumulative,
                    budget,
                }),
            };
        }
    }
    CountingReport {
        holds: true,
        thresholds_checked: by_length.len(),
        first_violation: None,
    }
}

/// Exact minimal overflow at threshold `eta` under error budget `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub n: u32,
    pub eta: f64,
    pub eps: f64,
    pub delta_star: f64,
    /// Strings of length at most `floor(eta)`.
    pub m: BigUint,
}

/// Minimal overflow over deterministic codes whose short codewords number
/// at most `m`, given error budget `eps`.
///
/// The `m` heaviest sequences get short codewords. The error budget then
/// discards sequences from the remainder heaviest-first, skipping those that
/// no longer fit. What is left overflows.
pub fn overflow_with_budget(s: &Spectrum, m: &BigUint, eps: f64) -> f64 {
    let mut slots = m.clone();
    let mut budget = MassBudget::new(eps);
    let mut left = KahanSum::new();
    for atom in s.atoms() {
        let rest = if slots.is_zero() {
            atom.count.clone()
        } else if atom.count <= slots {
            slots -= &atom.count;
            continue;
        } else {
            let r = &atom.count - &slots;
            slots = BigUint::zero();
            r
        };
        let junk = budget.fit(atom.log_prob, &rest);
        let junk_mass = fraction_mass(atom.mass, &junk, &atom.count);
        budget.spend(junk_mass);
        left.add(fraction_mass(atom.mass, &(&rest - &junk), &atom.count));
    }
    left.value().max(0.0)
}

/// Exact `delta*_n(eta, eps)` with `M = Σ_{i=1..floor(eta)} K^i`.
pub fn optimal_tradeoff(s: &Spectrum, eta: f64, eps: f64) -> Result<TradeoffPoint> {
    check_range(
        "eta",
        eta,
        (1.0..=MAX_THRESHOLD).contains(&eta),
        "1 <= eta <= 1e7",
    )?;
    check_range("eps", eps, (0.0..1.0).contains(&eps), "0 <= eps < 1")?;
    let m = string_budget(s.base(), eta.floor() as u64);
    let delta_star = overflow_with_budget(s, &m, eps);
    Ok(TradeoffPoint {
        n: s.n(),
        eta,
        eps,
        delta_star,
        m,
    })
}

/// Smallest integer `eta >= 1` with `delta*(eta, eps) <= delta`.
pub fn optimal_threshold(s: &Spectrum, eps: f64, delta: f64) -> Result<u64> {
    check_range("eps", eps, eps >= 0.0, "eps >= 0")?;
    check_range("delta", delta, delta >= 0.0, "delta >= 0")?;
    check_range(
        "eps+delta",
        eps + delta,
        eps + delta < 1.0,
        "eps + delta < 1",
    )?;
    let ln_k = s.ln_base();
    let ln_total = ln_big(&s.total_count());
    let mut hi = (ln_total / ln_k - 1e-9).ceil().max(0.0) as u64 + 1;
    let mut lo = 1u64;
    let ok = |eta: u64| -> bool {
        let m = string_budget(s.base(), eta);
        le_mass(overflow_with_budget(s, &m, eps), delta)
    };
    if !ok(hi) {
        // unreachable for a normalized spectrum; keep doubling defensively
        while !ok(hi) {
            hi *= 2;
        }
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Monte Carlo estimate of a code's error and overflow rates.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripReport {
    pub samples: usize,
    pub eta: f64,
    pub empirical_error: f64,
    pub empirical_overflow: f64,
    pub exact_error: f64,
    pub exact_overflow: f64,
}

impl RoundtripReport {
    /// Binomial standard deviation of the empirical error rate.
    pub fn error_sigma(&self) -> f64 {
        binomial_sigma(self.exact_error, self.samples)
    }

    pub fn overflow_sigma(&self) -> f64 {
        binomial_sigma(self.exact_overflow, self.samples)
    }
}

fn binomial_sigma(p: f64, samples: usize) -> f64 {
    (p * (1.0 - p) / samples as f64).sqrt()
}

/// Decodes sampled sequences with the deterministic code realized by `c`:
/// inside an atom, the sequences of lowest rank (types in lexicographic
/// order, then lexicographic permutation rank) are the decoded ones.
pub fn simulate_roundtrip(
    c: &CodeSpec,
    s: &Spectrum,
    samples: &[Vec<usize>],
    eta: f64,
) -> Result<RoundtripReport> {
    check_range("eta", eta, eta >= 1.0, "eta >= 1")?;
    if !c.fits(s) {
        return Err(Error::InvalidDistribution(
            "code assignments do not match the spectrum".into(),
        ));
    }
    let mut per_atom: BTreeMap<usize, Vec<(BigUint, u64)>> = BTreeMap::new();
    for a in &c.assignments {
        per_atom
            .entry(a.atom)
            .or_default()
            .push((a.count.clone(), a.length));
    }
    let alphabet = s.model().alphabet_size();
    let (mut errors, mut overflows) = (0usize, 0usize);
    for seq in samples {
        let t = type_of(seq, alphabet);
        let Some(atom) = s.atom_of_type(&t) else {
            errors += 1;
            continue;
        };
        let Some(groups) = per_atom.get(&atom) else {
            errors += 1;
            continue;
        };
        let rank = rank_in_atom(s, atom, &t, seq);
        let mut start = BigUint::zero();
        let mut length = None;
        for (count, len) in groups {
            let end = &start + count;
            if rank < end {
                length = Some(*len);
                break;
            }
            start = end;
        }
        match length {
            None => errors += 1,
            Some(l) if l as f64 > eta => overflows += 1,
            Some(_) => {}
        }
    }
    let total = samples.len().max(1) as f64;
    Ok(RoundtripReport {
        samples: samples.len(),
        eta,
        empirical_error: errors as f64 / total,
        empirical_overflow: overflows as f64 / total,
        exact_error: c.error_mass,
        exact_overflow: code_overflow(c, eta)?,
    })
}

fn multinomial(counts: &[u32]) -> BigUint {
    let mut acc = BigUint::from(1u32);
    let mut total = 0u32;
    for &c in counts {
        for i in 1..=c {
            total += 1;
            acc = acc * BigUint::from(total) / BigUint::from(i);
        }
    }
    acc
}

/// Rank of `seq` among all sequences of its atom.
fn rank_in_atom(s: &Spectrum, atom: usize, t: &[u32], seq: &[usize]) -> BigUint {
    let mut rank = BigUint::zero();
    for other in &s.atoms()[atom].types {
        if other.as_slice() == t {
            break;
        }
        rank += multinomial(other);
    }
    rank + permutation_rank(t, seq)
}

/// Lexicographic rank of `seq` among the arrangements of its type `t`.
fn permutation_rank(t: &[u32], seq: &[usize]) -> BigUint {
    let mut counts = t.to_vec();
    let mut remaining = seq.len() as u64;
    let mut arrangements = multinomial(t);
    let mut rank = BigUint::zero();
    for &x in seq {
        for &cy in counts.iter().take(x) {
            if cy > 0 {
                rank += &arrangements * BigUint::from(cy) / BigUint::from(remaining);
            }
        }
        arrangements = arrangements * BigUint::from(counts[x]) / BigUint::from(remaining);
        counts[x] -= 1;
        remaining -= 1;
    }
    rank
}
