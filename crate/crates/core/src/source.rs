//! Source models and their exact self-information spectra.
//!
//! Every implemented source assigns the same probability to all sequences
//! sharing an empirical type, so the spectrum of `X^n` is built by walking
//! the type classes instead of the `|X|^n` sequences. Counts are exact big
//! integers; masses are `count * P(x)` evaluated in the log domain.

use crate::error::{check_range, Error, Result};
use crate::numeric::{ln_big, log_add_exp, KahanSum};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default ceiling on the number of type classes a spectrum may enumerate.
pub const DEFAULT_CLASS_CEILING: u64 = 5_000_000;

/// Normalization tolerance for spectra.
pub const MASS_SUM_TOL: f64 = 1e-9;
/// Relaxed normalization tolerance for `n > 1000` on alphabets above two.
pub const MASS_SUM_TOL_LARGE: f64 = 1e-6;

/// Two types whose log-probabilities differ by less than this (relative)
/// are treated as one probability level and merged into a single atom.
const MERGE_TOL: f64 = 1e-12;

/// A finite probability vector together with the code alphabet size `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
    base: u32,
}

impl Distribution {
    /// Validates and normalizes `probs`. Entries down to `-1e-15` are clamped
    /// to zero; the sum must be within `1e-9` of one.
    pub fn new(probs: &[f64], base: u32) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidBase(base));
        }
        if probs.is_empty() {
            return Err(Error::InvalidDistribution(
                "empty probability vector".into(),
            ));
        }
        let mut clean = Vec::with_capacity(probs.len());
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < -1e-15 {
                return Err(Error::InvalidDistribution(format!(
                    "entry {i} = {p} is negative or non-finite"
                )));
            }
            clean.push(p.max(0.0));
        }
        let sum: f64 = clean.iter().copied().collect::<KahanSum>().value();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, not 1"
            )));
        }
        for p in &mut clean {
            *p /= sum;
        }
        Ok(Self { probs: clean, base })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn ln_base(&self) -> f64 {
        f64::from(self.base).ln()
    }

    /// Symbols with positive probability.
    pub fn support(&self) -> Vec<usize> {
        (0..self.probs.len())
            .filter(|&i| self.probs[i] > 0.0)
            .collect()
    }

    fn ln_probs(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.ln()).collect()
    }

    /// Natural-log probability of a sequence with symbol counts `counts`.
    pub fn type_log_prob(&self, counts: &[u32]) -> f64 {
        type_log_prob(&self.ln_probs(), counts)
    }
}

fn type_log_prob(ln_probs: &[f64], counts: &[u32]) -> f64 {
    let mut acc = 0.0;
    for (&c, &lp) in counts.iter().zip(ln_probs) {
        if c > 0 {
            acc += f64::from(c) * lp;
        }
    }
    acc
}

/// How a switching source picks its component at block length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchRule {
    /// Component `even` when `ceil(log2 n)` is even, `odd` otherwise.
    CeilLog2Parity { even: usize, odd: usize },
    /// Always the same component.
    Fixed(usize),
}

impl SwitchRule {
    pub fn component(&self, n: u32) -> usize {
        match *self {
            SwitchRule::CeilLog2Parity { even, odd } => {
                if ceil_log2(n).is_multiple_of(2) {
                    even
                } else {
                    odd
                }
            }
            SwitchRule::Fixed(i) => i,
        }
    }
}

fn ceil_log2(n: u32) -> u32 {
    assert!(n >= 1, "block length must be positive");
    u32::BITS - (n - 1).leading_zeros()
}

/// A general source that is i.i.d. at each block length, with the generic
/// distribution chosen per `n` by a rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSchedule {
    components: [Distribution; 2],
    rule: SwitchRule,
}

impl SwitchingSchedule {
    pub fn new(first: Distribution, second: Distribution, rule: SwitchRule) -> Result<Self> {
        check_same_alphabet(&first, &second)?;
        let idx_ok = match rule {
            SwitchRule::CeilLog2Parity { even, odd } => even < 2 && odd < 2,
            SwitchRule::Fixed(i) => i < 2,
        };
        if !idx_ok {
            return Err(Error::InvalidDistribution(
                "switch rule refers to a component other than 0 or 1".into(),
            ));
        }
        Ok(Self {
            components: [first, second],
            rule,
        })
    }

    /// The built-in schedule: first component when `ceil(log2 n)` is even.
    pub fn alternating(first: Distribution, second: Distribution) -> Result<Self> {
        Self::new(
            first,
            second,
            SwitchRule::CeilLog2Parity { even: 0, odd: 1 },
        )
    }

    pub fn components(&self) -> &[Distribution; 2] {
        &self.components
    }

    pub fn rule(&self) -> SwitchRule {
        self.rule
    }

    pub fn component_index(&self, n: u32) -> usize {
        self.rule.component(n)
    }

    pub fn component_at(&self, n: u32) -> &Distribution {
        &self.components[self.component_index(n)]
    }
}

fn check_same_alphabet(a: &Distribution, b: &Distribution) -> Result<()> {
    if a.alphabet_size() != b.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            left: a.alphabet_size(),
            right: b.alphabet_size(),
        });
    }
    if a.base() != b.base() {
        return Err(Error::InvalidDistribution(format!(
            "components use different code bases {} and {}",
            a.base(),
            b.base()
        )));
    }
    Ok(())
}

/// The per-`n` probability law a spectrum was built from.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockModel {
    Iid(Distribution),
    Mixed {
        first: Distribution,
        second: Distribution,
        weight: f64,
    },
}

impl BlockModel {
    pub fn alphabet_size(&self) -> usize {
        match self {
            BlockModel::Iid(d) => d.alphabet_size(),
            BlockModel::Mixed { first, .. } => first.alphabet_size(),
        }
    }

    pub fn base(&self) -> u32 {
        match self {
            BlockModel::Iid(d) => d.base(),
            BlockModel::Mixed { first, .. } => first.base(),
        }
    }

    /// Log-probability of one sequence of the given type.
    pub fn type_log_prob(&self, counts: &[u32]) -> f64 {
        match self {
            BlockModel::Iid(d) => d.type_log_prob(counts),
            BlockModel::Mixed {
                first,
                second,
                weight,
            } => log_add_exp(
                weight.ln() + first.type_log_prob(counts),
                (1.0 - weight).ln() + second.type_log_prob(counts),
            ),
        }
    }

    fn support(&self) -> Vec<usize> {
        match self {
            BlockModel::Iid(d) => d.support(),
            BlockModel::Mixed { first, second, .. } => (0..first.alphabet_size())
                .filter(|&i| first.probs()[i] > 0.0 || second.probs()[i] > 0.0)
                .collect(),
        }
    }
}

/// All sequences of one probability level.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumAtom {
    /// Natural log of the probability of any single sequence in the atom.
    pub log_prob: f64,
    /// Number of sequences in the atom.
    pub count: BigUint,
    /// `count * exp(log_prob)`.
    pub mass: f64,
    /// Type classes merged into this atom, as symbol-count vectors over the
    /// full alphabet, in lexicographic order.
    pub types: Vec<Vec<u32>>,
}

impl SpectrumAtom {
    /// Self-information rate of the atom's sequences in base-`K` units per
    /// symbol.
    pub fn rate(&self, n: u32, ln_base: f64) -> f64 {
        -self.log_prob / (f64::from(n) * ln_base)
    }
}

/// Exact distribution of the per-sequence probability of `X^n`, atoms
/// ordered from the most probable sequences to the least.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    n: u32,
    base: u32,
    atoms: Vec<SpectrumAtom>,
    model: BlockModel,
}

impl Spectrum {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn ln_base(&self) -> f64 {
        f64::from(self.base).ln()
    }

    pub fn atoms(&self) -> &[SpectrumAtom] {
        &self.atoms
    }

    pub fn model(&self) -> &BlockModel {
        &self.model
    }

    /// Rate of atom `i` in base-`K` units per symbol.
    pub fn rate(&self, i: usize) -> f64 {
        self.atoms[i].rate(self.n, self.ln_base())
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.mass)
            .collect::<KahanSum>()
            .value()
    }

    pub fn total_count(&self) -> BigUint {
        self.atoms.iter().map(|a| &a.count).sum()
    }

    /// Index of the atom holding sequences of the given type, if the type
    /// has positive probability.
    pub fn atom_of_type(&self, counts: &[u32]) -> Option<usize> {
        let lp = self.model.type_log_prob(counts);
        if !lp.is_finite() {
            return None;
        }
        // atoms are sorted by log_prob descending
        let pos = self
            .atoms
            .partition_point(|a| a.log_prob > lp + merge_slack(lp));
        (pos..self.atoms.len().min(pos + 2)).find(|&i| {
            self.atoms[i]
                .types
                .binary_search_by(|t| t.as_slice().cmp(counts))
                .is_ok()
        })
    }
}

fn merge_slack(lp: f64) -> f64 {
    MERGE_TOL * lp.abs().max(1.0)
}

/// Number of type classes of length-`n` sequences over `symbols` symbols.
pub fn type_class_count(n: u32, symbols: usize) -> BigUint {
    if symbols == 0 {
        return BigUint::from(0u32);
    }
    binomial(u64::from(n) + symbols as u64 - 1, symbols as u64 - 1)
}

fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Calls `visit(counts, multinomial)` for every composition of `n` over the
/// `support` symbols (other entries of `counts` stay zero).
fn for_each_type(
    n: u32,
    alphabet: usize,
    support: &[usize],
    visit: &mut impl FnMut(&[u32], &BigUint),
) {
    fn rec(
        level: usize,
        remaining: u32,
        support: &[usize],
        counts: &mut [u32],
        mult: &BigUint,
        visit: &mut impl FnMut(&[u32], &BigUint),
    ) {
        let sym = support[level];
        if level + 1 == support.len() {
            counts[sym] = remaining;
            visit(counts, mult);
            counts[sym] = 0;
            return;
        }
        let mut binom = BigUint::one();
        for k in 0..=remaining {
            counts[sym] = k;
            let next = mult * &binom;
            rec(level + 1, remaining - k, support, counts, &next, visit);
            binom = binom * BigUint::from(remaining - k) / BigUint::from(k + 1);
        }
        counts[sym] = 0;
    }
    let mut counts = vec![0u32; alphabet];
    if !support.is_empty() {
        rec(0, n, support, &mut counts, &BigUint::one(), visit);
    }
}

/// Spectrum construction with an explicit type-class ceiling.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumBuilder {
    pub class_ceiling: u64,
}

impl Default for SpectrumBuilder {
    fn default() -> Self {
        Self {
            class_ceiling: DEFAULT_CLASS_CEILING,
        }
    }
}

impl SpectrumBuilder {
    pub fn build(&self, model: BlockModel, n: u32) -> Result<Spectrum> {
        check_range("n", f64::from(n), n >= 1, "n >= 1")?;
        let support = model.support();
        let classes = type_class_count(n, support.len());
        if classes > BigUint::from(self.class_ceiling) {
            return Err(Error::CeilingExceeded {
                classes: classes.to_string(),
                ceiling: self.class_ceiling,
            });
        }
        let capacity = classes.to_usize().unwrap_or(0);
        let mut raw: Vec<(f64, BigUint, Vec<u32>)> = Vec::with_capacity(capacity);
        let mut bad: Option<Vec<u32>> = None;
        for_each_type(n, model.alphabet_size(), &support, &mut |counts, mult| {
            let lp = model.type_log_prob(counts);
            if lp == f64::NEG_INFINITY {
                return;
            }
            if !lp.is_finite() && bad.is_none() {
                bad = Some(counts.to_vec());
            }
            raw.push((lp, mult.clone(), counts.to_vec()));
        });
        if let Some(t) = bad {
            return Err(Error::LogOverflow(t));
        }
        raw.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.2.cmp(&b.2)));

        let mut atoms: Vec<SpectrumAtom> = Vec::new();
        let mut masses: Vec<KahanSum> = Vec::new();
        for (lp, count, counts) in raw {
            let mass = (ln_big(&count) + lp).exp();
            match atoms.last_mut() {
                Some(last) if (last.log_prob - lp).abs() <= merge_slack(lp) => {
                    last.count += count;
                    last.types.push(counts);
                    masses.last_mut().unwrap().add(mass);
                }
                _ => {
                    atoms.push(SpectrumAtom {
                        log_prob: lp,
                        count,
                        mass: 0.0,
                        types: vec![counts],
                    });
                    let mut acc = KahanSum::new();
                    acc.add(mass);
                    masses.push(acc);
                }
            }
        }
        for (atom, acc) in atoms.iter_mut().zip(masses) {
            atom.mass = acc.value();
            atom.types.sort();
        }

        let spectrum = Spectrum {
            n,
            base: model.base(),
            atoms,
            model,
        };
        let tol = if n > 1000 && support.len() > 2 {
            MASS_SUM_TOL_LARGE
        } else {
            MASS_SUM_TOL
        };
        let sum = spectrum.total_mass();
        if (sum - 1.0).abs() > tol {
            return Err(Error::Normalization { sum, tol });
        }
        Ok(spectrum)
    }
}

/// Spectrum of an i.i.d. source with generic distribution `d`.
pub fn iid_spectrum(d: &Distribution, n: u32) -> Result<Spectrum> {
    SpectrumBuilder::default().build(BlockModel::Iid(d.clone()), n)
}

/// Spectrum of the mixture `w1 * P1^n + (1 - w1) * P2^n`.
pub fn mixed_spectrum(d1: &Distribution, d2: &Distribution, w1: f64, n: u32) -> Result<Spectrum> {
    check_same_alphabet(d1, d2)?;
    check_range("weight", w1, w1 > 0.0 && w1 < 1.0, "0 < w1 < 1")?;
    SpectrumBuilder::default().build(
        BlockModel::Mixed {
            first: d1.clone(),
            second: d2.clone(),
            weight: w1,
        },
        n,
    )
}

/// Spectrum of the switching source at block length `n`.
pub fn switching_spectrum(s: &SwitchingSchedule, n: u32) -> Result<Spectrum> {
    check_range("n", f64::from(n), n >= 1, "n >= 1")?;
    iid_spectrum(s.component_at(n), n)
}

/// `count` i.i.d. sequences of length `n`, reproducible from `seed`.
pub fn sample_sequences(d: &Distribution, n: u32, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = WeightedIndex::new(d.probs()).expect("validated distribution has positive mass");
    (0..count)
        .map(|_| (0..n).map(|_| dist.sample(&mut rng)).collect())
        .collect()
}

/// Symbol counts of a sequence over an alphabet of `alphabet` symbols.
pub fn type_of(seq: &[usize], alphabet: usize) -> Vec<u32> {
    let mut counts = vec![0u32; alphabet];
    for &x in seq {
        counts[x] += 1;
    }
    counts
}
