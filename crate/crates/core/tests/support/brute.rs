//! Sequence-level oracles: enumerate all |X|^n sequences, compute each
//! probability as a product of symbol probabilities and evaluate every
//! functional one sequence at a time. No type classes, no big integers.
#![allow(dead_code)]

/// Slack for exact ties in budget comparisons. Looser than the
/// implementation's so ties decided there are decided the same way here.
const TIE: f64 = 1e-9;

pub struct Enumerated {
    pub n: u32,
    pub base: u32,
    /// Sequence probabilities, descending.
    pub probs: Vec<f64>,
}

impl Enumerated {
    pub fn new(p: &[f64], n: u32, base: u32) -> Self {
        let k = p.len();
        let total = k.pow(n);
        let mut probs = Vec::with_capacity(total);
        for code in 0..total {
            let mut c = code;
            let mut prob = 1.0;
            for _ in 0..n {
                prob *= p[c % k];
                c /= k;
            }
            if prob > 0.0 {
                probs.push(prob);
            }
        }
        probs.sort_by(|a, b| b.total_cmp(a));
        Self { n, base, probs }
    }

    fn ln_k(&self) -> f64 {
        f64::from(self.base).ln()
    }

    pub fn rate(&self, p: f64) -> f64 {
        -p.ln() / (f64::from(self.n) * self.ln_k())
    }

    pub fn count(&self) -> usize {
        self.probs.len()
    }

    pub fn tail_mass(&self, r: f64, strict: bool) -> f64 {
        self.probs
            .iter()
            .filter(|&&p| in_tail(self.rate(p), r, strict))
            .sum()
    }

    /// Number of top sequences needed to reach mass `1 - gamma`.
    pub fn smooth_max_count(&self, gamma: f64) -> usize {
        self.cover(1.0 - gamma)
    }

    fn cover(&self, target: f64) -> usize {
        if target >= 1.0 {
            return self.count();
        }
        let mut acc = 0.0;
        let mut k = 0;
        for &p in &self.probs {
            if acc >= target * (1.0 - TIE) {
                break;
            }
            acc += p;
            k += 1;
        }
        k
    }

    pub fn smooth_max_entropy(&self, gamma: f64) -> f64 {
        (self.smooth_max_count(gamma) as f64).ln() / self.ln_k()
    }

    /// Greedy heaviest-first removal of tail sequences within budget `eps`;
    /// returns the tail mass left inside `A`.
    pub fn restricted_tail_inf(&self, eps: f64, r: f64, strict: bool) -> f64 {
        let tail: Vec<f64> = self
            .probs
            .iter()
            .copied()
            .filter(|&p| in_tail(self.rate(p), r, strict))
            .collect();
        let (_, left) = first_fit(&tail, eps);
        left
    }

    /// `delta*` by sequence-level greedy: top `m` get short codewords, the
    /// error budget takes the heaviest remaining sequences that fit.
    pub fn optimal_tradeoff(&self, eta: f64, eps: f64) -> f64 {
        let m = string_budget(self.base, eta.floor() as u32);
        let rest: Vec<f64> = self
            .probs
            .iter()
            .copied()
            .skip(m.min(self.count()))
            .collect();
        let (_, left) = first_fit(&rest, eps);
        left
    }

    /// Top prefix with mass at least `target`.
    pub fn top_set(&self, target: f64) -> &[f64] {
        &self.probs[..self.cover(target)]
    }

    pub fn theorem2_upper(&self, eps: f64, a_n: f64, eta: f64) -> f64 {
        let set = self.top_set(1.0 - eps);
        let pa: f64 = set.iter().sum();
        let rhs = f64::from(self.base).powf(-eta);
        let prob: f64 = set
            .iter()
            .filter(|&&p| a_n * p / pa <= rhs * (1.0 + 1e-12))
            .sum();
        prob + a_n * f64::from(self.base)
    }

    pub fn theorem3_lower(&self, d_target: f64, a_n: f64, eta: f64) -> f64 {
        if d_target <= 0.0 {
            return 0.0;
        }
        let set = self.top_set(d_target);
        let pd: f64 = set.iter().sum();
        let rhs = a_n * f64::from(self.base).powf(-eta);
        let prob: f64 = set.iter().filter(|&&p| p / pd <= rhs * (1.0 - 1e-12)).sum();
        prob - a_n * f64::from(self.base) * pd
    }

    /// Codeword lengths and masses of the achievability code.
    pub fn theorem2_code(&self, eps: f64) -> Vec<(u64, f64)> {
        let set = self.top_set(1.0 - eps);
        let pa: f64 = set.iter().sum();
        set.iter()
            .map(|&p| {
                let v = -(p / pa).ln() / self.ln_k();
                (((v - 1e-9).ceil()).max(1.0) as u64, p)
            })
            .collect()
    }

    pub fn code_overflow(&self, eps: f64, eta: f64) -> f64 {
        self.theorem2_code(eps)
            .iter()
            .filter(|(l, _)| *l as f64 > eta)
            .map(|(_, p)| p)
            .sum()
    }

    /// Smallest `r` among sequence rates with `Pr{rate > r} <= gamma`.
    pub fn quantile_rate(&self, gamma: f64) -> f64 {
        let mut rates: Vec<f64> = self.probs.iter().map(|&p| self.rate(p)).collect();
        rates.sort_by(|a, b| a.total_cmp(b));
        rates.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        *rates
            .iter()
            .find(|&&r| self.tail_mass(r, true) <= gamma * (1.0 + TIE))
            .unwrap()
    }

    /// Exhaustive optimum over every deterministic code for tiny alphabets:
    /// each sequence is junk, short (length <= eta) or long. Only feasible
    /// for at most ~10 sequences.
    pub fn exhaustive_labelings(&self, eta: f64, eps: f64) -> f64 {
        let k = self.count();
        let m = string_budget(self.base, eta.floor() as u32);
        let mut best = f64::INFINITY;
        let total = 3usize.pow(k as u32);
        for code in 0..total {
            let (mut c, mut short, mut junk, mut long) = (code, 0usize, 0.0, 0.0);
            for &p in &self.probs {
                match c % 3 {
                    0 => junk += p,
                    1 => short += 1,
                    _ => long += p,
                }
                c /= 3;
            }
            if short <= m && junk <= eps * (1.0 + TIE) {
                best = best.min(long);
            }
        }
        best
    }

    /// Exhaustive optimum over error sets: for each subset `E` of mass at
    /// most `eps`, the best decoded short set is the top `m` of the rest.
    pub fn exhaustive_error_sets(&self, eta: f64, eps: f64) -> f64 {
        let k = self.count();
        assert!(k <= 20);
        let m = string_budget(self.base, eta.floor() as u32);
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << k) {
            let junk: f64 = (0..k)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| self.probs[i])
                .sum();
            if junk > eps * (1.0 + TIE) {
                continue;
            }
            let rest: f64 = (0..k)
                .filter(|i| mask >> i & 1 == 0)
                .skip(m)
                .map(|i| self.probs[i])
                .sum();
            best = best.min(rest);
        }
        best
    }
}

fn in_tail(rate: f64, r: f64, strict: bool) -> bool {
    if strict {
        rate > r + 1e-12
    } else {
        rate >= r - 1e-12
    }
}

/// First-fit decreasing on a descending list: returns (taken, left).
fn first_fit(items: &[f64], budget: f64) -> (f64, f64) {
    let (mut taken, mut left) = (0.0, 0.0);
    for &p in items {
        if taken + p <= budget * (1.0 + TIE) {
            taken += p;
        } else {
            left += p;
        }
    }
    (taken, left)
}

pub fn string_budget(base: u32, t: u32) -> usize {
    let mut total = 0usize;
    let mut pow = 1usize;
    for _ in 0..t {
        pow = pow.saturating_mul(base as usize);
        total = total.saturating_add(pow);
    }
    total
}

/// Every distribution on two or three symbols with entries in
/// {0.1, ..., 0.9}.
pub fn grid_distributions() -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for a in 1..10 {
        out.push(vec![a as f64 / 10.0, (10 - a) as f64 / 10.0]);
    }
    for a in 1..10 {
        for b in 1..10 {
            let c = 10 - a - b;
            if c >= 1 {
                out.push(vec![a as f64 / 10.0, b as f64 / 10.0, c as f64 / 10.0]);
            }
        }
    }
    out
}
