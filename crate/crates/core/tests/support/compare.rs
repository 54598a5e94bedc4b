//! Runs every type-class functional against the sequence-level oracle for
//! one source and block length, collecting disagreements.
#![allow(dead_code)]

use super::brute::Enumerated;
use num_bigint::BigUint;
use varlen::bounds::{theorem2_upper, theorem3_lower};
use varlen::codes::{code_overflow, construct_theorem2_code, optimal_tradeoff};
use varlen::spectrum::{
    finite_n_first_order, restricted_tail_inf, smooth_max_count, smooth_max_entropy, tail_mass,
};
use varlen::{iid_spectrum, Comparator, Distribution};

pub const TOL: f64 = 1e-12;

pub const EPS_GRID: [f64; 5] = [0.0, 0.05, 0.1, 0.2, 0.45];
pub const GAMMA_GRID: [f64; 6] = [0.0, 0.05, 0.1, 0.25, 0.5, 0.9];

#[derive(Debug, Default)]
pub struct Tally {
    pub checks: u64,
    pub failures: Vec<String>,
}

impl Tally {
    fn close(&mut self, what: impl FnOnce() -> String, got: f64, want: f64) {
        self.checks += 1;
        if (got - want).abs() > TOL {
            self.failures
                .push(format!("{}: got {got:e} want {want:e}", what()));
        }
    }

    fn equal<T: PartialEq + std::fmt::Debug>(
        &mut self,
        what: impl FnOnce() -> String,
        got: T,
        want: T,
    ) {
        self.checks += 1;
        if got != want {
            self.failures
                .push(format!("{}: got {got:?} want {want:?}", what()));
        }
    }

    pub fn merge(&mut self, other: Tally) {
        self.checks += other.checks;
        self.failures.extend(other.failures);
    }
}

/// Grouped sequence probabilities as (probability, multiplicity), most
/// probable first.
fn levels(e: &Enumerated) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &p in &e.probs {
        match out.last_mut() {
            Some((q, c)) if (*q - p).abs() <= 1e-12 * q.abs() => *c += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

pub fn compare_iid(p: &[f64], n: u32) -> Tally {
    let base = 2;
    let label = format!("p={p:?} n={n}");
    let d = Distribution::new(p, base).unwrap();
    let s = iid_spectrum(&d, n).unwrap();
    let e = Enumerated::new(p, n, base);
    let mut t = Tally::default();

    let lv = levels(&e);
    t.equal(|| format!("{label} atom count"), s.atoms().len(), lv.len());
    for (a, &(prob, count)) in s.atoms().iter().zip(&lv) {
        t.equal(
            || format!("{label} atom size"),
            a.count.clone(),
            BigUint::from(count),
        );
        t.close(|| format!("{label} atom mass"), a.mass, prob * count as f64);
        t.close(
            || format!("{label} atom rate"),
            a.rate(n, s.ln_base()),
            e.rate(prob),
        );
    }

    let mut rates: Vec<f64> = lv.iter().map(|&(q, _)| e.rate(q)).collect();
    let mids: Vec<f64> = rates.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    rates.extend(mids);
    rates.extend([-1.0, 0.0, 0.5, 1.0, 5.0]);

    for &r in &rates {
        for (cmp, strict) in [(Comparator::Strict, true), (Comparator::NonStrict, false)] {
            t.close(
                || format!("{label} tail r={r} {cmp:?}"),
                tail_mass(&s, r, cmp),
                e.tail_mass(r, strict),
            );
            for &eps in &EPS_GRID {
                let got = restricted_tail_inf(&s, eps, r, cmp).unwrap().value;
                t.close(
                    || format!("{label} restricted eps={eps} r={r} {cmp:?}"),
                    got,
                    e.restricted_tail_inf(eps, r, strict),
                );
            }
        }
    }

    for &g in &GAMMA_GRID {
        t.equal(
            || format!("{label} smooth count g={g}"),
            smooth_max_count(&s, g).unwrap(),
            BigUint::from(e.smooth_max_count(g)),
        );
        t.close(
            || format!("{label} smooth entropy g={g}"),
            smooth_max_entropy(&s, g).unwrap(),
            e.smooth_max_entropy(g),
        );
        if g > 0.0 {
            let q = finite_n_first_order(&s, g, 0.0).unwrap();
            t.close(|| format!("{label} quantile g={g}"), q, e.quantile_rate(g));
        }
    }

    let max_eta = (f64::from(n) * (p.len() as f64).log2()).ceil() as u32 + 1;
    let nf = f64::from(n);
    let a_grid = [2f64.powf(-0.05 * nf), 2f64.powf(-0.2 * nf), 0.5];
    for &eps in &EPS_GRID {
        let code = construct_theorem2_code(&s, eps).unwrap();
        for eta in 1..=max_eta {
            let eta = f64::from(eta);
            t.close(
                || format!("{label} tradeoff eta={eta} eps={eps}"),
                optimal_tradeoff(&s, eta, eps).unwrap().delta_star,
                e.optimal_tradeoff(eta, eps),
            );
            t.close(
                || format!("{label} code overflow eta={eta} eps={eps}"),
                code_overflow(&code, eta).unwrap(),
                e.code_overflow(eps, eta),
            );
            for &a in &a_grid {
                t.close(
                    || format!("{label} upper eta={eta} eps={eps} a={a}"),
                    theorem2_upper(&s, eps, a, eta).unwrap(),
                    e.theorem2_upper(eps, a, eta),
                );
                t.close(
                    || format!("{label} lower eta={eta} eps={eps} a={a}"),
                    theorem3_lower(&s, 1.0 - eps, a, eta).unwrap(),
                    e.theorem3_lower(1.0 - eps, a, eta),
                );
            }
        }
    }
    t
}
