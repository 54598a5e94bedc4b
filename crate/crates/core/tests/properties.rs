use num_bigint::BigUint;
use proptest::prelude::*;
use varlen::asymptotics::{mean_length_constants, q_upper, q_upper_inv, varentropy};
use varlen::bounds::{theorem2_terms, theorem2_upper, theorem3_lower, theorem3_terms};
use varlen::codes::{
    code_overflow, construct_theorem2_code, optimal_tradeoff, overflow_with_budget,
    validate_counting_condition,
};
use varlen::numeric::string_budget;
use varlen::spectrum::{
    finite_n_first_order, restricted_tail_inf, smooth_max_count, smooth_max_entropy, tail_mass,
};
use varlen::{iid_spectrum, mixed_spectrum, Comparator, Distribution, Spectrum};

fn dist() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1u32..20, 2..=3).prop_map(|w| {
        let total: u32 = w.iter().sum();
        w.iter().map(|&x| f64::from(x) / f64::from(total)).collect()
    })
}

fn spectrum(p: &[f64], n: u32) -> Spectrum {
    iid_spectrum(&Distribution::new(p, 2).unwrap(), n).unwrap()
}

fn cmp() -> impl Strategy<Value = Comparator> {
    prop_oneof![Just(Comparator::Strict), Just(Comparator::NonStrict)]
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn spectra_are_normalized_and_ordered(p in dist(), n in 1u32..80) {
        let s = spectrum(&p, n);
        prop_assert!((s.total_mass() - 1.0).abs() < 1e-9);
        prop_assert_eq!(s.total_count(), BigUint::from(p.len()).pow(n));
        for w in s.atoms().windows(2) {
            prop_assert!(w[0].log_prob > w[1].log_prob);
        }
    }

    #[test]
    fn mixture_of_equal_components_is_iid(p in dist(), n in 1u32..40, w in 0.05f64..0.95) {
        let d = Distribution::new(&p, 2).unwrap();
        let a = iid_spectrum(&d, n).unwrap();
        let b = mixed_spectrum(&d, &d, w, n).unwrap();
        prop_assert_eq!(a.atoms().len(), b.atoms().len());
        for (x, y) in a.atoms().iter().zip(b.atoms()) {
            prop_assert_eq!(&x.count, &y.count);
            prop_assert!((x.log_prob - y.log_prob).abs() < 1e-9);
            prop_assert!((x.mass - y.mass).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_max_is_monotone(p in dist(), n in 1u32..60, g1 in 0.0f64..0.99, g2 in 0.0f64..0.99) {
        let s = spectrum(&p, n);
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        prop_assert!(smooth_max_count(&s, hi).unwrap() <= smooth_max_count(&s, lo).unwrap());
        let full = smooth_max_entropy(&s, 0.0).unwrap();
        prop_assert!((full - f64::from(n) * (p.len() as f64).log2()).abs() < 1e-9);
    }

    #[test]
    fn restricted_infimum_is_monotone_and_bracketed(
        p in dist(),
        n in 1u32..60,
        e1 in 0.0f64..0.9,
        e2 in 0.0f64..0.9,
        r1 in 0.0f64..2.0,
        r2 in 0.0f64..2.0,
        c in cmp(),
    ) {
        let s = spectrum(&p, n);
        let (elo, ehi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let (rlo, rhi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let v = |e, r| restricted_tail_inf(&s, e, r, c).unwrap().value;
        prop_assert!(v(ehi, rlo) <= v(elo, rlo) + 1e-12);
        prop_assert!(v(elo, rhi) <= v(elo, rlo) + 1e-12);
        prop_assert!((v(0.0, rlo) - tail_mass(&s, rlo, c)).abs() < 1e-12);

        let res = restricted_tail_inf(&s, elo, rlo, c).unwrap();
        let floor = (tail_mass(&s, rlo, c) - elo).max(0.0);
        prop_assert!(res.value >= floor - 1e-12);
        // leftover budget is below one sequence of the split atom
        let step = match &res.boundary_split {
            Some(b) => s.atoms()[b.atom].log_prob.exp(),
            None => s
                .atoms()
                .iter()
                .find(|a| c.holds(a.rate(n, s.ln_base()), rlo))
                .map_or(0.0, |a| a.log_prob.exp()),
        };
        prop_assert!(res.value <= floor + step + 1e-12);
    }

    #[test]
    fn first_order_depends_on_budget_sum(p in dist(), n in 1u32..120, g in 0.01f64..0.9, t in 0.0f64..=1.0) {
        let s = spectrum(&p, n);
        let a = finite_n_first_order(&s, g * t, g * (1.0 - t)).unwrap();
        let b = finite_n_first_order(&s, g, 0.0).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn tradeoff_is_monotone(p in dist(), n in 1u32..60, eta in 1u32..80, e1 in 0.0f64..0.99, e2 in 0.0f64..0.99) {
        let s = spectrum(&p, n);
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let eta = f64::from(eta);
        let d = |eta, e| optimal_tradeoff(&s, eta, e).unwrap().delta_star;
        prop_assert!(d(eta + 1.0, lo) <= d(eta, lo) + 1e-12);
        prop_assert!(d(eta, hi) <= d(eta, lo) + 1e-12);
        prop_assert_eq!(d(eta + 0.7, lo), d(eta, lo));
    }

    #[test]
    fn achievability_code_is_valid_and_never_beats_optimum(p in dist(), n in 1u32..60, eps in 0.0f64..0.95) {
        let s = spectrum(&p, n);
        let c = construct_theorem2_code(&s, eps).unwrap();
        prop_assert!(c.fits(&s));
        prop_assert!(validate_counting_condition(&c).holds);
        prop_assert!(c.error_mass <= eps + 1e-12);
        for eta in 1..(2 * n + 2) {
            let eta = f64::from(eta);
            prop_assert!(code_overflow(&c, eta).unwrap() >= optimal_tradeoff(&s, eta, eps).unwrap().delta_star - 1e-12);
        }
    }

    #[test]
    fn junk_string_costs_at_most_two_sequences(p in dist(), n in 1u32..40, t in 1u64..30, eps in 0.0f64..0.9) {
        let s = spectrum(&p, n);
        let m = string_budget(2, t);
        let full = overflow_with_budget(&s, &m, eps);
        let less = overflow_with_budget(&s, &(&m - 1u32), eps);
        let heaviest = s.atoms()[0].log_prob.exp();
        // greedy is within one sequence of the optimum, which moves by at most one
        prop_assert!(less >= full - heaviest - 1e-12);
        prop_assert!(less <= full + 2.0 * heaviest + 1e-12);
    }

    #[test]
    fn bound_slack_terms_are_exact(p in dist(), n in 2u32..60, eps in 0.0f64..0.9, gamma in 0.001f64..0.3, eta in 1u32..80) {
        let s = spectrum(&p, n);
        let a = 2f64.powf(-f64::from(n) * gamma);
        let eta = f64::from(eta);
        let (prob, slack) = theorem2_terms(&s, eps, a, eta).unwrap();
        prop_assert_eq!(slack, a * 2.0);
        prop_assert_eq!(theorem2_upper(&s, eps, a, eta).unwrap(), prob + slack);
        let (prob, slack) = theorem3_terms(&s, 1.0 - eps, a, eta).unwrap();
        prop_assert_eq!(theorem3_lower(&s, 1.0 - eps, a, eta).unwrap(), prob - slack);
        let c = construct_theorem2_code(&s, eps).unwrap();
        let overflow = code_overflow(&c, eta).unwrap();
        prop_assert!(theorem3_lower(&s, 1.0 - eps, a, eta).unwrap() <= overflow);
        prop_assert!(overflow <= theorem2_upper(&s, eps, a, eta).unwrap());
    }

    #[test]
    fn gaussian_tail_round_trips(g in 1e-6f64..(1.0 - 1e-6), x in -6.0f64..6.0, y in -6.0f64..6.0) {
        prop_assert!((q_upper(q_upper_inv(g).unwrap()) - g).abs() <= 1e-10);
        if x < y {
            prop_assert!(q_upper(x) > q_upper(y));
        }
    }

    #[test]
    fn mean_length_constant_is_negative_and_symmetric(p in dist(), eps in 0.001f64..0.999) {
        let d = Distribution::new(&p, 2).unwrap();
        let v = varentropy(&d);
        let a = mean_length_constants(&d, eps).unwrap().kpv.unwrap();
        let b = mean_length_constants(&d, 1.0 - eps).unwrap().kpv.unwrap();
        if v > 1e-12 {
            prop_assert!(a < 0.0);
        }
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn varentropy_vanishes_only_for_uniform(k in 2usize..=4, w in prop::collection::vec(1u32..10, 4)) {
        let uniform = vec![1.0 / k as f64; k];
        prop_assert!(varentropy(&Distribution::new(&uniform, 2).unwrap()).abs() < 1e-15);
        let total: u32 = w[..k].iter().sum();
        let p: Vec<f64> = w[..k].iter().map(|&x| f64::from(x) / f64::from(total)).collect();
        let v = varentropy(&Distribution::new(&p, 2).unwrap());
        let all_equal = w[..k].iter().all(|&x| x == w[0]);
        prop_assert_eq!(v.abs() < 1e-12, all_equal);
    }
}

#[test]
fn smooth_max_tracks_first_order_threshold() {
    // the gap carries a log(n)/n term on top of the atom step
    for p in [0.1, 0.3, 0.45] {
        for n in [20u32, 50, 100, 400, 2000] {
            let s = spectrum(&[p, 1.0 - p], n);
            let nf = f64::from(n);
            let step = ((1.0 - p) / p).log2().abs() / nf;
            for (eps, delta) in [(0.05, 0.05), (0.1, 0.2)] {
                let h = smooth_max_entropy(&s, eps + delta).unwrap() / nf;
                let r = finite_n_first_order(&s, eps, delta).unwrap();
                assert!(r >= h - 1e-12, "p={p} n={n}");
                assert!(
                    r - h <= step + 2.0 * nf.log2() / nf,
                    "p={p} n={n} gap={}",
                    r - h
                );
            }
        }
    }
}
