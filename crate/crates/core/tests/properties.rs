use markres_core::algebra::{log_derivative_power, rat, Ideal, Polynomial, Rational};
use markres_core::chart::{Center, Chart, DivisorLabel, ExcHypersurface};
use markres_core::marked::MarkedIdeal;
use markres_core::testseq::{mu_h_oracle, mu_oracle};
use num_traits::Zero;
use proptest::prelude::*;

const N: usize = 3;

fn poly(max_exp: u32, max_terms: usize) -> impl Strategy<Value = Polynomial> {
    let coeff = prop_oneof![-3i64..=-1, 1i64..=3];
    prop::collection::vec((prop::collection::vec(0..=max_exp, N), coeff), 1..=max_terms)
        .prop_map(|terms| Polynomial::from_terms(N, terms.into_iter().map(|(e, c)| (e, rat(c)))))
        .prop_filter("non-zero", |p| !p.is_zero())
}

fn subset() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(any::<bool>(), N).prop_map(|bits| (0..N).filter(|&i| bits[i]).collect())
}

fn root(e: &[usize]) -> Chart {
    let e = e
        .iter()
        .enumerate()
        .map(|(r, &coord)| ExcHypersurface { label: DivisorLabel::input(&format!("H{}", r + 1), r as u32), coord, alive: true })
        .collect();
    Chart::root((0..N).map(|i| format!("x{i}")).collect(), e)
}

fn origin() -> Vec<Rational> {
    vec![Rational::zero(); N]
}

/// Order read from the lowest total degree among the terms.
fn lowest_degree(gens: &[Polynomial]) -> Option<u32> {
    gens.iter().flat_map(|g| g.terms().iter().map(|(e, _)| e.iter().sum::<u32>())).min()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn order_and_valuation_are_additive(f in poly(3, 3), g in poly(3, 3), i in 0..N) {
        let fg = f.mul(&g);
        prop_assert_eq!(fg.order_at_origin(), Some(f.order_at_origin().unwrap() + g.order_at_origin().unwrap()));
        prop_assert_eq!(fg.valuation_in(i), Some(f.valuation_in(i).unwrap() + g.valuation_in(i).unwrap()));
    }

    #[test]
    fn derivative_powers_compose(f in poly(2, 3), e in subset(), k in 0..=2u32, l in 0..=2u32) {
        let free: Vec<usize> = (0..N).collect();
        let i = Ideal::new(N, vec![f]);
        let nested = log_derivative_power(&log_derivative_power(&i, &free, &e, l), &free, &e, k);
        prop_assert!(nested.equals(&log_derivative_power(&i, &free, &e, k + l)));
    }

    #[test]
    fn derivatives_only_grow_the_ideal(f in poly(3, 3), e in subset(), k in 0..=3u32) {
        let free: Vec<usize> = (0..N).collect();
        let i = Ideal::new(N, vec![f]);
        let lower = log_derivative_power(&i, &free, &e, k);
        let higher = log_derivative_power(&i, &free, &e, k + 1);
        prop_assert!(lower.gens().iter().all(|g| higher.contains(g)));
    }

    #[test]
    fn chart_substitution_obeys_the_derivative_law(f in poly(3, 4), center in subset()) {
        prop_assume!(center.len() >= 2);
        let children = root(&[]).blowup_charts(&Center::coordinate("root", center.clone()), 1).unwrap();
        prop_assert_eq!(children.len(), center.len());
        for child in &children {
            let k = child.parent.as_ref().and_then(|l| l.chart_var).unwrap();
            let pulled = child.pull_back(&f);
            for r in center.iter().copied().filter(|&r| r != k) {
                // d/dy_r of the pull-back is y_k times the pulled-back d/dx_r
                prop_assert_eq!(pulled.partial(r), Polynomial::var(N, k).mul(&child.pull_back(&f.partial(r))));
            }
        }
    }

    #[test]
    fn admissible_transform_divides_out_the_exceptional_power(
        f in poly(3, 3),
        center in subset(),
        d in 1..=3u32,
    ) {
        prop_assume!(!center.is_empty());
        let f = Polynomial::from_terms(
            N,
            f.terms().iter().filter(|(e, _)| center.iter().map(|&j| e[j]).sum::<u32>() >= d).cloned().collect::<Vec<_>>(),
        );
        prop_assume!(!f.is_zero());
        let chart = root(&[]);
        let m = MarkedIdeal::new(&chart, vec![], Ideal::new(N, vec![f.clone()]), d).unwrap();
        let ctr = Center::coordinate("root", center.clone());
        prop_assume!(m.is_admissible(&ctr));
        for child in chart.blowup_charts(&ctr, 1).unwrap() {
            let k = child.parent.as_ref().and_then(|l| l.chart_var).unwrap();
            let moved = m.transform_admissible(&ctr, &child).unwrap().unwrap();
            let expect = child.pull_back(&f).div_var_pow(k, d).unwrap();
            prop_assert!(moved.ideal.equals(&Ideal::new(N, vec![expect])));
        }
    }

    #[test]
    fn order_oracles_match_the_terms(f in poly(3, 3), d in 1..=3u32) {
        let chart = root(&[0, 1]);
        let m = MarkedIdeal::new(&chart, vec![], Ideal::new(N, vec![f.clone()]), d).unwrap();
        let ord = lowest_degree(std::slice::from_ref(&f)).unwrap();
        // the oracle resolves orders up to 1 + 7 d with its bounds of 6
        prop_assume!(ord >= d && ord <= 6);
        let dd = Rational::from_integer(d.into());
        prop_assert_eq!(mu_oracle(&m, &origin(), 6, 6).unwrap(), Some(Rational::from_integer(ord.into()) / &dd));
        for (label, i) in [("H1", 0), ("H2", 1)] {
            let v = f.valuation_in(i).unwrap();
            prop_assert_eq!(mu_h_oracle(&m, label, &origin(), 6).unwrap(), Some(Rational::from_integer(v.into()) / &dd));
        }
    }

    #[test]
    fn oracles_ignore_generator_scaling(f in poly(2, 3), g in poly(2, 2), c in prop_oneof![-5i64..=-1, 1i64..=5], d in 1..=2u32) {
        let chart = root(&[0]);
        let plain = Ideal::new(N, vec![f.clone(), g.clone()]);
        prop_assume!(plain.gens().iter().all(|p| p.order_at_origin().unwrap_or(0) >= d));
        let scaled = Ideal::new(N, vec![f.scale(&rat(c)), g.add(&f)]);
        let a = MarkedIdeal::new(&chart, vec![], plain, d).unwrap();
        let b = MarkedIdeal::new(&chart, vec![], scaled, d).unwrap();
        prop_assert_eq!(mu_oracle(&a, &origin(), 6, 6).unwrap(), mu_oracle(&b, &origin(), 6, 6).unwrap());
        prop_assert_eq!(mu_h_oracle(&a, "H1", &origin(), 6).unwrap(), mu_h_oracle(&b, "H1", &origin(), 6).unwrap());
    }
}
