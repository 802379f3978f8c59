use super::*;
use crate::algebra::parse_polynomial_list;
use crate::chart::DivisorLabel;

fn setup(vars: &[&str], gens: &str, d: u32, e: &[(&str, usize)]) -> (Chart, MarkedIdeal) {
    let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    let e = e
        .iter()
        .enumerate()
        .map(|(i, (l, c))| ExcHypersurface { label: DivisorLabel::input(l, i as u32), coord: *c, alive: true })
        .collect();
    let chart = Chart::root(names.clone(), e);
    let ideal = Ideal::new(names.len(), parse_polynomial_list(gens, &names).unwrap());
    let m = MarkedIdeal::new(&chart, vec![], ideal, d).unwrap();
    (chart, m)
}

fn origin(n: usize) -> Vec<Rational> {
    vec![Rational::zero(); n]
}

#[test]
fn sequences_round_trip_through_text() {
    let text = "P;B(x,y-1,z+1/2)@x;E(1,2)@t";
    let seq = TestSequence::parse(text).unwrap();
    assert_eq!(seq.steps.len(), 3);
    assert_eq!(seq.to_string(), text);
    assert_eq!(TestSequence::parse("").unwrap(), TestSequence::default());
    assert!(TestSequence::parse("B(x)").is_err());
    assert!(TestSequence::parse("Q@x").is_err());
}

#[test]
fn empty_sequence_is_the_identity() {
    let (c, m) = setup(&["x", "y"], "y^2 - x^3", 2, &[]);
    let out = apply_sequence(&Stage::new(c.clone(), m.clone()), &TestSequence::default()).unwrap();
    assert_eq!(out.chart, c);
    assert!(out.marked.unwrap().ideal.equals(&m.ideal));
}

#[test]
fn origin_blowup_of_the_cusp_in_the_x_chart() {
    let (c, m) = setup(&["x", "y"], "y^2 - x^3", 2, &[]);
    let out = apply_sequence(&Stage::new(c, m), &TestSequence::parse("B(x,y)@x").unwrap()).unwrap();
    let names = out.chart.vars.clone();
    let expect = Ideal::new(2, parse_polynomial_list("y^2 - x", &names).unwrap());
    let got = out.marked.unwrap();
    assert!(got.ideal.equals(&expect));
    assert_eq!(got.d, 2);
}

#[test]
fn product_then_exceptional_pulls_back_without_division() {
    let (c, m) = setup(&["x", "y"], "x^2*y", 1, &[("H1", 0)]);
    let out = apply_sequence(&Stage::new(c, m), &TestSequence::parse("P;E(1,2)@t").unwrap()).unwrap();
    let names = out.chart.vars.clone();
    assert_eq!(names[2], "t");
    let expect = Ideal::new(3, parse_polynomial_list("t^2*x^2*y", &names).unwrap());
    assert!(out.marked.unwrap().ideal.equals(&expect));
    assert_eq!(out.chart.e.len(), 3);
    assert!(!out.chart.e[1].alive, "the old horizontal divisor misses the t-chart");
}

#[test]
fn inadmissible_step_reports_its_index() {
    let (c, m) = setup(&["x", "y"], "y^2 - x^3", 2, &[]);
    let err = apply_sequence(&Stage::new(c, m), &TestSequence::parse("P;B(x,y,t)@t;B(y)@y").unwrap()).unwrap_err();
    assert!(matches!(&err, Error::NotAdmissible(s) if s.starts_with("step 3")), "{err}");
}

/// Order at a point from derivatives: the least `k` with a `k`-th partial
/// derivative of some generator not vanishing there.
fn order_by_derivatives(m: &MarkedIdeal, a: &[Rational]) -> u32 {
    let n = m.nvars;
    let mut layer: Vec<Polynomial> = m.ideal.gens().to_vec();
    for k in 0..64 {
        if layer.iter().any(|f| !f.eval(a).is_zero()) {
            return k;
        }
        layer = layer.iter().flat_map(|f| (0..n).map(move |j| f.partial(j))).filter(|f| !f.is_zero()).collect();
    }
    panic!("order too large")
}

#[test]
fn order_oracle_recovers_the_order_on_examples() {
    let cases: &[(&[&str], &str, u32, Rational)] = &[
        (&["x", "y"], "y^2 - x^3", 1, rat(2)),
        (&["x", "y"], "x", 1, rat(1)),
        (&["x", "y"], "x^2", 1, rat(2)),
        (&["x", "y"], "x^3*y^2", 4, Rational::new(5.into(), 4.into())),
    ];
    for (vars, gens, d, expect) in cases {
        let (_, m) = setup(vars, gens, *d, &[]);
        let a = origin(vars.len());
        let mu = mu_oracle(&m, &a, 6, 6).unwrap().unwrap();
        assert_eq!(&mu, expect, "{gens}");
        assert_eq!(mu, Rational::new(order_by_derivatives(&m, &a).into(), (*d).into()));
    }
}

#[test]
fn order_oracle_at_a_point_off_the_origin() {
    let (_, m) = setup(&["x", "y"], "(x-1)^3 + y^3", 2, &[]);
    let a = vec![rat(1), rat(0)];
    assert_eq!(mu_oracle(&m, &a, 6, 6).unwrap(), Some(Rational::new(3.into(), 2.into())));
    let b = vec![rat(0), rat(0)];
    assert!(matches!(mu_oracle(&m, &b, 6, 6), Err(Error::NotInCosupport(_))));
}

#[test]
fn zero_ideal_has_infinite_order() {
    let (_, m) = setup(&["x"], "0", 3, &[]);
    assert_eq!(mu_oracle(&m, &origin(1), 4, 4).unwrap(), None);
}

#[test]
fn divisor_order_oracle_on_examples() {
    let (_, m) = setup(&["x", "y"], "x^2*y^3", 1, &[("H1", 0), ("H2", 1)]);
    assert_eq!(mu_h_oracle(&m, "H1", &origin(2), 6).unwrap(), Some(rat(2)));
    assert_eq!(mu_h_oracle(&m, "H2", &origin(2), 6).unwrap(), Some(rat(3)));
    let (_, m) = setup(&["x", "y"], "y^2 - x^3", 1, &[("H1", 0)]);
    assert_eq!(mu_h_oracle(&m, "H1", &origin(2), 6).unwrap(), Some(rat(0)));
    assert!(mu_h_oracle(&m, "H9", &origin(2), 6).is_err());
}

#[test]
fn cusp_and_its_coefficient_ideal_are_not_told_apart() {
    let (c, m) = setup(&["x", "y"], "y^2 - x^3", 2, &[]);
    let coeff = m.coefficient_ideal();
    let r = equivalence_probe(&c, &m, &coeff, 2, 16, 7).unwrap();
    assert!(!r.distinguished(), "{:?}", r.distinction);
    assert!(r.sequences > 10);
}

#[test]
fn a_line_and_its_double_are_told_apart() {
    let (c, a) = setup(&["x", "y"], "x", 1, &[]);
    let (_, b) = setup(&["x", "y"], "x^2", 1, &[]);
    let r = equivalence_probe(&c, &a, &b, 1, 0, 0).unwrap();
    let w = r.distinction.expect("distinguished");
    assert_eq!(w.sequence.steps.len(), 1);
    // the witness replays: the transforms differ in cosupport
    let sa = apply_sequence(&Stage::new(c.clone(), a), &w.sequence).unwrap().marked.unwrap();
    let sb = apply_sequence(&Stage::new(c, b), &w.sequence).unwrap().marked.unwrap();
    assert_ne!(sa.cosupport_is_empty(), sb.cosupport_is_empty());
}

#[test]
fn probe_is_reflexive_and_symmetric() {
    let (c, a) = setup(&["x", "y"], "x*y", 1, &[]);
    let (_, b) = setup(&["x", "y"], "x^2*y", 1, &[]);
    assert!(!equivalence_probe(&c, &a, &a, 2, 8, 1).unwrap().distinguished());
    let ab = equivalence_probe(&c, &a, &b, 2, 8, 1).unwrap();
    let ba = equivalence_probe(&c, &b, &a, 2, 8, 1).unwrap();
    assert_eq!(ab.distinguished(), ba.distinguished());
}

#[test]
fn probe_requires_a_common_frame() {
    let (c, a) = setup(&["x", "y"], "x", 1, &[]);
    let (_, b) = setup(&["x", "y"], "x", 1, &[("H1", 0)]);
    assert!(matches!(equivalence_probe(&c, &a, &b, 1, 0, 0), Err(Error::FrameMismatch(_))));
}
