//! Acceptance run: one line per criterion, non-zero exit if any fails.
//! Expected values come from oracles written here (derivative-based orders,
//! term-wise valuations, hand-built chart substitutions), never from the code
//! under test.

use markres_core::algebra::{
    derivative_ideal, log_derivative_power, max_order, parse_polynomial_list, rat, singular_locus, Ideal, Polynomial,
    Rational,
};
use markres_core::chart::{Center, Chart, DivisorLabel, ExcHypersurface};
use markres_core::invariant::{analyze_at_point, factor_monomial, Settings};
use markres_core::marked::MarkedIdeal;
use markres_core::problem::ProblemFile;
use markres_core::resolver::{
    check_functoriality, check_monotonicity, overlap_all_years, resolve, strict_transform_report, ResolutionTree,
    RunOptions,
};
use markres_core::testseq::{apply_sequence, equivalence_probe, mu_h_oracle, mu_oracle, Stage};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn names(vars: &[&str]) -> Vec<String> {
    vars.iter().map(|s| s.to_string()).collect()
}

fn problem(vars: &[&str], gens: &str, d: u32, e: &[(&str, usize)]) -> (Chart, MarkedIdeal) {
    let names = names(vars);
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

fn ideal_in(vars: &[String], gens: &str) -> Ideal {
    Ideal::new(vars.len(), parse_polynomial_list(gens, vars).unwrap())
}

fn ensure(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {:.2} s, limit {:.0} s", took.as_secs_f64(), limit.as_secs_f64()))
}

fn problems_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems")
}

/// Least `k` such that some `k`-th partial derivative of a generator is
/// non-zero at `a`.
fn order_by_derivatives(gens: &[Polynomial], a: &[Rational]) -> Option<u32> {
    let n = a.len();
    let mut layer: Vec<Polynomial> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    for k in 0..64 {
        if layer.is_empty() {
            return None;
        }
        if layer.iter().any(|f| !f.eval(a).is_zero()) {
            return Some(k);
        }
        layer = layer.iter().flat_map(|f| (0..n).map(move |j| f.partial(j))).filter(|f| !f.is_zero()).collect();
    }
    None
}

/// Largest power of `x_i` dividing every generator, read off the terms.
fn valuation_by_terms(gens: &[Polynomial], i: usize) -> Option<u32> {
    gens.iter().flat_map(|g| g.terms().iter().map(|(e, _)| e[i])).min()
}

fn worked_example() -> Outcome {
    let start = Instant::now();
    let (c, m) = problem(&["x", "y", "z", "w"], "y^2 - x^3, x^4 + x*z^2 - w^3", 1, &[]);
    let run = resolve(&c, &m, &RunOptions::default());
    let t: &ResolutionTree = match &run {
        Ok(t) => t,
        Err(e) => e.partial_tree().ok_or_else(|| format!("no tree: {e}"))?,
    };

    // (a) first center is the origin, where the order reaches its maximum 2
    let (year, first) = t.root().blowup.as_ref().ok_or("root never blown up")?;
    ensure(*year == 1 && first.vanishing == vec![0, 1, 2, 3] && first.shear.is_empty(), "first center is not the origin")?;
    ensure(max_order(&m.ideal, &[0, 1, 2, 3], &Ideal::zero(4)) == Some(2), "maximum order is not 2")?;
    let order_two = m.ideal.sum(&derivative_ideal(&m.ideal, &[0, 1, 2, 3]));
    ensure(order_two.same_zero_set(&Ideal::vars(4, &[0, 1, 2, 3])), "order 2 is reached off the origin")?;
    let traced = t.root().analysis.as_ref().and_then(|a| a.trace.first()).and_then(|l| l.order.clone());
    ensure(traced.as_deref() == Some("2"), format!("analysis justifies the center by order {traced:?}"))?;

    // (b) residual in the x-chart and E_1
    let xc = t.find("root.x").ok_or("no x-chart")?;
    let xm = xc.marked.as_ref().ok_or("x-chart collapsed")?;
    let alive: Vec<usize> = xc.chart.e.iter().filter(|h| h.alive).map(|h| h.coord).collect();
    ensure(alive == vec![0], "E_1 is not V(x) in the x-chart")?;
    let (_, residual) = factor_monomial(&xm.ideal, &[0]);
    let xv = &xc.chart.vars;
    ensure(residual.equals(&ideal_in(xv, "x - y^2, x*(x + z^2 - w^3)")), "residual differs from (x-y^2, x(x+z^2-w^3))")?;
    ensure(residual.equals(&ideal_in(xv, "x - y^2, y^2*(y^2 + z^2 - w^3)")), "residual differs from (x-y^2, y^2(y^2+z^2-w^3))")?;

    // (c) the center selected in the x-chart
    let center = xc.analysis.as_ref().and_then(|a| a.center.as_ref()).ok_or("no center selected in the x-chart")?;
    ensure(center.ideal(4).equals(&Ideal::vars(4, &[0, 1])), format!("x-chart center is {}", center.render(xv)))?;

    // (d) strict transform in the x-chart
    let report = strict_transform_report(t, 2);
    let r = report.iter().find(|r| r.chart_id == "root.x").ok_or("no strict report for the x-chart")?;
    let curve = ideal_in(xv, "x, y, z^2 - w^3");
    ensure(r.strict.with(&[Polynomial::var(4, 0)]).same_zero_set(&curve), "X_1 ∩ E_1 is not V(x, y, z^2 - w^3)")?;
    let curve_sing = singular_locus(&curve, 3);
    ensure(!curve_sing.contains_one(), "V(x, y, z^2 - w^3) came out smooth")?;
    ensure(!r.smooth && r.singular.same_zero_set(&Ideal::vars(4, &[0, 1, 2, 3])), "Sing X_1 is not the origin")?;
    within(start, Duration::from_secs(5))?;
    let status = if run.is_ok() { "complete run" } else { "read from the partial tree" };
    Ok(format!("origin, then V(x,y) in the x-chart, Sing X_1 = {{0}}; {status}"))
}

fn cusp_suite() -> Outcome {
    let start = Instant::now();
    let (c, m) = problem(&["x", "y"], "y^2 - x^3", 2, &[]);
    let t = resolve(&c, &m, &RunOptions::default()).map_err(|e| e.to_string())?;
    ensure(t.blowup_count() == 1, format!("{} blow-ups", t.blowup_count()))?;
    let first = &t.root().blowup.as_ref().ok_or("no blow-up")?.1;
    ensure(first.vanishing == vec![0, 1] && first.shear.is_empty(), "center is not the origin")?;
    for (id, gens) in [("root.x", "y^2 - x"), ("root.y", "1 - x^3*y")] {
        let node = t.find(id).ok_or(format!("no chart {id}"))?;
        let mm = node.marked.as_ref().ok_or(format!("{id} collapsed"))?;
        ensure(mm.ideal.equals(&ideal_in(&node.chart.vars, gens)) && mm.d == 2, format!("{id} transform differs from ({gens}, 2)"))?;
        ensure(mm.cosupport_is_empty(), format!("{id} cosupport is not empty"))?;
    }
    let (_, m1) = problem(&["x", "y"], "y^2 - x^3", 1, &[]);
    let a = analyze_at_point(&m1, &[rat(0), rat(0)], 0, None, &Settings::default()).map_err(|e| e.to_string())?;
    ensure(a.inv.to_string() == "[2,0;3/2,0;inf]", format!("invariant at the origin is {}", a.inv))?;
    within(start, Duration::from_secs(1))?;
    Ok("one blow-up at the origin, both transforms empty, inv(0) = [2,0;3/2,0;inf]".into())
}

fn oracle_equivalence() -> Outcome {
    let fixtures: &[(&[&str], &str, u32)] = &[
        (&["x", "y"], "x", 1),
        (&["x", "y"], "x^2", 1),
        (&["x", "y"], "x^2*y^3", 1),
        (&["x", "y"], "x^3*y^2", 4),
        (&["x", "y"], "x^5*y", 2),
        (&["x", "y"], "y^2 - x^3", 1),
        (&["x", "y"], "y^2 - x^3", 2),
        (&["x", "y"], "x^3 + y^5, x^2*y^2", 2),
        (&["x", "y"], "x^2, y^3", 1),
        (&["x", "y"], "x^4 + y^4 + x^2*y", 3),
        (&["x", "y", "z"], "x*y*z", 2),
        (&["x", "y", "z"], "x^2*z + y^3", 2),
    ];
    let mut checked = 0;
    for (vars, gens, d) in fixtures {
        let e: Vec<(&str, usize)> = vec![("H1", 0), ("H2", 1)];
        let (_, m) = problem(vars, gens, *d, &e);
        let a = vec![rat(0); vars.len()];
        let ord = order_by_derivatives(m.ideal.gens(), &a).ok_or("zero ideal in fixtures")?;
        let expect = Rational::new(ord.into(), (*d).into());
        let got = mu_oracle(&m, &a, 6, 6).map_err(|e| format!("({gens}, {d}): {e}"))?;
        ensure(got.as_ref() == Some(&expect), format!("({gens}, {d}): mu oracle {got:?}, ord/d {expect}"))?;
        for (label, coord) in &e {
            let v = valuation_by_terms(m.ideal.gens(), *coord).ok_or("zero ideal in fixtures")?;
            let expect = Rational::new(v.into(), (*d).into());
            let got = mu_h_oracle(&m, label, &a, 6).map_err(|e| format!("({gens}, {d}) along {label}: {e}"))?;
            ensure(got.as_ref() == Some(&expect), format!("({gens}, {d}) along {label}: oracle {got:?}, valuation/d {expect}"))?;
        }
        checked += 1;
    }
    Ok(format!("{checked} fixtures, orders and both divisor valuations"))
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, max_terms: usize, max_exp: u32) -> Polynomial {
    let count = rng.gen_range(1..=max_terms);
    let terms = (0..count).map(|_| {
        let e: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=max_exp)).collect();
        let mut c = rng.gen_range(-3i64..=3);
        if c == 0 {
            c = 1;
        }
        (e, rat(c))
    });
    Polynomial::from_terms(n, terms)
}

fn random_ideal(rng: &mut ChaCha8Rng, n: usize) -> Ideal {
    let k = rng.gen_range(1..=2);
    Ideal::new(n, (0..k).map(|_| random_poly(rng, n, 3, 2)).collect())
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    (0..n).filter(|_| rng.gen_bool(0.4)).collect()
}

/// Every chart of the blow-up of a coordinate center against the chart
/// substitution written out by hand, and the chart derivative law for each
/// coordinate.
fn chart_derivative_law(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut charts = 0;
    for trial in 0..50 {
        let n = rng.gen_range(2..=3);
        let mut center: Vec<usize> = random_subset(rng, n);
        if center.len() < 2 {
            center = (0..n).collect();
        }
        let root = Chart::root((0..n).map(|i| format!("x{i}")).collect(), Vec::new());
        let children = root.blowup_charts(&Center::coordinate("root", center.clone()), 1).map_err(|e| e.to_string())?;
        ensure(children.len() == center.len(), format!("trial {trial}: {} charts", children.len()))?;
        let f = random_poly(rng, n, 4, 3);
        for child in &children {
            let k = child.parent.as_ref().and_then(|l| l.chart_var).ok_or("chart without chart variable")?;
            let y = |i: usize| Polynomial::var(n, i);
            let sigma: Vec<Polynomial> =
                (0..n).map(|j| if j != k && center.contains(&j) { y(j).mul(&y(k)) } else { y(j) }).collect();
            let pulled = f.substitute(&sigma);
            ensure(child.pull_back(&f) == pulled, format!("trial {trial}: chart {} substitution", child.id))?;
            for r in 0..n {
                let lhs = f.partial(r).substitute(&sigma);
                let ok = if r == k {
                    // x_k d/dx_k = y_k d/dy_k - sum over the other center coordinates
                    let mut rhs = y(k).mul(&pulled.partial(k));
                    for &j in center.iter().filter(|&&j| j != k) {
                        rhs = rhs.sub(&y(j).mul(&pulled.partial(j)));
                    }
                    y(k).mul(&lhs) == rhs
                } else if center.contains(&r) {
                    y(k).mul(&lhs) == pulled.partial(r)
                } else {
                    lhs == pulled.partial(r)
                };
                ensure(ok, format!("trial {trial}: chart {} coordinate {r}", child.id))?;
            }
            charts += 1;
        }
    }
    Ok(charts)
}

fn derivative_powers(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for trial in 0..50 {
        let n = rng.gen_range(1..=3);
        let free: Vec<usize> = (0..n).collect();
        let e = random_subset(rng, n);
        let i = random_ideal(rng, n);
        let (k, l) = (rng.gen_range(0..=3u32), rng.gen_range(0..=3u32));
        let nested = log_derivative_power(&log_derivative_power(&i, &free, &e, l), &free, &e, k);
        ensure(nested.equals(&log_derivative_power(&i, &free, &e, k + l)), format!("trial {trial}: D^{k} D^{l} != D^{}", k + l))?;

        let j = random_ideal(rng, n);
        let k = rng.gen_range(1..=3u32);
        let mut bound = Ideal::zero(n);
        for s in 0..=k {
            bound = bound.sum(&log_derivative_power(&i, &free, &e, s).product(&log_derivative_power(&j, &free, &e, k - s)));
        }
        let lhs = log_derivative_power(&i.product(&j), &free, &e, k);
        ensure(lhs.gens().iter().all(|g| bound.contains(g)), format!("trial {trial}: product rule inclusion at order {k}"))?;
    }
    Ok(())
}

/// Marked ideals with a coordinate center inside the cosupport by
/// construction: every term has degree at least `d` in the center variables.
fn admissible_fixture(rng: &mut ChaCha8Rng) -> (Chart, MarkedIdeal, Center) {
    loop {
        let n = rng.gen_range(2..=3);
        let d = rng.gen_range(1..=3u32);
        let mut center = random_subset(rng, n);
        if center.is_empty() {
            center = (0..n).collect();
        }
        let gens: Vec<Polynomial> = (0..rng.gen_range(1..=2))
            .map(|_| {
                let f = random_poly(rng, n, 3, 3);
                let terms = f.terms().iter().filter(|(e, _)| center.iter().map(|&j| e[j]).sum::<u32>() >= d).cloned();
                Polynomial::from_terms(n, terms.collect::<Vec<_>>())
            })
            .filter(|f| !f.is_zero())
            .collect();
        if gens.is_empty() {
            continue;
        }
        let e: Vec<ExcHypersurface> = random_subset(rng, n)
            .into_iter()
            .enumerate()
            .map(|(r, coord)| ExcHypersurface { label: DivisorLabel::input(&format!("H{}", r + 1), r as u32), coord, alive: true })
            .collect();
        let chart = Chart::root((0..n).map(|i| format!("x{i}")).collect(), e);
        let m = MarkedIdeal::new(&chart, vec![], Ideal::new(n, gens), d).expect("valid fixture");
        let ctr = Center::coordinate("root", center);
        if m.is_admissible(&ctr) {
            return (chart, m, ctr);
        }
    }
}

fn derivatives_after_blowup(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut pairs = 0;
    for fixture in 0..25 {
        let (chart, m, ctr) = admissible_fixture(rng);
        let free = m.free_coords();
        for child in chart.blowup_charts(&ctr, 1).map_err(|e| e.to_string())? {
            let k = child.parent.as_ref().and_then(|l| l.chart_var).ok_or("chart without chart variable")?;
            let moved = m.transform_admissible(&ctr, &child).map_err(|e| e.to_string())?.ok_or("collapsed chart")?;
            for j in 0..m.d {
                let dj = log_derivative_power(&m.ideal, &free, &m.e_coords(), j);
                let target = log_derivative_power(&moved.ideal, &free, &moved.e_coords(), j);
                for g in dj.gens() {
                    let t = child
                        .pull_back(g)
                        .div_var_pow(k, m.d - j)
                        .ok_or(format!("fixture {fixture}: D^{j} is not divisible in chart {}", child.id))?;
                    ensure(target.contains(&t), format!("fixture {fixture}: transform of D^{j} escapes D^{j} in chart {}", child.id))?;
                }
                pairs += 1;
            }
        }
    }
    Ok(pairs)
}

fn derivative_calculus() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let charts = chart_derivative_law(&mut rng)?;
    derivative_powers(&mut rng)?;
    let pairs = derivatives_after_blowup(&mut rng)?;
    Ok(format!("{charts} charts of 50 blow-ups, 50 ideals, 25 blown-up fixtures ({pairs} chart/order pairs)"))
}

fn equivalence_suite() -> Outcome {
    let fixtures: &[(&str, u32, &[(&str, usize)])] =
        &[("y^2 - x^3", 2, &[]), ("x^2*y + y^4", 2, &[]), ("x^3 + y^4", 3, &[]), ("y^2 - x^3", 2, &[("H1", 0)])];
    let mut runs = 0;
    let mut sequences = 0;
    for (gens, d, e) in fixtures {
        let (c, m) = problem(&["x", "y"], gens, *d, e);
        let coeff = m.coefficient_ideal();
        let r = equivalence_probe(&c, &m, &coeff, 2, 16, 1).map_err(|e| e.to_string())?;
        ensure(!r.distinguished(), format!("({gens}, {d}) told apart from its coefficient ideal: {:?}", r.distinction))?;
        sequences += r.sequences;
        runs += 1;
        if e.is_empty() {
            let plain = m.coefficient_ideal_with(&[]);
            let h = m.homogenized_ideal();
            let r = equivalence_probe(&c, &plain, &h, 2, 16, 2).map_err(|e| e.to_string())?;
            ensure(!r.distinguished(), format!("({gens}, {d}): coefficient and homogenized ideals told apart: {:?}", r.distinction))?;
            sequences += r.sequences;
            runs += 1;
        }
    }
    let (c, a) = problem(&["x", "y"], "x", 1, &[]);
    let (_, b) = problem(&["x", "y"], "x^2", 1, &[]);
    let r = equivalence_probe(&c, &a, &b, 2, 0, 0).map_err(|e| e.to_string())?;
    let w = r.distinction.ok_or("((x),1) and ((x^2),1) not told apart")?;
    let sa = apply_sequence(&Stage::new(c.clone(), a), &w.sequence);
    let sb = apply_sequence(&Stage::new(c, b), &w.sequence);
    let replays = match (&sa, &sb) {
        (Ok(x), Ok(y)) => match (&x.marked, &y.marked) {
            (Some(p), Some(q)) => p.cosupport_is_empty() != q.cosupport_is_empty() || !p.cosupport_ideal().same_zero_set(&q.cosupport_ideal()),
            _ => true,
        },
        _ => sa.is_ok() != sb.is_ok(),
    };
    ensure(replays, format!("witness `{}` does not replay", w.sequence))?;
    Ok(format!("{runs} probes at depth 2 ({sequences} sequences) find nothing; (x) vs (x^2) split by `{}`", w.sequence))
}

fn bundled_runs() -> Result<Vec<(String, Chart, MarkedIdeal)>, String> {
    let mut out = Vec::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(problems_dir())
        .map_err(|e| format!("problems directory: {e}"))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    paths.sort();
    for p in paths {
        let text = std::fs::read_to_string(&p).map_err(|e| e.to_string())?;
        let (c, m) = ProblemFile::parse(&text).and_then(|f| f.build()).map_err(|e| format!("{}: {e}", p.display()))?;
        out.push((p.file_stem().unwrap().to_string_lossy().into_owned(), c, m));
    }
    Ok(out)
}

fn monotonicity_suite() -> Outcome {
    let mut checked = 0;
    let mut runs = 0;
    for (name, c, m) in bundled_runs()? {
        let run = resolve(&c, &m, &RunOptions::default());
        let t = match &run {
            Ok(t) => t,
            Err(e) => e.partial_tree().ok_or(format!("{name}: {e}"))?,
        };
        let mono = check_monotonicity(t, 6).map_err(|e| format!("{name}: {e}"))?;
        ensure(mono.ok(), format!("{name}: {:?}", mono.failures))?;
        let overlap = overlap_all_years(t);
        ensure(overlap.ok(), format!("{name}: {:?}", overlap.failures))?;
        checked += mono.checked + overlap.checked;
        runs += 1;
    }
    Ok(format!("{runs} bundled runs, {checked} point and overlap checks"))
}

fn functoriality_suite() -> Outcome {
    let fixtures: &[(&[&str], &str, u32, &[(&str, usize)])] = &[
        (&["x", "y"], "y^2 - x^3", 2, &[]),
        (&["x", "y"], "y^2 - x^3", 1, &[]),
        (&["x", "y"], "y^2 - x^3", 2, &[("H1", 0)]),
        (&["x", "y"], "x^3*y^2", 2, &[("H1", 0), ("H2", 1)]),
        (&["x", "y"], "x*y", 1, &[]),
    ];
    let mut years = 0;
    for (vars, gens, d, e) in fixtures {
        let (c, m) = problem(vars, gens, *d, e);
        let r = check_functoriality(&c, &m, &RunOptions::default()).map_err(|e| format!("({gens}, {d}): {e}"))?;
        ensure(r.ok() && r.checked > 0, format!("({gens}, {d}): {:?}", r.failures))?;
        years += r.checked;
    }
    Ok(format!("{} fixtures, {years} years with cylinder centers", fixtures.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("worked example", worked_example),
        ("cusp", cusp_suite),
        ("order oracles", oracle_equivalence),
        ("derivative calculus", derivative_calculus),
        ("equivalence", equivalence_suite),
        ("monotonicity", monotonicity_suite),
        ("functoriality", functoriality_suite),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS in {secs:.2} s: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL in {secs:.2} s: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
