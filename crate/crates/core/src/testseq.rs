//! Test sequences: admissible blow-ups, products with a line and blow-ups of
//! intersections of two divisors, applied to marked ideals. On top of them,
//! the oracles that recover `ord_a I / d` and `ord_{H,a} I / d` from test
//! sequences alone, and a bounded search for a sequence telling two marked
//! ideals apart.

use crate::algebra::{parse_rational, render_rational, rat, Ideal, Polynomial, Rational};
use crate::chart::{Center, Chart, ExcHypersurface};
use crate::error::{Error, Result};
use crate::marked::MarkedIdeal;
use crate::resolver::sample_points;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    /// `M x A^1 -> M`; the horizontal divisor `V(t)` joins `E` last.
    Product,
    /// Admissible blow-up of `V(x - c : (x, c) in center)`, followed into
    /// the chart of the named variable.
    Blowup { center: Vec<(String, Rational)>, chart: String },
    /// Blow-up of `H_first ∩ H_second`, positions in the chart's divisor
    /// list counted from 1.
    Exceptional { first: usize, second: usize, chart: String },
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Product => write!(f, "P"),
            Step::Blowup { center, chart } => {
                let parts: Vec<String> = center
                    .iter()
                    .map(|(v, c)| {
                        if c.is_zero() {
                            v.clone()
                        } else if *c > Rational::zero() {
                            format!("{v}-{}", render_rational(c))
                        } else {
                            format!("{v}+{}", render_rational(&-c))
                        }
                    })
                    .collect();
                write!(f, "B({})@{chart}", parts.join(","))
            }
            Step::Exceptional { first, second, chart } => write!(f, "E({first},{second})@{chart}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TestSequence {
    pub steps: Vec<Step>,
}

impl fmt::Display for TestSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.steps.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join(";"))
    }
}

impl TestSequence {
    /// Parses `P;B(x,y-1)@x;E(1,2)@t`. The empty string is the empty sequence.
    pub fn parse(text: &str) -> Result<TestSequence> {
        let mut steps = Vec::new();
        for (i, raw) in text.split(';').enumerate() {
            let s = raw.trim();
            if s.is_empty() {
                continue;
            }
            steps.push(parse_step(s).map_err(|m| Error::Input(format!("step {}: {m}: {s:?}", i + 1)))?);
        }
        Ok(TestSequence { steps })
    }

    pub fn then(&self, step: Step) -> TestSequence {
        let mut steps = self.steps.clone();
        steps.push(step);
        TestSequence { steps }
    }
}

fn parse_step(s: &str) -> std::result::Result<Step, String> {
    if s == "P" {
        return Ok(Step::Product);
    }
    let (head, chart) = s.rsplit_once('@').ok_or("missing @chart")?;
    let chart = chart.trim().to_string();
    if chart.is_empty() {
        return Err("empty chart name".into());
    }
    let head = head.trim();
    let inner = |prefix: char| -> std::result::Result<&str, String> {
        head.strip_prefix(prefix)
            .and_then(|r| r.trim_start().strip_prefix('('))
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| format!("expected {prefix}(...)"))
    };
    match head.chars().next() {
        Some('B') => {
            let mut center = Vec::new();
            for entry in inner('B')?.split(',') {
                let e = entry.trim();
                let cut = e.find(['+', '-']);
                let (name, c) = match cut {
                    None => (e, Rational::zero()),
                    Some(k) => {
                        let value = parse_rational(e[k + 1..].trim()).map_err(|err| err.to_string())?;
                        (e[..k].trim(), if &e[k..k + 1] == "-" { value } else { -value })
                    }
                };
                if name.is_empty() {
                    return Err("empty coordinate in center".into());
                }
                center.push((name.to_string(), c));
            }
            Ok(Step::Blowup { center, chart })
        }
        Some('E') => {
            let body = inner('E')?;
            let (a, b) = body.split_once(',').ok_or("expected two divisor positions")?;
            let first = a.trim().parse().map_err(|_| "bad divisor position")?;
            let second = b.trim().parse().map_err(|_| "bad divisor position")?;
            Ok(Step::Exceptional { first, second, chart })
        }
        _ => Err("unknown step".into()),
    }
}

/// A chart with the transform of a marked ideal on it; `marked` is `None`
/// when the strict transform of `N` misses the chart.
#[derive(Clone, Debug)]
pub struct Stage {
    pub chart: Chart,
    pub marked: Option<MarkedIdeal>,
}

impl Stage {
    pub fn new(chart: Chart, marked: MarkedIdeal) -> Stage {
        Stage { chart, marked: Some(marked) }
    }

    fn var(&self, name: &str) -> Result<usize> {
        self.chart
            .vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::Input(format!("no coordinate {name} in chart {}", self.chart.id)))
    }
}

fn pick_child(children: Vec<Chart>, k: usize) -> Result<Chart> {
    children
        .into_iter()
        .find(|c| c.parent.as_ref().and_then(|l| l.chart_var) == Some(k))
        .ok_or_else(|| Error::InvalidCenter("the chart variable is not a coordinate of the center".into()))
}

/// The center a blow-up step names, in the stage's chart.
pub fn step_center(stage: &Stage, center: &[(String, Rational)]) -> Result<Center> {
    let mut vanishing = Vec::with_capacity(center.len());
    let mut shear = Vec::new();
    for (name, c) in center {
        let j = stage.var(name)?;
        vanishing.push(j);
        if !c.is_zero() {
            shear.push((j, Polynomial::constant(stage.chart.nvars(), c.clone())));
        }
    }
    let mut ctr = Center::coordinate(&stage.chart.id, vanishing);
    shear.sort_by_key(|(j, _)| *j);
    ctr.shear = shear;
    stage.chart.validate_center(&ctr)?;
    Ok(ctr)
}

/// One test transformation. Blow-ups must be admissible.
pub fn apply_step(stage: &Stage, step: &Step) -> Result<Stage> {
    let year = stage.chart.year + 1;
    let m = stage.marked.as_ref().ok_or_else(|| Error::Input(format!("nothing left on chart {}", stage.chart.id)))?;
    match step {
        Step::Product => {
            let child = stage.chart.product_with_line(year, true);
            let marked = m.transform_product(&child);
            Ok(Stage { chart: child, marked: Some(marked) })
        }
        Step::Blowup { center, chart } => {
            let ctr = step_center(stage, center)?;
            if !m.is_admissible(&ctr) {
                return Err(Error::NotAdmissible(format!("{} is not in the cosupport", ctr.render(&stage.chart.vars))));
            }
            let k = stage.var(chart)?;
            let child = pick_child(stage.chart.blowup_charts(&ctr, year)?, k)?;
            let marked = m.transform_admissible(&ctr, &child)?;
            Ok(Stage { chart: child, marked })
        }
        Step::Exceptional { first, second, chart } => {
            let div = |pos: usize| -> Result<&ExcHypersurface> {
                pos.checked_sub(1)
                    .and_then(|i| stage.chart.e.get(i))
                    .filter(|h| h.alive)
                    .ok_or_else(|| Error::Input(format!("no divisor at position {pos} on chart {}", stage.chart.id)))
            };
            let (a, b) = (div(*first)?, div(*second)?);
            if a.coord == b.coord {
                return Err(Error::InvalidCenter("the two divisors coincide".into()));
            }
            let ctr = Center::coordinate(&stage.chart.id, vec![a.coord, b.coord]);
            let k = stage.var(chart)?;
            let child = pick_child(stage.chart.blowup_charts(&ctr, year)?, k)?;
            let marked = m.transform_exceptional(&child)?;
            Ok(Stage { chart: child, marked: Some(marked) })
        }
    }
}

/// Folds the steps; an error names the failing step.
pub fn apply_sequence(stage: &Stage, seq: &TestSequence) -> Result<Stage> {
    let mut cur = stage.clone();
    for (i, step) in seq.steps.iter().enumerate() {
        cur = apply_step(&cur, step).map_err(|e| at_step(e, i + 1, step))?;
    }
    Ok(cur)
}

fn at_step(e: Error, i: usize, step: &Step) -> Error {
    let tag = |s: String| format!("step {i} ({step}): {s}");
    match e {
        Error::NotAdmissible(s) => Error::NotAdmissible(tag(s)),
        Error::InvalidCenter(s) => Error::InvalidCenter(tag(s)),
        Error::Input(s) => Error::Input(tag(s)),
        other => other,
    }
}

/// `m` moved so that `a` is the origin, on a fresh chart. Divisors not
/// through `a` play no role there and are dropped.
fn centered(m: &MarkedIdeal, a: &[Rational]) -> Result<Stage> {
    if a.len() != m.nvars {
        return Err(Error::Input(format!("point has {} coordinates, chart has {}", a.len(), m.nvars)));
    }
    if !m.in_cosupport(a) {
        return Err(Error::NotInCosupport("point outside the cosupport".into()));
    }
    let e: Vec<ExcHypersurface> = m.e.iter().filter(|h| h.alive && a[h.coord].is_zero()).cloned().collect();
    let chart = Chart::root(crate::algebra::poly::default_names(m.nvars), e);
    let ideal = m.ideal.map(m.nvars, |f| f.translate(a));
    let marked = MarkedIdeal::new(&chart, m.normal.clone(), ideal, m.d)?;
    Ok(Stage::new(chart, marked))
}

fn names_of(stage: &Stage, idx: &[usize]) -> Vec<(String, Rational)> {
    idx.iter().map(|&j| (stage.chart.vars[j].clone(), Rational::zero())).collect()
}

/// `ord_a I / d` read off test sequences: after the product with a line,
/// blow up the point of the curve `{a} x A^1` over the last divisor `j`
/// times, then blow up `D ∩ N` while that stays admissible. The pair
/// `(j, i)` is realized when the `i`-th such blow-up is admissible, which is
/// the valuation test `ord_D I >= d`; the answer is
/// `1 + max (i + 1) / j` over realized pairs. `None` is infinity.
pub fn mu_oracle(m: &MarkedIdeal, a: &[Rational], j_max: u32, i_max: u32) -> Result<Option<Rational>> {
    let start = centered(m, a)?;
    if start.marked.as_ref().is_some_and(|x| x.ideal.is_zero()) {
        return Ok(None);
    }
    let n = m.nvars;
    let t = n;
    let mut cur = apply_step(&start, &Step::Product)?;
    let tname = cur.chart.vars[t].clone();
    let all: Vec<usize> = (0..=n).collect();
    let mut along_d: Vec<usize> = m.normal.clone();
    along_d.push(t);
    let mut best: Option<Rational> = None;
    for j in 1..=j_max {
        cur = apply_step(&cur, &Step::Blowup { center: names_of(&cur, &all), chart: tname.clone() })?;
        let mut probe = cur.clone();
        for i in 0..=i_max {
            let pm = probe.marked.as_ref().expect("the t-chart meets N");
            let realized = pm.ideal.valuation_in(t).is_some_and(|v| v >= m.d);
            if !realized {
                break;
            }
            let r = Rational::new((i + 1).into(), j.into());
            if best.as_ref().is_none_or(|b| r > *b) {
                best = Some(r);
            }
            if i < i_max {
                probe = apply_step(&probe, &Step::Blowup { center: names_of(&probe, &along_d), chart: tname.clone() })?;
            }
        }
    }
    Ok(Some(Rational::one() + best.unwrap_or_else(Rational::zero)))
}

/// `ord_{H,a} I / d` read off test sequences: after the product with a
/// line, repeatedly blow up the intersection of the newest divisor with `H`
/// along the curve `{a} x A^1`; the increments of `ord / d` at the tracked
/// points settle at the answer. `None` is infinity.
pub fn mu_h_oracle(m: &MarkedIdeal, h: &str, a: &[Rational], j_max: u32) -> Result<Option<Rational>> {
    let hyp = m
        .e
        .iter()
        .find(|x| x.alive && x.label.name == h)
        .ok_or_else(|| Error::Input(format!("no divisor {h}")))?;
    if a.len() != m.nvars || !a[hyp.coord].is_zero() {
        return Err(Error::Input(format!("point is not on {h}")));
    }
    let start = centered(m, a)?;
    if start.marked.as_ref().is_some_and(|x| x.ideal.is_zero()) {
        return Ok(None);
    }
    let mut cur = apply_step(&start, &Step::Product)?;
    let tname = cur.chart.vars[m.nvars].clone();
    let mu = |s: &Stage| {
        let o = s.marked.as_ref().and_then(|x| x.ideal.order_at_origin()).expect("nonzero ideal");
        Rational::new(o.into(), m.d.into())
    };
    let mut mus = vec![mu(&cur)];
    for _ in 0..j_max.max(2) {
        let h_pos = cur.chart.e.iter().position(|x| x.label.name == h).expect("H survives") + 1;
        let newest = cur.chart.e.len();
        cur = apply_step(&cur, &Step::Exceptional { first: h_pos, second: newest, chart: tname.clone() })?;
        mus.push(mu(&cur));
    }
    let diffs: Vec<Rational> = mus.windows(2).map(|w| &w[1] - &w[0]).collect();
    let last = &diffs[diffs.len() - 1];
    if diffs[diffs.len() - 2] != *last {
        return Err(Error::Unstable(format!("increments {} and {} differ", render_rational(&diffs[diffs.len() - 2]), render_rational(last))));
    }
    Ok(Some(last.clone()))
}

#[derive(Clone, Debug)]
pub struct Distinction {
    pub sequence: TestSequence,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct ProbeReport {
    /// Sequences applied to both marked ideals.
    pub sequences: usize,
    pub distinction: Option<Distinction>,
}

impl ProbeReport {
    pub fn distinguished(&self) -> bool {
        self.distinction.is_some()
    }
}

/// Both marked ideals after the same steps; they share the chart.
#[derive(Clone)]
struct Pair {
    chart: Chart,
    a: MarkedIdeal,
    b: MarkedIdeal,
}

fn subsets_of(idx: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = idx.iter().map(|&j| vec![j]).collect();
    for (p, &i) in idx.iter().enumerate() {
        for &j in &idx[p + 1..] {
            out.push(vec![i, j]);
        }
    }
    if idx.len() > 2 {
        out.push(idx.to_vec());
    }
    out
}

/// Blow-up centers tried at a stage: coordinate subspaces of `N` of
/// codimension one, two and the origin.
fn coordinate_centers(chart: &Chart, m: &MarkedIdeal) -> Vec<Center> {
    subsets_of(&m.free_coords())
        .into_iter()
        .map(|mut s| {
            s.extend(m.normal.iter().copied());
            Center::coordinate(&chart.id, s)
        })
        .collect()
}

fn exceptional_pairs(chart: &Chart) -> Vec<(usize, usize)> {
    let alive: Vec<usize> = (0..chart.e.len()).filter(|&i| chart.e[i].alive).collect();
    let mut out = Vec::new();
    for (p, &i) in alive.iter().enumerate() {
        for &j in &alive[p + 1..] {
            out.push((i + 1, j + 1));
        }
    }
    out
}

fn center_step(chart: &Chart, ctr: &Center, k: usize) -> Step {
    let center = ctr
        .vanishing
        .iter()
        .map(|&j| {
            let c = ctr.shear.iter().find(|(t, _)| *t == j).map(|(_, h)| h.constant_term()).unwrap_or_else(Rational::zero);
            (chart.vars[j].clone(), c)
        })
        .collect();
    Step::Blowup { center, chart: chart.vars[k].clone() }
}

/// Applies `step` to both; `Ok(None)` when `N` misses the chart.
fn advance(p: &Pair, step: &Step) -> Result<Option<Pair>> {
    let sa = apply_step(&Stage::new(p.chart.clone(), p.a.clone()), step)?;
    let sb = apply_step(&Stage::new(p.chart.clone(), p.b.clone()), step)?;
    Ok(match (sa.marked, sb.marked) {
        (Some(a), Some(b)) => Some(Pair { chart: sa.chart, a, b }),
        _ => None,
    })
}

/// Cosupports compared at grid points and by mutual radical membership.
fn compare_cosupports(p: &Pair) -> Option<String> {
    let n = p.chart.nvars();
    for pt in sample_points(n, &[], 16) {
        let (ia, ib) = (p.a.in_cosupport(&pt), p.b.in_cosupport(&pt));
        if ia != ib {
            let shown: Vec<String> = pt.iter().map(render_rational).collect();
            return Some(format!("cosupports differ at ({}): {ia} versus {ib}", shown.join(", ")));
        }
    }
    let (ca, cb) = (cosupport(&p.a), cosupport(&p.b));
    if !ca.same_zero_set(&cb) {
        return Some(format!("cosupports {} and {} differ", ca.render(&p.chart.vars), cb.render(&p.chart.vars)));
    }
    None
}

fn cosupport(m: &MarkedIdeal) -> Ideal {
    let n = m.nvars;
    let normal: Vec<Polynomial> = m.normal.iter().map(|&j| Polynomial::var(n, j)).collect();
    m.cosupport_ideal().with(&normal)
}

/// Blow-ups admissible for exactly one of the two.
fn verdict_gap(p: &Pair, ctr: &Center) -> Option<String> {
    let (va, vb) = (p.a.is_admissible(ctr), p.b.is_admissible(ctr));
    (va != vb).then(|| {
        format!(
            "{} is admissible for the {} only",
            ctr.render(&p.chart.vars),
            if va { "first" } else { "second" }
        )
    })
}

struct Prober {
    report: ProbeReport,
}

impl Prober {
    fn found(&mut self, seq: TestSequence, reason: String) {
        if self.report.distinction.is_none() {
            self.report.distinction = Some(Distinction { sequence: seq, reason });
        }
    }

    fn search(&mut self, p: &Pair, seq: &TestSequence, depth: u32) -> Result<()> {
        self.report.sequences += 1;
        if let Some(r) = compare_cosupports(p) {
            self.found(seq.clone(), r);
            return Ok(());
        }
        if depth == 0 {
            return Ok(());
        }
        let mut next: Vec<Step> = vec![Step::Product];
        for ctr in coordinate_centers(&p.chart, &p.a) {
            if let Some(r) = verdict_gap(p, &ctr) {
                let k = ctr.vanishing[0];
                self.found(seq.then(center_step(&p.chart, &ctr, k)), r);
                return Ok(());
            }
            if p.a.is_admissible(&ctr) {
                next.extend(ctr.vanishing.iter().map(|&k| center_step(&p.chart, &ctr, k)));
            }
        }
        for (i, j) in exceptional_pairs(&p.chart) {
            for c in [i, j] {
                let k = p.chart.e[c - 1].coord;
                next.push(Step::Exceptional { first: i, second: j, chart: p.chart.vars[k].clone() });
            }
        }
        for step in next {
            if let Some(child) = advance(p, &step)? {
                self.search(&child, &seq.then(step), depth - 1)?;
                if self.report.distinguished() {
                    return Ok(());
                }
            }
        }
        Ok(())
    }

    fn random_trial(&mut self, start: &Pair, depth: u32, rng: &mut ChaCha8Rng) -> Result<()> {
        let mut p = start.clone();
        let mut seq = TestSequence::default();
        for _ in 0..rng.gen_range(1..=depth.max(1)) {
            let roll = rng.gen_range(0..4);
            let step = if roll == 0 {
                Step::Product
            } else if roll == 1 && !exceptional_pairs(&p.chart).is_empty() {
                let pairs = exceptional_pairs(&p.chart);
                let (i, j) = *pairs.choose(rng).expect("nonempty");
                let c = if rng.gen_bool(0.5) { i } else { j };
                Step::Exceptional { first: i, second: j, chart: p.chart.vars[p.chart.e[c - 1].coord].clone() }
            } else {
                let ctr = random_center(&p, rng);
                if let Some(r) = verdict_gap(&p, &ctr) {
                    let k = ctr.vanishing[0];
                    self.found(seq.then(center_step(&p.chart, &ctr, k)), r);
                    return Ok(());
                }
                if !p.a.is_admissible(&ctr) {
                    break;
                }
                let k = *ctr.vanishing.choose(rng).expect("nonempty center");
                center_step(&p.chart, &ctr, k)
            };
            match advance(&p, &step)? {
                Some(next) => {
                    seq = seq.then(step);
                    p = next;
                }
                None => break,
            }
        }
        self.report.sequences += 1;
        if let Some(r) = compare_cosupports(&p) {
            self.found(seq, r);
        }
        Ok(())
    }
}

/// A coordinate subspace of `N`, possibly moved off the divisors to a grid
/// value in the directions that are not divisors.
fn random_center(p: &Pair, rng: &mut ChaCha8Rng) -> Center {
    let n = p.chart.nvars();
    let free = p.a.free_coords();
    let mut s: Vec<usize> = free.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    if s.is_empty() {
        s.push(*free.choose(rng).expect("a free coordinate"));
    }
    let alive = p.chart.alive_coords();
    let mut shear = Vec::new();
    for &j in &s {
        let c: i64 = [0, 0, 1, -1, 2][rng.gen_range(0..5)];
        if c != 0 && !alive.contains(&j) {
            shear.push((j, Polynomial::constant(n, rat(c))));
        }
    }
    s.extend(p.a.normal.iter().copied());
    let mut ctr = Center::coordinate(&p.chart.id, s);
    ctr.shear = shear;
    ctr
}

/// Searches test sequences up to `depth` steps, exhaustively over coordinate
/// centers and then `trials` random ones, for a step admissible for one
/// marked ideal and not the other, or a stage where the cosupports differ.
/// Finding nothing is evidence of equivalence, not proof.
pub fn equivalence_probe(
    chart: &Chart,
    a: &MarkedIdeal,
    b: &MarkedIdeal,
    depth: u32,
    trials: u32,
    seed: u64,
) -> Result<ProbeReport> {
    let labels = |m: &MarkedIdeal| m.e_view().iter().map(|h| (h.label.clone(), h.coord)).collect::<Vec<_>>();
    if a.chart_id != chart.id || b.chart_id != chart.id || a.normal != b.normal || labels(a) != labels(b) {
        return Err(Error::FrameMismatch("the two marked ideals need the same chart, N and E".into()));
    }
    let start = Pair { chart: chart.clone(), a: a.clone(), b: b.clone() };
    let mut prober = Prober { report: ProbeReport::default() };
    prober.search(&start, &TestSequence::default(), depth)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        if prober.report.distinguished() {
            break;
        }
        prober.random_trial(&start, depth, &mut rng)?;
    }
    Ok(prober.report)
}

#[cfg(test)]
mod tests;
