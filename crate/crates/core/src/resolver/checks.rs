//! Re-derivations run against a finished tree: decrease of `(inv, mu)` at
//! sampled points over each center, agreement of sibling centers on chart
//! overlaps, and agreement with the resolution of a product with a line.

use super::{resolve, ResolutionTree, RunOptions};
use crate::algebra::{rat, Ideal, Rational};
use crate::chart::{sibling_transition, Chart};
use crate::error::{Error, Result};
use crate::invariant::{analyze_at_point, Analysis, InvariantValue, Settings, Terminator};
use crate::marked::MarkedIdeal;
use num_traits::Zero;
use std::cmp::Ordering;
use std::collections::HashMap;

#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn absorb(&mut self, other: CheckReport) {
        self.checked += other.checked;
        self.failures.extend(other.failures);
    }
}

const GRID: [i64; 4] = [0, 1, -1, 2];

/// Points of the grid `{0, 1, -1, 2}^n` with the given coordinates fixed,
/// in a deterministic order, at most `cap` of them.
pub fn sample_points(n: usize, fixed: &[(usize, Rational)], cap: usize) -> Vec<Vec<Rational>> {
    let open: Vec<usize> = (0..n).filter(|j| !fixed.iter().any(|(i, _)| i == j)).collect();
    let mut out = Vec::new();
    let total = GRID.len().pow(open.len() as u32);
    for code in 0..total {
        if out.len() >= cap {
            break;
        }
        let mut p = vec![Rational::zero(); n];
        for (i, v) in fixed {
            p[*i] = v.clone();
        }
        let mut c = code;
        for &j in &open {
            p[j] = rat(GRID[c % GRID.len()]);
            c /= GRID.len();
        }
        out.push(p);
    }
    out
}

struct Pointwise<'a> {
    tree: &'a ResolutionTree,
    settings: Settings,
    cache: HashMap<(usize, Vec<Rational>), Analysis>,
}

impl Pointwise<'_> {
    /// The invariant at `a` in chart `idx`, with the history of the images of
    /// `a` in the ancestor charts at their creation years.
    fn at(&mut self, idx: usize, a: &[Rational]) -> Result<Analysis> {
        let key = (idx, a.to_vec());
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit.clone());
        }
        let node = &self.tree.nodes[idx];
        let m = node.marked.as_ref().ok_or_else(|| Error::Input(format!("chart {} has no marked ideal", node.chart.id)))?;
        let prev = match node.parent {
            None => None,
            Some(p) => {
                let b = node.chart.transport_point(a).expect("child chart has a parent");
                Some(self.at(p, &b)?.history)
            }
        };
        let out = analyze_at_point(m, a, node.chart.year, prev.as_deref(), &self.settings)?;
        self.cache.insert(key, out.clone());
        Ok(out)
    }
}

/// The pointwise invariant at `a` in the named chart of the tree.
pub fn pointwise_at(t: &ResolutionTree, chart_id: &str, a: &[Rational]) -> Result<Analysis> {
    let idx = t
        .nodes
        .iter()
        .position(|n| n.chart.id == chart_id)
        .ok_or_else(|| Error::Input(format!("no chart {chart_id}")))?;
    Pointwise { tree: t, settings: Settings::default(), cache: HashMap::new() }.at(idx, a)
}

fn mu_cmp(a: &Option<Rational>, b: &Option<Rational>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Greater,
        (Some(_), None) => Ordering::Less,
        (Some(x), Some(y)) => x.cmp(y),
    }
}

fn monomial(inv: &InvariantValue) -> bool {
    inv.terminator == Terminator::Zero
}

/// At sampled cosupport points `a` over each center, `(inv, mu)(a)` is
/// lexicographically below its value at the image `b`; when `inv` is unchanged
/// in a monomial phase, `mu` drops by a positive multiple of `1/d`. At a few
/// sampled points off the exceptional divisor, `(inv, mu, J)` is unchanged.
pub fn check_monotonicity(t: &ResolutionTree, cap: usize) -> Result<CheckReport> {
    let mut pw = Pointwise { tree: t, settings: Settings::default(), cache: HashMap::new() };
    let mut report = CheckReport::default();
    for (pi, parent) in t.nodes.iter().enumerate() {
        if parent.blowup.is_none() {
            continue;
        }
        for &ci in &parent.children {
            let child = &t.nodes[ci];
            let (Some(m), Some(k)) = (&child.marked, child.chart.parent.as_ref().and_then(|l| l.chart_var)) else {
                continue;
            };
            let n = m.nvars;
            let over: Vec<Vec<Rational>> = sample_points(n, &[(k, rat(0))], usize::MAX)
                .into_iter()
                .filter(|a| m.in_cosupport(a) && child.region.vanishes_at(a))
                .take(cap)
                .collect();
            for a in over {
                let b = child.chart.transport_point(&a).expect("child chart has a parent");
                let va = pw.at(ci, &a)?;
                let vb = pw.at(pi, &b)?;
                report.checked += 1;
                let ord = va.inv.cmp(&vb.inv).then_with(|| mu_cmp(&va.mu, &vb.mu));
                if ord != Ordering::Less {
                    report.failures.push(format!(
                        "{} at {:?}: ({}, {}) not below ({}, {}) at the image in {}",
                        child.chart.id,
                        render_point(&a),
                        va.inv,
                        va.mu_string(),
                        vb.inv,
                        vb.mu_string(),
                        parent.chart.id
                    ));
                    continue;
                }
                if va.inv == vb.inv && monomial(&va.inv) {
                    let (Some(ma), Some(mb)) = (&va.mu, &vb.mu) else { continue };
                    let steps = (mb - ma) * Rational::from_integer(va.bottom_d.into());
                    if !steps.is_integer() || steps <= Rational::zero() {
                        report.failures.push(format!(
                            "{} at {:?}: monomial drop {} - {} is not a positive multiple of 1/{}",
                            child.chart.id,
                            render_point(&a),
                            vb.mu_string(),
                            va.mu_string(),
                            va.bottom_d
                        ));
                    }
                }
            }
            let off: Vec<Vec<Rational>> = sample_points(n, &[(k, rat(1))], usize::MAX)
                .into_iter()
                .filter(|a| m.in_cosupport(a) && child.region.vanishes_at(a))
                .take(cap.min(3))
                .collect();
            for a in off {
                let b = child.chart.transport_point(&a).expect("child chart has a parent");
                let va = pw.at(ci, &a)?;
                let vb = pw.at(pi, &b)?;
                report.checked += 1;
                if va.inv != vb.inv || va.mu != vb.mu || va.j != vb.j {
                    report.failures.push(format!(
                        "{} at {:?} off the center: ({}, {}) differs from ({}, {})",
                        child.chart.id,
                        render_point(&a),
                        va.inv,
                        va.mu_string(),
                        vb.inv,
                        vb.mu_string()
                    ));
                }
            }
        }
    }
    Ok(report)
}

fn render_point(p: &[Rational]) -> Vec<String> {
    p.iter().map(crate::algebra::render_rational).collect()
}

/// Sibling charts of one blow-up that choose centers in `year` see the same
/// center on their overlap: sampled center points of each chart map into the
/// center of every sibling containing them.
pub fn overlap_consistency(t: &ResolutionTree, year: u32) -> CheckReport {
    let mut report = CheckReport::default();
    for parent in &t.nodes {
        let Some((_, pc)) = &parent.blowup else { continue };
        if pc.equation.is_some() || pc.vanishing.is_empty() {
            continue;
        }
        for &qi in &parent.children {
            let q = &t.nodes[qi];
            let Some((qy, qc)) = &q.blowup else { continue };
            if *qy != year || qc.vanishing.is_empty() || qc.equation.is_some() {
                continue;
            }
            let kq = q.chart.parent.as_ref().and_then(|l| l.chart_var).expect("blow-up chart");
            let n = q.chart.nvars();
            let fixed: Vec<(usize, Rational)> = qc.vanishing.iter().map(|&j| (j, rat(0))).collect();
            for mut p in sample_points(n, &fixed, 16) {
                for (t_, h) in &qc.shear {
                    p[*t_] = h.eval(&p);
                }
                if !q.region.vanishes_at(&p) {
                    continue;
                }
                for &ri in &parent.children {
                    if ri == qi {
                        continue;
                    }
                    let r = &t.nodes[ri];
                    if r.marked.is_none() {
                        continue;
                    }
                    let kr = r.chart.parent.as_ref().and_then(|l| l.chart_var).expect("blow-up chart");
                    let Some(pt) = sibling_transition(&p, &pc.vanishing, kq, kr) else { continue };
                    if !r.region.vanishes_at(&pt) {
                        continue;
                    }
                    report.checked += 1;
                    match &r.blowup {
                        Some((ry, rc)) if *ry == year && rc.ideal(n).vanishes_at(&pt) => {}
                        _ => report.failures.push(format!(
                            "year {year}: point {:?} of the center in {} is not in the center of {}",
                            render_point(&p),
                            q.chart.id,
                            r.chart.id
                        )),
                    }
                }
            }
        }
    }
    report
}

/// Overlap consistency in every year of the run.
pub fn overlap_all_years(t: &ResolutionTree) -> CheckReport {
    let mut report = CheckReport::default();
    for y in &t.years {
        report.absorb(overlap_consistency(t, y.year));
    }
    report
}

/// Resolves `m` and its pull-back to `M x A^1` (the new coordinate free, no
/// new divisor) and checks that every center of the second run is the
/// cylinder over the center of the first in the same chart and year.
pub fn check_functoriality(chart: &Chart, m: &MarkedIdeal, opts: &RunOptions) -> Result<CheckReport> {
    let base = resolve(chart, m, opts)?;
    let line = chart.product_with_line(0, false);
    let root = Chart { id: chart.id.clone(), parent: None, year: 0, ..line };
    let n = chart.nvars();
    let lifted = MarkedIdeal::new(&root, m.normal.clone(), m.ideal.map(n + 1, |g| g.extend_vars(1)), m.d)?;
    let cyl = resolve(&root, &lifted, opts)?;
    let mut report = CheckReport::default();
    if base.years.len() != cyl.years.len() {
        report.failures.push(format!("{} blow-ups versus {} on the product", base.years.len(), cyl.years.len()));
    }
    for y in 1..=base.years.len().min(cyl.years.len()) as u32 {
        let a = base.centers_in_year(y);
        let b = cyl.centers_in_year(y);
        report.checked += 1;
        let ids_a: Vec<&str> = a.iter().map(|c| c.0).collect();
        let ids_b: Vec<&str> = b.iter().map(|c| c.0).collect();
        if ids_a != ids_b {
            report.failures.push(format!("year {y}: charts {ids_a:?} versus {ids_b:?}"));
            continue;
        }
        for ((id, ca), (_, cb)) in a.iter().zip(&b) {
            let expected = Ideal::new(n + 1, ca.ideal(n).gens().iter().map(|g| g.extend_vars(1)).collect());
            if !cb.ideal(n + 1).equals(&expected) {
                report.failures.push(format!("year {y}, chart {id}: center is not a cylinder"));
            }
        }
    }
    Ok(report)
}
