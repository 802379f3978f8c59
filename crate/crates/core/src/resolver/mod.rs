//! The resolution loop. Each year every live chart is analyzed; the charts
//! attaining the global maximum of `(inv, J)` are blown up along their
//! centers and the others take an identity step, so years stay in step
//! across the tree.

mod checks;
mod output;

pub use checks::{
    check_functoriality, check_monotonicity, overlap_all_years, overlap_consistency, pointwise_at, sample_points, CheckReport,
};
pub use output::{render_text, strict_transform_report, to_dot, to_json, StrictReport};

use crate::algebra::{Ideal, Polynomial};
use crate::chart::{Center, Chart};
use crate::error::{Error, Result};
use crate::invariant::{analyze_in, value_cmp, Analysis, LevelHistory, Settings};
use crate::marked::MarkedIdeal;
use rayon::prelude::*;
use std::cmp::Ordering;

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub max_steps: u32,
    pub shear_rounds: u32,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { max_steps: 64, shear_rounds: 32 }
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub chart: Chart,
    /// `None` once the strict transform of `N` misses the chart.
    pub marked: Option<MarkedIdeal>,
    /// Strict transform of `V(I)` (inside `N`) in this chart.
    pub strict: Ideal,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Latest chart-level analysis; `None` when the cosupport is empty.
    pub analysis: Option<Analysis>,
    /// Year and center of the blow-up performed on this chart.
    pub blowup: Option<(u32, Center)>,
    /// The chart answers only for points of `V(region)`; the zero ideal
    /// means the whole chart.
    pub region: Ideal,
    /// Sibling charts this chart leaves its shared points to; the region
    /// then excludes their domains.
    pub defers: Vec<usize>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn collapsed(&self) -> bool {
        self.marked.is_none()
    }

    /// The part of the cosupport this chart answers for is empty.
    pub fn resolved(&self) -> bool {
        match &self.marked {
            None => true,
            Some(m) => m.cosupport_is_empty() || m.cosupport_ideal().sum(&self.region).contains_one(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct YearRecord {
    pub year: u32,
    pub max: String,
    pub mu: String,
    pub j: Vec<String>,
    /// Indices of the charts blown up this year.
    pub blown: Vec<usize>,
    /// Live charts that took an identity step.
    pub idle: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ResolutionTree {
    pub nodes: Vec<Node>,
    pub years: Vec<YearRecord>,
    /// False when the run stopped at the step limit.
    pub complete: bool,
}

impl ResolutionTree {
    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn find(&self, chart_id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.chart.id == chart_id)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    /// Centers blown up in `year`, by chart id.
    pub fn centers_in_year(&self, year: u32) -> Vec<(&str, &Center)> {
        let mut out: Vec<(&str, &Center)> = self
            .nodes
            .iter()
            .filter_map(|n| match &n.blowup {
                Some((y, c)) if *y == year => Some((n.chart.id.as_str(), c)),
                _ => None,
            })
            .collect();
        out.sort_by(|a, b| a.0.cmp(b.0));
        out
    }

    pub fn blowup_count(&self) -> usize {
        self.years.len()
    }
}

/// Strict transform in the chart whose chart variable is `k`.
fn strict_transform(parent: &Ideal, child: &Chart, k: usize) -> Ideal {
    let pulled = parent.map(child.nvars(), |g| child.pull_back(g));
    remove_component(&pulled, &Polynomial::var(child.nvars(), k))
}

/// `I : z^infinity`, by repeated division when `I` is principal.
fn remove_component(i: &Ideal, z: &Polynomial) -> Ideal {
    if let [g] = i.gens() {
        let mut g = g.clone();
        while let Some(q) = g.div_exact(z) {
            if q == g {
                break;
            }
            g = q;
        }
        return Ideal::new(i.nvars(), vec![g]);
    }
    i.saturate(z)
}

fn history_for(nodes: &[Node], idx: usize) -> Option<Vec<LevelHistory>> {
    let node = &nodes[idx];
    if let Some(a) = &node.analysis {
        return Some(a.history.clone());
    }
    node.parent.and_then(|p| nodes[p].analysis.as_ref().map(|a| a.history.clone()))
}

/// Resolves `m` on `chart` (the root of the tree).
pub fn resolve(chart: &Chart, m: &MarkedIdeal, opts: &RunOptions) -> Result<ResolutionTree> {
    if opts.max_steps < 1 {
        return Err(Error::Input("max_steps must be at least 1".into()));
    }
    let settings = Settings { shear_rounds: opts.shear_rounds };
    let n = chart.nvars();
    let strict = m.ideal.with(&m.normal.iter().map(|&j| Polynomial::var(n, j)).collect::<Vec<_>>());
    let mut nodes = vec![Node {
        chart: chart.clone(),
        marked: Some(m.clone()),
        strict,
        parent: None,
        children: Vec::new(),
        analysis: None,
        blowup: None,
        region: Ideal::zero(n),
        defers: Vec::new(),
    }];
    let mut years: Vec<YearRecord> = Vec::new();
    let mut live: Vec<usize> = vec![0];
    let mut fresh: Vec<usize> = vec![0];
    let mut year = 0u32;

    loop {
        let prevs: Vec<Option<Vec<LevelHistory>>> = fresh.iter().map(|&i| history_for(&nodes, i)).collect();
        let results: Vec<Result<Option<Analysis>>> = fresh
            .par_iter()
            .zip(prevs.par_iter())
            .map(|(&i, prev)| {
                let node = &nodes[i];
                let mk = node.marked.as_ref().expect("live chart has a marked ideal");
                analyze_in(mk, &node.chart.vars, &node.region, year, prev.as_deref(), &settings)
            })
            .collect();
        for ((&i, r), prev) in fresh.iter().zip(results).zip(&prevs) {
            let r = match r {
                Err(Error::NoContact(_) | Error::Straighten(_)) if !deferrable(&nodes, i).is_empty() => {
                    let to = deferrable(&nodes, i);
                    let cut = deferred_part(&nodes, i, &to);
                    let node = &mut nodes[i];
                    node.region = node.region.sum(&cut);
                    node.defers = to;
                    let mk = node.marked.as_ref().expect("live chart has a marked ideal");
                    analyze_in(mk, &node.chart.vars, &node.region, year, prev.as_deref(), &settings)
                }
                r => r,
            };
            match r {
                Ok(a) => nodes[i].analysis = a,
                Err(e) => {
                    return Err(with_partial(e, nodes, years));
                }
            }
        }
        live.retain(|&i| nodes[i].analysis.is_some());
        if live.is_empty() {
            return Ok(ResolutionTree { nodes, years, complete: true });
        }
        if year >= opts.max_steps {
            let partial = ResolutionTree { nodes, years, complete: false };
            return Err(Error::StepLimit { limit: opts.max_steps, partial: Box::new(partial) });
        }

        let best = live
            .iter()
            .map(|&i| nodes[i].analysis.as_ref().unwrap().value())
            .max_by(|a, b| value_cmp(a, b))
            .unwrap();
        let (blown, idle): (Vec<usize>, Vec<usize>) =
            live.iter().partition(|&&i| value_cmp(&nodes[i].analysis.as_ref().unwrap().value(), &best) == Ordering::Equal);
        year += 1;
        let lead = nodes[blown[0]].analysis.as_ref().unwrap();
        let record = YearRecord {
            year,
            max: lead.inv.to_string(),
            mu: lead.mu_string(),
            j: lead.j.iter().map(|l| l.name.clone()).collect(),
            blown: blown.clone(),
            idle: idle.clone(),
        };

        let mut next_live = idle;
        fresh = Vec::new();
        for &i in &blown {
            let center = nodes[i].analysis.as_ref().unwrap().center.clone().expect("chart analysis has a center");
            let children = blow_up_node(&nodes[i], i, &center, year)
                .map_err(|e| with_partial(e, nodes.clone(), years.clone()))?;
            nodes[i].blowup = Some((year, center));
            for child in children {
                let idx = nodes.len();
                let has_marked = child.marked.is_some();
                nodes.push(child);
                nodes[i].children.push(idx);
                if has_marked {
                    next_live.push(idx);
                    fresh.push(idx);
                }
            }
        }
        years.push(record);
        next_live.sort_by(|&a, &b| nodes[a].chart.id.cmp(&nodes[b].chart.id));
        live = next_live;
    }
}

/// Siblings a fresh chart may leave its shared points to: those that do not
/// already lean on it, directly or through other siblings. Keeping the
/// deferrals acyclic means every shared point stays with some chart.
fn deferrable(nodes: &[Node], idx: usize) -> Vec<usize> {
    let node = &nodes[idx];
    if !node.defers.is_empty() || node.chart.parent.as_ref().and_then(|l| l.chart_var).is_none() {
        return Vec::new();
    }
    let Some(p) = node.parent else { return Vec::new() };
    let siblings: Vec<usize> =
        nodes[p].children.iter().copied().filter(|&c| c != idx && nodes[c].marked.is_some()).collect();
    let reaches = |from: usize| {
        let mut stack = vec![from];
        let mut seen = vec![from];
        while let Some(c) = stack.pop() {
            for &d in &nodes[c].defers {
                if d == idx {
                    return true;
                }
                if !seen.contains(&d) {
                    seen.push(d);
                    stack.push(d);
                }
            }
        }
        false
    };
    siblings.into_iter().filter(|&b| !reaches(b)).collect()
}

/// Points of a blow-up chart outside the given siblings: their chart
/// coordinates vanish.
fn deferred_part(nodes: &[Node], idx: usize, to: &[usize]) -> Ideal {
    let node = &nodes[idx];
    let n = node.chart.nvars();
    let coords: Vec<usize> =
        to.iter().filter_map(|&b| nodes[b].chart.parent.as_ref().and_then(|l| l.chart_var)).collect();
    Ideal::vars(n, &coords)
}

/// Diagnostic failures keep the tree built so far.
fn with_partial(e: Error, nodes: Vec<Node>, years: Vec<YearRecord>) -> Error {
    if !e.is_diagnostic() {
        return e;
    }
    Error::Aborted { cause: Box::new(e), partial: Box::new(ResolutionTree { nodes, years, complete: false }) }
}

fn blow_up_node(node: &Node, idx: usize, center: &Center, year: u32) -> Result<Vec<Node>> {
    let m = node.marked.as_ref().expect("blown chart has a marked ideal");
    if let Some(z) = &center.equation {
        let chart = node.chart.blowup_hypersurface(center, year)?;
        let marked = m.transform_hypersurface(center, &chart)?;
        let strict = remove_component(&node.strict, z);
        return Ok(vec![Node {
            region: node.region.clone(),
            chart,
            marked: Some(marked),
            strict,
            parent: Some(idx),
            children: Vec::new(),
            analysis: None,
            blowup: None,
            defers: Vec::new(),
        }]);
    }
    if center.is_everything() {
        // the whole chart is the center: its blow-up is empty
        let mut chart = node.chart.clone();
        chart.id = format!("{}.void", node.chart.id);
        chart.year = year;
        chart.parent = Some(crate::chart::ParentLink {
            parent: node.chart.id.clone(),
            substitution: (0..chart.nvars()).map(|j| Polynomial::var(chart.nvars(), j)).collect(),
            chart_var: None,
        });
        let strict = Ideal::unit(chart.nvars());
        let region = Ideal::zero(chart.nvars());
        return Ok(vec![Node {
            chart,
            marked: None,
            strict,
            parent: Some(idx),
            children: Vec::new(),
            analysis: None,
            blowup: None,
            region,
            defers: Vec::new(),
        }]);
    }
    let charts = node.chart.blowup_charts(center, year)?;
    let mut out = Vec::with_capacity(charts.len());
    for child in charts {
        let k = child.parent.as_ref().and_then(|l| l.chart_var).expect("blow-up chart");
        let marked = m.transform_admissible(center, &child)?;
        let strict = strict_transform(&node.strict, &child, k);
        let region = node.region.map(child.nvars(), |g| child.pull_back(g));
        out.push(Node {
            chart: child,
            marked,
            strict,
            parent: Some(idx),
            children: Vec::new(),
            analysis: None,
            blowup: None,
            region,
            defers: Vec::new(),
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum LeafStatus {
    /// Cosupport empty.
    Resolved,
    /// The strict transform of `N` misses the chart.
    Collapsed,
    Open,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub leaves: Vec<(String, LeafStatus)>,
    /// Charts whose recorded center fails the admissibility re-check.
    pub inadmissible: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.inadmissible.is_empty() && self.leaves.iter().all(|(_, s)| *s != LeafStatus::Open)
    }
}

/// Re-derives leaf emptiness and center admissibility from the stored
/// marked ideals.
pub fn verify_resolved(t: &ResolutionTree) -> VerifyReport {
    let mut leaves = Vec::new();
    let mut inadmissible = Vec::new();
    for node in &t.nodes {
        if let (Some((_, c)), Some(m)) = (&node.blowup, &node.marked) {
            if !c.is_everything() && !m.is_admissible(c) {
                inadmissible.push(node.chart.id.clone());
            }
        }
        if node.is_leaf() {
            let status = match &node.marked {
                None => LeafStatus::Collapsed,
                Some(_) if node.resolved() => LeafStatus::Resolved,
                Some(_) => LeafStatus::Open,
            };
            leaves.push((node.chart.id.clone(), status));
        }
    }
    leaves.sort();
    VerifyReport { leaves, inadmissible }
}
