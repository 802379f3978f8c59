//! Reports on a finished tree: strict transforms, JSON, DOT and text.

use super::{Node, ResolutionTree};
use crate::algebra::{singular_locus, Ideal, Polynomial};
use serde_json::{json, Value};

#[derive(Clone, Debug)]
pub struct StrictReport {
    pub chart_id: String,
    pub leaf: bool,
    pub strict: Ideal,
    /// Jacobian criterion ideal; `V(strict)` is smooth where it does not vanish.
    pub singular: Ideal,
    pub smooth: bool,
    /// Simple normal crossings with the alive divisors; hypersurfaces only.
    pub snc: Option<bool>,
}

/// Strict transform of `V(I)` in every chart, with smoothness judged by the
/// Jacobian criterion for pure codimension `codim`.
pub fn strict_transform_report(t: &ResolutionTree, codim: usize) -> Vec<StrictReport> {
    let mut out: Vec<StrictReport> = t
        .nodes
        .iter()
        .filter(|n| !n.chart.id.ends_with(".void"))
        .map(|n| {
            let singular = if n.strict.contains_one() { Ideal::unit(n.strict.nvars()) } else { singular_locus(&n.strict, codim) };
            let smooth = singular.contains_one();
            let snc = (codim == 1 && n.strict.gens().len() == 1).then(|| hypersurface_snc(&n.strict.gens()[0], &n.chart.alive_coords()));
            StrictReport { chart_id: n.chart.id.clone(), leaf: n.is_leaf(), strict: n.strict.clone(), singular, smooth, snc }
        })
        .collect();
    out.sort_by(|a, b| a.chart_id.cmp(&b.chart_id));
    out
}

/// `V(f)` meets every intersection of coordinate divisors `V(x_S)` smoothly.
fn hypersurface_snc(f: &Polynomial, e: &[usize]) -> bool {
    let n = f.nvars();
    for mask in 0u32..(1 << e.len()) {
        let s: Vec<usize> = (0..e.len()).filter(|i| mask >> i & 1 == 1).map(|i| e[i]).collect();
        let mut gens = vec![f.clone()];
        gens.extend(s.iter().map(|&j| Polynomial::var(n, j)));
        gens.extend((0..n).filter(|j| !s.contains(j)).map(|j| f.partial(j)));
        if !Ideal::new(n, gens).contains_one() {
            return false;
        }
    }
    true
}

fn node_json(t: &ResolutionTree, n: &Node) -> Value {
    let names = &n.chart.vars;
    let parent = n.parent.map(|p| t.nodes[p].chart.id.clone());
    let substitution: Vec<String> = match &n.chart.parent {
        Some(l) => l.substitution.iter().map(|g| g.render(names)).collect(),
        None => Vec::new(),
    };
    let e: Vec<Value> = n
        .chart
        .e
        .iter()
        .map(|h| json!({"label": h.label.name, "coord": names[h.coord], "alive": h.alive}))
        .collect();
    let (normal, gens, d) = match &n.marked {
        Some(m) => (
            m.normal.iter().map(|&j| names[j].clone()).collect::<Vec<_>>(),
            m.ideal.gens().iter().map(|g| g.render(names)).collect::<Vec<_>>(),
            Value::from(m.d),
        ),
        None => (Vec::new(), Vec::new(), Value::Null),
    };
    let (inv, mu, j) = match &n.analysis {
        Some(a) => (Value::from(a.inv.to_string()), Value::from(a.mu_string()), a.j.iter().map(|l| l.name.clone()).collect()),
        None => (Value::Null, Value::Null, Vec::<String>::new()),
    };
    let hyper: Vec<Value> = n
        .chart
        .hyper
        .iter()
        .map(|h| json!({"label": h.label.name, "equation": h.equation.render(names), "alive": h.alive}))
        .collect();
    let selected = n.analysis.as_ref().and_then(|a| a.center.as_ref()).map(|c| c.render(names));
    let (center, center_year) = match &n.blowup {
        Some((y, c)) => (Value::from(c.render(names)), Value::from(*y)),
        None => (Value::Null, Value::Null),
    };
    json!({
        "chart_id": n.chart.id,
        "parent": parent,
        "created_year": n.chart.year,
        "substitution": substitution,
        "vars": names,
        "E": e,
        "hyper": hyper,
        "normal": normal,
        "gens": gens,
        "d": d,
        "inv": inv,
        "mu": mu,
        "J": j,
        "center": center,
        "center_year": center_year,
        "selected_center": selected,
        "strict": n.strict.gens().iter().map(|g| g.render(names)).collect::<Vec<_>>(),
    })
}

pub fn to_json(t: &ResolutionTree) -> Value {
    let mut nodes: Vec<&Node> = t.nodes.iter().collect();
    nodes.sort_by(|a, b| a.chart.id.cmp(&b.chart.id));
    let years: Vec<Value> = t
        .years
        .iter()
        .map(|y| {
            let ids = |v: &[usize]| v.iter().map(|&i| t.nodes[i].chart.id.clone()).collect::<Vec<_>>();
            json!({"year": y.year, "max": y.max, "mu": y.mu, "J": y.j, "blown": ids(&y.blown), "idle": ids(&y.idle)})
        })
        .collect();
    let report = super::verify_resolved(t);
    let leaves: Vec<Value> = report.leaves.iter().map(|(id, s)| json!({"chart_id": id, "status": format!("{s:?}")})).collect();
    json!({
        "complete": t.complete,
        "verified": report.ok(),
        "leaves": leaves,
        "inadmissible": report.inadmissible,
        "blowups": t.years.len(),
        "years": years,
        "nodes": nodes.iter().map(|n| node_json(t, n)).collect::<Vec<_>>(),
    })
}

pub fn to_dot(t: &ResolutionTree) -> String {
    let mut out = String::from("digraph resolution {\n  node [shape=box];\n");
    for n in &t.nodes {
        let inv = n.analysis.as_ref().map(|a| a.inv.to_string()).unwrap_or_else(|| "empty".into());
        out.push_str(&format!("  \"{}\" [label=\"{}\\n{}\"];\n", n.chart.id, n.chart.id, inv));
    }
    for n in &t.nodes {
        if let Some((y, c)) = &n.blowup {
            for &ch in &n.children {
                out.push_str(&format!(
                    "  \"{}\" -> \"{}\" [label=\"{}: {}\"];\n",
                    n.chart.id,
                    t.nodes[ch].chart.id,
                    y,
                    c.render(&n.chart.vars)
                ));
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Human-readable run log; with `trace`, the recursion levels of every
/// analysis that selected a center.
pub fn render_text(t: &ResolutionTree, trace: bool) -> String {
    let mut out = String::new();
    for y in &t.years {
        out.push_str(&format!("year {}: max {} mu {} J {{{}}}\n", y.year, y.max, y.mu, y.j.join(",")));
        for &i in &y.blown {
            let n = &t.nodes[i];
            let (_, c) = n.blowup.as_ref().expect("blown chart records its center");
            out.push_str(&format!("  blow up {} at {}\n", n.chart.id, c.render(&n.chart.vars)));
            if trace {
                for lv in &n.analysis.as_ref().expect("analyzed").trace {
                    out.push_str(&format!("    level {}: ({}, {})", lv.level, lv.ideal, lv.d));
                    if let Some(o) = &lv.order {
                        out.push_str(&format!(" ord {o}"));
                    }
                    if let Some(s) = lv.s {
                        out.push_str(&format!(" s {s} old {{{}}} new {{{}}}", lv.old.join(","), lv.new.join(",")));
                    }
                    if let Some(z) = &lv.contact {
                        out.push_str(&format!(" contact {z}"));
                    }
                    out.push('\n');
                }
            }
        }
        if !y.idle.is_empty() {
            let ids: Vec<&str> = y.idle.iter().map(|&i| t.nodes[i].chart.id.as_str()).collect();
            out.push_str(&format!("  identity on {}\n", ids.join(", ")));
            if trace {
                for &i in &y.idle {
                    let n = &t.nodes[i];
                    if let Some(a) = &n.analysis {
                        let c = a.center.as_ref().map(|c| c.render(&n.chart.vars)).unwrap_or_default();
                        out.push_str(&format!("    {} waits at {} with center {}\n", n.chart.id, a.inv, c));
                    }
                }
            }
        }
    }
    let report = super::verify_resolved(t);
    out.push_str(&format!("blow-ups: {}{}\n", t.years.len(), if t.complete { "" } else { " (incomplete)" }));
    for (id, s) in &report.leaves {
        out.push_str(&format!("  leaf {id}: {s:?}\n"));
    }
    out.push_str(if report.ok() { "verified\n" } else { "NOT verified\n" });
    out
}
