//! Problem files.
//!
//! ```text
//! # the cusp
//! vars: x, y
//! E: H1=x
//! d: 2
//! gens: y^2 - x^3
//! ```
//!
//! Other keys: `normal: z` names the coordinates cut out by `N` (`n_dim: k`
//! keeps the first `k` coordinates free instead), and `mode: hypersurface`
//! makes `d` optional, defaulting to the maximal order of the ideal.

use crate::algebra::{max_order, parse_polynomial_list, Ideal, Polynomial};
use crate::chart::{Chart, DivisorLabel, ExcHypersurface};
use crate::error::{Error, Result};
use crate::marked::MarkedIdeal;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Marked,
    Hypersurface,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemFile {
    pub vars: Vec<String>,
    pub normal: Vec<String>,
    /// `(label, coordinate)` in the order given, which is the order of `E`.
    pub e: Vec<(String, String)>,
    pub d: Option<u32>,
    pub gens: Vec<Polynomial>,
    pub mode: Mode,
}

fn at(line: usize, column: usize, msg: impl fmt::Display) -> Error {
    Error::Input(format!("line {line}, column {column}: {msg}"))
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_') && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

/// Comma-separated items with the column where each starts.
fn items(value: &str, col0: usize) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    let mut col = col0;
    for piece in value.split(',') {
        let lead = piece.len() - piece.trim_start().len();
        if !piece.trim().is_empty() {
            out.push((piece.trim().to_string(), col + lead));
        }
        col += piece.chars().count() + 1;
    }
    out
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<ProblemFile> {
        let mut vars: Option<Vec<String>> = None;
        let mut normal: Option<(Vec<(String, usize)>, usize)> = None;
        let mut n_dim: Option<(usize, usize)> = None;
        let mut e_items: Vec<(String, usize, usize)> = Vec::new();
        let mut d = None;
        let mut mode = Mode::Marked;
        let mut gen_lines: Vec<(String, usize, usize)> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("");
            if body.trim().is_empty() {
                continue;
            }
            let (key, value) = body.split_once(':').ok_or_else(|| at(line, 1, "expected `key: value`"))?;
            let col = key.chars().count() + 2;
            match key.trim() {
                "vars" => {
                    let list: Vec<(String, usize)> = items(value, col);
                    for (v, c) in &list {
                        if !is_ident(v) {
                            return Err(at(line, *c, format!("`{v}` is not a variable name")));
                        }
                    }
                    let names: Vec<String> = list.into_iter().map(|(v, _)| v).collect();
                    if let Some(dup) = names.iter().enumerate().find(|(i, v)| names[..*i].contains(v)) {
                        return Err(at(line, col, format!("variable {} listed twice", dup.1)));
                    }
                    if names.is_empty() {
                        return Err(at(line, col, "no variables"));
                    }
                    vars = Some(names);
                }
                "normal" => normal = Some((items(value, col), line)),
                "n_dim" => {
                    let k = value.trim().parse().map_err(|_| at(line, col, "n_dim must be a natural number"))?;
                    n_dim = Some((k, line));
                }
                "E" => {
                    for (item, c) in items(value, col) {
                        e_items.push((item, line, c));
                    }
                }
                "d" => {
                    let v: u32 = value.trim().parse().map_err(|_| at(line, col, "d must be a positive integer"))?;
                    if v == 0 {
                        return Err(at(line, col, "d must be at least 1"));
                    }
                    d = Some(v);
                }
                "mode" => {
                    mode = match value.trim() {
                        "marked" => Mode::Marked,
                        "hypersurface" => Mode::Hypersurface,
                        other => return Err(at(line, col, format!("unknown mode `{other}`"))),
                    }
                }
                "gens" => gen_lines.push((value.to_string(), line, col)),
                other => return Err(at(line, 1, format!("unknown key `{other}`"))),
            }
        }
        let vars = vars.ok_or_else(|| Error::Input("missing `vars:`".into()))?;
        let mut e = Vec::new();
        for (item, line, c) in e_items {
            let (label, coord) = item.split_once('=').ok_or_else(|| at(line, c, "expected `label=variable`"))?;
            let (label, coord) = (label.trim().to_string(), coord.trim().to_string());
            if !is_ident(&label) {
                return Err(at(line, c, format!("`{label}` is not a divisor label")));
            }
            if !vars.contains(&coord) {
                return Err(at(line, c, format!("unknown variable `{coord}`")));
            }
            if e.iter().any(|(l, _): &(String, String)| *l == label) {
                return Err(at(line, c, format!("divisor {label} listed twice")));
            }
            if e.iter().any(|(_, x): &(String, String)| *x == coord) {
                return Err(at(line, c, format!("two divisors on `{coord}`")));
            }
            e.push((label, coord));
        }
        let mut normal_names = Vec::new();
        if let Some((list, line)) = &normal {
            for (v, c) in list {
                if !vars.contains(v) {
                    return Err(at(*line, *c, format!("unknown variable `{v}`")));
                }
                if !normal_names.contains(v) {
                    normal_names.push(v.clone());
                }
            }
        }
        if let Some((k, line)) = n_dim {
            if k > vars.len() {
                return Err(at(line, 1, "n_dim exceeds the number of variables"));
            }
            let implied: Vec<String> = vars[k..].to_vec();
            if normal.is_some() && !same_set(&implied, &normal_names) {
                return Err(at(line, 1, "n_dim disagrees with `normal:`"));
            }
            normal_names = implied;
        }
        normal_names.sort_by_key(|v| vars.iter().position(|x| x == v));
        let mut gens = Vec::new();
        for (text, line, col) in gen_lines {
            let parsed = parse_polynomial_list(&text, &vars).map_err(|err| at(line, col + err.column - 1, err.message))?;
            gens.extend(parsed);
        }
        if gens.is_empty() {
            return Err(Error::Input("missing `gens:`".into()));
        }
        if mode == Mode::Marked && d.is_none() {
            return Err(Error::Input("missing `d:` (required unless `mode: hypersurface`)".into()));
        }
        let p = ProblemFile { vars, normal: normal_names, e, d, gens, mode };
        p.build()?;
        Ok(p)
    }

    pub fn n_dim(&self) -> usize {
        self.vars.len() - self.normal.len()
    }

    fn index(&self, v: &str) -> usize {
        self.vars.iter().position(|x| x == v).expect("validated variable")
    }

    /// The root chart and the marked ideal, with every marked-ideal invariant
    /// checked.
    pub fn build(&self) -> Result<(Chart, MarkedIdeal)> {
        let normal: Vec<usize> = self.normal.iter().map(|v| self.index(v)).collect();
        let mut e = Vec::new();
        for (rank, (label, coord)) in self.e.iter().enumerate() {
            let c = self.index(coord);
            if normal.contains(&c) {
                return Err(Error::Input(format!("divisor {label} contains N, so it is not transverse to it")));
            }
            e.push(ExcHypersurface { label: DivisorLabel::input(label, rank as u32), coord: c, alive: true });
        }
        let chart = Chart::root(self.vars.clone(), e);
        let n = self.vars.len();
        let ideal = Ideal::new(n, self.gens.clone());
        let d = match self.d {
            Some(d) => d,
            None => {
                let free: Vec<usize> = (0..n).filter(|j| !normal.contains(j)).collect();
                match max_order(&ideal, &free, &Ideal::zero(n)) {
                    Some(o) if o >= 1 => o,
                    _ => return Err(Error::Input("the hypersurface is empty or everything; give `d:`".into())),
                }
            }
        };
        let m = MarkedIdeal::new(&chart, normal, ideal, d)?;
        Ok((chart, m))
    }
}

fn same_set(a: &[String], b: &[String]) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.contains(x))
}

impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars: {}", self.vars.join(", "))?;
        if !self.normal.is_empty() {
            writeln!(f, "normal: {}", self.normal.join(", "))?;
        }
        if !self.e.is_empty() {
            let parts: Vec<String> = self.e.iter().map(|(l, c)| format!("{l}={c}")).collect();
            writeln!(f, "E: {}", parts.join(", "))?;
        }
        if let Some(d) = self.d {
            writeln!(f, "d: {d}")?;
        }
        if self.mode == Mode::Hypersurface {
            writeln!(f, "mode: hypersurface")?;
        }
        let gens: Vec<String> = self.gens.iter().map(|g| g.render(&self.vars)).collect();
        writeln!(f, "gens: {}", gens.join(", "))
    }
}
