//! Affine charts of blow-ups and products with a line, with exceptional
//! hypersurfaces tracked as coordinate hyperplanes.

use crate::algebra::{Ideal, Polynomial, Rational};
use crate::error::{Error, Result};
use num_traits::Zero;
use serde::Serialize;
use std::cmp::Ordering;

/// A global exceptional hypersurface. Divisors are ordered by birth, then by
/// their position among divisors born together.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DivisorLabel {
    pub name: String,
    pub birth: u32,
    pub rank: u32,
}

impl Ord for DivisorLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.birth, self.rank, &self.name).cmp(&(other.birth, other.rank, &other.name))
    }
}

impl PartialOrd for DivisorLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl DivisorLabel {
    pub fn input(name: &str, rank: u32) -> Self {
        DivisorLabel { name: name.to_string(), birth: 0, rank }
    }

    pub fn born(birth: u32) -> Self {
        DivisorLabel { name: format!("E{birth}"), birth, rank: 0 }
    }
}

/// `V(x_coord)` in the chart; `alive` is false once the strict transform no
/// longer meets the chart.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExcHypersurface {
    pub label: DivisorLabel,
    pub coord: usize,
    pub alive: bool,
}

/// A divisor left by blowing up a hypersurface that is not a coordinate
/// hyperplane; tracked by its equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqDivisor {
    pub label: DivisorLabel,
    pub equation: Polynomial,
    pub alive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParentLink {
    pub parent: String,
    /// Parent coordinate `j` as a polynomial in this chart's coordinates.
    pub substitution: Vec<Polynomial>,
    /// Index of the chart variable of the blow-up, if any.
    pub chart_var: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub id: String,
    pub vars: Vec<String>,
    pub parent: Option<ParentLink>,
    pub e: Vec<ExcHypersurface>,
    pub hyper: Vec<EqDivisor>,
    /// Year in which the chart was created.
    pub year: u32,
}

/// Polynomial change of coordinates: old coordinate `i` is `images[i]` in the
/// new coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateChange {
    pub images: Vec<Polynomial>,
}

impl CoordinateChange {
    pub fn identity(n: usize) -> Self {
        CoordinateChange { images: (0..n).map(|i| Polynomial::var(n, i)).collect() }
    }

    pub fn apply(&self, f: &Polynomial) -> Polynomial {
        f.substitute(&self.images)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &CoordinateChange) -> CoordinateChange {
        CoordinateChange { images: self.images.iter().map(|g| next.apply(g)).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, g)| *g == Polynomial::var(g.nvars(), i))
    }
}

/// Smooth center `V(x_j : j in vanishing)` after the coordinate shear
/// `x_t -> x_t + h` for each `(t, h)` in `shear`, or the smooth hypersurface
/// `V(equation)` when that is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Center {
    pub chart_id: String,
    pub vanishing: Vec<usize>,
    pub shear: Vec<(usize, Polynomial)>,
    pub equation: Option<Polynomial>,
}

impl Center {
    pub fn coordinate(chart_id: &str, vanishing: Vec<usize>) -> Self {
        let mut v = vanishing;
        v.sort_unstable();
        v.dedup();
        Center { chart_id: chart_id.to_string(), vanishing: v, shear: Vec::new(), equation: None }
    }

    pub fn hypersurface(chart_id: &str, z: Polynomial) -> Self {
        Center { chart_id: chart_id.to_string(), vanishing: Vec::new(), shear: Vec::new(), equation: Some(z) }
    }

    /// The whole chart.
    pub fn is_everything(&self) -> bool {
        self.vanishing.is_empty() && self.equation.is_none()
    }

    /// The center's ideal in the chart's own (unsheared) coordinates.
    pub fn ideal(&self, nvars: usize) -> Ideal {
        if let Some(z) = &self.equation {
            return Ideal::new(nvars, vec![z.clone()]);
        }
        let gens = self
            .vanishing
            .iter()
            .map(|&j| {
                let x = Polynomial::var(nvars, j);
                match self.shear.iter().find(|(t, _)| *t == j) {
                    Some((_, h)) => x.sub(h),
                    None => x,
                }
            })
            .collect();
        Ideal::new(nvars, gens)
    }

    pub fn render(&self, names: &[String]) -> String {
        if let Some(z) = &self.equation {
            return format!("V({})", z.render(names));
        }
        if self.vanishing.is_empty() {
            return "V(0)".to_string();
        }
        if self.vanishing.len() == names.len() && self.shear.is_empty() {
            return "{0}".to_string();
        }
        let n = names.len();
        let parts: Vec<String> = self.ideal(n).gens().iter().map(|g| g.render(names)).collect();
        format!("V({})", parts.join(","))
    }
}

impl Chart {
    pub fn root(vars: Vec<String>, e: Vec<ExcHypersurface>) -> Self {
        Chart { id: "root".to_string(), vars, parent: None, e, hyper: Vec::new(), year: 0 }
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn alive(&self) -> impl Iterator<Item = &ExcHypersurface> {
        self.e.iter().filter(|h| h.alive)
    }

    pub fn alive_coords(&self) -> Vec<usize> {
        self.alive().map(|h| h.coord).collect()
    }

    pub fn validate_center(&self, ctr: &Center) -> Result<()> {
        let n = self.nvars();
        if ctr.chart_id != self.id {
            return Err(Error::InvalidCenter(format!("center belongs to chart {}, not {}", ctr.chart_id, self.id)));
        }
        if ctr.equation.is_some() {
            return Err(Error::InvalidCenter("a hypersurface center is blown up in place".into()));
        }
        if ctr.vanishing.is_empty() {
            return Err(Error::InvalidCenter("empty vanishing set".into()));
        }
        if ctr.vanishing.iter().any(|&j| j >= n) {
            return Err(Error::InvalidCenter("coordinate index out of range".into()));
        }
        for (t, h) in &ctr.shear {
            if !ctr.vanishing.contains(t) {
                return Err(Error::InvalidCenter("shear on a coordinate outside the center".into()));
            }
            if self.alive_coords().contains(t) {
                return Err(Error::InvalidCenter(format!("shear would move the exceptional coordinate {}", self.vars[*t])));
            }
            if ctr.vanishing.iter().any(|&j| h.uses_var(j)) {
                return Err(Error::InvalidCenter("shear depends on a center coordinate".into()));
            }
        }
        Ok(())
    }

    fn child_id(&self, k: usize) -> String {
        format!("{}.{}", self.id, self.vars[k])
    }

    /// The charts covering the blow-up of `ctr`. The new exceptional
    /// hypersurface is `V(x_k)` in the `x_k`-chart and is born in `year`.
    pub fn blowup_charts(&self, ctr: &Center, year: u32) -> Result<Vec<Chart>> {
        self.validate_center(ctr)?;
        let n = self.nvars();
        let mut out = Vec::with_capacity(ctr.vanishing.len());
        for &k in &ctr.vanishing {
            let y = |i: usize| Polynomial::var(n, i);
            let blow: Vec<Polynomial> = (0..n)
                .map(|j| if j != k && ctr.vanishing.contains(&j) { y(k).mul(&y(j)) } else { y(j) })
                .collect();
            let substitution: Vec<Polynomial> = (0..n)
                .map(|j| match ctr.shear.iter().find(|(t, _)| *t == j) {
                    Some((_, h)) => blow[j].add(&h.substitute(&blow)),
                    None => blow[j].clone(),
                })
                .collect();
            let mut e: Vec<ExcHypersurface> = self
                .e
                .iter()
                .map(|h| {
                    let mut h = h.clone();
                    if h.coord == k {
                        h.alive = false;
                    }
                    h
                })
                .collect();
            e.push(ExcHypersurface { label: DivisorLabel::born(year), coord: k, alive: true });
            let hyper = self
                .hyper
                .iter()
                .map(|h| {
                    let pulled = h.equation.substitute(&substitution);
                    let v = pulled.valuation_in(k).unwrap_or(0);
                    let equation = pulled.div_var_pow(k, v).expect("valuation divides");
                    let alive = h.alive && !equation.is_nonzero_constant();
                    EqDivisor { label: h.label.clone(), equation, alive }
                })
                .collect();
            out.push(Chart {
                id: self.child_id(k),
                vars: self.vars.clone(),
                parent: Some(ParentLink { parent: self.id.clone(), substitution, chart_var: Some(k) }),
                e,
                hyper,
                year,
            });
        }
        Ok(out)
    }

    /// The blow-up of a smooth hypersurface center: the same chart, with the
    /// center joining the divisors as `E{year}`.
    pub fn blowup_hypersurface(&self, ctr: &Center, year: u32) -> Result<Chart> {
        let Some(z) = &ctr.equation else {
            return Err(Error::InvalidCenter("not a hypersurface center".into()));
        };
        if ctr.chart_id != self.id {
            return Err(Error::InvalidCenter(format!("center belongs to chart {}, not {}", ctr.chart_id, self.id)));
        }
        let n = self.nvars();
        let label = DivisorLabel::born(year);
        let mut hyper = self.hyper.clone();
        hyper.push(EqDivisor { label: label.clone(), equation: z.clone(), alive: true });
        Ok(Chart {
            id: format!("{}.{}", self.id, label.name),
            vars: self.vars.clone(),
            parent: Some(ParentLink {
                parent: self.id.clone(),
                substitution: (0..n).map(|j| Polynomial::var(n, j)).collect(),
                chart_var: None,
            }),
            e: self.e.clone(),
            hyper,
            year,
        })
    }

    fn fresh_name(&self, base: &str) -> String {
        if !self.vars.iter().any(|v| v == base) {
            return base.to_string();
        }
        (1..).map(|i| format!("{base}{i}")).find(|c| !self.vars.iter().any(|v| v == c)).unwrap()
    }

    /// `M x A^1` with the new coordinate appended; with `horizontal` the
    /// divisor `V(t)` is appended to `E`, born in `year`.
    pub fn product_with_line(&self, year: u32, horizontal: bool) -> Chart {
        let n = self.nvars();
        let mut vars = self.vars.clone();
        vars.push(self.fresh_name("t"));
        let substitution = (0..n).map(|j| Polynomial::var(n + 1, j)).collect();
        let mut e = self.e.clone();
        let hyper = self
            .hyper
            .iter()
            .map(|h| EqDivisor { equation: h.equation.extend_vars(1), ..h.clone() })
            .collect();
        if horizontal {
            e.push(ExcHypersurface { label: DivisorLabel::born(year), coord: n, alive: true });
        }
        Chart {
            id: format!("{}.P", self.id),
            vars,
            parent: Some(ParentLink { parent: self.id.clone(), substitution, chart_var: None }),
            e,
            hyper,
            year,
        }
    }

    /// Image of a point of this chart in the parent chart.
    pub fn transport_point(&self, p: &[Rational]) -> Option<Vec<Rational>> {
        self.parent.as_ref().map(|l| l.substitution.iter().map(|g| g.eval(p)).collect())
    }

    /// Pull-back of a parent polynomial.
    pub fn pull_back(&self, f: &Polynomial) -> Polynomial {
        match &self.parent {
            Some(l) => f.substitute(&l.substitution),
            None => f.clone(),
        }
    }
}

/// Moves a point of the `x_from`-chart to the `x_to`-chart of the same
/// blow-up with center `vanishing` (in sheared coordinates). `None` when the
/// point lies outside the second chart.
pub fn sibling_transition(p: &[Rational], vanishing: &[usize], from: usize, to: usize) -> Option<Vec<Rational>> {
    if from == to {
        return Some(p.to_vec());
    }
    if p[to].is_zero() {
        return None;
    }
    let mut q = p.to_vec();
    for &j in vanishing {
        if j == to {
            q[j] = &p[from] * &p[to];
        } else if j == from {
            q[j] = p[to].recip();
        } else {
            q[j] = &p[j] / &p[to];
        }
    }
    Some(q)
}

/// Makes `V(z)` a coordinate hyperplane `V(x_target)` by shears of the form
/// `x_target -> x_target - r` with `r` free of `x_target`. Returns the change
/// of coordinates and the image of `z` (a constant multiple of `x_target`).
pub fn shear_straighten(
    nvars: usize,
    z: &Polynomial,
    target: usize,
    protected: &[usize],
    max_rounds: u32,
) -> Result<(CoordinateChange, Polynomial)> {
    if protected.contains(&target) {
        return Err(Error::Straighten(format!("target coordinate {target} is an exceptional coordinate")));
    }
    let mut change = CoordinateChange::identity(nvars);
    let mut cur = z.clone();
    // a shear that leaves x_target in nonconstant coefficients only grows z
    let size_cap = 4 * z.terms().len() + 16;
    let degree_cap = 2 * z.degree().unwrap_or(0) + 2;
    for _ in 0..max_rounds.max(1) {
        if cur.terms().len() > size_cap || cur.degree().unwrap_or(0) > degree_cap {
            return Err(Error::Straighten("shears diverge".into()));
        }
        let lin = linear_coefficient(&cur, target);
        let Some(c) = lin else {
            return Err(Error::Straighten("no unit linear coefficient on the target".into()));
        };
        let free = x_free_part(&cur, target);
        let step = {
            let mut images: Vec<Polynomial> = (0..nvars).map(|i| Polynomial::var(nvars, i)).collect();
            images[target] = images[target].sub(&free.scale(&c.recip()));
            CoordinateChange { images }
        };
        change = change.then(&step);
        cur = step.apply(&cur);
        let target_only = Polynomial::var(nvars, target).scale(&c);
        if cur == target_only {
            return Ok((change, cur));
        }
    }
    Err(Error::Straighten(format!("not straightened after {max_rounds} rounds")))
}

/// Constant coefficient of the linear monomial `x_t`, if nonzero.
fn linear_coefficient(f: &Polynomial, t: usize) -> Option<Rational> {
    f.terms()
        .iter()
        .find(|(e, _)| e[t] == 1 && e.iter().sum::<u32>() == 1)
        .map(|(_, c)| c.clone())
}

fn x_free_part(f: &Polynomial, t: usize) -> Polynomial {
    Polynomial::from_terms(f.nvars(), f.terms().iter().filter(|(e, _)| e[t] == 0).cloned())
}
