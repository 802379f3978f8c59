//! Pointwise values of the invariant.
//!
//! At a point the maximal contact hypersurfaces only need to be smooth germs,
//! so they are kept as equations `z_1..z_k` instead of graphs. The point is
//! moved to the origin and an ideal on the germ `V(z_1..z_k)` is represented
//! by an ideal of the chart that contains the `z_i`.
//!
//! Derivatives along the germ are Jacobian-bordered determinants. They differ
//! from the true derivatives by the unit `det d(z)/d(x_targets)`, which changes
//! no ideal of the local ring. Vanishing and divisibility are local questions
//! and are decided with ideal quotients; orders use `m^c + Z`, which is
//! primary to the maximal ideal, so plain membership is already local.

use super::{best_monomial_subset, inherited_threshold, marked_fold, Analysis, InvariantValue, LevelHistory, Settings, Terminator};
use crate::algebra::{determinant, render_rational, Ideal, Polynomial, Rational};
use crate::chart::DivisorLabel;
use crate::error::{Error, Result};
use crate::marked::MarkedIdeal;
use num_integer::Integer;
use num_traits::{One, Zero};

#[derive(Clone)]
struct Germ {
    n: usize,
    zs: Vec<Polynomial>,
    targets: Vec<usize>,
    free: Vec<usize>,
}

impl Germ {
    fn origin(&self) -> Vec<Rational> {
        vec![Rational::zero(); self.n]
    }

    /// `det d(f, z)/d(x_j, x_targets)`.
    fn partial(&self, f: &Polynomial, j: usize) -> Polynomial {
        if self.zs.is_empty() {
            return f.partial(j);
        }
        let cols: Vec<usize> = std::iter::once(j).chain(self.targets.iter().copied()).collect();
        let rows: Vec<Vec<Polynomial>> =
            std::iter::once(f).chain(self.zs.iter()).map(|r| cols.iter().map(|&c| r.partial(c)).collect()).collect();
        determinant(&rows)
    }

    fn with_z(&self, gens: Vec<Polynomial>) -> Ideal {
        let mut g = gens;
        g.extend(self.zs.iter().cloned());
        Ideal::new(self.n, g)
    }

    fn z_ideal(&self) -> Ideal {
        self.with_z(Vec::new())
    }

    fn derivative(&self, i: &Ideal, log: &[usize]) -> Ideal {
        let mut gens = i.gens().to_vec();
        for g in i.gens() {
            for &j in &self.free {
                let p = self.partial(g, j);
                gens.push(if log.contains(&j) { p.mul(&Polynomial::var(self.n, j)) } else { p });
            }
        }
        self.with_z(gens).compacted()
    }

    fn derivative_power(&self, i: &Ideal, log: &[usize], k: u32) -> Ideal {
        let mut cur = self.with_z(i.gens().to_vec()).compacted();
        for _ in 0..k {
            cur = self.derivative(&cur, log);
        }
        cur
    }

    /// Every equation is a coordinate; restrictions are then substitutions.
    fn flat(&self) -> bool {
        self.zs.iter().zip(&self.targets).all(|(z, &t)| *z == Polynomial::var(self.n, t))
    }

    fn is_zero(&self, i: &Ideal) -> bool {
        if self.flat() {
            return self.strip(i).gens().is_empty();
        }
        let z = self.z_ideal();
        let o = self.origin();
        i.gens().iter().all(|g| z.contains_locally(g, &o))
    }

    /// `ord` at the origin of the restriction; the ideal must be nonzero there.
    fn order(&self, i: &Ideal) -> u32 {
        let own: Vec<u32> = i.gens().iter().filter(|g| !self.zs.contains(g)).filter_map(|g| g.order_at_origin()).collect();
        if self.flat() {
            return self.strip(i).gens().iter().filter_map(|g| g.order_at_origin()).min().expect("locally nonzero ideal");
        }
        // restricting cannot lower the order
        let mut c = own.into_iter().min().unwrap_or(0);
        loop {
            let next = c + 1;
            let monos: Vec<Polynomial> = monomials(self.n, next).into_iter().map(|e| Polynomial::monomial(e, Rational::one())).collect();
            let target = self.with_z(monos);
            if !target.contains_ideal(i) {
                return c;
            }
            c = next;
            assert!(c < 512, "order of a locally nonzero ideal did not stabilize");
        }
    }

    /// Highest power of `u` dividing the restriction, and the quotient.
    fn divide_out(&self, i: &Ideal, xu: &Polynomial) -> (u32, Ideal) {
        if let Some(j) = (0..self.n).find(|&j| *xu == Polynomial::var(self.n, j)) {
            if self.flat() && !self.targets.contains(&j) {
                let mut gens = self.strip(i).gens().to_vec();
                let mut a = 0;
                while !gens.is_empty() && gens.iter().all(|g| g.valuation_in(j).unwrap_or(0) > 0) {
                    gens = gens.iter().map(|g| g.div_var_pow(j, 1).expect("divisible")).collect();
                    a += 1;
                }
                return (a, self.with_z(gens).compacted());
            }
        }
        let div = self.with_z(vec![xu.clone()]);
        let o = self.origin();
        let mut cur = self.with_z(i.gens().to_vec()).compacted();
        let mut a = 0;
        while cur.gens().iter().all(|g| div.contains_locally(g, &o)) {
            cur = self.with_z(cur.quotient(xu).gens().to_vec()).compacted();
            a += 1;
        }
        (a, cur)
    }

    fn power(&self, i: &Ideal, k: u32) -> Ideal {
        self.with_z(self.strip(i).power(k).gens().to_vec()).compacted()
    }

    /// Generators of `i` modulo the equations that are coordinates, so that
    /// powers do not multiply out the equations themselves.
    fn strip(&self, i: &Ideal) -> Ideal {
        let zero = Polynomial::zero(self.n);
        let coords: Vec<usize> =
            self.zs.iter().zip(&self.targets).filter(|(z, &t)| **z == Polynomial::var(self.n, t)).map(|(_, &t)| t).collect();
        let mut gens: Vec<Polynomial> = Vec::new();
        for g in i.gens() {
            let h = coords.iter().fold(g.clone(), |f, &t| f.substitute_var(t, &zero));
            if !h.is_zero() && !gens.contains(&h) {
                gens.push(h);
            }
        }
        Ideal::new(self.n, gens)
    }
}

fn monomials(n: usize, deg: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn go(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for a in 0..=left {
            cur[i] = a;
            go(i + 1, left - a, cur, out);
        }
        cur[i] = 0;
    }
    if n > 0 {
        go(0, deg, &mut cur, &mut out);
    }
    out
}

enum Straight {
    /// `w = x_t * q` with `q` a unit at the point: `V(w) = V(x_t)` there.
    Coordinate,
    /// `w = a * x_t + b` with `a` a unit at the point and `b` free of `x_t`.
    Shear(Polynomial, Polynomial),
    Keep,
}

fn straighten(w: &Polynomial, t: usize) -> Straight {
    let o = vec![Rational::zero(); w.nvars()];
    if let Some(q) = w.div_var_pow(t, 1) {
        if !q.eval(&o).is_zero() {
            return Straight::Coordinate;
        }
    }
    match w.linear_split(t) {
        Some((a, b)) if !a.eval(&o).is_zero() => Straight::Shear(a, b),
        _ => Straight::Keep,
    }
}

/// `a^m f((x_t - b)/a)` with `m` the degree of `f` in `x_t`. Near the point
/// this is `f` in the coordinates where `a x_t + b` becomes `x_t`, times a
/// unit, so it generates the same local ideals.
fn unit_shear(f: &Polynomial, t: usize, a: &Polynomial, b: &Polynomial) -> Polynomial {
    let n = f.nvars();
    let m = f.terms().iter().map(|(e, _)| e[t]).max().unwrap_or(0);
    let shifted = Polynomial::var(n, t).sub(b);
    let mut out = Polynomial::zero(n);
    for k in 0..=m {
        let part: Vec<(Vec<u32>, Rational)> = f
            .terms()
            .iter()
            .filter(|(e, _)| e[t] == k)
            .map(|(e, c)| {
                let mut e = e.clone();
                e[t] = 0;
                (e, c.clone())
            })
            .collect();
        if !part.is_empty() {
            out = out.add(&Polynomial::from_terms(n, part).mul(&shifted.pow(k)).mul(&a.pow(m - k)));
        }
    }
    out
}

/// A divisor through the point, moved with it: `eq` is `x_coord` for a
/// coordinate divisor.
#[derive(Clone)]
struct Div {
    label: DivisorLabel,
    eq: Polynomial,
    coord: Option<usize>,
}

struct PointWalk<'a> {
    year: u32,
    prev: Option<&'a [LevelHistory]>,
    pairs: Vec<(Rational, u32)>,
    history: Vec<LevelHistory>,
}

struct PointBottom {
    terminator: Terminator,
    mu: Option<Rational>,
    j: Vec<DivisorLabel>,
    d: u32,
}

impl PointWalk<'_> {
    fn level(&mut self, k: usize, germ: Germ, ideal: Ideal, d: u32, e: Vec<Div>) -> Result<PointBottom> {
        let n = germ.n;
        if germ.is_zero(&ideal) {
            return Ok(PointBottom { terminator: Terminator::Infinity, mu: None, j: Vec::new(), d });
        }
        let o = germ.order(&ideal);
        if o < d {
            return Err(Error::NotInCosupport(format!("order {o} < {d} at level {k}")));
        }
        let mut residual = germ.with_z(ideal.gens().to_vec()).compacted();
        let mut alphas = Vec::with_capacity(e.len());
        for div in &e {
            let (a, r) = germ.divide_out(&residual, &div.eq);
            alphas.push(a);
            residual = r;
        }
        let total: u32 = alphas.iter().sum();
        let nu = o - total;

        if nu == 0 {
            let divs: Vec<(DivisorLabel, u32)> = e.iter().zip(&alphas).map(|(d, &a)| (d.label.clone(), a)).collect();
            let j = best_monomial_subset(&divs, d)
                .ok_or_else(|| Error::NotInCosupport("monomial order below the marking".into()))?;
            return Ok(PointBottom { terminator: Terminator::Zero, mu: Some(Rational::new(o.into(), d.into())), j, d });
        }

        let nu_ratio = Rational::new(nu.into(), d.into());
        let (g_ideal, g_d) = if nu >= d {
            (residual, nu)
        } else {
            let mono = e.iter().zip(&alphas).fold(Polynomial::one(n), |acc, (div, &a)| acc.mul(&div.eq.pow(a)));
            let mono = germ.with_z(vec![mono]);
            let l = nu.lcm(&(d - nu));
            (germ.power(&residual, l / nu).sum(&germ.power(&mono, l / (d - nu))).compacted(), l)
        };

        let th = inherited_threshold(&self.pairs, self.prev, k, &nu_ratio, self.year);
        let (old, new): (Vec<Div>, Vec<Div>) = e.into_iter().partition(|d| d.label.birth <= th);
        // every divisor kept here passes through the point
        let s = old.len() as u32;
        self.pairs.push((nu_ratio.clone(), s));
        self.history.push(LevelHistory { nu: render_rational(&nu_ratio), s, threshold: th });

        if let Some(h) = new.iter().find(|d| d.coord.is_none()) {
            return Err(Error::Straighten(format!(
                "divisor {} is not a coordinate hyperplane; no logarithmic derivatives along it",
                h.label.name
            )));
        }
        let new_coords: Vec<usize> = new.iter().filter_map(|d| d.coord).collect();
        let top = germ.derivative_power(&g_ideal, &new_coords, g_d - 1);
        let o0 = germ.origin();
        let mut candidates: Vec<Polynomial> = top.basis().to_vec();
        candidates.extend(top.gens().iter().cloned());
        // prefer elements that become a coordinate at the point
        let mut choice = None;
        'search: for pass in [true, false] {
            for &t in &germ.free {
                if new_coords.contains(&t) {
                    continue;
                }
                for w in &candidates {
                    if w.eval(&o0).is_zero()
                        && !germ.partial(w, t).eval(&o0).is_zero()
                        && (!pass || !matches!(straighten(w, t), Straight::Keep))
                    {
                        choice = Some((w.clone(), t));
                        break 'search;
                    }
                }
            }
        }
        let (w, t) = choice.ok_or_else(|| Error::NoContact(format!("no element of order one in D^{}(G) at the point", g_d - 1)))?;

        // the germ loses a variable outright instead of carrying w through
        // every basis
        let (germ, g_ideal, old, w) = match straighten(&w, t) {
            Straight::Coordinate => (germ, g_ideal, old, Polynomial::var(n, t)),
            Straight::Shear(a, b) => {
                let mv = |f: &Polynomial| unit_shear(f, t, &a, &b);
                let moved = Germ { zs: germ.zs.iter().map(mv).collect(), ..germ };
                let g_ideal = moved.with_z(g_ideal.gens().iter().map(mv).collect()).compacted();
                let old: Vec<Div> = old.into_iter().map(|d| Div { eq: mv(&d.eq), ..d }).collect();
                (moved, g_ideal, old, Polynomial::var(n, t))
            }
            Straight::Keep => (germ, g_ideal, old, w),
        };

        let mut next_germ = germ.clone();
        next_germ.zs.push(w);
        next_germ.targets.push(t);
        next_germ.free.retain(|&j| j != t);

        // coefficient ideal of G on the new germ, summands vanishing there dropped
        let mut summands = Vec::new();
        let mut cur = g_ideal;
        for jj in 0..g_d {
            if jj > 0 {
                cur = germ.derivative(&cur, &new_coords);
            }
            let r = next_germ.with_z(cur.gens().to_vec());
            if !next_germ.is_zero(&r) {
                summands.push((next_germ.strip(&r), g_d - jj));
            }
        }
        let (acc, acc_d) = marked_fold(n, summands)?;
        let acc = next_germ.with_z(acc.gens().to_vec()).compacted();
        let mut gens = acc.gens().to_vec();
        if s > 0 {
            let e_gens: Vec<Polynomial> = old.iter().map(|h| h.eq.pow(acc_d)).collect();
            gens.extend(e_gens);
        }
        let next = next_germ.with_z(gens).compacted();
        self.level(k + 1, next_germ, next, acc_d, new)
    }
}

/// The invariant of `m` at the point `p` of its cosupport. `prev` is the
/// pointwise history at the image of `p` in the previous year.
pub fn analyze_at_point(
    m: &MarkedIdeal,
    p: &[Rational],
    year: u32,
    prev: Option<&[LevelHistory]>,
    _settings: &Settings,
) -> Result<Analysis> {
    if p.len() != m.nvars {
        return Err(Error::Input(format!("point has {} coordinates, chart has {}", p.len(), m.nvars)));
    }
    if !m.in_cosupport(p) {
        return Err(Error::NotInCosupport("point outside the cosupport".into()));
    }
    let n = m.nvars;
    let ideal = m.ideal.map(n, |f| f.translate(p));
    let germ = Germ {
        n,
        zs: m.normal.iter().map(|&j| Polynomial::var(n, j)).collect(),
        targets: m.normal.clone(),
        free: (0..n).filter(|j| !m.normal.contains(j)).collect(),
    };
    let mut e: Vec<Div> = m
        .e_view()
        .iter()
        .filter(|h| p[h.coord].is_zero())
        .map(|h| Div { label: h.label.clone(), eq: Polynomial::var(n, h.coord), coord: Some(h.coord) })
        .collect();
    e.extend(m.hyper.iter().filter(|h| h.alive && h.equation.eval(p).is_zero()).map(|h| Div {
        label: h.label.clone(),
        eq: h.equation.translate(p),
        coord: None,
    }));
    e.sort_by(|a, b| a.label.cmp(&b.label));
    let ideal = germ.with_z(ideal.gens().to_vec());
    let mut walk = PointWalk { year, prev, pairs: Vec::new(), history: Vec::new() };
    let bottom = walk.level(0, germ, ideal, m.d, e)?;
    Ok(Analysis {
        inv: InvariantValue { pairs: walk.pairs, terminator: bottom.terminator },
        mu: bottom.mu,
        j: bottom.j,
        history: walk.history,
        bottom_d: bottom.d,
        center: None,
        trace: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_polynomial_list, rat};
    use crate::chart::{Chart, ExcHypersurface};
    use crate::invariant::analyze;

    fn setup(vars: &[&str], gens: &str, d: u32, e: &[(&str, usize)]) -> MarkedIdeal {
        let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let e = e
            .iter()
            .enumerate()
            .map(|(i, (l, c))| ExcHypersurface { label: DivisorLabel::input(l, i as u32), coord: *c, alive: true })
            .collect();
        let c = Chart::root(names.clone(), e);
        let ideal = Ideal::new(names.len(), parse_polynomial_list(gens, &names).unwrap());
        MarkedIdeal::new(&c, vec![], ideal, d).unwrap()
    }

    fn at(m: &MarkedIdeal, p: &[i64]) -> Analysis {
        let p: Vec<Rational> = p.iter().map(|&v| rat(v)).collect();
        analyze_at_point(m, &p, 0, None, &Settings::default()).unwrap()
    }

    #[test]
    fn cusp_origin_matches_chart_maximum() {
        let m = setup(&["x", "y"], "y^2 - x^3", 1, &[]);
        let names = vec!["x".to_string(), "y".to_string()];
        let chart = analyze(&m, &names, 0, None, &Settings::default()).unwrap().unwrap();
        assert_eq!(at(&m, &[0, 0]).inv, chart.inv);
    }

    #[test]
    fn smooth_point_of_cusp_uses_a_local_contact_germ() {
        let m = setup(&["x", "y"], "y^2 - x^3", 1, &[]);
        assert_eq!(at(&m, &[1, 1]).inv.to_string(), "[1,0;inf]");
    }

    #[test]
    fn node_has_two_contact_levels() {
        // xy at the origin: order 2, then the coefficient ideal on x = y is (x^2)
        let m = setup(&["x", "y"], "x*y", 1, &[]);
        assert_eq!(at(&m, &[0, 0]).inv.to_string(), "[2,0;1,0;inf]");
    }

    #[test]
    fn divisors_away_from_the_point_are_ignored() {
        let m = setup(&["x", "y"], "x^2*y^3", 4, &[("H1", 0), ("H2", 1)]);
        let a = at(&m, &[0, 0]);
        assert_eq!(a.inv.to_string(), "[0]");
        assert_eq!(a.mu, Some(Rational::new(5.into(), 4.into())));
        let m = setup(&["x", "y"], "x^2*(y-1)^3", 2, &[("H1", 0), ("H2", 1)]);
        let b = at(&m, &[0, 5]);
        assert_eq!(b.j, vec![DivisorLabel::input("H1", 0)]);
    }

    #[test]
    fn germ_derivative_matches_graph_derivative() {
        // on z = y - x^2 (a graph), d/dx of x*y along the germ is 3 x^2 up to a unit
        let n = 2;
        let germ = Germ { n, zs: vec![parse_polynomial_list("y - x^2", &["x".into(), "y".into()]).unwrap().remove(0)], targets: vec![1], free: vec![0] };
        let f = parse_polynomial_list("x*y", &["x".into(), "y".into()]).unwrap().remove(0);
        let d = germ.partial(&f, 0);
        let restricted = d.substitute_var(1, &Polynomial::var(n, 0).pow(2));
        let expected = parse_polynomial_list("3*x^2", &["x".into(), "y".into()]).unwrap().remove(0);
        assert_eq!(restricted, expected);
    }
}
