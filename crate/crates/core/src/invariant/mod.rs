//! The resolution invariant and the center it selects.
//!
//! Each year the invariant is recomputed from the current marked ideal. The
//! only memory carried between years is, per level, the year in which the
//! level's current value was first reached: divisors born up to that year
//! are "old" for the level, later ones are "new" and are passed down.
//!
//! Maximal contact hypersurfaces are used as graphs `x_t = g(other coords)`,
//! so the nested subspaces are tracked as a [`Frame`] of eliminated
//! coordinates and all ideals stay in the chart's polynomial ring.

mod local;

pub use local::analyze_at_point;

use crate::algebra::{derivative_ideal, derivative_power, log_derivative_power, max_order, render_rational, Ideal, Polynomial, Rational};
use crate::chart::{shear_straighten, Center, DivisorLabel};
use crate::error::{Error, Result};
use crate::marked::MarkedIdeal;
use num_integer::Integer;
use num_traits::One;
use serde::Serialize;
use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Terminator {
    Zero,
    Infinity,
}

/// `(nu_1/d_1, s_1; ...; nu_k/d_k, s_k; 0 | inf)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantValue {
    pub pairs: Vec<(Rational, u32)>,
    pub terminator: Terminator,
}

impl Ord for InvariantValue {
    fn cmp(&self, other: &Self) -> Ordering {
        for k in 0.. {
            match (self.pairs.get(k), other.pairs.get(k)) {
                (Some(a), Some(b)) => {
                    let c = a.0.cmp(&b.0).then(a.1.cmp(&b.1));
                    if c != Ordering::Equal {
                        return c;
                    }
                }
                (Some(_), None) => {
                    return if other.terminator == Terminator::Zero { Ordering::Greater } else { Ordering::Less };
                }
                (None, Some(_)) => {
                    return if self.terminator == Terminator::Zero { Ordering::Less } else { Ordering::Greater };
                }
                (None, None) => {
                    return match (self.terminator, other.terminator) {
                        (Terminator::Zero, Terminator::Infinity) => Ordering::Less,
                        (Terminator::Infinity, Terminator::Zero) => Ordering::Greater,
                        _ => Ordering::Equal,
                    };
                }
            }
        }
        unreachable!()
    }
}

impl PartialOrd for InvariantValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for InvariantValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.pairs.iter().map(|(r, s)| format!("{},{}", render_rational(r), s)).collect();
        parts.push(match self.terminator {
            Terminator::Zero => "0".into(),
            Terminator::Infinity => "inf".into(),
        });
        write!(f, "[{}]", parts.join(";"))
    }
}

impl InvariantValue {
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Input(format!("malformed invariant '{text}'"));
        let inner = text.trim().strip_prefix('[').and_then(|t| t.strip_suffix(']')).ok_or_else(bad)?;
        let items: Vec<&str> = inner.split(';').map(|s| s.trim()).collect();
        let (last, rest) = items.split_last().ok_or_else(bad)?;
        let terminator = match *last {
            "0" => Terminator::Zero,
            "inf" => Terminator::Infinity,
            _ => return Err(bad()),
        };
        let mut pairs = Vec::new();
        for it in rest {
            let (a, b) = it.split_once(',').ok_or_else(bad)?;
            let r = crate::algebra::parse_rational(a).map_err(|_| bad())?;
            let s: u32 = b.trim().parse().map_err(|_| bad())?;
            pairs.push((r, s));
        }
        Ok(InvariantValue { pairs, terminator })
    }
}

/// Lexicographic comparison of `delta`-sequences: the subset containing the
/// oldest divisor of the symmetric difference is larger.
pub fn subset_cmp(a: &[DivisorLabel], b: &[DivisorLabel]) -> Ordering {
    let first_a = a.iter().filter(|x| !b.contains(x)).min();
    let first_b = b.iter().filter(|x| !a.contains(x)).min();
    match (first_a, first_b) {
        (None, None) => Ordering::Equal,
        (Some(_), None) => Ordering::Greater,
        (None, Some(_)) => Ordering::Less,
        (Some(x), Some(y)) => y.cmp(x),
    }
}

/// Comparison of `(inv, J)`.
pub fn value_cmp(a: &(InvariantValue, Vec<DivisorLabel>), b: &(InvariantValue, Vec<DivisorLabel>)) -> Ordering {
    a.0.cmp(&b.0).then_with(|| subset_cmp(&a.1, &b.1))
}

/// Nested smooth subspaces as graphs over the remaining free coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub nvars: usize,
    pub free: Vec<usize>,
    /// `x_t = g` in elimination order; `g` uses coordinates free at that stage.
    pub elims: Vec<(usize, Polynomial)>,
}

impl Frame {
    pub fn top(nvars: usize, normal: &[usize]) -> Frame {
        Frame {
            nvars,
            free: (0..nvars).filter(|j| !normal.contains(j)).collect(),
            elims: normal.iter().map(|&j| (j, Polynomial::zero(nvars))).collect(),
        }
    }

    pub fn eliminate(&self, t: usize, g: Polynomial) -> Frame {
        let mut f = self.clone();
        f.free.retain(|&j| j != t);
        f.elims.push((t, g));
        f
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelHistory {
    pub nu: String,
    pub s: u32,
    pub threshold: u32,
}

/// Description of one level of the recursion, for traces.
#[derive(Clone, Debug, Serialize)]
pub struct LevelTrace {
    pub level: usize,
    pub ideal: String,
    pub d: u32,
    pub order: Option<String>,
    pub s: Option<u32>,
    pub old: Vec<String>,
    pub new: Vec<String>,
    pub contact: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub inv: InvariantValue,
    /// `None` stands for infinity.
    pub mu: Option<Rational>,
    pub j: Vec<DivisorLabel>,
    pub history: Vec<LevelHistory>,
    /// Marking at the level where the recursion stopped.
    pub bottom_d: u32,
    /// Chart-level analyses only.
    pub center: Option<Center>,
    pub trace: Vec<LevelTrace>,
}

impl Analysis {
    pub fn value(&self) -> (InvariantValue, Vec<DivisorLabel>) {
        (self.inv.clone(), self.j.clone())
    }

    pub fn mu_string(&self) -> String {
        match &self.mu {
            None => "inf".into(),
            Some(r) => render_rational(r),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Settings {
    /// Bound on the shear rounds tried when straightening a contact element.
    pub shear_rounds: u32,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { shear_rounds: 32 }
    }
}

#[derive(Clone, Debug)]
struct Div {
    label: DivisorLabel,
    coord: usize,
}

struct Level {
    ideal: Ideal,
    d: u32,
    frame: Frame,
    e: Vec<Div>,
    /// Closed part of the chart this analysis is responsible for, restricted
    /// to the current frame.
    region: Ideal,
}

struct Walk<'a> {
    year: u32,
    prev: Option<&'a [LevelHistory]>,
    settings: &'a Settings,
    names: &'a [String],
    pairs: Vec<(Rational, u32)>,
    history: Vec<LevelHistory>,
    trace: Vec<LevelTrace>,
    /// Equation divisors meeting the part of the cosupport under study.
    hyper: Vec<(String, Polynomial)>,
}

struct Bottom {
    terminator: Terminator,
    mu: Option<Rational>,
    j: Vec<DivisorLabel>,
    d: u32,
    vanishing: Vec<usize>,
    frame: Frame,
    /// The center is this hypersurface of the chart.
    hypersurface: Option<Polynomial>,
}

/// Monomial part exponents along each divisor and the residual ideal.
pub fn factor_monomial(ideal: &Ideal, coords: &[usize]) -> (Vec<u32>, Ideal) {
    let alphas: Vec<u32> = coords.iter().map(|&c| ideal.valuation_in(c).unwrap_or(0)).collect();
    let gens = ideal
        .gens()
        .iter()
        .map(|g| {
            let mut q = g.clone();
            for (&c, &a) in coords.iter().zip(&alphas) {
                if a > 0 {
                    q = q.div_var_pow(c, a).expect("valuation divides");
                }
            }
            q
        })
        .collect();
    (alphas, Ideal::new(ideal.nvars(), gens))
}

fn monomial_ideal(nvars: usize, coords: &[usize], alphas: &[u32]) -> Ideal {
    let mut e = vec![0; nvars];
    for (&c, &a) in coords.iter().zip(alphas) {
        e[c] += a;
    }
    Ideal::new(nvars, vec![Polynomial::monomial(e, Rational::one())])
}

/// Largest subset `J` (in the `delta` order) of the given divisors with
/// `0 <= sum_J alpha - d < alpha_k` for every `k` in `J`.
pub(crate) fn best_monomial_subset(divs: &[(DivisorLabel, u32)], d: u32) -> Option<Vec<DivisorLabel>> {
    best_monomial_subset_where(divs, d, |_| true)
}

/// As [`best_monomial_subset`], among subsets accepted by `keep`.
fn best_monomial_subset_where(
    divs: &[(DivisorLabel, u32)],
    d: u32,
    keep: impl Fn(&[DivisorLabel]) -> bool,
) -> Option<Vec<DivisorLabel>> {
    let n = divs.len();
    assert!(n < 24, "too many divisors for subset enumeration");
    let mut best: Option<Vec<DivisorLabel>> = None;
    for mask in 1u32..(1 << n) {
        let members: Vec<&(DivisorLabel, u32)> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| &divs[i]).collect();
        let sum: u32 = members.iter().map(|m| m.1).sum();
        if sum < d || members.iter().any(|m| sum - d >= m.1) {
            continue;
        }
        let labels: Vec<DivisorLabel> = members.iter().map(|m| m.0.clone()).collect();
        if best.as_ref().map_or(true, |b| subset_cmp(&labels, b) == Ordering::Greater) && keep(&labels) {
            best = Some(labels);
        }
    }
    best.map(|mut b| {
        b.sort();
        b
    })
}

/// A maximal contact element of `ideal`: the first straightenable element for
/// the first eligible coordinate. Returns `(z, t, g)` with `V(z) = {x_t = g}`.
/// A coordinate `x_j` with `z = x_j u` and `u` a unit along `V(locus)` is as
/// good as `z` there, and is tried after the elements themselves.
fn contact(
    ideal: &Ideal,
    frame: &Frame,
    protected: &[usize],
    rounds: u32,
    locus: &Ideal,
) -> Option<(Polynomial, usize, Polynomial)> {
    let n = frame.nvars;
    let mut candidates: Vec<Polynomial> = ideal.basis().to_vec();
    candidates.extend(ideal.gens().iter().cloned());
    let mut factors = Vec::new();
    for z in &candidates {
        for &j in &frame.free {
            if let Some(u) = z.div_var_pow(j, 1) {
                let x = Polynomial::var(n, j);
                if !u.is_zero() && !factors.contains(&x) && locus.with(&[u]).contains_one() {
                    factors.push(x);
                }
            }
        }
    }
    candidates.extend(factors);
    for pass_rounds in [1, rounds] {
        for &t in &frame.free {
            if protected.contains(&t) {
                continue;
            }
            for z in &candidates {
                if !z.uses_var(t) {
                    continue;
                }
                if let Ok((change, _)) = shear_straighten(n, z, t, protected, pass_rounds) {
                    let g = change.images[t].substitute_var(t, &Polynomial::zero(n));
                    return Some((z.clone(), t, g));
                }
            }
        }
    }
    None
}

/// The year level `k` reached its value: inherited from last year's record
/// when the prefix of the value and `nu_k` are unchanged, else this year.
pub(crate) fn inherited_threshold(
    pairs: &[(Rational, u32)],
    prev: Option<&[LevelHistory]>,
    k: usize,
    nu: &Rational,
    year: u32,
) -> u32 {
    if let Some(prev) = prev {
        if prev.len() > k
            && pairs.iter().zip(prev.iter()).all(|(a, b)| render_rational(&a.0) == b.nu && a.1 == b.s)
            && prev[k].nu == render_rational(nu)
        {
            return prev[k].threshold;
        }
    }
    year
}

impl<'a> Walk<'a> {

    fn level(&mut self, k: usize, lv: Level) -> Result<Bottom> {
        let n = lv.frame.nvars;
        let names = self.names;
        let e_names = |ds: &[Div]| ds.iter().map(|d| d.label.name.clone()).collect::<Vec<_>>();
        let mut tr = LevelTrace {
            level: k,
            ideal: lv.ideal.render(names),
            d: lv.d,
            order: None,
            s: None,
            old: Vec::new(),
            new: e_names(&lv.e),
            contact: None,
        };

        if lv.ideal.is_zero() {
            self.trace.push(tr);
            return Ok(Bottom { terminator: Terminator::Infinity, mu: None, j: Vec::new(), d: lv.d, vanishing: Vec::new(), frame: lv.frame, hypersurface: None });
        }

        let coords: Vec<usize> = lv.e.iter().map(|d| d.coord).collect();
        let (alphas, residual) = factor_monomial(&lv.ideal, &coords);
        let cos = derivative_power(&lv.ideal, &lv.frame.free, lv.d - 1);
        let cos = cos.sum(&lv.region);
        let nu = max_order(&residual, &lv.frame.free, &cos).expect("nonzero residual");
        tr.order = Some(nu.to_string());

        if nu == 0 {
            let divs: Vec<(DivisorLabel, u32)> = lv.e.iter().zip(&alphas).map(|(d, &a)| (d.label.clone(), a)).collect();
            let meets = |j: &[DivisorLabel]| {
                let extra: Vec<Polynomial> =
                    lv.e.iter().filter(|d| j.contains(&d.label)).map(|d| Polynomial::var(n, d.coord)).collect();
                !lv.region.with(&extra).contains_one()
            };
            let j = best_monomial_subset_where(&divs, lv.d, meets)
                .ok_or_else(|| Error::NotInCosupport("monomial order below the marking".into()))?;
            let sum: u32 = divs.iter().filter(|(l, _)| j.contains(l)).map(|(_, a)| a).sum();
            let mu = Rational::new(sum.into(), lv.d.into());
            let vanishing = lv.e.iter().filter(|d| j.contains(&d.label)).map(|d| d.coord).collect();
            self.trace.push(tr);
            return Ok(Bottom { terminator: Terminator::Zero, mu: Some(mu), j, d: lv.d, vanishing, frame: lv.frame, hypersurface: None });
        }

        // companion ideal
        let nu_ratio = Rational::new(nu.into(), lv.d.into());
        let (g_ideal, g_d) = if nu >= lv.d {
            (residual.clone(), nu)
        } else {
            let m = monomial_ideal(n, &coords, &alphas);
            let l = nu.lcm(&(lv.d - nu));
            (residual.power(l / nu).sum(&m.power(l / (lv.d - nu))).compacted(), l)
        };

        let th = inherited_threshold(&self.pairs, self.prev, k, &nu_ratio, self.year);
        let (old, new): (Vec<Div>, Vec<Div>) = lv.e.iter().cloned().partition(|d| d.label.birth <= th);
        tr.old = e_names(&old);
        tr.new = e_names(&new);

        let cos_g = derivative_power(&g_ideal, &lv.frame.free, g_d - 1).sum(&lv.region);
        let mut s = 0;
        'size: for size in (1..=old.len()).rev() {
            for subset in subsets(old.len(), size) {
                let extra: Vec<Polynomial> = subset.iter().map(|&i| Polynomial::var(n, old[i].coord)).collect();
                if !cos_g.with(&extra).contains_one() {
                    s = size as u32;
                    break 'size;
                }
            }
        }
        tr.s = Some(s);
        self.pairs.push((nu_ratio.clone(), s));
        self.history.push(LevelHistory { nu: render_rational(&nu_ratio), s, threshold: th });
        if let Some((name, _)) = self.hyper.iter().find(|(_, h)| !cos_g.with(std::slice::from_ref(h)).contains_one()) {
            return Err(Error::Straighten(format!(
                "divisor {name} is not a coordinate hyperplane and meets the locus of order {nu}"
            )));
        }

        let new_coords: Vec<usize> = new.iter().map(|d| d.coord).collect();
        // D^j(G) for j < d_G, logarithmic along the new divisors
        let mut derivs = vec![g_ideal.compacted()];
        for _ in 1..g_d {
            let next = log_derivative_power(derivs.last().unwrap(), &lv.frame.free, &new_coords, 1).compacted();
            derivs.push(next);
        }
        let d_top = derivs.last().unwrap().clone();
        let Some((z, t, g)) = contact(&d_top, &lv.frame, &new_coords, self.settings.shear_rounds, &cos_g) else {
            // a smooth hypersurface of the whole chart along which G has
            // full order is the center itself, even when it is not a graph
            if k == 0 && s == 0 && lv.frame.elims.is_empty() {
                if let Some(z) = hypersurface_contact(&d_top, &derivs, &lv.region, &lv.frame.free) {
                    tr.contact = Some(format!("{} (hypersurface)", z.render(names)));
                    self.trace.push(tr);
                    self.trace.push(LevelTrace {
                        level: k + 1,
                        ideal: "(0)".into(),
                        d: 1,
                        order: None,
                        s: None,
                        old: Vec::new(),
                        new: e_names(&new),
                        contact: None,
                    });
                    return Ok(Bottom {
                        terminator: Terminator::Infinity,
                        mu: None,
                        j: Vec::new(),
                        d: 1,
                        vanishing: Vec::new(),
                        frame: lv.frame,
                        hypersurface: Some(z),
                    });
                }
            }
            return Err(Error::NoContact(format!(
                "no straightenable element in D^{}(G) = {}",
                g_d - 1,
                d_top.render(names)
            )));
        };
        tr.contact = Some(format!("{} (graph over {})", z.render(names), names[t]));
        let restrict = |f: &Polynomial| f.substitute_var(t, &g);
        // coefficient ideal on the contact hypersurface
        let summands: Vec<(Ideal, u32)> = derivs
            .iter()
            .enumerate()
            .map(|(j, dj)| (dj.map(n, restrict).compacted(), g_d - j as u32))
            .filter(|(r, _)| !r.is_zero())
            .collect();
        let (mut next, d_c) = marked_fold(n, summands)?;
        if s > 0 {
            let mut e_ideal = Ideal::unit(n);
            for subset in subsets(old.len(), s as usize) {
                let gens: Vec<Polynomial> = subset.iter().map(|&i| restrict(&Polynomial::var(n, old[i].coord)).pow(d_c)).collect();
                e_ideal = e_ideal.product(&Ideal::new(n, gens)).compacted();
            }
            next = next.sum(&e_ideal);
        }
        self.trace.push(tr);
        let region = lv.region.map(n, restrict);
        let lv_next = Level { ideal: next.compacted(), d: d_c, frame: lv.frame.eliminate(t, g), e: new, region };
        self.level(k + 1, lv_next)
    }
}

/// Largest marking the coefficient fold may reach.
const MAX_MARK: u64 = 1 << 12;

/// Left fold of marked sums `(A, a) + (B, b) = (A^{l/a} + B^{l/b}, l)`. The
/// empty sum is the zero ideal, marked 1.
pub(crate) fn marked_fold(n: usize, summands: Vec<(Ideal, u32)>) -> Result<(Ideal, u32)> {
    let mut it = summands.into_iter();
    let Some((mut acc, mut acc_d)) = it.next() else {
        return Ok((Ideal::zero(n), 1));
    };
    for (b, e) in it {
        let l = u64::from(acc_d).lcm(&u64::from(e));
        if l > MAX_MARK {
            return Err(Error::TooLarge(format!("coefficient ideal marking {l} exceeds {MAX_MARK}")));
        }
        let l = l as u32;
        acc = acc.power(l / acc_d).sum(&b.power(l / e)).compacted();
        acc_d = l;
    }
    Ok((acc, acc_d))
}

/// An element `z` of `top` that is smooth on `V(z) ∩ V(region)` and divides
/// every `D^j(G)`, so that the coefficient ideal vanishes on `V(z)`.
fn hypersurface_contact(top: &Ideal, derivs: &[Ideal], region: &Ideal, free: &[usize]) -> Option<Polynomial> {
    let n = top.nvars();
    let mut candidates: Vec<Polynomial> = top.basis().to_vec();
    candidates.extend(top.gens().iter().cloned());
    candidates.into_iter().find(|z| {
        if z.is_zero() || z.is_nonzero_constant() {
            return false;
        }
        if !derivs.iter().all(|dj| dj.gens().iter().all(|c| c.div_exact(z).is_some())) {
            return false;
        }
        let zi = Ideal::new(n, vec![z.clone()]);
        zi.sum(&derivative_ideal(&zi, free)).sum(region).contains_one()
    })
}

pub(crate) fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    go(0, n, size, &mut cur, &mut out);
    out
}

/// Lifts the bottom center `V(x_j : j in vanishing)` of the last frame to
/// the chart: `V(x_t - h_t, x_j)` with `h_t` free of center coordinates.
fn lift_center(chart_id: &str, bottom: &Bottom, e_coords: &[usize]) -> Result<Center> {
    if let Some(z) = &bottom.hypersurface {
        return Ok(Center::hypersurface(chart_id, z.clone()));
    }
    let n = bottom.frame.nvars;
    // a hypersurface that is a graph over an exceptional coordinate
    if let ([(t, g)], []) = (bottom.frame.elims.as_slice(), bottom.vanishing.as_slice()) {
        if !g.is_zero() && e_coords.contains(t) {
            return Ok(Center::hypersurface(chart_id, Polynomial::var(n, *t).sub(g)));
        }
    }
    let mut images: Vec<Polynomial> = (0..n).map(|i| Polynomial::var(n, i)).collect();
    for &j in &bottom.vanishing {
        images[j] = Polynomial::zero(n);
    }
    let mut vanishing: Vec<usize> = bottom.vanishing.clone();
    let mut shear = Vec::new();
    for (t, g) in bottom.frame.elims.iter().rev() {
        let h = g.substitute(&images);
        images[*t] = h.clone();
        vanishing.push(*t);
        if !h.is_zero() {
            if e_coords.contains(t) {
                return Err(Error::Straighten(format!(
                    "center is a graph over the exceptional coordinate x{t}; no coordinate shear available"
                )));
            }
            shear.push((*t, h));
        }
    }
    vanishing.sort_unstable();
    shear.sort_by_key(|(t, _)| *t);
    Ok(Center { chart_id: chart_id.to_string(), vanishing, shear, equation: None })
}

/// The maximum of the invariant over the cosupport of `m` in its chart and
/// the center it selects; `None` when the cosupport is empty. `prev` is the
/// history of the previous year for the same chart lineage.
pub fn analyze(
    m: &MarkedIdeal,
    names: &[String],
    year: u32,
    prev: Option<&[LevelHistory]>,
    settings: &Settings,
) -> Result<Option<Analysis>> {
    analyze_in(m, names, &Ideal::zero(m.nvars), year, prev, settings)
}

/// As [`analyze`], maximizing only over the closed set `V(region)`.
pub fn analyze_in(
    m: &MarkedIdeal,
    names: &[String],
    region: &Ideal,
    year: u32,
    prev: Option<&[LevelHistory]>,
    settings: &Settings,
) -> Result<Option<Analysis>> {
    let zero = Polynomial::zero(m.nvars);
    let on_normal = |f: &Polynomial| m.normal.iter().fold(f.clone(), |f, &j| f.substitute_var(j, &zero));
    let region = region.map(m.nvars, on_normal);
    if m.cosupport_is_empty() || m.cosupport_ideal().sum(&region).contains_one() {
        return Ok(None);
    }
    let mut e: Vec<Div> = m.e_view().iter().map(|h| Div { label: h.label.clone(), coord: h.coord }).collect();
    e.sort_by(|a, b| a.label.cmp(&b.label));
    let lv = Level { ideal: m.ideal.clone(), d: m.d, frame: Frame::top(m.nvars, &m.normal), e, region: region.clone() };
    let cos_region = m.cosupport_ideal().sum(&region);
    let mut hyper = Vec::new();
    for h in m.hyper.iter().filter(|h| h.alive) {
        if cos_region.with(std::slice::from_ref(&h.equation)).contains_one() {
            continue;
        }
        if m.ideal.gens().iter().all(|g| g.div_exact(&h.equation).is_some()) {
            return Err(Error::Straighten(format!(
                "divisor {} is not a coordinate hyperplane and divides the ideal",
                h.label.name
            )));
        }
        hyper.push((h.label.name.clone(), h.equation.clone()));
    }
    let mut walk =
        Walk { year, prev, settings, names, pairs: Vec::new(), history: Vec::new(), trace: Vec::new(), hyper };
    let bottom = walk.level(0, lv)?;
    let center = Some(lift_center(&m.chart_id, &bottom, &m.e_coords())?);
    Ok(Some(Analysis {
        inv: InvariantValue { pairs: walk.pairs, terminator: bottom.terminator },
        mu: bottom.mu,
        j: bottom.j,
        history: walk.history,
        bottom_d: bottom.d,
        center,
        trace: walk.trace,
    }))
}

/// Spec-level helper: the companion ideal `G` of a marked ideal at the
/// chart-wide maximum of `ord N(I)`; `None` in the monomial case.
pub fn companion_ideal(m: &MarkedIdeal) -> Option<MarkedIdeal> {
    let coords = m.e_coords();
    let (alphas, residual) = factor_monomial(&m.ideal, &coords);
    let nu = max_order(&residual, &m.free_coords(), &m.cosupport_ideal())?;
    if nu == 0 {
        return None;
    }
    if nu >= m.d {
        return Some(m.with_ideal(residual, nu));
    }
    let mono = m.with_ideal(monomial_ideal(m.nvars, &coords, &alphas), m.d - nu);
    m.with_ideal(residual, nu).marked_sum(&mono).ok()
}

/// A maximal contact element of `D_E^{d-1}(I)`: `(z, t)` with `V(z)` a graph
/// over the coordinate `x_t`, which is not in `E`.
pub fn find_maximal_contact(m: &MarkedIdeal, shear_rounds: u32) -> Result<(Polynomial, usize)> {
    let e = m.e_coords();
    let frame = Frame::top(m.nvars, &m.normal);
    let d_top = log_derivative_power(&m.ideal, &frame.free, &e, m.d - 1);
    contact(&d_top, &frame, &e, shear_rounds, &m.cosupport_ideal())
        .map(|(z, t, _)| (z, t))
        .ok_or_else(|| Error::NoContact("no straightenable element".into()))
}

/// Restriction of a marked ideal to the graph `x_t = g` as a new frame: the
/// coordinate `t` becomes normal after substituting.
pub fn restrict_to_graph(m: &MarkedIdeal, t: usize, g: &Polynomial) -> MarkedIdeal {
    let ideal = m.ideal.map(m.nvars, |f| f.substitute_var(t, g));
    let mut normal = m.normal.clone();
    normal.push(t);
    normal.sort_unstable();
    MarkedIdeal { normal, ideal, ..m.clone() }
}
