//! Buchberger's algorithm with the sugar selection strategy and the
//! Gebauer–Möller pair criteria, over exact rationals.

use super::poly::{divides, grevlex, lcm_exp, total_degree, Polynomial, Rational};
use num_traits::{One, Zero};
use std::cmp::Ordering;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermOrder {
    GrevLex,
    /// Product order: grevlex on the first `block` variables, then grevlex on
    /// the rest. Eliminates the first block.
    Elimination { block: usize },
}

impl TermOrder {
    pub fn cmp(&self, a: &[u32], b: &[u32]) -> Ordering {
        match *self {
            TermOrder::GrevLex => grevlex(a, b),
            TermOrder::Elimination { block } => {
                grevlex(&a[..block], &b[..block]).then_with(|| grevlex(&a[block..], &b[block..]))
            }
        }
    }
}

type Terms = Vec<(Vec<u32>, Rational)>;

#[derive(Clone)]
struct GPoly {
    terms: Terms,
    sugar: u32,
}

impl GPoly {
    fn lm(&self) -> &[u32] {
        &self.terms[0].0
    }
}

fn sorted_terms(f: &Polynomial, order: TermOrder) -> Terms {
    let mut t: Terms = f.terms().to_vec();
    if order != TermOrder::GrevLex {
        t.sort_by(|a, b| order.cmp(&b.0, &a.0));
    }
    t
}

fn make_monic(t: &mut Terms) {
    if let Some((_, c)) = t.first() {
        if !c.is_one() {
            let inv = c.recip();
            for (_, k) in t.iter_mut() {
                *k *= &inv;
            }
        }
    }
}

/// `a - c * m * b`, all sorted descending in `order`.
fn sub_scaled(a: &Terms, c: &Rational, m: &[u32], b: &Terms, order: TermOrder) -> Terms {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let shifted = |e: &Vec<u32>| -> Vec<u32> { e.iter().zip(m).map(|(x, y)| x + y).collect() };
    let (mut i, mut j) = (0, 0);
    let mut bj: Option<Vec<u32>> = b.first().map(|t| shifted(&t.0));
    while i < a.len() && j < b.len() {
        let be = bj.as_ref().unwrap();
        match order.cmp(&a[i].0, be) {
            Ordering::Greater => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Less => {
                out.push((bj.take().unwrap(), -(c * &b[j].1)));
                j += 1;
                bj = b.get(j).map(|t| shifted(&t.0));
            }
            Ordering::Equal => {
                let v = &a[i].1 - c * &b[j].1;
                if !v.is_zero() {
                    out.push((a[i].0.clone(), v));
                }
                i += 1;
                j += 1;
                bj = b.get(j).map(|t| shifted(&t.0));
            }
        }
    }
    out.extend(a[i..].iter().cloned());
    while j < b.len() {
        out.push((bj.take().unwrap(), -(c * &b[j].1)));
        j += 1;
        bj = b.get(j).map(|t| shifted(&t.0));
    }
    out
}

fn monomial_quotient(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Full reduction of `f` by the active basis elements. Returns the remainder
/// together with its updated sugar.
fn reduce(f: GPoly, basis: &[GPoly], active: &[bool], order: TermOrder) -> GPoly {
    let mut rem: Terms = Vec::new();
    let mut p = f.terms;
    let mut start = 0;
    let mut sugar = f.sugar;
    while start < p.len() {
        let lead = p[start].0.clone();
        let mut hit = None;
        for (k, g) in basis.iter().enumerate() {
            if active[k] && divides(g.lm(), &lead) {
                hit = Some(k);
                break;
            }
        }
        match hit {
            Some(k) => {
                let g = &basis[k];
                let m = monomial_quotient(&lead, g.lm());
                let c = &p[start].1 / &g.terms[0].1;
                sugar = sugar.max(total_degree(&m) + g.sugar);
                p = sub_scaled(&p[start..].to_vec(), &c, &m, &g.terms, order);
                start = 0;
            }
            None => {
                rem.push(p[start].clone());
                start += 1;
            }
        }
    }
    GPoly { terms: rem, sugar }
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Vec<u32>,
    sugar: u32,
}

fn spoly(a: &GPoly, b: &GPoly, lcm: &[u32], order: TermOrder) -> GPoly {
    let ma = monomial_quotient(lcm, a.lm());
    let mb = monomial_quotient(lcm, b.lm());
    let sugar = (a.sugar + total_degree(&ma)).max(b.sugar + total_degree(&mb));
    // a, b are monic
    let left: Terms = a.terms.iter().map(|(e, c)| (e.iter().zip(&ma).map(|(x, y)| x + y).collect(), c.clone())).collect();
    let terms = sub_scaled(&left, &Rational::one(), &mb, &b.terms, order);
    GPoly { terms, sugar }
}

fn coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

fn update(polys: &[GPoly], active: &mut [bool], pairs: &mut Vec<Pair>, h: usize) {
    let hl = polys[h].lm().to_vec();
    let mut c: Vec<(usize, Vec<u32>)> = (0..h)
        .filter(|&g| active[g])
        .map(|g| (g, lcm_exp(&hl, polys[g].lm())))
        .collect();
    let mut d: Vec<(usize, Vec<u32>)> = Vec::new();
    while let Some((g1, l1)) = c.pop() {
        let keep = coprime(&hl, polys[g1].lm())
            || !c.iter().chain(d.iter()).any(|(_, l2)| divides(l2, &l1));
        if keep {
            d.push((g1, l1));
        }
    }
    let e: Vec<(usize, Vec<u32>)> = d.into_iter().filter(|(g, _)| !coprime(&hl, polys[*g].lm())).collect();
    pairs.retain(|p| {
        !(divides(&hl, &p.lcm)
            && lcm_exp(polys[p.i].lm(), &hl) != p.lcm
            && lcm_exp(&hl, polys[p.j].lm()) != p.lcm)
    });
    for (g, l) in e {
        let sugar = {
            let a = &polys[g];
            let b = &polys[h];
            (a.sugar + total_degree(&l) - total_degree(a.lm())).max(b.sugar + total_degree(&l) - total_degree(b.lm()))
        };
        pairs.push(Pair { i: g, j: h, lcm: l, sugar });
    }
    for g in 0..h {
        if active[g] && divides(&hl, polys[g].lm()) {
            active[g] = false;
        }
    }
    active[h] = true;
}

/// Reduced Gröbner basis, sorted ascending by leading monomial in `order`.
/// Returns `[1]` as soon as a unit appears.
pub fn groebner_basis(gens: &[Polynomial], order: TermOrder) -> Vec<Polynomial> {
    let nvars = match gens.first() {
        Some(g) => g.nvars(),
        None => return Vec::new(),
    };
    let mut input: Vec<GPoly> = gens
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| {
            let mut t = sorted_terms(g, order);
            make_monic(&mut t);
            GPoly { sugar: g.degree().unwrap_or(0), terms: t }
        })
        .collect();
    if input.iter().any(|g| total_degree(g.lm()) == 0) {
        return vec![Polynomial::one(nvars)];
    }
    input.sort_by(|a, b| order.cmp(a.lm(), b.lm()));
    input.dedup_by(|a, b| a.terms == b.terms);

    let mut polys: Vec<GPoly> = Vec::new();
    let mut active: Vec<bool> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    for f in input {
        let r = reduce(f, &polys, &active, order);
        if r.terms.is_empty() {
            continue;
        }
        let mut r = r;
        make_monic(&mut r.terms);
        if total_degree(r.lm()) == 0 {
            return vec![Polynomial::one(nvars)];
        }
        polys.push(r);
        active.push(false);
        update(&polys, &mut active, &mut pairs, polys.len() - 1);
    }
    while !pairs.is_empty() {
        let mut best = 0;
        for k in 1..pairs.len() {
            let (p, q) = (&pairs[k], &pairs[best]);
            if p.sugar < q.sugar || (p.sugar == q.sugar && order.cmp(&p.lcm, &q.lcm) == Ordering::Less) {
                best = k;
            }
        }
        let pair = pairs.swap_remove(best);
        let s = spoly(&polys[pair.i], &polys[pair.j], &pair.lcm, order);
        let mut r = reduce(s, &polys, &active, order);
        if r.terms.is_empty() {
            continue;
        }
        make_monic(&mut r.terms);
        if total_degree(r.lm()) == 0 {
            return vec![Polynomial::one(nvars)];
        }
        polys.push(r);
        active.push(false);
        update(&polys, &mut active, &mut pairs, polys.len() - 1);
    }

    // interreduce the minimal basis
    let idx: Vec<usize> = (0..polys.len()).filter(|&k| active[k]).collect();
    let mut minimal: Vec<GPoly> = idx.iter().map(|&k| polys[k].clone()).collect();
    minimal.sort_by(|a, b| order.cmp(a.lm(), b.lm()));
    let mut reduced: Vec<GPoly> = Vec::with_capacity(minimal.len());
    for k in 0..minimal.len() {
        let others: Vec<GPoly> = minimal.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, g)| g.clone()).collect();
        let act = vec![true; others.len()];
        let head = minimal[k].terms[0].clone();
        let tail = GPoly { terms: minimal[k].terms[1..].to_vec(), sugar: minimal[k].sugar };
        let r = reduce(tail, &others, &act, order);
        let mut terms = vec![head];
        terms.extend(r.terms);
        make_monic(&mut terms);
        reduced.push(GPoly { terms, sugar: 0 });
    }
    reduced.into_iter().map(|g| Polynomial::from_terms(nvars, g.terms)).collect()
}

/// Remainder of `f` on division by a Gröbner basis (grevlex).
pub fn normal_form(f: &Polynomial, basis: &[Polynomial]) -> Polynomial {
    let order = TermOrder::GrevLex;
    let polys: Vec<GPoly> = basis
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| GPoly { terms: sorted_terms(g, order), sugar: 0 })
        .collect();
    let act = vec![true; polys.len()];
    let r = reduce(GPoly { terms: f.terms().to_vec(), sugar: 0 }, &polys, &act, order);
    Polynomial::from_terms(f.nvars(), r.terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse::parse_polynomial;

    fn p(s: &str, names: &[&str]) -> Polynomial {
        let n: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        parse_polynomial(s, &n).unwrap()
    }

    #[test]
    fn reduced_basis_small_example() {
        let v = ["x", "y"];
        let b = groebner_basis(&[p("y^2 - x", &v), p("x", &v)], TermOrder::GrevLex);
        assert_eq!(b, vec![p("x", &v), p("y^2", &v)]);
    }

    #[test]
    fn unit_ideal_collapses() {
        let v = ["x", "y"];
        let b = groebner_basis(&[p("x*y - 1", &v), p("x", &v)], TermOrder::GrevLex);
        assert_eq!(b, vec![Polynomial::one(2)]);
    }

    #[test]
    fn twisted_cubic_basis_size() {
        let v = ["x", "y", "z", "w"];
        let b = groebner_basis(
            &[p("x*z - y^2", &v), p("x*w - y*z", &v), p("y*w - z^2", &v)],
            TermOrder::GrevLex,
        );
        assert_eq!(b.len(), 3);
        for g in &b {
            assert_eq!(g.degree(), Some(2));
        }
    }

    #[test]
    fn elimination_projects() {
        // eliminate t from (x - t^2, y - t^3): the cusp y^2 - x^3
        let v = ["t", "x", "y"];
        let b = groebner_basis(&[p("x - t^2", &v), p("y - t^3", &v)], TermOrder::Elimination { block: 1 });
        let free: Vec<_> = b.iter().filter(|g| !g.uses_var(0)).collect();
        assert_eq!(free.len(), 1);
        assert_eq!(free[0].monic(), p("y^2 - x^3", &v).monic());
    }

    #[test]
    fn normal_form_remainder() {
        let v = ["x", "y"];
        let b = groebner_basis(&[p("x^2", &v), p("y", &v)], TermOrder::GrevLex);
        assert!(normal_form(&p("x^3 + x*y", &v), &b).is_zero());
        assert_eq!(normal_form(&p("x + y", &v), &b), p("x", &v));
    }
}
