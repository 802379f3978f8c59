//! Sparse multivariate polynomials over Q.
//!
//! Terms are kept sorted by descending graded reverse lexicographic order with
//! `x0 > x1 > ...`, zero coefficients are never stored, so structural equality
//! is polynomial equality.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn total_degree(e: &[u32]) -> u32 {
    e.iter().sum()
}

/// Graded reverse lexicographic comparison.
pub fn grevlex(a: &[u32], b: &[u32]) -> Ordering {
    let (da, db) = (total_degree(a), total_degree(b));
    if da != db {
        return da.cmp(&db);
    }
    for i in (0..a.len()).rev() {
        if a[i] != b[i] {
            // smaller exponent in the last differing variable wins
            return b[i].cmp(&a[i]);
        }
    }
    Ordering::Equal
}

pub fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn lcm_exp(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<(Vec<u32>, Rational)>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: Vec::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        if c.is_zero() {
            return Self::zero(nvars);
        }
        Polynomial { nvars, terms: vec![(vec![0; nvars], c)] }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Polynomial { nvars, terms: vec![(e, Rational::one())] }
    }

    pub fn monomial(exp: Vec<u32>, c: Rational) -> Self {
        let nvars = exp.len();
        if c.is_zero() {
            return Self::zero(nvars);
        }
        Polynomial { nvars, terms: vec![(exp, c)] }
    }

    /// Builds from arbitrary (possibly repeated, unsorted) terms.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Self {
        let mut acc: HashMap<Vec<u32>, Rational> = HashMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent arity mismatch");
            *acc.entry(e).or_insert_with(Rational::zero) += c;
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| grevlex(&b.0, &a.0));
        Polynomial { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(Vec<u32>, Rational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && total_degree(&self.terms[0].0) == 0)
    }

    pub fn is_nonzero_constant(&self) -> bool {
        self.terms.len() == 1 && total_degree(&self.terms[0].0) == 0
    }

    pub fn constant_term(&self) -> Rational {
        match self.terms.last() {
            Some((e, c)) if total_degree(e) == 0 => c.clone(),
            _ => Rational::zero(),
        }
    }

    pub fn leading(&self) -> Option<&(Vec<u32>, Rational)> {
        self.terms.first()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.first().map(|(e, _)| total_degree(e))
    }

    /// Lowest total degree of a term; `None` for the zero polynomial.
    pub fn order_at_origin(&self) -> Option<u32> {
        self.terms.iter().map(|(e, _)| total_degree(e)).min()
    }

    /// Largest `k` with `x_i^k` dividing every term; `None` for zero.
    pub fn valuation_in(&self, i: usize) -> Option<u32> {
        self.terms.iter().map(|(e, _)| e[i]).min()
    }

    /// Order along the coordinate subspace `V(x_j : j in vars)`.
    pub fn order_along(&self, vars: &[usize]) -> Option<u32> {
        self.terms.iter().map(|(e, _)| vars.iter().map(|&j| e[j]).sum::<u32>()).min()
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.iter().any(|(e, _)| e[i] > 0)
    }

    pub fn vars_used(&self) -> Vec<usize> {
        (0..self.nvars).filter(|&i| self.uses_var(i)).collect()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    /// Scales so that the leading coefficient is one.
    pub fn monic(&self) -> Self {
        match self.terms.first() {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// Normalizes sign and scale so that scalar multiples compare equal.
    pub fn primitive_key(&self) -> Self {
        self.monic()
    }

    pub fn neg(&self) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, k)| (e.clone(), -k)).collect(),
        }
    }

    fn merge(&self, other: &Self, sign: bool) -> Self {
        assert_eq!(self.nvars, other.nvars, "polynomial arity mismatch");
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() && j < b.len() {
            match grevlex(&a[i].0, &b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if sign { b[j].1.clone() } else { -&b[j].1 };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if sign { &a[i].1 + &b[j].1 } else { &a[i].1 - &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        for t in &b[j..] {
            let c = if sign { t.1.clone() } else { -&t.1 };
            out.push((t.0.clone(), c));
        }
        Polynomial { nvars: self.nvars, terms: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.merge(other, true)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.merge(other, false)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "polynomial arity mismatch");
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.nvars);
        }
        let mut acc: HashMap<Vec<u32>, Rational> = HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                *acc.entry(e).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| grevlex(&b.0, &a.0));
        Polynomial { nvars: self.nvars, terms }
    }

    pub fn mul_monomial(&self, exp: &[u32], c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, k)| (e.iter().zip(exp).map(|(x, y)| x + y).collect(), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Exact division by `x_i^k`; `None` if some term is not divisible.
    pub fn div_var_pow(&self, i: usize, k: u32) -> Option<Self> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            if e[i] < k {
                return None;
            }
            let mut e2 = e.clone();
            e2[i] -= k;
            terms.push((e2, c.clone()));
        }
        // dividing by one variable preserves grevlex order among the terms
        Some(Polynomial { nvars: self.nvars, terms })
    }

    /// Exact quotient `self / f`; `None` if `f` does not divide `self`.
    pub fn div_exact(&self, f: &Polynomial) -> Option<Self> {
        let (lf, cf) = f.leading()?.clone();
        let mut q = Polynomial::zero(self.nvars);
        let mut r = self.clone();
        while let Some((lr, cr)) = r.leading().cloned() {
            if !divides(&lf, &lr) {
                return None;
            }
            let e: Vec<u32> = lr.iter().zip(&lf).map(|(a, b)| a - b).collect();
            let c = cr / &cf;
            r = r.sub(&f.mul_monomial(&e, &c));
            q = q.add(&Polynomial::monomial(e, c));
        }
        Some(q)
    }

    pub fn partial(&self, i: usize) -> Self {
        let terms = self.terms.iter().filter(|(e, _)| e[i] > 0).map(|(e, c)| {
            let mut e2 = e.clone();
            e2[i] -= 1;
            (e2, c * rat(e[i] as i64))
        });
        Self::from_terms(self.nvars, terms)
    }

    /// `x_i * d/dx_i`.
    pub fn log_partial(&self, i: usize) -> Self {
        let terms: Vec<_> = self
            .terms
            .iter()
            .filter(|(e, _)| e[i] > 0)
            .map(|(e, c)| (e.clone(), c * rat(e[i] as i64)))
            .collect();
        Polynomial { nvars: self.nvars, terms }
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars, "point arity mismatch");
        let mut sum = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    if point[i].is_zero() {
                        t = Rational::zero();
                        break;
                    }
                    t *= num_traits::pow::pow(point[i].clone(), k as usize);
                }
            }
            sum += t;
        }
        sum
    }

    /// Substitutes `x_i -> images[i]`; images may live in a different ring.
    pub fn substitute(&self, images: &[Polynomial]) -> Polynomial {
        assert_eq!(images.len(), self.nvars, "substitution arity mismatch");
        let target = images.first().map(|p| p.nvars).unwrap_or(0);
        let mut cache: Vec<Vec<Polynomial>> = images.iter().map(|p| vec![Polynomial::one(p.nvars), p.clone()]).collect();
        let mut acc: HashMap<Vec<u32>, Rational> = HashMap::new();
        for (e, c) in &self.terms {
            let mut t = Polynomial::constant(target, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let powers = &mut cache[i];
                while powers.len() <= k as usize {
                    let next = powers.last().unwrap().mul(&powers[1]);
                    powers.push(next);
                }
                t = t.mul(&powers[k as usize]);
                if t.is_zero() {
                    break;
                }
            }
            for (e2, c2) in t.terms {
                *acc.entry(e2).or_insert_with(Rational::zero) += c2;
            }
        }
        Polynomial::from_terms(target, acc)
    }

    /// Substitutes a single variable, leaving the others fixed.
    pub fn substitute_var(&self, i: usize, image: &Polynomial) -> Polynomial {
        let images: Vec<_> = (0..self.nvars)
            .map(|j| if j == i { image.clone() } else { Polynomial::var(self.nvars, j) })
            .collect();
        self.substitute(&images)
    }

    /// `f(x + p)`.
    pub fn translate(&self, point: &[Rational]) -> Polynomial {
        if point.iter().all(|c| c.is_zero()) {
            return self.clone();
        }
        let images: Vec<_> = (0..self.nvars)
            .map(|j| Polynomial::var(self.nvars, j).add(&Polynomial::constant(self.nvars, point[j].clone())))
            .collect();
        self.substitute(&images)
    }

    pub fn order_at_point(&self, point: &[Rational]) -> Option<u32> {
        self.translate(point).order_at_origin()
    }

    /// Appends `k` fresh variables at the end.
    pub fn extend_vars(&self, k: usize) -> Polynomial {
        Polynomial {
            nvars: self.nvars + k,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = e.clone();
                    e2.extend(std::iter::repeat(0).take(k));
                    (e2, c.clone())
                })
                .collect(),
        }
    }

    /// Inserts `k` fresh variables at the front.
    pub fn prepend_vars(&self, k: usize) -> Polynomial {
        let terms = self.terms.iter().map(|(e, c)| {
            let mut e2 = vec![0; k];
            e2.extend_from_slice(e);
            (e2, c.clone())
        });
        Self::from_terms(self.nvars + k, terms)
    }

    /// Removes variables that must not occur; panics if one does.
    pub fn drop_vars(&self, keep: &[usize]) -> Polynomial {
        let terms = self.terms.iter().map(|(e, c)| {
            for (i, &k) in e.iter().enumerate() {
                assert!(k == 0 || keep.contains(&i), "dropping a variable in use");
            }
            (keep.iter().map(|&i| e[i]).collect::<Vec<_>>(), c.clone())
        });
        Self::from_terms(keep.len(), terms)
    }

    /// Splits `self = a * x_i + b` when `x_i` appears at most linearly.
    pub fn linear_split(&self, i: usize) -> Option<(Polynomial, Polynomial)> {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (e, c) in &self.terms {
            match e[i] {
                0 => b.push((e.clone(), c.clone())),
                1 => {
                    let mut e2 = e.clone();
                    e2[i] = 0;
                    a.push((e2, c.clone()));
                }
                _ => return None,
            }
        }
        Some((Self::from_terms(self.nvars, a), Polynomial { nvars: self.nvars, terms: b }))
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    let name = names.get(i).cloned().unwrap_or_else(|| format!("x{i}"));
                    if k == 1 { name } else { format!("{name}^{k}") }
                })
                .collect();
            if mono.is_empty() {
                let _ = write!(out, "{}", a);
            } else if a.is_one() {
                out.push_str(&mono.join("*"));
            } else {
                let _ = write!(out, "{}*{}", a, mono.join("*"));
            }
        }
        out
    }
}

pub fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}
