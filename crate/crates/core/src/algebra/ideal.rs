//! Finitely generated ideals with a lazily computed reduced Gröbner basis.

use super::groebner::{groebner_basis, normal_form, TermOrder};
use super::poly::Polynomial;
use std::sync::OnceLock;

#[derive(Debug)]
pub struct Ideal {
    nvars: usize,
    gens: Vec<Polynomial>,
    basis: OnceLock<Vec<Polynomial>>,
}

impl Clone for Ideal {
    fn clone(&self) -> Self {
        let basis = OnceLock::new();
        if let Some(b) = self.basis.get() {
            let _ = basis.set(b.clone());
        }
        Ideal { nvars: self.nvars, gens: self.gens.clone(), basis }
    }
}

/// Drops zeros and scalar duplicates, keeping first occurrences in order.
fn tidy(gens: Vec<Polynomial>) -> Vec<Polynomial> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(gens.len());
    for g in gens {
        if g.is_zero() {
            continue;
        }
        if seen.insert(g.primitive_key()) {
            out.push(g);
        }
    }
    out
}

impl Ideal {
    pub fn new(nvars: usize, gens: Vec<Polynomial>) -> Self {
        for g in &gens {
            assert_eq!(g.nvars(), nvars, "generator arity mismatch");
        }
        Ideal { nvars, gens: tidy(gens), basis: OnceLock::new() }
    }

    pub fn zero(nvars: usize) -> Self {
        Self::new(nvars, Vec::new())
    }

    pub fn unit(nvars: usize) -> Self {
        Self::new(nvars, vec![Polynomial::one(nvars)])
    }

    pub fn vars(nvars: usize, idx: &[usize]) -> Self {
        Self::new(nvars, idx.iter().map(|&i| Polynomial::var(nvars, i)).collect())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn gens(&self) -> &[Polynomial] {
        &self.gens
    }

    pub fn is_zero(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn basis(&self) -> &[Polynomial] {
        self.basis.get_or_init(|| groebner_basis(&self.gens, TermOrder::GrevLex))
    }

    /// Same ideal, generated by its reduced basis.
    pub fn compacted(&self) -> Ideal {
        let b = self.basis().to_vec();
        let out = Ideal { nvars: self.nvars, gens: b.clone(), basis: OnceLock::new() };
        let _ = out.basis.set(b);
        out
    }

    pub fn contains_one(&self) -> bool {
        if self.gens.iter().any(|g| g.is_nonzero_constant()) {
            return true;
        }
        let b = self.basis();
        b.len() == 1 && b[0].is_nonzero_constant()
    }

    pub fn contains(&self, f: &Polynomial) -> bool {
        if f.is_zero() {
            return true;
        }
        normal_form(f, self.basis()).is_zero()
    }

    pub fn contains_ideal(&self, other: &Ideal) -> bool {
        other.gens.iter().all(|g| self.contains(g))
    }

    pub fn equals(&self, other: &Ideal) -> bool {
        self.nvars == other.nvars && self.basis() == other.basis()
    }

    pub fn sum(&self, other: &Ideal) -> Ideal {
        assert_eq!(self.nvars, other.nvars, "ideal arity mismatch");
        let mut g = self.gens.clone();
        g.extend(other.gens.iter().cloned());
        Ideal::new(self.nvars, g)
    }

    pub fn with(&self, extra: &[Polynomial]) -> Ideal {
        let mut g = self.gens.clone();
        g.extend(extra.iter().cloned());
        Ideal::new(self.nvars, g)
    }

    pub fn product(&self, other: &Ideal) -> Ideal {
        assert_eq!(self.nvars, other.nvars, "ideal arity mismatch");
        let mut g = Vec::with_capacity(self.gens.len() * other.gens.len());
        for a in &self.gens {
            for b in &other.gens {
                g.push(a.mul(b));
            }
        }
        Ideal::new(self.nvars, g)
    }

    /// `I^k`, compacting after each factor to keep generator lists short.
    pub fn power(&self, k: u32) -> Ideal {
        if k == 0 {
            return Ideal::unit(self.nvars);
        }
        let base = self.compacted();
        if base.is_zero() || base.contains_one() {
            return base;
        }
        let mut acc = base.clone();
        for _ in 1..k {
            acc = acc.product(&base).compacted();
        }
        acc
    }

    pub fn map(&self, target_nvars: usize, f: impl Fn(&Polynomial) -> Polynomial) -> Ideal {
        Ideal::new(target_nvars, self.gens.iter().map(f).collect())
    }

    pub fn substitute(&self, images: &[Polynomial], target_nvars: usize) -> Ideal {
        Ideal::new(target_nvars, self.gens.iter().map(|g| g.substitute(images)).collect())
    }

    /// `f` vanishes on `V(I)`: `1 in I + (1 - t f)` with a fresh `t`.
    pub fn radical_contains(&self, f: &Polynomial) -> bool {
        if self.contains(f) {
            return true;
        }
        let n = self.nvars;
        let t = Polynomial::var(n + 1, n);
        let mut g: Vec<Polynomial> = self.gens.iter().map(|p| p.extend_vars(1)).collect();
        g.push(Polynomial::one(n + 1).sub(&t.mul(&f.extend_vars(1))));
        Ideal::new(n + 1, g).contains_one()
    }

    /// `V(self) = V(other)`.
    pub fn same_zero_set(&self, other: &Ideal) -> bool {
        other.gens.iter().all(|g| self.radical_contains(g)) && self.gens.iter().all(|g| other.radical_contains(g))
    }

    /// Eliminates the listed variables; result lives in the same ring.
    pub fn eliminate(&self, vars: &[usize]) -> Ideal {
        let n = self.nvars;
        let mut perm: Vec<usize> = vars.to_vec();
        perm.extend((0..n).filter(|i| !vars.contains(i)));
        // move the eliminated block to the front
        let images: Vec<Polynomial> = (0..n)
            .map(|i| Polynomial::var(n, perm.iter().position(|&p| p == i).unwrap()))
            .collect();
        let moved: Vec<Polynomial> = self.gens.iter().map(|g| g.substitute(&images)).collect();
        let basis = groebner_basis(&moved, TermOrder::Elimination { block: vars.len() });
        let back: Vec<Polynomial> = (0..n).map(|k| Polynomial::var(n, perm[k])).collect();
        let kept: Vec<Polynomial> = basis
            .into_iter()
            .filter(|g| (0..vars.len()).all(|k| !g.uses_var(k)))
            .map(|g| g.substitute(&back))
            .collect();
        Ideal::new(n, kept)
    }

    /// `I : f^infinity`.
    pub fn saturate(&self, f: &Polynomial) -> Ideal {
        let n = self.nvars;
        let t = Polynomial::var(n + 1, n);
        let mut g: Vec<Polynomial> = self.gens.iter().map(|p| p.extend_vars(1)).collect();
        g.push(Polynomial::one(n + 1).sub(&t.mul(&f.extend_vars(1))));
        let sat = Ideal::new(n + 1, g).eliminate(&[n]);
        let keep: Vec<usize> = (0..n).collect();
        Ideal::new(n, sat.gens.iter().map(|p| p.drop_vars(&keep)).collect())
    }

    /// `I : f`, from `I ∩ (f) = (t I + (1 - t) f) ∩ k[x]`.
    pub fn quotient(&self, f: &Polynomial) -> Ideal {
        let n = self.nvars;
        if f.is_zero() {
            return Ideal::unit(n);
        }
        let t = Polynomial::var(n + 1, n);
        let one_minus_t = Polynomial::one(n + 1).sub(&t);
        let mut g: Vec<Polynomial> = self.gens.iter().map(|p| p.extend_vars(1).mul(&t)).collect();
        g.push(f.extend_vars(1).mul(&one_minus_t));
        let meet = Ideal::new(n + 1, g).eliminate(&[n]);
        let keep: Vec<usize> = (0..n).collect();
        let gens = meet
            .gens
            .iter()
            .map(|p| p.drop_vars(&keep).div_exact(f).expect("intersection with (f) is divisible by f"))
            .collect();
        Ideal::new(n, gens)
    }

    /// Membership of `f` in the localization of `I` at the point `p`:
    /// some element of `I : f` does not vanish at `p`.
    pub fn contains_locally(&self, f: &Polynomial, p: &[super::poly::Rational]) -> bool {
        use num_traits::Zero;
        if self.contains(f) {
            return true;
        }
        self.quotient(f).basis().iter().any(|g| !g.eval(p).is_zero())
    }

    /// Order of the ideal at the origin: minimum over generators.
    pub fn order_at_origin(&self) -> Option<u32> {
        self.gens.iter().filter_map(|g| g.order_at_origin()).min()
    }

    pub fn order_at_point(&self, p: &[super::poly::Rational]) -> Option<u32> {
        self.gens.iter().filter_map(|g| g.order_at_point(p)).min()
    }

    pub fn order_along(&self, vars: &[usize]) -> Option<u32> {
        self.gens.iter().filter_map(|g| g.order_along(vars)).min()
    }

    pub fn valuation_in(&self, i: usize) -> Option<u32> {
        self.gens.iter().filter_map(|g| g.valuation_in(i)).min()
    }

    pub fn vanishes_at(&self, p: &[super::poly::Rational]) -> bool {
        use num_traits::Zero;
        self.gens.iter().all(|g| g.eval(p).is_zero())
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.gens.is_empty() {
            return "(0)".to_string();
        }
        let parts: Vec<String> = self.gens.iter().map(|g| g.render(names)).collect();
        format!("({})", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse::parse_polynomial_list;

    fn ideal(s: &str, names: &[&str]) -> Ideal {
        let n: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        Ideal::new(names.len(), parse_polynomial_list(s, &n).unwrap())
    }

    #[test]
    fn equality_ignores_presentation() {
        let v = ["x", "y"];
        assert!(ideal("y^2 - x, x", &v).equals(&ideal("x, y^2", &v)));
        assert!(!ideal("x, y", &v).equals(&ideal("x, y^2", &v)));
    }

    #[test]
    fn radical_membership() {
        let v = ["x", "y"];
        let i = ideal("x^2, y^3", &v);
        assert!(i.radical_contains(&ideal("x + y", &v).gens()[0]));
        assert!(!i.radical_contains(&ideal("x + 1", &v).gens()[0]));
    }

    #[test]
    fn saturation_gives_strict_transform() {
        // x-chart pull-back of y^2 - x^3 is x^2 (y^2 - x)
        let v = ["x", "y"];
        let i = ideal("x^2*y^2 - x^3", &v);
        let s = i.saturate(&ideal("x", &v).gens()[0]);
        assert!(s.equals(&ideal("y^2 - x", &v)));
    }

    #[test]
    fn powers_and_products() {
        let v = ["x", "y"];
        let m = ideal("x, y", &v);
        let m3 = m.power(3);
        assert_eq!(m3.gens().len(), 4);
        assert!(m3.equals(&ideal("x^3, x^2*y, x*y^2, y^3", &v)));
        assert!(m.product(&m).equals(&m.power(2)));
    }

    #[test]
    fn clone_keeps_cached_basis() {
        let v = ["x", "y"];
        let i = ideal("x*y - 1, x", &v);
        assert!(i.contains_one());
        let j = i.clone();
        assert!(j.contains_one());
    }
}
