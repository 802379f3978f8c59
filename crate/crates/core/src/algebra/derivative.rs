//! Derivative ideals `D(I)`, logarithmic derivative ideals `D_E(I)`, their
//! iterates, and orders computed from them.

use super::ideal::Ideal;
use super::poly::Polynomial;

/// `I + (dI/dx_j : j in vars)`.
pub fn derivative_ideal(i: &Ideal, vars: &[usize]) -> Ideal {
    log_derivative_ideal(i, vars, &[])
}

/// Like [`derivative_ideal`] but uses `x_j d/dx_j` for `j` in `log_vars`.
pub fn log_derivative_ideal(i: &Ideal, vars: &[usize], log_vars: &[usize]) -> Ideal {
    let mut gens: Vec<Polynomial> = i.gens().to_vec();
    for g in i.gens() {
        for &j in vars {
            let dg = if log_vars.contains(&j) { g.log_partial(j) } else { g.partial(j) };
            gens.push(dg);
        }
    }
    Ideal::new(i.nvars(), gens)
}

pub fn derivative_power(i: &Ideal, vars: &[usize], k: u32) -> Ideal {
    log_derivative_power(i, vars, &[], k)
}

/// `D_E^k(I)`; intermediate ideals are replaced by their reduced bases.
pub fn log_derivative_power(i: &Ideal, vars: &[usize], log_vars: &[usize], k: u32) -> Ideal {
    let mut cur = i.clone();
    for step in 0..k {
        if cur.contains_one() {
            return Ideal::unit(i.nvars());
        }
        if step > 0 {
            cur = cur.compacted();
        }
        cur = log_derivative_ideal(&cur, vars, log_vars);
    }
    cur
}

/// Largest `c` such that `V(D^{c-1}(I))` meets `V(constraint)`, i.e. the
/// maximum of `ord I` over the locus. `None` when `I = 0` (order infinite).
/// Returns `Some(0)` if `V(I)` misses the locus.
pub fn max_order(i: &Ideal, vars: &[usize], constraint: &Ideal) -> Option<u32> {
    if i.is_zero() {
        return None;
    }
    let mut c = 0;
    let mut cur = i.compacted();
    loop {
        if cur.sum(constraint).contains_one() {
            return Some(c);
        }
        c += 1;
        cur = derivative_ideal(&cur, vars).compacted();
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
    fn derivative_of_cusp() {
        let v = ["x", "y"];
        let d = derivative_ideal(&ideal("y^2 - x^3", &v), &[0, 1]);
        assert!(d.equals(&ideal("y, x^2", &v)));
        assert!(derivative_power(&ideal("y^2 - x^3", &v), &[0, 1], 2).contains_one());
    }

    #[test]
    fn log_derivative_keeps_monomial() {
        let v = ["x", "y"];
        let i = ideal("x^3", &v);
        let d = log_derivative_ideal(&i, &[0, 1], &[0]);
        assert!(d.equals(&i));
        assert!(derivative_ideal(&i, &[0, 1]).equals(&ideal("x^2", &v)));
    }

    #[test]
    fn maximum_order_on_locus() {
        let v = ["x", "y"];
        let f = ideal("y^2 - x^3", &v);
        let everywhere = Ideal::zero(2);
        assert_eq!(max_order(&f, &[0, 1], &everywhere), Some(2));
        // away from the origin the curve is smooth
        assert_eq!(max_order(&f, &[0, 1], &ideal("x - 1", &v)), Some(1));
        assert_eq!(max_order(&f, &[0, 1], &ideal("x - 1, y", &v)), Some(0));
        assert_eq!(max_order(&Ideal::zero(2), &[0, 1], &everywhere), None);
    }
}

/// Determinant by cofactor expansion along the first row.
pub fn determinant(m: &[Vec<Polynomial>]) -> Polynomial {
    let k = m.len();
    assert!(k > 0 && m.iter().all(|r| r.len() == k), "square matrix expected");
    if k == 1 {
        return m[0][0].clone();
    }
    let mut acc = Polynomial::zero(m[0][0].nvars());
    for c in 0..k {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Polynomial>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, p)| p.clone()).collect())
            .collect();
        let term = m[0][c].mul(&determinant(&minor));
        acc = if c % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// `I` plus the `c x c` minors of the Jacobian of its generators: cuts out
/// the singular locus when `V(I)` has pure codimension `c`.
pub fn singular_locus(i: &Ideal, codim: usize) -> Ideal {
    let n = i.nvars();
    let gens = i.gens();
    if codim == 0 || codim > n || gens.len() < codim {
        return i.clone();
    }
    let mut extra = Vec::new();
    for rows in combinations(gens.len(), codim) {
        for cols in combinations(n, codim) {
            let m: Vec<Vec<Polynomial>> = rows.iter().map(|&r| cols.iter().map(|&c| gens[r].partial(c)).collect()).collect();
            extra.push(determinant(&m));
        }
    }
    i.with(&extra)
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}
