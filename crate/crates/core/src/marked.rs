//! Marked ideals `(M, N, E, I, d)` on a chart and their transforms.
//!
//! `M` is the chart, `N = V(x_j : j in normal)` is a coordinate subspace and
//! the generators of `I` only involve the remaining (free) coordinates.

use crate::algebra::{derivative_power, log_derivative_power, Ideal, Polynomial, Rational};
use crate::chart::{Center, Chart, EqDivisor, ExcHypersurface};
use crate::error::{Error, Result};
use num_integer::Integer;

#[derive(Clone, Debug)]
pub struct MarkedIdeal {
    pub chart_id: String,
    pub nvars: usize,
    pub normal: Vec<usize>,
    pub e: Vec<ExcHypersurface>,
    pub hyper: Vec<EqDivisor>,
    pub ideal: Ideal,
    pub d: u32,
}

impl MarkedIdeal {
    pub fn new(chart: &Chart, normal: Vec<usize>, ideal: Ideal, d: u32) -> Result<Self> {
        if d < 1 {
            return Err(Error::Input("marking must be at least 1".into()));
        }
        let n = chart.nvars();
        if ideal.nvars() != n {
            return Err(Error::Input("ideal arity differs from the chart".into()));
        }
        let mut normal = normal;
        normal.sort_unstable();
        normal.dedup();
        if normal.iter().any(|&j| j >= n) {
            return Err(Error::Input("normal coordinate out of range".into()));
        }
        for g in ideal.gens() {
            if normal.iter().any(|&j| g.uses_var(j)) {
                return Err(Error::Input("generator involves a coordinate normal to N".into()));
            }
        }
        Ok(MarkedIdeal { chart_id: chart.id.clone(), nvars: n, normal, e: chart.e.clone(), hyper: chart.hyper.clone(), ideal, d })
    }

    pub fn free_coords(&self) -> Vec<usize> {
        (0..self.nvars).filter(|j| !self.normal.contains(j)).collect()
    }

    /// Alive divisors transverse to `N`.
    pub fn e_view(&self) -> Vec<&ExcHypersurface> {
        self.e.iter().filter(|h| h.alive && !self.normal.contains(&h.coord)).collect()
    }

    pub fn e_coords(&self) -> Vec<usize> {
        self.e_view().iter().map(|h| h.coord).collect()
    }

    pub fn with_ideal(&self, ideal: Ideal, d: u32) -> MarkedIdeal {
        MarkedIdeal { ideal, d, ..self.clone() }
    }

    /// `cosupp(I, d) = V(D^{d-1}(I))` inside `N`.
    pub fn cosupport_ideal(&self) -> Ideal {
        derivative_power(&self.ideal, &self.free_coords(), self.d - 1)
    }

    pub fn cosupport_is_empty(&self) -> bool {
        !self.ideal.is_zero() && self.cosupport_ideal().contains_one()
    }

    pub fn in_cosupport(&self, p: &[Rational]) -> bool {
        use num_traits::Zero;
        if self.normal.iter().any(|&j| !p[j].is_zero()) {
            return false;
        }
        match self.ideal.order_at_point(p) {
            None => true,
            Some(o) => o >= self.d,
        }
    }

    fn check_frame(&self, other: &MarkedIdeal) -> Result<()> {
        let labels = |m: &MarkedIdeal| m.e_view().iter().map(|h| (h.label.clone(), h.coord)).collect::<Vec<_>>();
        if self.chart_id != other.chart_id || self.normal != other.normal || labels(self) != labels(other) {
            return Err(Error::FrameMismatch(format!("{} vs {}", self.chart_id, other.chart_id)));
        }
        Ok(())
    }

    /// `(I, d) + (J, e) = (I^{l/d} + J^{l/e}, l)` with `l = lcm(d, e)`.
    pub fn marked_sum(&self, other: &MarkedIdeal) -> Result<MarkedIdeal> {
        self.check_frame(other)?;
        let l = self.d.lcm(&other.d);
        let ideal = self.ideal.power(l / self.d).sum(&other.ideal.power(l / other.d));
        Ok(self.with_ideal(ideal, l))
    }

    /// `(I, d) * (J, e) = (I J, d + e)`.
    pub fn marked_product(&self, other: &MarkedIdeal) -> Result<MarkedIdeal> {
        self.check_frame(other)?;
        Ok(self.with_ideal(self.ideal.product(&other.ideal), self.d + other.d))
    }

    /// The ideal with the center's shear applied (coordinates in which the
    /// center is `V(x_S)`).
    fn sheared_ideal(&self, ctr: &Center) -> Ideal {
        if ctr.shear.is_empty() {
            return self.ideal.clone();
        }
        let n = self.nvars;
        let images: Vec<Polynomial> = (0..n)
            .map(|j| {
                let x = Polynomial::var(n, j);
                match ctr.shear.iter().find(|(t, _)| *t == j) {
                    Some((_, h)) => x.add(h),
                    None => x,
                }
            })
            .collect();
        self.ideal.substitute(&images, n)
    }

    /// `C ⊂ cosupp(I, d)` and `C ⊂ N`.
    pub fn is_admissible(&self, ctr: &Center) -> bool {
        if let Some(z) = &ctr.equation {
            let zd = z.pow(self.d);
            return ctr.chart_id == self.chart_id
                && self.normal.is_empty()
                && self.ideal.gens().iter().all(|g| g.div_exact(&zd).is_some());
        }
        if ctr.chart_id != self.chart_id || !self.normal.iter().all(|j| ctr.vanishing.contains(j)) {
            return false;
        }
        if ctr.shear.iter().any(|(t, _)| self.normal.contains(t)) {
            return false;
        }
        let along: Vec<usize> = ctr.vanishing.iter().copied().filter(|j| !self.normal.contains(j)).collect();
        match self.sheared_ideal(ctr).order_along(&along) {
            None => true,
            Some(o) => o >= self.d,
        }
    }

    /// Admissible transform in `child`, one of the charts of the blow-up of
    /// `ctr`. `None` when the strict transform of `N` misses the chart.
    pub fn transform_admissible(&self, ctr: &Center, child: &Chart) -> Result<Option<MarkedIdeal>> {
        if !self.is_admissible(ctr) {
            return Err(Error::NotAdmissible(format!("center is not contained in the cosupport in {}", self.chart_id)));
        }
        let k = child.parent.as_ref().and_then(|l| l.chart_var).expect("blow-up chart");
        if self.normal.contains(&k) {
            return Ok(None);
        }
        let mut gens = Vec::with_capacity(self.ideal.gens().len());
        for g in self.ideal.gens() {
            let pulled = child.pull_back(g);
            let q = pulled
                .div_var_pow(k, self.d)
                .ok_or_else(|| Error::NotAdmissible("pull-back not divisible by the exceptional power".into()))?;
            gens.push(q);
        }
        let ideal = Ideal::new(child.nvars(), gens);
        Ok(Some(MarkedIdeal { chart_id: child.id.clone(), nvars: child.nvars(), normal: self.normal.clone(), e: child.e.clone(), hyper: child.hyper.clone(), ideal, d: self.d }))
    }

    /// Admissible transform `I / z^d` under the blow-up of the hypersurface
    /// center `V(z)`, which leaves the chart in place.
    pub fn transform_hypersurface(&self, ctr: &Center, child: &Chart) -> Result<MarkedIdeal> {
        let z = ctr.equation.as_ref().expect("hypersurface center");
        let zd = z.pow(self.d);
        let mut gens = Vec::with_capacity(self.ideal.gens().len());
        for g in self.ideal.gens() {
            gens.push(g.div_exact(&zd).ok_or_else(|| {
                Error::NotAdmissible(format!("center is not contained in the cosupport in {}", self.chart_id))
            })?);
        }
        let ideal = Ideal::new(child.nvars(), gens);
        Ok(MarkedIdeal { chart_id: child.id.clone(), e: child.e.clone(), hyper: child.hyper.clone(), ideal, ..self.clone() })
    }

    /// Plain pull-back under the blow-up of the intersection of two
    /// divisors of `E`.
    pub fn transform_exceptional(&self, child: &Chart) -> Result<MarkedIdeal> {
        let ideal = self.ideal.map(child.nvars(), |g| child.pull_back(g));
        Ok(MarkedIdeal { chart_id: child.id.clone(), nvars: child.nvars(), normal: self.normal.clone(), e: child.e.clone(), hyper: child.hyper.clone(), ideal, d: self.d })
    }

    /// Pull-back to `child = M x A^1`. The new coordinate is a coordinate of
    /// `N' = N x A^1`; whether `V(t)` joins `E` is decided by the chart.
    pub fn transform_product(&self, child: &Chart) -> MarkedIdeal {
        let ideal = self.ideal.map(child.nvars(), |g| child.pull_back(g));
        MarkedIdeal { chart_id: child.id.clone(), nvars: child.nvars(), normal: self.normal.clone(), e: child.e.clone(), hyper: child.hyper.clone(), ideal, d: self.d }
    }

    /// `C_E^{d-1}(I) = sum_j (D_E^j(I), d - j)`, folded left from `j = 0`,
    /// with logarithmic derivatives along `log_coords`.
    pub fn coefficient_ideal_with(&self, log_coords: &[usize]) -> MarkedIdeal {
        let free = self.free_coords();
        let mut acc_ideal = self.ideal.clone();
        let mut acc_d = self.d;
        let mut cur = self.ideal.clone();
        for j in 1..self.d {
            cur = log_derivative_power(&cur, &free, log_coords, 1).compacted();
            let dj = self.d - j;
            let l = acc_d.lcm(&dj);
            acc_ideal = acc_ideal.power(l / acc_d).sum(&cur.power(l / dj)).compacted();
            acc_d = l;
        }
        self.with_ideal(acc_ideal, acc_d)
    }

    pub fn coefficient_ideal(&self) -> MarkedIdeal {
        self.coefficient_ideal_with(&self.e_coords())
    }

    /// `H(I) = sum_j D^j(I) * (D^{d-1}(I))^j`, marked `d`.
    pub fn homogenized_ideal(&self) -> MarkedIdeal {
        let free = self.free_coords();
        let top = derivative_power(&self.ideal, &free, self.d - 1).compacted();
        let mut acc = Ideal::zero(self.nvars);
        let mut dj = self.ideal.clone();
        for j in 0..self.d {
            if j > 0 {
                dj = derivative_power(&dj, &free, 1).compacted();
            }
            acc = acc.sum(&dj.product(&top.power(j)));
        }
        self.with_ideal(acc.compacted(), self.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_polynomial_list;

    fn xy_chart() -> Chart {
        Chart::root(vec!["x".into(), "y".into()], vec![])
    }

    fn marked(s: &str, d: u32) -> MarkedIdeal {
        let c = xy_chart();
        let gens = parse_polynomial_list(s, &c.vars).unwrap();
        MarkedIdeal::new(&c, vec![], Ideal::new(2, gens), d).unwrap()
    }

    fn ideal(s: &str) -> Ideal {
        Ideal::new(2, parse_polynomial_list(s, &xy_chart().vars).unwrap())
    }

    #[test]
    fn cusp_transform_in_x_chart() {
        let m = marked("y^2 - x^3", 2);
        let c = xy_chart();
        let ctr = Center::coordinate("root", vec![0, 1]);
        let kids = c.blowup_charts(&ctr, 1).unwrap();
        let t = m.transform_admissible(&ctr, &kids[0]).unwrap().unwrap();
        assert!(t.ideal.equals(&ideal("y^2 - x")));
        assert_eq!(t.d, 2);
        assert!(t.cosupport_is_empty());
        let u = m.transform_admissible(&ctr, &kids[1]).unwrap().unwrap();
        assert!(u.ideal.equals(&ideal("1 - x^3*y")));
    }

    #[test]
    fn non_admissible_center_rejected() {
        let m = marked("y^2 - x^3", 3);
        let ctr = Center::coordinate("root", vec![0, 1]);
        let kids = xy_chart().blowup_charts(&ctr, 1).unwrap();
        assert!(matches!(m.transform_admissible(&ctr, &kids[0]), Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn sums_and_products() {
        let a = marked("x^3", 2);
        let b = marked("x^2", 2);
        let s = a.marked_sum(&b).unwrap();
        assert!(s.ideal.equals(&ideal("x^2")));
        assert_eq!(s.d, 2);
        let c = marked("y", 1);
        let t = a.marked_sum(&c).unwrap();
        assert_eq!(t.d, 2);
        assert!(t.ideal.equals(&ideal("x^3, y^2")));
        let p = a.marked_product(&c).unwrap();
        assert_eq!(p.d, 3);
        assert!(p.ideal.equals(&ideal("x^3*y")));
    }

    #[test]
    fn coefficient_ideal_of_cusp() {
        let m = marked("y^2 - x^3", 2);
        let c = m.coefficient_ideal();
        assert_eq!(c.d, 2);
        assert!(c.ideal.equals(&ideal("x^3, x^2*y, y^2")));
    }

    #[test]
    fn homogenized_ideal_of_cusp() {
        let m = marked("y^2 - x^3", 2);
        let h = m.homogenized_ideal();
        assert_eq!(h.d, 2);
        assert!(h.ideal.equals(&ideal("y^2 - x^3, y^2, x^2*y, x^4")));
    }
}
