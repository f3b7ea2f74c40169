use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use super::space::{space, JetSpace, MAX_ORDER};

/// Truncated multivariate Taylor polynomial about a chart point.
///
/// A jet of order `k` carries every partial derivative up to order `k`.
/// Arithmetic truncates to the smaller order of its operands, and
/// [`Jet::derivative`] lowers the order by one, so the order of a result
/// records exactly how many derivatives remain trustworthy.
#[derive(Clone)]
pub struct Jet {
    space: &'static JetSpace,
    order: usize,
    coeffs: Vec<f64>,
}

impl Jet {
    /// An exact constant, compatible with jets over any variable count.
    pub fn constant(value: f64) -> Self {
        Jet {
            space: space(0),
            order: MAX_ORDER,
            coeffs: vec![value],
        }
    }

    pub fn zero(nvars: usize, order: usize) -> Self {
        let s = space(nvars);
        assert!(order <= MAX_ORDER);
        Jet {
            space: s,
            order,
            coeffs: vec![0.0; s.len(order)],
        }
    }

    /// The coordinate function `z_var` expanded about `value`.
    pub fn variable(nvars: usize, var: usize, value: f64, order: usize) -> Self {
        assert!(var < nvars, "variable {var} out of range for {nvars} variables");
        let mut j = Jet::zero(nvars, order);
        j.coeffs[0] = value;
        if order >= 1 {
            let mut e = vec![0u8; nvars];
            e[var] = 1;
            let k = j.space.monomial(&e).expect("degree-1 monomial");
            j.coeffs[k] = 1.0;
        }
        j
    }

    /// Builds a jet from partial derivatives. `partial` receives a sorted
    /// list of variable indices (length = derivative order) and returns
    /// the corresponding partial derivative; variables at or beyond
    /// `active` are treated as absent from the function.
    pub fn from_partials(
        nvars: usize,
        order: usize,
        active: usize,
        mut partial: impl FnMut(&[usize]) -> f64,
    ) -> Self {
        let mut j = Jet::zero(nvars, order);
        let exps = j.space.exponents[..j.coeffs.len()].to_vec();
        for (k, e) in exps.iter().enumerate() {
            if e.iter().skip(active).any(|&x| x > 0) {
                continue;
            }
            let mut vars = Vec::new();
            let mut factorial = 1.0;
            for (v, &count) in e.iter().enumerate() {
                for c in 0..count {
                    vars.push(v);
                    factorial *= (c + 1) as f64;
                }
            }
            j.coeffs[k] = partial(&vars) / factorial;
        }
        j
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nvars(&self) -> usize {
        self.space.nvars
    }

    pub fn is_constant(&self) -> bool {
        self.space.nvars == 0
    }

    /// Partial derivative with respect to the listed variables (repeats allowed).
    pub fn partial(&self, vars: &[usize]) -> f64 {
        if vars.is_empty() {
            return self.value();
        }
        if self.is_constant() {
            return 0.0;
        }
        assert!(
            vars.len() <= self.order,
            "order-{} jet cannot supply a derivative of order {}",
            self.order,
            vars.len()
        );
        let mut e = vec![0u8; self.space.nvars];
        for &v in vars {
            e[v] += 1;
        }
        let factorial: f64 = e
            .iter()
            .map(|&c| (1..=c as u32).product::<u32>() as f64)
            .product();
        let k = self.space.monomial(&e).expect("monomial within order");
        self.coeffs[k] * factorial
    }

    /// Exact partial derivative along one variable; the order drops by one.
    pub fn derivative(&self, var: usize) -> Jet {
        if self.is_constant() {
            return Jet::constant(0.0);
        }
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        assert!(var < self.space.nvars);
        let order = self.order - 1;
        let mut out = vec![0.0; self.space.len(order)];
        let src_len = self.coeffs.len();
        for &(src, dst, factor) in &self.space.derivatives[var] {
            let src = src as usize;
            if src >= src_len {
                break;
            }
            out[dst as usize] += factor * self.coeffs[src];
        }
        Jet {
            space: self.space,
            order,
            coeffs: out,
        }
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if self.is_constant() || order >= self.order {
            return self.clone();
        }
        Jet {
            space: self.space,
            order,
            coeffs: self.coeffs[..self.space.len(order)].to_vec(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// `f(self)` for a function with Taylor data `taylor[k] = f^(k)(v)/k!` at `v = self.value()`.
    pub fn compose(&self, taylor: [f64; MAX_ORDER + 1]) -> Jet {
        if self.is_constant() {
            return Jet::constant(taylor[0]);
        }
        if self.order == 0 {
            let mut out = self.clone();
            out.coeffs[0] = taylor[0];
            return out;
        }
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut acc = Jet::constant(taylor[self.order]);
        for k in (0..self.order).rev() {
            acc = &(&acc * &h) + taylor[k];
        }
        acc.truncate(self.order)
    }

    pub fn recip(&self) -> Jet {
        let v = self.value();
        let r = 1.0 / v;
        self.compose([r, -r * r, r * r * r, -r * r * r * r])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s / 2.0, -c / 6.0])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c / 2.0, s / 6.0])
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose([e, e, e / 2.0, e / 6.0])
    }

    pub fn ln(&self) -> Jet {
        let v = self.value();
        let r = 1.0 / v;
        self.compose([v.ln(), r, -r * r / 2.0, r * r * r / 3.0])
    }

    pub fn sqrt(&self) -> Jet {
        let v = self.value();
        let s = v.sqrt();
        self.compose([s, 0.5 / s, -0.125 / (s * v), 0.0625 / (s * v * v)])
    }

    pub fn powi(&self, n: i32) -> Jet {
        let v = self.value();
        let nf = n as f64;
        self.compose([
            v.powi(n),
            nf * v.powi(n - 1),
            nf * (nf - 1.0) * v.powi(n - 2) / 2.0,
            nf * (nf - 1.0) * (nf - 2.0) * v.powi(n - 3) / 6.0,
        ])
    }

    fn scale(&self, s: f64) -> Jet {
        Jet {
            space: self.space,
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    fn shift(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    fn combine(a: &Jet, b: &Jet, sign: f64) -> Jet {
        if b.is_constant() {
            return a.shift(sign * b.value());
        }
        if a.is_constant() {
            return b.scale(sign).shift(a.value());
        }
        assert_eq!(a.space.nvars, b.space.nvars, "jets over different charts");
        let order = a.order.min(b.order);
        let len = a.space.len(order);
        let coeffs = a.coeffs[..len]
            .iter()
            .zip(&b.coeffs[..len])
            .map(|(x, y)| x + sign * y)
            .collect();
        Jet {
            space: a.space,
            order,
            coeffs,
        }
    }

    fn product(a: &Jet, b: &Jet) -> Jet {
        if a.is_constant() {
            return b.scale(a.value());
        }
        if b.is_constant() {
            return a.scale(b.value());
        }
        assert_eq!(a.space.nvars, b.space.nvars, "jets over different charts");
        let order = a.order.min(b.order);
        let s = a.space;
        let mut out = vec![0.0; s.len(order)];
        for &(i, j, k) in &s.products[..s.products_by_order[order]] {
            out[k as usize] += a.coeffs[i as usize] * b.coeffs[j as usize];
        }
        Jet {
            space: s,
            order,
            coeffs: out,
        }
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Jet(value={}, order={}, nvars={})",
            self.value(),
            self.order,
            self.space.nvars
        )
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.space.nvars == other.space.nvars
            && self.order == other.order
            && self.coeffs == other.coeffs
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
        impl $trait<f64> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                self.$method(&Jet::constant(rhs))
            }
        }
        impl $trait<f64> for Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                (&self).$method(&Jet::constant(rhs))
            }
        }
        impl $trait<&Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&Jet::constant(self)).$method(rhs)
            }
        }
        impl $trait<Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&Jet::constant(self)).$method(&rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a, b| Jet::combine(a, b, 1.0));
jet_binop!(Sub, sub, |a, b| Jet::combine(a, b, -1.0));
jet_binop!(Mul, mul, Jet::product);
jet_binop!(Div, div, |a, b| {
    if b.is_constant() {
        a.scale(1.0 / b.value())
    } else {
        Jet::product(a, &b.recip())
    }
});

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        *self = &*self + rhs;
    }
}

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = &*self + &rhs;
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        *self = &*self - rhs;
    }
}

impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = &*self - &rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn product_of_variables() {
        let x = Jet::variable(2, 0, 2.0, 3);
        let y = Jet::variable(2, 1, 3.0, 3);
        let p = &x * &y;
        assert_eq!(p.value(), 6.0);
        assert_eq!(p.partial(&[0]), 3.0);
        assert_eq!(p.partial(&[1]), 2.0);
        assert_eq!(p.partial(&[0, 1]), 1.0);
        assert_eq!(p.partial(&[0, 0]), 0.0);
        assert_eq!(p.partial(&[0, 0, 1]), 0.0);
    }

    #[test]
    fn cube_third_derivative() {
        let x = Jet::variable(1, 0, 1.5, 3);
        let c = &(&x * &x) * &x;
        assert!(close(c.partial(&[0, 0, 0]), 6.0, 1e-15));
        assert!(close(c.partial(&[0, 0]), 9.0, 1e-15));
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let v = 0.7;
        let x = Jet::variable(1, 0, v, 3);
        let s = x.sin();
        assert!(close(s.partial(&[0]), v.cos(), 1e-15));
        assert!(close(s.partial(&[0, 0]), -v.sin(), 1e-15));
        assert!(close(s.partial(&[0, 0, 0]), -v.cos(), 1e-15));
        let r = x.recip();
        assert!(close(r.partial(&[0, 0, 0]), -6.0 / v.powi(4), 1e-14));
        let q = x.sqrt();
        assert!(close(q.partial(&[0, 0, 0]), 3.0 / 8.0 * v.powf(-2.5), 1e-14));
        let l = x.ln();
        assert!(close(l.partial(&[0, 0, 0]), 2.0 / v.powi(3), 1e-14));
        let e = x.exp();
        assert!(close(e.partial(&[0, 0, 0]), v.exp(), 1e-15));
        let p = x.powi(-2);
        assert!(close(p.partial(&[0, 0]), 6.0 / v.powi(4), 1e-14));
    }

    #[test]
    fn derivative_lowers_order() {
        let x = Jet::variable(2, 0, 0.3, 3);
        let y = Jet::variable(2, 1, -0.4, 3);
        let f = (&x * &y).sin();
        let dx = f.derivative(0);
        assert_eq!(dx.order(), 2);
        assert!(close(dx.value(), f.partial(&[0]), 1e-15));
        assert!(close(dx.partial(&[1, 1]), f.partial(&[0, 1, 1]), 1e-14));
    }

    #[test]
    fn mixed_orders_truncate_to_minimum() {
        let x = Jet::variable(2, 0, 1.0, 3);
        let y = Jet::variable(2, 1, 1.0, 1);
        assert_eq!((&x + &y).order(), 1);
        assert_eq!((&x * &y).order(), 1);
        assert_eq!((&x * 2.0).order(), 3);
    }

    #[test]
    fn division_matches_quotient_rule() {
        let x = Jet::variable(1, 0, 2.0, 2);
        let q = 1.0 / (&x * &x + 1.0);
        // d/dx (1+x^2)^-1 = -2x/(1+x^2)^2
        assert!(close(q.partial(&[0]), -4.0 / 25.0, 1e-15));
    }

    #[test]
    fn from_partials_roundtrip() {
        let x = Jet::variable(3, 0, 0.2, 3);
        let y = Jet::variable(3, 1, 0.5, 3);
        let f = (&x * &y).exp() + &x.sin();
        let g = Jet::from_partials(3, 3, 3, |vars| f.partial(vars));
        for k in 0..f.coeffs.len() {
            assert!(close(f.coeffs[k], g.coeffs[k], 1e-15));
        }
    }
}
