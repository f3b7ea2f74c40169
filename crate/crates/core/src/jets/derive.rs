use serde::{Deserialize, Serialize};

use super::jet::Jet;
use super::scalar::{ChartMap, ScalarField, SingleOutput};
use super::space::MAX_ORDER;
use crate::error::{GeometryError, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    ForwardJets,
    CentralFiniteDifference,
}

/// How partial derivatives of chart functions are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffScheme {
    pub kind: SchemeKind,
    /// Finite-difference spacing; `None` selects 1e-5 for first and 1e-4
    /// for second and third derivatives. Ignored by jets.
    pub step: Option<f64>,
    /// One Richardson level combining spacings `h` and `2h`.
    pub richardson: bool,
}

impl DiffScheme {
    pub const fn jets() -> Self {
        DiffScheme {
            kind: SchemeKind::ForwardJets,
            step: None,
            richardson: false,
        }
    }

    pub const fn finite_difference() -> Self {
        DiffScheme {
            kind: SchemeKind::CentralFiniteDifference,
            step: None,
            richardson: true,
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = Some(step);
        self
    }

    pub fn step_for(&self, order: usize) -> f64 {
        self.step
            .unwrap_or(if order <= 1 { 1e-5 } else { 1e-4 })
    }

    pub fn validate(&self) -> Result<()> {
        match self.step {
            Some(h) if !(h.is_finite() && h > 0.0) => Err(GeometryError::InvalidScheme(format!(
                "step must be positive, got {h}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn is_jets(&self) -> bool {
        self.kind == SchemeKind::ForwardJets
    }
}

impl Default for DiffScheme {
    fn default() -> Self {
        DiffScheme::jets()
    }
}

/// All partial derivatives of a scalar chart function at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeBundle {
    pub value: f64,
    pub d1: Vec<f64>,
    pub d2: Tensor<f64>,
    pub d3: Tensor<f64>,
}

impl DerivativeBundle {
    fn zeros(n: usize) -> Self {
        DerivativeBundle {
            value: 0.0,
            d1: vec![0.0; n],
            d2: Tensor::zeros(&[n, n]),
            d3: Tensor::zeros(&[n, n, n]),
        }
    }

    pub fn dim(&self) -> usize {
        self.d1.len()
    }

    /// Partial derivative along the listed variables (order 0..=3).
    pub fn partial(&self, vars: &[usize]) -> f64 {
        match *vars {
            [] => self.value,
            [i] => self.d1[i],
            [i, j] => self.d2[[i, j]],
            [i, j, k] => self.d3[[i, j, k]],
            _ => panic!("derivative bundles stop at order 3"),
        }
    }

    /// Embeds the bundle as a jet over `nvars >= dim` variables; the
    /// trailing variables do not enter the function.
    pub fn to_jet(&self, nvars: usize, order: usize) -> Jet {
        Jet::from_partials(nvars, order, self.dim(), |vars| self.partial(vars))
    }

    fn set(&mut self, vars: &[usize], v: f64) {
        match *vars {
            [] => self.value = v,
            [i] => self.d1[i] = v,
            [i, j] => {
                self.d2[[i, j]] = v;
                self.d2[[j, i]] = v;
            }
            [i, j, k] => {
                for [a, b, c] in [[i, j, k], [i, k, j], [j, i, k], [j, k, i], [k, i, j], [k, j, i]] {
                    self.d3[[a, b, c]] = v;
                }
            }
            _ => unreachable!(),
        }
    }
}

/// Partial derivatives of `field` at `x` up to `order`; higher blocks are zero.
pub fn derive<F: ScalarField + ?Sized>(
    field: &F,
    x: &[f64],
    order: usize,
    scheme: &DiffScheme,
) -> Result<DerivativeBundle> {
    let mut out = derive_map(&SingleOutput(field), x, order, scheme)?;
    Ok(out.remove(0))
}

/// Partial derivatives of every output of `map` at `x`.
pub fn derive_map<M: ChartMap + ?Sized>(
    map: &M,
    x: &[f64],
    order: usize,
    scheme: &DiffScheme,
) -> Result<Vec<DerivativeBundle>> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(GeometryError::UnsupportedOrder(order));
    }
    scheme.validate()?;
    match scheme.kind {
        SchemeKind::ForwardJets => derive_jets(map, x, order),
        SchemeKind::CentralFiniteDifference => derive_fd(map, x, order, scheme),
    }
}

fn domain_error(x: &[f64]) -> GeometryError {
    GeometryError::EvaluationDomain { point: x.to_vec() }
}

/// Sorted variable multisets of size `order` over `n` variables.
fn multisets(n: usize, order: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(n, left - 1, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, order, 0, &mut Vec::new(), &mut out);
    out
}

fn derive_jets<M: ChartMap + ?Sized>(map: &M, x: &[f64], order: usize) -> Result<Vec<DerivativeBundle>> {
    let n = x.len();
    let vars: Vec<Jet> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet::variable(n, i, v, order))
        .collect();
    let values = map.eval(&vars);
    let mut out = Vec::with_capacity(values.len());
    for jet in values {
        if !jet.is_finite() {
            return Err(domain_error(x));
        }
        let mut b = DerivativeBundle::zeros(n);
        for k in 0..=order {
            for vars in multisets(n, k) {
                b.set(&vars, jet.partial(&vars));
            }
        }
        out.push(b);
    }
    Ok(out)
}

/// Central stencil for d^count/dz^count as (offset in steps, weight * h^count).
fn stencil(count: usize) -> &'static [(i32, f64)] {
    match count {
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        _ => unreachable!(),
    }
}

/// Tensor-product central difference for one multi-index at spacing `h`.
fn central<M: ChartMap + ?Sized>(map: &M, x: &[f64], vars: &[usize], h: f64) -> Result<Vec<f64>> {
    let mut counts: Vec<(usize, usize)> = Vec::new();
    for &v in vars {
        match counts.last_mut() {
            Some((last, c)) if *last == v => *c += 1,
            _ => counts.push((v, 1)),
        }
    }
    let stencils: Vec<&[(i32, f64)]> = counts.iter().map(|&(_, c)| stencil(c)).collect();
    let mut acc = vec![0.0; map.outputs()];
    let mut pick = vec![0usize; counts.len()];
    loop {
        let mut point = x.to_vec();
        let mut weight = 1.0;
        for (axis, &(v, _)) in counts.iter().enumerate() {
            let (off, w) = stencils[axis][pick[axis]];
            point[v] += off as f64 * h;
            weight *= w;
        }
        let vals = map.eval(&point);
        for (a, v) in acc.iter_mut().zip(vals) {
            if !v.is_finite() {
                return Err(domain_error(x));
            }
            *a += weight * v;
        }
        let mut axis = counts.len();
        loop {
            if axis == 0 {
                let scale = h.powi(vars.len() as i32);
                return Ok(acc.into_iter().map(|a| a / scale).collect());
            }
            axis -= 1;
            pick[axis] += 1;
            if pick[axis] < stencils[axis].len() {
                break;
            }
            pick[axis] = 0;
        }
    }
}

fn derive_fd<M: ChartMap + ?Sized>(
    map: &M,
    x: &[f64],
    order: usize,
    scheme: &DiffScheme,
) -> Result<Vec<DerivativeBundle>> {
    let n = x.len();
    let base = map.eval(x);
    let mut out: Vec<DerivativeBundle> = base
        .iter()
        .map(|&v| {
            let mut b = DerivativeBundle::zeros(n);
            b.value = v;
            b
        })
        .collect();
    if base.iter().any(|v| !v.is_finite()) {
        return Err(domain_error(x));
    }
    for k in 1..=order {
        let h = scheme.step_for(k);
        for vars in multisets(n, k) {
            let fine = central(map, x, &vars, h)?;
            let est: Vec<f64> = if scheme.richardson {
                let coarse = central(map, x, &vars, 2.0 * h)?;
                fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect()
            } else {
                fine
            };
            for (b, v) in out.iter_mut().zip(est) {
                b.set(&vars, v);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Scalar;

    struct Constant;
    impl ScalarField for Constant {
        fn eval<S: Scalar>(&self, _x: &[S]) -> S {
            S::from_f64(5.0)
        }
    }

    struct Bilinear;
    impl ScalarField for Bilinear {
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            x[0].clone() * x[1].clone()
        }
    }

    struct Sine;
    impl ScalarField for Sine {
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            x[0].sin()
        }
    }

    struct Singular;
    impl ScalarField for Singular {
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            x[0].ln()
        }
    }

    fn schemes() -> [DiffScheme; 2] {
        [DiffScheme::jets(), DiffScheme::finite_difference()]
    }

    #[test]
    fn constant_field_has_zero_derivatives() {
        for s in schemes() {
            let b = derive(&Constant, &[0.3, -1.2], 3, &s).unwrap();
            assert_eq!(b.value, 5.0);
            assert!(b.d1.iter().all(|&v| v == 0.0));
            assert_eq!(b.d2.max_abs(), 0.0);
            assert_eq!(b.d3.max_abs(), 0.0);
        }
    }

    #[test]
    fn bilinear_field() {
        let b = derive(&Bilinear, &[2.0, 3.0], 2, &DiffScheme::jets()).unwrap();
        assert_eq!(b.d1, vec![3.0, 2.0]);
        assert_eq!(b.d2.as_slice(), &[0.0, 1.0, 1.0, 0.0]);
        let fd = derive(&Bilinear, &[2.0, 3.0], 2, &DiffScheme::finite_difference()).unwrap();
        assert!((fd.d1[0] - 3.0).abs() < 1e-9 && (fd.d1[1] - 2.0).abs() < 1e-9);
        assert!((fd.d2[[0, 1]] - 1.0).abs() < 1e-6);
        assert!(fd.d2[[0, 0]].abs() < 1e-6);
    }

    #[test]
    fn sine_matches_trig_derivatives() {
        let x = 0.7f64;
        let expected = [x.cos(), -x.sin(), -x.cos()];
        let jets = derive(&Sine, &[x], 3, &DiffScheme::jets()).unwrap();
        assert!((jets.d1[0] - expected[0]).abs() < 1e-15);
        assert!((jets.d2[[0, 0]] - expected[1]).abs() < 1e-15);
        assert!((jets.d3[[0, 0, 0]] - expected[2]).abs() < 1e-15);
        let fd = derive(&Sine, &[x], 3, &DiffScheme::finite_difference()).unwrap();
        assert!((fd.d1[0] - expected[0]).abs() < 1e-9);
        assert!((fd.d2[[0, 0]] - expected[1]).abs() < 1e-6);
        assert!((fd.d3[[0, 0, 0]] - expected[2]).abs() < 1e-3);
    }

    #[test]
    fn order_one_leaves_higher_blocks_zero() {
        let b = derive(&Sine, &[0.7], 1, &DiffScheme::jets()).unwrap();
        assert_eq!(b.d2.max_abs(), 0.0);
        assert_eq!(b.d3.max_abs(), 0.0);
    }

    #[test]
    fn non_finite_values_are_domain_errors() {
        for s in schemes() {
            let err = derive(&Singular, &[-1.0], 2, &s).unwrap_err();
            assert!(matches!(err, GeometryError::EvaluationDomain { .. }));
        }
    }

    #[test]
    fn rejects_bad_orders_and_steps() {
        assert!(matches!(
            derive(&Sine, &[0.1], 4, &DiffScheme::jets()),
            Err(GeometryError::UnsupportedOrder(4))
        ));
        let bad = DiffScheme::finite_difference().with_step(0.0);
        assert!(matches!(
            derive(&Sine, &[0.1], 1, &bad),
            Err(GeometryError::InvalidScheme(_))
        ));
    }

    #[test]
    fn to_jet_embeds_into_wider_chart() {
        let b = derive(&Bilinear, &[2.0, 3.0], 2, &DiffScheme::jets()).unwrap();
        let j = b.to_jet(4, 2);
        assert_eq!(j.nvars(), 4);
        assert_eq!(j.partial(&[0, 1]), 1.0);
        assert_eq!(j.partial(&[2]), 0.0);
        assert_eq!(j.partial(&[1]), 2.0);
    }
}
