//! The rescaled Cheeger-Gromoll metric in the adapted frame.

use serde::{Deserialize, Serialize};

use crate::base::MetricField;
use crate::error::{GeometryError, Result};
use crate::frame::{Alpha, CotangentPoint};
use crate::linalg::{invert, is_positive_definite};
use crate::norden::FrameEndomorphism;
use crate::tensor::Tensor;

/// A positive scaling function `f` on the base.
pub use crate::jets::ScalarField as ScalingField;

/// Largest condition number accepted when inverting the bundle metric.
pub const MAX_CONDITION: f64 = 1e12;

/// Blockwise bundle metric: `h = f g_ij`, `v = (1/alpha)(g^ij + p^i p^j)`;
/// the mixed blocks vanish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMetricValue {
    pub h: Tensor<f64>,
    pub v: Tensor<f64>,
    pub alpha: Alpha,
}

impl BundleMetricValue {
    pub fn dim(&self) -> usize {
        self.h.shape()[0]
    }

    pub fn dense(&self) -> Tensor<f64> {
        let n = self.dim();
        Tensor::from_fn(&[2 * n, 2 * n], |idx| {
            let (a, b) = (idx[0], idx[1]);
            match (a < n, b < n) {
                (true, true) => self.h[[a, b]],
                (false, false) => self.v[[a - n, b - n]],
                _ => 0.0,
            }
        })
    }

    /// `G(u, w)` for adapted-frame component vectors.
    pub fn apply(&self, u: &[f64], w: &[f64]) -> f64 {
        let d = self.dense();
        let m = u.len();
        let mut acc = 0.0;
        for a in 0..m {
            for b in 0..m {
                acc += u[a] * d[[a, b]] * w[b];
            }
        }
        acc
    }
}

/// Builds the blocks from base values.
pub fn cg_blocks(g: &Tensor<f64>, ginv: &Tensor<f64>, f: f64, p: &[f64]) -> BundleMetricValue {
    let n = p.len();
    let alpha = Alpha::from_inverse_metric(ginv, p);
    let p_up: Vec<f64> = (0..n).map(|i| (0..n).map(|t| ginv[[i, t]] * p[t]).sum()).collect();
    BundleMetricValue {
        h: g.map(|v| f * v),
        v: Tensor::from_fn(&[n, n], |i| (ginv[[i[0], i[1]]] + p_up[i[0]] * p_up[i[1]]) / alpha.alpha),
        alpha,
    }
}

pub fn cg_metric_at<M, F>(metric: &M, scaling: &F, pt: &CotangentPoint) -> Result<BundleMetricValue>
where
    M: MetricField + ?Sized,
    F: ScalingField + ?Sized,
{
    let g = metric.components(&pt.x);
    if !is_positive_definite(&g) {
        return Err(GeometryError::DegenerateMetric {
            point: pt.x.clone(),
            pivot: 0.0,
        });
    }
    let f = scaling.eval(&pt.x);
    if !(f > 0.0) {
        return Err(GeometryError::NonPositiveScaling {
            point: pt.x.clone(),
            value: f,
        });
    }
    let ginv = invert(&g, MAX_CONDITION)?;
    Ok(cg_blocks(&g, &ginv, f, &pt.p))
}

/// Dense inverse of the bundle metric, built blockwise.
pub fn cg_inverse_at(metric: &BundleMetricValue) -> Result<Tensor<f64>> {
    let n = metric.dim();
    let hi = invert(&metric.h, MAX_CONDITION)?;
    let vi = invert(&metric.v, MAX_CONDITION)?;
    let dense = Tensor::from_fn(&[2 * n, 2 * n], |idx| {
        let (a, b) = (idx[0], idx[1]);
        match (a < n, b < n) {
            (true, true) => hi[[a, b]],
            (false, false) => vi[[a - n, b - n]],
            _ => 0.0,
        }
    });
    // the blocks can be individually fine while their scales differ wildly
    let condition = crate::linalg::condition_number(&metric.dense());
    if !(condition <= MAX_CONDITION) {
        return Err(GeometryError::IllConditioned { condition });
    }
    Ok(dense)
}

/// `max |G(Ja, b) - G(a, Jb)|` over frame basis pairs.
pub fn purity_check(metric: &BundleMetricValue, j: &FrameEndomorphism) -> f64 {
    let g = metric.dense();
    let m = &j.m;
    let d = g.shape()[0];
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            // J E_a = m[e][a] E_e
            let lhs: f64 = (0..d).map(|e| m[[e, a]] * g[[e, b]]).sum();
            let rhs: f64 = (0..d).map(|e| m[[e, b]] * g[[a, e]]).sum();
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Scalar;
    use crate::linalg::{identity, matmul};

    struct Euclid;
    impl MetricField for Euclid {
        fn dim(&self) -> usize {
            2
        }
        fn components<S: Scalar>(&self, _x: &[S]) -> Tensor<S> {
            Tensor::from_fn(&[2, 2], |i| S::from_f64(if i[0] == i[1] { 1.0 } else { 0.0 }))
        }
    }

    struct Const(f64);
    impl ScalingField for Const {
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            x[0].clone() * 0.0 + self.0
        }
    }

    struct Sphere;
    impl MetricField for Sphere {
        fn dim(&self) -> usize {
            2
        }
        fn components<S: Scalar>(&self, x: &[S]) -> Tensor<S> {
            let s = x[0].sin();
            Tensor::from_fn(&[2, 2], |i| match (i[0], i[1]) {
                (0, 0) => S::from_f64(1.0),
                (1, 1) => s.clone() * s.clone(),
                _ => S::from_f64(0.0),
            })
        }
    }

    struct ThetaSquared;
    impl ScalingField for ThetaSquared {
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            x[0].clone() * x[0].clone() + 1.0
        }
    }

    fn pt(x: [f64; 2], p: [f64; 2]) -> CotangentPoint {
        CotangentPoint::new(x.to_vec(), p.to_vec()).unwrap()
    }

    #[test]
    fn euclidean_examples() {
        let g = cg_metric_at(&Euclid, &Const(1.0), &pt([0.0, 0.0], [0.0, 0.0])).unwrap();
        assert_eq!(g.dense(), identity(4));
        let g = cg_metric_at(&Euclid, &Const(2.0), &pt([0.0, 0.0], [1.0, 0.0])).unwrap();
        assert_eq!(g.h, identity(2).map(|v| 2.0 * v));
        assert_eq!(g.alpha.alpha, 2.0);
        assert_eq!(g.v.as_slice(), &[1.0, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn sphere_matches_defining_equations_on_lifts() {
        let point = pt([0.9, 1.3], [0.4, -0.7]);
        let g = cg_metric_at(&Sphere, &ThetaSquared, &point).unwrap();
        let s2 = 0.9f64.sin().powi(2);
        let ginv = |w: [f64; 2], t: [f64; 2]| w[0] * t[0] + w[1] * t[1] / s2;
        let alpha = 1.0 + ginv(point.p.clone().try_into().unwrap(), point.p.clone().try_into().unwrap());
        let pv = [0.4, -0.7];
        let f = 1.0 + 0.81;
        for a in 0..2 {
            for b in 0..2 {
                let mut w = [0.0; 2];
                let mut t = [0.0; 2];
                w[a] = 1.0;
                t[b] = 1.0;
                let vv = (ginv(w, t) + ginv(w, pv) * ginv(t, pv)) / alpha;
                assert!((g.v[[a, b]] - vv).abs() < 1e-14);
                let hh = f * if a == b { if a == 0 { 1.0 } else { s2 } } else { 0.0 };
                assert!((g.h[[a, b]] - hh).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let g = cg_metric_at(&Sphere, &ThetaSquared, &pt([0.5, 0.1], [1.0, 0.3])).unwrap();
        let inv = cg_inverse_at(&g).unwrap();
        assert!(matmul(&g.dense(), &inv).max_abs_diff(&identity(4)) < 1e-10);
        let diag = cg_metric_at(&Euclid, &Const(4.0), &pt([0.0, 0.0], [0.0, 0.0])).unwrap();
        assert_eq!(cg_inverse_at(&diag).unwrap()[[0, 0]], 0.25);
    }

    #[test]
    fn scaling_only_touches_horizontal_block() {
        let p = pt([0.7, 0.0], [0.2, 0.5]);
        let one = cg_metric_at(&Sphere, &Const(1.0), &p).unwrap();
        let two = cg_metric_at(&Sphere, &Const(2.0), &p).unwrap();
        assert_eq!(two.h, one.h.map(|v| 2.0 * v));
        assert_eq!(two.v, one.v);
    }

    #[test]
    fn rejects_bad_scaling() {
        assert!(matches!(
            cg_metric_at(&Euclid, &Const(-1.0), &pt([0.0, 0.0], [0.0, 0.0])),
            Err(GeometryError::NonPositiveScaling { .. })
        ));
    }

    #[test]
    fn purity_of_structures_and_negative_control() {
        let g = cg_metric_at(&Sphere, &ThetaSquared, &pt([0.5, 0.1], [1.0, 0.3])).unwrap();
        assert_eq!(purity_check(&g, &FrameEndomorphism::paracomplex(2)), 0.0);
        assert_eq!(purity_check(&g, &FrameEndomorphism::diagonal_lift(2)), 0.0);
        let mut bad = FrameEndomorphism::paracomplex(2);
        bad.m[[0, 2]] = 1.0;
        assert!(purity_check(&g, &bad) > 0.0);
    }
}
