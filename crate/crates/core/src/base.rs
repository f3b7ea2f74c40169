//! Geometry of the base manifold: metric, Levi-Civita Christoffels,
//! Riemann curvature and its covariant derivative.
//!
//! Curvature components follow `R(d_i, d_j) d_l = R_ijl^s d_s` with
//! `R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]`.

use crate::error::{GeometryError, Result};
use crate::jets::{derive_map, ChartMap, DiffScheme, Jet, Scalar};
use crate::linalg::invert_jets;
use crate::tensor::Tensor;

/// A Riemannian metric on a single chart.
pub trait MetricField: Sync {
    fn dim(&self) -> usize;
    /// Symmetric `n x n` component matrix `g_ij(x)`.
    fn components<S: Scalar>(&self, x: &[S]) -> Tensor<S>;
}

struct MetricEntries<'a, M: ?Sized>(&'a M);

impl<M: MetricField + ?Sized> ChartMap for MetricEntries<'_, M> {
    fn outputs(&self) -> usize {
        let n = self.0.dim();
        n * (n + 1) / 2
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let g = self.0.components(x);
        let n = self.0.dim();
        let mut out = Vec::with_capacity(self.outputs());
        for i in 0..n {
            for j in i..n {
                out.push(g[[i, j]].clone());
            }
        }
        out
    }
}

/// Metric components as jets of `order` over `nvars` chart variables, the
/// first `metric.dim()` of which are the base coordinates.
pub fn metric_jets<M: MetricField + ?Sized>(
    metric: &M,
    x: &[f64],
    nvars: usize,
    order: usize,
    scheme: &DiffScheme,
) -> Result<Tensor<Jet>> {
    let n = metric.dim();
    if x.len() != n {
        return Err(GeometryError::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let bundles = derive_map(&MetricEntries(metric), x, order, scheme)?;
    let mut g = Tensor::filled(&[n, n], Jet::constant(0.0));
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            let jet = bundles[k].to_jet(nvars, order);
            g[[j, i]] = jet.clone();
            g[[i, j]] = jet;
            k += 1;
        }
    }
    Ok(g)
}

/// Base geometry carried as jets, so every quantity can be differentiated
/// again along chart directions. With metric jets of order `K`,
/// Christoffels have order `K-1`, curvature `K-2` and `nabla R` `K-3`.
#[derive(Debug, Clone)]
pub struct GeometryJets {
    pub n: usize,
    pub g: Tensor<Jet>,
    pub ginv: Tensor<Jet>,
    /// `gamma[h][i][j] = Gamma^h_ij`
    pub gamma: Tensor<Jet>,
    /// `riemann[i][j][l][s] = R_ijl^s`, present when `K >= 2`
    pub riemann: Option<Tensor<Jet>>,
    /// `covd[m][i][j][l][s] = nabla_m R_ijl^s`, present when `K >= 3`
    pub covd: Option<Tensor<Jet>>,
}

impl GeometryJets {
    pub fn from_metric_jets(g: Tensor<Jet>, x: &[f64]) -> Result<Self> {
        let n = g.shape()[0];
        let order = g[[0, 0]].order();
        let ginv = invert_jets(&g, x)?;
        let gamma = christoffel_jets(&g, &ginv);
        let riemann = (order >= 2).then(|| riemann_jets(&gamma));
        let covd = match (&riemann, order >= 3) {
            (Some(r), true) => Some(covariant_riemann_jets(&gamma, r)),
            _ => None,
        };
        Ok(GeometryJets {
            n,
            g,
            ginv,
            gamma,
            riemann,
            covd,
        })
    }

    pub fn new<M: MetricField + ?Sized>(
        metric: &M,
        x: &[f64],
        nvars: usize,
        order: usize,
        scheme: &DiffScheme,
    ) -> Result<Self> {
        let g = metric_jets(metric, x, nvars, order, scheme)?;
        GeometryJets::from_metric_jets(g, x)
    }
}

fn christoffel_jets(g: &Tensor<Jet>, ginv: &Tensor<Jet>) -> Tensor<Jet> {
    let n = g.shape()[0];
    // lowered[s][i][j] = 1/2 (d_i g_sj + d_j g_si - d_s g_ij)
    let dg: Vec<Tensor<Jet>> = (0..n).map(|k| g.map(|e| e.derivative(k))).collect();
    let lowered = Tensor::from_fn(&[n, n, n], |idx| {
        let (s, i, j) = (idx[0], idx[1], idx[2]);
        (&(&dg[i][[s, j]] + &dg[j][[s, i]]) - &dg[s][[i, j]]) * 0.5
    });
    Tensor::from_fn(&[n, n, n], |idx| {
        let (h, i, j) = (idx[0], idx[1], idx[2]);
        let mut acc = Jet::constant(0.0);
        for s in 0..n {
            acc += &ginv[[h, s]] * &lowered[[s, i, j]];
        }
        acc
    })
}

fn riemann_jets(gamma: &Tensor<Jet>) -> Tensor<Jet> {
    let n = gamma.shape()[0];
    let dgamma: Vec<Tensor<Jet>> = (0..n).map(|k| gamma.map(|e| e.derivative(k))).collect();
    Tensor::from_fn(&[n, n, n, n], |idx| {
        let (i, j, l, s) = (idx[0], idx[1], idx[2], idx[3]);
        let mut acc = &dgamma[i][[s, j, l]] - &dgamma[j][[s, i, l]];
        for h in 0..n {
            acc += &gamma[[s, i, h]] * &gamma[[h, j, l]];
            acc -= &gamma[[s, j, h]] * &gamma[[h, i, l]];
        }
        acc
    })
}

fn covariant_riemann_jets(gamma: &Tensor<Jet>, r: &Tensor<Jet>) -> Tensor<Jet> {
    let n = gamma.shape()[0];
    let dr: Vec<Tensor<Jet>> = (0..n).map(|k| r.map(|e| e.derivative(k))).collect();
    Tensor::from_fn(&[n, n, n, n, n], |idx| {
        let (m, i, j, l, s) = (idx[0], idx[1], idx[2], idx[3], idx[4]);
        let mut acc = dr[m][[i, j, l, s]].clone();
        for h in 0..n {
            acc -= &gamma[[h, m, i]] * &r[[h, j, l, s]];
            acc -= &gamma[[h, m, j]] * &r[[i, h, l, s]];
            acc -= &gamma[[h, m, l]] * &r[[i, j, h, s]];
            acc += &gamma[[s, m, h]] * &r[[i, j, l, h]];
        }
        acc
    })
}

fn values(t: &Tensor<Jet>) -> Tensor<f64> {
    t.map(Jet::value)
}

/// Christoffel symbols at a point, `gamma[h][i][j] = Gamma^h_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffels {
    pub gamma: Tensor<f64>,
}

/// Riemann curvature data at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureComponents {
    /// `r[i][j][l][s] = R_ijl^s`
    pub r: Tensor<f64>,
    /// `raised[k][j][i][s] = g^kt g^im R_tjm^s`
    pub raised: Tensor<f64>,
    /// `covd[m][i][j][l][s] = nabla_m R_ijl^s`
    pub covd: Tensor<f64>,
}

pub fn christoffel<M: MetricField + ?Sized>(
    metric: &M,
    x: &[f64],
    scheme: &DiffScheme,
) -> Result<Christoffels> {
    let geo = GeometryJets::new(metric, x, metric.dim(), 1, scheme)?;
    Ok(Christoffels {
        gamma: values(&geo.gamma),
    })
}

pub fn curvature<M: MetricField + ?Sized>(
    metric: &M,
    x: &[f64],
    scheme: &DiffScheme,
) -> Result<CurvatureComponents> {
    let geo = GeometryJets::new(metric, x, metric.dim(), 3, scheme)?;
    let r = values(geo.riemann.as_ref().expect("order 3 carries curvature"));
    let ginv = values(&geo.ginv);
    Ok(CurvatureComponents {
        raised: raise_curvature(&ginv, &r),
        covd: values(geo.covd.as_ref().expect("order 3 carries nabla R")),
        r,
    })
}

/// `raised[k][j][i][s] = g^kt g^im R_tjm^s`
pub fn raise_curvature(ginv: &Tensor<f64>, r: &Tensor<f64>) -> Tensor<f64> {
    let n = ginv.shape()[0];
    // first contract m, then t
    let half = Tensor::from_fn(&[n, n, n, n], |idx| {
        let (t, j, i, s) = (idx[0], idx[1], idx[2], idx[3]);
        (0..n).map(|m| ginv[[i, m]] * r[[t, j, m, s]]).sum::<f64>()
    });
    Tensor::from_fn(&[n, n, n, n], |idx| {
        let (k, j, i, s) = (idx[0], idx[1], idx[2], idx[3]);
        (0..n).map(|t| ginv[[k, t]] * half[[t, j, i, s]]).sum::<f64>()
    })
}

/// Inverse of [`raise_curvature`]: `R_tjm^s = g_tk g_mi raised[k][j][i][s]`.
pub fn lower_curvature(g: &Tensor<f64>, raised: &Tensor<f64>) -> Tensor<f64> {
    let n = g.shape()[0];
    let half = Tensor::from_fn(&[n, n, n, n], |idx| {
        let (k, j, m, s) = (idx[0], idx[1], idx[2], idx[3]);
        (0..n).map(|i| g[[m, i]] * raised[[k, j, i, s]]).sum::<f64>()
    });
    Tensor::from_fn(&[n, n, n, n], |idx| {
        let (t, j, m, s) = (idx[0], idx[1], idx[2], idx[3]);
        (0..n).map(|k| g[[t, k]] * half[[k, j, m, s]]).sum::<f64>()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    struct Euclid(usize);
    impl MetricField for Euclid {
        fn dim(&self) -> usize {
            self.0
        }
        fn components<S: Scalar>(&self, _x: &[S]) -> Tensor<S> {
            Tensor::from_fn(&[self.0, self.0], |i| S::from_f64(if i[0] == i[1] { 1.0 } else { 0.0 }))
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

    struct HalfPlane;
    impl MetricField for HalfPlane {
        fn dim(&self) -> usize {
            2
        }
        fn components<S: Scalar>(&self, x: &[S]) -> Tensor<S> {
            let w = (x[1].clone() * x[1].clone()).recip();
            Tensor::from_fn(&[2, 2], |i| if i[0] == i[1] { w.clone() } else { S::from_f64(0.0) })
        }
    }

    struct Degenerate;
    impl MetricField for Degenerate {
        fn dim(&self) -> usize {
            2
        }
        fn components<S: Scalar>(&self, x: &[S]) -> Tensor<S> {
            Tensor::from_fn(&[2, 2], |_| x[0].clone())
        }
    }

    fn jets() -> DiffScheme {
        DiffScheme::jets()
    }

    #[test]
    fn euclidean_christoffels_and_curvature_vanish() {
        let c = christoffel(&Euclid(3), &[0.1, 0.2, 0.3], &jets()).unwrap();
        assert_eq!(c.gamma.max_abs(), 0.0);
        let r = curvature(&Euclid(3), &[0.1, 0.2, 0.3], &jets()).unwrap();
        assert_eq!(r.r.max_abs(), 0.0);
        assert_eq!(r.raised.max_abs(), 0.0);
        assert_eq!(r.covd.max_abs(), 0.0);
    }

    #[test]
    fn sphere_christoffels_by_hand() {
        let t = PI / 3.0;
        let c = christoffel(&Sphere, &[t, 0.0], &jets()).unwrap().gamma;
        // Gamma^theta_phiphi = -sin cos, Gamma^phi_thetaphi = cot
        assert!((c[[0, 1, 1]] + t.sin() * t.cos()).abs() < 1e-15);
        assert!((c[[1, 0, 1]] - t.cos() / t.sin()).abs() < 1e-15);
        assert!((c[[1, 1, 0]] - t.cos() / t.sin()).abs() < 1e-15);
        assert_eq!(c[[0, 0, 0]], 0.0);
    }

    #[test]
    fn half_plane_christoffel_by_hand() {
        let c = christoffel(&HalfPlane, &[0.0, 2.0], &jets()).unwrap().gamma;
        // g = y^-2 delta: Gamma^x_xy = -1/y
        assert!((c[[0, 0, 1]] + 0.5).abs() < 1e-15);
        assert!((c[[1, 0, 0]] - 0.5).abs() < 1e-15);
        assert!((c[[1, 1, 1]] + 0.5).abs() < 1e-15);
    }

    fn constant_curvature_defect(r: &Tensor<f64>, g: &Tensor<f64>, k: f64) -> f64 {
        let n = g.shape()[0];
        let expected = Tensor::from_fn(&[n, n, n, n], |idx| {
            let (i, j, l, s) = (idx[0], idx[1], idx[2], idx[3]);
            let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            k * (d(s, i) * g[[j, l]] - d(s, j) * g[[i, l]])
        });
        r.max_abs_diff(&expected)
    }

    #[test]
    fn constant_curvature_oracles() {
        for &(t, phi) in &[(0.4, 0.1), (1.2, 2.0), (2.5, -1.0)] {
            let curv = curvature(&Sphere, &[t, phi], &jets()).unwrap();
            let g = Sphere.components(&[t, phi]);
            assert!(constant_curvature_defect(&curv.r, &g, 1.0) < 1e-12);
            // K = R_{12 2}^s g_s1 / det g
            let det = g[[0, 0]] * g[[1, 1]];
            let k = (0..2).map(|s| curv.r[[0, 1, 1, s]] * g[[s, 0]]).sum::<f64>() / det;
            assert!((k - 1.0).abs() < 1e-12);
        }
        for &(x, y) in &[(0.0, 0.7), (0.3, 1.9)] {
            let curv = curvature(&HalfPlane, &[x, y], &jets()).unwrap();
            let g = HalfPlane.components(&[x, y]);
            assert!(constant_curvature_defect(&curv.r, &g, -1.0) < 1e-10);
        }
    }

    #[test]
    fn raise_lower_roundtrip() {
        let x = [1.1, 0.3];
        let curv = curvature(&Sphere, &x, &jets()).unwrap();
        let g = Sphere.components(&x);
        let back = lower_curvature(&g, &curv.raised);
        assert!(back.max_abs_diff(&curv.r) < 1e-12);
    }

    #[test]
    fn identity_metric_raise_is_identity() {
        let r = Tensor::from_fn(&[2, 2, 2, 2], |i| (i[0] + 2 * i[1] + 3 * i[2] + 5 * i[3]) as f64);
        let eye = Tensor::from_fn(&[2, 2], |i| if i[0] == i[1] { 1.0 } else { 0.0 });
        assert_eq!(raise_curvature(&eye, &r), r);
    }

    #[test]
    fn degenerate_metric_is_reported() {
        assert!(matches!(
            christoffel(&Degenerate, &[0.5, 0.5], &jets()),
            Err(GeometryError::DegenerateMetric { .. })
        ));
    }
}
