//! Catalog of base manifolds and scaling functions, and sampling of bundle
//! points inside each chart.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::base::MetricField;
use crate::error::{GeometryError, Result};
use crate::frame::CotangentPoint;
use crate::jets::{Scalar, ScalarField};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown manifold `{0}` (expected flat, sphere, hyperbolic or polynomial, optionally with :DIM)")]
    UnknownManifold(String),
    #[error("unknown scaling `{0}` (expected one, exp or poly)")]
    UnknownScaling(String),
    #[error("{name} does not support dimension {dim}")]
    BadDimension { name: &'static str, dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifoldKind {
    Flat,
    Sphere,
    Hyperbolic,
    Polynomial,
}

impl ManifoldKind {
    pub fn name(self) -> &'static str {
        match self {
            ManifoldKind::Flat => "flat",
            ManifoldKind::Sphere => "sphere",
            ManifoldKind::Hyperbolic => "hyperbolic",
            ManifoldKind::Polynomial => "polynomial",
        }
    }

    fn dims(self) -> std::ops::RangeInclusive<usize> {
        match self {
            ManifoldKind::Flat | ManifoldKind::Polynomial => 2..=4,
            ManifoldKind::Sphere | ManifoldKind::Hyperbolic => 2..=2,
        }
    }
}

/// A catalog base manifold on a single chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub kind: ManifoldKind,
    pub dim: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ManifoldSpec {
    pub fn new(kind: ManifoldKind, dim: usize) -> std::result::Result<Self, CatalogError> {
        if !kind.dims().contains(&dim) {
            return Err(CatalogError::BadDimension { name: kind.name(), dim });
        }
        let (lo, hi) = match kind {
            ManifoldKind::Flat | ManifoldKind::Polynomial => (vec![-1.0; dim], vec![1.0; dim]),
            ManifoldKind::Sphere => (vec![0.2, 0.0], vec![PI - 0.2, 2.0 * PI]),
            ManifoldKind::Hyperbolic => (vec![-1.0, 0.5], vec![1.0, 2.0]),
        };
        Ok(ManifoldSpec { kind, dim, lo, hi })
    }

    /// The four catalog entries in two dimensions.
    pub fn catalog() -> Vec<ManifoldSpec> {
        [
            ManifoldKind::Flat,
            ManifoldKind::Sphere,
            ManifoldKind::Hyperbolic,
            ManifoldKind::Polynomial,
        ]
        .into_iter()
        .map(|k| ManifoldSpec::new(k, 2).expect("dimension 2 is always valid"))
        .collect()
    }

    /// True when the base metric is flat.
    pub fn is_flat(&self) -> bool {
        self.kind == ManifoldKind::Flat
    }

    /// Constant sectional curvature, when there is one.
    pub fn constant_curvature(&self) -> Option<f64> {
        match self.kind {
            ManifoldKind::Flat => Some(0.0),
            ManifoldKind::Sphere => Some(1.0),
            ManifoldKind::Hyperbolic => Some(-1.0),
            ManifoldKind::Polynomial => None,
        }
    }
}

impl fmt::Display for ManifoldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind.dims().count() > 1 {
            write!(f, "{}:{}", self.kind.name(), self.dim)
        } else {
            f.write_str(self.kind.name())
        }
    }
}

impl FromStr for ManifoldSpec {
    type Err = CatalogError;

    /// `name` or `name:dim`; the dimension defaults to 2.
    fn from_str(s: &str) -> std::result::Result<Self, CatalogError> {
        let unknown = || CatalogError::UnknownManifold(s.to_string());
        let (name, dim) = match s.split_once(':') {
            Some((name, dim)) => (name, dim.parse().map_err(|_| unknown())?),
            None => (s, 2),
        };
        let kind = match name {
            "flat" => ManifoldKind::Flat,
            "sphere" => ManifoldKind::Sphere,
            "hyperbolic" => ManifoldKind::Hyperbolic,
            "polynomial" => ManifoldKind::Polynomial,
            _ => return Err(unknown()),
        };
        ManifoldSpec::new(kind, dim)
    }
}

impl MetricField for ManifoldSpec {
    fn dim(&self) -> usize {
        self.dim
    }

    fn components<S: Scalar>(&self, x: &[S]) -> Tensor<S> {
        let n = self.dim;
        let zero = || x[0].clone() * 0.0;
        match self.kind {
            ManifoldKind::Flat => Tensor::from_fn(&[n, n], |i| if i[0] == i[1] { zero() + 1.0 } else { zero() }),
            ManifoldKind::Sphere => {
                let s = x[0].sin();
                let ss = s.clone() * s;
                Tensor::from_fn(&[2, 2], |i| match (i[0], i[1]) {
                    (0, 0) => zero() + 1.0,
                    (1, 1) => ss.clone(),
                    _ => zero(),
                })
            }
            ManifoldKind::Hyperbolic => {
                let w = x[1].powi(2).recip();
                Tensor::from_fn(&[2, 2], |i| if i[0] == i[1] { w.clone() } else { zero() })
            }
            ManifoldKind::Polynomial => {
                // I + 0.15 v v^T + 0.1 diag(x_{i+1}^2) is positive-definite everywhere
                let v: Vec<S> = (0..n).map(|i| x[i].clone() + x[(i + 1) % n].clone() * 0.5).collect();
                Tensor::from_fn(&[n, n], |ij| {
                    let (i, j) = (ij[0], ij[1]);
                    let mut e = v[i].clone() * v[j].clone() * 0.15;
                    if i == j {
                        e = e + x[(i + 1) % n].powi(2) * 0.1 + 1.0;
                    }
                    e
                })
            }
        }
    }
}

/// Catalog scaling functions `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    /// `f = 1`
    One,
    /// `f = exp(x^1 / 2)`
    Exp,
    /// `f = 1 + (x^1)^2`
    Poly,
}

impl Scaling {
    pub const ALL: [Scaling; 3] = [Scaling::One, Scaling::Exp, Scaling::Poly];

    pub fn name(self) -> &'static str {
        match self {
            Scaling::One => "one",
            Scaling::Exp => "exp",
            Scaling::Poly => "poly",
        }
    }
}

impl fmt::Display for Scaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scaling {
    type Err = CatalogError;

    fn from_str(s: &str) -> std::result::Result<Self, CatalogError> {
        match s {
            "one" => Ok(Scaling::One),
            "exp" => Ok(Scaling::Exp),
            "poly" => Ok(Scaling::Poly),
            _ => Err(CatalogError::UnknownScaling(s.to_string())),
        }
    }
}

impl ScalarField for Scaling {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        match self {
            Scaling::One => x[0].clone() * 0.0 + 1.0,
            Scaling::Exp => (x[0].clone() * 0.5).exp(),
            Scaling::Poly => x[0].powi(2) + 1.0,
        }
    }
}

pub const DEFAULT_P_RADIUS: f64 = 1.5;

/// `count` random bundle points followed by two forced ones: `p = 0` and an
/// axis-aligned `p`. Base points are uniform in the chart box and covectors
/// uniform in the coordinate ball of radius `p_radius`.
pub fn sample_points(spec: &ManifoldSpec, count: usize, seed: u64, p_radius: f64) -> Result<Vec<CotangentPoint>> {
    let n = spec.dim;
    if spec.lo.iter().zip(&spec.hi).any(|(lo, hi)| !(lo < hi)) {
        return Err(GeometryError::EmptyChartBox(spec.to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n)
            .map(|i| spec.lo[i] + (spec.hi[i] - spec.lo[i]) * rng.gen::<f64>())
            .collect()
    };
    let mut out = Vec::with_capacity(count + 2);
    for _ in 0..count {
        let x = base(&mut rng);
        let p = loop {
            let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-p_radius..p_radius)).collect();
            if p.iter().map(|v| v * v).sum::<f64>() <= p_radius * p_radius {
                break p;
            }
        };
        out.push(CotangentPoint::new(x, p)?);
    }
    out.push(CotangentPoint::new(base(&mut rng), vec![0.0; n])?);
    let mut axis = vec![0.0; n];
    axis[0] = p_radius.min(1.0);
    out.push(CotangentPoint::new(base(&mut rng), axis)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_positive_definite;

    #[test]
    fn parsing_and_names() {
        let s: ManifoldSpec = "flat:3".parse().unwrap();
        assert_eq!((s.kind, s.dim), (ManifoldKind::Flat, 3));
        assert_eq!(s.to_string(), "flat:3");
        assert_eq!("sphere".parse::<ManifoldSpec>().unwrap().to_string(), "sphere");
        assert!(matches!("sphere:3".parse::<ManifoldSpec>(), Err(CatalogError::BadDimension { .. })));
        assert!(matches!("torus".parse::<ManifoldSpec>(), Err(CatalogError::UnknownManifold(_))));
        assert!(matches!("flat:x".parse::<ManifoldSpec>(), Err(CatalogError::UnknownManifold(_))));
        assert_eq!("exp".parse::<Scaling>().unwrap(), Scaling::Exp);
        assert!("cosh".parse::<Scaling>().is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_in_domain() {
        let sphere: ManifoldSpec = "sphere".parse().unwrap();
        let a = sample_points(&sphere, 20, 42, 1.5).unwrap();
        let b = sample_points(&sphere, 20, 42, 1.5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 22);
        assert!(a.iter().all(|p| p.x[0] >= 0.2 && p.x[0] <= PI - 0.2));
        assert!(a.iter().all(|p| p.p_norm() <= 1.5));
        assert_ne!(a, sample_points(&sphere, 20, 43, 1.5).unwrap());

        let one = sample_points(&sphere, 1, 7, 1.5).unwrap();
        assert_eq!(one.len(), 3);
        assert!(one.iter().any(|p| p.p.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn empty_box_is_an_error() {
        let mut s: ManifoldSpec = "flat".parse().unwrap();
        s.hi[1] = s.lo[1];
        assert!(matches!(sample_points(&s, 3, 1, 1.0), Err(GeometryError::EmptyChartBox(_))));
    }

    #[test]
    fn catalog_metrics_are_positive_definite() {
        for name in ["flat:4", "sphere", "hyperbolic", "polynomial:2", "polynomial:3", "polynomial:4"] {
            let spec: ManifoldSpec = name.parse().unwrap();
            for pt in sample_points(&spec, 30, 3, 1.5).unwrap() {
                assert!(is_positive_definite(&spec.components(&pt.x)), "{name} {:?}", pt.x);
            }
        }
    }

    #[test]
    fn scalings_are_positive() {
        for s in Scaling::ALL {
            assert!(s.eval(&[-1.0, 0.0]) > 0.0);
        }
        assert_eq!(Scaling::Poly.eval(&[2.0]), 5.0);
    }
}
