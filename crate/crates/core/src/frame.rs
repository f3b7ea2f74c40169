//! Points of the cotangent bundle, lifts, and the adapted frame
//! `{E_j, E_jbar}`.
//!
//! Frame indices run over `0..2n`: index `a < n` is the horizontal field
//! `E_a`, index `n + a` is the vertical field `E_abar = d/dp_a`.

use serde::{Deserialize, Serialize};

use crate::base::{Christoffels, MetricField};
use crate::error::{GeometryError, Result};
use crate::linalg::invert;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CotangentPoint {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl CotangentPoint {
    pub fn new(x: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if x.len() != p.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: x.len(),
                got: p.len(),
            });
        }
        if !x.iter().chain(&p).all(|v| v.is_finite()) {
            return Err(GeometryError::EvaluationDomain { point: x });
        }
        Ok(CotangentPoint { x, p })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Bundle chart coordinates `(x^1..x^n, p_1..p_n)`.
    pub fn coords(&self) -> Vec<f64> {
        self.x.iter().chain(&self.p).copied().collect()
    }

    pub fn p_norm(&self) -> f64 {
        self.p.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// A tangent vector of `T*M` in the adapted frame: horizontal block is
/// contravariant, vertical block covariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleVector {
    pub h: Vec<f64>,
    pub v: Vec<f64>,
}

impl BundleVector {
    pub fn zero(n: usize) -> Self {
        BundleVector {
            h: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn from_components(c: &[f64]) -> Self {
        let n = c.len() / 2;
        BundleVector {
            h: c[..n].to_vec(),
            v: c[n..].to_vec(),
        }
    }

    pub fn components(&self) -> Vec<f64> {
        self.h.iter().chain(&self.v).copied().collect()
    }

    pub fn basis(n: usize, a: usize) -> Self {
        let mut c = vec![0.0; 2 * n];
        c[a] = 1.0;
        BundleVector::from_components(&c)
    }

    pub fn max_abs(&self) -> f64 {
        self.h.iter().chain(&self.v).fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alpha {
    pub r2: f64,
    pub alpha: f64,
}

impl Alpha {
    pub fn from_inverse_metric(ginv: &Tensor<f64>, p: &[f64]) -> Self {
        let n = p.len();
        let mut r2 = 0.0;
        for i in 0..n {
            for j in 0..n {
                r2 += ginv[[i, j]] * p[i] * p[j];
            }
        }
        Alpha { r2, alpha: 1.0 + r2 }
    }
}

pub fn alpha_at<M: MetricField + ?Sized>(metric: &M, pt: &CotangentPoint) -> Result<Alpha> {
    let g = metric.components(&pt.x);
    let ginv = invert(&g, 1e12).map_err(|_| GeometryError::DegenerateMetric {
        point: pt.x.clone(),
        pivot: 0.0,
    })?;
    Ok(Alpha::from_inverse_metric(&ginv, &pt.p))
}

/// `^V omega = omega_i E_ibar`
pub fn vertical_lift(omega: &[f64]) -> BundleVector {
    BundleVector {
        h: vec![0.0; omega.len()],
        v: omega.to_vec(),
    }
}

/// The Liouville field `p_i E_ibar`.
pub fn liouville(pt: &CotangentPoint) -> BundleVector {
    vertical_lift(&pt.p)
}

/// `^H X` in both frames. In the natural frame `{d_i, d/dp_i}` the
/// vertical part is `p_h Gamma^h_ij X^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalLift {
    pub adapted: BundleVector,
    pub natural: BundleVector,
}

pub fn horizontal_lift(x: &[f64], pt: &CotangentPoint, gamma: &Christoffels) -> HorizontalLift {
    let n = x.len();
    let natural_v = (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for h in 0..n {
                for j in 0..n {
                    acc += pt.p[h] * gamma.gamma[[h, i, j]] * x[j];
                }
            }
            acc
        })
        .collect();
    HorizontalLift {
        adapted: BundleVector {
            h: x.to_vec(),
            v: vec![0.0; n],
        },
        natural: BundleVector {
            h: x.to_vec(),
            v: natural_v,
        },
    }
}

/// Adapted components of a vector given in the natural frame.
pub fn natural_to_adapted(nat: &BundleVector, pt: &CotangentPoint, gamma: &Tensor<f64>) -> BundleVector {
    let n = nat.h.len();
    let v = (0..n)
        .map(|i| {
            let mut acc = nat.v[i];
            for a in 0..n {
                for j in 0..n {
                    acc -= pt.p[a] * gamma[[a, i, j]] * nat.h[j];
                }
            }
            acc
        })
        .collect();
    BundleVector { h: nat.h.clone(), v }
}

/// Sign used for the mixed bracket `[E_i, E_jbar]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BracketReading {
    /// `[E_i, E_jbar] = -Gamma^j_il E_lbar`, the sign the natural-frame
    /// computation produces.
    Validated,
    /// `[E_i, E_jbar] = +Gamma^j_il E_lbar`.
    Printed,
}

/// All adapted-frame brackets, `c[e][a][b]` = coefficient of `E_e` in
/// `[E_a, E_b]`. `r` is `R_ijl^s`, `gamma` is `Gamma^h_ij`.
pub fn bracket_table(gamma: &Tensor<f64>, r: &Tensor<f64>, p: &[f64], reading: BracketReading) -> Tensor<f64> {
    let n = p.len();
    let sign = match reading {
        BracketReading::Validated => -1.0,
        BracketReading::Printed => 1.0,
    };
    let mut c = Tensor::zeros(&[2 * n, 2 * n, 2 * n]);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                c[[n + l, i, j]] = (0..n).map(|s| p[s] * r[[i, j, l, s]]).sum();
                c[[n + l, i, n + j]] = sign * gamma[[j, i, l]];
                c[[n + l, n + j, i]] = -sign * gamma[[j, i, l]];
            }
        }
    }
    c
}

pub fn frame_bracket(
    gamma: &Tensor<f64>,
    r: &Tensor<f64>,
    p: &[f64],
    a: usize,
    b: usize,
    reading: BracketReading,
) -> BundleVector {
    let c = bracket_table(gamma, r, p, reading);
    let n = p.len();
    BundleVector::from_components(&(0..2 * n).map(|e| c[[e, a, b]]).collect::<Vec<_>>())
}
