//! Levi-Civita connection of the rescaled Cheeger-Gromoll metric: the
//! closed form, the Koszul construction from first principles, and the
//! invariant form on lifts.

use serde::{Deserialize, Serialize};

use crate::base::MetricField;
use crate::chart::{BaseData, BundleJets};
use crate::error::{GeometryError, Result};
use crate::frame::{BundleVector, CotangentPoint};
use crate::jets::{DiffScheme, Jet, ScalarField};
use crate::linalg::{condition_number, invert_jets};
use crate::metric::{cg_blocks, MAX_CONDITION};
use crate::tensor::Tensor;

/// `a[h][j][i] = A^h_ji`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ATensor {
    pub a: Tensor<f64>,
}

pub fn a_tensor<M, F>(metric: &M, scaling: &F, x: &[f64], scheme: &DiffScheme) -> Result<ATensor>
where
    M: MetricField + ?Sized,
    F: ScalarField + ?Sized,
{
    let pt = CotangentPoint::new(x.to_vec(), vec![0.0; x.len()])?;
    let bj = BundleJets::new(metric, scaling, &pt, scheme)?;
    Ok(ATensor {
        a: bj.a_tensor().map(Jet::value),
    })
}

/// `gamma[a][c][b]` is the coefficient of `E_a` in `nabla_{E_c} E_b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionTable {
    pub gamma: Tensor<f64>,
}

impl ConnectionTable {
    pub fn dim(&self) -> usize {
        self.gamma.shape()[0]
    }

    /// `nabla_{E_c} E_b` as a bundle vector.
    pub fn column(&self, c: usize, b: usize) -> BundleVector {
        let d = self.dim();
        BundleVector::from_components(&(0..d).map(|a| self.gamma[[a, c, b]]).collect::<Vec<_>>())
    }

    /// Tensorial part `Gamma^a_cb u^c w^b`.
    pub fn contract(&self, u: &[f64], w: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|a| {
                let mut acc = 0.0;
                for c in 0..d {
                    for b in 0..d {
                        acc += self.gamma[[a, c, b]] * u[c] * w[b];
                    }
                }
                acc
            })
            .collect()
    }

    /// `max |E_c G_bd - Gamma^e_cb G_ed - Gamma^e_cd G_be|`, with `dg[c][b][d] = E_c(G_bd)`.
    pub fn metric_defect(&self, g: &Tensor<f64>, dg: &Tensor<f64>) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for c in 0..d {
            for b in 0..d {
                for dd in 0..d {
                    let mut v = dg[[c, b, dd]];
                    for e in 0..d {
                        v -= self.gamma[[e, c, b]] * g[[e, dd]] + self.gamma[[e, c, dd]] * g[[b, e]];
                    }
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }

    /// Torsion `t[a][c][b]` of `T(E_c, E_b)` given the bracket table.
    pub fn torsion(&self, brackets: &Tensor<f64>) -> Tensor<f64> {
        let d = self.dim();
        Tensor::from_fn(&[d, d, d], |i| {
            let (a, c, b) = (i[0], i[1], i[2]);
            self.gamma[[a, c, b]] - self.gamma[[a, b, c]] - brackets[[a, c, b]]
        })
    }
}

/// Closed-form connection in the adapted frame. The horizontal block uses
/// `Gamma + A/2`, which is what the Koszul construction produces.
pub fn connection_formula(d: &BaseData) -> ConnectionTable {
    closed_form(d, &d.a)
}

/// Same table with the full `A` in the horizontal block.
pub fn connection_formula_printed(d: &BaseData) -> ConnectionTable {
    closed_form(d, &d.a_printed)
}

fn closed_form(d: &BaseData, a: &Tensor<f64>) -> ConnectionTable {
    let n = d.n;
    let alpha = d.alpha.alpha;
    let k = 1.0 / (2.0 * d.f * alpha);
    let mut t = Tensor::zeros(&[2 * n, 2 * n, 2 * n]);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                t[[l, i, j]] = d.gamma[[l, i, j]] + a[[l, i, j]];
                t[[n + l, i, j]] = 0.5 * d.p_r(i, j, l);
                t[[l, i, n + j]] = k * d.p_raised(l, i, j);
                t[[n + l, i, n + j]] = -d.gamma[[j, i, l]];
                t[[l, n + i, j]] = k * d.p_raised(l, j, i);
                let dl = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                t[[n + l, n + i, n + j]] = -(d.p_up[i] * dl(j, l) + d.p_up[j] * dl(i, l)) / alpha
                    + (alpha + 1.0) / (alpha * alpha) * d.ginv[[i, j]] * d.p[l]
                    + d.p_up[i] * d.p_up[j] * d.p[l] / (alpha * alpha);
            }
        }
    }
    ConnectionTable { gamma: t }
}

pub fn connection_formula_at<M, F>(
    metric: &M,
    scaling: &F,
    pt: &CotangentPoint,
    scheme: &DiffScheme,
) -> Result<ConnectionTable>
where
    M: MetricField + ?Sized,
    F: ScalarField + ?Sized,
{
    Ok(connection_formula(&BundleJets::new(metric, scaling, pt, scheme)?.base_data()))
}

/// First-principles connection with everything the curvature oracle needs
/// to differentiate it once more along frame fields.
#[derive(Debug, Clone)]
pub struct OracleConnection {
    /// `gamma[a][c][b]`, jets of order 1
    pub gamma: Tensor<Jet>,
    /// `c[e][a][b]` from the Jacobi-Lie formula, jets of order 1
    pub brackets: Tensor<Jet>,
    /// adapted-frame metric
    pub metric: Tensor<Jet>,
    /// `dg[c][b][d] = E_c(G_bd)`
    pub dg: Tensor<Jet>,
}

impl OracleConnection {
    pub fn table(&self) -> ConnectionTable {
        ConnectionTable {
            gamma: self.gamma.map(Jet::value),
        }
    }
}

/// Koszul formula on the adapted frame:
/// `2 G(nabla_c E_b, E_d) = E_c G_bd + E_b G_dc - E_d G_cb
///   - G_ce C^e_bd + G_be C^e_dc + G_de C^e_cb`.
pub fn koszul_jets(bj: &BundleJets) -> Result<OracleConnection> {
    let dim = 2 * bj.n;
    let metric = bj.metric();
    let values = metric.map(Jet::value);
    let condition = condition_number(&values);
    if !(condition <= MAX_CONDITION) {
        return Err(GeometryError::IllConditioned { condition });
    }
    let brackets = bj.brackets();
    let dg = Tensor::from_fn(&[dim, dim, dim], |i| bj.directional(i[0], &metric[[i[1], i[2]]]));
    let low = metric.map(|j| j.truncate(1));
    let ginv = invert_jets(&low, &bj.point.coords())?;
    let koszul = Tensor::from_fn(&[dim, dim, dim], |i| {
        let (c, b, d) = (i[0], i[1], i[2]);
        let mut acc = &(&dg[[c, b, d]] + &dg[[b, d, c]]) - &dg[[d, c, b]];
        for e in 0..dim {
            acc -= &low[[c, e]] * &brackets[[e, b, d]];
            acc += &low[[b, e]] * &brackets[[e, d, c]];
            acc += &low[[d, e]] * &brackets[[e, c, b]];
        }
        acc
    });
    let gamma = Tensor::from_fn(&[dim, dim, dim], |i| {
        let (a, c, b) = (i[0], i[1], i[2]);
        let mut acc = Jet::constant(0.0);
        for d in 0..dim {
            acc += &ginv[[a, d]] * &koszul[[c, b, d]];
        }
        acc * 0.5
    });
    Ok(OracleConnection {
        gamma,
        brackets,
        metric,
        dg,
    })
}

pub fn koszul_oracle<M, F>(metric: &M, scaling: &F, pt: &CotangentPoint, scheme: &DiffScheme) -> Result<ConnectionTable>
where
    M: MetricField + ?Sized,
    F: ScalarField + ?Sized,
{
    Ok(koszul_jets(&BundleJets::new(metric, scaling, pt, scheme)?)?.table())
}

/// A lift of a base field at a point together with its base covariant
/// derivative, `nabla[k][i]` = `nabla_k X^i` or `nabla_k w_i`.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseLift {
    Horizontal { value: Vec<f64>, nabla: Tensor<f64> },
    Vertical { value: Vec<f64>, nabla: Tensor<f64> },
}

impl BaseLift {
    pub fn components(&self) -> Vec<f64> {
        match self {
            BaseLift::Horizontal { value, .. } => value.iter().copied().chain(value.iter().map(|_| 0.0)).collect(),
            BaseLift::Vertical { value, .. } => value.iter().map(|_| 0.0).chain(value.iter().copied()).collect(),
        }
    }
}

/// `nabla_X Y` for lifted fields, written with invariant operations on
/// the base and the Liouville field.
pub fn invariant_connection(d: &BaseData, x: &BaseLift, y: &BaseLift) -> BundleVector {
    let n = d.n;
    let alpha = d.alpha.alpha;
    let k = 1.0 / (2.0 * d.f * alpha);
    let mut out = BundleVector::zero(n);
    match (x, y) {
        (BaseLift::Horizontal { value: xv, .. }, BaseLift::Horizontal { value: yv, nabla }) => {
            for l in 0..n {
                let mut h = 0.0;
                let mut v = 0.0;
                for i in 0..n {
                    h += xv[i] * nabla[[i, l]];
                    for j in 0..n {
                        h += d.a[[l, i, j]] * xv[i] * yv[j];
                        v += 0.5 * d.p_r(i, j, l) * xv[i] * yv[j];
                    }
                }
                out.h[l] = h;
                out.v[l] = v;
            }
        }
        (BaseLift::Horizontal { value: xv, .. }, BaseLift::Vertical { value: th, nabla }) => {
            for l in 0..n {
                let mut h = 0.0;
                let mut v = 0.0;
                for i in 0..n {
                    v += xv[i] * nabla[[i, l]];
                    for j in 0..n {
                        h += k * d.p_raised(l, i, j) * xv[i] * th[j];
                    }
                }
                out.h[l] = h;
                out.v[l] = v;
            }
        }
        (BaseLift::Vertical { value: om, .. }, BaseLift::Horizontal { value: yv, .. }) => {
            for l in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        out.h[l] += k * d.p_raised(l, j, i) * om[i] * yv[j];
                    }
                }
            }
        }
        (BaseLift::Vertical { value: om, .. }, BaseLift::Vertical { value: th, .. }) => {
            let blocks = cg_blocks(&d.g, &d.ginv, d.f, &d.p);
            let om_c = x.components();
            let th_c = y.components();
            let liouville: Vec<f64> = vec![0.0; n].into_iter().chain(d.p.iter().copied()).collect();
            let w_om = blocks.apply(&om_c, &liouville);
            let w_th = blocks.apply(&th_c, &liouville);
            let w_omth = blocks.apply(&om_c, &th_c);
            for l in 0..n {
                out.v[l] = -(w_om * th[l] + w_th * om[l]) / alpha + (alpha + 1.0) / alpha * w_omth * d.p[l]
                    - w_om * w_th * d.p[l] / alpha;
            }
        }
    }
    out
}
