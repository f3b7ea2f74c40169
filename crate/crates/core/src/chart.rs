//! Jets over the bundle chart `(x^1..x^n, p_1..p_n)` at one bundle point.
//!
//! Everything here is differentiable along the frame fields, which is what
//! the first-principles oracles (brackets, Koszul, commutator, Phi) need.
//! Base quantities only depend on `x` but are carried in the full chart.

use crate::base::{raise_curvature, GeometryJets, MetricField};
use crate::error::{GeometryError, Result};
use crate::frame::{Alpha, CotangentPoint};
use crate::jets::{derive, DiffScheme, Jet, ScalarField};
use crate::tensor::Tensor;

/// Jet order of the base metric; enough for one derivative of the
/// bundle connection.
pub const BUNDLE_ORDER: usize = 3;

#[derive(Debug, Clone)]
pub struct BundleJets {
    pub n: usize,
    pub point: CotangentPoint,
    pub geo: GeometryJets,
    pub f: Jet,
    /// `p_i` as chart variables.
    pub p: Vec<Jet>,
    /// `p^i = g^{it} p_t`
    pub p_up: Vec<Jet>,
    /// `alpha = 1 + g^{ij} p_i p_j`
    pub alpha: Jet,
    /// `frame[a][m]`: natural component `m` of `E_a`.
    pub frame: Tensor<Jet>,
}

impl BundleJets {
    pub fn new<M, F>(metric: &M, scaling: &F, pt: &CotangentPoint, scheme: &DiffScheme) -> Result<Self>
    where
        M: MetricField + ?Sized,
        F: ScalarField + ?Sized,
    {
        let n = metric.dim();
        if pt.dim() != n {
            return Err(GeometryError::DimensionMismatch {
                expected: n,
                got: pt.dim(),
            });
        }
        let nv = 2 * n;
        let geo = GeometryJets::new(metric, &pt.x, nv, BUNDLE_ORDER, scheme)?;
        let f = derive(scaling, &pt.x, BUNDLE_ORDER, scheme)?.to_jet(nv, BUNDLE_ORDER);
        if !(f.value() > 0.0) {
            return Err(GeometryError::NonPositiveScaling {
                point: pt.x.clone(),
                value: f.value(),
            });
        }
        let p: Vec<Jet> = (0..n)
            .map(|i| Jet::variable(nv, n + i, pt.p[i], BUNDLE_ORDER))
            .collect();
        let p_up: Vec<Jet> = (0..n)
            .map(|i| {
                let mut acc = Jet::constant(0.0);
                for t in 0..n {
                    acc += &geo.ginv[[i, t]] * &p[t];
                }
                acc
            })
            .collect();
        let mut alpha = Jet::constant(1.0);
        for i in 0..n {
            alpha += &p_up[i] * &p[i];
        }
        // E_j = d_j + p_a Gamma^a_hj d/dp_h,  E_jbar = d/dp_j
        let frame = Tensor::from_fn(&[nv, nv], |idx| {
            let (a, m) = (idx[0], idx[1]);
            if a >= n || m < n {
                return Jet::constant(if a == m { 1.0 } else { 0.0 });
            }
            let h = m - n;
            let mut acc = Jet::constant(0.0);
            for s in 0..n {
                acc += &p[s] * &geo.gamma[[s, h, a]];
            }
            acc
        });
        Ok(BundleJets {
            n,
            point: pt.clone(),
            geo,
            f,
            p,
            p_up,
            alpha,
            frame,
        })
    }

    /// `E_a(F)`; lowers the jet order by one.
    pub fn directional(&self, a: usize, field: &Jet) -> Jet {
        let n = self.n;
        let mut acc = field.derivative(a);
        if a < n {
            for h in 0..n {
                acc += &self.frame[[a, n + h]] * &field.derivative(n + h);
            }
        }
        acc
    }

    /// Adapted components of `[E_a, E_b]` from the Jacobi-Lie formula on
    /// natural components: `c[e][a][b]`.
    pub fn brackets(&self) -> Tensor<Jet> {
        let n = self.n;
        let nv = 2 * n;
        let zero = Jet::constant(0.0);
        let mut c = Tensor::filled(&[nv, nv, nv], zero.clone());
        for a in 0..nv {
            for b in (a + 1)..nv {
                let natural: Vec<Jet> = (0..nv)
                    .map(|m| {
                        &self.directional(a, &self.frame[[b, m]]) - &self.directional(b, &self.frame[[a, m]])
                    })
                    .collect();
                for e in 0..nv {
                    let mut comp = natural[e].clone();
                    if e >= n {
                        let i = e - n;
                        for s in 0..n {
                            for j in 0..n {
                                comp -= &(&self.p[s] * &self.geo.gamma[[s, i, j]]) * &natural[j];
                            }
                        }
                    }
                    c[[e, b, a]] = -&comp;
                    c[[e, a, b]] = comp;
                }
            }
        }
        c
    }

    /// The bundle metric in the adapted frame as jets.
    pub fn metric(&self) -> Tensor<Jet> {
        let n = self.n;
        let inv_alpha = self.alpha.recip();
        Tensor::from_fn(&[2 * n, 2 * n], |idx| {
            let (a, b) = (idx[0], idx[1]);
            match (a < n, b < n) {
                (true, true) => &self.f * &self.geo.g[[a, b]],
                (false, false) => {
                    let (i, j) = (a - n, b - n);
                    &inv_alpha * &(&self.geo.ginv[[i, j]] + &(&self.p_up[i] * &self.p_up[j]))
                }
                _ => Jet::constant(0.0),
            }
        })
    }

    /// `A^h_ji = (1/f)(f_j delta^h_i + f_i delta^h_j - f^h g_ji)` as jets,
    /// indexed `[h][j][i]`.
    pub fn a_tensor(&self) -> Tensor<Jet> {
        let n = self.n;
        let df: Vec<Jet> = (0..n).map(|i| self.f.derivative(i)).collect();
        let df_up: Vec<Jet> = (0..n)
            .map(|h| {
                let mut acc = Jet::constant(0.0);
                for t in 0..n {
                    acc += &self.geo.ginv[[h, t]] * &df[t];
                }
                acc
            })
            .collect();
        let inv_f = self.f.recip();
        Tensor::from_fn(&[n, n, n], |idx| {
            let (h, j, i) = (idx[0], idx[1], idx[2]);
            let mut acc = -&(&df_up[h] * &self.geo.g[[j, i]]);
            if h == i {
                acc += df[j].clone();
            }
            if h == j {
                acc += df[i].clone();
            }
            &inv_f * &acc
        })
    }

    pub fn base_data(&self) -> BaseData {
        let n = self.n;
        let val = |t: &Tensor<Jet>| t.map(Jet::value);
        let g = val(&self.geo.g);
        let ginv = val(&self.geo.ginv);
        let r = val(self.geo.riemann.as_ref().expect("bundle order carries curvature"));
        let covd = val(self.geo.covd.as_ref().expect("bundle order carries nabla R"));
        let raised = raise_curvature(&ginv, &r);
        let covd_raised = Tensor::from_fn(&[n, n, n, n, n], |idx| {
            let (m, k, j, i, s) = (idx[0], idx[1], idx[2], idx[3], idx[4]);
            let mut acc = 0.0;
            for t in 0..n {
                for q in 0..n {
                    acc += ginv[[k, t]] * ginv[[i, q]] * covd[[m, t, j, q, s]];
                }
            }
            acc
        });
        // the connection's horizontal difference tensor is half of A
        let a_jets = self.a_tensor().map(|j| j * 0.5);
        let gamma = &self.geo.gamma;
        // nabla_l A^m_ij
        let nabla_a = Tensor::from_fn(&[n, n, n, n], |idx| {
            let (l, m, i, j) = (idx[0], idx[1], idx[2], idx[3]);
            let mut acc = a_jets[[m, i, j]].partial(&[l]);
            for h in 0..n {
                acc += gamma[[m, l, h]].value() * a_jets[[h, i, j]].value();
                acc -= gamma[[h, l, i]].value() * a_jets[[m, h, j]].value();
                acc -= gamma[[h, l, j]].value() * a_jets[[m, i, h]].value();
            }
            acc
        });
        let p = self.point.p.clone();
        BaseData {
            n,
            x: self.point.x.clone(),
            alpha: Alpha::from_inverse_metric(&ginv, &p),
            p_up: self.p_up.iter().map(Jet::value).collect(),
            p,
            g,
            ginv,
            gamma: val(gamma),
            r,
            raised,
            covd,
            covd_raised,
            f: self.f.value(),
            df: (0..n).map(|i| self.f.partial(&[i])).collect(),
            a_printed: val(&a_jets).map(|v| 2.0 * v),
            a: val(&a_jets),
            nabla_a,
        }
    }
}

/// Plain values of every base quantity the closed-form bundle formulas use.
#[derive(Debug, Clone)]
pub struct BaseData {
    pub n: usize,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub p_up: Vec<f64>,
    pub alpha: Alpha,
    pub g: Tensor<f64>,
    pub ginv: Tensor<f64>,
    /// `Gamma^h_ij` as `[h][i][j]`
    pub gamma: Tensor<f64>,
    /// `R_ijl^s` as `[i][j][l][s]`
    pub r: Tensor<f64>,
    /// `g^kt g^im R_tjm^s` as `[k][j][i][s]`
    pub raised: Tensor<f64>,
    /// `nabla_m R_ijl^s` as `[m][i][j][l][s]`
    pub covd: Tensor<f64>,
    /// `nabla_m` of `raised`, as `[m][k][j][i][s]`
    pub covd_raised: Tensor<f64>,
    pub f: f64,
    pub df: Vec<f64>,
    /// `A^h_ji` as `[h][j][i]`
    pub a_printed: Tensor<f64>,
    /// `A/2`, the difference between the horizontal block of the bundle
    /// connection and `Gamma`; indexed like `a_printed`
    pub a: Tensor<f64>,
    /// `nabla_l (A/2)^m_ij` as `[l][m][i][j]`
    pub nabla_a: Tensor<f64>,
}

impl BaseData {
    /// `p_s R_ijl^s`
    pub fn p_r(&self, i: usize, j: usize, l: usize) -> f64 {
        (0..self.n).map(|s| self.p[s] * self.r[[i, j, l, s]]).sum()
    }

    /// `p_s raised[k][j][i][s]`
    pub fn p_raised(&self, k: usize, j: usize, i: usize) -> f64 {
        (0..self.n).map(|s| self.p[s] * self.raised[[k, j, i, s]]).sum()
    }
}
