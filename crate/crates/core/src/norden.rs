//! Paracomplex structures on the bundle and the connections built from them.

use serde::{Deserialize, Serialize};

use crate::base::MetricField;
use crate::chart::{BaseData, BundleJets};
use crate::connection::{connection_formula, koszul_jets, ConnectionTable, OracleConnection};
use crate::curvature::{commutator_curvature, commutator_oracle, BundleCurvatureTable};
use crate::error::Result;
use crate::frame::CotangentPoint;
use crate::jets::{DiffScheme, Jet, ScalarField};
use crate::metric::cg_blocks;
use crate::tensor::Tensor;

/// An endomorphism of the bundle tangent space in the adapted frame;
/// `m[e][a]` is the coefficient of `E_e` in the image of `E_a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEndomorphism {
    pub m: Tensor<f64>,
}

impl FrameEndomorphism {
    fn block(n: usize, h: f64, v: f64) -> Self {
        FrameEndomorphism {
            m: Tensor::from_fn(&[2 * n, 2 * n], |i| {
                if i[0] != i[1] {
                    0.0
                } else if i[0] < n {
                    h
                } else {
                    v
                }
            }),
        }
    }

    /// `J(^H X) = -^H X`, `J(^V w) = ^V w`
    pub fn paracomplex(n: usize) -> Self {
        FrameEndomorphism::block(n, -1.0, 1.0)
    }

    /// `DI(^H X) = ^H X`, `DI(^V w) = -^V w`
    pub fn diagonal_lift(n: usize) -> Self {
        FrameEndomorphism::block(n, 1.0, -1.0)
    }

    pub fn identity(n: usize) -> Self {
        FrameEndomorphism::block(n, 1.0, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.m.shape()[0]
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|e| (0..d).map(|a| self.m[[e, a]] * u[a]).sum()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|a| self.m[[a, a]]).sum()
    }

    /// `max |m^2 - I|`
    pub fn square_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for e in 0..d {
            for a in 0..d {
                let sq: f64 = (0..d).map(|k| self.m[[e, k]] * self.m[[k, a]]).sum();
                let id = if e == a { 1.0 } else { 0.0 };
                worst = worst.max((sq - id).abs());
            }
        }
        worst
    }

    /// Squares to the identity with equal-rank eigenbundles (so it is not `±I`).
    pub fn is_almost_paracomplex(&self) -> bool {
        self.square_defect() == 0.0 && self.trace() == 0.0
    }
}

/// `components[a][b][d] = (Phi G)(E_a, E_b, E_d)`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiValue {
    pub components: Tensor<f64>,
}

impl PhiValue {
    pub fn max_abs(&self) -> f64 {
        self.components.max_abs()
    }

    /// Largest entry whose slots are horizontal/vertical as given.
    pub fn block_max(&self, kinds: [bool; 3]) -> f64 {
        let d = self.components.shape()[0];
        let n = d / 2;
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    if [a < n, b < n, c < n] == kinds {
                        worst = worst.max(self.components[[a, b, c]].abs());
                    }
                }
            }
        }
        worst
    }
}

/// `components[a][c][b]` is the coefficient of `E_a` in `T(E_c, E_b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionValue {
    pub components: Tensor<f64>,
}

impl TorsionValue {
    pub fn max_abs(&self) -> f64 {
        self.components.max_abs()
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        let d = self.components.shape()[0];
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for c in 0..d {
                for b in 0..d {
                    worst = worst.max((self.components[[a, c, b]] + self.components[[a, b, c]]).abs());
                }
            }
        }
        worst
    }
}

/// Everything the structure checks need at one bundle point.
#[derive(Debug, Clone)]
pub struct StructureSample {
    pub jets: BundleJets,
    pub oracle: OracleConnection,
    pub data: BaseData,
}

impl StructureSample {
    pub fn new<M, F>(metric: &M, scaling: &F, pt: &CotangentPoint, scheme: &DiffScheme) -> Result<Self>
    where
        M: MetricField + ?Sized,
        F: ScalarField + ?Sized,
    {
        let jets = BundleJets::new(metric, scaling, pt, scheme)?;
        let oracle = koszul_jets(&jets)?;
        let data = jets.base_data();
        Ok(StructureSample { jets, oracle, data })
    }

    pub fn metric(&self) -> Tensor<f64> {
        self.oracle.metric.map(Jet::value)
    }

    pub fn dg(&self) -> Tensor<f64> {
        self.oracle.dg.map(Jet::value)
    }

    pub fn brackets(&self) -> Tensor<f64> {
        self.oracle.brackets.map(Jet::value)
    }
}

/// Evaluates the operator
/// `(phi X) G(Y,Z) - X G(phi Y, Z) + G((L_Y phi) X, Z) + G(Y, (L_Z phi) X)`
/// on frame fields, with `phi` constant in the adapted frame so that
/// `(L_{E_b} phi) E_a = (phi^e_a C^k_be - phi^k_e C^e_ba) E_k`.
pub fn phi_from_frame(g: &Tensor<f64>, dg: &Tensor<f64>, brackets: &Tensor<f64>, phi: &FrameEndomorphism) -> PhiValue {
    let d = g.shape()[0];
    let m = &phi.m;
    // lie[b][a][k]: E_k component of (L_{E_b} phi) E_a
    let lie = Tensor::from_fn(&[d, d, d], |i| {
        let (b, a, k) = (i[0], i[1], i[2]);
        (0..d).map(|e| m[[e, a]] * brackets[[k, b, e]] - m[[k, e]] * brackets[[e, b, a]]).sum::<f64>()
    });
    let components = Tensor::from_fn(&[d, d, d], |i| {
        let (a, b, c) = (i[0], i[1], i[2]);
        let mut acc = 0.0;
        for e in 0..d {
            acc += m[[e, a]] * dg[[e, b, c]] - m[[e, b]] * dg[[a, e, c]];
            acc += lie[[b, a, e]] * g[[e, c]] + g[[b, e]] * lie[[c, a, e]];
        }
        acc
    });
    PhiValue { components }
}

pub fn phi_operator(s: &StructureSample, phi: &FrameEndomorphism) -> PhiValue {
    phi_from_frame(&s.metric(), &s.dg(), &s.brackets(), phi)
}

pub fn phi_operator_at<M, F>(
    metric: &M,
    scaling: &F,
    pt: &CotangentPoint,
    phi: &FrameEndomorphism,
    scheme: &DiffScheme,
) -> Result<PhiValue>
where
    M: MetricField + ?Sized,
    F: ScalarField + ?Sized,
{
    Ok(phi_operator(&StructureSample::new(metric, scaling, pt, scheme)?, phi))
}

/// Closed form for `Phi_J G`: only `(H,V,H)` and `(H,H,V)` survive, both
/// equal to twice the vertical metric paired with `p o R`.
pub fn phi_closed_form(d: &BaseData) -> PhiValue {
    let n = d.n;
    let v = cg_blocks(&d.g, &d.ginv, d.f, &d.p).v;
    let mut c = Tensor::zeros(&[2 * n, 2 * n, 2 * n]);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut hvh = 0.0;
                let mut hhv = 0.0;
                for l in 0..n {
                    hvh += v[[j, l]] * d.p_r(i, k, l);
                    hhv += d.p_r(i, j, l) * v[[l, k]];
                }
                c[[i, n + j, k]] = 2.0 * hvh;
                c[[i, j, n + k]] = 2.0 * hhv;
            }
        }
    }
    PhiValue { components: c }
}

/// Largest `|Phi(X,Y,Z) + Phi(Y,Z,X) + Phi(Z,X,Y)|` over frame triples.
pub fn quasi_kahler_sum(phi: &PhiValue) -> f64 {
    let c = &phi.components;
    let d = c.shape()[0];
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            for e in 0..d {
                worst = worst.max((c[[a, b, e]] + c[[b, e, a]] + c[[e, a, b]]).abs());
            }
        }
    }
    worst
}

/// `nj[a][c][b]`: coefficient of `E_a` in `(nabla_{E_c} phi) E_b`.
pub fn structure_derivative(table: &ConnectionTable, phi: &FrameEndomorphism) -> Tensor<f64> {
    let d = table.dim();
    let (g, m) = (&table.gamma, &phi.m);
    Tensor::from_fn(&[d, d, d], |i| {
        let (a, c, b) = (i[0], i[1], i[2]);
        (0..d).map(|e| g[[a, c, e]] * m[[e, b]] - m[[a, e]] * g[[e, c, b]]).sum::<f64>()
    })
}

/// `nabla_X Y - S(X, Y)` with
/// `S(X,Y) = 1/2 {(nabla_{phi Y} phi) X + phi((nabla_Y phi) X) - phi((nabla_X phi) Y)}`.
pub fn almost_product_from(table: &ConnectionTable, phi: &FrameEndomorphism) -> ConnectionTable {
    let d = table.dim();
    let nj = structure_derivative(table, phi);
    let m = &phi.m;
    let gamma = Tensor::from_fn(&[d, d, d], |i| {
        let (a, c, b) = (i[0], i[1], i[2]);
        let mut s = 0.0;
        for e in 0..d {
            s += m[[e, b]] * nj[[a, e, c]] + m[[a, e]] * nj[[e, b, c]] - m[[a, e]] * nj[[e, c, b]];
        }
        table.gamma[[a, c, b]] - 0.5 * s
    });
    ConnectionTable { gamma }
}

/// Explicit blocks of the almost product connection for `J`.
pub fn almost_product_formula(d: &BaseData) -> ConnectionTable {
    let n = d.n;
    let mut t = connection_formula(d).gamma;
    let k = 3.0 / (2.0 * d.f * d.alpha.alpha);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                t[[n + l, i, j]] = 0.0;
                t[[l, i, n + j]] = 0.0;
                t[[l, n + i, j]] = k * d.p_raised(l, j, i);
                t[[n + l, n + i, j]] = 0.0;
                t[[l, n + i, n + j]] = 0.0;
            }
        }
    }
    ConnectionTable { gamma: t }
}

pub fn torsion_of(table: &ConnectionTable, brackets: &Tensor<f64>) -> TorsionValue {
    TorsionValue {
        components: table.torsion(brackets),
    }
}

/// Torsion of the almost product connection from its three closed-form
/// pieces: zero on `(V,V)`, horizontal on `(V,H)`, vertical on `(H,H)`.
pub fn torsion_formula(d: &BaseData) -> TorsionValue {
    let n = d.n;
    let k = 3.0 / (2.0 * d.f * d.alpha.alpha);
    let mut t = Tensor::zeros(&[2 * n, 2 * n, 2 * n]);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                let vh = k * d.p_raised(l, j, i);
                t[[l, n + i, j]] = vh;
                t[[l, j, n + i]] = -vh;
                t[[n + l, i, j]] = -d.p_r(i, j, l);
            }
        }
    }
    TorsionValue { components: t }
}

/// `nabla^(F)_X Y = F(nabla_X F Y)`.
pub fn product_conjugate(table: &ConnectionTable, phi: &FrameEndomorphism) -> ConnectionTable {
    let d = table.dim();
    let m = &phi.m;
    ConnectionTable {
        gamma: Tensor::from_fn(&[d, d, d], |i| {
            let (a, c, b) = (i[0], i[1], i[2]);
            let mut acc = 0.0;
            for e in 0..d {
                for f in 0..d {
                    acc += m[[a, e]] * table.gamma[[e, c, f]] * m[[f, b]];
                }
            }
            acc
        }),
    }
}

fn conjugate_jets(gamma: &Tensor<Jet>, phi: &FrameEndomorphism) -> Tensor<Jet> {
    let d = gamma.shape()[0];
    let m = &phi.m;
    Tensor::from_fn(&[d, d, d], |i| {
        let (a, c, b) = (i[0], i[1], i[2]);
        let mut acc = Jet::constant(0.0);
        for e in 0..d {
            for f in 0..d {
                let w = m[[a, e]] * m[[f, b]];
                if w != 0.0 {
                    acc += gamma[[e, c, f]].clone() * w;
                }
            }
        }
        acc
    })
}

/// Explicit blocks of the product conjugate connection for `J`.
pub fn product_conjugate_formula(d: &BaseData) -> ConnectionTable {
    let n = d.n;
    let mut t = connection_formula(d).gamma;
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                t[[n + l, i, j]] = -t[[n + l, i, j]];
                t[[l, i, n + j]] = -t[[l, i, n + j]];
            }
        }
    }
    ConnectionTable { gamma: t }
}

/// `F(R(X, Y) F Z)` for a curvature table.
pub fn conjugate_curvature(r: &BundleCurvatureTable, phi: &FrameEndomorphism) -> BundleCurvatureTable {
    let d = r.dim();
    let m = &phi.m;
    BundleCurvatureTable {
        r: Tensor::from_fn(&[d, d, d, d], |i| {
            let (a, c, b, dd) = (i[0], i[1], i[2], i[3]);
            let mut acc = 0.0;
            for e in 0..d {
                for f in 0..d {
                    acc += m[[a, e]] * r.r[[e, c, b, f]] * m[[f, dd]];
                }
            }
            acc
        }),
    }
}

/// Curvature of the conjugate connection by commutators against the
/// conjugated curvature of the original one; returns the largest defect.
pub fn conjugate_curvature_check(s: &StructureSample, phi: &FrameEndomorphism) -> f64 {
    let brackets = s.brackets();
    let lifted = commutator_curvature(&s.jets, &conjugate_jets(&s.oracle.gamma, phi), &brackets);
    let expected = conjugate_curvature(&commutator_oracle(&s.jets, &s.oracle), phi);
    lifted.r.max_abs_diff(&expected.r)
}

/// `DI` together with `max |Phi_DI G|`.
pub fn diagonal_lift_structure(s: &StructureSample) -> (FrameEndomorphism, f64) {
    let di = FrameEndomorphism::diagonal_lift(s.data.n);
    let defect = phi_operator(s, &di).max_abs();
    (di, defect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ManifoldSpec, Scaling};

    fn sample(m: &str, f: Scaling, x: &[f64], p: &[f64]) -> StructureSample {
        let spec: ManifoldSpec = m.parse().unwrap();
        let pt = CotangentPoint::new(x.to_vec(), p.to_vec()).unwrap();
        StructureSample::new(&spec, &f, &pt, &DiffScheme::jets()).unwrap()
    }

    fn curved() -> StructureSample {
        sample("sphere", Scaling::Poly, &[1.1, 0.4], &[0.3, -0.2])
    }

    #[test]
    fn structures_square_to_identity() {
        for j in [FrameEndomorphism::paracomplex(3), FrameEndomorphism::diagonal_lift(3)] {
            assert_eq!(j.square_defect(), 0.0);
            assert!(j.is_almost_paracomplex());
        }
        assert!(!FrameEndomorphism::identity(2).is_almost_paracomplex());
    }

    #[test]
    fn phi_vanishes_on_flat_base() {
        let s = sample("flat", Scaling::Exp, &[0.3, -0.4], &[0.8, 0.5]);
        assert!(phi_operator(&s, &FrameEndomorphism::paracomplex(2)).max_abs() < 1e-12);
        assert!(diagonal_lift_structure(&s).1 < 1e-12);
    }

    #[test]
    fn phi_matches_closed_form_on_sphere() {
        let s = curved();
        let phi = phi_operator(&s, &FrameEndomorphism::paracomplex(2));
        let closed = phi_closed_form(&s.data);
        assert!(phi.components.max_abs_diff(&closed.components) < 1e-12);
        assert!(phi.block_max([true, false, true]) > 1e-2);
        assert_eq!(phi.block_max([false, false, false]), 0.0);
        assert!(diagonal_lift_structure(&s).1 > 1e-3);
    }

    #[test]
    fn cyclic_sum_vanishes_but_not_for_a_non_structure() {
        let s = sample("polynomial:3", Scaling::Poly, &[0.3, -0.5, 0.7], &[0.6, -0.3, 0.4]);
        let j = FrameEndomorphism::paracomplex(3);
        assert!(quasi_kahler_sum(&phi_operator(&s, &j)) < 1e-12);
        let mut bogus = j.clone();
        bogus.m[[0, 3]] = 0.7;
        bogus.m[[4, 1]] = -0.4;
        assert!(quasi_kahler_sum(&phi_operator(&s, &bogus)) > 1e-3);
    }

    #[test]
    fn almost_product_connection_matches_explicit_blocks() {
        let s = sample("hyperbolic", Scaling::Exp, &[0.4, 1.3], &[0.9, 0.5]);
        let j = FrameEndomorphism::paracomplex(2);
        let built = almost_product_from(&s.oracle.table(), &j);
        assert!(built.gamma.max_abs_diff(&almost_product_formula(&s.data).gamma) < 1e-12);
        assert!(structure_derivative(&built, &j).max_abs() < 1e-14);
        let torsion = torsion_of(&built, &s.brackets());
        assert!(torsion.components.max_abs_diff(&torsion_formula(&s.data).components) < 1e-12);
        assert!(torsion.antisymmetry_defect() < 1e-14);
        assert!(torsion.max_abs() > 1e-3);
    }

    #[test]
    fn almost_product_connection_is_symmetric_on_flat_base() {
        let s = sample("flat:3", Scaling::Poly, &[0.3, -0.5, 0.7], &[0.6, -0.3, 0.4]);
        let built = almost_product_from(&s.oracle.table(), &FrameEndomorphism::paracomplex(3));
        assert!(torsion_of(&built, &s.brackets()).max_abs() < 1e-12);
    }

    #[test]
    fn conjugate_connection_flips_curvature_terms() {
        let s = curved();
        let j = FrameEndomorphism::paracomplex(2);
        let lc = s.oracle.table();
        let conj = product_conjugate(&lc, &j);
        assert!(conj.gamma.max_abs_diff(&product_conjugate_formula(&s.data).gamma) < 1e-12);
        // (H,H) -> V block changes sign
        assert!((conj.gamma[[2, 0, 1]] + lc.gamma[[2, 0, 1]]).abs() < 1e-14);
        assert!(lc.gamma[[2, 0, 1]].abs() > 1e-3);
        assert!(conj.metric_defect(&s.metric(), &s.dg()) < 1e-12);
        assert!(conjugate_curvature_check(&s, &j) < 1e-11);
    }

    #[test]
    fn conjugation_by_identity_is_trivial() {
        let s = curved();
        let id = FrameEndomorphism::identity(2);
        assert_eq!(product_conjugate(&s.oracle.table(), &id), s.oracle.table());
        assert!(conjugate_curvature_check(&s, &id) < 1e-14);
    }
}
