//! Curvature of the bundle: the closed-form component families, the
//! commutator construction from the Koszul connection, and the
//! symmetry checks.

use serde::{Deserialize, Serialize};

use crate::chart::{BaseData, BundleJets};
use crate::connection::OracleConnection;
use crate::jets::Jet;
use crate::tensor::Tensor;

/// `r[a][c][b][d]` is the coefficient of `E_a` in `R(E_c, E_b) E_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleCurvatureTable {
    pub r: Tensor<f64>,
}

/// The eight component families, named by the kinds of `(E_c, E_b, E_d)`
/// in `R(E_c, E_b) E_d`; `V` is a vertical frame field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    HHH,
    VHH,
    HVH,
    VVH,
    HHV,
    VHV,
    HVV,
    VVV,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::HHH,
        Family::VHH,
        Family::HVH,
        Family::VVH,
        Family::HHV,
        Family::VHV,
        Family::HVV,
        Family::VVV,
    ];

    pub fn of(n: usize, c: usize, b: usize, d: usize) -> Family {
        let code = (c >= n) as usize * 4 + (b >= n) as usize * 2 + (d >= n) as usize;
        [
            Family::HHH,
            Family::HHV,
            Family::HVH,
            Family::HVV,
            Family::VHH,
            Family::VHV,
            Family::VVH,
            Family::VVV,
        ][code]
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::HHH => "R(H,H)H",
            Family::VHH => "R(V,H)H",
            Family::HVH => "R(H,V)H",
            Family::VVH => "R(V,V)H",
            Family::HHV => "R(H,H)V",
            Family::VHV => "R(V,H)V",
            Family::HVV => "R(H,V)V",
            Family::VVV => "R(V,V)V",
        }
    }
}

impl BundleCurvatureTable {
    pub fn dim(&self) -> usize {
        self.r.shape()[0]
    }

    /// Max abs difference per family.
    pub fn family_errors(&self, other: &BundleCurvatureTable) -> Vec<(Family, f64)> {
        let d = self.dim();
        let n = d / 2;
        let mut err = [0.0f64; 8];
        for a in 0..d {
            for c in 0..d {
                for b in 0..d {
                    for e in 0..d {
                        let fam = Family::of(n, c, b, e);
                        let k = Family::ALL.iter().position(|f| *f == fam).unwrap();
                        let diff = (self.r[[a, c, b, e]] - other.r[[a, c, b, e]]).abs();
                        err[k] = if diff.is_nan() { f64::INFINITY } else { err[k].max(diff) };
                    }
                }
            }
        }
        Family::ALL.iter().copied().zip(err).collect()
    }

    /// `G(R(E_c, E_b) E_d, E_e)` as `[c][b][d][e]`.
    pub fn lowered(&self, g: &Tensor<f64>) -> Tensor<f64> {
        let d = self.dim();
        Tensor::from_fn(&[d, d, d, d], |i| {
            (0..d).map(|a| self.r[[a, i[0], i[1], i[2]]] * g[[a, i[3]]]).sum()
        })
    }

    /// Max defect over the antisymmetries, pair symmetry and first Bianchi
    /// identity of the lowered tensor.
    pub fn symmetry_defect(&self, g: &Tensor<f64>) -> f64 {
        let low = self.lowered(g);
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for c in 0..d {
            for b in 0..d {
                for e in 0..d {
                    for f in 0..d {
                        let v = low[[c, b, e, f]];
                        worst = worst
                            .max((v + low[[b, c, e, f]]).abs())
                            .max((v + low[[c, b, f, e]]).abs())
                            .max((v - low[[e, f, c, b]]).abs())
                            .max((v + low[[b, e, c, f]] + low[[e, c, b, f]]).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Curvature of an arbitrary connection table given as order-1 jets on
/// the bundle chart:
/// `R^a_cbd = E_c G^a_bd - E_b G^a_cd + G^e_bd G^a_ce - G^e_cd G^a_be - C^e_cb G^a_ed`.
pub fn commutator_curvature(bj: &BundleJets, gamma: &Tensor<Jet>, brackets: &Tensor<f64>) -> BundleCurvatureTable {
    let d = gamma.shape()[0];
    let val = gamma.map(Jet::value);
    let mut deriv = Tensor::zeros(&[d, d, d, d]);
    // deriv[c][a][b][e] = E_c(gamma[a][b][e])
    for c in 0..d {
        for a in 0..d {
            for b in 0..d {
                for e in 0..d {
                    deriv[[c, a, b, e]] = bj.directional(c, &gamma[[a, b, e]]).value();
                }
            }
        }
    }
    let r = Tensor::from_fn(&[d, d, d, d], |i| {
        let (a, c, b, dd) = (i[0], i[1], i[2], i[3]);
        let mut acc = deriv[[c, a, b, dd]] - deriv[[b, a, c, dd]];
        for e in 0..d {
            acc += val[[e, b, dd]] * val[[a, c, e]] - val[[e, c, dd]] * val[[a, b, e]] - brackets[[e, c, b]] * val[[a, e, dd]];
        }
        acc
    });
    BundleCurvatureTable { r }
}

pub fn commutator_oracle(bj: &BundleJets, oc: &OracleConnection) -> BundleCurvatureTable {
    commutator_curvature(bj, &oc.gamma, &oc.brackets.map(Jet::value))
}

/// Which transcription of the closed-form families to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureReading {
    Printed,
    Corrected,
}

struct Terms<'a> {
    d: &'a BaseData,
}

impl Terms<'_> {
    fn r(&self, i: usize, j: usize, l: usize, s: usize) -> f64 {
        self.d.r[[i, j, l, s]]
    }
    fn rr(&self, k: usize, j: usize, i: usize, s: usize) -> f64 {
        self.d.raised[[k, j, i, s]]
    }
    /// `R_ij^{la} = g^{lm} R_ijm^a`
    fn r3(&self, i: usize, j: usize, l: usize, a: usize) -> f64 {
        (0..self.d.n).map(|m| self.d.ginv[[l, m]] * self.d.r[[i, j, m, a]]).sum()
    }
    fn cv(&self, m: usize, i: usize, j: usize, l: usize, s: usize) -> f64 {
        self.d.covd[[m, i, j, l, s]]
    }
    fn crr(&self, m: usize, k: usize, j: usize, i: usize, s: usize) -> f64 {
        self.d.covd_raised[[m, k, j, i, s]]
    }
    fn a(&self, h: usize, j: usize, i: usize) -> f64 {
        self.d.a[[h, j, i]]
    }
    fn na(&self, l: usize, m: usize, i: usize, j: usize) -> f64 {
        self.d.nabla_a[[l, m, i, j]]
    }
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Closed-form curvature table.
pub fn curvature_formula(d: &BaseData, reading: CurvatureReading) -> BundleCurvatureTable {
    let n = d.n;
    let t = Terms { d };
    let f = d.f;
    let al = d.alpha.alpha;
    let p = &d.p;
    let pu = &d.p_up;
    let df = &d.df;
    let corrected = reading == CurvatureReading::Corrected;
    // terms whose printed sign disagrees with the commutator construction
    let sign = if corrected { -1.0 } else { 1.0 };
    let mut r = Tensor::zeros(&[2 * n, 2 * n, 2 * n, 2 * n]);
    let rng = || 0..n;
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for m in 0..n {
                    // R(E_l, E_i) E_j
                    let mut h = t.r(l, i, j, m) + t.na(l, m, i, j) - t.na(i, m, l, j);
                    let mut v = 0.0;
                    for hh in rng() {
                        h += t.a(m, l, hh) * t.a(hh, i, j) - t.a(m, i, hh) * t.a(hh, l, j);
                        for tt in rng() {
                            v += 0.5 * p[tt] * (t.r(l, hh, m, tt) * t.a(hh, i, j) - t.r(i, hh, m, tt) * t.a(hh, l, j));
                            for a in rng() {
                                let pp = p[tt] * p[a];
                                h += -pp / (2.0 * f * al) * t.r(l, i, hh, a) * t.rr(m, j, hh, tt)
                                    + pp / (4.0 * f * al)
                                        * (t.rr(m, l, hh, tt) * t.r(i, j, hh, a) - t.rr(m, i, hh, tt) * t.r(l, j, hh, a));
                            }
                        }
                    }
                    let cov_coeff = if corrected { 0.5 } else { 1.0 / (2.0 * f) };
                    for tt in rng() {
                        v += cov_coeff * p[tt] * (t.cv(l, i, j, m, tt) - t.cv(i, l, j, m, tt));
                    }
                    r[[m, l, i, j]] = h;
                    r[[n + m, l, i, j]] = v;

                    // R(E_lbar, E_i) E_j
                    let mut h = 0.0;
                    let mut v = 0.5 * t.r(i, j, m, l);
                    for a in rng() {
                        h += -p[a] / (2.0 * f * al) * t.crr(i, m, j, l, a)
                            + p[a] / (2.0 * f * al) * df[i] / f * t.rr(m, j, l, a);
                        v += -p[a] * pu[l] / (2.0 * al) * t.r(i, j, m, a)
                            - sign * (al + 1.0) / (2.0 * al * al) * p[a] * p[m] * t.r3(i, j, l, a);
                        for hh in rng() {
                            h += p[a] / (2.0 * f * al) * (t.rr(m, hh, l, a) * t.a(hh, i, j) - t.rr(hh, j, l, a) * t.a(m, i, hh));
                            for tt in rng() {
                                v += -p[tt] * p[a] / (4.0 * f * al) * t.r(i, hh, m, tt) * t.rr(hh, j, l, a);
                            }
                        }
                    }
                    r[[m, n + l, i, j]] = h;
                    r[[n + m, n + l, i, j]] = v;

                    // R(E_l, E_ibar) E_j
                    let mut h = 0.0;
                    let mut v = -0.5 * t.r(l, j, m, i);
                    for a in rng() {
                        h += p[a] / (2.0 * f * al) * t.crr(l, m, j, i, a)
                            - p[a] / (2.0 * f * al) * df[l] / f * t.rr(m, j, i, a);
                        v += p[a] * pu[i] / (2.0 * al) * t.r(l, j, m, a)
                            - (al + 1.0) / (2.0 * al * al) * p[a] * p[m] * t.r3(l, j, i, a);
                        for hh in rng() {
                            h += p[a] / (2.0 * f * al) * (t.rr(hh, j, i, a) * t.a(m, l, hh) - t.rr(m, hh, i, a) * t.a(hh, l, j));
                            for tt in rng() {
                                v += -sign * p[tt] * p[a] / (4.0 * f * al) * t.r(l, hh, m, a) * t.rr(hh, j, i, tt);
                            }
                        }
                    }
                    r[[m, l, n + i, j]] = h;
                    r[[n + m, l, n + i, j]] = v;

                    // R(E_lbar, E_ibar) E_j
                    let mut h = t.rr(m, j, i, l) / (f * al);
                    for a in rng() {
                        h += p[a] / (f * al * al) * (pu[i] * t.rr(m, j, l, a) - pu[l] * t.rr(m, j, i, a));
                        for hh in rng() {
                            for tt in rng() {
                                h += p[tt] * p[a] / (4.0 * f * f * al * al)
                                    * (t.rr(m, hh, l, a) * t.rr(hh, j, i, tt) - t.rr(m, hh, i, a) * t.rr(hh, j, l, tt));
                            }
                        }
                    }
                    r[[m, n + l, n + i, j]] = h;

                    // R(E_l, E_i) E_jbar
                    let mut h = 0.0;
                    let mut v = t.r(i, l, m, j);
                    for a in rng() {
                        h += p[a] / (2.0 * f * al) * (t.crr(l, m, i, j, a) - t.crr(i, m, l, j, a))
                            + p[a] / (2.0 * f * al) * (-df[l] / f * t.rr(m, i, j, a) + df[i] / f * t.rr(m, l, j, a));
                        v += p[a] * pu[j] / al * t.r(l, i, m, a) - (al + 1.0) / (al * al) * p[a] * p[m] * t.r3(l, i, j, a);
                        for hh in rng() {
                            h += p[a] / (2.0 * f * al) * (t.rr(hh, i, j, a) * t.a(m, l, hh) - t.rr(hh, l, j, a) * t.a(m, i, hh));
                            for tt in rng() {
                                v += p[tt] * p[a] / (4.0 * f * al)
                                    * (t.r(l, hh, m, tt) * t.rr(hh, i, j, a) - t.r(i, hh, m, a) * t.rr(hh, l, j, tt));
                            }
                        }
                    }
                    r[[m, l, i, n + j]] = h;
                    r[[n + m, l, i, n + j]] = v;

                    // R(E_lbar, E_i) E_jbar
                    let mut h = t.rr(m, i, j, l) / (2.0 * f * al);
                    for a in rng() {
                        let second = if corrected { pu[j] * t.rr(m, i, l, a) } else { pu[i] * t.rr(m, i, l, a) };
                        h += p[a] / (2.0 * f * al * al) * (sign * pu[l] * t.rr(m, i, j, a) + second);
                        for hh in rng() {
                            for tt in rng() {
                                h += p[a] * p[tt] / (4.0 * f * f * al * al) * t.rr(m, hh, l, a) * t.rr(hh, i, j, tt);
                            }
                        }
                    }
                    r[[m, n + l, i, n + j]] = h;

                    // R(E_l, E_ibar) E_jbar
                    let mut h = -t.rr(m, l, j, i) / (2.0 * f * al);
                    for a in rng() {
                        h += p[a] / (2.0 * f * al * al) * (pu[i] * t.rr(m, l, j, a) + sign * pu[j] * t.rr(m, l, i, a));
                        for hh in rng() {
                            for tt in rng() {
                                h += -p[a] * p[tt] / (4.0 * f * f * al * al) * t.rr(m, hh, i, a) * t.rr(hh, l, j, tt);
                            }
                        }
                    }
                    r[[m, l, n + i, n + j]] = h;

                    // R(E_lbar, E_ibar) E_jbar
                    let a3 = al * al * al;
                    let pl_pm = if corrected { pu[l] * p[m] } else { 0.0 };
                    let mut v = (al * al + al + 1.0) / a3 * (d.ginv[[i, j]] * delta(l, m) - d.ginv[[j, l]] * delta(i, m))
                        + (al - 1.0) / a3 * (delta(i, m) * pu[l] * pu[j] - delta(l, m) * pu[i] * pu[j]);
                    v += (al + 2.0) / a3 * (d.ginv[[l, j]] * pu[i] * p[m] - d.ginv[[i, j]] * pl_pm);
                    if !corrected {
                        // printed with a lower l on p_l
                        v -= (al + 2.0) / a3 * d.ginv[[i, j]] * p[l] * p[m];
                    }
                    r[[n + m, n + l, n + i, n + j]] = v;
                }
            }
        }
    }
    BundleCurvatureTable { r }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ManifoldSpec, Scaling};
    use crate::connection::koszul_jets;
    use crate::frame::CotangentPoint;
    use crate::jets::DiffScheme;

    fn tables(m: &str, f: Scaling, x: &[f64], p: &[f64]) -> (BaseData, BundleCurvatureTable, Tensor<f64>) {
        let spec: ManifoldSpec = m.parse().unwrap();
        let pt = CotangentPoint::new(x.to_vec(), p.to_vec()).unwrap();
        let bj = BundleJets::new(&spec, &f, &pt, &DiffScheme::jets()).unwrap();
        let oc = koszul_jets(&bj).unwrap();
        (bj.base_data(), commutator_oracle(&bj, &oc), oc.metric.map(Jet::value))
    }

    fn worst(errs: &[(Family, f64)]) -> f64 {
        errs.iter().fold(0.0, |m, (_, e)| m.max(*e))
    }

    #[test]
    fn flat_base_at_zero_section() {
        let (d, oracle, _) = tables("flat", Scaling::One, &[0.1, 0.2], &[0.0, 0.0]);
        // R(E_1bar, E_2bar) E_2bar has E_1bar component 3
        assert!((oracle.r[[2, 2, 3, 3]] - 3.0).abs() < 1e-14);
        assert!((oracle.r.max_abs() - 3.0).abs() < 1e-14);
        let closed = curvature_formula(&d, CurvatureReading::Printed);
        assert!((closed.r[[2, 2, 3, 3]] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn flat_fiber_sectional_curvature_decays() {
        // vertical plane over a flat surface: K = 3 / alpha^2
        for r in [0.0, 0.5, 1.0, 1.5] {
            let (_, oracle, g) = tables("flat", Scaling::One, &[0.1, 0.2], &[0.6 * r, 0.8 * r]);
            let low = oracle.lowered(&g);
            let k = low[[2, 3, 3, 2]] / (g[[2, 2]] * g[[3, 3]] - g[[2, 3]] * g[[2, 3]]);
            let alpha = 1.0 + r * r;
            assert!((k - 3.0 / (alpha * alpha)).abs() < 1e-12, "{r} {k}");
        }
    }

    #[test]
    fn flat_base_alpha_two_coefficient() {
        // (alpha^2 + alpha + 1) / alpha^3 = 7/8 from the g^ij delta^l_m term,
        // minus (alpha - 1) / alpha^3 = 1/8 from delta^l_m p^i p^j
        let (d, oracle, _) = tables("flat", Scaling::One, &[0.0, 0.0], &[1.0, 0.0]);
        let closed = curvature_formula(&d, CurvatureReading::Corrected);
        assert!((closed.r[[3, 3, 2, 2]] - 6.0 / 8.0).abs() < 1e-14);
        assert!((oracle.r[[3, 3, 2, 2]] - 6.0 / 8.0).abs() < 1e-14);
    }

    #[test]
    fn corrected_reading_matches_oracle() {
        let cases: [(&str, Scaling, &[f64], &[f64]); 4] = [
            ("sphere", Scaling::Poly, &[1.1, 0.2], &[0.3, -0.2]),
            ("hyperbolic", Scaling::Exp, &[0.4, 1.3], &[0.9, 0.5]),
            ("polynomial:3", Scaling::Poly, &[0.3, -0.5, 0.7], &[0.6, -0.3, 0.4]),
            ("flat:3", Scaling::Exp, &[0.3, -0.5, 0.7], &[0.6, -0.3, 0.4]),
        ];
        for (m, f, x, p) in cases {
            let (d, oracle, _) = tables(m, f, x, p);
            let corrected = curvature_formula(&d, CurvatureReading::Corrected);
            assert!(worst(&corrected.family_errors(&oracle)) < 1e-12, "{m}");
        }
    }

    #[test]
    fn printed_reading_fails_exactly_where_expected() {
        let (d, oracle, _) = tables("polynomial:3", Scaling::Poly, &[0.3, -0.5, 0.7], &[0.6, -0.3, 0.4]);
        let errs = curvature_formula(&d, CurvatureReading::Printed).family_errors(&oracle);
        for (fam, e) in errs {
            let broken = matches!(fam, Family::HHH | Family::VHH | Family::HVH | Family::VHV | Family::HVV | Family::VVV);
            assert_eq!(e > 1e-6, broken, "{fam:?} {e}");
        }
    }

    #[test]
    fn oracle_symmetries() {
        let (_, oracle, g) = tables("polynomial:2", Scaling::Exp, &[0.3, -0.5], &[0.6, -0.3]);
        assert!(oracle.symmetry_defect(&g) < 1e-12);
        let d = oracle.dim();
        for a in 0..d {
            for c in 0..d {
                for b in 0..d {
                    for e in 0..d {
                        assert!((oracle.r[[a, c, b, e]] + oracle.r[[a, b, c, e]]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn family_classification() {
        assert_eq!(Family::of(2, 0, 1, 1), Family::HHH);
        assert_eq!(Family::of(2, 2, 1, 0), Family::VHH);
        assert_eq!(Family::of(2, 0, 3, 2), Family::HVV);
        assert_eq!(Family::of(2, 3, 2, 2), Family::VVV);
    }
}
