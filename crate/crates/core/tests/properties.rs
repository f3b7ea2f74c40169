use cotangent::catalog::{sample_points, ManifoldSpec, Scaling};
use cotangent::connection::connection_formula;
use cotangent::curvature::{commutator_oracle, curvature_formula, CurvatureReading};
use cotangent::frame::CotangentPoint;
use cotangent::jets::{DiffScheme, Jet};
use cotangent::metric::{cg_blocks, purity_check};
use cotangent::norden::{
    almost_product_from, phi_closed_form, phi_operator, quasi_kahler_sum, structure_derivative, torsion_of,
    FrameEndomorphism, StructureSample,
};
use proptest::prelude::*;

fn manifold() -> impl Strategy<Value = ManifoldSpec> {
    prop_oneof![
        Just("flat"),
        Just("sphere"),
        Just("hyperbolic"),
        Just("polynomial"),
        Just("polynomial:3"),
    ]
    .prop_map(|m| m.parse().unwrap())
}

fn scaling() -> impl Strategy<Value = Scaling> {
    prop_oneof![Just(Scaling::One), Just(Scaling::Exp), Just(Scaling::Poly)]
}

/// A bundle point inside the chart box with `|p| <= 1.5`.
fn point(spec: &ManifoldSpec, u: &[f64], v: &[f64]) -> CotangentPoint {
    let n = spec.dim;
    let x = (0..n).map(|i| spec.lo[i] + (spec.hi[i] - spec.lo[i]) * u[i]).collect();
    let p: Vec<f64> = (0..n).map(|i| 1.5 * (2.0 * v[i] - 1.0) / (n as f64).sqrt()).collect();
    CotangentPoint::new(x, p).unwrap()
}

fn sample_strategy() -> impl Strategy<Value = (ManifoldSpec, Scaling, CotangentPoint)> {
    (manifold(), scaling(), prop::collection::vec(0.01f64..0.99, 3), prop::collection::vec(0.0f64..1.0, 3))
        .prop_map(|(m, f, u, v)| {
            let pt = point(&m, &u, &v);
            (m, f, pt)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jet_product_rule(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let x = Jet::variable(2, 0, a, 3);
        let y = Jet::variable(2, 1, b, 3);
        let h = &x.sin() * &(&y * &y);
        prop_assert!((h.partial(&[0]) - a.cos() * b * b).abs() < 1e-12);
        prop_assert!((h.partial(&[1]) - 2.0 * a.sin() * b).abs() < 1e-12);
        prop_assert!((h.partial(&[0, 0, 1]) + 2.0 * a.sin() * b).abs() < 1e-12);
        prop_assert!((h.derivative(1).partial(&[1]) - 2.0 * a.sin()).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic_and_in_domain(m in manifold(), seed in any::<u64>(), count in 1usize..6) {
        let a = sample_points(&m, count, seed, 1.5).unwrap();
        prop_assert_eq!(&a, &sample_points(&m, count, seed, 1.5).unwrap());
        prop_assert_eq!(a.len(), count + 2);
        for pt in &a {
            for i in 0..m.dim {
                prop_assert!(pt.x[i] >= m.lo[i] && pt.x[i] <= m.hi[i]);
            }
            prop_assert!(pt.p_norm() <= 1.5 + 1e-12);
        }
    }

    #[test]
    fn structures_are_pure((m, f, pt) in sample_strategy()) {
        let s = StructureSample::new(&m, &f, &pt, &DiffScheme::jets()).unwrap();
        let blocks = cg_blocks(&s.data.g, &s.data.ginv, s.data.f, &s.data.p);
        for j in [FrameEndomorphism::paracomplex(m.dim), FrameEndomorphism::diagonal_lift(m.dim)] {
            prop_assert_eq!(j.square_defect(), 0.0);
            prop_assert_eq!(j.trace(), 0.0);
            prop_assert_eq!(purity_check(&blocks, &j), 0.0);
        }
    }

    #[test]
    fn connection_and_curvature_match_oracles((m, f, pt) in sample_strategy()) {
        let s = StructureSample::new(&m, &f, &pt, &DiffScheme::jets()).unwrap();
        let oracle = s.oracle.table();
        prop_assert!(connection_formula(&s.data).gamma.max_abs_diff(&oracle.gamma) < 1e-9);
        prop_assert!(oracle.metric_defect(&s.metric(), &s.dg()) < 1e-9);
        let r = commutator_oracle(&s.jets, &s.oracle);
        let closed = curvature_formula(&s.data, CurvatureReading::Corrected);
        for (fam, e) in closed.family_errors(&r) {
            prop_assert!(e < 1e-8, "{:?} {}", fam, e);
        }
        prop_assert!(r.symmetry_defect(&s.metric()) < 1e-8);
    }

    #[test]
    fn norden_identities((m, f, pt) in sample_strategy()) {
        let s = StructureSample::new(&m, &f, &pt, &DiffScheme::jets()).unwrap();
        let j = FrameEndomorphism::paracomplex(m.dim);
        let phi = phi_operator(&s, &j);
        prop_assert!(phi.components.max_abs_diff(&phi_closed_form(&s.data).components) < 1e-9);
        prop_assert!(quasi_kahler_sum(&phi) < 1e-9);
        let bar = almost_product_from(&s.oracle.table(), &j);
        prop_assert!(structure_derivative(&bar, &j).max_abs() < 1e-12);
        prop_assert!(torsion_of(&bar, &s.brackets()).antisymmetry_defect() < 1e-12);
        if m.is_flat() {
            prop_assert!(phi.max_abs() < 1e-10);
        }
    }
}
