mod common;

use common::*;
use mcurve_dimers::abelian::AbelianFunctions;
use mcurve_dimers::graph::{abel_degree, build_square_patch, discrete_abel};
use mcurve_dimers::moebius::ExtPoint;
use mcurve_dimers::schottky::{make_generator, SchottkyCurve, SchottkyData};
use mcurve_dimers::theta::ThetaEvaluator;
use num_complex::Complex64;
use proptest::prelude::*;

fn genus2_functions(s1: f64, s2: f64) -> AbelianFunctions {
    AbelianFunctions::new(SchottkyCurve::new(genus2(s1, s2)).unwrap()).unwrap()
}

fn genus2_theta(s1: f64, s2: f64) -> ThetaEvaluator {
    let pd = genus2_functions(s1, s2).period_matrix(f64::INFINITY).unwrap();
    ThetaEvaluator::new(&pd, 1e-14).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generator_fixes_its_centre(x in -3.0..3.0f64, y in 0.1..3.0f64, s in 0.001..0.9f64) {
        let a = Complex64::new(x, y);
        let g = make_generator(a, s).unwrap();
        let fa = g.apply(ExtPoint::Finite(a)).finite().unwrap();
        let fb = g.apply(ExtPoint::Finite(a.conj())).finite().unwrap();
        prop_assert!((fa - a).norm() < 1e-9 * a.norm().max(1.0));
        prop_assert!((fb - a.conj()).norm() < 1e-9 * a.norm().max(1.0));
        prop_assert!((g.determinant() - 1.0).norm() < 1e-12);
        let (centre, radius) = g.isometric_circle().unwrap();
        prop_assert!(centre.im.abs() > radius);
    }

    #[test]
    fn theta_is_periodic_and_real_positive(z1 in -2.0..2.0f64, z2 in -2.0..2.0f64,
                                           m1 in -3i32..3, m2 in -3i32..3,
                                           s1 in 0.01..0.1f64, s2 in 0.01..0.1f64) {
        let th = genus2_theta(s1, s2);
        let v = th.theta_real(&[z1, z2]).unwrap();
        let w = th.theta_real(&[z1 + m1 as f64, z2 + m2 as f64]).unwrap();
        prop_assert!((v - w).norm() < 1e-12 * v.norm());
        prop_assert!(v.re > 0.0 && v.im.abs() < 1e-12 * v.re);
    }

    #[test]
    fn prime_form_is_antisymmetric(ax in -1.5..1.5f64, ay in -0.8..0.8f64,
                                   bx in -1.5..1.5f64, by in -0.8..0.8f64) {
        let f = genus2_functions(0.05, 0.03);
        let (a, b) = (c(ax, ay), c(bx, by));
        prop_assume!((a - b).norm() > 1e-3);
        let pab = f.prime_p(a, b).unwrap();
        let pba = f.prime_p(b, a).unwrap();
        prop_assert!((pab + pba).norm() <= 1e-8 * pab.norm());
    }

    #[test]
    fn discrete_abel_degrees_and_rebasing(w in 1usize..6, h in 1usize..6, pick in 0usize..1000) {
        let (p, _) = build_square_patch(w, h, &[0.0], &[1.0]).unwrap();
        let faces = p.faces();
        let base = faces[0];
        let other = faces[pick % faces.len()];
        let d = discrete_abel(&p, base).unwrap();
        let r = d.rebased(other);
        let shift = d.get(other);
        for (v, x) in p.vertices().iter().enumerate() {
            prop_assert_eq!(d.get(v).degree(), abel_degree(x.kind));
            prop_assert_eq!(&r.get(v).plus(shift, 1), d.get(v));
        }
    }

    #[test]
    fn period_matrix_is_symmetric_imaginary(x1 in -3.0..-1.0f64, y1 in 0.8..2.0f64,
                                            x2 in 1.0..3.0f64, y2 in 0.8..2.0f64,
                                            s1 in 0.01..0.1f64, s2 in 0.01..0.1f64) {
        let d = SchottkyData::new(vec![c(x1, y1), c(x2, y2)], vec![s1, s2], 5);
        let f = AbelianFunctions::new(SchottkyCurve::new(d).unwrap()).unwrap();
        let pd = f.period_matrix(f64::INFINITY).unwrap();
        let (imag, asym, positive) = pd.structure_defects();
        prop_assert!(imag < 1e-8 && asym < 1e-8 && positive, "{imag} {asym}");
    }
}

#[test]
fn shifting_t_by_integers_keeps_weights() {
    let mut r = rng(3);
    let base = square_model(genus2(0.05, 0.05), vec![0.2, 0.6], 3);
    for _ in 0..4 {
        use rand::Rng;
        let m = [r.gen_range(-3i32..=3), r.gen_range(-3i32..=3)];
        let shifted = square_model(genus2(0.05, 0.05), vec![0.2 + m[0] as f64, 0.6 + m[1] as f64], 3);
        for (x, y) in base.weights().unwrap().iter().zip(shifted.weights().unwrap()) {
            assert!((x.value - y.value).norm() < 1e-10 * x.value.norm());
        }
    }
}
