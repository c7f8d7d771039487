mod common;

use common::*;
use mcurve_dimers::fock::FockModel;
use mcurve_dimers::graph::*;

#[test]
fn two_by_two_square_patch() {
    let (p, a) = build_square_patch(2, 2, &[0.0], &[1.0]).unwrap();
    assert_eq!(p.tracks().len(), 4);
    assert_eq!(a.angle.len(), 4);
    assert_eq!(p.boundary().len(), 8);
    assert!(build_square_patch(0, 2, &[0.0], &[1.0]).is_err());
}

#[test]
fn monotone_families_are_accepted_by_the_builder() {
    let v: Vec<f64> = (0..6).map(f64::from).collect();
    let h: Vec<f64> = (10..16).map(f64::from).collect();
    let (p, a) = build_square_patch(6, 6, &v, &h).unwrap();
    let report = check_angle_map(&p, &a);
    // monotone families are necessary, not sufficient: this map fails the cyclic test
    assert!(!report.pass);
    assert!(report.equal_pairs.is_empty());
    assert!(check_angle_map(&p, &square_default_angles(&p)).pass);
}

#[test]
fn honeycomb_patches() {
    let (p, a) = build_honeycomb_patch(1, 1, [&[0.0], &[1.0], &[2.0]]).unwrap();
    assert_eq!(p.tracks().len(), 3);
    assert!(check_angle_map(&p, &a).pass);
    assert!(build_honeycomb_patch(2, 2, [&[0.0], &[1.0], &[1.0]]).is_err());
    let (p, a) = build_honeycomb_patch(4, 4, [&[-1.0], &[0.5], &[3.0]]).unwrap();
    let r = check_angle_map(&p, &a);
    assert!(r.pass, "{r}");
}

#[test]
fn one_by_one_patch_passes_vacuously() {
    let (p, a) = build_square_patch(1, 1, &[0.0], &[1.0]).unwrap();
    let r = check_angle_map(&p, &a);
    assert!(r.pass);
    assert_eq!(r.triples_checked, 0);
}

#[test]
fn abel_map_closes_around_every_quad() {
    let (p, _) = build_square_patch(5, 4, &[0.0], &[1.0]).unwrap();
    let d = discrete_abel(&p, p.faces()[2]).unwrap();
    for q in p.quads() {
        let steps = [(q.b, q.f), (q.f, q.w), (q.w, q.f_prime), (q.f_prime, q.b)];
        let mut acc = AngleDivisor::default();
        for (x, y) in steps {
            acc = acc.plus(&d.get(y).plus(d.get(x), -1), 1);
        }
        assert!(acc.is_empty(), "{acc:?}");
        assert_eq!(d.get(q.b), &d.get(q.f).plus(&single(q.alpha), 1));
        assert_eq!(d.get(q.w), &d.get(q.f).plus(&single(q.beta), -1));
    }
}

fn single(t: usize) -> AngleDivisor {
    let mut d = AngleDivisor::default();
    d.add(t, 1);
    d
}

#[test]
fn rebasing_shifts_face_abel_vectors_by_a_constant() {
    let build = |base: &str| {
        let (patch, _) = build_square_patch(4, 4, &[0.0], &[10.0]).unwrap();
        let angles = square_default_angles(&patch);
        let f = patch.find(base).unwrap();
        FockModel::from_data(genus2(0.05, 0.05), 1e-15, vec![0.3, 0.7], patch, angles, f).unwrap()
    };
    let (a, b) = (build("F(1,2)"), build("F(3,2)"));
    let faces = a.patch().faces();
    let shift: Vec<_> = a
        .vertex_aj(faces[0])
        .iter()
        .zip(b.vertex_aj(faces[0]))
        .map(|(x, y)| x - y)
        .collect();
    for f in faces {
        for ((x, y), s) in a.vertex_aj(f).iter().zip(b.vertex_aj(f)).zip(&shift) {
            assert!((x - y - s).norm() < 1e-10);
        }
    }
}

#[test]
fn custom_patch_with_closed_track_is_rejected() {
    let text = format!("{CUSTOM_HEADER}\nB b\nW w\nE w b x x\nT x 0 0\n");
    assert!(parse_custom_patch(&text).is_err());
}
