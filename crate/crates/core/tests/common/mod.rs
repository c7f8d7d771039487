#![allow(dead_code)]

use mcurve_dimers::fock::FockModel;
use mcurve_dimers::graph::{build_square_patch, square_default_angles};
use mcurve_dimers::schottky::SchottkyData;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn genus0() -> SchottkyData {
    SchottkyData::new(vec![], vec![], 0)
}

/// Center far enough from the unit-height test region that the discs stay small.
pub fn genus1(s: f64) -> SchottkyData {
    SchottkyData::new(vec![c(0.3, 2.0)], vec![s], 10)
}

pub fn genus2(s1: f64, s2: f64) -> SchottkyData {
    SchottkyData::new(vec![c(-2.0, 1.0), c(2.0, 1.0)], vec![s1, s2], 6)
}

pub fn square_model(data: SchottkyData, t: Vec<f64>, n: usize) -> FockModel {
    let (patch, _) = build_square_patch(n, n, &[0.0], &[10.0]).unwrap();
    let angles = square_default_angles(&patch);
    let base = patch.find(&format!("F({},{})", n / 2, n / 2 - 1)).unwrap();
    FockModel::from_data(data, 1e-15, t, patch, angles, base).unwrap()
}

/// Point of the upper half-plane away from the angles and the isometric discs above.
pub fn test_point(r: &mut ChaCha8Rng) -> Complex64 {
    c(r.gen_range(-1.5..1.5), r.gen_range(0.2..0.8))
}
