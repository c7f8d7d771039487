//! Adaptive Gauss–Kronrod (7, 15) quadrature for complex integrands along segments.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    /// Sum of the Gauss/Kronrod differences over the accepted subintervals.
    pub error_estimate: f64,
    pub evaluations: usize,
}

fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<(Complex64, f64)>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x)? + f(c + x)?;
        kronrod += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    Ok((kronrod * h, ((kronrod - gauss) * h).norm()))
}

/// Integrates `f` over `[a, b]`, bisecting until each piece's error estimate is below its
/// share of `tol`. Fails if the depth cap is reached with the tolerance unmet.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: f64, max_depth: usize) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("quadrature tolerance {tol}")));
    }
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut evaluations = 0;
    let (v0, e0) = gk15(&mut f, a, b)?;
    evaluations += 15;
    // depth-first so that summation order is fixed
    let mut stack = vec![(a, b, v0, e0, 0usize)];
    while let Some((lo, hi, v, e, depth)) = stack.pop() {
        let share = tol * (hi - lo) / (b - a);
        if e <= share || e < 1e-15 * v.norm() {
            value += v;
            error += e;
            continue;
        }
        if depth >= max_depth {
            return Err(Error::Quadrature(format!(
                "error estimate {e:.3e} on [{lo}, {hi}] above {share:.3e} at depth cap {max_depth}"
            )));
        }
        let mid = 0.5 * (lo + hi);
        let (vr, er) = gk15(&mut f, mid, hi)?;
        let (vl, el) = gk15(&mut f, lo, mid)?;
        evaluations += 30;
        stack.push((mid, hi, vr, er, depth + 1));
        stack.push((lo, mid, vl, el, depth + 1));
    }
    Ok(Quadrature {
        value,
        error_estimate: error,
        evaluations,
    })
}

/// Integral of `f(z) dz` along the straight segment from `z0` to `z1`.
pub fn integrate_segment<F>(
    mut f: F,
    z0: Complex64,
    z1: Complex64,
    tol: f64,
    max_depth: usize,
) -> Result<Quadrature>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let dz = z1 - z0;
    integrate(|t| Ok(f(z0 + dz * t)? * dz), 0.0, 1.0, tol, max_depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| Ok(Complex64::new(x.powi(10), -x)), 0.0, 2.0, 1e-12, 10).unwrap();
        assert!((q.value - Complex64::new(2f64.powi(11) / 11.0, -2.0)).norm() < 1e-10);
    }

    #[test]
    fn contour_around_a_pole() {
        // square contour around 0 picks up 2π√−1
        let f = |z: Complex64| Ok(z.inv());
        let corners = [
            Complex64::new(1.0, -1.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(-1.0, 1.0),
            Complex64::new(-1.0, -1.0),
        ];
        let mut total = Complex64::new(0.0, 0.0);
        for k in 0..4 {
            total += integrate_segment(f, corners[k], corners[(k + 1) % 4], 1e-11, 30)
                .unwrap()
                .value;
        }
        assert!((total - Complex64::new(0.0, 2.0 * std::f64::consts::PI)).norm() < 1e-9);
    }

    #[test]
    fn depth_cap_is_reported() {
        let r = integrate(|x| Ok(Complex64::new((x - 0.5).abs().powf(-0.9), 0.0)), 0.0, 1.0, 1e-12, 5);
        assert!(matches!(r, Err(Error::Quadrature(_))));
    }
}
