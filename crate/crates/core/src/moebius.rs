//! Points of the Riemann sphere, Möbius maps and cross-ratios.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A point of the extended complex plane. Infinity is a first-class value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtPoint {
    Finite(Complex64),
    Infinity,
}

impl ExtPoint {
    pub fn new(re: f64, im: f64) -> Self {
        ExtPoint::Finite(Complex64::new(re, im))
    }

    pub fn real(x: f64) -> Self {
        if x.is_infinite() {
            ExtPoint::Infinity
        } else {
            ExtPoint::Finite(Complex64::new(x, 0.0))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtPoint::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            ExtPoint::Finite(z) => Some(z),
            ExtPoint::Infinity => None,
        }
    }

    /// Complex conjugate; infinity is fixed.
    pub fn conj(&self) -> Self {
        match *self {
            ExtPoint::Finite(z) => ExtPoint::Finite(z.conj()),
            ExtPoint::Infinity => ExtPoint::Infinity,
        }
    }

    /// Chordal-free distance used for proximity guards: infinite if exactly one point is infinite.
    pub fn distance(&self, other: &ExtPoint) -> f64 {
        match (self, other) {
            (ExtPoint::Finite(a), ExtPoint::Finite(b)) => (a - b).norm(),
            (ExtPoint::Infinity, ExtPoint::Infinity) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

impl From<Complex64> for ExtPoint {
    fn from(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            ExtPoint::Finite(z)
        } else {
            ExtPoint::Infinity
        }
    }
}

impl fmt::Display for ExtPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtPoint::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            ExtPoint::Infinity => write!(f, "inf"),
        }
    }
}

/// The map `z ↦ (az + b)/(cz + d)`, stored with `ad − bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moebius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Moebius {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Moebius {
            a: one,
            b: zero,
            c: zero,
            d: one,
        }
    }

    /// Builds a map from raw coefficients and rescales it to unit determinant.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        if det.norm() < 1e-300 || !det.is_finite() {
            return Err(Error::Degenerate(format!(
                "Möbius coefficients have determinant {det}"
            )));
        }
        let k = det.sqrt().inv();
        Ok(Moebius {
            a: a * k,
            b: b * k,
            c: c * k,
            d: d * k,
        })
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        Moebius {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// `self ∘ other`, i.e. `other` is applied first.
    pub fn compose(&self, other: &Moebius) -> Self {
        Moebius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn apply(&self, p: ExtPoint) -> ExtPoint {
        match p {
            ExtPoint::Infinity => {
                if self.c == Complex64::new(0.0, 0.0) {
                    ExtPoint::Infinity
                } else {
                    ExtPoint::Finite(self.a / self.c)
                }
            }
            ExtPoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den == Complex64::new(0.0, 0.0) {
                    ExtPoint::Infinity
                } else {
                    ExtPoint::from((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Isometric circle `|cz + d| = 1` as (center, radius); `None` when `c = 0`.
    pub fn isometric_circle(&self) -> Option<(Complex64, f64)> {
        if self.c.norm() == 0.0 {
            None
        } else {
            Some((-self.d / self.c, 1.0 / self.c.norm()))
        }
    }
}

/// The cross-ratio `[a, b; c, d] = ((a − c)(b − d)) / ((a − d)(b − c))`.
///
/// Infinite arguments are handled by cancelling the two factors that contain them.
pub fn cross_ratio(a: ExtPoint, b: ExtPoint, c: ExtPoint, d: ExtPoint) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    // numerator pairs (a,c), (b,d); denominator pairs (a,d), (b,c)
    let diff = |x: ExtPoint, y: ExtPoint| -> Option<Complex64> {
        match (x, y) {
            (ExtPoint::Finite(x), ExtPoint::Finite(y)) => Some(x - y),
            (ExtPoint::Infinity, ExtPoint::Infinity) => Some(Complex64::new(0.0, 0.0)),
            _ => None,
        }
    };
    let mut num = one;
    let mut den = one;
    let mut inf_num = 0;
    let mut inf_den = 0;
    for (x, y) in [(a, c), (b, d)] {
        match diff(x, y) {
            Some(v) => num *= v,
            None => inf_num += 1,
        }
    }
    for (x, y) in [(a, d), (b, c)] {
        match diff(x, y) {
            Some(v) => den *= v,
            None => inf_den += 1,
        }
    }
    let zero = Complex64::new(0.0, 0.0);
    if inf_num > inf_den {
        if den == zero {
            return Err(Error::Degenerate("cross-ratio of the form ∞/0".into()));
        }
        return Ok(Complex64::new(f64::INFINITY, 0.0));
    }
    if inf_den > inf_num {
        return Ok(zero);
    }
    if den == zero {
        if num == zero {
            return Err(Error::Degenerate("cross-ratio of the form 0/0".into()));
        }
        return Ok(Complex64::new(f64::INFINITY, 0.0));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_and_pole_convention() {
        let p = ExtPoint::new(3.0, 2.0);
        assert_eq!(Moebius::identity().apply(p), p);
        let inv = Moebius::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(inv.apply(ExtPoint::Infinity), ExtPoint::new(0.0, 0.0));
        assert_eq!(inv.apply(ExtPoint::new(0.0, 0.0)), ExtPoint::Infinity);
    }

    #[test]
    fn cross_ratio_examples() {
        let r = |x: f64| ExtPoint::real(x);
        let v = cross_ratio(r(0.0), r(1.0), r(2.0), r(3.0)).unwrap();
        assert!((v - c(4.0 / 3.0, 0.0)).norm() < 1e-15);
        let v = cross_ratio(r(5.0), r(-2.0), r(0.5), r(0.5)).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-15);
        let v = cross_ratio(r(1.0), r(0.0), ExtPoint::new(0.0, 1.0), ExtPoint::new(0.0, -1.0))
            .unwrap();
        assert!((v - c(0.0, 1.0)).norm() < 1e-15);
        // infinity cancels out of its two factors
        let v = cross_ratio(ExtPoint::Infinity, r(0.0), r(1.0), r(2.0)).unwrap();
        assert!((v - c(-2.0 / -1.0, 0.0)).norm() < 1e-15);
        assert!(cross_ratio(r(1.0), r(1.0), r(1.0), r(2.0)).is_err());
    }

    fn arb_map() -> impl Strategy<Value = Moebius> {
        prop::array::uniform8(-2.0f64..2.0).prop_filter_map("singular", |v| {
            Moebius::new(c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7]))
                .ok()
                .filter(|_| {
                    let raw = (c(v[0], v[1]) * c(v[6], v[7]) - c(v[2], v[3]) * c(v[4], v[5])).norm();
                    raw > 0.1
                })
        })
    }

    fn arb_point() -> impl Strategy<Value = ExtPoint> {
        (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(x, y)| ExtPoint::new(x, y))
    }

    proptest! {
        #[test]
        fn composition_is_sequential_application(f in arb_map(), g in arb_map(), p in arb_point()) {
            let lhs = f.compose(&g).apply(p);
            let rhs = f.apply(g.apply(p));
            if let (Some(l), Some(r)) = (lhs.finite(), rhs.finite()) {
                if l.norm() < 1e6 {
                    prop_assert!((l - r).norm() <= 1e-12 * l.norm().max(1.0));
                }
            }
        }

        #[test]
        fn cross_ratio_is_moebius_invariant(f in arb_map(), a in arb_point(), b in arb_point(),
                                             cc in arb_point(), d in arb_point()) {
            let pts = [a, b, cc, d];
            for i in 0..4 { for j in (i+1)..4 {
                prop_assume!(pts[i].distance(&pts[j]) > 0.05);
            }}
            let before = cross_ratio(a, b, cc, d).unwrap();
            let imgs: Vec<ExtPoint> = pts.iter().map(|&p| f.apply(p)).collect();
            prop_assume!(imgs.iter().all(|p| p.finite().map_or(false, |z| z.norm() < 1e4)));
            let after = cross_ratio(imgs[0], imgs[1], imgs[2], imgs[3]).unwrap();
            prop_assume!(before.norm() < 1e4);
            prop_assert!((before - after).norm() <= 1e-10 * before.norm().max(1.0));
        }

        #[test]
        fn real_pair_against_conjugates_has_unit_modulus(x in -5.0f64..5.0, y in -5.0f64..5.0,
                                                         re in -3.0f64..3.0, im in 0.1f64..3.0) {
            let a = ExtPoint::new(re, im);
            let v = cross_ratio(ExtPoint::real(y), ExtPoint::real(x), a, a.conj()).unwrap();
            prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }
}
