//! Abelian differentials, Abel–Jacobi map, multiplicative periods and the prime
//! form of a Schottky-uniformized M-curve, as truncated Poincaré series and products.
//!
//! Every series is summed over the word table of the [`SchottkyCurve`] in its fixed
//! order. Alongside each value the truncation at word length `L − 1` is tracked so the
//! caller can see how much the last level contributed.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::moebius::{cross_ratio, ExtPoint};
use crate::schottky::{EnumerationMode, SchottkyCurve};

/// Minimum distance between an evaluation point and any enumerated pole.
pub const POLE_GUARD: f64 = 1e-9;

/// Deviation from unit modulus tolerated for the Abel-map factors.
pub const UNIT_FACTOR_TOL: f64 = 1e-8;

fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, 2.0 * PI)
}

/// A value of a truncated series together with the truncation one word-level shorter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncated<T> {
    pub value: T,
    pub previous: T,
}

impl Truncated<Complex64> {
    pub fn tail(&self) -> f64 {
        (self.value - self.previous).norm()
    }
}

/// Formal sum of points with integer multiplicities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Divisor {
    pub terms: Vec<(ExtPoint, i32)>,
}

impl Divisor {
    pub fn new() -> Self {
        Divisor::default()
    }

    pub fn point(p: ExtPoint) -> Self {
        Divisor {
            terms: vec![(p, 1)],
        }
    }

    /// `(y) − (x)`.
    pub fn difference(y: ExtPoint, x: ExtPoint) -> Self {
        Divisor {
            terms: vec![(y, 1), (x, -1)],
        }
    }

    pub fn add(mut self, p: ExtPoint, multiplicity: i32) -> Self {
        self.terms.push((p, multiplicity));
        self
    }

    pub fn degree(&self) -> i32 {
        self.terms.iter().map(|(_, m)| m).sum()
    }

    pub fn negate(&self) -> Self {
        Divisor {
            terms: self.terms.iter().map(|&(p, m)| (p, -m)).collect(),
        }
    }

    /// Splits a degree-zero divisor into pairs `(y_k, x_k)` with `D = Σ (y_k) − (x_k)`.
    ///
    /// Positive and negative points are matched in insertion order.
    pub fn pairs(&self) -> Result<Vec<(ExtPoint, ExtPoint)>> {
        if self.degree() != 0 {
            return Err(Error::InvalidInput(format!(
                "divisor has degree {} (expected 0)",
                self.degree()
            )));
        }
        let expand = |sign: i32| -> Vec<ExtPoint> {
            self.terms
                .iter()
                .filter(|(_, m)| m.signum() == sign)
                .flat_map(|&(p, m)| std::iter::repeat(p).take(m.unsigned_abs() as usize))
                .collect()
        };
        Ok(expand(1).into_iter().zip(expand(-1)).collect())
    }
}

/// Value of the Abel–Jacobi map on a real divisor: a lift in `R^g` and its reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelVector {
    pub lifted: Vec<f64>,
}

impl AbelVector {
    pub fn reduced(&self) -> Vec<f64> {
        self.lifted.iter().map(|t| t.rem_euclid(1.0)).collect()
    }
}

/// Multiplicative periods `q_ij = exp(2π√−1 Ω_ij)` and the period matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodData {
    /// Products as computed (complex; real up to rounding for M-curves).
    pub q: Vec<Vec<Complex64>>,
    /// The same products truncated one word-level shorter.
    pub q_previous: Vec<Vec<Complex64>>,
}

impl PeriodData {
    pub fn genus(&self) -> usize {
        self.q.len()
    }

    /// `Ω = log q / (2π√−1)` on the branch with `Re Ω ∈ (−1/2, 1/2]`.
    pub fn omega(&self) -> Vec<Vec<Complex64>> {
        self.q
            .iter()
            .map(|row| row.iter().map(|q| q.ln() / two_pi_i()).collect())
            .collect()
    }

    /// Real matrix `ln q_ij`, i.e. `2π√−1 Ω` for the purely imaginary period matrix.
    pub fn log_q(&self) -> Vec<Vec<f64>> {
        self.q
            .iter()
            .map(|row| row.iter().map(|q| q.re.ln()).collect())
            .collect()
    }

    /// Largest deviation from the M-curve structure: imaginary parts of `q`,
    /// asymmetry, and `0 < q_ii < 1`. Returns `(max |Im q|, max |q_ij − q_ji|, diag ok)`.
    pub fn structure_defects(&self) -> (f64, f64, bool) {
        let g = self.genus();
        let mut imag: f64 = 0.0;
        let mut asym: f64 = 0.0;
        let mut diag_ok = true;
        for i in 0..g {
            for j in 0..g {
                imag = imag.max(self.q[i][j].im.abs());
                asym = asym.max((self.q[i][j] - self.q[j][i]).norm());
                if self.q[i][j].re <= 0.0 {
                    diag_ok = false;
                }
            }
            if !(self.q[i][i].re > 0.0 && self.q[i][i].re < 1.0) {
                diag_ok = false;
            }
        }
        (imag, asym, diag_ok)
    }
}

/// Abelian functions of one Schottky curve, with per-generator pole tables cached.
#[derive(Debug, Clone)]
pub struct AbelianFunctions {
    curve: SchottkyCurve,
    /// For each generator: `(γα_i, γᾱ_i, word length)` over the coset family.
    coset_poles: Vec<Vec<(Complex64, Complex64, usize)>>,
    /// For each generator: pairs of positions in `coset_poles[i]` related by conjugation.
    conj_orbits: Vec<Vec<(usize, Option<usize>)>>,
    star: Vec<usize>,
}

impl AbelianFunctions {
    pub fn new(curve: SchottkyCurve) -> Result<Self> {
        let g = curve.genus();
        let l = curve.max_word_length();
        let mut coset_poles = Vec::with_capacity(g);
        let mut conj_orbits = Vec::with_capacity(g);
        for i in 0..g {
            let alpha = ExtPoint::Finite(curve.center(i));
            let sel = curve.select(EnumerationMode::Coset(i), l);
            let mut poles = Vec::with_capacity(sel.len());
            for &w in &sel {
                let p = curve.apply_word(w, alpha).finite();
                let q = curve.apply_word(w, alpha.conj()).finite();
                match (p, q) {
                    (Some(p), Some(q)) => poles.push((p, q, curve.words()[w].len())),
                    _ => {
                        return Err(Error::Degenerate(
                            "a group element maps a fixed point to infinity".into(),
                        ))
                    }
                }
            }
            let pos: std::collections::HashMap<usize, usize> =
                sel.iter().enumerate().map(|(k, &w)| (w, k)).collect();
            let mut seen = vec![false; sel.len()];
            let mut orbits = Vec::new();
            for (k, &w) in sel.iter().enumerate() {
                if seen[k] {
                    continue;
                }
                seen[k] = true;
                let cw = curve.words()[w].conjugate();
                let partner = curve
                    .word_index(&cw)
                    .and_then(|idx| pos.get(&idx).copied())
                    .filter(|&m| m != k);
                if let Some(m) = partner {
                    seen[m] = true;
                }
                orbits.push((k, partner));
            }
            coset_poles.push(poles);
            conj_orbits.push(orbits);
        }
        let star = curve.select(EnumerationMode::Star, l);
        Ok(AbelianFunctions {
            curve,
            coset_poles,
            conj_orbits,
            star,
        })
    }

    pub fn curve(&self) -> &SchottkyCurve {
        &self.curve
    }

    pub fn genus(&self) -> usize {
        self.curve.genus()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.genus() {
            return Err(Error::InvalidInput(format!(
                "differential index {i} out of range for genus {}",
                self.genus()
            )));
        }
        Ok(())
    }

    fn guard(z: Complex64, pole: Complex64) -> Result<()> {
        let d = (z - pole).norm();
        if d < POLE_GUARD {
            return Err(Error::PoleProximity {
                point: format!("point {}", ExtPoint::Finite(z)),
                pole: format!("the pole at {}", ExtPoint::Finite(pole)),
                distance: d,
            });
        }
        Ok(())
    }

    /// Density of the normalized first-kind differential `ω_i` against `dz` (0-based `i`).
    pub fn omega_first_kind_truncated(&self, i: usize, z: Complex64) -> Result<Truncated<Complex64>> {
        self.check_index(i)?;
        let l = self.curve.max_word_length();
        let mut full = Complex64::new(0.0, 0.0);
        let mut last = Complex64::new(0.0, 0.0);
        for &(p, q, len) in &self.coset_poles[i] {
            Self::guard(z, p)?;
            Self::guard(z, q)?;
            let term = (z - p).inv() - (z - q).inv();
            if len == l && l > 0 {
                last += term;
            } else {
                full += term;
            }
        }
        let prev = full / two_pi_i();
        Ok(Truncated {
            value: (full + last) / two_pi_i(),
            previous: prev,
        })
    }

    pub fn omega_first_kind(&self, i: usize, z: Complex64) -> Result<Complex64> {
        Ok(self.omega_first_kind_truncated(i, z)?.value)
    }

    /// Density of the normalized third-kind differential with residues `+1` at `x`, `−1` at `y`.
    pub fn omega_third_kind_truncated(
        &self,
        x: ExtPoint,
        y: ExtPoint,
        z: Complex64,
    ) -> Result<Truncated<Complex64>> {
        if x.distance(&y) < POLE_GUARD {
            return Err(Error::Degenerate("third-kind differential with x = y".into()));
        }
        let l = self.curve.max_word_length();
        let mut full = Complex64::new(0.0, 0.0);
        let mut last = Complex64::new(0.0, 0.0);
        for (idx, w) in self.curve.words().iter().enumerate() {
            let mut term = Complex64::new(0.0, 0.0);
            for (p, sign) in [(x, 1.0), (y, -1.0)] {
                if let Some(gp) = self.curve.apply_word(idx, p).finite() {
                    Self::guard(z, gp)?;
                    term += sign * (z - gp).inv();
                }
            }
            if w.len() == l && l > 0 {
                last += term;
            } else {
                full += term;
            }
        }
        Ok(Truncated {
            value: full + last,
            previous: full,
        })
    }

    pub fn omega_third_kind(&self, x: ExtPoint, y: ExtPoint, z: Complex64) -> Result<Complex64> {
        Ok(self.omega_third_kind_truncated(x, y, z)?.value)
    }

    /// Multiplicative periods from the double-coset products.
    ///
    /// Fails with [`Error::NonConvergence`] if the last word level changes some
    /// `q_ij` by more than `tail_tol · |q_ij|`.
    pub fn period_matrix(&self, tail_tol: f64) -> Result<PeriodData> {
        let g = self.genus();
        let l = self.curve.max_word_length();
        let one = Complex64::new(1.0, 0.0);
        let mut q = vec![vec![one; g]; g];
        let mut q_prev = vec![vec![one; g]; g];
        for i in 0..g {
            let ai = ExtPoint::Finite(self.curve.center(i));
            for j in 0..g {
                let aj = ExtPoint::Finite(self.curve.center(j));
                let mut prod = one;
                let mut prod_prev = one;
                for w in self.curve.select(EnumerationMode::DoubleCoset(i, j), l) {
                    let factor = if w == 0 && i == j {
                        Complex64::new(self.curve.data().multipliers[i], 0.0)
                    } else {
                        cross_ratio(
                            ai,
                            ai.conj(),
                            self.curve.apply_word(w, aj),
                            self.curve.apply_word(w, aj.conj()),
                        )?
                    };
                    prod *= factor;
                    if self.curve.words()[w].len() < l || l == 0 {
                        prod_prev *= factor;
                    }
                }
                let change = (prod - prod_prev).norm();
                if change > tail_tol * prod.norm() {
                    return Err(Error::NonConvergence {
                        what: format!("q[{}][{}]", i + 1, j + 1),
                        change,
                        tol: tail_tol,
                    });
                }
                q[i][j] = prod;
                q_prev[i][j] = prod_prev;
            }
        }
        Ok(PeriodData {
            q,
            q_previous: q_prev,
        })
    }

    /// The Abel–Jacobi image of `(p) − (∞)` as a complex vector, each coset term
    /// taken on the principal branch of the logarithm.
    ///
    /// Only meaningful modulo `Z^g` and through degree-zero combinations.
    pub fn abel_point(&self, p: ExtPoint) -> Result<Vec<Complex64>> {
        let z = match p {
            ExtPoint::Infinity => return Ok(vec![Complex64::new(0.0, 0.0); self.genus()]),
            ExtPoint::Finite(z) => z,
        };
        (0..self.genus())
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(a, b, _) in &self.coset_poles[i] {
                    Self::guard(z, a)?;
                    Self::guard(z, b)?;
                    acc += ((z - a) / (z - b)).ln();
                }
                Ok(acc / two_pi_i())
            })
            .collect()
    }

    /// Abel–Jacobi image of an arbitrary degree-zero divisor, summed point by point.
    pub fn abel_divisor(&self, d: &Divisor) -> Result<Vec<Complex64>> {
        if d.degree() != 0 {
            return Err(Error::InvalidInput(format!(
                "Abel–Jacobi map needs degree 0, got {}",
                d.degree()
            )));
        }
        let mut acc = vec![Complex64::new(0.0, 0.0); self.genus()];
        for &(p, m) in &d.terms {
            for (a, v) in acc.iter_mut().zip(self.abel_point(p)?) {
                *a += v * m as f64;
            }
        }
        Ok(acc)
    }

    /// Abel–Jacobi map of a degree-zero divisor supported on the real line.
    ///
    /// Component `i` is `(1/2π) Σ arg` over the factors
    /// `Π_γ [y_k, x_k; γα_i, γᾱ_i]`, grouped into conjugation orbits `{γ, γ̄}` so that
    /// each grouped factor has modulus one. Arguments are principal values summed in
    /// enumeration order, which fixes the lift.
    pub fn abel_map(&self, d: &Divisor) -> Result<AbelVector> {
        let pairs = d.pairs()?;
        for &(y, x) in &pairs {
            for p in [y, x] {
                if let ExtPoint::Finite(z) = p {
                    if z.im.abs() > 1e-12 {
                        return Err(Error::InvalidInput(format!(
                            "abel_map expects real points, got {p}"
                        )));
                    }
                }
            }
        }
        let mut lifted = vec![0.0; self.genus()];
        for (i, t) in lifted.iter_mut().enumerate() {
            for &(y, x) in &pairs {
                let factor = |k: usize| -> Result<Complex64> {
                    let (a, b, _) = self.coset_poles[i][k];
                    cross_ratio(y, x, ExtPoint::Finite(a), ExtPoint::Finite(b))
                };
                for &(k, partner) in &self.conj_orbits[i] {
                    let mut f = factor(k)?;
                    if let Some(m) = partner {
                        f *= factor(m)?;
                    }
                    if (f.norm() - 1.0).abs() > UNIT_FACTOR_TOL {
                        return Err(Error::NonUnitFactor(f.norm()));
                    }
                    *t += f.arg() / (2.0 * PI);
                }
            }
        }
        Ok(AbelVector { lifted })
    }

    /// Coordinate part `P(a, b)` of the prime form: `(a − b) Π* [a, b; γb, γa]`.
    pub fn prime_p_truncated(&self, a: Complex64, b: Complex64) -> Result<Truncated<Complex64>> {
        if (a - b).norm() < POLE_GUARD {
            return Err(Error::Degenerate("prime form at coincident points".into()));
        }
        let l = self.curve.max_word_length();
        let (pa, pb) = (ExtPoint::Finite(a), ExtPoint::Finite(b));
        let mut prod = a - b;
        let mut last = Complex64::new(1.0, 0.0);
        for &w in &self.star {
            let ga = self.curve.apply_word(w, pa);
            let gb = self.curve.apply_word(w, pb);
            for g in [ga, gb] {
                if let Some(z) = g.finite() {
                    Self::guard(a, z)?;
                    Self::guard(b, z)?;
                }
            }
            let f = cross_ratio(pa, pb, gb, ga)?;
            if self.curve.words()[w].len() == l {
                last *= f;
            } else {
                prod *= f;
            }
        }
        Ok(Truncated {
            value: prod * last,
            previous: prod,
        })
    }

    pub fn prime_p(&self, a: Complex64, b: Complex64) -> Result<Complex64> {
        Ok(self.prime_p_truncated(a, b)?.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schottky::SchottkyData;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn functions(centers: Vec<Complex64>, s: Vec<f64>, l: usize) -> AbelianFunctions {
        AbelianFunctions::new(SchottkyCurve::new(SchottkyData::new(centers, s, l)).unwrap()).unwrap()
    }

    #[test]
    fn genus_one_first_kind_is_single_term() {
        for s in [0.01, 0.2, 0.4] {
            let f = functions(vec![c(0.0, 1.0)], vec![s], 6);
            let v = f.omega_first_kind(0, c(0.0, 0.0)).unwrap();
            assert!((v - c(1.0 / PI, 0.0)).norm() < 1e-15, "{v}");
        }
    }

    #[test]
    fn genus_zero_rejects_first_kind_index() {
        let f = functions(vec![], vec![], 4);
        assert!(f.omega_first_kind(0, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn genus_zero_third_kind_and_prime() {
        let f = functions(vec![], vec![], 4);
        let z = c(0.0, 2.0);
        let v = f
            .omega_third_kind(ExtPoint::real(1.0), ExtPoint::real(-1.0), z)
            .unwrap();
        let expected = (z - 1.0).inv() - (z + 1.0).inv();
        assert!((v - expected).norm() < 1e-15);
        assert!(f
            .omega_third_kind(ExtPoint::real(1.0), ExtPoint::real(1.0), z)
            .is_err());
        let p = f.prime_p(c(0.3, 0.1), c(-2.0, 0.5)).unwrap();
        assert_eq!(p, c(2.3, -0.4));
    }

    #[test]
    fn genus_one_period_is_multiplier() {
        for s in [0.01, 0.1, 0.3] {
            let f = functions(vec![c(0.4, 1.3)], vec![s], 6);
            let pd = f.period_matrix(1e-6).unwrap();
            assert!((pd.q[0][0] - c(s, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn genus_one_abel_of_unit_interval() {
        let f = functions(vec![c(0.0, 1.0)], vec![0.2], 6);
        let v = f
            .abel_map(&Divisor::difference(ExtPoint::real(1.0), ExtPoint::real(0.0)))
            .unwrap();
        assert!((v.lifted[0] - 0.25).abs() < 1e-12);
        let v = f
            .abel_map(&Divisor::difference(ExtPoint::real(0.0), ExtPoint::real(1.0)))
            .unwrap();
        assert!((v.lifted[0] + 0.25).abs() < 1e-12);
        assert!((v.reduced()[0] - 0.75).abs() < 1e-12);
        let v = f
            .abel_map(&Divisor::difference(ExtPoint::real(3.0), ExtPoint::real(3.0)))
            .unwrap();
        assert_eq!(v.lifted, vec![0.0]);
    }

    #[test]
    fn abel_map_rejects_bad_divisors() {
        let f = functions(vec![c(0.0, 1.0)], vec![0.2], 4);
        assert!(f.abel_map(&Divisor::point(ExtPoint::real(1.0))).is_err());
        assert!(f
            .abel_map(&Divisor::difference(ExtPoint::new(1.0, 0.5), ExtPoint::real(0.0)))
            .is_err());
    }

    #[test]
    fn two_period_limit_cross_ratio() {
        // q12 → [α1, ᾱ1; α2, ᾱ2] = 1/2 as s → 0
        let mut errs = Vec::new();
        for s in [1e-2, 5e-3, 2.5e-3] {
            let f = functions(vec![c(-1.0, 1.0), c(1.0, 1.0)], vec![s, s], 6);
            let pd = f.period_matrix(1e-6).unwrap();
            errs.push((pd.q[0][1] - c(0.5, 0.0)).norm());
        }
        assert!(errs[0] < 0.05);
        assert!(errs[1] < errs[0] && errs[2] < errs[1]);
        let ratio = errs[0] / errs[1];
        // at least first order; this mirror-symmetric pair converges quadratically
        assert!(ratio > 1.7, "ratio {ratio}");
    }

    #[test]
    fn pole_proximity_is_reported() {
        let f = functions(vec![c(0.0, 1.0)], vec![0.2], 3);
        assert!(matches!(
            f.omega_first_kind(0, c(0.0, 1.0)),
            Err(Error::PoleProximity { .. })
        ));
    }
}
