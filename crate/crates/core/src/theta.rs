//! Riemann theta function for a purely imaginary period matrix given by its
//! multiplicative periods, and its logarithmic derivatives.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::abelian::PeriodData;
use crate::error::{Error, Result};

/// Terms larger than this multiple of the result flag an ill-conditioned sum.
pub const CONDITIONING_LIMIT: f64 = 1e12;

/// Smallest theta modulus accepted by [`ThetaEvaluator::dlog_theta`].
pub const THETA_FLOOR: f64 = 1e-12;

/// Lattice sum `Σ_u exp(π√−1 uΩuᵀ + 2π√−1 z·u)` over a box `|u_i| ≤ N`.
///
/// The quadratic term is evaluated as `Π q_ij^{u_i u_j / 2}` with the positive real
/// root, so the genus-one terms are exactly `q^{n²/2}`.
#[derive(Debug, Clone)]
pub struct ThetaEvaluator {
    log_q: Vec<Vec<f64>>,
    accuracy: f64,
    /// Smallest eigenvalue of `−ln q`, the Gaussian decay rate of the terms.
    decay: f64,
    radius: usize,
}

impl ThetaEvaluator {
    pub fn new(periods: &PeriodData, accuracy: f64) -> Result<Self> {
        Self::from_log_q(periods.log_q(), accuracy)
    }

    pub fn from_log_q(log_q: Vec<Vec<f64>>, accuracy: f64) -> Result<Self> {
        let g = log_q.len();
        if !(accuracy > 0.0 && accuracy < 1.0) {
            return Err(Error::InvalidInput(format!("theta accuracy {accuracy}")));
        }
        if log_q.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite period data".into()));
        }
        let decay = if g == 0 {
            f64::INFINITY
        } else {
            let m = DMatrix::from_fn(g, g, |i, j| -0.5 * (log_q[i][j] + log_q[j][i]));
            let eig = m.symmetric_eigenvalues();
            eig.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        if g > 0 && !(decay > 0.0) {
            return Err(Error::InvalidInput(
                "imaginary part of the period matrix is not positive definite".into(),
            ));
        }
        let radius = Self::radius_for(decay, accuracy, 0.0);
        Ok(ThetaEvaluator {
            log_q,
            accuracy,
            decay,
            radius,
        })
    }

    /// `ceil((2πy + √((2πy)² + 2 ln(1/ε) λ)) / λ) + 2`, which reduces to
    /// `ceil(√(2 ln(1/ε)/λ)) + 2` on real arguments.
    fn radius_for(decay: f64, accuracy: f64, imag: f64) -> usize {
        if !decay.is_finite() {
            return 0;
        }
        let b = 2.0 * PI * imag;
        let n = (b + (b * b + 2.0 * (1.0 / accuracy).ln() * decay).sqrt()) / decay;
        n.ceil() as usize + 2
    }

    pub fn genus(&self) -> usize {
        self.log_q.len()
    }

    /// Lattice radius used for real arguments.
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    fn radius_at(&self, z: &[Complex64]) -> usize {
        let imag = z.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        Self::radius_for(self.decay, self.accuracy, imag)
    }

    fn check_len(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.genus() {
            return Err(Error::InvalidInput(format!(
                "theta argument has length {} for genus {}",
                z.len(),
                self.genus()
            )));
        }
        Ok(())
    }

    /// Visits every lattice point of the box in lexicographic order with its term.
    fn lattice_sum<F: FnMut(&[i64], Complex64)>(&self, z: &[Complex64], radius: usize, mut f: F) {
        let g = self.genus();
        let n = radius as i64;
        let mut u = vec![-n; g];
        // reduce real parts: theta is 1-periodic in each real direction
        let z: Vec<Complex64> = z
            .iter()
            .map(|v| Complex64::new(v.re - v.re.round(), v.im))
            .collect();
        loop {
            let mut quad = 0.0;
            let mut lin = Complex64::new(0.0, 0.0);
            for i in 0..g {
                let ui = u[i] as f64;
                quad += 0.5 * self.log_q[i][i] * ui * ui;
                for j in (i + 1)..g {
                    quad += self.log_q[i][j] * ui * u[j] as f64;
                }
                lin += z[i] * ui;
            }
            let term = (Complex64::new(quad, 0.0) + Complex64::new(0.0, 2.0 * PI) * lin).exp();
            f(&u, term);
            // odometer
            let mut k = 0;
            loop {
                if k == g {
                    return;
                }
                if u[k] < n {
                    u[k] += 1;
                    break;
                }
                u[k] = -n;
                k += 1;
            }
        }
    }

    pub fn theta_with_radius(&self, z: &[Complex64], radius: usize) -> Result<Complex64> {
        self.check_len(z)?;
        if self.genus() == 0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let mut sum = Complex64::new(0.0, 0.0);
        let mut largest: f64 = 0.0;
        self.lattice_sum(z, radius, |_, t| {
            sum += t;
            largest = largest.max(t.norm());
        });
        if largest > CONDITIONING_LIMIT * sum.norm() {
            return Err(Error::ThetaConditioning {
                largest,
                value: sum.norm(),
            });
        }
        Ok(sum)
    }

    pub fn theta(&self, z: &[Complex64]) -> Result<Complex64> {
        self.theta_with_radius(z, self.radius_at(z))
    }

    pub fn theta_real(&self, z: &[f64]) -> Result<Complex64> {
        let zc: Vec<Complex64> = z.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.theta(&zc)
    }

    /// Theta together with its full gradient of `log Θ`.
    pub fn theta_and_dlog(&self, z: &[Complex64]) -> Result<(Complex64, Vec<Complex64>)> {
        self.check_len(z)?;
        let g = self.genus();
        if g == 0 {
            return Ok((Complex64::new(1.0, 0.0), Vec::new()));
        }
        let mut sum = Complex64::new(0.0, 0.0);
        let mut grad = vec![Complex64::new(0.0, 0.0); g];
        let mut largest: f64 = 0.0;
        self.lattice_sum(z, self.radius_at(z), |u, t| {
            sum += t;
            largest = largest.max(t.norm());
            for j in 0..g {
                grad[j] += t * (u[j] as f64);
            }
        });
        if largest > CONDITIONING_LIMIT * sum.norm() {
            return Err(Error::ThetaConditioning {
                largest,
                value: sum.norm(),
            });
        }
        if sum.norm() < THETA_FLOOR {
            return Err(Error::ThetaNearZero(sum.norm()));
        }
        let factor = Complex64::new(0.0, 2.0 * PI) / sum;
        Ok((sum, grad.into_iter().map(|v| v * factor).collect()))
    }

    /// `∂ log Θ / ∂z_j` (0-based `j`).
    pub fn dlog_theta(&self, z: &[Complex64], j: usize) -> Result<Complex64> {
        if j >= self.genus() {
            return Err(Error::InvalidInput(format!("derivative index {j} out of range")));
        }
        Ok(self.theta_and_dlog(z)?.1[j])
    }
}

/// Two-term expansion `1 + Σ_i (e^{2π√−1 z_i} + e^{−2π√−1 z_i}) √s_i`.
pub fn theta_order1(multipliers: &[f64], z: &[Complex64]) -> Complex64 {
    let i2pi = Complex64::new(0.0, 2.0 * PI);
    multipliers
        .iter()
        .zip(z)
        .fold(Complex64::new(1.0, 0.0), |acc, (&s, &zi)| {
            acc + ((i2pi * zi).exp() + (-i2pi * zi).exp()) * s.sqrt()
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn genus_one(q: f64) -> ThetaEvaluator {
        ThetaEvaluator::from_log_q(vec![vec![q.ln()]], 1e-16).unwrap()
    }

    fn real(z: &[f64]) -> Vec<Complex64> {
        z.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn genus_zero_is_one() {
        let ev = ThetaEvaluator::from_log_q(vec![], 1e-16).unwrap();
        assert_eq!(ev.theta(&[]).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn genus_one_series_value() {
        // oracle: direct sum of q^{n²/2}
        let q: f64 = 0.04;
        let oracle: f64 = (-30i32..=30).map(|n| q.powf((n * n) as f64 / 2.0)).sum();
        let v = genus_one(q).theta(&real(&[0.0])).unwrap();
        assert!((v.re - oracle).abs() < 1e-15);
        assert!((v.re - 1.403_201_024_013).abs() < 1e-9, "{v}");
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn genus_one_dlog_matches_finite_difference() {
        let ev = genus_one(0.04);
        assert!(ev.dlog_theta(&real(&[0.0]), 0).unwrap().norm() < 1e-14);
        let h = 1e-5;
        let z = 0.3;
        let lt = |x: f64| ev.theta(&real(&[x])).unwrap().ln();
        let fd = (lt(z + h) - lt(z - h)) / (2.0 * h);
        let d = ev.dlog_theta(&real(&[z]), 0).unwrap();
        assert!((d - fd).norm() < 1e-7, "{d} vs {fd}");
    }

    #[test]
    fn order1_examples() {
        assert_eq!(theta_order1(&[0.0, 0.0], &real(&[0.3, 0.1])), Complex64::new(1.0, 0.0));
        let v = theta_order1(&[0.04], &real(&[0.0]));
        assert!((v - Complex64::new(1.4, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn radius_matches_formula_on_real_arguments() {
        let ev = genus_one(0.1);
        let expected = ((2.0 * (1e16f64).ln() / (10f64).ln()).sqrt()).ceil() as usize + 2;
        assert_eq!(ev.radius(), expected);
    }

    #[test]
    fn periodicity_and_quasi_periodicity() {
        let log_q = vec![vec![(0.05f64).ln(), (0.4f64).ln()], vec![(0.4f64).ln(), (0.08f64).ln()]];
        let ev = ThetaEvaluator::from_log_q(log_q.clone(), 1e-16).unwrap();
        let z = vec![Complex64::new(0.17, 0.02), Complex64::new(-0.31, 0.05)];
        let t0 = ev.theta(&z).unwrap();
        for k in 0..2 {
            let mut zk = z.clone();
            zk[k] += 1.0;
            assert!((ev.theta(&zk).unwrap() - t0).norm() < 1e-10 * t0.norm());
            // shift by the k-th column of Ω = ln q / 2πi
            let mut zo = z.clone();
            for (i, v) in zo.iter_mut().enumerate() {
                *v += Complex64::new(0.0, -log_q[i][k] / (2.0 * PI));
            }
            let omega_kk = Complex64::new(0.0, -log_q[k][k] / (2.0 * PI));
            let factor = (Complex64::new(0.0, -PI) * omega_kk - Complex64::new(0.0, 2.0 * PI) * z[k]).exp();
            let lhs = ev.theta(&zo).unwrap();
            assert!((lhs - factor * t0).norm() < 1e-8 * lhs.norm(), "{lhs} vs {}", factor * t0);
        }
    }

    #[test]
    fn truncation_agrees_with_larger_box() {
        let log_q = vec![vec![(0.1f64).ln(), (0.6f64).ln()], vec![(0.6f64).ln(), (0.1f64).ln()]];
        let ev = ThetaEvaluator::from_log_q(log_q, 1e-16).unwrap();
        let z = real(&[0.21, 0.77]);
        let a = ev.theta(&z).unwrap();
        let b = ev.theta_with_radius(&z, ev.radius() + 4).unwrap();
        assert!((a - b).norm() < 1e-14);
    }
}
