//! Degeneration of the curve as multipliers tend to zero: subgroup references,
//! convergence scans with fitted orders, and the leading terms of the expansions in
//! `√s_i`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockModel;
use crate::graph::AngleDivisor;
use crate::moebius::{cross_ratio, ExtPoint};
use crate::schottky::SchottkyData;

/// Fits with a larger RMS residual (in natural-log units) are inconclusive.
pub const FIT_RESIDUAL_LIMIT: f64 = 0.1;

/// Scans need at least this many multiplier values.
pub const MIN_SCAN_STEPS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Theta,
    PrimeForm,
    Period,
    Weight,
    Kernel,
}

/// `constant + Σ_i c_i √s_i + Σ_{i,j} c_ij √s_i √s_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesExpansion {
    pub domain: Domain,
    pub constant: Complex64,
    pub first_order: Vec<Complex64>,
    /// Coefficients of `√s_i √s_j`; empty when not computed.
    pub second_order: Vec<Vec<Complex64>>,
}

impl SeriesExpansion {
    fn first(domain: Domain, constant: Complex64, first_order: Vec<Complex64>) -> Self {
        SeriesExpansion {
            domain,
            constant,
            first_order,
            second_order: Vec::new(),
        }
    }

    pub fn evaluate(&self, s: &[f64]) -> Complex64 {
        let r: Vec<f64> = s.iter().map(|x| x.sqrt()).collect();
        let mut v = self.constant;
        for (c, x) in self.first_order.iter().zip(&r) {
            v += c * x;
        }
        for (i, row) in self.second_order.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                v += c * r[i] * r[j];
            }
        }
        v
    }
}

/// Schottky data of the subgroup generated by the generators not in `removed`
/// (0-based); the numerical stand-in for the normalization of the degenerate curve.
pub fn subgroup_reference(data: &SchottkyData, removed: &[usize]) -> SchottkyData {
    let keep: Vec<usize> = (0..data.genus()).filter(|i| !removed.contains(i)).collect();
    SchottkyData::new(
        keep.iter().map(|&i| data.centers[i]).collect(),
        keep.iter().map(|&i| data.multipliers[i]).collect(),
        data.max_word_length,
    )
}

/// Copy of `data` with the multipliers of `indices` replaced by `s`.
pub fn scaled(data: &SchottkyData, indices: &[usize], s: f64) -> SchottkyData {
    let mut m = data.multipliers.clone();
    for &i in indices {
        m[i] = s;
    }
    data.with_multipliers(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub s: f64,
    pub value: Complex64,
    pub abs_diff: f64,
}

/// Differences to a limit along `s_k = s₀ 2^{−k}` and the fitted power of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitScan {
    pub rows: Vec<ScanRow>,
    pub order: f64,
    pub fit_residual: f64,
    pub conclusive: bool,
}

/// Least-squares slope of `ln |Δ|` against `ln s` and the RMS residual of the fit.
pub fn fit_order(s: &[f64], diffs: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = s
        .iter()
        .zip(diffs)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&s, &d)| (s.ln(), d.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return (f64::NAN, f64::INFINITY);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    (slope, rms)
}

/// Runs `quantity` at `s_k = s₀ 2^{−k}`, `k = 0..steps`; `quantity` returns the value
/// and its distance to the limit.
pub fn limit_scan<F>(quantity: F, s0: f64, steps: usize) -> Result<LimitScan>
where
    F: Fn(f64) -> Result<(Complex64, f64)>,
{
    let svals = scan_points(s0, steps)?;
    let rows = svals
        .iter()
        .map(|&s| {
            let (value, abs_diff) = quantity(s)?;
            Ok(ScanRow { s, value, abs_diff })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish_scan(rows))
}

/// The multiplier sequence of a scan.
pub fn scan_points(s0: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < MIN_SCAN_STEPS {
        return Err(Error::InvalidInput(format!(
            "a convergence scan needs at least {MIN_SCAN_STEPS} steps, got {steps}"
        )));
    }
    if !(s0 > 0.0 && s0 < 1.0) {
        return Err(Error::InvalidInput(format!("initial multiplier {s0} not in (0, 1)")));
    }
    Ok((0..steps).map(|k| s0 * 0.5f64.powi(k as i32)).collect())
}

/// Fits the order of already evaluated rows.
pub fn finish_scan(rows: Vec<ScanRow>) -> LimitScan {
    let s: Vec<f64> = rows.iter().map(|r| r.s).collect();
    let d: Vec<f64> = rows.iter().map(|r| r.abs_diff).collect();
    let (order, fit_residual) = fit_order(&s, &d);
    LimitScan {
        rows,
        order,
        fit_residual,
        conclusive: order.is_finite() && fit_residual <= FIT_RESIDUAL_LIMIT,
    }
}

fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, 2.0 * PI)
}

/// `Π_p ((p − α_i)/(p − ᾱ_i))^{m_p}`, the exponentiated Abel–Jacobi map of the empty
/// group for a degree-zero divisor of track angles.
fn unit_factor(model: &FockModel, d: &AngleDivisor, i: usize, extra: Option<Complex64>) -> Complex64 {
    let a = model.functions().curve().center(i);
    let mut acc = Complex64::new(1.0, 0.0);
    for (&t, &m) in &d.0 {
        let p = Complex64::new(model.angles().angle[t], 0.0);
        acc *= ((p - a) / (p - a.conj())).powi(m);
    }
    if let Some(u) = extra {
        acc *= (u - a) / (u - a.conj());
    }
    acc
}

/// Leading terms of `Θ(z) = 1 + Σ_i (e^{2π√−1 z_i} + e^{−2π√−1 z_i}) √s_i + ⋯`.
pub fn theta_series(z: &[Complex64]) -> SeriesExpansion {
    SeriesExpansion::first(
        Domain::Theta,
        Complex64::new(1.0, 0.0),
        z.iter()
            .map(|&zi| (two_pi_i() * zi).exp() + (-two_pi_i() * zi).exp())
            .collect(),
    )
}

/// `P(a, b) = (a − b)(1 + Σ_i [a, α_i; b, ᾱ_i][a, ᾱ_i; b, α_i] s_i) + O(s²)`.
pub fn prime_series(centers: &[Complex64], a: Complex64, b: Complex64) -> Result<SeriesExpansion> {
    let g = centers.len();
    let mut second = vec![vec![Complex64::new(0.0, 0.0); g]; g];
    let (pa, pb) = (ExtPoint::Finite(a), ExtPoint::Finite(b));
    for (i, &c) in centers.iter().enumerate() {
        let (al, ab) = (ExtPoint::Finite(c), ExtPoint::Finite(c.conj()));
        second[i][i] = (a - b) * cross_ratio(pa, al, pb, ab)? * cross_ratio(pa, ab, pb, al)?;
    }
    Ok(SeriesExpansion {
        domain: Domain::PrimeForm,
        constant: a - b,
        first_order: vec![Complex64::new(0.0, 0.0); g],
        second_order: second,
    })
}

/// Leading behaviour of `q_ij`: `s_i` on the diagonal, `[α_i, ᾱ_i; α_j, ᾱ_j]` off it.
pub fn period_series(centers: &[Complex64], i: usize, j: usize) -> Result<SeriesExpansion> {
    let g = centers.len();
    let zero = Complex64::new(0.0, 0.0);
    if i == j {
        let mut second = vec![vec![zero; g]; g];
        second[i][i] = Complex64::new(1.0, 0.0);
        return Ok(SeriesExpansion {
            domain: Domain::Period,
            constant: zero,
            first_order: vec![zero; g],
            second_order: second,
        });
    }
    let (ai, aj) = (ExtPoint::Finite(centers[i]), ExtPoint::Finite(centers[j]));
    Ok(SeriesExpansion::first(
        Domain::Period,
        cross_ratio(ai, ai.conj(), aj, aj.conj())?,
        vec![zero; g],
    ))
}

/// First-order expansion of the weight of `edge` under full degeneration:
/// `(β − α)(1 − Σ_i (X_i(f) + X_i(f)^{−1} + X_i(f') + X_i(f')^{−1}) √s_i)` with
/// `X_i(x) = e^{2π√−1 t_i} Π_p ((p − α_i)/(p − ᾱ_i))^{m_p}` over `d̃(x) = Σ m_p (p)`.
pub fn weight_order1(model: &FockModel, edge: usize) -> SeriesExpansion {
    let q = model.patch().quads()[edge];
    let (a, b) = (model.angles().angle[q.alpha], model.angles().angle[q.beta]);
    let k0 = Complex64::new(b - a, 0.0);
    let coeffs = (0..model.genus())
        .map(|i| {
            let phase = (two_pi_i() * model.t()[i]).exp();
            let xf = phase * unit_factor(model, model.abel().get(q.f), i, None);
            let xfp = phase * unit_factor(model, model.abel().get(q.f_prime), i, None);
            -k0 * (xf + xf.inv() + xfp + xfp.inv())
        })
        .collect();
    SeriesExpansion::first(Domain::Weight, k0, coeffs)
}

/// First-order expansion of `g_{f,w}(u)` for adjacent `f, w` under full degeneration:
/// `(1/(u − β))(1 + Σ_i (Y_i + Y_i^{−1}) √s_i)` with
/// `Y_i = e^{2π√−1 t_i} Π_p ((p − α_i)/(p − ᾱ_i))^{m_p}` over `(u) + d̃(w) = Σ m_p (p)`.
pub fn kernel_order1(model: &FockModel, f: usize, w: usize, u: Complex64) -> Result<SeriesExpansion> {
    let beta = model.patch().crossing_track(f, w).ok_or_else(|| {
        Error::InvalidInput("kernel_order1 needs a face and an adjacent white vertex".into())
    })?;
    let lead = (u - Complex64::new(model.angles().angle[beta], 0.0)).inv();
    let dw = model.abel().get(w);
    let coeffs = (0..model.genus())
        .map(|i| {
            let x = unit_factor(model, dw, i, Some(u));
            let y = (two_pi_i() * model.t()[i]).exp() * x;
            lead * (y + y.inv())
        })
        .collect();
    Ok(SeriesExpansion::first(Domain::Kernel, lead, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_power() {
        let s: Vec<f64> = (0..6).map(|k| 0.04 * 0.5f64.powi(k)).collect();
        let d: Vec<f64> = s.iter().map(|x| 3.0 * x.sqrt()).collect();
        let (p, r) = fit_order(&s, &d);
        assert!((p - 0.5).abs() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn scans_need_four_steps() {
        assert!(scan_points(0.04, 3).is_err());
        assert_eq!(scan_points(0.04, 4).unwrap().len(), 4);
        assert!(scan_points(1.5, 6).is_err());
    }

    #[test]
    fn series_at_zero_is_the_constant() {
        let e = theta_series(&[Complex64::new(0.3, 0.0), Complex64::new(0.1, 0.0)]);
        assert_eq!(e.evaluate(&[0.0, 0.0]), Complex64::new(1.0, 0.0));
        let c = [Complex64::new(0.0, 1.0)];
        let p = prime_series(&c, Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0)).unwrap();
        assert_eq!(p.evaluate(&[0.0]), Complex64::new(3.0, 0.0));
    }

    #[test]
    fn subgroup_removes_generators() {
        let d = SchottkyData::new(
            vec![Complex64::new(-2.0, 1.0), Complex64::new(2.0, 1.0)],
            vec![0.1, 0.2],
            5,
        );
        assert_eq!(subgroup_reference(&d, &[0, 1]).genus(), 0);
        assert_eq!(subgroup_reference(&d, &[]), d);
        let r = subgroup_reference(&d, &[0]);
        assert_eq!(r.multipliers, vec![0.2]);
        assert_eq!(r.centers, vec![Complex64::new(2.0, 1.0)]);
    }
}
