//! Fock weights on a minimal graph patch, the kernel forms built from them, the
//! residual checks of the kernel relations, and the inverse by contour integration.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::abelian::{AbelianFunctions, POLE_GUARD};
use crate::error::{Error, Result};
use crate::graph::{discrete_abel, AngleDivisor, AngleMap, DiscreteAbelMap, MinimalGraphPatch, VertexKind};
use crate::moebius::ExtPoint;
use crate::quadrature::{integrate_segment, Quadrature};
use crate::schottky::{SchottkyCurve, SchottkyData};
use crate::theta::ThetaEvaluator;

/// Minimum distance from the crossing point of an inverse path to any angle.
pub const CROSSING_GUARD: f64 = 1e-6;

/// Depth cap of the adaptive quadrature.
pub const QUADRATURE_DEPTH: usize = 30;

fn c0() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Weight of one edge together with the data it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeight {
    pub edge: usize,
    pub w: usize,
    pub b: usize,
    pub value: Complex64,
    pub alpha: f64,
    pub beta: f64,
    pub face: usize,
    pub face_prime: usize,
}

/// Relative residuals of the right and left kernel relations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelResidual {
    pub right: f64,
    pub left: f64,
    pub rows: usize,
}

/// One entry of the inverse operator and its quadrature diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseEntry {
    pub b: usize,
    pub w: usize,
    pub u0: Complex64,
    pub crossing: f64,
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Alternating weight product around one face.
#[derive(Debug, Clone, PartialEq)]
pub struct FacePhase {
    pub face: usize,
    pub degree: usize,
    pub argument: f64,
    pub reference_argument: f64,
    pub pass: bool,
    /// Whether the argument is `(k − 1)π` for a face of degree `2k`.
    pub standard_sign: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KasteleynReport {
    pub faces: Vec<FacePhase>,
    pub pass: bool,
}

/// Fock's adjacency operator on a patch for one curve and one parameter `t̃`.
#[derive(Debug, Clone)]
pub struct FockModel {
    functions: AbelianFunctions,
    theta: ThetaEvaluator,
    t: Vec<f64>,
    patch: MinimalGraphPatch,
    angles: AngleMap,
    abel: DiscreteAbelMap,
    /// Abel–Jacobi image of each lifted angle, based at `∞`.
    track_aj: Vec<Vec<Complex64>>,
    /// Abel–Jacobi image of `d̃(x)` for every quad-graph vertex, based at `∞`.
    vertex_aj: Vec<Vec<Complex64>>,
}

impl FockModel {
    pub fn new(
        functions: AbelianFunctions,
        theta: ThetaEvaluator,
        t: Vec<f64>,
        patch: MinimalGraphPatch,
        angles: AngleMap,
        base_face: usize,
    ) -> Result<Self> {
        let g = functions.genus();
        if t.len() != g || theta.genus() != g {
            return Err(Error::InvalidInput(format!(
                "parameter of length {} for genus {g}",
                t.len()
            )));
        }
        if angles.angle.len() != patch.tracks().len() {
            return Err(Error::AngleMap("one angle per track is required".into()));
        }
        if let Some(k) = angles.angle.iter().position(|a| !a.is_finite()) {
            return Err(Error::AngleMap(format!(
                "track {} has angle ∞, which the weights cannot use in the standard chart",
                patch.tracks()[k].label
            )));
        }
        let abel = discrete_abel(&patch, base_face)?;
        let mut track_aj = Vec::with_capacity(angles.angle.len());
        for (k, &a) in angles.angle.iter().enumerate() {
            let mut v = functions.abel_point(ExtPoint::real(a))?;
            let turns = angles.winding(k) as f64;
            for x in v.iter_mut() {
                *x += turns;
            }
            track_aj.push(v);
        }
        let vertex_aj = abel
            .values
            .iter()
            .map(|d| divisor_aj(&track_aj, d, g))
            .collect();
        Ok(FockModel {
            functions,
            theta,
            t,
            patch,
            angles,
            abel,
            track_aj,
            vertex_aj,
        })
    }

    /// Builds the curve, its periods and theta evaluator from Schottky data.
    ///
    /// The periods are computed without a tail check; callers that need one use
    /// [`AbelianFunctions::period_matrix`] directly.
    pub fn from_data(
        data: SchottkyData,
        theta_accuracy: f64,
        t: Vec<f64>,
        patch: MinimalGraphPatch,
        angles: AngleMap,
        base_face: usize,
    ) -> Result<Self> {
        let functions = AbelianFunctions::new(SchottkyCurve::new(data)?)?;
        let theta = ThetaEvaluator::new(&functions.period_matrix(f64::INFINITY)?, theta_accuracy)?;
        Self::new(functions, theta, t, patch, angles, base_face)
    }

    pub fn genus(&self) -> usize {
        self.t.len()
    }

    pub fn patch(&self) -> &MinimalGraphPatch {
        &self.patch
    }

    pub fn angles(&self) -> &AngleMap {
        &self.angles
    }

    pub fn abel(&self) -> &DiscreteAbelMap {
        &self.abel
    }

    pub fn functions(&self) -> &AbelianFunctions {
        &self.functions
    }

    pub fn theta_evaluator(&self) -> &ThetaEvaluator {
        &self.theta
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    /// Abel–Jacobi vector of `d̃(x)`.
    pub fn vertex_aj(&self, x: usize) -> &[Complex64] {
        &self.vertex_aj[x]
    }

    pub fn track_aj(&self, t: usize) -> &[Complex64] {
        &self.track_aj[t]
    }

    fn shifted(&self, sign: f64, v: &[Complex64]) -> Vec<Complex64> {
        self.t.iter().zip(v).map(|(&t, &x)| t * sign + x).collect()
    }

    /// `Θ(t̃ + d̃(f))` for a face.
    pub fn face_theta(&self, f: usize) -> Result<Complex64> {
        self.theta.theta(&self.shifted(1.0, &self.vertex_aj[f]))
    }

    fn prime(&self, a: Complex64, b: Complex64) -> Result<Complex64> {
        self.functions.prime_p(a, b)
    }

    fn angle(&self, t: usize) -> Complex64 {
        Complex64::new(self.angles.angle[t], 0.0)
    }

    /// `K_{w,b} = P(β, α) / (Θ(t̃ + d̃(f)) Θ(t̃ + d̃(f')))` for the edge with index `edge`.
    pub fn weight(&self, edge: usize) -> Result<EdgeWeight> {
        let q = self.patch.quads()[edge];
        let (a, b) = (self.angles.angle[q.alpha], self.angles.angle[q.beta]);
        if a == b {
            return Err(Error::AngleMap(format!(
                "edge {}–{} is crossed by two tracks with the same angle {a}",
                self.patch.vertex(q.w).label,
                self.patch.vertex(q.b).label
            )));
        }
        let th = self.face_theta(q.f)? * self.face_theta(q.f_prime)?;
        if th.norm() < crate::theta::THETA_FLOOR {
            return Err(Error::ThetaNearZero(th.norm()));
        }
        let value = self.prime(self.angle(q.beta), self.angle(q.alpha))? / th;
        Ok(EdgeWeight {
            edge,
            w: q.w,
            b: q.b,
            value,
            alpha: a,
            beta: b,
            face: q.f,
            face_prime: q.f_prime,
        })
    }

    pub fn weights(&self) -> Result<Vec<EdgeWeight>> {
        (0..self.patch.quads().len()).map(|k| self.weight(k)).collect()
    }

    fn check_u(&self, u: Complex64) -> Result<()> {
        for &a in &self.angles.angle {
            let d = (u - Complex64::new(a, 0.0)).norm();
            if d < POLE_GUARD {
                return Err(Error::PoleProximity {
                    point: format!("point {}", ExtPoint::Finite(u)),
                    pole: format!("the pole at angle {a}"),
                    distance: d,
                });
            }
        }
        Ok(())
    }

    /// Theta factor attached to a vertex: `Θ(t̃ + ũ + d̃(w))` for white vertices,
    /// `1/Θ(−t̃ + ũ − d̃(b))` for black vertices and `1` for faces.
    fn vertex_factor(&self, x: usize, u_aj: &[Complex64]) -> Result<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        match self.patch.vertex(x).kind {
            VertexKind::Face => Ok(one),
            VertexKind::White => {
                let z: Vec<Complex64> = self
                    .t
                    .iter()
                    .zip(u_aj)
                    .zip(&self.vertex_aj[x])
                    .map(|((&t, &u), &d)| t + u + d)
                    .collect();
                self.theta.theta(&z)
            }
            VertexKind::Black => {
                let z: Vec<Complex64> = self
                    .t
                    .iter()
                    .zip(u_aj)
                    .zip(&self.vertex_aj[x])
                    .map(|((&t, &u), &d)| -t + u - d)
                    .collect();
                let th = self.theta.theta(&z)?;
                if th.norm() < crate::theta::THETA_FLOOR {
                    return Err(Error::ThetaNearZero(th.norm()));
                }
                Ok(th.inv())
            }
        }
    }

    fn prime_power(&self, u: Complex64, d: &AngleDivisor) -> Result<Complex64> {
        let mut acc = Complex64::new(1.0, 0.0);
        for (&t, &m) in &d.0 {
            let p = self.prime(u, self.angle(t))?;
            acc *= p.powi(m);
        }
        Ok(acc)
    }

    /// `g_{x,y}(ũ)` in closed form: the theta factors of the endpoints times
    /// `Π_T P(u, α_T)^{m_T}` with `Σ m_T (α̃_T) = d̃(y) − d̃(x)`.
    pub fn kernel_form(&self, x: usize, y: usize, u: Complex64) -> Result<Complex64> {
        if x == y {
            return Ok(Complex64::new(1.0, 0.0));
        }
        self.check_u(u)?;
        let u_aj = self.functions.abel_point(ExtPoint::Finite(u))?;
        let d = self.abel.get(y).plus(self.abel.get(x), -1);
        let hy = self.vertex_factor(y, &u_aj)?;
        let hx = self.vertex_factor(x, &u_aj)?;
        Ok(hy / hx * self.prime_power(u, &d)?)
    }

    /// One step of a kernel form between neighbours in the quad-graph.
    fn kernel_step(&self, x: usize, y: usize, u: Complex64, u_aj: &[Complex64]) -> Result<Complex64> {
        let t = self.patch.crossing_track(x, y).ok_or_else(|| {
            Error::InvalidInput(format!(
                "{} and {} are not neighbours in the quad-graph",
                self.patch.vertex(x).label,
                self.patch.vertex(y).label
            ))
        })?;
        let (primal, forward) = if self.patch.vertex(x).kind == VertexKind::Face { (y, true) } else { (x, false) };
        let e = self.prime(u, self.angle(t))?;
        // g_{f,w} = Θ(t̃ + ũ + d̃(w)) / E(ũ, β̃),  g_{b,f} = Θ(−t̃ + ũ − d̃(b)) / E(ũ, α̃)
        let (num, is_fw) = match self.patch.vertex(primal).kind {
            VertexKind::White => (self.vertex_factor(primal, u_aj)?, true),
            _ => (self.vertex_factor(primal, u_aj)?.inv(), false),
        };
        let g = num / e;
        Ok(match (is_fw, forward) {
            (true, true) => g,       // f → w
            (true, false) => g.inv(), // w → f
            (false, false) => g,      // b → f
            (false, true) => g.inv(), // f → b
        })
    }

    /// `g_{x,y}(ũ)` as the product of elementary factors along a quad-graph path.
    pub fn kernel_form_along(&self, path: &[usize], u: Complex64) -> Result<Complex64> {
        self.check_u(u)?;
        let u_aj = self.functions.abel_point(ExtPoint::Finite(u))?;
        let mut acc = Complex64::new(1.0, 0.0);
        for win in path.windows(2) {
            acc *= self.kernel_step(win[0], win[1], u, &u_aj)?;
        }
        Ok(acc)
    }

    /// Relative residuals `|Σ_b K_{w,b} g_{b,x}(u)| / max_b |K_{w,b} g_{b,x}(u)|` over
    /// interior white vertices, and the left analogue over interior black vertices.
    pub fn check_kernel(&self, u: Complex64, x: usize, weights: &[EdgeWeight]) -> Result<KernelResidual> {
        let mut right: f64 = 0.0;
        let mut left: f64 = 0.0;
        let mut rows = 0;
        let mut cache: std::collections::HashMap<usize, Complex64> = Default::default();
        let mut form = |v: usize, to_x: bool| -> Result<Complex64> {
            let key = v * 2 + to_x as usize;
            if let Some(&g) = cache.get(&key) {
                return Ok(g);
            }
            let g = if to_x {
                self.kernel_form(v, x, u)?
            } else {
                self.kernel_form(x, v, u)?
            };
            cache.insert(key, g);
            Ok(g)
        };
        for w in self.patch.whites() {
            if !self.patch.is_interior(w) {
                continue;
            }
            let mut sum = c0();
            let mut big: f64 = 0.0;
            for &e in self.patch.edges_at(w) {
                let term = weights[e].value * form(weights[e].b, true)?;
                sum += term;
                big = big.max(term.norm());
            }
            right = right.max(sum.norm() / big);
            rows += 1;
        }
        for b in self.patch.blacks() {
            if !self.patch.is_interior(b) {
                continue;
            }
            let mut sum = c0();
            let mut big: f64 = 0.0;
            for &e in self.patch.edges_at(b) {
                let term = form(weights[e].w, false)? * weights[e].value;
                sum += term;
                big = big.max(term.norm());
            }
            left = left.max(sum.norm() / big);
            rows += 1;
        }
        Ok(KernelResidual { right, left, rows })
    }

    /// Both sides of the identity
    /// `K_{w,b} g_{b,w}(u) = ω_{β,α}(u) + Σ_j (∂_j log Θ(t̃+d̃(f)) − ∂_j log Θ(t̃+d̃(f'))) ω_j(u)`.
    pub fn identity_35_sides(&self, edge: usize, u: Complex64) -> Result<(Complex64, Complex64)> {
        let q = self.patch.quads()[edge];
        let k = self.weight(edge)?.value;
        let lhs = k * self.kernel_form(q.b, q.w, u)?;
        let (alpha, beta) = (self.angle(q.alpha), self.angle(q.beta));
        let mut rhs = self.functions.omega_third_kind(
            ExtPoint::Finite(beta),
            ExtPoint::Finite(alpha),
            u,
        )?;
        if self.genus() > 0 {
            let (_, df) = self.theta.theta_and_dlog(&self.shifted(1.0, &self.vertex_aj[q.f]))?;
            let (_, dfp) = self
                .theta
                .theta_and_dlog(&self.shifted(1.0, &self.vertex_aj[q.f_prime]))?;
            for j in 0..self.genus() {
                rhs += (df[j] - dfp[j]) * self.functions.omega_first_kind(j, u)?;
            }
        }
        Ok((lhs, rhs))
    }

    /// Relative residual of [`Self::identity_35_sides`].
    pub fn identity_35(&self, edge: usize, u: Complex64) -> Result<f64> {
        let (l, r) = self.identity_35_sides(edge, u)?;
        Ok((l - r).norm() / l.norm().max(r.norm()))
    }

    /// Angles of the tracks at which `g_{b,w}` has a pole or zero, i.e. the support of
    /// `d̃(w) − d̃(b)`.
    pub fn pole_angles(&self, b: usize, w: usize) -> Vec<(f64, i32)> {
        self.abel
            .get(w)
            .plus(self.abel.get(b), -1)
            .0
            .iter()
            .map(|(&t, &m)| (self.angles.angle[t], m))
            .collect()
    }

    /// Default crossing point for `C_{b,w}`; see [`default_crossing_point`].
    pub fn default_crossing(&self, b: usize, w: usize) -> Result<f64> {
        default_crossing_point(&self.pole_angles(b, w))
    }

    /// `A_{b,w} = (1/2π√−1) ∫ g_{b,w}(u) du` along `ū₀ → u_c → u₀`.
    pub fn inverse_entry(
        &self,
        b: usize,
        w: usize,
        u0: Complex64,
        crossing: Option<f64>,
        tol: f64,
    ) -> Result<InverseEntry> {
        if self.patch.vertex(b).kind != VertexKind::Black || self.patch.vertex(w).kind != VertexKind::White {
            return Err(Error::InvalidInput("inverse entries are indexed by (black, white)".into()));
        }
        if !(u0.im > 0.0) {
            return Err(Error::InvalidInput(format!("base point {u0} must lie in the upper half-plane")));
        }
        let uc = match crossing {
            Some(x) => x,
            None => self.default_crossing(b, w)?,
        };
        for &a in &self.angles.angle {
            if (uc - a).abs() < CROSSING_GUARD {
                return Err(Error::PoleProximity {
                    point: format!("crossing point {uc}"),
                    pole: format!("the track angle {a}"),
                    distance: (uc - a).abs(),
                });
            }
        }
        let ucz = Complex64::new(uc, 0.0);
        for (z0, z1) in [(u0.conj(), ucz), (ucz, u0)] {
            for (c, r) in self.functions.curve().isometric_discs() {
                if segment_distance(c, z0, z1) <= r {
                    return Err(Error::PoleProximity {
                        point: format!("path segment {z0} → {z1}"),
                        pole: format!("the isometric disc centred at {c}"),
                        distance: segment_distance(c, z0, z1) - r,
                    });
                }
            }
        }
        let mut value = c0();
        let mut err = 0.0;
        let mut evals = 0;
        for (z0, z1) in [(u0.conj(), ucz), (ucz, u0)] {
            let Quadrature {
                value: v,
                error_estimate: e,
                evaluations: n,
            } = integrate_segment(|z| self.kernel_form(b, w, z), z0, z1, tol * PI, QUADRATURE_DEPTH)?;
            value += v;
            err += e;
            evals += n;
        }
        let scale = Complex64::new(0.0, 2.0 * PI).inv();
        Ok(InverseEntry {
            b,
            w,
            u0,
            crossing: uc,
            value: value * scale,
            error_estimate: err / (2.0 * PI),
            evaluations: evals,
        })
    }

    /// Face-alternating products of the given weights, compared with the genus-zero
    /// weights `β − α` of the same patch and angles.
    pub fn kasteleyn_phase_check(&self, weights: &[EdgeWeight]) -> KasteleynReport {
        let reference: Vec<Complex64> = self
            .patch
            .quads()
            .iter()
            .map(|q| self.angle(q.beta) - self.angle(q.alpha))
            .collect();
        let values: Vec<Complex64> = weights.iter().map(|e| e.value).collect();
        kasteleyn_faces(&self.patch, &values, &reference)
    }
}

fn divisor_aj(track_aj: &[Vec<Complex64>], d: &AngleDivisor, g: usize) -> Vec<Complex64> {
    let mut v = vec![c0(); g];
    for (&t, &m) in &d.0 {
        for (x, y) in v.iter_mut().zip(&track_aj[t]) {
            *x += *y * m as f64;
        }
    }
    v
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = ((p - a) * d.conj()).re / d.norm_sqr();
    let t = t.clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// Crossing point for `C_{b,w}` from the support of `d̃(w) − d̃(b)` (angle, multiplicity).
///
/// The poles (negative multiplicity) are taken on the circle `R ∪ {∞}`; the path crosses
/// inside the largest cyclic gap between consecutive poles, in the widest interval
/// between consecutive support angles there, at the point of that interval with the
/// smallest modulus among its quarter points.
pub fn default_crossing_point(support: &[(f64, i32)]) -> Result<f64> {
    use crate::graph::circle_position;
    let mut poles: Vec<f64> = support
        .iter()
        .filter(|&&(_, m)| m < 0)
        .map(|&(a, _)| circle_position(a))
        .collect();
    let mut all: Vec<f64> = support.iter().map(|&(a, _)| circle_position(a)).collect();
    if poles.is_empty() {
        return Err(Error::InvalidInput("kernel form has no poles on the real line".into()));
    }
    poles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = poles.len();
    let gap = |k: usize| -> (f64, f64) {
        let a = poles[k];
        let b = if k + 1 < n { poles[k + 1] } else { poles[0] + 1.0 };
        (a, b)
    };
    let (lo, hi) = (0..n)
        .map(gap)
        .fold((0.0, -1.0), |best, g| if g.1 - g.0 > best.1 - best.0 + 1e-12 { g } else { best });
    // support angles strictly inside the gap, unwrapped past lo
    let mut inner: Vec<f64> = all
        .iter()
        .map(|&p| if p <= lo { p + 1.0 } else { p })
        .filter(|&p| p > lo + 1e-15 && p < hi - 1e-15)
        .collect();
    inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut cuts = vec![lo];
    cuts.extend(inner);
    cuts.push(hi);
    let (a, b) = cuts
        .windows(2)
        .map(|w| (w[0], w[1]))
        .fold((lo, lo), |best, g| if g.1 - g.0 > best.1 - best.0 + 1e-12 { g } else { best });
    let to_real = |p: f64| ((p.rem_euclid(1.0) - 0.5) * PI).tan();
    let x = [0.25, 0.5, 0.75]
        .iter()
        .map(|&r| to_real(a + (b - a) * r))
        .filter(|x| x.is_finite())
        .fold(f64::NAN, |best: f64, x| if best.is_nan() || x.abs() < best.abs() { x } else { best });
    if x.is_nan() {
        return Err(Error::Degenerate("no finite crossing point in the pole gap".into()));
    }
    Ok(x)
}

/// Alternating products `Π K_{e_1} / K_{e_2} · K_{e_3} / ⋯` around each interior face.
pub fn kasteleyn_faces(
    patch: &MinimalGraphPatch,
    values: &[Complex64],
    reference: &[Complex64],
) -> KasteleynReport {
    let mut faces = Vec::new();
    for f in patch.faces() {
        if !patch.is_interior(f) {
            continue;
        }
        let cyc = patch.face_cycle(f);
        let n = cyc.len();
        if n < 2 || n % 2 != 0 {
            continue;
        }
        let mut prod = Complex64::new(1.0, 0.0);
        let mut refp = Complex64::new(1.0, 0.0);
        let mut complete = true;
        for j in 0..n {
            let (x, y) = (cyc[j], cyc[(j + 1) % n]);
            let (w, b) = if patch.vertex(x).kind == VertexKind::White { (x, y) } else { (y, x) };
            let Some(e) = patch.edge_between(w, b) else {
                complete = false;
                break;
            };
            if j % 2 == 0 {
                prod *= values[e];
                refp *= reference[e];
            } else {
                prod /= values[e];
                refp /= reference[e];
            }
        }
        if !complete {
            continue;
        }
        let argument = prod.arg();
        let reference_argument = refp.arg();
        let diff = (argument - reference_argument + PI).rem_euclid(2.0 * PI) - PI;
        let k = n / 2;
        let target = if k % 2 == 0 { PI } else { 0.0 };
        let sdiff = (argument - target + PI).rem_euclid(2.0 * PI) - PI;
        faces.push(FacePhase {
            face: f,
            degree: n,
            argument,
            reference_argument,
            pass: diff.abs() < 1e-6,
            standard_sign: sdiff.abs() < 1e-6,
        });
    }
    let pass = faces.iter().all(|f| f.pass);
    KasteleynReport { faces, pass }
}
