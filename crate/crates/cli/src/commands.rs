//! The subcommands. Each returns an [`Artifact`]; writing it is left to the caller.

use mcurve_dimers::abelian::{AbelianFunctions, Divisor, PeriodData};
use mcurve_dimers::degeneration::{
    finish_scan, scan_points, scaled, subgroup_reference, weight_order1, ScanRow,
};
use mcurve_dimers::fock::{EdgeWeight, FockModel};
use mcurve_dimers::moebius::ExtPoint;
use mcurve_dimers::schottky::{SchottkyCurve, SchottkyData};
use mcurve_dimers::theta::ThetaEvaluator;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Quantity, RunConfig};
use crate::report::{csv, num, to_json, Check, TruncationInfo, VerifyReport};
use crate::{Artifact, CliError};

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Kernel,
    Kasteleyn,
    Identity35,
    Inverse,
    Periods,
    Theta,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Kernel => "kernel",
            Suite::Kasteleyn => "kasteleyn",
            Suite::Identity35 => "identity35",
            Suite::Inverse => "inverse",
            Suite::Periods => "periods",
            Suite::Theta => "theta",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            Suite::Kernel | Suite::Identity35 | Suite::Kasteleyn => 1e-6,
            Suite::Inverse => 1e-5,
            Suite::Periods | Suite::Theta => 1e-8,
        }
    }
}

/// Curve, periods and model for a configuration with the given curve data.
fn build(cfg: &RunConfig, data: SchottkyData, t: Vec<f64>) -> Result<(FockModel, PeriodData)> {
    let functions = AbelianFunctions::new(SchottkyCurve::new(data)?)?;
    let periods = functions.period_matrix(cfg.truncation.period_tail_tol)?;
    let theta = ThetaEvaluator::new(&periods, cfg.truncation.theta_accuracy)?;
    let (patch, angles, base) = cfg.patch()?;
    let model = FockModel::new(functions, theta, t, patch, angles, base)?;
    Ok((model, periods))
}

fn build_configured(cfg: &RunConfig) -> Result<(FockModel, PeriodData)> {
    build(cfg, cfg.schottky(), cfg.curve.t.clone())
}

fn truncation_info(cfg: &RunConfig, model: &FockModel) -> TruncationInfo {
    TruncationInfo {
        word_length: cfg.truncation.word_length,
        theta_radius: model.theta_evaluator().radius(),
        theta_accuracy: cfg.truncation.theta_accuracy,
        quadrature_tol: cfg.truncation.quadrature_tol,
    }
}

const DISC_MARGIN: f64 = 0.05;
const MAX_DRAWS: usize = 100_000;

/// `n` seeded test points in the sample box, outside the isometric discs.
pub fn sample_points(cfg: &RunConfig, model: &FockModel, rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<Complex64>> {
    let [x0, x1, y0, y1] = cfg.experiment.sample_box;
    let discs = model.functions().curve().isometric_discs();
    let mut out = Vec::with_capacity(n);
    for _ in 0..MAX_DRAWS {
        if out.len() == n {
            break;
        }
        let u = Complex64::new(rng.gen_range(x0..x1), rng.gen_range(y0..y1));
        if discs.iter().all(|&(c, r)| (u - c).norm() > r + DISC_MARGIN) {
            out.push(u);
        }
    }
    if out.len() < n {
        return Err(CliError::Config(
            "experiment.sample_box lies almost entirely inside the isometric discs".into(),
        ));
    }
    Ok(out)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c64(z: [f64; 2]) -> Complex64 {
    Complex64::new(z[0], z[1])
}

/// `weights.csv`: `w_id,b_id,re,im,alpha,beta,face,face_prime`.
pub fn cmd_weights(cfg: &RunConfig) -> Result<Artifact> {
    let (model, _) = build_configured(cfg)?;
    let p = model.patch();
    let weights = model.weights()?;
    let rows = weights.iter().map(|w| {
        vec![
            p.vertex(w.w).label.clone(),
            p.vertex(w.b).label.clone(),
            num(w.value.re),
            num(w.value.im),
            num(w.alpha),
            num(w.beta),
            p.vertex(w.face).label.clone(),
            p.vertex(w.face_prime).label.clone(),
        ]
    });
    Ok(Artifact {
        file_name: "weights.csv".into(),
        contents: csv("w_id,b_id,re,im,alpha,beta,face,face_prime", rows),
        pass: true,
    })
}

/// `verify_<suite>.json`; passes when every check is within tolerance.
pub fn cmd_verify(cfg: &RunConfig, suite: Suite, tol: Option<f64>) -> Result<Artifact> {
    let tol = tol.unwrap_or(suite.default_tolerance());
    let (model, periods) = build_configured(cfg)?;
    let mut r = rng(cfg.seed);
    let n = cfg.experiment.test_points;
    let (checks, details) = match suite {
        Suite::Kernel => verify_kernel(cfg, &model, &mut r, n, tol)?,
        Suite::Identity35 => verify_identity35(cfg, &model, &mut r, n, tol)?,
        Suite::Kasteleyn => verify_kasteleyn(&model, tol)?,
        Suite::Inverse => verify_inverse(cfg, &model, tol)?,
        Suite::Periods => verify_periods(cfg, &periods, tol),
        Suite::Theta => verify_theta(&model, &mut r, n, tol)?,
    };
    let pass = checks.iter().all(|c| c.pass);
    let report = VerifyReport {
        suite: suite.name().into(),
        seed: cfg.seed,
        genus: model.genus(),
        truncation: truncation_info(cfg, &model),
        checks,
        details,
        pass,
    };
    Ok(Artifact {
        file_name: format!("verify_{}.json", suite.name()),
        contents: to_json(&report),
        pass,
    })
}

type Checks = (Vec<Check>, serde_json::Value);

fn verify_kernel(cfg: &RunConfig, model: &FockModel, r: &mut ChaCha8Rng, n: usize, tol: f64) -> Result<Checks> {
    let points = sample_points(cfg, model, r, n)?;
    let weights = model.weights()?;
    let x = model.abel().base;
    let res = points
        .par_iter()
        .map(|&u| model.check_kernel(u, x, &weights))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let right = res.iter().map(|k| k.right).fold(0.0, f64::max);
    let left = res.iter().map(|k| k.left).fold(0.0, f64::max);
    let rows: usize = res.iter().map(|k| k.rows).sum();
    Ok((
        vec![
            Check::at_most("right_kernel_relative_residual", right, tol, rows),
            Check::at_most("left_kernel_relative_residual", left, tol, rows),
        ],
        json!({ "test_points": n, "reference_vertex": model.patch().vertex(x).label }),
    ))
}

fn verify_identity35(cfg: &RunConfig, model: &FockModel, r: &mut ChaCha8Rng, n: usize, tol: f64) -> Result<Checks> {
    let edges = model.patch().quads().len();
    let points = sample_points(cfg, model, r, n)?;
    let pairs: Vec<(usize, Complex64)> = points.into_iter().map(|u| (r.gen_range(0..edges), u)).collect();
    let res = pairs
        .par_iter()
        .map(|&(e, u)| model.identity_35(e, u))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let worst = res.iter().copied().fold(0.0, f64::max);
    Ok((vec![Check::at_most("identity35_relative_residual", worst, tol, n)], serde_json::Value::Null))
}

fn phase_gap(argument: f64, reference: f64) -> f64 {
    use std::f64::consts::PI;
    ((argument - reference + PI).rem_euclid(2.0 * PI) - PI).abs()
}

fn verify_kasteleyn(model: &FockModel, tol: f64) -> Result<Checks> {
    let weights = model.weights()?;
    let report = model.kasteleyn_phase_check(&weights);
    let worst = report
        .faces
        .iter()
        .map(|f| phase_gap(f.argument, f.reference_argument))
        .fold(0.0, f64::max);
    let standard = report.faces.iter().filter(|f| f.standard_sign).count();
    let mut check = Check::at_most("face_phase_deviation", worst, tol, report.faces.len());
    check.pass &= !report.faces.is_empty();
    Ok((
        vec![check],
        json!({ "faces": report.faces.len(), "standard_sign_faces": standard }),
    ))
}

/// Largest `|Σ_b K_{w',b} A_{b,w} − δ_{w',w}|` over interior rows `w'` and the configured
/// columns `w`.
pub fn ka_residual(model: &FockModel, columns: &[usize], u0: Complex64, crossing: Option<f64>, quad_tol: f64) -> Result<(f64, usize)> {
    let p = model.patch();
    let weights: Vec<EdgeWeight> = model.weights()?;
    let rows: Vec<usize> = p.whites().into_iter().filter(|&w| p.is_interior(w)).collect();
    let mut blacks: Vec<usize> = rows
        .iter()
        .flat_map(|&w| p.edges_at(w).iter().map(|&e| weights[e].b))
        .collect();
    blacks.sort_unstable();
    blacks.dedup();
    let jobs: Vec<(usize, usize)> = columns
        .iter()
        .flat_map(|&w| blacks.iter().map(move |&b| (b, w)))
        .collect();
    let entries = jobs
        .par_iter()
        .map(|&(b, w)| model.inverse_entry(b, w, u0, crossing, quad_tol).map(|a| a.value))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let lookup = |b: usize, w: usize| {
        let cj = columns.iter().position(|&x| x == w).unwrap();
        let bj = blacks.binary_search(&b).unwrap();
        entries[cj * blacks.len() + bj]
    };
    let mut worst: f64 = 0.0;
    for &w in columns {
        for &wp in &rows {
            let mut s = Complex64::new(0.0, 0.0);
            for &e in p.edges_at(wp) {
                s += weights[e].value * lookup(weights[e].b, w);
            }
            let target = if wp == w { 1.0 } else { 0.0 };
            worst = worst.max((s - target).norm());
        }
    }
    Ok((worst, jobs.len()))
}

fn verify_inverse(cfg: &RunConfig, model: &FockModel, tol: f64) -> Result<Checks> {
    let p = model.patch();
    let columns: Vec<usize> = if cfg.experiment.inverse_columns.is_empty() {
        p.whites().into_iter().filter(|&w| p.is_interior(w)).collect()
    } else {
        cfg.experiment
            .inverse_columns
            .iter()
            .map(|l| {
                p.find(l)
                    .filter(|&w| p.whites().contains(&w))
                    .ok_or_else(|| CliError::Config(format!("`{l}` is not a white vertex of the patch")))
            })
            .collect::<Result<_>>()?
    };
    let (worst, entries) = ka_residual(
        model,
        &columns,
        c64(cfg.experiment.u0),
        cfg.experiment.crossing,
        cfg.truncation.quadrature_tol,
    )?;
    Ok((
        vec![Check::at_most("ka_minus_identity", worst, tol, entries)],
        json!({
            "columns": columns.iter().map(|&w| p.vertex(w).label.clone()).collect::<Vec<_>>(),
            "u0": cfg.experiment.u0,
        }),
    ))
}

fn verify_periods(cfg: &RunConfig, periods: &PeriodData, tol: f64) -> Checks {
    let g = periods.genus();
    let (imag, asym, positive) = periods.structure_defects();
    let mut checks = vec![
        Check::at_most("q_imaginary_part", imag, tol, g * g),
        Check::at_most("q_asymmetry", asym, tol, g * g),
    ];
    let mut diag = Check::at_most("q_diagonal_in_unit_interval", 0.0, tol, g);
    diag.pass = positive;
    checks.push(diag);
    if g == 1 {
        let s = cfg.curve.multipliers[0];
        checks.push(Check::at_most("genus_one_q_equals_s", (periods.q[0][0] - s).norm(), tol, 1));
    }
    let tail = (0..g)
        .flat_map(|i| (0..g).map(move |j| (i, j)))
        .map(|(i, j)| (periods.q[i][j] - periods.q_previous[i][j]).norm())
        .fold(0.0, f64::max);
    let q: Vec<Vec<f64>> = periods.q.iter().map(|r| r.iter().map(|z| z.re).collect()).collect();
    let omega: Vec<Vec<f64>> = periods.omega().iter().map(|r| r.iter().map(|z| z.im).collect()).collect();
    (checks, json!({ "q": q, "omega_imaginary": omega, "tail_change": tail }))
}

fn verify_theta(model: &FockModel, r: &mut ChaCha8Rng, n: usize, tol: f64) -> Result<Checks> {
    let g = model.genus();
    let th = model.theta_evaluator();
    let zs: Vec<Vec<f64>> = (0..n).map(|_| (0..g).map(|_| r.gen_range(0.0..1.0)).collect()).collect();
    let rows = zs
        .par_iter()
        .map(|z| -> std::result::Result<(f64, bool, f64, f64), mcurve_dimers::Error> {
            let v = th.theta_real(z)?;
            let mut period: f64 = 0.0;
            let mut fd: f64 = 0.0;
            let zc: Vec<Complex64> = z.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            let (_, grad) = th.theta_and_dlog(&zc)?;
            for j in 0..g {
                let mut shifted = z.clone();
                shifted[j] += 1.0;
                period = period.max((th.theta_real(&shifted)? - v).norm() / v.norm());
                let h = 1e-5;
                let mut zp = zc.clone();
                let mut zm = zc.clone();
                zp[j] += h;
                zm[j] -= h;
                let d = (th.theta(&zp)?.ln() - th.theta(&zm)?.ln()) / (2.0 * h);
                fd = fd.max((d - grad[j]).norm() / grad[j].norm().max(1.0));
            }
            Ok((v.im.abs() / v.re.abs(), v.re > 0.0, period, fd))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let imag = rows.iter().map(|x| x.0).fold(0.0, f64::max);
    let positive = rows.iter().all(|x| x.1);
    let period = rows.iter().map(|x| x.2).fold(0.0, f64::max);
    let fd = rows.iter().map(|x| x.3).fold(0.0, f64::max);
    let mut real = Check::at_most("theta_relative_imaginary_part", imag, tol, n);
    real.pass &= positive;
    Ok((
        vec![
            real,
            Check::at_most("theta_periodicity", period, tol, n * g),
            // central differences with step 1e-5 are good to about 1e-9
            Check::at_most("dlog_vs_finite_difference", fd, tol.max(1e-6), n * g),
        ],
        json!({ "all_positive": positive }),
    ))
}

/// `degenerate.csv`: `s,quantity_re,quantity_im,abs_diff,fitted_order` for the scan that
/// sends the multipliers of `indices` (1-based) to zero.
pub fn cmd_degenerate(cfg: &RunConfig, indices: &[usize], steps: usize) -> Result<Artifact> {
    let header = "s,quantity_re,quantity_im,abs_diff,fitted_order";
    let removed: Vec<usize> = indices.iter().map(|i| i - 1).collect();
    if let Some(i) = indices.iter().find(|&&i| i == 0 || i > cfg.curve.genus) {
        return Err(CliError::Config(format!("degeneration index {i} outside 1..={}", cfg.curve.genus)));
    }
    if removed.is_empty() {
        let (model, _) = build_configured(cfg)?;
        let (v, _) = quantity(cfg, &model, &model)?;
        let row = vec![String::new(), num(v.re), num(v.im), num(0.0), String::new()];
        return Ok(Artifact {
            file_name: "degenerate.csv".into(),
            contents: csv(header, [row]),
            pass: true,
        });
    }
    let svals = scan_points(cfg.experiment.s0, steps)?;
    let data = cfg.schottky();
    let t_ref: Vec<f64> = (0..cfg.curve.genus)
        .filter(|i| !removed.contains(i))
        .map(|i| cfg.curve.t[i])
        .collect();
    let (reference, _) = build(cfg, subgroup_reference(&data, &removed), t_ref)?;
    let rows = svals
        .par_iter()
        .map(|&s| {
            let (m, _) = build(cfg, scaled(&data, &removed, s), cfg.curve.t.clone())?;
            let (value, abs_diff) = quantity(cfg, &m, &reference)?;
            Ok(ScanRow { s, value, abs_diff })
        })
        .collect::<Result<Vec<_>>>()?;
    let scan = finish_scan(rows);
    let table = scan.rows.iter().map(|r| {
        vec![num(r.s), num(r.value.re), num(r.value.im), num(r.abs_diff), num(scan.order)]
    });
    Ok(Artifact {
        file_name: "degenerate.csv".into(),
        contents: csv(header, table),
        pass: scan.conclusive,
    })
}

/// The scanned quantity of `m` and its distance to the same quantity of `reference`.
fn quantity(cfg: &RunConfig, m: &FockModel, reference: &FockModel) -> Result<(Complex64, f64)> {
    let mut best = (Complex64::new(0.0, 0.0), -1.0);
    let mut keep = |v: Complex64, d: f64| {
        if d > best.1 {
            best = (v, d);
        }
    };
    match cfg.experiment.quantity {
        Quantity::Weights => {
            for e in 0..m.patch().quads().len() {
                let v = m.weight(e)?.value;
                keep(v, (v - reference.weight(e)?.value).norm());
            }
        }
        Quantity::Theta => {
            let z: Vec<Complex64> = m.t().iter().map(|&x| Complex64::new(x, 0.0)).collect();
            let zr: Vec<Complex64> = reference.t().iter().map(|&x| Complex64::new(x, 0.0)).collect();
            let v = m.theta_evaluator().theta(&z)?;
            keep(v, (v - reference.theta_evaluator().theta(&zr)?).norm());
        }
        Quantity::Kernel => {
            let u = c64(cfg.experiment.u);
            let p = m.patch();
            for f in p.faces() {
                for w in p.whites() {
                    if p.crossing_track(f, w).is_some() {
                        let v = m.kernel_form(f, w, u)?;
                        keep(v, (v - reference.kernel_form(f, w, u)?).norm());
                    }
                }
            }
        }
    }
    Ok(best)
}

/// `series.json`: first-order weight expansions next to the exact weights.
pub fn cmd_series(cfg: &RunConfig) -> Result<Artifact> {
    let (model, _) = build_configured(cfg)?;
    let p = model.patch();
    let s = &cfg.curve.multipliers;
    let edges = (0..p.quads().len())
        .map(|e| {
            let w = model.weight(e)?;
            let series = weight_order1(&model, e);
            let approx = series.evaluate(s);
            Ok(json!({
                "w": p.vertex(w.w).label,
                "b": p.vertex(w.b).label,
                "constant": [series.constant.re, series.constant.im],
                "first_order": series.first_order.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
                "value": [w.value.re, w.value.im],
                "remainder": (w.value - approx).norm(),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Artifact {
        file_name: "series.json".into(),
        contents: to_json(&json!({ "multipliers": s, "t": cfg.curve.t, "edges": edges })),
        pass: true,
    })
}

/// `theta_eval.json`: `Θ(z)` and its logarithmic gradient.
pub fn cmd_theta_eval(cfg: &RunConfig, z: &[Complex64]) -> Result<Artifact> {
    let functions = AbelianFunctions::new(SchottkyCurve::new(cfg.schottky())?)?;
    let periods = functions.period_matrix(cfg.truncation.period_tail_tol)?;
    let th = ThetaEvaluator::new(&periods, cfg.truncation.theta_accuracy)?;
    if z.len() != th.genus() {
        return Err(CliError::Config(format!("need {} theta arguments, got {}", th.genus(), z.len())));
    }
    let (v, grad) = th.theta_and_dlog(z)?;
    let report = json!({
        "z": z.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
        "theta": [v.re, v.im],
        "dlog": grad.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
        "radius": th.radius(),
    });
    Ok(Artifact { file_name: "theta_eval.json".into(), contents: to_json(&report), pass: true })
}

/// `abel_eval.json`: lifted and reduced Abel–Jacobi image of a degree-zero divisor of
/// real points.
pub fn cmd_abel_eval(cfg: &RunConfig, divisor: &[(ExtPoint, i32)]) -> Result<Artifact> {
    let functions = AbelianFunctions::new(SchottkyCurve::new(cfg.schottky())?)?;
    let d = divisor.iter().fold(Divisor::new(), |d, &(p, m)| d.add(p, m));
    let v = functions.abel_map(&d)?;
    let report = json!({ "lifted": v.lifted, "reduced": v.reduced() });
    Ok(Artifact { file_name: "abel_eval.json".into(), contents: to_json(&report), pass: true })
}
