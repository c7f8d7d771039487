//! Run configuration: a TOML file with a mandatory schema string.

use std::path::{Path, PathBuf};

use mcurve_dimers::graph::{
    build_honeycomb_patch, build_square_patch, parse_custom_patch, square_default_angles, AngleMap,
    MinimalGraphPatch,
};
use mcurve_dimers::schottky::SchottkyData;
use num_complex::Complex64;
use serde::Deserialize;

use crate::CliError;

pub const SCHEMA: &str = "fock-dimer-config/1";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    #[serde(default)]
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub curve: CurveConfig,
    pub graph: GraphConfig,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default)]
    pub experiment: Experiment,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub root: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub genus: usize,
    /// `[re, im]` per generator.
    #[serde(default)]
    pub centers: Vec<[f64; 2]>,
    #[serde(default)]
    pub multipliers: Vec<f64>,
    #[serde(default)]
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum GraphConfig {
    Square {
        width: usize,
        height: usize,
        /// Omitted lists select the default cyclically consistent angles.
        vertical: Option<Vec<f64>>,
        horizontal: Option<Vec<f64>>,
        base_face: Option<String>,
    },
    Honeycomb {
        n1: usize,
        n2: usize,
        families: [Vec<f64>; 3],
        base_face: Option<String>,
    },
    Custom {
        file: PathBuf,
        base_face: Option<String>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truncation {
    pub word_length: usize,
    pub theta_accuracy: f64,
    pub quadrature_tol: f64,
    /// Tail tolerance of the period products; `inf` disables the check.
    pub period_tail_tol: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            word_length: 6,
            theta_accuracy: 1e-15,
            quadrature_tol: 1e-9,
            period_tail_tol: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Experiment {
    pub test_points: usize,
    /// `[x_min, x_max, y_min, y_max]` for random test points.
    pub sample_box: [f64; 4],
    pub u0: [f64; 2],
    pub crossing: Option<f64>,
    /// White vertices whose columns of `A` are checked; empty means all interior ones.
    pub inverse_columns: Vec<String>,
    /// 1-based generator indices sent to zero by `degenerate`.
    pub degenerate: Vec<usize>,
    pub quantity: Quantity,
    pub s0: f64,
    pub steps: usize,
    pub u: [f64; 2],
}

impl Default for Experiment {
    fn default() -> Self {
        Experiment {
            test_points: 20,
            sample_box: [-1.5, 1.5, 0.2, 0.8],
            u0: [0.1, 0.5],
            crossing: None,
            inverse_columns: Vec::new(),
            degenerate: Vec::new(),
            quantity: Quantity::Weights,
            s0: 0.04,
            steps: 6,
            u: [0.2, 0.7],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Weights,
    Theta,
    Kernel,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without touching the file system; call [`Self::validate`] afterwards.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.schema != SCHEMA {
            return Err(CliError::Config(format!(
                "schema `{}` is not supported, expected `{SCHEMA}`",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let c = &self.curve;
        let bad = |m: String| Err(CliError::Config(m));
        if c.centers.len() != c.genus || c.multipliers.len() != c.genus || c.t.len() != c.genus {
            return bad(format!(
                "curve.genus = {} but {} centers, {} multipliers and {} entries of t",
                c.genus,
                c.centers.len(),
                c.multipliers.len(),
                c.t.len()
            ));
        }
        if let Some(s) = c.multipliers.iter().find(|s| !(**s > 0.0 && **s < 1.0)) {
            return bad(format!("multiplier {s} not in (0, 1)"));
        }
        if let Some(z) = c.centers.iter().find(|z| z[1] == 0.0 || !z[0].is_finite() || !z[1].is_finite()) {
            return bad(format!("center [{}, {}] must be finite and off the real line", z[0], z[1]));
        }
        let t = &self.truncation;
        if t.word_length == 0 && c.genus > 0 {
            return bad("truncation.word_length must be positive".into());
        }
        if !(t.theta_accuracy > 0.0 && t.theta_accuracy < 1.0) {
            return bad(format!("truncation.theta_accuracy {} not in (0, 1)", t.theta_accuracy));
        }
        if !(t.quadrature_tol > 0.0) {
            return bad(format!("truncation.quadrature_tol {} must be positive", t.quadrature_tol));
        }
        let e = &self.experiment;
        let [x0, x1, y0, y1] = e.sample_box;
        if !(x0 < x1 && 0.0 < y0 && y0 < y1) {
            return bad("experiment.sample_box must be [x_min, x_max, y_min, y_max] with 0 < y_min".into());
        }
        if !(e.u0[1] > 0.0) {
            return bad("experiment.u0 must lie in the upper half-plane".into());
        }
        if let Some(i) = e.degenerate.iter().find(|&&i| i == 0 || i > c.genus) {
            return bad(format!("experiment.degenerate index {i} outside 1..={}", c.genus));
        }
        if let GraphConfig::Custom { file, .. } = &self.graph {
            let p = self.root.join(file);
            if !p.is_file() {
                return bad(format!("graph file {} does not exist", p.display()));
            }
        }
        Ok(())
    }

    pub fn schottky(&self) -> SchottkyData {
        SchottkyData::new(
            self.curve.centers.iter().map(|z| Complex64::new(z[0], z[1])).collect(),
            self.curve.multipliers.clone(),
            self.truncation.word_length,
        )
    }

    /// The patch, its angles and the base face of the discrete Abel map.
    pub fn patch(&self) -> Result<(MinimalGraphPatch, AngleMap, usize), CliError> {
        let (patch, angles, base) = match &self.graph {
            GraphConfig::Square { width, height, vertical, horizontal, base_face } => {
                let v = vertical.clone().unwrap_or_else(|| vec![0.0]);
                let h = horizontal.clone().unwrap_or_else(|| vec![10.0]);
                let (p, a) = build_square_patch(*width, *height, &v, &h)?;
                let a = if vertical.is_none() && horizontal.is_none() {
                    square_default_angles(&p)
                } else {
                    a
                };
                (p, a, base_face.clone())
            }
            GraphConfig::Honeycomb { n1, n2, families, base_face } => {
                let (p, a) = build_honeycomb_patch(*n1, *n2, [&families[0], &families[1], &families[2]])?;
                (p, a, base_face.clone())
            }
            GraphConfig::Custom { file, base_face } => {
                let path = self.root.join(file);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let (p, a) = parse_custom_patch(&text)?;
                (p, a, base_face.clone())
            }
        };
        let base = match base {
            Some(label) => patch
                .find(&label)
                .ok_or_else(|| CliError::Config(format!("base face `{label}` not in the patch")))?,
            None => {
                let faces = patch.faces();
                let interior: Vec<usize> = faces.iter().copied().filter(|&f| patch.is_interior(f)).collect();
                let pool = if interior.is_empty() { faces } else { interior };
                pool[pool.len() / 2]
            }
        };
        Ok((patch, angles, base))
    }

    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        match (flag, &self.output) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(p)) => self.root.join(p),
            (None, None) => PathBuf::from("out"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema = "fock-dimer-config/1"
[curve]
genus = 1
centers = [[0.3, 2.0]]
multipliers = [0.1]
t = [0.3]
[graph]
type = "square"
width = 4
height = 4
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.truncation.word_length, 6);
        assert_eq!(c.experiment.test_points, 20);
        let (p, a, base) = c.patch().unwrap();
        assert_eq!(a.angle.len(), p.tracks().len());
        assert!(p.is_interior(base));
    }

    #[test]
    fn wrong_schema_and_counts_are_rejected() {
        let text = MINIMAL.replace("fock-dimer-config/1", "fock-dimer-config/0");
        assert!(matches!(RunConfig::parse(&text), Err(CliError::Config(_))));
        let text = MINIMAL.replace("t = [0.3]", "t = [0.3, 0.1]");
        assert!(RunConfig::parse(&text).unwrap().validate().is_err());
        let text = MINIMAL.replace("multipliers = [0.1]", "multipliers = [1.5]");
        assert!(RunConfig::parse(&text).unwrap().validate().is_err());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let text = MINIMAL.replace("width = 4", "width = \"four\"");
        let msg = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(msg.contains("line"), "{msg}");
    }
}
