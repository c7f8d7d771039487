//! Schottky groups generated by hyperbolic maps with conjugate fixed points,
//! and enumeration of reduced words and the coset families used by the
//! Poincaré-type series of the `abelian` module.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::moebius::{ExtPoint, Moebius};

/// Margin required between isometric circles of distinct generators.
pub const SCHOTTKY_MARGIN: f64 = 1e-9;

/// Generator fixing `center` (attracting) and its conjugate (repelling), determined by
/// `(γ(z) − α)/(γ(z) − ᾱ) = s (z − α)/(z − ᾱ)`.
pub fn make_generator(center: Complex64, multiplier: f64) -> Result<Moebius> {
    if !(center.im > 0.0) || !center.re.is_finite() || !center.im.is_finite() {
        return Err(Error::InvalidInput(format!(
            "generator center {center} must have positive imaginary part"
        )));
    }
    if !(multiplier > 0.0 && multiplier < 1.0) {
        return Err(Error::InvalidInput(format!(
            "multiplier {multiplier} must lie in (0, 1)"
        )));
    }
    let s = multiplier;
    let a = center;
    let ab = center.conj();
    let one = Complex64::new(1.0, 0.0);
    Moebius::new(
        a - ab * s,
        -(1.0 - s) * (a * ab),
        one * (1.0 - s),
        a * s - ab,
    )
}

/// Reduced word in the free group; letters are `±(k+1)` for generator `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GroupWord(pub Vec<i8>);

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<i8> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<i8> {
        self.0.last().copied()
    }

    pub fn inverse(&self) -> Self {
        GroupWord(self.0.iter().rev().map(|l| -l).collect())
    }

    /// Word of the conjugate map `z ↦ conj(γ(conj z))`, which inverts every generator.
    pub fn conjugate(&self) -> Self {
        GroupWord(self.0.iter().map(|l| -l).collect())
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != -w[1])
    }
}

/// Letter order used for lexicographic comparisons: `1 < −1 < 2 < −2 < …`.
fn letter_key(l: i8) -> (i8, bool) {
    (l.abs(), l < 0)
}

fn word_cmp(a: &GroupWord, b: &GroupWord) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.0.iter()
            .map(|&l| letter_key(l))
            .cmp(b.0.iter().map(|&l| letter_key(l)))
    })
}

/// Enumeration selector for [`SchottkyCurve::enumerate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationMode {
    AllWords,
    /// One representative per coset `γ⟨γ_i⟩` (0-based generator index).
    Coset(usize),
    /// Representatives of `⟨γ_i⟩ \ Γ / ⟨γ_j⟩`, identity class included.
    DoubleCoset(usize, usize),
    /// One element of each pair `{γ, γ⁻¹}` of `Γ − {1}`.
    Star,
}

/// The raw parameters of a Schottky-uniformized M-curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SchottkyData {
    pub centers: Vec<Complex64>,
    pub multipliers: Vec<f64>,
    pub max_word_length: usize,
}

impl SchottkyData {
    pub fn new(centers: Vec<Complex64>, multipliers: Vec<f64>, max_word_length: usize) -> Self {
        SchottkyData {
            centers,
            multipliers,
            max_word_length,
        }
    }

    pub fn genus(&self) -> usize {
        self.centers.len()
    }

    /// Same curve with a different multiplier vector.
    pub fn with_multipliers(&self, multipliers: Vec<f64>) -> Self {
        SchottkyData {
            multipliers,
            ..self.clone()
        }
    }
}

/// Validated Schottky group with its word table up to the configured length.
///
/// Words are ordered by length, then lexicographically; every series in the crate
/// sums in this order so results are reproducible.
#[derive(Debug, Clone)]
pub struct SchottkyCurve {
    data: SchottkyData,
    generators: Vec<Moebius>,
    words: Vec<GroupWord>,
    maps: Vec<Moebius>,
    index: HashMap<GroupWord, usize>,
}

impl SchottkyCurve {
    pub fn new(data: SchottkyData) -> Result<Self> {
        if data.centers.len() != data.multipliers.len() {
            return Err(Error::InvalidInput(format!(
                "{} centers but {} multipliers",
                data.centers.len(),
                data.multipliers.len()
            )));
        }
        if data.genus() > 60 {
            return Err(Error::InvalidInput("genus too large".into()));
        }
        let generators = data
            .centers
            .iter()
            .zip(&data.multipliers)
            .map(|(&c, &s)| make_generator(c, s))
            .collect::<Result<Vec<_>>>()?;
        let curve = Self::build(data, generators);
        curve.check_schottky()?;
        Ok(curve)
    }

    fn build(data: SchottkyData, generators: Vec<Moebius>) -> Self {
        let g = generators.len() as i8;
        let letters: Vec<i8> = (1..=g).flat_map(|k| [k, -k]).collect();
        let letter_map = |l: i8| -> Moebius {
            let m = generators[(l.unsigned_abs() - 1) as usize];
            if l > 0 {
                m
            } else {
                m.inverse()
            }
        };
        let mut words = vec![GroupWord::identity()];
        let mut maps = vec![Moebius::identity()];
        let mut level_start = 0;
        for _ in 0..data.max_word_length {
            let level_end = words.len();
            for idx in level_start..level_end {
                for &l in &letters {
                    if words[idx].last() == Some(-l) {
                        continue;
                    }
                    let mut w = words[idx].0.clone();
                    w.push(l);
                    let m = maps[idx].compose(&letter_map(l));
                    words.push(GroupWord(w));
                    maps.push(m);
                }
            }
            if level_end == words.len() {
                break;
            }
            level_start = level_end;
        }
        // sorted order within each level is the generation order since letters are sorted
        debug_assert!(words.windows(2).all(|w| word_cmp(&w[0], &w[1]) == Ordering::Less));
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        SchottkyCurve {
            data,
            generators,
            words,
            maps,
            index,
        }
    }

    fn check_schottky(&self) -> Result<()> {
        let mut circles = Vec::new();
        for (k, m) in self.generators.iter().enumerate() {
            for (label, map) in [(format!("γ{}", k + 1), *m), (format!("γ{}⁻¹", k + 1), m.inverse())] {
                let (c, r) = map
                    .isometric_circle()
                    .ok_or_else(|| Error::Degenerate(format!("{label} fixes infinity")))?;
                circles.push((label, c, r));
            }
        }
        for i in 0..circles.len() {
            for j in (i + 1)..circles.len() {
                let gap = (circles[i].1 - circles[j].1).norm() - circles[i].2 - circles[j].2;
                if gap <= SCHOTTKY_MARGIN {
                    return Err(Error::NotClassicalSchottky {
                        first: circles[i].0.clone(),
                        second: circles[j].0.clone(),
                        gap,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn data(&self) -> &SchottkyData {
        &self.data
    }

    pub fn genus(&self) -> usize {
        self.generators.len()
    }

    pub fn max_word_length(&self) -> usize {
        self.data.max_word_length
    }

    pub fn generators(&self) -> &[Moebius] {
        &self.generators
    }

    pub fn center(&self, i: usize) -> Complex64 {
        self.data.centers[i]
    }

    pub fn words(&self) -> &[GroupWord] {
        &self.words
    }

    pub fn map(&self, idx: usize) -> &Moebius {
        &self.maps[idx]
    }

    pub fn word_index(&self, w: &GroupWord) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Isometric discs (center, radius) of all generators and their inverses.
    pub fn isometric_discs(&self) -> Vec<(Complex64, f64)> {
        self.generators
            .iter()
            .flat_map(|m| [m.isometric_circle(), m.inverse().isometric_circle()])
            .flatten()
            .collect()
    }

    /// Whether `z` lies strictly outside every generator disc (the fundamental domain).
    pub fn in_fundamental_domain(&self, z: Complex64) -> bool {
        self.isometric_discs()
            .iter()
            .all(|(c, r)| (z - c).norm() > *r)
    }

    /// Indices into [`words`](Self::words) selected by `mode` with length at most `max_len`.
    pub fn select(&self, mode: EnumerationMode, max_len: usize) -> Vec<usize> {
        let gen = |k: usize| (k + 1) as i8;
        self.words
            .iter()
            .enumerate()
            .filter(|(_, w)| w.len() <= max_len)
            .filter(|(_, w)| match mode {
                EnumerationMode::AllWords => true,
                EnumerationMode::Coset(i) => w.last().map_or(true, |l| l.abs() != gen(i)),
                EnumerationMode::DoubleCoset(i, j) => {
                    w.first().map_or(true, |l| l.abs() != gen(i))
                        && w.last().map_or(true, |l| l.abs() != gen(j))
                }
                EnumerationMode::Star => {
                    !w.is_empty() && word_cmp(w, &w.inverse()) == Ordering::Less
                }
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Words and maps selected by `mode` up to the curve's word-length cap.
    pub fn enumerate(&self, mode: EnumerationMode) -> Result<Vec<(GroupWord, Moebius)>> {
        let g = self.genus();
        let bad = match mode {
            EnumerationMode::Coset(i) => i >= g,
            EnumerationMode::DoubleCoset(i, j) => i >= g || j >= g,
            _ => false,
        };
        if bad {
            return Err(Error::InvalidInput(format!(
                "generator index out of range for genus {g}"
            )));
        }
        Ok(self
            .select(mode, self.max_word_length())
            .into_iter()
            .map(|i| (self.words[i].clone(), self.maps[i]))
            .collect())
    }

    /// The Schottky group on the generators not listed in `removed` (0-based).
    pub fn subgroup(&self, removed: &[usize]) -> Result<SchottkyCurve> {
        let keep: Vec<usize> = (0..self.genus()).filter(|k| !removed.contains(k)).collect();
        let data = SchottkyData {
            centers: keep.iter().map(|&k| self.data.centers[k]).collect(),
            multipliers: keep.iter().map(|&k| self.data.multipliers[k]).collect(),
            max_word_length: self.data.max_word_length,
        };
        SchottkyCurve::new(data)
    }

    pub fn apply_word(&self, idx: usize, p: ExtPoint) -> ExtPoint {
        self.maps[idx].apply(p)
    }
}

/// Number of reduced words of length exactly `n` in the free group of rank `g`.
pub fn reduced_word_count(g: usize, n: usize) -> usize {
    if n == 0 {
        1
    } else if g == 0 {
        0
    } else {
        2 * g * (2 * g - 1).pow(n as u32 - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_close(p: ExtPoint, z: Complex64, tol: f64) {
        let v = p.finite().expect("finite point");
        assert!((v - z).norm() < tol, "{v} vs {z}");
    }

    #[test]
    fn generator_examples() {
        let m = make_generator(c(0.0, 1.0), 0.25).unwrap();
        assert_close(m.apply(ExtPoint::new(0.0, 1.0)), c(0.0, 1.0), 1e-14);
        assert_close(m.apply(ExtPoint::Infinity), c(0.0, 5.0 / 3.0), 1e-14);
        assert_close(m.apply(ExtPoint::new(0.0, 0.0)), c(0.0, 0.6), 1e-14);
        assert_close(m.apply(ExtPoint::new(0.0, -1.0)), c(0.0, -1.0), 1e-14);
    }

    #[test]
    fn generator_rejects_bad_input() {
        assert!(make_generator(c(0.0, -1.0), 0.2).is_err());
        assert!(make_generator(c(0.0, 0.0), 0.2).is_err());
        assert!(make_generator(c(0.0, 1.0), 0.0).is_err());
        assert!(make_generator(c(0.0, 1.0), 1.0).is_err());
    }

    #[test]
    fn generator_fixed_points_and_multiplier() {
        for &(a, s) in &[(c(0.3, 0.7), 0.1), (c(-2.0, 1.5), 0.45), (c(1.0, 0.2), 0.01)] {
            let m = make_generator(a, s).unwrap();
            for p in [a, a.conj()] {
                assert_close(m.apply(ExtPoint::Finite(p)), p, 1e-12 * a.norm().max(1.0));
            }
            // eigenvalues of the unit-determinant matrix are √s and 1/√s
            let tr = m.a + m.d;
            let expected = s.sqrt() + 1.0 / s.sqrt();
            assert!((tr * tr - c(expected * expected, 0.0)).norm() < 1e-10 * expected * expected);
            let z = c(0.37, -0.21);
            let w = |z: Complex64| (z - a) / (z - a.conj());
            let img = m.apply(ExtPoint::Finite(z)).finite().unwrap();
            assert!((w(img) - w(z) * s).norm() < 1e-12);
        }
    }

    #[test]
    fn word_counts_match_free_group() {
        for g in 1..=3 {
            let centers: Vec<_> = (0..g).map(|k| c(3.0 * k as f64, 1.0)).collect();
            let curve = SchottkyCurve::new(SchottkyData::new(centers, vec![0.01; g], 5)).unwrap();
            for n in 0..=5 {
                let count = curve.words().iter().filter(|w| w.len() == n).count();
                assert_eq!(count, reduced_word_count(g, n), "g={g} n={n}");
            }
            assert!(curve.words().iter().all(|w| w.is_reduced()));
        }
    }

    #[test]
    fn enumeration_examples() {
        let g1 = SchottkyCurve::new(SchottkyData::new(vec![c(0.0, 1.0)], vec![0.1], 2)).unwrap();
        let words: Vec<_> = g1
            .enumerate(EnumerationMode::AllWords)
            .unwrap()
            .into_iter()
            .map(|(w, _)| w.0)
            .collect();
        assert_eq!(words, vec![vec![], vec![1], vec![-1], vec![1, 1], vec![-1, -1]]);

        let data = SchottkyData::new(vec![c(-1.0, 1.0), c(1.0, 1.0)], vec![0.05, 0.05], 1);
        let g2 = SchottkyCurve::new(data).unwrap();
        assert_eq!(g2.enumerate(EnumerationMode::AllWords).unwrap().len(), 5);
        let star: Vec<_> = g2
            .enumerate(EnumerationMode::Star)
            .unwrap()
            .into_iter()
            .map(|(w, _)| w.0)
            .collect();
        assert_eq!(star, vec![vec![1], vec![2]]);
        assert!(g2.enumerate(EnumerationMode::Coset(2)).is_err());
    }

    #[test]
    fn coset_families() {
        let data = SchottkyData::new(vec![c(-1.0, 1.0), c(1.0, 1.0)], vec![0.05, 0.05], 4);
        let g2 = SchottkyCurve::new(data).unwrap();
        for (w, _) in g2.enumerate(EnumerationMode::Coset(0)).unwrap() {
            assert!(w.last().map_or(true, |l| l.abs() != 1));
        }
        let dc = g2.enumerate(EnumerationMode::DoubleCoset(0, 1)).unwrap();
        assert_eq!(dc[0].0, GroupWord::identity());
        for (w, _) in &dc {
            assert!(w.first().map_or(true, |l| l.abs() != 1));
            assert!(w.last().map_or(true, |l| l.abs() != 2));
        }
        // star set: exactly one of each inverse pair
        let star = g2.enumerate(EnumerationMode::Star).unwrap();
        let all = g2.enumerate(EnumerationMode::AllWords).unwrap();
        assert_eq!(2 * star.len(), all.len() - 1);
        for (w, _) in &star {
            assert!(!star.iter().any(|(v, _)| *v == w.inverse()));
        }
    }

    #[test]
    fn overlapping_circles_are_rejected() {
        let data = SchottkyData::new(vec![c(-0.2, 1.0), c(0.2, 1.0)], vec![0.3, 0.3], 2);
        assert!(matches!(
            SchottkyCurve::new(data),
            Err(Error::NotClassicalSchottky { .. })
        ));
        // a single hyperbolic generator always has disjoint isometric circles
        let data = SchottkyData::new(vec![c(0.0, 1.0)], vec![0.9], 2);
        assert!(SchottkyCurve::new(data).is_ok());
    }

    #[test]
    fn subgroup_drops_generators() {
        let data = SchottkyData::new(vec![c(-1.0, 1.0), c(1.0, 1.0)], vec![0.05, 0.02], 3);
        let g2 = SchottkyCurve::new(data.clone()).unwrap();
        let sub = g2.subgroup(&[0]).unwrap();
        assert_eq!(sub.genus(), 1);
        assert_eq!(sub.data().centers, vec![c(1.0, 1.0)]);
        assert_eq!(g2.subgroup(&[]).unwrap().data(), &data);
        assert_eq!(g2.subgroup(&[0, 1]).unwrap().genus(), 0);
    }
}
