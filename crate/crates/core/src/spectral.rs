//! Trigonometric polynomials on the d-torus, stored by their Fourier
//! coefficients.
//!
//! A [`TrigPoly`] is a sparse map from lattice points `n ∈ Z^d` to complex
//! amplitudes. Dense arrays only appear at FFT boundaries
//! ([`TrigPoly::synthesize`] and [`GridFunction::analyze`]); the extremal
//! families used by the experiments are sparse at high degree, and the
//! dyadic block machinery works coefficient-wise.
//!
//! Norms for `p != 2` are Riemann sums of `|f|^p` on an oversampled power of
//! two grid. Trapezoid sums on the torus converge spectrally for smooth
//! integrands, and `|f|^p` is smooth away from the zeros of `f`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::grid::{check_resolution, GridFunction};

/// Default oversampling factor for Riemann-sum norms.
pub const DEFAULT_OVERSAMPLE: usize = 8;

/// A trigonometric polynomial `f(x) = Σ_n c_n e^{2πi n·x}` on `T^d`.
///
/// Invariants: every key has length `dim`, no stored amplitude is exactly
/// zero, and `support` is the per-axis bounding box of the keys.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    dim: usize,
    coeffs: BTreeMap<Vec<i64>, Complex64>,
    support: Vec<(i64, i64)>,
}

impl TrigPoly {
    /// Builds a polynomial from `(frequency, amplitude)` pairs. Repeated
    /// frequencies are summed; exact zeros are dropped.
    pub fn new(
        dim: usize,
        entries: impl IntoIterator<Item = (Vec<i64>, Complex64)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dimension must be positive"));
        }
        let mut coeffs: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (n, c) in entries {
            if n.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: n.len(),
                });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::Numerical(format!("non-finite amplitude at {n:?}")));
            }
            *coeffs.entry(n).or_default() += c;
        }
        coeffs.retain(|_, c| *c != Complex64::default());
        Ok(Self::from_map(dim, coeffs))
    }

    fn from_map(dim: usize, coeffs: BTreeMap<Vec<i64>, Complex64>) -> Self {
        let support = if coeffs.is_empty() {
            Vec::new()
        } else {
            let mut bx = vec![(i64::MAX, i64::MIN); dim];
            for n in coeffs.keys() {
                for (b, &k) in bx.iter_mut().zip(n) {
                    b.0 = b.0.min(k);
                    b.1 = b.1.max(k);
                }
            }
            bx
        };
        Self {
            dim,
            coeffs,
            support,
        }
    }

    pub fn zero(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self::from_map(dim, BTreeMap::new())
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        assert!(dim > 0, "dimension must be positive");
        let mut coeffs = BTreeMap::new();
        if c != Complex64::default() {
            coeffs.insert(vec![0; dim], c);
        }
        Self::from_map(dim, coeffs)
    }

    /// The character `e_n(x) = e^{2πi n·x}`.
    pub fn exponential(n: &[i64]) -> Self {
        assert!(!n.is_empty(), "dimension must be positive");
        let mut coeffs = BTreeMap::new();
        coeffs.insert(n.to_vec(), Complex64::new(1.0, 0.0));
        Self::from_map(n.len(), coeffs)
    }

    /// One-dimensional polynomial from `(n, c_n)` pairs.
    pub fn from_1d(entries: impl IntoIterator<Item = (i64, Complex64)>) -> Self {
        Self::new(1, entries.into_iter().map(|(n, c)| (vec![n], c))).expect("one-dimensional keys")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, n: &[i64]) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i64], Complex64)> + '_ {
        self.coeffs.iter().map(|(n, &c)| (n.as_slice(), c))
    }

    /// Per-axis `(min, max)` frequency bounds; empty for the zero polynomial.
    pub fn support_box(&self) -> &[(i64, i64)] {
        &self.support
    }

    /// Number of integer frequencies spanned along `axis` (`max - min + 1`).
    pub fn width(&self, axis: usize) -> usize {
        self.support
            .get(axis)
            .map_or(0, |&(lo, hi)| (hi - lo + 1) as usize)
    }

    /// Coefficient ℓ² norm, equal to the L² norm by Plancherel.
    pub fn coefficient_l2(&self) -> f64 {
        self.coeffs
            .values()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient-wise difference `max_n |a_n - b_n|`.
    pub fn max_coeff_diff(&self, other: &TrigPoly) -> f64 {
        let a = self.coeffs.iter().map(|(n, c)| (c - other.coeff(n)).norm());
        let b = other
            .coeffs
            .iter()
            .filter(|(n, _)| !self.coeffs.contains_key(*n))
            .map(|(_, c)| c.norm());
        a.chain(b).fold(0.0, f64::max)
    }

    pub fn filter(&self, mut keep: impl FnMut(&[i64], Complex64) -> bool) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(n, c)| keep(n, **c))
            .map(|(n, c)| (n.clone(), *c))
            .collect();
        Self::from_map(self.dim, coeffs)
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&[i64], Complex64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(n, &c)| (n.clone(), f(n, c)))
            .filter(|(_, c)| *c != Complex64::default())
            .collect();
        Self::from_map(self.dim, coeffs)
    }

    /// Drops coefficients with modulus at most `tol` times the largest one.
    pub fn prune(&self, tol: f64) -> Self {
        let cut = tol * self.max_abs_coeff();
        self.filter(|_, c| c.norm() > cut)
    }

    /// True iff every support point lies in `N_0^d`.
    pub fn is_analytic(&self) -> bool {
        self.support.iter().all(|&(lo, _)| lo >= 0)
    }

    /// Translates the spectrum: `out(n) = f(n - shift)`, i.e. multiplies by
    /// `e^{2πi shift·x}`.
    pub fn modulate(&self, shift: &[i64]) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: shift.len(),
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(n, &c)| (n.iter().zip(shift).map(|(a, b)| a + b).collect(), c))
            .collect();
        Ok(Self::from_map(self.dim, coeffs))
    }

    /// `g(x_1, .., x_d) = f_1(x_1) ... f_d(x_d)` for one-dimensional factors.
    pub fn tensor_product(factors: &[TrigPoly]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::param("tensor product of an empty list"));
        }
        if let Some(f) = factors.iter().find(|f| f.dim != 1) {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: f.dim,
            });
        }
        let mut coeffs: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        coeffs.insert(Vec::new(), Complex64::new(1.0, 0.0));
        for f in factors {
            let mut next = BTreeMap::new();
            for (n, c) in &coeffs {
                for (m, d) in &f.coeffs {
                    let mut key = n.clone();
                    key.push(m[0]);
                    next.insert(key, c * d);
                }
            }
            coeffs = next;
        }
        coeffs.retain(|_, c| *c != Complex64::default());
        Ok(Self::from_map(factors.len(), coeffs))
    }

    pub(crate) fn check_grid(&self, resolution: &[usize]) -> Result<()> {
        check_resolution(resolution)?;
        if resolution.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: resolution.len(),
            });
        }
        for (axis, &r) in resolution.iter().enumerate() {
            let w = self.width(axis);
            // distinct frequencies stay distinct mod r iff max - min < r
            if w > r {
                return Err(Error::Aliasing {
                    axis,
                    resolution: r,
                    width: w.saturating_sub(1),
                });
            }
        }
        Ok(())
    }

    /// Samples `Σ_n c_n e^{2πi n·x}` on the grid `x_j = j / resolution` by an
    /// inverse FFT, with negative frequencies wrapped modulo the resolution.
    pub fn synthesize(&self, resolution: &[usize]) -> Result<GridFunction> {
        self.check_grid(resolution)?;
        let mut data = self.dense_spectrum(resolution);
        fft::transform_nd(&mut data, resolution, Direction::Inverse);
        GridFunction::new(resolution.to_vec(), data)
    }

    /// Coefficients embedded into the DFT bins of a grid (caller checks
    /// admissibility).
    pub(crate) fn dense_spectrum(&self, resolution: &[usize]) -> Vec<Complex64> {
        let total: usize = resolution.iter().product();
        let mut data = vec![Complex64::default(); total];
        let mut idx = vec![0; self.dim];
        for (n, &c) in &self.coeffs {
            for (axis, &k) in n.iter().enumerate() {
                idx[axis] = fft::wrap_bin(k, resolution[axis]);
            }
            data[fft::flat_index(&idx, resolution)] = c;
        }
        data
    }

    /// Power-of-two grid with at least `oversample` points per spanned
    /// frequency on each axis.
    pub fn norm_grid(&self, oversample: usize) -> Vec<usize> {
        (0..self.dim)
            .map(|axis| {
                (oversample * self.width(axis).max(1))
                    .next_power_of_two()
                    .max(2)
            })
            .collect()
    }

    /// L^p(T^d) norm for `p ≥ 1`.
    ///
    /// `p = 2` returns the exact Plancherel value; other exponents use the
    /// grid mean of `|f|^p` on [`TrigPoly::norm_grid`].
    pub fn lp_norm(&self, p: f64, oversample: usize) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidExponent(p));
        }
        if oversample < 2 {
            return Err(Error::param(format!(
                "oversample must be ≥ 2, got {oversample}"
            )));
        }
        if p == 2.0 {
            return Ok(self.coefficient_l2());
        }
        if self.is_empty() {
            return Ok(0.0);
        }
        self.synthesize(&self.norm_grid(oversample))?.lp_norm(p)
    }

    pub fn to_json(&self) -> CoeffFile {
        CoeffFile {
            dim: self.dim,
            entries: self
                .coeffs
                .iter()
                .map(|(n, c)| CoeffEntry {
                    n: n.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }

    pub fn from_json(file: &CoeffFile) -> Result<Self> {
        Self::new(
            file.dim,
            file.entries
                .iter()
                .map(|e| (e.n.clone(), Complex64::new(e.re, e.im))),
        )
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&serde_json::from_str(&text)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&self.to_json())?;
        std::fs::write(path, text + "\n").map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// On-disk coefficient format:
/// `{ "dim": d, "entries": [ { "n": [n1, .., nd], "re": r, "im": i }, .. ] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffFile {
    pub dim: usize,
    pub entries: Vec<CoeffEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub n: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

fn merge(a: &TrigPoly, b: &TrigPoly, sign: f64) -> TrigPoly {
    assert_eq!(a.dim, b.dim, "polynomials of different dimension");
    let mut coeffs = a.coeffs.clone();
    for (n, c) in &b.coeffs {
        *coeffs.entry(n.clone()).or_default() += c * sign;
    }
    coeffs.retain(|_, c| *c != Complex64::default());
    TrigPoly::from_map(a.dim, coeffs)
}

impl Add for &TrigPoly {
    type Output = TrigPoly;

    /// Panics if the dimensions differ.
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        merge(self, rhs, 1.0)
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;

    /// Panics if the dimensions differ.
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        merge(self, rhs, -1.0)
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;

    fn neg(self) -> TrigPoly {
        self.map_coeffs(|_, c| -c)
    }
}

impl Mul<Complex64> for &TrigPoly {
    type Output = TrigPoly;

    fn mul(self, rhs: Complex64) -> TrigPoly {
        self.map_coeffs(|_, c| c * rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Direct evaluation of the Fourier series at a point.
    fn eval(f: &TrigPoly, x: &[f64]) -> Complex64 {
        f.iter()
            .map(|(n, a)| {
                let ph: f64 = n.iter().zip(x).map(|(&k, &t)| k as f64 * t).sum();
                a * Complex64::from_polar(1.0, 2.0 * PI * ph)
            })
            .sum()
    }

    fn lcg_poly(seed: u64, lo: i64, hi: i64) -> TrigPoly {
        let mut s = seed;
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        TrigPoly::from_1d((lo..=hi).map(|n| (n, c(next(), next()))))
    }

    #[test]
    fn construction_drops_zeros_and_sums_duplicates() {
        let f = TrigPoly::new(
            1,
            vec![
                (vec![2], c(1.0, 0.0)),
                (vec![2], c(-1.0, 0.0)),
                (vec![-3], c(0.5, 0.0)),
                (vec![5], c(0.0, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.support_box(), &[(-3, -3)]);
        assert!(TrigPoly::new(2, vec![(vec![1], c(1.0, 0.0))]).is_err());
        assert!(TrigPoly::zero(3).support_box().is_empty());
    }

    #[test]
    fn synthesize_single_exponential() {
        let g = TrigPoly::exponential(&[1]).synthesize(&[4]).unwrap();
        let want = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (a, b) in g.samples().iter().zip(want) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn synthesize_constant() {
        let g = TrigPoly::constant(2, c(0.3, -2.0))
            .synthesize(&[4, 8])
            .unwrap();
        assert!(g
            .samples()
            .iter()
            .all(|&s| (s - c(0.3, -2.0)).norm() < 1e-15));
    }

    #[test]
    fn synthesize_rejects_aliasing() {
        let f = TrigPoly::from_1d([(-8, c(1.0, 0.0)), (8, c(1.0, 0.0))]);
        assert!(matches!(f.synthesize(&[16]), Err(Error::Aliasing { .. })));
        assert!(f.synthesize(&[32]).is_ok());
        // width 16 fits exactly into 17 points, so 32 is the smallest power of two
        let g = TrigPoly::from_1d([(0, c(1.0, 0.0)), (15, c(1.0, 0.0))]);
        assert!(g.synthesize(&[16]).is_ok());
    }

    #[test]
    fn synthesize_matches_direct_summation() {
        let f = lcg_poly(3, -8, 8);
        let g = f.synthesize(&[32]).unwrap();
        for j in 0..32 {
            let direct = eval(&f, &[j as f64 / 32.0]);
            assert!((g.samples()[j] - direct).norm() < 1e-12);
        }
        // direct summation at 33 points, then a 33-point DFT recovers f
        let pts: Vec<Complex64> = (0..33).map(|j| eval(&f, &[j as f64 / 33.0])).collect();
        for n in -8..=8i64 {
            let cn: Complex64 = pts
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    v * Complex64::from_polar(1.0, -2.0 * PI * (n * j as i64) as f64 / 33.0)
                })
                .sum::<Complex64>()
                / 33.0;
            assert!((cn - f.coeff(&[n])).norm() < 1e-12);
        }
        assert!(g.analyze().max_coeff_diff(&f) < 1e-12);
    }

    #[test]
    fn lp_norm_examples() {
        let k = c(2.5, -1.0);
        for p in [1.0, 1.5, 3.0] {
            let v = TrigPoly::constant(1, k).lp_norm(p, 8).unwrap();
            assert!((v - k.norm()).abs() < 1e-13);
        }
        let f = TrigPoly::from_1d([(0, c(1.0, 0.0)), (1, c(1.0, 0.0))]);
        assert!((f.lp_norm(2.0, 8).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let cos2 = TrigPoly::from_1d([(-1, c(1.0, 0.0)), (1, c(1.0, 0.0))]);
        // 10^6-point midpoint rule for ∫ 16 cos^4
        let m = 1_000_000;
        let q: f64 = (0..m)
            .map(|j| (2.0 * (2.0 * PI * (j as f64 + 0.5) / m as f64).cos()).powi(4))
            .sum::<f64>()
            / m as f64;
        assert!((q - 6.0).abs() < 1e-9);
        let v = cos2.lp_norm(4.0, 8).unwrap();
        assert!((v - q.powf(0.25)).abs() < 1e-12);
        assert!((v - 1.56508).abs() < 1e-5);
    }

    #[test]
    fn lp_norm_rejects_bad_inputs() {
        let f = TrigPoly::exponential(&[3]);
        assert!(matches!(f.lp_norm(0.5, 8), Err(Error::InvalidExponent(_))));
        assert!(f.lp_norm(f64::INFINITY, 8).is_err());
        assert!(f.lp_norm(1.0, 1).is_err());
    }

    #[test]
    fn tensor_product_examples() {
        let g =
            TrigPoly::tensor_product(&[TrigPoly::exponential(&[1]), TrigPoly::exponential(&[2])])
                .unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.coeff(&[1, 2]), c(1.0, 0.0));

        let f = lcg_poly(9, -2, 3);
        let lifted =
            TrigPoly::tensor_product(&[f.clone(), TrigPoly::constant(1, c(1.0, 0.0))]).unwrap();
        assert_eq!(lifted.dim(), 2);
        for n in -2..=3 {
            assert_eq!(lifted.coeff(&[n, 0]), f.coeff(&[n]));
        }
        assert!(TrigPoly::tensor_product(&[]).is_err());
        assert!(TrigPoly::tensor_product(&[g]).is_err());
    }

    #[test]
    fn tensor_norms_factor() {
        // Fubini on product grids
        for seed in 0..5 {
            let f = lcg_poly(seed, -4, 6);
            let g = TrigPoly::tensor_product(&[f.clone(), f.clone()]).unwrap();
            for p in [1.0, 1.5, 2.0] {
                let a = g.lp_norm(p, 8).unwrap();
                let b = f.lp_norm(p, 8).unwrap().powi(2);
                assert!((a - b).abs() < 1e-6 * b, "p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn modulate_examples() {
        let one = TrigPoly::constant(1, c(1.0, 0.0));
        assert_eq!(one.modulate(&[5]).unwrap(), TrigPoly::exponential(&[5]));
        let f = lcg_poly(11, -3, 3);
        assert_eq!(f.modulate(&[7]).unwrap().modulate(&[-7]).unwrap(), f);
        assert!(f.modulate(&[1, 1]).is_err());
    }

    #[test]
    fn analyticity() {
        assert!(!TrigPoly::exponential(&[-1]).is_analytic());
        assert!(TrigPoly::constant(2, c(1.0, 0.0)).is_analytic());
        assert!(TrigPoly::exponential(&[0, 4]).is_analytic());
        assert!(!TrigPoly::exponential(&[3, -4]).is_analytic());
    }

    #[test]
    fn json_round_trip() {
        let f = TrigPoly::new(
            2,
            vec![(vec![1, -2], c(0.25, 3.0)), (vec![0, 0], c(-1.0, 0.0))],
        )
        .unwrap();
        let text = serde_json::to_string(&f.to_json()).unwrap();
        let back = TrigPoly::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, f);
        let raw = r#"{"dim":1,"entries":[{"n":[3],"re":1.0,"im":-0.5}]}"#;
        let g = TrigPoly::from_json(&serde_json::from_str(raw).unwrap()).unwrap();
        assert_eq!(g.coeff(&[3]), c(1.0, -0.5));
    }
}
