//! Band-limited functions on `R^d`, represented on a periodized box
//! `[-L, L]^d`, with rough dyadic projections, the rough square function,
//! Poisson extension and the nontangential maximal function.
//!
//! Grid points are `x_j = -L + j·2L/R` and DFT bin `n` carries the frequency
//! `ξ = n / (2L)`. Every operator here is a Fourier multiplier, applied by
//! FFT on the box.

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::grid::{check_resolution, GridFunction};
use crate::spectral::CoeffEntry;

/// Relative size below which DFT bins are treated as empty when reporting
/// the spectral support.
const SUPPORT_TOL: f64 = 1e-12;

/// Samples of a function on `[-L, L]^d` whose spectrum lies strictly below
/// the grid Nyquist frequency `R / (4L)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandlimitedFn {
    halfwidth: f64,
    grid: GridFunction,
    spectral_support: Vec<(f64, f64)>,
}

/// JSON form: DFT coefficients of `Σ_n c_n e^{2πi n·x/(2L)}` plus the box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandlimitedFile {
    pub dim: usize,
    pub domain_halfwidth: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<Vec<usize>>,
    pub entries: Vec<CoeffEntry>,
}

fn check_halfwidth(l: f64) -> Result<()> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::param(format!(
            "domain half-width must be positive, got {l}"
        )));
    }
    Ok(())
}

/// `(-1)^{Σ n}`, the phase of `e^{2πi n·x/(2L)}` at the corner `x = -L`.
fn corner_phase(n: &[i64]) -> f64 {
    if n.iter().sum::<i64>().rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

impl BandlimitedFn {
    /// Wraps samples taken at `x_j = -L + j·2L/R`.
    pub fn from_samples(halfwidth: f64, grid: GridFunction) -> Result<Self> {
        check_halfwidth(halfwidth)?;
        let mut f = Self {
            halfwidth,
            grid,
            spectral_support: Vec::new(),
        };
        f.spectral_support = f.measure_support();
        Ok(f)
    }

    /// Samples `f` on the box grid.
    pub fn from_fn(
        halfwidth: f64,
        resolution: Vec<usize>,
        f: impl Fn(&[f64]) -> Complex64,
    ) -> Result<Self> {
        check_halfwidth(halfwidth)?;
        let width = 2.0 * halfwidth;
        let grid = GridFunction::from_fn(resolution, |u| {
            let x: Vec<f64> = u.iter().map(|&v| -halfwidth + width * v).collect();
            f(&x)
        })?;
        Self::from_samples(halfwidth, grid)
    }

    /// The function with Fourier transform `spectrum(ξ)`, discretized as the
    /// periodization `(2L)^{-d} Σ_n spectrum(n/2L) e^{2πi n·x/(2L)}`. The
    /// Nyquist bins are left empty.
    pub fn from_spectrum(
        halfwidth: f64,
        resolution: Vec<usize>,
        spectrum: impl Fn(&[f64]) -> Complex64,
    ) -> Result<Self> {
        check_halfwidth(halfwidth)?;
        check_resolution(&resolution)?;
        let scale = (2.0 * halfwidth).powi(resolution.len() as i32).recip();
        let total: usize = resolution.iter().product();
        let mut idx = vec![0; resolution.len()];
        let mut data = vec![Complex64::default(); total];
        for (flat, c) in data.iter_mut().enumerate() {
            fft::unravel(flat, &resolution, &mut idx);
            let n: Vec<i64> = idx
                .iter()
                .zip(&resolution)
                .map(|(&j, &r)| fft::signed_bin(j, r))
                .collect();
            if n.iter().zip(&resolution).any(|(&k, &r)| 2 * k == r as i64) {
                continue;
            }
            let xi: Vec<f64> = n.iter().map(|&k| k as f64 / (2.0 * halfwidth)).collect();
            *c = spectrum(&xi) * scale * corner_phase(&n);
        }
        fft::transform_nd(&mut data, &resolution, Direction::Inverse);
        Self::from_samples(halfwidth, GridFunction::new(resolution, data)?)
    }

    /// Builds the function `Σ_n c_n e^{2πi n·x/(2L)}` from explicit DFT
    /// coefficients.
    pub fn from_coefficients(
        halfwidth: f64,
        resolution: Vec<usize>,
        entries: impl IntoIterator<Item = (Vec<i64>, Complex64)>,
    ) -> Result<Self> {
        check_halfwidth(halfwidth)?;
        check_resolution(&resolution)?;
        let total: usize = resolution.iter().product();
        let mut data = vec![Complex64::default(); total];
        let mut idx = vec![0; resolution.len()];
        for (n, c) in entries {
            if n.len() != resolution.len() {
                return Err(Error::DimensionMismatch {
                    expected: resolution.len(),
                    found: n.len(),
                });
            }
            for (axis, (&k, &r)) in n.iter().zip(&resolution).enumerate() {
                if 2 * k.unsigned_abs() >= r as u64 {
                    return Err(Error::Aliasing {
                        axis,
                        resolution: r,
                        width: 2 * k.unsigned_abs() as usize,
                    });
                }
                idx[axis] = fft::wrap_bin(k, r);
            }
            data[fft::flat_index(&idx, &resolution)] += c * corner_phase(&n);
        }
        fft::transform_nd(&mut data, &resolution, Direction::Inverse);
        Self::from_samples(halfwidth, GridFunction::new(resolution, data)?)
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    pub fn resolution(&self) -> &[usize] {
        self.grid.resolution()
    }

    pub fn grid(&self) -> &GridFunction {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        self.grid.samples()
    }

    /// Per-axis `[min ξ, max ξ]` over the occupied DFT bins.
    pub fn spectral_support(&self) -> &[(f64, f64)] {
        &self.spectral_support
    }

    /// Grid spacing `2L / R` along `axis`.
    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.halfwidth / self.resolution()[axis] as f64
    }

    /// Frequency of DFT bin `j` along `axis`.
    pub fn frequency(&self, axis: usize, j: usize) -> f64 {
        fft::signed_bin(j, self.resolution()[axis]) as f64 / (2.0 * self.halfwidth)
    }

    pub fn nyquist(&self, axis: usize) -> f64 {
        self.resolution()[axis] as f64 / (4.0 * self.halfwidth)
    }

    /// Position of grid index `j` along `axis`.
    pub fn position(&self, axis: usize, j: usize) -> f64 {
        -self.halfwidth + j as f64 * self.spacing(axis)
    }

    /// Riemann sum of the Lebesgue L^p norm over the box.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        let volume = (2.0 * self.halfwidth).powi(self.dim() as i32);
        Ok(self.grid.lp_norm(p)? * volume.powf(1.0 / p))
    }

    /// `max |f|` over the grid points within 5% of the box boundary,
    /// relative to `max |f|`.
    pub fn boundary_ratio(&self) -> f64 {
        let res = self.resolution().to_vec();
        let mut idx = vec![0; res.len()];
        let mut edge: f64 = 0.0;
        for (flat, c) in self.samples().iter().enumerate() {
            fft::unravel(flat, &res, &mut idx);
            let near = idx.iter().zip(&res).any(|(&j, &r)| {
                let m = (r / 20).max(1);
                j < m || j >= r - m
            });
            if near {
                edge = edge.max(c.norm());
            }
        }
        let max = self.grid.sup_norm();
        if max == 0.0 {
            0.0
        } else {
            edge / max
        }
    }

    /// Normalized DFT of the samples (bin order, no corner phase).
    fn raw_spectrum(&self) -> Vec<Complex64> {
        let mut data = self.samples().to_vec();
        fft::transform_nd(&mut data, self.resolution(), Direction::Forward);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        data
    }

    fn bin_frequencies(&self, flat: usize, idx: &mut [usize], xi: &mut [f64]) {
        fft::unravel(flat, self.resolution(), idx);
        for axis in 0..self.dim() {
            xi[axis] = self.frequency(axis, idx[axis]);
        }
    }

    fn measure_support(&self) -> Vec<(f64, f64)> {
        let spec = self.raw_spectrum();
        let max = spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let d = self.dim();
        let mut support = vec![(f64::INFINITY, f64::NEG_INFINITY); d];
        let (mut idx, mut xi) = (vec![0; d], vec![0.0; d]);
        for (flat, c) in spec.iter().enumerate() {
            if c.norm() <= SUPPORT_TOL * max || max == 0.0 {
                continue;
            }
            self.bin_frequencies(flat, &mut idx, &mut xi);
            for (s, &x) in support.iter_mut().zip(&xi) {
                s.0 = s.0.min(x);
                s.1 = s.1.max(x);
            }
        }
        support
            .into_iter()
            .map(|(a, b)| if a > b { (0.0, 0.0) } else { (a, b) })
            .collect()
    }

    /// Applies the multiplier `m(ξ)` on the box.
    pub fn apply_multiplier(&self, m: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let mut spec = self.raw_spectrum();
        let d = self.dim();
        let (mut idx, mut xi) = (vec![0; d], vec![0.0; d]);
        for (flat, c) in spec.iter_mut().enumerate() {
            self.bin_frequencies(flat, &mut idx, &mut xi);
            *c *= m(&xi);
        }
        fft::transform_nd(&mut spec, self.resolution(), Direction::Inverse);
        Self::from_samples(
            self.halfwidth,
            GridFunction::new(self.resolution().to_vec(), spec)?,
        )
    }

    /// Nonnegative samples whose spectrum is not band-limited; the support
    /// is reported as the full grid band.
    fn modulus_output(&self, values: Vec<f64>) -> Result<Self> {
        let grid = GridFunction::new(
            self.resolution().to_vec(),
            values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        )?;
        let spectral_support = (0..self.dim())
            .map(|a| (-self.nyquist(a), self.nyquist(a)))
            .collect();
        Ok(Self {
            halfwidth: self.halfwidth,
            grid,
            spectral_support,
        })
    }

    pub fn to_json(&self) -> BandlimitedFile {
        let spec = self.raw_spectrum();
        let max = spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let res = self.resolution();
        let mut idx = vec![0; res.len()];
        let entries = spec
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > SUPPORT_TOL * max)
            .map(|(flat, c)| {
                fft::unravel(flat, res, &mut idx);
                let n: Vec<i64> = idx
                    .iter()
                    .zip(res)
                    .map(|(&j, &r)| fft::signed_bin(j, r))
                    .collect();
                let c = c * corner_phase(&n);
                CoeffEntry {
                    n,
                    re: c.re,
                    im: c.im,
                }
            })
            .collect();
        BandlimitedFile {
            dim: self.dim(),
            domain_halfwidth: self.halfwidth,
            resolution: Some(res.to_vec()),
            entries,
        }
    }

    /// Without an explicit resolution the grid is 4× the smallest one that
    /// resolves every coefficient.
    pub fn from_json(file: &BandlimitedFile) -> Result<Self> {
        let resolution = match &file.resolution {
            Some(r) => r.clone(),
            None => (0..file.dim)
                .map(|axis| {
                    let m = file
                        .entries
                        .iter()
                        .filter_map(|e| e.n.get(axis))
                        .map(|k| k.unsigned_abs() as usize)
                        .max()
                        .unwrap_or(0);
                    4 * (2 * m + 2).next_power_of_two()
                })
                .collect(),
        };
        if resolution.len() != file.dim {
            return Err(Error::DimensionMismatch {
                expected: file.dim,
                found: resolution.len(),
            });
        }
        Self::from_coefficients(
            file.domain_halfwidth,
            resolution,
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
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Index of the rough dyadic window `±[2^k, 2^{k+1})` containing `ξ`, or
/// `None` at the origin.
pub fn rough_block(xi: f64) -> Option<i32> {
    let a = xi.abs();
    if a == 0.0 || !a.is_finite() {
        return None;
    }
    let mut k = a.log2().floor() as i32;
    if 2f64.powi(k) > a {
        k -= 1;
    } else if 2f64.powi(k + 1) <= a {
        k += 1;
    }
    Some(k)
}

fn check_axis(f: &BandlimitedFn, axis: usize) -> Result<()> {
    if axis >= f.dim() {
        return Err(Error::param(format!(
            "axis {axis} out of range for dimension {}",
            f.dim()
        )));
    }
    Ok(())
}

/// Rough projection `P_k` along `axis`: keeps `ξ ∈ [2^k, 2^{k+1}) ∪
/// (-2^{k+1}, -2^k]`.
pub fn rough_project(f: &BandlimitedFn, k: i32, axis: usize) -> Result<BandlimitedFn> {
    check_axis(f, axis)?;
    f.apply_multiplier(|xi| {
        if rough_block(xi[axis]) == Some(k) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::default()
        }
    })
}

/// `S_{R^d} f = (Σ_{k_1..k_d} |P_{k_1} ⊗ .. ⊗ P_{k_d} f|^2)^{1/2}`.
///
/// Bins with `ξ_i = 0` on some axis lie in no window and are dropped.
pub fn euclid_square_function(f: &BandlimitedFn) -> Result<BandlimitedFn> {
    let spec = f.raw_spectrum();
    let d = f.dim();
    let res = f.resolution().to_vec();
    let mut groups: BTreeMap<Vec<i32>, Vec<usize>> = BTreeMap::new();
    let (mut idx, mut xi) = (vec![0; d], vec![0.0; d]);
    for (flat, c) in spec.iter().enumerate() {
        if *c == Complex64::default() {
            continue;
        }
        f.bin_frequencies(flat, &mut idx, &mut xi);
        let ks: Option<Vec<i32>> = xi.iter().map(|&x| rough_block(x)).collect();
        if let Some(ks) = ks {
            groups.entry(ks).or_default().push(flat);
        }
    }
    let pieces: Vec<Vec<usize>> = groups.into_values().collect();
    let total = spec.len();
    let acc = fft::par_sum_sq(pieces.len(), total, |i| {
        let mut data = vec![Complex64::default(); total];
        for &flat in &pieces[i] {
            data[flat] = spec[flat];
        }
        fft::transform_nd(&mut data, &res, Direction::Inverse);
        data
    });
    f.modulus_output(acc.into_iter().map(f64::sqrt).collect())
}

/// `f * P_t` for the unit-mass Poisson kernel `P_t(s) = t / (π(s² + t²))`,
/// i.e. the multiplier `e^{-2πt|ξ|}`.
pub fn poisson_extension(f: &BandlimitedFn, t: f64) -> Result<BandlimitedFn> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: f.dim(),
        });
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::param(format!(
            "Poisson parameter must be positive, got {t}"
        )));
    }
    f.apply_multiplier(|xi| {
        Complex64::new((-2.0 * std::f64::consts::PI * t * xi[0].abs()).exp(), 0.0)
    })
}

/// Discretization of the truncated cone `{(x', t): |x - x'| < t, t_min ≤ t
/// ≤ t_max}`.
///
/// Heights are the lattice `2^{j / t_count}` restricted to `[t_min, t_max]`
/// and the cone base is searched on the grid refined `x_count` times, so
/// enlarging the interval, `x_count` (by powers of two) or `t_count` (by
/// integer factors) only adds points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeParams {
    pub t_min: f64,
    pub t_max: f64,
    pub t_count: usize,
    pub x_count: usize,
}

impl ConeParams {
    pub fn new(t_min: f64, t_max: f64, t_count: usize, x_count: usize) -> Result<Self> {
        let c = Self {
            t_min,
            t_max,
            t_count,
            x_count,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_min < self.t_max && self.t_max.is_finite()) {
            return Err(Error::param(format!(
                "cone needs 0 < t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if self.t_count == 0 {
            return Err(Error::param("t_count must be positive"));
        }
        if self.x_count == 0 || !self.x_count.is_power_of_two() {
            return Err(Error::param(format!(
                "x_count must be a power of two, got {}",
                self.x_count
            )));
        }
        if self.heights().is_empty() {
            return Err(Error::param(format!(
                "no lattice height 2^(j/{}) lies in [{}, {}]; widen the interval or raise t_count",
                self.t_count, self.t_min, self.t_max
            )));
        }
        Ok(())
    }

    pub fn heights(&self) -> Vec<f64> {
        let tc = self.t_count as f64;
        let lo = (self.t_min.log2() * tc).floor() as i64 - 1;
        let hi = (self.t_max.log2() * tc).ceil() as i64 + 1;
        (lo..=hi)
            .map(|j| (j as f64 / tc).exp2())
            .filter(|&t| t >= self.t_min && t <= self.t_max)
            .collect()
    }
}

/// Maximum of `values` over the cyclic window `[c - m, c + m]` for each
/// `c ∈ centers`.
fn cyclic_window_max(values: &[f64], m: usize, stride: usize) -> Vec<f64> {
    let n = values.len();
    if 2 * m + 1 >= n {
        let all = values.iter().copied().fold(0.0, f64::max);
        return vec![all; n / stride];
    }
    // monotone deque over the unrolled sequence values[-m .. n + m)
    let at = |i: isize| values[i.rem_euclid(n as isize) as usize];
    let mut out = Vec::with_capacity(n / stride);
    let mut dq: VecDeque<isize> = VecDeque::new();
    let w = 2 * m as isize + 1;
    for i in -(m as isize)..(n + m) as isize {
        while dq.back().is_some_and(|&b| at(b) <= at(i)) {
            dq.pop_back();
        }
        dq.push_back(i);
        let start = i - w + 1;
        while dq.front().is_some_and(|&f| f < start) {
            dq.pop_front();
        }
        let center = i - m as isize;
        if center >= 0 && center % stride as isize == 0 {
            out.push(at(dq[0]));
        }
    }
    out
}

/// `N(f)(x) = max |P_t f(x')|` over the discretized cone above each grid
/// point.
pub fn nontangential_max(f: &BandlimitedFn, cone: &ConeParams) -> Result<BandlimitedFn> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: f.dim(),
        });
    }
    cone.validate()?;
    let r = f.resolution()[0];
    let rf = r * cone.x_count;
    let spec = f.raw_spectrum();
    let mut fine = vec![Complex64::default(); rf];
    for (j, &c) in spec.iter().enumerate() {
        let n = fft::signed_bin(j, r);
        if cone.x_count > 1 && 2 * n == r as i64 {
            // split the Nyquist bin so coarse samples are reproduced
            fine[fft::wrap_bin(n, rf)] += c * 0.5;
            fine[fft::wrap_bin(-n, rf)] += c * 0.5;
        } else {
            fine[fft::wrap_bin(n, rf)] += c;
        }
    }
    let h = f.spacing(0) / cone.x_count as f64;
    let two_l = 2.0 * f.halfwidth();
    let heights = cone.heights();
    let per_t: Vec<Vec<f64>> = heights
        .par_iter()
        .map(|&t| {
            let mut data: Vec<Complex64> = fine
                .iter()
                .enumerate()
                .map(|(j, &c)| {
                    let xi = fft::signed_bin(j, rf) as f64 / two_l;
                    c * (-2.0 * std::f64::consts::PI * t * xi.abs()).exp()
                })
                .collect();
            fft::transform_nd(&mut data, &[rf], Direction::Inverse);
            let moduli: Vec<f64> = data.iter().map(|c| c.norm()).collect();
            // grid offsets |i·h| < t
            let m = ((t / h).ceil() as usize).saturating_sub(1);
            cyclic_window_max(&moduli, m, cone.x_count)
        })
        .collect();
    let mut out = vec![0.0f64; r];
    for row in &per_t {
        for (o, &v) in out.iter_mut().zip(row) {
            *o = o.max(v);
        }
    }
    f.modulus_output(out)
}

/// Marcinkiewicz constant of a symbol on the line:
/// `max_k` of the total variation of `m` over `[2^k, 2^{k+1}]` plus over
/// `[-2^{k+1}, -2^k]`, each side sampled at `samples` uniform points.
pub fn line_marcinkiewicz_constant(
    m: impl Fn(f64) -> Complex64,
    blocks: std::ops::RangeInclusive<i32>,
    samples: usize,
) -> Result<f64> {
    if samples < 2 || blocks.is_empty() {
        return Err(Error::param(
            "need at least two samples per block and a nonempty block range",
        ));
    }
    let variation = |a: f64, b: f64| {
        let step = (b - a) / (samples - 1) as f64;
        (1..samples)
            .map(|i| (m(a + i as f64 * step) - m(a + (i - 1) as f64 * step)).norm())
            .sum::<f64>()
    };
    Ok(blocks
        .map(|k| {
            let (a, b) = (2f64.powi(k), 2f64.powi(k + 1));
            variation(a, b) + variation(-b, -a)
        })
        .fold(0.0, f64::max))
}
