//! Uniform sample grids on the d-torus.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::spectral::TrigPoly;

/// Complex samples of a function on the uniform grid `j / resolution` along
/// each axis of the d-torus, stored row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    resolution: Vec<usize>,
    samples: Vec<Complex64>,
}

pub(crate) fn check_resolution(resolution: &[usize]) -> Result<()> {
    if resolution.is_empty() {
        return Err(Error::param("grid needs at least one axis"));
    }
    for &r in resolution {
        if r < 2 || !r.is_power_of_two() {
            return Err(Error::InvalidResolution(r));
        }
    }
    Ok(())
}

impl GridFunction {
    pub fn new(resolution: Vec<usize>, samples: Vec<Complex64>) -> Result<Self> {
        check_resolution(&resolution)?;
        let expected: usize = resolution.iter().product();
        if samples.len() != expected {
            return Err(Error::param(format!(
                "{} samples supplied for a grid of {} points",
                samples.len(),
                expected
            )));
        }
        Ok(Self {
            resolution,
            samples,
        })
    }

    pub fn constant(resolution: Vec<usize>, c: Complex64) -> Result<Self> {
        check_resolution(&resolution)?;
        let n = resolution.iter().product();
        Ok(Self {
            resolution,
            samples: vec![c; n],
        })
    }

    /// Samples `f` at the grid points `x_j = j / resolution_j`.
    pub fn from_fn(resolution: Vec<usize>, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        check_resolution(&resolution)?;
        let n: usize = resolution.iter().product();
        let mut idx = vec![0; resolution.len()];
        let mut x = vec![0.0; resolution.len()];
        let samples = (0..n)
            .map(|flat| {
                fft::unravel(flat, &resolution, &mut idx);
                for (axis, xi) in x.iter_mut().enumerate() {
                    *xi = idx[axis] as f64 / resolution[axis] as f64;
                }
                f(&x)
            })
            .collect();
        Ok(Self {
            resolution,
            samples,
        })
    }

    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.samples[fft::flat_index(idx, &self.resolution)]
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.samples.iter().map(|c| c.norm()).collect()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            resolution: self.resolution.clone(),
            samples: self.samples.iter().map(|&c| f(c)).collect(),
        }
    }

    /// Pointwise combination of two grids with identical resolution.
    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.resolution != other.resolution {
            return Err(Error::param(format!(
                "grid resolutions differ: {:?} vs {:?}",
                self.resolution, other.resolution
            )));
        }
        Ok(Self {
            resolution: self.resolution.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn abs(&self) -> Self {
        self.map(|c| Complex64::new(c.norm(), 0.0))
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `(mean |g|^p)^{1/p}` over the grid, i.e. the Riemann sum of the
    /// L^p norm on the probability torus.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::InvalidExponent(p));
        }
        let n = self.samples.len() as f64;
        let mean = if p == 2.0 {
            self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() / n
        } else if p == 1.0 {
            self.samples.iter().map(|c| c.norm()).sum::<f64>() / n
        } else {
            self.samples.iter().map(|c| c.norm().powf(p)).sum::<f64>() / n
        };
        Ok(mean.powf(1.0 / p))
    }

    /// Forward FFT normalized so that `analyze` inverts
    /// [`TrigPoly::synthesize`]. Bins above `resolution/2` map to negative
    /// frequencies.
    pub fn analyze(&self) -> TrigPoly {
        let mut data = self.samples.clone();
        fft::transform_nd(&mut data, &self.resolution, Direction::Forward);
        let scale = 1.0 / data.len() as f64;
        let mut idx = vec![0; self.dim()];
        let entries = data.into_iter().enumerate().map(|(flat, c)| {
            fft::unravel(flat, &self.resolution, &mut idx);
            let n = idx
                .iter()
                .zip(&self.resolution)
                .map(|(&j, &r)| fft::signed_bin(j, r))
                .collect::<Vec<_>>();
            (n, c * scale)
        });
        TrigPoly::new(self.dim(), entries).expect("dimension is consistent by construction")
    }

    /// Outer product `g(x_1, .., x_d) = g_1(x_1) ... g_d(x_d)` of grid
    /// functions.
    pub fn tensor_product(factors: &[GridFunction]) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| Error::param("tensor product of an empty list"))?;
        let mut out = first.clone();
        for g in &factors[1..] {
            let mut samples = Vec::with_capacity(out.len() * g.len());
            for a in &out.samples {
                samples.extend(g.samples.iter().map(|b| a * b));
            }
            let mut resolution = out.resolution.clone();
            resolution.extend_from_slice(&g.resolution);
            out = GridFunction {
                resolution,
                samples,
            };
        }
        Ok(out)
    }

    /// CSV dump with one sample per row in index-major order:
    /// `i1,..,id,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=self.dim()).map(|a| format!("i{a}")).collect();
        header.push("re".into());
        header.push("im".into());
        wtr.write_record(&header)?;
        let mut idx = vec![0; self.dim()];
        for (flat, c) in self.samples.iter().enumerate() {
            fft::unravel(flat, &self.resolution, &mut idx);
            let mut rec: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            rec.push(c.re.to_string());
            rec.push(c.im.to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}
