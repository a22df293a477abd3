//! Conjugate functions, analytic projection and outer functions on the
//! circle, plus the bounded/integrable splitting of analytic polynomials.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::grid::GridFunction;
use crate::spectral::TrigPoly;

fn require_1d(dim: usize) -> Result<()> {
    if dim != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: dim,
        });
    }
    Ok(())
}

/// Periodic Hilbert transform: `(Hf)^(n) = -i sgn(n) f^(n)`.
pub fn conjugate_function(f: &TrigPoly) -> Result<TrigPoly> {
    require_1d(f.dim())?;
    let minus_i = Complex64::new(0.0, -1.0);
    Ok(f.map_coeffs(|n, c| minus_i * c * n[0].signum() as f64)
        .prune(0.0))
}

/// Riesz projection onto the frequencies `n ≥ 0`.
pub fn analytic_projection(f: &TrigPoly) -> Result<TrigPoly> {
    require_1d(f.dim())?;
    Ok(f.filter(|n, _| n[0] >= 0))
}

/// `‖f‖_1 + ‖Hf‖_1` on the oversampled grid.
pub fn h1_norm(f: &TrigPoly, oversample: usize) -> Result<f64> {
    let hf = conjugate_function(f)?;
    Ok(f.lp_norm(1.0, oversample)? + hf.lp_norm(1.0, oversample)?)
}

/// Boundary values of the outer function with modulus `w`:
/// `exp(log w + i H(log w))`, the conjugate taken on the grid spectrum of
/// `log w` with the Nyquist bin dropped.
pub fn outer_function(w: &GridFunction) -> Result<GridFunction> {
    require_1d(w.dim())?;
    let mut u = Vec::with_capacity(w.len());
    for c in w.samples() {
        if !(c.re > 0.0) || !c.re.is_finite() || c.im.abs() > 1e-12 * c.re {
            return Err(Error::param(format!(
                "outer modulus must be strictly positive and real, found {c}"
            )));
        }
        u.push(c.re.ln());
    }
    let r = w.len();
    let mut spec: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::transform_nd(&mut spec, &[r], Direction::Forward);
    let scale = 1.0 / r as f64;
    for (j, c) in spec.iter_mut().enumerate() {
        let n = fft::signed_bin(j, r);
        *c = if n == 0 || 2 * n == r as i64 {
            Complex64::default()
        } else {
            Complex64::new(0.0, -(n.signum() as f64)) * *c * scale
        };
    }
    fft::transform_nd(&mut spec, &[r], Direction::Inverse);
    let samples = u
        .iter()
        .zip(&spec)
        .map(|(&a, b)| Complex64::from_polar(a.exp(), b.re))
        .collect();
    GridFunction::new(vec![r], samples)
}

/// `f = h + g` with `|h| = min(|f|, λ²/|f|)` pointwise and `g` carried by
/// the set where `|f|` is large.
#[derive(Clone, Debug)]
pub struct KxSplit {
    pub f: GridFunction,
    pub h: GridFunction,
    pub g: GridFunction,
    pub lambda: f64,
    /// `max |h| / min(|f|, λ²/|f|)` over the grid.
    pub bullet1_c: f64,
    /// `‖g‖_1 / ∫_{|f|>λ} |f|`, zero when the set is empty.
    pub bullet2_c: f64,
    pub witness_constant: f64,
    /// `max |h + g - f|`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KxReport {
    pub lambda: f64,
    pub h_sup: f64,
    #[serde(rename = "bullet1_C")]
    pub bullet1_c: f64,
    #[serde(rename = "bullet2_C")]
    pub bullet2_c: f64,
    pub residual: f64,
}

impl KxSplit {
    pub fn report(&self) -> KxReport {
        KxReport {
            lambda: self.lambda,
            h_sup: self.h.sup_norm(),
            bullet1_c: self.bullet1_c,
            bullet2_c: self.bullet2_c,
            residual: self.residual,
        }
    }
}

/// Splits an analytic polynomial at height `lambda` using the outer function
/// with modulus `min(1, λ²/|f|²)`.
pub fn kx_split(f: &TrigPoly, lambda: f64, resolution: usize) -> Result<KxSplit> {
    require_1d(f.dim())?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::param(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !f.is_analytic() {
        return Err(Error::param(
            "split needs an analytic polynomial (no negative frequencies)",
        ));
    }
    let fg = f.synthesize(&[resolution])?;
    let moduli = fg.moduli();
    let max = moduli.iter().copied().fold(0.0, f64::max);
    let min = moduli.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 1e-10 * max) {
        return Err(Error::ZeroOnGrid { min, max });
    }
    let lam2 = lambda * lambda;
    let w = GridFunction::new(
        vec![resolution],
        moduli
            .iter()
            .map(|&a| Complex64::new((lam2 / (a * a)).min(1.0), 0.0))
            .collect(),
    )?;
    let o = outer_function(&w)?;
    let one = Complex64::new(1.0, 0.0);
    let h = fg.zip_with(&o, |a, b| a * b)?;
    let g = fg.zip_with(&o, |a, b| a * (one - b))?;

    let bullet1_c = h
        .samples()
        .iter()
        .zip(&moduli)
        .map(|(hv, &a)| hv.norm() / a.min(lam2 / a))
        .fold(0.0, f64::max);
    let n = resolution as f64;
    let g_l1 = g.samples().iter().map(|c| c.norm()).sum::<f64>() / n;
    let big = moduli.iter().filter(|&&a| a > lambda).sum::<f64>() / n;
    let bullet2_c = if big > 0.0 { g_l1 / big } else { 0.0 };
    let residual = h
        .samples()
        .iter()
        .zip(g.samples())
        .zip(fg.samples())
        .map(|((a, b), c)| (a + b - c).norm())
        .fold(0.0, f64::max);
    Ok(KxSplit {
        f: fg,
        h,
        g,
        lambda,
        bullet1_c,
        bullet2_c,
        witness_constant: bullet1_c.max(bullet2_c),
        residual,
    })
}
