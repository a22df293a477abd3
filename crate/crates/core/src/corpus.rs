//! Seeded random inputs for the property checks and experiments.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::euclid::BandlimitedFn;
use crate::orlicz::RademacherSum;
use crate::spectral::TrigPoly;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Analytic polynomial on `T^d` with `terms` complex Gaussian coefficients
/// at uniform frequencies in `[0, width)^d`.
pub fn random_analytic<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    width: i64,
    terms: usize,
) -> Result<TrigPoly> {
    let width = width.max(1);
    let entries: Vec<(Vec<i64>, Complex64)> = (0..terms.max(1))
        .map(|_| {
            let n = (0..dim).map(|_| rng.random_range(0..width)).collect();
            (n, gaussian(rng))
        })
        .collect();
    TrigPoly::new(dim, entries)
}

/// Random polynomial on `T^d` with frequencies in `[-width, width]^d`.
pub fn random_poly<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    width: i64,
    terms: usize,
) -> Result<TrigPoly> {
    let entries: Vec<(Vec<i64>, Complex64)> = (0..terms.max(1))
        .map(|_| {
            let n = (0..dim).map(|_| rng.random_range(-width..=width)).collect();
            (n, gaussian(rng))
        })
        .collect();
    TrigPoly::new(dim, entries)
}

/// `c Π_j (1 - a_j e^{2πi k_j x})` with `|a_j| ≤ 0.8`: analytic and zero
/// free on the circle, with `|f| ≥ |c| 0.2^J`.
pub fn zero_free_analytic<R: Rng + ?Sized>(rng: &mut R, max_factors: usize) -> Result<TrigPoly> {
    let one = Complex64::new(1.0, 0.0);
    let count = rng.random_range(1..=max_factors.max(1));
    let mut f = TrigPoly::constant(
        1,
        Complex64::from_polar(
            rng.random_range(0.5..2.0),
            rng.random_range(0.0..std::f64::consts::TAU),
        ),
    );
    for _ in 0..count {
        let k = rng.random_range(1..=4);
        let a = Complex64::from_polar(
            rng.random_range(0.1..0.8),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        let factor = TrigPoly::from_1d([(0, one), (k, -a)]);
        f = multiply_1d(&f, &factor);
    }
    Ok(f)
}

fn multiply_1d(a: &TrigPoly, b: &TrigPoly) -> TrigPoly {
    let entries = a
        .iter()
        .flat_map(|(n, x)| b.iter().map(move |(m, y)| (n[0] + m[0], x * y)));
    TrigPoly::from_1d(entries.collect::<Vec<_>>())
}

/// Complex Gaussian Rademacher coefficients on a random box
/// `[0, m_1) × .. × [0, m_d)` with `m_i ∈ [min_side, max_side]`.
pub fn random_rademacher<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    min_side: usize,
    max_side: usize,
) -> Result<RademacherSum> {
    let sides: Vec<usize> = (0..dim)
        .map(|_| rng.random_range(min_side..=max_side))
        .collect();
    let total: usize = sides.iter().product();
    let mut entries = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        entries.push((idx.clone(), gaussian(rng)));
        for axis in (0..dim).rev() {
            idx[axis] += 1;
            if idx[axis] < sides[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
    RademacherSum::new(dim, entries)
}

/// Truncated Gaussian bump `e^{-s²}`, `|s| < 6`.
fn bump(s: f64) -> f64 {
    if s.abs() < 6.0 {
        (-s * s).exp()
    } else {
        0.0
    }
}

/// Sum of one to three separable Gaussian spectral bumps on
/// `[-halfwidth, halfwidth]^d`. Bump centers sit at `0.5 ≤ |ξ_i| ≤ 4` and
/// supports stay within `0.1 ≤ |ξ_i| < 7`; `analytic` keeps all centers
/// positive.
pub fn bandlimited_bumps<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    halfwidth: f64,
    resolution: usize,
    analytic: bool,
) -> Result<BandlimitedFn> {
    let count = rng.random_range(1..=3);
    let bumps: Vec<(Complex64, Vec<(f64, f64)>)> = (0..count)
        .map(|_| {
            let amp = gaussian(rng);
            let axes = (0..dim)
                .map(|_| {
                    let mut center: f64 = rng.random_range(0.5..4.0);
                    if !analytic && rng.random_bool(0.5) {
                        center = -center;
                    }
                    let sigma = rng.random_range(0.05..((center.abs() - 0.1) / 6.0).min(0.5));
                    (center, sigma)
                })
                .collect();
            (amp, axes)
        })
        .collect();
    BandlimitedFn::from_spectrum(halfwidth, vec![resolution; dim], |xi| {
        bumps
            .iter()
            .map(|(amp, axes)| {
                amp * axes
                    .iter()
                    .zip(xi)
                    .map(|(&(c, s), &x)| bump((x - c) / s))
                    .product::<f64>()
            })
            .sum()
    })
}
