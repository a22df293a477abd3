//! Orlicz `L log^r L` norms, the weak-L^{1,∞} quasinorm, and Khintchine
//! ratios for Rademacher tensor sums.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::spectral::TrigPoly;

/// Parameters of the Luxemburg-type bisection for `‖f‖_{L log^r L}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrliczParams {
    pub r: f64,
    /// Relative width at which bisection stops.
    pub tol: f64,
    /// Initial search interval for λ; expanded automatically if it does not
    /// bracket the root.
    pub lambda_bracket: (f64, f64),
}

impl OrliczParams {
    pub fn new(r: f64) -> Self {
        Self {
            r,
            tol: 1e-8,
            lambda_bracket: (1e-3, 1e3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r >= 0.0) || !self.r.is_finite() {
            return Err(Error::param(format!(
                "Orlicz exponent r must be ≥ 0, got {}",
                self.r
            )));
        }
        if !(self.tol > 0.0 && self.tol < 0.1) {
            return Err(Error::param(format!(
                "tolerance must lie in (0, 0.1), got {}",
                self.tol
            )));
        }
        let (lo, hi) = self.lambda_bracket;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::param(format!("bad λ bracket ({lo}, {hi})")));
        }
        Ok(())
    }
}

/// `λ ↦ mean (|f|/λ) log^r(1 + |f|/λ)`, strictly decreasing for nonzero f.
pub fn orlicz_functional(moduli: &[f64], r: f64, lambda: f64) -> f64 {
    let n = moduli.len() as f64;
    moduli
        .iter()
        .map(|&a| {
            let s = a / lambda;
            if s == 0.0 {
                0.0
            } else if r == 0.0 {
                s
            } else {
                s * s.ln_1p().powf(r)
            }
        })
        .sum::<f64>()
        / n
}

/// `inf { λ > 0 : mean (|g|/λ) log^r(1 + |g|/λ) ≤ 1 }` over the grid.
///
/// The returned `λ*` satisfies functional(λ*) ≤ 1 < functional(λ*(1 - 10 tol)).
/// Exponents `r < 1` are accepted; the formula is the same.
pub fn orlicz_norm(g: &GridFunction, params: &OrliczParams) -> Result<f64> {
    params.validate()?;
    let moduli = g.moduli();
    if moduli.iter().all(|&a| a == 0.0) {
        return Ok(0.0);
    }
    let phi = |lambda: f64| orlicz_functional(&moduli, params.r, lambda);
    let (mut lo, mut hi) = params.lambda_bracket;
    while phi(lo) <= 1.0 {
        lo /= 2.0;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::Numerical("Orlicz bracket underflowed".into()));
        }
    }
    while phi(hi) > 1.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numerical("Orlicz bracket overflowed".into()));
        }
    }
    while hi - lo > params.tol * hi {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Orlicz norm of a polynomial on its oversampled norm grid.
pub fn orlicz_norm_poly(f: &TrigPoly, params: &OrliczParams, oversample: usize) -> Result<f64> {
    if f.is_empty() {
        return Ok(0.0);
    }
    orlicz_norm(&f.synthesize(&f.norm_grid(oversample))?, params)
}

/// `sup_t t · |{|g| > t}|` with the grid as a probability space.
///
/// The supremum is a left limit at one of the sample values, where the
/// superlevel count is the number of samples `≥ t`.
pub fn weak_quasinorm(g: &GridFunction) -> f64 {
    let mut a = g.moduli();
    a.sort_by(|x, y| y.total_cmp(x));
    let n = a.len() as f64;
    let mut best = 0.0f64;
    let mut i = 0;
    while i < a.len() {
        let v = a[i];
        let mut j = i;
        while j < a.len() && a[j] == v {
            j += 1;
        }
        best = best.max(v * j as f64 / n);
        i = j;
    }
    best
}

/// Finite coefficient array `a_{k_1..k_d}` indexed by `N_0^d`, the input of
/// a Rademacher tensor sum `Σ a_k r_{k_1} ⊗ .. ⊗ r_{k_d}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RademacherSum {
    dim: usize,
    entries: BTreeMap<Vec<usize>, Complex64>,
}

impl RademacherSum {
    pub fn new(
        dim: usize,
        entries: impl IntoIterator<Item = (Vec<usize>, Complex64)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dimension must be positive"));
        }
        let mut map: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
        for (k, a) in entries {
            if k.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: k.len(),
                });
            }
            *map.entry(k).or_default() += a;
        }
        map.retain(|_, a| *a != Complex64::default());
        Ok(Self { dim, entries: map })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn l2(&self) -> f64 {
        self.entries
            .values()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Sorted distinct Rademacher indices used along each axis.
    pub fn occupied(&self) -> Vec<Vec<usize>> {
        (0..self.dim)
            .map(|axis| {
                let mut ks: Vec<usize> = self.entries.keys().map(|k| k[axis]).collect();
                ks.sort_unstable();
                ks.dedup();
                ks
            })
            .collect()
    }
}

/// How the expectation over `Ω^d` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KhintchineMode {
    /// Enumerate every sign assignment; at most [`MAX_EXACT_INDICES`]
    /// occupied indices per axis.
    Exact,
    MonteCarlo {
        samples: usize,
        seed: u64,
    },
}

pub const MAX_EXACT_INDICES: usize = 12;

/// `‖Σ a_k r_{k_1} ⊗ .. ⊗ r_{k_d}‖_{L^p(Ω^d)} / (Σ |a_k|²)^{1/2}`.
pub fn khintchine_ratio(a: &RademacherSum, p: f64, mode: KhintchineMode) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(p));
    }
    let l2 = a.l2();
    if l2 == 0.0 {
        return Err(Error::param("all coefficients vanish"));
    }
    let occupied = a.occupied();
    // bit offset of each axis' indices inside a combined sign word
    let mut offset = Vec::with_capacity(a.dim);
    let mut bits = 0usize;
    for ks in &occupied {
        offset.push(bits);
        bits += ks.len();
    }
    // each entry becomes a set of bit positions whose sign product it carries
    let terms: Vec<(Vec<usize>, Complex64)> = a
        .entries
        .iter()
        .map(|(k, &c)| {
            let pos = k
                .iter()
                .enumerate()
                .map(|(axis, kk)| {
                    offset[axis] + occupied[axis].binary_search(kk).expect("occupied")
                })
                .collect();
            (pos, c)
        })
        .collect();
    let value = |word: u64| -> f64 {
        let s: Complex64 = terms
            .iter()
            .map(|(pos, c)| {
                let neg = pos.iter().filter(|&&b| word >> b & 1 == 1).count() % 2 == 1;
                if neg {
                    -c
                } else {
                    *c
                }
            })
            .sum();
        s.norm().powf(p)
    };

    let moment = match mode {
        KhintchineMode::Exact => {
            if let Some(ks) = occupied.iter().find(|ks| ks.len() > MAX_EXACT_INDICES) {
                return Err(Error::param(format!(
                    "{} occupied indices on one axis exceed the exact-enumeration limit {MAX_EXACT_INDICES}; use Monte Carlo",
                    ks.len()
                )));
            }
            let count = 1u64 << bits;
            // per-chunk sums in a fixed order keep the result bitwise stable
            let chunks = count.div_ceil(1 << 12);
            let partial: Vec<f64> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    ((c << 12)..((c + 1) << 12).min(count))
                        .map(value)
                        .sum::<f64>()
                })
                .collect();
            partial.iter().sum::<f64>() / count as f64
        }
        KhintchineMode::MonteCarlo { samples, seed } => {
            if samples == 0 || bits > 64 {
                return Err(Error::param(
                    "Monte Carlo needs ≥ 1 sample and ≤ 64 sign bits",
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mask = if bits == 64 {
                u64::MAX
            } else {
                (1u64 << bits) - 1
            };
            (0..samples)
                .map(|_| value(rng.random::<u64>() & mask))
                .sum::<f64>()
                / samples as f64
        }
    };
    Ok(moment.powf(1.0 / p) / l2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(values: &[f64]) -> GridFunction {
        GridFunction::new(
            vec![values.len()],
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
        .unwrap()
    }

    /// Plain bisection for `(1/λ) ln(1 + 1/λ) = 1`, the L log L norm of 1.
    fn unit_llogl_oracle() -> f64 {
        let h = |l: f64| (1.0 / l) * (1.0 / l).ln_1p() - 1.0;
        let (mut a, mut b) = (0.1, 10.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if h(m) > 0.0 {
                a = m
            } else {
                b = m
            }
        }
        b
    }

    #[test]
    fn orlicz_of_constant() {
        let g = grid(&[1.0; 8]);
        assert!((orlicz_norm(&g, &OrliczParams::new(0.0)).unwrap() - 1.0).abs() < 1e-7);
        let want = unit_llogl_oracle();
        assert!((want - 0.8065).abs() < 1e-3);
        let got = orlicz_norm(&g, &OrliczParams::new(1.0)).unwrap();
        assert!((got - want).abs() < 1e-7 * want);
    }

    #[test]
    fn orlicz_bracket_property() {
        let g = grid(&[0.1, 3.0, 0.0, 7.5, 2.0, 0.4, 1e-3, 12.0]);
        for r in [0.0, 0.5, 1.0, 2.0, 3.0] {
            let params = OrliczParams::new(r);
            let l = orlicz_norm(&g, &params).unwrap();
            let m = g.moduli();
            assert!(orlicz_functional(&m, r, l) <= 1.0);
            assert!(orlicz_functional(&m, r, l * (1.0 - 10.0 * params.tol)) > 1.0);
        }
    }

    #[test]
    fn orlicz_expands_bad_brackets() {
        let g = grid(&[1e6, 2e6, 0.0, 5e5]);
        let params = OrliczParams {
            lambda_bracket: (1e-2, 1e-1),
            ..OrliczParams::new(1.0)
        };
        let l = orlicz_norm(&g, &params).unwrap();
        let default = orlicz_norm(&g, &OrliczParams::new(1.0)).unwrap();
        assert!((l - default).abs() < 1e-7 * l);
        let tiny = grid(&[1e-9, 0.0]);
        assert!(orlicz_norm(&tiny, &params).unwrap() > 0.0);
    }

    #[test]
    fn orlicz_zero_and_invalid() {
        assert_eq!(
            orlicz_norm(&grid(&[0.0; 4]), &OrliczParams::new(1.0)).unwrap(),
            0.0
        );
        assert!(orlicz_norm(&grid(&[1.0; 4]), &OrliczParams::new(-1.0)).is_err());
        let bad = OrliczParams {
            lambda_bracket: (2.0, 1.0),
            ..OrliczParams::new(1.0)
        };
        assert!(orlicz_norm(&grid(&[1.0; 4]), &bad).is_err());
    }

    #[test]
    fn weak_quasinorm_examples() {
        assert_eq!(weak_quasinorm(&grid(&[2.5; 16])), 2.5);
        let mut v = [1.0; 16];
        v[..4].fill(2.0);
        assert_eq!(weak_quasinorm(&grid(&v)), 1.0);
        let mut w = [0.0; 8];
        w[0] = 8.0;
        assert_eq!(weak_quasinorm(&grid(&w)), 1.0);
    }

    #[test]
    fn khintchine_examples() {
        let single = RademacherSum::new(1, [(vec![3], Complex64::new(0.0, 2.0))]).unwrap();
        for p in [0.5, 1.0, 3.0] {
            assert!(
                (khintchine_ratio(&single, p, KhintchineMode::Exact).unwrap() - 1.0).abs() < 1e-14
            );
        }
        let pair = RademacherSum::new(
            1,
            [
                (vec![0], Complex64::new(1.0, 0.0)),
                (vec![1], Complex64::new(1.0, 0.0)),
            ],
        )
        .unwrap();
        assert!((khintchine_ratio(&pair, 2.0, KhintchineMode::Exact).unwrap() - 1.0).abs() < 1e-14);
        // E|±1 ± 1| = 1 over the four sign patterns
        let r1 = khintchine_ratio(&pair, 1.0, KhintchineMode::Exact).unwrap();
        assert!((r1 - 0.5f64.sqrt()).abs() < 1e-14);
        assert!(khintchine_ratio(&pair, 0.0, KhintchineMode::Exact).is_err());
    }

    #[test]
    fn khintchine_rank_one_tensor_falls_below_real_constant() {
        // (r_0 + r_1)(r_0' + r_1'): |.| = 4 with probability 1/4
        let one = Complex64::new(1.0, 0.0);
        let a = RademacherSum::new(
            2,
            [
                (vec![0, 0], one),
                (vec![0, 1], one),
                (vec![1, 0], one),
                (vec![1, 1], one),
            ],
        )
        .unwrap();
        let r = khintchine_ratio(&a, 1.0, KhintchineMode::Exact).unwrap();
        assert!((r - 0.5).abs() < 1e-14);
    }

    #[test]
    fn khintchine_monte_carlo_tracks_exact() {
        let a = RademacherSum::new(
            1,
            (0..10).map(|k| (vec![k], Complex64::new(1.0 / (k + 1) as f64, 0.3))),
        )
        .unwrap();
        let exact = khintchine_ratio(&a, 1.0, KhintchineMode::Exact).unwrap();
        let mc = khintchine_ratio(
            &a,
            1.0,
            KhintchineMode::MonteCarlo {
                samples: 200_000,
                seed: 5,
            },
        )
        .unwrap();
        assert!((exact - mc).abs() < 1e-2);
        let wide =
            RademacherSum::new(1, (0..13).map(|k| (vec![k], Complex64::new(1.0, 0.0)))).unwrap();
        assert!(khintchine_ratio(&wide, 1.0, KhintchineMode::Exact).is_err());
    }
}
