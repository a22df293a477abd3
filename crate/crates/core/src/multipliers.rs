//! Dyadic block projections, tensor multipliers and the d-parameter
//! Littlewood–Paley square function on the torus.
//!
//! Blocks follow the classical indexing: block `k ≥ 1` holds the
//! frequencies `[2^{k-1}, 2^k - 1]`, block `-k` their negatives, and block
//! `0` the single frequency `0`.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::grid::GridFunction;
use crate::spectral::TrigPoly;

/// Dyadic block containing the integer frequency `n`.
pub fn block_index(n: i64) -> i32 {
    if n == 0 {
        return 0;
    }
    let k = (64 - n.unsigned_abs().leading_zeros()) as i32;
    if n > 0 {
        k
    } else {
        -k
    }
}

/// Inclusive frequency range of block `k`.
pub fn block_bounds(k: i32) -> (i64, i64) {
    match k {
        0 => (0, 0),
        k if k > 0 => (1i64 << (k - 1), (1i64 << k) - 1),
        k => {
            let m = -k;
            (-(1i64 << m) + 1, -(1i64 << (m - 1)))
        }
    }
}

fn check_axis(f: &TrigPoly, axis: usize) -> Result<()> {
    if axis >= f.dim() {
        return Err(Error::param(format!(
            "axis {axis} out of range for a {}-dimensional polynomial",
            f.dim()
        )));
    }
    Ok(())
}

/// `Δ_k` acting on the variable `axis` (zero-based).
pub fn delta_project(f: &TrigPoly, k: i32, axis: usize) -> Result<TrigPoly> {
    check_axis(f, axis)?;
    Ok(f.filter(|n, _| block_index(n[axis]) == k))
}

/// `Δ_{k_1} ⊗ .. ⊗ Δ_{k_d}`.
pub fn delta_project_tuple(f: &TrigPoly, ks: &[i32]) -> Result<TrigPoly> {
    if ks.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: ks.len(),
        });
    }
    Ok(f.filter(|n, _| n.iter().zip(ks).all(|(&m, &k)| block_index(m) == k)))
}

/// Splits `f` into its nonzero block pieces, keyed by block tuple.
pub fn block_decomposition(f: &TrigPoly) -> BTreeMap<Vec<i32>, TrigPoly> {
    let mut groups: BTreeMap<Vec<i32>, Vec<(Vec<i64>, Complex64)>> = BTreeMap::new();
    for (n, c) in f.iter() {
        let key = n.iter().map(|&m| block_index(m)).collect();
        groups.entry(key).or_default().push((n.to_vec(), c));
    }
    groups
        .into_iter()
        .map(|(k, entries)| {
            let piece = TrigPoly::new(f.dim(), entries).expect("keys share the dimension of f");
            (k, piece)
        })
        .collect()
}

/// A bounded symbol `m(n)` on a contiguous frequency range.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisSymbol {
    lo: i64,
    values: Vec<Complex64>,
    sup_norm: f64,
}

impl AxisSymbol {
    /// Symbol with `values[j] = m(lo + j)`.
    pub fn from_values(lo: i64, values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("symbol needs a nonempty range"));
        }
        if values
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::param("symbol values must be finite"));
        }
        let sup_norm = values.iter().map(|c| c.norm()).fold(0.0, f64::max);
        Ok(Self {
            lo,
            values,
            sup_norm,
        })
    }

    pub fn from_fn(range: RangeInclusive<i64>, f: impl Fn(i64) -> Complex64) -> Result<Self> {
        let lo = *range.start();
        Self::from_values(lo, range.map(f).collect())
    }

    pub fn identity(range: RangeInclusive<i64>) -> Result<Self> {
        Self::from_fn(range, |_| Complex64::new(1.0, 0.0))
    }

    /// Symbol from an explicit table; the keys must form a contiguous range.
    pub fn from_table(entries: &BTreeMap<i64, Complex64>) -> Result<Self> {
        let (&lo, _) = entries
            .first_key_value()
            .ok_or_else(|| Error::param("empty symbol table"))?;
        let (&hi, _) = entries.last_key_value().expect("nonempty");
        if (hi - lo + 1) as usize != entries.len() {
            let hole = (lo..=hi)
                .find(|n| !entries.contains_key(n))
                .expect("a gap exists");
            return Err(Error::param(format!(
                "symbol table has a gap at n = {hole}"
            )));
        }
        Self::from_values(lo, entries.values().copied().collect())
    }

    pub fn range(&self) -> RangeInclusive<i64> {
        self.lo..=self.lo + self.values.len() as i64 - 1
    }

    pub fn get(&self, n: i64) -> Option<Complex64> {
        let j = n.checked_sub(self.lo)?;
        usize::try_from(j)
            .ok()
            .and_then(|j| self.values.get(j).copied())
    }

    /// `‖m‖_∞` over the declared range.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }
}

/// The tensor multiplier `T_{m_1} ⊗ .. ⊗ T_{m_d}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierSpec {
    axes: Vec<AxisSymbol>,
}

impl MultiplierSpec {
    pub fn new(axes: Vec<AxisSymbol>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::param("multiplier needs at least one axis"));
        }
        Ok(Self { axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[AxisSymbol] {
        &self.axes
    }

    pub fn sup_norm_product(&self) -> f64 {
        self.axes.iter().map(AxisSymbol::sup_norm).product()
    }

    /// `out(n) = Π_j m_j(n_j) · f(n)`.
    pub fn apply(&self, f: &TrigPoly) -> Result<TrigPoly> {
        if f.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: f.dim(),
            });
        }
        let mut entries = Vec::with_capacity(f.len());
        for (n, c) in f.iter() {
            let mut factor = c;
            for (axis, (m, &k)) in self.axes.iter().zip(n).enumerate() {
                factor *= m.get(k).ok_or(Error::UndefinedSymbol { axis, n: k })?;
            }
            entries.push((n.to_vec(), factor));
        }
        TrigPoly::new(f.dim(), entries)
    }

    pub fn from_file(file: &MultiplierFile) -> Result<Self> {
        let axes = file
            .axes
            .iter()
            .map(|a| match a {
                AxisFile::Signs { signs } => {
                    let signs = signs
                        .iter()
                        .map(|(k, &s)| Ok((parse_key(k)?, s)))
                        .collect::<Result<_>>()?;
                    let pattern = SignPattern::new(signs)?;
                    let (k0, k1) = pattern
                        .block_span()
                        .ok_or_else(|| Error::param("empty sign pattern"))?;
                    sign_symbol(&pattern, block_bounds(k0).0..=block_bounds(k1).1)
                }
                AxisFile::Table { entries } => AxisSymbol::from_table(
                    &entries
                        .iter()
                        .map(|(n, &[re, im])| Ok((parse_key(n)?, Complex64::new(re, im))))
                        .collect::<Result<_>>()?,
                ),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(text)?)
    }
}

fn parse_key<T: std::str::FromStr>(key: &str) -> Result<T> {
    key.trim()
        .parse()
        .map_err(|_| Error::param(format!("expected an integer key, found {key:?}")))
}

/// Same as [`MultiplierSpec::apply`].
pub fn apply_tensor_multiplier(spec: &MultiplierSpec, f: &TrigPoly) -> Result<TrigPoly> {
    spec.apply(f)
}

/// Multiplier file: per axis either
/// `{ "kind": "signs", "signs": { k: ±1 } }` or
/// `{ "kind": "table", "entries": { n: [re, im] } }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierFile {
    pub axes: Vec<AxisFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AxisFile {
    Signs { signs: BTreeMap<String, i8> },
    Table { entries: BTreeMap<String, [f64; 2]> },
}

/// Block signs `k ↦ ±1`, the randomised square-function operator
/// `Σ_k ±Δ_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignPattern {
    signs: BTreeMap<i32, i8>,
}

impl SignPattern {
    pub fn new(signs: BTreeMap<i32, i8>) -> Result<Self> {
        if let Some((k, s)) = signs.iter().find(|(_, s)| **s != 1 && **s != -1) {
            return Err(Error::param(format!(
                "sign for block {k} is {s}, expected ±1"
            )));
        }
        Ok(Self { signs })
    }

    pub fn from_fn(blocks: RangeInclusive<i32>, f: impl Fn(i32) -> i8) -> Result<Self> {
        Self::new(blocks.map(|k| (k, f(k))).collect())
    }

    pub fn all_plus(blocks: RangeInclusive<i32>) -> Self {
        Self::from_fn(blocks, |_| 1).expect("valid signs")
    }

    /// `ε_k = (-1)^k`.
    pub fn alternating(blocks: RangeInclusive<i32>) -> Self {
        Self::from_fn(blocks, |k| if k.rem_euclid(2) == 0 { 1 } else { -1 }).expect("valid signs")
    }

    pub fn random<R: Rng + ?Sized>(blocks: RangeInclusive<i32>, rng: &mut R) -> Self {
        let signs = blocks
            .map(|k| (k, if rng.random::<bool>() { 1 } else { -1 }))
            .collect();
        Self { signs }
    }

    pub fn get(&self, k: i32) -> Option<i8> {
        self.signs.get(&k).copied()
    }

    pub fn signs(&self) -> &BTreeMap<i32, i8> {
        &self.signs
    }

    /// Smallest and largest block index, when all blocks in between are
    /// present.
    pub fn block_span(&self) -> Option<(i32, i32)> {
        let (&lo, _) = self.signs.first_key_value()?;
        let (&hi, _) = self.signs.last_key_value()?;
        ((hi - lo + 1) as usize == self.signs.len()).then_some((lo, hi))
    }
}

/// `m(n) = ε_{k(n)}` on `range`, where `k(n)` is the block of `n`.
pub fn sign_symbol(pattern: &SignPattern, range: RangeInclusive<i64>) -> Result<AxisSymbol> {
    let lo = *range.start();
    let values = range
        .map(|n| {
            let k = block_index(n);
            pattern
                .get(k)
                .map(|s| Complex64::new(s as f64, 0.0))
                .ok_or_else(|| Error::param(format!("sign pattern has no entry for block {k}")))
        })
        .collect::<Result<Vec<_>>>()?;
    AxisSymbol::from_values(lo, values)
}

/// The bracketed variation sum of the periodic Marcinkiewicz condition for
/// each window `k = 1..=k_max`: `Σ |m(n+1) - m(n)|` over
/// `n ∈ [2^k - 1, 2^{k+1}]` plus the same over `n ∈ [-2^{k+1}, -2^k + 1]`.
pub fn marcinkiewicz_windows(m: &AxisSymbol, k_max: u32) -> Result<Vec<f64>> {
    if k_max == 0 || k_max > 60 {
        return Err(Error::param(format!(
            "k_max must lie in 1..=60, got {k_max}"
        )));
    }
    let reach = (1i64 << (k_max + 1)) + 1;
    let range = m.range();
    if *range.start() > -reach || *range.end() < reach {
        return Err(Error::param(format!(
            "symbol defined on {range:?} but [{}, {reach}] is needed",
            -reach
        )));
    }
    let at = |n: i64| m.get(n).expect("range checked above");
    let variation = |a: i64, b: i64| -> f64 { (a..=b).map(|n| (at(n + 1) - at(n)).norm()).sum() };
    Ok((1..=k_max)
        .map(|k| {
            let lo = 1i64 << k;
            let hi = 1i64 << (k + 1);
            variation(lo - 1, hi) + variation(-hi, -lo + 1)
        })
        .collect())
}

/// `B_m` restricted to windows `k ≤ k_max`, by direct summation.
pub fn marcinkiewicz_constant(m: &AxisSymbol, k_max: u32) -> Result<f64> {
    Ok(marcinkiewicz_windows(m, k_max)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// `S_{T^d} f = (Σ_{k_1..k_d} |Δ_{k_1..k_d} f|^2)^{1/2}` sampled on the grid.
///
/// Each occupied block piece is synthesized on its own and added into one
/// of a fixed number of `|piece|^2` accumulators, so memory stays
/// proportional to the grid.
pub fn square_function(f: &TrigPoly, resolution: &[usize]) -> Result<GridFunction> {
    f.check_grid(resolution)?;
    let pieces: Vec<TrigPoly> = block_decomposition(f).into_values().collect();
    let total: usize = resolution.iter().product();
    let acc = fft::par_sum_sq(pieces.len(), total, |i| {
        let mut data = pieces[i].dense_spectrum(resolution);
        fft::transform_nd(&mut data, resolution, Direction::Inverse);
        data
    });
    let samples = acc
        .into_iter()
        .map(|s| Complex64::new(s.sqrt(), 0.0))
        .collect();
    GridFunction::new(resolution.to_vec(), samples)
}
