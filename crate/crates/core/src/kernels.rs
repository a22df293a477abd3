//! Summability kernels and the extremal families used by the sharpness
//! experiments.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::TrigPoly;

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn check_scale(n: u32) -> Result<()> {
    if n == 0 || n > 40 {
        return Err(Error::param(format!("scale N must lie in 1..=40, got {n}")));
    }
    Ok(())
}

/// Fejér kernel `K_n(x) = Σ_{|j| ≤ n} (1 - |j|/(n+1)) e^{2πi jx}`.
pub fn fejer(n: u64) -> TrigPoly {
    let n = n as i64;
    TrigPoly::from_1d((-n..=n).map(|j| (j, real(1.0 - j.abs() as f64 / (n + 1) as f64))))
}

/// de la Vallée Poussin kernel of order `2^N` with trapezoid coefficients:
/// 1 on `|j| ≤ 2^N`, then `2 - |j|/2^N` down to 0 at `|j| = 2^{N+1}`.
///
/// This is `2K_{2^{N+1}-1} - K_{2^N-1}` for Fejér kernels indexed by their
/// number of positive frequencies plus one; it makes the top block of the
/// modulated kernel an exact Dirichlet block.
pub fn vallee_poussin(n: u32) -> Result<TrigPoly> {
    check_scale(n)?;
    let m = 1i64 << n;
    Ok(TrigPoly::from_1d((-2 * m..=2 * m).map(|j| {
        let a = j.abs();
        let v = if a <= m {
            1.0
        } else {
            2.0 - a as f64 / m as f64
        };
        (j, real(v))
    })))
}

/// `f_N(x) = e^{2πi 2^{N+1} x} V_{2^N}(x)` for `d = 1` and its d-fold
/// tensor power `g_N(x_1, .., x_d) = f_N(x_1) ... f_N(x_d)` otherwise.
pub fn pichorides_fn(n: u32, d: usize) -> Result<TrigPoly> {
    if d == 0 {
        return Err(Error::param("dimension must be positive"));
    }
    let f = vallee_poussin(n)?.modulate(&[1i64 << (n + 1)])?;
    if d == 1 {
        return Ok(f);
    }
    TrigPoly::tensor_product(&vec![f; d])
}

/// Unit coefficients on `[2^N, 2^{N+1} - 1]`.
pub fn dirichlet_block(n: u32) -> Result<TrigPoly> {
    check_scale(n)?;
    let lo = 1i64 << n;
    Ok(TrigPoly::from_1d((lo..2 * lo).map(|k| (k, real(1.0)))))
}

/// `f(x_1, .., x_d) = F(x_1 + .. + x_d)`: coefficients on the diagonal.
pub fn diag_embed(f: &TrigPoly, d: usize) -> Result<TrigPoly> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: f.dim(),
        });
    }
    if d == 0 {
        return Err(Error::param("dimension must be positive"));
    }
    TrigPoly::new(d, f.iter().map(|(n, c)| (vec![n[0]; d], c)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `K_N` tensored d times.
    Fejer,
    /// `V_{2^N}` tensored d times.
    ValleePoussin,
    /// `f_N` tensored d times.
    Pichorides,
    /// Alias of `Pichorides`, named after its role in the Orlicz sharpness
    /// runs.
    ZygmundTensor,
    /// `f_N(x_1 + .. + x_d)`.
    Diagonal,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Fejer,
        Family::ValleePoussin,
        Family::Pichorides,
        Family::ZygmundTensor,
        Family::Diagonal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Fejer => "fejer",
            Family::ValleePoussin => "vallee_poussin",
            Family::Pichorides => "pichorides",
            Family::ZygmundTensor => "zygmund_tensor",
            Family::Diagonal => "diagonal",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::param(format!("unknown family {s:?}")))
    }
}

/// A named member of one of the kernel families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub n: u32,
    pub d: usize,
}

impl FamilySpec {
    pub fn new(family: Family, n: u32, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::param(format!(
                "family needs N ≥ 1 and d ≥ 1, got N={n}, d={d}"
            )));
        }
        Ok(Self { family, n, d })
    }

    pub fn build(&self) -> Result<TrigPoly> {
        let one_d = match self.family {
            Family::Fejer => fejer(self.n as u64),
            Family::ValleePoussin => vallee_poussin(self.n)?,
            Family::Pichorides | Family::ZygmundTensor => return pichorides_fn(self.n, self.d),
            Family::Diagonal => return diag_embed(&pichorides_fn(self.n, 1)?, self.d),
        };
        if self.d == 1 {
            Ok(one_d)
        } else {
            TrigPoly::tensor_product(&vec![one_d; self.d])
        }
    }
}
