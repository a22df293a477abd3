//! Desk-scale experiments on the extremal families: blow-up rates of the
//! square function as `p → 1`, Orlicz endpoint ratios and weak-type ratios,
//! with CSV/JSON reports.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernels::{Family, FamilySpec};
use crate::multipliers::square_function;
use crate::orlicz::{orlicz_norm, weak_quasinorm, OrliczParams};
use crate::spectral::DEFAULT_OVERSAMPLE;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Rate,
    Zygmund,
    Weaktype,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Rate => "rate",
            ExperimentKind::Zygmund => "zygmund",
            ExperimentKind::Weaktype => "weaktype",
        }
    }
}

/// How the family scale `N` is tied to `p` in rate experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum NCoupling {
    /// `N = round(1/(p-1))`, lowered to the largest scale whose family fits
    /// the resolution budget.
    Reciprocal,
    /// `N = round(1/(p-1))`; a scale beyond the budget is an error.
    Strict,
    Fixed {
        n: u32,
    },
}

impl NCoupling {
    fn raw(self, p: f64) -> u32 {
        match self {
            NCoupling::Fixed { n } => n,
            _ => (1.0 / (p - 1.0)).round().clamp(1.0, 62.0) as u32,
        }
    }
}

/// Everything needed to reproduce one experiment run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub d: usize,
    /// Exponents for rate runs, strictly decreasing toward 1.
    pub p_grid: Vec<f64>,
    pub coupling: NCoupling,
    /// Scale range for the endpoint runs.
    pub n_min: u32,
    pub n_max: u32,
    /// Orlicz exponent for zygmund runs; defaults to `d`.
    pub r: Option<f64>,
    pub family: Family,
    /// Per-axis grid budget (power of two).
    pub resolution: usize,
    pub oversample: usize,
    /// Upper bound on the number of grid points of one evaluation.
    pub max_points: usize,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::Rate,
            d: 1,
            p_grid: vec![1.5, 1.25, 1.125, 1.0625, 1.03125],
            coupling: NCoupling::Reciprocal,
            n_min: 4,
            n_max: 10,
            r: None,
            family: Family::Pichorides,
            resolution: 1 << 14,
            oversample: DEFAULT_OVERSAMPLE,
            max_points: 1 << 22,
            out: None,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::param("d must be positive"));
        }
        if self.resolution < 2 || !self.resolution.is_power_of_two() {
            return Err(Error::InvalidResolution(self.resolution));
        }
        if self.oversample < 2 {
            return Err(Error::param(format!(
                "oversample must be ≥ 2, got {}",
                self.oversample
            )));
        }
        for w in self.p_grid.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::param(format!(
                    "p-grid must be strictly decreasing, found {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if self.experiment == ExperimentKind::Rate {
            if let Some(&p) = self.p_grid.iter().find(|&&p| !(p > 1.0) || !p.is_finite()) {
                return Err(Error::InvalidExponent(p));
            }
        } else if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::param(format!(
                "scale range {}..={} is empty or starts at 0",
                self.n_min, self.n_max
            )));
        }
        if let Some(r) = self.r {
            OrliczParams::new(r).validate()?;
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub d: usize,
    pub p: f64,
    #[serde(rename = "N")]
    pub n: u32,
    pub num: f64,
    pub den: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub experiment: ExperimentKind,
    pub family: Family,
    pub seed: u64,
    pub resolution: usize,
    pub oversample: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    pub metadata: Metadata,
}

impl RateTable {
    fn empty(cfg: &ExperimentConfig) -> Self {
        Self {
            rows: Vec::new(),
            metadata: Metadata {
                experiment: cfg.experiment,
                family: cfg.family,
                seed: cfg.seed,
                resolution: cfg.resolution,
                oversample: cfg.oversample,
                timestamp: None,
            },
        }
    }
}

/// Frequency width of one axis of a family member.
pub fn family_width(family: Family, n: u32) -> u64 {
    match family {
        Family::Fejer => 2 * n as u64 + 1,
        _ => (1u64 << (n + 2)) - 1,
    }
}

/// Largest `N ≥ 1` whose family member fits a per-axis grid of
/// `resolution`, if any.
pub fn max_scale(family: Family, resolution: usize) -> Option<u32> {
    (1..=60u32)
        .take_while(|&n| family_width(family, n) <= resolution as u64)
        .last()
}

/// The family member, its per-axis evaluation grid and its samples.
struct Member {
    poly: crate::spectral::TrigPoly,
    grid: Vec<usize>,
    samples: GridFunction,
}

fn member(cfg: &ExperimentConfig, n: u32) -> Result<Member> {
    let width = family_width(cfg.family, n);
    if width > cfg.resolution as u64 {
        return Err(Error::param(format!(
            "family {} at N={n} spans {width} frequencies, more than the resolution {}",
            cfg.family, cfg.resolution
        )));
    }
    let axis =
        ((cfg.oversample as u64 * width).next_power_of_two() as usize).clamp(2, cfg.resolution);
    let grid = vec![axis; cfg.d];
    let points = (axis as u128).pow(cfg.d as u32);
    if points > cfg.max_points as u128 {
        return Err(Error::param(format!(
            "N={n}, d={} needs {points} grid points, above the limit {}; lower the resolution or N",
            cfg.d, cfg.max_points
        )));
    }
    let poly = FamilySpec::new(cfg.family, n, cfg.d)?.build()?;
    let samples = poly.synthesize(&grid)?;
    Ok(Member {
        poly,
        grid,
        samples,
    })
}

/// Scale used for exponent `p` under the configured coupling.
pub fn coupled_scale(cfg: &ExperimentConfig, p: f64) -> Result<u32> {
    let raw = cfg.coupling.raw(p);
    let cap = max_scale(cfg.family, cfg.resolution).ok_or_else(|| {
        Error::param(format!(
            "resolution {} is too small for any scale",
            cfg.resolution
        ))
    })?;
    match cfg.coupling {
        NCoupling::Reciprocal => Ok(raw.min(cap)),
        _ if raw > cap => Err(Error::param(format!(
            "p = {p} couples to N = {raw}, but resolution {} only fits N ≤ {cap}",
            cfg.resolution
        ))),
        _ => Ok(raw),
    }
}

/// `‖S g_N‖_p / ‖g_N‖_p` for each `p` in the grid, both norms taken on the
/// same grid.
pub fn rate_experiment(cfg: &ExperimentConfig) -> Result<RateTable> {
    cfg.validate()?;
    let scales: Vec<(f64, u32)> = cfg
        .p_grid
        .iter()
        .map(|&p| coupled_scale(cfg, p).map(|n| (p, n)))
        .collect::<Result<_>>()?;
    let rows = scales
        .par_iter()
        .map(|&(p, n)| {
            let m = member(cfg, n)?;
            let s = square_function(&m.poly, &m.grid)?;
            let num = s.lp_norm(p)?;
            let den = m.samples.lp_norm(p)?;
            Ok(RateRow {
                d: cfg.d,
                p,
                n,
                num,
                den,
                ratio: num / den,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = RateTable::empty(cfg);
    table.rows = rows;
    Ok(table)
}

/// Least-squares fit `ln ratio ≈ slope·ln(1/(p-1)) + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in log space.
    pub max_residual: f64,
}

pub fn fit_exponent(table: &RateTable) -> Result<ExponentFit> {
    if table.rows.len() < 3 {
        return Err(Error::param(format!(
            "exponent fit needs at least 3 rows, got {}",
            table.rows.len()
        )));
    }
    let mut pts = Vec::with_capacity(table.rows.len());
    for r in &table.rows {
        if !(r.p > 1.0) || !(r.ratio > 0.0) {
            return Err(Error::param(format!(
                "row p={} ratio={} has no logarithm",
                r.p, r.ratio
            )));
        }
        pts.push(((1.0 / (r.p - 1.0)).ln(), r.ratio.ln()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 1e-12 * k) {
        return Err(Error::param(
            "exponent fit needs at least two distinct p values",
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).abs())
        .fold(0.0, f64::max);
    Ok(ExponentFit {
        slope,
        intercept,
        max_residual,
    })
}

fn endpoint_rows(
    cfg: &ExperimentConfig,
    row: impl Fn(&Member, &GridFunction) -> Result<(f64, f64)> + Sync,
) -> Result<RateTable> {
    cfg.validate()?;
    let ns: Vec<u32> = (cfg.n_min..=cfg.n_max).collect();
    let rows = ns
        .par_iter()
        .map(|&n| {
            let m = member(cfg, n)?;
            let s = square_function(&m.poly, &m.grid)?;
            let (num, den) = row(&m, &s)?;
            Ok(RateRow {
                d: cfg.d,
                p: 1.0,
                n,
                num,
                den,
                ratio: num / den,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = RateTable::empty(cfg);
    table.rows = rows;
    Ok(table)
}

/// `‖S g_N‖_1 / ‖g_N‖_{L log^r L}` over `N ∈ [n_min, n_max]`.
pub fn zygmund_experiment(cfg: &ExperimentConfig) -> Result<RateTable> {
    let params = OrliczParams::new(cfg.r.unwrap_or(cfg.d as f64));
    endpoint_rows(cfg, |m, s| {
        Ok((s.lp_norm(1.0)?, orlicz_norm(&m.samples, &params)?))
    })
}

/// `‖S g_N‖_{1,∞} / ‖g_N‖_{L log^{d-1} L}`; the denominator is the L¹ norm
/// when `d = 1`.
pub fn weak_type_experiment(cfg: &ExperimentConfig) -> Result<RateTable> {
    let params = OrliczParams::new(cfg.d as f64 - 1.0);
    endpoint_rows(cfg, |m, s| {
        let den = if cfg.d == 1 {
            m.samples.lp_norm(1.0)?
        } else {
            orlicz_norm(&m.samples, &params)?
        };
        Ok((weak_quasinorm(s), den))
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RateTable> {
    match cfg.experiment {
        ExperimentKind::Rate => rate_experiment(cfg),
        ExperimentKind::Zygmund => zygmund_experiment(cfg),
        ExperimentKind::Weaktype => weak_type_experiment(cfg),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::param(format!(
                "unknown format {other:?}; use csv or json"
            ))),
        }
    }
}

/// Writes the table; identical tables give identical bytes.
pub fn write_report<W: Write>(table: &RateTable, format: ReportFormat, mut w: W) -> Result<()> {
    match format {
        ReportFormat::Csv => {
            let mut wtr = csv::Writer::from_writer(w);
            wtr.write_record(["d", "p", "N", "num", "den", "ratio"])?;
            for r in &table.rows {
                wtr.write_record([
                    r.d.to_string(),
                    r.p.to_string(),
                    r.n.to_string(),
                    r.num.to_string(),
                    r.den.to_string(),
                    r.ratio.to_string(),
                ])?;
            }
            wtr.flush().map_err(|e| Error::Csv(e.into()))?;
        }
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut w, table)?;
            writeln!(w).map_err(|e| Error::Csv(e.into()))?;
        }
    }
    Ok(())
}

pub fn emit_report(table: &RateTable, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut buf = Vec::new();
    write_report(table, format, &mut buf)?;
    std::fs::write(path, buf).map_err(io)
}

pub fn read_json_report(path: impl AsRef<Path>) -> Result<RateTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

/// Worst ratio of a random analytic input to the family ratio of the same
/// row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeProbe {
    pub samples: usize,
    /// `max (‖S f‖_p / ‖f‖_p) / row.ratio` over all rows and inputs.
    pub worst: f64,
}

/// Checks random analytic polynomials against a rate table: for each row,
/// `samples` seeded inputs with spectrum in the row's family box are
/// compared to the family ratio.
pub fn envelope_probe(
    cfg: &ExperimentConfig,
    table: &RateTable,
    samples: usize,
) -> Result<EnvelopeProbe> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst: f64 = 0.0;
    for row in &table.rows {
        let width = family_width(cfg.family, row.n) as i64;
        let axis = ((cfg.oversample as u64 * width as u64).next_power_of_two() as usize)
            .clamp(2, cfg.resolution);
        let grid = vec![axis; row.d];
        for _ in 0..samples {
            let terms = rng.random_range(1..=64);
            let f = corpus::random_analytic(&mut rng, row.d, width, terms)?;
            let s = square_function(&f, &grid)?;
            let g = f.synthesize(&grid)?;
            worst = worst.max(s.lp_norm(row.p)? / g.lp_norm(row.p)? / row.ratio);
        }
    }
    Ok(EnvelopeProbe { samples, worst })
}
