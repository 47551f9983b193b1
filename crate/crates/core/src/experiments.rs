//! Parameter sweeps over fully symmetric GHZ-type families.
//!
//! Mixed members of a family are obtained from a pure `(M + q)`-mode parent
//! by tracing out `q` modes, which leaves the `(b, z1, z2)` pattern unchanged.
//! Grid points run in parallel and come back in grid order.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::localization::{
    block_log_negativity, equivalent_two_mode_invariants, localize, optimal_localizable_entanglement,
};
use crate::measures::{EntanglementReport, ModeBipartition};
use crate::oracle::{oracle_pt_log_negativity, OracleReport, OracleSummary, StateSampler};
use crate::states::{bisymmetric_cm, ghz_type_spec, BisymmetricSpec, FullySymmetricSpec};

/// Evenly spaced `b` values, written `lo:hi:steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BGrid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Default for BGrid {
    fn default() -> Self {
        Self { lo: 1.0, hi: 3.0, steps: 81 }
    }
}

impl BGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.hi } else { self.lo + step * i as f64 })
            .collect()
    }
}

impl FromStr for BGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, steps] = parts.as_slice() else {
            return Err(Error::invalid(format!("b grid {s:?} is not lo:hi:steps")));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::invalid(format!("b grid bound {t:?} is not a finite number")))
        };
        let grid = Self {
            lo: num(lo)?,
            hi: num(hi)?,
            steps: steps
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("b grid step count {steps:?} is not an integer")))?,
        };
        if grid.steps == 0 {
            return Err(Error::invalid("b grid needs at least one point"));
        }
        if grid.lo < 1.0 || grid.hi < grid.lo {
            return Err(Error::invalid(format!("b grid needs 1 <= lo <= hi, got {}:{}", grid.lo, grid.hi)));
        }
        if grid.steps > 1_000_000 {
            return Err(Error::invalid("b grid has more than 10^6 points"));
        }
        Ok(grid)
    }
}

impl fmt::Display for BGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.steps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Hierarchy,
    Scaling,
    Ole,
    Single,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::invalid(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub experiment: Experiment,
    /// Half the mode count for hierarchy and the upper end of the `n` range
    /// for scaling; total mode count `M` for OLE.
    pub n: usize,
    /// Block sizes for hierarchy; empty means `1..=n`.
    pub ks: Vec<usize>,
    pub b_values: Vec<f64>,
    /// Number of traced-out modes of the pure parent.
    pub qs: Vec<usize>,
    pub format: OutputFormat,
    /// Overrides the separability threshold `ν̃ ≥ 1 − tol`.
    pub tol: Option<f64>,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

impl SweepConfig {
    pub fn hierarchy(n: usize, b_values: Vec<f64>) -> Self {
        Self {
            experiment: Experiment::Hierarchy,
            n,
            ks: Vec::new(),
            b_values,
            qs: vec![0, 4],
            format: OutputFormat::Csv,
            tol: None,
            jobs: 0,
        }
    }

    pub fn scaling(n_max: usize, b: f64) -> Self {
        Self { experiment: Experiment::Scaling, b_values: vec![b], ..Self::hierarchy(n_max, vec![b]) }
    }

    pub fn ole(total_modes: usize, b_values: Vec<f64>) -> Self {
        Self { experiment: Experiment::Ole, ..Self::hierarchy(total_modes, b_values) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("mode count must be positive"));
        }
        if self.b_values.is_empty() || self.qs.is_empty() {
            return Err(Error::invalid("sweep grids must be nonempty"));
        }
        if let Some(&b) = self.b_values.iter().find(|&&b| !(b >= 1.0) || !b.is_finite()) {
            return Err(Error::invalid(format!("b = {b} must be finite and at least 1")));
        }
        if let Some(t) = self.tol {
            if !(t >= 0.0) {
                return Err(Error::invalid(format!("tolerance {t} must be non-negative")));
            }
        }
        match self.experiment {
            Experiment::Hierarchy => {
                if let Some(&k) = self.ks.iter().find(|&&k| k == 0 || k >= 2 * self.n) {
                    return Err(Error::invalid(format!("k = {k} outside 1..{}", 2 * self.n)));
                }
            }
            Experiment::Ole if self.n < 2 => {
                return Err(Error::invalid("OLE needs at least two modes"));
            }
            _ => {}
        }
        Ok(())
    }

    fn separable(&self, nu_tilde: f64, default: Option<bool>) -> Option<bool> {
        match self.tol {
            Some(t) => Some(nu_tilde >= 1.0 - t),
            None => default,
        }
    }
}

fn status_of(err: &Error) -> String {
    match err {
        Error::Unphysical { quantity, value } => format!("unphysical {quantity}={value:.6e}"),
        other => other.to_string(),
    }
}

/// One row of the block-entanglement hierarchy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HierarchyRow {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub b: f64,
    pub q: usize,
    pub nu_tilde: Option<f64>,
    #[serde(rename = "E_N")]
    pub e_n: Option<f64>,
    #[serde(rename = "N")]
    pub negativity: Option<f64>,
    #[serde(rename = "E_F")]
    pub e_f: Option<f64>,
    pub separable: Option<bool>,
    pub status: String,
}

impl HierarchyRow {
    fn new(m: usize, n: usize, k: usize, b: f64, q: usize, rep: Result<EntanglementReport>, cfg: &SweepConfig) -> Self {
        match rep {
            Ok(r) => Self {
                m,
                n,
                k,
                b,
                q,
                nu_tilde: Some(r.nu_tilde_min),
                e_n: Some(r.log_negativity),
                negativity: Some(r.negativity),
                e_f: r.eof,
                separable: cfg.separable(r.nu_tilde_min, r.separable),
                status: "ok".into(),
            },
            Err(e) => Self {
                m,
                n,
                k,
                b,
                q,
                nu_tilde: None,
                e_n: None,
                negativity: None,
                e_f: None,
                separable: None,
                status: status_of(&e),
            },
        }
    }
}

fn run_points<T, R, F>(jobs: usize, points: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| points.par_iter().map(&f).collect()))
}

/// The `M`-mode reduction of a pure `(M + q)`-mode GHZ-type parent.
pub fn mixed_ghz_spec(modes: usize, q: usize, b: f64) -> Result<FullySymmetricSpec> {
    ghz_type_spec(modes + q, b)?.reduced(modes)
}

/// `E_N` of `k × (2n − k)` splits of `2n`-mode states, for every `q`, `k`
/// and `b` in the grid, ordered by `(q, k, b)`.
pub fn run_hierarchy(cfg: &SweepConfig) -> Result<Vec<HierarchyRow>> {
    cfg.validate()?;
    let total = 2 * cfg.n;
    let ks: Vec<usize> = if cfg.ks.is_empty() { (1..=cfg.n).collect() } else { cfg.ks.clone() };
    let mut points = Vec::new();
    for &q in &cfg.qs {
        for &k in &ks {
            for &b in &cfg.b_values {
                points.push((q, k, b));
            }
        }
    }
    run_points(cfg.jobs, &points, |&(q, k, b)| {
        let rep = mixed_ghz_spec(total, q, b).and_then(|s| block_log_negativity(&s, k));
        HierarchyRow::new(k, total - k, k, b, q, rep, cfg)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub q: usize,
    pub n: usize,
    pub b: f64,
    #[serde(rename = "E_F_1x1")]
    pub e_f_1x1: Option<f64>,
    #[serde(rename = "E_F_nxn")]
    pub e_f_nxn: Option<f64>,
    pub status: String,
}

/// EoF of one pair of modes and of the balanced `n × n` split, for
/// `2n`-mode states with `n = 1..=cfg.n`, ordered by `(q, n)`.
pub fn run_scaling(cfg: &SweepConfig) -> Result<Vec<ScalingRow>> {
    cfg.validate()?;
    let b = cfg.b_values[0];
    let points: Vec<(usize, usize)> = cfg.qs.iter().flat_map(|&q| (1..=cfg.n).map(move |n| (q, n))).collect();
    run_points(cfg.jobs, &points, |&(q, n)| {
        let eval = || -> Result<(f64, f64)> {
            let spec = mixed_ghz_spec(2 * n, q, b)?;
            let pair = BisymmetricSpec::from_fully_symmetric(&spec.reduced(2)?, 1)?;
            let one = equivalent_two_mode_invariants(&pair)?.report()?;
            let half = block_log_negativity(&spec, n)?;
            let missing = || Error::domain("symmetric condition failed for a balanced split");
            Ok((one.eof.ok_or_else(missing)?, half.eof.ok_or_else(missing)?))
        };
        match eval() {
            Ok((a, h)) => ScalingRow { q, n, b, e_f_1x1: Some(a), e_f_nxn: Some(h), status: "ok".into() },
            Err(e) => ScalingRow { q, n, b, e_f_1x1: None, e_f_nxn: None, status: status_of(&e) },
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OleRow {
    pub modes: usize,
    pub q: usize,
    pub b: f64,
    pub k_star: Option<usize>,
    #[serde(rename = "E_N")]
    pub e_n: Option<f64>,
    pub status: String,
}

/// Optimal block size for `M`-mode states over the `b` grid, ordered by
/// `(q, b)`.
pub fn run_ole(cfg: &SweepConfig) -> Result<Vec<OleRow>> {
    cfg.validate()?;
    let points: Vec<(usize, f64)> = cfg.qs.iter().flat_map(|&q| cfg.b_values.iter().map(move |&b| (q, b))).collect();
    run_points(cfg.jobs, &points, |&(q, b)| {
        match mixed_ghz_spec(cfg.n, q, b).and_then(|s| optimal_localizable_entanglement(&s)) {
            Ok((k, rep)) => OleRow { modes: cfg.n, q, b, k_star: Some(k), e_n: Some(rep.log_negativity), status: "ok".into() },
            Err(e) => OleRow { modes: cfg.n, q, b, k_star: None, e_n: None, status: status_of(&e) },
        }
    })
}

/// Random bisymmetric states checked three ways: closed-form invariants,
/// explicit localization, and the brute-force partial-transpose spectrum.
/// Half the draws are biased towards entangled states. Three reports per
/// case, tagged with the case index; the sample depends only on `seed`.
pub fn verify_suite(seed: u64, cases: usize, jobs: usize) -> Result<(Vec<OracleReport>, OracleSummary)> {
    if cases == 0 {
        return Err(Error::invalid("verification needs at least one case"));
    }
    let mut sampler = StateSampler::new(seed);
    let specs: Vec<(usize, BisymmetricSpec)> = (0..cases)
        .map(|i| (i, if i % 2 == 0 { sampler.bisymmetric(6) } else { sampler.bisymmetric_entangled(6) }))
        .collect();
    let per_case = run_points(jobs, &specs, |(i, spec)| -> Result<Vec<OracleReport>> {
        let cm = bisymmetric_cm(spec)?;
        let inv = equivalent_two_mode_invariants(spec)?.report()?.log_negativity;
        let loc = localize(&cm, spec.m, spec.n)?.equivalent.report()?.log_negativity;
        let brute = oracle_pt_log_negativity(&cm, &ModeBipartition::split(spec.m, spec.n)?)?;
        Ok(vec![
            OracleReport::compare(format!("{i}: E_N invariant vs oracle"), inv, brute, 1e-7, 1e-9),
            OracleReport::compare(format!("{i}: E_N constructive vs oracle"), loc, brute, 1e-7, 1e-9),
            OracleReport::compare(format!("{i}: E_N invariant vs constructive"), inv, loc, 1e-7, 1e-9),
        ])
    })?;
    let reports: Vec<OracleReport> = per_case.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    let summary = OracleSummary::of(&reports, seed);
    Ok((reports, summary))
}

/// Header row plus one line per row, LF endings.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::invalid(format!("CSV encoding failed: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(format!("CSV encoding failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub fn to_json<T: Serialize>(rows: &[T]) -> Result<String> {
    serde_json::to_string_pretty(rows).map_err(|e| Error::invalid(format!("JSON encoding failed: {e}")))
}

pub fn render<T: Serialize>(rows: &[T], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Json => to_json(rows).map(|mut s| {
            s.push('\n');
            s
        }),
    }
}
