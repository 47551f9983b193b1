//! Partial transposition and entanglement measures.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::localization::{bisymmetric_pattern_residual, is_bisymmetric_for};
use crate::states::BisymmetricSpec;
use crate::symplectic::{check_mode_list, symplectic_eigenvalues, CovarianceMatrix, SymplecticSpectrum};
use crate::tol;

/// Two disjoint sets of 0-based mode indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModeBipartition {
    pub side_a: Vec<usize>,
    pub side_b: Vec<usize>,
}

impl ModeBipartition {
    pub fn new(side_a: Vec<usize>, side_b: Vec<usize>) -> Result<Self> {
        if side_a.is_empty() || side_b.is_empty() {
            return Err(Error::invalid("both sides of a bipartition must be nonempty"));
        }
        let part = Self { side_a, side_b };
        let all: Vec<usize> = part.side_a.iter().chain(&part.side_b).copied().collect();
        let top = all.iter().copied().max().unwrap_or(0) + 1;
        check_mode_list(&all, top, "bipartition")?;
        Ok(part)
    }

    /// Modes `0..m` against `m..m+n`.
    pub fn split(m: usize, n: usize) -> Result<Self> {
        Self::new((0..m).collect(), (m..m + n).collect())
    }

    pub fn modes(&self) -> usize {
        self.side_a.len() + self.side_b.len()
    }

    /// The sides swapped.
    pub fn flipped(&self) -> Self {
        Self { side_a: self.side_b.clone(), side_b: self.side_a.clone() }
    }

    /// Disjoint and covering all modes of `cm`.
    pub fn validate(&self, cm: &CovarianceMatrix) -> Result<()> {
        let all: Vec<usize> = self.side_a.iter().chain(&self.side_b).copied().collect();
        check_mode_list(&all, cm.modes(), "bipartition")?;
        if all.len() != cm.modes() {
            return Err(Error::invalid(format!(
                "bipartition covers {} of {} modes",
                all.len(),
                cm.modes()
            )));
        }
        Ok(())
    }

    /// `side_a` is exactly `0..m` in order.
    pub fn is_leading_split(&self) -> bool {
        self.side_a.iter().enumerate().all(|(i, &k)| i == k)
            && self.side_b.iter().enumerate().all(|(i, &k)| k == self.side_a.len() + i)
    }
}

/// Flip the momentum quadrature of every mode in `side_b`.
pub fn partial_transpose(cm: &CovarianceMatrix, part: &ModeBipartition) -> Result<CovarianceMatrix> {
    part.validate(cm)?;
    let mut mat = cm.matrix().clone();
    for &k in &part.side_b {
        let p = 2 * k + 1;
        mat.row_mut(p).neg_mut();
        mat.column_mut(p).neg_mut();
    }
    Ok(CovarianceMatrix::from_symmetric_unchecked(mat))
}

pub fn pt_spectrum(cm: &CovarianceMatrix, part: &ModeBipartition) -> Result<SymplecticSpectrum> {
    symplectic_eigenvalues(&partial_transpose(cm, part)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub nu_tilde_min: f64,
    pub log_negativity: f64,
    pub negativity: f64,
    /// Present only for symmetric two-mode (or symmetric-equivalent) states.
    pub eof: Option<f64>,
    /// `None` when PPT is not known to be sufficient for the state class.
    pub separable: Option<bool>,
}

impl EntanglementReport {
    /// Report for a state whose only possibly sub-unit PT eigenvalue is
    /// `nu_tilde`.
    pub fn from_two_mode(nu_tilde: f64, symmetric: bool) -> Result<Self> {
        let e_n = log_negativity_from_pt(&[nu_tilde]);
        Ok(Self {
            nu_tilde_min: nu_tilde,
            log_negativity: e_n,
            negativity: negativity_from_log(e_n),
            eof: if symmetric { Some(eof_symmetric(nu_tilde.min(1.0))?) } else { None },
            separable: Some(is_ppt(nu_tilde)),
        })
    }
}

/// `ν̃ ≥ 1 − tol::SEPARABLE`.
pub fn is_ppt(nu_tilde_min: f64) -> bool {
    nu_tilde_min >= 1.0 - tol::SEPARABLE
}

/// `−Σ ln ν̃` over PT eigenvalues below one, after clamping values just
/// above one.
pub fn log_negativity_from_pt(values: &[f64]) -> f64 {
    let sum: f64 = values
        .iter()
        .map(|&v| if v > 1.0 && v <= 1.0 + tol::PT_CLAMP { 1.0 } else { v })
        .filter(|&v| v < 1.0)
        .fold(0.0, |acc, v| acc - v.ln());
    sum.max(0.0)
}

/// `N = (e^{E_N} − 1)/2`.
pub fn negativity_from_log(e_n: f64) -> f64 {
    e_n.exp_m1() / 2.0
}

/// Whether PPT is known to decide separability for this state and split.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PptClass {
    /// Detect from the partition sizes and the bisymmetric pattern.
    Auto,
    /// The caller vouches that PPT is sufficient.
    Decidable,
    /// Always report `separable: None`.
    Undecided,
}

/// Full-spectrum entanglement report. The `separable` flag is set for
/// `1 × n` splits and for states that are bisymmetric under the split.
pub fn log_negativity(cm: &CovarianceMatrix, part: &ModeBipartition) -> Result<EntanglementReport> {
    log_negativity_declared(cm, part, PptClass::Auto)
}

pub fn log_negativity_declared(
    cm: &CovarianceMatrix,
    part: &ModeBipartition,
    class: PptClass,
) -> Result<EntanglementReport> {
    part.validate(cm)?;
    let spectrum = symplectic_eigenvalues(cm)?;
    if spectrum.min() < 1.0 - tol::PHYS {
        return Err(Error::Unphysical { quantity: "min symplectic eigenvalue", value: spectrum.min() });
    }
    let pt = pt_spectrum(cm, part)?;
    let e_n = log_negativity_from_pt(&pt.values);
    let nu_min = pt.min();

    let bisym = is_bisymmetric_for(cm, part);
    let decidable = match class {
        PptClass::Decidable => true,
        PptClass::Undecided => false,
        PptClass::Auto => part.side_a.len() == 1 || part.side_b.len() == 1 || bisym,
    };
    // EoF needs a symmetric equivalent pair: equal collective-mode determinants.
    let eof = if bisym && collective_blocks_symmetric(cm, part) {
        Some(eof_symmetric(nu_min.min(1.0))?)
    } else {
        None
    };
    Ok(EntanglementReport {
        nu_tilde_min: nu_min,
        log_negativity: e_n,
        negativity: negativity_from_log(e_n),
        eof,
        separable: decidable.then(|| is_ppt(nu_min)),
    })
}

fn collective_det(cm: &CovarianceMatrix, side: &[usize]) -> f64 {
    let k = side.len() as f64;
    let diag = cm.block(side[0], side[0]);
    let off = if side.len() > 1 { cm.block(side[0], side[1]) } else { diag * 0.0 };
    (diag + off * (k - 1.0)).determinant()
}

fn collective_blocks_symmetric(cm: &CovarianceMatrix, part: &ModeBipartition) -> bool {
    tol::close(
        collective_det(cm, &part.side_a),
        collective_det(cm, &part.side_b),
        tol::SYMMETRIC_CONDITION,
    )
}

/// `h(x) = t₊ ln t₊ − t₋ ln t₋`, `t± = (1 ± x)²/(4x)`, for `0 < x < 1`;
/// zero for `x ≥ 1`.
pub fn eof_symmetric(nu_tilde: f64) -> Result<f64> {
    if !(nu_tilde > 0.0) || nu_tilde.is_nan() {
        return Err(Error::invalid(format!("ν̃ = {nu_tilde} must be positive")));
    }
    if nu_tilde >= 1.0 {
        return Ok(0.0);
    }
    // t₊ = 1 + t₋, so both terms stay accurate as x → 1.
    let t = (1.0 - nu_tilde).powi(2) / (4.0 * nu_tilde);
    let tail = if t == 0.0 { 0.0 } else { t * t.ln() };
    Ok(((1.0 + t) * t.ln_1p() - tail).max(0.0))
}

/// `(a+(m−1)e1)(a+(m−1)e2) = (b+(n−1)z1)(b+(n−1)z2)` within
/// `tol::SYMMETRIC_CONDITION`.
pub fn symmetric_condition(spec: &BisymmetricSpec) -> bool {
    let (_, alpha) = spec.alpha().squared_eigenvalues();
    let (_, beta) = spec.beta().squared_eigenvalues();
    tol::close(alpha, beta, tol::SYMMETRIC_CONDITION)
}

/// Largest pattern residual of `cm` against bisymmetry under `part`,
/// relative to `max(1, ‖σ‖_max)`.
pub fn bisymmetry_residual(cm: &CovarianceMatrix, part: &ModeBipartition) -> Result<f64> {
    part.validate(cm)?;
    Ok(bisymmetric_pattern_residual(cm, &part.side_a, &part.side_b))
}
