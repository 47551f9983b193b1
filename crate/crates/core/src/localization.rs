//! Closed-form spectra of symmetric blocks, the equivalent two-mode state of
//! a bisymmetric covariance matrix, and its constructive localization by
//! local symplectic maps.
//!
//! Two independent routes produce the equivalent pair. The invariant route
//! works from `(spec, μ, Δ)` in O(1). The constructive route rotates each
//! block into its collective mode and the orthogonal complement, brings every
//! mode to Williamson form and fixes the remaining local rotations by an SVD
//! of the surviving cross block.

use nalgebra::{DMatrix, Matrix2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{EntanglementReport, ModeBipartition};
use crate::states::{BisymmetricSpec, FullySymmetricSpec};
use crate::symplectic::{
    two_mode_eigenvalues, williamson, CovarianceMatrix, SymplecticMatrix,
};
use crate::tol;

/// Eigenvalues of a fully symmetric block: `ν⁻` with multiplicity `n − 1`
/// and the collective `ν⁺`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockSpectrum {
    pub nu_minus: f64,
    pub nu_plus: f64,
    pub multiplicity_minus: usize,
}

fn checked_sqrt(value: f64, scale: f64, what: &str) -> Result<f64> {
    tol::clip_radicand(value, scale)
        .map(f64::sqrt)
        .ok_or_else(|| Error::invalid(format!("{what}: negative radicand {value:.6e}")))
}

pub fn fs_block_spectrum(spec: &FullySymmetricSpec) -> Result<BlockSpectrum> {
    if spec.modes == 0 {
        return Err(Error::invalid("block needs at least one mode"));
    }
    let (minus_sq, plus_sq) = spec.squared_eigenvalues();
    let scale = spec.b * spec.b;
    Ok(BlockSpectrum {
        nu_minus: checked_sqrt(minus_sq, scale, "nu_minus")?,
        nu_plus: checked_sqrt(plus_sq, scale * spec.modes as f64, "nu_plus")?,
        multiplicity_minus: spec.modes - 1,
    })
}

/// `ν⁺` of an `n`-mode fully symmetric block from the single-mode purity, the
/// degenerate eigenvalue and `ν⁺` of its two-mode reduction:
/// `(ν⁺)² = −n(n−2)/μ² + (n−1)/2 · (n ν₂⁺² + (n−2) ν⁻²)`.
pub fn nu_plus_from_two_mode(n: usize, mu_beta: f64, nu_minus: f64, nu_plus_2: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    if !(mu_beta > 0.0) {
        return Err(Error::invalid(format!("mu_beta = {mu_beta} must be positive")));
    }
    if n == 2 {
        return Ok(nu_plus_2);
    }
    let nf = n as f64;
    let local = 1.0 / (mu_beta * mu_beta);
    let pos = (nf - 1.0) / 2.0 * (nf * nu_plus_2 * nu_plus_2 + (nf - 2.0) * nu_minus * nu_minus);
    let neg = nf * (nf - 2.0) * local;
    checked_sqrt(pos - neg, pos.abs().max(neg.abs()), "nu_plus_from_two_mode")
}

/// `1/((ν⁻)^{n−1} ν⁺)`.
pub fn fs_global_purity(spec: &FullySymmetricSpec) -> Result<f64> {
    spec.validate()?;
    let s = fs_block_spectrum(spec)?;
    Ok(1.0 / (s.nu_minus.powi(s.multiplicity_minus as i32) * s.nu_plus))
}

/// `Δ = m det α + m(m−1) det ε + n det β + n(n−1) det ζ + 2mn det γ`.
pub fn global_delta_bisym(spec: &BisymmetricSpec) -> f64 {
    let (m, n) = (spec.m as f64, spec.n as f64);
    m * spec.a * spec.a
        + m * (m - 1.0) * spec.e1 * spec.e2
        + n * spec.b * spec.b
        + n * (n - 1.0) * spec.z1 * spec.z2
        + 2.0 * m * n * spec.g1 * spec.g2
}

/// `det σ` in closed form: the degenerate blocks contribute
/// `[(a−e1)(a−e2)]^{m−1} [(b−z1)(b−z2)]^{n−1}` and the collective pair
/// `Π_i [(a+(m−1)e_i)(b+(n−1)z_i) − mn g_i²]`.
pub fn global_determinant_bisym(spec: &BisymmetricSpec) -> f64 {
    let (m, n) = (spec.m as f64, spec.n as f64);
    let (alpha_minus, _) = spec.alpha().squared_eigenvalues();
    let (beta_minus, _) = spec.beta().squared_eigenvalues();
    let pair = |e: f64, z: f64, g: f64| (spec.a + (m - 1.0) * e) * (spec.b + (n - 1.0) * z) - m * n * g * g;
    alpha_minus.powi(spec.m as i32 - 1)
        * beta_minus.powi(spec.n as i32 - 1)
        * pair(spec.e1, spec.z1, spec.g1)
        * pair(spec.e2, spec.z2, spec.g2)
}

/// Standard-form two-mode state carrying all correlations of a bisymmetric
/// state: diagonal blocks `ν⁺_α I`, `ν⁺_β I`, cross block `diag(c₊, c₋)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalentTwoMode {
    pub cm_eq: CovarianceMatrix,
    pub mu_eq: f64,
    pub delta_eq: f64,
    pub nu_plus_alpha: f64,
    pub nu_plus_beta: f64,
    pub c_plus: f64,
    pub c_minus: f64,
}

impl EquivalentTwoMode {
    /// `det γ″ = c₊c₋`.
    pub fn det_cross(&self) -> f64 {
        self.c_plus * self.c_minus
    }

    /// `Δ̃ = (ν⁺_α)² + (ν⁺_β)² − 2 det γ″`.
    pub fn pt_delta(&self) -> f64 {
        self.nu_plus_alpha.powi(2) + self.nu_plus_beta.powi(2) - 2.0 * self.det_cross()
    }

    /// `ν̃` from `2ν̃² = Δ̃ − √(Δ̃² − 4/μ_eq²)`.
    pub fn nu_tilde(&self) -> Result<f64> {
        Ok(two_mode_eigenvalues(self.pt_delta(), 1.0 / (self.mu_eq * self.mu_eq))?.0)
    }

    pub fn is_symmetric(&self) -> bool {
        tol::close(self.nu_plus_alpha, self.nu_plus_beta, tol::SYMMETRIC_CONDITION)
    }

    pub fn report(&self) -> Result<EntanglementReport> {
        EntanglementReport::from_two_mode(self.nu_tilde()?, self.is_symmetric())
    }
}

/// Build the standard-form pair from the block data and the global
/// invariants `μ`, `Δ` of the parent state.
///
/// `μ_eq = (ν⁻_α)^{m−1} (ν⁻_β)^{n−1} μ` and
/// `Δ_eq = Δ − (m−1)(ν⁻_α)² − (n−1)(ν⁻_β)²`; `c₊`, `c₋` follow from
/// `c₊c₋ = (Δ_eq − (ν⁺_α)² − (ν⁺_β)²)/2` and
/// `1/μ_eq² = (ν⁺_α ν⁺_β − c₊²)(ν⁺_α ν⁺_β − c₋²)`, taking `c₊ ≥ |c₋|`,
/// `c₊ ≥ 0`, so `c₋` carries the sign of the cross determinant.
pub fn equivalent_two_mode_from_invariants(
    alpha: (&BlockSpectrum, usize),
    beta: (&BlockSpectrum, usize),
    mu: f64,
    delta: f64,
) -> Result<EquivalentTwoMode> {
    let ((sa, m), (sb, n)) = (alpha, beta);
    if !(mu > 0.0) {
        return Err(Error::invalid(format!("global purity {mu} must be positive")));
    }
    let mu_eq = sa.nu_minus.powi(m as i32 - 1) * sb.nu_minus.powi(n as i32 - 1) * mu;
    let delta_eq = delta
        - (m as f64 - 1.0) * sa.nu_minus.powi(2)
        - (n as f64 - 1.0) * sb.nu_minus.powi(2);
    let (pa, pb) = (sa.nu_plus, sb.nu_plus);
    let ab = pa * pb;
    let p = (delta_eq - pa * pa - pb * pb) / 2.0;
    let det_eq = 1.0 / (mu_eq * mu_eq);
    let scale = (ab * ab).max(1.0);
    let s = (ab * ab + p * p - det_eq) / ab;
    if s < -tol::RADICAND_CLIP * scale {
        return Err(Error::InconsistentInvariants(format!(
            "c₊² + c₋² = {s:.6e} is negative"
        )));
    }
    let s = s.max(0.0);
    let rad = tol::clip_radicand(s * s - 4.0 * p * p, s * s).ok_or_else(|| {
        Error::InconsistentInvariants(format!(
            "no real cross block: (c₊² + c₋²)² − 4(c₊c₋)² = {:.6e}",
            s * s - 4.0 * p * p
        ))
    })?;
    let c_plus = ((s + rad.sqrt()) / 2.0).sqrt();
    let c_minus = if c_plus > 0.0 { p / c_plus } else { 0.0 };
    #[rustfmt::skip]
    let entries = [
        pa, 0.0, c_plus, 0.0,
        0.0, pa, 0.0, c_minus,
        c_plus, 0.0, pb, 0.0,
        0.0, c_minus, 0.0, pb,
    ];
    Ok(EquivalentTwoMode {
        cm_eq: CovarianceMatrix::from_row_major(2, &entries)?,
        mu_eq,
        delta_eq,
        nu_plus_alpha: pa,
        nu_plus_beta: pb,
        c_plus,
        c_minus,
    })
}

/// Invariant route with `μ` and `Δ` taken from their closed forms.
pub fn equivalent_two_mode_invariants(spec: &BisymmetricSpec) -> Result<EquivalentTwoMode> {
    spec.validate_blocks()?;
    let det = global_determinant_bisym(spec);
    if !(det > 0.0) {
        return Err(Error::Unphysical { quantity: "global determinant", value: det });
    }
    let sa = fs_block_spectrum(&spec.alpha())?;
    let sb = fs_block_spectrum(&spec.beta())?;
    equivalent_two_mode_from_invariants((&sa, spec.m), (&sb, spec.n), 1.0 / det.sqrt(), global_delta_bisym(spec))
}

/// Largest deviation of `cm` from bisymmetry under `(side_a, side_b)`,
/// relative to `max(1, ‖σ‖_max)`: equal diagonal blocks and equal symmetric
/// off-diagonal blocks within each side, and one common cross block.
pub(crate) fn bisymmetric_pattern_residual(cm: &CovarianceMatrix, side_a: &[usize], side_b: &[usize]) -> f64 {
    let mut worst = 0.0_f64;
    let mut dev = |x: Matrix2<f64>, y: Matrix2<f64>| worst = worst.max((x - y).abs().max());
    for side in [side_a, side_b] {
        let d0 = cm.block(side[0], side[0]);
        for &i in side {
            dev(cm.block(i, i), d0);
        }
        if side.len() > 1 {
            let e0 = cm.block(side[0], side[1]);
            dev(e0, e0.transpose());
            for (x, &i) in side.iter().enumerate() {
                for &j in &side[x + 1..] {
                    dev(cm.block(i, j), e0);
                }
            }
        }
    }
    let g0 = cm.block(side_a[0], side_b[0]);
    for &i in side_a {
        for &j in side_b {
            dev(cm.block(i, j), g0);
        }
    }
    worst / tol::scale(cm.max_abs())
}

pub(crate) fn is_bisymmetric_for(cm: &CovarianceMatrix, part: &ModeBipartition) -> bool {
    bisymmetric_pattern_residual(cm, &part.side_a, &part.side_b) <= tol::PATTERN
}

/// Outcome of [`localize`].
///
/// `cm_final = Lᵀ σ L` with `L = local_symplectic`, which is block diagonal
/// over the split. In `cm_final` every mode is in Williamson form and the
/// only correlated pair is `(m−1, m)` (0-based), the last mode of the first
/// block and the first mode of the second.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizationResult {
    pub local_symplectic: SymplecticMatrix,
    pub cm_final: CovarianceMatrix,
    pub equivalent: EquivalentTwoMode,
    pub residual: f64,
}

/// Orthogonal `k × k` matrix whose last row is the normalized all-ones
/// vector and whose other rows are Helmert contrasts.
fn helmert_last(k: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(k, k);
    for j in 1..k {
        let norm = ((j * (j + 1)) as f64).sqrt();
        for c in 0..j {
            h[(j - 1, c)] = 1.0 / norm;
        }
        h[(j - 1, j)] = -(j as f64) / norm;
    }
    let w = 1.0 / (k as f64).sqrt();
    for c in 0..k {
        h[(k - 1, c)] = w;
    }
    h
}

/// `M ⊗ I₂` placed on the modes `offset..offset + k`.
fn embed_mode_matrix(target: &mut DMatrix<f64>, offset: usize, m: &DMatrix<f64>) {
    let k = m.nrows();
    for r in 0..k {
        for c in 0..k {
            for q in 0..2 {
                target[(2 * (offset + r) + q, 2 * (offset + c) + q)] = m[(r, c)];
            }
        }
    }
}

/// Flip the second column if needed so that `det u = +1`.
fn proper_rotation(mut u: Matrix2<f64>) -> Matrix2<f64> {
    if u.determinant() < 0.0 {
        u.column_mut(1).neg_mut();
    }
    u
}

fn off_skeleton_residual(cm: &DMatrix<f64>, m: usize) -> f64 {
    let (pa, pb) = (2 * (m - 1), 2 * m);
    let mut worst = 0.0_f64;
    for r in 0..cm.nrows() {
        for c in 0..cm.ncols() {
            if r == c {
                continue;
            }
            let (lo, hi) = (r.min(c), r.max(c));
            if (lo == pa && hi == pb) || (lo == pa + 1 && hi == pb + 1) {
                continue;
            }
            worst = worst.max(cm[(r, c)].abs());
        }
    }
    worst
}

/// Bring a state that is bisymmetric under the split `m × n` (leading `m`
/// modes against the rest) to its localized form.
pub fn localize(cm: &CovarianceMatrix, m: usize, n: usize) -> Result<LocalizationResult> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("both blocks need at least one mode"));
    }
    if m + n != cm.modes() {
        return Err(Error::invalid(format!(
            "split {m} x {n} does not match a {}-mode state",
            cm.modes()
        )));
    }
    let total = m + n;
    let scale = tol::scale(cm.max_abs());
    let side_a: Vec<usize> = (0..m).collect();
    let side_b: Vec<usize> = (m..total).collect();
    let pattern = bisymmetric_pattern_residual(cm, &side_a, &side_b);
    if pattern > tol::PATTERN {
        return Err(Error::LocalizationFailure {
            reason: format!("state is not bisymmetric under the {m} x {n} split"),
            residual: pattern,
            tol: tol::PATTERN,
        });
    }

    // Collective modes at the boundary: last of block a, first of block b.
    let mut rot = DMatrix::zeros(2 * total, 2 * total);
    embed_mode_matrix(&mut rot, 0, &helmert_last(m).transpose());
    let hb = helmert_last(n);
    let mut hb_first = DMatrix::zeros(n, n);
    for r in 0..n {
        hb_first.set_row((r + 1) % n, &hb.row(r));
    }
    embed_mode_matrix(&mut rot, m, &hb_first.transpose());
    let stage1 = rot.transpose() * cm.matrix() * &rot;

    // Single-mode Williamson form on every mode.
    let mut local = DMatrix::zeros(2 * total, 2 * total);
    for k in 0..total {
        let block = stage1.fixed_view::<2, 2>(2 * k, 2 * k).into_owned();
        let single = CovarianceMatrix::from_symmetric_unchecked(DMatrix::from_column_slice(
            2,
            2,
            ((block + block.transpose()) * 0.5).as_slice(),
        ));
        let (s, _) = williamson(&single)?;
        let inv = s.inverse();
        local.view_mut((2 * k, 2 * k), (2, 2)).copy_from(inv.matrix());
    }
    let stage2 = local.transpose() * &stage1 * &local;

    // Diagonalize the surviving cross block with proper rotations.
    let (pa, pb) = (2 * (m - 1), 2 * m);
    let cross = stage2.fixed_view::<2, 2>(pa, pb).into_owned();
    let svd = cross.svd(true, true);
    let u = proper_rotation(svd.u.ok_or_else(|| Error::domain("SVD of cross block failed"))?);
    let v = proper_rotation(svd.v_t.ok_or_else(|| Error::domain("SVD of cross block failed"))?.transpose());
    let mut fix = DMatrix::identity(2 * total, 2 * total);
    fix.view_mut((pa, pa), (2, 2)).copy_from(&u);
    fix.view_mut((pb, pb), (2, 2)).copy_from(&v);

    let l = rot * local * fix;
    let fin = l.transpose() * cm.matrix() * &l;
    let fin = (&fin + fin.transpose()) * 0.5;
    let residual = off_skeleton_residual(&fin, m) / scale;
    if residual > tol::LOCAL {
        return Err(Error::LocalizationFailure {
            reason: "localized matrix keeps correlations outside the boundary pair".into(),
            residual,
            tol: tol::LOCAL,
        });
    }

    let nu_a = 0.5 * (fin[(pa, pa)] + fin[(pa + 1, pa + 1)]);
    let nu_b = 0.5 * (fin[(pb, pb)] + fin[(pb + 1, pb + 1)]);
    let (c_plus, c_minus) = (fin[(pa, pb)], fin[(pa + 1, pb + 1)]);
    let cm_eq = CovarianceMatrix::from_symmetric_unchecked(DMatrix::from_fn(4, 4, |r, c| {
        fin[(pa + r, pa + c)]
    }));
    let equivalent = EquivalentTwoMode {
        mu_eq: crate::symplectic::purity(&cm_eq)?,
        delta_eq: crate::symplectic::delta_invariant(&cm_eq),
        cm_eq,
        nu_plus_alpha: nu_a,
        nu_plus_beta: nu_b,
        c_plus,
        c_minus,
    };
    Ok(LocalizationResult {
        local_symplectic: SymplecticMatrix::new(l).map_err(|_| Error::DecompositionFailure {
            residual: f64::NAN,
            tol: tol::SYMPLECTIC,
        })?,
        cm_final: CovarianceMatrix::from_symmetric_unchecked(fin),
        equivalent,
        residual,
    })
}

/// Entanglement between the first `k` modes of a fully symmetric state and
/// the rest, through the invariant route. EoF is included when the split is
/// balanced.
pub fn block_log_negativity(spec: &FullySymmetricSpec, k: usize) -> Result<EntanglementReport> {
    let bi = BisymmetricSpec::from_fully_symmetric(spec, k)?;
    equivalent_two_mode_invariants(&bi)?.report()
}

/// Same as [`block_log_negativity`] for an explicit matrix, through
/// [`localize`].
pub fn block_log_negativity_cm(cm: &CovarianceMatrix, k: usize) -> Result<EntanglementReport> {
    if k == 0 || k >= cm.modes() {
        return Err(Error::invalid(format!("block size k = {k} out of range for {} modes", cm.modes())));
    }
    localize(cm, k, cm.modes() - k)?.equivalent.report()
}

fn best_split<F>(modes: usize, mut eval: F) -> Result<(usize, EntanglementReport)>
where
    F: FnMut(usize) -> Result<EntanglementReport>,
{
    if modes < 2 {
        return Err(Error::invalid("a bipartition needs at least two modes"));
    }
    let mut best: Option<(usize, EntanglementReport)> = None;
    for k in 1..modes {
        let rep = eval(k)?;
        let better = match &best {
            None => true,
            Some((_, b)) => {
                let width = 1e-10 * b.log_negativity.abs().max(rep.log_negativity.abs());
                rep.log_negativity > b.log_negativity + width
            }
        };
        if better {
            best = Some((k, rep));
        }
    }
    Ok(best.expect("at least one split"))
}

/// The block size `k*` maximizing `E_N` over `k × (M − k)` splits, with ties
/// going to the smallest `k`.
pub fn optimal_localizable_entanglement(spec: &FullySymmetricSpec) -> Result<(usize, EntanglementReport)> {
    spec.validate()?;
    best_split(spec.modes, |k| block_log_negativity(spec, k))
}

pub fn optimal_localizable_entanglement_cm(cm: &CovarianceMatrix) -> Result<(usize, EntanglementReport)> {
    best_split(cm.modes(), |k| block_log_negativity_cm(cm, k))
}
