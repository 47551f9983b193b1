//! Covariance matrices, symplectic matrices and their spectra.
//!
//! Phase-space ordering is `(x₁, p₁, …, x_N, p_N)` and the vacuum covariance
//! matrix is the identity. Symplectic maps act on covariance matrices by
//! congruence, `σ ↦ Sᵀ σ S`, and the Williamson decomposition is written in
//! the same direction: `σ = Sᵀ ν S` with `ν = diag(ν₁, ν₁, …, ν_N, ν_N)`.

use nalgebra as na;
use na::{DMatrix, Matrix2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tol;

/// Largest absolute entry.
pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Real symmetric `2N × 2N` matrix of second moments of an `N`-mode state.
///
/// Symmetry is enforced on construction; bona fide-ness is not, since
/// partially transposed matrices share the type.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    mat: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Validate and wrap a matrix. Entries that are symmetric only up to
    /// `tol::SYM · max(1, ‖σ‖_max)` are symmetrized; anything worse is rejected.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = mat.shape();
        if rows != cols {
            return Err(Error::invalid(format!("covariance matrix is {rows}x{cols}, not square")));
        }
        if rows == 0 || rows % 2 != 0 {
            return Err(Error::invalid(format!(
                "covariance matrix dimension {rows} is not a positive even number"
            )));
        }
        if mat.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("covariance matrix has non-finite entries"));
        }
        let asym = max_abs(&(&mat - mat.transpose()));
        let limit = tol::SYM * tol::scale(max_abs(&mat));
        if asym > limit {
            return Err(Error::invalid(format!(
                "covariance matrix is not symmetric (max |σ_ij - σ_ji| = {asym:.3e} > {limit:.3e})"
            )));
        }
        // Halve before adding so entries near f64::MAX stay finite.
        Ok(Self::from_symmetric_unchecked(&mat * 0.5 + mat.transpose() * 0.5))
    }

    pub(crate) fn from_symmetric_unchecked(mat: DMatrix<f64>) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        Self { mat }
    }

    /// Build from `4N²` row-major entries.
    pub fn from_row_major(modes: usize, entries: &[f64]) -> Result<Self> {
        if modes == 0 {
            return Err(Error::invalid("mode count must be positive"));
        }
        let expected = modes.checked_mul(2).and_then(|d| d.checked_mul(d));
        if expected != Some(entries.len()) {
            return Err(Error::invalid(format!(
                "expected 4·{modes}² entries for {modes} modes, got {}",
                entries.len()
            )));
        }
        let dim = 2 * modes;
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// The `N`-mode vacuum, `I_{2N}`.
    pub fn vacuum(modes: usize) -> Self {
        Self::from_symmetric_unchecked(DMatrix::identity(2 * modes, 2 * modes))
    }

    pub fn modes(&self) -> usize {
        self.mat.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.mat)
    }

    /// The 2×2 block `σ_ij` coupling modes `i` and `j` (0-based).
    pub fn block(&self, i: usize, j: usize) -> Matrix2<f64> {
        self.mat.fixed_view::<2, 2>(2 * i, 2 * j).into_owned()
    }

    pub fn row_major(&self) -> Vec<f64> {
        self.mat.transpose().iter().copied().collect()
    }

    /// The same state with its modes relabelled: mode `i` of the result is
    /// mode `perm[i]` of `self`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Self> {
        check_mode_list(perm, self.modes(), "permutation")?;
        if perm.len() != self.modes() {
            return Err(Error::invalid("permutation must list every mode exactly once"));
        }
        partial_trace(self, perm)
    }
}

/// The block-diagonal symplectic form `Ω = ω^{⊕N}`, `ω = [[0, 1], [-1, 0]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticForm {
    mat: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn modes(&self) -> usize {
        self.mat.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }
}

pub fn symplectic_form(modes: usize) -> Result<SymplecticForm> {
    if modes == 0 {
        return Err(Error::invalid("symplectic form needs at least one mode"));
    }
    Ok(SymplecticForm { mat: omega(modes) })
}

pub(crate) fn omega(modes: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        om[(2 * k, 2 * k + 1)] = 1.0;
        om[(2 * k + 1, 2 * k)] = -1.0;
    }
    om
}

/// `‖SᵀΩS − Ω‖_max` for a square matrix of even dimension.
pub fn symplectic_residual(mat: &DMatrix<f64>) -> f64 {
    let om = omega(mat.nrows() / 2);
    max_abs(&(mat.transpose() * &om * mat - om))
}

/// `SᵀΩS = Ω` within `tol · max(1, ‖S‖²_max)`.
pub fn is_symplectic(mat: &DMatrix<f64>, tol: f64) -> bool {
    let (r, c) = mat.shape();
    if r != c || r == 0 || r % 2 != 0 {
        return false;
    }
    let s = max_abs(mat);
    symplectic_residual(mat) <= tol * tol::scale(s * s)
}

/// A real symplectic matrix, `SᵀΩS = Ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticMatrix {
    mat: DMatrix<f64>,
}

impl SymplecticMatrix {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        if !is_symplectic(&mat, tol::SYMPLECTIC) {
            let (r, c) = mat.shape();
            if r != c || r % 2 != 0 || r == 0 {
                return Err(Error::invalid(format!("a {r}x{c} matrix cannot be symplectic")));
            }
            return Err(Error::invalid(format!(
                "matrix is not symplectic (‖SᵀΩS − Ω‖ = {:.3e})",
                symplectic_residual(&mat)
            )));
        }
        Ok(Self { mat })
    }

    pub(crate) fn from_matrix_unchecked(mat: DMatrix<f64>) -> Self {
        Self { mat }
    }

    pub fn identity(modes: usize) -> Self {
        Self { mat: DMatrix::identity(2 * modes, 2 * modes) }
    }

    pub fn modes(&self) -> usize {
        self.mat.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn row_major(&self) -> Vec<f64> {
        self.mat.transpose().iter().copied().collect()
    }

    /// `S⁻¹ = −Ω Sᵀ Ω`.
    pub fn inverse(&self) -> Self {
        let om = omega(self.modes());
        Self { mat: -(&om * self.mat.transpose() * &om) }
    }

    /// Matrix product `self · other`. Under congruence, `(AB)ᵀσ(AB)` applies
    /// `A` first.
    pub fn then(&self, other: &SymplecticMatrix) -> Result<Self> {
        if self.modes() != other.modes() {
            return Err(Error::invalid("symplectic matrices act on different mode counts"));
        }
        Ok(Self { mat: &self.mat * &other.mat })
    }

    /// `self ⊕ other`, acting on the modes of `self` followed by those of `other`.
    pub fn direct_sum(&self, other: &SymplecticMatrix) -> Self {
        let (a, b) = (self.mat.nrows(), other.mat.nrows());
        let mut mat = DMatrix::zeros(a + b, a + b);
        mat.view_mut((0, 0), (a, a)).copy_from(&self.mat);
        mat.view_mut((a, a), (b, b)).copy_from(&other.mat);
        Self { mat }
    }

    /// Single-mode squeezer `diag(e^{-r}, e^{r})` on mode `k`.
    pub fn squeezer(modes: usize, k: usize, r: f64) -> Self {
        let mut mat = DMatrix::identity(2 * modes, 2 * modes);
        mat[(2 * k, 2 * k)] = (-r).exp();
        mat[(2 * k + 1, 2 * k + 1)] = r.exp();
        Self { mat }
    }

    /// Phase rotation by `theta` on mode `k`.
    pub fn rotation(modes: usize, k: usize, theta: f64) -> Self {
        let mut mat = DMatrix::identity(2 * modes, 2 * modes);
        let (s, c) = theta.sin_cos();
        mat[(2 * k, 2 * k)] = c;
        mat[(2 * k, 2 * k + 1)] = s;
        mat[(2 * k + 1, 2 * k)] = -s;
        mat[(2 * k + 1, 2 * k + 1)] = c;
        Self { mat }
    }

    /// Beam splitter with mixing angle `theta` between modes `j` and `k`.
    pub fn beam_splitter(modes: usize, j: usize, k: usize, theta: f64) -> Self {
        let mut mat = DMatrix::identity(2 * modes, 2 * modes);
        let (s, c) = theta.sin_cos();
        for q in 0..2 {
            let (a, b) = (2 * j + q, 2 * k + q);
            mat[(a, a)] = c;
            mat[(a, b)] = s;
            mat[(b, a)] = -s;
            mat[(b, b)] = c;
        }
        Self { mat }
    }
}

/// Symplectic eigenvalues in descending order, with their degeneracy
/// structure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymplecticSpectrum {
    pub values: Vec<f64>,
    /// `(value, multiplicity)` after clustering within the default
    /// `tol::CLUSTER · max(1, ν_max)`.
    pub clusters: Vec<(f64, usize)>,
}

impl SymplecticSpectrum {
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        let width = tol::CLUSTER * tol::scale(values.first().copied().unwrap_or(1.0));
        let clusters = cluster_descending(&values, width);
        Self { values, clusters }
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Re-cluster with an explicit absolute width.
    pub fn clusters_within(&self, width: f64) -> Vec<(f64, usize)> {
        cluster_descending(&self.values, width)
    }

    /// Multiplicity of the cluster whose mean lies within `width` of `value`.
    pub fn multiplicity_of(&self, value: f64, width: f64) -> usize {
        self.values.iter().filter(|v| (*v - value).abs() <= width).count()
    }
}

/// Group a descending list into runs whose members lie within `width` of the
/// run's first element. Cluster values are run means.
pub(crate) fn cluster_descending(values: &[f64], width: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    while start < values.len() {
        let head = values[start];
        let mut end = start + 1;
        while end < values.len() && (head - values[end]).abs() <= width {
            end += 1;
        }
        let run = &values[start..end];
        out.push((run.iter().sum::<f64>() / run.len() as f64, run.len()));
        start = end;
    }
    out
}

/// Symplectic spectrum as the singular values of `LᵀΩL`, where `σ = LLᵀ`.
///
/// `LᵀΩL` is antisymmetric and similar to `Ωσ`, so its singular values are
/// the `ν_k`, each twice. The real Schur iteration on `Ωσ` stalls on such
/// degenerate pairs; the SVD does not.
pub fn symplectic_eigenvalues(cm: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    let chol = cm
        .mat
        .clone()
        .cholesky()
        .ok_or_else(|| Error::domain("covariance matrix is not positive definite"))?;
    let l = chol.l();
    let n = cm.modes();
    let k = l.transpose() * omega(n) * &l;
    let svd = na::linalg::SVD::try_new(k, false, false, f64::EPSILON, 1000 * (2 * n).max(8))
        .ok_or_else(|| Error::domain("singular value iteration did not converge"))?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    // Each ν appears twice; average each pair.
    let values = sv.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    Ok(SymplecticSpectrum::from_values(values))
}

/// `σ + iΩ ≥ 0`, tested as `min ν ≥ 1 − tol`. Matrices that are not positive
/// definite are never bona fide.
pub fn is_bona_fide(cm: &CovarianceMatrix, tol: f64) -> Result<bool> {
    if cm.mat.clone().cholesky().is_none() {
        return Ok(false);
    }
    Ok(symplectic_eigenvalues(cm)?.min() >= 1.0 - tol)
}

fn sym_sqrt(mat: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let dim = mat.nrows();
    let eig = na::linalg::SymmetricEigen::try_new(mat.clone(), f64::EPSILON, 1000 * dim.max(8))
        .ok_or_else(|| Error::domain("symmetric eigensolver did not converge"))?;
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::domain("covariance matrix is not positive definite"));
    }
    let roots = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let v = &eig.eigenvectors;
    let r = v * roots * v.transpose();
    Ok((&r + r.transpose()) * 0.5)
}

/// Remove from `v` its components along every column in `basis`, twice.
fn orthogonalize(v: &mut na::DVector<f64>, basis: &[na::DVector<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(v);
            v.axpy(-c, b, 1.0);
        }
    }
}

/// Williamson normal form `σ = Sᵀ ν S`.
///
/// `σ^{1/2}` is formed by symmetric eigendecomposition and the antisymmetric
/// `K = σ^{1/2} Ω σ^{1/2}` is brought to `⊕ ν_k ω` by an orthogonal `O`, read
/// off from the eigenvectors of `KᵀK`. Then `S = ν^{-1/2} Oᵀ σ^{1/2}`.
/// Eigenvalues are returned in descending order, matching the mode order of
/// `S`.
pub fn williamson(cm: &CovarianceMatrix) -> Result<(SymplecticMatrix, SymplecticSpectrum)> {
    let n = cm.modes();
    let dim = 2 * n;
    let root = sym_sqrt(&cm.mat)?;
    let k = &root * omega(n) * &root;
    let k = (&k - k.transpose()) * 0.5;
    let gram = k.transpose() * &k;
    let eig = na::linalg::SymmetricEigen::try_new((&gram + gram.transpose()) * 0.5, f64::EPSILON, 1000 * dim.max(8))
        .ok_or_else(|| Error::domain("symmetric eigensolver did not converge on KᵀK"))?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut chosen: Vec<na::DVector<f64>> = Vec::with_capacity(dim);
    let mut pairs: Vec<(f64, na::DVector<f64>, na::DVector<f64>)> = Vec::with_capacity(n);
    for &idx in &order {
        if pairs.len() == n {
            break;
        }
        let mut u = eig.eigenvectors.column(idx).into_owned();
        orthogonalize(&mut u, &chosen);
        let norm = u.norm();
        if norm < 0.5 {
            continue;
        }
        u /= norm;
        let ku = &k * &u;
        let nu_guess = ku.norm();
        if nu_guess <= 0.0 {
            return Err(Error::domain("degenerate symplectic eigenvalue zero"));
        }
        let mut w = -ku / nu_guess;
        chosen.push(u.clone());
        orthogonalize(&mut w, &chosen);
        let wn = w.norm();
        if wn < 0.5 {
            return Err(Error::domain("failed to complete a canonical pair for K"));
        }
        w /= wn;
        chosen.push(w.clone());
        let nu = u.dot(&(&k * &w));
        pairs.push((nu, u, w));
    }
    if pairs.len() != n {
        return Err(Error::domain("could not find a full canonical basis for K"));
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut o = DMatrix::zeros(dim, dim);
    let mut nus = Vec::with_capacity(n);
    for (i, (nu, u, w)) in pairs.iter().enumerate() {
        o.set_column(2 * i, u);
        o.set_column(2 * i + 1, w);
        nus.push(*nu);
    }
    let mut s = o.transpose() * &root;
    for (i, nu) in nus.iter().enumerate() {
        let f = 1.0 / nu.sqrt();
        for row in [2 * i, 2 * i + 1] {
            s.row_mut(row).scale_mut(f);
        }
    }

    let mut normal = DMatrix::zeros(dim, dim);
    for (i, nu) in nus.iter().enumerate() {
        normal[(2 * i, 2 * i)] = *nu;
        normal[(2 * i + 1, 2 * i + 1)] = *nu;
    }
    let scale = tol::scale(cm.max_abs());
    let residual = max_abs(&(s.transpose() * &normal * &s - &cm.mat)) / scale;
    if residual > tol::RECON {
        return Err(Error::DecompositionFailure { residual, tol: tol::RECON });
    }
    let sympl = symplectic_residual(&s) / tol::scale(max_abs(&s).powi(2));
    if sympl > tol::SYMPLECTIC {
        return Err(Error::DecompositionFailure { residual: sympl, tol: tol::SYMPLECTIC });
    }
    let spectrum = SymplecticSpectrum {
        clusters: cluster_descending(&nus, tol::CLUSTER * tol::scale(nus[0])),
        values: nus,
    };
    Ok((SymplecticMatrix::from_matrix_unchecked(s), spectrum))
}

/// `det σ` via LU.
pub fn determinant(cm: &CovarianceMatrix) -> f64 {
    cm.mat.clone().determinant()
}

/// `μ = 1/√(det σ)`.
pub fn purity(cm: &CovarianceMatrix) -> Result<f64> {
    let det = determinant(cm);
    if !(det > 0.0) {
        return Err(Error::domain(format!("det σ = {det:.6e} is not positive")));
    }
    Ok(1.0 / det.sqrt())
}

fn det2(m: &Matrix2<f64>) -> f64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// `Δ_σ = Σ_{i,j} det σ_ij` over the 2×2 block decomposition.
pub fn delta_invariant(cm: &CovarianceMatrix) -> f64 {
    let n = cm.modes();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += det2(&cm.block(i, j));
        }
    }
    total
}

/// `Sᵀ σ S`.
pub fn apply_symplectic(s: &SymplecticMatrix, cm: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    if s.modes() != cm.modes() {
        return Err(Error::invalid(format!(
            "symplectic acts on {} modes but the state has {}",
            s.modes(),
            cm.modes()
        )));
    }
    let out = s.mat.transpose() * &cm.mat * &s.mat;
    Ok(CovarianceMatrix::from_symmetric_unchecked((&out + out.transpose()) * 0.5))
}

pub(crate) fn check_mode_list(list: &[usize], modes: usize, what: &str) -> Result<()> {
    if list.is_empty() {
        return Err(Error::invalid(format!("{what} is empty")));
    }
    let mut seen = vec![false; modes];
    for &k in list {
        if k >= modes {
            return Err(Error::invalid(format!("{what}: mode {} out of range (state has {modes} modes)", k + 1)));
        }
        if seen[k] {
            return Err(Error::invalid(format!("{what}: mode {} listed twice", k + 1)));
        }
        seen[k] = true;
    }
    Ok(())
}

/// Reduced state on `keep` (0-based mode indices, in the given order).
pub fn partial_trace(cm: &CovarianceMatrix, keep: &[usize]) -> Result<CovarianceMatrix> {
    check_mode_list(keep, cm.modes(), "kept mode set")?;
    let idx: Vec<usize> = keep.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
    let dim = idx.len();
    let out = DMatrix::from_fn(dim, dim, |r, c| cm.mat[(idx[r], idx[c])]);
    Ok(CovarianceMatrix::from_symmetric_unchecked(out))
}

/// `(ν₋, ν₊)` from `2ν∓² = Δ ∓ √(Δ² − 4 det)`.
///
/// `ν₋` is taken as `√(det)/ν₊` to avoid cancellation.
pub fn two_mode_eigenvalues(delta: f64, det: f64) -> Result<(f64, f64)> {
    if !(det > 0.0) {
        return Err(Error::domain(format!("two-mode determinant {det:.6e} is not positive")));
    }
    let rad = tol::clip_radicand(delta * delta - 4.0 * det, delta * delta)
        .ok_or_else(|| Error::domain("two-mode radicand Δ² − 4 det σ is negative"))?;
    let plus_sq = 0.5 * (delta + rad.sqrt());
    if !(plus_sq > 0.0) {
        return Err(Error::domain("two-mode invariants give a non-positive ν₊²"));
    }
    let plus = plus_sq.sqrt();
    Ok((det.sqrt() / plus, plus))
}

/// Symplectic invariants of a two-mode covariance matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoModeInvariants {
    pub det_total: f64,
    pub delta: f64,
    pub det_block_a: f64,
    pub det_block_b: f64,
}

impl TwoModeInvariants {
    pub fn of(cm: &CovarianceMatrix) -> Result<Self> {
        if cm.modes() != 2 {
            return Err(Error::invalid(format!("expected a two-mode state, got {} modes", cm.modes())));
        }
        let det_total = determinant(cm);
        if !(det_total > 0.0) {
            return Err(Error::domain(format!("det σ = {det_total:.6e} is not positive")));
        }
        Ok(Self {
            det_total,
            delta: delta_invariant(cm),
            det_block_a: det2(&cm.block(0, 0)),
            det_block_b: det2(&cm.block(1, 1)),
        })
    }

    /// `(ν₋, ν₊)`.
    pub fn symplectic_eigenvalues(&self) -> Result<(f64, f64)> {
        two_mode_eigenvalues(self.delta, self.det_total)
    }

    /// `Δ̃ = −Δ + 2 det A + 2 det B`, the `Δ` of the partial transpose.
    pub fn pt_delta(&self) -> f64 {
        -self.delta + 2.0 * self.det_block_a + 2.0 * self.det_block_b
    }

    /// `(ν̃₋, ν̃₊)` of the partial transpose.
    pub fn pt_symplectic_eigenvalues(&self) -> Result<(f64, f64)> {
        two_mode_eigenvalues(self.pt_delta(), self.det_total)
    }

    pub fn purity(&self) -> f64 {
        1.0 / self.det_total.sqrt()
    }

    /// `det A = det B` within `rel` (relative).
    pub fn is_symmetric(&self, rel: f64) -> bool {
        tol::close(self.det_block_a, self.det_block_b, rel)
    }
}

pub fn two_mode_invariants(cm: &CovarianceMatrix) -> Result<TwoModeInvariants> {
    TwoModeInvariants::of(cm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn thermal(nus: &[f64]) -> CovarianceMatrix {
        let diag: Vec<f64> = nus.iter().flat_map(|&v| [v, v]).collect();
        CovarianceMatrix::new(DMatrix::from_diagonal(&na::DVector::from_vec(diag))).unwrap()
    }

    #[test]
    fn form_single_mode_and_square() {
        let om = symplectic_form(1).unwrap();
        assert_eq!(om.matrix(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        for n in 1..6 {
            let om = symplectic_form(n).unwrap();
            let sq = om.matrix() * om.matrix();
            assert_eq!(sq, -DMatrix::<f64>::identity(2 * n, 2 * n));
            assert_eq!(om.matrix().transpose(), -om.matrix());
        }
        let two = symplectic_form(2).unwrap();
        assert_eq!(two.matrix()[(2, 3)], 1.0);
        assert_eq!(two.matrix()[(0, 3)], 0.0);
        assert!(symplectic_form(0).is_err());
    }

    #[test]
    fn huge_entries_stay_finite() {
        let m = DMatrix::from_row_slice(2, 2, &[1e308, 0.0, 0.0, 1e-308]);
        let cm = CovarianceMatrix::new(m).unwrap();
        assert_eq!(cm.matrix()[(0, 0)], 1e308);
    }

    #[test]
    fn rejects_asymmetric_and_odd() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(CovarianceMatrix::new(m), Err(Error::InvalidArgument(_))));
        assert!(CovarianceMatrix::new(DMatrix::identity(3, 3)).is_err());
        assert!(CovarianceMatrix::new(DMatrix::from_element(2, 2, f64::NAN)).is_err());
    }

    #[test]
    fn vacuum_and_thermal_spectra() {
        for n in 1..5 {
            let s = symplectic_eigenvalues(&CovarianceMatrix::vacuum(n)).unwrap();
            assert!(s.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
            assert_eq!(s.clusters.len(), 1);
            assert_eq!(s.clusters[0].1, n);
            assert!((s.clusters[0].0 - 1.0).abs() < 1e-12);
            assert!(is_bona_fide(&CovarianceMatrix::vacuum(n), tol::PHYS).unwrap());
        }
        let s = symplectic_eigenvalues(&thermal(&[2.0, 3.5])).unwrap();
        assert!((s.values[0] - 3.5).abs() < 1e-12 && (s.values[1] - 2.0).abs() < 1e-12);
        let sub = CovarianceMatrix::new(DMatrix::from_diagonal_element(2, 2, 0.5)).unwrap();
        assert!(!is_bona_fide(&sub, tol::PHYS).unwrap());
        let s = symplectic_eigenvalues(&sub).unwrap();
        assert!((s.values[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn not_positive_definite_is_domain_error() {
        let m = CovarianceMatrix::new(DMatrix::from_diagonal_element(2, 2, -1.0)).unwrap();
        assert!(matches!(symplectic_eigenvalues(&m), Err(Error::NumericalDomain(_))));
        assert!(!is_bona_fide(&m, tol::PHYS).unwrap());
        assert!(matches!(williamson(&m), Err(Error::NumericalDomain(_))));
    }

    #[test]
    fn williamson_of_normal_form() {
        let cm = thermal(&[3.0, 2.0]);
        let (s, nu) = williamson(&cm).unwrap();
        assert!((nu.values[0] - 3.0).abs() < 1e-12 && (nu.values[1] - 2.0).abs() < 1e-12);
        assert!(is_symplectic(s.matrix(), 1e-12));
        // S is orthogonal here: a per-mode rotation at most.
        let sts = s.matrix().transpose() * s.matrix();
        assert!(max_abs(&(sts - DMatrix::identity(4, 4))) < 1e-12);
    }

    #[test]
    fn williamson_orders_swapped_modes() {
        let cm = thermal(&[2.0, 3.0]);
        let (s, nu) = williamson(&cm).unwrap();
        assert_eq!(nu.values.len(), 2);
        assert!((nu.values[0] - 3.0).abs() < 1e-12);
        let rec = s.matrix().transpose() * DMatrix::from_diagonal(&na::DVector::from_vec(vec![3.0, 3.0, 2.0, 2.0])) * s.matrix();
        assert!(max_abs(&(rec - cm.matrix())) < 1e-12);
    }

    #[test]
    fn delta_of_standard_form() {
        let (a, b, cp, cm_) = (2.0, 3.0, 1.2, -0.7);
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[a, 0.0, cp, 0.0, 0.0, a, 0.0, cm_, cp, 0.0, b, 0.0, 0.0, cm_, 0.0, b],
        );
        let cm = CovarianceMatrix::new(m).unwrap();
        assert!((delta_invariant(&cm) - (a * a + b * b + 2.0 * cp * cm_)).abs() < 1e-12);
        for n in 1..5 {
            assert_eq!(delta_invariant(&CovarianceMatrix::vacuum(n)), n as f64);
        }
    }

    #[test]
    fn purity_of_thermal() {
        assert_eq!(purity(&CovarianceMatrix::vacuum(3)).unwrap(), 1.0);
        let p = purity(&thermal(&[2.0, 4.0])).unwrap();
        assert!((p - 1.0 / 8.0).abs() < 1e-14);
        let bad = CovarianceMatrix::new(DMatrix::from_diagonal(&na::DVector::from_vec(vec![1.0, -1.0]))).unwrap();
        assert!(matches!(purity(&bad), Err(Error::NumericalDomain(_))));
    }

    #[test]
    fn apply_identity_and_rotation() {
        let cm = thermal(&[2.0, 1.5]);
        let out = apply_symplectic(&SymplecticMatrix::identity(2), &cm).unwrap();
        assert_eq!(out, cm);
        let rot = SymplecticMatrix::rotation(1, 0, 0.7);
        let vac = apply_symplectic(&rot, &CovarianceMatrix::vacuum(1)).unwrap();
        assert!(max_abs(&(vac.matrix() - DMatrix::identity(2, 2))) < 1e-15);
        assert!(apply_symplectic(&SymplecticMatrix::identity(3), &cm).is_err());
    }

    #[test]
    fn symplectic_constructors_and_inverse() {
        let s = SymplecticMatrix::squeezer(3, 1, 0.4)
            .then(&SymplecticMatrix::beam_splitter(3, 0, 2, 0.3))
            .unwrap()
            .then(&SymplecticMatrix::rotation(3, 2, 1.1))
            .unwrap();
        assert!(is_symplectic(s.matrix(), 1e-12));
        let id = s.then(&s.inverse()).unwrap();
        assert!(max_abs(&(id.matrix() - DMatrix::identity(6, 6))) < 1e-12);
        assert!((s.matrix().clone().determinant() - 1.0).abs() < 1e-12);
        assert!(SymplecticMatrix::new(DMatrix::identity(2, 2) * 2.0).is_err());
    }

    #[test]
    fn partial_trace_edge_cases() {
        let cm = thermal(&[1.0, 2.0, 3.0]);
        assert_eq!(partial_trace(&cm, &[0, 1, 2]).unwrap(), cm);
        let r = partial_trace(&cm, &[2]).unwrap();
        assert_eq!(r.matrix()[(0, 0)], 3.0);
        assert!(partial_trace(&cm, &[]).is_err());
        assert!(partial_trace(&cm, &[3]).is_err());
        assert!(partial_trace(&cm, &[1, 1]).is_err());
    }

    #[test]
    fn two_mode_closed_form_matches_normal_form() {
        let inv = two_mode_invariants(&thermal(&[1.5, 4.0])).unwrap();
        let (lo, hi) = inv.symplectic_eigenvalues().unwrap();
        assert!((lo - 1.5).abs() < 1e-12 && (hi - 4.0).abs() < 1e-12);
        assert!(two_mode_invariants(&thermal(&[1.0])).is_err());
    }

    #[test]
    fn clipping_boundary() {
        assert_eq!(tol::clip_radicand(-5e-11, 1.0), Some(0.0));
        assert_eq!(tol::clip_radicand(-1e-9, 1.0), None);
        // pure symmetric two-mode state sits on the branch point Δ² = 4 det
        let (lo, hi) = two_mode_eigenvalues(2.0 + 1e-14, 1.0).unwrap();
        assert!((lo - 1.0).abs() < 1e-7 && (hi - 1.0).abs() < 1e-7);
        assert!(two_mode_eigenvalues(1.0, 1.0).is_err());
    }

    #[test]
    fn clustering() {
        let s = SymplecticSpectrum::from_values(vec![1.0, 2.0, 1.0 + 1e-9, 2.0 - 1e-9, 5.0]);
        assert_eq!(s.values[0], 5.0);
        let mult: Vec<usize> = s.clusters.iter().map(|c| c.1).collect();
        assert_eq!(mult, vec![1, 2, 2]);
    }
}
