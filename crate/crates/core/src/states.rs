//! Constructors for thermal, two-mode squeezed, fully symmetric, GHZ-type and
//! bisymmetric covariance matrices.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::{symplectic_eigenvalues, CovarianceMatrix};
use crate::tol;

/// `diag(ν₁, ν₁, …, ν_N, ν_N)`.
pub fn thermal_cm(nus: &[f64]) -> Result<CovarianceMatrix> {
    if nus.is_empty() {
        return Err(Error::invalid("thermal state needs at least one mode"));
    }
    if let Some(&bad) = nus.iter().find(|&&v| !(v >= 1.0) || !v.is_finite()) {
        return Err(Error::invalid(format!("thermal eigenvalue {bad} is below 1")));
    }
    let diag: Vec<f64> = nus.iter().flat_map(|&v| [v, v]).collect();
    CovarianceMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(diag)))
}

/// Two-mode squeezed vacuum: `A = B = cosh 2r · I`, `C = sinh 2r · diag(1, −1)`.
pub fn two_mode_squeezed(r: f64) -> Result<CovarianceMatrix> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("squeezing r = {r} must be finite and non-negative")));
    }
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    #[rustfmt::skip]
    let entries = [
        c, 0.0, s, 0.0,
        0.0, c, 0.0, -s,
        s, 0.0, c, 0.0,
        0.0, -s, 0.0, c,
    ];
    CovarianceMatrix::from_row_major(2, &entries)
}

/// Fully symmetric `n`-mode state in standard form: every diagonal block is
/// `b·I`, every off-diagonal block `diag(z1, z2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FullySymmetricSpec {
    pub modes: usize,
    pub b: f64,
    pub z1: f64,
    pub z2: f64,
}

impl FullySymmetricSpec {
    pub fn new(modes: usize, b: f64, z1: f64, z2: f64) -> Result<Self> {
        let spec = Self { modes, b, z1, z2 };
        spec.validate()?;
        Ok(spec)
    }

    /// Squared eigenvalues `((b−z1)(b−z2), (b+(n−1)z1)(b+(n−1)z2))`.
    pub fn squared_eigenvalues(&self) -> (f64, f64) {
        let k = self.modes as f64 - 1.0;
        (
            (self.b - self.z1) * (self.b - self.z2),
            (self.b + k * self.z1) * (self.b + k * self.z2),
        )
    }

    /// Positive definiteness and `ν± ≥ 1 − tol::PHYS`.
    pub fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(Error::invalid("fully symmetric state needs at least one mode"));
        }
        if ![self.b, self.z1, self.z2].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("fully symmetric parameters must be finite"));
        }
        let k = self.modes as f64 - 1.0;
        let mut eigen = vec![self.b + k * self.z1, self.b + k * self.z2];
        if self.modes > 1 {
            eigen.extend([self.b - self.z1, self.b - self.z2]);
        }
        if let Some(&bad) = eigen.iter().find(|&&l| !(l > 0.0)) {
            return Err(Error::Unphysical { quantity: "covariance eigenvalue", value: bad });
        }
        let (minus_sq, plus_sq) = self.squared_eigenvalues();
        let plus = plus_sq.sqrt();
        if plus < 1.0 - tol::PHYS {
            return Err(Error::Unphysical { quantity: "nu_plus", value: plus });
        }
        if self.modes > 1 {
            let minus = minus_sq.sqrt();
            if minus < 1.0 - tol::PHYS {
                return Err(Error::Unphysical { quantity: "nu_minus", value: minus });
            }
        }
        Ok(())
    }

    /// The same pattern on `modes` modes, as left by tracing out the rest.
    pub fn reduced(&self, modes: usize) -> Result<Self> {
        if modes == 0 || modes > self.modes {
            return Err(Error::invalid(format!(
                "cannot reduce a {}-mode state to {modes} modes",
                self.modes
            )));
        }
        Ok(Self { modes, ..*self })
    }
}

fn fill_symmetric_pattern(mat: &mut DMatrix<f64>, offset: usize, modes: usize, diag: f64, off: (f64, f64)) {
    for i in 0..modes {
        for j in 0..modes {
            let (r, c) = (2 * (offset + i), 2 * (offset + j));
            if i == j {
                mat[(r, c)] = diag;
                mat[(r + 1, c + 1)] = diag;
            } else {
                mat[(r, c)] = off.0;
                mat[(r + 1, c + 1)] = off.1;
            }
        }
    }
}

pub fn fully_symmetric_cm(spec: &FullySymmetricSpec) -> Result<CovarianceMatrix> {
    spec.validate()?;
    let dim = 2 * spec.modes;
    let mut mat = DMatrix::zeros(dim, dim);
    fill_symmetric_pattern(&mut mat, 0, spec.modes, spec.b, (spec.z1, spec.z2));
    Ok(CovarianceMatrix::from_symmetric_unchecked(mat))
}

/// Recover `(b, z1, z2)` from the single-mode purity `μ_β`, the two-mode
/// purity `μ_{β²}` and the two-mode `Δ₂`.
///
/// The map is exact on the branch `z2 ≥ |z1|`.
pub fn fs_params_from_invariants(mu_beta: f64, mu_beta2: f64, delta2: f64) -> Result<(f64, f64, f64)> {
    for (name, v) in [("mu_beta", mu_beta), ("mu_beta2", mu_beta2)] {
        if !(v > 0.0 && v <= 1.0 + tol::PHYS) {
            return Err(Error::invalid(format!("{name} = {v} is not in (0, 1]")));
        }
    }
    if !delta2.is_finite() {
        return Err(Error::invalid("delta2 must be finite"));
    }
    let det2 = 1.0 / (mu_beta2 * mu_beta2);
    let local = 4.0 / (mu_beta * mu_beta);
    let eps_minus_sq = tol::clip_radicand(delta2 * delta2 - 4.0 * det2, delta2 * delta2).ok_or_else(|| {
        Error::InconsistentInvariants(format!(
            "Δ₂² − 4/μ_β²² = {:.6e} is negative",
            delta2 * delta2 - 4.0 * det2
        ))
    })?;
    let shifted = delta2 - local;
    let eps_plus_sq = tol::clip_radicand(shifted * shifted - 4.0 * det2, shifted * shifted).ok_or_else(|| {
        Error::InconsistentInvariants(format!(
            "(Δ₂ − 4/μ_β²)² − 4/μ_β²² = {:.6e} is negative",
            shifted * shifted - 4.0 * det2
        ))
    })?;
    let (em, ep) = (eps_minus_sq.sqrt(), eps_plus_sq.sqrt());
    Ok((1.0 / mu_beta, mu_beta * (em - ep) / 4.0, mu_beta * (em + ep) / 4.0))
}

/// Fully symmetric pure state on `total_modes` modes with local diagonal `b`.
///
/// The two off-diagonal correlations are the roots
/// `[(b²−1)(M−2) ∓ √((b²−1)((bM)² − (M−2)²))] / (2b(M−1))`, assigned so that
/// `z2 ≥ z1`.
pub fn ghz_type_spec(total_modes: usize, b: f64) -> Result<FullySymmetricSpec> {
    if total_modes < 2 {
        return Err(Error::invalid(format!("GHZ-type state needs at least 2 modes, got {total_modes}")));
    }
    if !(b >= 1.0) || !b.is_finite() {
        return Err(Error::invalid(format!("b = {b} must be finite and at least 1")));
    }
    let m = total_modes as f64;
    let a = 1.0 + b * b * (m - 2.0) - (m - 1.0);
    let r = ((b * b - 1.0) * ((b * m).powi(2) - (m - 2.0).powi(2))).max(0.0).sqrt();
    let d = 2.0 * b * (m - 1.0);
    let spec = FullySymmetricSpec { modes: total_modes, b, z1: (a - r) / d, z2: (a + r) / d };
    spec.validate()?;
    Ok(spec)
}

pub fn ghz_type_pure(total_modes: usize, b: f64) -> Result<CovarianceMatrix> {
    fully_symmetric_cm(&ghz_type_spec(total_modes, b)?)
}

/// Bisymmetric `(m + n)`-mode state in standard form: a fully symmetric
/// `(a, e1, e2)` block on the first `m` modes, a fully symmetric `(b, z1, z2)`
/// block on the last `n`, and every cross block equal to `diag(g1, g2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BisymmetricSpec {
    pub m: usize,
    pub n: usize,
    pub a: f64,
    pub e1: f64,
    pub e2: f64,
    pub b: f64,
    pub z1: f64,
    pub z2: f64,
    pub g1: f64,
    pub g2: f64,
}

impl BisymmetricSpec {
    /// A fully symmetric state read under the `k × (modes − k)` split.
    pub fn from_fully_symmetric(spec: &FullySymmetricSpec, k: usize) -> Result<Self> {
        if k == 0 || k >= spec.modes {
            return Err(Error::invalid(format!(
                "block size k = {k} must lie in 1..={} for a {}-mode state",
                spec.modes.saturating_sub(1),
                spec.modes
            )));
        }
        Ok(Self {
            m: k,
            n: spec.modes - k,
            a: spec.b,
            e1: spec.z1,
            e2: spec.z2,
            b: spec.b,
            z1: spec.z1,
            z2: spec.z2,
            g1: spec.z1,
            g2: spec.z2,
        })
    }

    pub fn modes(&self) -> usize {
        self.m + self.n
    }

    pub fn alpha(&self) -> FullySymmetricSpec {
        FullySymmetricSpec { modes: self.m, b: self.a, z1: self.e1, z2: self.e2 }
    }

    pub fn beta(&self) -> FullySymmetricSpec {
        FullySymmetricSpec { modes: self.n, b: self.b, z1: self.z1, z2: self.z2 }
    }

    /// Structural checks plus physicality of both reduced blocks. The
    /// assembled state is checked by [`bisymmetric_cm`].
    pub fn validate_blocks(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::invalid("both blocks of a bisymmetric state need at least one mode"));
        }
        if ![self.g1, self.g2].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("cross correlations must be finite"));
        }
        self.alpha().validate()?;
        self.beta().validate()
    }

    pub(crate) fn assemble(&self) -> CovarianceMatrix {
        let dim = 2 * self.modes();
        let mut mat = DMatrix::zeros(dim, dim);
        fill_symmetric_pattern(&mut mat, 0, self.m, self.a, (self.e1, self.e2));
        fill_symmetric_pattern(&mut mat, self.m, self.n, self.b, (self.z1, self.z2));
        for i in 0..self.m {
            for j in self.m..self.modes() {
                for (r, c) in [(2 * i, 2 * j), (2 * j, 2 * i)] {
                    mat[(r, c)] = self.g1;
                    mat[(r + 1, c + 1)] = self.g2;
                }
            }
        }
        CovarianceMatrix::from_symmetric_unchecked(mat)
    }
}

/// Assemble and check a bisymmetric state. Fails with the smallest symplectic
/// eigenvalue when the result is not bona fide.
pub fn bisymmetric_cm(spec: &BisymmetricSpec) -> Result<CovarianceMatrix> {
    spec.validate_blocks()?;
    let cm = spec.assemble();
    if let Some(bad) = cm.matrix().clone().symmetric_eigenvalues().iter().copied().find(|&l| !(l > 0.0)) {
        return Err(Error::Unphysical { quantity: "covariance eigenvalue", value: bad });
    }
    let min = symplectic_eigenvalues(&cm)?.min();
    if min < 1.0 - tol::PHYS {
        return Err(Error::Unphysical { quantity: "min symplectic eigenvalue", value: min });
    }
    Ok(cm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{delta_invariant, partial_trace, purity};

    #[test]
    fn thermal_layout() {
        assert_eq!(thermal_cm(&[1.0]).unwrap(), CovarianceMatrix::vacuum(1));
        let t = thermal_cm(&[2.0, 3.0]).unwrap();
        assert_eq!(t.matrix().diagonal().as_slice(), &[2.0, 2.0, 3.0, 3.0]);
        assert!((purity(&thermal_cm(&[4.0]).unwrap()).unwrap() - 0.25).abs() < 1e-15);
        assert!(thermal_cm(&[0.9]).is_err());
        assert!(thermal_cm(&[]).is_err());
    }

    #[test]
    fn tmsv_basics() {
        assert_eq!(two_mode_squeezed(0.0).unwrap(), CovarianceMatrix::vacuum(2));
        for r in [0.1, 0.5, 1.0, 2.0] {
            let p = purity(&two_mode_squeezed(r).unwrap()).unwrap();
            assert!((p - 1.0).abs() < 1e-10);
        }
        let reduced = partial_trace(&two_mode_squeezed(0.7).unwrap(), &[0]).unwrap();
        assert!((reduced.matrix()[(0, 0)] - 1.4_f64.cosh()).abs() < 1e-15);
        assert!(two_mode_squeezed(-0.1).is_err());
    }

    #[test]
    fn fully_symmetric_thermal_limit_and_permutation() {
        let cm = fully_symmetric_cm(&FullySymmetricSpec::new(3, 2.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(cm, thermal_cm(&[2.0, 2.0, 2.0]).unwrap());
        let cm = fully_symmetric_cm(&FullySymmetricSpec::new(4, 1.5, 0.4, -0.3).unwrap()).unwrap();
        assert_eq!(cm.permute_modes(&[2, 0, 3, 1]).unwrap(), cm);
    }

    #[test]
    fn unphysical_spec_carries_eigenvalue() {
        match FullySymmetricSpec::new(3, 1.0, 0.5, 0.5) {
            Err(Error::Unphysical { value, .. }) => assert!((value - 0.5).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(FullySymmetricSpec::new(2, 1.0, 3.0, 3.0), Err(Error::Unphysical { .. })));
    }

    #[test]
    fn ghz_boundaries() {
        let s = ghz_type_spec(6, 1.0).unwrap();
        assert_eq!((s.z1, s.z2), (0.0, 0.0));
        assert!(ghz_type_spec(1, 1.5).is_err());
        assert!(ghz_type_spec(4, 0.99).is_err());
        let s = ghz_type_spec(8, 1.7).unwrap();
        assert!(s.z2 >= s.z1.abs());
    }

    #[test]
    fn ghz_reduction_keeps_pattern() {
        let parent = ghz_type_spec(12, 1.5).unwrap();
        let full = fully_symmetric_cm(&parent).unwrap();
        let kept: Vec<usize> = (0..8).collect();
        let traced = partial_trace(&full, &kept).unwrap();
        assert_eq!(traced, fully_symmetric_cm(&parent.reduced(8).unwrap()).unwrap());
    }

    #[test]
    fn params_from_invariants_vacuum_and_round_trip() {
        let (b, z1, z2) = fs_params_from_invariants(1.0, 1.0, 2.0).unwrap();
        assert_eq!((b, z1, z2), (1.0, 0.0, 0.0));
        let spec = ghz_type_spec(6, 1.8).unwrap();
        let two = fully_symmetric_cm(&spec.reduced(2).unwrap()).unwrap();
        let mu2 = purity(&two).unwrap();
        let (b, z1, z2) = fs_params_from_invariants(1.0 / spec.b, mu2, delta_invariant(&two)).unwrap();
        assert!((b - spec.b).abs() < 1e-12);
        assert!((z1 - spec.z1).abs() < 1e-8 && (z2 - spec.z2).abs() < 1e-8);
        assert!(matches!(
            fs_params_from_invariants(0.5, 0.5, 0.1),
            Err(Error::InconsistentInvariants(_))
        ));
        assert!(fs_params_from_invariants(1.5, 0.5, 3.0).is_err());
    }

    #[test]
    fn bisymmetric_reduces_to_fully_symmetric() {
        let fs = FullySymmetricSpec::new(6, 1.6, 0.3, 0.1).unwrap();
        let bi = BisymmetricSpec::from_fully_symmetric(&fs, 3).unwrap();
        assert_eq!(bisymmetric_cm(&bi).unwrap(), fully_symmetric_cm(&fs).unwrap());
        assert!(BisymmetricSpec::from_fully_symmetric(&fs, 6).is_err());
        assert!(BisymmetricSpec::from_fully_symmetric(&fs, 0).is_err());
    }

    #[test]
    fn bisymmetric_product_and_rejection() {
        let spec = BisymmetricSpec { m: 2, n: 3, a: 2.0, e1: 0.3, e2: 0.1, b: 1.5, z1: 0.2, z2: -0.1, g1: 0.0, g2: 0.0 };
        let cm = bisymmetric_cm(&spec).unwrap();
        assert_eq!(cm.block(0, 3), nalgebra::Matrix2::zeros());
        let bad = BisymmetricSpec { g1: 2.0, g2: 2.0, ..spec };
        assert!(matches!(bisymmetric_cm(&bad), Err(Error::Unphysical { .. })));
    }
}
