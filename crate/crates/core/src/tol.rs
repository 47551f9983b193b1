//! Default numerical tolerances.
//!
//! Absolute tolerances are quoted for unit-scaled matrices; the helpers below
//! scale them by the magnitude of the data they are applied to, since
//! covariance entries grow like `e^{2r}` with squeezing.

/// Symmetry check on covariance matrices.
pub const SYM: f64 = 1e-9;
/// `SᵀΩS = Ω` check.
pub const SYMPLECTIC: f64 = 1e-9;
/// Lower slack on symplectic eigenvalues for the bona fide test.
pub const PHYS: f64 = 1e-9;
/// Williamson reconstruction residual, relative to `‖σ‖_max`.
pub const RECON: f64 = 1e-8;
/// Relative width of a degeneracy cluster in a symplectic spectrum.
pub const CLUSTER: f64 = 1e-7;
/// Negative radicands above `-RADICAND_CLIP` (times the scale of the terms)
/// are treated as zero.
pub const RADICAND_CLIP: f64 = 1e-10;
/// Bisymmetric pattern detection, relative to `‖σ‖_max`.
pub const PATTERN: f64 = 1e-8;
/// Off-skeleton residual allowed after localization, relative to `‖σ‖_max`.
pub const LOCAL: f64 = 1e-8;
/// Relative tolerance of the symmetric-equivalent-state condition.
pub const SYMMETRIC_CONDITION: f64 = 1e-8;
/// PT eigenvalues in `(1, 1 + PT_CLAMP]` are clamped to one.
pub const PT_CLAMP: f64 = 1e-10;
/// Separability decision slack on the smallest PT symplectic eigenvalue.
pub const SEPARABLE: f64 = 1e-9;

/// `max(1, magnitude)`, the scale factor applied to absolute tolerances.
pub fn scale(magnitude: f64) -> f64 {
    magnitude.abs().max(1.0)
}

/// Clip a radicand that is negative only through rounding.
///
/// `magnitude` is the size of the terms whose difference produced `value`.
pub fn clip_radicand(value: f64, magnitude: f64) -> Option<f64> {
    if value >= 0.0 {
        Some(value)
    } else if value >= -RADICAND_CLIP * scale(magnitude) {
        Some(0.0)
    } else {
        None
    }
}

/// Relative closeness, falling back to absolute near zero.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}
