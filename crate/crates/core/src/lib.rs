//! Entanglement of multimode Gaussian states from their covariance matrices.
//!
//! The crate covers symplectic spectra and the Williamson normal form,
//! state constructors for fully symmetric and bisymmetric families,
//! partial-transpose entanglement measures, and the reduction of a
//! bisymmetric state by local symplectic maps to a single correlated
//! two-mode pair plus uncorrelated single-mode states.
//!
//! Mode indices are 0-based throughout the library.
//!
//! ```
//! use unilocal::{fully_symmetric_cm, ghz_type_spec, localize, log_negativity, ModeBipartition};
//!
//! # fn main() -> unilocal::Result<()> {
//! let spec = ghz_type_spec(6, 1.5)?;
//! let cm = fully_symmetric_cm(&spec)?;
//! let report = log_negativity(&cm, &ModeBipartition::split(3, 3)?)?;
//! let loc = localize(&cm, 3, 3)?;
//! assert!((loc.equivalent.report()?.log_negativity - report.log_negativity).abs() < 1e-9);
//! # Ok(())
//! # }
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod io;
pub mod localization;
pub mod measures;
pub mod oracle;
pub mod states;
pub mod symplectic;
pub mod tol;

pub use error::{Error, ErrorKind, Result};
pub use localization::{
    block_log_negativity, equivalent_two_mode_invariants, fs_block_spectrum, localize,
    optimal_localizable_entanglement, BlockSpectrum, EquivalentTwoMode, LocalizationResult,
};
pub use measures::{eof_symmetric, log_negativity, partial_transpose, pt_spectrum, EntanglementReport, ModeBipartition};
pub use states::{
    bisymmetric_cm, fully_symmetric_cm, ghz_type_pure, ghz_type_spec, thermal_cm, two_mode_squeezed,
    BisymmetricSpec, FullySymmetricSpec,
};
pub use symplectic::{
    apply_symplectic, delta_invariant, determinant, is_bona_fide, is_symplectic, partial_trace, purity,
    symplectic_eigenvalues, symplectic_form, two_mode_eigenvalues, two_mode_invariants, williamson,
    CovarianceMatrix, SymplecticForm, SymplecticMatrix, SymplecticSpectrum, TwoModeInvariants,
};
