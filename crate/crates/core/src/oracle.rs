//! Brute-force reference computations.
//!
//! Nothing here calls the closed forms or the library's eigensolvers:
//! spectra come from a hand-written cyclic Jacobi iteration, partial
//! transposition is applied entrywise, and scalar formulas are re-evaluated
//! in arbitrary precision. The module also hosts the seeded generators of
//! random states used by the test suites.

use std::str::FromStr;

use dashu_float::DBig;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::ModeBipartition;
use crate::states::{BisymmetricSpec, FullySymmetricSpec};
use crate::symplectic::{cluster_descending, CovarianceMatrix, SymplecticMatrix};

/// Eigenvalues and eigenvectors (columns) of a symmetric matrix by cyclic
/// Jacobi rotations.
pub fn jacobi_eigen(mat: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = mat.nrows();
    if n != mat.ncols() {
        return Err(Error::invalid("Jacobi needs a square matrix"));
    }
    let mut a = (mat + mat.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * norm {
            let values = (0..n).map(|i| a[(i, i)]).collect();
            return Ok((values, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::domain("Jacobi iteration did not converge"))
}

/// Symplectic spectrum as `√eig(σ^{1/2} Ωᵀ σ Ω σ^{1/2})`, each value
/// reported once, descending.
pub fn oracle_spectrum(cm: &CovarianceMatrix) -> Result<Vec<f64>> {
    let sigma = cm.matrix();
    let n = cm.modes();
    let (vals, vecs) = jacobi_eigen(sigma)?;
    if let Some(&bad) = vals.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::domain(format!("matrix is not positive definite (eigenvalue {bad:.3e})")));
    }
    let roots = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|l| l.sqrt())));
    let half = &vecs * roots * vecs.transpose();
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    let gram = &half * omega.transpose() * sigma * &omega * &half;
    let (mut sq, _) = jacobi_eigen(&gram)?;
    sq.sort_by(|a, b| b.total_cmp(a));
    Ok(sq.chunks(2).map(|p| (0.5 * (p[0] + p[1])).max(0.0).sqrt()).collect())
}

/// `det σ` as the product of Jacobi eigenvalues.
pub fn oracle_determinant(cm: &CovarianceMatrix) -> Result<f64> {
    Ok(jacobi_eigen(cm.matrix())?.0.iter().product())
}

pub fn oracle_purity(cm: &CovarianceMatrix) -> Result<f64> {
    let det = oracle_determinant(cm)?;
    if !(det > 0.0) {
        return Err(Error::domain(format!("determinant {det:.6e} is not positive")));
    }
    Ok(1.0 / det.sqrt())
}

fn mirror(cm: &CovarianceMatrix, side_b: &[usize]) -> CovarianceMatrix {
    let mut sign = vec![1.0; 2 * cm.modes()];
    for &k in side_b {
        sign[2 * k + 1] = -1.0;
    }
    let m = cm.matrix();
    CovarianceMatrix::from_symmetric_unchecked(DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| sign[r] * sign[c] * m[(r, c)]))
}

/// Spectrum of the partially transposed matrix.
pub fn oracle_pt_spectrum(cm: &CovarianceMatrix, part: &ModeBipartition) -> Result<Vec<f64>> {
    part.validate(cm)?;
    oracle_spectrum(&mirror(cm, &part.side_b))
}

/// `Σ −ln ν̃` over PT eigenvalues below one.
pub fn oracle_pt_log_negativity(cm: &CovarianceMatrix, part: &ModeBipartition) -> Result<f64> {
    Ok(oracle_pt_spectrum(cm, part)?.iter().filter(|&&v| v < 1.0).fold(0.0, |acc, v| acc - v.ln()))
}

pub fn oracle_spectrum_multiplicities(cm: &CovarianceMatrix, tol_cluster: f64) -> Result<Vec<(f64, usize)>> {
    let values = oracle_spectrum(cm)?;
    Ok(cluster_descending(&values, tol_cluster))
}

/// `E_N` of the first `k` modes against the rest for `k = 1..=M/2`.
pub fn exhaustive_bipartition_scan(cm: &CovarianceMatrix) -> Result<Vec<(usize, f64)>> {
    let m = cm.modes();
    if !(2..=30).contains(&m) {
        return Err(Error::invalid(format!("scan supports 2..=30 modes, got {m}")));
    }
    (1..=m / 2)
        .map(|k| Ok((k, oracle_pt_log_negativity(cm, &ModeBipartition::split(k, m - k)?)?)))
        .collect()
}

/// Closed-form vs brute-force comparison of one quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub quantity: String,
    pub closed_form: f64,
    pub brute_force: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub pass: bool,
}

impl OracleReport {
    /// Passes when `rel_diff ≤ rel_tol`, or `abs_diff ≤ abs_tol` for values
    /// near zero.
    pub fn compare(quantity: impl Into<String>, closed_form: f64, brute_force: f64, rel_tol: f64, abs_tol: f64) -> Self {
        let abs_diff = (closed_form - brute_force).abs();
        let denom = closed_form.abs().max(brute_force.abs());
        let rel_diff = if denom > 0.0 { abs_diff / denom } else { 0.0 };
        let pass = rel_diff <= rel_tol || abs_diff <= abs_tol;
        Self { quantity: quantity.into(), closed_form, brute_force, abs_diff, rel_diff, pass }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleSummary {
    pub cases: usize,
    pub passes: usize,
    pub worst_rel_diff: f64,
    pub seed: u64,
}

impl OracleSummary {
    pub fn of(reports: &[OracleReport], seed: u64) -> Self {
        Self {
            cases: reports.len(),
            passes: reports.iter().filter(|r| r.pass).count(),
            worst_rel_diff: reports.iter().map(|r| r.rel_diff).fold(0.0, f64::max),
            seed,
        }
    }
}

pub fn reports_to_csv(reports: &[OracleReport]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in reports {
        w.serialize(r).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

const HP_DIGITS: usize = 50;

fn hp(x: f64) -> DBig {
    DBig::from_str(&format!("{x:e}")).expect("finite float parses").with_precision(HP_DIGITS).value()
}

fn hp_to_f64(x: &DBig) -> f64 {
    x.to_string().parse().unwrap_or(f64::NAN)
}

/// `h(x)` evaluated with 50 significant digits.
pub fn hp_eof(x: f64) -> f64 {
    if !(x > 0.0) || x >= 1.0 {
        return 0.0;
    }
    let x = hp(x);
    let one = hp(1.0);
    let four_x = hp(4.0) * &x;
    let tp = (&one + &x) * (&one + &x) / &four_x;
    let tm = (&one - &x) * (&one - &x) / &four_x;
    let h = &tp * tp.ln() - &tm * tm.ln();
    hp_to_f64(&h)
}

/// Relative gap between `ν⁺` from the two-mode identity and from the block
/// closed form, evaluated with 50 significant digits.
pub fn hp_nu_plus_identity_gap(n: usize, b: f64, z1: f64, z2: f64) -> f64 {
    let (nb, bb, z1b, z2b) = (hp(n as f64), hp(b), hp(z1), hp(z2));
    let one = hp(1.0);
    let two = hp(2.0);
    let nm1 = &nb - &one;
    let direct = (&bb + &nm1 * &z1b) * (&bb + &nm1 * &z2b);
    let minus_sq = (&bb - &z1b) * (&bb - &z2b);
    let plus2_sq = (&bb + &z1b) * (&bb + &z2b);
    let local = &bb * &bb;
    let via = -(&nb * (&nb - &two)) * &local + &nm1 / &two * (&nb * &plus2_sq + (&nb - &two) * &minus_sq);
    let diff = hp_to_f64(&(direct.clone() - via)).abs();
    diff / hp_to_f64(&direct).abs().max(f64::MIN_POSITIVE)
}

/// Seeded source of random states. Rejection counts are kept so suites can
/// report how often the sampling boxes produced unphysical candidates.
pub struct StateSampler {
    rng: ChaCha8Rng,
    pub seed: u64,
    pub attempts: usize,
    pub accepted: usize,
}

impl StateSampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), seed, attempts: 0, accepted: 0 }
    }

    pub fn rejection_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            1.0 - self.accepted as f64 / self.attempts as f64
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Product of random squeezers, rotations and beam splitters.
    pub fn symplectic(&mut self, modes: usize, max_squeeze: f64) -> SymplecticMatrix {
        let mut s = SymplecticMatrix::identity(modes);
        for _ in 0..2 {
            for k in 0..modes {
                let rot = SymplecticMatrix::rotation(modes, k, self.rng.random_range(0.0..std::f64::consts::TAU));
                let sq = SymplecticMatrix::squeezer(modes, k, self.rng.random_range(-max_squeeze..=max_squeeze));
                s = s.then(&rot).and_then(|s| s.then(&sq)).expect("same mode count");
            }
            for j in 0..modes {
                for k in j + 1..modes {
                    let bs = SymplecticMatrix::beam_splitter(modes, j, k, self.rng.random_range(0.0..std::f64::consts::PI));
                    s = s.then(&bs).expect("same mode count");
                }
            }
        }
        s
    }

    /// Local symplectic `S_a ⊕ S_b` for a leading `m × n` split.
    pub fn local_symplectic(&mut self, m: usize, n: usize, max_squeeze: f64) -> SymplecticMatrix {
        let a = self.symplectic(m, max_squeeze);
        let b = self.symplectic(n, max_squeeze);
        a.direct_sum(&b)
    }

    /// `Sᵀ diag(ν) S` with `ν_k ∈ [1, 1 + thermal]`.
    pub fn bona_fide_cm(&mut self, modes: usize, thermal: f64, max_squeeze: f64) -> CovarianceMatrix {
        let nus: Vec<f64> = (0..modes).map(|_| 1.0 + self.rng.random_range(0.0..=thermal)).collect();
        let diag = nalgebra::DVector::from_iterator(2 * modes, nus.iter().flat_map(|&v| [v, v]));
        let s = self.symplectic(modes, max_squeeze);
        let m = s.matrix().transpose() * DMatrix::from_diagonal(&diag) * s.matrix();
        CovarianceMatrix::from_symmetric_unchecked((&m + m.transpose()) * 0.5)
    }

    /// Uniform `(b, z1, z2)` in `[1, 3] × [−w, w]²` with `w = 1/max(1, n−1)`,
    /// `n ∈ [2, max_modes]`, until physical.
    pub fn fully_symmetric(&mut self, max_modes: usize) -> FullySymmetricSpec {
        loop {
            self.attempts += 1;
            let modes = self.rng.random_range(2..=max_modes.max(2));
            let w = 1.0 / (modes as f64 - 1.0).max(1.0);
            let b = self.rng.random_range(1.0..=3.0);
            let z1 = self.rng.random_range(-w..=w) * b;
            let z2 = self.rng.random_range(-w..=w) * b;
            if let Ok(spec) = FullySymmetricSpec::new(modes, b, z1, z2) {
                self.accepted += 1;
                return spec;
            }
        }
    }

    /// Random bisymmetric spec with `1 ≤ m, n ≤ max_block`. Block entries
    /// come from fixed boxes, cross entries from the box allowed by
    /// positivity of the collective pair; candidates are kept only when the
    /// assembled matrix is bona fide by the Jacobi spectrum.
    pub fn bisymmetric(&mut self, max_block: usize) -> BisymmetricSpec {
        self.bisymmetric_with(max_block, false)
    }

    /// As [`StateSampler::bisymmetric`], but with cross terms of opposite
    /// sign at 50–100% of the positivity bound. A negative cross
    /// determinant is necessary for entanglement, so most draws are
    /// entangled.
    pub fn bisymmetric_entangled(&mut self, max_block: usize) -> BisymmetricSpec {
        self.bisymmetric_with(max_block, true)
    }

    fn bisymmetric_with(&mut self, max_block: usize, entangled: bool) -> BisymmetricSpec {
        loop {
            self.attempts += 1;
            let m = self.rng.random_range(1..=max_block);
            let n = self.rng.random_range(1..=max_block);
            let a = self.rng.random_range(1.0..=3.0);
            let b = self.rng.random_range(1.0..=3.0);
            let wa = a / (m as f64).max(2.0);
            let wb = b / (n as f64).max(2.0);
            let (e1, e2) = (self.rng.random_range(-wa..=wa), self.rng.random_range(-wa..=wa));
            let (z1, z2) = (self.rng.random_range(-wb..=wb), self.rng.random_range(-wb..=wb));
            // cross terms up to the positivity bound of the collective pair
            let (mf, nf) = (m as f64, n as f64);
            let bound = |e: f64, z: f64| ((a + (mf - 1.0) * e).max(0.0) * (b + (nf - 1.0) * z).max(0.0) / (mf * nf)).sqrt();
            let (w1, w2) = (bound(e1, z1), bound(e2, z2));
            let (g1, g2) = if entangled {
                let sign = if self.rng.random_bool(0.5) { 1.0 } else { -1.0 };
                (
                    sign * w1 * self.rng.random_range(0.5..=1.0),
                    -sign * w2 * self.rng.random_range(0.5..=1.0),
                )
            } else {
                (self.rng.random_range(-w1..=w1), self.rng.random_range(-w2..=w2))
            };
            let spec = BisymmetricSpec {
                m,
                n,
                a,
                e1,
                e2,
                b,
                z1,
                z2,
                g1,
                g2,
            };
            if spec.validate_blocks().is_err() {
                continue;
            }
            let cm = spec.assemble();
            match oracle_spectrum(&cm) {
                Ok(nu) if nu.last().is_some_and(|&v| v >= 1.0 - crate::tol::PHYS) => {
                    self.accepted += 1;
                    return spec;
                }
                _ => continue,
            }
        }
    }

    /// Separable bisymmetric state: a thermal product plus classical
    /// Gaussian displacement noise that is collective within each block.
    pub fn classically_correlated(&mut self, max_block: usize) -> BisymmetricSpec {
        self.attempts += 1;
        self.accepted += 1;
        let m = self.rng.random_range(1..=max_block);
        let n = self.rng.random_range(1..=max_block);
        let (da, db) = (self.rng.random_range(1.0..=2.0), self.rng.random_range(1.0..=2.0));
        let (u, w) = (self.rng.random_range(-1.0..=1.0), self.rng.random_range(-1.0..=1.0));
        let (tx, tp): (f64, f64) = (self.rng.random_range(0.0..=1.5), self.rng.random_range(0.0..=1.5));
        BisymmetricSpec {
            m,
            n,
            // extra local noise on the weaker quadrature keeps a·I on the diagonal
            a: da + u * u * tx.max(tp),
            e1: u * u * tx,
            e2: u * u * tp,
            b: db + w * w * tx.max(tp),
            z1: w * w * tx,
            z2: w * w * tp,
            g1: u * w * tx,
            g2: u * w * tp,
        }
    }
}
