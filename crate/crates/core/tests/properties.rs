use proptest::prelude::*;
use unilocal::localization::{block_log_negativity, equivalent_two_mode_invariants, fs_block_spectrum, localize};
use unilocal::measures::{eof_symmetric, log_negativity, pt_spectrum, ModeBipartition};
use unilocal::oracle::{oracle_pt_log_negativity, StateSampler};
use unilocal::states::{
    bisymmetric_cm, fs_params_from_invariants, fully_symmetric_cm, ghz_type_pure, ghz_type_spec, BisymmetricSpec,
    FullySymmetricSpec,
};
use unilocal::symplectic::{
    apply_symplectic, delta_invariant, determinant, is_symplectic, partial_trace, purity, symplectic_eigenvalues,
    two_mode_invariants, williamson, CovarianceMatrix,
};

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn max_diff(a: &CovarianceMatrix, b: &CovarianceMatrix) -> f64 {
    (a.matrix() - b.matrix()).amax()
}

fn random_cm(seed: u64, modes: usize) -> CovarianceMatrix {
    StateSampler::new(seed).bona_fide_cm(modes, 2.0, 0.8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn williamson_round_trip(seed in any::<u64>(), modes in 1usize..7) {
        let cm = random_cm(seed, modes);
        let (s, spec) = williamson(&cm).unwrap();
        prop_assert!(is_symplectic(s.matrix(), 1e-8));
        let nu: Vec<f64> = spec.values.iter().flat_map(|&v| [v, v]).collect();
        let diag = CovarianceMatrix::new(nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(nu))).unwrap();
        let back = apply_symplectic(&s, &diag).unwrap();
        prop_assert!(max_diff(&back, &cm) <= 1e-8 * cm.max_abs().max(1.0));
    }

    #[test]
    fn spectrum_and_invariants_survive_symplectics(seed in any::<u64>(), modes in 1usize..6) {
        let mut sampler = StateSampler::new(seed);
        let cm = sampler.bona_fide_cm(modes, 2.0, 0.5);
        let s = sampler.symplectic(modes, 0.5);
        let moved = apply_symplectic(&s, &cm).unwrap();
        let (a, b) = (symplectic_eigenvalues(&cm).unwrap(), symplectic_eigenvalues(&moved).unwrap());
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!(close(*x, *y, 1e-8), "{x} vs {y}");
        }
        prop_assert!(close(determinant(&cm), determinant(&moved), 1e-8));
        prop_assert!(close(delta_invariant(&cm), delta_invariant(&moved), 1e-8));
    }

    #[test]
    fn purity_is_product_of_inverse_spectrum(seed in any::<u64>(), modes in 1usize..7) {
        let cm = random_cm(seed, modes);
        let spec = symplectic_eigenvalues(&cm).unwrap();
        let product: f64 = spec.values.iter().map(|v| 1.0 / v).product();
        prop_assert!(close(purity(&cm).unwrap(), product, 1e-9));
    }

    #[test]
    fn two_mode_closed_form_matches_spectrum(seed in any::<u64>()) {
        let cm = random_cm(seed, 2);
        let inv = two_mode_invariants(&cm).unwrap();
        let (lo, hi) = inv.symplectic_eigenvalues().unwrap();
        let spec = symplectic_eigenvalues(&cm).unwrap();
        prop_assert!(close(hi, spec.values[0], 1e-9) && close(lo, spec.values[1], 1e-9));
        let part = ModeBipartition::split(1, 1).unwrap();
        let (plo, phi) = inv.pt_symplectic_eigenvalues().unwrap();
        let pt = pt_spectrum(&cm, &part).unwrap();
        prop_assert!(close(phi, pt.values[0], 1e-9) && close(plo, pt.values[1], 1e-9));
    }

    #[test]
    fn log_negativity_ignores_transposed_side(seed in any::<u64>(), m in 1usize..4, n in 1usize..4) {
        let cm = random_cm(seed, m + n);
        let part = ModeBipartition::split(m, n).unwrap();
        let a = pt_spectrum(&cm, &part).unwrap();
        let b = pt_spectrum(&cm, &part.flipped()).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!(close(*x, *y, 1e-9));
        }
    }

    #[test]
    fn log_negativity_invariant_under_local_symplectics(seed in any::<u64>()) {
        let mut sampler = StateSampler::new(seed);
        let spec = sampler.bisymmetric_entangled(3);
        let cm = bisymmetric_cm(&spec).unwrap();
        let part = ModeBipartition::split(spec.m, spec.n).unwrap();
        let local = sampler.local_symplectic(spec.m, spec.n, 0.5);
        let moved = apply_symplectic(&local, &cm).unwrap();
        let before = oracle_pt_log_negativity(&cm, &part).unwrap();
        let after = oracle_pt_log_negativity(&moved, &part).unwrap();
        prop_assert!((before - after).abs() <= 1e-8 * before.max(1.0));
    }

    #[test]
    fn fully_symmetric_states_ignore_mode_order(seed in any::<u64>(), order in Just((0..8).collect::<Vec<usize>>()).prop_shuffle()) {
        let spec = StateSampler::new(seed).fully_symmetric(8);
        let cm = fully_symmetric_cm(&spec).unwrap();
        let perm: Vec<usize> = order.into_iter().filter(|&i| i < spec.modes).collect();
        let permuted = cm.permute_modes(&perm).unwrap();
        prop_assert!(max_diff(&permuted, &cm) <= 1e-14);
    }

    #[test]
    fn ghz_partial_traces_keep_the_pattern((total, keep) in (2usize..14).prop_flat_map(|t| (Just(t), 1..=t)), b in 1.0f64..4.0) {
        let spec = ghz_type_spec(total, b).unwrap();
        let full = ghz_type_pure(total, b).unwrap();
        let kept: Vec<usize> = (0..keep).collect();
        let reduced = partial_trace(&full, &kept).unwrap();
        let direct = fully_symmetric_cm(&spec.reduced(keep).unwrap()).unwrap();
        prop_assert!(max_diff(&reduced, &direct) <= 1e-12 * b * b);
    }

    #[test]
    fn balanced_bisymmetric_with_shared_blocks_is_fully_symmetric(seed in any::<u64>(), m in 1usize..5) {
        let spec = StateSampler::new(seed).fully_symmetric(8);
        let parent = FullySymmetricSpec::new(2 * m, spec.b, spec.z1, spec.z2);
        prop_assume!(parent.as_ref().map(|p| p.validate().is_ok()).unwrap_or(false));
        let parent = parent.unwrap();
        let bisym = BisymmetricSpec::from_fully_symmetric(&parent, m).unwrap();
        let direct = fully_symmetric_cm(&parent).unwrap();
        prop_assert!(max_diff(&bisymmetric_cm(&bisym).unwrap(), &direct) <= 1e-14);
    }

    #[test]
    fn fs_params_round_trip(seed in any::<u64>()) {
        let mut sampler = StateSampler::new(seed);
        let spec = std::iter::repeat_with(|| sampler.fully_symmetric(8))
            .find(|s| s.modes >= 2 && s.z2 >= s.z1.abs())
            .unwrap();
        let one = fully_symmetric_cm(&spec.reduced(1).unwrap()).unwrap();
        let two = fully_symmetric_cm(&spec.reduced(2).unwrap()).unwrap();
        let (b, z1, z2) =
            fs_params_from_invariants(purity(&one).unwrap(), purity(&two).unwrap(), delta_invariant(&two)).unwrap();
        let scale = spec.b;
        prop_assert!((b - spec.b).abs() <= 1e-9 * scale);
        prop_assert!((z1 - spec.z1).abs() <= 1e-6 * scale, "z1 {z1} vs {}", spec.z1);
        prop_assert!((z2 - spec.z2).abs() <= 1e-6 * scale, "z2 {z2} vs {}", spec.z2);
    }

    #[test]
    fn eof_never_exceeds_log_negativity(nu in 0.01f64..1.5) {
        let e_f = eof_symmetric(nu).unwrap();
        let e_n = if nu < 1.0 { -nu.ln() } else { 0.0 };
        prop_assert!(e_f >= 0.0);
        prop_assert!(e_f <= e_n + 1e-12);
    }

    #[test]
    fn equivalent_pair_is_at_least_as_pure(seed in any::<u64>()) {
        let spec = StateSampler::new(seed).bisymmetric(4);
        let cm = bisymmetric_cm(&spec).unwrap();
        let eq = equivalent_two_mode_invariants(&spec).unwrap();
        prop_assert!(eq.mu_eq + 1e-9 >= purity(&cm).unwrap());
    }

    #[test]
    fn localized_spectrum_is_the_union(seed in any::<u64>()) {
        let spec = StateSampler::new(seed).bisymmetric_entangled(4);
        let cm = bisymmetric_cm(&spec).unwrap();
        let loc = localize(&cm, spec.m, spec.n).unwrap();
        let mut expected: Vec<f64> = symplectic_eigenvalues(&loc.equivalent.cm_eq).unwrap().values;
        for (k, block) in [(spec.m, spec.alpha()), (spec.n, spec.beta())] {
            if k > 1 {
                let s = fs_block_spectrum(&block).unwrap();
                expected.extend(std::iter::repeat_n(s.nu_minus, k - 1));
            }
        }
        expected.sort_by(|a, b| b.total_cmp(a));
        let actual = symplectic_eigenvalues(&cm).unwrap().values;
        for (x, y) in actual.iter().zip(&expected) {
            prop_assert!(close(*x, *y, 1e-8), "{actual:?} vs {expected:?}");
        }
    }

    #[test]
    fn block_routes_agree_on_ghz_states(total in 2usize..12, b in 1.0f64..3.0, q in 0usize..5, k in 1usize..6) {
        prop_assume!(k < total);
        let spec = ghz_type_spec(total + q, b).unwrap().reduced(total).unwrap();
        let inv = block_log_negativity(&spec, k).unwrap();
        let cm = fully_symmetric_cm(&spec).unwrap();
        let direct = log_negativity(&cm, &ModeBipartition::split(k, total - k).unwrap()).unwrap();
        prop_assert!((inv.log_negativity - direct.log_negativity).abs() <= 1e-8 * direct.log_negativity.max(1.0));
        prop_assert_eq!(inv.separable, direct.separable);
    }
}
