mod common;

use common::*;
use fusionframe::admissibility::{
    admissibility, majorizes, realize_classical_frame, tff_necessary_check, Admissibility,
    RealizeSettings,
};
use fusionframe::linalg::eigh;
use fusionframe::{frame_operator, Complex64, Field, FrameConfig, SpectralData};
use proptest::prelude::*;

fn positive_list(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01..10.0f64, len)
}

proptest! {
    #[test]
    fn majorization_is_reflexive(x in positive_list(1..8)) {
        prop_assert!(majorizes(&x, &x, 1e-9).unwrap());
    }

    #[test]
    fn majorization_is_antisymmetric(a in positive_list(2..7), b_raw in positive_list(2..7)) {
        let len = a.len().min(b_raw.len());
        let a = &a[..len];
        let scale = a.iter().sum::<f64>() / b_raw[..len].iter().sum::<f64>();
        let b: Vec<f64> = b_raw[..len].iter().map(|x| x * scale).collect();
        if majorizes(a, &b, 1e-9).unwrap() && majorizes(&b, a, 1e-9).unwrap() {
            let mut sa = a.to_vec();
            let mut sb = b.clone();
            sa.sort_by(|x, y| y.total_cmp(x));
            sb.sort_by(|x, y| y.total_cmp(x));
            for (x, y) in sa.iter().zip(&sb) {
                prop_assert!((x - y).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn flat_spectrum_is_majorized_by_everything(x in positive_list(1..8)) {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        prop_assert!(majorizes(&x, &vec![mean; x.len()], 1e-9).unwrap());
    }

    #[test]
    fn frame_spectra_majorize_norms(seed in any::<u64>(), d in 2usize..5, extra in 0usize..4) {
        // Schur–Horn: eigenvalues of Σ f_j f_j* majorize the squared norms.
        let mut r = rng(seed);
        let vectors = gaussian::<Complex64>(d + extra, d, &mut r);
        let norms: Vec<f64> = (0..d + extra).map(|j| vectors.row(j).norm_squared()).collect();
        let s = vectors.adjoint() * &vectors;
        prop_assert!(majorizes(&eigh(&s).values, &norms, 1e-9).unwrap());
    }
}

#[test]
fn known_majorization_instances() {
    assert!(majorizes(&[5.0, 5.0], &[3.0, 3.0, 3.0, 1.0], 0.0).unwrap());
    for (big_n, d) in [(4, 2), (5, 3), (7, 4)] {
        let lambda = vec![big_n as f64 / d as f64; d];
        assert!(majorizes(&lambda, &vec![1.0; big_n], 1e-12).unwrap());
    }
    assert!(!majorizes(&[5.0, 5.0], &[3.0, 3.0, 3.0, 2.0], 1e-9).unwrap());
    assert!(!majorizes(&[2.0, 2.0], &[3.0, 1.0, 0.5], 1e-9).unwrap());
    assert!(!majorizes(&[2.0, 1.0], &[3.0], 1e-9).unwrap());
}

#[test]
fn admissibility_verdicts() {
    let classical = SpectralData::fusion(&[1, 1, 1], vec![2.0, 1.0]).unwrap();
    assert_eq!(admissibility(&classical, 1e-9), Admissibility::Admissible);
    let mismatch = SpectralData::fusion(&[1, 1], vec![2.0, 1.0]).unwrap();
    assert!(matches!(
        admissibility(&mismatch, 1e-9),
        Admissibility::NotAdmissible { .. }
    ));
    let bad_profile = SpectralData::new(vec![vec![2.5], vec![0.5]], vec![1.5, 1.5]).unwrap();
    assert!(matches!(
        admissibility(&bad_profile, 1e-9),
        Admissibility::NotAdmissible { .. }
    ));
    let fusion = SpectralData::fusion(&[2, 2, 2], vec![1.5; 4]).unwrap();
    assert!(matches!(
        admissibility(&fusion, 1e-9),
        Admissibility::Undecided { .. }
    ));
}

#[test]
fn tff_checks() {
    let classical = FrameConfig::new(Field::Real, 3, vec![1; 5]).unwrap();
    assert_eq!(tff_necessary_check(&classical).tff_exists, Some(true));
    let thin = FrameConfig::new(Field::Real, 4, vec![1, 2]).unwrap();
    assert_eq!(tff_necessary_check(&thin).tff_exists, Some(false));
    let blocked = FrameConfig::new(Field::Real, 3, vec![1, 1, 2]).unwrap();
    let check = tff_necessary_check(&blocked);
    assert_eq!(check.tff_exists, Some(false));
    assert!((check.trace_value - 4.0 / 3.0).abs() < 1e-15);
    let open = FrameConfig::new(Field::Complex, 4, vec![2, 2, 2]).unwrap();
    let check = tff_necessary_check(&open);
    assert_eq!(check.tff_exists, None);
    assert!(check.note.contains("Littlewood"));
}

#[test]
fn classical_frames_are_realized() {
    let settings = RealizeSettings::default();
    let mut r = rng(99);
    for trial in 0..100u64 {
        let d = 2 + (trial % 3) as usize;
        let big_n = d + (trial % 4) as usize;
        // Spectral data of a random frame is admissible by construction.
        let vectors = gaussian::<Complex64>(big_n, d, &mut r);
        let norms: Vec<f64> = (0..big_n).map(|j| vectors.row(j).norm_squared()).collect();
        let lambda = eigh(&(vectors.adjoint() * &vectors)).values;
        let (frame, residual) = realize_classical_frame(&lambda, &norms, trial, &settings).unwrap();
        assert!(residual <= 1e-6, "trial {trial}: residual {residual:e}");
        let spec = frame_operator(&frame).spectrum();
        for (x, y) in spec.iter().zip(&lambda) {
            assert!((x - y).abs() <= 1e-6);
        }
        for (a, n) in frame.blocks().iter().zip(&norms) {
            assert!((a.norm_squared() - n).abs() <= 1e-9 * n.max(1.0));
        }
    }
}
