#![allow(dead_code)]

use fusionframe::{DMatrix, Field, FrameConfig, OperatorFrame, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<T: Scalar>(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| T::sample_gaussian(rng))
}

/// Haar-ish unitary from the QR factor of a Gaussian matrix.
pub fn random_unitary<T: Scalar>(k: usize, rng: &mut ChaCha8Rng) -> DMatrix<T> {
    gaussian::<T>(k, k, rng).qr().q()
}

pub fn e1e1e2() -> OperatorFrame<f64> {
    OperatorFrame::from_vectors(&DMatrix::from_row_slice(
        3,
        2,
        &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0],
    ))
    .unwrap()
}

/// `copies` orthonormal bases of the field, each cut into consecutive
/// blocks of the given ranks and rotated by its own unitary.
pub fn orthonormal_sum_tff<T: Scalar>(
    d: usize,
    cuts: &[usize],
    copies: usize,
    rng: &mut ChaCha8Rng,
) -> OperatorFrame<T> {
    assert_eq!(cuts.iter().sum::<usize>(), d);
    let mut blocks = Vec::new();
    for _ in 0..copies {
        let v = random_unitary::<T>(d, rng);
        let mut row = 0;
        for &k in cuts {
            blocks.push(v.rows(row, k).into_owned());
            row += k;
        }
    }
    let frame = OperatorFrame::new(d, blocks).unwrap();
    let left: Vec<_> = frame
        .ranks()
        .iter()
        .map(|&k| random_unitary::<T>(k, rng))
        .collect();
    frame.transformed(&left, &DMatrix::identity(d, d)).unwrap()
}

/// `m` equiangular unit vectors in the plane, rotated into a random
/// orientation when `d = 2`.
pub fn mercedes_benz<T: Scalar>(m: usize, rng: &mut ChaCha8Rng) -> OperatorFrame<T> {
    let phase = rng.random::<f64>() * std::f64::consts::PI;
    let vectors = DMatrix::from_fn(m, 2, |j, c| {
        let theta = phase + std::f64::consts::PI * j as f64 / m as f64;
        T::from_real(if c == 0 { theta.cos() } else { theta.sin() })
    });
    let frame = OperatorFrame::from_vectors(&vectors).unwrap();
    let v = random_unitary::<T>(2, rng);
    let left: Vec<_> = (0..m).map(|_| random_unitary::<T>(1, rng)).collect();
    frame.transformed(&left, &v).unwrap()
}

pub fn assorted_configs() -> Vec<FrameConfig> {
    let shapes: &[(usize, &[usize])] = &[
        (2, &[1, 1]),
        (2, &[1, 1, 1]),
        (2, &[1, 2, 1]),
        (3, &[1, 1, 2]),
        (3, &[2, 2]),
        (3, &[1, 1, 1, 1]),
        (4, &[2, 2, 2]),
        (4, &[1, 3, 2]),
        (4, &[3, 3]),
    ];
    let mut out = Vec::new();
    for field in [Field::Real, Field::Complex] {
        for &(d, ranks) in shapes {
            out.push(FrameConfig::new(field, d, ranks.to_vec()).unwrap());
        }
    }
    out
}

pub fn max_abs_diff<T: Scalar>(a: &[DMatrix<T>], b: &[DMatrix<T>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
