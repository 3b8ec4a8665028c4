//! Frame-theoretic primitives: configurations, operator-valued frames, the
//! frame operator and fusion frame potential, tightness and membership
//! tests, random generation and the unitary indeterminacy of square roots.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{Field, Scalar};

const MAX_DRAWS: usize = 32;

/// Parameters `(𝕂, d, k)` of a frame space. `n = Σ k_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameConfig {
    field: Field,
    d: usize,
    ranks: Vec<usize>,
}

impl FrameConfig {
    pub fn new(field: Field, d: usize, ranks: Vec<usize>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Shape("ambient dimension d must be positive".into()));
        }
        if ranks.is_empty() {
            return Err(Error::Shape("at least one block is required".into()));
        }
        if let Some((i, &k)) = ranks.iter().enumerate().find(|(_, &k)| k == 0 || k > d) {
            return Err(Error::Shape(format!(
                "rank k_{} = {k} must satisfy 1 <= k <= d = {d}",
                i + 1
            )));
        }
        Ok(Self { field, d, ranks })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Number of blocks N.
    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// `n = k_1 + … + k_N`.
    pub fn n(&self) -> usize {
        self.ranks.iter().sum()
    }

    pub fn is_classical(&self) -> bool {
        self.ranks.iter().all(|&k| k == 1)
    }

    pub fn with_field(&self, field: Field) -> Self {
        Self {
            field,
            ..self.clone()
        }
    }
}

/// An N-tuple `(A_1, …, A_N)` of `k_i × d` matrices.
///
/// Construction only checks shapes; fusion-frame membership is a separate
/// question answered by [`is_fusion_frame`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorFrame<T: Scalar> {
    d: usize,
    blocks: Vec<DMatrix<T>>,
}

impl<T: Scalar> OperatorFrame<T> {
    pub fn new(d: usize, blocks: Vec<DMatrix<T>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Shape("ambient dimension d must be positive".into()));
        }
        if blocks.is_empty() {
            return Err(Error::Shape("at least one block is required".into()));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.ncols() != d {
                return Err(Error::Shape(format!(
                    "block {} has {} columns, expected d = {d}",
                    i + 1,
                    b.ncols()
                )));
            }
            if b.nrows() == 0 || b.nrows() > d {
                return Err(Error::Shape(format!(
                    "block {} has {} rows, expected 1..={d}",
                    i + 1,
                    b.nrows()
                )));
            }
            if b.iter()
                .any(|z| !z.to_complex().re.is_finite() || !z.to_complex().im.is_finite())
            {
                return Err(Error::Shape(format!(
                    "block {} has non-finite entries",
                    i + 1
                )));
            }
        }
        Ok(Self { d, blocks })
    }

    /// Builds a classical frame (all `k_i = 1`) from the rows of `vectors`.
    pub fn from_vectors(vectors: &DMatrix<T>) -> Result<Self> {
        let blocks = (0..vectors.nrows())
            .map(|i| vectors.rows(i, 1).into_owned())
            .collect();
        Self::new(vectors.ncols(), blocks)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn n(&self) -> usize {
        self.blocks.iter().map(|b| b.nrows()).sum()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    pub fn config(&self) -> FrameConfig {
        FrameConfig {
            field: T::FIELD,
            d: self.d,
            ranks: self.ranks(),
        }
    }

    pub fn blocks(&self) -> &[DMatrix<T>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &DMatrix<T> {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<DMatrix<T>> {
        self.blocks
    }

    /// `(U_1 A_1 V*, …, U_N A_N V*)`.
    pub fn transformed(&self, left: &[DMatrix<T>], right: &DMatrix<T>) -> Result<Self> {
        if left.len() != self.len() {
            return Err(Error::Shape(format!(
                "{} left unitaries for {} blocks",
                left.len(),
                self.len()
            )));
        }
        let right_adj = right.adjoint();
        let blocks = self
            .blocks
            .iter()
            .zip(left)
            .map(|(a, u)| u * a * &right_adj)
            .collect();
        Self::new(self.d, blocks)
    }

    /// Same frame viewed over ℂ.
    pub fn to_complex(&self) -> OperatorFrame<Complex64> {
        OperatorFrame {
            d: self.d,
            blocks: self
                .blocks
                .iter()
                .map(|b| b.map(|z| z.to_complex()))
                .collect(),
        }
    }

    /// Largest imaginary part over all entries (zero for real frames).
    pub fn max_imaginary(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::max_imaginary)
            .fold(0.0, f64::max)
    }
}

/// A d×d Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator<T: Scalar> {
    matrix: DMatrix<T>,
}

impl<T: Scalar> HermitianOperator<T> {
    /// Accepts `m` when it is square and `max |M - M*| <= tol`; the stored
    /// matrix is the Hermitian part of `m`.
    pub fn new(m: DMatrix<T>, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!(
                "Hermitian operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = linalg::hermitian_defect(&m);
        if defect > tol {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self {
            matrix: linalg::hermitian_part(&m),
        })
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues (decreasing) and unitary eigenvector matrix.
    pub fn eigen(&self) -> linalg::Eigh<T> {
        linalg::eigh(&self.matrix)
    }

    pub fn spectrum(&self) -> Vec<f64> {
        self.eigen().values
    }
}

/// Target spectra: `r_i` for each `P_i` and `λ` for the frame operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    r: Vec<Vec<f64>>,
    lambda: Vec<f64>,
}

fn check_decreasing_positive(xs: &[f64], what: &str) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Shape(format!("{what} is empty")));
    }
    if xs.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::Shape(format!("{what} must be positive and finite")));
    }
    if xs.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Shape(format!("{what} must be sorted decreasing")));
    }
    Ok(())
}

impl SpectralData {
    pub fn new(r: Vec<Vec<f64>>, lambda: Vec<f64>) -> Result<Self> {
        for (i, ri) in r.iter().enumerate() {
            check_decreasing_positive(ri, &format!("r_{}", i + 1))?;
        }
        check_decreasing_positive(&lambda, "lambda")?;
        Ok(Self { r, lambda })
    }

    /// Fusion-frame spectra (`r_i` all ones) with frame-operator target `λ`.
    pub fn fusion(ranks: &[usize], lambda: Vec<f64>) -> Result<Self> {
        Self::new(ranks.iter().map(|&k| vec![1.0; k]).collect(), lambda)
    }

    /// Spectra of a tight fusion frame of the given configuration.
    pub fn tight(config: &FrameConfig) -> Self {
        let level = config.n() as f64 / config.d() as f64;
        Self {
            r: config.ranks().iter().map(|&k| vec![1.0; k]).collect(),
            lambda: vec![level; config.d()],
        }
    }

    pub fn r(&self) -> &[Vec<f64>] {
        &self.r
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }
}

/// `S = Σ A_i* A_i`.
pub fn frame_operator<T: Scalar>(frame: &OperatorFrame<T>) -> HermitianOperator<T> {
    let d = frame.d();
    let mut s = DMatrix::<T>::zeros(d, d);
    for a in frame.blocks() {
        s += a.adjoint() * a;
    }
    HermitianOperator {
        matrix: linalg::hermitian_part(&s),
    }
}

/// Fusion frame potential `‖S‖²` (squared Frobenius norm).
pub fn ffp<T: Scalar>(frame: &OperatorFrame<T>) -> f64 {
    frame_operator(frame).matrix().norm_squared()
}

/// Welch-type lower bound `n² / d` on the fusion frame potential.
pub fn welch_bound(config: &FrameConfig) -> f64 {
    let n = config.n() as f64;
    n * n / config.d() as f64
}

/// `‖S - (n/d) I‖ <= tol`.
pub fn is_tight<T: Scalar>(frame: &OperatorFrame<T>, tol: f64) -> bool {
    let d = frame.d();
    let level = T::from_real(frame.n() as f64 / d as f64);
    let s = frame_operator(frame);
    (s.matrix() - DMatrix::<T>::identity(d, d) * level).norm() <= tol
}

/// Row orthonormality residual of each block, `‖A_i A_i* - I‖`.
pub(crate) fn orthonormality_defects<T: Scalar>(frame: &OperatorFrame<T>) -> Vec<f64> {
    frame
        .blocks()
        .iter()
        .map(|a| (a * a.adjoint() - DMatrix::<T>::identity(a.nrows(), a.nrows())).norm())
        .collect()
}

/// Every block row-orthonormal within `tol` and `S` positive definite
/// (smallest eigenvalue above `tol`).
pub fn is_fusion_frame<T: Scalar>(frame: &OperatorFrame<T>, tol: f64) -> bool {
    fusion_frame_violation(frame, tol).is_none()
}

pub(crate) fn fusion_frame_violation<T: Scalar>(
    frame: &OperatorFrame<T>,
    tol: f64,
) -> Option<String> {
    if let Some((i, defect)) = orthonormality_defects(frame)
        .into_iter()
        .enumerate()
        .find(|&(_, e)| !(e <= tol))
    {
        return Some(format!(
            "block {} rows are not orthonormal (‖AA* - I‖ = {defect:.3e})",
            i + 1
        ));
    }
    let smallest = frame_operator(frame)
        .spectrum()
        .last()
        .copied()
        .unwrap_or(0.0);
    if !(smallest > tol) {
        return Some(format!(
            "frame operator is not positive definite (smallest eigenvalue {smallest:.3e})"
        ));
    }
    None
}

pub(crate) fn require_fusion_frame<T: Scalar>(frame: &OperatorFrame<T>, tol: f64) -> Result<()> {
    match fusion_frame_violation(frame, tol) {
        Some(msg) => Err(Error::NotFusionFrame(msg)),
        None => Ok(()),
    }
}

/// Random fusion frame: Gaussian `k_i × d` blocks whose rows are then
/// orthonormalized. Deterministic in `seed`. Degenerate draws (a
/// rank-deficient block, or a singular frame operator when `n >= d`) are
/// re-drawn from the same stream.
pub fn random_fusion_frame<T: Scalar>(config: &FrameConfig, seed: u64) -> Result<OperatorFrame<T>> {
    if config.field() != T::FIELD {
        return Err(Error::FieldMismatch {
            expected: config.field(),
            found: T::FIELD,
        });
    }
    let d = config.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'draw: for _ in 0..MAX_DRAWS {
        let mut blocks = Vec::with_capacity(config.len());
        for &k in config.ranks() {
            let gaussian = DMatrix::<T>::from_fn(k, d, |_, _| T::sample_gaussian(&mut rng));
            match linalg::orthonormalize_rows(&gaussian, 1e-8) {
                Some(q) => blocks.push(q),
                None => continue 'draw,
            }
        }
        let frame = OperatorFrame::new(d, blocks)?;
        if config.n() >= d && !is_fusion_frame(&frame, crate::tol::STRUCTURAL) {
            continue;
        }
        return Ok(frame);
    }
    Err(Error::DegenerateDraw(MAX_DRAWS))
}

/// Eigenvalues of a Hermitian operator, decreasing.
pub fn spectrum<T: Scalar>(op: &HermitianOperator<T>) -> Vec<f64> {
    op.spectrum()
}

/// Finds a unitary `U` with `U A = B`, which exists exactly when
/// `A* A = B* B`.
///
/// `U` is the unitary polar factor of `B A*`; on the cokernel of a
/// rank-deficient `A` the polar factor supplies an arbitrary unitary
/// completion. Returns `None` when `‖A*A - B*B‖ > tol` or when the
/// resulting `U` misses `B` by more than `tol`.
pub fn find_unitary_equivalence<T: Scalar>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    tol: f64,
) -> Result<Option<DMatrix<T>>> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "cannot compare {}x{} with {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if (a.adjoint() * a - b.adjoint() * b).norm() > tol {
        return Ok(None);
    }
    let k = a.nrows();
    let m = b * a.adjoint();
    let svd = m.svd(true, true);
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Ok(None);
    };
    let unitary = u * v_t;
    debug_assert_eq!(unitary.shape(), (k, k));
    if (&unitary * a - b).norm() > tol {
        return Ok(None);
    }
    Ok(Some(unitary))
}

/// Nonzero spectra of every `P_i = A_i* A_i` match `r_i`, and the frame
/// operator spectrum matches `λ`, entrywise within `tol`.
pub fn check_spectral_membership<T: Scalar>(
    frame: &OperatorFrame<T>,
    target: &SpectralData,
    tol: f64,
) -> Result<bool> {
    if target.r().len() != frame.len() {
        return Err(Error::Shape(format!(
            "{} block spectra given for {} blocks",
            target.r().len(),
            frame.len()
        )));
    }
    if target.lambda().len() != frame.d() {
        return Err(Error::Shape(format!(
            "lambda has length {}, expected d = {}",
            target.lambda().len(),
            frame.d()
        )));
    }
    for (a, ri) in frame.blocks().iter().zip(target.r()) {
        if ri.len() != a.nrows() {
            return Err(Error::Shape(format!(
                "r_i has length {}, block has rank {}",
                ri.len(),
                a.nrows()
            )));
        }
        // The nonzero eigenvalues of A*A are those of AA*.
        let block_spectrum = linalg::eigh(&(a * a.adjoint())).values;
        if !matches_within(&block_spectrum, ri, tol) {
            return Ok(false);
        }
    }
    Ok(matches_within(
        &frame_operator(frame).spectrum(),
        target.lambda(),
        tol,
    ))
}

fn matches_within(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}
