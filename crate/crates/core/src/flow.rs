//! Gradient descent of the fusion frame potential on the product of
//! row-orthonormal matrix manifolds.
//!
//! Each step moves every block against its Riemannian gradient
//! `4 A_i S (I - A_i* A_i)` and returns to the manifold with the polar
//! retraction `B ↦ (B B*)^{-1/2} B`. A step that would raise the potential
//! is halved until it does not.

use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::error::{Error, Result};
use crate::frame::{self, frame_operator, OperatorFrame};
use crate::linalg;
use crate::scalar::Scalar;
use crate::tol;

/// Tuple of blocks with the same shapes as a frame (a tangent or ambient
/// vector).
pub type Blocks<T> = Vec<DMatrix<T>>;

/// Frobenius norm of a block tuple.
pub fn blocks_norm<T: Scalar>(blocks: &[DMatrix<T>]) -> f64 {
    blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentSettings {
    /// Initial step for every iteration.
    pub step_size: f64,
    /// How many times a rejected step may be halved; zero disables
    /// backtracking, so any increase of the potential is an error.
    pub max_halvings: u32,
    pub max_iters: usize,
    /// Stop once the Riemannian gradient norm is at most this.
    pub grad_tol: f64,
    /// Record every `record_every`-th iteration (the first and last are
    /// always recorded).
    pub record_every: usize,
}

impl Default for DescentSettings {
    fn default() -> Self {
        Self {
            step_size: 1e-2,
            max_halvings: 30,
            max_iters: 100_000,
            grad_tol: tol::CONVERGENCE,
            record_every: 1,
        }
    }
}

impl DescentSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidSettings(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidSettings(
                "max_iters must be at least 1".into(),
            ));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidSettings(format!(
                "grad_tol must be positive, got {}",
                self.grad_tol
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidSettings(
                "record_every must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub ffp: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct DescentTrace<T: Scalar> {
    pub records: Vec<TraceRecord>,
    pub final_frame: OperatorFrame<T>,
    pub converged: bool,
    /// Accepted steps taken.
    pub iterations: usize,
}

impl<T: Scalar> DescentTrace<T> {
    pub fn final_ffp(&self) -> f64 {
        self.records.last().map(|r| r.ffp).unwrap_or(f64::NAN)
    }

    pub fn final_grad_norm(&self) -> f64 {
        self.records.last().map(|r| r.grad_norm).unwrap_or(f64::NAN)
    }

    /// Writes the `iter,ffp,grad_norm` CSV with 16 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iter,ffp,grad_norm")?;
        for r in &self.records {
            writeln!(out, "{},{:.15e},{:.15e}", r.iter, r.ffp, r.grad_norm)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum DescentError<T: Scalar> {
    #[error(transparent)]
    Invalid(#[from] Error),

    #[error("descent could not decrease the potential at iteration {iter} after backtracking")]
    Diverged {
        iter: usize,
        trace: Box<DescentTrace<T>>,
    },
}

/// Gradient of `EFP(A) = ‖Σ A_i* A_i‖²` on the full matrix space:
/// block `i` is `4 A_i S`.
pub fn extrinsic_gradient<T: Scalar>(frame: &OperatorFrame<T>) -> Blocks<T> {
    let s = frame_operator(frame);
    let four = T::from_real(4.0);
    frame
        .blocks()
        .iter()
        .map(|a| a * s.matrix() * four)
        .collect()
}

fn riemannian_gradient_unchecked<T: Scalar>(frame: &OperatorFrame<T>, s: &DMatrix<T>) -> Blocks<T> {
    let four = T::from_real(4.0);
    frame
        .blocks()
        .iter()
        .map(|a| {
            let a_s = a * s;
            let coeff = &a_s * a.adjoint();
            (a_s - coeff * a) * four
        })
        .collect()
}

/// Riemannian gradient of the potential: block `i` is
/// `4 (A_i S - (A_i S A_i*) A_i) = 4 A_i S (I - A_i* A_i)`.
pub fn riemannian_gradient<T: Scalar>(frame: &OperatorFrame<T>) -> Result<Blocks<T>> {
    frame::require_fusion_frame(frame, tol::STRUCTURAL)?;
    let s = frame_operator(frame);
    Ok(riemannian_gradient_unchecked(frame, s.matrix()))
}

/// Polar retraction of each block, `B ↦ (B B*)^{-1/2} B`.
///
/// Fails with [`Error::StepTooLarge`] when some Gram matrix `B B*` has an
/// eigenvalue at or below `tol`.
pub fn retract<T: Scalar>(d: usize, blocks: Blocks<T>, tol: f64) -> Result<OperatorFrame<T>> {
    let mut out = Vec::with_capacity(blocks.len());
    for (i, b) in blocks.into_iter().enumerate() {
        let gram = &b * b.adjoint();
        let eig = linalg::eigh(&gram);
        let smallest = eig.values.last().copied().unwrap_or(0.0);
        if !(smallest > tol) {
            return Err(Error::StepTooLarge {
                block: i,
                min_eigenvalue: smallest,
            });
        }
        let inv_sqrt = linalg::hermitian_function(&eig, |x| 1.0 / x.sqrt());
        out.push(inv_sqrt * b);
    }
    OperatorFrame::new(d, out)
}

fn accept_slack(f: f64) -> f64 {
    1e-12 * f.abs().max(1.0)
}

/// Runs projected gradient descent with backtracking from `start`.
///
/// Stops as soon as the gradient norm is at most `grad_tol` (converged) or
/// after `max_iters` accepted steps (not converged).
pub fn descend<T: Scalar>(
    start: &OperatorFrame<T>,
    settings: &DescentSettings,
) -> std::result::Result<DescentTrace<T>, DescentError<T>> {
    settings.validate()?;
    frame::require_fusion_frame(start, tol::STRUCTURAL)?;

    let d = start.d();
    let mut current = start.clone();
    let mut s = frame_operator(&current);
    let mut f = s.matrix().norm_squared();
    let mut grad = riemannian_gradient_unchecked(&current, s.matrix());
    let mut grad_norm = blocks_norm(&grad);
    let mut records = vec![TraceRecord {
        iter: 0,
        ffp: f,
        grad_norm,
    }];
    let mut iter = 0;
    let mut converged = false;

    loop {
        if grad_norm <= settings.grad_tol {
            converged = true;
            break;
        }
        if iter >= settings.max_iters {
            break;
        }

        let mut step = settings.step_size;
        let mut accepted = None;
        for _ in 0..=settings.max_halvings {
            let scale = T::from_real(step);
            let trial: Blocks<T> = current
                .blocks()
                .iter()
                .zip(&grad)
                .map(|(a, g)| a - g * scale)
                .collect();
            if let Ok(candidate) = retract(d, trial, tol::RETRACTION) {
                let cand_s = frame_operator(&candidate);
                let cand_f = cand_s.matrix().norm_squared();
                if cand_f <= f + accept_slack(f) {
                    accepted = Some((candidate, cand_s, cand_f));
                    break;
                }
            }
            step *= 0.5;
        }

        let Some((next, next_s, next_f)) = accepted else {
            if records.last().map(|r| r.iter) != Some(iter) {
                records.push(TraceRecord {
                    iter,
                    ffp: f,
                    grad_norm,
                });
            }
            return Err(DescentError::Diverged {
                iter,
                trace: Box::new(DescentTrace {
                    records,
                    final_frame: current,
                    converged: false,
                    iterations: iter,
                }),
            });
        };

        current = next;
        s = next_s;
        f = next_f;
        grad = riemannian_gradient_unchecked(&current, s.matrix());
        grad_norm = blocks_norm(&grad);
        iter += 1;
        if iter % settings.record_every == 0 {
            records.push(TraceRecord {
                iter,
                ffp: f,
                grad_norm,
            });
        }
    }

    if records.last().map(|r| r.iter) != Some(iter) {
        records.push(TraceRecord {
            iter,
            ffp: f,
            grad_norm,
        });
    }
    Ok(DescentTrace {
        records,
        final_frame: current,
        converged,
        iterations: iter,
    })
}

#[derive(Debug, Clone)]
pub struct CriticalPointReport<T: Scalar> {
    pub gradient_norm: f64,
    pub is_critical: bool,
    pub is_tight: bool,
    /// Every row space `row(A_i)` is invariant under `S` within tolerance.
    pub row_spaces_invariant: bool,
    /// Blocks rotated on the left so that each row is an eigenvector of `S`
    /// (when the row spaces are invariant). Rows within a block are ordered
    /// by decreasing eigenvalue.
    pub aligned_frame: OperatorFrame<T>,
    /// Eigenvalue of `S` carried by each aligned row, per block.
    pub row_eigenvalues: Vec<Vec<f64>>,
}

/// Tests whether `frame` is a critical point of the potential and, if so,
/// rotates each block so that its rows are eigenvectors of `S`.
pub fn classify_critical_point<T: Scalar>(
    frame: &OperatorFrame<T>,
    tol: f64,
) -> Result<CriticalPointReport<T>> {
    frame::require_fusion_frame(frame, tol::STRUCTURAL)?;
    let s = frame_operator(frame);
    let grad = riemannian_gradient_unchecked(frame, s.matrix());
    let gradient_norm = blocks_norm(&grad);
    // The gradient blocks are 4 A_i S (I - P_i); invariance asks for the
    // unscaled residual.
    let row_spaces_invariant = grad.iter().all(|g| g.norm() / 4.0 <= tol);

    let mut aligned = Vec::with_capacity(frame.len());
    let mut row_eigenvalues = Vec::with_capacity(frame.len());
    for a in frame.blocks() {
        let compressed = a * s.matrix() * a.adjoint();
        let eig = linalg::eigh_clustered(&compressed, tol::CLUSTER_GAP);
        aligned.push(eig.vectors.adjoint() * a);
        row_eigenvalues.push(eig.values);
    }

    Ok(CriticalPointReport {
        gradient_norm,
        is_critical: gradient_norm <= tol,
        is_tight: frame::is_tight(frame, tol.max(tol::STRUCTURAL)),
        row_spaces_invariant,
        aligned_frame: OperatorFrame::new(frame.d(), aligned)?,
        row_eigenvalues,
    })
}
