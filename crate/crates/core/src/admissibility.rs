//! Existence checks for prescribed spectral data.
//!
//! The classical case (`k_i = 1`) is decided by majorization: a frame with
//! squared norms `r` and frame-operator spectrum `λ` exists exactly when
//! `λ` majorizes `r`. Beyond that, existence is governed by the Horn
//! inequalities (Littlewood–Richardson coefficients for tight fusion
//! frames), which this crate does not decide.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{random_fusion_frame, FrameConfig, OperatorFrame, SpectralData};
use crate::git::{check_property_s, PropertySVerdict};
use crate::scalar::{Field, Scalar};
use crate::tol;

const UNDECIDED_NOTE: &str = "existence for general ranks is governed by the Horn inequalities \
     (non-vanishing Littlewood-Richardson coefficients for tight fusion frames), which this \
     toolkit does not decide";

fn sorted_decreasing(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `λ` majorizes `r`: equal totals (within `tol`) and, after sorting both
/// decreasingly, `Σ_{i<=k} λ_i >= Σ_{i<=k} r_i - tol` for `k = 1..d`.
/// A list shorter than `d` is padded with zeros.
pub fn majorizes(lambda: &[f64], r: &[f64], tol: f64) -> Result<bool> {
    if lambda.is_empty() {
        return Err(Error::Empty("lambda"));
    }
    if r.is_empty() {
        return Err(Error::Empty("r"));
    }
    let (lambda, r) = (sorted_decreasing(lambda), sorted_decreasing(r));
    let total_l: f64 = lambda.iter().sum();
    let total_r: f64 = r.iter().sum();
    if (total_l - total_r).abs() > tol {
        return Ok(false);
    }
    let (mut partial_l, mut partial_r) = (0.0, 0.0);
    for (k, &l) in lambda.iter().enumerate() {
        partial_l += l;
        partial_r += r.get(k).copied().unwrap_or(0.0);
        if partial_l < partial_r - tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Smallest slack `min_k (Σ_{i<=k} λ_i - Σ_{i<=k} r_i)` over `k = 1..d-1`;
/// positive when the majorization is strict.
pub fn majorization_slack(lambda: &[f64], r: &[f64]) -> f64 {
    let (lambda, r) = (sorted_decreasing(lambda), sorted_decreasing(r));
    let (mut partial_l, mut partial_r, mut slack) = (0.0, 0.0, f64::INFINITY);
    for (k, &l) in lambda
        .iter()
        .enumerate()
        .take(lambda.len().saturating_sub(1))
    {
        partial_l += l;
        partial_r += r.get(k).copied().unwrap_or(0.0);
        slack = slack.min(partial_l - partial_r);
    }
    slack
}

/// Classical admissibility query: does a frame of `N` vectors with squared
/// norms `r` and frame-operator spectrum `λ` exist?
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorizationQuery {
    lambda: Vec<f64>,
    r: Vec<f64>,
}

impl MajorizationQuery {
    pub fn new(lambda: &[f64], r: &[f64]) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::Empty("lambda"));
        }
        if r.is_empty() {
            return Err(Error::Empty("r"));
        }
        if lambda
            .iter()
            .chain(r)
            .any(|&x| !(x > 0.0) || !x.is_finite())
        {
            return Err(Error::Shape("spectra must be positive and finite".into()));
        }
        Ok(Self {
            lambda: sorted_decreasing(lambda),
            r: sorted_decreasing(r),
        })
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn holds(&self, tol: f64) -> bool {
        majorizes(&self.lambda, &self.r, tol).expect("nonempty by construction")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Admissibility {
    Admissible,
    NotAdmissible { reason: String },
    Undecided { note: String },
}

/// Existence of a frame with the given spectral data, decided where it can
/// be: the classical case by majorization, every case by the trace
/// condition `Σ λ = Σ r`. Everything else is reported undecided.
pub fn admissibility(target: &SpectralData, tol: f64) -> Admissibility {
    let total_l: f64 = target.lambda().iter().sum();
    let total_r: f64 = target.r().iter().flatten().sum();
    if (total_l - total_r).abs() > tol {
        return Admissibility::NotAdmissible {
            reason: format!("trace mismatch: sum(lambda) = {total_l}, sum(r) = {total_r}"),
        };
    }
    let rank_sum: usize = target.r().iter().map(Vec::len).sum();
    if rank_sum < target.lambda().len() {
        return Admissibility::NotAdmissible {
            reason: format!(
                "total rank {rank_sum} is below d = {}, so the frame operator is singular",
                target.lambda().len()
            ),
        };
    }
    if target.r().iter().all(|ri| ri.len() == 1) {
        let r: Vec<f64> = target.r().iter().map(|ri| ri[0]).collect();
        return if majorizes(target.lambda(), &r, tol).expect("validated nonempty") {
            Admissibility::Admissible
        } else {
            Admissibility::NotAdmissible {
                reason: "lambda does not majorize r".into(),
            }
        };
    }
    Admissibility::Undecided {
        note: UNDECIDED_NOTE.into(),
    }
}

/// Outcome of [`tff_necessary_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TffCheck {
    /// The only possible frame-operator eigenvalue of a TFF, `n/d`.
    pub trace_value: f64,
    /// `Some(false)` when a generic frame of this type violates property 𝒮
    /// (or `n < d`); `Some(true)` when existence is known (classical with
    /// `N >= d`, or a generic frame provably has property 𝒮); otherwise
    /// `None`.
    pub tff_exists: Option<bool>,
    pub note: String,
}

/// Reports `n/d` and what can be said about existence of tight fusion
/// frames of this type.
///
/// Frames with property 𝒮 form a dense open set whenever tight fusion
/// frames exist, so a seeded random frame is probed with the property-𝒮
/// checker: a violation means no TFF exists (with probability one).
pub fn tff_necessary_check(config: &FrameConfig) -> TffCheck {
    let (n, d) = (config.n(), config.d());
    let trace_value = n as f64 / d as f64;
    if n < d {
        return TffCheck {
            trace_value,
            tff_exists: Some(false),
            note: format!("n = {n} < d = {d}: no fusion frame of this type spans the space"),
        };
    }
    if config.is_classical() {
        return TffCheck {
            trace_value,
            tff_exists: Some(true),
            note: "classical case: (N/d, ..., N/d) majorizes (1, ..., 1) whenever N >= d".into(),
        };
    }
    let probe = match config.field() {
        Field::Real => probe_property_s::<f64>(config),
        Field::Complex => probe_property_s::<Complex64>(config),
    };
    match probe {
        Some(ProbeOutcome::Violated { lhs, rhs }) => TffCheck {
            trace_value,
            tff_exists: Some(false),
            note: format!(
                "no TFF exists: a generic frame of this type violates property S \
                 (witness ratio {lhs} > n/d = {rhs})"
            ),
        },
        Some(ProbeOutcome::Satisfied) => TffCheck {
            trace_value,
            tff_exists: Some(true),
            note: "a generic frame has property S, so TFFs exist".into(),
        },
        Some(ProbeOutcome::Inconclusive) | None => TffCheck {
            trace_value,
            tff_exists: None,
            note: format!("undecided: {UNDECIDED_NOTE}"),
        },
    }
}

enum ProbeOutcome {
    Violated { lhs: f64, rhs: f64 },
    Satisfied,
    Inconclusive,
}

fn probe_property_s<T: Scalar>(config: &FrameConfig) -> Option<ProbeOutcome> {
    let frame = random_fusion_frame::<T>(config, 0).ok()?;
    Some(match check_property_s(&frame, tol::RANK_RELATIVE).ok()? {
        PropertySVerdict::Violated(w) => ProbeOutcome::Violated {
            lhs: w.lhs,
            rhs: w.rhs,
        },
        PropertySVerdict::Satisfied => ProbeOutcome::Satisfied,
        PropertySVerdict::NoViolationFound => ProbeOutcome::Inconclusive,
    })
}

/// Settings for [`realize_classical_frame`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealizeSettings {
    pub residual_tol: f64,
    pub max_iters: usize,
    pub restarts: usize,
}

impl Default for RealizeSettings {
    fn default() -> Self {
        Self {
            residual_tol: 1e-7,
            max_iters: 50_000,
            restarts: 5,
        }
    }
}

/// Builds `N` vectors in ℂ^d with `‖f_j‖² = r_j` and `Σ f_j f_j* = diag(λ)`
/// by gradient descent on `‖S - diag(λ)‖²`, renormalizing each vector after
/// every step. Vectors follow the order of `r`; `λ` is sorted decreasingly.
/// Returns the frame and its residual `‖S - diag(λ)‖`.
///
/// Runs that stall are restarted from a new random point; an error is
/// returned only after every restart fails.
pub fn realize_classical_frame(
    lambda: &[f64],
    r: &[f64],
    seed: u64,
    settings: &RealizeSettings,
) -> Result<(OperatorFrame<Complex64>, f64)> {
    let query = MajorizationQuery::new(lambda, r)?;
    if !query.holds(tol::MAJORIZATION) {
        return Err(Error::NotAdmissible("lambda does not majorize r".into()));
    }
    let (d, big_n) = (query.lambda().len(), r.len());
    let target = DMatrix::<Complex64>::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        query.lambda().iter().map(|&x| Complex64::new(x, 0.0)),
    ));
    let config = FrameConfig::new(Field::Complex, d, vec![1; big_n])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(DMatrix<Complex64>, f64)> = None;

    for _ in 0..=settings.restarts {
        let start_seed = rand::Rng::random::<u64>(&mut rng);
        let unit = random_fusion_frame::<Complex64>(&config, start_seed)?;
        let mut f =
            DMatrix::<Complex64>::from_fn(big_n, d, |j, c| unit.block(j)[(0, c)] * r[j].sqrt());
        let (frame, residual) = descend_to_target(&mut f, r, &target, settings);
        if residual <= settings.residual_tol {
            return Ok((OperatorFrame::from_vectors(&frame)?, residual));
        }
        if best.as_ref().is_none_or(|(_, b)| residual < *b) {
            best = Some((frame, residual));
        }
    }
    let residual = best.map_or(f64::INFINITY, |(_, r)| r);
    Err(Error::InvalidSettings(format!(
        "no realization within {} after {} restarts (best residual {residual:.3e})",
        settings.residual_tol, settings.restarts
    )))
}

fn residual_of(f: &DMatrix<Complex64>, target: &DMatrix<Complex64>) -> f64 {
    (f.adjoint() * f - target).norm()
}

fn renormalize(f: &mut DMatrix<Complex64>, r: &[f64]) {
    for (j, &rj) in r.iter().enumerate() {
        let norm = f.row(j).norm();
        if norm > 0.0 {
            let s = rj.sqrt() / norm;
            for c in 0..f.ncols() {
                f[(j, c)] *= s;
            }
        }
    }
}

fn descend_to_target(
    f: &mut DMatrix<Complex64>,
    r: &[f64],
    target: &DMatrix<Complex64>,
    settings: &RealizeSettings,
) -> (DMatrix<Complex64>, f64) {
    let scale = target.iter().map(|z| z.re).fold(0.0, f64::max).max(1.0);
    let mut step = 0.05 / scale;
    let mut residual = residual_of(f, target);
    for _ in 0..settings.max_iters {
        if residual <= settings.residual_tol {
            break;
        }
        let diff = f.adjoint() * &*f - target;
        // Row j of the gradient is 4 f_j (S - D); drop its radial part.
        let mut grad = &*f * &diff * Complex64::new(4.0, 0.0);
        for (j, &rj) in r.iter().enumerate() {
            let radial = (grad.row(j) * f.row(j).adjoint())[(0, 0)].re / rj;
            for c in 0..f.ncols() {
                let fj = f[(j, c)];
                grad[(j, c)] -= fj * radial;
            }
        }
        loop {
            let mut trial = &*f - &grad * Complex64::new(step, 0.0);
            renormalize(&mut trial, r);
            let trial_residual = residual_of(&trial, target);
            if trial_residual < residual {
                *f = trial;
                residual = trial_residual;
                step *= 1.25;
                break;
            }
            step *= 0.5;
            if step < 1e-18 {
                return (f.clone(), residual);
            }
        }
    }
    (f.clone(), residual)
}
