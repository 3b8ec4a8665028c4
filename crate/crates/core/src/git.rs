//! Invariant-theoretic certification of fusion frames.
//!
//! * [`plucker_embed`] maps a frame to the tensor product of the Plücker
//!   coordinates of its blocks (stored factored).
//! * [`check_property_s`] searches a structured family of subspaces `Q` for
//!   a violation of `(1/dim Q) Σ dim(𝒮_i ∩ Q) <= n/d`.
//! * [`instability_certificate`] builds, at a non-tight critical point, the
//!   one-parameter subgroup `diag(t^{d-ℓ} I_ℓ, t^{-ℓ} I_{d-ℓ})` (in the
//!   eigenbasis of `S`) that drives the embedding to zero.

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::flow::classify_critical_point;
use crate::frame::{self, ffp, frame_operator, welch_bound, OperatorFrame};
use crate::io::matrix_to_json;
use crate::linalg;
use crate::scalar::Scalar;
use crate::tol;

/// Plücker coordinates of a frame, kept as one minor vector per block.
///
/// The full coordinate tensor is the outer product of the factors; entry
/// `(J_1, …, J_N)` is `Π_i det(A_i[:, J_i])` over sorted column subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct PluckerVector<T: Scalar> {
    d: usize,
    subsets: Vec<Vec<Vec<usize>>>,
    factors: Vec<Vec<T>>,
}

impl<T: Scalar> PluckerVector<T> {
    pub fn d(&self) -> usize {
        self.d
    }

    /// Column subsets indexing the coordinates of block `i`, in
    /// lexicographic order.
    pub fn subsets(&self, i: usize) -> &[Vec<usize>] {
        &self.subsets[i]
    }

    pub fn factor(&self, i: usize) -> &[T] {
        &self.factors[i]
    }

    pub fn factor_norms(&self) -> Vec<f64> {
        self.factors
            .iter()
            .map(|f| f.iter().map(|z| z.modulus_squared()).sum::<f64>().sqrt())
            .collect()
    }

    /// Norm of the full tensor, `Π_i ‖τ_i‖`.
    pub fn norm(&self) -> f64 {
        self.factor_norms().iter().product()
    }

    /// Coordinate at one subset index per block.
    pub fn coordinate(&self, index: &[usize]) -> T {
        index
            .iter()
            .zip(&self.factors)
            .fold(T::one(), |acc, (&j, f)| acc * f[j])
    }

    /// Number of entries of the dense tensor.
    pub fn dense_len(&self) -> usize {
        self.factors.iter().map(|f| f.len()).product()
    }

    /// Materializes the dense tensor, last block varying fastest.
    pub fn dense(&self) -> Vec<T> {
        let mut out = vec![T::one()];
        for f in &self.factors {
            out = out
                .iter()
                .flat_map(|&x| f.iter().map(move |&y| x * y))
                .collect();
        }
        out
    }
}

/// Plücker coordinates: for each block, the `k_i × k_i` minors on every
/// sorted column subset.
pub fn plucker_embed<T: Scalar>(frame: &OperatorFrame<T>) -> PluckerVector<T> {
    let d = frame.d();
    let mut subsets = Vec::with_capacity(frame.len());
    let mut factors = Vec::with_capacity(frame.len());
    for a in frame.blocks() {
        let k = a.nrows();
        let subs: Vec<Vec<usize>> = (0..d).combinations(k).collect();
        let minors = subs
            .iter()
            .map(|cols| DMatrix::from_fn(k, k, |r, c| a[(r, cols[c])]).determinant())
            .collect();
        subsets.push(subs);
        factors.push(minors);
    }
    PluckerVector {
        d,
        subsets,
        factors,
    }
}

/// Where a candidate subspace came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    EigenspaceSum,
    BlockSum,
    BlockIntersection,
    PairwiseIntersection,
    Random,
}

/// A proper subspace `Q` with `(1/dim Q) Σ dim(𝒮_i ∩ Q) > n/d`.
#[derive(Debug, Clone)]
pub struct SubspaceWitness<T: Scalar> {
    /// Orthonormal columns spanning `Q`.
    pub basis: DMatrix<T>,
    /// `dim(𝒮_i ∩ Q)` for each block.
    pub dims: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub kind: CandidateKind,
    /// Blocks whose sum or intersection produced `Q` (empty otherwise).
    pub blocks: Vec<usize>,
}

impl<T: Scalar> SubspaceWitness<T> {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }

    pub fn to_json(&self) -> Value {
        json!({
            "basis": matrix_to_json(&self.basis),
            "dim": self.dim(),
            "dims": self.dims,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin(),
            "kind": self.kind,
            "blocks": self.blocks,
        })
    }
}

#[derive(Debug, Clone)]
pub enum PropertySVerdict<T: Scalar> {
    /// No proper subspace violates the inequality; exact (classical frames
    /// with exhaustive subset enumeration).
    Satisfied,
    Violated(SubspaceWitness<T>),
    /// No violation among the candidates, but the candidate family is not
    /// known to be exhaustive.
    NoViolationFound,
}

impl<T: Scalar> PropertySVerdict<T> {
    pub fn is_violated(&self) -> bool {
        matches!(self, Self::Violated(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Satisfied => "satisfied",
            Self::Violated(_) => "violated",
            Self::NoViolationFound => "inconclusive",
        }
    }

    pub fn witness(&self) -> Option<&SubspaceWitness<T>> {
        match self {
            Self::Violated(w) => Some(w),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "verdict": self.label(),
            "witness": self.witness().map(SubspaceWitness::to_json),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertySOptions {
    /// Relative singular-value cutoff for ranks of stacked bases.
    pub rank_tol: f64,
    /// Largest block subset whose sums and intersections are tried.
    pub subset_cap: usize,
    /// Stop enumerating block subsets after this many candidates.
    pub max_candidates: usize,
    /// Random subspaces tried per dimension `1..d`.
    pub random_per_dim: usize,
    pub seed: u64,
}

impl Default for PropertySOptions {
    fn default() -> Self {
        Self {
            rank_tol: tol::RANK_RELATIVE,
            subset_cap: 12,
            max_candidates: 1 << 16,
            random_per_dim: 4,
            seed: 0,
        }
    }
}

struct Evaluator<'a, T: Scalar> {
    /// `A_i*`: orthonormal columns spanning `𝒮_i`.
    spans: Vec<DMatrix<T>>,
    frame: &'a OperatorFrame<T>,
    rank_tol: f64,
    evaluated: usize,
}

impl<T: Scalar> Evaluator<'_, T> {
    /// Returns a witness when `q` (orthonormal columns) violates the
    /// inequality. Improper or zero subspaces are skipped.
    fn check(
        &mut self,
        q: DMatrix<T>,
        kind: CandidateKind,
        blocks: &[usize],
    ) -> Option<SubspaceWitness<T>> {
        let (d, dim_q) = (self.frame.d(), q.ncols());
        if dim_q == 0 || dim_q >= d {
            return None;
        }
        self.evaluated += 1;
        let dims: Vec<usize> = self
            .spans
            .iter()
            .map(|s| linalg::intersection_dim(s, &q, self.rank_tol))
            .collect();
        let total: usize = dims.iter().sum();
        let n = self.frame.n();
        // total/dim_q > n/d, compared exactly in integers.
        if total * d > n * dim_q {
            Some(SubspaceWitness {
                basis: q,
                lhs: total as f64 / dim_q as f64,
                rhs: n as f64 / d as f64,
                dims,
                kind,
                blocks: blocks.to_vec(),
            })
        } else {
            None
        }
    }

    fn sum(&self, members: &[usize]) -> DMatrix<T> {
        let d = self.frame.d();
        let width: usize = members.iter().map(|&i| self.spans[i].ncols()).sum();
        let mut stacked = DMatrix::<T>::zeros(d, width);
        let mut col = 0;
        for &i in members {
            let s = &self.spans[i];
            stacked.columns_mut(col, s.ncols()).copy_from(s);
            col += s.ncols();
        }
        linalg::column_span(&stacked, self.rank_tol)
    }

    fn intersection(&self, members: &[usize]) -> DMatrix<T> {
        let mut acc = self.spans[members[0]].clone();
        for &i in &members[1..] {
            acc = linalg::intersect(&acc, &self.spans[i], self.rank_tol);
            if acc.ncols() == 0 {
                break;
            }
        }
        acc
    }
}

/// Checks property 𝒮 with default options and rank tolerance `tol`.
pub fn check_property_s<T: Scalar>(
    frame: &OperatorFrame<T>,
    tol: f64,
) -> Result<PropertySVerdict<T>> {
    check_property_s_with(
        frame,
        &PropertySOptions {
            rank_tol: tol,
            ..Default::default()
        },
    )
}

/// Searches, in order: sums of eigenspaces of `S`; sums and intersections
/// of the `𝒮_i` over block subsets up to `subset_cap`; pairwise
/// intersections (when `subset_cap < 2`); random subspaces. The first
/// violating subspace found is returned.
///
/// For classical frames (all `k_i = 1`) the maximizing `Q` can be taken to
/// be a span of at most `d - 1` frame vectors, so when every such subset was
/// enumerated the absence of a violation is conclusive.
pub fn check_property_s_with<T: Scalar>(
    frame: &OperatorFrame<T>,
    options: &PropertySOptions,
) -> Result<PropertySVerdict<T>> {
    frame::require_fusion_frame(frame, tol::STRUCTURAL)?;
    let d = frame.d();
    let big_n = frame.len();
    let mut ev = Evaluator {
        spans: frame.blocks().iter().map(|a| a.adjoint()).collect(),
        frame,
        rank_tol: options.rank_tol,
        evaluated: 0,
    };

    // (a) sums of eigenspaces of S.
    let s = frame_operator(frame);
    let eig = s.eigen();
    let scale = eig.values.first().copied().unwrap_or(1.0).abs().max(1.0);
    let groups = linalg::clusters(&eig.values, options.rank_tol.max(tol::CLUSTER_GAP) * scale);
    let masks: Vec<u64> = if groups.len() <= 16 {
        (1..(1u64 << groups.len()) - 1).collect()
    } else {
        (0..groups.len()).map(|g| 1u64 << g).collect()
    };
    for mask in masks {
        let cols: Vec<usize> = groups
            .iter()
            .enumerate()
            .filter(|(g, _)| mask & (1 << g) != 0)
            .flat_map(|(_, r)| r.clone())
            .collect();
        let q = DMatrix::from_fn(d, cols.len(), |r, c| eig.vectors[(r, cols[c])]);
        if let Some(w) = ev.check(q, CandidateKind::EigenspaceSum, &[]) {
            return Ok(PropertySVerdict::Violated(w));
        }
    }

    // (b) sums and intersections over block subsets.
    let cap = options.subset_cap.min(big_n);
    let mut truncated = false;
    'subsets: for size in 1..=cap {
        for members in (0..big_n).combinations(size) {
            if ev.evaluated >= options.max_candidates {
                truncated = true;
                break 'subsets;
            }
            let q = ev.sum(&members);
            if let Some(w) = ev.check(q, CandidateKind::BlockSum, &members) {
                return Ok(PropertySVerdict::Violated(w));
            }
            if size >= 2 {
                let q = ev.intersection(&members);
                if let Some(w) = ev.check(q, CandidateKind::BlockIntersection, &members) {
                    return Ok(PropertySVerdict::Violated(w));
                }
            }
        }
    }

    // (c) pairwise intersections, unless (b) already covered them.
    if cap < 2 {
        for pair in (0..big_n).combinations(2) {
            let q = ev.intersection(&pair);
            if let Some(w) = ev.check(q, CandidateKind::PairwiseIntersection, &pair) {
                return Ok(PropertySVerdict::Violated(w));
            }
        }
    }

    // (d) random subspaces.
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    for dim in 1..d {
        for _ in 0..options.random_per_dim {
            let g = DMatrix::<T>::from_fn(d, dim, |_, _| T::sample_gaussian(&mut rng));
            let q = linalg::column_span(&g, options.rank_tol);
            if let Some(w) = ev.check(q, CandidateKind::Random, &[]) {
                return Ok(PropertySVerdict::Violated(w));
            }
        }
    }

    let classical = frame.blocks().iter().all(|a| a.nrows() == 1);
    let exhaustive = !truncated && cap >= big_n.min(d.saturating_sub(1));
    Ok(if classical && exhaustive {
        PropertySVerdict::Satisfied
    } else {
        PropertySVerdict::NoViolationFound
    })
}

/// Hilbert–Mumford witness of instability at a non-tight critical point.
#[derive(Debug, Clone)]
pub struct OnePSCertificate<T: Scalar> {
    /// Largest eigenvalue λ of `S`.
    pub top_eigenvalue: f64,
    /// `ℓ = dim E_λ`.
    pub ell: usize,
    /// Aligned rows lying in `E_λ`.
    pub m: usize,
    /// `m d - n ℓ`; positive for an unstable frame.
    pub weight_exponent: i64,
    /// Unitary whose columns are eigenvectors of `S`, eigenvalues decreasing.
    pub basis_rotation: DMatrix<T>,
    pub d: usize,
    pub n: usize,
}

impl<T: Scalar> OnePSCertificate<T> {
    /// `λ(t) = R diag(t^{d-ℓ} I_ℓ, t^{-ℓ} I_{d-ℓ}) R*`, an element of SL(d).
    pub fn one_parameter_subgroup(&self, t: f64) -> DMatrix<T> {
        let (d, ell) = (self.d as i32, self.ell as i32);
        let r = &self.basis_rotation;
        let mut scaled = r.clone();
        for j in 0..self.d {
            let w = if (j as i32) < ell {
                t.powi(d - ell)
            } else {
                t.powi(-ell)
            };
            let w = T::from_real(w);
            for i in 0..self.d {
                scaled[(i, j)] *= w;
            }
        }
        scaled * r.adjoint()
    }

    /// The frame whose rows are `a λ(t)`, i.e. `λ(t)` acting on the column
    /// vectors `a*`.
    pub fn act(&self, frame: &OperatorFrame<T>, t: f64) -> Result<OperatorFrame<T>> {
        let g = self.one_parameter_subgroup(t);
        OperatorFrame::new(frame.d(), frame.blocks().iter().map(|a| a * &g).collect())
    }

    /// Factor `t^{md - nℓ}` by which `λ(t)` scales the Plücker norm.
    pub fn predicted_scale(&self, t: f64) -> f64 {
        t.powi(self.weight_exponent as i32)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lambda": self.top_eigenvalue,
            "ell": self.ell,
            "m": self.m,
            "exponent": self.weight_exponent,
            "d": self.d,
            "n": self.n,
            "rotation": matrix_to_json(&self.basis_rotation),
        })
    }
}

/// One-parameter-subgroup certificate that a non-tight critical point is
/// unstable. Returns `Ok(None)` for tight frames.
pub fn instability_certificate<T: Scalar>(
    frame: &OperatorFrame<T>,
    tol: f64,
) -> Result<Option<OnePSCertificate<T>>> {
    let report = classify_critical_point(frame, tol)?;
    if !report.is_critical {
        return Err(Error::NotCritical(report.gradient_norm));
    }
    if report.is_tight {
        return Ok(None);
    }
    let (d, n) = (frame.d(), frame.n());
    let eig = frame_operator(frame).eigen();
    let top = eig.values[0];
    let ell = eig.values.iter().take_while(|&&v| top - v <= tol).count();
    if ell == d {
        return Err(Error::AmbiguousCluster {
            gap: top - eig.values[d - 1],
            tol,
        });
    }
    let gap = eig.values[ell - 1] - eig.values[ell];
    if gap < tol {
        return Err(Error::AmbiguousCluster { gap, tol });
    }
    let m = report
        .row_eigenvalues
        .iter()
        .flatten()
        .filter(|&&mu| (mu - top).abs() <= tol)
        .count();
    let weight_exponent = (m * d) as i64 - (n * ell) as i64;
    if weight_exponent <= 0 {
        return Err(Error::NoPositiveWeight(weight_exponent));
    }
    Ok(Some(OnePSCertificate {
        top_eigenvalue: top,
        ell,
        m,
        weight_exponent,
        basis_rotation: eig.vectors,
        d,
        n,
    }))
}

/// Slack in the Welch bound, `FFP - n²/d`.
pub fn welch_gap<T: Scalar>(frame: &OperatorFrame<T>) -> f64 {
    ffp(frame) - welch_bound(&frame.config())
}
