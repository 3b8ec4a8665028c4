//! Small dense linear-algebra helpers shared by the frame, flow and git
//! modules. Matrices here are tiny (d up to a few dozen), so every routine
//! favours robustness over speed.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::scalar::Scalar;

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// decreasing order. Column `j` of `vectors` belongs to `values[j]`.
#[derive(Debug, Clone)]
pub struct Eigh<T: Scalar> {
    pub values: Vec<f64>,
    pub vectors: DMatrix<T>,
}

/// `(M + M*) / 2`.
pub fn hermitian_part<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let half = T::from_real(0.5);
    (m + m.adjoint()) * half
}

/// Largest entrywise modulus of `M - M*`.
pub fn hermitian_defect<T: Scalar>(m: &DMatrix<T>) -> f64 {
    (m - m.adjoint())
        .iter()
        .map(|z| z.modulus())
        .fold(0.0, f64::max)
}

/// Hermitian eigendecomposition, eigenvalues decreasing.
///
/// The input is symmetrized first. Exact ties keep the solver's order.
pub fn eigh<T: Scalar>(m: &DMatrix<T>) -> Eigh<T> {
    let n = m.nrows();
    if n == 0 {
        return Eigh {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Eigh { values, vectors }
}

/// Hermitian eigendecomposition, eigenvalues decreasing, with eigenvalues
/// closer than `gap` grouped into clusters whose members keep the solver's
/// original order.
pub fn eigh_clustered<T: Scalar>(m: &DMatrix<T>, gap: f64) -> Eigh<T> {
    let n = m.nrows();
    if n == 0 {
        return eigh(m);
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig.eigenvalues[order[end - 1]] - eig.eigenvalues[order[end]] < gap {
            end += 1;
        }
        order[start..end].sort_unstable();
        start = end;
    }
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Eigh { values, vectors }
}

/// Groups a decreasing list of eigenvalues into index ranges whose
/// consecutive gaps are below `gap`.
pub fn clusters(values: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for j in 1..=values.len() {
        if j == values.len() || values[j - 1] - values[j] >= gap {
            out.push(start..j);
            start = j;
        }
    }
    out
}

/// `V f(Λ) V*` for a Hermitian matrix with eigenvalues Λ.
pub fn hermitian_function<T: Scalar>(eig: &Eigh<T>, f: impl Fn(f64) -> f64) -> DMatrix<T> {
    let n = eig.values.len();
    let mut scaled = eig.vectors.clone();
    for (j, &value) in eig.values.iter().enumerate() {
        let s = T::from_real(f(value));
        for r in 0..n {
            scaled[(r, j)] *= s;
        }
    }
    scaled * eig.vectors.adjoint()
}

/// Row inner product `<u, v> = Σ u_c conj(v_c)` between rows of two matrices.
fn row_inner<T: Scalar>(a: &DMatrix<T>, i: usize, b: &DMatrix<T>, j: usize) -> T {
    let mut acc = T::zero();
    for c in 0..a.ncols() {
        acc += a[(i, c)] * b[(j, c)].conjugate();
    }
    acc
}

/// Orthonormalizes the rows of `b` with modified Gram–Schmidt and a second
/// reorthogonalization pass. Returns `None` if some row loses more than all
/// but `rel_tol` of its norm to the earlier rows.
pub fn orthonormalize_rows<T: Scalar>(b: &DMatrix<T>, rel_tol: f64) -> Option<DMatrix<T>> {
    let (k, d) = b.shape();
    let mut q = b.clone();
    for j in 0..k {
        let original = q.row(j).norm();
        if original == 0.0 || !original.is_finite() {
            return None;
        }
        for _pass in 0..2 {
            for i in 0..j {
                let coeff = row_inner(&q, j, &q, i);
                for c in 0..d {
                    let qi = q[(i, c)];
                    q[(j, c)] -= coeff * qi;
                }
            }
        }
        let norm = q.row(j).norm();
        if norm <= rel_tol * original {
            return None;
        }
        let inv = T::from_real(1.0 / norm);
        for c in 0..d {
            q[(j, c)] *= inv;
        }
    }
    Some(q)
}

/// Orthonormal basis (as columns) for the column span of `m`, keeping
/// singular directions above `rel_tol` times the largest singular value.
pub fn column_span<T: Scalar>(m: &DMatrix<T>, rel_tol: f64) -> DMatrix<T> {
    let d = m.nrows();
    if m.ncols() == 0 || d == 0 {
        return DMatrix::zeros(d, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return DMatrix::zeros(d, 0);
    }
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&j| svd.singular_values[j] > rel_tol * smax)
        .collect();
    DMatrix::from_fn(d, keep.len(), |r, c| u[(r, keep[c])])
}

/// Numerical rank with relative singular-value cutoff `rel_tol`.
pub fn rank<T: Scalar>(m: &DMatrix<T>, rel_tol: f64) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Horizontal concatenation `[a | b]`.
pub fn hstack<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    assert_eq!(a.nrows(), b.nrows(), "hstack needs equal row counts");
    let (p, q) = (a.ncols(), b.ncols());
    DMatrix::from_fn(a.nrows(), p + q, |r, c| {
        if c < p {
            a[(r, c)]
        } else {
            b[(r, c - p)]
        }
    })
}

/// Dimension of the intersection of two column spans, each given by an
/// orthonormal basis: `p + q - rank([U | W])`.
pub fn intersection_dim<T: Scalar>(u: &DMatrix<T>, w: &DMatrix<T>, rel_tol: f64) -> usize {
    let total = u.ncols() + w.ncols();
    total - rank(&hstack(u, w), rel_tol)
}

/// Orthonormal basis of the intersection of two column spans given by
/// orthonormal bases. The dimension comes from the stacked rank; the basis
/// from the null space of `(I - UU*) + (I - WW*)`.
pub fn intersect<T: Scalar>(u: &DMatrix<T>, w: &DMatrix<T>, rel_tol: f64) -> DMatrix<T> {
    let d = u.nrows();
    let dim = intersection_dim(u, w, rel_tol);
    if dim == 0 {
        return DMatrix::zeros(d, 0);
    }
    let eye = DMatrix::<T>::identity(d, d);
    let m = (&eye - u * u.adjoint()) + (&eye - w * w.adjoint());
    let eig = eigh(&m);
    DMatrix::from_fn(d, dim, |r, c| eig.vectors[(r, d - 1 - c)])
}

/// Orthogonal projector onto the column span of an orthonormal basis.
pub fn projector<T: Scalar>(basis: &DMatrix<T>) -> DMatrix<T> {
    basis * basis.adjoint()
}

/// Largest imaginary-part magnitude over all entries.
pub fn max_imaginary<T: Scalar>(m: &DMatrix<T>) -> f64 {
    m.iter().map(|z| z.imaginary().abs()).fold(0.0, f64::max)
}
