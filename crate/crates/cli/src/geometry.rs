//! Shape of the potential minimizers for `d = 3`, `k = (1, 1, 2)`.
//!
//! The minimizers have their two lines `ℓ_1, ℓ_2` in a plane `Q` at a
//! right dihedral angle to the plane `𝒮`, and `ℓ_1`, `ℓ_2`, `Q ∩ 𝒮` form a
//! Mercedes–Benz frame of `Q`.

use std::f64::consts::PI;

use fusionframe::OperatorFrame;
use nalgebra::Vector3;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizerGeometry {
    /// Dihedral angle between `Q = ℓ_1 + ℓ_2` and `𝒮`, in `[0, π/2]`.
    pub dihedral_angle: f64,
    /// Pairwise angles between `ℓ_1`, `ℓ_2` and `Q ∩ 𝒮`, with directions
    /// chosen so the three unit vectors sum as close to zero as possible.
    pub line_angles: [f64; 3],
    /// Largest deviation of `line_angles` from `2π/3`.
    pub max_angle_error: f64,
}

impl MinimizerGeometry {
    pub fn is_perpendicular(&self, tol: f64) -> bool {
        (self.dihedral_angle - PI / 2.0).abs() <= tol
    }

    pub fn is_mercedes_benz(&self, tol: f64) -> bool {
        self.max_angle_error <= tol
    }
}

fn row3(frame: &OperatorFrame<f64>, block: usize, row: usize) -> Vector3<f64> {
    let a = frame.block(block);
    Vector3::new(a[(row, 0)], a[(row, 1)], a[(row, 2)])
}

fn angle(u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
    u.dot(v).clamp(-1.0, 1.0).acos()
}

/// Measures the minimizer geometry of a real `(1, 1, 2)` frame in ℝ³.
/// Returns `None` for other shapes or when `ℓ_1 = ℓ_2` or `Q = 𝒮`.
pub fn analyze_112(frame: &OperatorFrame<f64>) -> Option<MinimizerGeometry> {
    if frame.d() != 3 || frame.ranks() != [1, 1, 2] {
        return None;
    }
    let u1 = row3(frame, 0, 0).normalize();
    let u2 = row3(frame, 1, 0).normalize();
    let q_normal = u1.cross(&u2).try_normalize(1e-12)?;
    let s_normal = row3(frame, 2, 0)
        .cross(&row3(frame, 2, 1))
        .try_normalize(1e-12)?;
    let dihedral_angle = q_normal.dot(&s_normal).abs().min(1.0).acos();
    let w = q_normal.cross(&s_normal).try_normalize(1e-12)?;

    let mut best = None;
    for s2 in [1.0, -1.0] {
        for s3 in [1.0, -1.0] {
            let (v2, v3) = (u2 * s2, w * s3);
            let residual = (u1 + v2 + v3).norm();
            if best.as_ref().is_none_or(|(r, _, _)| residual < *r) {
                best = Some((residual, v2, v3));
            }
        }
    }
    let (_, v2, v3) = best?;
    let line_angles = [angle(&u1, &v2), angle(&u1, &v3), angle(&v2, &v3)];
    let max_angle_error = line_angles
        .iter()
        .map(|a| (a - 2.0 * PI / 3.0).abs())
        .fold(0.0, f64::max);
    Some(MinimizerGeometry {
        dihedral_angle,
        line_angles,
        max_angle_error,
    })
}
