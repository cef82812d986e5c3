//! Linear algebra for the rotation group.
//!
//! Provides the hat/vee isomorphism between `R^3` and the space of 3x3
//! skew-symmetric matrices, the matrix exponential onto SO(3) in closed
//! (Rodrigues) form, and rotation-matrix validation. Everything here is a
//! pure function over immutable values.
//!
//! The hat map sends `w = (w1, w2, w3)` to
//!
//! ```text
//!         |  0   -w3   w2 |
//! w^  =   |  w3   0   -w1 |
//!         | -w2   w1   0  |
//! ```
//!
//! so that `hat(w) * v == w x v`. The vee map is its inverse. Strictly the
//! pair is a linear isomorphism, not merely a homeomorphism.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

/// Frobenius skew defect above which [`vee`] and [`SkewMat3::from_matrix`]
/// refuse the input instead of symmetrizing it.
pub const SKEW_DEFECT_LIMIT: f64 = 1e-9;

/// Default orthogonality tolerance for [`RotationMatrix::from_matrix`].
pub const ROTATION_TOL: f64 = 1e-9;

/// Below this angle the Rodrigues coefficients sin(t)/t and (1-cos t)/t^2
/// are evaluated by their fourth-order Taylor expansions; the direct
/// expressions lose digits to cancellation exactly where incremental
/// rotations live.
const SMALL_ANGLE: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum So3Error {
    /// The matrix handed to [`vee`] was not skew-symmetric within
    /// [`SKEW_DEFECT_LIMIT`].
    #[error("matrix is not skew-symmetric: defect {defect:.3e} exceeds {limit:.3e}")]
    NotSkewSymmetric { defect: f64, limit: f64 },
    /// The matrix failed the SO(3) membership test.
    #[error(
        "matrix is not a rotation: orthogonality defect {ortho_defect:.3e} \
         (tolerance {tol:.3e}), determinant {det}"
    )]
    NotRotation {
        ortho_defect: f64,
        det: f64,
        tol: f64,
    },
}

/// A 3x3 skew-symmetric matrix.
///
/// Only the three independent entries are stored, so `S + S^T = 0` holds
/// exactly by construction and `vee(hat(w)) == w` is bitwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewMat3 {
    axis: Vector3<f64>,
}

impl SkewMat3 {
    /// The zero element of the Lie algebra.
    pub fn zero() -> Self {
        Self {
            axis: Vector3::zeros(),
        }
    }

    /// Builds a skew matrix from a general 3x3 matrix.
    ///
    /// Inputs within [`SKEW_DEFECT_LIMIT`] of skew-symmetry are symmetrized
    /// by `(S - S^T)/2` before extraction; products such as `F*Jd - Jd*F^T`
    /// carry roundoff-level defects that would otherwise cause spurious
    /// rejections. Anything beyond the limit is an error.
    pub fn from_matrix(m: &Matrix3<f64>) -> Result<Self, So3Error> {
        let defect = (m + m.transpose()).norm();
        if defect > SKEW_DEFECT_LIMIT {
            return Err(So3Error::NotSkewSymmetric {
                defect,
                limit: SKEW_DEFECT_LIMIT,
            });
        }
        Ok(Self {
            axis: Vector3::new(
                0.5 * (m[(2, 1)] - m[(1, 2)]),
                0.5 * (m[(0, 2)] - m[(2, 0)]),
                0.5 * (m[(1, 0)] - m[(0, 1)]),
            ),
        })
    }

    /// The inverse of the hat map.
    pub fn vee(&self) -> Vector3<f64> {
        self.axis
    }

    /// Materializes the full 3x3 matrix.
    pub fn matrix(&self) -> Matrix3<f64> {
        let w = self.axis;
        Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
    }
}

impl From<SkewMat3> for Matrix3<f64> {
    fn from(s: SkewMat3) -> Self {
        s.matrix()
    }
}

/// The hat map: `hat(w) * v == w x v`.
pub fn hat(w: Vector3<f64>) -> SkewMat3 {
    SkewMat3 { axis: w }
}

/// The vee map on a general matrix; see [`SkewMat3::from_matrix`] for the
/// tolerance semantics.
pub fn vee(m: &Matrix3<f64>) -> Result<Vector3<f64>, So3Error> {
    SkewMat3::from_matrix(m).map(|s| s.vee())
}

/// Result of an SO(3) membership test; see [`validate_rotation`].
#[derive(Debug, Clone, Copy)]
pub struct RotationCheck {
    /// Whether the matrix passed at the requested tolerance.
    pub ok: bool,
    /// Measured `||R^T R - I||_F`.
    pub ortho_defect: f64,
    /// Measured determinant.
    pub det: f64,
}

/// Measures how far `m` is from SO(3). Reports, never fails: the defect and
/// determinant are returned whether or not the test passes.
pub fn validate_rotation(m: &Matrix3<f64>, tol: f64) -> RotationCheck {
    debug_assert!(tol > 0.0, "validation tolerance must be positive");
    let ortho_defect = (m.transpose() * m - Matrix3::identity()).norm();
    let det = m.determinant();
    RotationCheck {
        ok: ortho_defect <= tol && det > 0.0,
        ortho_defect,
        det,
    }
}

/// Projects an arbitrary matrix onto SO(3) (nearest rotation in the
/// Frobenius norm, via the polar factor of the SVD).
pub fn polar_project(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let u = svd.u.expect("SVD factors requested");
    let v_t = svd.v_t.expect("SVD factors requested");
    // Flip the last axis if needed so the determinant comes out +1.
    let sign = (u * v_t).determinant().signum();
    u * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, sign)) * v_t
}

/// A 3x3 matrix constrained to SO(3).
///
/// Instances come either from [`exp_so3`] (in SO(3) by construction), from
/// a validated cast of a raw matrix, or from composition of existing
/// rotations. Composition multiplies matrices verbatim: there is no hidden
/// renormalization anywhere, so drift introduced by long products is
/// observable rather than masked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Validates `m` against `||R^T R - I||_F <= tol` and `det R > 0`.
    pub fn from_matrix(m: &Matrix3<f64>, tol: f64) -> Result<Self, So3Error> {
        let check = validate_rotation(m, tol);
        if !check.ok {
            return Err(So3Error::NotRotation {
                ortho_defect: check.ortho_defect,
                det: check.det,
                tol,
            });
        }
        Ok(Self(*m))
    }

    /// Validates at a loose tolerance, then tightens the result by a single
    /// polar projection. Intended for ingesting user-supplied attitudes.
    pub fn from_matrix_projected(m: &Matrix3<f64>, tol: f64) -> Result<Self, So3Error> {
        let check = validate_rotation(m, tol);
        if !check.ok {
            return Err(So3Error::NotRotation {
                ortho_defect: check.ortho_defect,
                det: check.det,
                tol,
            });
        }
        Ok(Self(polar_project(m)))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// The inverse rotation. Transposition is exact, so no validity is lost.
    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }
}

impl std::ops::Mul for RotationMatrix {
    type Output = RotationMatrix;

    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * rhs.0)
    }
}

impl std::ops::Mul<Vector3<f64>> for RotationMatrix {
    type Output = Vector3<f64>;

    fn mul(self, v: Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }
}

/// The exponential map so(3) -> SO(3) in closed form:
///
/// ```text
/// exp(w^) = I + (sin t / t) w^ + ((1 - cos t)/t^2) (w^)^2,   t = |w|
/// ```
///
/// Exact on the group (up to roundoff) for any finite `w`; the result
/// passes [`validate_rotation`] at 1e-12 without projection.
pub fn exp_so3(w: Vector3<f64>) -> RotationMatrix {
    let (a, b) = rodrigues_coefficients(w.norm_squared());
    let s = hat(w).matrix();
    RotationMatrix(Matrix3::identity() + a * s + b * (s * s))
}

/// `(sin t / t, (1 - cos t)/t^2)` with the small-angle Taylor branch.
pub(crate) fn rodrigues_coefficients(theta_sq: f64) -> (f64, f64) {
    let theta = theta_sq.sqrt();
    if theta < SMALL_ANGLE {
        (
            1.0 - theta_sq / 6.0 + theta_sq * theta_sq / 120.0,
            0.5 - theta_sq / 24.0 + theta_sq * theta_sq / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta_sq)
    }
}
