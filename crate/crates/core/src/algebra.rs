//! SO(3) and its Lie algebra so(3) ≅ ℝ³.
//!
//! Conventions used throughout the crate:
//!
//! * `hat(v) * w == v.cross(&w)`,
//! * the pairing between so(3)* and so(3) is the Euclidean dot product,
//! * `coadjoint(R, p) = Rᵀ p`, so that `⟨coadjoint(R, p), x⟩ = ⟨p, adjoint(R, x)⟩`.

use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Body angular velocity, or any element of so(3) in vector form.
pub type AlgebraElement = Vector3<f64>;

/// Body angular momentum, or any element of so(3)*.
pub type CoAlgebraElement = Vector3<f64>;

/// Tolerance on ‖RᵀR − I‖_F and |det R − 1| for a validated rotation.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Tolerance on ‖S + Sᵀ‖_F accepted by [`vee`].
pub const SKEW_TOL: f64 = 1e-8;

#[rustfmt::skip]
pub fn hat(v: &AlgebraElement) -> Matrix3<f64> {
    Matrix3::new(
         0.0, -v.z,  v.y,
         v.z,  0.0, -v.x,
        -v.y,  v.x,  0.0,
    )
}

/// Inverse of [`hat`]. Rejects matrices that are not skew-symmetric.
pub fn vee(s: &Matrix3<f64>) -> Result<AlgebraElement> {
    let asym = (s + s.transpose()).norm();
    if !(asym <= SKEW_TOL) {
        return Err(Error::invalid(format!(
            "matrix is not skew-symmetric (‖S + Sᵀ‖ = {asym:e})"
        )));
    }
    Ok(vee_unchecked(s))
}

pub(crate) fn vee_unchecked(s: &Matrix3<f64>) -> AlgebraElement {
    Vector3::new(s.m32, s.m13, s.m21)
}

/// Lie bracket on so(3): the cross product.
pub fn bracket(x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
    x.cross(y)
}

/// `Ad_R x = R x` (equivalently `vee(R hat(x) Rᵀ)`).
pub fn adjoint(r: &GroupElement, x: &AlgebraElement) -> AlgebraElement {
    r.0 * x
}

/// `Ad*_R p = Rᵀ p`, the dual of [`adjoint`] under the dot-product pairing.
pub fn coadjoint(r: &GroupElement, p: &CoAlgebraElement) -> CoAlgebraElement {
    r.0.tr_mul(p)
}

/// A rotation matrix.
#[derive(Clone, Copy, PartialEq)]
pub struct GroupElement(Matrix3<f64>);

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement(Matrix3::identity())
    }

    /// Validates orthogonality and orientation to [`ORTHOGONALITY_TOL`].
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let g = GroupElement(m);
        let (ortho, det) = (g.ortho_defect(), g.det_defect());
        if !(ortho <= ORTHOGONALITY_TOL && det <= ORTHOGONALITY_TOL) {
            return Err(Error::invalid(format!(
                "not a rotation matrix: ‖RᵀR − I‖ = {ortho:e}, |det R − 1| = {det:e}"
            )));
        }
        Ok(g)
    }

    /// Row-major constructor, validated like [`GroupElement::new`].
    pub fn from_row_slice(entries: &[f64]) -> Result<Self> {
        if entries.len() != 9 {
            return Err(Error::invalid(format!(
                "rotation needs 9 entries, got {}",
                entries.len()
            )));
        }
        Self::new(Matrix3::from_row_slice(entries))
    }

    /// Wraps a matrix known to be a rotation (products and retractions of rotations).
    pub(crate) fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        GroupElement(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        GroupElement(self.0.transpose())
    }

    /// ‖RᵀR − I‖_F
    pub fn ortho_defect(&self) -> f64 {
        (self.0.tr_mul(&self.0) - Matrix3::identity()).norm()
    }

    /// |det R − 1|
    pub fn det_defect(&self) -> f64 {
        (self.0.determinant() - 1.0).abs()
    }

    /// Rotation angle in [0, π], from the trace.
    pub fn angle(&self) -> f64 {
        ((self.0.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: GroupElement) -> GroupElement {
        GroupElement(self.0 * rhs.0)
    }
}

impl Mul<&GroupElement> for &GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: &GroupElement) -> GroupElement {
        GroupElement(self.0 * rhs.0)
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("GroupElement").field(&self.0).finish()
    }
}

/// Diagonal inertia matrix diag(𝓘₁₁, 𝓘₂₂, 𝓘₃₃) in the body frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InertiaTensor(Vector3<f64>);

impl InertiaTensor {
    pub fn new(diag: [f64; 3]) -> Result<Self> {
        if let Some(bad) = diag.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(Error::invalid(format!(
                "inertia entries must be finite and strictly positive, got {bad}"
            )));
        }
        Ok(InertiaTensor(Vector3::from(diag)))
    }

    pub fn diag(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&self.0)
    }

    /// 𝓘 Ω
    pub fn apply(&self, omega: &AlgebraElement) -> CoAlgebraElement {
        self.0.component_mul(omega)
    }

    /// 𝓘⁻¹ Π
    pub fn apply_inverse(&self, pi: &CoAlgebraElement) -> AlgebraElement {
        pi.component_div(&self.0)
    }
}

/// Structure constants `C_ab^k` of so(3) in a given basis:
/// `[e_a, e_b] = Σ_k C_ab^k e_k`.
#[derive(Clone, Debug)]
pub struct StructureConstants {
    coeffs: [[[f64; 3]; 3]; 3],
    in_d: [bool; 3],
}

impl StructureConstants {
    /// `C_ab^k`, zero-based basis positions.
    pub fn coeff(&self, a: usize, b: usize, k: usize) -> f64 {
        self.coeffs[a][b][k]
    }

    /// True when the brackets of 𝔡-basis vectors stay inside 𝔡, i.e. the
    /// constraint is holonomic.
    pub fn closes_on_d(&self) -> bool {
        let d: Vec<usize> = (0..3).filter(|&i| self.in_d[i]).collect();
        let perp: Vec<usize> = (0..3).filter(|&i| !self.in_d[i]).collect();
        d.iter().all(|&a| {
            d.iter()
                .all(|&b| perp.iter().all(|&k| self.coeffs[a][b][k] == 0.0))
        })
    }

    /// Rebuilds `[e_a, e_b]` from the table.
    pub fn reconstruct(&self, basis: &[AlgebraElement; 3], a: usize, b: usize) -> AlgebraElement {
        (0..3).map(|k| self.coeffs[a][b][k] * basis[k]).sum()
    }
}

/// Computes the structure constants for `basis`, whose vectors at
/// `d_indices` span the constraint subspace.
pub fn structure_constants(
    basis: &[AlgebraElement; 3],
    d_indices: &[usize],
) -> Result<StructureConstants> {
    let frame = Matrix3::from_columns(basis);
    let scale = basis.iter().map(|e| e.norm()).product::<f64>();
    if !(scale > 0.0) || frame.determinant().abs() <= 1e-12 * scale {
        return Err(Error::invalid("basis does not span so(3)"));
    }
    let inv = frame
        .try_inverse()
        .ok_or_else(|| Error::invalid("basis does not span so(3)"))?;

    let mut in_d = [false; 3];
    for &i in d_indices {
        if i >= 3 || in_d[i] {
            return Err(Error::invalid(format!("bad constraint index set {d_indices:?}")));
        }
        in_d[i] = true;
    }

    let mut coeffs = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let c = inv * bracket(&basis[a], &basis[b]);
            coeffs[a][b] = [c.x, c.y, c.z];
        }
    }
    Ok(StructureConstants { coeffs, in_d })
}
