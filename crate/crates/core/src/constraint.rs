//! The splitting so(3) = 𝔡 ⊕ 𝔡⊥ and its dual, as coordinate masks.
//!
//! Projections zero whole coordinates, so anything that passes through them
//! has exactly zero complement components.

use crate::algebra::{structure_constants, AlgebraElement, CoAlgebraElement, InertiaTensor, StructureConstants};
use crate::error::{Error, Result};
use nalgebra::Vector3;

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSubspace {
    d_indices: Vec<usize>,
    complement_indices: Vec<usize>,
    basis: [AlgebraElement; 3],
}

impl ConstraintSubspace {
    /// 𝔡 spanned by the standard basis vectors at `d_indices` (zero-based).
    pub fn new(d_indices: &[usize]) -> Result<Self> {
        let mut seen = [false; 3];
        for &i in d_indices {
            if i >= 3 || seen[i] {
                return Err(Error::invalid(format!(
                    "constraint indices {d_indices:?} do not form a subset of {{0, 1, 2}}"
                )));
            }
            seen[i] = true;
        }
        let complement_indices = (0..3).filter(|&i| !seen[i]).collect();
        Ok(ConstraintSubspace {
            d_indices: d_indices.to_vec(),
            complement_indices,
            basis: [Vector3::x(), Vector3::y(), Vector3::z()],
        })
    }

    /// The Suslov splitting 𝔡 = span{e₁, e₂}, 𝔡⊥ = span{e₃}.
    pub fn suslov() -> Self {
        Self::new(&[0, 1]).expect("static index set")
    }

    pub fn d_indices(&self) -> &[usize] {
        &self.d_indices
    }

    pub fn complement_indices(&self) -> &[usize] {
        &self.complement_indices
    }

    pub fn dim(&self) -> usize {
        self.d_indices.len()
    }

    pub fn basis(&self) -> &[AlgebraElement; 3] {
        &self.basis
    }

    /// Checks that the adapted basis is orthogonal in the kinetic-energy inner product.
    pub fn is_orthogonal_for(&self, inertia: &InertiaTensor) -> bool {
        let i = inertia.matrix();
        (0..3).all(|a| {
            (0..3).all(|b| a == b || (self.basis[a].dot(&(i * self.basis[b]))).abs() <= 1e-14)
        })
    }

    pub fn structure_constants(&self) -> Result<StructureConstants> {
        structure_constants(&self.basis, &self.d_indices)
    }

    pub fn project_d(&self, x: &AlgebraElement) -> AlgebraElement {
        let mut out = *x;
        for &i in &self.complement_indices {
            out[i] = 0.0;
        }
        out
    }

    /// Places the restricted components at the 𝔡 positions.
    pub fn include_d(&self, x_d: &[f64]) -> AlgebraElement {
        assert_eq!(x_d.len(), self.d_indices.len(), "restricted vector has wrong length");
        let mut out = Vector3::zeros();
        for (&i, &v) in self.d_indices.iter().zip(x_d) {
            out[i] = v;
        }
        out
    }

    /// Inverse of [`include_d`](Self::include_d) on 𝔡.
    pub fn restrict(&self, x: &AlgebraElement) -> Vec<f64> {
        self.d_indices.iter().map(|&i| x[i]).collect()
    }

    /// ι*: keeps the 𝔡* components of a momentum.
    pub fn project_dual(&self, p: &CoAlgebraElement) -> CoAlgebraElement {
        self.project_d(p)
    }

    /// Largest complement component, in absolute value.
    pub fn complement_norm(&self, x: &Vector3<f64>) -> f64 {
        self.complement_indices
            .iter()
            .map(|&i| x[i].abs())
            .fold(0.0, f64::max)
    }
}
