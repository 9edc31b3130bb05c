//! The Suslov problem: a rigid body on SO(3) whose third body angular
//! velocity component is constrained to zero.
//!
//! The restricted reduced Hamiltonian is `h(Π) = ½(Π₁²/𝓘₁₁ + Π₂²/𝓘₂₂)` and
//! the reduced equations are `Π̇₁ = Π̇₂ = 0`, `Ṙ = R hat(Ω)` with
//! `Ω = (Π₁/𝓘₁₁, Π₂/𝓘₂₂, 0)`, so the exact flow is a one-parameter subgroup.

use nalgebra::{Vector2, Vector3};

use crate::algebra::{AlgebraElement, CoAlgebraElement, GroupElement, InertiaTensor};
use crate::constraint::ConstraintSubspace;
use crate::error::{Error, Result};
use crate::retraction::{tau, RetractionKind};

#[derive(Clone, Debug, PartialEq)]
pub struct SuslovSystem {
    inertia: InertiaTensor,
    subspace: ConstraintSubspace,
}

impl SuslovSystem {
    pub fn new(inertia: InertiaTensor) -> Self {
        SuslovSystem {
            inertia,
            subspace: ConstraintSubspace::suslov(),
        }
    }

    pub fn inertia(&self) -> &InertiaTensor {
        &self.inertia
    }

    pub fn subspace(&self) -> &ConstraintSubspace {
        &self.subspace
    }

    /// Restricted inertia diag(𝓘₁₁, 𝓘₂₂).
    pub fn restricted_inertia(&self) -> Vector2<f64> {
        self.inertia.diag().xy()
    }

    /// Body velocity `∂h/∂Π` for a restricted momentum.
    pub fn velocity(&self, momentum: &Vector2<f64>) -> Vector2<f64> {
        momentum.component_div(&self.restricted_inertia())
    }

    /// Full rigid-body energy `½ Πᵀ 𝓘⁻¹ Π`; equals [`hamiltonian`] on 𝔡*.
    pub fn kinetic_energy(&self, momentum: &CoAlgebraElement) -> f64 {
        0.5 * momentum.dot(&self.inertia.apply_inverse(momentum))
    }
}

/// Attitude and restricted momentum μ̄ ∈ 𝔡*. The third momentum component is
/// not stored, so it is zero by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuslovState {
    pub rotation: GroupElement,
    pub momentum: Vector2<f64>,
}

impl SuslovState {
    pub fn new(rotation: GroupElement, momentum: Vector2<f64>) -> Self {
        SuslovState { rotation, momentum }
    }

    pub fn momentum_full(&self) -> CoAlgebraElement {
        Vector3::new(self.momentum.x, self.momentum.y, 0.0)
    }
}

/// Attitude and unconstrained momentum Π ∈ so(3)*, for the unadapted comparator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FullState {
    pub rotation: GroupElement,
    pub momentum: CoAlgebraElement,
}

impl From<SuslovState> for FullState {
    fn from(s: SuslovState) -> Self {
        FullState {
            rotation: s.rotation,
            momentum: s.momentum_full(),
        }
    }
}

impl TryFrom<FullState> for SuslovState {
    type Error = Error;

    fn try_from(s: FullState) -> Result<Self> {
        if s.momentum.z != 0.0 {
            return Err(Error::invalid(format!(
                "momentum {:?} violates the constraint (Π₃ ≠ 0)",
                s.momentum.as_slice()
            )));
        }
        Ok(SuslovState::new(s.rotation, s.momentum.xy()))
    }
}

pub fn hamiltonian(sys: &SuslovSystem, state: &SuslovState) -> f64 {
    let v = sys.velocity(&state.momentum);
    0.5 * state.momentum.dot(&v)
}

/// Left-trivialized vector field `(ξ, μ̇)`: ξ = (𝓘^{11}Π₁, 𝓘^{22}Π₂, 0), μ̇ = 0.
pub fn vector_field(sys: &SuslovSystem, state: &SuslovState) -> (AlgebraElement, CoAlgebraElement) {
    let v = sys.velocity(&state.momentum);
    (Vector3::new(v.x, v.y, 0.0), Vector3::zeros())
}

/// Closed-form solution `(R₀ exp(t Ω₀), Π₀)`.
pub fn exact_flow(sys: &SuslovSystem, state0: &SuslovState, t: f64) -> SuslovState {
    let (omega, _) = vector_field(sys, state0);
    SuslovState::new(
        state0.rotation * tau(RetractionKind::Exponential, &(t * omega)),
        state0.momentum,
    )
}
