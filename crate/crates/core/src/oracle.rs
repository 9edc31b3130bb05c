//! Reference single step built directly from the constraint-adapted inverse.
//!
//! The unknowns are the next attitude, parametrized as `R_k τ(t(Ω₁, Ω₂, 0))`,
//! and the next restricted momentum. The residual asks that the inverse
//! discretization of the step pair equals `t` times the vector field evaluated
//! at the momentum slot:
//!
//! ```text
//! velocity slot − t ξ(momentum slot) = 0
//! force slot    − t μ̇               = 0
//! ```
//!
//! This shares no code with the steppers beyond τ and its inverse, so it
//! serves as an independent check of their reduced formulation.

use nalgebra::{Vector2, Vector3, Vector4};

use crate::discretization::DiscretizationScheme;
use crate::error::{Error, Result};
use crate::integrators::newton;
use crate::retraction::{tau, RetractionKind};
use crate::suslov::{vector_field, SuslovState, SuslovSystem};

pub const ORACLE_TOL: f64 = 1e-15;
const ORACLE_MAX_ITER: usize = 60;

/// Residual of the assembled step equations at unknowns `(Ω₁, Ω₂, μ₁, μ₂)`.
pub fn assembled_residual(
    sys: &SuslovSystem,
    kind: RetractionKind,
    state: &SuslovState,
    dt: f64,
    unknowns: &Vector4<f64>,
) -> Result<Vector4<f64>> {
    let scheme = DiscretizationScheme::forward(kind);
    let sub = sys.subspace();
    let xi = sub.include_d(&[dt * unknowns[0], dt * unknowns[1]]);
    let next_rotation = state.rotation * tau(kind, &xi);
    let next_momentum = sub.include_d(&[unknowns[2], unknowns[3]]);
    let inv = scheme.constraint_adapted_inv(sub, &state.rotation, &state.momentum_full(), &next_rotation, &next_momentum)?;
    let slot = inv.tuple;
    let at = SuslovState::new(slot.base, slot.momentum.xy());
    let (field, rate) = vector_field(sys, &at);
    // velocity rows scaled by 1/t so both blocks are O(1)
    let v = (slot.velocity - dt * field) / dt;
    let f = slot.force - dt * rate;
    Ok(Vector4::new(v.x, v.y, f.x, f.y))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleStep {
    pub state: SuslovState,
    pub omega: Vector2<f64>,
    pub residual: f64,
}

/// Solves the assembled equations for one step.
pub fn oracle_step(sys: &SuslovSystem, kind: RetractionKind, state: &SuslovState, dt: f64) -> Result<OracleStep> {
    let omega0 = sys.velocity(&state.momentum);
    let x0 = Vector4::new(omega0.x, omega0.y, state.momentum.x, state.momentum.y);
    let f = |x: &Vector4<f64>| assembled_residual(sys, kind, state, dt, x).unwrap_or(Vector4::repeat(f64::NAN));
    let (x, report) = newton(f, x0, ORACLE_TOL, ORACLE_MAX_ITER);
    // round-off in τ⁻¹ can leave the residual a few ulps above the target
    if !(report.final_residual <= 1e3 * ORACLE_TOL) {
        return Err(Error::NewtonFailed(report));
    }
    let omega = Vector2::new(x[0], x[1]);
    let xi = Vector3::new(dt * x[0], dt * x[1], 0.0);
    Ok(OracleStep {
        state: SuslovState::new(state.rotation * tau(kind, &xi), Vector2::new(x[2], x[3])),
        omega,
        residual: report.final_residual,
    })
}
