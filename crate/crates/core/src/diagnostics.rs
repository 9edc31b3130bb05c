//! Per-step invariants and empirical convergence order.

use nalgebra::Vector3;

use crate::algebra::InertiaTensor;
use crate::error::{Error, Result};
use crate::integrators::{propagate, Method, StepperConfig};
use crate::retraction::{tau_inv, RetractionKind};
use crate::suslov::{exact_flow, FullState, SuslovState, SuslovSystem};

/// Smallest largest-step error for which a slope is still meaningful.
pub const DEGENERATE_ERROR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepDiagnostics {
    pub energy: f64,
    /// `|h − h₀| / |h₀|`, or the absolute difference when `h₀ = 0`.
    pub energy_error: f64,
    /// `|Π₃ / 𝓘₃₃|`, the size of the forbidden velocity component.
    pub constraint_violation: f64,
    pub ortho_defect: f64,
    pub det_defect: f64,
}

pub fn diagnose(sys: &SuslovSystem, state: &FullState, initial_energy: f64) -> StepDiagnostics {
    let energy = sys.kinetic_energy(&state.momentum);
    let diff = (energy - initial_energy).abs();
    StepDiagnostics {
        energy,
        energy_error: if initial_energy == 0.0 { diff } else { diff / initial_energy.abs() },
        constraint_violation: constraint_violation(sys.inertia(), &state.momentum),
        ortho_defect: state.rotation.ortho_defect(),
        det_defect: state.rotation.det_defect(),
    }
}

pub fn constraint_violation(inertia: &InertiaTensor, momentum: &Vector3<f64>) -> f64 {
    (momentum.z / inertia.diag().z).abs()
}

/// Distance between a numerical state and the reference:
/// `‖log(R_ref⁻¹ R)‖ + ‖Π_ref − Π‖`.
pub fn state_error(reference: &FullState, numerical: &FullState) -> Result<f64> {
    let rel = reference.rotation.inverse() * numerical.rotation;
    let angle = tau_inv(RetractionKind::Exponential, &rel)?.norm();
    Ok(angle + (reference.momentum - numerical.momentum).norm())
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderEstimate {
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of log(error) against log(dt).
    pub order: f64,
}

/// Fits the observed order from `error_at(dt)` over a strictly decreasing step list.
pub fn estimate_order_with(dts: &[f64], error_at: impl Fn(f64) -> Result<f64> + Sync) -> Result<OrderEstimate> {
    if dts.len() < 3 {
        return Err(Error::invalid(format!("need at least 3 step sizes, got {}", dts.len())));
    }
    if dts.iter().any(|&h| !(h.is_finite() && h > 0.0)) {
        return Err(Error::invalid("step sizes must be positive"));
    }
    if dts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("step sizes must be strictly decreasing"));
    }
    let error_at = &error_at;
    let errors: Vec<f64> = std::thread::scope(|scope| {
        let handles: Vec<_> = dts.iter().map(|&h| scope.spawn(move || error_at(h))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("order worker panicked"))
            .collect::<Result<_>>()
    })?;
    if !(errors[0] >= DEGENERATE_ERROR) {
        return Err(Error::DegenerateFit(format!(
            "error {:e} at the largest step is at round-off level",
            errors[0]
        )));
    }
    if errors.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::DegenerateFit(format!("errors {errors:?} are not all positive")));
    }
    let xs: Vec<f64> = dts.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(OrderEstimate {
        dts: dts.to_vec(),
        errors,
        order: sxy / sxx,
    })
}

/// Observed order of `method` against the exact flow at time `duration`.
pub fn estimate_order(
    sys: &SuslovSystem,
    method: Method,
    initial: &SuslovState,
    duration: f64,
    dts: &[f64],
) -> Result<OrderEstimate> {
    let exact: FullState = exact_flow(sys, initial, duration).into();
    estimate_order_with(dts, |dt| {
        let cfg = StepperConfig::new(method, dt)?;
        let end = propagate(sys, &cfg, &(*initial).into(), duration)?;
        state_error(&exact, &end)
    })
}
