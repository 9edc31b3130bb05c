//! Steppers for the Suslov problem.
//!
//! The constraint-adapted steppers (LPS-Exp, LPS-Cayley) solve, for the
//! restricted velocity Ω ∈ 𝔡 and Δ = τ(tΩ),
//!
//! ```text
//! P Ad*_{Δ⁻¹} μ̄_{k+1} = μ̄_k              (force slot vanishes)
//! P M(tΩ) μ̄_{k+1}     = 𝓘 Ω              (velocity slot equals t ∂h/∂μ)
//! R_{k+1}              = R_k Δ
//! ```
//!
//! where `M` is [`dtau_left_dual_matrix`] and `P` keeps the 𝔡* components.
//! The first line is linear in μ̄_{k+1}, so the unknown is Ω alone: a 2×2
//! nonlinear system solved by Newton's method.
//!
//! The unadapted comparator (LP-Exp) is the same construction without any
//! projection: the free rigid-body Lie–Poisson scheme
//! `Π_{k+1} = Δᵀ Π_k`, `M(tΩ) Π_{k+1} = 𝓘 Ω`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, SVector, Vector2, Vector3};

use crate::algebra::{GroupElement, ORTHOGONALITY_TOL};
use crate::diagnostics::{diagnose, StepDiagnostics};
use crate::error::{Error, Result};
use crate::retraction::{dtau_left_dual_matrix, tau, RetractionKind};
use crate::suslov::{FullState, SuslovState, SuslovSystem};

pub const DEFAULT_NEWTON_TOL: f64 = 1e-12;
pub const DEFAULT_NEWTON_MAX_ITER: usize = 25;

/// Upper bound on the number of steps of a single run.
pub const MAX_STEPS: f64 = 1e8;

/// Relative perturbation for the central-difference Jacobian.
const JACOBIAN_STEP: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Constraint-adapted, exponential retraction.
    LpsExp,
    /// Constraint-adapted, Cayley retraction.
    LpsCayley,
    /// Unadapted Lie–Poisson scheme, exponential retraction.
    LpExp,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::LpsExp, Method::LpsCayley, Method::LpExp];

    pub fn retraction(self) -> RetractionKind {
        match self {
            Method::LpsExp | Method::LpExp => RetractionKind::Exponential,
            Method::LpsCayley => RetractionKind::Cayley,
        }
    }

    pub fn is_constraint_adapted(self) -> bool {
        !matches!(self, Method::LpExp)
    }

    pub fn tag(self) -> &'static str {
        match self {
            Method::LpsExp => "lps-exp",
            Method::LpsCayley => "lps-cay",
            Method::LpExp => "lp-exp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lps-exp" => Ok(Method::LpsExp),
            "lps-cay" | "lps-cayley" => Ok(Method::LpsCayley),
            "lp-exp" => Ok(Method::LpExp),
            other => Err(Error::invalid(format!(
                "unknown method '{other}' (expected lps-exp, lps-cay or lp-exp)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperConfig {
    pub method: Method,
    pub dt: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl StepperConfig {
    pub fn new(method: Method, dt: f64) -> Result<Self> {
        Self::with_newton(method, dt, DEFAULT_NEWTON_TOL, DEFAULT_NEWTON_MAX_ITER)
    }

    pub fn with_newton(method: Method, dt: f64, newton_tol: f64, newton_max_iter: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        if !(newton_tol.is_finite() && newton_tol > 0.0) {
            return Err(Error::invalid(format!("Newton tolerance must be positive, got {newton_tol}")));
        }
        if newton_max_iter == 0 {
            return Err(Error::invalid("Newton iteration limit must be at least 1"));
        }
        Ok(StepperConfig {
            method,
            dt,
            newton_tol,
            newton_max_iter,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// ∞-norm of the residual at the returned iterate.
    pub final_residual: f64,
    pub converged: bool,
}

/// Newton's method with full steps and a central-difference Jacobian.
/// Converged means ‖f(x)‖_∞ ≤ tol.
pub(crate) fn newton<const N: usize>(
    f: impl Fn(&SVector<f64, N>) -> SVector<f64, N>,
    x0: SVector<f64, N>,
    tol: f64,
    max_iter: usize,
) -> (SVector<f64, N>, NewtonReport) {
    let mut x = x0;
    let mut r = f(&x);
    let mut iterations = 0;
    loop {
        let res = r.amax();
        if res <= tol || !res.is_finite() || iterations == max_iter {
            let converged = res <= tol;
            return (x, NewtonReport { iterations, final_residual: res, converged });
        }
        let mut jac = DMatrix::<f64>::zeros(N, N);
        for j in 0..N {
            let h = JACOBIAN_STEP * x[j].abs().max(1.0);
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let col = (f(&xp) - f(&xm)) / (2.0 * h);
            jac.column_mut(j).copy_from_slice(col.as_slice());
        }
        let Some(step) = jac.lu().solve(&DVector::from_column_slice((-r).as_slice())) else {
            return (x, NewtonReport { iterations, final_residual: res, converged: false });
        };
        x += SVector::<f64, N>::from_column_slice(step.as_slice());
        r = f(&x);
        iterations += 1;
    }
}

/// μ̄_{k+1} from `P Δ μ̄_{k+1} = μ̄_k`, i.e. the upper-left 2×2 block of Δ inverted.
fn transported_momentum(delta: &Matrix3<f64>, pi_k: &Vector2<f64>) -> Option<Vector2<f64>> {
    let block: Matrix2<f64> = delta.fixed_view::<2, 2>(0, 0).into_owned();
    block.try_inverse().map(|inv| inv * pi_k)
}

/// Residual of the adapted velocity equation, together with Δ and μ̄_{k+1}.
fn adapted_residual(
    sys: &SuslovSystem,
    kind: RetractionKind,
    pi_k: &Vector2<f64>,
    dt: f64,
    omega: &Vector2<f64>,
) -> (Vector2<f64>, Matrix3<f64>, Vector2<f64>) {
    let xi = Vector3::new(dt * omega.x, dt * omega.y, 0.0);
    let delta = *tau(kind, &xi).matrix();
    let next = transported_momentum(&delta, pi_k).unwrap_or(Vector2::repeat(f64::NAN));
    let m = dtau_left_dual_matrix(kind, &xi) * Vector3::new(next.x, next.y, 0.0);
    let residual = m.xy() - sys.restricted_inertia().component_mul(omega);
    (residual, delta, next)
}

fn solve_velocity(
    sys: &SuslovSystem,
    kind: RetractionKind,
    pi_k: &Vector2<f64>,
    dt: f64,
    cfg: &StepperConfig,
) -> Result<(Vector2<f64>, NewtonReport)> {
    if *pi_k == Vector2::zeros() {
        return Ok((Vector2::zeros(), NewtonReport { iterations: 0, final_residual: 0.0, converged: true }));
    }
    let (omega, report) = newton(
        |w| adapted_residual(sys, kind, pi_k, dt, w).0,
        sys.velocity(pi_k),
        cfg.newton_tol,
        cfg.newton_max_iter,
    );
    if report.converged {
        Ok((omega, report))
    } else {
        Err(Error::NewtonFailed(report))
    }
}

/// Restricted velocity for one LPS-Exp step from momentum `pi_k`.
pub fn solve_velocity_exp(
    sys: &SuslovSystem,
    pi_k: &Vector2<f64>,
    dt: f64,
    cfg: &StepperConfig,
) -> Result<(Vector2<f64>, NewtonReport)> {
    solve_velocity(sys, RetractionKind::Exponential, pi_k, dt, cfg)
}

/// Restricted velocity for one LPS-Cayley step from momentum `pi_k`.
pub fn solve_velocity_cayley(
    sys: &SuslovSystem,
    pi_k: &Vector2<f64>,
    dt: f64,
    cfg: &StepperConfig,
) -> Result<(Vector2<f64>, NewtonReport)> {
    solve_velocity(sys, RetractionKind::Cayley, pi_k, dt, cfg)
}

/// ∞-norm of the adapted velocity residual at `omega`.
pub fn velocity_residual(
    sys: &SuslovSystem,
    kind: RetractionKind,
    pi_k: &Vector2<f64>,
    dt: f64,
    omega: &Vector2<f64>,
) -> Vector2<f64> {
    adapted_residual(sys, kind, pi_k, dt, omega).0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptedStep {
    pub state: SuslovState,
    pub omega: Vector2<f64>,
    pub report: NewtonReport,
}

/// One step of a constraint-adapted integrator.
pub fn step_lps(
    sys: &SuslovSystem,
    kind: RetractionKind,
    state: &SuslovState,
    cfg: &StepperConfig,
) -> Result<AdaptedStep> {
    let (omega, report) = solve_velocity(sys, kind, &state.momentum, cfg.dt, cfg)?;
    let (_, delta, next) = adapted_residual(sys, kind, &state.momentum, cfg.dt, &omega);
    if !next.iter().all(|v| v.is_finite()) {
        return Err(Error::Domain {
            kind: kind.name(),
            angle: (cfg.dt * omega).norm(),
        });
    }
    Ok(AdaptedStep {
        state: SuslovState::new(
            state.rotation * GroupElement::from_matrix_unchecked(delta),
            next,
        ),
        omega,
        report,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FullStep {
    pub state: FullState,
    pub omega: Vector3<f64>,
    pub report: NewtonReport,
}

fn unadapted_residual(sys: &SuslovSystem, pi_k: &Vector3<f64>, dt: f64, omega: &Vector3<f64>) -> (Vector3<f64>, Matrix3<f64>, Vector3<f64>) {
    let kind = RetractionKind::Exponential;
    let xi = dt * omega;
    let delta = *tau(kind, &xi).matrix();
    let next = delta.tr_mul(pi_k);
    let residual = dtau_left_dual_matrix(kind, &xi) * next - sys.inertia().apply(omega);
    (residual, delta, next)
}

/// One step of the unadapted Lie–Poisson scheme on the full momentum.
pub fn step_lp_unadapted(sys: &SuslovSystem, state: &FullState, cfg: &StepperConfig) -> Result<FullStep> {
    let pi_k = state.momentum;
    let (omega, report) = if pi_k == Vector3::zeros() {
        (Vector3::zeros(), NewtonReport { iterations: 0, final_residual: 0.0, converged: true })
    } else {
        newton(
            |w| unadapted_residual(sys, &pi_k, cfg.dt, w).0,
            sys.inertia().apply_inverse(&pi_k),
            cfg.newton_tol,
            cfg.newton_max_iter,
        )
    };
    if !report.converged {
        return Err(Error::NewtonFailed(report));
    }
    let (_, delta, next) = unadapted_residual(sys, &pi_k, cfg.dt, &omega);
    Ok(FullStep {
        state: FullState {
            rotation: state.rotation * GroupElement::from_matrix_unchecked(delta),
            momentum: next,
        },
        omega,
        report,
    })
}

/// One row of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record {
    pub step: usize,
    pub time: f64,
    pub rotation: GroupElement,
    pub momentum: Vector3<f64>,
    /// Velocity solved for the step that produced this record; at step 0, ∂h/∂Π.
    pub omega: Vector3<f64>,
    pub diagnostics: StepDiagnostics,
}

/// Number of steps covering `duration`, which must be a whole multiple of `dt`.
pub fn step_count(dt: f64, duration: f64) -> Result<usize> {
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::invalid(format!("duration must be non-negative, got {duration}")));
    }
    let n = (duration / dt).round();
    if n > MAX_STEPS {
        return Err(Error::invalid(format!("{n} steps exceeds the limit of {MAX_STEPS}")));
    }
    if (n * dt - duration).abs() > 1e-9 * duration.max(dt) {
        return Err(Error::invalid(format!(
            "duration {duration} is not a whole number of steps of {dt}"
        )));
    }
    Ok(n as usize)
}

/// Runs `cfg.method` from `initial` for `duration` seconds, handing every
/// record (step 0 included) to `sink`.
pub fn simulate_with(
    sys: &SuslovSystem,
    cfg: &StepperConfig,
    initial: &FullState,
    duration: f64,
    mut sink: impl FnMut(&Record) -> Result<()>,
) -> Result<()> {
    let steps = step_count(cfg.dt, duration)?;
    for (what, r) in [("ortho", initial.rotation.ortho_defect()), ("det", initial.rotation.det_defect())] {
        if !(r <= ORTHOGONALITY_TOL) {
            return Err(Error::invalid(format!("initial attitude fails the {what} check ({r:e})")));
        }
    }
    let h0 = sys.kinetic_energy(&initial.momentum);
    let record = |step: usize, state: &FullState, omega: Vector3<f64>| Record {
        step,
        time: step as f64 * cfg.dt,
        rotation: state.rotation,
        momentum: state.momentum,
        omega,
        diagnostics: diagnose(sys, state, h0),
    };
    let fail = |step: usize, e: Error| Error::StepFailed { step, source: Box::new(e) };
    let omega0 = sys.inertia().apply_inverse(&initial.momentum);

    if cfg.method.is_constraint_adapted() {
        let kind = cfg.method.retraction();
        let mut state = SuslovState::try_from(*initial)?;
        sink(&record(0, initial, omega0))?;
        for k in 1..=steps {
            let out = step_lps(sys, kind, &state, cfg).map_err(|e| fail(k, e))?;
            state = out.state;
            let omega = Vector3::new(out.omega.x, out.omega.y, 0.0);
            sink(&record(k, &state.into(), omega))?;
        }
    } else {
        let mut state = *initial;
        sink(&record(0, initial, omega0))?;
        for k in 1..=steps {
            let out = step_lp_unadapted(sys, &state, cfg).map_err(|e| fail(k, e))?;
            state = out.state;
            sink(&record(k, &state, out.omega))?;
        }
    }
    Ok(())
}

pub fn simulate(sys: &SuslovSystem, cfg: &StepperConfig, initial: &FullState, duration: f64) -> Result<Vec<Record>> {
    let mut out = Vec::with_capacity(step_count(cfg.dt, duration)? + 1);
    simulate_with(sys, cfg, initial, duration, |r| {
        out.push(*r);
        Ok(())
    })?;
    Ok(out)
}

/// Final state of a run, without keeping the trajectory.
pub fn propagate(sys: &SuslovSystem, cfg: &StepperConfig, initial: &FullState, duration: f64) -> Result<FullState> {
    let mut last = *initial;
    simulate_with(sys, cfg, initial, duration, |r| {
        last = FullState { rotation: r.rotation, momentum: r.momentum };
        Ok(())
    })?;
    Ok(last)
}
