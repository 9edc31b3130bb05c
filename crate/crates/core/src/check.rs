//! Randomized invariant suite behind the `check` subcommand.
//!
//! Every group draws from its own seeded stream, so the report is a pure
//! function of the suite settings.

use std::fmt;

use nalgebra::{Matrix3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{adjoint, vee_unchecked, AlgebraElement, GroupElement, InertiaTensor};
use crate::integrators::{step_lps, Method, StepperConfig};
use crate::oracle::oracle_step;
use crate::retraction::{dtau_left, dtau_left_dual_matrix, dtau_right, tau, tau_inv, RetractionKind};
use crate::suslov::{SuslovState, SuslovSystem};

pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_SEED: u64 = 0x5eed;

pub const ROUND_TRIP_TOL: f64 = 1e-12;
pub const FD_STEP: f64 = 1e-6;
pub const FD_TOL: f64 = 1e-8;
pub const ADJOINT_TOL: f64 = 1e-13;
pub const DUALITY_TOL: f64 = 1e-10;
pub const ORACLE_TOL: f64 = 1e-12;

pub type DualMatrixFn = fn(RetractionKind, &AlgebraElement) -> Matrix3<f64>;

#[derive(Clone, Copy)]
pub struct CheckSuite {
    pub samples: usize,
    pub seed: u64,
    /// Dual-matrix implementation under test; swapped out by mutation tests.
    pub dual_matrix: DualMatrixFn,
}

impl Default for CheckSuite {
    fn default() -> Self {
        CheckSuite {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            dual_matrix: dtau_left_dual_matrix,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupResult {
    pub name: String,
    pub samples: usize,
    /// Largest observed error; NaN-safe, a failed evaluation is recorded as ∞.
    pub max_error: f64,
    pub tolerance: f64,
}

impl GroupResult {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

impl fmt::Display for GroupResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<34} samples={:<5} max_err={:.3e} tol={:.0e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.samples,
            self.max_error,
            self.tolerance
        )
    }
}

fn max_err(acc: f64, e: f64) -> f64 {
    if e.is_nan() {
        f64::INFINITY
    } else {
        acc.max(e)
    }
}

/// Uniform in the ball of radius `r`.
pub fn sample_ball(rng: &mut impl Rng, r: f64) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if v.norm_squared() <= 1.0 {
            return r * v;
        }
    }
}

/// Random rotation by an angle below `max_angle`.
pub fn sample_rotation(rng: &mut impl Rng, max_angle: f64) -> GroupElement {
    tau(RetractionKind::Exponential, &sample_ball(rng, max_angle))
}

fn stream(seed: u64, group: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(group);
    rng
}

/// Largest radius sampled in the algebra, per retraction.
fn radius(kind: RetractionKind) -> f64 {
    match kind {
        RetractionKind::Exponential => 2.0,
        RetractionKind::Cayley => 10.0,
    }
}

pub fn round_trip_algebra(kind: RetractionKind, samples: usize, rng: &mut impl Rng) -> f64 {
    (0..samples).fold(0.0, |acc, _| {
        let x = sample_ball(rng, radius(kind));
        let e = tau_inv(kind, &tau(kind, &x)).map_or(f64::INFINITY, |y| (y - x).amax());
        max_err(acc, e)
    })
}

pub fn round_trip_group(kind: RetractionKind, samples: usize, rng: &mut impl Rng) -> f64 {
    (0..samples).fold(0.0, |acc, _| {
        let g = sample_rotation(rng, 3.0);
        let e = tau_inv(kind, &g).map_or(f64::INFINITY, |x| (tau(kind, &x).matrix() - g.matrix()).amax());
        max_err(acc, e)
    })
}

/// `dtau_left` against the central difference of `τ(ξ)⁻¹ τ(ξ + εη)`.
pub fn derivative_fd(kind: RetractionKind, samples: usize, rng: &mut impl Rng) -> f64 {
    (0..samples).fold(0.0, |acc, _| {
        let xi = sample_ball(rng, 2.0);
        let eta = sample_ball(rng, 1.0);
        let g_inv = tau(kind, &xi).inverse();
        let plus = (g_inv * tau(kind, &(xi + FD_STEP * eta))).matrix().clone_owned();
        let minus = (g_inv * tau(kind, &(xi - FD_STEP * eta))).matrix().clone_owned();
        let fd = vee_unchecked(&((plus - minus) / (2.0 * FD_STEP)));
        max_err(acc, (dtau_left(kind, &xi, &eta) - fd).norm())
    })
}

pub fn right_is_adjoint_of_left(kind: RetractionKind, samples: usize, rng: &mut impl Rng) -> f64 {
    (0..samples).fold(0.0, |acc, _| {
        let xi = sample_ball(rng, radius(kind));
        let eta = sample_ball(rng, 1.0);
        let lhs = dtau_right(kind, &xi, &eta);
        let rhs = adjoint(&tau(kind, &xi), &dtau_left(kind, &xi, &eta));
        max_err(acc, (lhs - rhs).amax())
    })
}

/// `⟨M(w) μ, η⟩ = ⟨μ, d^L_w τ(η)⟩` for the supplied dual matrix.
pub fn dual_duality(kind: RetractionKind, dual: DualMatrixFn, samples: usize, rng: &mut impl Rng) -> f64 {
    (0..samples).fold(0.0, |acc, _| {
        let w = sample_ball(rng, radius(kind));
        let mu = sample_ball(rng, 1.0);
        let eta = sample_ball(rng, 1.0);
        let lhs = (dual(kind, &w) * mu).dot(&eta);
        let rhs = mu.dot(&dtau_left(kind, &w, &eta));
        max_err(acc, (lhs - rhs).abs())
    })
}

/// Random single steps of the adapted stepper against [`oracle_step`],
/// compared componentwise over the resulting attitude and momentum.
pub fn oracle_equivalence(kind: RetractionKind, samples: usize, rng: &mut impl Rng) -> f64 {
    let method = match kind {
        RetractionKind::Exponential => Method::LpsExp,
        RetractionKind::Cayley => Method::LpsCayley,
    };
    (0..samples).fold(0.0, |acc, _| {
        let inertia = [0; 3].map(|_| rng.random_range(0.5..20.0));
        let sys = SuslovSystem::new(InertiaTensor::new(inertia).expect("positive draw"));
        let state = SuslovState::new(
            sample_rotation(rng, 3.0),
            Vector2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
        );
        let dt = rng.random_range(1e-3..0.1);
        let e = StepperConfig::new(method, dt)
            .and_then(|cfg| step_lps(&sys, kind, &state, &cfg))
            .and_then(|a| oracle_step(&sys, kind, &state, dt).map(|b| (a, b)))
            .map_or(f64::INFINITY, |(a, b)| {
                let dr = (a.state.rotation.matrix() - b.state.rotation.matrix()).amax();
                let dm = (a.state.momentum - b.state.momentum).amax();
                dr.max(dm)
            });
        max_err(acc, e)
    })
}

impl CheckSuite {
    pub fn run(&self) -> Vec<GroupResult> {
        let n = self.samples;
        let mut out = Vec::new();
        let mut group = 0u64;
        let mut push = |name: String, tol: f64, f: &dyn Fn(&mut ChaCha8Rng) -> f64| {
            group += 1;
            let mut rng = stream(self.seed, group);
            out.push(GroupResult { name, samples: n, max_error: f(&mut rng), tolerance: tol });
        };
        for kind in RetractionKind::ALL {
            push(format!("round-trip-algebra[{kind}]"), ROUND_TRIP_TOL, &|r| round_trip_algebra(kind, n, r));
            push(format!("round-trip-group[{kind}]"), ROUND_TRIP_TOL, &|r| round_trip_group(kind, n, r));
            push(format!("derivative-fd[{kind}]"), FD_TOL, &|r| derivative_fd(kind, n, r));
            push(format!("right-adjoint-left[{kind}]"), ADJOINT_TOL, &|r| right_is_adjoint_of_left(kind, n, r));
            push(format!("dual-duality[{kind}]"), DUALITY_TOL, &|r| dual_duality(kind, self.dual_matrix, n, r));
            push(format!("oracle-single-step[{kind}]"), ORACLE_TOL, &|r| oracle_equivalence(kind, n, r));
        }
        out
    }
}
