//! Local diffeomorphisms τ: so(3) → SO(3) and their trivialized derivatives.
//!
//! Both maps satisfy τ(0) = I and d/dt τ(tx)|₀ = hat(x). The Cayley map is
//! therefore the half-argument form τ(x) = (I − x̂/2)⁻¹(I + x̂/2), which
//! rotates by 2·atan(‖x‖/2).
//!
//! The left logarithmic derivative is `d^L_ξτ(η) = d/dt|₀ τ(ξ)⁻¹ τ(ξ + tη)`
//! and the right one is `d^R_ξτ = Ad_{τ(ξ)} ∘ d^L_ξτ`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};

use crate::algebra::{hat, AlgebraElement, GroupElement};
use crate::error::{Error, Result};

/// Below this angle the trigonometric coefficients switch to Taylor series.
const TAYLOR_THRESHOLD: f64 = 1e-4;

/// Rotations closer than this to angle π are outside the domain of the matrix logarithm.
const LOG_PI_MARGIN: f64 = 1e-9;

/// Smallest accepted 1 + tr(R) for the inverse Cayley map.
const CAYLEY_TRACE_MARGIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RetractionKind {
    Exponential,
    Cayley,
}

impl RetractionKind {
    pub const ALL: [RetractionKind; 2] = [RetractionKind::Exponential, RetractionKind::Cayley];

    pub fn name(self) -> &'static str {
        match self {
            RetractionKind::Exponential => "exponential",
            RetractionKind::Cayley => "cayley",
        }
    }
}

impl fmt::Display for RetractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RetractionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Ok(RetractionKind::Exponential),
            "cay" | "cayley" => Ok(RetractionKind::Cayley),
            other => Err(Error::invalid(format!("unknown retraction '{other}'"))),
        }
    }
}

/// Below this angle (θ − sin θ)/θ³ is evaluated by its series.
const SERIES_THRESHOLD: f64 = 0.25;

/// (1 − cos θ)/θ² and (θ − sin θ)/θ³.
fn exp_coefficients(theta: f64) -> (f64, f64) {
    let half = sinc(0.5 * theta);
    let a = 0.5 * half * half;
    let t2 = theta * theta;
    let b = if theta < SERIES_THRESHOLD {
        1.0 / 6.0
            + t2 * (-1.0 / 120.0
                + t2 * (1.0 / 5040.0 + t2 * (-1.0 / 362880.0 + t2 * (1.0 / 39916800.0 - t2 / 6227020800.0))))
    } else {
        (theta - theta.sin()) / (t2 * theta)
    };
    (a, b)
}

/// sin θ / θ
fn sinc(theta: f64) -> f64 {
    if theta < TAYLOR_THRESHOLD {
        let t2 = theta * theta;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0 - t2 * t2 * t2 / 5040.0
    } else {
        theta.sin() / theta
    }
}

pub fn tau(kind: RetractionKind, x: &AlgebraElement) -> GroupElement {
    let k = hat(x);
    let m = match kind {
        RetractionKind::Exponential => {
            let theta = x.norm();
            let (a, _) = exp_coefficients(theta);
            Matrix3::identity() + sinc(theta) * k + a * k * k
        }
        RetractionKind::Cayley => {
            let c = 4.0 / (4.0 + x.norm_squared());
            Matrix3::identity() + c * (k + 0.5 * k * k)
        }
    };
    GroupElement::from_matrix_unchecked(m)
}

pub fn tau_inv(kind: RetractionKind, r: &GroupElement) -> Result<AlgebraElement> {
    let m = r.matrix();
    // vee(R − Rᵀ)/2 = sin θ · axis
    let axial = 0.5 * Vector3::new(m.m32 - m.m23, m.m13 - m.m31, m.m21 - m.m12);
    match kind {
        RetractionKind::Exponential => log_so3(m, &axial),
        RetractionKind::Cayley => {
            let denom = 1.0 + m.trace();
            if !(denom > CAYLEY_TRACE_MARGIN) {
                return Err(Error::Domain {
                    kind: RetractionKind::Cayley.name(),
                    angle: r.angle(),
                });
            }
            Ok(axial * (4.0 / denom))
        }
    }
}

fn log_so3(m: &Matrix3<f64>, axial: &Vector3<f64>) -> Result<AlgebraElement> {
    let s = axial.norm();
    let c = 0.5 * (m.trace() - 1.0);
    let theta = s.atan2(c);
    if PI - theta < LOG_PI_MARGIN {
        return Err(Error::Domain {
            kind: RetractionKind::Exponential.name(),
            angle: theta,
        });
    }
    if c > -0.5 {
        // θ < 2π/3: the antisymmetric part is well conditioned.
        return Ok(axial / sinc(theta));
    }
    // Near π, recover the axis from R + Rᵀ = 2cI + 2(1 − c) n nᵀ.
    let sym = (m + m.transpose() - 2.0 * c * Matrix3::identity()) / (2.0 * (1.0 - c));
    let i = (0..3)
        .max_by(|&i, &j| sym[(i, i)].total_cmp(&sym[(j, j)]))
        .unwrap_or(0);
    let mut axis: Vector3<f64> = sym.column(i).into_owned() / sym[(i, i)].max(0.0).sqrt();
    axis.normalize_mut();
    if axis.dot(axial) < 0.0 {
        axis = -axis;
    }
    Ok(theta * axis)
}

/// Matrix of η ↦ d^L_ξτ(η).
pub fn dtau_left_matrix(kind: RetractionKind, xi: &AlgebraElement) -> Matrix3<f64> {
    let k = hat(xi);
    match kind {
        RetractionKind::Exponential => {
            let (a, b) = exp_coefficients(xi.norm());
            Matrix3::identity() - a * k + b * k * k
        }
        RetractionKind::Cayley => {
            (Matrix3::identity() - 0.5 * k) * (4.0 / (4.0 + xi.norm_squared()))
        }
    }
}

pub fn dtau_left(kind: RetractionKind, xi: &AlgebraElement, eta: &AlgebraElement) -> AlgebraElement {
    dtau_left_matrix(kind, xi) * eta
}

pub fn dtau_right(kind: RetractionKind, xi: &AlgebraElement, eta: &AlgebraElement) -> AlgebraElement {
    let k = hat(xi);
    let m = match kind {
        RetractionKind::Exponential => {
            let (a, b) = exp_coefficients(xi.norm());
            Matrix3::identity() + a * k + b * k * k
        }
        RetractionKind::Cayley => {
            (Matrix3::identity() + 0.5 * k) * (4.0 / (4.0 + xi.norm_squared()))
        }
    };
    m * eta
}

/// The matrix `M(w)` with `⟨M(w) p, η⟩ = ⟨p, d^L_wτ(η)⟩`, i.e. the transpose
/// of [`dtau_left_matrix`]. It multiplies the momentum in the implicit
/// velocity equations:
///
/// * exponential: `I + (1 − cos θ)/θ² ŵ + (θ − sin θ)/θ³ ŵ²`, θ = ‖w‖,
/// * Cayley: `2(2I + ŵ)/(4 + ‖w‖²)`.
pub fn dtau_left_dual_matrix(kind: RetractionKind, w: &AlgebraElement) -> Matrix3<f64> {
    let k = hat(w);
    match kind {
        RetractionKind::Exponential => {
            let (a, b) = exp_coefficients(w.norm());
            Matrix3::identity() + a * k + b * k * k
        }
        RetractionKind::Cayley => {
            (2.0 * Matrix3::identity() + k) * (2.0 / (4.0 + w.norm_squared()))
        }
    }
}
