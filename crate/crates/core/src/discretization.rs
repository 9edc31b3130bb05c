//! Discretization maps `𝒟(g, ξ) = (g τ(−sξ), g τ((1 − s)ξ))` and the inverses
//! of their cotangent lift and of its constraint-adapted projection.

use crate::algebra::{coadjoint, AlgebraElement, CoAlgebraElement, GroupElement};
use crate::constraint::ConstraintSubspace;
use crate::error::{Error, Result};
use crate::retraction::{dtau_left_dual_matrix, tau, tau_inv, RetractionKind};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscretizationScheme {
    kind: RetractionKind,
    s: f64,
}

/// Output of a lifted inverse, in display order: base point, momentum slot,
/// velocity slot, force slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftedInverse {
    pub base: GroupElement,
    pub momentum: CoAlgebraElement,
    pub velocity: AlgebraElement,
    pub force: CoAlgebraElement,
}

/// [`LiftedInverse`] of the constraint-adapted map, together with the part of
/// τ⁻¹(g_k⁻¹ g_{k+1}) that the projection onto 𝔡 threw away.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptedInverse {
    pub tuple: LiftedInverse,
    pub discarded_velocity: AlgebraElement,
}

impl DiscretizationScheme {
    pub fn new(kind: RetractionKind, s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::invalid(format!("discretization parameter s = {s} not in [0, 1]")));
        }
        Ok(DiscretizationScheme { kind, s })
    }

    /// The one-sided scheme `𝒟(g, ξ) = (g, g τ(ξ))` used by the integrators.
    pub fn forward(kind: RetractionKind) -> Self {
        DiscretizationScheme { kind, s: 0.0 }
    }

    pub fn kind(&self) -> RetractionKind {
        self.kind
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn discretize(&self, g: &GroupElement, xi: &AlgebraElement) -> (GroupElement, GroupElement) {
        (
            g * &tau(self.kind, &(-self.s * xi)),
            g * &tau(self.kind, &((1.0 - self.s) * xi)),
        )
    }

    pub fn discretize_inv(&self, g1: &GroupElement, g2: &GroupElement) -> Result<(GroupElement, AlgebraElement)> {
        let delta = g1.inverse() * *g2;
        let xi = match self.kind {
            // exp(sξ) exp((1 − s)ξ) = exp(ξ)
            RetractionKind::Exponential => tau_inv(self.kind, &delta)?,
            RetractionKind::Cayley => {
                // The two half-turns add up as tangents: with T = tan(φ/2) of
                // the total rotation, ‖ξ‖ solves T s(1−s)/4 r² + r/2 − T = 0.
                let full = tau_inv(self.kind, &delta)?;
                let t = 0.5 * full.norm();
                let a = t * t * self.s * (1.0 - self.s);
                full / (0.5 + (0.25 + a).sqrt())
            }
        };
        let g = g1 * &tau(self.kind, &(self.s * xi));
        Ok((g, xi))
    }

    fn require_forward(&self) -> Result<()> {
        if self.s != 0.0 {
            return Err(Error::invalid(format!(
                "lifted inverses are only available for s = 0 (got s = {})",
                self.s
            )));
        }
        Ok(())
    }

    /// Inverse of the cotangent-lifted discretization:
    /// `(g_k, d^{L*}_ξ τ(μ_{k+1}), ξ, Ad*_{Δ⁻¹}(μ_{k+1}) − μ_k)` with
    /// `Δ = g_k⁻¹ g_{k+1}` and `ξ = τ⁻¹(Δ)`.
    pub fn cotangent_lift_inv(
        &self,
        g_k: &GroupElement,
        mu_k: &CoAlgebraElement,
        g_k1: &GroupElement,
        mu_k1: &CoAlgebraElement,
    ) -> Result<LiftedInverse> {
        self.require_forward()?;
        let delta = g_k.inverse() * *g_k1;
        let xi = tau_inv(self.kind, &delta)?;
        Ok(LiftedInverse {
            base: *g_k,
            momentum: dtau_left_dual_matrix(self.kind, &xi) * mu_k1,
            velocity: xi,
            force: coadjoint(&delta.inverse(), mu_k1) - mu_k,
        })
    }

    /// Inverse of the constraint-adapted discretization. Momenta must already
    /// lie in 𝔡*; the velocity slot is the 𝔡 part of τ⁻¹(Δ) and both momentum
    /// slots are projected back to 𝔡*.
    pub fn constraint_adapted_inv(
        &self,
        sub: &ConstraintSubspace,
        g_k: &GroupElement,
        mubar_k: &CoAlgebraElement,
        g_k1: &GroupElement,
        mubar_k1: &CoAlgebraElement,
    ) -> Result<AdaptedInverse> {
        self.require_forward()?;
        for (name, mu) in [("μ̄_k", mubar_k), ("μ̄_{k+1}", mubar_k1)] {
            if sub.complement_norm(mu) != 0.0 {
                return Err(Error::invalid(format!(
                    "{name} = {:?} has nonzero (𝔡⊥)* components",
                    mu.as_slice()
                )));
            }
        }
        let delta = g_k.inverse() * *g_k1;
        let xi = tau_inv(self.kind, &delta)?;
        let xi_d = sub.project_d(&xi);
        Ok(AdaptedInverse {
            tuple: LiftedInverse {
                base: *g_k,
                momentum: sub.project_dual(&(dtau_left_dual_matrix(self.kind, &xi_d) * mubar_k1)),
                velocity: xi_d,
                force: sub.project_dual(&(coadjoint(&delta.inverse(), mubar_k1) - mubar_k)),
            },
            discarded_velocity: xi - xi_d,
        })
    }
}

impl Default for DiscretizationScheme {
    fn default() -> Self {
        Self::forward(RetractionKind::Exponential)
    }
}
