//! Equilibria of the contact-rate model and their stability.
//!
//! Every point of the segment `S = 0, R = 1 - I` is an equilibrium. At such a
//! point the planar Jacobian has eigenvalues `{0, tau}` and the full Jacobian
//! (rank one there) has `{0, 0, tau}`, with
//!
//! ```text
//! tau = mu * ((rho1 + rho2) * I - rho1)
//! ```
//!
//! so the sign of `tau` flips at `sigma = rho1 / (rho1 + rho2)`. Because every
//! neighbourhood of an equilibrium contains other equilibria, none of them can
//! attract nearby orbits to itself; [`StabilityClass`] has no
//! "asymptotically stable" variant for that reason.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::{self, FD_STEP};
use crate::models::{self, ModelId, Params, State2};

/// Default half-width of the band around `tau = 0` reported as marginal.
pub const DEFAULT_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityClass {
    /// Lyapunov stable: nearby orbits stay nearby but settle on a different equilibrium.
    Stable,
    Unstable,
    /// `tau` within the tie tolerance of zero.
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub point: State2,
    /// `{0, tau}`.
    pub eigen_planar: [f64; 2],
    /// `{0, 0, tau}`.
    pub eigen_full: [f64; 3],
    pub class: StabilityClass,
    pub sigma: f64,
}

impl EquilibriumReport {
    pub fn tau(&self) -> f64 {
        self.eigen_planar[1]
    }
}

/// `rho1 / (rho1 + rho2)`; does not depend on `mu`.
pub fn threshold_sigma(p: &Params) -> f64 {
    p.rho1 / (p.rho1 + p.rho2)
}

fn transverse_eigenvalue(p: &Params, i_star: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&i_star) {
        return Err(Error::Domain(format!("equilibrium I must lie in [0, 1], got {i_star}")));
    }
    Ok(p.mu * ((p.rho1 + p.rho2) * i_star - p.rho1))
}

/// Classifies the equilibrium `(R, I) = (1 - i_star, i_star)`.
pub fn classify_equilibrium(p: &Params, i_star: f64, tie_tol: f64) -> Result<EquilibriumReport> {
    let tau = transverse_eigenvalue(p, i_star)?;
    let class = if tau < -tie_tol {
        StabilityClass::Stable
    } else if tau > tie_tol {
        StabilityClass::Unstable
    } else {
        StabilityClass::Marginal
    };
    Ok(EquilibriumReport {
        point: State2 { r: 1.0 - i_star, i: i_star },
        eigen_planar: [0.0, tau],
        eigen_full: [0.0, 0.0, tau],
        class,
        sigma: threshold_sigma(p),
    })
}

/// Classifies `n` evenly spaced equilibria `I = k / (n - 1)`.
pub fn equilibrium_scan(p: &Params, n: usize) -> Result<Vec<EquilibriumReport>> {
    if n < 2 {
        return Err(Error::Domain(format!("scan needs at least 2 points, got {n}")));
    }
    (0..n)
        .map(|k| {
            let i_star = if k == n - 1 { 1.0 } else { k as f64 / (n - 1) as f64 };
            classify_equilibrium(p, i_star, DEFAULT_TIE_TOL)
        })
        .collect()
}

/// Spectrum `{0, 0, tau}` of the full Jacobian at `(I, S, R) = (i_star, 0, 1 - i_star)`.
pub fn eigen_full_at_equilibrium(p: &Params, i_star: f64) -> Result<[f64; 3]> {
    Ok([0.0, 0.0, transverse_eigenvalue(p, i_star)?])
}

/// Largest `|analytic - fd| / (1 + |analytic|)` between a model's analytic
/// Jacobian and central differences of its field. `point` has three
/// components for full models and two for planar ones, in the model's own
/// coordinate order.
pub fn jacobian_fd_check(model: ModelId, p: &Params, point: &[f64]) -> Result<f64> {
    let expect = if model.is_planar() { 2 } else { 3 };
    if point.len() != expect || point.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidState(format!(
            "{model:?} needs {expect} finite coordinates, got {point:?}"
        )));
    }
    Ok(match model {
        ModelId::Piqueira3 => {
            let x = [point[0], point[1], point[2]];
            fd::max_relative_error(&models::jacobian3_raw(p, &x).0, |x| models::piqueira_rhs(p, x), &x, FD_STEP)
        }
        ModelId::PiqueiraPlanar => {
            let y = [point[0], point[1]];
            fd::max_relative_error(&models::jacobian2_raw(p, &y).0, |y| models::piqueira_planar_rhs(p, y), &y, FD_STEP)
        }
        ModelId::BelenPearce3 => {
            let x = [point[0], point[1], point[2]];
            fd::max_relative_error(&models::jacobian_bp3_raw(&x).0, models::belen_pearce_rhs, &x, FD_STEP)
        }
        ModelId::BelenPearcePlanar => {
            let y = [point[0], point[1]];
            fd::max_relative_error(&models::jacobian_bp_planar(y[0], y[1]).0, models::belen_pearce_planar_rhs, &y, FD_STEP)
        }
    })
}
