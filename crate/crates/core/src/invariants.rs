//! First integrals and conservation checks.
//!
//! The planar contact-rate system conserves
//!
//! ```text
//! H(R, I) = R / rho1 + ln(I) / rho2 - I / rho2
//! ```
//!
//! independently of `mu`. For the unit-rate system, dividing `S'` by `I'`
//! gives `dS/dI = 1/I - 2`, so `S + 2I - ln(I)` is conserved. The variant
//! `ln(I) - 2I + S` is kept as [`BpVariant::Printed`]; it is *not* conserved
//! (its derivative along the flow is `-2S + 4IS`) and exists so that the
//! verifier can demonstrate that.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::{self, FD_STEP};
use crate::integrate::Trajectory;
use crate::models::{ModelId, Params, State2, State3};

/// Smallest `I` sampled by [`verify_first_integral`]; keeps `ln(I)` well conditioned.
pub const SAMPLE_I_FLOOR: f64 = 1e-3;

/// Which unit-rate candidate to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BpVariant {
    /// `ln(I) - 2I + S`.
    Printed,
    /// `S + 2I - ln(I)`.
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FirstIntegral {
    Piqueira(Params),
    BelenPearcePrinted,
    BelenPearceCorrected,
}

impl FirstIntegral {
    /// The conserved quantity of a model.
    pub fn for_model(model: ModelId, p: &Params) -> Self {
        if model.is_unit_rate() {
            Self::BelenPearceCorrected
        } else {
            Self::Piqueira(*p)
        }
    }

    pub fn evaluate(&self, x: &State3) -> Result<f64> {
        match self {
            Self::Piqueira(p) => hamiltonian_piqueira(p, &State2 { r: x.r, i: x.i }),
            Self::BelenPearcePrinted => hamiltonian_bp(BpVariant::Printed, x.i, x.s),
            Self::BelenPearceCorrected => hamiltonian_bp(BpVariant::Corrected, x.i, x.s),
        }
    }
}

/// `R / rho1 + ln(I) / rho2 - I / rho2`.
pub fn hamiltonian_piqueira(p: &Params, y: &State2) -> Result<f64> {
    if !(y.i > 0.0) {
        return Err(Error::Singular { i: y.i });
    }
    Ok(y.r / p.rho1 + y.i.ln() / p.rho2 - y.i / p.rho2)
}

pub fn hamiltonian_bp(variant: BpVariant, i: f64, s: f64) -> Result<f64> {
    if !(i > 0.0) {
        return Err(Error::Singular { i });
    }
    Ok(match variant {
        BpVariant::Printed => i.ln() - 2.0 * i + s,
        BpVariant::Corrected => s + 2.0 * i - i.ln(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Conserved,
    NotConserved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub max_abs_residual: f64,
    pub mean_abs_residual: f64,
    pub sample_count: usize,
    pub verdict: Verdict,
}

/// Sampling region for [`verify_first_integral`]: the triangle
/// `a >= floor[0]`, `b >= floor[1]`, `a + b < 1` in the field's own coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleDomain {
    pub floor: [f64; 2],
}

impl SampleDomain {
    /// `(R, I)` coordinates with `I >= SAMPLE_I_FLOOR`.
    pub fn piqueira() -> Self {
        Self { floor: [0.0, SAMPLE_I_FLOOR] }
    }

    /// `(I, S)` coordinates with `I >= SAMPLE_I_FLOOR`.
    pub fn belen_pearce() -> Self {
        Self { floor: [SAMPLE_I_FLOOR, 0.0] }
    }

    /// Maps a point of the unit square into the interior of the triangle.
    fn map(&self, u: f64, v: f64) -> [f64; 2] {
        let (u, v) = if u + v > 1.0 { (1.0 - u, 1.0 - v) } else { (u, v) };
        // stay a few finite-difference steps inside the slanted edge
        let side = 1.0 - self.floor[0] - self.floor[1] - 4.0 * FD_STEP;
        [self.floor[0] + side * u, self.floor[1] + side * v]
    }
}

/// Deterministic quasi-random points: a 2-D Halton sequence shifted by a
/// seeded uniform offset (Cranley–Patterson rotation).
pub fn quasi_random_points(domain: &SampleDomain, samples: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: [f64; 2] = [rng.random(), rng.random()];
    (1..=samples as u64)
        .map(|n| {
            let u = (radical_inverse(n, 2) + shift[0]).fract();
            let v = (radical_inverse(n, 3) + shift[1]).fract();
            domain.map(u, v)
        })
        .collect()
}

fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut value, mut scale) = (0.0, inv);
    while n > 0 {
        value += (n % base) as f64 * scale;
        n /= base;
        scale *= inv;
    }
    value
}

/// Checks `grad(candidate) . field = 0` at quasi-random interior points, with
/// the gradient taken by central differences.
pub fn verify_first_integral(
    field: impl Fn(&[f64; 2]) -> [f64; 2],
    candidate: impl Fn(&[f64; 2]) -> f64,
    domain: &SampleDomain,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<ConservationReport> {
    if samples == 0 {
        return Err(Error::Domain("samples must be >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tol must be > 0, got {tol}")));
    }
    let (mut max, mut total) = (0.0f64, 0.0);
    for y in quasi_random_points(domain, samples, seed) {
        let grad = fd::gradient(&candidate, &y, FD_STEP);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Evaluation { point: y });
        }
        let f = field(&y);
        let residual = (grad[0] * f[0] + grad[1] * f[1]).abs();
        max = max.max(residual);
        total += residual;
    }
    Ok(ConservationReport {
        max_abs_residual: max,
        mean_abs_residual: total / samples as f64,
        sample_count: samples,
        verdict: if max <= tol { Verdict::Conserved } else { Verdict::NotConserved },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub max_drift: f64,
    pub final_drift: f64,
    /// Set when a recorded state had `I = 0`; the drift covers the states before it.
    pub truncated: bool,
}

/// Deviation of a first integral from its initial value along a trajectory.
pub fn drift_along(traj: &Trajectory, integral: &FirstIntegral) -> Result<Drift> {
    let first = traj.states.first().ok_or_else(|| Error::Domain("empty trajectory".into()))?;
    let h0 = integral.evaluate(first)?;
    let mut drift = Drift { max_drift: 0.0, final_drift: 0.0, truncated: false };
    for x in &traj.states[1..] {
        match integral.evaluate(x) {
            Ok(h) => {
                drift.final_drift = (h - h0).abs();
                drift.max_drift = drift.max_drift.max(drift.final_drift);
            }
            Err(_) => {
                drift.truncated = true;
                break;
            }
        }
    }
    Ok(drift)
}
