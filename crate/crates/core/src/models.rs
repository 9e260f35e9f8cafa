//! Vector fields of the Ignorant–Spreader–Stifler models.
//!
//! Two families are provided:
//!
//! * the contact-rate model, with spreader silencing rate `rho1`,
//!   conversion rate `rho2` and contact rate `mu`;
//! * the unit-rate model `I' = -IS`, `S' = -S(1 - 2I)`, `R' = S(1 - I)`.
//!
//! Each has a three-compartment form on the unit simplex and a planar form
//! obtained by eliminating one compartment through `I + S + R = 1`. The
//! planar contact-rate model uses coordinates `(R, I)`; the planar unit-rate
//! model uses `(I, S)`.
//!
//! `mu` multiplies the whole contact-rate field, so it rescales time without
//! changing orbits. Every field and Jacobian here is computed with `mu = 1`
//! and multiplied by `mu` as the last operation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance below zero (or above the unit sum) that is treated as roundoff
/// and clamped rather than rejected.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Rates of the contact-rate model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Rate at which a spreader meeting a spreader or stifler falls silent.
    pub rho1: f64,
    /// Rate at which an ignorant hearing the rumor becomes a spreader.
    pub rho2: f64,
    /// Average number of contacts per individual per unit time.
    pub mu: f64,
}

impl Params {
    pub fn new(rho1: f64, rho2: f64, mu: f64) -> Result<Self> {
        for (name, v) in [("rho1", rho1), ("rho2", rho2), ("mu", mu)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self { rho1, rho2, mu })
    }

    /// Same rates with a different contact rate.
    pub fn with_mu(self, mu: f64) -> Result<Self> {
        Self::new(self.rho1, self.rho2, mu)
    }

    /// Rates above one are accepted but they are meant as probabilities.
    pub fn warnings(&self) -> Vec<String> {
        [("rho1", self.rho1), ("rho2", self.rho2)]
            .into_iter()
            .filter(|(_, v)| *v > 1.0)
            .map(|(name, v)| format!("{name} = {v} exceeds 1 and is not a probability"))
            .collect()
    }
}

/// Population fractions `(I, S, R)` on the unit simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State3 {
    pub i: f64,
    pub s: f64,
    pub r: f64,
}

impl State3 {
    /// Validates a simplex point. Components within [`BOUNDARY_TOL`] below
    /// zero are clamped to zero; the sum must be one within the same tolerance.
    pub fn new(i: f64, s: f64, r: f64) -> Result<Self> {
        let [i, s, r] = clamp_nonnegative([i, s, r])?;
        let sum = i + s + r;
        if (sum - 1.0).abs() > BOUNDARY_TOL {
            return Err(Error::Domain(format!(
                "I + S + R must equal 1, got {sum} for ({i}, {s}, {r})"
            )));
        }
        Ok(Self { i, s, r })
    }

    /// Projects nonnegative fractions onto the simplex by dividing by their
    /// sum. Returns the state together with the original sum.
    pub fn renormalized(i: f64, s: f64, r: f64) -> Result<(Self, f64)> {
        let [i, s, r] = clamp_nonnegative([i, s, r])?;
        let sum = i + s + r;
        if sum <= 0.0 {
            return Err(Error::Domain("fractions sum to zero".into()));
        }
        Ok((Self { i: i / sum, s: s / sum, r: r / sum }, sum))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.i, self.s, self.r]
    }

    pub fn sum(&self) -> f64 {
        self.i + self.s + self.r
    }
}

/// Planar state `(R, I)` in the triangle `R, I >= 0, R + I <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State2 {
    pub r: f64,
    pub i: f64,
}

impl State2 {
    pub fn new(r: f64, i: f64) -> Result<Self> {
        let [r, i] = clamp_nonnegative([r, i])?;
        if r + i > 1.0 + BOUNDARY_TOL {
            return Err(Error::Domain(format!("R + I must not exceed 1, got R = {r}, I = {i}")));
        }
        Ok(Self { r, i })
    }

    /// Spreader fraction `1 - I - R`, clamped at zero.
    pub fn spreaders(&self) -> f64 {
        (1.0 - (self.i + self.r)).max(0.0)
    }

    /// Whether the point lies on the equilibrium segment `R + I = 1`.
    pub fn on_equilibrium_segment(&self) -> bool {
        1.0 - (self.i + self.r) <= BOUNDARY_TOL
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.r, self.i]
    }
}

fn clamp_nonnegative<const N: usize>(mut x: [f64; N]) -> Result<[f64; N]> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidState(format!("non-finite component in {x:?}")));
    }
    for v in &mut x {
        if *v < 0.0 {
            if *v < -BOUNDARY_TOL {
                return Err(Error::Domain(format!("negative fraction {v}")));
            }
            *v = 0.0;
        }
    }
    Ok(x)
}

/// The four vector fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelId {
    Piqueira3,
    PiqueiraPlanar,
    BelenPearce3,
    BelenPearcePlanar,
}

impl ModelId {
    pub fn is_planar(self) -> bool {
        matches!(self, Self::PiqueiraPlanar | Self::BelenPearcePlanar)
    }

    pub fn is_unit_rate(self) -> bool {
        matches!(self, Self::BelenPearce3 | Self::BelenPearcePlanar)
    }

    /// Three-compartment field on `(I, S, R)` belonging to this family.
    pub fn full_rhs(self, p: &Params, x: &[f64; 3]) -> [f64; 3] {
        if self.is_unit_rate() {
            belen_pearce_rhs(x)
        } else {
            piqueira_rhs(p, x)
        }
    }
}

/// Row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix3(pub [[f64; 3]; 3]);

/// Row-major 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2(pub [[f64; 2]; 2]);

impl Matrix3 {
    pub fn column_sums(&self) -> [f64; 3] {
        let m = &self.0;
        std::array::from_fn(|c| m[0][c] + m[1][c] + m[2][c])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }
}

impl Matrix2 {
    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }
}

// Raw kernels. These accept arbitrary arrays so the integrator can evaluate
// Runge–Kutta stages that sit a rounding error outside the simplex.

pub(crate) fn piqueira_rhs(p: &Params, &[i, s, r]: &[f64; 3]) -> [f64; 3] {
    let conversion = p.rho2 * i * s;
    let silencing = p.rho1 * s * (s + r);
    [p.mu * -conversion, p.mu * (conversion - silencing), p.mu * silencing]
}

pub(crate) fn piqueira_planar_rhs(p: &Params, &[r, i]: &[f64; 2]) -> [f64; 2] {
    let s = 1.0 - (i + r);
    [p.mu * (p.rho1 * s * (1.0 - i)), p.mu * (-p.rho2 * i * s)]
}

pub(crate) fn belen_pearce_rhs(&[i, s, _r]: &[f64; 3]) -> [f64; 3] {
    let contact = i * s;
    let d_i = -contact;
    let d_r = s - contact;
    [d_i, -(d_i + d_r), d_r]
}

pub(crate) fn belen_pearce_planar_rhs(&[i, s]: &[f64; 2]) -> [f64; 2] {
    [-i * s, -s * (1.0 - 2.0 * i)]
}

/// Contact-rate field `(dI/dt, dS/dt, dR/dt)`.
pub fn piqueira_field(p: &Params, x: &State3) -> [f64; 3] {
    piqueira_rhs(p, &x.to_array())
}

/// Planar contact-rate field `(dR/dt, dI/dt)`, scaled by `mu`.
pub fn planar_field(p: &Params, y: &State2) -> [f64; 2] {
    piqueira_planar_rhs(p, &y.to_array())
}

/// Unit-rate field `(dI/dt, dS/dt, dR/dt)`.
pub fn belen_pearce_field(x: &State3) -> [f64; 3] {
    belen_pearce_rhs(&x.to_array())
}

/// Planar unit-rate field `(dI/dt, dS/dt)` in coordinates `(I, S)`.
pub fn belen_pearce_planar(i: f64, s: f64) -> Result<[f64; 2]> {
    if !i.is_finite() || !s.is_finite() {
        return Err(Error::InvalidState(format!("non-finite (I, S) = ({i}, {s})")));
    }
    if i < -BOUNDARY_TOL || s < -BOUNDARY_TOL || i + s > 1.0 + BOUNDARY_TOL {
        return Err(Error::Domain(format!("(I, S) = ({i}, {s}) outside the triangle")));
    }
    Ok(belen_pearce_planar_rhs(&[i, s]))
}

/// Planar point to simplex point, `S = 1 - I - R`.
pub fn lift(y: &State2) -> State3 {
    State3 { i: y.i, s: y.spreaders(), r: y.r }
}

/// Simplex point to planar point, dropping `S`.
pub fn reduce(x: &State3) -> State2 {
    State2 { r: x.r, i: x.i }
}

/// Analytic Jacobian of the contact-rate field, rows and columns ordered `(I, S, R)`.
pub fn jacobian3(p: &Params, x: &State3) -> Matrix3 {
    jacobian3_raw(p, &x.to_array())
}

pub(crate) fn jacobian3_raw(p: &Params, &[i, s, r]: &[f64; 3]) -> Matrix3 {
    let (a, b, mu) = (p.rho1, p.rho2, p.mu);
    let m = [
        [-b * s, -b * i, 0.0],
        [b * s, b * i - 2.0 * a * s - a * r, -a * s],
        [0.0, 2.0 * a * s + a * r, a * s],
    ];
    Matrix3(m.map(|row| row.map(|v| mu * v)))
}

/// Analytic Jacobian of the planar contact-rate field, ordered `(R, I)`.
pub fn jacobian2(p: &Params, y: &State2) -> Matrix2 {
    jacobian2_raw(p, &y.to_array())
}

pub(crate) fn jacobian2_raw(p: &Params, &[r, i]: &[f64; 2]) -> Matrix2 {
    let (a, b, mu) = (p.rho1, p.rho2, p.mu);
    let s = 1.0 - (i + r);
    let m = [
        [-a * (1.0 - i), -a * ((1.0 - i) + s)],
        [b * i, b * (2.0 * i + r - 1.0)],
    ];
    Matrix2(m.map(|row| row.map(|v| mu * v)))
}

/// Jacobian of the unit-rate field, ordered `(I, S, R)`.
pub fn jacobian_bp3(x: &State3) -> Matrix3 {
    jacobian_bp3_raw(&x.to_array())
}

pub(crate) fn jacobian_bp3_raw(&[i, s, _r]: &[f64; 3]) -> Matrix3 {
    Matrix3([
        [-s, -i, 0.0],
        [2.0 * s, 2.0 * i - 1.0, 0.0],
        [-s, 1.0 - i, 0.0],
    ])
}

/// Jacobian of the planar unit-rate field, ordered `(I, S)`.
pub fn jacobian_bp_planar(i: f64, s: f64) -> Matrix2 {
    Matrix2([[-s, -i], [2.0 * s, 2.0 * i - 1.0]])
}
