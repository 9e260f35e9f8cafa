//! Final size of a rumor cascade from the level set of the first integral.
//!
//! Orbits of the planar contact-rate system stay on a level line
//! `H(R, I) = k` and end on the equilibrium segment `R = 1 - I`. Restricting
//! `H` to that segment gives
//!
//! ```text
//! phi(I) = (1 - I) / rho1 + ln(I) / rho2 - I / rho2
//! ```
//!
//! with `phi'(I) = 1 / (rho2 I) - 1 / rho2 - 1 / rho1`, which vanishes only at
//! `sigma`. So `phi` increases on `(0, sigma)` from `-inf`, and the limit of
//! the orbit is the unique root of `phi(I) = k` there.
//!
//! Roots are located by bisection. `phi'` vanishes at the upper end of the
//! bracket and the logarithm is steep near zero, so derivative-based steps are
//! unreliable on both ends. The tolerance bounds the residual
//! `|phi(I) - k|`, not the width of the bracket.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::hamiltonian_piqueira;
use crate::models::{Params, State2};
use crate::stability::threshold_sigma;

/// Default bound on the level-set residual.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Lower end below which bracket expansion gives up.
const BRACKET_FLOOR: f64 = 1e-300;

const MAX_BISECTIONS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSet {
    pub k: f64,
    pub params: Params,
}

impl LevelSet {
    pub fn through(p: &Params, y0: &State2) -> Result<Self> {
        Ok(Self { k: hamiltonian_piqueira(p, y0)?, params: *p })
    }

    /// `H` restricted to the equilibrium segment.
    pub fn phi(&self, i: f64) -> f64 {
        let p = &self.params;
        (1.0 - i) / p.rho1 + i.ln() / p.rho2 - i / p.rho2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalState {
    pub i_inf: f64,
    pub r_inf: f64,
    /// Sign-change bracket the bisection started from.
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// `|phi(i_inf) - k|`.
    pub residual: f64,
    pub k: f64,
}

/// Asymptotic ignorant fraction of the orbit starting at `y0`.
pub fn final_ignorants(p: &Params, y0: &State2, tol: f64) -> Result<FinalState> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tol must be > 0, got {tol}")));
    }
    let level = LevelSet::through(p, y0)?;
    let sigma = threshold_sigma(p);

    if y0.on_equilibrium_segment() {
        if y0.i > sigma {
            return Err(Error::UnstableStart { i0: y0.i, sigma });
        }
        return Ok(FinalState {
            i_inf: y0.i,
            r_inf: 1.0 - y0.i,
            bracket: (y0.i, y0.i),
            iterations: 0,
            residual: (level.phi(y0.i) - level.k).abs(),
            k: level.k,
        });
    }

    let g = |i: f64| level.phi(i) - level.k;
    let hi = sigma * (1.0 - 1e-9);
    if g(hi) < 0.0 {
        // level only touches the segment within 1e-9 of sigma
        if -g(hi) <= tol {
            return Ok(FinalState {
                i_inf: hi,
                r_inf: 1.0 - hi,
                bracket: (hi, hi),
                iterations: 0,
                residual: -g(hi),
                k: level.k,
            });
        }
        return Err(Error::NoRoot(format!("phi(sigma) < k = {} for start {y0:?}", level.k)));
    }
    let mut lo = y0.i.min(0.5 * sigma);
    while g(lo) >= 0.0 {
        lo /= 10.0;
        if lo < BRACKET_FLOOR {
            return Err(Error::NoRoot(format!("no sign change above {BRACKET_FLOOR} for start {y0:?}")));
        }
    }
    let root = bisect(g, lo, hi, tol);
    Ok(FinalState {
        i_inf: root.x,
        r_inf: 1.0 - root.x,
        bracket: (lo, hi),
        iterations: root.iterations,
        residual: root.residual,
        k: level.k,
    })
}

/// Ignorant fraction left when spreaders die out in the unit-rate model,
/// from the conserved value `S + 2I - ln(I)`.
pub fn final_ignorants_bp(i0: f64, s0: f64, tol: f64) -> Result<f64> {
    if !(i0 > 0.0 && s0 >= 0.0 && i0 + s0 <= 1.0 + crate::models::BOUNDARY_TOL) {
        return Err(Error::Domain(format!("need I0 > 0, S0 >= 0, I0 + S0 <= 1, got ({i0}, {s0})")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tol must be > 0, got {tol}")));
    }
    let c = s0 + 2.0 * i0 - i0.ln();
    // 2I - ln(I) decreases on (0, 1/2); g increases there
    let g = |i: f64| c - (2.0 * i - i.ln());
    let hi = 0.5;
    if g(hi) < 0.0 {
        return Err(Error::NoRoot(format!("conserved value {c} below the minimum 1 + ln 2")));
    }
    let mut lo = i0.min(0.25);
    while g(lo) >= 0.0 {
        lo /= 10.0;
        if lo < BRACKET_FLOOR {
            return Err(Error::NoRoot(format!("no sign change above {BRACKET_FLOOR} for c = {c}")));
        }
    }
    Ok(bisect(g, lo, hi, tol).x)
}

struct Root {
    x: f64,
    iterations: usize,
    residual: f64,
}

/// Bisection on an increasing bracket `g(lo) < 0 <= g(hi)`. Splits
/// geometrically while the bracket spans more than a factor of four.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Root {
    let mut iterations = 0;
    loop {
        let mid = if hi > 4.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        let value = g(mid);
        iterations += 1;
        if value.abs() <= tol || mid <= lo || mid >= hi || iterations >= MAX_BISECTIONS {
            return Root { x: mid, iterations, residual: value.abs() };
        }
        if value < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// A point of a level curve, flagged when it falls outside the triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPoint {
    pub r: f64,
    pub i: f64,
    pub inside: bool,
}

/// Solves `H(R, I) = k` for `R` at each grid value of `I`.
pub fn level_curve(p: &Params, k: f64, i_grid: &[f64]) -> Result<Vec<LevelPoint>> {
    i_grid
        .iter()
        .map(|&i| {
            if !(i > 0.0 && i <= 1.0) {
                return Err(Error::Domain(format!("level-curve grid values must lie in (0, 1], got {i}")));
            }
            let r = p.rho1 * (k - i.ln() / p.rho2 + i / p.rho2);
            Ok(LevelPoint { r, i, inside: r >= 0.0 && r <= 1.0 - i })
        })
        .collect()
}
