//! Fixed-step classical Runge–Kutta integration with spreader-extinction
//! stopping and simplex clamping.
//!
//! After every step the state is checked against the domain. Components that
//! dipped below zero by at most [`LEAVE_DOMAIN_TOL`] are clamped and the
//! simplex sum is restored; anything further out ends the run with
//! [`StopReason::LeftDomain`].
//!
//! Step increments are accumulated with compensated summation. Horizons of
//! 10^5 to 10^6 steps are routine here, and plain accumulation would let
//! rounding swamp the O(h^4) drift of the first integrals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::FirstIntegral;
use crate::models::{self, ModelId, Params, State2, State3};

/// A component below `-LEAVE_DOMAIN_TOL` is a scheme failure, not roundoff.
pub const LEAVE_DOMAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Fixed time step.
    pub step: f64,
    /// Integration horizon.
    pub t_end: f64,
    /// Stop as soon as the spreader fraction falls below this value.
    pub stop_s_below: f64,
    /// Record one state every this many steps. The final state is always recorded.
    pub record_every: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { step: 1e-3, t_end: 200.0, stop_s_below: 1e-10, record_every: 1 }
    }
}

impl SimOptions {
    pub fn new(step: f64, t_end: f64) -> Self {
        Self { step, t_end, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidOptions(format!("step must be > 0, got {}", self.step)));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.step) {
            return Err(Error::InvalidOptions(format!(
                "t_end must be >= step, got t_end = {} with step = {}",
                self.t_end, self.step
            )));
        }
        if !(self.stop_s_below >= 0.0) {
            return Err(Error::InvalidOptions(format!(
                "stop_s_below must be >= 0, got {}",
                self.stop_s_below
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidOptions("record_every must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    HorizonReached,
    SpreaderExtinct,
    LeftDomain,
}

/// Recorded solution. Planar runs are lifted to `(I, S, R)` before recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State3>,
    /// First-integral value at each recorded state; `None` when the start has
    /// `I = 0`, `NaN` entries where a later state reaches `I = 0`.
    pub h_values: Option<Vec<f64>>,
    pub stop_reason: StopReason,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn final_state(&self) -> State3 {
        *self.states.last().expect("trajectory has at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least the initial time")
    }

    /// `max |I + S + R - 1|` over recorded states.
    pub fn max_population_error(&self) -> f64 {
        self.states.iter().map(|x| (x.sum() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step<const N: usize>(field: impl Fn(&[f64; N]) -> [f64; N], x: &[f64; N], h: f64) -> Result<[f64; N]> {
    let inc = rk4_increment(field, x, h)?;
    let next: [f64; N] = std::array::from_fn(|j| x[j] + inc[j]);
    if next.iter().any(|c| !c.is_finite()) {
        return Err(Error::IntegrationBlowup { t: f64::NAN });
    }
    Ok(next)
}

fn rk4_increment<const N: usize>(field: impl Fn(&[f64; N]) -> [f64; N], x: &[f64; N], h: f64) -> Result<[f64; N]> {
    let stage = |k: &[f64; N], c: f64| -> [f64; N] { std::array::from_fn(|j| x[j] + c * k[j]) };
    let checked = |v: [f64; N]| {
        if v.iter().all(|c| c.is_finite()) {
            Ok(v)
        } else {
            Err(Error::IntegrationBlowup { t: f64::NAN })
        }
    };
    let k1 = checked(field(x))?;
    let k2 = checked(field(&stage(&k1, 0.5 * h)))?;
    let k3 = checked(field(&stage(&k2, 0.5 * h)))?;
    let k4 = checked(field(&stage(&k3, h)))?;
    checked(std::array::from_fn(|j| h / 6.0 * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j])))
}

/// Integrates `model` from `x0`. Planar models are run in their own
/// coordinates and lifted for recording.
pub fn simulate(model: ModelId, p: &Params, x0: &State3, opts: &SimOptions) -> Result<Trajectory> {
    opts.validate()?;
    let integral = FirstIntegral::for_model(model, p);
    match model {
        ModelId::Piqueira3 => run(
            |x: &[f64; 3]| models::piqueira_rhs(p, x),
            x0.to_array(),
            project_simplex,
            |x| State3 { i: x[0], s: x[1], r: x[2] },
            |x| x[1],
            opts,
            &integral,
        ),
        ModelId::BelenPearce3 => run(
            models::belen_pearce_rhs,
            x0.to_array(),
            project_simplex,
            |x| State3 { i: x[0], s: x[1], r: x[2] },
            |x| x[1],
            opts,
            &integral,
        ),
        ModelId::PiqueiraPlanar => simulate_planar(p, &models::reduce(x0), opts),
        ModelId::BelenPearcePlanar => run(
            models::belen_pearce_planar_rhs,
            [x0.i, x0.s],
            project_triangle,
            |x| State3 { i: x[0], s: x[1], r: (1.0 - (x[0] + x[1])).max(0.0) },
            |x| x[1],
            opts,
            &integral,
        ),
    }
}

/// Integrates the planar contact-rate field in `(R, I)`.
pub fn simulate_planar(p: &Params, y0: &State2, opts: &SimOptions) -> Result<Trajectory> {
    opts.validate()?;
    run(
        |y: &[f64; 2]| models::piqueira_planar_rhs(p, y),
        y0.to_array(),
        project_triangle,
        |y| State3 { i: y[1], s: (1.0 - (y[0] + y[1])).max(0.0), r: y[0] },
        |y| 1.0 - (y[0] + y[1]),
        opts,
        &FirstIntegral::Piqueira(*p),
    )
}

/// Sum error tolerated before the simplex is renormalized.
const RENORMALIZE_ABOVE: f64 = 1e-14;

/// Clamps and renormalizes a simplex point. Returns `None` when the point has
/// left the domain, otherwise the point and whether it was changed.
fn project_simplex(x: [f64; 3]) -> Option<([f64; 3], bool)> {
    if x.iter().any(|&c| c < -LEAVE_DOMAIN_TOL) {
        return None;
    }
    let clamped = x.iter().any(|&c| c < 0.0);
    let x = x.map(|c| c.max(0.0));
    let sum = x[0] + x[1] + x[2];
    if clamped || (sum - 1.0).abs() > RENORMALIZE_ABOVE {
        Some((x.map(|c| c / sum), true))
    } else {
        Some((x, false))
    }
}

/// Triangle `a, b >= 0, a + b <= 1`.
fn project_triangle(y: [f64; 2]) -> Option<([f64; 2], bool)> {
    if y.iter().any(|&c| c < -LEAVE_DOMAIN_TOL) || 1.0 - (y[0] + y[1]) < -LEAVE_DOMAIN_TOL {
        return None;
    }
    let clamped = y.iter().any(|&c| c < 0.0);
    let y = y.map(|c| c.max(0.0));
    let sum = y[0] + y[1];
    if sum > 1.0 {
        Some((y.map(|c| c / sum), true))
    } else {
        Some((y, clamped))
    }
}

fn run<const N: usize>(
    rhs: impl Fn(&[f64; N]) -> [f64; N],
    x0: [f64; N],
    project: impl Fn([f64; N]) -> Option<([f64; N], bool)>,
    to_state: impl Fn(&[f64; N]) -> State3,
    spreaders: impl Fn(&[f64; N]) -> f64,
    opts: &SimOptions,
    integral: &FirstIntegral,
) -> Result<Trajectory> {
    let h = opts.step;
    let full_steps = (opts.t_end / h * (1.0 + 1e-12)).floor() as u64;
    let remainder = opts.t_end - full_steps as f64 * h;
    let total_steps = if remainder > 1e-9 * h { full_steps + 1 } else { full_steps };

    let mut rec = Recorder::new(integral, &to_state(&x0));
    let mut x = x0;
    // compensated (Kahan) accumulation of the step increments
    let mut carry = [0.0; N];
    if spreaders(&x) < opts.stop_s_below {
        return Ok(rec.finish(StopReason::SpreaderExtinct));
    }

    let mut stop = StopReason::HorizonReached;
    for k in 1..=total_steps {
        let (t, dt) = if k > full_steps { (opts.t_end, remainder) } else { (k as f64 * h, h) };
        let inc = rk4_increment(&rhs, &x, dt).map_err(|_| Error::IntegrationBlowup { t })?;
        let mut next = x;
        for j in 0..N {
            let y = inc[j] - carry[j];
            next[j] = x[j] + y;
            carry[j] = (next[j] - x[j]) - y;
        }
        let Some((next, changed)) = project(next) else {
            stop = StopReason::LeftDomain;
            break;
        };
        if changed {
            carry = [0.0; N];
        }
        x = next;
        let extinct = spreaders(&x) < opts.stop_s_below;
        if k % opts.record_every as u64 == 0 || k == total_steps || extinct {
            rec.push(t, &to_state(&x));
        }
        if extinct {
            stop = StopReason::SpreaderExtinct;
            break;
        }
    }
    Ok(rec.finish(stop))
}

struct Recorder<'a> {
    integral: Option<&'a FirstIntegral>,
    times: Vec<f64>,
    states: Vec<State3>,
    h_values: Vec<f64>,
}

impl<'a> Recorder<'a> {
    fn new(integral: &'a FirstIntegral, x0: &State3) -> Self {
        let integral = integral.evaluate(x0).is_ok().then_some(integral);
        let mut rec = Self { integral, times: Vec::new(), states: Vec::new(), h_values: Vec::new() };
        rec.push(0.0, x0);
        rec
    }

    fn push(&mut self, t: f64, x: &State3) {
        self.times.push(t);
        self.states.push(*x);
        if let Some(integral) = self.integral {
            self.h_values.push(integral.evaluate(x).unwrap_or(f64::NAN));
        }
    }

    fn finish(self, stop_reason: StopReason) -> Trajectory {
        Trajectory {
            times: self.times,
            states: self.states,
            h_values: self.integral.map(|_| self.h_values),
            stop_reason,
        }
    }
}
