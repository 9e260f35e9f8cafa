//! Ignorant–Spreader–Stifler rumor models.
//!
//! A population splits into ignorants `I`, spreaders `S` and stiflers `R`
//! with `I + S + R = 1`. This crate provides
//!
//! * the model vector fields, their planar reductions and Jacobians ([`models`]);
//! * fixed-step RK4 simulation ([`integrate`]);
//! * first integrals and a numerical conservation check ([`invariants`]);
//! * classification of the segment of equilibria ([`stability`]);
//! * the final rumor size from the level sets of the first integral ([`finalsize`]).
//!
//! ```
//! use rumorflow::{finalsize, integrate, models::*};
//!
//! let p = Params::new(0.1, 0.9, 0.8)?;
//! let x0 = State3::new(0.4, 0.5, 0.1)?;
//! let traj = integrate::simulate(ModelId::Piqueira3, &p, &x0, &integrate::SimOptions::new(1e-3, 400.0))?;
//! let predicted = finalsize::final_ignorants(&p, &reduce(&x0), 1e-12)?;
//! let simulated = traj.final_state().i;
//! assert!((simulated - predicted.i_inf).abs() / predicted.i_inf < 1e-3);
//! # Ok::<(), rumorflow::Error>(())
//! ```
//!
//! The guide under `book/` walks through each part; its code listings are
//! compiled and run as doctests of this crate.

// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fd;
pub mod finalsize;
pub mod integrate;
pub mod invariants;
pub mod models;
pub mod stability;

pub use error::{Error, Result};

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    pub mod models {}
    #[doc = include_str!("../../../book/src/integration.md")]
    pub mod integration {}
    #[doc = include_str!("../../../book/src/first-integrals.md")]
    pub mod first_integrals {}
    #[doc = include_str!("../../../book/src/stability.md")]
    pub mod stability {}
    #[doc = include_str!("../../../book/src/final-size.md")]
    pub mod final_size {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
