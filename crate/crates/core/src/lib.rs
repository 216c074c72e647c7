//! Radial solutions of `Δu + f(u) = 0` with supercritical growth.

pub mod bifurcation;
pub mod error;
mod hermite;
pub mod intersect;
pub mod morse;
pub mod nonlinearity;
mod ode;
mod quad;
pub mod radial_ode;
pub mod singular;
pub mod transforms;
pub mod verification;

pub use error::{Error, Result};
pub use nonlinearity::{make_builtin, DomainClass, ExponentReport, Nonlinearity, Regime};
