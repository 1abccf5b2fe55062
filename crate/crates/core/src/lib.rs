//! Nonlocal constants of motion for Lagrangian systems.
//!
//! A smooth family of perturbations `q_λ` of a solution `q` gives the
//! constant `C(t) = ∂L/∂q̇ · δq − ∫_{t0}^{t} (∂L/∂q · δq + ∂L/∂q̇ · δq̇) ds`.
//! This crate integrates a system together with those integrals and
//! measures how constant the result actually is.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autodiff;
pub mod error;
pub mod integrate;
pub mod lagrangian;
pub mod quadrature;
pub mod series;
pub mod systems;
pub mod verify;

pub use error::{Error, Result};
pub use integrate::{
    integrate, integrate_two_sided, Integrand, IntegratorConfig, Termination, Trajectory,
};
pub use lagrangian::{
    action, nonlocal_constant, Lagrangian, NonlocalConstantSeries, State, TimeDomain,
    VariationField, Warp,
};
pub use series::Series;
