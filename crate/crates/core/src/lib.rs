//! Quantum backflow of Gaussian superpositions in dissipative environments.
//!
//! Two open-system descriptions are covered in closed form:
//!
//! * [`ck`]: the Caldirola–Kanai (time-dependent Hamiltonian) wave function;
//! * [`cl`]: the high-temperature Caldeira–Leggett reduced density matrix.
//!
//! Both can add a constant force `m·g`. [`analysis`] extracts backflow
//! intervals and their probability gains from the current at the origin,
//! and [`eigen`] bounds the achievable backflow through the spectrum of the
//! flux operator.

pub mod analysis;
pub mod ck;
pub mod cl;
pub mod eigen;
mod error;
pub mod params;
pub mod quadrature;
pub mod special_fn;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use params::{Environment, GaussianComponent, GaussianSuperposition, PhysicalConstants};
pub use ck::CkModel;
pub use cl::ClModel;

/// Time evolution seen through the half-line `x < 0`.
pub trait Dynamics: Sync {
    /// Probability of finding the particle at `x < 0`.
    fn prob_left(&self, t: f64) -> Result<f64>;
    /// Probability current through `x = 0`; negative values are backflow.
    fn current_origin(&self, t: f64) -> Result<f64>;
    /// Earliest time the model accepts.
    fn earliest_time(&self) -> f64;
}
