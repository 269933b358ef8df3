//! Pseudo-spectral simulation of the stochastic Keller-Segel system with
//! porous-medium diffusion and linear multiplicative Q-Wiener noise on a
//! Dirichlet box, plus numerical probes of the estimates behind its
//! existence theory.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod domain;
pub mod drift;
mod dst;
pub mod dump;
pub mod error;
pub mod field;
pub mod fixed_point;
pub mod integrator;
pub mod kernel;
pub mod noise;
pub mod quadrature;
pub mod reference;
pub mod sampling;
pub mod space;
pub mod stats;
mod tensor;

pub use domain::{build_basis, Basis, DomainSpec};
pub use drift::ModelParams;
pub use error::{Result, SksError};
pub use field::{Field, GradField};
pub use integrator::{IntegratorConfig, PathMode, PathSample, Trajectory};
pub use kernel::{KernelKind, KernelMode, KernelSpec};
pub use noise::{NoiseIncrement, NoiseSpec, NoiseStream};
pub use space::SpectralSpace;
