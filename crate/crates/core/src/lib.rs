//! Classical sub-quantum model of a free Gaussian wave packet.
//!
//! * [`analytics`]: closed-form variance, diffusivity, trajectories and
//!   energetics of the spreading packet.
//! * [`lattice`]: coupled-map-lattice diffusion with the time-dependent
//!   diffusivity, plus quantile trajectories.
//! * [`walkers`]: Monte Carlo ensemble of Brownian walkers.
//! * [`superposition`]: complex momentum, superposition coefficients,
//!   interference intensities and the product rule.
//! * [`collapse`]: dissipation asymmetry, momentum fluctuations and fringe
//!   visibility under broken orthogonality.
//!
//! Data-parallel kernels run through [`Exec`]; enabling or disabling the
//! `parallel` feature never changes a numeric result.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod collapse;
pub mod error;
pub mod exec;
pub mod lattice;
pub mod numerics;
pub mod rng;
pub mod superposition;
pub mod walkers;

pub use analytics::{DerivedScales, DiffusivitySchedule, EnergySplit, PacketSpec};
pub use error::{Error, Result};
pub use exec::Exec;
