//! Divergence-free reconstruction of toroidal magnetic fields from grid
//! samples.
//!
//! The pipeline is: sample or load `B` on a regular `(R, Z, φ)` grid, build
//! scaled Taylor data at the nodes of a coarser Hermite grid ([`hermite`]),
//! fit piecewise Hermite polynomials on the dual cells, integrate them
//! exactly into a gauge-fixed vector potential ([`vecpot`]) and evaluate
//! `B = ∇×A` together with the derivatives needed by the guiding-center
//! pusher ([`pusher`]) and the field-line tracer ([`poincare`]). The
//! embedded Dormand-Prince integrator lives in [`ode`].
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analytic;
pub mod error;
pub mod fd;
pub mod field;
pub mod grid;
pub mod hermite;
pub mod ode;
pub mod poincare;
pub mod pusher;
pub mod taylor;
pub mod trig;
pub mod vecpot;

pub use error::{Error, Result};
pub use grid::{FieldDump, Grid2D};
