//! Fast finite-time stable extended state observers on SE(3).
//!
//! The crate is organised bottom-up:
//!
//! - [`geom`]: rotations, the Morse-type attitude error and its gradient.
//! - [`fftsd`]: the Hölder-continuous differentiator and its gain toolkit.
//! - [`observer`]: translational and rotational extended state observers.
//! - [`plant`]: rigid-body dynamics, disturbances, references, sensing, control.
//! - [`baselines`]: linear and fixed-time comparison observers.
//! - [`sim`]: integration, scenario runs, CSV/SVG output and metrics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod exec;
pub mod fftsd;
pub mod geom;
pub mod observer;
pub mod plant;
pub mod sim;

pub use exec::Execution;
pub use nalgebra;
pub use geom::{Mat3, Rotation, Vec3};
