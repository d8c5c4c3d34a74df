//! Obstacle problems for non-divergence operators built from Hörmander
//! vector fields on homogeneous groups.
//!
//! The crate is split bottom-up: [`liealg`] does exact symbolic work on
//! polynomial fields, [`group`] handles group laws and homogeneous norms,
//! [`operator`] validates operator data, [`pde`] discretizes on box grids,
//! [`obstacle`] runs the penalized monotone iteration and the PSOR oracle,
//! and [`bench`] registers the reference problems.

pub mod liealg;
pub mod group;
pub mod operator;
pub mod pde;
pub mod obstacle;
pub mod bench;
