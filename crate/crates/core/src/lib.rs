//! A 2D finite-element solver kit for fluid-structure-interaction
//! saddle-point systems: ALE mesh motion, coupled P2-P0 assembly, a
//! geometry-convective-explicit time loop, parameter-robust block
//! preconditioners, and a dense analysis layer that checks the
//! well-posedness numbers (inf-sup constants, spectra, norm identities).
//!
//! All numerics are generic over the scalar type through [`Real`]
//! (`f32` or `f64`); the `*64` aliases below are the working defaults.

pub mod analysis;
pub mod error;
pub mod fem;
pub mod krylov;
pub mod mesh;
pub mod scalar;
pub mod system;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mesh64 = mesh::Mesh<f64>;
pub type MeshMotion64 = mesh::MeshMotion<f64>;
pub type CoupledSpace64 = fem::CoupledSpace<f64>;
pub type MaterialParams64 = fem::MaterialParams<f64>;
pub type CsrMatrix64 = krylov::CsrMatrix<f64>;
pub type BlockSystem64 = system::BlockSystem<f64>;
pub type TimeState64 = system::TimeState<f64>;
pub type SolveReport64 = krylov::SolveReport<f64>;
