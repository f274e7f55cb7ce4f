//! Mixed finite elements on the coupled mesh: P2 velocity with interface
//! identification, P0 pressure, exact assembly, Dirichlet elimination.

mod assemble;
mod dirichlet;
mod params;
pub mod quadrature;
mod space;

pub use assemble::{
    assemble_a, assemble_b, assemble_blocks, assemble_d, assemble_h1_gram, assemble_mp,
    assemble_rhs, AssembledBlocks, DqOperator, PrevState,
};
pub use dirichlet::{apply_dirichlet, DirichletMap, ReducedBlocks};
pub use params::MaterialParams;
pub use space::{build_space, build_space_with_options, CoupledSpace, SpaceOptions};

pub(crate) use assemble::scale_rows;
