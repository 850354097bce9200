//! Hard-instance generators with closed-form cost oracles.

pub mod anticoncentration;
pub mod basis;
pub mod discrete;

pub use anticoncentration::{anticoncentration_mc, TailEstimate};
pub use basis::{gen_basis_instance, hadamard_rows, hadamard_solutions, unit_center_bound, BasisInstance};
pub use discrete::{gen_star_instance, gen_subinstance, CenterId, DiscreteCost, DiscreteInstance};
