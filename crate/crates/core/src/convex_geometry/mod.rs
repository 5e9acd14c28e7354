//! Polytopes, Euclidean projection, vertex enumeration, triangulation and matrix games.
//!
//! Every algorithm in the crate reduces to the kernels here. Tolerances are global:
//! vertices closer than [`DEDUP_TOL`] are merged and LP solutions are accepted when their
//! duality gap is below [`OPTIMALITY_TOL`].

mod combinations;
mod grid;
mod polytope;
mod projection;
mod target;
mod triangulate;
mod vertices;
mod zero_sum;

pub use combinations::{binomial, for_each_combination};
pub use grid::{simplex_grid, simplex_lattice};
pub use polytope::{HRep, Halfspace, Polytope};
pub use projection::{project_onto_polytope, project_onto_simplex};
pub use target::{NegativeOrthant, ProductTarget, Target};
pub use triangulate::{simplex_volume, triangulate, SimplexCover};
pub use vertices::enumerate_vertices;
pub use zero_sum::{solve_zero_sum, ZeroSumSolution};

pub(crate) use triangulate::{fan, lex_cmp};

pub const DEDUP_TOL: f64 = 1e-9;
pub const OPTIMALITY_TOL: f64 = 1e-8;
/// Largest reduced dimension handled by exhaustive vertex enumeration.
pub const MAX_ENUM_DIM: usize = 6;
pub(crate) const ENUM_GUARD: u128 = 5_000_000;
