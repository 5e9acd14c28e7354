//! Seeded instances shared by the benchmarks.
use approachkit::blackwell::VectorGame;
use approachkit::convex_geometry::Polytope;
use approachkit::linalg::{random_simplex_point, random_unit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Convex hull of `n` random points of the unit sphere in R^d.
pub fn random_polytope(seed: u64, d: usize, n: usize) -> Polytope {
    let mut r = rng(seed);
    Polytope::hull_of((0..n).map(|_| random_unit(&mut r, d)).collect()).expect("points span R^d")
}

/// A game with payoffs uniform in `[-1, 1]^d`.
pub fn random_game(seed: u64, n_a: usize, n_b: usize, d: usize) -> VectorGame {
    let mut r = rng(seed);
    let payoffs = (0..n_a)
        .map(|_| (0..n_b).map(|_| (0..d).map(|_| r.gen_range(-1.0..1.0)).collect()).collect())
        .collect();
    VectorGame::new(payoffs).expect("table is rectangular")
}

/// Random points of the simplex in R^n.
pub fn simplex_points(seed: u64, n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..count).map(|_| random_simplex_point(&mut r, n)).collect()
}
