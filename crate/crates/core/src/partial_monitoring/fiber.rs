use crate::convex_geometry::{Halfspace, Polytope, DEDUP_TOL};
use crate::error::{ensure_dim, ensure_finite, Error, Result};
use crate::linalg::{dist, norm};

use super::game::{PMGame, SignalOperator};

/// Tolerance for deciding that a signal vector lies in `F`.
pub const FIBER_TOL: f64 = 1e-9;

/// The fiber `{q in Δ(J) : H̃(q) = σ}`.
pub fn fiber(op: &SignalOperator, sigma: &[f64]) -> Result<Polytope> {
    ensure_dim(op.dim(), sigma.len())?;
    ensure_finite(sigma, "signal vector")?;
    let n = op.n_j;
    let mut halfspaces = Vec::with_capacity(n);
    for j in 0..n {
        let mut a = vec![0.0; n];
        a[j] = -1.0;
        halfspaces.push(Halfspace::new(a, 0.0));
    }
    let mut equalities = vec![Halfspace::new(vec![1.0; n], 1.0)];
    for (r, &s) in sigma.iter().enumerate() {
        let row: Vec<f64> = op.columns.iter().map(|c| c[r]).collect();
        equalities.push(Halfspace::new(row, s));
    }
    let p = Polytope::from_hrep_bounded(n, halfspaces, equalities)?;
    if p.is_empty()? {
        return Err(outside(op, sigma));
    }
    Ok(p)
}

fn outside(op: &SignalOperator, sigma: &[f64]) -> Error {
    let d = op
        .feasible_set()
        .and_then(|f| f.distance(sigma))
        .unwrap_or(f64::INFINITY);
    Error::OutsideFeasibleSet(d)
}

/// Vertices of the fiber over `σ`, checked to reproduce `σ` within [`FIBER_TOL`].
pub fn fiber_vertices(op: &SignalOperator, sigma: &[f64]) -> Result<Vec<Vec<f64>>> {
    let f = fiber(op, sigma)?;
    let verts = f.vertices()?.to_vec();
    let scale = 1.0 + norm(sigma);
    for q in &verts {
        if dist(&op.apply(q), sigma) > FIBER_TOL * scale {
            return Err(outside(op, sigma));
        }
    }
    Ok(verts)
}

/// Images `r(p, q_v)` of the given fiber vertices, deduplicated.
pub fn fiber_images(game: &PMGame, p: &[f64], fiber_verts: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(fiber_verts.len());
    for q in fiber_verts {
        let v = game.mixed_payoff(p, q);
        if !out.iter().any(|w| dist(w, &v) <= DEDUP_TOL) {
            out.push(v);
        }
    }
    out
}

/// `m̄(p, σ) = {r(p, q) : q in Δ(J), H̃(q) = σ}`, the convex hull of the images of the
/// fiber vertices.
pub fn mbar(game: &PMGame, op: &SignalOperator, p: &[f64], sigma: &[f64]) -> Result<Polytope> {
    ensure_dim(game.n_actions(), p.len())?;
    let verts = fiber_vertices(op, sigma)?;
    Polytope::hull_of(fiber_images(game, p, &verts))
}

/// Support function of `m̄(p, σ)` given precomputed fiber vertices.
pub fn mbar_support(game: &PMGame, p: &[f64], fiber_verts: &[Vec<f64>], u: &[f64]) -> f64 {
    fiber_verts
        .iter()
        .map(|q| crate::linalg::dot(u, &game.mixed_payoff(p, q)))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partial_monitoring::fixtures;

    #[test]
    fn fiber_of_a_dirac_image_contains_the_dirac() {
        let g = fixtures::dark_pennies();
        let op = g.signal_operator();
        for j in 0..g.n_outcomes() {
            let f = fiber(&op, &op.columns[j]).unwrap();
            let mut q = vec![0.0; g.n_outcomes()];
            q[j] = 1.0;
            assert!(f.contains(&q, 1e-9).unwrap());
        }
    }

    #[test]
    fn fiber_with_fixed_heart_mass() {
        let g = fixtures::dark_pennies();
        let op = g.signal_operator();
        let sigma = op.apply(&[0.7, 0.0, 0.3]);
        let mut v = fiber_vertices(&op, &sigma).unwrap();
        v.sort_by(|a, b| b[0].total_cmp(&a[0]));
        assert_eq!(v.len(), 2);
        for (got, want) in v.iter().zip([[0.7, 0.0, 0.3], [0.0, 0.7, 0.3]]) {
            assert!(dist(got, &want) < 1e-12);
        }
    }

    #[test]
    fn mbar_at_the_club_signal() {
        let g = fixtures::dark_pennies();
        let op = g.signal_operator();
        let club = op.apply(&[1.0, 0.0, 0.0]);
        let m = mbar(&g, &op, &[0.0, 1.0], &club).unwrap();
        assert!((m.support(&[1.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((m.support(&[-1.0]).unwrap() - 1.0).abs() < 1e-12);
        let m = mbar(&g, &op, &[0.5, 0.5], &club).unwrap();
        assert_eq!(m.vertices().unwrap().len(), 1);
    }

    #[test]
    fn signals_outside_f_are_rejected() {
        let g = fixtures::dark_pennies();
        let op = g.signal_operator();
        let bad = vec![2.0; op.dim()];
        assert!(matches!(fiber(&op, &bad), Err(Error::OutsideFeasibleSet(_))));
    }
}
