use std::collections::HashSet;

use crate::convex_geometry::{simplex_grid, Polytope};
use crate::error::{ensure_dim, Result};
use crate::lp::{LinearProgram, LpOutcome};

use super::fiber::fiber_vertices;
use super::game::{PMGame, SignalOperator};

/// Outcome of [`check_apm_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ApmReport {
    pub holds: bool,
    /// signal vectors examined
    pub checked: usize,
    /// first signal vector with no admissible reply
    pub witness: Option<Vec<f64>>,
}

/// Facets of `C` as `(normal, offset)` rows, equalities split in two.
pub(crate) fn facets(c: &Polytope) -> Result<Vec<(Vec<f64>, f64)>> {
    let h = c.hrep()?;
    let mut rows: Vec<(Vec<f64>, f64)> = h.halfspaces.iter().map(|hs| (hs.normal.clone(), hs.offset)).collect();
    for e in &h.equalities {
        rows.push((e.normal.clone(), e.offset));
        rows.push((e.normal.iter().map(|v| -v).collect(), -e.offset));
    }
    Ok(rows)
}

/// Is there `p in Δ(I)` with `m̄(p, σ) ⊆ C`? Since `m̄(p, σ)` is the hull of
/// `r(p, q_v)` over fiber vertices, this is one LP in `p`.
pub fn has_reply(game: &PMGame, fiber_verts: &[Vec<f64>], rows: &[(Vec<f64>, f64)]) -> Result<bool> {
    let n = game.n_actions();
    let mut lp = LinearProgram::new(n);
    lp.eq(vec![1.0; n], 1.0);
    for q in fiber_verts {
        let images: Vec<Vec<f64>> = (0..n)
            .map(|k| game.mixed_payoff(&crate::linalg::dirac(n, k), q))
            .collect();
        for (e, f) in rows {
            let row: Vec<f64> = images.iter().map(|r| crate::linalg::dot(e, r)).collect();
            lp.le(row, f + 1e-9);
        }
    }
    Ok(!matches!(lp.solve()?, LpOutcome::Infeasible))
}

/// Grid check of the condition `for all σ in F there is p with m̄(p, σ) ⊆ C`.
///
/// The signal vectors examined are the images of a `grid_res` grid of `Δ(J)` together
/// with the images of the outcome Diracs.
pub fn check_apm(game: &PMGame, c: &Polytope, grid_res: f64) -> Result<bool> {
    Ok(check_apm_report(game, c, grid_res)?.holds)
}

pub fn check_apm_report(game: &PMGame, c: &Polytope, grid_res: f64) -> Result<ApmReport> {
    ensure_dim(game.d(), c.dim())?;
    let op = SignalOperator::new(game);
    let rows = facets(c)?;
    if c.is_empty()? {
        return Ok(ApmReport {
            holds: false,
            checked: 0,
            witness: None,
        });
    }
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut checked = 0;
    let qs = op
        .columns
        .iter()
        .enumerate()
        .map(|(j, _)| crate::linalg::dirac(op.n_j, j))
        .chain(simplex_grid(op.n_j, grid_res)?);
    for q in qs {
        let sigma = op.apply(&q);
        let key: Vec<i64> = sigma.iter().map(|v| (v * 1e9).round() as i64).collect();
        if !seen.insert(key) {
            continue;
        }
        checked += 1;
        let verts = fiber_vertices(&op, &sigma)?;
        if !has_reply(game, &verts, &rows)? {
            return Ok(ApmReport {
                holds: false,
                checked,
                witness: Some(sigma),
            });
        }
    }
    Ok(ApmReport {
        holds: true,
        checked,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partial_monitoring::fixtures;

    #[test]
    fn dark_pennies_interval_targets() {
        let g = fixtures::dark_pennies();
        // under ♣ the mixture (1/2, 1/2) guarantees exactly 0; under ♥ both rows pay >= 2
        let wide = Polytope::cuboid(&[-0.2], &[3.0]).unwrap();
        assert!(check_apm(&g, &wide, 0.1).unwrap());
        let tight = Polytope::cuboid(&[0.5], &[3.0]).unwrap();
        let rep = check_apm_report(&g, &tight, 0.1).unwrap();
        assert!(!rep.holds);
        assert!(rep.witness.is_some());
    }
}
