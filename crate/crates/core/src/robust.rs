//! Robust approachability for games whose payoffs are known only up to a polytope.
//!
//! The set-valued game is lifted to the game on `Δ(A×B)` with indicator payoffs and the
//! target `C̃ = {μ : m̄(μ) ⊆ C}`, which is itself a polytope described through the
//! support functions of the payoff sets.

use crate::blackwell::{blackwell_step, exists_mixture_in, update_state, ApproachState, VectorGame};
use crate::calibration::{calibrated_forecast_step, calibration_update, CalibrationGrid, CalibratorState};
use crate::convex_geometry::{simplex_grid, Halfspace, Polytope, Target};
use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{dirac, norm};
use rand::Rng;

/// A finite game whose payoff for `(a, b)` is a polytope `m̄(a, b)` in R^d.
#[derive(Debug, Clone)]
pub struct SetValuedGame {
    n_a: usize,
    n_b: usize,
    d: usize,
    sets: Vec<Vec<Polytope>>,
    bound: f64,
}

impl SetValuedGame {
    pub fn new(sets: Vec<Vec<Polytope>>) -> Result<Self> {
        let n_a = sets.len();
        if n_a == 0 || sets[0].is_empty() {
            return Err(Error::Empty("set-valued payoff table"));
        }
        let n_b = sets[0].len();
        let d = sets[0][0].dim();
        let mut bound: f64 = 0.0;
        for row in &sets {
            ensure_dim(n_b, row.len())?;
            for s in row {
                ensure_dim(d, s.dim())?;
                for v in s.vertices()? {
                    bound = bound.max(norm(v));
                }
            }
        }
        Ok(SetValuedGame {
            n_a,
            n_b,
            d,
            sets,
            bound,
        })
    }

    /// Interval-valued game (d = 1) from `[lo, hi]` pairs.
    pub fn intervals(bounds: &[Vec<(f64, f64)>]) -> Result<Self> {
        let sets = bounds
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&(lo, hi)| Polytope::from_vertices(vec![vec![lo], vec![hi]]))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sets)
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Largest vertex norm `M`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn set(&self, a: usize, b: usize) -> &Polytope {
        &self.sets[a][b]
    }

    /// Support function of `m̄(μ) = sum_ab μ_ab m̄(a, b)` for `μ` flattened as `a * n_b + b`.
    pub fn support(&self, mu: &[f64], u: &[f64]) -> Result<f64> {
        let mut s = 0.0;
        for a in 0..self.n_a {
            for b in 0..self.n_b {
                let w = mu[a * self.n_b + b];
                if w != 0.0 {
                    s += w * self.sets[a][b].support(u)?;
                }
            }
        }
        Ok(s)
    }
}

/// `x ⊗ y` flattened as `a * n_b + b`.
pub fn outer(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().flat_map(|&xa| y.iter().map(move |&yb| xa * yb)).collect()
}

/// The lifted target together with the support values that define it.
#[derive(Debug, Clone)]
pub struct LiftedTarget {
    pub n_a: usize,
    pub n_b: usize,
    /// `{μ in Δ(A×B) : sum μ_ab h_k(a, b) <= f_k for every facet k of C}`
    pub tilde: Polytope,
    /// `h[k][a * n_b + b] = max_{v in m̄(a,b)} <e_k, v>`
    pub support: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

impl LiftedTarget {
    pub fn is_empty(&self) -> Result<bool> {
        self.tilde.is_empty()
    }

    /// Largest violation of the defining support inequalities at `μ`.
    pub fn violation(&self, mu: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.offsets)
            .map(|(h, f)| crate::linalg::dot(h, mu) - f)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Build `C̃` from an H-represented target. Equalities of `C` enter as two inequalities.
pub fn build_target_tilde(game: &SetValuedGame, c: &Polytope) -> Result<LiftedTarget> {
    ensure_dim(game.d(), c.dim())?;
    let h = c.hrep()?;
    let mut facets: Vec<(Vec<f64>, f64)> = h
        .halfspaces
        .iter()
        .map(|hs| (hs.normal.clone(), hs.offset))
        .collect();
    for e in &h.equalities {
        facets.push((e.normal.clone(), e.offset));
        facets.push((e.normal.iter().map(|v| -v).collect(), -e.offset));
    }
    let n = game.n_a() * game.n_b();
    let mut support = Vec::with_capacity(facets.len());
    let mut offsets = Vec::with_capacity(facets.len());
    let mut halfspaces = Vec::with_capacity(facets.len() + n);
    for (e, f) in &facets {
        let mut row = Vec::with_capacity(n);
        for a in 0..game.n_a() {
            for b in 0..game.n_b() {
                let v = game.set(a, b).support(e)?;
                row.push(if v.abs() <= 1e-12 * (1.0 + game.bound()) { 0.0 } else { v });
            }
        }
        halfspaces.push(Halfspace::new(row.clone(), *f));
        support.push(row);
        offsets.push(*f);
    }
    for i in 0..n {
        let mut a = vec![0.0; n];
        a[i] = -1.0;
        halfspaces.push(Halfspace::new(a, 0.0));
    }
    let tilde = Polytope::from_hrep_bounded(n, halfspaces, vec![Halfspace::new(vec![1.0; n], 1.0)])?;
    Ok(LiftedTarget {
        n_a: game.n_a(),
        n_b: game.n_b(),
        tilde,
        support,
        offsets,
    })
}

/// The lifted full-information game with payoffs `δ_(a,b)`.
pub fn lifted_game(n_a: usize, n_b: usize) -> VectorGame {
    let n = n_a * n_b;
    let payoffs = (0..n_a)
        .map(|a| (0..n_b).map(|b| dirac(n, a * n_b + b)).collect())
        .collect();
    VectorGame::new(payoffs).expect("indicator payoffs are well formed")
}

/// One robust step: Blackwell's strategy on the lifted game toward `C̃`.
pub fn robust_step(state: &mut ApproachState, lifted: &VectorGame, target: &LiftedTarget) -> Result<Vec<f64>> {
    if target.is_empty()? {
        return Err(Error::Precondition(
            "lifted target is empty: the robust approachability condition fails".into(),
        ));
    }
    blackwell_step(state, lifted, &target.tilde)
}

/// `sup_{d in m̄(μ)} dist(d, C)`, attained at a sum of vertex selections.
/// Pairs with zero weight are skipped; the number of selections is capped at 10^6.
pub fn worst_case_distance(mu: &[f64], game: &SetValuedGame, c: &dyn Target) -> Result<f64> {
    ensure_dim(game.n_a() * game.n_b(), mu.len())?;
    ensure_dim(game.d(), c.dim())?;
    let mut active: Vec<(f64, &[Vec<f64>])> = Vec::new();
    let mut count: u128 = 1;
    for a in 0..game.n_a() {
        for b in 0..game.n_b() {
            let w = mu[a * game.n_b() + b];
            if w > 1e-15 {
                let v = game.set(a, b).vertices()?;
                count = count.saturating_mul(v.len() as u128);
                active.push((w, v));
            }
        }
    }
    if count > 1_000_000 {
        return Err(Error::EnumerationGuard {
            count,
            max: 1_000_000,
        });
    }
    if active.is_empty() {
        return Err(Error::Invalid("measure has no mass".into()));
    }
    let mut pick = vec![0usize; active.len()];
    let mut worst: f64 = 0.0;
    loop {
        let mut point = vec![0.0; game.d()];
        for (i, (w, verts)) in active.iter().enumerate() {
            crate::linalg::axpy(&mut point, *w, &verts[pick[i]]);
        }
        worst = worst.max(c.distance(&point)?);
        let mut i = 0;
        loop {
            if i == active.len() {
                return Ok(worst);
            }
            pick[i] += 1;
            if pick[i] < active[i].1.len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

/// Checks `for all y there is x with x ⊗ y in C̃` on a grid of the opponent simplex.
pub fn check_rac(game: &SetValuedGame, c: &Polytope, grid_res: f64) -> Result<bool> {
    let target = build_target_tilde(game, c)?;
    if target.is_empty()? {
        return Ok(false);
    }
    for y in simplex_grid(game.n_b(), grid_res)? {
        let images: Vec<Vec<f64>> = (0..game.n_a()).map(|a| outer(&dirac(game.n_a(), a), &y)).collect();
        if !exists_mixture_in(&images, &target.tilde)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `2M sqrt(N_A N_B / t)`: worst-case distance bound with mixed actions observed.
pub fn robust_rate_bound(t: usize, bound: f64, n_a: usize, n_b: usize) -> f64 {
    2.0 * bound * ((n_a * n_b) as f64 / t as f64).sqrt()
}

/// Robust approachability driver with mixed actions observed.
#[derive(Debug, Clone)]
pub struct RobustApproacher {
    pub game: SetValuedGame,
    pub lifted: VectorGame,
    pub target: LiftedTarget,
    pub state: ApproachState,
}

impl RobustApproacher {
    pub fn new(game: SetValuedGame, c: &Polytope, alpha: f64) -> Result<Self> {
        let target = build_target_tilde(&game, c)?;
        let lifted = lifted_game(game.n_a(), game.n_b());
        let state = ApproachState::new(game.n_a() * game.n_b(), alpha)?;
        Ok(RobustApproacher {
            game,
            lifted,
            target,
            state,
        })
    }

    pub fn act(&mut self) -> Result<Vec<f64>> {
        robust_step(&mut self.state, &self.lifted, &self.target)
    }

    /// Record the announced mixed actions of both players.
    pub fn observe(&mut self, x: &[f64], y: &[f64]) -> Result<()> {
        update_state(&mut self.state, &outer(x, y), 1.0)
    }

    /// Current empirical measure on `A × B`.
    pub fn measure(&self) -> Option<Vec<f64>> {
        self.state.average()
    }
}

/// Robust play for a concave–convex set-valued payoff: forecast the opponent with an
/// η-calibrated forecaster and answer each grid point with a precomputed response
/// `x^ℓ` satisfying `m̄(x^ℓ, y^ℓ) ⊆ C`.
pub fn robust_concave_convex_step(responses: &[Vec<f64>], forecast: usize) -> Result<Vec<f64>> {
    responses
        .get(forecast)
        .cloned()
        .ok_or(Error::IndexOutOfRange {
            index: forecast,
            len: responses.len(),
        })
}

/// Stateful wrapper pairing a calibrated forecaster with its response table.
#[derive(Debug, Clone)]
pub struct ConcaveConvexPlayer {
    pub grid: CalibrationGrid,
    pub forecaster: CalibratorState,
    pub responses: Vec<Vec<f64>>,
}

impl ConcaveConvexPlayer {
    pub fn new(grid: CalibrationGrid, responses: Vec<Vec<f64>>) -> Result<Self> {
        ensure_dim(grid.len(), responses.len())?;
        let forecaster = CalibratorState::new(&grid);
        Ok(ConcaveConvexPlayer {
            grid,
            forecaster,
            responses,
        })
    }

    /// Returns the forecast index and the mixed action played.
    pub fn act<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(usize, Vec<f64>)> {
        let l = calibrated_forecast_step(&mut self.forecaster, &self.grid, rng)?;
        Ok((l, robust_concave_convex_step(&self.responses, l)?))
    }

    pub fn observe(&mut self, forecast: usize, outcome: &[f64]) -> Result<()> {
        calibration_update(&mut self.forecaster, &self.grid, forecast, outcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval_game() -> SetValuedGame {
        SetValuedGame::intervals(&[
            vec![(0.0, 0.2), (0.1, 0.3)],
            vec![(-1.0, 1.0), (0.5, 0.6)],
        ])
        .unwrap()
    }

    #[test]
    fn tilde_contains_the_safe_row() {
        let g = interval_game();
        let c = Polytope::cuboid(&[0.0], &[0.3]).unwrap();
        let t = build_target_tilde(&g, &c).unwrap();
        assert!(t.tilde.contains(&[0.5, 0.5, 0.0, 0.0], 1e-12).unwrap());
        assert!(!t.tilde.contains(&[0.0, 0.0, 0.5, 0.5], 1e-12).unwrap());
        assert!(check_rac(&g, &c, 0.1).unwrap());
    }

    #[test]
    fn empty_tilde_blocks_the_step() {
        let g = interval_game();
        let c = Polytope::cuboid(&[5.0], &[6.0]).unwrap();
        let mut r = RobustApproacher::new(g, &c, 0.0).unwrap();
        assert!(matches!(r.act(), Err(Error::Precondition(_))));
    }

    #[test]
    fn worst_case_distance_uses_endpoints() {
        let g = interval_game();
        let c = Polytope::cuboid(&[0.0], &[0.3]).unwrap();
        // all mass on (1, 0): the interval [-1, 1] is 1 away from [0, 0.3] at -1
        let d = worst_case_distance(&[0.0, 0.0, 1.0, 0.0], &g, &c).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        let d = worst_case_distance(&[0.5, 0.0, 0.5, 0.0], &g, &c).unwrap();
        // half of [0, 0.2] plus half of [-1, 1] = [-0.5, 0.6]
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn concave_convex_lookup() {
        let r = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(robust_concave_convex_step(&r, 1).unwrap(), vec![0.0, 1.0]);
        assert!(robust_concave_convex_step(&r, 2).is_err());
    }
}
