//! Blackwell's approachability strategy for finite vector-valued games.
//!
//! At every round the player projects the running (possibly polynomially weighted)
//! average payoff onto the target and plays a minimax strategy of the scalar game
//! obtained by taking inner products with the residual direction.

use crate::convex_geometry::{simplex_grid, solve_zero_sum, Polytope, Target};
use crate::error::{ensure_dim, ensure_finite, Error, Result};
use crate::linalg::{dot, norm, uniform};
use crate::lp::LinearProgram;

/// A finite game with vector payoffs `m(a, b)` in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorGame {
    n_a: usize,
    n_b: usize,
    d: usize,
    payoffs: Vec<Vec<Vec<f64>>>,
    bound: f64,
}

impl VectorGame {
    /// `payoffs[a][b]` is the vector payoff; the norm bound defaults to the largest norm.
    pub fn new(payoffs: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n_a = payoffs.len();
        if n_a == 0 || payoffs[0].is_empty() {
            return Err(Error::Empty("payoff table"));
        }
        let n_b = payoffs[0].len();
        let d = payoffs[0][0].len();
        let mut bound: f64 = 0.0;
        for row in &payoffs {
            ensure_dim(n_b, row.len())?;
            for v in row {
                ensure_dim(d, v.len())?;
                ensure_finite(v, "payoff")?;
                bound = bound.max(norm(v));
            }
        }
        Ok(VectorGame {
            n_a,
            n_b,
            d,
            payoffs,
            bound,
        })
    }

    /// Override the norm bound `M`; it must dominate every payoff norm.
    pub fn with_bound(mut self, bound: f64) -> Result<Self> {
        if !(bound >= self.bound - 1e-12) {
            return Err(Error::Invalid(format!(
                "bound {bound} is below the largest payoff norm {}",
                self.bound
            )));
        }
        self.bound = bound;
        Ok(self)
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

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn payoff(&self, a: usize, b: usize) -> &[f64] {
        &self.payoffs[a][b]
    }

    /// Bilinear extension `m(x, y)`.
    pub fn mixed_payoff(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for (a, &xa) in x.iter().enumerate() {
            if xa == 0.0 {
                continue;
            }
            for (b, &yb) in y.iter().enumerate() {
                let w = xa * yb;
                if w != 0.0 {
                    crate::linalg::axpy(&mut out, w, &self.payoffs[a][b]);
                }
            }
        }
        out
    }

    /// The scalar game `<u, m(a, b)>`.
    pub fn scalarize(&self, u: &[f64]) -> Vec<Vec<f64>> {
        self.payoffs
            .iter()
            .map(|row| row.iter().map(|v| dot(u, v)).collect())
            .collect()
    }
}

/// Which payoff the player gets to see after each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feedback {
    /// `m(A_t, B_t)` for the realised pure actions
    Pure,
    /// `m(x_t, y_t)` for the announced mixed actions
    Mixed,
    /// `m(x_t, B_t)`: own mixed action against the realised opponent action
    MixedAgainstPure,
}

impl Feedback {
    pub fn payoff(&self, game: &VectorGame, x: &[f64], a: usize, y: &[f64], b: usize) -> Vec<f64> {
        match self {
            Feedback::Pure => game.payoff(a, b).to_vec(),
            Feedback::Mixed => game.mixed_payoff(x, y),
            Feedback::MixedAgainstPure => game.mixed_payoff(x, &crate::linalg::dirac(game.n_b(), b)),
        }
    }
}

/// Running state of an approachability strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproachState {
    /// number of observed rounds
    pub t: usize,
    /// `sum_s s^alpha m_s`
    pub weighted_sum: Vec<f64>,
    /// `sum_s s^alpha`
    pub weight_total: f64,
    pub alpha: f64,
    pub last_action: Option<Vec<f64>>,
}

impl ApproachState {
    pub fn new(d: usize, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Invalid(format!("weight exponent {alpha} must be >= 0")));
        }
        Ok(ApproachState {
            t: 0,
            weighted_sum: vec![0.0; d],
            weight_total: 0.0,
            alpha,
            last_action: None,
        })
    }

    /// Weighted average payoff, or `None` before the first round.
    pub fn average(&self) -> Option<Vec<f64>> {
        if self.t == 0 {
            return None;
        }
        Some(self.weighted_sum.iter().map(|v| v / self.weight_total).collect())
    }

    pub fn distance(&self, target: &dyn Target) -> Result<f64> {
        match self.average() {
            None => Ok(0.0),
            Some(avg) => target.distance(&avg),
        }
    }
}

/// Minimising row strategy of `min_x max_y x^T g y`.
pub fn minimax_row(g: &[Vec<f64>]) -> Result<Vec<f64>> {
    let neg: Vec<Vec<f64>> = g.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
    Ok(solve_zero_sum(&neg)?.row)
}

/// Blackwell's next mixed action.
///
/// Plays uniformly before the first observation and whenever the average already lies
/// in the target. Otherwise solves the scalar game `<h - c, m(x, y)>` with `c` the
/// projection of the average `h`. The direction is normalised, so rescaling it does not
/// change the answer.
pub fn blackwell_step(state: &mut ApproachState, game: &VectorGame, target: &dyn Target) -> Result<Vec<f64>> {
    ensure_dim(game.d(), target.dim())?;
    ensure_dim(game.d(), state.weighted_sum.len())?;
    let x = match direction(state, target)? {
        None => uniform(game.n_a()),
        Some(u) => minimax_row(&game.scalarize(&u))?,
    };
    state.last_action = Some(x.clone());
    Ok(x)
}

/// Unit residual `(h - P(h)) / |h - P(h)|`, or `None` when there is nothing to correct.
pub fn direction(state: &ApproachState, target: &dyn Target) -> Result<Option<Vec<f64>>> {
    let Some(avg) = state.average() else {
        return Ok(None);
    };
    let c = target.project(&avg)?;
    let u: Vec<f64> = avg.iter().zip(&c).map(|(a, b)| a - b).collect();
    let n = norm(&u);
    if n <= 1e-12 {
        return Ok(None);
    }
    Ok(Some(u.iter().map(|v| v / n).collect()))
}

/// Fold one observed payoff into the state with weight `(t + 1)^alpha`.
pub fn update_state(state: &mut ApproachState, payoff: &[f64], bound: f64) -> Result<()> {
    ensure_dim(state.weighted_sum.len(), payoff.len())?;
    ensure_finite(payoff, "observed payoff")?;
    let n = norm(payoff);
    if n > bound + 1e-9 {
        return Err(Error::NormViolation { norm: n, bound });
    }
    let w = ((state.t + 1) as f64).powf(state.alpha);
    crate::linalg::axpy(&mut state.weighted_sum, w, payoff);
    state.weight_total += w;
    state.t += 1;
    Ok(())
}

/// Checks `for all y there is x with m(x, y) in C` on a grid of the opponent simplex.
/// Each grid point is an LP feasibility problem in `x`.
pub fn check_condition(game: &VectorGame, target: &Polytope, grid_res: f64) -> Result<bool> {
    ensure_dim(game.d(), target.dim())?;
    let h = target.hrep()?;
    if h.is_empty() {
        return Ok(false);
    }
    for y in simplex_grid(game.n_b(), grid_res)? {
        let images: Vec<Vec<f64>> = (0..game.n_a())
            .map(|a| game.mixed_payoff(&crate::linalg::dirac(game.n_a(), a), &y))
            .collect();
        if !exists_mixture_in(&images, target)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Is some convex combination of `points` inside the polytope?
pub(crate) fn exists_mixture_in(points: &[Vec<f64>], target: &Polytope) -> Result<bool> {
    let h = target.hrep()?;
    let n = points.len();
    let mut lp = LinearProgram::new(n);
    lp.eq(vec![1.0; n], 1.0);
    for hs in &h.halfspaces {
        lp.le(points.iter().map(|p| dot(&hs.normal, p)).collect(), hs.offset + 1e-10);
    }
    for hs in &h.equalities {
        let row: Vec<f64> = points.iter().map(|p| dot(&hs.normal, p)).collect();
        lp.le(row.clone(), hs.offset + 1e-10);
        lp.le(row.iter().map(|v| -v).collect(), -hs.offset + 1e-10);
    }
    lp.feasible()
}

/// `2M / sqrt(t)`: distance bound with mixed actions observed.
pub fn uniform_rate_bound(t: usize, bound: f64) -> f64 {
    2.0 * bound / (t as f64).sqrt()
}

/// `2M sqrt(sum s^{2 alpha}) / sum s^alpha` for the polynomially weighted average.
pub fn polynomial_rate_bound(t: usize, alpha: f64, bound: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for s in 1..=t {
        let w = (s as f64).powf(alpha);
        num += w * w;
        den += w;
    }
    2.0 * bound * num.sqrt() / den
}

/// Constant `K_alpha` with `polynomial_rate_bound <= 2 M K_alpha / sqrt(t)`.
pub fn k_alpha(alpha: f64) -> f64 {
    (alpha + 1.0) / (2.0 * alpha + 1.0).sqrt() * 2f64.powf(alpha + 1.0).sqrt()
}

/// `2M sqrt(2 / (delta t))`: high-probability bound when pure actions are observed.
pub fn pure_action_bound(t: usize, bound: f64, delta: f64) -> f64 {
    2.0 * bound * (2.0 / (delta * t as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_geometry::Polytope;

    fn pennies_game() -> VectorGame {
        // two-dimensional matching pennies: payoff (win, lose) indicator
        VectorGame::new(vec![
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        ])
        .unwrap()
    }

    #[test]
    fn first_step_is_uniform() {
        let g = pennies_game();
        let target = Polytope::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let mut s = ApproachState::new(2, 0.0).unwrap();
        assert_eq!(blackwell_step(&mut s, &g, &target).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn step_pushes_back_toward_target() {
        let g = pennies_game();
        let target = Polytope::cuboid(&[0.4, 0.4], &[0.6, 0.6]).unwrap();
        let mut s = ApproachState::new(2, 0.0).unwrap();
        update_state(&mut s, &[1.0, 0.0], 1.0).unwrap();
        let x = blackwell_step(&mut s, &g, &target).unwrap();
        // the worst case of <(0.4,-0.4)..., m(x,y)> is minimised at the uniform mixture
        assert!((x[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn norm_violation_is_reported() {
        let mut s = ApproachState::new(1, 0.0).unwrap();
        assert!(matches!(
            update_state(&mut s, &[2.0], 1.0),
            Err(Error::NormViolation { .. })
        ));
        assert!(ApproachState::new(1, -1.0).is_err());
    }

    #[test]
    fn weights_follow_the_exponent() {
        let mut s = ApproachState::new(1, 1.0).unwrap();
        update_state(&mut s, &[1.0], 1.0).unwrap();
        update_state(&mut s, &[0.0], 1.0).unwrap();
        assert!((s.average().unwrap()[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn k_alpha_dominates_the_weighted_bound() {
        for alpha in [0.0, 0.5, 1.0, 1.5, 3.0] {
            for t in [1, 2, 10, 1000] {
                let lhs = polynomial_rate_bound(t, alpha, 1.0);
                let rhs = 2.0 * k_alpha(alpha) / (t as f64).sqrt();
                assert!(lhs <= rhs + 1e-12, "alpha={alpha} t={t}");
            }
        }
        assert!((polynomial_rate_bound(1, 1.5, 1.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn condition_detects_unapproachable_point() {
        let g = pennies_game();
        let good = Polytope::cuboid(&[0.45, 0.45], &[0.55, 0.55]).unwrap();
        assert!(check_condition(&g, &good, 0.05).unwrap());
        let bad = Polytope::cuboid(&[0.9, 0.0], &[1.0, 0.1]).unwrap();
        assert!(!check_condition(&g, &bad, 0.05).unwrap());
    }
}
