//! η-calibrated forecasting through approachability of the negative orthant.

use rand::Rng;

use crate::blackwell::{minimax_row, update_state, ApproachState};
use crate::convex_geometry::{simplex_lattice, NegativeOrthant, Target};
use crate::error::{ensure_dim, ensure_finite, Error, Result};
use crate::linalg::{dirac, norm1};

/// Uniform lattice on `Δ(B)` whose ℓ¹ covering radius is at most `η / N_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationGrid {
    pub eta: f64,
    pub n_b: usize,
    /// lattice denominator: points are `z / k` with integer `z`
    pub k: usize,
    pub points: Vec<Vec<f64>>,
}

impl CalibrationGrid {
    /// Largest-remainder rounding onto `{z / k}` moves a point by at most `n / (2k)` in ℓ¹,
    /// so `k = ceil(n^2 / (2η))` gives the required covering radius.
    pub fn new(n_b: usize, eta: f64) -> Result<Self> {
        if n_b == 0 {
            return Err(Error::Empty("outcome set"));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Invalid(format!("calibration radius {eta} must be positive")));
        }
        let k = ((n_b * n_b) as f64 / (2.0 * eta) - 1e-9).ceil().max(1.0) as usize;
        Ok(CalibrationGrid {
            eta,
            n_b,
            k,
            points: simplex_lattice(n_b, k),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Guaranteed ℓ¹ covering radius `n / (2k)`.
    pub fn covering_radius(&self) -> f64 {
        self.n_b as f64 / (2.0 * self.k as f64)
    }

    /// Index of the ℓ¹-nearest grid point (first on ties).
    pub fn nearest(&self, y: &[f64]) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, p) in self.points.iter().enumerate() {
            let d: f64 = p.iter().zip(y).map(|(a, b)| (a - b).abs()).sum();
            if d < best.1 - 1e-15 {
                best = (i, d);
            }
        }
        best.0
    }

    /// Payoff dimension `2 N_η N_B`.
    pub fn payoff_dim(&self) -> usize {
        2 * self.len() * self.n_b
    }

    /// Norm bound `M = 4 + 2η` on the calibration payoffs.
    pub fn bound(&self) -> f64 {
        4.0 + 2.0 * self.eta
    }

    pub fn target(&self) -> NegativeOrthant {
        NegativeOrthant::capped(self.payoff_dim(), self.bound())
    }
}

/// Forecaster state: Blackwell state on the calibration payoffs plus per-index tallies.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibratorState {
    pub inner: ApproachState,
    pub counts: Vec<usize>,
    /// running sums of outcomes on rounds with each forecast
    pub outcome_sums: Vec<Vec<f64>>,
}

impl CalibratorState {
    pub fn new(grid: &CalibrationGrid) -> Self {
        CalibratorState {
            inner: ApproachState::new(grid.payoff_dim(), 0.0).expect("zero exponent is valid"),
            counts: vec![0; grid.len()],
            outcome_sums: vec![vec![0.0; grid.n_b]; grid.len()],
        }
    }

    pub fn t(&self) -> usize {
        self.inner.t
    }

    /// `ȳ^ℓ`, or `None` if index `l` was never forecast.
    pub fn mean_outcome(&self, l: usize) -> Option<Vec<f64>> {
        let n = self.counts[l];
        (n > 0).then(|| self.outcome_sums[l].iter().map(|v| v / n as f64).collect())
    }
}

/// `C(ℓ, y)`: zero except blocks `2ℓ-1` and `2ℓ` (1-based), holding
/// `y^ℓ - y - (η/N_B) 1` and `y - y^ℓ - (η/N_B) 1`.
pub fn calibration_payoff(grid: &CalibrationGrid, l: usize, y: &[f64]) -> Result<Vec<f64>> {
    if l >= grid.len() {
        return Err(Error::IndexOutOfRange {
            index: l,
            len: grid.len(),
        });
    }
    ensure_dim(grid.n_b, y.len())?;
    let nb = grid.n_b;
    let shift = grid.eta / nb as f64;
    let mut out = vec![0.0; grid.payoff_dim()];
    let first = 2 * l * nb;
    for b in 0..nb {
        out[first + b] = grid.points[l][b] - y[b] - shift;
        out[first + nb + b] = y[b] - grid.points[l][b] - shift;
    }
    Ok(out)
}

/// Payoff against a pure outcome.
pub fn calibration_payoff_pure(grid: &CalibrationGrid, l: usize, b: usize) -> Result<Vec<f64>> {
    if b >= grid.n_b {
        return Err(Error::IndexOutOfRange { index: b, len: grid.n_b });
    }
    calibration_payoff(grid, l, &dirac(grid.n_b, b))
}

/// Next forecast index.
///
/// Returns index 0 before any observation and whenever the average payoff already lies
/// in the orthant. Otherwise solves Blackwell's minimax problem for the calibration game;
/// a pure optimum is returned directly and a mixed one is sampled.
pub fn calibrated_forecast_step<R: Rng + ?Sized>(
    state: &mut CalibratorState,
    grid: &CalibrationGrid,
    rng: &mut R,
) -> Result<usize> {
    let Some(avg) = state.inner.average() else {
        state.inner.last_action = Some(dirac(grid.len(), 0));
        return Ok(0);
    };
    let target = grid.target();
    let proj = target.project(&avg)?;
    let dir: Vec<f64> = avg.iter().zip(&proj).map(|(a, c)| a - c).collect();
    if dir.iter().all(|v| *v <= 1e-15) {
        state.inner.last_action = Some(dirac(grid.len(), 0));
        return Ok(0);
    }
    let nb = grid.n_b;
    let shift = grid.eta / nb as f64;
    let matrix: Vec<Vec<f64>> = (0..grid.len())
        .map(|l| {
            let lo = &dir[2 * l * nb..(2 * l + 1) * nb];
            let hi = &dir[(2 * l + 1) * nb..(2 * l + 2) * nb];
            (0..nb)
                .map(|b| {
                    (0..nb)
                        .map(|j| {
                            let e = if j == b { 1.0 } else { 0.0 };
                            let y = grid.points[l][j];
                            lo[j] * (y - e - shift) + hi[j] * (e - y - shift)
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    let x = minimax_row(&matrix)?;
    state.inner.last_action = Some(x.clone());
    let top = (0..x.len()).max_by(|&a, &b| x[a].total_cmp(&x[b])).unwrap_or(0);
    if x[top] >= 1.0 - 1e-12 {
        return Ok(top);
    }
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in x.iter().enumerate() {
        acc += p;
        if u < acc {
            return Ok(i);
        }
    }
    Ok(top)
}

/// Record forecast `l` and outcome distribution `y` (a Dirac for realised outcomes).
pub fn calibration_update(state: &mut CalibratorState, grid: &CalibrationGrid, l: usize, y: &[f64]) -> Result<()> {
    ensure_finite(y, "outcome")?;
    let payoff = calibration_payoff(grid, l, y)?;
    update_state(&mut state.inner, &payoff, grid.bound())?;
    state.counts[l] += 1;
    crate::linalg::axpy(&mut state.outcome_sums[l], 1.0, y);
    Ok(())
}

/// The two calibration criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreVariant {
    /// `sum_ℓ (N(ℓ)/T) (|y^ℓ - ȳ^ℓ|_1 - η)_+`
    Truncated,
    /// `sum_ℓ (N(ℓ)/T) |y^ℓ - ȳ^ℓ|_1`, to be compared with `η + δ`
    Classical,
}

pub fn calibration_score(state: &CalibratorState, grid: &CalibrationGrid, variant: ScoreVariant) -> Result<f64> {
    let t = state.t();
    if t == 0 {
        return Err(Error::Empty("forecast history"));
    }
    let mut score = 0.0;
    for l in 0..grid.len() {
        if let Some(mean) = state.mean_outcome(l) {
            let gap = norm1(&crate::linalg::sub(&grid.points[l], &mean));
            let term = match variant {
                ScoreVariant::Truncated => (gap - grid.eta).max(0.0),
                ScoreVariant::Classical => gap,
            };
            score += state.counts[l] as f64 / t as f64 * term;
        }
    }
    Ok(score)
}

/// Same criteria recomputed from a raw history of `(forecast, outcome)` pairs.
pub fn calibration_score_batch(
    history: &[(usize, Vec<f64>)],
    grid: &CalibrationGrid,
    variant: ScoreVariant,
) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::Empty("forecast history"));
    }
    let t = history.len() as f64;
    let mut score = 0.0;
    for (l, point) in grid.points.iter().enumerate() {
        let rounds: Vec<&Vec<f64>> = history.iter().filter(|(f, _)| *f == l).map(|(_, y)| y).collect();
        if rounds.is_empty() {
            continue;
        }
        let n = rounds.len() as f64;
        let gap: f64 = (0..grid.n_b)
            .map(|b| (point[b] - rounds.iter().map(|y| y[b]).sum::<f64>() / n).abs())
            .sum();
        let term = match variant {
            ScoreVariant::Truncated => (gap - grid.eta).max(0.0),
            ScoreVariant::Classical => gap,
        };
        score += n / t * term;
    }
    Ok(score)
}

/// High-probability bound `2M sqrt(N_η N_B) sqrt(2 / (δ T))` on the truncated score.
pub fn calibration_bound(grid: &CalibrationGrid, t: usize, delta: f64) -> f64 {
    2.0 * grid.bound() * ((grid.len() * grid.n_b) as f64).sqrt() * (2.0 / (delta * t as f64)).sqrt()
}
