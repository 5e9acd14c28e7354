//! Games that are not bi-piecewise linear.
//!
//! Each coordinate of `m̄(p, b)` is replaced by its range, giving the box `m̃(p, b)`.
//! The box endpoints are scalar lower and upper envelopes, hence piecewise linear in `p`,
//! so the box surrogate `m̆(p, σ) = Σ_b Φ_b(σ) m̃(p, b)` admits an exact bilinear lift.
//! A box lies in the negative orthant as soon as its upper corner does, which is why the
//! surrogate is used with orthant targets, and general polytopes are reduced to that case
//! by [`polytope_transform`].

use crate::convex_geometry::{simplex_grid, NegativeOrthant, Polytope, Target};
use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{dirac, dot, norm};
use crate::lp::{LinearProgram, LpOutcome};
use crate::partial_monitoring::{
    decompose_signal_space, fiber_vertices, ActionDecomposition, BilinearLift, BlockSchedule, BlockStrategy, PMGame,
    SignalDecomposition, SignalOperator,
};
use crate::robust::SetValuedGame;

/// Largest payoff dimension for which boxes are stored by their corners.
pub const MAX_BOX_DIM: usize = 12;

/// The box surrogate of a partial-monitoring game.
#[derive(Debug, Clone)]
pub struct BoxSurrogate {
    pub game: PMGame,
    pub op: SignalOperator,
    pub signals: SignalDecomposition,
    pub actions: ActionDecomposition,
    fibers: Vec<Vec<Vec<f64>>>,
}

impl BoxSurrogate {
    /// Per-coordinate range of `r(p, q_v)` over the fiber vertices of anchor `b`.
    pub fn box_at(&self, p: &[f64], b: usize) -> (Vec<f64>, Vec<f64>) {
        coordinate_ranges(&self.game, p, &self.fibers[b])
    }

    /// `m̆(p, σ) = Σ_b Φ_b(σ) m̃(p, b)`, itself a box.
    pub fn breve(&self, p: &[f64], sigma: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d = self.game.d();
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        for (b, w) in self.signals.phi(sigma).iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let (l, h) = self.box_at(p, b);
            crate::linalg::axpy(&mut lo, *w, &l);
            crate::linalg::axpy(&mut hi, *w, &h);
        }
        (lo, hi)
    }

    /// The bilinear lift `m̃(a, b)` over the anchors.
    pub fn lift(&self) -> Result<BilinearLift> {
        let sets = self
            .actions
            .anchors()
            .iter()
            .map(|a| {
                (0..self.signals.len())
                    .map(|b| {
                        let (lo, hi) = self.box_at(a, b);
                        box_polytope(&lo, &hi)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        BilinearLift::from_table(self.actions.clone(), self.signals.clone(), SetValuedGame::new(sets)?)
    }
}

fn coordinate_ranges(game: &PMGame, p: &[f64], fiber: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let d = game.d();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for q in fiber {
        let v = game.mixed_payoff(p, q);
        for k in 0..d {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    (lo, hi)
}

/// The box `[lo, hi]` by its distinct corners.
pub fn box_polytope(lo: &[f64], hi: &[f64]) -> Result<Polytope> {
    ensure_dim(lo.len(), hi.len())?;
    let d = lo.len();
    if d > MAX_BOX_DIM {
        return Err(Error::DimensionGuard {
            what: "box corners",
            dim: d,
            max: MAX_BOX_DIM,
        });
    }
    let free: Vec<usize> = (0..d).filter(|&k| hi[k] - lo[k] > 1e-12).collect();
    let mut corners = Vec::with_capacity(1 << free.len());
    for mask in 0..(1usize << free.len()) {
        let mut c = lo.to_vec();
        for (bit, &k) in free.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                c[k] = hi[k];
            }
        }
        corners.push(c);
    }
    Polytope::from_vertices(corners)
}

/// Build `m̃` and its action anchors.
///
/// With two actions the anchors are the kinks of the per-coordinate envelopes of
/// `λ ↦ r_k(p_λ, q_v)`. With more actions the box endpoints must be linear on the whole
/// simplex, which is checked; otherwise the dimension guard fires.
pub fn build_box_surrogate(game: &PMGame) -> Result<BoxSurrogate> {
    let op = game.signal_operator();
    let signals = decompose_signal_space(&op)?;
    let fibers: Vec<Vec<Vec<f64>>> = signals
        .anchors()
        .iter()
        .map(|b| fiber_vertices(&op, b))
        .collect::<Result<_>>()?;
    let n = game.n_actions();
    let d = game.d();
    let tol = 1e-9 * (1.0 + game.bound());
    let actions = if n == 2 {
        let mut kinks = Vec::new();
        for fv in &fibers {
            for k in 0..d {
                let lines: Vec<(f64, f64)> = fv
                    .iter()
                    .map(|q| {
                        let a = game.mixed_payoff(&[1.0, 0.0], q)[k];
                        let b = game.mixed_payoff(&[0.0, 1.0], q)[k];
                        (a, b - a)
                    })
                    .collect();
                for (v, &(av, bv)) in lines.iter().enumerate() {
                    for &(aw, bw) in &lines[v + 1..] {
                        if (bv - bw).abs() <= tol {
                            continue;
                        }
                        let l = (aw - av) / (bv - bw);
                        if l <= 1e-12 || l >= 1.0 - 1e-12 {
                            continue;
                        }
                        let val = av + bv * l;
                        let vals = lines.iter().map(|(a, b)| a + b * l);
                        let top = vals.clone().fold(f64::NEG_INFINITY, f64::max);
                        let bot = vals.fold(f64::INFINITY, f64::min);
                        if val >= top - tol || val <= bot + tol {
                            kinks.push(l);
                        }
                    }
                }
            }
        }
        ActionDecomposition::breakpoints(&kinks)?
    } else {
        let pure: Vec<Vec<f64>> = (0..n).map(|i| dirac(n, i)).collect();
        for fv in &fibers {
            let ends: Vec<(Vec<f64>, Vec<f64>)> = pure.iter().map(|e| coordinate_ranges(game, e, fv)).collect();
            for p in simplex_grid(n, 0.25)? {
                let (lo, hi) = coordinate_ranges(game, &p, fv);
                for k in 0..d {
                    let lin_lo: f64 = ends.iter().zip(&p).map(|((l, _), w)| w * l[k]).sum();
                    let lin_hi: f64 = ends.iter().zip(&p).map(|((_, h), w)| w * h[k]).sum();
                    if (lo[k] - lin_lo).abs() > tol || (hi[k] - lin_hi).abs() > tol {
                        return Err(Error::DimensionGuard {
                            what: "box surrogate actions with nonlinear envelopes",
                            dim: n,
                            max: 2,
                        });
                    }
                }
            }
        }
        ActionDecomposition::vertices(n)
    };
    Ok(BoxSurrogate {
        game: game.clone(),
        op,
        signals,
        actions,
        fibers,
    })
}

/// Block strategy approaching the negative orthant (capped at `−R`) with the surrogate.
pub fn orthant_strategy(surrogate: &BoxSurrogate, schedule: BlockSchedule) -> Result<BlockStrategy> {
    let d = surrogate.game.d();
    let cap = surrogate.game.bound().max(1e-9);
    let target = NegativeOrthant::capped(d, cap).to_polytope()?;
    let lift = surrogate.lift()?;
    if !lifted_condition(&lift, &target, surrogate, 0.1)? {
        return Err(Error::Precondition(
            "the box surrogate does not satisfy the approachability condition for the orthant".into(),
        ));
    }
    BlockStrategy::new(surrogate.game.clone(), lift, &target, schedule)
}

/// One step of [`orthant_strategy`]: fold in a signal and return the next distribution.
pub fn orthant_strategy_step(strategy: &mut BlockStrategy, base_action: usize, signal: usize) -> Result<Vec<f64>> {
    crate::partial_monitoring::pm_strategy_step(strategy, base_action, signal)
}

/// For every grid signal vector `σ`, is there `θ` with `m̿(θ, Φ(σ)) ⊆ C`?
pub fn lifted_condition(lift: &BilinearLift, c: &Polytope, surrogate: &BoxSurrogate, grid_res: f64) -> Result<bool> {
    let rows = crate::partial_monitoring::facets(c)?;
    let n_a = lift.actions.len();
    let n_b = lift.signals.len();
    let support: Vec<Vec<Vec<f64>>> = rows
        .iter()
        .map(|(e, _)| {
            (0..n_a)
                .map(|a| (0..n_b).map(|b| lift.table.set(a, b).support(e)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let op = &surrogate.op;
    let sigmas = (0..op.n_j)
        .map(|j| op.columns[j].clone())
        .chain(simplex_grid(op.n_j, grid_res)?.into_iter().map(|q| op.apply(&q)));
    for sigma in sigmas {
        let phi = lift.signals.phi(&sigma);
        let mut lp = LinearProgram::new(n_a);
        lp.eq(vec![1.0; n_a], 1.0);
        for ((_, f), h) in rows.iter().zip(&support) {
            let row: Vec<f64> = (0..n_a).map(|a| dot(&h[a], &phi)).collect();
            lp.le(row, f + 1e-9);
        }
        if matches!(lp.solve()?, LpOutcome::Infeasible) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A game whose payoff measures the violation of each constraint of a polytope target.
#[derive(Debug, Clone)]
pub struct TransformedGame {
    pub source: PMGame,
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
    /// payoffs `r_C(i, j)_k = <r(i, j), e_k> − f_k`
    pub game: PMGame,
    /// orthant `[−R_C, 0]^K` with `R_C` the largest transformed payoff norm
    pub target: NegativeOrthant,
}

impl TransformedGame {
    /// Map an original payoff vector to constraint violations.
    pub fn transform(&self, r: &[f64]) -> Vec<f64> {
        self.normals.iter().zip(&self.offsets).map(|(e, f)| dot(e, r) - f).collect()
    }

    /// Euclidean distance of a transformed average to the orthant.
    pub fn orthant_distance(&self, rc: &[f64]) -> Result<f64> {
        self.target.distance(rc)
    }

    /// Largest positive constraint violation.
    pub fn max_violation(&self, rc: &[f64]) -> f64 {
        rc.iter().fold(0.0, |m, v| m.max(*v))
    }
}

/// `r_C(i, j) = [<r(i, j), e_k> − f_k]_k` for the facets of `C`; equalities of `C`
/// contribute two opposite rows.
pub fn polytope_transform(game: &PMGame, c: &Polytope) -> Result<TransformedGame> {
    ensure_dim(game.d(), c.dim())?;
    let rows = crate::partial_monitoring::facets(c)?;
    if rows.is_empty() {
        return Err(Error::Empty("target constraints"));
    }
    let (normals, offsets): (Vec<Vec<f64>>, Vec<f64>) = rows.into_iter().unzip();
    let payoff: Vec<Vec<Vec<f64>>> = game
        .payoff_table()
        .iter()
        .map(|row| {
            row.iter()
                .map(|r| normals.iter().zip(&offsets).map(|(e, f)| dot(e, r) - f).collect())
                .collect()
        })
        .collect();
    let transformed = game.with_payoffs(payoff)?;
    let bound = transformed
        .payoff_table()
        .iter()
        .flatten()
        .map(|v| norm(v))
        .fold(0.0, f64::max)
        .max(1e-9);
    Ok(TransformedGame {
        source: game.clone(),
        target: NegativeOrthant::capped(normals.len(), bound),
        normals,
        offsets,
        game: transformed,
    })
}
