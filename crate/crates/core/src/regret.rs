//! External and swap regret under partial monitoring, cast as approachability of a
//! polytope by the payoff `[r; H̃(δ_j)]`.
//!
//! The pessimistic value `ρ(p, σ)` is the worst payoff of `p` over the fiber of `σ`. The
//! best-reply value `g(σ) = max_p ρ(p, σ)` is convex in `σ` and piecewise affine, so the
//! target `{(z, σ) : z >= g(σ)}` is a polytope once capped.

use crate::convex_geometry::{solve_zero_sum, Halfspace, Polytope, ProductTarget, Target};
use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{dirac, dot, norm};
use crate::partial_monitoring::{
    build_action_decomposition, decompose_signal_space, fiber_vertices, ActionDecomposition, BilinearLift, PMGame,
    SignalDecomposition, SignalOperator,
};

/// `ρ(p, σ) = min { r(p, q) : H̃(q) = σ }` for a scalar game.
pub fn rho(game: &PMGame, op: &SignalOperator, p: &[f64], sigma: &[f64]) -> Result<f64> {
    ensure_scalar(game)?;
    let verts = fiber_vertices(op, sigma)?;
    Ok(verts
        .iter()
        .map(|q| game.mixed_payoff(p, q)[0])
        .fold(f64::INFINITY, f64::min))
}

/// `ρ` extended to the cone over `F`: `ρ(p, λσ) = λ ρ(p, σ)`, and 0 at the apex.
pub fn rho_cone(game: &PMGame, op: &SignalOperator, p: &[f64], v: &[f64]) -> Result<f64> {
    let lambda = v.iter().sum::<f64>() / op.n_i as f64;
    if lambda <= 1e-15 {
        return Ok(0.0);
    }
    let sigma: Vec<f64> = v.iter().map(|x| x / lambda).collect();
    Ok(lambda * rho(game, op, p, &sigma)?)
}

/// `max_p ρ(p, σ)`, solved exactly as the matrix game `r(i, q_v)` over fiber vertices.
pub fn max_rho(game: &PMGame, op: &SignalOperator, sigma: &[f64]) -> Result<f64> {
    ensure_scalar(game)?;
    let verts = fiber_vertices(op, sigma)?;
    let n = game.n_actions();
    let m: Vec<Vec<f64>> = (0..n)
        .map(|k| verts.iter().map(|q| game.mixed_payoff(&dirac(n, k), q)[0]).collect())
        .collect();
    Ok(solve_zero_sum(&m)?.value)
}

fn ensure_scalar(game: &PMGame) -> Result<()> {
    if game.d() != 1 {
        return Err(Error::Invalid(format!("regret needs scalar payoffs, got d = {}", game.d())));
    }
    Ok(())
}

/// The affine function `σ ↦ gradient · σ + offset` extending `ρ(p_k, ·)` from one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePiece {
    pub gradient: Vec<f64>,
    pub offset: f64,
    /// index of the mixed action `p_k`
    pub action: usize,
    /// index of the cell of the signal decomposition
    pub cell: usize,
}

impl AffinePiece {
    pub fn eval(&self, sigma: &[f64]) -> f64 {
        dot(&self.gradient, sigma) + self.offset
    }
}

/// Affine extensions of `ρ(p_k, ·)` from every cell. Since each `ρ(p_k, ·)` is convex on
/// `F`, every extension stays below it, and their maximum is `max_k ρ(p_k, ·)`.
pub fn affine_pieces(
    game: &PMGame,
    op: &SignalOperator,
    signals: &SignalDecomposition,
    candidates: &[Vec<f64>],
) -> Result<Vec<AffinePiece>> {
    let rho_b: Vec<Vec<f64>> = candidates
        .iter()
        .map(|p| signals.anchors().iter().map(|b| rho(game, op, p, b)).collect())
        .collect::<Result<_>>()?;
    let mut pieces = Vec::new();
    for c in 0..signals.cells().len() {
        let bary = signals.barycentric_affine(c);
        let cell = &signals.cells()[c];
        for (k, rk) in rho_b.iter().enumerate() {
            let mut gradient = vec![0.0; op.dim()];
            let mut offset = 0.0;
            for ((g, c0), &b) in bary.iter().zip(cell) {
                crate::linalg::axpy(&mut gradient, rk[b], g);
                offset += rk[b] * c0;
            }
            let dup = pieces.iter().any(|p: &AffinePiece| {
                (p.offset - offset).abs() < 1e-12 && crate::linalg::dist(&p.gradient, &gradient) < 1e-12
            });
            if !dup {
                pieces.push(AffinePiece {
                    gradient,
                    offset,
                    action: k,
                    cell: c,
                });
            }
        }
    }
    Ok(pieces)
}

/// `r̲(i, j) = [r(i, j); H̃(δ_j)]`.
pub fn augmented_payoffs(game: &PMGame, op: &SignalOperator) -> Vec<Vec<Vec<f64>>> {
    (0..game.n_actions())
        .map(|k| {
            (0..game.n_outcomes())
                .map(|j| {
                    let mut v = game.payoff(k, j).to_vec();
                    v.extend_from_slice(&op.columns[j]);
                    v
                })
                .collect()
        })
        .collect()
}

/// External regret as approachability of `C = {(z, σ) : z >= g(σ), σ in F, z <= R}`.
#[derive(Debug, Clone)]
pub struct ExternalRegretInstance {
    pub base: PMGame,
    pub op: SignalOperator,
    /// the same signals with payoffs `r̲`
    pub lifted: PMGame,
    pub signals: SignalDecomposition,
    pub actions: ActionDecomposition,
    pub pieces: Vec<AffinePiece>,
    pub target: Polytope,
    /// largest piece gradient norm, a Lipschitz constant of `g`
    pub lipschitz: f64,
}

impl ExternalRegretInstance {
    /// `g(σ)` as the maximum of the affine pieces.
    pub fn best_reply_value(&self, sigma: &[f64]) -> f64 {
        self.pieces.iter().map(|p| p.eval(sigma)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// The bilinear lift of the augmented game, for the block strategy.
    pub fn lift(&self) -> Result<BilinearLift> {
        BilinearLift::with_actions(&self.lifted, &self.op, self.signals.clone(), self.actions.clone())
    }

    /// Regret bound implied by a distance to `C`.
    pub fn regret_bound(&self, distance: f64) -> f64 {
        std::f64::consts::SQRT_2 * self.lipschitz.max(1.0) * distance
    }
}

pub fn build_external_instance(game: &PMGame) -> Result<ExternalRegretInstance> {
    ensure_scalar(game)?;
    let op = game.signal_operator();
    let signals = decompose_signal_space(&op)?;
    let actions = build_action_decomposition(game, &op, &signals)?;
    let pieces = affine_pieces(game, &op, &signals, actions.anchors())?;
    let lipschitz = pieces.iter().map(|p| norm(&p.gradient)).fold(0.0, f64::max);
    let cap = game.bound();
    let feasible = op.feasible_set()?;
    let target = epigraph(&pieces, &feasible.polytope, cap, None)?;
    let lifted = game.with_payoffs(augmented_payoffs(game, &op))?;
    Ok(ExternalRegretInstance {
        base: game.clone(),
        op,
        lifted,
        signals,
        actions,
        pieces,
        target,
        lipschitz,
    })
}

/// `{(z, v) : z >= piece(v), v in domain, z <= cap}`. With `homogenize = Some(n_i)` each
/// piece `a · σ + c` becomes `a · v + c (1ᵀv) / n_i`, its extension to the cone.
fn epigraph(pieces: &[AffinePiece], domain: &Polytope, cap: f64, homogenize: Option<usize>) -> Result<Polytope> {
    let dim = domain.dim();
    let mut hs = Vec::with_capacity(pieces.len() + 1);
    for p in pieces {
        let mut normal = vec![-1.0];
        match homogenize {
            None => {
                normal.extend_from_slice(&p.gradient);
                hs.push(Halfspace::new(normal, -p.offset));
            }
            Some(n_i) => {
                normal.extend(p.gradient.iter().map(|g| g + p.offset / n_i as f64));
                hs.push(Halfspace::new(normal, 0.0));
            }
        }
    }
    let mut top = vec![0.0; dim + 1];
    top[0] = 1.0;
    hs.push(Halfspace::new(top, cap));
    let h = domain.hrep()?;
    let widen = |x: &Halfspace| {
        let mut n = vec![0.0];
        n.extend_from_slice(&x.normal);
        Halfspace::new(n, x.offset)
    };
    hs.extend(h.halfspaces.iter().map(widen));
    let eqs = h.equalities.iter().map(widen).collect();
    Polytope::from_hrep(dim + 1, hs, eqs)
}

/// Swap regret over a finite set `G` of mixed actions, as approachability of a product
/// of per-group targets in the cone over `F`.
#[derive(Debug)]
pub struct SwapRegretInstance {
    pub base: PMGame,
    pub op: SignalOperator,
    pub grid: Vec<Vec<f64>>,
    /// actions are the members of `G`; payoff `r̲(g, j)` is `[r(p_g, j); H̃(δ_j)]` in
    /// block `g` and zero elsewhere
    pub lifted: PMGame,
    pub signals: SignalDecomposition,
    pub pieces: Vec<AffinePiece>,
    pub group_dim: usize,
    /// `C_g` in `R × F_cone`
    pub group_target: Polytope,
    /// `C = Π_g C_g` as a single polytope
    pub target: Polytope,
    /// the same set, projected block by block
    pub product: ProductTarget,
}

impl SwapRegretInstance {
    pub fn lift(&self) -> Result<BilinearLift> {
        BilinearLift::with_actions(
            &self.lifted,
            &self.op,
            self.signals.clone(),
            ActionDecomposition::vertices(self.grid.len()),
        )
    }

    /// Homogenised best-reply value `max_g' ρ(p_g', v)` on the cone.
    pub fn best_reply_value(&self, v: &[f64]) -> f64 {
        let n_i = self.op.n_i as f64;
        let lambda = v.iter().sum::<f64>() / n_i;
        self.pieces
            .iter()
            .map(|p| dot(&p.gradient, v) + p.offset * lambda)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn build_swap_instance(game: &PMGame, grid: &[Vec<f64>]) -> Result<SwapRegretInstance> {
    ensure_scalar(game)?;
    if grid.is_empty() {
        return Err(Error::Empty("swap grid G"));
    }
    for p in grid {
        ensure_dim(game.n_actions(), p.len())?;
    }
    let op = game.signal_operator();
    let signals = decompose_signal_space(&op)?;
    let pieces = affine_pieces(game, &op, &signals, grid)?;
    let cap = game.bound();
    let mut cone_pts = op.columns.clone();
    cone_pts.push(vec![0.0; op.dim()]);
    let cone = Polytope::hull_of(cone_pts)?;
    let group_target = epigraph(&pieces, &cone, cap, Some(op.n_i))?;
    let group_dim = 1 + op.dim();
    let n_g = grid.len();

    let h = group_target.hrep()?;
    let place = |x: &Halfspace, g: usize| {
        let mut n = vec![0.0; n_g * group_dim];
        n[g * group_dim..(g + 1) * group_dim].copy_from_slice(&x.normal);
        Halfspace::new(n, x.offset)
    };
    let mut hs = Vec::new();
    let mut eqs = Vec::new();
    for g in 0..n_g {
        hs.extend(h.halfspaces.iter().map(|x| place(x, g)));
        eqs.extend(h.equalities.iter().map(|x| place(x, g)));
    }
    let target = Polytope::from_hrep(n_g * group_dim, hs, eqs)?;
    let product = ProductTarget {
        blocks: (0..n_g)
            .map(|_| Box::new(group_target.clone()) as Box<dyn Target>)
            .collect(),
    };

    let payoff: Vec<Vec<Vec<f64>>> = grid
        .iter()
        .enumerate()
        .map(|(g, p)| {
            (0..game.n_outcomes())
                .map(|j| {
                    let mut v = vec![0.0; n_g * group_dim];
                    v[g * group_dim] = game.mixed_payoff(p, &dirac(game.n_outcomes(), j))[0];
                    v[g * group_dim + 1..(g + 1) * group_dim].copy_from_slice(&op.columns[j]);
                    v
                })
                .collect()
        })
        .collect();
    let menu: Vec<Vec<f64>> = grid.iter().map(|p| game.base_distribution(p)).collect();
    let mut lifted = PMGame::with_menu(payoff, game.signal_table().to_vec(), menu)?;
    lifted.outcome_names = game.outcome_names.clone();
    lifted.signal_names = game.signal_names.clone();
    Ok(SwapRegretInstance {
        base: game.clone(),
        op,
        grid: grid.to_vec(),
        lifted,
        signals,
        pieces,
        group_dim,
        group_target,
        target,
        product,
    })
}

/// One round of play as seen by an omniscient evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Round {
    /// action of the player (an index into `G` for swap regret)
    pub action: usize,
    /// base action that produced the signal
    pub base: usize,
    pub outcome: usize,
    pub signal: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegretKind {
    External,
    Swap,
}

/// Regret of a finished history, from the true opponent actions.
///
/// External: `max_p ρ(p, H̃(q̂_T)) − (1/T) Σ r(I_t, J_t)`. Swap:
/// `Σ_g (N_T(g)/T) (max_g' ρ(p_g', H̃(q̂_{T,g})) − r(p_g, q̂_{T,g}))_+`.
pub fn evaluate_regret(history: &[Round], game: &PMGame, kind: RegretKind, grid: Option<&[Vec<f64>]>) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::Empty("history"));
    }
    let op = game.signal_operator();
    let n_j = game.n_outcomes();
    let t = history.len() as f64;
    match kind {
        RegretKind::External => {
            let mut q = vec![0.0; n_j];
            for r in history {
                q[r.outcome] += 1.0 / t;
            }
            let earned = history.iter().map(|r| game.payoff(r.base, r.outcome)[0]).sum::<f64>() / t;
            Ok(max_rho(game, &op, &op.apply(&q))? - earned)
        }
        RegretKind::Swap => {
            let grid = grid.ok_or(Error::Invalid("swap regret needs the grid G".into()))?;
            if history.iter().any(|r| r.action >= grid.len()) {
                return Err(Error::IndexOutOfRange {
                    index: history.iter().map(|r| r.action).max().unwrap_or(0),
                    len: grid.len(),
                });
            }
            let mut total = 0.0;
            for (g, p) in grid.iter().enumerate() {
                let group: Vec<&Round> = history.iter().filter(|r| r.action == g).collect();
                if group.is_empty() {
                    continue;
                }
                let n = group.len() as f64;
                let q: Vec<f64> = (0..n_j)
                    .map(|j| group.iter().filter(|r| r.outcome == j).count() as f64 / n)
                    .collect();
                let sigma = op.apply(&q);
                let best = grid
                    .iter()
                    .map(|pg| rho(game, &op, pg, &sigma))
                    .collect::<Result<Vec<f64>>>()?
                    .into_iter()
                    .fold(f64::NEG_INFINITY, f64::max);
                let earned = game.mixed_payoff(p, &q)[0];
                total += n / t * (best - earned).max(0.0);
            }
            Ok(total)
        }
    }
}

/// Running counts from which the regret can be read at any time.
#[derive(Debug, Clone)]
pub struct RegretAccumulator {
    kind: RegretKind,
    grid: Vec<Vec<f64>>,
    /// outcome counts, one row per group (a single row for external regret)
    counts: Vec<Vec<f64>>,
    earned: f64,
    t: usize,
}

impl RegretAccumulator {
    pub fn new(game: &PMGame, kind: RegretKind, grid: Option<&[Vec<f64>]>) -> Result<Self> {
        let grid = match kind {
            RegretKind::External => Vec::new(),
            RegretKind::Swap => grid.ok_or(Error::Invalid("swap regret needs the grid G".into()))?.to_vec(),
        };
        let rows = grid.len().max(1);
        Ok(RegretAccumulator {
            kind,
            counts: vec![vec![0.0; game.n_outcomes()]; rows],
            grid,
            earned: 0.0,
            t: 0,
        })
    }

    pub fn push(&mut self, game: &PMGame, round: Round) -> Result<()> {
        match self.kind {
            RegretKind::External => {
                self.counts[0][round.outcome] += 1.0;
                self.earned += game.payoff(round.base, round.outcome)[0];
            }
            RegretKind::Swap => {
                let row = self.counts.get_mut(round.action).ok_or(Error::IndexOutOfRange {
                    index: round.action,
                    len: self.grid.len(),
                })?;
                row[round.outcome] += 1.0;
            }
        }
        self.t += 1;
        Ok(())
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn value(&self, game: &PMGame, op: &SignalOperator) -> Result<f64> {
        if self.t == 0 {
            return Err(Error::Empty("history"));
        }
        let t = self.t as f64;
        match self.kind {
            RegretKind::External => {
                let q: Vec<f64> = self.counts[0].iter().map(|c| c / t).collect();
                Ok(max_rho(game, op, &op.apply(&q))? - self.earned / t)
            }
            RegretKind::Swap => {
                let mut total = 0.0;
                for (row, p) in self.counts.iter().zip(&self.grid) {
                    let n: f64 = row.iter().sum();
                    if n == 0.0 {
                        continue;
                    }
                    // the group's weighted point on the cone: (N(g)/T) H̃(q̂_g)
                    let v: Vec<f64> = op.apply(row).iter().map(|x| x / t).collect();
                    let mut best = f64::NEG_INFINITY;
                    for pg in &self.grid {
                        best = best.max(rho_cone(game, op, pg, &v)?);
                    }
                    let earned: f64 = row
                        .iter()
                        .enumerate()
                        .map(|(j, c)| c / t * game.mixed_payoff(p, &dirac(row.len(), j))[0])
                        .sum();
                    total += (best - earned).max(0.0);
                }
                Ok(total)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partial_monitoring::fixtures;

    #[test]
    fn rho_on_the_club_signal() {
        let g = fixtures::dark_pennies();
        let op = g.signal_operator();
        let club = op.columns[0].clone();
        for l in [0.0, 0.2, 0.5, 0.9] {
            let r = rho(&g, &op, &[1.0 - l, l], &club).unwrap();
            assert!((r + (1.0f64 - 2.0 * l).abs()).abs() < 1e-12);
        }
        assert!(max_rho(&g, &op, &club).unwrap().abs() < 1e-9);
        assert_eq!(rho_cone(&g, &op, &[0.5, 0.5], &vec![0.0; 4]).unwrap(), 0.0);
    }

    #[test]
    fn external_target_values_at_anchors() {
        let g = fixtures::dark_pennies();
        let inst = build_external_instance(&g).unwrap();
        let club = inst.op.columns[0].clone();
        let heart = inst.op.columns[2].clone();
        assert!(inst.best_reply_value(&club).abs() < 1e-9);
        assert!((inst.best_reply_value(&heart) - 3.0).abs() < 1e-9);
        let mut x = vec![0.1];
        x.extend_from_slice(&club);
        assert!(inst.target.contains(&x, 1e-9).unwrap());
        x[0] = -0.1;
        assert!(!inst.target.contains(&x, 1e-9).unwrap());
    }

    #[test]
    fn fold_and_batch_agree() {
        let g = fixtures::dark_pennies();
        let op = g.signal_operator();
        let grid = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]];
        let hist: Vec<Round> = (0..30)
            .map(|t| Round {
                action: t % 3,
                base: t % 2,
                outcome: (t * 7) % 3,
                signal: 0,
            })
            .collect();
        for (kind, gr) in [(RegretKind::External, None), (RegretKind::Swap, Some(grid.as_slice()))] {
            let mut acc = RegretAccumulator::new(&g, kind, gr).unwrap();
            for r in &hist {
                acc.push(&g, *r).unwrap();
            }
            let a = acc.value(&g, &op).unwrap();
            let b = evaluate_regret(&hist, &g, kind, gr).unwrap();
            assert!((a - b).abs() < 1e-9, "{kind:?}: {a} vs {b}");
        }
    }
}
