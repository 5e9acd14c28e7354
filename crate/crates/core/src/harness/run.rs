use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::blackwell::{blackwell_step, check_condition, update_state, ApproachState, Feedback, VectorGame};
use crate::calibration::{
    calibrated_forecast_step, calibration_score, calibration_update, CalibrationGrid, CalibratorState, ScoreVariant,
};
use crate::convex_geometry::{Polytope, Target};
use crate::error::{Error, Result};
use crate::general_games::{build_box_surrogate, orthant_strategy, polytope_transform};
use crate::linalg::{dirac, uniform};
use crate::partial_monitoring::{
    check_apm_report, ApmReport, BilinearLift, BlockSchedule, BlockStrategy, GameSpec, PMGame,
};
use crate::regret::{build_external_instance, build_swap_instance, RegretAccumulator, RegretKind, Round};
use crate::robust::{check_rac, outer, worst_case_distance, RobustApproacher, SetValuedGame};

use super::opponent::{Opponent, OpponentSpec};
use super::record::TrajectoryRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Approach,
    Robust,
    PmApproach,
    ExternalRegret,
    SwapRegret,
    Calibrate,
    CheckApm,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Approach => "approach",
            Mode::Robust => "robust",
            Mode::PmApproach => "pm-approach",
            Mode::ExternalRegret => "external-regret",
            Mode::SwapRegret => "swap-regret",
            Mode::Calibrate => "calibrate",
            Mode::CheckApm => "check-apm",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Mode::Approach,
            Mode::Robust,
            Mode::PmApproach,
            Mode::ExternalRegret,
            Mode::SwapRegret,
            Mode::Calibrate,
            Mode::CheckApm,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| Error::Parse(format!("unknown mode {s:?}")))
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub game: GameSpec,
    /// overrides the target stored in the game file
    pub target: Option<Polytope>,
    pub horizon: usize,
    /// fixed block length; defaults to `⌈T^{3/5}⌉`
    pub block_len: Option<usize>,
    /// fixed exploration rate; defaults to `T^{-1/5}`
    pub exploration: Option<f64>,
    pub adaptive: bool,
    pub alpha: f64,
    pub opponent: OpponentSpec,
    pub seed: u64,
    pub replications: usize,
    /// mesh of the condition checks, and `η` for calibration
    pub grid_res: f64,
    /// run even when the mode's precondition check fails
    pub force: bool,
}

impl ExperimentConfig {
    pub fn new(mode: Mode, game: GameSpec, opponent: OpponentSpec) -> Self {
        ExperimentConfig {
            mode,
            game,
            target: None,
            horizon: 1000,
            block_len: None,
            exploration: None,
            adaptive: false,
            alpha: 0.0,
            opponent,
            seed: 0,
            replications: 1,
            grid_res: 0.1,
            force: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::Invalid("horizon must be at least 1".into()));
        }
        if self.replications < 1 {
            return Err(Error::Invalid("replications must be at least 1".into()));
        }
        if self.block_len == Some(0) {
            return Err(Error::Invalid("block length must be at least 1".into()));
        }
        if let Some(g) = self.exploration {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::Invalid(format!("exploration {g} must lie in [0, 1]")));
            }
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Invalid(format!("alpha {} must be >= 0", self.alpha)));
        }
        if !(self.grid_res > 0.0 && self.grid_res <= 1.0) {
            return Err(Error::Invalid(format!("grid resolution {} must lie in (0, 1]", self.grid_res)));
        }
        Ok(())
    }

    /// Block schedule for the partial-monitoring modes.
    pub fn schedule(&self) -> BlockSchedule {
        if self.adaptive {
            return BlockSchedule::Adaptive;
        }
        let BlockSchedule::Fixed { len, gamma } = BlockSchedule::for_horizon(self.horizon) else {
            unreachable!("for_horizon is fixed")
        };
        BlockSchedule::Fixed {
            len: self.block_len.unwrap_or(len),
            gamma: self.exploration.unwrap_or(gamma),
        }
    }

    fn target(&self) -> Result<Polytope> {
        match &self.target {
            Some(t) => Ok(t.clone()),
            None => self
                .game
                .target_polytope()?
                .ok_or_else(|| Error::Invalid(format!("mode {} needs a target set", self.mode.as_str()))),
        }
    }
}

/// Default `G` for swap regret: the pure actions and the uniform mixture.
pub fn default_swap_grid(n: usize) -> Vec<Vec<f64>> {
    let mut g: Vec<Vec<f64>> = (0..n).map(|i| dirac(n, i)).collect();
    if n > 1 {
        g.push(uniform(n));
    }
    g
}

/// The APM check on the configured game and target.
pub fn run_apm_check(config: &ExperimentConfig) -> Result<ApmReport> {
    config.validate()?;
    let game = config.game.to_game()?;
    check_apm_report(&game, &config.target()?, config.grid_res)
}

/// Run every replication and concatenate their records in replication order.
///
/// Replication `r` draws from a ChaCha stream `r` keyed by the seed, so the output does
/// not depend on how replications are scheduled across threads.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrajectoryRecord>> {
    config.validate()?;
    let prepared = prepare(config)?;
    let runs: Vec<Result<Vec<TrajectoryRecord>>> = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(rep as u64);
            let mut opponent = Opponent::new(config.opponent.clone(), prepared.n_opponent())?;
            prepared.run(config, rep, &mut rng, &mut opponent)
        })
        .collect();
    let mut out = Vec::new();
    for r in runs {
        out.extend(r?);
    }
    Ok(out)
}

fn precondition(config: &ExperimentConfig, holds: bool, what: &str) -> Result<()> {
    if holds {
        return Ok(());
    }
    if config.force {
        log::warn!("{what} fails; continuing because of --force");
        Ok(())
    } else {
        Err(Error::Precondition(format!("{what} fails (use --force to run anyway)")))
    }
}

enum Prepared {
    Approach {
        game: VectorGame,
        target: Polytope,
    },
    Robust {
        game: SetValuedGame,
        target: Polytope,
    },
    Block {
        game: PMGame,
        strategy: BlockStrategy,
        metric: BlockMetric,
    },
    Calibrate {
        grid: CalibrationGrid,
    },
    Nothing,
}

enum BlockMetric {
    /// distance of the average payoff to `C`
    Direct(Polytope),
    /// distance of the average transformed payoff to the orthant
    Transformed(Box<crate::general_games::TransformedGame>),
    External {
        target: Polytope,
        bound: Box<crate::regret::ExternalRegretInstance>,
    },
    Swap(Box<crate::regret::SwapRegretInstance>),
}

fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    let spec = &config.game;
    Ok(match config.mode {
        Mode::Approach => {
            let pm = spec.to_game()?;
            let game = VectorGame::new(pm.payoff_table().to_vec())?;
            let target = config.target()?;
            precondition(
                config,
                check_condition(&game, &target, config.grid_res)?,
                "the approachability condition",
            )?;
            Prepared::Approach { game, target }
        }
        Mode::Robust => {
            let pm = spec.to_game()?;
            let sets = match &spec.payoff_sets {
                Some(sets) => sets
                    .iter()
                    .map(|row| row.iter().map(|pts| Polytope::hull_of(pts.clone())).collect())
                    .collect::<Result<Vec<Vec<_>>>>()?,
                None => pm
                    .payoff_table()
                    .iter()
                    .map(|row| row.iter().map(|v| Polytope::hull_of(vec![v.clone()])).collect())
                    .collect::<Result<Vec<Vec<_>>>>()?,
            };
            let game = SetValuedGame::new(sets)?;
            let target = config.target()?;
            precondition(
                config,
                check_rac(&game, &target, config.grid_res)?,
                "the robust approachability condition",
            )?;
            Prepared::Robust { game, target }
        }
        Mode::PmApproach => {
            let game = spec.to_game()?;
            let target = config.target()?;
            let report = check_apm_report(&game, &target, config.grid_res)?;
            precondition(config, report.holds, "the partial-monitoring approachability condition")?;
            let op = game.signal_operator();
            match BilinearLift::exact(&game, &op) {
                Ok(lift) => {
                    let strategy = BlockStrategy::new(game.clone(), lift, &target, config.schedule())?;
                    Prepared::Block {
                        game,
                        strategy,
                        metric: BlockMetric::Direct(target),
                    }
                }
                Err(Error::NotBiPiecewiseLinear(why)) => {
                    log::info!("payoffs are not bi-piecewise linear ({why}); using the box surrogate");
                    let transformed = polytope_transform(&game, &target)?;
                    let surrogate = build_box_surrogate(&transformed.game)?;
                    let strategy = orthant_strategy(&surrogate, config.schedule())?;
                    Prepared::Block {
                        game: transformed.game.clone(),
                        strategy,
                        metric: BlockMetric::Transformed(Box::new(transformed)),
                    }
                }
                Err(e) => return Err(e),
            }
        }
        Mode::ExternalRegret => {
            let base = spec.to_game()?;
            let inst = build_external_instance(&base)?;
            let strategy = BlockStrategy::new(inst.lifted.clone(), inst.lift()?, &inst.target, config.schedule())?;
            Prepared::Block {
                game: inst.lifted.clone(),
                strategy,
                metric: BlockMetric::External {
                    target: inst.target.clone(),
                    bound: Box::new(inst),
                },
            }
        }
        Mode::SwapRegret => {
            let base = spec.to_game()?;
            let grid = default_swap_grid(base.n_actions());
            let inst = build_swap_instance(&base, &grid)?;
            let strategy = BlockStrategy::new(inst.lifted.clone(), inst.lift()?, &inst.target, config.schedule())?;
            Prepared::Block {
                game: inst.lifted.clone(),
                strategy,
                metric: BlockMetric::Swap(Box::new(inst)),
            }
        }
        Mode::Calibrate => Prepared::Calibrate {
            grid: CalibrationGrid::new(spec.actions_j.len(), config.grid_res)?,
        },
        Mode::CheckApm => {
            let report = run_apm_check(config)?;
            precondition(config, report.holds, "the partial-monitoring approachability condition")?;
            Prepared::Nothing
        }
    })
}

/// Running plain average of observed vectors.
#[derive(Debug, Clone)]
struct Average {
    sum: Vec<f64>,
    t: usize,
}

impl Average {
    fn new(d: usize) -> Self {
        Average { sum: vec![0.0; d], t: 0 }
    }

    fn push(&mut self, v: &[f64]) {
        crate::linalg::axpy(&mut self.sum, 1.0, v);
        self.t += 1;
    }

    fn mean(&self) -> Vec<f64> {
        let t = self.t.max(1) as f64;
        self.sum.iter().map(|v| v / t).collect()
    }

    /// Mean after a hypothetical extra observation.
    fn peek(&self, v: &[f64]) -> Vec<f64> {
        let t = (self.t + 1) as f64;
        self.sum.iter().zip(v).map(|(s, x)| (s + x) / t).collect()
    }
}

fn weighted_peek(state: &ApproachState, v: &[f64]) -> Vec<f64> {
    let w = ((state.t + 1) as f64).powf(state.alpha);
    let total = state.weight_total + w;
    state.weighted_sum.iter().zip(v).map(|(s, x)| (s + w * x) / total).collect()
}

fn sample(rng: &mut ChaCha8Rng, p: &[f64]) -> Result<usize> {
    Ok(WeightedIndex::new(p.iter().map(|v| v.max(0.0)))
        .map_err(|e| Error::Invalid(format!("cannot sample from {p:?}: {e}")))?
        .sample(rng))
}

fn signal_samplers(game: &PMGame) -> Result<Vec<Vec<WeightedIndex<f64>>>> {
    game.signal_table()
        .iter()
        .map(|row| {
            row.iter()
                .map(|law| WeightedIndex::new(law.iter().copied()).map_err(|e| Error::Invalid(e.to_string())))
                .collect()
        })
        .collect()
}

impl Prepared {
    fn n_opponent(&self) -> usize {
        match self {
            Prepared::Approach { game, .. } => game.n_b(),
            Prepared::Robust { game, .. } => game.n_b(),
            Prepared::Block { game, .. } => game.n_outcomes(),
            Prepared::Calibrate { grid } => grid.n_b,
            Prepared::Nothing => 1,
        }
    }

    fn run(
        &self,
        config: &ExperimentConfig,
        rep: usize,
        rng: &mut ChaCha8Rng,
        opponent: &mut Opponent,
    ) -> Result<Vec<TrajectoryRecord>> {
        let horizon = config.horizon;
        let mut out = Vec::new();
        match self {
            Prepared::Approach { game, target } => {
                let mut state = ApproachState::new(game.d(), config.alpha)?;
                for t in 1..=horizon {
                    let x = blackwell_step(&mut state, game, target)?;
                    let (y, b) = opponent.next(rng, |y| {
                        target.distance(&weighted_peek(&state, &game.mixed_payoff(&x, y))).unwrap_or(0.0)
                    });
                    let a = sample(rng, &x)?;
                    let payoff = Feedback::MixedAgainstPure.payoff(game, &x, a, &y, b);
                    update_state(&mut state, &payoff, game.bound())?;
                    let mut rec = TrajectoryRecord::new(rep, t);
                    rec.distance = Some(state.distance(target)?);
                    out.push(rec);
                }
            }
            Prepared::Robust { game, target } => {
                let mut psi = RobustApproacher::new(game.clone(), target, config.alpha)?;
                for t in 1..=horizon {
                    let x = psi.act()?;
                    let (_, b) = opponent.next(rng, |y| {
                        let mu = weighted_peek(&psi.state, &outer(&x, y));
                        worst_case_distance(&mu, game, target).unwrap_or(0.0)
                    });
                    psi.observe(&x, &dirac(game.n_b(), b))?;
                    let mu = psi.measure().expect("one round observed");
                    let mut rec = TrajectoryRecord::new(rep, t);
                    rec.distance = Some(worst_case_distance(&mu, game, target)?);
                    out.push(rec);
                }
            }
            Prepared::Block {
                game,
                strategy,
                metric,
            } => {
                let mut strategy = strategy.clone();
                let samplers = signal_samplers(game)?;
                let base = match metric {
                    BlockMetric::External { bound, .. } => Some(bound.base.clone()),
                    BlockMetric::Swap(inst) => Some(inst.base.clone()),
                    _ => None,
                };
                let mut regret = match (metric, &base) {
                    (BlockMetric::External { .. }, Some(g)) => Some(RegretAccumulator::new(g, RegretKind::External, None)?),
                    (BlockMetric::Swap(inst), Some(g)) => Some(RegretAccumulator::new(g, RegretKind::Swap, Some(&inst.grid))?),
                    _ => None,
                };
                let op = base.as_ref().map(|g| g.signal_operator());
                let mut avg = Average::new(game.d());
                let distance = |m: &[f64]| -> Result<f64> {
                    match metric {
                        BlockMetric::Direct(c) => c.distance(m),
                        BlockMetric::Transformed(tg) => tg.orthant_distance(m),
                        BlockMetric::External { target, .. } => target.distance(m),
                        BlockMetric::Swap(inst) => inst.product.distance(m),
                    }
                };
                for t in 1..=horizon {
                    let (k, i) = strategy.sample(rng);
                    let p = strategy.mixed_action().to_vec();
                    let (_, b) = opponent.next(rng, |y| distance(&avg.peek(&game.mixed_payoff(&p, y))).unwrap_or(0.0));
                    let s = samplers[i][b].sample(rng);
                    avg.push(game.payoff(k, b));
                    if let (Some(acc), Some(g)) = (regret.as_mut(), base.as_ref()) {
                        acc.push(
                            g,
                            Round {
                                action: k,
                                base: i,
                                outcome: b,
                                signal: s,
                            },
                        )?;
                    }
                    let (block, len, gamma) = (strategy.block(), strategy.block_len(), strategy.gamma());
                    let closed = strategy.observe(i, s)?.is_some();
                    if closed || t == horizon {
                        let mut rec = TrajectoryRecord::new(rep, t);
                        let d = distance(&avg.mean())?;
                        rec.distance = Some(d);
                        rec.block = Some(block);
                        rec.gamma_n = Some(gamma);
                        rec.l_n = Some(len);
                        if let (Some(acc), Some(g), Some(op)) = (&regret, &base, &op) {
                            let r = acc.value(g, op)?;
                            if let BlockMetric::External { bound, .. } = metric {
                                let cap = bound.regret_bound(d);
                                if r > cap + 1e-9 {
                                    log::warn!("replication {rep}, t = {t}: regret {r:.6} exceeds the distance bound {cap:.6}");
                                }
                            }
                            rec.regret = Some(r);
                        }
                        out.push(rec);
                    }
                }
            }
            Prepared::Calibrate { grid } => {
                let mut state = CalibratorState::new(grid);
                for t in 1..=horizon {
                    let l = calibrated_forecast_step(&mut state, grid, rng)?;
                    let (_, b) = opponent.next(rng, |y| {
                        let mut next = state.clone();
                        match calibration_update(&mut next, grid, l, y) {
                            Ok(()) => calibration_score(&next, grid, ScoreVariant::Truncated).unwrap_or(0.0),
                            Err(_) => 0.0,
                        }
                    });
                    calibration_update(&mut state, grid, l, &dirac(grid.n_b, b))?;
                    let mut rec = TrajectoryRecord::new(rep, t);
                    rec.calibration_score = Some(calibration_score(&state, grid, ScoreVariant::Truncated)?);
                    out.push(rec);
                }
            }
            Prepared::Nothing => {}
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partial_monitoring::fixtures;

    fn pennies_config(mode: Mode) -> ExperimentConfig {
        let spec = GameSpec::from_game(&fixtures::dark_pennies(), None).unwrap();
        let mut c = ExperimentConfig::new(mode, spec, OpponentSpec::Fixed(vec![0.2, 0.0, 0.8]));
        c.horizon = 400;
        c
    }

    #[test]
    fn config_validation() {
        let mut c = pennies_config(Mode::Calibrate);
        c.horizon = 0;
        assert!(c.validate().is_err());
        c.horizon = 1;
        c.exploration = Some(1.5);
        assert!(c.validate().is_err());
        c.exploration = Some(0.5);
        c.block_len = Some(0);
        assert!(c.validate().is_err());
        c.block_len = Some(3);
        c.replications = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for m in ["approach", "robust", "pm-approach", "external-regret", "swap-regret", "calibrate", "check-apm"] {
            assert_eq!(m.parse::<Mode>().unwrap().as_str(), m);
        }
    }

    #[test]
    fn single_round_is_within_2m() {
        let spec = GameSpec::from_game(
            &fixtures::revealing_pennies(),
            Some(&Polytope::cuboid(&[-0.1], &[0.1]).unwrap()),
        )
        .unwrap();
        let mut c = ExperimentConfig::new(Mode::Approach, spec, OpponentSpec::Cyclic(vec![0, 1]));
        c.horizon = 1;
        let recs = run_experiment(&c).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].distance.unwrap() <= 2.0);
    }

    #[test]
    fn external_regret_records_blocks() {
        let c = pennies_config(Mode::ExternalRegret);
        let recs = run_experiment(&c).unwrap();
        assert!(!recs.is_empty());
        assert_eq!(recs.last().unwrap().t, 400);
        assert!(recs.windows(2).all(|w| w[0].t < w[1].t));
        assert!(recs.iter().all(|r| r.regret.is_some() && r.l_n == Some(37)));
    }

    #[test]
    fn replications_are_deterministic_and_distinct() {
        let mut c = pennies_config(Mode::Calibrate);
        c.replications = 3;
        c.horizon = 50;
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 150);
    }

    #[test]
    fn failing_precondition_needs_force() {
        let spec = GameSpec::from_game(
            &fixtures::revealing_pennies(),
            Some(&Polytope::cuboid(&[5.0], &[6.0]).unwrap()),
        )
        .unwrap();
        let mut c = ExperimentConfig::new(Mode::Approach, spec, OpponentSpec::Cyclic(vec![0]));
        c.horizon = 5;
        assert!(matches!(run_experiment(&c), Err(Error::Precondition(_))));
        c.force = true;
        assert_eq!(run_experiment(&c).unwrap().len(), 5);
    }
}
