use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::convex_geometry::Polytope;
use crate::error::{Error, Result};
use crate::linalg::{axpy, uniform};
use crate::robust::RobustApproacher;

use super::estimator::SignalEstimator;
use super::game::{FeasibleSet, PMGame, SignalOperator};
use super::lift::BilinearLift;

/// Block lengths and exploration rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockSchedule {
    /// constant block length and exploration rate
    Fixed { len: usize, gamma: f64 },
    /// `L_n = round(n^{3/2})`, `γ_n = n^{-1/2}`, blocks weighted by `n^{3/2}`
    Adaptive,
}

impl BlockSchedule {
    /// Tuning for a known horizon: `L = ⌈T^{3/5}⌉`, `γ = T^{-1/5}`.
    pub fn for_horizon(t: usize) -> Self {
        let t = t.max(1) as f64;
        BlockSchedule::Fixed {
            len: (t.powf(0.6) - 1e-9).ceil() as usize,
            gamma: t.powf(-0.2).min(1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let BlockSchedule::Fixed { len, gamma } = *self {
            if len == 0 {
                return Err(Error::Invalid("block length must be positive".into()));
            }
            if !(gamma > 0.0 && gamma <= 1.0) {
                return Err(Error::Invalid(format!("exploration rate {gamma} must lie in (0, 1]")));
            }
        }
        Ok(())
    }

    /// `(L_n, γ_n)` for block `n >= 1`.
    pub fn block(&self, n: usize) -> (usize, f64) {
        match *self {
            BlockSchedule::Fixed { len, gamma } => (len, gamma),
            BlockSchedule::Adaptive => {
                let n = n as f64;
                ((n.powf(1.5).round() as usize).max(1), n.powf(-0.5))
            }
        }
    }

    /// Exponent of the block weights used by the lifted approachability strategy.
    pub fn alpha(&self) -> f64 {
        match self {
            BlockSchedule::Fixed { .. } => 0.0,
            BlockSchedule::Adaptive => 1.5,
        }
    }
}

/// What happened in a finished block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSummary {
    pub block: usize,
    pub len: usize,
    pub gamma: f64,
    pub theta: Vec<f64>,
    pub sigma_tilde: Vec<f64>,
    pub sigma_hat: Vec<f64>,
    pub phi: Vec<f64>,
}

/// The block strategy for approachability under partial monitoring.
///
/// Within block `n` the player draws i.i.d. from `p_n = (1 − γ_n) Σ_a θ_a a + γ_n u`.
/// At the end of the block the signal vector is estimated, projected on `F`, mapped to
/// `Φ(σ̂_n)`, and the lifted robust strategy is fed `θ_n ⊗ Φ(σ̂_n)` to choose `θ_{n+1}`.
#[derive(Debug, Clone)]
pub struct BlockStrategy {
    game: PMGame,
    feasible: FeasibleSet,
    lift: BilinearLift,
    psi: RobustApproacher,
    schedule: BlockSchedule,
    block: usize,
    len: usize,
    gamma: f64,
    theta: Vec<f64>,
    play: Vec<f64>,
    sampler: WeightedIndex<f64>,
    menus: Vec<Option<WeightedIndex<f64>>>,
    estimator: SignalEstimator,
}

impl BlockStrategy {
    pub fn new(game: PMGame, lift: BilinearLift, target: &Polytope, schedule: BlockSchedule) -> Result<Self> {
        schedule.validate()?;
        let op = SignalOperator::new(&game);
        let feasible = op.feasible_set()?;
        let psi = RobustApproacher::new(lift.table.clone(), target, schedule.alpha())?;
        if psi.target.is_empty()? {
            return Err(Error::Precondition(
                "lifted target is empty: no mixture of anchors keeps m̿ inside the target".into(),
            ));
        }
        let menus = game
            .menu()
            .iter()
            .map(|m| {
                if m.iter().filter(|v| **v > 0.0).count() > 1 {
                    WeightedIndex::new(m.iter().copied()).ok()
                } else {
                    None
                }
            })
            .collect();
        let n_k = game.n_actions();
        let n_h = game.n_signals();
        let n_i = game.n_base();
        let mut s = BlockStrategy {
            game,
            feasible,
            lift,
            psi,
            schedule,
            block: 0,
            len: 0,
            gamma: 1.0,
            theta: Vec::new(),
            play: uniform(n_k),
            sampler: WeightedIndex::new(uniform(n_k)).expect("uniform weights"),
            menus,
            estimator: SignalEstimator::new(n_h, uniform(n_i))?,
        };
        s.start_block()?;
        Ok(s)
    }

    fn start_block(&mut self) -> Result<()> {
        self.block += 1;
        let (len, gamma) = self.schedule.block(self.block);
        self.len = len;
        self.gamma = gamma;
        self.theta = self.psi.act()?;
        let n = self.game.n_actions();
        let mut x = vec![0.0; n];
        for (w, a) in self.theta.iter().zip(self.lift.actions.anchors()) {
            axpy(&mut x, *w, a);
        }
        self.play = x.iter().map(|v| (1.0 - gamma) * v.max(0.0) + gamma / n as f64).collect();
        self.sampler = WeightedIndex::new(self.play.iter().copied())
            .map_err(|e| Error::Invalid(format!("mixed action: {e}")))?;
        let base = self.game.base_distribution(&self.play);
        self.estimator = SignalEstimator::new(self.game.n_signals(), base)?;
        Ok(())
    }

    /// Index of the current block, starting at 1.
    pub fn block(&self) -> usize {
        self.block
    }

    pub fn block_len(&self) -> usize {
        self.len
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `θ_n`, the current weights on the action anchors.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// `p_n`, the distribution the player draws from in this block.
    pub fn mixed_action(&self) -> &[f64] {
        &self.play
    }

    pub fn lift(&self) -> &BilinearLift {
        &self.lift
    }

    pub fn game(&self) -> &PMGame {
        &self.game
    }

    /// Distance of the block-averaged lifted payoff to `C̃`.
    pub fn lifted_distance(&self) -> Result<f64> {
        self.psi.state.distance(&self.psi.target.tilde)
    }

    /// Draw an action of the player and the base action it triggers.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let k = self.sampler.sample(rng);
        let i = match &self.menus[k] {
            Some(w) => w.sample(rng),
            None => self.game.menu()[k]
                .iter()
                .position(|v| *v > 0.0)
                .expect("menu entries are distributions"),
        };
        (k, i)
    }

    /// Record the signal `s` received after base action `i`. Returns the summary when
    /// this observation closes a block.
    pub fn observe(&mut self, i: usize, s: usize) -> Result<Option<BlockSummary>> {
        self.estimator.record(i, s)?;
        if self.estimator.len() < self.len {
            return Ok(None);
        }
        let sigma_tilde = self.estimator.estimate()?;
        let sigma_hat = self.feasible.project(&sigma_tilde)?;
        let phi = self.lift.signals.phi(&sigma_hat);
        self.psi.observe(&self.theta, &phi)?;
        let summary = BlockSummary {
            block: self.block,
            len: self.len,
            gamma: self.gamma,
            theta: self.theta.clone(),
            sigma_tilde,
            sigma_hat,
            phi,
        };
        self.start_block()?;
        Ok(Some(summary))
    }
}

/// Next distribution of the block strategy after folding in one signal.
pub fn pm_strategy_step(strategy: &mut BlockStrategy, base_action: usize, signal: usize) -> Result<Vec<f64>> {
    strategy.observe(base_action, signal)?;
    Ok(strategy.mixed_action().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partial_monitoring::fixtures;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixed_schedule_for_horizon() {
        let BlockSchedule::Fixed { len, gamma } = BlockSchedule::for_horizon(100_000) else {
            panic!("fixed schedule expected");
        };
        assert_eq!(len, 1000);
        assert!((gamma - 0.1).abs() < 1e-12);
        assert!(BlockSchedule::Fixed { len: 0, gamma: 0.5 }.validate().is_err());
    }

    #[test]
    fn adaptive_schedule_grows() {
        let s = BlockSchedule::Adaptive;
        assert_eq!(s.block(1), (1, 1.0));
        assert_eq!(s.block(4), (8, 0.5));
    }

    #[test]
    fn first_block_is_uniform_and_blocks_roll_over() {
        let g = fixtures::dark_pennies();
        let op = g.signal_operator();
        let lift = BilinearLift::exact(&g, &op).unwrap();
        let c = Polytope::cuboid(&[-0.2], &[3.0]).unwrap();
        let mut st = BlockStrategy::new(g, lift, &c, BlockSchedule::Fixed { len: 3, gamma: 0.2 }).unwrap();
        assert!((st.mixed_action()[0] - 0.5).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut closed = 0;
        for _ in 0..9 {
            let (_, i) = st.sample(&mut rng);
            if st.observe(i, 0).unwrap().is_some() {
                closed += 1;
            }
        }
        assert_eq!(closed, 3);
        assert_eq!(st.block(), 4);
    }
}
