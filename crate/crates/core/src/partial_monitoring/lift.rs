use crate::convex_geometry::Polytope;
use crate::error::{ensure_dim, Result};
use crate::robust::{outer, SetValuedGame};

use super::decomposition::{build_action_decomposition, decompose_signal_space, ActionDecomposition, SignalDecomposition};
use super::fiber::mbar;
use super::game::{PMGame, SignalOperator};

/// The bilinear extension `m̿` of `m̄` to `Δ(A) × Δ(B)`, stored as the set-valued table
/// `m̿(a, b) = m̄(a, b)` over the anchors.
#[derive(Debug, Clone)]
pub struct BilinearLift {
    pub actions: ActionDecomposition,
    pub signals: SignalDecomposition,
    pub table: SetValuedGame,
}

impl BilinearLift {
    /// Decompose `F`, search for action breakpoints and tabulate `m̄` on the anchors.
    pub fn exact(game: &PMGame, op: &SignalOperator) -> Result<Self> {
        let signals = decompose_signal_space(op)?;
        let actions = build_action_decomposition(game, op, &signals)?;
        Self::with_actions(game, op, signals, actions)
    }

    /// Tabulate `m̄(a, b)` for a given action decomposition.
    pub fn with_actions(
        game: &PMGame,
        op: &SignalOperator,
        signals: SignalDecomposition,
        actions: ActionDecomposition,
    ) -> Result<Self> {
        let sets = actions
            .anchors()
            .iter()
            .map(|a| {
                signals
                    .anchors()
                    .iter()
                    .map(|b| mbar(game, op, a, b))
                    .collect::<Result<Vec<Polytope>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let table = SetValuedGame::new(sets)?;
        Ok(BilinearLift {
            actions,
            signals,
            table,
        })
    }

    /// Use an arbitrary table, for instance a surrogate of `m̄`.
    pub fn from_table(actions: ActionDecomposition, signals: SignalDecomposition, table: SetValuedGame) -> Result<Self> {
        ensure_dim(actions.len(), table.n_a())?;
        ensure_dim(signals.len(), table.n_b())?;
        Ok(BilinearLift {
            actions,
            signals,
            table,
        })
    }

    pub fn d(&self) -> usize {
        self.table.d()
    }

    /// Support function of `m̿(θ, φ)` in direction `u`.
    pub fn support(&self, theta: &[f64], phi: &[f64], u: &[f64]) -> Result<f64> {
        self.table.support(&outer(theta, phi), u)
    }

    /// Support function of `m̿(Θ(p), Φ(σ))`.
    pub fn support_at(&self, p: &[f64], sigma: &[f64], u: &[f64]) -> Result<f64> {
        self.support(&self.actions.theta(p), &self.signals.phi(sigma), u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partial_monitoring::fiber::{fiber_vertices, mbar_support};
    use crate::partial_monitoring::fixtures;

    #[test]
    fn lift_matches_mbar_on_dark_pennies() {
        let g = fixtures::dark_pennies();
        let op = g.signal_operator();
        let lift = BilinearLift::exact(&g, &op).unwrap();
        for (p, q) in [([0.3, 0.7], [0.2, 0.5, 0.3]), ([0.9, 0.1], [0.0, 0.4, 0.6]), ([0.5, 0.5], [0.7, 0.3, 0.0])] {
            let sigma = op.apply(&q);
            let fv = fiber_vertices(&op, &sigma).unwrap();
            for u in [[1.0], [-1.0]] {
                let want = mbar_support(&g, &p, &fv, &u);
                let got = lift.support_at(&p, &sigma, &u).unwrap();
                assert!((want - got).abs() < 1e-9, "{p:?} {q:?}: {want} vs {got}");
            }
        }
    }
}
