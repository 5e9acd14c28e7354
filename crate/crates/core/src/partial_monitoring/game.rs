use serde::{Deserialize, Serialize};

use crate::convex_geometry::{Halfspace, Polytope};
use crate::error::{ensure_dim, ensure_finite, Error, Result};
use crate::linalg::{dirac, norm};

/// A repeated game with partial monitoring.
///
/// The player chooses among `n_actions()` actions; action `k` plays the fixed mixture
/// `menu[k]` over the base actions that drive the signals. For an ordinary game the menu
/// is the identity. Payoffs `r(k, j)` live in R^d and `signal_law[i][j]` is the
/// distribution of the signal when base action `i` meets outcome `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PMGame {
    pub action_names: Vec<String>,
    pub outcome_names: Vec<String>,
    pub signal_names: Vec<String>,
    d: usize,
    payoff: Vec<Vec<Vec<f64>>>,
    signal_law: Vec<Vec<Vec<f64>>>,
    menu: Vec<Vec<f64>>,
    bound: f64,
}

impl PMGame {
    /// `payoff[i][j]` in R^d and `signal_law[i][j]` in Δ(H), with identity menu.
    pub fn new(payoff: Vec<Vec<Vec<f64>>>, signal_law: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n = payoff.len();
        let menu = (0..n).map(|i| dirac(n, i)).collect();
        Self::with_menu(payoff, signal_law, menu)
    }

    /// Game whose actions are the mixtures in `menu` over the base actions of `signal_law`.
    pub fn with_menu(
        payoff: Vec<Vec<Vec<f64>>>,
        signal_law: Vec<Vec<Vec<f64>>>,
        menu: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n_k = payoff.len();
        let n_i = signal_law.len();
        if n_k == 0 || n_i == 0 || payoff[0].is_empty() || signal_law[0].is_empty() {
            return Err(Error::Empty("game tables"));
        }
        let n_j = payoff[0].len();
        let d = payoff[0][0].len();
        let n_h = signal_law[0][0].len();
        if d == 0 || n_h == 0 {
            return Err(Error::Empty("payoff or signal dimension"));
        }
        let mut bound: f64 = 0.0;
        for row in &payoff {
            ensure_dim(n_j, row.len())?;
            for v in row {
                ensure_dim(d, v.len())?;
                ensure_finite(v, "payoff")?;
                bound = bound.max(norm(v));
            }
        }
        for row in &signal_law {
            ensure_dim(n_j, row.len())?;
            for law in row {
                ensure_dim(n_h, law.len())?;
                check_distribution(law, "signal law")?;
            }
        }
        ensure_dim(n_k, menu.len())?;
        for m in &menu {
            ensure_dim(n_i, m.len())?;
            check_distribution(m, "action menu")?;
        }
        Ok(PMGame {
            action_names: (0..n_k).map(|k| format!("a{k}")).collect(),
            outcome_names: (0..n_j).map(|j| format!("o{j}")).collect(),
            signal_names: (0..n_h).map(|s| format!("s{s}")).collect(),
            d,
            payoff,
            signal_law,
            menu,
            bound,
        })
    }

    pub fn n_actions(&self) -> usize {
        self.payoff.len()
    }

    pub fn n_base(&self) -> usize {
        self.signal_law.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.payoff[0].len()
    }

    pub fn n_signals(&self) -> usize {
        self.signal_law[0][0].len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Largest payoff norm `R`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn payoff(&self, k: usize, j: usize) -> &[f64] {
        &self.payoff[k][j]
    }

    pub fn payoff_table(&self) -> &[Vec<Vec<f64>>] {
        &self.payoff
    }

    pub fn signal_law(&self, i: usize, j: usize) -> &[f64] {
        &self.signal_law[i][j]
    }

    pub fn signal_table(&self) -> &[Vec<Vec<f64>>] {
        &self.signal_law
    }

    pub fn menu(&self) -> &[Vec<f64>] {
        &self.menu
    }

    /// Bilinear payoff `r(p, q)`.
    pub fn mixed_payoff(&self, p: &[f64], q: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for (k, &pk) in p.iter().enumerate() {
            if pk == 0.0 {
                continue;
            }
            for (j, &qj) in q.iter().enumerate() {
                if qj != 0.0 {
                    crate::linalg::axpy(&mut out, pk * qj, &self.payoff[k][j]);
                }
            }
        }
        out
    }

    /// Distribution over base actions induced by a distribution over player actions.
    pub fn base_distribution(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_base()];
        for (k, &pk) in p.iter().enumerate() {
            crate::linalg::axpy(&mut out, pk, &self.menu[k]);
        }
        out
    }

    pub fn signal_operator(&self) -> SignalOperator {
        SignalOperator::new(self)
    }

    /// Same signals and menu with a different payoff table.
    pub fn with_payoffs(&self, payoff: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let mut g = Self::with_menu(payoff, self.signal_law.clone(), self.menu.clone())?;
        g.outcome_names = self.outcome_names.clone();
        g.signal_names = self.signal_names.clone();
        if g.n_actions() == self.n_actions() {
            g.action_names = self.action_names.clone();
        }
        Ok(g)
    }
}

fn check_distribution(p: &[f64], what: &'static str) -> Result<()> {
    ensure_finite(p, what)?;
    let s: f64 = p.iter().sum();
    if p.iter().any(|v| *v < -1e-12) || (s - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid(format!("{what} is not a probability vector")));
    }
    Ok(())
}

/// The linear map `H̃ : Δ(J) → R^{I×H}`, `H̃(q)_{i,s} = sum_j q_j H_s(i, j)`.
/// Coordinates are flattened as `i * n_h + s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalOperator {
    pub n_i: usize,
    pub n_j: usize,
    pub n_h: usize,
    /// `columns[j] = H̃(δ_j)`
    pub columns: Vec<Vec<f64>>,
}

impl SignalOperator {
    pub fn new(game: &PMGame) -> Self {
        let n_i = game.n_base();
        let n_j = game.n_outcomes();
        let n_h = game.n_signals();
        let columns = (0..n_j)
            .map(|j| {
                (0..n_i)
                    .flat_map(|i| game.signal_law(i, j).iter().copied())
                    .collect()
            })
            .collect();
        SignalOperator {
            n_i,
            n_j,
            n_h,
            columns,
        }
    }

    pub fn dim(&self) -> usize {
        self.n_i * self.n_h
    }

    pub fn apply(&self, q: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (j, &qj) in q.iter().enumerate() {
            if qj != 0.0 {
                crate::linalg::axpy(&mut out, qj, &self.columns[j]);
            }
        }
        out
    }

    /// The feasible set `F = H̃(Δ(J))`.
    pub fn feasible_set(&self) -> Result<FeasibleSet> {
        let polytope = Polytope::hull_of(self.columns.clone())?;
        Ok(FeasibleSet { polytope })
    }
}

/// `F`, the convex hull of the images of the outcome Diracs.
#[derive(Debug, Clone)]
pub struct FeasibleSet {
    pub polytope: Polytope,
}

impl FeasibleSet {
    pub fn project(&self, sigma: &[f64]) -> Result<Vec<f64>> {
        self.polytope.project(sigma)
    }

    pub fn distance(&self, sigma: &[f64]) -> Result<f64> {
        self.polytope.distance(sigma)
    }

    pub fn affine_dim(&self) -> Result<usize> {
        self.polytope.affine_dim()
    }
}

/// JSON description of a game and (optionally) its target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    #[serde(rename = "actions_I")]
    pub actions_i: Vec<String>,
    #[serde(rename = "actions_J")]
    pub actions_j: Vec<String>,
    pub signals: Vec<String>,
    pub d: usize,
    pub payoff: Vec<Vec<PayoffEntry>>,
    pub signal_law: Vec<Vec<SignalEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    /// Optional payoff polytopes `[i][j] -> vertex list` for robust mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoff_sets: Option<Vec<Vec<Vec<Vec<f64>>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PayoffEntry {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SignalEntry {
    /// deterministic signal, by name
    Named(String),
    /// distribution over the signal list
    Law(Vec<f64>),
}

/// Target polytope `{x : normals[k] · x <= offsets[k]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

impl TargetSpec {
    pub fn to_polytope(&self) -> Result<Polytope> {
        ensure_dim(self.normals.len(), self.offsets.len())?;
        let dim = self
            .normals
            .first()
            .map(|n| n.len())
            .ok_or(Error::Empty("target normals"))?;
        let hs = self
            .normals
            .iter()
            .zip(&self.offsets)
            .map(|(n, o)| Halfspace::new(n.clone(), *o))
            .collect();
        Polytope::from_hrep(dim, hs, Vec::new())
    }

    pub fn from_polytope(p: &Polytope) -> Result<Self> {
        let h = p.hrep()?;
        let mut normals = Vec::new();
        let mut offsets = Vec::new();
        for hs in &h.halfspaces {
            normals.push(hs.normal.clone());
            offsets.push(hs.offset);
        }
        for e in &h.equalities {
            normals.push(e.normal.clone());
            offsets.push(e.offset);
            normals.push(e.normal.iter().map(|v| -v).collect());
            offsets.push(-e.offset);
        }
        Ok(TargetSpec { normals, offsets })
    }
}

impl GameSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_game(&self) -> Result<PMGame> {
        let n_i = self.actions_i.len();
        let n_j = self.actions_j.len();
        let n_h = self.signals.len();
        ensure_dim(n_i, self.payoff.len())?;
        ensure_dim(n_i, self.signal_law.len())?;
        let mut payoff = Vec::with_capacity(n_i);
        let mut law = Vec::with_capacity(n_i);
        for i in 0..n_i {
            ensure_dim(n_j, self.payoff[i].len())?;
            ensure_dim(n_j, self.signal_law[i].len())?;
            let mut prow = Vec::with_capacity(n_j);
            let mut lrow = Vec::with_capacity(n_j);
            for j in 0..n_j {
                let v = match &self.payoff[i][j] {
                    PayoffEntry::Scalar(x) => vec![*x],
                    PayoffEntry::Vector(v) => v.clone(),
                };
                ensure_dim(self.d, v.len())?;
                prow.push(v);
                let l = match &self.signal_law[i][j] {
                    SignalEntry::Named(name) => {
                        let s = self
                            .signals
                            .iter()
                            .position(|x| x == name)
                            .ok_or_else(|| Error::Parse(format!("unknown signal {name:?}")))?;
                        dirac(n_h, s)
                    }
                    SignalEntry::Law(p) => p.clone(),
                };
                lrow.push(l);
            }
            payoff.push(prow);
            law.push(lrow);
        }
        let mut game = PMGame::new(payoff, law)?;
        game.action_names = self.actions_i.clone();
        game.outcome_names = self.actions_j.clone();
        game.signal_names = self.signals.clone();
        Ok(game)
    }

    pub fn from_game(game: &PMGame, target: Option<&Polytope>) -> Result<Self> {
        if game.n_actions() != game.n_base() {
            return Err(Error::Invalid("only games with an identity menu can be written".into()));
        }
        let payoff = game
            .payoff_table()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| {
                        if v.len() == 1 {
                            PayoffEntry::Scalar(v[0])
                        } else {
                            PayoffEntry::Vector(v.clone())
                        }
                    })
                    .collect()
            })
            .collect();
        let signal_law = game
            .signal_table()
            .iter()
            .map(|row| row.iter().map(|l| SignalEntry::Law(l.clone())).collect())
            .collect();
        Ok(GameSpec {
            actions_i: game.action_names.clone(),
            actions_j: game.outcome_names.clone(),
            signals: game.signal_names.clone(),
            d: game.d(),
            payoff,
            signal_law,
            target: target.map(TargetSpec::from_polytope).transpose()?,
            payoff_sets: None,
        })
    }

    pub fn target_polytope(&self) -> Result<Option<Polytope>> {
        self.target.as_ref().map(|t| t.to_polytope()).transpose()
    }
}
