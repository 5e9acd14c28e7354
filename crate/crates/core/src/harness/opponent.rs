use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::convex_geometry::simplex_grid;
use crate::error::{Error, Result};
use crate::linalg::dirac;

/// How the opponent chooses its actions.
#[derive(Debug, Clone, PartialEq)]
pub enum OpponentSpec {
    /// i.i.d. draws from a fixed mixed action
    Fixed(Vec<f64>),
    /// a deterministic cycle of pure actions
    Cyclic(Vec<usize>),
    /// sees the player's mixed action and picks, among grid points of its simplex, the
    /// one that pushes the next average farthest from the target
    Adaptive { grid_res: f64 },
}

impl FromStr for OpponentSpec {
    type Err = Error;

    /// `fixed:0.2,0,0.8`, `cyclic:0,2,1` or `adaptive:0.1`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("opponent {s:?}: expected kind:args")))?;
        let bad = |e: &dyn std::fmt::Display| Error::Parse(format!("opponent {s:?}: {e}"));
        match kind {
            "fixed" => {
                let q = args
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| bad(&e))?;
                Ok(OpponentSpec::Fixed(q))
            }
            "cyclic" => {
                let seq = args
                    .split(',')
                    .map(|x| x.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| bad(&e))?;
                Ok(OpponentSpec::Cyclic(seq))
            }
            "adaptive" => {
                let grid_res = args.trim().parse::<f64>().map_err(|e| bad(&e))?;
                Ok(OpponentSpec::Adaptive { grid_res })
            }
            other => Err(Error::Parse(format!("unknown opponent kind {other:?}"))),
        }
    }
}

/// A running opponent over `n` actions.
#[derive(Debug, Clone)]
pub struct Opponent {
    spec: OpponentSpec,
    n: usize,
    t: usize,
    sampler: Option<WeightedIndex<f64>>,
    grid: Vec<Vec<f64>>,
}

impl Opponent {
    pub fn new(spec: OpponentSpec, n: usize) -> Result<Self> {
        let mut sampler = None;
        let mut grid = Vec::new();
        match &spec {
            OpponentSpec::Fixed(q) => {
                crate::error::ensure_dim(n, q.len())?;
                let s: f64 = q.iter().sum();
                if q.iter().any(|v| *v < 0.0 || !v.is_finite()) || (s - 1.0).abs() > 1e-9 {
                    return Err(Error::Invalid("fixed opponent needs a probability vector".into()));
                }
                sampler = Some(WeightedIndex::new(q.iter().copied()).map_err(|e| Error::Invalid(e.to_string()))?);
            }
            OpponentSpec::Cyclic(seq) => {
                if seq.is_empty() {
                    return Err(Error::Empty("cyclic opponent sequence"));
                }
                if let Some(&b) = seq.iter().find(|&&b| b >= n) {
                    return Err(Error::IndexOutOfRange { index: b, len: n });
                }
            }
            OpponentSpec::Adaptive { grid_res } => {
                grid = simplex_grid(n, *grid_res)?;
            }
        }
        Ok(Opponent {
            spec,
            n,
            t: 0,
            sampler,
            grid,
        })
    }

    /// Next mixed action and the pure action drawn from it. `score(y)` is the distance
    /// the adaptive opponent tries to maximise; the other kinds ignore it.
    pub fn next<R: Rng + ?Sized>(&mut self, rng: &mut R, mut score: impl FnMut(&[f64]) -> f64) -> (Vec<f64>, usize) {
        let t = self.t;
        self.t += 1;
        match &self.spec {
            OpponentSpec::Fixed(q) => {
                let b = self.sampler.as_ref().expect("fixed opponent has a sampler").sample(rng);
                (q.clone(), b)
            }
            OpponentSpec::Cyclic(seq) => {
                let b = seq[t % seq.len()];
                (dirac(self.n, b), b)
            }
            OpponentSpec::Adaptive { .. } => {
                let mut best = (f64::NEG_INFINITY, 0);
                for (i, y) in self.grid.iter().enumerate() {
                    let s = score(y);
                    if s > best.0 + 1e-15 {
                        best = (s, i);
                    }
                }
                let y = self.grid[best.1].clone();
                let b = match y.iter().position(|v| *v >= 1.0 - 1e-12) {
                    Some(b) => b,
                    None => WeightedIndex::new(y.iter().copied())
                        .expect("grid points are distributions")
                        .sample(rng),
                };
                (y, b)
            }
        }
    }
}

/// One opponent move; `score` rates candidate mixed actions by the distance they would cause.
pub fn opponent_next<R: Rng + ?Sized>(
    opponent: &mut Opponent,
    rng: &mut R,
    score: impl FnMut(&[f64]) -> f64,
) -> (Vec<f64>, usize) {
    opponent.next(rng, score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_specs() {
        assert_eq!("fixed:0.2,0,0.8".parse::<OpponentSpec>().unwrap(), OpponentSpec::Fixed(vec![0.2, 0.0, 0.8]));
        assert_eq!("cyclic:0,2,1".parse::<OpponentSpec>().unwrap(), OpponentSpec::Cyclic(vec![0, 2, 1]));
        assert_eq!(
            "adaptive:0.1".parse::<OpponentSpec>().unwrap(),
            OpponentSpec::Adaptive { grid_res: 0.1 }
        );
        assert!("sometimes:1".parse::<OpponentSpec>().is_err());
        assert!("fixed:a,b".parse::<OpponentSpec>().is_err());
    }

    #[test]
    fn dirac_and_cycle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut f = Opponent::new(OpponentSpec::Fixed(vec![0.0, 1.0]), 2).unwrap();
        assert!((0..20).all(|_| f.next(&mut rng, |_| 0.0).1 == 1));
        let mut c = Opponent::new(OpponentSpec::Cyclic(vec![0, 1]), 2).unwrap();
        let seq: Vec<usize> = (0..4).map(|_| c.next(&mut rng, |_| 0.0).1).collect();
        assert_eq!(seq, vec![0, 1, 0, 1]);
    }

    #[test]
    fn adaptive_maximises_the_score() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut a = Opponent::new(OpponentSpec::Adaptive { grid_res: 0.5 }, 3).unwrap();
        let (y, b) = a.next(&mut rng, |y| y[2]);
        assert_eq!(y, vec![0.0, 0.0, 1.0]);
        assert_eq!(b, 2);
    }
}
