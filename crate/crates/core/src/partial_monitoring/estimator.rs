use crate::error::{Error, Result};

/// Importance-weighted estimate of `H̃(q)` over one block.
///
/// Each observation `(i, s)` adds `1 / (L p_i)` to cell `(i, s)`, where `p_i` is the
/// probability with which base action `i` was drawn; the result is unbiased for the
/// average signal vector of the block.
#[derive(Debug, Clone)]
pub struct SignalEstimator {
    n_i: usize,
    n_h: usize,
    probs: Vec<f64>,
    counts: Vec<f64>,
    len: usize,
}

impl SignalEstimator {
    pub fn new(n_h: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::Invalid("every base action needs positive probability".into()));
        }
        let n_i = probs.len();
        Ok(SignalEstimator {
            n_i,
            n_h,
            probs,
            counts: vec![0.0; n_i * n_h],
            len: 0,
        })
    }

    pub fn record(&mut self, i: usize, s: usize) -> Result<()> {
        if i >= self.n_i {
            return Err(Error::IndexOutOfRange { index: i, len: self.n_i });
        }
        if s >= self.n_h {
            return Err(Error::IndexOutOfRange { index: s, len: self.n_h });
        }
        self.counts[i * self.n_h + s] += 1.0;
        self.len += 1;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `σ̃`, flattened as `i * n_h + s`.
    pub fn estimate(&self) -> Result<Vec<f64>> {
        if self.len == 0 {
            return Err(Error::Empty("block of observations"));
        }
        let l = self.len as f64;
        Ok(self
            .counts
            .iter()
            .enumerate()
            .map(|(c, &n)| n / (l * self.probs[c / self.n_h]))
            .collect())
    }
}

/// One-shot form of [`SignalEstimator`].
pub fn estimate_signal_distribution(observations: &[(usize, usize)], probs: &[f64], n_h: usize) -> Result<Vec<f64>> {
    let mut est = SignalEstimator::new(n_h, probs.to_vec())?;
    for &(i, s) in observations {
        est.record(i, s)?;
    }
    est.estimate()
}

/// Bernstein deviation bound for one cell of the estimate when every base action has
/// probability at least `γ / n_i`, holding simultaneously for all cells with probability
/// `1 − δ`.
pub fn bernstein_envelope(n_i: usize, n_h: usize, gamma: f64, len: usize, delta: f64) -> f64 {
    let lg = (2.0 * (n_i * n_h) as f64 / delta).ln();
    let gl = gamma * len as f64;
    (2.0 * n_i as f64 / gl * lg).sqrt() + n_i as f64 / (3.0 * gl) * lg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_observation_is_inverse_probability_weighted() {
        let e = estimate_signal_distribution(&[(1, 0)], &[0.75, 0.25], 2).unwrap();
        assert_eq!(e, vec![0.0, 0.0, 4.0, 0.0]);
    }

    #[test]
    fn empty_block_is_an_error() {
        assert!(estimate_signal_distribution(&[], &[0.5, 0.5], 2).is_err());
    }
}
