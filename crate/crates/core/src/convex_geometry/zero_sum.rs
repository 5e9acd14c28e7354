use crate::error::{ensure_finite, Error, Result};

/// Minimax solution of a matrix game in which the row player maximises.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSumSolution {
    pub value: f64,
    /// maximin strategy of the row player
    pub row: Vec<f64>,
    /// minimax strategy of the column player
    pub col: Vec<f64>,
    /// `max_i (G y)_i - min_j (x^T G)_j`
    pub gap: f64,
}

/// Solve `max_x min_y x^T G y` over the two simplices.
///
/// After shifting `G` to be strictly positive, the column player's problem is
/// `max 1^T w  s.t.  G w <= 1, w >= 0`, solved on a dense tableau with Bland's rule;
/// the row strategy is read from the slack reduced costs. Tall matrices are transposed
/// first so the tableau has as few rows as possible.
pub fn solve_zero_sum(g: &[Vec<f64>]) -> Result<ZeroSumSolution> {
    let m = g.len();
    if m == 0 || g[0].is_empty() {
        return Err(Error::Empty("payoff matrix"));
    }
    let n = g[0].len();
    for row in g {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
        ensure_finite(row, "payoff matrix")?;
    }
    if m > n {
        let t: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| -g[i][j]).collect()).collect();
        let (value, x, y) = tableau(&t)?;
        return Ok(finish(g, -value, y, x));
    }
    let (value, x, y) = tableau(g)?;
    Ok(finish(g, value, x, y))
}

fn finish(g: &[Vec<f64>], value: f64, row: Vec<f64>, col: Vec<f64>) -> ZeroSumSolution {
    let m = g.len();
    let n = g[0].len();
    let lower = (0..n)
        .map(|j| (0..m).map(|i| row[i] * g[i][j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let upper = (0..m)
        .map(|i| (0..n).map(|j| g[i][j] * col[j]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    ZeroSumSolution {
        value,
        row,
        col,
        gap: upper - lower,
    }
}

fn tableau(g: &[Vec<f64>]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let m = g.len();
    let n = g[0].len();
    let min = g.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b));
    let shift = 1.0 - min;
    let cols = n + m;
    let w = cols + 1;
    let mut t = vec![0.0; (m + 1) * w];
    for i in 0..m {
        for j in 0..n {
            t[i * w + j] = g[i][j] + shift;
        }
        t[i * w + n + i] = 1.0;
        t[i * w + cols] = 1.0;
    }
    for j in 0..n {
        t[m * w + j] = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let limit = 50 * (m + n) + 1000;
    let mut converged = false;
    for _ in 0..limit {
        let Some(pc) = (0..cols).find(|&j| t[m * w + j] < -1e-12) else {
            converged = true;
            break;
        };
        let mut best: Option<(usize, f64)> = None;
        for r in 0..m {
            let a = t[r * w + pc];
            if a > 1e-12 {
                let ratio = t[r * w + cols] / a;
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bv)) if ratio < bv - 1e-15 || (ratio <= bv + 1e-15 && basis[r] < basis[br]) => {
                        Some((r, ratio))
                    }
                    keep => keep,
                };
            }
        }
        let (pr, _) = best.ok_or(Error::Lp("zero-sum tableau unbounded"))?;
        let p = t[pr * w + pc];
        for k in 0..w {
            t[pr * w + k] /= p;
        }
        for r in 0..=m {
            if r != pr {
                let f = t[r * w + pc];
                if f != 0.0 {
                    for k in 0..w {
                        t[r * w + k] -= f * t[pr * w + k];
                    }
                }
            }
        }
        basis[pr] = pc;
    }
    if !converged {
        return Err(Error::Lp("zero-sum tableau pivot limit"));
    }
    let mut y = vec![0.0; n];
    for r in 0..m {
        if basis[r] < n {
            y[basis[r]] = t[r * w + cols];
        }
    }
    let total: f64 = y.iter().sum();
    let mut x: Vec<f64> = (0..m).map(|i| t[m * w + n + i].max(0.0)).collect();
    let xs: f64 = x.iter().sum();
    if total <= 0.0 || xs <= 0.0 {
        return Err(Error::Lp("degenerate zero-sum tableau"));
    }
    for v in &mut y {
        *v /= total;
    }
    for v in &mut x {
        *v /= xs;
    }
    Ok((1.0 / total - shift, x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_pennies() {
        let s = solve_zero_sum(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert!(s.value.abs() < 1e-12);
        assert!((s.row[0] - 0.5).abs() < 1e-12 && (s.col[0] - 0.5).abs() < 1e-12);
        assert!(s.gap.abs() < 1e-12);
    }

    #[test]
    fn rock_paper_scissors() {
        let g = vec![vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]];
        let s = solve_zero_sum(&g).unwrap();
        assert!(s.value.abs() < 1e-12);
        for p in s.row.iter().chain(&s.col) {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tall_and_wide_agree_with_saddle_point() {
        // saddle at (row 2, col 0) with value 2
        let g = vec![vec![1.0, 5.0], vec![0.0, 4.0], vec![2.0, 3.0]];
        let s = solve_zero_sum(&g).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
        assert!((s.row[2] - 1.0).abs() < 1e-12);
        let t: Vec<Vec<f64>> = (0..2).map(|j| (0..3).map(|i| -g[i][j]).collect()).collect();
        let st = solve_zero_sum(&t).unwrap();
        assert!((st.value + 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_empty_and_ragged() {
        assert!(solve_zero_sum(&[]).is_err());
        assert!(solve_zero_sum(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
