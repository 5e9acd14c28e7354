use super::combinations::binomial;
use crate::error::{Error, Result};

/// Uniform lattice `{z / k : z in N^n, sum z = k}` on the probability simplex.
pub fn simplex_lattice(n: usize, k: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut z = vec![0usize; n];
    fill(&mut z, 0, k, k, &mut out);
    out
}

fn fill(z: &mut Vec<usize>, pos: usize, left: usize, k: usize, out: &mut Vec<Vec<f64>>) {
    let n = z.len();
    if pos == n - 1 {
        z[pos] = left;
        out.push(z.iter().map(|&c| c as f64 / k.max(1) as f64).collect());
        return;
    }
    for c in (0..=left).rev() {
        z[pos] = c;
        fill(z, pos + 1, left - c, k, out);
    }
}

/// Lattice with spacing at most `res`; vertices of the simplex are always included.
pub fn simplex_grid(n: usize, res: f64) -> Result<Vec<Vec<f64>>> {
    if !(res > 0.0 && res <= 1.0) {
        return Err(Error::Invalid(format!("grid resolution {res} must lie in (0, 1]")));
    }
    let k = (1.0 / res - 1e-9).ceil().max(1.0) as usize;
    let count = binomial(k + n - 1, n - 1);
    if count > 5_000_000 {
        return Err(Error::EnumerationGuard { count, max: 5_000_000 });
    }
    Ok(simplex_lattice(n, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_size_and_sums() {
        let g = simplex_lattice(3, 4);
        assert_eq!(g.len() as u128, binomial(6, 2));
        for p in &g {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(g[0], vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn grid_resolution_rounds_up() {
        assert_eq!(simplex_grid(2, 0.5).unwrap().len(), 3);
        assert_eq!(simplex_grid(2, 0.3).unwrap().len(), 5);
        assert!(simplex_grid(2, 0.0).is_err());
    }
}
