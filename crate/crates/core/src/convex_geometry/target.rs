use crate::error::{ensure_dim, Result};
use crate::linalg::dist;

use super::polytope::Polytope;

/// A closed convex set that supports Euclidean projection.
pub trait Target: Send + Sync + std::fmt::Debug {
    fn dim(&self) -> usize;

    fn project(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn distance(&self, x: &[f64]) -> Result<f64> {
        let p = self.project(x)?;
        Ok(dist(x, &p))
    }
}

impl Target for Polytope {
    fn dim(&self) -> usize {
        Polytope::dim(self)
    }

    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        super::project_onto_polytope(x, self)
    }
}

/// The nonpositive orthant, optionally truncated below at `-floor` in every coordinate.
/// Projection is coordinate-wise clamping.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeOrthant {
    pub dim: usize,
    pub floor: Option<f64>,
}

impl NegativeOrthant {
    pub fn new(dim: usize) -> Self {
        NegativeOrthant { dim, floor: None }
    }

    pub fn capped(dim: usize, floor: f64) -> Self {
        NegativeOrthant {
            dim,
            floor: Some(floor),
        }
    }

    /// The orthant as an explicit polytope; requires a floor.
    pub fn to_polytope(&self) -> Result<Polytope> {
        let lo = vec![-self.floor.unwrap_or(f64::MAX); self.dim];
        Polytope::cuboid(&lo, &vec![0.0; self.dim])
    }
}

impl Target for NegativeOrthant {
    fn dim(&self) -> usize {
        self.dim
    }

    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        ensure_dim(self.dim, x.len())?;
        let lo = self.floor.map_or(f64::NEG_INFINITY, |f| -f);
        Ok(x.iter().map(|v| v.min(0.0).max(lo)).collect())
    }

    fn distance(&self, x: &[f64]) -> Result<f64> {
        ensure_dim(self.dim, x.len())?;
        let lo = self.floor.map_or(f64::NEG_INFINITY, |f| -f);
        Ok(x
            .iter()
            .map(|v| {
                let c = v.min(0.0).max(lo);
                (v - c) * (v - c)
            })
            .sum::<f64>()
            .sqrt())
    }
}

/// Cartesian product of targets acting on consecutive coordinate blocks.
#[derive(Debug)]
pub struct ProductTarget {
    pub blocks: Vec<Box<dyn Target>>,
}

impl Target for ProductTarget {
    fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim()).sum()
    }

    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        ensure_dim(self.dim(), x.len())?;
        let mut out = Vec::with_capacity(x.len());
        let mut at = 0;
        for b in &self.blocks {
            out.extend(b.project(&x[at..at + b.dim()])?);
            at += b.dim();
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthant_clamps() {
        let o = NegativeOrthant::new(3);
        assert_eq!(o.project(&[1.0, -2.0, 0.5]).unwrap(), vec![0.0, -2.0, 0.0]);
        assert!((o.distance(&[3.0, -1.0, 4.0]).unwrap() - 5.0).abs() < 1e-12);
        let c = NegativeOrthant::capped(2, 1.0);
        assert_eq!(c.project(&[-3.0, 2.0]).unwrap(), vec![-1.0, 0.0]);
    }

    #[test]
    fn product_projects_blockwise() {
        let p = ProductTarget {
            blocks: vec![
                Box::new(NegativeOrthant::new(1)),
                Box::new(Polytope::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap()),
            ],
        };
        let x = p.project(&[2.0, 3.0, -1.0]).unwrap();
        assert!(x[0].abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12 && x[2].abs() < 1e-12);
    }
}
