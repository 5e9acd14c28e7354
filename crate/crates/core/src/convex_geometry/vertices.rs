use crate::error::{Error, Result};
use crate::linalg::{dist, dot, solve};

use super::combinations::{binomial, for_each_combination};
use super::polytope::{Polytope, Reduced};
use super::{DEDUP_TOL, ENUM_GUARD, MAX_ENUM_DIM};

/// All vertices of a bounded polytope, deduplicated at the global tolerance.
///
/// Works by exhaustive basis enumeration on the inequality system restricted to the
/// affine hull of the equalities, so the guard applies to that reduced dimension.
pub fn enumerate_vertices(p: &Polytope) -> Result<Vec<Vec<f64>>> {
    Ok(p.vertices()?.to_vec())
}

pub(crate) fn enumerate_reduced(r: &Reduced) -> Result<Vec<Vec<f64>>> {
    let k = r.k();
    if k == 0 {
        return Ok(vec![r.origin.clone()]);
    }
    if k > MAX_ENUM_DIM {
        return Err(Error::DimensionGuard {
            what: "vertex enumeration",
            dim: k,
            max: MAX_ENUM_DIM,
        });
    }
    let m = r.rows.len();
    let count = binomial(m, k);
    if count > ENUM_GUARD {
        return Err(Error::EnumerationGuard {
            count,
            max: ENUM_GUARD,
        });
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    for_each_combination(m, k, |idx| {
        let a: Vec<Vec<f64>> = idx.iter().map(|&i| r.rows[i].clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&i| r.rhs[i]).collect();
        if let Some(z) = solve(&a, &b) {
            let feasible = r
                .rows
                .iter()
                .zip(&r.rhs)
                .all(|(row, rhs)| dot(row, &z) <= rhs + 1e-9);
            if feasible {
                let x = r.lift(&z);
                if !out.iter().any(|v| dist(v, &x) <= DEDUP_TOL) {
                    out.push(x);
                }
            }
        }
        true
    });
    if out.is_empty() {
        return Err(Error::EmptyPolytope);
    }
    Ok(out)
}
