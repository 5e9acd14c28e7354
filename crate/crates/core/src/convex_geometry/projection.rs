use crate::error::{ensure_dim, ensure_finite, Error, Result};
use crate::linalg::{dot, norm, solve};

use super::combinations::{binomial, for_each_combination};
use super::polytope::{Polytope, Reduced};

const FALLBACK_GUARD: u128 = 2_000_000;

/// Euclidean projection onto the probability simplex by the sort-and-threshold rule.
pub fn project_onto_simplex(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::Empty("vector"));
    }
    ensure_finite(v, "simplex projection input")?;
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    Ok(v.iter().map(|x| (x - theta).max(0.0)).collect())
}

/// Euclidean projection onto a nonempty bounded polytope.
///
/// Primal active-set quadratic programming on the inequality system restricted to the
/// affine hull of the equalities. If the active-set loop stalls on a degenerate vertex
/// it falls back to enumerating candidate active sets.
pub fn project_onto_polytope(v: &[f64], p: &Polytope) -> Result<Vec<f64>> {
    ensure_dim(p.dim(), v.len())?;
    ensure_finite(v, "projection input")?;
    let r = p.hrep()?.reduced()?;
    let w = r.reduce(v);
    if r.k() == 0 {
        return Ok(r.origin.clone());
    }
    let z = match active_set(r, &w) {
        Some(z) => z,
        None => exhaustive(r, &w)?,
    };
    Ok(r.lift(&z))
}

fn active_set(r: &Reduced, w: &[f64]) -> Option<Vec<f64>> {
    let k = r.k();
    let m = r.rows.len();
    let mut z = r.anchor.clone();
    let mut working: Vec<usize> = Vec::new();
    let max_iter = 20 * (m + k) + 50;
    for _ in 0..max_iter {
        let g: Vec<f64> = z.iter().zip(w).map(|(a, b)| a - b).collect();
        let (step, mu) = if working.is_empty() {
            (g.iter().map(|x| -x).collect::<Vec<_>>(), Vec::new())
        } else {
            let gram: Vec<Vec<f64>> = working
                .iter()
                .map(|&i| working.iter().map(|&j| dot(&r.rows[i], &r.rows[j])).collect())
                .collect();
            let rhs: Vec<f64> = working.iter().map(|&i| dot(&r.rows[i], &g)).collect();
            let mu = solve(&gram, &rhs)?;
            let mut s: Vec<f64> = g.iter().map(|x| -x).collect();
            for (c, &i) in mu.iter().zip(&working) {
                crate::linalg::axpy(&mut s, *c, &r.rows[i]);
            }
            (s, mu)
        };
        if norm(&step) <= 1e-12 * (1.0 + norm(&g)) {
            // multipliers are -mu; drop the most negative one
            let worst = mu
                .iter()
                .enumerate()
                .filter(|(_, &m)| m > 1e-12)
                .max_by(|a, b| a.1.total_cmp(b.1));
            match worst {
                None => return Some(z),
                Some((pos, _)) => {
                    working.remove(pos);
                    continue;
                }
            }
        }
        let mut alpha = 1.0;
        let mut blocking = None;
        for i in 0..m {
            if working.contains(&i) {
                continue;
            }
            let rp = dot(&r.rows[i], &step);
            if rp > 1e-14 {
                let slack = (r.rhs[i] - dot(&r.rows[i], &z)).max(0.0);
                let t = slack / rp;
                if t < alpha {
                    alpha = t;
                    blocking = Some(i);
                }
            }
        }
        crate::linalg::axpy(&mut z, alpha, &step);
        if let Some(i) = blocking {
            working.push(i);
        }
    }
    None
}

/// Try every active set of size at most `k`; keep the closest feasible candidate.
fn exhaustive(r: &Reduced, w: &[f64]) -> Result<Vec<f64>> {
    let k = r.k();
    let m = r.rows.len();
    let total: u128 = (0..=k.min(m)).map(|s| binomial(m, s)).sum();
    if total > FALLBACK_GUARD {
        return Err(Error::Lp("projection active-set loop did not converge"));
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for size in 0..=k.min(m) {
        for_each_combination(m, size, |idx| {
            let cand = if idx.is_empty() {
                Some(w.to_vec())
            } else {
                let gram: Vec<Vec<f64>> = idx
                    .iter()
                    .map(|&i| idx.iter().map(|&j| dot(&r.rows[i], &r.rows[j])).collect())
                    .collect();
                let rhs: Vec<f64> = idx.iter().map(|&i| dot(&r.rows[i], w) - r.rhs[i]).collect();
                solve(&gram, &rhs).map(|mu| {
                    let mut z = w.to_vec();
                    for (c, &i) in mu.iter().zip(idx) {
                        crate::linalg::axpy(&mut z, -c, &r.rows[i]);
                    }
                    z
                })
            };
            if let Some(z) = cand {
                let ok = r.rows.iter().zip(&r.rhs).all(|(row, b)| dot(row, &z) <= b + 1e-9);
                if ok {
                    let d = crate::linalg::dist(&z, w);
                    if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                        best = Some((d, z));
                    }
                }
            }
            true
        });
    }
    best.map(|(_, z)| z).ok_or(Error::EmptyPolytope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_geometry::Halfspace;

    #[test]
    fn simplex_projection_reference_point() {
        let p = project_onto_simplex(&[0.8, 0.6, 0.6]).unwrap();
        let expect = [0.8 - 1.0 / 3.0, 0.6 - 1.0 / 3.0, 0.6 - 1.0 / 3.0];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn simplex_projection_rejects_bad_input() {
        assert!(project_onto_simplex(&[]).is_err());
        assert!(project_onto_simplex(&[f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn box_projection_clamps() {
        let b = Polytope::cuboid(&[0.0, 0.0], &[1.0, 2.0]).unwrap();
        let p = project_onto_polytope(&[3.0, -1.0], &b).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
        let inside = project_onto_polytope(&[0.3, 1.1], &b).unwrap();
        assert!((inside[0] - 0.3).abs() < 1e-12 && (inside[1] - 1.1).abs() < 1e-12);
    }

    #[test]
    fn projection_onto_simplex_polytope_matches_sort_rule() {
        let s = Polytope::simplex(4);
        let v = [0.9, -0.4, 0.35, 0.7];
        let a = project_onto_polytope(&v, &s).unwrap();
        let b = project_onto_simplex(&v).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn empty_and_unbounded_are_errors() {
        let empty = Polytope::from_hrep(
            1,
            vec![Halfspace::new(vec![1.0], 0.0), Halfspace::new(vec![-1.0], -1.0)],
            vec![],
        )
        .unwrap();
        assert_eq!(project_onto_polytope(&[0.0], &empty), Err(Error::EmptyPolytope));
        let ray = Polytope::from_hrep(1, vec![Halfspace::new(vec![-1.0], 0.0)], vec![]).unwrap();
        assert_eq!(project_onto_polytope(&[0.0], &ray), Err(Error::Unbounded));
    }

    #[test]
    fn exhaustive_fallback_agrees_with_active_set() {
        let p = Polytope::from_vertices(vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 1.0, 1.0],
        ])
        .unwrap();
        let r = p.hrep().unwrap().reduced().unwrap();
        for v in [[2.0, -1.0, 0.5], [0.2, 0.2, 0.2], [-1.0, -1.0, 3.0], [2.0, 2.0, 2.0]] {
            let w = r.reduce(&v);
            let a = active_set(r, &w).unwrap();
            let b = exhaustive(r, &w).unwrap();
            assert!(crate::linalg::dist(&a, &b) < 1e-9, "{v:?}");
        }
    }
}
