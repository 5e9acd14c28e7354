use crate::error::{Error, Result};
use crate::linalg::{affine_hull, det, to_local};

use super::polytope::Polytope;

/// A subdivision of a polytope into simplices whose vertices index into `points`.
#[derive(Debug, Clone)]
pub struct SimplexCover {
    pub points: Vec<Vec<f64>>,
    pub cells: Vec<Vec<usize>>,
}

impl SimplexCover {
    /// k-dimensional volume of a cell measured inside its own affine hull.
    pub fn cell_volume(&self, cell: usize) -> f64 {
        let idx = &self.cells[cell];
        let pts: Vec<Vec<f64>> = idx.iter().map(|&i| self.points[i].clone()).collect();
        simplex_volume(&pts)
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.cells.len()).map(|c| self.cell_volume(c)).sum()
    }
}

/// Volume of the simplex spanned by `pts` inside its affine hull (1 for a point).
pub fn simplex_volume(pts: &[Vec<f64>]) -> f64 {
    let k = pts.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let (origin, basis) = affine_hull(pts, 1e-12);
    if basis.len() < k {
        return 0.0;
    }
    let rows: Vec<Vec<f64>> = pts[1..].iter().map(|p| to_local(p, &origin, &basis)).collect();
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    det(&rows).abs() / fact
}

/// Fan triangulation from the lexicographically smallest vertex.
///
/// Only polytopes of affine dimension at most two are supported: a point yields one
/// cell, a segment yields itself, and a polygon yields a fan of triangles.
pub fn triangulate(p: &Polytope) -> Result<SimplexCover> {
    let dim = p.affine_dim()?;
    if dim > 2 {
        return Err(Error::DimensionGuard {
            what: "triangulation",
            dim,
            max: 2,
        });
    }
    let ext = Polytope::hull_of(p.vertices()?.to_vec())?;
    let points = ext.vertices()?.to_vec();
    let cells = match dim {
        0 => vec![vec![0]],
        1 => {
            let (origin, basis) = affine_hull(&points, 1e-9);
            let t: Vec<f64> = points.iter().map(|x| to_local(x, &origin, &basis)[0]).collect();
            let lo = (0..t.len()).min_by(|&a, &b| t[a].total_cmp(&t[b])).unwrap();
            let hi = (0..t.len()).max_by(|&a, &b| t[a].total_cmp(&t[b])).unwrap();
            vec![sorted(vec![lo, hi])]
        }
        _ => fan(&points, &polygon_order(&points)),
    };
    Ok(SimplexCover { points, cells })
}

/// Counter-clockwise order of the vertices of a planar convex polygon in its own plane.
pub(crate) fn polygon_order(points: &[Vec<f64>]) -> Vec<usize> {
    let (origin, basis) = affine_hull(points, 1e-9);
    let local: Vec<Vec<f64>> = points.iter().map(|x| to_local(x, &origin, &basis)).collect();
    let n = local.len() as f64;
    let cx = local.iter().map(|u| u[0]).sum::<f64>() / n;
    let cy = local.iter().map(|u| u[1]).sum::<f64>() / n;
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let ta = (local[a][1] - cy).atan2(local[a][0] - cx);
        let tb = (local[b][1] - cy).atan2(local[b][0] - cx);
        ta.total_cmp(&tb)
    });
    order
}

/// Fan from the lexicographically smallest vertex over a cyclic vertex order.
pub(crate) fn fan(points: &[Vec<f64>], order: &[usize]) -> Vec<Vec<usize>> {
    let apex_pos = (0..order.len())
        .min_by(|&a, &b| lex_cmp(&points[order[a]], &points[order[b]]))
        .unwrap();
    let n = order.len();
    let rotated: Vec<usize> = (0..n).map(|i| order[(apex_pos + i) % n]).collect();
    let mut cells = Vec::new();
    for i in 1..n - 1 {
        let tri = vec![rotated[0], rotated[i], rotated[i + 1]];
        let pts: Vec<Vec<f64>> = tri.iter().map(|&j| points[j].clone()).collect();
        if simplex_volume(&pts) > 1e-14 {
            cells.push(sorted(tri));
        }
    }
    cells
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hexagon_gets_four_triangles() {
        let pts: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                let a = i as f64 * std::f64::consts::PI / 3.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let cover = triangulate(&Polytope::from_vertices(pts).unwrap()).unwrap();
        assert_eq!(cover.cells.len(), 4);
        let area = 3.0 * 3f64.sqrt() / 2.0;
        assert!((cover.total_volume() - area).abs() < 1e-12);
    }

    #[test]
    fn segment_and_point() {
        let seg = Polytope::from_vertices(vec![vec![0.0, 1.0, 0.0], vec![2.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]]).unwrap();
        let cover = triangulate(&seg).unwrap();
        assert_eq!(cover.cells.len(), 1);
        assert!((cover.total_volume() - 2.0).abs() < 1e-12);
        let pt = Polytope::from_vertices(vec![vec![0.3, 0.3]]).unwrap();
        assert_eq!(triangulate(&pt).unwrap().cells, vec![vec![0]]);
    }

    #[test]
    fn three_dimensional_input_is_refused() {
        let cube = Polytope::cuboid(&[0.0; 3], &[1.0; 3]).unwrap();
        assert!(matches!(triangulate(&cube), Err(Error::DimensionGuard { .. })));
    }
}
