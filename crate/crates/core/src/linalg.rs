//! Small dense helpers on `f64` slices.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += s * x`
pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

pub fn dirac(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Solve the square system `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when the matrix is numerically singular.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() <= 1e-13 * scale {
            return None;
        }
        m.swap(col, piv);
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..=n {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (m[row][n] - s) / m[row][row];
    }
    Some(x)
}

/// Orthonormalise `rows` by modified Gram-Schmidt, dropping rows whose residual
/// norm falls below `tol` times their original norm. Returns the basis and, for each
/// kept basis vector, the index of the input row that produced it.
pub fn orthonormalize(rows: &[Vec<f64>], tol: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut origin = Vec::new();
    for (idx, row) in rows.iter().enumerate() {
        let n0 = norm(row);
        if n0 == 0.0 {
            continue;
        }
        let mut v = row.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&v, q);
                axpy(&mut v, -c, q);
            }
        }
        let nv = norm(&v);
        if nv > tol * n0 {
            basis.push(scale(&v, 1.0 / nv));
            origin.push(idx);
        }
    }
    (basis, origin)
}

/// Orthonormal basis of the orthogonal complement of span(`basis`) in R^n.
/// `basis` must already be orthonormal.
pub fn complement(basis: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = basis.to_vec();
    let mut out = Vec::new();
    for i in 0..n {
        let mut v = dirac(n, i);
        for _ in 0..2 {
            for q in &all {
                let c = dot(&v, q);
                axpy(&mut v, -c, q);
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            let q = scale(&v, 1.0 / nv);
            all.push(q.clone());
            out.push(q);
        }
        if all.len() == n {
            break;
        }
    }
    out
}

/// Affine hull of a point set: an origin and an orthonormal basis of its direction
/// space. Directions shorter than `tol` times the point spread are discarded.
pub fn affine_hull(points: &[Vec<f64>], tol: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let origin = points[0].clone();
    let diffs: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p, &origin)).collect();
    let spread = diffs.iter().map(|d| norm(d)).fold(0.0, f64::max).max(1.0);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for d in &diffs {
        let mut v = d.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&v, q);
                axpy(&mut v, -c, q);
            }
        }
        let nv = norm(&v);
        if nv > tol * spread {
            basis.push(scale(&v, 1.0 / nv));
        }
    }
    (origin, basis)
}

/// Coordinates of `x` in the affine frame `(origin, basis)`.
pub fn to_local(x: &[f64], origin: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let d = sub(x, origin);
    basis.iter().map(|q| dot(&d, q)).collect()
}

pub fn from_local(u: &[f64], origin: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut x = origin.to_vec();
    for (ui, q) in u.iter().zip(basis) {
        axpy(&mut x, *ui, q);
    }
    x
}

/// Determinant by elimination; used for small simplex volumes.
pub fn det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m = a.to_vec();
    let mut d = 1.0;
    for col in 0..n {
        let piv = match (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())) {
            Some(p) => p,
            None => return 0.0,
        };
        if m[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(col, piv);
            d = -d;
        }
        d *= m[col][col];
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    d
}

/// Uniformly distributed unit vector in R^d.
pub fn random_unit<R: rand::Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return scale(&v, 1.0 / n);
        }
    }
}

/// Uniformly distributed point of the simplex Δ(n).
pub fn random_simplex_point<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.sample(rand_distr::Exp1)).collect();
    let s: f64 = v.iter().sum();
    scale(&v, 1.0 / s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_recovers_known_solution() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
        assert!(solve(&[vec![1.0, 2.0], vec![2.0, 4.0]], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn complement_spans_the_rest() {
        let (b, _) = orthonormalize(&[vec![1.0, 1.0, 0.0]], 1e-10);
        let c = complement(&b, 3);
        assert_eq!(c.len(), 2);
        for q in &c {
            assert!(dot(q, &b[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_hull_of_collinear_points_is_a_line() {
        let pts = vec![vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 1.0]];
        let (_, basis) = affine_hull(&pts, 1e-9);
        assert_eq!(basis.len(), 1);
    }
}
