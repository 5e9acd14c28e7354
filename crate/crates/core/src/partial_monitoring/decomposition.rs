use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convex_geometry::{fan, lex_cmp, DEDUP_TOL};
use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{affine_hull, dirac, dot, from_local, norm, random_simplex_point, random_unit, sub, to_local};

use super::fiber::{fiber_vertices, mbar_support};
use super::game::{PMGame, SignalOperator};

/// Largest affine dimension of `F` handled by [`decompose_signal_space`].
pub const MAX_SIGNAL_DIM: usize = 2;

const CANDIDATE_SEED: u64 = 0x5eed_0001;
const VALIDATION_SEED: u64 = 0x5eed_0002;
const CANDIDATE_DIRECTIONS: usize = 8;
const VALIDATION_DIRECTIONS: usize = 16;
const LINEARITY_TOL: f64 = 1e-9;

/// A triangulation of `F` on whose cells the fiber map is linear, with the
/// barycentric map `Φ : F → Δ(B)`.
#[derive(Debug, Clone)]
pub struct SignalDecomposition {
    anchors: Vec<Vec<f64>>,
    cells: Vec<Vec<usize>>,
    origin: Vec<f64>,
    basis: Vec<Vec<f64>>,
    local: Vec<Vec<f64>>,
    inverses: Vec<Vec<Vec<f64>>>,
    lipschitz: f64,
}

impl SignalDecomposition {
    /// The finite set `B ⊆ F`.
    pub fn anchors(&self) -> &[Vec<f64>] {
        &self.anchors
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    /// Simplices as sorted anchor-index tuples, in lexicographic order.
    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Largest Lipschitz constant of `Φ` over the cells (`κ_Φ`).
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn barycentric(&self, cell: usize, u: &[f64]) -> Vec<f64> {
        let idx = &self.cells[cell];
        let k = idx.len() - 1;
        let rel = sub(u, &self.local[idx[0]]);
        let tail: Vec<f64> = self.inverses[cell].iter().map(|row| dot(row, &rel)).collect();
        let mut out = Vec::with_capacity(k + 1);
        out.push(1.0 - tail.iter().sum::<f64>());
        out.extend(tail);
        out
    }

    /// `Φ(σ)`: barycentric weights in the first cell (in cell order) that contains `σ`.
    /// Points marginally outside every cell use the least-violated cell, clipped and
    /// renormalised.
    pub fn phi(&self, sigma: &[f64]) -> Vec<f64> {
        let u = to_local(sigma, &self.origin, &self.basis);
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for c in 0..self.cells.len() {
            let w = self.barycentric(c, &u);
            let lo = w.iter().copied().fold(f64::INFINITY, f64::min);
            if lo >= -1e-9 {
                return self.scatter(c, &w);
            }
            if best.as_ref().is_none_or(|(b, _, _)| lo > *b) {
                best = Some((lo, c, w));
            }
        }
        let (_, c, w) = best.expect("decomposition has at least one cell");
        self.scatter(c, &w)
    }

    fn scatter(&self, cell: usize, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.anchors.len()];
        let clipped: Vec<f64> = w.iter().map(|v| v.max(0.0)).collect();
        let s: f64 = clipped.iter().sum();
        for (&i, v) in self.cells[cell].iter().zip(&clipped) {
            out[i] = v / s;
        }
        out
    }

    /// The barycentric coordinates of `cell` as affine functions `w_i(σ) = g_i · σ + c_i`
    /// on the ambient space, one per cell vertex, in cell order.
    pub fn barycentric_affine(&self, cell: usize) -> Vec<(Vec<f64>, f64)> {
        let idx = &self.cells[cell];
        let u0 = &self.local[idx[0]];
        let dim = self.origin.len();
        let mut tails = Vec::with_capacity(idx.len() - 1);
        for row in &self.inverses[cell] {
            let mut g = vec![0.0; dim];
            for (m, b) in row.iter().zip(&self.basis) {
                crate::linalg::axpy(&mut g, *m, b);
            }
            let c = -dot(&g, &self.origin) - dot(row, u0);
            tails.push((g, c));
        }
        let mut g0 = vec![0.0; dim];
        let mut c0 = 1.0;
        for (g, c) in &tails {
            crate::linalg::axpy(&mut g0, -1.0, g);
            c0 -= c;
        }
        let mut out = vec![(g0, c0)];
        out.extend(tails);
        out
    }

    /// `Σ_b φ_b b`.
    pub fn reconstruct(&self, phi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.origin.len()];
        for (w, b) in phi.iter().zip(&self.anchors) {
            crate::linalg::axpy(&mut out, *w, b);
        }
        out
    }
}

/// Decompose `F` into cells on which the fiber map is linear.
///
/// The breakpoints are generated by the images `H̃(δ_j)`: in dimension one they are the
/// images themselves, in dimension two the cells of the arrangement of all lines through
/// pairs of images. Each convex cell is fan-triangulated from its lexicographically
/// smallest vertex.
pub fn decompose_signal_space(op: &SignalOperator) -> Result<SignalDecomposition> {
    let images = &op.columns;
    let (origin, basis) = affine_hull(images, 1e-9);
    let dim = basis.len();
    if dim > MAX_SIGNAL_DIM {
        return Err(Error::DimensionGuard {
            what: "signal decomposition",
            dim,
            max: MAX_SIGNAL_DIM,
        });
    }
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for x in images {
        let u = to_local(x, &origin, &basis);
        if !pts.iter().any(|p| crate::linalg::dist(p, &u) <= DEDUP_TOL) {
            pts.push(u);
        }
    }
    let (local, polys) = match dim {
        0 => (vec![vec![]], vec![vec![0]]),
        1 => {
            pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
            let n = pts.len();
            (pts, (0..n - 1).map(|i| vec![i, i + 1]).collect())
        }
        _ => planar_arrangement(&pts),
    };
    let anchors: Vec<Vec<f64>> = local.iter().map(|u| from_local(u, &origin, &basis)).collect();

    let mut cells: Vec<Vec<usize>> = if dim == 2 {
        polys.iter().flat_map(|poly| fan(&anchors, poly)).collect()
    } else {
        polys
    };
    cells.sort();
    cells.dedup();

    let mut inverses = Vec::with_capacity(cells.len());
    let mut lipschitz: f64 = 0.0;
    for cell in &cells {
        let inv = cell_inverse(&local, cell)?;
        lipschitz = lipschitz.max(jacobian_norm(&inv));
        inverses.push(inv);
    }
    Ok(SignalDecomposition {
        anchors,
        cells,
        origin,
        basis,
        local,
        inverses,
        lipschitz,
    })
}

/// Inverse of the edge matrix `[u_1 − u_0, ..., u_k − u_0]`, as rows.
fn cell_inverse(local: &[Vec<f64>], cell: &[usize]) -> Result<Vec<Vec<f64>>> {
    let k = cell.len() - 1;
    let u0 = &local[cell[0]];
    let edges: Vec<Vec<f64>> = cell[1..].iter().map(|&i| sub(&local[i], u0)).collect();
    match k {
        0 => Ok(Vec::new()),
        1 => {
            let e = edges[0][0];
            Ok(vec![vec![1.0 / e]])
        }
        _ => {
            // columns are edges: M = [[e0x, e1x], [e0y, e1y]]
            let (a, b, c, d) = (edges[0][0], edges[1][0], edges[0][1], edges[1][1]);
            let det = a * d - b * c;
            if det.abs() < 1e-300 {
                return Err(Error::Invalid("degenerate cell in signal decomposition".into()));
            }
            Ok(vec![vec![d / det, -b / det], vec![-c / det, a / det]])
        }
    }
}

/// Spectral norm of the map `u ↦ (1 − Σ λ, λ)` with `λ = inv · u`.
fn jacobian_norm(inv: &[Vec<f64>]) -> f64 {
    let k = inv.len();
    if k == 0 {
        return 0.0;
    }
    let mut rows: Vec<Vec<f64>> = inv.to_vec();
    rows.push((0..k).map(|c| -inv.iter().map(|r| r[c]).sum::<f64>()).collect());
    // Gram matrix J^T J is k x k with k <= 2
    let g = |a: usize, b: usize| rows.iter().map(|r| r[a] * r[b]).sum::<f64>();
    if k == 1 {
        return g(0, 0).sqrt();
    }
    let (p, q, r) = (g(0, 0), g(0, 1), g(1, 1));
    let mid = 0.5 * (p + r);
    let rad = (0.25 * (p - r) * (p - r) + q * q).sqrt();
    (mid + rad).sqrt()
}

/// Cells of the arrangement of lines through pairs of `pts`, clipped to their hull.
/// Returns the deduplicated cell vertices and each cell as a counter-clockwise cycle.
fn planar_arrangement(pts: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<usize>>) {
    let scale = pts.iter().map(|p| norm(p)).fold(1.0, f64::max);
    let tol = 1e-10 * scale;
    let mut lines: Vec<([f64; 2], f64)> = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let (dx, dy) = (pts[j][0] - pts[i][0], pts[j][1] - pts[i][1]);
            let l = (dx * dx + dy * dy).sqrt();
            let mut n = [-dy / l, dx / l];
            if n[0] < -1e-12 || (n[0].abs() <= 1e-12 && n[1] < 0.0) {
                n = [-n[0], -n[1]];
            }
            let c = n[0] * pts[i][0] + n[1] * pts[i][1];
            let dup = lines.iter().any(|(m, d)| {
                (m[0] - n[0]).abs() < 1e-9 && (m[1] - n[1]).abs() < 1e-9 && (d - c).abs() < tol
            });
            if !dup {
                lines.push((n, c));
            }
        }
    }
    let mut cells: Vec<Vec<[f64; 2]>> = vec![convex_hull_2d(pts)];
    for (n, c) in &lines {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for poly in cells {
            let s: Vec<f64> = poly.iter().map(|v| n[0] * v[0] + n[1] * v[1] - c).collect();
            let pos = s.iter().any(|&x| x > tol);
            let neg = s.iter().any(|&x| x < -tol);
            if pos && neg {
                next.push(clip(&poly, &s, tol, 1.0));
                next.push(clip(&poly, &s, tol, -1.0));
            } else {
                next.push(poly);
            }
        }
        cells = next;
    }

    let mut verts: Vec<Vec<f64>> = Vec::new();
    let mut index = |v: &[f64; 2]| -> usize {
        if let Some(i) = verts
            .iter()
            .position(|w| (w[0] - v[0]).abs() <= tol && (w[1] - v[1]).abs() <= tol)
        {
            return i;
        }
        verts.push(vec![v[0], v[1]]);
        verts.len() - 1
    };
    let mut polys: Vec<Vec<usize>> = Vec::with_capacity(cells.len());
    for poly in &cells {
        let mut ids: Vec<usize> = Vec::with_capacity(poly.len());
        for v in poly {
            let i = index(v);
            if ids.last() != Some(&i) && ids.first() != Some(&i) {
                ids.push(i);
            }
        }
        if ids.len() >= 3 {
            polys.push(ids);
        }
    }
    // relabel vertices in lexicographic order so anchor indices do not depend on line order
    let mut order: Vec<usize> = (0..verts.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&verts[a], &verts[b]));
    let mut rank = vec![0; verts.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let sorted: Vec<Vec<f64>> = order.iter().map(|&i| verts[i].clone()).collect();
    let polys = polys
        .into_iter()
        .map(|p| p.into_iter().map(|i| rank[i]).collect())
        .collect();
    (sorted, polys)
}

/// Part of a convex polygon on the side `sign · s >= 0`, orientation preserved.
fn clip(poly: &[[f64; 2]], s: &[f64], tol: f64, sign: f64) -> Vec<[f64; 2]> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let j = (i + 1) % n;
        let (si, sj) = (sign * s[i], sign * s[j]);
        if si >= -tol {
            out.push(poly[i]);
        }
        if (si > tol && sj < -tol) || (si < -tol && sj > tol) {
            let t = si / (si - sj);
            out.push([
                poly[i][0] + t * (poly[j][0] - poly[i][0]),
                poly[i][1] + t * (poly[j][1] - poly[i][1]),
            ]);
        }
    }
    out
}

/// Andrew's monotone chain, counter-clockwise, collinear points dropped.
fn convex_hull_2d(pts: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let mut p: Vec<[f64; 2]> = pts.iter().map(|v| [v[0], v[1]]).collect();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &v in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], v) <= 1e-14 {
            lower.pop();
        }
        lower.push(v);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &v in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], v) <= 1e-14 {
            upper.pop();
        }
        upper.push(v);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// A finite set `A ⊆ Δ(I)` of mixed actions with the map `Θ : Δ(I) → Δ(A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDecomposition {
    anchors: Vec<Vec<f64>>,
    kind: ActionKind,
}

#[derive(Debug, Clone, PartialEq)]
enum ActionKind {
    /// two actions; breakpoints in the mass `λ` on the second action
    Breakpoints(Vec<f64>),
    /// the pure actions themselves
    Vertices,
}

impl ActionDecomposition {
    /// `A = {δ_i}` with `Θ` the identity.
    pub fn vertices(n: usize) -> Self {
        ActionDecomposition {
            anchors: (0..n).map(|i| dirac(n, i)).collect(),
            kind: ActionKind::Vertices,
        }
    }

    /// Two actions, anchors `(1 − λ, λ)` for the given breakpoints (0 and 1 are added).
    pub fn breakpoints(lambdas: &[f64]) -> Result<Self> {
        let mut ls: Vec<f64> = lambdas.iter().copied().chain([0.0, 1.0]).collect();
        if ls.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::Invalid("breakpoints must lie in [0, 1]".into()));
        }
        ls.sort_by(f64::total_cmp);
        ls.dedup_by(|a, b| (*a - *b).abs() <= DEDUP_TOL);
        let anchors = ls.iter().map(|&l| vec![1.0 - l, l]).collect();
        Ok(ActionDecomposition {
            anchors,
            kind: ActionKind::Breakpoints(ls),
        })
    }

    pub fn anchors(&self) -> &[Vec<f64>] {
        &self.anchors
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    /// Breakpoints in `λ` when the decomposition is over two actions.
    pub fn lambdas(&self) -> Option<&[f64]> {
        match &self.kind {
            ActionKind::Breakpoints(ls) => Some(ls),
            ActionKind::Vertices => None,
        }
    }

    /// `Θ(p)` with `Σ_a Θ_a(p) a = p`.
    pub fn theta(&self, p: &[f64]) -> Vec<f64> {
        match &self.kind {
            ActionKind::Vertices => {
                let c: Vec<f64> = p.iter().map(|v| v.max(0.0)).collect();
                let s: f64 = c.iter().sum();
                c.iter().map(|v| v / s).collect()
            }
            ActionKind::Breakpoints(ls) => {
                let l = p[1].clamp(0.0, 1.0);
                let mut out = vec![0.0; ls.len()];
                let i = ls.partition_point(|&b| b <= l).clamp(1, ls.len() - 1) - 1;
                let w = ((l - ls[i]) / (ls[i + 1] - ls[i])).clamp(0.0, 1.0);
                out[i] = 1.0 - w;
                out[i + 1] = w;
                out
            }
        }
    }
}

/// Find a finite `A` on which `m̄(·, b)` is linear between anchors for every `b in B`.
///
/// With two actions the candidate breakpoints are the kinks of the support function of
/// `m̄(p_λ, b)` in the coordinate directions and in a few seeded random directions; the
/// result is validated by comparing support functions at interior points of each piece in
/// fresh random directions. With more actions only globally linear games are accepted.
pub fn build_action_decomposition(
    game: &PMGame,
    op: &SignalOperator,
    signals: &SignalDecomposition,
) -> Result<ActionDecomposition> {
    let n = game.n_actions();
    let d = game.d();
    let fibers: Vec<Vec<Vec<f64>>> = signals
        .anchors()
        .iter()
        .map(|b| fiber_vertices(op, b))
        .collect::<Result<_>>()?;
    let tol = LINEARITY_TOL * (1.0 + game.bound());
    let mut fresh = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
    let mut check_dirs = coordinate_directions(d);
    for _ in 0..VALIDATION_DIRECTIONS {
        let u = random_unit(&mut fresh, d);
        check_dirs.push(u.iter().map(|v| -v).collect());
        check_dirs.push(u);
    }

    if n != 2 {
        let pure: Vec<Vec<f64>> = (0..n).map(|i| dirac(n, i)).collect();
        for fv in &fibers {
            for _ in 0..8 {
                let p = random_simplex_point(&mut fresh, n);
                for u in &check_dirs {
                    let lhs = mbar_support(game, &p, fv, u);
                    let rhs: f64 = pure.iter().zip(&p).map(|(e, w)| w * mbar_support(game, e, fv, u)).sum();
                    if (lhs - rhs).abs() > tol {
                        return Err(Error::NotBiPiecewiseLinear(format!(
                            "{n} actions and m̄(·, b) is not linear on the simplex"
                        )));
                    }
                }
            }
        }
        return Ok(ActionDecomposition::vertices(n));
    }

    let mut seeded = ChaCha8Rng::seed_from_u64(CANDIDATE_SEED);
    let mut dirs = coordinate_directions(d);
    for _ in 0..CANDIDATE_DIRECTIONS {
        let u = random_unit(&mut seeded, d);
        dirs.push(u.iter().map(|v| -v).collect());
        dirs.push(u);
    }
    let mut candidates = Vec::new();
    for fv in &fibers {
        let ends: Vec<(Vec<f64>, Vec<f64>)> = fv
            .iter()
            .map(|q| (game.mixed_payoff(&[1.0, 0.0], q), game.mixed_payoff(&[0.0, 1.0], q)))
            .collect();
        for u in &dirs {
            let lines: Vec<(f64, f64)> = ends
                .iter()
                .map(|(e0, e1)| (dot(u, e0), dot(u, e1) - dot(u, e0)))
                .collect();
            envelope_kinks(&lines, tol, &mut candidates);
        }
    }
    let dec = ActionDecomposition::breakpoints(&candidates)?;
    let ls = dec.lambdas().expect("two-action decomposition").to_vec();
    for fv in &fibers {
        let h = |l: f64, u: &[f64]| mbar_support(game, &[1.0 - l, l], fv, u);
        for w in ls.windows(2) {
            for s in [0.25, 0.5, 0.75] {
                let l = w[0] + s * (w[1] - w[0]);
                for u in &check_dirs {
                    let interp = (1.0 - s) * h(w[0], u) + s * h(w[1], u);
                    if (h(l, u) - interp).abs() > tol {
                        return Err(Error::NotBiPiecewiseLinear(format!(
                            "support of m̄(p, b) is not linear between λ = {} and λ = {}",
                            w[0], w[1]
                        )));
                    }
                }
            }
        }
    }
    Ok(dec)
}

fn coordinate_directions(d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .flat_map(|k| {
            let mut e = vec![0.0; d];
            e[k] = 1.0;
            let mut m = vec![0.0; d];
            m[k] = -1.0;
            [e, m]
        })
        .collect()
}

/// Kinks in (0, 1) of the upper envelope of the lines `α + β λ`.
fn envelope_kinks(lines: &[(f64, f64)], tol: f64, out: &mut Vec<f64>) {
    for (v, &(av, bv)) in lines.iter().enumerate() {
        for &(aw, bw) in &lines[v + 1..] {
            if (bv - bw).abs() <= tol {
                continue;
            }
            let l = (aw - av) / (bv - bw);
            if l <= 1e-12 || l >= 1.0 - 1e-12 {
                continue;
            }
            let val = av + bv * l;
            let top = lines.iter().map(|(a, b)| a + b * l).fold(f64::NEG_INFINITY, f64::max);
            if val >= top - tol {
                out.push(l);
            }
        }
    }
}

/// Checks that anchors, cells and the map are consistent: `Φ(b) = δ_b`.
pub fn check_anchor_identity(dec: &SignalDecomposition) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, b) in dec.anchors().iter().enumerate() {
        let phi = dec.phi(b);
        ensure_dim(dec.len(), phi.len())?;
        worst = worst.max((phi[i] - 1.0).abs());
    }
    Ok(worst)
}
