use std::sync::OnceLock;

use crate::error::{ensure_dim, ensure_finite, Error, Result};
use crate::linalg::{affine_hull, complement, dot, from_local, norm, to_local};
use crate::lp::{LinearProgram, LpOutcome};

use super::combinations::{binomial, for_each_combination};
use super::{DEDUP_TOL, ENUM_GUARD, MAX_ENUM_DIM};

/// The closed halfspace `normal · x <= offset` (or hyperplane when used as an equality).
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Halfspace { normal, offset }
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }
}

/// Inequality system restricted to the affine hull of the equalities:
/// `x = origin + basis^T z` with `rows · z <= rhs`. Rows are unit-normalised.
#[derive(Debug, Clone)]
pub(crate) struct Reduced {
    pub origin: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    /// Chebyshev-style centre in reduced coordinates
    pub anchor: Vec<f64>,
}

impl Reduced {
    pub fn k(&self) -> usize {
        self.basis.len()
    }

    pub fn lift(&self, z: &[f64]) -> Vec<f64> {
        from_local(z, &self.origin, &self.basis)
    }

    pub fn reduce(&self, x: &[f64]) -> Vec<f64> {
        to_local(x, &self.origin, &self.basis)
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Shape {
    Empty,
    Unbounded,
    Bounded(Reduced),
}

/// Halfspace representation together with its analysed shape.
#[derive(Debug, Clone)]
pub struct HRep {
    pub halfspaces: Vec<Halfspace>,
    pub equalities: Vec<Halfspace>,
    pub(crate) shape: Shape,
}

impl HRep {
    pub fn is_empty(&self) -> bool {
        matches!(self.shape, Shape::Empty)
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self.shape, Shape::Unbounded)
    }

    pub(crate) fn reduced(&self) -> Result<&Reduced> {
        match &self.shape {
            Shape::Empty => Err(Error::EmptyPolytope),
            Shape::Unbounded => Err(Error::Unbounded),
            Shape::Bounded(r) => Ok(r),
        }
    }
}

/// A convex polytope in R^dim held in H-representation, V-representation or both.
/// Missing representations are computed on demand and cached.
#[derive(Debug, Clone)]
pub struct Polytope {
    dim: usize,
    hrep: OnceLock<Result<HRep>>,
    vrep: OnceLock<Result<Vec<Vec<f64>>>>,
}

impl Polytope {
    /// Build from `normal · x <= offset` rows and `normal · x = offset` rows.
    /// Emptiness and unboundedness are recorded, not rejected; they surface as errors
    /// from projection and vertex enumeration.
    pub fn from_hrep(dim: usize, halfspaces: Vec<Halfspace>, equalities: Vec<Halfspace>) -> Result<Self> {
        for h in halfspaces.iter().chain(&equalities) {
            ensure_dim(dim, h.normal.len())?;
            ensure_finite(&h.normal, "halfspace normal")?;
            ensure_finite(&[h.offset], "halfspace offset")?;
        }
        let shape = analyse(dim, &halfspaces, &equalities, true)?;
        Ok(Self::with_hrep(
            dim,
            HRep {
                halfspaces,
                equalities,
                shape,
            },
        ))
    }

    /// As [`Polytope::from_hrep`] for systems already known to be bounded (e.g. subsets of
    /// a simplex); skips the recession-cone test.
    pub(crate) fn from_hrep_bounded(
        dim: usize,
        halfspaces: Vec<Halfspace>,
        equalities: Vec<Halfspace>,
    ) -> Result<Self> {
        let shape = analyse(dim, &halfspaces, &equalities, false)?;
        Ok(Self::with_hrep(
            dim,
            HRep {
                halfspaces,
                equalities,
                shape,
            },
        ))
    }

    fn with_hrep(dim: usize, hrep: HRep) -> Self {
        let p = Polytope {
            dim,
            hrep: OnceLock::new(),
            vrep: OnceLock::new(),
        };
        let _ = p.hrep.set(Ok(hrep));
        p
    }

    /// Convex hull of a finite point set.
    pub fn from_vertices(points: Vec<Vec<f64>>) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty("vertex list"))?;
        let dim = first.len();
        for p in &points {
            ensure_dim(dim, p.len())?;
            ensure_finite(p, "vertex")?;
        }
        let mut uniq: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        for p in points {
            if !uniq.iter().any(|q| crate::linalg::dist(q, &p) <= DEDUP_TOL) {
                uniq.push(p);
            }
        }
        let poly = Polytope {
            dim,
            hrep: OnceLock::new(),
            vrep: OnceLock::new(),
        };
        let _ = poly.vrep.set(Ok(uniq));
        Ok(poly)
    }

    /// The convex hull of `points` reduced to its extreme points.
    pub fn hull_of(points: Vec<Vec<f64>>) -> Result<Self> {
        let raw = Self::from_vertices(points)?;
        let hrep = raw.hrep()?.clone();
        let poly = Self::with_hrep(raw.dim, hrep);
        poly.vertices()?;
        Ok(poly)
    }

    /// Standard simplex in R^n.
    pub fn simplex(n: usize) -> Self {
        let halfspaces = (0..n)
            .map(|i| {
                let mut a = vec![0.0; n];
                a[i] = -1.0;
                Halfspace::new(a, 0.0)
            })
            .collect();
        let eq = vec![Halfspace::new(vec![1.0; n], 1.0)];
        Self::from_hrep_bounded(n, halfspaces, eq).expect("simplex is well formed")
    }

    /// Axis-aligned box `[lo, hi]`.
    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Self> {
        ensure_dim(lo.len(), hi.len())?;
        let n = lo.len();
        let mut hs = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut a = vec![0.0; n];
            a[i] = 1.0;
            hs.push(Halfspace::new(a.clone(), hi[i]));
            a[i] = -1.0;
            hs.push(Halfspace::new(a, -lo[i]));
        }
        Self::from_hrep(n, hs, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hrep(&self) -> Result<&HRep> {
        self.hrep
            .get_or_init(|| match self.vrep.get() {
                Some(Ok(v)) => hull(self.dim, v),
                Some(Err(e)) => Err(e.clone()),
                None => Err(Error::Empty("polytope representation")),
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Vertex list; enumerated from the H-representation when not supplied.
    pub fn vertices(&self) -> Result<&[Vec<f64>]> {
        self.vrep
            .get_or_init(|| {
                let h = self.hrep()?;
                super::vertices::enumerate_reduced(h.reduced()?)
            })
            .as_ref()
            .map(|v| v.as_slice())
            .map_err(Clone::clone)
    }

    pub fn has_vertices(&self) -> bool {
        matches!(self.vrep.get(), Some(Ok(_)))
    }

    pub fn is_empty(&self) -> Result<bool> {
        if self.has_vertices() {
            return Ok(false);
        }
        Ok(self.hrep()?.is_empty())
    }

    /// Dimension of the affine hull.
    pub fn affine_dim(&self) -> Result<usize> {
        if let Some(Ok(v)) = self.vrep.get() {
            return Ok(affine_hull(v, 1e-9).1.len());
        }
        Ok(self.hrep()?.reduced()?.k())
    }

    /// `max_{x in P} <u, x>`.
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        ensure_dim(self.dim, u.len())?;
        if let Some(Ok(v)) = self.vrep.get() {
            return Ok(v.iter().map(|x| dot(u, x)).fold(f64::NEG_INFINITY, f64::max));
        }
        let r = self.hrep()?.reduced()?;
        if r.k() <= MAX_ENUM_DIM {
            let v = self.vertices()?;
            return Ok(v.iter().map(|x| dot(u, x)).fold(f64::NEG_INFINITY, f64::max));
        }
        let mut lp = LinearProgram::free(r.k());
        lp.objective = r.basis.iter().map(|q| -dot(q, u)).collect();
        for (row, b) in r.rows.iter().zip(&r.rhs) {
            lp.le(row.clone(), *b);
        }
        match lp.solve()? {
            LpOutcome::Optimal { value, .. } => Ok(dot(u, &r.origin) - value),
            LpOutcome::Infeasible => Err(Error::EmptyPolytope),
            LpOutcome::Unbounded => Err(Error::Unbounded),
        }
    }

    /// Largest constraint violation of `x` (negative inside the relative interior).
    pub fn max_violation(&self, x: &[f64]) -> Result<f64> {
        let h = self.hrep()?;
        let scaled = |hs: &Halfspace, v: f64| {
            let n = norm(&hs.normal);
            if n <= ZERO_ROW {
                -hs.offset
            } else {
                v / n
            }
        };
        let ineq = h.halfspaces.iter().map(|hs| scaled(hs, hs.violation(x)));
        let eq = h.equalities.iter().map(|hs| scaled(hs, hs.violation(x).abs()).abs());
        Ok(ineq.chain(eq).fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.max_violation(x)? <= tol)
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        super::project_onto_polytope(x, self)
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        let p = self.project(x)?;
        Ok(crate::linalg::dist(x, &p))
    }
}

// rows with a normal this short are treated as `0 <= offset`
const ZERO_ROW: f64 = 1e-12;

/// Eliminate equalities, normalise rows, locate a centre and classify the shape.
fn analyse(dim: usize, halfspaces: &[Halfspace], equalities: &[Halfspace], check_bounded: bool) -> Result<Shape> {
    // orthonormalise equalities while carrying their right-hand sides
    let mut q: Vec<(Vec<f64>, f64)> = Vec::new();
    for e in equalities {
        let n0 = norm(&e.normal);
        let mut v = e.normal.clone();
        let mut g = e.offset;
        for _ in 0..2 {
            for (qi, fi) in &q {
                let c = dot(&v, qi);
                crate::linalg::axpy(&mut v, -c, qi);
                g -= c * fi;
            }
        }
        let nv = norm(&v);
        if nv > 1e-10 * n0.max(1e-300) && nv > 1e-13 {
            q.push((crate::linalg::scale(&v, 1.0 / nv), g / nv));
        } else if g.abs() > 1e-9 * (1.0 + e.offset.abs()) {
            return Ok(Shape::Empty);
        }
    }
    let mut origin = vec![0.0; dim];
    for (qi, fi) in &q {
        crate::linalg::axpy(&mut origin, *fi, qi);
    }
    let qrows: Vec<Vec<f64>> = q.iter().map(|(v, _)| v.clone()).collect();
    let basis = complement(&qrows, dim);
    let k = basis.len();

    let mut rows = Vec::with_capacity(halfspaces.len());
    let mut rhs = Vec::with_capacity(halfspaces.len());
    for h in halfspaces {
        let row: Vec<f64> = basis.iter().map(|b| dot(&h.normal, b)).collect();
        let r = h.offset - dot(&h.normal, &origin);
        let nr = norm(&row);
        let na = norm(&h.normal).max(1e-300);
        if nr <= 1e-11 * na || nr <= ZERO_ROW {
            if r < -1e-9 * na {
                return Ok(Shape::Empty);
            }
            continue;
        }
        rows.push(crate::linalg::scale(&row, 1.0 / nr));
        rhs.push(r / nr);
    }

    if k == 0 {
        return Ok(Shape::Bounded(Reduced {
            origin,
            basis,
            rows: Vec::new(),
            rhs: Vec::new(),
            anchor: Vec::new(),
        }));
    }

    // centre: max s subject to rows z + s <= rhs, s <= 1
    let mut lp = LinearProgram::free(k + 1);
    lp.objective[k] = -1.0;
    for (row, b) in rows.iter().zip(&rhs) {
        let mut a = row.clone();
        a.push(1.0);
        lp.le(a, *b);
    }
    let mut cap = vec![0.0; k + 1];
    cap[k] = 1.0;
    lp.le(cap, 1.0);
    let anchor = match lp.solve()? {
        LpOutcome::Optimal { x, .. } => {
            if x[k] < -1e-9 {
                return Ok(Shape::Empty);
            }
            x[..k].to_vec()
        }
        LpOutcome::Unbounded => return Ok(Shape::Unbounded),
        LpOutcome::Infeasible => return Ok(Shape::Empty),
    };

    if check_bounded {
        for i in 0..k {
            for sign in [1.0, -1.0] {
                let mut lp = LinearProgram::free(k);
                lp.objective[i] = -sign;
                for row in &rows {
                    lp.le(row.clone(), 0.0);
                }
                for j in 0..k {
                    let mut a = vec![0.0; k];
                    a[j] = 1.0;
                    lp.le(a.clone(), 1.0);
                    a[j] = -1.0;
                    lp.le(a, 1.0);
                }
                if let LpOutcome::Optimal { value, .. } = lp.solve()? {
                    if -value > 1e-9 {
                        return Ok(Shape::Unbounded);
                    }
                }
            }
        }
    }

    Ok(Shape::Bounded(Reduced {
        origin,
        basis,
        rows,
        rhs,
        anchor,
    }))
}

/// Facet description of the convex hull of `points`.
fn hull(dim: usize, points: &[Vec<f64>]) -> Result<HRep> {
    let (origin, basis) = affine_hull(points, 1e-9);
    let k = basis.len();
    let comp = complement(&basis, dim);
    let equalities: Vec<Halfspace> = comp
        .into_iter()
        .map(|c| {
            let off = dot(&c, &origin);
            Halfspace::new(c, off)
        })
        .collect();
    let local: Vec<Vec<f64>> = points.iter().map(|p| to_local(p, &origin, &basis)).collect();
    let mut facets: Vec<(Vec<f64>, f64)> = Vec::new();
    match k {
        0 => {}
        1 => {
            let lo = local.iter().map(|u| u[0]).fold(f64::INFINITY, f64::min);
            let hi = local.iter().map(|u| u[0]).fold(f64::NEG_INFINITY, f64::max);
            facets.push((vec![1.0], hi));
            facets.push((vec![-1.0], -lo));
        }
        _ => {
            if k > MAX_ENUM_DIM {
                return Err(Error::DimensionGuard {
                    what: "convex hull",
                    dim: k,
                    max: MAX_ENUM_DIM,
                });
            }
            let count = binomial(local.len(), k);
            if count > ENUM_GUARD {
                return Err(Error::EnumerationGuard {
                    count,
                    max: ENUM_GUARD,
                });
            }
            let scale = local.iter().map(|u| norm(u)).fold(1.0, f64::max);
            for_each_combination(local.len(), k, |idx| {
                let base = &local[idx[0]];
                let diffs: Vec<Vec<f64>> = idx[1..].iter().map(|&i| crate::linalg::sub(&local[i], base)).collect();
                let (ortho, _) = crate::linalg::orthonormalize(&diffs, 1e-9);
                if ortho.len() != k - 1 {
                    return true;
                }
                let w = complement(&ortho, k);
                if w.len() != 1 {
                    return true;
                }
                let w = &w[0];
                let c = dot(w, base);
                let tol = 1e-9 * scale;
                let above = local.iter().any(|u| dot(w, u) - c > tol);
                let below = local.iter().any(|u| dot(w, u) - c < -tol);
                let cand = match (above, below) {
                    (false, _) => Some((w.clone(), c)),
                    (true, false) => Some((crate::linalg::scale(w, -1.0), -c)),
                    _ => None,
                };
                if let Some((n, c)) = cand {
                    let dup = facets
                        .iter()
                        .any(|(m, d)| crate::linalg::dist(m, &n) < 1e-9 && (d - c).abs() < 1e-9 * scale);
                    if !dup {
                        facets.push((n, c));
                    }
                }
                true
            });
        }
    }
    let halfspaces: Vec<Halfspace> = facets
        .into_iter()
        .map(|(w, c)| {
            let normal = from_local(&w, &vec![0.0; dim], &basis);
            let offset = c + dot(&normal, &origin);
            Halfspace::new(normal, offset)
        })
        .collect();
    let shape = analyse(dim, &halfspaces, &equalities, false)?;
    Ok(HRep {
        halfspaces,
        equalities,
        shape,
    })
}
