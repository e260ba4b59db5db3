//! Incremental Bowyer-Watson triangulation.
//!
//! The unbounded exterior is represented by "ghost" triangles that share a
//! single vertex at infinity with each convex hull edge, so no finite super
//! triangle is needed and the hull always comes out complete.

use std::collections::HashMap;

use crate::geo::planar::{orient2d, Point2};
use crate::netgen::NetGenError;
use crate::scalar::Scalar;

const GHOST: usize = usize::MAX;
/// Relative tolerance under which four points count as cocircular.
const COCIRCULAR_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Triangulation<T> {
    pub vertices: Vec<Point2<T>>,
    /// Counter-clockwise vertex index triples.
    pub triangles: Vec<[usize; 3]>,
    /// Undirected edges `(a, b)` with `a < b`, sorted.
    pub edges: Vec<(usize, usize)>,
}

/// Incircle determinant of `d` against the counter-clockwise triangle
/// `(a, b, c)` (positive inside), together with the magnitude of its terms.
pub(crate) fn incircle<T: Scalar>(a: Point2<T>, b: Point2<T>, c: Point2<T>, d: Point2<T>) -> (T, T) {
    let (ad, bd, cd) = (a - d, b - d, c - d);
    let (al, bl, cl) = (ad.dot(ad), bd.dot(bd), cd.dot(cd));
    let t1 = al * bd.cross(cd);
    let t2 = bl * cd.cross(ad);
    let t3 = cl * ad.cross(bd);
    let perm = al * (bd.x * cd.y).abs().max((cd.x * bd.y).abs())
        + bl * (cd.x * ad.y).abs().max((ad.x * cd.y).abs())
        + cl * (ad.x * bd.y).abs().max((bd.x * ad.y).abs());
    (t1 + t2 + t3, perm)
}

struct Builder<'a, T> {
    pts: &'a [Point2<T>],
    tris: Vec<[usize; 3]>,
}

impl<T: Scalar> Builder<'_, T> {
    fn in_conflict(&self, t: &[usize; 3], p: usize) -> bool {
        let q = self.pts[p];
        if t[2] == GHOST {
            // Hull edge t[0] -> t[1] with the exterior on its left.
            let (a, b) = (self.pts[t[0]], self.pts[t[1]]);
            let o = orient2d(a, b, q);
            if o > T::zero() {
                return true;
            }
            return o == T::zero() && (q - a).dot(q - b) < T::zero();
        }
        let (det, _) = incircle(self.pts[t[0]], self.pts[t[1]], self.pts[t[2]], q);
        det > T::zero()
    }

    fn insert(&mut self, p: usize) {
        let (bad, keep): (Vec<[usize; 3]>, Vec<[usize; 3]>) = self.tris.iter().partition(|t| self.in_conflict(t, p));
        let mut directed: HashMap<(usize, usize), ()> = HashMap::with_capacity(bad.len() * 3);
        for t in &bad {
            for k in 0..3 {
                directed.insert((t[k], t[(k + 1) % 3]), ());
            }
        }
        let mut next = keep;
        for t in &bad {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if directed.contains_key(&(b, a)) {
                    continue;
                }
                next.push(match (a == GHOST, b == GHOST) {
                    (false, false) => [a, b, p],
                    (false, true) => [p, a, GHOST],
                    (true, false) => [b, p, GHOST],
                    (true, true) => unreachable!("ghost triangles have one ghost vertex"),
                });
            }
        }
        self.tris = next;
    }
}

fn check_input<T: Scalar>(points: &[Point2<T>]) -> Result<(usize, usize, usize), NetGenError> {
    if points.len() < 3 {
        return Err(NetGenError::DegenerateInput("fewer than three points".into()));
    }
    let mut sorted: Vec<(T, T)> = points.iter().map(|p| (p.x, p.y)).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(NetGenError::DegenerateInput("duplicate points".into()));
    }
    let (i0, i1) = (0, 1);
    let third = (2..points.len()).find(|&k| orient2d(points[i0], points[i1], points[k]) != T::zero());
    match third {
        Some(k) => Ok((i0, i1, k)),
        None => Err(NetGenError::DegenerateInput("all points are collinear".into())),
    }
}

/// Delaunay triangulation of `points`.
///
/// Cocircular configurations are resolved towards the diagonal incident to
/// the lowest vertex index.
pub fn delaunay<T: Scalar>(points: &[Point2<T>]) -> Result<Triangulation<T>, NetGenError> {
    if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
        return Err(NetGenError::DegenerateInput("non-finite coordinate".into()));
    }
    let (a, b, c) = check_input(points)?;
    let (b, c) = if orient2d(points[a], points[b], points[c]) > T::zero() { (b, c) } else { (c, b) };
    let mut builder = Builder { pts: points, tris: vec![[a, b, c], [b, a, GHOST], [c, b, GHOST], [a, c, GHOST]] };
    for p in 0..points.len() {
        if p != a && p != b && p != c {
            builder.insert(p);
        }
    }
    let mut triangles: Vec<[usize; 3]> = builder.tris.into_iter().filter(|t| t[2] != GHOST).collect();
    legalize(points, &mut triangles);
    for t in &mut triangles {
        // Canonical rotation: smallest index first.
        let k = (0..3).min_by_key(|&k| t[k]).expect("three vertices");
        t.rotate_left(k);
    }
    triangles.sort_unstable();
    let mut edges: Vec<(usize, usize)> = triangles
        .iter()
        .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    Ok(Triangulation { vertices: points.to_vec(), triangles, edges })
}

/// Lawson flips: repairs any edge left non-Delaunay by rounding and applies
/// the cocircular tie-break.
fn legalize<T: Scalar>(pts: &[Point2<T>], tris: &mut [[usize; 3]]) {
    let tol = T::lit(COCIRCULAR_TOL);
    let max_rounds = 4 * tris.len() + 16;
    for _ in 0..max_rounds {
        let mut owner: HashMap<(usize, usize), (usize, usize)> = HashMap::with_capacity(tris.len() * 3);
        for (ti, t) in tris.iter().enumerate() {
            for k in 0..3 {
                owner.insert((t[k], t[(k + 1) % 3]), (ti, (k + 2) % 3));
            }
        }
        let mut flipped = false;
        let mut touched = vec![false; tris.len()];
        for ti in 0..tris.len() {
            for k in 0..3 {
                if touched[ti] {
                    break;
                }
                let t = tris[ti];
                let (u, v, w) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
                let Some(&(tj, opp)) = owner.get(&(v, u)) else { continue };
                if touched[tj] {
                    continue;
                }
                let x = tris[tj][opp];
                let (det, perm) = incircle(pts[u], pts[v], pts[w], pts[x]);
                let cocircular = det.abs() <= tol * perm;
                let flip = if cocircular { w.min(x) < u.min(v) } else { det > T::zero() };
                // The new diagonal must lie inside the quadrilateral.
                let convex =
                    orient2d(pts[w], pts[x], pts[v]) > T::zero() && orient2d(pts[x], pts[w], pts[u]) > T::zero();
                if flip && convex {
                    tris[ti] = [w, u, x];
                    tris[tj] = [x, v, w];
                    touched[ti] = true;
                    touched[tj] = true;
                    flipped = true;
                }
            }
        }
        if !flipped {
            return;
        }
    }
}
