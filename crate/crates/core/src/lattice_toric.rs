//! Rank-two lattice geometry: lattice polygons, their dual fans, and the
//! numerical invariants of the associated toric surface and ample class.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// A vector of `Z^2`, used both for `N` and for `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct LatticeVec {
    pub x: i64,
    pub y: i64,
}

impl From<[i64; 2]> for LatticeVec {
    fn from([x, y]: [i64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<LatticeVec> for [i64; 2] {
    fn from(v: LatticeVec) -> Self {
        [v.x, v.y]
    }
}

impl LatticeVec {
    pub const ZERO: LatticeVec = LatticeVec { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn is_zero(self) -> bool {
        self.x == 0 && self.y == 0
    }

    pub fn cross(self, o: LatticeVec) -> i64 {
        self.x * o.y - self.y * o.x
    }

    /// Pairing `N x M -> Z`.
    pub fn dot(self, o: LatticeVec) -> i64 {
        self.x * o.x + self.y * o.y
    }

    pub fn scale(self, k: i64) -> Self {
        Self::new(self.x * k, self.y * k)
    }

    pub fn is_primitive(self) -> bool {
        integral_length(self) == 1
    }

    /// The primitive vector in the direction of `self`, with its integral length.
    pub fn primitive(self) -> (LatticeVec, u64) {
        let l = integral_length(self);
        if l == 0 {
            return (self, 0);
        }
        (Self::new(self.x / l as i64, self.y / l as i64), l)
    }

    /// Representative of `{v, -v}` whose first nonzero coordinate is positive.
    pub fn sign_normalized(self) -> Self {
        if self.x < 0 || (self.x == 0 && self.y < 0) {
            -self
        } else {
            self
        }
    }

    /// Angular order starting at the positive x-axis, counterclockwise.
    pub fn angle_cmp(self, o: LatticeVec) -> Ordering {
        let half = |v: LatticeVec| if v.y > 0 || (v.y == 0 && v.x > 0) { 0 } else { 1 };
        half(self).cmp(&half(o)).then_with(|| 0.cmp(&self.cross(o)))
    }
}

impl std::ops::Add for LatticeVec {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for LatticeVec {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Neg for LatticeVec {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl fmt::Display for LatticeVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// `gcd(|x|, |y|)`; zero exactly for the zero vector.
pub fn integral_length(v: LatticeVec) -> u64 {
    v.x.gcd(&v.y).unsigned_abs()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("a polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is degenerate (zero area)")]
    Degenerate,
    #[error("repeated vertex {0}")]
    RepeatedVertex(LatticeVec),
    #[error("vertices are not in strictly convex position at {0}")]
    NotStrictlyConvex(LatticeVec),
    #[error("fan ray {0} is not primitive")]
    NonPrimitiveRay(LatticeVec),
    #[error("fan ray {0} appears twice")]
    RepeatedRay(LatticeVec),
    #[error("fan rays are not in counterclockwise order")]
    RaysNotOrdered,
    #[error("fan does not match the dual fan of the polygon")]
    FanPolygonMismatch,
    #[error("k must be positive")]
    NonPositiveK,
}

/// A strictly convex lattice polygon, stored counterclockwise starting at its
/// lexicographically smallest vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LatticePolygon {
    vertices: Vec<LatticeVec>,
}

impl LatticePolygon {
    /// Accepts the vertices in either cyclic orientation; rejects repeated
    /// vertices, collinear triples and zero area.
    pub fn new(mut vertices: Vec<LatticeVec>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::TooFewVertices(n));
        }
        for i in 0..n {
            if vertices[i + 1..].contains(&vertices[i]) {
                return Err(GeometryError::RepeatedVertex(vertices[i]));
            }
        }
        if shoelace2(&vertices) == 0 {
            return Err(GeometryError::Degenerate);
        }
        if shoelace2(&vertices) < 0 {
            vertices.reverse();
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if (b - a).cross(c - b) <= 0 {
                return Err(GeometryError::NotStrictlyConvex(b));
            }
        }
        // A simple closed polygon with all left turns winds once; a
        // self-overlapping star would wind more than once.
        let turns: i64 = (0..n)
            .map(|i| {
                let e = vertices[(i + 1) % n] - vertices[i];
                let f = vertices[(i + 2) % n] - vertices[(i + 1) % n];
                i64::from(e.angle_cmp(f) == Ordering::Greater)
            })
            .sum();
        if turns != 1 {
            return Err(GeometryError::NotStrictlyConvex(vertices[0]));
        }
        let start = (0..n).min_by_key(|&i| vertices[i]).unwrap();
        vertices.rotate_left(start);
        Ok(Self { vertices })
    }

    /// Convex hull of a point set (vertices only, collinear points dropped).
    pub fn hull(points: &[LatticeVec]) -> Result<Self, GeometryError> {
        let mut pts = points.to_vec();
        pts.sort();
        pts.dedup();
        if pts.len() < 3 {
            return Err(GeometryError::TooFewVertices(pts.len()));
        }
        let mut lower: Vec<LatticeVec> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && (lower[lower.len() - 1] - lower[lower.len() - 2]).cross(p - lower[lower.len() - 1]) <= 0 {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<LatticeVec> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && (upper[upper.len() - 1] - upper[upper.len() - 2]).cross(p - upper[upper.len() - 1]) <= 0 {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Self::new(lower)
    }

    pub fn vertices(&self) -> &[LatticeVec] {
        &self.vertices
    }

    /// Edge vectors `v_{i+1} - v_i`, counterclockwise.
    pub fn edges(&self) -> impl Iterator<Item = LatticeVec> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| self.vertices[(i + 1) % n] - self.vertices[i])
    }

    pub fn dilate(&self, d: i64) -> Self {
        assert!(d > 0, "dilation factor must be positive");
        Self { vertices: self.vertices.iter().map(|v| v.scale(d)).collect() }
    }

    pub fn to_json(&self) -> Value {
        json!({"vertices": self.vertices.iter().map(|v| [v.x, v.y]).collect::<Vec<_>>()})
    }
}

fn shoelace2(vs: &[LatticeVec]) -> i64 {
    let n = vs.len();
    (0..n).map(|i| vs[i].cross(vs[(i + 1) % n])).sum()
}

/// A fan in `N_R = R^2` given by its rays.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fan2D {
    rays: Vec<LatticeVec>,
    complete: bool,
}

impl Fan2D {
    /// Rays must be primitive, distinct, and listed counterclockwise (any
    /// starting ray). Completeness is derived.
    pub fn new(rays: Vec<LatticeVec>) -> Result<Self, GeometryError> {
        for (i, &r) in rays.iter().enumerate() {
            if !r.is_primitive() {
                return Err(GeometryError::NonPrimitiveRay(r));
            }
            if rays[i + 1..].contains(&r) {
                return Err(GeometryError::RepeatedRay(r));
            }
        }
        let mut sorted = rays.clone();
        sorted.sort_by(|a, b| a.angle_cmp(*b));
        let n = rays.len();
        if n > 0 {
            let offset = sorted.iter().position(|&r| r == rays[0]).unwrap();
            sorted.rotate_left(offset);
            if sorted != rays {
                return Err(GeometryError::RaysNotOrdered);
            }
        }
        let complete = n >= 3 && (0..n).all(|i| rays[i].cross(rays[(i + 1) % n]) > 0);
        Ok(Self { rays, complete })
    }

    pub fn rays(&self) -> &[LatticeVec] {
        &self.rays
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Same rays regardless of the starting ray.
    pub fn same_rays(&self, other: &Fan2D) -> bool {
        let mut a = self.rays.clone();
        let mut b = other.rays.clone();
        a.sort();
        b.sort();
        a == b
    }
}

/// A toric surface `X_Sigma` together with an optional ample polygon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ToricSurfaceData {
    pub fan: Fan2D,
    pub polygon: Option<LatticePolygon>,
}

impl ToricSurfaceData {
    pub fn new(fan: Fan2D, polygon: Option<LatticePolygon>) -> Result<Self, GeometryError> {
        if let Some(p) = &polygon {
            if !dual_fan(p).same_rays(&fan) {
                return Err(GeometryError::FanPolygonMismatch);
            }
        }
        Ok(Self { fan, polygon })
    }
}

/// Inward primitive normals of the edges, in edge order.
pub fn dual_fan(p: &LatticePolygon) -> Fan2D {
    let rays = p.edges().map(|e| LatticeVec::new(-e.y, e.x).primitive().0).collect();
    Fan2D::new(rays).expect("normals of a convex polygon form a complete fan")
}

/// Twice the area; the self-intersection of the polygon's class.
pub fn area2(p: &LatticePolygon) -> u64 {
    shoelace2(p.vertices()) as u64
}

/// Lattice points on the boundary; equals `-K_S.C` for the polygon's class.
pub fn boundary_length(p: &LatticePolygon) -> u64 {
    p.edges().map(integral_length).sum()
}

/// Lattice points strictly inside the polygon, counted row by row.
pub fn interior_points(p: &LatticePolygon) -> u64 {
    let vs = p.vertices();
    let ymin = vs.iter().map(|v| v.y).min().unwrap();
    let ymax = vs.iter().map(|v| v.y).max().unwrap();
    let n = vs.len();
    let mut count: u64 = 0;
    for y in ymin + 1..ymax {
        // Crossing abscissae of the horizontal line with the boundary, as
        // exact fractions num/den with den > 0.
        let mut lo: Option<(i64, i64)> = None;
        let mut hi: Option<(i64, i64)> = None;
        for i in 0..n {
            let a = vs[i];
            let b = vs[(i + 1) % n];
            if (a.y < y && b.y < y) || (a.y > y && b.y > y) || a.y == b.y {
                continue;
            }
            let mut num = a.x * (b.y - a.y) + (y - a.y) * (b.x - a.x);
            let mut den = b.y - a.y;
            if den < 0 {
                num = -num;
                den = -den;
            }
            let lt = |u: (i64, i64), v: (i64, i64)| (u.0 as i128) * (v.1 as i128) < (v.0 as i128) * (u.1 as i128);
            if lo.is_none_or(|l| lt((num, den), l)) {
                lo = Some((num, den));
            }
            if hi.is_none_or(|h| lt(h, (num, den))) {
                hi = Some((num, den));
            }
        }
        let (Some(lo), Some(hi)) = (lo, hi) else { continue };
        // integers x with lo < x < hi
        let first = Integer::div_floor(&lo.0, &lo.1) + 1;
        let last = -Integer::div_floor(&(-hi.0), &hi.1) - 1;
        if last >= first {
            count += (last - first + 1) as u64;
        }
    }
    debug_assert_eq!(2 * count as i64 + boundary_length(p) as i64 - 2, area2(p) as i64, "Pick");
    count
}

/// `(ray, integral length of the dual edge)` in fan order.
pub fn edge_degrees(p: &LatticePolygon) -> Vec<(LatticeVec, u64)> {
    p.edges().map(|e| (LatticeVec::new(-e.y, e.x).primitive().0, integral_length(e))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceVariant {
    /// `Delta_k`, vertices `(1,0), (-1,k), (0,0)`.
    Triangle,
    /// `Delta'_k`, vertices `(0,0), (1,0), (0,k), (-1,k)`.
    Parallelogram,
}

/// The triangle and parallelogram families with their dual fans.
pub fn standard_surfaces(k: i64, variant: SurfaceVariant) -> Result<ToricSurfaceData, GeometryError> {
    if k < 1 {
        return Err(GeometryError::NonPositiveK);
    }
    let (vertices, rays) = match variant {
        SurfaceVariant::Triangle => (
            vec![LatticeVec::new(1, 0), LatticeVec::new(-1, k), LatticeVec::new(0, 0)],
            vec![LatticeVec::new(0, 1), LatticeVec::new(k, 1), LatticeVec::new(-k, -2)],
        ),
        SurfaceVariant::Parallelogram => (
            vec![LatticeVec::new(0, 0), LatticeVec::new(1, 0), LatticeVec::new(0, k), LatticeVec::new(-1, k)],
            vec![LatticeVec::new(0, 1), LatticeVec::new(k, 1), LatticeVec::new(0, -1), LatticeVec::new(-k, -1)],
        ),
    };
    let polygon = LatticePolygon::new(vertices)?;
    let fan = dual_fan(&polygon);
    let mut expected: Vec<LatticeVec> = rays.into_iter().map(|r| r.primitive().0).collect();
    let mut got = fan.rays().to_vec();
    expected.sort();
    got.sort();
    debug_assert_eq!(expected, got);
    ToricSurfaceData::new(fan, Some(polygon))
}

/// Upper bound on the dimension of a family of reduced curves: with the full
/// toric boundary (`K_S + E = 0`) it is `|beta| + g - 1`, otherwise
/// `-K_S.C + g - 1`.
pub fn zariski_bound(minus_kc: i64, beta_total: u64, genus: u64, toric_boundary: bool) -> i64 {
    if toric_boundary {
        beta_total as i64 + genus as i64 - 1
    } else {
        minus_kc + genus as i64 - 1
    }
}

/// The `polytope --report` payload.
pub fn polygon_report(p: &LatticePolygon) -> Value {
    let fan = dual_fan(p);
    json!({
        "vertices": p.vertices().iter().map(|v| [v.x, v.y]).collect::<Vec<_>>(),
        "area2": area2(p),
        "boundary": boundary_length(p),
        "interior": interior_points(p),
        "rays": fan.rays().iter().map(|v| [v.x, v.y]).collect::<Vec<_>>(),
        "degrees": edge_degrees(p).iter().map(|(r, d)| json!({"ray": [r.x, r.y], "degree": d})).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(x: i64, y: i64) -> LatticeVec {
        LatticeVec::new(x, y)
    }

    fn poly(vs: &[(i64, i64)]) -> LatticePolygon {
        LatticePolygon::new(vs.iter().map(|&(x, y)| lv(x, y)).collect()).unwrap()
    }

    fn sorted(mut v: Vec<LatticeVec>) -> Vec<LatticeVec> {
        v.sort();
        v
    }

    #[test]
    fn integral_lengths() {
        assert_eq!(integral_length(lv(0, 0)), 0);
        assert_eq!(integral_length(lv(3, 1)), 1);
        assert_eq!(integral_length(lv(4, 6)), 2);
        assert_eq!(integral_length(lv(-4, 0)), 4);
    }

    #[test]
    fn dual_fans() {
        let d3 = poly(&[(1, 0), (-1, 3), (0, 0)]);
        assert_eq!(sorted(dual_fan(&d3).rays().to_vec()), sorted(vec![lv(0, 1), lv(3, 1), lv(-3, -2)]));
        let square = poly(&[(0, 0), (1, 0), (1, 1), (0, 1)]);
        assert_eq!(sorted(dual_fan(&square).rays().to_vec()), sorted(vec![lv(1, 0), lv(0, 1), lv(-1, 0), lv(0, -1)]));
        let p2 = standard_surfaces(2, SurfaceVariant::Parallelogram).unwrap();
        assert_eq!(sorted(p2.fan.rays().to_vec()), sorted(vec![lv(0, 1), lv(2, 1), lv(0, -1), lv(-2, -1)]));
        assert!(dual_fan(&d3).is_complete());
    }

    #[test]
    fn areas_and_counts() {
        let d3 = poly(&[(1, 0), (-1, 3), (0, 0)]);
        assert_eq!(area2(&d3), 3);
        assert_eq!(area2(&poly(&[(0, 0), (1, 0), (0, 1)])), 1);
        let dp5 = standard_surfaces(5, SurfaceVariant::Parallelogram).unwrap().polygon.unwrap();
        assert_eq!(area2(&dp5), 10);
        assert_eq!(boundary_length(&poly(&[(0, 0), (2, 0), (2, 2), (0, 2)])), 8);
        assert_eq!(interior_points(&poly(&[(0, 0), (1, 0), (0, 1)])), 0);
    }

    #[test]
    fn standard_triangle_family() {
        for q in [3, 5, 9] {
            let s = standard_surfaces(q, SurfaceVariant::Triangle).unwrap();
            let p = s.polygon.unwrap();
            assert_eq!(boundary_length(&p), 3);
            assert_eq!(interior_points(&p), ((q - 1) / 2) as u64);
            assert_eq!(area2(&p), q as u64);
            assert!(edge_degrees(&p).iter().all(|&(_, d)| d == 1));
        }
        let s3 = standard_surfaces(3, SurfaceVariant::Triangle).unwrap();
        assert_eq!(
            sorted(s3.polygon.unwrap().vertices().to_vec()),
            sorted(vec![lv(1, 0), lv(-1, 3), lv(0, 0)])
        );
        let s1 = standard_surfaces(1, SurfaceVariant::Triangle).unwrap();
        assert_eq!(area2(s1.polygon.as_ref().unwrap()), 1);
        // even k: the long side has integral length 2
        let s2 = standard_surfaces(2, SurfaceVariant::Triangle).unwrap();
        let degs = edge_degrees(s2.polygon.as_ref().unwrap());
        assert!(degs.contains(&(lv(-1, -1), 2)));
    }

    #[test]
    fn standard_parallelogram_family() {
        for q in [2, 3, 4] {
            let p = standard_surfaces(q, SurfaceVariant::Parallelogram).unwrap().polygon.unwrap();
            assert_eq!(boundary_length(&p), 4);
            assert_eq!(interior_points(&p), (q - 1) as u64);
            assert!(edge_degrees(&p).iter().all(|&(_, d)| d == 1));
        }
        let p2 = standard_surfaces(2, SurfaceVariant::Parallelogram).unwrap().polygon.unwrap();
        assert_eq!(sorted(p2.vertices().to_vec()), sorted(vec![lv(0, 0), lv(1, 0), lv(0, 2), lv(-1, 2)]));
    }

    #[test]
    fn edge_degrees_of_dilations() {
        let d3 = poly(&[(1, 0), (-1, 3), (0, 0)]);
        assert!(edge_degrees(&d3).iter().all(|&(_, d)| d == 1));
        let d = 4;
        assert!(edge_degrees(&d3.dilate(d)).iter().all(|&(_, deg)| deg == d as u64));
    }

    #[test]
    fn rejects_degenerate_and_nonconvex() {
        assert_eq!(LatticePolygon::new(vec![lv(0, 0), lv(1, 1)]), Err(GeometryError::TooFewVertices(2)));
        assert_eq!(LatticePolygon::new(vec![lv(0, 0), lv(1, 1), lv(2, 2)]), Err(GeometryError::Degenerate));
        assert!(matches!(
            LatticePolygon::new(vec![lv(0, 0), lv(1, 0), lv(2, 0), lv(0, 1)]),
            Err(GeometryError::NotStrictlyConvex(_))
        ));
        assert!(matches!(
            LatticePolygon::new(vec![lv(0, 0), lv(2, 0), lv(1, 1), lv(2, 2), lv(0, 2)]),
            Err(GeometryError::NotStrictlyConvex(_))
        ));
        assert!(standard_surfaces(0, SurfaceVariant::Triangle).is_err());
    }

    #[test]
    fn normalizes_orientation_and_start() {
        let cw = poly(&[(0, 0), (0, 1), (1, 0)]);
        assert_eq!(cw.vertices(), &[lv(0, 0), lv(1, 0), lv(0, 1)]);
        let rotated = poly(&[(1, 0), (0, 1), (0, 0)]);
        assert_eq!(cw, rotated);
    }

    #[test]
    fn fan_validation() {
        assert!(matches!(Fan2D::new(vec![lv(2, 0), lv(0, 1)]), Err(GeometryError::NonPrimitiveRay(_))));
        assert!(matches!(Fan2D::new(vec![lv(0, 1), lv(1, 0), lv(-1, -1)]), Err(GeometryError::RaysNotOrdered)));
        let partial = Fan2D::new(vec![lv(1, 0), lv(0, 1)]).unwrap();
        assert!(!partial.is_complete());
        let square = poly(&[(0, 0), (1, 0), (1, 1), (0, 1)]);
        assert!(ToricSurfaceData::new(partial, Some(square)).is_err());
    }

    #[test]
    fn bound_calculator() {
        assert_eq!(zariski_bound(0, 3, 0, true), 2);
        for d in 1..5 {
            for g in 0..4 {
                assert_eq!(zariski_bound(3 * d, 0, g, false), 3 * d + g as i64 - 1);
            }
        }
        assert_eq!(zariski_bound(0, 0, 0, true), -1);
    }

    #[test]
    fn hull_of_points() {
        let h = LatticePolygon::hull(&[lv(0, 0), lv(2, 0), lv(1, 0), lv(1, 1), lv(2, 2), lv(0, 2)]).unwrap();
        assert_eq!(h.vertices(), &[lv(0, 0), lv(2, 0), lv(2, 2), lv(0, 2)]);
    }
}
