//! Deformation spaces of parameterized tropical curves, marked-point
//! constraints, and the combinatorial certificate behind the dimension bound
//! for curves through torus points.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::arith::{q, rational_json, RatVec, Q};
use crate::lattice_toric::LatticeVec;
use crate::linalg::{ConsistencyTest, Matrix};
use crate::tropical_curve::{
    edge_data, genus, is_stable, validate, CurveError, Edge, EdgeLength, ParamTropCurve, TropicalGraph,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeformError {
    #[error("curve is not valid: {0}")]
    InvalidCurve(String),
    #[error("curve is not stable")]
    Unstable,
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("edge {0} is not a bounded edge")]
    NotBounded(usize),
    #[error("orientation of edge {edge} does not match its endpoints")]
    BadOrientation { edge: usize },
    #[error("constraint refers to {0:?}, which is not a finite vertex")]
    UnknownVertex(String),
    #[error("line constraint direction {0} is not primitive")]
    NonPrimitiveDirection(LatticeVec),
    #[error("k = {k} exceeds the number of infinite vertices ({available})")]
    TooManyMarked { k: usize, available: usize },
    #[error("{0:?} is not one of the unmarked infinite vertices")]
    NotAnUnmarkedEnd(String),
    #[error("alpha and beta must partition the unmarked ends; {0:?} is missing or repeated")]
    NotAPartition(String),
    #[error("marked end {0:?} is not contracted")]
    MarkedEndNotContracted(String),
    #[error("equality classification needs k = |beta| + g - 1 = {expected}, got k = {k}")]
    WrongK { k: usize, expected: i64 },
    #[error("{0} marking edges requested but the curve has only {1} edges")]
    TooFewEdges(usize, usize),
    #[error("marking edges must be distinct")]
    RepeatedMarkingEdge,
}

/// `(tail, head)` for every bounded edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    pub edges: BTreeMap<usize, (usize, usize)>,
}

impl Orientation {
    /// Orients each bounded edge from its first to its second stored endpoint.
    pub fn standard(c: &ParamTropCurve) -> Self {
        let g = &c.graph;
        Self { edges: g.bounded_edges().map(|e| (e, (g.edge(e).a, g.edge(e).b))).collect() }
    }

    pub fn flipped(&self, e: usize) -> Self {
        let mut out = self.clone();
        if let Some(p) = out.edges.get_mut(&e) {
            *p = (p.1, p.0);
        }
        out
    }

    /// Overrides from `{"edges": [{"edge": i, "tail": name}, ...]}`;
    /// unlisted edges keep the standard orientation.
    pub fn from_json(c: &ParamTropCurve, v: &Value) -> Result<Self, DeformError> {
        let mut o = Self::standard(c);
        let items = v.get("edges").and_then(Value::as_array).ok_or_else(|| CurveError::Json("orientation needs an \"edges\" array".into()))?;
        for item in items {
            let e = item.get("edge").and_then(Value::as_u64).ok_or_else(|| CurveError::Json("orientation entry needs \"edge\"".into()))? as usize;
            let tail = item.get("tail").and_then(Value::as_str).ok_or_else(|| CurveError::Json("orientation entry needs \"tail\"".into()))?;
            let t = c.graph.index_of(tail).ok_or_else(|| CurveError::UnknownVertex(tail.to_string()))?;
            let &(a, b) = o.edges.get(&e).ok_or(DeformError::NotBounded(e))?;
            if t == a {
                o.edges.insert(e, (a, b));
            } else if t == b {
                o.edges.insert(e, (b, a));
            } else {
                return Err(DeformError::BadOrientation { edge: e });
            }
        }
        Ok(o)
    }

    fn check(&self, c: &ParamTropCurve) -> Result<(), DeformError> {
        let g = &c.graph;
        for e in g.bounded_edges() {
            let &(t, h) = self.edges.get(&e).ok_or(DeformError::BadOrientation { edge: e })?;
            let ed = g.edge(e);
            if !((t == ed.a && h == ed.b) || (t == ed.b && h == ed.a)) {
                return Err(DeformError::BadOrientation { edge: e });
            }
        }
        Ok(())
    }
}

fn require_valid(c: &ParamTropCurve) -> Result<(), DeformError> {
    let report = validate(c);
    match report.violations.first() {
        Some(v) => Err(DeformError::InvalidCurve(v.to_string())),
        None => Ok(()),
    }
}

/// One row per bounded edge with nontrivial slope (`det(x_head - x_tail, n_e)`)
/// and two rows per bounded edge with trivial slope (`x_head - x_tail`).
/// Columns are `(x, y)` of each finite vertex in index order.
pub fn constraint_matrix(c: &ParamTropCurve, o: &Orientation) -> Result<Matrix, DeformError> {
    require_valid(c)?;
    o.check(c)?;
    let nf = c.graph.n_finite();
    let mut m = Matrix::zeros(0, 2 * nf);
    for e in c.graph.bounded_edges() {
        let (t, h) = o.edges[&e];
        let data = edge_data(c, e)?;
        let mut push = |cx: i64, cy: i64| {
            let mut row = vec![Q::zero(); 2 * nf];
            row[2 * h] += q(cx);
            row[2 * h + 1] += q(cy);
            row[2 * t] -= q(cx);
            row[2 * t + 1] -= q(cy);
            m.push_row(row);
        };
        match data.generator {
            Some(n) => push(n.y, -n.x),
            None => {
                push(1, 0);
                push(0, 1);
            }
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeformationSpace {
    /// Kernel basis; vector `i` has coordinates `(x, y)` per finite vertex.
    pub basis: Vec<Vec<Q>>,
    pub dim_e1: usize,
    /// Number of bounded edges with trivial slope.
    pub c_gamma: usize,
}

impl DeformationSpace {
    pub fn universal_dim(&self) -> usize {
        self.dim_e1 + self.c_gamma
    }

    pub fn to_json(&self, c: &ParamTropCurve) -> Value {
        let g = &c.graph;
        let basis: Vec<Value> = self
            .basis
            .iter()
            .map(|v| {
                let mut m = serde_json::Map::new();
                for f in 0..g.n_finite() {
                    m.insert(g.name(f).to_string(), RatVec::new(v[2 * f].clone(), v[2 * f + 1].clone()).to_json());
                }
                Value::Object(m)
            })
            .collect();
        json!({"dim_E1": self.dim_e1, "c": self.c_gamma, "universal_dim": self.universal_dim(), "basis": basis})
    }
}

fn count_trivial_bounded(c: &ParamTropCurve) -> Result<usize, DeformError> {
    let mut n = 0;
    for e in c.graph.bounded_edges() {
        if edge_data(c, e)?.generator.is_none() {
            n += 1;
        }
    }
    Ok(n)
}

pub fn deformation_space(c: &ParamTropCurve) -> Result<DeformationSpace, DeformError> {
    deformation_space_oriented(c, &Orientation::standard(c))
}

pub fn deformation_space_oriented(c: &ParamTropCurve, o: &Orientation) -> Result<DeformationSpace, DeformError> {
    let m = constraint_matrix(c, o)?;
    let basis = m.nullspace();
    Ok(DeformationSpace { dim_e1: basis.len(), basis, c_gamma: count_trivial_bounded(c)? })
}

/// Positions fixed at some finite vertices and lines through others.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarkedConstraints {
    pub point_constraints: BTreeMap<usize, RatVec>,
    pub line_constraints: BTreeMap<usize, (RatVec, LatticeVec)>,
}

impl MarkedConstraints {
    fn check(&self, c: &ParamTropCurve) -> Result<(), DeformError> {
        for &v in self.point_constraints.keys().chain(self.line_constraints.keys()) {
            if !c.graph.is_finite(v) {
                return Err(DeformError::UnknownVertex(format!("#{v}")));
            }
        }
        for (_, d) in self.line_constraints.values() {
            if !d.is_primitive() {
                return Err(DeformError::NonPrimitiveDirection(*d));
            }
        }
        Ok(())
    }
}

fn point_rows(nf: usize, v: usize) -> [Vec<Q>; 2] {
    let mut rx = vec![Q::zero(); 2 * nf];
    let mut ry = vec![Q::zero(); 2 * nf];
    rx[2 * v] = Q::one();
    ry[2 * v + 1] = Q::one();
    [rx, ry]
}

fn line_row(nf: usize, v: usize, d: LatticeVec) -> Vec<Q> {
    let mut r = vec![Q::zero(); 2 * nf];
    r[2 * v] = q(d.y);
    r[2 * v + 1] = q(-d.x);
    r
}

/// Dimension of the deformations keeping point-constrained vertices fixed and
/// line-constrained vertices on lines parallel to their direction, plus `c(Gamma)`.
pub fn constrained_dim(c: &ParamTropCurve, m: &MarkedConstraints) -> Result<usize, DeformError> {
    m.check(c)?;
    let mut mat = constraint_matrix(c, &Orientation::standard(c))?;
    let nf = c.graph.n_finite();
    for &v in m.point_constraints.keys() {
        for r in point_rows(nf, v) {
            mat.push_row(r);
        }
    }
    for (&v, (_, d)) in &m.line_constraints {
        mat.push_row(line_row(nf, v, *d));
    }
    Ok(2 * nf - mat.rank() + count_trivial_bounded(c)?)
}

/// Whether a curve of the same combinatorial type exists with the constrained
/// vertices exactly at their targets (points) or on their target lines. The
/// type is treated linearly: positivity of the deformed lengths is not imposed.
pub fn affine_feasible(c: &ParamTropCurve, m: &MarkedConstraints) -> Result<bool, DeformError> {
    m.check(c)?;
    let mut mat = constraint_matrix(c, &Orientation::standard(c))?;
    let nf = c.graph.n_finite();
    let mut rhs = vec![Q::zero(); mat.nrows()];
    for (&v, a) in &m.point_constraints {
        let [rx, ry] = point_rows(nf, v);
        mat.push_row(rx);
        mat.push_row(ry);
        rhs.push(a.x.clone());
        rhs.push(a.y.clone());
    }
    for (&v, (base, d)) in &m.line_constraints {
        mat.push_row(line_row(nf, v, *d));
        rhs.push(&base.x * q(d.y) - &base.y * q(d.x));
    }
    Ok(mat.solve(&rhs).is_some())
}

/// Pre-factored system for testing many point targets at a fixed list of
/// vertices.
pub struct PointConstraintSystem {
    n_edge_rows: usize,
    vertices: Vec<usize>,
    test: ConsistencyTest,
}

impl PointConstraintSystem {
    pub fn new(c: &ParamTropCurve, vertices: &[usize]) -> Result<Self, DeformError> {
        let mut mat = constraint_matrix(c, &Orientation::standard(c))?;
        let nf = c.graph.n_finite();
        let n_edge_rows = mat.nrows();
        for &v in vertices {
            if v >= nf {
                return Err(DeformError::UnknownVertex(format!("#{v}")));
            }
            for r in point_rows(nf, v) {
                mat.push_row(r);
            }
        }
        Ok(Self { n_edge_rows, vertices: vertices.to_vec(), test: ConsistencyTest::new(&mat) })
    }

    pub fn is_feasible(&self, targets: &[RatVec]) -> bool {
        assert_eq!(targets.len(), self.vertices.len());
        let mut rhs = vec![Q::zero(); self.n_edge_rows];
        for t in targets {
            rhs.push(t.x.clone());
            rhs.push(t.y.clone());
        }
        self.test.is_consistent(&rhs)
    }

    /// True iff every target is reachable (the point projection is onto).
    pub fn is_onto(&self) -> bool {
        // the homogeneous edge rows never obstruct; only relations among
        // target coordinates can
        self.test.left_kernel().iter().all(|y| y[self.n_edge_rows..].iter().all(Zero::is_zero))
    }
}

/// A pseudorandom rational with a large denominator, in `(-10, 10)`.
pub fn generic_rational<R: Rng>(rng: &mut R) -> Q {
    let den: i64 = rng.gen_range(1_000_003..2_000_003);
    let num: i64 = rng.gen_range(-10 * den + 1..10 * den);
    Q::new(num.into(), den.into())
}

pub fn generic_point<R: Rng>(rng: &mut R) -> RatVec {
    RatVec::new(generic_rational(rng), generic_rational(rng))
}

/// Subdivides each listed edge once and hangs a contracted end on the new
/// vertex; the new ends become the first infinite vertices, in list order.
/// Bounded edges are split at their midpoint, unbounded ones at distance 1.
/// Returns the curve and the indices of the new finite vertices.
pub fn with_marked_points(c: &ParamTropCurve, edges: &[usize]) -> Result<(ParamTropCurve, Vec<usize>), DeformError> {
    let n_edges = c.graph.edges().len();
    if edges.len() > n_edges {
        return Err(DeformError::TooFewEdges(edges.len(), n_edges));
    }
    if edges.iter().collect::<BTreeSet<_>>().len() != edges.len() {
        return Err(DeformError::RepeatedMarkingEdge);
    }
    let mut cur = c.clone();
    let mut new_vertices = Vec::new();
    for (i, &e) in edges.iter().enumerate() {
        if e >= n_edges {
            return Err(CurveError::NoSuchEdge(e).into());
        }
        let (next, w) = if cur.graph.is_bounded(e) {
            let half = cur.graph.edge(e).length.finite().cloned().ok_or(DeformError::NotBounded(e))? / q(2);
            cur.subdivide_bounded(e, &half)?
        } else {
            cur.subdivide_unbounded(e, &Q::one())?
        };
        // earlier new vertices keep their indices: finite vertices are appended
        let mut name_idx = i + 1;
        let name = loop {
            let cand = format!("m{name_idx}");
            if next.graph.index_of(&cand).is_none() {
                break cand;
            }
            name_idx += 100;
        };
        let (marked, _) = next.attach_contracted_end(w, i, &name)?;
        cur = marked;
        new_vertices.push(w);
    }
    Ok((cur, new_vertices))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// `k >= |beta| + g`: the assumed number of general points exceeds the bound.
    Violated,
    Consistent,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Violated => "VIOLATED",
            Verdict::Consistent => "CONSISTENT",
        }
    }
}

/// The graph obtained by deleting the marked ends with their finite vertices
/// and capping every severed edge with a new 1-valent finite vertex.
#[derive(Debug, Clone)]
pub struct CappedGraph {
    pub graph: TropicalGraph,
    /// For each vertex of `graph`, `true` if it is a cap.
    pub is_cap: Vec<bool>,
    /// Original vertex index for non-cap vertices.
    pub origin: Vec<Option<usize>>,
    /// Original edge index for each edge.
    pub edge_origin: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentInfo {
    pub vertices: usize,
    pub finite_vertices: usize,
    pub caps: usize,
    pub bounded_edges: usize,
    pub unbounded_edges: usize,
    pub b1: i64,
    pub beta_ends: Vec<String>,
    pub alpha_ends: Vec<String>,
    /// Original bounded edges (and unmarked ends) with trivial slope.
    pub trivial_slope_edges: Vec<usize>,
}

impl ComponentInfo {
    pub fn to_json(&self) -> Value {
        json!({
            "vertices": self.vertices,
            "finite_vertices": self.finite_vertices,
            "caps": self.caps,
            "bounded_edges": self.bounded_edges,
            "unbounded_edges": self.unbounded_edges,
            "b1": self.b1,
            "beta_ends": self.beta_ends,
            "alpha_ends": self.alpha_ends,
            "trivial_slope_edges": self.trivial_slope_edges,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: i64,
    pub rhs: i64,
    /// `>` if strict, `>=` otherwise.
    pub relation: &'static str,
    pub holds: bool,
}

impl InequalityCheck {
    fn ge(name: &'static str, lhs: i64, rhs: i64) -> Self {
        Self { name, lhs, rhs, relation: ">=", holds: lhs >= rhs }
    }

    fn gt(name: &'static str, lhs: i64, rhs: i64) -> Self {
        Self { name, lhs, rhs, relation: ">", holds: lhs > rhs }
    }

    pub fn to_json(&self) -> Value {
        json!({"name": self.name, "lhs": self.lhs, "relation": self.relation, "rhs": self.rhs, "holds": self.holds})
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankCheck {
    pub rank: usize,
    pub target_dim: usize,
}

impl RankCheck {
    pub fn surjective(&self) -> bool {
        self.rank == self.target_dim
    }

    pub fn to_json(&self) -> Value {
        json!({"rank": self.rank, "target_dim": self.target_dim, "surjective": self.surjective()})
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub k: usize,
    pub genus: i64,
    pub beta: usize,
    pub alpha: usize,
    pub bound: i64,
    pub chain: Vec<InequalityCheck>,
    pub components: Vec<ComponentInfo>,
    /// Index into `components` of a tree component with no beta-end.
    pub witness_component: Option<usize>,
    pub witness_inequalities: Vec<InequalityCheck>,
    pub full_projection: RankCheck,
    pub point_projection: RankCheck,
    pub shared_marked_vertices: bool,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "genus": self.genus,
            "alpha": self.alpha,
            "beta": self.beta,
            "bound": self.bound,
            "verdict": self.verdict.as_str(),
            "chain": self.chain.iter().map(InequalityCheck::to_json).collect::<Vec<_>>(),
            "components": self.components.iter().map(ComponentInfo::to_json).collect::<Vec<_>>(),
            "witness_component": self.witness_component,
            "witness_inequalities": self.witness_inequalities.iter().map(InequalityCheck::to_json).collect::<Vec<_>>(),
            "projection_full": self.full_projection.to_json(),
            "projection_points": self.point_projection.to_json(),
            "marked_ends_share_a_vertex": self.shared_marked_vertices,
        })
    }
}

struct MarkedSetup {
    marked: Vec<usize>,
    marked_vertices: Vec<usize>,
    alpha: BTreeSet<usize>,
    beta: BTreeSet<usize>,
}

fn setup(c: &ParamTropCurve, k: usize, alpha: &[String], beta: &[String]) -> Result<MarkedSetup, DeformError> {
    require_valid(c)?;
    if !is_stable(&c.graph) {
        return Err(DeformError::Unstable);
    }
    let g = &c.graph;
    if k > g.n_infinite() {
        return Err(DeformError::TooManyMarked { k, available: g.n_infinite() });
    }
    let marked: Vec<usize> = (0..k).map(|i| g.infinite_vertex(i)).collect();
    let unmarked: BTreeSet<usize> = (k..g.n_infinite()).map(|i| g.infinite_vertex(i)).collect();
    let resolve = |names: &[String]| -> Result<BTreeSet<usize>, DeformError> {
        let mut out = BTreeSet::new();
        for n in names {
            let v = g.index_of(n).filter(|v| unmarked.contains(v)).ok_or_else(|| DeformError::NotAnUnmarkedEnd(n.clone()))?;
            if !out.insert(v) {
                return Err(DeformError::NotAPartition(n.clone()));
            }
        }
        Ok(out)
    };
    let alpha = resolve(alpha)?;
    let beta = resolve(beta)?;
    for &v in &unmarked {
        if alpha.contains(&v) == beta.contains(&v) {
            return Err(DeformError::NotAPartition(g.name(v).to_string()));
        }
    }
    let mut marked_vertices = Vec::new();
    for &m in &marked {
        if !c.h[m].is_zero() {
            return Err(DeformError::MarkedEndNotContracted(g.name(m).to_string()));
        }
        let e = g.end_edge(m).ok_or_else(|| DeformError::InvalidCurve(format!("{} is not an end", g.name(m))))?;
        marked_vertices.push(g.end_parts(e).unwrap().0);
    }
    Ok(MarkedSetup { marked, marked_vertices, alpha, beta })
}

/// Removes the marked ends and their finite vertices; each other incidence at
/// a removed vertex is replaced by a new 1-valent cap vertex.
pub fn capped_graph(c: &ParamTropCurve, marked: &[usize], marked_vertices: &[usize]) -> CappedGraph {
    let g = &c.graph;
    let removed: BTreeSet<usize> = marked.iter().chain(marked_vertices).copied().collect();
    let keep_f: Vec<usize> = (0..g.n_finite()).filter(|v| !removed.contains(v)).collect();
    let keep_i: Vec<usize> = (g.n_finite()..g.n_vertices()).filter(|v| !removed.contains(v)).collect();
    // new layout: kept finite, caps, kept infinite
    let mut finite_names: Vec<String> = keep_f.iter().map(|&v| g.name(v).to_string()).collect();
    let mut origin: Vec<Option<usize>> = keep_f.iter().map(|&v| Some(v)).collect();
    let mut is_cap = vec![false; keep_f.len()];
    let mut edges_tmp: Vec<(Endpoint, Endpoint, EdgeLength, usize)> = Vec::new();
    let mut n_caps = 0usize;
    for (ei, e) in g.edges().iter().enumerate() {
        if removed.contains(&e.a) && removed.contains(&e.b) && (marked.contains(&e.a) || marked.contains(&e.b)) {
            continue; // a marked end
        }
        let mut map_end = |x: usize| -> Endpoint {
            if removed.contains(&x) {
                n_caps += 1;
                Endpoint::Cap(n_caps - 1)
            } else {
                Endpoint::Old(x)
            }
        };
        let a = map_end(e.a);
        let b = map_end(e.b);
        edges_tmp.push((a, b, e.length.clone(), ei));
    }
    for i in 0..n_caps {
        finite_names.push(format!("cap{i}"));
        origin.push(None);
        is_cap.push(true);
    }
    let nf_new = finite_names.len();
    let infinite_names: Vec<String> = keep_i.iter().map(|&v| g.name(v).to_string()).collect();
    for &v in &keep_i {
        origin.push(Some(v));
        is_cap.push(false);
    }
    let index = |p: &Endpoint| -> usize {
        match *p {
            Endpoint::Cap(i) => keep_f.len() + i,
            Endpoint::Old(x) => match keep_f.binary_search(&x) {
                Ok(i) => i,
                Err(_) => nf_new + keep_i.binary_search(&x).unwrap(),
            },
        }
    };
    let mut edges = Vec::new();
    let mut edge_origin = Vec::new();
    for (a, b, length, ei) in &edges_tmp {
        edges.push(Edge { a: index(a), b: index(b), length: length.clone() });
        edge_origin.push(*ei);
    }
    let graph = TropicalGraph::new(finite_names, infinite_names, edges).expect("capped graph is well formed");
    CappedGraph { graph, is_cap, origin, edge_origin }
}

enum Endpoint {
    Old(usize),
    Cap(usize),
}

fn component_infos(c: &ParamTropCurve, cg: &CappedGraph, alpha: &BTreeSet<usize>, beta: &BTreeSet<usize>) -> Result<Vec<ComponentInfo>, DeformError> {
    let g2 = &cg.graph;
    let mut out = Vec::new();
    for comp in g2.components() {
        let set: BTreeSet<usize> = comp.iter().copied().collect();
        let comp_edges: Vec<usize> = (0..g2.edges().len()).filter(|&e| set.contains(&g2.edge(e).a)).collect();
        let finite_vertices = comp.iter().filter(|&&v| g2.is_finite(v)).count();
        let caps = comp.iter().filter(|&&v| cg.is_cap[v]).count();
        let unbounded_edges = comp_edges.iter().filter(|&&e| !g2.is_bounded(e)).count();
        let names = |s: &BTreeSet<usize>| -> Vec<String> {
            comp.iter().filter_map(|&v| cg.origin[v]).filter(|o| s.contains(o)).map(|o| c.graph.name(o).to_string()).collect()
        };
        let mut trivial = Vec::new();
        for &e in &comp_edges {
            let orig = cg.edge_origin[e];
            if edge_data(c, orig)?.generator.is_none() {
                trivial.push(orig);
            }
        }
        out.push(ComponentInfo {
            vertices: comp.len(),
            finite_vertices,
            caps,
            bounded_edges: comp_edges.len() - unbounded_edges,
            unbounded_edges,
            b1: 1 - comp.len() as i64 + comp_edges.len() as i64,
            beta_ends: names(beta),
            alpha_ends: names(alpha),
            trivial_slope_edges: trivial,
        });
    }
    Ok(out)
}

/// Ranks of the restriction of `E^1` to the marked vertices (and, for the
/// full projection, to the other ends' vertices modulo their slopes).
fn projection_ranks(c: &ParamTropCurve, setup: &MarkedSetup) -> Result<(RankCheck, RankCheck), DeformError> {
    let space = deformation_space(c)?;
    let g = &c.graph;
    let mut full_rows: Vec<Vec<Q>> = Vec::new();
    let mut point_rows_: Vec<Vec<Q>> = Vec::new();
    let mut full_dim = 0;
    for &v in &setup.marked_vertices {
        for coord in 0..2 {
            let row: Vec<Q> = space.basis.iter().map(|b| b[2 * v + coord].clone()).collect();
            full_rows.push(row.clone());
            point_rows_.push(row);
        }
        full_dim += 2;
    }
    for i in setup.marked.len()..g.n_infinite() {
        let inf = g.infinite_vertex(i);
        let e = g.end_edge(inf).unwrap();
        let v = g.end_parts(e).unwrap().0;
        match edge_data(c, e)?.generator {
            Some(n) => {
                full_rows.push(space.basis.iter().map(|b| &b[2 * v] * q(n.y) - &b[2 * v + 1] * q(n.x)).collect());
                full_dim += 1;
            }
            None => {
                for coord in 0..2 {
                    full_rows.push(space.basis.iter().map(|b| b[2 * v + coord].clone()).collect());
                }
                full_dim += 2;
            }
        }
    }
    let ncols = space.basis.len();
    let rank = |rows: Vec<Vec<Q>>| -> usize {
        if ncols == 0 {
            0
        } else {
            Matrix::from_rows(ncols, rows).rank()
        }
    };
    Ok((
        RankCheck { rank: rank(full_rows), target_dim: full_dim },
        RankCheck { rank: rank(point_rows_), target_dim: 2 * setup.marked.len() },
    ))
}

/// Replays the counting argument for `k` marked torus points.
pub fn certify_bound(c: &ParamTropCurve, k: usize, alpha: &[String], beta: &[String]) -> Result<Certificate, DeformError> {
    let s = setup(c, k, alpha, beta)?;
    let g = &c.graph;
    let genus = genus(g);
    let nb = s.beta.len() as i64;
    let chi = g.n_vertices() as i64 - g.edges().len() as i64;
    let cg = capped_graph(c, &s.marked, &s.marked_vertices);
    let components = component_infos(c, &cg, &s.alpha, &s.beta)?;
    let minus_chi_prime: i64 = components.iter().map(|ci| ci.b1 - 1).sum();
    let k_i = k as i64;
    let chain = vec![
        InequalityCheck::gt("-|beta| > -1-|beta|", -nb, -1 - nb),
        InequalityCheck::ge("-1-|beta| >= -chi(G)-k", -1 - nb, -chi - k_i),
        InequalityCheck::ge("-chi(G)-k >= -chi(G')", -chi - k_i, minus_chi_prime),
        InequalityCheck::gt("-|beta| > sum(b1(G_j)-1)", -nb, minus_chi_prime),
    ];
    let witness_component = components.iter().position(|ci| ci.b1 == 0 && ci.beta_ends.is_empty());
    let mut witness_inequalities = Vec::new();
    if let Some(w) = witness_component {
        let ci = &components[w];
        let v = ci.vertices as i64;
        let e = (ci.bounded_edges + ci.unbounded_edges) as i64;
        // one-valent vertices: caps and infinite vertices
        let v1 = (ci.caps + ci.unbounded_edges) as i64;
        witness_inequalities.push(InequalityCheck::ge(
            "2|Vf| >= |Eb| + 2|V1f| + |Einf|",
            2 * ci.finite_vertices as i64,
            ci.bounded_edges as i64 + 2 * ci.caps as i64 + ci.unbounded_edges as i64,
        ));
        witness_inequalities.push(InequalityCheck::ge("2|E| >= 3|V| - 2|V1|", 2 * e, 3 * v - 2 * v1));
        witness_inequalities.push(InequalityCheck::ge("|V| - |E| = 1 (tree)", v - e, 1));
    }
    let (full_projection, point_projection) = projection_ranks(c, &s)?;
    let shared = s.marked_vertices.iter().collect::<BTreeSet<_>>().len() < s.marked_vertices.len();
    let verdict = if k_i >= nb + genus { Verdict::Violated } else { Verdict::Consistent };
    Ok(Certificate {
        k,
        genus,
        beta: s.beta.len(),
        alpha: s.alpha.len(),
        bound: nb + genus - 1,
        chain,
        components,
        witness_component,
        witness_inequalities,
        full_projection,
        point_projection,
        shared_marked_vertices: shared,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualityClassification {
    pub components_are_trees_with_one_beta_end: bool,
    pub trivalent: bool,
    pub no_trivial_slope: bool,
    pub failures: Vec<String>,
}

impl EqualityClassification {
    pub fn satisfied(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "satisfied": self.satisfied(),
            "components_are_trees_with_one_beta_end": self.components_are_trees_with_one_beta_end,
            "trivalent": self.trivalent,
            "no_trivial_slope": self.no_trivial_slope,
            "failures": self.failures,
        })
    }
}

/// Checks the rigid profile of a curve attaining the bound: `k = |beta| + g - 1`.
/// Marked ends are contracted by definition and are not counted as
/// trivial-slope edges.
pub fn classify_equality(c: &ParamTropCurve, k: usize, alpha: &[String], beta: &[String]) -> Result<EqualityClassification, DeformError> {
    let s = setup(c, k, alpha, beta)?;
    let g = &c.graph;
    let expected = s.beta.len() as i64 + genus(g) - 1;
    if k as i64 != expected {
        return Err(DeformError::WrongK { k, expected });
    }
    let cg = capped_graph(c, &s.marked, &s.marked_vertices);
    let comps = component_infos(c, &cg, &s.alpha, &s.beta)?;
    let mut failures = Vec::new();
    let trees_ok = comps.iter().all(|ci| ci.b1 == 0 && ci.beta_ends.len() == 1);
    for (i, ci) in comps.iter().enumerate() {
        if ci.b1 != 0 {
            failures.push(format!("component {i} has b1 = {}", ci.b1));
        } else if ci.beta_ends.len() != 1 {
            failures.push(format!("component {i} contains {} beta-ends", ci.beta_ends.len()));
        }
    }
    let mut trivalent = true;
    for v in 0..g.n_finite() {
        if g.valency(v) != 3 {
            trivalent = false;
            failures.push(format!("vertex {} has valency {}", g.name(v), g.valency(v)));
        }
    }
    let marked_edges: BTreeSet<usize> = s.marked.iter().filter_map(|&m| g.end_edge(m)).collect();
    let mut no_trivial = true;
    for e in 0..g.edges().len() {
        if marked_edges.contains(&e) {
            continue;
        }
        if edge_data(c, e)?.generator.is_none() {
            no_trivial = false;
            failures.push(format!("edge {e} ({}-{}) has trivial slope", g.name(g.edge(e).a), g.name(g.edge(e).b)));
        }
    }
    Ok(EqualityClassification { components_are_trees_with_one_beta_end: trees_ok, trivalent, no_trivial_slope: no_trivial, failures })
}

/// Unmarked ends split into alpha (given) and beta (the rest).
pub fn default_beta(c: &ParamTropCurve, k: usize, alpha: &[String]) -> Vec<String> {
    let g = &c.graph;
    (k..g.n_infinite()).map(|i| g.name(g.infinite_vertex(i)).to_string()).filter(|n| !alpha.contains(n)).collect()
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    json!(m.rows().iter().map(|r| r.iter().map(rational_json).collect::<Vec<_>>()).collect::<Vec<_>>())
}
