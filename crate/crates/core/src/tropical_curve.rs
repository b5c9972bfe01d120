//! Tropical curves (metric graphs with finite and ordered infinite vertices)
//! and their `N_Q`-parameterizations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use serde_json::{json, Map, Value};

use crate::arith::{parse_rational, rational_json, RatVec, Q};
use crate::lattice_toric::LatticeVec;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeLength {
    Finite(Q),
    Infinite,
}

impl EdgeLength {
    pub fn finite(&self) -> Option<&Q> {
        match self {
            EdgeLength::Finite(l) => Some(l),
            EdgeLength::Infinite => None,
        }
    }
}

impl fmt::Display for EdgeLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLength::Finite(l) => write!(f, "{l}"),
            EdgeLength::Infinite => f.write_str("inf"),
        }
    }
}

/// An edge between two vertex indices. Loops have `a == b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: EdgeLength,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("vertex name {0:?} is used twice")]
    DuplicateVertex(String),
    #[error("edge {edge}: endpoint index {index} out of range")]
    EndpointOutOfRange { edge: usize, index: usize },
    #[error("no position given for vertex {0:?}")]
    MissingPosition(String),
    #[error("expected {expected} positions, got {got}")]
    PositionCount { expected: usize, got: usize },
    #[error("malformed curve JSON: {0}")]
    Json(String),
    #[error("edge {0} has no well-defined lattice vector (curve is not valid)")]
    NonIntegralEdge(usize),
    #[error("edge index {0} out of range")]
    NoSuchEdge(usize),
    #[error("edge {0} is not bounded")]
    NotBounded(usize),
    #[error("edge {0} is not unbounded")]
    NotUnbounded(usize),
    #[error("subdivision parameter must lie strictly between 0 and the edge length")]
    BadSubdivision,
}

/// Vertices `0..n_finite` are finite; the rest are the infinite vertices in
/// their given order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TropicalGraph {
    finite: Vec<String>,
    infinite: Vec<String>,
    edges: Vec<Edge>,
}

impl TropicalGraph {
    pub fn new(finite: Vec<String>, infinite: Vec<String>, edges: Vec<Edge>) -> Result<Self, CurveError> {
        let mut seen = BTreeSet::new();
        for name in finite.iter().chain(&infinite) {
            if !seen.insert(name.clone()) {
                return Err(CurveError::DuplicateVertex(name.clone()));
            }
        }
        let nv = finite.len() + infinite.len();
        for (i, e) in edges.iter().enumerate() {
            for index in [e.a, e.b] {
                if index >= nv {
                    return Err(CurveError::EndpointOutOfRange { edge: i, index });
                }
            }
        }
        Ok(Self { finite, infinite, edges })
    }

    /// Default names `v0, v1, ...` and `q1, q2, ...`.
    pub fn from_counts(n_finite: usize, n_infinite: usize, edges: Vec<Edge>) -> Result<Self, CurveError> {
        let finite = (0..n_finite).map(|i| format!("v{i}")).collect();
        let infinite = (1..=n_infinite).map(|i| format!("q{i}")).collect();
        Self::new(finite, infinite, edges)
    }

    pub fn n_finite(&self) -> usize {
        self.finite.len()
    }

    pub fn n_infinite(&self) -> usize {
        self.infinite.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.finite.len() + self.infinite.len()
    }

    pub fn is_finite(&self, v: usize) -> bool {
        v < self.finite.len()
    }

    pub fn name(&self, v: usize) -> &str {
        if v < self.finite.len() {
            &self.finite[v]
        } else {
            &self.infinite[v - self.finite.len()]
        }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.finite
            .iter()
            .position(|n| n == name)
            .or_else(|| self.infinite.iter().position(|n| n == name).map(|i| i + self.finite.len()))
    }

    /// Index of the `i`-th infinite vertex (0-based).
    pub fn infinite_vertex(&self, i: usize) -> usize {
        self.finite.len() + i
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn is_bounded(&self, e: usize) -> bool {
        let ed = &self.edges[e];
        self.is_finite(ed.a) && self.is_finite(ed.b)
    }

    pub fn bounded_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| self.is_bounded(e))
    }

    pub fn unbounded_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| !self.is_bounded(e))
    }

    /// `(finite endpoint, infinite endpoint)` of an unbounded edge whose other
    /// endpoint is finite.
    pub fn end_parts(&self, e: usize) -> Option<(usize, usize)> {
        let ed = &self.edges[e];
        match (self.is_finite(ed.a), self.is_finite(ed.b)) {
            (true, false) => Some((ed.a, ed.b)),
            (false, true) => Some((ed.b, ed.a)),
            _ => None,
        }
    }

    /// The edge at an infinite vertex, when it has exactly one.
    pub fn end_edge(&self, inf: usize) -> Option<usize> {
        let mut it = (0..self.edges.len()).filter(|&e| self.edges[e].a == inf || self.edges[e].b == inf);
        let first = it.next()?;
        it.next().is_none().then_some(first)
    }

    /// Valency with loops counted twice.
    pub fn valency(&self, v: usize) -> usize {
        self.edges.iter().map(|e| usize::from(e.a == v) + usize::from(e.b == v)).sum()
    }

    /// `(edge, other endpoint)` for each incidence; a loop appears twice.
    pub fn incidences(&self, v: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.a == v {
                out.push((i, e.b));
            }
            if e.b == v {
                out.push((i, e.a));
            }
        }
        out
    }

    /// Connected components as sorted vertex lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n_vertices();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for e in &self.edges {
            let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        groups.into_values().collect()
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    pub fn finite_names(&self) -> &[String] {
        &self.finite
    }

    pub fn infinite_names(&self) -> &[String] {
        &self.infinite
    }
}

/// `1 - |V| + |E|`, counting infinite vertices and unbounded edges.
pub fn genus(g: &TropicalGraph) -> i64 {
    1 - g.n_vertices() as i64 + g.edges.len() as i64
}

/// Every finite vertex has valency at least 3.
pub fn is_stable(g: &TropicalGraph) -> bool {
    (0..g.n_finite()).all(|v| g.valency(v) >= 3)
}

/// A tropical curve with positions `h` for all vertices (indexed like the graph).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamTropCurve {
    pub graph: TropicalGraph,
    pub h: Vec<RatVec>,
}

impl ParamTropCurve {
    pub fn new(graph: TropicalGraph, h: Vec<RatVec>) -> Result<Self, CurveError> {
        if h.len() != graph.n_vertices() {
            return Err(CurveError::PositionCount { expected: graph.n_vertices(), got: h.len() });
        }
        Ok(Self { graph, h })
    }

    /// Lattice vector carried by edge `e`: `(h(b) - h(a)) / |e|` for a bounded
    /// edge, `h(infinite endpoint)` for an unbounded one.
    pub fn edge_vector(&self, e: usize) -> Option<LatticeVec> {
        let g = &self.graph;
        if e >= g.edges.len() {
            return None;
        }
        let ed = &g.edges[e];
        if g.is_bounded(e) {
            let len = ed.length.finite()?;
            if !len.is_positive() {
                return None;
            }
            (&self.h[ed.b] - &self.h[ed.a]).div(len).to_lattice()
        } else {
            let (_, inf) = g.end_parts(e)?;
            self.h[inf].to_lattice()
        }
    }

    /// Moves every finite vertex by `t`; end directions are unchanged.
    pub fn translated(&self, t: &RatVec) -> Self {
        let mut h = self.h.clone();
        for p in h.iter_mut().take(self.graph.n_finite()) {
            *p = &*p + t;
        }
        Self { graph: self.graph.clone(), h }
    }

    /// Splits bounded edge `e` at distance `s` from its first endpoint.
    /// Returns the curve and the index of the new finite vertex.
    pub fn subdivide_bounded(&self, e: usize, s: &Q) -> Result<(Self, usize), CurveError> {
        let g = &self.graph;
        if e >= g.edges.len() {
            return Err(CurveError::NoSuchEdge(e));
        }
        if !g.is_bounded(e) {
            return Err(CurveError::NotBounded(e));
        }
        let ed = g.edges[e].clone();
        let len = ed.length.finite().cloned().ok_or(CurveError::NotBounded(e))?;
        if !s.is_positive() || *s >= len {
            return Err(CurveError::BadSubdivision);
        }
        let dir = (&self.h[ed.b] - &self.h[ed.a]).div(&len);
        let pos = &self.h[ed.a] + &dir.scale(s);
        let (mut out, w) = self.insert_finite_vertex(pos);
        let (a, b) = (ed.a, ed.b);
        out.graph.edges[e] = Edge { a, b: w, length: EdgeLength::Finite(s.clone()) };
        out.graph.edges.push(Edge { a: w, b, length: EdgeLength::Finite(&len - s) });
        Ok((out, w))
    }

    /// Inserts a finite vertex on unbounded edge `e` at distance `s` from its
    /// finite endpoint.
    pub fn subdivide_unbounded(&self, e: usize, s: &Q) -> Result<(Self, usize), CurveError> {
        let g = &self.graph;
        if e >= g.edges.len() {
            return Err(CurveError::NoSuchEdge(e));
        }
        let (fv, inf) = g.end_parts(e).ok_or(CurveError::NotUnbounded(e))?;
        if !s.is_positive() {
            return Err(CurveError::BadSubdivision);
        }
        let pos = &self.h[fv] + &self.h[inf].scale(s);
        let nf = g.n_finite();
        let (mut out, w) = self.insert_finite_vertex(pos);
        let inf = shift(nf, inf);
        out.graph.edges[e] = Edge { a: fv, b: w, length: EdgeLength::Finite(s.clone()) };
        out.graph.edges.push(Edge { a: w, b: inf, length: EdgeLength::Infinite });
        Ok((out, w))
    }

    /// Adds a contracted end at finite vertex `v`, placed at position `order`
    /// among the infinite vertices. Returns the new infinite vertex index.
    pub fn attach_contracted_end(&self, v: usize, order: usize, name: &str) -> Result<(Self, usize), CurveError> {
        let g = &self.graph;
        if self.graph.index_of(name).is_some() {
            return Err(CurveError::DuplicateVertex(name.to_string()));
        }
        let nf = g.n_finite();
        let order = order.min(g.n_infinite());
        let new_index = nf + order;
        let remap = |x: usize| if x >= new_index { x + 1 } else { x };
        let mut infinite = g.infinite.clone();
        infinite.insert(order, name.to_string());
        let mut edges: Vec<Edge> = g.edges.iter().map(|e| Edge { a: remap(e.a), b: remap(e.b), length: e.length.clone() }).collect();
        edges.push(Edge { a: remap(v), b: new_index, length: EdgeLength::Infinite });
        let mut h = self.h.clone();
        h.insert(new_index, RatVec::zero());
        let graph = TropicalGraph::new(g.finite.clone(), infinite, edges)?;
        Ok((Self { graph, h }, new_index))
    }

    fn insert_finite_vertex(&self, pos: RatVec) -> (Self, usize) {
        let g = &self.graph;
        let nf = g.n_finite();
        let mut finite = g.finite.clone();
        let mut k = nf;
        let name = loop {
            let cand = format!("v{k}");
            if g.index_of(&cand).is_none() {
                break cand;
            }
            k += 1;
        };
        finite.push(name);
        let edges = g
            .edges
            .iter()
            .map(|e| Edge { a: shift(nf, e.a), b: shift(nf, e.b), length: e.length.clone() })
            .collect();
        let mut h = self.h.clone();
        h.insert(nf, pos);
        let graph = TropicalGraph { finite, infinite: g.infinite.clone(), edges };
        (Self { graph, h }, nf)
    }
}

/// Old vertex index after a finite vertex is appended at position `nf_old`.
fn shift(nf_old: usize, x: usize) -> usize {
    if x >= nf_old {
        x + 1
    } else {
        x
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// (p2) an infinite vertex must have valency one.
    InfiniteValency { vertex: String, valency: usize },
    /// (p2) the edge at an infinite vertex must lead to a finite vertex.
    EndNotAttachedToFinite { vertex: String },
    /// (p3) bounded edges have finite length, unbounded edges infinite length.
    LengthKind { edge: usize, bounded: bool },
    /// (p3) lengths of bounded edges must be positive.
    NonPositiveLength { edge: usize, length: Q },
    /// (1) positions of infinite vertices lie in `N`.
    NonIntegralEnd { vertex: String },
    /// (2) `(h(v) - h(v')) / |e|` lies in `N`.
    NonIntegralEdge { edge: usize },
    /// (3) balancing at a finite vertex.
    Unbalanced { vertex: String, residual: RatVec },
}

impl Violation {
    pub fn clause(&self) -> &'static str {
        match self {
            Violation::InfiniteValency { .. } | Violation::EndNotAttachedToFinite { .. } => "p2",
            Violation::LengthKind { .. } | Violation::NonPositiveLength { .. } => "p3",
            Violation::NonIntegralEnd { .. } => "1",
            Violation::NonIntegralEdge { .. } => "2",
            Violation::Unbalanced { .. } => "3",
        }
    }

    pub fn to_json(&self) -> Value {
        let detail = match self {
            Violation::InfiniteValency { vertex, valency } => json!({"vertex": vertex, "valency": valency}),
            Violation::EndNotAttachedToFinite { vertex } => json!({"vertex": vertex}),
            Violation::LengthKind { edge, bounded } => json!({"edge": edge, "bounded": bounded}),
            Violation::NonPositiveLength { edge, length } => json!({"edge": edge, "length": rational_json(length)}),
            Violation::NonIntegralEnd { vertex } => json!({"vertex": vertex}),
            Violation::NonIntegralEdge { edge } => json!({"edge": edge}),
            Violation::Unbalanced { vertex, residual } => json!({"vertex": vertex, "residual": residual.to_json()}),
        };
        json!({"clause": self.clause(), "message": self.to_string(), "detail": detail})
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InfiniteValency { vertex, valency } => {
                write!(f, "infinite vertex {vertex} has valency {valency}, expected 1")
            }
            Violation::EndNotAttachedToFinite { vertex } => {
                write!(f, "infinite vertex {vertex} is not joined to a finite vertex")
            }
            Violation::LengthKind { edge, bounded: true } => write!(f, "bounded edge {edge} has infinite length"),
            Violation::LengthKind { edge, bounded: false } => write!(f, "unbounded edge {edge} has finite length"),
            Violation::NonPositiveLength { edge, length } => write!(f, "edge {edge} has non-positive length {length}"),
            Violation::NonIntegralEnd { vertex } => write!(f, "position of infinite vertex {vertex} is not a lattice point"),
            Violation::NonIntegralEdge { edge } => write!(f, "edge {edge}: position difference over length is not a lattice vector"),
            Violation::Unbalanced { vertex, residual } => write!(f, "balancing fails at {vertex}: sum is {residual}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "valid": self.is_valid(),
            "violations": self.violations.iter().map(Violation::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Checks every clause of the definitions and reports all failures.
pub fn validate(c: &ParamTropCurve) -> ValidationReport {
    let g = &c.graph;
    let mut violations = Vec::new();
    for i in 0..g.n_infinite() {
        let v = g.infinite_vertex(i);
        let val = g.valency(v);
        if val != 1 {
            violations.push(Violation::InfiniteValency { vertex: g.name(v).to_string(), valency: val });
        } else {
            let (_, other) = g.incidences(v)[0];
            if !g.is_finite(other) {
                violations.push(Violation::EndNotAttachedToFinite { vertex: g.name(v).to_string() });
            }
        }
        if !c.h[v].is_integral() {
            violations.push(Violation::NonIntegralEnd { vertex: g.name(v).to_string() });
        }
    }
    for (i, e) in g.edges.iter().enumerate() {
        let bounded = g.is_bounded(i);
        match (&e.length, bounded) {
            (EdgeLength::Infinite, true) | (EdgeLength::Finite(_), false) => {
                violations.push(Violation::LengthKind { edge: i, bounded })
            }
            (EdgeLength::Finite(l), true) if !l.is_positive() => {
                violations.push(Violation::NonPositiveLength { edge: i, length: l.clone() })
            }
            (EdgeLength::Finite(_), true) if c.edge_vector(i).is_none() => {
                violations.push(Violation::NonIntegralEdge { edge: i });
            }
            _ => {}
        }
    }
    for v in 0..g.n_finite() {
        let mut sum = RatVec::zero();
        let mut well_defined = true;
        for (e, other) in g.incidences(v) {
            if other == v {
                continue;
            }
            if g.is_finite(other) {
                match g.edges[e].length.finite() {
                    Some(l) if !l.is_zero() => sum = &sum + &(&c.h[other] - &c.h[v]).div(l),
                    _ => well_defined = false,
                }
            } else {
                sum = &sum + &c.h[other];
            }
        }
        if well_defined && !sum.is_zero() {
            violations.push(Violation::Unbalanced { vertex: g.name(v).to_string(), residual: sum });
        }
    }
    ValidationReport { violations }
}

/// Multiplicity and primitive generator of an edge's slope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeData {
    pub multiplicity: u64,
    /// `None` for a trivial slope. Sign-normalized for bounded edges; for
    /// unbounded edges it points towards the infinite vertex.
    pub generator: Option<LatticeVec>,
}

pub fn edge_data(c: &ParamTropCurve, e: usize) -> Result<EdgeData, CurveError> {
    let v = c.edge_vector(e).ok_or(CurveError::NonIntegralEdge(e))?;
    let (prim, l) = v.primitive();
    if l == 0 {
        return Ok(EdgeData { multiplicity: 0, generator: None });
    }
    let generator = if c.graph.is_bounded(e) { prim.sign_normalized() } else { prim };
    Ok(EdgeData { multiplicity: l, generator: Some(generator) })
}

/// Ends with nontrivial slope grouped by direction, sorted by direction.
pub fn degree(c: &ParamTropCurve) -> Result<Vec<(LatticeVec, u64)>, CurveError> {
    let mut acc: BTreeMap<LatticeVec, u64> = BTreeMap::new();
    for e in c.graph.unbounded_edges() {
        let d = edge_data(c, e)?;
        if let Some(n) = d.generator {
            *acc.entry(n).or_default() += d.multiplicity;
        }
    }
    Ok(acc.into_iter().collect())
}

pub fn degree_to_json(deg: &[(LatticeVec, u64)]) -> Value {
    json!(deg.iter().map(|(n, d)| json!({"n": [n.x, n.y], "d": d})).collect::<Vec<_>>())
}

/// How ends are told apart in a combinatorial type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndLabelling {
    /// Ends carry their position in the order of infinite vertices.
    Ordered,
    /// Ends are distinguished only by their lattice vector.
    ByDecoration,
}

/// A graph on finite vertices `0..n_finite` with labelled ends and bounded
/// edges decorated by sign-normalized lattice vectors `l(e) n_e`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecoratedGraph {
    pub n_finite: usize,
    /// `(finite vertex, order index if labelled, end vector)`.
    pub ends: Vec<(usize, Option<usize>, LatticeVec)>,
    /// `(u, v, vector)`; orientation and sign are irrelevant.
    pub edges: Vec<(usize, usize, LatticeVec)>,
}

/// Canonical encoding of a decorated graph; equal exactly for isomorphic inputs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CombinatorialType {
    pub n_finite: usize,
    pub ends: Vec<(usize, Option<usize>, LatticeVec)>,
    pub edges: Vec<(usize, usize, LatticeVec)>,
}

impl CombinatorialType {
    pub fn n_bounded(&self) -> usize {
        self.edges.len()
    }

    pub fn n_ends(&self) -> usize {
        self.ends.len()
    }

    pub fn genus(&self) -> i64 {
        // infinite vertices and their edges cancel
        1 - self.n_finite as i64 + self.edges.len() as i64
    }

    pub fn valency(&self, v: usize) -> usize {
        self.ends.iter().filter(|e| e.0 == v).count()
            + self.edges.iter().map(|&(a, b, _)| usize::from(a == v) + usize::from(b == v)).sum::<usize>()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "finite_vertices": self.n_finite,
            "ends": self.ends.iter().map(|(v, o, n)| json!({"vertex": v, "order": o, "vector": [n.x, n.y]})).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|(a, b, n)| json!({"u": a, "v": b, "vector": [n.x, n.y]})).collect::<Vec<_>>(),
        })
    }
}

impl DecoratedGraph {
    fn normalized_edges(&self) -> Vec<(usize, usize, LatticeVec)> {
        self.edges.iter().map(|&(a, b, n)| (a, b, n.sign_normalized())).collect()
    }

    /// Colour refinement to the coarsest equitable partition refining `colours`.
    fn refine(&self, edges: &[(usize, usize, LatticeVec)], mut colours: Vec<u32>) -> Vec<u32> {
        let n = self.n_finite;
        let mut count = distinct(&colours);
        loop {
            let mut sigs: Vec<(u32, Vec<(u32, LatticeVec)>)> = (0..n).map(|v| (colours[v], Vec::new())).collect();
            for &(a, b, d) in edges {
                sigs[a].1.push((colours[b], d));
                sigs[b].1.push((colours[a], d));
            }
            for s in &mut sigs {
                s.1.sort();
            }
            let mut keys: Vec<_> = sigs.clone();
            keys.sort();
            keys.dedup();
            colours = sigs.iter().map(|s| keys.binary_search(s).unwrap() as u32).collect();
            let new_count = keys.len();
            if new_count == count {
                return colours;
            }
            count = new_count;
        }
    }

    fn encode(&self, edges: &[(usize, usize, LatticeVec)], colours: &[u32], labelling: EndLabelling) -> CombinatorialType {
        let p = |v: usize| colours[v] as usize;
        let mut ends: Vec<_> = self
            .ends
            .iter()
            .map(|&(v, o, n)| (p(v), if labelling == EndLabelling::Ordered { o } else { None }, n))
            .collect();
        ends.sort();
        let mut es: Vec<_> = edges
            .iter()
            .map(|&(a, b, d)| {
                let (x, y) = (p(a), p(b));
                (x.min(y), x.max(y), d)
            })
            .collect();
        es.sort();
        CombinatorialType { n_finite: self.n_finite, ends, edges: es }
    }

    pub fn canonical_form(&self, labelling: EndLabelling) -> CombinatorialType {
        let n = self.n_finite;
        let edges = self.normalized_edges();
        // initial colour: the multiset of end labels at the vertex
        let mut init: Vec<Vec<(Option<usize>, LatticeVec)>> = vec![Vec::new(); n];
        for &(v, o, d) in &self.ends {
            init[v].push((if labelling == EndLabelling::Ordered { o } else { None }, d));
        }
        for l in &mut init {
            l.sort();
        }
        let mut keys = init.clone();
        keys.sort();
        keys.dedup();
        let colours: Vec<u32> = init.iter().map(|l| keys.binary_search(l).unwrap() as u32).collect();
        let colours = self.refine(&edges, colours);
        let mut best: Option<CombinatorialType> = None;
        self.search(&edges, colours, labelling, &mut best);
        best.unwrap_or(CombinatorialType { n_finite: 0, ends: Vec::new(), edges: Vec::new() })
    }

    fn search(
        &self,
        edges: &[(usize, usize, LatticeVec)],
        colours: Vec<u32>,
        labelling: EndLabelling,
        best: &mut Option<CombinatorialType>,
    ) {
        let n = self.n_finite;
        if distinct(&colours) == n {
            let enc = self.encode(edges, &colours, labelling);
            if best.as_ref().is_none_or(|b| enc < *b) {
                *best = Some(enc);
            }
            return;
        }
        // first non-singleton cell of smallest colour
        let mut sizes: BTreeMap<u32, usize> = BTreeMap::new();
        for &c in &colours {
            *sizes.entry(c).or_default() += 1;
        }
        let target = *sizes.iter().find(|(_, &s)| s > 1).unwrap().0;
        for v in 0..n {
            if colours[v] != target {
                continue;
            }
            let indiv: Vec<u32> = (0..n).map(|w| 2 * colours[w] + u32::from(w != v)).collect();
            let refined = self.refine(edges, renumber(&indiv));
            self.search(edges, refined, labelling, best);
        }
    }
}

fn distinct(colours: &[u32]) -> usize {
    colours.iter().collect::<BTreeSet<_>>().len()
}

fn renumber(colours: &[u32]) -> Vec<u32> {
    let keys: Vec<u32> = colours.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    colours.iter().map(|c| keys.binary_search(c).unwrap() as u32).collect()
}

/// Decorated graph of a valid curve. Unbounded edges attached to an infinite
/// vertex become labelled ends; the order index is the infinite vertex's rank.
pub fn decorated_graph(c: &ParamTropCurve) -> Result<DecoratedGraph, CurveError> {
    let g = &c.graph;
    let mut ends = Vec::new();
    let mut edges = Vec::new();
    for e in 0..g.edges.len() {
        let vec = c.edge_vector(e).ok_or(CurveError::NonIntegralEdge(e))?;
        if g.is_bounded(e) {
            edges.push((g.edges[e].a, g.edges[e].b, vec));
        } else {
            let (fv, inf) = g.end_parts(e).ok_or(CurveError::NonIntegralEdge(e))?;
            ends.push((fv, Some(inf - g.n_finite()), vec));
        }
    }
    Ok(DecoratedGraph { n_finite: g.n_finite(), ends, edges })
}

pub fn combinatorial_type(c: &ParamTropCurve) -> Result<CombinatorialType, CurveError> {
    Ok(decorated_graph(c)?.canonical_form(EndLabelling::Ordered))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImageElement {
    Point(RatVec),
    Segment(RatVec, RatVec),
    Ray { start: RatVec, direction: LatticeVec },
}

impl ImageElement {
    pub fn to_json(&self) -> Value {
        match self {
            ImageElement::Point(p) => json!({"kind": "point", "at": p.to_json()}),
            ImageElement::Segment(a, b) => json!({"kind": "segment", "from": a.to_json(), "to": b.to_json()}),
            ImageElement::Ray { start, direction } => {
                json!({"kind": "ray", "from": start.to_json(), "direction": [direction.x, direction.y]})
            }
        }
    }
}

/// Image of the curve in `N_R`, one element per edge in edge order.
pub fn image_segments(c: &ParamTropCurve) -> Vec<ImageElement> {
    let g = &c.graph;
    let mut out = Vec::new();
    for e in 0..g.edges.len() {
        if g.is_bounded(e) {
            let ed = &g.edges[e];
            let (a, b) = (&c.h[ed.a], &c.h[ed.b]);
            out.push(if a == b { ImageElement::Point(a.clone()) } else { ImageElement::Segment(a.clone(), b.clone()) });
        } else if let Some((fv, inf)) = g.end_parts(e) {
            match c.h[inf].to_lattice() {
                Some(d) if !d.is_zero() => out.push(ImageElement::Ray { start: c.h[fv].clone(), direction: d }),
                _ => out.push(ImageElement::Point(c.h[fv].clone())),
            }
        }
    }
    out
}

/// Axis-aligned plotting window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl BBox {
    pub fn parse(s: &str) -> Option<Self> {
        let parts: Vec<f64> = s.split(',').map(|p| p.trim().parse().ok()).collect::<Option<_>>()?;
        match parts[..] {
            [xmin, ymin, xmax, ymax] if xmin < xmax && ymin < ymax => Some(Self { xmin, ymin, xmax, ymax }),
            _ => None,
        }
    }

    /// Smallest window containing all finite-vertex images, padded by 1.
    pub fn around(c: &ParamTropCurve) -> Self {
        let pts: Vec<(f64, f64)> = (0..c.graph.n_finite()).map(|v| c.h[v].to_f64()).collect();
        let (mut xmin, mut ymin, mut xmax, mut ymax) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        if let Some(&(x, y)) = pts.first() {
            (xmin, ymin, xmax, ymax) = (x, y, x, y);
        }
        for &(x, y) in &pts {
            xmin = xmin.min(x);
            ymin = ymin.min(y);
            xmax = xmax.max(x);
            ymax = ymax.max(y);
        }
        Self { xmin: xmin - 1.0, ymin: ymin - 1.0, xmax: xmax + 1.0, ymax: ymax + 1.0 }
    }

    /// Liang-Barsky clip of `p + t d`, `t` in `[t0, t1]` (`t1` may be infinite).
    fn clip(&self, p: (f64, f64), d: (f64, f64), t0: f64, t1: f64) -> Option<((f64, f64), (f64, f64))> {
        let (mut lo, mut hi) = (t0, t1);
        for (dp, q) in [(-d.0, p.0 - self.xmin), (d.0, self.xmax - p.0), (-d.1, p.1 - self.ymin), (d.1, self.ymax - p.1)] {
            if dp == 0.0 {
                if q < 0.0 {
                    return None;
                }
            } else {
                let r = q / dp;
                if dp < 0.0 {
                    lo = lo.max(r);
                } else {
                    hi = hi.min(r);
                }
            }
        }
        (lo <= hi && hi.is_finite()).then_some(((p.0 + lo * d.0, p.1 + lo * d.1), (p.0 + hi * d.0, p.1 + hi * d.1)))
    }

    fn contains(&self, p: (f64, f64)) -> bool {
        self.xmin <= p.0 && p.0 <= self.xmax && self.ymin <= p.1 && p.1 <= self.ymax
    }
}

/// SVG drawing of `image_segments`, rays clipped to `bbox`. The y axis points up.
pub fn to_svg(c: &ParamTropCurve, bbox: &BBox) -> String {
    let w = bbox.xmax - bbox.xmin;
    let h = bbox.ymax - bbox.ymin;
    let scale = 400.0 / w.max(h);
    let tx = |x: f64| (x - bbox.xmin) * scale;
    let ty = |y: f64| (bbox.ymax - y) * scale;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.2}" height="{:.2}" viewBox="0 0 {:.2} {:.2}">"#,
        w * scale,
        h * scale,
        w * scale,
        h * scale
    );
    let mut line = |a: (f64, f64), b: (f64, f64), class: &str| {
        let _ = writeln!(
            s,
            r#"  <line class="{class}" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black" stroke-width="2"/>"#,
            tx(a.0),
            ty(a.1),
            tx(b.0),
            ty(b.1)
        );
    };
    let mut points = Vec::new();
    for el in image_segments(c) {
        match el {
            ImageElement::Segment(a, b) => {
                let (pa, pb) = (a.to_f64(), b.to_f64());
                if let Some((u, v)) = bbox.clip(pa, (pb.0 - pa.0, pb.1 - pa.1), 0.0, 1.0) {
                    line(u, v, "bounded");
                }
            }
            ImageElement::Ray { start, direction } => {
                let p = start.to_f64();
                let d = (direction.x as f64, direction.y as f64);
                if let Some((u, v)) = bbox.clip(p, d, 0.0, f64::INFINITY) {
                    line(u, v, "ray");
                }
            }
            ImageElement::Point(p) => points.push(p.to_f64()),
        }
    }
    for v in 0..c.graph.n_finite() {
        points.push(c.h[v].to_f64());
    }
    for p in points {
        if bbox.contains(p) {
            let _ = writeln!(s, r#"  <circle cx="{:.3}" cy="{:.3}" r="4" fill="black"/>"#, tx(p.0), ty(p.1));
        }
    }
    s.push_str("</svg>\n");
    s
}

fn id_from_json(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn length_from_json(v: &Value) -> Option<EdgeLength> {
    match v {
        Value::String(s) if s.trim().eq_ignore_ascii_case("inf") => Some(EdgeLength::Infinite),
        Value::String(s) => parse_rational(s).ok().map(EdgeLength::Finite),
        other => crate::arith::rational_from_json(other).map(EdgeLength::Finite),
    }
}

impl ParamTropCurve {
    /// Reads the `tropcurve.json` layout.
    pub fn from_json(v: &Value) -> Result<Self, CurveError> {
        let bad = |m: &str| CurveError::Json(m.to_string());
        let ids = |key: &str| -> Result<Vec<String>, CurveError> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| bad(&format!("missing array {key:?}")))?
                .iter()
                .map(|x| id_from_json(x).ok_or_else(|| bad(&format!("bad vertex id in {key:?}"))))
                .collect()
        };
        let finite = ids("finite")?;
        let infinite = ids("infinite")?;
        let lookup = |name: &str| -> Result<usize, CurveError> {
            finite
                .iter()
                .position(|n| n == name)
                .or_else(|| infinite.iter().position(|n| n == name).map(|i| i + finite.len()))
                .ok_or_else(|| CurveError::UnknownVertex(name.to_string()))
        };
        let mut edges = Vec::new();
        for e in v.get("edges").and_then(Value::as_array).ok_or_else(|| bad("missing array \"edges\""))? {
            let parts = e.as_array().filter(|p| p.len() == 3).ok_or_else(|| bad("edges must be [u, v, length]"))?;
            let a = lookup(&id_from_json(&parts[0]).ok_or_else(|| bad("bad edge endpoint"))?)?;
            let b = lookup(&id_from_json(&parts[1]).ok_or_else(|| bad("bad edge endpoint"))?)?;
            let length = length_from_json(&parts[2]).ok_or_else(|| bad("bad edge length"))?;
            edges.push(Edge { a, b, length });
        }
        let graph = TropicalGraph::new(finite, infinite, edges)?;
        let hmap = v.get("h").and_then(Value::as_object).ok_or_else(|| bad("missing object \"h\""))?;
        for key in hmap.keys() {
            if graph.index_of(key).is_none() {
                return Err(CurveError::UnknownVertex(key.clone()));
            }
        }
        let mut h = Vec::with_capacity(graph.n_vertices());
        for i in 0..graph.n_vertices() {
            let name = graph.name(i);
            let p = hmap.get(name).ok_or_else(|| CurveError::MissingPosition(name.to_string()))?;
            h.push(RatVec::from_json(p).ok_or_else(|| bad(&format!("bad position for {name:?}")))?);
        }
        Self::new(graph, h)
    }

    pub fn to_json(&self) -> Value {
        let g = &self.graph;
        let edges: Vec<Value> = g
            .edges
            .iter()
            .map(|e| {
                let len = match &e.length {
                    EdgeLength::Finite(l) => json!(l.to_string()),
                    EdgeLength::Infinite => json!("inf"),
                };
                json!([g.name(e.a), g.name(e.b), len])
            })
            .collect();
        let mut h = Map::new();
        for v in 0..g.n_vertices() {
            h.insert(g.name(v).to_string(), self.h[v].to_pair_json());
        }
        json!({"finite": g.finite, "infinite": g.infinite, "edges": edges, "h": h})
    }
}

/// Reported per-edge data, used by the CLI `degree` view and by reports.
pub fn edge_report(c: &ParamTropCurve) -> Value {
    let g = &c.graph;
    json!((0..g.edges().len())
        .map(|e| {
            let ed = g.edge(e);
            let data = edge_data(c, e).ok();
            json!({
                "edge": e,
                "u": g.name(ed.a),
                "v": g.name(ed.b),
                "length": match &ed.length { EdgeLength::Finite(l) => rational_json(l), EdgeLength::Infinite => json!("inf") },
                "multiplicity": data.map(|d| d.multiplicity),
                "generator": data.and_then(|d| d.generator).map(|n| json!([n.x, n.y])),
            })
        })
        .collect::<Vec<_>>())
}

/// Small reference curves used by tests, reports and the CLI demos.
pub mod samples {
    use super::*;
    use crate::arith::q;

    fn fin(a: usize, b: usize, l: i64) -> Edge {
        Edge { a, b, length: EdgeLength::Finite(q(l)) }
    }

    fn inf(a: usize, b: usize) -> Edge {
        Edge { a, b, length: EdgeLength::Infinite }
    }

    /// A marked line with two finite vertices `vL` (at the origin) and `vE`
    /// (at `(0,-1)`) joined by an edge of length 1, and four ends with
    /// vectors `(0,0), (0,1)` at `vL` and `(-1,-1), (1,0)` at `vE`.
    pub fn marked_line() -> ParamTropCurve {
        let graph = TropicalGraph::new(
            vec!["vL".into(), "vE".into()],
            vec!["q1".into(), "q2".into(), "q3".into(), "q4".into()],
            vec![fin(0, 1, 1), inf(0, 2), inf(0, 3), inf(1, 4), inf(1, 5)],
        )
        .unwrap();
        let h = vec![
            RatVec::from_ints(0, 0),
            RatVec::from_ints(0, -1),
            RatVec::from_ints(0, 0),
            RatVec::from_ints(0, 1),
            RatVec::from_ints(-1, -1),
            RatVec::from_ints(1, 0),
        ];
        ParamTropCurve::new(graph, h).unwrap()
    }

    /// One trivalent vertex at the origin with ends `(0,1), (-1,-1), (1,0)`.
    pub fn tropical_line() -> ParamTropCurve {
        let graph = TropicalGraph::from_counts(1, 3, vec![inf(0, 1), inf(0, 2), inf(0, 3)]).unwrap();
        let h = vec![
            RatVec::from_ints(0, 0),
            RatVec::from_ints(0, 1),
            RatVec::from_ints(-1, -1),
            RatVec::from_ints(1, 0),
        ];
        ParamTropCurve::new(graph, h).unwrap()
    }

    /// A single finite vertex and nothing else.
    pub fn lone_vertex() -> ParamTropCurve {
        ParamTropCurve::new(TropicalGraph::from_counts(1, 0, vec![]).unwrap(), vec![RatVec::zero()]).unwrap()
    }

    /// A vertex carrying a loop of length 1 and a contracted end.
    pub fn looped_vertex() -> ParamTropCurve {
        let graph = TropicalGraph::from_counts(1, 1, vec![fin(0, 0, 1), inf(0, 1)]).unwrap();
        ParamTropCurve::new(graph, vec![RatVec::zero(), RatVec::zero()]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::samples::*;
    use super::*;
    use crate::arith::{q, q_frac};

    fn lv(x: i64, y: i64) -> LatticeVec {
        LatticeVec::new(x, y)
    }

    #[test]
    fn marked_line_is_valid() {
        let c = marked_line();
        assert!(validate(&c).is_valid(), "{:?}", validate(&c));
        assert_eq!(genus(&c.graph), 0);
        assert!(is_stable(&c.graph));
    }

    #[test]
    fn moved_vertex_breaks_balancing() {
        let mut c = marked_line();
        c.h[1] = RatVec::from_ints(0, -2);
        let report = validate(&c);
        let unbalanced: Vec<_> = report
            .violations
            .iter()
            .filter_map(|v| match v {
                Violation::Unbalanced { vertex, .. } => Some(vertex.as_str()),
                _ => None,
            })
            .collect();
        assert!(unbalanced.contains(&"vL"));
        assert!(report.violations.iter().all(|v| v.clause() == "3"));
    }

    #[test]
    fn lone_vertex_is_valid() {
        assert!(validate(&lone_vertex()).is_valid());
        assert!(image_segments(&lone_vertex()).is_empty());
        assert_eq!(genus(&lone_vertex().graph), 0);
    }

    #[test]
    fn structural_violations() {
        // infinite vertex with two edges, a finite-length unbounded edge, a zero-length edge
        let graph = TropicalGraph::from_counts(
            2,
            1,
            vec![
                Edge { a: 0, b: 2, length: EdgeLength::Infinite },
                Edge { a: 1, b: 2, length: EdgeLength::Finite(q(1)) },
                Edge { a: 0, b: 1, length: EdgeLength::Finite(q(0)) },
            ],
        )
        .unwrap();
        let c = ParamTropCurve::new(graph, vec![RatVec::zero(), RatVec::zero(), RatVec::new(q_frac(1, 2), q(0))]).unwrap();
        let clauses: BTreeSet<_> = validate(&c).violations.iter().map(|v| v.clause()).collect();
        assert!(clauses.contains("p2"));
        assert!(clauses.contains("p3"));
        assert!(clauses.contains("1"));
    }

    #[test]
    fn non_integral_edge_is_reported() {
        let mut c = marked_line();
        if let EdgeLength::Finite(l) = &mut c.graph.edges[0].length {
            *l = q(2);
        }
        let report = validate(&c);
        assert!(report.violations.iter().any(|v| v.clause() == "2"));
    }

    #[test]
    fn genus_and_stability() {
        let loop1 = TropicalGraph::from_counts(1, 0, vec![Edge { a: 0, b: 0, length: EdgeLength::Finite(q(1)) }]).unwrap();
        assert_eq!(genus(&loop1), 1);
        let theta = TropicalGraph::from_counts(
            2,
            0,
            (0..3).map(|_| Edge { a: 0, b: 1, length: EdgeLength::Finite(q(1)) }).collect(),
        )
        .unwrap();
        assert_eq!(genus(&theta), 2);
        assert!(is_stable(&looped_vertex().graph));
        let path = TropicalGraph::from_counts(
            1,
            2,
            vec![Edge { a: 0, b: 1, length: EdgeLength::Infinite }, Edge { a: 0, b: 2, length: EdgeLength::Infinite }],
        )
        .unwrap();
        assert!(!is_stable(&path));
    }

    #[test]
    fn edge_data_cases() {
        let c = marked_line();
        assert_eq!(edge_data(&c, 0).unwrap(), EdgeData { multiplicity: 1, generator: Some(lv(0, 1)) });
        assert_eq!(edge_data(&c, 1).unwrap(), EdgeData { multiplicity: 0, generator: None });
        let graph = TropicalGraph::from_counts(2, 0, vec![Edge { a: 0, b: 1, length: EdgeLength::Finite(q(1)) }]).unwrap();
        let c2 = ParamTropCurve::new(graph, vec![RatVec::from_ints(3, 3), RatVec::from_ints(1, -1)]).unwrap();
        assert_eq!(edge_data(&c2, 0).unwrap(), EdgeData { multiplicity: 2, generator: Some(lv(1, 2)) });
    }

    #[test]
    fn degrees() {
        let c = marked_line();
        assert_eq!(degree(&c).unwrap(), vec![(lv(-1, -1), 1), (lv(0, 1), 1), (lv(1, 0), 1)]);
        assert!(degree(&looped_vertex()).unwrap().is_empty());
        // two parallel ends of multiplicities 2 and 3, balanced by one end (-5, 0)
        let graph = TropicalGraph::from_counts(
            1,
            3,
            (1..4).map(|i| Edge { a: 0, b: i, length: EdgeLength::Infinite }).collect(),
        )
        .unwrap();
        let c3 = ParamTropCurve::new(
            graph,
            vec![RatVec::zero(), RatVec::from_ints(2, 0), RatVec::from_ints(3, 0), RatVec::from_ints(-5, 0)],
        )
        .unwrap();
        assert!(validate(&c3).is_valid());
        assert_eq!(degree(&c3).unwrap(), vec![(lv(-1, 0), 5), (lv(1, 0), 5)]);
    }

    #[test]
    fn types_under_translation_and_relabelling() {
        let c = marked_line();
        let t = c.translated(&RatVec::from_ints(5, 7));
        assert_eq!(combinatorial_type(&c).unwrap(), combinatorial_type(&t).unwrap());
        // swap the two finite vertices
        let g = &c.graph;
        let swap = |x: usize| match x {
            0 => 1,
            1 => 0,
            x => x,
        };
        let edges: Vec<Edge> = g.edges().iter().rev().map(|e| Edge { a: swap(e.b), b: swap(e.a), length: e.length.clone() }).collect();
        let graph = TropicalGraph::new(vec!["vE".into(), "vL".into()], g.infinite_names().to_vec(), edges).unwrap();
        let mut h = c.h.clone();
        h.swap(0, 1);
        let relabelled = ParamTropCurve::new(graph, h).unwrap();
        assert!(validate(&relabelled).is_valid());
        assert_eq!(combinatorial_type(&c).unwrap(), combinatorial_type(&relabelled).unwrap());
    }

    #[test]
    fn different_bounded_slope_gives_different_type() {
        let c = marked_line();
        // vE moved to (1,0) with ends re-chosen so both vertices balance
        let mut h = c.h.clone();
        h[1] = RatVec::from_ints(1, 0);
        h[3] = RatVec::from_ints(-1, 0);
        h[4] = RatVec::from_ints(1, 1);
        h[5] = RatVec::from_ints(0, -1);
        let other = ParamTropCurve::new(c.graph.clone(), h).unwrap();
        assert!(validate(&other).is_valid(), "{:?}", validate(&other));
        assert_ne!(combinatorial_type(&c).unwrap(), combinatorial_type(&other).unwrap());
    }

    #[test]
    fn canonical_form_of_symmetric_graph() {
        // 4-cycle with one end per vertex, given with two different labellings
        let a = DecoratedGraph {
            n_finite: 4,
            ends: vec![(0, None, lv(1, 0)), (1, None, lv(0, 1)), (2, None, lv(-1, 0)), (3, None, lv(0, -1))],
            edges: vec![(0, 1, lv(1, 1)), (1, 2, lv(1, -1)), (2, 3, lv(1, 1)), (3, 0, lv(-1, 1))],
        };
        let perm = [2, 0, 3, 1];
        let b = DecoratedGraph {
            n_finite: 4,
            ends: a.ends.iter().map(|&(v, o, n)| (perm[v], o, n)).collect(),
            edges: a.edges.iter().map(|&(u, v, n)| (perm[v], perm[u], -n)).collect(),
        };
        assert_eq!(a.canonical_form(EndLabelling::ByDecoration), b.canonical_form(EndLabelling::ByDecoration));
        let mut c = a.clone();
        c.edges[0].2 = lv(2, 1);
        assert_ne!(a.canonical_form(EndLabelling::ByDecoration), c.canonical_form(EndLabelling::ByDecoration));
    }

    #[test]
    fn image_of_marked_line() {
        let img = image_segments(&marked_line());
        assert_eq!(img[0], ImageElement::Segment(RatVec::from_ints(0, 0), RatVec::from_ints(0, -1)));
        assert_eq!(img[1], ImageElement::Point(RatVec::zero()));
        assert_eq!(img[2], ImageElement::Ray { start: RatVec::zero(), direction: lv(0, 1) });
        assert_eq!(img[3], ImageElement::Ray { start: RatVec::from_ints(0, -1), direction: lv(-1, -1) });
        assert_eq!(img[4], ImageElement::Ray { start: RatVec::from_ints(0, -1), direction: lv(1, 0) });
    }

    #[test]
    fn json_round_trip() {
        let c = marked_line();
        let back = ParamTropCurve::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        let mut v = c.to_json();
        v["h"].as_object_mut().unwrap().remove("vE");
        assert_eq!(ParamTropCurve::from_json(&v), Err(CurveError::MissingPosition("vE".into())));
    }

    #[test]
    fn subdivision_keeps_validity_and_genus() {
        let c = marked_line();
        let (d, w) = c.subdivide_bounded(0, &q_frac(1, 3)).unwrap();
        assert!(validate(&d).is_valid());
        assert_eq!(genus(&d.graph), genus(&c.graph));
        assert_eq!(d.h[w], RatVec::new(q(0), q_frac(-1, 3)));
        let (e, w2) = c.subdivide_unbounded(2, &q(2)).unwrap();
        assert!(validate(&e).is_valid());
        assert_eq!(e.h[w2], RatVec::from_ints(0, 2));
        let (f, inf) = e.attach_contracted_end(w2, 0, "m1").unwrap();
        assert!(validate(&f).is_valid());
        assert_eq!(f.graph.n_infinite(), 5);
        assert_eq!(inf, f.graph.infinite_vertex(0));
        assert!(is_stable(&f.graph));
    }

    #[test]
    fn svg_is_deterministic_and_clipped() {
        let c = marked_line();
        let bbox = BBox::parse("-2,-3,2,2").unwrap();
        let s1 = to_svg(&c, &bbox);
        assert_eq!(s1, to_svg(&c, &bbox));
        assert_eq!(s1.matches("<line").count(), 4);
        assert!(s1.starts_with("<svg"));
        assert!(BBox::parse("1,1,0,0").is_none());
    }
}
