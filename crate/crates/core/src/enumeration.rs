//! Enumeration of combinatorial types of stable parameterized tropical curves
//! with a given degree and genus and a bounded number of ends.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Mutex, OnceLock};

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::arith::{q, RatVec, Q};
use crate::lattice_toric::{edge_degrees, LatticePolygon, LatticeVec};
use crate::linalg::{strictly_positive_kernel_vector, Matrix};
use crate::tropical_curve::{CombinatorialType, DecoratedGraph, Edge, EdgeLength, EndLabelling, ParamTropCurve, TropicalGraph};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnumerationError {
    #[error("invalid degree: {0}")]
    InvalidDegree(String),
    #[error("edge bound {bound} exceeds the limit {limit}; pass an override to run anyway")]
    EdgeBoundTooLarge { bound: usize, limit: usize },
    #[error("budget exhausted after {examined} of {total} candidate graphs; {partial_count} types found so far")]
    BudgetExhausted { partial_count: usize, examined: usize, total: usize },
    #[error("the end bound r must be positive")]
    ZeroEndBound,
    #[error("job count must be at least 1")]
    ZeroJobs,
    #[error("could not start worker threads: {0}")]
    ThreadPool(String),
}

/// Degree of a curve: primitive directions with positive multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegreeSpec {
    entries: Vec<(LatticeVec, u64)>,
}

impl DegreeSpec {
    pub fn new(mut entries: Vec<(LatticeVec, u64)>) -> Result<Self, EnumerationError> {
        entries.sort();
        let mut sum = LatticeVec::ZERO;
        for (i, &(n, d)) in entries.iter().enumerate() {
            if !n.is_primitive() {
                return Err(EnumerationError::InvalidDegree(format!("{n} is not primitive")));
            }
            if d == 0 {
                return Err(EnumerationError::InvalidDegree(format!("multiplicity of {n} is zero")));
            }
            if i > 0 && entries[i - 1].0 == n {
                return Err(EnumerationError::InvalidDegree(format!("{n} appears twice")));
            }
            sum = sum + n.scale(d as i64);
        }
        if !sum.is_zero() {
            return Err(EnumerationError::InvalidDegree(format!("sum of d*n is {sum}, not zero")));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(LatticeVec, u64)] {
        &self.entries
    }

    /// `{(0,1):1, (-1,-1):1, (1,0):1}`.
    pub fn line() -> Self {
        Self::new(vec![(LatticeVec::new(0, 1), 1), (LatticeVec::new(-1, -1), 1), (LatticeVec::new(1, 0), 1)]).unwrap()
    }

    /// Rays of the dual fan with the integral lengths of the dual edges.
    pub fn of_polygon(p: &LatticePolygon) -> Self {
        Self::new(edge_degrees(p)).expect("polygon boundary closes up")
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Accepts `[{"n": [x, y], "d": k}, ...]`, `[[[x, y], k], ...]`, or either
    /// wrapped as `{"entries": ...}`.
    pub fn from_json(v: &Value) -> Result<Self, EnumerationError> {
        let bad = |m: &str| EnumerationError::InvalidDegree(m.to_string());
        let list = match v {
            Value::Object(m) => m.get("entries").and_then(Value::as_array).ok_or_else(|| bad("expected an \"entries\" array"))?,
            Value::Array(a) => a,
            _ => return Err(bad("expected a list of entries")),
        };
        let vec_of = |x: &Value| -> Option<LatticeVec> {
            let a = x.as_array()?;
            (a.len() == 2).then_some(())?;
            Some(LatticeVec::new(a[0].as_i64()?, a[1].as_i64()?))
        };
        let mut entries = Vec::new();
        for item in list {
            let (n, d) = match item {
                Value::Object(m) => (m.get("n").and_then(vec_of), m.get("d").and_then(Value::as_u64)),
                Value::Array(a) if a.len() == 2 => (vec_of(&a[0]), a[1].as_u64()),
                _ => (None, None),
            };
            entries.push((n.ok_or_else(|| bad("entry without a vector"))?, d.ok_or_else(|| bad("entry without a multiplicity"))?));
        }
        Self::new(entries)
    }

    pub fn to_json(&self) -> Value {
        json!(self.entries.iter().map(|(n, d)| json!({"n": [n.x, n.y], "d": d})).collect::<Vec<_>>())
    }
}

/// Lemma-style budget: at most `r - 1` ends and fewer than `2r + 3g - 3` edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub genus: usize,
    pub end_bound: usize,
    pub edge_bound: usize,
}

impl EnumerationBudget {
    pub fn new(genus: usize, end_bound: usize) -> Self {
        Self { genus, end_bound, edge_bound: (2 * end_bound + 3 * genus).saturating_sub(4) }
    }
}

pub const DEFAULT_EDGE_LIMIT: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationOptions {
    /// Maximum number of contracted ends that may be added.
    pub allow_contracted: usize,
    pub jobs: usize,
    /// Stop after this many candidate graphs (with attached ends).
    pub max_candidates: Option<usize>,
    /// Permit edge bounds above [`DEFAULT_EDGE_LIMIT`].
    pub allow_large: bool,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self { allow_contracted: 0, jobs: 1, max_candidates: None, allow_large: false }
    }
}

#[derive(Debug, Clone)]
pub struct EnumeratedType {
    pub ty: CombinatorialType,
    pub witness: ParamTropCurve,
}

#[derive(Debug, Clone)]
pub struct EnumerationResult {
    pub budget: EnumerationBudget,
    /// Sorted by canonical form.
    pub types: Vec<EnumeratedType>,
    /// Balanced types for which no positive edge lengths exist.
    pub discarded: usize,
    pub candidate_graphs: usize,
    pub flows_checked: usize,
}

impl EnumerationResult {
    pub fn count(&self) -> usize {
        self.types.len()
    }

    pub fn type_set(&self) -> BTreeSet<CombinatorialType> {
        self.types.iter().map(|t| t.ty.clone()).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "genus": self.budget.genus,
            "end_bound": self.budget.end_bound,
            "edge_bound": self.budget.edge_bound,
            "count": self.count(),
            "discarded": self.discarded,
            "candidate_graphs": self.candidate_graphs,
            "flows_checked": self.flows_checked,
            "types": self.types.iter().map(|t| json!({"type": t.ty.to_json(), "witness": t.witness.to_json()})).collect::<Vec<_>>(),
        })
    }
}

/// All partitions of `n` into positive parts, parts nonincreasing.
pub fn partitions(n: u64) -> Vec<Vec<u64>> {
    fn rec(n: u64, max: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=n.min(max)).rev() {
            cur.push(p);
            rec(n - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Every end multiset: each `d_k` split into parallel ends, plus `0..=k`
/// contracted ends, keeping fewer than `r` ends. Each list is sorted.
pub fn end_multisets(d: &DegreeSpec, r: usize, allow_contracted: usize) -> Vec<Vec<LatticeVec>> {
    let mut acc: Vec<Vec<LatticeVec>> = vec![Vec::new()];
    for &(n, m) in d.entries() {
        let mut next = Vec::new();
        for base in &acc {
            for p in partitions(m) {
                let mut v = base.clone();
                v.extend(p.iter().map(|&k| n.scale(k as i64)));
                if v.len() < r {
                    next.push(v);
                }
            }
        }
        acc = next;
    }
    let mut out = Vec::new();
    for base in acc {
        for c in 0..=allow_contracted {
            if base.len() + c >= r {
                break;
            }
            let mut v = base.clone();
            v.extend(std::iter::repeat_n(LatticeVec::ZERO, c));
            v.sort();
            out.push(v);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// A connected multigraph on `n` finite vertices with ends attached.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Candidate {
    n: usize,
    edges: Vec<(usize, usize)>,
    ends: Vec<(usize, LatticeVec)>,
}

/// Labelled trees on `n` vertices, from Prüfer sequences.
fn labelled_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    match n {
        0 | 1 => return vec![Vec::new()],
        2 => return vec![vec![(0, 1)]],
        _ => {}
    }
    let mut out = Vec::new();
    let len = n - 2;
    let mut seq = vec![0usize; len];
    loop {
        let mut degree = vec![1usize; n];
        for &s in &seq {
            degree[s] += 1;
        }
        let mut edges = Vec::with_capacity(n - 1);
        for &s in &seq {
            let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
            edges.push((leaf.min(s), leaf.max(s)));
            degree[leaf] -= 1;
            degree[s] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        edges.push((rest[0], rest[1]));
        out.push(edges);
        // odometer
        let mut i = 0;
        loop {
            if i == len {
                return out;
            }
            seq[i] += 1;
            if seq[i] < n {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}

/// Nondecreasing sequences of length `k` over the vertex pairs `(i <= j)`.
fn extra_edge_choices(n: usize, k: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    fn rec(pairs: &[(usize, usize)], start: usize, k: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if k == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..pairs.len() {
            cur.push(pairs[i]);
            rec(pairs, i, k - 1, cur, out);
            cur.pop();
        }
    }
    rec(&pairs, 0, k, &mut Vec::new(), &mut out);
    out
}

fn bare_key(n: usize, edges: &[(usize, usize)]) -> CombinatorialType {
    DecoratedGraph { n_finite: n, ends: Vec::new(), edges: edges.iter().map(|&(a, b)| (a, b, LatticeVec::ZERO)).collect() }
        .canonical_form(EndLabelling::ByDecoration)
}

fn attached_key(c: &Candidate) -> CombinatorialType {
    DecoratedGraph {
        n_finite: c.n,
        ends: c.ends.iter().map(|&(v, n)| (v, None, n)).collect(),
        edges: c.edges.iter().map(|&(a, b)| (a, b, LatticeVec::ZERO)).collect(),
    }
    .canonical_form(EndLabelling::ByDecoration)
}

/// Assign the sorted `ends` to vertices so every vertex reaches valency 3.
/// Equal consecutive ends go to nondecreasing vertices.
fn attachments(ends: &[LatticeVec], bounded_degree: &[usize]) -> Vec<Vec<usize>> {
    let n = bounded_degree.len();
    let mut out = Vec::new();
    fn rec(
        i: usize,
        ends: &[LatticeVec],
        deg: &mut Vec<usize>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        n: usize,
    ) {
        let remaining = ends.len() - i;
        let deficit: usize = deg.iter().map(|&d| 3usize.saturating_sub(d)).sum();
        if deficit > remaining {
            return;
        }
        if i == ends.len() {
            out.push(cur.clone());
            return;
        }
        let start = if i > 0 && ends[i] == ends[i - 1] { cur[i - 1] } else { 0 };
        for v in start..n {
            deg[v] += 1;
            cur.push(v);
            rec(i + 1, ends, deg, cur, out, n);
            cur.pop();
            deg[v] -= 1;
        }
    }
    let mut deg = bounded_degree.to_vec();
    rec(0, ends, &mut deg, &mut Vec::new(), &mut out, n);
    out
}

fn candidates(ends: &[LatticeVec], genus: usize) -> Vec<Candidate> {
    let n_ends = ends.len();
    let max_v = (n_ends + 2 * genus) as i64 - 2;
    let mut out = Vec::new();
    let mut seen: BTreeSet<CombinatorialType> = BTreeSet::new();
    for nv in 1..=max_v.max(0) as usize {
        let ne = nv + genus - 1;
        if 2 * ne + n_ends < 3 * nv {
            continue;
        }
        let mut bare_seen: BTreeSet<CombinatorialType> = BTreeSet::new();
        let extras = extra_edge_choices(nv, genus);
        for tree in labelled_trees(nv) {
            for extra in &extras {
                let mut edges = tree.clone();
                edges.extend(extra.iter().copied());
                if !bare_seen.insert(bare_key(nv, &edges)) {
                    continue;
                }
                let mut deg = vec![0usize; nv];
                for &(a, b) in &edges {
                    deg[a] += 1;
                    deg[b] += 1;
                }
                for att in attachments(ends, &deg) {
                    let cand = Candidate { n: nv, edges: edges.clone(), ends: att.iter().copied().zip(ends.iter().copied()).collect() };
                    if seen.insert(attached_key(&cand)) {
                        out.push(cand);
                    }
                }
            }
        }
    }
    out
}

#[derive(Default)]
struct Outcome {
    realized: Vec<(CombinatorialType, ParamTropCurve)>,
    unrealizable: Vec<CombinatorialType>,
    flows: usize,
}

/// Upper bounds on `|w_x|` and `|w_y|` for any edge of a realizable curve:
/// the total positive end mass in each coordinate.
pub fn flow_box(ends: &[LatticeVec]) -> (i64, i64) {
    (ends.iter().map(|e| e.x.max(0)).sum(), ends.iter().map(|e| e.y.max(0)).sum())
}

fn process(c: &Candidate, genus: usize, bx: (i64, i64)) -> Outcome {
    let n = c.n;
    let ne = c.edges.len();
    // BFS spanning tree from vertex 0
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut order = vec![0usize];
    let mut visited = vec![false; n];
    visited[0] = true;
    let mut in_tree = vec![false; ne];
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for (e, &(a, b)) in c.edges.iter().enumerate() {
            if a == b {
                continue;
            }
            let other = if a == v { b } else if b == v { a } else { continue };
            if !visited[other] {
                visited[other] = true;
                parent[other] = Some((e, v));
                in_tree[e] = true;
                order.push(other);
            }
        }
    }
    debug_assert!(visited.iter().all(|&x| x), "candidate graphs are connected");
    let chords: Vec<usize> = (0..ne).filter(|&e| !in_tree[e] && c.edges[e].0 != c.edges[e].1).collect();
    debug_assert!(chords.len() <= genus);
    let options: Vec<LatticeVec> = (-bx.0..=bx.0).flat_map(|x| (-bx.1..=bx.1).map(move |y| LatticeVec::new(x, y))).collect();
    let mut base_ex = vec![LatticeVec::ZERO; n];
    for &(v, w) in &c.ends {
        base_ex[v] = base_ex[v] + w;
    }
    // coefficient of each edge in h(v) along the tree path (as oriented flow)
    let mut out = Outcome::default();
    let mut realized: BTreeMap<CombinatorialType, ParamTropCurve> = BTreeMap::new();
    let mut unreal: BTreeSet<CombinatorialType> = BTreeSet::new();
    let mut idx = vec![0usize; chords.len()];
    loop {
        out.flows += 1;
        let mut w = vec![LatticeVec::ZERO; ne];
        let mut ex = base_ex.clone();
        for (k, &e) in chords.iter().enumerate() {
            let (a, b) = c.edges[e];
            w[e] = options[idx[k]];
            ex[a] = ex[a] + w[e];
            ex[b] = ex[b] - w[e];
        }
        let mut ok = true;
        for &v in order.iter().skip(1).rev() {
            let (e, p) = parent[v].unwrap();
            let flow = ex[v]; // from p to v
            if flow.x.abs() > bx.0 || flow.y.abs() > bx.1 {
                ok = false;
                break;
            }
            w[e] = if c.edges[e].0 == p { flow } else { -flow };
            ex[p] = ex[p] + flow;
        }
        if ok {
            debug_assert!(ex[0].is_zero());
            let dg = DecoratedGraph {
                n_finite: n,
                ends: c.ends.iter().map(|&(v, x)| (v, None, x)).collect(),
                edges: c.edges.iter().zip(&w).map(|(&(a, b), &x)| (a, b, x)).collect(),
            };
            let ty = dg.canonical_form(EndLabelling::ByDecoration);
            if let std::collections::btree_map::Entry::Vacant(slot) = realized.entry(ty) {
                match realize(c, &w, &parent, &order) {
                    Some(curve) => {
                        unreal.remove(slot.key());
                        slot.insert(curve);
                    }
                    None => {
                        unreal.insert(slot.into_key());
                    }
                }
            }
        }
        // odometer over chord options
        let mut k = 0;
        loop {
            if k == idx.len() {
                out.realized = realized.into_iter().collect();
                out.unrealizable = unreal.into_iter().collect();
                return out;
            }
            idx[k] += 1;
            if idx[k] < options.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Finds positive lengths making the flows `w` the edge vectors of a curve:
/// unit lengths when every cycle closes up, otherwise a positive kernel vector.
fn realize(c: &Candidate, w: &[LatticeVec], parent: &[Option<(usize, usize)>], order: &[usize]) -> Option<ParamTropCurve> {
    let n = c.n;
    let ne = c.edges.len();
    // path coefficients: h(v) = sum_e coef[v][e] * len_e
    let mut coef: Vec<Vec<LatticeVec>> = vec![vec![LatticeVec::ZERO; ne]; n];
    for &v in order.iter().skip(1) {
        let (e, p) = parent[v].unwrap();
        let mut row = coef[p].clone();
        let (a, _) = c.edges[e];
        row[e] = if a == p { w[e] } else { -w[e] };
        coef[v] = row;
    }
    let tree_edges: BTreeSet<usize> = parent.iter().flatten().map(|&(e, _)| e).collect();
    let mut rows: Vec<Vec<Q>> = Vec::new();
    let mut unit_ok = true;
    for e in 0..ne {
        let (a, b) = c.edges[e];
        if tree_edges.contains(&e) || a == b {
            continue;
        }
        // h(b) - h(a) - len_e * w_e = 0
        let mut cx = vec![0i64; ne];
        let mut cy = vec![0i64; ne];
        for f in 0..ne {
            cx[f] = coef[b][f].x - coef[a][f].x;
            cy[f] = coef[b][f].y - coef[a][f].y;
        }
        cx[e] -= w[e].x;
        cy[e] -= w[e].y;
        if cx.iter().sum::<i64>() != 0 || cy.iter().sum::<i64>() != 0 {
            unit_ok = false;
        }
        rows.push(cx.into_iter().map(q).collect());
        rows.push(cy.into_iter().map(q).collect());
    }
    let lengths: Vec<Q> = if unit_ok {
        vec![Q::one(); ne]
    } else {
        strictly_positive_kernel_vector(&Matrix::from_rows(ne, rows))?
    };
    let mut h: Vec<RatVec> = (0..n)
        .map(|v| {
            let mut x = Q::zero();
            let mut y = Q::zero();
            for e in 0..ne {
                let k = coef[v][e];
                if !k.is_zero() {
                    x += &lengths[e] * q(k.x);
                    y += &lengths[e] * q(k.y);
                }
            }
            RatVec::new(x, y)
        })
        .collect();
    let mut edges: Vec<Edge> = c.edges.iter().zip(&lengths).map(|(&(a, b), l)| Edge { a, b, length: EdgeLength::Finite(l.clone()) }).collect();
    for (i, &(v, x)) in c.ends.iter().enumerate() {
        edges.push(Edge { a: v, b: n + i, length: EdgeLength::Infinite });
        h.push(RatVec::from(x));
    }
    let graph = TropicalGraph::from_counts(n, c.ends.len(), edges).ok()?;
    let curve = ParamTropCurve::new(graph, h).ok()?;
    debug_assert!(crate::tropical_curve::validate(&curve).is_valid());
    debug_assert!(lengths.iter().all(|l| l.is_positive()));
    Some(curve)
}

/// All combinatorial types of stable curves of degree `d` (plus permitted
/// contracted ends), genus `g`, and fewer than `r` ends.
pub fn enumerate_types(d: &DegreeSpec, g: usize, r: usize, opts: &EnumerationOptions) -> Result<EnumerationResult, EnumerationError> {
    if r == 0 {
        return Err(EnumerationError::ZeroEndBound);
    }
    if opts.jobs == 0 {
        return Err(EnumerationError::ZeroJobs);
    }
    let budget = EnumerationBudget::new(g, r);
    if budget.edge_bound > DEFAULT_EDGE_LIMIT && !opts.allow_large {
        return Err(EnumerationError::EdgeBoundTooLarge { bound: budget.edge_bound, limit: DEFAULT_EDGE_LIMIT });
    }
    let mut work: Vec<(Candidate, (i64, i64))> = Vec::new();
    for ends in end_multisets(d, r, opts.allow_contracted) {
        let bx = flow_box(&ends);
        for c in candidates(&ends, g) {
            debug_assert!(c.edges.len() + c.ends.len() < budget.edge_bound.max(1) + 1);
            work.push((c, bx));
        }
    }
    let total = work.len();
    let limit = opts.max_candidates.unwrap_or(usize::MAX).min(total);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs).build().map_err(|e| EnumerationError::ThreadPool(e.to_string()))?;
    let outcomes: Vec<Outcome> = pool.install(|| work[..limit].par_iter().map(|(c, bx)| process(c, g, *bx)).collect());
    let mut realized: BTreeMap<CombinatorialType, ParamTropCurve> = BTreeMap::new();
    let mut unreal: BTreeSet<CombinatorialType> = BTreeSet::new();
    let mut flows = 0;
    for o in outcomes {
        flows += o.flows;
        for (ty, curve) in o.realized {
            realized.entry(ty).or_insert(curve);
        }
        unreal.extend(o.unrealizable);
    }
    let discarded = unreal.iter().filter(|t| !realized.contains_key(*t)).count();
    if limit < total {
        return Err(EnumerationError::BudgetExhausted { partial_count: realized.len(), examined: limit, total });
    }
    let types = realized.into_iter().map(|(ty, witness)| EnumeratedType { ty, witness }).collect();
    Ok(EnumerationResult { budget, types, discarded, candidate_graphs: total, flows_checked: flows })
}

type CountKey = (DegreeSpec, usize, usize, usize);

fn count_cache() -> &'static Mutex<HashMap<CountKey, usize>> {
    static CACHE: OnceLock<Mutex<HashMap<CountKey, usize>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Number of types returned by [`enumerate_types`]; memoized per process.
pub fn count_types(d: &DegreeSpec, g: usize, r: usize, allow_contracted: usize) -> Result<usize, EnumerationError> {
    let key = (d.clone(), g, r, allow_contracted);
    if let Some(&n) = count_cache().lock().unwrap().get(&key) {
        return Ok(n);
    }
    let opts = EnumerationOptions { allow_contracted, ..Default::default() };
    let n = enumerate_types(d, g, r, &opts)?.count();
    count_cache().lock().unwrap().insert(key, n);
    Ok(n)
}

/// Brute-force reference enumeration over labelled multigraphs, independent
/// edge flows and a Fourier-Motzkin feasibility test. Only usable on tiny budgets.
pub mod oracle {
    use super::*;

    /// `a . x <= b` over the rationals.
    #[derive(Debug, Clone)]
    struct Ineq {
        a: Vec<Q>,
        b: Q,
    }

    /// Decides feasibility of a system of inequalities by Fourier-Motzkin
    /// elimination of every variable.
    fn fourier_motzkin(mut sys: Vec<Ineq>, nvars: usize) -> bool {
        for j in 0..nvars {
            let (mut pos, mut neg, mut zero) = (Vec::new(), Vec::new(), Vec::new());
            for ineq in sys {
                if ineq.a[j].is_positive() {
                    pos.push(ineq);
                } else if ineq.a[j].is_negative() {
                    neg.push(ineq);
                } else {
                    zero.push(ineq);
                }
            }
            for p in &pos {
                for n in &neg {
                    let (cp, cn) = (p.a[j].clone(), -n.a[j].clone());
                    let a: Vec<Q> = (0..nvars).map(|k| &p.a[k] * &cn + &n.a[k] * &cp).collect();
                    let b = &p.b * &cn + &n.b * &cp;
                    zero.push(Ineq { a, b });
                }
            }
            // drop exact duplicates to limit growth
            zero.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
            zero.dedup_by(|x, y| x.a == y.a && x.b == y.b);
            sys = zero;
        }
        sys.iter().all(|i| !i.b.is_negative())
    }

    /// Positive lengths exist iff the cycle conditions have a solution with
    /// every length at least 1 (the conditions are homogeneous).
    fn realizable(nv: usize, edges: &[(usize, usize)], w: &[LatticeVec]) -> bool {
        let ne = edges.len();
        // unknowns: h (2 nv) then lengths (ne); rows: h(b) - h(a) - len w = 0
        let mut mh = Matrix::zeros(0, 2 * nv);
        let mut ml: Vec<Vec<Q>> = Vec::new();
        for (e, &(a, b)) in edges.iter().enumerate() {
            for coord in 0..2 {
                let mut row = vec![Q::zero(); 2 * nv];
                row[2 * b + coord] += Q::one();
                row[2 * a + coord] -= Q::one();
                mh.push_row(row);
                let mut lr = vec![Q::zero(); ne];
                lr[e] = q(if coord == 0 { w[e].x } else { w[e].y });
                ml.push(lr);
            }
        }
        let cycles = mh.transpose().nullspace();
        let mut sys = Vec::new();
        for y in &cycles {
            let a: Vec<Q> = (0..ne).map(|e| (0..ml.len()).map(|r| &y[r] * &ml[r][e]).sum()).collect();
            if a.iter().all(Zero::is_zero) {
                continue;
            }
            sys.push(Ineq { a: a.clone(), b: Q::zero() });
            sys.push(Ineq { a: a.iter().map(|x| -x).collect(), b: Q::zero() });
        }
        for e in 0..ne {
            let mut a = vec![Q::zero(); ne];
            a[e] = -Q::one();
            sys.push(Ineq { a, b: -Q::one() });
        }
        fourier_motzkin(sys, ne)
    }

    fn connected(nv: usize, edges: &[(usize, usize)]) -> bool {
        let mut seen = vec![false; nv];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    fn multisets(nv: usize, k: usize) -> Vec<Vec<(usize, usize)>> {
        let pairs: Vec<(usize, usize)> = (0..nv).flat_map(|i| (i..nv).map(move |j| (i, j))).collect();
        let mut out = vec![Vec::new()];
        for _ in 0..k {
            let mut next = Vec::new();
            for m in &out {
                let start = m.last().map(|p| pairs.iter().position(|x| x == p).unwrap()).unwrap_or(0);
                for p in &pairs[start..] {
                    let mut v: Vec<(usize, usize)> = m.clone();
                    v.push(*p);
                    next.push(v);
                }
            }
            out = next;
        }
        out
    }

    /// Same contract as [`enumerate_types`] (set of canonical forms only).
    pub fn oracle_types(d: &DegreeSpec, g: usize, r: usize, allow_contracted: usize) -> BTreeSet<CombinatorialType> {
        let mut found = BTreeSet::new();
        for ends in end_multisets(d, r, allow_contracted) {
            let n_ends = ends.len();
            let (px, py) = flow_box(&ends);
            let options: Vec<LatticeVec> = (-px..=px).flat_map(|x| (-py..=py).map(move |y| LatticeVec::new(x, y))).collect();
            for nv in 1.. {
                let ne = nv + g - 1;
                // valency sum must allow every vertex to be at least trivalent
                if 2 * ne + n_ends < 3 * nv {
                    break;
                }
                for edges in multisets(nv, ne) {
                    if !connected(nv, &edges) {
                        continue;
                    }
                    let total = nv.pow(n_ends as u32);
                    for code in 0..total {
                        let mut att = Vec::with_capacity(n_ends);
                        let mut x = code;
                        for _ in 0..n_ends {
                            att.push(x % nv);
                            x /= nv;
                        }
                        let mut val = vec![0usize; nv];
                        for &(a, b) in &edges {
                            val[a] += 1;
                            val[b] += 1;
                        }
                        for &v in &att {
                            val[v] += 1;
                        }
                        if val.iter().any(|&k| k < 3) {
                            continue;
                        }
                        let mut last_edge = vec![None; nv];
                        for (e, &(a, b)) in edges.iter().enumerate() {
                            last_edge[a] = Some(e);
                            last_edge[b] = Some(e);
                        }
                        let mut base = vec![LatticeVec::ZERO; nv];
                        for (i, &v) in att.iter().enumerate() {
                            base[v] = base[v] + ends[i];
                        }
                        let mut w = vec![LatticeVec::ZERO; ne];
                        // vertices with no bounded edge must already balance
                        if (0..nv).any(|v| last_edge[v].is_none() && !base[v].is_zero()) {
                            continue;
                        }
                        assign(0, &edges, &options, &mut w, &mut base.clone(), &last_edge, &mut |w| {
                            if realizable(nv, &edges, w) {
                                let dg = DecoratedGraph {
                                    n_finite: nv,
                                    ends: att.iter().zip(&ends).map(|(&v, &x)| (v, None, x)).collect(),
                                    edges: edges.iter().zip(w).map(|(&(a, b), &x)| (a, b, x)).collect(),
                                };
                                found.insert(dg.canonical_form(EndLabelling::ByDecoration));
                            }
                        });
                    }
                }
            }
        }
        found
    }

    /// Assigns a flow to each edge in turn; a vertex is checked for balance
    /// once its last incident edge is assigned.
    fn assign(
        e: usize,
        edges: &[(usize, usize)],
        options: &[LatticeVec],
        w: &mut Vec<LatticeVec>,
        sum: &mut Vec<LatticeVec>,
        last_edge: &[Option<usize>],
        emit: &mut dyn FnMut(&[LatticeVec]),
    ) {
        if e == edges.len() {
            emit(w);
            return;
        }
        let (a, b) = edges[e];
        for &x in options {
            w[e] = x;
            sum[a] = sum[a] + x;
            sum[b] = sum[b] - x;
            let done_ok = [a, b].iter().all(|&v| last_edge[v] != Some(e) || sum[v].is_zero());
            if done_ok {
                assign(e + 1, edges, options, w, sum, last_edge, emit);
            }
            sum[a] = sum[a] - x;
            sum[b] = sum[b] + x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tropical_curve::{decorated_graph, degree, genus, is_stable, validate};

    fn lv(x: i64, y: i64) -> LatticeVec {
        LatticeVec::new(x, y)
    }

    fn opposite() -> DegreeSpec {
        DegreeSpec::new(vec![(lv(1, 0), 1), (lv(-1, 0), 1)]).unwrap()
    }

    #[test]
    fn degree_spec_validation() {
        assert!(DegreeSpec::new(vec![(lv(2, 0), 1), (lv(-1, 0), 2)]).is_err());
        assert!(DegreeSpec::new(vec![(lv(1, 0), 1), (lv(0, 1), 1)]).is_err());
        let d = DegreeSpec::from_json(&json!([{"n": [0, 1], "d": 1}, {"n": [2, 1], "d": 1}, {"n": [-1, -1], "d": 2}])).unwrap();
        assert_eq!(d.total_multiplicity(), 4);
        assert_eq!(DegreeSpec::from_json(&d.to_json()).unwrap(), d);
    }

    #[test]
    fn partitions_and_ends() {
        assert_eq!(partitions(4).len(), 5);
        assert_eq!(partitions(1), vec![vec![1]]);
        let d = DegreeSpec::new(vec![(lv(0, 1), 1), (lv(2, 1), 1), (lv(-1, -1), 2)]).unwrap();
        assert_eq!(end_multisets(&d, 5, 0).len(), 2);
        assert_eq!(end_multisets(&d, 4, 0).len(), 1);
        assert_eq!(end_multisets(&DegreeSpec::line(), 5, 2).len(), 2);
    }

    #[test]
    fn trees_by_pruefer() {
        assert_eq!(labelled_trees(4).len(), 16);
        assert_eq!(labelled_trees(5).len(), 125);
        assert!(labelled_trees(5).iter().all(|t| t.len() == 4));
    }

    #[test]
    fn line_has_one_type() {
        let res = enumerate_types(&DegreeSpec::line(), 0, 4, &EnumerationOptions::default()).unwrap();
        assert_eq!(res.count(), 1);
        let t = &res.types[0];
        assert_eq!(t.ty.n_finite, 1);
        assert_eq!(t.ty.n_ends(), 3);
    }

    #[test]
    fn opposite_ends_have_no_stable_type() {
        let res = enumerate_types(&opposite(), 0, 3, &EnumerationOptions::default()).unwrap();
        assert_eq!(res.count(), 0);
        assert_eq!(count_types(&opposite(), 0, 3, 0).unwrap(), 0);
    }

    #[test]
    fn contracted_end_types() {
        let opts = EnumerationOptions { allow_contracted: 1, ..Default::default() };
        let res = enumerate_types(&DegreeSpec::line(), 0, 5, &opts).unwrap();
        // plain line, 4-valent vertex with the marked end, and three splittings
        assert_eq!(res.count(), 5);
        assert_eq!(res.type_set(), oracle::oracle_types(&DegreeSpec::line(), 0, 5, 1));
    }

    #[test]
    fn witnesses_are_sound() {
        for (d, g, r) in [(DegreeSpec::line(), 1, 4), (DegreeSpec::line(), 0, 6)] {
            let res = enumerate_types(&d, g, r, &EnumerationOptions { allow_contracted: 1, ..Default::default() }).unwrap();
            for t in &res.types {
                let w = &t.witness;
                assert!(validate(w).is_valid());
                assert!(is_stable(&w.graph));
                assert_eq!(genus(&w.graph), g as i64);
                assert_eq!(degree(w).unwrap(), d.entries().to_vec());
                assert_eq!(decorated_graph(w).unwrap().canonical_form(EndLabelling::ByDecoration), t.ty);
                assert_eq!(w.graph.edges().len(), w.graph.n_vertices() + g - 1);
                assert!(w.graph.n_infinite() < r);
            }
        }
    }

    #[test]
    fn genus_one_line_matches_oracle() {
        let res = enumerate_types(&DegreeSpec::line(), 1, 4, &EnumerationOptions::default()).unwrap();
        assert_eq!(res.type_set(), oracle::oracle_types(&DegreeSpec::line(), 1, 4, 0));
        assert!(res.count() > 0);
    }

    #[test]
    fn jobs_do_not_change_output() {
        let d = DegreeSpec::line();
        let a = enumerate_types(&d, 1, 4, &EnumerationOptions { jobs: 1, ..Default::default() }).unwrap();
        let b = enumerate_types(&d, 1, 4, &EnumerationOptions { jobs: 4, ..Default::default() }).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn budget_errors() {
        assert!(matches!(
            enumerate_types(&DegreeSpec::line(), 0, 30, &EnumerationOptions::default()),
            Err(EnumerationError::EdgeBoundTooLarge { .. })
        ));
        let opts = EnumerationOptions { allow_contracted: 2, max_candidates: Some(1), ..Default::default() };
        assert!(matches!(enumerate_types(&DegreeSpec::line(), 0, 6, &opts), Err(EnumerationError::BudgetExhausted { .. })));
        assert_eq!(EnumerationBudget::new(0, 4).edge_bound, 4);
        assert_eq!(EnumerationBudget::new(1, 4).edge_bound, 7);
    }
}
