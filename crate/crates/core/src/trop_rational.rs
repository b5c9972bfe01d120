//! Canonical tropicalization of a marked rational curve with a map to the
//! two-dimensional torus, over `k((t))` and its ramified extensions.
//!
//! Points of the projective line are finitely supported Puiseux series with a
//! common exponent denominator `e`, or the point at infinity. The stable model
//! tree is computed as the tree of discs spanned by the marked points, and
//! vertex positions come from the valuation of the pulled-back monomials on
//! each disc.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::arith::{parse_rational, RatVec, Q};
use crate::lattice_toric::LatticeVec;
use crate::tropical_curve::{CurveError, Edge, EdgeLength, ParamTropCurve, TropicalGraph};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TropError {
    #[error("cannot parse series {0:?}")]
    Parse(String),
    #[error("exponent {exponent} is not a multiple of 1/{e}")]
    BadExponent { exponent: Q, e: u32 },
    #[error("ramification index must be at least 1")]
    ZeroRamification,
    #[error("coefficient {0} is not defined in characteristic {1}")]
    NotInPrimeField(Q, u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("at least 3 marked points are needed, got {0}")]
    TooFewPoints(usize),
    #[error("marked points {0} and {1} coincide")]
    CoincidentPoints(usize, usize),
    #[error("divisor support points {0} and {1} coincide")]
    DuplicateSupport(usize, usize),
    #[error("divisor point {0} has a nonzero vector but is not marked")]
    UnmarkedSupport(usize),
    #[error("the point at infinity carries a nonzero vector but is not marked")]
    UnmarkedInfinity,
    #[error("divisor vectors do not sum to zero")]
    DivisorNotBalanced,
    #[error("character values must be nonzero finite series")]
    BadCharacter,
    #[error("{0} is not a marked point")]
    NotMarked(usize),
    #[error("cluster vertex {0} does not exist")]
    NoSuchVertex(usize),
    #[error("malformed map JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Coefficient field: the rationals, or a prime field `F_p` (coefficients
/// are then stored as their least nonnegative residues).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaseField {
    #[default]
    Rational,
    Prime(u64),
}

impl BaseField {
    pub fn prime(p: u64) -> Result<Self, TropError> {
        if p < 2 || (2..p).take_while(|d| d * d <= p).any(|d| p.is_multiple_of(d)) {
            return Err(TropError::NotPrime(p));
        }
        Ok(BaseField::Prime(p))
    }

    fn normalize(&self, c: Q) -> Result<Q, TropError> {
        match *self {
            BaseField::Rational => Ok(c),
            BaseField::Prime(p) => {
                let pb = BigInt::from(p);
                let den = c.denom().mod_floor(&pb);
                if den.is_zero() {
                    return Err(TropError::NotInPrimeField(c, p));
                }
                // den^(p-2) is the inverse of den modulo p.
                let inv = den.modpow(&BigInt::from(p - 2), &pb);
                Ok(Q::from_integer((c.numer() * inv).mod_floor(&pb)))
            }
        }
    }
}

/// A finitely supported series `sum c_i t^{a_i}` with exponents in `(1/e)Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    e: u32,
    /// Strictly increasing exponents with nonzero coefficients.
    terms: Vec<(Q, Q)>,
}

impl Series {
    pub fn new(e: u32, terms: Vec<(Q, Q)>, field: BaseField) -> Result<Self, TropError> {
        if e == 0 {
            return Err(TropError::ZeroRamification);
        }
        let mut acc: BTreeMap<Q, Q> = BTreeMap::new();
        for (a, c) in terms {
            if !(&a * Q::from_integer(BigInt::from(e))).is_integer() {
                return Err(TropError::BadExponent { exponent: a, e });
            }
            *acc.entry(a).or_insert_with(Q::zero) += c;
        }
        let mut out = Vec::new();
        for (a, c) in acc {
            let c = field.normalize(c)?;
            if !c.is_zero() {
                out.push((a, c));
            }
        }
        Ok(Self { e, terms: out })
    }

    pub fn constant(c: Q) -> Self {
        let terms = if c.is_zero() { vec![] } else { vec![(Q::zero(), c)] };
        Self { e: 1, terms }
    }

    pub fn ramification(&self) -> u32 {
        self.e
    }

    pub fn terms(&self) -> &[(Q, Q)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The same series viewed in the extension with denominator `e2`.
    pub fn with_ramification(&self, e2: u32) -> Result<Self, TropError> {
        if e2 == 0 {
            return Err(TropError::ZeroRamification);
        }
        for (a, _) in &self.terms {
            if !(a * Q::from_integer(BigInt::from(e2))).is_integer() {
                return Err(TropError::BadExponent { exponent: a.clone(), e: e2 });
            }
        }
        Ok(Self { e: e2, terms: self.terms.clone() })
    }

    pub fn sub(&self, other: &Series, field: BaseField) -> Result<Series, TropError> {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|(a, c)| (a.clone(), -c)));
        Series::new(self.e.lcm(&other.e), terms, field)
    }

    /// Least exponent, or `None` for the zero series.
    pub fn order(&self) -> Option<Q> {
        self.terms.first().map(|(a, _)| a.clone())
    }

    /// Parses sums like `1 - t`, `t^3 + 2*t^5`, `-t^(1/2)` or `3/2 t^-1`.
    pub fn parse(s: &str, e: u32, field: BaseField) -> Result<Self, TropError> {
        let terms = parse_terms(s).ok_or_else(|| TropError::Parse(s.to_string()))?;
        Series::new(e, terms, field)
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (a, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let unit = mag.is_one();
            if a.is_zero() {
                write!(f, "{mag}")?;
                continue;
            }
            if !unit {
                write!(f, "{mag}*")?;
            }
            if a.is_one() {
                f.write_str("t")?;
            } else if a.is_integer() && !a.is_negative() {
                write!(f, "t^{a}")?;
            } else {
                write!(f, "t^({a})")?;
            }
        }
        Ok(())
    }
}

fn parse_terms(s: &str) -> Option<Vec<(Q, Q)>> {
    let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
    if chars.is_empty() {
        return None;
    }
    let mut i = 0;
    let mut out = Vec::new();
    let number = |i: &mut usize| -> Option<Q> {
        let start = *i;
        while *i < chars.len() && (chars[*i].is_ascii_digit() || chars[*i] == '/') {
            *i += 1;
        }
        if start == *i {
            return None;
        }
        let text: String = chars[start..*i].iter().collect();
        parse_rational(&text).ok()
    };
    loop {
        let mut sign = Q::one();
        while i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
            if chars[i] == '-' {
                sign = -sign;
            }
            i += 1;
        }
        let mut coeff = Q::one();
        let mut has_coeff = false;
        if i < chars.len() && chars[i].is_ascii_digit() {
            coeff = number(&mut i)?;
            has_coeff = true;
            if i < chars.len() && chars[i] == '*' {
                i += 1;
            }
        }
        let mut exponent = Q::zero();
        if i < chars.len() && chars[i] == 't' {
            i += 1;
            exponent = Q::one();
            if i < chars.len() && chars[i] == '^' {
                i += 1;
                let paren = i < chars.len() && chars[i] == '(';
                if paren {
                    i += 1;
                }
                let mut esign = Q::one();
                if i < chars.len() && chars[i] == '-' {
                    esign = -esign;
                    i += 1;
                }
                exponent = esign * number(&mut i)?;
                if paren {
                    if i >= chars.len() || chars[i] != ')' {
                        return None;
                    }
                    i += 1;
                }
            }
        } else if !has_coeff {
            return None;
        }
        out.push((exponent, sign * coeff));
        if i == chars.len() {
            return Some(out);
        }
        if chars[i] != '+' && chars[i] != '-' {
            return None;
        }
    }
}

/// A point of the projective line over the valued field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValuedElement {
    Finite(Series),
    Infinity,
}

impl ValuedElement {
    pub fn parse(s: &str, e: u32, field: BaseField) -> Result<Self, TropError> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(ValuedElement::Infinity),
            other => Ok(ValuedElement::Finite(Series::parse(other, e, field)?)),
        }
    }

    pub fn with_ramification(&self, e2: u32) -> Result<Self, TropError> {
        match self {
            ValuedElement::Finite(s) => Ok(ValuedElement::Finite(s.with_ramification(e2)?)),
            ValuedElement::Infinity => Ok(ValuedElement::Infinity),
        }
    }

    fn series(&self) -> Option<&Series> {
        match self {
            ValuedElement::Finite(s) => Some(s),
            ValuedElement::Infinity => None,
        }
    }
}

impl fmt::Display for ValuedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValuedElement::Finite(s) => write!(f, "{s}"),
            ValuedElement::Infinity => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Valuation {
    MinusInfinity,
    Finite(Q),
    PlusInfinity,
}

/// `nu(0) = +inf`; the point at infinity gets `-inf` so that it sorts below
/// every disc when clustering.
pub fn valuation(x: &ValuedElement) -> Valuation {
    match x {
        ValuedElement::Infinity => Valuation::MinusInfinity,
        ValuedElement::Finite(s) => match s.order() {
            Some(a) => Valuation::Finite(a),
            None => Valuation::PlusInfinity,
        },
    }
}

/// A marked rational curve with a map to the torus, given by the divisors of
/// the pulled-back monomials and the character `chi` of leading constants:
/// `f^*(x^m) = chi(m) * prod_j (z - p_j)^{<n_j, m>}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedRationalMap {
    pub field: BaseField,
    pub e: u32,
    pub marked_points: Vec<ValuedElement>,
    /// Finite support points with their vectors, plus optionally infinity.
    pub map_divisor: Vec<(ValuedElement, LatticeVec)>,
    pub character: [Series; 2],
}

impl MarkedRationalMap {
    pub fn new(
        field: BaseField,
        e: u32,
        marked_points: Vec<ValuedElement>,
        map_divisor: Vec<(ValuedElement, LatticeVec)>,
        character: [Series; 2],
    ) -> Result<Self, TropError> {
        let m = Self { field, e, marked_points, map_divisor, character };
        m.check()?;
        Ok(m)
    }

    fn same_point(&self, a: &ValuedElement, b: &ValuedElement) -> Result<bool, TropError> {
        Ok(match (a, b) {
            (ValuedElement::Infinity, ValuedElement::Infinity) => true,
            (ValuedElement::Finite(x), ValuedElement::Finite(y)) => x.sub(y, self.field)?.is_zero(),
            _ => false,
        })
    }

    fn check(&self) -> Result<(), TropError> {
        if self.e == 0 {
            return Err(TropError::ZeroRamification);
        }
        for (i, a) in self.marked_points.iter().enumerate() {
            for (j, b) in self.marked_points.iter().enumerate().skip(i + 1) {
                if self.same_point(a, b)? {
                    return Err(TropError::CoincidentPoints(i, j));
                }
            }
        }
        for (i, (a, _)) in self.map_divisor.iter().enumerate() {
            for (j, (b, _)) in self.map_divisor.iter().enumerate().skip(i + 1) {
                if self.same_point(a, b)? {
                    return Err(TropError::DuplicateSupport(i, j));
                }
            }
        }
        for (i, (p, n)) in self.map_divisor.iter().enumerate() {
            if !n.is_zero() && self.marked_index(p)?.is_none() {
                return Err(match p {
                    ValuedElement::Infinity => TropError::UnmarkedInfinity,
                    _ => TropError::UnmarkedSupport(i),
                });
            }
        }
        let explicit_inf = self.map_divisor.iter().any(|(p, _)| *p == ValuedElement::Infinity);
        if explicit_inf {
            let total = self.map_divisor.iter().fold(LatticeVec::ZERO, |acc, (_, n)| acc + *n);
            if !total.is_zero() {
                return Err(TropError::DivisorNotBalanced);
            }
        } else if !self.infinity_vector().is_zero() && self.marked_index(&ValuedElement::Infinity)?.is_none() {
            return Err(TropError::UnmarkedInfinity);
        }
        if self.character.iter().any(Series::is_zero) {
            return Err(TropError::BadCharacter);
        }
        Ok(())
    }

    fn marked_index(&self, p: &ValuedElement) -> Result<Option<usize>, TropError> {
        for (i, m) in self.marked_points.iter().enumerate() {
            if self.same_point(m, p)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Vector at infinity: explicit if listed, else minus the finite sum.
    pub fn infinity_vector(&self) -> LatticeVec {
        let mut finite = LatticeVec::ZERO;
        for (p, n) in &self.map_divisor {
            if *p == ValuedElement::Infinity {
                return *n;
            }
            finite = finite + *n;
        }
        -finite
    }

    fn finite_support(&self) -> impl Iterator<Item = (&Series, LatticeVec)> {
        self.map_divisor.iter().filter_map(|(p, n)| p.series().map(|s| (s, *n)))
    }

    /// The same map with every series reinterpreted over the extension with
    /// ramification index `e2` (a multiple of `e`).
    pub fn with_ramification(&self, e2: u32) -> Result<Self, TropError> {
        let pts = self.marked_points.iter().map(|p| p.with_ramification(e2)).collect::<Result<Vec<_>, _>>()?;
        let div = self
            .map_divisor
            .iter()
            .map(|(p, n)| Ok((p.with_ramification(e2)?, *n)))
            .collect::<Result<Vec<_>, TropError>>()?;
        let chi = [self.character[0].with_ramification(e2)?, self.character[1].with_ramification(e2)?];
        Self::new(self.field, e2, pts, div, chi)
    }

    /// `{"e": int, "p": optional prime, "points": [..], "divisor": [{"at": .., "n": [a, b]}], "chi": [.., ..]}`.
    pub fn from_json(v: &Value) -> Result<Self, TropError> {
        let err = |m: &str| TropError::Json(m.to_string());
        let e = v.get("e").map(|x| x.as_u64().ok_or_else(|| err("\"e\" must be a positive integer"))).transpose()?.unwrap_or(1);
        let e = u32::try_from(e).map_err(|_| err("\"e\" is too large"))?;
        let field = match v.get("p") {
            None | Some(Value::Null) => BaseField::Rational,
            Some(p) => BaseField::prime(p.as_u64().ok_or_else(|| err("\"p\" must be a prime"))?)?,
        };
        let parse_point = |x: &Value| -> Result<ValuedElement, TropError> {
            match x {
                Value::String(s) => ValuedElement::parse(s, e, field),
                Value::Number(n) => ValuedElement::parse(&n.to_string(), e, field),
                _ => Err(err("points must be strings")),
            }
        };
        let points = v
            .get("points")
            .and_then(Value::as_array)
            .ok_or_else(|| err("missing \"points\""))?
            .iter()
            .map(parse_point)
            .collect::<Result<Vec<_>, _>>()?;
        let mut divisor = Vec::new();
        for item in v.get("divisor").and_then(Value::as_array).ok_or_else(|| err("missing \"divisor\""))? {
            let at = parse_point(item.get("at").ok_or_else(|| err("divisor entry needs \"at\""))?)?;
            let n: [i64; 2] = serde_json::from_value(item.get("n").cloned().unwrap_or(Value::Null))
                .map_err(|_| err("divisor entry needs \"n\": [a, b]"))?;
            divisor.push((at, LatticeVec::new(n[0], n[1])));
        }
        let chi = match v.get("chi") {
            None => [Series::constant(Q::one()), Series::constant(Q::one())],
            Some(c) => {
                let arr = c.as_array().filter(|a| a.len() == 2).ok_or_else(|| err("\"chi\" must have two entries"))?;
                let mut out = Vec::new();
                for x in arr {
                    match parse_point(x)? {
                        ValuedElement::Finite(s) => out.push(s),
                        ValuedElement::Infinity => return Err(TropError::BadCharacter),
                    }
                }
                [out[0].clone(), out[1].clone()]
            }
        };
        Self::new(field, e, points, divisor, chi)
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "e": self.e,
            "points": self.marked_points.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "divisor": self.map_divisor.iter().map(|(p, n)| json!({"at": p.to_string(), "n": [n.x, n.y]})).collect::<Vec<_>>(),
            "chi": [self.character[0].to_string(), self.character[1].to_string()],
        });
        if let BaseField::Prime(p) = self.field {
            v["p"] = json!(p);
        }
        v
    }
}

/// A vertex of the stable tree: a disc `{z : nu(z - rep) >= radius}` that
/// contains the listed marked points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub members: Vec<usize>,
    pub radius: Q,
    /// Index of a finite marked point inside the disc.
    pub representative: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeEdge {
    /// Between two clusters, with length equal to the radius difference.
    Bounded { a: usize, b: usize, length: Q },
    /// From a cluster to a marked point.
    End { cluster: usize, point: usize },
}

/// The stable marked tree: clusters are finite vertices and the marked points
/// are the infinite vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterTree {
    pub clusters: Vec<Cluster>,
    pub edges: Vec<TreeEdge>,
    pub n_points: usize,
}

impl ClusterTree {
    pub fn n_bounded(&self) -> usize {
        self.edges.iter().filter(|e| matches!(e, TreeEdge::Bounded { .. })).count()
    }

    pub fn valency(&self, c: usize) -> usize {
        self.edges
            .iter()
            .map(|e| match e {
                TreeEdge::Bounded { a, b, .. } => usize::from(*a == c) + usize::from(*b == c),
                TreeEdge::End { cluster, .. } => usize::from(*cluster == c),
            })
            .sum()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "clusters": self.clusters.iter().map(|c| json!({
                "members": c.members, "radius": crate::arith::rational_json(&c.radius)
            })).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| match e {
                TreeEdge::Bounded { a, b, length } => json!({"a": a, "b": b, "length": crate::arith::rational_json(length)}),
                TreeEdge::End { cluster, point } => json!({"cluster": cluster, "point": point}),
            }).collect::<Vec<_>>(),
        })
    }
}

fn pairwise(field: BaseField, points: &[ValuedElement]) -> Result<Vec<Vec<Option<Q>>>, TropError> {
    let n = points.len();
    let mut d = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if let (Some(a), Some(b)) = (points[i].series(), points[j].series()) {
                let diff = a.sub(b, field)?;
                let o = diff.order().ok_or(TropError::CoincidentPoints(i, j))?;
                d[i][j] = Some(o.clone());
                d[j][i] = Some(o);
            }
        }
    }
    Ok(d)
}

/// Raw disc hierarchy before suppressing a two-valent root.
struct RawNode {
    members: Vec<usize>,
    radius: Q,
    children: Vec<usize>,
}

fn split(members: &[usize], d: &[Vec<Option<Q>>], nodes: &mut Vec<RawNode>, leaves: &mut Vec<(usize, usize)>) -> usize {
    let radius = members
        .iter()
        .flat_map(|&i| members.iter().filter(move |&&j| j > i).map(move |&j| d[i][j].clone().expect("finite points")))
        .min()
        .expect("at least two members");
    let id = nodes.len();
    nodes.push(RawNode { members: members.to_vec(), radius: radius.clone(), children: vec![] });
    // Group members into discs of radius strictly larger than `radius`.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in members {
        match groups.iter_mut().find(|g| d[g[0]][i].as_ref().is_some_and(|v| *v > radius)) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups.sort();
    for g in groups {
        if g.len() == 1 {
            leaves.push((id, g[0]));
        } else {
            let child = split(&g, d, nodes, leaves);
            nodes[id].children.push(child);
        }
    }
    id
}

/// Stable tree of the marked points, computed by clustering at the distinct
/// values of `nu(z_i - z_j)`. Infinity hangs off the root; a two-valent root
/// is suppressed by concatenating its two edges.
pub fn cluster_tree(points: &[ValuedElement]) -> Result<ClusterTree, TropError> {
    cluster_tree_over(BaseField::Rational, points)
}

pub fn cluster_tree_over(field: BaseField, points: &[ValuedElement]) -> Result<ClusterTree, TropError> {
    if points.len() < 3 {
        return Err(TropError::TooFewPoints(points.len()));
    }
    let infs: Vec<usize> = (0..points.len()).filter(|&i| points[i] == ValuedElement::Infinity).collect();
    if infs.len() > 1 {
        return Err(TropError::CoincidentPoints(infs[0], infs[1]));
    }
    let d = pairwise(field, points)?;
    let finite: Vec<usize> = (0..points.len()).filter(|i| !infs.contains(i)).collect();
    let mut nodes = Vec::new();
    let mut leaves = Vec::new();
    split(&finite, &d, &mut nodes, &mut leaves);

    let mut clusters: Vec<Cluster> = nodes
        .iter()
        .map(|n| Cluster { members: n.members.clone(), radius: n.radius.clone(), representative: n.members[0] })
        .collect();
    let mut edges: Vec<TreeEdge> = Vec::new();
    for (id, n) in nodes.iter().enumerate() {
        for &c in &n.children {
            edges.push(TreeEdge::Bounded { a: id, b: c, length: &nodes[c].radius - &n.radius });
        }
    }
    for &(c, p) in &leaves {
        edges.push(TreeEdge::End { cluster: c, point: p });
    }
    if let Some(&i) = infs.first() {
        edges.push(TreeEdge::End { cluster: 0, point: i });
    }

    let root_valency = edges
        .iter()
        .filter(|e| match e {
            TreeEdge::Bounded { a, .. } => *a == 0,
            TreeEdge::End { cluster, .. } => *cluster == 0,
        })
        .count();
    if root_valency == 2 {
        let incident: Vec<TreeEdge> = edges
            .iter()
            .filter(|e| matches!(e, TreeEdge::Bounded { a: 0, .. } | TreeEdge::End { cluster: 0, .. }))
            .cloned()
            .collect();
        edges.retain(|e| !matches!(e, TreeEdge::Bounded { a: 0, .. } | TreeEdge::End { cluster: 0, .. }));
        let merged = match (&incident[0], &incident[1]) {
            (TreeEdge::Bounded { b: x, length: l1, .. }, TreeEdge::Bounded { b: y, length: l2, .. }) => {
                TreeEdge::Bounded { a: *x, b: *y, length: l1 + l2 }
            }
            (TreeEdge::Bounded { b, .. }, TreeEdge::End { point, .. }) | (TreeEdge::End { point, .. }, TreeEdge::Bounded { b, .. }) => {
                TreeEdge::End { cluster: *b, point: *point }
            }
            // Two ends at one vertex means only two marked points.
            _ => unreachable!("a tree with at least three points has an internal edge at a two-valent root"),
        };
        edges.push(merged);
        clusters.remove(0);
        for e in &mut edges {
            match e {
                TreeEdge::Bounded { a, b, .. } => {
                    *a -= 1;
                    *b -= 1;
                }
                TreeEdge::End { cluster, .. } => *cluster -= 1,
            }
        }
        edges.sort_by_key(|e| match e {
            TreeEdge::Bounded { a, b, .. } => (0, *a.min(b), *a.max(b)),
            TreeEdge::End { cluster, point } => (1, *point, *cluster),
        });
    }
    let tree = ClusterTree { clusters, edges, n_points: points.len() };
    debug_assert!((0..tree.clusters.len()).all(|c| tree.valency(c) >= 3));
    Ok(tree)
}

fn min_with(v: Option<Q>, cap: &Q) -> Q {
    match v {
        Some(v) if v < *cap => v,
        _ => cap.clone(),
    }
}

/// Position of a cluster vertex: `h(m) = nu(chi(m)) + sum_j <n_j, m> min(nu(a - p_j), rho)`.
pub fn vertex_position(tree: &ClusterTree, v: usize, map: &MarkedRationalMap) -> Result<RatVec, TropError> {
    let cl = tree.clusters.get(v).ok_or(TropError::NoSuchVertex(v))?;
    let at = |rep: usize| -> Result<RatVec, TropError> {
        let a = map.marked_points[rep].series().expect("representatives are finite");
        let mut out = [
            map.character[0].order().expect("nonzero character"),
            map.character[1].order().expect("nonzero character"),
        ];
        for (p, n) in map.finite_support() {
            let w = min_with(a.sub(p, map.field)?.order(), &cl.radius);
            out[0] += Q::from_integer(BigInt::from(n.x)) * &w;
            out[1] += Q::from_integer(BigInt::from(n.y)) * &w;
        }
        let [x, y] = out;
        Ok(RatVec::new(x, y))
    };
    let h = at(cl.representative)?;
    debug_assert!(cl.members.iter().all(|&r| at(r).map(|x| x == h).unwrap_or(false)), "position depends on the representative");
    Ok(h)
}

/// The divisor vector at a marked point (zero for points mapped to the torus).
pub fn end_slope(q: usize, map: &MarkedRationalMap) -> Result<LatticeVec, TropError> {
    let p = map.marked_points.get(q).ok_or(TropError::NotMarked(q))?;
    if *p == ValuedElement::Infinity {
        return Ok(map.infinity_vector());
    }
    for (s, n) in &map.map_divisor {
        if map.same_point(s, p)? {
            return Ok(*n);
        }
    }
    Ok(LatticeVec::ZERO)
}

/// The parameterized tropical curve of the map. Finite vertices are named
/// `v0, v1, ..` in cluster order and the ends `q1, q2, ..` in marked order.
pub fn tropicalize(map: &MarkedRationalMap) -> Result<ParamTropCurve, TropError> {
    let tree = cluster_tree_over(map.field, &map.marked_points)?;
    let nf = tree.clusters.len();
    let n = map.marked_points.len();
    let mut edges = Vec::new();
    for e in &tree.edges {
        edges.push(match e {
            TreeEdge::Bounded { a, b, length } => Edge { a: *a, b: *b, length: EdgeLength::Finite(length.clone()) },
            TreeEdge::End { cluster, point } => Edge { a: *cluster, b: nf + point, length: EdgeLength::Infinite },
        });
    }
    let graph = TropicalGraph::from_counts(nf, n, edges)?;
    let mut h = Vec::with_capacity(nf + n);
    for v in 0..nf {
        h.push(vertex_position(&tree, v, map)?);
    }
    for qi in 0..n {
        h.push(end_slope(qi, map)?.into());
    }
    Ok(ParamTropCurve::new(graph, h)?)
}

/// A ratmap built from plain strings; panics on malformed input, so only for
/// fixed data.
pub fn map_from_strs(e: u32, points: &[&str], divisor: &[(&str, [i64; 2])], chi: [&str; 2]) -> MarkedRationalMap {
    let f = BaseField::Rational;
    MarkedRationalMap::new(
        f,
        e,
        points.iter().map(|s| ValuedElement::parse(s, e, f).unwrap()).collect(),
        divisor.iter().map(|(s, n)| (ValuedElement::parse(s, e, f).unwrap(), LatticeVec::new(n[0], n[1]))).collect(),
        [Series::parse(chi[0], e, f).unwrap(), Series::parse(chi[1], e, f).unwrap()],
    )
    .unwrap()
}

pub mod samples {
    use super::*;

    /// The line `x + t y = z` with the four points `[1-t:1:1]`, `[1:0:1]`,
    /// `[-t:1:0]`, `[0:1:t]`, in the coordinate `u = x/y`; the torus
    /// coordinates are `x/z = u/(u+t)` and `y/z = 1/(u+t)`.
    pub fn marked_line() -> MarkedRationalMap {
        map_from_strs(1, &["1 - t", "inf", "-t", "0"], &[("0", [1, 0]), ("-t", [-1, -1])], ["1", "1"])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, q_frac};
    use crate::tropical_curve::{degree, genus, validate};

    fn pt(s: &str) -> ValuedElement {
        ValuedElement::parse(s, 1, BaseField::Rational).unwrap()
    }

    #[test]
    fn valuations() {
        assert_eq!(valuation(&pt("1 - t")), Valuation::Finite(q(0)));
        assert_eq!(valuation(&pt("t^3 + t^5")), Valuation::Finite(q(3)));
        let half = ValuedElement::parse("t^(1/2)", 2, BaseField::Rational).unwrap();
        assert_eq!(valuation(&half), Valuation::Finite(q_frac(1, 2)));
        assert_eq!(valuation(&pt("0")), Valuation::PlusInfinity);
        assert_eq!(valuation(&pt("inf")), Valuation::MinusInfinity);
        assert!(ValuedElement::parse("t^(1/2)", 1, BaseField::Rational).is_err());
    }

    #[test]
    fn parsing_round_trips() {
        for s in ["1 - t", "-t", "0", "2*t^3 + t^(1/2)", "3/2*t^(-1)", "t - t^2"] {
            let a = Series::parse(s, 2, BaseField::Rational).unwrap();
            let b = Series::parse(&a.to_string(), 2, BaseField::Rational).unwrap();
            assert_eq!(a, b, "{s}");
        }
        assert!(Series::parse("x + 1", 1, BaseField::Rational).is_err());
        assert!(Series::parse("", 1, BaseField::Rational).is_err());
    }

    #[test]
    fn prime_field_coefficients() {
        let f = BaseField::prime(3).unwrap();
        let s = Series::parse("1 + 3*t + t^2", 1, f).unwrap();
        assert_eq!(s.order(), Some(q(0)));
        let a = Series::parse("1 + t", 1, f).unwrap();
        let b = Series::parse("4 + t", 1, f).unwrap();
        assert!(a.sub(&b, f).unwrap().is_zero());
        assert!(BaseField::prime(9).is_err());
    }

    #[test]
    fn marked_line_tree() {
        let tree = cluster_tree(&samples::marked_line().marked_points).unwrap();
        assert_eq!(tree.clusters.len(), 2);
        assert_eq!(tree.n_bounded(), 1);
        let TreeEdge::Bounded { length, .. } = &tree.edges[0] else { panic!() };
        assert_eq!(*length, q(1));
        assert_eq!(tree.clusters[1].members, vec![2, 3]);
    }

    #[test]
    fn three_points_one_vertex() {
        let tree = cluster_tree(&[pt("0"), pt("1"), pt("inf")]).unwrap();
        assert_eq!(tree.clusters.len(), 1);
        assert_eq!(tree.edges.len(), 3);
    }

    #[test]
    fn geometric_points_give_one_bounded_edge() {
        let tree = cluster_tree(&[pt("0"), pt("t"), pt("t^2"), pt("inf")]).unwrap();
        assert_eq!(tree.clusters.len(), 2);
        assert_eq!(tree.n_bounded(), 1);
    }

    #[test]
    fn two_valent_root_is_suppressed() {
        // {0, t} and {1, 1 + t} split at radius 0 with no point at infinity.
        let tree = cluster_tree(&[pt("0"), pt("t"), pt("1"), pt("1 + t")]).unwrap();
        assert_eq!(tree.clusters.len(), 2);
        assert_eq!(tree.n_bounded(), 1);
        let TreeEdge::Bounded { length, .. } = &tree.edges[0] else { panic!() };
        assert_eq!(*length, q(2));
        // A lone leaf at the root becomes an end of the other vertex.
        let tree = cluster_tree(&[pt("0"), pt("t"), pt("1")]).unwrap();
        assert_eq!(tree.clusters.len(), 1);
        assert_eq!(tree.valency(0), 3);
    }

    #[test]
    fn negative_valuation_points() {
        let tree = cluster_tree(&[pt("t^(-1)"), pt("0"), pt("1"), pt("inf")]).unwrap();
        assert_eq!(tree.clusters.len(), 2);
        assert_eq!(tree.clusters[0].radius, q(-1));
        assert_eq!(tree.n_bounded(), 1);
    }

    #[test]
    fn cluster_errors() {
        assert_eq!(cluster_tree(&[pt("0"), pt("1")]), Err(TropError::TooFewPoints(2)));
        assert_eq!(cluster_tree(&[pt("0"), pt("1"), pt("1 + 0*t")]), Err(TropError::CoincidentPoints(1, 2)));
    }

    #[test]
    fn marked_line_positions() {
        let map = samples::marked_line();
        let tree = cluster_tree(&map.marked_points).unwrap();
        assert_eq!(vertex_position(&tree, 0, &map).unwrap(), RatVec::from_ints(0, 0));
        assert_eq!(vertex_position(&tree, 1, &map).unwrap(), RatVec::from_ints(0, -1));
        let slopes: Vec<_> = (0..4).map(|i| end_slope(i, &map).unwrap()).collect();
        assert_eq!(slopes, vec![LatticeVec::new(0, 0), LatticeVec::new(0, 1), LatticeVec::new(-1, -1), LatticeVec::new(1, 0)]);
    }

    #[test]
    fn tropicalized_marked_line_is_valid() {
        let c = tropicalize(&samples::marked_line()).unwrap();
        assert!(validate(&c).is_valid());
        assert_eq!(genus(&c.graph), 0);
        assert_eq!(
            degree(&c).unwrap(),
            vec![(LatticeVec::new(-1, -1), 1), (LatticeVec::new(0, 1), 1), (LatticeVec::new(1, 0), 1)]
        );
    }

    #[test]
    fn constant_map() {
        let map = map_from_strs(1, &["0", "1", "inf", "t"], &[], ["t^2", "3*t^(-1)"]);
        let c = tropicalize(&map).unwrap();
        for v in 0..c.graph.n_finite() {
            assert_eq!(c.h[v], RatVec::from_ints(2, -1));
        }
        assert!(validate(&c).is_valid());
    }

    #[test]
    fn horizontal_line() {
        let map = map_from_strs(1, &["0", "inf", "1", "2", "3"], &[("0", [1, 0])], ["1", "t"]);
        let c = tropicalize(&map).unwrap();
        assert_eq!(c.graph.n_finite(), 1);
        assert_eq!(c.h[0], RatVec::from_ints(0, 1));
        assert_eq!(degree(&c).unwrap(), vec![(LatticeVec::new(-1, 0), 1), (LatticeVec::new(1, 0), 1)]);
    }

    #[test]
    fn ramified_edge_length() {
        let map = map_from_strs(2, &["0", "t^(1/2)", "inf", "1"], &[("0", [1, 0]), ("1", [0, 1])], ["1", "1"]);
        let c = tropicalize(&map).unwrap();
        assert!(validate(&c).is_valid());
        let lens: Vec<_> = c.graph.bounded_edges().map(|e| c.graph.edge(e).length.clone()).collect();
        assert_eq!(lens, vec![EdgeLength::Finite(q_frac(1, 2))]);
    }

    #[test]
    fn extension_invariance() {
        let map = samples::marked_line();
        assert_eq!(tropicalize(&map).unwrap(), tropicalize(&map.with_ramification(6).unwrap()).unwrap());
    }

    #[test]
    fn map_validation() {
        let f = BaseField::Rational;
        let p = |s| ValuedElement::parse(s, 1, f).unwrap();
        let one = || Series::constant(q(1));
        let unmarked = MarkedRationalMap::new(f, 1, vec![p("0"), p("1"), p("inf")], vec![(p("2"), LatticeVec::new(1, 0))], [one(), one()]);
        assert_eq!(unmarked, Err(TropError::UnmarkedSupport(0)));
        let no_inf = MarkedRationalMap::new(f, 1, vec![p("0"), p("1"), p("2")], vec![(p("0"), LatticeVec::new(1, 0))], [one(), one()]);
        assert_eq!(no_inf, Err(TropError::UnmarkedInfinity));
        let zero_chi = MarkedRationalMap::new(f, 1, vec![p("0"), p("1"), p("2")], vec![], [one(), Series::constant(q(0))]);
        assert_eq!(zero_chi, Err(TropError::BadCharacter));
    }

    #[test]
    fn json_round_trip() {
        let map = samples::marked_line();
        let back = MarkedRationalMap::from_json(&map.to_json()).unwrap();
        assert_eq!(back, map);
        let v = json!({"e": 1, "points": ["0", "1", "inf"], "divisor": [{"at": "0", "n": [1, 0]}, {"at": "1", "n": [0, 1]}]});
        let m = MarkedRationalMap::from_json(&v).unwrap();
        assert_eq!(end_slope(2, &m).unwrap(), LatticeVec::new(-1, -1));
    }
}
