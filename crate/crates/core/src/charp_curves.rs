//! Rational curves on the surfaces `S_q` (triangle) and `S'_q` (parallelogram)
//! in characteristic `p`, where `q = p^r`: parametrizations by characters,
//! critical points, local orders and delta invariants of the singular
//! branches, intersections of two curves, and the integer bookkeeping behind
//! reducible Severi varieties.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::field::{prime_power, Fe, FieldError, Gf, Poly};
use crate::lattice_toric::{
    area2, boundary_length, interior_points, standard_surfaces, zariski_bound, GeometryError, LatticeVec, SurfaceVariant,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CharpError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("q = {q} is not a power of the field characteristic {p}")]
    CharacteristicMismatch { q: u64, p: u64 },
    #[error("this computation needs p > 2 on the triangle surface")]
    CharacteristicTwo,
    #[error("operation applies to the {0} surface only")]
    WrongVariant(&'static str),
    #[error("character values must be nonzero")]
    ZeroCharacter,
    #[error("xi must differ from 0 and 1")]
    DegenerateXi,
    #[error("parameter value lies on the toric boundary")]
    OffChart,
    #[error("the two curves coincide")]
    SameCurve,
    #[error("the characters are in special position (vanishing denominator)")]
    DegenerateCharacters,
    #[error("the intersection point lies on the toric boundary")]
    BoundaryIntersection,
    #[error("critical points are not all defined over {0}; use a larger field")]
    SplittingFieldNeeded(String),
    #[error("every parameter value is critical")]
    DegenerateDifferential,
    #[error("branch germ must have positive orders in both coordinates")]
    BadGerm,
    #[error("branch germ is not a primitive parametrization (value semigroup has gcd {0})")]
    NotPrimitive(usize),
    #[error("truncation order {truncation} is too small to certify the conductor")]
    TruncationInsufficient { truncation: usize },
    #[error("d must be at least 1")]
    BadDegree,
    #[error("genus {g} is outside the admissible range; failing bounds: {failing:?}")]
    GenusOutOfRange { g: i64, failing: Vec<String> },
}

/// Values of the character on the standard basis of `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Character {
    pub e1: Fe,
    pub e2: Fe,
}

impl Character {
    pub fn new(e1: Fe, e2: Fe) -> Result<Self, CharpError> {
        if e1 == Fe(0) || e2 == Fe(0) {
            return Err(CharpError::ZeroCharacter);
        }
        Ok(Self { e1, e2 })
    }

    pub fn eval(&self, f: &Gf, m: LatticeVec) -> Fe {
        f.mul(f.pow(self.e1, m.x).expect("nonzero"), f.pow(self.e2, m.y).expect("nonzero"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveData {
    /// `f^*(x^m) = chi(m) t^{<n1,m>} (t-1)^{<n2,m>}` with `n1 = (0,1)`, `n2 = (q,1)`.
    Sq { chi: Character },
    /// The image of the `(1,1)`-curve `U = t`, `W = (t - xi)/(t - 1)` under
    /// `x^{e1} = chi(e1) W^q`, `x^{e2} = chi(e2) W/U`.
    SqPrime { xi: Fe, chi: Character },
}

/// A rational curve on `S_q` or `S'_q` over a finite field of characteristic `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamCurveCharP {
    pub field: Gf,
    pub q: u64,
    pub r: u32,
    pub data: CurveData,
}

fn check_q(field: &Gf, q: u64) -> Result<u32, CharpError> {
    let (p, r) = prime_power(q).ok_or(CharpError::NotPrimePower(q))?;
    if p != field.p() {
        return Err(CharpError::CharacteristicMismatch { q, p: field.p() });
    }
    Ok(r)
}

impl ParamCurveCharP {
    pub fn sq(field: &Gf, q: u64, chi: Character) -> Result<Self, CharpError> {
        let r = check_q(field, q)?;
        Ok(Self { field: field.clone(), q, r, data: CurveData::Sq { chi } })
    }

    pub fn sq_prime(field: &Gf, q: u64, xi: Fe, chi: Character) -> Result<Self, CharpError> {
        let r = check_q(field, q)?;
        if xi == field.zero() || xi == field.one() {
            return Err(CharpError::DegenerateXi);
        }
        Ok(Self { field: field.clone(), q, r, data: CurveData::SqPrime { xi, chi } })
    }

    pub fn variant(&self) -> SurfaceVariant {
        match self.data {
            CurveData::Sq { .. } => SurfaceVariant::Triangle,
            CurveData::SqPrime { .. } => SurfaceVariant::Parallelogram,
        }
    }

    pub fn character(&self) -> Character {
        match self.data {
            CurveData::Sq { chi } | CurveData::SqPrime { chi, .. } => chi,
        }
    }
}

/// `coeff * prod (t - root)^exp`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredRatFn {
    pub coeff: Fe,
    pub factors: Vec<(Fe, i64)>,
}

impl FactoredRatFn {
    /// Value at `t`, or `None` at a pole.
    pub fn eval(&self, f: &Gf, t: Fe) -> Option<Fe> {
        let mut out = self.coeff;
        for &(root, e) in &self.factors {
            let base = f.sub(t, root);
            out = f.mul(out, f.pow(base, e).ok()?);
        }
        Some(out)
    }

    /// `(numerator, denominator)` as polynomials.
    pub fn as_fraction(&self, f: &Gf) -> (Poly, Poly) {
        let mut num = Poly::constant(self.coeff);
        let mut den = Poly::constant(f.one());
        for &(root, e) in &self.factors {
            let lin = Poly::linear(f, root);
            if e >= 0 {
                num = num.mul(f, &lin.pow(f, e as u64));
            } else {
                den = den.mul(f, &lin.pow(f, (-e) as u64));
            }
        }
        (num, den)
    }

    /// Logarithmic derivative times `prod (t - root)`: `sum_j e_j prod_{i != j} (t - r_i)`.
    fn log_derivative_numerator(&self, f: &Gf) -> Poly {
        let mut out = Poly::zero();
        for (j, &(_, e)) in self.factors.iter().enumerate() {
            let mut term = Poly::constant(f.from_int(e));
            for (i, &(root, _)) in self.factors.iter().enumerate() {
                if i != j {
                    term = term.mul(f, &Poly::linear(f, root));
                }
            }
            out = out.add(f, &term);
        }
        out
    }

    pub fn display(&self, f: &Gf) -> String {
        let mut s = f.display(self.coeff);
        for &(root, e) in &self.factors {
            if e == 0 {
                continue;
            }
            let base = if root == f.zero() { "t".to_string() } else { format!("(t - {})", f.display(root)) };
            s.push_str(&if e == 1 { format!(" * {base}") } else { format!(" * {base}^{e}") });
        }
        s
    }
}

/// The pulled-back monomial `f^*(x^m)`.
pub fn pullback(c: &ParamCurveCharP, m: LatticeVec) -> FactoredRatFn {
    let f = &c.field;
    let q = c.q as i64;
    match c.data {
        CurveData::Sq { chi } => FactoredRatFn {
            coeff: chi.eval(f, m),
            factors: vec![(f.zero(), m.y), (f.one(), q * m.x + m.y)],
        },
        CurveData::SqPrime { xi, chi } => FactoredRatFn {
            coeff: chi.eval(f, m),
            factors: vec![(xi, q * m.x + m.y), (f.one(), -q * m.x - m.y), (f.zero(), -m.y)],
        },
    }
}

/// The boundary parameters `t` where the curve meets the toric boundary.
fn boundary_parameters(c: &ParamCurveCharP) -> Vec<Fe> {
    let f = &c.field;
    match c.data {
        CurveData::Sq { .. } => vec![f.zero(), f.one()],
        CurveData::SqPrime { xi, .. } => vec![f.zero(), f.one(), xi],
    }
}

/// Polynomial whose roots (away from the boundary parameters) are the common
/// zeros of the logarithmic derivatives of all pulled-back monomials.
pub fn critical_polynomial(c: &ParamCurveCharP) -> Result<Poly, CharpError> {
    let f = &c.field;
    let a = pullback(c, LatticeVec::new(1, 0)).log_derivative_numerator(f);
    let b = pullback(c, LatticeVec::new(0, 1)).log_derivative_numerator(f);
    if a.is_zero() && b.is_zero() {
        return Err(CharpError::DegenerateDifferential);
    }
    let g = if a.is_zero() { b.monic(f) } else if b.is_zero() { a.monic(f) } else { a.gcd(f, &b) };
    Ok(g)
}

/// Parameter values in the field where the differential of the map vanishes.
/// On `S_q` this is `{1/2}`.
pub fn critical_points(c: &ParamCurveCharP) -> Result<Vec<Fe>, CharpError> {
    if c.variant() == SurfaceVariant::Triangle && c.field.p() == 2 {
        return Err(CharpError::CharacteristicTwo);
    }
    let g = critical_polynomial(c)?;
    let boundary = boundary_parameters(c);
    let pts: Vec<Fe> = g.roots_in_field(&c.field).into_iter().filter(|t| !boundary.contains(t)).collect();
    if pts.len() < g.distinct_root_count(&c.field) {
        return Err(CharpError::SplittingFieldNeeded(c.field.to_string()));
    }
    Ok(pts)
}

/// Vanishing orders at `t0` of `x^{e1} - x^{e1}(f(t0))` and `x^{e2} - x^{e2}(f(t0))`.
pub fn local_orders(c: &ParamCurveCharP, t0: Fe) -> Result<(usize, usize), CharpError> {
    let f = &c.field;
    if boundary_parameters(c).contains(&t0) {
        return Err(CharpError::OffChart);
    }
    let order = |m: LatticeVec| -> usize {
        let rf = pullback(c, m);
        let (num, den) = rf.as_fraction(f);
        let v = rf.eval(f, t0).expect("t0 is not a pole");
        num.sub(f, &den.scale(f, v)).root_multiplicity(f, t0)
    };
    Ok((order(LatticeVec::new(1, 0)), order(LatticeVec::new(0, 1))))
}

/// Truncated power series `sum_{i < N} c_i s^i`.
fn series_of_fraction(f: &Gf, num: &Poly, den: &Poly, t0: Fe, n: usize) -> Vec<Fe> {
    let shift = |p: &Poly| -> Vec<Fe> {
        // Coefficients of p(s + t0) by repeated synthetic division.
        let mut coeffs = p.coeffs.clone();
        let mut out = Vec::new();
        while !coeffs.is_empty() {
            let mut rem = Fe(0);
            let mut quo = vec![Fe(0); coeffs.len().saturating_sub(1)];
            for i in (0..coeffs.len()).rev() {
                let cur = f.add(coeffs[i], f.mul(rem, t0));
                if i == 0 {
                    rem = cur;
                } else {
                    quo[i - 1] = cur;
                    rem = cur;
                }
            }
            out.push(rem);
            coeffs = quo;
        }
        out
    };
    let a = shift(num);
    let b = shift(den);
    let get = |v: &[Fe], i: usize| v.get(i).copied().unwrap_or(Fe(0));
    let b0_inv = f.inv(get(&b, 0)).expect("denominator does not vanish at t0");
    let mut out = vec![Fe(0); n];
    for i in 0..n {
        let mut acc = get(&a, i);
        for j in 1..=i {
            acc = f.sub(acc, f.mul(get(&b, j), out[i - j]));
        }
        out[i] = f.mul(acc, b0_inv);
    }
    out
}

fn series_mul(f: &Gf, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
    let n = a.len().min(b.len());
    let mut out = vec![Fe(0); n];
    for (i, &x) in a.iter().enumerate().take(n) {
        if x == Fe(0) {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(n - i) {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    out
}

/// A parametrized plane branch `s -> (u(s), v(s))` known up to `s^truncation`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchGerm {
    pub field: Gf,
    pub u: Vec<Fe>,
    pub v: Vec<Fe>,
}

impl BranchGerm {
    pub fn new(field: &Gf, u: Vec<Fe>, v: Vec<Fe>) -> Result<Self, CharpError> {
        let n = u.len().min(v.len());
        let (mut u, mut v) = (u, v);
        u.truncate(n);
        v.truncate(n);
        let germ = Self { field: field.clone(), u, v };
        match (germ.order_u(), germ.order_v()) {
            (Some(a), Some(b)) if a > 0 && b > 0 => Ok(germ),
            _ => Err(CharpError::BadGerm),
        }
    }

    pub fn truncation(&self) -> usize {
        self.u.len()
    }

    /// `(s^a, s^b)`.
    pub fn monomial(field: &Gf, a: usize, b: usize, truncation: usize) -> Result<Self, CharpError> {
        let mono = |k: usize| -> Vec<Fe> { (0..truncation).map(|i| if i == k { field.one() } else { Fe(0) }).collect() };
        Self::new(field, mono(a), mono(b))
    }

    /// Expansion at `s = 0` of two rational functions given as fractions.
    pub fn from_fractions(field: &Gf, u: (&Poly, &Poly), v: (&Poly, &Poly), truncation: usize) -> Result<Self, CharpError> {
        Self::new(
            field,
            series_of_fraction(field, u.0, u.1, field.zero(), truncation),
            series_of_fraction(field, v.0, v.1, field.zero(), truncation),
        )
    }

    fn order_u(&self) -> Option<usize> {
        self.u.iter().position(|&x| x != Fe(0))
    }

    fn order_v(&self) -> Option<usize> {
        self.v.iter().position(|&x| x != Fe(0))
    }
}

/// Branch of the curve at parameter `t0` in the local coordinates
/// `(x^{e1} - value, x^{e2} - value)`, expanded in `s = t - t0`.
pub fn germ_at(c: &ParamCurveCharP, t0: Fe, truncation: usize) -> Result<BranchGerm, CharpError> {
    let f = &c.field;
    if boundary_parameters(c).contains(&t0) {
        return Err(CharpError::OffChart);
    }
    let coord = |m: LatticeVec| -> Vec<Fe> {
        let rf = pullback(c, m);
        let (num, den) = rf.as_fraction(f);
        let mut s = series_of_fraction(f, &num, &den, t0, truncation);
        s[0] = Fe(0);
        s
    };
    BranchGerm::new(f, coord(LatticeVec::new(1, 0)), coord(LatticeVec::new(0, 1)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaReport {
    pub delta: usize,
    pub multiplicity: usize,
    pub conductor: usize,
    pub gaps: Vec<usize>,
    pub truncation: usize,
}

impl DeltaReport {
    pub fn to_json(&self) -> Value {
        json!({
            "delta": self.delta, "multiplicity": self.multiplicity, "conductor": self.conductor,
            "gaps": self.gaps, "truncation": self.truncation,
        })
    }
}

/// Number of gaps of the value semigroup, found by echelonizing the jets of
/// all monomials `u^i v^j` of order below the truncation. The conductor `c` is
/// accepted only when `[c, N)` contains at least `multiplicity` consecutive
/// values, which forces every larger integer into the semigroup.
pub fn delta_invariant(g: &BranchGerm) -> Result<DeltaReport, CharpError> {
    let f = &g.field;
    let n = g.truncation();
    let ou = g.order_u().ok_or(CharpError::BadGerm)?;
    let ov = g.order_v().ok_or(CharpError::BadGerm)?;
    let mut pivots: Vec<Option<Vec<Fe>>> = vec![None; n];
    let mut insert = |mut vec: Vec<Fe>| {
        while let Some(lead) = vec.iter().position(|&x| x != Fe(0)) {
            match &pivots[lead] {
                Some(row) => {
                    let c = f.div(vec[lead], row[lead]).expect("pivot is nonzero");
                    for (k, x) in vec.iter_mut().enumerate().skip(lead) {
                        *x = f.sub(*x, f.mul(c, row[k]));
                    }
                }
                None => {
                    pivots[lead] = Some(vec);
                    return;
                }
            }
        }
    };
    let mut upow = {
        let mut one = vec![Fe(0); n];
        one[0] = f.one();
        one
    };
    let mut i = 0;
    while i * ou < n {
        let mut mono = upow.clone();
        let mut j = 0;
        while i * ou + j * ov < n {
            insert(mono.clone());
            mono = series_mul(f, &mono, &g.v);
            j += 1;
        }
        upow = series_mul(f, &upow, &g.u);
        i += 1;
    }
    let values: Vec<usize> = (0..n).filter(|&k| pivots[k].is_some()).collect();
    let multiplicity = values.iter().copied().find(|&k| k > 0).ok_or(CharpError::TruncationInsufficient { truncation: n })?;
    let mut conductor = n;
    while conductor > 0 && pivots[conductor - 1].is_some() {
        conductor -= 1;
    }
    if n - conductor < multiplicity {
        let gcd = values.iter().fold(0usize, |a, &b| num_integer::Integer::gcd(&a, &b));
        if gcd > 1 {
            return Err(CharpError::NotPrimitive(gcd));
        }
        return Err(CharpError::TruncationInsufficient { truncation: n });
    }
    let gaps: Vec<usize> = (0..conductor).filter(|&k| pivots[k].is_none()).collect();
    Ok(DeltaReport { delta: gaps.len(), multiplicity, conductor, gaps, truncation: n })
}

/// Default truncation order for branch germs.
pub fn default_truncation(q: u64) -> usize {
    4 * q as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Intersection {
    pub s: Fe,
    pub s_prime: Fe,
    /// `s^q` and `s'^q` before taking roots.
    pub s_q: Fe,
    pub s_prime_q: Fe,
    /// Whether `f(s) = f'(s')` on both coordinates.
    pub verified: bool,
    /// Certified as `area2(Delta_q)` since the intersection is a single point.
    pub multiplicity: u64,
}

impl Intersection {
    pub fn to_json(&self, f: &Gf) -> Value {
        json!({
            "s": f.display(self.s), "s_prime": f.display(self.s_prime),
            "s_pow_q": f.display(self.s_q), "s_prime_pow_q": f.display(self.s_prime_q),
            "verified": self.verified, "multiplicity": self.multiplicity,
        })
    }
}

fn same_point(c: &ParamCurveCharP, s: Fe, c2: &ParamCurveCharP, s2: Fe) -> bool {
    let f = &c.field;
    [LatticeVec::new(1, 0), LatticeVec::new(0, 1)].into_iter().all(|m| {
        let a = pullback(c, m).eval(f, s);
        let b = pullback(c2, m).eval(f, s2);
        a.is_some() && a == b
    })
}

/// The unique common point of two curves on `S_q`, from the closed formulas
/// `s^q = chi'(m2)(chi(m1) - chi'(m1)) / D` and `s'^q = chi(m2)(chi(m1) - chi'(m1)) / D`
/// with `D = chi(m1) chi'(m2) - chi'(m1) chi(m2)`, `m1 = (1,0)`, `m2 = (-1,q)`.
pub fn intersect_sq(c: &ParamCurveCharP, c2: &ParamCurveCharP) -> Result<Intersection, CharpError> {
    let (CurveData::Sq { chi }, CurveData::Sq { chi: chi2 }) = (c.data, c2.data) else {
        return Err(CharpError::WrongVariant("triangle"));
    };
    let f = &c.field;
    if f.p() == 2 {
        return Err(CharpError::CharacteristicTwo);
    }
    if chi == chi2 {
        return Err(CharpError::SameCurve);
    }
    let q = c.q as i64;
    let (m1, m2) = (LatticeVec::new(1, 0), LatticeVec::new(-1, q));
    let (a, a2, b, b2) = (chi.eval(f, m1), chi2.eval(f, m1), chi.eval(f, m2), chi2.eval(f, m2));
    let den = f.sub(f.mul(a, b2), f.mul(a2, b));
    if den == f.zero() {
        return Err(CharpError::DegenerateCharacters);
    }
    let diff = f.sub(a, a2);
    let s_q = f.div(f.mul(b2, diff), den)?;
    let s_prime_q = f.div(f.mul(b, diff), den)?;
    let s = f.root_p_power(s_q, c.r);
    let s_prime = f.root_p_power(s_prime_q, c.r);
    if [s, s_prime].iter().any(|x| *x == f.zero() || *x == f.one()) {
        return Err(CharpError::BoundaryIntersection);
    }
    let verified = same_point(c, s, c2, s_prime);
    let surface = standard_surfaces(q, SurfaceVariant::Triangle)?;
    let multiplicity = area2(surface.polygon.as_ref().expect("standard surfaces carry a polygon"));
    Ok(Intersection { s, s_prime, s_q, s_prime_q, verified, multiplicity })
}

/// Every pair `(s, s')` of torus parameters with `f(s) = f'(s')`, by exhaustive scan.
pub fn intersect_oracle(c: &ParamCurveCharP, c2: &ParamCurveCharP) -> Vec<(Fe, Fe)> {
    let f = &c.field;
    let torus: Vec<Fe> = f.elements().filter(|t| !boundary_parameters(c).contains(t)).collect();
    let torus2: Vec<Fe> = f.elements().filter(|t| !boundary_parameters(c2).contains(t)).collect();
    torus
        .par_iter()
        .flat_map_iter(|&s| torus2.iter().filter(move |&&s2| same_point(c, s, c2, s2)).map(move |&s2| (s, s2)))
        .collect()
}

/// Number of singular points of a curve on `S'_q`: distinct zeros of
/// `d((t - xi)/(t(t - 1)))` over the algebraic closure.
pub fn singular_count_sqprime(c: &ParamCurveCharP) -> Result<usize, CharpError> {
    if c.variant() != SurfaceVariant::Parallelogram {
        return Err(CharpError::WrongVariant("parallelogram"));
    }
    Ok(critical_polynomial(c)?.distinct_root_count(&c.field))
}

/// The interior lattice points of the relevant polygon, i.e. the arithmetic
/// genus of the linear system.
pub fn arithmetic_genus(q: u64, variant: SurfaceVariant) -> Result<u64, CharpError> {
    let s = standard_surfaces(q as i64, variant)?;
    Ok(interior_points(s.polygon.as_ref().expect("standard surfaces carry a polygon")))
}

/// Whether the delta invariants of the singular points exhaust the arithmetic
/// genus, so the curve is rational with no further singularities.
pub fn genus_budget_check(q: u64, variant: SurfaceVariant, deltas: &[usize]) -> Result<bool, CharpError> {
    Ok(deltas.iter().sum::<usize>() as u64 == arithmetic_genus(q, variant)?)
}

/// Per-singular-point data on either surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularPoint {
    pub t: Fe,
    pub orders: (usize, usize),
    pub delta: DeltaReport,
}

/// The singular points of the curve, their germ invariants, and the genus budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularityAnalysis {
    pub critical_polynomial: Poly,
    pub distinct_critical: usize,
    pub points: Vec<SingularPoint>,
    pub arithmetic_genus: u64,
    pub budget_ok: bool,
}

impl SingularityAnalysis {
    pub fn to_json(&self, f: &Gf) -> Value {
        json!({
            "critical_polynomial": self.critical_polynomial.display(f),
            "distinct_critical_points": self.distinct_critical,
            "points": self.points.iter().map(|p| json!({
                "t": f.display(p.t), "local_orders": [p.orders.0, p.orders.1], "delta": p.delta.to_json(),
            })).collect::<Vec<_>>(),
            "delta_total": self.points.iter().map(|p| p.delta.delta).sum::<usize>(),
            "arithmetic_genus": self.arithmetic_genus,
            "budget_ok": self.budget_ok,
        })
    }
}

pub fn analyze_singularities(c: &ParamCurveCharP) -> Result<SingularityAnalysis, CharpError> {
    let f = &c.field;
    let poly = critical_polynomial(c)?;
    let pts = critical_points(c)?;
    let trunc = default_truncation(c.q);
    let mut points = Vec::new();
    for t in pts {
        let delta = delta_invariant(&germ_at(c, t, trunc)?)?;
        points.push(SingularPoint { t, orders: local_orders(c, t)?, delta });
    }
    let deltas: Vec<usize> = points.iter().map(|p| p.delta.delta).collect();
    Ok(SingularityAnalysis {
        distinct_critical: poly.distinct_root_count(f),
        critical_polynomial: poly,
        points,
        arithmetic_genus: arithmetic_genus(c.q, c.variant())?,
        budget_ok: genus_budget_check(c.q, c.variant(), &deltas)?,
    })
}

/// A named inequality of the admissible genus range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bound {
    pub name: String,
    pub value: i64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeveriReport {
    pub variant: SurfaceVariant,
    pub d: i64,
    pub q: u64,
    pub p: u64,
    pub g: i64,
    pub bounds: Vec<Bound>,
    pub minus_kc: i64,
    pub expected_dim: i64,
    pub zariski_bound: i64,
    /// Arithmetic genus of the general member `E` of the primitive system.
    pub pa_e: i64,
    pub intersection_number: i64,
    pub union_nodes: i64,
    pub marked_nodes: i64,
    pub unmarked_nodes: i64,
    pub unmarked_numerator: i64,
    pub unmarked_integral: bool,
    pub pa_reconstructed: i64,
    /// `-C_i.K - sum ord(df)` for the rational components, and `-E.K`.
    pub lemma_margins: (i64, i64),
    pub mixed_dim: i64,
    pub nodal_dim: i64,
    pub reducible: bool,
}

impl SeveriReport {
    pub fn to_json(&self) -> Value {
        json!({
            "variant": self.variant, "d": self.d, "q": self.q, "p": self.p, "genus": self.g,
            "bounds": self.bounds.iter().map(|b| json!({"name": b.name, "value": b.value, "ok": b.ok})).collect::<Vec<_>>(),
            "minus_KC": self.minus_kc, "expected_dim": self.expected_dim, "zariski_bound": self.zariski_bound,
            "nodeless_component": {"dim": self.nodal_dim},
            "nodal_component": {
                "pa_E": self.pa_e, "E_dot_Ci": self.intersection_number, "union_nodes": self.union_nodes,
                "marked_nodes": self.marked_nodes, "unmarked_nodes": self.unmarked_nodes,
                "unmarked_numerator": self.unmarked_numerator, "unmarked_integral": self.unmarked_integral,
                "pa_C_prime": self.pa_reconstructed,
                "deformation_margins": {"rational_components": self.lemma_margins.0, "E": self.lemma_margins.1},
                "dim": self.mixed_dim,
            },
            "reducible": self.reducible,
        })
    }
}

/// Integer bookkeeping for the reducibility of the Severi variety of genus
/// `g` curves in `|d L_q|` (triangle) or `|d L'_q|` (parallelogram).
///
/// Returns `GenusOutOfRange` naming every failed bound when `g` is outside
/// the admissible range.
#[allow(clippy::int_plus_one)] // bounds are written as stated
pub fn severi_numerology(d: i64, q: u64, g: i64, variant: SurfaceVariant) -> Result<SeveriReport, CharpError> {
    let (p, _) = prime_power(q).ok_or(CharpError::NotPrimePower(q))?;
    if d < 1 {
        return Err(CharpError::BadDegree);
    }
    let qi = q as i64;
    let surface = standard_surfaces(qi, variant)?;
    let poly = surface.polygon.as_ref().expect("standard surfaces carry a polygon");
    let pa_e = interior_points(poly) as i64;
    let intersection_number = area2(poly) as i64;
    let minus_kc = boundary_length(&poly.dilate(d)) as i64;
    let bounds = match variant {
        SurfaceVariant::Triangle => vec![
            Bound { name: "p > 2".into(), value: p as i64, ok: p > 2 },
            Bound { name: "d >= 2".into(), value: 2, ok: d >= 2 },
            Bound { name: "g >= 1".into(), value: 1, ok: g >= 1 },
            Bound { name: "g >= (q-1)/2".into(), value: (qi - 1) / 2, ok: 2 * g >= qi - 1 },
            Bound { name: "g <= (2dq-2d-q-1)/2".into(), value: (2 * d * qi - 2 * d - qi - 1).div_euclid(2), ok: 2 * g <= 2 * d * qi - 2 * d - qi - 1 },
            Bound { name: "g <= (d-1)(d-2)/2".into(), value: (d - 1) * (d - 2) / 2, ok: 2 * g <= (d - 1) * (d - 2) },
        ],
        SurfaceVariant::Parallelogram => vec![
            Bound { name: "d >= 2".into(), value: 2, ok: d >= 2 },
            Bound { name: "g >= 1".into(), value: 1, ok: g >= 1 },
            Bound { name: "g >= q-1".into(), value: qi - 1, ok: g >= qi - 1 },
            Bound { name: "g <= 2dq-q-d-1".into(), value: 2 * d * qi - qi - d - 1, ok: g <= 2 * d * qi - qi - d - 1 },
            Bound { name: "g <= (d-1)^2".into(), value: (d - 1) * (d - 1), ok: g <= (d - 1) * (d - 1) },
        ],
    };
    let failing: Vec<String> = bounds.iter().filter(|b| !b.ok).map(|b| b.name.clone()).collect();
    if !failing.is_empty() {
        return Err(CharpError::GenusOutOfRange { g, failing });
    }
    let gu = g as u64;
    let expected_dim = minus_kc + g - 1;
    let zb = zariski_bound(minus_kc, 0, gu, false);
    // E general in the primitive system plus d-1 rational curves C_i; every
    // point of E meeting a C_i is a node, and the C_i meet each other only at
    // non-nodal tangency points.
    let union_nodes = (d - 1) * intersection_number;
    // Unmarked nodes k are kept; p_a(C') = p_a(E) + k - (d - 1) must equal g.
    let unmarked_numerator = 2 * (g - pa_e + d - 1);
    let unmarked_integral = unmarked_numerator % 2 == 0;
    let unmarked_nodes = unmarked_numerator / 2;
    let marked_nodes = union_nodes - unmarked_nodes;
    let pa_reconstructed = pa_e + unmarked_nodes - (d - 1);
    // Order of vanishing of df summed over each rational component.
    let df_orders = match variant {
        SurfaceVariant::Triangle => 1,
        SurfaceVariant::Parallelogram => 2,
    };
    let minus_k_component = boundary_length(poly) as i64;
    let lemma_margins = (minus_k_component - df_orders, minus_k_component);
    let mixed_dim = minus_kc + pa_reconstructed - 1;
    let nodal_dim = expected_dim;
    let reducible = unmarked_integral
        && marked_nodes >= 1
        && unmarked_nodes >= d - 1
        && pa_reconstructed == g
        && lemma_margins.0 > 0
        && lemma_margins.1 > 0
        && mixed_dim == expected_dim
        && nodal_dim == zb;
    Ok(SeveriReport {
        variant,
        d,
        q,
        p,
        g,
        bounds,
        minus_kc,
        expected_dim,
        zariski_bound: zb,
        pa_e,
        intersection_number,
        union_nodes,
        marked_nodes,
        unmarked_nodes,
        unmarked_numerator,
        unmarked_integral,
        pa_reconstructed,
        lemma_margins,
        mixed_dim,
        nodal_dim,
        reducible,
    })
}

/// The admissible genus range `[lower, upper]` (possibly empty) for `d` and `q`.
pub fn genus_range(d: i64, q: u64, variant: SurfaceVariant) -> (i64, i64) {
    let qi = q as i64;
    match variant {
        SurfaceVariant::Triangle => (((qi - 1) / 2).max(1), ((2 * d * qi - 2 * d - qi - 1) / 2).min((d - 1) * (d - 2) / 2)),
        SurfaceVariant::Parallelogram => ((qi - 1).max(1), (2 * d * qi - qi - d - 1).min((d - 1) * (d - 1))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(p: u64, n: u32, q: u64, chi: (Fe, Fe)) -> ParamCurveCharP {
        let f = Gf::new(p, n).unwrap();
        ParamCurveCharP::sq(&f, q, Character::new(chi.0, chi.1).unwrap()).unwrap()
    }

    #[test]
    fn pullbacks() {
        let c = sq(3, 1, 3, (Fe(1), Fe(1)));
        let f = &c.field;
        let e1 = pullback(&c, LatticeVec::new(1, 0));
        assert_eq!(e1.factors, vec![(f.zero(), 0), (f.one(), 3)]);
        let zero = pullback(&c, LatticeVec::new(0, 0));
        for t in f.elements() {
            assert_eq!(zero.eval(f, t), Some(f.one()));
        }
        let e2 = pullback(&c, LatticeVec::new(0, 1));
        assert_eq!(e2.factors, vec![(f.zero(), 1), (f.one(), 1)]);
    }

    #[test]
    fn critical_point_is_one_half() {
        for (p, n, q) in [(3, 1, 3), (5, 1, 5), (3, 2, 9), (5, 2, 25)] {
            let c = sq(p, n, q, (Fe(1), Fe(1)));
            let f = &c.field;
            let half = f.inv(f.from_int(2)).unwrap();
            assert_eq!(critical_points(&c).unwrap(), vec![half]);
            assert_eq!(local_orders(&c, half).unwrap(), (q as usize, 2));
        }
        let c = sq(5, 1, 5, (Fe(1), Fe(1)));
        assert_eq!(critical_points(&c).unwrap(), vec![Fe(3)]);
        assert_eq!(critical_points(&sq(2, 2, 2, (Fe(1), Fe(1)))), Err(CharpError::CharacteristicTwo));
    }

    #[test]
    fn non_critical_orders() {
        let c = sq(5, 1, 5, (Fe(1), Fe(2)));
        // x^{e1} = (t-1)^q is a q-th power, so its order is q everywhere.
        assert_eq!(local_orders(&c, Fe(2)).unwrap(), (5, 1));
        assert_eq!(local_orders(&c, Fe(0)), Err(CharpError::OffChart));
    }

    #[test]
    fn delta_of_monomial_germs() {
        let f = Gf::new(7, 1).unwrap();
        assert_eq!(delta_invariant(&BranchGerm::monomial(&f, 2, 3, 12).unwrap()).unwrap().delta, 1);
        let f5 = Gf::new(5, 1).unwrap();
        let r = delta_invariant(&BranchGerm::monomial(&f5, 2, 5, 20).unwrap()).unwrap();
        assert_eq!((r.delta, r.conductor, r.multiplicity), (2, 4, 2));
        assert_eq!(delta_invariant(&BranchGerm::monomial(&f, 3, 4, 24).unwrap()).unwrap().delta, 3);
        assert_eq!(delta_invariant(&BranchGerm::monomial(&f, 2, 4, 24).unwrap()), Err(CharpError::NotPrimitive(2)));
        assert_eq!(delta_invariant(&BranchGerm::monomial(&f, 3, 7, 12).unwrap()), Err(CharpError::TruncationInsufficient { truncation: 12 }));
        assert_eq!(BranchGerm::new(&f, vec![Fe(1), Fe(1)], vec![Fe(0), Fe(1)]), Err(CharpError::BadGerm));
    }

    #[test]
    fn char_two_germ_has_delta_q_minus_one() {
        // (s^2/(s - lambda), s^4) over F_4.
        let f = Gf::new(2, 2).unwrap();
        let lambda = f.parse("a").unwrap();
        let s2 = Poly::new(vec![Fe(0), Fe(0), f.one()]);
        let den = Poly::linear(&f, lambda);
        let s4 = Poly::new(vec![Fe(0), Fe(0), Fe(0), Fe(0), f.one()]);
        let one = Poly::constant(f.one());
        let g = BranchGerm::from_fractions(&f, (&s2, &den), (&s4, &one), 16).unwrap();
        assert_eq!(delta_invariant(&g).unwrap().delta, 3);
    }

    #[test]
    fn sq_singularity_budget() {
        for (p, n, q) in [(3, 1, 3), (5, 1, 5), (3, 2, 9)] {
            let c = sq(p, n, q, (Fe(1), Fe(1)));
            let a = analyze_singularities(&c).unwrap();
            assert_eq!(a.points.len(), 1);
            assert_eq!(a.points[0].delta.delta, (q as usize - 1) / 2);
            assert!(a.budget_ok);
        }
        assert!(genus_budget_check(5, SurfaceVariant::Triangle, &[2]).unwrap());
        assert!(!genus_budget_check(5, SurfaceVariant::Triangle, &[1]).unwrap());
        assert!(genus_budget_check(3, SurfaceVariant::Parallelogram, &[1, 1]).unwrap());
        assert!(genus_budget_check(4, SurfaceVariant::Parallelogram, &[3]).unwrap());
    }

    #[test]
    fn intersection_matches_oracle() {
        let f = Gf::new(3, 2).unwrap();
        let g = f.primitive();
        let c = ParamCurveCharP::sq(&f, 3, Character::new(f.one(), f.one()).unwrap()).unwrap();
        let c2 = ParamCurveCharP::sq(&f, 3, Character::new(g, f.one()).unwrap()).unwrap();
        let x = intersect_sq(&c, &c2).unwrap();
        assert!(x.verified);
        assert_eq!(x.multiplicity, 3);
        assert_eq!(intersect_oracle(&c, &c2), vec![(x.s, x.s_prime)]);
        assert_eq!(intersect_sq(&c, &c), Err(CharpError::SameCurve));
    }

    #[test]
    fn sqprime_singular_counts() {
        for (p, m) in [(3u64, 1u32), (5, 1), (2, 2), (2, 3)] {
            let f = Gf::new(p, 2 * m).unwrap();
            let q = p.pow(m);
            for xi in f.subfield(m) {
                if xi == f.zero() || xi == f.one() {
                    continue;
                }
                let c = ParamCurveCharP::sq_prime(&f, q, xi, Character::new(f.one(), f.one()).unwrap()).unwrap();
                let expected = if p == 2 { 1 } else { 2 };
                assert_eq!(singular_count_sqprime(&c).unwrap(), expected);
                let a = analyze_singularities(&c).unwrap();
                assert_eq!(a.points.len(), expected);
                assert!(a.budget_ok, "p={p} q={q}");
            }
        }
    }

    #[test]
    fn severi_examples() {
        match severi_numerology(2, 3, 1, SurfaceVariant::Triangle) {
            Err(CharpError::GenusOutOfRange { failing, .. }) => assert_eq!(failing, vec!["g <= (d-1)(d-2)/2".to_string()]),
            other => panic!("{other:?}"),
        }
        let r = severi_numerology(3, 3, 1, SurfaceVariant::Triangle).unwrap();
        assert_eq!((r.expected_dim, r.union_nodes, r.marked_nodes, r.unmarked_nodes), (9, 6, 4, 2));
        assert!(r.reducible);
        let r = severi_numerology(2, 2, 1, SurfaceVariant::Parallelogram).unwrap();
        assert_eq!(r.expected_dim, 8);
        assert!(r.reducible);
        assert!(matches!(severi_numerology(3, 4, 2, SurfaceVariant::Triangle), Err(CharpError::GenusOutOfRange { .. })));
    }
}
