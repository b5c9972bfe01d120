//! Finite fields `F_{p^n}` in a polynomial basis, and polynomials over them.
//!
//! Elements are stored as the integer whose base-`p` digits are the
//! coefficients in the basis `1, a, a^2, ..` where `a` is a root of the stored
//! irreducible modulus. Multiplication goes through discrete log tables
//! built from a primitive element, so fields are capped at `MAX_FIELD_SIZE`.

use std::fmt;
use std::sync::Arc;

pub const MAX_FIELD_SIZE: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field of size {p}^{n} exceeds the supported maximum {MAX_FIELD_SIZE}")]
    TooLarge { p: u64, n: u32 },
    #[error("cannot parse field element {0:?}")]
    Parse(String),
    #[error("division by zero")]
    DivisionByZero,
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Writes `q = p^r`, or `None` when `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut r = 0;
    let mut x = q;
    while x.is_multiple_of(p) {
        x /= p;
        r += 1;
    }
    (x == 1).then_some((p, r))
}

/// An element of a [`Gf`]; only meaningful together with its field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fe(pub u32);

#[derive(Debug)]
struct Tables {
    p: u64,
    n: u32,
    size: u64,
    /// Monic modulus, coefficients from low to high degree (length `n + 1`).
    modulus: Vec<u64>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// The field `F_{p^n}`. Cloning is cheap.
#[derive(Debug, Clone)]
pub struct Gf(Arc<Tables>);

impl PartialEq for Gf {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.modulus == other.0.modulus
    }
}
impl Eq for Gf {}

fn poly_mulmod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let n = modulus.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for d in (n..prod.len()).rev() {
        let c = prod[d];
        if c == 0 {
            continue;
        }
        for (k, &m) in modulus.iter().enumerate() {
            let idx = d - n + k;
            prod[idx] = (prod[idx] + p - (c * m) % p) % p;
        }
    }
    prod.truncate(n);
    prod.resize(n, 0);
    prod
}

/// Remainder of `a` modulo a monic `b` over `F_p` is zero.
fn divides(b: &[u64], a: &[u64], p: u64) -> bool {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let c = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        for (k, &m) in b.iter().enumerate() {
            r[shift + k] = (r[shift + k] + p - (c * m) % p) % p;
        }
        r.pop();
    }
    r.iter().all(|&x| x == 0)
}

fn monic_polys(p: u64, d: u32) -> impl Iterator<Item = Vec<u64>> {
    (0..p.pow(d)).map(move |mut code| {
        let mut v = Vec::with_capacity(d as usize + 1);
        for _ in 0..d {
            v.push(code % p);
            code /= p;
        }
        v.push(1);
        v
    })
}

fn is_irreducible(f: &[u64], p: u64) -> bool {
    let n = (f.len() - 1) as u32;
    (1..=n / 2).all(|d| monic_polys(p, d).all(|g| !divides(&g, f, p)))
}

impl Gf {
    pub fn new(p: u64, n: u32) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if n == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let size = p.checked_pow(n).filter(|&s| s <= MAX_FIELD_SIZE).ok_or(FieldError::TooLarge { p, n })?;
        let modulus = monic_polys(p, n).find(|f| is_irreducible(f, p)).expect("irreducible polynomials exist in every degree");
        let digits = |mut c: u64| -> Vec<u64> {
            let mut v = vec![0; n as usize];
            for x in v.iter_mut() {
                *x = c % p;
                c /= p;
            }
            v
        };
        let encode = |v: &[u64]| -> u64 { v.iter().rev().fold(0, |acc, &x| acc * p + x) };
        let order = size - 1;
        let mut exp = Vec::new();
        for g in 2..size.max(3) {
            let g = if size == 2 { 1 } else { g };
            let gd = digits(g);
            let mut table = Vec::with_capacity(order as usize);
            let mut x = digits(1);
            let mut ok = true;
            for i in 0..order {
                let c = encode(&x);
                if i > 0 && c == 1 {
                    ok = false;
                    break;
                }
                table.push(c as u32);
                x = poly_mulmod(&x, &gd, &modulus, p);
            }
            if ok {
                exp = table;
                break;
            }
        }
        let mut log = vec![0u32; size as usize];
        for (i, &c) in exp.iter().enumerate() {
            log[c as usize] = i as u32;
        }
        Ok(Gf(Arc::new(Tables { p, n, size, modulus, exp, log })))
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn degree(&self) -> u32 {
        self.0.n
    }

    pub fn size(&self) -> u64 {
        self.0.size
    }

    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub fn zero(&self) -> Fe {
        Fe(0)
    }

    pub fn one(&self) -> Fe {
        Fe(1)
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, k: i64) -> Fe {
        Fe(k.rem_euclid(self.0.p as i64) as u32)
    }

    pub fn from_code(&self, c: u64) -> Option<Fe> {
        (c < self.0.size).then_some(Fe(c as u32))
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.0.size as u32).map(Fe)
    }

    pub fn coeffs(&self, x: Fe) -> Vec<u64> {
        let mut c = u64::from(x.0);
        (0..self.0.n)
            .map(|_| {
                let d = c % self.0.p;
                c /= self.0.p;
                d
            })
            .collect()
    }

    fn encode(&self, v: &[u64]) -> Fe {
        Fe(v.iter().rev().fold(0u64, |acc, &x| acc * self.0.p + x) as u32)
    }

    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let p = self.0.p;
        let (x, y) = (self.coeffs(a), self.coeffs(b));
        self.encode(&x.iter().zip(&y).map(|(u, v)| (u + v) % p).collect::<Vec<_>>())
    }

    pub fn neg(&self, a: Fe) -> Fe {
        let p = self.0.p;
        self.encode(&self.coeffs(a).iter().map(|u| (p - u) % p).collect::<Vec<_>>())
    }

    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe(0);
        }
        let t = &self.0;
        let order = t.size - 1;
        let l = (u64::from(t.log[a.0 as usize]) + u64::from(t.log[b.0 as usize])) % order;
        Fe(t.exp[l as usize])
    }

    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a.0 == 0 {
            return None;
        }
        let t = &self.0;
        let order = t.size - 1;
        let l = (order - u64::from(t.log[a.0 as usize])) % order;
        Some(Fe(t.exp[l as usize]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe, FieldError> {
        Ok(self.mul(a, self.inv(b).ok_or(FieldError::DivisionByZero)?))
    }

    /// `a^k`; negative exponents need `a != 0`, and `0^0 = 1`.
    pub fn pow(&self, a: Fe, k: i64) -> Result<Fe, FieldError> {
        if a.0 == 0 {
            return match k {
                0 => Ok(Fe(1)),
                k if k > 0 => Ok(Fe(0)),
                _ => Err(FieldError::DivisionByZero),
            };
        }
        let t = &self.0;
        let order = (t.size - 1) as i128;
        let l = (i128::from(t.log[a.0 as usize]) * i128::from(k)).rem_euclid(order);
        Ok(Fe(t.exp[l as usize]))
    }

    /// A generator of the multiplicative group.
    pub fn primitive(&self) -> Fe {
        Fe(self.0.exp.get(1).copied().unwrap_or(1))
    }

    /// `x^(p^k)`.
    pub fn frobenius(&self, x: Fe, k: u32) -> Fe {
        let mut y = x;
        for _ in 0..k % self.0.n {
            y = self.pow(y, self.0.p as i64).expect("nonnegative exponent");
        }
        y
    }

    /// The unique `y` with `y^(p^r) = x`, via the inverse Frobenius.
    pub fn root_p_power(&self, x: Fe, r: u32) -> Fe {
        let n = self.0.n;
        self.frobenius(x, (n - r % n) % n)
    }

    /// Whether `x` lies in the subfield `F_{p^m}` (requires `m | n`).
    pub fn in_subfield(&self, x: Fe, m: u32) -> bool {
        self.frobenius(x, m) == x
    }

    /// The elements of the subfield `F_{p^m}`, for `m` dividing the degree.
    pub fn subfield(&self, m: u32) -> Vec<Fe> {
        self.elements().filter(|&x| self.in_subfield(x, m)).collect()
    }

    pub fn display(&self, x: Fe) -> String {
        let c = self.coeffs(x);
        let mut parts = Vec::new();
        for (i, &d) in c.iter().enumerate().rev() {
            if d == 0 {
                continue;
            }
            let mon = match i {
                0 => String::new(),
                1 => "a".to_string(),
                _ => format!("a^{i}"),
            };
            parts.push(match (d, i) {
                (_, 0) => d.to_string(),
                (1, _) => mon,
                _ => format!("{d}*{mon}"),
            });
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }

    /// Accepts an integer (reduced into the prime field), `g^k` for a power of
    /// the primitive element, or a polynomial in `a` such as `2*a^2 + a + 1`.
    pub fn parse(&self, s: &str) -> Result<Fe, FieldError> {
        let err = || FieldError::Parse(s.to_string());
        let s = s.trim();
        if let Some(k) = s.strip_prefix("g^") {
            return self.pow(self.primitive(), k.trim().parse().map_err(|_| err())?);
        }
        if s == "g" {
            return Ok(self.primitive());
        }
        if let Ok(k) = s.parse::<i64>() {
            return Ok(self.from_int(k));
        }
        let mut coeffs = vec![0u64; self.0.n as usize];
        for term in s.split('+') {
            let term = term.trim();
            let (c, mon) = match term.split_once('*') {
                Some((c, m)) => (c.trim().parse::<u64>().map_err(|_| err())?, m.trim()),
                None if term.starts_with('a') => (1, term),
                None => (term.parse::<u64>().map_err(|_| err())?, ""),
            };
            let deg = match mon {
                "" => 0,
                "a" => 1,
                m => m.strip_prefix("a^").and_then(|k| k.parse::<usize>().ok()).ok_or_else(err)?,
            };
            let slot = coeffs.get_mut(deg).ok_or_else(err)?;
            *slot = (*slot + c) % self.0.p;
        }
        Ok(self.encode(&coeffs))
    }
}

impl fmt::Display for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.0.p, self.0.n)
    }
}

/// Dense polynomial over a [`Gf`], coefficients from low to high degree with
/// no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    pub coeffs: Vec<Fe>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Fe>) -> Self {
        while coeffs.last() == Some(&Fe(0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn constant(c: Fe) -> Self {
        Self::new(vec![c])
    }

    /// `t - c`.
    pub fn linear(f: &Gf, c: Fe) -> Self {
        Self::new(vec![f.neg(c), f.one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.coeffs.get(i).copied().unwrap_or(Fe(0))
    }

    pub fn add(&self, f: &Gf, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|i| f.add(self.coeff(i), o.coeff(i))).collect())
    }

    pub fn sub(&self, f: &Gf, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|i| f.sub(self.coeff(i), o.coeff(i))).collect())
    }

    pub fn scale(&self, f: &Gf, c: Fe) -> Poly {
        Poly::new(self.coeffs.iter().map(|&x| f.mul(x, c)).collect())
    }

    pub fn mul(&self, f: &Gf, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Fe(0); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, f: &Gf, k: u64) -> Poly {
        let mut out = Poly::constant(f.one());
        for _ in 0..k {
            out = out.mul(f, self);
        }
        out
    }

    pub fn eval(&self, f: &Gf, x: Fe) -> Fe {
        self.coeffs.iter().rev().fold(Fe(0), |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn derivative(&self, f: &Gf) -> Poly {
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| f.mul(f.from_int(i as i64), c)).collect())
    }

    /// `(quotient, remainder)`; panics on division by zero.
    pub fn divrem(&self, f: &Gf, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead_inv = f.inv(d.coeffs[dd]).expect("nonzero leading coefficient");
        let mut r = self.coeffs.clone();
        let mut quo = vec![Fe(0); r.len().saturating_sub(dd)];
        while r.len() > dd && !r.is_empty() {
            let top = r.len() - 1;
            let c = f.mul(r[top], lead_inv);
            let shift = top - dd;
            quo[shift] = c;
            for (k, &m) in d.coeffs.iter().enumerate() {
                r[shift + k] = f.sub(r[shift + k], f.mul(c, m));
            }
            r.pop();
        }
        (Poly::new(quo), Poly::new(r))
    }

    pub fn monic(&self, f: &Gf) -> Poly {
        match self.coeffs.last() {
            Some(&l) => self.scale(f, f.inv(l).expect("nonzero")),
            None => Poly::zero(),
        }
    }

    pub fn gcd(&self, f: &Gf, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(f, &b).1;
            a = b;
            b = r;
        }
        a.monic(f)
    }

    /// For a polynomial in `t^p`, the polynomial whose `p`-th power it is.
    fn pth_root(&self, f: &Gf) -> Poly {
        let p = f.p() as usize;
        Poly::new(self.coeffs.iter().step_by(p).map(|&c| f.root_p_power(c, 1)).collect())
    }

    /// Number of distinct roots over the algebraic closure: the degree of the
    /// radical, computed by squarefree decomposition in characteristic `p`.
    pub fn distinct_root_count(&self, f: &Gf) -> usize {
        match self.degree() {
            None => panic!("the zero polynomial has infinitely many roots"),
            Some(0) => return 0,
            _ => {}
        }
        let d = self.derivative(f);
        if d.is_zero() {
            return self.pth_root(f).distinct_root_count(f);
        }
        let c = self.gcd(f, &d);
        let w = self.divrem(f, &c).0;
        let mut rest = c;
        loop {
            let g = rest.gcd(f, &w);
            if g.degree() == Some(0) {
                break;
            }
            rest = rest.divrem(f, &g).0;
        }
        w.degree().unwrap_or(0) + rest.distinct_root_count(f)
    }

    /// Roots lying in the field itself, by exhaustive evaluation.
    pub fn roots_in_field(&self, f: &Gf) -> Vec<Fe> {
        f.elements().filter(|&x| self.eval(f, x) == Fe(0)).collect()
    }

    /// Multiplicity of `x` as a root.
    pub fn root_multiplicity(&self, f: &Gf, x: Fe) -> usize {
        let lin = Poly::linear(f, x);
        let mut p = self.clone();
        let mut m = 0;
        while !p.is_zero() {
            let (quo, r) = p.divrem(f, &lin);
            if !r.is_zero() {
                break;
            }
            p = quo;
            m += 1;
        }
        m
    }

    pub fn display(&self, f: &Gf) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == Fe(0) {
                continue;
            }
            let cs = f.display(c);
            let cs = if cs.contains('+') { format!("({cs})") } else { cs };
            parts.push(match i {
                0 => cs,
                1 if c == f.one() => "t".to_string(),
                1 => format!("{cs}*t"),
                _ if c == f.one() => format!("t^{i}"),
                _ => format!("{cs}*t^{i}"),
            });
        }
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(2), Some((2, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
        assert!(is_prime(101) && !is_prime(91));
    }

    #[test]
    fn field_axioms_small() {
        for (p, n) in [(2, 1), (2, 3), (3, 2), (5, 1), (5, 2), (2, 4)] {
            let f = Gf::new(p, n).unwrap();
            assert_eq!(f.elements().count() as u64, p.pow(n));
            let g = f.primitive();
            let mut seen = std::collections::BTreeSet::new();
            let mut x = f.one();
            for _ in 0..f.size() - 1 {
                seen.insert(x);
                x = f.mul(x, g);
            }
            assert_eq!(seen.len() as u64, f.size() - 1, "{f}");
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), f.zero());
                if a != f.zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
                }
                assert_eq!(f.pow(a, f.size() as i64).unwrap(), a);
            }
        }
    }

    #[test]
    fn char_p_sum() {
        let f = Gf::new(3, 2).unwrap();
        let x = f.parse("a + 2").unwrap();
        let three = f.add(f.add(x, x), x);
        assert_eq!(three, f.zero());
    }

    #[test]
    fn inverse_frobenius_roots() {
        let f = Gf::new(5, 2).unwrap();
        for x in f.elements() {
            for r in 0..4 {
                let y = f.root_p_power(x, r);
                assert_eq!(f.pow(y, 5i64.pow(r)).unwrap(), x);
            }
        }
    }

    #[test]
    fn parse_and_display() {
        let f = Gf::new(3, 3).unwrap();
        for x in f.elements() {
            assert_eq!(f.parse(&f.display(x)).unwrap(), x);
        }
        assert_eq!(f.parse("g^0").unwrap(), f.one());
        assert_eq!(f.parse("-1").unwrap(), f.from_int(2));
        assert!(f.parse("b + 1").is_err());
    }

    #[test]
    fn subfields() {
        let f = Gf::new(2, 4).unwrap();
        assert_eq!(f.subfield(2).len(), 4);
        assert_eq!(f.subfield(1), vec![f.zero(), f.one()]);
    }

    #[test]
    fn polynomial_roots() {
        let f = Gf::new(2, 2).unwrap();
        let a = f.parse("a").unwrap();
        // t^2 + a = (t + sqrt(a))^2 has one distinct root in characteristic 2.
        let p = Poly::new(vec![a, f.zero(), f.one()]);
        assert_eq!(p.distinct_root_count(&f), 1);
        let sq = f.root_p_power(a, 1);
        assert_eq!(p.root_multiplicity(&f, sq), 2);
        let f3 = Gf::new(3, 1).unwrap();
        // t^2 - t + 2 is irreducible over F_3 but has two roots over the closure.
        let p = Poly::new(vec![f3.from_int(2), f3.from_int(-1), f3.one()]);
        assert_eq!(p.distinct_root_count(&f3), 2);
        assert!(p.roots_in_field(&f3).is_empty());
        // (t - 1)^3 (t + 1)^2 over F_3.
        let lin = |c: i64| Poly::linear(&f3, f3.from_int(c));
        let p = lin(1).pow(&f3, 3).mul(&f3, &lin(-1).pow(&f3, 2));
        assert_eq!(p.distinct_root_count(&f3), 2);
    }

    proptest! {
        #[test]
        fn distributive(a in 0u32..81, b in 0u32..81, c in 0u32..81) {
            let f = Gf::new(3, 4).unwrap();
            let (a, b, c) = (Fe(a), Fe(b), Fe(c));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        }

        #[test]
        fn gcd_divides(xs in proptest::collection::vec(0u32..9, 1..6), ys in proptest::collection::vec(0u32..9, 1..6)) {
            let f = Gf::new(3, 2).unwrap();
            let a = Poly::new(xs.into_iter().map(Fe).collect());
            let b = Poly::new(ys.into_iter().map(Fe).collect());
            prop_assume!(!a.is_zero() && !b.is_zero());
            let g = a.gcd(&f, &b);
            prop_assert!(a.divrem(&f, &g).1.is_zero());
            prop_assert!(b.divrem(&f, &g).1.is_zero());
        }
    }
}
