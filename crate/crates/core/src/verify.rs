//! The umbrella run behind `verify-paper`: every golden value and property
//! suite in one deterministic report.
//!
//! Each check produces a `computed` JSON object shaped like its entry in the
//! golden file. A check passes iff every key of the expected object matches
//! the computed value exactly; extra computed keys are ignored, and anything
//! informative but not golden goes under `details`.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::arith::q;
use crate::charp_curves::{
    analyze_singularities, critical_points, genus_range, intersect_oracle, intersect_sq, local_orders, severi_numerology,
    singular_count_sqprime, CharpError, Character, ParamCurveCharP,
};
use crate::deformation::{certify_bound, default_beta, deformation_space, generic_point, with_marked_points, PointConstraintSystem, Verdict};
use crate::enumeration::{enumerate_types, oracle::oracle_types, DegreeSpec, EnumerationBudget, EnumerationOptions};
use crate::field::{prime_power, Fe, Gf};
use crate::lattice_toric::{
    area2, boundary_length, interior_points, standard_surfaces, zariski_bound, LatticePolygon, LatticeVec, SurfaceVariant,
};
use crate::linalg::Matrix;
use crate::trop_rational::{samples, tropicalize};
use crate::tropical_curve::{combinatorial_type, degree, degree_to_json, genus, validate, ParamTropCurve};

/// Identifiers of the checks, in report order.
pub const CHECK_IDS: [&str; 8] = ["tropicalize", "deformation", "thm41", "thm42", "zariski", "enumeration", "pick", "severi"];

/// The golden file shipped with the crate.
pub const DEFAULT_GOLDEN: &str = include_str!("../golden/paper_golden.json");

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown check `{0}` (known: {known})", known = CHECK_IDS.join(", "))]
    UnknownCheck(String),
    #[error("golden file is not valid JSON: {0}")]
    GoldenParse(String),
    #[error("golden file has no entry for {0}")]
    GoldenMissing(String),
    #[error("filter selects no cases for check `{0}`")]
    EmptySelection(String),
    #[error("check `{check}` could not run: {message}")]
    Internal { check: String, message: String },
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub jobs: usize,
    /// Empty means every check.
    pub only: Vec<String>,
    pub p: Option<u64>,
    pub r: Option<u32>,
    pub golden: Value,
}

impl VerifyConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            jobs: 1,
            only: Vec::new(),
            p: None,
            r: None,
            golden: serde_json::from_str(DEFAULT_GOLDEN).expect("bundled golden file parses"),
        }
    }

    pub fn with_golden_text(mut self, text: &str) -> Result<Self, VerifyError> {
        self.golden = serde_json::from_str(text).map_err(|e| VerifyError::GoldenParse(e.to_string()))?;
        Ok(self)
    }

    fn selects(&self, id: &str) -> bool {
        self.only.is_empty() || self.only.iter().any(|o| o == id)
    }

    fn selects_q(&self, q: u64) -> bool {
        let Some((p, r)) = prime_power(q) else { return false };
        self.p.is_none_or(|x| x == p) && self.r.is_none_or(|x| x == r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub id: String,
    pub pass: bool,
    pub expected: Value,
    pub computed: Value,
    pub diff: Vec<String>,
    pub details: Value,
}

impl CheckResult {
    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "status": if self.pass { "PASS" } else { "FAIL" },
            "expected": self.expected,
            "computed": self.computed,
            "diff": self.diff,
            "details": self.details,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub filter: Value,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Value {
        let passed = self.checks.iter().filter(|c| c.pass).count();
        json!({
            "header": {"tool": "tropzar verify-paper", "seed": self.seed, "filter": self.filter},
            "checks": self.checks.iter().map(CheckResult::to_json).collect::<Vec<_>>(),
            "summary": {"passed": passed, "failed": self.checks.len() - passed, "all_pass": self.all_pass()},
        })
    }

    /// One `PASS id` / `FAIL id` line per check, followed by diff lines for failures.
    pub fn summary_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.checks {
            out.push(format!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.id));
            for d in &c.diff {
                out.push(format!("    {d}"));
            }
        }
        out
    }
}

/// Records every mismatch between `expected` and `computed` under `path`.
pub fn json_diff(expected: &Value, computed: &Value, path: &str, out: &mut Vec<String>) {
    match (expected, computed) {
        (Value::Object(e), Value::Object(c)) => {
            for (k, ev) in e {
                let p = format!("{path}.{k}");
                match c.get(k) {
                    Some(cv) => json_diff(ev, cv, &p, out),
                    None => out.push(format!("{p}: expected {ev}, computed nothing")),
                }
            }
        }
        (Value::Array(e), Value::Array(c)) if e.len() == c.len() => {
            for (i, (ev, cv)) in e.iter().zip(c).enumerate() {
                json_diff(ev, cv, &format!("{path}[{i}]"), out);
            }
        }
        _ if expected == computed => {}
        _ => out.push(format!("{path}: expected {expected}, computed {computed}")),
    }
}

fn internal(check: &str, e: impl std::fmt::Display) -> VerifyError {
    VerifyError::Internal { check: check.to_string(), message: e.to_string() }
}

/// Independent random stream per check, so filtering never shifts the
/// randomness seen by the checks that remain.
fn check_rng(seed: u64, id: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(CHECK_IDS.iter().position(|c| *c == id).unwrap_or(CHECK_IDS.len()) as u64);
    rng
}

pub fn verify_paper(cfg: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    for o in &cfg.only {
        if !CHECK_IDS.contains(&o.as_str()) {
            return Err(VerifyError::UnknownCheck(o.clone()));
        }
    }
    let mut checks = Vec::new();
    for id in CHECK_IDS {
        if !cfg.selects(id) {
            continue;
        }
        let golden = cfg.golden.get(id).ok_or_else(|| VerifyError::GoldenMissing(id.to_string()))?;
        let (expected, computed, details) = match id {
            "tropicalize" => with_expected(golden, check_tropicalize()?),
            "deformation" => with_expected(golden, check_deformation()?),
            "thm41" => {
                let (e, c) = check_thm41(cfg, golden)?;
                (e, c, Value::Null)
            }
            "thm42" => {
                let (e, c) = check_thm42(cfg, golden)?;
                (e, c, Value::Null)
            }
            "zariski" => with_expected(golden, check_zariski(cfg)?),
            "enumeration" => with_expected(golden, check_enumeration(cfg)?),
            "pick" => with_expected(golden, check_pick(cfg)?),
            "severi" => with_expected(golden, check_severi()?),
            _ => unreachable!(),
        };
        let mut diff = Vec::new();
        json_diff(&expected, &computed, id, &mut diff);
        checks.push(CheckResult { id: id.to_string(), pass: diff.is_empty(), expected, computed, diff, details });
    }
    let filter = json!({"only": cfg.only, "p": cfg.p, "r": cfg.r});
    Ok(VerifyReport { seed: cfg.seed, filter, checks })
}

fn with_expected(golden: &Value, (computed, details): (Value, Value)) -> (Value, Value, Value) {
    (golden.clone(), computed, details)
}

fn ratvec_key(c: &ParamTropCurve, v: usize) -> Value {
    c.h[v].to_json()
}

fn check_tropicalize() -> Result<(Value, Value), VerifyError> {
    let id = "tropicalize";
    let map = samples::marked_line();
    let c = tropicalize(&map).map_err(|e| internal(id, e))?;
    let g = &c.graph;
    let lengths: Vec<Value> = g.bounded_edges().map(|e| crate::arith::rational_json(g.edge(e).length.finite().expect("bounded"))).collect();
    let slope = |inf: usize| -> Value {
        let v = c.h[g.n_finite() + inf].to_lattice().expect("integral end vector");
        json!([v.x, v.y])
    };
    let mut vertices: Vec<Value> = (0..g.n_finite())
        .map(|v| {
            let mut ends: Vec<Value> = (0..g.n_infinite())
                .filter(|&i| g.end_edge(g.infinite_vertex(i)).map(|e| g.edge(e).a == v || g.edge(e).b == v).unwrap_or(false))
                .map(slope)
                .collect();
            ends.sort_by_key(|s| s.to_string());
            json!({"h": ratvec_key(&c, v), "end_slopes": ends})
        })
        .collect();
    vertices.sort_by_key(|v| v["h"].to_string());
    let deg = degree(&c).map_err(|e| internal(id, e))?;
    let reference = crate::tropical_curve::samples::marked_line();
    let same_type = combinatorial_type(&c).ok() == combinatorial_type(&reference).ok();
    let mut ref_positions: Vec<String> = reference.h.iter().map(|h| h.to_json().to_string()).collect();
    let mut positions: Vec<String> = c.h.iter().map(|h| h.to_json().to_string()).collect();
    ref_positions.sort();
    positions.sort();
    let computed = json!({
        "finite_vertices": g.n_finite(),
        "bounded_edge_lengths": lengths,
        "vertices": vertices,
        "end_slopes": (0..g.n_infinite()).map(slope).collect::<Vec<_>>(),
        "degree": degree_to_json(&deg),
        "genus": genus(g),
        "valid": validate(&c).is_valid(),
        "matches_reference_curve": same_type && positions == ref_positions,
    });
    Ok((computed, json!({"curve": c.to_json()})))
}

/// Whether `basis` spans the same subspace as `reference` (both as row lists).
fn same_span(basis: &[Vec<crate::arith::Q>], reference: &[Vec<crate::arith::Q>], ncols: usize) -> bool {
    let a = Matrix::from_rows(ncols, basis.to_vec());
    let b = Matrix::from_rows(ncols, reference.to_vec());
    let ra = a.rank();
    ra == b.rank() && a.stack(&b).rank() == ra
}

fn check_deformation() -> Result<(Value, Value), VerifyError> {
    let id = "deformation";
    let c = crate::tropical_curve::samples::marked_line();
    let ds = deformation_space(&c).map_err(|e| internal(id, e))?;
    // coordinates (vL.x, vL.y, vE.x, vE.y); the family ((a,b),(a,d))
    let (z, o) = (q(0), q(1));
    let family = vec![
        vec![o.clone(), z.clone(), o.clone(), z.clone()],
        vec![z.clone(), o.clone(), z.clone(), z.clone()],
        vec![z.clone(), z.clone(), z.clone(), o.clone()],
    ];
    let kernel = if same_span(&ds.basis, &family, 4) { "((a,b),(a,d))".to_string() } else { "other".to_string() };
    let trop = tropicalize(&samples::marked_line()).map_err(|e| internal(id, e))?;
    let ds2 = deformation_space(&trop).map_err(|e| internal(id, e))?;
    let computed = json!({
        "dim_E1": ds.dim_e1,
        "c": ds.c_gamma,
        "kernel": kernel,
        "tropicalization_agrees": ds2.dim_e1 == ds.dim_e1 && ds2.c_gamma == ds.c_gamma,
    });
    Ok((computed, ds.to_json(&c)))
}

fn golden_cases(cfg: &VerifyConfig, id: &str, golden: &Value) -> Result<Vec<(u64, Value)>, VerifyError> {
    let obj = golden.as_object().ok_or_else(|| VerifyError::GoldenMissing(format!("{id} cases")))?;
    let mut cases: Vec<(u64, Value)> = Vec::new();
    for (k, v) in obj {
        let qv: u64 = k.parse().map_err(|_| VerifyError::GoldenParse(format!("{id}: case key `{k}` is not a prime power")))?;
        if cfg.selects_q(qv) {
            cases.push((qv, v.clone()));
        }
    }
    if cases.is_empty() {
        return Err(VerifyError::EmptySelection(id.to_string()));
    }
    // the report lists cases by q, whatever order the golden file used
    cases.sort_by_key(|(qv, _)| *qv);
    Ok(cases)
}

fn field_name(f: &Gf) -> String {
    format!("F_{}^{}", f.p(), f.degree())
}

/// Number of random character pairs per field.
const THM41_PAIRS: usize = 20;

fn random_unit(f: &Gf, rng: &mut ChaCha8Rng) -> Fe {
    f.from_code(rng.gen_range(1..f.size())).expect("code in range")
}

fn check_thm41(cfg: &VerifyConfig, golden: &Value) -> Result<(Value, Value), VerifyError> {
    let id = "thm41";
    let cases = golden_cases(cfg, id, golden)?;
    let mut rng = check_rng(cfg.seed, id);
    let mut expected = Map::new();
    let mut computed = Map::new();
    for (qv, exp) in cases {
        let (p, r) = prime_power(qv).expect("selected keys are prime powers");
        let f = Gf::new(p, r + 1).map_err(|e| internal(id, e))?;
        let one = Character::new(f.one(), f.one()).map_err(|e| internal(id, e))?;
        let c = ParamCurveCharP::sq(&f, qv, one).map_err(|e| internal(id, e))?;
        let half = f.inv(f.from_int(2)).ok_or_else(|| internal(id, "2 is not invertible"))?;
        let crit = critical_points(&c).map_err(|e| internal(id, e))?;
        let crit_names: Vec<String> = crit.iter().map(|&t| if t == half { "1/2".to_string() } else { f.display(t) }).collect();
        let orders = local_orders(&c, half).map_err(|e| internal(id, e))?;
        let analysis = analyze_singularities(&c).map_err(|e| internal(id, e))?;
        let surface = standard_surfaces(qv as i64, SurfaceVariant::Triangle).map_err(|e| internal(id, e))?;
        let interior = interior_points(surface.polygon.as_ref().expect("standard surfaces carry a polygon"));
        let deltas: Vec<usize> = analysis.points.iter().map(|pt| pt.delta.delta).collect();

        let (mut unique, mut verified, mut matches_oracle, mut mult_q, mut resampled) = (0, 0, 0, 0, 0);
        let mut pairs = 0;
        while pairs < THM41_PAIRS {
            let chi = Character::new(random_unit(&f, &mut rng), random_unit(&f, &mut rng)).map_err(|e| internal(id, e))?;
            let chi2 = Character::new(random_unit(&f, &mut rng), random_unit(&f, &mut rng)).map_err(|e| internal(id, e))?;
            let c1 = ParamCurveCharP::sq(&f, qv, chi).map_err(|e| internal(id, e))?;
            let c2 = ParamCurveCharP::sq(&f, qv, chi2).map_err(|e| internal(id, e))?;
            let x = match intersect_sq(&c1, &c2) {
                Ok(x) => x,
                Err(CharpError::SameCurve | CharpError::DegenerateCharacters | CharpError::BoundaryIntersection) => {
                    resampled += 1;
                    continue;
                }
                Err(e) => return Err(internal(id, e)),
            };
            pairs += 1;
            let oracle = intersect_oracle(&c1, &c2);
            unique += usize::from(oracle.len() == 1);
            matches_oracle += usize::from(oracle == vec![(x.s, x.s_prime)]);
            verified += usize::from(x.verified);
            mult_q += usize::from(x.multiplicity == qv);
        }
        let key = qv.to_string();
        computed.insert(
            key.clone(),
            json!({
                "field": field_name(&f),
                "critical_points": crit_names,
                "local_orders": [orders.0, orders.1],
                "delta": deltas,
                "interior_points": interior,
                "budget_ok": analysis.budget_ok,
                "intersections": {
                    "pairs": pairs, "unique_point": unique, "formula_matches_oracle": matches_oracle,
                    "verified": verified, "multiplicity_q": mult_q, "resampled": resampled,
                },
            }),
        );
        expected.insert(key, exp);
    }
    Ok((Value::Object(expected), Value::Object(computed)))
}

fn check_thm42(cfg: &VerifyConfig, golden: &Value) -> Result<(Value, Value), VerifyError> {
    let id = "thm42";
    let cases = golden_cases(cfg, id, golden)?;
    let mut expected = Map::new();
    let mut computed = Map::new();
    for (qv, exp) in cases {
        let (p, m) = prime_power(qv).expect("selected keys are prime powers");
        // F_{q^2} splits the critical points whenever xi lies in F_q
        let f = Gf::new(p, 2 * m).map_err(|e| internal(id, e))?;
        let mut xis: Vec<Fe> = f.subfield(m).into_iter().filter(|&x| x != f.zero() && x != f.one()).collect();
        if xis.is_empty() {
            // F_2 has no admissible xi; in characteristic 2 the single
            // critical point is a square root, so any xi of F_4 works
            xis = f.elements().filter(|&x| x != f.zero() && x != f.one()).collect();
        }
        let one = Character::new(f.one(), f.one()).map_err(|e| internal(id, e))?;
        let mut counts = BTreeSet::new();
        let mut totals = BTreeSet::new();
        let mut budget_ok = true;
        for &xi in &xis {
            let c = ParamCurveCharP::sq_prime(&f, qv, xi, one).map_err(|e| internal(id, e))?;
            counts.insert(singular_count_sqprime(&c).map_err(|e| internal(id, e))?);
            let a = analyze_singularities(&c).map_err(|e| internal(id, e))?;
            counts.insert(a.points.len());
            totals.insert(a.points.iter().map(|pt| pt.delta.delta).sum::<usize>());
            budget_ok &= a.budget_ok;
        }
        let surface = standard_surfaces(qv as i64, SurfaceVariant::Parallelogram).map_err(|e| internal(id, e))?;
        let interior = interior_points(surface.polygon.as_ref().expect("standard surfaces carry a polygon"));
        let key = qv.to_string();
        computed.insert(
            key.clone(),
            json!({
                "field": field_name(&f),
                "xi_tested": xis.len(),
                "singular_counts": counts.into_iter().collect::<Vec<_>>(),
                "delta_totals": totals.into_iter().collect::<Vec<_>>(),
                "interior_points": interior,
                "budget_ok": budget_ok,
            }),
        );
        expected.insert(key, exp);
    }
    Ok((Value::Object(expected), Value::Object(computed)))
}

/// Target sets drawn per marked configuration.
pub const ZARISKI_SEEDS: usize = 100;

/// Outcome of the bound test on one type, one value of `k` and one choice of
/// marked edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZariskiCase {
    pub degree: String,
    pub genus: usize,
    pub type_index: usize,
    pub k: usize,
    pub marked_edges: Vec<usize>,
    pub beta: usize,
    pub verdict: Verdict,
    pub expected: Verdict,
    pub feasible_seeds: usize,
    pub onto: bool,
}

impl ZariskiCase {
    /// Seeds agree with each other and with the rank test, the verdict is as
    /// predicted, and no violated configuration is ever feasible.
    pub fn ok(&self) -> bool {
        let agree = self.feasible_seeds == 0 || self.feasible_seeds == ZARISKI_SEEDS;
        let rank_agrees = (self.feasible_seeds == ZARISKI_SEEDS) == self.onto;
        let violated_infeasible = self.expected == Verdict::Consistent || self.feasible_seeds == 0;
        agree && rank_agrees && violated_infeasible && self.verdict == self.expected
    }
}

/// The two degrees of the bound suite: the line and the dual of `Delta_2`.
pub fn zariski_degrees() -> Vec<(&'static str, DegreeSpec)> {
    let tri = standard_surfaces(2, SurfaceVariant::Triangle).expect("k = 2 is valid");
    vec![("line", DegreeSpec::line()), ("delta2", DegreeSpec::of_polygon(tri.polygon.as_ref().expect("polygon")))]
}

struct ZariskiJob {
    witness: usize,
    stream: u64,
    k: usize,
    edges: Vec<usize>,
    expected: Verdict,
}

/// Runs the bound suite on every enumerated type of genus at most 1 with
/// fewer than `r` ends. For each type, `k` runs over the bound and the bound
/// plus one, and the marked points over every set of `k` distinct edges.
/// Returns the cases and the number of `(type, k)` pairs with fewer than `k` edges.
pub fn zariski_suite(seed: u64, r: usize, jobs: usize) -> Result<(Vec<ZariskiCase>, usize), String> {
    let mut work = Vec::new();
    for (name, d) in zariski_degrees() {
        for g in 0..=1usize {
            let opts = EnumerationOptions { jobs, ..Default::default() };
            let res = enumerate_types(&d, g, r, &opts).map_err(|e| e.to_string())?;
            for (i, t) in res.types.into_iter().enumerate() {
                work.push((name, g, i, t.witness));
            }
        }
    }
    let mut skipped = 0;
    let mut job_list = Vec::new();
    for (w, (_, _, _, witness)) in work.iter().enumerate() {
        let n_edges = witness.graph.edges().len();
        let bound = witness.graph.n_infinite() as i64 + genus(&witness.graph) - 1;
        for (k, expected) in [(bound, Verdict::Consistent), (bound + 1, Verdict::Violated)] {
            if k < 0 || k as usize > n_edges {
                skipped += 1;
                continue;
            }
            for edges in (0..n_edges).combinations(k as usize) {
                let stream = job_list.len() as u64;
                job_list.push(ZariskiJob { witness: w, stream, k: k as usize, edges, expected });
            }
        }
    }
    let cases: Result<Vec<ZariskiCase>, String> = job_list
        .into_par_iter()
        .map(|job| {
            let (name, g, i, witness) = &work[job.witness];
            let (marked, verts) = with_marked_points(witness, &job.edges).map_err(|e| e.to_string())?;
            let beta = default_beta(&marked, job.k, &[]);
            let cert = certify_bound(&marked, job.k, &[], &beta).map_err(|e| e.to_string())?;
            let system = PointConstraintSystem::new(&marked, &verts).map_err(|e| e.to_string())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(job.stream);
            let feasible_seeds = (0..ZARISKI_SEEDS)
                .filter(|_| {
                    let targets: Vec<_> = (0..job.k).map(|_| generic_point(&mut rng)).collect();
                    system.is_feasible(&targets)
                })
                .count();
            Ok(ZariskiCase {
                degree: name.to_string(),
                genus: *g,
                type_index: *i,
                k: job.k,
                marked_edges: job.edges,
                beta: beta.len(),
                verdict: cert.verdict,
                expected: job.expected,
                feasible_seeds,
                onto: system.is_onto() && cert.point_projection.surjective(),
            })
        })
        .collect();
    Ok((cases?, skipped))
}

fn check_zariski(cfg: &VerifyConfig) -> Result<(Value, Value), VerifyError> {
    let id = "zariski";
    let (cases, skipped) = zariski_suite(cfg.seed, 6, cfg.jobs).map_err(|e| internal(id, e))?;
    let bad = |v: Verdict| cases.iter().filter(|c| c.expected == v && !c.ok()).count();
    let failures: Vec<Value> = cases
        .iter()
        .filter(|c| !c.ok())
        .map(|c| {
            json!({"degree": c.degree, "genus": c.genus, "type": c.type_index, "k": c.k, "marked_edges": c.marked_edges,
                   "verdict": c.verdict.as_str(), "feasible_seeds": c.feasible_seeds, "onto": c.onto})
        })
        .collect();
    // per (type, k): how many marked-edge choices make the point map onto
    let mut per_type: Vec<Value> = Vec::new();
    for c in &cases {
        let key = json!({"degree": c.degree, "genus": c.genus, "type": c.type_index, "k": c.k, "verdict": c.verdict.as_str()});
        match per_type.last_mut() {
            Some(last) if last["key"] == key => {
                last["placements"] = json!(last["placements"].as_u64().unwrap() + 1);
                last["onto"] = json!(last["onto"].as_u64().unwrap() + u64::from(c.onto));
            }
            _ => per_type.push(json!({"key": key, "placements": 1, "onto": u64::from(c.onto)})),
        }
    }
    let consistent_types = per_type.iter().filter(|t| t["key"]["verdict"] == "CONSISTENT").count();
    let never_onto = per_type.iter().filter(|t| t["key"]["verdict"] == "CONSISTENT" && t["onto"] == 0).count();
    let computed = json!({
        "cases": cases.len(),
        "consistent_failures": bad(Verdict::Consistent),
        "violated_failures": bad(Verdict::Violated),
        "seeds_per_case": ZARISKI_SEEDS,
    });
    let details = json!({
        "skipped_too_few_edges": skipped,
        "consistent_types": consistent_types,
        "consistent_types_never_onto": never_onto,
        "failures": failures,
        "per_type": per_type,
    });
    Ok((computed, details))
}

/// Every `(degree, genus, r, contracted)` budget whose edge bound is at most 8.
pub fn small_budgets() -> Vec<(&'static str, DegreeSpec, usize, usize, usize)> {
    let mut degrees = zariski_degrees();
    let simplex = LatticePolygon::new(vec![LatticeVec::new(0, 0), LatticeVec::new(2, 0), LatticeVec::new(0, 2)]).expect("triangle");
    degrees.push(("conic", DegreeSpec::of_polygon(&simplex)));
    let mut out = Vec::new();
    for (name, d) in degrees {
        for g in 0..=2usize {
            for r in 2..=6usize {
                if EnumerationBudget::new(g, r).edge_bound > 8 {
                    continue;
                }
                for contracted in 0..=1 {
                    out.push((name, d.clone(), g, r, contracted));
                }
            }
        }
    }
    out
}

fn check_enumeration(cfg: &VerifyConfig) -> Result<(Value, Value), VerifyError> {
    let id = "enumeration";
    let opts = EnumerationOptions { jobs: cfg.jobs, ..Default::default() };
    let line = enumerate_types(&DegreeSpec::line(), 0, 4, &opts).map_err(|e| internal(id, e))?;
    let mut mismatches = Vec::new();
    let mut per_budget = Vec::new();
    let budgets = small_budgets();
    for (name, d, g, r, contracted) in &budgets {
        let o = EnumerationOptions { allow_contracted: *contracted, jobs: cfg.jobs, ..Default::default() };
        let got = enumerate_types(d, *g, *r, &o).map_err(|e| internal(id, e))?.type_set();
        let want = oracle_types(d, *g, *r, *contracted);
        per_budget.push(json!({"degree": name, "genus": g, "r": r, "contracted": contracted, "types": got.len()}));
        if got != want {
            mismatches.push(json!({"degree": name, "genus": g, "r": r, "contracted": contracted, "enumerated": got.len(), "oracle": want.len()}));
        }
    }
    let computed = json!({"line_g0_r4_types": line.count(), "budgets_checked": budgets.len(), "mismatches": mismatches.len()});
    Ok((computed, json!({"budgets": per_budget, "mismatches": mismatches})))
}

/// Brute-force lattice point counts `(interior, boundary)` of a convex polygon.
fn count_points(vs: &[LatticeVec]) -> (u64, u64) {
    let (xmin, xmax) = (vs.iter().map(|v| v.x).min().unwrap(), vs.iter().map(|v| v.x).max().unwrap());
    let (ymin, ymax) = (vs.iter().map(|v| v.y).min().unwrap(), vs.iter().map(|v| v.y).max().unwrap());
    let n = vs.len();
    let orient = (0..n).map(|i| (vs[(i + 1) % n] - vs[i]).cross(vs[(i + 2) % n] - vs[(i + 1) % n])).sum::<i64>().signum();
    let (mut interior, mut boundary) = (0, 0);
    for x in xmin..=xmax {
        for y in ymin..=ymax {
            let pt = LatticeVec::new(x, y);
            let sides: Vec<i64> = (0..n).map(|i| orient * (vs[(i + 1) % n] - vs[i]).cross(pt - vs[i])).collect();
            if sides.iter().all(|&s| s > 0) {
                interior += 1;
            } else if sides.iter().all(|&s| s >= 0) {
                boundary += 1;
            }
        }
    }
    (interior, boundary)
}

pub const PICK_POLYGONS: usize = 1000;

/// A random convex lattice polygon: the hull of 3 to 10 points in a box of
/// random half-width up to 12, redrawn until it has positive area.
pub fn random_polygon(rng: &mut ChaCha8Rng) -> LatticePolygon {
    loop {
        let w = rng.gen_range(1..=12i64);
        let n = rng.gen_range(3..=10);
        let pts: Vec<LatticeVec> = (0..n).map(|_| LatticeVec::new(rng.gen_range(-w..=w), rng.gen_range(-w..=w))).collect();
        if let Ok(p) = LatticePolygon::hull(&pts) {
            return p;
        }
    }
}

fn check_pick(cfg: &VerifyConfig) -> Result<(Value, Value), VerifyError> {
    let mut rng = check_rng(cfg.seed, "pick");
    let polys: Vec<LatticePolygon> = (0..PICK_POLYGONS).map(|_| random_polygon(&mut rng)).collect();
    let failures: Vec<Value> = polys
        .par_iter()
        .filter_map(|p| {
            let (i, b) = count_points(p.vertices());
            let vs = p.vertices();
            let shoelace = (0..vs.len()).map(|k| vs[k].cross(vs[(k + 1) % vs.len()])).sum::<i64>().unsigned_abs();
            let ok = shoelace == 2 * i + b - 2 && area2(p) == shoelace && interior_points(p) == i && boundary_length(p) == b;
            (!ok).then(|| p.to_json())
        })
        .collect();
    let computed = json!({"polygons": polys.len(), "failures": failures.len()});
    Ok((computed, json!({"failing_polygons": failures})))
}

/// Names of the bounds violated by `(d, q, g)`, evaluated here directly.
#[allow(clippy::int_plus_one)]
pub fn failing_bounds(d: i64, qv: u64, g: i64, variant: SurfaceVariant) -> Vec<&'static str> {
    let (p, _) = prime_power(qv).expect("prime power");
    let qi = qv as i64;
    let checks: Vec<(&'static str, bool)> = match variant {
        SurfaceVariant::Triangle => vec![
            ("p > 2", p > 2),
            ("d >= 2", d >= 2),
            ("g >= 1", g >= 1),
            ("g >= (q-1)/2", 2 * g >= qi - 1),
            ("g <= (2dq-2d-q-1)/2", 2 * g <= 2 * d * qi - 2 * d - qi - 1),
            ("g <= (d-1)(d-2)/2", 2 * g <= (d - 1) * (d - 2)),
        ],
        SurfaceVariant::Parallelogram => vec![
            ("d >= 2", d >= 2),
            ("g >= 1", g >= 1),
            ("g >= q-1", g >= qi - 1),
            ("g <= 2dq-q-d-1", g <= 2 * d * qi - qi - d - 1),
            ("g <= (d-1)^2", g <= (d - 1) * (d - 1)),
        ],
    };
    checks.into_iter().filter(|(_, ok)| !ok).map(|(n, _)| n).collect()
}

fn severi_sample(d: i64, qv: u64, g: i64, variant: SurfaceVariant) -> Value {
    match severi_numerology(d, qv, g, variant) {
        Ok(r) => json!({
            "expected_dim": r.expected_dim, "union_nodes": r.union_nodes, "marked_nodes": r.marked_nodes,
            "unmarked_nodes": r.unmarked_nodes, "reducible": r.reducible,
        }),
        Err(CharpError::GenusOutOfRange { failing, .. }) => json!({"failing": failing}),
        Err(e) => json!({"error": e.to_string()}),
    }
}

fn check_severi() -> Result<(Value, Value), VerifyError> {
    let mut in_range = 0;
    let mut boundary = 0;
    let mut failures = Vec::new();
    let mut boundary_failures = Vec::new();
    for variant in [SurfaceVariant::Triangle, SurfaceVariant::Parallelogram] {
        let slope = match variant {
            SurfaceVariant::Triangle => 3,
            SurfaceVariant::Parallelogram => 4,
        };
        for qv in [2u64, 3, 4, 5] {
            for d in 1..=6i64 {
                let (lo, hi) = genus_range(d, qv, variant);
                let admissible = |g: i64| failing_bounds(d, qv, g, variant).is_empty();
                let mut probes: BTreeSet<i64> = [lo - 1, hi + 1].into_iter().collect();
                if lo > hi || !admissible(lo) {
                    probes.extend([lo, hi]);
                }
                for g in lo..=hi {
                    if !admissible(g) {
                        probes.insert(g);
                        continue;
                    }
                    in_range += 1;
                    let ok = match severi_numerology(d, qv, g, variant) {
                        Ok(r) => {
                            let minus_kc = boundary_length(&standard_surfaces(qv as i64, variant).unwrap().polygon.unwrap().dilate(d)) as i64;
                            r.reducible
                                && r.expected_dim == slope * d + g - 1
                                && r.expected_dim == zariski_bound(minus_kc, 0, g as u64, false)
                                && r.pa_reconstructed == g
                        }
                        Err(_) => false,
                    };
                    if !ok {
                        failures.push(json!({"variant": variant, "d": d, "q": qv, "g": g}));
                    }
                }
                for g in probes {
                    let want = failing_bounds(d, qv, g, variant);
                    if want.is_empty() {
                        continue;
                    }
                    boundary += 1;
                    let ok = match severi_numerology(d, qv, g, variant) {
                        Err(CharpError::GenusOutOfRange { failing, .. }) => failing == want,
                        _ => false,
                    };
                    if !ok {
                        boundary_failures.push(json!({"variant": variant, "d": d, "q": qv, "g": g, "expected_failing": want}));
                    }
                }
            }
        }
    }
    let samples = json!({
        "d3_q3_g1_triangle": severi_sample(3, 3, 1, SurfaceVariant::Triangle),
        "d2_q3_g1_triangle": severi_sample(2, 3, 1, SurfaceVariant::Triangle),
        "d2_q2_g1_parallelogram": severi_sample(2, 2, 1, SurfaceVariant::Parallelogram),
    });
    let computed = json!({
        "in_range_cases": in_range,
        "failures": failures.len(),
        "boundary_cases": boundary,
        "boundary_failures": boundary_failures.len(),
        "samples": samples,
    });
    Ok((computed, json!({"failures": failures, "boundary_failures": boundary_failures})))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diff_reports_paths() {
        let mut out = Vec::new();
        json_diff(&json!({"a": {"b": [1, 2]}, "c": 3}), &json!({"a": {"b": [1, 5]}, "c": 3, "extra": 0}), "x", &mut out);
        assert_eq!(out, vec!["x.a.b[1]: expected 2, computed 5".to_string()]);
    }

    #[test]
    fn point_counts_of_unit_square() {
        let sq = [LatticeVec::new(0, 0), LatticeVec::new(2, 0), LatticeVec::new(2, 2), LatticeVec::new(0, 2)];
        assert_eq!(count_points(&sq), (1, 8));
    }

    #[test]
    fn failing_bounds_examples() {
        assert_eq!(failing_bounds(2, 3, 1, SurfaceVariant::Triangle), vec!["g <= (d-1)(d-2)/2"]);
        assert!(failing_bounds(3, 3, 1, SurfaceVariant::Triangle).is_empty());
        assert_eq!(failing_bounds(4, 4, 2, SurfaceVariant::Triangle), vec!["p > 2"]);
    }

    #[test]
    fn unknown_check_is_rejected() {
        let mut cfg = VerifyConfig::new(0);
        cfg.only = vec!["nope".into()];
        assert!(matches!(verify_paper(&cfg), Err(VerifyError::UnknownCheck(_))));
    }

    #[test]
    fn thm41_filter_selects_one_field() {
        let mut cfg = VerifyConfig::new(0);
        cfg.only = vec!["thm41".into()];
        cfg.p = Some(3);
        cfg.r = Some(2);
        let rep = verify_paper(&cfg).unwrap();
        assert_eq!(rep.checks.len(), 1);
        assert_eq!(rep.checks[0].computed.as_object().unwrap().keys().collect::<Vec<_>>(), vec!["9"]);
        assert!(rep.all_pass(), "{:?}", rep.summary_lines());
    }

    #[test]
    fn thm42_filter_without_match_errors() {
        let mut cfg = VerifyConfig::new(0);
        cfg.only = vec!["thm42".into()];
        cfg.p = Some(7);
        assert!(matches!(verify_paper(&cfg), Err(VerifyError::EmptySelection(_))));
    }
}
