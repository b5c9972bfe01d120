//! Property tests across modules. Random curves come from enumeration
//! witnesses moved around by random translations, random polygons from hulls
//! of random lattice points, and random rational maps from small polynomial
//! series.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tropzar::arith::{q, q_frac, RatVec, Q};
use tropzar::charp_curves::{singular_count_sqprime, Character, ParamCurveCharP};
use tropzar::deformation::{
    constrained_dim, constraint_matrix, deformation_space, deformation_space_oriented, generic_point, MarkedConstraints,
    Orientation,
};
use tropzar::enumeration::{enumerate_types, DegreeSpec, EnumerationBudget, EnumerationOptions};
use tropzar::field::Gf;
use tropzar::lattice_toric::{
    area2, boundary_length, dual_fan, edge_degrees, interior_points, zariski_bound, LatticePolygon, LatticeVec,
};
use tropzar::trop_rational::{end_slope, tropicalize, BaseField, MarkedRationalMap, Series, ValuedElement};
use tropzar::tropical_curve::{combinatorial_type, degree, genus, validate, ParamTropCurve};

fn lattice_points(max: i64) -> impl Strategy<Value = Vec<LatticeVec>> {
    prop::collection::vec((-max..=max, -max..=max).prop_map(|(x, y)| LatticeVec::new(x, y)), 3..12)
}

/// Enumerated witnesses for a few small degrees; each one a valid curve.
fn witness_pool() -> &'static Vec<ParamTropCurve> {
    static POOL: OnceLock<Vec<ParamTropCurve>> = OnceLock::new();
    POOL.get_or_init(|| {
        let conic = LatticePolygon::new(vec![LatticeVec::new(0, 0), LatticeVec::new(2, 0), LatticeVec::new(0, 2)]).unwrap();
        let mut out = Vec::new();
        for d in [DegreeSpec::line(), DegreeSpec::of_polygon(&conic)] {
            for (g, r) in [(0, 7), (1, 5)] {
                let res = enumerate_types(&d, g, r, &EnumerationOptions::default()).unwrap();
                out.extend(res.types.into_iter().map(|t| t.witness));
            }
        }
        out
    })
}

fn ratvec() -> impl Strategy<Value = RatVec> {
    (-50i64..50, 1i64..7, -50i64..50, 1i64..7).prop_map(|(a, b, c, d)| RatVec::new(q_frac(a, b), q_frac(c, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pick_holds(pts in lattice_points(15)) {
        if let Ok(p) = LatticePolygon::hull(&pts) {
            prop_assert_eq!(area2(&p), 2 * interior_points(&p) + boundary_length(&p) - 2);
        }
    }

    #[test]
    fn dual_fan_closes_up(pts in lattice_points(10)) {
        if let Ok(p) = LatticePolygon::hull(&pts) {
            let fan = dual_fan(&p);
            prop_assert!(fan.rays().iter().all(|r| r.is_primitive()));
            // consecutive rays turn left
            let rays = fan.rays();
            for i in 0..rays.len() {
                prop_assert!(rays[i].cross(rays[(i + 1) % rays.len()]) > 0);
            }
            let total = edge_degrees(&p).iter().fold(LatticeVec::ZERO, |acc, (n, d)| acc + n.scale(*d as i64));
            prop_assert!(total.is_zero());
        }
    }

    #[test]
    fn zariski_bound_is_monotone(kc in -20i64..20, b in 0u64..20, g in 0u64..20, toric in any::<bool>()) {
        let base = zariski_bound(kc, b, g, toric);
        prop_assert!(zariski_bound(kc, b + 1, g, toric) >= base);
        prop_assert!(zariski_bound(kc, b, g + 1, toric) >= base);
    }

    #[test]
    fn curve_invariants(idx in 0usize..10_000, t in ratvec()) {
        let pool = witness_pool();
        let c = &pool[idx % pool.len()];
        let deg = degree(c).unwrap();
        let total = deg.iter().fold(LatticeVec::ZERO, |acc, (n, d)| acc + n.scale(*d as i64));
        prop_assert!(total.is_zero());
        let moved = c.translated(&t);
        prop_assert!(validate(&moved).is_valid());
        prop_assert_eq!(degree(&moved).unwrap(), deg);
        prop_assert_eq!(combinatorial_type(&moved).unwrap(), combinatorial_type(c).unwrap());
        prop_assert_eq!(deformation_space(&moved).unwrap().dim_e1, deformation_space(c).unwrap().dim_e1);
    }

    #[test]
    fn subdivision_keeps_genus(idx in 0usize..10_000, num in 1i64..100) {
        let pool = witness_pool();
        let c = &pool[idx % pool.len()];
        let Some(e) = c.graph.bounded_edges().next() else { return Ok(()) };
        let len = c.graph.edge(e).length.finite().unwrap().clone();
        let s = len * q_frac(num, 100);
        let (sub, _) = c.subdivide_bounded(e, &s).unwrap();
        prop_assert_eq!(genus(&sub.graph), genus(&c.graph));
        prop_assert_eq!(sub.graph.n_finite(), c.graph.n_finite() + 1);
        prop_assert_eq!(sub.graph.edges().len(), c.graph.edges().len() + 1);
        prop_assert!(validate(&sub).is_valid());
        prop_assert_eq!(degree(&sub).unwrap(), degree(c).unwrap());
    }

    #[test]
    fn rank_nullity_and_orientation(idx in 0usize..10_000, flips in prop::collection::vec(0usize..64, 0..4)) {
        let pool = witness_pool();
        let c = &pool[idx % pool.len()];
        let o = Orientation::standard(c);
        let m = constraint_matrix(c, &o).unwrap();
        let ds = deformation_space(c).unwrap();
        prop_assert_eq!(ds.dim_e1 + m.rank(), 2 * c.graph.n_finite());
        let mut flipped = o;
        for f in flips {
            flipped = flipped.flipped(f % c.graph.edges().len());
        }
        prop_assert_eq!(deformation_space_oriented(c, &flipped).unwrap().dim_e1, ds.dim_e1);
    }

    #[test]
    fn generic_point_constraints_cut_by_rank(idx in 0usize..10_000, seed in any::<u64>(), k in 0usize..4) {
        let pool = witness_pool();
        let c = &pool[idx % pool.len()];
        let nf = c.graph.n_finite();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut constraints = MarkedConstraints::default();
        for v in 0..k.min(nf) {
            constraints.point_constraints.insert(v, generic_point(&mut rng));
        }
        let before = constrained_dim(c, &MarkedConstraints::default()).unwrap();
        let after = constrained_dim(c, &constraints).unwrap();
        // exact oracle: stack the point rows under the constraint matrix
        let mut m = constraint_matrix(c, &Orientation::standard(c)).unwrap();
        let base_rank = m.rank();
        for &v in constraints.point_constraints.keys() {
            for coord in 0..2 {
                let mut row = vec![Q::zero(); 2 * nf];
                row[2 * v + coord] = q(1);
                m.push_row(row);
            }
        }
        prop_assert_eq!(before - after, m.rank() - base_rank);
        prop_assert!(before - after <= 2 * constraints.point_constraints.len());
    }
}

fn series(terms: &[(i64, i64)]) -> Series {
    Series::new(1, terms.iter().map(|&(e, c)| (q(e), q(c))).collect(), BaseField::Rational).unwrap()
}

/// A random marked rational map: distinct polynomial points in `t`, a
/// divisor supported on some of them, and infinity marked to balance it.
fn ratmap() -> impl Strategy<Value = MarkedRationalMap> {
    let point = prop::collection::vec((0i64..3, -3i64..=3), 1..3);
    (prop::collection::vec(point, 2..6), prop::collection::vec((-2i64..=2, -2i64..=2), 6), (-2i64..=2, 1i64..4, -2i64..=2, 1i64..4))
        .prop_filter_map("points must be distinct and nonzero divisor", |(pts, vecs, (a, ca, b, cb))| {
            let mut finite: Vec<Series> = Vec::new();
            for p in pts {
                let s = series(&p);
                if finite.iter().all(|f| !f.sub(&s, BaseField::Rational).unwrap().is_zero()) {
                    finite.push(s);
                }
            }
            if finite.len() < 2 {
                return None;
            }
            let divisor: Vec<(ValuedElement, LatticeVec)> = finite
                .iter()
                .zip(&vecs)
                .map(|(s, &(x, y))| (ValuedElement::Finite(s.clone()), LatticeVec::new(x, y)))
                .filter(|(_, n)| !n.is_zero())
                .collect();
            if divisor.is_empty() {
                return None;
            }
            let mut marked: Vec<ValuedElement> = finite.into_iter().map(ValuedElement::Finite).collect();
            marked.push(ValuedElement::Infinity);
            MarkedRationalMap::new(BaseField::Rational, 1, marked, divisor, [series(&[(a, ca)]), series(&[(b, cb)])]).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn tropicalization_is_a_valid_curve(map in ratmap()) {
        let c = tropicalize(&map).unwrap();
        let report = validate(&c);
        prop_assert!(report.is_valid(), "{:?}", report.to_json());
        prop_assert_eq!(genus(&c.graph), 0);
        let slopes: Vec<LatticeVec> = (0..map.marked_points.len()).map(|i| end_slope(i, &map).unwrap()).collect();
        prop_assert!(slopes.iter().fold(LatticeVec::ZERO, |a, s| a + *s).is_zero());
        // the degree groups the nonzero end vectors by primitive direction
        let mut grouped: BTreeMap<LatticeVec, u64> = BTreeMap::new();
        for s in slopes.iter().filter(|s| !s.is_zero()) {
            let (dir, m) = s.primitive();
            *grouped.entry(dir).or_default() += m;
        }
        let mut deg = degree(&c).unwrap();
        deg.sort();
        prop_assert_eq!(deg, grouped.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn tropicalization_ignores_ramification(map in ratmap(), k in 2u32..4) {
        let c = tropicalize(&map).unwrap();
        let c2 = tropicalize(&map.with_ramification(k).unwrap()).unwrap();
        prop_assert_eq!(c, c2);
    }
}

#[test]
fn enumerated_types_are_sound() {
    let conic = LatticePolygon::new(vec![LatticeVec::new(0, 0), LatticeVec::new(2, 0), LatticeVec::new(0, 2)]).unwrap();
    for (d, g, r) in [(DegreeSpec::line(), 0, 6), (DegreeSpec::line(), 1, 5), (DegreeSpec::of_polygon(&conic), 0, 7), (DegreeSpec::of_polygon(&conic), 1, 6)] {
        let budget = EnumerationBudget::new(g, r);
        let res = enumerate_types(&d, g, r, &EnumerationOptions::default()).unwrap();
        for t in &res.types {
            let w = &t.witness;
            assert!(validate(w).is_valid());
            assert_eq!(genus(&w.graph), g as i64);
            let mut want = d.entries().to_vec();
            want.sort();
            let mut got = degree(w).unwrap();
            got.sort();
            assert_eq!(got, want);
            let nb = w.graph.bounded_edges().count();
            assert_eq!(nb as i64, w.graph.n_finite() as i64 + g as i64 - 1);
            assert!(w.graph.edges().len() <= budget.edge_bound);
            let valency_sum: usize = (0..w.graph.n_vertices()).map(|v| w.graph.valency(v)).sum();
            assert_eq!(valency_sum, 2 * w.graph.edges().len());
        }
    }
}

#[test]
fn sqprime_singular_count_independent_of_xi() {
    for (p, m) in [(3u64, 1u32), (5, 1), (2, 1), (2, 2), (3, 2)] {
        let f = Gf::new(p, 2 * m).unwrap();
        let qv = p.pow(m);
        let chi = Character::new(f.one(), f.one()).unwrap();
        let counts: std::collections::BTreeSet<usize> = f
            .elements()
            .filter(|&x| x != f.zero() && x != f.one())
            .map(|xi| singular_count_sqprime(&ParamCurveCharP::sq_prime(&f, qv, xi, chi).unwrap()).unwrap())
            .collect();
        assert_eq!(counts.into_iter().collect::<Vec<_>>(), vec![if p == 2 { 1 } else { 2 }], "p={p} m={m}");
    }
}
