//! Property tests for the invariants of every module.

mod oracle;

use std::sync::Arc;

use proptest::prelude::*;
use tancone_core::cones::{active_bodies, active_indices, contingent_cone, frechet_normal_cone, linearized_cone, DistanceEstimator, FeasibleSet};
use tancone_core::convgeo::{hausdorff, ConeSample, ConvexBody, Label, Verdict};
use tancone_core::cq::check_gebcq;
use tancone_core::expr::{BinOp, Dims, Expression, Func, Node, Var};
use tancone_core::linalg::{dot, norm, sub};
use tancone_core::maxfun::{danskin_dirderiv, robust_value};
use tancone_core::model::{builtin_example, Config, DtcObjective, Objective, ProblemSpec, RobustConstraint, ScenarioFunction, ScenarioSet};
use tancone_core::optimality::{Condition, Context};
use tancone_core::subdiff::epsilon_subdiff;

fn unit(t: f64) -> Vec<f64> {
    vec![t.cos(), t.sin()]
}

fn angle() -> impl Strategy<Value = f64> {
    0.0..std::f64::consts::TAU
}

fn polygon(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0..1.0f64, dim), dim + 1..8)
}

fn dtc(spec: &ProblemSpec) -> &DtcObjective {
    match &spec.objective {
        Objective::Dtc(o) => o,
        Objective::SupPair(_) => panic!("expected a DTC objective"),
    }
}

fn linear_set(normals: &[f64]) -> FeasibleSet {
    let cs = normals
        .iter()
        .map(|&t| RobustConstraint {
            g: ScenarioFunction::parse(&format!("({}) * x1 + ({}) * x2", t.cos(), t.sin()), 2, 0).unwrap(),
            scenarios: ScenarioSet::singleton(0),
        })
        .collect();
    FeasibleSet::new(2, cs, &Config::default())
}

fn node() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![
        (0u32..40).prop_map(|k| Node::Const(k as f64 * 0.25)),
        (0usize..2).prop_map(|i| Node::Var(Var::X(i))),
        Just(Node::Var(Var::V(0))),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        let bin = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Min), Just(BinOp::Max)];
        let func = prop_oneof![Just(Func::Abs), Just(Func::Sin), Just(Func::Cos)];
        prop_oneof![
            inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
            (inner.clone(), 1u32..4).prop_map(|(a, k)| Node::Pow(Box::new(a), k)),
            (func, inner.clone()).prop_map(|(f, a)| Node::Call(f, Box::new(a))),
            (bin, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Node::Bin(op, Box::new(a), Box::new(b))),
            prop::collection::vec(inner, 1..3).prop_map(Node::Norm2),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn expression_display_round_trips(root in node()) {
        let dims = Dims::new(2, 1);
        let e = Expression::from_node(root, dims);
        let back = Expression::parse(&e.to_string(), dims).unwrap();
        prop_assert_eq!(back.node(), e.node());
    }

    #[test]
    fn evaluation_is_pure(root in node(), x in prop::array::uniform2(-1.5..1.5f64), v in -1.0..1.0f64) {
        let e = Expression::from_node(root, Dims::new(2, 1));
        let a = e.eval(&x, &[v]);
        let b = e.eval(&x, &[v]);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn support_is_sublinear(pts in polygon(2), t1 in angle(), t2 in angle(), a in 0.0..5.0f64) {
        let body = ConvexBody::from_points(2, pts).unwrap();
        let (d1, d2) = (unit(t1), unit(t2));
        let s = [d1[0] + d2[0], d1[1] + d2[1]];
        prop_assert!(body.support(&s) <= body.support(&d1) + body.support(&d2) + 1e-12);
        let scaled = [a * d1[0], a * d1[1]];
        prop_assert!((body.support(&scaled) - a * body.support(&d1)).abs() <= 1e-12 * (1.0 + a));
    }

    #[test]
    fn minkowski_and_hull_supports(p in polygon(2), q in polygon(2), t in angle()) {
        let a = ConvexBody::from_points(2, p).unwrap();
        let b = ConvexBody::from_points(2, q).unwrap();
        let d = unit(t);
        let sum = ConvexBody::minkowski(&a, &b, 1.0).unwrap();
        prop_assert!((sum.support(&d) - a.support(&d) - b.support(&d)).abs() <= 1e-9);
        let diff = ConvexBody::minkowski(&a, &b, -1.0).unwrap();
        let neg = [-d[0], -d[1]];
        prop_assert!((diff.support(&d) - a.support(&d) - b.support(&neg)).abs() <= 1e-9);
        let hull = ConvexBody::hull_union(&[a.clone(), b.clone()]).unwrap();
        prop_assert!((hull.support(&d) - a.support(&d).max(b.support(&d))).abs() <= 1e-9);
    }

    #[test]
    fn ball_enlargement_adds_norm(pts in polygon(3), d in prop::collection::vec(-2.0..2.0f64, 3), eps in 0.0..3.0f64) {
        let body = ConvexBody::from_points(3, pts).unwrap();
        let e = ConvexBody::ball_enlarge(&body, eps);
        prop_assert!((e.support(&d) - body.support(&d) - eps * norm(&d)).abs() <= 1e-12 * (1.0 + norm(&d)));
    }

    #[test]
    fn epsilon_enlargement_is_additive(pts in polygon(2), e1 in 0.0..1.0f64, e2 in 0.0..1.0f64, t in angle()) {
        let body = ConvexBody::from_points(2, pts).unwrap();
        let twice = epsilon_subdiff(&epsilon_subdiff(&body, e1), e2);
        let once = epsilon_subdiff(&body, e1 + e2);
        let d = unit(t);
        prop_assert!((twice.support(&d) - once.support(&d)).abs() <= 1e-12);
    }

    #[test]
    fn capped_body_is_a_scaled_union(pts in polygon(2), cap in 0.0..4.0f64, t in angle()) {
        let body = ConvexBody::from_points(2, pts).unwrap();
        let c = ConvexBody::capped(&body, cap);
        let d = unit(t);
        prop_assert!((c.support(&d) - (cap * body.support(&d)).max(0.0)).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn vertex_and_support_forms_agree(pts in polygon(2)) {
        let cfg = Config::default();
        let exact = ConvexBody::from_points(2, pts.clone()).unwrap();
        let oracle = move |d: &[f64]| pts.iter().map(|p| dot(p, d)).fold(f64::NEG_INFINITY, f64::max);
        let recovered = ConvexBody::from_support(2, Arc::new(oracle), &cfg).unwrap();
        prop_assert!(hausdorff(&exact, &recovered, &cfg).unwrap() <= cfg.geom_tol);
    }

    #[test]
    fn bipolar_contains_the_cone(pts in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 2), 1..4)) {
        let cfg = Config::default();
        let bodies: Vec<ConvexBody> = pts.iter().map(|p| ConvexBody::point(p)).collect();
        let k = ConeSample::generated(2, &bodies, &cfg);
        let kpp = k.polar().polar();
        for (d, label) in k.samples() {
            if *label == Label::In {
                prop_assert_ne!(kpp.contains(d), Label::Out);
            }
        }
    }

    #[test]
    fn cone_labels_are_homogeneous(normals in prop::collection::vec(angle(), 1..4), t in angle(), a in 0.01..100.0f64) {
        let cfg = Config::default();
        let set = linear_set(&normals);
        let j = active_indices(&set, &[0.0, 0.0], &cfg).unwrap();
        let bodies = active_bodies(&set, &[0.0, 0.0], &j, &cfg).unwrap();
        let k = linearized_cone(2, &bodies, &cfg);
        let d = unit(t);
        prop_assert_eq!(k.contains(&d), k.contains(&[a * d[0], a * d[1]]));
    }

    #[test]
    fn danskin_matches_a_difference_quotient(name in prop::sample::select(vec!["ex-3.1", "ex-5.1", "ex-5.2"]), t in angle()) {
        let cfg = Config::default();
        let (spec, _) = builtin_example(name).unwrap();
        let obj = dtc(&spec);
        let d = unit(t);
        let x = [0.0, 0.0];
        let want = danskin_dirderiv(obj, &x, &d, &cfg).unwrap().value;
        let (fd, err) = oracle::brute_dirderiv(&|p: &[f64]| robust_value(obj, p).unwrap(), &x, &d, &oracle::DEFAULT_STEPS);
        prop_assert!((want - fd).abs() <= 1e-3 + err, "{name}: danskin {want} vs quotient {fd}");
    }

    #[test]
    fn robust_value_grows_with_the_scenario_set(
        vs in prop::collection::vec(-1.0..1.0f64, 1..12),
        extra in prop::collection::vec(-1.0..1.0f64, 1..6),
        x in prop::array::uniform2(-1.0..1.0f64),
    ) {
        let g = ScenarioFunction::parse("v1 * x1 + abs(x2 - v1)", 2, 1).unwrap();
        let h = ScenarioFunction::parse("(x1 * v1)^2", 2, 1).unwrap();
        let small = ScenarioSet::new("small", 1, vs.iter().map(|&v| vec![v]).collect()).unwrap();
        let more = ScenarioSet::new("extra", 1, extra.iter().map(|&v| vec![v]).collect()).unwrap();
        let big = small.union(&more).unwrap();
        let a = robust_value(&DtcObjective { g: g.clone(), h: h.clone(), scenarios: small }, &x).unwrap();
        let b = robust_value(&DtcObjective { g, h, scenarios: big }, &x).unwrap();
        prop_assert!(b >= a);
    }

    #[test]
    fn dirderiv_is_positively_homogeneous(t in angle(), a in 0.1..10.0f64, x in prop::array::uniform2(-1.0..1.0f64)) {
        let f = ScenarioFunction::parse("max(x1 + x2, x1^2 - abs(x2)) + norm2(x)", 2, 0).unwrap();
        let d = unit(t);
        let one = f.dirderiv_x(&x, &[], &d).unwrap().value;
        let many = f.dirderiv_x(&x, &[], &[a * d[0], a * d[1]]).unwrap().value;
        prop_assert!((many - a * one).abs() <= 1e-3 * a * (1.0 + one.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn contingent_and_normal_cones_are_polar(normals in prop::collection::vec(angle(), 1..4)) {
        let cfg = Config::default();
        let set = linear_set(&normals);
        let t = contingent_cone(&set, &[0.0, 0.0], &cfg).unwrap().cone;
        let n = frechet_normal_cone(&t);
        for d in t.in_directions() {
            for w in n.in_directions() {
                prop_assert!(dot(&d, &w) <= 1e-9, "{d:?} . {w:?}");
            }
        }
    }

    #[test]
    fn linearized_and_contingent_cones_agree_on_half_planes(normals in prop::collection::vec(angle(), 1..3)) {
        let cfg = Config::default();
        let set = linear_set(&normals);
        let j = active_indices(&set, &[0.0, 0.0], &cfg).unwrap();
        let bodies = active_bodies(&set, &[0.0, 0.0], &j, &cfg).unwrap();
        let g = linearized_cone(2, &bodies, &cfg);
        let t = contingent_cone(&set, &[0.0, 0.0], &cfg).unwrap().cone;
        // off the cone boundary the two sampled cones must coincide
        for ((d, lg), (_, lt)) in g.samples().iter().zip(t.samples()) {
            let slack = normals.iter().map(|&a| dot(d, &unit(a)).abs()).fold(f64::INFINITY, f64::min);
            if slack > 0.05 {
                prop_assert_eq!(lg, lt, "direction {:?}", d);
            }
        }
    }

    #[test]
    fn distance_is_one_lipschitz(p in prop::array::uniform2(-0.1..0.1f64), q in prop::array::uniform2(-0.1..0.1f64)) {
        let cfg = Config::default();
        let (spec, _) = builtin_example("ex-4.2").unwrap();
        let set = FeasibleSet::of(&spec);
        let est = DistanceEstimator::new(&set, &[0.0, 0.0], 0.2, &cfg).unwrap();
        let (dp, _) = est.distance(&p).unwrap();
        let (dq, _) = est.distance(&q).unwrap();
        let slack = 1e-3 * (dp + dq) + 1e-12;
        prop_assert!((dp - dq).abs() <= norm(&sub(&p, &q)) + slack, "d({p:?}) = {dp}, d({q:?}) = {dq}");
    }

    #[test]
    fn sampled_sigma_is_monotone_in_the_sample_count(normals in prop::collection::vec(angle(), 1..4)) {
        let set = linear_set(&normals);
        let sigma = |samples| {
            let cfg = Config { samples, ..Config::default() };
            let r = check_gebcq(&set, &[0.0, 0.0], cfg.delta, &cfg).unwrap();
            r.params.iter().find(|(k, _)| *k == "sampled_sigma").map_or(0.0, |p| p.1)
        };
        let coarse = sigma(256);
        let fine = sigma(1024);
        prop_assert!(fine >= coarse, "sigma {coarse} at 256 samples, {fine} at 1024");
    }

    #[test]
    fn stationarity_conditions_are_ordered(
        a in prop::array::uniform2(-1.0..1.0f64),
        b in prop::array::uniform2(0.0..1.0f64),
        normals in prop::collection::vec(angle(), 0..3),
    ) {
        let cfg = Config::default();
        let objective = format!("({}) * x1 + ({}) * x2 + ({}) * abs(x1) + ({}) * abs(x2)", a[0], a[1], b[0], b[1]);
        let spec = ProblemSpec {
            name: "random".into(),
            n: 2,
            objective: Objective::Dtc(DtcObjective {
                g: ScenarioFunction::parse(&objective, 2, 0).unwrap(),
                h: ScenarioFunction::zero(2, 0),
                scenarios: ScenarioSet::singleton(0),
            }),
            constraints: linear_set(&normals).constraints().to_vec(),
            config: cfg.clone(),
        };
        let ctx = Context::new(&spec, &[0.0, 0.0], &cfg).unwrap();

        let strong = ctx.check_f_inf(true).unwrap();
        let weak = ctx.check_f_inf(false).unwrap();
        prop_assert!(strong.margin <= weak.margin + 1e-12);

        let gebcq = ctx.check(Condition::Rp1Gebcq).unwrap();
        let gacq = ctx.check(Condition::Rp1Gacq).unwrap();
        if gebcq.verdict == Verdict::Holds {
            prop_assert_ne!(gacq.verdict, Verdict::Fails);
        }

        for r in [&gebcq, &gacq] {
            if r.verdict == Verdict::Holds {
                for (target, cert) in &r.certificates {
                    let back = cert.evaluate(2);
                    prop_assert!(norm(&sub(&back, target)) <= 10.0 * cfg.geom_tol, "{}: certificate misses {target:?}", r.condition);
                }
            }
        }
    }
}
