use orbitforge::census::{classify, OrbitType};
use orbitforge::decimal::{format17, parse};
use orbitforge::forge::{forge, gcd, ResonantGrid};
use orbitforge::interval::{build_f0, interval_census, IntervalCensusConfig};
use orbitforge::kam::{golden_mean, solve_cohomological, DIVISOR_FLOOR};
use orbitforge::{SymplecticMap, TrigPoly, YFunction};
use proptest::prelude::*;

fn poly(max_degree: usize, scale: f64) -> impl Strategy<Value = TrigPoly> {
    (0.0..scale, prop::collection::vec((-scale..scale, -scale..scale), 1..=max_degree)).prop_map(|(mean, coeffs)| {
        let harmonics: Vec<_> = coeffs.iter().enumerate().map(|(k, &(a, b))| (k + 1, a, b)).collect();
        TrigPoly::from_harmonics(mean, &harmonics)
    })
}

fn closed_form_map() -> impl Strategy<Value = SymplecticMap> {
    let node = prop_oneof![
        (-1.0..1.0).prop_map(|theta| SymplecticMap::Translation { theta }),
        (-2.0..2.0).prop_map(|slope| SymplecticMap::IntegrableTwist { slope }),
        poly(4, 0.2).prop_map(|v| SymplecticMap::VerticalShear { v }),
        poly(4, 0.2).prop_map(|u| SymplecticMap::HorizontalShear { u: YFunction::trigonometric(u) }),
        (poly(3, 0.02), any::<bool>()).prop_map(|(xi, inverse)| SymplecticMap::CotangentLift {
            xi: xi.plus_constant(-xi.mean()),
            inverse
        }),
    ];
    prop::collection::vec(node, 1..5).prop_map(SymplecticMap::compose)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_maps_preserve_area(map in closed_form_map(), x in 0.0..1.0f64, y in -0.5..0.5f64) {
        let (_, j) = map.apply_lift_jac(x, y).unwrap();
        prop_assert!((j.det() - 1.0).abs() <= 1e-12, "det = {}", j.det());
    }

    #[test]
    fn maps_commute_with_integer_x_shifts(map in closed_form_map(), x in 0.0..1.0f64, y in -0.5..0.5f64) {
        let a = map.apply_lift(x, y).unwrap();
        let b = map.apply_lift(x + 1.0, y).unwrap();
        prop_assert!((b.0 - a.0 - 1.0).abs() <= 1e-12 && (b.1 - a.1).abs() <= 1e-12);
    }

    #[test]
    fn map_json_round_trips(map in closed_form_map()) {
        let text = serde_json::to_string(&map).unwrap();
        let back: SymplecticMap = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, map);
    }

    #[test]
    fn decimal_strings_round_trip(bits in any::<u64>()) {
        let value = f64::from_bits(bits);
        prop_assume!(value.is_finite());
        let back = parse(&format17(value)).unwrap();
        prop_assert!(back == value || (value == 0.0 && back == 0.0));
    }

    #[test]
    fn derivative_matches_difference_quotient(p in poly(8, 1.0), x in 0.0..1.0f64) {
        let h = 1e-6;
        let quotient = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
        let (_, d) = p.eval_d1(x);
        prop_assert!((quotient - d).abs() <= 1e-6 * (1.0 + d.abs()));
        prop_assert!((p.eval(x + 1.0) - p.eval(x)).abs() <= 1e-12);
    }

    #[test]
    fn cohomological_residual_is_small(alpha in poly(16, 1.0)) {
        let theta = golden_mean();
        let solution = solve_cohomological(&alpha, theta, DIVISOR_FLOOR).unwrap();
        prop_assert!(solution.residual(&alpha, theta, 1024) <= 1e-10);
        prop_assert!((solution.mean - alpha.mean()).abs() <= 1e-15);
    }

    #[test]
    fn forged_counts_and_traces(
        (p, n) in (2i64..=6).prop_flat_map(|n| (1..n, Just(n))).prop_filter("lowest terms", |(p, n)| gcd(*p, *n) == 1),
        gamma in 1usize..=3,
        t in 1e-4..1e-3f64,
    ) {
        let base = SymplecticMap::compose(vec![
            SymplecticMap::IntegrableTwist { slope: 1.0 },
            SymplecticMap::Translation { theta: p as f64 / n as f64 },
        ]);
        let grid = ResonantGrid::build(p, n, gamma).unwrap();
        let forged = forge(&base, &grid, t).unwrap();
        let target = n as usize * gamma;
        prop_assert_eq!(forged.count(OrbitType::Hyperbolic), target);
        prop_assert_eq!(forged.count(OrbitType::Elliptic), target);
        for o in &forged.orbits {
            prop_assert!((o.measured_trace - o.predicted_trace).abs() <= 1e-10);
            prop_assert!(o.residual <= 1e-10);
        }
    }

    #[test]
    fn classification_is_symmetric_in_trace_sign(trace in -4.0..4.0f64) {
        prop_assert_eq!(classify(trace, 1e-9, 1e-9), classify(-trace, 1e-9, 1e-9));
    }

    #[test]
    fn plateau_crossings_grow_with_gamma(shift in 0u32..3, budget in 1e-5..1e-3f64) {
        let gamma = 2u32 << shift;
        let f = build_f0(0.2, 4).unwrap().perturb_plateau(1, gamma, budget).unwrap();
        let p = f.plateau(1).unwrap();
        let census = interval_census(&f, 2, &IntervalCensusConfig::default()).unwrap();
        prop_assert!(census.count_in(p.lo, p.hi) >= gamma as usize);
    }
}
