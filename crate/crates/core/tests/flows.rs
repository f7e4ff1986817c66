use orbitforge::flows::{
    curve_bump_hamiltonian, curve_following_flow, curve_following_hamiltonian, integrate_flow, shear_flow,
    IntegratorConfig,
};
use orbitforge::forge::{prepare, CurveFrame, ForgeOptions, ResonantGrid};
use orbitforge::phase::Region;
use orbitforge::{Error, Space, SymplecticMap, TrigPoly};

fn frame() -> (TrigPoly, TrigPoly) {
    (TrigPoly::from_harmonics(0.0, &[(1, 0.03, -0.02)]), TrigPoly::from_harmonics(0.2, &[(1, 0.01, 0.02)]))
}

#[test]
fn curve_following_flow_slides_the_curve() {
    let (xi, eta) = frame();
    let flow = curve_following_flow(&xi, &eta, 0.25, IntegratorConfig::default()).unwrap();
    for i in 0..16 {
        let z = i as f64 / 16.0;
        let (x, y) = flow.apply_lift(z + xi.eval(z), eta.eval(z)).unwrap();
        let target = z + 0.25;
        assert!((x - target - xi.eval(target)).abs() < 1e-10);
        assert!((y - eta.eval(target)).abs() < 1e-10);
    }
}

#[test]
fn straight_curve_flow_is_closed_form() {
    let flow = curve_following_flow(&TrigPoly::zero(), &TrigPoly::constant(0.1), 0.3, IntegratorConfig::default()).unwrap();
    assert!(flow.is_closed_form());
    let (x, y) = flow.apply_lift(0.2, 0.1).unwrap();
    assert!((x - 0.5).abs() < 1e-15 && y == 0.1);
}

#[test]
fn curve_bump_is_a_lifted_shear_near_the_curve_and_identity_far_away() {
    let (xi, eta) = frame();
    let h = TrigPoly::harmonic(5, 0.0, 1e-3);
    let t = 0.5;
    let bump = integrate_flow(curve_bump_hamiltonian(&h, &xi, &eta, 0.05, 0.02).unwrap(), t, IntegratorConfig::default())
        .unwrap();
    // conjugating the closed-form shear by the frame gives the same map where the cutoff is 1
    let lifted = SymplecticMap::compose(vec![
        SymplecticMap::CotangentLift { xi: xi.clone(), inverse: true },
        shear_flow(&h, t),
        SymplecticMap::CotangentLift { xi: xi.clone(), inverse: false },
    ]);
    for i in 0..32 {
        let z = i as f64 / 32.0;
        let (x, y) = (z + xi.eval(z), eta.eval(z));
        let a = bump.apply_lift(x, y).unwrap();
        let b = lifted.apply_lift(x, y - eta.eval(z)).unwrap();
        assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - eta.eval(z) - b.1).abs() < 1e-12);
        let far = bump.apply_lift(x, y + 0.3).unwrap();
        assert!((far.0 - x).abs() <= 1e-15 && (far.1 - y - 0.3).abs() <= 1e-15, "{far:?} vs {x} {}", y + 0.3);
    }
}

#[test]
fn curve_bump_rejects_bad_cutoffs() {
    let (xi, eta) = frame();
    let h = TrigPoly::harmonic(1, 0.0, 1.0);
    assert!(matches!(curve_bump_hamiltonian(&h, &xi, &eta, 0.05, 0.03), Err(Error::DomainError(_))));
    assert!(matches!(curve_bump_hamiltonian(&h, &xi, &eta, 0.6, 0.1), Err(Error::DomainError(_))));
    let folded = TrigPoly::harmonic(1, 0.0, 0.5);
    assert!(matches!(curve_bump_hamiltonian(&h, &folded, &eta, 0.05, 0.02), Err(Error::NotDiffeo { .. })));
}

#[test]
fn curved_cutoff_forge_needs_the_torus() {
    let grid = ResonantGrid::build(1, 3, 1).unwrap();
    let map = SymplecticMap::compose(vec![
        SymplecticMap::IntegrableTwist { slope: 1.0 },
        SymplecticMap::Translation { theta: 1.0 / 3.0 },
    ]);
    let frame = CurveFrame { xi: TrigPoly::harmonic(1, 0.01, 0.0), eta: TrigPoly::zero() };
    let options = ForgeOptions { cutoff: Some((0.05, 0.02)), ..ForgeOptions::default() };
    assert!(matches!(prepare(&map, &frame, &grid, &options), Err(Error::Unsupported(_))));
}

#[test]
fn localized_forge_moves_nothing_outside_its_band() {
    let grid = ResonantGrid::build(1, 3, 2).unwrap();
    let map = SymplecticMap::compose(vec![
        SymplecticMap::IntegrableTwist { slope: 1.0 },
        SymplecticMap::Translation { theta: 1.0 / 3.0 },
    ]);
    let options = ForgeOptions { cutoff: Some((0.05, 0.02)), space: Space::Cylinder, ..ForgeOptions::default() };
    let plan = prepare(&map, &CurveFrame::identity(), &grid, &options).unwrap();
    let forged = plan.apply(1e-3).unwrap();
    for o in &forged.orbits {
        assert!((o.measured_trace - o.predicted_trace).abs() < 1e-9);
    }
    let far = orbitforge::phase::sup_distance(&map, &forged.map, &Region::band(0.06, 0.5, Space::Cylinder), 32).unwrap();
    assert_eq!(far, 0.0);
}

#[test]
fn flow_inverse_by_negative_time() {
    let (xi, eta) = frame();
    let field = curve_following_hamiltonian(&xi, &eta).unwrap();
    let config = IntegratorConfig::default();
    let forward = integrate_flow(field.clone(), 0.4, config).unwrap();
    let back = integrate_flow(field, -0.4, config).unwrap();
    let both = SymplecticMap::then(forward, back);
    for (x, y) in [(0.1, 0.2), (0.7, -0.3), (0.45, 0.9)] {
        let (u, v) = both.apply_lift(x, y).unwrap();
        assert!((u - x).abs() < 1e-10 && (v - y).abs() < 1e-10);
    }
}
