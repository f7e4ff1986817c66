//! Hamiltonian flows: closed-form shears, the transversality flows, the
//! curve-transport and bump Hamiltonians, and a symplectic integrator.

pub mod field;
pub mod integrator;

pub use field::{cutoff, smoothstep7, HamiltonianField, Hess};
pub use integrator::IntegratorConfig;

use crate::error::{Error, Result};
use crate::phase::{SymplecticMap, TrigPoly, YFunction};

/// Time-`t` flow of `H = -h(x)`: `(x, y + t h'(x))`.
pub fn shear_flow(h: &TrigPoly, t: f64) -> SymplecticMap {
    SymplecticMap::VerticalShear { v: h.derivative().scaled(t) }
}

/// Time-`t` flows of the four transversality Hamiltonians
/// `cos 2πx`, `sin 2πx`, `cos 2πy`, `sin 2πy` (indices 1 to 4).
pub fn transversality_flow(index: u8, t: f64) -> Result<SymplecticMap> {
    let cosine = TrigPoly::harmonic(1, 1.0, 0.0);
    let sine = TrigPoly::harmonic(1, 0.0, 1.0);
    let vertical = |h: TrigPoly| SymplecticMap::VerticalShear { v: h.derivative().scaled(-t) };
    let horizontal = |k: TrigPoly| SymplecticMap::HorizontalShear {
        u: YFunction::trigonometric(k.derivative().scaled(t)),
    };
    match index {
        // H = h(x) flows as (x, y - t h'(x)); H = k(y) as (x + t k'(y), y)
        1 => Ok(vertical(cosine)),
        2 => Ok(vertical(sine)),
        3 => Ok(horizontal(cosine)),
        4 => Ok(horizontal(sine)),
        _ => Err(Error::DomainError(format!("transversality index {index} not in 1..=4"))),
    }
}

/// Hamiltonian whose flow slides the curve `z ↦ (z + xi(z), eta(z))` along
/// itself: the time-`t` map sends the point with parameter `z` to `z + t`.
///
/// For a straight circle (`xi = 0`, `eta` constant) the field is returned in
/// closed form as a function of `y` alone.
pub fn curve_following_hamiltonian(xi: &TrigPoly, eta: &TrigPoly) -> Result<HamiltonianField> {
    let min_derivative = min_on_grid(&xi.derivative().plus_constant(1.0));
    if min_derivative <= 0.0 {
        return Err(Error::NotDiffeo { min_derivative });
    }
    if xi.is_constant() && xi.mean() == 0.0 && eta.is_constant() {
        // (1/2π) sin 2π(y - c)
        let k = TrigPoly::harmonic(1, 0.0, 1.0 / std::f64::consts::TAU).shifted(-eta.mean());
        return Ok(HamiltonianField::YOnly { k: YFunction::trigonometric(k) });
    }
    Ok(HamiltonianField::CurveFollowing { xi: xi.clone(), eta: eta.clone() })
}

fn min_on_grid(p: &TrigPoly) -> f64 {
    let len = (16 * p.degree().max(4)).next_power_of_two();
    p.sample(len).into_iter().fold(f64::INFINITY, f64::min)
}

/// Time-`t` map of the curve-following Hamiltonian. Closed form for
/// straight circles, integrated otherwise.
pub fn curve_following_flow(
    xi: &TrigPoly,
    eta: &TrigPoly,
    t: f64,
    config: IntegratorConfig,
) -> Result<SymplecticMap> {
    let field = curve_following_hamiltonian(xi, eta)?;
    if let HamiltonianField::YOnly { k } = &field {
        return Ok(SymplecticMap::HorizontalShear { u: k.derivative().scaled(t) });
    }
    integrate_flow(field, t, config)
}

/// `H = -h(x) χ(y)` with `χ = 1` on `|y| <= delta - width` and `χ = 0` on
/// `|y| >= delta`.
pub fn bump_hamiltonian(h: &TrigPoly, delta: f64, width: f64) -> Result<HamiltonianField> {
    if !(width > 0.0 && width < delta / 2.0) {
        return Err(Error::DomainError(format!(
            "cutoff width {width} must lie in (0, delta/2) for delta = {delta}"
        )));
    }
    Ok(HamiltonianField::BumpCutoff { h: h.clone(), delta, width })
}

/// `H = -h(z) χ(w)` in the frame of the curve `z ↦ (z + xi(z), eta(z))`,
/// with the cutoff of [`bump_hamiltonian`] applied to the frame height `w`.
/// The field is 1-periodic in `y`, so it is meant for torus maps.
pub fn curve_bump_hamiltonian(
    h: &TrigPoly,
    xi: &TrigPoly,
    eta: &TrigPoly,
    delta: f64,
    width: f64,
) -> Result<HamiltonianField> {
    bump_hamiltonian(h, delta, width)?;
    if !(delta < 0.5) {
        return Err(Error::DomainError(format!("cutoff half-height {delta} must be below 1/2")));
    }
    let min_derivative = min_on_grid(&xi.derivative().plus_constant(1.0));
    if min_derivative <= 0.0 {
        return Err(Error::NotDiffeo { min_derivative });
    }
    Ok(HamiltonianField::CurveBump { h: h.clone(), xi: xi.clone(), eta: eta.clone(), delta, width })
}

/// Wraps a field into a numerically integrated flow map.
pub fn integrate_flow(
    field: HamiltonianField,
    t: f64,
    config: IntegratorConfig,
) -> Result<SymplecticMap> {
    config.validate()?;
    Ok(SymplecticMap::FlowMap { field, t, config })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::PhasePoint;
    use std::f64::consts::TAU;

    #[test]
    fn shear_flow_examples() {
        let h = TrigPoly::harmonic(1, 1.0, 0.0);
        let g = shear_flow(&h, 1.0);
        let (x, y) = g.apply_lift(0.25, 0.0).unwrap();
        assert!((x - 0.25).abs() < 1e-15);
        assert!((y + TAU).abs() < 1e-12);
        let (_, y0) = shear_flow(&h, 3.7).apply_lift(0.0, 0.4).unwrap();
        assert!((y0 - 0.4).abs() < 1e-14);
    }

    #[test]
    fn transversality_examples() {
        let f1 = transversality_flow(1, 1.0).unwrap();
        let (x, y) = f1.apply_lift(0.25, 0.0).unwrap();
        assert!((x - 0.25).abs() < 1e-15 && (y - TAU).abs() < 1e-12);
        let f3 = transversality_flow(3, 1.0).unwrap();
        let (x, y) = f3.apply_lift(0.0, 0.25).unwrap();
        assert!((x + TAU).abs() < 1e-12 && (y - 0.25).abs() < 1e-15);
        let id = transversality_flow(1, 0.0).unwrap();
        assert_eq!(id.apply_lift(0.3, 0.7).unwrap(), (0.3, 0.7));
        assert!(transversality_flow(5, 1.0).is_err());
    }

    #[test]
    fn straight_circle_flow_is_closed_form() {
        let flow = curve_following_flow(
            &TrigPoly::zero(),
            &TrigPoly::constant(0.25),
            0.1,
            IntegratorConfig::default(),
        )
        .unwrap();
        assert!(flow.is_closed_form());
        let p = flow.eval_map(PhasePoint::torus(0.5, 0.25)).unwrap();
        assert!((p.x.value() - 0.6).abs() < 1e-15);
        let q = flow.eval_map(PhasePoint::torus(0.5, 0.5)).unwrap();
        assert!((q.x.value() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn not_diffeo_rejected() {
        let xi = TrigPoly::harmonic(1, 0.0, 0.3); // φ' = 1 + 0.6π cos < 0 somewhere
        assert!(matches!(
            curve_following_hamiltonian(&xi, &TrigPoly::zero()),
            Err(Error::NotDiffeo { .. })
        ));
    }

    #[test]
    fn bump_width_validated() {
        assert!(bump_hamiltonian(&TrigPoly::zero(), 0.1, 0.06).is_err());
        assert!(bump_hamiltonian(&TrigPoly::zero(), 0.1, 0.04).is_ok());
    }
}
