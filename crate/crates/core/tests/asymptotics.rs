use std::f64::consts::PI;

use cubic_tba::asymptotics::*;
use cubic_tba::bps::BpsSpectrum;
use cubic_tba::curve::{Charge, ChargeLattice, Periods};
use cubic_tba::model::Example;
use cubic_tba::tba::{solve, SolverConfig};
use cubic_tba::Error;
use proptest::prelude::*;

fn load(ex: Example) -> (ChargeLattice, Periods, BpsSpectrum) {
    let (curve, lat) = ex.definition().build().unwrap();
    let periods = Periods::compute(&curve, &lat).unwrap();
    (lat, periods, BpsSpectrum::builtin(ex))
}

fn charge(v: &[i64]) -> Charge {
    Charge(v.to_vec())
}

#[test]
fn linear_coefficients_match_published_values() {
    let (_, p, _) = load(Example::Pentagon);
    assert!((linear_coefficient(&charge(&[1, 0]), 0.0, &p) + 4.00648).abs() < 5e-5);
    let (_, h, _) = load(Example::Hexagon);
    assert!((linear_coefficient(&charge(&[0, 0, 1, 0]), 0.2, &h) + 7.4748).abs() < 5e-4);
    assert!((linear_coefficient(&charge(&[1, 0, 0, 0]), 0.2, &h) - 4.5142).abs() < 5e-4);
}

#[test]
fn pentagon_leading_coefficient() {
    let (lat, p, s) = load(Example::Pentagon);
    let pred = build_prediction(&charge(&[1, 0]), 0.0, &s, &p, &lat).unwrap();
    assert!((pred.rho - 2.31315).abs() < 5e-5);
    // γ2 and γ1+γ2 share the leading rate; their four coefficients sum to the printed one
    let expect = -3.0 / (2.0 * (PI * pred.rho).sqrt());
    assert!((pred.leading_coefficient.re - expect).abs() < 1e-9, "{}", pred.leading_coefficient);
    assert!(pred.leading_coefficient.im.abs() < 1e-12);
    assert_eq!(pred.corrections.len(), 4);
}

#[test]
fn hexagon_gamma1_rate_and_coefficient() {
    let (lat, p, s) = load(Example::Hexagon);
    let pred = build_prediction(&charge(&[1, 0, 0, 0]), 0.2, &s, &p, &lat).unwrap();
    assert!((pred.rho - 2.3030).abs() < 5e-4);
    // independent oracle: sum the leading-rate terms by hand from the published periods
    let z = [
        cubic_tba::Complex64::new(2.30298, 0.0),
        cubic_tba::Complex64::new(5.47033, 4.48792),
        cubic_tba::Complex64::new(-4.31884, 2.49348),
        cubic_tba::Complex64::new(0.0, -4.98697),
    ];
    let e = cubic_tba::Complex64::from_polar(1.0, 0.2);
    let mut c = cubic_tba::Complex64::default();
    for v in [[0, 1, 1, 1], [-1, 1, 1, 1]] {
        for sign in [1i64, -1] {
            let mu: Vec<i64> = v.iter().map(|x| x * sign).collect();
            let zm: cubic_tba::Complex64 = mu.iter().zip(&z).map(|(&m, z)| z * m as f64).sum();
            let alpha = -zm / zm.norm();
            let pairing = lat.pairing(&charge(&[1, 0, 0, 0]), &Charge(mu.clone()));
            c += cubic_tba::Complex64::new(0.0, -1.0) * (pairing as f64 / (4.0 * PI)) * (alpha + e) / (alpha - e)
                * (PI / zm.norm()).sqrt();
        }
    }
    assert!((pred.leading_coefficient - c).norm() < 1e-4, "{} vs {c}", pred.leading_coefficient);
}

#[test]
fn kernel_charge_has_no_corrections() {
    let (lat, p, s) = load(Example::Hexagon);
    let pred = build_prediction(&charge(&[0, 0, 1, 0]), 0.2, &s, &p, &lat).unwrap();
    assert!(pred.is_exact());
    assert!(pred.rho.is_infinite());
    for r in [0.5, 1.0, 2.0] {
        let sol = solve(&SolverConfig::new(r, 0.2), &s, &p, &lat).unwrap();
        assert!(remainder(&sol, &pred).unwrap().abs() < 1e-10);
    }
}

#[test]
fn theta_on_a_contributing_ray_is_rejected() {
    let (lat, p, s) = load(Example::Pentagon);
    let z2 = p.central_charge(&charge(&[0, 1]));
    let theta = (-z2).arg();
    assert!(matches!(
        build_prediction(&charge(&[1, 0]), theta, &s, &p, &lat),
        Err(Error::OnRayTheta(..))
    ));
}

#[test]
fn removing_leading_charges_raises_rho() {
    let (lat, p, s) = load(Example::Hexagon);
    let g = charge(&[1, 0, 0, 0]);
    let full = build_prediction(&g, 0.2, &s, &p, &lat).unwrap();
    let kept: Vec<(Charge, i64)> = s
        .entries()
        .filter(|(mu, _)| (p.central_charge(mu).norm() - full.rho).abs() > 1e-9)
        .map(|(mu, o)| (mu.clone(), o))
        .collect();
    let reduced = BpsSpectrum::new(4, kept).unwrap();
    let pred = build_prediction(&g, 0.2, &reduced, &p, &lat).unwrap();
    assert!(pred.rho > full.rho);
}

#[test]
fn remainder_decays_faster_than_the_leading_correction() {
    let (lat, p, s) = load(Example::Pentagon);
    let pred = build_prediction(&charge(&[1, 0]), 0.0, &s, &p, &lat).unwrap();
    let mut scaled = Vec::new();
    for r in [1.0, 1.5, 2.0, 2.5, 3.0] {
        let sol = solve(&SolverConfig::new(r, 0.0), &s, &p, &lat).unwrap();
        let delta = remainder(&sol, &pred).unwrap();
        scaled.push(pred.scaled_remainder(delta, r));
        if r == 3.0 {
            assert!(delta.abs() < pred.correction(r).abs());
        }
    }
    for w in scaled.windows(2) {
        assert!(w[1] < w[0], "{scaled:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn linear_coefficient_is_additive(
        a in proptest::collection::vec(-5i64..=5, 4),
        b in proptest::collection::vec(-5i64..=5, 4),
        theta in -3.0f64..3.0,
    ) {
        static P: std::sync::OnceLock<Periods> = std::sync::OnceLock::new();
        let p = P.get_or_init(|| load(Example::Hexagon).1);
        let (ga, gb) = (Charge(a), Charge(b));
        let lhs = linear_coefficient(&(&ga + &gb), theta, p);
        let rhs = linear_coefficient(&ga, theta, p) + linear_coefficient(&gb, theta, p);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn summed_coefficients_are_real(
        v in proptest::collection::vec(-2i64..=2, 4),
        theta in -3.0f64..3.0,
    ) {
        static S: std::sync::OnceLock<(ChargeLattice, Periods, BpsSpectrum)> = std::sync::OnceLock::new();
        let (lat, p, s) = S.get_or_init(|| load(Example::Hexagon));
        match build_prediction(&Charge(v), theta, s, p, lat) {
            Ok(pred) => {
                let total: cubic_tba::Complex64 = pred.corrections.iter().map(|c| c.coefficient).sum();
                prop_assert!(total.im.abs() < 1e-12 * (1.0 + total.norm()));
                prop_assert!(pred.leading_coefficient.im.abs() < 1e-12 * (1.0 + pred.leading_coefficient.norm()));
            }
            Err(Error::OnRayTheta(..)) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
