use std::f64::consts::PI;

use cubic_tba::curve::{Charge, ChargeLattice, Periods, SpectralCurve};
use cubic_tba::model::Example;
use cubic_tba::network::*;
use cubic_tba::{Complex64, Error};
use proptest::prelude::*;

fn load(ex: Example) -> (SpectralCurve, ChargeLattice) {
    ex.definition().build().unwrap()
}

fn charge(v: &[i64]) -> Charge {
    Charge(v.to_vec())
}

fn polyline_distance(p: Complex64, pts: &[Complex64]) -> f64 {
    pts.windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            let t = ((p - w[0]) * d.conj()).re / d.norm_sqr();
            (w[0] + d * t.clamp(0.0, 1.0) - p).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn critical_seed_counts() {
    let cfg = NetworkConfig::default();
    let (pent, _) = load(Example::Pentagon);
    let (hex, _) = load(Example::Hexagon);
    assert_eq!(seed_critical(&pent, 0.0, &cfg).len(), 16);
    assert_eq!(seed_critical(&hex, 0.1, &cfg).len(), 24);
}

#[test]
fn pentagon_census_at_zero() {
    let (curve, _) = load(Example::Pentagon);
    let net = grow_network(&curve, 0.0, &NetworkConfig::default()).unwrap();
    assert_eq!(net.trajectories.len(), 18);
    assert_eq!(net.critical_count(), 16);
    assert_eq!(net.born_count(), 2);
    assert!(!net.bps_ful);
    assert_eq!(net.infinity_marks.len(), 10);
    for k in 0..10 {
        let a = net.infinity_marks[k].angle;
        let b = net.infinity_marks[(k + 1) % 10].angle + if k == 9 { 2.0 * PI } else { 0.0 };
        assert!((b - a - PI / 5.0).abs() < 1e-12);
    }
    let arcs = final_arcs(&net.infinity_marks);
    assert_eq!(arcs.len(), 5);
    // each sheet fades somewhere
    let mut sheets: Vec<usize> = arcs.iter().map(|a| a.fading_sheet).collect();
    sheets.sort();
    sheets.dedup();
    assert_eq!(sheets.len(), 3);
}

#[test]
fn hexagon_census_at_one_tenth() {
    let (curve, _) = load(Example::Hexagon);
    let net = grow_network(&curve, 0.1, &NetworkConfig::default()).unwrap();
    assert_eq!(net.trajectories.len(), 31);
    assert_eq!(net.born_count(), 7);
    assert_eq!(net.infinity_marks.len(), 12);
    assert_eq!(final_arcs(&net.infinity_marks).len(), 6);
}

#[test]
fn marks_rotate_rigidly_inside_a_chamber() {
    let (curve, _) = load(Example::Pentagon);
    let cfg = NetworkConfig::default();
    let nets: Vec<SpectralNetwork> = [-0.3, 0.0, 0.3]
        .iter()
        .map(|&t| grow_network(&curve, t, &cfg).unwrap())
        .collect();
    for net in &nets {
        assert_eq!(net.trajectories.len(), 18);
    }
    let labels = |n: &SpectralNetwork| n.infinity_marks.iter().map(|m| m.label).collect::<Vec<_>>();
    assert_eq!(labels(&nets[0]), labels(&nets[1]));
    assert_eq!(labels(&nets[1]), labels(&nets[2]));
    // directions move by 3Δϑ/(n+3)
    for (a, b) in nets[1].infinity_marks.iter().zip(&nets[2].infinity_marks) {
        assert!((b.angle - a.angle - 0.3 * 3.0 / 5.0).abs() < 1e-12);
    }
}

fn same_point_sets(a: &SpectralNetwork, b: &SpectralNetwork, tol: f64) {
    let radius = 10.0;
    for t in &a.trajectories {
        for p in t.points.iter().step_by(7).filter(|p| p.norm() < radius) {
            let d = b
                .trajectories
                .iter()
                .map(|u| polyline_distance(*p, &u.points))
                .fold(f64::INFINITY, f64::min);
            assert!(d < tol, "point {p} is {d} away");
        }
    }
}

#[test]
fn rotation_by_two_pi_over_three_preserves_the_network() {
    let (curve, _) = load(Example::Hexagon);
    let cfg = NetworkConfig::default();
    let a = grow_network(&curve, 0.1, &cfg).unwrap();
    let b = grow_network(&curve, 0.1 + 2.0 * PI / 3.0, &cfg).unwrap();
    assert_eq!(a.trajectories.len(), b.trajectories.len());
    same_point_sets(&a, &b, 1e-4);
    same_point_sets(&b, &a, 1e-4);
}

#[test]
fn rotation_by_pi_reverses_labels() {
    let (curve, _) = load(Example::Pentagon);
    let cfg = NetworkConfig::default();
    let a = grow_network(&curve, 0.0, &cfg).unwrap();
    let b = grow_network(&curve, PI, &cfg).unwrap();
    assert_eq!(a.trajectories.len(), b.trajectories.len());
    same_point_sets(&a, &b, 1e-4);
    // a trajectory at ϑ+π through a given point carries the reversed pair
    for t in &b.trajectories {
        let p = t.points[t.points.len() / 2];
        let (src, k) = a
            .trajectories
            .iter()
            .flat_map(|u| (0..u.points.len()).map(move |k| (u, k)))
            .min_by(|x, y| {
                (x.0.points[x.1] - p)
                    .norm()
                    .partial_cmp(&(y.0.points[y.1] - p).norm())
                    .unwrap()
            })
            .unwrap();
        let fibre = curve.fibre(src.points[k]);
        let idx = |x: Complex64| (0..3).min_by(|&i, &j| (fibre[i] - x).norm().partial_cmp(&(fibre[j] - x).norm()).unwrap()).unwrap();
        let fibre_b = curve.fibre(p);
        let idx_b = |x: Complex64| (0..3).min_by(|&i, &j| (fibre_b[i] - x).norm().partial_cmp(&(fibre_b[j] - x).norm()).unwrap()).unwrap();
        let la = [idx(src.pairs[k][0]), idx(src.pairs[k][1])];
        let lb = [idx_b(t.pairs[t.points.len() / 2][0]), idx_b(t.pairs[t.points.len() / 2][1])];
        assert_eq!(la, [lb[1], lb[0]]);
    }
}

#[test]
fn network_at_a_bps_phase_is_bps_ful() {
    let (curve, _) = load(Example::Pentagon);
    let net = grow_network(&curve, -PI / 6.0, &NetworkConfig::default()).unwrap();
    assert!(net.bps_ful);
    assert!(net.infinity_marks.is_empty());
    assert!(net
        .trajectories
        .iter()
        .any(|t| matches!(t.status, Status::HitZero(_))));
}

#[test]
fn generation_cap_is_reported() {
    let (curve, _) = load(Example::Hexagon);
    let cfg = NetworkConfig {
        max_generations: 1,
        ..Default::default()
    };
    assert!(matches!(grow_network(&curve, 0.1, &cfg), Err(Error::GenerationCapExceeded(1))));
    // a smaller explicit limit just stops early
    let partial = grow_generations(&curve, 0.1, &NetworkConfig::default(), 1).unwrap();
    assert_eq!(partial.generations, 1);
    assert!(partial.trajectories.len() < 31);
}

#[test]
fn network_json_round_trip_and_polylines() {
    let (curve, _) = load(Example::Pentagon);
    let net = grow_network(&curve, 0.0, &NetworkConfig::default()).unwrap();
    let json = serde_json::to_string(&net).unwrap();
    let back: SpectralNetwork = serde_json::from_str(&json).unwrap();
    assert_eq!(back.trajectories.len(), 18);
    assert_eq!(back.infinity_marks, net.infinity_marks);
    assert_eq!(back.trajectories[3].points, net.trajectories[3].points);
    let text = network_polylines(&net);
    assert_eq!(text.split("\n\n").filter(|s| !s.trim().is_empty()).count(), 18);
}

#[test]
fn pentagon_bps_phases_and_charges() {
    let (curve, lat) = load(Example::Pentagon);
    let webs = detect_bps(&curve, &lat, &NetworkConfig::default(), &ScanConfig::default()).unwrap();
    let expected = [-5.0 * PI / 6.0, -PI / 2.0, -PI / 6.0, PI / 6.0, PI / 2.0, 5.0 * PI / 6.0];
    assert_eq!(webs.len(), 6);
    for (w, e) in webs.iter().zip(expected) {
        assert!((w.theta_star - e).abs() < 1e-3, "{} vs {e}", w.theta_star);
        assert_eq!(w.topology, WebTopology::SingleString);
        let z = w.period;
        assert!((z.arg() - w.theta_star).abs() < 1e-4);
    }
    assert_eq!(webs[2].charge, charge(&[-1, 0]));
    // partner of charge -γ at ϑ* + π
    for w in &webs {
        let partner = webs.iter().find(|v| v.charge == -w.charge.clone()).expect("partner");
        let d = (partner.theta_star - w.theta_star).rem_euclid(2.0 * PI);
        assert!((d - PI).abs() < 1e-4);
    }
}

fn narrow_scan(lo: f64, hi: f64) -> ScanConfig {
    ScanConfig {
        start: lo,
        end: hi,
        ..Default::default()
    }
}

#[test]
fn hexagon_web_of_charge_g1_minus_g3_minus_g4() {
    let (curve, lat) = load(Example::Hexagon);
    let webs = detect_bps(&curve, &lat, &NetworkConfig::default(), &narrow_scan(0.3, 0.42)).unwrap();
    assert_eq!(webs.len(), 1);
    assert_eq!(webs[0].charge, charge(&[1, 0, -1, -1]));
    assert_eq!(webs[0].topology, WebTopology::SingleString);
    assert!((webs[0].theta_star - 0.36).abs() < 5e-3);
}

#[test]
fn hexagon_three_string_junction() {
    let (curve, lat) = load(Example::Hexagon);
    let webs = detect_bps(&curve, &lat, &NetworkConfig::default(), &narrow_scan(0.47, 0.57)).unwrap();
    assert_eq!(webs.len(), 1);
    assert_eq!(webs[0].topology, WebTopology::ThreeStringJunction);
    assert_eq!(webs[0].charge, charge(&[1, 1, 0, 0]));
    assert_eq!(webs[0].strings.len(), 3);
    let periods = Periods::compute(&curve, &lat).unwrap();
    assert!((periods.central_charge(&webs[0].charge).arg() - webs[0].theta_star).abs() < 1e-4);
}

#[test]
fn detected_phase_is_stable_under_hit_radius_halving() {
    let (curve, lat) = load(Example::Pentagon);
    let scan = narrow_scan(-0.6, -0.45);
    let a = detect_bps(&curve, &lat, &NetworkConfig::default(), &scan).unwrap();
    let cfg = NetworkConfig {
        hit_radius: 5e-4,
        ..Default::default()
    };
    let b = detect_bps(&curve, &lat, &cfg, &scan).unwrap();
    assert_eq!(a.len(), 1);
    assert_eq!(b.len(), 1);
    assert_eq!(a[0].charge, b[0].charge);
    assert!((a[0].theta_star - b[0].theta_star).abs() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn charges_are_recovered_from_their_periods(v in proptest::collection::vec(-4i64..=4, 4)) {
        prop_assume!(v.iter().any(|&c| c != 0));
        static PERIODS: std::sync::OnceLock<Periods> = std::sync::OnceLock::new();
        let periods = PERIODS.get_or_init(|| {
            let (curve, lat) = load(Example::Hexagon);
            Periods::compute(&curve, &lat).unwrap()
        });
        let g = Charge(v);
        let chain: Vec<Complex64> = (0..periods.forms.len()).map(|f| periods.form_period(f, &g)).collect();
        prop_assert_eq!(identify_charge(periods, &chain, 1e-4).unwrap(), g);
    }
}
