use cubic_tba::curve::{continue_sheet, period, Charge, LiftedPath, Periods, SpectralCurve};
use cubic_tba::model::Example;
use cubic_tba::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn pentagon_periods_match_published_values() {
    let (curve, lattice) = Example::Pentagon.definition().build().unwrap();
    let p = Periods::compute(&curve, &lattice).unwrap();
    let z1 = p.basis()[0];
    let z2 = p.basis()[1];
    assert!((z1 - c(-2.00324, 1.15657)).norm() < 5e-5, "{z1}");
    assert!((z2 - c(0.0, -2.31315)).norm() < 5e-5, "{z2}");
    // Z_{γ2} = e^{2πi/3} Z_{γ1}
    assert!((z2 - Complex64::from_polar(1.0, 2.0 * PI / 3.0) * z1).norm() < 1e-9);
    let single = period(&curve, &lattice, &Charge(vec![1, 1])).unwrap();
    assert!((single - (z1 + z2)).norm() < 1e-9 * single.norm());
}

#[test]
fn hexagon_periods_match_published_table() {
    let (curve, lattice) = Example::Hexagon.definition().build().unwrap();
    let p = Periods::compute(&curve, &lattice).unwrap();
    let expected = [c(2.30298, 0.0), c(5.47033, 4.48792), c(-4.31884, 2.49348), c(0.0, -4.98697)];
    for (z, e) in p.basis().iter().zip(&expected) {
        assert!((z - e).norm() < 5e-5, "{z} vs {e}");
    }
}

#[test]
fn pentagon_pairing_examples() {
    let (_, lattice) = Example::Pentagon.definition().build().unwrap();
    let g1 = Charge(vec![1, 0]);
    let g2 = Charge(vec![0, 1]);
    assert_eq!(lattice.pairing(&g1, &g2), 1);
    assert_eq!(lattice.pairing(&g2, &g1), -1);
    assert_eq!(lattice.pairing(&g1, &g1), 0);
}

#[test]
fn hexagon_kernel_charges_pair_trivially() {
    let (_, lattice) = Example::Hexagon.definition().build().unwrap();
    for i in 0..4 {
        let mu = Charge::basis(4, i);
        assert_eq!(lattice.pairing(&Charge::basis(4, 2), &mu), 0);
        assert_eq!(lattice.pairing(&Charge::basis(4, 3), &mu), 0);
    }
    assert!(lattice.in_kernel(&Charge(vec![0, 0, 1, -1])));
    assert!(!lattice.in_kernel(&Charge(vec![1, 0, 0, 0])));
}

#[test]
fn pairing_matrices_are_antisymmetric() {
    for ex in [Example::Pentagon, Example::Hexagon] {
        let (_, lattice) = ex.definition().build().unwrap();
        let m = lattice.pairing_matrix();
        for i in 0..m.len() {
            for j in 0..m.len() {
                assert_eq!(m[i][j] + m[j][i], 0);
            }
        }
    }
}

fn loop_around(center: Complex64, radius: f64, base: Complex64, turns: i32) -> Vec<Complex64> {
    let start = center + (base - center) / (base - center).norm() * radius;
    let a0 = (start - center).arg();
    let n = 48 * turns.unsigned_abs() as usize;
    let mut w = vec![base];
    for k in 0..=n {
        let t = a0 + turns.signum() as f64 * 2.0 * PI * k as f64 / 48.0;
        w.push(center + Complex64::from_polar(radius, t));
    }
    w.push(base);
    w
}

fn sheet_index(curve: &SpectralCurve, z: Complex64, x: Complex64) -> usize {
    let f = curve.sheets_at(z).unwrap();
    (0..3).min_by(|&a, &b| (f[a] - x).norm().partial_cmp(&(f[b] - x).norm()).unwrap()).unwrap()
}

#[test]
fn loop_around_both_zeros_composes_single_monodromies() {
    let (curve, _) = Example::Pentagon.definition().build().unwrap();
    let base = curve.basepoint();
    let sheets = curve.sheets_at(base).unwrap();
    let perm = |path: &dyn Fn(Complex64) -> LiftedPath| -> [usize; 3] {
        let mut out = [0; 3];
        for k in 0..3 {
            let end = continue_sheet(&curve, &path(sheets[k])).unwrap();
            out[k] = sheet_index(&curve, base, end);
        }
        out
    };
    let around_plus = |x| LiftedPath::new(loop_around(c(1.0, 0.0), 0.5, base, 1), x);
    let around_minus = |x| LiftedPath::new(loop_around(c(-1.0, 0.0), 0.5, base, 1), x);
    let around_both = |x| {
        let mut w = loop_around(c(1.0, 0.0), 0.5, base, 1);
        w.extend(loop_around(c(-1.0, 0.0), 0.5, base, 1).into_iter().skip(1));
        LiftedPath::new(w, x)
    };
    let p_plus = perm(&around_plus);
    let p_minus = perm(&around_minus);
    let p_both = perm(&around_both);
    let composed: Vec<usize> = (0..3).map(|k| p_minus[p_plus[k]]).collect();
    assert_eq!(p_both.to_vec(), composed);
    // each single loop is a 3-cycle
    for p in [p_plus, p_minus] {
        assert!((0..3).all(|k| p[k] != k));
    }
}

#[test]
fn monodromy_has_order_three_at_every_hexagon_zero() {
    let (curve, _) = Example::Hexagon.definition().build().unwrap();
    let base = curve.basepoint();
    for &r in curve.ramification_points() {
        for &x0 in curve.sheets_at(base).unwrap().iter() {
            let path = LiftedPath::new(loop_around(r, 0.3, base, 3), x0);
            let end = continue_sheet(&curve, &path).unwrap();
            assert!((end - x0).norm() < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn period_is_a_homomorphism(a in proptest::collection::vec(-5i64..=5, 4),
                                b in proptest::collection::vec(-5i64..=5, 4)) {
        use std::sync::OnceLock;
        static P: OnceLock<Periods> = OnceLock::new();
        let p = P.get_or_init(|| {
            let (curve, lattice) = Example::Hexagon.definition().build().unwrap();
            Periods::compute(&curve, &lattice).unwrap()
        });
        let (ga, gb) = (Charge(a), Charge(b));
        let sum = p.central_charge(&(&ga + &gb));
        let split = p.central_charge(&ga) + p.central_charge(&gb);
        let scale = sum.norm().max(p.basis().iter().map(|z| z.norm()).fold(0.0, f64::max));
        prop_assert!((sum - split).norm() <= 1e-9 * scale);
    }
}
