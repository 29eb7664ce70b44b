use num_complex::Complex64;
use proptest::prelude::*;

use ruled_sl::complex3::{c3_cross, metric_g, omega, random_su3, sl_plane_defect, CVec3, Frame3};
use ruled_sl::constructions::{joyce_twist, HoloField};
use ruled_sl::cone::JoyceParams;
use ruled_sl::elliptic::{jacobi, jacobi_period};
use ruled_sl::manifest::{ConstructionSpec, Manifest};

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn vector() -> impl Strategy<Value = CVec3> {
    (complex(), complex(), complex()).prop_map(|(a, b, c)| CVec3::new(a, b, c))
}

fn generic_frame() -> impl Strategy<Value = Frame3> {
    (vector(), vector(), vector())
        .prop_filter("frame vectors away from zero", |(a, b, c)| {
            a.norm() > 0.1 && b.norm() > 0.1 && c.norm() > 0.1
        })
        .prop_map(|(a, b, c)| Frame3::new(a, b, c))
}

proptest! {
    #[test]
    fn cross_is_antisymmetric(u in vector(), v in vector()) {
        prop_assert!((c3_cross(u, v) + c3_cross(v, u)).norm() < 1e-12);
    }

    #[test]
    fn cross_is_conjugate_linear(u in vector(), w in vector(), v in vector(), a in complex()) {
        let lhs = c3_cross(u.cscale(a) + w, v);
        let rhs = c3_cross(u, v).cscale(a.conj()) + c3_cross(w, v);
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn cross_is_orthogonal_to_its_factors(u in vector(), v in vector()) {
        let x = c3_cross(u, v);
        prop_assert!(metric_g(x, u).abs() < 1e-12);
        prop_assert!(metric_g(x, v).abs() < 1e-12);
    }

    #[test]
    fn cross_commutes_with_su3(u in vector(), v in vector(), seed in any::<u64>()) {
        let m = random_su3(seed);
        let d = c3_cross(m.apply(u), m.apply(v)) - m.apply(c3_cross(u, v));
        prop_assert!(d.norm() < 1e-12);
    }

    #[test]
    fn su3_preserves_kahler_form(u in vector(), v in vector(), seed in any::<u64>()) {
        let m = random_su3(seed);
        prop_assert!((omega(m.apply(u), m.apply(v)) - omega(u, v)).abs() < 1e-12);
    }

    #[test]
    fn plane_defect_ignores_positive_rescaling(
        f in generic_frame(),
        scales in (0.01..100.0f64, 0.01..100.0f64, 0.01..100.0f64),
        theta in -3.2..3.2f64,
    ) {
        let g = Frame3::new(f.v1.scale(scales.0), f.v2.scale(scales.1), f.v3.scale(scales.2));
        let a = sl_plane_defect(&f, theta).unwrap();
        let b = sl_plane_defect(&g, theta).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{} {}", a, b);
    }

    #[test]
    fn plane_defect_is_su3_invariant(f in generic_frame(), seed in any::<u64>(), theta in -3.2..3.2f64) {
        let m = random_su3(seed);
        let a = sl_plane_defect(&f, theta).unwrap();
        let b = sl_plane_defect(&f.map(|v| m.apply(v)), theta).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{} {}", a, b);
    }

    #[test]
    fn diagonal_phase_rotation_shifts_the_phase(f in generic_frame(), alpha in -1.0..1.0f64, theta in -3.2..3.2f64) {
        let e = Complex64::from_polar(1.0, alpha);
        let a = sl_plane_defect(&f, theta).unwrap();
        let b = sl_plane_defect(&f.map(|v| v.cscale(e)), theta + 3.0 * alpha).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{} {}", a, b);
    }

    #[test]
    fn elliptic_quadratic_identities(t in -50.0..50.0f64, k in 0.0..1.0f64) {
        let e = jacobi(t, k).unwrap();
        prop_assert!((e.sn * e.sn + e.cn * e.cn - 1.0).abs() < 1e-10);
        prop_assert!((k * k * e.sn * e.sn + e.dn * e.dn - 1.0).abs() < 1e-10);
    }

    #[test]
    fn elliptic_parity_and_period(t in -5.0..5.0f64, k in 0.0..0.95f64) {
        let e = jacobi(t, k).unwrap();
        let m = jacobi(-t, k).unwrap();
        prop_assert!((e.sn + m.sn).abs() < 1e-12);
        prop_assert!((e.cn - m.cn).abs() < 1e-12 && (e.dn - m.dn).abs() < 1e-12);
        let p = jacobi(t + jacobi_period(k).unwrap(), k).unwrap();
        prop_assert!((p.sn - e.sn).abs() < 1e-10 && (p.cn - e.cn).abs() < 1e-10);
    }

    #[test]
    fn holomorphic_fields_satisfy_cauchy_riemann(
        coeffs in prop::collection::vec(complex(), 1..5),
        s in -1.5..1.5f64,
        t in -1.5..1.5f64,
    ) {
        let [_, _, us, vs, ut, vt] = HoloField::new(coeffs).eval_with_derivatives(s, t);
        prop_assert!((us - vt).abs() < 1e-10 && (ut + vs).abs() < 1e-10);
    }

    #[test]
    fn manifests_round_trip_bit_exact(u in -10.0..10.0f64, v in -10.0..10.0f64) {
        let b = JoyceParams::new(-2, 1, 1).unwrap();
        let m = Manifest::new("joyce", ConstructionSpec::JoyceTwist { b, u, v });
        let back = Manifest::from_json(&m.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &m);
        let a = joyce_twist(b, u, v).point(0.3, 0.2, 1.5);
        let c = back.construction.build().unwrap().surface.point(0.3, 0.2, 1.5);
        prop_assert_eq!(a, c);
    }
}
