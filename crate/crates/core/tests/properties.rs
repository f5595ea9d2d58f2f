use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qpvi::continuum::dopri;
use qpvi::laxpair::{check_compat, build_b, corner_data, determinant_law, fit_a};
use qpvi::mp::{real, Cx};
use qpvi::opuc::{szego_star_residual, toeplitz_verblunsky, verblunsky_from_moments, wronskian_check};
use qpvi::painleve::{iterate, random_params, random_unit_annulus, SurfaceCoords};
use qpvi::qseries::{default_nodes, moments, weight_eval, QWeightParams};
use qpvi::weyl::{check_translation, composite_map, elementary, phi_pic, random_point, reflection, PicMap, Reflection};

fn disc() -> impl Strategy<Value = [f64; 2]> {
    (0.05f64..0.7, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| [r * t.cos(), r * t.sin()])
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 12, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn weight_is_real_and_positive(a in disc(), b in disc(), q in 0.2f64..0.8, theta in 0.0f64..6.0) {
        let p = QWeightParams::new(a, b, q, 128).unwrap();
        let w = weight_eval(&p, &Cx::unit(&real(128, theta))).unwrap();
        prop_assert!(w.re().to_f64() > 0.0);
        prop_assert!(w.im().to_f64().abs() < 1e-30 * w.re().to_f64());
    }

    #[test]
    fn opuc_invariants(a in disc(), b in disc(), q in 0.3f64..0.7) {
        let n = 6;
        let p = QWeightParams::new(a, b, q, 128).unwrap();
        let t = moments(&p, n, default_nodes(n, 128), true, None).unwrap();
        for k in 1..=n as i64 {
            prop_assert_eq!(t.get(-k), &t.get(k).conj());
        }
        let vt = verblunsky_from_moments(&t, n).unwrap();
        let mut prod = 1.0f64;
        for k in 1..=n {
            prod *= 1.0 - vt.alpha[k].abs_f64().powi(2);
            let s = vt.sigma[k].to_f64();
            prop_assert!((s - prod).abs() < 1e-14);
            prop_assert!(s < vt.sigma[k - 1].to_f64());
        }
        prop_assert!(szego_star_residual(&vt) < 1e-30);
        prop_assert!(wronskian_check(&vt).max_residual < 1e-30);
        let tz = toeplitz_verblunsky(&t, n).unwrap();
        for k in 1..=n {
            prop_assert!((&vt.alpha[k] - &tz[k - 1]).abs_f64() < 1e-30);
        }
    }

    #[test]
    fn lax_invariants(a in disc(), b in disc()) {
        let n_max = 4;
        let p = QWeightParams::new(a, b, 0.5, 160).unwrap();
        let k = n_max + 9;
        let t = moments(&p, k, default_nodes(k, 160), true, None).unwrap();
        let vt = verblunsky_from_moments(&t, n_max + 2).unwrap();
        let fits: Vec<_> = (1..=n_max).map(|n| fit_a(&vt, &p, &t, n, 1e-25).unwrap()).collect();
        for f in &fits {
            prop_assert!(corner_data(&p, f).max() < 1e-25);
            let d = determinant_law(&p, f);
            prop_assert!(d.residual < 1e-25 && d.modulus_error < 1e-25);
        }
        for w in fits.windows(2) {
            let b = build_b(&vt.alpha[w[0].n + 1]);
            prop_assert!(check_compat(&w[0].a, &w[1].a, &b, &p.q) < 1e-25);
        }
    }

    #[test]
    fn parameter_flow_and_constraint(seed in any::<u64>(), steps in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sp = random_params(&mut rng, 128, 0.6);
        let pt = SurfaceCoords::new(random_unit_annulus(&mut rng, 128), random_unit_annulus(&mut rng, 128));
        let orbit = iterate(&pt, &sp, steps).unwrap();
        let q = Cx::from_real(&sp.q);
        for (k, (_, s)) in orbit.iter().enumerate() {
            let qk = q.powu(k as u32);
            prop_assert!(s.kappa1.rel_err(&(&sp.kappa1 * &qk), 0.0) < 1e-30);
            prop_assert!(s.theta1.rel_err(&(&sp.theta1 * &qk), 0.0) < 1e-30);
            prop_assert_eq!(&s.kappa2, &sp.kappa2);
            prop_assert_eq!(&s.theta2, &sp.theta2);
            prop_assert!(s.constraint_residual() < 1e-30);
        }
    }

    #[test]
    fn reflections_preserve_q(seed in any::<u64>(), i in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pt = random_point(&mut rng, 128);
        let w = Reflection::from_index(i).unwrap();
        let img = elementary(w, &pt).unwrap();
        prop_assert!(img.q_sakai().rel_err(&pt.q_sakai(), 0.0) < 1e-30);
        let back = elementary(w, &img).unwrap();
        prop_assert!(back.torus_dist(&pt).unwrap() < 1e-30);
        let comp = composite_map(&pt).unwrap();
        prop_assert!(comp.q_sakai().rel_err(&pt.q_sakai(), 0.0) < 1e-30);
    }

    #[test]
    fn exponential_integration(re in -2.0f64..1.0, im in -3.0f64..3.0, t1 in 0.1f64..2.0) {
        let lam = Complex64::new(re, im);
        let one = Complex64::new(1.0, 0.0);
        let (pts, _) = dopri(|_, y| Ok([lam * y[0], lam * lam * y[1]]), 0.0, [one, one], t1, 1e-12).unwrap();
        let (t, y) = *pts.last().unwrap();
        prop_assert_eq!(t, t1);
        prop_assert!((y[0] - (lam * t1).exp()).norm() < 1e-8 * (1.0 + (lam * t1).exp().norm()));
    }
}

#[test]
fn simple_reflections_are_isometric_involutions() {
    for i in 0..6 {
        let r = reflection(i);
        assert!(r.is_isometry());
        assert_eq!(r.compose(&r), PicMap::identity());
    }
    assert!(check_translation(&phi_pic()).passed());
}
