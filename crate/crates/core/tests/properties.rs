use hetren_core::blender_cert::{gamma_xi, sigma_vector, solve_targets};
use hetren_core::cycle_model::{bump1, rotation_perturb, translation_perturb, Axis, ModelConfig, SaddleSpectrum};
use hetren_core::henon_limit::{conjugacy_residual, ConjugacyOrientation, EtaVariant, SigmaVector};
use hetren_core::renorm_engine::{mu_bar_k, psi, psi_inv, renorm_closed_form, RenormParams};
use hetren_core::sojourn_search::{
    adapted_arguments, build_schedule, check_spectral, find_sojourn, schedule_for, sigma_interval, trig_from_offsets,
    trig_sequences, SojournPair,
};
use hetren_core::{DoubleDouble, Real, Vec3};
use proptest::prelude::*;

type D = DoubleDouble;

fn nonzero() -> impl Strategy<Value = f64> {
    (0.2f64..2.0, any::<bool>()).prop_map(|(v, neg)| if neg { -v } else { v })
}

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::xyz(x, y, z))
}

proptest! {
    #[test]
    fn conjugacy_holds_with_eta4(
        s1 in nonzero(), s2 in nonzero(), s5 in nonzero(),
        s3 in -1.0f64..1.0, s4 in -1.0f64..1.0, xi in 0.5f64..2.0,
        mu in -10.0f64..10.0, p in vec3(2.0),
    ) {
        let sv = SigmaVector::new(s1, s2, s3, s4, s5);
        let r = conjugacy_residual(&sv, xi, [mu, p.x, p.y, p.z], ConjugacyOrientation::EAfterTheta, EtaVariant::Eta4).unwrap();
        prop_assert!(r < 1e-12);
    }

    #[test]
    fn bump_stays_in_unit_interval(rho in 0.01f64..10.0, x in -20.0f64..20.0) {
        let b = bump1(rho, x);
        prop_assert!((0.0..=1.0).contains(&b));
        prop_assert_eq!(b, bump1(rho, -x));
    }

    #[test]
    fn translation_is_identity_off_its_ball(c in vec3(2.0), w in vec3(0.01), v in vec3(3.0)) {
        let rho = 0.4;
        let t = translation_perturb(c, w, rho, v);
        if (v - c).norm() >= rho {
            prop_assert_eq!(t, v);
        } else {
            prop_assert!((t - c).norm() < rho);
        }
    }

    #[test]
    fn rotation_preserves_radius(omega in -0.5f64..0.5, v in vec3(12.0), y_axis in any::<bool>()) {
        let axis = if y_axis { Axis::Y } else { Axis::X };
        let out = rotation_perturb(axis, omega, 8.0, v);
        prop_assert!((out.norm() - v.norm()).abs() <= 1e-14 * v.norm().max(1.0));
    }

    #[test]
    fn psi_round_trip(m in 1u64..60, n in 1u64..60, v in vec3(1.0)) {
        let cfg = ModelConfig::worked();
        let pair = SojournPair { m, n, product: 0.0, slack: 0.0 };
        let v = Vec3::<D>::from_f64(v);
        let back = psi_inv(&cfg, &pair, psi(&cfg, &pair, v));
        // The image is rounded once, then magnified by at most S⁻².
        let amp = f64::pow_product(&[(cfg.spectrum.sigma_p, 2 * m as i64), (cfg.spectrum.sigma_q, 2 * n as i64)]);
        prop_assert!((back - v).to_f64().norm_inf() <= 8.0 * DoubleDouble::EPS * amp);
    }

    #[test]
    fn mu_bar_is_affine_in_mu(m in 1u64..40, n in 1u64..40, mu1 in -10.0f64..10.0, mu2 in -10.0f64..10.0) {
        let cfg = ModelConfig::worked();
        let pair = SojournPair { m, n, product: 0.0, slack: 0.0 };
        let (a, b) = (mu_bar_k(&cfg, &pair, D::from_f64(mu1)), mu_bar_k(&cfg, &pair, D::from_f64(mu2)));
        let d = a - b;
        // Both y entries carry σ_Q⁻ⁿ, so the difference cancels against that scale.
        let scale = a.y.abs().to_f64() + b.y.abs().to_f64();
        let s2 = D::pow_product(&[(cfg.spectrum.sigma_q, -2 * n as i64), (cfg.spectrum.sigma_p, -2 * m as i64)]);
        let expect = s2 * (D::from_f64(mu1) - D::from_f64(mu2));
        prop_assert_eq!(d.x.to_f64(), 0.0);
        prop_assert_eq!(d.z.to_f64(), 0.0);
        prop_assert!((d.y - expect).abs().to_f64() <= 1e-30 * scale);
    }

    #[test]
    fn renormalized_map_is_affine_in_mu(v in vec3(1.0), k in 0usize..4, mu1 in -10.0f64..-9.0, mu2 in -10.0f64..-9.0) {
        let cfg = ModelConfig::worked();
        let s = schedule_for(&cfg, 1.185).unwrap();
        let a = RenormParams::<D>::new(&cfg, &s, k, mu1).unwrap();
        let b = RenormParams::<D>::new(&cfg, &s, k, mu2).unwrap();
        let v = Vec3::<D>::from_f64(v);
        let d = renorm_closed_form(&cfg, &a, v).value - renorm_closed_form(&cfg, &b, v).value;
        prop_assert!((d.y.to_f64() - (mu1 - mu2)).abs() < 1e-12);
        prop_assert_eq!(d.x.to_f64(), 0.0);
    }

    #[test]
    fn sigma_vector_homogeneity(xi in 0.1f64..3.0, b2 in 0.0f64..1.0, b3 in 0.0f64..1.0, b4 in 0.0f64..1.0) {
        let mut cfg = ModelConfig::worked();
        cfg.pq.b2 = b2;
        cfg.pq.b3 = b3;
        cfg.pq.b4 = b4;
        let a = sigma_vector(&cfg, xi);
        let b = sigma_vector(&cfg, 2.0 * xi);
        prop_assert_eq!((a.s1, a.s2, a.s5), (b.s1, b.s2, b.s5));
        prop_assert_eq!(b.s3, 4.0 * a.s3);
        prop_assert_eq!(b.s4, 2.0 * a.s4);
    }

    #[test]
    fn target_round_trip_is_relatively_exact(
        xi in 1.181f64..1.189,
        k0 in (1e-3f64..0.2, any::<bool>()).prop_map(|(v, s)| if s { -v } else { v }),
        e0 in (1e-3f64..0.2, any::<bool>()).prop_map(|(v, s)| if s { -v } else { v }),
    ) {
        let cfg = solve_targets(xi, k0, e0, &ModelConfig::worked()).unwrap();
        let (k, e) = gamma_xi(&cfg, xi).unwrap();
        prop_assert!((k - k0).abs() <= 1e-12 * k0.abs());
        prop_assert!((e - e0).abs() <= 1e-12 * e0.abs());
    }

    #[test]
    fn spectral_check_matches_interval(sq in 1.0001f64..5.0, lq in 0.05f64..0.95) {
        let (_, hi) = sigma_interval(0.04, 2.0, lq).unwrap();
        let sp = SaddleSpectrum { lambda_p: 0.04, sigma_p: 2.0, phi_p: 0.1, lambda_q: lq, sigma_q: sq, phi_q: 0.2 };
        let ok = check_spectral(&sp).ok;
        if (sq - hi).abs() > 1e-9 * hi {
            prop_assert_eq!(ok, sq < hi);
        }
    }

    #[test]
    fn found_pairs_meet_their_bounds(lambda in 0.3f64..0.45, xi in 1.1f64..1.3, n0 in 0u64..20) {
        let eps = 0.02;
        if let Ok(p) = find_sojourn(2.0, lambda, 1.0, xi, eps, n0, 400) {
            prop_assert!(p.m > n0 && p.n > n0 && p.slack < 1.0);
            let gap = (D::pow_product(&[(2.0, p.m as i64), (lambda, p.n as i64)]) - D::from_f64(xi)).abs().to_f64();
            prop_assert!(gap < eps);
        }
    }

    #[test]
    fn schedules_are_monotone(lambda in 0.3f64..0.45, count in 1usize..5) {
        if let Ok(s) = build_schedule(2.0, lambda, 1.0, 1.185, count, 0.05) {
            prop_assert_eq!(s.len(), count);
            let gaps: Vec<f64> = s.pairs.iter().map(|p| (p.product - 1.185).abs()).collect();
            for w in s.pairs.windows(2) {
                prop_assert!(w[1].m > w[0].m && w[1].n > w[0].n);
            }
            for w in gaps.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
            }
            for (k, g) in gaps.iter().enumerate() {
                prop_assert!(*g < 0.05 / 2f64.powi(k as i32) + 1e-15);
            }
        }
    }

    #[test]
    fn adapted_angles_land_on_targets(
        m in 1u64..500, n in 1u64..500, theta in 0.0f64..1.0, omega in 0.0f64..1.0,
        zeta in -0.01f64..0.01, vt in -0.01f64..0.01,
    ) {
        let (th, om, z, w) = (D::from_f64(theta), D::from_f64(omega), D::from_f64(zeta), D::from_f64(vt));
        let (a, b) = adapted_arguments(m, n, th, om, z, w);
        let t1 = trig_sequences(m, n, th + a, om + b);
        let t2 = trig_from_offsets(z, w);
        for (u, v) in [(t1.ct, t2.ct), (t1.st, t2.st), (t1.c, t2.c), (t1.s, t2.s)] {
            prop_assert!((u - v).abs().to_f64() < 1e-26);
        }
    }

    #[test]
    fn double_double_identities(x in 0.01f64..50.0, y in -30.0f64..30.0) {
        let d = D::from_f64(x);
        prop_assert!(((d.ln().exp() - d) / d).abs().to_f64() < 1e-30);
        let t = D::from_f64(y);
        let (s, c) = (t.sin(), t.cos());
        prop_assert!((s * s + c * c - D::one()).abs().to_f64() < 1e-30);
        prop_assert!(((d.sqrt() * d.sqrt() - d) / d).abs().to_f64() < 1e-30);
    }
}
