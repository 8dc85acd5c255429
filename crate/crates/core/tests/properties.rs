use dynbarrier::barrier::{match_static, transmission_opaque, transmission_static, BarrierConfig};
use dynbarrier::bessel::{bessel_j, bessel_j_orders};
use dynbarrier::spectrum::{build_spectrum, density_of_states, Branch, Classification};
use dynbarrier::tien_gordon::tg_sidebands;
use dynbarrier::transmission::{transmission_at_energy, transmission_channel, transmission_total, Formula};
use dynbarrier::traversal::{
    high_freq_ratio, quadratic_coefficients, traversal_exact, traversal_high, traversal_low,
    LOW_APPROX_MAX_FRACTION,
};
use proptest::prelude::*;

/// Valid static barriers with `kappa b` kept below ~30 so `T` is not
/// vanishingly small.
fn static_barrier() -> impl Strategy<Value = BarrierConfig> {
    (0.1_f64..20.0, 0.01_f64..0.99, 0.0_f64..1.0).prop_map(|(v0, frac, w)| {
        let e = frac * v0;
        let kappa = (v0 - e).sqrt();
        BarrierConfig::new_static(v0, w * 30.0 / kappa, e)
    })
}

/// Modulated barriers with a moderate channel count.
fn modulated_barrier() -> impl Strategy<Value = BarrierConfig> {
    (1.0_f64..20.0, 0.05_f64..3.0, 0.0_f64..1.0, 0.01_f64..0.99, 0.02_f64..2.0).prop_map(
        |(v0, b, v1_frac, e_frac, omega)| {
            let v1 = v1_frac * v0;
            let omega = omega.max(v1 / 60.0);
            BarrierConfig::new(v0, b, v1, omega, e_frac * v0)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn flux_is_conserved(cfg in static_barrier()) {
        let s = match_static(&cfg).unwrap();
        prop_assert!((s.a_minus.norm_sqr() + s.c_plus.norm_sqr() - 1.0).abs() <= 1e-12);
        let t = transmission_static(&cfg).unwrap();
        prop_assert!((s.transmission - t).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&t));
    }

    #[test]
    fn transmission_falls_with_width(cfg in static_barrier(), grow in 0.01_f64..2.0) {
        let wider = BarrierConfig { b: cfg.b + grow, ..cfg };
        let (t, tw) = (transmission_static(&cfg).unwrap(), transmission_static(&wider).unwrap());
        prop_assert!(tw < t || (t == 0.0 && tw == 0.0), "{t} -> {tw}");
    }

    #[test]
    fn opaque_limit_is_close_for_thick_barriers(v0 in 0.5_f64..20.0, frac in 0.05_f64..0.95) {
        let e = frac * v0;
        let kappa = (v0 - e).sqrt();
        let cfg = BarrierConfig::new_static(v0, 8.0 / kappa, e);
        let rel = transmission_opaque(&cfg).unwrap() / transmission_static(&cfg).unwrap() - 1.0;
        prop_assert!(rel.abs() <= 1e-5, "{rel}");
    }

    #[test]
    fn spectrum_lies_on_the_circle(cfg in modulated_barrier()) {
        let s = build_spectrum(&cfg).unwrap();
        prop_assert_eq!(s.channels.len(), 2 * s.n_max as usize + 1);
        let mut offsets = Vec::new();
        for c in &s.channels {
            prop_assert!(c.circle_residual(s.e_elastic, s.alpha, s.n_max).abs() <= 1e-12);
            prop_assert!(c.energy >= s.e_elastic - cfg.v1 && c.energy <= s.e_elastic + cfg.v1);
            prop_assert_eq!(c.classification, Classification::of(c.energy, cfg.v0));
            offsets.push(c.energy - s.e_elastic);
        }
        let mut neg: Vec<f64> = offsets.iter().map(|d| -d).collect();
        neg.sort_by(f64::total_cmp);
        offsets.sort_by(f64::total_cmp);
        for (a, b) in offsets.iter().zip(&neg) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn doubling_v1_doubles_the_band(v0 in 2.0_f64..20.0, n in 1_u32..20, omega in 0.01_f64..0.5) {
        let v1 = f64::from(n) * omega;
        prop_assume!(2.0 * v1 <= v0);
        let e = 0.5 * v0;
        let one = build_spectrum(&BarrierConfig::new(v0, 1.0, v1, omega, e)).unwrap();
        let two = build_spectrum(&BarrierConfig::new(v0, 1.0, 2.0 * v1, omega, e)).unwrap();
        prop_assert_eq!(two.n_max, 2 * one.n_max);
        let width = |s: &dynbarrier::ChannelSpectrum| {
            s.channels.last().unwrap().energy - s.channels[0].energy
        };
        prop_assert!((width(&two) - 2.0 * width(&one)).abs() <= 1e-12 * v0);
    }

    #[test]
    fn density_times_spacing_is_one(n in -500_i64..500, alpha in 1e-3_f64..10.0) {
        prop_assume!(n != 0);
        let rho = density_of_states(n, alpha, alpha).finite().unwrap();
        prop_assert!((rho * (n as f64 * alpha * alpha).abs() - 1.0).abs() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn channel_transmissions_are_probabilities(cfg in modulated_barrier()) {
        let r = transmission_total(&cfg).unwrap();
        let s = build_spectrum(&cfg).unwrap();
        prop_assert_eq!(
            transmission_channel(&cfg, s.elastic()).unwrap(),
            transmission_static(&cfg).unwrap()
        );
        let mut sum = 0.0;
        for c in &r.per_channel {
            if let Some(t) = c.t_n {
                prop_assert!((0.0..=1.0).contains(&t));
                prop_assert!((c.kn.unwrap().powi(2) - c.energy).abs() <= 1e-12 * c.energy.max(1.0));
                prop_assert!((c.kappa_n.unwrap().powi(2) - (cfg.v0 - c.energy).abs()).abs() <= 1e-12 * cfg.v0);
                sum += t;
            }
        }
        prop_assert_eq!(sum, r.total);
    }

    #[test]
    fn absorption_tunnels_at_least_as_well_as_emission(cfg in modulated_barrier()) {
        let s = build_spectrum(&cfg).unwrap();
        for n in 0..s.n_max {
            let up = s.channel(n, Branch::Absorption).unwrap();
            let down = s.channel(n, Branch::Emission).unwrap();
            if up.classification == Classification::OpenSubbarrier
                && down.classification == Classification::OpenSubbarrier
            {
                let tu = transmission_channel(&cfg, up).unwrap();
                let td = transmission_channel(&cfg, down).unwrap();
                prop_assert!(tu >= td, "n = {n}: {tu} < {td}");
            }
        }
    }

    #[test]
    fn sideband_weights_are_symmetric_and_complete(
        v1 in 0.0_f64..5.0, omega in 0.05_f64..2.0, tol in 1e-12_f64..1e-3,
    ) {
        let cfg = BarrierConfig::new(10.0, 1.0, v1, omega, 5.0);
        let t = tg_sidebands(&cfg, tol).unwrap();
        prop_assert!(t.weight_sum >= 1.0 - tol);
        prop_assert!(t.weight_sum <= 1.0 + 1e-12);
        let k = t.rows.len();
        for i in 0..k / 2 {
            prop_assert_eq!(t.rows[i].weight, t.rows[k - 1 - i].weight);
        }
    }

    #[test]
    fn bessel_completeness(x in 0.0_f64..50.0) {
        let j = bessel_j_orders(120, x).unwrap();
        let s = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
        prop_assert!((s - 1.0).abs() <= 1e-12, "x = {x}: {s}");
    }

    #[test]
    fn bessel_recurrence(n in 1_i32..60, x in 0.05_f64..40.0) {
        let (a, b, c) = (bessel_j(n - 1, x).unwrap(), bessel_j(n, x).unwrap(), bessel_j(n + 1, x).unwrap());
        let lhs = a + c;
        let rhs = 2.0 * f64::from(n) / x * b;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn traversal_times_are_positive(nn in 2_u32..60, pick in 0.0_f64..1.0, omega in 1e-3_f64..10.0) {
        let n = 1 + ((f64::from(nn - 2) * pick) as u32);
        let m = n - 1;
        for t in traversal_exact(n, m, nn, omega).unwrap() {
            prop_assert!(t > 0.0);
        }
        let low = traversal_low(n, m, nn, 1.0 / (f64::from(nn) * omega)).unwrap();
        prop_assert!(low.t_plus > 0.0);
        prop_assert_eq!(low.t_plus.to_bits(), low.t_minus.to_bits());
        if m > 0 {
            let h = traversal_high(n, m, nn, omega).unwrap();
            prop_assert!(h.t_plus > 0.0 && h.t_minus > 0.0);
        }
    }
}

#[test]
fn opaque_error_shrinks_with_thickness() {
    for (v0, e) in [(2.0_f64, 1.0_f64), (10.0, 0.5), (1.0, 0.9)] {
        let kappa: f64 = (v0 - e).sqrt();
        let errs: Vec<f64> = (2..=6)
            .map(|kb| {
                let cfg = BarrierConfig::new_static(v0, f64::from(kb) / kappa, e);
                (transmission_opaque(&cfg).unwrap() / transmission_static(&cfg).unwrap() - 1.0).abs()
            })
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        assert!(errs[3] <= 1e-3);
    }
}

/// `T(E)` is continuous at the barrier top: the one-sided slopes agree, so
/// the symmetric second difference vanishes, and both one-sided limits hit
/// `1 / (1 + k^2 b^2 / 4)`.
#[test]
fn barrier_top_is_continuous() {
    for (v0, b) in [(2.0, 1.0), (1.0, 0.5), (10.0, 0.3), (0.5, 2.0)] {
        let t = |e: f64| transmission_at_energy(v0, b, e).unwrap();
        let (top, f) = t(v0);
        assert_eq!(f, Formula::BarrierTop);
        let eps = 1e-6;
        let (below, fb) = t(v0 - eps);
        let (above, fa) = t(v0 + eps);
        assert_eq!((fb, fa), (Formula::Tunnelling, Formula::Propagating));
        let jump = (above - top) - (top - below);
        assert!(jump.abs() <= 1e-8, "v0 = {v0}, b = {b}: {jump:e}");
        // Richardson extrapolation of each side to eps -> 0
        for side in [-1.0, 1.0] {
            let h = 1e-4;
            let limit = 2.0 * t(v0 + side * h / 2.0).0 - t(v0 + side * h).0;
            assert!((limit - top).abs() <= 1e-8, "side {side}: {limit} vs {top}");
        }
    }
}

#[test]
fn high_frequency_algebra_on_the_full_grid() {
    for nn in 3..=50_u32 {
        for n in 2..nn {
            for m in 1..n {
                let (a, b, c) = quadratic_coefficients(n, m, nn);
                let (big_n, mf) = (f64::from(nn), f64::from(m));
                let disc = b * b - a * c;
                let expected = mf * mf * (big_n * big_n - mf * mf);
                assert!((disc - expected).abs() <= 1e-9 * expected, "({n},{m},{nn})");
                let h = traversal_high(n, m, nn, 1.0).unwrap();
                let scale = a.abs().max(b.abs()).max(c.abs());
                for x in [h.tan_theta_plus, h.tan_theta_minus].into_iter().flatten() {
                    assert!((a * x * x + 2.0 * b * x + c).abs() <= 1e-9 * scale, "({n},{m},{nn}) tan = {x}");
                }
                assert!(high_freq_ratio(n, m, nn).unwrap() < 1.0);
                assert_eq!(h.degenerate, a == 0.0);
            }
        }
    }
}

#[test]
fn low_frequency_holds_for_n_well_below_n_max() {
    for nn in 4..=50_u32 {
        for n in 1..=((LOW_APPROX_MAX_FRACTION * f64::from(nn)) as u32) {
            for m in 0..n {
                let exact = traversal_exact(n, m, nn, 1.0).unwrap()[0];
                let low = traversal_low(n, m, nn, 1.0 / f64::from(nn)).unwrap().t_plus;
                if exact <= 0.1 {
                    assert!((low - exact).abs() / exact <= 0.02, "({n},{m},{nn})");
                }
            }
        }
    }
}
