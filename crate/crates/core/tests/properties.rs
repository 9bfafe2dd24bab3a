use csbp::lamperti::{inverse_transform, roundtrip_check, transform};
use csbp::simulate::{rescale, sample_dsbp, DsbpSpec};
use csbp::skorohod::{dist_t, rho};
use csbp::stats::{ks_two_sample, laplace_of_sample};
use csbp::{ExactPath, ExtReal, Mechanism, Path, PathEnsemble, Rational, Terminal};
use proptest::prelude::*;

/// Finite positive holding values with times, ending in a terminal.
fn event_path() -> impl Strategy<Value = Path> {
    (
        prop::collection::vec((0.01f64..50.0, 0.001f64..5.0), 1..15),
        any::<bool>(),
    )
        .prop_map(|(steps, to_zero)| {
            let mut times = Vec::new();
            let mut values = Vec::new();
            let mut now = 0.0;
            let mut last = f64::NAN;
            for (v, h) in steps {
                let v = if v == last { v + 1.0 } else { v };
                times.push(now);
                values.push(ExtReal::Finite(v));
                now += h;
                last = v;
            }
            let terminal = if to_zero { Terminal::Zero } else { Terminal::Infinity };
            times.push(now);
            values.push(terminal.value());
            Path::event(times, values, terminal, None).unwrap()
        })
}

fn value() -> impl Strategy<Value = ExtReal<f64>> {
    prop_oneof![
        1 => Just(ExtReal::Infinity),
        1 => Just(ExtReal::zero()),
        6 => (0.0f64..1e6).prop_map(ExtReal::Finite),
    ]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn roundtrip_within_rounding(f in event_path()) {
        // breakpoints of L(f) reach T = ∫f; recovering a holding time h from
        // them costs about ulp(T)/v_min
        let d = roundtrip_check(&f).unwrap().to_f64();
        let total = transform(&f).unwrap().last_time();
        let v_min = f.values().iter().filter_map(|v| v.finite()).filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
        let bound = 64.0 * f64::EPSILON * (1.0 + f.last_time() + total / v_min);
        prop_assert!(d <= bound, "discrepancy {d} > {bound}");
    }

    #[test]
    fn rational_roundtrip_is_exact(steps in prop::collection::vec((1i128..500, 1i128..50, 1i128..500, 1i128..50), 1..8),
                                   to_zero in any::<bool>()) {
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut now = Rational::from_integer(0);
        let mut last = Rational::from_integer(-1);
        for (vn, vd, hn, hd) in steps {
            let mut v = Rational::new(vn, vd);
            if v == last {
                v += Rational::from_integer(1);
            }
            times.push(now);
            values.push(ExtReal::Finite(v));
            now += Rational::new(hn, hd);
            last = v;
        }
        let terminal = if to_zero { Terminal::Zero } else { Terminal::Infinity };
        times.push(now);
        values.push(terminal.value());
        let f = ExactPath::event(times, values, terminal, None).unwrap();
        prop_assert_eq!(&inverse_transform(&transform(&f).unwrap()).unwrap(), &f);
        prop_assert_eq!(&transform(&inverse_transform(&f).unwrap()).unwrap(), &f);
    }

    #[test]
    fn inverse_then_forward_is_exact(f in event_path()) {
        let back = transform(&inverse_transform(&f).unwrap()).unwrap();
        prop_assert_eq!(back.len(), f.len());
        for (a, b) in f.times().iter().zip(back.times()) {
            prop_assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn hitting_time_of_transform_is_integral(f in event_path()) {
        let lf = transform(&f).unwrap();
        let integral: f64 = f
            .holding_intervals()
            .iter()
            .map(|(v, h)| match (v, h) {
                (ExtReal::Finite(v), Some(h)) => v * h,
                _ => 0.0,
            })
            .sum();
        match f.terminal() {
            Terminal::Zero => {
                let t0 = lf.hitting_time_zero().expect("absorbed at zero");
                prop_assert!(close(t0, integral, 1e-12), "{t0} vs {integral}");
            }
            Terminal::Infinity => prop_assert!(lf.hitting_time_zero().is_none()),
        }
    }

    #[test]
    fn transform_preserves_values_and_membership(f in event_path()) {
        let g = transform(&f).unwrap();
        prop_assert!(g.validate().is_ok());
        prop_assert_eq!(g.values(), f.values());
        prop_assert_eq!(g.terminal(), f.terminal());
    }

    #[test]
    fn rescale_composes(f in event_path(), a in 0.1f64..10.0, b in 0.1f64..10.0,
                        c in 0.1f64..10.0, d in 0.1f64..10.0) {
        let twice = rescale(&rescale(&f, c, d).unwrap(), a, b).unwrap();
        let once = rescale(&f, a * c, b * d).unwrap();
        prop_assert_eq!(twice.len(), once.len());
        for (x, y) in twice.times().iter().zip(once.times()) {
            prop_assert!(close(*x, *y, 1e-12));
        }
        for (x, y) in twice.values().iter().zip(once.values()) {
            prop_assert!(close(x.to_f64(), y.to_f64(), 1e-12) || x == y);
        }
    }

    #[test]
    fn transform_intertwines_scaling(f in event_path(), a in 0.1f64..10.0, b in 0.1f64..10.0) {
        // L(S^a_b f) = S^{ab}_b L(f)
        let lhs = transform(&rescale(&f, a, b).unwrap()).unwrap();
        let rhs = rescale(&transform(&f).unwrap(), a * b, b).unwrap();
        for (x, y) in lhs.times().iter().zip(rhs.times()) {
            prop_assert!(close(*x, *y, 1e-12));
        }
        prop_assert_eq!(lhs.len(), rhs.len());
    }

    #[test]
    fn rho_is_a_metric(x in value(), y in value(), z in value()) {
        prop_assert_eq!(rho(x, x), 0.0);
        prop_assert_eq!(rho(x, y), rho(y, x));
        prop_assert!(rho(x, z) <= rho(x, y) + rho(y, z) + 1e-15);
        prop_assert!(rho(x, y) <= 1.0);
    }

    #[test]
    fn skorohod_bounds_are_consistent(f in event_path(), g in event_path(), h in event_path()) {
        let t = 2.0;
        let fg = dist_t(&f, &g, t, 6).unwrap();
        let gf = dist_t(&g, &f, t, 6).unwrap();
        let gh = dist_t(&g, &h, t, 6).unwrap();
        let fh = dist_t(&f, &h, t, 6).unwrap();
        prop_assert!(fg.lower <= fg.upper + 1e-12);
        prop_assert!(fg.lower <= gf.upper + 1e-9 && gf.lower <= fg.upper + 1e-9);
        prop_assert!(fh.lower <= fg.upper + gh.upper + 1e-9);
        prop_assert!(fg.upper <= 1.0 + 1e-12);
        let ff = dist_t(&f, &f, t, 6).unwrap();
        prop_assert_eq!(ff.upper, 0.0);
    }

    #[test]
    fn ks_is_symmetric(a in prop::collection::vec(0.0f64..10.0, 10..60),
                       b in prop::collection::vec(0.0f64..10.0, 10..60)) {
        let ab = ks_two_sample(&a, &b).unwrap();
        let ba = ks_two_sample(&b, &a).unwrap();
        prop_assert_eq!(ab.statistic, ba.statistic);
        prop_assert_eq!(ab.p_value, ba.p_value);
        prop_assert!((0.0..=1.0).contains(&ab.statistic));
        prop_assert_eq!(ks_two_sample(&a, &a).unwrap().statistic, 0.0);
    }

    #[test]
    fn laplace_decreases_in_lambda(xs in prop::collection::vec(prop_oneof![
                                        9 => 0.0f64..20.0, 1 => Just(f64::INFINITY)], 2..50),
                                   l1 in 0.0f64..5.0, dl in 0.0f64..5.0) {
        let a = laplace_of_sample(&xs, l1).unwrap().value;
        let b = laplace_of_sample(&xs, l1 + dl).unwrap().value;
        prop_assert!(b <= a + 1e-15);
        prop_assert!((0.0..=1.0).contains(&b));
    }

    #[test]
    fn flow_is_monotone(l in 0.01f64..5.0, dl in 0.01f64..5.0, t in 0.0f64..3.0) {
        let m = Mechanism::birth_death(2.0, 1.0);
        let lo = m.flow(l, t, 1e-10).unwrap();
        let hi = m.flow(l + dl, t, 1e-10).unwrap();
        prop_assert!(lo <= hi);
        prop_assert!(lo >= 0.0);
    }
}

fn bd_ensemble(seed: u64) -> PathEnsemble {
    let spec = DsbpSpec::birth_death(1.0, 1.5).unwrap();
    PathEnsemble::generate("test", seed, 0, 200, |rng| Ok(sample_dsbp(&spec, 5, 3.0, rng))).unwrap()
}

#[test]
fn ensembles_are_deterministic_and_serialize() {
    let a = bd_ensemble(11);
    assert_eq!(a, bd_ensemble(11));
    assert_ne!(a.paths, bd_ensemble(12).paths);
    let back = PathEnsemble::from_json(&a.to_json()).unwrap();
    assert_eq!(back, a);
    assert_eq!(back.to_json(), a.to_json());
}

#[test]
fn sampled_paths_respect_absorption() {
    for p in &bd_ensemble(3).paths {
        assert!(p.validate().is_ok());
        if let Some(t0) = p.hitting_time_zero() {
            assert_eq!(p.last_time(), t0);
            assert!(p.eval(t0 + 1.0).unwrap().is_zero());
        } else {
            assert!(p.is_truncated());
        }
        for w in p.values().windows(2) {
            let step = w[1].to_f64() - w[0].to_f64();
            assert!(step == 1.0 || step == -1.0);
        }
    }
}
