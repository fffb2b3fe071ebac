use fibtrace::hyperbolic::recurrence::{b_exact, b_max_growth};
use fibtrace::hyperbolic::*;
use fibtrace::{Point3, GOLDEN};

#[test]
fn passing_pair_is_consistent() {
    let base = RecurrenceParams::default();
    let pair = find_passing_pair(&base, 200).unwrap();
    assert!(pair.delta0 > 0.0 && pair.n0 >= 1 && pair.n0 <= 200);
    for &d in &pair.probes {
        for n in pair.n0..=pair.n_ref {
            let r = run_dd(&base.with_delta(d), n, None).unwrap();
            assert!(r.flags.all(), "delta {d} N {n}: {:?}", r.flags);
        }
    }
    let p = base.with_delta(pair.delta0);
    let n = pair.n0 + 20;
    let r = run_aa(&p, &b_max_growth(&p, n), &SlackSchedule::Zero, None).unwrap();
    assert!(r.flags.all(), "{:?}", r.flags);
}

#[test]
fn explicit_slack_is_checked() {
    let p = RecurrenceParams::default();
    let b = b_exact(&p, 10);
    assert!(run_aa(&p, &b, &SlackSchedule::Explicit(vec![(0.1, 0.1); 9]), None).is_err());
    assert!(run_aa(&p, &b, &SlackSchedule::Explicit(vec![(1.0, 0.1); 10]), None).is_err());
    assert!(run_aa(&p, &b, &SlackSchedule::Explicit(vec![(0.2, 0.3); 10]), None).is_ok());
}

#[test]
fn linear_map_closed_form() {
    let map = make_model_map(ModelMapSpec { delta: 0.0, ..Default::default() }).unwrap();
    let l = map.spec.lambda;
    assert!((l - GOLDEN * GOLDEN).abs() < 1e-15);
    let cone = ConeSpec3D::default();
    let params = CertifyParams::default();
    for m in [5, 12, 30] {
        let z = l.powi(-m) * 0.9;
        let v = [1.0, 0.0, cone.c2 * z.sqrt()];
        let r = expansion_certificate(&map, Point3::new(0.1, 0.2, z), v, &cone, &params).unwrap();
        assert_eq!(r.exit_time, m as usize + 1);
        let v1 = 1.0 + v[2];
        for (k, g) in r.growth_ratios.iter().enumerate() {
            let k = k as i32 + 1;
            let want = (l.powi(-k) + v[2] * l.powi(k)) / v1;
            assert!((g - want).abs() <= 1e-12 * want);
        }
        assert!(r.passed(), "{r:?}");
    }
}

#[test]
fn perturbed_sweep_passes() {
    let base = RecurrenceParams::default();
    let n0 = min_passing_n(&base, 200).unwrap();
    for seed in 0..3 {
        let map = make_model_map(ModelMapSpec { delta: base.delta, seed, ..Default::default() }).unwrap();
        let s = model_map_sweep(&map, &ConeSpec3D::default(), &CertifyParams::default(), n0, 300, seed).unwrap();
        assert_eq!(s.inconclusive, 0);
        assert_eq!(s.passed, s.completed, "{:?}", s.failures.first());
        assert!(s.min_exit_time >= n0);
    }
}

#[test]
fn sweep_is_deterministic() {
    let map = make_model_map(ModelMapSpec::default()).unwrap();
    let a = model_map_sweep(&map, &ConeSpec3D::default(), &CertifyParams::default(), 10, 64, 9).unwrap();
    let b = model_map_sweep(&map, &ConeSpec3D::default(), &CertifyParams::default(), 10, 64, 9).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let p = EmpiricalParams { samples: 40, ..Default::default() };
    let a = empirical_trace_certificate(&p).unwrap();
    let b = empirical_trace_certificate(&p).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn small_coupling_certificate() {
    let r = empirical_trace_certificate(&EmpiricalParams { coupling: 0.05, samples: 300, ..Default::default() }).unwrap();
    assert_eq!(r.samples_found, 300);
    assert_eq!(r.violations, 0, "{:?}", r.counterexamples);
    assert!(r.min_ratio > 0.0 && r.min_ratio.is_finite());
    assert!(r.inconclusive_rate < 0.05);
}
