use rand::SeedableRng;
use serde_json::{json, Value};

use fibtrace::dimension::{asymptote_check, auto_k, box_dimension, cantor_set, EpsGrid, ASYMPTOTE};
use fibtrace::geometry::{per2_point, surface_mesh, Coupling, SurfaceSpec, PER2_EXCLUSION};
use fibtrace::hyperbolic::recurrence::{b_max_growth, b_random};
use fibtrace::hyperbolic::{
    empirical_trace_certificate, find_passing_pair, make_model_map, min_passing_n, model_map_sweep, run_aa, run_dd,
    CertifyParams, ConeSpec3D, EmpiricalParams, ModelMapSpec, RecurrenceParams, SlackSchedule,
};
use fibtrace::spectrum::bands::MAX_K;
use fibtrace::spectrum::{escape_sweep, spectrum_cover, OrbitStatus};
use fibtrace::subshift::{SubshiftSpec, MAX_COUNT_LENGTH};

use crate::config::RunConfig;
use crate::output::{to_value, CommandOutput, Table};
use crate::CliError;

fn check(ok: bool, field: &str, msg: impl std::fmt::Display) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!("{field}: {msg}")))
    }
}

fn coupling(v: f64, field: &str) -> Result<Coupling, CliError> {
    check(v.is_finite() && v >= 0.0, field, format!("coupling must be a non-negative number, got {v}"))?;
    Ok(Coupling::new(v)?)
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

pub fn spectrum(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let s = &cfg.spectrum;
    let c = coupling(s.coupling, "spectrum.coupling")?;
    check(s.k >= 1 && s.k < MAX_K, "spectrum.k", format!("must lie in 1..={}, got {}", MAX_K - 1, s.k))?;
    check(s.resolution >= 0.0 && s.resolution.is_finite(), "spectrum.resolution", format!("must be non-negative, got {}", s.resolution))?;
    check(s.escape_points != 1, "spectrum.escape_points", "must be 0 or at least 2")?;
    check(s.n_max >= 1, "spectrum.n_max", "must be at least 1")?;
    check(s.escape_radius > 1.0 && s.escape_radius.is_finite(), "spectrum.escape_radius", format!("must exceed 1, got {}", s.escape_radius))?;
    let cover = spectrum_cover(c, s.k, s.resolution)?;
    let mut result = json!({
        "coupling": s.coupling,
        "k": s.k,
        "resolution": s.resolution,
        "band_count": cover.len(),
        "measure": cover.measure(),
        "bounds": cover.bounds(),
        "bands": cover.intervals,
    });
    if s.escape_points >= 2 {
        let (lo, hi) = cover.bounds().unwrap_or((-2.0, 2.0));
        let pad = 0.05 * (hi - lo);
        let sweep = escape_sweep(c, lo - pad, hi + pad, s.escape_points, s.n_max, s.escape_radius)?;
        let bounded: Vec<f64> = sweep.iter().filter(|(_, r)| r.status == OrbitStatus::BoundedSoFar).map(|(e, _)| *e).collect();
        let outside = bounded.iter().filter(|&&e| !cover.contains(e, s.resolution.max(1e-9))).count();
        result["escape"] = json!({
            "points": s.escape_points,
            "bounded": bounded.len(),
            "escaped": s.escape_points - bounded.len(),
            "bounded_outside_cover": outside,
        });
    }
    let rows = cover
        .intervals
        .iter()
        .enumerate()
        .map(|(i, &(lo, hi))| vec![i.to_string(), fmt(lo), fmt(hi), fmt(hi - lo)])
        .collect();
    Ok(CommandOutput { result, table: Some(Table { header: vec!["index", "lo", "hi", "width"], rows }) })
}

pub fn dimension(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let d = &cfg.dimension;
    check(d.eps_max > 0.0 && d.eps_max.is_finite(), "dimension.eps_max", format!("must be positive, got {}", d.eps_max))?;
    check(d.eps_ratio > 0.0 && d.eps_ratio <= 0.5, "dimension.eps_ratio", format!("must lie in (0, 1/2], got {}", d.eps_ratio))?;
    check(d.eps_min >= 0.0 && d.eps_min <= d.eps_max, "dimension.eps_min", format!("must lie in [0, eps_max], got {}", d.eps_min))?;
    let count_table = |counts: &[(f64, u64)]| Table {
        header: vec!["eps", "count"],
        rows: counts.iter().map(|(e, n)| vec![fmt(*e), n.to_string()]).collect(),
    };
    match d.mode.as_str() {
        "cantor" => {
            check(d.cantor_ratio > 0.0 && d.cantor_ratio < 0.5, "dimension.cantor_ratio", format!("must lie in (0, 1/2), got {}", d.cantor_ratio))?;
            check(d.cantor_depth <= 24, "dimension.cantor_depth", format!("must be at most 24, got {}", d.cantor_depth))?;
            let set = cantor_set(d.cantor_ratio, d.cantor_depth)?;
            let eps_min = if d.eps_min > 0.0 { d.eps_min } else { 4.0 * set.resolution };
            let grid = EpsGrid::geometric(d.eps_max, eps_min, d.eps_ratio)?;
            let est = box_dimension(&set, &grid)?;
            let table = count_table(&est.counts);
            let exact = (0.5f64).ln() / d.cantor_ratio.ln();
            Ok(CommandOutput {
                result: json!({ "set": "cantor", "ratio": d.cantor_ratio, "depth": d.cantor_depth, "exact": exact, "estimate": to_value(&est)? }),
                table: Some(table),
            })
        }
        "spectrum" => {
            let c = coupling(d.coupling, "dimension.coupling")?;
            check(d.k < MAX_K, "dimension.k", format!("must be below {MAX_K}, got {}", d.k))?;
            let k = if d.k == 0 { auto_k(c)? } else { d.k };
            let cover = spectrum_cover(c, k, 0.0)?;
            let native = cover.max_width();
            let cover = cover.with_resolution(native);
            let eps_min = if d.eps_min > 0.0 { d.eps_min } else { 4.0 * native };
            let grid = EpsGrid::geometric(d.eps_max, eps_min, d.eps_ratio)?;
            let est = box_dimension(&cover, &grid)?;
            let table = count_table(&est.counts);
            Ok(CommandOutput {
                result: json!({
                    "set": "spectrum_cover",
                    "coupling": d.coupling,
                    "k": k,
                    "bands": cover.len(),
                    "dim_log_v": est.value * d.coupling.ln(),
                    "estimate": to_value(&est)?,
                }),
                table: Some(table),
            })
        }
        "sweep" => {
            check(!d.couplings.is_empty(), "dimension.couplings", "must not be empty")?;
            for &v in &d.couplings {
                check(v.is_finite() && v >= 16.0, "dimension.couplings", format!("coupling values must be at least 16, got {v}"))?;
            }
            check(d.k < MAX_K, "dimension.k", format!("must be below {MAX_K}, got {}", d.k))?;
            let k = (d.k > 0).then_some(d.k);
            let rows = asymptote_check(&d.couplings, k, d.eps_max, d.eps_ratio)?;
            let table = Table {
                header: vec!["coupling", "k", "bands", "min_band_width", "dimension", "dim_log_v", "residual", "poor_fit"],
                rows: rows
                    .iter()
                    .map(|r| {
                        vec![
                            fmt(r.coupling),
                            r.k.to_string(),
                            r.bands.to_string(),
                            fmt(r.min_band_width),
                            fmt(r.dimension),
                            fmt(r.dim_log_v),
                            fmt(r.estimate.regression_residual),
                            r.estimate.poor_fit.to_string(),
                        ]
                    })
                    .collect(),
            };
            Ok(CommandOutput { result: json!({ "asymptote": ASYMPTOTE, "rows": to_value(&rows)? }), table: Some(table) })
        }
        other => Err(CliError::Config(format!("dimension.mode: expected cantor, spectrum or sweep, got `{other}`"))),
    }
}

fn recurrence_params(c: &crate::config::CertifyConfig) -> Result<RecurrenceParams, CliError> {
    let p = RecurrenceParams { c1: c.c1, c2: c.c2, lambda: c.lambda, epsilon: c.epsilon, delta: c.delta };
    check(p.lambda > 1.0 && p.lambda.is_finite(), "certify.lambda", format!("must exceed 1, got {}", p.lambda))?;
    check(p.epsilon > 0.0 && p.epsilon < 0.25, "certify.epsilon", format!("must lie in (0, 1/4), got {}", p.epsilon))?;
    check(p.delta >= 0.0 && p.delta < p.lambda - 1.0, "certify.delta", format!("must lie in [0, lambda - 1), got {}", p.delta))?;
    check(p.c1 >= 0.0 && p.c1.is_finite(), "certify.c1", format!("must be non-negative, got {}", p.c1))?;
    check(p.c2 > 0.0 && p.c2.is_finite(), "certify.c2", format!("must be positive, got {}", p.c2))?;
    check(c.eta > 0.0 && c.eta.is_finite(), "certify.eta", format!("must be positive, got {}", c.eta))?;
    check(c.zeta > 0.0 && c.zeta < 1.0, "certify.zeta", format!("must lie in (0, 1), got {}", c.zeta))?;
    check(c.n >= 1, "certify.n", "must be at least 1")?;
    check(c.n_ref >= 2, "certify.n_ref", "must be at least 2")?;
    check(c.samples >= 1, "certify.samples", "must be at least 1")?;
    check(c.slack_max >= 0.0 && c.slack_max < 1.0, "certify.slack_max", format!("must lie in [0, 1), got {}", c.slack_max))?;
    Ok(p)
}

fn certify_recurrence(cfg: &RunConfig, base: &RecurrenceParams) -> Result<(Value, Table), CliError> {
    let c = &cfg.certify;
    let pair = find_passing_pair(base, c.n_ref)?;
    let dd = run_dd(base, c.n, None)?;
    let at_pair = base.with_delta(pair.delta0);
    let mut passed = 0;
    let mut failures = Vec::new();
    for i in 0..c.slack_runs as u64 {
        let seed = cfg.seed.wrapping_add(i);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = pair.n0 + (i as usize % 50);
        let b = b_random(&mut rng, &at_pair, n);
        let r = run_aa(&at_pair, &b, &SlackSchedule::Random { seed, max: c.slack_max }, None)?;
        if r.flags.all() {
            passed += 1;
        } else if failures.len() < 10 {
            failures.push(json!({ "seed": seed, "n": n, "flags": to_value(&r.flags)? }));
        }
    }
    let fastest = run_aa(&at_pair, &b_max_growth(&at_pair, pair.n0), &SlackSchedule::Zero, None)?;
    let result = json!({
        "params": to_value(base)?,
        "passing_pair": to_value(&pair)?,
        "min_passing_n_at_delta": min_passing_n(base, c.n_ref),
        "run_dd": { "n": c.n, "D0": dd.big[0], "d_N": dd.d_or_a[c.n], "D_N": dd.big[c.n], "flags": to_value(&dd.flags)? },
        "run_aa_random": { "runs": c.slack_runs, "passed": passed, "failures": failures },
        "run_aa_max_growth": { "n": pair.n0, "kappa": fastest.kappa, "flags": to_value(&fastest.flags)? },
    });
    let table = Table {
        header: vec!["k", "d", "D", "b"],
        rows: (0..=c.n).map(|k| vec![k.to_string(), fmt(dd.d_or_a[k]), fmt(dd.big[k]), fmt(dd.b[k])]).collect(),
    };
    Ok((result, table))
}

fn certify_model_map(cfg: &RunConfig, base: &RecurrenceParams) -> Result<Value, CliError> {
    let c = &cfg.certify;
    let cone = ConeSpec3D::new(c.c2)?;
    let cert_delta = if c.delta > 0.0 { c.delta } else { RecurrenceParams::default().delta };
    let n0 = min_passing_n(&base.with_delta(cert_delta), c.n_ref)
        .ok_or_else(|| CliError::Config(format!("certify.delta: no passing N up to n_ref = {} at delta = {cert_delta}", c.n_ref)))?;
    let params = CertifyParams { epsilon: c.epsilon, eta: c.eta, delta: cert_delta, iteration_cap: c.iteration_cap };
    let mut out = serde_json::Map::new();
    for (name, delta) in [("linear", 0.0), ("perturbed", c.delta)] {
        let map = make_model_map(ModelMapSpec { lambda: c.lambda, delta, seed: cfg.seed, c1: c.c1.max(f64::MIN_POSITIVE) })?;
        let sweep = model_map_sweep(&map, &cone, &params, n0, c.samples, cfg.seed)?;
        out.insert(
            name.into(),
            json!({
                "delta": delta,
                "amplitude": map.amplitude,
                "audit": to_value(&map.audit)?,
                "pass_fraction": sweep.pass_fraction(),
                "sweep": to_value(&sweep)?,
            }),
        );
    }
    out.insert("n0".into(), json!(n0));
    out.insert("certification_delta".into(), json!(cert_delta));
    Ok(Value::Object(out))
}

fn certify_empirical(cfg: &RunConfig) -> Result<Value, CliError> {
    let c = &cfg.certify;
    check(c.coupling >= 0.0 && c.coupling <= 0.5, "certify.coupling", format!("coupling must lie in [0, 0.5], got {}", c.coupling))?;
    check(c.n_forward >= 1, "certify.n_forward", "must be at least 1")?;
    check(c.radius >= 0.0 && c.radius.is_finite(), "certify.radius", format!("must be non-negative, got {}", c.radius))?;
    let prm = EmpiricalParams {
        coupling: c.coupling,
        samples: c.samples,
        n: c.n_forward,
        epsilon: c.epsilon,
        zeta: c.zeta,
        radius: (c.radius > 0.0).then_some(c.radius),
        seed: cfg.seed,
        ..Default::default()
    };
    to_value(&empirical_trace_certificate(&prm)?)
}

pub fn certify(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let c = &cfg.certify;
    let base = recurrence_params(c)?;
    let (rec, model, emp) = match c.mode.as_str() {
        "all" => (true, true, true),
        "recurrence" => (true, false, false),
        "model_map" => (false, true, false),
        "empirical" => (false, false, true),
        other => {
            return Err(CliError::Config(format!(
                "certify.mode: expected recurrence, model_map, empirical or all, got `{other}`"
            )))
        }
    };
    let mut result = serde_json::Map::new();
    result.insert("seed".into(), json!(cfg.seed));
    let mut table = None;
    if rec {
        let (v, t) = certify_recurrence(cfg, &base)?;
        result.insert("recurrence".into(), v);
        table = Some(t);
    }
    if model {
        result.insert("model_map".into(), certify_model_map(cfg, &base)?);
    }
    if emp {
        result.insert("empirical".into(), certify_empirical(cfg)?);
    }
    Ok(CommandOutput { result: Value::Object(result), table })
}

pub fn mesh(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let m = &cfg.mesh;
    let c = coupling(m.coupling, "mesh.coupling")?;
    check(m.resolution >= 2, "mesh.resolution", format!("must be at least 2, got {}", m.resolution))?;
    check(m.tolerance > 0.0 && m.tolerance < 1e-2, "mesh.tolerance", format!("must lie in (0, 1e-2), got {}", m.tolerance))?;
    for (name, (a, b)) in [("mesh.x_range", m.x_range), ("mesh.y_range", m.y_range)] {
        check(a.is_finite() && b.is_finite() && a < b, name, format!("must be an increasing pair, got ({a}, {b})"))?;
    }
    let spec = SurfaceSpec::new(c, m.tolerance)?;
    let mesh = surface_mesh(&spec, m.x_range, m.y_range, m.resolution)?;
    let mut rows: Vec<Vec<String>> =
        mesh.points().map(|(p, s)| vec![s.symbol().to_string(), fmt(p.x), fmt(p.y), fmt(p.z)]).collect();
    let points: Vec<(f64, f64, f64, &str)> = mesh.points().map(|(p, s)| (p.x, p.y, p.z, s.symbol())).collect();
    let mut result = json!({
        "coupling": m.coupling,
        "nx": mesh.nx,
        "ny": mesh.ny,
        "point_count": mesh.point_count(),
        "rejected": mesh.rejected,
        "no_real_root": mesh.branch_mask.iter().filter(|&&b| b).count(),
        "points": points,
    });
    if m.per2 {
        check(m.per2_points >= 2, "mesh.per2_points", "must be at least 2")?;
        let (a, b) = m.per2_range;
        check(a.is_finite() && b.is_finite() && a < b, "mesh.per2_range", format!("must be an increasing pair, got ({a}, {b})"))?;
        let mut curve = Vec::new();
        for i in 0..m.per2_points {
            let x = a + (b - a) * i as f64 / (m.per2_points - 1) as f64;
            if (x - 0.5).abs() < PER2_EXCLUSION {
                continue;
            }
            let p = per2_point(x)?;
            let defect = p.forward().forward().dist(&p);
            rows.push(vec!["per2".into(), fmt(p.x), fmt(p.y), fmt(p.z)]);
            curve.push(json!({ "x": p.x, "y": p.y, "z": p.z, "period_two_defect": defect }));
        }
        result["per2"] = Value::Array(curve);
    }
    Ok(CommandOutput { result, table: Some(Table { header: vec!["kind", "x", "y", "z"], rows }) })
}

pub fn subshift(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let n = cfg.subshift.n;
    check((1..=MAX_COUNT_LENGTH).contains(&n), "subshift.n", format!("must lie in 1..={MAX_COUNT_LENGTH}, got {n}"))?;
    let s = SubshiftSpec::default();
    let counts = (1..=n).map(|i| s.counts(i)).collect::<Result<Vec<_>, _>>()?;
    let e = s.entropy();
    let last = counts[n - 1];
    let table = Table {
        header: vec!["n", "word_count", "periodic_count"],
        rows: counts.iter().map(|c| vec![c.n.to_string(), c.word_count.to_string(), c.periodic_count.to_string()]).collect(),
    };
    Ok(CommandOutput {
        result: json!({
            "n": n,
            "word_count": last.word_count,
            "periodic_count": last.periodic_count,
            "spectral_radius": e.spectral_radius,
            "entropy": e.spectral_radius.ln(),
            "transition": s.transition,
            "counts": to_value(&counts)?,
        }),
        table: Some(table),
    })
}
