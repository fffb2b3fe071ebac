use fibtrace::spectrum::bands::{dirichlet_diagonal, lifted_dirichlet_count, sturm_count};
use fibtrace::spectrum::transfer::fibonacci;
use fibtrace::spectrum::{approximant_bands, half_trace_oracle, trace_sequence};
use fibtrace::Coupling;
use nalgebra::DMatrix;

const ALPHA: f64 = 0.618_033_988_749_894_8;

fn site_potential(m: usize, v: f64) -> f64 {
    let f = (m as f64 * ALPHA).fract();
    if f >= 1.0 - ALPHA {
        v
    } else {
        0.0
    }
}

/// Band edges of the period-p operator from the periodic and antiperiodic
/// eigenproblems.
fn oracle_bands(k: u32, v: f64) -> Vec<(f64, f64)> {
    let p = fibonacci(k) as usize;
    let mut edges = Vec::new();
    for phase in [1.0, -1.0] {
        let mut h = DMatrix::<f64>::zeros(p, p);
        for i in 0..p {
            h[(i, i)] = site_potential(i + 1, v);
            if i + 1 < p {
                h[(i, i + 1)] = 1.0;
                h[(i + 1, i)] = 1.0;
            }
        }
        if p == 1 {
            h[(0, 0)] += 2.0 * phase;
        } else if p == 2 {
            h[(0, 1)] += phase;
            h[(1, 0)] += phase;
        } else {
            h[(0, p - 1)] += phase;
            h[(p - 1, 0)] += phase;
        }
        edges.extend(h.symmetric_eigen().eigenvalues.iter().copied());
    }
    edges.sort_by(f64::total_cmp);
    edges.chunks(2).map(|c| (c[0], c[1])).collect()
}

fn dirichlet_eigs(k: u32, v: f64) -> Vec<f64> {
    let d = dirichlet_diagonal(k, v);
    let n = d.len();
    if n == 0 {
        return Vec::new();
    }
    let mut h = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = d[i];
        if i + 1 < n {
            h[(i, i + 1)] = 1.0;
            h[(i + 1, i)] = 1.0;
        }
    }
    let mut e: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

#[test]
fn bands_match_eigen_oracle() {
    for &v in &[0.3, 1.0, 4.0, 16.0, 64.0] {
        for k in 1..=11u32 {
            let got = approximant_bands(k as usize, Coupling::new(v).unwrap(), 1e-13).unwrap();
            let want = oracle_bands(k, v);
            assert_eq!(got.len(), want.len(), "V={v} k={k}: {:?} vs {:?}", got.intervals, want);
            for (g, w) in got.intervals.iter().zip(&want) {
                let scale = 1e-10 * (1.0 + v);
                assert!((g.0 - w.0).abs() < scale && (g.1 - w.1).abs() < scale, "V={v} k={k}: {g:?} vs {w:?}");
            }
        }
    }
}

#[test]
fn counts_match_eigen_oracle() {
    for &v in &[0.0, 1.0, 16.0, 128.0] {
        for k in [2u32, 5, 8, 11, 13] {
            let eigs = dirichlet_eigs(k, v);
            let d = dirichlet_diagonal(k, v);
            let n = 400;
            for i in 0..=n {
                let e = -2.6 + (5.2 + v) * i as f64 / n as f64;
                if eigs.iter().any(|m| (m - e).abs() < 1e-9) {
                    continue;
                }
                let want = eigs.iter().filter(|&&m| m < e).count();
                assert_eq!(sturm_count(e, &d), want, "sturm V={v} k={k} E={e}");
                assert_eq!(lifted_dirichlet_count(k, e, v), want, "lifted V={v} k={k} E={e}");
            }
        }
    }
}

#[test]
fn recursion_matches_products() {
    for &v in &[0.0, 0.1, 1.0] {
        for i in 0..60 {
            let e = -3.0 + 6.0 * i as f64 / 59.0;
            let s = trace_sequence(e, Coupling::new(v).unwrap(), 12).unwrap();
            for k in -1..=s.last_index() {
                let a = s.get(k).unwrap();
                let b = half_trace_oracle(k as i32, e, Coupling::new(v).unwrap()).unwrap();
                assert!((a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1.0), "V={v} E={e} k={k}: {a} vs {b}");
            }
        }
    }
}
