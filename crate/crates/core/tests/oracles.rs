use fibtrace::dimension::{box_dimension, cantor_set, EpsGrid};
use fibtrace::hyperbolic::singular_eigen;
use fibtrace::spectrum::spectrum_cover;
use fibtrace::subshift::{SubshiftSpec, TRANSITION};
use fibtrace::{Coupling, GOLDEN};

/// Admissible words by brute force over all 6ⁿ strings.
fn brute_words(n: u32) -> (u64, u64) {
    let a = TRANSITION;
    let total = 6u64.pow(n);
    let (mut words, mut periodic) = (0, 0);
    for code in 0..total {
        let w: Vec<usize> = (0..n).map(|i| ((code / 6u64.pow(i)) % 6) as usize).collect();
        if w.windows(2).all(|p| a[p[0]][p[1]] == 1) {
            words += 1;
            if a[w[n as usize - 1]][w[0]] == 1 {
                periodic += 1;
            }
        }
    }
    (words, periodic)
}

#[test]
fn subshift_counts_match_brute_force() {
    let s = SubshiftSpec::default();
    for n in 1..=8 {
        let c = s.counts(n).unwrap();
        assert_eq!((c.word_count, c.periodic_count), brute_words(n as u32), "n = {n}");
    }
}

#[test]
fn subshift_reference_counts() {
    let words = [6, 10, 14, 26, 38, 66, 102, 170, 270, 442, 710, 1154, 1862, 3018, 4878, 7898, 12774, 20674, 33446, 54122];
    let periodic = [0, 4, 0, 8, 10, 22, 28, 48, 72, 124, 198, 326, 520, 844, 1360, 2208, 3570, 5782, 9348, 15128];
    let s = SubshiftSpec::default();
    for n in 1..=20 {
        let c = s.counts(n).unwrap();
        assert_eq!(c.word_count, words[n - 1]);
        assert_eq!(c.periodic_count, periodic[n - 1]);
    }
}

#[test]
fn entropy_matches_characteristic_polynomial() {
    // Largest root of x⁶ − 2x⁴ − 2x − 1 by bisection.
    let p = |x: f64| x.powi(6) - 2.0 * x.powi(4) - 2.0 * x - 1.0;
    let (mut lo, mut hi) = (1.2, 2.0);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if p(m) > 0.0 {
            hi = m;
        } else {
            lo = m;
        }
    }
    assert!((lo - GOLDEN).abs() < 1e-12);
    let e = SubshiftSpec::default().entropy();
    assert!((e.spectral_radius - lo).abs() < 1e-10);
    assert!((e.entropy - lo.ln()).abs() < 1e-10);
    let s = SubshiftSpec::default();
    let ratio = (s.counts(20).unwrap().word_count as f64 / s.counts(19).unwrap().word_count as f64).ln();
    assert!((ratio - GOLDEN.ln()).abs() < 5e-4, "{ratio}");
}

#[test]
fn cantor_dimensions() {
    let g = EpsGrid::geometric(0.1, 1e-6, 0.5).unwrap();
    let third = box_dimension(&cantor_set(1.0 / 3.0, 10).unwrap(), &g).unwrap();
    assert!((third.value - 2f64.ln() / 3f64.ln()).abs() <= 0.02, "{third:?}");
    let quarter = box_dimension(&cantor_set(0.25, 10).unwrap(), &g).unwrap();
    assert!((quarter.value - 0.5).abs() <= 0.02, "{quarter:?}");
    let g4 = EpsGrid::geometric(0.1, 1e-6, 0.25).unwrap();
    let third4 = box_dimension(&cantor_set(1.0 / 3.0, 10).unwrap(), &g4).unwrap();
    assert!((third4.value - third.value).abs() <= 0.02);
}

#[test]
fn singular_eigenvalues_closed_form() {
    let e = singular_eigen();
    let s5 = 5f64.sqrt();
    // (x+1)(x²−3x+1) = x³ − 2x² − 2x + 1
    let expanded = [1.0, -3.0 + 1.0, 1.0 - 3.0, 1.0];
    assert_eq!(e.char_poly, [expanded[3], expanded[2], expanded[1]]);
    let (b, m, s) = e.eigenvalues;
    assert!((b - (3.0 + s5) / 2.0).abs() < 1e-10);
    assert!((m + 1.0).abs() < 1e-10);
    assert!((s - (3.0 - s5) / 2.0).abs() < 1e-10);
    assert!((b + s - 3.0).abs() < 1e-12 && (b * s - 1.0).abs() < 1e-12);
    for (lam, v) in [b, m, s].into_iter().zip(e.eigenvectors) {
        // (λ², λ, 1) up to scale
        let r = v[0] / (lam * lam);
        assert!((v[1] - r * lam).abs() < 1e-12 && (v[2] - r).abs() < 1e-12);
    }
}

#[test]
fn free_spectrum_is_the_interval() {
    let cover = spectrum_cover(Coupling::new(0.0).unwrap(), 10, 1e-3).unwrap();
    assert!((cover.measure() - 4.0).abs() <= 0.05, "{}", cover.measure());
    let (lo, hi) = cover.bounds().unwrap();
    assert!((lo + 2.0).abs() < 1e-9 && (hi - 2.0).abs() < 1e-9);
}
