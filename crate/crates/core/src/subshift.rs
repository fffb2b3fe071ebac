//! The six-symbol topological Markov chain coding the non-wandering set.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Transition matrix; row a, column b is 1 when b may follow a.
/// Symbols are 1-based in words and 0-based here.
pub const TRANSITION: [[u8; 6]; 6] = [
    [0, 0, 0, 1, 1, 1],
    [0, 0, 1, 0, 1, 1],
    [0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 1],
    [1, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0],
];

pub const MAX_COUNT_LENGTH: usize = 20;

type IntMat = [[u64; 6]; 6];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubshiftSpec {
    pub transition: [[u8; 6]; 6],
}

impl Default for SubshiftSpec {
    fn default() -> Self {
        SubshiftSpec { transition: TRANSITION }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubshiftCounts {
    pub n: usize,
    pub word_count: u64,
    pub periodic_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubshiftEntropy {
    pub spectral_radius: f64,
    pub entropy: f64,
    pub iterations: usize,
}

fn mat_mul(a: &IntMat, b: &IntMat) -> IntMat {
    let mut c = [[0u64; 6]; 6];
    for i in 0..6 {
        for k in 0..6 {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..6 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

impl SubshiftSpec {
    pub fn new(transition: [[u8; 6]; 6]) -> Result<Self> {
        if transition.iter().flatten().any(|&e| e > 1) {
            return domain("transition entries must be 0 or 1");
        }
        for i in 0..6 {
            if transition[i].iter().all(|&e| e == 0) {
                return domain(format!("row {} of the transition matrix is zero", i + 1));
            }
            if transition.iter().all(|r| r[i] == 0) {
                return domain(format!("column {} of the transition matrix is zero", i + 1));
            }
        }
        Ok(SubshiftSpec { transition })
    }

    fn int_matrix(&self) -> IntMat {
        let mut m = [[0u64; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                m[i][j] = self.transition[i][j] as u64;
            }
        }
        m
    }

    /// Exact integer power of the transition matrix.
    pub fn matrix_power(&self, n: usize) -> [[u64; 6]; 6] {
        let mut r = [[0u64; 6]; 6];
        for (i, row) in r.iter_mut().enumerate() {
            row[i] = 1;
        }
        let mut base = self.int_matrix();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                r = mat_mul(&r, &base);
            }
            base = mat_mul(&base, &base);
            e >>= 1;
        }
        r
    }

    /// Whether every adjacent pair of the word is an allowed transition.
    pub fn admissible(&self, word: &[u8]) -> Result<bool> {
        if word.is_empty() {
            return domain("word must be nonempty");
        }
        if let Some(&s) = word.iter().find(|&&s| !(1..=6).contains(&s)) {
            return domain(format!("symbol {s} outside the alphabet 1..6"));
        }
        Ok(word
            .windows(2)
            .all(|w| self.transition[(w[0] - 1) as usize][(w[1] - 1) as usize] == 1))
    }

    /// Word and periodic-point counts from matrix powers.
    pub fn counts(&self, n: usize) -> Result<SubshiftCounts> {
        if !(1..=MAX_COUNT_LENGTH).contains(&n) {
            return domain(format!("length must lie in 1..={MAX_COUNT_LENGTH}, got {n}"));
        }
        let words = self.matrix_power(n - 1).iter().flatten().sum();
        let an = self.matrix_power(n);
        let periodic = (0..6).map(|i| an[i][i]).sum();
        Ok(SubshiftCounts { n, word_count: words, periodic_count: periodic })
    }

    /// Counts by walking every admissible word; exponential, for validation.
    pub fn enumerate_counts(&self, n: usize) -> Result<SubshiftCounts> {
        if !(1..=MAX_COUNT_LENGTH).contains(&n) {
            return domain(format!("length must lie in 1..={MAX_COUNT_LENGTH}, got {n}"));
        }
        let mut words = 0;
        let mut periodic = 0;
        let mut stack: Vec<(usize, usize, usize)> = (0..6).map(|s| (s, s, 1)).collect();
        while let Some((first, last, len)) = stack.pop() {
            if len == n {
                words += 1;
                if self.transition[last][first] == 1 {
                    periodic += 1;
                }
                continue;
            }
            for b in 0..6 {
                if self.transition[last][b] == 1 {
                    stack.push((first, b, len + 1));
                }
            }
        }
        Ok(SubshiftCounts { n, word_count: words, periodic_count: periodic })
    }

    /// Spectral radius by power iteration and its logarithm.
    pub fn entropy(&self) -> SubshiftEntropy {
        let m = self.int_matrix();
        let mut v = [1.0f64; 6];
        let mut rho = 0.0;
        let mut iterations = 0;
        for it in 1..=10_000 {
            let mut w = [0.0; 6];
            for i in 0..6 {
                for j in 0..6 {
                    w[i] += m[i][j] as f64 * v[j];
                }
            }
            let sw: f64 = w.iter().sum();
            let sv: f64 = v.iter().sum();
            let next = sw / sv;
            for x in w.iter_mut() {
                *x /= sw;
            }
            v = w;
            iterations = it;
            let done = (next - rho).abs() <= 1e-14 * next;
            rho = next;
            if done {
                break;
            }
        }
        SubshiftEntropy { spectral_radius: rho, entropy: rho.ln(), iterations }
    }
}
