//! Physicists' Hermite polynomials `H_n` and the functions
//! `v_n(t) = H_n(t) e^{-t²}`.

use crate::error::{invalid, Result};
use crate::numcore::find_root;

pub const MAX_DEGREE: usize = 10;

/// `H_n` with exact integer coefficients (constant term first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermiteEval {
    pub n: usize,
    pub coeffs: Vec<i64>,
}

impl HermiteEval {
    /// Builds `H_n` from `H_{n+1} = 2t H_n − 2n H_{n−1}`, `H₀ = 1`, `H₁ = 2t`.
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_DEGREE {
            return Err(invalid(format!("Hermite degree must be at most {MAX_DEGREE}, got {n}")));
        }
        let mut prev: Vec<i64> = vec![1];
        if n == 0 {
            return Ok(Self { n, coeffs: prev });
        }
        let mut cur: Vec<i64> = vec![0, 2];
        for k in 1..n {
            let mut next = vec![0i64; k + 2];
            for (i, c) in cur.iter().enumerate() {
                next[i + 1] += 2 * c;
            }
            for (i, c) in prev.iter().enumerate() {
                next[i] -= 2 * k as i64 * c;
            }
            prev = cur;
            cur = next;
        }
        Ok(Self { n, coeffs: cur })
    }

    /// `H_n(t)` by Horner's rule on the integer coefficients.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c as f64)
    }

    /// `v_n(t) = H_n(t) e^{-t²}`.
    pub fn v(&self, t: f64) -> f64 {
        self.eval(t) * (-t * t).exp()
    }
}

/// `H_n(t)` via the three-term recurrence, `0 ≤ n ≤ 10`.
pub fn hermite(n: usize, t: f64) -> Result<f64> {
    if n > MAX_DEGREE {
        return Err(invalid(format!("Hermite degree must be at most {MAX_DEGREE}, got {n}")));
    }
    let (mut prev, mut cur) = (1.0, 2.0 * t);
    if n == 0 {
        return Ok(prev);
    }
    for k in 1..n {
        let next = 2.0 * t * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `v₅′(t) = −8 e^{-t²} (8t⁶ − 60t⁴ + 90t² − 15)`.
pub fn v5_prime(t: f64) -> f64 {
    -8.0 * (-t * t).exp() * sextic(t)
}

fn sextic(t: f64) -> f64 {
    let s = t * t;
    ((8.0 * s - 60.0) * s + 90.0) * s - 15.0
}

/// First two positive zeros `c < d` of `v₅′`, i.e. of `H₆`.
pub fn hermite_neumann_nodes() -> Result<(f64, f64)> {
    let c = find_root(sextic, 0.4, 0.5, 1e-14)?;
    let d = find_root(sextic, 1.3, 1.4, 1e-14)?;
    Ok((c, d))
}
