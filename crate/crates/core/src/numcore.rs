//! Shared numerical kernels: composite Simpson quadrature, bracketed root
//! finding, sampled derivatives and a generalized symmetric tridiagonal
//! eigensolver (Sturm bisection + inverse iteration).

use crate::error::{invalid, Error, Result};

/// Uniform grid on `[a, b]` with `n` intervals (`n + 1` nodes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(invalid(format!("grid endpoints must satisfy a < b, got ({a}, {b})")));
        }
        if n < 4 {
            return Err(invalid(format!("grid needs at least 4 intervals, got {n}")));
        }
        Ok(Self { a, b, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of intervals.
    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.n + 1
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n {
            self.b
        } else {
            self.a + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }

    /// Midpoint between node `i` and node `i + 1`.
    pub fn midpoint(&self, i: usize) -> f64 {
        self.a + (i as f64 + 0.5) * self.spacing()
    }
}

/// One eigenvalue with its (node-sampled) eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn integrate<F>(f: F, a: f64, b: f64, n: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if n < 2 || !n.is_multiple_of(2) {
        return Err(invalid(format!("Simpson needs an even panel count >= 2, got {n}")));
    }
    if a > b {
        return Err(invalid(format!("integration bounds reversed: {a} > {b}")));
    }
    if a == b {
        return Ok(0.0);
    }
    let h = (b - a) / n as f64;
    let eval = |t: f64| -> Result<f64> {
        let v = f(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteIntegrand { at: t })
        }
    };
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let t = a + i as f64 * h;
        if i % 2 == 1 {
            odd += eval(t)?;
        } else {
            even += eval(t)?;
        }
    }
    Ok(h / 3.0 * (eval(a)? + eval(b)? + 4.0 * odd + 2.0 * even))
}

/// Simpson panel count for an interval of the given length at a density of
/// `per_unit` panels per unit length (even, at least `min`).
pub fn panels_for(length: f64, per_unit: usize, min: usize) -> usize {
    let raw = (length.abs() * per_unit as f64).ceil() as usize;
    let n = raw.max(min).max(2);
    n + n % 2
}

/// Quadrature of uniformly spaced samples. Simpson for an even number of
/// intervals; an odd count closes the last three intervals with the 3/8 rule.
pub fn integrate_samples(values: &[f64], h: f64) -> f64 {
    let n = values.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (values[0] + values[1]),
        2 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        3 => 3.0 * h / 8.0 * (values[0] + 3.0 * values[1] + 3.0 * values[2] + values[3]),
        _ if n.is_multiple_of(2) => simpson_even(values, h),
        _ => {
            let head = &values[..n - 2];
            let tail = &values[n - 3..];
            simpson_even(head, h) + 3.0 * h / 8.0 * (tail[0] + 3.0 * tail[1] + 3.0 * tail[2] + tail[3])
        }
    }
}

fn simpson_even(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    let mut acc = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    h / 3.0 * acc
}

/// Bracketed bisection. Returns the midpoint of a final bracket of width at
/// most `tol` (or the narrowest bracket representable in `f64`).
pub fn find_root<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(invalid(format!("root tolerance must be positive, got {tol}")));
    }
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo * f_hi < 0.0) {
        return Err(Error::BracketInvalid { lo, hi, f_lo, f_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Safeguarded Newton iteration on a bracket: Newton steps that leave the
/// bracket (or stall) fall back to bisection. `f` returns `(value, slope)`.
pub(crate) fn find_root_newton<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let (f_lo, _) = f(lo)?;
    let (f_hi, _) = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo * f_hi < 0.0) {
        return Err(Error::BracketInvalid { lo, hi, f_lo, f_hi });
    }
    let increasing = f_hi > 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (fx, dfx) = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == increasing {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= tol || hi - lo <= tol {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Derivative of uniformly spaced samples: centered second-order differences
/// in the interior, one-sided fourth-order stencils at the two ends.
pub fn sampled_derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 5, "sampled_derivative needs at least five samples");
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    out[0] = left_slope(values, h);
    out[n - 1] = right_slope(values, h);
    out
}

/// One-sided O(h⁴) slope at the first sample.
pub fn left_slope(v: &[f64], h: f64) -> f64 {
    (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h)
}

/// One-sided O(h⁴) slope at the last sample.
pub fn right_slope(v: &[f64], h: f64) -> f64 {
    let n = v.len();
    (25.0 * v[n - 1] - 48.0 * v[n - 2] + 36.0 * v[n - 3] - 16.0 * v[n - 4] + 3.0 * v[n - 5]) / (12.0 * h)
}

/// Number of eigenvalues of the symmetric tridiagonal matrix `(diag, off)`
/// strictly below `x`, from the signs of the LDLᵀ pivots.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let pivmin = pivot_floor(off);
    let mut count = 0;
    let mut q = diag[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        q = (diag[i] - x) - off[i - 1] * off[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn pivot_floor(off: &[f64]) -> f64 {
    let emax = off.iter().fold(1.0_f64, |m, e| m.max(e * e));
    f64::MIN_POSITIVE * emax
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    let pad = 1e-12 * (hi - lo).abs().max(hi.abs()).max(lo.abs()).max(1.0);
    (lo - pad, hi + pad)
}

/// `index`-th smallest eigenvalue (0-based) by Sturm bisection.
fn bisect_eigenvalue(diag: &[f64], off: &[f64], index: usize, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        if sturm_count(diag, off, mid) <= index {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// LU factors of a (shifted) tridiagonal matrix with partial pivoting.
struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        let scale = diag.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        let floor = f64::EPSILON * scale;
        for v in d.iter_mut() {
            if v.abs() < floor {
                *v = if *v < 0.0 { -floor } else { floor };
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Fixed, sign-indefinite seed so that inverse iteration never starts
/// orthogonal to a symmetric or antisymmetric eigenvector.
fn seed_vector(n: usize) -> Vec<f64> {
    let golden = 0.618_033_988_749_894_9_f64;
    (0..n)
        .map(|i| {
            let frac = ((i as f64 + 1.0) * golden).fract();
            1.0 + 0.5 * (frac - 0.5)
        })
        .collect()
}

fn normalize_euclid(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// The `k` smallest eigenpairs of `A x = λ B x` with `A` symmetric
/// tridiagonal (`diag`, `off`) and `B` diagonal positive (`mass`).
///
/// The pencil is reduced to `B^{-1/2} A B^{-1/2}`; eigenvalues come from
/// Sturm bisection and vectors from inverse iteration. Each value is then
/// polished by the Rayleigh quotient of `A` written in difference form
/// (row sums plus squared jumps), which keeps relative accuracy for the
/// small end of stiffness-like spectra. Vectors are `B`-orthonormal.
pub fn tridiag_general_eigs(diag: &[f64], off: &[f64], mass: &[f64], k: usize) -> Result<Vec<EigenPair>> {
    let n = diag.len();
    if n == 0 {
        return Err(invalid("empty matrix"));
    }
    if off.len() + 1 != n || mass.len() != n {
        return Err(invalid(format!(
            "inconsistent tridiagonal sizes: diag {n}, offdiag {}, mass {}",
            off.len(),
            mass.len()
        )));
    }
    if k == 0 || k > n {
        return Err(invalid(format!("requested {k} eigenpairs from a {n}x{n} pencil")));
    }
    if let Some((index, &value)) = mass.iter().enumerate().find(|(_, m)| !(**m > 0.0)) {
        return Err(Error::MassNotPositive { index, value });
    }
    if diag.iter().chain(off).any(|v| !v.is_finite()) {
        return Err(invalid("non-finite matrix entry"));
    }

    let inv_sqrt: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let t_diag: Vec<f64> = diag.iter().zip(&inv_sqrt).map(|(d, s)| d * s * s).collect();
    let t_off: Vec<f64> = (0..n - 1).map(|i| off[i] * inv_sqrt[i] * inv_sqrt[i + 1]).collect();

    let (lo, hi) = gershgorin(&t_diag, &t_off);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let values: Vec<f64> = (0..k).map(|j| bisect_eigenvalue(&t_diag, &t_off, j, lo, hi)).collect();

    // Row sums of A for the difference-form quadratic form.
    let row_sum: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i > 0 { off[i - 1] } else { 0.0 };
            let right = if i + 1 < n { off[i] } else { 0.0 };
            diag[i] + left + right
        })
        .collect();

    let cluster_tol = 1e-9 * scale;
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(k);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (j, &lambda) in values.iter().enumerate() {
        // Nudge the shift off the eigenvalue so the factorization stays finite.
        let shift = lambda - 4.0 * f64::EPSILON * scale;
        let lu = TridiagLu::factor(&t_diag, &t_off, shift);
        let cluster: Vec<usize> = (0..j).filter(|&i| (values[i] - lambda).abs() <= cluster_tol).collect();
        let mut y = seed_vector(n);
        normalize_euclid(&mut y);
        for _ in 0..4 {
            lu.solve(&mut y);
            for &i in &cluster {
                let dot: f64 = y.iter().zip(&basis[i]).map(|(a, b)| a * b).sum();
                y.iter_mut().zip(&basis[i]).for_each(|(a, b)| *a -= dot * b);
            }
            normalize_euclid(&mut y);
        }
        basis.push(y.clone());

        let x: Vec<f64> = y.iter().zip(&inv_sqrt).map(|(v, s)| v * s).collect();
        let b_norm: f64 = x.iter().zip(mass).map(|(v, m)| m * v * v).sum::<f64>().sqrt();
        let x: Vec<f64> = x.into_iter().map(|v| v / b_norm).collect();

        let mut energy: f64 = x.iter().zip(&row_sum).map(|(v, s)| s * v * v).sum();
        for i in 0..n - 1 {
            let jump = x[i + 1] - x[i];
            energy -= off[i] * jump * jump;
        }
        let polished = if (energy - lambda).abs() <= 1e-6 * scale.max(lambda.abs()) {
            energy
        } else {
            lambda
        };
        pairs.push(EigenPair {
            value: polished,
            vector: x,
        });
    }
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(pairs)
}
