//! The rectangle `T = (c, d) × (−c, c)` under `dγ₂ = e^{x²+y²} dx dy`,
//! whose first nontrivial Neumann eigenvalue 12 exceeds that of the ball
//! of equal measure.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::{hermite, hermite_neumann_nodes};
use crate::radialnd::mu1_ball;
use crate::rearrange::star_radius;
use crate::sl1d::solve_neumann;
use crate::weights::{RadialWeight, Weight1D};

/// Target eigenvalue `μ₁(T) = 2·(5+1)`.
pub const MU1_T: f64 = 12.0;
/// Allowed spread between the two factor eigenvalues of the double
/// eigenvalue.
pub const DOUBLE_EIGENVALUE_TOL: f64 = 2e-3 * MU1_T;
/// Required gap between `μ₁(B_{r_T})` and `μ₁(T)`.
pub const VERDICT_MARGIN: f64 = 1e-3 * MU1_T;

/// `χ(r) = γ₂(B_r) = π(e^{r²} − 1)`.
pub fn chi(r: f64) -> f64 {
    PI * (r * r).exp_m1()
}

/// `χ⁻¹(m) = √(log(1 + m/π))`.
pub fn chi_inv(m: f64) -> f64 {
    (m / PI).ln_1p().sqrt()
}

/// `k(r) = (2e^{r²} − 2) / (r² e^{r²} − e^{r²} + 1)`, the Rayleigh quotient
/// of the trial functions `x` and `y` on `B_r`.
pub fn k_bound(r: f64) -> f64 {
    let e = (r * r).exp();
    2.0 * (r * r).exp_m1() / (r * r * e - e + 1.0)
}

/// `k(χ⁻¹(2)) = 4 / ((π+2) log(1+2/π) − 2)`.
pub fn k_at_chi_inv_2() -> f64 {
    4.0 / ((PI + 2.0) * (2.0 / PI).ln_1p() - 2.0)
}

/// Antiderivative of `1 + x² + x⁴/2 + x⁶/6`.
fn taylor_primitive(x: f64) -> f64 {
    let s = x * x;
    x * (1.0 + s * (1.0 / 3.0 + s * (1.0 / 10.0 + s / 42.0)))
}

/// Lower bound of `γ₂(T)` from the degree-6 Taylor polynomial of `e^{t²}`.
pub fn taylor_lower_bound(c: f64, d: f64) -> f64 {
    (taylor_primitive(d) - taylor_primitive(c)) * 2.0 * taylor_primitive(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub n: usize,
    pub c: f64,
    pub d: f64,
    pub mu1_cd: f64,
    pub mu1_cc: f64,
    #[serde(rename = "mu1_T")]
    pub mu1_t: f64,
    pub double_eigenvalue: bool,
    /// `∫_c^d H₅ = (H₆(d) − H₆(c))/12`.
    pub h5_mean: f64,
    #[serde(rename = "gamma2_T")]
    pub gamma2_t: f64,
    pub taylor_lower_bound: f64,
    pub chi_inv_2: f64,
    #[serde(rename = "r_T")]
    pub r_t: f64,
    #[serde(rename = "k_rT")]
    pub k_rt: f64,
    pub k_at_chi_inv_2: f64,
    pub mu1_ball: f64,
    pub chain_ok: bool,
    pub verdict: bool,
}

fn step<T>(id: u8, name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Step {
        step: id,
        name,
        source: Box::new(e),
    })
}

/// Runs the full chain at resolution `n` (at least 1024).
pub fn run_counterexample(n: usize) -> Result<CounterexampleReport> {
    if n < 1024 {
        return Err(crate::error::invalid(format!(
            "resolution must be at least 1024, got {n}"
        )));
    }
    let (c, d) = step(1, "hermite nodes", hermite_neumann_nodes())?;
    let h5_mean = step(
        1,
        "hermite nodes",
        hermite(6, d).and_then(|hd| Ok((hd - hermite(6, c)?) / 12.0)),
    )?;

    let anti = Weight1D::anti_gaussian();
    let mu1_cd = step(2, "factor eigenvalues", solve_neumann(&anti, c, d, 1, n))?.eigenvalues[1];
    let mu1_cc = step(2, "factor eigenvalues", solve_neumann(&anti, -c, c, 1, n))?.eigenvalues[1];
    let mu1_t = mu1_cd.min(mu1_cc);

    let gamma2_t = step(
        3,
        "rectangle measure",
        anti.integral(c, d).and_then(|x| Ok(x * anti.integral(-c, c)?)),
    )?;
    let taylor = taylor_lower_bound(c, d);

    let rw = step(4, "ball radius", RadialWeight::radial_square(2))?;
    let r_t = step(4, "ball radius", star_radius(&rw, gamma2_t))?;

    let k_rt = k_bound(r_t);
    let k_chi = k_at_chi_inv_2();

    let mu1_b = step(6, "ball eigenvalue", mu1_ball(&rw, r_t, n))?;

    let chain_ok = mu1_b < k_rt && k_rt < k_chi && k_chi < MU1_T;
    Ok(CounterexampleReport {
        n,
        c,
        d,
        mu1_cd,
        mu1_cc,
        mu1_t,
        double_eigenvalue: (mu1_cd - mu1_cc).abs() <= DOUBLE_EIGENVALUE_TOL,
        h5_mean,
        gamma2_t,
        taylor_lower_bound: taylor,
        chi_inv_2: chi_inv(2.0),
        r_t,
        k_rt,
        k_at_chi_inv_2: k_chi,
        mu1_ball: mu1_b,
        chain_ok,
        verdict: mu1_b < mu1_t - VERDICT_MARGIN && chain_ok,
    })
}
