//! Sliding an interval of fixed weighted length along the axis.
//!
//! For an even weight `q` and a budget `d`, the interval `(a, b(a))` with
//! `∫_a^{b(a)} q = d` moves as `a` varies. Each sweep point records the
//! first nontrivial Neumann eigenvalue `μ₁(a)`, its derivative from the
//! boundary slopes of the flat Dirichlet problem, and a centred finite
//! difference of `μ₁` as a cross-check.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numcore::find_root;
use crate::sl1d::{boundary_slopes, solve_flat_dirichlet, solve_neumann};
use crate::weights::{Monotonicity, Weight1D, WeightKind};

/// Absolute tolerance on the sign of `dμ₁/da`.
pub const SIGN_TOL: f64 = 1e-8;
/// Relative tolerance of the mirror identity `μ₁(a) = μ₁(-b(a))`.
pub const SYMMETRY_TOL: f64 = 1e-5;
/// Relative finite-difference step, as a fraction of `b - a`.
pub const FD_STEP: f64 = 1e-4;

/// Left end `a₊` of the last admissible interval: `∫_{a₊}^{∞} q = d`.
/// Infinite when the weight has infinite mass to the right.
pub fn upper_limit(w: &Weight1D, d: f64) -> Result<f64> {
    check_budget(w, d)?;
    let top = w.cumulative_range().1;
    if top.is_infinite() {
        return Ok(f64::INFINITY);
    }
    w.inverse_cumulative(top - d)
}

fn check_budget(w: &Weight1D, d: f64) -> Result<()> {
    let c = w.total_mass().value();
    if !(d > 0.0 && d < c) {
        return Err(invalid(format!("budget d = {d} must lie in (0, {c})")));
    }
    Ok(())
}

/// `b(a)` with `∫_a^b q = d`.
pub fn partner_endpoint(w: &Weight1D, a: f64, d: f64) -> Result<f64> {
    check_budget(w, d)?;
    if !a.is_finite() {
        return Err(invalid(format!("left endpoint must be finite, got {a}")));
    }
    let a_plus = upper_limit(w, d)?;
    if a >= a_plus {
        return Err(Error::BudgetUnattainable { a, a_plus });
    }
    let target = w.cumulative(a)? + d;
    if target >= w.cumulative_range().1 {
        return Err(Error::BudgetUnattainable { a, a_plus });
    }
    w.inverse_cumulative(target)
}

/// `ā > 0` with `∫_{-ā}^{ā} q = d`, for even weights.
pub fn symmetric_halfwidth(w: &Weight1D, d: f64) -> Result<f64> {
    check_budget(w, d)?;
    if !w.is_even() {
        return Err(invalid("symmetric half-width needs an even weight"));
    }
    w.inverse_cumulative(0.5 * d)
}

/// `dμ₁/da = q(a) · [(w₁′(α))² − (w₁′(β))²]`, where `w₁` is the first flat
/// Dirichlet eigenfunction on `(α, β) = (F(a), F(a) + d)` with
/// `∫ w₁² m = 1`.
pub fn shape_derivative(w: &Weight1D, a: f64, d: f64, n: usize) -> Result<f64> {
    partner_endpoint(w, a, d)?;
    let alpha = w.cumulative(a)?;
    let spec = solve_flat_dirichlet(w, alpha, alpha + d, 1, n)?;
    let s = boundary_slopes(&spec)?;
    Ok(w.q(a) * (s.left * s.left - s.right * s.right))
}

/// `μ₁` of the weighted Neumann problem on `(a, b(a))`.
pub fn mu1_at(w: &Weight1D, a: f64, d: f64, n: usize) -> Result<f64> {
    let b = partner_endpoint(w, a, d)?;
    Ok(solve_neumann(w, a, b, 1, n)?.eigenvalues[1])
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub weight: Weight1D,
    pub d: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub steps: usize,
    pub n: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.weight.is_even() {
            return Err(invalid("sweeps need an even weight"));
        }
        check_budget(&self.weight, self.d)?;
        if self.steps < 3 {
            return Err(invalid(format!("steps must be at least 3, got {}", self.steps)));
        }
        if !(self.a_min < self.a_max) || !self.a_min.is_finite() {
            return Err(invalid(format!(
                "need a_min < a_max, got [{}, {}]",
                self.a_min, self.a_max
            )));
        }
        let a_plus = upper_limit(&self.weight, self.d)?;
        if self.a_max >= a_plus {
            return Err(Error::BudgetUnattainable { a: self.a_max, a_plus });
        }
        Ok(())
    }

    pub fn positions(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.a_min + (self.a_max - self.a_min) * i as f64 / last)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub a: f64,
    pub b: f64,
    pub mu1: f64,
    pub dmu1_analytic: f64,
    pub dmu1_fd: f64,
    /// `μ₁` on the mirrored interval `(-b, -a)`.
    pub mu1_mirror: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub points: Vec<SweepPoint>,
    pub symmetric_halfwidth: f64,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,mu1,dmu1_analytic,dmu1_fd\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.a, p.b, p.mu1, p.dmu1_analytic, p.dmu1_fd
            ));
        }
        out
    }

    /// Largest `|μ₁(a) − μ₁(−b(a))| / μ₁` over the sweep.
    pub fn symmetry_defect(&self) -> f64 {
        self.points
            .iter()
            .map(|p| (p.mu1 - p.mu1_mirror).abs() / p.mu1)
            .fold(0.0, f64::max)
    }

    /// Largest relative gap between analytic and finite-difference
    /// derivatives over points with `|dμ₁/da| > 1e-6 μ₁`.
    pub fn derivative_discrepancy(&self) -> f64 {
        self.points
            .iter()
            .filter(|p| p.dmu1_fd.abs() > 1e-6 * p.mu1)
            .map(|p| (p.dmu1_analytic - p.dmu1_fd).abs() / p.dmu1_fd.abs())
            .fold(0.0, f64::max)
    }
}

fn sweep_point(w: &Weight1D, a: f64, d: f64, n: usize) -> Result<SweepPoint> {
    let b = partner_endpoint(w, a, d)?;
    let mu1 = solve_neumann(w, a, b, 1, n)?.eigenvalues[1];
    let mu1_mirror = solve_neumann(w, -b, -a, 1, n)?.eigenvalues[1];
    let dmu1_analytic = shape_derivative(w, a, d, n)?;
    let delta = FD_STEP * (b - a);
    let dmu1_fd = (mu1_at(w, a + delta, d, n)? - mu1_at(w, a - delta, d, n)?) / (2.0 * delta);
    Ok(SweepPoint {
        a,
        b,
        mu1,
        dmu1_analytic,
        dmu1_fd,
        mu1_mirror,
    })
}

/// Evaluates every sweep position, in parallel, preserving order.
pub fn sweep_mu1(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let abar = symmetric_halfwidth(&cfg.weight, cfg.d)?;
    let points = cfg
        .positions()
        .into_par_iter()
        .map(|a| sweep_point(&cfg.weight, a, cfg.d, cfg.n).map_err(|e| Error::SweepPoint { a, source: Box::new(e) }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        config: cfg.clone(),
        points,
        symmetric_halfwidth: abar,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlidingReport {
    pub monotonicity: Monotonicity,
    pub symmetry_ok: bool,
    pub sign_ok: bool,
    pub strict_ok: bool,
    pub symmetric_halfwidth: f64,
    pub symmetry_defect: f64,
    pub derivative_discrepancy: f64,
}

/// Checks mirror symmetry, the derivative sign law and strictness on a
/// finished sweep.
pub fn check_sweep(result: &SweepResult) -> SlidingReport {
    let cfg = &result.config;
    let abar = result.symmetric_halfwidth;
    let reach = result
        .points
        .iter()
        .map(|p| p.a.abs().max(p.b.abs()))
        .fold(abar, f64::max);
    let class = cfg.weight.monotonicity_on_half_line(reach, 4096);
    let right: Vec<&SweepPoint> = result
        .points
        .iter()
        .filter(|p| p.a + abar > 1e-9 * (p.b - p.a))
        .collect();
    let symmetry_ok = result
        .points
        .iter()
        .all(|p| (p.mu1 - p.mu1_mirror).abs() <= SYMMETRY_TOL * p.mu1);
    let sign_ok = match class {
        Monotonicity::Increasing => right.iter().all(|p| p.dmu1_analytic >= -SIGN_TOL),
        Monotonicity::Decreasing => right.iter().all(|p| p.dmu1_analytic <= SIGN_TOL),
        Monotonicity::Constant => right.iter().all(|p| p.dmu1_analytic.abs() <= SIGN_TOL),
        Monotonicity::Mixed => false,
    };
    let strict_ok = sign_ok
        && class != Monotonicity::Constant
        && !right.is_empty()
        && right.iter().all(|p| p.dmu1_analytic.abs() > 10.0 * SIGN_TOL);
    SlidingReport {
        monotonicity: class,
        symmetry_ok,
        sign_ok,
        strict_ok,
        symmetric_halfwidth: abar,
        symmetry_defect: result.symmetry_defect(),
        derivative_discrepancy: result.derivative_discrepancy(),
    }
}

pub fn verify_sliding(cfg: &SweepConfig) -> Result<SlidingReport> {
    Ok(check_sweep(&sweep_mu1(cfg)?))
}

/// JSON-friendly summary of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub weight: WeightKind,
    pub d: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub steps: usize,
    pub n: usize,
    pub report: SlidingReport,
}

impl SweepSummary {
    pub fn new(result: &SweepResult) -> Self {
        let cfg = &result.config;
        Self {
            weight: cfg.weight.kind(),
            d: cfg.d,
            a_min: cfg.a_min,
            a_max: cfg.a_max,
            steps: cfg.steps,
            n: cfg.n,
            report: check_sweep(result),
        }
    }
}

/// Mass conservation defect `|F(b) − F(a) − d|` at a sweep point.
pub fn mass_defect(w: &Weight1D, p: &SweepPoint, d: f64) -> Result<f64> {
    Ok((w.integral(p.a, p.b)? - d).abs())
}

/// Position `a` where `μ₁` is stationary, located by bisection on the
/// analytic derivative over `[lo, hi]`.
pub fn stationary_position(w: &Weight1D, d: f64, lo: f64, hi: f64, n: usize, tol: f64) -> Result<f64> {
    find_root(|a| shape_derivative(w, a, d, n).unwrap_or(f64::NAN), lo, hi, tol)
}
