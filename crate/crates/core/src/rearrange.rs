//! Radial sets and piecewise-constant functions under the measure
//! `dγ_h = e^{h(|x|)} dx`, their rearrangements, and the radial trial
//! profile used to bound `μ₁` on a set by `μ₁` on the ball of equal measure.
//!
//! Every set is a finite union of annuli `{r_in < |x| < r_out}` and every
//! function is constant on each annulus, so distribution functions and
//! rearrangements reduce to sorting and measure bookkeeping.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numcore::{find_root, find_root_newton, integrate, panels_for};
use crate::radialnd::{mu1_ball, solve_radial, RadialProblem};
use crate::weights::RadialWeight;

/// Lebesgue volume `ω_N = π^{N/2} / Γ(N/2 + 1)` of the unit ball.
pub fn unit_ball_volume(dim: usize) -> f64 {
    let pi = std::f64::consts::PI;
    // Γ(N/2 + 1) by recursion from Γ(1) = 1 or Γ(1/2) = √π.
    let mut gamma = if dim.is_multiple_of(2) { 1.0 } else { pi.sqrt() };
    let mut x = if dim.is_multiple_of(2) { 1.0 } else { 0.5 };
    let target = dim as f64 / 2.0 + 1.0;
    while x < target - 0.25 {
        gamma *= x;
        x += 1.0;
    }
    pi.powf(dim as f64 / 2.0) / gamma
}

const PANELS_PER_UNIT: usize = 4096;

/// `γ_h` of the shell `{lo < |x| < hi}`.
pub fn shell_measure(rw: &RadialWeight, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let dim = rw.dim();
    let n = panels_for(hi - lo, PANELS_PER_UNIT, 64);
    let radial = integrate(|s| rw.radial_density(s), lo, hi, n).unwrap_or(f64::NAN);
    dim as f64 * unit_ball_volume(dim) * radial
}

/// `γ_h(B_r) = N ω_N ∫₀ʳ e^{h(s)} s^{N-1} ds`.
pub fn ball_measure(rw: &RadialWeight, r: f64) -> f64 {
    shell_measure(rw, 0.0, r.max(0.0))
}

/// Radius `r★` of the ball with `γ_h(B_{r★}) = mass`.
pub fn star_radius(rw: &RadialWeight, mass: f64) -> Result<f64> {
    if !(mass >= 0.0 && mass.is_finite()) {
        return Err(invalid(format!("mass must be nonnegative and finite, got {mass}")));
    }
    if mass == 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while ball_measure(rw, hi) < mass {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(invalid(format!("no ball of measure {mass}")));
        }
    }
    let c = rw.dim() as f64 * unit_ball_volume(rw.dim());
    find_root_newton(
        |r| Ok((ball_measure(rw, r) - mass, c * rw.radial_density(r))),
        0.0,
        hi,
        1e-15 * hi,
    )
}

/// Annulus `{r_in < |x| < r_out}`, optionally carrying a value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub r_in: f64,
    pub r_out: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

/// Sorted union of disjoint annuli in `ℝᴺ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnularSet {
    pub dim: usize,
    pub annuli: Vec<(f64, f64)>,
}

impl AnnularSet {
    pub fn new(dim: usize, annuli: Vec<(f64, f64)>) -> Result<Self> {
        if dim < 2 {
            return Err(invalid(format!("dimension must be at least 2, got {dim}")));
        }
        if annuli.is_empty() {
            return Err(invalid("annular set is empty"));
        }
        for &(lo, hi) in &annuli {
            if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
                return Err(invalid(format!("bad annulus ({lo}, {hi})")));
            }
        }
        if annuli.windows(2).any(|w| w[1].0 < w[0].1) {
            return Err(invalid("annuli must be sorted and disjoint"));
        }
        Ok(Self { dim, annuli })
    }

    /// The ball `B_r`.
    pub fn ball(dim: usize, r: f64) -> Result<Self> {
        Self::new(dim, vec![(0.0, r)])
    }

    pub fn from_cells(dim: usize, cells: &[CellSpec]) -> Result<Self> {
        Self::new(dim, cells.iter().map(|c| (c.r_in, c.r_out)).collect())
    }

    fn check_weight(&self, rw: &RadialWeight) -> Result<()> {
        if rw.dim() != self.dim {
            return Err(invalid(format!(
                "set lives in dimension {} but the weight in {}",
                self.dim,
                rw.dim()
            )));
        }
        Ok(())
    }

    pub fn cell_measures(&self, rw: &RadialWeight) -> Result<Vec<f64>> {
        self.check_weight(rw)?;
        Ok(self.annuli.iter().map(|&(lo, hi)| shell_measure(rw, lo, hi)).collect())
    }

    pub fn measure(&self, rw: &RadialWeight) -> Result<f64> {
        Ok(self.cell_measures(rw)?.iter().sum())
    }
}

/// Function constant on each annulus of its support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFunction {
    pub support: AnnularSet,
    pub values: Vec<f64>,
}

impl CellFunction {
    pub fn new(support: AnnularSet, values: Vec<f64>) -> Result<Self> {
        if values.len() != support.annuli.len() {
            return Err(invalid(format!(
                "{} values for {} cells",
                values.len(),
                support.annuli.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("cell values must be finite"));
        }
        Ok(Self { support, values })
    }

    pub fn from_cells(dim: usize, cells: &[CellSpec]) -> Result<Self> {
        let values = cells
            .iter()
            .enumerate()
            .map(|(i, c)| c.value.ok_or_else(|| invalid(format!("cell {i} has no value"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(AnnularSet::from_cells(dim, cells)?, values)
    }

    /// Cells as `{r_in, r_out, value}` records.
    pub fn to_cells(&self) -> Vec<CellSpec> {
        self.support
            .annuli
            .iter()
            .zip(&self.values)
            .map(|(&(r_in, r_out), &v)| CellSpec {
                r_in,
                r_out,
                value: Some(v),
            })
            .collect()
    }

    /// `∫ |u|^p dγ_h`.
    pub fn lp_integral(&self, rw: &RadialWeight, p: i32) -> Result<f64> {
        let masses = self.support.cell_measures(rw)?;
        Ok(self.values.iter().zip(&masses).map(|(v, m)| v.abs().powi(p) * m).sum())
    }
}

/// Distinct levels of `|u|` in decreasing order with the measure carried
/// by each level.
fn levels(u: &CellFunction, rw: &RadialWeight) -> Result<Vec<(f64, f64)>> {
    let masses = u.support.cell_measures(rw)?;
    let mut cells: Vec<(f64, f64)> = u.values.iter().map(|v| v.abs()).zip(masses).collect();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(cells.len());
    for (v, m) in cells {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += m,
            _ => out.push((v, m)),
        }
    }
    Ok(out)
}

/// `t ↦ m(t) = γ_h({|u| > t})`, a right-continuous nonincreasing staircase.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    /// Distinct values of `|u|`, decreasing.
    pub levels: Vec<f64>,
    /// `m` just below each level: `cumulative[j] = γ_h({|u| ≥ levels[j]})`.
    pub cumulative: Vec<f64>,
}

impl Distribution {
    pub fn eval(&self, t: f64) -> f64 {
        // number of levels strictly above t
        let above = self.levels.partition_point(|&v| v > t);
        if above == 0 {
            0.0
        } else {
            self.cumulative[above - 1]
        }
    }
}

pub fn distribution(u: &CellFunction, rw: &RadialWeight) -> Result<Distribution> {
    let lv = levels(u, rw)?;
    let mut total = 0.0;
    let mut cumulative = Vec::with_capacity(lv.len());
    for &(_, m) in &lv {
        total += m;
        cumulative.push(total);
    }
    Ok(Distribution {
        levels: lv.into_iter().map(|(v, _)| v).collect(),
        cumulative,
    })
}

/// Nonincreasing step function on `(0, γ_h(Ω)]`: `value[j]` on
/// `[breaks[j], breaks[j+1])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rearrangement {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl Rearrangement {
    pub fn total_measure(&self) -> f64 {
        *self.breaks.last().unwrap_or(&0.0)
    }

    /// `u*(s) = inf{t ≥ 0 : m(t) ≤ s}`.
    pub fn eval(&self, s: f64) -> f64 {
        let j = self.breaks.partition_point(|&b| b <= s);
        if j == 0 {
            // s < 0: outside the domain, nothing is below the top level
            self.values.first().copied().unwrap_or(0.0)
        } else if j > self.values.len() {
            0.0
        } else {
            self.values[j - 1]
        }
    }

    /// `∫ (u*)^p ds`.
    pub fn lp_integral(&self, p: i32) -> f64 {
        self.values
            .iter()
            .zip(self.breaks.windows(2))
            .map(|(v, b)| v.powi(p) * (b[1] - b[0]))
            .sum()
    }
}

/// `u*` of `|u|`.
pub fn decreasing_rearrangement(u: &CellFunction, rw: &RadialWeight) -> Result<Rearrangement> {
    let lv = levels(u, rw)?;
    let mut breaks = vec![0.0];
    let mut s = 0.0;
    for &(_, m) in &lv {
        s += m;
        breaks.push(s);
    }
    Ok(Rearrangement {
        breaks,
        values: lv.into_iter().map(|(v, _)| v).collect(),
    })
}

/// `u_*(s) = u*(γ_h(Ω) − s)`, stored as an increasing step function.
pub fn increasing_rearrangement(u: &CellFunction, rw: &RadialWeight) -> Result<Rearrangement> {
    let dec = decreasing_rearrangement(u, rw)?;
    let total = dec.total_measure();
    let mut breaks: Vec<f64> = dec.breaks.iter().rev().map(|b| total - b).collect();
    breaks[0] = 0.0;
    let values = dec.values.into_iter().rev().collect();
    Ok(Rearrangement { breaks, values })
}

/// `u★(x) = u*(γ_h(B_{|x|}))` on the ball `Ω★` of equal measure.
pub fn star_rearrangement(u: &CellFunction, rw: &RadialWeight) -> Result<CellFunction> {
    let dec = decreasing_rearrangement(u, rw)?;
    let mut annuli = Vec::with_capacity(dec.values.len());
    let mut inner = 0.0;
    for &s in &dec.breaks[1..] {
        let outer = star_radius(rw, s)?;
        annuli.push((inner, outer));
        inner = outer;
    }
    CellFunction::new(AnnularSet::new(u.support.dim, annuli)?, dec.values)
}

/// Both sides of the Hardy–Littlewood chain
/// `∫ u* v_* ≤ ∫ |uv| dγ_h ≤ ∫ u* v*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyLittlewoodReport {
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Exact integral of the product of two step functions over `(0, total)`.
fn product_integral(f: &Rearrangement, g: &Rearrangement) -> f64 {
    let mut cuts: Vec<f64> = f.breaks.iter().chain(&g.breaks).copied().collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let total = f.total_measure().min(g.total_measure());
    cuts.windows(2)
        .filter(|w| w[1] <= total && w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            f.eval(mid) * g.eval(mid) * (w[1] - w[0])
        })
        .sum()
}

pub const HL_TOL: f64 = 1e-12;

pub fn hardy_littlewood_check(u: &CellFunction, v: &CellFunction, rw: &RadialWeight) -> Result<HardyLittlewoodReport> {
    if u.support != v.support {
        return Err(Error::IncompatibleSupports(format!(
            "{} cells vs {} cells or differing radii",
            u.support.annuli.len(),
            v.support.annuli.len()
        )));
    }
    let masses = u.support.cell_measures(rw)?;
    let mid = u
        .values
        .iter()
        .zip(&v.values)
        .zip(&masses)
        .map(|((a, b), m)| (a * b).abs() * m)
        .sum::<f64>();
    let us = decreasing_rearrangement(u, rw)?;
    let rhs = product_integral(&us, &decreasing_rearrangement(v, rw)?);
    let lhs = product_integral(&us, &increasing_rearrangement(v, rw)?);
    // round-off scales with the size of the integrals
    let tol = HL_TOL * rhs.abs().max(1.0);
    Ok(HardyLittlewoodReport {
        lhs,
        mid,
        rhs,
        ok: lhs <= mid + tol && mid <= rhs + tol,
    })
}

/// Random partition of `(0, r_max)` into `1..=max_cells` adjacent cells,
/// possibly with gaps, carrying two random value vectors. Values are drawn
/// from a small grid half of the time so ties occur.
pub fn random_cell_pair<R: Rng>(
    rng: &mut R,
    dim: usize,
    max_cells: usize,
    r_max: f64,
) -> Result<(CellFunction, CellFunction)> {
    let cells = rng.gen_range(1..=max_cells.max(1));
    let mut cuts: Vec<f64> = (0..2 * cells).map(|_| rng.gen_range(0.0..r_max)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut annuli = Vec::with_capacity(cells);
    let adjacent = rng.gen_bool(0.5);
    let step = if adjacent { 1 } else { 2 };
    let mut i = 0;
    while i + 1 < cuts.len() {
        annuli.push((cuts[i], cuts[i + 1]));
        i += step;
    }
    if annuli.is_empty() {
        annuli.push((0.0, r_max));
    }
    let draw = |rng: &mut R| -> f64 {
        if rng.gen_bool(0.5) {
            rng.gen_range(-3..=3) as f64
        } else {
            rng.gen_range(-3.0..3.0)
        }
    };
    let set = AnnularSet::new(dim, annuli)?;
    let u: Vec<f64> = (0..set.annuli.len()).map(|_| draw(rng)).collect();
    let v: Vec<f64> = (0..set.annuli.len()).map(|_| draw(rng)).collect();
    Ok((CellFunction::new(set.clone(), u)?, CellFunction::new(set, v)?))
}

/// Random union of at most `max_annuli` disjoint annuli in `(0, r_max)`,
/// rescaled radially (by bisection on a common factor) to have
/// `γ_h`-measure `mass`.
pub fn random_annular_union<R: Rng>(
    rng: &mut R,
    rw: &RadialWeight,
    max_annuli: usize,
    r_max: f64,
    mass: f64,
) -> Result<AnnularSet> {
    let count = rng.gen_range(1..=max_annuli.max(1));
    let mut cuts: Vec<f64> = (0..2 * count).map(|_| rng.gen_range(0.0..r_max)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let shape: Vec<(f64, f64)> = cuts.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    if shape.is_empty() {
        return AnnularSet::ball(rw.dim(), star_radius(rw, mass)?);
    }
    let scaled = |s: f64| AnnularSet::new(rw.dim(), shape.iter().map(|&(a, b)| (a * s, b * s)).collect());
    let mut hi = 1.0;
    while scaled(hi)?.measure(rw)? < mass {
        hi *= 2.0;
    }
    let factor = find_root(
        |s| scaled(s).and_then(|set| set.measure(rw)).map_or(f64::NAN, |m| m - mass),
        1e-9,
        hi,
        1e-15 * hi,
    )?;
    scaled(factor)
}

/// Radial trial profile `G`: the first `k = 1` eigenfunction `w` on
/// `(0, r★)`, extended by the constant `w(r★)`, with
/// `N(r) = G′² + (N−1) G²/r²` and `D(r) = G²`.
#[derive(Debug, Clone)]
pub struct TrialProfile {
    pub r_star: f64,
    pub dim: usize,
    /// Nodes `0, Δ, …, r★`.
    pub nodes: Vec<f64>,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    /// `N` at the nodes; the value at `r = 0` is extrapolated.
    pub n_vals: Vec<f64>,
    /// Eigenvalue `ν₁(r★)` of the generating eigenfunction.
    pub eigenvalue: f64,
}

/// Relative slack allowed when checking monotonicity of `N` and `D`.
pub const PROFILE_TOL: f64 = 1e-10;

impl TrialProfile {
    fn locate(&self, r: f64) -> (usize, f64) {
        let dr = self.r_star / (self.nodes.len() - 1) as f64;
        let i = ((r / dr) as usize).min(self.nodes.len() - 2);
        (i, (r - self.nodes[i]) / dr)
    }

    pub fn g_at(&self, r: f64) -> f64 {
        if r >= self.r_star {
            return *self.g.last().unwrap();
        }
        let (i, t) = self.locate(r.max(0.0));
        self.g[i] * (1.0 - t) + self.g[i + 1] * t
    }

    pub fn n_at(&self, r: f64) -> f64 {
        if r >= self.r_star {
            let w = *self.g.last().unwrap();
            return (self.dim - 1) as f64 * w * w / (r * r);
        }
        let (i, t) = self.locate(r.max(0.0));
        self.n_vals[i] * (1.0 - t) + self.n_vals[i + 1] * t
    }

    pub fn d_at(&self, r: f64) -> f64 {
        let g = self.g_at(r);
        g * g
    }

    /// `∫_{lo<|x|<hi} f(|x|) dγ_h` with `f = N` or `D`, split at the profile
    /// nodes so each piece is smooth.
    fn shell_integral(&self, rw: &RadialWeight, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
        let dim = self.dim;
        let integrand = |r: f64| f(r) * rw.radial_density(r);
        let mut total = 0.0;
        let inner_hi = hi.min(self.r_star);
        if lo < inner_hi {
            let dr = self.r_star / (self.nodes.len() - 1) as f64;
            let cells = self.nodes.len() - 1;
            let first = ((lo / dr) as usize).min(cells - 1);
            for i in first..cells {
                let a = lo.max(self.nodes[i]);
                let b = inner_hi.min(self.nodes[i + 1]);
                if b > a {
                    total += integrate(integrand, a, b, 2)?;
                }
                if self.nodes[i + 1] >= inner_hi {
                    break;
                }
            }
        }
        let outer_lo = lo.max(self.r_star);
        if outer_lo < hi {
            total += integrate(integrand, outer_lo, hi, panels_for(hi - outer_lo, PANELS_PER_UNIT, 64))?;
        }
        Ok(dim as f64 * unit_ball_volume(dim) * total)
    }

    /// `(∫_Ω N dγ_h, ∫_Ω D dγ_h)`.
    pub fn integrals(&self, omega: &AnnularSet, rw: &RadialWeight) -> Result<(f64, f64)> {
        let mut num = 0.0;
        let mut den = 0.0;
        for &(lo, hi) in &omega.annuli {
            num += self.shell_integral(rw, lo, hi, |r| self.n_at(r))?;
            den += self.shell_integral(rw, lo, hi, |r| self.d_at(r))?;
        }
        Ok((num, den))
    }
}

pub fn trial_profile(rw: &RadialWeight, r_star: f64, n: usize) -> Result<TrialProfile> {
    let p = RadialProblem::new(rw.clone(), r_star, 1, n)?;
    let spec = solve_radial(&p, 1)?;
    let dr = p.spacing();
    let mut nodes = vec![0.0];
    nodes.extend_from_slice(&spec.nodes);
    let mut g = vec![0.0];
    g.extend_from_slice(&spec.eigenfunctions[0]);
    let last = g.len() - 1;
    let mut dg = vec![0.0; g.len()];
    for i in 1..last {
        dg[i] = (g[i + 1] - g[i - 1]) / (2.0 * dr);
    }
    dg[0] = (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * dr);
    // Neumann condition at r★
    dg[last] = 0.0;
    let n1 = (rw.dim() - 1) as f64;
    let mut n_vals: Vec<f64> = (0..g.len())
        .map(|i| {
            if i == 0 {
                0.0
            } else {
                dg[i] * dg[i] + n1 * g[i] * g[i] / (nodes[i] * nodes[i])
            }
        })
        .collect();
    n_vals[0] = 2.0 * n_vals[1] - n_vals[2];

    let scale = n_vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for i in 0..last {
        if n_vals[i + 1] - n_vals[i] >= PROFILE_TOL * scale && i > 0 {
            return Err(Error::ProfileMonotonicity {
                at: nodes[i + 1],
                what: "N(r) is not decreasing",
            });
        }
        if g[i + 1] < g[i] {
            return Err(Error::ProfileMonotonicity {
                at: nodes[i + 1],
                what: "D(r) is not nondecreasing",
            });
        }
    }
    Ok(TrialProfile {
        r_star,
        dim: rw.dim(),
        nodes,
        g,
        dg,
        n_vals,
        eigenvalue: spec.eigenvalues[0],
    })
}

/// Default profile resolution for [`rayleigh_bound`].
pub const PROFILE_INTERVALS: usize = 20_000;

/// Relative slack on the two measure comparisons.
pub const COMPARISON_TOL: f64 = 1e-9;
/// Relative slack on `bound ≤ μ₁(B_{r★})`, covering the different
/// discretisation errors of the quadrature and the eigensolver.
pub const BOUND_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayleighBoundReport {
    pub mass: f64,
    pub r_star: f64,
    pub bound: f64,
    pub mu1_star: f64,
    pub numerator: f64,
    pub numerator_star: f64,
    pub denominator: f64,
    pub denominator_star: f64,
    /// `∫_Ω N ≤ ∫_{Ω★} N`.
    pub numerator_cmp: bool,
    /// `∫_Ω D ≥ ∫_{Ω★} D`.
    pub denominator_cmp: bool,
    /// `bound ≤ μ₁(B_{r★})`.
    pub bound_ok: bool,
}

impl RayleighBoundReport {
    pub fn ok(&self) -> bool {
        self.numerator_cmp && self.denominator_cmp && self.bound_ok
    }
}

pub fn rayleigh_bound(omega: &AnnularSet, rw: &RadialWeight) -> Result<RayleighBoundReport> {
    rayleigh_bound_with(omega, rw, PROFILE_INTERVALS)
}

/// [`rayleigh_bound`] at an explicit profile resolution.
pub fn rayleigh_bound_with(omega: &AnnularSet, rw: &RadialWeight, n: usize) -> Result<RayleighBoundReport> {
    let mass = omega.measure(rw)?;
    let r_star = star_radius(rw, mass)?;
    let profile = trial_profile(rw, r_star, n)?;
    let (numerator, denominator) = profile.integrals(omega, rw)?;
    let ball = AnnularSet::ball(omega.dim, r_star)?;
    let (numerator_star, denominator_star) = profile.integrals(&ball, rw)?;
    let mu1_star = mu1_ball(rw, r_star, n)?;
    let bound = numerator / denominator;
    Ok(RayleighBoundReport {
        mass,
        r_star,
        bound,
        mu1_star,
        numerator,
        numerator_star,
        denominator,
        denominator_star,
        numerator_cmp: numerator <= numerator_star * (1.0 + COMPARISON_TOL),
        denominator_cmp: denominator >= denominator_star * (1.0 - COMPARISON_TOL),
        bound_ok: bound <= mu1_star * (1.0 + BOUND_TOL),
    })
}
