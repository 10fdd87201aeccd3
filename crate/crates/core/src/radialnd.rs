//! Separated radial eigenproblems on the ball `B_R ⊂ ℝᴺ` with weight
//! `e^{h(|x|)}`.
//!
//! The angular index `k` enters only through `k̄ = k(k+N-2)`:
//!
//! ```text
//! -(e^h r^{N-1} f′)′ + k̄ e^h r^{N-3} f = μ e^h r^{N-1} f,   f′(R) = 0
//! ```
//!
//! with `f(0) = 0` for `k ≥ 1` and `f′(0) = 0` for `k = 0`. The grid has
//! nodes `r_i = iΔ`, `i = 1..n`, `Δ = R/n`; nothing is evaluated at `r = 0`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numcore::{integrate, tridiag_general_eigs};
use crate::weights::{admissible_radial, RadialWeight};

const ADMISSIBILITY_SAMPLES: usize = 512;
/// Relative tolerance of the Rayleigh cross-check in [`mu1_ball`].
pub const RAYLEIGH_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct RadialProblem {
    pub rw: RadialWeight,
    pub radius: f64,
    pub k: usize,
    pub n: usize,
}

impl RadialProblem {
    pub fn new(rw: RadialWeight, radius: f64, k: usize, n: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("ball radius must be positive, got {radius}")));
        }
        if n < 32 {
            return Err(invalid(format!("radial grid needs at least 32 intervals, got {n}")));
        }
        let report = admissible_radial(&rw, radius, ADMISSIBILITY_SAMPLES)?;
        if let Some(at) = report.first_violation {
            return Err(Error::WeightInadmissible { at });
        }
        Ok(Self { rw, radius, k, n })
    }

    /// `k̄ = k(k + N - 2)`.
    pub fn separation_constant(&self) -> f64 {
        (self.k * (self.k + self.rw.dim() - 2)) as f64
    }

    pub fn spacing(&self) -> f64 {
        self.radius / self.n as f64
    }

    /// Nodes `r_1, …, r_n = R`.
    pub fn nodes(&self) -> Vec<f64> {
        let dr = self.spacing();
        (1..=self.n).map(|i| i as f64 * dr).collect()
    }
}

/// Discrete pencil of a radial problem.
struct RadialSystem {
    nodes: Vec<f64>,
    /// Flux coefficient `e^h r^{N-1}` at faces `r_{i+1/2}`, `i = 0..n-1`.
    face: Vec<f64>,
    /// Potential `k̄ e^h r^{N-3} Δ` at nodes (half at `R`).
    potential: Vec<f64>,
    mass: Vec<f64>,
    dr: f64,
}

impl RadialSystem {
    fn build(p: &RadialProblem) -> Result<Self> {
        let n = p.n;
        let dr = p.spacing();
        let rw = &p.rw;
        let nodes = p.nodes();
        let face: Vec<f64> = (0..n).map(|i| rw.radial_density((i as f64 + 0.5) * dr)).collect();
        let kbar = p.separation_constant();
        let mut mass: Vec<f64> = nodes.iter().map(|&r| rw.radial_density(r) * dr).collect();
        let mut potential: Vec<f64> = nodes.iter().zip(&mass).map(|(&r, m)| kbar * m / (r * r)).collect();
        mass[n - 1] *= 0.5;
        potential[n - 1] *= 0.5;
        if p.k == 0 {
            // First control volume is [0, 3Δ/2]; the flux vanishes at the origin.
            mass[0] = integrate(|r| rw.radial_density(r), 0.0, 1.5 * dr, 64)?;
        }
        Ok(Self {
            nodes,
            face,
            potential,
            mass,
            dr,
        })
    }

    /// Stiffness matrix over nodes `1..n`. For `k ≥ 1` the face at `Δ/2`
    /// couples node 1 to the eliminated value `f(0) = 0`.
    fn stiffness(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        let n = self.nodes.len();
        let mut diag = self.potential.clone();
        let mut off = vec![0.0; n - 1];
        if k > 0 {
            diag[0] += self.face[0] / self.dr;
        }
        for i in 0..n - 1 {
            let c = self.face[i + 1] / self.dr;
            diag[i] += c;
            diag[i + 1] += c;
            off[i] = -c;
        }
        (diag, off)
    }

    /// Rayleigh quotient of `f` with face-midpoint quadrature for the
    /// gradient term and nodal quadrature for the potential and mass.
    fn rayleigh(&self, f: &[f64], k: usize) -> f64 {
        let n = f.len();
        let mut grad = 0.0;
        if k > 0 {
            grad += self.face[0] * f[0] * f[0] / self.dr;
        }
        for i in 0..n - 1 {
            let jump = f[i + 1] - f[i];
            grad += self.face[i + 1] * jump * jump / self.dr;
        }
        let pot: f64 = f.iter().zip(&self.potential).map(|(v, c)| c * v * v).sum();
        let norm: f64 = f.iter().zip(&self.mass).map(|(v, m)| m * v * v).sum();
        (grad + pot) / norm
    }
}

/// Ascending radial eigenvalues with eigenfunctions sampled at `r_1..r_n`,
/// normalised by `Σ f² e^h r^{N-1} Δ = 1` (lumped quadrature of
/// `∫₀ᴿ f² e^h r^{N-1} dr`). Every eigenfunction is positive at `r_1`.
#[derive(Debug, Clone)]
pub struct RadialSpectrum {
    pub problem: RadialProblem,
    pub nodes: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<Vec<f64>>,
}

impl RadialSpectrum {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,r");
        for j in 0..self.eigenfunctions.len() {
            out.push_str(&format!(",f{j}"));
        }
        out.push('\n');
        for (i, r) in self.nodes.iter().enumerate() {
            out.push_str(&format!("{},{}", i + 1, r));
            for f in &self.eigenfunctions {
                out.push_str(&format!(",{}", f[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// First `count` eigenpairs of the radial problem.
pub fn solve_radial(p: &RadialProblem, count: usize) -> Result<RadialSpectrum> {
    if count == 0 {
        return Err(invalid("at least one eigenpair must be requested"));
    }
    if 4 * count >= p.n {
        return Err(Error::InsufficientResolution {
            requested: count,
            intervals: p.n,
        });
    }
    let sys = RadialSystem::build(p)?;
    let (diag, off) = sys.stiffness(p.k);
    let pairs = tridiag_general_eigs(&diag, &off, &sys.mass, count)?;
    let mut eigenvalues = Vec::with_capacity(count);
    let mut eigenfunctions = Vec::with_capacity(count);
    for pair in pairs {
        let mut f = pair.vector;
        if f[0] < 0.0 {
            f.iter_mut().for_each(|v| *v = -*v);
        }
        eigenvalues.push(pair.value);
        eigenfunctions.push(f);
    }
    Ok(RadialSpectrum {
        problem: p.clone(),
        nodes: sys.nodes,
        eigenvalues,
        eigenfunctions,
    })
}

/// `ν₁(R)`: first eigenvalue of the `k = 1` problem.
pub fn nu1(rw: &RadialWeight, radius: f64, n: usize) -> Result<f64> {
    let p = RadialProblem::new(rw.clone(), radius, 1, n)?;
    Ok(solve_radial(&p, 1)?.eigenvalues[0])
}

/// `τ₁(R)`: first nonzero eigenvalue of the purely radial (`k = 0`) problem.
pub fn tau1(rw: &RadialWeight, radius: f64, n: usize) -> Result<f64> {
    let p = RadialProblem::new(rw.clone(), radius, 0, n)?;
    Ok(solve_radial(&p, 2)?.eigenvalues[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapReport {
    pub radius: f64,
    pub nu1: f64,
    pub tau1: f64,
    /// Discretisation error estimate: change of either eigenvalue between
    /// `n/2` and `n` intervals.
    pub tol: f64,
    pub gap_ok: bool,
}

/// Compares `ν₁(R)` with `τ₁(R)` at matched resolution.
pub fn spectral_gap(rw: &RadialWeight, radius: f64, n: usize) -> Result<GapReport> {
    let (nu, tau) = (nu1(rw, radius, n)?, tau1(rw, radius, n)?);
    let (nu_c, tau_c) = (nu1(rw, radius, n / 2)?, tau1(rw, radius, n / 2)?);
    let tol = (nu - nu_c).abs().max((tau - tau_c).abs());
    Ok(GapReport {
        radius,
        nu1: nu,
        tau1: tau,
        tol,
        gap_ok: nu < tau - 10.0 * tol,
    })
}

/// `μ₁(B_R; e^h)`, taken as `ν₁(R)` and cross-checked against the Rayleigh
/// quotient of its own eigenfunction.
pub fn mu1_ball(rw: &RadialWeight, radius: f64, n: usize) -> Result<f64> {
    let p = RadialProblem::new(rw.clone(), radius, 1, n)?;
    let spec = solve_radial(&p, 1)?;
    let value = spec.eigenvalues[0];
    let rayleigh = RadialSystem::build(&p)?.rayleigh(&spec.eigenfunctions[0], 1);
    if (value - rayleigh).abs() > RAYLEIGH_TOL * value {
        return Err(Error::SelfConsistency {
            eigenvalue: value,
            rayleigh,
        });
    }
    Ok(value)
}
