//! The three one-dimensional eigenproblems and the maps between them.
//!
//! * weighted Neumann: `-(u′q)′ = μ u q`, `u′(a) = u′(b) = 0`
//! * inverse-weight Dirichlet: `-(v′/q)′ = λ v/q`, `v(a) = v(b) = 0`
//! * flat Dirichlet in `y = F(x)`: `-w″ = k m(y) w`, `w(α) = w(β) = 0`
//!
//! All three use a vertex-centred flux discretisation with the weight
//! sampled at cell midpoints, which gives a symmetric tridiagonal stiffness
//! matrix and a diagonal mass matrix.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numcore::{integrate_samples, left_slope, right_slope, sampled_derivative, tridiag_general_eigs, Grid};
use crate::weights::{density_at, Weight1D, WeightKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Neumann,
    Dirichlet,
}

/// Which of the three problems produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    Neumann,
    DirichletInverseWeight,
    FlatDirichlet,
}

/// Ordered eigenvalues with node-sampled eigenfunctions.
///
/// Eigenfunctions are normalised to `∫ u² · weight = 1` by Simpson
/// quadrature over the nodes, where `weight` is `q`, `1/q` or `m`
/// according to the problem. Dirichlet eigenfunctions include the two zero
/// boundary samples.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub grid: Grid,
    pub weight_tag: WeightKind,
    pub problem: Problem,
    pub bc: Boundary,
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<Vec<f64>>,
    /// Weight of the normalisation integral at each node.
    pub weight: Vec<f64>,
}

impl Spectrum {
    pub fn nodes(&self) -> Vec<f64> {
        self.grid.nodes()
    }

    /// Writes `index,x,weight,u1,u2,...` (first column header renamed to `y`
    /// for the flat problem).
    pub fn to_csv(&self) -> String {
        let coord = if self.problem == Problem::FlatDirichlet {
            "y"
        } else {
            "x"
        };
        let mut out = format!("index,{coord},weight");
        for j in 0..self.eigenfunctions.len() {
            out.push_str(&format!(",u{}", j + usize::from(self.bc == Boundary::Dirichlet)));
        }
        out.push('\n');
        for i in 0..self.grid.node_count() {
            out.push_str(&format!("{},{},{}", i, self.grid.node(i), self.weight[i]));
            for f in &self.eigenfunctions {
                out.push_str(&format!(",{}", f[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Slopes of the first Dirichlet eigenfunction at the two endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundarySlopes {
    pub left: f64,
    pub right: f64,
}

fn check_interval(a: f64, b: f64, n: usize, k: usize) -> Result<Grid> {
    if n < 64 {
        return Err(invalid(format!("resolution must be at least 64 intervals, got {n}")));
    }
    if k == 0 {
        return Err(invalid("at least one eigenpair must be requested"));
    }
    if 4 * k >= n {
        return Err(Error::InsufficientResolution {
            requested: k,
            intervals: n,
        });
    }
    Grid::new(a, b, n)
}

/// Stiffness and mass of `-(p u′)′ = λ ρ u` on all nodes, with zero-flux
/// (half control volume) closure at both ends.
fn flux_system(grid: &Grid, p_mid: &[f64], rho: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = grid.intervals();
    let h = grid.spacing();
    let mut diag = vec![0.0; n + 1];
    let mut off = vec![0.0; n];
    for i in 0..n {
        let c = p_mid[i] / h;
        diag[i] += c;
        diag[i + 1] += c;
        off[i] = -c;
    }
    let mut mass: Vec<f64> = rho.iter().map(|r| r * h).collect();
    mass[0] *= 0.5;
    mass[n] *= 0.5;
    (diag, off, mass)
}

fn normalize(f: &mut [f64], weight: &[f64], h: f64) {
    let samples: Vec<f64> = f.iter().zip(weight).map(|(u, w)| u * u * w).collect();
    let norm = integrate_samples(&samples, h).sqrt();
    f.iter_mut().for_each(|u| *u /= norm);
}

/// Weighted Neumann problem `-(u′q)′ = μ u q` on `(a, b)`.
///
/// Returns `k + 1` eigenpairs, the first being `μ₀ = 0` with a constant
/// eigenfunction. Signs: ground state positive, excited states positive at
/// the left endpoint.
pub fn solve_neumann(w: &Weight1D, a: f64, b: f64, k: usize, n: usize) -> Result<Spectrum> {
    let grid = check_interval(a, b, n, k + 1)?;
    let p_mid: Vec<f64> = (0..n).map(|i| w.q(grid.midpoint(i))).collect();
    let rho: Vec<f64> = grid.nodes().iter().map(|&x| w.q(x)).collect();
    let (diag, off, mass) = flux_system(&grid, &p_mid, &rho);
    let pairs = tridiag_general_eigs(&diag, &off, &mass, k + 1)?;
    let h = grid.spacing();
    let mut eigenvalues = Vec::with_capacity(k + 1);
    let mut eigenfunctions = Vec::with_capacity(k + 1);
    for (j, pair) in pairs.into_iter().enumerate() {
        let mut f = pair.vector;
        normalize(&mut f, &rho, h);
        let flip = if j == 0 {
            f.iter().sum::<f64>() < 0.0
        } else {
            f[0] < 0.0
        };
        if flip {
            f.iter_mut().for_each(|u| *u = -*u);
        }
        eigenvalues.push(pair.value);
        eigenfunctions.push(f);
    }
    Ok(Spectrum {
        grid,
        weight_tag: w.kind(),
        problem: Problem::Neumann,
        bc: Boundary::Neumann,
        eigenvalues,
        eigenfunctions,
        weight: rho,
    })
}

/// Dirichlet problem `-(p v′)′ = λ ρ v` with boundary nodes eliminated.
fn dirichlet_pairs(grid: &Grid, p_mid: &[f64], rho: &[f64], k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = grid.intervals();
    let h = grid.spacing();
    let m = n - 1;
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m - 1];
    for i in 0..m {
        diag[i] = (p_mid[i] + p_mid[i + 1]) / h;
        if i + 1 < m {
            off[i] = -p_mid[i + 1] / h;
        }
    }
    let mass: Vec<f64> = (1..n).map(|i| rho[i] * h).collect();
    let pairs = tridiag_general_eigs(&diag, &off, &mass, k)?;
    let mut values = Vec::with_capacity(k);
    let mut funcs = Vec::with_capacity(k);
    for pair in pairs {
        let mut f = Vec::with_capacity(n + 1);
        f.push(0.0);
        f.extend_from_slice(&pair.vector);
        f.push(0.0);
        normalize(&mut f, rho, h);
        // positive left boundary slope (the ground state is then positive)
        if f[1] < 0.0 {
            f.iter_mut().for_each(|u| *u = -*u);
        }
        values.push(pair.value);
        funcs.push(f);
    }
    Ok((values, funcs))
}

/// Inverse-weight Dirichlet problem `-(v′/q)′ = λ v/q` on `(a, b)`; `k` pairs.
pub fn solve_dirichlet_inverse_weight(w: &Weight1D, a: f64, b: f64, k: usize, n: usize) -> Result<Spectrum> {
    let grid = check_interval(a, b, n, k)?;
    let p_mid: Vec<f64> = (0..n).map(|i| 1.0 / w.q(grid.midpoint(i))).collect();
    let rho: Vec<f64> = grid.nodes().iter().map(|&x| 1.0 / w.q(x)).collect();
    let (eigenvalues, eigenfunctions) = dirichlet_pairs(&grid, &p_mid, &rho, k)?;
    Ok(Spectrum {
        grid,
        weight_tag: w.kind(),
        problem: Problem::DirichletInverseWeight,
        bc: Boundary::Dirichlet,
        eigenvalues,
        eigenfunctions,
        weight: rho,
    })
}

/// Flat Dirichlet problem `-w″ = k m(y) w` on `(α, β)` with the transformed
/// density `m(y) = 1/q(F⁻¹(y))²`; `k` pairs.
pub fn solve_flat_dirichlet(w: &Weight1D, alpha: f64, beta: f64, k: usize, n: usize) -> Result<Spectrum> {
    let grid = check_interval(alpha, beta, n, k)?;
    let xs = w.inverse_cumulative_nodes(&grid.nodes())?;
    let density: Vec<f64> = xs.iter().map(|&x| density_at(w.q(x))).collect();
    let p_mid = vec![1.0; n];
    let (eigenvalues, eigenfunctions) = dirichlet_pairs(&grid, &p_mid, &density, k)?;
    Ok(Spectrum {
        grid,
        weight_tag: w.kind(),
        problem: Problem::FlatDirichlet,
        bc: Boundary::Dirichlet,
        eigenvalues,
        eigenfunctions,
        weight: density,
    })
}

/// `v = u₁′ q` from the first nontrivial Neumann eigenfunction.
pub fn neumann_to_dirichlet_map(spec: &Spectrum, w: &Weight1D) -> Result<Vec<f64>> {
    if spec.problem != Problem::Neumann || spec.eigenfunctions.len() < 2 {
        return Err(invalid("need a Neumann spectrum with at least two eigenpairs"));
    }
    let du = sampled_derivative(&spec.eigenfunctions[1], spec.grid.spacing());
    Ok(spec.nodes().iter().zip(du).map(|(&x, d)| d * w.q(x)).collect())
}

/// `u = -v₁′ / (λ₁ q)` from the first inverse-weight Dirichlet eigenpair.
pub fn dirichlet_to_neumann_map(spec: &Spectrum, w: &Weight1D) -> Result<Vec<f64>> {
    if spec.problem != Problem::DirichletInverseWeight {
        return Err(invalid("need an inverse-weight Dirichlet spectrum"));
    }
    let lambda = spec.eigenvalues[0];
    if !(lambda > 1e-12) {
        return Err(Error::DegenerateEigenvalue { value: lambda });
    }
    let dv = sampled_derivative(&spec.eigenfunctions[0], spec.grid.spacing());
    Ok(spec
        .nodes()
        .iter()
        .zip(dv)
        .map(|(&x, d)| -d / (lambda * w.q(x)))
        .collect())
}

/// One-sided fourth-order slopes of the first Dirichlet eigenfunction.
pub fn boundary_slopes(spec: &Spectrum) -> Result<BoundarySlopes> {
    if spec.bc != Boundary::Dirichlet {
        return Err(invalid("boundary slopes need a Dirichlet spectrum"));
    }
    let f = &spec.eigenfunctions[0];
    let h = spec.grid.spacing();
    Ok(BoundarySlopes {
        left: left_slope(f, h),
        right: right_slope(f, h),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointOrder {
    LeftGeRight,
    RightGeLeft,
    Equal,
}

/// Compares `|u₁(a)|` with `|u₁(b)|` for the first nontrivial Neumann
/// eigenfunction; relative band `1e-6` counts as equal.
pub fn endpoint_comparison(w: &Weight1D, a: f64, b: f64, n: usize) -> Result<EndpointOrder> {
    if !w.is_even() {
        return Err(invalid("endpoint comparison needs an even weight"));
    }
    if !(a + b > 0.0) {
        return Err(invalid(format!(
            "endpoint comparison needs a + b > 0, got a = {a}, b = {b}"
        )));
    }
    let spec = solve_neumann(w, a, b, 1, n)?;
    let u = &spec.eigenfunctions[1];
    let (left, right) = (u[0].abs(), u[u.len() - 1].abs());
    let band = 1e-6 * left.max(right);
    Ok(if (left - right).abs() <= band {
        EndpointOrder::Equal
    } else if left > right {
        EndpointOrder::LeftGeRight
    } else {
        EndpointOrder::RightGeLeft
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const C: f64 = 0.436_077_411_927_616_5;
    const D: f64 = 1.335_849_074_013_697;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn neumann_cosine_mode() {
        let w = Weight1D::constant(1.0).unwrap();
        let s = solve_neumann(&w, 0.0, 1.0, 1, 2000).unwrap();
        assert!(rel(s.eigenvalues[1], PI * PI) < 1e-4);
        assert!(s.eigenvalues[0].abs() < 1e-8 * s.eigenvalues[1]);
        let u0 = &s.eigenfunctions[0];
        let spread =
            u0.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - u0.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1e-6 * u0[0].abs());
    }

    #[test]
    fn neumann_hermite_interval() {
        let w = Weight1D::anti_gaussian();
        let s = solve_neumann(&w, C, D, 1, 4096).unwrap();
        assert!(rel(s.eigenvalues[1], 12.0) < 1e-3);
        // -u″ + x u′ = 3u has the cubic He₃ on (-1, 1)
        let g = Weight1D::gaussian();
        let s = solve_neumann(&g, -1.0, 1.0, 1, 2000).unwrap();
        assert!(rel(s.eigenvalues[1], 3.0) < 1e-5);
    }

    #[test]
    fn neumann_rejects_coarse_grid() {
        let w = Weight1D::constant(1.0).unwrap();
        assert!(matches!(
            solve_neumann(&w, 0.0, 1.0, 20, 64),
            Err(Error::InsufficientResolution { .. })
        ));
        assert!(solve_neumann(&w, 0.0, 1.0, 1, 32).is_err());
    }

    #[test]
    fn dirichlet_inverse_weight_examples() {
        let w = Weight1D::constant(1.0).unwrap();
        let s = solve_dirichlet_inverse_weight(&w, 0.0, 1.0, 2, 2000).unwrap();
        assert!(rel(s.eigenvalues[0], PI * PI) < 1e-5);
        assert!(rel(s.eigenvalues[1], 4.0 * PI * PI) < 1e-5);
        let anti = Weight1D::anti_gaussian();
        let s = solve_dirichlet_inverse_weight(&anti, C, D, 1, 4096).unwrap();
        assert!(rel(s.eigenvalues[0], 12.0) < 1e-3);
        let first = &s.eigenfunctions[0];
        assert!(first[1..first.len() - 1].iter().all(|&v| v > 0.0));
    }

    #[test]
    fn flat_dirichlet_examples() {
        let w = Weight1D::constant(1.0).unwrap();
        let s = solve_flat_dirichlet(&w, 0.0, 1.0, 2, 2000).unwrap();
        assert!(rel(s.eigenvalues[0], PI * PI) < 1e-5);
        assert!(rel(s.eigenvalues[1], 4.0 * PI * PI) < 1e-5);
    }

    #[test]
    fn lemma_one_gaussian() {
        let g = Weight1D::gaussian();
        let n = 2000;
        let mu = solve_neumann(&g, -1.0, 1.0, 3, n).unwrap();
        let lam = solve_dirichlet_inverse_weight(&g, -1.0, 1.0, 3, n).unwrap();
        let (alpha, beta) = (g.cumulative(-1.0).unwrap(), g.cumulative(1.0).unwrap());
        let kk = solve_flat_dirichlet(&g, alpha, beta, 3, n).unwrap();
        for j in 0..3 {
            assert!(rel(lam.eigenvalues[j], mu.eigenvalues[j + 1]) < 1e-5);
            assert!(rel(kk.eigenvalues[j], lam.eigenvalues[j]) < 1e-5);
        }
    }

    #[test]
    fn richardson_isospectral_gaussian() {
        let g = Weight1D::gaussian();
        let (alpha, beta) = (g.cumulative(-1.0).unwrap(), g.cumulative(1.0).unwrap());
        let rich = |f: &dyn Fn(usize) -> f64, n: usize| (4.0 * f(2 * n) - f(n)) / 3.0;
        let mu = |n: usize| solve_neumann(&g, -1.0, 1.0, 1, n).unwrap().eigenvalues[1];
        let k1 = |n: usize| solve_flat_dirichlet(&g, alpha, beta, 1, n).unwrap().eigenvalues[0];
        let (m, k) = (rich(&mu, 1000), rich(&k1, 1000));
        assert!(rel(m, k) < 1e-6, "{m} vs {k}");
        assert!(rel(m, 3.0) < 1e-6);
    }

    #[test]
    fn neumann_to_dirichlet_cosine() {
        let w = Weight1D::constant(1.0).unwrap();
        let s = solve_neumann(&w, 0.0, 1.0, 1, 2000).unwrap();
        let v = neumann_to_dirichlet_map(&s, &w).unwrap();
        let xs = s.nodes();
        // u₁ = √2 cos(πx) ⇒ v = -√2 π sin(πx)
        for (i, &x) in xs.iter().enumerate().step_by(97) {
            let exact = -(2f64).sqrt() * PI * (PI * x).sin();
            assert!((v[i] - exact).abs() < 1e-4, "x={x}: {} vs {exact}", v[i]);
        }
        assert!(v[0].abs() < 1e-5 && v[xs.len() - 1].abs() < 1e-5);
    }

    #[test]
    fn neumann_to_dirichlet_is_an_eigenfunction() {
        // residual of v in the discrete inverse-weight operator at λ = μ₁
        let g = Weight1D::gaussian();
        let n = 4000;
        let s = solve_neumann(&g, -1.0, 1.0, 1, n).unwrap();
        let v = neumann_to_dirichlet_map(&s, &g).unwrap();
        let mu = s.eigenvalues[1];
        let h = s.grid.spacing();
        let xs = s.nodes();
        let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs())) * mu / g.q(0.0);
        let mut res = 0.0_f64;
        for i in 3..n - 2 {
            let pl = 1.0 / g.q(s.grid.midpoint(i - 1));
            let pr = 1.0 / g.q(s.grid.midpoint(i));
            let lhs = -(pr * (v[i + 1] - v[i]) - pl * (v[i] - v[i - 1])) / (h * h);
            res = res.max((lhs - mu * v[i] / g.q(xs[i])).abs());
        }
        assert!(res / scale < 1e-3, "relative residual {}", res / scale);
    }

    #[test]
    fn neumann_to_dirichlet_endpoints_vanish_anti_gaussian() {
        let w = Weight1D::anti_gaussian();
        let s = solve_neumann(&w, C, D, 1, 8192).unwrap();
        let v = neumann_to_dirichlet_map(&s, &w).unwrap();
        assert!(v[0].abs() < 1e-6, "{}", v[0]);
        assert!(v[v.len() - 1].abs() < 1e-6, "{}", v[v.len() - 1]);
    }

    #[test]
    fn dirichlet_to_neumann_cosine_shape() {
        let w = Weight1D::constant(1.0).unwrap();
        let s = solve_dirichlet_inverse_weight(&w, 0.0, 1.0, 1, 2000).unwrap();
        let u = dirichlet_to_neumann_map(&s, &w).unwrap();
        let h = s.grid.spacing();
        let du = sampled_derivative(&u, h);
        // second difference of a sampled derivative: stencil switch at the ends costs O(h)
        let peak = du.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        assert!(du[0].abs() < 1e-3 * peak && du[du.len() - 1].abs() < 1e-3 * peak);
        // u ∝ cos(πx): v₁ = √2 sin(πx) ⇒ u = -√2 cos(πx)/π
        for (i, &x) in s.nodes().iter().enumerate().step_by(101) {
            let exact = -(2f64).sqrt() * (PI * x).cos() / PI;
            assert!((u[i] - exact).abs() < 1e-5);
        }
    }

    #[test]
    fn round_trip_gaussian() {
        let g = Weight1D::gaussian();
        let n = 4000;
        let (a, b) = (-0.5, 1.5);
        let s = solve_neumann(&g, a, b, 1, n).unwrap();
        let v = neumann_to_dirichlet_map(&s, &g).unwrap();
        let d = solve_dirichlet_inverse_weight(&g, a, b, 1, n).unwrap();
        let u_back = dirichlet_to_neumann_map(&d, &g).unwrap();
        let u1 = &s.eigenfunctions[1];
        // rescale to compare up to sign and normalisation
        let scale = u1[0] / u_back[0];
        let err = u1
            .iter()
            .zip(&u_back)
            .map(|(x, y)| (x - scale * y).abs())
            .fold(0.0, f64::max);
        let sup = u1.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        assert!(err / sup < 1e-3, "{}", err / sup);
        // v is proportional to the Dirichlet eigenfunction as well
        let vd = &d.eigenfunctions[0];
        let mid = n / 2;
        let ratio = v[mid] / vd[mid];
        let err = v.iter().zip(vd).map(|(x, y)| (x - ratio * y).abs()).fold(0.0, f64::max);
        let vsup = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        assert!(err / vsup < 1e-3);
        // zero weighted mean
        let xs = s.nodes();
        let samples: Vec<f64> = u_back.iter().zip(&xs).map(|(u, &x)| u * g.q(x)).collect();
        assert!(integrate_samples(&samples, s.grid.spacing()).abs() < 1e-6);
    }

    #[test]
    fn degenerate_eigenvalue_rejected() {
        let g = Weight1D::gaussian();
        let s = solve_neumann(&g, -1.0, 1.0, 1, 200).unwrap();
        assert!(dirichlet_to_neumann_map(&s, &g).is_err());
    }

    #[test]
    fn sine_mode_slopes() {
        let w = Weight1D::constant(1.0).unwrap();
        let s = solve_flat_dirichlet(&w, 0.0, 1.0, 1, 2000).unwrap();
        let slopes = boundary_slopes(&s).unwrap();
        let exact = (2f64).sqrt() * PI;
        assert!(rel(slopes.left, exact) < 1e-5);
        assert!(rel(-slopes.right, exact) < 1e-5);
    }

    #[test]
    fn slope_law_directions() {
        let n = 4000;
        let anti = Weight1D::anti_gaussian();
        let s = solve_flat_dirichlet(&anti, -0.3, 0.9, 1, n).unwrap();
        let sl = boundary_slopes(&s).unwrap();
        assert!(sl.left > 0.0 && sl.right < 0.0);
        assert!(-sl.right < sl.left);
        let g = Weight1D::gaussian();
        let s = solve_flat_dirichlet(&g, -0.3, 0.9, 1, n).unwrap();
        let sl = boundary_slopes(&s).unwrap();
        assert!(-sl.right > sl.left);
    }

    #[test]
    fn endpoint_order_examples() {
        let n = 2000;
        assert_eq!(
            endpoint_comparison(&Weight1D::anti_gaussian(), 0.0, 1.0, n).unwrap(),
            EndpointOrder::LeftGeRight
        );
        assert_eq!(
            endpoint_comparison(&Weight1D::gaussian(), 0.0, 1.0, n).unwrap(),
            EndpointOrder::RightGeLeft
        );
        assert_eq!(
            endpoint_comparison(&Weight1D::constant(1.0).unwrap(), 0.0, 1.0, n).unwrap(),
            EndpointOrder::Equal
        );
    }

    #[test]
    fn csv_header() {
        let w = Weight1D::constant(1.0).unwrap();
        let s = solve_neumann(&w, 0.0, 1.0, 2, 64).unwrap();
        let csv = s.to_csv();
        assert!(csv.starts_with("index,x,weight,u0,u1,u2\n"));
        assert_eq!(csv.lines().count(), 66);
    }
}
