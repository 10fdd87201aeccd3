//! One-dimensional weights `q` and radial exponents `h`.
//!
//! A [`Weight1D`] carries the cumulative transform `F(x) = ∫₀ˣ q`, its
//! inverse, and the transformed density `m(y) = 1 / q(F⁻¹(y))²` that turns
//! the inverse-weight Dirichlet problem into a flat one. A [`RadialWeight`]
//! is the exponent profile of the radial weight `e^{h(|x|)}` in dimension `N`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numcore::{find_root_newton, integrate, panels_for};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Catalog tag of a weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    Constant {
        c0: f64,
    },
    /// `e^{-t²/2}`
    Gaussian,
    /// `e^{t²}`
    AntiGaussian,
    /// `h(r) = r²`
    RadialSquare,
    /// `h ≡ 0`
    RadialZero,
    Custom,
}

/// Total mass `c = ∫_ℝ q`, possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mass {
    Finite(f64),
    Infinite,
}

impl Mass {
    pub fn value(self) -> f64 {
        match self {
            Mass::Finite(c) => c,
            Mass::Infinite => f64::INFINITY,
        }
    }
}

/// Default quadrature density for `F`, in Simpson panels per unit length.
pub const DEFAULT_PANELS_PER_UNIT: usize = 1024;

const ROUND_TRIP_TOL: f64 = 1e-10;

/// Positive weight `q` on the real line with its analytic derivative.
#[derive(Clone)]
pub struct Weight1D {
    kind: WeightKind,
    q: ScalarFn,
    dq: ScalarFn,
    even: bool,
    /// `(F(-∞), F(+∞))`.
    range: (f64, f64),
    panels_per_unit: usize,
}

impl fmt::Debug for Weight1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Weight1D")
            .field("kind", &self.kind)
            .field("even", &self.even)
            .field("range", &self.range)
            .finish()
    }
}

impl Weight1D {
    pub fn constant(c0: f64) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(invalid(format!(
                "constant weight must be positive and finite, got {c0}"
            )));
        }
        Ok(Self {
            kind: WeightKind::Constant { c0 },
            q: Arc::new(move |_| c0),
            dq: Arc::new(|_| 0.0),
            even: true,
            range: (f64::NEG_INFINITY, f64::INFINITY),
            panels_per_unit: DEFAULT_PANELS_PER_UNIT,
        })
    }

    /// `q(t) = e^{-t²/2}`, total mass `√(2π)`.
    pub fn gaussian() -> Self {
        let half = (std::f64::consts::PI / 2.0).sqrt();
        Self {
            kind: WeightKind::Gaussian,
            q: Arc::new(|t| (-0.5 * t * t).exp()),
            dq: Arc::new(|t| -t * (-0.5 * t * t).exp()),
            even: true,
            range: (-half, half),
            panels_per_unit: DEFAULT_PANELS_PER_UNIT,
        }
    }

    /// `q(t) = e^{t²}`, infinite total mass.
    pub fn anti_gaussian() -> Self {
        Self {
            kind: WeightKind::AntiGaussian,
            q: Arc::new(|t| (t * t).exp()),
            dq: Arc::new(|t| 2.0 * t * (t * t).exp()),
            even: true,
            range: (f64::NEG_INFINITY, f64::INFINITY),
            panels_per_unit: DEFAULT_PANELS_PER_UNIT,
        }
    }

    /// A user-supplied weight. `range` is `(F(-∞), F(+∞))` with
    /// `F(x) = ∫₀ˣ q`; pass infinities for unbounded mass.
    pub fn custom(q: ScalarFn, dq: ScalarFn, even: bool, range: (f64, f64)) -> Result<Self> {
        if !(range.0 < 0.0 && range.1 > 0.0) {
            return Err(invalid("cumulative range must straddle 0"));
        }
        if even {
            for i in 1..=32 {
                let x = i as f64 * 0.25;
                if (q(x) - q(-x)).abs() > 1e-12 * q(x).abs().max(1.0) {
                    return Err(invalid(format!("weight flagged even but q({x}) != q(-{x})")));
                }
            }
        }
        Ok(Self {
            kind: WeightKind::Custom,
            q,
            dq,
            even,
            range,
            panels_per_unit: DEFAULT_PANELS_PER_UNIT,
        })
    }

    pub fn from_kind(kind: WeightKind) -> Result<Self> {
        match kind {
            WeightKind::Constant { c0 } => Self::constant(c0),
            WeightKind::Gaussian => Ok(Self::gaussian()),
            WeightKind::AntiGaussian => Ok(Self::anti_gaussian()),
            other => Err(invalid(format!("{other:?} is not a one-dimensional weight"))),
        }
    }

    /// Quadrature density used by [`Weight1D::cumulative`].
    pub fn with_resolution(mut self, panels_per_unit: usize) -> Self {
        self.panels_per_unit = panels_per_unit.max(16);
        self
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn q(&self, x: f64) -> f64 {
        (self.q)(x)
    }

    pub fn dq(&self, x: f64) -> f64 {
        (self.dq)(x)
    }

    pub fn total_mass(&self) -> Mass {
        let c = self.range.1 - self.range.0;
        if c.is_finite() {
            Mass::Finite(c)
        } else {
            Mass::Infinite
        }
    }

    /// `(F(-∞), F(+∞))`.
    pub fn cumulative_range(&self) -> (f64, f64) {
        self.range
    }

    /// `F(x) = ∫₀ˣ q(t) dt` (signed).
    pub fn cumulative(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(invalid(format!("cumulative needs a finite abscissa, got {x}")));
        }
        self.integral(0.0, x)
    }

    /// `∫ₓʸ q` for any ordering of the bounds.
    pub fn integral(&self, x: f64, y: f64) -> Result<f64> {
        let (lo, hi, sign) = if x <= y { (x, y, 1.0) } else { (y, x, -1.0) };
        let n = panels_for(hi - lo, self.panels_per_unit, 16);
        Ok(sign * integrate(|t| self.q(t), lo, hi, n)?)
    }

    /// Solves `F(x) = y`.
    pub fn inverse_cumulative(&self, y: f64) -> Result<f64> {
        let (lo_range, hi_range) = self.range;
        if !y.is_finite() || y <= lo_range || y >= hi_range {
            return Err(Error::MassOutOfRange {
                value: y,
                lo: lo_range,
                hi: hi_range,
            });
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        // Grow a bracket [lo, hi] around the root from the origin outwards.
        let mut step = (y / self.q(0.0)).abs().max(1e-3);
        let (mut lo, mut hi) = if y > 0.0 { (0.0, step) } else { (-step, 0.0) };
        loop {
            let (f_lo, f_hi) = (self.cumulative(lo)? - y, self.cumulative(hi)? - y);
            if f_lo <= 0.0 && f_hi >= 0.0 {
                break;
            }
            step *= 2.0;
            if step > 1e6 {
                return Err(Error::MassOutOfRange {
                    value: y,
                    lo: lo_range,
                    hi: hi_range,
                });
            }
            if y > 0.0 {
                lo = hi;
                hi += step;
            } else {
                hi = lo;
                lo -= step;
            }
        }
        let x = find_root_newton(|x| Ok((self.cumulative(x)? - y, self.q(x))), lo, hi, 1e-15)?;
        let residual = (self.cumulative(x)? - y).abs();
        if residual > ROUND_TRIP_TOL * y.abs().max(1.0) {
            return Err(invalid(format!(
                "inverse cumulative did not converge at y = {y} (residual {residual})"
            )));
        }
        Ok(x)
    }

    /// Maps ascending `ys` to `F⁻¹(ys)`, marching node to node with short
    /// local integrals instead of restarting from the origin.
    pub fn inverse_cumulative_nodes(&self, ys: &[f64]) -> Result<Vec<f64>> {
        let Some(&first) = ys.first() else {
            return Ok(Vec::new());
        };
        let mut xs = Vec::with_capacity(ys.len());
        let mut x = self.inverse_cumulative(first)?;
        xs.push(x);
        for w in ys.windows(2) {
            let dy = w[1] - w[0];
            if !(dy > 0.0) {
                return Err(invalid("node ordinates must be strictly increasing"));
            }
            x = self.advance(x, dy)?;
            xs.push(x);
        }
        Ok(xs)
    }

    /// Returns `x'` with `∫ₓ^{x'} q = dy` (`dy > 0`).
    fn advance(&self, x: f64, dy: f64) -> Result<f64> {
        let local = |t: f64| integrate(|s| self.q(s), x, t, 16);
        let mut hi = x + dy / self.q(x);
        let mut grow = 0;
        while local(hi)? < dy {
            hi = x + 2.0 * (hi - x);
            grow += 1;
            if grow > 60 {
                return Err(Error::MassOutOfRange {
                    value: dy,
                    lo: self.range.0,
                    hi: self.range.1,
                });
            }
        }
        find_root_newton(|t| Ok((local(t)? - dy, self.q(t))), x, hi, 1e-15 * hi.abs().max(1.0))
    }

    /// `m(y) = 1 / q(F⁻¹(y))²`.
    pub fn transformed_density(&self, y: f64) -> Result<f64> {
        let x = self.inverse_cumulative(y)?;
        Ok(density_at(self.q(x)))
    }

    /// `m′(y) = -2 q′(x) / q(x)⁴` at `x = F⁻¹(y)`.
    pub fn transformed_density_slope(&self, y: f64) -> Result<f64> {
        let x = self.inverse_cumulative(y)?;
        let q = self.q(x);
        Ok(-2.0 * self.dq(x) / (q * q * q * q))
    }

    /// Sign class of `q′` on `[0, x_max]`, sampled.
    pub fn monotonicity_on_half_line(&self, x_max: f64, samples: usize) -> Monotonicity {
        let scale = (0..=samples)
            .map(|i| self.q(x_max * i as f64 / samples as f64))
            .fold(0.0_f64, f64::max);
        let tol = 1e-14 * scale.max(1.0);
        let (mut pos, mut neg) = (false, false);
        for i in 0..=samples {
            let d = self.dq(x_max * i as f64 / samples as f64);
            pos |= d > tol;
            neg |= d < -tol;
        }
        match (pos, neg) {
            (false, false) => Monotonicity::Constant,
            (true, false) => Monotonicity::Increasing,
            (false, true) => Monotonicity::Decreasing,
            (true, true) => Monotonicity::Mixed,
        }
    }
}

pub(crate) fn density_at(q: f64) -> f64 {
    1.0 / (q * q)
}

/// Monotonicity class of a weight on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Constant,
    Mixed,
}

/// Exponent profile `h(r)` of the radial weight `e^{h(|x|)}` on `ℝᴺ`.
#[derive(Clone)]
pub struct RadialWeight {
    kind: WeightKind,
    h: ScalarFn,
    dh: ScalarFn,
    d2h: ScalarFn,
    dim: usize,
}

impl fmt::Debug for RadialWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialWeight")
            .field("kind", &self.kind)
            .field("dim", &self.dim)
            .finish()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(invalid(format!("radial weights need dimension N >= 2, got {dim}")));
    }
    Ok(())
}

impl RadialWeight {
    /// `h(r) = r²`.
    pub fn radial_square(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            kind: WeightKind::RadialSquare,
            h: Arc::new(|r| r * r),
            dh: Arc::new(|r| 2.0 * r),
            d2h: Arc::new(|_| 2.0),
            dim,
        })
    }

    /// `h ≡ 0` (plain Lebesgue measure).
    pub fn radial_zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            kind: WeightKind::RadialZero,
            h: Arc::new(|_| 0.0),
            dh: Arc::new(|_| 0.0),
            d2h: Arc::new(|_| 0.0),
            dim,
        })
    }

    pub fn custom(h: ScalarFn, dh: ScalarFn, d2h: ScalarFn, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            kind: WeightKind::Custom,
            h,
            dh,
            d2h,
            dim,
        })
    }

    pub fn from_kind(kind: WeightKind, dim: usize) -> Result<Self> {
        match kind {
            WeightKind::RadialSquare => Self::radial_square(dim),
            WeightKind::RadialZero => Self::radial_zero(dim),
            other => Err(invalid(format!("{other:?} is not a radial weight"))),
        }
    }

    /// Same profile shifted by a constant, `h + c`.
    pub fn shifted(&self, c: f64) -> Self {
        let h = self.h.clone();
        Self {
            kind: WeightKind::Custom,
            h: Arc::new(move |r| h(r) + c),
            dh: self.dh.clone(),
            d2h: self.d2h.clone(),
            dim: self.dim,
        }
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self, r: f64) -> f64 {
        (self.h)(r)
    }

    pub fn dh(&self, r: f64) -> f64 {
        (self.dh)(r)
    }

    pub fn d2h(&self, r: f64) -> f64 {
        (self.d2h)(r)
    }

    /// Radial density `e^{h(r)} r^{N-1}`.
    pub fn radial_density(&self, r: f64) -> f64 {
        self.h(r).exp() * r.powi(self.dim as i32 - 1)
    }
}

/// Result of a sampled admissibility check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub ok: bool,
    pub first_violation: Option<f64>,
}

/// Checks `h′(r) > -(N-1)/r` and `h″(r) ≥ 0` on a log-uniform sample of
/// `(0, r_max]` spanning six decades.
pub fn admissible_radial(rw: &RadialWeight, r_max: f64, samples: usize) -> Result<AdmissibilityReport> {
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(invalid(format!("r_max must be positive, got {r_max}")));
    }
    if samples < 16 {
        return Err(invalid(format!("need at least 16 samples, got {samples}")));
    }
    let n1 = (rw.dim() - 1) as f64;
    let first_violation = (0..samples)
        .map(|i| r_max * 10f64.powf(-6.0 * (1.0 - i as f64 / (samples - 1) as f64)))
        .find(|&r| !(rw.dh(r) > -n1 / r) || !(rw.d2h(r) >= 0.0));
    Ok(AdmissibilityReport {
        ok: first_violation.is_none(),
        first_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_examples() {
        let one = Weight1D::constant(1.0).unwrap();
        assert!((one.cumulative(2.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((one.cumulative(-1.0).unwrap() + 1.0).abs() < 1e-14);
        assert_eq!(one.cumulative(0.0).unwrap(), 0.0);
        let anti = Weight1D::anti_gaussian();
        assert!((anti.cumulative(1.0).unwrap() - 1.462_651_745_907_181_6).abs() < 1e-11);
    }

    #[test]
    fn inverse_examples() {
        let one = Weight1D::constant(1.0).unwrap();
        assert!((one.inverse_cumulative(0.7).unwrap() - 0.7).abs() < 1e-12);
        let two = Weight1D::constant(2.0).unwrap();
        assert!((two.inverse_cumulative(1.0).unwrap() - 0.5).abs() < 1e-12);
        let g = Weight1D::gaussian();
        let y = g.cumulative(1.0).unwrap();
        assert!((g.inverse_cumulative(y).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inverse_out_of_range() {
        let g = Weight1D::gaussian();
        assert!(matches!(g.inverse_cumulative(1.3), Err(Error::MassOutOfRange { .. })));
        assert!(matches!(g.inverse_cumulative(-1.3), Err(Error::MassOutOfRange { .. })));
    }

    #[test]
    fn density_examples() {
        let one = Weight1D::constant(1.0).unwrap();
        assert!((one.transformed_density(0.3).unwrap() - 1.0).abs() < 1e-14);
        let two = Weight1D::constant(2.0).unwrap();
        assert!((two.transformed_density(-4.0).unwrap() - 0.25).abs() < 1e-14);
        let g = Weight1D::gaussian();
        assert_eq!(g.transformed_density(0.0).unwrap(), 1.0);
    }

    #[test]
    fn density_is_even_for_even_weights() {
        for w in [Weight1D::gaussian(), Weight1D::anti_gaussian()] {
            for i in 1..10 {
                let y = 0.1 * i as f64;
                let (p, m) = (w.transformed_density(y).unwrap(), w.transformed_density(-y).unwrap());
                assert!((p - m).abs() < 1e-12 * p.max(1.0));
            }
        }
    }

    #[test]
    fn node_march_matches_direct_inverse() {
        let w = Weight1D::anti_gaussian();
        let ys: Vec<f64> = (0..=200).map(|i| -1.0 + 0.01 * i as f64).collect();
        let xs = w.inverse_cumulative_nodes(&ys).unwrap();
        for (&x, &y) in xs.iter().zip(&ys).step_by(20) {
            assert!((x - w.inverse_cumulative(y).unwrap()).abs() < 1e-11);
        }
    }

    #[test]
    fn bounded_sampled_weight() {
        // discrete analogue of 0 < c1 < q < c2 on a bounded interval
        let w = Weight1D::anti_gaussian();
        let vals: Vec<f64> = (0..=100).map(|i| w.q(-2.0 + 0.04 * i as f64)).collect();
        let c1 = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let c2 = vals.iter().cloned().fold(0.0, f64::max);
        assert!(c1 > 0.0 && c2.is_finite() && c1 <= c2);
    }

    #[test]
    fn admissibility_examples() {
        let sq = RadialWeight::radial_square(2).unwrap();
        assert!(admissible_radial(&sq, 5.0, 64).unwrap().ok);
        let zero = RadialWeight::radial_zero(3).unwrap();
        assert!(admissible_radial(&zero, 5.0, 64).unwrap().ok);
        let concave =
            RadialWeight::custom(Arc::new(|r| -r * r), Arc::new(|r| -2.0 * r), Arc::new(|_| -2.0), 2).unwrap();
        let report = admissible_radial(&concave, 5.0, 64).unwrap();
        assert!(!report.ok);
        assert!(report.first_violation.is_some());
    }

    #[test]
    fn monotonicity_classes() {
        assert_eq!(
            Weight1D::gaussian().monotonicity_on_half_line(3.0, 100),
            Monotonicity::Decreasing
        );
        assert_eq!(
            Weight1D::anti_gaussian().monotonicity_on_half_line(3.0, 100),
            Monotonicity::Increasing
        );
        assert_eq!(
            Weight1D::constant(2.0).unwrap().monotonicity_on_half_line(3.0, 100),
            Monotonicity::Constant
        );
    }

    #[test]
    fn total_masses() {
        let g = Weight1D::gaussian();
        assert!((g.total_mass().value() - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-14);
        assert_eq!(Weight1D::anti_gaussian().total_mass(), Mass::Infinite);
    }
}
