use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Square integration window `[-radius, radius]^2` with a tensor-product
/// Gauss-Legendre rule of `points_per_axis` nodes per real axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub radius: f64,
    pub points_per_axis: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radius: 6.0,
            points_per_axis: 121,
        }
    }
}

impl QuadratureSpec {
    pub const MIN_POINTS: usize = 16;

    pub fn new(radius: f64, points_per_axis: usize) -> Result<Self> {
        let q = Self {
            radius,
            points_per_axis,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return invalid(format!("quadrature radius must be positive, got {}", self.radius));
        }
        if self.points_per_axis < Self::MIN_POINTS {
            return invalid(format!(
                "quadrature needs at least {} points per axis, got {}",
                Self::MIN_POINTS,
                self.points_per_axis
            ));
        }
        Ok(())
    }

    /// Nodes and weights on `[-radius, radius]`.
    pub fn axis_rule<T: Real>(&self) -> (Vec<T>, Vec<T>) {
        let (x, w) = gauss_legendre(self.points_per_axis);
        (
            x.iter().map(|&xi| T::lit(xi * self.radius)).collect(),
            w.iter().map(|&wi| T::lit(wi * self.radius)).collect(),
        )
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending, by Newton
/// iteration on `P_n` from the Chebyshev initial guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
