use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Default cap on `nx * ny` for grid evaluation.
pub const DEFAULT_GRID_BUDGET: usize = 4_000_000;

/// Which plane a grid lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisLabel {
    /// Complex amplitude `alpha = x + i y`.
    AlphaPlane,
    /// Detector outcome pair `(y1, y2)`.
    YPlane,
}

impl AxisLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            AxisLabel::AlphaPlane => "alpha_plane",
            AxisLabel::YPlane => "y_plane",
        }
    }
}

/// Rectangular lattice of `nx * ny` nodes, endpoints included. Each node is
/// the center of a cell of size `dx * dy`; histogram bins use those cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        let g = Self {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, -half_width, half_width, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return invalid("grid bounds must be finite");
        }
        if self.nx < 2 || self.ny < 2 {
            return invalid(format!("grid needs at least 2x2 nodes, got {}x{}", self.nx, self.ny));
        }
        if self.x_max <= self.x_min || self.y_max <= self.y_min {
            return invalid("grid bounds must satisfy min < max on both axes");
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.dy()
    }

    /// Cell `(i, j)` whose half-open extent `[c - d/2, c + d/2)` holds the
    /// point, if any.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fi = ((x - self.x_min) / self.dx() + 0.5).floor();
        let fj = ((y - self.y_min) / self.dy() + 0.5).floor();
        if !(fi >= 0.0 && fj >= 0.0) || fi >= self.nx as f64 || fj >= self.ny as f64 {
            return None;
        }
        Some((fi as usize, fj as usize))
    }

    /// Row-major index: rows are `y`, ascending.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

/// Real values sampled on a [`GridSpec`], stored row-major with `y` ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealGrid<T> {
    pub spec: GridSpec,
    pub label: AxisLabel,
    pub values: Vec<T>,
}

impl<T: Real> RealGrid<T> {
    pub fn from_values(spec: GridSpec, label: AxisLabel, values: Vec<T>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return invalid(format!("grid expects {} values, got {}", spec.len(), values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("grid values must be finite");
        }
        Ok(Self { spec, label, values })
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[self.spec.index(i, j)]
    }

    /// Riemann sum `sum(values) * cell_area`.
    pub fn integral(&self) -> T {
        self.values.iter().copied().sum::<T>() * T::lit(self.spec.cell_area())
    }

    /// `(i, j, value)` of the largest entry; the first one wins on ties.
    pub fn argmax(&self) -> (usize, usize, T) {
        let mut best = (0, self.values[0]);
        for (k, &v) in self.values.iter().enumerate() {
            if v > best.1 {
                best = (k, v);
            }
        }
        (best.0 % self.spec.nx, best.0 / self.spec.nx, best.1)
    }

    pub fn max(&self) -> T {
        self.argmax().2
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }
}

/// Evaluates a pointwise density at every node. Each node is computed
/// independently, so the result does not depend on evaluation order.
pub fn eval_grid<T, F>(f: F, spec: &GridSpec, label: AxisLabel, budget: usize) -> Result<RealGrid<T>>
where
    T: Real,
    F: Fn(Complex<T>) -> T + Sync,
{
    spec.validate()?;
    if spec.len() > budget {
        return invalid(format!("grid of {} points exceeds budget {budget}", spec.len()));
    }
    let values: Vec<T> = (0..spec.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % spec.nx, k / spec.nx);
            f(Complex::new(T::lit(spec.x(i)), T::lit(spec.y(j))))
        })
        .collect();
    RealGrid::from_values(*spec, label, values)
}

/// Fallible variant of [`eval_grid`]; the first error (in index order) wins.
pub fn try_eval_grid<T, F>(f: F, spec: &GridSpec, label: AxisLabel, budget: usize) -> Result<RealGrid<T>>
where
    T: Real,
    F: Fn(Complex<T>) -> Result<T> + Sync,
{
    spec.validate()?;
    if spec.len() > budget {
        return invalid(format!("grid of {} points exceeds budget {budget}", spec.len()));
    }
    let values: Result<Vec<T>> = (0..spec.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % spec.nx, k / spec.nx);
            f(Complex::new(T::lit(spec.x(i)), T::lit(spec.y(j))))
        })
        .collect();
    RealGrid::from_values(*spec, label, values?)
}
