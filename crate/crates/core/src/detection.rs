//! Finite-amplitude simulation of triple-coupler homodyne detection.
//!
//! Inputs: signal on port 1, coherent local oscillator `|z>` (real `z > 0`)
//! on port 2, probe on port 3. The local oscillator is never put on the Fock
//! grid. Since the coupler is passive, `U D_2(z) = D_1(b_1) D_2(b_2) D_3(b_3) U`
//! with `b_j = z T[j][1]`, so the count amplitudes are
//!
//! ```text
//! A(n) = sum_m  prod_j <n_j|D(b_j)|m_j>  <m| U |signal, 0, probe>
//! ```
//!
//! and only the few-photon signal/probe state is evolved. The displaced
//! number overlaps come from [`crate::fock::displaced_number_overlaps`].

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::{displaced_number_overlaps, make_state, FockVector, StateSpec};
use crate::linalg::CMatrix;
use crate::phasespace::{k_sp_trace, k_sp_trace_pure, try_eval_grid, AxisLabel, GridSpec, RealGrid, DEFAULT_GRID_BUDGET};
use crate::scalar::{czero, Real};
use crate::tritter::{apply_tritter, basis_dim, flat_index, tritter_matrix, CountReducer, ThreeModeState};
use crate::fock::FockOperator;

/// Count-table mass deficit above which results are refused.
pub const MAX_MASS_DEFICIT: f64 = 1e-4;
/// Samples drawn from one generator stream. Fixed, so the output does not
/// depend on how many threads share the work.
pub const SAMPLE_CHUNK: usize = 1 << 16;

/// Smallest admissible per-mode count cutoff for a given `|z|`:
/// `ceil(z^2/3 + 8 z / sqrt 3 + 10)`.
pub fn min_count_cutoff(z_mag: f64) -> usize {
    (z_mag * z_mag / 3.0 + 8.0 * z_mag / 3f64.sqrt() + 10.0).ceil() as usize
}

/// How outcome space is binned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BinSpec {
    /// Bins matched to the outcome lattice at the given `|z|`: width `1/|z|`
    /// in `y1`, height `sqrt(3)/|z|` in `y2`, placed so each bin holds exactly
    /// two lattice sites with their centroid at the bin center. The window is
    /// shrunk to whole bins.
    Lattice {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
    Grid(GridSpec),
}

impl Default for BinSpec {
    fn default() -> Self {
        BinSpec::Lattice {
            x_min: -5.0,
            x_max: 5.0,
            y_min: -5.0,
            y_max: 5.0,
        }
    }
}

impl BinSpec {
    pub fn resolve(&self, z_mag: f64) -> Result<GridSpec> {
        match *self {
            BinSpec::Grid(g) => {
                g.validate()?;
                Ok(g)
            }
            BinSpec::Lattice {
                x_min,
                x_max,
                y_min,
                y_max,
            } => {
                if !(z_mag.is_finite() && z_mag > 0.0) {
                    return invalid("lattice bins need a positive |z|");
                }
                // outcome sites: x = (n1 - (n2 + n3)/2)/z, y = (n3 - n2) (sqrt3/2)/z
                // bin centers:   x = (k - 1/4)/z,           y = (i + 1/4) sqrt3/z
                let hy = 3f64.sqrt() / z_mag;
                let k_lo = (x_min * z_mag + 0.25).ceil() as i64;
                let k_hi = (x_max * z_mag + 0.25).floor() as i64;
                let i_lo = (y_min / hy - 0.25).ceil() as i64;
                let i_hi = (y_max / hy - 0.25).floor() as i64;
                if k_hi - k_lo < 1 || i_hi - i_lo < 1 {
                    return invalid("lattice window holds fewer than 2x2 bins");
                }
                GridSpec::new(
                    (k_lo as f64 - 0.25) / z_mag,
                    (k_hi as f64 - 0.25) / z_mag,
                    (i_lo as f64 + 0.25) * hy,
                    (i_hi as f64 + 0.25) * hy,
                    (k_hi - k_lo + 1) as usize,
                    (i_hi - i_lo + 1) as usize,
                )
            }
        }
    }
}

/// Everything that determines one simulated detection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Local-oscillator amplitude `|z|`; its phase is the reference, zero.
    pub z_mag: f64,
    pub signal_spec: StateSpec,
    pub probe_spec: StateSpec,
    /// Fock cutoff for signal and probe.
    pub cutoff_sp: usize,
    /// Largest photon count kept per output mode.
    pub count_cutoff: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub bin_spec: BinSpec,
}

impl SimConfig {
    /// Config with the smallest admissible count cutoff and default bins.
    pub fn new(z_mag: f64, signal: StateSpec, probe: StateSpec, cutoff_sp: usize) -> Self {
        Self {
            z_mag,
            signal_spec: signal,
            probe_spec: probe,
            cutoff_sp,
            count_cutoff: min_count_cutoff(z_mag.max(0.0)),
            n_samples: 0,
            seed: 0,
            bin_spec: BinSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z_mag.is_finite() && self.z_mag > 0.0) {
            return invalid(format!("z_mag must be positive, got {}", self.z_mag));
        }
        let need = min_count_cutoff(self.z_mag);
        if self.count_cutoff < need {
            return invalid(format!(
                "count_cutoff {} below the minimum {need} for |z| = {}",
                self.count_cutoff, self.z_mag
            ));
        }
        make_state::<f64>(&self.signal_spec, self.cutoff_sp)?;
        make_state::<f64>(&self.probe_spec, self.cutoff_sp)?;
        self.bin_spec.resolve(self.z_mag)?;
        Ok(())
    }

    pub fn bin_grid(&self) -> Result<GridSpec> {
        self.bin_spec.resolve(self.z_mag)
    }
}

/// Joint photocount probabilities `P(n1, n2, n3)`, row-major, each count in
/// `0..=count_cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution<T> {
    count_cutoff: usize,
    probs: Vec<T>,
    mass_deficit: T,
}

impl<T: Real> CountDistribution<T> {
    pub fn count_cutoff(&self) -> usize {
        self.count_cutoff
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// `1 - sum(probs)`, clamped at zero.
    pub fn mass_deficit(&self) -> T {
        self.mass_deficit
    }

    pub fn get(&self, n: [usize; 3]) -> T {
        self.probs[flat_index(n, [self.count_cutoff; 3])]
    }

    /// Iterator over `(counts, probability)`.
    pub fn iter(&self) -> impl Iterator<Item = ([usize; 3], T)> + '_ {
        let d = self.count_cutoff + 1;
        self.probs
            .iter()
            .enumerate()
            .map(move |(idx, &p)| ([idx / (d * d), (idx / d) % d, idx % d], p))
    }

    /// `E[n_mode]` for mode 1..=3.
    pub fn mean_count(&self, mode: usize) -> T {
        self.iter()
            .map(|(n, p)| T::from_usize_lossy(n[mode - 1]) * p)
            .sum()
    }

    /// Probability-weighted mixture of runs on identical count grids.
    pub fn mixture(parts: &[(T, CountDistribution<T>)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return invalid("mixture needs at least one component");
        };
        let cut = first.count_cutoff;
        let mut probs = vec![T::zero(); first.probs.len()];
        for (w, d) in parts {
            if d.count_cutoff != cut {
                return invalid("mixture components must share a count cutoff");
            }
            for (acc, p) in probs.iter_mut().zip(&d.probs) {
                *acc += *w * *p;
            }
        }
        let total: T = probs.iter().copied().sum();
        Ok(Self {
            count_cutoff: cut,
            probs,
            mass_deficit: (T::one() - total).max(T::zero()),
        })
    }
}

/// Displacement amplitudes `b_j = z T[j][1]` picked up by the output modes.
pub fn output_displacements<T: Real>(z_mag: f64) -> [Complex<T>; 3] {
    let t = tritter_matrix::<T>();
    let z = T::lit(z_mag);
    [t.t[0][1] * z, t.t[1][1] * z, t.t[2][1] * z]
}

/// Exact (up to truncation) photocount distribution for pure signal and
/// probe states.
pub fn output_count_distribution<T: Real>(cfg: &SimConfig) -> Result<CountDistribution<T>> {
    cfg.validate()?;
    let signal = make_state::<T>(&cfg.signal_spec, cfg.cutoff_sp)?;
    let probe = make_state::<T>(&cfg.probe_spec, cfg.cutoff_sp)?;
    count_distribution_from_states(&signal, &probe, cfg.z_mag, cfg.count_cutoff)
}

/// [`output_count_distribution`] for explicit signal/probe vectors.
pub fn count_distribution_from_states<T: Real>(
    signal: &FockVector<T>,
    probe: &FockVector<T>,
    z_mag: f64,
    count_cutoff: usize,
) -> Result<CountDistribution<T>> {
    if !(z_mag.is_finite() && z_mag > 0.0) {
        return invalid(format!("z_mag must be positive, got {z_mag}"));
    }
    let lo = FockVector::basis(0, 0)?;
    let input = ThreeModeState::product(signal, &lo, probe);
    let mixed = apply_tritter(&input, &tritter_matrix())?;
    let m = mixed.cutoffs()[0];
    let md = m + 1;
    let cd = count_cutoff + 1;
    let betas = output_displacements::<T>(z_mag);
    let g: Vec<CMatrix<T>> = betas
        .iter()
        .map(|&b| displaced_number_overlaps(b, cd, md))
        .collect::<Result<_>>()?;
    let phi = mixed.amplitudes();

    // X1[m1][m2][n3] = sum_m3 G3[n3][m3] phi[m1][m2][m3]
    let mut x1 = vec![czero::<T>(); md * md * cd];
    x1.par_chunks_mut(cd).enumerate().for_each(|(m12, out)| {
        let src = &phi[m12 * md..(m12 + 1) * md];
        if src.iter().all(|a| a.norm_sqr() == T::zero()) {
            return;
        }
        for (n3, slot) in out.iter_mut().enumerate() {
            let row = g[2].row(n3);
            *slot = row.iter().zip(src).fold(czero(), |acc, (x, y)| acc + x * y);
        }
    });
    // X2[m1][n2][n3] = sum_m2 G2[n2][m2] X1[m1][m2][n3]
    let mut x2 = vec![czero::<T>(); md * cd * cd];
    x2.par_chunks_mut(cd * cd).enumerate().for_each(|(m1, out)| {
        let src = &x1[m1 * md * cd..(m1 + 1) * md * cd];
        for n2 in 0..cd {
            let row = g[1].row(n2);
            let dst = &mut out[n2 * cd..(n2 + 1) * cd];
            for (m2, coef) in row.iter().enumerate() {
                if coef.norm_sqr() == T::zero() {
                    continue;
                }
                for (d, s) in dst.iter_mut().zip(&src[m2 * cd..(m2 + 1) * cd]) {
                    *d += coef * s;
                }
            }
        }
    });
    drop(x1);
    // P[n1][n2][n3] = |sum_m1 G1[n1][m1] X2[m1][n2][n3]|^2
    let plane = cd * cd;
    let mut probs = vec![T::zero(); cd * plane];
    probs.par_chunks_mut(plane).enumerate().for_each(|(n1, out)| {
        let row = g[0].row(n1);
        let mut acc = vec![czero::<T>(); plane];
        for (m1, coef) in row.iter().enumerate() {
            if coef.norm_sqr() == T::zero() {
                continue;
            }
            for (a, s) in acc.iter_mut().zip(&x2[m1 * plane..(m1 + 1) * plane]) {
                *a += coef * s;
            }
        }
        for (o, a) in out.iter_mut().zip(&acc) {
            *o = a.norm_sqr();
        }
    });
    debug_assert_eq!(probs.len(), basis_dim([count_cutoff; 3]));
    let total: T = probs.iter().copied().sum();
    let mass_deficit = (T::one() - total).max(T::zero());
    if mass_deficit > T::lit(MAX_MASS_DEFICIT) {
        return Err(Error::Accuracy(format!(
            "count table misses {mass_deficit} of the probability (limit {MAX_MASS_DEFICIT})"
        )));
    }
    Ok(CountDistribution {
        count_cutoff,
        probs,
        mass_deficit,
    })
}

/// One detector outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSample<T> {
    pub y1: T,
    pub y2: T,
}

/// Draws `cfg.n_samples` outcomes by inverse-CDF over the row-major count
/// table. Sample `i` comes from the ChaCha8 stream `i / SAMPLE_CHUNK` keyed by
/// the seed, so the list is a pure function of `(dist, cfg)`.
pub fn sample_outcomes<T: Real>(dist: &CountDistribution<T>, cfg: &SimConfig) -> Result<Vec<OutcomeSample<T>>> {
    let reducer = CountReducer::<T>::new(cfg.z_mag)?;
    if cfg.n_samples == 0 {
        return Ok(Vec::new());
    }
    let mut cdf = Vec::with_capacity(dist.probs.len());
    let mut acc = 0.0f64;
    for p in &dist.probs {
        acc += p.to_f64_lossy();
        cdf.push(acc);
    }
    let total = acc;
    if total.is_nan() || total <= 0.0 {
        return invalid("count distribution carries no probability");
    }
    let d = dist.count_cutoff + 1;
    let last = cdf.len() - 1;
    let n_chunks = cfg.n_samples.div_ceil(SAMPLE_CHUNK);
    let chunks: Vec<Vec<OutcomeSample<T>>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(chunk as u64);
            let start = chunk * SAMPLE_CHUNK;
            let len = SAMPLE_CHUNK.min(cfg.n_samples - start);
            (0..len)
                .map(|_| {
                    let u = rng.gen::<f64>() * total;
                    let idx = cdf.partition_point(|&c| c <= u).min(last);
                    let (y1, y2) = reducer.reduce([idx / (d * d), (idx / d) % d, idx % d]);
                    OutcomeSample { y1, y2 }
                })
                .collect()
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// A binned density together with the probability that fell outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedDensity<T> {
    pub grid: RealGrid<T>,
    pub clipped_fraction: T,
}

/// Normalized 2D histogram of outcome samples. The grid integrates to
/// `1 - clipped_fraction`.
pub fn empirical_density<T: Real>(samples: &[OutcomeSample<T>], bins: &GridSpec) -> Result<BinnedDensity<T>> {
    bins.validate()?;
    if samples.is_empty() {
        return invalid("cannot histogram an empty sample list");
    }
    let mut counts = vec![0u64; bins.len()];
    let mut clipped = 0u64;
    for s in samples {
        match bins.cell_of(s.y1.to_f64_lossy(), s.y2.to_f64_lossy()) {
            Some((i, j)) => counts[bins.index(i, j)] += 1,
            None => clipped += 1,
        }
    }
    let n = samples.len() as f64;
    let scale = 1.0 / (n * bins.cell_area());
    let values = counts.iter().map(|&k| T::lit(k as f64 * scale)).collect();
    Ok(BinnedDensity {
        grid: RealGrid::from_values(*bins, AxisLabel::YPlane, values)?,
        clipped_fraction: T::lit(clipped as f64 / n),
    })
}

/// The noise-free counterpart of [`empirical_density`]: every count triple
/// is mapped through the reduction and binned with its exact probability.
pub fn exact_density<T: Real>(dist: &CountDistribution<T>, z_mag: f64, bins: &GridSpec) -> Result<BinnedDensity<T>> {
    bins.validate()?;
    let reducer = CountReducer::<T>::new(z_mag)?;
    let mut mass = vec![0.0f64; bins.len()];
    let mut clipped = 0.0f64;
    for (n, p) in dist.iter() {
        let p = p.to_f64_lossy();
        if p == 0.0 {
            continue;
        }
        let (y1, y2) = reducer.reduce(n);
        match bins.cell_of(y1.to_f64_lossy(), y2.to_f64_lossy()) {
            Some((i, j)) => mass[bins.index(i, j)] += p,
            None => clipped += p,
        }
    }
    let area = bins.cell_area();
    let values = mass.iter().map(|&m| T::lit(m / area)).collect();
    Ok(BinnedDensity {
        grid: RealGrid::from_values(*bins, AxisLabel::YPlane, values)?,
        clipped_fraction: T::lit(clipped),
    })
}

/// Outcome space coordinates `(y1, y2)` to the phase-space point
/// `alpha = y1 - i y2`.
#[inline]
pub fn outcome_to_alpha<T: Real>(y1: T, y2: T) -> Complex<T> {
    Complex::new(y1, -y2)
}

/// Strong-oscillator prediction `P(y1, y2) = K_SP(y1 - i y2)` on the bin centers.
pub fn reference_density<T: Real>(rho_s: &FockOperator<T>, rho_p: &FockOperator<T>, bins: &GridSpec) -> Result<RealGrid<T>> {
    try_eval_grid(
        |y| k_sp_trace(rho_s, rho_p, outcome_to_alpha(y.re, y.im)).map(|v| v.value),
        bins,
        AxisLabel::YPlane,
        DEFAULT_GRID_BUDGET,
    )
}

/// Pure-state form of [`reference_density`].
pub fn reference_density_pure<T: Real>(psi_s: &FockVector<T>, psi_p: &FockVector<T>, bins: &GridSpec) -> Result<RealGrid<T>> {
    try_eval_grid(
        |y| k_sp_trace_pure(psi_s, psi_p, outcome_to_alpha(y.re, y.im)).map(|v| v.value),
        bins,
        AxisLabel::YPlane,
        DEFAULT_GRID_BUDGET,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// `sum |a - b| * cell_area`
    pub l1: f64,
    pub max_abs: f64,
}

pub fn compare_densities<T: Real>(a: &RealGrid<T>, b: &RealGrid<T>) -> Result<Comparison> {
    if a.spec != b.spec {
        return invalid("grids have different specs");
    }
    let mut l1 = 0.0;
    let mut max_abs = 0.0f64;
    for (x, y) in a.values.iter().zip(&b.values) {
        let d = (*x - *y).abs().to_f64_lossy();
        l1 += d;
        max_abs = max_abs.max(d);
    }
    Ok(Comparison {
        l1: l1 * a.spec.cell_area(),
        max_abs,
    })
}

/// Result of one full simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub l1: f64,
    pub max_abs: f64,
    pub n_samples: usize,
    pub z_mag: f64,
    pub seed: u64,
    pub mass_deficit: f64,
    pub clipped_fraction: f64,
    pub config: SimConfig,
}

#[derive(Debug, Clone)]
pub struct SimOutcome<T> {
    pub empirical: BinnedDensity<T>,
    pub reference: RealGrid<T>,
    pub report: SimReport,
}

/// Count table, sampling, histogram, and comparison against `K_SP`.
pub fn simulate<T: Real>(cfg: &SimConfig) -> Result<SimOutcome<T>> {
    cfg.validate()?;
    if cfg.n_samples == 0 {
        return invalid("simulation needs n_samples >= 1");
    }
    let bins = cfg.bin_grid()?;
    let signal = make_state::<T>(&cfg.signal_spec, cfg.cutoff_sp)?;
    let probe = make_state::<T>(&cfg.probe_spec, cfg.cutoff_sp)?;
    let dist = count_distribution_from_states(&signal, &probe, cfg.z_mag, cfg.count_cutoff)?;
    let samples = sample_outcomes(&dist, cfg)?;
    let empirical = empirical_density(&samples, &bins)?;
    let reference = reference_density_pure(&signal, &probe, &bins)?;
    let cmp = compare_densities(&empirical.grid, &reference)?;
    let report = SimReport {
        l1: cmp.l1,
        max_abs: cmp.max_abs,
        n_samples: cfg.n_samples,
        z_mag: cfg.z_mag,
        seed: cfg.seed,
        mass_deficit: dist.mass_deficit().to_f64_lossy(),
        clipped_fraction: empirical.clipped_fraction.to_f64_lossy(),
        config: cfg.clone(),
    };
    Ok(SimOutcome {
        empirical,
        reference,
        report,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub z_mag: f64,
    pub count_cutoff: usize,
    pub l1: f64,
    pub max_abs: f64,
    pub mass_deficit: f64,
    pub clipped_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub points: Vec<ConvergencePoint>,
    /// Least-squares slope of `ln l1` against `ln |z|`.
    pub slope: f64,
}

/// Noise-free `l1(|z|)` study. For each `|z|` the count cutoff is raised to
/// the admissible minimum if needed; bins are resolved per `|z|`.
pub fn convergence_study<T: Real>(base: &SimConfig, z_values: &[f64]) -> Result<ConvergenceReport> {
    if z_values.len() < 3 {
        return invalid(format!("convergence study needs at least 3 |z| values, got {}", z_values.len()));
    }
    let signal = make_state::<T>(&base.signal_spec, base.cutoff_sp)?;
    let probe = make_state::<T>(&base.probe_spec, base.cutoff_sp)?;
    let mut points = Vec::with_capacity(z_values.len());
    for &z in z_values {
        let mut cfg = base.clone();
        cfg.z_mag = z;
        cfg.count_cutoff = base.count_cutoff.max(min_count_cutoff(z.max(0.0)));
        cfg.validate()?;
        let bins = cfg.bin_grid()?;
        let dist = count_distribution_from_states(&signal, &probe, z, cfg.count_cutoff)?;
        let exact = exact_density(&dist, z, &bins)?;
        let reference = reference_density_pure(&signal, &probe, &bins)?;
        let cmp = compare_densities(&exact.grid, &reference)?;
        points.push(ConvergencePoint {
            z_mag: z,
            count_cutoff: cfg.count_cutoff,
            l1: cmp.l1,
            max_abs: cmp.max_abs,
            mass_deficit: dist.mass_deficit().to_f64_lossy(),
            clipped_fraction: exact.clipped_fraction.to_f64_lossy(),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.z_mag.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.l1.ln()).collect();
    Ok(ConvergenceReport {
        slope: fit_slope(&xs, &ys),
        points,
    })
}

/// Ordinary least-squares slope.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_cutoff_formula() {
        assert_eq!(min_count_cutoff(12.0), 114);
        assert_eq!(min_count_cutoff(3.0), 27);
    }

    #[test]
    fn lattice_bins_hold_two_sites_each() {
        let z = 5.0;
        let bins = BinSpec::Lattice {
            x_min: -1.0,
            x_max: 1.0,
            y_min: -1.0,
            y_max: 1.0,
        }
        .resolve(z)
        .unwrap();
        let reducer = CountReducer::<f64>::new(z).unwrap();
        let mut hits = vec![0usize; bins.len()];
        for n1 in 0..40 {
            for n2 in 0..40 {
                for n3 in 0..40 {
                    // one representative per site: sites repeat along (k, k, k)
                    if n1.min(n2).min(n3) != 0 {
                        continue;
                    }
                    let (y1, y2) = reducer.reduce([n1, n2, n3]);
                    if let Some((i, j)) = bins.cell_of(y1, y2) {
                        hits[bins.index(i, j)] += 1;
                    }
                }
            }
        }
        assert!(hits.iter().all(|&h| h == 2), "{hits:?}");
    }

    #[test]
    fn config_validation() {
        let mut cfg = SimConfig::new(4.0, StateSpec::vacuum(), StateSpec::vacuum(), 4);
        cfg.validate().unwrap();
        cfg.count_cutoff -= 1;
        assert!(cfg.validate().is_err());
        let cfg = SimConfig::new(0.0, StateSpec::vacuum(), StateSpec::vacuum(), 4);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zero_samples_is_empty() {
        let mut cfg = SimConfig::new(2.0, StateSpec::vacuum(), StateSpec::vacuum(), 2);
        cfg.n_samples = 0;
        let dist = output_count_distribution::<f64>(&cfg).unwrap();
        assert!(sample_outcomes(&dist, &cfg).unwrap().is_empty());
    }

    #[test]
    fn single_sample_histogram() {
        let bins = GridSpec::new(0.0, 1.0, 0.0, 1.0, 5, 5).unwrap();
        let s = [OutcomeSample { y1: 0.5, y2: 0.25 }];
        let h = empirical_density(&s, &bins).unwrap();
        assert_eq!(h.grid.get(2, 1), 1.0 / bins.cell_area());
        assert_eq!(h.grid.values.iter().filter(|&&v| v != 0.0).count(), 1);
        assert_eq!(h.clipped_fraction, 0.0);
    }

    #[test]
    fn compare_examples() {
        let spec = GridSpec::new(0.0, 2.0, 0.0, 2.0, 3, 3).unwrap();
        let a = RealGrid::from_values(spec, AxisLabel::YPlane, vec![0.5f64; 9]).unwrap();
        let c0 = compare_densities(&a, &a).unwrap();
        assert_eq!((c0.l1, c0.max_abs), (0.0, 0.0));
        let mut b = a.clone();
        b.values[4] += 0.1;
        let c1 = compare_densities(&a, &b).unwrap();
        assert!((c1.l1 - 0.1 * spec.cell_area()).abs() < 1e-15);
        assert!((c1.max_abs - 0.1).abs() < 1e-15);
        let other = RealGrid::from_values(GridSpec::new(0.0, 1.0, 0.0, 2.0, 3, 3).unwrap(), AxisLabel::YPlane, vec![0.5; 9]).unwrap();
        assert!(compare_densities(&a, &other).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = [3.0f64, 6.0, 12.0].iter().map(|z| z.ln()).collect();
        let ys: Vec<f64> = [3.0f64, 6.0, 12.0].iter().map(|z| (0.7 / z).ln()).collect();
        assert!((fit_slope(&xs, &ys) + 1.0).abs() < 1e-12);
    }
}
