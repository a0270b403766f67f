//! Single-mode phase-space distributions.
//!
//! Conventions, fixed once here and enforced by tests:
//!
//! * `chi_s(lambda) = Tr{rho D(lambda)} e^{s |lambda|^2 / 2}`.
//! * `W_s(alpha) = Int d^2lambda / pi  chi_s(lambda) e^{conj(lambda) alpha - lambda conj(alpha)}`.
//!   With this measure `Int d^2alpha / pi W_s = 1`, vacuum has `W_0(0) = 2`,
//!   and `W_{-1}(alpha) = pi Q(alpha)`.
//! * `Q(alpha) = <alpha|rho|alpha> / pi`, so `Int d^2alpha Q = 1`.
//! * `K_SP(alpha) = Int d^2beta / pi^2  W_{0|S}(alpha + beta) W_{0|P}(beta)
//!   = Tr{rho_S D(alpha) rho_P D^dagger(alpha)} / pi`, normalized as
//!   `Int d^2alpha K_SP = 1`.
//!
//! The trace form is the production route. The convolution form is kept to
//! cross-check it and is far more expensive.

mod grid;
mod quadrature;

pub use grid::{eval_grid, try_eval_grid, AxisLabel, GridSpec, RealGrid, DEFAULT_GRID_BUDGET};
pub use quadrature::{gauss_legendre, QuadratureSpec};

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fock::{
    coherent_amplitudes_into, displaced_number_overlaps, displacement_leakage, FockOperator, FockVector,
};
use crate::scalar::{c, cis, czero, Real};

/// Probability allowed to leave the truncated space before a value is flagged.
pub const TRUNCATION_BOUND: f64 = 1e-10;
/// Largest tolerated imaginary part of a quantity that is real analytically.
pub const IMAG_RESIDUAL_BOUND: f64 = 1e-8;
/// Hermiticity / positivity slack accepted for caller-supplied density matrices.
pub const DENSITY_TOL: f64 = 1e-8;
/// Largest trace deficit accepted for caller-supplied density matrices.
pub const MAX_TRACE_DEFICIT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AccuracyWarning {
    /// The displaced or coherent state needed for the evaluation has more
    /// than `bound` of its weight beyond the cutoff, so contributions of the
    /// discarded high-number tail of the input may be missing.
    Truncation { leakage: f64, bound: f64 },
    ImaginaryResidual { residual: f64, bound: f64 },
}

/// Complex value of a characteristic function with its truncation diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharValue<T> {
    pub value: Complex<T>,
    pub leakage: T,
    pub warning: Option<AccuracyWarning>,
}

/// Real-valued phase-space quantity with the diagnostics of its evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue<T> {
    pub value: T,
    /// Imaginary part of the underlying complex computation.
    pub imag_residual: T,
    pub leakage: T,
    pub warning: Option<AccuracyWarning>,
}

impl<T: Real> DensityValue<T> {
    fn from_parts(z: Complex<T>, leakage: T) -> Self {
        let warning = if leakage > T::lit(TRUNCATION_BOUND) {
            Some(AccuracyWarning::Truncation {
                leakage: leakage.to_f64_lossy(),
                bound: TRUNCATION_BOUND,
            })
        } else if z.im.abs() > T::lit(IMAG_RESIDUAL_BOUND) {
            Some(AccuracyWarning::ImaginaryResidual {
                residual: z.im.abs().to_f64_lossy(),
                bound: IMAG_RESIDUAL_BOUND,
            })
        } else {
            None
        };
        Self {
            value: z.re,
            imag_residual: z.im,
            leakage,
            warning,
        }
    }
}

fn check_density<T: Real>(rho: &FockOperator<T>) -> Result<()> {
    rho.validate_density(T::lit(DENSITY_TOL), T::lit(MAX_TRACE_DEFICIT))
}

fn check_s(s: f64) -> Result<()> {
    if !s.is_finite() {
        return invalid(format!("ordering parameter must be finite, got {s}"));
    }
    if s > 0.0 {
        return Err(Error::UnsupportedParameter(format!(
            "s = {s} > 0: the quadrature only converges for s <= 0"
        )));
    }
    Ok(())
}

fn check_finite<T: Real>(z: Complex<T>, what: &str) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return invalid(format!("{what} must be finite, got {z}"));
    }
    Ok(())
}

/// Highest Fock index on which `rho` has non-zero population.
fn support_top<T: Real>(rho: &FockOperator<T>) -> usize {
    (0..rho.dim())
        .rev()
        .find(|&n| rho.get(n, n).norm() > T::zero())
        .unwrap_or(0)
}

/// `Tr{rho D(lambda)}` restricted to the support block of `rho`.
fn chi0_block<T: Real>(rho: &FockOperator<T>, top: usize, lambda: Complex<T>) -> Complex<T> {
    let block = top + 1;
    let d = displaced_number_overlaps(lambda, block, block).expect("finite lambda");
    let mut acc = czero();
    for n in 0..block {
        for m in 0..block {
            acc += rho.get(m, n) * d[(n, m)];
        }
    }
    acc
}

/// s-ordered characteristic function `chi_s(lambda) = Tr{rho D(lambda)} e^{s|lambda|^2/2}`.
pub fn characteristic_fn<T: Real>(rho: &FockOperator<T>, lambda: Complex<T>, s: f64) -> Result<CharValue<T>> {
    check_density(rho)?;
    check_finite(lambda, "lambda")?;
    if !s.is_finite() {
        return invalid(format!("ordering parameter must be finite, got {s}"));
    }
    let top = support_top(rho);
    let chi0 = chi0_block(rho, top, lambda);
    let d = displaced_number_overlaps(lambda, rho.dim(), top + 1)?;
    let pops: Vec<T> = (0..=top).map(|n| rho.get(n, n).re).collect();
    let leakage = displacement_leakage(&d, &pops);
    let value = chi0 * (T::lit(s) * lambda.norm_sqr() / T::lit(2.0)).exp();
    let warning = (leakage > T::lit(TRUNCATION_BOUND)).then(|| AccuracyWarning::Truncation {
        leakage: leakage.to_f64_lossy(),
        bound: TRUNCATION_BOUND,
    });
    Ok(CharValue {
        value,
        leakage,
        warning,
    })
}

/// `chi_0` sampled on the tensor Gauss-Legendre nodes of a [`QuadratureSpec`].
#[derive(Debug, Clone)]
struct CharTable<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    /// `chi0[j * n + k]` at `lambda = nodes[j] + i nodes[k]`
    chi0: Vec<Complex<T>>,
}

impl<T: Real> CharTable<T> {
    fn build(rho: &FockOperator<T>, q: &QuadratureSpec) -> Self {
        let (nodes, weights) = q.axis_rule::<T>();
        let n = nodes.len();
        let top = support_top(rho);
        let chi0 = (0..n * n)
            .into_par_iter()
            .map(|idx| chi0_block(rho, top, c(nodes[idx / n], nodes[idx % n])))
            .collect();
        Self { nodes, weights, chi0 }
    }

    /// Complex `W_s` on the tensor product of `xs` (real parts) and `ys`
    /// (imaginary parts); the result is indexed `[q * xs.len() + p]`.
    fn wigner_tensor(&self, s: T, xs: &[T], ys: &[T]) -> Vec<Complex<T>> {
        let n = self.nodes.len();
        let two = T::lit(2.0);
        // A[j][p] = sum_k w_k chi_s(u_j, v_k) e^{-2i v_k x_p}
        let ex: Vec<Complex<T>> = (0..n)
            .flat_map(|k| xs.iter().map(move |&x| (k, x)))
            .map(|(k, x)| cis(-two * self.nodes[k] * x))
            .collect();
        let np = xs.len();
        let mut a = vec![czero::<T>(); n * np];
        a.par_chunks_mut(np).enumerate().for_each(|(j, row)| {
            let u = self.nodes[j];
            for k in 0..n {
                let v = self.nodes[k];
                let damp = (s * (u * u + v * v) / two).exp();
                let coef = self.chi0[j * n + k] * (self.weights[k] * damp);
                let e = &ex[k * np..(k + 1) * np];
                for (slot, ek) in row.iter_mut().zip(e) {
                    *slot += coef * ek;
                }
            }
        });
        // W[q][p] = (1/pi) sum_j w_j e^{2i u_j y_q} A[j][p]
        let inv_pi = T::FRAC_1_PI();
        let mut out = vec![czero::<T>(); ys.len() * np];
        out.par_chunks_mut(np).enumerate().for_each(|(qi, row)| {
            let y = ys[qi];
            for j in 0..n {
                let coef = cis(two * self.nodes[j] * y) * (self.weights[j] * inv_pi);
                for (slot, a_jp) in row.iter_mut().zip(&a[j * np..(j + 1) * np]) {
                    *slot += coef * a_jp;
                }
            }
        });
        out
    }

    fn wigner_at(&self, s: T, alpha: Complex<T>) -> Complex<T> {
        let n = self.nodes.len();
        let two = T::lit(2.0);
        let mut acc = czero();
        for j in 0..n {
            let u = self.nodes[j];
            for k in 0..n {
                let v = self.nodes[k];
                let kernel = cis(two * (u * alpha.im - v * alpha.re));
                let damp = (s * (u * u + v * v) / two).exp();
                acc += self.chi0[j * n + k] * kernel * (self.weights[j] * self.weights[k] * damp);
            }
        }
        acc * T::FRAC_1_PI()
    }
}

/// Reusable generalized-Wigner evaluator: the characteristic function is
/// sampled once on the quadrature nodes.
#[derive(Debug, Clone)]
pub struct WignerEvaluator<T> {
    table: CharTable<T>,
    s: T,
}

impl<T: Real> WignerEvaluator<T> {
    pub fn new(rho: &FockOperator<T>, s: f64, q: &QuadratureSpec) -> Result<Self> {
        check_density(rho)?;
        check_s(s)?;
        q.validate()?;
        Ok(Self {
            table: CharTable::build(rho, q),
            s: T::lit(s),
        })
    }

    pub fn at(&self, alpha: Complex<T>) -> Result<DensityValue<T>> {
        check_finite(alpha, "alpha")?;
        Ok(DensityValue::from_parts(self.table.wigner_at(self.s, alpha), T::zero()))
    }

    /// Values on the tensor grid `xs x ys`, indexed `[q * xs.len() + p]`.
    pub fn on_tensor(&self, xs: &[T], ys: &[T]) -> Vec<Complex<T>> {
        self.table.wigner_tensor(self.s, xs, ys)
    }
}

/// Generalized Wigner function `W_s(alpha)` for `s <= 0` by direct quadrature
/// of the characteristic function.
pub fn wigner_s<T: Real>(rho: &FockOperator<T>, alpha: Complex<T>, s: f64, q: &QuadratureSpec) -> Result<DensityValue<T>> {
    WignerEvaluator::new(rho, s, q)?.at(alpha)
}

/// Husimi function `<alpha|rho|alpha> / pi`.
pub fn q_function<T: Real>(rho: &FockOperator<T>, alpha: Complex<T>) -> Result<DensityValue<T>> {
    check_density(rho)?;
    check_finite(alpha, "alpha")?;
    let mut coh = vec![czero::<T>(); rho.dim()];
    coherent_amplitudes_into(alpha, &mut coh);
    let leakage = (T::one() - coh.iter().map(|a| a.norm_sqr()).sum::<T>()).max(T::zero());
    let rho_coh = rho.matrix().matvec(&coh);
    let z = coh
        .iter()
        .zip(&rho_coh)
        .fold(czero::<T>(), |acc, (a, b)| acc + a.conj() * b);
    Ok(DensityValue::from_parts(z * T::FRAC_1_PI(), leakage))
}

/// `K_SP(alpha) = Tr{rho_S D(alpha) rho_P D^dagger(alpha)} / pi`.
pub fn k_sp_trace<T: Real>(rho_s: &FockOperator<T>, rho_p: &FockOperator<T>, alpha: Complex<T>) -> Result<DensityValue<T>> {
    if rho_s.cutoff() != rho_p.cutoff() {
        return invalid(format!(
            "signal and probe cutoffs differ: {} vs {}",
            rho_s.cutoff(),
            rho_p.cutoff()
        ));
    }
    check_density(rho_s)?;
    check_density(rho_p)?;
    check_finite(alpha, "alpha")?;
    let dim = rho_s.dim();
    let d = displaced_number_overlaps(alpha, dim, dim)?;
    let displaced = d.matmul(rho_p.matrix()).matmul(&d.adjoint());
    let z = rho_s.matrix().trace_product(&displaced) * T::FRAC_1_PI();
    let leakage = displacement_leakage(&d, &rho_p.populations());
    Ok(DensityValue::from_parts(z, leakage))
}

/// Pure-state form of [`k_sp_trace`]: `|<psi_S|D(alpha)|psi_P>|^2 / pi`.
pub fn k_sp_trace_pure<T: Real>(psi_s: &FockVector<T>, psi_p: &FockVector<T>, alpha: Complex<T>) -> Result<DensityValue<T>> {
    if psi_s.cutoff() != psi_p.cutoff() {
        return invalid(format!(
            "signal and probe cutoffs differ: {} vs {}",
            psi_s.cutoff(),
            psi_p.cutoff()
        ));
    }
    check_finite(alpha, "alpha")?;
    let dim = psi_s.dim();
    let d = displaced_number_overlaps(alpha, dim, dim)?;
    let d_psi = d.matvec(psi_p.amplitudes());
    let amp = psi_s
        .amplitudes()
        .iter()
        .zip(&d_psi)
        .fold(czero::<T>(), |acc, (a, b)| acc + a.conj() * b);
    let pops: Vec<T> = psi_p.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    let leakage = displacement_leakage(&d, &pops);
    Ok(DensityValue::from_parts(
        c(amp.norm_sqr() * T::FRAC_1_PI(), T::zero()),
        leakage,
    ))
}

/// Validation-only evaluator of `K_SP` through the Wigner convolution.
///
/// The probe Wigner function is tabulated once on the `beta` nodes; for each
/// `alpha` the signal Wigner function is evaluated on the shifted node grid
/// with separable sums (two `n^3` passes instead of `n^4`).
#[derive(Debug, Clone)]
pub struct KspConvolution<T> {
    signal: CharTable<T>,
    probe_wigner: Vec<Complex<T>>,
}

impl<T: Real> KspConvolution<T> {
    pub fn new(rho_s: &FockOperator<T>, rho_p: &FockOperator<T>, q: &QuadratureSpec) -> Result<Self> {
        if rho_s.cutoff() != rho_p.cutoff() {
            return invalid(format!(
                "signal and probe cutoffs differ: {} vs {}",
                rho_s.cutoff(),
                rho_p.cutoff()
            ));
        }
        check_density(rho_s)?;
        check_density(rho_p)?;
        q.validate()?;
        let signal = CharTable::build(rho_s, q);
        let probe = CharTable::build(rho_p, q);
        let probe_wigner = probe.wigner_tensor(T::zero(), &probe.nodes, &probe.nodes);
        Ok(Self { signal, probe_wigner })
    }

    pub fn at(&self, alpha: Complex<T>) -> Result<DensityValue<T>> {
        check_finite(alpha, "alpha")?;
        let nodes = &self.signal.nodes;
        let w = &self.signal.weights;
        let xs: Vec<T> = nodes.iter().map(|&b| alpha.re + b).collect();
        let ys: Vec<T> = nodes.iter().map(|&b| alpha.im + b).collect();
        let ws = self.signal.wigner_tensor(T::zero(), &xs, &ys);
        let n = nodes.len();
        let mut acc = czero::<T>();
        for qi in 0..n {
            for p in 0..n {
                acc += ws[qi * n + p] * self.probe_wigner[qi * n + p] * (w[qi] * w[p]);
            }
        }
        let inv_pi2 = T::FRAC_1_PI() * T::FRAC_1_PI();
        Ok(DensityValue::from_parts(acc * inv_pi2, T::zero()))
    }
}

/// One-shot `K_SP(alpha)` through the convolution route. Rebuilds both
/// characteristic tables on every call; prefer [`KspConvolution`] for grids.
pub fn k_sp_convolution<T: Real>(
    rho_s: &FockOperator<T>,
    rho_p: &FockOperator<T>,
    alpha: Complex<T>,
    q: &QuadratureSpec,
) -> Result<DensityValue<T>> {
    KspConvolution::new(rho_s, rho_p, q)?.at(alpha)
}
