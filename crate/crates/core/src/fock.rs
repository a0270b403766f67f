//! Truncated single-mode Fock space: state constructors, ladder and
//! displacement operators, overlaps and expectation values.
//!
//! Nothing here renormalizes. Every truncated object carries (or can report)
//! the probability it lost to the cutoff, so downstream statistics are never
//! silently biased.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::CMatrix;
use crate::scalar::{c, cast_complex, cis, cone, czero, ln_factorials, Real};

/// Norm tolerance used when checking that a truncated state is sub-normalized.
pub const NORM_EPS: f64 = 1e-10;

/// Single-mode pure state preparations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    Coherent { re: f64, im: f64 },
    Number { n: usize },
    SqueezedVacuum { r: f64 },
}

impl StateSpec {
    pub fn vacuum() -> Self {
        StateSpec::Number { n: 0 }
    }

    pub fn coherent(re: f64, im: f64) -> Self {
        StateSpec::Coherent { re, im }
    }

    /// Squeezed vacuum with the given mean photon number `sinh^2 r`.
    pub fn squeezed_with_mean_photons(mean: f64) -> Self {
        StateSpec::SqueezedVacuum { r: mean.sqrt().asinh() }
    }

    /// Analytic mean photon number of the untruncated state.
    pub fn mean_photon_number(&self) -> f64 {
        match *self {
            StateSpec::Coherent { re, im } => re * re + im * im,
            StateSpec::Number { n } => n as f64,
            StateSpec::SqueezedVacuum { r } => r.sinh().powi(2),
        }
    }

    fn validate(&self, cutoff: usize) -> Result<()> {
        match *self {
            StateSpec::Coherent { re, im } if !(re.is_finite() && im.is_finite()) => {
                invalid(format!("coherent amplitude must be finite, got {re}+{im}i"))
            }
            StateSpec::Number { n } if n > cutoff => {
                invalid(format!("number state |{n}> exceeds cutoff {cutoff}"))
            }
            StateSpec::SqueezedVacuum { r } if !r.is_finite() => {
                invalid(format!("squeezing parameter must be finite, got {r}"))
            }
            _ => Ok(()),
        }
    }
}

/// Pure state on the Fock basis `|0>, ..., |cutoff>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector<T> {
    amps: Vec<Complex<T>>,
}

impl<T: Real> FockVector<T> {
    /// Wraps raw amplitudes. Rejects empty input and super-normalized vectors.
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.is_empty() {
            return invalid("a Fock vector needs at least one amplitude");
        }
        if amps.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return invalid("amplitudes must be finite");
        }
        let v = Self { amps };
        if v.norm_sqr() > T::one() + T::lit(NORM_EPS) {
            return invalid(format!("state norm^2 {} exceeds 1", v.norm_sqr()));
        }
        Ok(v)
    }

    pub fn basis(n: usize, cutoff: usize) -> Result<Self> {
        make_state(&StateSpec::Number { n }, cutoff)
    }

    #[inline]
    pub fn cutoff(&self) -> usize {
        self.amps.len() - 1
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `1 - sum |amps|^2`: probability lost to truncation.
    pub fn norm_deficit(&self) -> T {
        T::one() - self.norm_sqr()
    }

    pub fn mean_photon_number(&self) -> T {
        self.amps
            .iter()
            .enumerate()
            .map(|(n, a)| T::from_usize_lossy(n) * a.norm_sqr())
            .sum()
    }

    /// `|psi><psi|`
    pub fn density_matrix(&self) -> FockOperator<T> {
        let d = self.dim();
        FockOperator {
            mat: CMatrix::from_fn(d, d, |i, j| self.amps[i] * self.amps[j].conj()),
        }
    }

    /// Largest index whose amplitude is not exactly zero.
    pub fn support_top(&self) -> usize {
        self.amps
            .iter()
            .rposition(|a| a.norm_sqr() > T::zero())
            .unwrap_or(0)
    }
}

/// Builds a truncated pure state. Amplitudes are closed-form and independent of
/// the cutoff, so two cutoffs agree on their common prefix.
pub fn make_state<T: Real>(spec: &StateSpec, cutoff: usize) -> Result<FockVector<T>> {
    spec.validate(cutoff)?;
    let dim = cutoff + 1;
    let mut amps = vec![czero::<T>(); dim];
    match *spec {
        StateSpec::Coherent { re, im } => {
            let alpha = cast_complex::<T>(Complex::new(re, im));
            coherent_amplitudes_into(alpha, &mut amps);
        }
        StateSpec::Number { n } => amps[n] = cone(),
        StateSpec::SqueezedVacuum { r } => {
            let r = T::lit(r);
            let t = -r.tanh();
            let mut coeff = T::one() / r.cosh().sqrt();
            amps[0] = c(coeff, T::zero());
            let mut m = 1;
            while 2 * m <= cutoff {
                // c_m = c_{m-1} (-tanh r) sqrt((2m-1)/(2m))
                let num = T::from_usize_lossy(2 * m - 1);
                let den = T::from_usize_lossy(2 * m);
                coeff = coeff * t * (num / den).sqrt();
                amps[2 * m] = c(coeff, T::zero());
                m += 1;
            }
        }
    }
    FockVector::from_amplitudes(amps)
}

/// Coherent-state amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)`, evaluated with
/// log-magnitudes so large `n` neither overflows nor underflows early.
pub(crate) fn coherent_amplitudes_into<T: Real>(alpha: Complex<T>, out: &mut [Complex<T>]) {
    if out.is_empty() {
        return;
    }
    let mag = alpha.norm();
    let half_x = mag * mag / T::lit(2.0);
    out[0] = c((-half_x).exp(), T::zero());
    if mag == T::zero() {
        out[1..].iter_mut().for_each(|a| *a = czero());
        return;
    }
    let lnf = ln_factorials::<T>(out.len());
    let ln_mag = mag.ln();
    let phase = alpha.arg();
    for (n, slot) in out.iter_mut().enumerate().skip(1) {
        let nf = T::from_usize_lossy(n);
        let log_abs = nf * ln_mag - half_x - lnf[n] / T::lit(2.0);
        *slot = cis(nf * phase) * log_abs.exp();
    }
}

/// Operator on a truncated single-mode Fock space. Also used for density
/// matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator<T> {
    mat: CMatrix<T>,
}

impl<T: Real> FockOperator<T> {
    pub fn from_matrix(mat: CMatrix<T>) -> Result<Self> {
        if mat.rows() != mat.cols() || mat.rows() == 0 {
            return invalid(format!(
                "Fock operator must be square and non-empty, got {}x{}",
                mat.rows(),
                mat.cols()
            ));
        }
        Ok(Self { mat })
    }

    /// Mixture `sum_i p_i |psi_i><psi_i|` of pure states sharing one cutoff.
    pub fn mixture(components: &[(T, FockVector<T>)]) -> Result<Self> {
        let Some((_, first)) = components.first() else {
            return invalid("mixture needs at least one component");
        };
        let dim = first.dim();
        let mut mat = CMatrix::zeros(dim, dim);
        for (p, psi) in components {
            if psi.dim() != dim {
                return invalid("mixture components must share a cutoff");
            }
            if *p < T::zero() {
                return invalid("mixture weights must be non-negative");
            }
            mat = mat.add(&psi.density_matrix().mat.scale(c(*p, T::zero())));
        }
        Ok(Self { mat })
    }

    #[inline]
    pub fn cutoff(&self) -> usize {
        self.mat.rows() - 1
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.mat
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.mat[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
        }
    }

    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        check_cutoffs(self.cutoff(), rhs.cutoff())?;
        Ok(Self {
            mat: self.mat.matmul(&rhs.mat),
        })
    }

    pub fn trace(&self) -> Complex<T> {
        self.mat.trace()
    }

    /// Checks the density-matrix invariants: Hermitian and positive
    /// diagonal within `tol`, trace in `[1 - max_deficit, 1 + tol]`.
    pub fn validate_density(&self, tol: T, max_deficit: T) -> Result<()> {
        let herm = self.mat.hermiticity_residual();
        if herm > tol {
            return invalid(format!("density matrix not Hermitian (residual {herm})"));
        }
        let tr = self.trace();
        if tr.re > T::one() + tol || tr.re < T::one() - max_deficit || tr.im.abs() > tol {
            return invalid(format!("density matrix trace {tr} outside [1 - {max_deficit}, 1]"));
        }
        if let Some(n) = (0..self.dim()).find(|&n| self.mat[(n, n)].re < -tol) {
            return invalid(format!("density matrix has negative population at |{n}>"));
        }
        Ok(())
    }

    /// Diagonal entries interpreted as a photon-number distribution.
    pub fn populations(&self) -> Vec<T> {
        (0..self.dim()).map(|n| self.mat[(n, n)].re).collect()
    }
}

fn check_cutoffs(a: usize, b: usize) -> Result<()> {
    if a != b {
        return invalid(format!("cutoff mismatch: {a} vs {b}"));
    }
    Ok(())
}

/// Annihilation operator `a` with `a|n> = sqrt(n)|n-1>`.
pub fn ladder_matrix<T: Real>(cutoff: usize) -> FockOperator<T> {
    let dim = cutoff + 1;
    let mut m = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = c(T::from_usize_lossy(n).sqrt(), T::zero());
    }
    FockOperator { mat: m }
}

/// Number operator `a^dagger a`, diagonal.
pub fn number_operator<T: Real>(cutoff: usize) -> FockOperator<T> {
    let dim = cutoff + 1;
    FockOperator {
        mat: CMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                c(T::from_usize_lossy(i), T::zero())
            } else {
                czero()
            }
        }),
    }
}

/// Truncated displacement operator `D(alpha) = exp(alpha a^dagger - conj(alpha) a)`.
///
/// Entries are the exact infinite-space matrix elements, so the truncation
/// error lives only in what the cutoff discards, never in the kept block.
pub fn displacement_matrix<T: Real>(alpha: Complex<T>, cutoff: usize) -> Result<FockOperator<T>> {
    let dim = cutoff + 1;
    Ok(FockOperator {
        mat: displaced_number_overlaps(alpha, dim, dim)?,
    })
}

/// Rectangular block `G[n][m] = <n|D(beta)|m>` for `n < rows`, `m < cols`.
///
/// For `n >= m`:
/// `sqrt(m!/n!) beta^(n-m) e^{-|beta|^2/2} L_m^(n-m)(|beta|^2)`,
/// and for `n < m` the same with `(-conj beta)` and the roles swapped. The
/// generalized Laguerre polynomials come from the upward three-term
/// recurrence in the degree, one diagonal `n - m = k` at a time, carried with
/// a running log-scale so neither the factorial prefactor nor the polynomial
/// overflows.
pub fn displaced_number_overlaps<T: Real>(beta: Complex<T>, rows: usize, cols: usize) -> Result<CMatrix<T>> {
    if !(beta.re.is_finite() && beta.im.is_finite()) {
        return invalid(format!("displacement amplitude must be finite, got {beta}"));
    }
    let mut g = CMatrix::zeros(rows, cols);
    if rows == 0 || cols == 0 {
        return Ok(g);
    }
    let mag = beta.norm();
    if mag == T::zero() {
        for i in 0..rows.min(cols) {
            g[(i, i)] = cone();
        }
        return Ok(g);
    }
    let x = mag * mag;
    let ln_mag = mag.ln();
    let lnf = ln_factorials::<T>(rows.max(cols));
    let arg = beta.arg();
    let half = T::lit(0.5);

    // Lower diagonals (n = m + k) use beta^k, upper ones (-conj beta)^k.
    let lower = (0..rows).map(|k| (k, true));
    let upper = (1..cols).map(|k| (k, false));
    for (k, is_lower) in lower.chain(upper) {
        let len = if is_lower {
            rows.saturating_sub(k).min(cols)
        } else {
            cols.saturating_sub(k).min(rows)
        };
        if len == 0 {
            continue;
        }
        let kf = T::from_usize_lossy(k);
        let phase = if is_lower {
            cis(kf * arg)
        } else {
            cis(kf * (T::PI() - arg))
        };
        let laguerre = ScaledLaguerre::new(k, x);
        for (j, (mant, log_scale)) in laguerre.take(len).enumerate() {
            // j = min(n, m), j + k = max(n, m)
            let log_pref = half * (lnf[j] - lnf[j + k]) + kf * ln_mag - half * x + log_scale;
            let value = phase * (mant * log_pref.exp());
            let (n, m) = if is_lower { (j + k, j) } else { (j, j + k) };
            g[(n, m)] = value;
        }
    }
    Ok(g)
}

/// Iterator over `L_j^(k)(x)` for `j = 0, 1, ...`, yielding `(mantissa, log_scale)`
/// with `L = mantissa * exp(log_scale)`.
struct ScaledLaguerre<T> {
    k: T,
    x: T,
    j: usize,
    prev: T,
    cur: T,
    log_scale: T,
    limit: T,
}

impl<T: Real> ScaledLaguerre<T> {
    fn new(k: usize, x: T) -> Self {
        Self {
            k: T::from_usize_lossy(k),
            x,
            j: 0,
            prev: T::zero(),
            cur: T::one(),
            log_scale: T::zero(),
            limit: T::lit(1e8),
        }
    }
}

impl<T: Real> Iterator for ScaledLaguerre<T> {
    type Item = (T, T);

    fn next(&mut self) -> Option<(T, T)> {
        let out = (self.cur, self.log_scale);
        // L_{j+1} = ((2j + 1 + k - x) L_j - (j + k) L_{j-1}) / (j + 1)
        let jf = T::from_usize_lossy(self.j);
        let two = T::lit(2.0);
        let next = ((two * jf + T::one() + self.k - self.x) * self.cur - (jf + self.k) * self.prev)
            / (jf + T::one());
        self.prev = self.cur;
        self.cur = next;
        self.j += 1;
        let big = self.cur.abs().max(self.prev.abs());
        if big > self.limit {
            self.prev /= big;
            self.cur /= big;
            self.log_scale += big.ln();
        }
        Some(out)
    }
}

/// `<psi|phi> = sum conj(psi_n) phi_n`
pub fn overlap<T: Real>(psi: &FockVector<T>, phi: &FockVector<T>) -> Result<Complex<T>> {
    check_cutoffs(psi.cutoff(), phi.cutoff())?;
    Ok(psi
        .amps
        .iter()
        .zip(&phi.amps)
        .fold(czero(), |acc, (a, b)| acc + a.conj() * b))
}

/// `Tr(rho O)`
pub fn expectation<T: Real>(rho: &FockOperator<T>, op: &FockOperator<T>) -> Result<Complex<T>> {
    check_cutoffs(rho.cutoff(), op.cutoff())?;
    Ok(rho.mat.trace_product(&op.mat))
}

/// `<psi|O|psi>` without forming the density matrix.
pub fn pure_expectation<T: Real>(psi: &FockVector<T>, op: &FockOperator<T>) -> Result<Complex<T>> {
    check_cutoffs(psi.cutoff(), op.cutoff())?;
    let o_psi = op.mat.matvec(&psi.amps);
    Ok(psi
        .amps
        .iter()
        .zip(&o_psi)
        .fold(czero(), |acc, (a, b)| acc + a.conj() * b))
}

/// Probability that `D` (truncated) pushes out of the kept space when acting
/// on the populations of `rho`: `sum_m rho_mm (1 - sum_{n<=N} |D_nm|^2)`.
pub fn displacement_leakage<T: Real>(d: &CMatrix<T>, populations: &[T]) -> T {
    let mut leak = T::zero();
    for (m, &p) in populations.iter().enumerate() {
        if p <= T::zero() {
            continue;
        }
        let col: T = (0..d.rows()).map(|n| d[(n, m)].norm_sqr()).sum();
        leak += p * (T::one() - col).max(T::zero());
    }
    leak
}
