//! Symmetric three-port coupler ("tritter").
//!
//! Mode convention: output annihilators are `b_j = sum_k T[j][k] a_k`. In the
//! Schrodinger picture this means each input creation operator is replaced by
//! `a_k^dagger -> sum_j T[j][k] a_j^dagger`, so coherent inputs with amplitude
//! vector `v` leave as coherent outputs with amplitudes `T v`, and
//! `<psi| b_n^dagger b_n |psi> = <U psi| n_n |U psi>`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::FockVector;
use crate::linalg::CMatrix;
use crate::scalar::{c, cis, cone, czero, ln_factorials, Real};

/// Largest total photon number `apply_tritter` will expand.
pub const MAX_TOTAL_PHOTONS: usize = 96;
/// Largest three-mode Hilbert-space dimension for dense operators.
pub const MAX_OPERATOR_DIM: usize = 4096;

/// Unitary 3x3 transfer matrix, `t[j][k]` = amplitude from input `k` to output `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplerMatrix<T> {
    pub t: [[Complex<T>; 3]; 3],
}

/// Photocurrent phases `theta_n = 2 pi (n - 1) / 3` for `n = 1, 2, 3`.
pub fn detector_phase<T: Real>(n: usize) -> T {
    T::lit(2.0) * T::PI() * T::from_usize_lossy(n - 1) / T::lit(3.0)
}

/// The symmetric tritter `(1/sqrt 3) [[1,1,1],[1,w,w*],[1,w*,w]]`, `w = e^{2 pi i/3}`.
pub fn tritter_matrix<T: Real>() -> CouplerMatrix<T> {
    let s = T::one() / T::lit(3.0).sqrt();
    let mut t = [[czero(); 3]; 3];
    for (j, row) in t.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            // row j carries the phase pattern theta_{j+1} (k)
            *slot = cis(detector_phase::<T>(j + 1) * T::from_usize_lossy(k)) * s;
        }
    }
    CouplerMatrix { t }
}

impl<T: Real> CouplerMatrix<T> {
    pub fn from_rows(t: [[Complex<T>; 3]; 3]) -> Self {
        Self { t }
    }

    pub fn to_matrix(&self) -> CMatrix<T> {
        CMatrix::from_fn(3, 3, |j, k| self.t[j][k])
    }

    pub fn from_matrix(m: &CMatrix<T>) -> Result<Self> {
        if m.rows() != 3 || m.cols() != 3 {
            return invalid("coupler matrix must be 3x3");
        }
        let mut t = [[czero(); 3]; 3];
        for (j, row) in t.iter_mut().enumerate() {
            for (k, slot) in row.iter_mut().enumerate() {
                *slot = m[(j, k)];
            }
        }
        Ok(Self { t })
    }

    /// `max |T T^dagger - I|`
    pub fn unitarity_residual(&self) -> T {
        self.to_matrix().unitarity_residual()
    }

    /// `max |(|T_jk|^2 - 1/3)|`
    pub fn modulus_residual(&self) -> T {
        let third = T::one() / T::lit(3.0);
        self.t
            .iter()
            .flatten()
            .map(|x| (x.norm_sqr() - third).abs())
            .fold(T::zero(), T::max)
    }

    /// Output coherent amplitudes `T v` for input amplitudes `v`.
    pub fn apply_to_amplitudes(&self, v: [Complex<T>; 3]) -> [Complex<T>; 3] {
        let mut out = [czero(); 3];
        for (j, o) in out.iter_mut().enumerate() {
            *o = (0..3).fold(czero(), |acc, k| acc + self.t[j][k] * v[k]);
        }
        out
    }
}

/// One optical element in a discrete realization of a coupler. Modes are
/// numbered 1..=3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecompositionStep {
    /// Symmetric 50:50 splitter `(1/sqrt 2) [[1, i], [i, 1]]` on the pair.
    BeamSplitter5050 { modes: (usize, usize) },
    /// `a_mode -> e^{i angle} a_mode`.
    PhaseShift { mode: usize, angle: f64 },
}

impl DecompositionStep {
    pub fn matrix<T: Real>(&self) -> Result<CMatrix<T>> {
        let mut m = CMatrix::identity(3);
        match *self {
            DecompositionStep::BeamSplitter5050 { modes: (a, b) } => {
                if !(1..=3).contains(&a) || !(1..=3).contains(&b) || a == b {
                    return invalid(format!("invalid beam-splitter modes ({a}, {b})"));
                }
                let h = T::one() / T::lit(2.0).sqrt();
                let (a, b) = (a - 1, b - 1);
                m[(a, a)] = c(h, T::zero());
                m[(b, b)] = c(h, T::zero());
                m[(a, b)] = c(T::zero(), h);
                m[(b, a)] = c(T::zero(), h);
            }
            DecompositionStep::PhaseShift { mode, angle } => {
                if !(1..=3).contains(&mode) {
                    return invalid(format!("invalid phase-shifter mode {mode}"));
                }
                if !angle.is_finite() {
                    return invalid("phase-shift angle must be finite");
                }
                m[(mode - 1, mode - 1)] = cis(T::lit(angle));
            }
        }
        Ok(m)
    }
}

/// A discrete realization together with the external phases that map it onto
/// the symmetric tritter: `diag(e^{i out}) * recomposed * diag(e^{i in}) = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<T> {
    /// Elements in the order light meets them.
    pub steps: Vec<DecompositionStep>,
    pub recomposed: CouplerMatrix<T>,
    pub output_phases: [T; 3],
    pub input_phases: [T; 3],
    /// `max |D_out R D_in - T|`
    pub residual: T,
}

/// Realizes the symmetric tritter with four 50:50 splitters and two phase
/// shifters, `phi_1 = arccos(1/3)` and `phi_2 = phi_1 / 2`:
///
/// ```text
/// BS(1,2) -> BS(2,3) -> P_3(phi_1) -> P_1(phi_2) -> BS(2,3) -> BS(1,2)
/// ```
///
/// The result equals the tritter up to diagonal phase matrices on either side,
/// which are solved for and returned.
pub fn decompose_tritter<T: Real>() -> Result<Decomposition<T>> {
    let phi1 = (1.0f64 / 3.0).acos();
    let phi2 = phi1 / 2.0;
    let steps = vec![
        DecompositionStep::BeamSplitter5050 { modes: (1, 2) },
        DecompositionStep::BeamSplitter5050 { modes: (2, 3) },
        DecompositionStep::PhaseShift { mode: 3, angle: phi1 },
        DecompositionStep::PhaseShift { mode: 1, angle: phi2 },
        DecompositionStep::BeamSplitter5050 { modes: (2, 3) },
        DecompositionStep::BeamSplitter5050 { modes: (1, 2) },
    ];
    let mut u = CMatrix::<T>::identity(3);
    for step in &steps {
        u = step.matrix::<T>()?.matmul(&u);
    }
    let recomposed = CouplerMatrix::from_matrix(&u)?;
    let target = tritter_matrix::<T>();

    let tol = T::lit(1e-10);
    let moduli = recomposed.modulus_residual();
    if moduli > tol {
        return Err(Error::Construction(format!(
            "recomposed coupler is not balanced (modulus residual {moduli})"
        )));
    }
    // Fix input phase 1 to zero; the rest follow from column 1 and row 1.
    let mut output_phases = [T::zero(); 3];
    let mut input_phases = [T::zero(); 3];
    for j in 0..3 {
        output_phases[j] = (target.t[j][0] / recomposed.t[j][0]).arg();
    }
    for k in 1..3 {
        input_phases[k] = (target.t[0][k] / (recomposed.t[0][k] * cis(output_phases[0]))).arg();
    }
    let mut residual = T::zero();
    for j in 0..3 {
        for k in 0..3 {
            let v = cis(output_phases[j]) * recomposed.t[j][k] * cis(input_phases[k]);
            residual = residual.max((v - target.t[j][k]).norm());
        }
    }
    if residual > tol {
        return Err(Error::Construction(format!(
            "recomposed coupler differs from the tritter beyond external phases (residual {residual})"
        )));
    }
    Ok(Decomposition {
        steps,
        recomposed,
        output_phases,
        input_phases,
        residual,
    })
}

/// Pure state on three truncated modes, row-major in `(n1, n2, n3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeModeState<T> {
    cutoffs: [usize; 3],
    amps: Vec<Complex<T>>,
}

impl<T: Real> ThreeModeState<T> {
    pub fn from_amplitudes(cutoffs: [usize; 3], amps: Vec<Complex<T>>) -> Result<Self> {
        let dim = basis_dim(cutoffs);
        if amps.len() != dim {
            return invalid(format!("expected {dim} amplitudes, got {}", amps.len()));
        }
        let s = Self { cutoffs, amps };
        if s.norm_sqr() > T::one() + T::lit(crate::fock::NORM_EPS) {
            return invalid("three-mode state norm exceeds 1");
        }
        Ok(s)
    }

    pub fn product(a: &FockVector<T>, b: &FockVector<T>, c3: &FockVector<T>) -> Self {
        let cutoffs = [a.cutoff(), b.cutoff(), c3.cutoff()];
        let mut amps = Vec::with_capacity(basis_dim(cutoffs));
        for x in a.amplitudes() {
            for y in b.amplitudes() {
                for z in c3.amplitudes() {
                    amps.push(x * y * z);
                }
            }
        }
        Self { cutoffs, amps }
    }

    pub fn basis(n: [usize; 3], cutoffs: [usize; 3]) -> Result<Self> {
        if (0..3).any(|k| n[k] > cutoffs[k]) {
            return invalid(format!("basis state {n:?} exceeds cutoffs {cutoffs:?}"));
        }
        let mut amps = vec![czero(); basis_dim(cutoffs)];
        amps[flat_index(n, cutoffs)] = cone();
        Ok(Self { cutoffs, amps })
    }

    pub fn cutoffs(&self) -> [usize; 3] {
        self.cutoffs
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn get(&self, n: [usize; 3]) -> Complex<T> {
        if (0..3).any(|k| n[k] > self.cutoffs[k]) {
            return czero();
        }
        self.amps[flat_index(n, self.cutoffs)]
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability in each total-photon-number sector.
    pub fn sector_weights(&self) -> Vec<T> {
        let top: usize = self.cutoffs.iter().sum();
        let mut w = vec![T::zero(); top + 1];
        for (idx, a) in self.amps.iter().enumerate() {
            let n = unflatten(idx, self.cutoffs);
            w[n[0] + n[1] + n[2]] += a.norm_sqr();
        }
        w
    }

    /// `<n_mode>` for `mode` in 1..=3.
    pub fn mean_photons(&self, mode: usize) -> T {
        self.amps
            .iter()
            .enumerate()
            .map(|(idx, a)| T::from_usize_lossy(unflatten(idx, self.cutoffs)[mode - 1]) * a.norm_sqr())
            .sum()
    }

    /// `<psi| O |psi>` for a dense operator on this state's basis.
    pub fn expectation(&self, op: &CMatrix<T>) -> Result<Complex<T>> {
        if op.rows() != self.amps.len() || op.cols() != self.amps.len() {
            return invalid("operator dimension does not match the state");
        }
        let o_psi = op.matvec(&self.amps);
        Ok(self
            .amps
            .iter()
            .zip(&o_psi)
            .fold(czero(), |acc, (a, b)| acc + a.conj() * b))
    }

    /// Highest total photon number carrying non-zero amplitude.
    pub fn max_total_photons(&self) -> usize {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > T::zero())
            .map(|(idx, _)| unflatten(idx, self.cutoffs).iter().sum())
            .max()
            .unwrap_or(0)
    }
}

pub fn basis_dim(cutoffs: [usize; 3]) -> usize {
    cutoffs.iter().map(|n| n + 1).product()
}

#[inline]
pub fn flat_index(n: [usize; 3], cutoffs: [usize; 3]) -> usize {
    (n[0] * (cutoffs[1] + 1) + n[1]) * (cutoffs[2] + 1) + n[2]
}

#[inline]
pub fn unflatten(idx: usize, cutoffs: [usize; 3]) -> [usize; 3] {
    let d3 = cutoffs[2] + 1;
    let d2 = cutoffs[1] + 1;
    [idx / (d2 * d3), (idx / d3) % d2, idx % d3]
}

type Expansion<T> = Vec<([usize; 3], Complex<T>)>;

/// Expansion of `(sum_j T[j][k] a_j^dagger)^m / sqrt(m!)` into output
/// monomials: entries `(p, sqrt(m!) prod_j T[j][k]^{p_j} / p_j!)`.
fn creation_power<T: Real>(coupler: &CouplerMatrix<T>, k: usize, m: usize, lnf: &[T]) -> Expansion<T> {
    let mut out = Vec::with_capacity((m + 1) * (m + 2) / 2);
    let half = T::lit(0.5);
    for p0 in 0..=m {
        for p1 in 0..=(m - p0) {
            let p2 = m - p0 - p1;
            let p = [p0, p1, p2];
            let mag = (half * lnf[m] - lnf[p0] - lnf[p1] - lnf[p2]).exp();
            let mut coef = c(mag, T::zero());
            for j in 0..3 {
                coef *= coupler.t[j][k].powu(p[j] as u32);
            }
            out.push((p, coef));
        }
    }
    out
}

/// Fock-space action of the coupler. Each total-photon sector is mapped onto
/// itself exactly by multinomial expansion of the creation-operator
/// monomials; the output cutoffs are all equal to the largest occupied total
/// photon number, so nothing is truncated.
pub fn apply_tritter<T: Real>(psi: &ThreeModeState<T>, coupler: &CouplerMatrix<T>) -> Result<ThreeModeState<T>> {
    let n_tot = psi.max_total_photons();
    if n_tot > MAX_TOTAL_PHOTONS {
        return invalid(format!(
            "total photon number {n_tot} exceeds the budget of {MAX_TOTAL_PHOTONS}"
        ));
    }
    let out_cut = [n_tot; 3];
    let lnf = ln_factorials::<T>(n_tot);
    let half = T::lit(0.5);
    let mut cache: Vec<Vec<Option<Expansion<T>>>> = vec![vec![None; n_tot + 1]; 3];
    let mut out = vec![czero::<T>(); basis_dim(out_cut)];
    for (idx, &amp) in psi.amps.iter().enumerate() {
        if amp.norm_sqr() == T::zero() {
            continue;
        }
        let m = unflatten(idx, psi.cutoffs);
        for k in 0..3 {
            if cache[k][m[k]].is_none() {
                cache[k][m[k]] = Some(creation_power(coupler, k, m[k], &lnf));
            }
        }
        let e0 = cache[0][m[0]].as_ref().unwrap();
        let e1 = cache[1][m[1]].as_ref().unwrap();
        let e2 = cache[2][m[2]].as_ref().unwrap();
        for (p, cp) in e0 {
            for (q, cq) in e1 {
                let pq = amp * cp * cq;
                for (r, cr) in e2 {
                    let n = [p[0] + q[0] + r[0], p[1] + q[1] + r[1], p[2] + q[2] + r[2]];
                    let norm = (half * (lnf[n[0]] + lnf[n[1]] + lnf[n[2]])).exp();
                    out[flat_index(n, out_cut)] += pq * cr * norm;
                }
            }
        }
    }
    Ok(ThreeModeState {
        cutoffs: out_cut,
        amps: out,
    })
}

/// Dense `a_k^dagger a_l` (modes 1..=3) on the truncated three-mode basis.
pub fn hopping_operator<T: Real>(k: usize, l: usize, cutoffs: [usize; 3]) -> Result<CMatrix<T>> {
    let dim = basis_dim(cutoffs);
    if dim > MAX_OPERATOR_DIM {
        return invalid(format!("three-mode dimension {dim} exceeds {MAX_OPERATOR_DIM}"));
    }
    if !(1..=3).contains(&k) || !(1..=3).contains(&l) {
        return invalid("mode indices must be in 1..=3");
    }
    let (k, l) = (k - 1, l - 1);
    let mut op = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let n = unflatten(col, cutoffs);
        if n[l] == 0 {
            continue;
        }
        let mut m = n;
        let mut amp = T::from_usize_lossy(m[l]).sqrt();
        m[l] -= 1;
        m[k] += 1;
        if m[k] > cutoffs[k] {
            continue;
        }
        amp *= T::from_usize_lossy(m[k]).sqrt();
        op[(flat_index(m, cutoffs), col)] = c(amp, T::zero());
    }
    Ok(op)
}

/// Photocurrent operators `I_n = (1/3) sum_{k,l} e^{i theta_n (l - k)} a_k^dagger a_l`.
pub fn photocurrent_operators<T: Real>(cutoffs: [usize; 3]) -> Result<[CMatrix<T>; 3]> {
    let dim = basis_dim(cutoffs);
    let mut hops = Vec::with_capacity(9);
    for k in 1..=3 {
        for l in 1..=3 {
            hops.push(hopping_operator::<T>(k, l, cutoffs)?);
        }
    }
    let third = T::one() / T::lit(3.0);
    let build = |n: usize| {
        let theta = detector_phase::<T>(n);
        let mut acc = CMatrix::zeros(dim, dim);
        for k in 1..=3 {
            for l in 1..=3 {
                let phase = cis(theta * (T::from_usize_lossy(l) - T::from_usize_lossy(k))) * third;
                acc = acc.add(&hops[(k - 1) * 3 + (l - 1)].scale(phase));
            }
        }
        acc
    };
    Ok([build(1), build(2), build(3)])
}

/// Discrete Fourier transform of the photocurrents,
/// `F_s = (1/sqrt 3) sum_n I_n e^{-i theta_n (s - 1)}`.
pub fn ft_photocurrent_operators<T: Real>(cutoffs: [usize; 3]) -> Result<[CMatrix<T>; 3]> {
    let currents = photocurrent_operators::<T>(cutoffs)?;
    let dim = basis_dim(cutoffs);
    let norm = T::one() / T::lit(3.0).sqrt();
    let build = |s: usize| {
        let mut acc = CMatrix::zeros(dim, dim);
        for (n, current) in currents.iter().enumerate() {
            let theta = detector_phase::<T>(n + 1);
            let phase = cis(-theta * T::from_usize_lossy(s - 1)) * norm;
            acc = acc.add(&current.scale(phase));
        }
        acc
    };
    Ok([build(1), build(2), build(3)])
}

/// Closed forms of the transformed photocurrents:
/// `F_1 = (n_1 + n_2 + n_3)/sqrt 3`,
/// `F_2 = (a1^+ a2 + a2^+ a3 + a3^+ a1)/sqrt 3`,
/// `F_3 = (a1^+ a3 + a2^+ a1 + a3^+ a2)/sqrt 3`.
pub fn ft_photocurrent_closed_form<T: Real>(cutoffs: [usize; 3]) -> Result<[CMatrix<T>; 3]> {
    let norm = c(T::one() / T::lit(3.0).sqrt(), T::zero());
    let sum = |pairs: [(usize, usize); 3]| -> Result<CMatrix<T>> {
        let mut acc = hopping_operator::<T>(pairs[0].0, pairs[0].1, cutoffs)?;
        for &(k, l) in &pairs[1..] {
            acc = acc.add(&hopping_operator::<T>(k, l, cutoffs)?);
        }
        Ok(acc.scale(norm))
    };
    Ok([
        sum([(1, 1), (2, 2), (3, 3)])?,
        sum([(1, 2), (2, 3), (3, 1)])?,
        sum([(1, 3), (2, 1), (3, 2)])?,
    ])
}

/// Precomputed `e^{-i theta_n}` for the count reduction.
#[derive(Debug, Clone, Copy)]
pub struct CountReducer<T> {
    cos: [T; 3],
    sin: [T; 3],
    scale: T,
}

impl<T: Real> CountReducer<T> {
    pub fn new(z_mag: f64) -> Result<Self> {
        if !(z_mag.is_finite() && z_mag > 0.0) {
            return invalid(format!("local-oscillator amplitude must be positive, got {z_mag}"));
        }
        let mut cos = [T::zero(); 3];
        let mut sin = [T::zero(); 3];
        for n in 0..3 {
            let th = detector_phase::<T>(n + 1);
            cos[n] = th.cos();
            sin[n] = -th.sin();
        }
        // sqrt(3) * (1/sqrt(3)) / |z|
        Ok(Self {
            cos,
            sin,
            scale: T::one() / T::lit(z_mag),
        })
    }

    /// `(y1, y2) = sqrt(3) (Re F_2, Im F_2) / |z|` with `F_2` built from counts.
    #[inline]
    pub fn reduce(&self, counts: [usize; 3]) -> (T, T) {
        let mut re = T::zero();
        let mut im = T::zero();
        for n in 0..3 {
            let k = T::from_usize_lossy(counts[n]);
            re += k * self.cos[n];
            im += k * self.sin[n];
        }
        (re * self.scale, im * self.scale)
    }
}

/// Classical post-processing of one photocount triple into the triple
/// homodyne outcome pair `(y1, y2)`.
pub fn reduce_counts<T: Real>(counts: [usize; 3], z_mag: f64) -> Result<(T, T)> {
    Ok(CountReducer::new(z_mag)?.reduce(counts))
}

/// One named residual of [`tritter_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckResidual {
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResidual {
    fn new(residual: f64, tolerance: f64) -> Self {
        Self {
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TritterCheck {
    pub unitarity: CheckResidual,
    pub moduli: CheckResidual,
    pub ft_identity: CheckResidual,
    pub decomposition: CheckResidual,
}

impl TritterCheck {
    pub fn passed(&self) -> bool {
        self.unitarity.pass && self.moduli.pass && self.ft_identity.pass && self.decomposition.pass
    }
}

/// Self-test of a candidate coupler: unitarity, balanced moduli, the
/// photocurrent Fourier identity at per-mode cutoff `ft_cutoff`, and the
/// discrete realization of the symmetric tritter.
pub fn tritter_check(coupler: &CouplerMatrix<f64>, ft_cutoff: usize) -> Result<TritterCheck> {
    let cut = [ft_cutoff; 3];
    let built = ft_photocurrent_operators::<f64>(cut)?;
    let closed = ft_photocurrent_closed_form::<f64>(cut)?;
    let ft = built
        .iter()
        .zip(&closed)
        .map(|(a, b)| a.max_abs_diff(b))
        .fold(0.0, f64::max);
    let decomposition = match decompose_tritter::<f64>() {
        Ok(d) => d.residual,
        Err(_) => f64::INFINITY,
    };
    Ok(TritterCheck {
        unitarity: CheckResidual::new(coupler.unitarity_residual(), 1e-12),
        moduli: CheckResidual::new(coupler.modulus_residual(), 1e-12),
        ft_identity: CheckResidual::new(ft, 1e-13),
        decomposition: CheckResidual::new(decomposition, 1e-10),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn tritter_is_unitary_and_balanced() {
        let t = tritter_matrix::<f64>();
        assert!(t.unitarity_residual() <= 1e-15);
        assert!(t.modulus_residual() <= 1e-15);
    }

    #[test]
    fn tritter_rows_follow_detector_phases() {
        let t = tritter_matrix::<f64>();
        let s = 1.0 / 3f64.sqrt();
        for n in 1..=3 {
            let theta = detector_phase::<f64>(n);
            for l in 1..=3 {
                let want = Complex64::from_polar(s, theta * (l as f64 - 1.0));
                assert!((t.t[n - 1][l - 1] - want).norm() < 1e-15);
            }
        }
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        assert!((t.t[1][1] * 3f64.sqrt() - w).norm() < 1e-15);
        assert!((t.t[1][2] * 3f64.sqrt() - w.conj()).norm() < 1e-15);
    }

    #[test]
    fn decomposition_recovers_tritter() {
        let d = decompose_tritter::<f64>().unwrap();
        assert!(d.recomposed.modulus_residual() <= 1e-12);
        assert!(d.recomposed.unitarity_residual() <= 1e-12);
        assert!(d.residual <= 1e-10);
        let phi1 = (1.0f64 / 3.0).acos();
        let angles: Vec<f64> = d
            .steps
            .iter()
            .filter_map(|s| match s {
                DecompositionStep::PhaseShift { angle, .. } => Some(*angle),
                _ => None,
            })
            .collect();
        assert_eq!(angles, vec![phi1, phi1 / 2.0]);
    }

    #[test]
    fn vacuum_is_invariant() {
        let vac = ThreeModeState::<f64>::basis([0, 0, 0], [2, 2, 2]).unwrap();
        let out = apply_tritter(&vac, &tritter_matrix()).unwrap();
        assert_eq!(out.cutoffs(), [0, 0, 0]);
        assert!((out.amplitudes()[0] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn single_photon_splits_evenly() {
        let one = ThreeModeState::<f64>::basis([1, 0, 0], [1, 1, 1]).unwrap();
        let out = apply_tritter(&one, &tritter_matrix()).unwrap();
        for n in [[1, 0, 0], [0, 1, 0], [0, 0, 1]] {
            assert!((out.get(n).norm_sqr() - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn ft_closed_form_matches_transform() {
        let cut = [3, 3, 3];
        let a = ft_photocurrent_operators::<f64>(cut).unwrap();
        let b = ft_photocurrent_closed_form::<f64>(cut).unwrap();
        for s in 0..3 {
            assert!(a[s].max_abs_diff(&b[s]) <= 1e-13);
        }
        assert!(b[2].max_abs_diff(&b[1].adjoint()) == 0.0);
    }

    #[test]
    fn reduce_counts_examples() {
        let (y1, y2) = reduce_counts::<f64>([5, 5, 5], 2.0).unwrap();
        assert!(y1.abs() < 1e-14 && y2.abs() < 1e-14);

        let (y1, y2) = reduce_counts::<f64>([3, 0, 0], 3f64.sqrt()).unwrap();
        assert!((y1 - 3f64.sqrt()).abs() < 1e-14 && y2.abs() < 1e-15);

        let (y1, y2) = reduce_counts::<f64>([0, 1, 0], 1.0).unwrap();
        assert!((y1 + 0.5).abs() < 1e-15);
        assert!((y2 + 3f64.sqrt() / 2.0).abs() < 1e-15);

        assert!(reduce_counts::<f64>([1, 2, 3], 0.0).is_err());
        assert!(reduce_counts::<f64>([1, 2, 3], -1.0).is_err());
    }

    #[test]
    fn hopping_operator_bounds() {
        assert!(hopping_operator::<f64>(0, 1, [1, 1, 1]).is_err());
        assert!(hopping_operator::<f64>(1, 1, [20, 20, 20]).is_err());
    }
}
