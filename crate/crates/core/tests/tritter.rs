use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use tricoupler::detection::{min_count_cutoff, output_count_distribution, SimConfig};
use tricoupler::fock::{make_state, FockVector, StateSpec};
use tricoupler::linalg::CMatrix;
use tricoupler::tritter::*;

fn random_state(raw: &[(f64, f64)], max_total: usize) -> ThreeModeState<f64> {
    let cut = [max_total; 3];
    let mut amps = vec![Complex64::new(0.0, 0.0); basis_dim(cut)];
    let mut it = raw.iter().cycle();
    for (idx, a) in amps.iter_mut().enumerate() {
        let n = unflatten(idx, cut);
        if n.iter().sum::<usize>() <= max_total {
            let &(re, im) = it.next().unwrap();
            *a = Complex64::new(re, im);
        }
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    ThreeModeState::from_amplitudes(cut, amps).unwrap()
}

fn number_operator_on(mode: usize, cutoffs: [usize; 3]) -> CMatrix<f64> {
    hopping_operator(mode, mode, cutoffs).unwrap()
}

#[test]
fn matrix_examples() {
    let t = tritter_matrix::<f64>();
    assert!(t.unitarity_residual() < 1e-15);
    for j in 0..3 {
        for k in 0..3 {
            assert!((t.t[j][k].norm_sqr() - 1.0 / 3.0).abs() < 1e-15);
            // phase pattern theta_n = 2 pi (n - 1) / 3 down the second column
            let want = Complex64::from_polar(1.0 / 3f64.sqrt(), 2.0 * PI * (j * k) as f64 / 3.0);
            assert!((t.t[j][k] - want).norm() < 1e-15);
        }
    }
    assert!((detector_phase::<f64>(2) - 2.0 * PI / 3.0).abs() < 1e-15);
}

#[test]
fn decomposition_examples() {
    let d = decompose_tritter::<f64>().unwrap();
    assert!(d.recomposed.modulus_residual() < 1e-12);
    assert!(d.recomposed.unitarity_residual() < 1e-12);
    let t = tritter_matrix::<f64>();
    for j in 0..3 {
        for k in 0..3 {
            let v = Complex64::from_polar(1.0, d.output_phases[j])
                * d.recomposed.t[j][k]
                * Complex64::from_polar(1.0, d.input_phases[k]);
            assert!((v - t.t[j][k]).norm() < 1e-10);
        }
    }
    let bs = d.steps.iter().filter(|s| matches!(s, DecompositionStep::BeamSplitter5050 { .. })).count();
    assert_eq!(bs, 4);
}

#[test]
fn vacuum_and_single_photon() {
    let t = tritter_matrix::<f64>();
    let vac = ThreeModeState::basis([0, 0, 0], [2, 2, 2]).unwrap();
    let out = apply_tritter(&vac, &t).unwrap();
    assert_eq!(out.get([0, 0, 0]), Complex64::new(1.0, 0.0));
    let one = ThreeModeState::basis([1, 0, 0], [1, 1, 1]).unwrap();
    let out = apply_tritter(&one, &t).unwrap();
    for n in [[1, 0, 0], [0, 1, 0], [0, 0, 1]] {
        assert!((out.get(n).norm_sqr() - 1.0 / 3.0).abs() < 1e-15);
    }
    assert!((out.norm_sqr() - 1.0).abs() < 1e-15);
}

#[test]
fn coherent_inputs_map_to_coherent_outputs() {
    let t = tritter_matrix::<f64>();
    for &(re, im) in &[(2.0, 0.0), (0.6, -1.3), (-1.0, 1.0)] {
        let cut = 25;
        let a = make_state::<f64>(&StateSpec::coherent(re, im), cut).unwrap();
        let vac = FockVector::basis(0, cut).unwrap();
        let out = apply_tritter(&ThreeModeState::product(&a, &vac, &vac), &t).unwrap();
        let gamma = t.apply_to_amplitudes([Complex64::new(re, im), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]);
        let oracle: Vec<FockVector<f64>> = gamma
            .iter()
            .map(|g| make_state(&StateSpec::coherent(g.re, g.im), cut).unwrap())
            .collect();
        let mut worst: f64 = 0.0;
        for n1 in 0..=cut {
            for n2 in 0..=cut - n1 {
                for n3 in 0..=cut - n1 - n2 {
                    let want = oracle[0].amplitudes()[n1] * oracle[1].amplitudes()[n2] * oracle[2].amplitudes()[n3];
                    worst = worst.max((out.get([n1, n2, n3]) - want).norm());
                }
            }
        }
        assert!(worst < 1e-8, "{worst}");
    }
}

#[test]
fn photocurrent_examples() {
    let cut = [3, 3, 3];
    let i = photocurrent_operators::<f64>(cut).unwrap();
    let total = number_operator_on(1, cut).add(&number_operator_on(2, cut)).add(&number_operator_on(3, cut));
    assert!(i[0].add(&i[1]).add(&i[2]).max_abs_diff(&total) < 1e-14);
    let one = ThreeModeState::basis([1, 0, 0], cut).unwrap();
    for op in &i {
        let v = one.expectation(op).unwrap();
        assert!((v.re - 1.0 / 3.0).abs() < 1e-15 && v.im.abs() < 1e-15);
    }

    // <I_2> on coherent(alpha) x coherent(z) x vacuum
    let cut = [14, 14, 1];
    let (alpha, z) = (Complex64::new(0.5, 0.3), 1.0);
    let a = make_state::<f64>(&StateSpec::coherent(alpha.re, alpha.im), 14).unwrap();
    let lo = make_state::<f64>(&StateSpec::coherent(z, 0.0), 14).unwrap();
    let vac = FockVector::basis(0, 1).unwrap();
    let psi = ThreeModeState::product(&a, &lo, &vac);
    assert_eq!(psi.cutoffs(), cut);
    let i2 = &photocurrent_operators::<f64>(cut).unwrap()[1];
    let got = psi.expectation(i2).unwrap().re;
    let gamma = tritter_matrix::<f64>().apply_to_amplitudes([alpha, Complex64::new(z, 0.0), Complex64::new(0.0, 0.0)]);
    assert!((got - gamma[1].norm_sqr()).abs() < 1e-8, "{got} vs {}", gamma[1].norm_sqr());
}

#[test]
fn fourier_transformed_photocurrents() {
    let cut = [8, 8, 8];
    let built = ft_photocurrent_operators::<f64>(cut).unwrap();
    let closed = ft_photocurrent_closed_form::<f64>(cut).unwrap();
    for (a, b) in built.iter().zip(&closed) {
        assert!(a.max_abs_diff(b) <= 1e-13);
    }
    assert_eq!(closed[2], closed[1].adjoint());
    let psi = ThreeModeState::basis([2, 5, 1], cut).unwrap();
    let v = psi.expectation(&built[0]).unwrap();
    assert!((v.re - 8.0 / 3f64.sqrt()).abs() < 1e-13);
}

#[test]
fn count_reduction_examples() {
    let (y1, y2) = reduce_counts::<f64>([0, 1, 0], 1.0).unwrap();
    assert!((y1 + 0.5).abs() < 1e-15 && (y2 + 3f64.sqrt() / 2.0).abs() < 1e-15);
    let (y1, y2) = reduce_counts::<f64>([3, 0, 0], 3f64.sqrt()).unwrap();
    assert!((y1 - 3f64.sqrt()).abs() < 1e-15 && y2.abs() < 1e-15);
    let (y1, y2) = reduce_counts::<f64>([7, 7, 7], 2.0).unwrap();
    assert!(y1.abs() < 1e-14 && y2.abs() < 1e-14);
    assert!(reduce_counts::<f64>([1, 0, 0], 0.0).is_err());
    assert!(reduce_counts::<f64>([1, 0, 0], -1.0).is_err());
}

/// `Var(Y_1)` from independent Poisson counts with means `|(T v)_j|^2`.
fn poisson_variance(alpha: Complex64, z: f64) -> f64 {
    let gamma = tritter_matrix::<f64>().apply_to_amplitudes([alpha, Complex64::new(z, 0.0), Complex64::new(0.0, 0.0)]);
    (0..3)
        .map(|j| gamma[j].norm_sqr() * detector_phase::<f64>(j + 1).cos().powi(2))
        .sum::<f64>()
        / (z * z)
}

#[test]
fn quadrature_statistics_approach_strong_oscillator_limit() {
    // The mean of Y_1 is Re(alpha) at every |z|; the 1/|z| remainder shows up
    // in the second moment, which tends to 1/4 + 1/4.
    let alpha = Complex64::new(1.0, 0.0);
    let zs = [4.0, 8.0, 16.0];
    let mut errs = Vec::new();
    for &z in &zs {
        let mut cfg = SimConfig::new(z, StateSpec::coherent(alpha.re, alpha.im), StateSpec::vacuum(), 16);
        cfg.count_cutoff = min_count_cutoff(z);
        let dist = output_count_distribution::<f64>(&cfg).unwrap();
        let (mut m1, mut m2) = (0.0, 0.0);
        for (n, p) in dist.iter() {
            let (y1, _) = reduce_counts::<f64>(n, z).unwrap();
            m1 += p * y1;
            m2 += p * y1 * y1;
        }
        let var = m2 - m1 * m1;
        assert!((m1 - alpha.re).abs() < 1e-8, "mean {m1} at z={z}");
        assert!((var - poisson_variance(alpha, z)).abs() < 1e-8);
        errs.push((var - 0.5).abs());
    }
    let xs: Vec<f64> = zs.iter().map(|z| z.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let slope = tricoupler::detection::fit_slope(&xs, &ys);
    assert!((slope + 1.0).abs() <= 0.2, "slope {slope}");
}

fn amps_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 7..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn heisenberg_matches_schroedinger(raw in amps_strategy(), max_total in 1usize..5) {
        let psi = random_state(&raw, max_total);
        let currents = photocurrent_operators::<f64>(psi.cutoffs()).unwrap();
        let out = apply_tritter(&psi, &tritter_matrix()).unwrap();
        for n in 0..3 {
            let heis = psi.expectation(&currents[n]).unwrap();
            let schr = out.mean_photons(n + 1);
            prop_assert!((heis.re - schr).abs() < 1e-10 && heis.im.abs() < 1e-10);
        }
    }

    #[test]
    fn sectors_are_conserved(raw in amps_strategy(), max_total in 1usize..7) {
        let psi = random_state(&raw, max_total);
        let out = apply_tritter(&psi, &tritter_matrix()).unwrap();
        let a = psi.sector_weights();
        let b = out.sector_weights();
        for k in 0..a.len().max(b.len()) {
            let x = a.get(k).copied().unwrap_or(0.0);
            let y = b.get(k).copied().unwrap_or(0.0);
            prop_assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn dc_shift_does_not_move_outcome(n in prop::array::uniform3(0usize..200), k in 0usize..100, z in 0.5..20.0f64) {
        let (a1, a2) = reduce_counts::<f64>(n, z).unwrap();
        let (b1, b2) = reduce_counts::<f64>([n[0] + k, n[1] + k, n[2] + k], z).unwrap();
        prop_assert!((a1 - b1).abs() < 1e-11 && (a2 - b2).abs() < 1e-11);
    }
}
