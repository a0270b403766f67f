use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use tricoupler::fock::*;
use tricoupler::phasespace::*;
use tricoupler::FockOperator64;

mod common;

fn rho(spec: StateSpec, cutoff: usize) -> FockOperator64 {
    make_state::<f64>(&spec, cutoff).unwrap().density_matrix()
}

/// `int_{[-R,R]^2} d^2 lambda / pi  chi(lambda) e^{conj(lambda) alpha - lambda conj(alpha)}`
/// with an independent Gauss-Legendre rule of `2 * 121` points per axis.
fn wigner_oracle(chi: impl Fn(Complex64) -> Complex64, alpha: Complex64) -> f64 {
    let (x, w) = gauss_legendre(242);
    let r = 6.0;
    let mut acc = Complex64::new(0.0, 0.0);
    for (xu, wu) in x.iter().zip(&w) {
        for (xv, wv) in x.iter().zip(&w) {
            let l = Complex64::new(xu * r, xv * r);
            let kernel = (l.conj() * alpha - l * alpha.conj()).exp();
            acc += chi(l) * kernel * (wu * wv * r * r);
        }
    }
    acc.re / PI
}

#[test]
fn wigner_examples() {
    let q = QuadratureSpec::default();
    let zero = Complex64::new(0.0, 0.0);
    let vac = rho(StateSpec::vacuum(), 20);
    let one = rho(StateSpec::Number { n: 1 }, 20);
    let cases = [
        (&vac, -1.0, 1.0, 1e-6),
        (&vac, 0.0, 2.0, 1e-6),
        (&one, 0.0, -2.0, 1e-5),
    ];
    for (state, s, expected, tol) in cases {
        let got = wigner_s(state, zero, s, &q).unwrap();
        let n1 = (state.get(1, 1).re > 0.5) as u8 as f64;
        let oracle = wigner_oracle(
            |l| {
                let m = l.norm_sqr();
                Complex64::new((1.0 - n1 * m) * (-m / 2.0).exp() * (s * m / 2.0).exp(), 0.0)
            },
            zero,
        );
        assert!((oracle - expected).abs() < tol, "oracle {oracle}");
        assert!((got.value - expected).abs() < tol, "s={s}: {}", got.value);
        assert!(got.imag_residual.abs() < 1e-8);
    }
}

#[test]
fn wigner_minus_one_is_pi_q() {
    let q = QuadratureSpec::default();
    let states = [
        rho(StateSpec::coherent(0.5, -0.5), 30),
        rho(StateSpec::Number { n: 2 }, 30),
        rho(StateSpec::squeezed_with_mean_photons(0.5), 30),
    ];
    let points = [Complex64::new(0.0, 0.0), Complex64::new(0.7, -0.4), Complex64::new(-1.2, 1.0)];
    for r in &states {
        let w = WignerEvaluator::new(r, -1.0, &q).unwrap();
        for &a in &points {
            let lhs = w.at(a).unwrap().value;
            let rhs = PI * q_function(r, a).unwrap().value;
            assert!((lhs - rhs).abs() < 1e-6, "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn wigner_is_normalized() {
    // int d^2 alpha / pi  W_s = 1
    let q = QuadratureSpec::default();
    let r = rho(StateSpec::Number { n: 1 }, 20);
    for s in [0.0, -0.5, -1.0] {
        let w = WignerEvaluator::new(&r, s, &q).unwrap();
        let spec = GridSpec::square(5.0, 81).unwrap();
        let g = eval_grid(|a| w.at(a).unwrap().value, &spec, AxisLabel::AlphaPlane, DEFAULT_GRID_BUDGET).unwrap();
        assert!((g.integral() / PI - 1.0).abs() < 1e-3, "s={s}: {}", g.integral() / PI);
    }
}

#[test]
fn positive_s_is_rejected() {
    let r = rho(StateSpec::vacuum(), 5);
    let err = wigner_s(&r, Complex64::new(0.0, 0.0), 0.5, &QuadratureSpec::default()).unwrap_err();
    assert!(matches!(err, tricoupler::Error::UnsupportedParameter(_)));
}

#[test]
fn characteristic_function_of_vacuum() {
    let r = rho(StateSpec::vacuum(), 40);
    let chi = characteristic_fn(&r, Complex64::new(1.0, 0.0), 0.0).unwrap();
    let d = common::expm_generator(Complex64::new(1.0, 0.0), 60);
    assert!((chi.value - d[0][0]).norm() < 1e-10);
    assert!((chi.value.re - (-0.5f64).exp()).abs() < 1e-10);
}

#[test]
fn q_function_grid_peak() {
    let r = rho(StateSpec::vacuum(), 20);
    let spec = GridSpec::square(2.0, 41).unwrap();
    let g = eval_grid(|a| q_function(&r, a).unwrap().value, &spec, AxisLabel::AlphaPlane, DEFAULT_GRID_BUDGET).unwrap();
    let (i, j, v) = g.argmax();
    assert_eq!((i, j), (20, 20));
    assert!((v - 1.0 / PI).abs() < 1e-15);
}

#[test]
fn k_sp_examples() {
    let beta = rho(StateSpec::coherent(1.0, 0.0), 40);
    let vac = rho(StateSpec::vacuum(), 40);
    let one = rho(StateSpec::Number { n: 1 }, 40);
    let a1 = Complex64::new(1.0, 0.0);
    assert!(k_sp_trace(&beta, &one, a1).unwrap().value.abs() < 1e-9);
    let v = k_sp_trace(&vac, &vac, Complex64::new(2.0, 0.0)).unwrap().value;
    assert!((v - (-4.0f64).exp() / PI).abs() < 1e-9);
    for a in [Complex64::new(0.3, 0.2), Complex64::new(-1.0, 2.0)] {
        let lhs = k_sp_trace(&beta, &vac, a).unwrap().value;
        let rhs = q_function(&beta, a).unwrap().value;
        assert!((lhs - rhs).abs() < 1e-10);
    }
    let conv = k_sp_convolution(&beta, &vac, a1, &QuadratureSpec::default()).unwrap();
    assert!((conv.value - 1.0 / PI).abs() < 1e-4);
}

#[test]
fn routes_agree_on_heterogeneous_pairs() {
    let q = QuadratureSpec::default();
    let pairs = [
        (rho(StateSpec::coherent(0.5, 0.5), 30), rho(StateSpec::Number { n: 2 }, 30)),
        (rho(StateSpec::Number { n: 1 }, 30), rho(StateSpec::squeezed_with_mean_photons(0.5), 30)),
        (
            FockOperator::mixture(&[
                (0.5, make_state(&StateSpec::vacuum(), 30).unwrap()),
                (0.5, make_state(&StateSpec::Number { n: 1 }, 30).unwrap()),
            ])
            .unwrap(),
            rho(StateSpec::coherent(-0.5, 0.0), 30),
        ),
    ];
    let points = [Complex64::new(0.0, 0.0), Complex64::new(1.0, -0.5), Complex64::new(-1.5, 1.5)];
    for (s, p) in &pairs {
        let conv = KspConvolution::new(s, p, &q).unwrap();
        for &a in &points {
            let t = k_sp_trace(s, p, a).unwrap().value;
            let c = conv.at(a).unwrap().value;
            assert!((t - c).abs() < 1e-4, "{t} vs {c} at {a}");
        }
    }
}

#[test]
fn k_sp_normalized_and_positive() {
    let beta = make_state::<f64>(&StateSpec::coherent(1.0, 0.0), 40).unwrap();
    let spec = GridSpec::square(6.0, 121).unwrap();
    let probes = [
        (StateSpec::vacuum(), spec),
        (StateSpec::Number { n: 1 }, spec),
        (StateSpec::squeezed_with_mean_photons(1.0), GridSpec::new(-6.0, 8.0, -7.0, 7.0, 141, 141).unwrap()),
    ];
    for (probe, window) in probes {
        let p = make_state::<f64>(&probe, 40).unwrap();
        let g = eval_grid(
            |a| {
                let v = k_sp_trace_pure(&beta, &p, a).unwrap();
                assert!(v.imag_residual.abs() <= 1e-8);
                v.value
            },
            &window,
            AxisLabel::AlphaPlane,
            DEFAULT_GRID_BUDGET,
        )
        .unwrap();
        assert!((g.integral() - 1.0).abs() < 1e-3, "{probe:?}: {}", g.integral());
        assert!(g.min() >= -1e-10);
    }
}

#[test]
fn pure_and_density_routes_match() {
    let s = make_state::<f64>(&StateSpec::coherent(0.3, -0.8), 25).unwrap();
    let p = make_state::<f64>(&StateSpec::squeezed_with_mean_photons(0.7), 25).unwrap();
    for a in [Complex64::new(0.1, 0.1), Complex64::new(-1.0, 0.4)] {
        let x = k_sp_trace_pure(&s, &p, a).unwrap().value;
        let y = k_sp_trace(&s.density_matrix(), &p.density_matrix(), a).unwrap().value;
        assert!((x - y).abs() < 1e-12);
    }
}

fn small_spec() -> impl Strategy<Value = StateSpec> {
    prop_oneof![
        (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| StateSpec::coherent(re, im)),
        (0usize..3).prop_map(|n| StateSpec::Number { n }),
        (0.0..0.5f64).prop_map(|r| StateSpec::SqueezedVacuum { r }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn swap_symmetry(s in small_spec(), p in small_spec(), re in -1.5..1.5f64, im in -1.5..1.5f64) {
        let q = QuadratureSpec::default();
        let (rs, rp) = (rho(s, 16), rho(p, 16));
        let a = Complex64::new(re, im);
        let sp = k_sp_convolution(&rs, &rp, a, &q).unwrap().value;
        let ps = k_sp_convolution(&rp, &rs, -a, &q).unwrap().value;
        prop_assert!((sp - ps).abs() < 1e-6, "{} vs {}", sp, ps);
    }

    #[test]
    fn ordering_ratio_is_exact(re in -2.0..2.0f64, im in -2.0..2.0f64, s in -2.0..0.0f64) {
        let r = rho(StateSpec::coherent(0.4, 0.1), 20);
        let l = Complex64::new(re, im);
        let a = characteristic_fn(&r, l, s).unwrap().value;
        let b = characteristic_fn(&r, l, 0.0).unwrap().value;
        let want = (s * l.norm_sqr() / 2.0).exp();
        prop_assert!((a - b * want).norm() <= 1e-15 * b.norm().max(1e-300));
    }

    #[test]
    fn k_sp_trace_nonnegative(s in small_spec(), p in small_spec(), re in -3.0..3.0f64, im in -3.0..3.0f64) {
        let v = k_sp_trace(&rho(s, 20), &rho(p, 20), Complex64::new(re, im)).unwrap();
        prop_assert!(v.value >= -1e-10);
        prop_assert!(v.imag_residual.abs() <= 1e-8);
    }
}
