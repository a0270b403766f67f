#![allow(dead_code)]

use num_complex::Complex64;

pub type Dense = Vec<Vec<Complex64>>;

pub fn zeros(n: usize) -> Dense {
    vec![vec![Complex64::new(0.0, 0.0); n]; n]
}

pub fn mul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// Scaling-and-squaring Taylor exponential of `alpha a^dag - conj(alpha) a`
/// on `0..=cutoff`, built from the bare sqrt(n) couplings.
pub fn expm_generator(alpha: Complex64, cutoff: usize) -> Dense {
    let n = cutoff + 1;
    let mut g = zeros(n);
    for k in 1..n {
        let s = (k as f64).sqrt();
        g[k][k - 1] = alpha * s;
        g[k - 1][k] = -alpha.conj() * s;
    }
    let norm: f64 = g.iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = (norm.max(1.0).log2().ceil() as u32) + 4;
    let scale = 0.5f64.powi(squarings as i32);
    for row in g.iter_mut() {
        for z in row.iter_mut() {
            *z *= scale;
        }
    }
    let mut result = zeros(n);
    let mut term = zeros(n);
    for i in 0..n {
        result[i][i] = Complex64::new(1.0, 0.0);
        term[i][i] = Complex64::new(1.0, 0.0);
    }
    for k in 1..30 {
        term = mul(&term, &g);
        for row in term.iter_mut() {
            for z in row.iter_mut() {
                *z /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = mul(&result, &result);
    }
    result
}
