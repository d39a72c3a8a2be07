use std::f64::consts::PI;

use num_complex::Complex64;

/// `exp(2iπ p / k)` with the exponent reduced modulo `k` first.
pub fn root_of_unity(p: i64, k: usize) -> Complex64 {
    let r = p.rem_euclid(k as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r / k as f64)
}

/// Solves `V x = rhs` for `V = [exp(2iπ m j / k)]_{j,m}` using the explicit
/// inverse `V⁻¹ = (1/k) [exp(−2iπ m j / k)]`.
pub fn vandermonde_solve(k: usize, rhs: &[Complex64]) -> Vec<Complex64> {
    assert!(k >= 1, "vandermonde_solve needs k >= 1");
    assert_eq!(rhs.len(), k, "rhs must have k entries");
    (0..k)
        .map(|m| {
            let s: Complex64 = rhs
                .iter()
                .enumerate()
                .map(|(j, r)| root_of_unity(-((m * j) as i64), k) * r)
                .sum();
            s / k as f64
        })
        .collect()
}

/// `V x`, the forward map inverted by [`vandermonde_solve`].
pub fn vandermonde_apply(k: usize, x: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(x.len(), k);
    (0..k)
        .map(|j| {
            x.iter()
                .enumerate()
                .map(|(m, v)| root_of_unity((m * j) as i64, k) * v)
                .sum()
        })
        .collect()
}
