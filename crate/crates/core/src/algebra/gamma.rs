use std::f64::consts::PI;

use num_complex::Complex64;

// Lanczos coefficients for g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `sin(pi * x)` for real `x`, exact at the integers.
fn sin_pi_real(x: f64) -> f64 {
    let n = x.round();
    let f = x - n;
    let s = (PI * f).sin();
    if n.rem_euclid(2.0) == 0.0 {
        s
    } else {
        -s
    }
}

fn cos_pi_real(x: f64) -> f64 {
    let n = x.round();
    let f = x - n;
    let c = (PI * f).cos();
    if n.rem_euclid(2.0) == 0.0 {
        c
    } else {
        -c
    }
}

/// `sin(pi * z)` with the real part reduced before multiplying by pi.
pub fn sin_pi(z: Complex64) -> Complex64 {
    let (sh, ch) = ((PI * z.im).sinh(), (PI * z.im).cosh());
    Complex64::new(sin_pi_real(z.re) * ch, cos_pi_real(z.re) * sh)
}

/// `ln Γ(z)` for `Re z >= 0.5` (principal branch of the Lanczos form,
/// not the analytically continued log-gamma).
fn ln_gamma_right(z: Complex64) -> Complex64 {
    let x = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Reciprocal gamma function `1/Γ(z)`.
///
/// Entire: returns exactly zero at the non-positive integers. Uses the
/// Lanczos approximation on `Re z >= 1/2` and the reflection formula
/// `1/Γ(z) = Γ(1-z) sin(πz)/π` elsewhere.
pub fn reciprocal_gamma(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Complex64::new(0.0, 0.0);
    }
    if z.re >= 0.5 {
        (-ln_gamma_right(z)).exp()
    } else {
        sin_pi(z) / PI * ln_gamma_right(1.0 - z).exp()
    }
}
