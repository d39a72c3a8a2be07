use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

const ORDER: usize = 24;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn legendre_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        (0..n)
            .map(|i| {
                let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 1.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for l in 2..=n {
                        let p2 = ((2 * l - 1) as f64 * x * p1 - (l - 1) as f64 * p0) / l as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    })
}

/// `∫ f` along the straight segment `a → b`, composite Gauss–Legendre
/// with `panels` equal panels.
pub fn segment_integral(a: Complex64, b: Complex64, panels: usize, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
    let rule = legendre_rule();
    let panel = (b - a) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = a + panel * p as f64;
        let mid = lo + panel * 0.5;
        for &(x, w) in rule {
            acc += f(mid + panel * (0.5 * x)) * w;
        }
    }
    acc * panel * 0.5
}
