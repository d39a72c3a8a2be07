use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Univariate polynomial, `coeffs[i]` multiplies `x^i`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly1 {
    pub coeffs: Vec<Complex64>,
}

impl Poly1 {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: Complex64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// Highest power with a nonzero coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| *c != ZERO)
    }

    pub fn coeff(&self, i: usize) -> Complex64 {
        self.coeffs.get(i).copied().unwrap_or(ZERO)
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * x + c)
    }

    /// Truncation modulo `x^(order+1)`.
    pub fn jet(&self, order: usize) -> Poly1 {
        Poly1::new(self.coeffs.iter().take(order + 1).copied().collect())
    }
}

/// Sparse bivariate polynomial `Σ c_{m,n} x^m y^n`.
///
/// Never truncated implicitly; evaluation is the exact finite sum of the
/// stored monomials.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BiSeries {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl BiSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, u32, Complex64)>,
    {
        let mut s = Self::new();
        for (m, n, c) in terms {
            s.add_term(m, n, c);
        }
        s
    }

    pub fn monomial(m: u32, n: u32, c: Complex64) -> Self {
        Self::from_terms([(m, n, c)])
    }

    /// Adds `c x^m y^n`; exact zeros are dropped.
    pub fn add_term(&mut self, m: u32, n: u32, c: Complex64) {
        let entry = self.terms.entry((m, n)).or_insert(ZERO);
        *entry += c;
        if *entry == ZERO {
            self.terms.remove(&(m, n));
        }
    }

    pub fn coeff(&self, m: u32, n: u32) -> Complex64 {
        self.terms.get(&(m, n)).copied().unwrap_or(ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, Complex64)> + '_ {
        self.terms.iter().map(|(&(m, n), &c)| (m, n, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn y_order(&self) -> u32 {
        self.terms.keys().map(|&(_, n)| n).max().unwrap_or(0)
    }

    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(m, n), &c)| c * x.powu(m) * y.powu(n))
            .sum()
    }

    /// `x^s · self`.
    pub fn shift_x(&self, s: u32) -> BiSeries {
        BiSeries::from_terms(self.terms().map(|(m, n, c)| (m + s, n, c)))
    }

    pub fn scale(&self, a: Complex64) -> BiSeries {
        BiSeries::from_terms(self.terms().map(|(m, n, c)| (m, n, c * a)))
    }

    pub fn add(&self, other: &BiSeries) -> BiSeries {
        let mut out = self.clone();
        for (m, n, c) in other.terms() {
            out.add_term(m, n, c);
        }
        out
    }

    /// Terms with `n <= max_n`.
    pub fn truncate_y(&self, max_n: u32) -> BiSeries {
        BiSeries::from_terms(self.terms().filter(|&(_, n, _)| n <= max_n))
    }

    /// The restriction `x ↦ s(x, 0)`.
    pub fn axis_part(&self) -> Poly1 {
        let deg = self
            .terms
            .keys()
            .filter(|&&(_, n)| n == 0)
            .map(|&(m, _)| m as usize)
            .max();
        let mut coeffs = vec![ZERO; deg.map_or(0, |d| d + 1)];
        for (m, n, c) in self.terms() {
            if n == 0 {
                coeffs[m as usize] += c;
            }
        }
        Poly1::new(coeffs)
    }

    /// Terms with `n >= 1`.
    pub fn transverse_part(&self) -> BiSeries {
        BiSeries::from_terms(self.terms().filter(|&(_, n, _)| n >= 1))
    }

    pub fn dense(&self) -> DenseBiSeries {
        DenseBiSeries::from_series(self)
    }
}

/// Row-major dense form of a [`BiSeries`] for hot evaluation loops:
/// `rows[n]` holds the x-polynomial multiplying `y^n`.
#[derive(Debug, Clone, Default)]
pub struct DenseBiSeries {
    rows: Vec<Vec<Complex64>>,
}

impl DenseBiSeries {
    pub fn from_series(s: &BiSeries) -> Self {
        let n_rows = s.terms().map(|(_, n, _)| n as usize + 1).max().unwrap_or(0);
        let mut rows: Vec<Vec<Complex64>> = vec![Vec::new(); n_rows];
        for (m, n, c) in s.terms() {
            let row = &mut rows[n as usize];
            if row.len() <= m as usize {
                row.resize(m as usize + 1, ZERO);
            }
            row[m as usize] += c;
        }
        Self { rows }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.iter().all(|c| *c == ZERO))
    }

    #[inline]
    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        let mut acc = ZERO;
        for row in self.rows.iter().rev() {
            let px = row.iter().rev().fold(ZERO, |a, c| a * x + c);
            acc = acc * y + px;
        }
        acc
    }
}

/// Per-sector coefficient table `(j, n) ↦ c`, `j ∈ 0..k`, `n ∈ 1..=degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    k: usize,
    degree: usize,
    entries: Vec<Vec<Complex64>>,
}

impl CoeffTable {
    pub fn zeros(k: usize, degree: usize) -> Self {
        Self {
            k,
            degree,
            entries: vec![vec![ZERO; degree]; k],
        }
    }

    pub fn from_fn(k: usize, degree: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut t = Self::zeros(k, degree);
        for j in 0..k {
            for n in 1..=degree {
                t.set(j, n, f(j, n));
            }
        }
        t
    }

    /// Builds a table from per-sector rows, row `j` holding orders `1..=degree`.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::InvalidInput("coefficient table has no sectors".into()));
        }
        let degree = rows[0].len();
        if rows.iter().any(|r| r.len() != degree) {
            return Err(Error::InvalidInput(
                "coefficient table rows have different lengths".into(),
            ));
        }
        Ok(Self { k, degree, entries: rows })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient of `h^n` in sector `j`; orders beyond the table are zero.
    pub fn get(&self, j: usize, n: usize) -> Complex64 {
        assert!(n >= 1, "coefficient tables start at order 1");
        self.entries[j % self.k].get(n - 1).copied().unwrap_or(ZERO)
    }

    pub fn set(&mut self, j: usize, n: usize, c: Complex64) {
        assert!(n >= 1 && n <= self.degree, "order {n} outside 1..={}", self.degree);
        self.entries[j][n - 1] = c;
    }

    pub fn row(&self, j: usize) -> &[Complex64] {
        &self.entries[j]
    }

    pub fn rows(&self) -> &[Vec<Complex64>] {
        &self.entries
    }

    pub fn map(&self, mut f: impl FnMut(usize, usize, Complex64) -> Complex64) -> CoeffTable {
        CoeffTable::from_fn(self.k, self.degree, |j, n| f(j, n, self.get(j, n)))
    }

    pub fn max_abs_diff(&self, other: &CoeffTable) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.k.max(other.k) {
            for n in 1..=self.degree.max(other.degree) {
                let a = if j < self.k { self.get(j, n) } else { ZERO };
                let b = if j < other.k { other.get(j, n) } else { ZERO };
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }
}

/// Taylor coefficients of `log(ψ(h)/h) − log ψ'(0)` at orders `1..=degree`.
///
/// `psi[i]` is the coefficient of `h^(i+1)`, so `psi[0] = ψ'(0)`.
pub fn series_log_ratio(psi: &[Complex64], degree: usize) -> Result<Vec<Complex64>> {
    let lead = psi.first().copied().unwrap_or(ZERO);
    if lead == ZERO {
        return Err(Error::NotADiffeomorphism);
    }
    // q(h) = ψ(h) / (ψ_1 h) = 1 + Σ q_i h^i
    let q = |i: usize| -> Complex64 { psi.get(i).map_or(ZERO, |c| c / lead) };
    // q L' = q'  ⇒  n l_n = n q_n − Σ_{i=1}^{n-1} i l_i q_{n-i}
    let mut l = vec![ZERO; degree + 1];
    for n in 1..=degree {
        let mut acc = q(n) * n as f64;
        for i in 1..n {
            acc -= l[i] * q(n - i) * i as f64;
        }
        l[n] = acc / n as f64;
    }
    Ok(l[1..].to_vec())
}

/// Taylor coefficients of `exp(L(h))` at orders `0..=degree`, for `L` given
/// at orders `1..=degree` (`l[i]` multiplies `h^(i+1)`).
pub fn series_exp(l: &[Complex64], degree: usize) -> Vec<Complex64> {
    let lc = |i: usize| -> Complex64 { if i == 0 { ZERO } else { l.get(i - 1).copied().unwrap_or(ZERO) } };
    let mut e = vec![ZERO; degree + 1];
    e[0] = Complex64::new(1.0, 0.0);
    for n in 1..=degree {
        let mut acc = ZERO;
        for i in 1..=n {
            acc += lc(i) * e[n - i] * i as f64;
        }
        e[n] = acc / n as f64;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn biseries_evaluation() {
        let one = BiSeries::monomial(0, 0, c(1.0, 0.0));
        assert_eq!(one.eval(c(3.0, 1.0), c(-2.0, 0.5)), c(1.0, 0.0));
        let xy = BiSeries::monomial(1, 1, c(1.0, 0.0));
        assert_eq!(xy.eval(c(2.0, 0.0), c(3.0, 0.0)), c(6.0, 0.0));
        let yy2 = BiSeries::from_terms([(0, 1, c(1.0, 0.0)), (0, 2, c(1.0, 0.0))]);
        assert_eq!(yy2.eval(c(7.0, 0.0), c(0.5, 0.0)), c(0.75, 0.0));
    }

    #[test]
    fn dense_matches_sparse() {
        let s = BiSeries::from_terms([
            (0, 1, c(1.0, 0.5)),
            (3, 1, c(-0.2, 0.0)),
            (1, 2, c(0.0, 2.0)),
            (0, 0, c(4.0, 0.0)),
            (2, 4, c(0.3, -0.3)),
        ]);
        let d = s.dense();
        for &(x, y) in &[(c(0.3, 0.1), c(-0.2, 0.4)), (c(-5.0, 0.0), c(0.1, 0.0)), (c(1.0, 1.0), c(2.0, -1.0))] {
            assert!((s.eval(x, y) - d.eval(x, y)).norm() < 1e-13 * s.eval(x, y).norm().max(1.0));
        }
    }

    #[test]
    fn poly_degree_ignores_trailing_zeros() {
        let p = Poly1::new(vec![c(1.0, 0.0), c(0.0, 2.0), c(0.0, 0.0)]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(Poly1::new(vec![]).degree(), None);
        assert_eq!(p.eval(c(2.0, 0.0)), c(1.0, 4.0));
    }

    #[test]
    fn log_ratio_of_identity_is_zero() {
        let l = series_log_ratio(&[c(1.0, 0.0)], 6).unwrap();
        assert!(l.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn log_ratio_of_log_one_plus_h() {
        // ψ = h + h², log(1 + h) = h − h²/2 + h³/3 − …
        let l = series_log_ratio(&[c(1.0, 0.0), c(1.0, 0.0)], 6).unwrap();
        for (i, v) in l.iter().enumerate() {
            let n = (i + 1) as f64;
            let expected = if i % 2 == 0 { 1.0 / n } else { -1.0 / n };
            assert!((v - c(expected, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn log_ratio_of_bernoulli_transition() {
        // ψ(h) = h / (1 − 2iπh): coefficient of h^n is (2iπ)^n / n.
        let a = c(0.0, 2.0 * PI);
        let psi: Vec<Complex64> = (0..8).map(|i| a.powu(i as u32)).collect();
        let l = series_log_ratio(&psi, 7).unwrap();
        for (i, v) in l.iter().enumerate() {
            let n = (i + 1) as u32;
            let expected = a.powu(n) / n as f64;
            assert!((v - expected).norm() < 1e-12 * expected.norm());
        }
    }

    #[test]
    fn log_ratio_rejects_non_diffeomorphism() {
        assert!(matches!(
            series_log_ratio(&[c(0.0, 0.0), c(1.0, 0.0)], 3),
            Err(Error::NotADiffeomorphism)
        ));
    }

    proptest! {
        #[test]
        fn log_ratio_inverts_exp(coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..8)) {
            let l: Vec<Complex64> = coeffs.iter().map(|&(a, b)| c(a, b)).collect();
            let d = l.len();
            let e = series_exp(&l, d);
            // ψ(h) = h·exp(L(h)): ψ coefficients start at h^1 with e_0 = 1.
            let back = series_log_ratio(&e, d).unwrap();
            for (x, y) in back.iter().zip(&l) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }
    }
}
