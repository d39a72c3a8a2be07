//! Normal forms with prescribed moduli.
//!
//! The normal form is `P/(1 + xPG) · (x^{k+1}∂x + y(1 + μx^k + xR)∂y)` with
//! `R(x, x^σ y) = Σ R_n(x) x^{σn} yⁿ` and the same shape for `G`, each
//! `R_n, G_n` of degree `< k`. The period of `x^{nσ+m+1} yⁿ` starts at order
//! `hⁿ` with a coefficient that does not depend on `R`, so both moduli are
//! block triangular in `n` and are inverted one order at a time.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::algebra::{root_of_unity, series_log_ratio, vandermonde_solve, BiSeries, CoeffTable};
use crate::error::{Error, Result};
use crate::geometry::FormalClass;
use crate::leaf::{DulacField, Integrand, SeriesPayload, Unit};
use crate::period::{model_coeff, orbital_modulus, sample_on_grids, temporal_modulus, Numerics, SectorGrids};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coefficients `R_{m,n}`, `G_{m,n}` (`0 ≤ m < k`, `n ≥ 1`) of a normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormData {
    pub class: FormalClass,
    /// `r[n−1][m]` is the coefficient of `x^{m+σn} yⁿ` in `R`.
    pub r: Vec<Vec<Complex64>>,
    /// Same layout for `G`.
    pub g: Vec<Vec<Complex64>>,
}

fn layout_series(rows: &[Vec<Complex64>], sigma: u32, n_max: usize) -> BiSeries {
    let mut s = BiSeries::new();
    for (i, row) in rows.iter().enumerate().take(n_max) {
        let n = i as u32 + 1;
        for (m, c) in row.iter().enumerate() {
            s.add_term(m as u32 + sigma * n, n, *c);
        }
    }
    s
}

impl NormalFormData {
    /// The formal model of `class`: `R = G = 0`.
    pub fn model(class: FormalClass) -> Self {
        Self {
            class,
            r: Vec::new(),
            g: Vec::new(),
        }
    }

    pub fn r_coeff(&self, m: usize, n: usize) -> Complex64 {
        self.r.get(n - 1).and_then(|row| row.get(m)).copied().unwrap_or(ZERO)
    }

    pub fn g_coeff(&self, m: usize, n: usize) -> Complex64 {
        self.g.get(n - 1).and_then(|row| row.get(m)).copied().unwrap_or(ZERO)
    }

    /// `R` in the field's coordinates.
    pub fn r_series(&self) -> BiSeries {
        layout_series(&self.r, self.class.sigma, usize::MAX)
    }

    /// `R̃ = Σ_{n ≤ n_max} R_n(x) x^{σn} yⁿ`.
    pub fn r_truncated(&self, n_max: usize) -> BiSeries {
        layout_series(&self.r, self.class.sigma, n_max)
    }

    pub fn g_series(&self) -> BiSeries {
        layout_series(&self.g, self.class.sigma, usize::MAX)
    }

    /// The field `P/(1 + xPG) · X_R`.
    pub fn field(&self) -> Result<DulacField> {
        let unit = Unit::NormalForm {
            p: self.class.p.clone(),
            g: self.g_series(),
        };
        DulacField::with_class(self.class.clone(), unit, self.r_series())
    }
}

/// Solves `Σ_m c^j_{nσ+m+1,n} x_m = rhs_j` for all `j`; the matrix factors as
/// `diag(δ^{(nσ+1)j}) · V · diag(c⁰_{nσ+m+1,n})`.
fn solve_block(class: &FormalClass, n: usize, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let k = class.k as usize;
    let lead = n as i64 * class.sigma as i64 + 1;
    let twisted: Vec<Complex64> = rhs
        .iter()
        .enumerate()
        .map(|(j, b)| b * root_of_unity(-lead * j as i64, k))
        .collect();
    let z = vandermonde_solve(k, &twisted);
    z.iter()
        .enumerate()
        .map(|(m, zm)| {
            let index = n as u32 * class.sigma + m as u32 + 1;
            let d = model_coeff(class.k, class.mu, index, n as u32, 0)?;
            if d == ZERO {
                Err(Error::ResonantIndex { m: index, n: n as u32 })
            } else {
                Ok(zm / d)
            }
        })
        .collect()
}

fn column(table: &CoeffTable, n: usize) -> Vec<Complex64> {
    (0..table.k()).map(|j| table.get(j, n)).collect()
}

fn check_table(table: &CoeffTable, k: u32) -> Result<()> {
    if table.k() != k as usize {
        return Err(Error::InvalidInput(format!(
            "target has {} sectors, expected k = {k}",
            table.k()
        )));
    }
    if table.degree() == 0 {
        return Err(Error::InvalidInput("target degree must be at least 1".into()));
    }
    Ok(())
}

/// Orbital normal form `X_R` whose modulus is `target` up to its degree.
pub fn realize_orbital(k: u32, mu: Complex64, target: &CoeffTable, numerics: &Numerics) -> Result<NormalFormData> {
    let class = FormalClass::orbital(k, mu)?;
    check_table(target, k)?;
    let degree = target.degree();
    numerics.validate(k, degree)?;
    let grids = if degree > 1 {
        SectorGrids::all(k, mu, numerics)?
    } else {
        Vec::new()
    };
    let mut nf = NormalFormData::model(class);
    for n in 1..=degree {
        let mut rhs: Vec<Complex64> = column(target, n).iter().map(|a| -a).collect();
        let partial = nf.r_truncated(n - 1);
        if !partial.is_empty() {
            // φ_n(R̃) = [hⁿ] 𝒯_{R̃}(−xR̃); the new block must supply α_n − φ_n(R̃).
            let field = DulacField::with_class(nf.class.clone(), Unit::one(), partial)?;
            for grid in &grids {
                let s = sample_on_grids(&field, grid, &[], numerics)?;
                rhs[grid.j] += s.orbital_coeffs(n)?[n];
            }
        }
        nf.r.push(solve_block(&nf.class, n, &rhs)?);
    }
    Ok(nf)
}

/// Temporal part `G` such that `P/(1 + xPG)·X_R` has temporal modulus `target`.
/// The orbital part of `nf` is kept and its `G` is replaced.
pub fn realize_temporal(nf: &NormalFormData, target: &CoeffTable, numerics: &Numerics) -> Result<NormalFormData> {
    let class = &nf.class;
    let k = class.k;
    check_table(target, k)?;
    let degree = target.degree();
    numerics.validate(k, degree)?;
    // c[j][(a, m)][n]: period coefficients of x^{σa+1+m} y^a along X_R.
    let basis: Vec<(usize, usize)> = (1..degree).flat_map(|a| (0..k as usize).map(move |m| (a, m))).collect();
    let mut lower_periods: Vec<Vec<Vec<Complex64>>> = Vec::new();
    if !basis.is_empty() {
        let field = DulacField::with_class(class.clone(), Unit::one(), nf.r_series())?;
        let payloads: Vec<SeriesPayload> = basis
            .iter()
            .map(|&(a, m)| {
                let power = class.sigma * a as u32 + 1 + m as u32;
                SeriesPayload::new(BiSeries::monomial(power, a as u32, Complex64::new(1.0, 0.0)))
            })
            .collect();
        let refs: Vec<&dyn Integrand> = payloads.iter().map(|p| p as &dyn Integrand).collect();
        for grid in SectorGrids::all(k, class.mu, numerics)? {
            let s = sample_on_grids(&field, &grid, &refs, numerics)?;
            let per_payload = (0..refs.len()).map(|p| s.coeffs(p, degree)).collect::<Result<Vec<_>>>()?;
            lower_periods.push(per_payload);
        }
    }
    let mut g: Vec<Vec<Complex64>> = Vec::with_capacity(degree);
    for n in 1..=degree {
        let rhs: Vec<Complex64> = (0..k as usize)
            .map(|j| {
                let mut e = ZERO;
                for (p, &(a, m)) in basis.iter().enumerate() {
                    if a < n {
                        e += g[a - 1][m] * lower_periods[j][p][n];
                    }
                }
                target.get(j, n) - e
            })
            .collect();
        g.push(solve_block(class, n, &rhs)?);
    }
    Ok(NormalFormData {
        class: class.clone(),
        r: nf.r.clone(),
        g,
    })
}

/// Outcome of the quadrature-integrability test on an orbital modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityVerdict {
    pub integrable_form: bool,
    /// Order of the first non-negligible coefficient; 0 for a null modulus.
    pub p: usize,
    /// `α_j` of the fitted form, per sector.
    pub alpha: Vec<Complex64>,
    /// Largest deviation from the fitted form, weighted by `ρⁿ`.
    pub residual: f64,
    /// `+1` when the fit is `(1/p)log(1 − αhᵖ)`, `−1` for its opposite.
    pub orientation: i8,
}

/// Tests whether every `φʲ` has the form `±(1/p)log(1 − α_j hᵖ)`.
///
/// Deviations at order `n` are weighted by `circle_radius^n`, the precision
/// profile of coefficients extracted on that circle.
pub fn integrability_test(target: &CoeffTable, tol: f64, circle_radius: f64) -> IntegrabilityVerdict {
    let k = target.k();
    let degree = target.degree();
    let weight = |n: usize| circle_radius.powi(n as i32);
    let p = (1..=degree).find(|&n| (0..k).any(|j| target.get(j, n).norm() * weight(n) > tol));
    let Some(p) = p else {
        let residual = (1..=degree)
            .flat_map(|n| (0..k).map(move |j| (j, n)))
            .map(|(j, n)| target.get(j, n).norm() * weight(n))
            .fold(0.0, f64::max);
        return IntegrabilityVerdict {
            integrable_form: true,
            p: 0,
            alpha: vec![ZERO; k],
            residual,
            orientation: 1,
        };
    };
    let fit = |sign: f64| -> (f64, Vec<Complex64>) {
        let alpha: Vec<Complex64> = (0..k).map(|j| -sign * p as f64 * target.get(j, p)).collect();
        let mut worst = 0.0f64;
        for (j, a) in alpha.iter().enumerate() {
            for n in 1..=degree {
                let expected = if n % p == 0 {
                    let s = (n / p) as i32;
                    -sign * a.powi(s) / (n as f64)
                } else {
                    ZERO
                };
                worst = worst.max((target.get(j, n) - expected).norm() * weight(n));
            }
        }
        (worst, alpha)
    };
    let (res_plus, alpha_plus) = fit(1.0);
    let (res_minus, alpha_minus) = fit(-1.0);
    let (residual, alpha, orientation) = if res_plus <= res_minus {
        (res_plus, alpha_plus, 1)
    } else {
        (res_minus, alpha_minus, -1)
    };
    IntegrabilityVerdict {
        integrable_form: residual <= tol,
        p,
        alpha,
        residual,
        orientation,
    }
}

/// A `k = 1` normal form whose holonomy is conjugate to `ψ`, with
/// `μ = log ψ'(0) / 2iπ` on the principal branch.
pub fn realize_holonomy(psi: &[Complex64], degree: usize, numerics: &Numerics) -> Result<(Complex64, NormalFormData)> {
    let lead = psi.first().copied().unwrap_or(ZERO);
    if lead == ZERO {
        return Err(Error::NotADiffeomorphism);
    }
    let mu = lead.ln() / Complex64::new(0.0, 2.0 * PI);
    let phi = series_log_ratio(psi, degree)?;
    let target = CoeffTable::from_rows(vec![phi])?;
    let nf = realize_orbital(1, mu, &target, numerics)?;
    Ok((mu, nf))
}

/// Realization followed by recomputation of the modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct Roundtrip {
    pub normal_form: NormalFormData,
    pub computed: CoeffTable,
    /// `|computed − target|` per sector and order.
    pub residuals: CoeffTable,
}

impl Roundtrip {
    pub fn max_residual(&self) -> f64 {
        self.residuals.rows().iter().flatten().map(|c| c.re).fold(0.0, f64::max)
    }

    pub fn residual(&self, j: usize, n: usize) -> f64 {
        self.residuals.get(j, n).re
    }
}

pub fn roundtrip_check(
    k: u32,
    mu: Complex64,
    target: &CoeffTable,
    realize: &Numerics,
    check: &Numerics,
) -> Result<Roundtrip> {
    let nf = realize_orbital(k, mu, target, realize)?;
    roundtrip_from(nf, target, check)
}

/// Recomputes the orbital modulus of an already realized normal form.
pub fn roundtrip_from(nf: NormalFormData, target: &CoeffTable, check: &Numerics) -> Result<Roundtrip> {
    let computed = orbital_modulus(&nf.field()?, target.degree(), check)?;
    let residuals = computed.map(|j, n, c| Complex64::new((c - target.get(j, n)).norm(), 0.0));
    Ok(Roundtrip {
        normal_form: nf,
        computed,
        residuals,
    })
}

/// Temporal modulus of a normal form with `G` built from `target`.
pub fn temporal_roundtrip(nf: &NormalFormData, target: &CoeffTable, numerics: &Numerics) -> Result<(NormalFormData, CoeffTable)> {
    let built = realize_temporal(nf, target, numerics)?;
    let computed = temporal_modulus(&built.field()?, target.degree(), numerics)?;
    Ok((built, computed))
}
