//! The period operator: differences of sectorial primitives over the
//! asymptotic cycle of each saddle part, sampled on a circle in `y` and
//! expanded in the first integral `h = Hʲ(x_j, y)` by Cauchy's formula.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::{reciprocal_gamma, root_of_unity, CoeffTable, DenseBiSeries, Poly1};
use crate::error::{Error, Result};
use crate::geometry::{asymptotic_path, dogleg_path, FormalClass, PathPlan, SectorFrame};
use crate::leaf::{first_integral_from_n, run_leaf, DulacField, Integrand, IntegratorConfig, PathGrid, Unit};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathShape {
    /// Arc at the base radius, then the node ray.
    ArcRay,
    /// Half the sweep at the base radius, the rest at `inner_ratio·r`.
    Dogleg { inner_ratio: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyConfig {
    pub circle_radius: f64,
    pub circle_points: usize,
}

impl CauchyConfig {
    pub fn validate(&self, top_degree: usize) -> Result<()> {
        if !(self.circle_radius > 0.0) {
            return Err(Error::InvalidConfig("circle radius must be positive".into()));
        }
        if self.circle_points < 8 || self.circle_points < 4 * top_degree {
            return Err(Error::InvalidConfig(format!(
                "need at least max(8, 4·{top_degree}) circle points, got {}",
                self.circle_points
            )));
        }
        Ok(())
    }
}

/// Everything numerical that a period computation depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    /// Modulus of the base points.
    pub r: f64,
    /// Sector overshoot; `None` means `0.3·π/(2k)`.
    pub beta: Option<f64>,
    pub samples_per_unit: f64,
    pub path: PathShape,
    pub integrator: IntegratorConfig,
    pub cauchy: CauchyConfig,
}

impl Numerics {
    /// General fields: `r = 1`, circle `0.1` with 1000 points.
    pub fn modulus() -> Self {
        Self {
            r: 1.0,
            beta: None,
            samples_per_unit: 1000.0,
            path: PathShape::ArcRay,
            integrator: IntegratorConfig::default(),
            cauchy: CauchyConfig {
                circle_radius: 0.1,
                circle_points: 1000,
            },
        }
    }

    /// Base points at `|x| = 5`, circle `0.1` with 1000 points.
    pub fn modulus_r5() -> Self {
        Self { r: 5.0, ..Self::modulus() }
    }

    /// Base points at `|x| = 5`, circle `0.01` with 5000 points.
    pub fn realization() -> Self {
        Self {
            cauchy: CauchyConfig {
                circle_radius: 0.01,
                circle_points: 5000,
            },
            ..Self::modulus_r5()
        }
    }

    pub fn beta_for(&self, k: u32) -> f64 {
        self.beta.unwrap_or_else(|| SectorFrame::default_beta(k))
    }

    pub fn validate(&self, k: u32, top_degree: usize) -> Result<()> {
        if !(self.r > 0.0) || !self.r.is_finite() {
            return Err(Error::InvalidConfig("radius must be positive".into()));
        }
        let beta = self.beta_for(k);
        if !(beta > 0.0 && beta < PI / (2.0 * k as f64)) {
            return Err(Error::InvalidConfig(format!("beta {beta} outside (0, π/2k)")));
        }
        self.integrator.validate()?;
        self.cauchy.validate(top_degree)
    }

    fn plan(&self, frame: &SectorFrame) -> Result<PathPlan> {
        let eps = self.integrator.eps_min;
        match self.path {
            PathShape::ArcRay => asymptotic_path(frame, eps, self.samples_per_unit),
            PathShape::Dogleg { inner_ratio } => dogleg_path(frame, inner_ratio, eps, self.samples_per_unit),
        }
    }
}

/// The two frames meeting on the saddle part `V^{j,s}`, discretized.
#[derive(Debug, Clone)]
pub struct SectorGrids {
    pub j: usize,
    lower: PathGrid,
    upper: PathGrid,
}

impl SectorGrids {
    pub fn new(k: u32, mu: Complex64, j: usize, numerics: &Numerics) -> Result<Self> {
        let (lo, up) = SectorFrame::saddle_pair(k, j as i64, numerics.r, numerics.beta_for(k));
        let step = numerics.integrator.step;
        let lower = PathGrid::new(k, mu, &lo, &numerics.plan(&lo)?, step)?;
        let upper = PathGrid::new(k, mu, &up, &numerics.plan(&up)?, step)?;
        Ok(Self { j, lower, upper })
    }

    /// Grids for every saddle part `j = 0..k−1`.
    pub fn all(k: u32, mu: Complex64, numerics: &Numerics) -> Result<Vec<Self>> {
        (0..k as usize).map(|j| Self::new(k, mu, j, numerics)).collect()
    }
}

/// Values of the first integral and of the periods on the sampling circle.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodSamples {
    pub j: usize,
    pub y: Vec<Complex64>,
    /// `h_i = Hʲ(x_j, y_i)`.
    pub h: Vec<Complex64>,
    /// `t[p][i] = F^{j+1} − Fʲ` for payload `p` at `y_i`.
    pub t: Vec<Vec<Complex64>>,
    /// `N^{j+1} − Nʲ` at `y_i`, the period of `−xR`.
    pub n_diff: Vec<Complex64>,
}

impl PeriodSamples {
    pub fn coeffs(&self, payload: usize, n_max: usize) -> Result<Vec<Complex64>> {
        extract_coeffs(&self.h, &self.t[payload], n_max)
    }

    pub fn orbital_coeffs(&self, n_max: usize) -> Result<Vec<Complex64>> {
        extract_coeffs(&self.h, &self.n_diff, n_max)
    }

    pub fn pairs(&self, payload: usize) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        self.h.iter().copied().zip(self.t[payload].iter().copied())
    }
}

/// Samples the periods of `payloads` along the field's leaves on the saddle
/// part `j`, at `M` equispaced points of the circle `|y| = ρ`.
pub fn period_samples(
    field: &DulacField,
    j: usize,
    payloads: &[&dyn Integrand],
    numerics: &Numerics,
) -> Result<PeriodSamples> {
    numerics.validate(field.k(), 0)?;
    for g in payloads {
        g.check_integrable(field.k())?;
    }
    let grids = SectorGrids::new(field.k(), field.mu(), j, numerics)?;
    sample_on_grids(field, &grids, payloads, numerics)
}

pub(crate) fn sample_on_grids(
    field: &DulacField,
    grids: &SectorGrids,
    payloads: &[&dyn Integrand],
    numerics: &Numerics,
) -> Result<PeriodSamples> {
    let m = numerics.cauchy.circle_points;
    let rho = numerics.cauchy.circle_radius;
    let cfg = &numerics.integrator;
    let lower_frame = *grids.lower.frame();
    let ys: Vec<Complex64> = (0..m)
        .map(|i| Complex64::from_polar(rho, 2.0 * PI * i as f64 / m as f64))
        .collect();
    let tag = |e: Error, i: usize| match e {
        Error::LeafEscaped { sector, y0, x, y_abs, .. } => Error::LeafEscaped {
            sector,
            sample: Some(i),
            y0,
            x,
            y_abs,
        },
        other => other,
    };
    let per_sample: Vec<(Complex64, Complex64, Vec<Complex64>)> = ys
        .par_iter()
        .enumerate()
        .map(|(i, &y0)| {
            let a = run_leaf(field, &grids.lower, y0, payloads, cfg).map_err(|e| tag(e, i))?;
            let b = run_leaf(field, &grids.upper, y0, payloads, cfg).map_err(|e| tag(e, i))?;
            let h = first_integral_from_n(field, &lower_frame, y0, a.n_acc);
            let t = a.along.iter().zip(&b.along).map(|(p, q)| p - q).collect();
            Ok((h, b.n_acc - a.n_acc, t))
        })
        .collect::<Result<_>>()?;
    let mut h = Vec::with_capacity(m);
    let mut n_diff = Vec::with_capacity(m);
    let mut t = vec![Vec::with_capacity(m); payloads.len()];
    for (hi, ni, ti) in per_sample {
        h.push(hi);
        n_diff.push(ni);
        for (col, v) in t.iter_mut().zip(ti) {
            col.push(v);
        }
    }
    Ok(PeriodSamples {
        j: grids.j,
        y: ys,
        h,
        t,
        n_diff,
    })
}

/// `c_ℓ = (1/2iπ) Σ_i t_i h_i^{−ℓ−1} dH_i` for `ℓ = 0..=n_max`, with `dH`
/// the cyclic five-point centered difference of the samples.
pub fn extract_coeffs(h: &[Complex64], t: &[Complex64], n_max: usize) -> Result<Vec<Complex64>> {
    let m = h.len();
    if m < 8 || t.len() != m {
        return Err(Error::InvalidInput(format!(
            "need at least 8 paired samples, got {} values of h and {} of t",
            m,
            t.len()
        )));
    }
    if let Some(i) = h.iter().position(|v| v.norm() < 1e-300) {
        return Err(Error::FirstIntegralCollapsed { sector: 0, sample: i });
    }
    let at = |i: isize| h[i.rem_euclid(m as isize) as usize];
    let mut c = vec![ZERO; n_max + 1];
    for i in 0..m {
        let ii = i as isize;
        let dh = (-at(ii + 2) + 8.0 * at(ii + 1) - 8.0 * at(ii - 1) + at(ii - 2)) / 12.0;
        let inv = 1.0 / h[i];
        let mut w = t[i] * inv * dh;
        for cl in c.iter_mut() {
            *cl += w;
            w *= inv;
        }
    }
    let scale = Complex64::new(0.0, 2.0 * PI);
    Ok(c.into_iter().map(|v| v / scale).collect())
}

/// Closed-form period coefficient of `x^m yⁿ` for the formal model:
/// `δ^{mj}·2iπ·(n/k)^a·e^{iπa} / (n·Γ(a))`, `a = (m + nμ)/k`, `δ = e^{2iπ/k}`.
pub fn model_coeff(k: u32, mu: Complex64, m: u32, n: u32, j: i64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::ZeroOrder);
    }
    if k == 0 {
        return Err(Error::InvalidField("k must be a positive integer".into()));
    }
    let kf = k as f64;
    let nf = n as f64;
    let a = (m as f64 + nf * mu) / kf;
    let power = (a * (nf / kf).ln()).exp();
    let phase = (Complex64::new(0.0, PI) * a).exp();
    let delta = root_of_unity(m as i64 * j, k as usize);
    Ok(delta * Complex64::new(0.0, 2.0 * PI) * power * phase * reciprocal_gamma(a) / nf)
}

/// `g = 1/U − 1/P` restricted to what the periods see.
pub struct TemporalPayload {
    kind: TemporalKind,
    p: Poly1,
}

enum TemporalKind {
    Series(DenseBiSeries),
    /// `1/U − 1/P_G = xG` for `U = P_G/(1 + xP_G G)`.
    NormalForm { p: Poly1, g: DenseBiSeries },
}

impl TemporalPayload {
    pub fn new(unit: &Unit, k: u32) -> Self {
        let p = unit.axis().jet(k as usize);
        let kind = match unit {
            Unit::Series(u) => TemporalKind::Series(u.dense()),
            Unit::NormalForm { p, g } => TemporalKind::NormalForm {
                p: p.clone(),
                g: g.dense(),
            },
        };
        Self { kind, p }
    }

    fn unit_at(&self, x: Complex64, y: Complex64) -> Complex64 {
        match &self.kind {
            TemporalKind::Series(u) => u.eval(x, y),
            TemporalKind::NormalForm { p, g } => {
                let pv = p.eval(x);
                pv / (1.0 + x * pv * g.eval(x, y))
            }
        }
    }
}

impl Integrand for TemporalPayload {
    fn transverse(&self, x: Complex64, y: Complex64) -> Complex64 {
        match &self.kind {
            TemporalKind::Series(_) => 1.0 / self.unit_at(x, y) - 1.0 / self.unit_at(x, ZERO),
            TemporalKind::NormalForm { g, .. } => x * (g.eval(x, y) - g.eval(x, ZERO)),
        }
    }

    fn axis(&self, x: Complex64) -> Complex64 {
        1.0 / self.unit_at(x, ZERO) - 1.0 / self.p.eval(x)
    }

    fn check_integrable(&self, _k: u32) -> Result<()> {
        // P is the k-jet of U(x, 0), so 1/U(x,0) − 1/P = O(x^{k+1}).
        Ok(())
    }
}

/// Orbital and temporal moduli of a field, with formal data.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusData {
    pub class: FormalClass,
    /// `αⁿʲ`, coefficients of `φʲ`.
    pub orbital: CoeffTable,
    /// `fⁿʲ`, coefficients of `fʲ`.
    pub temporal: CoeffTable,
    /// Largest `|c₀|` seen; both moduli vanish at `h = 0`.
    pub c0_max: f64,
}

fn unit_error(e: Error) -> Error {
    match e {
        Error::NonFinitePayload { x, y } => Error::UnitVanished { x, y },
        other => other,
    }
}

fn with_sector(e: Error, j: usize) -> Error {
    match e {
        Error::FirstIntegralCollapsed { sample, .. } => Error::FirstIntegralCollapsed { sector: j, sample },
        other => other,
    }
}

/// Both moduli in one pass over the leaves.
pub fn modulus(field: &DulacField, degree: usize, numerics: &Numerics) -> Result<ModulusData> {
    compute_moduli(field, degree, numerics, true)
}

fn compute_moduli(field: &DulacField, degree: usize, numerics: &Numerics, temporal: bool) -> Result<ModulusData> {
    if degree == 0 {
        return Err(Error::InvalidInput("degree must be at least 1".into()));
    }
    numerics.validate(field.k(), degree)?;
    let k = field.k() as usize;
    let pay = TemporalPayload::new(field.unit(), field.k());
    let payloads: Vec<&dyn Integrand> = if temporal { vec![&pay] } else { vec![] };
    let mut orbital = CoeffTable::zeros(k, degree);
    let mut temp = CoeffTable::zeros(k, degree);
    let mut c0_max = 0.0f64;
    for grids in SectorGrids::all(field.k(), field.mu(), numerics)? {
        let j = grids.j;
        let s = sample_on_grids(field, &grids, &payloads, numerics).map_err(unit_error)?;
        let a = s.orbital_coeffs(degree).map_err(|e| with_sector(e, j))?;
        c0_max = c0_max.max(a[0].norm());
        for n in 1..=degree {
            orbital.set(j, n, a[n]);
        }
        if temporal {
            let f = s.coeffs(0, degree).map_err(|e| with_sector(e, j))?;
            c0_max = c0_max.max(f[0].norm());
            for n in 1..=degree {
                temp.set(j, n, f[n]);
            }
        }
    }
    Ok(ModulusData {
        class: field.class().clone(),
        orbital,
        temporal: temp,
        c0_max,
    })
}

/// `(φʲ)_j`, the period of `−xR` along the field's own leaves.
pub fn orbital_modulus(field: &DulacField, degree: usize, numerics: &Numerics) -> Result<CoeffTable> {
    Ok(compute_moduli(field, degree, numerics, false)?.orbital)
}

/// `(fʲ)_j`, the period of `1/U − 1/P`.
pub fn temporal_modulus(field: &DulacField, degree: usize, numerics: &Numerics) -> Result<CoeffTable> {
    Ok(compute_moduli(field, degree, numerics, true)?.temporal)
}
