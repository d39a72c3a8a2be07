//! Leaves of a Dulac-form field, integrated along sector paths.
//!
//! A leaf `x ↦ y(x)` of `x^{k+1}∂x + y(1 + μx^k + xR)∂y` is written as
//! `y = y_model(x)·exp(w(x))`, where `y_model = y₀ (x/x_b)^μ
//! exp((x_b^{-k} − x^{-k})/k)` solves the formal model exactly and
//! `w' = R(x, y)/x^k`. Fixed-step RK4 is applied to `w` and to the payload
//! primitives; the model factor is evaluated in closed form on the grid, so
//! the step is not limited by the `x^{-k-1}` stiffness near the origin.
//! Along the path `w(x) − w(x_b)` equals the normalizing term `Nʲ(x_b, y₀)`
//! of the sectorial first integral once `y` has decayed.

use num_complex::Complex64;

use crate::algebra::{segment_integral, BiSeries, DenseBiSeries, Poly1};
use crate::error::{Error, Result};
use crate::geometry::{FormalClass, PathPlan, SectorFrame};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Time rescaling of the field.
#[derive(Debug, Clone, PartialEq)]
pub enum Unit {
    /// `U` given by its Taylor polynomial.
    Series(BiSeries),
    /// `U = P / (1 + x P G)` with `G` in expanded coordinates, `G(x, 0) = 0`.
    NormalForm { p: Poly1, g: BiSeries },
}

impl Unit {
    pub fn one() -> Self {
        Unit::Series(BiSeries::monomial(0, 0, Complex64::new(1.0, 0.0)))
    }

    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        match self {
            Unit::Series(u) => u.eval(x, y),
            Unit::NormalForm { p, g } => {
                let pv = p.eval(x);
                pv / (1.0 + x * pv * g.eval(x, y))
            }
        }
    }

    /// `U(x, 0)` as a polynomial.
    pub fn axis(&self) -> Poly1 {
        match self {
            Unit::Series(u) => u.axis_part(),
            Unit::NormalForm { p, .. } => p.clone(),
        }
    }
}

/// Saddle-node field `U·(x^{k+1}∂x + y(1 + μx^k + xR)∂y)` in Dulac form.
#[derive(Debug, Clone)]
pub struct DulacField {
    class: FormalClass,
    unit: Unit,
    r: BiSeries,
    r_dense: DenseBiSeries,
}

impl DulacField {
    /// Field with formal temporal part `P` read off as the k-jet of `U(x, 0)`.
    pub fn new(k: u32, mu: Complex64, unit: Unit, r: BiSeries) -> Result<Self> {
        let p = unit.axis().jet(k as usize);
        if p.coeff(0) == ZERO {
            return Err(Error::InvalidField("U(0,0) must be nonzero".into()));
        }
        let class = FormalClass::new(k, mu, p)?;
        Self::with_class(class, unit, r)
    }

    pub fn with_class(class: FormalClass, unit: Unit, r: BiSeries) -> Result<Self> {
        if unit.eval(ZERO, ZERO) == ZERO {
            return Err(Error::InvalidField("U(0,0) must be nonzero".into()));
        }
        if let Some((m, _, _)) = r.terms().find(|&(_, n, _)| n == 0) {
            return Err(Error::InvalidField(format!(
                "R(x,0) must vanish, found term x^{m} y^0"
            )));
        }
        let r_dense = r.dense();
        Ok(Self { class, unit, r, r_dense })
    }

    /// `U = 1` and the given orbital part.
    pub fn orbital(k: u32, mu: Complex64, r: BiSeries) -> Result<Self> {
        Self::new(k, mu, Unit::one(), r)
    }

    /// Formal model `x^{k+1}∂x + y(1 + μx^k)∂y`.
    pub fn model(k: u32, mu: Complex64) -> Result<Self> {
        Self::orbital(k, mu, BiSeries::new())
    }

    pub fn class(&self) -> &FormalClass {
        &self.class
    }

    pub fn k(&self) -> u32 {
        self.class.k
    }

    pub fn mu(&self) -> Complex64 {
        self.class.mu
    }

    pub fn r(&self) -> &BiSeries {
        &self.r
    }

    pub fn unit(&self) -> &Unit {
        &self.unit
    }

    #[inline]
    fn r_eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.r_dense.eval(x, y)
    }
}

/// `dy/dx = y (1 + μx^k + xR(x,y)) / x^{k+1}` along the foliation.
pub fn leaf_rhs(field: &DulacField, x: Complex64, y: Complex64) -> Result<Complex64> {
    if x == ZERO {
        return Err(Error::SingularPoint);
    }
    let k = field.k();
    let xk = x.powu(k);
    Ok(y * (1.0 + field.mu() * xk + x * field.r_eval(x, y)) / (xk * x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Upper bound on the arc-length step.
    pub step: f64,
    /// The ray is abandoned once `|y|` falls below this.
    pub y_floor: f64,
    pub eps_min: f64,
    /// `|y|` above this means the leaf left the domain.
    pub escape_guard: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            y_floor: 1e-40,
            eps_min: 1e-3,
            escape_guard: 1e6,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.y_floor > 0.0) || !(self.eps_min > 0.0) || !(self.escape_guard > 0.0) {
            return Err(Error::InvalidConfig(
                "step, y_floor, eps_min and escape_guard must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A function `g(x, y)` integrated against `dx/x^{k+1}` along leaves.
///
/// Split as `g = g(x,0) + (g − g(x,0))`: the transverse part is integrated
/// along the leaf, the axis part only through its primitive, which is
/// single valued because `g(x,0) ∈ x^{k+1}ℂ{x}`.
pub trait Integrand: Sync {
    /// `g(x, y) − g(x, 0)`.
    fn transverse(&self, x: Complex64, y: Complex64) -> Complex64;

    /// `g(x, 0)`.
    fn axis(&self, x: Complex64) -> Complex64;

    /// `∫_0^x g(t, 0) t^{-k-1} dt`.
    fn axis_primitive(&self, k: u32, x: Complex64) -> Complex64 {
        segment_integral(ZERO, x, 8, |t| {
            if t == ZERO {
                ZERO
            } else {
                self.axis(t) / t.powu(k + 1)
            }
        })
    }

    /// Rejects payloads whose axis part is not divisible by `x^{k+1}`.
    fn check_integrable(&self, k: u32) -> Result<()> {
        let delta = 1e-3;
        let a = self.axis(Complex64::new(delta, 0.0)).norm();
        let b = self.axis(Complex64::new(0.5 * delta, 0.0)).norm();
        let ratio = 0.5f64.powi(k as i32 + 1);
        if b <= 1.5 * ratio * a + 1e-300 {
            Ok(())
        } else {
            Err(Error::NonIntegrablePayload(format!(
                "|g(x,0)| decays slower than |x|^{} near 0",
                k + 1
            )))
        }
    }
}

/// A [`BiSeries`] payload; pure-x terms are integrated in closed form.
#[derive(Debug, Clone)]
pub struct SeriesPayload {
    series: BiSeries,
    transverse: DenseBiSeries,
    axis: Poly1,
}

impl SeriesPayload {
    pub fn new(series: BiSeries) -> Self {
        let transverse = series.transverse_part().dense();
        let axis = series.axis_part();
        Self { series, transverse, axis }
    }

    pub fn series(&self) -> &BiSeries {
        &self.series
    }
}

impl From<BiSeries> for SeriesPayload {
    fn from(s: BiSeries) -> Self {
        Self::new(s)
    }
}

impl Integrand for SeriesPayload {
    #[inline]
    fn transverse(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.transverse.eval(x, y)
    }

    fn axis(&self, x: Complex64) -> Complex64 {
        self.axis.eval(x)
    }

    fn axis_primitive(&self, k: u32, x: Complex64) -> Complex64 {
        self.axis
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(|(m, c)| {
                let e = m as u32 - k;
                c * x.powu(e) / e as f64
            })
            .sum()
    }

    fn check_integrable(&self, k: u32) -> Result<()> {
        match self.axis.coeffs.iter().enumerate().find(|(m, c)| **c != ZERO && *m <= k as usize) {
            Some((m, _)) => Err(Error::NonIntegrablePayload(format!(
                "pure-x term x^{m} with m <= k = {k}"
            ))),
            None => Ok(()),
        }
    }
}

/// Payload given by a closure.
pub struct FnPayload<F>(pub F);

impl<F> Integrand for FnPayload<F>
where
    F: Fn(Complex64, Complex64) -> Complex64 + Sync,
{
    fn transverse(&self, x: Complex64, y: Complex64) -> Complex64 {
        (self.0)(x, y) - (self.0)(x, ZERO)
    }

    fn axis(&self, x: Complex64) -> Complex64 {
        (self.0)(x, ZERO)
    }
}

/// Final state of a leaf integration.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafState {
    pub x: Complex64,
    /// Branch-tracked `log x` at the final point.
    pub log_x: Complex64,
    pub y: Complex64,
    /// `Nʲ(x_base, y₀)`.
    pub n_acc: Complex64,
    /// Sectorial primitives `Fʲ(x_base, y₀) = ∫_{0→x_base} g dx/x^{k+1}`, one per payload.
    pub f_acc: Vec<Complex64>,
    pub steps: usize,
    /// True when the ray was abandoned because `|y| < y_floor`.
    pub stopped_early: bool,
    /// Crude bound on what the abandoned part of the ray would add to `N`.
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Copy)]
struct GridNode {
    x: Complex64,
    log_x: Complex64,
    dx_ds: Complex64,
    inv_xk: Complex64,
    /// `y_model(x) / y₀`.
    model: Complex64,
}

#[derive(Debug, Clone, Copy)]
struct GridStep {
    a: GridNode,
    mid: GridNode,
    b: GridNode,
    h: f64,
    on_ray: bool,
    /// Arc length left after this step.
    remaining: f64,
}

/// A path discretized once for a given `(k, μ, frame)`; reusable for any
/// initial condition and any `R`.
#[derive(Debug, Clone)]
pub struct PathGrid {
    frame: SectorFrame,
    k: u32,
    mu: Complex64,
    steps: Vec<GridStep>,
}

impl PathGrid {
    pub fn new(k: u32, mu: Complex64, frame: &SectorFrame, plan: &PathPlan, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidConfig("step must be positive".into()));
        }
        let step = step.min(1.0 / plan.samples_per_unit);
        let log_b = frame.log_base();
        let inv_bk = (-(k as f64) * log_b).exp();
        let node = |p: crate::geometry::PathPoint| -> GridNode {
            let inv_xk = (-(k as f64) * p.log_x).exp();
            let expo = mu * (p.log_x - log_b) - (inv_xk - inv_bk) / k as f64;
            GridNode {
                x: p.x,
                log_x: p.log_x,
                dx_ds: p.dx_ds,
                inv_xk,
                model: expo.exp(),
            }
        };
        let total = plan.length();
        let mut done = 0.0;
        let mut steps = Vec::new();
        for seg in &plan.segments {
            let len = seg.length();
            if len == 0.0 {
                continue;
            }
            let n = (len / step).ceil().max(1.0) as usize;
            let h = len / n as f64;
            let on_ray = matches!(seg, crate::geometry::Segment::Ray { .. });
            let mut a = node(seg.point(0.0));
            for i in 0..n {
                let mid = node(seg.point((i as f64 + 0.5) / n as f64));
                let b = node(seg.point((i + 1) as f64 / n as f64));
                done += h;
                steps.push(GridStep {
                    a,
                    mid,
                    b,
                    h,
                    on_ray,
                    remaining: (total - done).max(0.0),
                });
                a = b;
            }
        }
        Ok(Self {
            frame: *frame,
            k,
            mu,
            steps,
        })
    }

    pub fn frame(&self) -> &SectorFrame {
        &self.frame
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Raw output of one leaf run: `N` and the accumulated `∫_{x_b→…} g⊥ dx/x^{k+1}`.
#[derive(Debug, Clone)]
pub(crate) struct LeafRun {
    pub n_acc: Complex64,
    pub along: Vec<Complex64>,
    pub last: usize,
    pub w: Complex64,
    pub stopped_early: bool,
    pub tail_bound: f64,
}

/// Integrates the leaf through `(x_base, y0)` over a prepared grid.
pub(crate) fn run_leaf(
    field: &DulacField,
    grid: &PathGrid,
    y0: Complex64,
    payloads: &[&dyn Integrand],
    config: &IntegratorConfig,
) -> Result<LeafRun> {
    debug_assert!(grid.k == field.k() && grid.mu == field.mu());
    let n_pay = payloads.len();
    let mut along = vec![ZERO; n_pay];
    if y0 == ZERO || grid.steps.is_empty() {
        return Ok(LeafRun {
            n_acc: ZERO,
            along,
            last: grid.steps.len().saturating_sub(1),
            w: ZERO,
            stopped_early: false,
            tail_bound: 0.0,
        });
    }
    let has_r = !field.r_dense.is_zero();
    let r_abs_sum: f64 = field.r.terms().map(|(_, _, c)| c.norm()).sum();

    let mut k1 = vec![ZERO; n_pay];
    let mut k2 = vec![ZERO; n_pay];
    let mut k3 = vec![ZERO; n_pay];
    let mut k4 = vec![ZERO; n_pay];

    // Derivatives of (w, along) at a node for a given w.
    let eval = |node: &GridNode, w: Complex64, out: &mut [Complex64]| -> Complex64 {
        let y = y0 * node.model * w.exp();
        let weight = node.inv_xk * node.dx_ds;
        let dw = if has_r { field.r_eval(node.x, y) * weight } else { ZERO };
        let pay_weight = weight / node.x;
        for (o, p) in out.iter_mut().zip(payloads) {
            *o = p.transverse(node.x, y) * pay_weight;
        }
        dw
    };

    let mut w = ZERO;
    let mut last = 0;
    let mut stopped_early = false;
    let mut tail_bound = 0.0;
    for (idx, st) in grid.steps.iter().enumerate() {
        let h = st.h;
        let d1 = eval(&st.a, w, &mut k1);
        let d2 = eval(&st.mid, w + 0.5 * h * d1, &mut k2);
        let d3 = eval(&st.mid, w + 0.5 * h * d2, &mut k3);
        let d4 = eval(&st.b, w + h * d3, &mut k4);
        w += h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
        for i in 0..n_pay {
            along[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        last = idx;
        let y = y0 * st.b.model * w.exp();
        if along.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::NonFinitePayload { x: st.b.x, y });
        }
        let y_abs = y.norm();
        if !(y_abs <= config.escape_guard) || !w.re.is_finite() {
            return Err(Error::LeafEscaped {
                sector: grid.frame.j,
                sample: None,
                y0,
                x: st.b.x,
                y_abs,
            });
        }
        if st.on_ray && y_abs < config.y_floor {
            stopped_early = idx + 1 < grid.steps.len();
            tail_bound = y_abs * st.remaining * r_abs_sum * st.b.inv_xk.norm();
            break;
        }
    }
    Ok(LeafRun {
        n_acc: w,
        along,
        last,
        w,
        stopped_early,
        tail_bound,
    })
}

/// Integrates the leaf through `(x_base, y0)` along `path`, accumulating
/// `Nʲ` and the sectorial primitives of `integrands`.
pub fn integrate_leaf(
    field: &DulacField,
    frame: &SectorFrame,
    y0: Complex64,
    path: &PathPlan,
    integrands: &[&dyn Integrand],
    config: &IntegratorConfig,
) -> Result<LeafState> {
    config.validate()?;
    for g in integrands {
        g.check_integrable(field.k())?;
    }
    let grid = PathGrid::new(field.k(), field.mu(), frame, path, config.step)?;
    let run = run_leaf(field, &grid, y0, integrands, config)?;
    let x_b = frame.base_point();
    let end = grid.steps.get(run.last).map(|s| s.b);
    let (x, log_x, y) = match end {
        Some(node) => (node.x, node.log_x, y0 * node.model * run.w.exp()),
        None => (x_b, frame.log_base(), y0),
    };
    let f_acc = integrands
        .iter()
        .zip(&run.along)
        .map(|(g, a)| g.axis_primitive(field.k(), x_b) - a)
        .collect();
    Ok(LeafState {
        x,
        log_x,
        y,
        n_acc: run.n_acc,
        f_acc,
        steps: if grid.steps.is_empty() { 0 } else { run.last + 1 },
        stopped_early: run.stopped_early,
        tail_bound: run.tail_bound,
    })
}

/// `Hʲ(x_b, y₀) = y₀ e^{2iπjμ/k} exp(1/(k x_b^k) − μ log x_b + N)` on the frame's branch.
pub fn first_integral_from_n(field: &DulacField, frame: &SectorFrame, y0: Complex64, n_acc: Complex64) -> Complex64 {
    let k = field.k() as f64;
    let log_b = frame.log_base();
    let inv_bk = (-k * log_b).exp();
    y0 * frame.branch_factor(field.mu()) * (inv_bk / k - field.mu() * log_b + n_acc).exp()
}

/// Sectorial first integral `Hʲ` at the base point of `frame`.
pub fn first_integral_value(
    field: &DulacField,
    frame: &SectorFrame,
    y0: Complex64,
    path: &PathPlan,
    config: &IntegratorConfig,
) -> Result<Complex64> {
    let state = integrate_leaf(field, frame, y0, path, &[], config)?;
    Ok(first_integral_from_n(field, frame, y0, state.n_acc))
}
