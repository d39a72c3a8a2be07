//! Formal classification data, sector frames with their logarithm
//! branches, and the arc-plus-ray paths that descend into a sector.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::algebra::Poly1;
use crate::error::{Error, Result};

/// Formal invariants `(k, μ, P)` plus the shift `σ` of the normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalClass {
    pub k: u32,
    pub mu: Complex64,
    pub sigma: u32,
    pub p: Poly1,
}

impl FormalClass {
    /// Formal class with the canonical `σ = sigma_for(μ)`.
    pub fn new(k: u32, mu: Complex64, p: Poly1) -> Result<Self> {
        Self::with_sigma(k, mu, sigma_for(mu), p)
    }

    pub fn with_sigma(k: u32, mu: Complex64, sigma: u32, p: Poly1) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidField("k must be a positive integer".into()));
        }
        if !(mu.re.is_finite() && mu.im.is_finite()) {
            return Err(Error::InvalidField("mu must be finite".into()));
        }
        if p.coeff(0) == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidField("P(0) must be nonzero".into()));
        }
        if p.degree().unwrap_or(0) > k as usize {
            return Err(Error::InvalidField(format!("P must have degree at most k = {k}")));
        }
        let shifted = mu + sigma as f64;
        if shifted.im == 0.0 && shifted.re <= 0.0 {
            return Err(Error::InvalidField(format!(
                "sigma + mu = {} lies in the non-positive reals",
                shifted.re
            )));
        }
        Ok(Self { k, mu, sigma, p })
    }

    /// Orbital class only, `P = 1`.
    pub fn orbital(k: u32, mu: Complex64) -> Result<Self> {
        Self::new(k, mu, Poly1::constant(Complex64::new(1.0, 0.0)))
    }
}

/// Smallest shift keeping `σ + μ` off the non-positive real axis:
/// `0` unless `μ ∈ ℝ_{≤0}`, in which case `⌊−μ⌋ + 1`.
pub fn sigma_for(mu: Complex64) -> u32 {
    if mu.im != 0.0 || mu.re > 0.0 {
        0
    } else {
        ((-mu.re).floor() + 1.0) as u32
    }
}

/// Direction `θʲ = 2πj/k` of the j-th node sector.
pub fn sector_angle(k: u32, j: i64) -> f64 {
    2.0 * PI * j as f64 / k as f64
}

/// Center of the saddle part between sectors `j` and `j+1` at radius `r`.
pub fn base_point(k: u32, j: i64, r: f64) -> Complex64 {
    Complex64::from_polar(r, sector_angle(k, j) + PI / k as f64)
}

/// One sector `Vʲ` together with the base point used in it.
///
/// `j` is kept unreduced: the frame `j + 1` attached to the saddle part
/// `V^{j,s}` may equal `k`, in which case its logarithm branch is continued
/// past `2π` (for `k = 1` this realizes the self-overlap of `V⁰`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorFrame {
    pub k: u32,
    pub j: i64,
    pub theta: f64,
    pub beta: f64,
    pub r: f64,
    /// Determination of `arg x_base`, within `π/k + β` of `theta`.
    pub arg_base: f64,
}

impl SectorFrame {
    /// The two frames sharing the base point of the saddle part `V^{j,s}`:
    /// frame `j` (base at `θʲ + π/k`) and frame `j + 1` (base at `θ^{j+1} − π/k`).
    pub fn saddle_pair(k: u32, j: i64, r: f64, beta: f64) -> (SectorFrame, SectorFrame) {
        let half = PI / k as f64;
        let lower = SectorFrame {
            k,
            j,
            theta: sector_angle(k, j),
            beta,
            r,
            arg_base: sector_angle(k, j) + half,
        };
        let upper = SectorFrame {
            k,
            j: j + 1,
            theta: sector_angle(k, j + 1),
            beta,
            r,
            arg_base: sector_angle(k, j + 1) - half,
        };
        (lower, upper)
    }

    pub fn default_beta(k: u32) -> f64 {
        0.3 * PI / (2.0 * k as f64)
    }

    pub fn base_point(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.arg_base)
    }

    /// `log x_base` on this frame's branch.
    pub fn log_base(&self) -> Complex64 {
        Complex64::new(self.r.ln(), self.arg_base)
    }

    pub fn half_aperture(&self) -> f64 {
        PI / self.k as f64 + self.beta
    }

    /// `e^{2iπ j μ / k}` with the unreduced index.
    pub fn branch_factor(&self, mu: Complex64) -> Complex64 {
        (Complex64::new(0.0, 2.0 * PI * self.j as f64 / self.k as f64) * mu).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Arc {
        radius: f64,
        start_angle: f64,
        end_angle: f64,
    },
    Ray {
        angle: f64,
        start_radius: f64,
        end_radius: f64,
    },
}

/// A point on a path with its branch-tracked logarithm and the tangent
/// `dx/ds` for the arc-length parameter `s`.
#[derive(Debug, Clone, Copy)]
pub struct PathPoint {
    pub x: Complex64,
    pub log_x: Complex64,
    pub dx_ds: Complex64,
}

impl Segment {
    pub fn length(&self) -> f64 {
        match *self {
            Segment::Arc { radius, start_angle, end_angle } => radius * (end_angle - start_angle).abs(),
            Segment::Ray { start_radius, end_radius, .. } => (end_radius - start_radius).abs(),
        }
    }

    /// Point at fraction `t ∈ [0, 1]` of the segment.
    pub fn point(&self, t: f64) -> PathPoint {
        match *self {
            Segment::Arc { radius, start_angle, end_angle } => {
                let angle = start_angle + (end_angle - start_angle) * t;
                let x = Complex64::from_polar(radius, angle);
                let dir = (end_angle - start_angle).signum();
                PathPoint {
                    x,
                    log_x: Complex64::new(radius.ln(), angle),
                    dx_ds: Complex64::new(0.0, dir) * Complex64::from_polar(1.0, angle),
                }
            }
            Segment::Ray { angle, start_radius, end_radius } => {
                let rho = start_radius + (end_radius - start_radius) * t;
                let unit = Complex64::from_polar(1.0, angle);
                PathPoint {
                    x: unit * rho,
                    log_x: Complex64::new(rho.ln(), angle),
                    dx_ds: unit * (end_radius - start_radius).signum(),
                }
            }
        }
    }

    fn end_point(&self) -> (f64, f64) {
        match *self {
            Segment::Arc { radius, end_angle, .. } => (radius, end_angle),
            Segment::Ray { angle, end_radius, .. } => (end_radius, angle),
        }
    }

    fn start_point(&self) -> (f64, f64) {
        match *self {
            Segment::Arc { radius, start_angle, .. } => (radius, start_angle),
            Segment::Ray { angle, start_radius, .. } => (start_radius, angle),
        }
    }
}

/// A discretizable path from the base point toward `x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPlan {
    pub segments: Vec<Segment>,
    pub samples_per_unit: f64,
    pub eps_min: f64,
}

impl PathPlan {
    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    /// Checks continuity of modulus and argument between consecutive segments.
    pub fn is_continuous(&self) -> bool {
        self.segments.windows(2).all(|w| {
            let (r0, a0) = w[0].end_point();
            let (r1, a1) = w[1].start_point();
            (r0 - r1).abs() <= 1e-12 * r0.max(1.0) && (a0 - a1).abs() <= 1e-12
        })
    }
}

fn check_radii(frame: &SectorFrame, eps_min: f64, samples_per_unit: f64) -> Result<()> {
    if !(samples_per_unit > 0.0) {
        return Err(Error::InvalidConfig("samples_per_unit must be positive".into()));
    }
    if !(eps_min > 0.0) || eps_min >= frame.r {
        return Err(Error::DegeneratePath { eps_min, radius: frame.r });
    }
    Ok(())
}

/// Arc at `|x_base|` from `arg x_base` to `θʲ`, then the ray along `θʲ`
/// down to `eps_min`.
pub fn asymptotic_path(frame: &SectorFrame, eps_min: f64, samples_per_unit: f64) -> Result<PathPlan> {
    check_radii(frame, eps_min, samples_per_unit)?;
    Ok(PathPlan {
        segments: vec![
            Segment::Arc {
                radius: frame.r,
                start_angle: frame.arg_base,
                end_angle: frame.theta,
            },
            Segment::Ray {
                angle: frame.theta,
                start_radius: frame.r,
                end_radius: eps_min,
            },
        ],
        samples_per_unit,
        eps_min,
    })
}

/// Two-arc variant: half of the angular sweep at `|x_base|`, a radial
/// step down to `inner_ratio·|x_base|`, the rest of the sweep there, then the ray.
pub fn dogleg_path(
    frame: &SectorFrame,
    inner_ratio: f64,
    eps_min: f64,
    samples_per_unit: f64,
) -> Result<PathPlan> {
    check_radii(frame, eps_min, samples_per_unit)?;
    let inner = frame.r * inner_ratio;
    if !(inner_ratio > 0.0 && inner_ratio < 1.0) || inner <= eps_min {
        return Err(Error::InvalidConfig(format!("dogleg ratio {inner_ratio} out of range")));
    }
    let mid = 0.5 * (frame.arg_base + frame.theta);
    Ok(PathPlan {
        segments: vec![
            Segment::Arc {
                radius: frame.r,
                start_angle: frame.arg_base,
                end_angle: mid,
            },
            Segment::Ray {
                angle: mid,
                start_radius: frame.r,
                end_radius: inner,
            },
            Segment::Arc {
                radius: inner,
                start_angle: mid,
                end_angle: frame.theta,
            },
            Segment::Ray {
                angle: frame.theta,
                start_radius: inner,
                end_radius: eps_min,
            },
        ],
        samples_per_unit,
        eps_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sampled_points(plan: &PathPlan) -> Vec<PathPoint> {
        plan.segments
            .iter()
            .flat_map(|s| (0..=200).map(move |i| s.point(i as f64 / 200.0)))
            .collect()
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_for(Complex64::new(1.0, 0.0)), 0);
        assert_eq!(sigma_for(Complex64::new(0.0, 0.0)), 1);
        assert_eq!(sigma_for(Complex64::new(-1.5, 0.0)), 2);
        assert_eq!(sigma_for(Complex64::new(-1.5, 1e-9)), 0);
        assert_eq!(sigma_for(Complex64::new(-2.0, 0.0)), 3);
    }

    #[test]
    fn base_points() {
        assert!((base_point(1, 0, 5.0) - Complex64::new(-5.0, 0.0)).norm() < 1e-14);
        assert!((base_point(2, 0, 1.0) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let expected = Complex64::from_polar(1.0, 7.0 * PI / 4.0);
        assert!((base_point(4, 3, 1.0) - expected).norm() < 1e-15);
    }

    #[test]
    fn saddle_pair_shares_base_point_and_branch() {
        for k in 1..=4 {
            for j in 0..k as i64 {
                let (a, b) = SectorFrame::saddle_pair(k, j, 2.0, SectorFrame::default_beta(k));
                assert!((a.base_point() - b.base_point()).norm() < 1e-14);
                assert!((a.arg_base - b.arg_base).abs() < 1e-14);
                assert!((a.base_point() - base_point(k, j, 2.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn k1_paths_bound_the_asymptotic_cycle() {
        let (f0, f1) = SectorFrame::saddle_pair(1, 0, 5.0, SectorFrame::default_beta(1));
        let p0 = asymptotic_path(&f0, 0.05, 1000.0).unwrap();
        let p1 = asymptotic_path(&f1, 0.05, 1000.0).unwrap();
        assert_eq!(
            p0.segments[0],
            Segment::Arc { radius: 5.0, start_angle: PI, end_angle: 0.0 }
        );
        assert_eq!(
            p0.segments[1],
            Segment::Ray { angle: 0.0, start_radius: 5.0, end_radius: 0.05 }
        );
        // Frame 1 sweeps the lower half plane, arg π → 2π.
        assert_eq!(
            p1.segments[0],
            Segment::Arc { radius: 5.0, start_angle: PI, end_angle: 2.0 * PI }
        );
        let mid = p1.segments[0].point(0.5).x;
        assert!(mid.im < -4.9);
    }

    #[test]
    fn degenerate_path_is_rejected() {
        let (f0, _) = SectorFrame::saddle_pair(1, 0, 5.0, 0.3);
        assert!(matches!(
            asymptotic_path(&f0, 10.0, 1000.0),
            Err(Error::DegeneratePath { .. })
        ));
    }

    #[test]
    fn formal_class_validation() {
        let one = Poly1::constant(Complex64::new(1.0, 0.0));
        assert!(FormalClass::new(1, Complex64::new(0.0, 0.0), one.clone()).is_ok());
        assert!(FormalClass::with_sigma(1, Complex64::new(-1.0, 0.0), 1, one.clone()).is_err());
        assert!(FormalClass::new(1, Complex64::new(0.5, 0.0), Poly1::constant(Complex64::new(0.0, 0.0))).is_err());
        let too_long = Poly1::new(vec![Complex64::new(1.0, 0.0); 3]);
        assert!(FormalClass::new(1, Complex64::new(0.5, 0.0), too_long).is_err());
    }

    proptest! {
        #[test]
        fn sigma_keeps_shift_off_nonpositive_reals(re in -50.0f64..50.0, im in -1.0f64..1.0, real in proptest::bool::ANY) {
            let mu = Complex64::new(if real { re.round() * 0.5 } else { re }, if real { 0.0 } else { im });
            let s = mu + sigma_for(mu) as f64;
            prop_assert!(!(s.im == 0.0 && s.re <= 0.0));
        }

        #[test]
        fn paths_stay_in_their_sector(k in 1u32..=4, j in 0i64..4, r in 0.5f64..6.0, eps_frac in 0.001f64..0.5, dogleg in proptest::bool::ANY) {
            let j = j % k as i64;
            let beta = SectorFrame::default_beta(k);
            let (lower, upper) = SectorFrame::saddle_pair(k, j, r, beta);
            for frame in [lower, upper] {
                let eps = r * eps_frac * 0.5;
                let plan = if dogleg {
                    dogleg_path(&frame, 0.6, eps, 100.0).unwrap()
                } else {
                    asymptotic_path(&frame, eps, 100.0).unwrap()
                };
                prop_assert!(plan.is_continuous());
                let pts = sampled_points(&plan);
                let min = pts.iter().map(|p| p.x.norm()).fold(f64::INFINITY, f64::min);
                let max = pts.iter().map(|p| p.x.norm()).fold(0.0, f64::max);
                prop_assert!((min - eps).abs() < 1e-12 * r);
                prop_assert!((max - r).abs() < 1e-12 * r);
                for p in &pts {
                    prop_assert!((p.log_x.im - frame.theta).abs() <= frame.half_aperture() + 1e-12);
                    prop_assert!((p.log_x.exp() - p.x).norm() <= 1e-12 * p.x.norm());
                }
            }
        }
    }
}
