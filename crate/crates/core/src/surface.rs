//! Rotational capillary hypersurfaces clipped to the unit ball.
//!
//! A surface is stored as a uniformly sampled meridian `(x1, x2, α)(s)`
//! together with the ambient index of its rotation axis. A point of the
//! hypersurface is `x1(s) e_axis + x2(s) ω` with `ω` a unit vector of the
//! `n`-dimensional complement of the axis, and the unit normal is
//! `N = sin α e_axis − cos α ω`. Each meridian end is either a pole on the
//! axis or a boundary ring on the unit sphere.

use std::f64::consts::PI;

use serde::Serialize;

use crate::conformal::{dot, AmbientVector, Direction};
use crate::delaunay::{self, DelaunayKind, MeridianCurve, MeridianState};
use crate::quadrature::{simpson, simpson_fn, sphere_area};
use crate::{Error, Result};

/// Tolerance on `|X| = 1` when clipping meridians.
pub const CLIP_TOL: f64 = 1e-12;
/// Largest admissible difference between the two ring contact angles.
pub const ANGLE_MISMATCH: f64 = 1e-6;
/// Contact angles within this distance of `0` or `π` are rejected.
pub const DEGENERATE_ANGLE: f64 = 1e-3;
/// Default meridian step.
pub const DEFAULT_STEP: f64 = 1e-3;

pub const NORMAL_CONVENTION: &str = "N = sin(alpha) e_axis - cos(alpha) omega; N points into T";

/// Panels per polar interval when integrating over the wetted region.
const POLAR_PANELS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum End {
    /// Meridian meets the rotation axis (`x2 = 0`).
    Pole,
    /// Meridian meets the unit sphere in a boundary ring.
    Ring,
}

/// How a surface was generated; used to rebuild it on a refined grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Recipe {
    Delaunay { h: f64, f: f64 },
    Disk { center: f64 },
    Cap { h: f64, center: f64 },
    ClosedSphere { radius: f64 },
}

/// Angular factor of a separable integrand `g(s) · Y(ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularMode {
    /// `Y ≡ 1`: factor `|S^{n−1}|`.
    Zero,
    /// Product of two matching degree-one harmonics `ω_j ω_j`: factor `|S^{n−1}|/n`.
    One,
}

impl AngularMode {
    pub fn from_index(m: usize) -> Result<Self> {
        match m {
            0 => Ok(Self::Zero),
            1 => Ok(Self::One),
            _ => Err(Error::Unsupported(format!("angular mode {m}"))),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Self::Zero => 0,
            Self::One => 1,
        }
    }
}

/// Principal curvatures of a rotational hypersurface at one meridian point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeData {
    /// Meridian curvature `−α'`.
    pub kappa_m: f64,
    /// Parallel curvature `cos α / x2`, multiplicity `n − 1`.
    pub kappa_p: f64,
    /// `|σ|² = κ_m² + (n−1) κ_p²`.
    pub sigma_sq: f64,
}

/// Radial parts of `V = N + Hx` and `W = (1+|x|²)N − 2⟨x,N⟩x` at a sample.
///
/// Axial components multiply nothing; transverse ones multiply `ω_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldProfile {
    pub v_axial: f64,
    pub w_axial: f64,
    pub v_transverse: f64,
    pub w_transverse: f64,
}

/// Boundary ring geometry in the meridian half plane `(axial, radial)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ring {
    pub index: usize,
    pub position: [f64; 2],
    /// Outward conormal `ν` of `∂M` in `M`.
    pub conormal: [f64; 2],
    pub normal: [f64; 2],
    /// Outward conormal `ν̄` of `∂Ω` in `Ω`.
    pub sphere_conormal: [f64; 2],
    pub theta: f64,
}

impl Ring {
    /// Polar angle of the ring measured from the positive axis.
    pub fn polar_angle(&self) -> f64 {
        self.position[1].atan2(self.position[0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarInterval {
    pub from: f64,
    pub to: f64,
    pub multiplicity: u32,
}

/// The wetted part `Ω` of the unit sphere, counted with multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WettedRegion {
    pub intervals: Vec<PolarInterval>,
    pub area: f64,
    /// `∫_Ω x da`.
    pub first_moment: AmbientVector,
    pub max_multiplicity: u32,
}

/// The generalized body `T` with `∂T = M ∪ Ω`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnclosedBody {
    pub volume: f64,
    /// `∫_T x dv`.
    pub moments: AmbientVector,
    pub centroid: AmbientVector,
}

#[derive(Debug, Clone)]
pub struct RotationalCapillarySurface {
    pub n: usize,
    pub h: f64,
    pub force: f64,
    pub kind: DelaunayKind,
    /// Ambient coordinate index of the rotation axis.
    pub axis: usize,
    pub recipe: Recipe,
    samples: Vec<MeridianState>,
    step: f64,
    ends: [End; 2],
    theta: Option<f64>,
    clip_radius: f64,
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension n = {n} must be at least 2")));
    }
    Ok(())
}

/// Intervals for a meridian of the given length: a positive multiple of 4.
fn intervals_for(length: f64, step: f64) -> Result<usize> {
    if !(step > 0.0) {
        return Err(Error::Domain(format!("step {step} must be positive")));
    }
    Ok(4 * ((length / (4.0 * step)).round() as usize).max(1))
}

/// Walk from the origin in one direction to the first sample with `|X| > radius`
/// and locate the crossing on the RK4 trajectory.
fn clip_point(curve: &MeridianCurve, forward: bool, radius: f64) -> Result<MeridianState> {
    let r2 = radius * radius;
    let o = curve.origin;
    let idx: Box<dyn Iterator<Item = usize>> = if forward {
        Box::new(o..curve.states.len())
    } else {
        Box::new((0..=o).rev())
    };
    let mut prev: Option<usize> = None;
    for i in idx {
        if curve.states[i].radius_sq() > r2 {
            let Some(p) = prev else {
                return Err(Error::Containment("meridian origin lies outside the sphere".into()));
            };
            let from = curve.states[p];
            let ds = curve.states[i].s - from.s;
            return delaunay::locate_event(&from, curve.h, curve.n, ds, |st| st.radius_sq() - r2);
        }
        prev = Some(i);
    }
    Err(Error::Containment(format!(
        "meridian does not leave the ball of radius {radius} on the {} side",
        if forward { "forward" } else { "backward" }
    )))
}

impl RotationalCapillarySurface {
    /// Clip a symmetric Delaunay meridian to the unit sphere and resample it
    /// on a uniform RK4 grid whose ends lie on the sphere.
    pub fn build(meridian: &MeridianCurve) -> Result<Self> {
        Self::from_meridian(meridian, 1.0, None)
    }

    /// Like [`build`](Self::build) but clips at `|X| = radius`; only useful as a
    /// negative control for the boundary checks.
    pub fn build_clipped_at(meridian: &MeridianCurve, radius: f64) -> Result<Self> {
        Self::from_meridian(meridian, radius, None)
    }

    /// Symmetric Delaunay segment for `(H, F)` built in one call.
    pub fn delaunay(n: usize, h: f64, f: f64, step: f64) -> Result<Self> {
        let curve = delaunay::symmetric_segment(n, h, f, step)?;
        let mut surface = Self::build(&curve)?;
        // report the requested force rather than the one re-evaluated at the start state
        surface.force = f;
        surface.recipe = Recipe::Delaunay { h, f };
        Ok(surface)
    }

    fn from_meridian(curve: &MeridianCurve, radius: f64, intervals: Option<usize>) -> Result<Self> {
        check_n(curve.n)?;
        let kind = curve.kind();
        if kind.is_analytic() {
            return Err(Error::Construction(format!(
                "{kind} surfaces are built analytically"
            )));
        }
        let (n, h) = (curve.n, curve.h);
        let origin = curve.states[curve.origin];
        let right = clip_point(curve, true, radius)?;
        let left = clip_point(curve, false, radius)?;
        let len_r = right.s - origin.s;
        let len_l = origin.s - left.s;
        if (len_r - len_l).abs() > 1e-9 * (len_r + len_l) {
            return Err(Error::Construction(format!(
                "meridian is not symmetric about its origin: half lengths {len_l} and {len_r}"
            )));
        }
        let total = len_l + len_r;
        let intervals = match intervals {
            Some(m) => m,
            None => intervals_for(total, curve.step)?,
        };
        let half = intervals / 2;
        let step = total / intervals as f64;
        let march = |sign: f64| -> Result<Vec<MeridianState>> {
            let mut out = Vec::with_capacity(half + 1);
            let mut cur = origin;
            out.push(cur);
            for k in 1..=half {
                cur = delaunay::rk4_step(&cur, h, n, sign * step)?;
                cur.s = origin.s + sign * k as f64 * step;
                out.push(cur);
            }
            Ok(out)
        };
        let fwd = march(1.0)?;
        let bwd = march(-1.0)?;
        let mut samples: Vec<MeridianState> = bwd.into_iter().rev().collect();
        samples.extend_from_slice(&fwd[1..]);
        // interior containment
        for st in &samples[1..samples.len() - 1] {
            if st.radius_sq().sqrt() >= radius {
                return Err(Error::Containment(format!(
                    "interior meridian point at s = {} reaches |X| = {}",
                    st.s,
                    st.radius_sq().sqrt()
                )));
            }
        }
        let mut surface = Self {
            n,
            h,
            force: curve.force,
            kind,
            axis: 0,
            recipe: Recipe::Delaunay { h, f: curve.force },
            samples,
            step,
            ends: [End::Ring, End::Ring],
            theta: None,
            clip_radius: radius,
        };
        surface.theta = Some(surface.contact_angle()?);
        Ok(surface)
    }

    /// Totally geodesic disk `{x_axis = center}` with normal `+e_axis`,
    /// parametrized from its center (a pole) outward; the axis is the last
    /// ambient coordinate.
    pub fn disk(n: usize, center: f64, step: f64) -> Result<Self> {
        let radius = (1.0 - center * center).sqrt();
        if !(center.abs() < 1.0) || radius < DEGENERATE_ANGLE {
            return Err(Error::Construction(format!("disk center {center} must lie inside the ball")));
        }
        let intervals = intervals_for(radius, step)?;
        Self::disk_with_intervals(n, center, intervals)
    }

    /// The flat disk through the origin.
    pub fn equatorial_disk(n: usize, step: f64) -> Result<Self> {
        Self::disk(n, 0.0, step)
    }

    fn disk_with_intervals(n: usize, center: f64, intervals: usize) -> Result<Self> {
        check_n(n)?;
        let radius = (1.0 - center * center).sqrt();
        let step = radius / intervals as f64;
        let samples = (0..=intervals)
            .map(|i| {
                let s = i as f64 * step;
                let x2 = if i == intervals { radius } else { s };
                MeridianState::new(s, center, x2, PI / 2.0)
            })
            .collect();
        let mut surface = Self {
            n,
            h: 0.0,
            force: 0.0,
            kind: DelaunayKind::Hyperplane,
            axis: n,
            recipe: Recipe::Disk { center },
            samples,
            step,
            ends: [End::Pole, End::Ring],
            theta: None,
            clip_radius: 1.0,
        };
        surface.theta = Some(surface.contact_angle()?);
        Ok(surface)
    }

    /// Spherical cap: the part inside the ball of the sphere of radius
    /// `1/|h|` centered at `center · e_axis`, oriented so that its mean
    /// curvature is `h`. The axis is the last ambient coordinate.
    pub fn cap(n: usize, h: f64, center: f64, step: f64) -> Result<Self> {
        let (_, length) = Self::cap_geometry(h, center)?;
        let intervals = intervals_for(length, step)?;
        Self::cap_with_intervals(n, h, center, intervals)
    }

    /// Returns `(cos β*, arc length from the inner pole to the ring)`.
    fn cap_geometry(h: f64, center: f64) -> Result<(f64, f64)> {
        if !(h.abs() > 0.0) || !h.is_finite() {
            return Err(Error::Construction(format!("cap needs a nonzero mean curvature, got {h}")));
        }
        let r = 1.0 / h.abs();
        let c = center;
        if !((c.abs() - r).abs() < 1.0 && c.abs() + r > 1.0) || c == 0.0 {
            return Err(Error::Construction(format!(
                "sphere of radius {r} centered at {c} does not cross the unit sphere"
            )));
        }
        let cos_b = ((1.0 - c * c - r * r) / (2.0 * c * r)).clamp(-1.0, 1.0);
        let beta = cos_b.acos();
        let length = if c > 0.0 { r * (PI - beta) } else { r * beta };
        Ok((cos_b, length))
    }

    fn cap_with_intervals(n: usize, h: f64, center: f64, intervals: usize) -> Result<Self> {
        check_n(n)?;
        let (_, length) = Self::cap_geometry(h, center)?;
        let r = 1.0 / h.abs();
        let step = length / intervals as f64;
        // From the inner pole: clockwise (N toward the center, H = 1/r) when the
        // pole is at center − r, counterclockwise (H = −1/r) otherwise.
        let clockwise = center > 0.0;
        let samples: Vec<MeridianState> = (0..=intervals)
            .map(|i| {
                let s = i as f64 * step;
                let (beta, alpha) = if clockwise {
                    let b = PI - s / r;
                    (b, b - PI / 2.0)
                } else {
                    let b = s / r;
                    (b, b + PI / 2.0)
                };
                let x2 = if i == 0 { 0.0 } else { r * beta.sin() };
                MeridianState::new(s, center + r * beta.cos(), x2, alpha)
            })
            .collect();
        let natural_h = if clockwise { 1.0 / r } else { -1.0 / r };
        let (samples, ends) = if natural_h.signum() == h.signum() {
            (samples, [End::Pole, End::Ring])
        } else {
            (reverse_meridian(&samples, step), [End::Ring, End::Pole])
        };
        let mut surface = Self {
            n,
            h,
            force: 0.0,
            kind: DelaunayKind::Sphere,
            axis: n,
            recipe: Recipe::Cap { h, center },
            samples,
            step,
            ends,
            theta: None,
            clip_radius: 1.0,
        };
        surface.theta = Some(surface.contact_angle()?);
        Ok(surface)
    }

    /// Closed round sphere of the given radius centered at the origin, inward
    /// normal, `H = 1/radius`.
    pub fn closed_sphere(n: usize, radius: f64, step: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(Error::Construction(format!(
                "closed sphere radius {radius} must lie in (0, 1)"
            )));
        }
        let intervals = intervals_for(PI * radius, step)?;
        Self::closed_sphere_with_intervals(n, radius, intervals)
    }

    fn closed_sphere_with_intervals(n: usize, radius: f64, intervals: usize) -> Result<Self> {
        check_n(n)?;
        let step = PI * radius / intervals as f64;
        let samples = (0..=intervals)
            .map(|i| {
                let s = i as f64 * step;
                let beta = PI - s / radius;
                let x2 = if i == 0 || i == intervals { 0.0 } else { radius * beta.sin() };
                MeridianState::new(s, radius * beta.cos(), x2, beta - PI / 2.0)
            })
            .collect();
        Ok(Self {
            n,
            h: 1.0 / radius,
            force: 0.0,
            kind: DelaunayKind::Sphere,
            axis: n,
            recipe: Recipe::ClosedSphere { radius },
            samples,
            step,
            ends: [End::Pole, End::Pole],
            theta: None,
            clip_radius: 1.0,
        })
    }

    /// The same surface on a grid with `factor` times as many intervals.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let intervals = self.intervals() * factor.max(1);
        match self.recipe {
            Recipe::Delaunay { h, f } => {
                let curve = delaunay::symmetric_segment(self.n, h, f, self.step / factor as f64)?;
                Self::from_meridian(&curve, self.clip_radius, Some(intervals))
            }
            Recipe::Disk { center } => Self::disk_with_intervals(self.n, center, intervals),
            Recipe::Cap { h, center } => Self::cap_with_intervals(self.n, h, center, intervals),
            Recipe::ClosedSphere { radius } => {
                Self::closed_sphere_with_intervals(self.n, radius, intervals)
            }
        }
    }

    pub fn recipe_is_cap(&self) -> bool {
        matches!(self.recipe, Recipe::Cap { .. })
    }

    pub fn samples(&self) -> &[MeridianState] {
        &self.samples
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn intervals(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn ends(&self) -> [End; 2] {
        self.ends
    }

    pub fn is_closed(&self) -> bool {
        self.ends == [End::Pole, End::Pole]
    }

    /// Contact angle fixed at construction; `None` for closed surfaces.
    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    pub fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    /// Ambient indices of the `n` transverse directions, in order.
    pub fn transverse_indices(&self) -> Vec<usize> {
        (0..=self.n).filter(|&k| k != self.axis).collect()
    }

    /// `axial e_axis + radial ω`.
    pub fn embed(&self, axial: f64, radial: f64, omega: &[f64]) -> AmbientVector {
        let mut v = vec![0.0; self.n + 1];
        v[self.axis] = axial;
        for (k, idx) in self.transverse_indices().into_iter().enumerate() {
            v[idx] = radial * omega[k];
        }
        AmbientVector::new(v)
    }

    fn check_omega(&self, omega: &[f64]) -> Result<()> {
        if omega.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: omega.len() });
        }
        let norm = dot(omega, omega).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("omega has norm {norm}")));
        }
        Ok(())
    }

    /// Linearly interpolated meridian state at arc length `s`.
    pub fn state_at(&self, s: f64) -> Result<MeridianState> {
        let lo = self.samples[0].s;
        let hi = self.samples[self.intervals()].s;
        let slack = 1e-12 * (hi - lo).abs().max(1.0);
        if !(s >= lo - slack && s <= hi + slack) {
            return Err(Error::OutOfRange { s, lo, hi });
        }
        let t = ((s - lo) / self.step).clamp(0.0, self.intervals() as f64);
        let i = (t.floor() as usize).min(self.intervals() - 1);
        let w = t - i as f64;
        let (a, b) = (self.samples[i], self.samples[i + 1]);
        let mix = |p: f64, q: f64| (1.0 - w) * p + w * q;
        Ok(MeridianState::new(s, mix(a.x1, b.x1), mix(a.x2, b.x2), mix(a.alpha, b.alpha)))
    }

    pub fn point(&self, s: f64, omega: &[f64]) -> Result<AmbientVector> {
        self.check_omega(omega)?;
        let st = self.state_at(s)?;
        Ok(self.embed(st.x1, st.x2, omega))
    }

    pub fn normal(&self, s: f64, omega: &[f64]) -> Result<Direction> {
        self.check_omega(omega)?;
        let st = self.state_at(s)?;
        let (sa, ca) = st.alpha.sin_cos();
        Direction::new(self.embed(sa, -ca, omega).into_inner())
    }

    /// Principal curvatures at sample `i`; poles are umbilic with curvature `H`.
    pub fn shape_data_at(&self, i: usize) -> ShapeData {
        self.shape_of(&self.samples[i])
    }

    /// Principal curvatures at arc length `s`.
    pub fn shape_data(&self, s: f64) -> Result<ShapeData> {
        Ok(self.shape_of(&self.state_at(s)?))
    }

    fn shape_of(&self, st: &MeridianState) -> ShapeData {
        let n = self.n as f64;
        let (kappa_m, kappa_p) = match delaunay::ode_rhs(st, self.h, self.n) {
            Ok(rhs) => (-rhs[2], st.alpha.cos() / st.x2),
            Err(_) => (self.h, self.h),
        };
        ShapeData { kappa_m, kappa_p, sigma_sq: kappa_m * kappa_m + (n - 1.0) * kappa_p * kappa_p }
    }

    /// Radial parts of `N + Hx` and `(1+|x|²)N − 2⟨x,N⟩x` at sample `i`.
    pub fn field_profile(&self, i: usize) -> FieldProfile {
        field_profile(&self.samples[i], self.h)
    }

    /// Boundary rings in meridian order.
    pub fn rings(&self) -> Result<Vec<Ring>> {
        let mut out = Vec::new();
        for (e, end) in self.ends.iter().enumerate() {
            if *end != End::Ring {
                continue;
            }
            let index = if e == 0 { 0 } else { self.intervals() };
            let st = self.samples[index];
            let sign = if e == 0 { -1.0 } else { 1.0 };
            let (sa, ca) = st.alpha.sin_cos();
            let conormal = [sign * ca, sign * sa];
            let normal = [sa, -ca];
            let r = st.radius_sq().sqrt();
            let xhat = [st.x1 / r, st.x2 / r];
            let tau = [-xhat[1], xhat[0]];
            let tn = tau[0] * normal[0] + tau[1] * normal[1];
            if tn == 0.0 {
                return Err(Error::Orientation("normal is tangent to the sphere at the ring".into()));
            }
            let sphere_conormal = if tn < 0.0 { tau } else { [-tau[0], -tau[1]] };
            let cos_t = conormal[0] * sphere_conormal[0] + conormal[1] * sphere_conormal[1];
            let sin_t = conormal[0] * xhat[0] + conormal[1] * xhat[1];
            if !(sin_t > 0.0) {
                return Err(Error::Orientation(format!(
                    "conormal points into the ball at the ring (⟨ν,x⟩ = {sin_t})"
                )));
            }
            let theta = cos_t.clamp(-1.0, 1.0).acos();
            if (theta.sin() - sin_t).abs() > 1e-8 {
                return Err(Error::Orientation(format!(
                    "cos θ = {cos_t} and sin θ = {sin_t} are inconsistent"
                )));
            }
            out.push(Ring {
                index,
                position: [st.x1, st.x2],
                conormal,
                normal,
                sphere_conormal,
                theta,
            });
        }
        Ok(out)
    }

    /// Contact angle between `M` and the sphere, checked equal on all rings.
    pub fn contact_angle(&self) -> Result<f64> {
        let rings = self.rings()?;
        let Some(first) = rings.first() else {
            return Err(Error::NotApplicable("closed surface has no contact angle".into()));
        };
        for r in &rings[1..] {
            if (r.theta - first.theta).abs() > ANGLE_MISMATCH {
                return Err(Error::NotCapillary { left: first.theta, right: r.theta });
            }
        }
        let theta = rings.iter().map(|r| r.theta).sum::<f64>() / rings.len() as f64;
        if !(DEGENERATE_ANGLE..=PI - DEGENERATE_ANGLE).contains(&theta) {
            return Err(Error::DegenerateAngle(theta));
        }
        Ok(theta)
    }

    /// `q = 1/sin θ + cot θ · σ(ν,ν)` with `σ(ν,ν) = κ_m` on the ring.
    pub fn robin_coefficient(&self) -> Result<f64> {
        let theta = self
            .theta
            .ok_or_else(|| Error::NotApplicable("closed surface has no boundary".into()))?;
        let rings = self.rings()?;
        let kappa = self.shape_data_at(rings[0].index).kappa_m;
        Ok(1.0 / theta.sin() + kappa / theta.tan())
    }

    /// Boundary condition `‖ν − cos θ ν̄ − sin θ x‖` (max over rings) plus the
    /// largest deviation of the mean curvature from `H`, the latter measured
    /// with an eighth-order central difference of `α` independent of the ODE.
    pub fn capillarity_residual(&self) -> f64 {
        let mut ring_res: f64 = 0.0;
        if let (Some(theta), Ok(rings)) = (self.theta, self.rings()) {
            let (st, ct) = theta.sin_cos();
            for r in rings {
                let d = [
                    r.conormal[0] - ct * r.sphere_conormal[0] - st * r.position[0],
                    r.conormal[1] - ct * r.sphere_conormal[1] - st * r.position[1],
                ];
                ring_res = ring_res.max((d[0] * d[0] + d[1] * d[1]).sqrt());
            }
        }
        let n = self.n as f64;
        let h = self.step;
        let a: Vec<f64> = self.samples.iter().map(|s| s.alpha).collect();
        let mut h_dev: f64 = 0.0;
        const C: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
        for i in 4..self.samples.len().saturating_sub(4) {
            let st = self.samples[i];
            if st.x2 <= 0.0 {
                continue;
            }
            let da = (1..=4).map(|k| C[k - 1] * (a[i + k] - a[i - k])).sum::<f64>() / h;
            let mean = (-da + (n - 1.0) * st.alpha.cos() / st.x2) / n;
            h_dev = h_dev.max((mean - self.h).abs());
        }
        ring_res + h_dev
    }

    /// `∫_M g(s) Y(ω) da` for separable integrands, with
    /// `da = x2^{n−1} ds dω`, by composite Simpson along the meridian.
    ///
    /// `g` receives the sample index and state; it is not evaluated at poles,
    /// where the area weight vanishes.
    pub fn integrate_scalar(
        &self,
        mode: AngularMode,
        g: impl Fn(usize, &MeridianState) -> f64,
    ) -> f64 {
        simpson(&self.weighted_values(&g), self.step) * self.angular_factor(mode)
    }

    /// The same integral on every second sample (twice the step).
    pub fn integrate_scalar_coarse(
        &self,
        mode: AngularMode,
        g: impl Fn(usize, &MeridianState) -> f64,
    ) -> f64 {
        let values: Vec<f64> = self.weighted_values(&g).into_iter().step_by(2).collect();
        simpson(&values, 2.0 * self.step) * self.angular_factor(mode)
    }

    fn weighted_values(&self, g: &impl Fn(usize, &MeridianState) -> f64) -> Vec<f64> {
        let p = self.n as i32 - 1;
        self.samples
            .iter()
            .enumerate()
            .map(|(i, st)| {
                let w = st.x2.powi(p);
                if w == 0.0 {
                    0.0
                } else {
                    g(i, st) * w
                }
            })
            .collect()
    }

    pub fn angular_factor(&self, mode: AngularMode) -> f64 {
        let area = sphere_area(self.n - 1);
        match mode {
            AngularMode::Zero => area,
            AngularMode::One => area / self.n as f64,
        }
    }

    /// Full tensor-product quadrature over `(s, ψ)` for surfaces in `R^3`:
    /// Simpson in `s`, the periodic trapezoid rule with `angular` nodes in `ψ`.
    /// The integrand receives the ambient point and unit normal.
    pub fn integrate_product_grid(
        &self,
        angular: usize,
        f: impl Fn(&[f64], &[f64]) -> f64,
    ) -> Result<f64> {
        if self.n != 2 {
            return Err(Error::Unsupported(format!(
                "product-grid quadrature is implemented for n = 2 only (n = {})",
                self.n
            )));
        }
        let dpsi = 2.0 * PI / angular as f64;
        let values: Vec<f64> = self
            .samples
            .iter()
            .map(|st| {
                if st.x2 == 0.0 {
                    return 0.0;
                }
                let (sa, ca) = st.alpha.sin_cos();
                let ring: f64 = (0..angular)
                    .map(|j| {
                        let psi = j as f64 * dpsi;
                        let omega = [psi.cos(), psi.sin()];
                        let x = self.embed(st.x1, st.x2, &omega);
                        let nrm = self.embed(sa, -ca, &omega);
                        f(&x, &nrm)
                    })
                    .sum();
                ring * dpsi * st.x2
            })
            .collect();
        Ok(simpson(&values, self.step))
    }

    pub fn area(&self) -> f64 {
        self.integrate_scalar(AngularMode::Zero, |_, _| 1.0)
    }

    /// Wetted region: the sphere on the side into which `N` points at each
    /// ring, with winding multiplicity normalized to be nonnegative.
    pub fn wetted_region(&self) -> Result<WettedRegion> {
        let mut jumps: Vec<(f64, i64)> = Vec::new();
        for r in self.rings()? {
            let phi = r.polar_angle();
            let tangent = [-phi.sin(), phi.cos()];
            let into = [-r.sphere_conormal[0], -r.sphere_conormal[1]];
            let up = into[0] * tangent[0] + into[1] * tangent[1] > 0.0;
            jumps.push((phi, if up { 1 } else { -1 }));
        }
        jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut level = 0i64;
        let mut lowest = 0i64;
        for (_, j) in &jumps {
            level += j;
            lowest = lowest.min(level);
        }
        let mut w = -lowest;
        let mut breaks = vec![0.0];
        let mut mult = vec![w];
        for (phi, j) in &jumps {
            w += j;
            breaks.push(*phi);
            mult.push(w);
        }
        breaks.push(PI);

        let area_s = sphere_area(self.n - 1);
        let p = self.n as i32 - 1;
        let mut intervals = Vec::new();
        let mut area = 0.0;
        let mut axial = 0.0;
        for k in 0..mult.len() {
            let (a, b) = (breaks[k], breaks[k + 1]);
            if mult[k] == 0 || b <= a {
                continue;
            }
            let m = mult[k] as f64;
            area += m * area_s * simpson_fn(|t| t.sin().powi(p), a, b, POLAR_PANELS);
            axial += m * area_s * simpson_fn(|t| t.cos() * t.sin().powi(p), a, b, POLAR_PANELS);
            intervals.push(PolarInterval { from: a, to: b, multiplicity: mult[k] as u32 });
        }
        let mut first_moment = vec![0.0; self.n + 1];
        first_moment[self.axis] = axial;
        let max_multiplicity = intervals.iter().map(|i| i.multiplicity).max().unwrap_or(0);
        Ok(WettedRegion {
            intervals,
            area,
            first_moment: first_moment.into(),
            max_multiplicity,
        })
    }

    /// `∫_M φ[e_A] da` for every ambient coordinate direction.
    pub fn phi_masses(&self) -> AmbientVector {
        let mut out = vec![0.0; self.n + 1];
        out[self.axis] =
            -self.integrate_scalar(AngularMode::Zero, |_, st| field_profile(st, self.h).w_axial);
        // transverse directions integrate ω_j over the sphere: zero
        out.into()
    }

    /// Volume of `T` and `∫_T x dv` from `∫_M φ[e_A] da = −2(n+1)∫_T x_A dv`.
    pub fn enclosed_body(&self) -> Result<EnclosedBody> {
        let omega = self.wetted_region()?;
        let xn = self.integrate_scalar(AngularMode::Zero, |_, st| position_dot_normal(st));
        let volume = (-xn + omega.area) / (self.n as f64 + 1.0);
        if !(volume > 0.0) {
            return Err(Error::Orientation(format!(
                "enclosed volume {volume} is not positive"
            )));
        }
        let scale = -1.0 / (2.0 * (self.n as f64 + 1.0));
        let moments: Vec<f64> = self.phi_masses().iter().map(|m| scale * m).collect();
        let centroid = moments.iter().map(|m| m / volume).collect::<Vec<_>>();
        Ok(EnclosedBody { volume, moments: moments.into(), centroid: centroid.into() })
    }

    /// `∫_T x dv` by the divergence theorem applied to `x_A x`
    /// (`div = (n+2) x_A`) over `∂T = M ∪ Ω`.
    pub fn direct_moments(&self) -> Result<AmbientVector> {
        let omega = self.wetted_region()?;
        let mut out = vec![0.0; self.n + 1];
        let on_m = self.integrate_scalar(AngularMode::Zero, |_, st| st.x1 * position_dot_normal(st));
        out[self.axis] = (-on_m + omega.first_moment[self.axis]) / (self.n as f64 + 2.0);
        Ok(out.into())
    }
}

/// `⟨X, N⟩ = x1 sin α − x2 cos α`.
pub fn position_dot_normal(st: &MeridianState) -> f64 {
    let (sa, ca) = st.alpha.sin_cos();
    st.x1 * sa - st.x2 * ca
}

/// `⟨X, T⟩ = x1 cos α + x2 sin α` with `T` the meridian tangent.
pub fn position_dot_tangent(st: &MeridianState) -> f64 {
    let (sa, ca) = st.alpha.sin_cos();
    st.x1 * ca + st.x2 * sa
}

pub fn field_profile(st: &MeridianState, h: f64) -> FieldProfile {
    let (sa, ca) = st.alpha.sin_cos();
    let xx = st.radius_sq();
    let xn = st.x1 * sa - st.x2 * ca;
    FieldProfile {
        v_axial: sa + h * st.x1,
        w_axial: (1.0 + xx) * sa - 2.0 * xn * st.x1,
        v_transverse: -ca + h * st.x2,
        w_transverse: -(1.0 + xx) * ca - 2.0 * xn * st.x2,
    }
}

/// Traverse a uniformly sampled meridian backwards; this flips `N` and `H`.
fn reverse_meridian(samples: &[MeridianState], step: f64) -> Vec<MeridianState> {
    samples
        .iter()
        .rev()
        .enumerate()
        .map(|(i, st)| MeridianState::new(i as f64 * step, st.x1, st.x2, st.alpha + PI))
        .collect()
}
