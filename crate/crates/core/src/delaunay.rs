//! Meridians of rotational constant-mean-curvature hypersurfaces.
//!
//! The generating curve `(x1(s), x2(s))` in the half plane `x2 > 0` is
//! parametrized by arc length with tangent angle `alpha` and normal
//! `N = (sin α, −cos α)`; it solves
//!
//! ```text
//! x1' = cos α,   x2' = sin α,   α' = −nH + (n−1) cos α / x2
//! ```
//!
//! with first integral `F = x2^{n−1} cos α − H x2^n` (the force).

use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;

use crate::{Error, Result};

/// Radius below which a trajectory is treated as touching the axis.
pub const X2_MIN: f64 = 1e-6;
/// Default zero threshold for `H` and `F` in [`classify`].
pub const CLASSIFY_TOL: f64 = 1e-10;
/// Longest arc length explored on each side while looking for the sphere.
pub const MAX_HALF_LENGTH: f64 = 50.0;
/// Bisection runs to full double precision or this many halvings.
const ROOT_ITERATIONS: usize = 200;
const ROOT_UPPER: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeridianState {
    pub s: f64,
    pub x1: f64,
    pub x2: f64,
    pub alpha: f64,
}

impl MeridianState {
    pub fn new(s: f64, x1: f64, x2: f64, alpha: f64) -> Self {
        Self { s, x1, x2, alpha }
    }

    /// `|X|²` of the meridian point.
    pub fn radius_sq(&self) -> f64 {
        self.x1 * self.x1 + self.x2 * self.x2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DelaunayKind {
    Unduloid,
    Cylinder,
    Nodoid,
    Sphere,
    Catenoid,
    Hyperplane,
}

impl DelaunayKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Unduloid => "Unduloid",
            Self::Cylinder => "Cylinder",
            Self::Nodoid => "Nodoid",
            Self::Sphere => "Sphere",
            Self::Catenoid => "Catenoid",
            Self::Hyperplane => "Hyperplane",
        }
    }

    /// Sphere and hyperplane meridians reach the axis and are built analytically.
    pub fn is_analytic(self) -> bool {
        matches!(self, Self::Sphere | Self::Hyperplane)
    }
}

impl fmt::Display for DelaunayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sampled meridian with its constants of motion.
#[derive(Debug, Clone, PartialEq)]
pub struct MeridianCurve {
    pub n: usize,
    pub h: f64,
    pub force: f64,
    pub step: f64,
    /// Ordered by increasing `s`.
    pub states: Vec<MeridianState>,
    /// Index of the integration start state.
    pub origin: usize,
    /// Integration stopped because `x2` dropped below [`X2_MIN`].
    pub axis_touching: bool,
}

impl MeridianCurve {
    /// `max |F(state) − F|` over the samples.
    pub fn force_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|st| (force(st, self.h, self.n) - self.force).abs())
            .fold(0.0, f64::max)
    }

    pub fn kind(&self) -> DelaunayKind {
        classify(self.n, self.h, self.force, CLASSIFY_TOL)
    }

    /// CSV with header `s,x1,x2,alpha,force`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,x1,x2,alpha,force\n");
        for st in &self.states {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                st.s,
                st.x1,
                st.x2,
                st.alpha,
                force(st, self.h, self.n)
            );
        }
        out
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension n = {n} must be at least 2")));
    }
    Ok(())
}

/// Right-hand side `(cos α, sin α, −nH + (n−1)cos α / x2)`.
pub fn ode_rhs(state: &MeridianState, h: f64, n: usize) -> Result<[f64; 3]> {
    if !(state.x2 > 0.0) {
        return Err(Error::AxisContact { s: state.s, x2: state.x2 });
    }
    let (sin_a, cos_a) = state.alpha.sin_cos();
    Ok([
        cos_a,
        sin_a,
        -(n as f64) * h + (n as f64 - 1.0) * cos_a / state.x2,
    ])
}

/// One classical Runge–Kutta step of signed length `ds`.
pub fn rk4_step(state: &MeridianState, h: f64, n: usize, ds: f64) -> Result<MeridianState> {
    let shift = |k: &[f64; 3], c: f64| MeridianState {
        s: state.s + c * ds,
        x1: state.x1 + c * ds * k[0],
        x2: state.x2 + c * ds * k[1],
        alpha: state.alpha + c * ds * k[2],
    };
    let k1 = ode_rhs(state, h, n)?;
    let k2 = ode_rhs(&shift(&k1, 0.5), h, n)?;
    let k3 = ode_rhs(&shift(&k2, 0.5), h, n)?;
    let k4 = ode_rhs(&shift(&k3, 1.0), h, n)?;
    let comb = |i: usize| ds / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    Ok(MeridianState {
        s: state.s + ds,
        x1: state.x1 + comb(0),
        x2: state.x2 + comb(1),
        alpha: state.alpha + comb(2),
    })
}

/// `x2^{n−1} cos α − H x2^n`.
pub fn force(state: &MeridianState, h: f64, n: usize) -> f64 {
    let r = state.x2;
    r.powi(n as i32 - 1) * state.alpha.cos() - h * r.powi(n as i32)
}

/// Fixed-step RK4 trajectory over `[init.s, init.s + length]`.
///
/// A trajectory that reaches `x2 <= X2_MIN` is truncated there and flagged
/// with `axis_touching`.
pub fn integrate(
    n: usize,
    h: f64,
    init: MeridianState,
    step: f64,
    length: f64,
) -> Result<MeridianCurve> {
    check_n(n)?;
    if !(init.x2 > 0.0) {
        return Err(Error::AxisContact { s: init.s, x2: init.x2 });
    }
    if !(step > 0.0) || !(length > 0.0) {
        return Err(Error::Domain(format!(
            "step ({step}) and length ({length}) must be positive"
        )));
    }
    let f = force(&init, h, n);
    let full = ((length / step) * (1.0 + 1e-12)).floor() as usize;
    let remainder = length - full as f64 * step;
    let mut plan: Vec<f64> = vec![step; full];
    if remainder > 1e-9 * step {
        plan.push(remainder);
    }
    let mut states = vec![init];
    let mut axis_touching = false;
    let mut cur = init;
    for (k, ds) in plan.into_iter().enumerate() {
        match rk4_step(&cur, h, n, ds) {
            Ok(mut next) if next.x2 > X2_MIN => {
                // arc length from the index, not by accumulation
                next.s = if k < full { init.s + (k + 1) as f64 * step } else { init.s + length };
                cur = next;
                states.push(cur);
            }
            _ => {
                axis_touching = true;
                break;
            }
        }
    }
    Ok(MeridianCurve {
        n,
        h,
        force: f,
        step,
        states,
        origin: 0,
        axis_touching,
    })
}

/// Classification of the meridian family by `(H, F)`.
///
/// `Cylinder` is the `FH > 0` member whose force equals the equilibrium
/// force `sgn(H) r^{n−1}/n` at `r = (n−1)/(n|H|)`.
pub fn classify(n: usize, h: f64, f: f64, tol: f64) -> DelaunayKind {
    let h_zero = h.abs() <= tol;
    let f_zero = f.abs() <= tol;
    match (h_zero, f_zero) {
        (true, true) => DelaunayKind::Hyperplane,
        (true, false) => DelaunayKind::Catenoid,
        (false, true) => DelaunayKind::Sphere,
        (false, false) if f * h > 0.0 => {
            if (f - equilibrium_force(n, h)).abs() <= tol {
                DelaunayKind::Cylinder
            } else {
                DelaunayKind::Unduloid
            }
        }
        _ => DelaunayKind::Nodoid,
    }
}

/// Radius of the cylinder with mean curvature `h`.
pub fn equilibrium_radius(n: usize, h: f64) -> f64 {
    (n as f64 - 1.0) / (n as f64 * h.abs())
}

/// Force of the cylinder with mean curvature `h`.
pub fn equilibrium_force(n: usize, h: f64) -> f64 {
    let r = equilibrium_radius(n, h);
    h.signum() * r.powi(n as i32 - 1) / n as f64
}

fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut glo = g(lo);
    let ghi = g(hi);
    if glo == 0.0 {
        return Some(lo);
    }
    if ghi == 0.0 {
        return Some(hi);
    }
    if glo.signum() == ghi.signum() {
        return None;
    }
    for _ in 0..ROOT_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Some(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// State with `x1 = 0` and horizontal tangent (`α ∈ {0, π}`) from which the
/// meridian is mirror symmetric about `{x1 = 0}`.
///
/// Unduloids start at the neck, nodoids at the inner radius of the loop,
/// catenoids at the neck.
pub fn symmetric_start(n: usize, h: f64, f: f64) -> Result<MeridianState> {
    check_n(n)?;
    let kind = classify(n, h, f, CLASSIFY_TOL);
    let p = n as i32 - 1;
    let (c, r) = match kind {
        DelaunayKind::Sphere | DelaunayKind::Hyperplane => {
            return Err(Error::Construction(format!(
                "{kind} meridians touch the axis and are built analytically"
            )))
        }
        DelaunayKind::Cylinder => (h.signum(), equilibrium_radius(n, h)),
        DelaunayKind::Catenoid => (f.signum(), f.abs().powf(1.0 / p as f64)),
        DelaunayKind::Unduloid => {
            let r_eq = equilibrium_radius(n, h);
            let g = |r: f64| r.powi(p) - h.abs() * r.powi(p + 1) - f.abs();
            let r = bisect(g, 0.0, r_eq).ok_or_else(|| {
                Error::Construction(format!(
                    "|F| = {} exceeds the cylinder force {}; no unduloid exists",
                    f.abs(),
                    equilibrium_force(n, h).abs()
                ))
            })?;
            (h.signum(), r)
        }
        DelaunayKind::Nodoid => {
            let c = -h.signum();
            let g = |r: f64| c * r.powi(p) - h * r.powi(p + 1) - f;
            let r = bisect(g, 0.0, ROOT_UPPER).ok_or_else(|| {
                Error::Construction(format!("no nodoid inner radius in (0, {ROOT_UPPER}]"))
            })?;
            (c, r)
        }
    };
    if !(r > X2_MIN) {
        return Err(Error::Construction(format!("start radius {r} is degenerate")));
    }
    let alpha = if c > 0.0 { 0.0 } else { std::f64::consts::PI };
    Ok(MeridianState::new(0.0, 0.0, r, alpha))
}

/// Integrate from `start` with signed step until `|X| > 1`, returning every
/// sample including the first one outside the unit sphere.
fn march_to_sphere(
    n: usize,
    h: f64,
    start: MeridianState,
    step: f64,
) -> Result<Vec<MeridianState>> {
    let mut out = vec![start];
    let mut cur = start;
    while cur.radius_sq() <= 1.0 {
        if (cur.s - start.s).abs() > MAX_HALF_LENGTH {
            return Err(Error::Containment(format!(
                "meridian stays inside the unit ball over arc length {MAX_HALF_LENGTH}"
            )));
        }
        cur = rk4_step(&cur, h, n, step)?;
        if cur.x2 <= X2_MIN {
            return Err(Error::AxisContact { s: cur.s, x2: cur.x2 });
        }
        out.push(cur);
    }
    Ok(out)
}

/// Segment through the symmetric start state, integrated in both arc-length
/// directions until it first leaves the closed unit ball on each side.
pub fn symmetric_segment(n: usize, h: f64, f: f64, step: f64) -> Result<MeridianCurve> {
    if !(step > 0.0) {
        return Err(Error::Domain(format!("step {step} must be positive")));
    }
    let start = symmetric_start(n, h, f)?;
    if start.radius_sq() >= 1.0 {
        return Err(Error::Containment(format!(
            "symmetric start radius {} lies outside the unit ball",
            start.x2
        )));
    }
    let forward = march_to_sphere(n, h, start, step)?;
    let backward = march_to_sphere(n, h, start, -step)?;
    let origin = backward.len() - 1;
    let mut states: Vec<MeridianState> = backward.into_iter().rev().collect();
    states.extend_from_slice(&forward[1..]);
    Ok(MeridianCurve {
        n,
        h,
        force: force(&start, h, n),
        step,
        states,
        origin,
        axis_touching: false,
    })
}

/// Partial RK4 step `δ` in `[0, ds]` from `state` at which `event` changes
/// sign, located by bisection to `1e-15` in `δ`.
pub fn locate_event(
    state: &MeridianState,
    h: f64,
    n: usize,
    ds: f64,
    event: impl Fn(&MeridianState) -> f64,
) -> Result<MeridianState> {
    let e0 = event(state);
    let end = rk4_step(state, h, n, ds)?;
    if e0.signum() == event(&end).signum() {
        return Err(Error::Construction("event does not change sign over the step".into()));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best = end;
    for _ in 0..200 {
        if (hi - lo) * ds.abs() <= 1e-15 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let st = rk4_step(state, h, n, mid * ds)?;
        if event(&st).signum() == e0.signum() {
            lo = mid;
        } else {
            hi = mid;
            best = st;
        }
    }
    let st = rk4_step(state, h, n, 0.5 * (lo + hi) * ds)?;
    Ok(if st.s.is_finite() { st } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rhs_examples() {
        let st = MeridianState::new(0.0, 0.0, 0.5, 0.0);
        assert_eq!(ode_rhs(&st, 1.0, 2).unwrap(), [1.0, 0.0, 0.0]);
        let st = MeridianState::new(0.0, 0.0, 1.0, 0.0);
        assert_eq!(ode_rhs(&st, 0.0, 2).unwrap(), [1.0, 0.0, 1.0]);
        for a in [-1.5, -0.3, 0.0, 0.7, 1.5] {
            let st = MeridianState::new(0.0, 0.0, 0.8, a);
            assert!(ode_rhs(&st, 0.0, 3).unwrap()[2] >= 0.0);
        }
        let on_axis = MeridianState::new(0.0, 0.0, 0.0, 0.0);
        assert!(matches!(ode_rhs(&on_axis, 1.0, 2), Err(Error::AxisContact { .. })));
    }

    #[test]
    fn cylinder_is_an_equilibrium() {
        let c = integrate(2, 1.0, MeridianState::new(0.0, 0.0, 0.5, 0.0), 1e-3, 2.0).unwrap();
        assert_eq!(c.states.len(), 2001);
        assert!((c.force - 0.25).abs() < 1e-15);
        for st in &c.states {
            assert!((st.x2 - 0.5).abs() < 1e-15 && st.alpha.abs() < 1e-15);
        }
        assert!((c.states.last().unwrap().s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn partial_last_step() {
        let c = integrate(2, 1.0, MeridianState::new(0.0, 0.0, 0.5, 0.0), 0.3, 1.0).unwrap();
        let s: Vec<f64> = c.states.iter().map(|st| st.s).collect();
        assert_eq!(s.len(), 5);
        assert!((s[4] - 1.0).abs() < 1e-15 && (s[4] - s[3] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn integrate_rejects_bad_input() {
        let st = MeridianState::new(0.0, 0.0, 0.5, 0.0);
        assert!(matches!(integrate(2, 1.0, st, 0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(integrate(2, 1.0, st, 1e-3, -1.0), Err(Error::Domain(_))));
        assert!(matches!(integrate(1, 1.0, st, 1e-3, 1.0), Err(Error::Domain(_))));
        let axis = MeridianState::new(0.0, 0.0, 0.0, 0.0);
        assert!(matches!(integrate(2, 1.0, axis, 1e-3, 1.0), Err(Error::AxisContact { .. })));
    }

    #[test]
    fn axis_touching_is_flagged() {
        // a sphere through the pole: radius 1/H, starting at the equator
        let st = MeridianState::new(0.0, 0.0, 1.0, 0.0);
        let c = integrate(2, 1.0, st, 1e-3, 5.0).unwrap();
        assert!(c.axis_touching);
        assert!(c.states.last().unwrap().s < 5.0);
    }

    #[test]
    fn catenary_matches_closed_form() {
        // x2 = c cosh((x1 - b)/c) with the neck placed off the origin
        let f = 0.3;
        let c = f;
        let b = -0.2;
        let x1 = 0.1;
        let u = (x1 - b) / c;
        let init = MeridianState::new(0.0, x1, c * u.cosh(), u.sinh().atan());
        assert!((force(&init, 0.0, 2) - f).abs() < 1e-14);
        let curve = integrate(2, 0.0, init, 1e-3, 1.5).unwrap();
        assert!(curve.force_drift() <= 1e-8);
        for st in &curve.states {
            let want = c * ((st.x1 - b) / c).cosh();
            assert!((st.x2 - want).abs() < 1e-9, "{} vs {}", st.x2, want);
        }
    }

    #[test]
    fn force_examples() {
        assert_eq!(force(&MeridianState::new(0.0, 0.0, 0.5, 0.0), 1.0, 2), 0.25);
        // sphere of radius 1/H centered on the axis: alpha = beta + pi/2
        let r = 0.8;
        for beta in [0.3f64, 1.0, 2.0, 2.9] {
            let st = MeridianState::new(0.0, 0.1 + r * beta.cos(), r * beta.sin(), beta + PI / 2.0);
            assert!(force(&st, -1.0 / r, 3).abs() < 1e-15);
        }
        for a in [PI / 2.0, -PI / 2.0] {
            assert!(force(&MeridianState::new(0.0, 0.0, 0.4, a), 0.0, 2).abs() < 1e-16);
        }
    }

    #[test]
    fn classification() {
        assert_eq!(classify(2, 1.0, 0.25, CLASSIFY_TOL), DelaunayKind::Cylinder);
        assert_eq!(classify(2, 1.0, 0.1, CLASSIFY_TOL), DelaunayKind::Unduloid);
        assert_eq!(classify(2, 1.0, -0.1, CLASSIFY_TOL), DelaunayKind::Nodoid);
        assert_eq!(classify(2, -1.0, 0.1, CLASSIFY_TOL), DelaunayKind::Nodoid);
        assert_eq!(classify(2, 0.0, 0.0, CLASSIFY_TOL), DelaunayKind::Hyperplane);
        assert_eq!(classify(2, 0.0, 0.3, CLASSIFY_TOL), DelaunayKind::Catenoid);
        assert_eq!(classify(2, 2.0, 0.0, CLASSIFY_TOL), DelaunayKind::Sphere);
        assert_eq!(classify(3, -1.5, equilibrium_force(3, -1.5), CLASSIFY_TOL), DelaunayKind::Cylinder);
    }

    #[test]
    fn symmetric_starts() {
        let st = symmetric_start(2, 1.0, 0.1).unwrap();
        assert!((st.x2 - (1.0 - 0.6f64.sqrt()) / 2.0).abs() < 1e-11);
        assert_eq!(st.alpha, 0.0);
        let st = symmetric_start(2, 0.0, 0.3).unwrap();
        assert!((st.x2 - 0.3).abs() < 1e-15);
        let st = symmetric_start(3, 0.0, 0.09).unwrap();
        assert!((st.x2 - 0.3).abs() < 1e-14);
        let st = symmetric_start(2, 1.0, -0.1).unwrap();
        assert!((st.x2 - (1.4f64.sqrt() - 1.0) / 2.0).abs() < 1e-11);
        assert_eq!(st.alpha, PI);
        assert!(matches!(symmetric_start(2, 1.0, 0.3), Err(Error::Construction(_))));
        assert!(matches!(symmetric_start(2, 1.0, 0.0), Err(Error::Construction(_))));
    }

    #[test]
    fn cylinder_segment() {
        let c = symmetric_segment(2, 1.0, 0.25, 1e-3).unwrap();
        let first = c.states.first().unwrap();
        let last = c.states.last().unwrap();
        let half = 3f64.sqrt() / 2.0;
        assert!(last.x1 > half && last.x1 - half < 1.1e-3);
        assert!(first.x1 < -half && -half - first.x1 < 1.1e-3);
        assert_eq!(c.states[c.origin].s, 0.0);
        assert_eq!(c.kind(), DelaunayKind::Cylinder);
    }

    #[test]
    fn segment_mirror_symmetry() {
        for (h, f) in [(1.0, 0.1), (1.0, -0.1), (0.0, 0.3), (-1.0, -0.1)] {
            let c = symmetric_segment(2, h, f, 1e-3).unwrap();
            let o = c.origin;
            let k = (c.states.len() - 1 - o).min(o);
            for j in 1..=k {
                let a = c.states[o + j];
                let b = c.states[o - j];
                assert!((a.x1 + b.x1).abs() < 1e-10);
                assert!((a.x2 - b.x2).abs() < 1e-10);
                assert!((a.alpha.cos() - b.alpha.cos()).abs() < 1e-10);
                assert!((a.alpha.sin() + b.alpha.sin()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn unduloid_is_periodic() {
        let start = symmetric_start(2, 1.0, 0.1).unwrap();
        let c = integrate(2, 1.0, start, 1e-3, 10.0).unwrap();
        assert!(!c.axis_touching);
        let mut radii = Vec::new();
        for w in c.states.windows(2) {
            if w[0].alpha.signum() != w[1].alpha.signum() && w[0].alpha != 0.0 {
                let st = locate_event(&w[0], 1.0, 2, w[1].s - w[0].s, |s| s.alpha).unwrap();
                radii.push(st.x2);
            }
        }
        assert!(radii.len() >= 3, "{radii:?}");
        let neck = (1.0 - 0.6f64.sqrt()) / 2.0;
        let bulge = (1.0 + 0.6f64.sqrt()) / 2.0;
        // start is a neck; crossings alternate bulge, neck, ...
        for (i, r) in radii.iter().enumerate() {
            let want = if i % 2 == 0 { bulge } else { neck };
            assert!((r - want).abs() < 1e-6, "{i}: {r} vs {want}");
        }
    }

    #[test]
    fn classify_constant_along_curves() {
        for (h, f) in [(1.0, 0.1), (1.0, -0.1), (0.0, 0.3), (2.0, 0.1)] {
            let c = symmetric_segment(3, h, f, 1e-3);
            let Ok(c) = c else { continue };
            let want = c.kind();
            for st in &c.states {
                assert_eq!(classify(3, h, force(st, h, 3), 1e-9), want);
            }
        }
    }

    #[test]
    fn csv_layout() {
        let c = integrate(2, 1.0, MeridianState::new(0.0, 0.0, 0.5, 0.0), 0.5, 1.0).unwrap();
        let csv = c.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "s,x1,x2,alpha,force");
        assert_eq!(lines.len(), 4);
        assert_eq!(
            lines[1],
            "0.0000000000000000e0,0.0000000000000000e0,5.0000000000000000e-1,0.0000000000000000e0,2.5000000000000000e-1"
        );
    }
}
