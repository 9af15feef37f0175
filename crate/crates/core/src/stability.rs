//! The quadratic form `Q(ξ₁, ξ₂)` built from the conformal test functions,
//! the trace bound, the second variation and the stability verdict.

use std::fmt;

use crate::conformal::{dot, AmbientVector};
use crate::delaunay::DelaunayKind;
use crate::eigen::{jacobi_eigen, SquareMatrix};
use crate::quadrature::{d1_central, d1_one_sided_end, d1_one_sided_start, d2_central, d2_one_sided, simpson};
use crate::surface::{
    field_profile, position_dot_normal, position_dot_tangent, AngularMode, EnclosedBody, End,
    RotationalCapillarySurface, WettedRegion,
};
use crate::verify::{self, Residuals};
use crate::{Error, Result};

/// Largest relative change of `Q` allowed between the grid and its halving.
pub const QUADRATURE_TOL: f64 = 1e-6;
/// Off-diagonal threshold of the Jacobi eigensolver, relative to `‖Q‖_F`.
pub const EIGEN_TOL: f64 = 1e-12;
pub const DEFAULT_TOL_CENTROID: f64 = 1e-6;
/// Default eigenvalue threshold relative to `‖Q‖_∞`.
pub const DEFAULT_TOL_EIG_REL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct StabilityForm {
    pub q: SquareMatrix,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Largest relative change of `Q` under grid halving.
    pub quadrature_change: f64,
}

impl StabilityForm {
    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn value(&self, xi: &[f64]) -> f64 {
        self.q.bilinear(xi, xi)
    }

    pub fn negative_count(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l < -tol).count()
    }
}

/// Axis and transverse diagonal entries of `Q` from the radial parts of
/// `N + Hx` and `(1+|x|²)N − 2⟨x,N⟩x`, on the full grid or every second sample.
fn reduced_entries(surface: &RotationalCapillarySurface, coarse: bool) -> (f64, f64) {
    let n = surface.n as f64;
    let h = surface.h;
    let axial = |_: usize, st: &_| {
        let p = field_profile(st, h);
        p.v_axial * p.w_axial
    };
    let trans = |_: usize, st: &_| {
        let p = field_profile(st, h);
        p.v_transverse * p.w_transverse
    };
    let (a, t) = if coarse {
        (
            surface.integrate_scalar_coarse(AngularMode::Zero, axial),
            surface.integrate_scalar_coarse(AngularMode::One, trans),
        )
    } else {
        (
            surface.integrate_scalar(AngularMode::Zero, axial),
            surface.integrate_scalar(AngularMode::One, trans),
        )
    };
    (-2.0 * n * a, -2.0 * n * t)
}

fn assemble(surface: &RotationalCapillarySurface, axial: f64, trans: f64) -> SquareMatrix {
    let mut q = SquareMatrix::zeros(surface.ambient_dim());
    for k in 0..surface.ambient_dim() {
        q[(k, k)] = if k == surface.axis { axial } else { trans };
    }
    q
}

/// `Q_AB = −2n ∫_M ⟨e_A, N+Hx⟩ ⟨e_B, (1+|x|²)N − 2⟨x,N⟩x⟩ da` and its
/// eigen-decomposition. Rotational symmetry makes `Q` diagonal with equal
/// transverse entries.
pub fn q_form(surface: &RotationalCapillarySurface) -> Result<StabilityForm> {
    let (a, t) = reduced_entries(surface, false);
    let (ac, tc) = reduced_entries(surface, true);
    let scale = a.abs().max(t.abs()).max(surface.area());
    let change = ((a - ac).abs().max((t - tc).abs())) / scale;
    if !(change <= QUADRATURE_TOL) {
        return Err(Error::Precision(change));
    }
    let q = assemble(surface, a, t);
    let eig = jacobi_eigen(&q, EIGEN_TOL);
    Ok(StabilityForm {
        q,
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
        quadrature_change: change,
    })
}

/// `(trace, bound)` with
/// `trace = −2n ∫ [H⟨x,N⟩(1−|x|²) + 1 + |x|² − 2⟨x,N⟩²] da` and
/// `bound = −∫ |∇|x|²|² da = −4 ∫ ⟨x,T⟩² da`.
pub fn trace_bound(surface: &RotationalCapillarySurface) -> (f64, f64) {
    let n = surface.n as f64;
    let h = surface.h;
    let trace = -2.0
        * n
        * surface.integrate_scalar(AngularMode::Zero, |_, st| {
            let xn = position_dot_normal(st);
            let xx = st.radius_sq();
            h * xn * (1.0 - xx) + 1.0 + xx - 2.0 * xn * xn
        });
    let bound = -4.0
        * surface.integrate_scalar(AngularMode::Zero, |_, st| {
            let xt = position_dot_tangent(st);
            xt * xt
        });
    (trace, bound)
}

/// `∂²E(f) = −∫_M (Δf + |σ|² f) f da + ∫_{∂M} (f_ν − q f) f ds` for
/// `f = g(s) Y(ω)` with `Y` a mode-`m` spherical harmonic normalized as in
/// [`AngularMode`]. Derivatives are second-order differences of the samples
/// `g`, one-sided at rings; pole samples carry no weight.
pub fn second_variation(surface: &RotationalCapillarySurface, mode: usize, g: &[f64]) -> Result<f64> {
    let mode = AngularMode::from_index(mode)?;
    let samples = surface.samples();
    if g.len() != samples.len() {
        return Err(Error::Dimension { expected: samples.len(), got: g.len() });
    }
    let n = surface.n as f64;
    let m = mode.index() as f64;
    let hs = surface.step();
    let last = samples.len() - 1;
    let p = surface.n as i32 - 1;
    let derivs = |i: usize| -> (f64, f64) {
        if i == 0 {
            (d1_one_sided_start(g, hs), d2_one_sided(g, false, hs))
        } else if i == last {
            (d1_one_sided_end(g, hs), d2_one_sided(g, true, hs))
        } else {
            (d1_central(g, i, hs), d2_central(g, i, hs))
        }
    };
    let values: Vec<f64> = samples
        .iter()
        .enumerate()
        .map(|(i, st)| {
            if st.x2 == 0.0 {
                return 0.0;
            }
            let (d1, d2) = derivs(i);
            let lap = d2 + (n - 1.0) * st.alpha.sin() / st.x2 * d1
                - m * (n + m - 2.0) * g[i] / (st.x2 * st.x2);
            let sigma = surface.shape_data_at(i).sigma_sq;
            -(lap + sigma * g[i]) * g[i] * st.x2.powi(p)
        })
        .collect();
    let mut total = simpson(&values, hs);
    if !surface.is_closed() {
        let q = surface.robin_coefficient()?;
        for (e, end) in surface.ends().iter().enumerate() {
            if *end != End::Ring {
                continue;
            }
            let (i, g_nu) = if e == 0 {
                (0, -d1_one_sided_start(g, hs))
            } else {
                (last, d1_one_sided_end(g, hs))
            };
            total += (g_nu - q * g[i]) * g[i] * samples[i].x2.powi(p);
        }
    }
    Ok(total * surface.angular_factor(mode))
}

/// Radial profile of `φ[e_axis]` (mode 0) or of `φ[e_j]/ω_j` (mode 1) on the grid.
pub fn phi_profile(surface: &RotationalCapillarySurface, mode: AngularMode) -> Vec<f64> {
    surface
        .samples()
        .iter()
        .map(|st| {
            let p = field_profile(st, surface.h);
            match mode {
                AngularMode::Zero => -p.w_axial,
                AngularMode::One => -p.w_transverse,
            }
        })
        .collect()
}

/// `∫_M φ[ξ] da`; linear in `ξ`.
pub fn phi_mass(surface: &RotationalCapillarySurface, xi: &[f64]) -> Result<f64> {
    if xi.len() != surface.ambient_dim() {
        return Err(Error::Dimension { expected: surface.ambient_dim(), got: xi.len() });
    }
    Ok(dot(&surface.phi_masses(), xi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    StableKnown,
    UnstableTheorem1,
    UnstableTwoNegative,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::StableKnown => "Stable(known)",
            Self::UnstableTheorem1 => "Unstable(Theorem 1)",
            Self::UnstableTwoNegative => "Unstable(two-negative-eigenvalues)",
            Self::Inconclusive => "Inconclusive",
        }
    }

    pub fn is_unstable(self) -> bool {
        matches!(self, Self::UnstableTheorem1 | Self::UnstableTwoNegative)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Mean-zero combination `c₁ξ₁ + c₂ξ₂` of the two lowest eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoNegativeWitness {
    pub c: [f64; 2],
    pub xi: Vec<f64>,
    pub phi_mass: f64,
    pub q_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerdictWitness {
    /// Which branch of the decision ladder fired.
    pub rule: &'static str,
    pub negative_eigenvalues: usize,
    pub centroid_norm: f64,
    pub lambda_min: f64,
    pub tol_centroid: f64,
    pub tol_eig: f64,
    /// Eigenvector of `λ_min`.
    pub xi_min: Vec<f64>,
    pub phi_mass_xi_min: f64,
    /// `|φ-mass(ξ_min)| ≤ 2(n+1)|T| tol_centroid`.
    pub admissible: bool,
    pub combination: Option<TwoNegativeWitness>,
}

/// Analysis results for one surface.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub surface: RotationalCapillarySurface,
    pub area_omega: f64,
    pub volume: f64,
    pub max_multiplicity: u32,
    pub form: StabilityForm,
    pub trace: f64,
    pub trace_bound: f64,
    pub centroid: AmbientVector,
    pub phi_mass: AmbientVector,
    pub verdict: Verdict,
    pub witness: VerdictWitness,
    pub residuals: Residuals,
}

/// The two-eigenvalue construction: `c ∝ (m₂, −m₁)` with `m_i = φ-mass(ξ_i)`.
pub fn two_negative_combination(
    surface: &RotationalCapillarySurface,
    form: &StabilityForm,
) -> Result<TwoNegativeWitness> {
    if form.eigenvalues.len() < 2 {
        return Err(Error::NotApplicable("fewer than two eigenvalues".into()));
    }
    let (x1, x2) = (&form.eigenvectors[0], &form.eigenvectors[1]);
    let m1 = phi_mass(surface, x1)?;
    let m2 = phi_mass(surface, x2)?;
    let norm = m1.hypot(m2);
    let c = if norm == 0.0 { [1.0, 0.0] } else { [m2 / norm, -m1 / norm] };
    let xi: Vec<f64> = x1.iter().zip(x2).map(|(a, b)| c[0] * a + c[1] * b).collect();
    Ok(TwoNegativeWitness {
        c,
        phi_mass: phi_mass(surface, &xi)?,
        q_value: form.value(&xi),
        xi,
    })
}

/// Decision ladder: known stable kinds first, then the centered-body theorem,
/// then two negative directions, otherwise inconclusive.
pub fn verdict(
    surface: &RotationalCapillarySurface,
    form: &StabilityForm,
    centroid: &[f64],
    volume: f64,
    tol_centroid: f64,
    tol_eig: f64,
) -> Result<(Verdict, VerdictWitness)> {
    let negatives = form.negative_count(tol_eig);
    let centroid_norm = dot(centroid, centroid).sqrt();
    let xi_min = form.eigenvectors[0].clone();
    let phi_min = phi_mass(surface, &xi_min)?;
    let admissible =
        phi_min.abs() <= 2.0 * (surface.n as f64 + 1.0) * volume.abs() * tol_centroid;
    let combination = if negatives >= 2 {
        Some(two_negative_combination(surface, form)?)
    } else {
        None
    };
    let known = matches!(surface.kind, DelaunayKind::Hyperplane | DelaunayKind::Sphere);
    let (v, rule) = if known {
        let what = if surface.kind == DelaunayKind::Hyperplane {
            "totally geodesic hyperplane"
        } else if surface.is_closed() {
            "round sphere"
        } else {
            "spherical cap"
        };
        (Verdict::StableKnown, what)
    } else if centroid_norm <= tol_centroid && form.lambda_min() < -tol_eig && admissible {
        (Verdict::UnstableTheorem1, "centroid at origin and negative eigenvalue")
    } else if combination.as_ref().is_some_and(|w| w.q_value < 0.0) {
        (Verdict::UnstableTwoNegative, "mean-zero combination of two negative directions")
    } else {
        (Verdict::Inconclusive, "no hypothesis satisfied")
    };
    Ok((
        v,
        VerdictWitness {
            rule,
            negative_eigenvalues: negatives,
            centroid_norm,
            lambda_min: form.lambda_min(),
            tol_centroid,
            tol_eig,
            xi_min,
            phi_mass_xi_min: phi_min,
            admissible,
            combination,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzeOptions {
    pub tol_centroid: f64,
    /// Absolute eigenvalue threshold; `None` uses `1e-8 · ‖Q‖_∞`.
    pub tol_eig: Option<f64>,
    pub levels: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self { tol_centroid: DEFAULT_TOL_CENTROID, tol_eig: None, levels: verify::DEFAULT_LEVELS }
    }
}

/// Everything except the residual checks.
#[derive(Debug, Clone)]
pub struct Assessment {
    pub form: StabilityForm,
    pub trace: f64,
    pub trace_bound: f64,
    pub omega: WettedRegion,
    pub body: EnclosedBody,
    pub verdict: Verdict,
    pub witness: VerdictWitness,
}

/// Form, trace bound, enclosed body and verdict.
pub fn assess(surface: &RotationalCapillarySurface, opts: &AnalyzeOptions) -> Result<Assessment> {
    let form = q_form(surface)?;
    let (trace, bound) = trace_bound(surface);
    let omega = surface.wetted_region()?;
    let body = surface.enclosed_body()?;
    let tol_eig = opts.tol_eig.unwrap_or(DEFAULT_TOL_EIG_REL * form.q.norm_inf());
    let (v, witness) =
        verdict(surface, &form, &body.centroid, body.volume, opts.tol_centroid, tol_eig)?;
    Ok(Assessment { form, trace, trace_bound: bound, omega, body, verdict: v, witness })
}

/// Full pipeline: form, trace bound, enclosed body, residual checks, verdict.
pub fn analyze(surface: RotationalCapillarySurface, opts: &AnalyzeOptions) -> Result<StabilityReport> {
    let a = assess(&surface, opts)?;
    let residuals = verify::residuals(&surface, opts.levels)?;
    Ok(StabilityReport {
        phi_mass: surface.phi_masses(),
        area_omega: a.omega.area,
        volume: a.body.volume,
        max_multiplicity: a.omega.max_multiplicity,
        form: a.form,
        trace: a.trace,
        trace_bound: a.trace_bound,
        centroid: a.body.centroid,
        verdict: a.verdict,
        witness: a.witness,
        residuals,
        surface,
    })
}
