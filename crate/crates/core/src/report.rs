//! JSON and CSV output with fixed field order and 17 significant digits.

use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::stability::{StabilityReport, TwoNegativeWitness, VerdictWitness};
use crate::surface::{RotationalCapillarySurface, NORMAL_CONVENTION};
use crate::verify::Residuals;

/// Float written as `d.ddddddddddddddddde±x`; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

/// Text form used in JSON and CSV.
pub fn format_real(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let number = serde_json::Number::from_str(&format_real(self.0))
            .map_err(serde::ser::Error::custom)?;
        number.serialize(s)
    }
}

fn reals(v: &[f64]) -> Vec<Real> {
    v.iter().copied().map(Real).collect()
}

#[derive(Serialize)]
pub struct GridJson {
    pub step: Real,
    pub samples: usize,
}

#[derive(Serialize)]
pub struct SurfaceJson {
    pub n: usize,
    #[serde(rename = "H")]
    pub h: Real,
    #[serde(rename = "F")]
    pub f: Real,
    pub kind: &'static str,
    pub theta: Option<Real>,
    #[serde(rename = "area_M")]
    pub area_m: Real,
    #[serde(rename = "area_Omega")]
    pub area_omega: Real,
    #[serde(rename = "volume_T")]
    pub volume_t: Real,
    pub centroid: Vec<Real>,
    pub max_multiplicity: u32,
    pub normal_convention: String,
    pub grid: GridJson,
}

#[derive(Serialize)]
pub struct CombinationJson {
    pub c: Vec<Real>,
    pub xi: Vec<Real>,
    pub phi_mass: Real,
    pub q_value: Real,
}

#[derive(Serialize)]
pub struct WitnessJson {
    pub rule: &'static str,
    pub negative_eigenvalues: usize,
    pub centroid_norm: Real,
    pub lambda_min: Real,
    pub tol_centroid: Real,
    pub tol_eig: Real,
    pub xi: Vec<Real>,
    pub phi_mass_xi: Real,
    pub admissible: bool,
    pub combination: Option<CombinationJson>,
}

#[derive(Serialize)]
pub struct JacobiJson {
    pub residual: Real,
    /// `null` when the residual sits below the rounding floor on every level.
    pub order: Option<Real>,
}

#[derive(Serialize)]
pub struct ResidualsJson {
    pub robin: Option<Real>,
    pub jacobi: JacobiJson,
    pub principal_direction: Option<Real>,
    pub flow_angle: Option<Real>,
    pub centroid_consistency: Real,
    pub free_boundary: Option<Real>,
}

#[derive(Serialize)]
pub struct ReportJson {
    pub surface: SurfaceJson,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<Real>>,
    pub eigenvalues: Vec<Real>,
    pub trace: Real,
    pub trace_bound: Real,
    pub lambda_min: Real,
    pub centroid: Vec<Real>,
    pub phi_mass: Vec<Real>,
    pub verdict: &'static str,
    pub verdict_witness: WitnessJson,
    pub residuals: ResidualsJson,
}

pub fn normal_convention(surface: &RotationalCapillarySurface) -> String {
    format!("{NORMAL_CONVENTION}; axis e_{}", surface.axis + 1)
}

pub fn surface_json(
    surface: &RotationalCapillarySurface,
    area_omega: f64,
    volume: f64,
    centroid: &[f64],
    max_multiplicity: u32,
) -> SurfaceJson {
    SurfaceJson {
        n: surface.n,
        h: Real(surface.h),
        f: Real(surface.force),
        kind: surface.kind.name(),
        theta: surface.theta().map(Real),
        area_m: Real(surface.area()),
        area_omega: Real(area_omega),
        volume_t: Real(volume),
        centroid: reals(centroid),
        max_multiplicity,
        normal_convention: normal_convention(surface),
        grid: GridJson { step: Real(surface.step()), samples: surface.samples().len() },
    }
}

fn combination_json(w: &TwoNegativeWitness) -> CombinationJson {
    CombinationJson {
        c: reals(&w.c),
        xi: reals(&w.xi),
        phi_mass: Real(w.phi_mass),
        q_value: Real(w.q_value),
    }
}

fn witness_json(w: &VerdictWitness) -> WitnessJson {
    WitnessJson {
        rule: w.rule,
        negative_eigenvalues: w.negative_eigenvalues,
        centroid_norm: Real(w.centroid_norm),
        lambda_min: Real(w.lambda_min),
        tol_centroid: Real(w.tol_centroid),
        tol_eig: Real(w.tol_eig),
        xi: reals(&w.xi_min),
        phi_mass_xi: Real(w.phi_mass_xi_min),
        admissible: w.admissible,
        combination: w.combination.as_ref().map(combination_json),
    }
}

pub fn residuals_json(r: &Residuals) -> ResidualsJson {
    ResidualsJson {
        robin: r.robin.map(Real),
        jacobi: JacobiJson { residual: Real(r.jacobi.residual), order: r.jacobi.order.map(Real) },
        principal_direction: r.principal_direction.map(Real),
        flow_angle: r.flow_angle.map(Real),
        centroid_consistency: Real(r.centroid_consistency),
        free_boundary: r.free_boundary.map(Real),
    }
}

pub fn report_json(r: &StabilityReport) -> ReportJson {
    ReportJson {
        surface: surface_json(&r.surface, r.area_omega, r.volume, &r.centroid, r.max_multiplicity),
        q: r.form.q.rows().iter().map(|row| reals(row)).collect(),
        eigenvalues: reals(&r.form.eigenvalues),
        trace: Real(r.trace),
        trace_bound: Real(r.trace_bound),
        lambda_min: Real(r.form.lambda_min()),
        centroid: reals(&r.centroid),
        phi_mass: reals(&r.phi_mass),
        verdict: r.verdict.as_str(),
        verdict_witness: witness_json(&r.witness),
        residuals: residuals_json(&r.residuals),
    }
}

/// Pretty-printed report with a trailing newline.
pub fn to_json(r: &StabilityReport) -> String {
    let mut s = serde_json::to_string_pretty(&report_json(r)).expect("report serializes");
    s.push('\n');
    s
}

pub const SWEEP_HEADER: &str = "n,H,F,kind,theta,lambda_min,trace,centroid_norm,verdict";

/// One sweep row; `theta` is empty for closed surfaces.
pub fn sweep_row(
    surface: &RotationalCapillarySurface,
    lambda_min: f64,
    trace: f64,
    centroid_norm: f64,
    verdict: &str,
) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        surface.n,
        format_real(surface.h),
        format_real(surface.force),
        surface.kind.name(),
        surface.theta().map(format_real).unwrap_or_default(),
        format_real(lambda_min),
        format_real(trace),
        format_real(centroid_norm),
        verdict
    )
}
