//! Möbius transformations of the unit ball, the conformal Killing field they
//! generate, and the test-function algebra built on it.
//!
//! All functions take plain coordinate slices; the ambient dimension is the
//! slice length `n + 1`.

use std::ops::Deref;

use serde::Serialize;

use crate::{Error, Result};

const BOUNDARY_SLACK: f64 = 1e-12;

/// Point or vector of the ambient space `R^{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct AmbientVector(Vec<f64>);

impl AmbientVector {
    pub fn new(components: Vec<f64>) -> Self {
        Self(components)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        Self(v)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }
}

impl Deref for AmbientVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for AmbientVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Unit vector of `R^{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Accepts `components` only if their norm is 1 within 1e-12.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        let norm = dot(&components, &components).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("direction has norm {norm}")));
        }
        Ok(Self(components))
    }

    /// Normalizes `components`; rejects the zero vector.
    pub fn normalized(components: Vec<f64>) -> Result<Self> {
        let norm = dot(&components, &components).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        Ok(Self(components.into_iter().map(|c| c / norm).collect()))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        Self(AmbientVector::basis(dim, k).0)
    }
}

impl Deref for Direction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn same_dim(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension { expected: a.len(), got: b.len() });
    }
    if a.len() < 3 {
        return Err(Error::Domain(format!(
            "ambient dimension {} is below 3 (n >= 2 required)",
            a.len()
        )));
    }
    Ok(())
}

fn check_ball(a: &[f64], x: &[f64]) -> Result<(f64, f64, f64)> {
    same_dim(a, x)?;
    let aa = dot(a, a);
    let xx = dot(x, x);
    if !(aa < 1.0) {
        return Err(Error::Domain(format!("|a|^2 = {aa} is not below 1")));
    }
    if xx.sqrt() > 1.0 + BOUNDARY_SLACK {
        return Err(Error::Domain(format!("|x| = {} exceeds 1", xx.sqrt())));
    }
    Ok((aa, xx, dot(a, x)))
}

/// `1 − 2⟨a,x⟩ + |a|²|x|² = | |a|x − a/|a| |²`, evaluated as a squared norm
/// to avoid cancellation near the sphere.
fn mobius_denominator(a: &[f64], x: &[f64], aa: f64) -> f64 {
    if aa == 0.0 {
        return 1.0;
    }
    let na = aa.sqrt();
    x.iter().zip(a).map(|(xi, ai)| {
        let d = na * xi - ai / na;
        d * d
    }).sum()
}

/// `φ_a(x) = ((1-|a|²)x − (1 − 2⟨a,x⟩ + |x|²)a) / (1 − 2⟨a,x⟩ + |a|²|x|²)`.
pub fn mobius_map(a: &[f64], x: &[f64]) -> Result<AmbientVector> {
    let (aa, _, _) = check_ball(a, x)?;
    let denom = mobius_denominator(a, x, aa);
    let cx = (1.0 - aa) / denom;
    // 1 − 2⟨a,x⟩ + |x|² = |x − a|² + 1 − |a|², a sum of nonnegative terms
    let xa: f64 = x.iter().zip(a).map(|(xi, ai)| (xi - ai) * (xi - ai)).sum();
    let ca = (xa + 1.0 - aa) / denom;
    Ok(AmbientVector(
        x.iter().zip(a).map(|(xi, ai)| cx * xi - ca * ai).collect(),
    ))
}

/// Linear scale factor of `dφ_a` at `x`.
pub fn conformal_factor(a: &[f64], x: &[f64]) -> Result<f64> {
    let (aa, _, _) = check_ball(a, x)?;
    Ok((1.0 - aa) / mobius_denominator(a, x, aa))
}

/// The one-parameter family `f_t = φ_{tξ}`.
pub fn flow(xi: &[f64], t: f64, x: &[f64]) -> Result<AmbientVector> {
    if !(t.abs() < 1.0) {
        return Err(Error::Domain(format!("flow parameter t = {t} outside (-1, 1)")));
    }
    let a: Vec<f64> = xi.iter().map(|c| t * c).collect();
    mobius_map(&a, x)
}

/// `Y[ξ](x) = −(1+|x|²)ξ + 2⟨ξ,x⟩x`, the velocity of the flow at `t = 0`.
pub fn killing_field(xi: &[f64], x: &[f64]) -> AmbientVector {
    let xx = dot(x, x);
    let xix = dot(xi, x);
    AmbientVector(
        xi.iter()
            .zip(x)
            .map(|(e, xc)| -(1.0 + xx) * e + 2.0 * xix * xc)
            .collect(),
    )
}

/// Ambient divergence of `Y[ξ]`: `2(n+1)⟨ξ,x⟩`.
pub fn field_divergence(xi: &[f64], x: &[f64]) -> f64 {
    2.0 * x.len() as f64 * dot(xi, x)
}

/// `φ[ξ] = ⟨Y[ξ](x), N⟩`.
pub fn test_function(xi: &[f64], x: &[f64], normal: &[f64]) -> f64 {
    dot(&killing_field(xi, x), normal)
}

/// The same test function written as `⟨ξ, −(1+|x|²)N + 2⟨x,N⟩x⟩`.
pub fn test_function_expanded(xi: &[f64], x: &[f64], normal: &[f64]) -> f64 {
    let xx = dot(x, x);
    let xn = dot(x, normal);
    xi.iter()
        .zip(normal.iter().zip(x))
        .map(|(e, (nc, xc))| e * (-(1.0 + xx) * nc + 2.0 * xn * xc))
        .sum()
}

/// Closed form of `(Δ + |σ|²)φ[ξ]` on a hypersurface of constant mean
/// curvature `h`: `−2n⟨ξ, N + h x⟩`.
pub fn jacobi_image(xi: &[f64], x: &[f64], normal: &[f64], h: f64, n: usize) -> f64 {
    let s: f64 = xi
        .iter()
        .zip(normal.iter().zip(x))
        .map(|(e, (nc, xc))| e * (nc + h * xc))
        .sum();
    -2.0 * n as f64 * s
}
