//! First-order objects driving the sequential LP: tangents of the
//! quadratic-over-linear function, disk projections and thermal halfspaces,
//! and the atan2 linearization used on meshed networks.
//!
//! All functions here are pure; row assembly against a variable map happens
//! in the drivers.

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CutError {
    #[error("expansion point outside function domain: {0}")]
    DomainError(String),
    #[error("flow magnitude too small to define a projection")]
    DegenerateFlow,
}

/// Cut provenance kept in the driver registries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutKind {
    SocHalfspace,
    SocHyperplane,
    ThermalHalfspace,
    Atan2Pair,
}

/// Record of a generated cut: which branch, which direction, which iterate
/// it was anchored at.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Cut {
    pub kind: CutKind,
    pub branch: usize,
    pub forward: bool,
    pub origin_iteration: usize,
}

/// Value and gradient of f(wr, wi, wj) = (wr^2 + wi^2) / wj on wj > 0.
pub fn qol_value_grad(wr: f64, wi: f64, wj: f64) -> Result<(f64, [f64; 3]), CutError> {
    if wj <= 0.0 {
        return Err(CutError::DomainError(format!("wj = {wj}")));
    }
    let num = wr * wr + wi * wi;
    let f = num / wj;
    Ok((f, [2.0 * wr / wj, 2.0 * wi / wj, -num / (wj * wj)]))
}

/// First-order model of f at an expansion point, as an affine function
/// `f_a(wr, wi, wj) = constant + a[0] wr + a[1] wi + a[2] wj`.
///
/// The halfspace row is `f_a <= w_i`; the hyperplane row is
/// `f_a + r = w_i`. f is positively homogeneous of degree one, so the
/// constant vanishes up to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QolTangent {
    pub value: f64,
    pub a: [f64; 3],
    pub constant: f64,
}

impl QolTangent {
    pub fn eval(&self, wr: f64, wi: f64, wj: f64) -> f64 {
        self.constant + self.a[0] * wr + self.a[1] * wi + self.a[2] * wj
    }
}

pub fn soc_tangent(wr0: f64, wi0: f64, wj0: f64) -> Result<QolTangent, CutError> {
    let (f, grad) = qol_value_grad(wr0, wi0, wj0)?;
    let constant = f - grad[0] * wr0 - grad[1] * wi0 - grad[2] * wj0;
    Ok(QolTangent {
        value: f,
        a: grad,
        constant,
    })
}

/// Projection of (p, q) onto the circle of radius `s_max`.
pub fn project_to_disk(p: f64, q: f64, s_max: f64) -> Result<(f64, f64), CutError> {
    let norm = p.hypot(q);
    if norm < 1e-9 {
        return Err(CutError::DegenerateFlow);
    }
    let scale = s_max / norm;
    Ok((p * scale, q * scale))
}

/// Supporting halfspace of the disk `p^2 + q^2 <= s_max^2` at the projection
/// of (p0, q0): `coef_p * p + coef_q * q <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalCutCoeffs {
    pub coef_p: f64,
    pub coef_q: f64,
    pub rhs: f64,
}

impl ThermalCutCoeffs {
    pub fn eval(&self, p: f64, q: f64) -> f64 {
        self.coef_p * p + self.coef_q * q - self.rhs
    }
}

pub fn thermal_halfspace(p0: f64, q0: f64, s_max: f64) -> Result<ThermalCutCoeffs, CutError> {
    let (pp, qp) = project_to_disk(p0, q0, s_max)?;
    Ok(ThermalCutCoeffs {
        coef_p: 2.0 * pp,
        coef_q: 2.0 * qp,
        rhs: 2.0 * s_max * s_max,
    })
}

/// First-order model of h(wi, wr) = atan2(wi, wr) at an expansion point:
/// `h_a(wi, wr) = constant + d_wi * wi + d_wr * wr`.
///
/// Analytic gradient: dh/dwi = wr0 / D, dh/dwr = -wi0 / D with
/// D = wr0^2 + wi0^2. h is homogeneous of degree zero, so the constant
/// equals the value at the expansion point up to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atan2Tangent {
    pub value: f64,
    pub d_wi: f64,
    pub d_wr: f64,
    pub constant: f64,
}

impl Atan2Tangent {
    pub fn eval(&self, wi: f64, wr: f64) -> f64 {
        self.constant + self.d_wi * wi + self.d_wr * wr
    }
}

pub fn atan2_tangent(wi0: f64, wr0: f64) -> Result<Atan2Tangent, CutError> {
    let d = wr0 * wr0 + wi0 * wi0;
    if d < 1e-12 {
        return Err(CutError::DomainError("atan2 expansion at the origin".into()));
    }
    let value = wi0.atan2(wr0);
    let d_wi = wr0 / d;
    let d_wr = -wi0 / d;
    Ok(Atan2Tangent {
        value,
        d_wi,
        d_wr,
        constant: value - d_wi * wi0 - d_wr * wr0,
    })
}
