//! Limit endomorphism families G and E, the change of coordinates Θ relating
//! them, and membership in the blender parameter box.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};

/// Parameters `(ξ, μ, κ₁, κ₂)` of the center-unstable Hénon-like family
/// `G(x,y,z) = (y, μ + y² + κ₁z² + κ₂yz, ξz + y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HenonParams {
    pub xi: f64,
    pub mu: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl HenonParams {
    pub fn new(xi: f64, mu: f64, kappa1: f64, kappa2: f64) -> Result<Self> {
        if !(xi > 0.0) {
            return Err(Error::InvalidArgument(format!("xi must be positive, got {xi}")));
        }
        Ok(HenonParams { xi, mu, kappa1, kappa2 })
    }
}

/// The five coefficients `ς̄ = (ς₁, …, ς₅)` of the endomorphism E.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SigmaVector {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
    pub s5: f64,
}

impl SigmaVector {
    pub const fn new(s1: f64, s2: f64, s3: f64, s4: f64, s5: f64) -> Self {
        SigmaVector { s1, s2, s3, s4, s5 }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.s1, self.s2, self.s3, self.s4, self.s5]
    }
}

/// Parameters `(ξ, μ, ς̄)` of `E(x,y,z) = (ξx + ς₁y, μ + ς₂y² + ς₃x² + ς₄xy, ς₅y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EParams {
    pub xi: f64,
    pub mu: f64,
    pub sv: SigmaVector,
}

impl EParams {
    pub fn new(xi: f64, mu: f64, sv: SigmaVector) -> Result<Self> {
        if !(xi > 0.0) {
            return Err(Error::InvalidArgument(format!("xi must be positive, got {xi}")));
        }
        Ok(EParams { xi, mu, sv })
    }
}

pub fn eval_g<T: Real>(p: &HenonParams, v: Vec3<T>) -> Vec3<T> {
    let (xi, mu) = (T::from_f64(p.xi), T::from_f64(p.mu));
    let (k1, k2) = (T::from_f64(p.kappa1), T::from_f64(p.kappa2));
    Vec3::new(v.y, mu + v.y * v.y + k1 * v.z * v.z + k2 * v.y * v.z, xi * v.z + v.y)
}

/// Evaluates E; the third input coordinate never enters.
pub fn eval_e<T: Real>(e: &EParams, v: Vec3<T>) -> Vec3<T> {
    let c = |a: f64| T::from_f64(a);
    let s = &e.sv;
    Vec3::new(
        c(e.xi) * v.x + c(s.s1) * v.y,
        c(e.mu) + c(s.s2) * v.y * v.y + c(s.s3) * v.x * v.x + c(s.s4) * v.x * v.y,
        c(s.s5) * v.y,
    )
}

/// Jacobian of E at `v`, rows indexed by output component.
pub fn jacobian_e(e: &EParams, v: Vec3) -> [[f64; 3]; 3] {
    let s = &e.sv;
    [
        [e.xi, s.s1, 0.0],
        [2.0 * s.s3 * v.x + s.s4 * v.y, 2.0 * s.s2 * v.y + s.s4 * v.x, 0.0],
        [0.0, s.s5, 0.0],
    ]
}

/// `Θ(μ, x, y, z) = (ς₂⁻¹μ, ς₂⁻¹ς₁z, ς₂⁻¹y, ς₂⁻¹ς₅x)`.
pub fn theta_conjugacy(sv: &SigmaVector, w: [f64; 4]) -> Result<[f64; 4]> {
    if sv.s2 == 0.0 {
        return Err(Error::DegenerateSigma("s2 = 0".into()));
    }
    let [mu, x, y, z] = w;
    Ok([mu / sv.s2, sv.s1 * z / sv.s2, y / sv.s2, sv.s5 * x / sv.s2])
}

/// Candidate limit parameters derived from ς̄.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitParams {
    pub kappa: f64,
    /// `ς₁ς₄/ς₂`
    pub eta4: f64,
    /// `ς₁ς₅/ς₂`
    pub eta5: f64,
}

pub fn derived_limit_params(sv: &SigmaVector) -> Result<LimitParams> {
    if sv.s1 * sv.s2 * sv.s5 == 0.0 {
        return Err(Error::DegenerateSigma(format!(
            "s1*s2*s5 = 0 for ({}, {}, {})",
            sv.s1, sv.s2, sv.s5
        )));
    }
    Ok(LimitParams {
        kappa: sv.s1 * sv.s1 * sv.s3 / sv.s2,
        eta4: sv.s1 * sv.s4 / sv.s2,
        eta5: sv.s1 * sv.s5 / sv.s2,
    })
}

/// Membership in `(1.18, 1.19) × (−10, −9) × (−ε, ε)²`, all bounds open.
pub fn in_blender_region(xi: f64, mu: f64, kappa: f64, eta: f64, eps: f64) -> bool {
    eps > 0.0
        && xi > 1.18
        && xi < 1.19
        && mu > -10.0
        && mu < -9.0
        && kappa.abs() < eps
        && eta.abs() < eps
}

/// Which side of the Θ relation is composed with which map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConjugacyOrientation {
    /// `Θ ∘ (μ, E) = (ς₂⁻¹μ, G) ∘ Θ`, Θ taking E-coordinates to G-coordinates.
    ThetaAfterE,
    /// `(μ, E) ∘ Θ = Θ ∘ (μ', G)` with `μ = ς₂⁻¹μ'`, Θ taking G-coordinates to
    /// E-coordinates.
    EAfterTheta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EtaVariant {
    Eta4,
    Eta5,
}

/// Relative residual of the conjugacy identity at one point `(μ, x, y, z)`.
pub fn conjugacy_residual(
    sv: &SigmaVector,
    xi: f64,
    w: [f64; 4],
    orientation: ConjugacyOrientation,
    variant: EtaVariant,
) -> Result<f64> {
    let lp = derived_limit_params(sv)?;
    let eta = match variant {
        EtaVariant::Eta4 => lp.eta4,
        EtaVariant::Eta5 => lp.eta5,
    };
    let (lhs, rhs) = match orientation {
        ConjugacyOrientation::ThetaAfterE => {
            let [mu, x, y, z] = w;
            let e = EParams { xi, mu, sv: *sv };
            let ev = eval_e(&e, Vec3::new(x, y, z));
            let lhs = theta_conjugacy(sv, [mu, ev.x, ev.y, ev.z])?;
            let t = theta_conjugacy(sv, w)?;
            let g = HenonParams { xi, mu: t[0], kappa1: lp.kappa, kappa2: eta };
            let gv = eval_g(&g, Vec3::new(t[1], t[2], t[3]));
            (lhs, [t[0], gv.x, gv.y, gv.z])
        }
        ConjugacyOrientation::EAfterTheta => {
            let t = theta_conjugacy(sv, w)?;
            let e = EParams { xi, mu: t[0], sv: *sv };
            let ev = eval_e(&e, Vec3::new(t[1], t[2], t[3]));
            let [mu_g, x, y, z] = w;
            let g = HenonParams { xi, mu: mu_g, kappa1: lp.kappa, kappa2: eta };
            let gv = eval_g(&g, Vec3::new(x, y, z));
            let rhs = theta_conjugacy(sv, [mu_g, gv.x, gv.y, gv.z])?;
            ([t[0], ev.x, ev.y, ev.z], rhs)
        }
    };
    let scale = lhs.iter().chain(rhs.iter()).fold(1.0_f64, |a, v| a.max(v.abs()));
    let diff = lhs.iter().zip(rhs.iter()).fold(0.0_f64, |a, (l, r)| a.max((l - r).abs()));
    Ok(diff / scale)
}

/// Either limit family, for orbit emission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LimitMap {
    G(HenonParams),
    E(EParams),
}

impl LimitMap {
    pub fn apply(&self, v: Vec3) -> Vec3 {
        match self {
            LimitMap::G(p) => eval_g(p, v),
            LimitMap::E(e) => eval_e(e, v),
        }
    }
}

/// Orbit segment; `escaped` is set when iteration stopped at the bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub points: Vec<Vec3>,
    pub escaped: bool,
}

pub const DEFAULT_ESCAPE_BOUND: f64 = 1e6;

pub fn iterate_endomorphism(map: &LimitMap, v0: Vec3, steps: usize, escape_bound: f64) -> Orbit {
    let mut points = Vec::with_capacity(steps + 1);
    points.push(v0);
    let mut v = v0;
    for _ in 0..steps {
        v = map.apply(v);
        points.push(v);
        if !v.is_finite() || v.norm_inf() > escape_bound {
            return Orbit { points, escaped: true };
        }
    }
    Orbit { points, escaped: false }
}
