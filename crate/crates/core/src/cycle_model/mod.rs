//! The model diffeomorphism as a chart-transition system: linear saddle-focus
//! charts at P and Q, quadratic transitions between them, and the eight
//! parameter unfolding built from bump-function perturbations.

mod bump;
mod maps;

pub use bump::{
    bump1, bump3, rotation_matrix_apply, rotation_perturb, smooth_step, translation_perturb, Axis,
};
pub use maps::{
    apply_unfolded, local_p, local_q, trans_pq, trans_qp, ChartRegion, UnfoldedMap,
    ROTATION_RADIUS,
};

use crate::error::{Error, Result};
use crate::scalar::{Precision, Real};
use crate::sojourn_search::ScheduleSettings;
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};

/// Heteroclinic points of the cycle, in chart coordinates.
pub const X_POINT: Vec3 = Vec3::xyz(0.0, 1.0, 0.0);
pub const X_TILDE: Vec3 = Vec3::xyz(1.0, 0.0, 0.0);
pub const Y_POINT: Vec3 = Vec3::xyz(0.0, 1.0, 1.0);
pub const Y_TILDE: Vec3 = Vec3::xyz(1.0, 0.0, 1.0);

/// Half-width of the linearising charts `(−10, 10)³`.
pub const CHART_HALF_WIDTH: f64 = 10.0;

/// Eigenvalue data of the two saddle-foci. Arguments are in full turns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleSpectrum {
    #[serde(rename = "lambda_P")]
    pub lambda_p: f64,
    #[serde(rename = "sigma_P")]
    pub sigma_p: f64,
    #[serde(rename = "phi_P")]
    pub phi_p: f64,
    #[serde(rename = "lambda_Q")]
    pub lambda_q: f64,
    #[serde(rename = "sigma_Q")]
    pub sigma_q: f64,
    #[serde(rename = "phi_Q")]
    pub phi_q: f64,
}

/// Hessians of the three components of a quadratic higher-order term, so
/// that `H_i(v) = ½ vᵀ M_i v`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QuadCoeffs(pub [[[f64; 3]; 3]; 3]);

impl QuadCoeffs {
    pub fn eval<T: Real>(&self, i: usize, v: Vec3<T>) -> T {
        let a = v.to_array();
        let m = &self.0[i];
        let mut acc = T::zero();
        for j in 0..3 {
            for k in 0..3 {
                if m[j][k] != 0.0 {
                    acc += T::from_f64(m[j][k]) * a[j] * a[k];
                }
            }
        }
        acc * T::from_f64(0.5)
    }

    pub fn eval_all<T: Real>(&self, v: Vec3<T>) -> Vec3<T> {
        Vec3::new(self.eval(0, v), self.eval(1, v), self.eval(2, v))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().flatten().all(|&c| c == 0.0)
    }

    fn is_symmetric(&self) -> bool {
        self.0
            .iter()
            .all(|m| (0..3).all(|j| (0..3).all(|k| m[j][k] == m[k][j])))
    }
}

/// Linear and quadratic data of the transition from near X to near X̃.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionQP {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub beta2: f64,
    pub gamma3: f64,
    #[serde(default)]
    pub hqp: QuadCoeffs,
}

/// Linear and quadratic data of the transition from near Y to near Ỹ.
/// The third component uses `c₂` for both the y and z coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionPQ {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub c1: f64,
    pub c2: f64,
    #[serde(default)]
    pub hpq: QuadCoeffs,
}

impl TransitionPQ {
    pub fn c3(&self) -> f64 {
        self.c2
    }
}

fn default_r() -> u32 {
    2
}

fn default_neighbourhood() -> f64 {
    0.5
}

/// Full description of the model diffeomorphism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub spectrum: SaddleSpectrum,
    pub qp: TransitionQP,
    pub pq: TransitionPQ,
    /// Radius of the translation-like perturbations at X̃ and Ỹ.
    pub rho: f64,
    /// Regularity order used when reporting C^r errors.
    #[serde(default = "default_r")]
    pub r: u32,
    #[serde(default)]
    pub precision: Precision,
    /// Half-width of the transition neighbourhood boxes around X and Y.
    #[serde(default = "default_neighbourhood")]
    pub neighbourhood: f64,
    #[serde(default)]
    pub schedule: ScheduleSettings,
}

/// Outcome of one structural check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub tag: &'static str,
    pub description: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl ModelConfig {
    /// The reference configuration whose ς̄ equals `(1, 1, 0, 0, 0.1)` at ξ = 1.185.
    pub fn worked() -> Self {
        ModelConfig {
            spectrum: SaddleSpectrum {
                lambda_p: 0.04,
                sigma_p: 2.0,
                phi_p: 0.1137,
                lambda_q: 0.495,
                sigma_q: 1.5,
                phi_q: 0.2871,
            },
            qp: TransitionQP {
                alpha1: 1.0,
                alpha2: 0.5,
                alpha3: 0.3,
                beta2: std::f64::consts::SQRT_2,
                gamma3: 1.0,
                hqp: QuadCoeffs::default(),
            },
            pq: TransitionPQ {
                a1: 0.7,
                a2: 0.0,
                a3: 1.0,
                b1: 1.0,
                b2: 0.25,
                b3: 0.25,
                b4: 0.5,
                c1: 0.4,
                c2: 0.05,
                hpq: QuadCoeffs::default(),
            },
            rho: 0.4,
            r: 2,
            precision: Precision::Extended,
            neighbourhood: 0.5,
            schedule: ScheduleSettings::worked(),
        }
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Runs every structural check, returning all outcomes.
    pub fn invariant_checks(&self) -> Vec<InvariantCheck> {
        let s = &self.spectrum;
        let (qp, pq) = (&self.qp, &self.pq);
        let mut out = Vec::new();
        let mut push = |tag, description, passed: bool, detail: String| {
            out.push(InvariantCheck { tag, description, passed, detail })
        };
        let finite = [
            s.lambda_p, s.sigma_p, s.phi_p, s.lambda_q, s.sigma_q, s.phi_q, qp.alpha1, qp.alpha2,
            qp.alpha3, qp.beta2, qp.gamma3, pq.a1, pq.a2, pq.a3, pq.b1, pq.b2, pq.b3, pq.b4,
            pq.c1, pq.c2, self.rho, self.neighbourhood,
        ]
        .iter()
        .all(|v| v.is_finite());
        push("finite", "all coefficients finite", finite, String::new());
        push(
            "local-spectrum",
            "0 < lambda < 1 < sigma at P and Q",
            0.0 < s.lambda_p && s.lambda_p < 1.0 && 1.0 < s.sigma_p
                && 0.0 < s.lambda_q && s.lambda_q < 1.0 && 1.0 < s.sigma_q,
            format!(
                "lambda_P={}, sigma_P={}, lambda_Q={}, sigma_Q={}",
                s.lambda_p, s.sigma_p, s.lambda_q, s.sigma_q
            ),
        );
        push(
            "arguments",
            "phi_P != phi_Q, both in [0, 1]",
            s.phi_p != s.phi_q && (0.0..=1.0).contains(&s.phi_p) && (0.0..=1.0).contains(&s.phi_q),
            format!("phi_P={}, phi_Q={}", s.phi_p, s.phi_q),
        );
        push(
            "qp-nondegenerate",
            "alpha1*beta2*gamma3 != 0",
            qp.alpha1 * qp.beta2 * qp.gamma3 != 0.0,
            format!("alpha1*beta2*gamma3 = {}", qp.alpha1 * qp.beta2 * qp.gamma3),
        );
        let d = pq.b1 * pq.c2 * (pq.a3 - pq.a2);
        push("pq-nondegenerate", "b1*c2*(a3-a2) != 0", d != 0.0, format!("b1*c2*(a3-a2) = {d}"));
        let o = qp.gamma3 * (pq.a3 - pq.a2);
        push("orientation", "gamma3*(a3-a2) > 0", o > 0.0, format!("gamma3*(a3-a2) = {o}"));
        let h2 = self.pq.hpq.0[1];
        push(
            "h2-tangency",
            "H2 has no yy, zz or yz terms",
            h2[1][1] == 0.0 && h2[2][2] == 0.0 && h2[1][2] == 0.0 && h2[2][1] == 0.0,
            format!("yy={}, zz={}, yz={}", h2[1][1], h2[2][2], h2[1][2]),
        );
        push(
            "hessians-symmetric",
            "every Hessian block is symmetric",
            self.qp.hqp.is_symmetric() && self.pq.hpq.is_symmetric(),
            String::new(),
        );
        push(
            "bump-radius",
            "0 < rho < 1 keeps the perturbation balls away from the saddles",
            self.rho > 0.0 && self.rho < 1.0,
            format!("rho = {}", self.rho),
        );
        push(
            "neighbourhood",
            "0 < transition half-width <= 1",
            self.neighbourhood > 0.0 && self.neighbourhood <= 1.0,
            format!("half-width = {}", self.neighbourhood),
        );
        out
    }

    /// First failing structural check as an error.
    pub fn validate(&self) -> Result<()> {
        match self.invariant_checks().into_iter().find(|c| !c.passed) {
            None => Ok(()),
            Some(c) => Err(Error::InvalidConfig {
                tag: c.tag,
                msg: format!("{} violated ({})", c.description, c.detail),
            }),
        }
    }
}

/// The eight-dimensional unfolding parameter `(μ̄, ν̄, α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnfoldingParams<T = f64> {
    pub mu_bar: Vec3<T>,
    pub nu_bar: Vec3<T>,
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> UnfoldingParams<T> {
    pub fn zero() -> Self {
        UnfoldingParams { mu_bar: Vec3::zero(), nu_bar: Vec3::zero(), alpha: T::zero(), beta: T::zero() }
    }

    pub fn is_finite(&self) -> bool {
        self.mu_bar.is_finite() && self.nu_bar.is_finite() && self.alpha.is_finite() && self.beta.is_finite()
    }
}

/// Finite-difference check of a derivative against its analytic value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub direction: Vec3,
    pub measured: Vec3,
    pub expected: Vec3,
    pub max_error: f64,
}

/// Outcome of a quasi-transversality or tangency check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub images: Vec<DerivativeReport>,
    pub step: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOLERANCE: f64 = 1e-6;

/// Central difference of `f` at `p` along `d`, refined by one Richardson
/// halving.
pub fn directional_derivative(f: impl Fn(Vec3) -> Vec3, p: Vec3, d: Vec3, h: f64) -> Vec3 {
    let central = |h: f64| (f(p + d.scale(h)) - f(p - d.scale(h))).scale(0.5 / h);
    let (a, b) = (central(h), central(h / 2.0));
    (b.scale(4.0) - a).scale(1.0 / 3.0)
}

fn derivative_report(f: impl Fn(Vec3) -> Vec3, p: Vec3, d: Vec3, expected: Vec3, h: f64) -> DerivativeReport {
    let measured = directional_derivative(f, p, d, h);
    DerivativeReport { direction: d, measured, expected, max_error: (measured - expected).norm_inf() }
}

/// Image of `(0,1,0)` under the derivative of the QP transition at X; it
/// must equal `(α₂, β₂, 0)` with `β₂ ≠ 0`.
pub fn check_quasi_transverse(cfg: &ModelConfig, h: f64, tol: f64) -> Result<TransversalityReport> {
    let qp = cfg.qp;
    if qp.beta2.abs() < tol {
        return Err(Error::DegenerateModel(format!("beta2 = {} vanishes", qp.beta2)));
    }
    let f = |v: Vec3| trans_qp_unchecked(&qp, v);
    let rep = derivative_report(f, X_POINT, Vec3::xyz(0.0, 1.0, 0.0), Vec3::xyz(qp.alpha2, qp.beta2, 0.0), h);
    let passed = rep.max_error < tol && rep.measured.y.abs() > tol;
    if !passed {
        return Err(Error::DegenerateModel(format!(
            "QP image of (0,1,0) = {:?}, expected {:?}",
            rep.measured, rep.expected
        )));
    }
    Ok(TransversalityReport { images: vec![rep], step: h, tolerance: tol, passed })
}

/// Images of `(0,1,0)` and `(0,0,1)` under the derivative of the PQ
/// transition at Y: `(a₂, 0, c₂)` and `(a₃, 0, c₂)`, second components zero.
pub fn check_tangency(cfg: &ModelConfig, h: f64, tol: f64) -> Result<TransversalityReport> {
    let pq = cfg.pq;
    let f = |v: Vec3| trans_pq_unchecked(&pq, v);
    let images = vec![
        derivative_report(f, Y_POINT, Vec3::xyz(0.0, 1.0, 0.0), Vec3::xyz(pq.a2, 0.0, pq.c2), h),
        derivative_report(f, Y_POINT, Vec3::xyz(0.0, 0.0, 1.0), Vec3::xyz(pq.a3, 0.0, pq.c3()), h),
    ];
    let passed = images.iter().all(|r| r.max_error < tol && r.measured.y.abs() < tol);
    if !passed {
        return Err(Error::DegenerateModel(format!(
            "PQ images {:?}, {:?} do not match the tangency",
            images[0].measured, images[1].measured
        )));
    }
    Ok(TransversalityReport { images, step: h, tolerance: tol, passed })
}

pub(crate) fn trans_qp_unchecked<T: Real>(qp: &TransitionQP, v: Vec3<T>) -> Vec3<T> {
    let c = |a: f64| T::from_f64(a);
    let d = v - Vec3::from_f64(X_POINT);
    let h = qp.hqp.eval_all(d);
    Vec3::new(
        T::one() + c(qp.alpha1) * d.x + c(qp.alpha2) * d.y + c(qp.alpha3) * d.z + h.x,
        c(qp.beta2) * d.y + h.y,
        c(qp.gamma3) * d.z + h.z,
    )
}

pub(crate) fn trans_pq_unchecked<T: Real>(pq: &TransitionPQ, v: Vec3<T>) -> Vec3<T> {
    let c = |a: f64| T::from_f64(a);
    let d = v - Vec3::from_f64(Y_POINT);
    let h = pq.hpq.eval_all(d);
    Vec3::new(
        T::one() + c(pq.a1) * d.x + c(pq.a2) * d.y + c(pq.a3) * d.z + h.x,
        c(pq.b1) * d.x + c(pq.b2) * d.y * d.y + c(pq.b3) * d.z * d.z + c(pq.b4) * d.y * d.z + h.y,
        T::one() + c(pq.c1) * d.x + c(pq.c2) * (d.y + d.z) + h.z,
    )
}
