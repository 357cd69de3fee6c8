use super::{
    trans_pq_unchecked, trans_qp_unchecked, ModelConfig, SaddleSpectrum, TransitionPQ, TransitionQP,
    UnfoldingParams, CHART_HALF_WIDTH, X_POINT, X_TILDE, Y_POINT, Y_TILDE,
};
use crate::cycle_model::bump::{rotation_matrix_apply, Axis};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};

/// Radius of the rotating perturbations, supported in `[−8, 8]³`.
pub const ROTATION_RADIUS: f64 = 8.0;

/// `f` on the P chart with argument shifted by `alpha`.
pub fn local_p<T: Real>(sp: &SaddleSpectrum, alpha: T, v: Vec3<T>) -> Vec3<T> {
    let angle = T::two_pi() * (T::from_f64(sp.phi_p) + alpha);
    let (c, s) = (angle.cos(), angle.sin());
    let sig = T::from_f64(sp.sigma_p);
    Vec3::new(T::from_f64(sp.lambda_p) * v.x, sig * (c * v.y - s * v.z), sig * (s * v.y + c * v.z))
}

/// `f` on the Q chart with argument shifted by `beta`.
pub fn local_q<T: Real>(sp: &SaddleSpectrum, beta: T, v: Vec3<T>) -> Vec3<T> {
    let angle = T::two_pi() * (T::from_f64(sp.phi_q) + beta);
    let (c, s) = (angle.cos(), angle.sin());
    let lam = T::from_f64(sp.lambda_q);
    Vec3::new(lam * (c * v.x - s * v.z), T::from_f64(sp.sigma_q) * v.y, lam * (s * v.x + c * v.z))
}

fn in_box<T: Real>(center: Vec3, half: f64, v: Vec3<T>) -> bool {
    (v - Vec3::from_f64(center)).norm_inf() <= T::from_f64(half)
}

/// Transition from a neighbourhood of X to a neighbourhood of X̃.
pub fn trans_qp<T: Real>(qp: &TransitionQP, half_width: f64, v: Vec3<T>) -> Result<Vec3<T>> {
    if !in_box(X_POINT, half_width, v) {
        return Err(Error::OutOfNeighbourhood { region: "QP", point: v.to_f64() });
    }
    Ok(trans_qp_unchecked(qp, v))
}

/// Transition from a neighbourhood of Y to a neighbourhood of Ỹ.
pub fn trans_pq<T: Real>(pq: &TransitionPQ, half_width: f64, v: Vec3<T>) -> Result<Vec3<T>> {
    if !in_box(Y_POINT, half_width, v) {
        return Err(Error::OutOfNeighbourhood { region: "PQ", point: v.to_f64() });
    }
    Ok(trans_pq_unchecked(pq, v))
}

/// Region of the chart-transition system a point is evaluated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChartRegion {
    PLocal,
    QLocal,
    QpTransition,
    PqTransition,
}

/// The perturbed map `f_ῡ` with all rotation data evaluated once.
///
/// Bump arguments are checked at every application: a perturbation with a
/// nonzero parameter must act either fully (plateau) or not at all (outside
/// its support), otherwise [`Error::PlateauViolation`] is raised.
#[derive(Debug, Clone)]
pub struct UnfoldedMap<T: Real> {
    cfg: ModelConfig,
    up: UnfoldingParams<T>,
    p_rot: (T, T),
    q_rot: (T, T),
    alpha_rot: (T, T),
    beta_rot: (T, T),
}

fn turn<T: Real>(t: T) -> (T, T) {
    let a = T::two_pi() * t;
    (a.cos(), a.sin())
}

impl<T: Real> UnfoldedMap<T> {
    pub fn new(cfg: &ModelConfig, up: UnfoldingParams<T>) -> Self {
        let s = &cfg.spectrum;
        UnfoldedMap {
            cfg: cfg.clone(),
            up,
            p_rot: turn(T::from_f64(s.phi_p)),
            q_rot: turn(T::from_f64(s.phi_q)),
            alpha_rot: turn(up.alpha),
            beta_rot: turn(up.beta),
        }
    }

    pub fn params(&self) -> &UnfoldingParams<T> {
        &self.up
    }

    fn domain_check(stage: &'static str, v: Vec3<T>) -> Result<()> {
        if !v.is_finite() || v.norm_inf() >= T::from_f64(CHART_HALF_WIDTH) {
            return Err(Error::DomainEscape { stage, point: v.to_f64() });
        }
        Ok(())
    }

    fn rotate(&self, stage: &'static str, axis: Axis, omega: T, cs: (T, T), w: Vec3<T>) -> Result<Vec3<T>> {
        if omega == T::zero() {
            return Ok(w);
        }
        let r = w.norm();
        let rho = T::from_f64(ROTATION_RADIUS);
        if r <= rho * T::from_f64(0.5) {
            Ok(rotation_matrix_apply(axis, cs.0, cs.1, w))
        } else if r >= rho {
            Ok(w)
        } else {
            Err(Error::PlateauViolation { stage, value: r.to_f64() })
        }
    }

    fn translate(&self, stage: &'static str, center: Vec3, shift: Vec3<T>, w: Vec3<T>) -> Result<Vec3<T>> {
        if shift == Vec3::zero() {
            return Ok(w);
        }
        let r = (w - Vec3::from_f64(center)).norm();
        let rho = T::from_f64(self.cfg.rho);
        if r <= rho * T::from_f64(0.5) {
            Ok(w + shift)
        } else if r >= rho {
            Ok(w)
        } else {
            Err(Error::PlateauViolation { stage, value: r.to_f64() })
        }
    }

    pub fn apply(&self, region: ChartRegion, v: Vec3<T>) -> Result<Vec3<T>> {
        let s = &self.cfg.spectrum;
        match region {
            ChartRegion::PLocal => {
                Self::domain_check("P-local", v)?;
                let (c, sn) = self.p_rot;
                let sig = T::from_f64(s.sigma_p);
                let w = Vec3::new(
                    T::from_f64(s.lambda_p) * v.x,
                    sig * (c * v.y - sn * v.z),
                    sig * (sn * v.y + c * v.z),
                );
                let out = self.rotate("P-local", Axis::X, self.up.alpha, self.alpha_rot, w)?;
                Self::domain_check("P-local", out)?;
                Ok(out)
            }
            ChartRegion::QLocal => {
                Self::domain_check("Q-local", v)?;
                let (c, sn) = self.q_rot;
                let lam = T::from_f64(s.lambda_q);
                let w = Vec3::new(
                    lam * (c * v.x - sn * v.z),
                    T::from_f64(s.sigma_q) * v.y,
                    lam * (sn * v.x + c * v.z),
                );
                let out = self.rotate("Q-local", Axis::Y, self.up.beta, self.beta_rot, w)?;
                Self::domain_check("Q-local", out)?;
                Ok(out)
            }
            ChartRegion::QpTransition => {
                let w = trans_qp(&self.cfg.qp, self.cfg.neighbourhood, v)?;
                self.translate("QP-transition", X_TILDE, self.up.nu_bar, w)
            }
            ChartRegion::PqTransition => {
                let w = trans_pq(&self.cfg.pq, self.cfg.neighbourhood, v)?;
                self.translate("PQ-transition", Y_TILDE, self.up.mu_bar, w)
            }
        }
    }
}

/// One application of `f_ῡ` in the given region.
pub fn apply_unfolded<T: Real>(
    cfg: &ModelConfig,
    up: &UnfoldingParams<T>,
    v: Vec3<T>,
    region: ChartRegion,
) -> Result<Vec3<T>> {
    UnfoldedMap::new(cfg, *up).apply(region, v)
}
