//! The coefficient vector ς̄ of the limit map, the blender parameter
//! restriction, the map γ_ξ and an explicit section of it.

use crate::cycle_model::ModelConfig;
use crate::error::{Error, Result};
use crate::henon_limit::{derived_limit_params, in_blender_region, SigmaVector};
use crate::renorm_engine::{convergence_report, RenormReport};
use crate::scalar::{DoubleDouble, Real};
use crate::sojourn_search::{check_spectral, SojournSchedule, SpectralCheck};
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// Final C⁰ error below which the renormalization counts as converged.
pub const C0_THRESHOLD: f64 = 0.05;

/// Magnitude given to `c₂` when a zero value is requested with nudging on.
pub const C2_NUDGE: f64 = 1e-12;

/// Correctly rounded sum, so that near-cancelling coefficient combinations
/// keep their relative accuracy.
fn exact_sum(terms: &[f64]) -> f64 {
    terms.iter().fold(DoubleDouble::from_f64(0.0), |acc, &t| acc + DoubleDouble::from_f64(t)).to_f64()
}

pub fn sigma_vector(cfg: &ModelConfig, xi: f64) -> SigmaVector {
    let (qp, pq) = (&cfg.qp, &cfg.pq);
    let b2 = qp.beta2;
    let da = pq.a3 - pq.a2;
    SigmaVector::new(
        b2 * (pq.a2 + pq.a3) / SQRT_2,
        b2 * b2 * exact_sum(&[pq.b2, pq.b3, pq.b4]) / 2.0,
        xi * xi * exact_sum(&[pq.b2, pq.b3, -pq.b4]) / (da * da),
        xi * SQRT_2 * b2 * (pq.b3 - pq.b2) / da,
        b2 * (pq.c2 + pq.c3()) / SQRT_2,
    )
}

/// `(κ, η) = (ς₁²ς₃/ς₂, ς₁ς₅/ς₂)` for a given ς̄.
pub fn gamma_of_sigma(sv: &SigmaVector) -> Result<(f64, f64)> {
    let lp = derived_limit_params(sv)?;
    Ok((lp.kappa, lp.eta5))
}

/// `γ_ξ(f) = (κ, η)` with η in the `ς₅` form.
pub fn gamma_xi(cfg: &ModelConfig, xi: f64) -> Result<(f64, f64)> {
    gamma_of_sigma(&sigma_vector(cfg, xi))
}

/// A solved configuration, with the `c₂` nudge if one was applied.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvedTargets {
    pub cfg: ModelConfig,
    pub nudged_c2: Option<f64>,
}

/// Modifies `b₂, b₃, b₄` and `c₂` of `base` so that `γ_ξ = (κ₀, η₀)`, holding
/// `β₂, a₂, a₃`, `b₂+b₃+b₄` and `b₃−b₂` fixed. Both unknowns enter linearly.
pub fn solve_targets_with(xi: f64, kappa0: f64, eta0: f64, base: &ModelConfig, nudge: bool) -> Result<SolvedTargets> {
    if !(xi > 0.0) || !kappa0.is_finite() || !eta0.is_finite() {
        return Err(Error::InfeasibleTargets(format!("need xi > 0 and finite targets, got ({xi}, {kappa0}, {eta0})")));
    }
    let sv = sigma_vector(base, xi);
    if sv.s1 == 0.0 || sv.s2 == 0.0 {
        return Err(Error::InfeasibleTargets("base configuration has s1 = 0 or s2 = 0".into()));
    }
    let mut cfg = base.clone();
    let pq = &mut cfg.pq;
    let da = pq.a3 - pq.a2;
    let total = pq.b2 + pq.b3 + pq.b4;
    let diff = pq.b3 - pq.b2;
    let d = kappa0 * sv.s2 * da * da / (sv.s1 * sv.s1 * xi * xi);
    let pair_sum = (total + d) / 2.0;
    pq.b4 = (total - d) / 2.0;
    pq.b2 = (pair_sum - diff) / 2.0;
    pq.b3 = (pair_sum + diff) / 2.0;

    let mut c2 = eta0 * sv.s2 / (sv.s1 * SQRT_2 * cfg.qp.beta2);
    let mut nudged_c2 = None;
    if c2 == 0.0 {
        if !nudge {
            return Err(Error::InfeasibleTargets(
                "eta0 = 0 forces c2 = 0, which makes the transition degenerate".into(),
            ));
        }
        c2 = C2_NUDGE;
        nudged_c2 = Some(c2);
    }
    cfg.pq.c2 = c2;
    cfg.validate().map_err(|e| Error::InfeasibleTargets(format!("solution breaks an invariant: {e}")))?;
    Ok(SolvedTargets { cfg, nudged_c2 })
}

/// [`solve_targets_with`] without nudging.
pub fn solve_targets(xi: f64, kappa0: f64, eta0: f64, base: &ModelConfig) -> Result<ModelConfig> {
    solve_targets_with(xi, kappa0, eta0, base, false).map(|s| s.cfg)
}

/// Convergence summary carried in a certification report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    pub first_k: Option<usize>,
    pub last_k: Option<usize>,
    pub first_c0: f64,
    pub final_c0: f64,
    pub c0_decreasing: bool,
    pub final_below_threshold: bool,
}

impl ConvergenceSummary {
    fn of(r: &RenormReport) -> Self {
        let c0: Vec<f64> = r.records.iter().map(|x| x.sup_c0_error).collect();
        let (first_c0, final_c0) = (c0.first().copied().unwrap_or(f64::NAN), c0.last().copied().unwrap_or(f64::NAN));
        ConvergenceSummary {
            first_k: r.records.first().map(|x| x.k),
            last_k: r.records.last().map(|x| x.k),
            first_c0,
            final_c0,
            c0_decreasing: c0.len() >= 2 && final_c0 < first_c0,
            final_below_threshold: final_c0 < C0_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub xi: f64,
    pub mu: f64,
    pub eps: f64,
    pub sigma_vec: SigmaVector,
    pub kappa: f64,
    /// `ς₁ς₄/ς₂`
    pub eta4: f64,
    /// `ς₁ς₅/ς₂`
    pub eta5: f64,
    pub spectral: SpectralCheck,
    pub spectral_ok: bool,
    /// Box membership using `η₅`.
    pub restriction_ok: bool,
    /// Box membership using `η₄`.
    pub restriction_ok_alt: bool,
    pub warnings: Vec<String>,
    pub convergence: ConvergenceSummary,
    pub schedule_summary: RenormReport,
    /// "numerical-evidence" when every check passes, otherwise "not-certified".
    pub verdict: String,
}

impl CertReport {
    pub fn passed(&self) -> bool {
        self.spectral_ok && self.restriction_ok && self.convergence.final_below_threshold
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs the spectral check, evaluates ς̄ and γ_ξ, tests the blender box for
/// both η forms and measures convergence along `schedule`.
///
/// The verdict is evidence from parameters and numerics, never a proof.
pub fn certify_scheme(
    cfg: &ModelConfig,
    xi: f64,
    mu: f64,
    eps: f64,
    schedule: &SojournSchedule,
    grid: &[Vec3],
    fd_step: f64,
) -> Result<CertReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let spectral = check_spectral(&cfg.spectrum);
    let sv = sigma_vector(cfg, xi);
    let lp = derived_limit_params(&sv)?;
    let mut warnings = Vec::new();
    if !(xi > 1.18 && xi < 1.19) {
        warnings.push(format!("xi = {xi} lies outside (1.18, 1.19)"));
    }
    let report = convergence_report(cfg, schedule, xi, mu, grid, fd_step)?;
    if !report.skipped.is_empty() {
        warnings.push(format!("{} leading schedule entries were inadmissible", report.skipped.len()));
    }
    if report.records.iter().any(|r| !r.precision_ok) {
        warnings.push("some entries lost too many bits to rescaling".into());
    }
    let convergence = ConvergenceSummary::of(&report);
    let mut cert = CertReport {
        xi,
        mu,
        eps,
        sigma_vec: sv,
        kappa: lp.kappa,
        eta4: lp.eta4,
        eta5: lp.eta5,
        spectral,
        spectral_ok: spectral.ok,
        restriction_ok: in_blender_region(xi, mu, lp.kappa, lp.eta5, eps),
        restriction_ok_alt: in_blender_region(xi, mu, lp.kappa, lp.eta4, eps),
        warnings,
        convergence,
        schedule_summary: report,
        verdict: String::new(),
    };
    cert.verdict = if cert.passed() { "numerical-evidence" } else { "not-certified" }.into();
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sojourn_search::schedule_for;
    use crate::vec3::cube_grid;

    #[test]
    fn sigma_vector_examples() {
        let cfg = ModelConfig::worked();
        let sv = sigma_vector(&cfg, 1.185).to_array();
        for (a, b) in sv.iter().zip([1.0, 1.0, 0.0, 0.0, 0.1]) {
            assert!((a - b).abs() < 1e-15);
        }
        let mut c = cfg.clone();
        c.pq.b3 = 0.4;
        c.pq.b2 = 0.4;
        assert_eq!(sigma_vector(&c, 2.7).s4, 0.0);
    }

    #[test]
    fn sigma_vector_homogeneity() {
        let mut cfg = ModelConfig::worked();
        cfg.pq.b2 = 0.1;
        cfg.pq.b3 = 0.3;
        cfg.pq.b4 = 0.2;
        let a = sigma_vector(&cfg, 0.8);
        let b = sigma_vector(&cfg, 1.6);
        assert_eq!((b.s1, b.s2, b.s5), (a.s1, a.s2, a.s5));
        assert!((b.s3 - 4.0 * a.s3).abs() < 1e-15);
        assert!((b.s4 - 2.0 * a.s4).abs() < 1e-15);
        let z = sigma_vector(&cfg, 0.0);
        assert_eq!((z.s3, z.s4), (0.0, 0.0));
    }

    #[test]
    fn gamma_examples() {
        let (k, e) = gamma_xi(&ModelConfig::worked(), 1.185).unwrap();
        assert!(k.abs() < 1e-15 && (e - 0.1).abs() < 1e-15);
        assert_eq!(gamma_of_sigma(&SigmaVector::new(2.0, 4.0, 1.0, 7.0, 5.0)).unwrap(), (1.0, 2.5));
        assert!(matches!(gamma_of_sigma(&SigmaVector::new(1.0, 0.0, 1.0, 1.0, 1.0)), Err(Error::DegenerateSigma(_))));
    }

    #[test]
    fn solve_targets_examples() {
        let base = ModelConfig::worked();
        let cfg = solve_targets(1.185, 0.0, 0.1, &base).unwrap();
        assert!((cfg.pq.b4 - 0.5).abs() < 1e-15);
        assert!((cfg.pq.b2 - 0.25).abs() < 1e-15 && (cfg.pq.b3 - 0.25).abs() < 1e-15);
        assert!((cfg.pq.c2 - 0.05).abs() < 1e-15);
        let sv = sigma_vector(&cfg, 1.185).to_array();
        for (a, b) in sv.iter().zip([1.0, 1.0, 0.0, 0.0, 0.1]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(matches!(solve_targets(1.185, 0.0, 0.0, &base), Err(Error::InfeasibleTargets(_))));
        let s = solve_targets_with(1.185, 0.0, 0.0, &base, true).unwrap();
        assert_eq!(s.nudged_c2, Some(C2_NUDGE));
    }

    #[test]
    fn solve_targets_round_trip() {
        let base = ModelConfig::worked();
        for (k0, e0) in [(0.03, -0.07), (-0.1, 0.15), (0.001, 0.002)] {
            let cfg = solve_targets(1.186, k0, e0, &base).unwrap();
            let (k, e) = gamma_xi(&cfg, 1.186).unwrap();
            assert!((k - k0).abs() <= 1e-12 * k0.abs().max(1e-3));
            assert!((e - e0).abs() <= 1e-12 * e0.abs());
        }
    }

    fn certify(cfg: &ModelConfig, xi: f64, eps: f64) -> CertReport {
        let s = schedule_for(cfg, xi).unwrap();
        certify_scheme(cfg, xi, -9.5, eps, &s, &cube_grid(3, 1.0), 1e-5).unwrap()
    }

    #[test]
    fn worked_config_certifies() {
        let r = certify(&ModelConfig::worked(), 1.185, 0.2);
        assert!(r.spectral_ok && r.restriction_ok && r.restriction_ok_alt);
        assert!(r.convergence.c0_decreasing && r.passed());
        assert_eq!(r.verdict, "numerical-evidence");
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn certification_failures() {
        let mut cfg = ModelConfig::worked();
        cfg.spectrum.sigma_q = 3.0;
        let r = certify(&cfg, 1.185, 0.2);
        assert!(!r.spectral_ok && r.restriction_ok && !r.passed());
        let r = certify(&ModelConfig::worked(), 1.5, 0.2);
        assert!(!r.restriction_ok && !r.warnings.is_empty() && !r.passed());
        let r = certify(&ModelConfig::worked(), 1.185, 0.05);
        assert!(!r.restriction_ok && !r.passed());
    }
}
