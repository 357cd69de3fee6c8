//! Spectral condition, the search for sojourn times `(m, n)` with
//! `τ σ_P^m λ_Q^n ≈ ξ`, and the argument adjustments that land the iterated
//! rotation angles on π/4 and π/2.

use crate::cycle_model::{ModelConfig, SaddleSpectrum, TransitionQP};
use crate::error::{Error, Result};
use crate::scalar::{DoubleDouble, Real};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralCheck {
    pub ok: bool,
    /// `log λ_Q⁻¹ / log σ_P`
    pub eta: f64,
    /// `(λ_P^{1/2} σ_P)^η σ_Q`
    pub value: f64,
}

pub fn check_spectral(sp: &SaddleSpectrum) -> SpectralCheck {
    let eta = (1.0 / sp.lambda_q).ln() / sp.sigma_p.ln();
    let value = (sp.lambda_p.sqrt() * sp.sigma_p).powf(eta) * sp.sigma_q;
    SpectralCheck { ok: value > 0.0 && value < 1.0, eta, value }
}

/// The interval `(1, σ*)` of unstable eigenvalues σ_Q for which the spectral
/// condition holds, given `λ_P = lt`, `σ_P = st` and `λ_Q = l`.
pub fn sigma_interval(lt: f64, st: f64, l: f64) -> Result<(f64, f64)> {
    let base = lt.sqrt() * st;
    if !(base > 0.0 && base < 1.0) {
        return Err(Error::NotInZTilde { lt, st, value: base });
    }
    if !(l > 0.0 && l < 1.0) {
        return Err(Error::InvalidArgument(format!("lambda must lie in (0, 1), got {l}")));
    }
    let eta = (1.0 / l).ln() / st.ln();
    Ok((1.0, (-eta * base.ln()).exp()))
}

/// `τ = γ₃(a₃ − a₂)/√2`.
pub fn tau_of(cfg: &ModelConfig) -> f64 {
    cfg.qp.gamma3 * (cfg.pq.a3 - cfg.pq.a2) / std::f64::consts::SQRT_2
}

/// A pair of sojourn times with the two quantities the search controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SojournPair {
    pub m: u64,
    pub n: u64,
    /// `σ_P^m λ_Q^n`
    pub product: f64,
    /// `|m − nη − η̃|` with `η̃ = log(ξτ⁻¹)/log σ_P`
    pub slack: f64,
}

/// Rational `p/q` with `q ≤ 100` lying within `1e−9` of `eta`, if any.
pub fn resonance(eta: f64) -> Option<(i64, i64)> {
    (1..=100).find_map(|q| {
        let p = (eta * q as f64).round();
        ((eta - p / q as f64).abs() < 1e-9).then_some((p as i64, q))
    })
}

fn gap_dd(sigma: f64, lambda: f64, tau: f64, xi: f64, m: u64, n: u64) -> (f64, f64) {
    let prod = DoubleDouble::pow_product(&[(sigma, m as i64), (lambda, n as i64)]);
    let gap = (DoubleDouble::from_f64(tau) * prod - DoubleDouble::from_f64(xi)).abs();
    (prod.to_f64(), gap.to_f64())
}

/// Scans `n` upward from `n_after + 1`, testing the two integers nearest to
/// `nη + η̃` for `m`. Requires `m > m_after`.
#[allow(clippy::too_many_arguments)]
fn search(
    sigma: f64,
    lambda: f64,
    tau: f64,
    xi: f64,
    eps: f64,
    n_after: u64,
    m_after: u64,
    n_max: u64,
) -> Result<SojournPair> {
    let eta = (1.0 / lambda).ln() / sigma.ln();
    let eta_t = (xi / tau).ln() / sigma.ln();
    for n in (n_after + 1)..=n_max {
        let t = n as f64 * eta + eta_t;
        let lo = t.floor();
        for m in [lo, lo + 1.0] {
            if m < 0.0 || (m as u64) <= m_after {
                continue;
            }
            let m = m as u64;
            let slack = (m as f64 - t).abs();
            if slack >= 1.0 {
                continue;
            }
            let (product, gap) = gap_dd(sigma, lambda, tau, xi, m, n);
            if gap < eps {
                return Ok(SojournPair { m, n, product, slack });
            }
        }
    }
    let diagnostic = resonance(eta).map(|(p, q)| {
        format!("resonance: log(1/lambda)/log(sigma) = {eta} is within 1e-9 of {p}/{q}")
    });
    Err(Error::NotFound { n_max, diagnostic })
}

fn check_search_args(sigma: f64, lambda: f64, tau: f64, xi: f64, eps: f64) -> Result<()> {
    if !(sigma > 1.0 && lambda > 0.0 && lambda < 1.0 && tau > 0.0 && xi > 0.0 && eps > 0.0 && eps < xi) {
        return Err(Error::InvalidArgument(format!(
            "search needs sigma > 1, 0 < lambda < 1, tau > 0, 0 < eps < xi; got \
             sigma={sigma}, lambda={lambda}, tau={tau}, xi={xi}, eps={eps}"
        )));
    }
    Ok(())
}

/// First pair with `m, n > n0`, `|τσ^mλ^n − ξ| < eps` and slack below one.
pub fn find_sojourn(
    sigma: f64,
    lambda: f64,
    tau: f64,
    xi: f64,
    eps: f64,
    n0: u64,
    n_max: u64,
) -> Result<SojournPair> {
    check_search_args(sigma, lambda, tau, xi, eps)?;
    search(sigma, lambda, tau, xi, eps, n0, n0, n_max)
}

/// Decay law of the argument offsets `(ζ_k, ϑ_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum OffsetRule {
    /// `1/(k+2)` in both slots.
    #[default]
    Harmonic,
    /// `scale/2^k` in both slots.
    Geometric { scale: f64 },
    Zero,
}

impl OffsetRule {
    pub fn offset(&self, k: usize) -> f64 {
        match *self {
            OffsetRule::Harmonic => 1.0 / (k as f64 + 2.0),
            OffsetRule::Geometric { scale } => scale / 2f64.powi(k as i32),
            OffsetRule::Zero => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Offset {
    pub zeta: f64,
    pub vartheta: f64,
}

/// Sojourn pairs adapted to the target `τ⁻¹ξ`, with argument offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SojournSchedule {
    pub pairs: Vec<SojournPair>,
    pub offsets: Vec<Offset>,
    pub target: f64,
}

/// One serialized schedule entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub m: u64,
    pub n: u64,
    pub product: f64,
    pub slack: f64,
    pub zeta: f64,
    pub vartheta: f64,
}

impl SojournSchedule {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn rows(&self) -> Vec<ScheduleRow> {
        self.pairs
            .iter()
            .zip(&self.offsets)
            .map(|(p, o)| ScheduleRow {
                m: p.m,
                n: p.n,
                product: p.product,
                slack: p.slack,
                zeta: o.zeta,
                vartheta: o.vartheta,
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rows()).expect("schedule serializes")
    }

    /// Rebuilds a schedule from serialized rows.
    pub fn from_rows(rows: &[ScheduleRow], target: f64) -> Self {
        SojournSchedule {
            pairs: rows
                .iter()
                .map(|r| SojournPair { m: r.m, n: r.n, product: r.product, slack: r.slack })
                .collect(),
            offsets: rows.iter().map(|r| Offset { zeta: r.zeta, vartheta: r.vartheta }).collect(),
            target,
        }
    }
}

/// Schedule construction settings, stored alongside a model configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleSettings {
    pub eps0: f64,
    pub n0: u64,
    pub count: usize,
    pub n_max: u64,
    pub offsets: OffsetRule,
}

impl Default for ScheduleSettings {
    fn default() -> Self {
        ScheduleSettings { eps0: 0.1, n0: 5, count: 4, n_max: 1000, offsets: OffsetRule::Harmonic }
    }
}

impl ScheduleSettings {
    /// Settings used with the worked configuration: small geometric offsets so
    /// that the trigonometric error does not dominate at desk scale.
    pub fn worked() -> Self {
        ScheduleSettings { offsets: OffsetRule::Geometric { scale: 1e-3 }, ..Default::default() }
    }
}

/// Builds `count` pairs with `|τσ^{m_k}λ^{n_k} − ξ| < ε_k`, where
/// `ε_k = min(eps0/2^k, previous gap)` keeps the gaps nonincreasing, and both
/// `m_k` and `n_k` strictly increase.
#[allow(clippy::too_many_arguments)]
pub fn build_schedule_with(
    sigma: f64,
    lambda: f64,
    tau: f64,
    xi: f64,
    count: usize,
    eps0: f64,
    n0: u64,
    n_max: u64,
    offsets: OffsetRule,
) -> Result<SojournSchedule> {
    let target = xi / tau;
    let mut sched = SojournSchedule { pairs: Vec::new(), offsets: Vec::new(), target };
    if count == 0 {
        return Ok(sched);
    }
    check_search_args(sigma, lambda, tau, xi, eps0)?;
    let (mut n_after, mut m_after) = (n0, n0);
    let mut last_gap = f64::INFINITY;
    for k in 0..count {
        let eps = (eps0 / 2f64.powi(k as i32)).min(last_gap);
        let pair = search(sigma, lambda, tau, xi, eps, n_after, m_after, n_max)?;
        last_gap = gap_dd(sigma, lambda, tau, xi, pair.m, pair.n).1;
        n_after = pair.n;
        m_after = pair.m;
        let o = offsets.offset(k);
        sched.pairs.push(pair);
        sched.offsets.push(Offset { zeta: o, vartheta: o });
    }
    Ok(sched)
}

/// Schedule with default start `n0 = 5`, scan limit 1000 and harmonic offsets.
pub fn build_schedule(
    sigma: f64,
    lambda: f64,
    tau: f64,
    xi: f64,
    count: usize,
    eps0: f64,
) -> Result<SojournSchedule> {
    let d = ScheduleSettings::default();
    build_schedule_with(sigma, lambda, tau, xi, count, eps0, d.n0, d.n_max, d.offsets)
}

/// Schedule for a model configuration and target ξ using its settings.
pub fn schedule_for(cfg: &ModelConfig, xi: f64) -> Result<SojournSchedule> {
    let s = &cfg.schedule;
    let sp = &cfg.spectrum;
    build_schedule_with(
        sp.sigma_p,
        sp.lambda_q,
        tau_of(cfg),
        xi,
        s.count,
        s.eps0,
        s.n0,
        s.n_max,
        s.offsets,
    )
}

/// Argument corrections `(α, β)` with `2πm(θ+α) ≡ π/4 + ζ` and
/// `2πn(ω+β) ≡ π/2 + ϑ` modulo 2π.
pub fn adapted_arguments<T: Real>(m: u64, n: u64, theta: T, omega: T, zeta: T, vartheta: T) -> (T, T) {
    let two_pi = T::two_pi();
    let (mf, nf) = (T::from_i64(m as i64), T::from_i64(n as i64));
    let (mt, nw) = (mf * theta, nf * omega);
    let quarter = T::pi() * T::from_f64(0.25);
    let half = T::pi() * T::from_f64(0.5);
    let alpha = (quarter - two_pi * mt + two_pi * mt.floor() + zeta) / (two_pi * mf);
    let beta = (half - two_pi * nw + two_pi * nw.floor() + vartheta) / (two_pi * nf);
    (alpha, beta)
}

/// `(c̃, s̃, c, s)`: cosine and sine of the iterated P and Q rotation angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trig<T = f64> {
    pub ct: T,
    pub st: T,
    pub c: T,
    pub s: T,
}

impl<T: Real> Trig<T> {
    pub fn to_f64(self) -> Trig<f64> {
        Trig { ct: self.ct.to_f64(), st: self.st.to_f64(), c: self.c.to_f64(), s: self.s.to_f64() }
    }
}

/// Trigonometric sequences from the reduced congruence angles `π/4 + ζ` and
/// `π/2 + ϑ`, which the adapted arguments make exact.
pub fn trig_from_offsets<T: Real>(zeta: T, vartheta: T) -> Trig<T> {
    let a = T::pi() * T::from_f64(0.25) + zeta;
    let b = T::pi() * T::from_f64(0.5) + vartheta;
    Trig { ct: a.cos(), st: a.sin(), c: b.cos(), s: b.sin() }
}

/// Trigonometric sequences from adjusted arguments, reducing `m·φ` modulo
/// one before scaling by 2π.
pub fn trig_sequences<T: Real>(m: u64, n: u64, phi_p_adj: T, phi_q_adj: T) -> Trig<T> {
    let reduce = |k: u64, phi: T| {
        let u = T::from_i64(k as i64) * phi;
        T::two_pi() * (u - u.floor())
    };
    let (a, b) = (reduce(m, phi_p_adj), reduce(n, phi_q_adj));
    Trig { ct: a.cos(), st: a.sin(), c: b.cos(), s: b.sin() }
}

/// Corrections `(ρ̃₂, ρ̃₃)` built from the xx and zz Hessian entries of H̃₂, H̃₃.
pub fn rho_tilde<T: Real>(qp: &TransitionQP, c: T, s: T) -> (T, T) {
    let h = |i: usize, j: usize| T::from_f64(qp.hqp.0[i][j][j]);
    let half = T::from_f64(0.5);
    let (dm, dp) = (c - s, s + c);
    let r2 = half * h(1, 0) * dm * dm + half * h(1, 2) * dp * dp;
    let r3 = half * h(2, 0) * dm * dm + half * h(2, 2) * dp * dp;
    (r2, r3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(lp: f64, sp: f64, lq: f64, sq: f64) -> SaddleSpectrum {
        SaddleSpectrum { lambda_p: lp, sigma_p: sp, phi_p: 0.1, lambda_q: lq, sigma_q: sq, phi_q: 0.2 }
    }

    #[test]
    fn spectral_examples() {
        let a = check_spectral(&sp(0.04, 2.0, 0.5, 2.0));
        assert!(a.ok && (a.eta - 1.0).abs() < 1e-15 && (a.value - 0.8).abs() < 1e-14);
        let b = check_spectral(&sp(0.04, 2.0, 0.4, 3.0));
        assert!(b.ok && (b.eta - 1.321928).abs() < 1e-6 && (b.value - 0.8935).abs() < 1e-4);
        let c = check_spectral(&sp(0.04, 2.0, 0.5, 3.0));
        assert!(!c.ok && (c.value - 1.2).abs() < 1e-14);
    }

    #[test]
    fn sigma_interval_examples() {
        let (lo, hi) = sigma_interval(0.04, 2.0, 0.5).unwrap();
        assert_eq!(lo, 1.0);
        assert!((hi - 2.5).abs() < 1e-12);
        assert!(matches!(sigma_interval(0.25, 2.0, 0.3), Err(Error::NotInZTilde { .. })));
        assert!((sigma_interval(0.04, 2.0, 0.25).unwrap().1 - 6.25).abs() < 1e-12);
    }

    #[test]
    fn tau_examples() {
        let mut cfg = ModelConfig::worked();
        assert!((tau_of(&cfg) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        cfg.pq.a3 = 2.0;
        assert!((tau_of(&cfg) - std::f64::consts::SQRT_2).abs() < 1e-15);
        cfg.qp.gamma3 = -1.0;
        cfg.pq.a2 = 1.0;
        cfg.pq.a3 = 0.0;
        assert!((tau_of(&cfg) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn find_sojourn_reference_pair() {
        let p = find_sojourn(2.0, 0.4, 1.0, 1.185, 0.01, 10, 100).unwrap();
        assert_eq!((p.m, p.n), (28, 21));
        assert!((p.product - 1.18059).abs() < 1e-5);
        let eta = 2.5f64.ln() / 2f64.ln();
        let eta_t = 1.185f64.ln() / 2f64.ln();
        assert!((p.slack - (28.0 - 21.0 * eta - eta_t).abs()).abs() < 1e-12);
        assert!(p.slack < 1.0);
    }

    #[test]
    fn resonant_pair_reports_diagnostic() {
        match find_sojourn(2.0, 0.5, 1.0, 1.185, 0.01, 0, 100) {
            Err(Error::NotFound { diagnostic: Some(d), .. }) => assert!(d.contains("resonance")),
            other => panic!("expected resonance failure, got {other:?}"),
        }
        assert_eq!(resonance(2.5f64.ln() / 2f64.ln()), None);
    }

    #[test]
    fn schedule_examples() {
        assert!(build_schedule(2.0, 0.4, 1.0, 1.185, 0, 0.02).unwrap().is_empty());
        let s = build_schedule(2.0, 0.4, 1.0, 1.185, 3, 0.02).unwrap();
        assert_eq!(s.len(), 3);
        for (k, p) in s.pairs.iter().enumerate() {
            assert!((p.product - 1.185).abs() < 0.02 / 2f64.powi(k as i32));
        }
        for w in s.pairs.windows(2) {
            assert!(w[1].m > w[0].m && w[1].n > w[0].n);
        }
    }

    #[test]
    fn worked_schedule_has_shrinking_gaps() {
        let cfg = ModelConfig::worked();
        let s = schedule_for(&cfg, 1.185).unwrap();
        let ns: Vec<u64> = s.pairs.iter().map(|p| p.n).collect();
        assert_eq!(ns, vec![10, 14, 16, 17]);
        let tau = tau_of(&cfg);
        let gaps: Vec<f64> = s.pairs.iter().map(|p| (tau * p.product - 1.185).abs()).collect();
        assert!(gaps.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn adapted_argument_examples() {
        let (a, b) = adapted_arguments(37u64, 23u64, 0.1137, 0.2871, 0.0, 0.0);
        let ct = (2.0 * std::f64::consts::PI * 37.0 * (0.1137 + a)).cos();
        let s = (2.0 * std::f64::consts::PI * 23.0 * (0.2871 + b)).sin();
        assert!((ct - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((s - 1.0).abs() < 1e-12);
        let (a, _) = adapted_arguments(1000u64, 1u64, 0.1137, 0.0, 0.0, 0.0);
        assert!(a.abs() < 0.0012);
    }

    #[test]
    fn trig_examples() {
        let t = trig_from_offsets(0.0, 0.0);
        assert!((t.ct - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((t.st - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(t.c.abs() < 1e-15 && (t.s - 1.0).abs() < 1e-15);
        let t = trig_from_offsets(0.0, std::f64::consts::FRAC_PI_2);
        assert!((t.c + 1.0).abs() < 1e-15 && t.s.abs() < 1e-15);
        let t = trig_from_offsets(-std::f64::consts::FRAC_PI_4, 0.0);
        assert!((t.ct - 1.0).abs() < 1e-15 && t.st.abs() < 1e-15);
    }

    #[test]
    fn trig_paths_agree_in_extended_precision() {
        type D = DoubleDouble;
        let (zeta, vt) = (D::from_f64(1e-3), D::from_f64(-2e-3));
        let (m, n) = (61u64, 47u64);
        let (th, om) = (D::from_f64(0.1137), D::from_f64(0.2871));
        let (a, b) = adapted_arguments(m, n, th, om, zeta, vt);
        let t1 = trig_sequences(m, n, th + a, om + b);
        let t2 = trig_from_offsets(zeta, vt);
        for (u, v) in [(t1.ct, t2.ct), (t1.st, t2.st), (t1.c, t2.c), (t1.s, t2.s)] {
            assert!((u - v).abs().to_f64() < 1e-28);
        }
    }

    #[test]
    fn rho_tilde_examples() {
        let mut qp = ModelConfig::worked().qp;
        assert_eq!(rho_tilde(&qp, 0.3, 0.7), (0.0, 0.0));
        qp.hqp.0[1][0][0] = 2.0;
        assert_eq!(rho_tilde(&qp, 0.0, 1.0).0, 1.0);
        for i in 1..3 {
            qp.hqp.0[i][0][0] = 1.0;
            qp.hqp.0[i][2][2] = 1.0;
        }
        let (r2, r3) = rho_tilde(&qp, 0.0, 1.0);
        assert!((r2 - 1.0).abs() < 1e-15 && (r3 - 1.0).abs() < 1e-15);
    }
}
