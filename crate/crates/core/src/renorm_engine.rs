//! The renormalization operator: rescaling charts Ψ_k, bifurcation parameters,
//! the return map evaluated by direct chart composition and by the exact
//! closed-form algebra, and convergence measurement against E.
//!
//! All power products `σ_P^a σ_Q^b λ_P^c λ_Q^d` are evaluated as a single
//! `exp(Σ e·ln b)` so that huge and tiny factors never meet separately.

use crate::blender_cert::sigma_vector;
use crate::cycle_model::{ChartRegion, ModelConfig, UnfoldedMap, UnfoldingParams};
use crate::error::{Error, Result};
use crate::henon_limit::{eval_e, jacobian_e, EParams};
use crate::scalar::{DoubleDouble, Precision, Real};
use crate::sojourn_search::{adapted_arguments, rho_tilde, tau_of, trig_from_offsets, SojournPair, SojournSchedule, Trig};
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};

/// Significand bits that must survive the rescaling for a record to count as
/// numerically trustworthy (about ten decimal digits).
pub const REQUIRED_BITS: f64 = 40.0;

fn pp<T: Real>(factors: &[(f64, i64)]) -> T {
    T::pow_product(factors)
}

fn scales<T: Real>(cfg: &ModelConfig, pair: &SojournPair) -> (T, T) {
    let (m, n) = (pair.m as i64, pair.n as i64);
    let s = pp::<T>(&[(cfg.spectrum.sigma_p, -m), (cfg.spectrum.sigma_q, -n)]);
    let q = pp::<T>(&[(cfg.spectrum.sigma_q, -n)]);
    (s, q)
}

/// `Ψ(x,y,z) = (1 + Sx, σ_Q^{−n} + S²y, 1 + Sz)` with `S = σ_P^{−m}σ_Q^{−n}`.
pub fn psi<T: Real>(cfg: &ModelConfig, pair: &SojournPair, v: Vec3<T>) -> Vec3<T> {
    let (s, q) = scales::<T>(cfg, pair);
    let (m, n) = (pair.m as i64, pair.n as i64);
    let s2 = pp::<T>(&[(cfg.spectrum.sigma_p, -2 * m), (cfg.spectrum.sigma_q, -2 * n)]);
    Vec3::new(T::one() + s * v.x, q + s2 * v.y, T::one() + s * v.z)
}

/// Exact affine inverse of [`psi`].
pub fn psi_inv<T: Real>(cfg: &ModelConfig, pair: &SojournPair, v: Vec3<T>) -> Vec3<T> {
    let (m, n) = (pair.m as i64, pair.n as i64);
    let q = pp::<T>(&[(cfg.spectrum.sigma_q, -n)]);
    let si = pp::<T>(&[(cfg.spectrum.sigma_p, m), (cfg.spectrum.sigma_q, n)]);
    let si2 = pp::<T>(&[(cfg.spectrum.sigma_p, 2 * m), (cfg.spectrum.sigma_q, 2 * n)]);
    Vec3::new((v.x - T::one()) * si, (v.y - q) * si2, (v.z - T::one()) * si)
}

/// `μ̄_k(μ) = (−λ_P^m a₁, σ_Q^{−n} + σ_Q^{−2n}σ_P^{−2m}μ − λ_P^m b₁, −λ_P^m c₁)`.
pub fn mu_bar_k<T: Real>(cfg: &ModelConfig, pair: &SojournPair, mu: T) -> Vec3<T> {
    let sp = &cfg.spectrum;
    let (m, n) = (pair.m as i64, pair.n as i64);
    let lpm = pp::<T>(&[(sp.lambda_p, m)]);
    let q = pp::<T>(&[(sp.sigma_q, -n)]);
    let s2 = pp::<T>(&[(sp.sigma_q, -2 * n), (sp.sigma_p, -2 * m)]);
    let c = |a: f64| T::from_f64(a);
    Vec3::new(-lpm * c(cfg.pq.a1), q + s2 * mu - lpm * c(cfg.pq.b1), -lpm * c(cfg.pq.c1))
}

/// Translation parameter at X̃ cancelling the constant parts of the
/// QP transition image, given the trigonometric sequences and `(ρ̃₂, ρ̃₃)`.
pub fn nu_bar_k<T: Real>(cfg: &ModelConfig, pair: &SojournPair, trig: &Trig<T>, rho_t: (T, T)) -> Vec3<T> {
    let sp = &cfg.spectrum;
    let (m, n) = (pair.m as i64, pair.n as i64);
    let lqn = pp::<T>(&[(sp.lambda_q, n)]);
    let lq2n = pp::<T>(&[(sp.lambda_q, 2 * n)]);
    let spm = pp::<T>(&[(sp.sigma_p, -m)]);
    let c = |a: f64| T::from_f64(a);
    let qp = &cfg.qp;
    let Trig { ct, st, c: cq, s: sq } = *trig;
    Vec3::new(
        -lqn * (c(qp.alpha1) * (cq - sq) + c(qp.alpha3) * (sq + cq)),
        spm * (ct + st) - lq2n * rho_t.0,
        spm * (ct - st) - lqn * c(qp.gamma3) * (cq + sq) - lq2n * rho_t.1,
    )
}

/// The bifurcation data attached to one schedule entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenormParams<T = f64> {
    pub k: usize,
    pub pair: SojournPair,
    pub mu: T,
    pub zeta: T,
    pub vartheta: T,
    pub mu_bar: Vec3<T>,
    pub nu_bar: Vec3<T>,
    pub alpha: T,
    pub beta: T,
    pub trig: Trig<T>,
    pub rho_t: (T, T),
}

impl<T: Real> RenormParams<T> {
    /// Parameters for entry `k` of `schedule` with free parameter `μ`, using
    /// the adapted arguments for the configured rotation numbers.
    pub fn new(cfg: &ModelConfig, schedule: &SojournSchedule, k: usize, mu: f64) -> Result<Self> {
        let pair = *schedule
            .pairs
            .get(k)
            .ok_or_else(|| Error::InvalidArgument(format!("schedule has no entry k = {k}")))?;
        let off = schedule.offsets[k];
        Self::from_pair(cfg, k, pair, mu, off.zeta, off.vartheta)
    }

    pub fn from_pair(cfg: &ModelConfig, k: usize, pair: SojournPair, mu: f64, zeta: f64, vartheta: f64) -> Result<Self> {
        if pair.m == 0 || pair.n == 0 {
            return Err(Error::InvalidArgument("sojourn times must be positive".into()));
        }
        let sp = &cfg.spectrum;
        let (m, n) = (pair.m as i64, pair.n as i64);
        for (what, f) in [
            ("sigma_P^2m sigma_Q^2n", [(sp.sigma_p, 2 * m), (sp.sigma_q, 2 * n)]),
            ("lambda_P^m lambda_Q^2n", [(sp.lambda_p, m), (sp.lambda_q, 2 * n)]),
        ] {
            let v = f64::pow_product(&f);
            if !v.is_finite() || v == 0.0 {
                return Err(Error::Overflow { k, what: what.into() });
            }
        }
        let (zeta, vartheta) = (T::from_f64(zeta), T::from_f64(vartheta));
        let (alpha, beta) = adapted_arguments(
            pair.m,
            pair.n,
            T::from_f64(sp.phi_p),
            T::from_f64(sp.phi_q),
            zeta,
            vartheta,
        );
        let trig = trig_from_offsets(zeta, vartheta);
        let rho_t = rho_tilde(&cfg.qp, trig.c, trig.s);
        let mu = T::from_f64(mu);
        Ok(RenormParams {
            k,
            pair,
            mu,
            zeta,
            vartheta,
            mu_bar: mu_bar_k(cfg, &pair, mu),
            nu_bar: nu_bar_k(cfg, &pair, &trig, rho_t),
            alpha,
            beta,
            trig,
            rho_t,
        })
    }

    /// Recomputes `μ̄` and `ν̄` from the remaining fields.
    pub fn check(&self, cfg: &ModelConfig) -> Result<()> {
        let mb = mu_bar_k(cfg, &self.pair, self.mu);
        let nb = nu_bar_k(cfg, &self.pair, &self.trig, self.rho_t);
        if mb != self.mu_bar || nb != self.nu_bar {
            return Err(Error::InvalidArgument(format!(
                "bifurcation parameters at k = {} do not match their defining formulas",
                self.k
            )));
        }
        Ok(())
    }

    pub fn unfolding(&self) -> UnfoldingParams<T> {
        UnfoldingParams { mu_bar: self.mu_bar, nu_bar: self.nu_bar, alpha: self.alpha, beta: self.beta }
    }
}

/// Renormalized return map by composing the perturbed chart maps:
/// `Ψ⁻¹ ∘ PQ_μ̄ ∘ P_α^m ∘ QP_ν̄ ∘ Q_β^n ∘ Ψ`.
pub fn renorm_direct<T: Real>(cfg: &ModelConfig, rp: &RenormParams<T>, v: Vec3<T>) -> Result<Vec3<T>> {
    let map = UnfoldedMap::new(cfg, rp.unfolding());
    renorm_direct_with(cfg, &map, &rp.pair, v)
}

fn renorm_direct_with<T: Real>(cfg: &ModelConfig, map: &UnfoldedMap<T>, pair: &SojournPair, v: Vec3<T>) -> Result<Vec3<T>> {
    let mut w = psi(cfg, pair, v);
    for _ in 0..pair.n {
        w = map.apply(ChartRegion::QLocal, w)?;
    }
    w = map.apply(ChartRegion::QpTransition, w)?;
    for _ in 0..pair.m {
        w = map.apply(ChartRegion::PLocal, w)?;
    }
    w = map.apply(ChartRegion::PqTransition, w)?;
    Ok(psi_inv(cfg, pair, w))
}

/// Closed-form return map together with its three rescaled higher-order
/// groups.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm<T> {
    pub value: Vec3<T>,
    /// `(σ_P^mσ_Q^n h.o.t.*, σ_P^{2m}σ_Q^{2n} h.o.t.**, σ_P^mσ_Q^n h.o.t.***)`
    pub hot: Vec3<T>,
}

/// Power products and coefficients that do not depend on the point.
struct ClosedCoeffs<T> {
    s: T,
    s_inv: T,
    s_inv2: T,
    lqs: T,
    lqn: T,
    lq2n: T,
    yk: T,
    lpm: T,
    spm: T,
    sp2m: T,
    l: T,
    p1: T,
    p2: T,
    p3: T,
    p3sq: T,
    b1y: T,
    b1x: T,
}

impl<T: Real> ClosedCoeffs<T> {
    fn new(cfg: &ModelConfig, pair: &SojournPair) -> Self {
        let sp = &cfg.spectrum;
        let (m, n) = (pair.m as i64, pair.n as i64);
        let (sgp, sgq, lp, lq) = (sp.sigma_p, sp.sigma_q, sp.lambda_p, sp.lambda_q);
        ClosedCoeffs {
            s: pp(&[(sgp, -m), (sgq, -n)]),
            s_inv: pp(&[(sgp, m), (sgq, n)]),
            s_inv2: pp(&[(sgp, 2 * m), (sgq, 2 * n)]),
            lqs: pp(&[(lq, n), (sgp, -m), (sgq, -n)]),
            lqn: pp(&[(lq, n)]),
            lq2n: pp(&[(lq, 2 * n)]),
            yk: pp(&[(sgp, -2 * m), (sgq, -n)]),
            lpm: pp(&[(lp, m)]),
            spm: pp(&[(sgp, m)]),
            sp2m: pp(&[(sgp, 2 * m)]),
            l: pp(&[(lq, n), (sgq, -n)]),
            p1: pp(&[(lp, m), (lq, n)]),
            p2: pp(&[(lp, m), (sgp, -m)]),
            p3: pp(&[(sgp, m), (lq, n)]),
            p3sq: pp(&[(sgp, 2 * m), (lq, 2 * n)]),
            b1y: pp(&[(lp, m), (sgq, n)]),
            b1x: pp(&[(lp, m), (sgp, m), (lq, n), (sgq, n)]),
        }
    }
}

/// Renormalized return map from the exact Step A to D algebra, written as
/// leading terms plus the rescaled higher-order groups.
pub fn renorm_closed_form<T: Real>(cfg: &ModelConfig, rp: &RenormParams<T>, v: Vec3<T>) -> ClosedForm<T> {
    closed_form_with(cfg, rp, &ClosedCoeffs::new(cfg, &rp.pair), v)
}

fn closed_form_with<T: Real>(cfg: &ModelConfig, rp: &RenormParams<T>, k: &ClosedCoeffs<T>, v: Vec3<T>) -> ClosedForm<T> {
    let c = |a: f64| T::from_f64(a);
    let (qp, pq) = (&cfg.qp, &cfg.pq);
    let Trig { ct, st, c: cq, s: sq } = rp.trig;
    let (x, y, z) = (v.x, v.y, v.z);
    let u = cq * x - sq * z;
    let w = sq * x + cq * z;

    // Step A: offsets from X after n iterates near Q.
    let xk = Vec3::new(k.lqs * u + k.lqn * (cq - sq), k.yk * y, k.lqs * w + k.lqn * (cq + sq));
    // Step B: offsets from X̃ after the QP transition.
    let ht = qp.hqp.eval_all(xk);
    let x_t = c(qp.alpha1) * k.lqs * u + c(qp.alpha2) * xk.y + c(qp.alpha3) * k.lqs * w + ht.x;
    let h2 = ht.y - k.lq2n * rp.rho_t.0;
    let h3 = ht.z - k.lq2n * rp.rho_t.1;
    // Step C: offsets from Y after m iterates near P.
    let (b2, g3) = (c(qp.beta2), c(qp.gamma3));
    let a = k.s * ct * b2 * y - k.l * st * g3 * w;
    let b = k.s * st * b2 * y + k.l * ct * g3 * w;
    let r2 = ct * h2 - st * h3;
    let r3 = st * h2 + ct * h3;
    let hat = Vec3::new(k.lpm * (T::one() + x_t), a + k.spm * r2, b + k.spm * r3);
    let hh = pq.hpq.eval_all(hat);

    // Step D followed by Ψ⁻¹.
    let lin = c(qp.alpha1) * u + c(qp.alpha3) * w;
    let hot1 = c(pq.a1) * k.lpm * ht.x + c(pq.a2) * k.spm * r2 + c(pq.a3) * k.spm * r3 + hh.x;
    let xb = c(pq.a1) * k.p1 * lin
        + c(pq.a1) * k.p2 * c(qp.alpha2) * y
        + (ct * c(pq.a2) + st * c(pq.a3)) * b2 * y
        + k.p3 * g3 * (ct * c(pq.a3) - st * c(pq.a2)) * w
        + k.s_inv * hot1;

    let (pb2, pb3, pb4) = (c(pq.b2), c(pq.b3), c(pq.b4));
    let hot2 = c(pq.b1) * k.lpm * ht.x
        + pb2 * (k.sp2m * r2 * r2 + T::from_f64(2.0) * k.spm * r2 * a)
        + pb3 * (k.sp2m * r3 * r3 + T::from_f64(2.0) * k.spm * r3 * b)
        + pb4 * (k.sp2m * r2 * r3 + k.spm * r2 * b + k.spm * r3 * a)
        + hh.y;
    let yb = rp.mu
        + c(pq.b1) * k.b1y * c(qp.alpha2) * y
        + c(pq.b1) * k.b1x * lin
        + (ct * ct * pb2 + st * st * pb3 + ct * st * pb4) * b2 * b2 * y * y
        + k.p3sq * (st * st * pb2 + ct * ct * pb3 - ct * st * pb4) * g3 * g3 * w * w
        + k.p3 * (T::from_f64(2.0) * ct * st * (pb3 - pb2) + (ct * ct - st * st) * pb4) * b2 * g3 * w * y
        + k.s_inv2 * hot2;

    let (c2, c3) = (c(pq.c2), c(pq.c3()));
    let hot3 = c(pq.c1) * k.lpm * ht.x + c2 * k.spm * r2 + c3 * k.spm * r3 + hh.z;
    let zb = c(pq.c1) * k.p1 * lin
        + c(pq.c1) * k.p2 * c(qp.alpha2) * y
        + (ct * c2 + st * c3) * b2 * y
        + k.p3 * g3 * (ct * c3 - st * c2) * w
        + k.s_inv * hot3;

    ClosedForm {
        value: Vec3::new(xb, yb, zb),
        hot: Vec3::new(k.s_inv * hot1, k.s_inv2 * hot2, k.s_inv * hot3),
    }
}

/// The limit endomorphism `E_(ξ, μ, ς̄(ξ, cfg))`.
pub fn limit_map(cfg: &ModelConfig, xi: f64, mu: f64) -> Result<EParams> {
    EParams::new(xi, mu, sigma_vector(cfg, xi))
}

/// Bits of significand consumed by the rescaling `Ψ⁻¹` at `(m, n)`.
pub fn bits_lost(cfg: &ModelConfig, pair: &SojournPair) -> f64 {
    2.0 * (pair.m as f64 * cfg.spectrum.sigma_p.log2() + pair.n as f64 * cfg.spectrum.sigma_q.log2())
}

/// Convergence diagnostics for one schedule entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenormRecord {
    pub k: usize,
    #[serde(rename = "m_k")]
    pub m: u64,
    #[serde(rename = "n_k")]
    pub n: u64,
    pub sup_c0_error: f64,
    pub sup_c1_error: f64,
    pub cross_check_error: f64,
    /// `|σ_P^m λ_Q^n − τ⁻¹ξ|`
    pub prod_target_gap: f64,
    /// `λ_P^m σ_P^{2m} σ_Q^{2n}`
    pub lp_s2m_s2n: f64,
    pub hot1: f64,
    pub hot2: f64,
    pub hot3: f64,
    pub bits_lost: f64,
    /// Whether at least [`REQUIRED_BITS`] survive the rescaling.
    pub precision_ok: bool,
}

/// CSV column names of [`RenormRecord`], in serialization order.
pub const REPORT_COLUMNS: [&str; 13] = [
    "k",
    "m_k",
    "n_k",
    "sup_c0_error",
    "sup_c1_error",
    "cross_check_error",
    "prod_target_gap",
    "lp_s2m_s2n",
    "hot1",
    "hot2",
    "hot3",
    "bits_lost",
    "precision_ok",
];

/// Leading schedule entry whose composition left the charts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedEntry {
    pub k: usize,
    pub m: u64,
    pub n: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenormReport {
    pub xi: f64,
    pub mu: f64,
    pub precision: Precision,
    pub grid_points: usize,
    pub fd_step: f64,
    pub records: Vec<RenormRecord>,
    pub skipped: Vec<SkippedEntry>,
}

impl RenormReport {
    pub fn first_admissible_k(&self) -> Option<usize> {
        self.records.first().map(|r| r.k)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Sups {
    c0: f64,
    c1: f64,
    cross: f64,
    hot: [f64; 3],
}

impl Sups {
    fn merge(self, o: Sups) -> Sups {
        Sups {
            c0: self.c0.max(o.c0),
            c1: self.c1.max(o.c1),
            cross: self.cross.max(o.cross),
            hot: [self.hot[0].max(o.hot[0]), self.hot[1].max(o.hot[1]), self.hot[2].max(o.hot[2])],
        }
    }
}

fn fd_jacobian<T: Real>(f: &impl Fn(Vec3<T>) -> Vec3<T>, p: Vec3<T>, h: f64) -> [[f64; 3]; 3] {
    let mut jac = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut e = [T::zero(); 3];
        let central = |h: f64, e: &mut [T; 3]| {
            e[j] = T::from_f64(h);
            let d = Vec3::from_array(*e);
            (f(p + d) - f(p - d)).scale(T::one() / T::from_f64(2.0 * h))
        };
        let d1 = central(h, &mut e);
        let d2 = central(h / 2.0, &mut e);
        let r = (d2.scale(T::from_f64(4.0)) - d1).scale(T::one() / T::from_f64(3.0));
        for (i, v) in r.to_f64().to_array().into_iter().enumerate() {
            jac[i][j] = v;
        }
    }
    jac
}

fn worker_count(len: usize) -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).clamp(1, 16).min(len.max(1))
}

/// Evaluates every grid point, returning the first failing point in grid
/// order if the direct composition breaks anywhere.
fn grid_sups<T: Real>(
    cfg: &ModelConfig,
    rp: &RenormParams<T>,
    e: &EParams,
    grid: &[Vec3],
    fd_step: f64,
) -> std::result::Result<Sups, (Vec3, Error)> {
    let map = UnfoldedMap::new(cfg, rp.unfolding());
    let coeffs = ClosedCoeffs::new(cfg, &rp.pair);
    let eval = |p: Vec3| -> std::result::Result<Sups, (Vec3, Error)> {
        let pt = Vec3::<T>::from_f64(p);
        let direct = renorm_direct_with(cfg, &map, &rp.pair, pt).map_err(|err| (p, err))?;
        let cf = closed_form_with(cfg, rp, &coeffs, pt);
        let closed = cf.value.to_f64();
        let limit = eval_e(e, p);
        let scale = closed.norm_inf().max(f64::MIN_POSITIVE);
        let cross = (direct - cf.value).to_f64().norm_inf() / scale;
        let jac = fd_jacobian(&|q| closed_form_with(cfg, rp, &coeffs, q).value, pt, fd_step);
        let jl = jacobian_e(e, p);
        let c1 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| (jac[i][j] - jl[i][j]).abs())
            .fold(0.0, f64::max);
        let hot = cf.hot.to_f64();
        Ok(Sups {
            c0: (closed - limit).norm_inf(),
            c1,
            cross,
            hot: [hot.x.abs(), hot.y.abs(), hot.z.abs()],
        })
    };
    let workers = worker_count(grid.len());
    let chunk = grid.len().div_ceil(workers).max(1);
    let parts: Vec<std::result::Result<Sups, (Vec3, Error)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = grid
            .chunks(chunk)
            .map(|pts| {
                let eval = &eval;
                scope.spawn(move || pts.iter().try_fold(Sups::default(), |acc, &p| Ok(acc.merge(eval(p)?))))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("grid worker panicked")).collect()
    });
    parts.into_iter().try_fold(Sups::default(), |acc, r| Ok(acc.merge(r?)))
}

fn convergence_report_in<T: Real>(
    cfg: &ModelConfig,
    schedule: &SojournSchedule,
    xi: f64,
    mu: f64,
    grid: &[Vec3],
    fd_step: f64,
    precision: Precision,
) -> Result<RenormReport> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("convergence report needs a nonempty schedule".into()));
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("convergence report needs a nonempty grid".into()));
    }
    if !(fd_step > 0.0) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {fd_step}")));
    }
    let e = limit_map(cfg, xi, mu)?;
    let target = xi / tau_of(cfg);
    let sp = &cfg.spectrum;
    let mut report = RenormReport {
        xi,
        mu,
        precision,
        grid_points: grid.len(),
        fd_step,
        records: Vec::new(),
        skipped: Vec::new(),
    };
    for (k, pair) in schedule.pairs.iter().enumerate() {
        let rp = RenormParams::<T>::new(cfg, schedule, k, mu)?;
        rp.check(cfg)?;
        let sups = match grid_sups(cfg, &rp, &e, grid, fd_step) {
            Ok(s) => s,
            Err((point, err)) => {
                if report.records.is_empty() {
                    report.skipped.push(SkippedEntry { k, m: pair.m, n: pair.n, reason: err.to_string() });
                    continue;
                }
                return Err(Error::Composition { k, point, source: Box::new(err) });
            }
        };
        let (m, n) = (pair.m as i64, pair.n as i64);
        let prod = DoubleDouble::pow_product(&[(sp.sigma_p, m), (sp.lambda_q, n)]);
        let lost = bits_lost(cfg, pair);
        report.records.push(RenormRecord {
            k,
            m: pair.m,
            n: pair.n,
            sup_c0_error: sups.c0,
            sup_c1_error: sups.c1,
            cross_check_error: sups.cross,
            prod_target_gap: (prod - DoubleDouble::from_f64(target)).abs().to_f64(),
            lp_s2m_s2n: f64::pow_product(&[(sp.lambda_p, m), (sp.sigma_p, 2 * m), (sp.sigma_q, 2 * n)]),
            hot1: sups.hot[0],
            hot2: sups.hot[1],
            hot3: sups.hot[2],
            bits_lost: lost,
            precision_ok: T::MANTISSA_BITS as f64 - lost >= REQUIRED_BITS,
        });
    }
    Ok(report)
}

/// Convergence diagnostics along `schedule` at the configured precision.
///
/// Leading entries whose direct composition leaves the charts are skipped and
/// listed in the report; a failure after the first admissible entry raises
/// [`Error::Composition`] with the entry index and grid point.
pub fn convergence_report(
    cfg: &ModelConfig,
    schedule: &SojournSchedule,
    xi: f64,
    mu: f64,
    grid: &[Vec3],
    fd_step: f64,
) -> Result<RenormReport> {
    match cfg.precision {
        Precision::Native => convergence_report_in::<f64>(cfg, schedule, xi, mu, grid, fd_step, cfg.precision),
        Precision::Extended => {
            convergence_report_in::<DoubleDouble>(cfg, schedule, xi, mu, grid, fd_step, cfg.precision)
        }
    }
}
