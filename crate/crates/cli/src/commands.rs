use crate::args::{CertifyArgs, Command, Family, OrbitArgs, RenormArgs, SearchArgs};
use crate::artifacts::{manifest_beside, now_ms, report_svg, write_report_csv, RunManifest};
use hetren_core::blender_cert::certify_scheme;
use hetren_core::cycle_model::{check_quasi_transverse, check_tangency, ModelConfig, FD_STEP, FD_TOLERANCE};
use hetren_core::henon_limit::{iterate_endomorphism, EParams, HenonParams, LimitMap, SigmaVector};
use hetren_core::renorm_engine::convergence_report;
use hetren_core::sojourn_search::{
    build_schedule_with, check_spectral, schedule_for, tau_of, ScheduleRow, SojournSchedule,
};
use hetren_core::vec3::cube_grid;
use hetren_core::{Error, Precision, Vec3};
use std::fmt::Display;
use std::path::Path;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_SEARCH: u8 = 3;
pub const EXIT_COMPOSITION: u8 = 4;

/// A message together with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn config(m: impl Display) -> Self {
        Failure { code: EXIT_CONFIG, message: m.to_string() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArgument(_) | Error::InvalidConfig { .. } => EXIT_CONFIG,
            Error::NotFound { .. } => EXIT_SEARCH,
            Error::Composition { .. }
            | Error::Overflow { .. }
            | Error::OutOfNeighbourhood { .. }
            | Error::DomainEscape { .. }
            | Error::PlateauViolation { .. } => EXIT_COMPOSITION,
            Error::DegenerateSigma(_)
            | Error::DegenerateModel(_)
            | Error::NotInZTilde { .. }
            | Error::InfeasibleTargets(_) => EXIT_FAILED,
        };
        Failure { code, message: e.to_string() }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::config(format!("{}: {e}", path.display()))
}

type Outcome = Result<u8, Failure>;

pub fn load_config(path: &Path) -> Result<ModelConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    ModelConfig::from_json(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn load_valid(path: &Path) -> Result<ModelConfig, Failure> {
    let cfg = load_config(path)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Flag, then `HETREN_PRECISION`, then the config's own setting.
fn resolve_precision(flag: Option<Precision>, cfg: &ModelConfig) -> Precision {
    flag.or_else(|| std::env::var("HETREN_PRECISION").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(cfg.precision)
}

fn grid_of(per_axis: usize) -> Result<Vec<Vec3>, Failure> {
    if per_axis == 0 {
        return Err(Failure::config("--grid must be at least 1"));
    }
    Ok(cube_grid(per_axis, 1.0))
}

pub fn run(cmd: Command) -> Outcome {
    let started = now_ms();
    match cmd {
        Command::CheckModel { config } => check_model(&config),
        Command::SearchSojourn(a) => search_sojourn(a, started),
        Command::Renormalize(a) => renormalize(a, started),
        Command::Certify(a) => certify(a, started),
        Command::Orbit(a) => orbit(a, started),
        Command::Replay { manifest } => {
            let text = std::fs::read_to_string(&manifest).map_err(io_err(&manifest))?;
            let m: RunManifest = serde_json::from_str(&text)
                .map_err(|e| Failure::config(format!("{}: {e}", manifest.display())))?;
            if matches!(m.parameters, Command::Replay { .. }) {
                return Err(Failure::config("a manifest cannot replay another replay"));
            }
            run(m.parameters)
        }
    }
}

fn check_model(path: &Path) -> Outcome {
    let cfg = load_config(path)?;
    let mut all = true;
    let mut line = |ok: bool, tag: &str, what: &str, detail: &str| {
        all &= ok;
        let verdict = if ok { "PASS" } else { "FAIL" };
        if detail.is_empty() {
            println!("{verdict} [{tag}] {what}");
        } else {
            println!("{verdict} [{tag}] {what}: {detail}");
        }
    };
    for c in cfg.invariant_checks() {
        line(c.passed, c.tag, c.description, &c.detail);
    }
    let sp = check_spectral(&cfg.spectrum);
    line(
        sp.ok,
        "spectral",
        "(lambda_P^(1/2) sigma_P)^eta sigma_Q < 1",
        &format!("eta = {:.6}, value = {:.6}", sp.eta, sp.value),
    );
    let fd = |r: hetren_core::Result<_>| match r {
        Ok(rep) => {
            let rep: hetren_core::cycle_model::TransversalityReport = rep;
            let worst = rep.images.iter().map(|i| i.max_error).fold(0.0, f64::max);
            (true, format!("max finite-difference error {worst:.2e}"))
        }
        Err(e) => (false, e.to_string()),
    };
    let (ok, d) = fd(check_quasi_transverse(&cfg, FD_STEP, FD_TOLERANCE));
    line(ok, "quasi-transverse", "DT_QP(X) maps (0,1,0) to (alpha2, beta2, 0)", &d);
    let (ok, d) = fd(check_tangency(&cfg, FD_STEP, FD_TOLERANCE));
    line(ok, "tangency", "DT_PQ(Y) images of (0,1,0) and (0,0,1) have zero y", &d);
    Ok(if all { EXIT_OK } else { EXIT_FAILED })
}

fn print_schedule(rows: &[ScheduleRow], tau: f64, xi: f64) {
    println!("{:>3} {:>6} {:>6} {:>20} {:>12} {:>12}", "k", "m", "n", "product", "gap", "slack");
    for (k, r) in rows.iter().enumerate() {
        let gap = (tau * r.product - xi).abs();
        println!("{k:>3} {:>6} {:>6} {:>20.15} {:>12.4e} {:>12.6}", r.m, r.n, r.product, gap, r.slack);
    }
}

fn search_sojourn(a: SearchArgs, started: u128) -> Outcome {
    let cfg = load_valid(&a.config)?;
    let mut s = cfg.schedule;
    s.eps0 = a.eps.unwrap_or(s.eps0);
    s.count = a.count.unwrap_or(s.count);
    s.n_max = a.n_max.unwrap_or(s.n_max);
    let sp = &cfg.spectrum;
    let sched = build_schedule_with(sp.sigma_p, sp.lambda_q, tau_of(&cfg), a.xi, s.count, s.eps0, s.n0, s.n_max, s.offsets)?;
    let rows = sched.rows();
    print_schedule(&rows, tau_of(&cfg), a.xi);
    if let Some(out) = &a.out {
        std::fs::write(out, sched.to_json() + "\n").map_err(io_err(out))?;
        let resolved = SearchArgs { eps: Some(s.eps0), count: Some(s.count), n_max: Some(s.n_max), ..a.clone() };
        let mut m = RunManifest::new(&Command::SearchSojourn(resolved), started);
        m.outputs.push(out.clone());
        let mp = manifest_beside(out);
        m.write(&mp).map_err(io_err(&mp))?;
    }
    Ok(EXIT_OK)
}

fn load_schedule(path: &Path, target: f64) -> Result<SojournSchedule, Failure> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let rows: Vec<ScheduleRow> =
        serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    Ok(SojournSchedule::from_rows(&rows, target))
}

fn renormalize(a: RenormArgs, started: u128) -> Outcome {
    let mut cfg = load_valid(&a.config)?;
    cfg.precision = resolve_precision(a.precision, &cfg);
    let grid = grid_of(a.grid)?;
    let sched = match &a.schedule {
        Some(p) => load_schedule(p, a.xi / tau_of(&cfg))?,
        None => schedule_for(&cfg, a.xi)?,
    };
    let report = convergence_report(&cfg, &sched, a.xi, a.mu, &grid, a.fd_step)?;

    std::fs::create_dir_all(&a.out_dir).map_err(io_err(&a.out_dir))?;
    let csv_path = a.out_dir.join("report.csv");
    let json_path = a.out_dir.join("report.json");
    let svg_path = a.out_dir.join("report.svg");
    let sched_path = a.out_dir.join("schedule.json");
    write_report_csv(&csv_path, &report.records).map_err(|e| Failure::config(format!("{}: {e}", csv_path.display())))?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    std::fs::write(&json_path, json).map_err(io_err(&json_path))?;
    std::fs::write(&svg_path, report_svg(&report.records)).map_err(io_err(&svg_path))?;
    std::fs::write(&sched_path, sched.to_json() + "\n").map_err(io_err(&sched_path))?;

    println!(
        "{:>3} {:>5} {:>5} {:>12} {:>12} {:>12} {:>12} {:>9}",
        "k", "m_k", "n_k", "sup_c0", "sup_c1", "cross", "lp_s2m_s2n", "precision"
    );
    for r in &report.records {
        println!(
            "{:>3} {:>5} {:>5} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>9}",
            r.k,
            r.m,
            r.n,
            r.sup_c0_error,
            r.sup_c1_error,
            r.cross_check_error,
            r.lp_s2m_s2n,
            if r.precision_ok { "ok" } else { "LOST" }
        );
    }
    for s in &report.skipped {
        eprintln!("skipped k = {} (m = {}, n = {}): {}", s.k, s.m, s.n, s.reason);
    }
    if report.records.iter().any(|r| !r.precision_ok) {
        eprintln!(
            "warning: entries marked LOST keep fewer significant bits than required at {} precision",
            cfg.precision
        );
    }

    let resolved = RenormArgs { precision: Some(cfg.precision), ..a.clone() };
    let mut m = RunManifest::new(&Command::Renormalize(resolved), started);
    m.outputs.extend([csv_path, json_path, svg_path, sched_path]);
    let mp = a.out_dir.join("manifest.json");
    m.write(&mp).map_err(io_err(&mp))?;
    Ok(EXIT_OK)
}

fn certify(a: CertifyArgs, started: u128) -> Outcome {
    let mut cfg = load_valid(&a.config)?;
    cfg.precision = resolve_precision(a.precision, &cfg);
    let grid = grid_of(a.grid)?;
    let sched = schedule_for(&cfg, a.xi)?;
    let cert = certify_scheme(&cfg, a.xi, a.mu, a.eps, &sched, &grid, a.fd_step)?;
    let json = cert.to_json() + "\n";
    match &a.out {
        Some(out) => {
            std::fs::write(out, &json).map_err(io_err(out))?;
            let resolved = CertifyArgs { precision: Some(cfg.precision), ..a.clone() };
            let mut m = RunManifest::new(&Command::Certify(resolved), started);
            m.outputs.push(out.clone());
            let mp = manifest_beside(out);
            m.write(&mp).map_err(io_err(&mp))?;
            println!("spectral_ok = {}", cert.spectral_ok);
            println!("restriction_ok = {} (eta5 = {}, eta4 = {})", cert.restriction_ok, cert.eta5, cert.eta4);
            println!("final C0 error = {:.4e}", cert.convergence.final_c0);
            println!("verdict: {}", cert.verdict);
        }
        None => print!("{json}"),
    }
    for w in &cert.warnings {
        eprintln!("warning: {w}");
    }
    Ok(if cert.passed() { EXIT_OK } else { EXIT_FAILED })
}

fn orbit(a: OrbitArgs, started: u128) -> Outcome {
    if a.sigma.len() != 5 || a.start.len() != 3 {
        return Err(Failure::config("--sigma takes five values and --start takes three"));
    }
    let map = match a.family {
        Family::G => LimitMap::G(HenonParams::new(a.xi, a.mu, a.kappa1, a.kappa2)?),
        Family::E => {
            let s = &a.sigma;
            LimitMap::E(EParams::new(a.xi, a.mu, SigmaVector::new(s[0], s[1], s[2], s[3], s[4]))?)
        }
    };
    let v0 = Vec3::xyz(a.start[0], a.start[1], a.start[2]);
    let orbit = iterate_endomorphism(&map, v0, a.steps, a.escape_bound);
    let last = orbit.points.len() - 1;
    let write = |w: &mut csv::Writer<Box<dyn std::io::Write>>| -> csv::Result<()> {
        w.write_record(["step", "x", "y", "z", "escaped"])?;
        for (i, p) in orbit.points.iter().enumerate() {
            let esc = i == last && orbit.escaped;
            w.write_record([i.to_string(), p.x.to_string(), p.y.to_string(), p.z.to_string(), (esc as u8).to_string()])?;
        }
        w.flush()?;
        Ok(())
    };
    let sink: Box<dyn std::io::Write> = match &a.out {
        Some(out) => Box::new(std::fs::File::create(out).map_err(io_err(out))?),
        None => Box::new(std::io::stdout()),
    };
    write(&mut csv::Writer::from_writer(sink)).map_err(|e| Failure::config(e.to_string()))?;
    if let Some(out) = &a.out {
        let mut m = RunManifest::new(&Command::Orbit(a.clone()), started);
        m.outputs.push(out.clone());
        let mp = manifest_beside(out);
        m.write(&mp).map_err(io_err(&mp))?;
    }
    if orbit.escaped {
        eprintln!("orbit escaped after {last} steps");
    }
    Ok(EXIT_OK)
}
