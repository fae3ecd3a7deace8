//! Command-line front end: verification suites and single checks,
//! propagation of shock measures, decomposition, transition tables and
//! density profiles.

mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::evolution::{decompose_onto_sams, expm_action, transition_table, DrivingKind, DrivingSpec, ExpmOptions};
use crate::measures::{sam_vector, FugacityProfile, SamKind, SamSpec};
use crate::operators::Sign;
use crate::scalar::{Mode, NumericField};
use crate::statespace::{PositionList, Space};
use crate::vector::StateVector;
use crate::verify::{
    check_algebra, check_appendix_boundary_relations, check_chain, check_duality_theorem1, check_lemmas,
    check_proposition1, check_pseudocommutator, check_shock_theorem, run_suite, AlgebraFamily, AlgebraParams,
    BoundaryParams, ChainKind, ChainParams, IntertwiningParams, LemmaParams, PseudoParams, ShockParams, ShockTheorem,
    SuiteConfig, VerificationReport,
};

pub use config::RunConfig;
use config::{TOL_IDENTITY, TOL_THEOREM};

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    CheckFailed = 1,
    Usage = 2,
    Numerical = 3,
}

impl Exit {
    fn of_error(e: &Error) -> Self {
        match e {
            Error::KrylovNonConvergence(_)
            | Error::RankDeficient { .. }
            | Error::ZeroNormalization
            | Error::DivisionByZero
            | Error::NotRepresentable(_) => Exit::Numerical,
            _ => Exit::Usage,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "asep-duality", version, about = "Conditioned ASEP dualities: checks, propagation and shock measures")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a suite or a single check and write the JSON report.
    Verify {
        /// algebra, duality, theorems, appendix or all.
        #[arg(long, conflicts_with = "check")]
        suite: Option<String>,
        /// prop1, theorem1, theorem2, theorem3, theorem2.chain,
        /// theorem3.chain, lemmas, appendix.boundary,
        /// appendix.pseudocommutator or algebra.<family>.
        #[arg(long)]
        check: Option<String>,
    },
    /// Evolve `𝟙_N |SAM⟩` (or a configuration given by `--eta`) under the
    /// driven generator; writes the state vector as JSON.
    Evolve,
    /// Evolve a SAM and decompose it over the `K`-shock family; writes
    /// weights as CSV and, next to `--out`, as JSON.
    Decompose,
    /// Transition probabilities of the `K`-particle process as CSV.
    Transition,
    /// Single-site densities of a SAM as CSV.
    Profile,
    /// Run a suite (default `all`) and write `report.json` and
    /// `summary.csv` into the `--out` directory.
    Report {
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Exit::Usage as i32 } else { Exit::Success as i32 };
        }
    };
    match run(cli) {
        Ok(code) => code as i32,
        Err(e) => {
            eprintln!("error: {e}");
            Exit::of_error(&e) as i32
        }
    }
}

pub fn run(cli: Cli) -> Result<Exit> {
    let config = cli.config.load()?;
    match cli.command {
        Command::Verify { suite, check } => verify(config, suite, check),
        Command::Evolve => evolve(config),
        Command::Decompose => decompose(config),
        Command::Transition => transition(config),
        Command::Profile => profile(config),
        Command::Report { suite } => report(config, &suite),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

/// CSV body preceded by a `#` line holding the resolved config.
fn csv(config: &Value, header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = format!("# {config}\n{header}\n");
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

fn suite_config(c: &RunConfig) -> SuiteConfig {
    let d = SuiteConfig::default();
    SuiteConfig {
        max_sites: c.sites.unwrap_or(d.max_sites),
        q: c.q.unwrap_or(d.q),
        mode: c.mode.unwrap_or(d.mode),
        tol_identity: c.tol.unwrap_or(d.tol_identity),
        tol_theorem: c.tol.unwrap_or(d.tol_theorem),
        seed: c.seed.unwrap_or(d.seed),
        timings: !c.no_timings,
    }
}

fn finish_reports(mut config: RunConfig, reports: Vec<VerificationReport>) -> Result<Exit> {
    let pass = reports.iter().all(|r| r.pass);
    let out = config.out.take();
    let doc = json!({
        "config": config.echo(),
        "pass": pass,
        "reports": reports,
    });
    emit(out.as_deref(), &pretty(&doc))?;
    let summary: String = reports.iter().fold(String::new(), |mut s, r| {
        let _ = writeln!(s, "{r}");
        s
    });
    eprint!("{summary}");
    Ok(if pass { Exit::Success } else { Exit::CheckFailed })
}

fn verify(mut c: RunConfig, suite: Option<String>, check: Option<String>) -> Result<Exit> {
    match (suite, check) {
        (Some(name), _) => {
            let sc = suite_config(&c);
            let reports = run_suite(&name, &sc)?;
            c.sites = Some(sc.max_sites);
            c.q = Some(sc.q);
            c.mode = Some(sc.mode);
            c.seed = Some(sc.seed);
            finish_reports(c, reports)
        }
        (None, Some(check)) => {
            let mut report = single_check(&mut c, &check)?;
            if c.no_timings {
                report.runtime_ms = None;
            }
            finish_reports(c, vec![report])
        }
        (None, None) => Err(Error::InvalidParameter("verify needs --suite or --check".into())),
    }
}

/// Resolves the parameters of one named check and runs it.
fn single_check(c: &mut RunConfig, check: &str) -> Result<VerificationReport> {
    let q = *c.q.get_or_insert(config::DEFAULT_Q);
    let l = c.require_sites()?;
    let propagates = matches!(check, "theorem1" | "theorem2" | "theorem3");
    if propagates {
        c.require_numeric(check)?;
    }
    let mode = *c.mode.get_or_insert(Mode::Exact);
    let tol_default = if matches!(check, "theorem2" | "theorem3") { TOL_THEOREM } else { TOL_IDENTITY };
    let tol = *c.tol.get_or_insert(tol_default);
    let opts = ExpmOptions::default();
    Ok(match check {
        "prop1" => {
            let p = IntertwiningParams {
                sites: l,
                particles: c.shocks.ok_or_else(|| Error::InvalidParameter("--K is required".into()))?,
                power: *c.power.get_or_insert(1),
                sign: *c.sign.get_or_insert(Sign::Plus),
                alpha: c.alpha(l)?,
                perturb: c.perturb,
            };
            check_proposition1(&p, mode, q, tol)
        }
        "theorem1" => {
            let t = *c.t.get_or_insert(config::DEFAULT_T);
            check_duality_theorem1(&c.shock_list(l)?, &c.configuration(l)?, q, t, tol, &opts)?
        }
        "theorem2" | "theorem3" => {
            let theorem = if check == "theorem2" { ShockTheorem::Global } else { ShockTheorem::Boundary };
            let p = ShockParams {
                sites: l,
                particles: c.require_particles()?,
                shocks: c.shock_list(l)?,
                z: *c.z.get_or_insert(config::DEFAULT_Z),
                q,
                t: *c.t.get_or_insert(config::DEFAULT_T),
            };
            check_shock_theorem(theorem, &p, tol, &opts)?
        }
        "theorem2.chain" | "theorem3.chain" => {
            let kind = if check == "theorem2.chain" { ChainKind::Global } else { ChainKind::Boundary };
            let p = ChainParams {
                kind,
                sites: l,
                particles: c.require_particles()?,
                shocks: c.shocks.ok_or_else(|| Error::InvalidParameter("--K is required".into()))?,
            };
            check_chain(&p, mode, q, tol)
        }
        "lemmas" => {
            let p = LemmaParams {
                seed: *c.seed.get_or_insert(0),
                ..LemmaParams::new(l)
            };
            check_lemmas(&p, mode, q, tol)
        }
        "appendix.boundary" => {
            let p = BoundaryParams::new(l, c.alpha(l)?, c.beta(l)?.unwrap_or(crate::scalar::QExponent::ZERO));
            check_appendix_boundary_relations(&p, mode, q, tol)
        }
        "appendix.pseudocommutator" => {
            let particles = c.require_particles()?;
            let sign = *c.sign.get_or_insert(Sign::Plus);
            let alpha = c.alpha(l)?;
            let beta = match c.beta(l)? {
                Some(b) => b,
                None => PseudoParams::vanishing_beta(l, particles, sign, alpha),
            };
            let p = PseudoParams {
                sites: l,
                particles,
                sign,
                alpha,
                beta,
            };
            check_pseudocommutator(&p, mode, q, tol)
        }
        other => {
            let family = other
                .strip_prefix("algebra.")
                .and_then(|name| AlgebraFamily::ALL.into_iter().find(|f| f.name() == name))
                .ok_or_else(|| Error::Unknown {
                    kind: "check",
                    name: other.into(),
                })?;
            check_algebra(family, &AlgebraParams::new(l), mode, q, tol)
        }
    })
}

/// Initial sector vector: `𝟙_N |SAM_x⃗⟩` or the basis state of `--eta`.
fn initial_state(c: &mut RunConfig, field: &NumericField, l: usize) -> Result<(StateVector<f64>, Option<PositionList>)> {
    if c.eta.is_some() {
        let eta = c.configuration(l)?;
        let space = Space::sector(l, eta.particles())?;
        c.particles.get_or_insert(eta.particles());
        return Ok((StateVector::basis(space, &eta)?, None));
    }
    let x = c.shock_list(l)?;
    let n = c.require_particles()?;
    let kind = *c.kind.get_or_insert(SamKind::II);
    let z = c.z.expect("numeric defaults filled");
    let space = Space::sector(l, n)?;
    Ok((sam_vector(field, &SamSpec::new(x.clone(), z, kind)?, space)?, Some(x)))
}

/// Driving of the evolution; defaults follow the SAM family with `M = K`.
fn resolve_driving(c: &mut RunConfig, default_m: usize) -> DrivingSpec {
    let kind = *c.driving.get_or_insert(match c.kind {
        Some(SamKind::I) => DrivingKind::Boundary,
        _ => DrivingKind::Global,
    });
    let m = *c.conditioning.get_or_insert(default_m);
    DrivingSpec { kind, conditioning: m }
}

fn expm_options(c: &mut RunConfig) -> ExpmOptions {
    let mut opts = ExpmOptions::default().with_method(c.method.expect("numeric defaults filled"));
    if let Some(tol) = c.tol {
        opts = opts.with_tol(tol);
    }
    opts
}

fn evolve_state(c: &mut RunConfig) -> Result<(StateVector<f64>, Option<PositionList>, DrivingSpec)> {
    c.require_numeric("propagation")?;
    c.fill_numeric_defaults();
    let l = c.require_sites()?;
    let field = NumericField::new(c.q.expect("filled"))?;
    let (v0, x) = initial_state(c, &field, l)?;
    let default_m = x.as_ref().map_or(v0.space().particles().unwrap_or(0), PositionList::len);
    let driving = resolve_driving(c, default_m);
    let h = driving.generator(&field, l)?.build(v0.space())?;
    let opts = expm_options(c);
    let vt = expm_action(&h, &v0, c.t.expect("filled"), &opts)?;
    Ok((vt, x, driving))
}

fn evolve(mut c: RunConfig) -> Result<Exit> {
    let (vt, _, _) = evolve_state(&mut c)?;
    let out = c.out.take();
    let doc = json!({ "config": c.echo(), "state": vt.to_json() });
    emit(out.as_deref(), &pretty(&doc))?;
    Ok(Exit::Success)
}

fn decompose(mut c: RunConfig) -> Result<Exit> {
    if c.eta.is_some() {
        return Err(Error::InvalidParameter("decompose starts from a shock measure, use --x".into()));
    }
    let (vt, x, _) = evolve_state(&mut c)?;
    let k = x.map_or(0, |x| x.len());
    let kind = c.kind.expect("set by initial_state");
    let d = decompose_onto_sams(&vt, k, c.z.expect("filled"), kind, c.q.expect("filled"))?;
    let out = c.out.take();
    let echo = c.echo();
    emit(out.as_deref(), &csv(&echo, "y,weight", d.csv_rows()))?;
    if let Some(p) = out {
        let json_path = p.with_extension("json");
        emit(Some(&json_path), &pretty(&d.to_json(echo)))?;
    }
    Ok(Exit::Success)
}

fn transition(mut c: RunConfig) -> Result<Exit> {
    c.require_numeric("transition")?;
    c.fill_numeric_defaults();
    let l = c.require_sites()?;
    let k = c.shocks.ok_or_else(|| Error::InvalidParameter("--K is required".into()))?;
    let driving = resolve_driving(&mut c, k);
    let opts = expm_options(&mut c);
    let table = transition_table(l, k, driving, c.q.expect("filled"), c.t.expect("filled"), &opts)?;
    let out = c.out.take();
    emit(out.as_deref(), &csv(&c.echo(), "x,y,probability", table.csv_rows()))?;
    Ok(Exit::Success)
}

fn profile(mut c: RunConfig) -> Result<Exit> {
    c.require_numeric("profile")?;
    let l = c.require_sites()?;
    let q = *c.q.get_or_insert(config::DEFAULT_Q);
    let z = *c.z.get_or_insert(config::DEFAULT_Z);
    let kind = *c.kind.get_or_insert(SamKind::II);
    let spec = SamSpec::new(c.shock_list(l)?, z, kind)?;
    let p = FugacityProfile::of_sam(q, &spec)?;
    let out = c.out.take();
    emit(out.as_deref(), &csv(&c.echo(), "k,z_k,rho_k", p.csv_rows()))?;
    Ok(Exit::Success)
}

fn report(mut c: RunConfig, suite: &str) -> Result<Exit> {
    let sc = suite_config(&c);
    let reports = run_suite(suite, &sc)?;
    c.sites = Some(sc.max_sites);
    c.q = Some(sc.q);
    c.mode = Some(sc.mode);
    c.seed = Some(sc.seed);
    let pass = reports.iter().all(|r| r.pass);
    let dir = c.out.take();
    let echo = c.echo();
    let doc = json!({ "config": echo, "suite": suite, "pass": pass, "reports": reports });
    let rows = reports.iter().map(|r| {
        let ms = r.runtime_ms.map_or(String::new(), |m| format!("{m:.3}"));
        format!("{},{},{:e},{:e},{}", r.check, r.pass, r.residual, r.tolerance, ms)
    });
    let summary = csv(&echo, "check,pass,residual,tolerance,runtime_ms", rows);
    match dir {
        Some(d) => {
            std::fs::create_dir_all(&d).map_err(|e| Error::Io(format!("{}: {e}", d.display())))?;
            emit(Some(&d.join("report.json")), &pretty(&doc))?;
            emit(Some(&d.join("summary.csv")), &summary)?;
        }
        None => emit(None, &pretty(&doc))?,
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    eprintln!("{} checks, {failed} failed", reports.len());
    Ok(if pass { Exit::Success } else { Exit::CheckFailed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(args: &[&str]) -> i32 {
        main_with(std::iter::once("asep-duality").chain(args.iter().copied()))
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(code(&["verify"]), 2);
        assert_eq!(code(&["verify", "--suite", "nope"]), 2);
        assert_eq!(code(&["frobnicate"]), 2);
        assert_eq!(code(&["evolve", "--L", "4", "--N", "2", "--x", "2", "--mode", "exact"]), 2);
        assert_eq!(code(&["verify", "--check", "theorem2", "--L", "6", "--N", "2", "--x", "3", "--mode", "exact"]), 2);
        assert_eq!(code(&["verify", "--check", "bogus", "--L", "4"]), 2);
    }

    #[test]
    fn cli_parses_global_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["asep-duality", "verify", "--check", "prop1", "--L", "6", "--K", "2", "--sign", "+", "--q", "3/2"])
            .unwrap();
        assert_eq!(cli.config.sites, Some(6));
        assert_eq!(cli.config.sign, Some(Sign::Plus));
        assert_eq!(cli.config.q, Some(1.5));
    }
}
