//! Command-line front end.
//!
//! Every subcommand reads one TOML config, writes its CSV and raster outputs
//! plus `<prefix><command>.json` into the output directory, and exits with
//! 0 on success, 2 on a validation error, 3 when every result is
//! inconclusive and 1 on any other failure.
//!
//! CSV columns:
//! - `coverage`, `classify`: `seed,direction,step,fraction`
//! - `powers`: `seed,p,step,fraction`
//! - `orbit`: `seed,step,x0,x1,...`

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::affine::{verify_certificate, AffineProblem, IntegerMatrix};
use crate::config::{ExperimentConfig, IndependenceDeclarations};
use crate::constructions::Construction;
use crate::error::{Error, Result};
use crate::exact::ExactVector;
use crate::orbit::{
    classify_orbit, coverage_experiment, fan_out, known_fixed_points, power_minimality_scan, product_pm_probe,
    residue_limit_sets, Classification, CoverageCurve, Walker,
};
use crate::report::{output_path, Report, SystemInfo};
use crate::sets::{birkhoff_chain, preimage_intersection_chain, write_rle, Dichotomy, RasterSet};
use crate::systems::{Direction, State, SystemDescriptor, SystemKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, ValueEnum)]
pub enum Command {
    /// Build the configured system and report its predicted exceptional set.
    Build,
    /// Dump orbit states.
    Orbit,
    /// Coverage curves in `analysis.direction`.
    Coverage,
    /// Classify each seed's orbit in both directions.
    Classify,
    /// Residue-class limit sets for each prime in `analysis.primes`.
    Residue,
    /// Coverage of `f^p` for each prime in `analysis.primes`.
    Powers,
    /// Exact minimality verdict for an affine toral map.
    DecideAffine,
    /// Preimage-intersection dichotomy on a raster.
    Dichotomy,
    /// Nested component chain on a raster.
    Birkhoff,
    /// Coverage of `f × f` from generic seeds.
    ProbeProduct,
    /// Run the command named by `analysis.command`.
    Run,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }

    /// Looks up a subcommand by its command-line name.
    pub fn from_name(name: &str) -> Option<Self> {
        Self::from_str(name, false).ok()
    }
}

#[derive(Debug, Parser)]
#[command(name = "pmlab", version, about = "Orbit experiments on toral maps, flows and subshifts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (TOML).
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true, env = "PMLAB_OUT_DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; overrides `workers`.
    #[arg(long, global = true, env = "PMLAB_WORKERS")]
    pub workers: Option<usize>,
    /// One worker and reproducible output.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

/// Result of one subcommand.
#[derive(Debug)]
pub struct Outcome {
    pub report: PathBuf,
    pub exit_code: i32,
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Parse(_)
        | Error::InvalidInput(_)
        | Error::DimensionMismatch { .. }
        | Error::StateSpace(_)
        | Error::NotUnimodular(_) => EXIT_VALIDATION,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run_cli(&cli) {
        Ok(o) => {
            println!("{}", o.report.display());
            o.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

/// Loads the config, applies command-line overrides and runs.
pub fn run_cli(cli: &Cli) -> Result<Outcome> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    let src = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::from_toml(&src)?;
    cfg.deterministic |= cli.deterministic;
    cfg.workers = cfg.effective_workers(cli.workers);
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    run(cli.command, &cfg)
}

/// Executes `command` on a validated, fully resolved config.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let command = resolve(command, cfg)?;
    std::fs::create_dir_all(&cfg.output.dir)?;
    let ctx = Context::new(cfg)?;
    let basis = cfg.basis()?;
    let mut report = Report::new(
        &command.name(),
        cfg,
        IndependenceDeclarations::from_basis(&basis),
        ctx.system.as_ref().map(|(s, c)| SystemInfo::new(s, c.as_ref())),
    );
    let exit_code = match command {
        Command::Build => ctx.build(&mut report)?,
        Command::Orbit => ctx.orbit(&mut report)?,
        Command::Coverage => ctx.coverage(&mut report)?,
        Command::Classify => ctx.classify(&mut report)?,
        Command::Residue => ctx.residue(&mut report)?,
        Command::Powers => ctx.powers(&mut report)?,
        Command::DecideAffine => ctx.decide_affine(&mut report)?,
        Command::Dichotomy => ctx.dichotomy(&mut report)?,
        Command::Birkhoff => ctx.birkhoff(&mut report)?,
        Command::ProbeProduct => ctx.probe_product(&mut report)?,
        Command::Run => unreachable!("resolved above"),
    };
    let path = ctx.path(&format!("{}.json", command.name()));
    report.write(&path)?;
    Ok(Outcome {
        report: path,
        exit_code,
    })
}

fn resolve(command: Command, cfg: &ExperimentConfig) -> Result<Command> {
    let named = match &cfg.analysis.command {
        Some(name) => Some(
            Command::from_name(name)
                .filter(|c| *c != Command::Run)
                .ok_or_else(|| Error::Config(format!("unknown analysis.command {name:?}")))?,
        ),
        None => None,
    };
    match (command, named) {
        (Command::Run, Some(c)) => Ok(c),
        (Command::Run, None) => Err(Error::Config("run needs analysis.command".into())),
        (c, Some(n)) if c != n => Err(Error::Config(format!(
            "subcommand {} does not match analysis.command {}",
            c.name(),
            n.name()
        ))),
        (c, _) => Ok(c),
    }
}

fn direction_name(d: Direction) -> &'static str {
    match d {
        Direction::Forward => "forward",
        Direction::Backward => "backward",
    }
}

fn seed_json(x: &State) -> Value {
    match x {
        State::Torus(p) => json!(p.coords()),
        State::Symbolic(p) => json!(format!("{p:?}")),
    }
}

fn push_curve(csv: &mut String, seed: usize, curve: &CoverageCurve) {
    for p in &curve.points {
        let _ = writeln!(csv, "{seed},{},{},{}", direction_name(curve.direction), p.step, p.fraction);
    }
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    system: Option<(SystemDescriptor, Option<Construction>)>,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        let system = match &cfg.system {
            Some(_) => Some(cfg.build_system()?),
            None => None,
        };
        Ok(Self { cfg, system })
    }

    fn path(&self, name: &str) -> PathBuf {
        output_path(&self.cfg.output.dir, &self.cfg.output.prefix, name)
    }

    fn write_file(&self, report: &mut Report, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.path(name), contents)?;
        report.files.push(format!("{}{name}", self.cfg.output.prefix));
        Ok(())
    }

    fn write_raster(&self, report: &mut Report, name: &str, s: &RasterSet) -> Result<()> {
        write_rle(&self.path(name), s)?;
        report.files.push(format!("{}{name}", self.cfg.output.prefix));
        Ok(())
    }

    fn system(&self) -> Result<&SystemDescriptor> {
        self.system
            .as_ref()
            .map(|(s, _)| s)
            .ok_or_else(|| Error::Config("this command needs a [system] table".into()))
    }

    fn seeds(&self) -> Result<Vec<(usize, State)>> {
        let (sys, c) = self
            .system
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs a [system] table".into()))?;
        Ok(self.cfg.seed_states(sys, c.as_ref())?.into_iter().enumerate().collect())
    }

    fn fan_out<R: Send>(&self, f: impl Fn((usize, State)) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
        fan_out(self.seeds()?, self.cfg.workers, f)?.into_iter().collect()
    }

    fn build(&self, report: &mut Report) -> Result<i32> {
        let sys = self.system()?;
        let fixed: Vec<Value> = known_fixed_points(sys)?
            .iter()
            .map(|k| json!({ "point": k.point, "residual": k.residual }))
            .collect();
        report.results = json!({ "known_fixed_points": fixed });
        Ok(EXIT_OK)
    }

    fn orbit(&self, report: &mut Report) -> Result<i32> {
        let sys = self.system()?;
        let a = &self.cfg.analysis;
        let runs = self.fan_out(|(i, x)| {
            let mut w = Walker::new(sys, &x, a.direction, 1)?;
            let mut rows = String::new();
            let row = |rows: &mut String, n: u64, c: &[f64]| {
                let _ = write!(rows, "{i},{n}");
                c.iter().for_each(|v| {
                    let _ = write!(rows, ",{v}");
                });
                rows.push('\n');
            };
            row(&mut rows, 0, w.coords());
            let mut truncated = None;
            let mut done = 0;
            for n in 1..=a.steps {
                if let Err(e) = w.advance() {
                    match e {
                        Error::Stalled { .. } | Error::Integration(_) => {
                            truncated = Some(e.to_string());
                            break;
                        }
                        e => return Err(e),
                    }
                }
                done = n;
                if n % a.stride == 0 || n == a.steps {
                    row(&mut rows, n, w.coords());
                }
            }
            let summary = json!({
                "seed": seed_json(&x),
                "steps_completed": done,
                "final_state": w.coords(),
                "truncated": truncated,
            });
            Ok((rows, summary))
        })?;
        let dim = runs.first().map_or(0, |_| if sys.is_symbolic() { 1 } else { sys.dim() });
        let mut csv = String::from("seed,step");
        (0..dim).for_each(|k| {
            let _ = write!(csv, ",x{k}");
        });
        csv.push('\n');
        let mut summaries = Vec::new();
        for (rows, s) in runs {
            csv.push_str(&rows);
            summaries.push(s);
        }
        self.write_file(report, "orbit.csv", &csv)?;
        report.results = json!({ "direction": direction_name(a.direction), "seeds": summaries });
        Ok(EXIT_OK)
    }

    fn coverage(&self, report: &mut Report) -> Result<i32> {
        let sys = self.system()?;
        let a = &self.cfg.analysis;
        let runs = self.fan_out(|(i, x)| {
            let run = coverage_experiment(sys, &x, a.steps, a.resolution, a.direction)?;
            Ok((i, seed_json(&x), run))
        })?;
        let mut csv = String::from("seed,direction,step,fraction\n");
        let mut out = Vec::new();
        for (i, seed, run) in runs {
            push_curve(&mut csv, i, &run.curve);
            out.push(json!({
                "seed": seed,
                "final_fraction": run.curve.final_fraction(),
                "visited_cells": run.grid.occupied_cells(),
                "steps_completed": run.curve.steps_completed,
                "completed_grid": run.curve.completed_grid,
                "truncated": run.curve.truncated,
            }));
        }
        self.write_file(report, "coverage.csv", &csv)?;
        report.results = json!({ "seeds": out });
        Ok(EXIT_OK)
    }

    fn classify(&self, report: &mut Report) -> Result<i32> {
        let sys = self.system()?;
        let a = &self.cfg.analysis;
        let runs = self.fan_out(|(i, x)| {
            let r = classify_orbit(sys, &x, a.steps, a.resolution, &a.tolerances)?;
            Ok((i, seed_json(&x), r))
        })?;
        let mut csv = String::from("seed,direction,step,fraction\n");
        let mut out = Vec::new();
        let mut all_inconclusive = true;
        for (i, seed, r) in runs {
            push_curve(&mut csv, i, &r.forward_coverage_curve);
            push_curve(&mut csv, i, &r.backward_coverage_curve);
            all_inconclusive &= r.classification == Classification::Inconclusive;
            out.push(json!({
                "seed": seed,
                "classification": r.classification,
                "forward": r.forward,
                "backward": r.backward,
                "in_script_a": r.in_script_a,
                "in_script_w": r.in_script_w,
            }));
        }
        self.write_file(report, "classify.csv", &csv)?;
        report.results = json!({ "seeds": out });
        Ok(if all_inconclusive { EXIT_INCONCLUSIVE } else { EXIT_OK })
    }

    fn residue(&self, report: &mut Report) -> Result<i32> {
        let sys = self.system()?;
        let a = &self.cfg.analysis;
        let runs = self.fan_out(|(_, x)| {
            let profiles = a
                .primes
                .iter()
                .map(|&p| residue_limit_sets(sys, &x, p, a.steps, a.resolution))
                .collect::<Result<Vec<_>>>()?;
            Ok(json!({ "seed": seed_json(&x), "profiles": profiles }))
        })?;
        report.results = json!({ "seeds": runs });
        Ok(EXIT_OK)
    }

    fn powers(&self, report: &mut Report) -> Result<i32> {
        let sys = self.system()?;
        let a = &self.cfg.analysis;
        let runs = self.fan_out(|(i, x)| {
            let scans = power_minimality_scan(sys, &x, &a.primes, a.steps, a.resolution)?;
            Ok((i, seed_json(&x), scans))
        })?;
        let mut csv = String::from("seed,p,step,fraction\n");
        let mut out = Vec::new();
        for (i, seed, scans) in runs {
            let mut per = Vec::new();
            for s in &scans {
                for pt in &s.curve.points {
                    let _ = writeln!(csv, "{i},{},{},{}", s.p, pt.step, pt.fraction);
                }
                per.push(json!({ "p": s.p, "fraction": s.fraction, "complete": s.complete }));
            }
            out.push(json!({ "seed": seed, "powers": per }));
        }
        self.write_file(report, "powers.csv", &csv)?;
        report.results = json!({ "seeds": out });
        Ok(EXIT_OK)
    }

    fn decide_affine(&self, report: &mut Report) -> Result<i32> {
        let sys = self.system()?;
        let basis = self.cfg.basis()?;
        let (tau, a) = match sys.kind() {
            SystemKind::Translation { a } => (IntegerMatrix::identity(a.dim()), a.clone()),
            SystemKind::Automorphism { matrix } => (matrix.clone(), ExactVector::zeros(basis, matrix.rows())),
            SystemKind::Affine { matrix, a } => (matrix.clone(), a.clone()),
            _ => {
                return Err(Error::Config(
                    "decide-affine needs a translation, automorphism or affine system".into(),
                ))
            }
        };
        let problem = AffineProblem::new(tau, a)?;
        let verdict = problem.decide();
        report.results = json!({
            "verdict": verdict.verdict,
            "certificate": verdict.certificate,
            "assumption": verdict.assumption,
            "certificate_verified": verify_certificate(&problem, &verdict),
        });
        Ok(EXIT_OK)
    }

    fn sets(&self) -> Result<&crate::config::SetsSpec> {
        self.cfg
            .sets
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs a [sets] table".into()))
    }

    fn dichotomy(&self, report: &mut Report) -> Result<i32> {
        let spec = self.sets()?;
        let f = spec.raster_map(self.system.as_ref().map(|(s, _)| s))?;
        let u = spec.region(&spec.k, "k")?.complement();
        let a = match &spec.a {
            Some(r) => r.raster(spec.domain, spec.dim, spec.resolution)?,
            None => f.empty_set(),
        };
        let d = preimage_intersection_chain(&f, &u, &a, spec.n_max)?;
        let (set, details) = match &d {
            Dichotomy::Case1 { e, n } => (e, json!({ "n": n, "e_cells": e.len() })),
            Dichotomy::Case2 {
                v,
                m,
                preimage_contained,
            } => (
                v,
                json!({ "m": m, "v_cells": v.len(), "preimage_contained": preimage_contained }),
            ),
            Dichotomy::Inconclusive { last, n } => (last, json!({ "n": n, "last_cells": last.len() })),
        };
        self.write_raster(report, "dichotomy.pmrs", set)?;
        report.results = json!({
            "verdict": d.label(),
            "details": details,
            "resolution": spec.resolution,
            "u_cells": u.len(),
        });
        Ok(if matches!(d, Dichotomy::Inconclusive { .. }) {
            EXIT_INCONCLUSIVE
        } else {
            EXIT_OK
        })
    }

    fn birkhoff(&self, report: &mut Report) -> Result<i32> {
        let spec = self.sets()?;
        let f = spec.raster_map(self.system.as_ref().map(|(s, _)| s))?;
        let d0 = spec.region(&spec.d0, "d0")?;
        let a = spec.region(&spec.a, "a")?;
        let run = birkhoff_chain(&f, &d0, &a, spec.n_max)?;
        self.write_raster(report, "birkhoff_k.pmrs", &run.k)?;
        report.results = serde_json::to_value(run.summary()).map_err(|e| Error::Io(e.to_string()))?;
        Ok(EXIT_OK)
    }

    fn probe_product(&self, report: &mut Report) -> Result<i32> {
        let sys = self.system()?;
        let a = &self.cfg.analysis;
        let r = product_pm_probe(sys, a.steps, a.resolution, a.seeds.max(1), self.cfg.seed)?;
        report.results = serde_json::to_value(r).map_err(|e| Error::Io(e.to_string()))?;
        Ok(EXIT_OK)
    }
}

/// Runs the binary entry point on `std::env::args`.
pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}

/// Reads a report back, for tools and tests.
pub fn read_report(path: &Path) -> Result<Value> {
    let s = std::fs::read_to_string(path)?;
    serde_json::from_str(&s).map_err(|e| Error::Parse(e.to_string()))
}
