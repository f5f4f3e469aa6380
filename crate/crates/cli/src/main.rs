//! `milnor`: analyze polynomial map germs described by a JSON bundle.
//!
//! Exit codes: 0 tame (or success), 1 not tame, 2 inconclusive, 3
//! precondition not met, 4 invalid input. Errors are printed to stderr as a
//! JSON document `{"error": kind, "message": text}`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use milnor_core::composite::analyze;
use milnor_core::config::radius_ladder;
use milnor_core::report::{export_cloud, Bundle, CloudFormat, Which};
use milnor_core::tameness::{check_composite_condition, check_tame, TameStatus};
use milnor_core::topology::euler_report;
use milnor_core::Error;

#[derive(Parser)]
#[command(name = "milnor", version, about = "Milnor sets, tameness and Euler characteristics of polynomial map germs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sets, lattice checks, discriminant evidence and image cloud of H = G∘F.
    Analyze(Common),
    /// Tameness verdict of F, G or H.
    Tame {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "H")]
        which: String,
    },
    /// Tameness of H decided through F and the singular set of G.
    CompositeCheck(Common),
    /// Gradient degrees and Euler characteristics of fibers and tubes.
    Euler(Common),
    /// Sample a named set on spheres and write one file per radius.
    ExportCloud {
        #[command(flatten)]
        common: Common,
        /// v_f, sing_f, m_f, v_g, sing_g, m_g, v_h, sing_h, m_h, image, or a
        /// set named in the bundle.
        #[arg(long)]
        set: String,
        /// Comma-separated radii; the bundle's ladder when absent.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        /// Points per radius; the bundle's `points_per_radius` when absent.
        #[arg(long)]
        count: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    bundle: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// `start,steps`: radii start·2^-k for k < steps.
    #[arg(long)]
    radius_ladder: Option<String>,
    /// `key=value` tolerance override; repeatable. Keys: membership, sampler,
    /// witness, margin, exclusion, gap, image_floor.
    #[arg(long = "tol")]
    tol: Vec<String>,
    /// Directory receiving the report or cloud files.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

/// Successful command output and its exit code.
struct Outcome {
    doc: Value,
    code: u8,
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value, Error> {
    serde_json::to_value(v).map_err(|e| Error::Io(e.to_string()))
}

fn status_code(s: TameStatus) -> u8 {
    match s {
        TameStatus::Tame => 0,
        TameStatus::NotTame => 1,
        TameStatus::Inconclusive => 2,
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::PreconditionNotMet(_) | Error::GradientVanishesOnSphere { .. } => 3,
        Error::NoConvergence(_) | Error::DegreeDisagreement { .. } => 2,
        _ => 4,
    }
}

fn parse_ladder(text: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::Input(format!("--radius-ladder expects `start,steps`, got `{text}`"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    let start: f64 = a.trim().parse().map_err(|_| bad())?;
    let steps: usize = b.trim().parse().map_err(|_| bad())?;
    Ok(radius_ladder(start, steps))
}

fn apply_tol(bundle: &mut Bundle, item: &str) -> Result<(), Error> {
    let (key, value) = item
        .split_once('=')
        .ok_or_else(|| Error::Input(format!("--tol expects key=value, got `{item}`")))?;
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| Error::Input(format!("--tol {key}: `{value}` is not a number")))?;
    let c = &mut bundle.config;
    match key.trim() {
        "membership" => c.membership_tol = v,
        "sampler" => c.sampler.tol = v,
        "witness" => c.tameness.witness_tol = v,
        "margin" => c.tameness.margin = v,
        "exclusion" => c.tameness.exclusion_radius = v,
        "gap" => c.tameness.gap_floor = v,
        "image_floor" => c.tameness.image_floor = v,
        other => return Err(Error::Input(format!("unknown tolerance `{other}`"))),
    }
    Ok(())
}

fn load(common: &Common) -> Result<Bundle, Error> {
    let mut b = Bundle::load(&common.bundle)?;
    if let Some(seed) = common.seed {
        b.config.seed = seed;
        b.config.sampler.seed = seed;
    }
    if let Some(l) = &common.radius_ladder {
        b.config.radii = parse_ladder(l)?;
    }
    for t in &common.tol {
        apply_tol(&mut b, t)?;
    }
    b.config.validate()?;
    Ok(b)
}

fn json_only(common: &Common) -> Result<(), Error> {
    match common.format {
        Some(Format::Csv) => Err(Error::Input("--format csv applies to export-cloud only".into())),
        _ => Ok(()),
    }
}

fn precondition(e: Error) -> Result<Outcome, Error> {
    match e {
        Error::PreconditionNotMet(detail) => Ok(Outcome {
            doc: json!({"status": "precondition_not_met", "detail": detail}),
            code: 3,
        }),
        other => Err(other),
    }
}

fn run(cmd: &Command) -> Result<Outcome, Error> {
    match cmd {
        Command::Analyze(common) => {
            json_only(common)?;
            let b = load(common)?;
            let (f, g) = b.composite()?;
            let report = analyze(f, g, &b.config)?;
            let overrides = b.check_overrides()?;
            Ok(Outcome {
                doc: json!({"name": b.name, "report": to_json(&report)?, "overrides": to_json(&overrides)?}),
                code: 0,
            })
        }
        Command::Tame { common, which } => {
            json_only(common)?;
            let b = load(common)?;
            let which: Which = which.parse()?;
            let v = check_tame(&b.map(which)?, &b.rho_for(which)?, &b.config)?;
            Ok(Outcome {
                code: status_code(v.status),
                doc: to_json(&v)?,
            })
        }
        Command::CompositeCheck(common) => {
            json_only(common)?;
            let b = load(common)?;
            let (f, g) = b.composite()?;
            match check_composite_condition(f, g, &b.config) {
                Ok(v) => Ok(Outcome {
                    code: status_code(v.status),
                    doc: to_json(&v)?,
                }),
                Err(e) => precondition(e),
            }
        }
        Command::Euler(common) => {
            json_only(common)?;
            let b = load(common)?;
            let g = match &b.g {
                Some(_) => Some(b.composite()?.1),
                None => None,
            };
            match euler_report(&b.f, g, &b.config) {
                Ok(r) => Ok(Outcome {
                    doc: to_json(&r)?,
                    code: 0,
                }),
                Err(e) => precondition(e),
            }
        }
        Command::ExportCloud {
            common,
            set,
            radii,
            count,
        } => {
            let b = load(common)?;
            let out = common
                .out
                .clone()
                .ok_or_else(|| Error::Input("export-cloud needs --out <dir>".into()))?;
            let radii = radii.clone().unwrap_or_else(|| b.config.radii.clone());
            let format = match common.format {
                Some(Format::Json) => CloudFormat::Json,
                _ => CloudFormat::Csv,
            };
            let count = count.unwrap_or(b.config.points_per_radius);
            let files = export_cloud(&b, set, &radii, count, &out, format)?;
            Ok(Outcome {
                doc: json!({"set": set, "files": to_json(&files)?}),
                code: 0,
            })
        }
    }
}

fn command_name(cmd: &Command) -> (&'static str, &Common) {
    match cmd {
        Command::Analyze(c) => ("analyze", c),
        Command::Tame { common, .. } => ("tame", common),
        Command::CompositeCheck(c) => ("composite-check", c),
        Command::Euler(c) => ("euler", c),
        Command::ExportCloud { common, .. } => ("export-cloud", common),
    }
}

fn write_report(dir: &Path, name: &str, doc: &Value) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(doc).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(dir.join(format!("{name}.json")), text)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = command_name(&cli.command);
    let result = run(&cli.command).and_then(|o| {
        if let (Some(dir), false) = (&common.out, name == "export-cloud") {
            write_report(dir, name, &o.doc)?;
        }
        Ok(o)
    });
    match result {
        Ok(o) => {
            println!("{}", serde_json::to_string_pretty(&o.doc).unwrap_or_default());
            ExitCode::from(o.code)
        }
        Err(e) => {
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            ExitCode::from(error_code(&e))
        }
    }
}
