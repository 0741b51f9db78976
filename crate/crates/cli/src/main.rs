//! `phaselab` command-line front end.
//!
//! Every run prints (or writes with `--output`) a single JSON envelope:
//!
//! ```text
//! { "command": ..., "config": ..., "status": "ok"|"error",
//!   "result"|"error": ..., "wall_time_s": ... }
//! ```
//!
//! The config echoes every parameter after defaults are applied, so the
//! envelope alone reproduces the run.  `wall_time_s` is the only field
//! excluded from byte-level reproducibility.  Exit codes: 0 success,
//! 2 invalid arguments, 3 resource budget exceeded, 4 numerical
//! validation failure (the residual is in the error body).

mod cmds;
mod emit;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{Map, Number, Value};

use cmds::{classify, failure_message, CmdResult, Failure, MmInit, OutputFormat, SampleKind};

/// Environment variable overriding the dense-workspace memory budget in
/// bytes for `fock` and `fermion` commands.
const BUDGET_ENV: &str = "PHASELAB_BUDGET_BYTES";

#[derive(Parser)]
#[command(
    name = "phaselab",
    version,
    about = "Complex structures on phase space, truncated Fock spaces, \
             exact theta-series arithmetic, and a 9-matrix classical model"
)]
struct Cli {
    /// Write the result to this path (temp file + atomic rename) instead
    /// of stdout.  Errors always go to stdout and leave the path alone.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Group,
}

#[derive(Subcommand)]
enum Group {
    /// Complex structures on R^{2n} and (R, S) block data of rotations.
    #[command(subcommand)]
    Moduli(ModuliCmd),
    /// Truncated bosonic Fock spaces: coherent states and squeezing.
    #[command(subcommand)]
    Fock(FockCmd),
    /// Fermionic Fock spaces and Bogoliubov vacua.
    #[command(subcommand)]
    Fermion(FermionCmd),
    /// Exact quarter-power series: partition counts and theta constants.
    #[command(subcommand)]
    Series(SeriesCmd),
    /// Classical dynamics of nine Hermitian matrices.
    #[command(subcommand)]
    Mm(MmCmd),
}

#[derive(Subcommand)]
enum ModuliCmd {
    /// Push the reference structure forward by a seeded random rotation.
    Sample {
        /// Number of complex dimensions (the structure acts on R^{2n}).
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Sample a Haar rotation, or a Haar unitary embedded in O(2n).
        #[arg(long, value_enum, default_value_t = SampleKind::Orthogonal)]
        kind: SampleKind,
    },
    /// Decide whether an orthogonal map is holomorphic (S block zero).
    CheckCr {
        #[arg(long)]
        n: usize,
        /// 2n x 2n matrix: inline JSON rows or a path to a JSON file.
        #[arg(long)]
        matrix: String,
        /// Holomorphy threshold on the S-block max norm.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Report both residual flavours for the (R, S) blocks of a map.
    RsResiduals {
        #[arg(long)]
        n: usize,
        /// 2n x 2n matrix: inline JSON rows or a path to a JSON file.
        #[arg(long, conflicts_with = "seed")]
        matrix: Option<String>,
        /// Draw a Haar rotation instead of reading a matrix.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum FockCmd {
    /// Build a truncated coherent state and report its residuals.
    Coherent {
        #[arg(long)]
        modes: usize,
        /// Per-mode occupation cutoff M (dimension (M+1)^modes).
        #[arg(long)]
        cutoff: usize,
        /// Labels, one per mode: JSON array of numbers or [re, im] pairs.
        #[arg(long)]
        z: String,
    },
    /// Quadrature check of the coherent-state resolution of identity.
    Resolution {
        #[arg(long)]
        modes: usize,
        #[arg(long)]
        cutoff: usize,
        /// Radial Gauss-Laguerre nodes per mode.
        #[arg(long, default_value_t = 64)]
        radial: usize,
        /// Equispaced angular nodes per mode.
        #[arg(long, default_value_t = 128)]
        angular: usize,
        /// Check the Gram block of occupations up to this value.
        #[arg(long)]
        k_max: usize,
        /// Fail (exit 4) if the max deviation exceeds this.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Single-mode squeezed vacuum and its quanta bookkeeping.
    Squeeze {
        /// Squeeze parameter; the vacuum carries sinh²r mean quanta.
        #[arg(long)]
        r: f64,
        #[arg(long)]
        cutoff: usize,
    },
}

#[derive(Subcommand)]
enum FermionCmd {
    /// Vacuum of the transformed modes for a seeded random rotation.
    Vacuum {
        /// Number of fermionic modes (dimension 2^n).
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Compare the null-space vacuum against the exponential pair form.
    Crosscheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum SeriesCmd {
    /// Coefficients of the distinct-partition product Π(1 + t^{2j}).
    Poincare {
        /// Truncation order in integer powers of t.
        #[arg(long)]
        order: u32,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Coefficients of a theta constant as a series in t^{1/4}.
    Theta {
        /// Which theta constant: 2, 3, or 4.
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=4))]
        which: u8,
        #[arg(long)]
        order: u32,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Verify the product identity between the partition generating
    /// function and theta constants, coefficient by coefficient.
    Verify {
        #[arg(long)]
        order: u32,
    },
}

#[derive(Subcommand)]
enum MmCmd {
    /// Integrate the equations of motion and report conservation data.
    Evolve {
        #[command(flatten)]
        source: MmSourceFlags,
        /// Leapfrog step; 0 is an exact no-op.
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        steps: usize,
        /// Record observables every this many steps.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// csv emits only the step,time,energy,tr_x_sq,gauss_norm table.
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Energy, Gauss norm, and tr X² of one configuration.
    Energy {
        #[command(flatten)]
        source: MmSourceFlags,
    },
}

#[derive(clap::Args)]
struct MmSourceFlags {
    /// Matrix size N (required for random initial data).
    #[arg(long = "N")]
    n_size: Option<usize>,
    /// Compactification radius entering the energy normalisation.
    #[arg(long, default_value_t = 1.0)]
    r11: f64,
    /// Seed for random initial data; conflicts with --config.
    #[arg(long)]
    seed: Option<u64>,
    /// Frobenius norm of each random position matrix.
    #[arg(long, default_value_t = 0.1)]
    scale: f64,
    /// How random initial velocities are scaled.
    #[arg(long, value_enum, default_value_t = MmInit::Confined)]
    init: MmInit,
    /// Initial data as inline JSON {"r11", "x", "v"} or a file path;
    /// matrix entries are numbers or [re, im] pairs.
    #[arg(long)]
    config: Option<String>,
}

impl MmSourceFlags {
    fn to_args(&self) -> cmds::MmSourceArgs {
        cmds::MmSourceArgs {
            n_size: self.n_size,
            r11: self.r11,
            seed: self.seed,
            scale: self.scale,
            init: self.init,
            config: self.config.clone(),
        }
    }
}

fn budget_from_env() -> Result<u128, Failure> {
    match std::env::var(BUDGET_ENV) {
        Ok(s) => s.trim().parse::<u128>().map_err(|_| {
            Failure::Usage(format!("{BUDGET_ENV} must be an unsigned integer, got {s:?}"))
        }),
        Err(std::env::VarError::NotPresent) => Ok(phaselab::fock_boson::DEFAULT_BUDGET_BYTES),
        Err(e) => Err(Failure::Usage(format!("cannot read {BUDGET_ENV}: {e}"))),
    }
}

/// Run the selected handler; returns (command name, resolved config,
/// outcome).  Commands that allocate dense spaces resolve the memory
/// budget from the environment first.
fn dispatch(cmd: &Group) -> (&'static str, Value, CmdResult) {
    fn tag(
        name: &'static str,
        (config, result): (Value, CmdResult),
    ) -> (&'static str, Value, CmdResult) {
        (name, config, result)
    }
    fn budgeted(
        name: &'static str,
        f: impl FnOnce(u128) -> (Value, CmdResult),
    ) -> (&'static str, Value, CmdResult) {
        match budget_from_env() {
            Ok(b) => tag(name, f(b)),
            Err(fail) => (name, Value::Object(Map::new()), Err(fail)),
        }
    }
    match cmd {
        Group::Moduli(m) => match m {
            ModuliCmd::Sample { n, seed, kind } => {
                tag("moduli sample", cmds::moduli_sample(*n, *seed, *kind))
            }
            ModuliCmd::CheckCr { n, matrix, tol } => {
                tag("moduli check-cr", cmds::moduli_check_cr(*n, matrix, *tol))
            }
            ModuliCmd::RsResiduals { n, matrix, seed } => tag(
                "moduli rs-residuals",
                cmds::moduli_rs_residuals(*n, matrix.as_deref(), *seed),
            ),
        },
        Group::Fock(f) => match f {
            FockCmd::Coherent { modes, cutoff, z } => budgeted("fock coherent", |b| {
                cmds::fock_coherent(*modes, *cutoff, z, b)
            }),
            FockCmd::Resolution {
                modes,
                cutoff,
                radial,
                angular,
                k_max,
                tol,
            } => budgeted("fock resolution", |b| {
                cmds::fock_resolution(*modes, *cutoff, *radial, *angular, *k_max, *tol, b)
            }),
            FockCmd::Squeeze { r, cutoff } => {
                budgeted("fock squeeze", |b| cmds::fock_squeeze(*r, *cutoff, b))
            }
        },
        Group::Fermion(f) => match f {
            FermionCmd::Vacuum { n, seed } => {
                budgeted("fermion vacuum", |b| cmds::fermion_vacuum(*n, *seed, b))
            }
            FermionCmd::Crosscheck { n, seed } => budgeted("fermion crosscheck", |b| {
                cmds::fermion_crosscheck(*n, *seed, b)
            }),
        },
        Group::Series(s) => match s {
            SeriesCmd::Poincare { order, format } => {
                tag("series poincare", cmds::series_poincare(*order, *format))
            }
            SeriesCmd::Theta {
                which,
                order,
                format,
            } => tag("series theta", cmds::series_theta(*which, *order, *format)),
            SeriesCmd::Verify { order } => tag("series verify", cmds::series_verify(*order)),
        },
        Group::Mm(m) => match m {
            MmCmd::Evolve {
                source,
                dt,
                steps,
                stride,
                format,
            } => tag(
                "mm evolve",
                cmds::mm_evolve(&source.to_args(), *dt, *steps, *stride, *format),
            ),
            MmCmd::Energy { source } => tag("mm energy", cmds::mm_energy(&source.to_args())),
        },
    }
}

fn envelope(
    command: &str,
    config: Value,
    status: &str,
    body_key: &str,
    body: Value,
    wall: f64,
) -> String {
    let mut map = Map::new();
    map.insert("command".into(), Value::String(command.into()));
    map.insert("config".into(), config);
    map.insert("status".into(), Value::String(status.into()));
    map.insert(body_key.into(), body);
    map.insert(
        "wall_time_s".into(),
        Number::from_f64(wall).map(Value::Number).unwrap_or(Value::Null),
    );
    let mut text = serde_json::to_string_pretty(&Value::Object(map)).expect("envelope serialises");
    text.push('\n');
    text
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let mut tmp_name = path.as_os_str().to_owned();
    tmp_name.push(format!(".tmp.{}", std::process::id()));
    let tmp = PathBuf::from(tmp_name);
    let fail = |e: std::io::Error| Failure::Usage(format!("cannot write {}: {e}", path.display()));
    std::fs::write(&tmp, bytes).map_err(fail)?;
    std::fs::rename(&tmp, path).map_err(fail)
}

fn main() {
    let cli = Cli::parse();
    let start = Instant::now();
    let (name, config, result) = dispatch(&cli.cmd);
    let wall = start.elapsed().as_secs_f64();

    let (text, code) = match result {
        Ok(cmds::Payload::Json(body)) => (
            envelope(name, config.clone(), "ok", "result", body, wall),
            0,
        ),
        Ok(cmds::Payload::Csv(table)) => (table, 0),
        Err(fail) => {
            let (code, kind, residual) = classify(&fail);
            let mut err = Map::new();
            err.insert("kind".into(), Value::String(kind.into()));
            err.insert("message".into(), Value::String(failure_message(&fail)));
            err.insert(
                "residual".into(),
                residual.map(emit::num17).unwrap_or(Value::Null),
            );
            let text = envelope(name, config, "error", "error", Value::Object(err), wall);
            print!("{text}");
            std::process::exit(code);
        }
    };

    match &cli.output {
        Some(path) => {
            if let Err(fail) = write_atomic(path, text.as_bytes()) {
                let (code, kind, _) = classify(&fail);
                let mut err = Map::new();
                err.insert("kind".into(), Value::String(kind.into()));
                err.insert("message".into(), Value::String(failure_message(&fail)));
                err.insert("residual".into(), Value::Null);
                print!(
                    "{}",
                    envelope(name, config, "error", "error", Value::Object(err), wall)
                );
                std::process::exit(code);
            }
        }
        None => print!("{text}"),
    }
    std::process::exit(code);
}
