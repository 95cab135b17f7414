mod action;
mod commands;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qfa_core::{Error, Result};
use serde_json::json;

use crate::report::Report;

#[derive(Parser, Debug)]
#[command(name = "qfa", version, about = "Exact checks for quasi-actions on trees and quasi-trees")]
struct Cli {
    /// Emit the JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Seed for generated inputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Four-point, tripod and bottleneck constants of a graph.
    Delta(DeltaArgs),
    /// Elliptic/hyperbolic classification of elements from orbit growth.
    Classify(ClassifyArgs),
    /// Cayley ball of the generating set of elements moving the base point by at most R.
    Cayley(CayleyArgs),
    /// Checks the Lipschitz and lower bounds of the orbit map on a Cayley ball.
    EmbedCheck(CayleyArgs),
    /// Word metrics on Z and the growth claim for a finite generating set.
    Propz(PropzArgs),
    /// Straightens a quasi-isometry from a graph to the line.
    Straighten(StraightenArgs),
    /// Defects, homogenization, and extraction of a quasicharacter from an action.
    Pseudochar(PseudocharArgs),
    /// Extends a quasicharacter from an index-2 subgroup.
    Extend2(Extend2Args),
    /// Reflection action of the infinite dihedral group on the line.
    Reflect(ReflectArgs),
    /// Elementary-matrix identities, or evaluation of an elementary word.
    Identities(IdentitiesArgs),
    /// Writes a determinant-1 integer matrix as a product of elementary matrices.
    Decompose(DecomposeArgs),
    /// Orbit-bound certificate for a tuple of elliptic generators.
    QfaCert(QfaCertArgs),
    /// Counts components outside balls of a tree.
    Bushy(BushyArgs),
    /// Ping-pong witness for two hyperbolic tree isometries.
    Pingpong(PingpongArgs),
}

#[derive(Args, Debug)]
pub struct DeltaArgs {
    /// Graph file.
    #[arg(long, conflicts_with = "random_tree")]
    pub input: Option<PathBuf>,
    /// Use a seeded random tree on this many vertices instead of a file.
    #[arg(long)]
    pub random_tree: Option<usize>,
    /// Split every edge into this many equal pieces first.
    #[arg(long, default_value_t = 1)]
    pub subdivide: usize,
    /// all, four-point, tripod or bottleneck.
    #[arg(long, default_value = "all")]
    pub method: String,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// Action file.
    #[arg(long)]
    pub input: PathBuf,
    /// `;`-separated words; every generator when omitted.
    #[arg(long)]
    pub element: Option<String>,
    /// Orbit length N.
    #[arg(long, default_value_t = 64)]
    pub window: usize,
    /// Base point overriding the file's.
    #[arg(long)]
    pub point: Option<String>,
}

#[derive(Args, Debug)]
pub struct CayleyArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Displacement bound R; the embedding threshold when omitted.
    #[arg(long)]
    pub radius: Option<String>,
    /// Radius of the Cayley ball over S.
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// Word length searched for elements of S.
    #[arg(long, default_value_t = 2)]
    pub s_depth: usize,
    #[arg(long)]
    pub point: Option<String>,
}

#[derive(Args, Debug)]
pub struct PropzArgs {
    /// Comma-separated generators; negatives are added.
    #[arg(long, allow_hyphen_values = true)]
    pub generators: String,
    /// The element N; the least admissible one when omitted.
    #[arg(long)]
    pub n: Option<i64>,
    #[arg(long, default_value_t = 10_000)]
    pub window: i64,
    #[arg(long, default_value_t = 48)]
    pub delta_window: i64,
    #[arg(long, default_value_t = 20)]
    pub k_max: usize,
}

#[derive(Args, Debug)]
pub struct StraightenArgs {
    /// Graph file.
    #[arg(long)]
    pub input: PathBuf,
    /// Lines `vertex value`.
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, default_value = "1")]
    pub r: String,
    /// The smallest valid constant at K = R when omitted.
    #[arg(long)]
    pub epsilon: Option<String>,
}

#[derive(Args, Debug)]
pub struct PseudocharArgs {
    /// Table of `n value` lines for a function on Z.
    #[arg(long, conflicts_with = "input")]
    pub table: Option<PathBuf>,
    /// Homogenize the table at this element.
    #[arg(long, requires = "table", allow_hyphen_values = true)]
    pub element: Option<i64>,
    /// Action file for extraction.
    #[arg(long, requires = "pi")]
    pub input: Option<PathBuf>,
    /// Hyperbolic element whose end is fixed.
    #[arg(long)]
    pub pi: Option<String>,
    /// `;`-separated elements to evaluate; the generators when omitted.
    #[arg(long)]
    pub sample: Option<String>,
    /// Homogenization length N.
    #[arg(long, default_value_t = 64)]
    pub window: u64,
    #[arg(long, default_value_t = 0)]
    pub conj_start: u64,
    #[arg(long, default_value_t = 4)]
    pub conj_len: u64,
    #[arg(long)]
    pub point: Option<String>,
}

#[derive(Args, Debug)]
pub struct Extend2Args {
    /// z (H = 2Z) or dihedral (H = rotations).
    #[arg(long, default_value = "z")]
    pub group: String,
    /// Lines `n value`: the value at n in 2Z, or at the rotation by n.
    #[arg(long)]
    pub table: PathBuf,
    /// The coset representative: an odd integer, or the reflection `x -> t - x`.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub t: i64,
    /// Sample elements with |n| at most this.
    #[arg(long, default_value_t = 10)]
    pub sample_radius: i64,
}

#[derive(Args, Debug)]
pub struct ReflectArgs {
    /// Lines `n f_t(n)` over rotations by n.
    #[arg(long)]
    pub table: PathBuf,
    /// The reflection `x -> t - x`.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub t: i64,
    /// Word length of the sampled elements.
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Sampled points are the integers in [-points, points].
    #[arg(long, default_value_t = 4)]
    pub points: i64,
}

#[derive(Args, Debug)]
pub struct IdentitiesArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub lambda_max: i64,
    /// Word length for the nilpotency sample.
    #[arg(long, default_value_t = 2)]
    pub nilpotent_depth: usize,
    /// Evaluate this elementary word file instead.
    #[arg(long)]
    pub eval: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    /// Matrix file.
    #[arg(long, conflicts_with = "random_length")]
    pub input: Option<PathBuf>,
    /// Use a seeded product of at most this many elementary factors instead.
    #[arg(long)]
    pub random_length: Option<usize>,
    /// Dimension of the seeded matrix.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Write the word here.
    #[arg(long)]
    pub word_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct QfaCertArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `;`-separated generating tuple.
    #[arg(long)]
    pub tuple: String,
    /// Powers |m| up to this enter the orbit radii.
    #[arg(long, default_value_t = 16)]
    pub window: i64,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    #[arg(long, default_value_t = 64)]
    pub classify_n: usize,
    #[arg(long)]
    pub point: Option<String>,
}

#[derive(Args, Debug)]
pub struct BushyArgs {
    /// Tree file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub b: String,
    #[arg(long, default_value_t = 0)]
    pub center: usize,
    /// Check every vertex whose ball stays inside the horizon.
    #[arg(long)]
    pub uniform: bool,
}

#[derive(Args, Debug)]
pub struct PingpongArgs {
    /// Tree file.
    #[arg(long)]
    pub input: PathBuf,
    /// Permutation file for the first isometry.
    #[arg(long)]
    pub a: PathBuf,
    /// Permutation file for the second isometry.
    #[arg(long)]
    pub b: PathBuf,
    /// Reduced words up to this length are checked.
    #[arg(long, default_value_t = 6)]
    pub words: usize,
    /// Two rays name the same end once they agree on this many vertices.
    #[arg(long, default_value_t = 3)]
    pub merge_depth: usize,
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

/// Rewrites parse errors as `path:line: message`.
pub fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { line, message } => Error::input(format!("{}:{line}: {message}", path.display())),
        other => other,
    })
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Delta(_) => "delta",
            Command::Classify(_) => "classify",
            Command::Cayley(_) => "cayley",
            Command::EmbedCheck(_) => "embed-check",
            Command::Propz(_) => "propz",
            Command::Straighten(_) => "straighten",
            Command::Pseudochar(_) => "pseudochar",
            Command::Extend2(_) => "extend2",
            Command::Reflect(_) => "reflect",
            Command::Identities(_) => "identities",
            Command::Decompose(_) => "decompose",
            Command::QfaCert(_) => "qfa-cert",
            Command::Bushy(_) => "bushy",
            Command::Pingpong(_) => "pingpong",
        }
    }

    fn run(&self, seed: u64) -> Result<Report> {
        match self {
            Command::Delta(a) => commands::delta(a, seed),
            Command::Classify(a) => commands::classify(a),
            Command::Cayley(a) => commands::cayley(a, false),
            Command::EmbedCheck(a) => commands::cayley(a, true),
            Command::Propz(a) => commands::propz(a),
            Command::Straighten(a) => commands::straighten(a),
            Command::Pseudochar(a) => commands::pseudochar(a),
            Command::Extend2(a) => commands::extend2(a),
            Command::Reflect(a) => commands::reflect(a),
            Command::Identities(a) => commands::identities(a),
            Command::Decompose(a) => commands::decompose(a, seed),
            Command::QfaCert(a) => commands::qfa_cert(a),
            Command::Bushy(a) => commands::bushy(a),
            Command::Pingpong(a) => commands::pingpong(a),
        }
    }
}

/// The arguments after the program name, minus `--out` and its value, so
/// that re-running them reproduces the report.
fn replay_argv(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--out" {
            skip = true;
        } else if !a.starts_with("--out=") {
            out.push(a.clone());
        }
    }
    out
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let name = cli.command.name();
    let config = json!({ "subcommand": name, "argv": replay_argv(&args[1..]) });
    let (code, body) = match cli.command.run(cli.seed) {
        Ok(Report::Done(result)) => (0, json!({ "result": result })),
        Ok(Report::Refused(reason)) => (2, json!({ "refusal": reason })),
        Err(Error::Contract(msg)) => (2, json!({ "refusal": { "reason": msg } })),
        Err(e) => {
            eprintln!("qfa {name}: {e}");
            return ExitCode::from(1);
        }
    };
    let mut envelope = json!({
        "tool": "qfa",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
    });
    envelope.as_object_mut().unwrap().extend(body.as_object().unwrap().clone());
    let text = if cli.json {
        serde_json::to_string_pretty(&envelope).unwrap() + "\n"
    } else {
        report::render_text(&envelope)
    };
    if code == 2 {
        eprintln!("qfa {name}: refused: {}", report::reason(&envelope));
    }
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("qfa {name}: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
