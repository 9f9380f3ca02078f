//! `ultramet`: exact ultrametric linear algebra from the command line.
//!
//! Every subcommand reads the JSON-shaped text formats from `ultramet::io`,
//! computes with exact arithmetic, and prints values in the same grammars it
//! accepts, so any printed value can be fed back in. `--json` switches stdout
//! to a machine envelope (see docs/report.schema.json).
//!
//! Exit codes: 0 = computed (negative certificates and refutations are
//! payloads, not failures), 2 = invalid input or grammar, 3 = precision
//! exhausted on the truncated-series backend, 4 = a mathematical hypothesis
//! of the requested operation does not hold. `verify` exits 1 when a suite
//! reports failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num::BigRational;
use serde_json::{json, Value};
use ultramet::gurarii::{
    check_perturbation, classify, disposition_extend, embed_into_universal, epsilon_isometry,
    isometric_eq, maximal_orthogonal_split, nonexistence_certificate, patch_isometry,
    shrinking_balls, Ambient, DispositionMode, GapOutcome, IsoEqOutcome, PerturbationVerdict,
};
use ultramet::magnitude::Magnitude;
use ultramet::scalar::FieldDescriptor;
use ultramet::space::{
    distance, extend_base, orthogonalize, t_defect, IsometryOutcome, LinearMap, Subspace, Vector,
    WeightedSpace,
};
use ultramet::verify::suites;
use ultramet::{io, Error};

#[derive(Parser)]
#[command(name = "ultramet", version, about = "Exact ultrametric normed spaces: bases, isometries, certificates")]
struct Cli {
    /// Print a machine-readable JSON envelope instead of text
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Padic,
    Hahn,
}

#[derive(Subcommand)]
enum Command {
    /// Weighted norm of each vector in a file
    Norm {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        vectors: PathBuf,
    },
    /// Reduce a list of vectors to an orthogonal echelon base
    Orth {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        vectors: PathBuf,
    },
    /// Exact distance from each vector to a subspace, with a witness
    Dist {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        subspace: PathBuf,
    },
    /// Largest t such that the list is t-orthogonal
    Defect {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        vectors: PathBuf,
    },
    /// Extend a t-orthogonal list to a base of the space (or of a subspace)
    ExtendBase {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        vectors: PathBuf,
        /// Subspace to extend inside; whole space when omitted
        #[arg(long)]
        within: Option<PathBuf>,
        /// Requested orthogonality level in (0, 1], a magnitude
        #[arg(long, default_value = "1")]
        t: String,
    },
    /// Operator norm of the linear map defined by base and image files
    Opnorm {
        #[arg(long)]
        space: PathBuf,
        /// Domain base vectors; unit base when omitted
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long)]
        images: PathBuf,
        /// Codomain space; domain space when omitted
        #[arg(long)]
        codomain: Option<PathBuf>,
    },
    /// Certify that a map preserves every norm, or refute it with a witness
    CertifyIsometry {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        codomain: Option<PathBuf>,
    },
    /// Extend an embedded subspace by one vector, (1 +/- eps)-isometrically
    EpsIso {
        /// Current stage, used as the ambient
        #[arg(long)]
        space: PathBuf,
        /// Embedded subspace of the stage
        #[arg(long)]
        subspace: PathBuf,
        /// Rational in (0, 1), e.g. 1/4
        #[arg(long)]
        epsilon: String,
    },
    /// Certificate that no vector can attain norms near s within a gap of
    /// the attained value set (a negative result is still exit 0)
    CertifyGap {
        /// Stage whose attained norms are analyzed; a standard line over the
        /// chosen field when omitted
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
        /// Truncation order for the series backend, a rational
        #[arg(long)]
        tail_order: Option<String>,
        /// Target norm, a rational, e.g. 3/4
        #[arg(long)]
        s: String,
        #[arg(long)]
        epsilon: String,
    },
    /// Patch a partial isometry j against a full map f with ||j - f|| < 1
    Patch {
        /// Domain space of both maps
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        codomain: PathBuf,
        /// Base of j's domain subspace
        #[arg(long)]
        j_base: PathBuf,
        #[arg(long)]
        j_images: PathBuf,
        /// Base of f's domain; unit base when omitted
        #[arg(long)]
        f_base: Option<PathBuf>,
        #[arg(long)]
        f_images: PathBuf,
    },
    /// Split a subspace Y as X + complement with the complement orthogonal to X
    Split {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        x: PathBuf,
    },
    /// Check the small-perturbation hypotheses and certify norm carry-over
    PerturbCheck {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        xs: PathBuf,
        #[arg(long)]
        zs: PathBuf,
        /// Orthogonality level in (0, 1], a magnitude
        #[arg(long)]
        t: String,
    },
    /// Embed a space isometrically into the growing universal space
    EmbedEu {
        #[arg(long)]
        space: PathBuf,
        /// Subspace to embed; the whole space when omitted
        #[arg(long)]
        subspace: PathBuf,
        /// Weight-density radius in (1/2, 1), a rational
        #[arg(long)]
        r: Option<String>,
    },
    /// Extend an embedding j: X -> stage to all of Y, exactly or approx-then-patch
    Extend {
        /// Current stage, used as the ambient
        #[arg(long)]
        stage: PathBuf,
        /// Space Y containing the subspace; the stage file when omitted
        #[arg(long)]
        space: Option<PathBuf>,
        /// Subspace X of Y whose embedding is already known
        #[arg(long)]
        subspace: PathBuf,
        /// Images of X's reduced base under j; X's own base when omitted
        #[arg(long)]
        images: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "direct")]
        mode: ExtendMode,
        /// Approx mode: how many leading coordinates the substage keeps
        #[arg(long)]
        substage_dim: Option<usize>,
        /// Approx mode: precision level in (0, 1], a magnitude
        #[arg(long, default_value = "1")]
        t: String,
    },
    /// Compare two spaces: fingerprints, then a witness or an obstruction
    Classify {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        other: PathBuf,
    },
    /// Worked constructions
    Demo {
        #[command(subcommand)]
        demo: DemoCommand,
    },
    /// Run the named verification suites and write a report file
    Verify {
        /// Suite name, or "all"
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        cases: u64,
        /// Report file path
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExtendMode {
    Direct,
    Approx,
}

#[derive(Subcommand)]
enum DemoCommand {
    /// A strictly shrinking nested ball chain with empty intersection
    ShrinkingBalls {
        #[arg(long, default_value_t = 2)]
        prime: u64,
        #[arg(long, value_enum, default_value = "padic")]
        backend: BackendArg,
        #[arg(long)]
        tail_order: Option<String>,
        /// Number of balls
        #[arg(long, default_value_t = 50)]
        cases: usize,
        /// Optional radius stream: a JSON array of magnitude strings
        #[arg(long)]
        stream: Option<PathBuf>,
    },
}

struct Outcome {
    human: String,
    result: Value,
    exit: u8,
}

impl Outcome {
    fn ok(human: String, result: Value) -> Self {
        Outcome { human, result, exit: 0 }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = command_name(&cli.command);
    match run(&cli.command) {
        Ok(out) => {
            if cli.json {
                emit(&pretty(&envelope_ok(command, out.result)));
            } else {
                emit(&out.human);
            }
            ExitCode::from(out.exit)
        }
        Err(e) => {
            let exit = exit_class(&e);
            if cli.json {
                emit(&pretty(&envelope_err(command, &e, exit)));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(exit)
        }
    }
}

/// Prints to stdout, exiting quietly if the downstream pipe has closed.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{text}").and_then(|()| out.flush()).is_err() {
        std::process::exit(0);
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Norm { .. } => "norm",
        Command::Orth { .. } => "orth",
        Command::Dist { .. } => "dist",
        Command::Defect { .. } => "defect",
        Command::ExtendBase { .. } => "extend-base",
        Command::Opnorm { .. } => "opnorm",
        Command::CertifyIsometry { .. } => "certify-isometry",
        Command::EpsIso { .. } => "eps-iso",
        Command::CertifyGap { .. } => "certify-gap",
        Command::Patch { .. } => "patch",
        Command::Split { .. } => "split",
        Command::PerturbCheck { .. } => "perturb-check",
        Command::EmbedEu { .. } => "embed-eu",
        Command::Extend { .. } => "extend",
        Command::Classify { .. } => "classify",
        Command::Demo { demo: DemoCommand::ShrinkingBalls { .. } } => "demo shrinking-balls",
        Command::Verify { .. } => "verify",
    }
}

/// 2 = the request is malformed or internally inconsistent; 3 = the series
/// backend ran out of known terms; 4 = well-formed input whose mathematical
/// hypothesis fails.
fn exit_class(e: &Error) -> u8 {
    match e {
        Error::PrecisionExhausted { .. } => 3,
        Error::DefectBelowThreshold { .. }
        | Error::NotDenselyValued
        | Error::OperatorNormNotBelowOne { .. }
        | Error::NotImmediate { .. }
        | Error::HypothesisFailed { .. }
        | Error::InvalidStream { .. }
        | Error::NotInValueGroup { .. }
        | Error::EmptyIntersection { .. }
        | Error::IntervalTooShort { .. }
        | Error::AllocatorExhausted => 4,
        _ => 2,
    }
}

fn class_name(exit: u8) -> &'static str {
    match exit {
        3 => "precision",
        4 => "hypothesis",
        _ => "input",
    }
}

fn envelope_ok(command: &str, result: Value) -> Value {
    json!({
        "tool": "ultramet",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "status": "ok",
        "result": result,
    })
}

fn envelope_err(command: &str, e: &Error, exit: u8) -> Value {
    json!({
        "tool": "ultramet",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "status": "error",
        "error": { "class": class_name(exit), "exit": exit, "message": e.to_string() },
    })
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values print")
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("library types serialize")
}

fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_space(path: &Path) -> Result<WeightedSpace, Error> {
    io::parse_space(&read_text(path)?)
}

fn load_vectors(path: &Path, space: &WeightedSpace) -> Result<Vec<Vector>, Error> {
    io::parse_vectors(&read_text(path)?, space)
}

fn load_subspace(path: &Path, space: &WeightedSpace) -> Result<Subspace, Error> {
    io::parse_subspace(&read_text(path)?, space)
}

fn parse_rational(what: &'static str, s: &str) -> Result<BigRational, Error> {
    BigRational::from_str(s).map_err(|e| Error::Parse {
        what,
        input: s.to_string(),
        reason: e.to_string(),
    })
}

fn parse_level(s: &str) -> Result<Magnitude, Error> {
    s.parse()
}

/// The whole space as a subspace, spanned by the unit vectors.
fn whole(space: &WeightedSpace) -> Result<Subspace, Error> {
    let units = (0..space.dim()).map(|i| space.unit(i)).collect();
    Subspace::new(space.clone(), units)
}

/// Builds the map sending `base` to `images` after loading both files;
/// `base = None` means the domain's unit base.
fn load_map(
    space: &WeightedSpace,
    base: Option<&PathBuf>,
    images: &Path,
    codomain: &WeightedSpace,
) -> Result<LinearMap, Error> {
    let base = match base {
        Some(p) => load_vectors(p, space)?,
        None => (0..space.dim()).map(|i| space.unit(i)).collect(),
    };
    let images = load_vectors(images, codomain)?;
    LinearMap::new(space.clone(), base, images, codomain.clone())
}

fn run(c: &Command) -> Result<Outcome, Error> {
    match c {
        Command::Norm { space, vectors } => {
            let space = load_space(space)?;
            let vectors = load_vectors(vectors, &space)?;
            let norms: Vec<Magnitude> =
                vectors.iter().map(|v| space.norm(v)).collect::<Result<_, _>>()?;
            let human =
                norms.iter().map(Magnitude::to_string).collect::<Vec<_>>().join("\n");
            Ok(Outcome::ok(human, json!({ "norms": norms })))
        }
        Command::Orth { space, vectors } => {
            let space = load_space(space)?;
            let vectors = load_vectors(vectors, &space)?;
            let orth = orthogonalize(&space, &vectors)?;
            let human = format!(
                "base of {} vectors on pivots {:?}, {} input vectors dropped\n{}",
                orth.base.len(),
                orth.pivots,
                orth.dropped.len(),
                io::vectors_json(&orth.base),
            );
            Ok(Outcome::ok(human, to_value(&orth)))
        }
        Command::Dist { space, vectors, subspace } => {
            let space = load_space(space)?;
            let vectors = load_vectors(vectors, &space)?;
            let sub = load_subspace(subspace, &space)?;
            let results = vectors
                .iter()
                .map(|v| distance(v, &sub))
                .collect::<Result<Vec<_>, _>>()?;
            let human = results
                .iter()
                .map(|r| format!("distance {}", r.distance))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Outcome::ok(human, json!({ "results": results })))
        }
        Command::Defect { space, vectors } => {
            let space = load_space(space)?;
            let vectors = load_vectors(vectors, &space)?;
            let cert = t_defect(&space, &vectors)?;
            let human = format!("t* = {}", cert.level);
            Ok(Outcome::ok(human, to_value(&cert)))
        }
        Command::ExtendBase { space, vectors, within, t } => {
            let space = load_space(space)?;
            let vectors = load_vectors(vectors, &space)?;
            let within = within.as_ref().map(|p| load_subspace(p, &space)).transpose()?;
            let t = parse_level(t)?;
            let ext = extend_base(&space, &vectors, within.as_ref(), &t)?;
            let human = format!(
                "extended {} vectors to {} at level {}\n{}",
                ext.prefix_len,
                ext.vectors.len(),
                ext.certificate.level,
                io::vectors_json(&ext.vectors),
            );
            Ok(Outcome::ok(human, to_value(&ext)))
        }
        Command::Opnorm { space, base, images, codomain } => {
            let space = load_space(space)?;
            let codomain = match codomain {
                Some(p) => load_space(p)?,
                None => space.clone(),
            };
            let map = load_map(&space, base.as_ref(), images, &codomain)?;
            let norm = map.operator_norm()?;
            Ok(Outcome::ok(format!("operator norm {norm}"), json!({ "norm": norm })))
        }
        Command::CertifyIsometry { space, base, images, codomain } => {
            let space = load_space(space)?;
            let codomain = match codomain {
                Some(p) => load_space(p)?,
                None => space.clone(),
            };
            let map = load_map(&space, base.as_ref(), images, &codomain)?;
            let outcome = map.certify_isometry()?;
            let human = match &outcome {
                IsometryOutcome::Certified(_) => "isometry certified".to_string(),
                IsometryOutcome::Refuted(r) => format!("refuted:\n{}", pretty(&to_value(r))),
            };
            Ok(Outcome::ok(human, to_value(&outcome)))
        }
        Command::EpsIso { space, subspace, epsilon } => {
            let stage = load_space(space)?;
            let x = load_subspace(subspace, &stage)?;
            let eps = parse_rational("epsilon", epsilon)?;
            let mut a = Ambient::over(stage.field().clone(), stage.weights().to_vec())?;
            let base = x.reduced()?.base.clone();
            let i = LinearMap::new(stage.clone(), base.clone(), base, stage.clone())?;
            let report = epsilon_isometry(&mut a, &x, &i, &eps)?;
            let human = format!(
                "extended within (1 - {eps}, 1 + {eps}): ratios in [{}, {}], level {}",
                report.lower, report.upper, report.t,
            );
            Ok(Outcome::ok(human, to_value(&report)))
        }
        Command::CertifyGap { space, prime, backend, tail_order, s, epsilon } => {
            let e = gap_stage(space.as_deref(), *prime, *backend, tail_order.as_deref())?;
            let s1 = Magnitude::from_rational(&parse_rational("s", s)?)?;
            let eps = parse_rational("epsilon", epsilon)?;
            let outcome = nonexistence_certificate(&e, &s1, &eps)?;
            let human = match &outcome {
                GapOutcome::Certificate(cert) => format!(
                    "gap ({}, {}) excludes [{}, {}]\n{}",
                    cert.gap.0, cert.gap.1, cert.interval.0, cert.interval.1,
                    pretty(&to_value(cert)),
                ),
                GapOutcome::NoGap { blocking } => {
                    format!("no gap: the value set attains {blocking} inside the interval")
                }
            };
            Ok(Outcome::ok(human, to_value(&outcome)))
        }
        Command::Patch { space, codomain, j_base, j_images, f_base, f_images } => {
            let space = load_space(space)?;
            let codomain = load_space(codomain)?;
            let j = load_map(&space, Some(j_base), j_images, &codomain)?;
            let f = load_map(&space, f_base.as_ref(), f_images, &codomain)?;
            let res = patch_isometry(&j, &f)?;
            let human = format!(
                "patched at t = {}; isometry certified on {} base vectors",
                res.t,
                res.certificate.base_norms.len(),
            );
            Ok(Outcome::ok(human, to_value(&res)))
        }
        Command::Split { space, y, x } => {
            let space = load_space(space)?;
            let y = load_subspace(y, &space)?;
            let x = load_subspace(x, &space)?;
            let res = maximal_orthogonal_split(&y, &x)?;
            let human = format!(
                "prefix of {} vectors, complement of {}\n{}",
                res.prefix,
                res.complement.span().len(),
                io::vectors_json(res.complement.span()),
            );
            Ok(Outcome::ok(human, to_value(&res)))
        }
        Command::PerturbCheck { space, xs, zs, t } => {
            let space = load_space(space)?;
            let xs = load_vectors(xs, &space)?;
            let zs = load_vectors(zs, &space)?;
            let t = parse_level(t)?;
            let verdict = check_perturbation(&space, &xs, &zs, &t)?;
            // an unmet hypothesis is reported in full but exits 4 so scripts
            // can separate "certified" from "your instance does not qualify"
            let (human, exit) = match &verdict {
                PerturbationVerdict::Certified { norms, defect } => (
                    format!(
                        "certified: {} norm pairs carry over, defect {}",
                        norms.len(),
                        defect.level,
                    ),
                    0,
                ),
                PerturbationVerdict::ReferenceNotOrthogonal { level, needed } => (
                    format!("reference list not orthogonal: level {level}, needed {needed}"),
                    4,
                ),
                PerturbationVerdict::HypothesisFailed { index, gap, bound } => (
                    format!("hypothesis fails at vector {index}: ||x - z|| = {gap} is not below {bound}"),
                    4,
                ),
            };
            Ok(Outcome { human, result: to_value(&verdict), exit })
        }
        Command::EmbedEu { space, subspace, r } => {
            let e_space = load_space(space)?;
            let e = load_subspace(subspace, &e_space)?;
            let r = r
                .as_deref()
                .map(|s| Magnitude::from_rational(&parse_rational("r", s)?))
                .transpose()?;
            let mut a = Ambient::universal(e_space.field().clone(), r)?;
            let res = embed_into_universal(&e, &mut a)?;
            let human = format!(
                "embedded {} directions into stage of dimension {}; isometry certified",
                res.steps.len(),
                a.dim(),
            );
            Ok(Outcome::ok(human, to_value(&res)))
        }
        Command::Extend { stage, space, subspace, images, mode, substage_dim, t } => {
            let stage_space = load_space(stage)?;
            let y_space = match space {
                Some(p) => load_space(p)?,
                None => stage_space.clone(),
            };
            let x = load_subspace(subspace, &y_space)?;
            let base = x.reduced()?.base.clone();
            let j_images = match images {
                Some(p) => load_vectors(p, &stage_space)?,
                None => base.clone(),
            };
            let j = LinearMap::new(y_space.clone(), base, j_images, stage_space.clone())?;
            let mode = match mode {
                ExtendMode::Direct => DispositionMode::Direct,
                ExtendMode::Approx => DispositionMode::ApproxThenPatch {
                    substage_dim: substage_dim.ok_or(Error::Parse {
                        what: "substage dimension",
                        input: String::new(),
                        reason: "--mode approx needs --substage-dim".into(),
                    })?,
                    t: parse_level(t)?,
                },
            };
            let mut a = Ambient::over(stage_space.field().clone(), stage_space.weights().to_vec())?;
            let res = disposition_extend(&mut a, &x, &j, &mode)?;
            let human = format!(
                "extended to the whole space: {} fresh coordinates, stage now {}-dimensional; agreement on X verified",
                res.allocated.len(),
                a.dim(),
            );
            Ok(Outcome::ok(human, to_value(&res)))
        }
        Command::Classify { space, other } => {
            let left_space = load_space(space)?;
            let right_space = load_space(other)?;
            let left = whole(&left_space)?;
            let right = whole(&right_space)?;
            let left_fp = classify(&left)?;
            let right_fp = classify(&right)?;
            let outcome = isometric_eq(&left, &right)?;
            let human = match &outcome {
                IsoEqOutcome::Isometric { .. } => "isometric; witness certified".to_string(),
                IsoEqOutcome::Distinct(ob) => format!("distinct:\n{}", pretty(&to_value(ob))),
            };
            Ok(Outcome::ok(
                human,
                json!({ "left": left_fp, "right": right_fp, "outcome": outcome }),
            ))
        }
        Command::Demo { demo: DemoCommand::ShrinkingBalls { prime, backend, tail_order, cases, stream } } => {
            let field = descriptor(*prime, *backend, tail_order.as_deref())?;
            let stream = stream
                .as_deref()
                .map(|p| -> Result<Vec<Magnitude>, Error> {
                    let names: Vec<String> = serde_json::from_str(&read_text(p)?)
                        .map_err(|e| Error::Json(e.to_string()))?;
                    names.iter().map(|s| s.parse()).collect()
                })
                .transpose()?;
            let mut a = Ambient::over(field, Vec::new())?;
            let report = shrinking_balls(&mut a, stream, *cases)?;
            let human = format!(
                "{} balls, {} nesting checks, nested: {}\n{}",
                report.steps.len(),
                report.checks.len(),
                report.all_nested,
                report.note,
            );
            Ok(Outcome::ok(human, to_value(&report)))
        }
        Command::Verify { suite, seed, cases, out } => {
            let reports = if suite == "all" {
                suites::run_all(*seed, *cases)?
            } else {
                vec![suites::run_suite(suite, *seed, *cases)?]
            };
            let body = serde_json::to_string_pretty(&reports).expect("reports serialize");
            fs::write(out, body).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
            let mut lines: Vec<String> = reports
                .iter()
                .map(|r| {
                    format!(
                        "suite {}: {}/{} passed ({} ms)",
                        r.suite, r.passed, r.cases, r.wall_ms,
                    )
                })
                .collect();
            let all = reports.iter().all(|r| r.all_passed());
            lines.push(format!("report written to {}", out.display()));
            Ok(Outcome {
                human: lines.join("\n"),
                result: to_value(&reports),
                exit: if all { 0 } else { 1 },
            })
        }
    }
}

fn descriptor(
    prime: u64,
    backend: BackendArg,
    tail_order: Option<&str>,
) -> Result<FieldDescriptor, Error> {
    match backend {
        BackendArg::Padic => match tail_order {
            None => FieldDescriptor::padic(prime),
            Some(t) => Err(Error::Parse {
                what: "field flags",
                input: t.to_string(),
                reason: "--tail-order applies to the hahn backend only".into(),
            }),
        },
        BackendArg::Hahn => match tail_order {
            None => FieldDescriptor::hahn(prime),
            Some(t) => FieldDescriptor::hahn_with_tail(prime, parse_rational("tail order", t)?),
        },
    }
}

/// The stage for `certify-gap`: a space file if given (any field flags must
/// agree with it), otherwise a standard line over the flag-described field.
fn gap_stage(
    space: Option<&Path>,
    prime: Option<u64>,
    backend: Option<BackendArg>,
    tail_order: Option<&str>,
) -> Result<WeightedSpace, Error> {
    match space {
        Some(path) => {
            let e = load_space(path)?;
            if let Some(p) = prime {
                if e.field().prime() != p {
                    return Err(Error::FieldMismatch {
                        expected: e.field().to_string(),
                        got: format!("--prime {p}"),
                    });
                }
            }
            Ok(e)
        }
        None => {
            let p = prime.ok_or(Error::Parse {
                what: "field flags",
                input: String::new(),
                reason: "need --space or --prime".into(),
            })?;
            let field = descriptor(p, backend.unwrap_or(BackendArg::Padic), tail_order)?;
            Ok(WeightedSpace::standard(field, 1))
        }
    }
}
