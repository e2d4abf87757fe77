//! The `cmk` command line.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cone_metric_core::catalog::{self, ContractionKind, KindTag, PowerParams, Quantifier};
use cone_metric_core::equiv::{self, phi_operator_bound, psi_from_phi, psi_is_decreasing, MinNormProblem};
use cone_metric_core::fixedpoint::{self, affine_operator_norm};
use cone_metric_core::space::{self, GenSpec};
use cone_metric_core::suite::{self, SuiteConfig};
use cone_metric_core::{Cone, FiniteConeMetricSpace, Norm, SelfMap, SolverConfig};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::KitError;
use crate::formats::{self, SpaceJson};
use crate::parallel;
use crate::report::{self, document};

/// Slack allowed in `d ≤ ‖D‖` and in the monotone equality.
const SANDWICH_TOL: f64 = 1e-9;
/// Slack allowed in `ψ(t) ≤ t‖φ‖`.
const PSI_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "cmk", version, about = "Cone metric spaces: equivalent metrics, contractive conditions, fixed points")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Solver tolerance (also the stop tolerance of `fixpoint` on affine maps).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Iteration budget of the iterative solvers.
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Grid spacing of the brute-force oracle.
    #[arg(long, global = true)]
    pub grid_resolution: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the cone metric axioms of a space file.
    Validate {
        #[arg(long)]
        space: PathBuf,
    },
    /// Generate a random space file.
    Gen {
        #[arg(long)]
        seed: u64,
        /// Cone file; a random cone of dimension 2–4 when omitted.
        #[arg(long)]
        cone: Option<PathBuf>,
        /// Norm file; a random norm when omitted.
        #[arg(long)]
        norm: Option<PathBuf>,
        #[arg(long)]
        points: Option<usize>,
        /// Number of cone directions combined into `D`.
        #[arg(long)]
        directions: Option<usize>,
    },
    /// Compute the equivalent metric table.
    Equiv {
        #[arg(long)]
        space: PathBuf,
        /// Add brute-force oracle columns (cone dimension ≤ 3).
        #[arg(long)]
        oracle: bool,
    },
    /// Check a contractive condition on both sides.
    Check {
        #[command(flatten)]
        kind: KindArgs,
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
    /// Minimal constants of a contractive condition.
    Minconst {
        #[command(flatten)]
        kind: KindArgs,
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        map: PathBuf,
        /// Coefficient direction for multi-coefficient kinds on the cone side.
        #[arg(long, value_delimiter = ',')]
        direction: Option<Vec<f64>>,
    },
    /// Randomized transfer check over the catalog.
    TransferSuite {
        /// Holding instances per kind.
        #[arg(long, default_value_t = 500)]
        seeds: usize,
        /// Comma-separated kind names, or `all`.
        #[arg(long, default_value = "all")]
        kinds: String,
        #[arg(long)]
        seed: u64,
    },
    /// Picard iteration under the equivalent metric.
    Fixpoint {
        /// Space file; omit for affine maps.
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long)]
        map: PathBuf,
        /// Start label (tabulated) or comma-separated vector (affine).
        #[arg(long)]
        x0: Option<String>,
        /// Norm file for affine maps; Euclidean when omitted.
        #[arg(long)]
        norm: Option<PathBuf>,
        /// Include every iterate and bound.
        #[arg(long)]
        trace: bool,
    },
    /// The radial majorant ψ of a map φ.
    Psi {
        #[arg(long)]
        phi: PathBuf,
        /// Cone file.
        #[arg(long)]
        cone: PathBuf,
        /// Norm file; Euclidean when omitted.
        #[arg(long)]
        norm: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,1,2,10")]
        t: Vec<f64>,
        /// Sampled directions for nonlinear φ.
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Kind selection and coefficients. Named flags fill the coefficient list
/// in the kind's order; `--coef` gives it directly.
#[derive(Debug, Args)]
pub struct KindArgs {
    #[arg(long)]
    pub kind: String,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Constant of the power-pair kind.
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub coef: Option<Vec<f64>>,
    /// Power-pair exponent on `x`.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Power-pair exponent on `y`.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Power-pair quantifier: `forall` or `exists`.
    #[arg(long, default_value = "forall")]
    pub mode: String,
}

impl KindArgs {
    pub fn tag(&self) -> Result<KindTag, KitError> {
        KindTag::from_name(&self.kind).ok_or_else(|| {
            let names: Vec<_> = KindTag::ALL.iter().map(|t| t.name()).collect();
            KitError::Usage(format!("unknown kind `{}`; expected one of {}", self.kind, names.join(", ")))
        })
    }

    pub fn power(&self) -> Result<PowerParams, KitError> {
        let mode = match self.mode.as_str() {
            "forall" => Quantifier::ForAll,
            "exists" => Quantifier::Exists,
            other => return Err(KitError::Usage(format!("unknown mode `{other}`"))),
        };
        Ok(PowerParams {
            m: self.m,
            n: self.n,
            mode,
        })
    }

    pub fn contraction(&self) -> Result<ContractionKind, KitError> {
        let tag = self.tag()?;
        let coefficients = match &self.coef {
            Some(c) => c.clone(),
            None => {
                let need = |v: Option<f64>, flag: &str| {
                    v.ok_or_else(|| KitError::Usage(format!("kind `{}` needs --{flag} (or --coef)", tag.name())))
                };
                match tag {
                    KindTag::Banach | KindTag::ChoiceA => vec![need(self.alpha, "alpha")?],
                    KindTag::ChoiceB | KindTag::ChoiceC => vec![need(self.beta, "beta")?],
                    KindTag::Kannan | KindTag::Chatterjea | KindTag::QuasiMax => vec![need(self.lambda, "lambda")?],
                    KindTag::CrossPair | KindTag::SelfPair => {
                        vec![need(self.alpha, "alpha")?, need(self.beta, "beta")?]
                    }
                    KindTag::PowerPair => vec![need(self.k, "k")?],
                    KindTag::HardyRogers | KindTag::HardySym => {
                        return Err(KitError::Usage(format!("kind `{}` needs --coef", tag.name())))
                    }
                }
            }
        };
        Ok(ContractionKind::new(tag, coefficients, self.power()?)?)
    }
}

/// Rendered output and exit status of one command.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Cli {
    fn solver(&self) -> Result<SolverConfig, KitError> {
        let mut cfg = SolverConfig::default();
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        if let Some(m) = self.max_iter {
            cfg.max_iter = m;
        }
        if let Some(g) = self.grid_resolution {
            cfg.grid_resolution = g;
        }
        cfg.validate().map_err(|e| KitError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

fn emit(format: Format, command: &str, body: Value, text: impl FnOnce() -> String, ok: bool) -> Outcome {
    let stdout = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&document(command, body)).expect("JSON values serialize");
            s.push('\n');
            s
        }
        Format::Text => text(),
    };
    Outcome {
        stdout,
        code: if ok { 0 } else { 1 },
    }
}

fn matrix_text(labels: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    let w = labels.iter().map(|l| l.len()).max().unwrap_or(1).max(4);
    out.push_str(&format!("{:w$}", ""));
    for l in labels {
        out.push_str(&format!(" {:>12}", l));
    }
    out.push('\n');
    for (l, row) in labels.iter().zip(rows) {
        out.push_str(&format!("{l:w$}"));
        for x in row {
            out.push_str(&format!(" {x:>12.6}"));
        }
        out.push('\n');
    }
    out
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome, KitError> {
    let cfg = cli.solver()?;
    let fmt = cli.format;
    match &cli.command {
        Command::Validate { space } => validate(fmt, space),
        Command::Gen {
            seed,
            cone,
            norm,
            points,
            directions,
        } => gen(fmt, *seed, cone.as_deref(), norm.as_deref(), *points, *directions),
        Command::Equiv { space, oracle } => equiv_cmd(fmt, space, *oracle, &cfg),
        Command::Check { kind, space, map } => check(fmt, kind, space, map, &cfg),
        Command::Minconst {
            kind,
            space,
            map,
            direction,
        } => minconst(fmt, kind, space, map, direction.as_deref(), &cfg),
        Command::TransferSuite { seeds, kinds, seed } => transfer_suite(fmt, *seeds, kinds, *seed, &cfg),
        Command::Fixpoint {
            space,
            map,
            x0,
            norm,
            trace,
        } => fixpoint_cmd(fmt, space.as_deref(), map, x0.as_deref(), norm.as_deref(), *trace, cli.tol, &cfg),
        Command::Psi {
            phi,
            cone,
            norm,
            t,
            samples,
            seed,
        } => psi(fmt, phi, cone, norm.as_deref(), t, *samples, *seed),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Usage errors come back as `KitError::Usage` carrying clap's message.
pub fn run_args<I, S>(args: I) -> Result<Outcome, KitError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| KitError::Usage(e.to_string()))?;
    run(&cli)
}

fn validate(fmt: Format, path: &Path) -> Result<Outcome, KitError> {
    let space = formats::load_space(path)?;
    let r = space.validate_axioms(cone_metric_core::cone::DEFAULT_TOL);
    let valid = r.is_valid();
    let violations: Vec<String> = r.violations.iter().map(|v| v.to_string()).collect();
    let body = json!({
        "status": if valid { "valid" } else { "invalid" },
        "valid": valid,
        "points": space.len(),
        "dim": space.cone().dim(),
        "violations": violations,
        "within_tolerance": r.within_tolerance,
    });
    Ok(emit(
        fmt,
        "validate",
        body,
        || {
            let mut s = String::from(if valid { "valid\n" } else { "invalid\n" });
            for v in &violations {
                s.push_str(&format!("  {v}\n"));
            }
            s
        },
        valid,
    ))
}

fn gen(
    fmt: Format,
    seed: u64,
    cone: Option<&Path>,
    norm: Option<&Path>,
    points: Option<usize>,
    directions: Option<usize>,
) -> Result<Outcome, KitError> {
    let space = if cone.is_none() && norm.is_none() && points.is_none() && directions.is_none() {
        suite::generated_space(seed)?
    } else {
        let mut r = cone_metric_core::rng::rng_from_seed(cone_metric_core::rng::split(seed, 0xC1));
        let cone = match cone {
            Some(p) => formats::load_cone(p)?,
            None => {
                let dim = 2 + (cone_metric_core::rng::split(seed, 0xC2) % 3) as usize;
                suite::random_cone(&mut r, dim)
            }
        };
        let norm = match norm {
            Some(p) => formats::load_norm(p)?,
            None => suite::random_norm(&mut r, cone.dim()),
        };
        space::generate_random_space(&GenSpec {
            seed,
            n_points: points.unwrap_or(5),
            cone,
            norm,
            interior_directions: directions.unwrap_or(2),
        })?
    };
    let mut file = SpaceJson::from_space(&space);
    file.schema = Some(report::SCHEMA.into());
    let stdout = match fmt {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&file).expect("space files serialize");
            s.push('\n');
            s
        }
        Format::Text => format!(
            "{} points, {:?} cone of dimension {}, {:?} norm\n",
            space.len(),
            space.cone().kind(),
            space.cone().dim(),
            space.norm()
        ),
    };
    Ok(Outcome { stdout, code: 0 })
}

fn equiv_cmd(fmt: Format, path: &Path, oracle: bool, cfg: &SolverConfig) -> Result<Outcome, KitError> {
    let space = formats::load_space(path)?;
    let table = equiv::equivalent_metric_table(&space, cfg)?;
    let norm_d = space.norm_table();
    let n = space.len();
    let sandwich_ok = (0..n).all(|i| (0..n).all(|j| table.d[i][j] <= norm_d[i][j] + SANDWICH_TOL));
    let mut body = json!({
        "labels": space.labels(),
        "d": table.d,
        "norm_D": norm_d,
        "sandwich_ok": sandwich_ok,
        "solver": table.method.label(),
        "method": table.method.name(),
    });
    let mut oracle_table = None;
    if oracle {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let values = parallel::with_pool(|| {
            pairs
                .par_iter()
                .map(|&(i, j)| {
                    let prob = MinNormProblem::new(space.distance(i, j), space.cone(), space.norm())?;
                    equiv::brute_force_distance(&prob, cfg)
                })
                .collect::<Result<Vec<_>, _>>()
        })??;
        let mut o = vec![vec![0.0; n]; n];
        for (&(i, j), v) in pairs.iter().zip(values) {
            o[i][j] = v;
            o[j][i] = v;
        }
        let diff: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| (table.d[i][j] - o[i][j]).abs()).collect())
            .collect();
        let max_diff = diff.iter().flatten().fold(0.0f64, |m, &x| m.max(x));
        body["oracle_d"] = json!(o);
        body["oracle_diff"] = json!(diff);
        body["oracle_max_diff"] = json!(max_diff);
        oracle_table = Some((o, max_diff));
    }
    Ok(emit(
        fmt,
        "equiv",
        body,
        || {
            let mut s = format!("solver: {} ({})\n\nd\n", table.method.label(), table.method.name());
            s.push_str(&matrix_text(space.labels(), &table.d));
            s.push_str("\n‖D‖\n");
            s.push_str(&matrix_text(space.labels(), &norm_d));
            if let Some((o, m)) = &oracle_table {
                s.push_str("\noracle\n");
                s.push_str(&matrix_text(space.labels(), o));
                s.push_str(&format!("max |d − oracle| = {m:e}\n"));
            }
            s.push_str(&format!("\nsandwich d ≤ ‖D‖: {}\n", if sandwich_ok { "ok" } else { "FAILED" }));
            s
        },
        sandwich_ok,
    ))
}

fn load_space_and_map(space: &Path, map: &Path) -> Result<(FiniteConeMetricSpace, SelfMap), KitError> {
    let space = formats::load_space(space)?;
    let map = formats::load_map(map, Some(space.labels()))?;
    if matches!(map, SelfMap::Affine { .. }) {
        return Err(KitError::Usage("contractive-condition checks need a tabulated map".into()));
    }
    Ok((space, map))
}

fn check(fmt: Format, kind: &KindArgs, space: &Path, map: &Path, cfg: &SolverConfig) -> Result<Outcome, KitError> {
    let kind = kind.contraction()?;
    let (space, map) = load_space_and_map(space, map)?;
    let r = catalog::verify_transfer(&space, &map, &kind, cfg)?;
    let labels = Some(space.labels());
    let mut body = report::kind(&kind);
    body["holds"] = json!(r.cone_check.holds);
    body["cone"] = report::check_result(&r.cone_check, labels);
    body["metric"] = report::check_result(&r.metric_check, labels);
    body["transfer_ok"] = json!(r.transfer_ok);
    body["pairwise_ok"] = json!(r.pairwise_ok);
    let ok = r.ok();
    Ok(emit(
        fmt,
        "check",
        body,
        || {
            let side = |name: &str, c: &catalog::CheckResult| {
                let mut s = format!(
                    "{name}: {} ({} pairs)\n",
                    if c.holds { "holds" } else { "fails" },
                    c.checked_pairs
                );
                for w in &c.witnesses {
                    s.push_str(&format!(
                        "  ({}, {}) excess {:e}\n",
                        space.labels()[w.x],
                        space.labels()[w.y],
                        w.excess
                    ));
                }
                s
            };
            let mut s = format!("{} {:?}\n", kind.tag(), kind.coefficients());
            s.push_str(&side("cone", &r.cone_check));
            s.push_str(&side("metric", &r.metric_check));
            s.push_str(&format!("transfer: {}\n", if ok { "ok" } else { "FAILED" }));
            s
        },
        ok,
    ))
}

fn minconst(
    fmt: Format,
    kind: &KindArgs,
    space: &Path,
    map: &Path,
    direction: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<Outcome, KitError> {
    let tag = kind.tag()?;
    let power = kind.power()?;
    let (space, map) = load_space_and_map(space, map)?;
    let d = equiv::equivalent_metric_table(&space, cfg)?.d;
    let metric = catalog::minimal_constant_metric(&d, &map, tag, power)?;
    let cone = catalog::minimal_constant_cone(&space, &map, tag, power, direction, cfg.tol)?;
    let body = json!({
        "kind": tag.name(),
        "cone": cone,
        "metric": metric,
        "functional_cone": catalog::functional(tag, &cone),
        "functional_metric": catalog::functional(tag, &metric),
    });
    Ok(emit(
        fmt,
        "minconst",
        body,
        || format!("{tag}\ncone:   {cone:?}\nmetric: {metric:?}\n"),
        true,
    ))
}

fn transfer_suite(fmt: Format, seeds: usize, kinds: &str, seed: u64, solver: &SolverConfig) -> Result<Outcome, KitError> {
    let kinds = suite::parse_kinds(kinds).map_err(|e| KitError::Usage(e.to_string()))?;
    let mut cfg = SuiteConfig::new(seed, seeds, kinds);
    cfg.solver = solver.clone();
    let r = parallel::run_suite(&cfg)?;
    let ok = r.passed(&cfg);
    for s in &r.summaries {
        if s.failure.is_some() {
            eprintln!("transfer-suite: {} produced a failing instance", s.tag);
        } else if s.instances < cfg.per_kind {
            eprintln!(
                "transfer-suite: {} reached only {} of {} instances in {} attempts",
                s.tag, s.instances, cfg.per_kind, s.attempts
            );
        }
    }
    Ok(emit(fmt, "transfer-suite", report::suite(&r, &cfg), || report::suite_table(&r, &cfg), ok))
}

#[allow(clippy::too_many_arguments)]
fn fixpoint_cmd(
    fmt: Format,
    space: Option<&Path>,
    map_path: &Path,
    x0: Option<&str>,
    norm: Option<&Path>,
    trace: bool,
    tol: Option<f64>,
    cfg: &SolverConfig,
) -> Result<Outcome, KitError> {
    let Some(space_path) = space else {
        let map = formats::load_map(map_path, None)?;
        return fixpoint_affine(fmt, &map, x0, norm, trace, tol.unwrap_or(1e-8), cfg.max_iter);
    };
    let space = formats::load_space(space_path)?;
    let map = formats::load_map(map_path, Some(space.labels()))?;
    let start = x0
        .map(|l| {
            space
                .index_of(l)
                .ok_or_else(|| KitError::Usage(format!("unknown start label `{l}`")))
        })
        .transpose()?;
    let r = fixedpoint::certify_and_solve(&space, &map, cfg)?;
    let labels = space.labels();
    let runs: Vec<_> = r.runs.iter().filter(|run| start.is_none_or(|s| s == run.start)).collect();
    let converged = runs.iter().all(|run| run.fixed_point.is_some());
    let agree = start.is_some() || r.all_agree;
    let lead = runs[0];
    let fixed = if start.is_some() { lead.fixed_point } else { r.fixed_point };
    let run_json = |run: &fixedpoint::StartRun| {
        let mut v = report::trace_summary(&run.trace);
        if !r.certified {
            v["apriori_bound"] = Value::Null;
            v["aposteriori_bound"] = Value::Null;
        }
        v["start"] = json!(labels[run.start]);
        v["fixed_point"] = json!(run.fixed_point.map(|i| &labels[i]));
        if trace {
            let mut t = report::trace_detail(&run.trace);
            t["iterates"] = json!(run.trace.iterates.iter().map(|&i| &labels[i]).collect::<Vec<_>>());
            v["trace"] = t;
        }
        v
    };
    let mut body = run_json(lead);
    if let Value::Object(m) = &mut body {
        m.remove("start");
        m.remove("trace");
    }
    body["fixed_point"] = json!(fixed.map(|i| &labels[i]));
    body["alpha"] = json!(r.alpha);
    body["certified"] = json!(r.certified);
    body["all_agree"] = json!(agree);
    body["runs"] = json!(runs.iter().map(|r| run_json(r)).collect::<Vec<_>>());
    if !r.certified {
        body["note"] = json!("no Banach certificate; Kannan and Chatterjea constants are reported without a convergence claim");
        body["kannan"] = json!(r.kannan);
        body["chatterjea"] = json!(r.chatterjea);
    }
    let ok = converged && (!r.certified || agree);
    Ok(emit(
        fmt,
        "fixpoint",
        body,
        || {
            let mut s = format!(
                "alpha = {}{}\n",
                r.alpha,
                if r.certified { "" } else { " (no Banach certificate)" }
            );
            for run in &runs {
                s.push_str(&format!(
                    "start {:>6} → {:>6} in {} steps\n",
                    labels[run.start],
                    run.fixed_point.map_or("none", |i| labels[i].as_str()),
                    run.trace.iterations()
                ));
            }
            if let Some(f) = fixed {
                s.push_str(&format!("fixed point: {}\n", labels[f]));
            }
            s
        },
        ok,
    ))
}

fn fixpoint_affine(
    fmt: Format,
    map: &SelfMap,
    x0: Option<&str>,
    norm: Option<&Path>,
    trace: bool,
    tol: f64,
    max_iter: usize,
) -> Result<Outcome, KitError> {
    let SelfMap::Affine { matrix, .. } = map else {
        return Err(KitError::Usage("a tabulated map needs --space".into()));
    };
    let norm = match norm {
        Some(p) => formats::load_norm(p)?,
        None => Norm::Euclidean,
    };
    let x0: Vec<f64> = match x0 {
        Some(s) => s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| KitError::Usage(format!("--x0 must be a comma-separated vector, got `{s}`")))?,
        None => vec![0.0; matrix.cols()],
    };
    let alpha = affine_operator_norm(matrix, &norm)?;
    if !(alpha < 1.0) {
        return Err(KitError::Core(cone_metric_core::Error::InvalidArgument(format!(
            "the affine map has operator norm {alpha} ≥ 1 for the coordinatewise cone metric"
        ))));
    }
    let run = fixedpoint::iterate_affine(map, &norm, x0, alpha, tol, max_iter)?;
    let mut body = report::trace_summary(&run.trace);
    body["fixed_point"] = json!(run.last);
    body["alpha"] = json!(alpha);
    if trace {
        body["trace"] = report::trace_detail(&run.trace);
    }
    Ok(emit(
        fmt,
        "fixpoint",
        body,
        || {
            format!(
                "alpha = {alpha}\nfixed point ≈ {:?} after {} steps\na priori bound {:e}, a posteriori bound {:e}\n",
                run.last,
                run.trace.iterations(),
                run.trace.apriori_bound(),
                run.trace.aposteriori_bound()
            )
        },
        true,
    ))
}

fn psi(fmt: Format, phi: &Path, cone: &Path, norm: Option<&Path>, ts: &[f64], samples: usize, seed: u64) -> Result<Outcome, KitError> {
    let phi = formats::load_phi(phi)?;
    let cone: Cone = formats::load_cone(cone)?;
    let norm = match norm {
        Some(p) => formats::load_norm(p)?,
        None => Norm::Euclidean,
    };
    let bound = phi_operator_bound(&phi, &cone, &norm, samples, seed)?.value();
    let mut values = Vec::with_capacity(ts.len());
    let mut method = None;
    for &t in ts {
        let e = psi_from_phi(&phi, &cone, &norm, t, samples, seed)?;
        method = Some(e.method);
        values.push(e.value);
    }
    let bound_ok = ts.iter().zip(&values).all(|(t, v)| *v <= t * bound + PSI_TOL);
    let mut sorted = ts.to_vec();
    sorted.sort_by(f64::total_cmp);
    let decreasing = psi_is_decreasing(&phi, &cone, &norm, &sorted, samples, seed)?;
    let method_name = match method {
        Some(equiv::PsiMethod::OnePoint) => "one-point",
        Some(equiv::PsiMethod::LinearClosedForm) => "linear-closed-form",
        Some(equiv::PsiMethod::Sampled) => "sampled",
        None => "none",
    };
    let body = json!({
        "t": ts,
        "psi": values,
        "operator_bound": bound,
        "bound_ok": bound_ok,
        "method": method_name,
        "decreasing": decreasing,
        "decreasing_note": "ψ(0) = 0 and ψ ≥ 0, so a nonincreasing ψ vanishes identically; the decreasing case is vacuous for every nonzero φ",
    });
    Ok(emit(
        fmt,
        "psi",
        body,
        || {
            let mut s = format!("‖φ‖ = {bound}  ({method_name})\n");
            for (t, v) in ts.iter().zip(&values) {
                s.push_str(&format!("ψ({t}) = {v:.9}   t‖φ‖ = {:.9}\n", t * bound));
            }
            s.push_str(&format!("ψ(t) ≤ t‖φ‖: {}\n", if bound_ok { "ok" } else { "FAILED" }));
            s
        },
        bound_ok,
    ))
}
