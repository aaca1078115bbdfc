mod examples;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use secants::certifier::{self, Mode};
use secants::classifier::{self, REALITY_TOL};
use secants::monodromy::{self, Permutation, TriangleLoop};
use secants::sampler::{self, RealizabilityLedger, SampleConfig};
use secants::tracker::{self, StartSet};
use secants::{data, io, Error, Execution, ParameterMatrix, TrackerConfig};

use output::RunManifest;

#[derive(Parser, Debug)]
#[command(name = "secants", version, about = "Common secant lines of two twisted cubics")]
struct Cli {
    /// Seed for gamma constants and sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Exact rational certification instead of the floating-point backend.
    #[arg(long, global = true)]
    strict: bool,
    /// Output file (stdout when omitted, where that makes sense).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve F(x; M) = 0 for a matrix file or `builtin:M0`, `builtin:example:K`.
    Solve {
        matrix: String,
        /// Track from the base matrix without the gamma constant.
        #[arg(long)]
        no_gamma: bool,
    },
    /// Classify the orbits of a solution file and print the census line.
    Classify {
        solutions: PathBuf,
        /// Matrix, when the solution file does not carry one.
        #[arg(long)]
        matrix: Option<String>,
    },
    /// Alpha-certify the orbits of a solution file.
    Certify {
        solutions: PathBuf,
        #[arg(long)]
        matrix: Option<String>,
    },
    /// Track a triangle loop (`builtin:gamma1`, `builtin:gamma2` or a file),
    /// or compute the order of a group given by permutations.
    Monodromy {
        #[arg(long, conflicts_with = "order")]
        r#loop: Option<String>,
        /// Cycle-notation generators, e.g. "(1 2)(3 4)".
        #[arg(long, num_args = 1..)]
        order: Option<Vec<String>>,
    },
    /// Census a batch of random real matrices.
    Sample {
        #[arg(long)]
        count: usize,
        /// Sample a ball around this matrix instead of all of P^15.
        #[arg(long, requires = "radius")]
        ball: Option<String>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        certify: bool,
        #[arg(long)]
        freq: Option<PathBuf>,
        /// Ledger file to update with certified triples.
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
    /// Histogram of real-secant counts and the most frequent triples.
    Report {
        records: PathBuf,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Admissible triples, optionally against the compiled realized table.
    Admissible {
        #[arg(long)]
        diff: bool,
    },
    /// Run one of the built-in example suites.
    Examples {
        #[arg(long, value_enum)]
        suite: Suite,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Suite {
    TotallyReal,
    Monodromy,
    Admissible,
}

/// Failures that map to specific exit codes.
#[derive(Debug)]
enum Outcome {
    NonGeneric(String),
    Incomplete(String),
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::NonGeneric(m) | Outcome::Incomplete(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for Outcome {}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Outcome>() {
        Some(Outcome::NonGeneric(_)) => 2,
        Some(Outcome::Incomplete(_)) => 3,
        None => 1,
    }
}

fn non_generic(e: Error) -> anyhow::Error {
    anyhow::Error::new(Outcome::NonGeneric(e.to_string()))
}

fn load_matrix(source: &str) -> Result<ParameterMatrix> {
    let reference = data::reference();
    if let Some(name) = source.strip_prefix("builtin:") {
        if let Some(k) = name.strip_prefix("example:") {
            let k: usize = k.parse().with_context(|| format!("example index {k:?}"))?;
            let witnesses = reference.witnesses();
            return witnesses
                .get(k.wrapping_sub(1))
                .map(|w| w.matrix.clone())
                .ok_or_else(|| anyhow!("example index {k} outside 1..={}", witnesses.len()));
        }
        return reference.named_matrix(name).ok_or_else(|| anyhow!("unknown builtin matrix {name:?}"));
    }
    let text = output::read_text(Path::new(source))?;
    io::parse_matrix(&text).with_context(|| format!("matrix file {source}"))
}

fn load_loop(source: &str) -> Result<TriangleLoop> {
    if let Some(label) = source.strip_prefix("builtin:") {
        return TriangleLoop::builtin(label).ok_or_else(|| anyhow!("unknown builtin loop {label:?}"));
    }
    let text = output::read_text(Path::new(source))?;
    io::parse_loop(&text).with_context(|| format!("loop file {source}"))
}

struct RunContext {
    seed: u64,
    strict: bool,
    out: Option<PathBuf>,
    manifest: RunManifest,
}

impl RunContext {
    fn tracker(&self) -> TrackerConfig {
        TrackerConfig::with_seed(self.seed)
    }

    fn start(&self) -> Result<StartSet> {
        Ok(tracker::bootstrap_start_set(&self.tracker())?)
    }

    fn mode(&self) -> Mode {
        if self.strict {
            Mode::Strict
        } else {
            Mode::Fast
        }
    }

    fn record_output(&mut self, path: &Path) {
        self.manifest.outputs.push(path.display().to_string());
    }

    fn emit(&mut self, value: &impl serde::Serialize) -> Result<()> {
        if let Some(out) = self.out.clone() {
            self.record_output(&out);
        }
        output::emit_json(self.out.as_deref(), value)
    }
}

fn cmd_solve(ctx: &mut RunContext, matrix: &str, no_gamma: bool) -> Result<()> {
    let m = load_matrix(matrix)?;
    let config = if no_gamma { ctx.tracker().without_gamma() } else { ctx.tracker() };
    let start = ctx.start()?;
    let solved = tracker::solve_at_parameter(&m, &start, &config).map_err(non_generic)?;
    let mut orbits = solved.orbits;
    let census = if m.is_real() {
        classifier::classify_records(&mut orbits, REALITY_TOL)
            .and_then(|()| classifier::link_conjugates(&mut orbits))
            .and_then(|()| classifier::census(&orbits))
            .map_err(non_generic)
            .map(Some)?
    } else {
        None
    };
    if let Some(c) = census {
        eprintln!("census {}", classifier::census_line(c, &orbits));
    }
    ctx.emit(&io::solution_file(&m, &orbits, census))
}

fn load_solutions(path: &Path, matrix: Option<&str>) -> Result<(ParameterMatrix, Vec<secants::OrbitRecord>)> {
    let text = output::read_text(path)?;
    let (embedded, orbits) = io::parse_solutions(&text).with_context(|| format!("solution file {}", path.display()))?;
    let m = match (matrix, embedded) {
        (Some(source), _) => load_matrix(source)?,
        (None, Some(m)) => m,
        (None, None) => bail!("{} carries no matrix; pass --matrix", path.display()),
    };
    Ok((m, orbits))
}

fn cmd_classify(ctx: &mut RunContext, solutions: &Path, matrix: Option<&str>) -> Result<()> {
    let (m, mut orbits) = load_solutions(solutions, matrix)?;
    classifier::classify_records(&mut orbits, REALITY_TOL).map_err(non_generic)?;
    classifier::link_conjugates(&mut orbits).map_err(non_generic)?;
    let census = classifier::census(&orbits).map_err(non_generic)?;
    println!("{}", classifier::census_line(census, &orbits));
    if ctx.out.is_some() {
        ctx.emit(&io::solution_file(&m, &orbits, Some(census)))?;
    }
    Ok(())
}

fn cmd_certify(ctx: &mut RunContext, solutions: &Path, matrix: Option<&str>) -> Result<()> {
    let (m, orbits) = load_solutions(solutions, matrix)?;
    let (report, orbits) = match certifier::certify_census(&m, &orbits, ctx.mode(), Execution::Parallel, 2) {
        Ok(done) => done,
        // Still write the per-point certificates of what could not be certified.
        Err(Error::CertificationIncomplete { .. }) => {
            (certifier::certify_report(&m, &orbits, ctx.mode(), Execution::Parallel)?, orbits)
        }
        Err(e) => return Err(e.into()),
    };
    let file = io::certificate_file(&report, &orbits);
    ctx.emit(&file)?;
    match &file.census_certified {
        Some(line) => {
            eprintln!("certified census {line}");
            Ok(())
        }
        None => Err(anyhow::Error::new(Outcome::Incomplete(format!(
            "certification incomplete: undetermined orbits {:?}",
            file.undetermined
        )))),
    }
}

fn cmd_monodromy(ctx: &mut RunContext, triangle: Option<&str>, order: Option<&[String]>) -> Result<()> {
    if let Some(perms) = order {
        let degree = perms
            .iter()
            .flat_map(|p| p.split(|c: char| !c.is_ascii_digit()))
            .filter_map(|s| s.parse::<usize>().ok())
            .max()
            .unwrap_or(1)
            .max(classifier::SECANT_COUNT);
        let generators = perms
            .iter()
            .map(|p| Permutation::parse_cycles(p, degree))
            .collect::<secants::Result<Vec<_>>>()?;
        let order = monodromy::group_order(&generators);
        println!("{order}");
        if ctx.out.is_some() {
            ctx.emit(&json!({ "generators": generators, "order": order.to_string() }))?;
        }
        return Ok(());
    }
    let source = triangle.ok_or_else(|| anyhow!("pass --loop or --order"))?;
    let triangle = load_loop(source)?;
    let start = ctx.start()?;
    let run = monodromy::track_loop(&triangle, &start, &ctx.tracker())?;
    println!("{} {}", run.label, run.permutation);
    for (k, edge) in run.edge_validity.iter().enumerate() {
        match edge {
            Some(e) => {
                let roots: Vec<String> = e.roots.iter().map(|z| format!("{:.4}{:+.4}i", z.re, z.im)).collect();
                let note = if e.near_segment { " near-segment" } else { "" };
                println!("edge {}: {} (distance {:.4}){note}", k + 1, roots.join(", "), e.min_distance);
            }
            None => println!("edge {}: zero length", k + 1),
        }
    }
    if ctx.out.is_some() {
        ctx.emit(&run)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(
    ctx: &mut RunContext,
    count: usize,
    ball: Option<&str>,
    radius: Option<f64>,
    certify: bool,
    freq: Option<&Path>,
    ledger: Option<&Path>,
) -> Result<()> {
    let mut config = match ball {
        Some(center) => SampleConfig::ball(count, ctx.seed, load_matrix(center)?, radius.expect("clap requires radius")),
        None => SampleConfig::uniform(count, ctx.seed),
    };
    config.certify = certify;
    let start = ctx.start()?;
    let batch = sampler::run_batch(&config, &start, &ctx.tracker())?;
    let records_path = ctx.out.clone().unwrap_or_else(|| PathBuf::from("records.csv"));
    output::write_records(&records_path, &batch.records)?;
    ctx.record_output(&records_path);
    if let Some(path) = freq {
        output::write_frequencies(path, &batch.table)?;
        ctx.record_output(path);
    }
    if let Some(path) = ledger {
        let mut book = if path.exists() {
            let value: serde_json::Value = serde_json::from_str(&output::read_text(path)?)?;
            RealizabilityLedger::from_json(&value)?
        } else {
            RealizabilityLedger::default()
        };
        let source = match ball {
            Some(c) => format!("ball:{c}:r={}:seed={}", radius.unwrap_or_default(), ctx.seed),
            None => format!("uniform:seed={}", ctx.seed),
        };
        let added = book.update(&batch.records, &source)?;
        output::write_json(path, &book.to_json())?;
        ctx.record_output(path);
        eprintln!("ledger: {} triples, {} new", book.entries.len(), added.len());
    }
    let t = &batch.table;
    eprintln!("{} samples, {} failures", t.total, t.failures);
    for n in (0..=10).step_by(2) {
        eprintln!("n_R = {n:2}: {:.4}", t.nr_fraction(n));
    }
    Ok(())
}

fn cmd_report(ctx: &mut RunContext, records: &Path, top: usize) -> Result<()> {
    let records = output::read_records(records)?;
    let table = sampler::FrequencyTable::from_records(&records);
    println!("n_R  count  fraction");
    for n in (0..=10).step_by(2) {
        println!("{n:>3}  {:>5}  {:.4}", table.by_nr.get(&n).copied().unwrap_or(0), table.nr_fraction(n));
    }
    println!("failures {}", table.failures);
    println!();
    println!("rank  (n_t,n_p,n_m)  count");
    for (k, (t, c)) in table.ranked_triples().iter().take(top).enumerate() {
        println!("{:>4}  {:>13}  {c}", k + 1, t.to_string());
    }
    if let Some(out) = ctx.out.clone() {
        output::write_histogram(&out, &table)?;
        ctx.record_output(&out);
    }
    Ok(())
}

fn cmd_admissible(ctx: &mut RunContext, diff: bool) -> Result<()> {
    let tuples = classifier::admissible_tuples();
    let per_level: Vec<usize> = (0..=10).step_by(2).map(|n| tuples.iter().filter(|t| t.n_r() == n).count()).collect();
    println!("{} admissible tuples", tuples.len());
    println!("per n_R (0,2,..,10): {per_level:?}");
    let realized: std::collections::BTreeSet<_> = data::reference().realized().into_iter().collect();
    let report = classifier::realizability_diff(&realized)?;
    if diff {
        println!("{} realized, {} missing", report.realized.len(), report.missing.len());
        let missing: Vec<String> = report.missing.iter().map(ToString::to_string).collect();
        println!("missing: {}", missing.join(" "));
    }
    if ctx.out.is_some() {
        let strings = |v: &[secants::TripleCount]| v.iter().map(ToString::to_string).collect::<Vec<_>>();
        ctx.emit(&json!({
            "admissible": strings(&tuples),
            "per_n_R": per_level,
            "realized": strings(&report.realized),
            "missing": strings(&report.missing),
        }))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let started = output::now();
    let config = json!({
        "command": format!("{:?}", cli.command),
        "threads": cli.threads,
        "strict": cli.strict,
        "out": cli.out,
    });
    let name = format!("{:?}", cli.command).split([' ', '{']).next().unwrap_or_default().to_lowercase();
    let mut ctx = RunContext {
        seed: cli.seed,
        strict: cli.strict,
        out: cli.out.clone(),
        manifest: RunManifest::new(&name, cli.seed, config, started),
    };
    let result = match &cli.command {
        Command::Solve { matrix, no_gamma } => cmd_solve(&mut ctx, matrix, *no_gamma),
        Command::Classify { solutions, matrix } => cmd_classify(&mut ctx, solutions, matrix.as_deref()),
        Command::Certify { solutions, matrix } => cmd_certify(&mut ctx, solutions, matrix.as_deref()),
        Command::Monodromy { r#loop, order } => cmd_monodromy(&mut ctx, r#loop.as_deref(), order.as_deref()),
        Command::Sample {
            count,
            ball,
            radius,
            certify,
            freq,
            ledger,
        } => cmd_sample(&mut ctx, *count, ball.as_deref(), *radius, *certify, freq.as_deref(), ledger.as_deref()),
        Command::Report { records, top } => cmd_report(&mut ctx, records, *top),
        Command::Admissible { diff } => cmd_admissible(&mut ctx, *diff),
        Command::Examples { suite } => examples::run(*suite, &ctx.tracker()),
    };
    // Outputs written before a non-generic or incomplete result still get a manifest.
    ctx.manifest.finish()?;
    result
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
