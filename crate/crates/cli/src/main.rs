//! `qofmin`: batch driver for the synthesis pipeline.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use serde::Serialize;

use qof_core::linearize::linearize_circuit;
use qof_core::minimize::Minimizer;
use qof_core::oracle::{equivalent_capped, DEFAULT_MAX_QUBITS};
use qof_core::pipeline::{canonicalize_circuit_with, run_pipeline_traced, Stage};
use qof_core::qof::{emit_qof, parse_qof};
use qof_core::{
    emit_netlist, parse_esop, parse_netlist, Circuit, EquivalenceMode, Error, EsopExpr,
    PipelineConfig, StageReport,
};

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_STAGE: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(name = "qofmin", version, about = "ESOP to CNOT/CV/CV† synthesis and QOF minimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an ESOP and print its normalized form.
    Parse(StageArgs),
    /// Merge terms that differ in one polarity.
    Merge(StageArgs),
    /// One multi-control Toffoli gate per term.
    Cascade(StageArgs),
    /// Reduce Toffoli gates to two controls with ancillas.
    DecomposeClassical(StageArgs),
    /// Two-control Toffoli gates to CNOT/CV/CV†.
    DecomposeQuantum(StageArgs),
    /// Expand non-terminal CNOT cascades into virtual gates.
    Linearize(StageArgs),
    /// Apply the rewrite rules and rematerialize virtual gates.
    Minimize(StageArgs),
    /// Run every stage (or up to --stop-after).
    Canonicalize(StageArgs),
    /// Compare two netlists with the unitary oracle.
    Verify(VerifyArgs),
    /// Print a netlist in QOF notation.
    EmitQof(IoArgs),
    /// Canonicalize random or on-disk ESOPs and summarize.
    Corpus(CorpusArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Input file, `-` for stdin.
    #[arg(short, long, default_value = "-")]
    input: PathBuf,
    /// Output file, stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Netlist,
    Qof,
}

#[derive(Args)]
struct StageArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Last stage to run (canonicalize only).
    #[arg(long)]
    stop_after: Option<Stage>,
    /// Print the QOF after every rule application to stderr.
    #[arg(long)]
    trace: bool,
    /// Check the result against the input function; exit 4 on mismatch.
    #[arg(long)]
    verify: bool,
    /// Re-check the truth table after every rule application.
    #[arg(long)]
    verify_each: bool,
    /// Leave ancillas dirty; every term gets its own ancillas.
    #[arg(long)]
    no_uncompute: bool,
    /// Use only CV/CV† gates in the Toffoli decomposition.
    #[arg(long)]
    cv_only: bool,
    /// Keep ancilla restores that nothing reads.
    #[arg(long)]
    keep_uncompute: bool,
    /// Largest number of wires, ancillas included.
    #[arg(long)]
    max_wires: Option<usize>,
    /// Output format for circuits.
    #[arg(long, value_enum, default_value = "netlist")]
    format: Format,
    /// Write the JSON stage report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(short = 'a', long)]
    left: PathBuf,
    #[arg(short = 'b', long)]
    right: PathBuf,
    #[arg(long, default_value = "exact")]
    mode: EquivalenceMode,
    #[arg(long, default_value_t = DEFAULT_MAX_QUBITS)]
    max_qubits: usize,
}

#[derive(Args)]
struct CorpusArgs {
    /// Directory of `.esop`/`.pla` files; random expressions otherwise.
    #[arg(long)]
    dir: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 4)]
    arity: usize,
    #[arg(long, default_value_t = 4)]
    terms: usize,
    /// JSON lines summary, stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Parse(String),
    Stage(String),
    Verify(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => EXIT_PARSE,
            Failure::Stage(_) => EXIT_STAGE,
            Failure::Verify(_) => EXIT_VERIFY,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::Stage(m) | Failure::Verify(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(p) => Failure::Parse(p.to_string()),
            other => Failure::Stage(other.to_string()),
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Parse(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Parse(format!("{}: {e}", p.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Parse(format!("stdout: {e}"))),
    }
}

enum Input {
    Esop(EsopExpr),
    Circuit(Circuit),
}

/// Netlists start with a `wire` line, QOF text with a `# wires:` header;
/// anything else is an ESOP (plain or PLA).
fn parse_input(text: &str, path: &Path) -> Result<Input, Failure> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty());
    let at = |e: qof_core::ParseError| Failure::Parse(format!("{}: {e}", path.display()));
    match first {
        Some(l) if l.starts_with("wire ") => Ok(Input::Circuit(parse_netlist(text).map_err(at)?)),
        Some(l) if l.starts_with("# wires:") => Ok(Input::Circuit(parse_qof(text).map_err(at)?)),
        _ => Ok(Input::Esop(parse_esop(text).map_err(at)?)),
    }
}

fn read_circuit(path: &Path) -> Result<Circuit, Failure> {
    let text = read_input(path)?;
    match parse_input(&text, path)? {
        Input::Circuit(c) => Ok(c),
        Input::Esop(_) => Err(Failure::Parse(format!("{}: expected a netlist", path.display()))),
    }
}

fn render(c: &Circuit, format: Format) -> String {
    match format {
        Format::Netlist => emit_netlist(c),
        Format::Qof => emit_qof(c),
    }
}

fn trace_step(c: &Circuit, rule: &str, position: usize) {
    eprint!("# {rule} @{position}\n{}", emit_qof(c));
}

fn write_report(path: Option<&Path>, report: &impl Serialize) -> Result<(), Failure> {
    if let Some(p) = path {
        let json = serde_json::to_string_pretty(report).expect("serializable report");
        fs::write(p, json + "\n").map_err(|e| Failure::Parse(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn run_stage(stage: Stage, args: &StageArgs) -> Result<(), Failure> {
    let text = read_input(&args.io.input)?;
    let config = PipelineConfig {
        uncompute: !args.no_uncompute,
        keep_uncompute: args.keep_uncompute,
        cv_only: args.cv_only,
        verify_each: args.verify_each,
        max_wires: args.max_wires,
        stop_after: stage,
    };
    match parse_input(&text, &args.io.input)? {
        Input::Esop(e) => {
            let out = run_pipeline_traced(&e, &config, |app, c| {
                if args.trace {
                    trace_step(c, app.rule, app.position);
                }
            })?;
            let body = match &out.circuit {
                Some(c) => render(c, args.format),
                None => format!("{}\n", out.esop),
            };
            write_output(args.io.output.as_deref(), &body)?;
            write_report(args.report.as_deref(), &out.report)?;
            if args.verify && stage == Stage::Minimize && !out.report.verified {
                return Err(Failure::Verify("final circuit does not realize the input function".into()));
            }
            Ok(())
        }
        Input::Circuit(c) => run_circuit_stage(stage, args, &config, c),
    }
}

#[derive(Serialize)]
struct CircuitReport {
    stage: &'static str,
    gate_count_before: usize,
    gate_count: usize,
    two_qubit_count: usize,
    rules_applied: usize,
    verified: bool,
    notes: Vec<String>,
}

/// Linearize or minimize a circuit read from a netlist or QOF file.
fn run_circuit_stage(
    stage: Stage,
    args: &StageArgs,
    config: &PipelineConfig,
    c: Circuit,
) -> Result<(), Failure> {
    let mut notes = Vec::new();
    let (out, rules) = match stage {
        Stage::Linearize => {
            let (l, report) = linearize_circuit(&c)?;
            for s in &report.skipped {
                notes.push(format!("gates {}..{} left unchanged ({})", s.start, s.position, s.reason));
            }
            (l, report.regions_linearized)
        }
        Stage::Minimize => {
            let mut m = Minimizer::new()
                .verify_each(config.verify_each)
                .on_step(|app, c| {
                    if args.trace {
                        trace_step(c, app.rule, app.position);
                    }
                });
            let out = canonicalize_circuit_with(&c, &mut m, config.max_wires)?;
            (out, m.log().len())
        }
        other => {
            return Err(Failure::Stage(format!(
                "stage `{other}` takes an ESOP, not a circuit"
            )))
        }
    };
    let verified = args.verify
        && equivalent_capped(&c, &out, EquivalenceMode::OutputWire, DEFAULT_MAX_QUBITS)?;
    write_output(args.io.output.as_deref(), &render(&out, args.format))?;
    write_report(
        args.report.as_deref(),
        &CircuitReport {
            stage: stage.name(),
            gate_count_before: c.gate_count(),
            gate_count: out.gate_count(),
            two_qubit_count: out.two_qubit_count(),
            rules_applied: rules,
            verified,
            notes,
        },
    )?;
    if args.verify && !verified {
        return Err(Failure::Verify("circuit function changed".into()));
    }
    Ok(())
}

fn run_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let a = read_circuit(&args.left)?;
    let b = read_circuit(&args.right)?;
    if equivalent_capped(&a, &b, args.mode, args.max_qubits)? {
        println!("equivalent");
        Ok(())
    } else {
        Err(Failure::Verify("circuits differ".into()))
    }
}

#[derive(Serialize)]
struct CorpusLine {
    name: String,
    esop: String,
    gate_count: usize,
    two_qubit_count: usize,
    verified: bool,
    stages: StageReport,
}

fn run_corpus(args: &CorpusArgs) -> Result<(), Failure> {
    let mut items: Vec<(String, EsopExpr)> = Vec::new();
    match &args.dir {
        Some(dir) => {
            let mut paths: Vec<PathBuf> = fs::read_dir(dir)
                .map_err(|e| Failure::Parse(format!("{}: {e}", dir.display())))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| matches!(p.extension().and_then(|x| x.to_str()), Some("esop" | "pla")))
                .collect();
            paths.sort();
            for p in paths {
                let text = read_input(&p)?;
                let e = parse_esop(&text).map_err(|e| Failure::Parse(format!("{}: {e}", p.display())))?;
                items.push((p.display().to_string(), e));
            }
        }
        None => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
            for k in 0..args.count {
                items.push((format!("random-{k}"), EsopExpr::random(&mut rng, args.arity, args.terms)));
            }
        }
    }
    let mut out = String::new();
    let mut failed = Vec::new();
    for (name, e) in items {
        let (c, report) = qof_core::canonicalize(&e, &PipelineConfig::default())?;
        if !report.verified {
            failed.push(name.clone());
        }
        let line = CorpusLine {
            name,
            esop: e.to_string(),
            gate_count: c.gate_count(),
            two_qubit_count: c.two_qubit_count(),
            verified: report.verified,
            stages: report,
        };
        out.push_str(&serde_json::to_string(&line).expect("serializable"));
        out.push('\n');
    }
    write_output(args.output.as_deref(), &out)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(format!("verification failed: {}", failed.join(", "))))
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Parse(a) => run_stage(Stage::Parse, a),
        Command::Merge(a) => run_stage(Stage::Merge, a),
        Command::Cascade(a) => run_stage(Stage::Cascade, a),
        Command::DecomposeClassical(a) => run_stage(Stage::DecomposeClassical, a),
        Command::DecomposeQuantum(a) => run_stage(Stage::DecomposeQuantum, a),
        Command::Linearize(a) => run_stage(Stage::Linearize, a),
        Command::Minimize(a) => run_stage(Stage::Minimize, a),
        Command::Canonicalize(a) => run_stage(a.stop_after.unwrap_or(Stage::Minimize), a),
        Command::Verify(a) => run_verify(a),
        Command::EmitQof(a) => {
            let c = read_circuit(&a.input)?;
            write_output(a.output.as_deref(), &emit_qof(&c))
        }
        Command::Corpus(a) => run_corpus(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qofmin: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
