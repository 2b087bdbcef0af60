//! The `qramforge` command line.
//!
//! Exit codes: 0 on success or a passing verification, 1 on a failing
//! verification, 2 on usage, schema or IO errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qramforge_core::simulator::basis_state;
use qramforge_core::synthesis::{synth_access, synth_down, synth_run, synth_up};
use qramforge_core::verifier::{
    check_circuit, check_variant_agreement, project_to_data, CaseSet, InstanceSpec, Tolerances,
    FIDELITY_TOLERANCE,
};
use qramforge_core::{BasisAssignment, Circuit, SynthesisOptions, UnitaryTable, Variant};

use crate::analysis::{analyze, render_csv, AnalysisRow};
use crate::document::{CircuitDocument, Parameters};
use crate::error::{Error, Result};
use crate::instance::{family_table, FamilyKind, InstanceParams};
use crate::qasm::emit_qasm;
use crate::report::{render_table, ReportDocument};
use crate::state::StateDocument;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "qramforge",
    version,
    about = "Binary-tree QRAM access circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a circuit and write it as JSON or QASM.
    Synth(SynthArgs),
    /// Print depth, width and ancilla counts.
    Analyze(AnalyzeArgs),
    /// Run one basis input through a circuit.
    Simulate(SimulateArgs),
    /// Check the access circuit against the direct oracle.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Qram,
    Lookup,
    Rotation,
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum VariantArg {
    Sequential,
    Fanout,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum AnalyzeVariant {
    Sequential,
    Fanout,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Qasm,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Phase {
    Access,
    Down,
    Run,
    Up,
}

impl Phase {
    fn name(self) -> &'static str {
        match self {
            Phase::Access => "access",
            Phase::Down => "down",
            Phase::Run => "run",
            Phase::Up => "up",
        }
    }
}

#[derive(Args, Debug)]
struct InstanceArgs {
    /// Address width.
    #[arg(long)]
    n: Option<usize>,
    /// Result width (memory width for the rotation family).
    #[arg(long)]
    m: Option<usize>,
    /// Memory width per leaf; fixed by every family except random.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "qram")]
    family: FamilyArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "sequential")]
    variant: VariantArg,
    /// Fan-out block size (default ⌈√m⌉).
    #[arg(long)]
    s: Option<usize>,
}

impl InstanceArgs {
    fn params(&self) -> Result<InstanceParams> {
        let (Some(n), Some(m)) = (self.n, self.m) else {
            return Err(Error::Usage(
                "--n and --m are required (or --in FILE)".into(),
            ));
        };
        Ok(InstanceParams {
            n,
            m,
            k: self.k,
            family: match self.family {
                FamilyArg::Qram => FamilyKind::Qram,
                FamilyArg::Lookup => FamilyKind::Lookup,
                FamilyArg::Rotation => FamilyKind::Rotation,
                FamilyArg::Random => FamilyKind::Random,
            },
            seed: self.seed,
            variant: match self.variant {
                VariantArg::Sequential => Variant::Sequential,
                VariantArg::Fanout => Variant::Fanout,
            },
            block_size: self.s,
        })
    }
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value = "access")]
    phase: Phase,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Embed the leaf unitaries in the JSON document.
    #[arg(long)]
    include_matrices: bool,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Address widths (comma-separated).
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Result widths (comma-separated).
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    k: usize,
    #[arg(long, value_enum, default_value = "both")]
    variant: AnalyzeVariant,
    #[arg(long)]
    s: Option<usize>,
    /// Declared depth of every leaf unitary.
    #[arg(long, default_value_t = 1)]
    u_depth: u32,
    /// Emit CSV instead of a table.
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Circuit document written by `synth --include-matrices`.
    #[arg(long = "in", conflicts_with_all = ["n", "m", "k"])]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    address: u64,
    #[arg(long, default_value_t = 0)]
    result: u64,
    /// Memory value per leaf (comma-separated; default all zero).
    #[arg(long, value_delimiter = ',')]
    mem: Vec<u64>,
    /// Write the full output state as JSON.
    #[arg(long)]
    state_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long = "in", conflicts_with_all = ["n", "m", "k"])]
    input: Option<PathBuf>,
    /// Every basis input.
    #[arg(long, conflicts_with = "cases")]
    exhaustive: bool,
    /// Random (result, memory) inputs per address.
    #[arg(long)]
    cases: Option<usize>,
    /// Additional random two-term superposition inputs.
    #[arg(long, default_value_t = 0)]
    superpositions: usize,
    /// Accepted 1 - fidelity.
    #[arg(long, default_value_t = FIDELITY_TOLERANCE)]
    tolerance: f64,
    /// Compare the sequential and fan-out circuits instead of circuit and oracle.
    #[arg(long, conflicts_with = "input")]
    agree: bool,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn write_output(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn synth(args: &SynthArgs, stdout: &mut dyn Write) -> Result<i32> {
    let params = args.instance.params()?;
    let instance = params.build()?;
    let options = params.options()?;
    let layout = instance.layout()?;
    let circuit = match args.phase {
        Phase::Access => synth_access(&layout, instance.unitaries(), &options)?,
        Phase::Down => synth_down(&layout, &options)?,
        Phase::Up => synth_up(&layout, &options)?,
        Phase::Run => synth_run(options.prepare_layout(&layout)?, instance.unitaries())?,
    };
    let text = match args.format {
        Format::Qasm => emit_qasm(&circuit),
        Format::Json => {
            let parameters = Parameters {
                n: 0,
                m: 0,
                k: Vec::new(),
                variant: params.variant.name().to_string(),
                s: None,
                phase: args.phase.name().to_string(),
                family: Some(params.family.name().to_string()),
                seed: params.recorded_seed(),
                table: family_table(&instance),
            };
            let matrices = args.include_matrices.then(|| instance.unitaries());
            CircuitDocument::new(&circuit, parameters, matrices).to_json()
        }
    };
    write_output(args.out.as_deref(), &text, stdout)?;
    Ok(EXIT_OK)
}

fn analyze_cmd(args: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<i32> {
    let variants: &[Variant] = match args.variant {
        AnalyzeVariant::Sequential => &[Variant::Sequential],
        AnalyzeVariant::Fanout => &[Variant::Fanout],
        AnalyzeVariant::Both => &[Variant::Sequential, Variant::Fanout],
    };
    let mut rows: Vec<AnalysisRow> = Vec::new();
    for &n in &args.n {
        for &m in &args.m {
            for &v in variants {
                let mut options = match v {
                    Variant::Sequential => SynthesisOptions::sequential(),
                    Variant::Fanout => SynthesisOptions::fanout(),
                };
                if v == Variant::Fanout {
                    options.block_size = args.s;
                }
                rows.push(analyze(n, m, args.k, &options, args.u_depth)?);
            }
        }
    }
    let text = if args.csv {
        render_csv(&rows)?
    } else {
        crate::analysis::render_table(&rows)
    };
    write_output(args.out.as_deref(), &text, stdout)?;
    Ok(EXIT_OK)
}

/// The circuit, leaf unitaries and instance named by `--in` or the flags.
fn load(input: Option<&Path>, args: &InstanceArgs) -> Result<(Circuit, InstanceSpec, String)> {
    match input {
        Some(path) => {
            let doc = CircuitDocument::from_json(&read(path)?)?;
            let circuit = doc.to_circuit()?;
            let table = doc.unitary_table()?.unwrap_or_default();
            if circuit.gate_counts().opaque > 0 && table.is_empty() {
                return Err(Error::schema(
                    "unitaries",
                    "the circuit calls leaf unitaries but the document has no matrices (use synth --include-matrices)",
                ));
            }
            let table = if table.is_empty() {
                identity_table(&doc)?
            } else {
                table
            };
            let instance = InstanceSpec::custom(doc.parameters.n, doc.parameters.m, table)?;
            Ok((circuit, instance, doc.parameters.variant))
        }
        None => {
            let params = args.params()?;
            let instance = params.build()?;
            let circuit = synth_access(
                &instance.layout()?,
                instance.unitaries(),
                &params.options()?,
            )?;
            Ok((circuit, instance, params.variant.name().to_string()))
        }
    }
}

fn identity_table(doc: &CircuitDocument) -> Result<UnitaryTable> {
    let layout = doc.layout()?;
    Ok(layout
        .leaves()
        .into_iter()
        .map(|z| {
            qramforge_core::UnitarySpec::identity(z, layout.result_width(), layout.mem_width(z))
        })
        .collect::<qramforge_core::Result<UnitaryTable>>()?)
}

fn simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let (circuit, instance, _) = load(args.input.as_deref(), &args.instance)?;
    let layout = circuit.layout();
    let mem = if args.mem.is_empty() {
        vec![0; layout.num_leaves()]
    } else {
        args.mem.clone()
    };
    let assignment = BasisAssignment::new(args.address, args.result).with_mem(mem);
    let mut state = basis_state(layout, &assignment)?;
    state.run(&circuit, instance.unitaries())?;
    if let Some(path) = &args.state_out {
        write_output(
            Some(path),
            &StateDocument::new(&state, Some(layout)).to_json(),
            stdout,
        )?;
    }
    let (data, residual) = project_to_data(&state, layout)?;
    let mut out = String::from("address,result,mem,re,im,probability\n");
    for (key, amp) in data.iter() {
        let n = layout.address_width();
        let m = layout.result_width();
        let mut offset = n + m;
        let mem: Vec<String> = layout
            .leaves()
            .into_iter()
            .map(|z| {
                let k = layout.mem_width(z);
                let v = key.read(offset..offset + k);
                offset += k;
                v.to_string()
            })
            .collect();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            key.read(0..n),
            key.read(n..n + m),
            mem.join(" "),
            amp.re,
            amp.im,
            amp.norm_sqr()
        ));
    }
    out.push_str(&format!("# ancilla residual {residual:e}\n"));
    write_output(None, &out, stdout)?;
    Ok(EXIT_OK)
}

fn verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<i32> {
    if args.tolerance.is_nan() || args.tolerance < 0.0 {
        return Err(Error::Usage("--tolerance must be non-negative".into()));
    }
    let started = Instant::now();
    let (circuit, instance, variant) = load(args.input.as_deref(), &args.instance)?;
    let mut cases = if args.exhaustive {
        CaseSet::Exhaustive.cases(&instance)?
    } else {
        CaseSet::PerAddress {
            assignments: args.cases.unwrap_or(8),
            seed: args.instance.seed,
        }
        .cases(&instance)?
    };
    if args.superpositions > 0 {
        cases.extend(
            CaseSet::Linearity {
                count: args.superpositions,
                seed: args.instance.seed ^ 0x5eed,
            }
            .cases(&instance)?,
        );
    }
    let set = CaseSet::Explicit(cases);
    let tolerances = Tolerances {
        fidelity: args.tolerance,
        ..Tolerances::default()
    };
    let mut report = if args.agree {
        let mut r = check_variant_agreement(&instance, args.instance.s, &set)?;
        r.tolerances = tolerances;
        for c in &mut r.cases {
            if c.failure.is_none() && c.fidelity < 1.0 - tolerances.fidelity {
                c.passed = false;
                c.failure = Some(format!(
                    "fidelity {:.15} below 1 - {:e}",
                    c.fidelity, tolerances.fidelity
                ));
            }
        }
        r
    } else {
        check_circuit(&instance, &circuit, &variant, &set, tolerances)?
    };
    report.elapsed_seconds = Some(started.elapsed().as_secs_f64());
    if let Some(path) = &args.report {
        write_output(Some(path), &ReportDocument::new(&report).to_json(), stdout)?;
    }
    write_output(None, &render_table(&report), stdout)?;
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    let outcome = match &cli.command {
        Command::Synth(a) => synth(a, stdout),
        Command::Analyze(a) => analyze_cmd(a, stdout),
        Command::Simulate(a) => simulate(a, stdout),
        Command::Verify(a) => verify(a, stdout),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}
