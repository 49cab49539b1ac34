//! Command-line front end: `parse`, `check`, `simulate`, `conform` and
//! `refine` over document files.
//!
//! Exit codes: 0 success, 1 semantic failure (parse errors, violations,
//! failed verdicts), 2 usage or I/O errors, 3 inconclusive at the bound.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use umlsem::check::{check_documents, check_refinement, CheckOptions, Documents, JointVerdict, RefinementStatus};
use umlsem::conform::{check_exemplary, ConformOptions, ConformanceReport, OrderMode, Verdict, WorldTemplate};
use umlsem::dsl::{self, print, DslError, UnhandledPolicy};
use umlsem::elaborate::{automata, compile_diagram, elaborate_static, BuildOptions, DEFAULT_BUDGET};
use umlsem::simulate::{Policy, System, World};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "umlsem", version, about = "Executable semantics for a textual UML subset")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse documents and print their syntax trees.
    Parse(Common),
    /// Run every consistency rule and report whether the documents can hold together.
    Check(CheckArgs),
    /// Simulate the system of a snapshot and write its trace.
    Simulate(Common),
    /// Check each sequence diagram against the system's executions.
    Conform(ConformArgs),
    /// Check that the second state diagram refines the first.
    Refine(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Concurrent,
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnhandledArg {
    Ignore,
    Chaos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    Global,
    PerLifeline,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Document files (.uml, .stm, .seq, .snap) or directories holding them.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub horizon: usize,
    #[arg(long, env = "UMLSEM_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    #[arg(long, value_enum, default_value_t = PolicyArg::Concurrent)]
    pub policy: PolicyArg,
    /// Overrides the policy declared by each state diagram.
    #[arg(long, value_enum)]
    pub unhandled: Option<UnhandledArg>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Trace file (simulate, conform) or report file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel searches; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    /// Check state rules after every tick, not only at quiescence.
    #[arg(long)]
    pub per_tick: bool,
    #[arg(long, value_enum, default_value_t = OrderArg::Global)]
    pub order: OrderArg,
    /// Refinement query between two state diagram files, `ABSTRACT=CONCRETE`.
    #[arg(long = "refine", value_name = "ABSTRACT=CONCRETE")]
    pub refine: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ConformArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = OrderArg::Global)]
    pub order: OrderArg,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{source}")]
    Parse { path: String, source: DslError },
    #[error("{0}")]
    Semantic(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Parse { .. } | CliError::Semantic(_) => EXIT_FAIL,
        }
    }
}

fn semantic(e: impl std::fmt::Display) -> CliError {
    CliError::Semantic(e.to_string())
}

impl Common {
    fn policy(&self) -> Policy {
        match self.policy {
            PolicyArg::Concurrent => Policy::Concurrent,
            PolicyArg::Sequential => Policy::Sequential,
        }
    }

    fn unhandled(&self) -> Option<UnhandledPolicy> {
        self.unhandled.map(|u| match u {
            UnhandledArg::Ignore => UnhandledPolicy::Ignore,
            UnhandledArg::Chaos => UnhandledPolicy::Chaos,
        })
    }

    fn build(&self) -> BuildOptions {
        // --budget bounds searches; automaton construction keeps its own limit
        BuildOptions {
            policy: self.unhandled(),
            budget: DEFAULT_BUDGET,
        }
    }
}

fn order(o: OrderArg) -> OrderMode {
    match o {
        OrderArg::Global => OrderMode::Global,
        OrderArg::PerLifeline => OrderMode::PerLifeline,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Model,
    Diagram,
    Sequence,
    Snapshot,
}

fn kind_of(path: &Path) -> Option<Kind> {
    match path.extension()?.to_str()? {
        "uml" => Some(Kind::Model),
        "stm" => Some(Kind::Diagram),
        "seq" => Some(Kind::Sequence),
        "snap" => Some(Kind::Snapshot),
        _ => None,
    }
}

/// Expands directories (one level, sorted) and classifies files by extension.
fn collect(files: &[PathBuf]) -> Result<Vec<(PathBuf, Kind)>, CliError> {
    let mut out = Vec::new();
    for f in files {
        if f.is_dir() {
            let rd = std::fs::read_dir(f).map_err(|source| CliError::Io { path: f.clone(), source })?;
            let mut entries: Vec<PathBuf> = rd.filter_map(|e| e.ok().map(|e| e.path())).collect();
            entries.sort();
            out.extend(entries.into_iter().filter_map(|p| kind_of(&p).map(|k| (p, k))));
        } else {
            let k = kind_of(f).ok_or_else(|| {
                CliError::Usage(format!("{}: unknown document kind (expected .uml, .stm, .seq or .snap)", f.display()))
            })?;
            out.push((f.clone(), k));
        }
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parsed<T>(path: &Path, r: Result<T, DslError>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn load(files: &[PathBuf]) -> Result<Documents, CliError> {
    let mut docs = Documents::default();
    for (path, kind) in collect(files)? {
        let text = read(&path)?;
        let name = path.display().to_string();
        match kind {
            Kind::Model => {
                if docs.model.is_some() {
                    return Err(CliError::Usage("at most one class model (.uml) may be given".into()));
                }
                docs.model = Some((name, parsed(&path, dsl::parse_class_model(&text))?));
            }
            Kind::Diagram => docs.diagrams.push((name, parsed(&path, dsl::parse_state_diagram(&text))?)),
            Kind::Sequence => docs.sequences.push((name, parsed(&path, dsl::parse_sequence_diagram(&text))?)),
            Kind::Snapshot => docs.snapshots.push((name, parsed(&path, dsl::parse_snapshot(&text))?)),
        }
    }
    if let Some((_, m)) = &docs.model {
        for (name, s) in &mut docs.snapshots {
            dsl::resolve_snapshot(s, m).map_err(|source| CliError::Parse {
                path: name.clone(),
                source,
            })?;
        }
    }
    Ok(docs)
}

/// Report output: stdout unless `--out` names a file.
fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn cmd_parse(c: &Common, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let docs = load(&c.files)?;
    let text = match c.format {
        Format::Json => {
            let mut files = Vec::new();
            if let Some((n, m)) = &docs.model {
                files.push(json!({"path": n, "kind": "class_model", "ast": m}));
            }
            files.extend(docs.diagrams.iter().map(|(n, d)| json!({"path": n, "kind": "state_diagram", "ast": d})));
            files.extend(docs.sequences.iter().map(|(n, d)| json!({"path": n, "kind": "sequence_diagram", "ast": d})));
            files.extend(docs.snapshots.iter().map(|(n, d)| json!({"path": n, "kind": "snapshot", "ast": d})));
            json_text(&json!({ "files": files }))
        }
        Format::Text => {
            let mut s = String::new();
            let mut section = |name: &str, body: String| {
                s.push_str(&format!("// {name}\n{body}"));
                if !body.ends_with('\n') {
                    s.push('\n');
                }
            };
            if let Some((n, m)) = &docs.model {
                section(n, print::class_model(m));
            }
            for (n, d) in &docs.diagrams {
                section(n, print::state_diagram(d));
            }
            for (n, d) in &docs.sequences {
                section(n, print::sequence_diagram(d));
            }
            for (n, d) in &docs.snapshots {
                section(n, print::snapshot(d));
            }
            s
        }
    };
    emit(&text, c.out.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

fn cmd_check(a: &CheckArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let c = &a.common;
    let docs = load(&c.files)?;
    let mut refinements = Vec::new();
    for r in &a.refine {
        let (abs, conc) = r
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--refine expects ABSTRACT=CONCRETE, got `{r}`")))?;
        for d in [abs, conc] {
            if !docs.diagrams.iter().any(|(n, _)| n == d) {
                return Err(CliError::Usage(format!("--refine names `{d}`, which is not a given state diagram file")));
            }
        }
        refinements.push((abs.to_string(), conc.to_string()));
    }
    let opts = CheckOptions {
        horizon: c.horizon,
        budget: c.budget,
        seed: c.seed,
        policy: c.policy(),
        unhandled: c.unhandled(),
        per_tick: a.per_tick,
        order: order(a.order),
        refinements,
    };
    let report = check_documents(&docs, &opts);
    let text = match c.format {
        Format::Json => json_text(&report.to_json()),
        Format::Text => report.to_text(),
    };
    emit(&text, c.out.as_deref(), stdout)?;
    Ok(match report.verdict {
        JointVerdict::JointlySatisfiable => EXIT_OK,
        JointVerdict::NotSatisfiable => EXIT_FAIL,
        JointVerdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn template(docs: &Documents, c: &Common) -> Result<WorldTemplate, CliError> {
    let (_, ast) = docs
        .model
        .as_ref()
        .ok_or_else(|| CliError::Usage("a class model (.uml) is required".into()))?;
    let model = elaborate_static(ast).map_err(semantic)?;
    let diagrams: Vec<_> = docs.diagrams.iter().map(|(_, d)| d.clone()).collect();
    let stss = automata(&model, &diagrams, &c.build()).map_err(semantic)?;
    let snapshot = match docs.snapshots.as_slice() {
        [] => Default::default(),
        [(_, s)] => s.clone(),
        _ => return Err(CliError::Usage("at most one snapshot (.snap) may be given".into())),
    };
    Ok(WorldTemplate { model, snapshot, stss })
}

fn cmd_simulate(c: &Common, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let out = c
        .out
        .as_deref()
        .ok_or_else(|| CliError::Usage("simulate writes its trace to a file; pass --out PATH".into()))?;
    let docs = load(&c.files)?;
    if docs.snapshots.len() != 1 {
        return Err(CliError::Usage("simulate needs exactly one snapshot (.snap)".into()));
    }
    let t = template(&docs, c)?;
    let system = System::new(t.model, &t.snapshot, t.stss).map_err(semantic)?;
    let world = World::new(system, c.seed, c.policy()).map_err(semantic)?.without_trajectory();
    let exec = world.run(c.horizon);
    std::fs::write(out, exec.trace()).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let summary = json!({
        "trace": out.display().to_string(),
        "seed": c.seed,
        "horizon": c.horizon,
        "ticks": exec.ticks,
        "termination": exec.termination,
        "messages": exec.sends().count(),
        "in_flight": exec.in_flight.len(),
    });
    let text = match c.format {
        Format::Json => json_text(&summary),
        Format::Text => format!(
            "{} ticks ({}), {} messages sent, {} in flight; trace written to {}\n",
            exec.ticks,
            summary["termination"].as_str().unwrap_or_default(),
            summary["messages"],
            summary["in_flight"],
            out.display()
        ),
    };
    emit(&text, None, stdout)?;
    Ok(EXIT_OK)
}

fn conformance_line(r: &ConformanceReport) -> String {
    match r.verdict {
        Verdict::Conforms => format!(
            "{}: conforms at bound {} (witness within {} ticks)\n",
            r.diagram,
            r.bound,
            r.witness_horizon.unwrap_or(0)
        ),
        Verdict::Fails => format!(
            "{}: fails at bound {}; interaction {} ({}) is never realized\n",
            r.diagram,
            r.bound,
            r.first_failing.unwrap_or(0) + 1,
            r.first_failing_pos.unwrap_or_default()
        ),
        Verdict::Inconclusive => format!(
            "{}: inconclusive at bound {}; budget exhausted after {} runs\n",
            r.diagram, r.bound, r.runs
        ),
    }
}

fn cmd_conform(a: &ConformArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let c = &a.common;
    let docs = load(&c.files)?;
    if docs.sequences.is_empty() {
        return Err(CliError::Usage("conform needs at least one sequence diagram (.seq)".into()));
    }
    if c.out.is_some() && docs.sequences.len() > 1 {
        return Err(CliError::Usage("--out takes the witness of a single sequence diagram".into()));
    }
    let t = template(&docs, c)?;
    let opts = ConformOptions {
        horizon: c.horizon,
        budget: c.budget,
        policy: c.policy(),
        order: order(a.order),
    };
    let mut reports = Vec::new();
    for (_, seq) in &docs.sequences {
        reports.push(check_exemplary(seq, &t, &opts).map_err(semantic)?);
    }
    if let (Some(out), Some(w)) = (&c.out, reports[0].witness.as_ref()) {
        std::fs::write(out, w.trace()).map_err(|source| CliError::Io {
            path: out.clone(),
            source,
        })?;
    }
    let text = match c.format {
        Format::Json => json_text(&serde_json::Value::Array(reports.iter().map(ConformanceReport::to_json).collect())),
        Format::Text => reports.iter().map(conformance_line).collect(),
    };
    emit(&text, None, stdout)?;
    let verdicts: Vec<Verdict> = reports.iter().map(|r| r.verdict).collect();
    Ok(if verdicts.contains(&Verdict::Fails) {
        EXIT_FAIL
    } else if verdicts.contains(&Verdict::Inconclusive) {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    })
}

fn cmd_refine(c: &Common, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let docs = load(&c.files)?;
    let [(abs_name, abs), (conc_name, conc)] = docs.diagrams.as_slice() else {
        return Err(CliError::Usage("refine needs two state diagrams: ABSTRACT.stm CONCRETE.stm".into()));
    };
    let (_, ast) = docs
        .model
        .as_ref()
        .ok_or_else(|| CliError::Usage("a class model (.uml) is required".into()))?;
    let model = elaborate_static(ast).map_err(semantic)?;
    let compile = |d: &dsl::StateDiagramAst| {
        let owner = d.owner.clone().unwrap_or_default();
        compile_diagram(d, &model, &owner, &c.build()).map_err(semantic)
    };
    let (a, k) = (compile(abs)?, compile(conc)?);
    let v = check_refinement(&a, &k, c.horizon, c.budget);
    let text = match c.format {
        Format::Json => json_text(&json!({
            "abstract": abs_name,
            "concrete": conc_name,
            "status": v.status,
            "holds": v.holds(),
            "bound": v.bound,
            "counterexample": v.counterexample,
            "spent": v.spent,
        })),
        Format::Text => match (&v.status, &v.counterexample) {
            (RefinementStatus::Fails, Some(cx)) => format!(
                "{conc_name} does not refine {abs_name} at bound {}: on input {} it may output {}\n",
                v.bound,
                serde_json::to_string(&cx.input).expect("json"),
                serde_json::to_string(&cx.output).expect("json"),
            ),
            (RefinementStatus::Inconclusive, _) => {
                format!("inconclusive at bound {}: budget of {} exhausted\n", v.bound, c.budget)
            }
            _ => format!("{conc_name} refines {abs_name} at bound {}\n", v.bound),
        },
    };
    emit(&text, c.out.as_deref(), stdout)?;
    Ok(match v.status {
        RefinementStatus::Holds => EXIT_OK,
        RefinementStatus::Fails => EXIT_FAIL,
        RefinementStatus::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Parse(c) | Command::Simulate(c) | Command::Refine(c) => c,
        Command::Check(a) => &a.common,
        Command::Conform(a) => &a.common,
    }
}

fn dispatch(cmd: &Command, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Parse(c) => cmd_parse(c, stdout),
        Command::Check(a) => cmd_check(a, stdout),
        Command::Simulate(c) => cmd_simulate(c, stdout),
        Command::Conform(a) => cmd_conform(a, stdout),
        Command::Refine(c) => cmd_refine(c, stdout),
    }
}

/// Runs one invocation and returns its exit code. Diagnostics go to
/// `stderr`, reports to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // --help and --version are not errors
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
    };
    let threads = common(&cli.command).threads;
    // reports are buffered so the worker pool never touches `stdout`
    let mut buf = Vec::new();
    let result = match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command, &mut buf)),
            Err(e) => Err(CliError::Usage(format!("cannot start {n} threads: {e}"))),
        },
        None => dispatch(&cli.command, &mut buf),
    };
    let _ = stdout.write_all(&buf);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "umlsem: {e}");
            e.exit_code()
        }
    }
}
