//! Command-line front end for the ontokit pipeline.
//!
//! Exit codes: 0 success, 1 analysis failure, 2 bad input content, 3 I/O
//! error.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ontokit::alignment::{load_dolce, parse_alignment, AlignmentReport, DolceTaxonomy};
use ontokit::consistency::{check_doc, DiagnosticReport, Severity};
use ontokit::model::{ConceptGraph, NormalizationConfig, OntologyDoc};
use ontokit::owl::{emit_unchecked, OwlDocument, DEFAULT_BASE_IRI};
use ontokit::parser::parse_ontology;
use ontokit::srs::{
    compare_expectations, parse_expectations, parse_questions, srs_report, ExpectationOutcome,
    ExpectationStatus, SrsError, SrsReport,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "ontokit",
    version,
    about = "Check, score, align and export description-logic ontologies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural consistency check.
    Check(RunArgs),
    /// Competency-question relatedness scores.
    Srs(RunArgs),
    /// Validate an alignment to the DOLCE taxonomy.
    Align(RunArgs),
    /// Write the ontology as OWL RDF/XML.
    EmitOwl(RunArgs),
    /// Run every step the given inputs allow and bundle the results.
    Report(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Ontology in the axiom DSL, one axiom per line.
    #[arg(long)]
    pub ontology: PathBuf,
    /// Question mappings (JSON records with id, text, concepts).
    #[arg(long)]
    pub questions: Option<PathBuf>,
    /// Expected scores to compare against (JSON records).
    #[arg(long)]
    pub expectations: Option<PathBuf>,
    /// Concept to DOLCE category map (JSON records with concept, dolce).
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// Replacement taxonomy (JSON records with category, parent).
    #[arg(long)]
    pub dolce: Option<PathBuf>,
    /// Roles whose fillers count as children.
    #[arg(long, value_delimiter = ',', default_value = "hasDivision")]
    pub composition_roles: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write output here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Proceed past structural errors.
    #[arg(long)]
    pub force: bool,
    /// Stamp the output with the current time.
    #[arg(long)]
    pub timestamps: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Analysis(String),
    Input(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Analysis(_) => 1,
            CliError::Input(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Analysis(m) | CliError::Input(m) | CliError::Io(m) => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrsSection {
    #[serde(flatten)]
    pub report: SrsReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expectations: Vec<ExpectationOutcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwlSection {
    pub class_count: usize,
    pub property_count: usize,
    pub individual_count: usize,
    /// Present unless the document went to `--out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xml: Option<String>,
}

/// Machine-readable output of every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<DiagnosticReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub srs: Option<SrsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alignment: Option<AlignmentReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owl: Option<OwlSection>,
}

impl Envelope {
    fn new(command: &str, args: &RunArgs) -> Self {
        Envelope {
            command: command.to_string(),
            generated_at: args
                .timestamps
                .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
            check: None,
            srs: None,
            alignment: None,
            owl: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
        s.push('\n');
        s
    }
}

/// Result of a command: what to print, and the exit status.
#[derive(Debug)]
pub struct Run {
    pub output: String,
    pub code: i32,
    pub stderr: Vec<String>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_out(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

struct Loaded {
    cfg: NormalizationConfig,
    doc: OntologyDoc,
    graph: ConceptGraph,
    report: DiagnosticReport,
}

fn load(args: &RunArgs) -> Result<Loaded, CliError> {
    let cfg = NormalizationConfig::with_composition_roles(args.composition_roles.iter().cloned())
        .map_err(|e| CliError::Input(e.to_string()))?;
    let source = read(&args.ontology)?;
    let name = args
        .ontology
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let doc = parse_ontology(&source, &name).map_err(|errs| {
        let lines: Vec<String> = errs
            .iter()
            .map(|e| format!("{}:{e}", args.ontology.display()))
            .collect();
        CliError::Input(lines.join("\n"))
    })?;
    let (graph, report) = check_doc(&doc, &cfg);
    Ok(Loaded {
        cfg,
        doc,
        graph,
        report,
    })
}

fn gate(loaded: &Loaded, args: &RunArgs) -> Result<(), CliError> {
    if loaded.report.clean || args.force {
        Ok(())
    } else {
        Err(CliError::Analysis(format!(
            "{} has {} structural error(s); run `check` for details or pass --force",
            loaded.doc.name, loaded.report.error_count
        )))
    }
}

fn srs_section(loaded: &Loaded, args: &RunArgs, questions: &Path) -> Result<SrsSection, CliError> {
    let input = |e: SrsError| match e {
        SrsError::CycleDetected(_) | SrsError::Overflow(_) => CliError::Analysis(e.to_string()),
        SrsError::DuplicateQuestionId(_) | SrsError::Malformed(_) => {
            CliError::Input(format!("{}: {e}", questions.display()))
        }
    };
    let qs = parse_questions(&read(questions)?).map_err(input)?;
    let report = srs_report(&loaded.graph, &loaded.cfg, &qs).map_err(input)?;
    let expectations = match &args.expectations {
        Some(path) => {
            let exps = parse_expectations(&read(path)?)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            compare_expectations(&report, &exps)
        }
        None => Vec::new(),
    };
    Ok(SrsSection {
        report,
        expectations,
    })
}

fn taxonomy(args: &RunArgs) -> Result<DolceTaxonomy, CliError> {
    let text = args.dolce.as_deref().map(read).transpose()?;
    load_dolce(text.as_deref()).map_err(|e| CliError::Input(e.to_string()))
}

fn alignment(loaded: &Loaded, args: &RunArgs, mapping: &Path) -> Result<AlignmentReport, CliError> {
    let tax = taxonomy(args)?;
    let map = parse_alignment(&read(mapping)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", mapping.display())))?;
    Ok(ontokit::validate_alignment(&loaded.graph, &map, &tax))
}

fn alignment_failure(report: &AlignmentReport) -> Option<CliError> {
    report
        .ensure_valid()
        .err()
        .map(|e| CliError::Analysis(e.to_string()))
}

fn owl_section(doc: &OwlDocument, inline: bool) -> OwlSection {
    OwlSection {
        class_count: doc.class_count,
        property_count: doc.property_count,
        individual_count: doc.individual_count,
        xml: inline.then(|| doc.xml_text.clone()),
    }
}

fn require<'a>(path: &'a Option<PathBuf>, flag: &str, command: &str) -> Result<&'a Path, CliError> {
    path.as_deref()
        .ok_or_else(|| CliError::Input(format!("`{command}` needs --{flag}")))
}

pub fn render_text(env: &Envelope) -> String {
    let mut out = String::new();
    if let Some(at) = &env.generated_at {
        let _ = writeln!(out, "generated at {at}");
    }
    if let Some(report) = &env.check {
        render_check(&mut out, report);
    }
    if let Some(section) = &env.srs {
        render_srs(&mut out, section);
    }
    if let Some(report) = &env.alignment {
        render_alignment(&mut out, report);
    }
    if let Some(owl) = &env.owl {
        match &owl.xml {
            Some(xml) if env.command == "emit-owl" => out.push_str(xml),
            _ => {
                let _ = writeln!(
                    out,
                    "owl: {} classes, {} properties, {} individuals",
                    owl.class_count, owl.property_count, owl.individual_count
                );
            }
        }
    }
    out
}

fn render_check(out: &mut String, report: &DiagnosticReport) {
    for d in &report.diagnostics {
        let level = match d.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        let _ = write!(
            out,
            "{level}[{}] {}: {}",
            d.code,
            d.subjects.join(", "),
            d.message
        );
        if !d.source_lines.is_empty() {
            let lines: Vec<String> = d.source_lines.iter().map(|l| l.to_string()).collect();
            let _ = write!(out, " (line {})", lines.join(", "));
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "{} errors, {} warnings",
        report.error_count, report.warning_count
    );
}

fn render_srs(out: &mut String, section: &SrsSection) {
    let report = &section.report;
    let width = report
        .entries
        .iter()
        .map(|e| e.question.len())
        .max()
        .unwrap_or(2)
        .max(2);
    let _ = writeln!(out, "{:<width$}  {:>5}  concepts", "id", "srs");
    for e in &report.entries {
        let parts: Vec<String> = e
            .per_concept
            .iter()
            .map(|c| {
                if c.present {
                    format!("{}={}", c.concept, c.card)
                } else {
                    format!("{}=absent", c.concept)
                }
            })
            .collect();
        let _ = writeln!(
            out,
            "{:<width$}  {:>5}  {}",
            e.question,
            e.srs,
            parts.join(" + ")
        );
    }
    let _ = writeln!(out, "min {}, max {}", report.min_srs, report.max_srs);
    if !report.unmapped_concepts.is_empty() {
        let names: Vec<&str> = report
            .unmapped_concepts
            .iter()
            .map(String::as_str)
            .collect();
        let _ = writeln!(out, "not in the ontology: {}", names.join(", "));
    }
    for o in &section.expectations {
        let computed = o.computed.map_or("-".to_string(), |v| v.to_string());
        let status = match o.status {
            ExpectationStatus::Match => "match".to_string(),
            ExpectationStatus::FlaggedDiscrepancy => match o.paper_value {
                Some(p) => format!("recomputed (published {p})"),
                None => "recomputed".to_string(),
            },
            ExpectationStatus::Mismatch => "MISMATCH".to_string(),
            ExpectationStatus::Missing => "missing".to_string(),
        };
        let _ = writeln!(
            out,
            "expect {:<width$} {:>5} got {:>5}  {status}",
            o.id, o.expected, computed
        );
    }
}

fn render_alignment(out: &mut String, report: &AlignmentReport) {
    let _ = writeln!(out, "coverage {:.3}", report.coverage);
    if report.coverage == 0.0 {
        let _ = writeln!(out, "warning: no class is aligned");
    }
    if !report.unmapped.is_empty() {
        let _ = writeln!(out, "unmapped: {}", report.unmapped.join(", "));
    }
    if !report.absent.is_empty() {
        let _ = writeln!(out, "not in the ontology: {}", report.absent.join(", "));
    }
    for i in &report.incompatibilities {
        let _ = writeln!(
            out,
            "warning: {} ({}) is a subclass of {} ({}), but {} is not under {}",
            i.child, i.dolce_child, i.parent, i.dolce_parent, i.dolce_child, i.dolce_parent
        );
    }
    for u in &report.unknown_categories {
        let _ = writeln!(
            out,
            "error: {} is aligned to unknown category `{}`",
            u.concept, u.category
        );
    }
    let _ = writeln!(out, "{} incompatibilities", report.incompatibilities.len());
}

fn execute(name: &str, args: &RunArgs) -> Result<(Envelope, Option<CliError>), CliError> {
    let loaded = load(args)?;
    let mut env = Envelope::new(name, args);
    let mut failure = None;
    match name {
        "check" => {
            if !loaded.report.clean {
                failure = Some(CliError::Analysis(format!(
                    "{} error(s)",
                    loaded.report.error_count
                )));
            }
            env.check = Some(loaded.report);
        }
        "srs" => {
            let questions = require(&args.questions, "questions", name)?;
            gate(&loaded, args)?;
            env.srs = Some(srs_section(&loaded, args, questions)?);
        }
        "align" => {
            let mapping = require(&args.mapping, "mapping", name)?;
            let report = alignment(&loaded, args, mapping)?;
            failure = alignment_failure(&report);
            env.alignment = Some(report);
        }
        "emit-owl" => {
            gate(&loaded, args)?;
            let doc = emit_unchecked(&loaded.graph, DEFAULT_BASE_IRI);
            env.owl = Some(owl_section(&doc, true));
        }
        _ => {
            let clean = loaded.report.clean;
            if !clean && !args.force {
                failure = gate(&loaded, args).err();
            } else {
                if let Some(q) = &args.questions {
                    env.srs = Some(srs_section(&loaded, args, q)?);
                }
                if let Some(m) = &args.mapping {
                    let report = alignment(&loaded, args, m)?;
                    failure = alignment_failure(&report);
                    env.alignment = Some(report);
                }
                let doc = emit_unchecked(&loaded.graph, DEFAULT_BASE_IRI);
                env.owl = Some(owl_section(&doc, args.format == Format::Json));
            }
            env.check = Some(loaded.report);
        }
    }
    Ok((env, failure))
}

/// Runs one command and renders its output. Does not touch stdout; an
/// `--out` file is written here.
pub fn run(command: &Command) -> Run {
    let (name, args) = match command {
        Command::Check(a) => ("check", a),
        Command::Srs(a) => ("srs", a),
        Command::Align(a) => ("align", a),
        Command::EmitOwl(a) => ("emit-owl", a),
        Command::Report(a) => ("report", a),
    };
    let result = execute(name, args).and_then(|(env, failure)| {
        let text = match args.format {
            Format::Text => render_text(&env),
            Format::Json => env.to_json(),
        };
        let output = match &args.out {
            Some(path) => {
                write_out(path, &text)?;
                String::new()
            }
            None => text,
        };
        Ok((output, failure))
    });
    match result {
        Ok((output, None)) => Run {
            output,
            code: 0,
            stderr: Vec::new(),
        },
        Ok((output, Some(f))) => Run {
            output,
            code: f.exit_code(),
            stderr: vec![format!("error: {}", f.message())],
        },
        Err(e) => Run {
            output: String::new(),
            code: e.exit_code(),
            stderr: vec![format!("error: {}", e.message())],
        },
    }
}

/// Prints a finished run and returns its exit code.
pub fn finish(run: Run) -> i32 {
    let mut stdout = std::io::stdout().lock();
    if stdout
        .write_all(run.output.as_bytes())
        .and_then(|_| stdout.flush())
        .is_err()
    {
        return 3;
    }
    for line in &run.stderr {
        eprintln!("{line}");
    }
    run.code
}
