//! Command line front end.
//!
//! Four subcommands wire up the pipeline: `check` validates a model plus
//! its mappings, `grammar` prints the derived grammar, `parse` runs a
//! derived parser over an input file and prints the instance graph, and
//! `selftest` exercises the bundled self-hosting loop.
//!
//! Exit codes: 0 clean, 1 diagnostics with errors, 2 usage or I/O
//! trouble. Diagnostics go to standard error; requested artifacts go to
//! standard output. `MCC_COLOR=always`/`never` (or `1`/`0`) overrides
//! the terminal autodetection for diagnostic coloring.

use std::ffi::OsString;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::asm::{parse_model, validate_model, Model};
use crate::constraints::{self, CanonicalConstraintSet};
use crate::csm::export::export_grammar;
use crate::csm::derive_grammar;
use crate::diag::{has_errors, render, Diagnostic};
use crate::engine::parse_text;
use crate::{dsl, selfhost};

#[derive(Parser)]
#[command(
    name = "mcc",
    version,
    about = "Model-based parser generation: models in, parsers out"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model and its mappings for consistency
    Check {
        /// Model file
        model: PathBuf,
        /// Mapping files, applied left to right over the model's inline
        /// defaults
        mappings: Vec<PathBuf>,
        /// Reject mapping definitions that would need lenient repair
        #[arg(long)]
        strict: bool,
        /// How to report diagnostics
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// Print the grammar derived from a model and its mappings
    Grammar {
        /// Model file
        model: PathBuf,
        /// Mapping files, applied left to right
        mappings: Vec<PathBuf>,
        /// Output format
        #[arg(long, value_enum, default_value_t = GrammarFormat::Ebnf)]
        format: GrammarFormat,
        /// Start element; defaults to the first element in the model
        #[arg(long)]
        start: Option<String>,
    },
    /// Parse an input file with a derived parser and print its instance
    /// graph
    #[command(override_usage = "mcc parse <MODEL> [MAPPING]... <INPUT> [OPTIONS]")]
    Parse {
        /// Model file
        model: PathBuf,
        /// Mapping files, then the input file last
        #[arg(required = true, value_name = "MAPPING|INPUT")]
        files: Vec<PathBuf>,
        /// Start element; defaults to the first element in the model
        #[arg(long)]
        start: Option<String>,
        /// Repair missing definition colons in the input before parsing,
        /// as the lenient mapping parser would
        #[arg(long)]
        lenient: bool,
        /// Output format for the instance graph
        #[arg(long, value_enum, default_value_t = GraphFormat::Json)]
        format: GraphFormat,
    },
    /// Run the bundled self-hosting loop and report each stage
    Selftest,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum GrammarFormat {
    Ebnf,
    Json,
}

impl GrammarFormat {
    fn key(self) -> &'static str {
        match self {
            GrammarFormat::Ebnf => "ebnf",
            GrammarFormat::Json => "json",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Json,
}

/// Runs the CLI on the given arguments (the first is the program name)
/// and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Check { model, mappings, strict, format } => {
            cmd_check(&model, &mappings, strict, format)
        }
        Command::Grammar { model, mappings, format, start } => {
            cmd_grammar(&model, &mappings, format, start.as_deref())
        }
        Command::Parse { model, files, start, lenient, format: GraphFormat::Json } => {
            cmd_parse(&model, &files, start.as_deref(), lenient)
        }
        Command::Selftest => cmd_selftest(),
    }
}

fn color_enabled() -> bool {
    match std::env::var("MCC_COLOR").ok().as_deref() {
        Some("0") | Some("never") => false,
        Some("1") | Some("always") => true,
        _ => std::io::stderr().is_terminal(),
    }
}

fn read(path: &Path) -> Result<String, i32> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read `{}`: {e}", path.display());
        2
    })
}

fn tag(diags: &mut [Diagnostic], origin: &str) {
    for d in diags {
        if d.origin.is_none() {
            d.origin = Some(origin.to_string());
        }
    }
}

/// Everything the model-plus-mappings front half of the pipeline yields.
struct Loaded {
    model: Option<Model>,
    merged: CanonicalConstraintSet,
    diags: Vec<Diagnostic>,
    /// (name, text) per input, for rendering spans.
    sources: Vec<(String, String)>,
}

impl Loaded {
    fn print_diags(&self, format: ReportFormat) {
        print_diags(&self.diags, &self.sources, format);
    }
}

fn print_diags(diags: &[Diagnostic], sources: &[(String, String)], format: ReportFormat) {
    match format {
        ReportFormat::Json => {
            eprintln!("{}", serde_json::to_string_pretty(diags).unwrap());
        }
        ReportFormat::Text => {
            let color = color_enabled();
            for d in diags {
                let (name, text) = sources
                    .iter()
                    .find(|(n, _)| Some(n.as_str()) == d.origin.as_deref())
                    .or_else(|| sources.first())
                    .map(|(n, t)| (n.as_str(), t.as_str()))
                    .unwrap_or(("<input>", ""));
                eprint!("{}", render(d, name, text, color));
            }
        }
    }
}

/// Parses the model, folds its inline defaults together with each mapping
/// file in order, and checks the merged set. Diagnostics accumulate; a
/// missing model stops the pipeline, everything else is reported and
/// carried along.
fn load(model_path: &Path, mapping_paths: &[PathBuf], lenient: bool) -> Result<Loaded, i32> {
    let model_name = model_path.display().to_string();
    let model_src = read(model_path)?;
    let (model, mut diags) = parse_model(&model_src);
    tag(&mut diags, &model_name);
    let mut out = Loaded {
        model: None,
        merged: CanonicalConstraintSet::new(),
        diags,
        sources: vec![(model_name.clone(), model_src)],
    };
    let Some(model) = model else {
        return Ok(out);
    };

    let mut issues = validate_model(&model);
    tag(&mut issues, &model_name);
    out.diags.extend(issues);

    let mut sets = vec![constraints::model_defaults(&model)];
    for path in mapping_paths {
        let name = path.display().to_string();
        let src = read(path)?;
        let (doc, mut d) = dsl::parse_mapping(&src, lenient);
        tag(&mut d, &name);
        out.diags.extend(d);
        let (set, mut d) = constraints::lower(&model, &doc);
        tag(&mut d, &name);
        out.diags.extend(d);
        sets.push(set);
        out.sources.push((name, src));
    }

    let refs: Vec<&CanonicalConstraintSet> = sets.iter().collect();
    out.merged = constraints::merge(&refs);
    let mut issues = constraints::check_consistency(&model, &out.merged);
    tag(&mut issues, &model_name);
    out.diags.extend(issues);
    out.model = Some(model);
    Ok(out)
}

fn cmd_check(
    model: &Path,
    mappings: &[PathBuf],
    strict: bool,
    format: ReportFormat,
) -> i32 {
    let loaded = match load(model, mappings, !strict) {
        Ok(l) => l,
        Err(code) => return code,
    };
    if !loaded.diags.is_empty() || format == ReportFormat::Json {
        loaded.print_diags(format);
    }
    i32::from(has_errors(&loaded.diags))
}

fn cmd_grammar(
    model: &Path,
    mappings: &[PathBuf],
    format: GrammarFormat,
    start: Option<&str>,
) -> i32 {
    let mut loaded = match load(model, mappings, true) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let grammar = match &loaded.model {
        Some(m) if !has_errors(&loaded.diags) => {
            let (grammar, mut d) = derive_grammar(m, &loaded.merged, start);
            tag(&mut d, &loaded.sources[0].0.clone());
            loaded.diags.extend(d);
            grammar
        }
        _ => {
            loaded.print_diags(ReportFormat::Text);
            return 1;
        }
    };
    loaded.print_diags(ReportFormat::Text);
    if has_errors(&loaded.diags) {
        return 1;
    }
    match export_grammar(&grammar, format.key()) {
        Ok(text) => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            0
        }
        Err(d) => {
            print_diags(&[d], &loaded.sources, ReportFormat::Text);
            2
        }
    }
}

fn cmd_parse(model: &Path, files: &[PathBuf], start: Option<&str>, lenient: bool) -> i32 {
    let (input_path, mapping_paths) = files.split_last().expect("clap requires one file");
    let mut loaded = match load(model, mapping_paths, true) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let (model_def, grammar) = match &loaded.model {
        Some(m) if !has_errors(&loaded.diags) => {
            let (grammar, mut d) = derive_grammar(m, &loaded.merged, start);
            tag(&mut d, &loaded.sources[0].0.clone());
            loaded.diags.extend(d);
            (m.clone(), grammar)
        }
        _ => {
            loaded.print_diags(ReportFormat::Text);
            return 1;
        }
    };
    if has_errors(&loaded.diags) {
        loaded.print_diags(ReportFormat::Text);
        return 1;
    }

    let input_name = input_path.display().to_string();
    let input_src = match read(input_path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let text = if lenient {
        let (repaired, mut d) = dsl::repair_source(&input_src);
        tag(&mut d, &input_name);
        loaded.diags.extend(d);
        repaired
    } else {
        input_src
    };

    let (graph, mut d) = parse_text(&grammar, &model_def, &text);
    tag(&mut d, &input_name);
    loaded.diags.extend(d);
    loaded.sources.push((input_name, text));

    loaded.print_diags(ReportFormat::Text);
    match graph {
        Some(g) => {
            let json = g.to_stable_json(&model_def);
            println!("{}", serde_json::to_string_pretty(&json).unwrap());
            i32::from(has_errors(&loaded.diags))
        }
        None => 1,
    }
}

fn cmd_selftest() -> i32 {
    let reports = selfhost::selftest();
    let mut first_failure = None;
    for r in &reports {
        let mark = if r.ok { "ok  " } else { "FAIL" };
        println!("{mark} {:<12} {}", r.stage, r.detail);
        if !r.ok && first_failure.is_none() {
            first_failure = Some(r.stage);
        }
    }
    match first_failure {
        None => 0,
        Some(stage) => {
            eprintln!("selftest failed at stage `{stage}`");
            1
        }
    }
}
