use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser as ClapParser, Subcommand};
use thiserror::Error;

use tfsam::compiler::{compile_program, compile_query, disassemble, CodeArea};
use tfsam::machine::{unify_terms, MachineConfig};
use tfsam::terms::{flatten, well_typed_check};
use tfsam::{parse_term, Grammar, Machine, ParseError, Parser, ParserConfig, Term, TypeHierarchy};

#[derive(ClapParser)]
#[command(
    name = "tfsam",
    version,
    about = "Typed feature structure compiler and abstract machine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a type hierarchy or grammar file
    Check { path: PathBuf },
    /// Compile a grammar, or single terms against its hierarchy
    Compile {
        path: PathBuf,
        /// Print full instruction listings instead of a summary
        #[arg(long)]
        disasm: bool,
        /// Compile TERM as query code instead of the grammar
        #[arg(long, value_name = "TERM")]
        query: Option<String>,
        /// Compile TERM as program code instead of the grammar
        #[arg(long, value_name = "TERM")]
        program: Option<String>,
    },
    /// Unify two terms: the first is built on the heap, the second is run against it
    Unify {
        path: PathBuf,
        query: String,
        program: String,
        #[arg(long)]
        dump_heap: bool,
        /// Expand introduced features eagerly instead of using VAR cells
        #[arg(long)]
        eager: bool,
        #[arg(long)]
        no_path_compression: bool,
    },
    /// Parse a space-separated input with a grammar
    Parse {
        path: PathBuf,
        input: String,
        #[arg(long)]
        chart: bool,
        #[arg(long, value_name = "N")]
        max_items: Option<usize>,
        #[arg(long, value_name = "N")]
        max_steps: Option<usize>,
        #[arg(long)]
        no_path_compression: bool,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Limit(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Limit(_) => 3,
        }
    }
}

fn invalid(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<Grammar, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Grammar::parse(&text).map_err(|e| invalid(path, e))
}

fn term(text: &str, h: &TypeHierarchy) -> Result<Term, CliError> {
    let t = parse_term(text, h).map_err(|e| CliError::Invalid(format!("`{text}`: {e}")))?;
    if let Some(v) = well_typed_check(&t, h).first() {
        return Err(CliError::Invalid(format!(
            "`{text}` is not well-typed: {}",
            v.display(h)
        )));
    }
    Ok(t)
}

fn check(path: &Path) -> Result<String, CliError> {
    let g = load(path)?;
    let h = &g.hierarchy;
    let mut out = format!("{} types, valid\n", h.type_count());
    out += &format!(
        "{} features, {} consistent pairs, depth {}\n",
        h.feature_count(),
        h.consistent_pairs(),
        h.depth()
    );
    if h.has_appropriateness_loop() {
        out += "appropriateness loops present (lazy mode required)\n";
    }
    if !g.rules.is_empty() || !g.lexicon.is_empty() || g.start.is_some() {
        out += &format!(
            "{} rules, {} lexical entries, {}\n",
            g.rules.len(),
            g.lexicon.len(),
            if g.start.is_some() {
                "start"
            } else {
                "no start"
            }
        );
    }
    for w in g.warnings() {
        out += &format!("warning: {w}\n");
    }
    Ok(out)
}

fn compile(
    path: &Path,
    disasm: bool,
    query: Option<&str>,
    program: Option<&str>,
) -> Result<String, CliError> {
    let g = load(path)?;
    let h = &g.hierarchy;
    let area = if query.is_some() || program.is_some() {
        let mut area = CodeArea::default();
        if let Some(q) = query {
            area.push("query", &compile_query(&flatten(&term(q, h)?)));
        }
        if let Some(p) = program {
            area.push("program", &compile_program(&flatten(&term(p, h)?)));
        }
        area
    } else {
        Parser::new(&g, ParserConfig::default()).code_area()
    };
    if disasm || query.is_some() || program.is_some() {
        return Ok(disassemble(&area, h));
    }
    let mut out = String::new();
    for (k, (label, start)) in area.labels.iter().enumerate() {
        let end = area.labels.get(k + 1).map_or(area.code.len(), |l| l.1);
        out += &format!("{label}: {} instructions\n", end - start);
    }
    Ok(out)
}

fn unify(
    path: &Path,
    query: &str,
    program: &str,
    dump_heap: bool,
    cfg: MachineConfig,
) -> Result<String, CliError> {
    let g = load(path)?;
    let h = &g.hierarchy;
    let (q, p) = (term(query, h)?, term(program, h)?);
    let mut m = Machine::with_config(h, cfg).map_err(|e| CliError::Invalid(e.to_string()))?;
    let result = unify_terms(&mut m, &q, &p).map_err(|e| CliError::Invalid(e.to_string()))?;
    let mut out = match result.as_ref().and_then(|r| r.to_term()) {
        Some(t) => format!("{}\n", t.display(h)),
        None => "FAIL\n".to_string(),
    };
    if dump_heap {
        out += &m.dump_heap(1);
    }
    Ok(out)
}

fn parse(path: &Path, input: &str, chart: bool, cfg: ParserConfig) -> Result<String, CliError> {
    let g = load(path)?;
    let words: Vec<&str> = input.split_whitespace().collect();
    let p = Parser::new(&g, cfg);
    let r = p.parse(&words).map_err(|e| match e {
        ParseError::LimitExceeded { .. } => CliError::Limit(e.to_string()),
        e => CliError::Invalid(e.to_string()),
    })?;
    let mut out = String::new();
    if chart {
        out += &r.chart_dump(p.rules(), &g.hierarchy);
        out += "--\n";
    }
    let heads = r.heads();
    if heads.is_empty() {
        out += "no parse\n";
    }
    for t in heads {
        out += &format!("{}\n", t.display(&g.hierarchy));
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Check { path } => check(&path),
        Command::Compile {
            path,
            disasm,
            query,
            program,
        } => compile(&path, disasm, query.as_deref(), program.as_deref()),
        Command::Unify {
            path,
            query,
            program,
            dump_heap,
            eager,
            no_path_compression,
        } => {
            let cfg = MachineConfig {
                lazy: !eager,
                path_compression: !no_path_compression,
            };
            unify(&path, &query, &program, dump_heap, cfg)
        }
        Command::Parse {
            path,
            input,
            chart,
            max_items,
            max_steps,
            no_path_compression,
        } => {
            let mut cfg = ParserConfig::default();
            cfg.max_items = max_items.unwrap_or(cfg.max_items);
            cfg.max_steps = max_steps.unwrap_or(cfg.max_steps);
            cfg.machine.path_compression = !no_path_compression;
            parse(&path, &input, chart, cfg)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
