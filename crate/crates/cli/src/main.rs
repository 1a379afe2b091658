//! Command-line front end: evaluate queries, inspect parses, and run the
//! verification suites.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use folsem::oracle::{run_suites, run_suites_on, GenParams, SuiteParams, SuiteSummary};
use folsem::semantics::{eval_answers_with, EvalOptions, Mutation};
use folsem::{
    parse_formula, parse_formula_lenient, parse_subst, parse_term, parse_term_lenient,
    Interpretation, InterpretationDoc, Substitution,
};

#[derive(Parser)]
#[command(
    name = "folsem",
    version,
    about = "Run first-order formulas as programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a query, printing every answer with its delta
    #[command(group(ArgGroup::new("source").required(true).args(["query", "query_file"])))]
    Eval {
        /// Interpretation document path, or `int` for integer arithmetic
        #[arg(long)]
        interp: String,
        /// Query text
        #[arg(long)]
        query: Option<String>,
        /// File containing the query text
        #[arg(long)]
        query_file: Option<PathBuf>,
        /// Initial substitution, e.g. `{x/1}`
        #[arg(long, default_value = "{}")]
        subst: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Parse input and print its canonical rendering
    Parse {
        #[arg(long)]
        query: String,
        /// Interpretation to check symbols against; omit to parse leniently
        #[arg(long)]
        interp: Option<String>,
        #[arg(long, value_enum, default_value_t = Kind::Auto)]
        kind: Kind,
    },
    /// Run the verification suites over seeded random instances
    Check {
        /// Base seed; instance i uses seed + i
        #[arg(long)]
        seed: u64,
        /// Number of instances
        #[arg(long, default_value_t = 1000)]
        count: u64,
        /// Run over this fixed interpretation instead of generated ones
        #[arg(long)]
        interp: Option<String>,
        /// Write the full report as JSON
        #[arg(long)]
        report: Option<PathBuf>,
        /// Corrupt the evaluator on purpose, to demonstrate the checks react
        #[arg(long, value_enum)]
        mutate: Option<MutateArg>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Auto,
    Term,
    Formula,
    Subst,
}

#[derive(Clone, Copy, ValueEnum)]
enum MutateArg {
    AcceptGroundMismatch,
    NegationErrorAsFailure,
    SkipDrop,
}

impl From<MutateArg> for Mutation {
    fn from(arg: MutateArg) -> Mutation {
        match arg {
            MutateArg::AcceptGroundMismatch => Mutation::AcceptGroundMismatch,
            MutateArg::NegationErrorAsFailure => Mutation::NegationErrorAsFailure,
            MutateArg::SkipDrop => Mutation::SkipDrop,
        }
    }
}

struct Failure {
    message: String,
    code: u8,
}

fn malformed(message: impl Into<String>) -> Failure {
    Failure {
        message: message.into(),
        code: 3,
    }
}

fn load_doc(spec: &str) -> Result<InterpretationDoc, Failure> {
    if spec == "int" {
        return InterpretationDoc::from_json(r#"{"domain": "int"}"#)
            .map_err(|e| malformed(e.to_string()));
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| malformed(format!("cannot read `{spec}`: {e}")))?;
    InterpretationDoc::from_json(&text).map_err(|e| malformed(format!("in `{spec}`: {e}")))
}

fn load_interp(spec: &str) -> Result<(InterpretationDoc, Interpretation), Failure> {
    let doc = load_doc(spec)?;
    let interp = doc
        .build()
        .map_err(|e| malformed(format!("in `{spec}`: {e}")))?;
    Ok((doc, interp))
}

fn subst_json(theta: &Substitution) -> serde_json::Value {
    let map: BTreeMap<String, String> = theta
        .iter()
        .map(|(x, h)| (x.to_string(), h.to_string()))
        .collect();
    serde_json::json!(map)
}

fn cmd_eval(
    interp: String,
    query: Option<String>,
    query_file: Option<PathBuf>,
    subst: String,
    format: Format,
) -> Result<u8, Failure> {
    let (_, interp) = load_interp(&interp)?;
    let query = match (query, query_file) {
        (Some(text), None) => text,
        (None, Some(path)) => std::fs::read_to_string(&path)
            .map_err(|e| malformed(format!("cannot read `{}`: {e}", path.display())))?,
        _ => unreachable!("clap enforces exactly one query source"),
    };
    let phi =
        parse_formula(query.trim(), &interp).map_err(|e| malformed(format!("in query: {e}")))?;
    let theta =
        parse_subst(&subst, &interp).map_err(|e| malformed(format!("in substitution: {e}")))?;
    let result = eval_answers_with(&phi, &theta, &interp, EvalOptions::default())
        .map_err(|e| malformed(e.to_string()))?;

    match format {
        Format::Text => {
            for answer in &result.answers {
                println!("{}  delta {}", answer.full, answer.delta);
            }
            if result.error {
                println!("error");
            } else if result.answers.is_empty() {
                println!("false");
            }
        }
        Format::Json => {
            let answers: Vec<serde_json::Value> = result
                .answers
                .iter()
                .map(|a| {
                    serde_json::json!({
                        "full": subst_json(&a.full),
                        "delta": subst_json(&a.delta),
                    })
                })
                .collect();
            let doc = serde_json::json!({ "answers": answers, "error": result.error });
            println!("{doc}");
        }
    }

    Ok(if result.error {
        2
    } else if result.answers.is_empty() {
        1
    } else {
        0
    })
}

fn cmd_parse(query: String, interp: Option<String>, kind: Kind) -> Result<u8, Failure> {
    let loaded = interp.map(|spec| load_interp(&spec)).transpose()?;
    let interp = loaded.as_ref().map(|(_, i)| i);

    let as_term = |input: &str| -> Result<String, folsem::ParseError> {
        match interp {
            Some(i) => parse_term(input, i).map(|t| t.to_string()),
            None => parse_term_lenient(input).map(|t| t.to_string()),
        }
    };
    let as_formula = |input: &str| -> Result<String, folsem::ParseError> {
        match interp {
            Some(i) => parse_formula(input, i).map(|f| f.to_string()),
            None => parse_formula_lenient(input).map(|f| f.to_string()),
        }
    };
    let as_subst = |input: &str| -> Result<String, Failure> {
        match interp {
            Some(i) => parse_subst(input, i)
                .map(|s| s.to_string())
                .map_err(|e| malformed(format!("in substitution: {e}"))),
            None => Err(malformed(
                "substitution literals need --interp to evaluate their ranges",
            )),
        }
    };

    let input = query.trim();
    let (kind_name, rendered) = match kind {
        Kind::Term => (
            "term",
            as_term(input).map_err(|e| malformed(e.to_string()))?,
        ),
        Kind::Formula => (
            "formula",
            as_formula(input).map_err(|e| malformed(e.to_string()))?,
        ),
        Kind::Subst => ("subst", as_subst(input)?),
        Kind::Auto => {
            if input.starts_with('{') {
                ("subst", as_subst(input)?)
            } else {
                match as_formula(input) {
                    Ok(rendered) => ("formula", rendered),
                    Err(formula_err) => match as_term(input) {
                        Ok(rendered) => ("term", rendered),
                        Err(_) => return Err(malformed(formula_err.to_string())),
                    },
                }
            }
        }
    };
    println!("{kind_name}: {rendered}");
    Ok(0)
}

fn print_summary(summary: &SuiteSummary) {
    for (name, tally) in &summary.suites {
        println!(
            "{name}: {} pass, {} fail, {} n/a",
            tally.pass, tally.fail, tally.not_applicable
        );
    }
    println!(
        "total: {} instances from seed {}, {} failing checks",
        summary.count,
        summary.seed,
        summary.failure_count()
    );
}

fn cmd_check(
    seed: u64,
    count: u64,
    interp: Option<String>,
    report: Option<PathBuf>,
    mutate: Option<MutateArg>,
) -> Result<u8, Failure> {
    let params = SuiteParams {
        count,
        seed,
        gen: GenParams::default(),
        options: EvalOptions {
            mutation: mutate.map(Mutation::from),
        },
    };
    let summary = match interp {
        None => run_suites(&params),
        Some(spec) => {
            let (doc, interp) = load_interp(&spec)?;
            run_suites_on(&interp, Some(&doc), &params)
        }
    }
    .map_err(|e| malformed(e.to_string()))?;

    print_summary(&summary);
    if let Some(path) = report {
        let json = serde_json::to_string_pretty(&summary).expect("summary serialization");
        std::fs::write(&path, json)
            .map_err(|e| malformed(format!("cannot write `{}`: {e}", path.display())))?;
    }
    Ok(if summary.failure_count() == 0 { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval {
            interp,
            query,
            query_file,
            subst,
            format,
        } => cmd_eval(interp, query, query_file, subst, format),
        Command::Parse {
            query,
            interp,
            kind,
        } => cmd_parse(query, interp, kind),
        Command::Check {
            seed,
            count,
            interp,
            report,
            mutate,
        } => cmd_check(seed, count, interp, report, mutate),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("folsem: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
