//! Library behind the `incver` command: parsing, the arithmetic demo, and
//! reliability or safety verification of Mini programs, from scratch or
//! incrementally against a previous version.

pub mod config;
mod report;

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use incver_core::arith::{arithmetic_grammar, tokenize_arithmetic, ArithLexError, ArithmeticSchema};
use incver_core::grammar::Grammar;
use incver_core::incremental::EditError;
use incver_core::mini::{PreorderNumbering, LexError, Mini};
use incver_core::parser::{Node, NodeKind, ParseError};
use incver_core::reliability::{reliability_warnings, ReliabilityProfile, ReliabilitySchema, ReliabilityValue};
use incver_core::safety::{
    automaton_warnings, image_automaton, safety_verdict, PropertyAutomaton, SafetySchema, SafetyValue, Verdict,
};
use incver_core::{
    apply_edit, compute_opm, diff_to_edit, evaluate, parse, reevaluate, AttributeMap, AttributeSchema, Rational,
    RecomputeStats, SyntaxTree, Token,
};
use thiserror::Error;

pub use report::{DumpNode, Outcome, RecomputeReport, Report, ReuseReport, TreeDump};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("{path}: {source} (line {line}, column {column})")]
    Lex { path: String, source: LexError, line: usize, column: usize },
    #[error("{path}: {source}")]
    ArithLex { path: String, source: ArithLexError },
    #[error("{path}: {source}{location}")]
    Syntax { path: String, source: ParseError, location: String },
    #[error("{path}: {message}")]
    Evaluation { path: String, message: String },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SchemaKind {
    Reliability,
    Safety,
}

impl SchemaKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemaKind::Reliability => "reliability",
            SchemaKind::Safety => "safety",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GrammarKind {
    Mini,
    Arith,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub schema: SchemaKind,
    pub profile: Option<PathBuf>,
    pub automaton: Option<PathBuf>,
    pub unroll: usize,
}

/// Loaded sidecar configuration for one schema.
#[derive(Debug, Clone)]
pub enum Sidecar {
    Reliability(ReliabilityProfile<Rational>),
    Safety { automaton: PropertyAutomaton, unroll: usize },
}

impl VerifyOptions {
    pub fn load(&self) -> Result<Sidecar, CliError> {
        match self.schema {
            SchemaKind::Reliability => {
                let path = self.profile.as_ref().ok_or_else(|| CliError::Usage("--profile is required".into()))?;
                Ok(Sidecar::Reliability(config::load_profile(path)?))
            }
            SchemaKind::Safety => {
                let path =
                    self.automaton.as_ref().ok_or_else(|| CliError::Usage("--automaton is required".into()))?;
                Ok(Sidecar::Safety { automaton: config::load_automaton(path)?, unroll: self.unroll })
            }
        }
    }
}

/// A parsed Mini source file.
struct Program {
    name: String,
    tree: SyntaxTree,
}

fn line_column(source: &str, byte: usize) -> (usize, usize) {
    let before = &source[..byte.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn lex_mini(mini: &Mini, name: &str, source: &str) -> Result<(Vec<Token>, Vec<std::ops::Range<usize>>), CliError> {
    let lexed = mini.tokenize(source).map_err(|e| {
        let (line, column) = line_column(source, e.position());
        CliError::Lex { path: name.to_string(), source: e, line, column }
    })?;
    Ok((lexed.tokens, lexed.spans))
}

fn syntax_error(name: &str, source: &str, spans: &[std::ops::Range<usize>], e: ParseError) -> CliError {
    let location = match spans.get(e.position) {
        Some(span) => {
            let (line, column) = line_column(source, span.start);
            format!(" (line {line}, column {column})")
        }
        None => " (end of input)".to_string(),
    };
    CliError::Syntax { path: name.to_string(), source: e, location }
}

fn parse_mini(mini: &Mini, name: &str, source: &str) -> Result<Program, CliError> {
    let (tokens, spans) = lex_mini(mini, name, source)?;
    let tree = mini.parse_tokens(&tokens).map_err(|e| syntax_error(name, source, &spans, e))?;
    Ok(Program { name: name.to_string(), tree })
}

fn node_label(grammar: &Grammar, node: &Node) -> String {
    match node.kind() {
        NodeKind::Leaf(t) => format!("{} {:?}", grammar.terminal_name(t.terminal()), t.lexeme()),
        NodeKind::Inner { rule, .. } => grammar.display_rule(*rule),
    }
}

fn dump(tree: &SyntaxTree, grammar: &Grammar, numbering: Option<&PreorderNumbering>) -> TreeDump {
    let mut nodes = Vec::new();
    let mut stack: Vec<(usize, usize, &Arc<Node>)> = vec![(0, 0, tree.root())];
    while let Some((depth, start, node)) = stack.pop() {
        let number = numbering.and_then(|n| n.number(node.id()));
        if numbering.is_none() || number.is_some() {
            nodes.push(DumpNode {
                number,
                id: node.id().get(),
                label: node_label(grammar, node),
                span: [start, start + node.width()],
                depth,
            });
        }
        let mut offset = start + node.width();
        for child in node.children().iter().rev() {
            offset -= child.width();
            stack.push((depth + 1, offset, child));
        }
    }
    let root_rule = tree.root().rule().map(|r| grammar.display_rule(r)).unwrap_or_default();
    TreeDump { root_rule, tokens: tree.token_count(), nodes }
}

/// Parses a file with the chosen grammar. Mini dumps list the numbered nodes
/// only (inner nodes, identifiers, literals and conditions).
pub fn cmd_parse(path: &Path, grammar: GrammarKind) -> Result<TreeDump, CliError> {
    let source = read_file(path)?;
    parse_source(&path.display().to_string(), &source, grammar)
}

pub fn parse_source(name: &str, source: &str, grammar: GrammarKind) -> Result<TreeDump, CliError> {
    match grammar {
        GrammarKind::Mini => {
            let mini = Mini::new();
            let program = parse_mini(&mini, name, source)?;
            let numbering = PreorderNumbering::new(&program.tree, mini.grammar());
            Ok(dump(&program.tree, mini.grammar(), Some(&numbering)))
        }
        GrammarKind::Arith => {
            let g = arithmetic_grammar();
            let m = compute_opm(&g).expect("arithmetic grammar is operator precedence");
            let tree = arith_tree(&g, &m, name, source)?;
            Ok(dump(&tree, &g, None))
        }
    }
}

fn arith_tree(
    g: &Grammar,
    m: &incver_core::PrecedenceMatrix,
    name: &str,
    source: &str,
) -> Result<SyntaxTree, CliError> {
    let tokens =
        tokenize_arithmetic(g, source).map_err(|e| CliError::ArithLex { path: name.to_string(), source: e })?;
    parse(g, m, &tokens).map_err(|e| CliError::Syntax { path: name.to_string(), source: e, location: String::new() })
}

/// Value of an arithmetic expression over `+`, `*` and natural numbers.
pub fn cmd_eval_expr(expression: &str) -> Result<num_bigint::BigInt, CliError> {
    let g = arithmetic_grammar();
    let m = compute_opm(&g).expect("arithmetic grammar is operator precedence");
    let tree = arith_tree(&g, &m, "expression", expression)?;
    let map = evaluate(&tree, &g, &ArithmeticSchema::<num_bigint::BigInt>::new())
        .map_err(|e| CliError::Evaluation { path: "expression".into(), message: e.to_string() })?;
    Ok(map.get(tree.root().id()).cloned().expect("root value"))
}

fn evaluation_error<E: std::error::Error>(name: &str, e: E) -> CliError {
    CliError::Evaluation { path: name.to_string(), message: e.to_string() }
}

fn reliability_outcome(
    program: &Program,
    grammar: &Grammar,
    profile: &ReliabilityProfile<Rational>,
    map: &AttributeMap<ReliabilityValue<Rational>>,
) -> (Outcome, Vec<String>) {
    let value = map.get(program.tree.root().id()).and_then(ReliabilityValue::gamma).cloned().expect("root value");
    let warnings = reliability_warnings(&program.tree, grammar, profile, &value);
    (Outcome::reliability(&value), warnings)
}

fn safety_outcome(schema: &SafetySchema, program: &Program, map: &AttributeMap<SafetyValue>) -> Outcome {
    let gamma = map.get(program.tree.root().id()).and_then(SafetyValue::gamma).expect("root value");
    let (verdict, witness) = safety_verdict(schema.image(), gamma);
    Outcome::safety(verdict, witness.as_deref(), schema.tuples_processed())
}

/// Verifies one program from scratch.
pub fn cmd_verify(path: &Path, options: &VerifyOptions) -> Result<Report, CliError> {
    let sidecar = options.load()?;
    let source = read_file(path)?;
    verify_source(&path.display().to_string(), &source, &sidecar)
}

pub fn verify_source(name: &str, source: &str, sidecar: &Sidecar) -> Result<Report, CliError> {
    let started = Instant::now();
    let mini = Mini::new();
    let program = parse_mini(&mini, name, source)?;
    let (schema, result, warnings) = match sidecar {
        Sidecar::Reliability(profile) => {
            let schema = ReliabilitySchema::new(profile.clone());
            let map = evaluate(&program.tree, mini.grammar(), &schema).map_err(|e| evaluation_error(name, e))?;
            let (outcome, warnings) = reliability_outcome(&program, mini.grammar(), profile, &map);
            (SchemaKind::Reliability, outcome, warnings)
        }
        Sidecar::Safety { automaton, unroll } => {
            let schema = SafetySchema::new(image_automaton(automaton), *unroll);
            let map = evaluate(&program.tree, mini.grammar(), &schema).map_err(|e| evaluation_error(name, e))?;
            (SchemaKind::Safety, safety_outcome(&schema, &program, &map), automaton_warnings(automaton))
        }
    };
    Ok(Report {
        command: "verify".into(),
        schema: schema.name().into(),
        programs: vec![program.name],
        result,
        previous: None,
        reuse: None,
        recompute: None,
        warnings,
        wall_time_ms: started.elapsed().as_secs_f64() * 1000.0,
    })
}

/// Verifies `old` from scratch, then `new` incrementally.
pub fn cmd_diff_verify(old: &Path, new: &Path, options: &VerifyOptions) -> Result<Report, CliError> {
    let sidecar = options.load()?;
    let old_source = read_file(old)?;
    let new_source = read_file(new)?;
    diff_verify_sources(
        (&old.display().to_string(), &old_source),
        (&new.display().to_string(), &new_source),
        &sidecar,
    )
}

struct Incremental<V> {
    program: Program,
    map: AttributeMap<V>,
    reuse: ReuseReport,
    recompute: RecomputeReport,
}

fn incremental<S: AttributeSchema>(
    mini: &Mini,
    schema: &S,
    old: &Program,
    old_map: AttributeMap<S::Value>,
    (name, source): (&str, &str),
) -> Result<Incremental<S::Value>, CliError> {
    let (tokens, spans) = lex_mini(mini, name, source)?;
    let edit = diff_to_edit(&old.tree.tokens(), &tokens);
    let (tree, stats, splice) = apply_edit(&old.tree, &edit, mini.grammar(), mini.opm()).map_err(|e| match e {
        EditError::Syntax(e) => syntax_error(name, source, &spans, e),
        other => evaluation_error(name, other),
    })?;
    let (map, recompute): (_, RecomputeStats) =
        reevaluate(&tree, mini.grammar(), schema, splice.as_ref(), old_map).map_err(|e| evaluation_error(name, e))?;
    let numbering = PreorderNumbering::new(&tree, mini.grammar());
    Ok(Incremental {
        reuse: ReuseReport::from(&stats),
        recompute: RecomputeReport::new(&recompute, &numbering),
        program: Program { name: name.to_string(), tree },
        map,
    })
}

pub fn diff_verify_sources(old: (&str, &str), new: (&str, &str), sidecar: &Sidecar) -> Result<Report, CliError> {
    let started = Instant::now();
    let mini = Mini::new();
    let old_program = parse_mini(&mini, old.0, old.1)?;
    let (schema, previous, step, result, warnings) = match sidecar {
        Sidecar::Reliability(profile) => {
            let schema = ReliabilitySchema::new(profile.clone());
            let map = evaluate(&old_program.tree, mini.grammar(), &schema).map_err(|e| evaluation_error(old.0, e))?;
            let (previous, _) = reliability_outcome(&old_program, mini.grammar(), profile, &map);
            let step = incremental(&mini, &schema, &old_program, map, new)?;
            let (result, warnings) = reliability_outcome(&step.program, mini.grammar(), profile, &step.map);
            (SchemaKind::Reliability, previous, (step.reuse, step.recompute, step.program.name), result, warnings)
        }
        Sidecar::Safety { automaton, unroll } => {
            let schema = SafetySchema::new(image_automaton(automaton), *unroll);
            let map = evaluate(&old_program.tree, mini.grammar(), &schema).map_err(|e| evaluation_error(old.0, e))?;
            let previous = safety_outcome(&schema, &old_program, &map);
            schema.reset_tuples();
            let step = incremental(&mini, &schema, &old_program, map, new)?;
            let result = safety_outcome(&schema, &step.program, &step.map);
            (SchemaKind::Safety, previous, (step.reuse, step.recompute, step.program.name), result, automaton_warnings(automaton))
        }
    };
    let (reuse, recompute, new_name) = step;
    Ok(Report {
        command: "diff-verify".into(),
        schema: schema.name().into(),
        programs: vec![old_program.name, new_name],
        result,
        previous: Some(previous),
        reuse: Some(reuse),
        recompute: Some(recompute),
        warnings,
        wall_time_ms: started.elapsed().as_secs_f64() * 1000.0,
    })
}

/// Exit status for a successful report: 1 when a violation was found.
pub fn report_exit_code(report: &Report) -> i32 {
    match report.result.verdict.as_deref() {
        Some(v) if v == Verdict::Unsafe.to_string() => 1,
        _ => 0,
    }
}
