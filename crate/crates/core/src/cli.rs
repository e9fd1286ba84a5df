//! The `logq` command line: argument parsing, dispatch, and the two output
//! formats (human text, or `key=value` lines for scripts).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::encode::{
    concat_hash, dec_structure, enc_element, enc_structure, j_encode, j_encode_sequence, j_preimage,
    to_string_structure, BitString,
};
use crate::eval::{
    evaluate, evaluate_via_bitstrings, gc_check, gc_search_space, query, Assignment,
};
use crate::formula::{metrics, parse_formula, resolve, validate, Formula};
use crate::game::{
    even_instance, game_winner_with, is_partial_isomorphism, pebble_game_winner, verify_fresh_strategy,
    equivalence_sampler, ExpandedStructure, GameError, GameOptions, GameParams, RelationMove, TranscriptMove,
    DEFAULT_NODE_BUDGET,
};
use crate::interp::{
    apply_interpretation, build_j_reduction, j_reduction_input, transform_formula, Interpretation, JLayout,
};
use crate::structure::{isomorphic, Element, Relation, Signature, StringStructure, Structure};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Resource(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Resource(_) => EXIT_RESOURCE,
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

impl From<GameError> for CliError {
    fn from(e: GameError) -> Self {
        match e {
            GameError::ResourceLimit(_) => CliError::Resource(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Text,
    Machine,
}

#[derive(Debug, Parser)]
#[command(name = "logq", version, about = "Logics with log-bounded relation quantifiers: evaluation, encodings, interpretations and games")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct FormulaArg {
    /// Formula text.
    #[arg(long, conflicts_with = "formula_file")]
    formula: Option<String>,
    /// File holding the formula text.
    #[arg(long)]
    formula_file: Option<PathBuf>,
}

impl FormulaArg {
    fn read(&self) -> Result<Formula, CliError> {
        let text = match (&self.formula, &self.formula_file) {
            (Some(t), _) => t.clone(),
            (None, Some(p)) => read_file(p)?,
            (None, None) => return Err(CliError::Usage("give --formula or --formula-file".into())),
        };
        parse_formula(text.trim()).map_err(input)
    }
}

#[derive(Debug, Args)]
struct GameArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    s: usize,
    /// Maximum number of explored game nodes.
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    budget: u64,
}

impl GameArgs {
    fn params(&self) -> Result<GameParams, CliError> {
        Ok(GameParams::new(self.m, self.r, self.k, self.s)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Layout {
    Grouped,
    AsWritten,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a formula, report its metrics, and validate it against a signature.
    Check {
        #[command(flatten)]
        formula: FormulaArg,
        /// Structure file whose signature to validate against.
        #[arg(long)]
        structure: Option<PathBuf>,
        /// Also test the structure for isomorphism with this one.
        #[arg(long, requires = "structure")]
        iso_with: Option<PathBuf>,
    },
    /// Evaluate a formula on a structure file or a {0,1,#,[,]} string.
    Eval {
        #[command(flatten)]
        formula: FormulaArg,
        #[arg(long, conflicts_with = "string", required_unless_present = "string")]
        structure: Option<PathBuf>,
        #[arg(long)]
        string: Option<String>,
        /// Element assignments, e.g. `x=0,y=2`.
        #[arg(long)]
        assign: Option<String>,
        /// Relation variable assignments, e.g. `X=(0,1)(1,2)`; repeatable.
        #[arg(long)]
        relation: Vec<String>,
        /// Print every assignment to these comma-separated variables that
        /// satisfies the formula.
        #[arg(long)]
        query: Option<String>,
        /// Evaluate by enumerating bit strings for the log-quantified
        /// relations (strings only).
        #[arg(long, requires = "string")]
        via_bitstrings: bool,
    },
    /// Encode an ordered structure file, or one element.
    Encode {
        #[arg(long, conflicts_with = "element", required_unless_present = "element")]
        structure: Option<PathBuf>,
        #[arg(long, requires = "width")]
        element: Option<usize>,
        #[arg(long)]
        width: Option<usize>,
    },
    /// Decode a bracket string into an ordered structure (printed as JSON).
    Decode {
        #[arg(long)]
        bits: String,
        /// Relations as `NAME:ARITY` pairs, comma separated.
        #[arg(long, default_value = "")]
        signature: String,
    },
    /// Bits of a pair sequence, e.g. `--tuples "(1,3)(1,0)(2,0)"`.
    Jencode {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        tuples: String,
        /// Treat the pairs as a set (sorted, duplicates removed).
        #[arg(long)]
        set: bool,
    },
    /// The relation a bit string is read as.
    Jdecode {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        bits: String,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
    /// Apply an interpretation file to a structure.
    InterpApply {
        #[arg(long)]
        interp: PathBuf,
        #[arg(long, conflicts_with = "string", required_unless_present = "string")]
        structure: Option<PathBuf>,
        #[arg(long)]
        string: Option<String>,
    },
    /// Translate a target formula back along an interpretation.
    InterpTransform {
        #[arg(long)]
        interp: PathBuf,
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// Print the string-plus-relations reduction, or apply it.
    BuildJred {
        #[arg(long)]
        r: usize,
        #[arg(long, value_enum, default_value_t = Layout::Grouped)]
        layout: Layout,
        /// Apply to this string together with `--tuples` relations.
        #[arg(long)]
        string: Option<String>,
        /// One binary relation per occurrence, in order.
        #[arg(long, requires = "string")]
        tuples: Vec<String>,
    },
    /// Solve the game with relation moves followed by the pebble game.
    Game {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        params: GameArgs,
        /// Let the spoiler stop the relation phase at any time.
        #[arg(long)]
        stop_early: bool,
        /// Also sample this many random sentences of the fragment.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Solve the s-pebble game, or check one pair of tuples.
    Pebble {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        s: Option<usize>,
        /// Comma-separated elements of A to test against `--bbar`.
        #[arg(long, requires = "bbar")]
        abar: Option<String>,
        #[arg(long, requires = "abar")]
        bbar: Option<String>,
    },
    /// The edgeless-graph instance: sizes, game verdict and strategy check.
    EvenDemo {
        #[command(flatten)]
        params: GameArgs,
    },
    /// Guess-then-check: accept the string if the sentence holds on `u#v`
    /// for a short guess `v`.
    GcRun {
        #[arg(long)]
        string: String,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        c: usize,
        #[command(flatten)]
        formula: FormulaArg,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
}

/// A result document: ordered fields for machine output and the human
/// rendering.
#[derive(Debug, Default)]
struct Report {
    fields: Vec<(String, String)>,
    text: Option<String>,
}

impl Report {
    fn field(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    fn text(&mut self, text: impl Into<String>) -> &mut Self {
        self.text = Some(text.into());
        self
    }

    fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match (format, &self.text) {
            (Format::Text, Some(t)) => {
                out.push_str(t);
                out.push('\n');
            }
            (Format::Text, None) => {
                for (k, v) in &self.fields {
                    out.push_str(&format!("{k}: {v}\n"));
                }
            }
            (Format::Machine, _) => {
                for (k, v) in &self.fields {
                    out.push_str(&format!("{k}={}\n", v.replace('\\', "\\\\").replace('\n', "\\n")));
                }
            }
        }
        out
    }
}

/// Runs one invocation (`argv[0]` is the program name) and returns the exit
/// code with everything it would print.
pub fn run_command<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return (code, e.to_string());
        }
    };
    match dispatch(cli.command) {
        Ok(report) => (EXIT_OK, report.render(cli.format)),
        Err(e) => {
            let out = match cli.format {
                Format::Text => format!("error: {e}\n"),
                Format::Machine => format!("error={}\n", e.to_string().replace('\n', "\\n")),
            };
            (e.code(), out)
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_structure(path: &Path) -> Result<Structure, CliError> {
    Structure::from_json(&read_file(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn parse_string(text: &str) -> Result<StringStructure, CliError> {
    StringStructure::from_text(text).map_err(input)
}

/// `(1,3)(1,0)(2,0)`, whitespace allowed; `{}` or nothing is empty.
fn parse_tuples(text: &str) -> Result<Vec<Vec<Element>>, CliError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() || compact == "{}" {
        return Ok(Vec::new());
    }
    let bad = || CliError::Input(format!("cannot read tuples {text:?}; expected e.g. (1,3)(1,0)"));
    let mut out = Vec::new();
    let mut rest = compact.as_str();
    while !rest.is_empty() {
        let body = rest.strip_prefix('(').ok_or_else(bad)?;
        let end = body.find(')').ok_or_else(bad)?;
        let tuple = body[..end]
            .split(',')
            .map(|x| x.parse::<Element>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(tuple);
        rest = &body[end + 1..];
    }
    Ok(out)
}

fn parse_relation(text: &str) -> Result<Relation, CliError> {
    let tuples = parse_tuples(text)?;
    let arity = tuples.first().map_or(1, Vec::len);
    Relation::from_tuples(arity, tuples).map_err(input)
}

fn parse_pairs(text: &str) -> Result<Vec<(Element, Element)>, CliError> {
    parse_tuples(text)?
        .into_iter()
        .map(|t| match t[..] {
            [a, b] => Ok((a, b)),
            _ => Err(CliError::Input(format!("{t:?} is not a pair"))),
        })
        .collect()
}

fn parse_elements(text: &str) -> Result<Vec<Element>, CliError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|x| x.trim().parse().map_err(|_| CliError::Input(format!("{x:?} is not an element"))))
        .collect()
}

fn parse_signature(text: &str, ordered: bool) -> Result<Signature, CliError> {
    let mut rels = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, arity) = part
            .split_once(':')
            .ok_or_else(|| CliError::Input(format!("{part:?} is not NAME:ARITY")))?;
        let arity = arity
            .parse::<usize>()
            .map_err(|_| CliError::Input(format!("bad arity in {part:?}")))?;
        rels.push((name.to_string(), arity));
    }
    Signature::new(rels, ordered).map_err(input)
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn dispatch(command: Command) -> Result<Report, CliError> {
    match command {
        Command::Check {
            formula,
            structure,
            iso_with,
        } => check(&formula, structure.as_deref(), iso_with.as_deref()),
        Command::Eval {
            formula,
            structure,
            string,
            assign,
            relation,
            query,
            via_bitstrings,
        } => eval_cmd(
            &formula,
            structure.as_deref(),
            string.as_deref(),
            assign.as_deref(),
            &relation,
            query.as_deref(),
            via_bitstrings,
        ),
        Command::Encode {
            structure,
            element,
            width,
        } => encode_cmd(structure.as_deref(), element, width),
        Command::Decode { bits, signature } => {
            let sig = parse_signature(&signature, true)?;
            let s = BitString::parse(&bits).map_err(input)?;
            let a = dec_structure(&s, &sig).map_err(input)?;
            let mut r = Report::default();
            r.field("structure", a.to_json()).text(a.to_json());
            Ok(r)
        }
        Command::Jencode { n, tuples, set } => {
            let pairs = parse_pairs(&tuples)?;
            let bits = if set {
                let rel = Relation::from_tuples(2, pairs.iter().map(|&(a, b)| vec![a, b])).map_err(input)?;
                j_encode(n, &rel)
            } else {
                j_encode_sequence(n, &pairs)
            }
            .map_err(input)?;
            let mut r = Report::default();
            r.field("bits", &bits).field("length", bits.len()).text(bits.to_string());
            Ok(r)
        }
        Command::Jdecode { n, bits, k } => {
            let word = BitString::parse_bits(&bits).map_err(input)?;
            let rel = j_preimage(n, &word, k).map_err(input)?;
            let mut r = Report::default();
            r.field("relation", &rel)
                .field("size", rel.len())
                .field("mentioned", join(rel.mention_set()))
                .text(rel.to_string());
            Ok(r)
        }
        Command::InterpApply {
            interp,
            structure,
            string,
        } => {
            let i = Interpretation::from_json(&read_file(&interp)?).map_err(input)?;
            let a = match (structure, string) {
                (Some(p), _) => read_structure(&p)?,
                (None, Some(u)) => parse_string(&u)?.into_structure(),
                (None, None) => unreachable!("clap requires one input"),
            };
            let out = apply_interpretation(&i, &a).map_err(input)?;
            let mut r = Report::default();
            r.field("structure", out.to_json());
            match StringStructure::try_from(&out) {
                Ok(u) => r.field("string", u.render()).text(u.render()),
                Err(_) => r.text(out.to_json()),
            };
            Ok(r)
        }
        Command::InterpTransform { interp, formula } => {
            let i = Interpretation::from_json(&read_file(&interp)?).map_err(input)?;
            let f = resolve(&formula.read()?, i.target());
            let out = transform_formula(&f, &i).map_err(input)?;
            let mut r = Report::default();
            r.field("formula", &out).text(out.to_string());
            Ok(r)
        }
        Command::BuildJred {
            r,
            layout,
            string,
            tuples,
        } => build_jred(r, layout, string.as_deref(), &tuples),
        Command::Game {
            a,
            b,
            params,
            stop_early,
            samples,
            seed,
        } => game_cmd(&a, &b, &params, stop_early, samples, seed),
        Command::Pebble { a, b, s, abar, bbar } => pebble_cmd(&a, &b, s, abar.as_deref(), bbar.as_deref()),
        Command::EvenDemo { params } => even_demo(&params),
        Command::GcRun {
            string,
            k,
            c,
            formula,
            budget,
        } => gc_run(&string, k, c, &formula, budget),
    }
}

fn check(formula: &FormulaArg, structure: Option<&Path>, iso_with: Option<&Path>) -> Result<Report, CliError> {
    let parsed = formula.read()?;
    let a = structure.map(read_structure).transpose()?;
    // without a signature every atom reads as a free relation variable
    let sig = a.as_ref().map_or_else(|| Signature::empty(true), |a| a.signature().clone());
    let f = resolve(&parsed, &sig);
    let free = validate(&f, &sig).map_err(input)?;
    let m = metrics(&f);
    let mut r = Report::default();
    r.field("formula", &f)
        .field("free_elements", join(&free.elements))
        .field(
            "free_relations",
            join(free.relations.iter().map(|(n, a)| format!("{n}:{a}"))),
        )
        .field("mva", m.mva)
        .field("height", m.height)
        .field("lqr", m.lqr)
        .field("prenex_existential", m.prenex_existential)
        .field("element_vars", m.num_element_vars);
    if let (Some(a), Some(path)) = (&a, iso_with) {
        let b = read_structure(path)?;
        r.field("isomorphic", isomorphic(a, &b).map_err(input)?);
    }
    Ok(r)
}

fn eval_cmd(
    formula: &FormulaArg,
    structure: Option<&Path>,
    string: Option<&str>,
    assign: Option<&str>,
    relations: &[String],
    query_vars: Option<&str>,
    via_bitstrings: bool,
) -> Result<Report, CliError> {
    let parsed = formula.read()?;
    let mut r = Report::default();
    if via_bitstrings {
        let u = parse_string(string.expect("clap requires --string"))?;
        let f = resolve(&parsed, u.as_structure().signature());
        let value = evaluate_via_bitstrings(&u, &f).map_err(input)?;
        r.field("value", value).text(value.to_string());
        return Ok(r);
    }
    let a = match (structure, string) {
        (Some(p), _) => read_structure(p)?,
        (None, Some(u)) => parse_string(u)?.into_structure(),
        (None, None) => unreachable!("clap requires one input"),
    };
    let f = resolve(&parsed, a.signature());
    let mut alpha = Assignment::new();
    for part in assign.unwrap_or("").split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (var, value) = part
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("{part:?} is not VAR=ELEMENT")))?;
        let value = value
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("{value:?} is not an element")))?;
        alpha = alpha.with_element(var.trim(), value);
    }
    for part in relations {
        let (var, tuples) = part
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("{part:?} is not VAR=TUPLES")))?;
        alpha = alpha.with_relation(var.trim(), parse_relation(tuples)?);
    }
    match query_vars {
        Some(vars) => {
            let vars: Vec<String> = vars.split(',').map(|v| v.trim().to_string()).collect();
            let rel = query(&a, &f, &vars, &alpha).map_err(input)?;
            r.field("tuples", &rel).field("count", rel.len()).text(rel.to_string());
        }
        None => {
            let value = evaluate(&a, &f, &alpha).map_err(input)?;
            r.field("value", value).text(value.to_string());
        }
    }
    Ok(r)
}

fn encode_cmd(structure: Option<&Path>, element: Option<usize>, width: Option<usize>) -> Result<Report, CliError> {
    let mut r = Report::default();
    if let (Some(j), Some(w)) = (element, width) {
        let bits = enc_element(j, w).map_err(input)?;
        r.field("bits", &bits).field("length", bits.len()).text(bits.to_string());
        return Ok(r);
    }
    let a = read_structure(structure.expect("clap requires --structure"))?;
    let bits = enc_structure(&a).map_err(input)?;
    let u = to_string_structure(&a).map_err(input)?;
    debug_assert_eq!(u.render(), bits.to_string());
    r.field("bits", &bits).field("length", bits.len()).text(bits.to_string());
    Ok(r)
}

fn build_jred(r: usize, layout: Layout, string: Option<&str>, tuples: &[String]) -> Result<Report, CliError> {
    if r == 0 {
        return Err(CliError::Input("r must be at least 1".into()));
    }
    let layout = match layout {
        Layout::Grouped => JLayout::Grouped,
        Layout::AsWritten => JLayout::AsWritten,
    };
    let i = build_j_reduction(r, layout);
    let mut rep = Report::default();
    let Some(u) = string else {
        rep.field("width", i.width()).field("interpretation", i.to_json()).text(i.to_json());
        return Ok(rep);
    };
    if tuples.len() != r {
        return Err(CliError::Input(format!("expected {r} --tuples, got {}", tuples.len())));
    }
    let u = parse_string(u)?;
    let rels = tuples
        .iter()
        .map(|t| {
            let pairs = parse_pairs(t)?;
            Relation::from_tuples(2, pairs.iter().map(|&(a, b)| vec![a, b])).map_err(input)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let source = j_reduction_input(&u, &rels).map_err(input)?;
    let out = apply_interpretation(&i, &source).map_err(input)?;
    let rendered = StringStructure::try_from(&out).map_err(input)?.render();
    rep.field("width", i.width()).field("output", &rendered);
    if r == 1 {
        let bits = j_encode(u.len(), &rels[0]).map_err(input)?;
        let direct = concat_hash(&[u.symbols(), bits.symbols()]).map_err(input)?.render();
        rep.field("direct", &direct).field("match", direct == rendered);
    }
    rep.text(rendered);
    Ok(rep)
}

fn describe_move(m: &RelationMove) -> String {
    format!("{} r={} k={} {}", m.side, m.arity, m.k, m.relation)
}

fn game_cmd(
    a: &Path,
    b: &Path,
    args: &GameArgs,
    stop_early: bool,
    samples: usize,
    seed: u64,
) -> Result<Report, CliError> {
    let (sa, sb) = (read_structure(a)?, read_structure(b)?);
    let p = args.params()?;
    let opts = GameOptions {
        node_budget: args.budget,
        stop_early,
    };
    let out = game_winner_with(&sa, &sb, p, opts)?;
    let mut r = Report::default();
    r.field("winner", out.winner).field("nodes", out.nodes);
    let mut text = vec![format!("winner {}", out.winner)];
    for (i, mv) in out.line.iter().enumerate() {
        let line = match mv {
            TranscriptMove::Announce(m) => format!("spoiler announces {m} relation moves"),
            TranscriptMove::Spoiler(m) => format!("spoiler {}", describe_move(m)),
            TranscriptMove::Duplicator(m) => format!("duplicator {}", describe_move(m)),
            TranscriptMove::Pebble { side, element } => format!("spoiler pebbles {element} in {side}"),
        };
        r.field(&format!("move.{}", i + 1), &line);
        text.push(line);
    }
    for (i, (s, d)) in out.replies.iter().enumerate() {
        let line = format!("{} => {}", describe_move(s), describe_move(d));
        r.field(&format!("reply.{}", i + 1), &line);
        text.push(format!("reply {line}"));
    }
    text.push(format!("nodes {}", out.nodes));
    if samples > 0 {
        let report = equivalence_sampler(&sa, &sb, p, samples, seed)?;
        r.field("sampled", report.sampled)
            .field("distinguishing", report.distinguishing.len());
        text.push(format!(
            "sampled {} sentences, {} distinguishing",
            report.sampled,
            report.distinguishing.len()
        ));
        if let Some(first) = report.distinguishing.first() {
            r.field("example", first);
            text.push(format!("example {first}"));
        }
    }
    r.text(text.join("\n"));
    Ok(r)
}

fn pebble_cmd(
    a: &Path,
    b: &Path,
    s: Option<usize>,
    abar: Option<&str>,
    bbar: Option<&str>,
) -> Result<Report, CliError> {
    let ea = ExpandedStructure::bare(read_structure(a)?);
    let eb = ExpandedStructure::bare(read_structure(b)?);
    let mut r = Report::default();
    let mut text = Vec::new();
    if let (Some(abar), Some(bbar)) = (abar, bbar) {
        let ok = is_partial_isomorphism(&ea, &parse_elements(abar)?, &eb, &parse_elements(bbar)?)?;
        r.field("partial_isomorphism", ok);
        text.push(format!("partial isomorphism {ok}"));
    }
    if let Some(s) = s {
        let out = pebble_game_winner(&ea, &eb, s)?;
        r.field("winner", out.winner).field("region", out.region.len());
        text.push(format!("winner {}", out.winner));
        text.push(format!("region {} positions", out.region.len()));
        if let Some((side, e)) = out.spoiler_opening {
            r.field("opening", format!("{side} {e}"));
            text.push(format!("spoiler opens with {e} in {side}"));
        }
    }
    if text.is_empty() {
        return Err(CliError::Usage("give --s or --abar/--bbar".into()));
    }
    r.text(text.join("\n"));
    Ok(r)
}

fn edgeless(n: usize) -> Structure {
    let sig = Signature::new([("E", 2)], false).expect("valid signature");
    Structure::new(sig, n, Vec::<(&str, Vec<Vec<Element>>)>::new()).expect("valid structure")
}

fn even_demo(args: &GameArgs) -> Result<Report, CliError> {
    let p = args.params()?;
    let (na, nb) = even_instance(p);
    let (a, b) = (edgeless(na), edgeless(nb));
    let opts = GameOptions {
        node_budget: args.budget,
        stop_early: false,
    };
    let out = game_winner_with(&a, &b, p, opts)?;
    let verified = verify_fresh_strategy(&a, &b, p)?;
    let verdict = if verified { "verified" } else { "failed" };
    let mut r = Report::default();
    r.field("n_a", na)
        .field("n_b", nb)
        .field("winner", out.winner)
        .field("nodes", out.nodes)
        .field("strategy", verdict)
        .text(format!(
            "sizes ({na},{nb})\nwinner {}\nstrategy {verdict}",
            out.winner
        ));
    Ok(r)
}

fn gc_run(string: &str, k: u32, c: usize, formula: &FormulaArg, budget: u64) -> Result<Report, CliError> {
    let u = parse_string(string)?;
    let space = gc_search_space(u.len(), k, c);
    if space > budget as u128 {
        return Err(CliError::Resource(format!(
            "{space} guesses exceed the budget of {budget}"
        )));
    }
    let f = resolve(&formula.read()?, &Signature::string());
    let mut failure = None;
    let out = gc_check(&u, k, c, |joined| {
        match evaluate(joined.as_structure(), &f, &Assignment::new()) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                false
            }
        }
    });
    if let Some(e) = failure {
        return Err(input(e));
    }
    let mut r = Report::default();
    r.field("accepted", out.accepted)
        .field("witness", out.witness.clone().unwrap_or_default())
        .field("tried", out.candidates_tried)
        .field("space", space);
    let text = match &out.witness {
        Some(w) => format!("accepted with guess {w:?} after {} tries", out.candidates_tried),
        None => format!("rejected after {} tries", out.candidates_tried),
    };
    r.text(text);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuple_syntax() {
        assert_eq!(parse_pairs("(1,3)(1,0) (2,0)").unwrap(), vec![(1, 3), (1, 0), (2, 0)]);
        assert!(parse_tuples("{}").unwrap().is_empty());
        assert!(parse_tuples("(1,").is_err());
        assert!(parse_pairs("(1)").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_command(["logq", "frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_command(["logq", "jencode", "--n", "8"]).0, EXIT_USAGE);
        assert_eq!(run_command(["logq", "jencode", "--n", "2", "--tuples", "(0,1)"]).0, EXIT_INPUT);
        let (code, out) = run_command(["logq", "jencode", "--n", "8", "--tuples", "(1,3)(1,0)(2,0)"]);
        assert_eq!((code, out.as_str()), (EXIT_OK, "110000\n"));
        let (code, out) = run_command(["logq", "gc-run", "--string", "0110", "--k", "1", "--formula", "Ex. x=x", "--budget", "3"]);
        assert_eq!(code, EXIT_RESOURCE, "{out}");
    }
}
