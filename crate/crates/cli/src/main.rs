use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use splitfree::bassserre::{
    build_ball, detour_certificate_with, verify_certificate, DetourCertificate, DetourOptions, SplittingSpec,
};
use splitfree::decider::{
    decide_with, primitive_witness, verify_verdict, verify_witness, DecideOptions, FreeWitness, Verdict, SCHEMA,
};
use splitfree::splice::{generalized_whitehead_graph, Subtree};
use splitfree::vflift::{decide_vf_with, verify_vf_verdict, VfOptions, VfPresentation, VfSplittingSpec, VfVerdict};
use splitfree::whitehead::{
    analyze_graph, build_whitehead_graph, is_basic, minimize_multiword, normalize_multiword, Multiword,
    DEFAULT_LEVEL_SET_BUDGET,
};
use splitfree::words::{Basis, Word};
use splitfree::Error;

#[derive(Parser)]
#[command(name = "splitfree", version, about = "Freeness of cyclic splittings of free and virtually free groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Args)]
struct WordsArgs {
    /// Rank of the free group; inferred from the letters when omitted.
    #[arg(long)]
    rank: Option<usize>,
    /// A word such as `abAB`; uppercase letters are inverses.
    #[arg(long = "word", required = true)]
    words: Vec<String>,
}

#[derive(Args)]
struct VerdictArgs {
    /// Exit 1 when the splitting is not (virtually) free.
    #[arg(long)]
    exit_verdict: bool,
    /// Comma-separated certificate radii; empty for none.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    radii: Vec<u32>,
    #[arg(long, default_value_t = DEFAULT_LEVEL_SET_BUDGET)]
    level_set_budget: usize,
}

#[derive(Args)]
struct ElementArgs {
    /// Presentation JSON, inline or a file path.
    #[arg(long)]
    presentation: String,
    #[arg(long)]
    element: String,
}

#[derive(Subcommand)]
enum Command {
    /// Free reduction of a word.
    Reduce {
        #[arg(long)]
        word: String,
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Whitehead minimization of a multiword.
    Minimize(WordsArgs),
    /// Whether a word is primitive, with the moves to a generator.
    Primitive {
        #[arg(long)]
        word: String,
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Whether a multiword is basic.
    Basic(WordsArgs),
    /// Whitehead graph of a multiword.
    WhGraph {
        #[command(flatten)]
        words: WordsArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Generalized Whitehead graph over a subtree of the Cayley tree.
    GenWhGraph {
        #[command(flatten)]
        words: WordsArgs,
        /// Subtree vertices; the subtree must be connected and contain 1.
        #[arg(long = "vertex")]
        vertices: Vec<String>,
        /// Use the ball of this radius instead of explicit vertices.
        #[arg(long)]
        ball: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Decide freeness of an amalgam or HNN extension of free groups.
    Decide {
        /// Splitting JSON, inline or a file path.
        #[arg(long)]
        spec: String,
        #[command(flatten)]
        verdict: VerdictArgs,
    },
    /// Build and check one detour certificate.
    Detour {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        radius: u32,
        #[arg(long)]
        point_budget: Option<usize>,
    },
    /// Check a certificate, witness or verdict against a spec.
    Verify {
        #[arg(long)]
        spec: String,
        #[arg(long, conflicts_with_all = ["witness", "verdict"])]
        certificate: Option<String>,
        #[arg(long, conflicts_with = "verdict")]
        witness: Option<String>,
        #[arg(long)]
        verdict: Option<String>,
    },
    /// Kernel basis of a presentation onto its finite quotient.
    RsKernel {
        #[arg(long)]
        presentation: String,
    },
    /// Lift of an infinite-order element to the kernel.
    Lift(ElementArgs),
    /// Commensurator of the cyclic subgroup of an element.
    Commensurator(ElementArgs),
    /// Whether the element generates a virtually cyclic factor.
    Factor(ElementArgs),
    /// Decide virtual freeness of a splitting of virtually free groups.
    DecideVf {
        #[arg(long)]
        spec: String,
        #[command(flatten)]
        verdict: VerdictArgs,
    },
    /// Ball of the Bass-Serre complex around the base point.
    Ball {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        radius: u32,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
    },
}

enum Output {
    Json(Value),
    Text(String),
}

struct Outcome {
    output: Output,
    /// Exit code under `--exit-verdict`.
    verdict_code: Option<u8>,
}

impl From<Value> for Outcome {
    fn from(v: Value) -> Self {
        Outcome { output: Output::Json(v), verdict_code: None }
    }
}

fn with_schema(mut v: Value) -> Value {
    if let Value::Object(map) = &mut v {
        map.insert("schema".into(), SCHEMA.into());
    }
    v
}

/// Inline JSON, or the contents of a file.
fn load(arg: &str) -> Result<String, Error> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(Path::new(arg)).map_err(|e| Error::InvalidInput(format!("cannot read {arg}: {e}")))
}

fn parse_json<T: serde::de::DeserializeOwned>(arg: &str) -> Result<T, Error> {
    serde_json::from_str(&load(arg)?).map_err(|e| Error::InvalidInput(e.to_string()))
}

fn infer_basis(words: &[String], rank: Option<usize>) -> Result<Basis, Error> {
    if let Some(r) = rank {
        return Basis::new(r);
    }
    let mut r = 1;
    for c in words.iter().flat_map(|w| w.chars()) {
        if !c.is_ascii_alphabetic() {
            return Err(Error::InvalidLetter(c));
        }
        r = r.max((c.to_ascii_lowercase() as u8 - b'a') as usize + 1);
    }
    Basis::new(r)
}

fn parse_words(args: &WordsArgs) -> Result<Multiword, Error> {
    let basis = infer_basis(&args.words, args.rank)?;
    let words = args.words.iter().map(|w| Word::parse(w, basis)).collect::<Result<Vec<_>, _>>()?;
    Multiword::new(basis, words)
}

fn verdict_code(free: bool) -> Option<u8> {
    Some(if free { 0 } else { 1 })
}

fn run(command: Command) -> Result<Outcome, Error> {
    Ok(match command {
        Command::Reduce { word, rank } => {
            let basis = infer_basis(std::slice::from_ref(&word), rank)?;
            json!({"word": Word::parse(&word, basis)?.to_string()}).into()
        }
        Command::Minimize(args) => {
            let mw = parse_words(&args)?;
            let (min, moves) = minimize_multiword(&mw)?;
            json!({
                "rank": mw.basis().rank(),
                "roots": min.roots().iter().map(|r| r.to_string()).collect::<Vec<_>>(),
                "members": min.members(),
                "length": min.total_length(),
                "moves": moves,
            })
            .into()
        }
        Command::Primitive { word, rank } => {
            let basis = infer_basis(std::slice::from_ref(&word), rank)?;
            let w = Word::parse(&word, basis)?;
            match primitive_witness(&w)? {
                Some((moves, generator)) => json!({"primitive": true, "moves": moves, "generator": generator}),
                None => json!({"primitive": false, "moves": []}),
            }
            .into()
        }
        Command::Basic(args) => json!({"basic": is_basic(&parse_words(&args)?)}).into(),
        Command::WhGraph { words, format } => {
            let nmw = normalize_multiword(&parse_words(&words)?)?;
            let g = build_whitehead_graph(&nmw);
            match format {
                Format::Dot => Outcome { output: Output::Text(g.to_dot()), verdict_code: None },
                Format::Json => json!({"edges": g.edges(), "report": analyze_graph(&g)}).into(),
            }
        }
        Command::GenWhGraph { words, vertices, ball, format } => {
            let nmw = normalize_multiword(&parse_words(&words)?)?;
            let basis = nmw.basis();
            let subtree = match ball {
                Some(r) => Subtree::ball(basis, r),
                None => {
                    let vs = vertices
                        .iter()
                        .map(|v| if v == "1" { Ok(Word::identity(basis)) } else { Word::parse(v, basis) })
                        .collect::<Result<Vec<_>, _>>()?;
                    Subtree::new(basis, vs)?
                }
            };
            let g = generalized_whitehead_graph(&nmw, &subtree)?;
            match format {
                Format::Dot => Outcome { output: Output::Text(g.to_dot()), verdict_code: None },
                Format::Json => json!({
                    "frontier": g.frontier.iter().map(Word::to_string).collect::<Vec<_>>(),
                    "edges": g.edges,
                    "report": g.to_multigraph().analyze(),
                })
                .into(),
            }
        }
        Command::Decide { spec, verdict } => {
            let spec = SplittingSpec::from_json(&load(&spec)?)?;
            let opts = DecideOptions { radii: verdict.radii, level_set_budget: verdict.level_set_budget };
            let v = decide_with(&spec, &opts)?;
            let code = verdict_code(v.is_free()).filter(|_| verdict.exit_verdict);
            Outcome { output: Output::Json(v.to_json()), verdict_code: code }
        }
        Command::Detour { spec, radius, point_budget } => {
            let spec = SplittingSpec::from_json(&load(&spec)?)?;
            let mut opts = DetourOptions::default();
            if let Some(b) = point_budget {
                opts.point_budget = b;
            }
            serde_json::to_value(detour_certificate_with(&spec, radius, &opts)?).expect("certificate serializes").into()
        }
        Command::Verify { spec, certificate, witness, verdict } => verify(&spec, certificate, witness, verdict)?,
        Command::RsKernel { presentation } => {
            let p = VfPresentation::from_json(&load(&presentation)?)?;
            json!({
                "qSize": p.q_size(),
                "rank": p.kernel_rank(),
                "eulerRank": p.euler_rank(),
                "treeDepth": p.tree_depth(),
                "basis": (1..=p.kernel_rank()).map(|i| p.format(p.kernel_generator(i))).collect::<Vec<_>>(),
                "cosetRepresentatives": p.coset_reps().iter().map(|g| p.format(g)).collect::<Vec<_>>(),
            })
            .into()
        }
        Command::Lift(args) => {
            let (p, h) = element(&args)?;
            p.lift_multiword(&h)?.to_json(&p).into()
        }
        Command::Commensurator(args) => {
            let (p, h) = element(&args)?;
            let c = p.commensurator(&h)?;
            json!({
                "element": p.format(&h),
                "index": c.index(),
                "representatives": c.representatives.iter().map(|g| p.format(g)).collect::<Vec<_>>(),
            })
            .into()
        }
        Command::Factor(args) => {
            let (p, h) = element(&args)?;
            serde_json::to_value(p.factor_report(&h)?).expect("report serializes").into()
        }
        Command::DecideVf { spec, verdict } => {
            let spec = VfSplittingSpec::from_json(&load(&spec)?)?;
            let opts =
                VfOptions { radii: verdict.radii, level_set_budget: verdict.level_set_budget, ..Default::default() };
            let v = decide_vf_with(&spec, &opts)?;
            let code = verdict_code(v.is_virtually_free()).filter(|_| verdict.exit_verdict);
            Outcome { output: Output::Json(v.to_json()), verdict_code: code }
        }
        Command::Ball { spec, radius, format } => {
            let spec = SplittingSpec::from_json(&load(&spec)?)?;
            let ball = build_ball(&spec, radius)?;
            match format {
                Format::Dot => Outcome { output: Output::Text(ball.to_dot()), verdict_code: None },
                Format::Json => json!({
                    "radius": ball.radius,
                    "points": ball.points.len(),
                    "edges": ball.edges.len(),
                    "distances": ball.points.iter().map(|(_, d)| d).collect::<Vec<_>>(),
                })
                .into(),
            }
        }
    })
}

fn element(args: &ElementArgs) -> Result<(VfPresentation, splitfree::vflift::GroupElement), Error> {
    let p = VfPresentation::from_json(&load(&args.presentation)?)?;
    let h = p.parse(&args.element)?;
    Ok((p, h))
}

fn verify(
    spec: &str,
    certificate: Option<String>,
    witness: Option<String>,
    verdict: Option<String>,
) -> Result<Outcome, Error> {
    let text = load(spec)?;
    let kind = |k: &str, valid: bool| -> Outcome { json!({"kind": k, "valid": valid}).into() };
    if let Ok(spec) = SplittingSpec::from_json(&text) {
        return Ok(match (certificate, witness, verdict) {
            (Some(c), _, _) => kind("certificate", verify_certificate(&spec, &parse_json::<DetourCertificate>(&c)?)),
            (_, Some(w), _) => kind("witness", verify_witness(&spec, &parse_json::<FreeWitness>(&w)?)),
            (_, _, Some(v)) => kind("verdict", verify_verdict(&spec, &parse_json::<Verdict>(&v)?)),
            _ => return Err(Error::InvalidInput("one of --certificate, --witness, --verdict is required".into())),
        });
    }
    let spec = VfSplittingSpec::from_json(&text)
        .map_err(|_| Error::InvalidInput("spec is neither a free nor a virtually free splitting".into()))?;
    match verdict {
        Some(v) => Ok(kind("verdict", verify_vf_verdict(&spec, &parse_json::<VfVerdict>(&v)?))),
        None => Err(Error::InvalidInput("virtually free specs are verified through --verdict".into())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(outcome) => {
            let text = match outcome.output {
                Output::Json(v) => serde_json::to_string_pretty(&with_schema(v)).expect("json") + "\n",
                Output::Text(t) => t,
            };
            // a closed pipe downstream is not an error of ours
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::from(outcome.verdict_code.unwrap_or(0))
        }
        Err(e) => {
            let code = if e.is_budget() { 3 } else { 2 };
            eprintln!("{}", json!({"schema": SCHEMA, "error": e.to_string()}));
            ExitCode::from(code)
        }
    }
}
