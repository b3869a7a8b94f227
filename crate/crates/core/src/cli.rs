//! The `critgroups` command line: argument definitions, command handlers and
//! the report they produce.
//!
//! Every command builds a [`Report`] with the keys `command`, `input`,
//! `result` and `warnings`. Large integers (orders, invariant factors, tree
//! counts) are decimal strings so that nothing is lost to floating point.

use std::fmt::Write as _;
use std::ops::ControlFlow;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::complex::{self, ComplexError, Simplex, SimplicialComplex, Vertex};
use crate::critical::{self, CriticalError, CriticalGroup};
use crate::flow::{self, ChipGraph, Configuration, FlowError, GroupCoordinates};
use crate::generators;
use crate::trees::{self, EnumerationOptions, SpanningTree, TreeError, DEFAULT_BUDGET};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_HYPOTHESIS: u8 = 3;
pub const EXIT_BUDGET: u8 = 4;
pub const EXIT_FAIL: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "critgroups", version, about = "Critical groups, spanning trees and chip-firing on simplicial complexes")]
pub struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Facet file: one facet per line, '#' starts a comment.
    #[arg(long, global = true, value_name = "FILE", conflicts_with = "generate")]
    pub input: Option<PathBuf>,
    /// Built-in complex, e.g. "bipyramid", "cycle 5", "simplex-skeleton 6 2".
    #[arg(long = "gen", global = true, value_name = "SPEC")]
    pub generate: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a built-in complex as a facet file.
    Gen {
        /// bipyramid | cycle N | complete N | simplex-skeleton N K | sphere D | rp2
        #[arg(required = true, num_args = 1..)]
        spec: Vec<String>,
    },
    /// f-vector, homology, purity and APC.
    Info,
    /// Compute K_i.
    CriticalGroup {
        #[arg(long)]
        dim: isize,
        /// "auto" or a facet file listing the top faces of a torsion-free tree.
        #[arg(long, default_value = "auto")]
        tree: String,
        #[arg(long, value_enum, default_value_t = Route::Reduced)]
        route: Route,
    },
    /// Enumerate spanning trees.
    Trees {
        #[arg(long)]
        dim: isize,
        /// Summary only (the default).
        #[arg(long, conflicts_with = "stream")]
        census: bool,
        /// List every tree in enumeration order.
        #[arg(long)]
        stream: bool,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Check an identity and print PASS or FAIL.
    #[command(subcommand)]
    Verify(Verify),
    /// Flows: firing, conservative extension, equivalence, group coordinates.
    #[command(subcommand)]
    Flow(FlowCommand),
    /// Chip-firing on the 1-skeleton.
    #[command(subcommand)]
    Chip(ChipCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Reduced,
    Direct,
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    /// Both matrix-tree identities in dimension i.
    Smtt {
        #[arg(long)]
        dim: isize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Reduced and direct routes agree for several torsion-free trees.
    MainThm {
        #[arg(long)]
        dim: isize,
        #[arg(long, default_value_t = 3)]
        trees: usize,
    },
    /// K_{d-1} of a sphere is cyclic of order the number of facets.
    Sphere,
    /// Maxwell matrix and critical groups of the full simplex.
    Simplex {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
    },
    /// The alternating product of the π_j equals |K_i|.
    AltProduct {
        #[arg(long)]
        dim: isize,
    },
}

#[derive(Debug, Args)]
pub struct TreeArg {
    /// "auto" or a facet file listing the top faces of a torsion-free tree.
    #[arg(long, default_value = "auto")]
    pub tree: String,
}

#[derive(Debug, Subcommand)]
pub enum FlowCommand {
    /// Fire faces in order, starting from --values (default zero).
    Fire {
        #[arg(long)]
        dim: isize,
        /// Vertices of a face, e.g. "2 3"; repeat to fire several.
        #[arg(long, required = true)]
        face: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
    },
    /// The conservative configuration with the given values outside a tree.
    Extend {
        #[arg(long)]
        dim: isize,
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[command(flatten)]
        tree: TreeArg,
    },
    /// Whether two configurations differ by Laplacian columns.
    Equiv {
        #[arg(long)]
        dim: isize,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Group coordinates of a conservative configuration.
    Canonical {
        #[arg(long)]
        dim: isize,
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[command(flatten)]
        tree: TreeArg,
    },
}

#[derive(Debug, Args)]
pub struct ChipArgs {
    /// Bank vertex; defaults to the smallest vertex.
    #[arg(long)]
    pub bank: Option<Vertex>,
    /// Chips on the non-bank vertices, in increasing vertex order.
    #[arg(long)]
    pub chips: String,
}

#[derive(Debug, Subcommand)]
pub enum ChipCommand {
    /// Fire ready vertices until stable.
    Stabilize {
        #[command(flatten)]
        state: ChipArgs,
        /// Also stabilize this many times in random order and compare.
        #[arg(long, default_value_t = 0)]
        scrambles: usize,
    },
    /// Burning test.
    Recurrent {
        #[command(flatten)]
        state: ChipArgs,
    },
    /// The critical state equivalent to the input.
    Representative {
        #[command(flatten)]
        state: ChipArgs,
    },
    /// Check [c] + [c'] = [c + c'].
    GroupLaw {
        #[command(flatten)]
        state: ChipArgs,
        #[arg(long)]
        other: String,
    },
}

/// Errors surfaced with a nonzero exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Input(String),
    Hypothesis(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Hypothesis(_) => EXIT_HYPOTHESIS,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Hypothesis(m) => m,
        }
    }
}

impl From<ComplexError> for CliError {
    fn from(e: ComplexError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CriticalError> for CliError {
    fn from(e: CriticalError) -> Self {
        match e {
            CriticalError::Complex(e) => e.into(),
            CriticalError::BadParameters(_) => CliError::Input(e.to_string()),
            CriticalError::NotATree(_) | CriticalError::TreeHasTorsion(_) => CliError::Hypothesis(e.to_string()),
        }
    }
}

impl From<TreeError> for CliError {
    fn from(e: TreeError) -> Self {
        match e {
            TreeError::Complex(e) => e.into(),
            TreeError::Critical(e) => e.into(),
            TreeError::NoTrees(_) => CliError::Hypothesis(e.to_string()),
        }
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::Complex(e) => e.into(),
            FlowError::Critical(e) => e.into(),
            FlowError::Disconnected => CliError::Hypothesis(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// The structured result of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub input: Value,
    pub result: Value,
    pub warnings: Vec<String>,
    pub exit_code: u8,
    /// Plain-text rendering used instead of the generic one.
    pub text: Option<String>,
}

impl Report {
    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "input": self.input,
            "result": self.result,
            "warnings": self.warnings,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        if let Some(t) = &self.text {
            return t.clone();
        }
        let mut out = String::new();
        render(&mut out, &self.result, 0);
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

fn render(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    let Value::Object(map) = v else {
        let _ = writeln!(out, "{pad}{}", scalar(v));
        return;
    };
    for (k, v) in map {
        match v {
            Value::Object(_) => {
                let _ = writeln!(out, "{pad}{k}:");
                render(out, v, indent + 1);
            }
            Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
                let _ = writeln!(out, "{pad}{k}:");
                for item in items {
                    if item.is_object() {
                        let _ = writeln!(out, "{pad}  -");
                        render(out, item, indent + 2);
                    } else {
                        let _ = writeln!(out, "{pad}  {}", scalar(item));
                    }
                }
            }
            _ => {
                let _ = writeln!(out, "{pad}{k}: {}", scalar(v));
            }
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

fn big(x: &BigInt) -> Value {
    Value::String(x.to_string())
}

fn bigs(xs: &[BigInt]) -> Value {
    Value::Array(xs.iter().map(big).collect())
}

fn faces_json(faces: &[Simplex]) -> Value {
    Value::Array(faces.iter().map(|f| Value::String(f.to_string())).collect())
}

fn verdict(ok: bool) -> Value {
    Value::String(if ok { "PASS" } else { "FAIL" }.into())
}

fn group_json(k: &CriticalGroup) -> Value {
    json!({
        "dimension": k.dimension,
        "group": k.to_string(),
        "invariant_factors": bigs(&k.invariant_factors),
        "free_rank": k.free_rank,
        "order": big(&k.order()),
    })
}

/// Parses a generator spec such as `["simplex-skeleton", "6", "2"]`.
pub fn generate(spec: &[String]) -> Result<SimplicialComplex, CliError> {
    let (kind, params) = spec.split_first().ok_or_else(|| CliError::Input("empty generator spec".into()))?;
    let nums: Vec<u32> = params
        .iter()
        .map(|p| p.parse().map_err(|_| CliError::Input(format!("bad generator parameter {p:?}"))))
        .collect::<Result<_, _>>()?;
    let arity = |n: usize| {
        if nums.len() == n {
            Ok(())
        } else {
            Err(CliError::Input(format!("{kind} takes {n} parameter(s), got {}", nums.len())))
        }
    };
    let cx = match kind.as_str() {
        "bipyramid" => arity(0).map(|_| generators::bipyramid())?,
        "rp2" => arity(0).map(|_| generators::rp2())?,
        "cycle" => arity(1).and_then(|_| Ok(generators::cycle(nums[0])?))?,
        "complete" => arity(1).and_then(|_| Ok(generators::complete_graph(nums[0])?))?,
        "simplex-skeleton" => arity(2).and_then(|_| Ok(generators::simplex_skeleton(nums[0], nums[1])?))?,
        "sphere" => arity(1).and_then(|_| Ok(generators::sphere(nums[0])?))?,
        other => return Err(CliError::Input(format!("unknown generator {other:?}"))),
    };
    Ok(cx)
}

struct Input {
    cx: SimplicialComplex,
    source: String,
}

impl Input {
    fn json(&self) -> Value {
        let digest = Sha256::digest(self.cx.to_facet_string().as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        json!({
            "source": self.source,
            "sha256": hex,
            "f_vector": self.cx.f_vector(),
        })
    }
}

fn load_input(cli: &Cli) -> Result<Input, CliError> {
    if let Some(path) = &cli.input {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let cx = SimplicialComplex::from_facet_str(&text)?;
        return Ok(Input { cx, source: path.display().to_string() });
    }
    if let Some(spec) = &cli.generate {
        let words: Vec<String> = spec.split_whitespace().map(String::from).collect();
        return Ok(Input { cx: generate(&words)?, source: format!("gen {spec}") });
    }
    Err(CliError::Input("this command needs --input FILE or --gen SPEC".into()))
}

fn parse_ints(text: &str) -> Result<Vec<BigInt>, CliError> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| CliError::Input(format!("bad integer {t:?}"))))
        .collect()
}

fn parse_chips(text: &str) -> Result<Vec<u64>, CliError> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| CliError::Input(format!("bad chip count {t:?}"))))
        .collect()
}

fn parse_face(text: &str) -> Result<Simplex, CliError> {
    let labels = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<Vertex>().map_err(|_| CliError::Input(format!("bad vertex {t:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Simplex::new(labels)?)
}

fn choose_tree(cx: &SimplicialComplex, i: isize, spec: &str) -> Result<SpanningTree, CliError> {
    if spec == "auto" {
        return trees::find_torsion_free_tree(cx, i)
            .ok_or_else(|| CliError::Hypothesis(format!("no torsion-free {i}-dimensional spanning tree")));
    }
    let text = std::fs::read_to_string(spec).map_err(|e| CliError::Input(format!("{spec}: {e}")))?;
    let faces = complex::parse_facets(&text)?
        .into_iter()
        .map(Simplex::new)
        .collect::<Result<Vec<_>, _>>()?;
    trees::spanning_tree_from_faces(cx, i, &faces)?
        .ok_or_else(|| CliError::Hypothesis(format!("{spec} is not a {i}-dimensional spanning tree")))
}

fn tree_json(cx: &SimplicialComplex, t: &SpanningTree) -> Value {
    json!({ "faces": faces_json(&t.faces(cx)), "torsion_order": big(t.torsion_order()) })
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Report {
    let command = describe(&cli.command);
    let standalone = matches!(cli.command, Command::Gen { .. } | Command::Verify(Verify::Simplex { .. }));
    let input = if standalone && cli.input.is_none() && cli.generate.is_none() {
        Ok(None)
    } else {
        load_input(cli).map(Some)
    };
    let input = match input {
        Ok(i) => i,
        Err(e) => return error_report(command, Value::Null, e),
    };
    let input_json = input.as_ref().map(Input::json).unwrap_or(Value::Null);
    let mut out = Outcome::default();
    let cx = input.as_ref().map(|i| &i.cx);
    match dispatch(cli, cx, &mut out) {
        Ok(result) => Report {
            command,
            input: input_json,
            result,
            warnings: out.warnings,
            exit_code: out.exit_code,
            text: out.text,
        },
        Err(e) => error_report(command, input_json, e),
    }
}

fn error_report(command: String, input: Value, e: CliError) -> Report {
    Report {
        command,
        input,
        result: json!({ "error": e.message() }),
        warnings: Vec::new(),
        exit_code: e.exit_code(),
        text: Some(format!("error: {}\n", e.message())),
    }
}

#[derive(Default)]
struct Outcome {
    warnings: Vec<String>,
    exit_code: u8,
    text: Option<String>,
}

impl Outcome {
    fn verdict(&mut self, ok: bool) -> Value {
        if !ok {
            self.exit_code = self.exit_code.max(EXIT_FAIL);
        }
        verdict(ok)
    }

    fn partial(&mut self, partial: bool) {
        if partial && self.exit_code == EXIT_OK {
            self.exit_code = EXIT_BUDGET;
        }
    }
}

fn describe(c: &Command) -> String {
    match c {
        Command::Gen { spec } => format!("gen {}", spec.join(" ")),
        Command::Info => "info".into(),
        Command::CriticalGroup { dim, tree, route } => {
            format!("critical-group --dim {dim} --tree {tree} --route {}", if *route == Route::Reduced { "reduced" } else { "direct" })
        }
        Command::Trees { dim, stream, budget, workers, .. } => {
            format!("trees --dim {dim} {} --budget {budget} --workers {workers}", if *stream { "--stream" } else { "--census" })
        }
        Command::Verify(v) => match v {
            Verify::Smtt { dim, budget } => format!("verify smtt --dim {dim} --budget {budget}"),
            Verify::MainThm { dim, trees } => format!("verify main-thm --dim {dim} --trees {trees}"),
            Verify::Sphere => "verify sphere".into(),
            Verify::Simplex { n, k } => format!("verify simplex --n {n} --k {k}"),
            Verify::AltProduct { dim } => format!("verify alt-product --dim {dim}"),
        },
        Command::Flow(f) => match f {
            FlowCommand::Fire { dim, .. } => format!("flow fire --dim {dim}"),
            FlowCommand::Extend { dim, .. } => format!("flow extend --dim {dim}"),
            FlowCommand::Equiv { dim, .. } => format!("flow equiv --dim {dim}"),
            FlowCommand::Canonical { dim, .. } => format!("flow canonical --dim {dim}"),
        },
        Command::Chip(c) => match c {
            ChipCommand::Stabilize { .. } => "chip stabilize".into(),
            ChipCommand::Recurrent { .. } => "chip recurrent".into(),
            ChipCommand::Representative { .. } => "chip representative".into(),
            ChipCommand::GroupLaw { .. } => "chip group-law".into(),
        },
    }
}

fn dispatch(cli: &Cli, cx: Option<&SimplicialComplex>, out: &mut Outcome) -> Result<Value, CliError> {
    match &cli.command {
        Command::Gen { spec } => {
            let cx = generate(spec)?;
            out.text = Some(cx.to_facet_string());
            let facets: Vec<Vec<Vertex>> = cx.facets().iter().map(|f| f.vertices().to_vec()).collect();
            Ok(json!({ "f_vector": cx.f_vector(), "facets": facets }))
        }
        Command::Verify(v @ Verify::Simplex { .. }) => verify(cx, v, out),
        command => {
            let cx = cx.expect("input is loaded for every command but gen");
            match command {
                Command::Info => info(cx),
                Command::CriticalGroup { dim, tree, route } => critical_group(cx, *dim, tree, *route),
                Command::Trees { dim, stream, budget, workers, .. } => {
                    tree_census(cx, *dim, *stream, EnumerationOptions { budget: *budget, workers: *workers }, out)
                }
                Command::Verify(v) => verify(Some(cx), v, out),
                Command::Flow(f) => flow_command(cx, f),
                Command::Chip(c) => chip_command(cx, c, cli.seed, out),
                Command::Gen { .. } => unreachable!(),
            }
        }
    }
}

fn info(cx: &SimplicialComplex) -> Result<Value, CliError> {
    let mut homology = Map::new();
    for i in -1..=cx.dim() {
        let h = cx.reduced_homology(i)?;
        homology.insert(i.to_string(), json!({ "group": h.to_string(), "betti": h.betti, "torsion": bigs(&h.torsion) }));
    }
    Ok(json!({
        "dimension": cx.dim(),
        "f_vector": cx.f_vector(),
        "facets": cx.facets().len(),
        "pure": cx.is_pure(),
        "apc": cx.is_apc(),
        "reduced_euler_characteristic": cx.reduced_euler_characteristic(),
        "reduced_homology": homology,
    }))
}

fn critical_group(cx: &SimplicialComplex, i: isize, tree: &str, route: Route) -> Result<Value, CliError> {
    match route {
        Route::Direct => {
            let k = critical::critical_group_direct(cx, i)?;
            let mut v = group_json(&k);
            v["route"] = "direct".into();
            Ok(v)
        }
        Route::Reduced => {
            cx.check_dim(i, 0, cx.dim() - 1)?;
            let t = choose_tree(cx, i, tree)?;
            let k = critical::critical_group_reduced(cx, i, &t)?;
            let mut v = group_json(&k);
            v["route"] = "reduced".into();
            v["tree"] = tree_json(cx, &t);
            Ok(v)
        }
    }
}

fn census_json(c: &trees::TreeCensus) -> Value {
    let histogram: Map<String, Value> = c.torsion_histogram.iter().map(|(t, n)| (t.to_string(), json!(n))).collect();
    json!({
        "dimension": c.dimension,
        "count": c.count.to_string(),
        "tau": big(&c.tau),
        "torsion_histogram": histogram,
        "all_torsion_free": c.all_torsion_free(),
        "partial": c.partial,
        "extensions": c.extensions,
    })
}

fn tree_census(
    cx: &SimplicialComplex,
    i: isize,
    stream: bool,
    options: EnumerationOptions,
    out: &mut Outcome,
) -> Result<Value, CliError> {
    let (census, listed) = if stream {
        if options.workers > 1 {
            out.warnings.push("--stream runs on a single worker".into());
        }
        let mut listed = Vec::new();
        let census = trees::enumerate_trees_with(cx, i, options.budget, |t| {
            listed.push(t.clone());
            ControlFlow::Continue(())
        })?;
        (census, Some(listed))
    } else {
        (trees::enumerate_trees(cx, i, &options)?, None)
    };
    out.warnings.extend(census.warnings.iter().cloned());
    out.partial(census.partial);
    let mut v = census_json(&census);
    if let Some(listed) = listed {
        let mut text = String::new();
        for t in &listed {
            let faces: Vec<String> = t.faces(cx).iter().map(ToString::to_string).collect();
            let _ = writeln!(text, "{} torsion={}", faces.join(" "), t.torsion_order());
        }
        let _ = writeln!(text, "count: {}\ntau: {}", census.count, census.tau);
        if census.partial {
            let _ = writeln!(text, "partial: true");
        }
        out.text = Some(text);
        v["trees"] = Value::Array(listed.iter().map(|t| tree_json(cx, t)).collect());
    }
    Ok(v)
}

fn verify(cx: Option<&SimplicialComplex>, v: &Verify, out: &mut Outcome) -> Result<Value, CliError> {
    if let Verify::Simplex { n, k } = v {
        return verify_simplex(*n, *k, out);
    }
    let cx = cx.expect("input is loaded");
    match v {
        Verify::Smtt { dim, budget } => {
            let r = trees::verify_smtt(cx, *dim, &EnumerationOptions { budget: *budget, workers: 1 })?;
            out.warnings.extend(r.warnings.iter().cloned());
            let ok = r.product_identity && r.determinant_identity;
            let verdict = out.verdict(ok);
            out.partial(r.partial);
            Ok(json!({
                "dimension": r.dimension,
                "pi": big(&r.pi),
                "tau": big(&r.tau),
                "tau_below": big(&r.tau_below),
                "homology_order_below": big(&r.homology_order),
                "tree": faces_json(&r.tree),
                "tree_torsion": big(&r.tree_torsion),
                "reduced_determinant": big(&r.reduced_determinant),
                "product_identity": r.product_identity,
                "determinant_identity": r.determinant_identity,
                "partial": r.partial,
                "verdict": verdict,
            }))
        }
        Verify::MainThm { dim, trees: wanted } => {
            let direct = critical::critical_group_direct(cx, *dim)?;
            let found = trees::torsion_free_trees(cx, *dim, (*wanted).max(1))?;
            if found.is_empty() {
                return Err(CliError::Hypothesis(format!("no torsion-free {dim}-dimensional spanning tree")));
            }
            let mut rows = Vec::new();
            let mut ok = true;
            for t in &found {
                let k = critical::critical_group_reduced(cx, *dim, t)?;
                ok &= k == direct;
                rows.push(json!({ "tree": faces_json(&t.faces(cx)), "group": k.to_string(), "agrees": k == direct }));
            }
            let verdict = out.verdict(ok);
            Ok(json!({ "direct": group_json(&direct), "reduced": rows, "verdict": verdict }))
        }
        Verify::Sphere => verify_sphere(cx, out),
        Verify::Simplex { .. } => unreachable!(),
        Verify::AltProduct { dim } => {
            let q = critical::alternating_order(cx, *dim)?;
            let pis = (0..=dim + 1).map(|j| critical::pi_product(cx, j)).collect::<Result<Vec<_>, _>>()?;
            let k = critical::critical_group_direct(cx, *dim)?;
            let ok = k.is_finite() && q.is_integer() && q.to_integer() == k.order();
            let verdict = out.verdict(ok);
            Ok(json!({
                "dimension": dim,
                "pi": bigs(&pis),
                "alternating_product": q.to_string(),
                "critical_group": group_json(&k),
                "verdict": verdict,
            }))
        }
    }
}

fn verify_simplex(n: u32, k: u32, out: &mut Outcome) -> Result<Value, CliError> {
    let r = critical::verify_simplex_structure(n, k)?;
    let verdict = out.verdict(r.passed());
    Ok(json!({
        "n": r.n,
        "k": r.k,
        "block_diagonal": r.block_diagonal,
        "coker_a": r.coker_a.to_string(),
        "coker_a_copies_of_z_n": r.maxwell_copies(),
        "expected_copies": r.expected_copies,
        "coker_aat": r.coker_aat.to_string(),
        "k_lower": group_json(&r.k_lower),
        "k_upper": group_json(&r.k_upper),
        "coker_aat_is_k_lower_plus_k_upper": r.claimed_identity,
        "coker_aat_is_k_lower_twice": r.doubled_identity,
        "all_cyclic_of_order_n": r.cyclic_n,
        "aligned_symmetric": r.aligned_symmetric,
        "aligned_skew_symmetric": r.aligned_skew,
        "verdict": verdict,
    }))
}

fn verify_sphere(cx: &SimplicialComplex, out: &mut Outcome) -> Result<Value, CliError> {
    let d = cx.dim();
    if d < 1 {
        return Err(CliError::Input("a sphere needs dimension at least 1".into()));
    }
    let facets = cx.facets().len();
    let ridges_ok = cx.is_pure()
        && cx.faces(d - 1).iter().all(|r| cx.faces(d).iter().filter(|f| r.is_face_of(f)).count() == 2);
    let mut homology_ok = true;
    for i in -1..=d {
        let h = cx.reduced_homology(i)?;
        let expected_betti = usize::from(i == d);
        homology_ok &= h.betti == expected_betti && h.torsion.is_empty();
    }
    let k = critical::critical_group_direct(cx, d - 1)?;
    let census = trees::enumerate_trees(cx, d, &EnumerationOptions::default())?;
    let cyclic = k.is_cyclic() && k.is_finite() && k.order() == BigInt::from(facets);
    let trees_are_facet_deletions = census.count == facets as u64 && census.all_torsion_free();
    let hypothesis = ridges_ok && homology_ok;
    let verdict = if hypothesis {
        out.verdict(cyclic && trees_are_facet_deletions)
    } else {
        out.exit_code = EXIT_HYPOTHESIS;
        out.warnings.push("not a homology sphere: some ridge is not in exactly two facets or the homology is wrong".into());
        Value::String("NOT APPLICABLE".into())
    };
    out.partial(census.partial);
    Ok(json!({
        "dimension": d,
        "facets": facets,
        "ridges_in_two_facets": ridges_ok,
        "homology_sphere": homology_ok,
        "critical_group": group_json(&k),
        "cyclic_of_order_facets": cyclic,
        "tree_count": census.count.to_string(),
        "tau": big(&census.tau),
        "trees_are_facet_deletions": trees_are_facet_deletions,
        "verdict": verdict,
    }))
}

fn configuration_json(cx: &SimplicialComplex, c: &Configuration) -> Value {
    json!({ "faces": faces_json(cx.faces(c.dimension)), "values": bigs(&c.values) })
}

fn flow_command(cx: &SimplicialComplex, f: &FlowCommand) -> Result<Value, CliError> {
    match f {
        FlowCommand::Fire { dim, face, values } => {
            let start = match values {
                Some(v) => Configuration::new(cx, *dim, parse_ints(v)?)?,
                None => {
                    cx.check_dim(*dim, 0, cx.dim())?;
                    Configuration::zeros(cx, *dim)
                }
            };
            let mut c = start.clone();
            let mut fired = Vec::new();
            for text in face {
                let s = parse_face(text)?;
                c = flow::fire(cx, &c, &s)?;
                fired.push(s);
            }
            Ok(json!({
                "fired": faces_json(&fired),
                "before": configuration_json(cx, &start),
                "after": configuration_json(cx, &c),
                "equivalent": flow::equivalent(cx, &start, &c)?,
            }))
        }
        FlowCommand::Extend { dim, theta, tree } => {
            let t = choose_tree(cx, *dim, &tree.tree)?;
            let c = flow::extend_to_conservative(cx, &t, &parse_ints(theta)?)?;
            Ok(json!({
                "tree": tree_json(cx, &t),
                "configuration": configuration_json(cx, &c),
                "conservative": flow::is_conservative(cx, &c)?,
            }))
        }
        FlowCommand::Equiv { dim, a, b } => {
            let a = Configuration::new(cx, *dim, parse_ints(a)?)?;
            let b = Configuration::new(cx, *dim, parse_ints(b)?)?;
            Ok(json!({ "equivalent": flow::equivalent(cx, &a, &b)? }))
        }
        FlowCommand::Canonical { dim, values, tree } => {
            let c = Configuration::new(cx, *dim, parse_ints(values)?)?;
            let t = choose_tree(cx, *dim, &tree.tree)?;
            let coords = GroupCoordinates::new(cx, &t)?;
            let g = coords.to_group_element(cx, &c)?;
            Ok(json!({
                "tree": tree_json(cx, &t),
                "moduli": bigs(g.moduli()),
                "residues": bigs(g.residues()),
                "identity": g.is_identity(),
            }))
        }
    }
}

fn chip_graph(cx: &SimplicialComplex, args: &ChipArgs) -> Result<(ChipGraph, Vec<u64>), CliError> {
    let bank = match args.bank {
        Some(b) => b,
        None => *cx.vertices().first().ok_or_else(|| CliError::Input("complex has no vertices".into()))?,
    };
    Ok((ChipGraph::new(cx, bank)?, parse_chips(&args.chips)?))
}

fn chip_command(cx: &SimplicialComplex, c: &ChipCommand, seed: u64, out: &mut Outcome) -> Result<Value, CliError> {
    match c {
        ChipCommand::Stabilize { state, scrambles } => {
            let (g, chips) = chip_graph(cx, state)?;
            let s = g.state(chips)?;
            let (stable, fired) = s.stabilize();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut agree = true;
            for _ in 0..*scrambles {
                let (other, other_fired) = s.stabilize_by(|ready| *ready.choose(&mut rng).expect("nonempty"));
                agree &= other == stable && other_fired == fired;
            }
            let mut v = json!({
                "bank": g.bank(),
                "vertices": g.labels(),
                "stable": stable.chips(),
                "firings": fired,
            });
            if *scrambles > 0 {
                v["scrambles"] = json!(scrambles);
                v["order_independent"] = json!(agree);
                v["verdict"] = out.verdict(agree);
            }
            Ok(v)
        }
        ChipCommand::Recurrent { state } => {
            let (g, chips) = chip_graph(cx, state)?;
            let s = g.state(chips)?;
            Ok(json!({
                "bank": g.bank(),
                "stable": s.is_stable(),
                "recurrent": s.is_recurrent(),
                "critical": s.is_critical(),
            }))
        }
        ChipCommand::Representative { state } => {
            let (g, chips) = chip_graph(cx, state)?;
            let s = g.state(chips)?;
            let r = s.critical_representative();
            let e = r.to_group_element();
            Ok(json!({
                "bank": g.bank(),
                "vertices": g.labels(),
                "critical": r.chips(),
                "moduli": bigs(e.moduli()),
                "residues": bigs(e.residues()),
            }))
        }
        ChipCommand::GroupLaw { state, other } => {
            let (g, chips) = chip_graph(cx, state)?;
            let a = g.state(chips)?;
            let b = g.state(parse_chips(other)?)?;
            let (ra, rb) = (a.critical_representative(), b.critical_representative());
            let lhs = ra.critical_sum(&rb);
            let rhs = a.combine(&b).critical_representative();
            let same_class = &ra.to_group_element() + &rb.to_group_element() == rhs.to_group_element();
            let ok = lhs == rhs && same_class;
            let verdict = out.verdict(ok);
            Ok(json!({
                "bank": g.bank(),
                "representative_a": ra.chips(),
                "representative_b": rb.chips(),
                "sum_of_representatives": lhs.chips(),
                "representative_of_sum": rhs.chips(),
                "coordinates_add": same_class,
                "verdict": verdict,
            }))
        }
    }
}

/// What the binary prints and how it exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub exit_code: u8,
    /// Plain-text errors go to stderr; reports, including JSON error
    /// reports, go to stdout.
    pub to_stderr: bool,
}

/// Parses `args`, runs the command and returns what to print. Used by the
/// binary and by tests.
pub fn main_with_args<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let failed = e.use_stderr();
            return Output { text: e.to_string(), exit_code: if failed { EXIT_INPUT } else { EXIT_OK }, to_stderr: failed };
        }
    };
    let report = run(&cli);
    if cli.json {
        Output { text: report.to_json_string() + "\n", exit_code: report.exit_code, to_stderr: false }
    } else {
        let failed = report.result.get("error").is_some();
        Output { text: report.to_text(), exit_code: report.exit_code, to_stderr: failed }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (String, u8) {
        let out = main_with_args(std::iter::once("critgroups").chain(args.iter().copied()));
        (out.text, out.exit_code)
    }

    fn json_of(args: &[&str]) -> (Value, u8) {
        let mut full = vec!["--json"];
        full.extend_from_slice(args);
        let (text, code) = run_args(&full);
        (serde_json::from_str(&text).unwrap(), code)
    }

    #[test]
    fn bipyramid_critical_group() {
        let (v, code) = json_of(&["--gen", "bipyramid", "critical-group", "--dim", "1"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(v["result"]["invariant_factors"], json!(["15"]));
        assert_eq!(v["result"]["order"], json!("15"));
        assert_eq!(v["result"]["tree"]["faces"], json!(["{1,2}", "{1,3}", "{1,4}", "{1,5}"]));
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["command", "input", "result", "warnings"]);
    }

    #[test]
    fn census_and_smtt() {
        let (v, code) = json_of(&["--gen", "bipyramid", "trees", "--dim", "2", "--census"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!((v["result"]["count"].as_str(), v["result"]["tau"].as_str()), (Some("15"), Some("15")));
        let (v, code) = json_of(&["--gen", "bipyramid", "verify", "smtt", "--dim", "2"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(v["result"]["verdict"], json!("PASS"));
    }

    #[test]
    fn json_round_trips() {
        let (text, _) = run_args(&["--json", "--gen", "simplex-skeleton 5 2", "info"]);
        let parsed: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string_pretty(&parsed).unwrap() + "\n", text);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_args(&["info"]).1, EXIT_INPUT);
        assert_eq!(run_args(&["--gen", "cycle 2", "info"]).1, EXIT_INPUT);
        assert_eq!(run_args(&["--gen", "bipyramid", "critical-group", "--dim", "7"]).1, EXIT_INPUT);
        assert_eq!(run_args(&["--gen", "bipyramid", "trees", "--dim", "2", "--budget", "3"]).1, EXIT_BUDGET);
        assert_eq!(run_args(&["--gen", "bipyramid", "verify", "sphere"]).1, EXIT_HYPOTHESIS);
        assert_eq!(run_args(&["--gen", "sphere 2", "verify", "sphere"]).1, EXIT_OK);
        assert_eq!(run_args(&["verify", "simplex", "--n", "4", "--k", "1"]).1, EXIT_FAIL);
        assert_eq!(run_args(&["verify", "simplex", "--n", "5", "--k", "1"]).1, EXIT_OK);
        assert_eq!(run_args(&["--gen", "bipyramid", "verify", "alt-product", "--dim", "1"]).1, EXIT_OK);
    }

    #[test]
    fn gen_prints_facets() {
        let (text, code) = run_args(&["gen", "sphere", "2"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(text, "1 2 3\n1 2 4\n1 3 4\n2 3 4\n");
    }

    #[test]
    fn flow_and_chip_commands() {
        let (v, code) = json_of(&["--gen", "bipyramid", "flow", "fire", "--dim", "1", "--face", "2 3"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(v["result"]["equivalent"], json!(true));
        let (v, _) = json_of(&["--gen", "bipyramid", "flow", "extend", "--dim", "1", "--theta", "1 0 0 0 0"]);
        assert_eq!(v["result"]["conservative"], json!(true));
        let (v, code) = json_of(&["--gen", "cycle 5", "chip", "stabilize", "--chips", "9 0 0 3", "--scrambles", "20"]);
        assert_eq!((code, &v["result"]["verdict"]), (EXIT_OK, &json!("PASS")));
        let (v, code) = json_of(&["--gen", "cycle 5", "chip", "group-law", "--chips", "1 0 1 1", "--other", "2 1 0 0"]);
        assert_eq!((code, &v["result"]["verdict"]), (EXIT_OK, &json!("PASS")));
        let (v, _) = json_of(&["--gen", "complete 3", "chip", "recurrent", "--chips", "0 0"]);
        assert_eq!(v["result"]["recurrent"], json!(false));
    }

    #[test]
    fn torsion_tree_file_is_a_hypothesis_violation() {
        let dir = std::env::temp_dir().join(format!("critgroups-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let mut complex = generators::rp2().to_facet_string();
        complex.push_str("1 2 3 4\n");
        let input = dir.join("glued.txt");
        std::fs::write(&input, complex).unwrap();
        let tree = dir.join("tree.txt");
        std::fs::write(&tree, generators::rp2().to_facet_string()).unwrap();
        let (text, code) = run_args(&[
            "--input",
            input.to_str().unwrap(),
            "critical-group",
            "--dim",
            "2",
            "--tree",
            tree.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_HYPOTHESIS, "{text}");
        assert!(text.contains("torsion"));
        std::fs::remove_dir_all(dir).unwrap();
    }

}
