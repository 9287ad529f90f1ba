//! Command line entry points.

use std::ffi::OsString;
use std::io::Write;

use adverse_core::correctness::{check_formula, run_query};
use adverse_core::graph::Graph;
use adverse_core::regulation::{build_annotated, build_joint, JointModel};
use adverse_core::rewrite::{direct_transformations, Rule};
use adverse_core::statespace::{complete_lts, explore, Lts};
use adverse_core::temporal::Status;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dot::export_dot;
use crate::dsl::{load_model, Model};
use crate::error::*;
use crate::query::{correctness_query, QueryOptions};
use crate::report::{JsonGraph, Report, WitnessStep};

#[derive(Parser, Debug)]
#[command(
    name = "adverse",
    version,
    about = "Check correctness of graph transformation systems under adverse conditions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide a correctness notion or a declared temporal formula.
    Check(CheckArgs),
    /// Explore the joint (or annotated) state space and summarize it.
    Explore(SpaceArgs),
    /// Print one random run of the joint (or annotated) system.
    Simulate(SimulateArgs),
    /// Print the completed state space as a DOT digraph.
    Dot(SpaceArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Model file.
    #[arg(long)]
    model: String,
    /// Query declared in the model; explicit flags override its fields.
    #[arg(long)]
    query: Option<String>,
    /// Regulation automaton; optional when the model declares exactly one.
    #[arg(long)]
    automaton: Option<String>,
    /// Initial graph name; may be repeated.
    #[arg(long = "init")]
    inits: Vec<String>,
    #[arg(long)]
    max_states: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    max_graph_size: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    common: Common,
    /// plain, k-step, last-minute or weak-k-step.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    /// Precondition constraint.
    #[arg(long)]
    pre: Option<String>,
    /// Postcondition constraint.
    #[arg(long)]
    post: Option<String>,
    /// direct, reduction or both.
    #[arg(long)]
    method: Option<String>,
    /// Check a declared LTL or CTL formula instead of a correctness notion.
    #[arg(long, conflicts_with_all = ["kind", "k", "pre", "post", "method"])]
    formula: Option<String>,
}

#[derive(Args, Debug)]
struct SpaceArgs {
    #[command(flatten)]
    common: Common,
    /// Use the annotated joint system instead of the joint system.
    #[arg(long)]
    annotated: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Runs the command line `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_HOLDS };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Check(a) => check(a, out),
        Command::Explore(a) => explore_cmd(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Dot(a) => dot(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn read_model(path: &str) -> Result<Model, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_string(),
        message: e.to_string(),
    })?;
    Ok(load_model(&text)?)
}

fn options(c: &Common) -> QueryOptions {
    QueryOptions {
        query: c.query.clone(),
        automaton: c.automaton.clone(),
        inits: c.inits.clone(),
        max_states: c.max_states,
        max_depth: c.max_depth,
        max_graph_size: c.max_graph_size,
        ..Default::default()
    }
}

fn exit_for(status: Status) -> i32 {
    match status {
        Status::Holds => EXIT_HOLDS,
        Status::Violated => EXIT_VIOLATED,
        Status::Unknown => EXIT_UNKNOWN,
    }
}

fn emit(out: &mut dyn Write, text: &str) {
    let _ = out.write_all(text.as_bytes());
    if !text.ends_with('\n') {
        let _ = out.write_all(b"\n");
    }
}

fn check(a: &CheckArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let model = read_model(&a.common.model)?;
    let mut opts = options(&a.common);
    opts.kind = a.kind.clone();
    opts.k = a.k;
    opts.pre = a.pre.clone();
    opts.post = a.post.clone();
    opts.method = a.method.clone();
    let opts = opts.merged(&model)?;
    let (report, status) = match &a.formula {
        Some(name) => {
            let formula = model.formula(name)?;
            let joint = opts.joint_model(&model)?;
            let inits = opts.init_graphs(&model)?;
            let run = check_formula(&joint, &inits, opts.limits(), formula)?;
            (Report::from_formula(name, &run), run.verdict.status)
        }
        None => {
            let q = correctness_query(&model, &opts)?;
            let r = run_query(&q)?;
            (Report::from_correctness(&r), r.verdict.status)
        }
    };
    emit(
        out,
        &match a.common.format {
            Format::Text => report.to_text(),
            Format::Json => report.to_json(),
        },
    );
    Ok(exit_for(status))
}

struct Space {
    model: Model,
    joint: JointModel,
    rules: Vec<Rule>,
    inits: Vec<Graph>,
    opts: QueryOptions,
}

fn space(a: &SpaceArgs) -> Result<Space, CliError> {
    let model = read_model(&a.common.model)?;
    let opts = options(&a.common).merged(&model)?;
    let joint = opts.joint_model(&model)?;
    let objects = opts.init_graphs(&model)?;
    let (rules, inits) = if a.annotated {
        let inits = objects.iter().map(|g| joint.annotated_initial(g)).collect();
        (build_annotated(&joint).map_err(adverse_core::correctness::QueryError::from)?, inits)
    } else {
        let inits = objects.iter().map(|g| joint.joint_initial(g)).collect();
        (build_joint(&joint).map_err(adverse_core::correctness::QueryError::from)?, inits)
    };
    Ok(Space {
        model,
        joint,
        rules,
        inits,
        opts,
    })
}

#[derive(Serialize)]
struct ExploreSummary {
    states: usize,
    transitions: usize,
    initial: Vec<usize>,
    complete: bool,
    truncation: Option<String>,
    deadlocks: Vec<usize>,
    rules: Vec<String>,
}

fn explore_cmd(a: &SpaceArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let sp = space(a)?;
    let lts = explore(&sp.rules, &sp.inits, sp.opts.limits());
    let summary = ExploreSummary {
        states: lts.len(),
        transitions: lts.transitions.len(),
        initial: lts.initial.clone(),
        complete: lts.complete,
        truncation: lts.truncation.clone(),
        deadlocks: lts.deadlocks(),
        rules: sp.rules.iter().map(|r| r.name().to_string()).collect(),
    };
    let text = match a.common.format {
        Format::Json => serde_json::to_string_pretty(&summary).expect("summary serializes"),
        Format::Text => {
            let mut s = format!(
                "states: {}\ntransitions: {}\ncomplete: {}\n",
                summary.states, summary.transitions, summary.complete
            );
            if let Some(t) = &summary.truncation {
                s.push_str(&format!("truncated by: {t}\n"));
            }
            s.push_str(&format!("deadlocks: {:?}\n", summary.deadlocks));
            s.push_str(&format!("rules: {}\n", summary.rules.join(" ")));
            s
        }
    };
    emit(out, &text);
    Ok(if lts.complete { EXIT_HOLDS } else { EXIT_UNKNOWN })
}

#[derive(Serialize)]
struct Run {
    seed: u64,
    steps: Vec<WitnessStep>,
    deadlocked: bool,
}

fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let sp = space(&a.space)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut g = sp.inits[rng.gen_range(0..sp.inits.len())].clone();
    let mut steps = vec![WitnessStep {
        rule: None,
        role: "init".into(),
        graph: JsonGraph::from(&g),
    }];
    let mut deadlocked = false;
    for _ in 0..a.steps {
        let options = direct_transformations(&sp.rules, &g);
        if options.is_empty() {
            deadlocked = true;
            break;
        }
        let pick = &options[rng.gen_range(0..options.len())];
        let rule = &sp.rules[pick.rule_index];
        g = pick.after.clone();
        steps.push(WitnessStep {
            rule: Some(rule.name().to_string()),
            role: rule.role.as_str().into(),
            graph: JsonGraph::from(&g),
        });
    }
    let run = Run {
        seed: a.seed,
        steps,
        deadlocked,
    };
    let text = match a.space.common.format {
        Format::Json => serde_json::to_string_pretty(&run).expect("run serializes"),
        Format::Text => {
            let mut s = String::new();
            for (i, st) in run.steps.iter().enumerate() {
                s.push_str(&format!(
                    "{i:>3} {:<11} {}\n",
                    st.role,
                    st.rule.as_deref().unwrap_or("-")
                ));
            }
            if run.deadlocked {
                s.push_str("deadlock\n");
            }
            s
        }
    };
    emit(out, &text);
    Ok(EXIT_HOLDS)
}

/// The completed state space of the selected system.
fn completed(sp: &Space) -> Lts {
    complete_lts(&explore(&sp.rules, &sp.inits, sp.opts.limits()))
}

fn dot(a: &SpaceArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let sp = space(a)?;
    let lts = completed(&sp);
    emit(
        out,
        &export_dot(&lts, &sp.model.constraints, &sp.joint.state_labels()),
    );
    Ok(if lts.complete { EXIT_HOLDS } else { EXIT_UNKNOWN })
}
