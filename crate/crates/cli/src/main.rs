use std::fs;
use std::io::Write as _;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use lospre_core::cfg::{DEFAULT_EDGE_COST, DEFAULT_NODE_COST};
use lospre_core::dot::{dump_dot, dump_nice_dot, dump_tree_dec_dot, Overlay};
use lospre_core::dp::{solve_extended_with, write_solution};
use lospre_core::graph_file::{load_cfg, LoadOptions};
use lospre_core::ir::{build_cfg, derive_problems, parse_ir, Program};
use lospre_core::oracle::{
    brute_extended, brute_lospre_ordered, brute_safety, generate, CostStyle, InstanceGenerator,
    Style, MAX_EXTENDED_NODES, MAX_LOSPRE_NODES, MAX_SAFETY_NODES,
};
use lospre_core::pipeline::{optimize, Goal, PipelineConfig, PipelineError, SafetyPolicy};
use lospre_core::safety::solve_safety_with;
use lospre_core::scaling::measure_chain;
use lospre_core::{
    apply_safety, decompose, make_nice, solve_with, Cfg, CostVec, DpError, ExprProblem,
    NiceTreeDec, NodeSet, SolveOptions,
};

#[derive(Parser)]
#[command(
    name = "lospre",
    version,
    about = "Lifetime-optimal speculative partial redundancy elimination"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a three-address IR file.
    Run {
        input: PathBuf,
        #[command(flatten)]
        opts: SolveArgs,
    },
    /// Solve every `problem` line of a graph file.
    Graph {
        input: PathBuf,
        #[command(flatten)]
        opts: SolveArgs,
        /// Add a fresh source when several nodes lack predecessors.
        #[arg(long)]
        synthetic_source: bool,
    },
    /// Report the tree-decomposition of an IR or graph file.
    Decompose {
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long, default_value_t = lospre_core::dp::DEFAULT_MAX_WIDTH)]
        max_width: usize,
        /// Also emit the nice decomposition.
        #[arg(long)]
        nice: bool,
        #[arg(long, value_enum, value_delimiter = ',')]
        emit: Vec<Emit>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print the invalidation set extended for safety.
    Safety {
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long, default_value_t = lospre_core::dp::DEFAULT_MAX_WIDTH)]
        max_width: usize,
        #[arg(long)]
        verify: bool,
    },
    /// Compare the solvers with exhaustive search on random instances.
    OracleCheck {
        /// Half-open seed range `A..B`.
        #[arg(long, value_parser = parse_range, default_value = "0..100")]
        seeds: Range<u64>,
        /// Check this single seed instead of a range.
        #[arg(long, conflicts_with = "seeds")]
        seed: Option<u64>,
        /// Largest instance, in nodes.
        #[arg(long, default_value_t = 10)]
        size: usize,
        #[arg(long, value_enum, default_value_t = Variant::Lospre)]
        variant: Variant,
        #[arg(long, value_enum, default_value_t = StyleArg::All)]
        style: StyleArg,
    },
    /// Time decomposition plus solve on chained diamonds.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [1000, 2000, 4000, 8000, 16000, 32000, 64000])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// IR mode defaults to size; graph mode uses the file's costs unless set.
    #[arg(long, value_enum)]
    goal: Option<GoalArg>,
    #[arg(long, value_enum, default_value_t = SafetyArg::Auto)]
    safety: SafetyArg,
    #[arg(long, default_value_t = lospre_core::dp::DEFAULT_MAX_WIDTH)]
    max_width: usize,
    #[arg(long, value_enum, value_delimiter = ',')]
    emit: Vec<Emit>,
    /// Check solutions against exhaustive search on small graphs.
    #[arg(long)]
    verify: bool,
    /// Write artifacts here instead of standard output.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Ir,
    Graph,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GoalArg {
    Size,
    Speed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SafetyArg {
    Auto,
    Always,
    Never,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum Emit {
    Dot,
    Solution,
    Stats,
    RewrittenIr,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Variant {
    Lospre,
    Safety,
    Extended,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StyleArg {
    All,
    SeriesParallel,
    RandomSparse,
    ChainedDiamonds,
}

fn parse_range(s: &str) -> Result<Range<u64>, String> {
    let (a, b) = s.split_once("..").ok_or("expected A..B")?;
    let a: u64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok(a..b)
}

enum Failure {
    Parse(String),
    Width(String),
    Verify(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::Width(_) => 3,
            Failure::Verify(_) => 4,
            Failure::Other(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::Width(m) | Failure::Verify(m) | Failure::Other(m) => m,
        }
    }
}

impl From<DpError> for Failure {
    fn from(e: DpError) -> Failure {
        match e {
            DpError::WidthExceeded { .. } | DpError::TableTooLarge { .. } => {
                Failure::Width(e.to_string())
            }
            _ => Failure::Other(e.to_string()),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Failure {
        match e {
            PipelineError::Dp(d) => d.into(),
            other => Failure::Other(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "out".to_string(), |s| s.to_string_lossy().into_owned())
}

/// Writes an artifact to `<out_dir>/<name>`, or to standard output.
fn emit(out_dir: Option<&Path>, name: &str, content: &str) -> Outcome {
    match out_dir {
        Some(dir) => {
            let path = dir.join(name);
            fs::create_dir_all(dir)
                .and_then(|()| fs::write(&path, content))
                .map_err(|e| Failure::Other(format!("{}: {e}", path.display())))
        }
        None => say(content),
    }
}

macro_rules! out {
    ($($arg:tt)*) => {
        say(&format!("{}\n", format_args!($($arg)*)))
    };
}

fn say(text: &str) -> Outcome {
    std::io::stdout()
        .write_all(text.as_bytes())
        .map_err(|e| Failure::Other(format!("standard output: {e}")))
}

fn json_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

fn ids(set: &NodeSet) -> Vec<usize> {
    set.iter().copied().collect()
}

fn nice_of(cfg: &Cfg, max_width: usize) -> Result<NiceTreeDec, Failure> {
    let td = decompose(cfg);
    if td.width() > max_width {
        return Err(Failure::Width(format!(
            "decomposition width {} exceeds --max-width {max_width}",
            td.width()
        )));
    }
    make_nice(cfg, &td).map_err(|e| Failure::Other(format!("invalid decomposition: {}", e.0)))
}

fn detect_mode(text: &str) -> Mode {
    let first = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty());
    match first {
        Some(l) if l.split_whitespace().next() == Some("cfg") => Mode::Graph,
        _ => Mode::Ir,
    }
}

fn load_program(text: &str) -> Result<Program, Failure> {
    parse_ir(text).map_err(|e| Failure::Parse(e.to_string()))
}

fn load_graph(text: &str, synthetic_source: bool) -> Result<(Cfg, Vec<ExprProblem>), Failure> {
    let loaded = load_cfg(text, LoadOptions { synthetic_source })
        .map_err(|e| Failure::Parse(e.to_string()))?;
    Ok((loaded.cfg, loaded.problems))
}

fn cmd_run(input: &Path, opts: &SolveArgs) -> Outcome {
    let program = load_program(&read(input)?)?;
    let config = PipelineConfig {
        goal: match opts.goal {
            Some(GoalArg::Speed) => Goal::Speed,
            _ => Goal::Size,
        },
        safety: match opts.safety {
            SafetyArg::Auto => SafetyPolicy::Auto,
            SafetyArg::Always => SafetyPolicy::Always,
            SafetyArg::Never => SafetyPolicy::Never,
        },
        max_width: opts.max_width,
        verify_up_to: opts.verify.then_some(MAX_LOSPRE_NODES),
        ..PipelineConfig::default()
    };
    let result = optimize(&program, &config)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }

    let mut emits = opts.emit.clone();
    if emits.is_empty() {
        emits = vec![Emit::Stats, Emit::RewrittenIr];
    }
    emits.sort();
    emits.dedup();
    let out_dir = opts.out_dir.as_deref();
    let name = stem(input);
    for e in emits {
        match e {
            Emit::Dot => {
                let ir = build_cfg(&result.program).map_err(|e| Failure::Other(e.to_string()))?;
                let labels = ir.labels(&result.program);
                let overlay = Overlay {
                    labels: Some(&labels),
                    ..Overlay::default()
                };
                emit(out_dir, &format!("{name}.dot"), &dump_dot(&ir.cfg, overlay))?;
            }
            Emit::Solution => {
                let text: String = result
                    .passes
                    .iter()
                    .enumerate()
                    .map(|(k, p)| {
                        format!(
                            "# pass {k}: {}\n{}",
                            p.expression,
                            write_solution(&p.solution)
                        )
                    })
                    .collect();
                emit(out_dir, &format!("{name}.solution"), &text)?;
            }
            Emit::Stats => {
                let elimination = result.elimination();
                let candidates: Vec<Value> = result
                    .passes
                    .iter()
                    .zip(&elimination.candidates)
                    .map(|(p, c)| {
                        json!({
                            "expression": p.expression,
                            "uses": c.uses,
                            "calcs": c.calcs,
                            "eliminated": c.eliminated(),
                            "safety_added": p.safety_added.len(),
                            "cost": p.solution.cost,
                            "width": p.stats.width,
                        })
                    })
                    .collect();
                let stats = json!({
                    "instructions_before": program.len(),
                    "instructions_after": result.program.len(),
                    "candidates": candidates,
                    "eliminated": elimination.total(),
                    "max_width": result.max_width,
                });
                emit(out_dir, &format!("{name}.stats.json"), &json_text(&stats))?;
            }
            Emit::RewrittenIr => {
                emit(
                    out_dir,
                    &format!("{name}.lospre.ir"),
                    &result.program.to_string(),
                )?;
            }
        }
    }

    if opts.verify {
        eprintln!(
            "verify: {} solutions on graphs of at most {MAX_LOSPRE_NODES} nodes checked, {} mismatches",
            result.verified,
            result.mismatches.len()
        );
        if let Some(m) = result.mismatches.first() {
            return Err(Failure::Verify(format!(
                "`{}`: solver cost {}, exhaustive search {}",
                m.expression, m.dp.cost, m.oracle.cost
            )));
        }
    }
    Ok(())
}

fn cmd_graph(input: &Path, opts: &SolveArgs, synthetic_source: bool) -> Outcome {
    let (mut cfg, problems) = load_graph(&read(input)?, synthetic_source)?;
    if opts.goal == Some(GoalArg::Size) {
        cfg = cfg
            .with_edge_costs(vec![DEFAULT_EDGE_COST; cfg.edge_count()])
            .with_node_costs(vec![DEFAULT_NODE_COST; cfg.node_count()]);
    }
    let nice = nice_of(&cfg, opts.max_width)?;
    let options = SolveOptions {
        max_width: opts.max_width,
    };

    let mut solved = Vec::with_capacity(problems.len());
    for problem in &problems {
        let (problem, added) = if opts.safety == SafetyArg::Always {
            let (s, _) = solve_safety_with(&cfg, problem, &nice, &options)?;
            (apply_safety(problem, &s), s.added)
        } else {
            (problem.clone(), NodeSet::new())
        };
        let (solution, stats) = solve_with(&cfg, &problem, &nice, &options)?;
        solved.push((problem, added, solution, stats));
    }

    let mut emits = opts.emit.clone();
    if emits.is_empty() {
        emits = vec![Emit::Solution];
    }
    emits.sort();
    emits.dedup();
    let out_dir = opts.out_dir.as_deref();
    let name = stem(input);
    for e in emits {
        match e {
            Emit::Dot => {
                for (k, (problem, _, s, _)) in solved.iter().enumerate() {
                    let overlay = Overlay {
                        problem: Some(problem),
                        life: Some(&s.life_set),
                        calc: Some(&s.calc_set),
                        labels: None,
                    };
                    emit(
                        out_dir,
                        &format!("{name}.problem{k}.dot"),
                        &dump_dot(&cfg, overlay),
                    )?;
                }
            }
            Emit::Solution => {
                let text: String = solved
                    .iter()
                    .enumerate()
                    .map(|(k, (_, _, s, _))| format!("# problem {k}\n{}", write_solution(s)))
                    .collect();
                emit(out_dir, &format!("{name}.solution"), &text)?;
            }
            Emit::Stats => {
                let rows: Vec<Value> = solved
                    .iter()
                    .map(|(p, added, s, stats)| {
                        json!({
                            "uses": p.use_set().len(),
                            "calcs": s.calc_set.len(),
                            "eliminated": p.use_set().len() as i64 - s.calc_set.len() as i64,
                            "life": s.life_set.len(),
                            "safety_added": ids(added),
                            "cost": s.cost,
                            "transitions": stats.transitions,
                        })
                    })
                    .collect();
                let stats = json!({
                    "nodes": cfg.node_count(),
                    "edges": cfg.edge_count(),
                    "width": nice.width(),
                    "problems": rows,
                });
                emit(out_dir, &format!("{name}.stats.json"), &json_text(&stats))?;
            }
            Emit::RewrittenIr => {
                return Err(Failure::Other("graph mode has no IR to rewrite".into()));
            }
        }
    }

    if opts.verify {
        if cfg.node_count() > MAX_LOSPRE_NODES {
            eprintln!(
                "verify: skipped, {} nodes exceed {MAX_LOSPRE_NODES}",
                cfg.node_count()
            );
            return Ok(());
        }
        let order = nice.forget_order();
        let mut bad = Vec::new();
        for (k, (problem, _, s, _)) in solved.iter().enumerate() {
            match brute_lospre_ordered(&cfg, problem, &order) {
                Ok(o) if o.cost == s.cost && o.life_set == s.life_set => {}
                Ok(o) => bad.push(format!("problem {k}: solver {} vs {}", s.cost, o.cost)),
                Err(e) => bad.push(format!("problem {k}: {e}")),
            }
        }
        eprintln!(
            "verify: {} problems checked, {} mismatches",
            solved.len(),
            bad.len()
        );
        if !bad.is_empty() {
            return Err(Failure::Verify(bad.join("; ")));
        }
    }
    Ok(())
}

fn input_graph(
    text: &str,
    mode: Option<Mode>,
) -> Result<(Cfg, Vec<(String, ExprProblem)>), Failure> {
    match mode.unwrap_or_else(|| detect_mode(text)) {
        Mode::Graph => {
            let (cfg, problems) = load_graph(text, false)?;
            let named = problems
                .into_iter()
                .enumerate()
                .map(|(k, p)| (format!("problem {k}"), p))
                .collect();
            Ok((cfg, named))
        }
        Mode::Ir => {
            let program = load_program(text)?;
            let ir = build_cfg(&program).map_err(|e| Failure::Other(e.to_string()))?;
            let named = derive_problems(&program, &ir)
                .into_iter()
                .map(|(c, p)| (c.key.to_string(), p))
                .collect();
            Ok((ir.cfg, named))
        }
    }
}

fn cmd_decompose(
    input: &Path,
    mode: Option<Mode>,
    max_width: usize,
    nice_dot: bool,
    emits: &[Emit],
    out_dir: Option<&Path>,
) -> Outcome {
    let (cfg, _) = input_graph(&read(input)?, mode)?;
    let td = decompose(&cfg);
    let nice = make_nice(&cfg, &td)
        .map_err(|e| Failure::Other(format!("invalid decomposition: {}", e.0)))?;
    out!(
        "nodes {} edges {} width {} bags {} nice-nodes {}",
        cfg.node_count(),
        cfg.edge_count(),
        td.width(),
        td.bags().len(),
        nice.nodes().len()
    )?;
    let name = stem(input);
    if emits.contains(&Emit::Dot) {
        emit(
            out_dir,
            &format!("{name}.treedec.dot"),
            &dump_tree_dec_dot(&td),
        )?;
        if nice_dot {
            emit(out_dir, &format!("{name}.nice.dot"), &dump_nice_dot(&nice))?;
        }
    }
    if td.width() > max_width {
        return Err(Failure::Width(format!(
            "decomposition width {} exceeds --max-width {max_width}",
            td.width()
        )));
    }
    Ok(())
}

fn cmd_safety(input: &Path, mode: Option<Mode>, max_width: usize, verify: bool) -> Outcome {
    let (cfg, problems) = input_graph(&read(input)?, mode)?;
    let nice = nice_of(&cfg, max_width)?;
    let options = SolveOptions { max_width };
    let mut bad = Vec::new();
    for (name, problem) in &problems {
        let (s, _) = solve_safety_with(&cfg, problem, &nice, &options)?;
        out!(
            "{name}: invalidate {:?} added {:?}",
            ids(&s.i_prime),
            ids(&s.added)
        )?;
        if verify && cfg.node_count() <= MAX_SAFETY_NODES {
            match brute_safety(&cfg, problem) {
                Ok(o) if o.i_prime == s.i_prime => {}
                Ok(o) => bad.push(format!(
                    "{name}: exhaustive search adds {:?}",
                    ids(&o.added)
                )),
                Err(e) => bad.push(format!("{name}: {e}")),
            }
        }
    }
    if verify {
        if cfg.node_count() > MAX_SAFETY_NODES {
            eprintln!(
                "verify: skipped, {} nodes exceed {MAX_SAFETY_NODES}",
                cfg.node_count()
            );
        } else {
            eprintln!(
                "verify: {} problems checked, {} mismatches",
                problems.len(),
                bad.len()
            );
        }
    }
    if !bad.is_empty() {
        return Err(Failure::Verify(bad.join("; ")));
    }
    Ok(())
}

fn style_name(style: Style) -> &'static str {
    match style {
        Style::SeriesParallel => "series-parallel",
        Style::RandomSparse => "random-sparse",
        Style::ChainedDiamonds => "chained-diamonds",
    }
}

enum Verdict {
    Pass(String),
    /// Same cost, different sets.
    Warn(String),
    Fail(String),
}

fn check_instance(
    variant: Variant,
    seed: u64,
    cfg: &Cfg,
    problem: &ExprProblem,
) -> Result<Verdict, Failure> {
    let nice = make_nice(cfg, &decompose(cfg))
        .map_err(|e| Failure::Other(format!("invalid decomposition: {}", e.0)))?;
    let options = SolveOptions::default();
    let oracle_err = |e: lospre_core::oracle::OracleError| Failure::Other(e.to_string());
    Ok(match variant {
        Variant::Lospre => {
            let (dp, _) = solve_with(cfg, problem, &nice, &options)?;
            let o = brute_lospre_ordered(cfg, problem, &nice.forget_order()).map_err(oracle_err)?;
            if dp.cost != o.cost {
                Verdict::Fail(format!("cost {} vs oracle {}", dp.cost, o.cost))
            } else if dp.life_set != o.life_set {
                Verdict::Warn(format!("cost {}, life sets differ", dp.cost))
            } else {
                Verdict::Pass(format!("cost {}", dp.cost))
            }
        }
        Variant::Safety => {
            let (dp, _) = solve_safety_with(cfg, problem, &nice, &options)?;
            let o = brute_safety(cfg, problem).map_err(oracle_err)?;
            if dp.i_prime == o.i_prime {
                Verdict::Pass(format!("added {:?}", ids(&dp.added)))
            } else {
                Verdict::Fail(format!(
                    "added {:?} vs oracle {:?}",
                    ids(&dp.added),
                    ids(&o.added)
                ))
            }
        }
        Variant::Extended => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let table: Vec<[CostVec; 8]> = cfg
                .nodes()
                .map(|_| {
                    std::array::from_fn(|_| {
                        CostVec::new(rng.gen_range(-2..=3), rng.gen_range(-2..=3))
                    })
                })
                .collect();
            let cost = |v: usize, l: bool, a: bool, b: bool| {
                table[v][l as usize | (a as usize) << 1 | (b as usize) << 2]
            };
            let (dp, _) = solve_extended_with(cfg, problem, &nice, cost, &options)?;
            let o = brute_extended(cfg, problem, cost).map_err(oracle_err)?;
            if dp.cost == o.cost {
                Verdict::Pass(format!("cost {}", dp.cost))
            } else {
                Verdict::Fail(format!("cost {} vs oracle {}", dp.cost, o.cost))
            }
        }
    })
}

fn cmd_oracle_check(seeds: Range<u64>, size: usize, variant: Variant, style: StyleArg) -> Outcome {
    let limit = match variant {
        Variant::Lospre => MAX_LOSPRE_NODES,
        Variant::Safety => MAX_SAFETY_NODES,
        Variant::Extended => MAX_EXTENDED_NODES,
    };
    if size == 0 || size > limit {
        return Err(Failure::Other(format!(
            "--size must be between 1 and {limit} for this variant"
        )));
    }
    let (mut passed, mut warned, mut failed) = (0, 0, 0);
    for seed in seeds.clone() {
        let style = match style {
            StyleArg::All => Style::ALL[(seed % 3) as usize],
            StyleArg::SeriesParallel => Style::SeriesParallel,
            StyleArg::RandomSparse => Style::RandomSparse,
            StyleArg::ChainedDiamonds => Style::ChainedDiamonds,
        };
        let costs = if seed % 2 == 0 {
            CostStyle::Unit
        } else {
            CostStyle::Random
        };
        let (cfg, problem) =
            generate(&InstanceGenerator::new(seed, style, 1..=size).with_costs(costs));
        let head = format!("seed {seed} {} n={}", style_name(style), cfg.node_count());
        match check_instance(variant, seed, &cfg, &problem)? {
            Verdict::Pass(d) => {
                passed += 1;
                out!("{head}: pass {d}")?;
            }
            Verdict::Warn(d) => {
                warned += 1;
                out!("{head}: warn {d}")?;
            }
            Verdict::Fail(d) => {
                failed += 1;
                out!("{head}: FAIL {d}")?;
            }
        }
    }
    out!(
        "{} instances: {passed} passed, {warned} tie-break warnings, {failed} failed",
        seeds.end - seeds.start
    )?;
    if failed > 0 {
        return Err(Failure::Verify(format!(
            "{failed} instances disagree with the oracle"
        )));
    }
    Ok(())
}

fn cmd_bench(sizes: &[usize], repeats: usize) -> Outcome {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Failure::Other("sizes must be positive".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Failure::Other("sizes must be strictly ascending".into()));
    }
    let report = measure_chain(sizes, repeats)?;
    out!(
        "{:>8} {:>8} {:>6} {:>12}",
        "nodes",
        "edges",
        "width",
        "seconds"
    )?;
    for p in &report.points {
        out!(
            "{:>8} {:>8} {:>6} {:>12.6}",
            p.nodes,
            p.edges,
            p.width,
            p.elapsed.as_secs_f64()
        )?;
    }
    if let Some(slope) = report.slope() {
        out!("slope {slope:.3}")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Run { input, opts } => cmd_run(&input, &opts),
        Command::Graph {
            input,
            opts,
            synthetic_source,
        } => cmd_graph(&input, &opts, synthetic_source),
        Command::Decompose {
            input,
            mode,
            max_width,
            nice,
            emit,
            out_dir,
        } => cmd_decompose(&input, mode, max_width, nice, &emit, out_dir.as_deref()),
        Command::Safety {
            input,
            mode,
            max_width,
            verify,
        } => cmd_safety(&input, mode, max_width, verify),
        Command::OracleCheck {
            seeds,
            seed,
            size,
            variant,
            style,
        } => {
            let seeds = seed.map_or(seeds, |s| s..s + 1);
            cmd_oracle_check(seeds, size, variant, style)
        }
        Command::Bench { sizes, repeats } => cmd_bench(&sizes, repeats),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("lospre: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
