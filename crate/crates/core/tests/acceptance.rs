//! One line per acceptance criterion; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use lospre_core::cfg::{DEFAULT_EDGE_COST, DEFAULT_NODE_COST};
use lospre_core::dp::solve_extended_with;
use lospre_core::ir::{interpret, parse_ir, Machine, ARRAY_BRANCH};
use lospre_core::oracle::{
    brute_extended, brute_lospre_ordered, brute_safety, generate, generate_program, CostStyle,
    InstanceGenerator, ProgramGenerator, Style,
};
use lospre_core::pipeline::{optimize, PipelineConfig};
use lospre_core::safety::solve_safety_with;
use lospre_core::scaling::measure_chain;
use lospre_core::treedec::validate_nice;
use lospre_core::{
    apply_safety, calc_set, decompose, make_nice, solve_with, validate, Cfg, CostVec, ExprProblem,
    NiceTreeDec, NodeSet, SolveOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const OPTIMALITY_INSTANCES: u64 = 2_000;
const SAFETY_INSTANCES: u64 = 1_000;
const EXTENDED_INSTANCES: u64 = 200;
const SCALING_SIZES: [usize; 7] = [1_000, 2_000, 4_000, 8_000, 16_000, 32_000, 64_000];
const MAX_SLOPE: f64 = 1.15;
const MAX_TIME_AT_64K: Duration = Duration::from_secs(10);
/// Transitions per `max(width, 1) * 2^width` per nice node.
const WORK_K: f64 = 4.0;
const ARRAY_BRANCH_INPUTS: u64 = 1_000;
const PROGRAMS: u64 = 500;
const INPUTS_PER_PROGRAM: u64 = 20;
const STEP_LIMIT: usize = 1_000_000;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, name: &str, ok: bool, detail: String, started: Instant) {
        if !ok {
            self.failures += 1;
        }
        println!(
            "{} {name}: {detail} ({:.1?})",
            if ok { "PASS" } else { "FAIL" },
            started.elapsed()
        );
    }
}

fn nice_of(cfg: &Cfg) -> NiceTreeDec {
    make_nice(cfg, &decompose(cfg)).expect("decomposition is valid")
}

fn unit_costs(cfg: &Cfg) -> Cfg {
    cfg.with_edge_costs(vec![DEFAULT_EDGE_COST; cfg.edge_count()])
        .with_node_costs(vec![DEFAULT_NODE_COST; cfg.node_count()])
}

fn suite(count: u64, max_nodes: usize, seed_base: u64) -> impl Iterator<Item = (Cfg, ExprProblem)> {
    (0..count).map(move |i| {
        let style = Style::ALL[(i % 3) as usize];
        let costs = if i % 2 == 0 {
            CostStyle::Unit
        } else {
            CostStyle::Random
        };
        let gen = InstanceGenerator::new(seed_base + i, style, 1..=max_nodes).with_costs(costs);
        generate(&gen)
    })
}

fn optimality(r: &mut Report) {
    let started = Instant::now();
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    let mut work_ok = true;
    for (i, (cfg, problem)) in suite(OPTIMALITY_INSTANCES, 12, 0).enumerate() {
        let nice = nice_of(&cfg);
        let (dp, stats) = solve_with(&cfg, &problem, &nice, &SolveOptions::default()).unwrap();
        let oracle = brute_lospre_ordered(&cfg, &problem, &nice.forget_order()).unwrap();
        if dp.cost != oracle.cost || dp.life_set != oracle.life_set {
            bad.push(i);
        }
        let w = stats.width as f64;
        let ratio =
            stats.transitions as f64 / (w.max(1.0) * 2f64.powf(w) * stats.nice_nodes as f64);
        worst = worst.max(ratio);
        work_ok &= ratio <= WORK_K;
    }
    r.line(
        "optimality vs oracle",
        bad.is_empty(),
        format!(
            "{} instances, |V| <= 12, {} mismatches {:?}",
            OPTIMALITY_INSTANCES,
            bad.len(),
            bad
        ),
        started,
    );
    r.line(
        "work bound",
        work_ok,
        format!("max transitions / (max(w,1) 2^w |nice|) = {worst:.3}, K = {WORK_K}"),
        started,
    );
}

/// Minimum computation count, then minimum life-set size among count-minimal
/// life sets, by enumeration.
fn count_minima(cfg: &Cfg, problem: &ExprProblem) -> (usize, usize) {
    let n = cfg.node_count();
    let mut best = (usize::MAX, usize::MAX);
    for mask in 0u32..(1 << n) {
        let life: NodeSet = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let calcs = calc_set(cfg, problem, &life).unwrap().len();
        best = best.min((calcs, life.len()));
    }
    best
}

fn lifetime_optimality(r: &mut Report) {
    let started = Instant::now();
    let mut bad = Vec::new();
    for (i, (cfg, problem)) in suite(OPTIMALITY_INSTANCES, 12, 0).enumerate() {
        let cfg = unit_costs(&cfg);
        let (dp, _) = solve_with(&cfg, &problem, &nice_of(&cfg), &SolveOptions::default()).unwrap();
        if (dp.calc_set.len(), dp.life_set.len()) != count_minima(&cfg, &problem) {
            bad.push(i);
        }
    }
    r.line(
        "lifetime optimality",
        bad.is_empty(),
        format!(
            "{} unit-cost instances, {} mismatches {:?}",
            OPTIMALITY_INSTANCES,
            bad.len(),
            bad
        ),
        started,
    );
}

fn safety(r: &mut Report) {
    let started = Instant::now();
    let (mut bad, mut not_idempotent) = (Vec::new(), Vec::new());
    for (i, (cfg, problem)) in suite(SAFETY_INSTANCES, 10, 100_000).enumerate() {
        let nice = nice_of(&cfg);
        let (dp, _) = solve_safety_with(&cfg, &problem, &nice, &SolveOptions::default()).unwrap();
        if dp.i_prime != brute_safety(&cfg, &problem).unwrap().i_prime {
            bad.push(i);
        }
        let again = solve_safety_with(
            &cfg,
            &apply_safety(&problem, &dp),
            &nice,
            &SolveOptions::default(),
        )
        .unwrap()
        .0;
        if !again.added.is_empty() {
            not_idempotent.push(i);
        }
    }
    r.line(
        "safety equivalence",
        bad.is_empty() && not_idempotent.is_empty(),
        format!(
            "{} instances, |V| <= 10, {} mismatches {:?}, {} not idempotent {:?}",
            SAFETY_INSTANCES,
            bad.len(),
            bad,
            not_idempotent.len(),
            not_idempotent
        ),
        started,
    );
}

fn extended(r: &mut Report) {
    let started = Instant::now();
    let mut bad = Vec::new();
    for (i, (cfg, problem)) in suite(EXTENDED_INSTANCES, 8, 200_000).enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(300_000 + i as u64);
        let table: Vec<[CostVec; 8]> = cfg
            .nodes()
            .map(|_| {
                std::array::from_fn(|_| CostVec::new(rng.gen_range(-2..=3), rng.gen_range(-2..=3)))
            })
            .collect();
        let cost = |v: usize, l: bool, a: bool, b: bool| {
            table[v][l as usize | (a as usize) << 1 | (b as usize) << 2]
        };
        let dp = solve_extended_with(
            &cfg,
            &problem,
            &nice_of(&cfg),
            cost,
            &SolveOptions::default(),
        )
        .unwrap()
        .0;
        let oracle = brute_extended(&cfg, &problem, cost).unwrap();
        if dp.cost != oracle.cost {
            bad.push(i);
        }
    }
    r.line(
        "extended variant",
        bad.is_empty(),
        format!(
            "{} instances, |V| <= 8, {} mismatches {:?}",
            EXTENDED_INSTANCES,
            bad.len(),
            bad
        ),
        started,
    );
}

fn decomposition(r: &mut Report) {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut check = |label: String, cfg: &Cfg, max_width: Option<usize>| {
        checked += 1;
        let td = decompose(cfg);
        let nice = make_nice(cfg, &td).expect("valid");
        let ok = validate(cfg, &td).is_ok()
            && validate_nice(cfg, &nice).is_ok()
            && nice.width() == td.width()
            && max_width.is_none_or(|m| td.width() <= m);
        if !ok {
            failures.push(label);
        }
    };
    for (i, (cfg, _)) in suite(OPTIMALITY_INSTANCES, 12, 0).enumerate() {
        check(format!("suite {i}"), &cfg, None);
    }
    for seed in 0..300 {
        let sp = InstanceGenerator::new(seed, Style::SeriesParallel, 2..=40).with_density(0.0);
        check(format!("series-parallel {seed}"), &generate(&sp).0, Some(2));
        let chain = InstanceGenerator::new(seed, Style::ChainedDiamonds, 4..=200).with_density(0.5);
        check(format!("diamonds {seed}"), &generate(&chain).0, Some(2));
    }
    let clique =
        Cfg::with_default_costs(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
    let path = Cfg::with_default_costs(6, (0..5).map(|v| (v, v + 1))).unwrap();
    let (wc, wp) = (decompose(&clique).width(), decompose(&path).width());
    check("clique".into(), &clique, None);
    check("path".into(), &path, None);
    let ok = failures.is_empty() && wc == 3 && wp == 1;
    r.line(
        "decomposition validity and width",
        ok,
        format!("{checked} graphs, failures {failures:?}, clique-4 width {wc}, path width {wp}"),
        started,
    );
}

fn scaling(r: &mut Report) {
    let started = Instant::now();
    let report = measure_chain(&SCALING_SIZES, 3).unwrap();
    let slope = report.slope().unwrap_or(f64::INFINITY);
    let last = report.points.last().expect("points").elapsed;
    let times: Vec<String> = report
        .points
        .iter()
        .map(|p| format!("{}:{:.1?}", p.nodes, p.elapsed))
        .collect();
    r.line(
        "linear scaling",
        slope <= MAX_SLOPE && last < MAX_TIME_AT_64K,
        format!(
            "slope {slope:.3} (max {MAX_SLOPE}), times {}",
            times.join(" ")
        ),
        started,
    );
}

fn array_branch(r: &mut Report) {
    let started = Instant::now();
    let original = parse_ir(ARRAY_BRANCH).unwrap();
    let result = optimize(&original, &PipelineConfig::default()).unwrap();
    let text = result.program.to_string();
    let branch = text.find("if b goto").expect("branch kept");
    let once_before = ["= i << 2", "+ a", "= *"].iter().all(|needle| {
        text.matches(needle).count() == 1 && text.find(needle).is_some_and(|at| at < branch)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut differing = 0;
    for _ in 0..ARRAY_BRANCH_INPUTS {
        let vars = [
            ("b", rng.gen_range(0..=1)),
            ("i", rng.gen_range(-1_000..=1_000)),
            ("a", rng.gen_range(-1_000..=1_000)),
            ("c", rng.gen_range(-1_000..=1_000)),
        ];
        let memory: Vec<i64> = (0..64).map(|_| rng.gen()).collect();
        let start = Machine::new(vars.map(|(k, v)| (k.to_string(), v)), memory);
        let before = interpret(&original, start.clone(), STEP_LIMIT);
        let after = interpret(&result.program, start, STEP_LIMIT);
        if !before.equivalent(&after) {
            differing += 1;
        }
    }
    r.line(
        "array branch end to end",
        once_before && differing == 0 && result.elimination().total() == 3,
        format!(
            "computed once before the branch: {once_before}, eliminated {}, {differing}/{ARRAY_BRANCH_INPUTS} inputs differ",
            result.elimination().total()
        ),
        started,
    );
}

fn semantics(r: &mut Report) {
    let started = Instant::now();
    let (mut differing, mut rewritten) = (Vec::new(), 0);
    for seed in 0..PROGRAMS {
        let gen = ProgramGenerator::new(seed);
        let program = generate_program(&gen);
        let result = optimize(&program, &PipelineConfig::default()).unwrap();
        rewritten += usize::from(!result.passes.is_empty());
        for input in 0..INPUTS_PER_PROGRAM {
            let start = gen.input(&program, input);
            let before = interpret(&program, start.clone(), STEP_LIMIT);
            let after = interpret(&result.program, start, STEP_LIMIT);
            if !before.equivalent(&after) {
                differing.push((seed, input));
            }
        }
    }
    r.line(
        "semantics preservation",
        differing.is_empty(),
        format!(
            "{PROGRAMS} programs ({rewritten} rewritten) x {INPUTS_PER_PROGRAM} inputs, {} differ {:?}",
            differing.len(),
            differing.iter().take(10).collect::<Vec<_>>()
        ),
        started,
    );
}

fn main() -> ExitCode {
    let mut r = Report { failures: 0 };
    optimality(&mut r);
    lifetime_optimality(&mut r);
    safety(&mut r);
    extended(&mut r);
    decomposition(&mut r);
    scaling(&mut r);
    array_branch(&mut r);
    semantics(&mut r);
    if r.failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{} criteria failed", r.failures);
        ExitCode::FAILURE
    }
}
