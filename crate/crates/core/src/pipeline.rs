//! The optimization loop over a whole program: derive one problem per
//! expression, solve it, rewrite, and repeat until nothing improves.

use std::collections::HashSet;

use crate::cfg::{total_cost, ExprProblem, NodeSet};
use crate::dp::{
    solve_with, CandidateCount, DpError, DpStats, EliminationStats, LospreSolution, SolveOptions,
};
use crate::ir::{
    build_cfg, derive_problems, propagate_copies, rewrite_traced, transfer_costs, Directive,
    ExprKey, IrCfg, Program,
};
use crate::oracle::{brute_lospre_ordered, MAX_LOSPRE_NODES};
use crate::safety::{apply_safety, solve_safety_with};
use crate::treedec::{decompose, make_nice, NiceTreeDec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Goal {
    /// Unit costs: every computation counts once, every live node once.
    #[default]
    Size,
    /// Costs from the program's `!edgecost`/`!nodecost` directives.
    Speed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SafetyPolicy {
    /// Only for expressions that can fault (loads and divisions).
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub goal: Goal,
    pub safety: SafetyPolicy,
    pub max_width: usize,
    pub copy_propagation: bool,
    /// Check every solution against exhaustive search on graphs of at most
    /// this many nodes.
    pub verify_up_to: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            goal: Goal::Size,
            safety: SafetyPolicy::Auto,
            max_width: crate::dp::DEFAULT_MAX_WIDTH,
            copy_propagation: true,
            verify_up_to: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Build(#[from] crate::ir::BuildError),
    #[error(transparent)]
    Rewrite(#[from] crate::ir::RewriteError),
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error("goal `speed` needs `!edgecost` directives giving edge weights")]
    MissingWeights,
}

/// One rewritten expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassRecord {
    pub expression: String,
    pub problem: ExprProblem,
    pub solution: LospreSolution,
    /// Nodes added to the invalidation set by the safety pass.
    pub safety_added: NodeSet,
    pub stats: DpStats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub expression: String,
    pub dp: LospreSolution,
    pub oracle: LospreSolution,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PipelineResult {
    pub program: Program,
    pub passes: Vec<PassRecord>,
    pub warnings: Vec<String>,
    /// Problems checked against exhaustive search, and those that disagreed.
    pub verified: usize,
    pub mismatches: Vec<Mismatch>,
    pub max_width: usize,
}

impl PipelineResult {
    pub fn elimination(&self) -> EliminationStats {
        EliminationStats {
            candidates: self
                .passes
                .iter()
                .map(|p| CandidateCount {
                    name: p.expression.clone(),
                    uses: p.problem.use_set().len(),
                    calcs: p.solution.calc_set.len(),
                })
                .collect(),
        }
    }
}

fn needs_safety(policy: SafetyPolicy, key: &ExprKey) -> bool {
    match policy {
        SafetyPolicy::Auto => key.safety_required(),
        SafetyPolicy::Always => true,
        SafetyPolicy::Never => false,
    }
}

/// Rewrites one expression at a time, in order of first occurrence, whenever
/// its optimum beats leaving it in place. Each expression is solved once; the
/// temporaries and copies a rewrite introduces create new expressions, which
/// later rounds pick up. Stops when a round rewrites nothing.
pub fn optimize(
    program: &Program,
    config: &PipelineConfig,
) -> Result<PipelineResult, PipelineError> {
    let mut current = program.clone();
    match config.goal {
        Goal::Size => current.directives.clear(),
        Goal::Speed => {
            if !current.directives.iter().any(|d| {
                matches!(
                    d,
                    Directive::EdgeCost { .. } | Directive::DefaultEdgeCost(_)
                )
            }) {
                return Err(PipelineError::MissingWeights);
            }
        }
    }
    let options = SolveOptions {
        max_width: config.max_width,
    };
    let mut result = PipelineResult::default();
    let mut ir: IrCfg = build_cfg(&current)?;
    result.warnings = ir.warnings.clone();
    // Rewrites split edges, so label-anchored costs are carried over by
    // `transfer_costs` from here on.
    current.directives.retain(|d| {
        matches!(
            d,
            Directive::DefaultEdgeCost(_) | Directive::DefaultNodeCost(_)
        )
    });
    let mut processed: HashSet<ExprKey> = HashSet::new();
    // Every round either rewrites or stops; each rewrite retires one key.
    let rounds = program.len() * 4 + 1;
    for _ in 0..rounds {
        let nice: NiceTreeDec = make_nice(&ir.cfg, &decompose(&ir.cfg))
            .map_err(|e| DpError::DecompositionMismatch(e.0))?;
        if nice.width() > config.max_width {
            return Err(DpError::WidthExceeded {
                width: nice.width(),
                max: config.max_width,
            }
            .into());
        }
        result.max_width = result.max_width.max(nice.width());

        let mut changed = false;
        for (candidate, base) in derive_problems(&current, &ir) {
            if !processed.insert(candidate.key.clone()) {
                continue;
            }
            let (problem, safety_added) = if needs_safety(config.safety, &candidate.key) {
                let (s, _) = solve_safety_with(&ir.cfg, &base, &nice, &options)?;
                (apply_safety(&base, &s), s.added)
            } else {
                (base, NodeSet::new())
            };
            let (solution, stats) = solve_with(&ir.cfg, &problem, &nice, &options)?;
            if config
                .verify_up_to
                .is_some_and(|limit| ir.cfg.node_count() <= limit.min(MAX_LOSPRE_NODES))
            {
                let oracle = brute_lospre_ordered(&ir.cfg, &problem, &nice.forget_order())
                    .expect("graph within the oracle limit");
                result.verified += 1;
                if oracle.cost != solution.cost || oracle.life_set != solution.life_set {
                    result.mismatches.push(Mismatch {
                        expression: candidate.key.to_string(),
                        dp: solution.clone(),
                        oracle,
                    });
                }
            }
            let in_place = total_cost(&ir.cfg, &problem, &NodeSet::new()).expect("empty life set");
            if solution.cost >= in_place {
                continue;
            }
            let (mut next, origins) = rewrite_traced(&current, &ir, &candidate, &solution)?;
            if config.copy_propagation {
                next = propagate_copies(&next);
            }
            let next_ir = build_cfg(&next)?;
            ir = IrCfg {
                cfg: transfer_costs(&ir, &origins, &next_ir),
                ..next_ir
            };
            current = next;
            result.passes.push(PassRecord {
                expression: candidate.key.to_string(),
                problem,
                solution,
                safety_added,
                stats,
            });
            changed = true;
            break;
        }
        if !changed {
            break;
        }
    }
    result.program = current;
    Ok(result)
}
