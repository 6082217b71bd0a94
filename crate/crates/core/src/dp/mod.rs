//! The lospre dynamic program over a nice tree-decomposition, its extended
//! variant with operand lifetimes, and solution bookkeeping.
//!
//! Ties between equally cheap assignments are broken towards "dead" (bit 0)
//! for the vertex forgotten highest in the decomposition, then the next one
//! in [`NiceTreeDec::forget_order`], and so on. The brute-force oracle accepts
//! the same order so that whole solutions, not just costs, can be compared.

pub(crate) mod engine;
mod solution;

use std::collections::BTreeMap;

use crate::cfg::{calc_set, CalcSet, Cfg, ExprProblem, Membership, NodeId, NodeSet};
use crate::cost::CostVec;
use crate::treedec::{NiceTreeDec, Violation};

use engine::{BagProblem, Charge};

pub use solution::{parse_solution, write_solution, SolutionParseError};

/// Default `--max-width`; tables hold `2^(bits·(width+1))` entries.
pub const DEFAULT_MAX_WIDTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub max_width: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_width: DEFAULT_MAX_WIDTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DpError {
    #[error("decomposition does not match the graph: {0}")]
    DecompositionMismatch(Violation),
    #[error("problem refers to node {node}, graph has {count} nodes")]
    ProblemMismatch { node: NodeId, count: usize },
    #[error("decomposition width {width} exceeds the limit {max}")]
    WidthExceeded { width: usize, max: usize },
    #[error("width {width} with {bits_per_node} bits per node needs too large a table")]
    TableTooLarge { width: usize, bits_per_node: u32 },
    #[error("no feasible solution (optimal cost is infinite)")]
    Infeasible,
}

/// Instrumentation of one DP run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpStats {
    /// Table entries written plus, at forget nodes, one per charged edge per entry.
    pub transitions: u64,
    /// How many forget nodes charged each edge (by edge index).
    pub edge_charges: Vec<u32>,
    pub width: usize,
    pub nice_nodes: usize,
}

/// Operand life sets of the extended variant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OperandLife {
    pub left: NodeSet,
    pub right: NodeSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LospreSolution {
    pub life_set: NodeSet,
    pub calc_set: CalcSet,
    pub cost: CostVec,
    pub extended: Option<OperandLife>,
}

impl LospreSolution {
    /// Builds a solution from a life set, deriving the calculation set.
    pub fn from_life(
        cfg: &Cfg,
        problem: &ExprProblem,
        life_set: NodeSet,
        cost: CostVec,
    ) -> LospreSolution {
        let calc_set = calc_set(cfg, problem, &life_set).expect("life set within graph");
        LospreSolution {
            life_set,
            calc_set,
            cost,
            extended: None,
        }
    }
}

fn check_problem(cfg: &Cfg, problem: &ExprProblem) -> Result<(), DpError> {
    let count = cfg.node_count();
    let bad = problem
        .use_set()
        .iter()
        .chain(problem.invalidation_set())
        .find(|&&v| v >= count);
    match bad {
        Some(&node) => Err(DpError::ProblemMismatch { node, count }),
        None => Ok(()),
    }
}

struct Lospre<'a> {
    cfg: &'a Cfg,
    m: Membership,
}

impl Lospre<'_> {
    #[inline]
    fn edge_term(&self, states: &[u32], charges: &[Charge], live: impl Fn(u32) -> bool) -> CostVec {
        let mut cost = CostVec::ZERO;
        for ch in charges {
            let (x, y) = self.cfg.edges()[ch.edge];
            if self
                .m
                .needs_calc(x, live(states[ch.from_slot]), y, live(states[ch.to_slot]))
            {
                cost += self.cfg.edge_cost(ch.edge);
            }
        }
        cost
    }
}

impl BagProblem for Lospre<'_> {
    const BITS: u32 = 1;

    fn forget(&self, v: NodeId, slot: usize, states: &mut [u32], charges: &[Charge]) -> CostVec {
        let node = if states[slot] == 1 {
            self.cfg.node_cost(v)
        } else {
            CostVec::ZERO
        };
        node + self.edge_term(states, charges, |s| s == 1)
    }
}

/// Solves one lospre instance exactly with the default width guard.
pub fn solve(
    cfg: &Cfg,
    problem: &ExprProblem,
    nice: &NiceTreeDec,
) -> Result<LospreSolution, DpError> {
    solve_with(cfg, problem, nice, &SolveOptions::default()).map(|(s, _)| s)
}

/// Like [`solve`], also returning instrumentation.
pub fn solve_with(
    cfg: &Cfg,
    problem: &ExprProblem,
    nice: &NiceTreeDec,
    options: &SolveOptions,
) -> Result<(LospreSolution, DpStats), DpError> {
    check_problem(cfg, problem)?;
    let dp = Lospre {
        cfg,
        m: problem.membership(cfg),
    };
    let run = engine::run(cfg, nice, &dp, options)?;
    let life: NodeSet = cfg.nodes().filter(|&v| run.states[v] == 1).collect();
    let solution = LospreSolution::from_life(cfg, problem, life, run.root_cost);
    Ok((solution, run.stats))
}

/// Per-node lifetime costs of the extended variant, indexed by
/// `life | left << 1 | right << 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LifetimeTable {
    pub costs: Vec<[CostVec; 8]>,
}

impl LifetimeTable {
    pub fn from_fn(
        node_count: usize,
        f: impl Fn(NodeId, bool, bool, bool) -> CostVec,
    ) -> LifetimeTable {
        let costs = (0..node_count)
            .map(|v| std::array::from_fn(|s| f(v, s & 1 != 0, s & 2 != 0, s & 4 != 0)))
            .collect();
        LifetimeTable { costs }
    }

    pub fn get(&self, v: NodeId, life: bool, left: bool, right: bool) -> CostVec {
        self.costs[v][life as usize | (left as usize) << 1 | (right as usize) << 2]
    }
}

struct Extended<'a> {
    base: Lospre<'a>,
    table: LifetimeTable,
}

impl BagProblem for Extended<'_> {
    const BITS: u32 = 3;

    fn forget(&self, v: NodeId, slot: usize, states: &mut [u32], charges: &[Charge]) -> CostVec {
        self.table.costs[v][states[slot] as usize]
            + self.base.edge_term(states, charges, |s| s & 1 == 1)
    }
}

/// Minimizes calculation-edge costs plus `lifetime_cost(v, life, left, right)`
/// over all nodes, where `left`/`right` say whether the operands are live.
/// Combinations that must not occur can be priced at [`CostVec::Infinity`].
pub fn solve_extended(
    cfg: &Cfg,
    problem: &ExprProblem,
    nice: &NiceTreeDec,
    lifetime_cost: impl Fn(NodeId, bool, bool, bool) -> CostVec,
) -> Result<LospreSolution, DpError> {
    solve_extended_with(cfg, problem, nice, lifetime_cost, &SolveOptions::default()).map(|(s, _)| s)
}

pub fn solve_extended_with(
    cfg: &Cfg,
    problem: &ExprProblem,
    nice: &NiceTreeDec,
    lifetime_cost: impl Fn(NodeId, bool, bool, bool) -> CostVec,
    options: &SolveOptions,
) -> Result<(LospreSolution, DpStats), DpError> {
    check_problem(cfg, problem)?;
    let dp = Extended {
        base: Lospre {
            cfg,
            m: problem.membership(cfg),
        },
        table: LifetimeTable::from_fn(cfg.node_count(), lifetime_cost),
    };
    let run = engine::run(cfg, nice, &dp, options)?;
    let pick =
        |bit: u32| -> NodeSet { cfg.nodes().filter(|&v| run.states[v] & bit != 0).collect() };
    let mut solution = LospreSolution::from_life(cfg, problem, pick(1), run.root_cost);
    solution.extended = Some(OperandLife {
        left: pick(2),
        right: pick(4),
    });
    Ok((solution, run.stats))
}

/// Static computation counts before and after one candidate's rewrite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateCount {
    pub name: String,
    pub uses: usize,
    pub calcs: usize,
}

impl CandidateCount {
    pub fn eliminated(&self) -> i64 {
        self.uses as i64 - self.calcs as i64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EliminationStats {
    pub candidates: Vec<CandidateCount>,
}

impl EliminationStats {
    pub fn total(&self) -> i64 {
        self.candidates.iter().map(CandidateCount::eliminated).sum()
    }

    /// Totals per candidate name, in name order.
    pub fn by_name(&self) -> BTreeMap<&str, i64> {
        let mut map = BTreeMap::new();
        for c in &self.candidates {
            *map.entry(c.name.as_str()).or_insert(0) += c.eliminated();
        }
        map
    }
}

/// `|U| - |C|` per candidate and in total.
pub fn eliminated_count<'a>(
    solved: impl IntoIterator<Item = (String, &'a ExprProblem, &'a LospreSolution)>,
) -> EliminationStats {
    EliminationStats {
        candidates: solved
            .into_iter()
            .map(|(name, problem, solution)| CandidateCount {
                name,
                uses: problem.use_set().len(),
                calcs: solution.calc_set.len(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::total_cost;
    use crate::treedec::{decompose, make_nice};

    fn nice_of(cfg: &Cfg) -> NiceTreeDec {
        make_nice(cfg, &decompose(cfg)).unwrap()
    }

    fn diamond() -> Cfg {
        Cfg::with_default_costs(5, [(0, 1), (1, 2), (1, 3), (2, 4), (3, 4)]).unwrap()
    }

    #[test]
    fn empty_use_set() {
        let g = diamond();
        let p = ExprProblem::new(&g, [], []).unwrap();
        let s = solve(&g, &p, &nice_of(&g)).unwrap();
        assert!(s.life_set.is_empty());
        assert!(s.calc_set.is_empty());
        assert_eq!(s.cost, CostVec::ZERO);
    }

    #[test]
    fn diamond_hoists_above_branch() {
        let g = diamond();
        let p = ExprProblem::new(&g, [2, 3], []).unwrap();
        let s = solve(&g, &p, &nice_of(&g)).unwrap();
        assert_eq!(s.life_set, NodeSet::from([1]));
        assert_eq!(s.calc_set.edges, [(0, 1)].into_iter().collect());
        assert_eq!(s.cost, CostVec::new(1, 1));
        assert_eq!(total_cost(&g, &p, &s.life_set).unwrap(), s.cost);
    }

    #[test]
    fn invalidated_predecessor_pins_computation() {
        // 0 -> 1 -> 2 -> 3, node 1 assigns an operand, node 2 uses it.
        let g = Cfg::with_default_costs(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let p = ExprProblem::new(&g, [2], [1]).unwrap();
        let s = solve(&g, &p, &nice_of(&g)).unwrap();
        assert!(s.life_set.is_empty());
        assert_eq!(s.calc_set.edges, [(1, 2)].into_iter().collect());
        assert_eq!(s.cost, CostVec::new(1, 0));
    }

    #[test]
    fn every_edge_charged_once() {
        let g = Cfg::with_default_costs(
            6,
            [
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 1),
                (1, 4),
                (4, 5),
                (3, 5),
                (2, 2),
            ],
        )
        .unwrap();
        let p = ExprProblem::new(&g, [2, 4], [3]).unwrap();
        let (_, stats) = solve_with(&g, &p, &nice_of(&g), &SolveOptions::default()).unwrap();
        assert!(
            stats.edge_charges.iter().all(|&c| c == 1),
            "{:?}",
            stats.edge_charges
        );
    }

    #[test]
    fn width_guard() {
        let mut edges = vec![(0, 1)];
        for a in 1..6 {
            for b in 1..6 {
                if a != b {
                    edges.push((a, b));
                }
            }
        }
        let g = Cfg::with_default_costs(6, edges).unwrap();
        let p = ExprProblem::new(&g, [3], []).unwrap();
        let err = solve_with(&g, &p, &nice_of(&g), &SolveOptions { max_width: 2 }).unwrap_err();
        assert_eq!(err, DpError::WidthExceeded { width: 4, max: 2 });
    }

    #[test]
    fn mismatched_decomposition_is_rejected() {
        let g = diamond();
        let other = Cfg::with_default_costs(3, [(0, 1), (1, 2)]).unwrap();
        let p = ExprProblem::new(&g, [2], []).unwrap();
        assert!(matches!(
            solve(&g, &p, &nice_of(&other)),
            Err(DpError::DecompositionMismatch(_))
        ));
        let q = ExprProblem::new(&g, [4], []).unwrap();
        assert!(matches!(
            solve(&other, &q, &nice_of(&other)),
            Err(DpError::ProblemMismatch { node: 4, count: 3 })
        ));
    }

    #[test]
    fn infinite_costs_are_infeasible() {
        let g = Cfg::new(
            vec![CostVec::ZERO; 3],
            [(0, 1, CostVec::Infinity), (1, 2, CostVec::new(1, 0))],
        )
        .unwrap();
        let p = ExprProblem::new(&g, [1], []).unwrap();
        assert_eq!(solve(&g, &p, &nice_of(&g)), Err(DpError::Infeasible));
    }

    #[test]
    fn extended_reduces_to_base() {
        let g = diamond();
        let p = ExprProblem::new(&g, [2, 3], []).unwrap();
        let nice = nice_of(&g);
        let base = solve(&g, &p, &nice).unwrap();
        let ext = solve_extended(&g, &p, &nice, |_, b, _, _| CostVec::new(0, b as i64)).unwrap();
        assert_eq!(ext.life_set, base.life_set);
        assert_eq!(ext.cost, base.cost);
        let ops = ext.extended.unwrap();
        assert!(ops.left.is_empty() && ops.right.is_empty());

        let free = solve_extended(&g, &p, &nice, |_, _, _, _| CostVec::ZERO).unwrap();
        assert_eq!(free.cost.primary(), base.cost.primary());
    }

    #[test]
    fn extended_can_forbid_combinations() {
        let g = diamond();
        let p = ExprProblem::new(&g, [2, 3], []).unwrap();
        // Keeping the temporary alive at 1 is forbidden: both arms compute.
        let ext = solve_extended(&g, &p, &nice_of(&g), |v, b, _, _| {
            if v == 1 && b {
                CostVec::Infinity
            } else {
                CostVec::ZERO
            }
        })
        .unwrap();
        assert!(!ext.life_set.contains(&1));
        assert_eq!(ext.cost, CostVec::new(2, 0));
    }

    #[test]
    fn elimination_totals() {
        let g = diamond();
        let p = ExprProblem::new(&g, [2, 3], []).unwrap();
        let s = solve(&g, &p, &nice_of(&g)).unwrap();
        let stats = eliminated_count([("x".to_string(), &p, &s)]);
        assert_eq!(stats.total(), 1);
        assert_eq!(eliminated_count(Vec::new()).total(), 0);
    }
}
