//! Enlarging the invalidation set so that lospre never computes the
//! expression on operand values the original program would not have used.
//!
//! A node `v ∉ U ∪ I` must join the invalidation set when some path runs from
//! a node of `I` through `v` to a node of `I ∖ U`, with no node of `U` strictly
//! inside. The start may be a use (it computes and then invalidates); the end
//! may not (it computes on exactly the operands that reach it).
//!
//! [`solve_safety`] finds that set with a DP on the nice decomposition whose
//! two bits per node are "reached forwards from I without passing U" and
//! "reaches I ∖ U backwards without passing U". Every edge forces implications
//! between these bits, so the cheapest consistent assignment (one unit per set
//! bit) is the least fixed point, which is the exact reachability relation.
//!
//! [`solve_safety_local`] is the formulation with purely local conditions: an
//! added node needs a successor in `added ∪ (I ∖ U)` and a predecessor in
//! `added ∪ I`, and every added node earns −1. It picks the largest such set,
//! which agrees with [`solve_safety`] on acyclic graphs but may also keep
//! cycles that are entered only through uses.

use crate::cfg::{Cfg, ExprProblem, Membership, NodeId, NodeSet};
use crate::cost::CostVec;
use crate::dp::engine::{self, BagProblem, Charge};
use crate::dp::{DpError, DpStats, SolveOptions};
use crate::treedec::NiceTreeDec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetySolution {
    pub i_prime: NodeSet,
    pub added: NodeSet,
}

const FWD: u32 = 1;
const BWD: u32 = 2;

struct Closure {
    m: Membership,
    edges: Vec<(NodeId, NodeId)>,
}

impl BagProblem for Closure {
    const BITS: u32 = 2;

    fn forget(&self, _v: NodeId, slot: usize, states: &mut [u32], charges: &[Charge]) -> CostVec {
        for ch in charges {
            let (x, y) = self.edges[ch.edge];
            let (sx, sy) = (states[ch.from_slot], states[ch.to_slot]);
            let m = &self.m;
            if !m.uses[y] && (m.invalid[x] || sx & FWD != 0) && sy & FWD == 0 {
                return CostVec::Infinity;
            }
            let ends_here = m.invalid[y] && !m.uses[y];
            if !m.uses[x] && (ends_here || sy & BWD != 0) && sx & BWD == 0 {
                return CostVec::Infinity;
            }
        }
        CostVec::primary_only(states[slot].count_ones() as i64)
    }
}

fn finish(problem: &ExprProblem, added: NodeSet) -> SafetySolution {
    let mut i_prime = problem.invalidation_set().clone();
    i_prime.extend(added.iter().copied());
    SafetySolution { i_prime, added }
}

pub fn solve_safety(
    cfg: &Cfg,
    problem: &ExprProblem,
    nice: &NiceTreeDec,
) -> Result<SafetySolution, DpError> {
    solve_safety_with(cfg, problem, nice, &SolveOptions::default()).map(|(s, _)| s)
}

pub fn solve_safety_with(
    cfg: &Cfg,
    problem: &ExprProblem,
    nice: &NiceTreeDec,
    options: &SolveOptions,
) -> Result<(SafetySolution, DpStats), DpError> {
    let dp = Closure {
        m: membership_checked(cfg, problem)?,
        edges: cfg.edges().to_vec(),
    };
    let run = engine::run(cfg, nice, &dp, options)?;
    let added = cfg
        .nodes()
        .filter(|&v| run.states[v] == FWD | BWD && !dp.m.invalid[v])
        .collect();
    Ok((finish(problem, added), run.stats))
}

fn membership_checked(cfg: &Cfg, problem: &ExprProblem) -> Result<Membership, DpError> {
    let count = cfg.node_count();
    if let Some(&node) = problem
        .use_set()
        .iter()
        .chain(problem.invalidation_set())
        .find(|&&v| v >= count)
    {
        return Err(DpError::ProblemMismatch { node, count });
    }
    Ok(problem.membership(cfg))
}

/// States: 0 = not added; otherwise `1 + has_pred + 2 * has_succ`, where the
/// flags record whether a qualifying neighbour has been seen so far.
struct Local {
    m: Membership,
    edges: Vec<(NodeId, NodeId)>,
}

const HAS_PRED: u32 = 1;
const HAS_SUCC: u32 = 2;

impl BagProblem for Local {
    const BITS: u32 = 3;
    const EXACT_JOIN: bool = false;

    fn introduce_ok(&self, v: NodeId, state: u32) -> bool {
        state == 0 || (state == 1 && !self.m.uses[v] && !self.m.invalid[v])
    }

    fn forget(&self, _v: NodeId, slot: usize, states: &mut [u32], charges: &[Charge]) -> CostVec {
        let m = &self.m;
        for ch in charges {
            let (x, y) = self.edges[ch.edge];
            let (sx, sy) = (states[ch.from_slot], states[ch.to_slot]);
            if sx != 0 && (sy != 0 || (m.invalid[y] && !m.uses[y])) {
                states[ch.from_slot] = ((sx - 1) | HAS_SUCC) + 1;
            }
            // Re-read: a self-loop updates the same slot twice.
            let sy = states[ch.to_slot];
            if sy != 0 && (sx != 0 || m.invalid[x]) {
                states[ch.to_slot] = ((sy - 1) | HAS_PRED) + 1;
            }
        }
        match states[slot] {
            0 => CostVec::ZERO,
            s if (s - 1) == HAS_PRED | HAS_SUCC => CostVec::primary_only(-1),
            _ => CostVec::Infinity,
        }
    }

    fn join(&self, a: u32, b: u32) -> Option<u32> {
        match (a, b) {
            (0, 0) => Some(0),
            (0, _) | (_, 0) => None,
            _ => Some(((a - 1) | (b - 1)) + 1),
        }
    }
}

/// The local-condition DP described in the module docs.
pub fn solve_safety_local(
    cfg: &Cfg,
    problem: &ExprProblem,
    nice: &NiceTreeDec,
) -> Result<SafetySolution, DpError> {
    let dp = Local {
        m: membership_checked(cfg, problem)?,
        edges: cfg.edges().to_vec(),
    };
    let run = engine::run(cfg, nice, &dp, &SolveOptions::default())?;
    let added = cfg.nodes().filter(|&v| run.states[v] != 0).collect();
    Ok(finish(problem, added))
}

/// The same problem with the enlarged invalidation set.
pub fn apply_safety(problem: &ExprProblem, solution: &SafetySolution) -> ExprProblem {
    problem.with_invalidation_set(solution.i_prime.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::solve;
    use crate::treedec::{decompose, make_nice};

    fn nice_of(cfg: &Cfg) -> NiceTreeDec {
        make_nice(cfg, &decompose(cfg)).unwrap()
    }

    fn line() -> Cfg {
        Cfg::with_default_costs(4, [(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    #[test]
    fn straight_line_without_uses() {
        let g = line();
        let p = ExprProblem::new(&g, [], []).unwrap();
        let s = solve_safety(&g, &p, &nice_of(&g)).unwrap();
        assert_eq!(s.added, NodeSet::from([1, 2]));
        assert_eq!(s.i_prime, NodeSet::from([0, 1, 2, 3]));
        assert_eq!(solve_safety_local(&g, &p, &nice_of(&g)).unwrap(), s);
    }

    #[test]
    fn use_blocks_paths() {
        let g = line();
        let p = ExprProblem::new(&g, [1], []).unwrap();
        let s = solve_safety(&g, &p, &nice_of(&g)).unwrap();
        assert!(s.added.is_empty());
        assert_eq!(s.i_prime, *p.invalidation_set());
    }

    #[test]
    fn enlarged_set_keeps_computation_in_place() {
        // Loop 1 <-> 2 with a use at 2 and a zero-trip exit 1 -> 3. The hot
        // edge (1,2) makes hoisting to (0,1) attractive, but it is speculative.
        let unit = CostVec::new(1, 0);
        let g = Cfg::new(
            vec![CostVec::new(0, 1); 4],
            [
                (0, 1, unit),
                (1, 2, CostVec::new(10, 0)),
                (2, 1, unit),
                (1, 3, unit),
            ],
        )
        .unwrap();
        let p = ExprProblem::new(&g, [2], []).unwrap();
        let nice = nice_of(&g);
        let hoisted = solve(&g, &p, &nice).unwrap();
        assert_eq!(hoisted.calc_set.edges, [(0, 1)].into_iter().collect());

        let safety = solve_safety(&g, &p, &nice).unwrap();
        assert_eq!(safety.added, NodeSet::from([1]));
        let s = solve(&g, &apply_safety(&p, &safety), &nice).unwrap();
        assert_eq!(s.calc_set.edges, [(1, 2)].into_iter().collect());
        assert!(s.life_set.is_empty());
    }

    #[test]
    fn idempotent() {
        let g =
            Cfg::with_default_costs(6, [(0, 1), (1, 2), (1, 3), (2, 4), (3, 4), (4, 1), (4, 5)])
                .unwrap();
        let p = ExprProblem::new(&g, [2], []).unwrap();
        let nice = nice_of(&g);
        let first = solve_safety(&g, &p, &nice).unwrap();
        let again = solve_safety(&g, &apply_safety(&p, &first), &nice).unwrap();
        assert!(again.added.is_empty());
        assert_eq!(again.i_prime, first.i_prime);
    }

    #[test]
    fn local_conditions_keep_cycles_entered_through_uses() {
        // 0 -> 1(use) -> 2 <-> 3 -> 4: no path from I reaches 2 or 3 without
        // passing the use, yet each has a neighbour satisfying the local test.
        let g = Cfg::with_default_costs(5, [(0, 1), (1, 2), (2, 3), (3, 2), (3, 4)]).unwrap();
        let p = ExprProblem::new(&g, [1], []).unwrap();
        let nice = nice_of(&g);
        assert!(solve_safety(&g, &p, &nice).unwrap().added.is_empty());
        assert_eq!(
            solve_safety_local(&g, &p, &nice).unwrap().added,
            NodeSet::from([2, 3])
        );
    }
}
