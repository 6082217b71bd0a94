//! Exhaustive reference solvers and seeded random instances.
//!
//! The solvers here evaluate the objective through [`Membership::cost`] and
//! [`crate::cfg::calc_set`] only; none of them touches a tree-decomposition.

mod generate;
mod program;

use rayon::prelude::*;

use crate::cfg::{extended_total_cost, Cfg, ExprProblem, Membership, NodeId, NodeSet};
use crate::cost::CostVec;
use crate::dp::{LospreSolution, OperandLife};
use crate::safety::SafetySolution;

pub(crate) use generate::diamond_chain;
pub use generate::{generate, CostStyle, InstanceGenerator, Style};
pub use program::{generate_program, ProgramGenerator};

pub const MAX_LOSPRE_NODES: usize = 20;
pub const MAX_SAFETY_NODES: usize = 16;
pub const MAX_EXTENDED_NODES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{nodes} nodes exceed the oracle limit of {limit}")]
    TooLarge { nodes: usize, limit: usize },
    #[error("tie order must list every node exactly once")]
    BadTieOrder,
    #[error("every assignment has infinite cost")]
    Infeasible,
}

fn guard(cfg: &Cfg, limit: usize) -> Result<(), OracleError> {
    if cfg.node_count() > limit {
        return Err(OracleError::TooLarge {
            nodes: cfg.node_count(),
            limit,
        });
    }
    Ok(())
}

/// Bit position of every node: `order[0]` gets the most significant bit, so
/// ascending masks enumerate life sets lexicographically along `order`.
fn bit_positions(n: usize, order: &[NodeId]) -> Result<Vec<u32>, OracleError> {
    let mut pos = vec![u32::MAX; n];
    if order.len() != n {
        return Err(OracleError::BadTieOrder);
    }
    for (k, &v) in order.iter().enumerate() {
        if v >= n || pos[v] != u32::MAX {
            return Err(OracleError::BadTieOrder);
        }
        pos[v] = (n - 1 - k) as u32;
    }
    Ok(pos)
}

/// Minimum over all `2^|V|` life sets. Among optimal sets the one that is
/// lexicographically smallest along increasing node ids wins.
pub fn brute_lospre(cfg: &Cfg, problem: &ExprProblem) -> Result<LospreSolution, OracleError> {
    let order: Vec<NodeId> = cfg.nodes().collect();
    brute_lospre_ordered(cfg, problem, &order)
}

/// As [`brute_lospre`], breaking ties towards "dead" for `tie_order[0]`
/// first, then `tie_order[1]`, and so on.
pub fn brute_lospre_ordered(
    cfg: &Cfg,
    problem: &ExprProblem,
    tie_order: &[NodeId],
) -> Result<LospreSolution, OracleError> {
    guard(cfg, MAX_LOSPRE_NODES)?;
    let n = cfg.node_count();
    let pos = bit_positions(n, tie_order)?;
    let m: Membership = problem.membership(cfg);
    let mut life = vec![false; n];
    let mut best: Option<(CostVec, u32)> = None;
    for mask in 0u32..(1 << n) {
        for v in 0..n {
            life[v] = mask >> pos[v] & 1 == 1;
        }
        let cost = m.cost(cfg, &life);
        if best.is_none_or(|(b, _)| cost < b) {
            best = Some((cost, mask));
        }
    }
    let (cost, mask) = best.expect("at least one life set");
    if cost.is_infinite() {
        return Err(OracleError::Infeasible);
    }
    let life_set: NodeSet = (0..n).filter(|&v| mask >> pos[v] & 1 == 1).collect();
    Ok(LospreSolution::from_life(cfg, problem, life_set, cost))
}

/// Nodes outside `U ∪ I` lying on a path from `I` to `I ∖ U` whose interior
/// avoids `U`, found by plain forward and backward search.
pub fn brute_safety(cfg: &Cfg, problem: &ExprProblem) -> Result<SafetySolution, OracleError> {
    guard(cfg, MAX_SAFETY_NODES)?;
    let n = cfg.node_count();
    let uses = problem.use_set();
    let inval = problem.invalidation_set();

    let search = |starts: Vec<NodeId>, step: &dyn Fn(NodeId) -> Vec<NodeId>| -> Vec<bool> {
        let mut seen = vec![false; n];
        let mut stack = starts;
        while let Some(x) = stack.pop() {
            for y in step(x) {
                if !uses.contains(&y) && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    };
    let forward = search(inval.iter().copied().collect(), &|x| {
        cfg.successors(x).iter().map(|&(y, _)| y).collect()
    });
    let ends: Vec<NodeId> = inval
        .iter()
        .copied()
        .filter(|v| !uses.contains(v))
        .collect();
    let backward = search(ends, &|y| {
        cfg.predecessors(y).iter().map(|&(x, _)| x).collect()
    });

    let added: NodeSet = (0..n)
        .filter(|&v| forward[v] && backward[v] && !inval.contains(&v))
        .collect();
    let mut i_prime = inval.clone();
    i_prime.extend(added.iter().copied());
    Ok(SafetySolution { i_prime, added })
}

/// Minimum of the extended objective over all `8^|V|` assignments.
pub fn brute_extended(
    cfg: &Cfg,
    problem: &ExprProblem,
    lifetime_cost: impl Fn(NodeId, bool, bool, bool) -> CostVec + Sync,
) -> Result<LospreSolution, OracleError> {
    guard(cfg, MAX_EXTENDED_NODES)?;
    let n = cfg.node_count();
    let m = problem.membership(cfg);
    let table: Vec<[CostVec; 8]> = (0..n)
        .map(|v| std::array::from_fn(|s| lifetime_cost(v, s & 1 != 0, s & 2 != 0, s & 4 != 0)))
        .collect();

    // Outer loop over life sets, inner over both operand masks.
    let best = (0u32..(1 << n))
        .into_par_iter()
        .map(|life_mask| {
            let life: Vec<bool> = (0..n).map(|v| life_mask >> v & 1 == 1).collect();
            let edges: CostVec = m.calc_edges(cfg, &life).map(|e| cfg.edge_cost(e)).sum();
            let mut best = (CostVec::Infinity, life_mask, 0u32, 0u32, false);
            for left in 0u32..(1 << n) {
                for right in 0u32..(1 << n) {
                    let mut cost = edges;
                    for (v, row) in table.iter().enumerate() {
                        let s = (life_mask >> v & 1) | (left >> v & 1) << 1 | (right >> v & 1) << 2;
                        cost += row[s as usize];
                    }
                    if !best.4 || cost < best.0 {
                        best = (cost, life_mask, left, right, true);
                    }
                }
            }
            best
        })
        .reduce_with(|a, b| if b.0 < a.0 { b } else { a })
        .expect("at least one assignment");
    let (cost, life_mask, left, right, _) = best;
    if cost.is_infinite() {
        return Err(OracleError::Infeasible);
    }
    let pick = |mask: u32| -> NodeSet { (0..n).filter(|&v| mask >> v & 1 == 1).collect() };
    let (life, left, right) = (pick(life_mask), pick(left), pick(right));
    debug_assert_eq!(
        extended_total_cost(cfg, problem, &life, &left, &right, &lifetime_cost),
        Ok(cost)
    );
    let mut solution = LospreSolution::from_life(cfg, problem, life, cost);
    solution.extended = Some(OperandLife { left, right });
    Ok(solution)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> Cfg {
        Cfg::with_default_costs(5, [(0, 1), (1, 2), (1, 3), (2, 4), (3, 4)]).unwrap()
    }

    #[test]
    fn diamond_optimum() {
        let g = diamond();
        let p = ExprProblem::new(&g, [2, 3], []).unwrap();
        let s = brute_lospre(&g, &p).unwrap();
        assert_eq!(s.cost, CostVec::new(1, 1));
        assert_eq!(s.life_set, NodeSet::from([1]));
        assert_eq!(s.calc_set.edges, [(0, 1)].into_iter().collect());

        let empty = ExprProblem::new(&g, [], []).unwrap();
        let s = brute_lospre(&g, &empty).unwrap();
        assert_eq!((s.cost, s.life_set.len()), (CostVec::ZERO, 0));
    }

    #[test]
    fn free_edges_need_no_life() {
        let g = diamond().with_edge_costs(vec![CostVec::ZERO; 5]);
        let p = ExprProblem::new(&g, [2, 3], []).unwrap();
        let s = brute_lospre(&g, &p).unwrap();
        assert!(s.life_set.is_empty());
        assert_eq!(s.cost, CostVec::ZERO);
    }

    #[test]
    fn tie_order_is_checked() {
        // Free lifetimes: many life sets tie, the all-dead one wins in any order.
        let g = Cfg::with_default_costs(4, [(0, 1), (1, 2), (2, 3)])
            .unwrap()
            .with_node_costs(vec![CostVec::ZERO; 4]);
        let p = ExprProblem::new(&g, [2], []).unwrap();
        let by_id = brute_lospre(&g, &p).unwrap();
        assert!(by_id.life_set.is_empty());
        let reversed = brute_lospre_ordered(&g, &p, &[3, 2, 1, 0]).unwrap();
        assert_eq!(reversed, by_id);
        assert!(brute_lospre_ordered(&g, &p, &[0, 1, 2]).is_err());
    }

    #[test]
    fn size_guards() {
        let edges: Vec<(usize, usize)> = (0..20).map(|v| (v, v + 1)).collect();
        let g = Cfg::with_default_costs(21, edges).unwrap();
        let p = ExprProblem::new(&g, [], []).unwrap();
        assert_eq!(
            brute_lospre(&g, &p).unwrap_err(),
            OracleError::TooLarge {
                nodes: 21,
                limit: 20
            }
        );
        assert!(brute_safety(&g, &p).is_err());
        assert!(brute_extended(&g, &p, |_, _, _, _| CostVec::ZERO).is_err());
    }

    #[test]
    fn safety_by_reachability() {
        let g = Cfg::with_default_costs(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let none = ExprProblem::new(&g, [], []).unwrap();
        assert_eq!(
            brute_safety(&g, &none).unwrap().added,
            NodeSet::from([1, 2])
        );
        let blocked = ExprProblem::new(&g, [1], []).unwrap();
        assert!(brute_safety(&g, &blocked).unwrap().added.is_empty());
        let all = ExprProblem::new(&g, [], [1, 2]).unwrap();
        let s = brute_safety(&g, &all).unwrap();
        assert_eq!(s.i_prime, *all.invalidation_set());
        assert!(s.added.is_empty());
    }

    #[test]
    fn extended_reductions() {
        let g = diamond();
        let p = ExprProblem::new(&g, [2, 3], []).unwrap();
        let base = brute_lospre(&g, &p).unwrap();
        let same = brute_extended(&g, &p, |_, b, _, _| CostVec::new(0, b as i64)).unwrap();
        assert_eq!((same.cost, &same.life_set), (base.cost, &base.life_set));
        let free = brute_extended(&g, &p, |_, _, _, _| CostVec::ZERO).unwrap();
        assert_eq!(free.cost.primary(), base.cost.primary());
    }
}
