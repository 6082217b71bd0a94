//! Lifetime-optimal speculative partial redundancy elimination (lospre).
//!
//! For one expression in a control-flow graph, lospre chooses the nodes where
//! a temporary holding its value is kept alive (the life set) and the edges
//! where it is freshly computed (the calculation set), minimizing computation
//! cost first and lifetime cost second. [`dp::solve`] does this exactly with
//! a dynamic program over a nice tree-decomposition, in time linear in the
//! graph for bounded width; [`safety::solve_safety`] restricts speculation
//! where computing the expression could fault; [`ir`] wires it all into a
//! small three-address IR.
//!
//! ```
//! use lospre_core::{decompose, make_nice, solve, Cfg, CostVec, ExprProblem};
//!
//! // 0 -> 1 -> {2, 3} -> 4, the expression is computed in both arms.
//! let g = Cfg::with_default_costs(5, [(0, 1), (1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
//! let p = ExprProblem::new(&g, [2, 3], []).unwrap();
//! let nice = make_nice(&g, &decompose(&g)).unwrap();
//! let s = solve(&g, &p, &nice).unwrap();
//! assert_eq!(s.cost, CostVec::new(1, 1));
//! assert!(s.calc_set.contains(0, 1));
//! ```

pub mod cfg;
pub mod cost;
pub mod dot;
pub mod dp;
pub mod graph_file;
pub mod ir;
pub mod oracle;
pub mod pipeline;
pub mod safety;
pub mod scaling;
pub mod treedec;

pub use cfg::{calc_set, total_cost, CalcSet, Cfg, CfgError, ExprProblem, NodeId, NodeSet};
pub use cost::CostVec;
pub use dp::{
    eliminated_count, solve, solve_extended, solve_with, DpError, DpStats, LospreSolution,
    SolveOptions,
};
pub use safety::{apply_safety, solve_safety, SafetySolution};
pub use treedec::{decompose, make_nice, validate, validate_nice, NiceTreeDec, TreeDec};
