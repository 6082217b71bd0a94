use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{CostAnchor, Directive, Inst, Program};
use crate::cfg::{Cfg, CfgError, NodeId, DEFAULT_EDGE_COST, DEFAULT_NODE_COST};
use crate::cost::CostVec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("undefined label `{0}`")]
    UndefinedLabel(String),
    #[error("cost directive names {from} -> {to}, which is not a control-flow edge")]
    NoSuchEdge { from: String, to: String },
    #[error(transparent)]
    Graph(#[from] CfgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Entry,
    Instr(usize),
    Exit,
}

/// The graph of a program: node 0 is a synthetic entry, node `i + 1` is
/// instruction `i`, and the last node is a synthetic exit after every `ret`.
#[derive(Debug, Clone)]
pub struct IrCfg {
    pub cfg: Cfg,
    pub instr_count: usize,
    /// Instructions not reachable from the entry, by index.
    pub unreachable: Vec<usize>,
    pub warnings: Vec<String>,
}

impl IrCfg {
    pub const ENTRY: NodeId = 0;

    pub fn exit(&self) -> NodeId {
        self.instr_count + 1
    }

    pub fn node_of(&self, instr: usize) -> NodeId {
        instr + 1
    }

    pub fn kind(&self, node: NodeId) -> NodeKind {
        match node {
            0 => NodeKind::Entry,
            n if n == self.exit() => NodeKind::Exit,
            n => NodeKind::Instr(n - 1),
        }
    }

    /// Node labels for DOT output.
    pub fn labels(&self, program: &Program) -> Vec<String> {
        self.cfg
            .nodes()
            .map(|v| match self.kind(v) {
                NodeKind::Entry => "entry".to_string(),
                NodeKind::Exit => "exit".to_string(),
                NodeKind::Instr(i) => program.instrs[i].inst.to_string(),
            })
            .collect()
    }
}

/// Builds the control-flow graph with unit costs unless directives say otherwise.
/// Unreachable instructions stay in the graph; those without predecessors are
/// hung below the entry so that the entry remains the only source.
pub fn build_cfg(program: &Program) -> Result<IrCfg, BuildError> {
    let n = program.instrs.len();
    let exit = n + 1;
    let mut labels: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, instr) in program.instrs.iter().enumerate() {
        for l in &instr.labels {
            labels.insert(l, i);
        }
    }
    let target = |l: &str| -> Result<NodeId, BuildError> {
        labels
            .get(l)
            .map(|&i| i + 1)
            .ok_or_else(|| BuildError::UndefinedLabel(l.to_string()))
    };

    let mut edges: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    edges.insert((0, if n == 0 { exit } else { 1 }));
    for (i, instr) in program.instrs.iter().enumerate() {
        let node = i + 1;
        let next = if i + 1 < n { node + 1 } else { exit };
        match &instr.inst {
            Inst::Ret => {
                edges.insert((node, exit));
            }
            Inst::Jump { target: l } => {
                edges.insert((node, target(l)?));
            }
            Inst::Branch { target: l, .. } => {
                edges.insert((node, next));
                edges.insert((node, target(l)?));
            }
            _ => {
                edges.insert((node, next));
            }
        }
    }

    let mut warnings = Vec::new();
    let mut reached = vec![false; n + 2];
    let mut queue = VecDeque::from([0]);
    reached[0] = true;
    while let Some(v) = queue.pop_front() {
        for &(_, w) in edges.range((v, 0)..(v + 1, 0)) {
            if !reached[w] {
                reached[w] = true;
                queue.push_back(w);
            }
        }
    }
    let unreachable: Vec<usize> = (0..n).filter(|&i| !reached[i + 1]).collect();
    if !unreachable.is_empty() {
        warnings.push(format!("unreachable instructions: {unreachable:?}"));
    }
    let mut has_pred = vec![false; n + 2];
    for &(_, b) in &edges {
        has_pred[b] = true;
    }
    for v in (1..=exit).filter(|&v| !has_pred[v]) {
        if v == exit {
            warnings.push("the program never returns".to_string());
        }
        edges.insert((0, v));
    }

    let mut edge_default = DEFAULT_EDGE_COST;
    let mut node_default = DEFAULT_NODE_COST;
    for d in &program.directives {
        match d {
            Directive::DefaultEdgeCost(c) => edge_default = *c,
            Directive::DefaultNodeCost(c) => node_default = *c,
            _ => {}
        }
    }
    let mut edge_cost: BTreeMap<(NodeId, NodeId), CostVec> =
        edges.iter().map(|&e| (e, edge_default)).collect();
    let mut node_cost = vec![node_default; n + 2];
    for d in &program.directives {
        match d {
            Directive::EdgeCost { from, to, cost } => {
                let anchor = |a: &CostAnchor| match a {
                    CostAnchor::Entry => Ok(0),
                    CostAnchor::Exit => Ok(exit),
                    CostAnchor::Label(l) => target(l),
                };
                let key = (anchor(from)?, anchor(to)?);
                match edge_cost.get_mut(&key) {
                    Some(c) => *c = *cost,
                    None => {
                        return Err(BuildError::NoSuchEdge {
                            from: from.to_string(),
                            to: to.to_string(),
                        })
                    }
                }
            }
            Directive::NodeCost { at, cost } => node_cost[target(at)?] = *cost,
            _ => {}
        }
    }

    let cfg = Cfg::new(
        node_cost,
        edge_cost.into_iter().map(|((a, b), c)| (a, b, c)),
    )?;
    Ok(IrCfg {
        cfg,
        instr_count: n,
        unreachable,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{parse_ir, ARRAY_BRANCH};

    #[test]
    fn straight_line_is_a_path() {
        let p = parse_ir("x = 1\ny = x + 2\nret\n").unwrap();
        let g = build_cfg(&p).unwrap();
        assert_eq!(g.cfg.node_count(), 5);
        assert_eq!(g.cfg.edges(), &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert!(g.warnings.is_empty());
    }

    #[test]
    fn array_branch_shape() {
        let p = parse_ir(ARRAY_BRANCH).unwrap();
        let g = build_cfg(&p).unwrap();
        assert_eq!(g.cfg.node_count(), 15);
        let branching: Vec<NodeId> = g
            .cfg
            .nodes()
            .filter(|&v| g.cfg.successors(v).len() == 2)
            .collect();
        assert_eq!(branching, vec![1]);
        // Both arms meet at `end: ret`.
        assert_eq!(g.cfg.predecessors(13).len(), 2);
        assert_eq!(g.cfg.sinks().collect::<Vec<_>>(), vec![14]);
    }

    #[test]
    fn branch_to_next_collapses() {
        let p = parse_ir("if x goto L\nL: ret\n").unwrap();
        let g = build_cfg(&p).unwrap();
        assert_eq!(g.cfg.successors(1).len(), 1);
    }

    #[test]
    fn unreachable_code_is_kept_and_flagged() {
        let p = parse_ir("goto L\nx = 1\nL: ret\n").unwrap();
        let g = build_cfg(&p).unwrap();
        assert_eq!(g.unreachable, vec![1]);
        assert_eq!(g.warnings.len(), 1);
        assert_eq!(g.cfg.source(), 0);
        assert!(g.cfg.edge_index(0, 2).is_some());
    }

    #[test]
    fn infinite_loop_keeps_unique_source() {
        let p = parse_ir("L: goto L\n").unwrap();
        let g = build_cfg(&p).unwrap();
        assert_eq!(g.cfg.source(), 0);
        assert!(g.warnings.iter().any(|w| w.contains("never returns")));
    }

    #[test]
    fn directives_override_costs() {
        let text = "!edgecost default [2,0]\n!edgecost entry A [7,0]\n!nodecost B [0,5]\nA: x = 1\nB: ret\n";
        let g = build_cfg(&parse_ir(text).unwrap()).unwrap();
        assert_eq!(
            g.cfg.edge_cost(g.cfg.edge_index(0, 1).unwrap()),
            CostVec::new(7, 0)
        );
        assert_eq!(
            g.cfg.edge_cost(g.cfg.edge_index(1, 2).unwrap()),
            CostVec::new(2, 0)
        );
        assert_eq!(g.cfg.node_cost(2), CostVec::new(0, 5));
        assert_eq!(g.cfg.node_cost(1), DEFAULT_NODE_COST);

        let bad = parse_ir("!edgecost B A [1,0]\nA: x = 1\nB: ret\n").unwrap();
        assert!(matches!(
            build_cfg(&bad),
            Err(BuildError::NoSuchEdge { .. })
        ));
    }

    #[test]
    fn empty_program() {
        let g = build_cfg(&Program::default()).unwrap();
        assert_eq!(g.cfg.edges(), &[(0, 1)]);
    }
}
