//! Weighted instruction-level control-flow graphs, lospre problem instances,
//! and the objective function shared by every solver in the crate.

use std::collections::BTreeSet;

use crate::cost::CostVec;

pub type NodeId = usize;
pub type NodeSet = BTreeSet<NodeId>;

/// Default edge cost when optimizing for code size.
pub const DEFAULT_EDGE_COST: CostVec = CostVec::new(1, 0);
/// Default lifetime cost of keeping the temporary alive at a node.
pub const DEFAULT_NODE_COST: CostVec = CostVec::new(0, 1);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CfgError {
    #[error("node id {id} out of range (graph has {count} nodes)")]
    NodeOutOfRange { id: NodeId, count: usize },
    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: NodeId, to: NodeId },
    #[error("graph has no source (every node has a predecessor)")]
    NoSource,
    #[error("graph has multiple sources: {0:?}")]
    MultipleSources(Vec<NodeId>),
    #[error("graph is empty")]
    Empty,
    #[error("use set contains the source node {0}")]
    UseContainsSource(NodeId),
    #[error("expected {expected} node costs, got {got}")]
    NodeCostCount { expected: usize, got: usize },
}

/// A weighted directed graph with a unique source.
///
/// Edges are kept sorted by `(from, to)`; an edge's index into [`Cfg::edges`]
/// is its identity everywhere else in the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    node_count: usize,
    edges: Vec<(NodeId, NodeId)>,
    edge_cost: Vec<CostVec>,
    node_cost: Vec<CostVec>,
    source: NodeId,
    succ: Vec<Vec<(NodeId, usize)>>,
    pred: Vec<Vec<(NodeId, usize)>>,
}

impl Cfg {
    /// Builds a graph and checks every structural invariant.
    pub fn new(
        node_cost: Vec<CostVec>,
        edges: impl IntoIterator<Item = (NodeId, NodeId, CostVec)>,
    ) -> Result<Cfg, CfgError> {
        let node_count = node_cost.len();
        if node_count == 0 {
            return Err(CfgError::Empty);
        }
        let mut list: Vec<(NodeId, NodeId, CostVec)> = edges.into_iter().collect();
        for &(a, b, _) in &list {
            for id in [a, b] {
                if id >= node_count {
                    return Err(CfgError::NodeOutOfRange {
                        id,
                        count: node_count,
                    });
                }
            }
        }
        list.sort_by_key(|&(a, b, _)| (a, b));
        if let Some(w) = list
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(CfgError::DuplicateEdge {
                from: w[0].0,
                to: w[0].1,
            });
        }

        let mut succ = vec![Vec::new(); node_count];
        let mut pred = vec![Vec::new(); node_count];
        for (idx, &(a, b, _)) in list.iter().enumerate() {
            succ[a].push((b, idx));
            pred[b].push((a, idx));
        }
        let sources: Vec<NodeId> = (0..node_count).filter(|&v| pred[v].is_empty()).collect();
        let source = match sources.as_slice() {
            [] => return Err(CfgError::NoSource),
            [s] => *s,
            _ => return Err(CfgError::MultipleSources(sources)),
        };

        Ok(Cfg {
            node_count,
            edges: list.iter().map(|&(a, b, _)| (a, b)).collect(),
            edge_cost: list.iter().map(|&(_, _, c)| c).collect(),
            node_cost,
            source,
            succ,
            pred,
        })
    }

    /// Unit-cost graph for code-size optimization: c = (1,0), l = (0,1).
    pub fn with_default_costs(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Cfg, CfgError> {
        Cfg::new(
            vec![DEFAULT_NODE_COST; node_count],
            edges.into_iter().map(|(a, b)| (a, b, DEFAULT_EDGE_COST)),
        )
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.node_count
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn edge_cost(&self, edge: usize) -> CostVec {
        self.edge_cost[edge]
    }

    pub fn node_cost(&self, v: NodeId) -> CostVec {
        self.node_cost[v]
    }

    pub fn node_costs(&self) -> &[CostVec] {
        &self.node_cost
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    /// Nodes without successors.
    pub fn sinks(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(|&v| self.succ[v].is_empty())
    }

    /// `(successor, edge index)` pairs.
    pub fn successors(&self, v: NodeId) -> &[(NodeId, usize)] {
        &self.succ[v]
    }

    /// `(predecessor, edge index)` pairs.
    pub fn predecessors(&self, v: NodeId) -> &[(NodeId, usize)] {
        &self.pred[v]
    }

    pub fn edge_index(&self, from: NodeId, to: NodeId) -> Option<usize> {
        self.edges.binary_search(&(from, to)).ok()
    }

    /// Returns a copy with the given edge costs replaced (by edge index).
    pub fn with_edge_costs(&self, edge_cost: Vec<CostVec>) -> Cfg {
        assert_eq!(edge_cost.len(), self.edges.len());
        Cfg {
            edge_cost,
            ..self.clone()
        }
    }

    /// Returns a copy with the given node costs.
    pub fn with_node_costs(&self, node_cost: Vec<CostVec>) -> Cfg {
        assert_eq!(node_cost.len(), self.node_count);
        Cfg {
            node_cost,
            ..self.clone()
        }
    }

    pub(crate) fn check_node(&self, id: NodeId) -> Result<(), CfgError> {
        if id < self.node_count {
            Ok(())
        } else {
            Err(CfgError::NodeOutOfRange {
                id,
                count: self.node_count,
            })
        }
    }
}

/// One lospre instance over a [`Cfg`]: where the expression is computed (the
/// use set) and where its operands change (the invalidation set).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprProblem {
    use_set: NodeSet,
    invalidation_set: NodeSet,
}

impl ExprProblem {
    /// The source and every sink are added to the invalidation set.
    pub fn new(
        cfg: &Cfg,
        use_set: impl IntoIterator<Item = NodeId>,
        invalidation_set: impl IntoIterator<Item = NodeId>,
    ) -> Result<ExprProblem, CfgError> {
        let use_set: NodeSet = use_set.into_iter().collect();
        let mut invalidation_set: NodeSet = invalidation_set.into_iter().collect();
        for &v in use_set.iter().chain(invalidation_set.iter()) {
            cfg.check_node(v)?;
        }
        if use_set.contains(&cfg.source()) {
            return Err(CfgError::UseContainsSource(cfg.source()));
        }
        invalidation_set.insert(cfg.source());
        invalidation_set.extend(cfg.sinks());
        Ok(ExprProblem {
            use_set,
            invalidation_set,
        })
    }

    pub fn use_set(&self) -> &NodeSet {
        &self.use_set
    }

    pub fn invalidation_set(&self) -> &NodeSet {
        &self.invalidation_set
    }

    /// Same uses, different invalidation set (which must still contain
    /// the source and the sinks).
    pub fn with_invalidation_set(&self, invalidation_set: NodeSet) -> ExprProblem {
        ExprProblem {
            use_set: self.use_set.clone(),
            invalidation_set,
        }
    }

    pub fn membership(&self, cfg: &Cfg) -> Membership {
        let n = cfg.node_count();
        let mut uses = vec![false; n];
        let mut invalid = vec![false; n];
        for &v in &self.use_set {
            uses[v] = true;
        }
        for &v in &self.invalidation_set {
            invalid[v] = true;
        }
        Membership { uses, invalid }
    }
}

/// Dense membership vectors for a problem's use and invalidation sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub uses: Vec<bool>,
    pub invalid: Vec<bool>,
}

impl Membership {
    /// Whether edge `(x, y)` needs a computation given which endpoints are live.
    #[inline]
    pub fn needs_calc(&self, x: NodeId, x_live: bool, y: NodeId, y_live: bool) -> bool {
        let x_carries = x_live && !self.invalid[x];
        !x_carries && (self.uses[y] || y_live)
    }

    /// The calculation set for a dense life mask, as edge indices.
    pub fn calc_edges<'a>(
        &'a self,
        cfg: &'a Cfg,
        life: &'a [bool],
    ) -> impl Iterator<Item = usize> + 'a {
        cfg.edges()
            .iter()
            .enumerate()
            .filter(move |&(_, &(x, y))| self.needs_calc(x, life[x], y, life[y]))
            .map(|(i, _)| i)
    }

    /// The lospre objective for a dense life mask.
    pub fn cost(&self, cfg: &Cfg, life: &[bool]) -> CostVec {
        let edges: CostVec = self.calc_edges(cfg, life).map(|e| cfg.edge_cost(e)).sum();
        let nodes: CostVec = cfg
            .nodes()
            .filter(|&v| life[v])
            .map(|v| cfg.node_cost(v))
            .sum();
        edges + nodes
    }
}

/// Edges that must be subdivided to hold a fresh computation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CalcSet {
    pub edges: BTreeSet<(NodeId, NodeId)>,
}

impl CalcSet {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, from: NodeId, to: NodeId) -> bool {
        self.edges.contains(&(from, to))
    }
}

fn life_mask(cfg: &Cfg, life: &NodeSet) -> Result<Vec<bool>, CfgError> {
    let mut mask = vec![false; cfg.node_count()];
    for &v in life {
        cfg.check_node(v)?;
        mask[v] = true;
    }
    Ok(mask)
}

/// `{(x,y) ∈ E | x ∉ life∖I, y ∈ U ∪ life}`.
pub fn calc_set(cfg: &Cfg, problem: &ExprProblem, life: &NodeSet) -> Result<CalcSet, CfgError> {
    let mask = life_mask(cfg, life)?;
    let m = problem.membership(cfg);
    Ok(CalcSet {
        edges: m.calc_edges(cfg, &mask).map(|e| cfg.edges()[e]).collect(),
    })
}

/// Sum of edge costs over the calculation set plus node costs over the life set.
pub fn total_cost(cfg: &Cfg, problem: &ExprProblem, life: &NodeSet) -> Result<CostVec, CfgError> {
    let mask = life_mask(cfg, life)?;
    Ok(problem.membership(cfg).cost(cfg, &mask))
}

/// The extended objective: calculation edges as for [`total_cost`] (they
/// depend on `life` only) plus `lifetime_cost(v, v ∈ life, v ∈ left, v ∈ right)`
/// summed over every node.
pub fn extended_total_cost(
    cfg: &Cfg,
    problem: &ExprProblem,
    life: &NodeSet,
    left: &NodeSet,
    right: &NodeSet,
    lifetime_cost: impl Fn(NodeId, bool, bool, bool) -> CostVec,
) -> Result<CostVec, CfgError> {
    let mask = life_mask(cfg, life)?;
    life_mask(cfg, left)?;
    life_mask(cfg, right)?;
    let m = problem.membership(cfg);
    let edges: CostVec = m.calc_edges(cfg, &mask).map(|e| cfg.edge_cost(e)).sum();
    let nodes: CostVec = cfg
        .nodes()
        .map(|v| lifetime_cost(v, mask[v], left.contains(&v), right.contains(&v)))
        .sum();
    Ok(edges + nodes)
}
