//! Tree-decompositions of the undirected graph underlying a [`Cfg`].
//!
//! [`decompose`] builds one with a greedy min-fill elimination ordering,
//! [`validate`] checks the three decomposition conditions, and [`make_nice`]
//! turns a valid decomposition into a rooted [`NiceTreeDec`] of the same width.
//! The heuristic gives no width guarantee; the dynamic programs downstream are
//! exact for any valid decomposition and their running time is exponential
//! only in the width actually found.

mod heuristic;
mod nice;

use std::collections::VecDeque;
use std::fmt;

use crate::cfg::{Cfg, NodeId};

pub use heuristic::{decompose, decompose_with_order, min_fill_order};
pub use nice::{make_nice, validate_nice, NiceKind, NiceNode, NiceTreeDec};

/// A tree over bag ids plus the bag contents (sorted node ids).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDec {
    bags: Vec<Vec<NodeId>>,
    edges: Vec<(usize, usize)>,
}

impl TreeDec {
    /// Bags are sorted and deduplicated; no validity check is made here.
    pub fn new(bags: Vec<Vec<NodeId>>, edges: Vec<(usize, usize)>) -> TreeDec {
        let bags = bags
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b.dedup();
                b
            })
            .collect();
        TreeDec { bags, edges }
    }

    pub fn bags(&self) -> &[Vec<NodeId>] {
        &self.bags
    }

    pub fn tree_edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    /// Largest bag size minus one (0 when every bag is empty).
    pub fn width(&self) -> usize {
        self.bags
            .iter()
            .map(Vec::len)
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

/// The first condition a decomposition fails, with a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NotATree(String),
    BagNodeOutOfRange { bag: usize, node: NodeId },
    UncoveredNode(NodeId),
    UncoveredEdge(NodeId, NodeId),
    Disconnected(NodeId),
    Nice { node: usize, reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotATree(why) => write!(f, "decomposition tree is not a tree: {why}"),
            Violation::BagNodeOutOfRange { bag, node } => {
                write!(f, "bag {bag} holds unknown graph node {node}")
            }
            Violation::UncoveredNode(v) => write!(f, "node coverage: node {v} is in no bag"),
            Violation::UncoveredEdge(a, b) => {
                write!(
                    f,
                    "edge coverage: no bag holds both endpoints of {a} -> {b}"
                )
            }
            Violation::Disconnected(v) => {
                write!(
                    f,
                    "connectivity: the bags holding node {v} are not connected"
                )
            }
            Violation::Nice { node, reason } => write!(f, "nice node {node}: {reason}"),
        }
    }
}

impl std::error::Error for Violation {}

fn check_tree(td: &TreeDec) -> Result<(), Violation> {
    let n = td.bags.len();
    if n == 0 {
        return Err(Violation::NotATree("no bags".into()));
    }
    if td.edges.len() != n - 1 {
        return Err(Violation::NotATree(format!(
            "{} bags but {} tree edges",
            n,
            td.edges.len()
        )));
    }
    if let Some(&(a, b)) = td.edges.iter().find(|&&(a, b)| a >= n || b >= n || a == b) {
        return Err(Violation::NotATree(format!("bad tree edge {a} -- {b}")));
    }
    let adj = td.adjacency();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(t) = queue.pop_front() {
        for &u in &adj[t] {
            if !seen[u] {
                seen[u] = true;
                reached += 1;
                queue.push_back(u);
            }
        }
    }
    if reached != n {
        return Err(Violation::NotATree(format!(
            "only {reached} of {n} bags are connected"
        )));
    }
    Ok(())
}

/// Checks node coverage, edge coverage and connectivity, in that order.
pub fn validate(cfg: &Cfg, td: &TreeDec) -> Result<(), Violation> {
    check_tree(td)?;
    let n = cfg.node_count();
    let mut occurrences: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (t, bag) in td.bags.iter().enumerate() {
        for &v in bag {
            if v >= n {
                return Err(Violation::BagNodeOutOfRange { bag: t, node: v });
            }
            occurrences[v].push(t);
        }
    }
    if let Some(v) = (0..n).find(|&v| occurrences[v].is_empty()) {
        return Err(Violation::UncoveredNode(v));
    }
    for &(a, b) in cfg.edges() {
        if a == b {
            continue;
        }
        let covered = occurrences[a]
            .iter()
            .any(|&t| td.bags[t].binary_search(&b).is_ok());
        if !covered {
            return Err(Violation::UncoveredEdge(a, b));
        }
    }
    // A vertex subset of a tree is connected iff it induces exactly |subset| - 1 edges.
    let mut induced = vec![0usize; n];
    for &(s, t) in &td.edges {
        let (x, y) = (&td.bags[s], &td.bags[t]);
        let (mut i, mut j) = (0, 0);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    induced[x[i]] += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    if let Some(v) = (0..n).find(|&v| induced[v] + 1 != occurrences[v].len()) {
        return Err(Violation::Disconnected(v));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path4() -> Cfg {
        Cfg::with_default_costs(4, [(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    #[test]
    fn hand_built_decomposition_is_valid() {
        let td = TreeDec::new(
            vec![vec![0, 1], vec![1, 2], vec![2, 3]],
            vec![(0, 1), (1, 2)],
        );
        assert_eq!(validate(&path4(), &td), Ok(()));
        assert_eq!(td.width(), 1);
    }

    #[test]
    fn emptied_bag_loses_a_node() {
        let td = TreeDec::new(vec![vec![0, 1], vec![1, 2], vec![]], vec![(0, 1), (1, 2)]);
        assert_eq!(validate(&path4(), &td), Err(Violation::UncoveredNode(3)));
    }

    #[test]
    fn missing_edge_is_reported() {
        let td = TreeDec::new(vec![vec![0, 1], vec![2], vec![2, 3]], vec![(0, 1), (1, 2)]);
        assert_eq!(validate(&path4(), &td), Err(Violation::UncoveredEdge(1, 2)));
    }

    #[test]
    fn vertex_in_two_disconnected_bags() {
        let td = TreeDec::new(
            vec![vec![0, 1, 3], vec![1, 2], vec![2, 3]],
            vec![(0, 1), (1, 2)],
        );
        assert_eq!(validate(&path4(), &td), Err(Violation::Disconnected(3)));
    }

    #[test]
    fn non_tree_is_rejected() {
        let td = TreeDec::new(vec![vec![0, 1, 2, 3], vec![]], vec![]);
        assert!(matches!(
            validate(&path4(), &td),
            Err(Violation::NotATree(_))
        ));
        let td = TreeDec::new(vec![vec![0, 1, 2, 3], vec![9]], vec![(0, 1)]);
        assert_eq!(
            validate(&path4(), &td),
            Err(Violation::BagNodeOutOfRange { bag: 1, node: 9 })
        );
    }
}
