use std::collections::VecDeque;

use super::{validate, TreeDec, Violation};
use crate::cfg::{Cfg, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NiceKind {
    Leaf,
    Introduce(NodeId),
    Forget(NodeId),
    Join,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceNode {
    pub kind: NiceKind,
    /// Sorted.
    pub bag: Vec<NodeId>,
    pub children: Vec<usize>,
}

/// A rooted nice tree-decomposition stored children-first: every node's
/// children have smaller indices, and the root is the last node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceTreeDec {
    nodes: Vec<NiceNode>,
}

impl NiceTreeDec {
    pub fn nodes(&self) -> &[NiceNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn width(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.bag.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    /// Forgotten vertices in root-first depth-first order. A vertex forgotten
    /// at an ancestor always precedes one forgotten below it.
    pub fn forget_order(&self) -> Vec<NodeId> {
        let mut order = Vec::new();
        let mut stack = vec![self.root()];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            if let NiceKind::Forget(v) = node.kind {
                order.push(v);
            }
            stack.extend(node.children.iter().rev());
        }
        order
    }

    /// The plain decomposition obtained by forgetting node kinds and the root.
    pub fn to_tree_dec(&self) -> TreeDec {
        let bags = self.nodes.iter().map(|n| n.bag.clone()).collect();
        let mut edges = Vec::with_capacity(self.nodes.len().saturating_sub(1));
        for (i, n) in self.nodes.iter().enumerate() {
            for &c in &n.children {
                edges.push((i, c));
            }
        }
        TreeDec::new(bags, edges)
    }

    fn push(&mut self, kind: NiceKind, bag: Vec<NodeId>, children: Vec<usize>) -> usize {
        self.nodes.push(NiceNode {
            kind,
            bag,
            children,
        });
        self.nodes.len() - 1
    }

    /// Extends the chain above `top` (whose bag is `bag`) until its bag is `target`.
    fn morph(&mut self, mut top: usize, mut bag: Vec<NodeId>, target: &[NodeId]) -> usize {
        let gone: Vec<NodeId> = bag
            .iter()
            .copied()
            .filter(|v| target.binary_search(v).is_err())
            .collect();
        for v in gone {
            bag.retain(|&u| u != v);
            top = self.push(NiceKind::Forget(v), bag.clone(), vec![top]);
        }
        for &v in target {
            if let Err(pos) = bag.binary_search(&v) {
                bag.insert(pos, v);
                top = self.push(NiceKind::Introduce(v), bag.clone(), vec![top]);
            }
        }
        top
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot make a nice decomposition from an invalid one: {0}")]
pub struct InvalidDecomposition(pub Violation);

/// Converts a valid decomposition into a nice one of the same width, rooted at
/// bag 0. Introduce nodes add exactly one vertex and joins are binary.
pub fn make_nice(cfg: &Cfg, td: &TreeDec) -> Result<NiceTreeDec, InvalidDecomposition> {
    validate(cfg, td).map_err(InvalidDecomposition)?;
    Ok(make_nice_unchecked(td))
}

pub(crate) fn make_nice_unchecked(td: &TreeDec) -> NiceTreeDec {
    let adj = td.adjacency();
    let n = td.len();
    let mut parent = vec![usize::MAX; n];
    let mut bfs = Vec::with_capacity(n);
    let mut queue = VecDeque::from([0usize]);
    parent[0] = 0;
    while let Some(t) = queue.pop_front() {
        bfs.push(t);
        for &u in &adj[t] {
            if parent[u] == usize::MAX {
                parent[u] = t;
                queue.push_back(u);
            }
        }
    }

    let mut nice = NiceTreeDec { nodes: Vec::new() };
    let mut top = vec![usize::MAX; n];
    for &t in bfs.iter().rev() {
        let target = &td.bags()[t];
        let children: Vec<usize> = adj[t].iter().copied().filter(|&u| parent[u] == t).collect();
        let mut acc: Option<usize> = None;
        for c in children {
            let child_bag = td.bags()[c].clone();
            let chain = nice.morph(top[c], child_bag, target);
            acc = Some(match acc {
                None => chain,
                Some(prev) => nice.push(NiceKind::Join, target.clone(), vec![prev, chain]),
            });
        }
        top[t] = match acc {
            Some(a) => a,
            None => {
                let leaf = nice.push(NiceKind::Leaf, Vec::new(), Vec::new());
                nice.morph(leaf, Vec::new(), target)
            }
        };
    }
    let root_bag = td.bags()[0].clone();
    let last = nice.morph(top[0], root_bag, &[]);
    debug_assert_eq!(last, nice.root());
    nice
}

/// Checks the nice-decomposition conditions and the underlying decomposition.
pub fn validate_nice(cfg: &Cfg, nice: &NiceTreeDec) -> Result<(), Violation> {
    let bad = |node: usize, reason: String| Err(Violation::Nice { node, reason });
    if nice.is_empty() {
        return bad(0, "empty decomposition".into());
    }
    let root = nice.root();
    if !nice.nodes[root].bag.is_empty() {
        return bad(root, "root bag is not empty".into());
    }
    let mut parents = vec![0usize; nice.len()];
    let mut forgets = vec![0usize; cfg.node_count()];
    for (i, node) in nice.nodes.iter().enumerate() {
        if node.bag.windows(2).any(|w| w[0] >= w[1]) {
            return bad(i, "bag is not sorted".into());
        }
        if let Some(&c) = node.children.iter().find(|&&c| c >= i) {
            return bad(i, format!("child {c} does not precede its parent"));
        }
        for &c in &node.children {
            parents[c] += 1;
        }
        let child_bag = |k: usize| &nice.nodes[node.children[k]].bag;
        match (node.kind, node.children.len()) {
            (NiceKind::Leaf, 0) => {
                if !node.bag.is_empty() {
                    return bad(i, "leaf bag is not empty".into());
                }
            }
            (NiceKind::Introduce(v), 1) => {
                let mut expect = child_bag(0).clone();
                if expect.contains(&v) {
                    return bad(i, format!("introduced node {v} already in child bag"));
                }
                expect.push(v);
                expect.sort_unstable();
                if expect != node.bag {
                    return bad(i, format!("bag is not the child bag plus {v}"));
                }
            }
            (NiceKind::Forget(v), 1) => {
                if v >= cfg.node_count() {
                    return bad(i, format!("forgets unknown node {v}"));
                }
                forgets[v] += 1;
                let mut expect = node.bag.clone();
                if expect.contains(&v) {
                    return bad(i, format!("forgotten node {v} still in bag"));
                }
                expect.push(v);
                expect.sort_unstable();
                if &expect != child_bag(0) {
                    return bad(i, format!("child bag is not the bag plus {v}"));
                }
            }
            (NiceKind::Join, 2) => {
                if child_bag(0) != &node.bag || child_bag(1) != &node.bag {
                    return bad(i, "join children bags differ".into());
                }
            }
            (kind, k) => return bad(i, format!("{kind:?} node with {k} children")),
        }
    }
    if let Some(i) = (0..root).find(|&i| parents[i] != 1) {
        return bad(i, format!("has {} parents", parents[i]));
    }
    if let Some(v) = (0..cfg.node_count()).find(|&v| forgets[v] != 1) {
        return bad(root, format!("node {v} is forgotten {} times", forgets[v]));
    }
    validate(cfg, &nice.to_tree_dec())
}
