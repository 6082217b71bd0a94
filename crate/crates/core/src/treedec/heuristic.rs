use std::collections::BTreeSet;

use super::TreeDec;
use crate::cfg::{Cfg, NodeId};

/// Undirected simple graph underlying the CFG (self-loops dropped).
fn undirected(cfg: &Cfg) -> Vec<BTreeSet<NodeId>> {
    let mut adj = vec![BTreeSet::new(); cfg.node_count()];
    for &(a, b) in cfg.edges() {
        if a != b {
            adj[a].insert(b);
            adj[b].insert(a);
        }
    }
    adj
}

fn fill_in(adj: &[BTreeSet<NodeId>], v: NodeId) -> usize {
    let nbrs: Vec<NodeId> = adj[v].iter().copied().collect();
    let mut missing = 0;
    for (i, &a) in nbrs.iter().enumerate() {
        for &b in &nbrs[i + 1..] {
            if !adj[a].contains(&b) {
                missing += 1;
            }
        }
    }
    missing
}

/// Greedy minimum-fill elimination ordering; ties go to the smaller current
/// degree, then to the lower node id.
pub fn min_fill_order(cfg: &Cfg) -> Vec<NodeId> {
    let mut adj = undirected(cfg);
    let n = adj.len();
    let mut key: Vec<(usize, usize, NodeId)> = (0..n)
        .map(|v| (fill_in(&adj, v), adj[v].len(), v))
        .collect();
    let mut queue: BTreeSet<(usize, usize, NodeId)> = key.iter().copied().collect();
    let mut eliminated = vec![false; n];
    let mut order = Vec::with_capacity(n);

    while let Some(first) = queue.pop_first() {
        let v = first.2;
        eliminated[v] = true;
        order.push(v);
        let nbrs: Vec<NodeId> = adj[v].iter().copied().collect();
        for &a in &nbrs {
            adj[a].remove(&v);
        }
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        adj[v].clear();

        let mut touched: BTreeSet<NodeId> = BTreeSet::new();
        for &a in &nbrs {
            touched.insert(a);
            touched.extend(adj[a].iter().copied());
        }
        for u in touched {
            if eliminated[u] {
                continue;
            }
            let fresh = (fill_in(&adj, u), adj[u].len(), u);
            if fresh != key[u] {
                queue.remove(&key[u]);
                queue.insert(fresh);
                key[u] = fresh;
            }
        }
    }
    order
}

/// Builds the decomposition induced by an elimination ordering: one bag per
/// vertex holding it and its neighbours at elimination time, hung below the
/// bag of its earliest-eliminated neighbour.
pub fn decompose_with_order(cfg: &Cfg, order: &[NodeId]) -> TreeDec {
    let n = cfg.node_count();
    assert_eq!(
        order.len(),
        n,
        "elimination order must list every node once"
    );
    let mut position = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        assert_eq!(position[v], usize::MAX, "node {v} listed twice");
        position[v] = i;
    }

    let mut adj = undirected(cfg);
    let mut bags: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    for &v in order {
        let nbrs: Vec<NodeId> = adj[v].iter().copied().collect();
        for &a in &nbrs {
            adj[a].remove(&v);
        }
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        parent[v] = nbrs.iter().copied().min_by_key(|&u| position[u]);
        let mut bag = nbrs;
        bag.push(v);
        bags[v] = bag;
        adj[v].clear();
    }

    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut roots = Vec::new();
    for &v in order {
        match parent[v] {
            Some(p) => edges.push((v, p)),
            None => roots.push(v),
        }
    }
    // Components share no vertices, so chaining their roots keeps every
    // occurrence set connected.
    for w in roots.windows(2) {
        edges.push((w[0], w[1]));
    }
    TreeDec::new(bags, edges)
}

/// Deterministic heuristic decomposition (min-fill, min-degree, lowest id).
pub fn decompose(cfg: &Cfg) -> TreeDec {
    decompose_with_order(cfg, &min_fill_order(cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treedec::validate;

    #[test]
    fn path_has_width_one() {
        let g = Cfg::with_default_costs(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let td = decompose(&g);
        assert_eq!(validate(&g, &td), Ok(()));
        assert_eq!(td.width(), 1);
    }

    #[test]
    fn clique_has_width_n_minus_one() {
        let mut edges = Vec::new();
        for a in 0..4 {
            for b in 1..4 {
                if a != b {
                    edges.push((a, b));
                }
            }
        }
        let g = Cfg::with_default_costs(4, edges).unwrap();
        let td = decompose(&g);
        assert_eq!(validate(&g, &td), Ok(()));
        assert_eq!(td.width(), 3);
    }

    #[test]
    fn diamond_is_series_parallel() {
        let g = Cfg::with_default_costs(5, [(0, 1), (1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
        let td = decompose(&g);
        assert_eq!(validate(&g, &td), Ok(()));
        assert!(td.width() <= 2);
    }

    #[test]
    fn single_node_and_self_loops() {
        let g = Cfg::with_default_costs(1, []).unwrap();
        let td = decompose(&g);
        assert_eq!(validate(&g, &td), Ok(()));
        assert_eq!(td.width(), 0);

        let g = Cfg::with_default_costs(3, [(0, 1), (1, 1), (1, 2), (2, 1)]).unwrap();
        let td = decompose(&g);
        assert_eq!(validate(&g, &td), Ok(()));
        assert_eq!(td.width(), 1);
    }

    #[test]
    fn deterministic() {
        let g =
            Cfg::with_default_costs(6, [(0, 1), (1, 2), (2, 3), (3, 1), (1, 4), (4, 5), (3, 5)])
                .unwrap();
        assert_eq!(decompose(&g), decompose(&g));
    }

    #[test]
    fn any_order_gives_a_valid_decomposition() {
        let g =
            Cfg::with_default_costs(6, [(0, 1), (1, 2), (2, 3), (3, 1), (1, 4), (4, 5), (3, 5)])
                .unwrap();
        for order in [[0, 1, 2, 3, 4, 5], [5, 4, 3, 2, 1, 0], [2, 0, 5, 1, 3, 4]] {
            assert_eq!(validate(&g, &decompose_with_order(&g, &order)), Ok(()));
        }
    }
}
