//! Bottom-up dynamic programming over a nice tree-decomposition.
//!
//! Every graph vertex carries a small per-vertex state (`BITS` bits). A table
//! entry is indexed by the packed states of the bag's vertices, slot `k`
//! (the k-th smallest id in the bag) occupying bits `BITS*k .. BITS*(k+1)`.
//! Costs of a vertex and of its incident edges are charged once, at the
//! forget node of the vertex; an edge is charged at whichever endpoint is
//! forgotten first, while the other endpoint is still in the bag.

use crate::cfg::{Cfg, NodeId};
use crate::cost::CostVec;
use crate::treedec::{validate_nice, NiceKind, NiceTreeDec};

use super::{DpError, DpStats, SolveOptions};

/// An edge charged at a forget node, as slots of the forget node's child bag.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Charge {
    pub edge: usize,
    pub from_slot: usize,
    pub to_slot: usize,
}

pub(crate) trait BagProblem {
    const BITS: u32;

    /// Freshly introduced vertices may only take states accepted here.
    fn introduce_ok(&self, _v: NodeId, _state: u32) -> bool {
        true
    }

    /// Cost of forgetting `v` (at `slot`) under the child assignment `states`.
    /// Implementations may rewrite the states of the other slots.
    fn forget(&self, v: NodeId, slot: usize, states: &mut [u32], charges: &[Charge]) -> CostVec;

    /// When false, joins combine child states through [`BagProblem::join`]
    /// instead of requiring identical assignments.
    const EXACT_JOIN: bool = true;

    fn join(&self, a: u32, b: u32) -> Option<u32> {
        (a == b).then_some(a)
    }
}

pub(crate) struct DpRun {
    pub root_cost: CostVec,
    /// Final state of every graph vertex in the reconstructed optimum.
    pub states: Vec<u32>,
    pub stats: DpStats,
}

enum Back {
    None,
    Forget(Vec<u32>),
    Join(Vec<(u32, u32)>),
}

/// Largest table the engine will allocate, in index bits.
const MAX_INDEX_BITS: u32 = 28;

#[inline]
fn slot_state(index: u32, slot: usize, bits: u32) -> u32 {
    (index >> (bits * slot as u32)) & ((1 << bits) - 1)
}

/// Removes `slot` from a packed index.
#[inline]
fn drop_slot(index: u32, slot: usize, bits: u32) -> u32 {
    let shift = bits * slot as u32;
    let low = index & ((1u32 << shift) - 1);
    let high = index >> (shift + bits);
    low | (high << shift)
}

fn pack(states: &[u32], skip: usize, bits: u32) -> u32 {
    let mut index = 0;
    let mut shift = 0;
    for (k, &s) in states.iter().enumerate() {
        if k != skip {
            index |= s << shift;
            shift += bits;
        }
    }
    index
}

fn charges_for(
    cfg: &Cfg,
    v: NodeId,
    child_bag: &[NodeId],
    stats: &mut DpStats,
) -> (usize, Vec<Charge>) {
    let slot_of = |u: NodeId| child_bag.binary_search(&u).ok();
    let p = slot_of(v).expect("forgotten vertex is in the child bag");
    let mut charges = Vec::new();
    for &(w, e) in cfg.successors(v) {
        if let Some(q) = slot_of(w) {
            charges.push(Charge {
                edge: e,
                from_slot: p,
                to_slot: q,
            });
            stats.edge_charges[e] += 1;
        }
    }
    for &(u, e) in cfg.predecessors(v) {
        if u == v {
            continue;
        }
        if let Some(q) = slot_of(u) {
            charges.push(Charge {
                edge: e,
                from_slot: q,
                to_slot: p,
            });
            stats.edge_charges[e] += 1;
        }
    }
    (p, charges)
}

pub(crate) fn run<P: BagProblem>(
    cfg: &Cfg,
    nice: &NiceTreeDec,
    problem: &P,
    options: &SolveOptions,
) -> Result<DpRun, DpError> {
    validate_nice(cfg, nice).map_err(DpError::DecompositionMismatch)?;
    let width = nice.width();
    if width > options.max_width {
        return Err(DpError::WidthExceeded {
            width,
            max: options.max_width,
        });
    }
    let bits = P::BITS;
    let max_bag = nice.nodes().iter().map(|n| n.bag.len()).max().unwrap_or(0) as u32;
    if bits * max_bag > MAX_INDEX_BITS {
        return Err(DpError::TableTooLarge {
            width,
            bits_per_node: bits,
        });
    }

    let mut stats = DpStats {
        transitions: 0,
        edge_charges: vec![0; cfg.edge_count()],
        width,
        nice_nodes: nice.len(),
    };
    let nodes = nice.nodes();
    let mut tables: Vec<Option<Vec<CostVec>>> = Vec::with_capacity(nodes.len());
    let mut backs: Vec<Back> = Vec::with_capacity(nodes.len());
    let mut scratch: Vec<u32> = Vec::new();

    for node in nodes {
        let size = 1usize << (bits * node.bag.len() as u32);
        let (table, back) = match node.kind {
            NiceKind::Leaf => (vec![CostVec::ZERO], Back::None),
            NiceKind::Introduce(v) => {
                let child = tables[node.children[0]].take().expect("child table");
                let p = node
                    .bag
                    .binary_search(&v)
                    .expect("introduced vertex in bag");
                let table = (0..size as u32)
                    .map(|f| {
                        if problem.introduce_ok(v, slot_state(f, p, bits)) {
                            child[drop_slot(f, p, bits) as usize]
                        } else {
                            CostVec::Infinity
                        }
                    })
                    .collect();
                stats.transitions += size as u64;
                (table, Back::None)
            }
            NiceKind::Forget(v) => {
                let child_id = node.children[0];
                let child = tables[child_id].take().expect("child table");
                let child_bag = &nodes[child_id].bag;
                let (p, charges) = charges_for(cfg, v, child_bag, &mut stats);
                let mut table = vec![CostVec::Infinity; size];
                let mut choice = vec![u32::MAX; size];
                for (g, &below) in child.iter().enumerate() {
                    if below.is_infinite() {
                        continue;
                    }
                    let g = g as u32;
                    scratch.clear();
                    scratch.extend((0..child_bag.len()).map(|k| slot_state(g, k, bits)));
                    let here = problem.forget(v, p, &mut scratch, &charges);
                    let f = pack(&scratch, p, bits) as usize;
                    let total = below + here;
                    if choice[f] == u32::MAX || total < table[f] {
                        table[f] = total;
                        choice[f] = g;
                    }
                }
                stats.transitions += (child.len() * (1 + charges.len())) as u64;
                (table, Back::Forget(choice))
            }
            NiceKind::Join => {
                let left = tables[node.children[0]].take().expect("left table");
                let right = tables[node.children[1]].take().expect("right table");
                if P::EXACT_JOIN {
                    let table = left.iter().zip(&right).map(|(&a, &b)| a + b).collect();
                    stats.transitions += size as u64;
                    (table, Back::None)
                } else {
                    let mut table = vec![CostVec::Infinity; size];
                    let mut choice = vec![(u32::MAX, u32::MAX); size];
                    let slots = node.bag.len();
                    for a in 0..size as u32 {
                        if left[a as usize].is_infinite() {
                            continue;
                        }
                        'pairs: for b in 0..size as u32 {
                            stats.transitions += 1;
                            if right[b as usize].is_infinite() {
                                continue;
                            }
                            let mut f = 0u32;
                            for k in 0..slots {
                                match problem.join(slot_state(a, k, bits), slot_state(b, k, bits)) {
                                    Some(s) => f |= s << (bits * k as u32),
                                    None => continue 'pairs,
                                }
                            }
                            let total = left[a as usize] + right[b as usize];
                            let f = f as usize;
                            if choice[f].0 == u32::MAX || total < table[f] {
                                table[f] = total;
                                choice[f] = (a, b);
                            }
                        }
                    }
                    (table, Back::Join(choice))
                }
            }
        };
        tables.push(Some(table));
        backs.push(back);
    }

    let root = nice.root();
    let root_table = tables[root].take().expect("root table");
    debug_assert_eq!(root_table.len(), 1);
    let root_cost = root_table[0];
    if root_cost.is_infinite() {
        return Err(DpError::Infeasible);
    }

    // Top-down walk; parents have larger indices than their children.
    let mut index = vec![0u32; nodes.len()];
    let mut states = vec![0u32; cfg.node_count()];
    for i in (0..nodes.len()).rev() {
        let node = &nodes[i];
        let f = index[i];
        match (&node.kind, &backs[i]) {
            (NiceKind::Leaf, _) => {}
            (NiceKind::Introduce(v), _) => {
                let p = node.bag.binary_search(v).expect("introduced vertex in bag");
                index[node.children[0]] = drop_slot(f, p, bits);
            }
            (NiceKind::Forget(v), Back::Forget(choice)) => {
                let g = choice[f as usize];
                debug_assert_ne!(g, u32::MAX);
                let child_bag = &nodes[node.children[0]].bag;
                let p = child_bag
                    .binary_search(v)
                    .expect("forgotten vertex in child bag");
                states[*v] = slot_state(g, p, bits);
                index[node.children[0]] = g;
            }
            (NiceKind::Join, Back::Join(choice)) => {
                let (a, b) = choice[f as usize];
                index[node.children[0]] = a;
                index[node.children[1]] = b;
            }
            (NiceKind::Join, _) => {
                index[node.children[0]] = f;
                index[node.children[1]] = f;
            }
            (NiceKind::Forget(_), _) => unreachable!("forget node without back-pointers"),
        }
    }

    // The state recorded at a forget node is the child-side state; problems
    // whose forget rewrites the forgotten slot see the post-forget value here.
    Ok(DpRun {
        root_cost,
        states,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_helpers() {
        // Slots with 2 bits each: [3, 1, 2] -> 0b10_01_11
        let idx = 0b10_01_11;
        assert_eq!(slot_state(idx, 0, 2), 3);
        assert_eq!(slot_state(idx, 1, 2), 1);
        assert_eq!(slot_state(idx, 2, 2), 2);
        assert_eq!(drop_slot(idx, 1, 2), 0b10_11);
        assert_eq!(pack(&[3, 1, 2], 1, 2), 0b10_11);
        assert_eq!(pack(&[3, 1, 2], 9, 2), idx);
    }
}
