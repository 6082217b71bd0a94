use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cfg::{Cfg, ExprProblem, NodeId, DEFAULT_EDGE_COST, DEFAULT_NODE_COST};
use crate::cost::CostVec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Style {
    /// Series and parallel compositions of a single edge, plus back edges.
    SeriesParallel,
    /// A random spanning arborescence from node 0 plus random extra edges.
    RandomSparse,
    /// Diamonds `top -> {left, right} -> bottom` chained bottom to top, with
    /// optional loops from a bottom back to its own top.
    ChainedDiamonds,
}

impl Style {
    pub const ALL: [Style; 3] = [
        Style::SeriesParallel,
        Style::RandomSparse,
        Style::ChainedDiamonds,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostStyle {
    /// c = (1,0), l = (0,1).
    Unit,
    /// Small random pairs; node costs may be negative.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceGenerator {
    pub seed: u64,
    pub nodes: RangeInclusive<usize>,
    /// Extra edges per node (series-parallel: back edges; chained diamonds:
    /// probability of a loop per diamond). Clamped to what a simple graph allows.
    pub edge_density: f64,
    pub style: Style,
    pub costs: CostStyle,
    pub use_probability: f64,
    pub invalidate_probability: f64,
}

impl InstanceGenerator {
    pub fn new(seed: u64, style: Style, nodes: RangeInclusive<usize>) -> InstanceGenerator {
        InstanceGenerator {
            seed,
            nodes,
            edge_density: 0.3,
            style,
            costs: CostStyle::Unit,
            use_probability: 0.35,
            invalidate_probability: 0.15,
        }
    }

    pub fn with_costs(mut self, costs: CostStyle) -> InstanceGenerator {
        self.costs = costs;
        self
    }

    pub fn with_density(mut self, edge_density: f64) -> InstanceGenerator {
        self.edge_density = edge_density;
        self
    }
}

/// Builds the instance described by `gen`; equal generators give equal instances.
pub fn generate(gen: &InstanceGenerator) -> (Cfg, ExprProblem) {
    let mut rng = ChaCha8Rng::seed_from_u64(gen.seed);
    let lo = (*gen.nodes.start()).max(1);
    let hi = (*gen.nodes.end()).max(lo);
    let n = rng.gen_range(lo..=hi);
    let density = gen.edge_density.max(0.0);
    let edges = match gen.style {
        Style::SeriesParallel => series_parallel(&mut rng, n, density),
        Style::RandomSparse => random_sparse(&mut rng, n, density),
        Style::ChainedDiamonds => chained_diamonds(&mut rng, n, density),
    };
    let cfg = with_costs(&mut rng, n, edges, gen.costs);

    let uses: Vec<NodeId> = cfg
        .nodes()
        .filter(|&v| v != cfg.source() && rng.gen_bool(gen.use_probability.clamp(0.0, 1.0)))
        .collect();
    let inval: Vec<NodeId> = cfg
        .nodes()
        .filter(|_| rng.gen_bool(gen.invalidate_probability.clamp(0.0, 1.0)))
        .collect();
    let problem = ExprProblem::new(&cfg, uses, inval).expect("generated problem is valid");
    (cfg, problem)
}

fn with_costs(
    rng: &mut ChaCha8Rng,
    n: usize,
    edges: BTreeSet<(NodeId, NodeId)>,
    style: CostStyle,
) -> Cfg {
    let (node_cost, edge_list): (Vec<CostVec>, Vec<(NodeId, NodeId, CostVec)>) = match style {
        CostStyle::Unit => (
            vec![DEFAULT_NODE_COST; n],
            edges
                .into_iter()
                .map(|(a, b)| (a, b, DEFAULT_EDGE_COST))
                .collect(),
        ),
        CostStyle::Random => {
            let nodes = (0..n)
                .map(|_| CostVec::new(rng.gen_range(-1..=1), rng.gen_range(-2..=3)))
                .collect();
            let edges = edges
                .into_iter()
                .map(|(a, b)| {
                    (
                        a,
                        b,
                        CostVec::new(rng.gen_range(0..=4), rng.gen_range(0..=2)),
                    )
                })
                .collect();
            (nodes, edges)
        }
    };
    Cfg::new(node_cost, edge_list).expect("generated graph is valid")
}

/// Node 0 is the source and node 1 the sink of the two-terminal graph.
fn series_parallel(rng: &mut ChaCha8Rng, n: usize, density: f64) -> BTreeSet<(NodeId, NodeId)> {
    let mut edges = BTreeSet::new();
    if n == 1 {
        return edges;
    }
    edges.insert((0, 1));
    for v in 2..n {
        let list: Vec<(NodeId, NodeId)> = edges.iter().copied().collect();
        let &(a, b) = list.choose(rng).expect("nonempty");
        if rng.gen_bool(0.5) {
            // Series: subdivide a -> b.
            edges.remove(&(a, b));
        }
        // Otherwise parallel: a second a -> v -> b path next to a -> b.
        edges.insert((a, v));
        edges.insert((v, b));
    }
    let extra = ((density * n as f64).round() as usize).min(n * n);
    for _ in 0..extra {
        let a = rng.gen_range(1..n);
        let b = rng.gen_range(1..n);
        edges.insert((a, b));
    }
    edges
}

fn random_sparse(rng: &mut ChaCha8Rng, n: usize, density: f64) -> BTreeSet<(NodeId, NodeId)> {
    let mut edges = BTreeSet::new();
    for v in 1..n {
        edges.insert((rng.gen_range(0..v), v));
    }
    // Anything except edges into the source.
    let capacity = n * n.saturating_sub(1);
    let target = (edges.len() + (density * n as f64).round() as usize).min(capacity);
    while edges.len() < target {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(1..n);
        edges.insert((a, b));
    }
    edges
}

fn chained_diamonds(
    rng: &mut ChaCha8Rng,
    n: usize,
    loop_probability: f64,
) -> BTreeSet<(NodeId, NodeId)> {
    let mut edges = BTreeSet::new();
    let k = n / 4;
    for d in 0..k {
        let (top, left, right, bottom) = (4 * d, 4 * d + 1, 4 * d + 2, 4 * d + 3);
        edges.extend([(top, left), (top, right), (left, bottom), (right, bottom)]);
        if d + 1 < k || 4 * k < n {
            edges.insert((bottom, bottom + 1));
        }
        // The first top is the source and must stay without predecessors.
        if d > 0 && rng.gen_bool(loop_probability.clamp(0.0, 1.0)) {
            edges.insert((bottom, top));
        }
    }
    // Leftover nodes form a tail.
    for v in (4 * k).max(1)..n {
        edges.insert((v - 1, v));
    }
    edges
}

/// `k` chained diamonds with unit costs (`4k` nodes), used for scaling runs.
pub(crate) fn diamond_chain(nodes: usize, loops: bool) -> Cfg {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let edges = chained_diamonds(&mut rng, nodes, if loops { 1.0 } else { 0.0 });
    with_costs(&mut rng, nodes, edges, CostStyle::Unit)
}
