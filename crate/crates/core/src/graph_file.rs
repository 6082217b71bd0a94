//! Line-oriented graph file format.
//!
//! ```text
//! # comment
//! cfg 5
//! node 0 l=[0,1]
//! edge 0 1 c=[1,0]
//! problem use=2,3 invalidate=0,4
//! ```
//!
//! `node` lines are optional (default `l=[0,1]`), as is an edge's `c=` (default
//! `[1,0]`). Every `problem` line yields one [`ExprProblem`].

use std::fmt::Write as _;

use crate::cfg::{Cfg, CfgError, ExprProblem, NodeId, DEFAULT_EDGE_COST, DEFAULT_NODE_COST};
use crate::cost::CostVec;

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// When several nodes lack predecessors, add a fresh source (id = node count)
    /// with an edge to each of them.
    pub synthetic_source: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Cost {
        line: usize,
        source: crate::cost::ParseCostError,
    },
    #[error("line {line}: duplicate edge {from} -> {to}")]
    DuplicateEdge {
        line: usize,
        from: NodeId,
        to: NodeId,
    },
    #[error("line {line}: node id {id} out of range (graph has {count} nodes)")]
    UnknownNode {
        line: usize,
        id: NodeId,
        count: usize,
    },
    #[error("missing `cfg <node_count>` header")]
    MissingHeader,
    #[error(transparent)]
    Graph(#[from] CfgError),
}

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub cfg: Cfg,
    pub problems: Vec<ExprProblem>,
    /// Id of the synthetic source, when one was added.
    pub synthetic_source: Option<NodeId>,
}

struct RawProblem {
    uses: Vec<NodeId>,
    invalidate: Vec<NodeId>,
}

pub fn load_cfg(text: &str, options: LoadOptions) -> Result<LoadedGraph, GraphFileError> {
    let mut count: Option<usize> = None;
    let mut node_cost: Vec<CostVec> = Vec::new();
    let mut edges: Vec<(NodeId, NodeId, CostVec)> = Vec::new();
    let mut edge_lines: std::collections::HashMap<(NodeId, NodeId), usize> = Default::default();
    let mut raw_problems: Vec<RawProblem> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let syntax = |message: String| GraphFileError::Syntax { line, message };
        let mut words = content.split_whitespace();
        let keyword = words.next().unwrap_or_default();
        let rest: Vec<&str> = words.collect();

        if keyword == "cfg" {
            if count.is_some() {
                return Err(syntax("duplicate `cfg` header".into()));
            }
            let [n] = rest.as_slice() else {
                return Err(syntax("expected `cfg <node_count>`".into()));
            };
            let n: usize = n
                .parse()
                .map_err(|_| syntax(format!("bad node count `{n}`")))?;
            count = Some(n);
            node_cost = vec![DEFAULT_NODE_COST; n];
            continue;
        }
        let n = count.ok_or(GraphFileError::MissingHeader)?;
        let node = |s: &str| -> Result<NodeId, GraphFileError> {
            let id: NodeId = s.parse().map_err(|_| GraphFileError::Syntax {
                line,
                message: format!("bad node id `{s}`"),
            })?;
            if id >= n {
                return Err(GraphFileError::UnknownNode { line, id, count: n });
            }
            Ok(id)
        };
        let cost = |s: &str| -> Result<CostVec, GraphFileError> {
            s.parse()
                .map_err(|source| GraphFileError::Cost { line, source })
        };

        match keyword {
            "node" => {
                let (id, l) = match rest.as_slice() {
                    [id] => (node(id)?, DEFAULT_NODE_COST),
                    [id, attr] => {
                        let v = attr
                            .strip_prefix("l=")
                            .ok_or_else(|| syntax(format!("expected `l=<cost>`, got `{attr}`")))?;
                        (node(id)?, cost(v)?)
                    }
                    _ => return Err(syntax("expected `node <id> [l=<cost>]`".into())),
                };
                node_cost[id] = l;
            }
            "edge" => {
                let (from, to, c) = match rest.as_slice() {
                    [a, b] => (node(a)?, node(b)?, DEFAULT_EDGE_COST),
                    [a, b, attr] => {
                        let v = attr
                            .strip_prefix("c=")
                            .ok_or_else(|| syntax(format!("expected `c=<cost>`, got `{attr}`")))?;
                        (node(a)?, node(b)?, cost(v)?)
                    }
                    _ => return Err(syntax("expected `edge <from> <to> [c=<cost>]`".into())),
                };
                if edge_lines.insert((from, to), line).is_some() {
                    return Err(GraphFileError::DuplicateEdge { line, from, to });
                }
                edges.push((from, to, c));
            }
            "problem" => {
                let mut uses = None;
                let mut invalidate = Vec::new();
                for attr in &rest {
                    let (key, list) = attr
                        .split_once('=')
                        .ok_or_else(|| syntax(format!("expected `key=ids`, got `{attr}`")))?;
                    let ids = list
                        .split(',')
                        .filter(|s| !s.is_empty())
                        .map(node)
                        .collect::<Result<Vec<_>, _>>()?;
                    match key {
                        "use" => uses = Some(ids),
                        "invalidate" => invalidate = ids,
                        _ => return Err(syntax(format!("unknown problem attribute `{key}`"))),
                    }
                }
                let uses = uses.ok_or_else(|| syntax("problem without `use=`".into()))?;
                raw_problems.push(RawProblem { uses, invalidate });
            }
            other => return Err(syntax(format!("unknown directive `{other}`"))),
        }
    }

    let n = count.ok_or(GraphFileError::MissingHeader)?;
    let mut synthetic_source = None;
    if options.synthetic_source {
        let mut has_pred = vec![false; n];
        for &(_, b, _) in &edges {
            has_pred[b] = true;
        }
        let roots: Vec<NodeId> = (0..n).filter(|&v| !has_pred[v]).collect();
        if roots.len() > 1 {
            node_cost.push(DEFAULT_NODE_COST);
            for r in roots {
                edges.push((n, r, DEFAULT_EDGE_COST));
            }
            synthetic_source = Some(n);
        }
    }

    let cfg = Cfg::new(node_cost, edges)?;
    let problems = raw_problems
        .into_iter()
        .map(|p| ExprProblem::new(&cfg, p.uses, p.invalidate))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LoadedGraph {
        cfg,
        problems,
        synthetic_source,
    })
}

/// Writes a graph (and problems) back in the file format.
pub fn write_cfg(cfg: &Cfg, problems: &[ExprProblem]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "cfg {}", cfg.node_count());
    for v in cfg.nodes() {
        let _ = writeln!(out, "node {v} l={}", cfg.node_cost(v));
    }
    for (i, &(a, b)) in cfg.edges().iter().enumerate() {
        let _ = writeln!(out, "edge {a} {b} c={}", cfg.edge_cost(i));
    }
    for p in problems {
        let join = |s: &crate::cfg::NodeSet| {
            s.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let _ = writeln!(
            out,
            "problem use={} invalidate={}",
            join(p.use_set()),
            join(p.invalidation_set())
        );
    }
    out
}
