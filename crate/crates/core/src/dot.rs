//! Graphviz export for control-flow graphs and tree-decompositions.

use std::fmt::Write as _;

use crate::cfg::{CalcSet, Cfg, ExprProblem, NodeSet};
use crate::treedec::{NiceKind, NiceTreeDec, TreeDec};

/// Optional overlays drawn on top of a CFG.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overlay<'a> {
    pub problem: Option<&'a ExprProblem>,
    pub life: Option<&'a NodeSet>,
    pub calc: Option<&'a CalcSet>,
    /// Per-node labels (e.g. instruction text); node ids are used otherwise.
    pub labels: Option<&'a [String]>,
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Uses are filled grey, invalidating nodes are black with white text, live
/// nodes have dashed contours and calculation edges are bold red.
pub fn dump_dot(cfg: &Cfg, overlay: Overlay<'_>) -> String {
    let mut out = String::from("digraph cfg {\n  node [shape=box];\n");
    for v in cfg.nodes() {
        let label = overlay
            .labels
            .and_then(|l| l.get(v))
            .map(|s| format!("{v}: {s}"))
            .unwrap_or_else(|| v.to_string());
        let mut attrs = vec![format!("label=\"{}\"", escape(&label))];
        let mut style = Vec::new();
        if let Some(p) = overlay.problem {
            if p.invalidation_set().contains(&v) {
                style.push("filled");
                attrs.push("fillcolor=black".into());
                attrs.push("fontcolor=white".into());
            } else if p.use_set().contains(&v) {
                style.push("filled");
                attrs.push("fillcolor=grey".into());
            }
            if p.use_set().contains(&v) {
                attrs.push("peripheries=2".into());
            }
        }
        if overlay.life.is_some_and(|l| l.contains(&v)) {
            style.push("dashed");
        }
        if !style.is_empty() {
            attrs.push(format!("style=\"{}\"", style.join(",")));
        }
        let _ = writeln!(out, "  n{v} [{}];", attrs.join(", "));
    }
    for (i, &(a, b)) in cfg.edges().iter().enumerate() {
        let mut attrs = vec![format!("label=\"{}\"", cfg.edge_cost(i))];
        if overlay.calc.is_some_and(|c| c.contains(a, b)) {
            attrs.push("color=red".into());
            attrs.push("penwidth=2".into());
        }
        let _ = writeln!(out, "  n{a} -> n{b} [{}];", attrs.join(", "));
    }
    out.push_str("}\n");
    out
}

fn bag_label(bag: &[usize]) -> String {
    let items: Vec<String> = bag.iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

pub fn dump_tree_dec_dot(td: &TreeDec) -> String {
    let mut out = String::from("graph treedec {\n  node [shape=ellipse];\n");
    for (i, bag) in td.bags().iter().enumerate() {
        let _ = writeln!(out, "  t{i} [label=\"{}\"];", bag_label(bag));
    }
    for &(a, b) in td.tree_edges() {
        let _ = writeln!(out, "  t{a} -- t{b};");
    }
    out.push_str("}\n");
    out
}

pub fn dump_nice_dot(nice: &NiceTreeDec) -> String {
    let mut out = String::from("digraph nice {\n  node [shape=box];\n");
    for (i, node) in nice.nodes().iter().enumerate() {
        let kind = match node.kind {
            NiceKind::Leaf => "leaf".to_string(),
            NiceKind::Introduce(v) => format!("introduce {v}"),
            NiceKind::Forget(v) => format!("forget {v}"),
            NiceKind::Join => "join".to_string(),
        };
        let _ = writeln!(out, "  d{i} [label=\"{kind}\\n{}\"];", bag_label(&node.bag));
        for &c in &node.children {
            let _ = writeln!(out, "  d{i} -> d{c};");
        }
    }
    out.push_str("}\n");
    out
}
