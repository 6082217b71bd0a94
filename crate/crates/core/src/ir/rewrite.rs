use std::collections::BTreeSet;

use std::collections::HashMap;

use super::{Candidate, ExprKey, Inst, Instruction, IrCfg, NodeKind, Operand, Program};
use crate::cfg::{Cfg, NodeId, DEFAULT_EDGE_COST};
use crate::dp::LospreSolution;

/// Fresh temporaries are named `__lospre<N>`, fresh labels `__lospre_l<N>`.
pub const TEMP_PREFIX: &str = "__lospre";
const LABEL_PREFIX: &str = "__lospre_l";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error("calculation edge {from} -> {to} is not in the graph")]
    NoSuchEdge { from: NodeId, to: NodeId },
    #[error("node {node} is a use but does not compute `{key}`")]
    NotAComputation { node: NodeId, key: String },
    #[error("the graph has {graph} instructions but the program has {program}")]
    SizeMismatch { graph: usize, program: usize },
}

fn next_suffix<'a>(names: impl Iterator<Item = &'a str>, prefix: &str) -> usize {
    names
        .filter_map(|n| n.strip_prefix(prefix)?.parse::<usize>().ok())
        .map(|k| k + 1)
        .max()
        .unwrap_or(0)
}

/// Where an instruction of a rewritten program comes from, in terms of the
/// graph of the program before the rewrite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Original(usize),
    /// Placed on this edge (or, for a `ret` closing the body, on the edge
    /// from the last instruction to the exit).
    Inserted {
        from: NodeId,
        to: NodeId,
    },
}

#[derive(Default)]
struct Slot {
    /// Runs before the instruction's labels: reached only from the entry edge.
    entry: Option<(Instruction, Origin)>,
    /// Takes over the instruction's labels, so every predecessor runs it.
    own: Option<(Instruction, Origin)>,
    after: Option<(Instruction, Origin)>,
    retarget: Option<String>,
}

/// Introduces a fresh temporary for `candidate`, computes it on every
/// calculation edge and turns each occurrence into a copy from it.
///
/// Edges into the exit never need a computation and are skipped. A taken
/// branch edge gets a trampoline block appended to the program.
pub fn rewrite(
    program: &Program,
    ir: &IrCfg,
    candidate: &Candidate,
    solution: &LospreSolution,
) -> Result<Program, RewriteError> {
    rewrite_traced(program, ir, candidate, solution).map(|(p, _)| p)
}

/// As [`rewrite`], also returning the [`Origin`] of every output instruction.
pub fn rewrite_traced(
    program: &Program,
    ir: &IrCfg,
    candidate: &Candidate,
    solution: &LospreSolution,
) -> Result<(Program, Vec<Origin>), RewriteError> {
    if ir.instr_count != program.len() {
        return Err(RewriteError::SizeMismatch {
            graph: ir.instr_count,
            program: program.len(),
        });
    }
    let vars = program.variables();
    let temp = format!(
        "{TEMP_PREFIX}{}",
        next_suffix(vars.iter().map(String::as_str), TEMP_PREFIX)
    );
    let mut label_no = next_suffix(
        program
            .instrs
            .iter()
            .flat_map(|i| i.labels.iter().map(String::as_str)),
        LABEL_PREFIX,
    );
    let compute = |from, to| {
        (
            Instruction::new(candidate.key.to_inst(&temp)),
            Origin::Inserted { from, to },
        )
    };

    let mut slots: Vec<Slot> = (0..program.len()).map(|_| Slot::default()).collect();
    let mut trampolines: Vec<(Instruction, Origin)> = Vec::new();
    let edges: BTreeSet<(NodeId, NodeId)> = ir.cfg.edges().iter().copied().collect();
    for &(from, to) in &solution.calc_set.edges {
        if !edges.contains(&(from, to)) {
            return Err(RewriteError::NoSuchEdge { from, to });
        }
        let NodeKind::Instr(target) = ir.kind(to) else {
            continue;
        };
        let i = match ir.kind(from) {
            NodeKind::Instr(i) => i,
            _ => {
                slots[target].entry = Some(compute(from, to));
                continue;
            }
        };
        let fallthrough = i + 1 == target;
        match &program.instrs[i].inst {
            Inst::Jump { .. } => slots[i].own = Some(compute(from, to)),
            Inst::Branch { target: l, .. } => {
                let taken = program.label_index(l) == Some(target);
                if taken && fallthrough {
                    slots[i].own = Some(compute(from, to));
                } else if fallthrough {
                    slots[i].after = Some(compute(from, to));
                } else {
                    let fresh = format!("{LABEL_PREFIX}{label_no}");
                    label_no += 1;
                    let (mut head, origin) = compute(from, to);
                    head.labels.push(fresh.clone());
                    trampolines.push((head, origin));
                    trampolines.push((Instruction::new(Inst::Jump { target: l.clone() }), origin));
                    slots[i].retarget = Some(fresh);
                }
            }
            _ => slots[i].after = Some(compute(from, to)),
        }
    }

    let mut out = Vec::with_capacity(program.len() + 2 * solution.calc_set.len());
    for (i, (instr, slot)) in program.instrs.iter().zip(slots).enumerate() {
        let mut instr = instr.clone();
        if candidate.occurrences.contains(&ir.node_of(i)) {
            if ExprKey::of(&instr.inst).as_ref() != Some(&candidate.key) {
                return Err(RewriteError::NotAComputation {
                    node: ir.node_of(i),
                    key: candidate.key.to_string(),
                });
            }
            let dst = instr.inst.def().expect("computations assign").to_string();
            instr.inst = Inst::Assign {
                dst,
                src: Operand::Var(temp.clone()),
            };
        }
        if let (Some(fresh), Inst::Branch { target, .. }) = (slot.retarget, &mut instr.inst) {
            *target = fresh;
        }
        out.extend(slot.entry);
        if let Some((mut own, origin)) = slot.own {
            own.labels = std::mem::take(&mut instr.labels);
            out.push((own, origin));
        }
        out.push((instr, Origin::Original(i)));
        out.extend(slot.after);
    }
    if !trampolines.is_empty() {
        if out.last().is_some_and(|(i, _)| i.inst.falls_through()) {
            let origin = Origin::Inserted {
                from: program.len(),
                to: ir.exit(),
            };
            out.push((Instruction::new(Inst::Ret), origin));
        }
        out.extend(trampolines);
    }
    let (instrs, origins) = out.into_iter().unzip();
    let program = Program {
        instrs,
        directives: program.directives.clone(),
    };
    Ok((program, origins))
}

#[derive(Clone, Copy)]
enum OldPlace {
    Node(NodeId),
    Edge(NodeId, NodeId),
}

/// Costs for the graph of a rewritten program, taken from the graph before
/// the rewrite: original nodes and edges keep theirs, and both halves of a
/// split edge cost what the edge did. An instruction inserted on `x -> y`
/// costs what `y` does.
pub fn transfer_costs(old: &IrCfg, origins: &[Origin], new: &IrCfg) -> Cfg {
    let place = |v: NodeId| match new.kind(v) {
        NodeKind::Entry => OldPlace::Node(IrCfg::ENTRY),
        NodeKind::Exit => OldPlace::Node(old.exit()),
        NodeKind::Instr(k) => match origins[k] {
            Origin::Original(i) => OldPlace::Node(old.node_of(i)),
            Origin::Inserted { from, to } => OldPlace::Edge(from, to),
        },
    };
    let old_cost: HashMap<(NodeId, NodeId), _> = old
        .cfg
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &edge)| (edge, old.cfg.edge_cost(e)))
        .collect();
    let lookup = |a, b| old_cost.get(&(a, b)).copied().unwrap_or(DEFAULT_EDGE_COST);
    let edge_costs = new
        .cfg
        .edges()
        .iter()
        .map(|&(a, b)| match (place(a), place(b)) {
            (OldPlace::Node(p), OldPlace::Node(q)) => lookup(p, q),
            // Into an instruction that took over the labels of `x`.
            (OldPlace::Node(p), OldPlace::Edge(x, _)) if p != x => lookup(p, x),
            (OldPlace::Node(_), OldPlace::Edge(x, y)) | (OldPlace::Edge(x, y), _) => lookup(x, y),
        })
        .collect();
    let node_costs = new
        .cfg
        .nodes()
        .map(|v| match place(v) {
            OldPlace::Node(p) => old.cfg.node_cost(p),
            OldPlace::Edge(_, y) => old.cfg.node_cost(y),
        })
        .collect();
    new.cfg
        .with_edge_costs(edge_costs)
        .with_node_costs(node_costs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::{CalcSet, NodeSet};
    use crate::cost::CostVec;
    use crate::ir::{build_cfg, derive_problems, parse_ir};

    fn solution(calc: &[(NodeId, NodeId)], life: &[NodeId]) -> LospreSolution {
        LospreSolution {
            life_set: life.iter().copied().collect::<NodeSet>(),
            calc_set: CalcSet {
                edges: calc.iter().copied().collect(),
            },
            cost: CostVec::ZERO,
            extended: None,
        }
    }

    fn rewrite_first(text: &str, calc: &[(NodeId, NodeId)], life: &[NodeId]) -> Program {
        let p = parse_ir(text).unwrap();
        let ir = build_cfg(&p).unwrap();
        let (c, _) = &derive_problems(&p, &ir)[0];
        rewrite(&p, &ir, c, &solution(calc, life)).unwrap()
    }

    #[test]
    fn entry_edge_and_inline() {
        let p = rewrite_first("L: x = a + b\ny = a + b\nret\n", &[(0, 1)], &[2]);
        assert_eq!(
            p.to_string(),
            "    __lospre0 = a + b\nL: x = __lospre0\n    y = __lospre0\n    ret\n"
        );
    }

    #[test]
    fn fresh_names_avoid_collisions() {
        let p = rewrite_first("__lospre3 = a + b\n__lospre_l0: ret\n", &[(0, 1)], &[]);
        assert!(p.to_string().contains("__lospre4 = a + b"));
    }

    #[test]
    fn jump_edge_takes_labels() {
        let text = "x = 1\nL: goto M\nx = 2\nM: y = a + b\nret\n";
        let p = rewrite_first(text, &[(2, 4)], &[]);
        assert_eq!(p.instrs[1].labels, vec!["L"]);
        assert_eq!(p.instrs[1].inst.to_string(), "__lospre0 = a + b");
        assert!(p.instrs[2].labels.is_empty());
        assert_eq!(p.instrs[2].inst.to_string(), "goto M");
    }

    #[test]
    fn taken_branch_gets_a_trampoline() {
        let text = "if c goto T\ny = a + b\nret\nT: z = a + b\nret\n";
        // 0 -> 1(branch) -> 2 (fallthrough), 1 -> 4 (taken).
        let p = rewrite_first(text, &[(1, 2), (1, 4)], &[]);
        let s = p.to_string();
        assert!(
            s.starts_with("    if c goto __lospre_l0\n    __lospre0 = a + b\n"),
            "{s}"
        );
        assert!(
            s.ends_with("__lospre_l0: __lospre0 = a + b\n    goto T\n"),
            "{s}"
        );
        assert_eq!(parse_ir(&s).unwrap(), p);
    }

    #[test]
    fn trampoline_after_fallthrough_end_adds_ret() {
        let text = "if c goto T\nx = 1\nT: z = a + b\n";
        let p = rewrite_first(text, &[(1, 3), (2, 3)], &[]);
        let s = p.to_string();
        assert!(s.contains("z = __lospre0\n    ret\n__lospre_l0:"), "{s}");
    }

    #[test]
    fn rejects_foreign_edges() {
        let p = parse_ir("x = a + b\nret\n").unwrap();
        let ir = build_cfg(&p).unwrap();
        let (c, _) = &derive_problems(&p, &ir)[0];
        assert_eq!(
            rewrite(&p, &ir, c, &solution(&[(2, 1)], &[])),
            Err(RewriteError::NoSuchEdge { from: 2, to: 1 })
        );
    }
}
