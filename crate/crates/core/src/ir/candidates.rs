use std::collections::HashMap;
use std::fmt;

use super::{BinOp, Inst, IrCfg, Operand, Program, UnOp};
use crate::cfg::{ExprProblem, NodeSet};

/// A syntactic expression; commutative operands are stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExprKey {
    Binary(BinOp, Operand, Operand),
    Unary(UnOp, Operand),
    Load(Operand),
}

impl ExprKey {
    /// The expression an instruction computes, if it computes one.
    pub fn of(inst: &Inst) -> Option<ExprKey> {
        match inst {
            Inst::Binary { op, lhs, rhs, .. } => {
                let (a, b) = if op.is_commutative() && rhs < lhs {
                    (rhs, lhs)
                } else {
                    (lhs, rhs)
                };
                Some(ExprKey::Binary(*op, a.clone(), b.clone()))
            }
            Inst::Unary { op, src, .. } => Some(ExprKey::Unary(*op, src.clone())),
            Inst::Load { addr, .. } => Some(ExprKey::Load(addr.clone())),
            _ => None,
        }
    }

    pub fn operands(&self) -> Vec<&Operand> {
        match self {
            ExprKey::Binary(_, a, b) => vec![a, b],
            ExprKey::Unary(_, a) | ExprKey::Load(a) => vec![a],
        }
    }

    /// `dst = <expression>`.
    pub fn to_inst(&self, dst: &str) -> Inst {
        let dst = dst.to_string();
        match self {
            ExprKey::Binary(op, lhs, rhs) => Inst::Binary {
                dst,
                op: *op,
                lhs: lhs.clone(),
                rhs: rhs.clone(),
            },
            ExprKey::Unary(op, src) => Inst::Unary {
                dst,
                op: *op,
                src: src.clone(),
            },
            ExprKey::Load(addr) => Inst::Load {
                dst,
                addr: addr.clone(),
            },
        }
    }

    /// Loads may fault on a computed address and division on a zero divisor.
    pub fn safety_required(&self) -> bool {
        matches!(self, ExprKey::Load(_) | ExprKey::Binary(BinOp::Div, _, _))
    }

    pub fn reads_memory(&self) -> bool {
        matches!(self, ExprKey::Load(_))
    }
}

impl fmt::Display for ExprKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprKey::Binary(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            ExprKey::Unary(op, a) => write!(f, "{}{a}", op.symbol()),
            ExprKey::Load(a) => write!(f, "*{a}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub key: ExprKey,
    /// Graph nodes computing the expression.
    pub occurrences: NodeSet,
    pub safety_required: bool,
}

/// One problem per distinct expression, in order of first occurrence. An
/// instruction invalidates an expression when it assigns one of its operands;
/// every store invalidates every load.
pub fn derive_problems(program: &Program, ir: &IrCfg) -> Vec<(Candidate, ExprProblem)> {
    let mut order: Vec<ExprKey> = Vec::new();
    let mut uses: HashMap<ExprKey, NodeSet> = HashMap::new();
    let mut defs: HashMap<&str, NodeSet> = HashMap::new();
    let mut stores = NodeSet::new();
    for (i, instr) in program.instrs.iter().enumerate() {
        let node = ir.node_of(i);
        if let Some(key) = ExprKey::of(&instr.inst) {
            uses.entry(key.clone())
                .or_insert_with(|| {
                    order.push(key.clone());
                    NodeSet::new()
                })
                .insert(node);
        }
        if let Some(d) = instr.inst.def() {
            defs.entry(d).or_default().insert(node);
        }
        if matches!(instr.inst, Inst::Store { .. }) {
            stores.insert(node);
        }
    }

    order
        .into_iter()
        .map(|key| {
            let occurrences = uses.remove(&key).expect("recorded");
            let mut inval = NodeSet::new();
            for v in key.operands().into_iter().filter_map(Operand::var) {
                inval.extend(defs.get(v).into_iter().flatten().copied());
            }
            if key.reads_memory() {
                inval.extend(stores.iter().copied());
            }
            let problem = ExprProblem::new(&ir.cfg, occurrences.iter().copied(), inval)
                .expect("instruction nodes are never the entry");
            let candidate = Candidate {
                safety_required: key.safety_required(),
                key,
                occurrences,
            };
            (candidate, problem)
        })
        .collect()
}
