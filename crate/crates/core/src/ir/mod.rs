//! A small three-address IR, its control-flow graph, per-expression lospre
//! problems, the rewrite that applies a solution, and an interpreter.
//!
//! One instruction per line:
//!
//! ```text
//! [label:] x = y            x = y OP z      x = -y | x = ~y
//!          x = *p           *p = y          if x goto L
//!          goto L           ret
//! ```
//!
//! `OP` is one of `+ - * / << >> & | ^`; operands are identifiers or integer
//! literals; `#` starts a comment. A label may also stand alone on its line.
//! Cost directives override the unit defaults of the graph:
//!
//! ```text
//! !edgecost FROM TO [p,s]     FROM/TO: a label, `entry` or `exit`
//! !nodecost AT [p,s]          AT: a label
//! !edgecost default [p,s]
//! !nodecost default [p,s]
//! ```

mod build;
mod candidates;
mod copyprop;
mod interp;
mod parse;
mod rewrite;

use std::fmt;

use crate::cost::CostVec;

pub use build::{build_cfg, BuildError, IrCfg, NodeKind};
pub use candidates::{derive_problems, Candidate, ExprKey};
pub use copyprop::propagate_copies;
pub use interp::{interpret, Machine, Outcome};
pub use parse::{parse_ir, ParseError};
pub use rewrite::{rewrite, rewrite_traced, transfer_costs, Origin, RewriteError, TEMP_PREFIX};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operand {
    Var(String),
    Const(i64),
}

impl Operand {
    pub fn var(&self) -> Option<&str> {
        match self {
            Operand::Var(v) => Some(v),
            Operand::Const(_) => None,
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Var(v) => f.write_str(v),
            Operand::Const(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Shl,
    Shr,
    And,
    Or,
    Xor,
}

impl BinOp {
    pub const ALL: [BinOp; 9] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Shl,
        BinOp::Shr,
        BinOp::And,
        BinOp::Or,
        BinOp::Xor,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Xor => "^",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        BinOp::ALL.into_iter().find(|op| op.symbol() == s)
    }

    pub fn is_commutative(self) -> bool {
        matches!(
            self,
            BinOp::Add | BinOp::Mul | BinOp::And | BinOp::Or | BinOp::Xor
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnOp {
    Neg,
    Not,
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Neg => "-",
            UnOp::Not => "~",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inst {
    Assign {
        dst: String,
        src: Operand,
    },
    Binary {
        dst: String,
        op: BinOp,
        lhs: Operand,
        rhs: Operand,
    },
    Unary {
        dst: String,
        op: UnOp,
        src: Operand,
    },
    Load {
        dst: String,
        addr: Operand,
    },
    Store {
        addr: Operand,
        value: Operand,
    },
    Branch {
        cond: Operand,
        target: String,
    },
    Jump {
        target: String,
    },
    Ret,
}

impl Inst {
    /// The variable written, if any.
    pub fn def(&self) -> Option<&str> {
        match self {
            Inst::Assign { dst, .. }
            | Inst::Binary { dst, .. }
            | Inst::Unary { dst, .. }
            | Inst::Load { dst, .. } => Some(dst),
            _ => None,
        }
    }

    pub fn operands(&self) -> Vec<&Operand> {
        match self {
            Inst::Assign { src, .. } | Inst::Unary { src, .. } => vec![src],
            Inst::Binary { lhs, rhs, .. } => vec![lhs, rhs],
            Inst::Load { addr, .. } => vec![addr],
            Inst::Store { addr, value } => vec![addr, value],
            Inst::Branch { cond, .. } => vec![cond],
            Inst::Jump { .. } | Inst::Ret => vec![],
        }
    }

    pub(crate) fn operands_mut(&mut self) -> Vec<&mut Operand> {
        match self {
            Inst::Assign { src, .. } | Inst::Unary { src, .. } => vec![src],
            Inst::Binary { lhs, rhs, .. } => vec![lhs, rhs],
            Inst::Load { addr, .. } => vec![addr],
            Inst::Store { addr, value } => vec![addr, value],
            Inst::Branch { cond, .. } => vec![cond],
            Inst::Jump { .. } | Inst::Ret => vec![],
        }
    }

    /// Whether control can continue with the next instruction.
    pub fn falls_through(&self) -> bool {
        !matches!(self, Inst::Jump { .. } | Inst::Ret)
    }
}

impl fmt::Display for Inst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inst::Assign { dst, src } => write!(f, "{dst} = {src}"),
            Inst::Binary { dst, op, lhs, rhs } => write!(f, "{dst} = {lhs} {} {rhs}", op.symbol()),
            Inst::Unary {
                dst,
                op,
                src: src @ Operand::Const(_),
            } => write!(f, "{dst} = {} {src}", op.symbol()),
            Inst::Unary { dst, op, src } => write!(f, "{dst} = {}{src}", op.symbol()),
            Inst::Load { dst, addr } => write!(f, "{dst} = *{addr}"),
            Inst::Store { addr, value } => write!(f, "*{addr} = {value}"),
            Inst::Branch { cond, target } => write!(f, "if {cond} goto {target}"),
            Inst::Jump { target } => write!(f, "goto {target}"),
            Inst::Ret => f.write_str("ret"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instruction {
    pub labels: Vec<String>,
    pub inst: Inst,
}

impl Instruction {
    pub fn new(inst: Inst) -> Instruction {
        Instruction {
            labels: Vec::new(),
            inst,
        }
    }

    pub fn labeled(label: &str, inst: Inst) -> Instruction {
        Instruction {
            labels: vec![label.to_string()],
            inst,
        }
    }
}

/// Endpoint of an `!edgecost` directive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CostAnchor {
    Entry,
    Exit,
    Label(String),
}

impl fmt::Display for CostAnchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostAnchor::Entry => f.write_str("entry"),
            CostAnchor::Exit => f.write_str("exit"),
            CostAnchor::Label(l) => f.write_str(l),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Directive {
    DefaultEdgeCost(CostVec),
    DefaultNodeCost(CostVec),
    EdgeCost {
        from: CostAnchor,
        to: CostAnchor,
        cost: CostVec,
    },
    NodeCost {
        at: String,
        cost: CostVec,
    },
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Directive::DefaultEdgeCost(c) => write!(f, "!edgecost default {c}"),
            Directive::DefaultNodeCost(c) => write!(f, "!nodecost default {c}"),
            Directive::EdgeCost { from, to, cost } => write!(f, "!edgecost {from} {to} {cost}"),
            Directive::NodeCost { at, cost } => write!(f, "!nodecost {at} {cost}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub instrs: Vec<Instruction>,
    pub directives: Vec<Directive>,
}

impl Program {
    pub fn new(instrs: Vec<Instruction>) -> Program {
        Program {
            instrs,
            directives: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    /// Index of the instruction carrying `label`.
    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.instrs
            .iter()
            .position(|i| i.labels.iter().any(|l| l == label))
    }

    /// Every variable name read or written, in order of first appearance.
    pub fn variables(&self) -> Vec<String> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for instr in &self.instrs {
            let names = instr
                .inst
                .operands()
                .into_iter()
                .filter_map(Operand::var)
                .chain(instr.inst.def());
            for name in names {
                if seen.insert(name.to_string()) {
                    out.push(name.to_string());
                }
            }
        }
        out
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.directives {
            writeln!(f, "{d}")?;
        }
        for instr in &self.instrs {
            let (last, rest) = match instr.labels.split_last() {
                Some((last, rest)) => (Some(last), rest),
                None => (None, &[][..]),
            };
            for l in rest {
                writeln!(f, "{l}:")?;
            }
            match last {
                Some(l) => writeln!(f, "{l}: {}", instr.inst)?,
                None => writeln!(f, "    {}", instr.inst)?,
            }
        }
        Ok(())
    }
}

/// Both arms of a branch index the same array element, computing `i << 2`,
/// `a + _` and the load twice.
pub const ARRAY_BRANCH: &str = "\
# void f(bool b, int i) { if (b) c = a[i] + 8; else c = a[i] - 13; }
      if b goto then
      t1 = i << 2
      t2 = a + t1
      t3 = *t2
      t4 = t3 - 13
      *c = t4
      goto end
then: t1 = i << 2
      t2 = a + t1
      t3 = *t2
      t4 = t3 + 8
      *c = t4
end:  ret
";
