use std::collections::HashMap;

use super::{Inst, Operand, Program};

/// Block-local copy propagation: after `x = y`, later reads of `x` in the
/// same block read `y` until either is reassigned. Labels and control
/// transfers end a block. The copies themselves are kept.
pub fn propagate_copies(program: &Program) -> Program {
    let mut out = program.clone();
    let mut copies: HashMap<String, Operand> = HashMap::new();
    for instr in &mut out.instrs {
        if !instr.labels.is_empty() {
            copies.clear();
        }
        for op in instr.inst.operands_mut() {
            if let Operand::Var(v) = op {
                if let Some(src) = copies.get(v.as_str()) {
                    *op = src.clone();
                }
            }
        }
        if let Some(d) = instr.inst.def() {
            copies.retain(|k, src| k != d && src.var() != Some(d));
            if let Inst::Assign { dst, src } = &instr.inst {
                if src.var() != Some(dst) {
                    copies.insert(dst.clone(), src.clone());
                }
            }
        }
        if matches!(
            instr.inst,
            Inst::Branch { .. } | Inst::Jump { .. } | Inst::Ret
        ) {
            copies.clear();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_ir;

    fn run(text: &str) -> String {
        propagate_copies(&parse_ir(text).unwrap()).to_string()
    }

    #[test]
    fn forwards_within_a_block() {
        assert_eq!(
            run("t = s\nu = t + 1\n*t = u\nret\n"),
            "    t = s\n    u = s + 1\n    *s = u\n    ret\n"
        );
    }

    #[test]
    fn stops_at_redefinition() {
        assert_eq!(
            run("t = s\ns = 4\nu = t\nret\n"),
            "    t = s\n    s = 4\n    u = t\n    ret\n"
        );
        assert_eq!(
            run("t = s\nt = 4\nu = t\nret\n"),
            "    t = s\n    t = 4\n    u = 4\n    ret\n"
        );
    }

    #[test]
    fn stops_at_block_boundaries() {
        assert_eq!(
            run("t = s\nL: u = t\nret\n"),
            "    t = s\nL: u = t\n    ret\n"
        );
        assert_eq!(
            run("t = s\nif c goto L\nu = t\nL: ret\n"),
            "    t = s\n    if c goto L\n    u = t\nL: ret\n"
        );
    }

    #[test]
    fn chains_resolve_to_the_root() {
        assert_eq!(
            run("a = 3\nb = a\nc = b * b\nret\n"),
            "    a = 3\n    b = 3\n    c = 3 * 3\n    ret\n"
        );
    }
}
