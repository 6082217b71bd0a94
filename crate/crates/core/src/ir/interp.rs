use std::collections::{BTreeMap, HashMap};

use super::{BinOp, Inst, Operand, Program, UnOp, TEMP_PREFIX};

/// Variables default to zero. Addresses index `memory` modulo its length.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Machine {
    pub vars: BTreeMap<String, i64>,
    pub memory: Vec<i64>,
}

impl Machine {
    pub fn new(vars: impl IntoIterator<Item = (String, i64)>, memory: Vec<i64>) -> Machine {
        Machine {
            vars: vars.into_iter().collect(),
            memory,
        }
    }

    fn read(&self, op: &Operand) -> i64 {
        match op {
            Operand::Const(c) => *c,
            Operand::Var(v) => self.vars.get(v).copied().unwrap_or(0),
        }
    }

    fn cell(&self, addr: i64) -> Option<usize> {
        let len = i64::try_from(self.memory.len()).ok().filter(|&l| l > 0)?;
        Some(addr.rem_euclid(len) as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Returned(Machine),
    /// Division by zero, or memory access with no memory.
    Trapped {
        at: usize,
    },
    StepLimit,
}

impl Outcome {
    /// Equal final states ignoring the compiler's temporaries; any two traps
    /// are equivalent.
    pub fn equivalent(&self, other: &Outcome) -> bool {
        let strip = |m: &Machine| -> (Vec<(String, i64)>, Vec<i64>) {
            let vars = m
                .vars
                .iter()
                .filter(|(k, _)| !k.starts_with(TEMP_PREFIX))
                .map(|(k, v)| (k.clone(), *v))
                .collect();
            (vars, m.memory.clone())
        };
        match (self, other) {
            (Outcome::Returned(a), Outcome::Returned(b)) => strip(a) == strip(b),
            (Outcome::Trapped { .. }, Outcome::Trapped { .. }) => true,
            (Outcome::StepLimit, Outcome::StepLimit) => true,
            _ => false,
        }
    }
}

fn binary(op: BinOp, a: i64, b: i64) -> Option<i64> {
    Some(match op {
        BinOp::Add => a.wrapping_add(b),
        BinOp::Sub => a.wrapping_sub(b),
        BinOp::Mul => a.wrapping_mul(b),
        BinOp::Div => {
            if b == 0 {
                return None;
            }
            a.wrapping_div(b)
        }
        BinOp::Shl => a.wrapping_shl(b as u32),
        BinOp::Shr => a.wrapping_shr(b as u32),
        BinOp::And => a & b,
        BinOp::Or => a | b,
        BinOp::Xor => a ^ b,
    })
}

/// Runs `program` from its first instruction. Wrapping 64-bit arithmetic;
/// shift amounts are taken modulo 64; a zero divisor traps.
pub fn interpret(program: &Program, mut machine: Machine, step_limit: usize) -> Outcome {
    let labels: HashMap<&str, usize> = program
        .instrs
        .iter()
        .enumerate()
        .flat_map(|(i, instr)| instr.labels.iter().map(move |l| (l.as_str(), i)))
        .collect();
    let mut pc = 0;
    for _ in 0..step_limit {
        let Some(instr) = program.instrs.get(pc) else {
            return Outcome::Returned(machine);
        };
        let mut next = pc + 1;
        match &instr.inst {
            Inst::Assign { dst, src } => {
                let v = machine.read(src);
                machine.vars.insert(dst.clone(), v);
            }
            Inst::Binary { dst, op, lhs, rhs } => {
                match binary(*op, machine.read(lhs), machine.read(rhs)) {
                    Some(v) => {
                        machine.vars.insert(dst.clone(), v);
                    }
                    None => return Outcome::Trapped { at: pc },
                }
            }
            Inst::Unary { dst, op, src } => {
                let x = machine.read(src);
                let v = match op {
                    UnOp::Neg => x.wrapping_neg(),
                    UnOp::Not => !x,
                };
                machine.vars.insert(dst.clone(), v);
            }
            Inst::Load { dst, addr } => match machine.cell(machine.read(addr)) {
                Some(c) => {
                    let v = machine.memory[c];
                    machine.vars.insert(dst.clone(), v);
                }
                None => return Outcome::Trapped { at: pc },
            },
            Inst::Store { addr, value } => match machine.cell(machine.read(addr)) {
                Some(c) => machine.memory[c] = machine.read(value),
                None => return Outcome::Trapped { at: pc },
            },
            Inst::Branch { cond, target } => {
                if machine.read(cond) != 0 {
                    next = labels[target.as_str()];
                }
            }
            Inst::Jump { target } => next = labels[target.as_str()],
            Inst::Ret => return Outcome::Returned(machine),
        }
        pc = next;
    }
    Outcome::StepLimit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{parse_ir, ARRAY_BRANCH};

    fn vars(pairs: &[(&str, i64)]) -> Vec<(String, i64)> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn array_branch_indexes_memory() {
        let p = parse_ir(ARRAY_BRANCH).unwrap();
        let mem: Vec<i64> = (0..64).map(|x| 100 + x).collect();
        let run = |b| {
            interpret(
                &p,
                Machine::new(
                    vars(&[("b", b), ("i", 3), ("a", 4), ("c", 50)]),
                    mem.clone(),
                ),
                100,
            )
        };
        let Outcome::Returned(taken) = run(1) else {
            panic!()
        };
        assert_eq!(taken.memory[50], 100 + 16 + 8);
        let Outcome::Returned(not_taken) = run(0) else {
            panic!()
        };
        assert_eq!(not_taken.memory[50], 100 + 16 - 13);
    }

    #[test]
    fn traps_and_limits() {
        let p = parse_ir("x = 1 / y\nret\n").unwrap();
        assert_eq!(
            interpret(&p, Machine::default(), 10),
            Outcome::Trapped { at: 0 }
        );
        let p = parse_ir("L: goto L\n").unwrap();
        assert_eq!(interpret(&p, Machine::default(), 10), Outcome::StepLimit);
        let p = parse_ir("x = *p\nret\n").unwrap();
        assert!(matches!(
            interpret(&p, Machine::default(), 10),
            Outcome::Trapped { .. }
        ));
    }

    #[test]
    fn wrapping_arithmetic() {
        let p = parse_ir("a = x * x\nb = m / n\nc = 1 << 65\nd = -m\nret\n").unwrap();
        let start = Machine::new(vars(&[("x", i64::MAX), ("m", i64::MIN), ("n", -1)]), vec![]);
        let Outcome::Returned(end) = interpret(&p, start, 10) else {
            panic!()
        };
        assert_eq!(end.vars["a"], 1);
        assert_eq!(end.vars["b"], i64::MIN);
        assert_eq!(end.vars["c"], 2);
        assert_eq!(end.vars["d"], i64::MIN);
    }

    #[test]
    fn temporaries_are_ignored_by_equivalence() {
        let a = Outcome::Returned(Machine::new(vars(&[("x", 1)]), vec![]));
        let b = Outcome::Returned(Machine::new(vars(&[("x", 1), ("__lospre0", 9)]), vec![]));
        assert!(a.equivalent(&b));
        assert!(!a.equivalent(&Outcome::Trapped { at: 0 }));
    }
}
