use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ir::{BinOp, Inst, Instruction, Machine, Operand, Program, UnOp};

/// Random structured programs: straight-line code, if/else, and loops with
/// reserved counters, so every program terminates. A few expressions are
/// drawn repeatedly to create redundancy; some divide by variables that
/// may be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramGenerator {
    pub seed: u64,
    /// Statements per block, before nesting.
    pub statements: usize,
    pub variables: usize,
    pub max_depth: usize,
    pub memory_size: usize,
}

impl ProgramGenerator {
    pub fn new(seed: u64) -> ProgramGenerator {
        ProgramGenerator {
            seed,
            statements: 5,
            variables: 5,
            max_depth: 2,
            memory_size: 16,
        }
    }

    /// Random variable values (small, so zero divisors occur) and memory.
    pub fn input(&self, program: &Program, seed: u64) -> Machine {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ self.seed.rotate_left(17));
        let vars = program
            .variables()
            .into_iter()
            .filter(|v| v.starts_with('v'))
            .map(|v| (v, rng.gen_range(-3..=8)))
            .collect::<Vec<_>>();
        let memory = (0..self.memory_size)
            .map(|_| rng.gen_range(-50..=50))
            .collect();
        Machine::new(vars, memory)
    }
}

struct Builder {
    rng: ChaCha8Rng,
    vars: Vec<String>,
    menu: Vec<Inst>,
    out: Vec<Instruction>,
    pending: Vec<String>,
    labels: usize,
    counters: usize,
}

impl Builder {
    fn emit(&mut self, inst: Inst) {
        self.out.push(Instruction {
            labels: std::mem::take(&mut self.pending),
            inst,
        });
    }

    fn label(&mut self) -> String {
        self.labels += 1;
        format!("L{}", self.labels)
    }

    fn var(&mut self) -> String {
        self.vars.choose(&mut self.rng).expect("nonempty").clone()
    }

    fn operand(&mut self) -> Operand {
        if self.rng.gen_bool(0.2) {
            Operand::Const(self.rng.gen_range(-2..=9))
        } else {
            Operand::Var(self.var())
        }
    }

    fn fresh_expr(&mut self, dst: String) -> Inst {
        match self.rng.gen_range(0..10) {
            0..=5 => Inst::Binary {
                dst,
                op: *BinOp::ALL.choose(&mut self.rng).expect("nonempty"),
                lhs: self.operand(),
                rhs: self.operand(),
            },
            6 => Inst::Unary {
                dst,
                op: if self.rng.gen() { UnOp::Neg } else { UnOp::Not },
                src: Operand::Var(self.var()),
            },
            _ => Inst::Load {
                dst,
                addr: Operand::Var(self.var()),
            },
        }
    }

    fn with_dst(inst: &Inst, dst: String) -> Inst {
        let mut inst = inst.clone();
        match &mut inst {
            Inst::Binary { dst: d, .. }
            | Inst::Unary { dst: d, .. }
            | Inst::Load { dst: d, .. } => *d = dst,
            _ => unreachable!("menu holds computations"),
        }
        inst
    }

    fn simple(&mut self) {
        let dst = self.var();
        match self.rng.gen_range(0..10) {
            0..=4 => {
                let pick = self.menu.choose(&mut self.rng).expect("nonempty").clone();
                self.emit(Builder::with_dst(&pick, dst));
            }
            5..=6 => {
                let inst = self.fresh_expr(dst);
                self.emit(inst);
            }
            7 => {
                let src = self.operand();
                self.emit(Inst::Assign { dst, src });
            }
            _ => {
                let addr = Operand::Var(self.var());
                let value = self.operand();
                self.emit(Inst::Store { addr, value });
            }
        }
    }

    fn block(&mut self, len: usize, depth: usize) {
        for _ in 0..len {
            let roll = self.rng.gen_range(0..10);
            if depth == 0 || roll < 6 {
                self.simple();
            } else if roll < 8 {
                self.if_else(len, depth - 1);
            } else {
                self.counted_loop(len, depth - 1);
            }
        }
    }

    fn if_else(&mut self, len: usize, depth: usize) {
        let (then, end) = (self.label(), self.label());
        let cond = Operand::Var(self.var());
        self.emit(Inst::Branch {
            cond,
            target: then.clone(),
        });
        let n = self.rng.gen_range(0..=len / 2 + 1);
        self.block(n, depth);
        self.emit(Inst::Jump {
            target: end.clone(),
        });
        self.pending.push(then);
        let n = self.rng.gen_range(1..=len / 2 + 1);
        self.block(n, depth);
        self.pending.push(end);
    }

    fn counted_loop(&mut self, len: usize, depth: usize) {
        let counter = format!("k{}", self.counters);
        self.counters += 1;
        let top_tested: bool = self.rng.gen();
        // A bottom-tested loop runs its body before the first test.
        let trips = self.rng.gen_range(if top_tested { 0 } else { 1 }..=3);
        self.emit(Inst::Assign {
            dst: counter.clone(),
            src: Operand::Const(trips),
        });
        let k = Operand::Var(counter.clone());
        let step = Inst::Binary {
            dst: counter,
            op: BinOp::Sub,
            lhs: k.clone(),
            rhs: Operand::Const(1),
        };
        let n = self.rng.gen_range(1..=len / 2 + 1);
        let (head, body, exit) = (self.label(), self.label(), self.label());
        if top_tested {
            self.pending.push(head.clone());
            self.emit(Inst::Branch {
                cond: k,
                target: body.clone(),
            });
            self.emit(Inst::Jump {
                target: exit.clone(),
            });
            self.pending.push(body);
            self.block(n, depth);
            self.emit(step);
            self.emit(Inst::Jump { target: head });
            self.pending.push(exit);
        } else {
            self.pending.push(head.clone());
            self.block(n, depth);
            self.emit(step);
            self.emit(Inst::Branch {
                cond: k,
                target: head,
            });
        }
    }
}

pub fn generate_program(gen: &ProgramGenerator) -> Program {
    let vars: Vec<String> = (0..gen.variables.max(1)).map(|i| format!("v{i}")).collect();
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(gen.seed),
        vars,
        menu: Vec::new(),
        out: Vec::new(),
        pending: Vec::new(),
        labels: 0,
        counters: 0,
    };
    let menu_size = b.rng.gen_range(2..=4);
    b.menu = (0..menu_size)
        .map(|_| b.fresh_expr(String::new()))
        .collect();
    b.block(gen.statements.max(1), gen.max_depth);
    b.emit(Inst::Ret);
    Program::new(b.out)
}
