use std::collections::BTreeMap;

use super::{BinOp, CostAnchor, Directive, Inst, Instruction, Operand, Program, UnOp};
use crate::cost::CostVec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: undefined label `{label}`")]
    UndefinedLabel { line: usize, label: String },
    #[error("line {line}: duplicate label `{label}`")]
    DuplicateLabel { line: usize, label: String },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::UndefinedLabel { line, .. }
            | ParseError::DuplicateLabel { line, .. } => *line,
        }
    }
}

const RESERVED: [&str; 6] = ["if", "goto", "ret", "entry", "exit", "default"];

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&s)
}

struct LineParser {
    line: usize,
}

impl LineParser {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            line: self.line,
            message: message.into(),
        })
    }

    fn ident(&self, s: &str) -> Result<String, ParseError> {
        if is_ident(s) {
            Ok(s.to_string())
        } else {
            self.err(format!("expected an identifier, found `{s}`"))
        }
    }

    fn operand(&self, s: &str) -> Result<Operand, ParseError> {
        if let Ok(c) = s.parse::<i64>() {
            return Ok(Operand::Const(c));
        }
        if is_ident(s) {
            return Ok(Operand::Var(s.to_string()));
        }
        self.err(format!("expected a variable or integer, found `{s}`"))
    }

    fn cost(&self, s: &str) -> Result<CostVec, ParseError> {
        s.trim().parse().or_else(|e| self.err(format!("{e}")))
    }

    fn anchor(&self, s: &str) -> Result<CostAnchor, ParseError> {
        match s {
            "entry" => Ok(CostAnchor::Entry),
            "exit" => Ok(CostAnchor::Exit),
            _ => self.ident(s).map(CostAnchor::Label),
        }
    }

    fn directive(&self, text: &str) -> Result<Directive, ParseError> {
        let mut parts = text.splitn(2, char::is_whitespace);
        let keyword = parts.next().unwrap_or("");
        let rest = parts.next().unwrap_or("").trim();
        let (first, after) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
        let after = after.trim();
        match keyword {
            "!edgecost" if first == "default" => Ok(Directive::DefaultEdgeCost(self.cost(after)?)),
            "!nodecost" if first == "default" => Ok(Directive::DefaultNodeCost(self.cost(after)?)),
            "!edgecost" => {
                let (second, cost) = after.split_once(char::is_whitespace).unwrap_or((after, ""));
                Ok(Directive::EdgeCost {
                    from: self.anchor(first)?,
                    to: self.anchor(second)?,
                    cost: self.cost(cost)?,
                })
            }
            "!nodecost" => Ok(Directive::NodeCost {
                at: self.ident(first)?,
                cost: self.cost(after)?,
            }),
            other => self.err(format!("unknown directive `{other}`")),
        }
    }

    fn inst(&self, text: &str) -> Result<Inst, ParseError> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        match tokens.as_slice() {
            ["ret"] => return Ok(Inst::Ret),
            ["goto", target] => {
                return Ok(Inst::Jump {
                    target: self.ident(target)?,
                })
            }
            ["if", cond, "goto", target] => {
                return Ok(Inst::Branch {
                    cond: self.operand(cond)?,
                    target: self.ident(target)?,
                })
            }
            ["if", ..] | ["goto", ..] | ["ret", ..] => {
                return self.err(format!("malformed `{text}`"))
            }
            _ => {}
        }
        let Some((lhs, rhs)) = text.split_once('=') else {
            return self.err(format!("unrecognized instruction `{text}`"));
        };
        let (lhs, rhs) = (lhs.trim(), rhs.trim());
        if let Some(addr) = lhs.strip_prefix('*') {
            return Ok(Inst::Store {
                addr: self.operand(addr.trim())?,
                value: self.operand(rhs)?,
            });
        }
        let dst = self.ident(lhs)?;
        let tokens: Vec<&str> = rhs.split_whitespace().collect();
        match tokens.as_slice() {
            [single] => {
                if let Some(addr) = single.strip_prefix('*') {
                    return Ok(Inst::Load {
                        dst,
                        addr: self.operand(addr)?,
                    });
                }
                if let Ok(src) = self.operand(single) {
                    return Ok(Inst::Assign { dst, src });
                }
                for (prefix, op) in [("-", UnOp::Neg), ("~", UnOp::Not)] {
                    if let Some(src) = single.strip_prefix(prefix) {
                        return Ok(Inst::Unary {
                            dst,
                            op,
                            src: self.operand(src)?,
                        });
                    }
                }
                self.err(format!("cannot parse `{rhs}`"))
            }
            ["*", addr] => Ok(Inst::Load {
                dst,
                addr: self.operand(addr)?,
            }),
            ["-", src] => Ok(Inst::Unary {
                dst,
                op: UnOp::Neg,
                src: self.operand(src)?,
            }),
            ["~", src] => Ok(Inst::Unary {
                dst,
                op: UnOp::Not,
                src: self.operand(src)?,
            }),
            [lhs, op, rhs] => match BinOp::from_symbol(op) {
                Some(op) => Ok(Inst::Binary {
                    dst,
                    op,
                    lhs: self.operand(lhs)?,
                    rhs: self.operand(rhs)?,
                }),
                None => self.err(format!("unknown operator `{op}`")),
            },
            _ => self.err(format!("cannot parse `{rhs}`")),
        }
    }
}

/// Parses a program and checks that every referenced label is defined once.
pub fn parse_ir(text: &str) -> Result<Program, ParseError> {
    let mut program = Program::default();
    let mut pending: Vec<String> = Vec::new();
    let mut label_line: BTreeMap<String, usize> = BTreeMap::new();
    let mut references: Vec<(usize, String)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let p = LineParser { line: i + 1 };
        let mut content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('!') {
            let d = p.directive(content)?;
            match &d {
                Directive::EdgeCost { from, to, .. } => {
                    for a in [from, to] {
                        if let CostAnchor::Label(l) = a {
                            references.push((p.line, l.clone()));
                        }
                    }
                }
                Directive::NodeCost { at, .. } => references.push((p.line, at.clone())),
                _ => {}
            }
            program.directives.push(d);
            continue;
        }
        if let Some((head, tail)) = content.split_once(':') {
            let label = p.ident(head.trim())?;
            if label_line.insert(label.clone(), p.line).is_some() {
                return Err(ParseError::DuplicateLabel {
                    line: p.line,
                    label,
                });
            }
            pending.push(label);
            content = tail.trim();
            if content.is_empty() {
                continue;
            }
        }
        let inst = p.inst(content)?;
        if let Inst::Jump { target } | Inst::Branch { target, .. } = &inst {
            references.push((p.line, target.clone()));
        }
        program.instrs.push(Instruction {
            labels: std::mem::take(&mut pending),
            inst,
        });
    }
    if let Some(label) = pending.pop() {
        return Err(ParseError::Syntax {
            line: label_line[&label],
            message: format!("label `{label}` is not followed by an instruction"),
        });
    }
    if let Some((line, label)) = references
        .into_iter()
        .find(|(_, l)| !label_line.contains_key(l))
    {
        return Err(ParseError::UndefinedLabel { line, label });
    }
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_binop() {
        let p = parse_ir("t1 = i << 2").unwrap();
        assert_eq!(
            p.instrs,
            vec![Instruction::new(Inst::Binary {
                dst: "t1".into(),
                op: BinOp::Shl,
                lhs: Operand::Var("i".into()),
                rhs: Operand::Const(2),
            })]
        );
    }

    #[test]
    fn every_form() {
        let text = "\
start: x = 5
       y = -x
       z = ~ y
       w = - 3
       a = *p
       b = * p
       *p = a
L:
M:     if a goto L
       goto M
       ret
";
        let p = parse_ir(text).unwrap();
        assert_eq!(p.len(), 10);
        assert_eq!(
            p.instrs[3].inst,
            Inst::Unary {
                dst: "w".into(),
                op: UnOp::Neg,
                src: Operand::Const(3)
            }
        );
        assert_eq!(p.instrs[7].labels, vec!["L".to_string(), "M".to_string()]);
        assert_eq!(p.label_index("M"), Some(7));
        assert_eq!(parse_ir(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn directives() {
        let text = "!edgecost default [2,0]\n!edgecost entry L [5,0]\n!nodecost L [0,3]\nL: ret\n";
        let p = parse_ir(text).unwrap();
        assert_eq!(p.directives.len(), 3);
        assert_eq!(parse_ir(&p.to_string()).unwrap(), p);
        assert!(matches!(
            parse_ir("!nodecost nowhere [0,1]\nret\n"),
            Err(ParseError::UndefinedLabel { line: 1, .. })
        ));
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_ir("x = 1\ngoto missing\n"),
            Err(ParseError::UndefinedLabel {
                line: 2,
                label: "missing".into()
            })
        );
        assert_eq!(
            parse_ir("L: x = 1\nL: ret\n"),
            Err(ParseError::DuplicateLabel {
                line: 2,
                label: "L".into()
            })
        );
        assert_eq!(parse_ir("x = 1\nx = y %% z\n").unwrap_err().line(), 2);
        assert!(parse_ir("goto = 3").is_err());
        assert!(parse_ir("x = 1\nend:\n").is_err());
    }
}
