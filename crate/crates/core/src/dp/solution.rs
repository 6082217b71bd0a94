//! Plain-text solution files:
//!
//! ```text
//! cost [1,1]
//! life 1
//! calc 0->1
//! ```
//!
//! Extended solutions add `left` and `right` lines in the same format as `life`.

use std::fmt::Write as _;

use super::{LospreSolution, OperandLife};
use crate::cfg::{CalcSet, NodeSet};
use crate::cost::CostVec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("solution line {line}: {message}")]
pub struct SolutionParseError {
    pub line: usize,
    pub message: String,
}

fn join_ids(set: &NodeSet) -> String {
    set.iter().map(|v| format!(" {v}")).collect()
}

pub fn write_solution(solution: &LospreSolution) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "cost {}", solution.cost);
    let _ = writeln!(out, "life{}", join_ids(&solution.life_set));
    let calc: String = solution
        .calc_set
        .edges
        .iter()
        .map(|(a, b)| format!(" {a}->{b}"))
        .collect();
    let _ = writeln!(out, "calc{calc}");
    if let Some(ops) = &solution.extended {
        let _ = writeln!(out, "left{}", join_ids(&ops.left));
        let _ = writeln!(out, "right{}", join_ids(&ops.right));
    }
    out
}

pub fn parse_solution(text: &str) -> Result<LospreSolution, SolutionParseError> {
    let mut cost = None;
    let mut life = None;
    let mut calc = None;
    let mut left = None;
    let mut right = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| SolutionParseError { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, rest) = content
            .split_once(char::is_whitespace)
            .unwrap_or((content, ""));
        let rest = rest.trim();
        let ids = || -> Result<NodeSet, SolutionParseError> {
            rest.split_whitespace()
                .map(|t| t.parse().map_err(|_| err(format!("bad node id `{t}`"))))
                .collect()
        };
        let slot = match key {
            "cost" => {
                let c: CostVec = rest.parse().map_err(|e| err(format!("{e}")))?;
                if cost.replace(c).is_some() {
                    return Err(err("duplicate `cost` line".into()));
                }
                continue;
            }
            "calc" => {
                let mut set = CalcSet::default();
                for t in rest.split_whitespace() {
                    let parsed = t
                        .split_once("->")
                        .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)));
                    match parsed {
                        Some(e) => {
                            set.edges.insert(e);
                        }
                        None => return Err(err(format!("bad edge `{t}`"))),
                    }
                }
                if calc.replace(set).is_some() {
                    return Err(err("duplicate `calc` line".into()));
                }
                continue;
            }
            "life" => &mut life,
            "left" => &mut left,
            "right" => &mut right,
            other => return Err(err(format!("unknown key `{other}`"))),
        };
        if slot.replace(ids()?).is_some() {
            return Err(err(format!("duplicate `{key}` line")));
        }
    }
    let missing = |what: &str| SolutionParseError {
        line: text.lines().count(),
        message: format!("missing `{what}` line"),
    };
    let extended = match (left, right) {
        (Some(left), Some(right)) => Some(OperandLife { left, right }),
        (None, None) => None,
        (None, _) => return Err(missing("left")),
        (_, None) => return Err(missing("right")),
    };
    Ok(LospreSolution {
        cost: cost.ok_or_else(|| missing("cost"))?,
        life_set: life.ok_or_else(|| missing("life"))?,
        calc_set: calc.ok_or_else(|| missing("calc"))?,
        extended,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut s = LospreSolution {
            life_set: NodeSet::from([1, 4]),
            calc_set: CalcSet {
                edges: [(0, 1), (2, 3)].into_iter().collect(),
            },
            cost: CostVec::new(2, 2),
            extended: None,
        };
        let text = write_solution(&s);
        assert_eq!(text, "cost [2,2]\nlife 1 4\ncalc 0->1 2->3\n");
        assert_eq!(parse_solution(&text).unwrap(), s);

        s.extended = Some(OperandLife {
            left: NodeSet::from([2]),
            right: NodeSet::new(),
        });
        assert_eq!(parse_solution(&write_solution(&s)).unwrap(), s);
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse_solution("cost [1,0]\nlife x\ncalc\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse_solution("cost [1,0]\ncalc\n").is_err());
        assert!(parse_solution("cost [1,0]\nlife\ncalc 1-2\n").is_err());
    }
}
