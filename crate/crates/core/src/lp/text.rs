//! Plain-text model format.
//!
//! ```text
//! BIOFLOW-LP 1
//! VARS
//! x
//! y
//! BOUNDS
//! x 0.0000000000000000e0 inf
//! y 0.0000000000000000e0 3.0000000000000000e0
//! CONSTRAINTS
//! cover: 1.0000000000000000e0 x 1.0000000000000000e0 y >= 4.0000000000000000e0
//! OBJECTIVE
//! minimize 2.0000000000000000e0 x 3.0000000000000000e0 y
//! END
//! ```
//!
//! Names are single whitespace-free tokens. Empty sections are omitted;
//! variables without a BOUNDS line are `[0, inf)`. Lines starting with `#`
//! are comments.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::model::{LpModel, ObjectiveSense, Sense, VarId};

const HEADER: &str = "BIOFLOW-LP 1";

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}

fn write_terms(out: &mut String, model: &LpModel, terms: &[(VarId, f64)]) {
    for &(v, a) in terms {
        let _ = write!(out, " {} {}", num(a), model.variables[v.0].name);
    }
}

pub fn write_model_text(model: &LpModel) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    if !model.variables.is_empty() {
        out.push_str("VARS\n");
        for v in &model.variables {
            out.push_str(&v.name);
            out.push('\n');
        }
        out.push_str("BOUNDS\n");
        for v in &model.variables {
            let _ = writeln!(out, "{} {} {}", v.name, num(v.lower), num(v.upper));
        }
    }
    if !model.constraints.is_empty() {
        out.push_str("CONSTRAINTS\n");
        for row in &model.constraints {
            let _ = write!(out, "{}:", row.name);
            write_terms(&mut out, model, &row.terms);
            let _ = writeln!(out, " {} {}", row.sense.symbol(), num(row.rhs));
        }
    }
    if !model.objective.is_empty() || model.sense == ObjectiveSense::Maximize {
        out.push_str("OBJECTIVE\n");
        out.push_str(match model.sense {
            ObjectiveSense::Minimize => "minimize",
            ObjectiveSense::Maximize => "maximize",
        });
        write_terms(&mut out, model, &model.objective);
        out.push('\n');
    }
    out.push_str("END\n");
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Start,
    Head,
    Vars,
    Bounds,
    Constraints,
    Objective,
    End,
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(Token { text: &line[s..i], col: s + 1 });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &line[s..], col: s + 1 });
    }
    out
}

struct Parser {
    model: LpModel,
    names: HashMap<String, VarId>,
    line: usize,
}

impl Parser {
    fn err(&self, col: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col,
            message: message.into(),
        }
    }

    fn number(&self, t: &Token) -> Result<f64, ParseError> {
        match t.text.parse::<f64>() {
            Ok(v) if !v.is_nan() => Ok(v),
            _ => Err(self.err(t.col, format!("expected a number, found '{}'", t.text))),
        }
    }

    fn var(&self, t: &Token) -> Result<VarId, ParseError> {
        self.names
            .get(t.text)
            .copied()
            .ok_or_else(|| self.err(t.col, format!("unknown variable '{}'", t.text)))
    }

    /// `coef var` pairs.
    fn terms(&self, toks: &[Token]) -> Result<Vec<(VarId, f64)>, ParseError> {
        let mut terms = Vec::with_capacity(toks.len() / 2);
        for pair in toks.chunks(2) {
            let coef = self.number(&pair[0])?;
            let Some(name) = pair.get(1) else {
                return Err(self.err(pair[0].col, "coefficient without a variable"));
            };
            terms.push((self.var(name)?, coef));
        }
        Ok(terms)
    }
}

pub fn parse_model_text(text: &str) -> Result<LpModel, ParseError> {
    let mut p = Parser {
        model: LpModel::default(),
        names: HashMap::new(),
        line: 0,
    };
    let mut section = Section::Start;
    for (idx, raw) in text.lines().enumerate() {
        p.line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let toks = tokens(raw);
        let first = &toks[0];
        if section == Section::Start {
            if trimmed != HEADER {
                return Err(p.err(first.col, format!("expected header '{HEADER}'")));
            }
            section = Section::Head;
            continue;
        }
        if section == Section::End {
            return Err(p.err(first.col, "content after END"));
        }
        let keyword = match first.text {
            "VARS" => Some(Section::Vars),
            "BOUNDS" => Some(Section::Bounds),
            "CONSTRAINTS" => Some(Section::Constraints),
            "OBJECTIVE" => Some(Section::Objective),
            "END" => Some(Section::End),
            _ => None,
        };
        if let Some(next) = keyword {
            if toks.len() > 1 {
                return Err(p.err(toks[1].col, format!("unexpected '{}' after {}", toks[1].text, first.text)));
            }
            section = next;
            continue;
        }
        match section {
            Section::Start | Section::Head | Section::End => {
                return Err(p.err(first.col, format!("expected a section keyword, found '{}'", first.text)));
            }
            Section::Vars => {
                if toks.len() != 1 {
                    return Err(p.err(toks[1].col, "variable names may not contain spaces"));
                }
                if p.names.contains_key(first.text) {
                    return Err(p.err(first.col, format!("duplicate variable '{}'", first.text)));
                }
                let id = p.model.add_var(first.text, 0.0, f64::INFINITY);
                p.names.insert(first.text.to_string(), id);
            }
            Section::Bounds => {
                if toks.len() != 3 {
                    return Err(p.err(first.col, "expected 'name lower upper'"));
                }
                let id = p.var(first)?;
                let lo = p.number(&toks[1])?;
                let hi = p.number(&toks[2])?;
                p.model.set_bounds(id, lo, hi);
            }
            Section::Constraints => {
                let Some(name) = first.text.strip_suffix(':') else {
                    return Err(p.err(first.col, format!("expected 'name:', found '{}'", first.text)));
                };
                if toks.len() < 3 {
                    return Err(p.err(first.col, "constraint needs a sense and a right-hand side"));
                }
                let sense_tok = &toks[toks.len() - 2];
                let sense = match sense_tok.text {
                    "<=" => Sense::Le,
                    "=" => Sense::Eq,
                    ">=" => Sense::Ge,
                    other => return Err(p.err(sense_tok.col, format!("expected <=, = or >=, found '{other}'"))),
                };
                let rhs_tok = &toks[toks.len() - 1];
                let rhs = p.number(rhs_tok)?;
                if !rhs.is_finite() {
                    return Err(p.err(rhs_tok.col, "right-hand side must be finite"));
                }
                let terms = p.terms(&toks[1..toks.len() - 2])?;
                p.model.add_constraint(name, terms, sense, rhs);
            }
            Section::Objective => {
                let sense = match first.text {
                    "minimize" => ObjectiveSense::Minimize,
                    "maximize" => ObjectiveSense::Maximize,
                    other => return Err(p.err(first.col, format!("expected minimize or maximize, found '{other}'"))),
                };
                let terms = p.terms(&toks[1..])?;
                p.model.set_objective(sense, terms);
            }
        }
    }
    match section {
        Section::End => Ok(p.model),
        _ => Err(ParseError {
            line: p.line + 1,
            col: 1,
            message: if section == Section::Start { "missing header".into() } else { "missing END".into() },
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cover() -> LpModel {
        let mut m = LpModel::default();
        let x = m.add_var("x", 0.0, f64::INFINITY);
        let y = m.add_var("y", 0.0, 3.0);
        m.add_constraint("cover", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 4.0);
        m.add_constraint("xcap", vec![(x, 1.0)], Sense::Le, 3.0);
        m.set_objective(ObjectiveSense::Minimize, vec![(x, 2.0), (y, 3.0)]);
        m
    }

    #[test]
    fn empty_model_is_header_and_end() {
        let text = write_model_text(&LpModel::default());
        assert_eq!(text, "BIOFLOW-LP 1\nEND\n");
        assert_eq!(parse_model_text(&text).unwrap(), LpModel::default());
    }

    #[test]
    fn cover_round_trips() {
        let m = cover();
        assert_eq!(parse_model_text(&write_model_text(&m)).unwrap(), m);
    }

    #[test]
    fn awkward_numbers_round_trip_exactly() {
        let mut m = LpModel::new(ObjectiveSense::Maximize);
        let x = m.add_var("x", f64::NEG_INFINITY, 1.0 / 3.0);
        let y = m.add_var("y", -1e-300, 6.02214076e23);
        m.add_constraint("r", vec![(x, 0.1 + 0.2), (y, -7.0 / 11.0), (x, 1e-17)], Sense::Eq, std::f64::consts::PI);
        m.set_objective(ObjectiveSense::Maximize, vec![(y, f64::MIN_POSITIVE)]);
        let back = parse_model_text(&write_model_text(&m)).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.constraints[0].terms[0].1.to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn unknown_variable_is_named() {
        let text = "BIOFLOW-LP 1\nVARS\nx\nCONSTRAINTS\nc: 1 x 2 zz <= 3\nEND\n";
        let e = parse_model_text(text).unwrap_err();
        assert_eq!((e.line, e.col), (5, 10));
        assert!(e.message.contains("'zz'"), "{e}");
    }

    #[test]
    fn structural_errors_have_positions() {
        assert_eq!(parse_model_text("HELLO\n").unwrap_err().line, 1);
        assert!(parse_model_text("BIOFLOW-LP 1\nVARS\nx\n").unwrap_err().message.contains("END"));
        let e = parse_model_text("BIOFLOW-LP 1\nVARS\nx\nBOUNDS\nx 0 abc\nEND\n").unwrap_err();
        assert_eq!((e.line, e.col), (5, 5));
        let e = parse_model_text("BIOFLOW-LP 1\nVARS\nx\nCONSTRAINTS\nc: 1 x =< 3\nEND\n").unwrap_err();
        assert_eq!(e.col, 8);
    }
}
