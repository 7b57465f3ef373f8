//! Tokenizer, recursive-descent parser and canonical printer for the model
//! DSL.
//!
//! Grammar (whitespace-separated, UTF-8):
//!
//! ```text
//! model := expr "d=" <int>
//! expr  := x<int>                      -- shorthand for (var i)
//!        | "(" "const" ("+1"|"-1") ")"
//!        | "(" "var" <int> ")"
//!        | "(" "not" expr ")"
//!        | "(" ("and"|"or"|"xor") expr+ ")"
//!        | "(" "maj" expr expr expr ")"
//!        | "(" "tree" <int> expr expr ")"
//!        | "(" "table" <hex> ")"       -- ceil(2^d / 4) digits, MSB = all-+1 corner
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::model::expr::{Expr, ModelExpr, TableBits};
use crate::model::Sign;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Atom(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

/// Parser-side expression; table literals stay as raw hex until the
/// declared dimension is known.
enum PExpr {
    Const(Sign),
    Var(usize),
    Not(Box<PExpr>),
    And(Vec<PExpr>),
    Or(Vec<PExpr>),
    Xor(Vec<PExpr>),
    Maj(Box<[PExpr; 3]>),
    Tree {
        feature: usize,
        if_neg: Box<PExpr>,
        if_pos: Box<PExpr>,
    },
    Table {
        hex: String,
        line: usize,
        col: usize,
    },
}

fn err_at(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

fn tokenize(text: &str) -> Vec<Spanned> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut atom = String::new();
    let mut atom_start = (1usize, 1usize);

    let flush = |atom: &mut String, start: (usize, usize), out: &mut Vec<Spanned>| {
        if !atom.is_empty() {
            out.push(Spanned {
                tok: Tok::Atom(std::mem::take(atom)),
                line: start.0,
                col: start.1,
            });
        }
    };

    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                flush(&mut atom, atom_start, &mut out);
                out.push(Spanned {
                    tok: if ch == '(' { Tok::LParen } else { Tok::RParen },
                    line,
                    col,
                });
                col += 1;
            }
            '\n' => {
                flush(&mut atom, atom_start, &mut out);
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                flush(&mut atom, atom_start, &mut out);
                col += 1;
            }
            c => {
                if atom.is_empty() {
                    atom_start = (line, col);
                }
                atom.push(c);
                col += 1;
            }
        }
    }
    flush(&mut atom, atom_start, &mut out);
    out
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn end_pos(&self) -> (usize, usize) {
        self.toks
            .last()
            .map(|t| (t.line, t.col + 1))
            .unwrap_or((1, 1))
    }

    fn expect_atom(&mut self, what: &str) -> Result<(String, usize, usize)> {
        match self.next() {
            Some(Spanned {
                tok: Tok::Atom(a),
                line,
                col,
            }) => Ok((a, line, col)),
            Some(Spanned { line, col, .. }) => Err(err_at(line, col, format!("expected {what}"))),
            None => {
                let (l, c) = self.end_pos();
                Err(err_at(
                    l,
                    c,
                    format!("unexpected end of input, expected {what}"),
                ))
            }
        }
    }

    fn parse_expr(&mut self) -> Result<PExpr> {
        match self.next() {
            Some(Spanned {
                tok: Tok::Atom(a),
                line,
                col,
            }) => parse_var_shorthand(&a)
                .ok_or_else(|| err_at(line, col, format!("expected expression, found '{a}'"))),
            Some(Spanned {
                tok: Tok::LParen, ..
            }) => self.parse_form(),
            Some(Spanned {
                tok: Tok::RParen,
                line,
                col,
            }) => Err(err_at(line, col, "unexpected ')'")),
            None => {
                let (l, c) = self.end_pos();
                Err(err_at(l, c, "unexpected end of input, expected expression"))
            }
        }
    }

    /// Parses the body of a parenthesized form; the '(' is already consumed.
    fn parse_form(&mut self) -> Result<PExpr> {
        let (head, line, col) = self.expect_atom("an operator")?;
        let expr = match head.as_str() {
            "const" => {
                let (v, l, c) = self.expect_atom("'+1' or '-1'")?;
                let sign = match v.as_str() {
                    "+1" | "1" => Sign::Plus,
                    "-1" => Sign::Minus,
                    _ => return Err(err_at(l, c, format!("expected '+1' or '-1', found '{v}'"))),
                };
                PExpr::Const(sign)
            }
            "var" => {
                let (v, l, c) = self.expect_atom("a variable index")?;
                let idx = v
                    .parse::<usize>()
                    .map_err(|_| err_at(l, c, format!("invalid variable index '{v}'")))?;
                PExpr::Var(idx)
            }
            "not" => PExpr::Not(Box::new(self.parse_expr()?)),
            "and" | "or" | "xor" => {
                let mut args = Vec::new();
                while !matches!(
                    self.peek(),
                    Some(Spanned {
                        tok: Tok::RParen,
                        ..
                    }) | None
                ) {
                    args.push(self.parse_expr()?);
                }
                if args.is_empty() {
                    return Err(err_at(
                        line,
                        col,
                        format!("'{head}' needs at least one argument"),
                    ));
                }
                match head.as_str() {
                    "and" => PExpr::And(args),
                    "or" => PExpr::Or(args),
                    _ => PExpr::Xor(args),
                }
            }
            "maj" => {
                let a = self.parse_expr()?;
                let b = self.parse_expr()?;
                let c = self.parse_expr()?;
                PExpr::Maj(Box::new([a, b, c]))
            }
            "tree" => {
                let (v, l, c) = self.expect_atom("a feature index")?;
                let feature = v
                    .parse::<usize>()
                    .map_err(|_| err_at(l, c, format!("invalid feature index '{v}'")))?;
                let if_neg = Box::new(self.parse_expr()?);
                let if_pos = Box::new(self.parse_expr()?);
                PExpr::Tree {
                    feature,
                    if_neg,
                    if_pos,
                }
            }
            "table" => {
                let (hex, l, c) = self.expect_atom("a hex label string")?;
                if hex.is_empty() || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
                    return Err(err_at(l, c, format!("'{hex}' is not a hex label string")));
                }
                PExpr::Table {
                    hex,
                    line: l,
                    col: c,
                }
            }
            other => {
                return Err(err_at(line, col, format!("unknown operator '{other}'")));
            }
        };
        self.close_form(expr)
    }

    fn close_form(&mut self, expr: PExpr) -> Result<PExpr> {
        match self.next() {
            Some(Spanned {
                tok: Tok::RParen, ..
            }) => Ok(expr),
            Some(Spanned { line, col, .. }) => Err(err_at(line, col, "expected ')'")),
            None => {
                let (l, c) = self.end_pos();
                Err(err_at(l, c, "unexpected end of input, expected ')'"))
            }
        }
    }
}

fn parse_var_shorthand(atom: &str) -> Option<PExpr> {
    let rest = atom.strip_prefix('x')?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse::<usize>().ok().map(PExpr::Var)
}

fn resolve(p: PExpr, dimension: usize) -> Result<Expr> {
    Ok(match p {
        PExpr::Const(s) => Expr::Const(s),
        PExpr::Var(i) => Expr::Var(i),
        PExpr::Not(e) => Expr::Not(Box::new(resolve(*e, dimension)?)),
        PExpr::And(es) => Expr::And(resolve_all(es, dimension)?),
        PExpr::Or(es) => Expr::Or(resolve_all(es, dimension)?),
        PExpr::Xor(es) => Expr::Xor(resolve_all(es, dimension)?),
        PExpr::Maj(es) => {
            let [a, b, c] = *es;
            Expr::Maj(Box::new([
                resolve(a, dimension)?,
                resolve(b, dimension)?,
                resolve(c, dimension)?,
            ]))
        }
        PExpr::Tree {
            feature,
            if_neg,
            if_pos,
        } => Expr::Tree {
            feature,
            if_neg: Box::new(resolve(*if_neg, dimension)?),
            if_pos: Box::new(resolve(*if_pos, dimension)?),
        },
        PExpr::Table { hex, line, col } => {
            Expr::Table(TableBits::from_hex(dimension, &hex).map_err(|e| match e {
                Error::InvalidInput(msg) => err_at(line, col, msg),
                other => other,
            })?)
        }
    })
}

fn resolve_all(es: Vec<PExpr>, dimension: usize) -> Result<Vec<Expr>> {
    es.into_iter().map(|e| resolve(e, dimension)).collect()
}

/// Parses a complete model: expression followed by `d=<int>`.
pub(super) fn parse_model(text: &str) -> Result<ModelExpr> {
    let toks = tokenize(text);
    let mut p = Parser { toks, pos: 0 };
    let expr = p.parse_expr()?;
    let (decl, line, col) = p.expect_atom("a dimension declaration 'd=<int>'")?;
    let dim_str = decl
        .strip_prefix("d=")
        .ok_or_else(|| err_at(line, col, format!("expected 'd=<int>', found '{decl}'")))?;
    let dimension = dim_str
        .parse::<usize>()
        .map_err(|_| err_at(line, col, format!("invalid dimension '{dim_str}'")))?;
    if let Some(extra) = p.peek() {
        return Err(err_at(
            extra.line,
            extra.col,
            "trailing input after dimension declaration",
        ));
    }
    let root = resolve(expr, dimension)?;
    ModelExpr::new(root, dimension)
}

/// Emits the canonical form: lowercase operators, `x<i>` variable shorthand,
/// lowercase hex tables.
pub(super) fn print_expr(expr: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match expr {
        Expr::Const(s) => write!(f, "(const {s})"),
        Expr::Var(i) => write!(f, "x{i}"),
        Expr::Not(e) => {
            write!(f, "(not ")?;
            print_expr(e, f)?;
            write!(f, ")")
        }
        Expr::And(es) | Expr::Or(es) | Expr::Xor(es) => {
            let head = match expr {
                Expr::And(_) => "and",
                Expr::Or(_) => "or",
                _ => "xor",
            };
            write!(f, "({head}")?;
            for e in es {
                write!(f, " ")?;
                print_expr(e, f)?;
            }
            write!(f, ")")
        }
        Expr::Maj(es) => {
            write!(f, "(maj")?;
            for e in es.iter() {
                write!(f, " ")?;
                print_expr(e, f)?;
            }
            write!(f, ")")
        }
        Expr::Tree {
            feature,
            if_neg,
            if_pos,
        } => {
            write!(f, "(tree {feature} ")?;
            print_expr(if_neg, f)?;
            write!(f, " ")?;
            print_expr(if_pos, f)?;
            write!(f, ")")
        }
        Expr::Table(t) => write!(f, "(table {})", t.to_hex()),
    }
}
