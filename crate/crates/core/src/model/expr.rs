//! Model AST and evaluation.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Instance, Sign};

/// Cap on dimensions that require materialized label storage.
pub const TABLE_DIMENSION_CAP: usize = 20;

/// A packed 2^d-entry label literal; bit c is 1 iff the instance with code c
/// maps to +1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableBits {
    dimension: usize,
    words: Vec<u64>,
}

impl TableBits {
    pub fn new(dimension: usize, words: Vec<u64>) -> Result<TableBits> {
        if dimension > TABLE_DIMENSION_CAP {
            return Err(Error::DimensionOverCap {
                what: "truth-table literal",
                cap: TABLE_DIMENSION_CAP,
                got: dimension,
            });
        }
        let need = TableBits::word_count(dimension);
        if words.len() != need {
            return Err(Error::InvalidInput(format!(
                "table literal needs {need} words for d={dimension}, got {}",
                words.len()
            )));
        }
        Ok(TableBits { dimension, words })
    }

    fn word_count(dimension: usize) -> usize {
        (1usize << dimension).div_ceil(64)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn get(&self, code: usize) -> Sign {
        Sign::from_bool((self.words[code / 64] >> (code % 64)) & 1 == 1)
    }

    /// Number of hex digits in the canonical serialization.
    pub fn hex_digits(dimension: usize) -> usize {
        (1usize << dimension).div_ceil(4)
    }

    /// Parses the canonical hex form: MSB of the hex number is the label of
    /// the all-+1 corner (the highest code).
    pub fn from_hex(dimension: usize, hex: &str) -> Result<TableBits> {
        if dimension > TABLE_DIMENSION_CAP {
            return Err(Error::DimensionOverCap {
                what: "truth-table literal",
                cap: TABLE_DIMENSION_CAP,
                got: dimension,
            });
        }
        let expect = TableBits::hex_digits(dimension);
        if hex.len() != expect {
            return Err(Error::InvalidInput(format!(
                "table literal for d={dimension} needs exactly {expect} hex digits, got {}",
                hex.len()
            )));
        }
        let entries = 1usize << dimension;
        let mut words = vec![0u64; TableBits::word_count(dimension)];
        for (pos, ch) in hex.chars().enumerate() {
            let nib = ch.to_digit(16).ok_or_else(|| {
                Error::InvalidInput(format!("invalid hex digit '{ch}' in table literal"))
            })? as u64;
            // digit `pos` (0 = leftmost) covers codes [4*(expect-1-pos), +4)
            let base = 4 * (expect - 1 - pos);
            for b in 0..4 {
                let code = base + b;
                if (nib >> b) & 1 == 1 {
                    if code >= entries {
                        return Err(Error::InvalidInput(format!(
                            "table literal sets a label beyond the {entries} entries of d={dimension}"
                        )));
                    }
                    words[code / 64] |= 1 << (code % 64);
                }
            }
        }
        Ok(TableBits { dimension, words })
    }

    pub fn to_hex(&self) -> String {
        let digits = TableBits::hex_digits(self.dimension);
        let entries = 1usize << self.dimension;
        let mut out = String::with_capacity(digits);
        for pos in 0..digits {
            let base = 4 * (digits - 1 - pos);
            let mut nib = 0u32;
            for b in 0..4 {
                let code = base + b;
                if code < entries && self.get(code).is_plus() {
                    nib |= 1 << b;
                }
            }
            out.push(char::from_digit(nib, 16).unwrap());
        }
        out
    }
}

/// Model expression node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Sign),
    Var(usize),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Xor(Vec<Expr>),
    Maj(Box<[Expr; 3]>),
    /// Branch on a feature: left subtree for -1, right for +1.
    Tree {
        feature: usize,
        if_neg: Box<Expr>,
        if_pos: Box<Expr>,
    },
    Table(TableBits),
}

impl Expr {
    fn eval(&self, x: &Instance) -> Sign {
        match self {
            Expr::Const(s) => *s,
            Expr::Var(i) => x.get(*i),
            Expr::Not(e) => e.eval(x).flip(),
            Expr::And(es) => Sign::from_bool(es.iter().all(|e| e.eval(x).is_plus())),
            Expr::Or(es) => Sign::from_bool(es.iter().any(|e| e.eval(x).is_plus())),
            // xor is the product of signs
            Expr::Xor(es) => es.iter().fold(Sign::Plus, |acc, e| acc * e.eval(x)),
            Expr::Maj(es) => {
                let sum: i32 = es.iter().map(|e| e.eval(x).as_i8() as i32).sum();
                Sign::from_bool(sum > 0)
            }
            Expr::Tree {
                feature,
                if_neg,
                if_pos,
            } => {
                if x.get(*feature).is_plus() {
                    if_pos.eval(x)
                } else {
                    if_neg.eval(x)
                }
            }
            Expr::Table(t) => t.get(x.code()),
        }
    }

    /// Largest variable index mentioned, if any.
    fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Not(e) => e.max_var(),
            Expr::And(es) | Expr::Or(es) | Expr::Xor(es) => {
                es.iter().filter_map(|e| e.max_var()).max()
            }
            Expr::Maj(es) => es.iter().filter_map(|e| e.max_var()).max(),
            Expr::Tree {
                feature,
                if_neg,
                if_pos,
            } => [Some(*feature), if_neg.max_var(), if_pos.max_var()]
                .into_iter()
                .flatten()
                .max(),
            Expr::Table(_) => None,
        }
    }

    /// Checks table literal dimensions against the declared dimension.
    fn check_tables(&self, dimension: usize) -> Result<()> {
        match self {
            Expr::Table(t) => {
                if t.dimension() != dimension {
                    return Err(Error::DimensionMismatch {
                        expected: dimension,
                        got: t.dimension(),
                    });
                }
                Ok(())
            }
            Expr::Const(_) | Expr::Var(_) => Ok(()),
            Expr::Not(e) => e.check_tables(dimension),
            Expr::And(es) | Expr::Or(es) | Expr::Xor(es) => {
                es.iter().try_for_each(|e| e.check_tables(dimension))
            }
            Expr::Maj(es) => es.iter().try_for_each(|e| e.check_tables(dimension)),
            Expr::Tree { if_neg, if_pos, .. } => {
                if_neg.check_tables(dimension)?;
                if_pos.check_tables(dimension)
            }
        }
    }
}

/// A parsed model: expression plus declared dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelExpr {
    root: Expr,
    dimension: usize,
}

impl ModelExpr {
    /// Validates variable ranges and table sizes against the declared
    /// dimension.
    pub fn new(root: Expr, dimension: usize) -> Result<ModelExpr> {
        if dimension == 0 {
            return Err(Error::invalid_param("dimension", "must be at least 1"));
        }
        if let Some(max) = root.max_var() {
            if max >= dimension {
                return Err(Error::VariableOutOfRange {
                    index: max,
                    dimension,
                });
            }
        }
        root.check_tables(dimension)?;
        Ok(ModelExpr { root, dimension })
    }

    /// Parses the s-expression DSL, e.g. `(xor x3 x7) d=10`.
    pub fn parse(text: &str) -> Result<ModelExpr> {
        super::parse::parse_model(text)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn evaluate(&self, x: &Instance) -> Result<Sign> {
        if x.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.dimension(),
            });
        }
        Ok(self.root.eval(x))
    }

    pub(crate) fn evaluate_unchecked(&self, x: &Instance) -> Sign {
        self.root.eval(x)
    }
}

impl fmt::Display for ModelExpr {
    /// The canonical form; parsing it back yields an equivalent model.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        super::parse::print_expr(&self.root, f)?;
        write!(f, " d={}", self.dimension)
    }
}
