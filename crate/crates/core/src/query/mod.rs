//! Hardness query language.
//!
//! A query combines base terms `agg(eset[, class=name])` with numeric
//! literals using `+ - *` and at most one top-level comparison per
//! parenthesized group. Comparisons evaluate to an indicator in `{0, 1}`.
//!
//! ```text
//! query    := sum [ cmp_op sum ]
//! sum      := product { ('+' | '-') product }
//! product  := unary { '*' unary }
//! unary    := '-' unary | primary
//! primary  := number | term | '(' query ')'
//! term     := aggregator '(' error_set [ ',' 'class' '=' name ] ')'
//! aggregator := 'total' | 'pixeladj' | 'occaware'
//! error_set  := 'fp' | 'fn' | 'false'
//! cmp_op   := '>' | '>=' | '<' | '<=' | '=='
//! name     := identifier | number | '"' chars '"'
//! ```
//!
//! Keywords are case-insensitive and whitespace is ignored.

mod eval;
mod parser;

use std::fmt;

use crate::error::{Error, Result};
use crate::matching::ErrorKind;
use crate::model::{ClassId, ClassTable};

pub use eval::{eval_occaware, eval_pixeladj, eval_total, ErrorSets, Frame};
pub use parser::{parse_query, parse_query_file, NamedQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Aggregator {
    Total,
    PixelAdj,
    OccAware,
}

impl Aggregator {
    pub const ALL: [Aggregator; 3] = [Aggregator::Total, Aggregator::PixelAdj, Aggregator::OccAware];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Total => "total",
            Self::PixelAdj => "pixeladj",
            Self::OccAware => "occaware",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseTerm<C> {
    pub aggregator: Aggregator,
    pub error_set: ErrorKind,
    pub class_filter: Option<C>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Gt,
    Ge,
    Lt,
    Le,
    Eq,
}

impl CompareOp {
    fn symbol(&self) -> &'static str {
        match self {
            Self::Gt => ">",
            Self::Ge => ">=",
            Self::Lt => "<",
            Self::Le => "<=",
            Self::Eq => "==",
        }
    }

    pub fn holds(&self, lhs: f64, rhs: f64) -> bool {
        match self {
            Self::Gt => lhs > rhs,
            Self::Ge => lhs >= rhs,
            Self::Lt => lhs < rhs,
            Self::Le => lhs <= rhs,
            Self::Eq => lhs == rhs,
        }
    }
}

/// Query AST, generic over how class filters are named. Parsing yields
/// `QueryExpr<String>`; binding against a class table yields `BoundQuery`.
#[derive(Debug, Clone, PartialEq)]
pub enum QueryExpr<C = String> {
    Term(BaseTerm<C>),
    Scalar(f64),
    Binary {
        op: BinaryOp,
        lhs: Box<QueryExpr<C>>,
        rhs: Box<QueryExpr<C>>,
    },
    Compare {
        op: CompareOp,
        lhs: Box<QueryExpr<C>>,
        rhs: Box<QueryExpr<C>>,
    },
}

pub type BoundQuery = QueryExpr<ClassId>;

impl<C> QueryExpr<C> {
    pub fn term(aggregator: Aggregator, error_set: ErrorKind) -> Self {
        Self::Term(BaseTerm {
            aggregator,
            error_set,
            class_filter: None,
        })
    }

    pub fn binary(op: BinaryOp, lhs: Self, rhs: Self) -> Self {
        Self::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn compare(op: CompareOp, lhs: Self, rhs: Self) -> Self {
        Self::Compare {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    /// Visits every base term in left-to-right order.
    pub fn terms(&self) -> Vec<&BaseTerm<C>> {
        let mut out = Vec::new();
        self.collect_terms(&mut out);
        out
    }

    fn collect_terms<'a>(&'a self, out: &mut Vec<&'a BaseTerm<C>>) {
        match self {
            Self::Term(t) => out.push(t),
            Self::Scalar(_) => {}
            Self::Binary { lhs, rhs, .. } | Self::Compare { lhs, rhs, .. } => {
                lhs.collect_terms(out);
                rhs.collect_terms(out);
            }
        }
    }

    fn try_map_classes<D>(&self, f: &mut impl FnMut(&C) -> Result<D>) -> Result<QueryExpr<D>> {
        Ok(match self {
            Self::Term(t) => QueryExpr::Term(BaseTerm {
                aggregator: t.aggregator,
                error_set: t.error_set,
                class_filter: t.class_filter.as_ref().map(&mut *f).transpose()?,
            }),
            Self::Scalar(v) => QueryExpr::Scalar(*v),
            Self::Binary { op, lhs, rhs } => QueryExpr::binary(
                *op,
                lhs.try_map_classes(f)?,
                rhs.try_map_classes(f)?,
            ),
            Self::Compare { op, lhs, rhs } => QueryExpr::compare(
                *op,
                lhs.try_map_classes(f)?,
                rhs.try_map_classes(f)?,
            ),
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Self::Compare { .. } => 0,
            Self::Binary {
                op: BinaryOp::Add | BinaryOp::Sub,
                ..
            } => 1,
            Self::Binary {
                op: BinaryOp::Mul, ..
            } => 2,
            Self::Term(_) | Self::Scalar(_) => 3,
        }
    }
}

impl QueryExpr<String> {
    /// Resolves class filters against the dataset's class table.
    pub fn bind(&self, classes: &ClassTable) -> Result<BoundQuery> {
        self.try_map_classes(&mut |name: &String| {
            classes
                .resolve(name)
                .ok_or_else(|| Error::UnknownClass(name.clone()))
        })
    }
}

fn is_plain_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
        && !name.starts_with('-')
}

impl<C: fmt::Display> fmt::Display for BaseTerm<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}", self.aggregator.as_str(), self.error_set)?;
        if let Some(class) = &self.class_filter {
            let name = class.to_string();
            if is_plain_name(&name) {
                write!(f, ", class={name}")?;
            } else {
                write!(f, ", class=\"{name}\"")?;
            }
        }
        f.write_str(")")
    }
}

impl<C: fmt::Display> QueryExpr<C> {
    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl<C: fmt::Display> fmt::Display for QueryExpr<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Term(t) => write!(f, "{t}"),
            Self::Scalar(v) => write!(f, "{v}"),
            Self::Binary { op, lhs, rhs } => {
                let prec = self.precedence();
                lhs.fmt_child(f, prec)?;
                f.write_str(match op {
                    BinaryOp::Add => " + ",
                    BinaryOp::Sub => " - ",
                    BinaryOp::Mul => " * ",
                })?;
                rhs.fmt_child(f, prec + 1)
            }
            Self::Compare { op, lhs, rhs } => {
                lhs.fmt_child(f, 1)?;
                write!(f, " {} ", op.symbol())?;
                rhs.fmt_child(f, 1)
            }
        }
    }
}

/// The nine base queries: every aggregator over every error set.
pub fn standard_queries() -> Vec<(String, QueryExpr)> {
    Aggregator::ALL
        .iter()
        .flat_map(|&agg| {
            ErrorKind::ALL.iter().map(move |&kind| {
                let name = format!("{}({})", agg.as_str(), kind);
                (name, QueryExpr::term(agg, kind))
            })
        })
        .collect()
}
