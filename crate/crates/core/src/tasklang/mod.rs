//! Task language: a small fragment of linear temporal logic over the three object
//! colors, compiled into environment roles, a reward monitor and a composition template.
//!
//! Surface syntax: atoms `r g b`; `!` (not), `&` (and), `|` (or), `U` (until),
//! `F` (eventually), `G` (always); parentheses. Precedence from tightest:
//! `!`, `F`/`G`, `&`, `|`, `U`. `U` associates to the right.

mod compile;
mod monitor;
mod oracle;
mod parse;

use std::fmt;

pub use compile::{catalog, compile, RewardMode, TaskSpec, Template, TemplateKind};
pub use monitor::{MonitorState, MonitorStatus};
pub use oracle::{brute_force_satisfies, PropSet, Verdict};
pub use parse::parse;

use crate::gridworld::Color;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Prop(Color),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
}

impl Formula {
    pub fn prop(c: Color) -> Self {
        Formula::Prop(c)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn until(a: Formula, b: Formula) -> Self {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: Formula) -> Self {
        Formula::Eventually(Box::new(f))
    }

    pub fn always(f: Formula) -> Self {
        Formula::Always(Box::new(f))
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Until(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::Not(_) | Formula::Eventually(_) | Formula::Always(_) => 4,
            Formula::Prop(_) => 5,
        }
    }
}

/// Prints with the minimal parentheses that re-parse to the same tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, sub: &Formula, paren: bool| {
            if paren {
                write!(f, "({sub})")
            } else {
                write!(f, "{sub}")
            }
        };
        let unary = |f: &mut fmt::Formatter<'_>, op: &str, sub: &Formula| {
            if sub.precedence() < 4 {
                write!(f, "{op}({sub})")
            } else if op == "!" {
                write!(f, "!{sub}")
            } else {
                write!(f, "{op} {sub}")
            }
        };
        match self {
            Formula::Prop(c) => write!(f, "{c}"),
            Formula::Not(a) => unary(f, "!", a),
            Formula::Eventually(a) => unary(f, "F", a),
            Formula::Always(a) => unary(f, "G", a),
            Formula::And(a, b) | Formula::Or(a, b) => {
                let (p, op) = if matches!(self, Formula::And(..)) {
                    (3, "&")
                } else {
                    (2, "|")
                };
                wrap(f, a, a.precedence() < p)?;
                write!(f, " {op} ")?;
                wrap(f, b, b.precedence() <= p)
            }
            Formula::Until(a, b) => {
                wrap(f, a, a.precedence() <= 1)?;
                write!(f, " U ")?;
                wrap(f, b, b.precedence() < 1)
            }
        }
    }
}

#[cfg(test)]
mod tests;
