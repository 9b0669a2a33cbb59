//! Formula syntax: AST, structural queries, printing and refinement rewrites.
//!
//! Abbreviations (`F`, `G`, `AvF`, `AvG`, `->`) stay in the tree as their own
//! variants so the evaluator can pick specialized algorithms; [`Formula::desugar`]
//! expands them into the core connectives when the long form is wanted.

mod parse;
mod refine;

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

pub use parse::parse;
pub use refine::{is_positive_path, refine_always, refine_eventually, NodePath};

/// Closed interval `[lo, hi]` or `[lo, inf)`, never singular.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: Option<f64>,
}

impl Interval {
    pub fn new(lo: f64, hi: Option<f64>) -> Result<Self> {
        if !lo.is_finite() || lo < 0.0 {
            return Err(Error::Domain(format!("interval start must be finite and >= 0, got {lo}")));
        }
        if let Some(h) = hi {
            if !h.is_finite() {
                return Err(Error::Domain(format!("interval end must be finite, got {h}")));
            }
            if h <= lo {
                return Err(Error::Domain(format!("interval [{lo},{h}] is singular or empty")));
            }
        }
        Ok(Interval { lo, hi })
    }

    pub fn bounded(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, Some(hi))
    }

    pub fn unbounded(lo: f64) -> Result<Self> {
        Self::new(lo, None)
    }

    /// `[0, inf)`, the interval of an unadorned operator.
    pub fn full() -> Self {
        Interval { lo: 0.0, hi: None }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> Option<f64> {
        self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.hi.is_some()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(h) => write!(f, "[{},{}]", num(self.lo), num(h)),
            None => write!(f, "[{},inf)", num(self.lo)),
        }
    }
}

/// Shortest text that parses back to the same double.
fn num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x}")
    } else {
        format!("{x:?}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Lt,
    Le,
    Ge,
    Gt,
}

impl Relation {
    /// `<` and `<=` bound the variable from above.
    pub fn is_upper_bound(self) -> bool {
        matches!(self, Relation::Lt | Relation::Le)
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

/// `variable relation threshold`, e.g. `v >= 80`.
#[derive(Clone, Debug, PartialEq)]
pub struct Atomic {
    pub variable: String,
    pub relation: Relation,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    True,
    False,
    Atom(Atomic),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Until(Interval, Box<Formula>, Box<Formula>),
    AvgUntil(Interval, Box<Formula>, Box<Formula>),
    Release(Interval, Box<Formula>, Box<Formula>),
    AvgRelease(Interval, Box<Formula>, Box<Formula>),
    Eventually(Interval, Box<Formula>),
    AvgEventually(Interval, Box<Formula>),
    Always(Interval, Box<Formula>),
    AvgAlways(Interval, Box<Formula>),
}

impl Formula {
    pub fn atom(variable: impl Into<String>, relation: Relation, threshold: f64) -> Formula {
        Formula::Atom(Atomic {
            variable: variable.into(),
            relation,
            threshold,
        })
    }

    /// A propositional variable `p`, shorthand for `p >= 0`.
    pub fn prop(name: impl Into<String>) -> Formula {
        Formula::atom(name, Relation::Ge, 0.0)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn until(i: Interval, a: Formula, b: Formula) -> Formula {
        Formula::Until(i, Box::new(a), Box::new(b))
    }

    pub fn avg_until(i: Interval, a: Formula, b: Formula) -> Formula {
        Formula::AvgUntil(i, Box::new(a), Box::new(b))
    }

    pub fn release(i: Interval, a: Formula, b: Formula) -> Formula {
        Formula::Release(i, Box::new(a), Box::new(b))
    }

    pub fn avg_release(i: Interval, a: Formula, b: Formula) -> Formula {
        Formula::AvgRelease(i, Box::new(a), Box::new(b))
    }

    pub fn eventually(i: Interval, f: Formula) -> Formula {
        Formula::Eventually(i, Box::new(f))
    }

    pub fn avg_eventually(i: Interval, f: Formula) -> Formula {
        Formula::AvgEventually(i, Box::new(f))
    }

    pub fn always(i: Interval, f: Formula) -> Formula {
        Formula::Always(i, Box::new(f))
    }

    pub fn avg_always(i: Interval, f: Formula) -> Formula {
        Formula::AvgAlways(i, Box::new(f))
    }

    /// Direct subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        use Formula::*;
        match self {
            True | False | Atom(_) => vec![],
            Not(f) | Eventually(_, f) | AvgEventually(_, f) | Always(_, f) | AvgAlways(_, f) => vec![f],
            And(a, b)
            | Or(a, b)
            | Implies(a, b)
            | Until(_, a, b)
            | AvgUntil(_, a, b)
            | Release(_, a, b)
            | AvgRelease(_, a, b) => vec![a, b],
        }
    }

    pub(crate) fn children_mut(&mut self) -> Vec<&mut Formula> {
        use Formula::*;
        match self {
            True | False | Atom(_) => vec![],
            Not(f) | Eventually(_, f) | AvgEventually(_, f) | Always(_, f) | AvgAlways(_, f) => vec![f],
            And(a, b)
            | Or(a, b)
            | Implies(a, b)
            | Until(_, a, b)
            | AvgUntil(_, a, b)
            | Release(_, a, b)
            | AvgRelease(_, a, b) => vec![a, b],
        }
    }

    pub fn interval(&self) -> Option<Interval> {
        use Formula::*;
        match self {
            Until(i, ..)
            | AvgUntil(i, ..)
            | Release(i, ..)
            | AvgRelease(i, ..)
            | Eventually(i, _)
            | AvgEventually(i, _)
            | Always(i, _)
            | AvgAlways(i, _) => Some(*i),
            _ => None,
        }
    }

    pub fn is_averaged_node(&self) -> bool {
        matches!(
            self,
            Formula::AvgUntil(..) | Formula::AvgRelease(..) | Formula::AvgEventually(..) | Formula::AvgAlways(..)
        )
    }

    /// Maximum nesting of averaged operators.
    pub fn averaged_depth(&self) -> usize {
        let below = self.children().iter().map(|c| c.averaged_depth()).max().unwrap_or(0);
        below + usize::from(self.is_averaged_node())
    }

    pub fn is_averaging_free(&self) -> bool {
        self.averaged_depth() == 0
    }

    /// Height of the syntax tree; atoms and constants have depth 1.
    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Variables mentioned by atoms.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        if let Formula::Atom(a) = self {
            out.insert(a.variable.clone());
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    /// How far into the future the formula looks (may be infinite).
    pub fn temporal_horizon(&self) -> f64 {
        let below = self
            .children()
            .iter()
            .map(|c| c.temporal_horizon())
            .fold(0.0, f64::max);
        match self.interval() {
            Some(i) => below + i.hi().unwrap_or(f64::INFINITY),
            None => below,
        }
    }

    /// Expands every abbreviation into the core connectives:
    /// `F_I f = true U_I f`, `G_I f = false R_I f`, likewise for the averaged
    /// forms, and `a -> b = !a | b`.
    pub fn desugar(&self) -> Formula {
        use Formula::*;
        let d = |f: &Formula| Box::new(f.desugar());
        match self {
            True | False | Atom(_) => self.clone(),
            Not(f) => Not(d(f)),
            And(a, b) => And(d(a), d(b)),
            Or(a, b) => Or(d(a), d(b)),
            Implies(a, b) => Or(Box::new(Not(d(a))), d(b)),
            Until(i, a, b) => Until(*i, d(a), d(b)),
            AvgUntil(i, a, b) => AvgUntil(*i, d(a), d(b)),
            Release(i, a, b) => Release(*i, d(a), d(b)),
            AvgRelease(i, a, b) => AvgRelease(*i, d(a), d(b)),
            Eventually(i, f) => Until(*i, Box::new(True), d(f)),
            AvgEventually(i, f) => AvgUntil(*i, Box::new(True), d(f)),
            Always(i, f) => Release(*i, Box::new(False), d(f)),
            AvgAlways(i, f) => AvgRelease(*i, Box::new(False), d(f)),
        }
    }

    /// Subformula at `path` (child indices from the root).
    pub fn node_at(&self, path: &[usize]) -> Option<&Formula> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i)?;
        }
        Some(cur)
    }

    fn is_binary_connective(&self) -> bool {
        self.children().len() == 2
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Formula::*;
        // Binary operands are parenthesized whenever they are binary themselves,
        // which keeps printing independent of precedence and associativity.
        let wrap = |g: &Formula| {
            if g.is_binary_connective() {
                format!("({g})")
            } else {
                g.to_string()
            }
        };
        let iv = |i: &Interval| {
            if *i == Interval::full() {
                String::new()
            } else {
                i.to_string()
            }
        };
        match self {
            True => write!(f, "true"),
            False => write!(f, "false"),
            Atom(a) => write!(f, "{} {} {}", a.variable, a.relation.symbol(), num(a.threshold)),
            Not(g) => write!(f, "!{}", wrap(g)),
            And(a, b) => write!(f, "{} & {}", wrap(a), wrap(b)),
            Or(a, b) => write!(f, "{} | {}", wrap(a), wrap(b)),
            Implies(a, b) => write!(f, "{} -> {}", wrap(a), wrap(b)),
            Until(i, a, b) => write!(f, "{} U{} {}", wrap(a), iv(i), wrap(b)),
            AvgUntil(i, a, b) => write!(f, "{} AvU{} {}", wrap(a), iv(i), wrap(b)),
            Release(i, a, b) => write!(f, "{} R{} {}", wrap(a), iv(i), wrap(b)),
            AvgRelease(i, a, b) => write!(f, "{} AvR{} {}", wrap(a), iv(i), wrap(b)),
            Eventually(i, g) => write!(f, "F{} {}", iv(i), wrap(g)),
            AvgEventually(i, g) => write!(f, "AvF{} {}", iv(i), wrap(g)),
            Always(i, g) => write!(f, "G{} {}", iv(i), wrap(g)),
            AvgAlways(i, g) => write!(f, "AvG{} {}", iv(i), wrap(g)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn averaged_depth_examples() {
        let x = Formula::prop("x");
        let i = Interval::bounded(0.0, 1.0).unwrap();
        assert_eq!(x.averaged_depth(), 0);
        assert_eq!(Formula::avg_eventually(i, x.clone()).averaged_depth(), 1);
        let nested = Formula::avg_eventually(i, Formula::avg_always(i, x));
        assert_eq!(nested.averaged_depth(), 2);
    }

    #[test]
    fn interval_validation() {
        assert!(Interval::bounded(3.0, 3.0).is_err());
        assert!(Interval::bounded(-1.0, 3.0).is_err());
        assert!(Interval::bounded(0.0, f64::INFINITY).is_err());
        assert!(Interval::unbounded(2.0).is_ok());
    }

    #[test]
    fn horizon_sums_nested_bounds() {
        let f = parse("G[0,4] F[1,2] x >= 0").unwrap();
        assert_eq!(f.temporal_horizon(), 6.0);
        assert_eq!(parse("G x >= 0").unwrap().temporal_horizon(), f64::INFINITY);
    }

    #[test]
    fn desugar_expands_abbreviations() {
        let f = parse("F[0,1] p -> q").unwrap();
        let d = f.desugar();
        assert_eq!(d.to_string(), "!(true U[0,1] p >= 0) | q >= 0");
    }
}
