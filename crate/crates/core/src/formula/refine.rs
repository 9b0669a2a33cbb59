//! Refinement rewrites that turn an eventually/always into an averaged form.
//!
//! Both rewrites are sound in positive positions: a falsifying input for the
//! refined formula falsifies the original.

use super::{Formula, Interval};
use crate::error::{Error, Result};

/// Child indices from the root; `0` is the first (or only) operand, `1` the second.
pub type NodePath = [usize];

/// True when the node at `path` sits under no negation, reading `a -> b` as `!a | b`.
pub fn is_positive_path(f: &Formula, path: &NodePath) -> Result<bool> {
    let mut cur = f;
    let mut positive = true;
    for (depth, &i) in path.iter().enumerate() {
        let kids = cur.children();
        let next = *kids
            .get(i)
            .ok_or_else(|| Error::Refinement(format!("path step {depth} (index {i}) does not exist")))?;
        match cur {
            Formula::Not(_) => positive = false,
            Formula::Implies(..) if i == 0 => positive = false,
            _ => {}
        }
        cur = next;
    }
    Ok(positive)
}

fn target<'a>(f: &'a Formula, path: &NodePath) -> Result<&'a Formula> {
    let node = f
        .node_at(path)
        .ok_or_else(|| Error::Refinement(format!("invalid node path {path:?}")))?;
    if !is_positive_path(f, path)? {
        return Err(Error::Refinement(format!("node at {path:?} is in a negative position")));
    }
    Ok(node)
}

fn replace_at(f: &Formula, path: &NodePath, with: Formula) -> Formula {
    let mut out = f.clone();
    let mut cur = &mut out;
    for &i in path {
        cur = cur.children_mut().swap_remove(i);
    }
    *cur = with;
    out
}

/// Replaces `F[a,b] g` at `path` by `AvF[a,b] g`.
///
/// ```
/// use avstl::formula::{parse, refine_eventually};
///
/// let f = parse("G F[0,10] (w <= 3500 | w >= 4500)").unwrap();
/// let r = refine_eventually(&f, &[0]).unwrap();
/// assert_eq!(r, parse("G AvF[0,10] (w <= 3500 | w >= 4500)").unwrap());
/// ```
pub fn refine_eventually(f: &Formula, path: &NodePath) -> Result<Formula> {
    match target(f, path)? {
        Formula::Eventually(i, g) if i.is_bounded() => {
            Ok(replace_at(f, path, Formula::AvgEventually(*i, g.clone())))
        }
        Formula::Eventually(..) => Err(Error::Refinement("eventually has an unbounded interval".into())),
        other => Err(Error::Refinement(format!("node at {path:?} is not an eventually: {other}"))),
    }
}

/// Replaces `G[a,b] g` at `path` by `G[a,b] g & AvG[b,b+delta] g`.
pub fn refine_always(f: &Formula, path: &NodePath, delta: f64) -> Result<Formula> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Refinement(format!("delta must be positive and finite, got {delta}")));
    }
    match target(f, path)? {
        Formula::Always(i, g) => {
            let b = i
                .hi()
                .ok_or_else(|| Error::Refinement("always has an unbounded interval".into()))?;
            let tail = Interval::bounded(b, b + delta)?;
            let node = Formula::and(Formula::Always(*i, g.clone()), Formula::AvgAlways(tail, g.clone()));
            Ok(replace_at(f, path, node))
        }
        other => Err(Error::Refinement(format!("node at {path:?} is not an always: {other}"))),
    }
}
