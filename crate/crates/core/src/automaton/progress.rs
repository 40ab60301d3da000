//! Formula progression over single-letter positions.
//!
//! Residual formulas may be evaluated on the empty suffix (end of word), so
//! every rewrite here preserves both the non-empty semantics and
//! [`empty_accepts`].

use std::collections::{BTreeSet, HashMap};
use std::collections::VecDeque;

use crate::formula::{Formula, Props};

use super::{AutomatonError, Dfa};

use Formula::*;

/// `!F true`: holds only on the empty suffix.
pub fn end_of_word() -> Formula {
    Formula::not(Formula::eventually(True))
}

/// Residual obligation after reading letter `p`, in canonical form.
pub fn progress(f: &Formula, p: usize) -> Formula {
    simplify(&prog(f, p))
}

fn prog(f: &Formula, p: usize) -> Formula {
    match f {
        True => True,
        False => False,
        Atom(a) => {
            if *a == p {
                True
            } else {
                False
            }
        }
        Not(a) => Formula::not(prog(a, p)),
        And(a, b) => Formula::and(prog(a, p), prog(b, p)),
        Or(a, b) => Formula::or(prog(a, p), prog(b, p)),
        Next(a) => Formula::and((**a).clone(), Formula::eventually(True)),
        WeakNext(a) => Formula::or((**a).clone(), end_of_word()),
        Always(a) => Formula::and(prog(a, p), f.clone()),
        Eventually(a) => Formula::or(prog(a, p), f.clone()),
        Until(a, b) => Formula::or(prog(b, p), Formula::and(prog(a, p), f.clone())),
    }
}

/// Truth value on the empty suffix.
pub fn empty_accepts(f: &Formula) -> bool {
    match f {
        True => true,
        False => false,
        Atom(_) => false,
        Not(a) => !empty_accepts(a),
        And(a, b) => empty_accepts(a) && empty_accepts(b),
        Or(a, b) => empty_accepts(a) || empty_accepts(b),
        Next(_) | Eventually(_) | Until(..) => false,
        WeakNext(_) | Always(_) => true,
    }
}

/// Canonical form. Temporal operands are simplified recursively and the
/// Boolean structure on top of them is rewritten as a disjunction of
/// conjunctions of literals, with contradictory clauses dropped and
/// absorbed clauses removed. Literals come from a finite closure of the
/// input, so repeated progression reaches only finitely many forms.
pub fn simplify(f: &Formula) -> Formula {
    from_dnf(dnf(f, false))
}

type Clause = BTreeSet<Formula>;

fn is_boolean(f: &Formula) -> bool {
    matches!(f, True | False | Not(_) | And(..) | Or(..))
}

/// Simplifies a non-Boolean node; the result may itself be Boolean.
fn simplify_temporal(f: &Formula) -> Formula {
    match f {
        Atom(_) => f.clone(),
        Next(a) => match simplify(a) {
            False => False,
            s => Formula::next(s),
        },
        WeakNext(a) => match simplify(a) {
            True => True,
            s => Formula::weak_next(s),
        },
        Eventually(a) => match simplify(a) {
            False => False,
            Eventually(b) => Formula::eventually(*b),
            s => Formula::eventually(s),
        },
        Always(a) => match simplify(a) {
            True => True,
            Always(b) => Formula::always(*b),
            s => Formula::always(s),
        },
        Until(a, b) => match (simplify(a), simplify(b)) {
            (_, False) => False,
            (_, True) => Formula::eventually(True),
            (True, b) => Formula::eventually(b),
            (a, b) => Formula::until(a, b),
        },
        _ => unreachable!("boolean node"),
    }
}

/// Clauses of `f` (or of `!f` when `negate`).
fn dnf(f: &Formula, negate: bool) -> Vec<Clause> {
    match (f, negate) {
        (True, false) | (False, true) => vec![Clause::new()],
        (True, true) | (False, false) => Vec::new(),
        (Not(a), _) => dnf(a, !negate),
        (And(a, b), false) | (Or(a, b), true) => product(&dnf(a, negate), &dnf(b, negate)),
        (Or(a, b), false) | (And(a, b), true) => absorb(dnf(a, negate).into_iter().chain(dnf(b, negate)).collect()),
        _ => {
            let s = simplify_temporal(f);
            if is_boolean(&s) {
                return dnf(&s, negate);
            }
            let lit = if negate { Formula::not(s) } else { s };
            clean(Clause::from([lit])).into_iter().collect()
        }
    }
}

fn product(a: &[Clause], b: &[Clause]) -> Vec<Clause> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            if let Some(c) = clean(x.union(y).cloned().collect()) {
                out.push(c);
            }
        }
    }
    absorb(out)
}

/// `None` when the clause is unsatisfiable at a single position.
fn clean(mut c: Clause) -> Option<Clause> {
    if c.iter().any(|x| matches!(x, Not(a) if c.contains(a))) {
        return None;
    }
    // one letter per position: two different atoms cannot hold together,
    // and a positive atom implies every other atom is false
    let atoms: Vec<usize> = c.iter().filter_map(|x| if let Atom(p) = x { Some(*p) } else { None }).collect();
    if atoms.len() > 1 {
        return None;
    }
    if let Some(&p) = atoms.first() {
        c.retain(|x| !matches!(x, Not(a) if matches!(**a, Atom(q) if q != p)));
    }
    Some(c)
}

fn negated_atom(c: &Clause) -> Option<usize> {
    match c.iter().next() {
        Some(Not(a)) if c.len() == 1 => match **a {
            Atom(p) => Some(p),
            _ => None,
        },
        _ => None,
    }
}

/// Removes duplicate and subsumed clauses; returns `[{}]` (true) when the
/// disjunction is valid by a single-literal argument.
fn absorb(mut clauses: Vec<Clause>) -> Vec<Clause> {
    clauses.sort();
    clauses.dedup();
    if clauses.iter().any(|c| c.is_empty()) {
        return vec![Clause::new()];
    }
    let singles: BTreeSet<&Formula> = clauses.iter().filter(|c| c.len() == 1).filter_map(|c| c.iter().next()).collect();
    if singles.iter().any(|x| matches!(x, Not(a) if singles.contains(&**a))) {
        return vec![Clause::new()];
    }
    let negated: BTreeSet<usize> = clauses.iter().filter_map(negated_atom).collect();
    if negated.len() > 1 {
        return vec![Clause::new()];
    }
    if let Some(&p) = negated.first() {
        // any other letter implies !p
        clauses.retain(|c| !c.iter().any(|x| matches!(x, Atom(q) if *q != p)));
    }
    let mut keep: Vec<Clause> = Vec::new();
    clauses.sort_by_key(|c| c.len());
    for c in clauses {
        if !keep.iter().any(|k| k.is_subset(&c)) {
            keep.push(c);
        }
    }
    keep.sort();
    keep
}

fn from_dnf(clauses: Vec<Clause>) -> Formula {
    let terms: Vec<Formula> =
        clauses.into_iter().map(|c| rebuild(c.into_iter().collect(), True, Formula::and)).collect();
    rebuild(terms, False, Formula::or)
}

fn rebuild(mut items: Vec<Formula>, unit: Formula, op: fn(Formula, Formula) -> Formula) -> Formula {
    let Some(mut acc) = items.pop() else { return unit };
    while let Some(x) = items.pop() {
        acc = op(x, acc);
    }
    acc
}

/// Builds a DFA for `f` by exploring canonical residuals breadth-first.
/// States are named `q0, q1, ...` in discovery order.
pub fn translate(f: &Formula, props: &Props, cap: usize) -> Result<Dfa, AutomatonError> {
    let k = props.len();
    let start = simplify(f);
    let mut index: HashMap<Formula, usize> = HashMap::new();
    let mut residuals = vec![start.clone()];
    index.insert(start, 0);
    let mut delta: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(q) = queue.pop_front() {
        let mut row = Vec::with_capacity(k);
        for p in 0..k {
            let next = progress(&residuals[q], p);
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    let id = residuals.len();
                    if id >= cap {
                        return Err(AutomatonError::StateCap { cap });
                    }
                    index.insert(next.clone(), id);
                    residuals.push(next);
                    queue.push_back(id);
                    id
                }
            };
            row.push(id);
        }
        if delta.len() <= q {
            delta.resize(q + 1, Vec::new());
        }
        delta[q] = row;
    }
    let accepting = residuals.iter().map(empty_accepts).collect();
    Ok(Dfa {
        states: (0..residuals.len()).map(|i| format!("q{i}")).collect(),
        initial: vec![0],
        accepting,
        delta,
        props: props.clone(),
        annotations: Some(residuals),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn props() -> Props {
        Props::numbered(3)
    }

    #[test]
    fn progression_examples() {
        let g = Formula::always(Formula::not(Formula::atom(1)));
        assert_eq!(progress(&g, 0), g);
        assert_eq!(progress(&Formula::atom(1), 1), True);
        assert_eq!(
            progress(&Formula::next(Formula::atom(0)), 2),
            Formula::and(Formula::atom(0), Formula::eventually(True))
        );
    }

    #[test]
    fn empty_word_values() {
        assert!(empty_accepts(&Formula::always(Formula::not(Formula::atom(1)))));
        assert!(!empty_accepts(&Formula::eventually(Formula::atom(0))));
        assert!(empty_accepts(&Formula::not(Formula::next(Formula::atom(0)))));
    }

    #[test]
    fn canonical_form_is_order_insensitive() {
        let ps = props();
        let a = simplify(&parse_formula("(G p0 & p1) & (F p2 & G p0)", &ps).unwrap());
        let b = simplify(&parse_formula("F p2 & (p1 & G p0)", &ps).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn true_translates_to_one_state() {
        let d = translate(&True, &props(), 100).unwrap();
        assert_eq!(d.num_states(), 1);
        assert!(d.accepting[0]);
        assert!(d.delta[0].iter().all(|&t| t == 0));
    }

    #[test]
    fn negated_safety_formula() {
        let ps = props();
        let phi = parse_formula("p0 & G !p2", &ps).unwrap();
        let d = translate(&Formula::not(phi), &ps, 100).unwrap();
        assert!(d.accepts(&[1]));
        assert!(d.accepts(&[0, 2]));
        assert!(!d.accepts(&[0, 0]));
    }

    #[test]
    fn weak_next_residual() {
        let ps = props();
        let f = parse_formula("WX F p0", &ps).unwrap();
        let d = translate(&f, &ps, 100).unwrap();
        assert!(d.accepts(&[1]));
        assert!(!d.accepts(&[1, 1]));
        assert!(d.accepts(&[1, 1, 0]));
    }
}
