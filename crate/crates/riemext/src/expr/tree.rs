//! The observable tree form of a canonical expression.
//!
//! Trees produced by [`ratfun_to_tree`] satisfy the canonical-form contract:
//! sums contain no nested sums, products no nested products, numeric factors
//! are folded into a single constant, at most one `exp` factor appears per
//! product (with merged argument), power exponents are nonzero integers, and
//! siblings are sorted by the node order (kind, then symbol names, then
//! recursively).

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::One;

use crate::ratfun::{Poly, RatFun};
use crate::symbol::Symbol;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprTree {
    Constant(BigRational),
    Variable(Symbol),
    Sum(Vec<ExprTree>),
    Product(Vec<ExprTree>),
    Power(Box<ExprTree>, i64),
    Exp(Box<ExprTree>),
}

fn kind_rank(t: &ExprTree) -> u8 {
    match t {
        ExprTree::Constant(_) => 0,
        ExprTree::Variable(_) => 1,
        ExprTree::Power(_, _) => 2,
        ExprTree::Exp(_) => 3,
        ExprTree::Product(_) => 4,
        ExprTree::Sum(_) => 5,
    }
}

impl Ord for ExprTree {
    fn cmp(&self, other: &Self) -> Ordering {
        match kind_rank(self).cmp(&kind_rank(other)) {
            Ordering::Equal => {}
            ord => return ord,
        }
        match (self, other) {
            (ExprTree::Constant(a), ExprTree::Constant(b)) => a.cmp(b),
            (ExprTree::Variable(a), ExprTree::Variable(b)) => a.cmp(b),
            (ExprTree::Power(a, ea), ExprTree::Power(b, eb)) => {
                a.cmp(b).then_with(|| ea.cmp(eb))
            }
            (ExprTree::Exp(a), ExprTree::Exp(b)) => a.cmp(b),
            (ExprTree::Product(a), ExprTree::Product(b)) | (ExprTree::Sum(a), ExprTree::Sum(b)) => {
                for (x, y) in a.iter().zip(b.iter()) {
                    match x.cmp(y) {
                        Ordering::Equal => {}
                        ord => return ord,
                    }
                }
                a.len().cmp(&b.len())
            }
            _ => unreachable!("kind ranks matched"),
        }
    }
}

impl PartialOrd for ExprTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn term_factors(t: &crate::ratfun::Term) -> Vec<ExprTree> {
    let mut factors = Vec::new();
    if !t.coeff.is_one() || (t.mono.is_one() && t.exparg.is_none()) {
        factors.push(ExprTree::Constant(t.coeff.clone()));
    }
    for (s, e) in t.mono.pairs() {
        if *e == 1 {
            factors.push(ExprTree::Variable(s.clone()));
        } else {
            factors.push(ExprTree::Power(Box::new(ExprTree::Variable(s.clone())), *e as i64));
        }
    }
    if let Some(arg) = &t.exparg {
        factors.push(ExprTree::Exp(Box::new(ratfun_to_tree(arg))));
    }
    factors
}

fn group(mut factors: Vec<ExprTree>) -> ExprTree {
    match factors.len() {
        0 => ExprTree::Constant(BigRational::one()),
        1 => factors.pop().expect("len checked"),
        _ => {
            factors.sort();
            ExprTree::Product(factors)
        }
    }
}

pub(crate) fn poly_to_tree(p: &Poly) -> ExprTree {
    if p.is_zero() {
        return ExprTree::Constant(BigRational::from_integer(0.into()));
    }
    let mut terms: Vec<ExprTree> = p.terms.iter().map(|t| group(term_factors(t))).collect();
    if terms.len() == 1 {
        terms.pop().expect("len checked")
    } else {
        terms.sort();
        ExprTree::Sum(terms)
    }
}

pub(crate) fn ratfun_to_tree(rf: &RatFun) -> ExprTree {
    let num_tree = poly_to_tree(&rf.num);
    if rf.den.is_empty() {
        return num_tree;
    }
    let mut factors = match num_tree {
        ExprTree::Product(fs) => fs,
        ExprTree::Constant(c) if c.is_one() => Vec::new(),
        other => vec![other],
    };
    for (p, e) in &rf.den {
        factors.push(ExprTree::Power(Box::new(poly_to_tree(p)), -(*e as i64)));
    }
    group(factors)
}

pub(crate) fn tree_to_ratfun(tree: &ExprTree) -> Option<RatFun> {
    Some(match tree {
        ExprTree::Constant(c) => RatFun::constant(c.clone()),
        ExprTree::Variable(s) => RatFun::var(s.clone()),
        ExprTree::Sum(terms) => {
            let mut acc = RatFun::zero();
            for t in terms {
                acc = acc.add(&tree_to_ratfun(t)?);
            }
            acc
        }
        ExprTree::Product(factors) => {
            let mut acc = RatFun::one();
            for f in factors {
                acc = acc.mul(&tree_to_ratfun(f)?);
            }
            acc
        }
        ExprTree::Power(base, e) => tree_to_ratfun(base)?.pow(*e)?,
        ExprTree::Exp(arg) => RatFun::exp_of(&tree_to_ratfun(arg)?),
    })
}
