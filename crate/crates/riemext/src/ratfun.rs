//! Canonical rational-function arithmetic.
//!
//! This is the internal normal form behind [`crate::expr::Expression`]: a
//! Laurent polynomial numerator over a factorized denominator, with one
//! optional exponential kernel per term. Two mathematically equal rational
//! functions of variables and exp-kernels reduce to the same representation,
//! so zero-testing is `num.is_empty()`.
//!
//! Invariants:
//! * `Poly` terms are sorted descending by `(monomial, exp-kernel)` with
//!   unique keys and nonzero coefficients; monomial exponents are nonzero.
//! * Denominator factors are multi-term polynomials, integer-primitive with
//!   positive leading coefficient, sorted, with positive multiplicities, and
//!   none of them exactly divides the numerator (single-term factors are
//!   absorbed into the numerator as Laurent exponents).
//! * Exponential kernels `exp(S)` are carried per term; multiplying terms
//!   adds kernel arguments, so `exp(a)·exp(b)` collapses to `exp(a+b)`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use smallvec::SmallVec;

use crate::symbol::Symbol;

pub(crate) type Rat = BigRational;

pub(crate) fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

fn rat_pow(base: &Rat, exp: i64) -> Rat {
    let mut acc = Rat::one();
    let b = if exp < 0 { base.recip() } else { base.clone() };
    for _ in 0..exp.unsigned_abs() {
        acc *= &b;
    }
    acc
}

/// Evaluation errors shared by the exact and floating paths.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(Symbol),
    #[error("division by zero at the evaluation point")]
    DivisionByZero,
}

/// Exact rational result when no exponential kernel is involved, floating
/// otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalValue {
    Exact(Rat),
    Float(f64),
}

impl EvalValue {
    pub fn as_f64(&self) -> f64 {
        match self {
            EvalValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            EvalValue::Float(f) => *f,
        }
    }
}

// ---------------------------------------------------------------------------
// Monomials
// ---------------------------------------------------------------------------

/// A Laurent monomial: sorted `(symbol, exponent)` pairs with nonzero
/// exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub(crate) struct Mono(SmallVec<[(Symbol, i32); 4]>);

impl Mono {
    pub fn one() -> Mono {
        Mono(SmallVec::new())
    }

    pub fn var(s: Symbol) -> Mono {
        Mono(smallvec::smallvec![(s, 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(Symbol, i32)] {
        &self.0
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let mut out = SmallVec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let e = self.0[i].1 + other.0[j].1;
                    if e != 0 {
                        out.push((self.0[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(self.0[i..].iter().cloned());
        out.extend(other.0[j..].iter().cloned());
        Mono(out)
    }

    pub fn pow(&self, k: i32) -> Mono {
        if k == 0 {
            return Mono::one();
        }
        Mono(self.0.iter().map(|(s, e)| (s.clone(), e * k)).collect())
    }

    /// Exponentwise division; `None` when any resulting exponent would be
    /// negative (used only on nonnegative monomials during long division).
    pub fn try_div(&self, other: &Mono) -> Option<Mono> {
        let mut out = SmallVec::new();
        let mut i = 0;
        for (s, e) in &other.0 {
            loop {
                if i >= self.0.len() {
                    return None;
                }
                match self.0[i].0.cmp(s) {
                    Ordering::Less => {
                        out.push(self.0[i].clone());
                        i += 1;
                    }
                    Ordering::Equal => {
                        let d = self.0[i].1 - e;
                        if d < 0 {
                            return None;
                        }
                        if d != 0 {
                            out.push((s.clone(), d));
                        }
                        i += 1;
                        break;
                    }
                    Ordering::Greater => return None,
                }
            }
        }
        out.extend(self.0[i..].iter().cloned());
        Some(Mono(out))
    }
}

/// Lexicographic order with symbols taken in ascending name order; the first
/// differing exponent decides. Restricted to nonnegative exponents this is a
/// monomial order, which long division relies on.
impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some((_, e)), None) => {
                    return e.cmp(&0).then(Ordering::Greater);
                }
                (None, Some((_, e))) => {
                    return 0.cmp(e).then(Ordering::Less);
                }
                (Some((sa, ea)), Some((sb, eb))) => match sa.cmp(sb) {
                    Ordering::Less => {
                        match ea.cmp(&0) {
                            Ordering::Equal => unreachable!("zero exponent stored"),
                            ord => return ord,
                        }
                    }
                    Ordering::Greater => {
                        match 0.cmp(eb) {
                            Ordering::Equal => unreachable!("zero exponent stored"),
                            ord => return ord,
                        }
                    }
                    Ordering::Equal => {
                        match ea.cmp(eb) {
                            Ordering::Equal => {
                                i += 1;
                                j += 1;
                            }
                            ord => return ord,
                        }
                    }
                },
            }
        }
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Term {
    pub coeff: Rat,
    pub mono: Mono,
    pub exparg: Option<Arc<RatFun>>,
}

impl Term {
    pub fn constant(c: Rat) -> Term {
        Term { coeff: c, mono: Mono::one(), exparg: None }
    }

    fn key_cmp(&self, other: &Term) -> Ordering {
        self.mono
            .cmp(&other.mono)
            .then_with(|| cmp_exparg(&self.exparg, &other.exparg))
    }

    fn mul(&self, other: &Term) -> Term {
        Term {
            coeff: &self.coeff * &other.coeff,
            mono: self.mono.mul(&other.mono),
            exparg: exparg_add(&self.exparg, &other.exparg, 1),
        }
    }

    /// `self^(-k)` for a single-term denominator factor being absorbed.
    fn inv_pow(&self, k: i64) -> Term {
        let arg = self.exparg.as_ref().map(|a| {
            let scaled = a.as_ref().clone().scale_by_int(-k);
            Arc::new(scaled)
        });
        Term {
            coeff: rat_pow(&self.coeff, -k),
            mono: self.mono.pow(-(k as i32)),
            exparg: arg.filter(|a| !a.is_zero()),
        }
    }
}

fn cmp_exparg(a: &Option<Arc<RatFun>>, b: &Option<Arc<RatFun>>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => {
            if Arc::ptr_eq(x, y) {
                Ordering::Equal
            } else {
                x.cmp(y)
            }
        }
    }
}

fn exparg_add(
    a: &Option<Arc<RatFun>>,
    b: &Option<Arc<RatFun>>,
    b_scale: i64,
) -> Option<Arc<RatFun>> {
    match (a, b) {
        (None, None) => None,
        (Some(x), None) => Some(x.clone()),
        (None, Some(y)) => {
            if b_scale == 1 {
                Some(y.clone())
            } else {
                let s = y.as_ref().clone().scale_by_int(b_scale);
                if s.is_zero() { None } else { Some(Arc::new(s)) }
            }
        }
        (Some(x), Some(y)) => {
            let sum = x.as_ref().add(&y.as_ref().clone().scale_by_int(b_scale));
            if sum.is_zero() { None } else { Some(Arc::new(sum)) }
        }
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other).then_with(|| self.coeff.cmp(&other.coeff))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// ---------------------------------------------------------------------------
// Polynomials
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub(crate) struct Poly {
    pub terms: Vec<Term>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![Term::constant(c)] }
        }
    }

    pub fn var(s: Symbol) -> Poly {
        Poly {
            terms: vec![Term { coeff: Rat::one(), mono: Mono::var(s), exparg: None }],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn from_terms(mut terms: Vec<Term>) -> Poly {
        terms.sort_by(|a, b| b.key_cmp(a));
        let mut out: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            if t.coeff.is_zero() {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.key_cmp(&t) == Ordering::Equal => {
                    last.coeff += &t.coeff;
                    if last.coeff.is_zero() {
                        out.pop();
                    }
                }
                _ => out.push(t),
            }
        }
        Poly { terms: out }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out: Vec<Term> = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            match self.terms[i].key_cmp(&other.terms[j]) {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(other.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &self.terms[i].coeff + &other.terms[j].coeff;
                    if !c.is_zero() {
                        let mut t = self.terms[i].clone();
                        t.coeff = c;
                        out.push(t);
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        Poly { terms: out }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|t| Term { coeff: -t.coeff.clone(), mono: t.mono.clone(), exparg: t.exparg.clone() })
                .collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul_term(&self, t: &Term) -> Poly {
        if t.coeff.is_zero() {
            return Poly::zero();
        }
        Poly::from_terms(self.terms.iter().map(|a| a.mul(t)).collect())
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|t| Term { coeff: &t.coeff * c, mono: t.mono.clone(), exparg: t.exparg.clone() })
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if other.terms.len() == 1 {
            return self.mul_term(&other.terms[0]);
        }
        if self.terms.len() == 1 {
            return other.mul_term(&self.terms[0]);
        }
        let mut acc: BTreeMap<(Mono, Option<Arc<RatFun>>), Rat> = BTreeMap::new();
        for a in &self.terms {
            for b in &other.terms {
                let t = a.mul(b);
                let entry = acc.entry((t.mono, t.exparg)).or_insert_with(Rat::zero);
                *entry += t.coeff;
            }
        }
        let terms = acc
            .into_iter()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|((mono, exparg), coeff)| Term { coeff, mono, exparg })
            .collect();
        Poly { terms }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn leading(&self) -> &Term {
        &self.terms[0]
    }

    pub fn is_exp_free(&self) -> bool {
        self.terms.iter().all(|t| t.exparg.is_none())
    }

    fn has_negative_exponent(&self) -> bool {
        self.terms
            .iter()
            .any(|t| t.mono.pairs().iter().any(|(_, e)| *e < 0))
    }

    /// Splits off the rational content, leaving integer-coprime coefficients
    /// and a positive leading coefficient.
    pub fn primitive_normalize(&self) -> (Rat, Poly) {
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for t in &self.terms {
            num_gcd = num_gcd.gcd(&t.coeff.numer().abs());
            den_lcm = den_lcm.lcm(t.coeff.denom());
        }
        let mut content = Rat::new(num_gcd, den_lcm);
        let scaled = self.scale(&content.recip());
        if scaled.leading().coeff.is_negative() {
            content = -content;
            (content.clone(), scaled.neg())
        } else {
            (content, scaled)
        }
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        for t in &self.terms {
            for (s, _) in t.mono.pairs() {
                out.insert(s.clone());
            }
            if let Some(arg) = &t.exparg {
                arg.free_symbols_into(out);
            }
        }
    }
}

/// Exact division of `f` (possibly Laurent, possibly exp-carrying) by the
/// exp-free nonnegative polynomial `p`. Returns `None` when not exactly
/// divisible.
fn exact_div(f: &Poly, p: &Poly) -> Option<Poly> {
    debug_assert!(p.is_exp_free() && !p.has_negative_exponent());
    if f.is_zero() {
        return Some(Poly::zero());
    }
    // Group dividend terms by exp-kernel; p cannot mix kernels.
    let mut classes: BTreeMap<Option<Arc<RatFun>>, Vec<Term>> = BTreeMap::new();
    for t in &f.terms {
        classes
            .entry(t.exparg.clone())
            .or_default()
            .push(Term { coeff: t.coeff.clone(), mono: t.mono.clone(), exparg: None });
    }
    let mut quotient_terms: Vec<Term> = Vec::new();
    for (arg, class) in classes {
        // Clear negative exponents with a monomial shift.
        let mut min_exp: BTreeMap<Symbol, i32> = BTreeMap::new();
        for t in &class {
            for (s, e) in t.mono.pairs() {
                if *e < 0 {
                    let entry = min_exp.entry(s.clone()).or_insert(0);
                    *entry = (*entry).min(*e);
                }
            }
        }
        let shift = Mono(
            min_exp
                .iter()
                .map(|(s, e)| (s.clone(), -e))
                .collect::<SmallVec<[(Symbol, i32); 4]>>(),
        );
        let shifted = Poly::from_terms(
            class
                .iter()
                .map(|t| Term { coeff: t.coeff.clone(), mono: t.mono.mul(&shift), exparg: None })
                .collect(),
        );
        let q = long_div_exact(&shifted, p)?;
        let unshift = shift.pow(-1);
        for t in &q.terms {
            quotient_terms.push(Term {
                coeff: t.coeff.clone(),
                mono: t.mono.mul(&unshift),
                exparg: arg.clone(),
            });
        }
    }
    Some(Poly::from_terms(quotient_terms))
}

/// The exp-kernel shared by every term of `p`, if one exists.
fn common_exparg(p: &Poly) -> Option<Arc<RatFun>> {
    let first = p.terms.first()?.exparg.clone()?;
    for t in &p.terms[1..] {
        match &t.exparg {
            Some(a) if cmp_exparg(&Some(a.clone()), &Some(first.clone())) == Ordering::Equal => {}
            _ => return None,
        }
    }
    Some(first)
}

/// Monomial that clears every negative exponent appearing in `p`.
fn laurent_shift(p: &Poly) -> Mono {
    let mut min_exp: BTreeMap<Symbol, i32> = BTreeMap::new();
    for t in &p.terms {
        for (s, e) in t.mono.pairs() {
            if *e < 0 {
                let entry = min_exp.entry(s.clone()).or_insert(0);
                *entry = (*entry).min(*e);
            }
        }
    }
    Mono(
        min_exp
            .iter()
            .map(|(s, e)| (s.clone(), -e))
            .collect::<SmallVec<[(Symbol, i32); 4]>>(),
    )
}

fn rat_nth_root(c: &Rat, k: u32) -> Option<Rat> {
    use num_integer::Roots;
    if c.is_negative() {
        return None;
    }
    let rn = c.numer().nth_root(k);
    let rd = c.denom().nth_root(k);
    let candidate = Rat::new(rn, rd);
    if &rat_pow(&candidate, k as i64) == c {
        Some(candidate)
    } else {
        None
    }
}

fn mono_nth_root(m: &Mono, k: u32) -> Option<Mono> {
    let mut out: SmallVec<[(Symbol, i32); 4]> = SmallVec::new();
    for (s, e) in m.pairs() {
        if e % (k as i32) != 0 {
            return None;
        }
        out.push((s.clone(), e / k as i32));
    }
    Some(Mono(out))
}

/// Exact k-th root of an exp-free nonnegative polynomial, or `None`.
fn poly_nth_root(p: &Poly, k: u32) -> Option<Poly> {
    let lt = p.leading();
    let r0 = Term {
        coeff: rat_nth_root(&lt.coeff, k)?,
        mono: mono_nth_root(&lt.mono, k)?,
        exparg: None,
    };
    // Greedy leading-term recursion: the next root term is
    // lt(p - Q^k) / (k · r0^(k-1)).
    let mut root = Poly { terms: vec![r0.clone()] };
    let mut lead_pow = Poly { terms: vec![r0.clone()] }.pow(k - 1).mul_term(&Term {
        coeff: Rat::from(BigInt::from(k as i64)),
        mono: Mono::one(),
        exparg: None,
    });
    let lead_term = lead_pow.leading().clone();
    lead_pow.terms.clear();
    for _ in 0..p.terms.len().max(4) * 4 {
        let diff = p.sub(&root.pow(k));
        if diff.is_zero() {
            return Some(root);
        }
        let lt = diff.leading();
        let qm = lt.mono.try_div(&lead_term.mono)?;
        let qt = Term { coeff: &lt.coeff / &lead_term.coeff, mono: qm, exparg: None };
        if qt.key_cmp(root.terms.last().expect("root nonempty")) != Ordering::Less {
            return None;
        }
        root.terms.push(qt);
    }
    None
}

/// Splits a factor into `base^k` with `k` maximal over small primes.
fn extract_power(p: Poly) -> (Poly, u32) {
    let mut base = p;
    let mut mult: u32 = 1;
    'outer: loop {
        if base.terms.len() < 2 {
            return (base, mult);
        }
        for k in [2u32, 3, 5, 7] {
            if let Some(root) = poly_nth_root(&base, k) {
                base = root;
                mult *= k;
                continue 'outer;
            }
        }
        return (base, mult);
    }
}

fn long_div_exact(f: &Poly, p: &Poly) -> Option<Poly> {
    let pl = p.leading();
    let mut rem = f.clone();
    let mut q: Vec<Term> = Vec::new();
    while !rem.is_zero() {
        let lt = rem.leading();
        let qm = lt.mono.try_div(&pl.mono)?;
        let qt = Term { coeff: &lt.coeff / &pl.coeff, mono: qm, exparg: None };
        rem = rem.sub(&p.mul_term(&qt));
        q.push(qt);
    }
    Some(Poly::from_terms(q))
}

// ---------------------------------------------------------------------------
// Rational functions
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub(crate) struct RatFun {
    pub num: Poly,
    pub den: Vec<(Poly, u32)>,
}

impl RatFun {
    pub fn zero() -> RatFun {
        RatFun { num: Poly::zero(), den: Vec::new() }
    }

    pub fn one() -> RatFun {
        RatFun::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> RatFun {
        RatFun { num: Poly::constant(c), den: Vec::new() }
    }

    pub fn integer(n: i64) -> RatFun {
        RatFun::constant(Rat::from(BigInt::from(n)))
    }

    pub fn var(s: Symbol) -> RatFun {
        RatFun { num: Poly::var(s), den: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_empty() && self.as_rational().map(|r| r.is_one()).unwrap_or(false)
    }

    /// The canonical constructor: absorbs monomial factors, normalizes factor
    /// content (clearing Laurent exponents and shared exp-kernels), splits
    /// perfect-power factors, merges duplicates, and cancels factors that
    /// exactly divide the numerator.
    pub fn make(num: Poly, den: Vec<(Poly, u32)>) -> RatFun {
        let mut num = num;
        if num.is_zero() {
            return RatFun::zero();
        }
        let mut factors: Vec<(Poly, u32)> = Vec::new();
        for (p, e) in den {
            if e == 0 {
                continue;
            }
            assert!(!p.is_zero(), "division by canonical zero");
            if p.terms.len() == 1 {
                num = num.mul_term(&p.terms[0].inv_pow(e as i64));
                continue;
            }
            let mut p = p;
            // A kernel shared by every term moves out of the factor.
            if let Some(shared) = common_exparg(&p) {
                let neg = shared.as_ref().clone().scale_by_int(-1);
                p = Poly {
                    terms: p
                        .terms
                        .iter()
                        .map(|t| Term {
                            coeff: t.coeff.clone(),
                            mono: t.mono.clone(),
                            exparg: exparg_add(&t.exparg, &Some(Arc::new(neg.clone())), 1),
                        })
                        .collect(),
                };
                num = num.mul_term(&Term {
                    coeff: Rat::one(),
                    mono: Mono::one(),
                    exparg: exparg_add(&None, &Some(shared), -(e as i64)),
                });
            }
            // Clear negative exponents: 1/(q·x^-k) = x^k/q.
            let shift = laurent_shift(&p);
            if !shift.is_one() {
                p = p.mul_term(&Term { coeff: Rat::one(), mono: shift.clone(), exparg: None });
                num = num.mul_term(&Term {
                    coeff: Rat::one(),
                    mono: shift.pow(e as i32),
                    exparg: None,
                });
            }
            let (content, mut prim) = p.primitive_normalize();
            num = num.scale(&rat_pow(&content, -(e as i64)));
            let mut mult = e;
            if prim.is_exp_free() {
                let (base, k) = extract_power(prim);
                prim = base;
                mult = e * k;
            }
            factors.push((prim, mult));
        }
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Poly, u32)> = Vec::new();
        for (p, e) in factors {
            match merged.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => merged.push((p, e)),
            }
        }
        for (p, e) in &mut merged {
            if !p.is_exp_free() {
                continue;
            }
            while *e > 0 {
                match exact_div(&num, p) {
                    Some(q) => {
                        num = q;
                        *e -= 1;
                    }
                    None => break,
                }
            }
        }
        merged.retain(|(_, e)| *e > 0);
        RatFun { num, den: merged }
    }

    pub fn add(&self, other: &RatFun) -> RatFun {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        // Factorwise max gives the common denominator.
        let mut union: Vec<(Poly, u32)> = self.den.clone();
        for (p, e) in &other.den {
            match union.iter_mut().find(|(q, _)| q == p) {
                Some((_, f)) => *f = (*f).max(*e),
                None => union.push((p.clone(), *e)),
            }
        }
        union.sort_by(|a, b| a.0.cmp(&b.0));
        let complement = |own: &[(Poly, u32)]| -> Poly {
            let mut acc = Poly::one();
            for (p, e) in &union {
                let have = own.iter().find(|(q, _)| q == p).map(|(_, f)| *f).unwrap_or(0);
                if *e > have {
                    acc = acc.mul(&p.pow(e - have));
                }
            }
            acc
        };
        let n1 = self.num.mul(&complement(&self.den));
        let n2 = other.num.mul(&complement(&other.den));
        RatFun::make(n1.add(&n2), union)
    }

    pub fn neg(&self) -> RatFun {
        RatFun { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &RatFun) -> RatFun {
        self.add(&other.neg())
    }

    pub fn scale_by_int(self, k: i64) -> RatFun {
        if k == 0 {
            return RatFun::zero();
        }
        RatFun {
            num: self.num.scale(&Rat::from(BigInt::from(k))),
            den: self.den,
        }
    }

    pub fn mul(&self, other: &RatFun) -> RatFun {
        if self.is_zero() || other.is_zero() {
            return RatFun::zero();
        }
        let mut den = self.den.clone();
        den.extend(other.den.iter().cloned());
        RatFun::make(self.num.mul(&other.num), den)
    }

    pub fn recip(&self) -> Option<RatFun> {
        if self.is_zero() {
            return None;
        }
        let mut num = Poly::one();
        for (p, e) in &self.den {
            num = num.mul(&p.pow(*e));
        }
        Some(RatFun::make(num, vec![(self.num.clone(), 1)]))
    }

    pub fn pow(&self, k: i64) -> Option<RatFun> {
        if self.is_zero() {
            return match k.cmp(&0) {
                Ordering::Greater => Some(RatFun::zero()),
                Ordering::Equal => Some(RatFun::one()),
                Ordering::Less => None,
            };
        }
        // Reciprocate first so negative powers keep the factored denominator
        // (`(x+y)^-2` and `1/(x+y)^2` must agree).
        let base0 = if k < 0 { self.recip()? } else { self.clone() };
        let mut acc = RatFun::one();
        let mut base = base0;
        let mut n = k.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        Some(acc)
    }

    pub fn div(&self, other: &RatFun) -> Option<RatFun> {
        Some(self.mul(&other.recip()?))
    }

    /// `exp(arg)` as a canonical term; `exp(0)` is 1.
    pub fn exp_of(arg: &RatFun) -> RatFun {
        if arg.is_zero() {
            return RatFun::one();
        }
        RatFun {
            num: Poly {
                terms: vec![Term {
                    coeff: Rat::one(),
                    mono: Mono::one(),
                    exparg: Some(Arc::new(arg.clone())),
                }],
            },
            den: Vec::new(),
        }
    }

    pub fn as_rational(&self) -> Option<Rat> {
        if self.num.is_zero() {
            return Some(Rat::zero());
        }
        if !self.den.is_empty() || self.num.terms.len() != 1 {
            return None;
        }
        let t = &self.num.terms[0];
        if t.mono.is_one() && t.exparg.is_none() {
            Some(t.coeff.clone())
        } else {
            None
        }
    }

    pub fn is_exp_free(&self) -> bool {
        self.num.is_exp_free() && self.den.iter().all(|(p, _)| p.is_exp_free())
    }

    pub fn free_symbols_into(&self, out: &mut BTreeSet<Symbol>) {
        self.num.collect_symbols(out);
        for (p, _) in &self.den {
            p.collect_symbols(out);
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.free_symbols_into(&mut out);
        out
    }

    pub fn derive(&self, s: &Symbol) -> RatFun {
        let mut acc = poly_derive(&self.num, s).mul(&RatFun::make(Poly::one(), self.den.clone()));
        for (p, e) in &self.den {
            let dp = poly_derive(p, s);
            if dp.is_zero() {
                continue;
            }
            // -e * (num/den) * p'/p
            let correction = self
                .mul(&dp)
                .mul(&RatFun::make(
                    Poly::constant(Rat::from(BigInt::from(-(*e as i64)))),
                    vec![(p.clone(), 1)],
                ));
            acc = acc.add(&correction);
        }
        acc
    }

    pub fn substitute(&self, map: &BTreeMap<Symbol, RatFun>) -> Option<RatFun> {
        let num = subst_poly(&self.num, map)?;
        let mut acc = num;
        for (p, e) in &self.den {
            let sub = subst_poly(p, map)?;
            acc = acc.mul(&sub.pow(-(*e as i64))?);
        }
        Some(acc)
    }

    pub fn eval(&self, point: &BTreeMap<Symbol, Rat>) -> Result<EvalValue, EvalError> {
        if self.is_exp_free() {
            let num = eval_poly_exact(&self.num, point)?;
            let mut den = Rat::one();
            for (p, e) in &self.den {
                let v = eval_poly_exact(p, point)?;
                if v.is_zero() {
                    return Err(EvalError::DivisionByZero);
                }
                den *= rat_pow(&v, *e as i64);
            }
            if den.is_zero() {
                return Err(EvalError::DivisionByZero);
            }
            Ok(EvalValue::Exact(num / den))
        } else {
            Ok(EvalValue::Float(self.eval_f64_map(point)?))
        }
    }

    fn eval_f64_map(&self, point: &BTreeMap<Symbol, Rat>) -> Result<f64, EvalError> {
        let num = eval_poly_f64(&self.num, point)?;
        let mut den = 1.0;
        for (p, e) in &self.den {
            let v = eval_poly_f64(p, point)?;
            if v == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            den *= v.powi(*e as i32);
        }
        if den == 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        Ok(num / den)
    }

    /// True when no denominator factor (anywhere, including exp arguments)
    /// vanishes at the point.
    pub fn defined_at(&self, point: &BTreeMap<Symbol, Rat>) -> Result<bool, EvalError> {
        for (p, _) in &self.den {
            if eval_poly_defined_zero(p, point)? {
                return Ok(false);
            }
        }
        for t in &self.num.terms {
            for (s, e) in t.mono.pairs() {
                if *e < 0 {
                    let v = point.get(s).ok_or_else(|| EvalError::UnboundSymbol(s.clone()))?;
                    if v.is_zero() {
                        return Ok(false);
                    }
                }
            }
            if let Some(arg) = &t.exparg {
                if !arg.defined_at(point)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn eval_poly_defined_zero(p: &Poly, point: &BTreeMap<Symbol, Rat>) -> Result<bool, EvalError> {
    if !p.is_exp_free() {
        // Opaque factor: treat a floating zero as singular.
        return Ok(eval_poly_f64(p, point)? == 0.0);
    }
    Ok(eval_poly_exact(p, point)?.is_zero())
}

fn term_to_ratfun(t: &Term) -> RatFun {
    RatFun { num: Poly { terms: vec![t.clone()] }, den: Vec::new() }
}

fn poly_derive(p: &Poly, s: &Symbol) -> RatFun {
    let mut plain: Vec<Term> = Vec::new();
    let mut chain = RatFun::zero();
    for t in &p.terms {
        for (v, e) in t.mono.pairs() {
            if v == s {
                let reduced = t.mono.mul(&Mono(smallvec::smallvec![(v.clone(), -1)]));
                plain.push(Term {
                    coeff: &t.coeff * Rat::from(BigInt::from(*e as i64)),
                    mono: reduced,
                    exparg: t.exparg.clone(),
                });
            }
        }
        if let Some(arg) = &t.exparg {
            let darg = arg.derive(s);
            if !darg.is_zero() {
                chain = chain.add(&term_to_ratfun(t).mul(&darg));
            }
        }
    }
    RatFun { num: Poly::from_terms(plain), den: Vec::new() }.add(&chain)
}

fn subst_poly(p: &Poly, map: &BTreeMap<Symbol, RatFun>) -> Option<RatFun> {
    let mut acc = RatFun::zero();
    for t in &p.terms {
        let mut val = RatFun::constant(t.coeff.clone());
        for (v, e) in t.mono.pairs() {
            let base = match map.get(v) {
                Some(r) => r.clone(),
                None => RatFun::var(v.clone()),
            };
            val = val.mul(&base.pow(*e as i64)?);
        }
        if let Some(arg) = &t.exparg {
            let sub = arg.substitute(map)?;
            val = val.mul(&RatFun::exp_of(&sub));
        }
        acc = acc.add(&val);
    }
    Some(acc)
}

fn eval_poly_exact(p: &Poly, point: &BTreeMap<Symbol, Rat>) -> Result<Rat, EvalError> {
    let mut acc = Rat::zero();
    for t in &p.terms {
        debug_assert!(t.exparg.is_none());
        let mut v = t.coeff.clone();
        for (s, e) in t.mono.pairs() {
            let x = point.get(s).ok_or_else(|| EvalError::UnboundSymbol(s.clone()))?;
            if x.is_zero() && *e < 0 {
                return Err(EvalError::DivisionByZero);
            }
            v *= rat_pow(x, *e as i64);
        }
        acc += v;
    }
    Ok(acc)
}

fn eval_poly_f64(p: &Poly, point: &BTreeMap<Symbol, Rat>) -> Result<f64, EvalError> {
    let mut acc = 0.0;
    for t in &p.terms {
        let mut v = t.coeff.to_f64().unwrap_or(f64::NAN);
        for (s, e) in t.mono.pairs() {
            let x = point
                .get(s)
                .ok_or_else(|| EvalError::UnboundSymbol(s.clone()))?
                .to_f64()
                .unwrap_or(f64::NAN);
            if x == 0.0 && *e < 0 {
                return Err(EvalError::DivisionByZero);
            }
            v *= x.powi(*e);
        }
        if let Some(arg) = &t.exparg {
            v *= arg.eval_f64_map(point)?.exp();
        }
        acc += v;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> RatFun {
        RatFun::var(Symbol::new("x"))
    }

    fn y() -> RatFun {
        RatFun::var(Symbol::new("y"))
    }

    #[test]
    fn binomial_identity_cancels() {
        // (x+y)^2 - x^2 - 2xy - y^2 == 0
        let sum = x().add(&y());
        let square = sum.mul(&sum);
        let rest = x()
            .mul(&x())
            .add(&x().mul(&y()).scale_by_int(2))
            .add(&y().mul(&y()));
        assert!(square.sub(&rest).is_zero());
    }

    #[test]
    fn laurent_cancellation() {
        // y^2 * y^-2 == 1
        let y2 = y().mul(&y());
        let inv = y2.recip().unwrap();
        assert!(y2.mul(&inv).is_one());
    }

    #[test]
    fn exp_kernels_merge() {
        let t = RatFun::var(Symbol::new("t"));
        let e = RatFun::exp_of(&t);
        let einv = RatFun::exp_of(&t.neg());
        assert!(e.mul(&einv).is_one());
        let e2 = RatFun::exp_of(&t.scale_by_int(2));
        assert_eq!(e.mul(&e), e2);
    }

    #[test]
    fn factor_cancellation_by_trial_division() {
        // (x^2 - y^2) / (x + y) == x - y
        let diff_sq = x().mul(&x()).sub(&y().mul(&y()));
        let q = diff_sq.div(&x().add(&y())).unwrap();
        assert_eq!(q, x().sub(&y()));
    }

    #[test]
    fn partial_fraction_recombines() {
        // 1/(x+y) + 1/(x+y)^2 == (x+y+1)/(x+y)^2
        let f = x().add(&y());
        let a = f.recip().unwrap();
        let b = f.mul(&f).recip().unwrap();
        let lhs = a.add(&b);
        let rhs = f.add(&RatFun::one()).div(&f.mul(&f)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivative_of_inverse_square() {
        // d/dy (1/y^2) = -2/y^3
        let inv2 = y().pow(-2).unwrap();
        let d = inv2.derive(&Symbol::new("y"));
        let expected = y().pow(-3).unwrap().scale_by_int(-2);
        assert_eq!(d, expected);
    }

    #[test]
    fn derivative_chain_rule_exp() {
        // d/dt exp(-2t) = -2 exp(-2t)
        let t = RatFun::var(Symbol::new("t"));
        let e = RatFun::exp_of(&t.scale_by_int(-2));
        let d = e.derive(&Symbol::new("t"));
        assert_eq!(d, e.scale_by_int(-2));
    }

    #[test]
    fn quotient_rule_with_multi_term_denominator() {
        // d/dx [1/(x+y)] = -1/(x+y)^2
        let f = x().add(&y()).recip().unwrap();
        let d = f.derive(&Symbol::new("x"));
        let expected = x().add(&y()).pow(-2).unwrap().neg();
        assert_eq!(d, expected);
    }

    #[test]
    fn eval_exact_and_float() {
        let f = y().pow(-2).unwrap();
        let mut pt = BTreeMap::new();
        pt.insert(Symbol::new("y"), rat(2, 1));
        assert_eq!(f.eval(&pt).unwrap(), EvalValue::Exact(rat(1, 4)));

        let t = Symbol::new("t");
        let e = RatFun::exp_of(&RatFun::var(t.clone()).neg());
        let mut pt = BTreeMap::new();
        pt.insert(t, rat(1, 1));
        match e.eval(&pt).unwrap() {
            EvalValue::Float(v) => assert!((v - (-1.0f64).exp()).abs() < 1e-14),
            other => panic!("expected float, got {other:?}"),
        }
    }

    #[test]
    fn substitution_resolves() {
        let f = x().add(&y());
        let mut map = BTreeMap::new();
        map.insert(Symbol::new("x"), RatFun::integer(2));
        let g = f.substitute(&map).unwrap();
        assert_eq!(g, y().add(&RatFun::integer(2)));
        // singular substitution is rejected
        let inv = y().recip().unwrap();
        let mut map = BTreeMap::new();
        map.insert(Symbol::new("y"), RatFun::zero());
        assert!(inv.substitute(&map).is_none());
    }

    #[test]
    fn reciprocal_roundtrip_is_canonical() {
        let f = x().add(&y()).pow(-2).unwrap().mul(&x());
        let back = f.recip().unwrap().recip().unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn power_routes_agree() {
        // (x+y)^-2 vs 1/(x+y)^2: the second squares (expands) first.
        let s = x().add(&y());
        let a = s.pow(-2).unwrap();
        let b = RatFun::one().div(&s.pow(2).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.den.len(), 1);
        assert_eq!(a.den[0].1, 2, "factor exponent preserved");
    }

    #[test]
    fn partial_cancellation_against_power_factor() {
        // (x+y) / (x+y)^2 expanded == 1/(x+y)
        let s = x().add(&y());
        let sq_expanded = s.mul(&s);
        let q = s.div(&sq_expanded).unwrap();
        assert_eq!(q, s.recip().unwrap());
    }

    #[test]
    fn shared_exp_kernel_leaves_denominator() {
        // 1/(exp(-2t)·(x+y)) == exp(2t)/(x+y)
        let t = RatFun::var(Symbol::new("t"));
        let kernel = RatFun::exp_of(&t.clone().scale_by_int(-2));
        let den = kernel.mul(&x().add(&y()));
        let inv = den.recip().unwrap();
        let expected = RatFun::exp_of(&t.scale_by_int(2))
            .div(&x().add(&y()))
            .unwrap();
        assert_eq!(inv, expected);
    }
}
