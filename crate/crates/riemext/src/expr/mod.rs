//! Exact symbolic scalars.
//!
//! An [`Expression`] is an immutable, canonically normalized scalar: a
//! rational function of variables and independent `exp` kernels with exact
//! big-rational coefficients. Construction normalizes, so syntactic equality
//! of two `Expression`s is mathematical equality of their normal forms, and
//! `is_canonical_zero` is a decision procedure on that fragment.

mod parser;
mod render;
mod tree;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ratfun::{rat, RatFun};
use crate::symbol::Symbol;

pub use crate::ratfun::{EvalError, EvalValue};
pub use parser::ParseError;
pub use render::Format;
pub use tree::ExprTree;

/// An exact symbolic scalar in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expression {
    rf: Arc<RatFun>,
}

impl Expression {
    pub(crate) fn from_ratfun(rf: RatFun) -> Expression {
        Expression { rf: Arc::new(rf) }
    }

    pub(crate) fn ratfun(&self) -> &RatFun {
        &self.rf
    }

    pub fn zero() -> Expression {
        Expression::from_ratfun(RatFun::zero())
    }

    pub fn one() -> Expression {
        Expression::from_ratfun(RatFun::one())
    }

    pub fn int(n: i64) -> Expression {
        Expression::from_ratfun(RatFun::integer(n))
    }

    /// The exact rational `n/d`. Panics when `d == 0`.
    pub fn rational(n: i64, d: i64) -> Expression {
        assert!(d != 0, "rational constant with zero denominator");
        Expression::from_ratfun(RatFun::constant(rat(n, d)))
    }

    pub fn from_rat(r: BigRational) -> Expression {
        Expression::from_ratfun(RatFun::constant(r))
    }

    pub fn var(s: impl Into<Symbol>) -> Expression {
        Expression::from_ratfun(RatFun::var(s.into()))
    }

    pub fn is_canonical_zero(&self) -> bool {
        self.rf.is_zero()
    }

    pub fn is_canonical_one(&self) -> bool {
        self.rf.is_one()
    }

    /// The exact rational value when the expression is constant.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.rf.as_rational()
    }

    /// Expressions are canonical by construction, so this is the identity;
    /// it exists so callers can state intent.
    pub fn normalize(&self) -> Expression {
        self.clone()
    }

    pub fn pow(&self, k: i64) -> Option<Expression> {
        self.rf.pow(k).map(Expression::from_ratfun)
    }

    /// Division that reports a canonically zero divisor instead of panicking.
    pub fn checked_div(&self, other: &Expression) -> Option<Expression> {
        self.rf.div(&other.rf).map(Expression::from_ratfun)
    }

    pub fn exp_of(arg: &Expression) -> Expression {
        Expression::from_ratfun(RatFun::exp_of(&arg.rf))
    }

    /// Exact partial derivative with respect to `s`.
    pub fn derive(&self, s: &Symbol) -> Expression {
        Expression::from_ratfun(self.rf.derive(s))
    }

    /// Simultaneous substitution followed by normalization. Fails only when
    /// a substitution makes a denominator canonically zero.
    pub fn substitute(
        &self,
        map: &BTreeMap<Symbol, Expression>,
    ) -> Result<Expression, EvalError> {
        let inner: BTreeMap<Symbol, RatFun> = map
            .iter()
            .map(|(k, v)| (k.clone(), v.rf.as_ref().clone()))
            .collect();
        self.rf
            .substitute(&inner)
            .map(Expression::from_ratfun)
            .ok_or(EvalError::DivisionByZero)
    }

    /// Evaluation at an exact rational point: exact when no `exp` kernel is
    /// present, floating otherwise.
    pub fn eval(&self, point: &BTreeMap<Symbol, BigRational>) -> Result<EvalValue, EvalError> {
        self.rf.eval(point)
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        self.rf.free_symbols()
    }

    pub fn depends_on(&self, s: &Symbol) -> bool {
        self.rf.free_symbols().contains(s)
    }

    pub fn parse(text: &str) -> Result<Expression, ParseError> {
        parser::parse_expression(text)
    }

    pub fn render(&self, format: Format) -> String {
        render::render(&self.to_tree(), format)
    }

    pub fn to_tree(&self) -> ExprTree {
        tree::ratfun_to_tree(&self.rf)
    }

    pub fn from_tree(tree: &ExprTree) -> Result<Expression, EvalError> {
        tree::tree_to_ratfun(tree)
            .map(Expression::from_ratfun)
            .ok_or(EvalError::DivisionByZero)
    }

    /// Three-valued randomized zero test; see [`ZeroVerdict`].
    pub fn is_zero(&self, params: &ZeroParams) -> ZeroVerdict {
        if self.is_canonical_zero() {
            return ZeroVerdict::zero();
        }
        let syms: Vec<Symbol> = self.free_symbols().into_iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let threshold_rat = BigRational::from_float(params.threshold)
            .unwrap_or_else(|| rat(1, 1_000_000_000));
        let mut valid = 0u32;
        let mut attempts = 0u32;
        let max_attempts = params.trials.saturating_mul(10).max(1);
        while valid < params.trials && attempts < max_attempts {
            attempts += 1;
            let point = sample_point(&syms, &mut rng);
            match self.rf.defined_at(&point) {
                Ok(true) => {}
                _ => continue,
            }
            let Ok(value) = self.rf.eval(&point) else { continue };
            let exceeded = match &value {
                EvalValue::Exact(v) => v.abs() > threshold_rat,
                EvalValue::Float(f) => {
                    if !f.is_finite() {
                        continue;
                    }
                    f.abs() > params.threshold
                }
            };
            if exceeded {
                return ZeroVerdict {
                    verdict: Verdict::NonZero,
                    witness: Some(Witness::from_point(point, &value)),
                };
            }
            valid += 1;
        }
        ZeroVerdict { verdict: Verdict::Unknown, witness: None }
    }
}

fn sample_point(syms: &[Symbol], rng: &mut ChaCha8Rng) -> BTreeMap<Symbol, BigRational> {
    // Rationals in [-10, 10] with denominator at most 64.
    let mut point = BTreeMap::new();
    for s in syms {
        let den: i64 = rng.gen_range(1..=64);
        let num: i64 = rng.gen_range(-(10 * den)..=(10 * den));
        point.insert(s.clone(), rat(num, den));
    }
    point
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(Format::Text))
    }
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expression({})", self.render(Format::Text))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl std::ops::$trait for &Expression {
            type Output = Expression;
            fn $method(self, other: &Expression) -> Expression {
                Expression::from_ratfun(self.rf.$inner(&other.rf))
            }
        }
        impl std::ops::$trait for Expression {
            type Output = Expression;
            fn $method(self, other: Expression) -> Expression {
                (&self).$method(&other)
            }
        }
        impl std::ops::$trait<&Expression> for Expression {
            type Output = Expression;
            fn $method(self, other: &Expression) -> Expression {
                (&self).$method(other)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);

impl std::ops::Neg for &Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression::from_ratfun(self.rf.neg())
    }
}

impl std::ops::Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        -&self
    }
}

/// Parameters for randomized zero-testing: number of valid sample points,
/// the numeric threshold a witness must exceed, and the RNG seed.
#[derive(Clone, Debug)]
pub struct ZeroParams {
    pub trials: u32,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for ZeroParams {
    fn default() -> Self {
        ZeroParams { trials: 20, threshold: 1e-9, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// The canonical form is literally the constant 0.
    Zero,
    /// A sample point was found where the value exceeds the threshold.
    NonZero,
    /// Neither: not canonically zero, but no witness found.
    Unknown,
}

/// Outcome of a zero test, with the witness point when one was found.
#[derive(Clone, Debug)]
pub struct ZeroVerdict {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

impl ZeroVerdict {
    pub fn zero() -> ZeroVerdict {
        ZeroVerdict { verdict: Verdict::Zero, witness: None }
    }

    pub fn is_zero(&self) -> bool {
        self.verdict == Verdict::Zero
    }
}

/// A sample point exhibiting a nonzero value.
#[derive(Clone, Debug)]
pub struct Witness {
    pub point: BTreeMap<Symbol, BigRational>,
    pub value: String,
    pub magnitude: f64,
    /// Tensor component the witness belongs to, for tensor-level checks.
    pub component: Option<Vec<usize>>,
}

impl Witness {
    fn from_point(point: BTreeMap<Symbol, BigRational>, value: &EvalValue) -> Witness {
        let (value_str, magnitude) = match value {
            EvalValue::Exact(v) => (v.to_string(), v.to_f64().unwrap_or(f64::INFINITY).abs()),
            EvalValue::Float(f) => (format!("{f:.12e}"), f.abs()),
        };
        Witness { point, value: value_str, magnitude, component: None }
    }
}

const _: () = {
    fn assert_send_sync<T: Send + Sync>() {}
    fn check() {
        assert_send_sync::<Expression>();
        assert_send_sync::<ZeroVerdict>();
    }
    let _ = check;
};

#[cfg(test)]
mod tests {
    use super::*;

    fn e(text: &str) -> Expression {
        Expression::parse(text).unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert!(e("(x+y)^2 - x^2 - 2*x*y - y^2").is_canonical_zero());
        assert!(e("exp(t)*exp(-t)").is_canonical_one());
        assert!(e("y^2*(1/y^2)").is_canonical_one());
    }

    #[test]
    fn derive_examples() {
        let y = Symbol::new("y");
        assert_eq!(e("1/y^2").derive(&y), e("-2/y^3"));
        let t = Symbol::new("t");
        assert_eq!(e("exp(-2*t)*a").derive(&t), e("-2*exp(-2*t)*a"));
        let x = Symbol::new("x");
        assert_eq!(e("x*y + y^2").derive(&x), e("y"));
        assert!(e("5/7").derive(&x).is_canonical_zero());
    }

    #[test]
    fn derive_is_zero_for_absent_symbol() {
        let z = Symbol::new("zq");
        assert!(e("x*y + 1/y + exp(2*x)").derive(&z).is_canonical_zero());
    }

    #[test]
    fn substitute_examples() {
        let bind = |s: &str, v: Expression| {
            let mut m = BTreeMap::new();
            m.insert(Symbol::new(s), v);
            m
        };
        assert_eq!(
            e("x+y").substitute(&bind("x", Expression::int(2))).unwrap(),
            e("y+2")
        );
        assert_eq!(
            e("1/y^2").substitute(&bind("y", Expression::one())).unwrap(),
            Expression::one()
        );
        assert_eq!(
            e("g0*exp(-2*t)").substitute(&bind("t", Expression::zero())).unwrap(),
            e("g0")
        );
        assert_eq!(
            e("1/y").substitute(&bind("y", Expression::zero())),
            Err(EvalError::DivisionByZero)
        );
    }

    #[test]
    fn eval_examples() {
        let pt = |s: &str, n: i64, d: i64| {
            let mut m = BTreeMap::new();
            m.insert(Symbol::new(s), rat(n, d));
            m
        };
        assert_eq!(e("1/y^2").eval(&pt("y", 2, 1)).unwrap(), EvalValue::Exact(rat(1, 4)));
        let mut m = pt("x", 3, 1);
        m.insert(Symbol::new("y"), rat(5, 1));
        assert_eq!(e("x*y").eval(&m).unwrap(), EvalValue::Exact(rat(15, 1)));
        assert_eq!(e("1/y").eval(&pt("y", 0, 1)), Err(EvalError::DivisionByZero));
        assert_eq!(e("x").eval(&pt("y", 1, 1)), Err(EvalError::UnboundSymbol(Symbol::new("x"))));
    }

    #[test]
    fn zero_verdicts() {
        let zp = ZeroParams::default();
        assert_eq!(e("(x+y)^2 - x^2 - 2*x*y - y^2").is_zero(&zp).verdict, Verdict::Zero);
        let v = e("x - y").is_zero(&zp);
        assert_eq!(v.verdict, Verdict::NonZero);
        let w = v.witness.expect("witness required for NonZero");
        assert!(w.magnitude > zp.threshold);
        // Tiny but canonically nonzero constant stays Unknown.
        let tiny = Expression::one()
            .checked_div(&Expression::parse("1000000000000000000000000000000").unwrap())
            .unwrap();
        assert_eq!(tiny.is_zero(&zp).verdict, Verdict::Unknown);
    }

    #[test]
    fn zero_test_avoids_singular_points() {
        // 1/x - 1/x is canonically zero; (x-y)/(x-y) needs sampling away from x=y.
        let f = e("(x - y)/(x - y) - 1");
        assert_eq!(f.is_zero(&ZeroParams::default()).verdict, Verdict::Zero);
        let g = e("1/(x - y)");
        assert_eq!(g.is_zero(&ZeroParams::default()).verdict, Verdict::NonZero);
    }

    #[test]
    fn float_eval_precision() {
        let t = Symbol::new("t");
        let f = Expression::exp_of(&-Expression::var(t.clone()));
        let mut m = BTreeMap::new();
        m.insert(t, rat(3, 2));
        let v = f.eval(&m).unwrap().as_f64();
        let expected = (-1.5f64).exp();
        assert!((v - expected).abs() <= 1e-12 * expected.abs());
    }
}
