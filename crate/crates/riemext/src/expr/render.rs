//! Deterministic rendering of canonical expression trees.
//!
//! The text format re-parses to an equal expression; negative powers print
//! as divisions (`Power(y, -2)` is `1/y^2`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::tree::ExprTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Latex,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "text" => Ok(Format::Text),
            "latex" => Ok(Format::Latex),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected text, latex, or json)")),
        }
    }
}

pub(crate) fn render(tree: &ExprTree, format: Format) -> String {
    match format {
        Format::Text => text(tree),
        Format::Latex => latex(tree),
        Format::Json => serde_json::to_string(&json_value(tree)).expect("json render"),
    }
}

// ---------------------------------------------------------------------------
// Text
// ---------------------------------------------------------------------------

fn text(tree: &ExprTree) -> String {
    match tree {
        ExprTree::Sum(terms) => {
            let mut out = String::new();
            for (i, t) in terms.iter().enumerate() {
                if i == 0 {
                    out.push_str(&text(t));
                } else if let Some(pos) = strip_leading_minus(t) {
                    out.push_str(" - ");
                    out.push_str(&text(&pos));
                } else {
                    out.push_str(" + ");
                    out.push_str(&text(t));
                }
            }
            out
        }
        _ => text_product_like(std::slice::from_ref(tree)),
    }
}

/// Splits a leading negative constant off a term so sums print with `-`.
fn strip_leading_minus(t: &ExprTree) -> Option<ExprTree> {
    match t {
        ExprTree::Constant(c) if c.is_negative() => Some(ExprTree::Constant(-c.clone())),
        ExprTree::Product(fs) => match fs.first() {
            Some(ExprTree::Constant(c)) if c.is_negative() => {
                let mut rest: Vec<ExprTree> = fs[1..].to_vec();
                let c = -c.clone();
                if !c.is_one() || rest.is_empty() {
                    rest.insert(0, ExprTree::Constant(c));
                }
                Some(if rest.len() == 1 { rest.pop().expect("len checked") } else { ExprTree::Product(rest) })
            }
            _ => None,
        },
        _ => None,
    }
}

/// Renders a product's factors (or a single non-sum node) as
/// `numerator/denominator`, folding the rational coefficient in.
fn text_product_like(factors: &[ExprTree]) -> String {
    let mut flat: Vec<&ExprTree> = Vec::new();
    for f in factors {
        if let ExprTree::Product(fs) = f {
            flat.extend(fs.iter());
        } else {
            flat.push(f);
        }
    }
    let mut negative = false;
    let mut coeff_num = BigInt::one();
    let mut coeff_den = BigInt::one();
    let mut num_parts: Vec<String> = Vec::new();
    let mut den_parts: Vec<String> = Vec::new();
    for f in flat {
        match f {
            ExprTree::Constant(c) => {
                if c.is_negative() {
                    negative = !negative;
                }
                coeff_num *= c.numer().abs();
                coeff_den *= c.denom().clone();
            }
            ExprTree::Power(base, e) if *e < 0 => {
                den_parts.push(text_power(base, -e));
            }
            ExprTree::Power(base, e) => {
                num_parts.push(text_power(base, *e));
            }
            other => num_parts.push(text_atom(other)),
        }
    }
    if !coeff_num.is_one() || num_parts.is_empty() {
        num_parts.insert(0, coeff_num.to_string());
    }
    if !coeff_den.is_one() {
        den_parts.insert(0, coeff_den.to_string());
    }
    let num_str = num_parts.join("*");
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&num_str);
    match den_parts.len() {
        0 => {}
        1 => {
            out.push('/');
            out.push_str(&den_parts[0]);
        }
        _ => {
            out.push_str("/(");
            out.push_str(&den_parts.join("*"));
            out.push(')');
        }
    }
    out
}

fn text_power(base: &ExprTree, e: i64) -> String {
    let b = text_atom(base);
    if e == 1 {
        b
    } else {
        format!("{b}^{e}")
    }
}

/// An atom in a product position: parenthesized when needed.
fn text_atom(t: &ExprTree) -> String {
    match t {
        ExprTree::Constant(c) => {
            if c.is_negative() || !c.is_integer() {
                format!("({c})")
            } else {
                c.to_string()
            }
        }
        ExprTree::Variable(s) => s.name().to_owned(),
        ExprTree::Exp(arg) => format!("exp({})", text(arg)),
        ExprTree::Sum(_) => format!("({})", text(t)),
        ExprTree::Product(_) => format!("({})", text(t)),
        ExprTree::Power(_, _) => text(t),
    }
}

// ---------------------------------------------------------------------------
// LaTeX
// ---------------------------------------------------------------------------

fn latex(tree: &ExprTree) -> String {
    match tree {
        ExprTree::Sum(terms) => {
            let mut out = String::new();
            for (i, t) in terms.iter().enumerate() {
                if i == 0 {
                    out.push_str(&latex(t));
                } else if let Some(pos) = strip_leading_minus(t) {
                    out.push_str(" - ");
                    out.push_str(&latex(&pos));
                } else {
                    out.push_str(" + ");
                    out.push_str(&latex(t));
                }
            }
            out
        }
        _ => latex_product_like(std::slice::from_ref(tree)),
    }
}

fn latex_product_like(factors: &[ExprTree]) -> String {
    let mut flat: Vec<&ExprTree> = Vec::new();
    for f in factors {
        if let ExprTree::Product(fs) = f {
            flat.extend(fs.iter());
        } else {
            flat.push(f);
        }
    }
    let mut negative = false;
    let mut coeff_num = BigInt::one();
    let mut coeff_den = BigInt::one();
    let mut num_parts: Vec<String> = Vec::new();
    let mut den_parts: Vec<String> = Vec::new();
    for f in flat {
        match f {
            ExprTree::Constant(c) => {
                if c.is_negative() {
                    negative = !negative;
                }
                coeff_num *= c.numer().abs();
                coeff_den *= c.denom().clone();
            }
            ExprTree::Power(base, e) if *e < 0 => den_parts.push(latex_power(base, -e)),
            ExprTree::Power(base, e) => num_parts.push(latex_power(base, *e)),
            other => num_parts.push(latex_atom(other)),
        }
    }
    if !coeff_num.is_one() || num_parts.is_empty() {
        num_parts.insert(0, coeff_num.to_string());
    }
    if !coeff_den.is_one() {
        den_parts.insert(0, coeff_den.to_string());
    }
    let num_str = num_parts.join(" ");
    let body = if den_parts.is_empty() {
        num_str
    } else {
        format!("\\frac{{{}}}{{{}}}", num_str, den_parts.join(" "))
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

fn latex_power(base: &ExprTree, e: i64) -> String {
    let b = latex_atom(base);
    if e == 1 {
        b
    } else {
        format!("{b}^{{{e}}}")
    }
}

fn latex_atom(t: &ExprTree) -> String {
    match t {
        ExprTree::Constant(c) => {
            if c.is_integer() {
                c.to_string()
            } else {
                format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom())
            }
        }
        ExprTree::Variable(s) => latex_symbol(s.name()),
        ExprTree::Exp(arg) => format!("e^{{{}}}", latex(arg)),
        ExprTree::Sum(_) | ExprTree::Product(_) => format!("\\left({}\\right)", latex(t)),
        ExprTree::Power(_, _) => latex(t),
    }
}

/// `p1` prints as `p_{1}`; other names verbatim.
fn latex_symbol(name: &str) -> String {
    let head: String = name.chars().take_while(|c| !c.is_ascii_digit()).collect();
    let tail: String = name.chars().skip(head.chars().count()).collect();
    if !head.is_empty() && !tail.is_empty() && tail.chars().all(|c| c.is_ascii_digit()) {
        format!("{head}_{{{tail}}}")
    } else {
        name.to_owned()
    }
}

// ---------------------------------------------------------------------------
// JSON (nested tagged nodes)
// ---------------------------------------------------------------------------

fn json_value(tree: &ExprTree) -> serde_json::Value {
    use serde_json::json;
    match tree {
        ExprTree::Constant(c) => json!({ "kind": "constant", "value": rational_string(c) }),
        ExprTree::Variable(s) => json!({ "kind": "variable", "name": s.name() }),
        ExprTree::Sum(terms) => {
            json!({ "kind": "sum", "terms": terms.iter().map(json_value).collect::<Vec<_>>() })
        }
        ExprTree::Product(fs) => {
            json!({ "kind": "product", "factors": fs.iter().map(json_value).collect::<Vec<_>>() })
        }
        ExprTree::Power(base, e) => {
            json!({ "kind": "power", "base": json_value(base), "exponent": e })
        }
        ExprTree::Exp(arg) => json!({ "kind": "exp", "argument": json_value(arg) }),
    }
}

fn rational_string(c: &BigRational) -> String {
    c.to_string()
}
