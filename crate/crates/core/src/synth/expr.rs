//! Expression trees over named decision variables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;
use serde_json::Value;
use thiserror::Error;

use crate::exact::{to_f64, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed expression: {0}")]
pub struct ExprFormatError(pub String);

fn bad(msg: impl Into<String>) -> ExprFormatError {
    ExprFormatError(msg.into())
}

/// A numeric constant: exact, or a real carried as an IEEE double.
#[derive(Debug, Clone, PartialEq)]
pub enum Num {
    Rat(Rational),
    Float(f64),
}

impl Num {
    pub fn int(v: i64) -> Self {
        Num::Rat(Rational::from_integer(BigInt::from(v)))
    }

    pub fn value(&self) -> f64 {
        match self {
            Num::Rat(q) => to_f64(q),
            Num::Float(f) => *f,
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Num::Rat(q) => Some(q),
            Num::Float(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Num::Rat(q) => q.is_zero(),
            Num::Float(f) => *f == 0.0,
        }
    }

    pub fn from_json(v: &Value) -> Result<Num, ExprFormatError> {
        match v {
            Value::Number(n) => n.as_f64().map(Num::Float).ok_or_else(|| bad("number out of range")),
            Value::Object(m) => {
                let num = bigint_from_json(m.get("num").ok_or_else(|| bad("rational without num"))?)?;
                let den = bigint_from_json(m.get("den").ok_or_else(|| bad("rational without den"))?)?;
                if den.is_zero() {
                    return Err(bad("zero denominator"));
                }
                Ok(Num::Rat(Rational::new(num, den)))
            }
            _ => Err(bad("expected a number or {num,den}")),
        }
    }
}

fn bigint_json(v: &BigInt) -> Value {
    match v.to_i64() {
        Some(i) => Value::from(i),
        None => Value::from(v.to_string()),
    }
}

fn bigint_from_json(v: &Value) -> Result<BigInt, ExprFormatError> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .or_else(|| n.as_u64().map(BigInt::from))
            .ok_or_else(|| bad("non-integer rational part")),
        Value::String(s) => s.parse().map_err(|_| bad(format!("bad integer {s:?}"))),
        _ => Err(bad("rational parts must be integers")),
    }
}

/// Doubles are written in scientific notation with 17 significant digits.
fn float_raw(f: f64) -> Box<RawValue> {
    let text = if f.is_finite() { format!("{f:.16e}") } else { "null".to_string() };
    RawValue::from_string(text).expect("formatted double is valid JSON")
}

/// Serializer for plain `f64` fields using the same notation as [`Num::Float`].
pub fn serialize_double<S: Serializer>(f: &f64, s: S) -> Result<S::Ok, S::Error> {
    float_raw(*f).serialize(s)
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Num::Float(f) => float_raw(*f).serialize(s),
            Num::Rat(q) => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("num", &bigint_json(q.numer()))?;
                m.serialize_entry("den", &bigint_json(q.denom()))?;
                m.end()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Num),
    Var(String),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Square(Box<Expr>),
    Dot(Vec<Num>, Vec<String>),
    Min(Vec<Expr>),
}

impl Expr {
    pub fn int(v: i64) -> Self {
        Expr::Const(Num::int(v))
    }

    pub fn rat(q: Rational) -> Self {
        Expr::Const(Num::Rat(q))
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    pub fn quotient(num: Expr, den: Expr) -> Self {
        Expr::Div(Box::new(num), Box::new(den))
    }

    pub fn square(arg: Expr) -> Self {
        Expr::Square(Box::new(arg))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Expr::Const(_) => "const",
            Expr::Var(_) => "var",
            Expr::Add(_) => "add",
            Expr::Mul(_) => "mul",
            Expr::Div(..) => "div",
            Expr::Square(_) => "square",
            Expr::Dot(..) => "dot",
            Expr::Min(_) => "min",
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Add(xs) | Expr::Mul(xs) | Expr::Min(xs) => xs.iter().for_each(|x| x.collect_vars(out)),
            Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Square(a) => a.collect_vars(out),
            Expr::Dot(_, vars) => out.extend(vars.iter().cloned()),
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Evaluates left to right; `None` on unknown variables, zero
    /// denominators or non-finite intermediate values.
    pub fn eval(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Option<f64> {
        let v = match self {
            Expr::Const(n) => n.value(),
            Expr::Var(name) => lookup(name)?,
            Expr::Add(xs) => {
                let mut acc = 0.0;
                for x in xs {
                    acc += x.eval(lookup)?;
                }
                acc
            }
            Expr::Mul(xs) => {
                let mut acc = 1.0;
                for x in xs {
                    acc *= x.eval(lookup)?;
                }
                acc
            }
            Expr::Div(a, b) => {
                let den = b.eval(lookup)?;
                if den == 0.0 {
                    return None;
                }
                a.eval(lookup)? / den
            }
            Expr::Square(a) => {
                let x = a.eval(lookup)?;
                x * x
            }
            Expr::Dot(coeffs, vars) => {
                let mut acc = 0.0;
                for (c, v) in coeffs.iter().zip(vars) {
                    acc += c.value() * lookup(v)?;
                }
                acc
            }
            Expr::Min(xs) => {
                let mut best: Option<f64> = None;
                for x in xs {
                    let v = x.eval(lookup)?;
                    best = Some(best.map_or(v, |b| b.min(v)));
                }
                best?
            }
        };
        v.is_finite().then_some(v)
    }

    /// Exact affine form when every coefficient is rational.
    pub fn as_linear(&self) -> Option<LinearForm> {
        match self {
            Expr::Const(Num::Rat(q)) => Some(LinearForm::constant(q.clone())),
            Expr::Const(Num::Float(_)) => None,
            Expr::Var(v) => {
                let mut f = LinearForm::default();
                f.terms.insert(v.clone(), Rational::one());
                Some(f)
            }
            Expr::Add(xs) => {
                let mut acc = LinearForm::default();
                for x in xs {
                    acc.add_scaled(&x.as_linear()?, &Rational::one());
                }
                Some(acc)
            }
            Expr::Mul(xs) => {
                let mut scale = Rational::one();
                let mut inner: Option<LinearForm> = None;
                for x in xs {
                    let f = x.as_linear()?;
                    if f.terms.is_empty() {
                        scale *= f.constant;
                    } else if inner.is_none() {
                        inner = Some(f);
                    } else {
                        return None;
                    }
                }
                let mut out = LinearForm::default();
                out.add_scaled(&inner.unwrap_or_else(|| LinearForm::constant(Rational::one())), &scale);
                Some(out)
            }
            Expr::Dot(coeffs, vars) => {
                let mut f = LinearForm::default();
                for (c, v) in coeffs.iter().zip(vars) {
                    f.add_term(v, c.as_rational()?);
                }
                Some(f)
            }
            Expr::Div(..) | Expr::Square(_) | Expr::Min(_) => None,
        }
    }

    pub fn from_json(v: &Value) -> Result<Expr, ExprFormatError> {
        let obj = v.as_object().ok_or_else(|| bad("expression must be an object"))?;
        let kind = obj.get("kind").and_then(Value::as_str).ok_or_else(|| bad("missing kind"))?;
        let field = |name: &str| obj.get(name).ok_or_else(|| bad(format!("{kind} without {name}")));
        let list = |name: &str| -> Result<Vec<Expr>, ExprFormatError> {
            field(name)?
                .as_array()
                .ok_or_else(|| bad(format!("{name} must be an array")))?
                .iter()
                .map(Expr::from_json)
                .collect()
        };
        Ok(match kind {
            "const" => Expr::Const(Num::from_json(field("value")?)?),
            "var" => Expr::Var(field("name")?.as_str().ok_or_else(|| bad("name must be a string"))?.to_string()),
            "add" => Expr::Add(list("args")?),
            "mul" => Expr::Mul(list("args")?),
            "min" => Expr::Min(list("args")?),
            "div" => Expr::quotient(Expr::from_json(field("num")?)?, Expr::from_json(field("den")?)?),
            "square" => Expr::square(Expr::from_json(field("arg")?)?),
            "dot" => {
                let coeffs = field("coeffs")?
                    .as_array()
                    .ok_or_else(|| bad("coeffs must be an array"))?
                    .iter()
                    .map(Num::from_json)
                    .collect::<Result<Vec<_>, _>>()?;
                let vars = field("vars")?
                    .as_array()
                    .ok_or_else(|| bad("vars must be an array"))?
                    .iter()
                    .map(|x| x.as_str().map(str::to_string).ok_or_else(|| bad("var names must be strings")))
                    .collect::<Result<Vec<_>, _>>()?;
                if coeffs.len() != vars.len() {
                    return Err(bad("dot with mismatched lengths"));
                }
                Expr::Dot(coeffs, vars)
            }
            other => return Err(bad(format!("unknown kind {other:?}"))),
        })
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("kind", self.kind())?;
        match self {
            Expr::Const(n) => m.serialize_entry("value", n)?,
            Expr::Var(v) => m.serialize_entry("name", v)?,
            Expr::Add(xs) | Expr::Mul(xs) | Expr::Min(xs) => m.serialize_entry("args", xs)?,
            Expr::Div(a, b) => {
                m.serialize_entry("num", a)?;
                m.serialize_entry("den", b)?;
            }
            Expr::Square(a) => m.serialize_entry("arg", a)?,
            Expr::Dot(coeffs, vars) => {
                m.serialize_entry("coeffs", coeffs)?;
                m.serialize_entry("vars", vars)?;
            }
        }
        m.end()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, xs: &[Expr], sep: &str| -> fmt::Result {
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, "{sep}")?;
                }
                write!(f, "{x}")?;
            }
            Ok(())
        };
        match self {
            Expr::Const(n) => match n {
                Num::Rat(q) => write!(f, "{q}"),
                Num::Float(x) => write!(f, "{x}"),
            },
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Add(xs) => {
                write!(f, "(")?;
                join(f, xs, " + ")?;
                write!(f, ")")
            }
            Expr::Mul(xs) => join(f, xs, "*"),
            Expr::Div(a, b) => write!(f, "({a})/({b})"),
            Expr::Square(a) => write!(f, "({a})^2"),
            Expr::Dot(c, v) => {
                write!(f, "<")?;
                for (i, (c, v)) in c.iter().zip(v).enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{}*{v}", c.value())?;
                }
                write!(f, ">")
            }
            Expr::Min(xs) => {
                write!(f, "min(")?;
                join(f, xs, ", ")?;
                write!(f, ")")
            }
        }
    }
}

/// `sum terms[v] * v + constant`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearForm {
    pub terms: BTreeMap<String, Rational>,
    pub constant: Rational,
}

impl LinearForm {
    pub fn constant(q: Rational) -> Self {
        Self {
            terms: BTreeMap::new(),
            constant: q,
        }
    }

    fn add_term(&mut self, v: &str, c: &Rational) {
        let e = self.terms.entry(v.to_string()).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(v);
        }
    }

    fn add_scaled(&mut self, other: &LinearForm, s: &Rational) {
        for (v, c) in &other.terms {
            self.add_term(v, &(c * s));
        }
        self.constant += &other.constant * s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, ratio};

    fn sample() -> Expr {
        Expr::Add(vec![
            Expr::int(1),
            Expr::quotient(
                Expr::Dot(vec![Num::Float(0.5), Num::Float(-0.30901699437494745)], vec!["x1".into(), "x2".into()]),
                Expr::Add(vec![Expr::square(Expr::var("x1")), Expr::square(Expr::var("x2"))]),
            ),
            Expr::Min(vec![Expr::var("x1"), Expr::Mul(vec![Expr::rat(ratio(-3, 2)), Expr::var("x2")])]),
        ])
    }

    #[test]
    fn evaluation_and_guards() {
        let e = sample();
        let at = |a: f64, b: f64| move |n: &str| if n == "x1" { Some(a) } else if n == "x2" { Some(b) } else { None };
        let v = e.eval(&at(1.0, 2.0)).unwrap();
        let want = 1.0 + (0.5 - 2.0 * 0.30901699437494745) / 5.0 + (-3.0f64).min(1.0);
        assert_eq!(v, want);
        assert_eq!(e.eval(&at(0.0, 0.0)), None);
        assert_eq!(Expr::var("y").eval(&at(0.0, 0.0)), None);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let e = sample();
        let text = serde_json::to_string(&e).unwrap();
        assert!(text.contains("-3.0901699437494745e-1"));
        assert!(text.contains(r#"{"num":-3,"den":2}"#));
        let back = Expr::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn linear_extraction() {
        let e = Expr::Add(vec![
            Expr::Dot(vec![Num::int(1), Num::int(1)], vec!["x1".into(), "x2".into()]),
            Expr::Mul(vec![Expr::int(-3), Expr::var("q1")]),
            Expr::int(-2),
        ]);
        let f = e.as_linear().unwrap();
        assert_eq!(f.constant, rat(-2));
        assert_eq!(f.terms["q1"], rat(-3));
        assert_eq!(f.terms.len(), 3);
        assert!(sample().as_linear().is_none());
        let cancel = Expr::Add(vec![Expr::var("x"), Expr::Mul(vec![Expr::int(-1), Expr::var("x")])]);
        assert!(cancel.as_linear().unwrap().terms.is_empty());
    }
}
