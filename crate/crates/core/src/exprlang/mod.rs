//! Small real-valued expression language with forward-mode automatic
//! differentiation.
//!
//! Transition cocycles, partitions-of-unity arguments and curve
//! parameterisations are all supplied as expressions in this language.
//! The grammar covers numeric literals, variables, `+ - * / ^`, the
//! functions `sin cos tan exp log atan2 sqrt abs`, and the named
//! constants `pi` and `alpha` (the latter bound at evaluation time).
//!
//! Precedence: `^` binds tightest, then unary minus, then `* /`, then
//! `+ -`.  Everything is left-associative except `^`, which associates
//! to the right and admits a unary-minus exponent (`a^-b`).

mod dual;
mod parse;

pub use dual::Dual;
pub use parse::parse;

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Atan2,
    Sqrt,
    Abs,
}

impl Func {
    pub fn arity(self) -> usize {
        match self {
            Func::Atan2 => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Atan2 => "atan2",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "atan2" => Func::Atan2,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    Alpha,
}

/// Expression AST.  Canonical trees produced by the parser never hold
/// negative literals; negation is an explicit `Neg` node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Const(Constant),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    /// Free variables, sorted.  Constants `pi`/`alpha` are not variables.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) | Expr::Const(_) => {}
            Expr::Var(name) => {
                out.insert(name.clone());
            }
            Expr::Neg(inner) => inner.collect_vars(out),
            Expr::Bin(_, lhs, rhs) => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
            Expr::Call(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }

    /// Substitutes variables according to `map`; unmapped variables stay.
    pub fn substitute(&self, map: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        match self {
            Expr::Num(_) | Expr::Const(_) => self.clone(),
            Expr::Var(name) => map(name).unwrap_or_else(|| self.clone()),
            Expr::Neg(inner) => Expr::Neg(Box::new(inner.substitute(map))),
            Expr::Bin(op, lhs, rhs) => Expr::Bin(
                *op,
                Box::new(lhs.substitute(map)),
                Box::new(rhs.substitute(map)),
            ),
            Expr::Call(f, args) => {
                Expr::Call(*f, args.iter().map(|a| a.substitute(map)).collect())
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(name) => write!(f, "{name}"),
            Expr::Const(Constant::Pi) => write!(f, "pi"),
            Expr::Const(Constant::Alpha) => write!(f, "alpha"),
            Expr::Neg(inner) => {
                write!(f, "-")?;
                child(f, inner, inner.precedence() < 3)
            }
            Expr::Bin(op, lhs, rhs) => {
                let p = self.precedence();
                let (sym, right_assoc) = match op {
                    BinOp::Add => ("+", false),
                    BinOp::Sub => ("-", false),
                    BinOp::Mul => ("*", false),
                    BinOp::Div => ("/", false),
                    BinOp::Pow => ("^", true),
                };
                if right_assoc {
                    // `a^b^c` parses as `a^(b^c)`; a unary-minus exponent
                    // needs no parentheses because the grammar allows it.
                    child(f, lhs, lhs.precedence() <= p)?;
                    write!(f, "{sym}")?;
                    child(f, rhs, rhs.precedence() < 3)
                } else {
                    child(f, lhs, lhs.precedence() < p)?;
                    write!(f, "{sym}")?;
                    child(f, rhs, rhs.precedence() <= p)
                }
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Evaluation environment: variable bindings plus the optional `alpha`
/// constant.  All duals in one environment share a derivative width.
#[derive(Debug, Clone, Default)]
pub struct Env {
    vars: Vec<(String, Dual)>,
    alpha: Option<f64>,
    slots: usize,
}

impl Env {
    pub fn new(slots: usize) -> Self {
        Env {
            vars: Vec::new(),
            alpha: None,
            slots,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn set_alpha(&mut self, alpha: Option<f64>) {
        self.alpha = alpha;
    }

    pub fn bind(&mut self, name: &str, value: Dual) {
        assert_eq!(value.derivs.len(), self.slots, "dual width mismatch");
        if let Some(entry) = self.vars.iter_mut().find(|(n, _)| n == name) {
            entry.1 = value;
        } else {
            self.vars.push((name.to_string(), value));
        }
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    fn lookup(&self, name: &str) -> Option<&Dual> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, d)| d)
    }
}

/// Evaluates `e` in `env`, propagating derivatives through dual arithmetic.
pub fn eval_dual(e: &Expr, env: &Env) -> Result<Dual> {
    match e {
        Expr::Num(v) => Ok(Dual::constant(*v, env.slots)),
        Expr::Const(Constant::Pi) => Ok(Dual::constant(std::f64::consts::PI, env.slots)),
        Expr::Const(Constant::Alpha) => match env.alpha {
            Some(a) => Ok(Dual::constant(a, env.slots)),
            None => Err(Error::UnboundVariable {
                name: "alpha".into(),
            }),
        },
        Expr::Var(name) => env
            .lookup(name)
            .cloned()
            .ok_or_else(|| Error::UnboundVariable { name: name.clone() }),
        Expr::Neg(inner) => Ok(eval_dual(inner, env)?.neg()),
        Expr::Bin(op, lhs, rhs) => {
            let a = eval_dual(lhs, env)?;
            let b = eval_dual(rhs, env)?;
            match op {
                BinOp::Add => Ok(a.add(&b)),
                BinOp::Sub => Ok(a.sub(&b)),
                BinOp::Mul => Ok(a.mul(&b)),
                BinOp::Div => a.div(&b).map_err(|m| domain(e, m)),
                BinOp::Pow => a.pow(&b).map_err(|m| domain(e, m)),
            }
        }
        Expr::Call(func, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval_dual(a, env)?);
            }
            let r = match func {
                Func::Sin => Ok(vals[0].sin()),
                Func::Cos => Ok(vals[0].cos()),
                Func::Tan => vals[0].tan(),
                Func::Exp => Ok(vals[0].exp()),
                Func::Log => vals[0].log(),
                Func::Sqrt => vals[0].sqrt(),
                Func::Abs => vals[0].abs(),
                Func::Atan2 => vals[0].atan2(&vals[1]),
            };
            r.map_err(|m| domain(e, m))
        }
    }
}

/// Plain evaluation without derivative tracking.
pub fn eval(e: &Expr, env: &Env) -> Result<f64> {
    eval_dual(e, env).map(|d| d.value)
}

fn domain(e: &Expr, message: String) -> Error {
    Error::Domain {
        expr: e.to_string(),
        message,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn env1(name: &str, v: f64) -> Env {
        let mut env = Env::new(1);
        env.bind(name, Dual::var(v, 0, 1));
        env
    }

    #[test]
    fn parse_records_free_vars() {
        let e = parse("sin(u)^2+cos(u)^2").unwrap();
        let vars: Vec<_> = e.free_vars().into_iter().collect();
        assert_eq!(vars, vec!["u".to_string()]);
        let e = parse("atan2(v,u)").unwrap();
        let vars: Vec<_> = e.free_vars().into_iter().collect();
        assert_eq!(vars, vec!["u".to_string(), "v".to_string()]);
    }

    #[test]
    fn syntax_error_carries_offset() {
        match parse("u*)") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(parse("").is_err());
        match parse("frob(u)") {
            Err(Error::UnknownFunction { name, offset }) => {
                assert_eq!(name, "frob");
                assert_eq!(offset, 0);
            }
            other => panic!("expected unknown function, got {other:?}"),
        }
    }

    #[test]
    fn product_rule() {
        let mut env = Env::new(2);
        env.bind("u", Dual::var(2.0, 0, 2));
        env.bind("v", Dual::var(3.0, 1, 2));
        let d = eval_dual(&parse("u*v").unwrap(), &env).unwrap();
        assert_eq!(d.value, 6.0);
        assert_eq!(d.derivs, vec![3.0, 2.0]);
    }

    #[test]
    fn sine_at_zero() {
        let d = eval_dual(&parse("sin(u)").unwrap(), &env1("u", 0.0)).unwrap();
        assert_eq!(d.value, 0.0);
        assert_eq!(d.derivs[0], 1.0);
    }

    #[test]
    fn exp_matches_central_difference() {
        // Oracle: central finite difference with h = 1e-6.
        let e = parse("exp(u)").unwrap();
        let d = eval_dual(&e, &env1("u", 1.0)).unwrap();
        assert!((d.value - 1f64.exp()).abs() < 1e-12);
        let h = 1e-6;
        let fp = eval(&e, &env1("u", 1.0 + h)).unwrap();
        let fm = eval(&e, &env1("u", 1.0 - h)).unwrap();
        let fd = (fp - fm) / (2.0 * h);
        assert!((d.derivs[0] - fd).abs() < 1e-8);
        assert!((d.derivs[0] - d.value).abs() < 1e-12);
    }

    #[test]
    fn domain_errors_are_structured() {
        assert!(matches!(
            eval(&parse("log(u)").unwrap(), &env1("u", -1.0)),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            eval(&parse("1/u").unwrap(), &env1("u", 0.0)),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            eval(&parse("u+w").unwrap(), &env1("u", 0.0)),
            Err(Error::UnboundVariable { .. })
        ));
    }

    #[test]
    fn alpha_binds_at_evaluation() {
        let e = parse("alpha*u").unwrap();
        let mut env = env1("u", 2.0);
        assert!(eval(&e, &env).is_err());
        env.set_alpha(Some(std::f64::consts::SQRT_2));
        assert!((eval(&e, &env).unwrap() - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    // --- randomised invariants -------------------------------------------

    const VARS: [&str; 3] = ["u", "v", "w"];

    fn random_expr(rng: &mut ChaCha8Rng, depth: usize) -> Expr {
        if depth == 0 || rng.gen_bool(0.3) {
            return match rng.gen_range(0..4) {
                0 => Expr::Num((rng.gen_range(1..=50) as f64) / 10.0),
                1 => Expr::Const(Constant::Pi),
                _ => Expr::Var(VARS[rng.gen_range(0..VARS.len())].to_string()),
            };
        }
        match rng.gen_range(0..8) {
            0 => Expr::Bin(
                BinOp::Add,
                Box::new(random_expr(rng, depth - 1)),
                Box::new(random_expr(rng, depth - 1)),
            ),
            1 => Expr::Bin(
                BinOp::Sub,
                Box::new(random_expr(rng, depth - 1)),
                Box::new(random_expr(rng, depth - 1)),
            ),
            2 => Expr::Bin(
                BinOp::Mul,
                Box::new(random_expr(rng, depth - 1)),
                Box::new(random_expr(rng, depth - 1)),
            ),
            3 => Expr::Bin(
                BinOp::Div,
                Box::new(random_expr(rng, depth - 1)),
                Box::new(random_expr(rng, depth - 1)),
            ),
            4 => Expr::Bin(
                BinOp::Pow,
                Box::new(random_expr(rng, depth - 1)),
                Box::new(Expr::Num(rng.gen_range(1..=3) as f64)),
            ),
            5 => Expr::Neg(Box::new(random_expr(rng, depth - 1))),
            6 => {
                let f = [Func::Sin, Func::Cos, Func::Exp, Func::Sqrt, Func::Log]
                    [rng.gen_range(0..5)];
                Expr::Call(f, vec![random_expr(rng, depth - 1)])
            }
            _ => Expr::Call(
                Func::Atan2,
                vec![random_expr(rng, depth - 1), random_expr(rng, depth - 1)],
            ),
        }
    }

    fn env_at(point: &[f64; 3], slots: usize) -> Env {
        let mut env = Env::new(slots);
        for (i, name) in VARS.iter().enumerate() {
            let d = if slots == 3 {
                Dual::var(point[i], i, 3)
            } else {
                Dual::constant(point[i], slots)
            };
            env.bind(name, d);
        }
        env
    }

    #[test]
    fn round_trip_parse_print_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 1000 {
            let e = random_expr(&mut rng, 4);
            let printed = e.to_string();
            let reparsed = parse(&printed)
                .unwrap_or_else(|err| panic!("failed to reparse `{printed}`: {err}"));
            assert_eq!(reparsed, e, "round trip mismatch for `{printed}`");
            checked += 1;
        }
    }

    #[test]
    fn duals_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-6;
        let mut checked = 0;
        'outer: while checked < 1000 {
            let e = random_expr(&mut rng, 5);
            let point = [
                rng.gen_range(0.2..2.0),
                rng.gen_range(0.2..2.0),
                rng.gen_range(0.2..2.0),
            ];
            let d = match eval_dual(&e, &env_at(&point, 3)) {
                Ok(d) if d.value.is_finite() && d.derivs.iter().all(|x| x.is_finite()) => d,
                _ => continue,
            };
            // Skip badly conditioned samples: the comparison is about
            // correctness of propagation, not about stiff expressions.
            if d.value.abs() > 1e4 || d.derivs.iter().any(|x| x.abs() > 1e4) {
                continue;
            }
            for slot in 0..3 {
                let mut hi = point;
                let mut lo = point;
                hi[slot] += h;
                lo[slot] -= h;
                let (fp, fm) = match (
                    eval(&e, &env_at(&hi, 0)),
                    eval(&e, &env_at(&lo, 0)),
                ) {
                    (Ok(a), Ok(b)) => (a, b),
                    _ => continue 'outer,
                };
                let fd = (fp - fm) / (2.0 * h);
                if !fd.is_finite() {
                    continue 'outer;
                }
                let scale = d.derivs[slot].abs().max(1.0);
                assert!(
                    (d.derivs[slot] - fd).abs() <= 1e-6 * scale,
                    "expr `{e}` slot {slot}: dual {} vs fd {fd}",
                    d.derivs[slot]
                );
            }
            checked += 1;
        }
    }
}
