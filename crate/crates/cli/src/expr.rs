//! Arithmetic expressions in scenario files.
//!
//! Parsing is delegated to `evalexpr`; the parsed tree is then restricted to
//! `+ - * / ^`, the functions `abs exp cos sin min max`, numeric literals and
//! a fixed list of variable names. Integer literals are widened to floats so
//! that `1/2` means one half, and `^` associates to the right.

use std::f64::consts::PI;
use std::fmt;

use evalexpr::{build_operator_tree, Context, DefaultNumericTypes, EvalexprError, Node, Operator, Value};

type Val = Value<DefaultNumericTypes>;
type EvalResult = Result<Val, EvalexprError<DefaultNumericTypes>>;

pub const FUNCTIONS: [&str; 6] = ["abs", "exp", "cos", "sin", "min", "max"];

/// A parsed expression over an ordered list of variables.
#[derive(Clone)]
pub struct Expr {
    source: String,
    tree: Node<DefaultNumericTypes>,
    names: Vec<String>,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

struct Bindings<'a> {
    names: &'a [String],
    values: Vec<Val>,
    pi: Val,
}

impl Context for Bindings<'_> {
    type NumericTypes = DefaultNumericTypes;

    fn get_value(&self, identifier: &str) -> Option<&Val> {
        if identifier == "pi" {
            return Some(&self.pi);
        }
        self.names.iter().position(|n| n == identifier).map(|i| &self.values[i])
    }

    fn call_function(&self, identifier: &str, argument: &Val) -> EvalResult {
        let unary = |f: fn(f64) -> f64| -> EvalResult { Ok(Value::Float(f(argument.as_number()?))) };
        let fold = |f: fn(f64, f64) -> f64| -> EvalResult {
            let args = argument.as_tuple()?;
            if args.len() < 2 {
                return Err(EvalexprError::WrongFunctionArgumentAmount {
                    expected: 2..=usize::MAX,
                    actual: args.len(),
                });
            }
            let mut acc = args[0].as_number()?;
            for a in &args[1..] {
                acc = f(acc, a.as_number()?);
            }
            Ok(Value::Float(acc))
        };
        match identifier {
            "abs" => unary(f64::abs),
            "exp" => unary(f64::exp),
            "cos" => unary(f64::cos),
            "sin" => unary(f64::sin),
            "min" => fold(f64::min),
            "max" => fold(f64::max),
            other => Err(EvalexprError::FunctionIdentifierNotFound(other.to_string())),
        }
    }

    fn are_builtin_functions_disabled(&self) -> bool {
        true
    }

    fn set_builtin_functions_disabled(&mut self, _: bool) -> Result<(), EvalexprError<DefaultNumericTypes>> {
        Err(EvalexprError::CustomMessage(
            "builtin functions are always disabled".into(),
        ))
    }
}

/// `evalexpr` groups `a^b^c` as `(a^b)^c`; rotate unparenthesised chains
/// to the usual `a^(b^c)`. Parentheses appear as root nodes and stop the
/// rotation.
fn right_associate(node: &mut Node<DefaultNumericTypes>) {
    let is_exp = |n: &Node<DefaultNumericTypes>| matches!(n.operator(), Operator::Exp);
    while is_exp(node) && node.children().first().is_some_and(is_exp) {
        let mut kids = std::mem::take(node.children_mut());
        let (Some(c), Some(mut left)) = (kids.pop(), kids.pop()) else {
            unreachable!("power has two operands")
        };
        let mut inner = std::mem::take(left.children_mut());
        let (Some(b), Some(a)) = (inner.pop(), inner.pop()) else {
            unreachable!("power has two operands")
        };
        *left.children_mut() = vec![b, c];
        *node.children_mut() = vec![a, left];
    }
    for child in node.children_mut() {
        right_associate(child);
    }
}

/// Widens integer literals and rejects anything outside the supported
/// subset.
fn restrict(node: &mut Node<DefaultNumericTypes>, names: &[String]) -> Result<(), String> {
    match node.operator_mut() {
        Operator::RootNode
        | Operator::Add
        | Operator::Sub
        | Operator::Neg
        | Operator::Mul
        | Operator::Div
        | Operator::Exp
        | Operator::Tuple => {}
        Operator::Const { value } => match value {
            Value::Int(i) => *value = Value::Float(*i as f64),
            Value::Float(_) => {}
            other => return Err(format!("unsupported literal {other}")),
        },
        Operator::VariableIdentifierRead { identifier } => {
            if identifier != "pi" && !names.iter().any(|n| n == identifier) {
                return Err(format!(
                    "unknown variable `{identifier}` (allowed: {}, pi)",
                    names.join(", ")
                ));
            }
        }
        Operator::FunctionIdentifier { identifier } => {
            if !FUNCTIONS.contains(&identifier.as_str()) {
                return Err(format!(
                    "unknown function `{identifier}` (allowed: {})",
                    FUNCTIONS.join(", ")
                ));
            }
        }
        other => return Err(format!("unsupported operator `{other}`")),
    }
    for child in node.children_mut() {
        restrict(child, names)?;
    }
    Ok(())
}

impl Expr {
    /// Parses `source` over the variables `names`; `pi` is always bound.
    pub fn parse(source: &str, names: &[&str]) -> Result<Expr, String> {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let mut tree = build_operator_tree::<DefaultNumericTypes>(source).map_err(|e| e.to_string())?;
        restrict(&mut tree, &names)?;
        right_associate(&mut tree);
        let expr = Expr {
            source: source.to_string(),
            tree,
            names,
        };
        // A trial evaluation catches wrong function arities and bare tuples.
        expr.try_eval(&vec![0.5; expr.names.len()])?;
        Ok(expr)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn variables(&self) -> &[String] {
        &self.names
    }

    /// True when no variable other than `pi` occurs.
    pub fn is_constant(&self) -> bool {
        self.tree.iter_variable_identifiers().all(|v| v == "pi")
    }

    /// True when variable `name` occurs in the expression.
    pub fn uses(&self, name: &str) -> bool {
        self.tree.iter_variable_identifiers().any(|v| v == name)
    }

    fn try_eval(&self, values: &[f64]) -> Result<f64, String> {
        let ctx = Bindings {
            names: &self.names,
            values: values.iter().map(|&v| Value::Float(v)).collect(),
            pi: Value::Float(PI),
        };
        let v = self.tree.eval_with_context(&ctx).map_err(|e| e.to_string())?;
        v.as_number()
            .map_err(|_| format!("expression does not evaluate to a number: {v}"))
    }

    /// Evaluates with `values` bound to the variables in order. Evaluation
    /// cannot fail after a successful parse; NaN marks the impossible case.
    pub fn eval(&self, values: &[f64]) -> f64 {
        self.try_eval(values).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, vals: &[f64]) -> f64 {
        Expr::parse(src, &["x", "y"]).unwrap().eval(vals)
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(eval("1/2", &[0.0, 0.0]), 0.5);
        assert_eq!(eval("2^3^2", &[0.0, 0.0]), 512.0);
        assert_eq!(eval("(2^3)^2", &[0.0, 0.0]), 64.0);
        assert_eq!(eval("2^x^y^0", &[3.0, 2.0]), 8.0);
        assert_eq!(eval("2^-1", &[0.0, 0.0]), 0.5);
        assert_eq!(eval("-x^2", &[3.0, 0.0]), -9.0);
        assert_eq!(eval("x*y - 1.5e-1", &[2.0, 3.0]), 6.0 - 0.15);
        assert_eq!(eval("min(x, y, 0.25) + max(x, y)", &[2.0, 3.0]), 3.25);
        assert_eq!(eval("abs(x) + exp(0) + cos(pi) + sin(0)", &[-2.0, 0.0]), 2.0);
    }

    #[test]
    fn rejects_outside_the_subset() {
        for bad in [
            "z + 1", "sqrt(x)", "x % 2", "x == y", "a = 2", "\"s\"", "min(x)", "(x, y)", "x +",
        ] {
            assert!(Expr::parse(bad, &["x", "y"]).is_err(), "{bad}");
        }
    }

    #[test]
    fn constant_detection() {
        assert!(Expr::parse("2*pi", &["x"]).unwrap().is_constant());
        assert!(!Expr::parse("2*x", &["x"]).unwrap().is_constant());
    }
}
