//! Effectively evaluable counterfunctions `f: N -> N`.
//!
//! Every constructor is monotone nondecreasing on `N` (constants, the
//! identity, sums, products, maxima, compositions and the liminf-rate family
//! `N -> E * (N + 1)`), so every counterfunction is monotone. Threshold code
//! relies on this.

use std::fmt;

use num_traits::{ToPrimitive, Zero};

use crate::error::RateError;
use crate::exact::{ExactNat, ExactPos};
use crate::expr::{self, Ast};

use super::Caps;

/// The liminf rate `N -> Phi(b, m, eps, N) = E * (N + 1)` with the certified
/// factor `E >= floor(e^{((m+1) b^2 / eps)^2})` precomputed.
#[derive(Clone, Debug, PartialEq)]
pub struct LiminfRate {
    pub(crate) b: ExactNat,
    pub(crate) m: u64,
    pub(crate) eps: ExactPos,
    pub(crate) factor: ExactNat,
}

impl LiminfRate {
    pub fn factor(&self) -> &ExactNat {
        &self.factor
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Counterfunction {
    Const(ExactNat),
    /// The identity `n`.
    Var,
    Add(Box<Counterfunction>, Box<Counterfunction>),
    Mul(Box<Counterfunction>, Box<Counterfunction>),
    Max(Box<Counterfunction>, Box<Counterfunction>),
    /// `Compose(outer, inner)` is `n -> outer(inner(n))`.
    Compose(Box<Counterfunction>, Box<Counterfunction>),
    Liminf(LiminfRate),
}

impl Counterfunction {
    pub fn constant(c: u64) -> Self {
        Counterfunction::Const(ExactNat::from(c))
    }

    pub fn identity() -> Self {
        Counterfunction::Var
    }

    /// `n -> self(n) + c`
    pub fn shifted(self, c: u64) -> Self {
        if c == 0 {
            self
        } else {
            Counterfunction::Add(Box::new(self), Box::new(Counterfunction::constant(c)))
        }
    }

    pub fn plus(self, other: Counterfunction) -> Self {
        Counterfunction::Add(Box::new(self), Box::new(other))
    }

    pub fn times(self, other: Counterfunction) -> Self {
        Counterfunction::Mul(Box::new(self), Box::new(other))
    }

    pub fn max(self, other: Counterfunction) -> Self {
        Counterfunction::Max(Box::new(self), Box::new(other))
    }

    pub fn compose(outer: Counterfunction, inner: Counterfunction) -> Self {
        Counterfunction::Compose(Box::new(outer), Box::new(inner))
    }

    /// Parses the counterfunction grammar: integer literals, `n`, `a+b`,
    /// `a*b`, `max(a,b)`, `compose(a,b)` and parentheses.
    pub fn parse(src: &str) -> Result<Self, RateError> {
        Self::from_ast(&expr::parse(src)?, src)
    }

    fn from_ast(ast: &Ast, src: &str) -> Result<Self, RateError> {
        let bad = |what: &str| RateError::Parse(format!("{what} in counterfunction {src:?}"));
        Ok(match ast {
            Ast::Num(q) => {
                if !q.is_integer() || q.numer().sign() == num_bigint::Sign::Minus {
                    return Err(bad("non-natural literal"));
                }
                Counterfunction::Const(q.numer().magnitude().clone())
            }
            Ast::Ident(name) if name == "n" => Counterfunction::Var,
            Ast::Ident(name) => return Err(bad(&format!("unknown variable {name:?}"))),
            Ast::Add(a, b) => Self::from_ast(a, src)?.plus(Self::from_ast(b, src)?),
            Ast::Mul(a, b) => Self::from_ast(a, src)?.times(Self::from_ast(b, src)?),
            Ast::Div(_, _) => return Err(bad("division is not allowed")),
            Ast::Call(name, args) => match (name.as_str(), args.as_slice()) {
                ("max", [a, b]) => Self::from_ast(a, src)?.max(Self::from_ast(b, src)?),
                ("compose", [a, b]) => {
                    Self::compose(Self::from_ast(a, src)?, Self::from_ast(b, src)?)
                }
                _ => return Err(bad(&format!("unknown function {name}/{}", args.len()))),
            },
        })
    }

    pub fn eval(&self, n: &ExactNat, caps: &Caps) -> Result<ExactNat, RateError> {
        let v = match self {
            Counterfunction::Const(c) => c.clone(),
            Counterfunction::Var => n.clone(),
            Counterfunction::Add(a, b) => a.eval(n, caps)? + b.eval(n, caps)?,
            Counterfunction::Mul(a, b) => {
                let x = a.eval(n, caps)?;
                let y = b.eval(n, caps)?;
                caps.check_bits("counterfunction product", x.bits() + y.bits())?;
                x * y
            }
            Counterfunction::Max(a, b) => a.eval(n, caps)?.max(b.eval(n, caps)?),
            Counterfunction::Compose(outer, inner) => outer.eval(&inner.eval(n, caps)?, caps)?,
            Counterfunction::Liminf(l) => {
                caps.check_bits("Phi", l.factor.bits() + n.bits() + 1)?;
                &l.factor * (n + 1u32)
            }
        };
        caps.check_bits("counterfunction", v.bits())?;
        Ok(v)
    }

    /// Convenience evaluation at a machine integer; `None` when the value
    /// does not fit a `u64` or exceeds the caps.
    pub fn eval_u64(&self, n: u64, caps: &Caps) -> Option<u64> {
        self.eval(&ExactNat::from(n), caps).ok()?.to_u64()
    }

    pub fn is_zero_constant(&self) -> bool {
        matches!(self, Counterfunction::Const(c) if c.is_zero())
    }
}

impl fmt::Display for Counterfunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Counterfunction::Const(c) => write!(f, "{c}"),
            Counterfunction::Var => write!(f, "n"),
            Counterfunction::Add(a, b) => write!(f, "{a}+{b}"),
            Counterfunction::Mul(a, b) => {
                let wrap = |x: &Counterfunction| matches!(x, Counterfunction::Add(_, _));
                if wrap(a) {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, "*")?;
                if wrap(b) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            Counterfunction::Max(a, b) => write!(f, "max({a},{b})"),
            Counterfunction::Compose(a, b) => write!(f, "compose({a},{b})"),
            Counterfunction::Liminf(l) => write!(f, "Phi({},{},{})", l.b, l.m, l.eps),
        }
    }
}
