use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use super::value::Wide;
use super::FuncError;
use crate::sampling;

/// Default pole tolerance εₚ.
pub const DEFAULT_POLE_TOL: f64 = 1e-12;

/// Magnitude below which a sampled value counts as zero in [`Expr::is_identically_zero`].
pub const ZERO_TEST_TOL: f64 = 1e-9;

/// Outcome of evaluating an expression at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Eval<T> {
    Value(T),
    Pole,
    /// `0/0`, `∞ - ∞` and friends. `overflow` is set when the value exists
    /// but does not fit the requested representation.
    Indeterminate {
        overflow: bool,
    },
}

pub type EvalResult = Eval<Complex64>;

impl<T> Eval<T> {
    pub fn value(self) -> Option<T> {
        match self {
            Eval::Value(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_pole(&self) -> bool {
        matches!(self, Eval::Pole)
    }
}

#[derive(Debug)]
pub(crate) enum Node {
    Const(Complex64),
    Var,
    Sum(Expr, Expr),
    Difference(Expr, Expr),
    Product(Expr, Expr),
    Quotient(Expr, Expr),
    Power(Expr, i32),
    Exp(Expr),
    Sin(Expr),
    Cos(Expr),
    Shift(Expr, Complex64),
    /// `expanded` is the symbolic derivative of `of`, computed at construction.
    Derivative {
        of: Expr,
        expanded: Expr,
    },
}

/// A closed-form meromorphic function of one complex variable `z`.
///
/// Cheap to clone (shared tree). Immutable once built.
#[derive(Clone, Debug)]
pub struct Expr(pub(crate) Arc<Node>);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Expr {
    fn node(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub(crate) fn kind(&self) -> &Node {
        &self.0
    }

    pub fn z() -> Expr {
        Expr::node(Node::Var)
    }

    pub fn constant(v: Complex64) -> Expr {
        Expr::node(Node::Const(v))
    }

    pub fn real(x: f64) -> Expr {
        Expr::constant(c(x, 0.0))
    }

    pub fn zero() -> Expr {
        Expr::real(0.0)
    }

    pub fn one() -> Expr {
        Expr::real(1.0)
    }

    /// `Some(v)` if this node is a literal constant.
    pub fn as_constant(&self) -> Option<Complex64> {
        match self.kind() {
            Node::Const(v) => Some(*v),
            _ => None,
        }
    }

    /// True if the tree contains no occurrence of `z`.
    pub fn is_closed(&self) -> bool {
        match self.kind() {
            Node::Const(_) => true,
            Node::Var => false,
            Node::Sum(a, b) | Node::Difference(a, b) | Node::Product(a, b) | Node::Quotient(a, b) => {
                a.is_closed() && b.is_closed()
            }
            Node::Power(a, _) | Node::Exp(a) | Node::Sin(a) | Node::Cos(a) | Node::Shift(a, _) => a.is_closed(),
            Node::Derivative { expanded, .. } => expanded.is_closed(),
        }
    }

    /// True if the tree has a quotient or a negative power anywhere, i.e. the
    /// function may have poles.
    pub fn may_have_poles(&self) -> bool {
        match self.kind() {
            Node::Const(_) | Node::Var => false,
            Node::Quotient(a, b) => b.as_constant().map_or(true, |v| v == c(0.0, 0.0)) || a.may_have_poles(),
            Node::Power(_, k) if *k < 0 => true,
            Node::Sum(a, b) | Node::Difference(a, b) | Node::Product(a, b) => a.may_have_poles() || b.may_have_poles(),
            Node::Power(a, _) | Node::Exp(a) | Node::Sin(a) | Node::Cos(a) | Node::Shift(a, _) => a.may_have_poles(),
            Node::Derivative { expanded, .. } => expanded.may_have_poles(),
        }
    }

    pub fn size(&self) -> usize {
        1 + match self.kind() {
            Node::Const(_) | Node::Var => 0,
            Node::Sum(a, b) | Node::Difference(a, b) | Node::Product(a, b) | Node::Quotient(a, b) => {
                a.size() + b.size()
            }
            Node::Power(a, _) | Node::Exp(a) | Node::Sin(a) | Node::Cos(a) | Node::Shift(a, _) => a.size(),
            Node::Derivative { expanded, .. } => expanded.size(),
        }
    }

    pub fn exp(&self) -> Expr {
        match self.as_constant() {
            Some(v) => Expr::constant(v.exp()),
            None => Expr::node(Node::Exp(self.clone())),
        }
    }

    pub fn sin(&self) -> Expr {
        match self.as_constant() {
            Some(v) => Expr::constant(v.sin()),
            None => Expr::node(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Expr {
        match self.as_constant() {
            Some(v) => Expr::constant(v.cos()),
            None => Expr::node(Node::Cos(self.clone())),
        }
    }

    /// Integer power. Negative exponents introduce poles at the zeros of `self`.
    pub fn powi(&self, k: i32) -> Expr {
        if k == 0 {
            return Expr::one();
        }
        if k == 1 {
            return self.clone();
        }
        match (self.as_constant(), self.kind()) {
            (Some(v), _) if k > 0 || v != c(0.0, 0.0) => Expr::constant(v.powi(k)),
            (_, Node::Power(inner, j)) => inner.powi(j * k),
            _ => Expr::node(Node::Power(self.clone(), k)),
        }
    }

    /// `self / den`. Fails if `den` is identically zero by the sampling test.
    pub fn checked_div(&self, den: &Expr) -> Result<Expr, FuncError> {
        if den.is_identically_zero()? {
            return Err(FuncError::ZeroDenominator);
        }
        Ok(self.div_unchecked(den))
    }

    pub(crate) fn div_unchecked(&self, den: &Expr) -> Expr {
        match (self.as_constant(), den.as_constant()) {
            (Some(a), Some(b)) if b != c(0.0, 0.0) => Expr::constant(a / b),
            (_, Some(b)) if b == c(1.0, 0.0) => self.clone(),
            (Some(a), _) if a == c(0.0, 0.0) => Expr::zero(),
            _ => Expr::node(Node::Quotient(self.clone(), den.clone())),
        }
    }

    /// The function `z ↦ self(z + offset)`.
    ///
    /// Nested shifts fold into a single node, so `shift(shift(e, a), b)` is
    /// structurally `shift(e, a + b)`.
    pub fn shift(&self, offset: Complex64) -> Expr {
        if offset == c(0.0, 0.0) {
            return self.clone();
        }
        match self.kind() {
            Node::Const(_) => self.clone(),
            Node::Shift(inner, a) => inner.shift(*a + offset),
            _ => Expr::node(Node::Shift(self.clone(), offset)),
        }
    }

    /// `Δ_c e = e(z + c) - e(z)`.
    pub fn difference_op(&self, offset: Complex64) -> Expr {
        self.shift(offset) - self.clone()
    }

    /// A derivative node; evaluation goes through the exact symbolic derivative.
    pub fn derivative(&self) -> Expr {
        let expanded = super::differentiate(self);
        Expr::node(Node::Derivative {
            of: self.clone(),
            expanded,
        })
    }

    /// Composition `z ↦ self(inner(z))`.
    pub fn substitute(&self, inner: &Expr) -> Expr {
        match self.kind() {
            Node::Const(_) => self.clone(),
            Node::Var => inner.clone(),
            Node::Sum(a, b) => a.substitute(inner) + b.substitute(inner),
            Node::Difference(a, b) => a.substitute(inner) - b.substitute(inner),
            Node::Product(a, b) => a.substitute(inner) * b.substitute(inner),
            Node::Quotient(a, b) => a.substitute(inner).div_unchecked(&b.substitute(inner)),
            Node::Power(a, k) => a.substitute(inner).powi(*k),
            Node::Exp(a) => a.substitute(inner).exp(),
            Node::Sin(a) => a.substitute(inner).sin(),
            Node::Cos(a) => a.substitute(inner).cos(),
            Node::Shift(a, off) => a.substitute(&(inner.clone() + Expr::constant(*off))),
            Node::Derivative { expanded, .. } => expanded.substitute(inner),
        }
    }

    pub fn eval(&self, z: Complex64) -> EvalResult {
        self.eval_with_tol(z, DEFAULT_POLE_TOL)
    }

    pub fn eval_with_tol(&self, z: Complex64, pole_tol: f64) -> EvalResult {
        match self.eval_wide_with_tol(z, pole_tol) {
            Eval::Value(w) => match w.to_complex() {
                Some(v) => Eval::Value(v),
                None => Eval::Indeterminate { overflow: true },
            },
            Eval::Pole => Eval::Pole,
            Eval::Indeterminate { overflow } => Eval::Indeterminate { overflow },
        }
    }

    /// Evaluation in the overflow-free [`Wide`] representation.
    pub fn eval_wide(&self, z: Complex64) -> Eval<Wide> {
        self.eval_wide_with_tol(z, DEFAULT_POLE_TOL)
    }

    pub fn eval_wide_with_tol(&self, z: Complex64, tol: f64) -> Eval<Wide> {
        use Eval::*;
        let ln_tol = tol.ln();
        match self.kind() {
            Node::Const(v) => Value(Wide::from(*v)),
            Node::Var => Value(Wide::from(z)),
            Node::Sum(a, b) | Node::Difference(a, b) => {
                let neg = matches!(self.kind(), Node::Difference(..));
                match (a.eval_wide_with_tol(z, tol), b.eval_wide_with_tol(z, tol)) {
                    (Value(x), Value(y)) => Value(if neg { x - y } else { x + y }),
                    (Indeterminate { overflow }, _) | (_, Indeterminate { overflow }) => Indeterminate { overflow },
                    (Pole, Pole) => Indeterminate { overflow: false },
                    _ => Pole,
                }
            }
            Node::Product(a, b) => match (a.eval_wide_with_tol(z, tol), b.eval_wide_with_tol(z, tol)) {
                (Value(x), Value(y)) => Value(x * y),
                (Indeterminate { overflow }, _) | (_, Indeterminate { overflow }) => Indeterminate { overflow },
                (Pole, Pole) => Pole,
                (Pole, Value(x)) | (Value(x), Pole) => {
                    if x.ln_abs() < ln_tol {
                        Indeterminate { overflow: false }
                    } else {
                        Pole
                    }
                }
            },
            Node::Quotient(a, b) => match (a.eval_wide_with_tol(z, tol), b.eval_wide_with_tol(z, tol)) {
                (Indeterminate { overflow }, _) | (_, Indeterminate { overflow }) => Indeterminate { overflow },
                (Pole, Pole) => Indeterminate { overflow: false },
                (Value(_), Pole) => Value(Wide::ZERO),
                (Pole, Value(_)) => Pole,
                (Value(n), Value(d)) => quotient(n, d, ln_tol),
            },
            Node::Power(a, k) => match a.eval_wide_with_tol(z, tol) {
                Value(x) if *k < 0 => quotient(Wide::ONE, x.powi(-k), ln_tol),
                Value(x) => Value(x.powi(*k)),
                Pole if *k < 0 => Value(Wide::ZERO),
                other => other,
            },
            Node::Exp(a) | Node::Sin(a) | Node::Cos(a) => match a.eval_wide_with_tol(z, tol) {
                Value(x) => match x.to_complex() {
                    Some(w) => Value(match self.kind() {
                        Node::Exp(_) => Wide::exp_of(w),
                        Node::Sin(_) => {
                            let iw = c(0.0, 1.0) * w;
                            (Wide::exp_of(iw) - Wide::exp_of(-iw)) / Wide::from(c(0.0, 2.0))
                        }
                        _ => {
                            let iw = c(0.0, 1.0) * w;
                            (Wide::exp_of(iw) + Wide::exp_of(-iw)) / Wide::from(c(2.0, 0.0))
                        }
                    }),
                    None => Indeterminate { overflow: true },
                },
                Pole => Indeterminate { overflow: false },
                other => other,
            },
            Node::Shift(a, off) => a.eval_wide_with_tol(z + off, tol),
            Node::Derivative { expanded, .. } => expanded.eval_wide_with_tol(z, tol),
        }
    }

    /// Probabilistic `≡ 0` test: below [`ZERO_TEST_TOL`] at every regular
    /// point of the fixed 64-point probe set in `0.5 <= |z| <= 2`.
    pub fn is_identically_zero(&self) -> Result<bool, FuncError> {
        if let Some(v) = self.as_constant() {
            return Ok(v.norm() < ZERO_TEST_TOL);
        }
        let mut regular = 0;
        for z in sampling::zero_test_points() {
            if let Eval::Value(w) = self.eval_wide(z) {
                regular += 1;
                if w.ln_abs() >= ZERO_TEST_TOL.ln() {
                    return Ok(false);
                }
            }
        }
        if regular == 0 {
            return Err(FuncError::NoRegularSamples);
        }
        Ok(true)
    }
}

fn quotient(n: Wide, d: Wide, ln_tol: f64) -> Eval<Wide> {
    if d.ln_abs() < ln_tol {
        if n.ln_abs() >= ln_tol {
            Eval::Pole
        } else {
            Eval::Indeterminate { overflow: false }
        }
    } else {
        Eval::Value(n / d)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            (Some(a), _) if a == c(0.0, 0.0) => rhs,
            (_, Some(b)) if b == c(0.0, 0.0) => self,
            _ => Expr::node(Node::Sum(self, rhs)),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => Expr::constant(a - b),
            (_, Some(b)) if b == c(0.0, 0.0) => self,
            (Some(a), _) if a == c(0.0, 0.0) => -rhs,
            _ => Expr::node(Node::Difference(self, rhs)),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            (Some(a), _) | (_, Some(a)) if a == c(0.0, 0.0) => Expr::zero(),
            (Some(a), _) if a == c(1.0, 0.0) => rhs,
            (_, Some(b)) if b == c(1.0, 0.0) => self,
            _ => Expr::node(Node::Product(self, rhs)),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self.as_constant() {
            Some(a) => Expr::constant(-a),
            None => Expr::real(-1.0) * self,
        }
    }
}

macro_rules! ref_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $tr::$m(self.clone(), rhs.clone())
            }
        }
    )*};
}
ref_ops!(Add add, Sub sub, Mul mul);

impl Mul<Complex64> for Expr {
    type Output = Expr;
    fn mul(self, rhs: Complex64) -> Expr {
        Expr::constant(rhs) * self
    }
}

fn fmt_complex(v: Complex64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v.im == 0.0 {
        write!(f, "{}", v.re)
    } else if v.re == 0.0 {
        write!(f, "{}i", v.im)
    } else {
        write!(f, "({}{:+}i)", v.re, v.im)
    }
}

/// Prints in the same infix syntax [`super::parse_expr`] accepts.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            Node::Const(v) => {
                if v.re < 0.0 || (v.re == 0.0 && v.im < 0.0) {
                    write!(f, "(")?;
                    fmt_complex(*v, f)?;
                    write!(f, ")")
                } else {
                    fmt_complex(*v, f)
                }
            }
            Node::Var => write!(f, "z"),
            Node::Sum(a, b) => write!(f, "({a} + {b})"),
            Node::Difference(a, b) => write!(f, "({a} - {b})"),
            Node::Product(a, b) => write!(f, "{a}*{b}"),
            Node::Quotient(a, b) => write!(f, "({a})/({b})"),
            Node::Power(a, k) => write!(f, "({a})^({k})"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
            Node::Shift(a, off) => {
                write!(f, "shift({a}, ")?;
                fmt_complex(*off, f)?;
                write!(f, ")")
            }
            Node::Derivative { of, .. } => write!(f, "diff({of})"),
        }
    }
}
