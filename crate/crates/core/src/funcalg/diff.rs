use super::expr::{Expr, Node};

/// Exact symbolic derivative d/dz.
///
/// Only local folding is applied (products with 0 or 1, constant
/// arithmetic); there is no general simplifier.
pub fn differentiate(e: &Expr) -> Expr {
    match e.kind() {
        Node::Const(_) => Expr::zero(),
        Node::Var => Expr::one(),
        Node::Sum(a, b) => differentiate(a) + differentiate(b),
        Node::Difference(a, b) => differentiate(a) - differentiate(b),
        Node::Product(a, b) => differentiate(a) * b.clone() + a.clone() * differentiate(b),
        Node::Quotient(a, b) => {
            let num = differentiate(a) * b.clone() - a.clone() * differentiate(b);
            num.div_unchecked(&b.powi(2))
        }
        Node::Power(a, k) => Expr::real(*k as f64) * a.powi(k - 1) * differentiate(a),
        Node::Exp(a) => e.clone() * differentiate(a),
        Node::Sin(a) => a.cos() * differentiate(a),
        Node::Cos(a) => -(a.sin() * differentiate(a)),
        Node::Shift(a, off) => differentiate(a).shift(*off),
        Node::Derivative { expanded, .. } => differentiate(expanded),
    }
}

/// `k`-fold derivative.
pub fn differentiate_n(e: &Expr, k: usize) -> Expr {
    (0..k).fold(e.clone(), |acc, _| differentiate(&acc))
}
