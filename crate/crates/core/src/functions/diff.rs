use super::expr::Expr;
use crate::mparith::ElemFn;

/// Symbolic derivative with respect to `x`. Only rational constants are
/// folded; no other simplification is attempted.
pub fn differentiate(e: &Expr) -> Expr {
    match e {
        Expr::Var => Expr::int(1),
        Expr::Const(_) | Expr::Pi => Expr::int(0),
        Expr::Neg(a) => Expr::neg(differentiate(a)),
        Expr::Add(a, b) => Expr::add(differentiate(a), differentiate(b)),
        Expr::Sub(a, b) => Expr::sub(differentiate(a), differentiate(b)),
        Expr::Mul(a, b) => Expr::add(
            Expr::mul(differentiate(a), (**b).clone()),
            Expr::mul((**a).clone(), differentiate(b)),
        ),
        Expr::Div(a, b) => Expr::div(
            Expr::sub(
                Expr::mul(differentiate(a), (**b).clone()),
                Expr::mul((**a).clone(), differentiate(b)),
            ),
            Expr::pow((**b).clone(), 2),
        ),
        Expr::Pow(a, k) => Expr::mul(
            Expr::mul(Expr::int(i64::from(*k)), Expr::pow((**a).clone(), k - 1)),
            differentiate(a),
        ),
        Expr::Call(f, a) => {
            let u = (**a).clone();
            let du = differentiate(a);
            let outer = match f {
                ElemFn::Exp => Expr::call(ElemFn::Exp, u),
                ElemFn::Log => return Expr::div(du, u),
                ElemFn::Sin => Expr::call(ElemFn::Cos, u),
                ElemFn::Cos => Expr::neg(Expr::call(ElemFn::Sin, u)),
                ElemFn::Sqrt => {
                    return Expr::div(du, Expr::mul(Expr::int(2), Expr::call(ElemFn::Sqrt, u)))
                }
                ElemFn::Erf => Expr::mul(
                    Expr::div(Expr::int(2), Expr::call(ElemFn::Sqrt, Expr::Pi)),
                    Expr::call(ElemFn::Exp, Expr::neg(Expr::pow(u, 2))),
                ),
            };
            Expr::mul(outer, du)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::parse;

    #[test]
    fn power_rule_and_sine() {
        assert_eq!(differentiate(&parse("x^2").unwrap()), Expr::mul(Expr::int(2), Expr::x()));
        assert_eq!(differentiate(&parse("sin(x)").unwrap()), parse("cos(x)").unwrap());
        assert_eq!(differentiate(&parse("3").unwrap()), Expr::int(0));
        assert_eq!(differentiate(&parse("x").unwrap()), Expr::int(1));
    }
}
