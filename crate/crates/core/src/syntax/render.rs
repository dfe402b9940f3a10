use super::ast::{BinOp, Expr, Quantifier};

const PREC_NOT: u8 = 5;
const PREC_CMP: u8 = 6;
const PREC_NEG: u8 = 11;
const PREC_POW: u8 = 12;
const PREC_ATOM: u8 = 13;

/// Canonical ASCII form. Parenthesizes only where precedence requires it,
/// except that relation/function-space constructors are always bracketed when
/// they appear as an operand (`BYTE = (1..8 --> {0,1})`).
pub fn render(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, &mut out);
    out
}

/// Renders `e` as an operand that must bind at least as tightly as `min`.
pub(crate) fn render_operand(e: &Expr, min: u8) -> String {
    let mut out = String::new();
    write_operand(e, min, &mut out);
    out
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Int(n) if *n < 0 => PREC_NEG,
        Expr::Neg(_) => PREC_NEG,
        Expr::Not(_) => PREC_NOT,
        Expr::Binary(op, _, _) => op.precedence(),
        _ => PREC_ATOM,
    }
}

fn write_operand(e: &Expr, min: u8, out: &mut String) {
    let wrap = precedence(e) < min
        || matches!(e, Expr::Binary(op, _, _) if op.is_relation_space());
    if wrap {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    } else {
        write_expr(e, out);
    }
}

fn write_list(items: &[Expr], out: &mut String) {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_expr(item, out);
    }
}

fn write_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Int(n) => out.push_str(&n.to_string()),
        Expr::Bool(true) => out.push_str("TRUE"),
        Expr::Bool(false) => out.push_str("FALSE"),
        Expr::Ident(name) => out.push_str(name),
        Expr::Neg(inner) => {
            out.push('-');
            write_operand(inner, PREC_POW, out);
        }
        Expr::Not(inner) => {
            out.push_str("not(");
            write_expr(inner, out);
            out.push(')');
        }
        Expr::Binary(op, lhs, rhs) => {
            let p = op.precedence();
            let (lmin, rmin) = match op {
                BinOp::Pow => (PREC_ATOM, PREC_NEG),
                op if op.is_right_assoc() => (p + 1, p),
                BinOp::Mul | BinOp::Div | BinOp::Mod => (p, PREC_NEG),
                _ => (p, p + 1),
            };
            write_operand(lhs, lmin, out);
            if *op == BinOp::Interval {
                out.push_str("..");
            } else {
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
            }
            write_operand(rhs, rmin, out);
        }
        Expr::Call(f, arg) => {
            out.push_str(f.keyword());
            out.push('(');
            write_expr(arg, out);
            out.push(')');
        }
        Expr::Apply(f, arg) => {
            write_operand(f, PREC_ATOM, out);
            out.push('(');
            write_expr(arg, out);
            out.push(')');
        }
        Expr::Quant {
            kind,
            var,
            domain,
            body,
        } => {
            let (sigil, joiner, body_min) = match kind {
                Quantifier::ForAll => ('!', BinOp::Implies, BinOp::Implies.precedence()),
                Quantifier::Exists => ('#', BinOp::And, BinOp::And.precedence() + 1),
            };
            out.push(sigil);
            out.push_str(var);
            out.push_str(".(");
            out.push_str(var);
            out.push_str(" : ");
            write_operand(domain, PREC_CMP + 1, out);
            out.push(' ');
            out.push_str(joiner.symbol());
            out.push(' ');
            write_operand(body, body_min, out);
            out.push(')');
        }
        Expr::SetExt(items) => {
            out.push('{');
            write_list(items, out);
            out.push('}');
        }
        Expr::SeqExt(items) => {
            out.push('[');
            write_list(items, out);
            out.push(']');
        }
    }
}
