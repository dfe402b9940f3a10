use super::ast::{BinOp, Builtin, Expr, Quantifier};
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

/// Parses a complete predicate (or expression); trailing input is an error.
pub fn parse_predicate(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser::new(tokens);
    let e = p.equiv()?;
    p.expect_end()?;
    Ok(e)
}

pub(crate) struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(tokens: Vec<Token>) -> Self {
        Parser { tokens, pos: 0 }
    }

    /// Open brackets not yet closed at the current position.
    fn depth(&self) -> i64 {
        self.tokens[..self.pos]
            .iter()
            .map(|t| match t.tok {
                Tok::Sym("(" | "{" | "[") => 1,
                Tok::Sym(")" | "}" | "]") => -1,
                _ => 0,
            })
            .sum()
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn at(&self, sym: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(s) if *s == sym)
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, sym: &str) -> bool {
        if self.at(sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let t = self.peek();
        let unbalanced = match t.tok {
            Tok::Eof => self.depth() > 0,
            Tok::Sym(")" | "}" | "]") => self.depth() == 0,
            _ => false,
        };
        if unbalanced {
            return ParseError::Unbalanced {
                line: t.line,
                column: t.column,
                found: t.tok.describe(),
            };
        }
        ParseError::Syntax {
            line: t.line,
            column: t.column,
            found: t.tok.describe(),
            expected: expected.to_string(),
        }
    }

    fn expect(&mut self, sym: &str) -> Result<Token, ParseError> {
        if self.at(sym) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&format!("'{sym}'")))
        }
    }

    pub(crate) fn expect_end(&self) -> Result<(), ParseError> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    pub(crate) fn equiv(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.implies()?;
        while self.eat("<=>") {
            let rhs = self.implies()?;
            lhs = Expr::binary(BinOp::Equiv, lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.or()?;
        if self.eat("=>") {
            let rhs = self.implies()?;
            return Ok(Expr::binary(BinOp::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and()?;
        while self.eat("or") {
            let rhs = self.and()?;
            lhs = Expr::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.negation()?;
        while self.eat("&") {
            let rhs = self.negation()?;
            lhs = Expr::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> Result<Expr, ParseError> {
        if self.eat("not") {
            return Ok(Expr::not(self.negation()?));
        }
        self.comparison()
    }

    fn binary_level(
        &mut self,
        ops: &[(&str, BinOp)],
        next: fn(&mut Self) -> Result<Expr, ParseError>,
    ) -> Result<Expr, ParseError> {
        let mut lhs = next(self)?;
        'outer: loop {
            for (sym, op) in ops {
                if self.eat(sym) {
                    let rhs = next(self)?;
                    lhs = Expr::binary(*op, lhs, rhs);
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(
            &[
                ("=", BinOp::Eq),
                ("/=", BinOp::Neq),
                ("<", BinOp::Lt),
                ("<=", BinOp::Le),
                (">", BinOp::Gt),
                (">=", BinOp::Ge),
                (":", BinOp::Member),
                ("/:", BinOp::NotMember),
                ("<:", BinOp::Subset),
            ],
            Self::set_op,
        )
    }

    fn set_op(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(
            &[
                ("\\/", BinOp::Union),
                ("/\\", BinOp::Inter),
                ("|->", BinOp::Maplet),
                ("<->", BinOp::Relations),
                ("-->", BinOp::TotalFns),
                ("+->", BinOp::PartialFns),
            ],
            Self::interval,
        )
    }

    fn interval(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&[("..", BinOp::Interval)], Self::additive)
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&[("+", BinOp::Add), ("-", BinOp::Sub)], Self::multiplicative)
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(
            &[("*", BinOp::Mul), ("/", BinOp::Div), ("mod", BinOp::Mod)],
            Self::unary,
        )
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat("-") {
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.postfix()?;
        if self.eat("**") {
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.atom()?;
        while self.eat("(") {
            let args = self.list(")")?;
            let arg = args
                .into_iter()
                .reduce(|acc, a| Expr::binary(BinOp::Maplet, acc, a))
                .ok_or_else(|| self.unexpected("a function argument"))?;
            e = Expr::apply(e, arg);
        }
        Ok(e)
    }

    /// Comma-separated items up to and including `close`.
    fn list(&mut self, close: &str) -> Result<Vec<Expr>, ParseError> {
        let mut items = Vec::new();
        if self.eat(close) {
            return Ok(items);
        }
        loop {
            items.push(self.equiv()?);
            if self.eat(",") {
                continue;
            }
            self.expect(close)?;
            return Ok(items);
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(*n))
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Expr::Ident(name.clone()))
            }
            Tok::Sym("TRUE") => {
                self.bump();
                Ok(Expr::Bool(true))
            }
            Tok::Sym("FALSE") => {
                self.bump();
                Ok(Expr::Bool(false))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.equiv()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Sym("{") => {
                self.bump();
                Ok(Expr::SetExt(self.list("}")?))
            }
            Tok::Sym("[") => {
                self.bump();
                Ok(Expr::SeqExt(self.list("]")?))
            }
            Tok::Sym(kw @ ("POW" | "dom" | "ran" | "card" | "size")) => {
                let f = match *kw {
                    "POW" => Builtin::Pow,
                    "dom" => Builtin::Dom,
                    "ran" => Builtin::Ran,
                    "card" => Builtin::Card,
                    _ => Builtin::Size,
                };
                self.bump();
                self.expect("(")?;
                let arg = self.equiv()?;
                self.expect(")")?;
                Ok(Expr::call(f, arg))
            }
            Tok::Sym("!") => {
                self.bump();
                self.quantifier(Quantifier::ForAll, &t)
            }
            Tok::Sym("#") => {
                self.bump();
                self.quantifier(Quantifier::Exists, &t)
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn quantifier(&mut self, kind: Quantifier, start: &Token) -> Result<Expr, ParseError> {
        let var = match self.bump().tok {
            Tok::Ident(v) => v,
            _ => {
                self.pos -= 1;
                return Err(self.unexpected("a bound identifier"));
            }
        };
        self.expect(".")?;
        self.expect("(")?;
        let inner = self.equiv()?;
        self.expect(")")?;
        let bad = |message: &str| ParseError::BadQuantifier {
            line: start.line,
            column: start.column,
            message: message.to_string(),
        };
        match kind {
            Quantifier::ForAll => {
                let Expr::Binary(BinOp::Implies, guard, body) = inner else {
                    return Err(bad("universal quantifier must have the shape !x.(x : D => P)"));
                };
                let (domain, rest) = split_domain(&var, *guard)
                    .ok_or_else(|| bad("universal quantifier guard must start with x : D"))?;
                let body = match rest {
                    Some(extra) => Expr::binary(BinOp::Implies, extra, *body),
                    None => *body,
                };
                Ok(Expr::Quant {
                    kind,
                    var,
                    domain: Box::new(domain),
                    body: Box::new(body),
                })
            }
            Quantifier::Exists => {
                let (domain, rest) = split_domain(&var, inner)
                    .ok_or_else(|| bad("existential quantifier must have the shape #x.(x : D & P)"))?;
                Ok(Expr::Quant {
                    kind,
                    var,
                    domain: Box::new(domain),
                    body: Box::new(rest.unwrap_or(Expr::Bool(true))),
                })
            }
        }
    }
}

/// Removes the leftmost conjunct `var : D` from `e`, returning `D` and what is
/// left of the conjunction.
fn split_domain(var: &str, e: Expr) -> Option<(Expr, Option<Expr>)> {
    match e {
        Expr::Binary(BinOp::Member, lhs, rhs) if matches!(&*lhs, Expr::Ident(v) if v == var) => {
            Some((*rhs, None))
        }
        Expr::Binary(BinOp::And, lhs, rhs) => {
            let (domain, rest) = split_domain(var, *lhs)?;
            let remaining = match rest {
                Some(r) => Expr::binary(BinOp::And, r, *rhs),
                None => *rhs,
            };
            Some((domain, Some(remaining)))
        }
        _ => None,
    }
}
