//! Recursive-descent parser.  Tokens carry byte offsets so syntax errors
//! can point at the offending position.

use super::{BinOp, Constant, Expr, Func};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(mut self) -> Result<Vec<(Tok, usize)>> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let start = self.pos;
            let c = self.src[self.pos];
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    self.pos += 1;
                }
                b'+' => out.push(self.single(Tok::Plus, start)),
                b'-' => out.push(self.single(Tok::Minus, start)),
                b'*' => out.push(self.single(Tok::Star, start)),
                b'/' => out.push(self.single(Tok::Slash, start)),
                b'^' => out.push(self.single(Tok::Caret, start)),
                b'(' => out.push(self.single(Tok::LParen, start)),
                b')' => out.push(self.single(Tok::RParen, start)),
                b',' => out.push(self.single(Tok::Comma, start)),
                b'0'..=b'9' | b'.' => {
                    while self.pos < self.src.len()
                        && matches!(self.src[self.pos], b'0'..=b'9' | b'.')
                    {
                        self.pos += 1;
                    }
                    // Exponent suffix, e.g. 1.5e-3.
                    if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
                        let mut probe = self.pos + 1;
                        if probe < self.src.len() && matches!(self.src[probe], b'+' | b'-') {
                            probe += 1;
                        }
                        if probe < self.src.len() && self.src[probe].is_ascii_digit() {
                            self.pos = probe;
                            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit()
                            {
                                self.pos += 1;
                            }
                        }
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    let value: f64 = text.parse().map_err(|_| Error::Syntax {
                        offset: start,
                        message: format!("malformed number `{text}`"),
                    })?;
                    out.push((Tok::Num(value), start));
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    while self.pos < self.src.len()
                        && matches!(self.src[self.pos], b'a'..=b'z' | b'A'..=b'Z' | b'0'..=b'9' | b'_')
                    {
                        self.pos += 1;
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    out.push((Tok::Ident(text.to_string()), start));
                }
                other => {
                    return Err(Error::Syntax {
                        offset: start,
                        message: format!("unexpected character `{}`", other as char),
                    })
                }
            }
        }
        Ok(out)
    }

    fn single(&mut self, tok: Tok, start: usize) -> (Tok, usize) {
        self.pos += 1;
        (tok, start)
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.idx).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn advance(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        self.idx += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.idx += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn err(&self, message: String) -> Error {
        Error::Syntax {
            offset: self.offset(),
            message,
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.idx += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.idx += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Minus) {
            self.idx += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    // power := atom ('^' unary)?   -- right-associative via the recursion
    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.idx += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let offset = self.offset();
        match self.advance() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    let func = Func::from_name(&name)
                        .ok_or(Error::UnknownFunction { name, offset })?;
                    self.idx += 1; // consume '('
                    let mut args = vec![self.expr()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.idx += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    if args.len() != func.arity() {
                        return Err(Error::Syntax {
                            offset,
                            message: format!(
                                "{} takes {} argument(s), got {}",
                                func.name(),
                                func.arity(),
                                args.len()
                            ),
                        });
                    }
                    Ok(Expr::Call(func, args))
                } else {
                    match name.as_str() {
                        "pi" => Ok(Expr::Const(Constant::Pi)),
                        "alpha" => Ok(Expr::Const(Constant::Alpha)),
                        _ => Ok(Expr::Var(name)),
                    }
                }
            }
            _ => Err(Error::Syntax {
                offset,
                message: "expected a number, variable or `(`".into(),
            }),
        }
    }
}

/// Parses an expression; the whole input must be consumed.
pub fn parse(src: &str) -> Result<Expr> {
    if src.trim().is_empty() {
        return Err(Error::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let toks = Lexer {
        src: src.as_bytes(),
        pos: 0,
    }
    .tokens()?;
    let mut parser = Parser {
        toks,
        idx: 0,
        end: src.len(),
    };
    let expr = parser.expr()?;
    if parser.idx != parser.toks.len() {
        return Err(parser.err("unexpected trailing input".into()));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("1+2*3").unwrap().to_string(), "1+2*3");
        assert_eq!(
            parse("-u^2").unwrap(),
            Expr::Neg(Box::new(Expr::Bin(
                BinOp::Pow,
                Box::new(Expr::Var("u".into())),
                Box::new(Expr::Num(2.0)),
            )))
        );
        // Right-associative power.
        assert_eq!(parse("2^3^2").unwrap().to_string(), "2^3^2");
        assert_eq!(
            parse("2^3^2").unwrap(),
            Expr::Bin(
                BinOp::Pow,
                Box::new(Expr::Num(2.0)),
                Box::new(Expr::Bin(
                    BinOp::Pow,
                    Box::new(Expr::Num(3.0)),
                    Box::new(Expr::Num(2.0)),
                )),
            )
        );
        // Left-associative subtraction: a-b-c is (a-b)-c.
        assert_eq!(parse("1-2-3").unwrap().to_string(), "1-2-3");
        assert_eq!(parse("1-(2-3)").unwrap().to_string(), "1-(2-3)");
        // Unary minus binds looser than power, tighter than product.
        assert_eq!(parse("2^-1").unwrap().to_string(), "2^-1");
    }

    #[test]
    fn scientific_notation() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::Num(1.5e-3));
    }
}
