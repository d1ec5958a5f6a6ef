//! Tiny expression grammar shared by counterfunctions and thresholds.
//!
//! ```text
//! expr   := term ('+' term)*
//! term   := factor (('*' | '/') factor)*
//! factor := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;

use crate::error::RateError;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Ast {
    Num(BigRational),
    Ident(String),
    Add(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Call(String, Vec<Ast>),
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(BigRational),
    Ident(String),
    Plus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
}

fn tokenize(src: &str) -> Result<Vec<Token>, RateError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            ',' => {
                out.push(Token::Comma);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let int: String = chars[start..i].iter().collect();
                let mut value = BigRational::from_integer(int.parse::<BigInt>().expect("digits"));
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    let fstart = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    if fstart == i {
                        return Err(RateError::Parse(format!(
                            "digit expected after '.' in {src:?}"
                        )));
                    }
                    let frac: String = chars[fstart..i].iter().collect();
                    let scale = BigInt::from(10u32).pow((i - fstart) as u32);
                    value += BigRational::new(frac.parse::<BigInt>().expect("digits"), scale);
                }
                out.push(Token::Num(value));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            other => {
                return Err(RateError::Parse(format!(
                    "unexpected character {other:?} in {src:?}"
                )))
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn err(&self, what: &str) -> RateError {
        RateError::Parse(format!("{what} at token {} in {:?}", self.pos, self.src))
    }

    fn expect(&mut self, t: Token, what: &str) -> Result<(), RateError> {
        if self.next().as_ref() == Some(&t) {
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn expr(&mut self) -> Result<Ast, RateError> {
        let mut lhs = self.term()?;
        while self.peek() == Some(&Token::Plus) {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Ast::Add(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Ast, RateError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Ast::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Ast::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Ast, RateError> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Ast::Num(v)),
            Some(Token::Ident(name)) => {
                if self.peek() == Some(&Token::LParen) {
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.peek() == Some(&Token::Comma) {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(Token::RParen, "')' expected")?;
                    Ok(Ast::Call(name, args))
                } else {
                    Ok(Ast::Ident(name))
                }
            }
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "')' expected")?;
                Ok(inner)
            }
            _ => Err(self.err("expression expected")),
        }
    }
}

pub(crate) fn parse(src: &str) -> Result<Ast, RateError> {
    let tokens = tokenize(src)?;
    if tokens.is_empty() {
        return Err(RateError::Parse("empty expression".into()));
    }
    let mut p = Parser { tokens, pos: 0, src };
    let ast = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(p.err("trailing input"));
    }
    Ok(ast)
}
