//! Recursive-descent parser for the equation DSL.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := atom ('^' signed-rational)?
//! atom   := number | site-id | param-name | function '(' expr ')' | '(' expr ')' | '-' atom
//! ```
//!
//! A `-` written directly in front of a numeric literal folds into a negative
//! constant, so printed negative constants parse back unchanged.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{pow, Zero};
use thiserror::Error;

use super::ast::{Constant, Expression, Node, Site};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at index {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier `{name}` at index {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("unbound parameter `{name}` at index {position}")]
    UnboundParam { name: String, position: usize },
    #[error("site `{name}` is not allowed here (index {position})")]
    ForbiddenSite { name: String, position: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: String, reason: String },
}

/// Parameter values substituted as exact constants.
pub type Params = BTreeMap<String, BigRational>;

const FUNCTIONS: [&str; 2] = ["exp", "log"];

/// Parse an explicit right-hand side over `u00`, `u10`, `u01`.
pub fn parse(text: &str, params: &Params) -> Result<Expression, ParseError> {
    Parser::new(text, params, false)?.parse_all()
}

/// Parse a four-point relation that may also reference `u11`.
pub fn parse_relation(text: &str, params: &Params) -> Result<Expression, ParseError> {
    Parser::new(text, params, true)?.parse_all()
}

/// Exact value of a decimal literal such as `12`, `0.25` or `3e-2`.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse::<BigInt>().ok()? / 10;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(digits * pow(ten, scale as usize))
    } else {
        BigRational::new(digits, pow(ten, scale.unsigned_abs() as usize))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(_) => "number".into(),
            Token::Ident(name) => format!("identifier `{name}`"),
            Token::Plus => "'+'".into(),
            Token::Minus => "'-'".into(),
            Token::Star => "'*'".into(),
            Token::Slash => "'/'".into(),
            Token::Caret => "'^'".into(),
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if !c.is_ascii() {
            return Err(ParseError::Syntax {
                position: i,
                expected: "ASCII input".into(),
                found: "non-ASCII character".into(),
            });
        }
        let start = i;
        let token = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // optional exponent, only when digits follow
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let literal = &text[start..i];
                let value = parse_decimal(literal).ok_or_else(|| ParseError::Syntax {
                    position: start,
                    expected: "number".into(),
                    found: format!("`{literal}`"),
                })?;
                tokens.push((start, Token::Number(value)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push((start, Token::Ident(text[start..i].to_string())));
                continue;
            }
            other => {
                return Err(ParseError::Syntax {
                    position: i,
                    expected: "expression".into(),
                    found: format!("'{}'", other as char),
                })
            }
        };
        tokens.push((start, token));
        i += 1;
    }
    tokens.push((text.len(), Token::End));
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    params: &'a Params,
    allow_u11: bool,
}

impl<'a> Parser<'a> {
    fn new(text: &str, params: &'a Params, allow_u11: bool) -> Result<Self, ParseError> {
        for name in params.keys() {
            let valid_ident = name
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid_ident {
                return Err(ParseError::InvalidParam {
                    name: name.clone(),
                    reason: "not an identifier".into(),
                });
            }
            if Site::from_name(name).is_some() || FUNCTIONS.contains(&name.as_str()) {
                return Err(ParseError::InvalidParam {
                    name: name.clone(),
                    reason: "shadows a reserved name".into(),
                });
            }
        }
        Ok(Parser {
            tokens: tokenize(text)?,
            pos: 0,
            params,
            allow_u11,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn position(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn advance(&mut self) -> (usize, Token) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            position: self.position(),
            expected: expected.to_string(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, token: Token, expected: &str) -> Result<(), ParseError> {
        if *self.peek() == token {
            self.advance();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn parse_all(mut self) -> Result<Expression, ParseError> {
        let root = self.expr()?;
        if *self.peek() != Token::End {
            return Err(self.error("operator or end of input"));
        }
        Ok(Expression::new(root))
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Token::Plus => {
                    self.advance();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Token::Minus => {
                    self.advance();
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Token::Star => {
                    self.advance();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Token::Slash => {
                    self.advance();
                    lhs = Node::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Token::Caret {
            self.advance();
            let exponent = self.signed_rational()?;
            return Ok(Node::Pow(Box::new(base), Constant::new(exponent)));
        }
        Ok(base)
    }

    /// `['-'] number` or `'(' ['-'] number ['/' number] ')'`.
    fn signed_rational(&mut self) -> Result<BigRational, ParseError> {
        let parenthesized = *self.peek() == Token::LParen;
        if parenthesized {
            self.advance();
        }
        let negative = *self.peek() == Token::Minus;
        if negative {
            self.advance();
        }
        let mut value = self.number()?;
        if parenthesized {
            if *self.peek() == Token::Slash {
                self.advance();
                let den_pos = self.position();
                let den = self.number()?;
                if den.is_zero() {
                    return Err(ParseError::Syntax {
                        position: den_pos,
                        expected: "nonzero denominator".into(),
                        found: "0".into(),
                    });
                }
                value /= den;
            }
            self.expect(Token::RParen, "')'")?;
        }
        Ok(if negative { -value } else { value })
    }

    fn number(&mut self) -> Result<BigRational, ParseError> {
        match self.peek().clone() {
            Token::Number(v) => {
                self.advance();
                Ok(v)
            }
            _ => Err(self.error("number")),
        }
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        if matches!(self.peek(), Token::End | Token::RParen | Token::Plus | Token::Star | Token::Slash | Token::Caret) {
            return Err(self.error("number, variable, function or '('"));
        }
        let (position, token) = self.advance();
        match token {
            Token::Number(v) => Ok(Node::Const(Constant::new(v))),
            Token::Minus => {
                if let Token::Number(v) = self.peek().clone() {
                    self.advance();
                    return Ok(Node::Const(Constant::new(-v)));
                }
                Ok(Node::Neg(Box::new(self.atom()?)))
            }
            Token::LParen => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "')'")?;
                Ok(inner)
            }
            Token::Ident(name) => self.identifier(name, position),
            _ => unreachable!("rejected above"),
        }
    }

    fn identifier(&mut self, name: String, position: usize) -> Result<Node, ParseError> {
        if *self.peek() == Token::LParen {
            if !FUNCTIONS.contains(&name.as_str()) {
                return Err(ParseError::UnknownIdentifier { name, position });
            }
            self.advance();
            let arg = Box::new(self.expr()?);
            self.expect(Token::RParen, "')'")?;
            return Ok(match name.as_str() {
                "exp" => Node::Exp(arg),
                _ => Node::Log(arg),
            });
        }
        if let Some(site) = Site::from_name(&name) {
            if site == Site::U11 && !self.allow_u11 {
                return Err(ParseError::ForbiddenSite { name, position });
            }
            return Ok(Node::Var(site));
        }
        if FUNCTIONS.contains(&name.as_str()) {
            return Err(ParseError::Syntax {
                position: self.position(),
                expected: "'('".into(),
                found: self.peek().describe(),
            });
        }
        match self.params.get(&name) {
            Some(v) => Ok(Node::Const(Constant::new(v.clone()))),
            None if looks_like_site(&name) => Err(ParseError::UnknownIdentifier { name, position }),
            None => Err(ParseError::UnboundParam { name, position }),
        }
    }
}

/// `u` followed by digits: a site name outside the four-point stencil.
fn looks_like_site(name: &str) -> bool {
    name.strip_prefix('u')
        .is_some_and(|rest| !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()))
}
