//! Recursive-descent parser for the plain-text field description format.
//!
//! One component per line, infix syntax over `x0..x{n-1}`, the functions
//! `sin`, `cos`, `tan`, `tanh`, integer powers with `^`, and numeric
//! literals. Errors carry the offending line and column.

use crate::error::{Error, Result};
use crate::expr::{Expr, VectorField};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Var(usize),
    Func(&'static str),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _text: &'a str,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        Lexer {
            chars: text.chars().collect(),
            pos: 0,
            line,
            _text: text,
        }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn tokenize(mut self) -> Result<Vec<(Token, usize)>> {
        let mut out = Vec::new();
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            let column = self.column();
            match c {
                ' ' | '\t' => {
                    self.pos += 1;
                }
                '+' => self.push_simple(&mut out, Token::Plus),
                '-' => self.push_simple(&mut out, Token::Minus),
                '*' => self.push_simple(&mut out, Token::Star),
                '/' => self.push_simple(&mut out, Token::Slash),
                '^' => self.push_simple(&mut out, Token::Caret),
                '(' => self.push_simple(&mut out, Token::LParen),
                ')' => self.push_simple(&mut out, Token::RParen),
                '0'..='9' | '.' => {
                    let tok = self.lex_number()?;
                    out.push((tok, column));
                }
                'a'..='z' | 'A'..='Z' => {
                    let tok = self.lex_ident()?;
                    out.push((tok, column));
                }
                other => {
                    return Err(err(
                        self.line,
                        column,
                        format!("unexpected character '{}'", other),
                    ));
                }
            }
        }
        Ok(out)
    }

    fn push_simple(&mut self, out: &mut Vec<(Token, usize)>, tok: Token) {
        out.push((tok, self.column()));
        self.pos += 1;
    }

    fn lex_number(&mut self) -> Result<Token> {
        let start = self.pos;
        let column = self.column();
        while self.pos < self.chars.len() && matches!(self.chars[self.pos], '0'..='9' | '.') {
            self.pos += 1;
        }
        // optional exponent
        if self.pos < self.chars.len() && matches!(self.chars[self.pos], 'e' | 'E') {
            let mut lookahead = self.pos + 1;
            if lookahead < self.chars.len() && matches!(self.chars[lookahead], '+' | '-') {
                lookahead += 1;
            }
            if lookahead < self.chars.len() && self.chars[lookahead].is_ascii_digit() {
                self.pos = lookahead;
                while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map(Token::Number)
            .map_err(|_| err(self.line, column, format!("invalid number '{}'", text)))
    }

    fn lex_ident(&mut self) -> Result<Token> {
        let start = self.pos;
        let column = self.column();
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_')
        {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        if let Some(digits) = text.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let index = digits
                    .parse::<usize>()
                    .map_err(|_| err(self.line, column, format!("variable index too large in '{}'", text)))?;
                return Ok(Token::Var(index));
            }
        }
        match text.as_str() {
            "sin" => Ok(Token::Func("sin")),
            "cos" => Ok(Token::Func("cos")),
            "tan" => Ok(Token::Func("tan")),
            "tanh" => Ok(Token::Func("tanh")),
            _ => Err(err(
                self.line,
                column,
                format!("unknown identifier '{}' (expected x<i>, sin, cos, tan or tanh)", text),
            )),
        }
    }
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    line: usize,
    end_column: usize,
    /// Deepest variable reference seen, with its column.
    max_var: Option<(usize, usize)>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, c)| *c)
            .unwrap_or(self.end_column)
    }

    fn advance(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<()> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(err(self.line, self.column(), format!("expected {}", what)))
        }
    }

    fn expression(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    lhs = lhs + self.term()?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    lhs = lhs * self.unary()?;
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    lhs = lhs / self.unary()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            Ok(-self.unary()?)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() != Some(&Token::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let column = self.column();
        match self.advance() {
            Some(Token::Number(v)) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => {
                Ok(base.pow(v as u32))
            }
            _ => Err(err(
                self.line,
                column,
                "exponent must be a non-negative integer literal",
            )),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let column = self.column();
        match self.advance() {
            Some(Token::Number(v)) => Ok(Expr::Const(v)),
            Some(Token::Var(i)) => {
                if self.max_var.map_or(true, |(m, _)| i > m) {
                    self.max_var = Some((i, column));
                }
                Ok(Expr::Var(i))
            }
            Some(Token::Func(name)) => {
                self.expect(Token::LParen, "'(' after function name")?;
                let arg = self.expression()?;
                self.expect(Token::RParen, "')'")?;
                Ok(match name {
                    "sin" => crate::expr::sin(arg),
                    "cos" => crate::expr::cos(arg),
                    "tan" => crate::expr::tan(arg),
                    _ => crate::expr::tanh(arg),
                })
            }
            Some(Token::LParen) => {
                let inner = self.expression()?;
                self.expect(Token::RParen, "')'")?;
                Ok(inner)
            }
            Some(tok) => Err(err(
                self.line,
                column,
                format!("unexpected token {:?}", tok),
            )),
            None => Err(err(self.line, column, "unexpected end of expression")),
        }
    }
}

fn parse_line(text: &str, line: usize) -> Result<(Expr, Option<(usize, usize)>)> {
    let end_column = text.chars().count() + 1;
    let tokens = Lexer::new(text, line).tokenize()?;
    if tokens.is_empty() {
        return Err(err(line, 1, "empty expression"));
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        line,
        end_column,
        max_var: None,
    };
    let expr = parser.expression()?;
    if parser.pos < parser.tokens.len() {
        return Err(err(
            line,
            parser.column(),
            format!("unexpected trailing token {:?}", parser.tokens[parser.pos].0),
        ));
    }
    Ok((expr, parser.max_var))
}

pub(super) fn parse_field(text: &str) -> Result<VectorField> {
    let mut components = Vec::new();
    let mut deepest: Option<(usize, usize, usize)> = None; // (index, line, column)
    for (lineno, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line = lineno + 1;
        let (expr, max_var) = parse_line(raw, line)?;
        if let Some((i, column)) = max_var {
            if deepest.map_or(true, |(m, _, _)| i > m) {
                deepest = Some((i, line, column));
            }
        }
        components.push(expr);
    }
    if components.is_empty() {
        return Err(err(1, 1, "field description has no components"));
    }
    if let Some((i, line, column)) = deepest {
        if i >= components.len() {
            return Err(err(
                line,
                column,
                format!(
                    "x{} is out of range: the field has {} components",
                    i,
                    components.len()
                ),
            ));
        }
    }
    VectorField::new(components)
}
