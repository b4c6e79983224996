use crate::error::{Error, Result};
use crate::matching::ErrorKind;

use super::{Aggregator, BaseTerm, BinaryOp, CompareOp, QueryExpr};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Number(f64),
    Quoted(String),
    LParen,
    RParen,
    Comma,
    Assign,
    Plus,
    Minus,
    Star,
    Cmp(CompareOp),
    End,
}

fn syntax(position: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        position,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        let peek = chars.get(i + 1).map(|&(_, c)| c);
        let (token, width) = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => (Token::LParen, 1),
            ')' => (Token::RParen, 1),
            ',' => (Token::Comma, 1),
            '+' => (Token::Plus, 1),
            '-' => (Token::Minus, 1),
            '*' | '×' => (Token::Star, 1),
            '≥' => (Token::Cmp(CompareOp::Ge), 1),
            '≤' => (Token::Cmp(CompareOp::Le), 1),
            '>' if peek == Some('=') => (Token::Cmp(CompareOp::Ge), 2),
            '>' => (Token::Cmp(CompareOp::Gt), 1),
            '<' if peek == Some('=') => (Token::Cmp(CompareOp::Le), 2),
            '<' => (Token::Cmp(CompareOp::Lt), 1),
            '=' if peek == Some('=') => (Token::Cmp(CompareOp::Eq), 2),
            '=' => (Token::Assign, 1),
            '"' => {
                let end = chars[i + 1..]
                    .iter()
                    .position(|&(_, c)| c == '"')
                    .ok_or_else(|| syntax(pos, "unterminated string"))?;
                let s: String = chars[i + 1..i + 1 + end].iter().map(|&(_, c)| c).collect();
                (Token::Quoted(s), end + 2)
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                while j < chars.len() {
                    let c = chars[j].1;
                    let exp_sign = (c == '+' || c == '-')
                        && j > i
                        && matches!(chars[j - 1].1, 'e' | 'E');
                    if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                        j += 1;
                    } else {
                        break;
                    }
                }
                let s: String = chars[i..j].iter().map(|&(_, c)| c).collect();
                let value: f64 = s
                    .parse()
                    .map_err(|_| syntax(pos, format!("invalid number `{s}`")))?;
                if !value.is_finite() {
                    return Err(syntax(pos, format!("number `{s}` out of range")));
                }
                (Token::Number(value), j - i)
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len()
                    && (chars[j].1.is_alphanumeric() || matches!(chars[j].1, '_' | '.'))
                {
                    j += 1;
                }
                (
                    Token::Ident(chars[i..j].iter().map(|&(_, c)| c).collect()),
                    j - i,
                )
            }
            other => return Err(syntax(pos, format!("unexpected character `{other}`"))),
        };
        out.push((pos, token));
        i += width;
    }
    out.push((text.len(), Token::End));
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    cursor: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.cursor].1
    }

    fn position(&self) -> usize {
        self.tokens[self.cursor].0
    }

    fn advance(&mut self) -> Token {
        let token = self.tokens[self.cursor].1.clone();
        if token != Token::End {
            self.cursor += 1;
        }
        token
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.advance();
            Ok(())
        } else {
            Err(syntax(
                self.position(),
                format!("expected {what}, found {}", describe(self.peek())),
            ))
        }
    }

    fn query(&mut self) -> Result<QueryExpr> {
        let lhs = self.sum()?;
        if let Token::Cmp(op) = *self.peek() {
            self.advance();
            let rhs = self.sum()?;
            if let Token::Cmp(_) = self.peek() {
                return Err(syntax(
                    self.position(),
                    "chained comparisons must be parenthesized",
                ));
            }
            return Ok(QueryExpr::compare(op, lhs, rhs));
        }
        Ok(lhs)
    }

    fn sum(&mut self) -> Result<QueryExpr> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Token::Plus => BinaryOp::Add,
                Token::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            lhs = QueryExpr::binary(op, lhs, self.product()?);
        }
    }

    fn product(&mut self) -> Result<QueryExpr> {
        let mut lhs = self.unary()?;
        while *self.peek() == Token::Star {
            self.advance();
            lhs = QueryExpr::binary(BinaryOp::Mul, lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<QueryExpr> {
        if *self.peek() == Token::Minus {
            self.advance();
            return Ok(match self.unary()? {
                QueryExpr::Scalar(v) => QueryExpr::Scalar(-v),
                other => QueryExpr::binary(BinaryOp::Mul, QueryExpr::Scalar(-1.0), other),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<QueryExpr> {
        let pos = self.position();
        match self.advance() {
            Token::Number(v) => Ok(QueryExpr::Scalar(v)),
            Token::LParen => {
                let inner = self.query()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Token::Ident(name) => self.term(pos, &name),
            other => Err(syntax(pos, format!("expected a term, found {}", describe(&other)))),
        }
    }

    fn term(&mut self, pos: usize, name: &str) -> Result<QueryExpr> {
        let aggregator = match name.to_ascii_lowercase().as_str() {
            "total" => Aggregator::Total,
            "pixeladj" => Aggregator::PixelAdj,
            "occaware" => Aggregator::OccAware,
            _ => return Err(syntax(pos, format!("unknown aggregator `{name}`"))),
        };
        self.expect(Token::LParen, "`(` after aggregator")?;
        let set_pos = self.position();
        let error_set = match self.advance() {
            Token::Ident(s) => match s.to_ascii_lowercase().as_str() {
                "fp" => ErrorKind::Fp,
                "fn" => ErrorKind::Fn,
                "false" => ErrorKind::False,
                _ => return Err(syntax(set_pos, format!("unknown error set `{s}`"))),
            },
            other => {
                return Err(syntax(
                    set_pos,
                    format!("expected error set, found {}", describe(&other)),
                ))
            }
        };
        let mut class_filter = None;
        if *self.peek() == Token::Comma {
            self.advance();
            let key_pos = self.position();
            match self.advance() {
                Token::Ident(k) if k.eq_ignore_ascii_case("class") => {}
                other => {
                    return Err(syntax(
                        key_pos,
                        format!("expected `class`, found {}", describe(&other)),
                    ))
                }
            }
            self.expect(Token::Assign, "`=`")?;
            let name_pos = self.position();
            class_filter = Some(match self.advance() {
                Token::Ident(s) | Token::Quoted(s) => s,
                Token::Number(v) => v.to_string(),
                other => {
                    return Err(syntax(
                        name_pos,
                        format!("expected class name, found {}", describe(&other)),
                    ))
                }
            });
        }
        self.expect(Token::RParen, "`)`")?;
        Ok(QueryExpr::Term(BaseTerm {
            aggregator,
            error_set,
            class_filter,
        }))
    }
}

fn describe(token: &Token) -> String {
    match token {
        Token::Ident(s) => format!("`{s}`"),
        Token::Number(v) => format!("number {v}"),
        Token::Quoted(s) => format!("\"{s}\""),
        Token::LParen => "`(`".into(),
        Token::RParen => "`)`".into(),
        Token::Comma => "`,`".into(),
        Token::Assign => "`=`".into(),
        Token::Plus => "`+`".into(),
        Token::Minus => "`-`".into(),
        Token::Star => "`*`".into(),
        Token::Cmp(op) => format!("`{}`", op.symbol()),
        Token::End => "end of input".into(),
    }
}

pub fn parse_query(text: &str) -> Result<QueryExpr> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        cursor: 0,
    };
    let expr = parser.query()?;
    if *parser.peek() != Token::End {
        return Err(syntax(
            parser.position(),
            format!("unexpected {}", describe(parser.peek())),
        ));
    }
    Ok(expr)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedQuery {
    pub name: String,
    pub text: String,
    pub expr: QueryExpr,
}

/// Parses `name = expr` lines; blank lines and `#` comments are skipped.
pub fn parse_query_file(contents: &str) -> Result<Vec<NamedQuery>> {
    let mut out = Vec::new();
    for (lineno, line) in contents.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, text) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("query file line {}: expected `name = expr`", lineno + 1))
        })?;
        let (name, text) = (name.trim(), text.trim());
        if name.is_empty() {
            return Err(Error::Config(format!("query file line {}: empty name", lineno + 1)));
        }
        let expr = parse_query(text).map_err(|e| {
            Error::Config(format!("query file line {} ({name}): {e}", lineno + 1))
        })?;
        out.push(NamedQuery {
            name: name.to_string(),
            text: text.to_string(),
            expr,
        });
    }
    Ok(out)
}
