//! Metric selection strings.
//!
//! ```text
//! metric := ident "(" [ arg { "," arg } ] ")"
//! arg    := [ ident "=" ] value
//! value  := number | "[" number { "," number } "]" | metric
//! ```
//!
//! Examples: `euclidean(3)`, `riemannian_sphere(n=2, c=1)`,
//! `randers(b=[0.4, 0, 0])`, `conic_ab(a=1, b=2)`,
//! `product(conic_ab(a=1,b=2), m=2)`, `reverse(randers(b=[0.5,0]))`.

use super::{builtin, MetricSpec};
use crate::error::{FinslerError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    List(Vec<f64>),
    Metric(MetricExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub key: Option<String>,
    pub value: Value,
}

impl Param {
    pub fn named(key: &str, value: Value) -> Self {
        Param {
            key: Some(key.to_string()),
            value,
        }
    }

    pub fn num(key: &str, v: f64) -> Self {
        Param::named(key, Value::Number(v))
    }

    pub fn list(key: &str, v: &[f64]) -> Self {
        Param::named(key, Value::List(v.to_vec()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricExpr {
    pub name: String,
    pub params: Vec<Param>,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, what: &str) -> FinslerError {
        FinslerError::Parse(format!("{what} at offset {} in {:?}", self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(&format!("expected '{c}'")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        if len == 0 || !rest.starts_with(|c: char| c.is_ascii_alphabetic()) {
            return Err(self.err("expected identifier"));
        }
        self.pos += len;
        Ok(rest[..len].to_string())
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
            .unwrap_or(rest.len());
        let v = rest[..len].parse::<f64>().map_err(|_| self.err("expected number"))?;
        self.pos += len;
        Ok(v)
    }

    fn value(&mut self) -> Result<Value> {
        match self.peek() {
            Some('[') => {
                self.expect('[')?;
                let mut items = Vec::new();
                if self.peek() != Some(']') {
                    loop {
                        items.push(self.number()?);
                        if self.peek() == Some(',') {
                            self.expect(',')?;
                        } else {
                            break;
                        }
                    }
                }
                self.expect(']')?;
                Ok(Value::List(items))
            }
            Some(c) if c.is_ascii_alphabetic() => Ok(Value::Metric(self.metric()?)),
            _ => Ok(Value::Number(self.number()?)),
        }
    }

    fn param(&mut self) -> Result<Param> {
        let save = self.pos;
        if self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            let id = self.ident()?;
            if self.peek() == Some('=') {
                self.expect('=')?;
                return Ok(Param {
                    key: Some(id),
                    value: self.value()?,
                });
            }
            self.pos = save;
        }
        Ok(Param {
            key: None,
            value: self.value()?,
        })
    }

    fn metric(&mut self) -> Result<MetricExpr> {
        let name = self.ident()?;
        self.expect('(')?;
        let mut params = Vec::new();
        if self.peek() != Some(')') {
            loop {
                params.push(self.param()?);
                if self.peek() == Some(',') {
                    self.expect(',')?;
                } else {
                    break;
                }
            }
        }
        self.expect(')')?;
        Ok(MetricExpr { name, params })
    }
}

pub fn parse_expr(src: &str) -> Result<MetricExpr> {
    let mut p = Parser { src, pos: 0 };
    let e = p.metric()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

/// Parses and builds a metric, e.g. `"conic_ab(a=1,b=2)"`.
pub fn parse_metric(src: &str) -> Result<MetricSpec> {
    let e = parse_expr(src)?;
    builtin(&e.name, &e.params)
}
