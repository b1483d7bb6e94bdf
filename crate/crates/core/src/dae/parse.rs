//! Line-oriented DAE text format.
//!
//! ```text
//! # comment
//! dae pendulum
//! vars x, y, lambda
//! params G = 9.8, L = 1
//! input h1
//! eq f1: x'' + x*lambda = 0
//! ```
//!
//! Declarations may appear in any order; equations are resolved after all
//! declarations are read. `eq name: e` without `=` means `e = 0`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{DaeError, DaeSystem, Equation, RESERVED};
use crate::expr::{total_derivative_raw, Expr, Func};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(BigRational),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> DaeError {
    DaeError::Syntax {
        line,
        col,
        message: message.into(),
    }
}

/// Parses a decimal or integer literal.
fn parse_number(text: &str) -> Option<BigRational> {
    let (int, frac) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().ok()?;
    let d = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(n, d))
}

fn lex(text: &str, line: usize, col0: usize) -> Result<Vec<Token>, DaeError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                col,
            });
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = parse_number(&s).ok_or_else(|| syntax(line, col, format!("bad number `{s}`")))?;
            out.push(Token { tok: Tok::Num(v), col });
        } else if "+-*/^()',=:[]".contains(c) {
            out.push(Token { tok: Tok::Sym(c), col });
            i += 1;
        } else {
            return Err(syntax(line, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

/// Resolved names during expression parsing.
struct Scope<'a> {
    vars: &'a [String],
    params: &'a [(String, Option<BigRational>)],
    inputs: &'a [String],
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    line: usize,
    end_col: usize,
    scope: &'a Scope<'a>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn err(&self, message: impl Into<String>) -> DaeError {
        syntax(self.line, self.col(), message)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), DaeError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, DaeError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(Expr::Neg(Box::new(self.term()?)));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Add(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, DaeError> {
        let mut factors = vec![self.unary()?];
        loop {
            if self.eat('*') {
                factors.push(self.unary()?);
            } else if self.eat('/') {
                factors.push(self.unary()?.pow(-1));
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Mul(factors)
        })
    }

    fn unary(&mut self) -> Result<Expr, DaeError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn integer(&mut self) -> Result<i32, DaeError> {
        let neg = self.eat('-');
        match self.peek().cloned() {
            Some(Tok::Num(v)) if v.is_integer() => {
                self.pos += 1;
                let k: i32 = v
                    .to_integer()
                    .try_into()
                    .map_err(|_| self.err("exponent too large"))?;
                Ok(if neg { -k } else { k })
            }
            _ => Err(self.err("expected an integer")),
        }
    }

    fn power(&mut self) -> Result<Expr, DaeError> {
        let base = self.postfix()?;
        if self.eat('^') {
            let k = if self.eat('(') {
                let k = self.integer()?;
                self.expect(')')?;
                k
            } else {
                self.integer()?
            };
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn primes(&mut self) -> u32 {
        let mut k = 0;
        while self.eat('\'') {
            k += 1;
        }
        k
    }

    fn postfix(&mut self) -> Result<Expr, DaeError> {
        let e = self.primary()?;
        let k = self.primes();
        Ok(if k == 0 {
            e
        } else {
            differentiate(&e, k)
        })
    }

    fn primary(&mut self) -> Result<Expr, DaeError> {
        let col = self.col();
        let tok = self.peek().cloned();
        match tok {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                self.identifier(&name, col)
            }
            _ => Err(self.err("expected an expression")),
        }
    }

    fn identifier(&mut self, name: &str, col: usize) -> Result<Expr, DaeError> {
        if name == "diff" {
            self.expect('(')?;
            let e = self.expr()?;
            self.expect(',')?;
            let k = self.integer()?;
            if k < 0 {
                return Err(self.err("derivative order must be non-negative"));
            }
            self.expect(')')?;
            return Ok(differentiate(&e, k as u32));
        }
        if let Some(f) = Func::from_name(name) {
            self.expect('(')?;
            let a = self.expr()?;
            self.expect(')')?;
            return Ok(Expr::func(f, a));
        }
        if name == "t" {
            return Ok(Expr::Time);
        }
        if let Some(j) = self.scope.vars.iter().position(|v| v == name) {
            return Ok(Expr::state(j, 0));
        }
        if self.scope.params.iter().any(|(p, _)| p == name) {
            return Ok(Expr::param(name));
        }
        if self.scope.inputs.iter().any(|h| h == name) {
            // h, h', h(t), h'(t)
            let k = self.primes();
            if self.eat('(') {
                match self.peek() {
                    Some(Tok::Ident(t)) if t == "t" => self.pos += 1,
                    _ => return Err(self.err("driving functions take the argument `t`")),
                }
                self.expect(')')?;
            }
            return Ok(Expr::input(name, k));
        }
        Err(DaeError::Undeclared {
            line: self.line,
            col,
            name: name.to_string(),
        })
    }
}

/// Derivative of a parsed operand. Plain symbols become higher-order
/// symbols; compound operands are expanded by the product and chain rules
/// without simplification.
fn differentiate(e: &Expr, k: u32) -> Expr {
    match e {
        Expr::State { var, order } => Expr::state(*var, order + k),
        Expr::Input { name, order } => Expr::input(name.clone(), order + k),
        _ => total_derivative_raw(e, k),
    }
}

/// A declaration line's comma-separated names, optionally with `= value`.
fn parse_decls(
    toks: &[Token],
    line: usize,
    end_col: usize,
    allow_values: bool,
) -> Result<Vec<(String, Option<BigRational>, usize)>, DaeError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let (name, col) = match &toks[i].tok {
            Tok::Ident(n) => (n.clone(), toks[i].col),
            _ => return Err(syntax(line, toks[i].col, "expected a name")),
        };
        i += 1;
        let mut value = None;
        if allow_values && matches!(toks.get(i), Some(Token { tok: Tok::Sym('='), .. })) {
            i += 1;
            let mut neg = false;
            if matches!(toks.get(i), Some(Token { tok: Tok::Sym('-'), .. })) {
                neg = true;
                i += 1;
            }
            let mut v = match toks.get(i) {
                Some(Token { tok: Tok::Num(v), .. }) => v.clone(),
                Some(t) => return Err(syntax(line, t.col, "expected a rational value")),
                None => return Err(syntax(line, end_col, "expected a rational value")),
            };
            i += 1;
            if matches!(toks.get(i), Some(Token { tok: Tok::Sym('/'), .. })) {
                i += 1;
                match toks.get(i) {
                    Some(Token { tok: Tok::Num(d), col }) => {
                        if d.is_zero() {
                            return Err(syntax(line, *col, "zero denominator"));
                        }
                        v /= d;
                    }
                    _ => return Err(syntax(line, end_col, "expected a denominator")),
                }
                i += 1;
            }
            if neg {
                v = -v;
            }
            value = Some(v);
        }
        out.push((name, value, col));
        match toks.get(i) {
            None => {}
            Some(Token { tok: Tok::Sym(','), .. }) => i += 1,
            Some(t) => return Err(syntax(line, t.col, "expected `,`")),
        }
    }
    Ok(out)
}

/// Parses the DAE text format.
pub fn parse_dae(text: &str) -> Result<DaeSystem, DaeError> {
    let mut name = String::from("dae");
    let mut vars: Vec<String> = Vec::new();
    let mut params: Vec<(String, Option<BigRational>)> = Vec::new();
    let mut inputs: Vec<String> = Vec::new();
    let mut pending: Vec<(usize, String, Vec<Token>, usize)> = Vec::new();
    let mut declared_at: Vec<(String, usize, usize)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("");
        let trimmed = content.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let indent = content.chars().count() - trimmed.chars().count();
        let keyword: String = trimmed.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
        let rest = &trimmed[keyword.len()..];
        let rest_col = indent + keyword.chars().count() + 1;
        let end_col = indent + trimmed.chars().count() + 1;
        match keyword.as_str() {
            "dae" => {
                let n = rest.trim();
                if n.is_empty() {
                    return Err(syntax(line, rest_col, "expected a system name"));
                }
                name = n.to_string();
            }
            "vars" | "params" | "input" | "inputs" => {
                let toks = lex(rest, line, rest_col)?;
                let decls = parse_decls(&toks, line, end_col, keyword == "params")?;
                for (n, v, col) in decls {
                    declared_at.push((n.clone(), line, col));
                    match keyword.as_str() {
                        "vars" => vars.push(n),
                        "params" => params.push((n, v)),
                        _ => inputs.push(n),
                    }
                }
            }
            "eq" => {
                let (eq_name, body) = rest
                    .split_once(':')
                    .ok_or_else(|| syntax(line, rest_col, "expected `eq <name>: <expr> = <expr>`"))?;
                let eq_name = eq_name.trim();
                if eq_name.is_empty()
                    || !eq_name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                {
                    return Err(syntax(line, rest_col, "expected an equation name"));
                }
                let colon = rest[..rest.find(':').unwrap()].chars().count();
                let body_col = rest_col + colon + 1;
                let toks = lex(body, line, body_col)?;
                pending.push((line, eq_name.to_string(), toks, end_col));
            }
            _ => {
                return Err(syntax(
                    line,
                    indent + 1,
                    format!("unknown statement `{}`", trimmed.split_whitespace().next().unwrap_or("")),
                ))
            }
        }
    }

    let mut seen = std::collections::BTreeSet::new();
    for (n, line, col) in &declared_at {
        if RESERVED.contains(&n.as_str()) {
            return Err(syntax(*line, *col, format!("`{n}` is reserved")));
        }
        if !seen.insert(n.clone()) {
            return Err(DaeError::Duplicate(n.clone()));
        }
    }

    let scope = Scope {
        vars: &vars,
        params: &params,
        inputs: &inputs,
    };
    let mut equations = Vec::new();
    for (line, eq_name, toks, end_col) in pending {
        let mut p = Parser {
            toks,
            pos: 0,
            line,
            end_col,
            scope: &scope,
        };
        let lhs = p.expr()?;
        let e = if p.eat('=') {
            let rhs = p.expr()?;
            if rhs.is_zero_const() {
                lhs
            } else {
                lhs - rhs
            }
        } else {
            lhs
        };
        if p.pos < p.toks.len() {
            return Err(p.err("unexpected trailing input"));
        }
        equations.push(Equation::new(eq_name, e));
    }

    let sys = DaeSystem {
        name,
        vars,
        equations,
        params,
        inputs,
    };
    sys.validate()?;
    Ok(sys)
}

/// Parses one expression over the names declared in `sys`.
pub fn parse_expr(sys: &DaeSystem, text: &str) -> Result<Expr, DaeError> {
    let mut list = parse_list(sys, text, false)?;
    match list.len() {
        1 => Ok(list.pop().unwrap()),
        _ => Err(syntax(1, 1, "expected a single expression")),
    }
}

/// Parses `[e1, e2, ...]` (brackets optional) over the names declared in
/// `sys`.
pub fn parse_expr_list(sys: &DaeSystem, text: &str) -> Result<Vec<Expr>, DaeError> {
    parse_list(sys, text, true)
}

fn parse_list(sys: &DaeSystem, text: &str, brackets: bool) -> Result<Vec<Expr>, DaeError> {
    let scope = Scope {
        vars: &sys.vars,
        params: &sys.params,
        inputs: &sys.inputs,
    };
    let toks = lex(text, 1, 1)?;
    let end_col = text.chars().count() + 1;
    let mut p = Parser {
        toks,
        pos: 0,
        line: 1,
        end_col,
        scope: &scope,
    };
    let open = brackets && p.eat('[');
    let mut out = vec![p.expr()?];
    while brackets && p.eat(',') {
        out.push(p.expr()?);
    }
    if open {
        p.expect(']')?;
    }
    if p.pos < p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}
