//! Text syntax for chains.
//!
//! `l<i>` is a lambda generator, `e<k>` or any other cell id starting with
//! `e` is a cell, `1` and `0` are constants. Juxtaposition multiplies, `+`
//! adds, `^k` is a power, and parentheses group. `delta(x)`, `sq0(x)` and
//! `transfer(x)` apply the chain maps, `$name` or `${any text}` refers to a
//! binding.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lambda::{delta, multiply, sq0, LambdaChain};
use crate::modules::{module_delta, module_sq0, transfer_chain, FiniteAModule, ModuleChain, ModuleMorphism};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Lambda(LambdaChain),
    Module(ModuleChain),
}

impl Value {
    pub fn is_zero(&self) -> bool {
        match self {
            Value::Lambda(c) => c.is_zero(),
            Value::Module(c) => c.is_zero(),
        }
    }

    /// View as a chain of `module`, lambda chains sitting on a one cell module.
    pub fn into_module(self, module: &Arc<FiniteAModule>) -> Result<ModuleChain> {
        match self {
            Value::Module(c) => {
                if c.module() == module {
                    Ok(c)
                } else {
                    transport(&c, module)
                }
            }
            Value::Lambda(c) if c.is_zero() => Ok(ModuleChain::zero(module.clone())),
            Value::Lambda(c) if module.num_cells() == 1 => Ok(ModuleChain::cell_times(module.clone(), 0, &c)),
            Value::Lambda(_) => Err(Error::ModuleMismatch(format!("a lambda chain is not a chain of {}", module.name()))),
        }
    }

    pub fn into_lambda(self) -> Result<LambdaChain> {
        match self {
            Value::Lambda(c) => Ok(c),
            Value::Module(c) if c.is_zero() => Ok(LambdaChain::zero()),
            Value::Module(c) if c.module().num_cells() == 1 && c.module().degree(0) == 0 => Ok(c.component(0)),
            Value::Module(c) => Err(Error::ModuleMismatch(format!("chain of {} where a lambda chain is expected", c.module().name()))),
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        match self {
            Value::Lambda(c) => c.fmt(f),
            Value::Module(c) => c.fmt(f),
        }
    }
}

/// Push a chain along the map matching cell ids, when that map is a
/// module map.
fn transport(c: &ModuleChain, target: &Arc<FiniteAModule>) -> Result<ModuleChain> {
    let f = ModuleMorphism::by_ids(c.module().clone(), target.clone())
        .map_err(|_| Error::ModuleMismatch(format!("no cell map from {} to {}", c.module().name(), target.name())))?;
    f.apply(c)
}

/// Evaluation context: the ambient module and named values.
pub struct Scope<'a> {
    pub module: Option<Arc<FiniteAModule>>,
    pub bindings: &'a HashMap<String, Value>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Lambda(u32),
    Cell(String),
    Int(u32),
    Name(String),
    Func(String),
    Plus,
    Caret,
    Open,
    Close,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let b: Vec<char> = text.chars().collect();
    let mut out = vec![];
    let mut i = 0;
    let ident = |c: char| c.is_ascii_alphanumeric() || c == '_' || c == '\'';
    while i < b.len() {
        let c = b[i];
        let start = i;
        if c.is_whitespace() || c == '*' || c == '.' {
            i += 1;
            continue;
        }
        match c {
            '+' => {
                out.push((start, Tok::Plus));
                i += 1;
            }
            '^' => {
                out.push((start, Tok::Caret));
                i += 1;
            }
            '(' => {
                out.push((start, Tok::Open));
                i += 1;
            }
            ')' => {
                out.push((start, Tok::Close));
                i += 1;
            }
            '$' => {
                i += 1;
                if i < b.len() && b[i] == '{' {
                    let end = b[i..].iter().position(|&c| c == '}').ok_or_else(|| Error::parse(start, "unterminated ${"))?;
                    out.push((start, Tok::Name(b[i + 1..i + end].iter().collect())));
                    i += end + 1;
                } else {
                    let n = b[i..].iter().take_while(|&&c| ident(c)).count();
                    if n == 0 {
                        return Err(Error::parse(start, "empty name after $"));
                    }
                    out.push((start, Tok::Name(b[i..i + n].iter().collect())));
                    i += n;
                }
            }
            _ if c.is_ascii_digit() => {
                let n = b[i..].iter().take_while(|c| c.is_ascii_digit()).count();
                let s: String = b[i..i + n].iter().collect();
                out.push((start, Tok::Int(s.parse().map_err(|_| Error::parse(start, "integer too large"))?)));
                i += n;
            }
            _ if ident(c) => {
                let n = b[i..].iter().take_while(|&&c| ident(c)).count();
                let word: String = b[i..i + n].iter().collect();
                i += n;
                let tok = if let Some(d) = word.strip_prefix('l').filter(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit())) {
                    Tok::Lambda(d.parse().map_err(|_| Error::parse(start, "index too large"))?)
                } else if matches!(word.as_str(), "delta" | "sq0" | "transfer") {
                    Tok::Func(word)
                } else if word.starts_with('e') {
                    Tok::Cell(word)
                } else {
                    return Err(Error::parse(start, format!("unknown word '{}'", word)));
                };
                out.push((start, tok));
            }
            _ => return Err(Error::parse(start, format!("unexpected '{}'", c))),
        }
    }
    Ok(out)
}

/// Raw value before normalization choices: a list of summands, each an
/// optional cell and a lambda chain.
struct Parser<'a, 'b> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    scope: &'a Scope<'b>,
    len: usize,
}

impl<'a, 'b> Parser<'a, 'b> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |t| t.0)
    }

    fn sum(&mut self) -> Result<Value> {
        let mut acc = self.product()?;
        while self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            let rhs = self.product()?;
            acc = add(acc, rhs)?;
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Value> {
        let mut acc = self.power()?;
        while matches!(self.peek(), Some(Tok::Lambda(_) | Tok::Cell(_) | Tok::Int(_) | Tok::Name(_) | Tok::Func(_) | Tok::Open)) {
            let rhs = self.power()?;
            acc = mul(acc, rhs)?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Value> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let at = self.offset();
        let Some(Tok::Int(k)) = self.peek().cloned() else {
            return Err(Error::parse(at, "expected an exponent"));
        };
        self.pos += 1;
        if k == 0 {
            return Ok(Value::Lambda(LambdaChain::one()));
        }
        let mut acc = base.clone();
        for _ in 1..k {
            acc = mul(acc, base.clone())?;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Value> {
        let at = self.offset();
        let tok = self.peek().cloned().ok_or_else(|| Error::parse(at, "unexpected end of expression"))?;
        self.pos += 1;
        match tok {
            Tok::Lambda(i) => Ok(Value::Lambda(LambdaChain::generator(i))),
            Tok::Int(1) => Ok(Value::Lambda(LambdaChain::one())),
            Tok::Int(0) => Ok(Value::Lambda(LambdaChain::zero())),
            Tok::Int(n) => Err(Error::parse(at, format!("constant {} is not 0 or 1", n))),
            Tok::Cell(id) => self.cell(&id, at),
            Tok::Name(n) => self.scope.bindings.get(&n).cloned().ok_or(Error::UnknownName(n)),
            Tok::Open => {
                let v = self.sum()?;
                self.expect_close()?;
                Ok(v)
            }
            Tok::Func(f) => {
                if self.peek() != Some(&Tok::Open) {
                    return Err(Error::parse(self.offset(), format!("expected '(' after {}", f)));
                }
                self.pos += 1;
                let v = self.sum()?;
                self.expect_close()?;
                apply(&f, v)
            }
            Tok::Plus | Tok::Caret | Tok::Close => Err(Error::parse(at, "expected a term")),
        }
    }

    fn expect_close(&mut self) -> Result<()> {
        if self.peek() != Some(&Tok::Close) {
            return Err(Error::parse(self.offset(), "expected ')'"));
        }
        self.pos += 1;
        Ok(())
    }

    fn cell(&self, id: &str, at: usize) -> Result<Value> {
        let m = self.scope.module.as_ref().ok_or_else(|| Error::parse(at, format!("cell {} outside a module", id)))?;
        if let Some(c) = m.cell_index(id) {
            return Ok(Value::Module(ModuleChain::cell_times(m.clone(), c, &LambdaChain::one())));
        }
        // Cells below the bottom or above the top of a stunted projective
        // space are zero.
        let k = id.strip_prefix('e').and_then(|d| d.parse::<u32>().ok());
        if let (Some(k), Some(r)) = (k, m.projective()) {
            if k < r.l || k > r.m {
                return Ok(Value::Module(ModuleChain::zero(m.clone())));
            }
        }
        Err(Error::UnknownName(format!("cell {} of {}", id, m.name())))
    }
}

fn add(a: Value, b: Value) -> Result<Value> {
    match (a, b) {
        (Value::Lambda(x), Value::Lambda(y)) => Ok(Value::Lambda(x.add(&y))),
        (Value::Module(x), Value::Module(y)) => Ok(Value::Module(x.add(&y)?)),
        (Value::Module(x), Value::Lambda(y)) | (Value::Lambda(y), Value::Module(x)) => {
            if y.is_zero() {
                Ok(Value::Module(x))
            } else if x.is_zero() {
                Ok(Value::Lambda(y))
            } else {
                Err(Error::ModuleMismatch("sum of a module chain and a lambda chain".into()))
            }
        }
    }
}

fn mul(a: Value, b: Value) -> Result<Value> {
    match (a, b) {
        (Value::Lambda(x), Value::Lambda(y)) => Ok(Value::Lambda(multiply(&x, &y))),
        (Value::Module(x), Value::Lambda(y)) => Ok(Value::Module(x.mul_lambda(&y))),
        (Value::Lambda(x), Value::Module(y)) => {
            if x == LambdaChain::one() {
                Ok(Value::Module(y))
            } else if x.is_zero() {
                Ok(Value::Module(ModuleChain::zero(y.module().clone())))
            } else {
                Err(Error::Domain("cells must stand to the left of lambda factors".into()))
            }
        }
        (Value::Module(_), Value::Module(_)) => Err(Error::Domain("product of two module chains".into())),
    }
}

fn apply(f: &str, v: Value) -> Result<Value> {
    match (f, v) {
        ("delta", Value::Lambda(c)) => Ok(Value::Lambda(delta(&c))),
        ("delta", Value::Module(c)) => Ok(Value::Module(module_delta(&c))),
        ("sq0", Value::Lambda(c)) => Ok(Value::Lambda(sq0(&c))),
        ("sq0", Value::Module(c)) => Ok(Value::Module(module_sq0(&c)?)),
        ("transfer", Value::Module(c)) => Ok(Value::Lambda(transfer_chain(&c)?)),
        ("transfer", Value::Lambda(_)) => Err(Error::Domain("transfer needs a chain of a projective space".into())),
        _ => Err(Error::UnknownName(f.to_string())),
    }
}

/// Evaluate an expression.
pub fn eval(text: &str, scope: &Scope) -> Result<Value> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(Error::parse(0, "empty expression"));
    }
    let mut p = Parser { toks, pos: 0, scope, len: text.len() };
    let v = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(Error::parse(p.offset(), "trailing input"));
    }
    Ok(v)
}

/// Check tokens and bracket balance without evaluating.
pub fn check_syntax(text: &str) -> Result<()> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(Error::parse(0, "empty expression"));
    }
    let mut depth = 0i64;
    for (at, t) in &toks {
        match t {
            Tok::Open => depth += 1,
            Tok::Close => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::parse(*at, "unbalanced ')'"));
                }
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::parse(text.len(), "unclosed '('"));
    }
    Ok(())
}

/// Parse a lambda chain such as `l0 l23 l7 l31 + l1`.
pub fn parse_lambda(text: &str) -> Result<LambdaChain> {
    let empty = HashMap::new();
    eval(text, &Scope { module: None, bindings: &empty })?.into_lambda()
}

/// Parse a chain of `module`.
pub fn parse_chain(module: &Arc<FiniteAModule>, text: &str) -> Result<ModuleChain> {
    let empty = HashMap::new();
    eval(text, &Scope { module: Some(module.clone()), bindings: &empty })?.into_module(module)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modules::{stunted_projective, tilde_p62};

    #[test]
    fn round_trip_text() {
        for s in ["l3 l5 l7", "1", "0", "l1 l1 + l2 l0", "l3 l3"] {
            assert_eq!(parse_lambda(s).unwrap().to_string(), s);
        }
        assert_eq!(parse_lambda("l0 l2").unwrap().to_string(), "l1 l1");
        assert_eq!(parse_lambda("l3^2 + (l1 + l2) l1 l0").unwrap().to_string(), "l1 l1 l0 + l2 l1 l0 + l3 l3");
        assert_eq!(parse_lambda("delta(l4)").unwrap().to_string(), "l2 l1 + l3 l0");
        assert_eq!(parse_lambda("sq0(l2 l3^2)").unwrap().to_string(), "l5 l7 l7");
    }

    #[test]
    fn module_terms() {
        let p = stunted_projective(47, 62).unwrap();
        let c = parse_chain(&p, "e48 l0 l7^2 + e47 (l9 l3^2 + l3^2 l9)").unwrap();
        assert!(module_delta(&c).is_zero());
        let h1 = parse_chain(&p, "e62 l1 + e60 l3 + e56 l7 + e48 l15 + e32 l31").unwrap();
        assert_eq!(h1.len(), 4);
        let t = tilde_p62();
        assert_eq!(parse_chain(&t, "delta(et31)").unwrap().to_string(), "e15 l15");
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_lambda("l1 +"), Err(Error::Parse { .. })));
        assert!(matches!(parse_lambda("(l1"), Err(Error::Parse { .. })));
        assert!(matches!(parse_lambda("x1"), Err(Error::Parse { .. })));
        assert!(matches!(parse_lambda("$h9"), Err(Error::UnknownName(_))));
        let m = crate::modules::sphere(0);
        assert!(matches!(parse_chain(&m, "e5"), Err(Error::UnknownName(_))));
    }
}
