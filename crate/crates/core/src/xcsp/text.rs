//! Functional expression syntax, conditions and small token grammars that
//! appear inside element text.

use std::borrow::Cow;
use std::fmt;

use crate::model::{CondOp, Condition, Expr, Op, Operand, VarId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TextError {
    /// Byte position inside the parsed text.
    pub pos: usize,
    pub message: String,
}

impl fmt::Display for TextError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {}: {}", self.pos, self.message)
    }
}

impl std::error::Error for TextError {}

fn err<T>(pos: usize, message: impl Into<String>) -> Result<T, TextError> {
    Err(TextError { pos, message: message.into() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Tok<'t> {
    Int(i64),
    Ident(&'t str),
    LParen,
    RParen,
    Comma,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '[' | ']' | '%')
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok<'_>)>, TextError> {
    let mut chars = text.char_indices().peekable();
    let mut out = Vec::new();
    // End of the run of characters accepted by `keep` starting after `pos`.
    let run_end = |chars: &mut std::iter::Peekable<std::str::CharIndices>, keep: fn(char) -> bool| {
        while chars.next_if(|&(_, c)| keep(c)).is_some() {}
        chars.peek().map_or(text.len(), |&(i, _)| i)
    };
    while let Some((pos, c)) = chars.next() {
        match c {
            c if c.is_whitespace() => {}
            '(' => out.push((pos, Tok::LParen)),
            ')' => out.push((pos, Tok::RParen)),
            ',' => out.push((pos, Tok::Comma)),
            '-' | '+' | '0'..='9' => {
                let s = &text[pos..run_end(&mut chars, |c| c.is_ascii_digit())];
                match s.parse::<i64>() {
                    Ok(v) => out.push((pos, Tok::Int(v))),
                    Err(_) => return err(pos, format!("invalid integer {s:?}")),
                }
            }
            c if is_ident_char(c) => out.push((pos, Tok::Ident(&text[pos..run_end(&mut chars, is_ident_char)]))),
            other => return err(pos, format!("unexpected character {other:?}")),
        }
    }
    Ok(out)
}

struct ExprParser<'a, 't, F> {
    toks: Vec<(usize, Tok<'t>)>,
    at: usize,
    end: usize,
    resolve: &'a F,
}

impl<'t, F: Fn(&str) -> Option<VarId>> ExprParser<'_, 't, F> {
    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn next(&mut self) -> Option<Tok<'t>> {
        let t = self.toks.get(self.at).map(|t| t.1);
        self.at += 1;
        t
    }

    fn expect(&mut self, want: Tok<'t>, what: &str) -> Result<(), TextError> {
        let pos = self.pos();
        match self.next() {
            Some(t) if t == want => Ok(()),
            _ => err(pos, format!("expected {what}")),
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>, TextError> {
        self.expect(Tok::LParen, "'('")?;
        let mut args = vec![self.expr()?];
        loop {
            let pos = self.pos();
            match self.next() {
                Some(Tok::Comma) => args.push(self.expr()?),
                Some(Tok::RParen) => return Ok(args),
                _ => return err(pos, "expected ',' or ')'"),
            }
        }
    }

    fn set(&mut self) -> Result<Vec<i64>, TextError> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Ident(s)) if s == "set" => {}
            _ => return err(pos, "expected set(...)"),
        }
        self.expect(Tok::LParen, "'('")?;
        let mut values = Vec::new();
        if self.toks.get(self.at).map(|t| &t.1) == Some(&Tok::RParen) {
            self.at += 1;
            return Ok(values);
        }
        loop {
            let pos = self.pos();
            match self.next() {
                Some(Tok::Int(v)) => values.push(v),
                _ => return err(pos, "set elements must be integers"),
            }
            let pos = self.pos();
            match self.next() {
                Some(Tok::Comma) => {}
                Some(Tok::RParen) => return Ok(values),
                _ => return err(pos, "expected ',' or ')'"),
            }
        }
    }

    fn expr(&mut self) -> Result<Expr, TextError> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Int(v)) => Ok(Expr::Const(v)),
            Some(Tok::Ident(name)) => {
                if self.toks.get(self.at).map(|t| &t.1) != Some(&Tok::LParen) {
                    return match (self.resolve)(name) {
                        Some(v) => Ok(Expr::Var(v)),
                        None => err(pos, format!("unknown variable {name}")),
                    };
                }
                match name {
                    "in" | "notin" => {
                        self.expect(Tok::LParen, "'('")?;
                        let e = self.expr()?;
                        self.expect(Tok::Comma, "','")?;
                        let set = self.set()?;
                        self.expect(Tok::RParen, "')'")?;
                        let m = Expr::in_set(e, set);
                        Ok(if name == "in" { m } else { Expr::unary(Op::Not, m) })
                    }
                    "imp" => {
                        let args = self.args()?;
                        if args.len() != 2 {
                            return err(pos, format!("imp takes 2 arguments, got {}", args.len()));
                        }
                        let mut it = args.into_iter();
                        let (a, b) = (it.next().unwrap(), it.next().unwrap());
                        Ok(Expr::binary(Op::Or, Expr::unary(Op::Not, a), b))
                    }
                    _ => {
                        let Some(op) = Op::from_name(name) else {
                            return err(pos, format!("unknown operator {name}"));
                        };
                        let args = self.args()?;
                        if !op.arity().accepts(args.len()) {
                            return err(pos, format!("{name} cannot take {} arguments", args.len()));
                        }
                        Ok(Expr::Apply(op, args))
                    }
                }
            }
            _ => err(pos, "expected an expression"),
        }
    }
}

/// Parses prefix functional syntax such as `eq(add(x,y),z)`. Identifiers
/// are resolved to variables through `resolve`. `imp(a,b)` is read as
/// `or(not(a),b)` and `notin(e,set(..))` as `not(in(e,set(..)))`.
pub fn parse_intension<F: Fn(&str) -> Option<VarId>>(text: &str, resolve: &F) -> Result<Expr, TextError> {
    let toks = tokenize(text)?;
    let mut p = ExprParser { toks, at: 0, end: text.len(), resolve };
    let e = p.expr()?;
    if p.at < p.toks.len() {
        return err(p.pos(), "trailing input after expression");
    }
    Ok(e)
}

/// Parses an integer, also accepting a leading `+`.
pub fn parse_int(s: &str) -> Option<i64> {
    s.trim().parse().ok()
}

/// Parses `lo..hi`.
pub fn parse_range(s: &str) -> Option<(i64, i64)> {
    let (a, b) = s.split_once("..")?;
    Some((parse_int(a)?, parse_int(b)?))
}

/// Parses a condition `(op,operand)`; the operand is an integer, a
/// variable, an interval `lo..hi` or a set `{a,b,...}`.
pub fn parse_condition<F: Fn(&str) -> Option<VarId>>(text: &str, resolve: &F) -> Result<Condition, TextError> {
    let t = text.trim();
    let off = text.len() - text.trim_start().len();
    let Some(inner) = t.strip_prefix('(').and_then(|s| s.strip_suffix(')')) else {
        return err(off, "condition must have the form (op,operand)");
    };
    let Some((op, operand)) = inner.split_once(',') else {
        return err(off, "condition must have the form (op,operand)");
    };
    let Some(op) = CondOp::from_name(op.trim()) else {
        return err(off + 1, format!("unknown operator {:?}", op.trim()));
    };
    let operand = operand.trim();
    let rhs = if let Some(body) = operand.strip_prefix('{').and_then(|s| s.strip_suffix('}')) {
        let mut set = Vec::new();
        for tok in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match parse_int(tok) {
                Some(v) => set.push(v),
                None => return err(off, format!("set element {tok:?} is not an integer")),
            }
        }
        Operand::Set(set)
    } else if let Some((lo, hi)) = parse_range(operand) {
        Operand::Interval(lo, hi)
    } else if let Some(v) = parse_int(operand) {
        Operand::Value(v)
    } else if let Some(v) = resolve(operand) {
        Operand::Var(v)
    } else {
        return err(off, format!("malformed operand {operand:?}"));
    };
    let c = Condition::new(op, rhs);
    if !c.is_well_formed() {
        return err(off, format!("operator {} does not accept operand {operand:?}", op.name()));
    }
    Ok(c)
}

/// Writes a condition in the `(op,operand)` form.
pub fn write_condition<'n>(c: &Condition, name: &dyn Fn(VarId) -> Cow<'n, str>) -> String {
    let rhs = match &c.rhs {
        Operand::Value(v) => v.to_string(),
        Operand::Var(v) => name(*v).into_owned(),
        Operand::Interval(lo, hi) => format!("{lo}..{hi}"),
        Operand::Set(s) => format!("{{{}}}", s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")),
    };
    format!("({},{rhs})", c.op.name())
}

/// Splits `(a,b)(c,d)` into `[["a","b"],["c","d"]]`, ignoring whitespace.
pub fn parse_tuples(text: &str) -> Result<Vec<Vec<String>>, String> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let mut out = Vec::new();
    let mut rest = compact.as_str();
    while !rest.is_empty() {
        let Some(body) = rest.strip_prefix('(') else {
            return Err(format!("expected '(' at {rest:?}"));
        };
        let Some(close) = body.find(')') else {
            return Err("unterminated tuple".to_string());
        };
        let inner = &body[..close];
        out.push(if inner.is_empty() { Vec::new() } else { inner.split(',').map(str::to_string).collect() });
        rest = &body[close + 1..];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(s: &str) -> Option<VarId> {
        match s {
            "x" => Some(0),
            "y" => Some(1),
            "z" => Some(2),
            "w[1][2]" => Some(3),
            _ => None,
        }
    }

    #[test]
    fn intension_examples() {
        let e = parse_intension("eq(add(x,y),z)", &names).unwrap();
        assert_eq!(e, Expr::binary(Op::Eq, Expr::apply(Op::Add, vec![Expr::Var(0), Expr::Var(1)]), Expr::Var(2)));
        let e = parse_intension("ne(mul(2,x),add(y,z))", &names).unwrap();
        assert_eq!(e.to_string(), "ne(mul(2,v0),add(v1,v2))");
        assert_eq!(parse_intension("dist(x,y)", &names).unwrap(), Expr::binary(Op::Dist, Expr::Var(0), Expr::Var(1)));
        assert_eq!(parse_intension(" le( w[1][2] , -3 ) ", &names).unwrap().to_string(), "le(v3,-3)");
    }

    #[test]
    fn intension_lowerings() {
        assert_eq!(parse_intension("imp(x,y)", &names).unwrap().to_string(), "or(not(v0),v1)");
        assert_eq!(parse_intension("in(x,set(3,1))", &names).unwrap().to_string(), "in(v0,set(1,3))");
        assert_eq!(parse_intension("notin(x,set())", &names).unwrap().to_string(), "not(in(v0,set()))");
    }

    #[test]
    fn intension_errors() {
        assert!(parse_intension("foo(x)", &names).unwrap_err().message.contains("unknown operator"));
        assert!(parse_intension("abs(x,y)", &names).unwrap_err().message.contains("cannot take"));
        assert!(parse_intension("eq(x,q)", &names).unwrap_err().message.contains("unknown variable"));
        assert!(parse_intension("eq(x,y) z", &names).is_err());
        assert!(parse_intension("eq(x,", &names).is_err());
    }

    #[test]
    fn conditions() {
        assert_eq!(parse_condition("(le,100)", &names).unwrap(), Condition::value(CondOp::Le, 100));
        assert_eq!(parse_condition("(eq,z)", &names).unwrap(), Condition::var(CondOp::Eq, 2));
        assert_eq!(parse_condition("(in,1..3)", &names).unwrap(), Condition::new(CondOp::In, Operand::Interval(1, 3)));
        assert_eq!(
            parse_condition(" ( notin , {3, 1} ) ", &names).unwrap(),
            Condition::new(CondOp::NotIn, Operand::Set(vec![1, 3]))
        );
        assert!(parse_condition("(foo,1)", &names).is_err());
        assert!(parse_condition("(in,4)", &names).is_err());
        assert!(parse_condition("(le,q)", &names).is_err());
        let c = Condition::new(CondOp::In, Operand::Set(vec![1, 2]));
        assert_eq!(write_condition(&c, &|v| format!("v{v}").into()), "(in,{1,2})");
    }

    #[test]
    fn tuples() {
        assert_eq!(parse_tuples(" (1,*) (2, 3)").unwrap(), vec![vec!["1", "*"], vec!["2", "3"]]);
        assert!(parse_tuples("(1,2").is_err());
        assert!(parse_tuples("1,2").is_err());
    }
}
