//! The function expression language.
//!
//! ```text
//! expr   := term (("+"|"-") term)* ;
//! term   := factor ("*" factor)* ;
//! factor := INT | var | "maj" "(" expr "," expr "," expr ")" | "not" "(" expr ")" | "(" expr ")" ;
//! var    := "x" INT ("_" INT)? ;
//! ```
//!
//! Variables are 1-based in text. `xk_j` names sub-packet `j` of message
//! `k` and maps to scalar index `(k-1)·n + (j-1)`.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::field::{PrimeField, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Symbol),
    /// 0-based scalar variable index in `[0, nK)`.
    Var(usize),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Neg(Box<Expr>),
    /// Majority of three bits (F_2 only).
    Maj(Box<[Expr; 3]>),
    /// `1 + e` over F_2.
    Not(Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    BadVariable,
    MajUnsupported,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind:?} at offset {position}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the parsed text.
    pub position: usize,
    pub message: String,
}

impl Expr {
    pub fn eval(&self, field: &PrimeField, x: &[Symbol]) -> Symbol {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Add(terms) => terms
                .iter()
                .fold(0, |acc, t| field.add(acc, t.eval(field, x))),
            Expr::Mul(factors) => {
                let mut acc = 1 % field.q();
                for f in factors {
                    if acc == 0 {
                        break;
                    }
                    acc = field.mul(acc, f.eval(field, x));
                }
                acc
            }
            Expr::Neg(e) => field.neg(e.eval(field, x)),
            Expr::Maj(args) => {
                let ones = args.iter().filter(|a| a.eval(field, x) != 0).count();
                Symbol::from(ones >= 2)
            }
            Expr::Not(e) => Symbol::from(e.eval(field, x) == 0),
        }
    }

    /// Applies `f` to every variable index, returning a new tree.
    pub fn map_vars(&self, f: &impl Fn(usize) -> usize) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(i) => Expr::Var(f(*i)),
            Expr::Add(ts) => Expr::Add(ts.iter().map(|t| t.map_vars(f)).collect()),
            Expr::Mul(ts) => Expr::Mul(ts.iter().map(|t| t.map_vars(f)).collect()),
            Expr::Neg(e) => Expr::Neg(Box::new(e.map_vars(f))),
            Expr::Maj(a) => Expr::Maj(Box::new([
                a[0].map_vars(f),
                a[1].map_vars(f),
                a[2].map_vars(f),
            ])),
            Expr::Not(e) => Expr::Not(Box::new(e.map_vars(f))),
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Add(ts) | Expr::Mul(ts) => ts.iter().filter_map(Expr::max_var).max(),
            Expr::Neg(e) | Expr::Not(e) => e.max_var(),
            Expr::Maj(a) => a.iter().filter_map(Expr::max_var).max(),
        }
    }

    /// True if the tree contains `maj` or `not`.
    pub fn uses_boolean_ops(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Add(ts) | Expr::Mul(ts) => ts.iter().any(Expr::uses_boolean_ops),
            Expr::Neg(e) => e.uses_boolean_ops(),
            Expr::Maj(_) | Expr::Not(_) => true,
        }
    }

    /// Affine form `c·x + b` obtained by structural expansion, or `None`
    /// when a product of non-constant terms or a `maj` appears.
    pub(crate) fn structural_affine(
        &self,
        field: &PrimeField,
        nk: usize,
    ) -> Option<(Vec<Symbol>, Symbol)> {
        match self {
            Expr::Const(c) => Some((vec![0; nk], *c)),
            Expr::Var(i) => {
                let mut c = vec![0; nk];
                c[*i] = 1;
                Some((c, 0))
            }
            Expr::Add(ts) => {
                let mut acc = (vec![0; nk], 0);
                for t in ts {
                    let (c, b) = t.structural_affine(field, nk)?;
                    for (a, v) in acc.0.iter_mut().zip(c) {
                        *a = field.add(*a, v);
                    }
                    acc.1 = field.add(acc.1, b);
                }
                Some(acc)
            }
            Expr::Mul(ts) => {
                let mut scale = 1 % field.q();
                let mut linear: Option<(Vec<Symbol>, Symbol)> = None;
                for t in ts {
                    let (c, b) = t.structural_affine(field, nk)?;
                    if c.iter().all(|&v| v == 0) {
                        scale = field.mul(scale, b);
                    } else if linear.is_some() {
                        return None;
                    } else {
                        linear = Some((c, b));
                    }
                }
                let (c, b) = linear.unwrap_or((vec![0; nk], 1 % field.q()));
                Some((
                    c.into_iter().map(|v| field.mul(v, scale)).collect(),
                    field.mul(b, scale),
                ))
            }
            Expr::Neg(e) => {
                let (c, b) = e.structural_affine(field, nk)?;
                Some((c.into_iter().map(|v| field.neg(v)).collect(), field.neg(b)))
            }
            Expr::Maj(_) => None,
            Expr::Not(e) => {
                let (c, b) = e.structural_affine(field, nk)?;
                Some((c, field.add(b, 1)))
            }
        }
    }

    /// Canonical text rendering; `n` is the block length used to name variables.
    pub fn render(&self, n: usize) -> String {
        let mut out = String::new();
        self.write_expr(n, &mut out)
            .expect("writing to a String cannot fail");
        out
    }

    fn write_var(i: usize, n: usize, out: &mut String) -> fmt::Result {
        if n <= 1 {
            write!(out, "x{}", i + 1)
        } else {
            write!(out, "x{}_{}", i / n + 1, i % n + 1)
        }
    }

    fn write_expr(&self, n: usize, out: &mut String) -> fmt::Result {
        match self {
            Expr::Add(ts) if !ts.is_empty() => {
                for (idx, t) in ts.iter().enumerate() {
                    match (idx, t) {
                        (0, _) => t.write_term(n, out)?,
                        (_, Expr::Neg(inner)) => {
                            out.push_str(" - ");
                            inner.write_term(n, out)?;
                        }
                        _ => {
                            out.push_str(" + ");
                            t.write_term(n, out)?;
                        }
                    }
                }
                Ok(())
            }
            _ => self.write_term(n, out),
        }
    }

    fn write_term(&self, n: usize, out: &mut String) -> fmt::Result {
        match self {
            Expr::Mul(fs) if !fs.is_empty() => {
                for (idx, f) in fs.iter().enumerate() {
                    if idx > 0 {
                        out.push_str(" * ");
                    }
                    f.write_factor(n, out)?;
                }
                Ok(())
            }
            _ => self.write_factor(n, out),
        }
    }

    fn write_factor(&self, n: usize, out: &mut String) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(out, "{c}"),
            Expr::Var(i) => Self::write_var(*i, n, out),
            Expr::Maj(a) => {
                out.push_str("maj(");
                a[0].write_expr(n, out)?;
                out.push_str(", ");
                a[1].write_expr(n, out)?;
                out.push_str(", ");
                a[2].write_expr(n, out)?;
                out.push(')');
                Ok(())
            }
            Expr::Not(e) => {
                out.push_str("not(");
                e.write_expr(n, out)?;
                out.push(')');
                Ok(())
            }
            Expr::Neg(e) => {
                out.push_str("(0 - ");
                e.write_term(n, out)?;
                out.push(')');
                Ok(())
            }
            Expr::Add(ts) | Expr::Mul(ts) if ts.is_empty() => {
                // Empty sum is 0, empty product is 1.
                write!(out, "{}", u8::from(matches!(self, Expr::Mul(_))))
            }
            Expr::Add(_) | Expr::Mul(_) => {
                out.push('(');
                self.write_expr(n, out)?;
                out.push(')');
                Ok(())
            }
        }
    }
}

/// Parsing context: field, block length `n` and message count `K`.
#[derive(Debug, Clone, Copy)]
pub struct ParseContext {
    pub field: PrimeField,
    pub n: usize,
    pub k: usize,
}

pub fn parse_expr(text: &str, ctx: ParseContext) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        ctx,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(ParseErrorKind::Syntax, "unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ctx: ParseContext,
}

impl Parser<'_> {
    fn error(&self, kind: ParseErrorKind, msg: impl Into<String>) -> ParseError {
        ParseError {
            kind,
            position: self.pos,
            message: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(ParseErrorKind::Syntax, format!("expected {:?}", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let first = self.term()?;
        let mut terms = vec![first];
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    terms.push(Expr::Neg(Box::new(self.term()?)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Add(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        while self.peek() == Some(b'*') {
            self.pos += 1;
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Mul(factors)
        })
    }

    fn integer(&mut self) -> Result<u64, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error(ParseErrorKind::Syntax, "expected an integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ParseError {
                kind: ParseErrorKind::Syntax,
                position: start,
                message: "integer literal too large".into(),
            })
    }

    fn word(&mut self) -> &[u8] {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let Some(c) = self.peek() else {
            return Err(self.error(ParseErrorKind::Syntax, "unexpected end of input"));
        };
        if c.is_ascii_digit() {
            let v = self.integer()?;
            return Ok(Expr::Const(self.ctx.field.reduce(v)));
        }
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if !c.is_ascii_alphabetic() {
            return Err(self.error(
                ParseErrorKind::Syntax,
                format!("unexpected {:?}", c as char),
            ));
        }
        let start = self.pos;
        let ident = self.word().to_ascii_lowercase();
        match ident.as_slice() {
            b"x" => self.variable(start),
            b"maj" => {
                self.require_binary(start, "maj")?;
                self.expect(b'(')?;
                let a = self.expr()?;
                self.expect(b',')?;
                let b = self.expr()?;
                self.expect(b',')?;
                let c = self.expr()?;
                self.expect(b')')?;
                Ok(Expr::Maj(Box::new([a, b, c])))
            }
            b"not" => {
                self.require_binary(start, "not")?;
                self.expect(b'(')?;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(Expr::Not(Box::new(e)))
            }
            _ => Err(ParseError {
                kind: ParseErrorKind::Syntax,
                position: start,
                message: format!("unknown identifier {:?}", String::from_utf8_lossy(&ident)),
            }),
        }
    }

    fn require_binary(&self, start: usize, name: &str) -> Result<(), ParseError> {
        if self.ctx.field.q() == 2 {
            Ok(())
        } else {
            Err(ParseError {
                kind: ParseErrorKind::MajUnsupported,
                position: start,
                message: format!(
                    "{name} is only defined over F_2 (q = {})",
                    self.ctx.field.q()
                ),
            })
        }
    }

    fn variable(&mut self, start: usize) -> Result<Expr, ParseError> {
        // No whitespace inside a variable name.
        if !self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            return Err(self.error(ParseErrorKind::Syntax, "expected message index after 'x'"));
        }
        let k = self.integer()? as usize;
        let sub = if self.src.get(self.pos) == Some(&b'_') {
            self.pos += 1;
            if !self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                return Err(self.error(
                    ParseErrorKind::Syntax,
                    "expected sub-packet index after '_'",
                ));
            }
            Some(self.integer()? as usize)
        } else {
            None
        };
        let ParseContext { n, k: msgs, .. } = self.ctx;
        let bad = |msg: String| ParseError {
            kind: ParseErrorKind::BadVariable,
            position: start,
            message: msg,
        };
        if k == 0 || k > msgs {
            return Err(bad(format!("message index {k} outside 1..={msgs}")));
        }
        let j = match sub {
            Some(j) if j == 0 || j > n => {
                return Err(bad(format!("sub-packet index {j} outside 1..={n}")))
            }
            Some(j) => j,
            None if n == 1 => 1,
            None => return Err(bad(format!("x{k} needs a sub-packet index (n = {n})"))),
        };
        Ok(Expr::Var((k - 1) * n + (j - 1)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(q: u32, n: usize, k: usize) -> ParseContext {
        ParseContext {
            field: PrimeField::new(q).unwrap(),
            n,
            k,
        }
    }

    #[test]
    fn parses_sum() {
        let e = parse_expr("x2 + x3", ctx(2, 1, 3)).unwrap();
        assert_eq!(e, Expr::Add(vec![Expr::Var(1), Expr::Var(2)]));
    }

    #[test]
    fn parses_majority() {
        let e = parse_expr("maj(x1,x2,x3)", ctx(2, 1, 3)).unwrap();
        assert_eq!(
            e,
            Expr::Maj(Box::new([Expr::Var(0), Expr::Var(1), Expr::Var(2)]))
        );
        let err = parse_expr("maj(x1,x2,x3)", ctx(3, 1, 3)).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MajUnsupported);
    }

    #[test]
    fn parses_products() {
        let e = parse_expr("(x1+x2)*x3 + x1*x4", ctx(2, 1, 4)).unwrap();
        assert_eq!(
            e,
            Expr::Add(vec![
                Expr::Mul(vec![
                    Expr::Add(vec![Expr::Var(0), Expr::Var(1)]),
                    Expr::Var(2)
                ]),
                Expr::Mul(vec![Expr::Var(0), Expr::Var(3)]),
            ])
        );
    }

    #[test]
    fn sub_packet_indices() {
        assert_eq!(parse_expr("x2_1", ctx(2, 2, 4)).unwrap(), Expr::Var(2));
        assert_eq!(parse_expr("x4_2", ctx(2, 2, 4)).unwrap(), Expr::Var(7));
        assert_eq!(parse_expr("x1_1", ctx(2, 1, 4)).unwrap(), Expr::Var(0));
        for bad in ["x5_1", "x1_3", "x0_1", "x1"] {
            let err = parse_expr(bad, ctx(2, 2, 4)).unwrap_err();
            assert_eq!(err.kind, ParseErrorKind::BadVariable, "{bad}");
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_expr("x1 + * x2", ctx(2, 1, 2)).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Syntax);
        assert_eq!(err.position, 5);
        assert!(parse_expr("(x1 + x2", ctx(2, 1, 2)).is_err());
        assert!(parse_expr("x1 x2", ctx(2, 1, 2)).is_err());
        assert!(parse_expr("", ctx(2, 1, 2)).is_err());
        assert!(parse_expr("y1", ctx(2, 1, 2)).is_err());
    }

    #[test]
    fn evaluation() {
        let f2 = PrimeField::new(2).unwrap();
        let maj = parse_expr("maj(x1,x2,x3)", ctx(2, 1, 3)).unwrap();
        assert_eq!(maj.eval(&f2, &[0, 1, 1]), 1);
        assert_eq!(maj.eval(&f2, &[0, 1, 0]), 0);
        let sum = parse_expr("x1+x4", ctx(2, 1, 4)).unwrap();
        assert_eq!(sum.eval(&f2, &[1, 0, 0, 1]), 0);
        let f3 = PrimeField::new(3).unwrap();
        let lin = parse_expr("x1+2*x2+x4", ctx(3, 1, 4)).unwrap();
        assert_eq!(lin.eval(&f3, &[1, 1, 0, 0]), 0);
        let diff = parse_expr("x1 - x2", ctx(3, 1, 2)).unwrap();
        assert_eq!(diff.eval(&f3, &[0, 1]), 2);
        let compl = parse_expr("not(x1)*(x2+x3)*x4", ctx(2, 1, 4)).unwrap();
        assert_eq!(compl.eval(&f2, &[0, 1, 0, 1]), 1);
        assert_eq!(compl.eval(&f2, &[1, 1, 0, 1]), 0);
    }

    #[test]
    fn constants_reduce_mod_q() {
        assert_eq!(parse_expr("5", ctx(3, 1, 1)).unwrap(), Expr::Const(2));
        assert!(parse_expr("99999999999999999999999", ctx(3, 1, 1)).is_err());
    }

    fn canonical_expr(k: usize, q: u32) -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![(0..q).prop_map(Expr::Const), (0..k).prop_map(Expr::Var),];
        leaf.prop_recursive(4, 32, 4, move |inner| {
            let term = inner.clone();
            prop_oneof![
                // Non-leading summands may be negated terms.
                (
                    inner.clone(),
                    prop::collection::vec((any::<bool>(), term), 1..3)
                )
                    .prop_map(|(first, rest)| {
                        let first = match first {
                            Expr::Neg(e) => *e,
                            e => e,
                        };
                        let mut ts = vec![first];
                        for (neg, t) in rest {
                            let t = match t {
                                Expr::Neg(e) => *e,
                                e => e,
                            };
                            ts.push(if neg { Expr::Neg(Box::new(t)) } else { t });
                        }
                        Expr::Add(ts)
                    }),
                prop::collection::vec(inner.clone(), 2..4).prop_map(|fs| {
                    Expr::Mul(
                        fs.into_iter()
                            .map(|f| match f {
                                Expr::Neg(e) => *e,
                                e => e,
                            })
                            .collect(),
                    )
                }),
                (inner.clone(), inner.clone(), inner.clone()).prop_map(|(a, b, c)| {
                    let strip = |e: Expr| match e {
                        Expr::Neg(e) => *e,
                        e => e,
                    };
                    Expr::Maj(Box::new([strip(a), strip(b), strip(c)]))
                }),
                inner.prop_map(|e| Expr::Not(Box::new(match e {
                    Expr::Neg(e) => *e,
                    e => e,
                }))),
            ]
        })
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(e in canonical_expr(5, 2)) {
            let text = e.render(1);
            let back = parse_expr(&text, ctx(2, 1, 5)).unwrap();
            prop_assert_eq!(back, e, "{}", text);
        }

        #[test]
        fn render_with_sub_packets(e in canonical_expr(6, 2)) {
            let text = e.render(2);
            let back = parse_expr(&text, ctx(2, 2, 3)).unwrap();
            prop_assert_eq!(back, e, "{}", text);
        }
    }
}
