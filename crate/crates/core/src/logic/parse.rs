//! Concrete syntax for both logics.
//!
//! ```text
//! CTL   A, E, X, F, G, F<=k, G<=k, U, U<=k, K[i], !, &, |, ->, <->
//!       Pr[i](phi), Prior[i](phi) inside polynomial comparisons
//! WMLO  p@t, X@t, t < u, K[i]@t phi, forall t . phi, exists t u . phi,
//!       P(phi), Pr[i]@t(phi) inside polynomial comparisons
//! ```
//!
//! Unary operators bind tightest, then `U`, `&`, `|`, `->`, `<->`.
//! Arithmetic comparisons are atoms. Runs of path operators may be fused,
//! as in `EF p` or `AG<=3 p`.

use num_traits::{One, Zero};

use super::ast::{CmpOp, Comparison, Ctl, ProbTerm, Wmlo, WmloTerm};
use super::polynomial::Polynomial;
use crate::error::{Error, ParseError, Result};
use crate::markov::{Agent, Rational};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Reserved(String),
    Num(Rational),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Bang,
    Amp,
    Bar,
    Arrow,
    DArrow,
    Plus,
    Minus,
    Star,
    Caret,
    Dot,
    At,
    Cmp(CmpOp),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Reserved(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Cmp(op) => format!("`{op}`"),
            other => {
                let s = match other {
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBrack => "[",
                    Tok::RBrack => "]",
                    Tok::Bang => "!",
                    Tok::Amp => "&",
                    Tok::Bar => "|",
                    Tok::Arrow => "->",
                    Tok::DArrow => "<->",
                    Tok::Plus => "+",
                    Tok::Minus => "-",
                    Tok::Star => "*",
                    Tok::Caret => "^",
                    Tok::Dot => ".",
                    Tok::At => "@",
                    _ => unreachable!(),
                };
                format!("`{s}`")
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> std::result::Result<(Vec<Spanned>, (usize, usize)), ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out: Vec<Spanned> = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    // Whether the previous token ended exactly here and can carry `@t`.
    let mut attachable = false;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let start = i;
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            attachable = false;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            attachable = false;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
            attachable = false;
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric()
                    || chars[i] == '_'
                    || (chars[i] == '.'
                        && chars
                            .get(i + 1)
                            .is_some_and(|n| n.is_ascii_alphanumeric() || *n == '_')))
            {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c == '@' && attachable {
            i += 1;
            Tok::At
        } else if c == '@' {
            i += 1;
            while i < chars.len() {
                let d = chars[i];
                let after_colon = chars[i - 1] == ':';
                if d.is_ascii_alphanumeric()
                    || d == '_'
                    || d == ':'
                    || d == '.'
                    || (after_colon && (d == '@' || d == '*'))
                {
                    i += 1;
                } else {
                    break;
                }
            }
            if i == start + 1 {
                return Err(ParseError::new(tl, tc, "expected a name after `@`"));
            }
            Tok::Reserved(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if chars.get(i) == Some(&'/')
                && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())
            {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                return Err(ParseError::new(
                    tl,
                    tc,
                    "decimal literals are not exact, write a fraction such as 1/2",
                ));
            }
            let text: String = chars[start..i].iter().collect();
            let n = crate::markov::parse_rational(&text)
                .ok_or_else(|| ParseError::new(tl, tc, format!("bad number `{text}`")))?;
            Tok::Num(n)
        } else {
            let two: String = chars[i..chars.len().min(i + 3)].iter().collect();
            let (tok, len) = if two.starts_with("<->") {
                (Tok::DArrow, 3)
            } else if two.starts_with("->") {
                (Tok::Arrow, 2)
            } else if two.starts_with("<=") {
                (Tok::Cmp(CmpOp::Le), 2)
            } else if two.starts_with(">=") {
                (Tok::Cmp(CmpOp::Ge), 2)
            } else if two.starts_with("==") {
                (Tok::Cmp(CmpOp::Eq), 2)
            } else if two.starts_with("&&") {
                (Tok::Amp, 2)
            } else if two.starts_with("||") {
                (Tok::Bar, 2)
            } else {
                let t = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBrack,
                    ']' => Tok::RBrack,
                    '!' | '~' => Tok::Bang,
                    '&' => Tok::Amp,
                    '|' => Tok::Bar,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '^' => Tok::Caret,
                    '.' => Tok::Dot,
                    '<' => Tok::Cmp(CmpOp::Lt),
                    '>' => Tok::Cmp(CmpOp::Gt),
                    '=' => Tok::Cmp(CmpOp::Eq),
                    other => {
                        return Err(ParseError::new(
                            tl,
                            tc,
                            format!("unexpected character `{other}`"),
                        ))
                    }
                };
                (t, 1)
            };
            i += len;
            tok
        };
        col += i - start;
        attachable = matches!(tok, Tok::Ident(_) | Tok::Reserved(_) | Tok::RBrack);
        out.push(Spanned {
            tok,
            line: tl,
            col: tc,
        });
    }
    Ok((out, (line, col)))
}

type PResult<T> = std::result::Result<T, ParseError>;

struct Cursor {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Cursor {
    fn new(src: &str) -> PResult<Self> {
        let (toks, end) = lex(src)?;
        Ok(Cursor { toks, pos: 0, end })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn location(&self, pos: usize) -> (usize, usize) {
        self.toks.get(pos).map_or(self.end, |s| (s.line, s.col))
    }

    fn error_at(&self, pos: usize, msg: impl Into<String>) -> ParseError {
        let (l, c) = self.location(pos);
        ParseError::new(l, c, msg)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let found = self
            .peek()
            .map_or_else(|| "end of input".to_string(), Tok::describe);
        self.error_at(self.pos, format!("expected {wanted}, found {found}"))
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok, wanted: &str) -> PResult<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn ident(&mut self, wanted: &str) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn natural(&mut self) -> PResult<u32> {
        let at = self.pos;
        match self.bump() {
            Some(Tok::Num(n)) if n.is_integer() && n >= Rational::zero() => n
                .to_integer()
                .try_into()
                .map_err(|_| self.error_at(at, "number too large")),
            _ => {
                self.pos = at;
                Err(self.unexpected("a natural number"))
            }
        }
    }

    fn agent(&mut self) -> PResult<Agent> {
        self.expect(&Tok::LBrack, "`[`")?;
        let at = self.pos;
        let agent = match self.bump() {
            Some(Tok::Ident(s)) => Agent::Named(s),
            Some(Tok::Reserved(s)) if s == "@top" || s == "@bot" => Agent::parse(&s),
            _ => {
                self.pos = at;
                return Err(self.unexpected("an agent name"));
            }
        };
        self.expect(&Tok::RBrack, "`]`")?;
        Ok(agent)
    }

    fn finish(&self) -> PResult<()> {
        if self.pos < self.toks.len() {
            Err(self.unexpected("end of input"))
        } else {
            Ok(())
        }
    }
}

fn further(a: ParseError, b: ParseError) -> ParseError {
    if (b.line, b.column) > (a.line, a.column) {
        b
    } else {
        a
    }
}

/// Shared machinery for polynomial comparisons over logic-specific terms.
trait TermSyntax {
    type Term: Ord + Clone;

    fn cursor(&mut self) -> &mut Cursor;

    /// Parses a probability term if one starts here.
    fn term(&mut self) -> PResult<Option<Self::Term>>;

    fn starts_term(&self) -> bool;
}

struct Arith<T> {
    terms: Vec<T>,
}

impl<T: Ord + Clone> Arith<T> {
    fn index(&mut self, t: T) -> usize {
        match self.terms.iter().position(|x| *x == t) {
            Some(i) => i,
            None => {
                self.terms.push(t);
                self.terms.len() - 1
            }
        }
    }
}

fn starts_arith<P: TermSyntax>(p: &mut P) -> bool {
    p.starts_term()
        || matches!(
            p.cursor().peek(),
            Some(Tok::Num(_) | Tok::Minus | Tok::LParen)
        )
}

fn comparison<P: TermSyntax>(p: &mut P) -> PResult<Comparison<P::Term>> {
    let start = p.cursor().pos;
    let mut acc = Arith { terms: Vec::new() };
    let lhs = sum(p, &mut acc)?;
    let op = match p.cursor().bump() {
        Some(Tok::Cmp(op)) => op,
        _ => {
            p.cursor().pos -= 1;
            return Err(p.cursor().unexpected("a comparison operator"));
        }
    };
    let rhs = sum(p, &mut acc)?;
    Comparison::new(acc.terms, &lhs - &rhs, op, Rational::zero())
        .map_err(|e| p.cursor().error_at(start, e.to_string()))
}

fn sum<P: TermSyntax>(p: &mut P, acc: &mut Arith<P::Term>) -> PResult<Polynomial> {
    let mut out = product(p, acc)?;
    loop {
        if p.cursor().eat(&Tok::Plus) {
            out = &out + &product(p, acc)?;
        } else if p.cursor().eat(&Tok::Minus) {
            out = &out - &product(p, acc)?;
        } else {
            return Ok(out);
        }
    }
}

fn product<P: TermSyntax>(p: &mut P, acc: &mut Arith<P::Term>) -> PResult<Polynomial> {
    let mut out = signed(p, acc)?;
    while p.cursor().eat(&Tok::Star) {
        out = &out * &signed(p, acc)?;
    }
    Ok(out)
}

fn signed<P: TermSyntax>(p: &mut P, acc: &mut Arith<P::Term>) -> PResult<Polynomial> {
    if p.cursor().eat(&Tok::Minus) {
        return Ok(-&signed(p, acc)?);
    }
    let base = arith_atom(p, acc)?;
    if p.cursor().eat(&Tok::Caret) {
        let e = p.cursor().natural()?;
        Ok(base.pow(e))
    } else {
        Ok(base)
    }
}

fn arith_atom<P: TermSyntax>(p: &mut P, acc: &mut Arith<P::Term>) -> PResult<Polynomial> {
    if let Some(Tok::Num(n)) = p.cursor().peek() {
        let n = n.clone();
        p.cursor().pos += 1;
        return Ok(Polynomial::constant(n));
    }
    if p.cursor().eat(&Tok::LParen) {
        let inner = sum(p, acc)?;
        p.cursor().expect(&Tok::RParen, "`)`")?;
        return Ok(inner);
    }
    match p.term()? {
        Some(t) => Ok(Polynomial::var(acc.index(t))),
        None => Err(p.cursor().unexpected("a number or probability term")),
    }
}

/// Parses a formula of the branching-time logic.
pub fn parse_ctl(text: &str) -> Result<Ctl> {
    let mut p = CtlParser {
        cur: Cursor::new(text)?,
    };
    let phi = p.formula()?;
    p.cur.finish()?;
    Ok(phi)
}

struct CtlParser {
    cur: Cursor,
}

const PATH_LETTERS: &str = "AEXFG";

impl TermSyntax for CtlParser {
    type Term = ProbTerm;

    fn cursor(&mut self) -> &mut Cursor {
        &mut self.cur
    }

    fn starts_term(&self) -> bool {
        matches!(self.cur.peek(), Some(Tok::Ident(s)) if s == "Pr" || s == "Prior")
            && self.cur.peek_at(1) == Some(&Tok::LBrack)
    }

    fn term(&mut self) -> PResult<Option<ProbTerm>> {
        if !self.starts_term() {
            return Ok(None);
        }
        let prior = self.cur.is_keyword("Prior");
        self.cur.pos += 1;
        let agent = self.cur.agent()?;
        self.cur.expect(&Tok::LParen, "`(`")?;
        let body = Box::new(self.formula()?);
        self.cur.expect(&Tok::RParen, "`)`")?;
        Ok(Some(if prior {
            ProbTerm::Prior(agent, body)
        } else {
            ProbTerm::Current(agent, body)
        }))
    }
}

impl CtlParser {
    fn formula(&mut self) -> PResult<Ctl> {
        let lhs = self.implication()?;
        if self.cur.eat(&Tok::DArrow) {
            let rhs = self.formula()?;
            return Ok(lhs.clone().implies(rhs.clone()).and(rhs.implies(lhs)));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> PResult<Ctl> {
        let lhs = self.disjunction()?;
        if self.cur.eat(&Tok::Arrow) {
            return Ok(lhs.implies(self.implication()?));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Ctl> {
        let mut out = self.conjunction()?;
        while self.cur.eat(&Tok::Bar) || self.cur.eat_keyword("or") {
            out = out.or(self.conjunction()?);
        }
        Ok(out)
    }

    fn conjunction(&mut self) -> PResult<Ctl> {
        let mut out = self.until()?;
        while self.cur.eat(&Tok::Amp) || self.cur.eat_keyword("and") {
            out = out.and(self.until()?);
        }
        Ok(out)
    }

    fn bound(&mut self) -> PResult<Option<u32>> {
        if self.cur.eat(&Tok::Cmp(CmpOp::Le)) {
            Ok(Some(self.cur.natural()?))
        } else {
            Ok(None)
        }
    }

    fn until(&mut self) -> PResult<Ctl> {
        let lhs = self.unary()?;
        if self.cur.eat_keyword("U") {
            let k = self.bound()?;
            let rhs = self.until()?;
            return Ok(match k {
                Some(k) => lhs.until_within(rhs, k),
                None => lhs.until(rhs),
            });
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Ctl> {
        if self.cur.eat(&Tok::Bang) || self.cur.eat_keyword("not") {
            return Ok(self.unary()?.not());
        }
        if self.cur.is_keyword("K") && self.cur.peek_at(1) == Some(&Tok::LBrack) {
            self.cur.pos += 1;
            let agent = self.cur.agent()?;
            return Ok(Ctl::know(agent, self.unary()?));
        }
        if let Some(Tok::Ident(s)) = self.cur.peek() {
            if !s.is_empty() && s.chars().all(|c| PATH_LETTERS.contains(c)) {
                let ops: Vec<char> = s.chars().collect();
                self.cur.pos += 1;
                let last_bound = match ops.last() {
                    Some('F' | 'G') => self.bound()?,
                    _ => None,
                };
                let mut body = self.unary()?;
                for (n, op) in ops.iter().rev().enumerate() {
                    let k = if n == 0 { last_bound } else { None };
                    body = match (op, k) {
                        ('A', _) => body.all(),
                        ('E', _) => body.exists(),
                        ('X', _) => body.next(),
                        ('F', None) => body.eventually(),
                        ('F', Some(k)) => body.eventually_within(k),
                        ('G', None) => body.globally(),
                        ('G', Some(k)) => body.globally_within(k),
                        _ => unreachable!(),
                    };
                }
                return Ok(body);
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Ctl> {
        let start = self.cur.pos;
        let mut cmp_err = None;
        if starts_arith(self) {
            match comparison(self) {
                Ok(c) => return Ok(Ctl::Compare(c)),
                Err(e) => {
                    if self.cur.toks[start].tok != Tok::LParen {
                        return Err(e);
                    }
                    self.cur.pos = start;
                    cmp_err = Some(e);
                }
            }
        }
        let result = self.simple_primary();
        match (result, cmp_err) {
            (Ok(phi), _) => Ok(phi),
            (Err(e), Some(c)) => Err(further(c, e)),
            (Err(e), None) => Err(e),
        }
    }

    fn simple_primary(&mut self) -> PResult<Ctl> {
        let at = self.cur.pos;
        match self.cur.bump() {
            Some(Tok::LParen) => {
                let phi = self.formula()?;
                self.cur.expect(&Tok::RParen, "`)`")?;
                Ok(phi)
            }
            Some(Tok::Ident(s)) if s == "true" => Ok(Ctl::True),
            Some(Tok::Ident(s)) if s == "false" => Ok(Ctl::True.not()),
            Some(Tok::Ident(s)) if !is_ctl_keyword(&s) => Ok(Ctl::Prop(s)),
            Some(Tok::Reserved(s)) => Ok(Ctl::Prop(s)),
            _ => {
                self.cur.pos = at;
                Err(self.cur.unexpected("a formula"))
            }
        }
    }
}

fn is_ctl_keyword(s: &str) -> bool {
    matches!(
        s,
        "U" | "K" | "not" | "and" | "or" | "true" | "false" | "Pr" | "Prior"
    ) || s.chars().all(|c| PATH_LETTERS.contains(c))
}

/// Parses a sentence of the first-order fragment.
pub fn parse_wmlo(text: &str) -> Result<Wmlo> {
    parse_wmlo_open(text, &[])
}

/// Parses a formula whose free time variables are exactly among `free`.
pub fn parse_wmlo_open(text: &str, free: &[&str]) -> Result<Wmlo> {
    let mut p = WmloParser {
        cur: Cursor::new(text)?,
        times: free.iter().map(|s| s.to_string()).collect(),
        sets: Vec::new(),
    };
    let phi = p.formula()?;
    p.cur.finish()?;
    Ok(phi)
}

struct WmloParser {
    cur: Cursor,
    times: Vec<String>,
    sets: Vec<String>,
}

impl TermSyntax for WmloParser {
    type Term = WmloTerm;

    fn cursor(&mut self) -> &mut Cursor {
        &mut self.cur
    }

    fn starts_term(&self) -> bool {
        match self.cur.peek() {
            Some(Tok::Ident(s)) if s == "P" => self.cur.peek_at(1) == Some(&Tok::LParen),
            Some(Tok::Ident(s)) if s == "Pr" => self.cur.peek_at(1) == Some(&Tok::LBrack),
            _ => false,
        }
    }

    fn term(&mut self) -> PResult<Option<WmloTerm>> {
        if !self.starts_term() {
            return Ok(None);
        }
        let global = self.cur.is_keyword("P");
        self.cur.pos += 1;
        if global {
            self.cur.expect(&Tok::LParen, "`(`")?;
            let body = self.formula()?;
            self.cur.expect(&Tok::RParen, "`)`")?;
            return Ok(Some(Wmlo::global(body)));
        }
        let agent = self.cur.agent()?;
        let t = self.time_at()?;
        self.cur.expect(&Tok::LParen, "`(`")?;
        let body = self.formula()?;
        self.cur.expect(&Tok::RParen, "`)`")?;
        Ok(Some(Wmlo::agent_at(agent, &t, body)))
    }
}

impl WmloParser {
    fn time_var(&mut self) -> PResult<String> {
        let at = self.cur.pos;
        let v = self.cur.ident("a time variable")?;
        if !self.times.contains(&v) {
            return Err(self.cur.error_at(at, format!("unbound variable `{v}`")));
        }
        Ok(v)
    }

    fn time_at(&mut self) -> PResult<String> {
        self.cur.expect(&Tok::At, "`@`")?;
        self.time_var()
    }

    fn formula(&mut self) -> PResult<Wmlo> {
        let lhs = self.implication()?;
        if self.cur.eat(&Tok::DArrow) {
            let rhs = self.formula()?;
            return Ok(lhs.clone().implies(rhs.clone()).and(rhs.implies(lhs)));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> PResult<Wmlo> {
        let lhs = self.disjunction()?;
        if self.cur.eat(&Tok::Arrow) {
            return Ok(lhs.implies(self.implication()?));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Wmlo> {
        let mut out = self.conjunction()?;
        while self.cur.eat(&Tok::Bar) || self.cur.eat_keyword("or") {
            out = out.or(self.conjunction()?);
        }
        Ok(out)
    }

    fn conjunction(&mut self) -> PResult<Wmlo> {
        let mut out = self.unary()?;
        while self.cur.eat(&Tok::Amp) || self.cur.eat_keyword("and") {
            out = out.and(self.unary()?);
        }
        Ok(out)
    }

    fn unary(&mut self) -> PResult<Wmlo> {
        if self.cur.eat(&Tok::Bang) || self.cur.eat_keyword("not") {
            return Ok(self.unary()?.not());
        }
        if self.cur.is_keyword("K") && self.cur.peek_at(1) == Some(&Tok::LBrack) {
            self.cur.pos += 1;
            let agent = self.cur.agent()?;
            let t = self.time_at()?;
            return Ok(Wmlo::know_at(agent, &t, self.unary()?));
        }
        let universal = self.cur.is_keyword("forall");
        if universal || self.cur.is_keyword("exists") {
            self.cur.pos += 1;
            let mut vars = vec![self.cur.ident("a variable")?];
            while !self.cur.eat(&Tok::Dot) {
                vars.push(self.cur.ident("a variable or `.`")?);
            }
            let (tn, sn) = (self.times.len(), self.sets.len());
            for v in &vars {
                if is_set_var(v) {
                    self.sets.push(v.clone());
                } else {
                    self.times.push(v.clone());
                }
            }
            let body = self.formula();
            self.times.truncate(tn);
            self.sets.truncate(sn);
            let mut body = body?;
            for v in vars.iter().rev() {
                body = match (is_set_var(v), universal) {
                    (true, true) => Wmlo::ForallSet(v.clone(), Box::new(body)),
                    (true, false) => Wmlo::ForallSet(v.clone(), Box::new(body.not())).not(),
                    (false, true) => Wmlo::forall(v, body),
                    (false, false) => Wmlo::exists(v, body),
                };
            }
            return Ok(body);
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Wmlo> {
        let start = self.cur.pos;
        let mut cmp_err = None;
        if starts_arith(self) {
            match comparison(self) {
                Ok(c) => return Ok(Wmlo::Compare(c)),
                Err(e) => {
                    if self.cur.toks[start].tok != Tok::LParen {
                        return Err(e);
                    }
                    self.cur.pos = start;
                    cmp_err = Some(e);
                }
            }
        }
        match (self.simple_primary(), cmp_err) {
            (Ok(phi), _) => Ok(phi),
            (Err(e), Some(c)) => Err(further(c, e)),
            (Err(e), None) => Err(e),
        }
    }

    fn simple_primary(&mut self) -> PResult<Wmlo> {
        let at = self.cur.pos;
        match self.cur.bump() {
            Some(Tok::LParen) => {
                let phi = self.formula()?;
                self.cur.expect(&Tok::RParen, "`)`")?;
                Ok(phi)
            }
            Some(Tok::Ident(s)) if s == "true" => Ok(Wmlo::True),
            Some(Tok::Ident(s)) if s == "false" => Ok(Wmlo::True.not()),
            Some(Tok::Ident(s)) if self.times.contains(&s) && self.cur.peek() != Some(&Tok::At) => {
                let op = match self.cur.bump() {
                    Some(Tok::Cmp(op)) => op,
                    _ => {
                        self.cur.pos -= 1;
                        return Err(self.cur.unexpected("a time comparison"));
                    }
                };
                let u = self.time_var()?;
                Ok(time_comparison(&s, op, &u))
            }
            Some(Tok::Ident(s)) | Some(Tok::Reserved(s)) => {
                if self.cur.peek() != Some(&Tok::At) {
                    self.cur.pos = at;
                    return Err(self.cur.error_at(
                        at,
                        format!("`{s}` needs a time, as in `{s}@t`"),
                    ));
                }
                let t = self.time_at()?;
                if self.sets.contains(&s) {
                    Ok(Wmlo::SetAt(s, t))
                } else {
                    Ok(Wmlo::PropAt(s, t))
                }
            }
            _ => {
                self.cur.pos = at;
                Err(self.cur.unexpected("a formula"))
            }
        }
    }
}

fn is_set_var(v: &str) -> bool {
    v.starts_with(|c: char| c.is_ascii_uppercase())
}

fn time_comparison(t: &str, op: CmpOp, u: &str) -> Wmlo {
    match op {
        CmpOp::Lt => Wmlo::less(t, u),
        CmpOp::Gt => Wmlo::less(u, t),
        CmpOp::Le => Wmlo::less(u, t).not(),
        CmpOp::Ge => Wmlo::less(t, u).not(),
        CmpOp::Eq => Wmlo::less(t, u).not().and(Wmlo::less(u, t).not()),
    }
}

/// `Pr(φ | ψ)` as a pair of global-probability bodies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conditional {
    pub event: Wmlo,
    pub given: Wmlo,
}

/// Parses `c1*P(φ1 | ψ1) + … ⋈ c` where each conditional term may carry a
/// rational coefficient. A term without `|` is conditioned on `true`. The
/// event binds like a conjunction, so a disjunctive event needs brackets.
pub fn parse_conditional_sum(
    text: &str,
    free: &[&str],
) -> Result<(Vec<(Rational, Conditional)>, CmpOp, Rational)> {
    let mut p = WmloParser {
        cur: Cursor::new(text)?,
        times: free.iter().map(|s| s.to_string()).collect(),
        sets: Vec::new(),
    };
    let mut terms = Vec::new();
    loop {
        let negative = p.cur.eat(&Tok::Minus);
        let mut coeff = Rational::one();
        if let Some(Tok::Num(n)) = p.cur.peek() {
            coeff = n.clone();
            p.cur.pos += 1;
            p.cur.expect(&Tok::Star, "`*`")?;
        }
        if negative {
            coeff = -coeff;
        }
        if !p.cur.eat_keyword("P") {
            return Err(p.cur.unexpected("`P(`").into());
        }
        p.cur.expect(&Tok::LParen, "`(`")?;
        let event = p.conjunction()?;
        let given = if p.cur.eat(&Tok::Bar) {
            p.formula()?
        } else {
            Wmlo::True
        };
        p.cur.expect(&Tok::RParen, "`)`")?;
        terms.push((coeff, Conditional { event, given }));
        if p.cur.eat(&Tok::Plus) {
            continue;
        }
        if p.cur.peek() == Some(&Tok::Minus) {
            continue;
        }
        break;
    }
    let op = match p.cur.bump() {
        Some(Tok::Cmp(op)) => op,
        _ => {
            p.cur.pos = p.cur.pos.saturating_sub(1);
            return Err(p.cur.unexpected("a comparison operator").into());
        }
    };
    let at = p.cur.pos;
    let negative = p.cur.eat(&Tok::Minus);
    let bound = match p.cur.bump() {
        Some(Tok::Num(n)) => {
            if negative {
                -n
            } else {
                n
            }
        }
        _ => {
            p.cur.pos = at;
            return Err(p.cur.unexpected("a rational constant").into());
        }
    };
    p.cur.finish()?;
    if terms.is_empty() {
        return Err(Error::Unsupported("no conditional terms".into()));
    }
    Ok((terms, op, bound))
}
