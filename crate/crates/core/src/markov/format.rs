//! Line-oriented text format for models.
//!
//! ```text
//! # comment
//! states: s0 s1 s2
//! init: s0 1/2, s1 1/2
//! trans: s0 -> s0 1/2, s0 -> s1 1/2, s1 -> s1 1
//! agent i obs: s0 a, s1 a, s2 b
//! label: s0 {p, q}, s1 {p}
//! ```
//!
//! Missing transitions and init entries are zero, labels default to empty.
//! `trans:` and `label:` may repeat.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Model, Rational, RationalMatrix};
use crate::error::{Error, ParseError, Result};

/// Parses `a/b`, `-a/b` or an integer. Decimals are rejected.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let unsigned = num.strip_prefix('-').unwrap_or(num);
    if !digits(unsigned) {
        return None;
    }
    let n: BigInt = num.parse().ok()?;
    match den {
        None => Some(Rational::from_integer(n)),
        Some(d) if digits(d) => {
            let d: BigInt = d.parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        Some(_) => None,
    }
}

pub(crate) fn is_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Tok<'a> {
    pub text: &'a str,
    pub col: usize,
}

/// Splits a line body into words and the punctuation `, { } ->`.
pub(crate) fn tokenize_line(line: &str, offset: usize) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if matches!(c, b',' | b'{' | b'}') {
            out.push(Tok {
                text: &line[i..i + 1],
                col: offset + i + 1,
            });
            i += 1;
        } else if c == b'-' && bytes.get(i + 1) == Some(&b'>') {
            out.push(Tok {
                text: &line[i..i + 2],
                col: offset + i + 1,
            });
            i += 2;
        } else {
            let start = i;
            while i < bytes.len() {
                let c = bytes[i];
                if c.is_ascii_whitespace()
                    || matches!(c, b',' | b'{' | b'}')
                    || (c == b'-' && bytes.get(i + 1) == Some(&b'>'))
                {
                    break;
                }
                i += 1;
            }
            out.push(Tok {
                text: &line[start..i],
                col: offset + start + 1,
            });
        }
    }
    out
}

/// Comma-separated entries of a line body.
pub(crate) fn split_entries<'a>(toks: &'a [Tok<'a>]) -> Vec<&'a [Tok<'a>]> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        match t.text {
            "{" => depth += 1,
            "}" => depth = depth.saturating_sub(1),
            "," if depth == 0 => {
                out.push(&toks[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if start < toks.len() || !out.is_empty() {
        out.push(&toks[start..]);
    }
    out
}

pub(crate) struct LineCtx {
    pub line: usize,
    pub end_col: usize,
}

impl LineCtx {
    pub fn err(&self, col: usize, msg: impl Into<String>) -> Error {
        Error::Parse(ParseError::new(self.line, col, msg))
    }

    pub fn at(&self, tok: Option<&Tok<'_>>, msg: impl Into<String>) -> Error {
        self.err(tok.map_or(self.end_col, |t| t.col), msg)
    }

    pub fn rational(&self, tok: Option<&Tok<'_>>) -> Result<Rational> {
        let tok = tok.ok_or_else(|| self.at(None, "expected a rational literal"))?;
        parse_rational(tok.text)
            .ok_or_else(|| self.at(Some(tok), format!("non-rational literal `{}`", tok.text)))
    }

    pub fn name<'a>(&self, tok: Option<&Tok<'a>>, what: &str) -> Result<&'a str> {
        match tok {
            Some(t) if is_name(t.text) => Ok(t.text),
            Some(t) => Err(self.at(Some(t), format!("expected {what}, found `{}`", t.text))),
            None => Err(self.at(None, format!("expected {what}"))),
        }
    }

    pub fn expect(&self, tok: Option<&Tok<'_>>, text: &str) -> Result<()> {
        match tok {
            Some(t) if t.text == text => Ok(()),
            Some(t) => Err(self.at(Some(t), format!("expected `{text}`, found `{}`", t.text))),
            None => Err(self.at(None, format!("expected `{text}`"))),
        }
    }

    pub fn done(&self, tok: Option<&Tok<'_>>) -> Result<()> {
        match tok {
            None => Ok(()),
            Some(t) => Err(self.at(Some(t), format!("unexpected `{}`", t.text))),
        }
    }
}

/// Iterates over `(line number, header words, body tokens)` for every
/// nonblank line, with `#` comments removed.
pub(crate) fn header_lines(
    text: &str,
) -> impl Iterator<Item = Result<(LineCtx, Vec<Tok<'_>>, Vec<Tok<'_>>)>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            return None;
        }
        let ctx = LineCtx {
            line: i + 1,
            end_col: line.trim_end().len() + 1,
        };
        let Some(colon) = line.find(':') else {
            let col = line.len() - line.trim_start().len() + 1;
            return Some(Err(ctx.err(col, "expected `key: value`")));
        };
        let head = tokenize_line(&line[..colon], 0);
        let body = tokenize_line(&line[colon + 1..], colon + 1);
        Some(Ok((ctx, head, body)))
    })
}

pub fn parse_model(text: &str) -> Result<Model> {
    let mut states: Option<Vec<String>> = None;
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut init: Vec<Option<Rational>> = Vec::new();
    let mut trans: HashMap<(usize, usize), Rational> = HashMap::new();
    let mut agents: Vec<(String, Vec<String>)> = Vec::new();
    let mut labels: Vec<BTreeSet<String>> = Vec::new();

    for item in header_lines(text) {
        let (ctx, head, body) = item?;
        let key: Vec<&str> = head.iter().map(|t| t.text).collect();
        if key.as_slice() == ["states"] {
            if states.is_some() {
                return Err(ctx.at(head.first(), "duplicate `states:` line"));
            }
            let mut names = Vec::new();
            for tok in &body {
                let name = ctx.name(Some(tok), "a state name")?;
                if index.insert(name.to_string(), names.len()).is_some() {
                    return Err(ctx.at(Some(tok), format!("duplicate state `{name}`")));
                }
                names.push(name.to_string());
            }
            if names.is_empty() {
                return Err(ctx.at(None, "no states declared"));
            }
            init = vec![None; names.len()];
            labels = vec![BTreeSet::new(); names.len()];
            states = Some(names);
            continue;
        }
        if states.is_none() {
            return Err(ctx.at(head.first(), "`states:` must come first"));
        }
        let state = |tok: Option<&Tok<'_>>| -> Result<usize> {
            let name = ctx.name(tok, "a state name")?;
            index
                .get(name)
                .copied()
                .ok_or_else(|| ctx.at(tok, format!("undeclared state `{name}`")))
        };
        match key.as_slice() {
            ["init"] => {
                for entry in split_entries(&body) {
                    let mut it = entry.iter();
                    let first = it.next();
                    let s = state(first)?;
                    let p = ctx.rational(it.next())?;
                    ctx.done(it.next())?;
                    if init[s].replace(p).is_some() {
                        return Err(ctx.at(first, "duplicate init entry"));
                    }
                }
            }
            ["trans"] => {
                for entry in split_entries(&body) {
                    let mut it = entry.iter();
                    let first = it.next();
                    let from = state(first)?;
                    ctx.expect(it.next(), "->")?;
                    let to = state(it.next())?;
                    let p = ctx.rational(it.next())?;
                    ctx.done(it.next())?;
                    if trans.insert((from, to), p).is_some() {
                        return Err(ctx.at(first, "duplicate transition"));
                    }
                }
            }
            ["agent", name, "obs"] => {
                if !is_name(name) {
                    return Err(ctx.at(head.get(1), format!("invalid agent name `{name}`")));
                }
                if agents.iter().any(|(a, _)| a == name) {
                    return Err(ctx.at(head.get(1), format!("duplicate agent `{name}`")));
                }
                let n = index.len();
                let mut obs: Vec<Option<String>> = vec![None; n];
                for entry in split_entries(&body) {
                    let mut it = entry.iter();
                    let first = it.next();
                    let s = state(first)?;
                    let o = ctx.name(it.next(), "an observation symbol")?;
                    ctx.done(it.next())?;
                    if obs[s].replace(o.to_string()).is_some() {
                        return Err(ctx.at(first, "duplicate observation entry"));
                    }
                }
                let names = states.as_ref().expect("checked above");
                let obs = obs
                    .into_iter()
                    .enumerate()
                    .map(|(i, o)| {
                        o.ok_or_else(|| {
                            ctx.at(
                                None,
                                format!("agent `{name}` has no observation for state `{}`", names[i]),
                            )
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                agents.push((name.to_string(), obs));
            }
            ["label"] => {
                for entry in split_entries(&body) {
                    let mut it = entry.iter();
                    let s = state(it.next())?;
                    ctx.expect(it.next(), "{")?;
                    loop {
                        let tok = it.next();
                        match tok.map(|t| t.text) {
                            Some("}") => break,
                            Some(",") => continue,
                            _ => {
                                let p = ctx.name(tok, "a proposition")?;
                                if p.contains('.') || p.starts_with(|c: char| c.is_ascii_digit()) {
                                    return Err(ctx.at(tok, format!("invalid proposition `{p}`")));
                                }
                                labels[s].insert(p.to_string());
                            }
                        }
                    }
                    ctx.done(it.next())?;
                }
            }
            _ => {
                return Err(ctx.at(head.first(), format!("unknown key `{}`", key.join(" "))));
            }
        }
    }

    let states = states.ok_or_else(|| Error::Parse(ParseError::new(1, 1, "missing `states:` line")))?;
    let n = states.len();
    let mut matrix = RationalMatrix::zeros(n, n);
    for ((i, j), p) in trans {
        matrix[(i, j)] = p;
    }
    let init = init
        .into_iter()
        .map(|p| p.unwrap_or_else(Rational::zero))
        .collect();
    Model::new(states, init, matrix, agents, labels)
}

/// Canonical text for a model: one `trans:` line per source state, nonzero
/// entries only.
pub fn write_model(model: &Model) -> String {
    let mut out = String::new();
    let names = model.state_names();
    let _ = writeln!(out, "states: {}", names.join(" "));
    let init: Vec<String> = names
        .iter()
        .zip(model.init().weights())
        .filter(|(_, p)| !p.is_zero())
        .map(|(s, p)| format!("{s} {p}"))
        .collect();
    let _ = writeln!(out, "init: {}", init.join(", "));
    for (i, from) in names.iter().enumerate() {
        let row: Vec<String> = model
            .trans()
            .row(i)
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(j, p)| format!("{from} -> {} {p}", names[j]))
            .collect();
        if !row.is_empty() {
            let _ = writeln!(out, "trans: {}", row.join(", "));
        }
    }
    for agent in model.agent_names() {
        let a = super::Agent::named(agent);
        let obs: Vec<String> = (0..names.len())
            .map(|s| {
                format!(
                    "{} {}",
                    names[s],
                    model.observation_name(&a, s).expect("agent exists")
                )
            })
            .collect();
        let _ = writeln!(out, "agent {agent} obs: {}", obs.join(", "));
    }
    let labels: Vec<String> = (0..names.len())
        .filter(|&s| !model.labels(s).is_empty())
        .map(|s| {
            let props: Vec<&str> = model.labels(s).iter().map(String::as_str).collect();
            format!("{} {{{}}}", names[s], props.join(", "))
        })
        .collect();
    if !labels.is_empty() {
        let _ = writeln!(out, "label: {}", labels.join(", "));
    }
    out
}
