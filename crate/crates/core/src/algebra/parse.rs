//! Line-oriented algebra files:
//!
//! ```text
//! # Engel algebra
//! name engel
//! layers 2 1 1
//! [1,2] = 3
//! [1,3] = 1/2*4
//! ```
//!
//! Statements are separated by newlines or `;`. Coefficients are integers,
//! decimals or `p/q` rationals and are kept exact.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{AlgebraSpec, Rational};
use crate::error::{CarnotError, Result};

pub fn parse_algebra_spec(text: &str) -> Result<AlgebraSpec> {
    let mut name: Option<String> = None;
    let mut layers: Option<Vec<usize>> = None;
    let mut raw: Vec<(usize, usize, usize, Vec<(Rational, usize)>)> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let content = line.split('#').next().unwrap_or("");
        for stmt in content.split(';') {
            let stmt = stmt.trim();
            if stmt.is_empty() {
                continue;
            }
            if let Some(rest) = stmt.strip_prefix("layers") {
                if layers.is_some() {
                    return Err(syntax(line_no, "`layers` declared twice"));
                }
                let dims = rest
                    .split_whitespace()
                    .map(|t| t.parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| syntax(line_no, "layer dimensions must be positive integers"))?;
                if dims.is_empty() || dims.contains(&0) {
                    return Err(syntax(line_no, "layer dimensions must be positive integers"));
                }
                layers = Some(dims);
            } else if let Some(rest) = stmt.strip_prefix("name") {
                name = Some(rest.trim().to_string());
            } else if stmt.starts_with('[') {
                let (i, j, terms) = parse_bracket(stmt, line_no)?;
                raw.push((line_no, i, j, terms));
            } else {
                return Err(syntax(line_no, &format!("unrecognised statement `{stmt}`")));
            }
        }
    }

    let layers = layers.ok_or_else(|| syntax(1, "missing `layers` declaration"))?;
    let dim: usize = layers.iter().sum();
    let mut spec = AlgebraSpec::new(name.unwrap_or_else(|| "custom".into()), layers, Vec::new())?;
    let mut seen = BTreeMap::new();
    let mut brackets = Vec::new();
    for (line, i, j, terms) in raw {
        for idx in [i, j].into_iter().chain(terms.iter().map(|t| t.1)) {
            if idx == 0 || idx > dim {
                return Err(CarnotError::UndeclaredIndex {
                    line,
                    index: idx,
                    dim,
                });
            }
        }
        if seen.insert((i, j), line).is_some() {
            return Err(CarnotError::DuplicateBracket { line, i, j });
        }
        let mut v = vec![Rational::zero(); dim];
        for (c, k) in terms {
            v[k - 1] += c;
        }
        let target = spec.layer_of(i - 1) + spec.layer_of(j - 1);
        let bad = v
            .iter()
            .enumerate()
            .any(|(k, c)| !c.is_zero() && spec.layer_of(k) != target);
        if bad {
            return Err(CarnotError::GradingViolation {
                line,
                i,
                j,
                expected: target,
            });
        }
        brackets.push(((i - 1, j - 1), v));
    }
    let name = spec.name().to_string();
    spec = AlgebraSpec::new(name, spec.layer_dims().to_vec(), brackets)?;
    Ok(spec)
}

fn syntax(line: usize, message: &str) -> CarnotError {
    CarnotError::Syntax {
        line,
        message: message.to_string(),
    }
}

fn parse_bracket(stmt: &str, line: usize) -> Result<(usize, usize, Vec<(Rational, usize)>)> {
    let close = stmt
        .find(']')
        .ok_or_else(|| syntax(line, "missing `]`"))?;
    let pair = &stmt[1..close];
    let mut parts = pair.split(',');
    let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(syntax(line, "bracket must be `[i,j]`"));
    };
    let i: usize = a
        .trim()
        .parse()
        .map_err(|_| syntax(line, "bracket indices must be integers"))?;
    let j: usize = b
        .trim()
        .parse()
        .map_err(|_| syntax(line, "bracket indices must be integers"))?;
    if i >= j {
        return Err(syntax(line, "bracket indices must satisfy i < j"));
    }
    let rest = stmt[close + 1..].trim();
    let rhs = rest
        .strip_prefix('=')
        .ok_or_else(|| syntax(line, "expected `=` after bracket"))?;
    let terms = parse_terms(rhs, line)?;
    Ok((i, j, terms))
}

/// `c1*k1 + c2*k2 - k3`, where a bare `k` means coefficient one.
fn parse_terms(rhs: &str, line: usize) -> Result<Vec<(Rational, usize)>> {
    let compact: String = rhs.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(syntax(line, "empty right-hand side"));
    }
    let mut terms = Vec::new();
    let mut start = 0;
    let bytes = compact.as_bytes();
    for pos in 1..=bytes.len() {
        if pos == bytes.len() || ((bytes[pos] == b'+' || bytes[pos] == b'-') && bytes[pos - 1] != b'*')
        {
            terms.push(parse_term(&compact[start..pos], line)?);
            start = pos;
        }
    }
    Ok(terms)
}

fn parse_term(term: &str, line: usize) -> Result<(Rational, usize)> {
    let (sign, body) = match term.as_bytes().first() {
        Some(b'+') => (Rational::one(), &term[1..]),
        Some(b'-') => (-Rational::one(), &term[1..]),
        _ => (Rational::one(), term),
    };
    let (coef, idx) = match body.split_once('*') {
        Some((c, k)) => (parse_rational(c).ok_or_else(|| syntax(line, &format!("bad coefficient `{c}`")))?, k),
        None => (Rational::one(), body),
    };
    let idx: usize = idx
        .parse()
        .map_err(|_| syntax(line, &format!("bad basis index `{idx}`")))?;
    Ok((sign * coef, idx))
}

/// Integers, decimals and `p/q`, all exact.
pub(crate) fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return None;
        }
        return Some(p / q);
    }
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let numer: BigInt = format!("{whole}{frac}").parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let r = Rational::new(numer, denom);
    Some(if neg { -r } else { r })
}
