//! Plain-text forms used by the CLI config: `sl3`, `[a12]`, `(1 3)`.
//! Round-trips are exact.

use super::{AlgebraSpec, FlagType, RootFunctional, WeylElement};
use crate::error::Error;
use std::fmt;
use std::str::FromStr;

impl fmt::Display for AlgebraSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors().iter().map(|n| format!("sl{n}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl FromStr for AlgebraSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let factors = s
            .split('x')
            .map(|part| {
                part.strip_prefix("sl")
                    .and_then(|n| n.parse::<usize>().ok())
                    .ok_or_else(|| Error::Parse(format!("bad algebra factor `{part}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        AlgebraSpec::new(factors)
    }
}

impl fmt::Display for RootFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (sign, i, j) =
            if self.i < self.j { ("", self.i, self.j) } else { ("-", self.j, self.i) };
        let prefix = if self.factor > 0 { format!("f{}:", self.factor + 1) } else { String::new() };
        // 1-based indices; compact for single digits, underscore otherwise.
        let (i1, j1) = (i + 1, j + 1);
        if i1 <= 9 && j1 <= 9 {
            write!(f, "{sign}{prefix}a{i1}{j1}")
        } else {
            write!(f, "{sign}{prefix}a{i1}_{j1}")
        }
    }
}

impl FromStr for RootFunctional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let err = || Error::Parse(format!("bad root `{s}`"));
        let (neg, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s),
        };
        let (factor, rest) = match rest.split_once(':') {
            Some((fpart, tail)) => {
                let f = fpart
                    .strip_prefix('f')
                    .and_then(|x| x.parse::<usize>().ok())
                    .filter(|&f| f >= 1)
                    .ok_or_else(err)?;
                (f - 1, tail)
            }
            None => (0, rest),
        };
        let digits = rest.strip_prefix('a').ok_or_else(err)?;
        let (i1, j1) = if let Some((a, b)) = digits.split_once('_') {
            (a.parse::<usize>().map_err(|_| err())?, b.parse::<usize>().map_err(|_| err())?)
        } else {
            if digits.len() != 2 {
                return Err(err());
            }
            let bytes = digits.as_bytes();
            ((bytes[0] - b'0') as usize, (bytes[1] - b'0') as usize)
        };
        if i1 == 0 || j1 == 0 || i1 >= j1 {
            return Err(err());
        }
        let (i, j) = (i1 - 1, j1 - 1);
        Ok(if neg {
            RootFunctional { factor, i: j, j: i }
        } else {
            RootFunctional { factor, i, j }
        })
    }
}

impl fmt::Display for FlagType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|r| r.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl FromStr for FlagType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let inner = s
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("bad flag type `{s}`, expected `[...]`")))?;
        let inner = inner.trim();
        if inner.is_empty() {
            return Ok(FlagType::empty());
        }
        let roots = inner
            .split(',')
            .map(|p| p.trim().parse::<RootFunctional>())
            .collect::<Result<Vec<_>, _>>()?;
        FlagType::new(roots)
    }
}

/// Canonical cycle notation for one factor permutation: fixed points omitted,
/// each cycle starts at its minimum, cycles sorted by minimum; `id` if empty.
fn cycles_of(perm: &[usize]) -> String {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if seen[start] || perm[start] == start {
            seen[start] = true;
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut cur = perm[start];
        while cur != start {
            seen[cur] = true;
            cycle.push(cur);
            cur = perm[cur];
        }
        cycles.push(cycle);
    }
    if cycles.is_empty() {
        return "id".to_string();
    }
    cycles
        .iter()
        .map(|c| {
            let inner: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
            format!("({})", inner.join(" "))
        })
        .collect::<Vec<_>>()
        .join("")
}

impl fmt::Display for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.perms().iter().map(|p| cycles_of(p)).collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// Parses a Weyl element against a spec (the text form does not carry factor
/// sizes).
pub fn parse_weyl(spec: &AlgebraSpec, s: &str) -> Result<WeylElement, Error> {
    let parts: Vec<&str> = s.split(';').collect();
    if parts.len() != spec.num_factors() {
        return Err(Error::Parse(format!(
            "expected {} factor permutations in `{s}`",
            spec.num_factors()
        )));
    }
    let mut perms = Vec::with_capacity(parts.len());
    for (part, &n) in parts.iter().zip(spec.factors()) {
        let part = part.trim();
        let mut perm: Vec<usize> = (0..n).collect();
        if part != "id" {
            let mut rest = part;
            while !rest.is_empty() {
                let close = rest
                    .find(')')
                    .ok_or_else(|| Error::Parse(format!("unbalanced cycle in `{s}`")))?;
                let open = rest
                    .find('(')
                    .filter(|&o| o < close)
                    .ok_or_else(|| Error::Parse(format!("unbalanced cycle in `{s}`")))?;
                let body = &rest[open + 1..close];
                let idx: Vec<usize> = body
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<usize>()
                            .ok()
                            .filter(|&v| v >= 1 && v <= n)
                            .map(|v| v - 1)
                            .ok_or_else(|| Error::Parse(format!("bad cycle entry `{t}` in `{s}`")))
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() < 2 {
                    return Err(Error::Parse(format!("cycle too short in `{s}`")));
                }
                for w in idx.windows(2) {
                    perm[w[0]] = w[1];
                }
                perm[idx[idx.len() - 1]] = idx[0];
                rest = &rest[close + 1..];
            }
        }
        perms.push(perm);
    }
    WeylElement::from_perms(spec, perms)
}
