//! PSCF, a line-oriented text format for [`CodeSpec`].
//!
//! ```text
//! pscf 1
//! n 16
//! k 6
//! kernel arikan l=2 m=4
//! parent ebch(m=4,d=6)
//! channel bec(0.5)
//! frozen 0
//! frozen 9 = 5
//! ```
//!
//! `frozen j = s1 s2 ...` means `u_j` is the XOR of the listed inputs; a bare
//! `frozen j` is a static freeze. `parent` and `channel` are optional labels.
//! Blank lines and lines starting with `#` are ignored.

use crate::construct::CodeSpec;
use crate::error::{Error, Result};
use crate::polarize::{ConstraintSystem, KernelKind};

pub fn serialize(spec: &CodeSpec) -> String {
    let mut s = format!(
        "pscf 1\nn {}\nk {}\nkernel {} l={} m={}\n",
        spec.n, spec.k, spec.kernel, spec.l, spec.m
    );
    if !spec.parent.is_empty() {
        s.push_str(&format!("parent {}\n", spec.parent));
    }
    if !spec.channel.is_empty() {
        s.push_str(&format!("channel {}\n", spec.channel));
    }
    for (j, srcs) in spec.constraints.rows() {
        s.push_str(&format!("frozen {j}"));
        if !srcs.is_empty() {
            s.push_str(" =");
            for x in srcs {
                s.push_str(&format!(" {x}"));
            }
        }
        s.push('\n');
    }
    s
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| perr(line, format!("invalid {what} {tok:?}")))
}

pub fn parse(text: &str) -> Result<CodeSpec> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, first) = lines.next().ok_or_else(|| perr(1, "empty document"))?;
    if first != "pscf 1" {
        return Err(perr(ln, format!("expected `pscf 1`, found {first:?}")));
    }
    let (mut n, mut k, mut kernel) = (None, None, None);
    let (mut parent, mut channel) = (String::new(), String::new());
    let mut rows: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut last_line = ln;
    for (ln, line) in lines {
        last_line = ln;
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match key {
            "n" | "k" | "kernel" | "parent" | "channel" if !rows.is_empty() => {
                return Err(perr(ln, format!("`{key}` after the first frozen line")));
            }
            "n" => n = Some(num::<usize>(Some(rest), ln, "length")?),
            "k" => k = Some(num::<usize>(Some(rest), ln, "dimension")?),
            "kernel" => {
                let mut toks = rest.split_whitespace();
                let kind: KernelKind = toks
                    .next()
                    .ok_or_else(|| perr(ln, "missing kernel kind"))?
                    .parse()
                    .map_err(|_| perr(ln, "kernel must be arikan, ebch or rs"))?;
                let l = num::<usize>(toks.next().and_then(|t| t.strip_prefix("l=")), ln, "l=<int>")?;
                let m = num::<u32>(toks.next().and_then(|t| t.strip_prefix("m=")), ln, "m=<int>")?;
                if toks.next().is_some() {
                    return Err(perr(ln, "trailing tokens after kernel"));
                }
                kernel = Some((kind, l, m));
            }
            "parent" => parent = rest.to_string(),
            "channel" => channel = rest.to_string(),
            "frozen" => {
                let (j, srcs) = match rest.split_once('=') {
                    Some((j, s)) => (j.trim(), Some(s)),
                    None => (rest, None),
                };
                let j: usize = num(Some(j), ln, "frozen index")?;
                let srcs = match srcs {
                    None => Vec::new(),
                    Some(s) => {
                        let v: Vec<usize> = s
                            .split_whitespace()
                            .map(|t| num(Some(t), ln, "source index"))
                            .collect::<Result<_>>()?;
                        if v.is_empty() {
                            return Err(perr(ln, "`=` without sources"));
                        }
                        v
                    }
                };
                if let Some(&(prev, _)) = rows.last() {
                    if j <= prev {
                        return Err(perr(ln, "frozen lines must be strictly increasing"));
                    }
                }
                if let Some(&s) = srcs.iter().find(|&&s| s >= j) {
                    return Err(perr(ln, format!("source {s} is not below {j}")));
                }
                rows.push((j, srcs));
            }
            other => return Err(perr(ln, format!("unknown keyword {other:?}"))),
        }
    }
    let n = n.ok_or_else(|| perr(last_line, "missing `n` line"))?;
    let k = k.ok_or_else(|| perr(last_line, "missing `k` line"))?;
    let (kernel, l, m) = kernel.ok_or_else(|| perr(last_line, "missing `kernel` line"))?;
    if let Some((j, _)) = rows.iter().find(|(j, _)| *j >= n) {
        return Err(perr(last_line, format!("frozen index {j} outside length {n}")));
    }
    let nrows = rows.len();
    let constraints =
        ConstraintSystem::from_rows(n, rows).map_err(|e| perr(last_line, e.to_string()))?;
    if constraints.frozen().len() != nrows {
        return Err(perr(last_line, "constraint rows are linearly dependent"));
    }
    let spec = CodeSpec {
        n,
        k,
        kernel,
        l,
        m,
        constraints,
        parent,
        channel,
    };
    spec.validate().map_err(|e| perr(last_line, e.to_string()))?;
    Ok(spec)
}
