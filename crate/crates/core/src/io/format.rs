//! Line-oriented arrangement files:
//!
//! ```text
//! # three lines through the origin
//! dim: 2
//! hyperplane: 1 0 x 3 vertical
//! hyperplane: 1 1
//! hyperplane: 1 -1/2 x 1
//! ```
//!
//! Coefficients are exact rationals `p` or `p/q`, separated by whitespace or commas. The
//! multiplicity `x m` defaults to 1; any remaining text is a label.

use std::path::Path;

use num_traits::Zero;

use crate::arrangement::Arrangement;
use crate::error::{Error, Result};
use crate::exact::{fmt_rational, parse_rational, Rational};

#[derive(Clone, Debug)]
pub struct ArrangementFile {
    pub arrangement: Arrangement,
    /// One entry per hyperplane of the merged arrangement.
    pub labels: Vec<Option<String>>,
    pub warnings: Vec<String>,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str, offset: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        let sep = ch.is_whitespace() || ch == ',';
        match (sep, start) {
            (true, Some(s)) => {
                out.push(Token { text: &line[s..i], column: offset + line[..s].chars().count() + 1 });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &line[s..], column: offset + line[..s].chars().count() + 1 });
    }
    out
}

fn looks_numeric(t: &str) -> bool {
    let t = t.strip_prefix(['+', '-']).unwrap_or(t);
    t.chars().next().is_some_and(|c| c.is_ascii_digit())
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

pub fn parse_arrangement(text: &str) -> Result<ArrangementFile> {
    let mut dim: Option<usize> = None;
    let mut forms: Vec<Vec<Rational>> = Vec::new();
    let mut mults: Vec<u32> = Vec::new();
    let mut labels: Vec<Option<String>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some((key, rest)) = content.split_once(':') else {
            let col = content.len() - content.trim_start().len() + 1;
            return Err(parse_error(lineno, col, "expected `dim:` or `hyperplane:`"));
        };
        let offset = key.chars().count() + 1;
        match key.trim() {
            "dim" => {
                if dim.is_some() {
                    return Err(parse_error(lineno, 1, "dimension declared twice"));
                }
                let toks = tokens(rest, offset);
                let [tok] = toks.as_slice() else {
                    return Err(parse_error(lineno, offset + 1, "expected a single positive integer"));
                };
                match tok.text.parse::<usize>() {
                    Ok(n) if n > 0 => dim = Some(n),
                    _ => return Err(parse_error(lineno, tok.column, format!("invalid dimension {:?}", tok.text))),
                }
            }
            "hyperplane" => {
                let Some(n) = dim else {
                    return Err(parse_error(lineno, 1, "`dim:` must precede the hyperplanes"));
                };
                let toks = tokens(rest, offset);
                let mut coeffs = Vec::new();
                let mut i = 0;
                while i < toks.len() && looks_numeric(toks[i].text) {
                    let t = &toks[i];
                    let q = parse_rational(t.text)
                        .ok_or_else(|| parse_error(lineno, t.column, format!("malformed rational {:?}", t.text)))?;
                    coeffs.push(q);
                    i += 1;
                }
                let first_col = toks.first().map_or(offset + 1, |t| t.column);
                if coeffs.len() != n {
                    return Err(parse_error(
                        lineno,
                        first_col,
                        format!("dimension mismatch: expected {n} coefficients, found {}", coeffs.len()),
                    ));
                }
                if coeffs.iter().all(Zero::is_zero) {
                    return Err(parse_error(lineno, first_col, "zero form"));
                }
                let mut mult = 1u32;
                if i < toks.len() && toks[i].text == "x" {
                    let Some(t) = toks.get(i + 1) else {
                        return Err(parse_error(lineno, toks[i].column, "missing multiplicity after `x`"));
                    };
                    mult = match t.text.parse::<u32>() {
                        Ok(m) if m > 0 => m,
                        _ => {
                            return Err(parse_error(
                                lineno,
                                t.column,
                                format!("multiplicity must be a positive integer, got {:?}", t.text),
                            ))
                        }
                    };
                    i += 2;
                }
                let label = (i < toks.len())
                    .then(|| toks[i..].iter().map(|t| t.text).collect::<Vec<_>>().join(" "));
                forms.push(coeffs);
                mults.push(mult);
                labels.push(label);
            }
            other => {
                let col = content.len() - content.trim_start().len() + 1;
                return Err(parse_error(lineno, col, format!("unknown key {other:?}")));
            }
        }
    }
    let Some(n) = dim else {
        return Err(parse_error(1, 1, "missing `dim:` line"));
    };
    if forms.is_empty() {
        return Err(Error::InvalidArrangement("no hyperplanes".into()));
    }
    let (arrangement, warnings) = Arrangement::merging(n, forms.clone(), mults)?;
    // keep the label of the first form of each merged class
    let merged_labels = arrangement
        .forms()
        .iter()
        .map(|g| {
            forms
                .iter()
                .position(|f| proportional(f, g))
                .and_then(|k| labels[k].clone())
        })
        .collect();
    Ok(ArrangementFile { arrangement, labels: merged_labels, warnings })
}

fn proportional(f: &[Rational], g: &[Rational]) -> bool {
    (0..f.len()).all(|i| (i..f.len()).all(|j| &f[i] * &g[j] == &f[j] * &g[i]))
}

pub fn load_arrangement(path: impl AsRef<Path>) -> Result<ArrangementFile> {
    parse_arrangement(&std::fs::read_to_string(path)?)
}

pub fn emit_arrangement(a: &Arrangement, labels: &[Option<String>]) -> String {
    let mut out = format!("dim: {}\n", a.dim());
    for (k, (f, m)) in a.forms().iter().zip(a.multiplicities()).enumerate() {
        let coeffs: Vec<String> = f.iter().map(fmt_rational).collect();
        out.push_str(&format!("hyperplane: {} x {m}", coeffs.join(" ")));
        if let Some(Some(label)) = labels.get(k) {
            out.push(' ');
            out.push_str(label);
        }
        out.push('\n');
    }
    out
}
