//! Parsing and rendering helpers for the `qhs` binary: presentation
//! strings, integer tuple lists, outcome labels, and tabular artifacts.

use qhs_core::freegrp::{reduce, Presentation, ReducedWord, Word};
use qhs_core::qsim::OutcomeLabel;
use serde_json::{json, Value};

/// Hard cap on letters produced while expanding `^` powers, so a hostile
/// input like `(x1 x2)^99999999` fails fast instead of allocating.
const MAX_EXPANDED_LETTERS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    Gen(usize),
    Pow(i64),
    Open,
    Close,
}

fn lex_relator(src: &str) -> Result<Vec<Tok>, String> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b' ' | b'\t' => i += 1,
            b'(' => {
                toks.push(Tok::Open);
                i += 1;
            }
            b')' => {
                toks.push(Tok::Close);
                i += 1;
            }
            b'x' | b'X' => {
                i += 1;
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if start == i {
                    return Err(format!("generator name needs digits after 'x' in '{src}'"));
                }
                let idx: usize = src[start..i]
                    .parse()
                    .map_err(|_| format!("generator index out of range in '{src}'"))?;
                if idx == 0 {
                    return Err(format!("generator indices start at x1, got x0 in '{src}'"));
                }
                toks.push(Tok::Gen(idx));
            }
            b'^' => {
                i += 1;
                let start = i;
                if i < bytes.len() && (bytes[i] == b'-' || bytes[i] == b'+') {
                    i += 1;
                }
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i == start || (i == start + 1 && !bytes[start].is_ascii_digit()) {
                    return Err(format!("'^' needs an integer exponent in '{src}'"));
                }
                let exp: i64 = src[start..i]
                    .parse()
                    .map_err(|_| format!("exponent out of range in '{src}'"))?;
                toks.push(Tok::Pow(exp));
            }
            other => {
                return Err(format!(
                    "unexpected character '{}' in relator '{src}'",
                    other as char
                ));
            }
        }
    }
    Ok(toks)
}

fn invert_letters(letters: &[i32]) -> Vec<i32> {
    letters.iter().rev().map(|&l| -l).collect()
}

fn apply_power(base: Vec<i32>, exp: i64, src: &str) -> Result<Vec<i32>, String> {
    let mag = exp.unsigned_abs() as usize;
    let unit = if exp < 0 { invert_letters(&base) } else { base };
    let total = unit.len().saturating_mul(mag);
    if total > MAX_EXPANDED_LETTERS {
        return Err(format!("relator '{src}' expands past {MAX_EXPANDED_LETTERS} letters"));
    }
    let mut out = Vec::with_capacity(total);
    for _ in 0..mag {
        out.extend_from_slice(&unit);
    }
    Ok(out)
}

/// Parses one item plus an optional trailing power; returns its letters.
fn parse_item(toks: &[Tok], pos: &mut usize, src: &str) -> Result<Vec<i32>, String> {
    let base = match toks.get(*pos) {
        Some(Tok::Gen(idx)) => {
            *pos += 1;
            vec![*idx as i32]
        }
        Some(Tok::Open) => {
            *pos += 1;
            let inner = parse_seq(toks, pos, src)?;
            if toks.get(*pos) != Some(&Tok::Close) {
                return Err(format!("unbalanced '(' in relator '{src}'"));
            }
            *pos += 1;
            inner
        }
        Some(Tok::Close) => return Err(format!("unbalanced ')' in relator '{src}'")),
        Some(Tok::Pow(_)) => return Err(format!("'^' needs a generator or group in '{src}'")),
        None => return Err(format!("relator '{src}' ends unexpectedly")),
    };
    if let Some(Tok::Pow(exp)) = toks.get(*pos) {
        let exp = *exp;
        *pos += 1;
        apply_power(base, exp, src)
    } else {
        Ok(base)
    }
}

/// Parses items until a ')' or the end of input.
fn parse_seq(toks: &[Tok], pos: &mut usize, src: &str) -> Result<Vec<i32>, String> {
    let mut letters = Vec::new();
    while let Some(tok) = toks.get(*pos) {
        if *tok == Tok::Close {
            break;
        }
        let item = parse_item(toks, pos, src)?;
        if letters.len() + item.len() > MAX_EXPANDED_LETTERS {
            return Err(format!("relator '{src}' expands past {MAX_EXPANDED_LETTERS} letters"));
        }
        letters.extend(item);
    }
    Ok(letters)
}

/// Parses a single relator like `(x1 x2)^2` or `x1^3 x2^-1` into a
/// freely reduced word over the given rank.
pub fn parse_relator(rank: usize, src: &str) -> Result<ReducedWord, String> {
    let toks = lex_relator(src)?;
    let mut pos = 0;
    let letters = parse_seq(&toks, &mut pos, src)?;
    if pos != toks.len() {
        return Err(format!("unbalanced ')' in relator '{src}'"));
    }
    let word = Word::new(rank, letters).map_err(|e| format!("relator '{src}': {e}"))?;
    Ok(reduce(&word))
}

/// Parses `rank=N; relators=r1, r2, ...`. The relator list may be empty
/// (`relators=`), which describes a free group.
pub fn parse_presentation(src: &str) -> Result<Presentation, String> {
    let parts: Vec<&str> = src.split(';').collect();
    if parts.is_empty() || parts.len() > 2 {
        return Err("presentation must look like 'rank=N; relators=...'".into());
    }
    let rank_part = parts[0].trim();
    let rank_str = rank_part
        .strip_prefix("rank=")
        .ok_or("presentation must start with 'rank=N'")?;
    let rank: usize = rank_str
        .trim()
        .parse()
        .map_err(|_| format!("bad rank '{}'", rank_str.trim()))?;
    let mut relators = Vec::new();
    if parts.len() == 2 {
        let rel_part = parts[1].trim();
        let rel_str = rel_part
            .strip_prefix("relators=")
            .ok_or("second presentation field must be 'relators=...'")?;
        for piece in rel_str.split(',') {
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            relators.push(parse_relator(rank, piece)?);
        }
    }
    Presentation::new(rank, relators).map_err(|e| e.to_string())
}

/// Comma-separated unsigned integers: `2,2` -> [2, 2].
pub fn parse_u64_list(src: &str) -> Result<Vec<u64>, String> {
    src.split(',')
        .map(|p| {
            p.trim()
                .parse::<u64>()
                .map_err(|_| format!("bad integer '{}' in '{src}'", p.trim()))
        })
        .collect()
}

/// Semicolon-separated list of comma-separated signed vectors:
/// `2,0;0,3` -> [[2, 0], [0, 3]]. All vectors must share a length.
pub fn parse_i64_vectors(src: &str) -> Result<Vec<Vec<i64>>, String> {
    let mut out = Vec::new();
    for part in src.split(';') {
        let vec: Vec<i64> = part
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<i64>()
                    .map_err(|_| format!("bad integer '{}' in '{src}'", p.trim()))
            })
            .collect::<Result<_, String>>()?;
        out.push(vec);
    }
    if out.is_empty() {
        return Err(format!("no vectors in '{src}'"));
    }
    let len = out[0].len();
    if out.iter().any(|v| v.len() != len) {
        return Err(format!("vectors in '{src}' have mixed lengths"));
    }
    Ok(out)
}

/// Like `parse_i64_vectors` but for unsigned coordinate tuples.
pub fn parse_u64_vectors(src: &str) -> Result<Vec<Vec<u64>>, String> {
    let mut out = Vec::new();
    for part in src.split(';') {
        out.push(parse_u64_list(part)?);
    }
    let len = out[0].len();
    if out.iter().any(|v| v.len() != len) {
        return Err(format!("vectors in '{src}' have mixed lengths"));
    }
    Ok(out)
}

/// Stable text form for a measurement outcome label.
pub fn label_string(label: &OutcomeLabel) -> String {
    match label {
        OutcomeLabel::Character(chi) => {
            let parts: Vec<String> = chi.freqs().iter().map(|f| f.to_string()).collect();
            parts.join(",")
        }
        OutcomeLabel::RawLeft(idx) => idx.to_string(),
        OutcomeLabel::IrrepEntry { irrep, row, col } => format!("g{irrep}[{row},{col}]"),
    }
}

/// Probabilities are rendered in full-precision scientific notation so
/// artifacts are byte-reproducible across runs.
pub fn prob_string(p: f64) -> String {
    format!("{p:.16e}")
}

fn csv_field(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

/// Two-column CSV with the given header; RFC 4180 quoting where needed.
pub fn rows_csv(header: (&str, &str), rows: &[(String, String)]) -> String {
    let mut out = String::new();
    out.push_str(header.0);
    out.push(',');
    out.push_str(header.1);
    out.push('\n');
    for (a, b) in rows {
        out.push_str(&csv_field(a));
        out.push(',');
        out.push_str(&csv_field(b));
        out.push('\n');
    }
    out
}

/// JSON array mirror of `rows_csv`, keyed by the same header names.
pub fn rows_json(header: (&str, &str), rows: &[(String, String)]) -> String {
    let items: Vec<Value> = rows
        .iter()
        .map(|(a, b)| json!({ header.0: a, header.1: b }))
        .collect();
    let mut out = serde_json::to_string_pretty(&Value::Array(items)).expect("rows serialize");
    out.push('\n');
    out
}
