//! Line-oriented `key=value` records.
//!
//! A record starts with a `schema=` line followed by blocks separated by
//! one blank line. Each block opens with `kind=`. Values are single lines;
//! newlines and backslashes are escaped.

use std::fmt::{self, Display};

use thiserror::Error;

pub const SCHEMA: &str = "cremona-record/1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecordError {
    #[error("line {0}: missing schema line")]
    MissingSchema(usize),
    #[error("line {0}: unsupported schema '{1}'")]
    Schema(usize, String),
    #[error("line {0}: expected key=value")]
    Syntax(usize),
    #[error("line {0}: block does not start with kind=")]
    MissingKind(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub kind: String,
    pub fields: Vec<(String, String)>,
}

impl Block {
    pub fn new(kind: &str) -> Block {
        Block { kind: kind.to_string(), fields: Vec::new() }
    }

    pub fn put(&mut self, key: &str, value: impl Display) -> &mut Block {
        debug_assert!(!key.is_empty() && !key.contains(['=', '\n']));
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Record {
    pub blocks: Vec<Block>,
}

fn escape(v: &str) -> String {
    v.replace('\\', "\\\\").replace('\n', "\\n")
}

fn unescape(v: &str) -> String {
    let mut out = String::with_capacity(v.len());
    let mut it = v.chars();
    while let Some(c) = it.next() {
        if c == '\\' {
            match it.next() {
                Some('n') => out.push('\n'),
                Some(o) => out.push(o),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

impl Record {
    pub fn new() -> Record {
        Record::default()
    }

    /// Appends a block and returns it for filling.
    pub fn block(&mut self, kind: &str) -> &mut Block {
        self.blocks.push(Block::new(kind));
        self.blocks.last_mut().unwrap()
    }

    pub fn first(&self, kind: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.kind == kind)
    }

    pub fn parse(text: &str) -> Result<Record, RecordError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) => match l.strip_prefix("schema=") {
                Some(SCHEMA) => {}
                Some(s) => return Err(RecordError::Schema(1, s.to_string())),
                None => return Err(RecordError::MissingSchema(1)),
            },
            None => return Err(RecordError::MissingSchema(1)),
        }
        let mut rec = Record::new();
        let mut open = false;
        for (no, line) in lines {
            if line.is_empty() {
                open = false;
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(RecordError::Syntax(no + 1))?;
            if !open {
                if k != "kind" {
                    return Err(RecordError::MissingKind(no + 1));
                }
                rec.blocks.push(Block::new(&unescape(v)));
                open = true;
            } else {
                rec.blocks.last_mut().unwrap().fields.push((k.to_string(), unescape(v)));
            }
        }
        Ok(rec)
    }
}

impl Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "schema={}", SCHEMA)?;
        for b in &self.blocks {
            writeln!(f)?;
            writeln!(f, "kind={}", escape(&b.kind))?;
            for (k, v) in &b.fields {
                writeln!(f, "{}={}", k, escape(v))?;
            }
        }
        Ok(())
    }
}

/// Fixed-width float, so records are byte-stable.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{:.12e}", x)
    } else {
        x.to_string()
    }
}

pub fn fmt_c64(z: num_complex::Complex64) -> String {
    format!("{} {}", fmt_f64(z.re), fmt_f64(z.im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut r = Record::new();
        r.block("classify").put("stratum", "Sigma3").put("note", "a\\b\nc");
        r.block("point").put("x", fmt_f64(0.5));
        let text = r.to_string();
        assert!(text.starts_with("schema=cremona-record/1\n\nkind=classify\nstratum=Sigma3\n"));
        assert_eq!(Record::parse(&text).unwrap(), r);
    }

    #[test]
    fn rejects_bad_headers() {
        assert_eq!(Record::parse("kind=x\n").unwrap_err(), RecordError::MissingSchema(1));
        assert!(matches!(Record::parse("schema=other/9\n"), Err(RecordError::Schema(..))));
        assert_eq!(Record::parse("schema=cremona-record/1\n\nx=1\n").unwrap_err(), RecordError::MissingKind(3));
    }
}
