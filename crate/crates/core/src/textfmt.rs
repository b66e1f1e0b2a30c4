//! Line-oriented text files shared by the code and configuration formats.
//!
//! Blank lines and lines starting with `#` are ignored. A line containing `=`
//! is a `key = value` entry; any other line is a data row. Floats are written
//! with Rust's shortest round-trip formatting, so save/load is bit-exact.

use std::collections::HashMap;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct Document {
    entries: HashMap<String, (usize, String)>,
    order: Vec<String>,
    pub rows: Vec<(usize, String)>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Document::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    let key = k.trim().to_string();
                    if key.is_empty() {
                        return Err(parse_err(line_no, "empty key"));
                    }
                    if doc.entries.contains_key(&key) {
                        return Err(parse_err(line_no, format!("duplicate key `{key}`")));
                    }
                    doc.order.push(key.clone());
                    doc.entries.insert(key, (line_no, v.trim().to_string()));
                }
                None => doc.rows.push((line_no, line.to_string())),
            }
        }
        Ok(doc)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.order.iter().map(String::as_str)
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        let (line, value) = self
            .entries
            .get(key)
            .ok_or_else(|| parse_err(0, format!("missing key `{key}`")))?;
        value
            .parse()
            .map_err(|_| parse_err(*line, format!("bad value `{value}` for `{key}`")))
    }
}

pub fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses a whitespace- or comma-separated list.
pub fn parse_list<T: FromStr>(line: usize, s: &str) -> Result<Vec<T>> {
    s.split(|ch: char| ch.is_whitespace() || ch == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| parse_err(line, format!("cannot parse `{t}`")))
        })
        .collect()
}

pub fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_entries_and_rows() {
        let doc = Document::parse("# c\nn = 3\n\n1 2 3\nm=2\n4,5,6\n").unwrap();
        assert_eq!(doc.require::<usize>("n").unwrap(), 3);
        assert_eq!(doc.get("m"), Some("2"));
        assert_eq!(doc.rows.len(), 2);
        assert_eq!(parse_list::<f64>(6, &doc.rows[1].1).unwrap(), vec![4.0, 5.0, 6.0]);
    }

    #[test]
    fn rejects_duplicates_and_bad_values() {
        assert!(Document::parse("a = 1\na = 2").is_err());
        let doc = Document::parse("n = x").unwrap();
        assert!(matches!(doc.require::<usize>("n"), Err(Error::Parse { line: 1, .. })));
        assert!(doc.require::<usize>("m").is_err());
    }

    #[test]
    fn shortest_float_round_trip() {
        let x = 0.1f64 + 0.2;
        let v: Vec<f64> = parse_list(1, &join(&[x])).unwrap();
        assert_eq!(v[0].to_bits(), x.to_bits());
    }
}
