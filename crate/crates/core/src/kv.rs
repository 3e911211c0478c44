//! Flat `key=value` documents: one pair per line, `#` comments, blank lines
//! ignored. Keys keep their file order.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Format {
            what: "key=value document",
            line: i + 1,
            reason: format!("expected key=value, got '{line}'"),
        })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Format {
                what: "key=value document",
                line: i + 1,
                reason: "empty key".into(),
            });
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn render<K: AsRef<str>, V: AsRef<str>>(pairs: &[(K, V)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        let _ = writeln!(s, "{}={}", k.as_ref(), v.as_ref());
    }
    s
}

/// Value of the last occurrence of `key`.
pub fn get<'a>(pairs: &'a [(String, String)], key: &str) -> Option<&'a str> {
    pairs
        .iter()
        .rev()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_comments() {
        let doc = "# run\nlr = 0.1\n\nbatch=32\nlr=0.01\n";
        let pairs = parse(doc).unwrap();
        assert_eq!(pairs.len(), 3);
        assert_eq!(get(&pairs, "lr"), Some("0.01"));
        assert_eq!(parse(&render(&pairs)).unwrap(), pairs);
    }

    #[test]
    fn malformed_lines_name_the_line() {
        let err = parse("a=1\noops\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(parse("=3").is_err());
    }
}
