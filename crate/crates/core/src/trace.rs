//! Newline-delimited `key=value` records shared by every engine's trace.
//!
//! Keys and values are free of whitespace and `=`; field order is kept, so a
//! trace written twice from the same run is byte-identical.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Record {
    fields: Vec<(String, String)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: &str, value: impl fmt::Display) {
        let v = value.to_string();
        debug_assert!(!key.is_empty() && !key.contains(['=', ' ', '\t', '\n']), "bad key {key:?}");
        debug_assert!(!v.is_empty() && !v.contains([' ', '\t', '\n']), "bad value {v:?} for {key}");
        self.fields.push((key.to_string(), v));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn fields(&self) -> &[(String, String)] {
        &self.fields
    }

    /// The value of `key`, or a parse error naming the line.
    pub fn req(&self, key: &str, line: usize) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Parse {
            line,
            msg: format!("missing field {key:?}"),
        })
    }

    pub fn num<T: std::str::FromStr>(&self, key: &str, line: usize) -> Result<T> {
        let v = self.req(key, line)?;
        v.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("field {key}={v} is not a number"),
        })
    }

    pub fn is(&self, key: &str, value: &str) -> bool {
        self.get(key) == Some(value)
    }

    pub fn parse(line: &str, lineno: usize) -> Result<Self> {
        let mut r = Record::new();
        let mut rest = line.trim();
        while !rest.is_empty() {
            let (tok, tail) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
            let (k, v) = tok.split_once('=').ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("token {tok:?} is not key=value"),
            })?;
            if k.is_empty() || v.is_empty() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("empty key or value in {tok:?}"),
                });
            }
            r.fields.push((k.to_string(), v.to_string()));
            rest = tail.trim_start();
        }
        Ok(r)
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.fields.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// A header record followed by the body.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub records: Vec<Record>,
}

impl Trace {
    pub fn new(header: Record) -> Self {
        Trace { records: vec![header] }
    }

    pub fn push(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn header(&self) -> Option<&Record> {
        self.records.first()
    }

    pub fn engine(&self) -> Option<&str> {
        self.header().and_then(|h| h.get("engine"))
    }

    pub fn body(&self) -> &[Record] {
        self.records.get(1..).unwrap_or(&[])
    }

    /// Body records paired with their 1-based line numbers.
    pub fn numbered(&self) -> impl Iterator<Item = (usize, &Record)> {
        self.records.iter().enumerate().skip(1).map(|(i, r)| (i + 1, r))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let records = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map(|(i, l)| Record::parse(l, i + 1))
            .collect::<Result<Vec<_>>>()?;
        if records.is_empty() {
            return Err(Error::Parse {
                line: 1,
                msg: "empty trace".into(),
            });
        }
        if records[0].get("engine").is_none() {
            return Err(Error::Parse {
                line: 1,
                msg: "first record must name the engine".into(),
            });
        }
        Ok(Trace { records })
    }
}

/// `a,b,c` or `-` for an empty list.
pub fn list<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    let v: Vec<String> = items.into_iter().map(|x| x.to_string()).collect();
    if v.is_empty() {
        "-".into()
    } else {
        v.join(",")
    }
}

pub fn parse_list<T: std::str::FromStr>(text: &str, line: usize) -> Result<Vec<T>> {
    if text == "-" {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            t.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad list item {t:?}"),
            })
        })
        .collect()
}
