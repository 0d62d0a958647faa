//! Line-oriented record syntax shared by the text formats.
//!
//! Each non-blank line is a record: a keyword followed by whitespace
//! separated fields. Fields are either positional or `key=value`. Lines
//! starting with `#` are comments.

use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct Record<'a> {
    pub origin: &'a str,
    pub line: usize,
    pub key: &'a str,
    pub fields: Vec<&'a str>,
}

impl<'a> Record<'a> {
    pub fn error(&self, field: &str, message: impl Into<String>) -> Error {
        Error::Parse {
            origin: self.origin.to_string(),
            line: self.line,
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// Requires exactly the named positional fields.
    pub fn arity(&self, names: &[&str]) -> Result<()> {
        if self.fields.len() == names.len() {
            return Ok(());
        }
        let field = names.get(self.fields.len()).copied().unwrap_or(self.key);
        Err(self.error(
            field,
            format!(
                "`{}` takes {} fields ({}), found {}",
                self.key,
                names.len(),
                names.join(" "),
                self.fields.len()
            ),
        ))
    }

    pub fn at<T: FromStr>(&self, i: usize, name: &str) -> Result<T> {
        let raw = self
            .fields
            .get(i)
            .ok_or_else(|| self.error(name, "missing field"))?;
        parse_value(self, name, raw)
    }

    /// A positional integer checked against an inclusive range.
    pub fn int_in(&self, i: usize, name: &str, lo: i64, hi: i64) -> Result<i32> {
        let v: i64 = self.at(i, name)?;
        if v < lo || v > hi {
            return Err(self.error(name, format!("{name} out of range: {v} not in {lo}..={hi}")));
        }
        Ok(v as i32)
    }

    pub fn kv<T: FromStr>(&self, name: &str) -> Result<T> {
        let raw = self
            .fields
            .iter()
            .find_map(|f| f.strip_prefix(name).and_then(|rest| rest.strip_prefix('=')))
            .ok_or_else(|| self.error(name, format!("missing `{name}=`")))?;
        parse_value(self, name, raw)
    }
}

fn parse_value<T: FromStr>(rec: &Record<'_>, name: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| {
        rec.error(
            name,
            format!("cannot parse `{raw}` as {}", std::any::type_name::<T>()),
        )
    })
}

pub(crate) struct Reader<'a> {
    origin: &'a str,
    records: Vec<Record<'a>>,
    pos: usize,
    last_line: usize,
}

impl<'a> Reader<'a> {
    pub fn new(text: &'a str, origin: &'a str) -> Self {
        let records: Vec<Record<'a>> = text
            .lines()
            .enumerate()
            .filter_map(|(i, line)| {
                let line_no = i + 1;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    return None;
                }
                let mut parts = trimmed.split_whitespace();
                let key = parts.next()?;
                Some(Record {
                    origin,
                    line: line_no,
                    key,
                    fields: parts.collect(),
                })
            })
            .collect();
        let last_line = text.lines().count();
        Reader {
            origin,
            records,
            pos: 0,
            last_line,
        }
    }

    pub fn peek_key(&self) -> Option<&'a str> {
        self.records.get(self.pos).map(|r| r.key)
    }

    pub fn next_record(&mut self) -> Option<Record<'a>> {
        let rec = self.records.get(self.pos).cloned();
        if rec.is_some() {
            self.pos += 1;
        }
        rec
    }

    pub fn expect(&mut self, key: &str) -> Result<Record<'a>> {
        match self.next_record() {
            Some(r) if r.key == key => Ok(r),
            Some(r) => Err(r.error(key, format!("expected `{key}` record, found `{}`", r.key))),
            None => Err(Error::Parse {
                origin: self.origin.to_string(),
                line: self.last_line + 1,
                field: key.to_string(),
                message: format!("unexpected end of file, expected `{key}` record"),
            }),
        }
    }

    /// Checks the magic first line and its version number.
    pub fn header(&mut self, magic: &str, kind: &'static str, version: u32) -> Result<()> {
        let rec = self.expect(magic)?;
        let found = rec.fields.first().copied().unwrap_or("");
        if found != version.to_string() || rec.fields.len() != 1 {
            return Err(Error::Version {
                origin: self.origin.to_string(),
                kind,
                found: found.to_string(),
                expected: version,
            });
        }
        Ok(())
    }

    pub fn finish(&mut self) -> Result<()> {
        match self.next_record() {
            None => Ok(()),
            Some(r) => Err(r.error(r.key, format!("unexpected `{}` record", r.key))),
        }
    }
}
