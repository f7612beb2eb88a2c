//! Line-oriented `key = value` grammar shared by place, road-graph, scenario and
//! sweep files.
//!
//! ```text
//! # comment until end of line
//! key = value            # repeated keys are kept in order
//! list = a, b, c
//! polygon = 1 2, 3 4, 5 6
//! ```
//!
//! Blank lines are ignored. Keys are case-sensitive and may contain dots
//! (`weather.snow.base_miss`).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct KeyValError {
    /// 1-based source line, 0 when the error is not tied to a line.
    pub line: usize,
    pub message: String,
}

impl KeyValError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

impl Entry {
    pub fn error(&self, message: impl fmt::Display) -> KeyValError {
        KeyValError::new(self.line, format!("`{}`: {}", self.key, message))
    }

    pub fn parse<T: FromStr>(&self) -> Result<T, KeyValError>
    where
        T::Err: fmt::Display,
    {
        self.value
            .trim()
            .parse()
            .map_err(|e| self.error(format!("invalid value `{}`: {}", self.value, e)))
    }

    /// Comma separated list, each item trimmed. Empty value gives an empty list.
    pub fn list(&self) -> Vec<&str> {
        if self.value.trim().is_empty() {
            return Vec::new();
        }
        self.value.split(',').map(str::trim).collect()
    }

    pub fn parse_list<T: FromStr>(&self) -> Result<Vec<T>, KeyValError>
    where
        T::Err: fmt::Display,
    {
        self.list()
            .into_iter()
            .map(|item| {
                item.parse()
                    .map_err(|e| self.error(format!("invalid item `{item}`: {e}")))
            })
            .collect()
    }

    /// Whitespace separated numbers.
    pub fn numbers(&self) -> Result<Vec<f64>, KeyValError> {
        numbers(&self.value).map_err(|e| self.error(e))
    }

    /// Comma separated list of whitespace separated `x y` pairs.
    pub fn points(&self) -> Result<Vec<[f64; 2]>, KeyValError> {
        self.list()
            .into_iter()
            .map(|item| {
                let n = numbers(item).map_err(|e| self.error(e))?;
                match n.as_slice() {
                    [x, y] => Ok([*x, *y]),
                    _ => Err(self.error(format!("expected `x y`, got `{item}`"))),
                }
            })
            .collect()
    }

    pub fn boolean(&self) -> Result<bool, KeyValError> {
        match self.value.trim() {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            other => Err(self.error(format!("expected true/false, got `{other}`"))),
        }
    }
}

fn numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| format!("`{t}` is not a number"))
                .and_then(|v| {
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(format!("`{t}` is not finite"))
                    }
                })
        })
        .collect()
}

/// Parses a whole document into ordered entries.
pub fn parse(text: &str) -> Result<Vec<Entry>, KeyValError> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(KeyValError::new(
                line,
                format!("expected `key = value`, got `{content}`"),
            ));
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(KeyValError::new(line, "empty key"));
        }
        entries.push(Entry {
            line,
            key: key.to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(entries)
}
