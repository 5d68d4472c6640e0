use std::fmt::Display;
use std::path::Path;

use crate::error::{Error, Result};

/// Ordered `key = value` text with `#` comments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = Self::new();
        let mut offset = 0u64;
        for line in text.lines() {
            let trimmed = line.trim();
            if !trimmed.is_empty() && !trimmed.starts_with('#') {
                let (k, v) = trimmed.split_once('=').ok_or_else(|| Error::Format {
                    offset,
                    message: format!("expected `key = value`, found {trimmed:?}"),
                })?;
                m.push(k.trim(), v.trim());
            }
            offset += line.len() as u64 + 1;
        }
        Ok(m)
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = super::read_file(path)?;
        let text = String::from_utf8(bytes).map_err(|e| Error::Format {
            offset: e.utf8_error().valid_up_to() as u64,
            message: "manifest is not UTF-8".into(),
        })?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        super::write_atomic(path, self.to_text().as_bytes())
    }
}
