//! The certification report format.
//!
//! Reports are ordered `key: value` lines under a versioned header, one
//! fact per line, so certification artifacts diff cleanly in review.
//! Parsing and re-emitting a report reproduces it byte for byte.

pub const REPORT_HEADER: &str = "evalues-report v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

#[derive(Debug)]
pub struct ReportParseError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ReportParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "report line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ReportParseError {}

impl Report {
    pub fn new() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        debug_assert!(!key.contains(':'), "report keys must not contain ':'");
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// All values for a repeated key, in order.
    pub fn get_all(&self, key: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    pub fn emit(&self) -> String {
        let mut out = String::with_capacity(64 + self.entries.len() * 32);
        out.push_str(REPORT_HEADER);
        out.push('\n');
        for (key, value) in &self.entries {
            out.push_str(key);
            out.push_str(": ");
            out.push_str(value);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ReportParseError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header == REPORT_HEADER => {}
            Some((_, header)) => {
                return Err(ReportParseError {
                    line: 1,
                    message: format!("unknown header '{header}'"),
                })
            }
            None => {
                return Err(ReportParseError {
                    line: 1,
                    message: "empty report".into(),
                })
            }
        }
        let mut entries = Vec::new();
        for (index, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once(": ").ok_or_else(|| ReportParseError {
                line: index + 1,
                message: format!("expected 'key: value', got '{line}'"),
            })?;
            entries.push((key.to_string(), value.to_string()));
        }
        Ok(Self { entries })
    }
}

impl Default for Report {
    fn default() -> Self {
        Self::new()
    }
}
