//! Initial-state specifications.
//!
//! A spec is a comma-separated list of per-qubit symbols `0`, `1`, `+`, `-`.
//! A bracketed list followed by `xN` repeats it `N` times and groups nest,
//! so `[0,1,+,-,0]x2` describes ten qubits and `1,[0,+]x2` five.

use qgossip::qstate::{QubitState, StandardState};

#[derive(Debug, PartialEq, Eq)]
pub struct InitSpecError {
    pub position: usize,
    pub message: String,
}

impl std::fmt::Display for InitSpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "initial-state spec, column {}: {}", self.position + 1, self.message)
    }
}

impl std::error::Error for InitSpecError {}

/// Parses a spec into per-qubit standard states, at most `limit` of them.
pub fn parse(spec: &str, limit: usize) -> Result<Vec<StandardState>, InitSpecError> {
    let chars: Vec<char> = spec.chars().filter(|c| !c.is_whitespace()).collect();
    let mut parser = Parser { chars, pos: 0, limit };
    let out = parser.list()?;
    if parser.pos != parser.chars.len() {
        return Err(parser.error(format!("unexpected {:?}", parser.chars[parser.pos])));
    }
    if out.is_empty() {
        return Err(parser.error("no qubits".into()));
    }
    Ok(out)
}

pub fn states(symbols: &[StandardState]) -> Vec<QubitState> {
    symbols.iter().map(|s| s.state()).collect()
}

/// Inverse of [`parse`] without repeat groups.
pub fn render(symbols: &[StandardState]) -> String {
    symbols
        .iter()
        .map(|s| s.symbol().to_string())
        .collect::<Vec<_>>()
        .join(",")
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    limit: usize,
}

impl Parser {
    fn error(&self, message: String) -> InitSpecError {
        InitSpecError {
            position: self.pos,
            message,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn list(&mut self) -> Result<Vec<StandardState>, InitSpecError> {
        let mut out = self.item()?;
        while self.peek() == Some(',') {
            self.pos += 1;
            out.extend(self.item()?);
            if out.len() > self.limit {
                return Err(self.error(format!("more than {} qubits", self.limit)));
            }
        }
        Ok(out)
    }

    fn item(&mut self) -> Result<Vec<StandardState>, InitSpecError> {
        match self.peek() {
            Some('[') => {
                self.pos += 1;
                let inner = self.list()?;
                if self.peek() != Some(']') {
                    return Err(self.error("expected ']'".into()));
                }
                self.pos += 1;
                if self.peek() != Some('x') {
                    return Err(self.error("expected 'x<count>' after ']'".into()));
                }
                self.pos += 1;
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let digits: String = self.chars[start..self.pos].iter().collect();
                let count: usize = digits
                    .parse()
                    .map_err(|_| self.error("expected a repeat count".into()))?;
                if count == 0 || inner.len().saturating_mul(count) > self.limit {
                    return Err(self.error(format!(
                        "repeat count {count} gives {} qubits, allowed 1..={}",
                        inner.len().saturating_mul(count),
                        self.limit
                    )));
                }
                Ok(inner.repeat(count))
            }
            Some(c) => match StandardState::from_symbol(c) {
                Some(s) => {
                    self.pos += 1;
                    Ok(vec![s])
                }
                None => Err(self.error(format!("unknown qubit symbol {c:?}; use 0, 1, + or -"))),
            },
            None => Err(self.error("unexpected end of spec".into())),
        }
    }
}
