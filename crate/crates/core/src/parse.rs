//! Whitespace-insensitive cursor shared by the small text grammars
//! (lattice names, form symbols, polynomials, divisor classes).

use num_bigint::BigInt;

use crate::error::{Error, Result};

pub(crate) struct Cursor {
    // non-whitespace characters with their byte offsets in the original input
    chars: Vec<(usize, char)>,
    pos: usize,
    end: usize,
}

impl Cursor {
    pub(crate) fn new(input: &str) -> Self {
        Cursor {
            chars: input
                .char_indices()
                .filter(|(_, c)| !c.is_whitespace())
                .collect(),
            pos: 0,
            end: input.len(),
        }
    }

    /// Byte offset of the next unread character.
    pub(crate) fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.end, |&(i, _)| i)
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    pub(crate) fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    pub(crate) fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.offset(),
            msg: msg.into(),
        }
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error(format!("unexpected '{}'", self.peek().unwrap_or(' '))))
        }
    }

    fn digits(&mut self) -> Option<String> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some(self.chars[start..self.pos].iter().map(|&(_, c)| c).collect())
        }
    }

    /// Unsigned decimal integer.
    pub(crate) fn natural(&mut self) -> Result<BigInt> {
        self.digits()
            .map(|d| d.parse().expect("ascii digits"))
            .ok_or_else(|| self.error("expected an integer"))
    }

    /// Decimal integer with optional leading sign.
    pub(crate) fn integer(&mut self) -> Result<BigInt> {
        let neg = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        let n = self.natural()?;
        Ok(if neg { -n } else { n })
    }

    pub(crate) fn small_natural(&mut self) -> Result<u64> {
        let at = self.offset();
        let n = self.natural()?;
        u64::try_from(n).map_err(|_| Error::Parse {
            pos: at,
            msg: "integer out of range".into(),
        })
    }

    pub(crate) fn small_integer(&mut self) -> Result<i64> {
        let at = self.offset();
        let n = self.integer()?;
        i64::try_from(n).map_err(|_| Error::Parse {
            pos: at,
            msg: "integer out of range".into(),
        })
    }

    /// Identifier: a letter followed by letters, digits, `_` or `'`.
    pub(crate) fn ident(&mut self) -> Result<String> {
        let start = self.pos;
        if !matches!(self.peek(), Some(c) if c.is_alphabetic()) {
            return Err(self.error("expected an identifier"));
        }
        while matches!(self.peek(), Some(c) if c.is_alphanumeric() || c == '_' || c == '\'') {
            self.pos += 1;
        }
        Ok(self.chars[start..self.pos].iter().map(|&(_, c)| c).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_refer_to_the_original_string() {
        let mut c = Cursor::new("  ab  +");
        assert_eq!(c.offset(), 2);
        assert_eq!(c.ident().unwrap(), "ab");
        assert_eq!(c.offset(), 6);
        assert!(c.eat('+'));
        assert_eq!(c.offset(), 7);
        assert!(c.at_end());
    }

    #[test]
    fn signed_integers() {
        let mut c = Cursor::new("-12 +3 x");
        assert_eq!(c.small_integer().unwrap(), -12);
        assert_eq!(c.small_integer().unwrap(), 3);
        assert!(matches!(c.small_integer(), Err(Error::Parse { pos: 7, .. })));
    }
}
