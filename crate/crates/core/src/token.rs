//! Word/tag tokens and the backslash escaping shared by every text format.

use std::fmt;

use thiserror::Error;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const BOS_TAG: &str = "SB";
pub const EOS_TAG: &str = "SE";
/// Placeholder tag for raw-text tokens.
pub const UNK_TAG: &str = "UNK-TAG";
/// Outcome that absorbs out-of-vocabulary words.
pub const UNK: &str = "<unk>";
/// Tag value used for context fields when a scheme ignores tags.
pub const BLANK_TAG: &str = "<*>";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TokenError {
    #[error("empty token surface")]
    EmptySurface,
    #[error("empty tag for token `{0}`")]
    EmptyTag(String),
    #[error("reserved token `{surface}` must carry tag `{expected}`, found `{found}`")]
    ReservedTag {
        surface: String,
        expected: &'static str,
        found: String,
    },
    #[error("bad escape sequence in `{0}`")]
    BadEscape(String),
    #[error("missing `_` separator in `{0}`")]
    MissingSeparator(String),
}

/// A (surface, tag) pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token {
    surface: String,
    tag: String,
}

impl Token {
    pub fn new(surface: impl Into<String>, tag: impl Into<String>) -> Result<Self, TokenError> {
        let surface = surface.into();
        let tag = tag.into();
        if surface.is_empty() {
            return Err(TokenError::EmptySurface);
        }
        if tag.is_empty() {
            return Err(TokenError::EmptyTag(surface));
        }
        let reserved = match surface.as_str() {
            BOS => Some(BOS_TAG),
            EOS => Some(EOS_TAG),
            _ => None,
        };
        if let Some(expected) = reserved {
            if tag != expected {
                return Err(TokenError::ReservedTag {
                    surface,
                    expected,
                    found: tag,
                });
            }
        }
        Ok(Token { surface, tag })
    }

    /// Token for raw text, tagged with the placeholder tag.
    pub fn untagged(surface: impl Into<String>) -> Result<Self, TokenError> {
        let surface = surface.into();
        let tag = match surface.as_str() {
            BOS => BOS_TAG,
            EOS => EOS_TAG,
            _ => UNK_TAG,
        };
        Token::new(surface, tag)
    }

    pub fn bos() -> Self {
        Token {
            surface: BOS.to_string(),
            tag: BOS_TAG.to_string(),
        }
    }

    pub fn eos() -> Self {
        Token {
            surface: EOS.to_string(),
            tag: EOS_TAG.to_string(),
        }
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn is_bos(&self) -> bool {
        self.surface == BOS
    }

    pub fn is_eos(&self) -> bool {
        self.surface == EOS
    }

    /// `word_tag` with both halves escaped.
    pub fn encode(&self) -> String {
        encode_pair(&self.surface, &self.tag)
    }

    pub fn decode(s: &str) -> Result<Self, TokenError> {
        let (w, t) = decode_pair(s)?;
        Token::new(w, t)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.surface, self.tag)
    }
}

/// Escapes backslash, underscore, tab, newline and space.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '_' => out.push_str("\\_"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            ' ' => out.push_str("\\s"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape(s: &str) -> Result<String, TokenError> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('_') => out.push('_'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('s') => out.push(' '),
            _ => return Err(TokenError::BadEscape(s.to_string())),
        }
    }
    Ok(out)
}

pub fn encode_pair(word: &str, tag: &str) -> String {
    format!("{}_{}", escape(word), escape(tag))
}

/// Splits on the first unescaped underscore.
pub fn decode_pair(s: &str) -> Result<(String, String), TokenError> {
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'_' => return Ok((unescape(&s[..i])?, unescape(&s[i + 1..])?)),
            _ => i += 1,
        }
    }
    Err(TokenError::MissingSeparator(s.to_string()))
}
