//! Documents: immutable finite byte sequences, optionally tagged with a
//! data format.
//!
//! Everything in this system is a document — identifiers, locators, and
//! edit lists included. The format tag is metadata only; it never takes
//! part in identifier computation.

use std::fmt;

use thiserror::Error;

/// Format tag for edit-list documents.
pub const FORMAT_EDIT_LIST: &str = "application/prs.hyx-edl";

/// Format tag for content-locator documents.
pub const FORMAT_LOCATOR: &str = "application/prs.hyx-locator";

/// Errors from [`FormatTag::new`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatTagError {
    #[error("format tag is empty")]
    Empty,
    #[error("format tag is not ASCII")]
    NotAscii,
    #[error("format tag is {0} bytes, limit is 255")]
    TooLong(usize),
}

/// A short ASCII label stating the data format a document's bytes are
/// interpreted in, e.g. `text/plain;charset=utf-8`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FormatTag(String);

impl FormatTag {
    /// Validates and wraps a tag: non-empty, ASCII, at most 255 bytes.
    pub fn new(tag: impl Into<String>) -> Result<Self, FormatTagError> {
        let tag = tag.into();
        if tag.is_empty() {
            return Err(FormatTagError::Empty);
        }
        if !tag.is_ascii() {
            return Err(FormatTagError::NotAscii);
        }
        if tag.len() > 255 {
            return Err(FormatTagError::TooLong(tag.len()));
        }
        Ok(FormatTag(tag))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The `charset=` parameter, lowercased, if the tag carries one.
    pub fn charset(&self) -> Option<String> {
        let lower = self.0.to_ascii_lowercase();
        let (_, rest) = lower.split_once("charset=")?;
        let value = rest.split(';').next().unwrap_or(rest).trim();
        (!value.is_empty()).then(|| value.to_string())
    }

    /// Whether the tagged format is textual, i.e. eligible for newline
    /// normalization. `text/*`, the hyx formats, and anything declaring a
    /// charset count as textual.
    pub fn is_textual(&self) -> bool {
        let lower = self.0.to_ascii_lowercase();
        lower.starts_with("text/")
            || lower.starts_with(FORMAT_EDIT_LIST)
            || lower.starts_with(FORMAT_LOCATOR)
            || self.charset().is_some()
    }
}

impl fmt::Display for FormatTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An immutable finite byte sequence, optionally tagged with a format.
///
/// The bytes are fixed at construction; the only way to "change" a
/// document is to make a new one. Equality covers bytes and tag, but the
/// identity used everywhere else is the digest of the bytes alone.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Document {
    bytes: Vec<u8>,
    format_tag: Option<FormatTag>,
}

impl Document {
    /// An untagged document over the given bytes.
    pub fn new(bytes: impl Into<Vec<u8>>) -> Self {
        Document {
            bytes: bytes.into(),
            format_tag: None,
        }
    }

    /// A document with a format tag.
    pub fn with_format(bytes: impl Into<Vec<u8>>, tag: FormatTag) -> Self {
        Document {
            bytes: bytes.into(),
            format_tag: Some(tag),
        }
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    pub fn format_tag(&self) -> Option<&FormatTag> {
        self.format_tag.as_ref()
    }

    /// Same bytes, different tag.
    pub fn retagged(&self, tag: Option<FormatTag>) -> Self {
        Document {
            bytes: self.bytes.clone(),
            format_tag: tag,
        }
    }

    /// The bytes as UTF-8 text, if they decode.
    pub fn as_text(&self) -> Option<&str> {
        std::str::from_utf8(&self.bytes).ok()
    }
}

impl AsRef<[u8]> for Document {
    fn as_ref(&self) -> &[u8] {
        &self.bytes
    }
}

impl fmt::Debug for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let preview: String = self
            .bytes
            .iter()
            .take(32)
            .map(|&b| {
                if b.is_ascii_graphic() || b == b' ' {
                    (b as char).to_string()
                } else {
                    format!("\\x{b:02x}")
                }
            })
            .collect();
        let ellipsis = if self.bytes.len() > 32 { "…" } else { "" };
        write!(
            f,
            "Document({} bytes: {preview:?}{ellipsis}",
            self.bytes.len()
        )?;
        if let Some(tag) = &self.format_tag {
            write!(f, ", {tag}")?;
        }
        write!(f, ")")
    }
}
