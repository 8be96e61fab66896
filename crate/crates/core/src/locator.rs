//! Content locators: selecting points and ranges inside documents.
//!
//! Locators use the text fragment syntax `char=N`, `char=N,M`, `line=N`,
//! `line=N,M` plus the extension scheme `byte=`. Positions are
//! interstitial: they sit *between* units, so 0 is before the first unit
//! and N is after the last of N units. A range `N,M` selects the units in
//! `[N, M)`; `char=0,0` is the empty range at the origin.
//!
//! How units are counted depends on the document's format:
//!
//! - `char` counts Unicode scalar values when the document is UTF-8
//!   (the default when no format tag is present), or bytes when the tag
//!   declares `charset=us-ascii`;
//! - `line` counts LF-terminated lines, with a final unterminated
//!   fragment counting as a line of its own;
//! - `byte` counts raw bytes and applies to any document.
//!
//! A locator/document pair is *selectable* when the document decodes in
//! its declared encoding and every position lies within range. Selection
//! and point resolution are total over selectable pairs: they never fail
//! on a pair `selectable` accepted.

use std::fmt;

use thiserror::Error;

use crate::document::Document;
use crate::resolve::{ResolveError, Resolver};
use crate::segment::Segment;

/// Locator schemes: the unit a locator's positions are counted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Char,
    Line,
    Byte,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Char => "char",
            Scheme::Line => "line",
            Scheme::Byte => "byte",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "char" => Some(Scheme::Char),
            "line" => Some(Scheme::Line),
            "byte" => Some(Scheme::Byte),
            _ => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A point between units, or a half-open range of units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Span {
    Point { at: u64 },
    Range { start: u64, end: u64 },
}

/// A parsed content locator: scheme plus point or range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Locator {
    scheme: Scheme,
    span: Span,
}

/// Errors from [`Locator::parse`] / [`parse_locator`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocatorParseError {
    #[error("empty locator")]
    Empty,
    #[error("locator is not ASCII")]
    NotAscii,
    #[error("missing '=' in locator expression")]
    MissingEquals,
    #[error("unknown locator scheme {0:?}")]
    UnknownScheme(String),
    #[error("position {0:?} is not an unsigned integer")]
    InvalidPosition(String),
    #[error("inverted range: start {start} exceeds end {end}")]
    Inverted { start: u64, end: u64 },
}

impl Locator {
    /// A point locator.
    pub fn point(scheme: Scheme, at: u64) -> Self {
        Locator {
            scheme,
            span: Span::Point { at },
        }
    }

    /// A range locator; `start` must not exceed `end`.
    pub fn range(scheme: Scheme, start: u64, end: u64) -> Result<Self, LocatorParseError> {
        if start > end {
            return Err(LocatorParseError::Inverted { start, end });
        }
        Ok(Locator {
            scheme,
            span: Span::Range { start, end },
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn span(&self) -> Span {
        self.span
    }

    pub fn is_range(&self) -> bool {
        matches!(self.span, Span::Range { .. })
    }

    pub fn is_point(&self) -> bool {
        matches!(self.span, Span::Point { .. })
    }

    /// Parses the textual form. Whitespace is not permitted anywhere in
    /// the expression.
    pub fn parse(text: &str) -> Result<Self, LocatorParseError> {
        if text.is_empty() {
            return Err(LocatorParseError::Empty);
        }
        if !text.is_ascii() {
            return Err(LocatorParseError::NotAscii);
        }
        let (scheme_name, rest) = text
            .split_once('=')
            .ok_or(LocatorParseError::MissingEquals)?;
        let scheme = Scheme::from_name(scheme_name)
            .ok_or_else(|| LocatorParseError::UnknownScheme(scheme_name.to_string()))?;
        match rest.split_once(',') {
            None => Ok(Locator::point(scheme, parse_position(rest)?)),
            Some((start, end)) => {
                Locator::range(scheme, parse_position(start)?, parse_position(end)?)
            }
        }
    }

    /// The locator as a document in locator syntax, tagged accordingly.
    pub fn to_document(&self) -> Document {
        Document::with_format(
            self.to_string().into_bytes(),
            crate::document::FormatTag::new(crate::document::FORMAT_LOCATOR).unwrap(),
        )
    }
}

fn parse_position(text: &str) -> Result<u64, LocatorParseError> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(LocatorParseError::InvalidPosition(text.to_string()));
    }
    text.parse()
        .map_err(|_| LocatorParseError::InvalidPosition(text.to_string()))
}

impl fmt::Display for Locator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Span::Point { at } => write!(f, "{}={at}", self.scheme),
            Span::Range { start, end } => write!(f, "{}={start},{end}", self.scheme),
        }
    }
}

/// Parses a locator document. The document's bytes must be ASCII.
pub fn parse_locator(doc: &Document) -> Result<Locator, LocatorParseError> {
    if !doc.bytes().is_ascii() {
        return Err(LocatorParseError::NotAscii);
    }
    // ASCII bytes always decode as UTF-8.
    Locator::parse(std::str::from_utf8(doc.bytes()).unwrap())
}

/// The bytes selected by applying a range locator to a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    bytes: Vec<u8>,
    unit_span: (u64, u64),
}

impl Selection {
    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    /// Unit positions `(start, end)` the selection covers, in the
    /// locator's own unit.
    pub fn unit_span(&self) -> (u64, u64) {
        self.unit_span
    }

    /// The selection as a document of its own.
    pub fn into_document(self) -> Document {
        Document::new(self.bytes)
    }
}

/// Errors from [`select_range`], [`resolve_point`], and [`transclude`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectError {
    #[error("locator {locator} is a {found} locator, expected a {expected}")]
    KindMismatch {
        locator: Locator,
        expected: &'static str,
        found: &'static str,
    },
    #[error("locator {locator} is not selectable in the target document")]
    NotSelectable { locator: Locator },
    #[error(transparent)]
    Resolve(#[from] ResolveError),
}

// Text interpretation of a document for char/line counting.
enum TextMode {
    Utf8,
    Ascii,
}

fn text_mode(doc: &Document) -> Option<TextMode> {
    match doc.format_tag().and_then(|t| t.charset()) {
        // No tag, or a tag without a charset parameter: UTF-8 by default.
        None => Some(TextMode::Utf8),
        Some(cs) => match cs.as_str() {
            "utf-8" | "utf8" => Some(TextMode::Utf8),
            "us-ascii" | "ascii" => Some(TextMode::Ascii),
            // A declared encoding we cannot interpret: char/line schemes
            // do not apply.
            _ => None,
        },
    }
}

/// Number of units in `doc` under `scheme`, or `None` when the document
/// cannot be interpreted in its declared text encoding.
pub fn unit_count(scheme: Scheme, doc: &Document) -> Option<u64> {
    let bytes = doc.bytes();
    match scheme {
        Scheme::Byte => Some(bytes.len() as u64),
        Scheme::Char => match text_mode(doc)? {
            TextMode::Ascii => bytes.is_ascii().then_some(bytes.len() as u64),
            TextMode::Utf8 => {
                let text = std::str::from_utf8(bytes).ok()?;
                Some(text.chars().count() as u64)
            }
        },
        Scheme::Line => {
            // Line counting still requires the document to be valid text.
            match text_mode(doc)? {
                TextMode::Ascii if !bytes.is_ascii() => return None,
                TextMode::Utf8 if std::str::from_utf8(bytes).is_err() => return None,
                _ => {}
            }
            let newlines = bytes.iter().filter(|&&b| b == b'\n').count() as u64;
            let unterminated_tail = !bytes.is_empty() && *bytes.last().unwrap() != b'\n';
            Some(newlines + u64::from(unterminated_tail))
        }
    }
}

// Byte offset of interstitial unit position `pos`. Assumes the document
// already passed interpretation; returns None when `pos` is out of range.
fn byte_offset(scheme: Scheme, doc: &Document, pos: u64) -> Option<usize> {
    let bytes = doc.bytes();
    match scheme {
        Scheme::Byte => (pos <= bytes.len() as u64).then_some(pos as usize),
        Scheme::Char => match text_mode(doc)? {
            TextMode::Ascii => (pos <= bytes.len() as u64).then_some(pos as usize),
            TextMode::Utf8 => {
                let text = std::str::from_utf8(bytes).ok()?;
                let pos = usize::try_from(pos).ok()?;
                text.char_indices()
                    .map(|(i, _)| i)
                    .chain(std::iter::once(text.len()))
                    .nth(pos)
            }
        },
        Scheme::Line => {
            if pos == 0 {
                return Some(0);
            }
            let mut line = 0u64;
            for (i, &b) in bytes.iter().enumerate() {
                if b == b'\n' {
                    line += 1;
                    if line == pos {
                        return Some(i + 1);
                    }
                }
            }
            // Position after the final, unterminated line.
            let count = unit_count(Scheme::Line, doc)?;
            (pos == count).then_some(bytes.len())
        }
    }
}

/// The membership test for locator/document pairs: true iff the locator's
/// positions lie within `[0, unit_count]` under its scheme and the
/// document decodes in its declared text encoding.
pub fn selectable(loc: &Locator, doc: &Document) -> bool {
    let Some(count) = unit_count(loc.scheme(), doc) else {
        return false;
    };
    match loc.span() {
        Span::Point { at } => at <= count,
        Span::Range { start, end } => start <= end && end <= count,
    }
}

// Byte range covered by a range locator. Shared by selection and the edit
// operations that splice on byte offsets.
pub(crate) fn byte_span(loc: &Locator, doc: &Document) -> Result<(usize, usize), SelectError> {
    let Span::Range { start, end } = loc.span() else {
        return Err(SelectError::KindMismatch {
            locator: *loc,
            expected: "range",
            found: "point",
        });
    };
    if !selectable(loc, doc) {
        return Err(SelectError::NotSelectable { locator: *loc });
    }
    let lo = byte_offset(loc.scheme(), doc, start)
        .expect("selectable range start maps to a byte offset");
    let hi =
        byte_offset(loc.scheme(), doc, end).expect("selectable range end maps to a byte offset");
    Ok((lo, hi))
}

/// Applies a range locator to a document, returning exactly the units in
/// `[start, end)` re-encoded as bytes.
pub fn select_range(loc: &Locator, doc: &Document) -> Result<Selection, SelectError> {
    let (lo, hi) = byte_span(loc, doc)?;
    let Span::Range { start, end } = loc.span() else {
        unreachable!("byte_span only accepts ranges");
    };
    Ok(Selection {
        bytes: doc.bytes()[lo..hi].to_vec(),
        unit_span: (start, end),
    })
}

/// Maps a point locator to the byte offset it denotes in the document.
pub fn resolve_point(loc: &Locator, doc: &Document) -> Result<usize, SelectError> {
    let Span::Point { at } = loc.span() else {
        return Err(SelectError::KindMismatch {
            locator: *loc,
            expected: "point",
            found: "range",
        });
    };
    if !selectable(loc, doc) {
        return Err(SelectError::NotSelectable { locator: *loc });
    }
    Ok(byte_offset(loc.scheme(), doc, at).expect("selectable point maps to a byte offset"))
}

/// The transclusion function: resolves a segment's document and returns
/// the selected bytes. The segment's locator must be a range.
pub fn transclude<R: Resolver>(seg: &Segment, resolver: &R) -> Result<Selection, SelectError> {
    let doc = resolver.resolve(seg.document())?;
    select_range(seg.locator(), &doc)
}
