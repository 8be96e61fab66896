//! Edit lists: documents that describe how to build a new document from
//! parts of existing ones.
//!
//! # Format
//!
//! The format is line-oriented UTF-8. Leading and trailing whitespace on
//! each line is ignored, as are blank lines and lines starting with `#`.
//! An optional magic line `%hyx-edl 1` may open the document.
//!
//! ```text
//! %hyx-edl 1
//! take <ref>
//! insert at <ref>
//!   from <ref>
//!   segment <ref>
//! delete <ref>
//! replace <ref>
//!   from <ref>
//!   segment <ref>
//! ```
//!
//! A `<ref>` is a document identifier in canonical `<algo>:<hex>` form, a
//! bare 40-char SHA-1 hex digest, or a double-quoted inline literal with
//! `\"`, `\\`, `\n`, `\t` escapes. Inline literals stand for the document
//! holding exactly those bytes; they are identifier-equivalent to storing
//! the bytes and referencing the resulting id.
//!
//! # Semantics
//!
//! The first operation is always `take`, which loads the base document.
//! Every following operation edits the *current working document* in
//! order: `insert at` splices a segment of another document at a point
//! locator, `delete` removes a range, and `replace` substitutes a segment
//! for a range. Locators of later operations address the working document
//! as left by the operations before them, not the original base.
//!
//! Assembly is pure: the output depends only on the edit list and the
//! resolved bytes, so a list assembles to the same document for as long
//! as its references resolve to the same content.

use std::fmt;

use thiserror::Error;

use crate::document::{Document, FormatTag, FORMAT_EDIT_LIST};
use crate::id::{compute_id, parse_id, DocumentId, HashAlgorithm, ParseIdError};
use crate::locator::{
    byte_span, parse_locator, resolve_point, select_range, Locator, LocatorParseError, SelectError,
};
use crate::resolve::{ResolveError, Resolver};
use crate::segment::{LinkKind, LinkSet, Segment};

/// A reference to a document: by identifier, or embedded inline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ref {
    Id(DocumentId),
    Inline(Vec<u8>),
}

impl Ref {
    /// The id this reference denotes; inline bytes are identified under
    /// the given algorithm, exactly as if they had been stored.
    pub fn document_id(&self, algorithm: HashAlgorithm) -> DocumentId {
        match self {
            Ref::Id(id) => id.clone(),
            Ref::Inline(bytes) => compute_id(bytes, algorithm),
        }
    }

    fn describe(&self) -> String {
        match self {
            Ref::Id(id) => id.to_string(),
            Ref::Inline(bytes) => format!("inline ({} bytes)", bytes.len()),
        }
    }
}

/// One edit operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EditOp {
    /// Load the base document the list edits.
    Take { base: Ref },
    /// Splice `segment` of `from` into the working document at point `at`.
    Insert { at: Ref, from: Ref, segment: Ref },
    /// Remove a range of the working document.
    Delete { range: Ref },
    /// Substitute `segment` of `from` for range `at` of the working document.
    Replace { at: Ref, from: Ref, segment: Ref },
}

impl EditOp {
    pub fn keyword(&self) -> &'static str {
        match self {
            EditOp::Take { .. } => "take",
            EditOp::Insert { .. } => "insert",
            EditOp::Delete { .. } => "delete",
            EditOp::Replace { .. } => "replace",
        }
    }

    fn refs(&self) -> Vec<&Ref> {
        match self {
            EditOp::Take { base } => vec![base],
            EditOp::Insert { at, from, segment } | EditOp::Replace { at, from, segment } => {
                vec![at, from, segment]
            }
            EditOp::Delete { range } => vec![range],
        }
    }
}

/// Structural invariant violations of an edit list value.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvalidEditList {
    #[error("edit list contains no operations")]
    Empty,
    #[error("the first operation must be take")]
    MissingTake,
    #[error("more than one take operation")]
    DuplicateTake,
    #[error("inline literal of {len} bytes exceeds the {max}-byte cap")]
    InlineTooLarge { len: usize, max: usize },
}

/// A parsed edit list: a `take` followed by zero or more edits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditList {
    ops: Vec<EditOp>,
}

impl EditList {
    /// Default cap on inline literal size.
    pub const DEFAULT_MAX_INLINE: usize = 64 * 1024;

    /// Builds an edit list from operations, checking the structural
    /// invariants: at least one op, `take` first and only once, inline
    /// literals within the default cap.
    pub fn new(ops: Vec<EditOp>) -> Result<Self, InvalidEditList> {
        if ops.is_empty() {
            return Err(InvalidEditList::Empty);
        }
        if !matches!(ops[0], EditOp::Take { .. }) {
            return Err(InvalidEditList::MissingTake);
        }
        if ops[1..].iter().any(|op| matches!(op, EditOp::Take { .. })) {
            return Err(InvalidEditList::DuplicateTake);
        }
        for op in &ops {
            for r in op.refs() {
                if let Ref::Inline(bytes) = r {
                    if bytes.len() > Self::DEFAULT_MAX_INLINE {
                        return Err(InvalidEditList::InlineTooLarge {
                            len: bytes.len(),
                            max: Self::DEFAULT_MAX_INLINE,
                        });
                    }
                }
            }
        }
        Ok(EditList { ops })
    }

    pub fn ops(&self) -> &[EditOp] {
        &self.ops
    }

    /// The base reference of the opening `take`.
    pub fn base(&self) -> &Ref {
        match &self.ops[0] {
            EditOp::Take { base } => base,
            _ => unreachable!("validated: first op is take"),
        }
    }

    /// Parses an edit-list document with default limits.
    pub fn parse(doc: &Document) -> Result<Self, EditListParseError> {
        parse_edit_list(doc)
    }

    /// Canonical rendering: magic line, one keyword per line, two-space
    /// indented `from`/`segment` continuation lines.
    ///
    /// Fails if an inline literal is not valid UTF-8, which the text
    /// format cannot express.
    pub fn render(&self) -> Result<String, RenderError> {
        let mut out = String::from("%hyx-edl 1\n");
        for (op_index, op) in self.ops.iter().enumerate() {
            match op {
                EditOp::Take { base } => {
                    out.push_str("take ");
                    render_ref(base, op_index, &mut out)?;
                    out.push('\n');
                }
                EditOp::Insert { at, from, segment } => {
                    out.push_str("insert at ");
                    render_ref(at, op_index, &mut out)?;
                    out.push_str("\n  from ");
                    render_ref(from, op_index, &mut out)?;
                    out.push_str("\n  segment ");
                    render_ref(segment, op_index, &mut out)?;
                    out.push('\n');
                }
                EditOp::Delete { range } => {
                    out.push_str("delete ");
                    render_ref(range, op_index, &mut out)?;
                    out.push('\n');
                }
                EditOp::Replace { at, from, segment } => {
                    out.push_str("replace ");
                    render_ref(at, op_index, &mut out)?;
                    out.push_str("\n  from ");
                    render_ref(from, op_index, &mut out)?;
                    out.push_str("\n  segment ");
                    render_ref(segment, op_index, &mut out)?;
                    out.push('\n');
                }
            }
        }
        Ok(out)
    }

    /// The edit list as a document, tagged with the edit-list format.
    pub fn to_document(&self) -> Result<Document, RenderError> {
        Ok(Document::with_format(
            self.render()?.into_bytes(),
            FormatTag::new(FORMAT_EDIT_LIST).unwrap(),
        ))
    }
}

/// Errors from [`EditList::render`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("inline literal in op {op_index} is not valid UTF-8 and cannot be rendered")]
    BinaryInline { op_index: usize },
}

fn render_ref(r: &Ref, op_index: usize, out: &mut String) -> Result<(), RenderError> {
    match r {
        Ref::Id(id) => out.push_str(&id.to_string()),
        Ref::Inline(bytes) => {
            let text =
                std::str::from_utf8(bytes).map_err(|_| RenderError::BinaryInline { op_index })?;
            out.push('"');
            for c in text.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    c => out.push(c),
                }
            }
            out.push('"');
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Errors parsing a single `<ref>`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefParseError {
    #[error("empty reference")]
    Empty,
    #[error(transparent)]
    Id(#[from] ParseIdError),
    #[error("unterminated string literal")]
    Unterminated,
    #[error("unsupported escape sequence \\{0}")]
    BadEscape(char),
    #[error("unexpected characters after reference")]
    TrailingJunk,
}

/// What went wrong on a given line of an edit-list document.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditListParseErrorKind {
    #[error("edit list is not valid UTF-8")]
    NotUtf8,
    #[error("unknown keyword {0:?}")]
    UnknownKeyword(String),
    #[error("unsupported edit-list version {0:?}")]
    UnsupportedVersion(String),
    #[error("magic line is only allowed before the first operation")]
    MisplacedMagic,
    #[error("'insert' must be followed by 'at'")]
    ExpectedAt,
    #[error("{keyword} is missing its {missing} line")]
    Dangling {
        keyword: &'static str,
        missing: &'static str,
    },
    #[error("{got:?} line cannot appear here (expected {expected})")]
    UnexpectedContinuation { got: String, expected: &'static str },
    #[error("malformed reference: {0}")]
    Ref(#[from] RefParseError),
    #[error(transparent)]
    Invalid(#[from] InvalidEditList),
}

/// A parse failure with the 1-based line it occurred on.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct EditListParseError {
    pub line: usize,
    pub kind: EditListParseErrorKind,
}

/// Parser limits.
#[derive(Debug, Clone, Copy)]
pub struct ParseLimits {
    /// Maximum size of one inline literal, in bytes.
    pub max_inline_len: usize,
}

impl Default for ParseLimits {
    fn default() -> Self {
        ParseLimits {
            max_inline_len: EditList::DEFAULT_MAX_INLINE,
        }
    }
}

/// Parses an edit-list document with default limits.
pub fn parse_edit_list(doc: &Document) -> Result<EditList, EditListParseError> {
    parse_edit_list_with(doc, ParseLimits::default())
}

// Continuation state while a multi-line op is being collected.
enum Pending {
    None,
    NeedFrom {
        keyword: &'static str,
        line: usize,
        at: Ref,
    },
    NeedSegment {
        keyword: &'static str,
        line: usize,
        at: Ref,
        from: Ref,
    },
}

impl Pending {
    fn expected(&self) -> Option<(&'static str, usize, &'static str)> {
        match self {
            Pending::None => None,
            Pending::NeedFrom { keyword, line, .. } => Some((keyword, *line, "from")),
            Pending::NeedSegment { keyword, line, .. } => Some((keyword, *line, "segment")),
        }
    }
}

/// Parses an edit-list document with explicit limits.
pub fn parse_edit_list_with(
    doc: &Document,
    limits: ParseLimits,
) -> Result<EditList, EditListParseError> {
    let text = std::str::from_utf8(doc.bytes()).map_err(|e| {
        let line = doc.bytes()[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1;
        EditListParseError {
            line,
            kind: EditListParseErrorKind::NotUtf8,
        }
    })?;

    let err = |line: usize, kind: EditListParseErrorKind| EditListParseError { line, kind };
    let parse_ref = |line: usize, text: &str| -> Result<Ref, EditListParseError> {
        let r = parse_ref_text(text).map_err(|e| err(line, e.into()))?;
        if let Ref::Inline(bytes) = &r {
            if bytes.len() > limits.max_inline_len {
                return Err(err(
                    line,
                    InvalidEditList::InlineTooLarge {
                        len: bytes.len(),
                        max: limits.max_inline_len,
                    }
                    .into(),
                ));
            }
        }
        Ok(r)
    };

    let mut ops: Vec<EditOp> = Vec::new();
    let mut pending = Pending::None;
    let mut seen_significant = false;
    let mut last_line = 0;

    for (line_no, raw) in text.split('\n').enumerate() {
        let line_no = line_no + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }

        let (keyword, rest) = split_word(line);

        if keyword == "%hyx-edl" {
            if seen_significant {
                return Err(err(line_no, EditListParseErrorKind::MisplacedMagic));
            }
            seen_significant = true;
            if rest != "1" {
                return Err(err(
                    line_no,
                    EditListParseErrorKind::UnsupportedVersion(rest.to_string()),
                ));
            }
            continue;
        }
        seen_significant = true;

        // Continuation lines for a pending insert/replace.
        match (keyword, std::mem::replace(&mut pending, Pending::None)) {
            ("from", Pending::NeedFrom { keyword, line, at }) => {
                pending = Pending::NeedSegment {
                    keyword,
                    line,
                    at,
                    from: parse_ref(line_no, rest)?,
                };
                continue;
            }
            (
                "segment",
                Pending::NeedSegment {
                    keyword, at, from, ..
                },
            ) => {
                let segment = parse_ref(line_no, rest)?;
                ops.push(match keyword {
                    "insert" => EditOp::Insert { at, from, segment },
                    _ => EditOp::Replace { at, from, segment },
                });
                continue;
            }
            ("from" | "segment", Pending::None) => {
                return Err(err(
                    line_no,
                    EditListParseErrorKind::UnexpectedContinuation {
                        got: keyword.to_string(),
                        expected: "an insert or replace operation",
                    },
                ));
            }
            ("from", p @ Pending::NeedSegment { .. })
            | ("segment", p @ Pending::NeedFrom { .. }) => {
                let (_, _, expected) = p.expected().unwrap();
                return Err(err(
                    line_no,
                    EditListParseErrorKind::UnexpectedContinuation {
                        got: keyword.to_string(),
                        expected,
                    },
                ));
            }
            (_, p) => {
                // A new primary op while a continuation is outstanding.
                if let Some((kw, kw_line, missing)) = p.expected() {
                    return Err(err(
                        kw_line,
                        EditListParseErrorKind::Dangling {
                            keyword: kw,
                            missing,
                        },
                    ));
                }
            }
        }

        match keyword {
            "take" => {
                let base = parse_ref(line_no, rest)?;
                if !ops.is_empty() {
                    return Err(err(line_no, InvalidEditList::DuplicateTake.into()));
                }
                ops.push(EditOp::Take { base });
            }
            "insert" => {
                let (at_word, after_at) = split_word(rest);
                if at_word != "at" {
                    return Err(err(line_no, EditListParseErrorKind::ExpectedAt));
                }
                if ops.is_empty() {
                    return Err(err(line_no, InvalidEditList::MissingTake.into()));
                }
                pending = Pending::NeedFrom {
                    keyword: "insert",
                    line: line_no,
                    at: parse_ref(line_no, after_at)?,
                };
            }
            "replace" => {
                if ops.is_empty() {
                    return Err(err(line_no, InvalidEditList::MissingTake.into()));
                }
                pending = Pending::NeedFrom {
                    keyword: "replace",
                    line: line_no,
                    at: parse_ref(line_no, rest)?,
                };
            }
            "delete" => {
                if ops.is_empty() {
                    return Err(err(line_no, InvalidEditList::MissingTake.into()));
                }
                ops.push(EditOp::Delete {
                    range: parse_ref(line_no, rest)?,
                });
            }
            other => {
                return Err(err(
                    line_no,
                    EditListParseErrorKind::UnknownKeyword(other.to_string()),
                ));
            }
        }
    }

    if let Some((kw, kw_line, missing)) = pending.expected() {
        return Err(err(
            kw_line,
            EditListParseErrorKind::Dangling {
                keyword: kw,
                missing,
            },
        ));
    }
    if ops.is_empty() {
        return Err(err(last_line, InvalidEditList::MissingTake.into()));
    }
    // Structure was enforced during the walk; the constructor re-checks.
    EditList::new(ops).map_err(|e| err(last_line, e.into()))
}

// Splits off the first whitespace-delimited word; the remainder is
// trimmed so inline literals keep their interior spacing.
fn split_word(line: &str) -> (&str, &str) {
    match line.find(char::is_whitespace) {
        Some(i) => (&line[..i], line[i..].trim()),
        None => (line, ""),
    }
}

fn parse_ref_text(text: &str) -> Result<Ref, RefParseError> {
    if text.is_empty() {
        return Err(RefParseError::Empty);
    }
    if let Some(rest) = text.strip_prefix('"') {
        let mut bytes = Vec::new();
        let mut chars = rest.chars();
        loop {
            match chars.next() {
                None => return Err(RefParseError::Unterminated),
                Some('"') => break,
                Some('\\') => {
                    let escaped = chars.next().ok_or(RefParseError::Unterminated)?;
                    match escaped {
                        '"' => bytes.push(b'"'),
                        '\\' => bytes.push(b'\\'),
                        'n' => bytes.push(b'\n'),
                        't' => bytes.push(b'\t'),
                        other => return Err(RefParseError::BadEscape(other)),
                    }
                }
                Some(c) => {
                    let mut buf = [0u8; 4];
                    bytes.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
                }
            }
        }
        if chars.next().is_some() {
            return Err(RefParseError::TrailingJunk);
        }
        Ok(Ref::Inline(bytes))
    } else {
        if text.chars().any(char::is_whitespace) {
            return Err(RefParseError::TrailingJunk);
        }
        Ok(Ref::Id(parse_id(text)?))
    }
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

/// Which reference of an operation an error or report entry concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefRole {
    Base,
    InsertAt,
    ReplaceAt,
    DeleteRange,
    From,
    Segment,
}

impl RefRole {
    pub fn name(self) -> &'static str {
        match self {
            RefRole::Base => "base",
            RefRole::InsertAt => "insert-at",
            RefRole::ReplaceAt => "replace-at",
            RefRole::DeleteRange => "delete-range",
            RefRole::From => "from",
            RefRole::Segment => "segment",
        }
    }
}

impl fmt::Display for RefRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Why an assembly aborted.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssembleErrorKind {
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error("locator document does not parse: {0}")]
    LocatorParse(#[from] LocatorParseError),
    #[error(transparent)]
    Select(SelectError),
}

/// Assembly failure, pinpointing the operation and reference at fault.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("op {op_index} ({role}): {kind}")]
pub struct AssembleError {
    pub op_index: usize,
    pub role: RefRole,
    pub kind: AssembleErrorKind,
}

impl AssembleError {
    fn new(op_index: usize, role: RefRole, kind: AssembleErrorKind) -> Self {
        AssembleError {
            op_index,
            role,
            kind,
        }
    }

    fn select(op_index: usize, role: RefRole, e: SelectError) -> Self {
        // Surface resolution failures uniformly.
        let kind = match e {
            SelectError::Resolve(r) => AssembleErrorKind::Resolve(r),
            other => AssembleErrorKind::Select(other),
        };
        AssembleError {
            op_index,
            role,
            kind,
        }
    }
}

fn resolve_doc_ref<R: Resolver>(r: &Ref, resolver: &R) -> Result<Document, ResolveError> {
    match r {
        Ref::Id(id) => resolver.resolve(id),
        Ref::Inline(bytes) => Ok(Document::new(bytes.clone())),
    }
}

fn locator_of<R: Resolver>(
    r: &Ref,
    resolver: &R,
    op_index: usize,
    role: RefRole,
) -> Result<Locator, AssembleError> {
    let doc =
        resolve_doc_ref(r, resolver).map_err(|e| AssembleError::new(op_index, role, e.into()))?;
    parse_locator(&doc).map_err(|e| AssembleError::new(op_index, role, e.into()))
}

fn splice(doc: Document, range: std::ops::Range<usize>, insert: &[u8]) -> Document {
    let tag = doc.format_tag().cloned();
    let mut bytes = doc.into_bytes();
    bytes.splice(range, insert.iter().copied());
    match tag {
        Some(t) => Document::with_format(bytes, t),
        None => Document::new(bytes),
    }
}

// Segments consumed during a traced assembly.
struct Trace {
    algorithm: HashAlgorithm,
    records: Vec<(Segment, LinkRole)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum LinkRole {
    // Locator over the document being edited.
    BaseEdit,
    // Segment pulled out of a source document.
    Source,
}

fn run<R: Resolver>(
    list: &EditList,
    resolver: &R,
    mut trace: Option<&mut Trace>,
) -> Result<Document, AssembleError> {
    let ops = list.ops();
    let EditOp::Take { base } = &ops[0] else {
        unreachable!("validated: first op is take");
    };
    let mut working = resolve_doc_ref(base, resolver)
        .map_err(|e| AssembleError::new(0, RefRole::Base, e.into()))?;

    // Intermediate working documents are identified under the base id's
    // algorithm; an inline base falls back to the trace's algorithm.
    let working_algo = match (base, &trace) {
        (Ref::Id(id), _) => id.algorithm(),
        (Ref::Inline(_), Some(t)) => t.algorithm,
        (Ref::Inline(_), None) => HashAlgorithm::Sha256,
    };
    let mut current_id = match base {
        Ref::Id(id) => Some(id.clone()),
        Ref::Inline(_) => None,
    };

    for (op_index, op) in ops.iter().enumerate().skip(1) {
        // The id of the working document as this op sees it.
        let base_side_id = |working: &Document, current_id: &mut Option<DocumentId>| {
            current_id
                .get_or_insert_with(|| compute_id(working, working_algo))
                .clone()
        };
        match op {
            EditOp::Take { .. } => unreachable!("validated: single take"),
            EditOp::Insert { at, from, segment } => {
                let at_loc = locator_of(at, resolver, op_index, RefRole::InsertAt)?;
                let offset = resolve_point(&at_loc, &working)
                    .map_err(|e| AssembleError::select(op_index, RefRole::InsertAt, e))?;
                let from_doc = resolve_doc_ref(from, resolver)
                    .map_err(|e| AssembleError::new(op_index, RefRole::From, e.into()))?;
                let seg_loc = locator_of(segment, resolver, op_index, RefRole::Segment)?;
                let selection = select_range(&seg_loc, &from_doc)
                    .map_err(|e| AssembleError::select(op_index, RefRole::Segment, e))?;
                if let Some(t) = trace.as_deref_mut() {
                    let cur = base_side_id(&working, &mut current_id);
                    t.records
                        .push((Segment::new_unchecked(at_loc, cur), LinkRole::BaseEdit));
                    t.records.push((
                        Segment::new_unchecked(seg_loc, from.document_id(t.algorithm)),
                        LinkRole::Source,
                    ));
                }
                working = splice(working, offset..offset, selection.bytes());
                current_id = None;
            }
            EditOp::Delete { range } => {
                let loc = locator_of(range, resolver, op_index, RefRole::DeleteRange)?;
                let (lo, hi) = byte_span(&loc, &working)
                    .map_err(|e| AssembleError::select(op_index, RefRole::DeleteRange, e))?;
                if let Some(t) = trace.as_deref_mut() {
                    let cur = base_side_id(&working, &mut current_id);
                    t.records
                        .push((Segment::new_unchecked(loc, cur), LinkRole::BaseEdit));
                }
                working = splice(working, lo..hi, &[]);
                current_id = None;
            }
            EditOp::Replace { at, from, segment } => {
                let at_loc = locator_of(at, resolver, op_index, RefRole::ReplaceAt)?;
                let (lo, hi) = byte_span(&at_loc, &working)
                    .map_err(|e| AssembleError::select(op_index, RefRole::ReplaceAt, e))?;
                let from_doc = resolve_doc_ref(from, resolver)
                    .map_err(|e| AssembleError::new(op_index, RefRole::From, e.into()))?;
                let seg_loc = locator_of(segment, resolver, op_index, RefRole::Segment)?;
                let selection = select_range(&seg_loc, &from_doc)
                    .map_err(|e| AssembleError::select(op_index, RefRole::Segment, e))?;
                if let Some(t) = trace.as_deref_mut() {
                    let cur = base_side_id(&working, &mut current_id);
                    t.records
                        .push((Segment::new_unchecked(at_loc, cur), LinkRole::BaseEdit));
                    t.records.push((
                        Segment::new_unchecked(seg_loc, from.document_id(t.algorithm)),
                        LinkRole::Source,
                    ));
                }
                working = splice(working, lo..hi, selection.bytes());
                current_id = None;
            }
        }
    }
    Ok(working)
}

/// The assemble function: applies the edit list left to right and returns
/// the resulting document.
///
/// Pure given a resolver snapshot: the output depends only on the list
/// and the resolved bytes.
pub fn assemble<R: Resolver>(list: &EditList, resolver: &R) -> Result<Document, AssembleError> {
    run(list, resolver, None)
}

/// The segments usage function: the set of ⟨locator, document⟩ pairs the
/// assembly of `list` consumes.
///
/// For every insert/replace this is the pair of the at-locator with the
/// document being edited plus the pair of the segment locator with its
/// source; for every delete, the deleted range over the document being
/// edited. Inline documents and intermediate working states are
/// identified under `algorithm` (intermediates under the base id's
/// algorithm when the base is given by id).
pub fn usage<R: Resolver>(
    list: &EditList,
    resolver: &R,
    algorithm: HashAlgorithm,
) -> Result<LinkSet, AssembleError> {
    let mut trace = Trace {
        algorithm,
        records: Vec::new(),
    };
    run(list, resolver, Some(&mut trace))?;
    Ok(trace.records.into_iter().map(|(seg, _)| seg).collect())
}

/// Usage annotated into hyperlinks: segments over the edited document
/// become versioning links, segments from source documents become
/// transclusion links, and every link records the assembled `result`.
pub fn derive_links<R: Resolver>(
    list: &EditList,
    resolver: &R,
    algorithm: HashAlgorithm,
    result: &DocumentId,
) -> Result<LinkSet, AssembleError> {
    let mut trace = Trace {
        algorithm,
        records: Vec::new(),
    };
    run(list, resolver, Some(&mut trace))?;
    let mut links = LinkSet::new();
    for (segment, role) in trace.records {
        let kind = match role {
            LinkRole::BaseEdit => LinkKind::Versioning,
            LinkRole::Source => LinkKind::Transclusion,
        };
        links.insert_annotated(segment, Some(kind), Some(result.clone()));
    }
    Ok(links)
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

/// Outcome of one verification check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStatus {
    Ok,
    Unresolved(String),
    Unparseable(String),
    WrongKind { expected: &'static str },
    NotSelectable,
    Skipped(String),
}

impl CheckStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, CheckStatus::Ok)
    }
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckStatus::Ok => write!(f, "ok"),
            CheckStatus::Unresolved(reason) => write!(f, "UNRESOLVED ({reason})"),
            CheckStatus::Unparseable(reason) => write!(f, "UNPARSEABLE ({reason})"),
            CheckStatus::WrongKind { expected } => write!(f, "WRONG KIND (expected {expected})"),
            CheckStatus::NotSelectable => write!(f, "UNSELECTABLE"),
            CheckStatus::Skipped(reason) => write!(f, "SKIPPED ({reason})"),
        }
    }
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyEntry {
    pub op_index: usize,
    pub role: RefRole,
    pub subject: String,
    pub status: CheckStatus,
}

impl fmt::Display for VerifyEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "op {} {:<12} {} — {}",
            self.op_index,
            self.role.name(),
            self.subject,
            self.status
        )
    }
}

/// A dry-run integrity report over an edit list: every reference's
/// resolution status and every locator's selectability, without
/// producing output bytes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerifyReport {
    pub entries: Vec<VerifyEntry>,
}

impl VerifyReport {
    /// True when every check passed.
    pub fn ok(&self) -> bool {
        self.entries.iter().all(|e| e.status.is_ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerifyEntry> {
        self.entries.iter().filter(|e| !e.status.is_ok())
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for entry in &self.entries {
            writeln!(f, "{entry}")?;
        }
        write!(
            f,
            "{} checks, {} failed",
            self.entries.len(),
            self.failures().count()
        )
    }
}

enum LocatorUse {
    Point,
    Range,
}

/// Dry-runs an edit list: checks that every reference resolves and every
/// locator is selectable where it will be applied. Never fails; failures
/// are carried in the report.
///
/// Checks that depend on an earlier failed step (for example
/// selectability over a working document whose base did not resolve) are
/// reported as skipped.
pub fn verify<R: Resolver>(list: &EditList, resolver: &R) -> VerifyReport {
    let mut report = VerifyReport::default();
    let mut entry = |op_index: usize, role: RefRole, subject: String, status: CheckStatus| {
        report.entries.push(VerifyEntry {
            op_index,
            role,
            subject,
            status,
        });
    };

    // The working document, as far as it can be tracked. None once an op
    // could not be applied.
    let mut state: Option<Document> = None;

    // Resolve a document ref, recording the outcome.
    let check_doc = |entry: &mut dyn FnMut(usize, RefRole, String, CheckStatus),
                     op_index: usize,
                     role: RefRole,
                     r: &Ref|
     -> Option<Document> {
        match resolve_doc_ref(r, resolver) {
            Ok(d) => {
                entry(op_index, role, r.describe(), CheckStatus::Ok);
                Some(d)
            }
            Err(e) => {
                entry(
                    op_index,
                    role,
                    r.describe(),
                    CheckStatus::Unresolved(e.to_string()),
                );
                None
            }
        }
    };

    // Resolve and parse a locator ref, then check it against a target
    // document when one is available.
    let check_locator = |entry: &mut dyn FnMut(usize, RefRole, String, CheckStatus),
                         op_index: usize,
                         role: RefRole,
                         r: &Ref,
                         target: Option<&Document>,
                         use_as: LocatorUse|
     -> Option<Locator> {
        let subject = r.describe();
        let loc_doc = match resolve_doc_ref(r, resolver) {
            Ok(d) => d,
            Err(e) => {
                entry(
                    op_index,
                    role,
                    subject,
                    CheckStatus::Unresolved(e.to_string()),
                );
                return None;
            }
        };
        let loc = match parse_locator(&loc_doc) {
            Ok(l) => l,
            Err(e) => {
                entry(
                    op_index,
                    role,
                    subject,
                    CheckStatus::Unparseable(e.to_string()),
                );
                return None;
            }
        };
        let subject = loc.to_string();
        let kind_ok = match use_as {
            LocatorUse::Point => loc.is_point(),
            LocatorUse::Range => loc.is_range(),
        };
        if !kind_ok {
            let expected = match use_as {
                LocatorUse::Point => "point",
                LocatorUse::Range => "range",
            };
            entry(op_index, role, subject, CheckStatus::WrongKind { expected });
            return None;
        }
        let Some(target) = target else {
            entry(
                op_index,
                role,
                subject,
                CheckStatus::Skipped("target document unavailable".into()),
            );
            return None;
        };
        if crate::locator::selectable(&loc, target) {
            entry(op_index, role, subject, CheckStatus::Ok);
            Some(loc)
        } else {
            entry(op_index, role, subject, CheckStatus::NotSelectable);
            None
        }
    };

    for (op_index, op) in list.ops().iter().enumerate() {
        match op {
            EditOp::Take { base } => {
                state = check_doc(&mut entry, op_index, RefRole::Base, base);
            }
            EditOp::Insert { at, from, segment } => {
                let at_loc = check_locator(
                    &mut entry,
                    op_index,
                    RefRole::InsertAt,
                    at,
                    state.as_ref(),
                    LocatorUse::Point,
                );
                let from_doc = check_doc(&mut entry, op_index, RefRole::From, from);
                let seg_loc = check_locator(
                    &mut entry,
                    op_index,
                    RefRole::Segment,
                    segment,
                    from_doc.as_ref(),
                    LocatorUse::Range,
                );
                state = match (state.take(), at_loc, from_doc, seg_loc) {
                    (Some(working), Some(at_loc), Some(from_doc), Some(seg_loc)) => {
                        let offset =
                            resolve_point(&at_loc, &working).expect("checked selectable point");
                        let sel =
                            select_range(&seg_loc, &from_doc).expect("checked selectable range");
                        Some(splice(working, offset..offset, sel.bytes()))
                    }
                    _ => None,
                };
            }
            EditOp::Delete { range } => {
                let loc = check_locator(
                    &mut entry,
                    op_index,
                    RefRole::DeleteRange,
                    range,
                    state.as_ref(),
                    LocatorUse::Range,
                );
                state = match (state.take(), loc) {
                    (Some(working), Some(loc)) => {
                        let (lo, hi) = byte_span(&loc, &working).expect("checked selectable range");
                        Some(splice(working, lo..hi, &[]))
                    }
                    _ => None,
                };
            }
            EditOp::Replace { at, from, segment } => {
                let at_loc = check_locator(
                    &mut entry,
                    op_index,
                    RefRole::ReplaceAt,
                    at,
                    state.as_ref(),
                    LocatorUse::Range,
                );
                let from_doc = check_doc(&mut entry, op_index, RefRole::From, from);
                let seg_loc = check_locator(
                    &mut entry,
                    op_index,
                    RefRole::Segment,
                    segment,
                    from_doc.as_ref(),
                    LocatorUse::Range,
                );
                state = match (state.take(), at_loc, from_doc, seg_loc) {
                    (Some(working), Some(at_loc), Some(from_doc), Some(seg_loc)) => {
                        let (lo, hi) =
                            byte_span(&at_loc, &working).expect("checked selectable range");
                        let sel =
                            select_range(&seg_loc, &from_doc).expect("checked selectable range");
                        Some(splice(working, lo..hi, sel.bytes()))
                    }
                    _ => None,
                };
            }
        }
    }
    report
}
