//! Document segments and the link sets derived from edit lists.
//!
//! A segment pairs a locator with the document it applies to. Segments
//! are only constructed after the pair passes the selectability test, so
//! holding a `Segment` means the combination was valid against the
//! resolver it was checked with.

use std::collections::BTreeMap;
use std::fmt;

use crate::document::Document;
use crate::id::DocumentId;
use crate::locator::{selectable, Locator, SelectError};
use crate::resolve::Resolver;

/// A locator applied to a specific document; the element type of link
/// sets and the input to transclusion.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segment {
    locator: Locator,
    document: DocumentId,
}

impl Segment {
    /// Builds a segment, resolving the document and checking that the
    /// locator is selectable in it.
    pub fn new<R: Resolver>(
        locator: Locator,
        document: DocumentId,
        resolver: &R,
    ) -> Result<Self, SelectError> {
        let doc = resolver.resolve(&document)?;
        Self::validated(locator, document, &doc)
    }

    /// Builds a segment against an already-resolved document.
    pub fn validated(
        locator: Locator,
        document: DocumentId,
        doc: &Document,
    ) -> Result<Self, SelectError> {
        if !selectable(&locator, doc) {
            return Err(SelectError::NotSelectable { locator });
        }
        Ok(Segment { locator, document })
    }

    // For engine code that has just performed the selectability check
    // itself.
    pub(crate) fn new_unchecked(locator: Locator, document: DocumentId) -> Self {
        Segment { locator, document }
    }

    pub fn locator(&self) -> &Locator {
        &self.locator
    }

    pub fn document(&self) -> &DocumentId {
        &self.document
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{}, {}⟩", self.locator, self.document)
    }
}

/// How a derived link relates its segment to the assembled document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LinkKind {
    /// The segment's bytes appear in the result by reference.
    Transclusion,
    /// The segment marks where the edited document diverges from its base.
    Versioning,
    /// A bare position link with no range semantics.
    Point,
}

impl LinkKind {
    pub fn name(self) -> &'static str {
        match self {
            LinkKind::Transclusion => "transclusion",
            LinkKind::Versioning => "versioning",
            LinkKind::Point => "point",
        }
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One entry of a [`LinkSet`]: a segment with optional annotations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub segment: Segment,
    pub kind: Option<LinkKind>,
    /// The assembled document this link was derived for, when known.
    pub result: Option<DocumentId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Annotations {
    kind: Option<LinkKind>,
    result: Option<DocumentId>,
}

/// A finite set of segments, each optionally annotated with a link kind
/// and the derived result document.
///
/// Set semantics are over the ⟨locator, document⟩ pair: inserting a
/// duplicate pair keeps the first entry's annotations. Iteration order is
/// deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinkSet {
    entries: BTreeMap<Segment, Annotations>,
}

impl LinkSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts an unannotated segment. Returns false if the pair was
    /// already present.
    pub fn insert(&mut self, segment: Segment) -> bool {
        self.insert_annotated(segment, None, None)
    }

    /// Inserts a segment with annotations; a duplicate pair is ignored.
    pub fn insert_annotated(
        &mut self,
        segment: Segment,
        kind: Option<LinkKind>,
        result: Option<DocumentId>,
    ) -> bool {
        use std::collections::btree_map::Entry;
        match self.entries.entry(segment) {
            Entry::Occupied(_) => false,
            Entry::Vacant(v) => {
                v.insert(Annotations { kind, result });
                true
            }
        }
    }

    pub fn contains(&self, segment: &Segment) -> bool {
        self.entries.contains_key(segment)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Link> + '_ {
        self.entries.iter().map(|(segment, a)| Link {
            segment: segment.clone(),
            kind: a.kind,
            result: a.result.clone(),
        })
    }

    /// The segments alone, without annotations.
    pub fn segments(&self) -> impl Iterator<Item = &Segment> + '_ {
        self.entries.keys()
    }

    /// Compares only the ⟨locator, document⟩ pairs of two sets.
    pub fn same_segments(&self, other: &LinkSet) -> bool {
        self.entries.len() == other.entries.len()
            && self
                .entries
                .keys()
                .zip(other.entries.keys())
                .all(|(a, b)| a == b)
    }
}

impl FromIterator<Segment> for LinkSet {
    fn from_iter<T: IntoIterator<Item = Segment>>(iter: T) -> Self {
        let mut set = LinkSet::new();
        for seg in iter {
            set.insert(seg);
        }
        set
    }
}
