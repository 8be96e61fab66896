//! Content-addressed hypertext engine.
//!
//! Documents are immutable byte sequences identified by digests of their
//! content. Content locators select points and ranges inside documents,
//! and edit lists assemble new documents out of segments of existing
//! ones — exposing, as a by-product, the hyperlinks that the assembly
//! implies.
//!
//! The moving parts:
//!
//! - [`Document`]: a finite byte sequence, optionally tagged with a format.
//! - [`DocumentId`]: an algorithm-tagged digest with the canonical textual
//!   form `<algo>:<lowercase-hex>`; computed by [`compute_id`], parsed by
//!   [`parse_id`]. Identifiers are themselves documents.
//! - [`Locator`]: a parsed `char=`/`line=`/`byte=` fragment expression;
//!   [`selectable`] tests a locator against a document, [`transclude`]
//!   extracts the selected bytes.
//! - [`EditList`]: a `take` plus a sequence of `insert at`/`delete`/
//!   `replace` operations; [`assemble`] produces the output document,
//!   [`usage`] the set of segments consumed, [`derive_links`] the
//!   annotated hyperlinks, and [`verify`] a dry-run integrity report.
//! - [`Store`]: a persistent content-addressed object store with
//!   digest-verified reads; its [`Store::resolver_view`] feeds assembly.
//!
//! Everything except the store is a pure function over immutable values
//! and safe to use from any number of threads.
//!
//! ```
//! use hyx_core::{assemble, parse_edit_list, Document, HashAlgorithm, MemoryResolver};
//!
//! let mut docs = MemoryResolver::new();
//! let base = docs.insert(Document::new(&b"Hello, !"[..]), HashAlgorithm::Sha1);
//! let name = docs.insert(Document::new(&b"My name is Alice"[..]), HashAlgorithm::Sha1);
//!
//! let text = format!(
//!     "take {base}\ninsert at \"char=7\"\n  from {name}\n  segment \"char=11,16\"\n"
//! );
//! let list = parse_edit_list(&Document::new(text.into_bytes())).unwrap();
//! let out = assemble(&list, &docs).unwrap();
//! assert_eq!(out.bytes(), b"Hello, Alice!");
//! ```

pub mod document;
pub mod editlist;
pub mod id;
pub mod locator;
pub mod resolve;
pub mod segment;
pub mod store;

pub use document::{Document, FormatTag, FormatTagError, FORMAT_EDIT_LIST, FORMAT_LOCATOR};
pub use editlist::{
    assemble, derive_links, parse_edit_list, parse_edit_list_with, usage, verify, AssembleError,
    AssembleErrorKind, CheckStatus, EditList, EditListParseError, EditListParseErrorKind, EditOp,
    InvalidEditList, ParseLimits, Ref, RefParseError, RefRole, RenderError, VerifyEntry,
    VerifyReport,
};
pub use id::{compute_id, parse_id, DocumentId, HashAlgorithm, ParseIdError};
pub use locator::{
    parse_locator, resolve_point, select_range, selectable, transclude, unit_count, Locator,
    LocatorParseError, Scheme, SelectError, Selection, Span,
};
pub use resolve::{MemoryResolver, ResolveError, Resolver};
pub use segment::{Link, LinkKind, LinkSet, Segment};
pub use store::{normalize, Normalization, Store, StoreConfig, StoreError, StoreResolver};
