//! Retrieval: mapping identifiers back to documents.

use std::collections::HashMap;

use thiserror::Error;

use crate::document::Document;
use crate::id::{compute_id, DocumentId};

/// Errors from [`Resolver::resolve`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("document {0} not found")]
    NotFound(DocumentId),
    #[error("retrieval of {id} failed: {reason}")]
    Failed { id: DocumentId, reason: String },
}

/// Maps identifiers to documents.
///
/// Implementations must give stable reads: within one assembly, resolving
/// the same identifier twice returns the same bytes. Content addressing
/// makes this automatic for digest-verified backends.
pub trait Resolver {
    fn resolve(&self, id: &DocumentId) -> Result<Document, ResolveError>;
}

impl<R: Resolver + ?Sized> Resolver for &R {
    fn resolve(&self, id: &DocumentId) -> Result<Document, ResolveError> {
        (**self).resolve(id)
    }
}

/// In-memory resolver backed by a map, keyed by the documents' own ids.
#[derive(Debug, Default, Clone)]
pub struct MemoryResolver {
    docs: HashMap<DocumentId, Document>,
}

impl MemoryResolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a document under the given algorithm's id and returns the id.
    pub fn insert(&mut self, doc: Document, algorithm: crate::id::HashAlgorithm) -> DocumentId {
        let id = compute_id(&doc, algorithm);
        self.docs.insert(id.clone(), doc);
        id
    }

    /// Adds a document under every supported algorithm and returns the
    /// SHA-1 id.
    pub fn insert_all_algorithms(&mut self, doc: Document) -> DocumentId {
        let sha1 = self.insert(doc.clone(), crate::id::HashAlgorithm::Sha1);
        self.insert(doc, crate::id::HashAlgorithm::Sha256);
        sha1
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

impl Resolver for MemoryResolver {
    fn resolve(&self, id: &DocumentId) -> Result<Document, ResolveError> {
        self.docs
            .get(id)
            .cloned()
            .ok_or_else(|| ResolveError::NotFound(id.clone()))
    }
}
