//! Content-based document identifiers.
//!
//! An identifier is a hash algorithm tag plus the digest of a document's
//! raw bytes. Canonical textual form is `<algo>:<lowercase-hex>`, e.g.
//! `sha1:` followed by 40 hex characters. A bare 40-hex-char string
//! parses as a SHA-1 identifier for compatibility with untagged hashes
//! in existing edit lists.
//!
//! Identifiers are themselves representable as documents (the canonical
//! form as ASCII bytes), so everything that holds for documents holds
//! for identifiers too.

use std::fmt;
use std::str::FromStr;

use sha1::Sha1;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::document::Document;

/// Supported digest algorithms.
///
/// SHA-1 is kept for compatibility with existing untagged identifiers;
/// SHA-256 is the default for new content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HashAlgorithm {
    Sha1,
    Sha256,
}

impl HashAlgorithm {
    /// Digest length in bytes.
    pub fn digest_len(self) -> usize {
        match self {
            HashAlgorithm::Sha1 => 20,
            HashAlgorithm::Sha256 => 32,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HashAlgorithm::Sha1 => "sha1",
            HashAlgorithm::Sha256 => "sha256",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sha1" => Some(HashAlgorithm::Sha1),
            "sha256" => Some(HashAlgorithm::Sha256),
            _ => None,
        }
    }
}

impl fmt::Display for HashAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Errors from [`parse_id`] and [`DocumentId::new`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseIdError {
    #[error("empty identifier")]
    Empty,
    #[error("malformed identifier: expected <algo>:<hex> or a bare 40-char SHA-1 hex digest")]
    Malformed,
    #[error("unknown hash algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("malformed digest: expected lowercase hex")]
    InvalidHex,
    #[error("wrong digest length for {algorithm}: expected {expected} bytes, found {found}")]
    WrongDigestLength {
        algorithm: HashAlgorithm,
        expected: usize,
        found: usize,
    },
}

/// A content-based identifier: algorithm tag plus digest.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocumentId {
    algorithm: HashAlgorithm,
    digest: Vec<u8>,
}

impl DocumentId {
    /// Wraps a raw digest, checking its length against the algorithm.
    pub fn new(algorithm: HashAlgorithm, digest: Vec<u8>) -> Result<Self, ParseIdError> {
        if digest.len() != algorithm.digest_len() {
            return Err(ParseIdError::WrongDigestLength {
                algorithm,
                expected: algorithm.digest_len(),
                found: digest.len(),
            });
        }
        Ok(DocumentId { algorithm, digest })
    }

    pub fn algorithm(&self) -> HashAlgorithm {
        self.algorithm
    }

    pub fn digest(&self) -> &[u8] {
        &self.digest
    }

    /// Lowercase hex rendering of the digest alone.
    pub fn digest_hex(&self) -> String {
        hex::encode(&self.digest)
    }

    /// The identifier as a document: canonical form as ASCII bytes.
    pub fn to_document(&self) -> Document {
        Document::new(self.to_string().into_bytes())
    }
}

impl fmt::Display for DocumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.algorithm, self.digest_hex())
    }
}

impl FromStr for DocumentId {
    type Err = ParseIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_id(s)
    }
}

/// Computes the identifier of a byte sequence under the given algorithm.
///
/// Only the raw bytes are hashed; a document's format tag never
/// contributes. Deterministic by construction.
pub fn compute_id(bytes: impl AsRef<[u8]>, algorithm: HashAlgorithm) -> DocumentId {
    let bytes = bytes.as_ref();
    let digest = match algorithm {
        HashAlgorithm::Sha1 => Sha1::digest(bytes).to_vec(),
        HashAlgorithm::Sha256 => Sha256::digest(bytes).to_vec(),
    };
    DocumentId { algorithm, digest }
}

/// Parses the canonical `<algo>:<lowercase-hex>` form, or a bare
/// 40-hex-char string as SHA-1.
pub fn parse_id(text: &str) -> Result<DocumentId, ParseIdError> {
    if text.is_empty() {
        return Err(ParseIdError::Empty);
    }
    let (algorithm, hex_part) = match text.split_once(':') {
        Some((algo, rest)) => {
            let algorithm = HashAlgorithm::from_name(algo)
                .ok_or_else(|| ParseIdError::UnknownAlgorithm(algo.to_string()))?;
            (algorithm, rest)
        }
        None => {
            if text.len() != 40 {
                return Err(ParseIdError::Malformed);
            }
            (HashAlgorithm::Sha1, text)
        }
    };
    if !hex_part
        .bytes()
        .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
    {
        return Err(ParseIdError::InvalidHex);
    }
    let digest = hex::decode(hex_part).map_err(|_| ParseIdError::InvalidHex)?;
    DocumentId::new(algorithm, digest)
}
