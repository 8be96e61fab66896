//! Persistent content-addressed object store.
//!
//! Objects live under `<root>/objects/<algo>/<first 2 hex>/<remaining hex>`
//! as raw bytes with no framing. A `config` file at `<root>/config` holds
//! `key=value` lines for the default algorithm and the normalization
//! policy. Writes go to a temporary file in the target directory and are
//! renamed into place, so concurrent writers race harmlessly and readers
//! never observe a partial object. Every read re-computes the digest and
//! fails loudly on mismatch instead of returning wrong bytes.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::document::Document;
use crate::id::{compute_id, DocumentId, HashAlgorithm};
use crate::resolve::{ResolveError, Resolver};

/// Newline normalization policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Store bytes exactly as given.
    #[default]
    None,
    /// Rewrite CRLF and lone CR to LF in textual documents.
    NewlineLf,
}

impl Normalization {
    pub fn name(self) -> &'static str {
        match self {
            Normalization::None => "none",
            Normalization::NewlineLf => "newline-lf",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "none" => Some(Normalization::None),
            "newline-lf" => Some(Normalization::NewlineLf),
            _ => None,
        }
    }
}

/// Store configuration, persisted in the `config` file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoreConfig {
    pub default_algorithm: HashAlgorithm,
    pub normalization: Normalization,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig {
            default_algorithm: HashAlgorithm::Sha256,
            normalization: Normalization::None,
        }
    }
}

/// Errors from store operations.
#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store at {0} is not initialized (missing config)")]
    NotInitialized(PathBuf),
    #[error("invalid store config: {0}")]
    Config(String),
    #[error("document {0} not found in store")]
    NotFound(DocumentId),
    #[error("object {id} is corrupt: stored bytes hash to {actual}")]
    Corrupt { id: DocumentId, actual: DocumentId },
    #[error("storage failure: {0}")]
    Io(#[from] io::Error),
}

/// Rewrites a document to its canonical form under the given policy.
///
/// `NewlineLf` turns CRLF and lone CR into LF, and only touches documents
/// that are textual: untagged documents or documents whose format tag
/// names a textual type. Tagged binary formats pass through unchanged.
/// Idempotent under both policies.
pub fn normalize(doc: &Document, policy: Normalization) -> Document {
    match policy {
        Normalization::None => doc.clone(),
        Normalization::NewlineLf => {
            let textual = doc.format_tag().is_none_or(|t| t.is_textual());
            if !textual || !doc.bytes().contains(&b'\r') {
                return doc.clone();
            }
            let mut out = Vec::with_capacity(doc.len());
            let mut iter = doc.bytes().iter().peekable();
            while let Some(&b) = iter.next() {
                if b == b'\r' {
                    if iter.peek() == Some(&&b'\n') {
                        iter.next();
                    }
                    out.push(b'\n');
                } else {
                    out.push(b);
                }
            }
            let tag = doc.format_tag().cloned();
            match tag {
                Some(t) => Document::with_format(out, t),
                None => Document::new(out),
            }
        }
    }
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// A content-addressed object store rooted at a directory.
#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    config: StoreConfig,
}

impl Store {
    /// Creates a store at `root`, writing its config file. The directory
    /// is created if needed; an existing config is an error.
    pub fn init(root: impl Into<PathBuf>, config: StoreConfig) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(root.join("objects"))?;
        let config_path = root.join("config");
        if config_path.exists() {
            return Err(StoreError::Config(format!(
                "store already initialized at {}",
                root.display()
            )));
        }
        let text = format!(
            "algorithm={}\nnormalization={}\n",
            config.default_algorithm.name(),
            config.normalization.name()
        );
        fs::write(&config_path, text)?;
        Ok(Store { root, config })
    }

    /// Opens an existing store, reading its config file.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        let config_path = root.join("config");
        if !config_path.exists() {
            return Err(StoreError::NotInitialized(root));
        }
        let text = fs::read_to_string(&config_path)?;
        let config = parse_config(&text)?;
        Ok(Store { root, config })
    }

    /// Opens the store at `root`, initializing it with `config` if absent.
    pub fn open_or_init(root: impl Into<PathBuf>, config: StoreConfig) -> Result<Self, StoreError> {
        let root = root.into();
        if root.join("config").exists() {
            Self::open(root)
        } else {
            Self::init(root, config)
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> &StoreConfig {
        &self.config
    }

    fn object_path(&self, id: &DocumentId) -> PathBuf {
        let hex = id.digest_hex();
        self.root
            .join("objects")
            .join(id.algorithm().name())
            .join(&hex[..2])
            .join(&hex[2..])
    }

    /// Normalizes, computes the id under the store's default algorithm,
    /// and persists the bytes. Idempotent: re-putting identical content
    /// returns the same id and leaves the stored object untouched.
    pub fn put(&self, doc: &Document) -> Result<DocumentId, StoreError> {
        self.put_with(doc, self.config.default_algorithm)
    }

    /// Like [`Store::put`] with an explicit algorithm.
    pub fn put_with(
        &self,
        doc: &Document,
        algorithm: HashAlgorithm,
    ) -> Result<DocumentId, StoreError> {
        let normalized = normalize(doc, self.config.normalization);
        let id = compute_id(&normalized, algorithm);
        let path = self.object_path(&id);
        if path.exists() {
            // Content addressing: an existing object with this id already
            // holds these bytes. Never rewrite.
            return Ok(id);
        }
        let dir = path.parent().expect("object path has a parent");
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!(
            ".tmp-{}-{}",
            std::process::id(),
            TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        let result = (|| {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(normalized.bytes())?;
            f.sync_all()?;
            fs::rename(&tmp, &path)
        })();
        if result.is_err() {
            let _ = fs::remove_file(&tmp);
        }
        result?;
        Ok(id)
    }

    /// Retrieves a document, verifying the digest of the stored bytes
    /// against the id before returning them.
    pub fn get(&self, id: &DocumentId) -> Result<Document, StoreError> {
        let path = self.object_path(id);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound(id.clone()));
            }
            Err(e) => return Err(e.into()),
        };
        let actual = compute_id(&bytes, id.algorithm());
        if actual != *id {
            return Err(StoreError::Corrupt {
                id: id.clone(),
                actual,
            });
        }
        Ok(Document::new(bytes))
    }

    /// Whether an object with this id is present (without verifying it).
    pub fn contains(&self, id: &DocumentId) -> bool {
        self.object_path(id).exists()
    }

    /// A read-only resolver view over the store. Objects are immutable
    /// once written, so reads are stable for the duration of any
    /// assembly.
    pub fn resolver_view(&self) -> StoreResolver<'_> {
        StoreResolver { store: self }
    }
}

fn parse_config(text: &str) -> Result<StoreConfig, StoreError> {
    let mut config = StoreConfig::default();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(StoreError::Config(format!(
                "line {}: expected key=value, got {line:?}",
                line_no + 1
            )));
        };
        match key.trim() {
            "algorithm" => {
                config.default_algorithm = HashAlgorithm::from_name(value.trim())
                    .ok_or_else(|| StoreError::Config(format!("unknown algorithm {value:?}")))?;
            }
            "normalization" => {
                config.normalization = Normalization::from_name(value.trim()).ok_or_else(|| {
                    StoreError::Config(format!("unknown normalization policy {value:?}"))
                })?;
            }
            other => {
                return Err(StoreError::Config(format!("unknown config key {other:?}")));
            }
        }
    }
    Ok(config)
}

/// Read-only resolver over a [`Store`].
#[derive(Debug, Clone, Copy)]
pub struct StoreResolver<'a> {
    store: &'a Store,
}

impl Resolver for StoreResolver<'_> {
    fn resolve(&self, id: &DocumentId) -> Result<Document, ResolveError> {
        self.store.get(id).map_err(|e| match e {
            StoreError::NotFound(id) => ResolveError::NotFound(id),
            other => ResolveError::Failed {
                id: id.clone(),
                reason: other.to_string(),
            },
        })
    }
}
