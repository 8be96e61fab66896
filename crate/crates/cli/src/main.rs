//! `hyx` — a command-line tool for content-addressed hypertext.
//!
//! Documents go into a local object store under ids derived from their
//! bytes. Edit lists assemble new documents out of segments of stored
//! ones; `links` makes the implied hyperlinks visible. `serve` and
//! `fetch` move documents between stores over HTTP with digest
//! verification on the receiving side.
//!
//! Exit codes: 0 on success, 1 on domain errors (not found, parse or
//! verification failure), 2 on usage errors.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use hyx_core::{
    assemble, compute_id, derive_links, normalize, parse_edit_list, parse_id, verify, Document,
    EditList, HashAlgorithm, Locator, Store, StoreConfig, StoreError,
};
use hyx_net::{fetch_verified, serve, RemoteSource};

#[derive(Parser)]
#[command(
    name = "hyx",
    version,
    about = "Content-addressed hypertext: store, transclude, assemble, link"
)]
struct Cli {
    /// Store directory (default: $HYX_STORE, or ./.hyx)
    #[arg(long, global = true, value_name = "PATH")]
    store: Option<PathBuf>,

    /// Hash algorithm for new ids (default: the store's configured one)
    #[arg(long, global = true, value_enum)]
    algo: Option<AlgoArg>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Sha1,
    Sha256,
}

impl From<AlgoArg> for HashAlgorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Sha1 => HashAlgorithm::Sha1,
            AlgoArg::Sha256 => HashAlgorithm::Sha256,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Store a document and print its id
    Add {
        /// Input file, or `-` for standard input
        #[arg(value_name = "FILE")]
        input: String,
    },
    /// Write a stored document's raw bytes to standard output
    Cat {
        #[arg(value_name = "ID")]
        id: String,
    },
    /// Compute a document's id without storing it
    Id {
        /// Input file, or `-` for standard input
        #[arg(value_name = "FILE")]
        input: String,
    },
    /// Apply a range locator to a stored document and print the selection
    Select {
        #[arg(value_name = "DOC-ID")]
        doc_id: String,
        /// Locator expression, e.g. `char=11,16`
        #[arg(value_name = "LOCATOR")]
        locator: String,
    },
    /// Assemble an edit list and print the result
    Assemble {
        /// Edit-list file path, or the id of a stored edit list
        #[arg(value_name = "EDITLIST")]
        editlist: String,
        /// Write the assembled bytes to a file instead of standard output
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Store the result and print its id instead of the bytes
        #[arg(long)]
        put: bool,
    },
    /// Print the hyperlinks an edit list implies, one per line
    Links {
        /// Edit-list file path, or the id of a stored edit list
        #[arg(value_name = "EDITLIST")]
        editlist: String,
        /// Store the assembled result and append `-> <result-id>` to each link
        #[arg(long)]
        put: bool,
    },
    /// Dry-run an edit list: check that every reference and locator is usable
    Verify {
        /// Edit-list file path, or the id of a stored edit list
        #[arg(value_name = "EDITLIST")]
        editlist: String,
    },
    /// Serve the store read-only over HTTP
    Serve {
        /// Address to bind, e.g. `127.0.0.1:8000`
        #[arg(long, value_name = "HOST:PORT")]
        bind: String,
    },
    /// Fetch a document from a remote endpoint into the store, verifying its digest
    Fetch {
        #[arg(value_name = "BASE-URL")]
        base_url: String,
        #[arg(value_name = "ID")]
        id: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn store_path(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("HYX_STORE").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("./.hyx"))
}

fn open_or_init_store(path: &Path, algo: Option<HashAlgorithm>) -> Result<Store> {
    let config = StoreConfig {
        default_algorithm: algo.unwrap_or(HashAlgorithm::Sha256),
        ..StoreConfig::default()
    };
    Store::open_or_init(path, config)
        .with_context(|| format!("opening store at {}", path.display()))
}

fn read_input(input: &str) -> Result<Vec<u8>> {
    if input == "-" {
        let mut bytes = Vec::new();
        std::io::stdin()
            .read_to_end(&mut bytes)
            .context("reading standard input")?;
        Ok(bytes)
    } else {
        std::fs::read(input).with_context(|| format!("reading {input}"))
    }
}

fn write_raw(bytes: &[u8]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)?;
    out.flush()?;
    Ok(())
}

// An edit-list argument names a file when one exists at that path,
// otherwise it is parsed as the id of a stored edit list.
fn load_edit_list(arg: &str, store: &Store) -> Result<EditList> {
    let doc = if Path::new(arg).exists() {
        Document::new(std::fs::read(arg).with_context(|| format!("reading {arg}"))?)
    } else {
        let id = parse_id(arg)
            .map_err(|e| anyhow!("{arg:?} is neither an existing file nor a document id: {e}"))?;
        store.get(&id)?
    };
    parse_edit_list(&doc).map_err(|e| anyhow!("parsing edit list: {e}"))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let path = store_path(cli.store);
    let algo_flag: Option<HashAlgorithm> = cli.algo.map(Into::into);

    match cli.command {
        Command::Add { input } => {
            let bytes = read_input(&input)?;
            let store = open_or_init_store(&path, algo_flag)?;
            let algo = algo_flag.unwrap_or(store.config().default_algorithm);
            let id = store.put_with(&Document::new(bytes), algo)?;
            println!("{id}");
        }
        Command::Cat { id } => {
            let store = open_or_init_store(&path, algo_flag)?;
            let id = parse_id(&id)?;
            let doc = store.get(&id)?;
            write_raw(doc.bytes())?;
        }
        Command::Id { input } => {
            let bytes = read_input(&input)?;
            // Mirror what `add` would do, without touching or creating
            // the store.
            let config = match Store::open(&path) {
                Ok(store) => *store.config(),
                Err(StoreError::NotInitialized(_)) => StoreConfig::default(),
                Err(e) => return Err(e.into()),
            };
            let algo = algo_flag.unwrap_or(config.default_algorithm);
            let doc = normalize(&Document::new(bytes), config.normalization);
            println!("{}", compute_id(&doc, algo));
        }
        Command::Select { doc_id, locator } => {
            let store = open_or_init_store(&path, algo_flag)?;
            let id = parse_id(&doc_id)?;
            let doc = store.get(&id)?;
            let loc = Locator::parse(&locator).map_err(|e| anyhow!("locator: {e}"))?;
            let selection = hyx_core::select_range(&loc, &doc)?;
            write_raw(selection.bytes())?;
        }
        Command::Assemble { editlist, out, put } => {
            let store = open_or_init_store(&path, algo_flag)?;
            let list = load_edit_list(&editlist, &store)?;
            let result = assemble(&list, &store.resolver_view())?;
            if let Some(out_path) = &out {
                std::fs::write(out_path, result.bytes())
                    .with_context(|| format!("writing {}", out_path.display()))?;
            }
            if put {
                let algo = algo_flag.unwrap_or(store.config().default_algorithm);
                let id = store.put_with(&result, algo)?;
                println!("{id}");
            } else if out.is_none() {
                write_raw(result.bytes())?;
            }
        }
        Command::Links { editlist, put } => {
            let store = open_or_init_store(&path, algo_flag)?;
            let list = load_edit_list(&editlist, &store)?;
            let resolver = store.resolver_view();
            let algo = algo_flag.unwrap_or(store.config().default_algorithm);
            let result = assemble(&list, &resolver)?;
            let result_id = if put {
                store.put_with(&result, algo)?
            } else {
                compute_id(&result, algo)
            };
            let links = derive_links(&list, &resolver, algo, &result_id)?;
            let mut out = String::new();
            for link in links.iter() {
                let kind = link.kind.map(|k| k.name()).unwrap_or("link");
                out.push_str(&format!(
                    "{kind} {} {}",
                    link.segment.locator(),
                    link.segment.document()
                ));
                if put {
                    out.push_str(&format!(" -> {result_id}"));
                }
                out.push('\n');
            }
            write_raw(out.as_bytes())?;
        }
        Command::Verify { editlist } => {
            let store = open_or_init_store(&path, algo_flag)?;
            let list = load_edit_list(&editlist, &store)?;
            let report = verify(&list, &store.resolver_view());
            println!("{report}");
            if !report.ok() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Serve { bind } => {
            let store = open_or_init_store(&path, algo_flag)?;
            let root = store.root().display().to_string();
            let server = serve(Arc::new(store), &bind).map_err(|e| anyhow!("{e}"))?;
            eprintln!(
                "serving {root} read-only at http://{}/docs/<id>",
                server.local_addr()
            );
            loop {
                std::thread::park();
            }
        }
        Command::Fetch { base_url, id } => {
            let store = open_or_init_store(&path, algo_flag)?;
            let id = parse_id(&id)?;
            let source = RemoteSource::new(base_url);
            fetch_verified(&source, &id, &store)?;
            println!("{id}");
        }
    }
    Ok(ExitCode::SUCCESS)
}
