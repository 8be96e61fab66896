//! Acceptance suite: one test per acceptance criterion, each printing a
//! PASS line (run with `--nocapture` to see them).
//!
//! Expected values are either checked against independent oracles
//! implemented in this file (a standalone SHA-1, a character-splice
//! model) or frozen after being computed by such an oracle. The oracles
//! deliberately share no code with the implementation under test.

use std::sync::Arc;
use std::time::{Duration, Instant};

use hyx_core::{
    assemble, compute_id, parse_edit_list, select_range, unit_count, usage, Document, EditList,
    EditOp, HashAlgorithm, Locator, MemoryResolver, Normalization, Ref, Scheme, Segment, Store,
    StoreConfig, StoreError,
};
use hyx_net::{fetch_verified, serve, FetchError, RemoteSource};
use tempfile::TempDir;

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

// Standalone SHA-1, implemented from the standard algorithm description.
// This is the authoritative reference the implementation is checked
// against; it shares no code with the sha1 crate used by hyx-core.
fn sha1_oracle(data: &[u8]) -> [u8; 20] {
    let mut h: [u32; 5] = [0x67452301, 0xEFCDAB89, 0x98BADCFE, 0x10325476, 0xC3D2E1F0];
    let bit_len = (data.len() as u64).wrapping_mul(8);
    let mut msg = data.to_vec();
    msg.push(0x80);
    while msg.len() % 64 != 56 {
        msg.push(0);
    }
    msg.extend_from_slice(&bit_len.to_be_bytes());

    for chunk in msg.chunks_exact(64) {
        let mut w = [0u32; 80];
        for (i, word) in chunk.chunks_exact(4).enumerate() {
            w[i] = u32::from_be_bytes(word.try_into().unwrap());
        }
        for i in 16..80 {
            w[i] = (w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16]).rotate_left(1);
        }
        let (mut a, mut b, mut c, mut d, mut e) = (h[0], h[1], h[2], h[3], h[4]);
        for (i, &wi) in w.iter().enumerate() {
            let (f, k) = match i {
                0..=19 => ((b & c) | (!b & d), 0x5A827999u32),
                20..=39 => (b ^ c ^ d, 0x6ED9EBA1),
                40..=59 => ((b & c) | (b & d) | (c & d), 0x8F1BBCDC),
                _ => (b ^ c ^ d, 0xCA62C1D6),
            };
            let temp = a
                .rotate_left(5)
                .wrapping_add(f)
                .wrapping_add(e)
                .wrapping_add(k)
                .wrapping_add(wi);
            e = d;
            d = c;
            c = b.rotate_left(30);
            b = a;
            a = temp;
        }
        h[0] = h[0].wrapping_add(a);
        h[1] = h[1].wrapping_add(b);
        h[2] = h[2].wrapping_add(c);
        h[3] = h[3].wrapping_add(d);
        h[4] = h[4].wrapping_add(e);
    }

    let mut out = [0u8; 20];
    for (i, word) in h.iter().enumerate() {
        out[i * 4..i * 4 + 4].copy_from_slice(&word.to_be_bytes());
    }
    out
}

fn sha1_oracle_hex(data: &[u8]) -> String {
    sha1_oracle(data)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

// Character-splice model: the brute-force way one would compute these
// edits on paper.
fn splice_chars(text: &str, start: usize, end: usize, insert: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out: String = chars[..start].iter().collect();
    out.push_str(insert);
    out.extend(chars[end..].iter());
    out
}

// SplitMix64: small deterministic generator so failures reproduce.
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n.max(1)
    }

    fn ascii(&mut self, max_len: u64) -> String {
        let len = self.below(max_len + 1);
        (0..len)
            .map(|_| (32 + self.below(95)) as u8 as char)
            .collect()
    }

    fn bytes(&mut self, max_len: u64) -> Vec<u8> {
        let len = self.below(max_len + 1);
        (0..len).map(|_| self.below(256) as u8).collect()
    }
}

fn inline(text: &str) -> Ref {
    Ref::Inline(text.as_bytes().to_vec())
}

fn text_doc(text: &str) -> Document {
    Document::new(text.as_bytes().to_vec())
}

fn sha1_store(dir: &TempDir, name: &str) -> Store {
    Store::init(
        dir.path().join(name),
        StoreConfig {
            default_algorithm: HashAlgorithm::Sha1,
            normalization: Normalization::None,
        },
    )
    .unwrap()
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

/// Golden transclusion: inserting the segment `char=11,16` of
/// "My name is Alice" into "Hello, !" at `char=7` yields exactly
/// "Hello, Alice!".
#[test]
fn criterion_1_golden_assembly() {
    let started = Instant::now();

    let dir = TempDir::new().unwrap();
    let store = sha1_store(&dir, "golden");
    let d1 = store.put(&text_doc("My name is Alice")).unwrap();
    let d3 = store.put(&text_doc("Hello, !")).unwrap();
    let c2 = store.put(&text_doc("char=7")).unwrap();
    let c1 = store.put(&text_doc("char=11,16")).unwrap();

    let list_text = format!(
        "take {}\ninsert at {}\n  from {}\n  segment {}\n",
        d3.digest_hex(),
        c2.digest_hex(),
        d1.digest_hex(),
        c1.digest_hex()
    );
    let list = parse_edit_list(&text_doc(&list_text)).unwrap();
    let out = assemble(&list, &store.resolver_view()).unwrap();

    assert_eq!(out.bytes(), b"Hello, Alice!", "byte-exact assembly");
    assert_eq!(out.len(), 13);
    assert!(
        started.elapsed() < Duration::from_secs(1),
        "golden assembly must finish within 1s"
    );
    println!("ACCEPTANCE golden assembly -> 'Hello, Alice!' (13 bytes): PASS");
}

/// SHA-1 conformance over the four fixture strings, with the independent
/// oracle in this file as the authority. One of the four values carried
/// by the legacy fixture does not match real SHA-1; the oracle wins and
/// the mismatch is reported.
#[test]
fn criterion_2_hash_conformance() {
    let cases: [(&str, &str); 4] = [
        ("Hello, !", "995f37f2e066b7d8893873ca4d780da5bf017184"),
        ("char=7", "48ba94c47b45390b6dd27824cfc0d8468c2cbc71"),
        (
            "My name is Alice",
            "fcb59267e2e6641140578235c8cb6d38eaf6abc1",
        ),
        ("char=11,15", "c5b794c7ae5d490f52a414d9d19311b9a19f61b3"),
    ];

    // The oracle proves itself against the standard empty-input vector.
    assert_eq!(
        sha1_oracle_hex(b""),
        "da39a3ee5e6b4b0d3255bfef95601890afd80709"
    );

    let mut mismatches = Vec::new();
    for (input, claimed) in cases {
        let oracle = sha1_oracle_hex(input.as_bytes());
        let implementation = compute_id(input, HashAlgorithm::Sha1).digest_hex();
        // The implementation must agree with the authoritative oracle.
        assert_eq!(
            implementation, oracle,
            "implementation disagrees with the independent SHA-1 oracle on {input:?}"
        );
        if oracle != claimed {
            mismatches.push((input, claimed, oracle));
        }
    }

    // Three of the four fixture values are real SHA-1 digests; the take
    // ref is not the digest of its document text. Frozen here after
    // checking with the system sha1sum as a second independent oracle.
    assert_eq!(mismatches.len(), 1, "exactly one fixture value mismatches");
    let (input, claimed, oracle) = &mismatches[0];
    assert_eq!(*input, "Hello, !");
    assert_eq!(
        *oracle, "b5a83a5c3f71a52bccd3a1a5bde266da2e30ac04",
        "oracle-computed SHA-1 of 'Hello, !'"
    );
    println!(
        "ACCEPTANCE hash conformance (oracle authoritative): PASS \
         [reported mismatch: fixture claims sha1({input:?}) = {claimed}, oracle says {oracle}]"
    );
}

/// usage() of the fixture list is exactly the two ⟨locator, document⟩
/// pairs: the insertion point over the base and the segment over the
/// source.
#[test]
fn criterion_3_usage_conformance() {
    let mut resolver = MemoryResolver::new();
    let d1 = resolver.insert(text_doc("My name is Alice"), HashAlgorithm::Sha1);
    let d3 = resolver.insert(text_doc("Hello, !"), HashAlgorithm::Sha1);
    let c2 = resolver.insert(text_doc("char=7"), HashAlgorithm::Sha1);
    let c1 = resolver.insert(text_doc("char=11,15"), HashAlgorithm::Sha1);

    let list = EditList::new(vec![
        EditOp::Take {
            base: Ref::Id(d3.clone()),
        },
        EditOp::Insert {
            at: Ref::Id(c2),
            from: Ref::Id(d1.clone()),
            segment: Ref::Id(c1),
        },
    ])
    .unwrap();

    let got = usage(&list, &resolver, HashAlgorithm::Sha1).unwrap();
    let expected: hyx_core::LinkSet = [
        Segment::new(Locator::parse("char=7").unwrap(), d3, &resolver).unwrap(),
        Segment::new(Locator::parse("char=11,15").unwrap(), d1, &resolver).unwrap(),
    ]
    .into_iter()
    .collect();

    assert_eq!(got.len(), 2);
    assert_eq!(got, expected);
    println!("ACCEPTANCE usage conformance (two pairs, exact): PASS");
}

/// 500 random single-insert and single-delete lists over random ASCII
/// documents assemble identically to the brute-force splice oracle.
#[test]
fn criterion_4_oracle_equivalence_500_lists() {
    let started = Instant::now();
    let resolver = MemoryResolver::new();
    let mut rng = Rng(0x5EED_0001);

    for case in 0..500u32 {
        let base = rng.ascii(200);
        let n = base.chars().count();
        let (list, expected) = if case % 2 == 0 {
            let src = rng.ascii(200);
            let m = src.chars().count();
            let at = rng.below(n as u64 + 1) as usize;
            let (mut lo, mut hi) = (
                rng.below(m as u64 + 1) as usize,
                rng.below(m as u64 + 1) as usize,
            );
            if lo > hi {
                std::mem::swap(&mut lo, &mut hi);
            }
            let list = EditList::new(vec![
                EditOp::Take {
                    base: inline(&base),
                },
                EditOp::Insert {
                    at: inline(&format!("char={at}")),
                    from: inline(&src),
                    segment: inline(&format!("char={lo},{hi}")),
                },
            ])
            .unwrap();
            (list, splice_chars(&base, at, at, &src[lo..hi]))
        } else {
            let (mut lo, mut hi) = (
                rng.below(n as u64 + 1) as usize,
                rng.below(n as u64 + 1) as usize,
            );
            if lo > hi {
                std::mem::swap(&mut lo, &mut hi);
            }
            let list = EditList::new(vec![
                EditOp::Take {
                    base: inline(&base),
                },
                EditOp::Delete {
                    range: inline(&format!("char={lo},{hi}")),
                },
            ])
            .unwrap();
            (list, splice_chars(&base, lo, hi, ""))
        };

        let got = assemble(&list, &resolver).unwrap();
        assert_eq!(
            got.bytes(),
            expected.as_bytes(),
            "case {case}: engine output diverges from splice oracle"
        );
    }

    assert!(
        started.elapsed() < Duration::from_secs(10),
        "500 oracle comparisons must finish within 10s"
    );
    println!("ACCEPTANCE oracle equivalence (500 random lists, exact): PASS");
}

/// For 200 random multi-op lists, the pairs recorded by an independently
/// instrumented model assembly equal usage(e) exactly. The model computes
/// every document id with the test-side SHA-1 oracle.
#[test]
fn criterion_5_usage_assembly_consistency_200_lists() {
    let resolver = MemoryResolver::new();
    let mut rng = Rng(0x5EED_0002);
    let oracle_id = |text: &str| format!("sha1:{}", sha1_oracle_hex(text.as_bytes()));

    for case in 0..200u32 {
        let base = rng.ascii(80);
        let op_count = rng.below(5) as usize;

        let mut ops = vec![EditOp::Take {
            base: inline(&base),
        }];
        let mut text = base.clone();
        let mut expected: std::collections::BTreeSet<(String, String)> =
            std::collections::BTreeSet::new();

        for _ in 0..op_count {
            let n = text.chars().count() as u64;
            match rng.below(3) {
                0 => {
                    let src = rng.ascii(30);
                    let m = src.chars().count() as u64;
                    let at = rng.below(n + 1) as usize;
                    let (mut lo, mut hi) = (rng.below(m + 1) as usize, rng.below(m + 1) as usize);
                    if lo > hi {
                        std::mem::swap(&mut lo, &mut hi);
                    }
                    let at_loc = format!("char={at}");
                    let seg_loc = format!("char={lo},{hi}");
                    expected.insert((at_loc.clone(), oracle_id(&text)));
                    expected.insert((seg_loc.clone(), oracle_id(&src)));
                    ops.push(EditOp::Insert {
                        at: inline(&at_loc),
                        from: inline(&src),
                        segment: inline(&seg_loc),
                    });
                    text = splice_chars(&text, at, at, &src[lo..hi]);
                }
                1 => {
                    let (mut lo, mut hi) = (rng.below(n + 1) as usize, rng.below(n + 1) as usize);
                    if lo > hi {
                        std::mem::swap(&mut lo, &mut hi);
                    }
                    let loc = format!("char={lo},{hi}");
                    expected.insert((loc.clone(), oracle_id(&text)));
                    ops.push(EditOp::Delete {
                        range: inline(&loc),
                    });
                    text = splice_chars(&text, lo, hi, "");
                }
                _ => {
                    let src = rng.ascii(30);
                    let m = src.chars().count() as u64;
                    let (mut lo, mut hi) = (rng.below(n + 1) as usize, rng.below(n + 1) as usize);
                    if lo > hi {
                        std::mem::swap(&mut lo, &mut hi);
                    }
                    let s_lo = rng.below(m + 1) as usize;
                    let at_loc = format!("char={lo},{hi}");
                    let seg_loc = format!("char={s_lo},{m}");
                    expected.insert((at_loc.clone(), oracle_id(&text)));
                    expected.insert((seg_loc.clone(), oracle_id(&src)));
                    ops.push(EditOp::Replace {
                        at: inline(&at_loc),
                        from: inline(&src),
                        segment: inline(&seg_loc),
                    });
                    text = splice_chars(&text, lo, hi, &src[s_lo..]);
                }
            }
        }

        let list = EditList::new(ops).unwrap();
        let out = assemble(&list, &resolver).unwrap();
        assert_eq!(out.bytes(), text.as_bytes(), "case {case}: output");

        let got: std::collections::BTreeSet<(String, String)> =
            usage(&list, &resolver, HashAlgorithm::Sha1)
                .unwrap()
                .segments()
                .map(|s| (s.locator().to_string(), s.document().to_string()))
                .collect();
        assert_eq!(got, expected, "case {case}: consumed segments");
    }
    println!("ACCEPTANCE usage/assembly consistency (200 random lists): PASS");
}

/// 1,000 random binary documents round-trip through the store with
/// digest verification on read; a deliberately corrupted object file
/// yields a corruption error, never wrong bytes.
#[test]
fn criterion_6_store_round_trip_1000_docs() {
    let dir = TempDir::new().unwrap();
    let store = sha1_store(&dir, "round-trip");
    let mut rng = Rng(0x5EED_0003);

    let mut ids = Vec::new();
    let mut docs = Vec::new();
    for _ in 0..1000 {
        let doc = Document::new(rng.bytes(4096));
        let id = store.put(&doc).unwrap();
        ids.push(id);
        docs.push(doc);
    }
    for (id, doc) in ids.iter().zip(&docs) {
        let fetched = store.get(id).unwrap();
        assert_eq!(fetched.bytes(), doc.bytes());
    }

    // Corrupt one object on disk: reads must fail loudly.
    let victim = store.put(&Document::new(&b"pristine object"[..])).unwrap();
    let hex = victim.digest_hex();
    let path = store
        .root()
        .join("objects")
        .join("sha1")
        .join(&hex[..2])
        .join(&hex[2..]);
    let mut bytes = std::fs::read(&path).unwrap();
    bytes[0] ^= 0x40;
    std::fs::write(&path, &bytes).unwrap();
    match store.get(&victim) {
        Err(StoreError::Corrupt { id, .. }) => assert_eq!(id, victim),
        other => panic!("expected corruption error, got {other:?}"),
    }
    println!("ACCEPTANCE store round trip (1000 docs + corruption detection): PASS");
}

/// Locator algebra over 1,000 random samples: concatenation law, length
/// law, and full-range identity.
#[test]
fn criterion_7_locator_algebra_1000_samples() {
    let mut rng = Rng(0x5EED_0004);
    // Mixed single- and multi-byte characters.
    let alphabet: Vec<char> = "abc xyz09éßξ→🦀\n".chars().collect();

    for case in 0..1000u32 {
        let len = rng.below(120);
        let text: String = (0..len)
            .map(|_| alphabet[rng.below(alphabet.len() as u64) as usize])
            .collect();
        let doc = text_doc(&text);
        let n = unit_count(Scheme::Char, &doc).unwrap();

        let mut cuts = [rng.below(n + 1), rng.below(n + 1), rng.below(n + 1)];
        cuts.sort_unstable();
        let (a, b, c) = (cuts[0], cuts[1], cuts[2]);

        let select = |lo: u64, hi: u64| {
            select_range(&Locator::range(Scheme::Char, lo, hi).unwrap(), &doc)
                .unwrap()
                .into_bytes()
        };

        // Concatenation: [a,c) == [a,b) ++ [b,c)
        let mut glued = select(a, b);
        glued.extend_from_slice(&select(b, c));
        assert_eq!(select(a, c), glued, "case {case}: concatenation law");

        // Length: a char selection of [a,b) holds b - a characters.
        let bytes = select(a, b);
        let chars = std::str::from_utf8(&bytes).unwrap().chars().count() as u64;
        assert_eq!(chars, b - a, "case {case}: length law");

        // Identity: the full range reproduces the document.
        assert_eq!(
            select(0, n),
            doc.bytes(),
            "case {case}: full-range identity"
        );
    }
    println!("ACCEPTANCE locator algebra (1000 samples, 3 laws): PASS");
}

/// Loopback network integrity: 100 documents round-trip bit-exact
/// through serve+fetch, and a server returning altered bytes always
/// triggers a digest mismatch without touching the store.
#[test]
fn criterion_8_network_integrity() {
    let dir = TempDir::new().unwrap();
    let serving = Arc::new(sha1_store(&dir, "serving"));
    let fetching = sha1_store(&dir, "fetching");
    let mut rng = Rng(0x5EED_0005);

    let mut expected = Vec::new();
    for _ in 0..100 {
        let doc = Document::new(rng.bytes(2048));
        let id = serving.put(&doc).unwrap();
        expected.push((id, doc));
    }

    let server = serve(Arc::clone(&serving), "127.0.0.1:0").unwrap();
    let source = RemoteSource::new(format!("http://{}", server.local_addr()));
    for (id, doc) in &expected {
        let fetched = fetch_verified(&source, id, &fetching).unwrap();
        assert_eq!(fetched.bytes(), doc.bytes(), "wire round trip for {id}");
        assert_eq!(fetching.get(id).unwrap().bytes(), doc.bytes());
    }
    drop(server);

    // A server that always answers with different bytes.
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let lying_addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        use std::io::{Read, Write};
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut buf = [0u8; 2048];
            let mut head = Vec::new();
            loop {
                match stream.read(&mut buf) {
                    Ok(0) => break,
                    Ok(n) => {
                        head.extend_from_slice(&buf[..n]);
                        if head.windows(4).any(|w| w == b"\r\n\r\n") {
                            break;
                        }
                    }
                    Err(_) => return,
                }
            }
            let body = b"counterfeit bytes";
            let _ = stream.write_all(
                format!(
                    "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                    body.len()
                )
                .as_bytes(),
            );
            let _ = stream.write_all(body);
        }
    });

    let lying =
        RemoteSource::new(format!("http://{lying_addr}")).with_timeout(Duration::from_secs(5));
    for (id, _) in expected.iter().take(10) {
        // Fetch into a fresh empty store each time: nothing may enter it.
        let victim_dir = TempDir::new().unwrap();
        let victim = sha1_store(&victim_dir, "victim");
        match fetch_verified(&lying, id, &victim) {
            Err(FetchError::DigestMismatch { expected, .. }) => assert_eq!(&expected, id),
            other => panic!("expected digest mismatch for {id}, got {other:?}"),
        }
        assert!(!victim.contains(id), "store must remain untouched");
    }
    println!("ACCEPTANCE network integrity (100 docs loopback + hostile server): PASS");
}
