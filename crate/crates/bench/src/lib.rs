//! Seeded synthetic inputs shared by the benchmarks.

use std::collections::BTreeSet;

use convograph_core::graph::Graph;
use convograph_core::ingest::{InteractionRecord, Label, LabeledDocument};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Connected graph: a random spanning tree topped up with distinct random edges.
pub fn sparse_graph(nodes: usize, edges: usize, seed: u64) -> Graph {
    assert!(nodes >= 2 && edges >= nodes - 1 && edges <= nodes * (nodes - 1) / 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = BTreeSet::new();
    for v in 1..nodes {
        set.insert((rng.gen_range(0..v), v));
    }
    while set.len() < edges {
        let (a, b) = (rng.gen_range(0..nodes), rng.gen_range(0..nodes));
        if a != b {
            set.insert((a.min(b), a.max(b)));
        }
    }
    Graph::from_edges(nodes, &set.into_iter().collect::<Vec<_>>())
}

/// Mention records where each author mentions one or two other users.
pub fn mention_records(users: usize, records: usize, seed: u64) -> Vec<InteractionRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..records)
        .map(|i| {
            let author = rng.gen_range(0..users);
            let mentions = rng.gen_range(1..=2);
            let text: String = (0..mentions)
                .map(|_| format!("@u{} ", rng.gen_range(0..users)))
                .collect();
            InteractionRecord {
                id: i.to_string(),
                author: format!("u{author}"),
                text: text + "halo",
                reply_to: None,
                created_at: "2019-10-01T00:00:00Z".into(),
                keyword: None,
            }
        })
        .collect()
}

const POSITIVE: [&str; 8] = [
    "bagus", "mudah", "cepat", "mantap", "puas", "senang", "lancar", "promo",
];
const NEGATIVE: [&str; 8] = [
    "gagal", "error", "lambat", "kecewa", "parah", "rusak", "hilang", "ribet",
];
const FILLER: [&str; 10] = [
    "aplikasi",
    "saldo",
    "transfer",
    "pembayaran",
    "transaksi",
    "akun",
    "isi",
    "ulang",
    "bertransaksi",
    "dipakai",
];

/// Balanced labeled corpus of short Indonesian-like sentences.
pub fn labeled_corpus(docs: usize, words_per_doc: usize, seed: u64) -> Vec<LabeledDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..docs)
        .map(|i| {
            let label = if i % 2 == 0 {
                Label::Positive
            } else {
                Label::Negative
            };
            let cue = if label == Label::Positive {
                &POSITIVE
            } else {
                &NEGATIVE
            };
            let words: Vec<&str> = (0..words_per_doc)
                .map(|_| {
                    if rng.gen_bool(0.4) {
                        *cue.choose(&mut rng).unwrap()
                    } else {
                        *FILLER.choose(&mut rng).unwrap()
                    }
                })
                .collect();
            LabeledDocument::new(words.join(" "), label)
        })
        .collect()
}
