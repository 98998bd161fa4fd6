//! Shared fixtures: a seeded synthetic corpus and desk-run configuration.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use netauthor::pipeline::PipelineConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FUNCTION_WORDS: [&str; 24] = [
    "the", "a", "of", "and", "to", "in", "that", "it", "was", "he", "she", "with", "for", "as", "on", "but", "at",
    "by", "from", "they", "this", "had", "not", "all",
];

const ONSETS: [&str; 16] = ["b", "c", "d", "f", "g", "k", "l", "m", "n", "p", "r", "t", "v", "z", "br", "tr"];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
const CODAS: [&str; 6] = ["n", "r", "l", "m", "t", "k"];

/// Writing habits of one synthetic author.
#[derive(Debug, Clone)]
pub struct AuthorStyle {
    pub vocabulary: usize,
    pub zipf: f64,
    /// Chance of reusing one of the last few content words.
    pub burst: f64,
    /// Fraction of tokens that are function words.
    pub function_rate: f64,
}

pub fn desk_styles() -> Vec<AuthorStyle> {
    vec![
        AuthorStyle { vocabulary: 2500, zipf: 0.95, burst: 0.05, function_rate: 0.42 },
        AuthorStyle { vocabulary: 1800, zipf: 1.05, burst: 0.12, function_rate: 0.48 },
        AuthorStyle { vocabulary: 1200, zipf: 1.15, burst: 0.20, function_rate: 0.45 },
        AuthorStyle { vocabulary: 3500, zipf: 1.00, burst: 0.25, function_rate: 0.40 },
    ]
}

/// Pronounceable pseudo-word for an index; never ends in `s` so the
/// lemmatizer leaves it intact.
fn pseudo_word(mut i: usize) -> String {
    let mut w = String::from("q");
    loop {
        w.push_str(ONSETS[i % ONSETS.len()]);
        i /= ONSETS.len();
        w.push_str(VOWELS[i % VOWELS.len()]);
        i /= VOWELS.len();
        if i == 0 {
            break;
        }
    }
    w.push_str(CODAS[i % CODAS.len()]);
    w
}

fn zipf_cdf(n: usize, s: f64) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = (1..=n)
        .map(|r| {
            acc += 1.0 / (r as f64).powf(s);
            acc
        })
        .collect();
    let total = acc;
    cdf.iter_mut().for_each(|c| *c /= total);
    cdf
}

pub fn generate_book(style: &AuthorStyle, tokens: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zipf = style.zipf + rng.random_range(-0.03..0.03);
    let cdf = zipf_cdf(style.vocabulary, zipf);
    // Each book shifts part of the ranking so topics differ between books.
    let mut ranks: Vec<usize> = (0..style.vocabulary).collect();
    for r in 20..style.vocabulary {
        if rng.random::<f64>() < 0.3 {
            let j = rng.random_range(20..style.vocabulary);
            ranks.swap(r, j);
        }
    }
    let mut recent: Vec<usize> = Vec::new();
    let mut text = String::with_capacity(tokens * 7);
    let mut in_sentence = 0;
    let mut sentence_len = rng.random_range(8..20);
    for _ in 0..tokens {
        let word = if rng.random::<f64>() < style.function_rate {
            FUNCTION_WORDS[rng.random_range(0..FUNCTION_WORDS.len())].to_string()
        } else {
            let id = if !recent.is_empty() && rng.random::<f64>() < style.burst {
                recent[rng.random_range(0..recent.len())]
            } else {
                let u: f64 = rng.random();
                ranks[cdf.partition_point(|&c| c < u).min(style.vocabulary - 1)]
            };
            recent.push(id);
            if recent.len() > 6 {
                recent.remove(0);
            }
            pseudo_word(id)
        };
        text.push_str(&word);
        in_sentence += 1;
        if in_sentence == sentence_len {
            text.push_str(".\n");
            in_sentence = 0;
            sentence_len = rng.random_range(8..20);
        } else {
            text.push(' ');
        }
    }
    text
}

/// Writes `authors × books` texts plus `manifest.csv` into `dir`.
pub fn write_corpus(dir: &Path, styles: &[AuthorStyle], books: usize, tokens: usize, seed: u64) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    let mut manifest = String::from("author,doc,path\n");
    for (a, style) in styles.iter().enumerate() {
        for b in 0..books {
            let name = format!("author{a}_book{b}.txt");
            let text = generate_book(style, tokens, seed.wrapping_mul(1000).wrapping_add((a * 100 + b) as u64));
            fs::write(dir.join(&name), text).unwrap();
            manifest.push_str(&format!("author{a},book{b},{name}\n"));
        }
    }
    let path = dir.join("manifest.csv");
    fs::write(&path, manifest).unwrap();
    path
}

/// Manifest from `DESK_CORPUS` when set, otherwise a generated corpus in `dir`.
pub fn desk_manifest(dir: &Path) -> PathBuf {
    match std::env::var_os("DESK_CORPUS") {
        Some(p) => PathBuf::from(p),
        None => write_corpus(&dir.join("corpus"), &desk_styles(), 5, 50_000, 7),
    }
}

/// Desk experiment: W = 200, 5-fold CV, a narrow selection beam.
pub fn desk_config(manifest: &Path, out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::new(manifest, out);
    cfg.window = 200;
    cfg.folds = 5;
    cfg.beam_cap = 2;
    cfg.seed = 1;
    cfg
}
