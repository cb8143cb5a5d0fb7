//! Seeded synthetic corpus: a lexicon of made-up words and texts whose
//! word frequencies follow an author-specific Zipf ranking.

#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::distributions::WeightedIndex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SYMBOLS: [&str; 14] = ["AA", "AE", "B", "D", "EH", "F", "IY", "K", "L", "M", "N", "OW", "S", "T"];
const WORDS: usize = 400;
/// Words an author draws from, out of a ranking over the whole lexicon.
const VOCABULARY: usize = 250;
const TOKENS_PER_TEXT: usize = 4000;

pub struct ToyCorpus {
    pub lexicon: PathBuf,
    pub authors: PathBuf,
    pub held_out: &'static str,
}

fn word_name(k: usize) -> String {
    let mut s = String::from("q");
    let mut k = k;
    loop {
        s.push((b'a' + (k % 26) as u8) as char);
        k /= 26;
        if k == 0 {
            return s;
        }
    }
}

fn text(rng: &mut ChaCha8Rng, ranking: &[usize]) -> String {
    let ranking = &ranking[..VOCABULARY];
    let weights: Vec<f64> = (1..=VOCABULARY).map(|r| 1.0 / r as f64).collect();
    let total: f64 = weights.iter().sum();
    let mut out = String::new();
    for i in 0..TOKENS_PER_TEXT {
        let mut u = rng.gen::<f64>() * total;
        let mut pick = ranking.len() - 1;
        for (r, w) in weights.iter().enumerate() {
            if u < *w {
                pick = r;
                break;
            }
            u -= w;
        }
        out.push_str(&word_name(ranking[pick]));
        out.push(if i % 12 == 11 { '\n' } else { ' ' });
    }
    out
}

/// Writes the lexicon, three texts each for authors A, B and C plus one
/// held-out text by A, and the manifest naming them.
pub fn toy_corpus(dir: &Path) -> ToyCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    // skewed phoneme usage, as in natural lexicons
    let symbol_weights =
        WeightedIndex::new((0..SYMBOLS.len()).map(|k| 0.8f64.powi(k as i32))).unwrap();
    let mut lex = String::new();
    for k in 0..WORDS {
        let len = rng.gen_range(2..=6);
        let pron: Vec<&str> = (0..len)
            .map(|_| SYMBOLS[rng.sample(&symbol_weights)])
            .collect();
        writeln!(lex, "{}\t{}", word_name(k), pron.join(" ")).unwrap();
    }
    let lexicon = dir.join("lexicon.tsv");
    fs::write(&lexicon, lex).unwrap();

    let mut manifest = String::from("text_id,author,path\n");
    let mut base: Vec<usize> = (0..WORDS).collect();
    for author in ["A", "B", "C"] {
        base.shuffle(&mut rng);
        let count = if author == "A" { 4 } else { 3 };
        for t in 1..=count {
            // each text reorders a few of its author's ranks
            let mut ranking = base.clone();
            for _ in 0..20 {
                let (i, j) = (rng.gen_range(40..WORDS), rng.gen_range(40..WORDS));
                ranking.swap(i, j);
            }
            let id = format!("{}{t}", author.to_lowercase());
            let name = format!("{id}.txt");
            fs::write(dir.join(&name), text(&mut rng, &ranking)).unwrap();
            let label = if author == "A" && t == count { "?" } else { author };
            writeln!(manifest, "{id},{label},{name}").unwrap();
        }
    }
    let authors = dir.join("authors.csv");
    fs::write(&authors, manifest).unwrap();
    ToyCorpus { lexicon, authors, held_out: "a4" }
}

pub fn phonorank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phonorank")).args(args).output().unwrap()
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Every file under `dir` except the profile cache, with its bytes.
pub fn outputs(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_owned()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                if p.file_name().unwrap() != "cache" {
                    stack.push(p);
                }
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_owned(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
