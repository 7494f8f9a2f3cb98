//! Synthetic corpora with planted phrases, for smoke tests and the
//! end-to-end acceptance run.
//!
//! Every phrase is a fixed sequence of dedicated words, always surrounded by
//! the same left and right filler words. The rest of each sentence is random
//! filler.

use phrasevec_core::seeded_rng;
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub phrases: usize,
    pub filler_words: usize,
    pub min_phrase_len: usize,
    pub max_phrase_len: usize,
    /// Approximate corpus length in tokens.
    pub tokens: usize,
    /// Random filler words on each side of a planted phrase.
    pub padding: usize,
    pub sentences_per_document: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            phrases: 50,
            filler_words: 50,
            min_phrase_len: 2,
            max_phrase_len: 4,
            tokens: 100_000,
            padding: 3,
            sentences_per_document: 200,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlantedPhrase {
    pub words: Vec<String>,
    pub left: String,
    pub right: String,
    pub occurrences: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthCorpus {
    /// Each document is a whitespace-separated token string.
    pub documents: Vec<String>,
    pub phrases: Vec<PlantedPhrase>,
}

impl SynthCorpus {
    /// The phrase list file: `w1 w2<TAB>count` per line.
    pub fn phrase_list(&self) -> String {
        let mut out = String::new();
        for p in &self.phrases {
            out.push_str(&p.words.join(" "));
            out.push('\t');
            out.push_str(&p.occurrences.to_string());
            out.push('\n');
        }
        out
    }

    pub fn token_count(&self) -> usize {
        self.documents.iter().map(|d| d.split_whitespace().count()).sum()
    }
}

/// Letters-only name for an index, so tokenization leaves it intact.
fn name(prefix: char, mut i: usize) -> String {
    const CONS: &[u8] = b"bdfgklmnprstvz";
    const VOW: &[u8] = b"aeiou";
    let mut s = String::from(prefix);
    loop {
        s.push(CONS[i % CONS.len()] as char);
        i /= CONS.len();
        s.push(VOW[i % VOW.len()] as char);
        i /= VOW.len();
        if i == 0 {
            break;
        }
    }
    s
}

pub fn generate(config: &SynthConfig) -> SynthCorpus {
    assert!(config.min_phrase_len >= 1 && config.min_phrase_len <= config.max_phrase_len);
    assert!(config.filler_words >= 2 && config.phrases >= 1);
    let mut rng = seeded_rng(config.seed);
    let filler: Vec<String> = (0..config.filler_words).map(|i| name('x', i)).collect();

    let mut next_word = 0;
    let mut phrases: Vec<PlantedPhrase> = (0..config.phrases)
        .map(|_| {
            let len = rng.gen_range(config.min_phrase_len..=config.max_phrase_len);
            let words = (0..len)
                .map(|_| {
                    next_word += 1;
                    name('q', next_word - 1)
                })
                .collect();
            let mut pair = filler.choose_multiple(&mut rng, 2);
            PlantedPhrase {
                words,
                left: pair.next().unwrap().clone(),
                right: pair.next().unwrap().clone(),
                occurrences: 0,
            }
        })
        .collect();

    let mut occurrences = vec![0u64; phrases.len()];
    let mut documents = Vec::new();
    let mut doc: Vec<&str> = Vec::new();
    let (mut total, mut sentences) = (0, 0);
    while total < config.tokens {
        let p = rng.gen_range(0..phrases.len());
        occurrences[p] += 1;
        let start = doc.len();
        for _ in 0..config.padding {
            doc.push(filler.choose(&mut rng).unwrap());
        }
        let ph = &phrases[p];
        doc.push(&ph.left);
        doc.extend(ph.words.iter().map(String::as_str));
        doc.push(&ph.right);
        for _ in 0..config.padding {
            doc.push(filler.choose(&mut rng).unwrap());
        }
        doc.push(".");
        total += doc.len() - start;
        sentences += 1;
        if sentences % config.sentences_per_document == 0 {
            documents.push(doc.join(" "));
            doc.clear();
        }
    }
    if !doc.is_empty() {
        documents.push(doc.join(" "));
    }
    for (p, n) in phrases.iter_mut().zip(occurrences) {
        p.occurrences = n;
    }
    SynthCorpus { documents, phrases }
}

#[cfg(test)]
mod tests {
    use super::*;
    use phrasevec_core::corpus::tokenize;

    #[test]
    fn names_survive_tokenization_and_are_distinct() {
        let names: Vec<String> = (0..500).map(|i| name('q', i)).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        for n in &names {
            let toks: Vec<_> = tokenize(n).collect();
            assert_eq!(toks.len(), 1);
            assert_eq!(toks[0].as_str(), n);
        }
    }

    #[test]
    fn generation_is_deterministic_and_sized() {
        let cfg = SynthConfig {
            tokens: 5_000,
            ..SynthConfig::default()
        };
        let a = generate(&cfg);
        assert_eq!(a, generate(&cfg));
        assert!(a.token_count() >= 5_000);
        assert_eq!(a.phrases.len(), 50);
        let planted: u64 = a.phrases.iter().map(|p| p.occurrences).sum();
        assert_eq!(planted as usize, a.documents.iter().map(|d| d.matches(" .").count()).sum::<usize>());
        assert!(a.phrases.iter().all(|p| (2..=4).contains(&p.words.len())));
    }
}
