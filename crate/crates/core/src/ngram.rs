//! Exact, unsmoothed n-gram counts over a finite corpus.
//!
//! A corpus is UTF-8 text with one sentence per line (the delimiter is
//! configurable). Sentences are split on whitespace and every contiguous
//! k-gram with `k <= n_max` is counted. N-grams never span two sentences and
//! no boundary pseudo-tokens are added. The ellipsis `…` is an ordinary token.
//!
//! All probabilities are exact rationals; floats appear only when printing.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};
use std::ops::Bound;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

pub type Prob = Ratio<u64>;

pub type Tokens = Vec<String>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NGramError {
    #[error("corpus contains no tokens")]
    EmptyCorpus,
    #[error("corpus is not valid UTF-8 (first bad byte at offset {0})")]
    EncodingError(usize),
    #[error("n_max must be at least 1")]
    ZeroOrder,
    #[error("context of length {len} needs n_max > {len}, table has n_max = {n_max}")]
    ContextTooLong { len: usize, n_max: usize },
    #[error("context {0:?} never occurs, so the conditional is undefined")]
    ZeroContext(Tokens),
    #[error("sentence of length {len} exceeds n_max = {n_max}")]
    SentenceTooLong { len: usize, n_max: usize },
    #[error("sentence is empty")]
    EmptySentence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestConfig {
    pub sentence_delimiter: char,
    pub n_max: usize,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            sentence_delimiter: '\n',
            n_max: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Tokens>,
    pub vocabulary: BTreeSet<String>,
    pub total_token_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramTable {
    counts: BTreeMap<Tokens, u64>,
    n_max: usize,
    base_count: u64,
}

/// Splits text into whitespace-tokenized sentences, dropping blank ones.
pub fn tokenize(text: &str, delimiter: char) -> Vec<Tokens> {
    text.split(delimiter)
        .map(|s| s.split_whitespace().map(str::to_owned).collect::<Tokens>())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Parses a space-separated token query.
pub fn parse_tokens(s: &str) -> Tokens {
    s.split_whitespace().map(str::to_owned).collect()
}

pub fn ingest(bytes: &[u8], config: &IngestConfig) -> Result<(Corpus, NGramTable), NGramError> {
    if config.n_max == 0 {
        return Err(NGramError::ZeroOrder);
    }
    let text =
        std::str::from_utf8(bytes).map_err(|e| NGramError::EncodingError(e.valid_up_to()))?;
    let sentences = tokenize(text, config.sentence_delimiter);
    if sentences.is_empty() {
        return Err(NGramError::EmptyCorpus);
    }
    let mut counts: BTreeMap<Tokens, u64> = BTreeMap::new();
    let mut vocabulary = BTreeSet::new();
    let mut total = 0u64;
    for s in &sentences {
        total += s.len() as u64;
        vocabulary.extend(s.iter().cloned());
        for k in 1..=config.n_max.min(s.len()) {
            for w in s.windows(k) {
                *counts.entry(w.to_vec()).or_insert(0) += 1;
            }
        }
    }
    let table = NGramTable {
        counts,
        n_max: config.n_max,
        base_count: total,
    };
    let corpus = Corpus {
        sentences,
        vocabulary,
        total_token_count: total,
    };
    Ok((corpus, table))
}

impl NGramTable {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `C(w_0)`, the total number of tokens.
    pub fn base_count(&self) -> u64 {
        self.base_count
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `C(seq)`; the empty sequence counts as `base_count`.
    pub fn count(&self, seq: &[String]) -> u64 {
        if seq.is_empty() {
            return self.base_count;
        }
        self.counts.get(seq).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Tokens, u64)> {
        self.counts.iter().map(|(k, &v)| (k, v))
    }

    /// Every counted one-token extension of `context` with its count.
    pub fn extensions<'a>(
        &'a self,
        context: &'a [String],
    ) -> impl Iterator<Item = (&'a String, u64)> + 'a {
        let start = Bound::Excluded(context.to_vec());
        self.counts
            .range((start, Bound::Unbounded))
            .take_while(move |(k, _)| k.starts_with(context))
            .filter(move |(k, _)| k.len() == context.len() + 1)
            .map(|(k, &v)| (&k[context.len()], v))
    }

    /// `C(context, next) / C(context)`.
    pub fn conditional_prob(&self, next: &str, context: &[String]) -> Result<Prob, NGramError> {
        if context.len() >= self.n_max {
            return Err(NGramError::ContextTooLong {
                len: context.len(),
                n_max: self.n_max,
            });
        }
        let denom = self.count(context);
        if denom == 0 {
            return Err(NGramError::ZeroContext(context.to_vec()));
        }
        let mut seq = context.to_vec();
        seq.push(next.to_owned());
        Ok(Ratio::new(self.count(&seq), denom))
    }

    /// Chain-rule probability `prod_k P(w_k | w_1..w_{k-1})`, without any
    /// Markov truncation.
    pub fn sentence_prob(&self, sentence: &[String]) -> Result<Prob, NGramError> {
        if sentence.is_empty() {
            return Err(NGramError::EmptySentence);
        }
        if sentence.len() > self.n_max {
            return Err(NGramError::SentenceTooLong {
                len: sentence.len(),
                n_max: self.n_max,
            });
        }
        let mut p = Prob::one();
        for k in 0..sentence.len() {
            let factor = self.conditional_prob(&sentence[k], &sentence[..k])?;
            if factor.is_zero() {
                return Ok(Prob::zero());
            }
            p *= factor;
        }
        Ok(p)
    }

    /// Writes `ngram_tokens<TAB>count` rows in sorted token order.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "ngram_tokens\tcount")?;
        for (k, v) in &self.counts {
            writeln!(out, "{}\t{}", k.join(" "), v)?;
        }
        Ok(())
    }
}

impl Corpus {
    /// Occurrences of `context` that end a sentence, so cannot be extended.
    pub fn boundary_terminal_count(&self, context: &[String]) -> u64 {
        if context.is_empty() {
            return 0;
        }
        self.sentences
            .iter()
            .filter(|s| s.ends_with(context))
            .count() as u64
    }

    /// The upper bound on distinct table entries.
    pub fn max_table_size(&self, n_max: usize) -> usize {
        self.sentences
            .iter()
            .map(|s| {
                (1..=n_max)
                    .map(|k| (s.len() + 1).saturating_sub(k))
                    .sum::<usize>()
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObservationReport {
    #[serde(serialize_with = "ser_ratio")]
    pub chain_value: Prob,
    #[serde(serialize_with = "ser_ratio")]
    pub brute_force_value: Prob,
    pub equal: bool,
}

fn ser_ratio<S: serde::Serializer>(r: &Prob, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

/// Counts contiguous occurrences of `needle` in the raw text by scanning
/// each line's tokens independently of the table.
pub fn brute_force_count(raw: &str, delimiter: char, needle: &[String]) -> (u64, u64) {
    let mut hits = 0u64;
    let mut tokens = 0u64;
    for line in raw.split(delimiter) {
        let words: Vec<&str> = line.split_whitespace().collect();
        tokens += words.len() as u64;
        if needle.is_empty() || needle.len() > words.len() {
            continue;
        }
        for start in 0..=words.len() - needle.len() {
            if needle
                .iter()
                .enumerate()
                .all(|(i, n)| words[start + i] == n)
            {
                hits += 1;
            }
        }
    }
    (hits, tokens)
}

/// Compares the chain-rule value with `C(S) / C(w_0)` counted directly from
/// the raw corpus text.
pub fn direct_observation_check(
    table: &NGramTable,
    raw: &str,
    config: &IngestConfig,
    sentence: &[String],
) -> Result<ObservationReport, NGramError> {
    let chain_value = table.sentence_prob(sentence)?;
    let (hits, tokens) = brute_force_count(raw, config.sentence_delimiter, sentence);
    if tokens == 0 {
        return Err(NGramError::EmptyCorpus);
    }
    let brute_force_value = Ratio::new(hits, tokens);
    Ok(ObservationReport {
        equal: chain_value == brute_force_value,
        chain_value,
        brute_force_value,
    })
}

/// A small bundled corpus with repeated phrases and the `…` token.
pub const TOY_CORPUS: &str = include_str!("../data/toy_corpus.txt");

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn build(text: &str, n_max: usize) -> (Corpus, NGramTable) {
        ingest(
            text.as_bytes(),
            &IngestConfig {
                n_max,
                ..IngestConfig::default()
            },
        )
        .unwrap()
    }

    fn toks(s: &str) -> Tokens {
        parse_tokens(s)
    }

    #[test]
    fn ingest_examples() {
        let (_, t) = build("a b", 2);
        assert_eq!(t.count(&toks("a")), 1);
        assert_eq!(t.count(&toks("b")), 1);
        assert_eq!(t.count(&toks("a b")), 1);
        assert_eq!(t.base_count(), 2);
        assert_eq!(t.len(), 3);

        let (_, t) = build("a a a", 2);
        assert_eq!(t.count(&toks("a")), 3);
        assert_eq!(t.count(&toks("a a")), 2);
        assert_eq!(t.base_count(), 3);

        let cfg = IngestConfig::default();
        assert_eq!(ingest(b"", &cfg), Err(NGramError::EmptyCorpus));
        assert_eq!(ingest(b"  \n\n ", &cfg), Err(NGramError::EmptyCorpus));
        assert_eq!(ingest(b"ok \xff", &cfg), Err(NGramError::EncodingError(3)));
        assert_eq!(
            ingest(b"a", &IngestConfig { n_max: 0, ..cfg }),
            Err(NGramError::ZeroOrder)
        );
    }

    #[test]
    fn ngrams_stay_inside_sentences() {
        let (c, t) = build("a b\nc d\n", 2);
        assert_eq!(t.count(&toks("b c")), 0);
        assert_eq!(c.sentences.len(), 2);
        assert_eq!(c.total_token_count, 4);
        let (_, t) = ingest(
            b"a b. c d",
            &IngestConfig {
                sentence_delimiter: '.',
                n_max: 2,
            },
        )
        .unwrap();
        assert_eq!(t.count(&toks("b c")), 0);
        assert_eq!(t.count(&toks("c d")), 1);
    }

    #[test]
    fn conditional_examples() {
        let (_, t) = build("a b", 2);
        assert_eq!(t.conditional_prob("b", &toks("a")).unwrap(), Prob::one());
        assert_eq!(t.conditional_prob("a", &[]).unwrap(), Prob::new(1, 2));
        assert_eq!(t.conditional_prob("z", &toks("a")).unwrap(), Prob::zero());
        assert_eq!(
            t.conditional_prob("a", &toks("z")),
            Err(NGramError::ZeroContext(toks("z")))
        );
        assert_eq!(
            t.conditional_prob("a", &toks("a b")),
            Err(NGramError::ContextTooLong { len: 2, n_max: 2 })
        );
    }

    #[test]
    fn sentence_examples() {
        let (_, t) = build("a b", 2);
        assert_eq!(t.sentence_prob(&toks("a b")).unwrap(), Prob::new(1, 2));
        assert_eq!(t.sentence_prob(&toks("z b")).unwrap(), Prob::zero());
        assert_eq!(t.sentence_prob(&toks("b a")).unwrap(), Prob::zero());
        assert_eq!(t.sentence_prob(&[]), Err(NGramError::EmptySentence));
        assert_eq!(
            t.sentence_prob(&toks("a b a")),
            Err(NGramError::SentenceTooLong { len: 3, n_max: 2 })
        );
    }

    #[test]
    fn direct_observation_examples() {
        let cfg = IngestConfig {
            n_max: 2,
            ..IngestConfig::default()
        };
        let (_, t) = ingest(b"a b", &cfg).unwrap();
        let r = direct_observation_check(&t, "a b", &cfg, &toks("a b")).unwrap();
        assert_eq!(r.chain_value, Prob::new(1, 2));
        assert!(r.equal);

        let raw = "x\ny\nz";
        let (_, t) = ingest(raw.as_bytes(), &cfg).unwrap();
        let mut sum = Prob::zero();
        for w in ["x", "y", "z"] {
            let r = direct_observation_check(&t, raw, &cfg, &toks(w)).unwrap();
            assert_eq!(r.chain_value, Prob::new(1, 3));
            assert!(r.equal);
            sum += r.chain_value;
        }
        assert_eq!(sum, Prob::one());
    }

    #[test]
    fn toy_corpus_contains_ellipsis() {
        let (c, t) = build(TOY_CORPUS, 4);
        assert!(c.vocabulary.contains("…"));
        assert!(t.count(&toks("…")) > 0);
        let most = c
            .vocabulary
            .iter()
            .max_by_key(|w| {
                (
                    t.count(std::slice::from_ref(*w)),
                    std::cmp::Reverse((*w).clone()),
                )
            })
            .unwrap();
        let s = vec![most.clone()];
        assert_eq!(
            t.sentence_prob(&s).unwrap(),
            Prob::new(t.count(&s), t.base_count())
        );
    }

    #[test]
    fn tsv_export_is_sorted() {
        let (_, t) = build("b a\na", 2);
        let mut out = Vec::new();
        t.write_tsv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "ngram_tokens\tcount\na\t2\nb\t1\nb a\t1\n"
        );
    }

    fn corpus_text() -> impl Strategy<Value = String> {
        let word = prop::sample::select(vec!["a", "b", "c", "…", "dé"]);
        let sentence = prop::collection::vec(word, 1..7).prop_map(|w| w.join(" "));
        prop::collection::vec(sentence, 1..8).prop_map(|s| s.join("\n"))
    }

    proptest! {
        #[test]
        fn table_invariants(text in corpus_text(), n_max in 1usize..5) {
            let (c, t) = build(&text, n_max);
            prop_assert!(t.len() <= c.max_table_size(n_max));
            prop_assert_eq!(c.total_token_count, c.sentences.iter().map(|s| s.len() as u64).sum::<u64>());
            for (seq, count) in t.entries() {
                prop_assert!(t.count(&seq[..seq.len() - 1]) >= count);
                prop_assert!(t.count(&seq[1..]) >= count);
            }
        }

        #[test]
        fn normalization_deficit_is_boundary_terminals(text in corpus_text(), n_max in 2usize..5) {
            let (c, t) = build(&text, n_max);
            for (ctx, count) in t.entries().filter(|(k, _)| k.len() < n_max) {
                let mass: Prob = t.extensions(ctx).map(|(w, _)| t.conditional_prob(w, ctx).unwrap()).sum();
                let deficit = Prob::new(c.boundary_terminal_count(ctx), count);
                prop_assert_eq!(mass + deficit, Prob::one());
            }
            // The empty context never meets a boundary.
            let mass: Prob = t.extensions(&[]).map(|(w, _)| t.conditional_prob(w, &[]).unwrap()).sum();
            prop_assert_eq!(mass, Prob::one());
        }

        #[test]
        fn telescoping_matches_brute_force(text in corpus_text(), n_max in 1usize..5, pick in any::<prop::sample::Index>()) {
            let cfg = IngestConfig { n_max, ..IngestConfig::default() };
            let (c, t) = ingest(text.as_bytes(), &cfg).unwrap();
            let s = pick.get(&c.sentences);
            let start = pick.index(s.len());
            let end = (start + n_max).min(s.len());
            let r = direct_observation_check(&t, &text, &cfg, &s[start..end]).unwrap();
            prop_assert!(r.equal);
            prop_assert_eq!(r.chain_value, Prob::new(t.count(&s[start..end]), t.base_count()));
        }
    }
}
