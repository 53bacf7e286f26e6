//! Reduced words in a free group, their evaluation under a representation and
//! enumeration of word balls.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::psl2::{ProjectiveElement, UnimodularMatrix};

/// Default cap on the number of words a ball enumeration may produce.
pub const DEFAULT_BALL_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("generator index {index} out of range for {n_generators} generators")]
    IndexOutOfRange { index: usize, n_generators: usize },
    #[error("word ball of radius {radius} on {n_generators} generators exceeds the cap of {cap} words")]
    BallTooLarge {
        n_generators: usize,
        radius: usize,
        cap: usize,
    },
    #[error("a representation needs at least one generator")]
    NoGenerators,
    #[error("expected {expected} labels, got {found}")]
    LabelCount { expected: usize, found: usize },
    #[error("duplicate generator label {0:?}")]
    DuplicateLabel(String),
    #[error("empty generator label")]
    EmptyLabel,
    #[error("cannot parse word {text:?} at byte {offset}: {reason}")]
    Parse {
        text: String,
        offset: usize,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub generator: usize,
    pub exponent: i64,
}

impl Serialize for Syllable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.generator, self.exponent).serialize(s)
    }
}

/// A freely reduced word: adjacent syllables use distinct generators and no
/// exponent is zero. The empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Word {
    syllables: Vec<Syllable>,
}

impl Word {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn generator(index: usize) -> Self {
        Self::reduce([(index, 1)])
    }

    /// Free reduction of a raw syllable list. A single stack pass reaches the
    /// fixed point: merging with the top of the stack and popping cancelled
    /// syllables exposes exactly the next candidate for merging.
    pub fn reduce<I>(raw: I) -> Self
    where
        I: IntoIterator<Item = (usize, i64)>,
    {
        let mut out: Vec<Syllable> = Vec::new();
        for (generator, exponent) in raw {
            if exponent == 0 {
                continue;
            }
            match out.last_mut() {
                Some(top) if top.generator == generator => {
                    top.exponent += exponent;
                    if top.exponent == 0 {
                        out.pop();
                    }
                }
                _ => out.push(Syllable {
                    generator,
                    exponent,
                }),
            }
        }
        Self { syllables: out }
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Word length: sum of absolute exponents.
    pub fn len(&self) -> usize {
        self.syllables
            .iter()
            .map(|s| s.exponent.unsigned_abs() as usize)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word::reduce(self.pairs().chain(other.pairs()))
    }

    pub fn inverse(&self) -> Word {
        Word::reduce(self.syllables.iter().rev().map(|s| (s.generator, -s.exponent)))
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let reps = n.unsigned_abs() as usize;
        Word::reduce((0..reps).flat_map(|_| base.pairs().collect::<Vec<_>>()))
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.syllables.iter().map(|s| (s.generator, s.exponent))
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.syllables.iter().map(|s| s.generator).max()
    }

    /// Renders the word with the given labels, e.g. `ab^-1a`. Labels longer than
    /// one character are separated by spaces.
    pub fn display_with<'a>(&'a self, labels: &'a [String]) -> WordDisplay<'a> {
        WordDisplay { word: self, labels }
    }

    /// Parses `token = label ('^' signed-integer)?`, with whitespace allowed between
    /// tokens. An uppercase letter whose lowercase form is a label denotes the
    /// inverse of that generator.
    pub fn parse(text: &str, labels: &[String]) -> Result<Word, WordError> {
        let err = |offset: usize, reason: &str| WordError::Parse {
            text: text.to_string(),
            offset,
            reason: reason.to_string(),
        };
        let bytes = text.as_bytes();
        let mut i = 0;
        let mut raw = Vec::new();
        while i < bytes.len() {
            if bytes[i].is_ascii_whitespace() {
                i += 1;
                continue;
            }
            let rest = &text[i..];
            // longest matching label wins
            let hit = labels
                .iter()
                .enumerate()
                .filter(|(_, l)| !l.is_empty() && rest.starts_with(l.as_str()))
                .max_by_key(|(_, l)| l.len());
            let (generator, mut sign, consumed) = match hit {
                Some((g, l)) => (g, 1i64, l.len()),
                None => {
                    let ch = rest.chars().next().unwrap_or(' ');
                    let lower = ch.to_lowercase().to_string();
                    match (ch.is_uppercase(), labels.iter().position(|l| *l == lower)) {
                        (true, Some(g)) => (g, -1, ch.len_utf8()),
                        _ => return Err(err(i, "unknown generator label")),
                    }
                }
            };
            i += consumed;
            let mut exponent = 1i64;
            if bytes.get(i) == Some(&b'^') {
                i += 1;
                let start = i;
                if matches!(bytes.get(i), Some(b'-') | Some(b'+')) {
                    i += 1;
                }
                while bytes.get(i).is_some_and(|b| b.is_ascii_digit()) {
                    i += 1;
                }
                exponent = text[start..i]
                    .parse::<i64>()
                    .map_err(|_| err(start, "expected a signed integer exponent"))?;
            }
            sign *= exponent;
            raw.push((generator, sign));
        }
        Ok(Word::reduce(raw))
    }
}

pub struct WordDisplay<'a> {
    word: &'a Word,
    labels: &'a [String],
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_identity() {
            return f.write_str("1");
        }
        let spaced = self.labels.iter().any(|l| l.chars().count() != 1);
        for (k, s) in self.word.syllables.iter().enumerate() {
            if spaced && k > 0 {
                f.write_str(" ")?;
            }
            match self.labels.get(s.generator) {
                Some(l) => f.write_str(l)?,
                None => write!(f, "g{}", s.generator)?,
            }
            if s.exponent != 1 {
                write!(f, "^{}", s.exponent)?;
            }
        }
        Ok(())
    }
}

/// Default labels `a, b, ..., z, g26, g27, ...`.
pub fn default_labels(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("g{i}")
            }
        })
        .collect()
}

/// Images of the free generators in PSL(2,R).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Representation {
    generators: Vec<ProjectiveElement>,
    labels: Vec<String>,
}

impl Representation {
    pub fn new(generators: Vec<ProjectiveElement>) -> Result<Self, WordError> {
        let labels = default_labels(generators.len());
        Self::with_labels(generators, labels)
    }

    pub fn with_labels(generators: Vec<ProjectiveElement>, labels: Vec<String>) -> Result<Self, WordError> {
        if generators.is_empty() {
            return Err(WordError::NoGenerators);
        }
        if labels.len() != generators.len() {
            return Err(WordError::LabelCount {
                expected: generators.len(),
                found: labels.len(),
            });
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() {
                return Err(WordError::EmptyLabel);
            }
            if labels[..i].contains(l) {
                return Err(WordError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { generators, labels })
    }

    pub fn generators(&self) -> &[ProjectiveElement] {
        &self.generators
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Conjugates every generator: `g -> h g h^-1`.
    pub fn conjugate_by(&self, h: &ProjectiveElement) -> Self {
        Self {
            generators: self.generators.iter().map(|g| g.conjugate_by(h)).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Same labels, new generator images.
    pub fn map_generators<F: FnMut(&ProjectiveElement) -> ProjectiveElement>(&self, f: F) -> Self {
        Self {
            generators: self.generators.iter().map(f).collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn parse_word(&self, text: &str) -> Result<Word, WordError> {
        let w = Word::parse(text, &self.labels)?;
        self.check_word(&w)?;
        Ok(w)
    }

    pub fn display_word<'a>(&'a self, w: &'a Word) -> WordDisplay<'a> {
        w.display_with(&self.labels)
    }

    fn check_word(&self, w: &Word) -> Result<(), WordError> {
        match w.max_generator() {
            Some(index) if index >= self.generators.len() => Err(WordError::IndexOutOfRange {
                index,
                n_generators: self.generators.len(),
            }),
            _ => Ok(()),
        }
    }

    /// Unimodular product of the generator powers, left to right, without
    /// intermediate sign canonicalization.
    pub fn evaluate_matrix(&self, w: &Word) -> Result<UnimodularMatrix, WordError> {
        self.check_word(w)?;
        Ok(w.syllables.iter().fold(UnimodularMatrix::IDENTITY, |acc, s| {
            acc.mul(&self.generators[s.generator].rep().pow(s.exponent))
        }))
    }

    pub fn evaluate(&self, w: &Word) -> Result<ProjectiveElement, WordError> {
        self.evaluate_matrix(w).map(ProjectiveElement::from_matrix)
    }
}

/// Number of reduced words of length at most `radius` on `n` generators:
/// `1 + sum_{k=1..r} 2n (2n-1)^(k-1)`. Saturates at `u128::MAX`.
pub fn ball_size(n_generators: usize, radius: usize) -> u128 {
    let n = n_generators as u128;
    let mut total: u128 = 1;
    let mut layer: u128 = 2 * n;
    for _ in 0..radius {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul((2 * n).saturating_sub(1));
    }
    total
}

pub fn enumerate_ball(n_generators: usize, radius: usize) -> Result<Vec<Word>, WordError> {
    enumerate_ball_capped(n_generators, radius, DEFAULT_BALL_CAP)
}

/// All reduced words of length at most `radius`, ordered by length and then
/// lexicographically with letters ordered `a < a^-1 < b < b^-1 < ...`.
pub fn enumerate_ball_capped(n_generators: usize, radius: usize, cap: usize) -> Result<Vec<Word>, WordError> {
    if n_generators == 0 {
        return Err(WordError::NoGenerators);
    }
    let size = ball_size(n_generators, radius);
    if size > cap as u128 {
        return Err(WordError::BallTooLarge {
            n_generators,
            radius,
            cap,
        });
    }
    let mut out = Vec::with_capacity(size as usize);
    out.push(Word::identity());
    let n_letters = 2 * n_generators;
    let mut letters: Vec<usize> = Vec::with_capacity(radius);
    for len in 1..=radius {
        extend_words(n_letters, len, &mut letters, &mut out);
    }
    debug_assert_eq!(out.len() as u128, size);
    Ok(out)
}

// Letter 2g is generator g, letter 2g+1 its inverse; letters l and l^1 cancel.
fn extend_words(n_letters: usize, len: usize, letters: &mut Vec<usize>, out: &mut Vec<Word>) {
    if letters.len() == len {
        out.push(Word::reduce(
            letters.iter().map(|&l| (l / 2, if l % 2 == 0 { 1 } else { -1 })),
        ));
        return;
    }
    for l in 0..n_letters {
        if letters.last().is_some_and(|&p| p ^ 1 == l) {
            continue;
        }
        letters.push(l);
        extend_words(n_letters, len, letters, out);
        letters.pop();
    }
}
