use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{bail, Result};

/// One generator of a word, possibly inverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub inverted: bool,
}

impl Letter {
    pub fn forward(generator: usize) -> Self {
        Letter { generator, inverted: false }
    }

    pub fn inverse(generator: usize) -> Self {
        Letter { generator, inverted: true }
    }

    pub fn inv(self) -> Self {
        Letter { generator: self.generator, inverted: !self.inverted }
    }

    /// `+i` / `-i`, 1-based.
    pub fn signed(self) -> i64 {
        let i = self.generator as i64 + 1;
        if self.inverted {
            -i
        } else {
            i
        }
    }

    pub fn from_signed(s: i64) -> Result<Self> {
        if s == 0 {
            bail!(Input, "letter 0 is not a generator (letters are 1-based)");
        }
        Ok(Letter { generator: (s.unsigned_abs() - 1) as usize, inverted: s < 0 })
    }
}

/// A composition of generators.
///
/// Letters are stored in composition order: `letters[0]` is applied *last*,
/// so `[a, b]` acts as `a ∘ b`. Time-ordered symbol sequences such as the
/// fiberwise sequence `ω = (ω₁, ω₂, …)` convert with [`Word::from_time_order`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    /// Builds the composition `f_{ωₙ} ∘ … ∘ f_{ω₁}` from the sequence
    /// `ω₁, …, ωₙ` given in the order the maps are applied.
    pub fn from_time_order<I: IntoIterator<Item = Letter>>(seq: I) -> Self {
        let mut v: Vec<Letter> = seq.into_iter().collect();
        v.reverse();
        Word(v)
    }

    pub fn power(letter: Letter, n: usize) -> Self {
        Word(vec![letter; n])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Letters in the order they act on a point.
    pub fn time_order(&self) -> impl DoubleEndedIterator<Item = Letter> + '_ {
        self.0.iter().rev().copied()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&inner.0);
        Word(v)
    }

    /// The first `i` letters to act, as a word (`f_ω^i`).
    pub fn first_acting(&self, i: usize) -> Word {
        let n = self.0.len();
        Word(self.0[n - i.min(n)..].to_vec())
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn uses_inverses(&self) -> bool {
        self.0.iter().any(|l| l.inverted)
    }

    pub fn to_signed(&self) -> Vec<i64> {
        self.0.iter().map(|l| l.signed()).collect()
    }

    pub fn from_signed(s: &[i64]) -> Result<Self> {
        s.iter().map(|&x| Letter::from_signed(x)).collect::<Result<Vec<_>>>().map(Word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.to_signed().iter().map(|s| s.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

impl Serialize for Word {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        self.to_signed().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<i64>::deserialize(d)?;
        Word::from_signed(&v).map_err(serde::de::Error::custom)
    }
}

/// Number of words of length at most `max_len` over `alphabet` letters.
pub fn word_count(alphabet: usize, max_len: usize) -> Option<u64> {
    let mut total: u64 = 0;
    let mut level: u64 = 1;
    for _ in 0..=max_len {
        total = total.checked_add(level)?;
        level = level.checked_mul(alphabet as u64)?;
    }
    Some(total)
}

/// All words of length `≤ max_len`, shortest first, lexicographic within a
/// length. The alphabet is `f₁ … f_k` followed by `f₁⁻¹ … f_k⁻¹` when
/// inverses are requested. Fails if the count exceeds `max_words`.
pub fn enumerate_words(k: usize, max_len: usize, with_inverses: bool, max_words: u64) -> Result<WordIter> {
    if k == 0 {
        bail!(Input, "a system needs at least one generator");
    }
    let alphabet = if with_inverses { 2 * k } else { k };
    match word_count(alphabet, max_len) {
        Some(c) if c <= max_words => {}
        _ => bail!(Budget, "words up to length {max_len} over {alphabet} letters exceed the budget of {max_words}"),
    }
    Ok(WordIter { k, alphabet, max_len, digits: Vec::new(), done: false })
}

/// Iterator returned by [`enumerate_words`].
#[derive(Debug, Clone)]
pub struct WordIter {
    k: usize,
    alphabet: usize,
    max_len: usize,
    digits: Vec<usize>,
    done: bool,
}

impl WordIter {
    fn letter(&self, d: usize) -> Letter {
        if d < self.k {
            Letter::forward(d)
        } else {
            Letter::inverse(d - self.k)
        }
    }

    fn advance(&mut self) {
        for i in (0..self.digits.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.alphabet {
                return;
            }
            self.digits[i] = 0;
        }
        if self.digits.len() == self.max_len {
            self.done = true;
        } else {
            self.digits = vec![0; self.digits.len() + 1];
        }
    }
}

impl Iterator for WordIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        let w = Word(self.digits.iter().map(|&d| self.letter(d)).collect());
        self.advance();
        Some(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn small_enumerations() {
        let ws: Vec<Word> = enumerate_words(2, 1, false, 100).unwrap().collect();
        assert_eq!(ws, vec![Word::empty(), Word::new(vec![Letter::forward(0)]), Word::new(vec![Letter::forward(1)])]);
        assert_eq!(enumerate_words(2, 2, false, 100).unwrap().count(), 7);
        assert_eq!(enumerate_words(1, 0, true, 100).unwrap().count(), 1);
    }

    #[test]
    fn inverse_enumeration_count_and_uniqueness() {
        // 1 + 4 + ... + 4^8
        let expected: u64 = (0..=8).map(|i| 4u64.pow(i)).sum();
        assert_eq!(expected, 87_381);
        let ws: HashSet<Word> = enumerate_words(2, 8, true, 1_000_000).unwrap().collect();
        assert_eq!(ws.len() as u64, expected);
    }

    #[test]
    fn length_lexicographic_order() {
        let ws: Vec<Word> = enumerate_words(3, 3, false, 1000).unwrap().collect();
        for pair in ws.windows(2) {
            assert!((pair[0].len(), &pair[0]) < (pair[1].len(), &pair[1]));
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(enumerate_words(2, 20, true, 1_000_000), Err(crate::Error::Budget(_))));
        assert!(enumerate_words(0, 2, false, 10).is_err());
    }

    #[test]
    fn signed_serialisation() {
        let w = Word::new(vec![Letter::forward(0), Letter::inverse(1)]);
        assert_eq!(serde_json::to_string(&w).unwrap(), "[1,-2]");
        let back: Word = serde_json::from_str("[1,-2]").unwrap();
        assert_eq!(back, w);
        assert!(serde_json::from_str::<Word>("[0]").is_err());
    }

    #[test]
    fn time_order_and_prefixes() {
        let w = Word::from_time_order([Letter::forward(0), Letter::forward(1), Letter::forward(1)]);
        assert_eq!(w.to_signed(), vec![2, 2, 1]);
        assert_eq!(w.first_acting(1).to_signed(), vec![1]);
        assert_eq!(w.first_acting(2).to_signed(), vec![2, 1]);
        assert_eq!(w.inverse().to_signed(), vec![-1, -2, -2]);
    }
}
