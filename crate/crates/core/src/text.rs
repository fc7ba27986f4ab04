//! Word, sentence, and syllable counts plus the Flesch–Kincaid grade level.
//!
//! The tokenizer rules are deliberately simple and fixed so that computed
//! metrics are reproducible across runs and platforms:
//!
//! - a *word* is a whitespace-delimited token containing at least one
//!   alphanumeric character;
//! - a *sentence boundary* is `.`, `!`, or `?` followed by whitespace or end
//!   of input; a trailing unterminated segment containing a word counts as a
//!   sentence;
//! - *syllables* per word: count maximal runs of vowels (`aeiouy`, case
//!   insensitive) over the word's alphabetic characters, subtract one for a
//!   trailing silent `e` when more than one run was found, floor at one.

use crate::error::{Error, Result};

/// Number of whitespace-delimited tokens containing at least one alphanumeric.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace()
        .filter(|tok| tok.chars().any(char::is_alphanumeric))
        .count()
}

/// Number of sentences under the documented boundary rule.
pub fn sentence_count(text: &str) -> usize {
    let mut count = 0;
    let mut segment_start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((idx, ch)) = chars.next() {
        if matches!(ch, '.' | '!' | '?') {
            let at_boundary = match chars.peek() {
                None => true,
                Some((_, next)) => next.is_whitespace(),
            };
            if at_boundary {
                if word_count(&text[segment_start..=idx]) > 0 {
                    count += 1;
                }
                segment_start = idx + ch.len_utf8();
            }
        }
    }
    if segment_start < text.len() && word_count(&text[segment_start..]) > 0 {
        count += 1;
    }
    count
}

/// Heuristic syllable count for a single token.
pub fn syllables_in_word(word: &str) -> usize {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .map(|c| c.to_ascii_lowercase())
        .collect();
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut runs = 0;
    let mut in_run = false;
    for &c in &letters {
        if is_vowel(c) {
            if !in_run {
                runs += 1;
            }
            in_run = true;
        } else {
            in_run = false;
        }
    }
    if runs > 1 && letters.last() == Some(&'e') {
        runs -= 1;
    }
    runs.max(1)
}

/// Total syllables over all counted words.
pub fn syllable_count(text: &str) -> usize {
    text.split_whitespace()
        .filter(|tok| tok.chars().any(char::is_alphanumeric))
        .map(syllables_in_word)
        .sum()
}

/// Flesch–Kincaid grade level:
/// `0.39 * (words/sentences) + 11.8 * (syllables/words) - 15.59`.
pub fn flesch_kincaid(text: &str) -> Result<f64> {
    let words = word_count(text);
    let sentences = sentence_count(text);
    if words == 0 || sentences == 0 {
        return Err(Error::validation(
            "cannot score readability: text contains no words",
        ));
    }
    let syllables = syllable_count(text);
    Ok(0.39 * (words as f64 / sentences as f64) + 11.8 * (syllables as f64 / words as f64)
        - 15.59)
}
