use std::borrow::Borrow;
use std::fmt;
use std::ops::{Deref, Range};

use unicode_normalization::UnicodeNormalization;

/// A case-folded run of letters and digits. Diacritics are kept.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token(String);

impl Token {
    /// Wraps a string that is already a valid token (as produced by [`tokenize`]).
    pub(crate) fn from_folded(s: String) -> Self {
        Self(s)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Deref for Token {
    type Target = str;

    fn deref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Token {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl PartialEq<&str> for Token {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

fn fold(piece: &str) -> Option<Token> {
    let folded: String = piece
        .chars()
        .flat_map(char::to_lowercase)
        .filter(|c| c.is_alphanumeric())
        .nfc()
        .collect();
    (!folded.is_empty()).then_some(Token(folded))
}

/// Tokens of `text` with their byte ranges. `text` must already be NFC.
pub fn token_spans(text: &str) -> Vec<(Range<usize>, Token)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
        match (c.is_alphanumeric(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if let Some(token) = fold(&text[s..i]) {
                    spans.push((s..i, token));
                }
                start = None;
            }
            _ => {}
        }
    }
    spans
}

/// NFC, lowercase, split on anything that is not a letter or digit.
/// No stemming and no stopword removal.
pub fn tokenize(text: &str) -> Vec<Token> {
    let normalized: String = text.nfc().collect();
    token_spans(&normalized).into_iter().map(|(_, t)| t).collect()
}

/// True iff `phrase` occurs as a contiguous run inside `tokens`.
pub fn contains_phrase(tokens: &[Token], phrase: &[Token]) -> bool {
    !phrase.is_empty() && tokens.windows(phrase.len()).any(|w| w == phrase)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strs(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(Token::as_str).collect()
    }

    #[test]
    fn ipa_letters_are_letters() {
        let tokens = tokenize("Minga [ˈmɪŋ(ː)ɐ] is");
        assert_eq!(strs(&tokens), ["minga", "ˈmɪŋ", "ː", "ɐ", "is"]);
    }

    #[test]
    fn empty() {
        assert!(tokenize("").is_empty());
        assert!(tokenize(" ,;. ").is_empty());
    }

    #[test]
    fn umlauts_preserved() {
        assert_eq!(strs(&tokenize("Münche, Minga; Münsche")), ["münche", "minga", "münsche"]);
    }

    #[test]
    fn decomposed_input_is_composed() {
        assert_eq!(strs(&tokenize("Mu\u{308}nchen")), ["münchen"]);
    }

    #[test]
    fn apostrophes_split() {
        assert_eq!(strs(&tokenize("d'Haptstod Münch'n K2")), ["d", "haptstod", "münch", "n", "k2"]);
    }

    #[test]
    fn spans_cover_surface() {
        let text = "Oans, zwoa  drei.";
        let spans = token_spans(text);
        let surfaces: Vec<&str> = spans.iter().map(|(r, _)| &text[r.clone()]).collect();
        assert_eq!(surfaces, ["Oans", "zwoa", "drei"]);
    }
}
