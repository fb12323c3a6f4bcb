use crate::ingest::Article;
use crate::lexindex::{token_spans, tokenize};

use super::{Document, Query};

pub const DOCUMENT_TOKENS: usize = 200;

/// Words that end with a period without ending the sentence.
const ABBREVIATIONS: &[&str] = &[
    "abk", "amtl", "amtli", "bzw", "ca", "dt", "dr", "engl", "etc", "evtl", "franz", "geb", "gest",
    "ggf", "hl", "inkl", "ital", "jh", "jhd", "lat", "mio", "mrd", "nr", "prof", "resp", "sog", "st",
    "usw", "vgl", "zb",
];

/// Builds a query from the display title, unless the title is purely numeric.
pub fn extract_query(article: &Article) -> Option<Query> {
    let title = article.display_title.trim();
    let mut alnum = title.chars().filter(|c| c.is_alphanumeric()).peekable();
    alnum.peek()?;
    if alnum.all(char::is_numeric) {
        return None;
    }
    Some(Query {
        qid: article.id.clone(),
        dialect: article.dialect.clone(),
        dialect_title: title.to_owned(),
        entity_title: article.canonical_title.clone(),
        german_title: article.german_title.clone(),
        text: title.to_owned(),
    })
}

/// First 200 tokens of the article text after removing lexical shortcuts.
pub fn extract_document(article: &Article) -> Document {
    let text = match &article.german_title {
        Some(german) => remove_lexical_shortcuts(&article.plain_text, german, &article.display_title),
        None => article.plain_text.clone(),
    };
    let (text, token_count) = truncate_tokens(&text, DOCUMENT_TOKENS);
    Document {
        doc_id: article.id.clone(),
        dialect: article.dialect.clone(),
        text,
        token_count,
    }
}

/// Cuts `text` right after its `limit`-th token.
pub fn truncate_tokens(text: &str, limit: usize) -> (String, usize) {
    let spans = token_spans(text);
    if spans.len() <= limit {
        return (text.to_owned(), spans.len());
    }
    let end = spans[limit - 1].0.end;
    (text[..end].to_owned(), limit)
}

/// Deletes standard-German spellings of the title from the first sentence:
/// parenthesized spans mentioning `german_title`, then bare occurrences of it.
/// Later sentences are untouched. Nothing is removed when the German title
/// tokenizes the same as the dialect title, since it is then no shortcut.
pub fn remove_lexical_shortcuts(text: &str, german_title: &str, dialect_title: &str) -> String {
    let german_title = german_title.trim();
    if german_title.is_empty() || tokenize(german_title) == tokenize(dialect_title) {
        return text.to_owned();
    }
    let split = first_sentence_end(text);
    let (first, rest) = text.split_at(split);

    let mut sentence = remove_parentheticals(first, german_title);
    sentence = remove_bare(&sentence, german_title);
    let sentence = sentence.split_whitespace().collect::<Vec<_>>().join(" ");

    match (sentence.is_empty(), rest.is_empty()) {
        (_, true) => sentence,
        (true, false) => rest.trim_start().to_owned(),
        (false, false) => {
            let separator = if rest.starts_with(char::is_whitespace) { " " } else { "" };
            format!("{sentence}{separator}{}", rest.trim_start())
        }
    }
}

/// Byte offset just past the terminator of the first sentence (or the text length).
fn first_sentence_end(text: &str) -> usize {
    let mut depth = 0i32;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    for (pos, &(i, c)) in chars.iter().enumerate() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth = (depth - 1).max(0),
            '.' | '!' | '?' if depth == 0 => {
                let followed_by_space = chars.get(pos + 1).is_none_or(|(_, n)| n.is_whitespace());
                if !followed_by_space {
                    continue;
                }
                if c == '.' && is_abbreviation(&text[..i]) {
                    continue;
                }
                return i + c.len_utf8();
            }
            _ => {}
        }
    }
    text.len()
}

fn is_abbreviation(before: &str) -> bool {
    let word: String = before
        .chars()
        .rev()
        .take_while(|c| c.is_alphanumeric())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    if word.is_empty() {
        return false;
    }
    word.chars().all(|c| c.is_numeric())
        || word.chars().count() == 1
        || ABBREVIATIONS.contains(&word.to_lowercase().as_str())
}

fn remove_parentheticals(sentence: &str, german_title: &str) -> String {
    let mut out = String::with_capacity(sentence.len());
    let mut rest = sentence;
    while let Some(open) = rest.find('(') {
        let mut depth = 0;
        let close = rest[open..].char_indices().find_map(|(i, c)| {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(open + i);
                    }
                }
                _ => {}
            }
            None
        });
        let Some(close) = close else { break };
        let span = &rest[open..=close];
        out.push_str(&rest[..open]);
        if !span.contains(german_title) {
            out.push_str(span);
        }
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    out
}

fn remove_bare(sentence: &str, german_title: &str) -> String {
    let mut out = String::with_capacity(sentence.len());
    let mut rest = sentence;
    while let Some(at) = rest.find(german_title) {
        let end = at + german_title.len();
        let before_ok = rest[..at].chars().next_back().is_none_or(|c| !c.is_alphanumeric());
        let after_ok = rest[end..].chars().next().is_none_or(|c| !c.is_alphanumeric());
        out.push_str(&rest[..at]);
        if !(before_ok && after_ok) {
            out.push_str(german_title);
        }
        rest = &rest[end..];
    }
    out.push_str(rest);
    out
}
