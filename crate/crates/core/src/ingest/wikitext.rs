//! Pragmatic wikitext-to-plain-text conversion.
//!
//! Supported: templates (nested), internal/external links, bold and italic
//! quotes, headings, tables, refs and other content-bearing tags, comments,
//! magic words and list markers. Anything else passes through as text.

use super::{nfc, AnchorLink};

const CONTEXT_CHARS: usize = 60;
const MAX_PASSES: usize = 8;

const DROPPED_NAMESPACES: &[&str] = &[
    "file", "datei", "image", "bild", "media", "category", "kategorie",
];

const OTHER_NAMESPACES: &[&str] = &[
    "wikipedia", "wp", "vorlage", "template", "hilfe", "help", "portal", "benutzer", "user",
    "diskussion", "talk", "spezial", "special", "mediawiki", "modul", "module", "wiktionary",
    "commons", "wikt", "w",
];

/// Tags whose whole content is discarded.
const DROPPED_TAGS: &[&str] = &[
    "ref", "references", "math", "gallery", "timeline", "score", "syntaxhighlight", "source",
    "imagemap", "templatedata", "mapframe", "maplink", "graph", "hiero", "chem",
];

const URL_SCHEMES: &[&str] = &["http://", "https://", "ftp://", "//", "mailto:"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripIssue {
    /// Byte offset into the NFC-normalized input.
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stripped {
    pub plain_text: String,
    pub links: Vec<AnchorLink>,
    /// Inter-language links such as `[[de:München]]`, as (wiki code, title).
    pub langlinks: Vec<(String, String)>,
    pub display_title: Option<String>,
    pub issues: Vec<StripIssue>,
}

/// Converts wikitext into collapsed plain text plus the anchor links found in it.
///
/// Never fails: unbalanced constructs are dropped to the end of their line and
/// recorded in [`Stripped::issues`].
pub fn strip_wikitext(wikitext: &str) -> Stripped {
    let source = nfc(wikitext);
    let source = remove_comments(&source);
    let mut scanner = Scanner::new(&source, true);
    scanner.run();

    let mut text = scanner.out.buf;
    let links = scanner
        .spans
        .into_iter()
        .map(|span| AnchorLink {
            context_snippet: context(&text, span.start, span.end),
            target_title: span.target,
            anchor_text: span.anchor,
        })
        .collect();

    // Removing markup can juxtapose characters into new markup; iterate to a fixpoint.
    for _ in 0..MAX_PASSES {
        let mut again = Scanner::new(&text, false);
        again.run();
        if again.out.buf == text {
            break;
        }
        text = again.out.buf;
    }

    Stripped {
        plain_text: text,
        links,
        langlinks: scanner.langlinks,
        display_title: scanner.display_title,
        issues: scanner.issues,
    }
}

fn remove_comments(source: &str) -> String {
    let mut out = String::with_capacity(source.len());
    let mut rest = source;
    while let Some(start) = rest.find("<!--") {
        out.push_str(&rest[..start]);
        match rest[start + 4..].find("-->") {
            Some(end) => rest = &rest[start + 4 + end + 3..],
            None => {
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

fn context(text: &str, start: usize, end: usize) -> String {
    let before: Vec<(usize, char)> = text[..start].char_indices().collect();
    let from = if before.len() > CONTEXT_CHARS {
        before[before.len() - CONTEXT_CHARS].0
    } else {
        0
    };
    let to = text[end..]
        .char_indices()
        .nth(CONTEXT_CHARS)
        .map_or(text.len(), |(i, _)| end + i);
    text[from..to].trim().to_owned()
}

/// Whitespace-collapsing output buffer.
#[derive(Default)]
struct Out {
    buf: String,
    pending_space: bool,
}

impl Out {
    fn push_char(&mut self, c: char) {
        if c.is_whitespace() {
            self.pending_space = true;
            return;
        }
        if self.pending_space && !self.buf.is_empty() {
            self.buf.push(' ');
        }
        self.pending_space = false;
        self.buf.push(c);
    }

    fn push_str(&mut self, s: &str) {
        s.chars().for_each(|c| self.push_char(c));
    }

    fn space(&mut self) {
        self.pending_space = true;
    }

    /// Pushes already-collapsed text and returns its byte span.
    fn push_span(&mut self, s: &str) -> (usize, usize) {
        let mut chars = s.chars();
        match chars.next() {
            Some(first) => {
                self.push_char(first);
                let start = self.buf.len() - first.len_utf8();
                chars.for_each(|c| self.push_char(c));
                (start, self.buf.len())
            }
            None => (self.buf.len(), self.buf.len()),
        }
    }
}

struct LinkSpan {
    start: usize,
    end: usize,
    target: String,
    anchor: String,
}

struct Scanner<'a> {
    src: &'a str,
    pos: usize,
    out: Out,
    spans: Vec<LinkSpan>,
    langlinks: Vec<(String, String)>,
    display_title: Option<String>,
    issues: Vec<StripIssue>,
    record: bool,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str, record: bool) -> Self {
        Self {
            src,
            pos: 0,
            out: Out::default(),
            spans: Vec::new(),
            langlinks: Vec::new(),
            display_title: None,
            issues: Vec::new(),
            record,
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn line_end(&self, from: usize) -> usize {
        self.src[from..].find('\n').map_or(self.src.len(), |i| from + i)
    }

    fn issue(&mut self, message: impl Into<String>) {
        if self.record {
            self.issues.push(StripIssue {
                offset: self.pos,
                message: message.into(),
            });
        }
    }

    fn drop_to_line_end(&mut self, message: &str) {
        self.issue(message);
        self.pos = self.line_end(self.pos);
    }

    fn run(&mut self) {
        let mut at_line_start = true;
        while self.pos < self.src.len() {
            if at_line_start {
                at_line_start = false;
                if self.line_start() {
                    continue;
                }
            }
            let rest = self.rest();
            if rest.starts_with("{{") {
                self.template();
            } else if rest.starts_with("[[") {
                self.internal_link();
            } else if rest.starts_with("}}") || rest.starts_with("]]") {
                self.issue("unmatched closing bracket");
                self.pos += 2;
            } else if rest.starts_with("''") {
                self.pos += rest.bytes().take_while(|&b| b == b'\'').count();
            } else if rest.starts_with('[') && URL_SCHEMES.iter().any(|s| rest[1..].starts_with(s)) {
                self.external_link();
            } else if rest.starts_with('<') {
                self.tag();
            } else if rest.starts_with("__") && self.magic_word() {
            } else if rest.starts_with("&nbsp;") {
                self.out.space();
                self.pos += "&nbsp;".len();
            } else {
                let c = rest.chars().next().unwrap_or(' ');
                self.pos += c.len_utf8();
                if c == '\n' {
                    at_line_start = true;
                }
                self.out.push_char(c);
            }
        }
    }

    /// Handles constructs only recognised at the start of a line. Returns true
    /// when the scanner position moved past the construct.
    fn line_start(&mut self) -> bool {
        let end = self.line_end(self.pos);
        let line = &self.src[self.pos..end];
        let trimmed = line.trim();
        if trimmed.len() >= 2 && trimmed.starts_with('=') && trimmed.ends_with('=') {
            self.out.space();
            self.pos = end;
            return true;
        }
        if trimmed.starts_with("----") && trimmed.chars().all(|c| c == '-') {
            self.pos = end;
            return true;
        }
        let lead = line.len() - line.trim_start_matches([' ', '\t', ':']).len();
        if line[lead..].starts_with("{|") {
            self.pos += lead;
            self.table();
            return true;
        }
        let markers = line
            .bytes()
            .take_while(|b| matches!(b, b'*' | b'#' | b':' | b';'))
            .count();
        if markers > 0 {
            self.pos += markers;
            self.out.space();
            return true;
        }
        false
    }

    fn table(&mut self) {
        let mut depth = 0usize;
        let mut cursor = self.pos;
        while cursor < self.src.len() {
            let end = self.line_end(cursor);
            let line = self.src[cursor..end].trim_start_matches([' ', '\t', ':']);
            if line.starts_with("{|") {
                depth += 1;
            } else if line.starts_with("|}") {
                depth -= 1;
                if depth == 0 {
                    self.pos = end;
                    self.out.space();
                    return;
                }
            }
            cursor = end + 1;
        }
        self.drop_to_line_end("unclosed table");
    }

    /// Finds the end of a bracketed construct starting at `self.pos`, where the
    /// opener and closer are both two bytes long. Returns the index just past the closer.
    fn matching(&self, open: &str, close: &str) -> Option<usize> {
        let bytes = self.src.as_bytes();
        let mut depth = 0usize;
        let mut i = self.pos;
        while i + 1 < bytes.len() {
            if bytes[i..].starts_with(open.as_bytes()) {
                depth += 1;
                i += 2;
            } else if bytes[i..].starts_with(close.as_bytes()) {
                depth -= 1;
                i += 2;
                if depth == 0 {
                    return Some(i);
                }
            } else {
                i += 1;
            }
        }
        None
    }

    fn template(&mut self) {
        let Some(end) = self.matching("{{", "}}") else {
            self.drop_to_line_end("unbalanced template braces");
            return;
        };
        let inner = &self.src[self.pos + 2..end - 2];
        if let Some(title) = inner.trim_start().strip_prefix("DISPLAYTITLE:") {
            if self.record {
                let title = render_inline(title);
                if !title.is_empty() {
                    self.display_title = Some(title);
                }
            }
        }
        self.pos = end;
    }

    fn internal_link(&mut self) {
        let Some(end) = self.matching("[[", "]]") else {
            self.drop_to_line_end("unclosed internal link");
            return;
        };
        let inner = &self.src[self.pos + 2..end - 2];
        self.pos = end;

        let (target_raw, anchor_raw) = split_link(inner);
        let mut target = target_raw.trim();
        let colon_link = target.starts_with(':');
        if colon_link {
            target = target[1..].trim_start();
        }

        let prefix = target
            .split_once(':')
            .map(|(p, rest)| (p.trim().to_lowercase(), rest.trim()));
        let mut record = true;
        if let Some((prefix, rest)) = &prefix {
            if DROPPED_NAMESPACES.contains(&prefix.as_str()) && !colon_link {
                return;
            }
            if OTHER_NAMESPACES.contains(&prefix.as_str()) || DROPPED_NAMESPACES.contains(&prefix.as_str()) {
                record = false;
            } else if is_wiki_code(prefix) {
                if colon_link {
                    record = false;
                } else {
                    if self.record && !rest.is_empty() {
                        self.langlinks.push((prefix.clone(), nfc(rest)));
                    }
                    return;
                }
            }
        }

        let display_target = target.replace('_', " ");
        let mut anchor = match anchor_raw {
            Some(raw) => render_inline(raw),
            None => String::new(),
        };
        if anchor.is_empty() {
            anchor = render_inline(&display_target);
        }
        let trail: String = self.rest().chars().take_while(|c| c.is_alphabetic()).collect();
        self.pos += trail.len();
        anchor.push_str(&trail);

        let title = normalize_title(target.split('#').next().unwrap_or(""));
        let (start, end) = self.out.push_span(&anchor);
        if record && self.record && !title.is_empty() && !anchor.trim().is_empty() {
            self.spans.push(LinkSpan {
                start,
                end,
                target: title,
                anchor,
            });
        }
    }

    fn external_link(&mut self) {
        let line_end = self.line_end(self.pos);
        let Some(close) = self.src[self.pos..line_end].find(']') else {
            // Unclosed: drop the bracket, keep the URL text.
            self.pos += 1;
            return;
        };
        let inner = &self.src[self.pos + 1..self.pos + close];
        self.pos += close + 1;
        if let Some((_, label)) = inner.split_once(' ') {
            let label = render_inline(label);
            self.out.push_str(&label);
        }
    }

    fn tag(&mut self) {
        let rest = self.rest();
        let (closing, body) = match rest[1..].strip_prefix('/') {
            Some(body) => (true, body),
            None => (false, &rest[1..]),
        };
        let name_len = body.bytes().take_while(|b| b.is_ascii_alphanumeric()).count();
        let tag_end = self.src[self.pos..self.line_end(self.pos)].find('>');
        let (true, Some(tag_end)) = (body.starts_with(|c: char| c.is_ascii_alphabetic()), tag_end) else {
            self.out.push_char('<');
            self.pos += 1;
            return;
        };
        let name = body[..name_len].to_ascii_lowercase();
        let self_closing = self.src[..self.pos + tag_end].ends_with('/');
        self.pos += tag_end + 1;

        if name == "br" {
            self.out.space();
            return;
        }
        if closing || self_closing || !DROPPED_TAGS.contains(&name.as_str()) {
            return;
        }
        let lower = self.rest().to_ascii_lowercase();
        let needle = format!("</{name}");
        match lower.find(&needle) {
            Some(i) => {
                let after = self.pos + i;
                let close = self.src[after..].find('>').map_or(self.src.len(), |j| after + j + 1);
                self.pos = close;
                self.out.space();
            }
            None => self.drop_to_line_end(&format!("unclosed <{name}> tag")),
        }
    }

    fn magic_word(&mut self) -> bool {
        let rest = &self.rest()[2..];
        let word = rest.bytes().take_while(|b| b.is_ascii_uppercase()).count();
        if word > 0 && rest[word..].starts_with("__") {
            self.pos += word + 4;
            true
        } else {
            false
        }
    }
}

/// Splits link content at the first top-level pipe.
fn split_link(inner: &str) -> (&str, Option<&str>) {
    let bytes = inner.as_bytes();
    let mut depth = 0i32;
    let mut i = 0;
    while i < bytes.len() {
        match &bytes[i..] {
            [b'[', b'[', ..] | [b'{', b'{', ..] => {
                depth += 1;
                i += 2;
            }
            [b']', b']', ..] | [b'}', b'}', ..] => {
                depth -= 1;
                i += 2;
            }
            [b'|', ..] if depth == 0 => return (&inner[..i], Some(&inner[i + 1..])),
            _ => i += 1,
        }
    }
    (inner, None)
}

fn render_inline(source: &str) -> String {
    let mut scanner = Scanner::new(source, false);
    scanner.run();
    scanner.out.buf
}

fn is_wiki_code(prefix: &str) -> bool {
    let mut parts = prefix.split('-');
    let head = parts.next().unwrap_or("");
    (2..=3).contains(&head.len())
        && head.bytes().all(|b| b.is_ascii_lowercase())
        && parts.all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_lowercase()))
}

/// MediaWiki title normalization: underscores as spaces, collapsed whitespace,
/// upper-cased first letter.
pub(crate) fn normalize_title(title: &str) -> String {
    let spaced = title.replace('_', " ");
    let collapsed = spaced.split_whitespace().collect::<Vec<_>>().join(" ");
    let mut chars = collapsed.chars();
    match chars.next() {
        Some(first) => nfc(&(first.to_uppercase().collect::<String>() + chars.as_str())),
        None => String::new(),
    }
}
