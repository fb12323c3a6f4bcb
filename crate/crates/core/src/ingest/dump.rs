use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use quick_xml::events::Event;
use quick_xml::Reader;

use super::wikitext::normalize_title;
use super::{nfc, DialectCode, IngestError, RawPage};

/// Opens a MediaWiki export, transparently decompressing `.bz2` files.
pub fn open_dump(path: &Path) -> Result<Box<dyn BufRead>, IngestError> {
    let file = File::open(path)?;
    if path.extension().is_some_and(|e| e == "bz2") {
        Ok(Box::new(BufReader::new(bzip2::read::MultiBzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

#[derive(Default)]
struct PageBuilder {
    title: String,
    ns: Option<i64>,
    id: Option<u64>,
    redirect: Option<String>,
    text: String,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Field {
    None,
    Title,
    Ns,
    Id,
    Text,
}

/// Parses a MediaWiki XML export into main-namespace pages ordered by page id.
pub fn parse_dump<R: BufRead>(input: R, dialect: &DialectCode) -> Result<Vec<RawPage>, IngestError> {
    let mut reader = Reader::from_reader(input);
    let mut buf = Vec::new();
    let mut pages = Vec::new();
    let mut current: Option<PageBuilder> = None;
    let mut field = Field::None;
    let mut in_revision = false;

    let xml_error = |reader: &Reader<R>, message: String| IngestError::Xml {
        offset: reader.error_position(),
        message,
    };

    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| xml_error(&reader, e.to_string()))?;
        match event {
            Event::Start(e) => {
                let name = e.local_name();
                match (name.as_ref(), current.as_mut()) {
                    (b"page", _) => current = Some(PageBuilder::default()),
                    (b"revision", Some(_)) => in_revision = true,
                    (b"title", Some(_)) => field = Field::Title,
                    (b"ns", Some(_)) => field = Field::Ns,
                    (b"id", Some(_)) if !in_revision => field = Field::Id,
                    (b"text", Some(_)) if in_revision => field = Field::Text,
                    _ => {}
                }
            }
            Event::Empty(e) => {
                if let (b"redirect", Some(page)) = (e.local_name().as_ref(), current.as_mut()) {
                    for attr in e.attributes().flatten() {
                        if attr.key.local_name().as_ref() == b"title" {
                            let value = attr
                                .unescape_value()
                                .map_err(|e| xml_error(&reader, e.to_string()))?;
                            page.redirect = Some(value.into_owned());
                        }
                    }
                }
            }
            Event::Text(e) => {
                if let Some(page) = current.as_mut() {
                    let text = e.unescape().map_err(|e| xml_error(&reader, e.to_string()))?;
                    push_field(page, field, &text, &reader)?;
                }
            }
            Event::CData(e) => {
                if let Some(page) = current.as_mut() {
                    let text = String::from_utf8_lossy(&e.into_inner()).into_owned();
                    push_field(page, field, &text, &reader)?;
                }
            }
            Event::End(e) => match e.local_name().as_ref() {
                b"page" => {
                    if let Some(page) = current.take() {
                        if let Some(raw) = finish_page(page, dialect, &reader)? {
                            pages.push(raw);
                        }
                    }
                    in_revision = false;
                }
                b"revision" => in_revision = false,
                _ => field = Field::None,
            },
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if current.is_some() {
        return Err(xml_error(&reader, "unterminated <page> element".to_owned()));
    }

    pages.sort_by_key(|p| p.page_id);
    if let Some(pair) = pages.windows(2).find(|w| w[0].page_id == w[1].page_id) {
        return Err(IngestError::Xml {
            offset: reader.buffer_position(),
            message: format!("duplicate page id {}", pair[0].page_id),
        });
    }
    Ok(pages)
}

fn push_field<R>(page: &mut PageBuilder, field: Field, text: &str, reader: &Reader<R>) -> Result<(), IngestError> {
    match field {
        Field::Title => page.title.push_str(text),
        Field::Text => page.text.push_str(text),
        Field::Ns => {
            let ns = text.trim().parse().map_err(|_| IngestError::Xml {
                offset: reader.buffer_position(),
                message: format!("invalid namespace {text:?}"),
            })?;
            page.ns = Some(ns);
        }
        Field::Id => {
            let id = text.trim().parse().map_err(|_| IngestError::Xml {
                offset: reader.buffer_position(),
                message: format!("invalid page id {text:?}"),
            })?;
            page.id = Some(id);
        }
        Field::None => {}
    }
    Ok(())
}

fn finish_page<R>(page: PageBuilder, dialect: &DialectCode, reader: &Reader<R>) -> Result<Option<RawPage>, IngestError> {
    let title = nfc(page.title.trim());
    let main_namespace = match page.ns {
        Some(ns) => ns == 0,
        None => !has_namespace_prefix(&title),
    };
    if !main_namespace {
        return Ok(None);
    }
    let page_id = page.id.filter(|&id| id > 0).ok_or_else(|| IngestError::Xml {
        offset: reader.buffer_position(),
        message: format!("page {title:?} has no positive id"),
    })?;
    let redirect_target = page
        .redirect
        .map(|t| normalize_title(&t))
        .or_else(|| redirect_from_wikitext(&page.text))
        .filter(|t| !t.is_empty());
    let wikitext = if redirect_target.is_some() { String::new() } else { page.text };
    Ok(Some(RawPage {
        page_id,
        display_title: title.clone(),
        canonical_title: title,
        wikitext,
        redirect_target,
        dialect: dialect.clone(),
        subdialect_tag: None,
    }))
}

fn has_namespace_prefix(title: &str) -> bool {
    const PREFIXES: &[&str] = &[
        "Talk:", "Diskussion:", "User:", "Benutzer:", "Wikipedia:", "File:", "Datei:", "Template:",
        "Vorlage:", "Category:", "Kategorie:", "Help:", "Hilfe:", "Portal:", "MediaWiki:", "Module:",
        "Modul:",
    ];
    PREFIXES.iter().any(|p| title.starts_with(p))
}

fn redirect_from_wikitext(text: &str) -> Option<String> {
    let trimmed = text.trim_start();
    let upper = trimmed.chars().take(16).collect::<String>().to_uppercase();
    let keyword = ["#REDIRECT", "#WEITERLEITUNG"].into_iter().find(|k| upper.starts_with(k))?;
    let rest = &trimmed[keyword.len()..];
    let open = rest.find("[[")?;
    let close = rest[open..].find("]]")? + open;
    let target = rest[open + 2..close].split(['|', '#']).next()?;
    Some(normalize_title(target))
}
