//! Reader and writer for the annotation markup.
//!
//! The dialect is a small XML-like language: `<name>` / `</name>` pairs with
//! names matching `[a-z]+(\.[a-z?]+)*`, no nesting outside `<pr.all>`, and
//! only the `&lt; &gt; &amp;` entity references. The only attribute is
//! `degree` on `<pr>`.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::Serialize;
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::lang::Lang;
use crate::model::{
    classify_tag, display_key, is_legacy_tag, ContainerError, Degree, Entity, Mode, Root,
    SegmentKind, TagError, TagKind, UnitContainer,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarkupError {
    #[error("{line}:{column}: expected {expected}")]
    Syntax {
        line: usize,
        column: usize,
        expected: String,
    },
    #[error("{line}:{column}: unknown tag `{name}`")]
    UnknownTag {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("{line}:{column}: legacy tag `{name}` is only accepted in lenient mode")]
    LegacyTag {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("{line}:{column}: tag `{name}` requires a language suffix")]
    MissingLanguage {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("{line}:{column}: container has no `pr` entity")]
    MissingUnitText { line: usize, column: usize },
    #[error("{line}:{column}: duplicate entity {}", display_key(*.root, .lang.as_ref()))]
    DuplicateEntity {
        root: Root,
        lang: Option<Lang>,
        line: usize,
        column: usize,
    },
    #[error("{line}:{column}: {source}")]
    Container {
        source: ContainerError,
        line: usize,
        column: usize,
    },
}

impl MarkupError {
    /// 1-based `(line, column)` of the error.
    pub fn position(&self) -> (usize, usize) {
        match *self {
            MarkupError::Syntax { line, column, .. }
            | MarkupError::UnknownTag { line, column, .. }
            | MarkupError::LegacyTag { line, column, .. }
            | MarkupError::MissingLanguage { line, column, .. }
            | MarkupError::MissingUnitText { line, column }
            | MarkupError::DuplicateEntity { line, column, .. }
            | MarkupError::Container { line, column, .. } => (line, column),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SegmentBody {
    /// Untagged text between elements, usually whitespace.
    Text(String),
    Narrative {
        kind: SegmentKind,
        text: String,
    },
    Unit(UnitContainer),
    /// An element with an unknown name, kept verbatim in lenient mode.
    Unrecognized {
        name: String,
        text: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// Byte range of the segment in the source text.
    pub span: Range<usize>,
    pub body: SegmentBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotatedDocument {
    pub segments: Vec<Segment>,
}

impl AnnotatedDocument {
    pub fn units(&self) -> impl Iterator<Item = &UnitContainer> {
        self.segments.iter().filter_map(|s| match &s.body {
            SegmentBody::Unit(c) => Some(c),
            _ => None,
        })
    }

    /// Consumes the document, returning its units with ids `<work>:<ordinal>`
    /// and their work reference set.
    pub fn into_units(self, work_id: &str) -> Vec<UnitContainer> {
        self.segments
            .into_iter()
            .filter_map(|s| match s.body {
                SegmentBody::Unit(c) => Some(c),
                _ => None,
            })
            .enumerate()
            .map(|(i, c)| c.with_id(format!("{work_id}:{}", i + 1)).with_work(work_id))
            .collect()
    }
}

/// Parses a whole annotated document. Units get ordinal ids (`1`, `2`, ...)
/// in document order.
pub fn parse_document(text: &str, mode: Mode) -> Result<AnnotatedDocument, MarkupError> {
    let mut p = Parser::new(text, mode);
    let mut segments = Vec::new();
    let mut ordinal = 0;
    while p.pos < text.len() {
        let start = p.pos;
        if p.rest().starts_with('<') {
            let body = p.top_level_element()?;
            let body = match body {
                SegmentBody::Unit(c) => {
                    ordinal += 1;
                    SegmentBody::Unit(c.with_id(ordinal.to_string()))
                }
                other => other,
            };
            segments.push(Segment {
                span: start..p.pos,
                body,
            });
        } else {
            let end = p.rest().find('<').map_or(text.len(), |i| start + i);
            p.pos = end;
            segments.push(Segment {
                span: start..end,
                body: SegmentBody::Text(text[start..end].to_string()),
            });
        }
    }
    Ok(AnnotatedDocument { segments })
}

/// Parses a single `<pr.all>` element, accepting legacy tag names.
///
/// Surrounding whitespace is allowed; anything else outside the element is
/// an error.
pub fn parse_container(fragment: &str) -> Result<UnitContainer, MarkupError> {
    parse_container_with(fragment, Mode::Lenient)
}

pub fn parse_container_with(fragment: &str, mode: Mode) -> Result<UnitContainer, MarkupError> {
    let mut p = Parser::new(fragment, mode);
    p.skip_ws();
    let (name, degree_attr, at) = p.open_tag()?;
    if name != "pr.all" || degree_attr.is_some() {
        return Err(p.syntax_at(at, "`<pr.all>`"));
    }
    let c = p.container_body(at)?;
    p.skip_ws();
    if p.pos != fragment.len() {
        return Err(p.syntax("end of input after `</pr.all>`"));
    }
    Ok(c)
}

/// Canonical markup for a container: one entity per line, source order.
pub fn serialize_container(c: &UnitContainer) -> String {
    let mut out = String::from("<pr.all>\n");
    for e in c.entities() {
        let tag = display_key(e.root(), e.lang());
        match (e.root(), c.degree()) {
            (Root::Pr, Degree::Candidate) => out.push_str("<pr>"),
            (Root::Pr, degree) => {
                out.push_str(&format!("<pr degree=\"{}\">", degree.as_str()));
            }
            _ => {
                out.push('<');
                out.push_str(&tag);
                out.push('>');
            }
        }
        escape_into(e.text(), &mut out);
        out.push_str("</");
        out.push_str(&tag);
        out.push_str(">\n");
    }
    out.push_str("</pr.all>\n");
    out
}

fn escape_into(text: &str, out: &mut String) {
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            c => out.push(c),
        }
    }
}

/// Uniqueness key of a unit text: NFC, lowercased, whitespace collapsed.
/// Lowercasing leaves caseless scripts (Arabic, Hebrew) untouched.
pub fn canonical_unit_key(text: &str) -> String {
    let lowered: String = text.nfc().collect::<String>().to_lowercase();
    lowered.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DuplicateGroup {
    pub key: String,
    pub ids: Vec<String>,
}

/// Groups of units sharing a canonical text. Empty means certified unique.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct DuplicateReport {
    pub groups: Vec<DuplicateGroup>,
}

impl DuplicateReport {
    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

pub fn validate_corpus_uniqueness<'a, I>(units: I) -> DuplicateReport
where
    I: IntoIterator<Item = &'a UnitContainer>,
{
    let mut by_key: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    for u in units {
        by_key
            .entry(canonical_unit_key(u.unit_text()))
            .or_default()
            .push(u.id());
    }
    let groups = by_key
        .into_iter()
        .filter(|(_, ids)| ids.len() >= 2)
        .map(|(key, mut ids)| {
            ids.sort_unstable();
            DuplicateGroup {
                key,
                ids: ids.into_iter().map(str::to_string).collect(),
            }
        })
        .collect();
    DuplicateReport { groups }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    mode: Mode,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, mode: Mode) -> Self {
        Parser { src, pos: 0, mode }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn line_col(&self, at: usize) -> (usize, usize) {
        let before = &self.src[..at];
        let line = before.matches('\n').count() + 1;
        let line_start = before.rfind('\n').map_or(0, |i| i + 1);
        (line, before[line_start..].chars().count() + 1)
    }

    fn syntax_at(&self, at: usize, expected: &str) -> MarkupError {
        let (line, column) = self.line_col(at);
        MarkupError::Syntax {
            line,
            column,
            expected: expected.to_string(),
        }
    }

    fn syntax(&self, expected: &str) -> MarkupError {
        self.syntax_at(self.pos, expected)
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    /// Reads `<name [degree="..."]>`, returning the name, the degree
    /// attribute if any, and the offset of the `<`.
    fn open_tag(&mut self) -> Result<(&'a str, Option<Degree>, usize), MarkupError> {
        let at = self.pos;
        if !self.rest().starts_with('<') || self.rest().starts_with("</") {
            return Err(self.syntax("opening tag"));
        }
        self.pos += 1;
        let name_len = self
            .rest()
            .find(|c: char| !(c.is_ascii_lowercase() || c == '.' || c == '?'))
            .unwrap_or(self.rest().len());
        let name = &self.rest()[..name_len];
        if name.is_empty() || !valid_name(name) {
            return Err(self.syntax("tag name"));
        }
        self.pos += name_len;
        let mut degree = None;
        loop {
            let before_ws = self.pos;
            self.skip_ws();
            if self.rest().starts_with('>') {
                self.pos += 1;
                return Ok((name, degree, at));
            }
            if self.pos == before_ws || name != "pr" || degree.is_some() {
                return Err(self.syntax("`>`"));
            }
            let Some(value) = self.rest().strip_prefix("degree=\"") else {
                return Err(self.syntax("`degree=\"...\"` or `>`"));
            };
            let Some(close) = value.find('"') else {
                return Err(self.syntax("closing quote"));
            };
            let value_at = self.pos + "degree=\"".len();
            match value[..close].parse::<Degree>() {
                Ok(d) => degree = Some(d),
                Err(_) => {
                    return Err(self.syntax_at(value_at, "potential, candidate or established"))
                }
            }
            self.pos = value_at + close + 1;
        }
    }

    fn classify(&self, name: &str, at: usize) -> Result<TagKind, MarkupError> {
        let (line, column) = self.line_col(at);
        if self.mode == Mode::Strict && is_legacy_tag(name) {
            return Err(MarkupError::LegacyTag {
                name: name.to_string(),
                line,
                column,
            });
        }
        classify_tag(name, self.mode).map_err(|e| match e {
            TagError::UnknownTag(name) => MarkupError::UnknownTag { name, line, column },
            TagError::MissingLanguage(name) => MarkupError::MissingLanguage { name, line, column },
        })
    }

    /// Reads text up to `</name>` and consumes the closing tag.
    fn text_until_close(&mut self, name: &str) -> Result<String, MarkupError> {
        let start = self.pos;
        let end = self.rest().find('<').map_or(self.src.len(), |i| start + i);
        let closing = format!("</{name}>");
        if !self.src[end..].starts_with(&closing) {
            return Err(self.syntax_at(end, &format!("`{closing}`")));
        }
        let text = self.decode(start, end)?;
        self.pos = end + closing.len();
        Ok(text)
    }

    fn decode(&self, start: usize, end: usize) -> Result<String, MarkupError> {
        let raw = &self.src[start..end];
        if !raw.contains('&') {
            return Ok(raw.to_string());
        }
        let mut out = String::with_capacity(raw.len());
        let mut rest = raw;
        while let Some(i) = rest.find('&') {
            out.push_str(&rest[..i]);
            rest = &rest[i..];
            let (rep, len) = if rest.starts_with("&lt;") {
                ('<', 4)
            } else if rest.starts_with("&gt;") {
                ('>', 4)
            } else if rest.starts_with("&amp;") {
                ('&', 5)
            } else if self.mode == Mode::Lenient {
                ('&', 1)
            } else {
                let at = end - rest.len();
                return Err(self.syntax_at(at, "`&lt;`, `&gt;` or `&amp;`"));
            };
            out.push(rep);
            rest = &rest[len..];
        }
        out.push_str(rest);
        Ok(out)
    }

    fn top_level_element(&mut self) -> Result<SegmentBody, MarkupError> {
        let (name, degree_attr, at) = self.open_tag()?;
        match self.classify(name, at)? {
            TagKind::Container => Ok(SegmentBody::Unit(self.container_body(at)?)),
            TagKind::Segmentation(kind) => Ok(SegmentBody::Narrative {
                kind,
                text: self.text_until_close(name)?,
            }),
            TagKind::Proverbiality(degree) => {
                // A bare unit outside any container.
                let degree = degree_attr.unwrap_or(degree);
                let text = self.text_until_close(name)?;
                let entity = self.entity(Root::Pr, None, &text, at)?;
                let c = UnitContainer::from_entities(degree, vec![entity])
                    .map_err(|e| self.container_error(e, at))?;
                Ok(SegmentBody::Unit(c))
            }
            TagKind::Unrecognized(name) => {
                let text = self.text_until_close(&name)?;
                Ok(SegmentBody::Unrecognized { name, text })
            }
            TagKind::Entity { .. } => {
                Err(self.syntax_at(at, "`<pr.all>`, a unit tag or a segmentation tag"))
            }
        }
    }

    /// Parses entities up to `</pr.all>`; `open_at` is the container tag.
    fn container_body(&mut self, open_at: usize) -> Result<UnitContainer, MarkupError> {
        let mut entities = Vec::new();
        let mut seen: BTreeSet<(Root, Option<Lang>)> = BTreeSet::new();
        let mut degree = Degree::Candidate;
        loop {
            self.skip_ws();
            if self.rest().starts_with("</pr.all>") {
                self.pos += "</pr.all>".len();
                break;
            }
            if !self.rest().starts_with('<') || self.rest().starts_with("</") {
                return Err(self.syntax("entity tag or `</pr.all>`"));
            }
            let (name, degree_attr, at) = self.open_tag()?;
            let (root, lang) = match self.classify(name, at)? {
                TagKind::Proverbiality(d) => {
                    degree = degree_attr.unwrap_or(d);
                    (Root::Pr, None)
                }
                TagKind::Entity { root, lang } => (root, lang),
                _ => return Err(self.syntax_at(at, "entity tag or `</pr.all>`")),
            };
            if !seen.insert((root, lang.clone())) {
                let (line, column) = self.line_col(at);
                return Err(MarkupError::DuplicateEntity {
                    root,
                    lang,
                    line,
                    column,
                });
            }
            let text = self.text_until_close(name)?;
            entities.push(self.entity(root, lang, &text, at)?);
        }
        UnitContainer::from_entities(degree, entities).map_err(|e| self.container_error(e, open_at))
    }

    fn entity(
        &self,
        root: Root,
        lang: Option<Lang>,
        text: &str,
        at: usize,
    ) -> Result<Entity, MarkupError> {
        Entity::new(root, lang, text).map_err(|e| self.container_error(e, at))
    }

    fn container_error(&self, e: ContainerError, at: usize) -> MarkupError {
        let (line, column) = self.line_col(at);
        match e {
            ContainerError::MissingUnitText => MarkupError::MissingUnitText { line, column },
            ContainerError::DuplicateEntity(root, lang) => MarkupError::DuplicateEntity {
                root,
                lang,
                line,
                column,
            },
            source => MarkupError::Container {
                source,
                line,
                column,
            },
        }
    }
}

fn valid_name(name: &str) -> bool {
    if name == "pr?" {
        return true;
    }
    let mut parts = name.split('.');
    let first_ok = parts
        .next()
        .is_some_and(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_lowercase()));
    first_ok
        && parts.all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_lowercase() || b == b'?'))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_two_segment_document() {
        let doc = parse_document(
            "<text.del>narrative…</text.del><pr.all><pr>x</pr></pr.all>",
            Mode::Strict,
        )
        .unwrap();
        assert_eq!(doc.segments.len(), 2);
        assert_eq!(
            doc.segments[0].body,
            SegmentBody::Narrative {
                kind: SegmentKind::TextDel,
                text: "narrative…".into()
            }
        );
        match &doc.segments[1].body {
            SegmentBody::Unit(c) => assert_eq!(c.unit_text(), "x"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unclosed_container_is_a_parse_error() {
        let err = parse_document("<pr.all><pr>a</pr>", Mode::Strict).unwrap_err();
        assert!(matches!(err, MarkupError::Syntax { .. }), "{err:?}");
        assert_eq!(err.position(), (1, 19));
    }

    #[test]
    fn error_positions_are_one_based() {
        let err = parse_document("x\n  <banana>y</banana>", Mode::Strict).unwrap_err();
        assert_eq!(
            err,
            MarkupError::UnknownTag {
                name: "banana".into(),
                line: 2,
                column: 3
            }
        );
    }

    #[test]
    fn container_errors() {
        assert!(matches!(
            parse_container("<pr.all><key.en>a b</key.en></pr.all>"),
            Err(MarkupError::MissingUnitText { .. })
        ));
        assert!(matches!(
            parse_container("<pr.all><pr>x</pr><sl.fr>y</sl.fr><sl.fr>z</sl.fr></pr.all>"),
            Err(MarkupError::DuplicateEntity {
                root: Root::Sl,
                lang: Some(Lang::Fr),
                ..
            })
        ));
        assert!(matches!(
            parse_container("<pr.all><pr>x</pr> stray <sl.fr>y</sl.fr></pr.all>"),
            Err(MarkupError::Syntax { .. })
        ));
        assert!(matches!(
            parse_container("<pr.all><pr>x</pr><sl.fr>y</sl.en></pr.all>"),
            Err(MarkupError::Syntax { .. })
        ));
        assert!(matches!(
            parse_container("<pr.all><pr>x</pr><key.en>  </key.en></pr.all>"),
            Err(MarkupError::Container {
                source: ContainerError::EmptyText(..),
                ..
            })
        ));
    }

    #[test]
    fn legacy_tags_only_in_lenient_mode() {
        let src = "<pr.all><pr?>x</pr?></pr.all>";
        assert!(matches!(
            parse_document(src, Mode::Strict),
            Err(MarkupError::LegacyTag { .. })
        ));
        let doc = parse_document(src, Mode::Lenient).unwrap();
        let unit = doc.units().next().unwrap();
        assert_eq!(unit.degree(), Degree::Potential);
        let canonical = serialize_container(unit);
        assert_eq!(
            canonical,
            "<pr.all>\n<pr degree=\"potential\">x</pr>\n</pr.all>\n"
        );
        let strict = parse_container_with(&canonical, Mode::Strict).unwrap();
        assert_eq!(strict, unit.clone().with_id(""));
    }

    #[test]
    fn established_degree_attribute() {
        let c = parse_container_with(
            "<pr.all><pr degree=\"established\">x</pr></pr.all>",
            Mode::Strict,
        )
        .unwrap();
        assert_eq!(c.degree(), Degree::Established);
        let lenient = parse_container("<pr.all><pr.est>x</pr.est></pr.all>").unwrap();
        assert_eq!(c, lenient);
        assert!(parse_container("<pr.all><pr degree=\"great\">x</pr></pr.all>").is_err());
        assert!(parse_container("<pr.all><pr lang=\"es\">x</pr></pr.all>").is_err());
    }

    #[test]
    fn only_pr_serializes_to_wrapped_fragment() {
        let c = parse_container("<pr.all><pr>x</pr></pr.all>").unwrap();
        assert_eq!(serialize_container(&c), "<pr.all>\n<pr>x</pr>\n</pr.all>\n");
    }

    #[test]
    fn escapes_round_trip() {
        let c = parse_container("<pr.all><pr>a &lt;b&gt; &amp; c</pr></pr.all>").unwrap();
        assert_eq!(c.unit_text(), "a <b> & c");
        let s = serialize_container(&c);
        assert!(s.contains("a &lt;b&gt; &amp; c"));
        assert_eq!(parse_container(&s).unwrap(), c);
        assert!(parse_container_with("<pr.all><pr>a & b</pr></pr.all>", Mode::Strict).is_err());
        assert_eq!(
            parse_container("<pr.all><pr>a & b</pr></pr.all>")
                .unwrap()
                .unit_text(),
            "a & b"
        );
    }

    #[test]
    fn bare_unit_at_top_level() {
        let doc = parse_document("before <pr>un dicho</pr> after", Mode::Strict).unwrap();
        let units: Vec<_> = doc.units().collect();
        assert_eq!(units.len(), 1);
        assert_eq!(units[0].entities().len(), 1);
    }

    #[test]
    fn entity_outside_container_rejected() {
        assert!(parse_document("<key.en>a</key.en>", Mode::Lenient).is_err());
        assert!(parse_document("<text.del>a <b>x</b></text.del>", Mode::Lenient).is_err());
    }

    #[test]
    fn unrecognized_elements_in_lenient_mode() {
        let doc = parse_document("<glosa>x</glosa>", Mode::Lenient).unwrap();
        assert_eq!(
            doc.segments[0].body,
            SegmentBody::Unrecognized {
                name: "glosa".into(),
                text: "x".into()
            }
        );
    }

    #[test]
    fn nfc_applied_to_entity_text() {
        // "e" + combining acute
        let c = parse_container("<pr.all><pr>e\u{301}rades</pr></pr.all>").unwrap();
        assert_eq!(c.unit_text(), "\u{e9}rades");
    }

    #[test]
    fn into_units_assigns_work_ids() {
        let doc = parse_document(
            "<pr.all><pr>a</pr></pr.all>\n<pr.all><pr>b</pr></pr.all>",
            Mode::Strict,
        )
        .unwrap();
        let units = doc.into_units("bocados");
        assert_eq!(units[0].id(), "bocados:1");
        assert_eq!(units[1].id(), "bocados:2");
        assert_eq!(units[1].work_ref(), Some("bocados"));
    }

    #[test]
    fn uniqueness_canonicalization() {
        let a = parse_container("<pr.all><pr>E  Ante érades</pr></pr.all>")
            .unwrap()
            .with_id("a");
        let b = parse_container("<pr.all><pr>e ante érades</pr></pr.all>")
            .unwrap()
            .with_id("b");
        let c = parse_container("<pr.all><pr>otra cosa</pr></pr.all>")
            .unwrap()
            .with_id("c");
        let report = validate_corpus_uniqueness([&a, &b, &c]);
        assert_eq!(report.groups.len(), 1);
        assert_eq!(report.groups[0].ids, vec!["a", "b"]);
        assert!(validate_corpus_uniqueness([&a, &c]).is_empty());
    }
}
