//! Tag taxonomy and the knowledge container attached to each unit.
//!
//! A container (`<pr.all>`) bundles the unit text with every entity the
//! annotators attached to it: translations, senses, lessons, keywords,
//! lemmatizations and structure descriptors. Each entity is identified by
//! its root and an optional language suffix, and a container holds at most
//! one entity per `(root, lang)` pair.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::lang::{Lang, INTERROGATION};

/// Strict parsing rejects unknown and legacy tag names; lenient accepts them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Strict,
    Lenient,
}

/// Parts of a source text that are set aside from the unit inventory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SegmentKind {
    /// `<text.del>`: narrative left aside.
    TextDel,
    Exemplum,
    Simil,
    /// `<de>`: edifying discourse.
    De,
}

impl SegmentKind {
    pub fn tag(self) -> &'static str {
        match self {
            SegmentKind::TextDel => "text.del",
            SegmentKind::Exemplum => "exemplum",
            SegmentKind::Simil => "simil",
            SegmentKind::De => "de",
        }
    }
}

/// How far a statement has gone on its way to becoming a proverb.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Degree {
    Potential,
    #[default]
    Candidate,
    Established,
}

impl Degree {
    pub fn as_str(self) -> &'static str {
        match self {
            Degree::Potential => "potential",
            Degree::Candidate => "candidate",
            Degree::Established => "established",
        }
    }
}

impl FromStr for Degree {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "potential" => Ok(Degree::Potential),
            "candidate" => Ok(Degree::Candidate),
            "established" => Ok(Degree::Established),
            other => Err(format!(
                "unknown degree `{other}` (expected potential, candidate or established)"
            )),
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Root of an entity tag, without its language suffix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Root {
    /// The unit itself.
    #[serde(rename = "pr")]
    Pr,
    /// A current proverb or expression linked to the unit.
    #[serde(rename = "pr.type")]
    PrType,
    /// Literal translation.
    #[serde(rename = "sl")]
    Sl,
    /// Figurative sense.
    #[serde(rename = "sf")]
    Sf,
    /// Sapiential lesson.
    #[serde(rename = "lec")]
    Lec,
    /// Ideological keywords.
    #[serde(rename = "key")]
    Key,
    /// Lemmatization of the unit in its own language.
    #[serde(rename = "lem")]
    Lem,
    #[serde(rename = "str.ling")]
    StrLing,
    #[serde(rename = "str.form")]
    StrForm,
    #[serde(rename = "str.poet")]
    StrPoet,
}

impl Root {
    pub const ALL: [Root; 10] = [
        Root::Pr,
        Root::PrType,
        Root::Sl,
        Root::Sf,
        Root::Lec,
        Root::Key,
        Root::Lem,
        Root::StrLing,
        Root::StrForm,
        Root::StrPoet,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Root::Pr => "pr",
            Root::PrType => "pr.type",
            Root::Sl => "sl",
            Root::Sf => "sf",
            Root::Lec => "lec",
            Root::Key => "key",
            Root::Lem => "lem",
            Root::StrLing => "str.ling",
            Root::StrForm => "str.form",
            Root::StrPoet => "str.poet",
        }
    }

    /// Whether the root must carry a language suffix. `pr` and the
    /// structure descriptors never do.
    pub fn takes_lang(self) -> bool {
        !matches!(
            self,
            Root::Pr | Root::StrLing | Root::StrForm | Root::StrPoet
        )
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classification of a tag name as it appears between angle brackets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TagKind {
    Segmentation(SegmentKind),
    Proverbiality(Degree),
    /// `<pr.all>`
    Container,
    Entity {
        root: Root,
        lang: Option<Lang>,
    },
    /// Only produced in lenient mode.
    Unrecognized(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TagError {
    #[error("unknown tag `{0}`")]
    UnknownTag(String),
    #[error("tag `{0}` requires a language suffix")]
    MissingLanguage(String),
}

/// Tag names whose surface form is kept only for compatibility; canonical
/// markup writes `<pr degree="...">` instead.
pub fn is_legacy_tag(name: &str) -> bool {
    matches!(name, "pr?" | "pr.est")
}

/// Classifies a tag name.
///
/// Legacy degree names (`pr?`, `pr.est`) classify in both modes; rejecting
/// them as surface forms is the parser's job. Unknown names are an error in
/// strict mode and [`TagKind::Unrecognized`] in lenient mode.
pub fn classify_tag(name: &str, mode: Mode) -> Result<TagKind, TagError> {
    match classify_known(name) {
        Ok(Some(kind)) => Ok(kind),
        Ok(None) => match mode {
            Mode::Strict => Err(TagError::UnknownTag(name.to_string())),
            Mode::Lenient => Ok(TagKind::Unrecognized(name.to_string())),
        },
        Err(e) => Err(e),
    }
}

fn classify_known(name: &str) -> Result<Option<TagKind>, TagError> {
    let kind = match name {
        "text.del" => TagKind::Segmentation(SegmentKind::TextDel),
        "exemplum" => TagKind::Segmentation(SegmentKind::Exemplum),
        "simil" => TagKind::Segmentation(SegmentKind::Simil),
        "de" => TagKind::Segmentation(SegmentKind::De),
        "pr?" => TagKind::Proverbiality(Degree::Potential),
        "pr" => TagKind::Proverbiality(Degree::Candidate),
        "pr.est" => TagKind::Proverbiality(Degree::Established),
        "pr.all" => TagKind::Container,
        "str.ling" => entity(Root::StrLing, None),
        "str.form" => entity(Root::StrForm, None),
        "str.poet" => entity(Root::StrPoet, None),
        _ => {
            let (root, rest) = if let Some(rest) = name.strip_prefix("pr.type") {
                (Root::PrType, rest)
            } else {
                let (head, rest) = name.split_at(name.find('.').unwrap_or(name.len()));
                let root = match head {
                    "sl" => Root::Sl,
                    "sf" => Root::Sf,
                    "lec" => Root::Lec,
                    "key" => Root::Key,
                    "lem" => Root::Lem,
                    _ => return Ok(None),
                };
                (root, rest)
            };
            if rest.is_empty() {
                return Err(TagError::MissingLanguage(name.to_string()));
            }
            let Some(code) = rest.strip_prefix('.') else {
                return Ok(None);
            };
            match code.parse::<Lang>() {
                Ok(lang) => entity(root, Some(lang)),
                Err(_) => return Ok(None),
            }
        }
    };
    Ok(Some(kind))
}

fn entity(root: Root, lang: Option<Lang>) -> TagKind {
    TagKind::Entity { root, lang }
}

/// One tagged information item of a container.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Entity {
    root: Root,
    lang: Option<Lang>,
    text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContainerError {
    #[error("container has no `pr` entity")]
    MissingUnitText,
    #[error("duplicate entity {}", display_key(*.0, .1.as_ref()))]
    DuplicateEntity(Root, Option<Lang>),
    #[error("entity `{0}` requires a language suffix")]
    MissingLanguage(Root),
    #[error("entity `{0}` does not take a language suffix")]
    UnexpectedLanguage(Root),
    #[error("entity {} has empty text", display_key(*.0, .1.as_ref()))]
    EmptyText(Root, Option<Lang>),
}

/// Renders a `(root, lang)` pair the way it is written in a tag.
pub fn display_key(root: Root, lang: Option<&Lang>) -> String {
    match lang {
        Some(lang) => format!("{root}.{lang}"),
        None => root.to_string(),
    }
}

impl Entity {
    /// Builds an entity, trimming and NFC-normalizing the text.
    pub fn new(root: Root, lang: Option<Lang>, text: &str) -> Result<Self, ContainerError> {
        match (root.takes_lang(), &lang) {
            (true, None) => return Err(ContainerError::MissingLanguage(root)),
            (false, Some(_)) => return Err(ContainerError::UnexpectedLanguage(root)),
            _ => {}
        }
        let text: String = text.trim().nfc().collect();
        if text.is_empty() {
            return Err(ContainerError::EmptyText(root, lang));
        }
        Ok(Entity { root, lang, text })
    }

    pub fn root(&self) -> Root {
        self.root
    }

    pub fn lang(&self) -> Option<&Lang> {
        self.lang.as_ref()
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn key(&self) -> (Root, Option<&Lang>) {
        (self.root, self.lang.as_ref())
    }
}

/// One `<pr.all>` knowledge container.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitContainer {
    id: String,
    unit_text: String,
    source_lang: Option<Lang>,
    degree: Degree,
    entities: Vec<Entity>,
    work_ref: Option<String>,
}

impl UnitContainer {
    /// Builds a container from entities in source order.
    ///
    /// The source language is inferred from the `lem.*` entity when there is
    /// exactly one; ingestion may override it from work metadata.
    pub fn from_entities(degree: Degree, entities: Vec<Entity>) -> Result<Self, ContainerError> {
        let mut seen = BTreeSet::new();
        for e in &entities {
            if !seen.insert(e.key()) {
                return Err(ContainerError::DuplicateEntity(e.root, e.lang.clone()));
            }
        }
        let unit_text = entities
            .iter()
            .find(|e| e.root == Root::Pr)
            .map(|e| e.text.clone())
            .ok_or(ContainerError::MissingUnitText)?;
        let mut lem_langs = entities.iter().filter(|e| e.root == Root::Lem);
        let source_lang = match (lem_langs.next(), lem_langs.next()) {
            (Some(e), None) => e.lang.clone(),
            _ => None,
        };
        Ok(UnitContainer {
            id: String::new(),
            unit_text,
            source_lang,
            degree,
            entities,
            work_ref: None,
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_work(mut self, work: impl Into<String>) -> Self {
        self.work_ref = Some(work.into());
        self
    }

    pub fn with_source_lang(mut self, lang: Option<Lang>) -> Self {
        self.source_lang = lang;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn unit_text(&self) -> &str {
        &self.unit_text
    }

    pub fn source_lang(&self) -> Option<&Lang> {
        self.source_lang.as_ref()
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn work_ref(&self) -> Option<&str> {
        self.work_ref.as_deref()
    }

    /// Text of the entity with the given root and language, if present.
    pub fn get_entity(&self, root: Root, lang: Option<&Lang>) -> Option<&str> {
        self.entities
            .iter()
            .find(|e| e.root == root && e.lang.as_ref() == lang)
            .map(|e| e.text.as_str())
    }

    /// All entities with the given root, in source order.
    pub fn entities_with_root(&self, root: Root) -> impl Iterator<Item = &Entity> {
        self.entities.iter().filter(move |e| e.root == root)
    }

    /// Required `(root, lang)` pairs of `profile` that this container lacks,
    /// in `(root, lang)` order.
    pub fn missing_required(&self, profile: &CompletenessProfile) -> Vec<(Root, Lang)> {
        profile
            .required_for(self.source_lang.as_ref())
            .into_iter()
            .filter(|(root, lang)| self.get_entity(*root, Some(lang)).is_none())
            .collect()
    }
}

/// The set of entities a finished container is expected to carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletenessProfile {
    /// Roots required in every interrogation language.
    pub interrogation_roots: BTreeSet<Root>,
    /// Additional fixed pairs.
    pub extra: BTreeSet<(Root, Lang)>,
    /// Require `lem` in the unit's source language when it is known.
    pub lemma_in_source: bool,
}

impl Default for CompletenessProfile {
    fn default() -> Self {
        CompletenessProfile {
            interrogation_roots: [Root::Sl, Root::Sf, Root::Lec, Root::Key]
                .into_iter()
                .collect(),
            extra: BTreeSet::new(),
            lemma_in_source: true,
        }
    }
}

impl CompletenessProfile {
    pub fn required_for(&self, source_lang: Option<&Lang>) -> BTreeSet<(Root, Lang)> {
        let mut out: BTreeSet<(Root, Lang)> = self
            .interrogation_roots
            .iter()
            .flat_map(|&root| INTERROGATION.iter().map(move |l| (root, l.clone())))
            .collect();
        out.extend(self.extra.iter().cloned());
        if let (true, Some(lang)) = (self.lemma_in_source, source_lang) {
            out.insert((Root::Lem, lang.clone()));
        }
        out
    }
}
