//! Persistent corpus index: build, persist, reload and query.
//!
//! The index is a single pretty-printed JSON document with sorted keys.
//! Inputs are sorted by path before anything else happens, so rebuilding
//! from the same files yields the same bytes whatever the enumeration order
//! or degree of parallelism.

mod config;
mod query;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::Lang;
use crate::markup::{
    parse_container, parse_document, serialize_container, validate_corpus_uniqueness,
    DuplicateReport, MarkupError,
};
use crate::model::{CompletenessProfile, Degree, Mode, Root, UnitContainer};
use crate::normalize::{romanize, tokenize, Script};
use crate::posterity::{
    posterity_edges_by, Dating, PosterityEdge, PosterityError, Strictness, WorkMetadata,
};
use crate::similarity::{
    cluster_profiles, SimilarityEngine, SimilarityError, SimilarityScore, UnitProfile, Weights,
};

pub use config::{Config, ConfigError, DEFAULT_THRESHOLD};
pub use query::{QueryError, QueryFilter};

pub const FORMAT_VERSION: &str = "1";

/// One annotated source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Source {
    /// Path as given, used for ordering and error messages.
    pub path: String,
    /// Work the units belong to: the file stem.
    pub work_id: String,
    pub text: String,
}

impl Source {
    pub fn read(path: &Path) -> Result<Self, BuildError> {
        let text = fs::read_to_string(path).map_err(|source| BuildError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let work_id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(Source {
            path: path.display().to_string(),
            work_id,
            text,
        })
    }
}

/// Reads every path, sorted, into a [`Source`].
pub fn read_sources<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<Source>, BuildError> {
    let mut paths: Vec<&Path> = paths.iter().map(AsRef::as_ref).collect();
    paths.sort();
    paths.into_iter().map(Source::read).collect()
}

/// A parse failure located in a source file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceError {
    pub file: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl SourceError {
    fn new(file: &str, e: &MarkupError) -> Self {
        let (line, column) = e.position();
        SourceError {
            file: file.to_string(),
            line,
            column,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for SourceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // the message already starts with `line:column:`
        write!(f, "{}:{}", self.file, self.message)
    }
}

fn join_lines<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

fn describe_duplicates(r: &DuplicateReport) -> String {
    r.groups
        .iter()
        .map(|g| format!("{} share `{}`", g.ids.join(", "), g.key))
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("{} source error(s):\n{}", .0.len(), join_lines(.0))]
    Parse(Vec<SourceError>),
    #[error("duplicate units: {}", describe_duplicates(.0))]
    UniquenessViolation(DuplicateReport),
    #[error("two sources define work `{0}`")]
    DuplicateWorkId(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Metadata(#[from] PosterityError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed index: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported index version `{0}` (expected {FORMAT_VERSION})")]
    Version(String),
    #[error("unit `{id}`: {source}")]
    Markup { id: String, source: MarkupError },
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("index is inconsistent: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub mode: Mode,
    pub allow_duplicates: bool,
    pub parallel: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            mode: Mode::Strict,
            allow_duplicates: false,
            parallel: true,
        }
    }
}

/// A unit as stored in the index: identity plus its serialized container.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitRecord {
    pub id: String,
    pub work_ref: Option<String>,
    pub source_lang: Option<Lang>,
    pub degree: Degree,
    pub markup: String,
}

/// Normalized artifacts of one unit, recomputable from the unit and the
/// build configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedArtifacts {
    pub profile: UnitProfile,
    /// Tokens of every `lem.*` entity plus the dictionary lemmas of the unit
    /// text in its source language.
    pub lemma_index: BTreeSet<String>,
    /// Romanized unit text for Hebrew and Arabic units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub romanized: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusIndex {
    pub version: String,
    pub units: Vec<UnitRecord>,
    pub metadata: Vec<WorkMetadata>,
    pub derived: BTreeMap<String, DerivedArtifacts>,
    pub config_fingerprint: String,
}

#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub index: CorpusIndex,
    /// Duplicate groups tolerated under `allow_duplicates`.
    pub duplicates: DuplicateReport,
}

/// Derives the stored artifacts of one unit.
pub fn derive_artifacts(
    unit: &UnitContainer,
    config: &Config,
    engine: &SimilarityEngine,
) -> DerivedArtifacts {
    let mut lemma_index: BTreeSet<String> = unit
        .entities_with_root(Root::Lem)
        .flat_map(|e| tokenize(e.text()))
        .collect();
    if let Some(dict) = unit.source_lang().and_then(|l| config.dictionaries.get(l)) {
        let tokens = tokenize(unit.unit_text());
        lemma_index.extend(
            dict.lemmatize(&tokens)
                .lemmas
                .into_iter()
                .filter(|l| !l.is_empty()),
        );
    }
    let romanized = Script::detect(unit.unit_text()).and_then(|script| {
        romanize(unit.unit_text(), config.table(script))
            .map_err(|e| log::warn!("{}: not romanized: {e}", unit.id()))
            .ok()
    });
    DerivedArtifacts {
        profile: engine.profile(unit),
        lemma_index,
        romanized,
    }
}

fn parse_sources(
    sources: &[Source],
    mode: Mode,
    parallel: bool,
) -> Result<Vec<Vec<UnitContainer>>, Vec<SourceError>> {
    let parse = |s: &Source| {
        parse_document(&s.text, mode)
            .map(|doc| doc.into_units(&s.work_id))
            .map_err(|e| SourceError::new(&s.path, &e))
    };
    let results: Vec<_> = if parallel {
        sources.par_iter().map(parse).collect()
    } else {
        sources.iter().map(parse).collect()
    };
    let mut units = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(u) => units.push(u),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(units)
    } else {
        Err(errors)
    }
}

fn sorted_sources(mut sources: Vec<Source>) -> Result<Vec<Source>, BuildError> {
    sources.sort_by(|a, b| a.path.cmp(&b.path));
    let mut seen = BTreeSet::new();
    for s in &sources {
        if !seen.insert(s.work_id.as_str()) {
            return Err(BuildError::DuplicateWorkId(s.work_id.clone()));
        }
    }
    Ok(sources)
}

/// Builds an index from sources and work metadata.
///
/// Parse errors from all files are collected before failing. A unit with no
/// inferable source language takes its work's language.
pub fn build_index(
    sources: Vec<Source>,
    metadata: Vec<WorkMetadata>,
    config: &Config,
    options: BuildOptions,
) -> Result<BuildOutput, BuildError> {
    let sources = sorted_sources(sources)?;
    let mut meta: BTreeMap<String, WorkMetadata> = BTreeMap::new();
    for w in metadata {
        if meta.contains_key(&w.work_id) {
            return Err(PosterityError::DuplicateWork(w.work_id).into());
        }
        meta.insert(w.work_id.clone(), w);
    }
    let per_file =
        parse_sources(&sources, options.mode, options.parallel).map_err(BuildError::Parse)?;
    let units: Vec<UnitContainer> = per_file
        .into_iter()
        .flatten()
        .map(
            |u| match (u.source_lang(), u.work_ref().and_then(|w| meta.get(w))) {
                (None, Some(w)) => {
                    let lang = w.language.clone();
                    u.with_source_lang(Some(lang))
                }
                _ => u,
            },
        )
        .collect();
    for s in &sources {
        if !meta.contains_key(&s.work_id) {
            log::warn!("{}: no metadata for work `{}`", s.path, s.work_id);
        }
    }

    let duplicates = validate_corpus_uniqueness(&units);
    if !duplicates.is_empty() && !options.allow_duplicates {
        return Err(BuildError::UniquenessViolation(duplicates));
    }

    let engine = config.engine();
    let derive = |u: &UnitContainer| (u.id().to_string(), derive_artifacts(u, config, &engine));
    let derived: BTreeMap<String, DerivedArtifacts> = if options.parallel {
        units.par_iter().map(derive).collect()
    } else {
        units.iter().map(derive).collect()
    };
    let records = units
        .iter()
        .map(|u| UnitRecord {
            id: u.id().to_string(),
            work_ref: u.work_ref().map(str::to_string),
            source_lang: u.source_lang().cloned(),
            degree: u.degree(),
            markup: serialize_container(u),
        })
        .collect();
    Ok(BuildOutput {
        index: CorpusIndex {
            version: FORMAT_VERSION.to_string(),
            units: records,
            metadata: meta.into_values().collect(),
            derived,
            config_fingerprint: config.fingerprint(),
        },
        duplicates,
    })
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Path of the duplicate report written next to an index.
pub fn duplicates_path(index_path: &Path) -> PathBuf {
    let mut name = index_path.as_os_str().to_owned();
    name.push(".duplicates.json");
    PathBuf::from(name)
}

impl BuildOutput {
    /// Writes the index and, when duplicates were tolerated, the duplicate
    /// report beside it. A stale report from an earlier build is removed.
    pub fn write(&self, path: &Path) -> Result<(), BuildError> {
        let io = |source| BuildError::Io {
            path: path.to_path_buf(),
            source,
        };
        write_atomic(path, self.index.to_json()?.as_bytes()).map_err(io)?;
        let report = duplicates_path(path);
        if self.duplicates.is_empty() {
            if report.exists() {
                fs::remove_file(&report).map_err(io)?;
            }
        } else {
            let json = serde_json::to_string_pretty(&self.duplicates)? + "\n";
            write_atomic(&report, json.as_bytes()).map_err(io)?;
        }
        Ok(())
    }
}

/// A neighbor returned by [`CorpusIndex::similar`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Neighbor {
    pub id: String,
    pub score: SimilarityScore,
}

impl CorpusIndex {
    /// Pretty JSON with keys in sorted order, ending in a newline.
    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        // Going through Value sorts every object's keys.
        let value = serde_json::to_value(self)?;
        Ok(serde_json::to_string_pretty(&value)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self, IndexError> {
        let index: CorpusIndex = serde_json::from_str(text)?;
        if index.version != FORMAT_VERSION {
            return Err(IndexError::Version(index.version));
        }
        if let Some(u) = index
            .units
            .iter()
            .find(|u| !index.derived.contains_key(&u.id))
        {
            return Err(IndexError::Inconsistent(format!(
                "no derived artifacts for `{}`",
                u.id
            )));
        }
        if index.derived.len() != index.units.len() {
            return Err(IndexError::Inconsistent(
                "derived artifacts for units not in the index".into(),
            ));
        }
        Ok(index)
    }

    pub fn load(path: &Path) -> Result<Self, IndexError> {
        let text = fs::read_to_string(path).map_err(|source| IndexError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn unit_ids(&self) -> impl Iterator<Item = &str> {
        self.units.iter().map(|u| u.id.as_str())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.derived.contains_key(id)
    }

    /// Reparses the stored markup of every unit.
    pub fn containers(&self) -> Result<Vec<UnitContainer>, IndexError> {
        self.units
            .iter()
            .map(|r| {
                let c = parse_container(&r.markup).map_err(|source| IndexError::Markup {
                    id: r.id.clone(),
                    source,
                })?;
                let c = c
                    .with_id(r.id.clone())
                    .with_source_lang(r.source_lang.clone());
                Ok(match &r.work_ref {
                    Some(w) => c.with_work(w.clone()),
                    None => c,
                })
            })
            .collect()
    }

    pub fn metadata_map(&self) -> BTreeMap<&str, &WorkMetadata> {
        self.metadata
            .iter()
            .map(|w| (w.work_id.as_str(), w))
            .collect()
    }

    fn dating_of(&self, unit: &UnitRecord) -> Option<Dating> {
        let work = unit.work_ref.as_deref()?;
        self.metadata
            .iter()
            .find(|w| w.work_id == work)
            .map(|w| w.dating)
    }

    /// Ids of units matching every set field of `filter`, in index order.
    pub fn query(&self, filter: &QueryFilter) -> Vec<String> {
        let range = filter.date_range();
        self.units
            .iter()
            .filter(|u| {
                filter
                    .lang
                    .as_ref()
                    .is_none_or(|l| u.source_lang.as_ref() == Some(l))
            })
            .filter(|u| filter.degree.is_none_or(|d| u.degree == d))
            .filter(|u| {
                filter
                    .work
                    .as_ref()
                    .is_none_or(|w| u.work_ref.as_ref() == Some(w))
            })
            .filter(|u| {
                range.is_none_or(|(from, to)| {
                    self.dating_of(u).is_some_and(|d| d.overlaps(from, to))
                })
            })
            .filter(|u| {
                filter.keyword.is_none() || {
                    let d = &self.derived[&u.id];
                    let terms: BTreeSet<&str> = d
                        .profile
                        .keywords
                        .values()
                        .flatten()
                        .chain(&d.lemma_index)
                        .map(String::as_str)
                        .collect();
                    filter.keyword_matches(&terms)
                }
            })
            .map(|u| u.id.clone())
            .collect()
    }

    fn profiles(&self) -> (Vec<&str>, Vec<&UnitProfile>) {
        self.units
            .iter()
            .map(|u| (u.id.as_str(), &self.derived[&u.id].profile))
            .unzip()
    }

    /// Other units ranked by aggregate similarity to `id`, highest first,
    /// ties broken by id. `top` limits the result length.
    pub fn similar(
        &self,
        id: &str,
        top: Option<usize>,
        weights: &Weights,
    ) -> Result<Vec<Neighbor>, IndexError> {
        let target = &self
            .derived
            .get(id)
            .ok_or_else(|| IndexError::UnknownUnit(id.to_string()))?
            .profile;
        let mut out: Vec<Neighbor> = self
            .units
            .iter()
            .filter(|u| u.id != id)
            .map(|u| Neighbor {
                id: u.id.clone(),
                score: target.score(&self.derived[&u.id].profile, weights),
            })
            .collect();
        out.sort_by(|a, b| {
            b.score
                .aggregate
                .total_cmp(&a.score.aggregate)
                .then_with(|| a.id.cmp(&b.id))
        });
        if let Some(n) = top {
            out.truncate(n);
        }
        Ok(out)
    }

    pub fn cluster(
        &self,
        threshold: f64,
        weights: &Weights,
    ) -> Result<Vec<Vec<String>>, SimilarityError> {
        let (ids, profiles) = self.profiles();
        let profiles: Vec<UnitProfile> = profiles.into_iter().cloned().collect();
        cluster_profiles(&ids, &profiles, weights, threshold)
    }

    pub fn posterity(
        &self,
        threshold: f64,
        strictness: Strictness,
        weights: &Weights,
    ) -> Result<Vec<PosterityEdge>, PosterityError> {
        let datings = self
            .units
            .iter()
            .map(|u| {
                self.dating_of(u)
                    .ok_or_else(|| PosterityError::MissingMetadata(u.id.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let (ids, profiles) = self.profiles();
        posterity_edges_by(&ids, &datings, threshold, strictness, |i, j| {
            profiles[i].score(profiles[j], weights)
        })
    }
}

/// Outcome of validating a set of sources without building an index.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<SourceError>,
    /// Units missing entities required by the completeness profile.
    pub incomplete: BTreeMap<String, Vec<String>>,
    pub duplicates: DuplicateReport,
    pub units: usize,
}

impl ValidationReport {
    /// Parse errors and duplicates fail validation; incompleteness is
    /// reported only.
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.duplicates.is_empty()
    }
}

pub fn validate_sources(
    sources: Vec<Source>,
    mode: Mode,
    profile: &CompletenessProfile,
) -> ValidationReport {
    let mut sources = sources;
    sources.sort_by(|a, b| a.path.cmp(&b.path));
    let mut report = ValidationReport::default();
    let mut units = Vec::new();
    for s in &sources {
        match parse_document(&s.text, mode) {
            Ok(doc) => units.extend(doc.into_units(&s.work_id)),
            Err(e) => report.errors.push(SourceError::new(&s.path, &e)),
        }
    }
    for u in &units {
        let missing = u.missing_required(profile);
        if !missing.is_empty() {
            report.incomplete.insert(
                u.id().to_string(),
                missing
                    .into_iter()
                    .map(|(root, lang)| format!("{root}.{lang}"))
                    .collect(),
            );
        }
    }
    report.duplicates = validate_corpus_uniqueness(&units);
    report.units = units.len();
    report
}
