//! Work metadata and the diachronic posterity graph.
//!
//! A posterity edge links an earlier unit to a later one when the later
//! unit's work is dated after the earlier one's and the two units are
//! similar enough. Under strict precedence the graph is acyclic, since
//! each edge strictly increases `year_from`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::Lang;
use crate::model::UnitContainer;
use crate::similarity::{check_threshold, SimilarityEngine, SimilarityError, SimilarityScore};

#[derive(Debug, Error)]
pub enum PosterityError {
    #[error("invalid dating `{0}`")]
    InvalidDating(String),
    #[error("unit `{0}` has no resolvable work metadata")]
    MissingMetadata(String),
    #[error("unknown seed unit `{0}`")]
    UnknownSeed(String),
    #[error("duplicate work id `{0}` in metadata")]
    DuplicateWork(String),
    #[error("metadata: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

/// Closed interval of CE years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DatingRepr")]
pub struct Dating {
    from: i32,
    to: i32,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DatingRepr {
    Text(String),
    Pair([i32; 2]),
    Object { from: i32, to: i32 },
}

impl TryFrom<DatingRepr> for Dating {
    type Error = PosterityError;

    fn try_from(repr: DatingRepr) -> Result<Self, Self::Error> {
        match repr {
            DatingRepr::Text(s) => s.parse(),
            DatingRepr::Pair([from, to]) | DatingRepr::Object { from, to } => Dating::new(from, to),
        }
    }
}

/// Years outside this range are accepted but reported as implausible.
pub const PLAUSIBLE_YEARS: std::ops::RangeInclusive<i32> = 600..=1700;

impl Dating {
    pub fn new(from: i32, to: i32) -> Result<Self, PosterityError> {
        if from > to {
            return Err(PosterityError::InvalidDating(format!("{from}-{to}")));
        }
        Ok(Dating { from, to })
    }

    pub fn year_from(&self) -> i32 {
        self.from
    }

    pub fn year_to(&self) -> i32 {
        self.to
    }

    /// Century `n` (1-based) as `[(n-1)*100, (n-1)*100 + 99]`.
    pub fn century(n: i32) -> Result<Self, PosterityError> {
        if n < 1 {
            return Err(PosterityError::InvalidDating(format!("century {n}")));
        }
        let start = (n - 1) * 100;
        Dating::new(start, start + 99)
    }

    pub fn is_plausible(&self) -> bool {
        PLAUSIBLE_YEARS.contains(&self.from) && PLAUSIBLE_YEARS.contains(&self.to)
    }

    pub fn overlaps(&self, from: i32, to: i32) -> bool {
        self.from <= to && self.to >= from
    }
}

fn roman_value(s: &str) -> Option<i32> {
    let mut total = 0;
    let mut prev = 0;
    for c in s.chars().rev() {
        let v = match c {
            'I' => 1,
            'V' => 5,
            'X' => 10,
            'L' => 50,
            'C' => 100,
            _ => return None,
        };
        if v < prev {
            total -= v;
        } else {
            total += v;
            prev = v;
        }
    }
    (total > 0).then_some(total)
}

/// Parses one century token such as `XIIIth`, `XIII`, `XIIIe`.
fn parse_century(token: &str) -> Option<i32> {
    let numeral = token.trim_end_matches(|c: char| c.is_ascii_lowercase() || c == '.');
    roman_value(numeral)
}

impl FromStr for Dating {
    type Err = PosterityError;

    /// Accepts `1250`, `1250-1290`, `XIIIth C.`, `XIII` and century ranges
    /// such as `XIII-XIV`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PosterityError::InvalidDating(s.to_string());
        let cleaned = s
            .trim()
            .trim_end_matches("century")
            .trim_end_matches("C.")
            .trim_end_matches('C')
            .trim_end_matches("c.")
            .trim();
        if cleaned.is_empty() {
            return Err(bad());
        }
        let (lo, hi) = match cleaned.split_once('-') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (cleaned, cleaned),
        };
        if let (Ok(a), Ok(b)) = (lo.parse::<i32>(), hi.parse::<i32>()) {
            return Dating::new(a, b).map_err(|_| bad());
        }
        match (parse_century(lo), parse_century(hi)) {
            (Some(a), Some(b)) => {
                let (a, b) = (Dating::century(a)?, Dating::century(b)?);
                Dating::new(a.from, b.to).map_err(|_| bad())
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Dating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Area {
    IberianPeninsula,
    Outside(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkMetadata {
    pub work_id: String,
    pub title: String,
    pub language: Lang,
    pub dating: Dating,
    pub area: Area,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compiler: Option<String>,
}

/// Reads a JSON array of work records keyed by `work_id`.
///
/// Implausible datings are logged, not rejected.
pub fn load_metadata(source: impl Read) -> Result<BTreeMap<String, WorkMetadata>, PosterityError> {
    let records: Vec<WorkMetadata> = serde_json::from_reader(source)?;
    let mut out = BTreeMap::new();
    for w in records {
        if !w.dating.is_plausible() {
            log::warn!(
                "work `{}`: dating {} outside plausible range {}-{}",
                w.work_id,
                w.dating,
                PLAUSIBLE_YEARS.start(),
                PLAUSIBLE_YEARS.end()
            );
        }
        if out.contains_key(&w.work_id) {
            return Err(PosterityError::DuplicateWork(w.work_id));
        }
        out.insert(w.work_id.clone(), w);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// The earlier work must end before the later one starts.
    #[default]
    Strict,
    /// The earlier work only has to start first.
    OverlapOk,
}

impl FromStr for Strictness {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Strictness::Strict),
            "overlap-ok" => Ok(Strictness::OverlapOk),
            other => Err(format!(
                "unknown strictness `{other}` (expected strict or overlap-ok)"
            )),
        }
    }
}

pub fn precedes(earlier: &Dating, later: &Dating, strictness: Strictness) -> bool {
    match strictness {
        Strictness::Strict => earlier.to < later.from,
        Strictness::OverlapOk => earlier.from < later.from,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosterityEdge {
    pub from_id: String,
    pub to_id: String,
    pub score: SimilarityScore,
    /// `later.year_from - earlier.year_to`, floored at zero for overlapping
    /// datings.
    pub gap_years: u32,
}

/// Posterity edges over `ids`, with `works[i]` the dating of unit `i` and
/// `score(i, j)` a symmetric similarity. Edges are sorted by
/// `(from_id, to_id)`.
pub fn posterity_edges_by<F>(
    ids: &[&str],
    datings: &[Dating],
    threshold: f64,
    strictness: Strictness,
    score: F,
) -> Result<Vec<PosterityEdge>, PosterityError>
where
    F: Fn(usize, usize) -> SimilarityScore,
{
    check_threshold(threshold)?;
    let mut edges = Vec::new();
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            let forward = precedes(&datings[i], &datings[j], strictness);
            let backward = precedes(&datings[j], &datings[i], strictness);
            if !forward && !backward {
                continue;
            }
            let s = score(i, j);
            if s.aggregate < threshold {
                continue;
            }
            let (from, to) = if forward { (i, j) } else { (j, i) };
            let gap = (datings[to].from - datings[from].to).max(0) as u32;
            edges.push(PosterityEdge {
                from_id: ids[from].to_string(),
                to_id: ids[to].to_string(),
                score: s,
                gap_years: gap,
            });
        }
    }
    edges.sort_by(|a, b| (&a.from_id, &a.to_id).cmp(&(&b.from_id, &b.to_id)));
    Ok(edges)
}

/// Posterity edges between containers, resolving each unit's work in
/// `metadata` and scoring with `engine`.
pub fn posterity_edges(
    units: &[UnitContainer],
    metadata: &BTreeMap<String, WorkMetadata>,
    engine: &SimilarityEngine,
    threshold: f64,
    strictness: Strictness,
) -> Result<Vec<PosterityEdge>, PosterityError> {
    let datings = units
        .iter()
        .map(|u| {
            u.work_ref()
                .and_then(|w| metadata.get(w))
                .map(|w| w.dating)
                .ok_or_else(|| PosterityError::MissingMetadata(u.id().to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let profiles: Vec<_> = units.iter().map(|u| engine.profile(u)).collect();
    let ids: Vec<&str> = units.iter().map(UnitContainer::id).collect();
    posterity_edges_by(&ids, &datings, threshold, strictness, |i, j| {
        profiles[i].score(&profiles[j], &engine.weights)
    })
}

/// All simple paths of 1 to `max_depth` edges starting at `seed`, in
/// lexicographic order of their id sequences.
pub fn transmission_chains(
    edges: &[PosterityEdge],
    seed: &str,
    max_depth: usize,
) -> Result<Vec<Vec<String>>, PosterityError> {
    let mut adjacency: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut known = BTreeSet::new();
    for e in edges {
        adjacency.entry(&e.from_id).or_default().insert(&e.to_id);
        known.insert(e.from_id.as_str());
        known.insert(e.to_id.as_str());
    }
    if !known.contains(seed) {
        return Err(PosterityError::UnknownSeed(seed.to_string()));
    }
    let mut paths = Vec::new();
    let mut path = vec![seed];
    extend_paths(&adjacency, &mut path, max_depth, &mut paths);
    paths.sort();
    Ok(paths)
}

fn extend_paths<'a>(
    adjacency: &BTreeMap<&'a str, BTreeSet<&'a str>>,
    path: &mut Vec<&'a str>,
    max_depth: usize,
    out: &mut Vec<Vec<String>>,
) {
    if path.len() > max_depth {
        return;
    }
    let last = path[path.len() - 1];
    let Some(next) = adjacency.get(last) else {
        return;
    };
    for &n in next {
        if path.contains(&n) {
            continue;
        }
        path.push(n);
        out.push(path.iter().map(|s| s.to_string()).collect());
        extend_paths(adjacency, path, max_depth, out);
        path.pop();
    }
}
