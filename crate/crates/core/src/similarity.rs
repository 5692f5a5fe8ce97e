//! Component-wise similarity between containers and threshold clustering.
//!
//! Each component is a Jaccard index over curated token sets:
//!
//! * keyword: `key.*` sets, averaged over shared interrogation languages;
//! * lesson: `lec.*` content tokens (stopwords removed), same averaging;
//! * lemma: `lem.*` token sets, same-language only;
//! * structure: features parsed from the `str.*` descriptors.
//!
//! The aggregate is the weighted mean over the components available for
//! the pair, with weights renormalized to sum to one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{Lang, INTERROGATION};
use crate::model::{Root, UnitContainer};
use crate::normalize::{keyword_set, tokenize, Stoplists};
use crate::structure::{structure_features, FeatureSet, LabelTable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimilarityError {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Keyword,
    Lesson,
    Lemma,
    Structure,
}

impl Component {
    pub const ALL: [Component; 4] = [
        Component::Keyword,
        Component::Lesson,
        Component::Lemma,
        Component::Structure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Component::Keyword => "keyword",
            Component::Lesson => "lesson",
            Component::Lemma => "lemma",
            Component::Structure => "structure",
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Non-negative component weights with at least one positive entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    keyword: f64,
    lesson: f64,
    lemma: f64,
    structure: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            keyword: 0.4,
            lesson: 0.3,
            lemma: 0.2,
            structure: 0.1,
        }
    }
}

impl Weights {
    pub fn new(
        keyword: f64,
        lesson: f64,
        lemma: f64,
        structure: f64,
    ) -> Result<Self, SimilarityError> {
        let all = [keyword, lesson, lemma, structure];
        if let Some(w) = all.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(SimilarityError::InvalidWeights(format!(
                "weight {w} is not a non-negative number"
            )));
        }
        if all.iter().all(|w| *w == 0.0) {
            return Err(SimilarityError::InvalidWeights(
                "at least one weight must be positive".into(),
            ));
        }
        Ok(Weights {
            keyword,
            lesson,
            lemma,
            structure,
        })
    }

    pub fn get(&self, c: Component) -> f64 {
        match c {
            Component::Keyword => self.keyword,
            Component::Lesson => self.lesson,
            Component::Lemma => self.lemma,
            Component::Structure => self.structure,
        }
    }
}

impl FromStr for Weights {
    type Err = SimilarityError;

    /// Parses `kw,les,lem,str`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| SimilarityError::InvalidWeights(format!("`{s}`: {e}")))?;
        match parts.as_slice() {
            &[kw, les, lem, st] => Weights::new(kw, les, lem, st),
            _ => Err(SimilarityError::InvalidWeights(format!(
                "`{s}`: expected four comma-separated numbers"
            ))),
        }
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.keyword, self.lesson, self.lemma, self.structure
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityScore {
    pub keyword: Option<f64>,
    pub lesson: Option<f64>,
    pub lemma: Option<f64>,
    pub structure: Option<f64>,
    pub aggregate: f64,
    /// Renormalized weights of the components that entered the aggregate.
    pub weights_used: BTreeMap<Component, f64>,
}

impl SimilarityScore {
    pub fn component(&self, c: Component) -> Option<f64> {
        match c {
            Component::Keyword => self.keyword,
            Component::Lesson => self.lesson,
            Component::Lemma => self.lemma,
            Component::Structure => self.structure,
        }
    }

    /// Combines component scores with `weights`, renormalizing over the
    /// components that are present and carry positive weight.
    pub fn combine(
        keyword: Option<f64>,
        lesson: Option<f64>,
        lemma: Option<f64>,
        structure: Option<f64>,
        weights: &Weights,
    ) -> Self {
        let mut score = SimilarityScore {
            keyword,
            lesson,
            lemma,
            structure,
            aggregate: 0.0,
            weights_used: BTreeMap::new(),
        };
        let mut num = 0.0;
        let mut den = 0.0;
        for c in Component::ALL {
            let w = weights.get(c);
            if let (Some(s), true) = (score.component(c), w > 0.0) {
                num += w * s;
                den += w;
                score.weights_used.insert(c, w);
            }
        }
        if den > 0.0 {
            score.aggregate = num / den;
            for w in score.weights_used.values_mut() {
                *w /= den;
            }
        }
        score
    }
}

/// Jaccard index `|a ∩ b| / |a ∪ b|`; two empty sets are identical (1.0).
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Token sets of one container, precomputed for repeated comparisons.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UnitProfile {
    pub keywords: BTreeMap<Lang, BTreeSet<String>>,
    pub lessons: BTreeMap<Lang, BTreeSet<String>>,
    pub lemmas: BTreeMap<Lang, BTreeSet<String>>,
    pub structure: FeatureSet,
}

fn mean_over_shared(
    a: &BTreeMap<Lang, BTreeSet<String>>,
    b: &BTreeMap<Lang, BTreeSet<String>>,
) -> Option<f64> {
    let scores: Vec<f64> = a
        .iter()
        .filter_map(|(lang, set)| b.get(lang).map(|other| jaccard(set, other)))
        .collect();
    (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64)
}

impl UnitProfile {
    pub fn keyword_similarity(&self, other: &Self) -> Option<f64> {
        mean_over_shared(&self.keywords, &other.keywords)
    }

    pub fn lesson_similarity(&self, other: &Self) -> Option<f64> {
        mean_over_shared(&self.lessons, &other.lessons)
    }

    pub fn lemma_similarity(&self, other: &Self) -> Option<f64> {
        mean_over_shared(&self.lemmas, &other.lemmas)
    }

    pub fn structure_similarity(&self, other: &Self) -> Option<f64> {
        (!self.structure.is_empty() && !other.structure.is_empty())
            .then(|| jaccard(&self.structure, &other.structure))
    }

    pub fn score(&self, other: &Self, weights: &Weights) -> SimilarityScore {
        SimilarityScore::combine(
            self.keyword_similarity(other),
            self.lesson_similarity(other),
            self.lemma_similarity(other),
            self.structure_similarity(other),
            weights,
        )
    }
}

/// Scores containers against each other with fixed resources and weights.
#[derive(Debug, Clone, Default)]
pub struct SimilarityEngine {
    pub stoplists: Stoplists,
    pub labels: LabelTable,
    pub weights: Weights,
}

impl SimilarityEngine {
    pub fn new(stoplists: Stoplists, labels: LabelTable, weights: Weights) -> Self {
        SimilarityEngine {
            stoplists,
            labels,
            weights,
        }
    }

    pub fn profile(&self, c: &UnitContainer) -> UnitProfile {
        let mut p = UnitProfile::default();
        for lang in INTERROGATION {
            if let Some(text) = c.get_entity(Root::Key, Some(&lang)) {
                p.keywords.insert(lang.clone(), keyword_set(text));
            }
            if let Some(text) = c.get_entity(Root::Lec, Some(&lang)) {
                match self.stoplists.lesson_tokens(text, &lang) {
                    Ok(tokens) => {
                        p.lessons.insert(lang.clone(), tokens);
                    }
                    Err(e) => log::warn!("{}: lesson not scored: {e}", c.id()),
                }
            }
        }
        for e in c.entities_with_root(Root::Lem) {
            if let Some(lang) = e.lang() {
                p.lemmas
                    .insert(lang.clone(), tokenize(e.text()).into_iter().collect());
            }
        }
        p.structure = structure_features(c, &self.labels);
        p
    }

    pub fn keyword_similarity(&self, a: &UnitContainer, b: &UnitContainer) -> Option<f64> {
        self.profile(a).keyword_similarity(&self.profile(b))
    }

    pub fn lesson_similarity(&self, a: &UnitContainer, b: &UnitContainer) -> Option<f64> {
        self.profile(a).lesson_similarity(&self.profile(b))
    }

    pub fn lemma_similarity(&self, a: &UnitContainer, b: &UnitContainer) -> Option<f64> {
        self.profile(a).lemma_similarity(&self.profile(b))
    }

    pub fn structure_similarity(&self, a: &UnitContainer, b: &UnitContainer) -> Option<f64> {
        self.profile(a).structure_similarity(&self.profile(b))
    }

    pub fn aggregate_similarity(
        &self,
        a: &UnitContainer,
        b: &UnitContainer,
        weights: &Weights,
    ) -> SimilarityScore {
        self.profile(a).score(&self.profile(b), weights)
    }

    /// Single-linkage clusters of `units` at `threshold`, using the engine's
    /// weights.
    pub fn cluster(
        &self,
        units: &[UnitContainer],
        threshold: f64,
    ) -> Result<Vec<Vec<String>>, SimilarityError> {
        let profiles: Vec<UnitProfile> = units.par_iter().map(|u| self.profile(u)).collect();
        let ids: Vec<&str> = units.iter().map(UnitContainer::id).collect();
        cluster_profiles(&ids, &profiles, &self.weights, threshold)
    }
}

pub fn check_threshold(threshold: f64) -> Result<(), SimilarityError> {
    if threshold > 0.0 && threshold <= 1.0 {
        Ok(())
    } else {
        Err(SimilarityError::InvalidThreshold(threshold))
    }
}

pub fn cluster_profiles(
    ids: &[&str],
    profiles: &[UnitProfile],
    weights: &Weights,
    threshold: f64,
) -> Result<Vec<Vec<String>>, SimilarityError> {
    cluster_by(ids, threshold, |i, j| {
        profiles[i].score(&profiles[j], weights).aggregate
    })
}

/// Single-linkage threshold clustering: `i` and `j` share a cluster iff a
/// chain of pairs with `similarity >= threshold` connects them. Members are
/// sorted by id and clusters by their smallest member.
pub fn cluster_by<F>(
    ids: &[&str],
    threshold: f64,
    similarity: F,
) -> Result<Vec<Vec<String>>, SimilarityError>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    check_threshold(threshold)?;
    let n = ids.len();
    let edges: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let similarity = &similarity;
            (i + 1..n).filter_map(move |j| (similarity(i, j) >= threshold).then_some((i, j)))
        })
        .collect();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, j) in edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(id.to_string());
    }
    let mut clusters: Vec<Vec<String>> = groups
        .into_values()
        .map(|mut members| {
            members.sort();
            members
        })
        .collect();
    clusters.sort();
    Ok(clusters)
}
