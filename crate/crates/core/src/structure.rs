//! Parsing of the linguistic, formal and poetic structure descriptors
//! (`str.ling`, `str.form`, `str.poet`) into comparable features.
//!
//! The descriptor notations are annotator conventions rather than a
//! grammar, so every parse keeps the raw text and anything unrecognized
//! survives as an opaque value.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::model::{Root, UnitContainer};
use crate::normalize::{tsv_records, NormalizeError};
use crate::resources;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("poetic descriptor `{0}` has no syllable counts")]
    PoeticFormat(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoeticStructure {
    /// Syllables per hemistich, each at least 1.
    pub syllable_counts: Vec<u32>,
    /// Vowel pattern after the `ass` marker, e.g. `a/o`.
    pub assonance: Option<String>,
    pub raw: String,
}

/// Parses descriptors such as `8 / 8 ass a/o`.
pub fn parse_poetic(text: &str) -> Result<PoeticStructure, StructureError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let marker = tokens.iter().position(|t| *t == "ass");
    let (count_part, assonance) = match marker {
        Some(i) => {
            let rest = tokens[i + 1..].join(" ");
            (tokens[..i].join(" "), (!rest.is_empty()).then_some(rest))
        }
        None => (tokens.join(" "), None),
    };
    let err = || StructureError::PoeticFormat(text.to_string());
    if count_part.is_empty() {
        return Err(err());
    }
    let syllable_counts = count_part
        .split('/')
        .map(|p| p.trim().parse::<u32>().ok().filter(|&n| n >= 1))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(err)?;
    Ok(PoeticStructure {
        syllable_counts,
        assonance,
        raw: text.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FormKind {
    BinaryParallelism,
    Dialogue,
    Imperative,
    Conditional,
    Comparative,
    Other(String),
}

impl FormKind {
    fn from_slug(slug: &str) -> Option<FormKind> {
        Some(match slug {
            "binary-parallelism" => FormKind::BinaryParallelism,
            "dialogue" => FormKind::Dialogue,
            "imperative" => FormKind::Imperative,
            "conditional" => FormKind::Conditional,
            "comparative" => FormKind::Comparative,
            _ => return None,
        })
    }

    pub fn slug(&self) -> String {
        match self {
            FormKind::BinaryParallelism => "binary-parallelism".into(),
            FormKind::Dialogue => "dialogue".into(),
            FormKind::Imperative => "imperative".into(),
            FormKind::Conditional => "conditional".into(),
            FormKind::Comparative => "comparative".into(),
            FormKind::Other(label) => format!("other:{}", normalize_label(label)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalStructure {
    pub kind: FormKind,
    /// `(term, counter-term)` pairs; only filled for binary parallelism.
    pub oppositions: Vec<(String, String)>,
    pub raw: String,
}

fn normalize_label(s: &str) -> String {
    let lowered = s.nfc().collect::<String>().to_lowercase();
    lowered.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Label → form kind lookup for `str.form` descriptors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelTable {
    labels: BTreeMap<String, FormKind>,
}

impl Default for LabelTable {
    fn default() -> Self {
        Self::shipped()
    }
}

impl LabelTable {
    /// Reads `label<TAB>kind` lines, where kind is one of
    /// `binary-parallelism`, `dialogue`, `imperative`, `conditional`,
    /// `comparative`.
    pub fn load(source: impl BufRead) -> Result<Self, NormalizeError> {
        let mut labels = BTreeMap::new();
        for record in tsv_records(source) {
            let (line, fields) = record?;
            let [label, kind] = fields.as_slice() else {
                return Err(NormalizeError::Format {
                    line,
                    message: format!("expected 2 tab-separated fields, found {}", fields.len()),
                });
            };
            let kind = FormKind::from_slug(kind.trim()).ok_or_else(|| NormalizeError::Format {
                line,
                message: format!("unknown form kind `{kind}`"),
            })?;
            labels.insert(normalize_label(label), kind);
        }
        Ok(LabelTable { labels })
    }

    pub fn shipped() -> Self {
        Self::load(resources::LABELS_FR.as_bytes()).expect("shipped label table is well-formed")
    }

    pub fn lookup(&self, label: &str) -> Option<&FormKind> {
        self.labels.get(&normalize_label(label))
    }

    /// Parses descriptors such as `parallélisme binaire : avant/après haut/bas`.
    /// The label is the text before the first colon, or the whole text.
    pub fn parse_formal(&self, text: &str) -> FormalStructure {
        let (label, detail) = match text.split_once(':') {
            Some((label, detail)) => (label.trim(), detail),
            None => (text.trim(), ""),
        };
        let kind = self
            .lookup(label)
            .cloned()
            .unwrap_or_else(|| FormKind::Other(label.to_string()));
        let oppositions = if kind == FormKind::BinaryParallelism {
            detail
                .split_whitespace()
                .filter_map(|t| {
                    let (a, b) = t.split_once('/')?;
                    (!a.is_empty() && !b.is_empty() && !b.contains('/'))
                        .then(|| (a.to_string(), b.to_string()))
                })
                .collect()
        } else {
            Vec::new()
        };
        FormalStructure {
            kind,
            oppositions,
            raw: text.to_string(),
        }
    }
}

/// Parses a formal descriptor with the shipped label table.
pub fn parse_formal(text: &str) -> FormalStructure {
    LabelTable::shipped().parse_formal(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolRef {
    pub hemistich: usize,
    pub position: usize,
}

/// `from` is marked as opposed to `to` (`opp à N`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OppositionLink {
    pub from: SymbolRef,
    pub to: SymbolRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinguisticStructure {
    /// Constituent symbols per hemistich.
    pub hemistichs: Vec<Vec<String>>,
    pub links: Vec<OppositionLink>,
    pub raw: String,
}

impl LinguisticStructure {
    pub fn symbol(&self, r: SymbolRef) -> Option<&str> {
        self.hemistichs
            .get(r.hemistich)?
            .get(r.position)
            .map(String::as_str)
    }
}

fn trailing_number(symbol: &str) -> Option<usize> {
    let digits = symbol.len() - symbol.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    if digits == 0 || digits == symbol.len() {
        return None;
    }
    symbol[symbol.len() - digits..].parse().ok()
}

/// Parses descriptors such as `Sadv1 SV Sadv2 / Sadv opp à 1 SV Sadv opp à 2`.
///
/// `/` separates hemistichs. `opp à N` links the preceding symbol to the
/// earlier symbol numbered `N` (`Sadv1` for `N = 1`), or failing that to
/// the `N`-th symbol of the first hemistich. Markers that resolve to
/// nothing are kept as plain symbols.
pub fn parse_linguistic(text: &str) -> LinguisticStructure {
    let mut hemistichs: Vec<Vec<String>> = Vec::new();
    let mut links = Vec::new();
    if text.trim().is_empty() {
        return LinguisticStructure {
            hemistichs,
            links,
            raw: text.to_string(),
        };
    }
    for part in text.split('/') {
        let h = hemistichs.len();
        let tokens: Vec<&str> = part.split_whitespace().collect();
        let mut symbols: Vec<String> = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            if tokens[i] == "opp" && i + 2 < tokens.len() && matches!(tokens[i + 1], "à" | "a") {
                if let (Ok(n), Some(from)) =
                    (tokens[i + 2].parse::<usize>(), symbols.len().checked_sub(1))
                {
                    let target = resolve_target(&hemistichs, &symbols, h, n);
                    if let Some(to) = target {
                        links.push(OppositionLink {
                            from: SymbolRef {
                                hemistich: h,
                                position: from,
                            },
                            to,
                        });
                        i += 3;
                        continue;
                    }
                }
            }
            symbols.push(tokens[i].to_string());
            i += 1;
        }
        hemistichs.push(symbols);
    }
    LinguisticStructure {
        hemistichs,
        links,
        raw: text.to_string(),
    }
}

fn resolve_target(
    earlier: &[Vec<String>],
    current: &[String],
    current_index: usize,
    n: usize,
) -> Option<SymbolRef> {
    let numbered = earlier
        .iter()
        .map(Vec::as_slice)
        .enumerate()
        .chain(std::iter::once((current_index, current)))
        .flat_map(|(h, syms)| {
            syms.iter().enumerate().map(move |(p, s)| {
                (
                    SymbolRef {
                        hemistich: h,
                        position: p,
                    },
                    s.clone(),
                )
            })
        })
        .find(|(_, s)| trailing_number(s) == Some(n))
        .map(|(r, _)| r);
    numbered.or_else(|| {
        let first = earlier.first()?;
        (n >= 1 && n <= first.len()).then_some(SymbolRef {
            hemistich: 0,
            position: n - 1,
        })
    })
}

/// Flat features drawn from a container's structure descriptors.
pub type FeatureSet = BTreeSet<String>;

/// Features of the container's `str.*` entities, for example
/// `{form:binary-parallelism, hemistichs:2, syllables:8-8, assonance:a/o,
/// opp-count:2}`. Missing descriptors contribute nothing.
///
/// Hemistich count and opposition count come from the poetic and formal
/// descriptors, falling back to the linguistic one.
pub fn structure_features(c: &UnitContainer, labels: &LabelTable) -> FeatureSet {
    let mut features = FeatureSet::new();
    let formal = c
        .get_entity(Root::StrForm, None)
        .map(|t| labels.parse_formal(t));
    let poetic = c.get_entity(Root::StrPoet, None).map(parse_poetic);
    let linguistic = c
        .get_entity(Root::StrLing, None)
        .map(parse_linguistic)
        .filter(|l| !l.hemistichs.is_empty());

    if let Some(f) = &formal {
        features.insert(format!("form:{}", f.kind.slug()));
    }
    let mut hemistichs = None;
    match &poetic {
        Some(Ok(p)) => {
            hemistichs = Some(p.syllable_counts.len());
            let counts: Vec<String> = p.syllable_counts.iter().map(u32::to_string).collect();
            features.insert(format!("syllables:{}", counts.join("-")));
            if let Some(a) = &p.assonance {
                features.insert(format!("assonance:{a}"));
            }
        }
        Some(Err(StructureError::PoeticFormat(raw))) => {
            features.insert(format!("poet:{}", normalize_label(raw)));
        }
        None => {}
    }
    let hemistichs = hemistichs.or(linguistic.as_ref().map(|l| l.hemistichs.len()));
    if let Some(n) = hemistichs {
        features.insert(format!("hemistichs:{n}"));
    }
    let opp_count = formal
        .as_ref()
        .map(|f| f.oppositions.len())
        .filter(|&n| n > 0)
        .or(linguistic
            .as_ref()
            .map(|l| l.links.len())
            .filter(|&n| n > 0));
    if let Some(n) = opp_count {
        features.insert(format!("opp-count:{n}"));
    }
    features
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markup::parse_container;

    const LING: &str = "Sadv1 SV Sadv2 / Sadv opp à 1 SV Sadv opp à 2";

    #[test]
    fn poetic_descriptors() {
        let p = parse_poetic("8 / 8 ass a/o").unwrap();
        assert_eq!(p.syllable_counts, vec![8, 8]);
        assert_eq!(p.assonance.as_deref(), Some("a/o"));
        let p = parse_poetic("7 / 5").unwrap();
        assert_eq!(p.syllable_counts, vec![7, 5]);
        assert_eq!(p.assonance, None);
        assert_eq!(parse_poetic("8/8").unwrap().syllable_counts, vec![8, 8]);
        for bad in ["ass a/o", "", "0 / 8", "8 / x"] {
            assert!(parse_poetic(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn formal_descriptors() {
        let f = parse_formal("parallélisme binaire : avant/après haut/bas ");
        assert_eq!(f.kind, FormKind::BinaryParallelism);
        assert_eq!(
            f.oppositions,
            vec![
                ("avant".to_string(), "après".to_string()),
                ("haut".to_string(), "bas".to_string())
            ]
        );
        assert_eq!(parse_formal("question/réponse").kind, FormKind::Dialogue);
        assert_eq!(parse_formal("Exhortation").kind, FormKind::Imperative);
        assert_eq!(parse_formal("si...").kind, FormKind::Conditional);
        assert_eq!(
            parse_formal("quanto mas... tanto mas").kind,
            FormKind::Comparative
        );
        let f = parse_formal("structure inconnue xyz");
        assert_eq!(f.kind, FormKind::Other("structure inconnue xyz".into()));
        assert!(f.oppositions.is_empty());
        // oppositions only for parallelism
        assert!(parse_formal("dialogue : a/b").oppositions.is_empty());
    }

    #[test]
    fn linguistic_descriptor_from_listing() {
        let l = parse_linguistic(LING);
        assert_eq!(
            l.hemistichs,
            vec![vec!["Sadv1", "SV", "Sadv2"], vec!["Sadv", "SV", "Sadv"]]
        );
        assert_eq!(l.links.len(), 2);
        assert_eq!(l.symbol(l.links[0].from), Some("Sadv"));
        assert_eq!(l.symbol(l.links[0].to), Some("Sadv1"));
        assert_eq!(l.symbol(l.links[1].to), Some("Sadv2"));
        assert_eq!(
            l.links[1].from,
            SymbolRef {
                hemistich: 1,
                position: 2
            }
        );
        for link in &l.links {
            assert!(l.symbol(link.from).is_some() && l.symbol(link.to).is_some());
        }
    }

    #[test]
    fn linguistic_edge_cases() {
        let l = parse_linguistic("SV");
        assert_eq!(l.hemistichs, vec![vec!["SV"]]);
        assert!(l.links.is_empty());
        let l = parse_linguistic("");
        assert!(l.hemistichs.is_empty());
        assert_eq!(l.raw, "");
        // positional fallback, then unresolvable marker kept opaque
        let l = parse_linguistic("SN SV / SN opp à 2 / opp à 9");
        assert_eq!(l.symbol(l.links[0].to), Some("SV"));
        assert_eq!(l.hemistichs[2], vec!["opp", "à", "9"]);
    }

    #[test]
    fn features_of_listing_container() {
        let c = parse_container(&format!(
            "<pr.all><pr>x</pr><str.ling>{LING}</str.ling>\
             <str.form>parallélisme binaire : avant/après haut/bas </str.form>\
             <str.poet>8 / 8 ass a/o</str.poet></pr.all>"
        ))
        .unwrap();
        let f = structure_features(&c, &LabelTable::shipped());
        let expected: FeatureSet = [
            "form:binary-parallelism",
            "hemistichs:2",
            "syllables:8-8",
            "assonance:a/o",
            "opp-count:2",
        ]
        .into_iter()
        .map(String::from)
        .collect();
        assert_eq!(f, expected);
    }

    #[test]
    fn features_of_partial_containers() {
        let labels = LabelTable::shipped();
        let c = parse_container("<pr.all><pr>x</pr></pr.all>").unwrap();
        assert!(structure_features(&c, &labels).is_empty());
        let c = parse_container("<pr.all><pr>x</pr><str.poet>7 / 5</str.poet></pr.all>").unwrap();
        let f: Vec<_> = structure_features(&c, &labels).into_iter().collect();
        assert_eq!(f, vec!["hemistichs:2", "syllables:7-5"]);
        let c = parse_container("<pr.all><pr>x</pr><str.poet>rima ab</str.poet></pr.all>").unwrap();
        let f: Vec<_> = structure_features(&c, &labels).into_iter().collect();
        assert_eq!(f, vec!["poet:rima ab"]);
    }
}
