use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use unicode_normalization::UnicodeNormalization;

use super::{tsv_records, NormalizeError};
use crate::lang::Lang;
use crate::resources;

/// Alphabetical surface-form → lemma dictionary for one language.
///
/// A surface form may span several space-separated tokens (a multiword
/// entry such as `e agora`). Multiword entries are matched longest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaDictionary {
    lang: Lang,
    entries: BTreeMap<String, String>,
    longest: usize,
}

/// Output of [`LemmaDictionary::lemmatize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaResult {
    /// One slot per input token, in input order. Tokens absorbed into a
    /// multiword entry get an empty slot; the entry's lemma sits on the
    /// last token of the match.
    pub lemmas: Vec<String>,
    /// Positions of tokens that were not in the dictionary.
    pub unknown: BTreeSet<usize>,
}

impl LemmaResult {
    /// Lemmas joined with single spaces, skipping empty slots.
    pub fn joined(&self) -> String {
        self.lemmas
            .iter()
            .filter(|l| !l.is_empty())
            .map(String::as_str)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn normalize_form(s: &str) -> String {
    let lowered = s.nfc().collect::<String>().to_lowercase();
    lowered.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl LemmaDictionary {
    pub fn new(lang: Lang) -> Self {
        LemmaDictionary {
            lang,
            entries: BTreeMap::new(),
            longest: 1,
        }
    }

    /// Reads `surface<TAB>lemma` lines. Repeated identical pairs are merged;
    /// a surface form with two different lemmas is a conflict.
    pub fn load(lang: Lang, source: impl BufRead) -> Result<Self, NormalizeError> {
        let mut dict = LemmaDictionary::new(lang);
        for record in tsv_records(source) {
            let (line, fields) = record?;
            let [surface, lemma] = fields.as_slice() else {
                return Err(NormalizeError::Format {
                    line,
                    message: format!("expected 2 tab-separated fields, found {}", fields.len()),
                });
            };
            let (surface, lemma) = (normalize_form(surface), normalize_form(lemma));
            if surface.is_empty() || lemma.is_empty() {
                return Err(NormalizeError::Format {
                    line,
                    message: "empty surface form or lemma".into(),
                });
            }
            dict.insert(surface, lemma)?;
        }
        Ok(dict)
    }

    /// The Spanish dictionary compiled into the crate.
    pub fn shipped_spanish() -> Self {
        Self::load(Lang::Es, resources::LEMMAS_ES.as_bytes())
            .expect("shipped Spanish dictionary is well-formed")
    }

    pub fn insert(&mut self, surface: String, lemma: String) -> Result<(), NormalizeError> {
        match self.entries.get(&surface) {
            Some(existing) if *existing != lemma => Err(NormalizeError::Conflict {
                surface,
                first: existing.clone(),
                second: lemma,
            }),
            Some(_) => Ok(()),
            None => {
                self.longest = self.longest.max(surface.split(' ').count());
                self.entries.insert(surface, lemma);
                Ok(())
            }
        }
    }

    pub fn lang(&self) -> &Lang {
        &self.lang
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, surface: &str) -> Option<&str> {
        self.entries.get(surface).map(String::as_str)
    }

    /// Entries in alphabetical order of surface form.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(s, l)| (s.as_str(), l.as_str()))
    }

    /// Replaces each token by its lemma; unknown tokens pass through and
    /// their positions are recorded.
    pub fn lemmatize<S: AsRef<str>>(&self, tokens: &[S]) -> LemmaResult {
        let mut unknown = BTreeSet::new();
        let mut lemmas = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            let max = self.longest.min(tokens.len() - i);
            let matched = (1..=max).rev().find_map(|len| {
                let key = tokens[i..i + len]
                    .iter()
                    .map(AsRef::as_ref)
                    .collect::<Vec<_>>()
                    .join(" ");
                self.lookup(&key).map(|lemma| (len, lemma))
            });
            match matched {
                Some((len, lemma)) => {
                    lemmas.extend(std::iter::repeat_n(String::new(), len - 1));
                    lemmas.push(lemma.to_string());
                    i += len;
                }
                None => {
                    unknown.insert(i);
                    lemmas.push(tokens[i].as_ref().to_string());
                    i += 1;
                }
            }
        }
        LemmaResult { lemmas, unknown }
    }
}
