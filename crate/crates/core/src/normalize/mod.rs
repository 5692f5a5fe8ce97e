//! Tokenization, lemmatization and romanization of entity texts.

mod lemma;
mod romanize;

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::lang::Lang;
use crate::resources;

pub use lemma::{LemmaDictionary, LemmaResult};
pub use romanize::{romanize, RomanizationTable, Script};

#[derive(Debug, Error)]
pub enum NormalizeError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("conflicting lemmas for `{surface}`: `{first}` and `{second}`")]
    Conflict {
        surface: String,
        first: String,
        second: String,
    },
    #[error("no stoplist for language `{0}`")]
    MissingStoplist(Lang),
    #[error("unmappable character {ch:?} at offset {offset}")]
    UnmappableCharacter { ch: char, offset: usize },
    #[error("romanization table has no entry for base letter {0:?}")]
    IncompleteTable(char),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || is_combining_mark(c)
}

/// Splits text into lowercase word tokens.
///
/// Whitespace and punctuation separate tokens; an apostrophe between two
/// word characters stays inside the token. Lowercasing is a no-op for
/// caseless scripts.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.nfc().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let apostrophe = matches!(c, '\'' | '\u{2019}')
            && !current.is_empty()
            && chars.get(i + 1).copied().is_some_and(is_word_char);
        if is_word_char(c) || apostrophe {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Keyword set of a `key.*` entity. Keywords are curated, so nothing is
/// filtered out.
pub fn keyword_set(entity_text: &str) -> BTreeSet<String> {
    tokenize(entity_text).into_iter().collect()
}

/// Per-language lists of function words removed from lesson texts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stoplists {
    by_lang: BTreeMap<Lang, BTreeSet<String>>,
}

impl Default for Stoplists {
    fn default() -> Self {
        Self::shipped()
    }
}

impl Stoplists {
    /// The stoplists compiled into the crate, for es, fr and en.
    pub fn shipped() -> Self {
        let mut lists = Stoplists {
            by_lang: BTreeMap::new(),
        };
        for (lang, src) in [
            (Lang::Es, resources::STOP_ES),
            (Lang::Fr, resources::STOP_FR),
            (Lang::En, resources::STOP_EN),
        ] {
            lists
                .load(lang, src.as_bytes())
                .expect("shipped stoplist is readable");
        }
        lists
    }

    pub fn empty() -> Self {
        Stoplists {
            by_lang: BTreeMap::new(),
        }
    }

    /// Replaces the stoplist for `lang` with one word per line from `source`.
    /// Blank lines and `#` comments are skipped.
    pub fn load(&mut self, lang: Lang, source: impl BufRead) -> Result<(), NormalizeError> {
        let mut words = BTreeSet::new();
        for line in source.lines() {
            let line = line?;
            let word = line.trim();
            if word.is_empty() || word.starts_with('#') {
                continue;
            }
            words.insert(word.nfc().collect::<String>().to_lowercase());
        }
        self.by_lang.insert(lang, words);
        Ok(())
    }

    pub fn get(&self, lang: &Lang) -> Option<&BTreeSet<String>> {
        self.by_lang.get(lang)
    }

    /// Content tokens of a `lec.*` entity: tokenized, stopwords removed,
    /// deduplicated.
    pub fn lesson_tokens(
        &self,
        entity_text: &str,
        lang: &Lang,
    ) -> Result<BTreeSet<String>, NormalizeError> {
        let stop = self
            .get(lang)
            .ok_or_else(|| NormalizeError::MissingStoplist(lang.clone()))?;
        Ok(tokenize(entity_text)
            .into_iter()
            .filter(|t| !stop.contains(t))
            .collect())
    }
}

/// Lines of a tab-separated resource file, skipping blanks and `#` comments.
/// Yields `(line_number, fields)`.
pub(crate) fn tsv_records(
    source: impl BufRead,
) -> impl Iterator<Item = Result<(usize, Vec<String>), NormalizeError>> {
    source
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(e.into())),
            Ok(line) => {
                let line = line.trim_end_matches(['\r', '\n']);
                if line.trim().is_empty() || line.trim_start().starts_with('#') {
                    None
                } else {
                    Some(Ok((i + 1, line.split('\t').map(str::to_string).collect())))
                }
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn tokenizes_unit_two() {
        assert_eq!(
            tokenize("E ante érades mucho alto, e agora sodes mucho baxo"),
            vec!["e", "ante", "érades", "mucho", "alto", "e", "agora", "sodes", "mucho", "baxo"]
        );
    }

    #[test]
    fn tokenize_edge_cases() {
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("Quanto… tanto…"), vec!["quanto", "tanto"]);
        assert_eq!(
            tokenize("l'homme d'armes 'quoted'"),
            vec!["l'homme", "d'armes", "quoted"]
        );
        assert_eq!(tokenize("שפל."), vec!["שפל"]);
    }

    #[test]
    fn keyword_sets() {
        assert_eq!(
            keyword_set("might decay fall death"),
            set(&["might", "decay", "fall", "death"])
        );
        assert_eq!(
            keyword_set(" Puissance  Déchéance "),
            set(&["puissance", "déchéance"])
        );
        assert!(keyword_set("").is_empty());
    }

    #[test]
    fn lesson_tokens_use_shipped_stoplists() {
        let stop = Stoplists::shipped();
        assert_eq!(
            stop.lesson_tokens("death annihilates the mighty", &Lang::En)
                .unwrap(),
            set(&["death", "annihilates", "mighty"])
        );
        assert_eq!(
            stop.lesson_tokens("La mort réduit le puissant à rien", &Lang::Fr)
                .unwrap(),
            set(&["mort", "réduit", "puissant", "rien"])
        );
        assert!(stop
            .lesson_tokens("the the the", &Lang::En)
            .unwrap()
            .is_empty());
        assert!(matches!(
            stop.lesson_tokens("x", &Lang::La),
            Err(NormalizeError::MissingStoplist(Lang::La))
        ));
    }

    #[test]
    fn shipped_stoplists_are_small() {
        let stop = Stoplists::shipped();
        for lang in crate::lang::INTERROGATION {
            let n = stop.get(&lang).unwrap().len();
            assert!(n > 0 && n <= 50, "{lang}: {n}");
        }
    }
}
