use std::collections::BTreeMap;
use std::io::BufRead;
use std::ops::RangeInclusive;

use unicode_normalization::UnicodeNormalization;

use super::{tsv_records, NormalizeError};
use crate::resources;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Script {
    Hebrew,
    Arabic,
}

impl Script {
    /// Letters the table must cover.
    fn base_letters(self) -> Vec<RangeInclusive<char>> {
        match self {
            Script::Hebrew => vec!['\u{05D0}'..='\u{05EA}'],
            Script::Arabic => vec!['\u{0621}'..='\u{063A}', '\u{0641}'..='\u{064A}'],
        }
    }

    fn contains(self, c: char) -> bool {
        match self {
            Script::Hebrew => ('\u{0590}'..='\u{05FF}').contains(&c),
            Script::Arabic => ('\u{0600}'..='\u{06FF}').contains(&c),
        }
    }

    /// First script among Hebrew and Arabic that occurs in `text`.
    pub fn detect(text: &str) -> Option<Script> {
        text.chars().find_map(|c| {
            [Script::Hebrew, Script::Arabic]
                .into_iter()
                .find(|s| s.contains(c))
        })
    }
}

/// Grapheme → ASCII rules for one script, applied longest match first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RomanizationTable {
    script: Script,
    rules: BTreeMap<String, String>,
    longest: usize,
}

fn valid_output(s: &str) -> bool {
    s.bytes()
        .all(|b| b.is_ascii_lowercase() || b == b'\'' || b == b' ')
}

impl RomanizationTable {
    /// Reads `grapheme<TAB>ascii` lines. The ASCII side may be empty (the
    /// grapheme is dropped) and must match `[a-z' ]*`. Every base letter of
    /// the script must have a rule.
    pub fn load(script: Script, source: impl BufRead) -> Result<Self, NormalizeError> {
        let mut rules = BTreeMap::new();
        for record in tsv_records(source) {
            let (line, fields) = record?;
            let [grapheme, ascii] = fields.as_slice() else {
                return Err(NormalizeError::Format {
                    line,
                    message: format!("expected 2 tab-separated fields, found {}", fields.len()),
                });
            };
            let grapheme: String = grapheme.nfc().collect();
            if grapheme.is_empty() || !valid_output(ascii) {
                return Err(NormalizeError::Format {
                    line,
                    message: format!("bad rule `{grapheme}` -> `{ascii}`"),
                });
            }
            rules.insert(grapheme, ascii.clone());
        }
        for range in script.base_letters() {
            if let Some(missing) = range.clone().find(|c| !rules.contains_key(&c.to_string())) {
                return Err(NormalizeError::IncompleteTable(missing));
            }
        }
        let longest = rules.keys().map(|k| k.chars().count()).max().unwrap_or(1);
        Ok(RomanizationTable {
            script,
            rules,
            longest,
        })
    }

    pub fn shipped(script: Script) -> Self {
        let src = match script {
            Script::Hebrew => resources::ROMAN_HE,
            Script::Arabic => resources::ROMAN_AR,
        };
        Self::load(script, src.as_bytes()).expect("shipped romanization table is well-formed")
    }

    pub fn script(&self) -> Script {
        self.script
    }

    pub fn rules(&self) -> impl Iterator<Item = (&str, &str)> {
        self.rules.iter().map(|(g, a)| (g.as_str(), a.as_str()))
    }
}

/// Romanizes `text` into lowercase ASCII matching `[a-z' ]*`.
///
/// ASCII letters are lowercased and apostrophes kept; other ASCII
/// characters and whitespace become word breaks. Runs of spaces are
/// collapsed and the result is trimmed, so the function is idempotent.
/// `offset` in errors counts characters of the NFC-normalized input.
pub fn romanize(text: &str, table: &RomanizationTable) -> Result<String, NormalizeError> {
    let chars: Vec<char> = text.nfc().collect();
    let mut raw = String::with_capacity(chars.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_ascii_alphabetic() {
            raw.push(c.to_ascii_lowercase());
            i += 1;
            continue;
        }
        if c == '\'' {
            raw.push(c);
            i += 1;
            continue;
        }
        if c.is_ascii() || c.is_whitespace() {
            raw.push(' ');
            i += 1;
            continue;
        }
        let max = table.longest.min(chars.len() - i);
        let matched = (1..=max).rev().find_map(|len| {
            let key: String = chars[i..i + len].iter().collect();
            table.rules.get(&key).map(|ascii| (len, ascii))
        });
        match matched {
            Some((len, ascii)) => {
                raw.push_str(ascii);
                i += len;
            }
            None => return Err(NormalizeError::UnmappableCharacter { ch: c, offset: i }),
        }
    }
    Ok(raw
        .split(' ')
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" "))
}
