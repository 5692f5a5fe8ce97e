//! Language codes used as entity suffixes and unit source languages.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Language of an entity or unit.
///
/// Ordering follows declaration order, which is also the order used when
/// listing missing entities: the three interrogation languages come first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Lang {
    Es,
    Fr,
    En,
    La,
    Ar,
    He,
    El,
    /// Any other lowercase ISO-639-like tag (2 or 3 letters).
    Other(String),
}

/// The languages in which every unit carries translated metadata.
pub const INTERROGATION: [Lang; 3] = [Lang::Es, Lang::Fr, Lang::En];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid language tag `{0}`")]
pub struct InvalidLang(pub String);

impl Lang {
    pub fn code(&self) -> &str {
        match self {
            Lang::Es => "es",
            Lang::Fr => "fr",
            Lang::En => "en",
            Lang::La => "la",
            Lang::Ar => "ar",
            Lang::He => "he",
            Lang::El => "el",
            Lang::Other(tag) => tag,
        }
    }

    /// True exactly for Spanish, French and English.
    pub fn is_interrogation(&self) -> bool {
        matches!(self, Lang::Es | Lang::Fr | Lang::En)
    }

    /// Whether text in this language is written in a script with letter case.
    pub fn is_cased(&self) -> bool {
        !matches!(self, Lang::Ar | Lang::He)
    }
}

impl FromStr for Lang {
    type Err = InvalidLang;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "es" | "sp" => Lang::Es,
            "fr" => Lang::Fr,
            "en" => Lang::En,
            "la" => Lang::La,
            "ar" => Lang::Ar,
            "he" => Lang::He,
            "el" => Lang::El,
            other
                if (2..=3).contains(&other.len())
                    && other.bytes().all(|b| b.is_ascii_lowercase()) =>
            {
                Lang::Other(other.to_string())
            }
            other => return Err(InvalidLang(other.to_string())),
        })
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl From<Lang> for String {
    fn from(lang: Lang) -> Self {
        lang.code().to_string()
    }
}

impl TryFrom<String> for Lang {
    type Error = InvalidLang;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}
