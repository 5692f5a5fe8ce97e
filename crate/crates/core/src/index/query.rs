use std::collections::BTreeSet;

use thiserror::Error;

use crate::lang::Lang;
use crate::model::Degree;
use crate::normalize::tokenize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("unknown filter field `{0}` (expected keyword, lang, degree, work, from, to)")]
    UnknownFilterField(String),
    #[error("invalid value `{value}` for `{field}`: {message}")]
    InvalidValue {
        field: String,
        value: String,
        message: String,
    },
}

/// Conjunctive unit filter. Unset fields match everything.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryFilter {
    /// Normalized tokens; a unit matches when every token occurs among its
    /// keyword or lemma terms.
    pub keyword: Option<Vec<String>>,
    /// Source language of the unit.
    pub lang: Option<Lang>,
    pub degree: Option<Degree>,
    pub work: Option<String>,
    /// Inclusive year range; matches units whose work dating overlaps it.
    pub from: Option<i32>,
    pub to: Option<i32>,
}

impl QueryFilter {
    /// Sets a field from its textual name and value.
    pub fn set(&mut self, field: &str, value: &str) -> Result<(), QueryError> {
        let invalid = |message: String| QueryError::InvalidValue {
            field: field.to_string(),
            value: value.to_string(),
            message,
        };
        match field {
            "keyword" => {
                let tokens = tokenize(value);
                if tokens.is_empty() {
                    return Err(invalid("no word characters".into()));
                }
                self.keyword = Some(tokens);
            }
            "lang" => self.lang = Some(value.parse().map_err(|e| invalid(format!("{e}")))?),
            "degree" => self.degree = Some(value.parse().map_err(invalid)?),
            "work" => self.work = Some(value.to_string()),
            "from" | "to" => {
                let year = value.parse::<i32>().map_err(|e| invalid(e.to_string()))?;
                if field == "from" {
                    self.from = Some(year);
                } else {
                    self.to = Some(year);
                }
            }
            other => return Err(QueryError::UnknownFilterField(other.to_string())),
        }
        Ok(())
    }

    pub fn date_range(&self) -> Option<(i32, i32)> {
        match (self.from, self.to) {
            (None, None) => None,
            (from, to) => Some((from.unwrap_or(i32::MIN), to.unwrap_or(i32::MAX))),
        }
    }

    pub(crate) fn keyword_matches(&self, terms: &BTreeSet<&str>) -> bool {
        self.keyword
            .as_ref()
            .is_none_or(|ks| ks.iter().all(|k| terms.contains(k.as_str())))
    }
}
