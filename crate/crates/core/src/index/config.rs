use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lang::Lang;
use crate::normalize::{LemmaDictionary, NormalizeError, RomanizationTable, Script, Stoplists};
use crate::resources;
use crate::similarity::{check_threshold, Component, SimilarityEngine, SimilarityError, Weights};
use crate::structure::LabelTable;

/// Threshold used by clustering and posterity when none is given.
pub const DEFAULT_THRESHOLD: f64 = 0.4;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Resource {
        path: PathBuf,
        source: NormalizeError,
    },
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

/// Weights, threshold and resource tables for one build.
///
/// The raw text of every resource is kept so that the fingerprint covers
/// the exact tables in use.
#[derive(Debug, Clone)]
pub struct Config {
    pub weights: Weights,
    pub threshold: f64,
    pub stoplists: Stoplists,
    pub hebrew: RomanizationTable,
    pub arabic: RomanizationTable,
    pub dictionaries: BTreeMap<Lang, LemmaDictionary>,
    pub labels: LabelTable,
    sources: BTreeMap<String, String>,
}

impl Default for Config {
    fn default() -> Self {
        let sources = [
            ("dictionary.es", resources::LEMMAS_ES),
            ("labels", resources::LABELS_FR),
            ("stoplist.en", resources::STOP_EN),
            ("stoplist.es", resources::STOP_ES),
            ("stoplist.fr", resources::STOP_FR),
            ("table.arabic", resources::ROMAN_AR),
            ("table.hebrew", resources::ROMAN_HE),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        Config {
            weights: Weights::default(),
            threshold: DEFAULT_THRESHOLD,
            stoplists: Stoplists::shipped(),
            hebrew: RomanizationTable::shipped(Script::Hebrew),
            arabic: RomanizationTable::shipped(Script::Arabic),
            dictionaries: BTreeMap::from([(Lang::Es, LemmaDictionary::shipped_spanish())]),
            labels: LabelTable::shipped(),
            sources,
        }
    }
}

impl Config {
    /// Reads a `key = value` file. Relative resource paths resolve against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Starts from the shipped defaults and applies each setting in turn.
    ///
    /// Recognized keys: `weights` (`kw,les,lem,str`), `weights.keyword`,
    /// `weights.lesson`, `weights.lemma`, `weights.structure`, `threshold`,
    /// `stoplist.<lang>`, `dictionary.<lang>`, `table.hebrew`,
    /// `table.arabic`, `labels`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut config = Config::default();
        let mut parts = Component::ALL.map(|c| config.weights.get(c));
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    message: format!("expected `key = value`, found `{line}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let number = || {
                value.parse::<f64>().map_err(|e| ConfigError::Syntax {
                    line: line_no,
                    message: format!("`{key}`: {e}"),
                })
            };
            match key {
                "weights" => {
                    let w: Weights = value.parse()?;
                    parts = Component::ALL.map(|c| w.get(c));
                }
                "weights.keyword" => parts[0] = number()?,
                "weights.lesson" => parts[1] = number()?,
                "weights.lemma" => parts[2] = number()?,
                "weights.structure" => parts[3] = number()?,
                "threshold" => {
                    let t = number()?;
                    check_threshold(t)?;
                    config.threshold = t;
                }
                "labels" => {
                    let (path, src) = read_resource(base, value)?;
                    config.labels = LabelTable::load(src.as_bytes())
                        .map_err(|source| ConfigError::Resource { path, source })?;
                    config.sources.insert(key.to_string(), src);
                }
                "table.hebrew" | "table.arabic" => {
                    let script = if key == "table.hebrew" {
                        Script::Hebrew
                    } else {
                        Script::Arabic
                    };
                    let (path, src) = read_resource(base, value)?;
                    let table = RomanizationTable::load(script, src.as_bytes())
                        .map_err(|source| ConfigError::Resource { path, source })?;
                    match script {
                        Script::Hebrew => config.hebrew = table,
                        Script::Arabic => config.arabic = table,
                    }
                    config.sources.insert(key.to_string(), src);
                }
                _ => {
                    let lang_key = key
                        .strip_prefix("stoplist.")
                        .map(|l| (true, l))
                        .or_else(|| key.strip_prefix("dictionary.").map(|l| (false, l)));
                    let Some((is_stoplist, lang)) = lang_key else {
                        return Err(ConfigError::UnknownKey {
                            line: line_no,
                            key: key.to_string(),
                        });
                    };
                    let lang: Lang = lang.parse().map_err(|_| ConfigError::Syntax {
                        line: line_no,
                        message: format!("bad language in `{key}`"),
                    })?;
                    let (path, src) = read_resource(base, value)?;
                    let wrap = |source| ConfigError::Resource {
                        path: path.clone(),
                        source,
                    };
                    if is_stoplist {
                        config.stoplists.load(lang, src.as_bytes()).map_err(wrap)?;
                    } else {
                        let dict =
                            LemmaDictionary::load(lang.clone(), src.as_bytes()).map_err(wrap)?;
                        config.dictionaries.insert(lang, dict);
                    }
                    config.sources.insert(key.to_string(), src);
                }
            }
        }
        config.weights = Weights::new(parts[0], parts[1], parts[2], parts[3])?;
        Ok(config)
    }

    pub fn engine(&self) -> SimilarityEngine {
        SimilarityEngine::new(self.stoplists.clone(), self.labels.clone(), self.weights)
    }

    pub fn table(&self, script: Script) -> &RomanizationTable {
        match script {
            Script::Hebrew => &self.hebrew,
            Script::Arabic => &self.arabic,
        }
    }

    /// SHA-256 over weights, threshold and the content of every resource,
    /// as lowercase hex.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!(
            "weights={}\nthreshold={}\n",
            self.weights, self.threshold
        ));
        for (key, content) in &self.sources {
            h.update(format!("{key}\t{}\n", hex::encode(Sha256::digest(content))));
        }
        hex::encode(h.finalize())
    }
}

fn read_resource(base: &Path, value: &str) -> Result<(PathBuf, String), ConfigError> {
    let path = base.join(value);
    let text = fs::read_to_string(&path).map_err(|source| ConfigError::Io {
        path: path.clone(),
        source,
    })?;
    Ok((path, text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_use_shipped_resources() {
        let c = Config::default();
        assert_eq!(c.weights, Weights::default());
        assert_eq!(c.threshold, DEFAULT_THRESHOLD);
        assert!(c.dictionaries[&Lang::Es].lookup("sodes").is_some());
        assert_eq!(c.fingerprint(), Config::default().fingerprint());
    }

    #[test]
    fn parses_settings_and_paths() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("stop.txt"), "the\nof\n").unwrap();
        fs::write(dir.path().join("dict.tsv"), "fuit\tsum\n").unwrap();
        let text = "# comment\nweights = 1,0,0,0\nweights.structure = 0.5\nthreshold=0.25\n\
                    stoplist.en = stop.txt\ndictionary.la = dict.tsv\n";
        let c = Config::parse(text, dir.path()).unwrap();
        assert_eq!(c.weights.get(Component::Keyword), 1.0);
        assert_eq!(c.weights.get(Component::Structure), 0.5);
        assert_eq!(c.threshold, 0.25);
        assert_eq!(c.stoplists.get(&Lang::En).unwrap().len(), 2);
        assert_eq!(c.dictionaries[&Lang::La].lookup("fuit"), Some("sum"));
        assert_ne!(c.fingerprint(), Config::default().fingerprint());
    }

    #[test]
    fn fingerprint_tracks_weights() {
        let a = Config::parse("weights = 0.4,0.3,0.2,0.1", Path::new(".")).unwrap();
        let b = Config::parse("weights = 0.5,0.3,0.2,0.1", Path::new(".")).unwrap();
        assert_eq!(a.fingerprint(), Config::default().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn rejects_bad_input() {
        let base = Path::new(".");
        assert!(matches!(
            Config::parse("colour = blue", base),
            Err(ConfigError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            Config::parse("\nthreshold", base),
            Err(ConfigError::Syntax { line: 2, .. })
        ));
        assert!(Config::parse("threshold = 0", base).is_err());
        assert!(Config::parse("weights = 0,0,0,0", base).is_err());
        assert!(matches!(
            Config::parse("labels = /nonexistent/labels.tsv", base),
            Err(ConfigError::Io { .. })
        ));
    }
}
