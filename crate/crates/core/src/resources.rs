//! Resource files compiled into the crate. Each can be overridden at run
//! time by loading a file with the same format.

pub const LEMMAS_ES: &str = include_str!("../resources/lemmas.es.tsv");
pub const STOP_EN: &str = include_str!("../resources/stop.en.txt");
pub const STOP_FR: &str = include_str!("../resources/stop.fr.txt");
pub const STOP_ES: &str = include_str!("../resources/stop.es.txt");
pub const ROMAN_HE: &str = include_str!("../resources/roman.he.tsv");
pub const ROMAN_AR: &str = include_str!("../resources/roman.ar.tsv");
pub const LABELS_FR: &str = include_str!("../resources/labels.fr.tsv");
