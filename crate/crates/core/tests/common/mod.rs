#![allow(dead_code)]

use std::fs::File;
use std::path::PathBuf;

use paremia::index::{build_index, read_sources, BuildOptions, Config, CorpusIndex};
use paremia::posterity::{load_metadata, WorkMetadata};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).expect("fixture is readable")
}

/// The five-unit corpus, one file per work, in path order.
pub fn corpus_paths() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixture("corpus"))
        .expect("corpus directory")
        .map(|e| e.expect("directory entry").path())
        .collect();
    paths.sort();
    paths
}

pub fn metadata() -> Vec<WorkMetadata> {
    let file = File::open(fixture("metadata.json")).expect("metadata fixture");
    load_metadata(file)
        .expect("metadata parses")
        .into_values()
        .collect()
}

pub fn corpus_index(paths: &[PathBuf], parallel: bool) -> CorpusIndex {
    let options = BuildOptions {
        parallel,
        ..Default::default()
    };
    build_index(
        read_sources(paths).expect("sources readable"),
        metadata(),
        &Config::default(),
        options,
    )
    .expect("fixture corpus builds")
    .index
}

pub fn paper_index() -> CorpusIndex {
    corpus_index(&corpus_paths(), true)
}
