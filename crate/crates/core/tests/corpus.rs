mod common;

use paremia::index::{
    build_index, BuildError, BuildOptions, Config, CorpusIndex, QueryError, QueryFilter, Source,
};
use paremia::posterity::{transmission_chains, Strictness};
use paremia::similarity::Weights;
use paremia::{CompletenessProfile, Lang, Root};

fn filter(pairs: &[(&str, &str)]) -> QueryFilter {
    let mut f = QueryFilter::default();
    for (k, v) in pairs {
        f.set(k, v).unwrap();
    }
    f
}

#[test]
fn five_paper_units_are_indexed() {
    let index = common::paper_index();
    assert_eq!(index.version, "1");
    assert_eq!(
        index.unit_ids().collect::<Vec<_>>(),
        vec!["ar:1", "es1:1", "es2:1", "he:1", "la:1"]
    );
    assert_eq!(index.metadata.len(), 5);
    let langs: Vec<_> = index.units.iter().map(|u| u.source_lang.clone()).collect();
    assert_eq!(
        langs,
        vec![
            Some(Lang::Ar),
            Some(Lang::Es),
            Some(Lang::Es),
            Some(Lang::He),
            Some(Lang::La)
        ]
    );
    assert_eq!(
        index.derived["he:1"].romanized.as_deref(),
        Some("whyyt nkbd whynk shpl")
    );
    assert_eq!(index.derived["es1:1"].romanized, None);
}

#[test]
fn stored_markup_reparses_to_the_source_container() {
    let index = common::paper_index();
    let containers = index.containers().unwrap();
    let es1 = &containers[1];
    assert_eq!(es1.entities().len(), 18);
    assert_eq!(es1.work_ref(), Some("es1"));
    assert_eq!(
        es1.get_entity(Root::Lem, Some(&Lang::Es)),
        Some("y antes ser muy alto ahora ser muy bajo")
    );
    // the annotated container lacks only the Spanish literal translation
    assert_eq!(
        es1.missing_required(&CompletenessProfile::default()),
        vec![(Root::Sl, Lang::Es)]
    );
}

#[test]
fn empty_source_set_gives_an_empty_index() {
    let out = build_index(vec![], vec![], &Config::default(), BuildOptions::default()).unwrap();
    assert!(out.index.units.is_empty());
    let json = out.index.to_json().unwrap();
    assert_eq!(CorpusIndex::from_json(&json).unwrap(), out.index);
}

#[test]
fn duplicated_unit_names_both_ids() {
    let mut sources = paremia::index::read_sources(&common::corpus_paths()).unwrap();
    sources.push(Source {
        path: "zz.xml".into(),
        work_id: "zz".into(),
        text: "<pr.all><pr>QUANTO fue alta la su sobida  tanto fue mas baxa la su cayda.</pr></pr.all>"
            .into(),
    });
    let err = build_index(
        sources,
        common::metadata(),
        &Config::default(),
        BuildOptions::default(),
    )
    .unwrap_err();
    match err {
        BuildError::UniquenessViolation(r) => {
            assert_eq!(r.groups.len(), 1);
            assert_eq!(r.groups[0].ids, vec!["es2:1", "zz:1"]);
        }
        other => panic!("unexpected error: {other}"),
    }
}

#[test]
fn parse_errors_carry_file_and_line() {
    let sources = vec![Source {
        path: "broken.xml".into(),
        work_id: "broken".into(),
        text: "<pr.all>\n<pr>x</pr>\n<bogus>y</bogus>\n</pr.all>\n".into(),
    }];
    let err =
        build_index(sources, vec![], &Config::default(), BuildOptions::default()).unwrap_err();
    let BuildError::Parse(errors) = &err else {
        panic!("unexpected error: {err}");
    };
    assert_eq!((errors[0].file.as_str(), errors[0].line), ("broken.xml", 3));
    assert!(err.to_string().contains("broken.xml:3:"));
}

#[test]
fn keyword_ser_finds_the_spanish_units() {
    let index = common::paper_index();
    let hits = index.query(&filter(&[("keyword", "ser"), ("lang", "es")]));
    assert!(hits.contains(&"es1:1".to_string()));
    assert_eq!(hits, vec!["es1:1", "es2:1"]);
}

#[test]
fn query_examples() {
    let index = common::paper_index();
    assert_eq!(index.query(&QueryFilter::default()).len(), 5);
    assert!(index
        .query(&filter(&[("from", "1500"), ("to", "1600")]))
        .is_empty());
    assert_eq!(
        index.query(&filter(&[("from", "1040"), ("to", "1100")])),
        vec!["ar:1"]
    );
    assert_eq!(index.query(&filter(&[("work", "la")])), vec!["la:1"]);
    assert_eq!(index.query(&filter(&[("keyword", "might")])).len(), 5);
    assert_eq!(index.query(&filter(&[("degree", "established")])).len(), 0);
    assert_eq!(
        QueryFilter::default().set("century", "XIII"),
        Err(QueryError::UnknownFilterField("century".into()))
    );
}

#[test]
fn posterity_on_paper_corpus() {
    let index = common::paper_index();
    let edges = index
        .posterity(0.4, Strictness::Strict, &Weights::default())
        .unwrap();
    // the Arabic work precedes every other work
    for to in ["es1:1", "es2:1", "he:1", "la:1"] {
        assert!(edges.iter().any(|e| e.from_id == "ar:1" && e.to_id == to));
    }
    // thirteenth-century works overlap, so none precedes another
    assert!(!edges.iter().any(|e| matches!(
        (e.from_id.as_str(), e.to_id.as_str()),
        ("he:1", "la:1") | ("la:1", "he:1") | ("es1:1", "he:1")
    )));
    let chains = transmission_chains(&edges, "ar:1", 3).unwrap();
    assert!(chains.contains(&vec!["ar:1".to_string(), "la:1".into(), "es2:1".into()]));
    let mut sorted = chains.clone();
    sorted.sort();
    assert_eq!(chains, sorted);
}

#[test]
fn config_weights_change_scores_not_artifacts() {
    let paths = common::corpus_paths();
    let sources = || paremia::index::read_sources(&paths).unwrap();
    let custom = Config::parse(
        "weights = 0,1,0,0\nthreshold = 0.9",
        std::path::Path::new("."),
    )
    .unwrap();
    let a = build_index(
        sources(),
        common::metadata(),
        &Config::default(),
        BuildOptions::default(),
    )
    .unwrap()
    .index;
    let b = build_index(
        sources(),
        common::metadata(),
        &custom,
        BuildOptions::default(),
    )
    .unwrap()
    .index;
    assert_eq!(a.derived, b.derived);
    assert_ne!(a.config_fingerprint, b.config_fingerprint);
}
