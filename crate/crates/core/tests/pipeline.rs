mod common;

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lmstats::lm::sample_document;
use lmstats::report::to_json;
use lmstats::{
    analyze, compare, generate_corpus, load_corpus, AnalyzeConfig, CompareConfig, Corpus, ErrorKind, IngestOptions,
    SamplerConfig, Scheme, StopwordSet, TrigramModel,
};

fn write_temp(text: &str) -> tempfile::NamedTempFile {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(text.as_bytes()).unwrap();
    file
}

#[test]
fn analyze_corpus_loaded_from_disk() {
    let lines = common::wiki_lines();
    let file = write_temp(&lines[..400].join("\n"));
    let corpus = load_corpus(file.path(), &IngestOptions::default()).unwrap();
    assert_eq!(corpus.len(), 400);

    let out = analyze(&corpus, &StopwordSet::english(), &AnalyzeConfig::default()).unwrap();
    let names: Vec<&str> = out.files.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "rank_frequency.csv",
            "type_token_unigram.csv",
            "type_token_bigram.csv",
            "length_distribution.csv",
            "fractions.csv"
        ]
    );
    let s = out.report.zipf.parameters["s"];
    assert!(s > 0.5 && s < 2.0, "s = {s}");
    let heaps = out.report.heaps_unigram.as_ref().expect("natural text has a Heaps fit");
    let beta = heaps.parameters["beta"];
    assert!(beta > 0.5 && beta < 1.0, "beta = {beta}");

    let json: serde_json::Value = serde_json::from_str(&to_json(&out.report).unwrap()).unwrap();
    assert_eq!(json["corpus"]["documents"], 400);
}

#[test]
fn reports_are_reproducible() {
    let a = common::wiki_corpus(300);
    let b = common::wiki_corpus(600);
    let config = CompareConfig {
        mc_iters: 100,
        ..CompareConfig::default()
    };
    let stop = StopwordSet::english();
    let first = to_json(&compare(&a, &b, &stop, &config).unwrap().report).unwrap();
    let second = to_json(&compare(&a, &b, &stop, &config).unwrap().report).unwrap();
    assert_eq!(first, second);
}

#[test]
fn empty_input_is_an_error() {
    let file = write_temp("\n   \n\n");
    let corpus = load_corpus(file.path(), &IngestOptions::default()).unwrap();
    let err = analyze(&corpus, &StopwordSet::english(), &AnalyzeConfig::default()).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Data);
}

#[test]
fn model_file_round_trip_preserves_sampling() {
    let corpus = common::wiki_corpus(500);
    let model = TrigramModel::train(&corpus).unwrap();
    let file = write_temp(&model.to_json().unwrap());
    let loaded = TrigramModel::load(file.path()).unwrap();
    assert_eq!(loaded, model);

    for scheme in [Scheme::Random, Scheme::Nucleus, Scheme::Beam] {
        let config = SamplerConfig {
            scheme,
            seed: 9,
            ..SamplerConfig::default()
        };
        let a = generate_corpus(&model, &config, 20).unwrap();
        let b = generate_corpus(&loaded, &config, 20).unwrap();
        assert_eq!(a.corpus.to_text(), b.corpus.to_text());
    }
}

#[test]
fn beam_prefers_the_likely_branch() {
    // after "go", "home" ends the document with probability 0.7
    let mut lines = vec!["go home"; 7];
    lines.extend(["go far away now"; 3]);
    let corpus = Corpus::from_lines(lines, &IngestOptions::default());
    let model = TrigramModel::train(&corpus).unwrap();

    let short_share = |scheme: Scheme| {
        let config = SamplerConfig {
            scheme,
            beam_size: 5,
            ..SamplerConfig::default()
        };
        let hits = (0..400u64)
            .filter(|&seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                sample_document(&model, &config, &mut rng).unwrap().document.to_line() == "go home"
            })
            .count();
        hits as f64 / 400.0
    };
    let ancestral = short_share(Scheme::Random);
    let beam = short_share(Scheme::Beam);
    assert!((ancestral - 0.7).abs() < 0.08, "ancestral share {ancestral}");
    assert!(beam > 0.97, "beam share {beam}");
}

#[test]
fn generated_corpus_compares_against_its_source() {
    let source = common::wiki_corpus(1000);
    let model = TrigramModel::train(&source).unwrap();
    let generated = generate_corpus(
        &model,
        &SamplerConfig {
            seed: 3,
            ..SamplerConfig::default()
        },
        1000,
    )
    .unwrap();
    let config = CompareConfig {
        mc_iters: 100,
        ..CompareConfig::default()
    };
    let out = compare(&generated.corpus, &source, &StopwordSet::english(), &config).unwrap();
    assert!(!out.report.tests.is_empty());
    for row in &out.report.tests {
        assert!((0.0..=1.0).contains(&row.p_value), "{row:?}");
        assert!(row.statistic.is_finite(), "{row:?}");
    }
}
