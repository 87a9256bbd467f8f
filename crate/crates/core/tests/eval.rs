use fixline_core::compiler::MockCompiler;
use fixline_core::corpus::mine_corpus;
use fixline_core::eval::{evaluate, gold_round_trip, EvalOptions, KS};
use fixline_core::model::{ModelBundle, ModelConfig};
use fixline_core::synth::fixture_corpus;

fn trained(n: usize, seed: u64) -> (ModelBundle, Vec<fixline_core::corpus::TrainPair>) {
    let pairs = fixture_corpus(n, seed);
    let mined = mine_corpus(&pairs);
    assert_eq!(mined.dropped, 0);
    let (b, _) = ModelBundle::train(&mined.pairs, &ModelConfig::with_seed(seed)).unwrap();
    (b, pairs)
}

#[test]
fn memorizes_tiny_corpus() {
    let (b, pairs) = trained(150, 21);
    let (r, _) = evaluate(&b, &pairs, &MockCompiler::default(), &EvalOptions::default()).unwrap();
    assert_eq!(r.zero_shot, 0);
    assert!(r.pred_at[&1] >= 0.9, "{}", r.pred_at[&1]);
}

#[test]
fn rates_are_monotone_in_k() {
    let (b, _) = trained(150, 22);
    let test = fixture_corpus(80, 99);
    let (r, _) = evaluate(&b, &test, &MockCompiler::default(), &EvalOptions::default()).unwrap();
    for m in [&r.pred_at, &r.rep_at, &r.top_class_at, &r.top_error_at, &r.top_tokens_at] {
        let v: Vec<f64> = KS.iter().map(|k| m[k]).collect();
        assert!(v.windows(2).all(|w| w[0] <= w[1]), "{v:?}");
        assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
    }
    assert!((0.0..=1.0).contains(&r.map));
}

#[test]
fn reranking_does_not_lower_training_map() {
    let (b, pairs) = trained(150, 23);
    let mock = MockCompiler::default();
    let (on, _) = evaluate(&b, &pairs, &mock, &EvalOptions::default()).unwrap();
    let (off, _) = evaluate(&b, &pairs, &mock, &EvalOptions { rerank: false, ..Default::default() }).unwrap();
    assert!(on.map >= off.map, "{} < {}", on.map, off.map);
}

#[test]
fn gold_class_and_profile_match_round_trip() {
    let (b, _) = trained(120, 24);
    let test = fixture_corpus(120, 7);
    let mock = MockCompiler::default();
    let opts = EvalOptions { rerank: true, gold_class: true, gold_profile: true };
    let (r, cases) = evaluate(&b, &test, &mock, &opts).unwrap();
    let trips: Vec<bool> =
        test.iter().enumerate().filter_map(|(i, p)| gold_round_trip(i, p, &mock).unwrap()).map(|t| t.hit).collect();
    assert_eq!(trips.len(), cases.len());
    let rate = trips.iter().filter(|&&h| h).count() as f64 / trips.len() as f64;
    assert!((r.pred_at[&1] - rate).abs() < 1e-12, "{} vs {rate}", r.pred_at[&1]);
    for (c, hit) in cases.iter().zip(&trips) {
        assert_eq!(c.pred[0], *hit, "{}", c.label);
    }
}

#[test]
fn report_is_deterministic() {
    let mock = MockCompiler::default();
    let test = fixture_corpus(60, 5);
    let (b1, _) = trained(100, 25);
    let (b2, _) = trained(100, 25);
    let (r1, _) = evaluate(&b1, &test, &mock, &EvalOptions::default()).unwrap();
    let (r2, _) = evaluate(&b2, &test, &mock, &EvalOptions::default()).unwrap();
    assert_eq!(r1.stable_json(), r2.stable_json());
}

#[test]
fn bundle_survives_save_and_load() {
    let (b, _) = trained(100, 26);
    let dir = tempfile::tempdir().unwrap();
    b.save(dir.path()).unwrap();
    let loaded = ModelBundle::load(dir.path()).unwrap();
    let test = fixture_corpus(40, 8);
    let mock = MockCompiler::default();
    let (r1, _) = evaluate(&b, &test, &mock, &EvalOptions::default()).unwrap();
    let (r2, _) = evaluate(&loaded, &test, &mock, &EvalOptions::default()).unwrap();
    assert_eq!(r1.stable_json(), r2.stable_json());
}
