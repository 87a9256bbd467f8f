//! Metric suite: Pred@k, Rep@k, class Top@k, MAP, localization Hamming
//! loss, per-class hit tables and the line-deletion baseline.

pub mod kali;
pub mod report;

use crate::compiler::{BridgeError, Compiler};
use crate::corpus::{mine_pair, TrainPair};
use crate::engine::{
    apply_class, attempt_line, candidate_lines, flagged_occurrences, try_class, GoldHints, RepairOptions,
    RepairSuggestion,
};
use crate::lang::{abstract_program_line, build_symbol_table};
use crate::localizer::hamming_loss;
use crate::model::ModelBundle;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

pub const KS: [usize; 3] = [1, 3, 5];
/// Classes ranked below this are torso, at or below `TORSO_END` tail.
pub const HEAD_END: usize = 60;
pub const TORSO_END: usize = 120;

/// Hit iff one of the suggestions ranked within `k` matches the abstract
/// target line exactly.
pub fn pred_hit<S: AsRef<str>>(suggestions: &[RepairSuggestion], target: &[S], k: usize) -> bool {
    suggestions.iter().any(|s| {
        s.rank <= k
            && s.abstract_tags().len() == target.len()
            && s.abstract_tags().iter().zip(target).all(|(a, b)| *a == b.as_ref())
    })
}

/// Hit iff one of the suggestions ranked within `k` left no errors.
pub fn rep_hit(suggestions: &[RepairSuggestion], k: usize) -> bool {
    suggestions.iter().any(|s| s.rank <= k && s.compiled)
}

/// 1/rank of the gold class, 0 when it is not ranked at all.
pub fn reciprocal_rank(ranked: &[usize], gold: Option<usize>) -> f64 {
    gold.and_then(|g| ranked.iter().position(|&c| c == g)).map_or(0.0, |p| 1.0 / (p + 1) as f64)
}

pub fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for x in xs {
        sum += x;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub rerank: bool,
    pub gold_class: bool,
    pub gold_profile: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { rerank: true, gold_class: false, gold_profile: false }
    }
}

/// Everything measured on one test pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub label: String,
    /// Catalog id of the mined class, None when zero-shot.
    pub class: Option<usize>,
    pub pred: Vec<bool>,
    pub rep: Vec<bool>,
    pub top_class: Vec<bool>,
    pub top_error: Vec<bool>,
    pub top_tokens: Vec<bool>,
    pub reciprocal_rank: f64,
    /// Localization loss of the gold class at the gold line.
    pub hamming: Option<usize>,
    pub kali_rep: bool,
    pub kali_pred: bool,
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub name: String,
    pub classes: usize,
    pub cases: usize,
    pub pred1: f64,
    pub rep5: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub class: usize,
    pub key: String,
    pub train_count: usize,
    pub cases: usize,
    pub pred1: f64,
    pub rep5: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub train_seconds: Option<f64>,
    pub mean_predict_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub options: EvalOptions,
    pub cases: usize,
    /// Pairs that could not be mined.
    pub skipped: usize,
    pub zero_shot: usize,
    pub pred_at: BTreeMap<usize, f64>,
    pub rep_at: BTreeMap<usize, f64>,
    pub top_class_at: BTreeMap<usize, f64>,
    pub top_error_at: BTreeMap<usize, f64>,
    pub top_tokens_at: BTreeMap<usize, f64>,
    pub map: f64,
    pub mean_hamming: f64,
    pub kali_rep: f64,
    pub kali_pred1: f64,
    pub strata: Vec<Stratum>,
    pub per_class: Vec<ClassRow>,
    /// Wall-clock numbers; left out of determinism comparisons.
    pub timing: Option<Timing>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON without the timing section.
    pub fn stable_json(&self) -> String {
        let mut r = self.clone();
        r.timing = None;
        r.to_json()
    }
}

fn rate(cases: &[&CaseResult], f: impl Fn(&CaseResult) -> bool) -> f64 {
    mean(cases.iter().map(|c| f(c) as u8 as f64))
}

fn at_k(cases: &[&CaseResult], f: impl Fn(&CaseResult) -> &Vec<bool>) -> BTreeMap<usize, f64> {
    KS.iter().enumerate().map(|(i, &k)| (k, rate(cases, |c| f(c)[i]))).collect()
}

/// The mined class and profile applied back to the source line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrip {
    /// The suggestion the engine would make equals the abstract target.
    pub hit: bool,
    /// Some candidate equals the abstract target.
    pub any_candidate: bool,
    /// Every flagged bigram type occurs exactly once in the line.
    pub unambiguous: bool,
}

/// Gold round trip for one pair; None when the pair cannot be mined.
pub fn gold_round_trip(
    index: usize,
    pair: &TrainPair,
    compiler: &dyn Compiler,
) -> Result<Option<RoundTrip>, BridgeError> {
    let Ok(mined) = mine_pair(index, pair) else { return Ok(None) };
    let program = pair.source_lines();
    let table = build_symbol_table(&program);
    let Ok(abs) = abstract_program_line(&program, &table, mined.line) else { return Ok(None) };
    let errors = compiler.error_count(&program)?;
    let trial = try_class(&program, &abs, &table, &mined.key, &mined.profile, errors, compiler)?;
    let hit = trial.is_some_and(|t| t.suggestion.abstract_tags() == mined.target);
    let any_candidate = apply_class(&abs.tokens, &mined.key, &mined.profile).iter().any(|c| c.tags() == mined.target);
    let unambiguous = flagged_occurrences(&abs.tokens, &mined.profile).len() == mined.profile.len();
    Ok(Some(RoundTrip { hit, any_candidate, unambiguous }))
}

/// Evaluates one pair. The line is repaired twice: once at the gold line
/// (with gold hints if asked) for Pred@k, once from the compiler's
/// diagnostics for Rep@k.
pub fn evaluate_case(
    index: usize,
    pair: &TrainPair,
    bundle: &ModelBundle,
    compiler: &dyn Compiler,
    opts: &EvalOptions,
) -> Result<Option<CaseResult>, BridgeError> {
    let Ok(mined) = mine_pair(index, pair) else { return Ok(None) };
    let start = Instant::now();
    let program = pair.source_lines();
    let diags = compiler.compile(&program)?;
    let kmax = *KS.last().unwrap();
    let class = bundle.catalog.id_of(&mined.key);
    let tags = mined.source_tags();
    let x = bundle.features(&tags, &mined.error_id);

    let ranked: Vec<usize> = bundle.rank(&x, opts.rerank).into_iter().map(|r| r.class).collect();
    let top = |k: usize, f: &dyn Fn(usize) -> bool| ranked.iter().take(k).any(|&c| f(c));
    let key_of = |c: usize| &bundle.catalog.get(c).expect("ranked ids are in the catalog").key;
    let top_class = KS.iter().map(|&k| top(k, &|c| Some(c) == class)).collect();
    let top_error = KS.iter().map(|&k| top(k, &|c| key_of(c).error_id == mined.key.error_id)).collect();
    let top_tokens = KS
        .iter()
        .map(|&k| {
            top(k, &|c| key_of(c).deletions == mined.key.deletions && key_of(c).insertions == mined.key.insertions)
        })
        .collect();
    let hamming = class.map(|c| hamming_loss(&bundle.localize(c, &x, &tags), &mined.profile));

    let gold = GoldHints {
        class: opts.gold_class.then(|| mined.key.clone()),
        profile: opts.gold_profile.then(|| (mined.line, mined.profile.clone())),
    };
    let pred_opts = RepairOptions { k: kmax, rerank: opts.rerank, gold, exhaustive: true };
    let at_gold = attempt_line(&program, mined.line, &mined.error_id, diags.len(), bundle, compiler, &pred_opts)?;
    let pred = KS.iter().map(|&k| pred_hit(&at_gold.suggestions, &mined.target, k)).collect();

    let rep_opts = RepairOptions { k: kmax, rerank: opts.rerank, gold: GoldHints::default(), exhaustive: true };
    let mut suggestions = Vec::new();
    for (line, err) in candidate_lines(&diags, program.len()) {
        let a = attempt_line(&program, line, &err, diags.len(), bundle, compiler, &rep_opts)?;
        suggestions.extend(a.suggestions);
        if rep_hit(&suggestions, 1) {
            break;
        }
    }
    let rep = KS.iter().map(|&k| rep_hit(&suggestions, k)).collect();
    let seconds = start.elapsed().as_secs_f64();

    let k = kali::kali(&program, &diags, compiler)?;
    let kali_pred = k.deleted.contains(&mined.line) && mined.target.is_empty();

    Ok(Some(CaseResult {
        label: pair.label(index),
        class,
        pred,
        rep,
        top_class,
        top_error,
        top_tokens,
        reciprocal_rank: reciprocal_rank(&ranked, class),
        hamming,
        kali_rep: k.repaired,
        kali_pred,
        seconds,
    }))
}

/// Evaluates every pair in parallel and reduces in input order.
pub fn evaluate(
    bundle: &ModelBundle,
    pairs: &[TrainPair],
    compiler: &dyn Compiler,
    opts: &EvalOptions,
) -> Result<(EvalReport, Vec<CaseResult>), BridgeError> {
    let results: Vec<Option<CaseResult>> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, p)| evaluate_case(i, p, bundle, compiler, opts))
        .collect::<Result<_, _>>()?;
    let skipped = results.iter().filter(|r| r.is_none()).count();
    let cases: Vec<CaseResult> = results.into_iter().flatten().collect();
    Ok((summarize(bundle, &cases, opts, skipped), cases))
}

pub fn summarize(bundle: &ModelBundle, cases: &[CaseResult], opts: &EvalOptions, skipped: usize) -> EvalReport {
    let all: Vec<&CaseResult> = cases.iter().collect();
    let counts = bundle.catalog.counts();
    let mut by_class: BTreeMap<usize, Vec<&CaseResult>> = BTreeMap::new();
    for c in cases {
        if let Some(id) = c.class {
            by_class.entry(id).or_default().push(c);
        }
    }
    let per_class = by_class
        .iter()
        .map(|(&id, cs)| ClassRow {
            class: id,
            key: bundle.catalog.get(id).map(|c| c.key.to_string()).unwrap_or_default(),
            train_count: counts.get(id).copied().unwrap_or(0),
            cases: cs.len(),
            pred1: rate(cs, |c| c.pred[0]),
            rep5: rate(cs, |c| c.rep[2]),
        })
        .collect();
    // catalog ids are popularity ranks
    type Band = Box<dyn Fn(Option<usize>) -> bool>;
    let bands: [(&str, Band); 4] = [
        ("head", Box::new(|c| c.is_some_and(|c| c < HEAD_END))),
        ("torso", Box::new(|c| c.is_some_and(|c| (HEAD_END..TORSO_END).contains(&c)))),
        ("tail", Box::new(|c| c.is_some_and(|c| c >= TORSO_END))),
        ("zero-shot", Box::new(|c| c.is_none())),
    ];
    let strata = bands
        .iter()
        .map(|(name, f)| {
            let cs: Vec<&CaseResult> = cases.iter().filter(|c| f(c.class)).collect();
            let classes = cs.iter().filter_map(|c| c.class).collect::<std::collections::BTreeSet<_>>().len();
            Stratum {
                name: name.to_string(),
                classes,
                cases: cs.len(),
                pred1: rate(&cs, |c| c.pred[0]),
                rep5: rate(&cs, |c| c.rep[2]),
            }
        })
        .collect();
    let hams: Vec<f64> = cases.iter().filter_map(|c| c.hamming).map(|h| h as f64).collect();
    EvalReport {
        options: opts.clone(),
        cases: cases.len(),
        skipped,
        zero_shot: cases.iter().filter(|c| c.class.is_none()).count(),
        pred_at: at_k(&all, |c| &c.pred),
        rep_at: at_k(&all, |c| &c.rep),
        top_class_at: at_k(&all, |c| &c.top_class),
        top_error_at: at_k(&all, |c| &c.top_error),
        top_tokens_at: at_k(&all, |c| &c.top_tokens),
        map: mean(cases.iter().map(|c| c.reciprocal_rank)),
        mean_hamming: mean(hams),
        kali_rep: rate(&all, |c| c.kali_rep),
        kali_pred1: rate(&all, |c| c.kali_pred),
        strata,
        per_class,
        timing: Some(Timing { train_seconds: None, mean_predict_seconds: mean(cases.iter().map(|c| c.seconds)) }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sugg(rank: usize, fix: &str, compiled: bool) -> RepairSuggestion {
        RepairSuggestion {
            line: 0,
            rank,
            class: Some(rank),
            abstract_fix: fix.into(),
            concrete_fix: None,
            compiled,
            errors_after: None,
            accepted: compiled,
        }
    }

    #[test]
    fn pred_at_k_examples() {
        let target = ["VARIABLE_INT", "=", "LITERAL_INT", ";"];
        let s = vec![sugg(1, "VARIABLE_INT = LITERAL_INT ;", true)];
        assert!(pred_hit(&s, &target, 1));
        let s = vec![
            sugg(1, "VARIABLE_INT ;", false),
            sugg(2, "VARIABLE_INT = ;", false),
            sugg(3, "= ;", false),
            sugg(4, "VARIABLE_INT = LITERAL_INT ;", false),
        ];
        assert!(!pred_hit(&s, &target, 3));
        assert!(pred_hit(&s, &target, 5));
    }

    #[test]
    fn compiling_but_different_is_rep_not_pred() {
        let target = ["VARIABLE_INT", "=", "LITERAL_INT", ";"];
        let s = vec![sugg(1, "VARIABLE_INT = VARIABLE_INT ;", true)];
        assert!(!pred_hit(&s, &target, 1));
        assert!(rep_hit(&s, 1));
    }

    #[test]
    fn rep_at_k_examples() {
        let s = vec![sugg(1, "a", false), sugg(2, "b", false), sugg(3, "c", false), sugg(4, "d", true)];
        assert!(!rep_hit(&s, 3));
        assert!(rep_hit(&s, 5));
        assert!(!rep_hit(&[], 5));
    }

    #[test]
    fn map_examples() {
        assert_eq!(mean([reciprocal_rank(&[3, 1], Some(3)), reciprocal_rank(&[0, 3], Some(3))]), 0.75);
        assert_eq!(reciprocal_rank(&[1, 2], Some(1)), 1.0);
        assert_eq!(reciprocal_rank(&[1, 2], Some(9)), 0.0);
        assert_eq!(reciprocal_rank(&[1, 2], None), 0.0);
    }
}
