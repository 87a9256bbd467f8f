//! Repair-line selection, class application, concretization and the
//! accept-if-errors-drop loop.

pub mod apply;

pub use apply::{apply_class, flagged_occurrences, Candidate};

use crate::compiler::{BridgeError, Compiler, Diagnostic};
use crate::corpus::{Bigram, ClassKey};
use crate::lang::{abstract_program_line, build_symbol_table, concretize_line, AbstractedLine, SymbolTable};
use crate::model::ModelBundle;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Upper bound on accepted substitutions per program.
pub const MAX_ROUNDS: usize = 32;

/// Reported lines and their neighbours, clipped and without repeats. Each
/// line carries the errorID of the diagnostic that first produced it.
pub fn candidate_lines(diagnostics: &[Diagnostic], n_lines: usize) -> Vec<(usize, String)> {
    let mut out: Vec<(usize, String)> = Vec::new();
    for d in diagnostics {
        let l = d.line as isize;
        for cand in [l, l - 1, l + 1] {
            if cand >= 0 && (cand as usize) < n_lines && !out.iter().any(|(x, _)| *x == cand as usize) {
                out.push((cand as usize, d.error_id.clone()));
            }
        }
    }
    out
}

/// Oracle inputs replacing model predictions.
#[derive(Debug, Clone, Default)]
pub struct GoldHints {
    /// Applied as the only class, whether or not the model knows it.
    pub class: Option<ClassKey>,
    /// Profile to use at the given line instead of the localizer's.
    pub profile: Option<(usize, BTreeSet<Bigram>)>,
}

#[derive(Debug, Clone)]
pub struct RepairOptions {
    pub k: usize,
    pub rerank: bool,
    pub gold: GoldHints,
    /// Keep trying lower-ranked classes after one is accepted.
    pub exhaustive: bool,
}

impl Default for RepairOptions {
    fn default() -> Self {
        RepairOptions { k: 5, rerank: true, gold: GoldHints::default(), exhaustive: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairSuggestion {
    pub line: usize,
    /// 1-based rank of the class used.
    pub rank: usize,
    /// Catalog id; None for a gold class the model never saw.
    pub class: Option<usize>,
    pub abstract_fix: String,
    pub concrete_fix: Option<String>,
    /// The program has no errors after substituting this line.
    pub compiled: bool,
    pub errors_after: Option<usize>,
    pub accepted: bool,
}

impl RepairSuggestion {
    pub fn abstract_tags(&self) -> Vec<&str> {
        self.abstract_fix.split_whitespace().collect()
    }
}

/// Suggestions at one line and the program after an accepted one.
#[derive(Debug, Clone)]
pub struct LineAttempt {
    pub suggestions: Vec<RepairSuggestion>,
    pub accepted: Option<Vec<String>>,
}

fn substitute(program: &[String], line: usize, text: String) -> Vec<String> {
    let mut out = program.to_vec();
    out[line] = text;
    out
}

/// Tries the top-`k` classes at `line`, one suggestion per class. Within a
/// class, candidates are compiled in order and the first one that lowers
/// the error count below `errors` is accepted.
pub fn attempt_line(
    program: &[String],
    line: usize,
    error_id: &str,
    errors: usize,
    bundle: &ModelBundle,
    compiler: &dyn Compiler,
    opts: &RepairOptions,
) -> Result<LineAttempt, BridgeError> {
    let mut out = LineAttempt { suggestions: Vec::new(), accepted: None };
    let table = build_symbol_table(program);
    let Ok(abs) = abstract_program_line(program, &table, line) else {
        return Ok(out);
    };
    let tags = abs.tags();
    let x = bundle.features(&tags, error_id);
    let classes: Vec<(Option<usize>, ClassKey)> = match &opts.gold.class {
        Some(key) => vec![(bundle.catalog.id_of(key), key.clone())],
        None => bundle
            .rank(&x, opts.rerank)
            .into_iter()
            .take(opts.k)
            .filter_map(|r| bundle.catalog.get(r.class).map(|c| (Some(r.class), c.key.clone())))
            .collect(),
    };
    for (r, (class, key)) in classes.into_iter().enumerate() {
        let profile = match (&opts.gold.profile, class) {
            (Some((l, p)), _) if *l == line => p.clone(),
            (_, Some(c)) => bundle.localize(c, &x, &tags),
            (_, None) => BTreeSet::new(),
        };
        let chosen = try_class(program, &abs, &table, &key, &profile, errors, compiler)?;
        let Some(ClassTrial { mut suggestion, fixed }) = chosen else { continue };
        suggestion.rank = r + 1;
        suggestion.class = class;
        let chosen = match fixed {
            Some(f) => Some((suggestion, f)),
            None => {
                out.suggestions.push(suggestion);
                None
            }
        };
        if let Some((s, fixed)) = chosen {
            out.suggestions.push(s);
            if out.accepted.is_none() {
                out.accepted = Some(fixed);
            }
            if !opts.exhaustive {
                break;
            }
        }
    }
    Ok(out)
}

/// The suggestion one class yields at a line, and the program it produces
/// when accepted.
#[derive(Debug, Clone)]
pub struct ClassTrial {
    pub suggestion: RepairSuggestion,
    pub fixed: Option<Vec<String>>,
}

/// Applies `key` at the flagged bigrams and compiles the candidates in
/// order, stopping at the first that compiles cleanly. Without one, the
/// first candidate that lowers the error count below `errors` is accepted;
/// failing that the first candidate is reported. None when the class yields
/// no candidate. Rank and class id are left for the caller.
pub fn try_class(
    program: &[String],
    abs: &AbstractedLine,
    table: &SymbolTable,
    key: &ClassKey,
    profile: &BTreeSet<Bigram>,
    errors: usize,
    compiler: &dyn Compiler,
) -> Result<Option<ClassTrial>, BridgeError> {
    let mut first: Option<RepairSuggestion> = None;
    let mut reducing: Option<ClassTrial> = None;
    for cand in apply_class(&abs.tokens, key, profile) {
        let mut s = RepairSuggestion {
            line: abs.line,
            rank: 1,
            class: None,
            abstract_fix: cand.tags().join(" "),
            concrete_fix: None,
            compiled: false,
            errors_after: None,
            accepted: false,
        };
        if let Ok(text) = concretize_line(&cand.tokens, abs, table) {
            let fixed = substitute(program, abs.line, text.clone());
            let n = compiler.error_count(&fixed)?;
            s.concrete_fix = Some(text);
            s.compiled = n == 0;
            s.errors_after = Some(n);
            if n < errors {
                s.accepted = true;
                if n == 0 {
                    return Ok(Some(ClassTrial { suggestion: s, fixed: Some(fixed) }));
                }
                if reducing.is_none() {
                    reducing = Some(ClassTrial { suggestion: s.clone(), fixed: Some(fixed) });
                }
                s.accepted = false;
            }
        }
        first.get_or_insert(s);
    }
    Ok(reducing.or(first.map(|suggestion| ClassTrial { suggestion, fixed: None })))
}

#[derive(Debug, Clone)]
pub struct RepairOutcome {
    pub program: Vec<String>,
    pub suggestions: Vec<RepairSuggestion>,
    pub initial_errors: usize,
    pub final_errors: usize,
}

/// Repairs a program line by line until no candidate lowers the error count.
pub fn repair_program(
    program: &[String],
    bundle: &ModelBundle,
    compiler: &dyn Compiler,
    opts: &RepairOptions,
) -> Result<RepairOutcome, BridgeError> {
    let mut current = program.to_vec();
    let mut diags = compiler.compile(&current)?;
    let initial_errors = diags.len();
    let mut suggestions = Vec::new();
    for _ in 0..MAX_ROUNDS {
        if diags.is_empty() {
            break;
        }
        let mut accepted = false;
        for (line, err) in candidate_lines(&diags, current.len()) {
            let attempt = attempt_line(&current, line, &err, diags.len(), bundle, compiler, opts)?;
            suggestions.extend(attempt.suggestions);
            if let Some(p) = attempt.accepted {
                current = p;
                diags = compiler.compile(&current)?;
                accepted = true;
                break;
            }
        }
        if !accepted {
            break;
        }
    }
    Ok(RepairOutcome { program: current, suggestions, initial_errors, final_errors: diags.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::MockCompiler;
    use crate::corpus::loader::split_lines as lines;
    use crate::corpus::{mine_corpus, TrainPair};
    use crate::model::ModelConfig;

    fn diag(line: usize) -> Diagnostic {
        Diagnostic { error_id: "E1".into(), line, message: String::new() }
    }

    #[test]
    fn candidate_line_order() {
        let ls = |v: Vec<(usize, String)>| v.into_iter().map(|x| x.0).collect::<Vec<_>>();
        assert_eq!(ls(candidate_lines(&[diag(3)], 10)), vec![3, 2, 4]);
        assert_eq!(ls(candidate_lines(&[diag(0)], 10)), vec![0, 1]);
        assert_eq!(ls(candidate_lines(&[diag(2), diag(3)], 10)), vec![2, 1, 3, 4]);
    }

    fn training() -> Vec<TrainPair> {
        let mut out = Vec::new();
        for (i, v) in ["a", "b", "c", "d", "e", "f"].iter().enumerate() {
            let body = format!("int main() {{\n    int {v}, n;\n    n = {i};\n    {v} = n + 1");
            out.push(TrainPair {
                id: None,
                source: format!("{body}\n    return 0;\n}}\n"),
                target: format!("{body};\n    return 0;\n}}\n"),
                error_id: "E1".into(),
                error_line: 3,
            });
            let head = format!("int main() {{\n    int {v};\n    {v} = {i};\n");
            out.push(TrainPair {
                id: None,
                source: format!("{head}    if ({v} > 1)) {v} = 0;\n    return 0;\n}}\n"),
                target: format!("{head}    if ({v} > 1) {v} = 0;\n    return 0;\n}}\n"),
                error_id: "E3".into(),
                error_line: 3,
            });
        }
        out
    }

    fn bundle() -> ModelBundle {
        let mined = mine_corpus(&training());
        assert_eq!(mined.dropped, 0);
        let mut c = ModelConfig::default();
        c.root.hidden = vec![16, 16];
        ModelBundle::train(&mined.pairs, &c).unwrap().0
    }

    #[test]
    fn closed_loop_single_error() {
        let b = bundle();
        let mock = MockCompiler::default();
        let prog = lines("int main() {\n    int total, k;\n    k = 2;\n    total = k * 3\n    return 0;\n}\n");
        assert_eq!(mock.error_count(&prog).unwrap(), 1);
        let out = repair_program(&prog, &b, &mock, &RepairOptions::default()).unwrap();
        assert_eq!(out.final_errors, 0);
        assert_eq!(out.program[3], "    total = k * 3;");
        let s = out.suggestions.iter().find(|s| s.accepted).unwrap();
        assert!(s.compiled);
        assert_eq!(s.rank, 1);
    }

    #[test]
    fn two_independent_errors() {
        let b = bundle();
        let mock = MockCompiler::default();
        let prog =
            lines("int main() {\n    int x, y;\n    x = 1\n    y = 2;\n    if (y > 1)) x = 0;\n    return 0;\n}\n");
        assert_eq!(mock.error_count(&prog).unwrap(), 2);
        let out = repair_program(&prog, &b, &mock, &RepairOptions::default()).unwrap();
        assert_eq!(out.final_errors, 0, "{:?}", out.program);
        assert_eq!(out.suggestions.iter().filter(|s| s.accepted).count(), 2);
    }

    #[test]
    fn zero_shot_class_unrepaired() {
        // the fix needs an inserted ')', never seen in training
        let b = bundle();
        let mock = MockCompiler::default();
        let prog = lines("int main() {\n    int a;\n    a = (1 + 2;\n    return 0;\n}\n");
        let before = mock.error_count(&prog).unwrap();
        assert!(before > 0);
        let out = repair_program(&prog, &b, &mock, &RepairOptions::default()).unwrap();
        assert!(out.final_errors > 0);
        // each accepted step strictly lowered the count
        let mut last = before;
        for s in out.suggestions.iter().filter(|s| s.accepted) {
            assert!(s.errors_after.unwrap() < last);
            last = s.errors_after.unwrap();
        }
    }

    fn gold_key(src: &str, tgt: &str, error_id: &str) -> (ClassKey, BTreeSet<Bigram>) {
        let pair =
            TrainPair { id: None, source: src.into(), target: tgt.into(), error_id: error_id.into(), error_line: 0 };
        let m = crate::corpus::mine_pair(0, &pair).unwrap();
        (m.key, m.profile)
    }

    #[test]
    fn gold_key_repairs_zero_shot_class() {
        let b = bundle();
        let mock = MockCompiler::default();
        let src = "int main() {\n    int a;\n    a = (1 + 2;\n    return 0;\n}\n";
        let tgt = "int main() {\n    int a;\n    a = (1 + 2);\n    return 0;\n}\n";
        let (key, profile) = gold_key(src, tgt, "E1");
        assert_eq!(b.catalog.id_of(&key), None);
        let prog = lines(src);
        let n = mock.error_count(&prog).unwrap();
        let opts =
            RepairOptions { gold: GoldHints { class: Some(key), profile: Some((2, profile)) }, ..Default::default() };
        let a = attempt_line(&prog, 2, "E1", n, &b, &mock, &opts).unwrap();
        assert_eq!(a.suggestions.len(), 1);
        assert_eq!(a.suggestions[0].class, None);
        assert!(a.suggestions[0].compiled);
        assert_eq!(a.accepted.unwrap(), lines(tgt));
    }

    #[test]
    fn exhaustive_keeps_trying_after_acceptance() {
        let b = bundle();
        let mock = MockCompiler::default();
        let prog = lines("int main() {\n    int k;\n    k = 2;\n    if (k > 1)) k = 0\n    return 0;\n}\n");
        let n = mock.error_count(&prog).unwrap();
        let quick = attempt_line(&prog, 3, "E3", n, &b, &mock, &RepairOptions::default()).unwrap();
        let full = RepairOptions { exhaustive: true, ..Default::default() };
        let all = attempt_line(&prog, 3, "E3", n, &b, &mock, &full).unwrap();
        assert!(quick.suggestions.last().unwrap().accepted);
        assert!(all.suggestions.len() >= quick.suggestions.len());
        assert!(all.suggestions.len() > 1, "{:?}", all.suggestions);
        assert_eq!(quick.accepted, all.accepted);
        let ranks: Vec<usize> = all.suggestions.iter().map(|s| s.rank).collect();
        assert!(ranks.windows(2).all(|w| w[0] < w[1]));
    }

    /// One error for every program except those containing `good`.
    struct OnlyAccepts {
        good: String,
    }

    impl Compiler for OnlyAccepts {
        fn compile(&self, program: &[String]) -> Result<Vec<Diagnostic>, BridgeError> {
            Ok(if program.contains(&self.good) { vec![] } else { vec![diag(0)] })
        }
    }

    #[test]
    fn clean_compile_beats_earlier_reducing_candidate() {
        let src = "int main() {\n    int total, k;\n    total = k * 3\n    return 0;\n}\n";
        let tgt = "int main() {\n    int total, k;\n    total = k * 3;\n    return 0;\n}\n";
        let (key, profile) = gold_key(src, tgt, "E1");
        let prog = lines(src);
        let table = build_symbol_table(&prog);
        let abs = abstract_program_line(&prog, &table, 2).unwrap();
        let texts: Vec<String> = apply_class(&abs.tokens, &key, &profile)
            .iter()
            .filter_map(|c| concretize_line(&c.tokens, &abs, &table).ok())
            .collect();
        assert!(texts.len() > 1, "{texts:?}");
        let good = texts.last().unwrap().clone();
        let fake = OnlyAccepts { good: good.clone() };
        // with 2 errors before, every candidate lowers the count
        let t = try_class(&prog, &abs, &table, &key, &profile, 2, &fake).unwrap().unwrap();
        assert!(t.suggestion.compiled);
        assert_eq!(t.suggestion.concrete_fix.as_deref(), Some(good.as_str()));
        // nothing compiles: the first reducing candidate is kept
        let none = OnlyAccepts { good: "never".into() };
        let t = try_class(&prog, &abs, &table, &key, &profile, 2, &none).unwrap().unwrap();
        assert!(t.suggestion.accepted && !t.suggestion.compiled);
        assert_eq!(t.suggestion.concrete_fix.as_deref(), Some(texts[0].as_str()));
        // and none is accepted when nothing lowers the count
        let t = try_class(&prog, &abs, &table, &key, &profile, 1, &none).unwrap().unwrap();
        assert!(!t.suggestion.accepted);
        assert!(t.fixed.is_none());
    }
}
